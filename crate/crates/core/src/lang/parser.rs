//! Recursive-descent parser for the mapping DSL.
//!
//! ```text
//! source R/2, P/1.
//! target S/2.
//! tgd: R(x,y) & x < y -> exists z: S(x,z) & S(y,z).
//! ```
//!
//! Certain-answer nodes are written `certain[x, y] { cq }` and refer to the
//! mapping assembled from the `base:` statements that precede them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::ast::{Atom, Cq, Formula, SchemaMapping, Term, Tgd, Var};
use crate::model::{Constant, Relation, Schema};
use crate::syntax::{Cursor, Tok};

const KEYWORDS: &[&str] = &["source", "target", "tgd", "base", "exists", "forall", "true", "false", "certain"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Source,
    Target,
}

fn located((line, col): (usize, usize), e: Error) -> Error {
    match e {
        e @ (Error::Syntax { .. } | Error::Located { .. }) => e,
        e => Error::Located { line, col, inner: Box::new(e) },
    }
}

struct Parser {
    cur: Cursor,
    source: Schema,
    target: Schema,
    base_tgds: Vec<Tgd>,
    base: Option<Arc<SchemaMapping>>,
    in_certain: bool,
}

/// Parses a complete mapping document.
pub fn parse_mapping(text: &str) -> Result<SchemaMapping> {
    let mut p = Parser::new(text, Schema::new(), Schema::new())?;
    let mut tgds = Vec::new();
    while !p.cur.at_end() {
        let pos = p.cur.position();
        let kw = p.cur.ident("a statement keyword")?;
        match kw.as_str() {
            "source" | "target" => {
                p.declarations(kw == "source")?;
            }
            "tgd" => {
                p.cur.expect(&Tok::Colon, "':' after tgd")?;
                tgds.push(p.tgd()?);
            }
            "base" => {
                p.cur.expect(&Tok::Colon, "':' after base")?;
                if p.base.is_some() {
                    return Err(located(
                        pos,
                        Error::Schema("base statements must precede any certain[...] node".into()),
                    ));
                }
                let tgd = p.tgd()?;
                if tgd.antecedent.has_certain() {
                    return Err(located(pos, Error::Schema("base tgds may not contain certain[...] nodes".into())));
                }
                p.base_tgds.push(tgd);
            }
            other => return Err(crate::syntax::syntax_error(pos.0, pos.1, format!("unknown statement {other:?}"))),
        }
        p.cur.expect(&Tok::Dot, "'.' at end of statement")?;
    }
    let mapping = SchemaMapping::new(p.source, p.target, tgds)?;
    Ok(mapping)
}

/// Parses a source formula such as a tgd antecedent.
pub fn parse_formula(text: &str, source: &Schema) -> Result<Formula> {
    let mut p = Parser::new(text, source.clone(), Schema::new())?;
    let f = p.formula(Side::Source)?;
    p.finish()?;
    Ok(f)
}

/// Parses a conjunctive query over `target`, written `[x, y] exists z: S(x,z) & S(z,y)`.
pub fn parse_cq(text: &str, target: &Schema) -> Result<Cq> {
    let mut p = Parser::new(text, Schema::new(), target.clone())?;
    p.cur.expect(&Tok::LBracket, "'[' starting the answer variables")?;
    let answer = p.var_list(&Tok::RBracket)?;
    let pos = p.cur.position();
    let body = p.formula(Side::Target)?;
    p.finish()?;
    Cq::from_formula(&body, answer).map_err(|e| located(pos, e))
}

impl Parser {
    fn new(text: &str, source: Schema, target: Schema) -> Result<Self> {
        Ok(Parser { cur: Cursor::new(text)?, source, target, base_tgds: Vec::new(), base: None, in_certain: false })
    }

    fn finish(&self) -> Result<()> {
        if self.cur.at_end() {
            Ok(())
        } else {
            Err(self.cur.error("unexpected trailing input"))
        }
    }

    fn declarations(&mut self, source: bool) -> Result<()> {
        loop {
            let pos = self.cur.position();
            let name = self.cur.ident("relation name")?;
            self.cur.expect(&Tok::Slash, "'/' and an arity")?;
            let arity_pos = self.cur.position();
            let arity: usize = self
                .cur
                .ident("arity")?
                .parse()
                .map_err(|_| crate::syntax::syntax_error(arity_pos.0, arity_pos.1, "arity must be a number"))?;
            if arity == 0 {
                return Err(located(pos, Error::Schema(format!("relation {name} must have arity at least 1"))));
            }
            let rel = Relation::new(&name);
            let (this, other) =
                if source { (&mut self.source, &self.target) } else { (&mut self.target, &self.source) };
            if other.contains(&rel) {
                return Err(located(
                    pos,
                    Error::Schema(format!("relation {name} is declared in both source and target schemas")),
                ));
            }
            if let Some(prev) = this.insert(rel, arity) {
                if prev != arity {
                    return Err(located(
                        pos,
                        Error::Schema(format!("relation {name} redeclared with arity {arity}, was {prev}")),
                    ));
                }
            }
            if !self.cur.eat(&Tok::Comma) {
                return Ok(());
            }
        }
    }

    fn tgd(&mut self) -> Result<Tgd> {
        let pos = self.cur.position();
        let antecedent = self.formula(Side::Source)?;
        self.cur.expect(&Tok::Arrow, "'->'")?;
        let mut exists = Vec::new();
        if self.cur.eat_keyword("exists") {
            exists = self.var_list(&Tok::Colon)?;
        }
        let mut consequent = Vec::new();
        loop {
            match self.primary(Side::Target)? {
                Formula::Atom(a) => consequent.push(a),
                _ => return Err(self.cur.error("consequents are conjunctions of relation atoms")),
            }
            if !self.cur.eat(&Tok::Amp) {
                break;
            }
        }
        Tgd::new(antecedent, exists, consequent).map_err(|e| located(pos, e))
    }

    /// Comma-separated variables closed by `close`.
    fn var_list(&mut self, close: &Tok) -> Result<Vec<Var>> {
        let mut out = Vec::new();
        if self.cur.eat(close) {
            return Ok(out);
        }
        loop {
            let v = self.variable()?;
            if out.contains(&v) {
                return Err(self.cur.error(format!("variable {v} listed twice")));
            }
            out.push(v);
            if self.cur.eat(close) {
                return Ok(out);
            }
            self.cur.expect(&Tok::Comma, "','")?;
        }
    }

    fn variable(&mut self) -> Result<Var> {
        match self.cur.peek() {
            Some(Tok::Ident(s)) if is_variable_name(s) => {
                let v = Var::new(s);
                self.cur.next();
                Ok(v)
            }
            _ => Err(self.cur.error("expected a variable (lowercase identifier)")),
        }
    }

    fn formula(&mut self, side: Side) -> Result<Formula> {
        let first = self.conjunction(side)?;
        if self.cur.peek() != Some(&Tok::Pipe) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.cur.eat(&Tok::Pipe) {
            parts.push(self.conjunction(side)?);
        }
        Ok(Formula::Or(parts))
    }

    fn conjunction(&mut self, side: Side) -> Result<Formula> {
        let first = self.unary(side)?;
        if self.cur.peek() != Some(&Tok::Amp) {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.cur.eat(&Tok::Amp) {
            parts.push(self.unary(side)?);
        }
        Ok(Formula::And(parts))
    }

    fn unary(&mut self, side: Side) -> Result<Formula> {
        if self.cur.eat(&Tok::Bang) {
            return Ok(Formula::Not(Box::new(self.unary(side)?)));
        }
        for (kw, is_exists) in [("exists", true), ("forall", false)] {
            if self.cur.eat_keyword(kw) {
                let vars = self.var_list(&Tok::Colon)?;
                if vars.is_empty() {
                    return Err(self.cur.error("quantifier needs at least one variable"));
                }
                let body = self.formula(side)?;
                return Ok(vars.into_iter().rev().fold(body, |acc, v| {
                    if is_exists {
                        Formula::Exists(v, Box::new(acc))
                    } else {
                        Formula::Forall(v, Box::new(acc))
                    }
                }));
            }
        }
        self.primary(side)
    }

    fn primary(&mut self, side: Side) -> Result<Formula> {
        if self.cur.eat(&Tok::LParen) {
            let f = self.formula(side)?;
            self.cur.expect(&Tok::RParen, "')'")?;
            return Ok(f);
        }
        if self.cur.eat_keyword("true") {
            return Ok(Formula::True);
        }
        if self.cur.eat_keyword("false") {
            return Ok(Formula::False);
        }
        if matches!(self.cur.peek(), Some(Tok::Ident(s)) if s == "certain")
            && self.cur.peek_at(1) == Some(&Tok::LBracket)
        {
            return self.certain(side);
        }
        if let (Some(Tok::Ident(_)), Some(Tok::LParen)) = (self.cur.peek(), self.cur.peek_at(1)) {
            return self.atom(side);
        }
        let lhs = self.term()?;
        let op = self.cur.next();
        let rhs = self.term()?;
        match op {
            Some(Tok::Eq) => Ok(Formula::Eq(lhs, rhs)),
            Some(Tok::Neq) => Ok(Formula::Not(Box::new(Formula::Eq(lhs, rhs)))),
            Some(Tok::Lt) => Ok(Formula::Lt(lhs, rhs)),
            Some(Tok::Le) => Ok(Formula::Or(vec![Formula::Lt(lhs.clone(), rhs.clone()), Formula::Eq(lhs, rhs)])),
            _ => Err(self.cur.error("expected a comparison operator (=, !=, <, <=)")),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let pos = self.cur.position();
        match self.cur.next() {
            Some(Tok::Quoted(s)) => Constant::new(&s).map(Term::Const).map_err(|e| located(pos, e)),
            Some(Tok::Ident(s)) if is_variable_name(&s) => Ok(Term::Var(Var::new(s))),
            Some(Tok::Ident(s)) => Err(crate::syntax::syntax_error(
                pos.0,
                pos.1,
                format!("{s:?} is not a variable; constants must be single-quoted"),
            )),
            _ => Err(crate::syntax::syntax_error(pos.0, pos.1, "expected a term")),
        }
    }

    fn atom(&mut self, side: Side) -> Result<Formula> {
        let pos = self.cur.position();
        let name = self.cur.ident("relation name")?;
        self.cur.expect(&Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if !self.cur.eat(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.cur.eat(&Tok::RParen) {
                    break;
                }
                self.cur.expect(&Tok::Comma, "',' or ')'")?;
            }
        }
        let rel = Relation::new(&name);
        let (schema, other, what) = match side {
            Side::Source => (&self.source, &self.target, "source"),
            Side::Target => (&self.target, &self.source, "target"),
        };
        if !schema.contains(&rel) {
            let err = if other.contains(&rel) {
                let other_what = if side == Side::Source { "target" } else { "source" };
                Error::Schema(format!("{other_what} relation {name} used where a {what} relation is expected"))
            } else {
                Error::UnknownRelation(name)
            };
            return Err(located(pos, err));
        }
        schema.check(&rel, args.len()).map_err(|e| located(pos, e))?;
        Ok(Formula::Atom(Atom::new(rel, args)))
    }

    fn certain(&mut self, side: Side) -> Result<Formula> {
        let pos = self.cur.position();
        if side != Side::Source || self.in_certain {
            return Err(located(pos, Error::Schema("certain[...] may only appear in tgd antecedents".into())));
        }
        self.cur.next();
        self.cur.expect(&Tok::LBracket, "'['")?;
        let answer = self.var_list(&Tok::RBracket)?;
        self.cur.expect(&Tok::LBrace, "'{'")?;
        self.in_certain = true;
        let body = self.formula(Side::Target);
        self.in_certain = false;
        let body = body?;
        self.cur.expect(&Tok::RBrace, "'}'")?;
        let query = Cq::from_formula(&body, answer).map_err(|e| located(pos, e))?;
        let base = match &self.base {
            Some(b) => b.clone(),
            None => {
                let m =
                    SchemaMapping::new(self.source.clone(), self.target.clone(), std::mem::take(&mut self.base_tgds))
                        .map_err(|e| located(pos, e))?;
                let m = Arc::new(m);
                self.base = Some(m.clone());
                m
            }
        };
        Ok(Formula::certain(query, base))
    }
}

fn is_variable_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase()) && !KEYWORDS.contains(&s)
}
