//! Rendering of formulas and mappings in the mapping DSL.

use std::fmt;
use std::sync::Arc;

use crate::lang::ast::{Atom, Formula, SchemaMapping, Term, Tgd, Var};
use crate::model::{write_quoted, Schema};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write_quoted(f, c.as_str()),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

fn ends_in_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => true,
        Formula::Not(inner) => ends_in_quantifier(inner),
        _ => false,
    }
}

fn needs_parens_in_junction(f: &Formula) -> bool {
    matches!(f, Formula::And(_) | Formula::Or(_)) || ends_in_quantifier(f)
}

fn write_junction(f: &mut fmt::Formatter<'_>, parts: &[Formula], op: &str) -> fmt::Result {
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            write!(f, " {op} ")?;
        }
        if needs_parens_in_junction(p) {
            write!(f, "({p})")?;
        } else {
            write!(f, "{p}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Eq(a, b) => write!(f, "{a} = {b}"),
            Formula::Lt(a, b) => write!(f, "{a} < {b}"),
            Formula::And(cs) if cs.is_empty() => f.write_str("true"),
            Formula::Or(cs) if cs.is_empty() => f.write_str("false"),
            Formula::And(cs) => write_junction(f, cs, "&"),
            Formula::Or(cs) => write_junction(f, cs, "|"),
            Formula::Not(c) => match **c {
                Formula::And(_) | Formula::Or(_) => write!(f, "!({c})"),
                _ => write!(f, "!{c}"),
            },
            Formula::Exists(..) | Formula::Forall(..) => {
                let is_exists = matches!(self, Formula::Exists(..));
                let mut vars: Vec<&Var> = Vec::new();
                let mut body = self;
                loop {
                    match (body, is_exists) {
                        (Formula::Exists(v, b), true) | (Formula::Forall(v, b), false) if !vars.contains(&v) => {
                            vars.push(v);
                            body = b;
                        }
                        _ => break,
                    }
                }
                let kw = if is_exists { "exists" } else { "forall" };
                write!(f, "{kw} ")?;
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ": {body}")
            }
            Formula::Certain(cq) => {
                f.write_str("certain[")?;
                for (i, v) in cq.query.answer.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "] {{ {} }}", cq.query.to_formula())
            }
        }
    }
}

struct Consequent<'a>(&'a Tgd);

impl fmt::Display for Consequent<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tgd = self.0;
        if !tgd.exists.is_empty() {
            f.write_str("exists ")?;
            for (i, v) in tgd.exists.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str(": ")?;
        }
        for (i, a) in tgd.consequent.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Tgd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.antecedent, Consequent(self))
    }
}

fn write_schema(f: &mut fmt::Formatter<'_>, kw: &str, schema: &Schema) -> fmt::Result {
    if schema.is_empty() {
        return Ok(());
    }
    write!(f, "{kw} ")?;
    for (i, (r, a)) in schema.relations().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{r}/{a}")?;
    }
    f.write_str(".\n")
}

impl SchemaMapping {
    /// The base mapping referenced by certain-answer nodes, if any.
    /// When nodes refer to several different mappings the first one is returned.
    pub fn certain_base(&self) -> Option<Arc<SchemaMapping>> {
        self.tgds.iter().flat_map(|t| t.antecedent.certain_nodes()).map(|c| c.mapping.clone()).next()
    }
}

impl fmt::Display for SchemaMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_schema(f, "source", &self.source)?;
        write_schema(f, "target", &self.target)?;
        if let Some(base) = self.certain_base() {
            for tgd in &base.tgds {
                writeln!(f, "base: {tgd}.")?;
            }
        }
        for tgd in &self.tgds {
            writeln!(f, "tgd: {tgd}.")?;
        }
        Ok(())
    }
}
