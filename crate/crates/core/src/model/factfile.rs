//! Fact files: one `R(a, b).` per line, `#` comments, nulls as `?N<id>` or `?f(args)`.

use crate::error::{Error, Result};
use crate::model::instance::{Fact, Instance, Relation, Schema};
use crate::model::value::{Constant, Value};
use crate::syntax::{Cursor, Tok};

/// Parses a fact file against a known schema.
pub fn parse_facts(text: &str, schema: &Schema) -> Result<Instance> {
    let facts = parse_fact_list(text)?;
    let mut inst = Instance::new(schema.clone());
    for (f, (line, col)) in facts {
        inst.insert(f).map_err(|e| Error::Syntax { line, col, msg: e.to_string() })?;
    }
    Ok(inst)
}

/// Parses a fact file, inferring the schema from the facts themselves.
pub fn parse_facts_inferred(text: &str) -> Result<Instance> {
    let facts = parse_fact_list(text)?;
    let mut schema = Schema::new();
    for (f, (line, col)) in &facts {
        match schema.arity(&f.relation) {
            Some(a) if a != f.args.len() => {
                return Err(Error::Syntax {
                    line: *line,
                    col: *col,
                    msg: format!("{} used with arities {a} and {}", f.relation, f.args.len()),
                })
            }
            _ => {
                schema.insert(f.relation.clone(), f.args.len());
            }
        }
    }
    Instance::from_facts(schema, facts.into_iter().map(|(f, _)| f))
}

fn parse_fact_list(text: &str) -> Result<Vec<(Fact, (usize, usize))>> {
    let mut cur = Cursor::new(text)?;
    let mut out = Vec::new();
    while !cur.at_end() {
        let pos = cur.position();
        let rel = cur.ident("relation name")?;
        cur.expect(&Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if !cur.eat(&Tok::RParen) {
            loop {
                args.push(parse_value(&mut cur)?);
                if cur.eat(&Tok::RParen) {
                    break;
                }
                cur.expect(&Tok::Comma, "',' or ')'")?;
            }
        }
        cur.expect(&Tok::Dot, "'.' after fact")?;
        out.push((Fact::new(Relation::new(rel), args), pos));
    }
    Ok(out)
}

pub(crate) fn parse_value(cur: &mut Cursor) -> Result<Value> {
    let pos_err = |cur: &Cursor, e: Error| cur.error(e.to_string());
    match cur.next() {
        Some(Tok::Ident(s)) => Constant::new(&s).map(Value::Const).map_err(|e| pos_err(cur, e)),
        Some(Tok::Quoted(s)) => Constant::new(&s).map(Value::Const).map_err(|e| pos_err(cur, e)),
        Some(Tok::Question) => {
            let name = cur.ident("null name after '?'")?;
            if cur.eat(&Tok::LParen) {
                let mut args = Vec::new();
                if !cur.eat(&Tok::RParen) {
                    loop {
                        args.push(parse_value(cur)?);
                        if cur.eat(&Tok::RParen) {
                            break;
                        }
                        cur.expect(&Tok::Comma, "',' or ')'")?;
                    }
                }
                Ok(Value::skolem(name.as_str(), args))
            } else {
                match name.strip_prefix('N').and_then(|d| d.parse::<u64>().ok()) {
                    Some(id) => Ok(Value::fresh(id)),
                    None => Err(cur.error(format!("bad null ?{name}: expected ?N<id> or ?f(...)"))),
                }
            }
        }
        _ => Err(cur.error("expected a value")),
    }
}

pub fn write_facts(inst: &Instance) -> String {
    inst.to_string()
}
