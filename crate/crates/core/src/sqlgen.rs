//! SQL emission for certain-free formulas and term interpretations.
//!
//! Every source relation `R` of arity k becomes a table `"R"(c1, ..., ck)` of
//! TEXT columns, and `_adom` is a view over all values stored in the source.
//! Variables range over `_adom`, matching the evaluator. Labeled nulls are
//! TEXT values starting with `@`: a Skolem term `f(a, b)` is `@f(a,b)`, with
//! `\`, `,`, `(` and `)` in constant arguments escaped by a backslash, and a
//! fresh null `N7` is `@7`. Constants never start with `@`, so the encoding is
//! injective and, on constants, the binary TEXT order is the constant order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::chase::{Branch, ITerm, TermInterpretation};
use crate::error::{Error, Result};
use crate::lang::{Formula, Term, Var};
use crate::model::{Constant, Fact, Instance, Null, Relation, Schema, Value};

/// Name of the view holding the active domain of the source database.
pub const ADOM: &str = "_adom";

pub fn quote_ident(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\"\""))
}

pub fn quote_literal(text: &str) -> String {
    format!("'{}'", text.replace('\'', "''"))
}

fn column(i: usize) -> String {
    format!("c{}", i + 1)
}

fn escape_arg(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        if matches!(ch, '\\' | ',' | '(' | ')') {
            out.push('\\');
        }
        out.push(ch);
    }
    out
}

/// Text form of a value in the database and in CSV files.
pub fn encode_value(v: &Value) -> String {
    match v {
        Value::Const(c) => c.as_str().to_string(),
        Value::Null(Null::Fresh(id)) => format!("@{id}"),
        Value::Null(Null::Skolem(t)) => {
            let args: Vec<String> = t
                .args
                .iter()
                .map(|a| match a {
                    Value::Const(c) => escape_arg(c.as_str()),
                    null => encode_value(null),
                })
                .collect();
            format!("@{}({})", t.function, args.join(","))
        }
    }
}

/// Inverse of [`encode_value`].
pub fn decode_value(text: &str) -> Result<Value> {
    if !text.starts_with('@') {
        return Ok(Value::Const(Constant::new(text)?));
    }
    let chars: Vec<char> = text.chars().collect();
    let (v, end) = decode_null(&chars, 0).map_err(|msg| Error::Decode(format!("{text}: {msg}")))?;
    if end != chars.len() {
        return Err(Error::Decode(format!("{text}: trailing characters")));
    }
    Ok(v)
}

fn decode_null(s: &[char], start: usize) -> std::result::Result<(Value, usize), String> {
    let mut i = start + 1;
    let name_start = i;
    while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == '_') {
        i += 1;
    }
    let name: String = s[name_start..i].iter().collect();
    if name.is_empty() {
        return Err("missing function symbol".into());
    }
    if i == s.len() || s[i] != '(' {
        return match name.parse::<u64>() {
            Ok(id) => Ok((Value::fresh(id), i)),
            Err(_) => Err("expected '('".into()),
        };
    }
    i += 1;
    let mut args = Vec::new();
    if i < s.len() && s[i] == ')' {
        return Ok((Value::skolem(name, args), i + 1));
    }
    loop {
        if i < s.len() && s[i] == '@' {
            let (v, next) = decode_null(s, i)?;
            args.push(v);
            i = next;
        } else {
            let mut text = String::new();
            while i < s.len() && !matches!(s[i], ',' | ')') {
                if s[i] == '\\' {
                    i += 1;
                    if i == s.len() {
                        return Err("dangling escape".into());
                    }
                }
                text.push(s[i]);
                i += 1;
            }
            args.push(Value::Const(Constant::new(&text).map_err(|e| e.to_string())?));
        }
        match s.get(i) {
            Some(',') => i += 1,
            Some(')') => return Ok((Value::skolem(name, args), i + 1)),
            _ => return Err("unterminated argument list".into()),
        }
    }
}

/// Compositional translation. Each formula becomes a SELECT whose columns
/// are its free variables, in [`Formula::free_vars`] order, or the single
/// column `_one` when it has none.
struct Translator<'s> {
    schema: &'s Schema,
    next_alias: usize,
}

fn select_list(items: &[(String, &Var)]) -> String {
    if items.is_empty() {
        return "1 AS _one".into();
    }
    items.iter().map(|(expr, v)| format!("{expr} AS {}", quote_ident(v.as_str()))).collect::<Vec<_>>().join(", ")
}

fn from_clause(sources: &[String]) -> String {
    if sources.is_empty() {
        String::new()
    } else {
        format!(" FROM {}", sources.join(", "))
    }
}

fn where_clause(conds: &[String]) -> String {
    if conds.is_empty() {
        String::new()
    } else {
        format!(" WHERE {}", conds.join(" AND "))
    }
}

impl Translator<'_> {
    fn alias(&mut self) -> String {
        self.next_alias += 1;
        format!("t{}", self.next_alias)
    }

    fn query(&mut self, f: &Formula) -> Result<String> {
        match f {
            Formula::True => Ok("SELECT 1 AS _one".into()),
            Formula::False => Ok("SELECT 1 AS _one WHERE 0".into()),
            Formula::Atom(_) | Formula::Eq(..) | Formula::Lt(..) | Formula::Not(_) => {
                self.conjunction(std::slice::from_ref(f))
            }
            Formula::And(parts) => self.conjunction(parts),
            Formula::Or(parts) => {
                let vars = f.free_vars();
                let mut branches = Vec::new();
                for g in parts {
                    let inner = self.query(g)?;
                    let t = self.alias();
                    let have = g.free_vars();
                    let mut sources = vec![format!("({inner}) {t}")];
                    let mut items = Vec::new();
                    for v in &vars {
                        if have.contains(v) {
                            items.push((format!("{t}.{}", quote_ident(v.as_str())), v));
                        } else {
                            let a = self.alias();
                            sources.push(format!("{ADOM} {a}"));
                            items.push((format!("{a}.v"), v));
                        }
                    }
                    branches.push(format!("SELECT {}{}", select_list(&items), from_clause(&sources)));
                }
                Ok(branches.join(" UNION "))
            }
            Formula::Exists(v, body) => {
                let inner = self.query(body)?;
                let t = self.alias();
                let vars: Vec<Var> = body.free_vars().into_iter().filter(|w| w != v).collect();
                let items: Vec<(String, &Var)> =
                    vars.iter().map(|w| (format!("{t}.{}", quote_ident(w.as_str())), w)).collect();
                Ok(format!("SELECT DISTINCT {} FROM ({inner}) {t}", select_list(&items)))
            }
            Formula::Forall(v, body) => {
                let dual = Formula::Not(Box::new(Formula::Exists(v.clone(), Box::new(Formula::Not(body.clone())))));
                self.query(&dual)
            }
            Formula::Certain(_) => Err(Error::CertainPresent),
        }
    }

    /// A conjunction: positive parts are joined, variables they leave
    /// unbound range over `_adom`, and comparisons and negations become
    /// filters.
    fn conjunction(&mut self, parts: &[Formula]) -> Result<String> {
        let mut sources: Vec<String> = Vec::new();
        let mut conds: Vec<String> = Vec::new();
        let mut bound: BTreeMap<Var, String> = BTreeMap::new();
        let mut filters: Vec<&Formula> = Vec::new();
        let mut vars: Vec<Var> = Vec::new();
        for p in parts {
            for v in p.free_vars() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
        }
        for p in parts {
            match p {
                Formula::Eq(..) | Formula::Lt(..) | Formula::Not(_) => filters.push(p),
                Formula::Atom(a) => {
                    let arity = self.schema.arity(&a.relation).ok_or_else(|| {
                        Error::Schema(format!("relation {} is not part of the source schema", a.relation))
                    })?;
                    if arity != a.args.len() {
                        return Err(Error::Arity {
                            relation: a.relation.to_string(),
                            expected: arity,
                            found: a.args.len(),
                        });
                    }
                    let t = self.alias();
                    sources.push(format!("{} {t}", quote_ident(a.relation.as_str())));
                    for (i, arg) in a.args.iter().enumerate() {
                        let col = format!("{t}.{}", column(i));
                        match arg {
                            Term::Const(c) => conds.push(format!("{col} = {}", quote_literal(c.as_str()))),
                            Term::Var(v) => match bound.get(v) {
                                Some(e) => conds.push(format!("{col} = {e}")),
                                None => {
                                    bound.insert(v.clone(), col);
                                }
                            },
                        }
                    }
                }
                Formula::True => {}
                Formula::False => conds.push("0".into()),
                other => {
                    let inner = self.query(other)?;
                    let t = self.alias();
                    sources.push(format!("({inner}) {t}"));
                    for v in other.free_vars() {
                        let col = format!("{t}.{}", quote_ident(v.as_str()));
                        match bound.get(&v) {
                            Some(e) => conds.push(format!("{col} = {e}")),
                            None => {
                                bound.insert(v, col);
                            }
                        }
                    }
                }
            }
        }
        for v in &vars {
            if !bound.contains_key(v) {
                let a = self.alias();
                sources.push(format!("{ADOM} {a}"));
                bound.insert(v.clone(), format!("{a}.v"));
            }
        }
        for f in filters {
            conds.push(self.filter(f, &bound)?);
        }
        let items: Vec<(String, &Var)> = vars.iter().map(|v| (bound[v].clone(), v)).collect();
        Ok(format!("SELECT DISTINCT {}{}{}", select_list(&items), from_clause(&sources), where_clause(&conds)))
    }

    fn term(&self, t: &Term, bound: &BTreeMap<Var, String>) -> String {
        match t {
            Term::Var(v) => bound[v].clone(),
            Term::Const(c) => quote_literal(c.as_str()),
        }
    }

    fn filter(&mut self, f: &Formula, bound: &BTreeMap<Var, String>) -> Result<String> {
        match f {
            Formula::Eq(s, t) => Ok(format!("{} = {}", self.term(s, bound), self.term(t, bound))),
            Formula::Lt(s, t) => Ok(format!("{} < {}", self.term(s, bound), self.term(t, bound))),
            Formula::Not(g) => {
                let inner = self.query(g)?;
                let t = self.alias();
                let conds: Vec<String> =
                    g.free_vars().iter().map(|v| format!("{t}.{} = {}", quote_ident(v.as_str()), bound[v])).collect();
                Ok(format!("NOT EXISTS (SELECT 1 FROM ({inner}) {t}{})", where_clause(&conds)))
            }
            _ => unreachable!("only comparisons and negations are filters"),
        }
    }
}

/// A SELECT over the source tables returning the answers of `f` for the
/// variables `free`, one column per variable, named after it.
pub fn formula_to_sql(f: &Formula, free: &[Var], schema: &Schema) -> Result<String> {
    let mut tr = Translator { schema, next_alias: 0 };
    let inner = tr.query(f)?;
    let have = f.free_vars();
    let t = tr.alias();
    let mut sources = vec![format!("({inner}) {t}")];
    let mut items = Vec::new();
    for v in free {
        if have.contains(v) {
            items.push((format!("{t}.{}", quote_ident(v.as_str())), v));
        } else {
            let a = tr.alias();
            sources.push(format!("{ADOM} {a}"));
            items.push((format!("{a}.v"), v));
        }
    }
    if let Some(v) = have.iter().find(|v| !free.contains(v)) {
        return Err(Error::UnboundVariable(v.to_string()));
    }
    Ok(format!("SELECT DISTINCT {}{}", select_list(&items), from_clause(&sources)))
}

/// Table definitions and the active-domain view for a source schema.
pub fn schema_ddl(schema: &Schema) -> String {
    let mut out = String::new();
    for (rel, arity) in schema.relations() {
        let cols: Vec<String> = (0..arity).map(|i| format!("{} TEXT NOT NULL", column(i))).collect();
        let _ = writeln!(out, "CREATE TABLE {} ({});", quote_ident(rel.as_str()), cols.join(", "));
    }
    out
}

pub fn adom_view(schema: &Schema) -> String {
    let mut parts = Vec::new();
    for (rel, arity) in schema.relations() {
        for i in 0..arity {
            parts.push(format!("SELECT {} AS v FROM {}", column(i), quote_ident(rel.as_str())));
        }
    }
    if parts.is_empty() {
        parts.push("SELECT '' AS v WHERE 0".into());
    }
    format!("CREATE VIEW {ADOM} AS {};\n", parts.join(" UNION "))
}

/// Name of the view computing target relation `rel`.
pub fn target_view(rel: &Relation) -> String {
    format!("target_{}", rel.as_str())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqlArtifact {
    pub ddl: String,
    pub adom_view: String,
    /// One SELECT per target relation, columns `c1..ck`.
    pub queries: Vec<(Relation, String)>,
}

impl SqlArtifact {
    /// The whole script: optional DDL, the domain view, and one view per
    /// target relation.
    pub fn to_script(&self, with_ddl: bool) -> String {
        let mut out = String::new();
        if with_ddl {
            out += &self.ddl;
        }
        out += &self.adom_view;
        for (rel, q) in &self.queries {
            let _ = writeln!(out, "CREATE VIEW {} AS {q};", quote_ident(&target_view(rel)));
        }
        out
    }
}

fn term_sql(t: &ITerm, row: &str) -> String {
    let col = |v: &Var| format!("{row}.{}", quote_ident(v.as_str()));
    match t {
        ITerm::Var(v) => col(v),
        ITerm::App(g, args) => {
            let mut parts = vec![quote_literal(&format!("@{g}("))];
            for (i, v) in args.iter().enumerate() {
                if i > 0 {
                    parts.push("','".into());
                }
                let mut e = col(v);
                for ch in ["\\", ",", "(", ")"] {
                    e = format!("replace({e}, {}, {})", quote_literal(ch), quote_literal(&format!("\\{ch}")));
                }
                parts.push(e);
            }
            parts.push("')'".into());
            parts.join(" || ")
        }
    }
}

fn branch_sql(b: &Branch, schema: &Schema) -> Result<String> {
    let cond = formula_to_sql(&b.condition, &b.vars, schema)?;
    let cols: Vec<String> =
        b.terms.iter().enumerate().map(|(i, t)| format!("{} AS {}", term_sql(t, "b"), column(i))).collect();
    Ok(format!("SELECT {} FROM ({cond}) b", cols.join(", ")))
}

/// SQL computing `pi` on a source database.
pub fn interpretation_to_sql(pi: &TermInterpretation) -> Result<SqlArtifact> {
    let mut queries = Vec::new();
    for (rel, arity) in pi.target.relations() {
        let branches = pi.branches(rel);
        let cols: Vec<String> = (0..arity).map(column).collect();
        let q = if branches.is_empty() {
            let empty: Vec<String> = cols.iter().map(|c| format!("'' AS {c}")).collect();
            format!("SELECT {} WHERE 0", empty.join(", "))
        } else {
            let parts = branches.iter().map(|b| branch_sql(b, &pi.source)).collect::<Result<Vec<_>>>()?;
            format!("SELECT DISTINCT {} FROM ({}) u", cols.join(", "), parts.join(" UNION ALL "))
        };
        queries.push((rel.clone(), q));
    }
    Ok(SqlArtifact { ddl: schema_ddl(&pi.source), adom_view: adom_view(&pi.source), queries })
}

/// Builds a target instance from encoded rows per relation.
pub fn decode_rows(schema: &Schema, rows: impl IntoIterator<Item = (Relation, Vec<String>)>) -> Result<Instance> {
    let mut inst = Instance::new(schema.clone());
    for (rel, row) in rows {
        let args = row.iter().map(|s| decode_value(s)).collect::<Result<Vec<_>>>()?;
        inst.insert(Fact::new(rel, args))?;
    }
    Ok(inst)
}

/// Reads `dir/R.csv` for every relation `R` of `schema` (missing files are
/// empty relations). Files have no header and one column per argument.
pub fn read_csv_dir(dir: &Path, schema: &Schema) -> Result<Instance> {
    let mut rows = Vec::new();
    for (rel, _) in schema.relations() {
        let path = dir.join(format!("{}.csv", rel.as_str()));
        if !path.exists() {
            continue;
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(&path)?;
        for rec in rdr.records() {
            rows.push((rel.clone(), rec?.iter().map(str::to_string).collect()));
        }
    }
    decode_rows(schema, rows)
}

/// Writes one CSV file per relation of the instance's schema.
pub fn write_csv_dir(dir: &Path, inst: &Instance) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (rel, _) in inst.schema().relations() {
        let mut w =
            csv::WriterBuilder::new().has_headers(false).from_path(dir.join(format!("{}.csv", rel.as_str())))?;
        for f in inst.facts_of(rel) {
            w.write_record(f.args.iter().map(encode_value))?;
        }
        w.flush()?;
    }
    Ok(())
}
