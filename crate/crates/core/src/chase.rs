//! The naive and restricted chase, and term interpretations.
//!
//! Nulls invented for the `i`-th existential variable of the `d`-th tgd on the
//! tuple `a` are the Skolem terms `f<d>_<i>(a)` (both indices 1-based), so the
//! naive chase and the evaluation of the mapping's term interpretation produce
//! literally the same facts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::{Evaluator, Formula, SchemaMapping, Term, Tgd, Tuple, Var};
use crate::model::{find_homomorphism, Fact, Instance, Relation, Schema, Value};

/// Name of the Skolem function for existential `i` of tgd `d` (both 0-based).
pub fn skolem_symbol(d: usize, i: usize) -> String {
    format!("f{}_{}", d + 1, i + 1)
}

fn check_source(m: &SchemaMapping, inst: &Instance) -> Result<()> {
    for f in inst.facts() {
        match m.source.arity(&f.relation) {
            None => return Err(Error::Schema(format!("relation {} is not part of the source schema", f.relation))),
            Some(a) if a != f.args.len() => {
                return Err(Error::Arity { relation: f.relation.to_string(), expected: a, found: f.args.len() })
            }
            Some(_) => {}
        }
        if !f.is_ground() {
            return Err(Error::Schema(format!("source fact {f} contains a null")));
        }
    }
    Ok(())
}

/// Facts of `tgd`'s consequent for the assignment `x = a` and the given
/// values for the existential variables.
fn instantiate(tgd: &Tgd, xs: &[Var], a: &[Value], ys: &[Value]) -> Vec<Fact> {
    let lookup = |v: &Var| -> Value {
        if let Some(i) = tgd.exists.iter().position(|y| y == v) {
            return ys[i].clone();
        }
        let i = xs.iter().position(|x| x == v).expect("safe tgd");
        a[i].clone()
    };
    tgd.consequent
        .iter()
        .map(|atom| {
            Fact::new(
                atom.relation.clone(),
                atom.args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => lookup(v),
                        Term::Const(c) => Value::Const(c.clone()),
                    })
                    .collect(),
            )
        })
        .collect()
}

fn skolem_nulls(d: usize, tgd: &Tgd, a: &[Value]) -> Vec<Value> {
    (0..tgd.exists.len()).map(|i| Value::skolem(skolem_symbol(d, i), a.to_vec())).collect()
}

/// Canonical universal solution: every tgd fires on every satisfying tuple.
pub fn naive_chase(m: &SchemaMapping, inst: &Instance) -> Result<Instance> {
    check_source(m, inst)?;
    let mut ev = Evaluator::new(inst);
    let mut out = Instance::new(m.target.clone());
    for (d, tgd) in m.tgds.iter().enumerate() {
        let xs = tgd.universal_vars();
        for a in ev.eval(&tgd.antecedent, &xs)? {
            let ys = skolem_nulls(d, tgd, &a);
            for f in instantiate(tgd, &xs, &a, &ys) {
                out.insert_unchecked(f);
            }
        }
    }
    Ok(out)
}

/// Chase that fires a tgd on a tuple only when its consequent is not already
/// satisfied by the facts produced so far. Tgds are taken in declaration
/// order and tuples in sorted order.
pub fn restricted_chase(m: &SchemaMapping, inst: &Instance) -> Result<Instance> {
    check_source(m, inst)?;
    let mut ev = Evaluator::new(inst);
    let mut out = Instance::new(m.target.clone());
    for (d, tgd) in m.tgds.iter().enumerate() {
        let xs = tgd.universal_vars();
        let probes: Vec<Value> = (0..tgd.exists.len() as u64).map(Value::fresh).collect();
        for a in ev.eval(&tgd.antecedent, &xs)? {
            let pattern = out.with_facts(instantiate(tgd, &xs, &a, &probes));
            if find_homomorphism(&pattern, &out).is_some() {
                continue;
            }
            for f in instantiate(tgd, &xs, &a, &skolem_nulls(d, tgd, &a)) {
                out.insert_unchecked(f);
            }
        }
    }
    Ok(out)
}

/// A term over the universal variables: a variable or a Skolem function applied to variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ITerm {
    Var(Var),
    App(Arc<str>, Vec<Var>),
}

impl ITerm {
    pub fn is_proper(&self) -> bool {
        matches!(self, ITerm::App(..))
    }
}

impl fmt::Display for ITerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ITerm::Var(v) => write!(f, "{v}"),
            ITerm::App(g, args) => write!(f, "{g}({})", crate::lang::join(args, ", ")),
        }
    }
}

/// `{(t1(x), ..., tk(x)) | condition(x)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub terms: Vec<ITerm>,
    pub vars: Vec<Var>,
    pub condition: Formula,
}

/// For every target relation, a union of branches.
#[derive(Clone, Debug, PartialEq)]
pub struct TermInterpretation {
    pub source: Schema,
    pub target: Schema,
    pub relations: BTreeMap<Relation, Vec<Branch>>,
}

impl TermInterpretation {
    pub fn branches(&self, rel: &Relation) -> &[Branch] {
        self.relations.get(rel).map_or(&[], Vec::as_slice)
    }
}

impl fmt::Display for TermInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (rel, branches) in &self.relations {
            write!(f, "{rel} := ")?;
            if branches.is_empty() {
                f.write_str("{}")?;
            }
            for (i, b) in branches.iter().enumerate() {
                if i > 0 {
                    f.write_str(" \u{222a} ")?;
                }
                write!(f, "{{({}) | {}}}", crate::lang::join(&b.terms, ", "), b.condition)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Skolemizes every tgd and splits it into one branch per consequent atom.
pub fn to_term_interpretation(m: &SchemaMapping) -> Result<TermInterpretation> {
    if m.has_certain() {
        return Err(Error::CertainPresent);
    }
    let mut relations: BTreeMap<Relation, Vec<Branch>> =
        m.target.relations().map(|(r, _)| (r.clone(), Vec::new())).collect();
    for (d, tgd) in m.tgds.iter().enumerate() {
        let xs = tgd.universal_vars();
        for atom in &tgd.consequent {
            let terms = atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => match tgd.exists.iter().position(|y| y == v) {
                        Some(i) => ITerm::App(skolem_symbol(d, i).into(), xs.clone()),
                        None => ITerm::Var(v.clone()),
                    },
                    Term::Const(_) => unreachable!("consequents contain only variables"),
                })
                .collect();
            relations.entry(atom.relation.clone()).or_default().push(Branch {
                terms,
                vars: xs.clone(),
                condition: tgd.antecedent.clone(),
            });
        }
    }
    Ok(TermInterpretation { source: m.source.clone(), target: m.target.clone(), relations })
}

/// The target instance generated by `pi` on a source instance.
pub fn eval_interpretation(pi: &TermInterpretation, inst: &Instance) -> Result<Instance> {
    let mut ev = Evaluator::new(inst);
    let mut cache: Vec<(&Formula, &[Var], BTreeSet<Tuple>)> = Vec::new();
    let mut out = Instance::new(pi.target.clone());
    for (rel, branches) in &pi.relations {
        for b in branches {
            let idx = match cache.iter().position(|(f, v, _)| *f == &b.condition && *v == b.vars.as_slice()) {
                Some(i) => i,
                None => {
                    let ans = ev.eval(&b.condition, &b.vars)?;
                    cache.push((&b.condition, &b.vars, ans));
                    cache.len() - 1
                }
            };
            for a in &cache[idx].2 {
                let val = |v: &Var| a[b.vars.iter().position(|x| x == v).expect("branch variable")].clone();
                let args = b
                    .terms
                    .iter()
                    .map(|t| match t {
                        ITerm::Var(v) => val(v),
                        ITerm::App(g, vs) => Value::skolem(g.clone(), vs.iter().map(val).collect()),
                    })
                    .collect();
                out.insert(Fact::new(rel.clone(), args))?;
            }
        }
    }
    Ok(out)
}
