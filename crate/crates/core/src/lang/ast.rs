use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{Constant, Relation, Schema};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(name.as_ref().into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

/// Terms inside formulas: variables and constants only.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Const(Constant),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl From<Var> for Term {
    fn from(v: Var) -> Self {
        Term::Var(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: Relation,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(relation: impl Into<Relation>, args: Vec<Term>) -> Self {
        Atom { relation: relation.into(), args }
    }

    /// Atom over variables given by name.
    pub fn vars(relation: &str, names: &[&str]) -> Self {
        Atom::new(relation, names.iter().map(|n| Term::var(n)).collect())
    }

    pub fn variables(&self) -> impl Iterator<Item = &Var> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn rename(&self, map: &HashMap<Var, Term>) -> Atom {
        Atom { relation: self.relation.clone(), args: self.args.iter().map(|t| subst_term(t, map)).collect() }
    }
}

fn subst_term(t: &Term, map: &HashMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
    }
}

/// A conjunctive query `answer :- exists ex. atoms & equalities`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cq {
    pub answer: Vec<Var>,
    pub exists: Vec<Var>,
    pub atoms: Vec<Atom>,
    pub equalities: Vec<(Term, Term)>,
}

impl Cq {
    /// Builds a CQ from atoms; every variable not listed in `answer` is existential.
    pub fn new(answer: Vec<Var>, atoms: Vec<Atom>) -> Self {
        let answer_set: HashSet<&Var> = answer.iter().collect();
        let mut exists = Vec::new();
        for v in atoms.iter().flat_map(Atom::variables) {
            if !answer_set.contains(v) && !exists.contains(v) {
                exists.push(v.clone());
            }
        }
        Cq { answer, exists, atoms, equalities: Vec::new() }
    }

    /// Reads a formula of the shape `exists* . (atoms & equalities)`.
    pub fn from_formula(f: &Formula, answer: Vec<Var>) -> Result<Cq> {
        let mut exists = Vec::new();
        let mut body = f;
        while let Formula::Exists(v, inner) = body {
            exists.push(v.clone());
            body = inner;
        }
        let mut atoms = Vec::new();
        let mut equalities = Vec::new();
        let mut stack = vec![body];
        while let Some(g) = stack.pop() {
            match g {
                Formula::Atom(a) => atoms.push(a.clone()),
                Formula::Eq(a, b) => equalities.push((a.clone(), b.clone())),
                Formula::True => {}
                Formula::And(cs) => stack.extend(cs.iter().rev()),
                other => return Err(Error::NotConjunctive(other.to_string())),
            }
        }
        let free: HashSet<Var> = f.free_vars().into_iter().collect();
        let answer_set: HashSet<Var> = answer.iter().cloned().collect();
        if free != answer_set || answer_set.len() != answer.len() {
            return Err(Error::NotConjunctive(format!(
                "answer variables [{}] do not match free variables of {f}",
                join(&answer, ", ")
            )));
        }
        Ok(Cq { answer, exists, atoms, equalities })
    }

    pub fn to_formula(&self) -> Formula {
        let mut parts: Vec<Formula> = self.atoms.iter().cloned().map(Formula::Atom).collect();
        parts.extend(self.equalities.iter().map(|(a, b)| Formula::Eq(a.clone(), b.clone())));
        Formula::exists_many(self.exists.clone(), Formula::and(parts))
    }
}

/// A certain-answer node: the certain answers of a CQ under a base mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct CertainQuery {
    pub query: Cq,
    pub mapping: Arc<SchemaMapping>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Eq(Term, Term),
    Lt(Term, Term),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    Certain(Arc<CertainQuery>),
}

impl Formula {
    /// Conjunction, flattening nested conjunctions and dropping `true`.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::And(cs) => out.extend(cs),
                Formula::False => return Formula::False,
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction, flattening nested disjunctions and dropping `false`.
    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::Or(cs) => out.extend(cs),
                Formula::True => return Formula::True,
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::Not(inner) => *inner,
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            f => Formula::Not(Box::new(f)),
        }
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn exists_many(vars: Vec<Var>, body: Formula) -> Formula {
        vars.into_iter().rev().fold(body, |acc, v| Formula::Exists(v, Box::new(acc)))
    }

    /// Bottom-up cleanup: constant folding, absorption `a | (a & b) = a`,
    /// and elimination of `exists v: v = w & ...` for variables `w`.
    /// The result is equivalent under active-domain semantics.
    pub fn simplify(&self) -> Formula {
        match self {
            Formula::And(cs) => Formula::and(cs.iter().map(Formula::simplify).collect()),
            Formula::Or(cs) => {
                let parts: Vec<Formula> = match Formula::or(cs.iter().map(Formula::simplify).collect()) {
                    Formula::Or(ps) => ps,
                    other => return other,
                };
                let mut kept: Vec<Formula> = Vec::new();
                for (i, p) in parts.iter().enumerate() {
                    let absorbed = match p {
                        Formula::And(inner) => parts.iter().enumerate().any(|(j, q)| j != i && inner.contains(q)),
                        _ => false,
                    };
                    if !absorbed && !kept.contains(p) {
                        kept.push(p.clone());
                    }
                }
                Formula::or(kept)
            }
            Formula::Not(c) => Formula::not(c.simplify()),
            Formula::Exists(v, c) => {
                let body = c.simplify();
                let parts = match &body {
                    Formula::False => return Formula::False,
                    Formula::And(ps) => ps.clone(),
                    other => vec![other.clone()],
                };
                let witness = parts.iter().position(|p| match p {
                    Formula::Eq(Term::Var(a), Term::Var(b)) => (a == v) != (b == v),
                    _ => false,
                });
                match witness {
                    Some(k) => {
                        let Formula::Eq(Term::Var(a), Term::Var(b)) = &parts[k] else { unreachable!() };
                        let other = if a == v { b } else { a };
                        let rest: Vec<Formula> =
                            parts.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p.clone()).collect();
                        let map = HashMap::from([(v.clone(), Term::Var(other.clone()))]);
                        Formula::and(rest).substitute(&map).simplify()
                    }
                    None => {
                        // exists v, u1..uk: (v = w & ...) with v among no ui:
                        // move v innermost so the equality can absorb it.
                        let mut us = Vec::new();
                        let mut core = &body;
                        while let Formula::Exists(u, b) = core {
                            us.push(u.clone());
                            core = b;
                        }
                        let has_eq =
                            |p: &Formula| matches!(p, Formula::Eq(Term::Var(a), Term::Var(b)) if (a == v) != (b == v));
                        let eligible = !us.is_empty()
                            && !us.contains(v)
                            && match core {
                                Formula::And(ps) => ps.iter().any(has_eq),
                                p => has_eq(p),
                            };
                        if eligible {
                            let inner = Formula::exists(v.clone(), core.clone()).simplify();
                            Formula::exists_many(us, inner)
                        } else {
                            Formula::exists(v.clone(), body)
                        }
                    }
                }
            }
            Formula::Forall(v, c) => match c.simplify() {
                Formula::True => Formula::True,
                body => Formula::Forall(v.clone(), Box::new(body)),
            },
            other => other.clone(),
        }
    }

    pub fn atom(relation: &str, vars: &[&str]) -> Formula {
        Formula::Atom(Atom::vars(relation, vars))
    }

    pub fn certain(query: Cq, mapping: Arc<SchemaMapping>) -> Formula {
        Formula::Certain(Arc::new(CertainQuery { query, mapping }))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
        let push = |v: &Var, bound: &Vec<Var>, out: &mut Vec<Var>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => a.variables().for_each(|v| push(v, bound, out)),
            Formula::Eq(a, b) | Formula::Lt(a, b) => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        push(v, bound, out);
                    }
                }
            }
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_free(bound, out)),
            Formula::Not(c) => c.collect_free(bound, out),
            Formula::Exists(v, c) | Formula::Forall(v, c) => {
                bound.push(v.clone());
                c.collect_free(bound, out);
                bound.pop();
            }
            Formula::Certain(cq) => cq.query.answer.iter().for_each(|v| push(v, bound, out)),
        }
    }

    /// Every variable name used anywhere, bound or free.
    pub fn all_vars(&self, out: &mut HashSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.extend(a.variables().cloned()),
            Formula::Eq(a, b) | Formula::Lt(a, b) => out.extend([a, b].into_iter().filter_map(Term::as_var).cloned()),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.all_vars(out)),
            Formula::Not(c) => c.all_vars(out),
            Formula::Exists(v, c) | Formula::Forall(v, c) => {
                out.insert(v.clone());
                c.all_vars(out);
            }
            Formula::Certain(cq) => out.extend(cq.query.answer.iter().cloned()),
        }
    }

    pub fn has_certain(&self) -> bool {
        match self {
            Formula::Certain(_) => true,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().any(Formula::has_certain),
            Formula::Not(c) | Formula::Exists(_, c) | Formula::Forall(_, c) => c.has_certain(),
            _ => false,
        }
    }

    pub fn uses_negation_or_order(&self) -> bool {
        match self {
            Formula::Not(_) | Formula::Lt(..) | Formula::Forall(..) => true,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().any(Formula::uses_negation_or_order),
            Formula::Exists(_, c) => c.uses_negation_or_order(),
            Formula::Certain(_) => true,
            _ => false,
        }
    }

    /// Relation atoms outside certain-answer nodes.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut out);
        out
    }

    fn visit_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.visit_atoms(out)),
            Formula::Not(c) | Formula::Exists(_, c) | Formula::Forall(_, c) => c.visit_atoms(out),
            _ => {}
        }
    }

    pub fn certain_nodes(&self) -> Vec<&Arc<CertainQuery>> {
        let mut out = Vec::new();
        self.visit_certain(&mut out);
        out
    }

    fn visit_certain<'a>(&'a self, out: &mut Vec<&'a Arc<CertainQuery>>) {
        match self {
            Formula::Certain(c) => out.push(c),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.visit_certain(out)),
            Formula::Not(c) | Formula::Exists(_, c) | Formula::Forall(_, c) => c.visit_certain(out),
            _ => {}
        }
    }

    /// Capture-avoiding substitution of free variables.
    pub fn substitute(&self, map: &HashMap<Var, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        let mut used = HashSet::new();
        self.all_vars(&mut used);
        for t in map.values() {
            if let Term::Var(v) = t {
                used.insert(v.clone());
            }
        }
        self.subst_inner(map, &mut used)
    }

    fn subst_inner(&self, map: &HashMap<Var, Term>, used: &mut HashSet<Var>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Formula::Atom(a.rename(map)),
            Formula::Eq(a, b) => Formula::Eq(subst_term(a, map), subst_term(b, map)),
            Formula::Lt(a, b) => Formula::Lt(subst_term(a, map), subst_term(b, map)),
            Formula::And(cs) => Formula::And(cs.iter().map(|c| c.subst_inner(map, used)).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(|c| c.subst_inner(map, used)).collect()),
            Formula::Not(c) => Formula::Not(Box::new(c.subst_inner(map, used))),
            Formula::Exists(v, c) | Formula::Forall(v, c) => {
                let mut inner = map.clone();
                inner.remove(v);
                let free = c.free_vars();
                let captures = free.iter().any(|fv| fv != v && matches!(inner.get(fv), Some(Term::Var(t)) if t == v));
                let (v2, body) = if captures {
                    let fresh = fresh_var(v.as_str(), used);
                    inner.insert(v.clone(), Term::Var(fresh.clone()));
                    (fresh, c.subst_inner(&inner, used))
                } else if inner.is_empty() {
                    (v.clone(), (**c).clone())
                } else {
                    (v.clone(), c.subst_inner(&inner, used))
                };
                match self {
                    Formula::Exists(..) => Formula::Exists(v2, Box::new(body)),
                    _ => Formula::Forall(v2, Box::new(body)),
                }
            }
            Formula::Certain(cq) => {
                // Answer positions whose image is a constant or a repeated
                // variable get a fresh name tied to the image by an equality.
                let mut names: Vec<Var> = Vec::new();
                let mut hidden: Vec<Var> = Vec::new();
                let mut eqs: Vec<Formula> = Vec::new();
                for v in &cq.query.answer {
                    let image = subst_term(&Term::Var(v.clone()), map);
                    match image {
                        Term::Var(w) if !names.contains(&w) => names.push(w),
                        other => {
                            let fresh = fresh_var(v.as_str(), used);
                            eqs.push(Formula::Eq(Term::Var(fresh.clone()), other));
                            hidden.push(fresh.clone());
                            names.push(fresh);
                        }
                    }
                }
                let node = rename_certain(cq, &names);
                if hidden.is_empty() {
                    node
                } else {
                    Formula::exists_many(hidden, Formula::and(std::iter::once(node).chain(eqs).collect()))
                }
            }
        }
    }

    pub fn rename_vars(&self, map: &HashMap<Var, Var>) -> Formula {
        let m: HashMap<Var, Term> = map.iter().map(|(k, v)| (k.clone(), Term::Var(v.clone()))).collect();
        self.substitute(&m)
    }
}

fn rename_certain(cq: &CertainQuery, new_answer: &[Var]) -> Formula {
    if new_answer == cq.query.answer.as_slice() {
        return Formula::Certain(Arc::new(cq.clone()));
    }
    // Rename inside the query, keeping its bound variables clear of the new names.
    let mut used: HashSet<Var> = new_answer.iter().cloned().collect();
    used.extend(cq.query.answer.iter().cloned());
    used.extend(cq.query.exists.iter().cloned());
    let mut map: HashMap<Var, Term> = HashMap::new();
    let mut exists = Vec::new();
    for e in &cq.query.exists {
        if new_answer.contains(e) {
            let fresh = fresh_var(e.as_str(), &mut used);
            map.insert(e.clone(), Term::Var(fresh.clone()));
            exists.push(fresh);
        } else {
            exists.push(e.clone());
        }
    }
    for (old, new) in cq.query.answer.iter().zip(new_answer) {
        map.insert(old.clone(), Term::Var(new.clone()));
    }
    let query = Cq {
        answer: new_answer.to_vec(),
        exists,
        atoms: cq.query.atoms.iter().map(|a| a.rename(&map)).collect(),
        equalities: cq.query.equalities.iter().map(|(a, b)| (subst_term(a, &map), subst_term(b, &map))).collect(),
    };
    Formula::Certain(Arc::new(CertainQuery { query, mapping: cq.mapping.clone() }))
}

/// A variable named after `base` that is not in `used`; it is added to `used`.
pub fn fresh_var(base: &str, used: &mut HashSet<Var>) -> Var {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_');
    let stem = if stem.is_empty() { "v" } else { stem };
    let mut i = 1usize;
    loop {
        let cand = Var::new(format!("{stem}_{i}"));
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
        i += 1;
    }
}

/// A source-to-target tgd `antecedent -> exists ys. consequent`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tgd {
    pub antecedent: Formula,
    pub exists: Vec<Var>,
    pub consequent: Vec<Atom>,
}

impl Tgd {
    /// Checks safety and shape; the consequent mentions only variables.
    pub fn new(antecedent: Formula, exists: Vec<Var>, consequent: Vec<Atom>) -> Result<Tgd> {
        if consequent.is_empty() {
            return Err(Error::Schema("tgd consequent must be nonempty".into()));
        }
        let free = antecedent.free_vars();
        for e in &exists {
            if free.contains(e) {
                return Err(Error::Schema(format!("existential variable {e} is also free in the antecedent")));
            }
        }
        for a in &consequent {
            for t in &a.args {
                match t {
                    Term::Const(c) => {
                        return Err(Error::Schema(format!(
                            "constant '{c}' in a consequent; only variables are allowed there"
                        )))
                    }
                    Term::Var(v) if !exists.contains(v) && !free.contains(v) => {
                        return Err(Error::UnsafeTgd(v.to_string()))
                    }
                    Term::Var(_) => {}
                }
            }
        }
        Ok(Tgd { antecedent, exists, consequent })
    }

    /// The universally quantified variables: free variables of the antecedent.
    pub fn universal_vars(&self) -> Vec<Var> {
        self.antecedent.free_vars()
    }

    pub fn is_full(&self) -> bool {
        self.exists.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemaMapping {
    pub source: Schema,
    pub target: Schema,
    pub tgds: Vec<Tgd>,
}

impl SchemaMapping {
    pub fn new(source: Schema, target: Schema, tgds: Vec<Tgd>) -> Result<SchemaMapping> {
        let m = SchemaMapping { source, target, tgds };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (r, _) in self.source.relations() {
            if self.target.contains(r) {
                return Err(Error::Schema(format!("relation {r} is declared in both source and target schemas")));
            }
        }
        for tgd in &self.tgds {
            validate_source_formula(&tgd.antecedent, &self.source)?;
            for a in &tgd.consequent {
                if self.source.contains(&a.relation) {
                    return Err(Error::Schema(format!("source relation {} used in a consequent", a.relation)));
                }
                self.target.check(&a.relation, a.args.len())?;
            }
        }
        Ok(())
    }

    pub fn has_certain(&self) -> bool {
        self.tgds.iter().any(|t| t.antecedent.has_certain())
    }

    pub fn is_certain_free(&self) -> bool {
        !self.has_certain()
    }

    pub fn with_tgds(&self, tgds: Vec<Tgd>) -> SchemaMapping {
        SchemaMapping { source: self.source.clone(), target: self.target.clone(), tgds }
    }
}

/// Checks relation use in a source formula, including nested certain-answer nodes.
pub fn validate_source_formula(f: &Formula, source: &Schema) -> Result<()> {
    for a in f.atoms() {
        if !source.contains(&a.relation) {
            return Err(Error::UnknownRelation(a.relation.to_string()));
        }
        source.check(&a.relation, a.args.len())?;
    }
    for c in f.certain_nodes() {
        if c.mapping.has_certain() {
            return Err(Error::Schema("certain-answer nodes must refer to a mapping without such nodes".into()));
        }
        for a in &c.query.atoms {
            c.mapping.target.check(&a.relation, a.args.len())?;
        }
    }
    Ok(())
}

pub(crate) fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}
