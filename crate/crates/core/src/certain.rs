//! Certain answers of conjunctive target queries.
//!
//! Operationally, the certain answers are the ground answers of the query on
//! the canonical universal solution. Syntactically, the query can be unfolded
//! through the mapping's term interpretation into a source formula: every
//! query atom is matched with a branch of its relation and the query terms are
//! unified with the branch terms. Skolem terms denote nulls, so they never
//! unify with constants or with applications of other function symbols, and
//! answer variables must end up bound to constants.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use crate::chase::{naive_chase, to_term_interpretation, Branch, ITerm, TermInterpretation};
use crate::error::{Error, Result};
use crate::lang::{fresh_var, ground_answers, Cq, Formula, SchemaMapping, Term, Tuple, Var};
use crate::model::{Constant, Instance};

/// Certain answers of `q` under `m` on the source instance `inst`.
pub fn certain_answers(m: &SchemaMapping, q: &Cq, inst: &Instance) -> Result<BTreeSet<Tuple>> {
    let j = naive_chase(m, inst)?;
    ground_answers(&q.to_formula(), &j, &q.answer)
}

/// One way of producing a query match: the conjunction of branch conditions
/// under the variable identifications forced by unification.
#[derive(Clone, Debug, PartialEq)]
pub struct Disjunct {
    pub exists: Vec<Var>,
    pub conditions: Vec<Formula>,
    pub equalities: Vec<(Term, Term)>,
}

impl Disjunct {
    pub fn to_formula(&self) -> Formula {
        let mut parts = self.conditions.clone();
        parts.extend(self.equalities.iter().map(|(a, b)| Formula::Eq(a.clone(), b.clone())));
        Formula::exists_many(self.exists.clone(), Formula::And(parts))
    }
}

/// A source rewriting of a conjunctive target query.
#[derive(Clone, Debug, PartialEq)]
pub struct UnfoldedRewriting {
    pub answer: Vec<Var>,
    pub disjuncts: Vec<Disjunct>,
}

impl UnfoldedRewriting {
    /// The rewriting as a formula whose free variables are the answer variables.
    pub fn to_formula(&self) -> Formula {
        match self.disjuncts.len() {
            0 => Formula::False,
            1 => self.disjuncts[0].to_formula(),
            _ => Formula::Or(self.disjuncts.iter().map(Disjunct::to_formula).collect()),
        }
    }
}

pub fn unfold(m: &SchemaMapping, q: &Cq) -> Result<UnfoldedRewriting> {
    let pi = to_term_interpretation(m)?;
    Ok(unfold_with(&pi, q))
}

/// Unfolds `q` through an already-built term interpretation.
pub fn unfold_with(pi: &TermInterpretation, q: &Cq) -> UnfoldedRewriting {
    let mut used: HashSet<Var> = q.answer.iter().chain(&q.exists).cloned().collect();
    for a in &q.atoms {
        used.extend(a.variables().cloned());
    }
    for (a, b) in &q.equalities {
        used.extend([a, b].into_iter().filter_map(Term::as_var).cloned());
    }
    let mut uni = Unifier::default();
    for v in &q.answer {
        uni.node(v, Role::Answer);
    }
    for (a, b) in &q.equalities {
        let (ta, tb) = (uni.query_term(a), uni.query_term(b));
        if !uni.unify(ta, tb) {
            return UnfoldedRewriting { answer: q.answer.clone(), disjuncts: Vec::new() };
        }
    }
    let mut search = Search { pi, q, used, chosen: Vec::new(), out: Vec::new() };
    search.go(0, uni);
    let mut disjuncts: Vec<Disjunct> = Vec::new();
    for d in search.out {
        if !disjuncts.contains(&d) {
            disjuncts.push(d);
        }
    }
    UnfoldedRewriting { answer: q.answer.clone(), disjuncts }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Answer,
    Exists,
    Branch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Shape {
    Free,
    Const(Constant),
    App(Arc<str>, Vec<usize>),
}

/// Union-find over variables, each class carrying an optional constant or
/// function-application shape.
#[derive(Clone, Default)]
struct Unifier {
    names: Vec<(Var, Role)>,
    index: HashMap<Var, usize>,
    parent: Vec<usize>,
    shape: Vec<Shape>,
}

enum UTerm {
    Node(usize),
    Const(Constant),
    App(Arc<str>, Vec<usize>),
}

impl Unifier {
    fn node(&mut self, v: &Var, role: Role) -> usize {
        if let Some(&i) = self.index.get(v) {
            return i;
        }
        let i = self.names.len();
        self.names.push((v.clone(), role));
        self.index.insert(v.clone(), i);
        self.parent.push(i);
        self.shape.push(Shape::Free);
        i
    }

    fn query_term(&mut self, t: &Term) -> UTerm {
        match t {
            Term::Var(v) => UTerm::Node(self.node(v, Role::Exists)),
            Term::Const(c) => UTerm::Const(c.clone()),
        }
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut j = i;
        while self.parent[j] != r {
            let next = self.parent[j];
            self.parent[j] = r;
            j = next;
        }
        r
    }

    fn unify(&mut self, a: UTerm, b: UTerm) -> bool {
        match (a, b) {
            (UTerm::Node(x), UTerm::Node(y)) => self.union(x, y),
            (UTerm::Node(x), UTerm::Const(c)) | (UTerm::Const(c), UTerm::Node(x)) => {
                let r = self.find(x);
                self.merge_shape(r, Shape::Const(c))
            }
            (UTerm::Node(x), UTerm::App(f, args)) | (UTerm::App(f, args), UTerm::Node(x)) => {
                let r = self.find(x);
                self.merge_shape(r, Shape::App(f, args))
            }
            (UTerm::Const(c), UTerm::Const(d)) => c == d,
            (UTerm::Const(_), UTerm::App(..)) | (UTerm::App(..), UTerm::Const(_)) => false,
            (UTerm::App(f, xs), UTerm::App(g, ys)) => self.unify_apps(&f, &xs, &g, &ys),
        }
    }

    fn unify_apps(&mut self, f: &Arc<str>, xs: &[usize], g: &Arc<str>, ys: &[usize]) -> bool {
        if f != g || xs.len() != ys.len() {
            return false;
        }
        xs.iter().zip(ys).all(|(&x, &y)| self.union(x, y))
    }

    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return true;
        }
        let (keep, gone) = (rx.min(ry), rx.max(ry));
        self.parent[gone] = keep;
        let shape = std::mem::replace(&mut self.shape[gone], Shape::Free);
        self.merge_shape(keep, shape)
    }

    fn merge_shape(&mut self, r: usize, s: Shape) -> bool {
        let current = self.shape[r].clone();
        match (current, s) {
            (_, Shape::Free) => true,
            (Shape::Free, s) => {
                self.shape[r] = s;
                true
            }
            (Shape::Const(c), Shape::Const(d)) => c == d,
            (Shape::App(f, xs), Shape::App(g, ys)) => self.unify_apps(&f, &xs, &g, &ys),
            _ => false,
        }
    }

    /// Proper terms may only stand for existential query variables.
    fn admissible(&mut self) -> bool {
        for i in 0..self.names.len() {
            let r = self.find(i);
            if matches!(self.shape[r], Shape::App(..)) && self.names[i].1 != Role::Exists {
                return false;
            }
        }
        true
    }
}

struct Search<'a> {
    pi: &'a TermInterpretation,
    q: &'a Cq,
    used: HashSet<Var>,
    chosen: Vec<(Vec<Var>, &'a Branch)>,
    out: Vec<Disjunct>,
}

impl<'a> Search<'a> {
    fn go(&mut self, k: usize, uni: Unifier) {
        if k == self.q.atoms.len() {
            let mut uni = uni;
            if uni.admissible() {
                let d = self.emit(&mut uni);
                self.out.push(d);
            }
            return;
        }
        let atom = &self.q.atoms[k];
        let pi = self.pi;
        for branch in pi.branches(&atom.relation) {
            let mut next = uni.clone();
            // Rename the branch apart from the query and earlier branches.
            let renamed: Vec<Var> = branch.vars.iter().map(|v| fresh_var(v.as_str(), &mut self.used)).collect();
            let nodes: Vec<usize> = renamed.iter().map(|v| next.node(v, Role::Branch)).collect();
            let pos = |v: &Var| branch.vars.iter().position(|x| x == v).expect("branch variable");
            let mut ok = true;
            for (t, bt) in atom.args.iter().zip(&branch.terms) {
                let lhs = next.query_term(t);
                let rhs = match bt {
                    ITerm::Var(v) => UTerm::Node(nodes[pos(v)]),
                    ITerm::App(f, args) => UTerm::App(f.clone(), args.iter().map(|v| nodes[pos(v)]).collect()),
                };
                if !next.unify(lhs, rhs) {
                    ok = false;
                    break;
                }
            }
            if ok && next.admissible() {
                self.chosen.push((renamed, branch));
                self.go(k + 1, next);
                self.chosen.pop();
            }
        }
    }

    fn emit(&self, uni: &mut Unifier) -> Disjunct {
        let n = uni.names.len();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = uni.find(i);
            members[r].push(i);
        }
        let mut rep: HashMap<Var, Var> = HashMap::new();
        let mut exists = Vec::new();
        let mut equalities = Vec::new();
        for (r, class) in members.iter().enumerate() {
            if class.is_empty() || matches!(uni.shape[r], Shape::App(..)) {
                continue;
            }
            let pick = |role: Role| class.iter().copied().find(|&i| uni.names[i].1 == role);
            let chosen = pick(Role::Answer)
                .or_else(|| pick(Role::Branch))
                .or_else(|| pick(Role::Exists))
                .expect("nonempty class");
            let rv = uni.names[chosen].0.clone();
            if uni.names[chosen].1 != Role::Answer {
                exists.push(rv.clone());
            }
            for &i in class {
                let (v, role) = &uni.names[i];
                if role == &Role::Answer && i != chosen {
                    equalities.push((Term::Var(v.clone()), Term::Var(rv.clone())));
                } else {
                    rep.insert(v.clone(), rv.clone());
                }
            }
            if let Shape::Const(c) = &uni.shape[r] {
                equalities.push((Term::Var(rv.clone()), Term::Const(c.clone())));
            }
        }
        let mut conditions = Vec::new();
        for (renamed, branch) in &self.chosen {
            let map: HashMap<Var, Term> = branch
                .vars
                .iter()
                .zip(renamed)
                .map(|(old, new)| (old.clone(), Term::Var(rep.get(new).unwrap_or(new).clone())))
                .collect();
            let c = branch.condition.substitute(&map);
            if !conditions.contains(&c) {
                conditions.push(c);
            }
        }
        exists.sort();
        Disjunct { exists, conditions, equalities }
    }
}

/// Replaces every certain-answer node by its unfolded source rewriting.
pub fn eliminate(f: &Formula) -> Result<Formula> {
    let mut cache: HashMap<*const SchemaMapping, Arc<TermInterpretation>> = HashMap::new();
    Ok(elim(f, &mut cache)?.simplify())
}

fn elim(f: &Formula, cache: &mut HashMap<*const SchemaMapping, Arc<TermInterpretation>>) -> Result<Formula> {
    Ok(match f {
        Formula::Certain(c) => {
            if c.mapping.has_certain() {
                return Err(Error::CertainPresent);
            }
            let key = Arc::as_ptr(&c.mapping);
            let pi = match cache.get(&key) {
                Some(pi) => pi.clone(),
                None => {
                    let pi = Arc::new(to_term_interpretation(&c.mapping)?);
                    cache.insert(key, pi.clone());
                    pi
                }
            };
            unfold_with(&pi, &c.query).to_formula()
        }
        Formula::And(cs) => Formula::And(cs.iter().map(|c| elim(c, cache)).collect::<Result<_>>()?),
        Formula::Or(cs) => Formula::Or(cs.iter().map(|c| elim(c, cache)).collect::<Result<_>>()?),
        Formula::Not(c) => Formula::Not(Box::new(elim(c, cache)?)),
        Formula::Exists(v, c) => Formula::Exists(v.clone(), Box::new(elim(c, cache)?)),
        Formula::Forall(v, c) => Formula::Forall(v.clone(), Box::new(elim(c, cache)?)),
        other => other.clone(),
    })
}

/// Eliminates certain-answer nodes from every antecedent.
pub fn eliminate_mapping(m: &SchemaMapping) -> Result<SchemaMapping> {
    let mut tgds = Vec::with_capacity(m.tgds.len());
    for t in &m.tgds {
        let mut t = t.clone();
        t.antecedent = eliminate(&t.antecedent)?;
        tgds.push(t);
    }
    Ok(m.with_tgds(tgds))
}
