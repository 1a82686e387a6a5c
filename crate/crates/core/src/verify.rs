//! Sampling-based checks: laconicity, CQ-equivalence, and preservation of
//! disjunctive dependencies when passing to the core.
//!
//! Sampling can refute these properties but never prove them; every report
//! says so in its header.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chase::naive_chase;
use crate::error::Result;
use crate::lang::{Atom, Cq, Formula, SchemaMapping, Term, Tgd, Var};
use crate::model::{compute_core, instances_isomorphic, is_core, write_facts, Fact, Instance, Schema, Value};

/// Size limits for random source instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_consts: usize,
    pub max_facts: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_consts: 6, max_facts: 12 }
    }
}

/// How many instances to draw and from which seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
    pub bounds: Bounds,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { samples: 200, seed: 0, bounds: Bounds::default() }
    }
}

impl Sampling {
    pub fn new(samples: usize, seed: u64) -> Self {
        Sampling { samples, seed, ..Sampling::default() }
    }

    /// Seed of the `i`-th sample; each sample is reproducible on its own.
    pub fn sample_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)
    }
}

fn constant_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("c{i}")
    }
}

/// A null-free instance with at most `max_consts` constants and `max_facts`
/// facts, determined by `seed`.
pub fn random_source_instance(schema: &Schema, seed: u64, max_consts: usize, max_facts: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inst = Instance::new(schema.clone());
    let rels: Vec<_> = schema.relations().map(|(r, a)| (r.clone(), a)).collect();
    if rels.is_empty() || max_consts == 0 || max_facts == 0 {
        return inst;
    }
    let n = rng.gen_range(1..=max_consts);
    let consts: Vec<Value> = (0..n).map(|i| Value::constant(&constant_name(i))).collect();
    let count = rng.gen_range(0..=max_facts);
    for _ in 0..count {
        let (rel, arity) = rels.choose(&mut rng).expect("nonempty schema");
        let args = (0..*arity).map(|_| consts.choose(&mut rng).expect("constants").clone()).collect();
        inst.insert_unchecked(Fact::new(rel.clone(), args));
    }
    inst
}

/// One line of the machine-readable stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub verdict: Verdict,
    pub diagnosis: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
}

/// A failing sample and the smaller instance it was shrunk to.
#[derive(Clone, Debug)]
pub struct Failure {
    pub seed: u64,
    pub instance: Instance,
    pub shrunk: Instance,
    pub diagnosis: String,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub check: String,
    pub records: Vec<SampleRecord>,
    pub failures: Vec<Failure>,
}

/// At most this many failures are shrunk and kept in full.
const KEPT_FAILURES: usize = 3;

impl CheckReport {
    fn new(check: impl Into<String>) -> Self {
        CheckReport { check: check.into(), records: Vec::new(), failures: Vec::new() }
    }

    pub fn samples(&self) -> usize {
        self.records.len()
    }

    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.verdict == Verdict::Fail).count()
    }

    pub fn skipped(&self) -> usize {
        self.records.iter().filter(|r| r.verdict == Verdict::Skip).count()
    }

    pub fn passed(&self) -> bool {
        self.failed() == 0
    }

    /// One JSON object per sample.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out += &serde_json::to_string(r).expect("records serialize");
            out.push('\n');
        }
        out
    }

    fn record(&mut self, seed: u64, verdict: Verdict, diagnosis: impl Into<String>) {
        self.records.push(SampleRecord { seed, verdict, diagnosis: diagnosis.into() });
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check: {}", self.check)?;
        writeln!(f, "note: random sampling can refute this property but cannot prove it")?;
        writeln!(f, "samples: {}", self.samples())?;
        if self.skipped() > 0 {
            writeln!(f, "skipped: {}", self.skipped())?;
        }
        writeln!(f, "failures: {}", self.failed())?;
        for fail in &self.failures {
            writeln!(f, "- seed {}: {}", fail.seed, fail.diagnosis)?;
            writeln!(f, "  shrunk counterexample ({} facts):", fail.shrunk.len())?;
            for line in write_facts(&fail.shrunk).lines() {
                writeln!(f, "    {line}")?;
            }
        }
        writeln!(f, "verdict: {}", if self.passed() { "pass" } else { "fail" })
    }
}

/// Greedily removes facts, then renames constants order-preservingly to
/// `a, b, ...`, keeping each step only if `fails` still holds.
pub fn shrink(inst: &Instance, mut fails: impl FnMut(&Instance) -> bool) -> Instance {
    let mut current = inst.clone();
    'outer: loop {
        let facts: Vec<Fact> = current.facts().cloned().collect();
        for f in &facts {
            let mut smaller = current.clone();
            smaller.remove(f);
            if fails(&smaller) {
                current = smaller;
                continue 'outer;
            }
        }
        break;
    }
    let renaming: BTreeMap<Value, Value> =
        current.domain().into_iter().enumerate().map(|(i, v)| (v, Value::constant(&constant_name(i)))).collect();
    let renamed = current.map_values(|v| renaming[v].clone());
    if fails(&renamed) {
        renamed
    } else {
        current
    }
}

/// Runs `diagnose` on every sample; `Ok(None)` is a pass, `Ok(Some(d))` a
/// failure with diagnosis `d`.
fn run_samples(
    check: &str,
    schema: &Schema,
    sampling: &Sampling,
    mut diagnose: impl FnMut(&Instance) -> Result<Option<String>>,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(check);
    for i in 0..sampling.samples {
        let seed = sampling.sample_seed(i);
        let inst = random_source_instance(schema, seed, sampling.bounds.max_consts, sampling.bounds.max_facts);
        match diagnose(&inst)? {
            None => report.record(seed, Verdict::Pass, ""),
            Some(d) => {
                report.record(seed, Verdict::Fail, d.clone());
                if report.failures.len() < KEPT_FAILURES {
                    let shrunk = shrink(&inst, |j| matches!(diagnose(j), Ok(Some(_))));
                    report.failures.push(Failure { seed, instance: inst, shrunk, diagnosis: d });
                }
            }
        }
    }
    Ok(report)
}

/// Whether the canonical universal solution is a core on every sample.
pub fn check_laconic(m: &SchemaMapping, sampling: &Sampling) -> Result<CheckReport> {
    run_samples("laconic", &m.source, sampling, |inst| {
        let j = naive_chase(m, inst)?;
        if is_core(&j) {
            return Ok(None);
        }
        let (core, _) = compute_core(&j);
        Ok(Some(format!("canonical solution has {} facts but its core has {}", j.len(), core.len())))
    })
}

/// Whether both mappings give isomorphic core universal solutions on every sample.
pub fn check_cq_equivalent(m: &SchemaMapping, other: &SchemaMapping, sampling: &Sampling) -> Result<CheckReport> {
    if m.source != other.source || m.target != other.target {
        return Err(crate::Error::Schema("the two mappings have different schemas".into()));
    }
    run_samples("cq-equivalent", &m.source, sampling, |inst| {
        let a = compute_core(&naive_chase(m, inst)?).0;
        let b = compute_core(&naive_chase(other, inst)?).0;
        if instances_isomorphic(&a, &b) {
            Ok(None)
        } else {
            Ok(Some(format!("cores differ: {} facts versus {} facts", a.len(), b.len())))
        }
    })
}

/// An atom or an equality inside a disjunctive dependency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Literal {
    Atom(Atom),
    Eq(Term, Term),
}

impl Literal {
    fn vars(&self) -> Vec<&Var> {
        match self {
            Literal::Atom(a) => a.variables().collect(),
            Literal::Eq(s, t) => [s, t].into_iter().filter_map(Term::as_var).collect(),
        }
    }

    fn to_formula(&self) -> Formula {
        match self {
            Literal::Atom(a) => Formula::Atom(a.clone()),
            Literal::Eq(s, t) => Formula::Eq(s.clone(), t.clone()),
        }
    }
}

/// `exists ys: conjunction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alternative {
    pub exists: Vec<Var>,
    pub body: Vec<Literal>,
}

/// `forall xs (antecedent -> alternative_1 | ... | alternative_n)`; with no
/// alternatives the dependency forbids the antecedent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjunctiveDependency {
    pub antecedent: Vec<Literal>,
    pub disjuncts: Vec<Alternative>,
}

impl DisjunctiveDependency {
    /// Universally quantified variables, in order of first occurrence.
    pub fn universal_vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for l in &self.antecedent {
            for v in l.vars() {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    /// The dependency as a closed formula.
    pub fn to_formula(&self) -> Formula {
        let ant = Formula::and(self.antecedent.iter().map(Literal::to_formula).collect());
        let cons = Formula::or(
            self.disjuncts
                .iter()
                .map(|d| {
                    Formula::exists_many(
                        d.exists.clone(),
                        Formula::and(d.body.iter().map(Literal::to_formula).collect()),
                    )
                })
                .collect(),
        );
        Formula::not(Formula::exists_many(self.universal_vars(), Formula::and(vec![ant, Formula::not(cons)])))
    }
}

impl fmt::Display for DisjunctiveDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits = |ls: &[Literal]| -> String {
            ls.iter().map(|l| l.to_formula().to_string()).collect::<Vec<_>>().join(" & ")
        };
        write!(f, "{} -> ", lits(&self.antecedent))?;
        if self.disjuncts.is_empty() {
            return f.write_str("false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            let body = if d.body.len() > 1 { format!("({})", lits(&d.body)) } else { lits(&d.body) };
            if d.exists.is_empty() {
                f.write_str(&body)?;
            } else {
                let vs: Vec<&str> = d.exists.iter().map(Var::as_str).collect();
                write!(f, "(exists {}: {body})", vs.join(", "))?;
            }
        }
        Ok(())
    }
}

type Env = BTreeMap<Var, Value>;

fn term_value(t: &Term, env: &Env) -> Option<Value> {
    match t {
        Term::Var(v) => env.get(v).cloned(),
        Term::Const(c) => Some(Value::Const(c.clone())),
    }
}

/// Backtracking matcher for a conjunction of literals over `j`, with
/// quantifiers ranging over `dom`. Calls `found` on each solution extending
/// `env`; stops as soon as `found` returns true.
/// When `prune` holds for a partial assignment, its extensions are skipped.
struct Matcher<'a> {
    j: &'a Instance,
    dom: &'a [Value],
    prune: Option<&'a dyn Fn(&Env) -> bool>,
}

impl Matcher<'_> {
    fn solve(&self, lits: &[Literal], env: &mut Env, found: &mut dyn FnMut(&Env) -> bool) -> bool {
        if self.prune.is_some_and(|p| p(env)) {
            return false;
        }
        // Pick an equality that can be decided or propagated, otherwise an atom.
        let pick = lits
            .iter()
            .position(
                |l| matches!(l, Literal::Eq(s, t) if term_value(s, env).is_some() || term_value(t, env).is_some()),
            )
            .or_else(|| lits.iter().position(|l| matches!(l, Literal::Atom(_))));
        let Some(k) = pick else {
            return match lits.first() {
                None => found(env),
                // Only equalities between two unbound variables remain.
                Some(Literal::Eq(Term::Var(v), _)) => {
                    for d in self.dom {
                        env.insert(v.clone(), d.clone());
                        let stop = self.solve(lits, env, found);
                        env.remove(v);
                        if stop {
                            return true;
                        }
                    }
                    false
                }
                Some(_) => unreachable!("constants are always bound"),
            };
        };
        let rest: Vec<Literal> = lits.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, l)| l.clone()).collect();
        match &lits[k] {
            Literal::Eq(s, t) => match (term_value(s, env), term_value(t, env)) {
                (Some(a), Some(b)) => a == b && self.solve(&rest, env, found),
                (Some(a), None) | (None, Some(a)) => {
                    let v = if term_value(s, env).is_none() { s } else { t };
                    let v = v.as_var().expect("unbound term is a variable").clone();
                    if !self.dom.contains(&a) {
                        return false;
                    }
                    env.insert(v.clone(), a);
                    let stop = self.solve(&rest, env, found);
                    env.remove(&v);
                    stop
                }
                (None, None) => unreachable!(),
            },
            Literal::Atom(atom) => {
                for fact in self.j.facts_of(&atom.relation) {
                    let mut bound = Vec::new();
                    let mut ok = true;
                    for (t, val) in atom.args.iter().zip(&fact.args) {
                        match term_value(t, env) {
                            Some(x) if x == *val => {}
                            Some(_) => {
                                ok = false;
                                break;
                            }
                            None => {
                                let v = t.as_var().expect("unbound term is a variable").clone();
                                env.insert(v.clone(), val.clone());
                                bound.push(v);
                            }
                        }
                    }
                    let stop = ok && self.solve(&rest, env, found);
                    for v in bound {
                        env.remove(&v);
                    }
                    if stop {
                        return true;
                    }
                }
                false
            }
        }
    }

    /// Binds the remaining `vars` to every domain value.
    fn ground(&self, vars: &[Var], env: &mut Env, found: &mut dyn FnMut(&Env) -> bool) -> bool {
        let Some((v, rest)) = vars.split_first() else {
            return found(env);
        };
        if env.contains_key(v) {
            return self.ground(rest, env, found);
        }
        for d in self.dom {
            env.insert(v.clone(), d.clone());
            let stop = self.ground(rest, env, found);
            env.remove(v);
            if stop {
                return true;
            }
        }
        false
    }
}

/// Whether `dep` holds on `j`, with quantifiers ranging over `dom(j)`.
pub fn eval_disjunctive(dep: &DisjunctiveDependency, j: &Instance) -> bool {
    let dom: Vec<Value> = j.domain().into_iter().collect();
    let m = Matcher { j, dom: &dom, prune: None };
    let universal = dep.universal_vars();
    // Disjuncts made of equalities over universal variables only are decided
    // as soon as their variables are bound, which prunes the search.
    let decidable: Vec<&Alternative> = dep
        .disjuncts
        .iter()
        .filter(|d| d.exists.is_empty() && d.body.iter().all(|l| matches!(l, Literal::Eq(..))))
        .collect();
    let satisfied = |env: &Env| -> bool {
        dep.disjuncts.iter().any(|d| {
            let mut e = env.clone();
            let unbound: Vec<Var> = d.exists.clone();
            for v in &unbound {
                e.remove(v);
            }
            let mut hit = false;
            m.solve(&d.body, &mut e, &mut |e2: &Env| {
                let mut e3 = e2.clone();
                m.ground(&unbound, &mut e3, &mut |_| {
                    hit = true;
                    true
                })
            });
            hit
        })
    };
    let decided = |env: &Env| -> bool {
        decidable.iter().any(|d| {
            d.body.iter().all(|l| match l {
                Literal::Eq(s, t) => matches!((term_value(s, env), term_value(t, env)), (Some(a), Some(b)) if a == b),
                Literal::Atom(_) => false,
            })
        })
    };
    let outer = Matcher { j, dom: &dom, prune: Some(&decided) };
    let mut violated = false;
    let mut lits = dep.antecedent.clone();
    lits.sort_by_key(|l| matches!(l, Literal::Eq(..)));
    let mut env = Env::new();
    outer.solve(&lits, &mut env, &mut |e: &Env| {
        let mut e = e.clone();
        m.ground(&universal, &mut e, &mut |full: &Env| {
            if !satisfied(full) {
                violated = true;
            }
            violated
        })
    });
    !violated
}

/// The dependency that separates a non-core instance from its core: the
/// conjunction of all its facts over one variable per value implies that
/// two of the variables are equal.
pub fn separating_dependency(j: &Instance) -> DisjunctiveDependency {
    let vars: BTreeMap<Value, Var> =
        j.domain().into_iter().enumerate().map(|(i, v)| (v, Var::new(format!("v{}", i + 1)))).collect();
    let antecedent = j
        .facts()
        .map(|f| {
            Literal::Atom(Atom::new(f.relation.clone(), f.args.iter().map(|a| Term::Var(vars[a].clone())).collect()))
        })
        .collect();
    let vs: Vec<&Var> = vars.values().collect();
    let mut disjuncts = Vec::new();
    for i in 0..vs.len() {
        for k in i + 1..vs.len() {
            disjuncts.push(Alternative {
                exists: Vec::new(),
                body: vec![Literal::Eq(Term::Var(vs[i].clone()), Term::Var(vs[k].clone()))],
            });
        }
    }
    DisjunctiveDependency { antecedent, disjuncts }
}

/// A random dependency over `schema` with at most three atoms per conjunction
/// and at most two disjuncts.
pub fn random_dependency(schema: &Schema, rng: &mut impl Rng) -> DisjunctiveDependency {
    let rels: Vec<_> = schema.relations().map(|(r, a)| (r.clone(), a)).collect();
    let pool: Vec<Var> = (1..=3).map(|i| Var::new(format!("x{i}"))).collect();
    let n_atoms = rng.gen_range(1..=3);
    let mut antecedent: Vec<Literal> = (0..n_atoms)
        .map(|_| {
            let (r, a) = rels.choose(rng).expect("nonempty schema");
            Literal::Atom(Atom::new(r.clone(), (0..*a).map(|_| Term::Var(pool.choose(rng).unwrap().clone())).collect()))
        })
        .collect();
    let mut used: Vec<Var> = Vec::new();
    for l in &antecedent {
        for v in l.vars() {
            if !used.contains(v) {
                used.push(v.clone());
            }
        }
    }
    if used.len() >= 2 && rng.gen_bool(0.2) {
        let pair: Vec<&Var> = used.choose_multiple(rng, 2).collect();
        antecedent.push(Literal::Eq(Term::Var(pair[0].clone()), Term::Var(pair[1].clone())));
    }
    let fresh: Vec<Var> = (1..=2).map(|i| Var::new(format!("e{i}"))).collect();
    let n_disj = rng.gen_range(0..=2);
    let disjuncts = (0..n_disj)
        .map(|_| {
            if used.len() >= 2 && rng.gen_bool(0.5) {
                let pair: Vec<&Var> = used.choose_multiple(rng, 2).collect();
                return Alternative {
                    exists: Vec::new(),
                    body: vec![Literal::Eq(Term::Var(pair[0].clone()), Term::Var(pair[1].clone()))],
                };
            }
            let candidates: Vec<&Var> = used.iter().chain(&fresh).collect();
            let body: Vec<Literal> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let (r, a) = rels.choose(rng).expect("nonempty schema");
                    Literal::Atom(Atom::new(
                        r.clone(),
                        (0..*a).map(|_| Term::Var((*candidates.choose(rng).unwrap()).clone())).collect(),
                    ))
                })
                .collect();
            let mut exists: Vec<Var> = Vec::new();
            for l in &body {
                for v in l.vars() {
                    if fresh.contains(v) && !exists.contains(v) {
                        exists.push(v.clone());
                    }
                }
            }
            Alternative { exists, body }
        })
        .collect();
    DisjunctiveDependency { antecedent, disjuncts }
}

/// Random dependencies tried per non-core sample.
pub const DEPENDENCIES_PER_SAMPLE: usize = 20;

/// On samples whose canonical solution `J'` is not a core, with core `J`:
/// every sampled dependency valid on `J'` must be valid on `J`, and the
/// separating dependency of `J'` must hold on `J` but not on `J'`. Samples
/// with a core canonical solution are recorded as skipped. Draws instances
/// until `sampling.samples` non-core ones are seen or ten times as many
/// instances were tried.
pub fn check_disjunctive_preservation(m: &SchemaMapping, sampling: &Sampling) -> Result<CheckReport> {
    let mut report = CheckReport::new("disjunctive-preservation");
    let mut non_core = 0;
    let mut i = 0;
    while non_core < sampling.samples && i < sampling.samples * 10 {
        let seed = sampling.sample_seed(i);
        i += 1;
        let inst = random_source_instance(&m.source, seed, sampling.bounds.max_consts, sampling.bounds.max_facts);
        let canonical = naive_chase(m, &inst)?;
        let (core, _) = compute_core(&canonical);
        if core.len() == canonical.len() {
            report.record(seed, Verdict::Skip, "canonical solution is a core");
            continue;
        }
        non_core += 1;
        let mut problems = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD15C);
        let mut valid_on_canonical = 0;
        for _ in 0..DEPENDENCIES_PER_SAMPLE {
            let dep = random_dependency(&m.target, &mut rng);
            if eval_disjunctive(&dep, &canonical) {
                valid_on_canonical += 1;
                if !eval_disjunctive(&dep, &core) {
                    problems.push(format!("valid on the canonical solution but not on its core: {dep}"));
                }
            }
        }
        let sep = separating_dependency(&canonical);
        if eval_disjunctive(&sep, &canonical) {
            problems.push("separating dependency holds on the canonical solution".to_string());
        }
        if !eval_disjunctive(&sep, &core) {
            problems.push("separating dependency fails on the core".to_string());
        }
        if problems.is_empty() {
            report.record(
                seed,
                Verdict::Pass,
                format!("{valid_on_canonical} sampled dependencies valid on the canonical solution"),
            );
        } else {
            let d = problems.join("; ");
            report.record(seed, Verdict::Fail, d.clone());
            if report.failures.len() < KEPT_FAILURES {
                report.failures.push(Failure { seed, instance: inst.clone(), shrunk: inst, diagnosis: d });
            }
        }
    }
    Ok(report)
}

/// Number of non-core samples a disjunctive report actually examined.
pub fn examined(report: &CheckReport) -> usize {
    report.records.iter().filter(|r| r.verdict != Verdict::Skip).count()
}

pub fn constant_count(inst: &Instance) -> usize {
    inst.domain().iter().filter(|v| v.is_const()).count()
}

/// Shape limits for [`random_mapping`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MappingShape {
    /// Antecedents are single source atoms.
    pub lav: bool,
    /// Allow negation, disjunction and order in antecedents.
    pub first_order: bool,
    pub max_tgds: usize,
    pub max_consequent_atoms: usize,
    pub max_existentials: usize,
}

impl Default for MappingShape {
    fn default() -> Self {
        MappingShape { lav: false, first_order: true, max_tgds: 3, max_consequent_atoms: 3, max_existentials: 2 }
    }
}

fn random_atom(rels: &[(crate::model::Relation, usize)], vars: &[Var], rng: &mut impl Rng) -> Atom {
    let (r, a) = rels.choose(rng).expect("nonempty schema");
    Atom::new(r.clone(), (0..*a).map(|_| Term::Var(vars.choose(rng).expect("variables").clone())).collect())
}

fn atom_vars(atoms: &[Atom]) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in atoms.iter().flat_map(Atom::variables) {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// A random mapping over source relations `A..` and target relations `S..`,
/// determined by `seed`.
pub fn random_mapping(seed: u64, shape: &MappingShape) -> SchemaMapping {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut source = Schema::new();
    for name in ["A", "B", "C"].iter().take(rng.gen_range(1..=3)) {
        source = source.with(name, rng.gen_range(1..=2));
    }
    let mut target = Schema::new();
    for name in ["S", "T", "U"].iter().take(rng.gen_range(1..=3)) {
        target = target.with(name, rng.gen_range(1..=3));
    }
    let src: Vec<_> = source.relations().map(|(r, a)| (r.clone(), a)).collect();
    let tgt: Vec<_> = target.relations().map(|(r, a)| (r.clone(), a)).collect();
    let pool: Vec<Var> = (1..=3).map(|i| Var::new(format!("x{i}"))).collect();
    let mut tgds = Vec::new();
    for _ in 0..rng.gen_range(1..=shape.max_tgds) {
        let n_atoms = if shape.lav { 1 } else { rng.gen_range(1..=2) };
        let atoms: Vec<Atom> = (0..n_atoms).map(|_| random_atom(&src, &pool, &mut rng)).collect();
        let bound = atom_vars(&atoms);
        let mut parts: Vec<Formula> = atoms.into_iter().map(Formula::Atom).collect();
        if shape.first_order && !shape.lav {
            if rng.gen_bool(0.3) {
                parts.push(Formula::not(Formula::Atom(random_atom(&src, &bound, &mut rng))));
            }
            if bound.len() >= 2 && rng.gen_bool(0.25) {
                let pair: Vec<&Var> = bound.choose_multiple(&mut rng, 2).collect();
                parts.push(Formula::Lt(Term::Var(pair[0].clone()), Term::Var(pair[1].clone())));
            }
            if rng.gen_bool(0.2) {
                let alt = Formula::Atom(random_atom(&src, &bound, &mut rng));
                let first = parts.remove(0);
                parts.insert(0, Formula::or(vec![first, alt]));
            }
            if rng.gen_bool(0.2) {
                let w = Var::new("w");
                let mut with_w = bound.clone();
                with_w.push(w.clone());
                parts.push(Formula::not(Formula::exists(w, Formula::Atom(random_atom(&src, &with_w, &mut rng)))));
            }
        }
        let antecedent = Formula::and(parts);
        let free = antecedent.free_vars();
        let ys: Vec<Var> = (1..=rng.gen_range(0..=shape.max_existentials)).map(|i| Var::new(format!("y{i}"))).collect();
        let mut choices = free.clone();
        choices.extend(ys.iter().cloned());
        if choices.is_empty() {
            choices.push(Var::new("y1"));
        }
        let consequent: Vec<Atom> =
            (0..rng.gen_range(1..=shape.max_consequent_atoms)).map(|_| random_atom(&tgt, &choices, &mut rng)).collect();
        let used = atom_vars(&consequent);
        let exists: Vec<Var> = used.iter().filter(|v| !free.contains(v)).cloned().collect();
        tgds.push(Tgd::new(antecedent, exists, consequent).expect("generated tgd is safe"));
    }
    SchemaMapping::new(source, target, tgds).expect("generated mapping is valid")
}

/// A random conjunctive query over `schema` with at most three atoms and
/// two answer variables.
pub fn random_cq(schema: &Schema, rng: &mut impl Rng) -> Cq {
    let rels: Vec<_> = schema.relations().map(|(r, a)| (r.clone(), a)).collect();
    let pool: Vec<Var> = (1..=4).map(|i| Var::new(format!("v{i}"))).collect();
    let atoms: Vec<Atom> = (0..rng.gen_range(1..=3)).map(|_| random_atom(&rels, &pool, rng)).collect();
    let vars = atom_vars(&atoms);
    let k = rng.gen_range(0..=vars.len().min(2));
    let answer: Vec<Var> = vars.choose_multiple(rng, k).cloned().collect();
    Cq::new(answer, atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::factfile::parse_facts_inferred;

    fn dep(ant: &[(&str, &[&str])], eqs: &[(&str, &str)]) -> DisjunctiveDependency {
        DisjunctiveDependency {
            antecedent: ant.iter().map(|(r, vs)| Literal::Atom(Atom::vars(r, vs))).collect(),
            disjuncts: eqs
                .iter()
                .map(|(a, b)| Alternative { exists: vec![], body: vec![Literal::Eq(Term::var(a), Term::var(b))] })
                .collect(),
        }
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let schema = Schema::new().with("R", 2);
        let a = random_source_instance(&schema, 11, 4, 12);
        assert_eq!(a, random_source_instance(&schema, 11, 4, 12));
        assert!(random_source_instance(&schema, 11, 4, 0).is_empty());
        for seed in 0..50 {
            let i = random_source_instance(&schema, seed, 4, 30);
            assert!(i.len() <= 16);
            assert!(constant_count(&i) <= 4);
        }
    }

    #[test]
    fn key_dependency() {
        let key = dep(&[("S", &["x", "y"]), ("S", &["x", "z"])], &[("y", "z")]);
        assert!(eval_disjunctive(&key, &parse_facts_inferred("S(a, ?N1).").unwrap()));
        assert!(!eval_disjunctive(&key, &parse_facts_inferred("S(a, ?N1). S(a, ?N2).").unwrap()));
    }

    #[test]
    fn separating_dependency_splits_instance_from_core() {
        let j = parse_facts_inferred("R(a, ?N1). R(a, ?N2).").unwrap();
        let (core, _) = compute_core(&j);
        let sep = separating_dependency(&j);
        assert!(!eval_disjunctive(&sep, &j));
        assert!(eval_disjunctive(&sep, &core));
    }

    #[test]
    fn existential_disjunct() {
        // S(x, y) -> exists e: T(y, e)
        let d = DisjunctiveDependency {
            antecedent: vec![Literal::Atom(Atom::vars("S", &["x", "y"]))],
            disjuncts: vec![Alternative {
                exists: vec![Var::new("e")],
                body: vec![Literal::Atom(Atom::vars("T", &["y", "e"]))],
            }],
        };
        assert!(eval_disjunctive(&d, &parse_facts_inferred("S(a, b). T(b, ?N1).").unwrap()));
        assert!(!eval_disjunctive(&d, &parse_facts_inferred("S(a, b). T(a, ?N1).").unwrap()));
        assert_eq!(d.to_string(), "S(x, y) -> (exists e: T(y, e))");
    }

    #[test]
    fn non_laconic_pair_shrinks_to_one_fact() {
        let (left, right) = fixtures::pair("a").unwrap();
        let sampling = Sampling::new(40, 3);
        let bad = check_laconic(&left, &sampling).unwrap();
        assert!(!bad.passed());
        let shrunk = &bad.failures[0].shrunk;
        assert_eq!(write_facts(shrunk).trim(), "P(a).");
        assert!(check_laconic(&right, &sampling).unwrap().passed());
        assert!(check_cq_equivalent(&left, &right, &sampling).unwrap().passed());
    }

    #[test]
    fn generated_mappings_are_deterministic() {
        let shape = MappingShape::default();
        for seed in 0..50 {
            let m = random_mapping(seed, &shape);
            assert_eq!(m, random_mapping(seed, &shape));
            assert!(m.tgds.len() <= shape.max_tgds);
            let lav = random_mapping(seed, &MappingShape { lav: true, ..shape });
            assert!(lav.tgds.iter().all(|t| matches!(t.antecedent, Formula::Atom(_))));
        }
    }

    #[test]
    fn different_cores_are_detected() {
        let (b_left, b_right) = fixtures::pair("b").unwrap();
        let only_null = b_left.with_tgds(vec![b_left.tgds[0].clone()]);
        let r = check_cq_equivalent(&only_null, &b_right, &Sampling::new(30, 1)).unwrap();
        assert!(!r.passed());
        assert_eq!(r.to_jsonl().lines().count(), 30);
    }
}
