//! Active-domain evaluation of formulas over finite instances.
//!
//! Quantifiers and free variables range over the values occurring in the
//! instance. Nulls are ordinary domain values for `=`; `<` holds only between
//! two constants. Certain-answer nodes are evaluated by chasing the instance
//! with their base mapping and taking ground answers, with results cached per
//! evaluator.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::ast::{CertainQuery, Formula, SchemaMapping, Term, Var};
use crate::model::{Instance, Value};

pub type Tuple = Vec<Value>;

/// Answers of `f` over `inst`: all assignments to `free` satisfying `f`.
pub fn eval_formula(f: &Formula, inst: &Instance, free: &[Var]) -> Result<BTreeSet<Tuple>> {
    Evaluator::new(inst).eval(f, free)
}

/// Answers of `f` restricted to tuples of constants.
pub fn ground_answers(f: &Formula, inst: &Instance, free: &[Var]) -> Result<BTreeSet<Tuple>> {
    let mut all = eval_formula(f, inst, free)?;
    all.retain(|t| t.iter().all(Value::is_const));
    Ok(all)
}

/// Variable bindings; `None` marks a variable shadowed by a quantifier.
type Env = Vec<(Var, Option<Value>)>;

fn lookup<'e>(env: &'e Env, v: &Var) -> Option<&'e Value> {
    env.iter().rev().find(|(w, _)| w == v).and_then(|(_, val)| val.as_ref())
}

fn term_val<'e>(env: &'e Env, t: &'e Term) -> Option<Value> {
    match t {
        Term::Const(c) => Some(Value::Const(c.clone())),
        Term::Var(v) => lookup(env, v).cloned(),
    }
}

/// Continuation: returns `true` to stop the enumeration.
type Cont<'k, 'i> = dyn FnMut(&mut Evaluator<'i>, &mut Env) -> bool + 'k;

pub struct Evaluator<'i> {
    inst: &'i Instance,
    adom: Vec<Value>,
    adom_set: BTreeSet<Value>,
    chases: HashMap<*const SchemaMapping, Arc<Instance>>,
    certain: HashMap<*const CertainQuery, Arc<BTreeSet<Tuple>>>,
    error: Option<Error>,
}

impl<'i> Evaluator<'i> {
    pub fn new(inst: &'i Instance) -> Self {
        let adom_set = inst.domain();
        Evaluator {
            inst,
            adom: adom_set.iter().cloned().collect(),
            adom_set,
            chases: HashMap::new(),
            certain: HashMap::new(),
            error: None,
        }
    }

    pub fn instance(&self) -> &'i Instance {
        self.inst
    }

    /// All assignments to `free` that satisfy `f`.
    pub fn eval(&mut self, f: &Formula, free: &[Var]) -> Result<BTreeSet<Tuple>> {
        for v in f.free_vars() {
            if !free.contains(&v) {
                return Err(Error::UnboundVariable(v.to_string()));
            }
        }
        let mut out = BTreeSet::new();
        let mut env: Env = Vec::new();
        let free_owned = free.to_vec();
        self.solve(f, &mut env, &mut |ev, env| {
            ev.bind_rest(&free_owned, 0, env, &mut |_, env| {
                out.insert(free_owned.iter().map(|v| lookup(env, v).unwrap().clone()).collect());
                false
            })
        });
        match self.error.take() {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Whether `f` holds under the given assignment of its free variables.
    pub fn holds(&mut self, f: &Formula, assignment: &[(Var, Value)]) -> Result<bool> {
        let mut env: Env = assignment.iter().map(|(v, a)| (v.clone(), Some(a.clone()))).collect();
        for v in f.free_vars() {
            if lookup(&env, &v).is_none() {
                return Err(Error::UnboundVariable(v.to_string()));
            }
        }
        let r = self.check(f, &mut env);
        match self.error.take() {
            Some(e) => Err(e),
            None => Ok(r),
        }
    }

    fn check(&mut self, f: &Formula, env: &mut Env) -> bool {
        self.solve(f, env, &mut |_, _| true)
    }

    /// Enumerates every value for the still-unbound variables among `vars[i..]`.
    fn bind_rest(&mut self, vars: &[Var], i: usize, env: &mut Env, k: &mut Cont<'_, 'i>) -> bool {
        if i == vars.len() {
            return k(self, env);
        }
        if lookup(env, &vars[i]).is_some() {
            return self.bind_rest(vars, i + 1, env, k);
        }
        let adom = self.adom.clone();
        for a in adom {
            env.push((vars[i].clone(), Some(a)));
            let stop = self.bind_rest(vars, i + 1, env, k);
            env.pop();
            if stop {
                return true;
            }
        }
        false
    }

    fn unbound(&self, f: &Formula, env: &Env) -> Vec<Var> {
        f.free_vars().into_iter().filter(|v| lookup(env, v).is_none()).collect()
    }

    /// Calls `k` once for each extension of `env` to the free variables of `f`
    /// that satisfies `f`. Duplicates are possible only where noted.
    fn solve(&mut self, f: &Formula, env: &mut Env, k: &mut Cont<'_, 'i>) -> bool {
        if self.error.is_some() {
            return true;
        }
        match f {
            Formula::True => k(self, env),
            Formula::False => false,
            Formula::Atom(a) => {
                let inst = self.inst;
                let facts: Vec<_> = inst.facts_of(&a.relation).collect();
                for fact in facts {
                    if fact.args.len() != a.args.len() {
                        continue;
                    }
                    let mark = env.len();
                    let mut ok = true;
                    for (t, v) in a.args.iter().zip(&fact.args) {
                        match t {
                            Term::Const(c) => {
                                if v.as_const() != Some(c) {
                                    ok = false;
                                    break;
                                }
                            }
                            Term::Var(x) => match lookup(env, x) {
                                Some(b) if b != v => {
                                    ok = false;
                                    break;
                                }
                                Some(_) => {}
                                None => env.push((x.clone(), Some(v.clone()))),
                            },
                        }
                    }
                    let stop = ok && k(self, env);
                    env.truncate(mark);
                    if stop {
                        return true;
                    }
                }
                false
            }
            Formula::Eq(a, b) => match (term_val(env, a), term_val(env, b)) {
                (Some(x), Some(y)) => x == y && k(self, env),
                (Some(x), None) | (None, Some(x)) => {
                    if !self.adom_set.contains(&x) {
                        return false;
                    }
                    let v = match (a, b) {
                        (Term::Var(v), _) if lookup(env, v).is_none() => v.clone(),
                        (_, Term::Var(v)) => v.clone(),
                        _ => unreachable!(),
                    };
                    env.push((v, Some(x)));
                    let stop = k(self, env);
                    env.pop();
                    stop
                }
                (None, None) => {
                    let (Term::Var(v), Term::Var(w)) = (a, b) else { unreachable!() };
                    let adom = self.adom.clone();
                    for x in adom {
                        env.push((v.clone(), Some(x.clone())));
                        env.push((w.clone(), Some(x)));
                        let stop = k(self, env);
                        env.truncate(env.len() - 2);
                        if stop {
                            return true;
                        }
                    }
                    false
                }
            },
            Formula::Lt(a, b) => {
                let vars: Vec<Var> = [a, b].into_iter().filter_map(Term::as_var).cloned().collect();
                self.bind_rest(&vars, 0, env, &mut |ev, env| {
                    let (x, y) = (term_val(env, a).unwrap(), term_val(env, b).unwrap());
                    match (x.as_const(), y.as_const()) {
                        (Some(x), Some(y)) if x < y => k(ev, env),
                        _ => false,
                    }
                })
            }
            Formula::And(cs) => {
                let refs: Vec<&Formula> = cs.iter().collect();
                self.solve_and(&refs, env, k)
            }
            Formula::Or(cs) => {
                let missing = self.unbound(f, env);
                if missing.is_empty() {
                    for c in cs {
                        if self.check(c, env) {
                            return k(self, env);
                        }
                    }
                    return false;
                }
                // Collect distinct extensions first so each is reported once.
                let mut found: BTreeSet<Tuple> = BTreeSet::new();
                for c in cs {
                    self.solve(c, env, &mut |ev, env| {
                        ev.bind_rest(&missing, 0, env, &mut |_, env| {
                            found.insert(missing.iter().map(|v| lookup(env, v).unwrap().clone()).collect());
                            false
                        })
                    });
                }
                self.replay(&missing, found, env, k)
            }
            Formula::Not(c) => {
                let missing = self.unbound(c, env);
                let c = c.as_ref();
                self.bind_rest(&missing, 0, env, &mut |ev, env| !ev.check(c, env) && k(ev, env))
            }
            Formula::Exists(v, c) => {
                let missing = self.unbound(f, env);
                env.push((v.clone(), None));
                if missing.is_empty() {
                    let found = self.check(c, env);
                    env.pop();
                    return found && k(self, env);
                }
                let mut found: BTreeSet<Tuple> = BTreeSet::new();
                self.solve(c, env, &mut |ev, env| {
                    ev.bind_rest(&missing, 0, env, &mut |_, env| {
                        found.insert(missing.iter().map(|v| lookup(env, v).unwrap().clone()).collect());
                        false
                    })
                });
                env.pop();
                self.replay(&missing, found, env, k)
            }
            Formula::Forall(v, c) => {
                let missing = self.unbound(f, env);
                let c = c.as_ref();
                self.bind_rest(&missing, 0, env, &mut |ev, env| {
                    env.push((v.clone(), None));
                    let mut all = true;
                    let adom = ev.adom.clone();
                    for a in adom {
                        env.push((v.clone(), Some(a)));
                        let ok = ev.check(c, env);
                        env.pop();
                        if !ok {
                            all = false;
                            break;
                        }
                    }
                    env.pop();
                    all && k(ev, env)
                })
            }
            Formula::Certain(cq) => {
                let answers = match self.certain_answers(cq) {
                    Some(a) => a,
                    None => return true,
                };
                let answer = &cq.query.answer;
                for tuple in answers.iter() {
                    let mark = env.len();
                    let mut ok = true;
                    for (x, v) in answer.iter().zip(tuple) {
                        match lookup(env, x) {
                            Some(b) if b != v => {
                                ok = false;
                                break;
                            }
                            Some(_) => {}
                            None => env.push((x.clone(), Some(v.clone()))),
                        }
                    }
                    let stop = ok && k(self, env);
                    env.truncate(mark);
                    if stop {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn replay(&mut self, vars: &[Var], found: BTreeSet<Tuple>, env: &mut Env, k: &mut Cont<'_, 'i>) -> bool {
        for t in found {
            let mark = env.len();
            env.extend(vars.iter().cloned().zip(t.into_iter().map(Some)));
            let stop = k(self, env);
            env.truncate(mark);
            if stop {
                return true;
            }
        }
        false
    }

    /// Conjunction: generators (atoms, certain nodes, equalities with a bound
    /// side) run first; tests run as soon as their variables are bound.
    fn solve_and(&mut self, rest: &[&Formula], env: &mut Env, k: &mut Cont<'_, 'i>) -> bool {
        if rest.is_empty() {
            return k(self, env);
        }
        let pick = self.pick(rest, env);
        let chosen = rest[pick];
        let others: Vec<&Formula> = rest.iter().enumerate().filter(|&(i, _)| i != pick).map(|(_, f)| *f).collect();
        self.solve(chosen, env, &mut |ev, env| ev.solve_and(&others, env, k))
    }

    fn pick(&self, rest: &[&Formula], env: &Env) -> usize {
        let score = |f: &Formula| -> u8 {
            let unbound = self.unbound(f, env);
            if unbound.is_empty() {
                return 0;
            }
            match f {
                Formula::Eq(a, b) if term_val(env, a).is_some() || term_val(env, b).is_some() => 1,
                Formula::Atom(_) | Formula::Certain(_) => 2,
                Formula::Exists(..) | Formula::And(_) | Formula::Or(_) | Formula::True | Formula::False => 3,
                _ => 4,
            }
        };
        let mut best = 0;
        let mut best_score = u8::MAX;
        for (i, f) in rest.iter().enumerate() {
            let s = score(f);
            if s < best_score {
                best = i;
                best_score = s;
            }
        }
        best
    }

    fn certain_answers(&mut self, cq: &Arc<CertainQuery>) -> Option<Arc<BTreeSet<Tuple>>> {
        let key = Arc::as_ptr(cq);
        if let Some(a) = self.certain.get(&key) {
            return Some(a.clone());
        }
        let mkey = Arc::as_ptr(&cq.mapping);
        let chased = match self.chases.get(&mkey) {
            Some(j) => j.clone(),
            None => match crate::chase::naive_chase(&cq.mapping, self.inst) {
                Ok(j) => {
                    let j = Arc::new(j);
                    self.chases.insert(mkey, j.clone());
                    j
                }
                Err(e) => {
                    self.error = Some(e);
                    return None;
                }
            },
        };
        match ground_answers(&cq.query.to_formula(), &chased, &cq.query.answer) {
            Ok(a) => {
                let a = Arc::new(a);
                self.certain.insert(key, a.clone());
                Some(a)
            }
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }
}
