use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::model::instance::{Fact, Instance};
use crate::model::value::Value;

/// A homomorphism, stored as its action on nulls. Constants are fixed, and
/// nulls outside the stored map are treated as mapped to themselves.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Homomorphism {
    map: BTreeMap<Value, Value>,
}

impl Homomorphism {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn apply(&self, v: &Value) -> Value {
        match v {
            Value::Const(_) => v.clone(),
            Value::Null(_) => self.map.get(v).cloned().unwrap_or_else(|| v.clone()),
        }
    }

    pub fn apply_fact(&self, f: &Fact) -> Fact {
        f.map_values(|v| self.apply(v))
    }

    pub fn apply_instance(&self, inst: &Instance) -> Instance {
        inst.map_values(|v| self.apply(v))
    }

    pub fn get(&self, v: &Value) -> Option<&Value> {
        self.map.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Value, &Value)> {
        self.map.iter()
    }

    /// Whether this is a homomorphism from `from` into `to`.
    pub fn is_homomorphism(&self, from: &Instance, to: &Instance) -> bool {
        from.facts().all(|f| to.contains(&self.apply_fact(f)))
    }

    fn from_pairs(pairs: impl IntoIterator<Item = (Value, Value)>) -> Self {
        Homomorphism { map: pairs.into_iter().filter(|(k, v)| k != v).collect() }
    }
}

impl fmt::Display for Homomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

/// Backtracking search for a value map from `source` facts into `target`,
/// fixing constants.
struct Search<'a> {
    order: Vec<&'a Fact>,
    target: &'a Instance,
    exclude: Option<&'a Fact>,
    injective: bool,
    binding: HashMap<Value, Value>,
    used: HashSet<Value>,
}

impl<'a> Search<'a> {
    fn new(
        source: impl IntoIterator<Item = &'a Fact>,
        target: &'a Instance,
        exclude: Option<&'a Fact>,
        injective: bool,
    ) -> Self {
        Search {
            order: plan(source.into_iter().collect()),
            target,
            exclude,
            injective,
            binding: HashMap::new(),
            used: HashSet::new(),
        }
    }

    fn run(mut self) -> Option<HashMap<Value, Value>> {
        if self.step(0) {
            Some(self.binding)
        } else {
            None
        }
    }

    fn step(&mut self, depth: usize) -> bool {
        let Some(&fact) = self.order.get(depth) else {
            return true;
        };
        for cand in self.target.facts_of(&fact.relation) {
            if Some(cand) == self.exclude || cand.args.len() != fact.args.len() {
                continue;
            }
            let mut added: Vec<Value> = Vec::new();
            let mut ok = true;
            for (s, t) in fact.args.iter().zip(&cand.args) {
                match s {
                    Value::Const(_) => ok = s == t,
                    Value::Null(_) => match self.binding.get(s) {
                        Some(b) => ok = b == t,
                        None => {
                            if self.injective && (!t.is_null() || self.used.contains(t)) {
                                ok = false;
                            } else {
                                self.binding.insert(s.clone(), t.clone());
                                if self.injective {
                                    self.used.insert(t.clone());
                                }
                                added.push(s.clone());
                            }
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok && self.step(depth + 1) {
                return true;
            }
            for s in added {
                if let Some(t) = self.binding.remove(&s) {
                    self.used.remove(&t);
                }
            }
        }
        false
    }
}

/// Orders facts so that each one shares as many nulls as possible with the
/// facts before it. Ground facts come first since they are pure lookups.
fn plan(mut facts: Vec<&Fact>) -> Vec<&Fact> {
    facts.sort();
    let mut bound: HashSet<&Value> = HashSet::new();
    let mut out = Vec::with_capacity(facts.len());
    while !facts.is_empty() {
        let (best, _) = facts
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let unbound = f.nulls().filter(|n| !bound.contains(n)).count();
                (i, unbound)
            })
            .min_by_key(|&(i, unbound)| (unbound, i))
            .expect("nonempty");
        let f = facts.remove(best);
        bound.extend(f.nulls());
        out.push(f);
    }
    out
}

/// Finds a homomorphism from `from` to `to`, if one exists. Deterministic.
pub fn find_homomorphism(from: &Instance, to: &Instance) -> Option<Homomorphism> {
    Search::new(from.facts(), to, None, false).run().map(Homomorphism::from_pairs)
}

/// A homomorphism from `block` into `target` avoiding `exclude`, if any.
fn block_into(block: &Instance, target: &Instance, exclude: &Fact) -> Option<Homomorphism> {
    Search::new(block.facts(), target, Some(exclude), false).run().map(Homomorphism::from_pairs)
}

/// Searches for a block whose image under some endomorphism misses one of
/// its own facts. Mapping that block and fixing everything else is a proper
/// endomorphism; none exists iff the instance is a core.
fn shrinking_step(inst: &Instance) -> Option<Homomorphism> {
    for block in inst.blocks() {
        if !block.has_nulls() {
            continue;
        }
        for f in block.facts() {
            if let Some(h) = block_into(&block, inst, f) {
                return Some(h);
            }
        }
    }
    None
}

/// Computes the core of `inst` together with a retraction onto it.
pub fn compute_core(inst: &Instance) -> (Instance, Homomorphism) {
    let mut current = inst.clone();
    // Accumulated homomorphism inst -> current, on the nulls of inst.
    let mut total: BTreeMap<Value, Value> = inst.nulls().into_iter().map(|n| (n.clone(), n)).collect();
    while let Some(h) = shrinking_step(&current) {
        current = h.apply_instance(&current);
        for v in total.values_mut() {
            *v = h.apply(v);
        }
    }
    // `total` restricted to the core is an automorphism; undo it so that the
    // result fixes the core pointwise.
    let mut inverse: HashMap<Value, Value> = HashMap::new();
    for n in current.nulls() {
        let image = total.get(&n).cloned().unwrap_or_else(|| n.clone());
        inverse.insert(image, n);
    }
    let retraction = Homomorphism::from_pairs(total.into_iter().map(|(k, v)| {
        let back = inverse.get(&v).cloned().unwrap_or(v);
        (k, back)
    }));
    debug_assert!(retraction.is_homomorphism(inst, &current));
    (current, retraction)
}

pub fn is_core(inst: &Instance) -> bool {
    shrinking_step(inst).is_none()
}

/// Isomorphism up to renaming of nulls, matched block by block.
pub fn instances_isomorphic(a: &Instance, b: &Instance) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let (ground_a, blocks_a): (Vec<Instance>, Vec<Instance>) = a.blocks().into_iter().partition(|blk| !blk.has_nulls());
    let (ground_b, blocks_b): (Vec<Instance>, Vec<Instance>) = b.blocks().into_iter().partition(|blk| !blk.has_nulls());
    if ground_a != ground_b || blocks_a.len() != blocks_b.len() {
        return false;
    }
    // Block isomorphism is an equivalence, so greedy matching is complete.
    let mut used = vec![false; blocks_b.len()];
    for x in &blocks_a {
        let nx = x.nulls().len();
        let found = blocks_b
            .iter()
            .enumerate()
            .find(|(j, y)| !used[*j] && y.len() == x.len() && y.nulls().len() == nx && block_isomorphic(x, y));
        match found {
            Some((j, _)) => used[j] = true,
            None => return false,
        }
    }
    true
}

fn block_isomorphic(x: &Instance, y: &Instance) -> bool {
    Search::new(x.facts(), y, None, true).run().is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::Schema;

    fn c(s: &str) -> Value {
        Value::constant(s)
    }
    fn n(i: u64) -> Value {
        Value::fresh(i)
    }
    fn inst(facts: Vec<(&str, Vec<Value>)>) -> Instance {
        let schema = Schema::new().with("S", 2).with("R", 2).with("T", 2);
        Instance::from_facts(schema, facts.into_iter().map(|(r, a)| Fact::new(r, a))).unwrap()
    }

    #[test]
    fn homomorphism_single_fact() {
        let i = inst(vec![("S", vec![c("a"), n(1)])]);
        let j = inst(vec![("S", vec![c("a"), c("b")])]);
        let h = find_homomorphism(&i, &j).unwrap();
        assert_eq!(h.apply(&n(1)), c("b"));
        let j2 = inst(vec![("S", vec![c("b"), c("c")])]);
        assert!(find_homomorphism(&i, &j2).is_none());
    }

    #[test]
    fn homomorphism_shared_null() {
        let i = inst(vec![("S", vec![c("a"), n(0)]), ("S", vec![c("b"), n(0)])]);
        let j = inst(vec![("S", vec![c("a"), n(1)]), ("S", vec![c("b"), n(1)]), ("S", vec![c("a"), n(2)])]);
        let h = find_homomorphism(&i, &j).unwrap();
        assert_eq!(h.apply(&n(0)), n(1));
    }

    #[test]
    fn core_of_ground_instance_is_itself() {
        let j = inst(vec![("S", vec![c("a"), c("b")])]);
        let (core, r) = compute_core(&j);
        assert_eq!(core, j);
        assert_eq!(r, Homomorphism::identity());
        assert!(is_core(&j));
    }

    #[test]
    fn core_drops_redundant_null() {
        let j = inst(vec![("R", vec![c("a"), n(1)]), ("R", vec![c("a"), n(2)])]);
        assert!(!is_core(&j));
        let (core, r) = compute_core(&j);
        assert_eq!(core.len(), 1);
        assert!(core.is_subinstance_of(&j));
        assert!(r.is_homomorphism(&j, &core));
        for v in core.domain() {
            assert_eq!(r.apply(&v), v);
        }
    }

    #[test]
    fn isomorphism_cases() {
        let a = inst(vec![("S", vec![c("a"), n(1)])]);
        let b = inst(vec![("S", vec![c("a"), n(9)])]);
        let d = inst(vec![("S", vec![c("b"), n(1)])]);
        assert!(instances_isomorphic(&a, &b));
        assert!(!instances_isomorphic(&a, &d));
        let shared = inst(vec![("S", vec![c("a"), n(1)]), ("S", vec![c("b"), n(1)])]);
        let split = inst(vec![("S", vec![c("a"), n(1)]), ("S", vec![c("b"), n(2)])]);
        assert!(!instances_isomorphic(&shared, &split));
    }

    #[test]
    fn retraction_fixes_core_after_automorphic_detour() {
        // Two copies of a symmetric block plus a loop; the core is the loop.
        let j = inst(vec![("S", vec![n(1), n(2)]), ("S", vec![n(2), n(1)]), ("S", vec![n(3), n(3)])]);
        let (core, r) = compute_core(&j);
        assert_eq!(core.len(), 1);
        assert!(r.is_homomorphism(&j, &core));
        for v in core.domain() {
            assert_eq!(r.apply(&v), v);
        }
    }
}
