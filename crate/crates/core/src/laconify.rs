//! Transformation of a mapping into a logically equivalent laconic mapping.
//!
//! The output has one tgd per f-block type that can occur in a core universal
//! solution. Its antecedent says "this type is realized here in the core"
//! (a precondition built from certain answers under the input mapping) and
//! adds an order constraint that picks a single representative among
//! assignments producing copies of the same block.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::{decompose, fresh_var, Atom, Cq, Formula, SchemaMapping, Term, Tgd, Var};
use crate::model::{is_core, Fact, Instance, Schema, Value};

/// An f-block type `t(x; y)`: atoms over constant variables `x` and null variables `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockType {
    pub atoms: Vec<Atom>,
    pub const_vars: Vec<Var>,
    pub null_vars: Vec<Var>,
}

impl BlockType {
    /// Builds a type from atoms, classifying variables by membership in `nulls`.
    /// Variable lists follow `order`.
    pub fn new(atoms: Vec<Atom>, order: &[Var], nulls: &[Var]) -> BlockType {
        let mut atoms_dedup: Vec<Atom> = Vec::new();
        for a in atoms {
            if !atoms_dedup.contains(&a) {
                atoms_dedup.push(a);
            }
        }
        let occurs = |v: &Var| atoms_dedup.iter().any(|a| a.variables().any(|w| w == v));
        let const_vars = order.iter().filter(|v| !nulls.contains(v) && occurs(v)).cloned().collect();
        let null_vars = order.iter().filter(|v| nulls.contains(v) && occurs(v)).cloned().collect();
        BlockType { atoms: atoms_dedup, const_vars, null_vars }
    }

    pub fn is_ground(&self) -> bool {
        self.null_vars.is_empty()
    }

    /// `t(a, N)` for the given constants and nulls.
    pub fn instantiate(&self, schema: &Schema, consts: &[Value], nulls: &[Value]) -> Instance {
        let val = |v: &Var| -> Value {
            if let Some(i) = self.const_vars.iter().position(|x| x == v) {
                consts[i].clone()
            } else {
                nulls[self.null_vars.iter().position(|y| y == v).expect("type variable")].clone()
            }
        };
        let mut inst = Instance::new(schema.clone());
        for a in &self.atoms {
            let args = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => val(v),
                    Term::Const(c) => Value::Const(c.clone()),
                })
                .collect();
            inst.insert_unchecked(Fact::new(a.relation.clone(), args));
        }
        inst
    }

    /// The canonical instance: constant variables become constants named
    /// after them, null variables become distinct nulls.
    pub fn canonical_instance(&self, schema: &Schema) -> Instance {
        let consts: Vec<Value> = self.const_vars.iter().map(|v| Value::constant(v.as_str())).collect();
        let nulls: Vec<Value> = (1..=self.null_vars.len() as u64).map(Value::fresh).collect();
        self.instantiate(schema, &consts, &nulls)
    }

    /// Whether atoms are connected through shared null variables.
    pub fn is_connected(&self) -> bool {
        let n = self.atoms.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            let next: Vec<usize> = (0..n).filter(|&j| !seen[j] && self.share_null(i, j)).collect();
            for j in next {
                seen[j] = true;
                stack.push(j);
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn share_null(&self, i: usize, j: usize) -> bool {
        self.atoms[i].variables().any(|v| self.null_vars.contains(v) && self.atoms[j].variables().any(|w| w == v))
    }

    /// Least rendering over all renamings to `x1..`, `y1..`; equal keys mean
    /// the types are renamings of each other.
    pub fn canonical_key(&self) -> String {
        let mut best: Option<String> = None;
        for xp in permutations(self.const_vars.len()) {
            for yp in permutations(self.null_vars.len()) {
                let mut names: HashMap<&Var, String> = HashMap::new();
                for (i, v) in self.const_vars.iter().enumerate() {
                    names.insert(v, format!("x{}", xp[i] + 1));
                }
                for (i, v) in self.null_vars.iter().enumerate() {
                    names.insert(v, format!("y{}", yp[i] + 1));
                }
                let mut rendered: Vec<String> = self
                    .atoms
                    .iter()
                    .map(|a| {
                        let args: Vec<String> = a
                            .args
                            .iter()
                            .map(|t| match t {
                                Term::Var(v) => names[v].clone(),
                                Term::Const(c) => format!("'{c}'"),
                            })
                            .collect();
                        format!("{}({})", a.relation, args.join(","))
                    })
                    .collect();
                rendered.sort();
                let key = format!("{}|{}", self.null_vars.len(), rendered.join(" "));
                if best.as_ref().is_none_or(|b| key < *b) {
                    best = Some(key);
                }
            }
        }
        best.unwrap_or_default()
    }

    /// `exists y: /\ t` with answer variables `x`.
    fn query(&self) -> Cq {
        Cq {
            answer: self.const_vars.clone(),
            exists: self.null_vars.clone(),
            atoms: self.atoms.clone(),
            equalities: Vec::new(),
        }
    }

    fn all_vars(&self) -> HashSet<Var> {
        self.const_vars.iter().chain(&self.null_vars).cloned().collect()
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}} ({}; {})", crate::lang::join(&self.const_vars, ", "), crate::lang::join(&self.null_vars, ", "))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                go(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn subst_atoms(atoms: &[Atom], map: &HashMap<Var, Var>) -> Vec<Atom> {
    let m: HashMap<Var, Term> = map.iter().map(|(k, v)| (k.clone(), Term::Var(v.clone()))).collect();
    atoms.iter().map(|a| a.rename(&m)).collect()
}

/// Types generated by the mapping: for every tgd and every subset of its
/// existential variables, the consequent atoms avoiding the other
/// existentials, kept when nonempty, connected and a core. Renamings are
/// merged; the result is sorted by canonical key.
///
/// A subset is also dropped when the atoms linking a kept null to a dropped
/// one cannot be mapped into the kept atoms: such a block could only be left
/// in a core by a retraction that moves the kept null as well.
pub fn generate_block_types(m: &SchemaMapping) -> Vec<BlockType> {
    collect_types(m, false)
}

/// The generated types together with their specializations: types obtained
/// from a consequent whose universal variables are partly identified. A block
/// realizing a type at a tuple with repeated constants is an injective
/// realization of such a specialization.
pub fn realizable_types(m: &SchemaMapping) -> Vec<BlockType> {
    collect_types(m, true)
}

fn collect_types(m: &SchemaMapping, specialize: bool) -> Vec<BlockType> {
    let mut out: Vec<(String, BlockType)> = Vec::new();
    for tgd in &m.tgds {
        let xs: Vec<Var> = tgd
            .universal_vars()
            .into_iter()
            .filter(|x| tgd.consequent.iter().any(|a| a.variables().any(|v| v == x)))
            .collect();
        let partitions = if specialize { set_partitions(xs.len()) } else { vec![(0..xs.len()).collect()] };
        for partition in partitions {
            let trivial = partition.iter().enumerate().all(|(i, &b)| b == i);
            let mut map = HashMap::new();
            for (i, v) in xs.iter().enumerate() {
                let first = partition.iter().position(|&b| b == partition[i]).unwrap();
                map.insert(v.clone(), xs[first].clone());
            }
            let consequent = subst_atoms(&tgd.consequent, &map);
            let order: Vec<Var> = xs.iter().chain(&tgd.exists).cloned().collect();
            let k = tgd.exists.len();
            for mask in 0u64..(1u64 << k) {
                let kept: Vec<Var> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| tgd.exists[i].clone()).collect();
                let dropped: Vec<Var> = tgd.exists.iter().filter(|y| !kept.contains(y)).cloned().collect();
                let atoms: Vec<Atom> =
                    consequent.iter().filter(|a| !a.variables().any(|v| dropped.contains(v))).cloned().collect();
                let t = BlockType::new(atoms, &order, &kept);
                if !trivial && t.is_ground() {
                    continue;
                }
                if keep_type(&t, &m.target) && retractable(&consequent, &kept, &dropped, &t) {
                    let key = t.canonical_key();
                    if !out.iter().any(|(k, _)| *k == key) {
                        out.push((key, t));
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, t)| t).collect()
}

fn keep_type(t: &BlockType, schema: &Schema) -> bool {
    !t.atoms.is_empty() && t.is_connected() && is_core(&t.canonical_instance(schema))
}

/// Whether the dropped variables can be sent to variables of `t` so that every
/// consequent atom mentioning both a kept and a dropped variable lands in `t`.
fn retractable(consequent: &[Atom], kept: &[Var], dropped: &[Var], t: &BlockType) -> bool {
    let mixed: Vec<&Atom> = consequent
        .iter()
        .filter(|a| a.variables().any(|v| kept.contains(v)) && a.variables().any(|v| dropped.contains(v)))
        .collect();
    if mixed.is_empty() {
        return true;
    }
    fn go(mixed: &[&Atom], k: usize, t: &BlockType, dropped: &[Var], map: &mut HashMap<Var, Var>) -> bool {
        if k == mixed.len() {
            return true;
        }
        let a = mixed[k];
        for b in &t.atoms {
            if a.relation != b.relation {
                continue;
            }
            let saved = map.clone();
            let ok = a.args.iter().zip(&b.args).all(|(s, d)| match (s, d) {
                (Term::Var(v), Term::Var(w)) if dropped.contains(v) => match map.get(v) {
                    Some(x) => x == w,
                    None => {
                        map.insert(v.clone(), w.clone());
                        true
                    }
                },
                (s, d) => s == d,
            });
            if ok && go(mixed, k + 1, t, dropped, map) {
                return true;
            }
            *map = saved;
        }
        false
    }
    go(&mixed, 0, t, dropped, &mut HashMap::new())
}

/// Restricted growth strings: `p[i]` is the block of element `i`.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let max = cur.iter().copied().max().map_or(0, |m| m + 1);
        for b in 0..=max {
            cur.push(b);
            go(cur, n, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), n, &mut out);
    out
}

/// A variable mapping from one type into another.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarMap {
    pub const_map: BTreeMap<Var, Var>,
    pub null_map: BTreeMap<Var, Var>,
}

impl VarMap {
    pub fn get(&self, v: &Var) -> Option<&Var> {
        self.const_map.get(v).or_else(|| self.null_map.get(v))
    }

    fn image(&self, t: &BlockType) -> Vec<Atom> {
        let map: HashMap<Var, Var> =
            self.const_map.iter().chain(&self.null_map).map(|(k, v)| (k.clone(), v.clone())).collect();
        subst_atoms(&t.atoms, &map)
    }

    fn is_identity(&self) -> bool {
        self.const_map.iter().chain(&self.null_map).all(|(k, v)| k == v)
    }
}

/// An embedding of one type into another; strict when the target has an atom
/// outside the image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub map: VarMap,
    pub strict: bool,
}

/// All maps sending constant variables to constant variables and null
/// variables injectively to null variables such that every atom of `t` lands
/// on an atom of `u`. Deterministic order.
fn atom_preserving_maps(t: &BlockType, u: &BlockType) -> Vec<VarMap> {
    fn go(
        t: &BlockType,
        u: &BlockType,
        k: usize,
        cmap: &mut BTreeMap<Var, Var>,
        nmap: &mut BTreeMap<Var, Var>,
        out: &mut Vec<VarMap>,
    ) {
        if k == t.atoms.len() {
            let vm = VarMap { const_map: cmap.clone(), null_map: nmap.clone() };
            if !out.contains(&vm) {
                out.push(vm);
            }
            return;
        }
        let a = &t.atoms[k];
        for b in &u.atoms {
            if a.relation != b.relation || a.args.len() != b.args.len() {
                continue;
            }
            let (cm, nm) = (cmap.clone(), nmap.clone());
            let mut ok = true;
            for (s, d) in a.args.iter().zip(&b.args) {
                match (s, d) {
                    (Term::Const(c), Term::Const(e)) if c == e => {}
                    (Term::Var(v), Term::Var(w)) => {
                        let v_null = t.null_vars.contains(v);
                        let w_null = u.null_vars.contains(w);
                        if v_null != w_null {
                            ok = false;
                            break;
                        }
                        let map = if v_null { &mut *nmap } else { &mut *cmap };
                        match map.get(v) {
                            Some(x) if x != w => {
                                ok = false;
                                break;
                            }
                            Some(_) => {}
                            None => {
                                if v_null && map.values().any(|x| x == w) {
                                    ok = false;
                                    break;
                                }
                                map.insert(v.clone(), w.clone());
                            }
                        }
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                go(t, u, k + 1, cmap, nmap, out);
            }
            *cmap = cm;
            *nmap = nm;
        }
    }
    let mut out = Vec::new();
    go(t, u, 0, &mut BTreeMap::new(), &mut BTreeMap::new(), &mut out);
    out
}

fn same_atom_set(a: &[Atom], b: &[Atom]) -> bool {
    a.iter().all(|x| b.contains(x)) && b.iter().all(|x| a.contains(x))
}

/// A renaming of `t` onto `u`, if the two types are renamings of each other.
pub fn renaming_between(t: &BlockType, u: &BlockType) -> Option<VarMap> {
    if t.atoms.len() != u.atoms.len()
        || t.const_vars.len() != u.const_vars.len()
        || t.null_vars.len() != u.null_vars.len()
    {
        return None;
    }
    atom_preserving_maps(t, u).into_iter().find(|m| {
        let injective = {
            let vals: HashSet<&Var> = m.const_map.values().collect();
            vals.len() == m.const_map.len()
        };
        injective && same_atom_set(&m.image(t), &u.atoms)
    })
}

/// All embeddings of `t` into `u`, flagged strict or not.
pub fn embeddings(t: &BlockType, u: &BlockType) -> Vec<Embedding> {
    atom_preserving_maps(t, u)
        .into_iter()
        .map(|map| {
            let image = map.image(t);
            let strict = u.atoms.iter().any(|a| !image.contains(a));
            Embedding { map, strict }
        })
        .collect()
}

pub fn strict_embeddings(t: &BlockType, u: &BlockType) -> Vec<Embedding> {
    embeddings(t, u).into_iter().filter(|e| e.strict).collect()
}

/// Maps of `t` onto itself: atoms onto atoms, nulls permuted. The identity comes first.
pub fn self_maps(t: &BlockType) -> Vec<VarMap> {
    let mut maps: Vec<VarMap> =
        atom_preserving_maps(t, t).into_iter().filter(|m| same_atom_set(&m.image(t), &t.atoms)).collect();
    maps.sort_by_key(|m| !m.is_identity());
    maps
}

fn distinct(vars: &[Var]) -> Vec<Formula> {
    let mut out = Vec::new();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            out.push(Formula::not(Formula::Eq(Term::Var(vars[i].clone()), Term::Var(vars[j].clone()))));
        }
    }
    out
}

/// The intermediate precondition: `t` is certain at `x` with pairwise
/// distinct nulls that are not forced to be constants. For types with nulls
/// the constant variables are also required to be pairwise distinct.
pub fn precondition_prime(t: &BlockType, m: &Arc<SchemaMapping>) -> Formula {
    let mut parts = vec![Formula::certain(t.query(), m.clone())];
    if !t.is_ground() {
        parts.extend(distinct(&t.const_vars));
    }
    let ys = &t.null_vars;
    for i in 0..ys.len() {
        for j in 0..ys.len() {
            if i == j {
                continue;
            }
            let map = HashMap::from([(ys[i].clone(), ys[j].clone())]);
            let q = Cq {
                answer: t.const_vars.clone(),
                exists: ys.iter().filter(|y| *y != &ys[i]).cloned().collect(),
                atoms: subst_atoms(&t.atoms, &map),
                equalities: Vec::new(),
            };
            parts.push(Formula::not(Formula::certain(q, m.clone())));
        }
    }
    for i in 0..ys.len() {
        let mut used = t.all_vars();
        let xp = fresh_var("x", &mut used);
        let map = HashMap::from([(ys[i].clone(), xp.clone())]);
        let mut answer = t.const_vars.clone();
        answer.push(xp.clone());
        let q = Cq {
            answer,
            exists: ys.iter().filter(|y| *y != &ys[i]).cloned().collect(),
            atoms: subst_atoms(&t.atoms, &map),
            equalities: Vec::new(),
        };
        parts.push(Formula::not(Formula::exists(xp, Formula::certain(q, m.clone()))));
    }
    conj(parts)
}

fn conj(mut parts: Vec<Formula>) -> Formula {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::And(parts)
    }
}

/// The precondition of `t`: the intermediate precondition, excluding tuples
/// where `t` only occurs inside a larger realized block.
pub fn precondition(t: &BlockType, types: &[BlockType], m: &Arc<SchemaMapping>) -> Formula {
    let primes: Vec<Formula> = types.iter().map(|u| precondition_prime(u, m)).collect();
    precondition_with(t, types, &primes)
}

fn precondition_with(t: &BlockType, types: &[BlockType], primes: &[Formula]) -> Formula {
    let own = match types.iter().position(|u| u == t) {
        Some(i) => primes[i].clone(),
        None => unreachable!("type must be listed"),
    };
    let mut parts = match own {
        Formula::And(ps) => ps,
        f => vec![f],
    };
    for (u, prime_u) in types.iter().zip(primes) {
        for e in strict_embeddings(t, u) {
            let mut used = t.all_vars();
            used.extend(u.all_vars());
            let renamed: Vec<Var> = u.const_vars.iter().map(|v| fresh_var(v.as_str(), &mut used)).collect();
            let rename: HashMap<Var, Var> = u.const_vars.iter().cloned().zip(renamed.iter().cloned()).collect();
            let mut body: Vec<Formula> = t
                .const_vars
                .iter()
                .map(|x| Formula::Eq(Term::Var(x.clone()), Term::Var(rename[&e.map.const_map[x]].clone())))
                .collect();
            body.push(prime_u.rename_vars(&rename));
            parts.push(Formula::not(Formula::exists_many(renamed, Formula::And(body))));
        }
    }
    conj(parts)
}

/// A conjunction of negated complete order types over `vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideCondition {
    pub vars: Vec<Var>,
    /// Each excluded order type lists, for every pair `i < j`, how `x_i` compares to `x_j`.
    pub excluded: Vec<Vec<Ordering>>,
}

fn order_type(a: &[usize]) -> Vec<Ordering> {
    let mut out = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            out.push(a[i].cmp(&a[j]));
        }
    }
    out
}

impl SideCondition {
    pub fn is_trivial(&self) -> bool {
        self.excluded.is_empty()
    }

    /// Evaluates the condition on an assignment given by ranks.
    pub fn holds(&self, a: &[usize]) -> bool {
        let ty = order_type(a);
        !self.excluded.contains(&ty)
    }

    pub fn to_formula(&self) -> Formula {
        let n = self.vars.len();
        let mut parts = Vec::new();
        for ty in &self.excluded {
            let mut atoms = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    let (xi, xj) = (Term::Var(self.vars[i].clone()), Term::Var(self.vars[j].clone()));
                    atoms.push(match ty[k] {
                        Ordering::Less => Formula::Lt(xi, xj),
                        Ordering::Equal => Formula::Eq(xi, xj),
                        Ordering::Greater => Formula::Lt(xj, xi),
                    });
                    k += 1;
                }
            }
            parts.push(Formula::not(conj(atoms)));
        }
        match parts.len() {
            0 => Formula::True,
            _ => conj(parts),
        }
    }
}

/// Composition `a . s`: the assignment giving `x_i` the value `a(s(x_i))`.
fn compose(a: &[usize], s: &VarMap, vars: &[Var]) -> Vec<usize> {
    vars.iter().map(|v| a[vars.iter().position(|w| w == &s.const_map[v]).expect("constant variable")]).collect()
}

/// All assignments of `n` variables into `0..n`, in lexicographic order.
pub(crate) fn assignments(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Side condition making `t` rigid: starting from `true`, repeatedly find
/// the first assignment `a` and non-identity self-map `s` with both `a` and
/// `a . s` allowed and different, and exclude the order type of `a`.
pub fn side_condition(t: &BlockType) -> SideCondition {
    let maps: Vec<VarMap> = self_maps(t).into_iter().filter(|m| !m.is_identity()).collect();
    let mut phi = SideCondition { vars: t.const_vars.clone(), excluded: Vec::new() };
    if maps.is_empty() {
        return phi;
    }
    let all = assignments(t.const_vars.len());
    'outer: loop {
        for a in &all {
            if !phi.holds(a) {
                continue;
            }
            for s in &maps {
                let b = compose(a, s, &t.const_vars);
                if &b != a && phi.holds(&b) {
                    phi.excluded.push(order_type(a));
                    continue 'outer;
                }
            }
        }
        return phi;
    }
}

/// One tgd of the laconic mapping, kept in parts.
#[derive(Clone, Debug)]
pub struct LaconicRule {
    pub block_type: BlockType,
    pub precondition: Formula,
    pub side_condition: SideCondition,
}

impl LaconicRule {
    pub fn to_tgd(&self, with_side_condition: bool) -> Tgd {
        let antecedent = if with_side_condition && !self.side_condition.is_trivial() {
            Formula::And(vec![self.precondition.clone(), self.side_condition.to_formula()])
        } else {
            self.precondition.clone()
        };
        Tgd::new(antecedent, self.block_type.null_vars.clone(), self.block_type.atoms.clone())
            .expect("precondition binds every constant variable")
    }
}

/// The realizable types of `m` (including specializations), one rule per type.
pub fn laconic_rules(m: &SchemaMapping) -> Result<Vec<LaconicRule>> {
    if m.has_certain() {
        return Err(Error::CertainPresent);
    }
    let base = Arc::new(m.clone());
    let decomposed = decompose(m);
    let types = realizable_types(&decomposed);
    let primes: Vec<Formula> = types.iter().map(|t| precondition_prime(t, &base)).collect();
    Ok(types
        .iter()
        .map(|t| LaconicRule {
            block_type: t.clone(),
            precondition: precondition_with(t, &types, &primes),
            side_condition: side_condition(t),
        })
        .collect())
}

/// A laconic mapping logically equivalent to `m`.
pub fn laconify(m: &SchemaMapping) -> Result<SchemaMapping> {
    let rules = laconic_rules(m)?;
    Ok(m.with_tgds(rules.iter().map(|r| r.to_tgd(true)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_mapping;

    fn bt(atoms: &[(&str, &[&str])], consts: &[&str], nulls: &[&str]) -> BlockType {
        BlockType {
            atoms: atoms.iter().map(|(r, a)| Atom::vars(r, a)).collect(),
            const_vars: consts.iter().map(Var::new).collect(),
            null_vars: nulls.iter().map(Var::new).collect(),
        }
    }

    #[test]
    fn renaming_respects_roles() {
        let t = bt(&[("S", &["x", "y"])], &["x"], &["y"]);
        let u = bt(&[("S", &["u", "v"])], &["u"], &["v"]);
        let r = renaming_between(&t, &u).unwrap();
        assert_eq!(r.get(&Var::new("x")), Some(&Var::new("u")));
        let swapped = bt(&[("S", &["y", "x"])], &["x"], &["y"]);
        assert!(renaming_between(&t, &swapped).is_none());
    }

    #[test]
    fn embeddings_into_larger_type() {
        let t3 = bt(&[("R2", &["x", "y"])], &["x"], &["y"]);
        let t2 = bt(&[("R2", &["x", "y"]), ("R2", &["z", "y"]), ("R1", &["z", "u"])], &["x"], &["y", "z", "u"]);
        // z is a null variable of t2, so x can only go to x
        let e = strict_embeddings(&t3, &t2);
        assert_eq!(e.len(), 1);
        let wide = bt(&[("R2", &["x", "y"]), ("R2", &["z", "y"])], &["x", "z"], &["y"]);
        assert_eq!(strict_embeddings(&t3, &wide).len(), 2);
        let t1 = bt(&[("R1", &["x", "y"])], &["x"], &["y"]);
        assert!(embeddings(&t1, &t3).is_empty());
        let id = embeddings(&t3, &t3);
        assert_eq!(id.len(), 1);
        assert!(!id[0].strict);
    }

    #[test]
    fn symmetric_type_side_condition() {
        let t = bt(&[("S", &["x", "z"]), ("S", &["y", "z"])], &["x", "y"], &["z"]);
        assert_eq!(self_maps(&t).len(), 2);
        let phi = side_condition(&t);
        assert_eq!(phi.excluded, vec![vec![Ordering::Less]]);
        assert_eq!(phi.to_formula().to_string(), "!x < y");
    }

    #[test]
    fn rigid_type_has_trivial_side_condition() {
        let t = bt(&[("R1", &["x", "y"])], &["x"], &["y"]);
        assert_eq!(self_maps(&t).len(), 1);
        assert!(side_condition(&t).is_trivial());
    }

    #[test]
    fn types_of_running_example() {
        let m = parse_mapping(
            "source P/1, Q/1. target R1/2, R2/2.\n\
             tgd: P(x) -> exists y: R1(x, y).\n\
             tgd: Q(x) -> exists y, z, u: R2(x, y) & R2(z, y) & R1(z, u).",
        )
        .unwrap();
        let types = generate_block_types(&decompose(&m));
        assert_eq!(types.len(), 3, "{types:?}");
    }

    #[test]
    fn assignments_are_lexicographic() {
        let a = assignments(2);
        assert_eq!(a, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(set_partitions(3).len(), 5);
    }
}
