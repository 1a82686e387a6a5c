//! Small hand-checked examples, compared against exhaustive enumeration.

use std::collections::BTreeSet;
use std::sync::Arc;

use laconic::certain::{certain_answers, eliminate, unfold};
use laconic::chase::{eval_interpretation, to_term_interpretation};
use laconic::fixtures;
use laconic::laconify::{
    generate_block_types, laconic_rules, laconify, self_maps, side_condition, strict_embeddings, BlockType,
};
use laconic::lang::{eval_formula, parse_cq, parse_mapping, Atom, Cq, Formula, SchemaMapping, Var};
use laconic::model::{instances_isomorphic, parse_facts, Fact, Instance, Schema, Value};
use laconic::verify::{check_cq_equivalent, check_laconic, Sampling};

fn c(s: &str) -> Value {
    Value::constant(s)
}

/// Every instance over `schema` whose values come from `consts`.
fn all_instances(schema: &Schema, consts: &[&str]) -> Vec<Instance> {
    let mut facts = Vec::new();
    for (rel, arity) in schema.relations() {
        let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
        for _ in 0..arity {
            tuples =
                tuples.into_iter().flat_map(|t| consts.iter().map(move |k| [t.clone(), vec![c(k)]].concat())).collect();
        }
        facts.extend(tuples.into_iter().map(|t| Fact::new(rel.clone(), t)));
    }
    assert!(facts.len() <= 16, "enumeration too large");
    (0u32..1 << facts.len())
        .map(|mask| {
            let chosen = facts.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, f)| f.clone());
            Instance::from_facts(schema.clone(), chosen).unwrap()
        })
        .collect()
}

fn holds(inst: &Instance, rel: &str, args: &[&Value]) -> bool {
    inst.contains(&Fact::new(rel, args.iter().map(|v| (*v).clone()).collect()))
}

fn bt(atoms: &[(&str, &[&str])], consts: &[&str], nulls: &[&str]) -> BlockType {
    let order: Vec<Var> = consts.iter().chain(nulls).map(Var::new).collect();
    let nulls: Vec<Var> = nulls.iter().map(Var::new).collect();
    BlockType::new(atoms.iter().map(|(r, a)| Atom::vars(r, a)).collect(), &order, &nulls)
}

#[test]
fn order_only_interpretation_picks_one_orientation() {
    let m = parse_mapping(fixtures::E_ORDER_ONLY).unwrap();
    let pi = to_term_interpretation(&m).unwrap();
    assert_eq!(pi.branches(&"S".into()).len(), 2);
    let i = parse_facts("R(a, b). R(b, a).", &m.source).unwrap();
    let j = eval_interpretation(&pi, &i).unwrap();
    assert_eq!(j.len(), 2);
    assert_eq!(j.nulls().len(), 1);
}

#[test]
fn certain_answers_on_small_instances() {
    let m = fixtures::two_patterns();
    let q = parse_cq("[x] exists y: R1(x, y)", &m.target).unwrap();
    let i = parse_facts("P(a).", &m.source).unwrap();
    assert_eq!(certain_answers(&m, &q, &i).unwrap(), BTreeSet::from([vec![c("a")]]));
    let empty = Instance::new(m.source.clone());
    assert!(certain_answers(&m, &q, &empty).unwrap().is_empty());

    let sym = fixtures::symmetric_pair();
    let q = parse_cq("[x, y] S(x, y)", &sym.target).unwrap();
    let i = parse_facts("R(a, b).", &sym.source).unwrap();
    assert!(certain_answers(&sym, &q, &i).unwrap().is_empty());
}

#[test]
fn shared_null_query_unfolds_to_symmetric_closure() {
    let m = fixtures::symmetric_pair();
    let q = parse_cq("[u, v] exists z: S(u, z) & S(v, z)", &m.target).unwrap();
    let rewriting = unfold(&m, &q).unwrap().to_formula();
    let consts = ["a", "b", "c"];
    for inst in all_instances(&m.source, &consts) {
        let mut expected = BTreeSet::new();
        for u in &consts {
            for v in &consts {
                let (u, v) = (c(u), c(v));
                let touches = consts.iter().any(|w| holds(&inst, "R", &[&u, &c(w)]) || holds(&inst, "R", &[&c(w), &u]));
                if holds(&inst, "R", &[&u, &v]) || holds(&inst, "R", &[&v, &u]) || (u == v && touches) {
                    expected.insert(vec![u, v]);
                }
            }
        }
        assert_eq!(eval_formula(&rewriting, &inst, &q.answer).unwrap(), expected, "{inst}");
        assert_eq!(certain_answers(&m, &q, &inst).unwrap(), expected, "{inst}");
    }
}

#[test]
fn null_position_has_no_rewriting() {
    let m = fixtures::symmetric_pair();
    let q = parse_cq("[u, v] S(u, v)", &m.target).unwrap();
    assert!(unfold(&m, &q).unwrap().disjuncts.is_empty());
}

#[test]
fn eliminated_certain_answer_is_source_query() {
    let m = fixtures::two_patterns();
    let x = Var::new("x");
    let q = Cq::new(vec![x.clone()], vec![Atom::vars("R1", &["x", "y"])]);
    let f = eliminate(&Formula::certain(q, Arc::new(m.clone()))).unwrap();
    assert!(!f.has_certain());
    for inst in all_instances(&m.source, &["a", "b", "c", "d"]) {
        let expected: BTreeSet<Vec<Value>> = inst.facts_of(&"P".into()).map(|f| f.args.clone()).collect();
        assert_eq!(eval_formula(&f, &inst, std::slice::from_ref(&x)).unwrap(), expected);
    }
}

#[test]
fn exponential_example_has_eleven_types() {
    let types = generate_block_types(&fixtures::exponential(3));
    assert_eq!(types.len(), 11);
    assert_eq!(types.iter().filter(|t| t.is_ground()).count(), 3);
}

#[test]
fn full_tgd_gives_one_ground_type_with_plain_precondition() {
    let m = parse_mapping("source R/2. target S/2. tgd: R(x, y) -> S(x, y).").unwrap();
    let rules = laconic_rules(&m).unwrap();
    assert_eq!(rules.len(), 1);
    let t = &rules[0].block_type;
    assert!(t.is_ground());
    let pre = eliminate(&rules[0].precondition).unwrap();
    for inst in all_instances(&m.source, &["a", "b", "c"]) {
        let expected: BTreeSet<Vec<Value>> = inst.facts().map(|f| f.args.clone()).collect();
        assert_eq!(eval_formula(&pre, &inst, &t.const_vars).unwrap(), expected);
    }
}

#[test]
fn running_example_types_are_rigid() {
    let t2 = bt(&[("R2", &["x", "y"]), ("R2", &["z", "y"]), ("R1", &["z", "u"])], &["x"], &["y", "z", "u"]);
    assert_eq!(self_maps(&t2).len(), 1);
    assert_eq!(self_maps(&bt(&[("R1", &["x", "y"])], &["x"], &["y"])).len(), 1);
    // z is a null of t2, so only x -> x embeds t3 strictly
    let t3 = bt(&[("R2", &["x", "y"])], &["x"], &["y"]);
    assert_eq!(strict_embeddings(&t3, &t2).len(), 1);
}

#[test]
fn three_way_symmetric_type_is_made_rigid() {
    let t = bt(&[("S", &["x", "z"]), ("S", &["y", "z"]), ("S", &["w", "z"])], &["x", "y", "w"], &["z"]);
    assert_eq!(self_maps(&t).len(), 6);
    let phi = side_condition(&t);
    let schema = Schema::new().with("S", 2);
    let consts: Vec<Value> = ["c1", "c2", "c3"].iter().map(|s| c(s)).collect();
    let null = [Value::fresh(0)];
    let mut injective = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for d in 0..3 {
                if a != b && b != d && a != d {
                    injective.push([a, b, d]);
                }
            }
        }
    }
    let block = |a: &[usize; 3]| t.instantiate(&schema, &a.map(|k| consts[k].clone()), &null);
    let allowed: Vec<&[usize; 3]> = injective.iter().filter(|a| phi.holds(&a[..])).collect();
    // All six orderings realize the same block, so exactly one may remain.
    assert_eq!(allowed.len(), 1);
    for a in &injective {
        assert!(allowed.iter().any(|b| instances_isomorphic(&block(a), &block(b))));
    }

    let m = parse_mapping("source R/3. target S/2. tgd: R(x, y, w) -> exists z: S(x, z) & S(y, z) & S(w, z).").unwrap();
    let l = laconify(&m).unwrap();
    assert!(check_laconic(&l, &Sampling::new(100, 3)).unwrap().passed());
    assert!(check_cq_equivalent(&m, &l, &Sampling::new(100, 4)).unwrap().passed());
}

#[test]
fn loop_pair_keeps_only_the_ground_type() {
    let (left, right) = fixtures::pair("b").unwrap();
    let rules = laconic_rules(&left).unwrap();
    for r in rules.iter().filter(|r| !r.block_type.is_ground()) {
        let pre = eliminate(&r.precondition).unwrap();
        for inst in all_instances(&left.source, &["a", "b", "c"]) {
            assert!(eval_formula(&pre, &inst, &r.block_type.const_vars).unwrap().is_empty());
        }
    }
    let l = laconify(&left).unwrap();
    assert!(check_cq_equivalent(&l, &right, &Sampling::new(100, 5)).unwrap().passed());
}

#[test]
fn symmetric_pair_gets_a_mirror_order_condition() {
    let m: SchemaMapping = fixtures::pair("e").unwrap().0;
    let rules = laconic_rules(&m).unwrap();
    let sym: Vec<_> = rules.iter().filter(|r| !r.side_condition.is_trivial()).collect();
    assert_eq!(sym.len(), 1);
    let vars = &sym[0].block_type.const_vars;
    assert_eq!(sym[0].side_condition.to_formula().to_string(), format!("!{} < {}", vars[0], vars[1]));
}

#[test]
fn verification_verdicts_on_known_mappings() {
    let s = Sampling::new(200, 11);
    let full = parse_mapping("source R/2. target S/2, T/2. tgd: R(x, y) -> S(x, y) & T(y, x).").unwrap();
    assert!(check_laconic(&full, &s).unwrap().passed());
    for name in ["c", "d"] {
        let (l, r) = fixtures::pair(name).unwrap();
        assert!(check_cq_equivalent(&l, &r, &s).unwrap().passed(), "{name}");
    }
    let null = parse_mapping("source P/1. target R/2. tgd: P(x) -> exists y: R(x, y).").unwrap();
    let lp = parse_mapping("source P/1. target R/2. tgd: P(x) -> R(x, x).").unwrap();
    let report = check_cq_equivalent(&null, &lp, &s).unwrap();
    assert!(!report.passed());
    assert_eq!(report.failures[0].shrunk.len(), 1);
}
