//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use laconic::certain::{certain_answers, eliminate, eliminate_mapping, unfold_with};
use laconic::chase::{eval_interpretation, naive_chase, restricted_chase, to_term_interpretation};
use laconic::fixtures::{self, PAIRS};
use laconic::laconify::{generate_block_types, laconic_rules, laconify, renaming_between, self_maps, BlockType};
use laconic::lang::{eval_formula, parse_mapping, Atom, SchemaMapping, Var};
use laconic::model::{compute_core, instances_isomorphic, Fact, Instance, Value};
use laconic::sqlgen::interpretation_to_sql;
use laconic::verify::{
    check_cq_equivalent, check_disjunctive_preservation, check_laconic, eval_disjunctive, examined, random_cq,
    random_mapping, random_source_instance, separating_dependency, MappingShape, Sampling,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_241_015;
const SAMPLES: usize = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core_of(m: &SchemaMapping, inst: &Instance) -> Instance {
    compute_core(&naive_chase(m, inst).unwrap()).0
}

fn pairs_suite() -> Outcome {
    let sampling = Sampling::new(SAMPLES, SEED);
    let mut shrunk = Vec::new();
    for p in &PAIRS {
        let (left, right) = fixtures::pair(p.name).unwrap();
        let l = check_laconic(&left, &sampling).unwrap();
        ensure(!l.passed(), || format!("{}: left mapping found laconic", p.name))?;
        let f = &l.failures[0];
        ensure(f.shrunk.len() <= f.instance.len() && !f.shrunk.is_empty(), || {
            format!("{}: counterexample not shrunk", p.name)
        })?;
        let r = check_laconic(&right, &sampling).unwrap();
        ensure(r.passed(), || format!("{}: right mapping not laconic\n{r}", p.name))?;
        let e = check_cq_equivalent(&left, &right, &sampling).unwrap();
        ensure(e.passed(), || format!("{}: pair not equivalent\n{e}", p.name))?;
        shrunk.push(format!("{}:{}", p.name, f.shrunk.len()));
    }
    let order_only = parse_mapping(fixtures::E_ORDER_ONLY).unwrap();
    let r = check_laconic(&order_only, &sampling).unwrap();
    ensure(!r.passed(), || "order-only form of e unexpectedly laconic".into())?;
    let e = check_cq_equivalent(&order_only, &fixtures::pair("e").unwrap().0, &sampling).unwrap();
    ensure(e.passed(), || format!("order-only form of e not equivalent\n{e}"))?;
    Ok(format!(
        "5 pairs, {SAMPLES} samples; shrunk counterexample sizes {}; order-only form of e refuted with {} facts",
        shrunk.join(" "),
        r.failures[0].shrunk.len()
    ))
}

fn laconify_suite() -> Outcome {
    let sampling = Sampling::new(SAMPLES, SEED + 1);
    let mut inputs: Vec<(String, SchemaMapping)> =
        PAIRS.iter().map(|p| (format!("{}-left", p.name), fixtures::pair(p.name).unwrap().0)).collect();
    inputs.push(("two-patterns".into(), fixtures::two_patterns()));
    for (name, m) in &inputs {
        let l = laconify(m).unwrap();
        let r = check_laconic(&l, &sampling).unwrap();
        ensure(r.passed(), || format!("{name}: output not laconic\n{r}"))?;
        let e = check_cq_equivalent(m, &l, &sampling).unwrap();
        ensure(e.passed(), || format!("{name}: output not equivalent\n{e}"))?;
    }
    Ok(format!("{} mappings, {SAMPLES} samples each", inputs.len()))
}

fn bt(atoms: &[(&str, &[&str])], consts: &[&str], nulls: &[&str]) -> BlockType {
    let order: Vec<Var> = consts.iter().chain(nulls).map(Var::new).collect();
    let nulls: Vec<Var> = nulls.iter().map(Var::new).collect();
    BlockType::new(atoms.iter().map(|(r, a)| Atom::vars(r, a)).collect(), &order, &nulls)
}

fn unary_instance(m: &SchemaMapping, p: u32, q: u32) -> Instance {
    let mut inst = Instance::new(m.source.clone());
    for (i, c) in ["a", "b", "c", "d"].iter().enumerate() {
        if p & (1 << i) != 0 {
            inst.insert(Fact::new("P", vec![Value::constant(c)])).unwrap();
        }
        if q & (1 << i) != 0 {
            inst.insert(Fact::new("Q", vec![Value::constant(c)])).unwrap();
        }
    }
    inst
}

fn example_exactness() -> Outcome {
    let m = fixtures::two_patterns();
    let expected = [
        bt(&[("R1", &["x", "y"])], &["x"], &["y"]),
        bt(&[("R2", &["x", "y"]), ("R2", &["z", "y"]), ("R1", &["z", "u"])], &["x"], &["y", "z", "u"]),
        bt(&[("R2", &["x", "y"])], &["x"], &["y"]),
    ];
    let generated = generate_block_types(&m);
    ensure(generated.len() == 3, || format!("{} types generated", generated.len()))?;
    for e in &expected {
        ensure(generated.iter().any(|g| renaming_between(e, g).is_some()), || format!("missing type {:?}", e.atoms))?;
    }
    // Which of P(x), Q(x) must hold (Some(true)), fail (Some(false)) or not matter.
    let wanted: [(bool, Option<bool>); 3] = [(true, None), (false, Some(true)), (true, Some(true))];
    let rules = laconic_rules(&m).unwrap();
    let mut checked = 0;
    for (e, (need_p, q_state)) in expected.iter().zip(wanted) {
        let rule = rules
            .iter()
            .find(|r| renaming_between(e, &r.block_type).is_some())
            .ok_or_else(|| format!("no rule for {:?}", e.atoms))?;
        let free = rule.block_type.const_vars.clone();
        let pre = &rule.precondition;
        let pre_elim = eliminate(pre).unwrap();
        for p in 0..16u32 {
            for q in 0..16u32 {
                let inst = unary_instance(&m, p, q);
                let mut truth = BTreeSet::new();
                for (i, c) in ["a", "b", "c", "d"].iter().enumerate() {
                    let in_p = p & (1 << i) != 0;
                    let in_q = q & (1 << i) != 0;
                    let ok = match (need_p, q_state) {
                        (true, None) => in_p,
                        (false, Some(true)) => in_q && !in_p,
                        (true, Some(true)) => in_q && in_p,
                        _ => unreachable!(),
                    };
                    if ok {
                        truth.insert(vec![Value::constant(c)]);
                    }
                }
                let got = eval_formula(pre, &inst, &free).unwrap();
                let got_elim = eval_formula(&pre_elim, &inst, &free).unwrap();
                ensure(got == truth && got_elim == truth, || {
                    format!("precondition of {:?} wrong on P={p:04b} Q={q:04b}", e.atoms)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("3 types; {checked} instance checks of operational and eliminated preconditions"))
}

fn exponential_types() -> Outcome {
    let m = fixtures::exponential(3);
    let types = generate_block_types(&m);
    for s in 0..8u32 {
        let mut atoms = vec![Atom::vars("R", &["x", "y0"])];
        let mut nulls = vec![Var::new("y0")];
        for i in 1..=3 {
            if s & (1 << (i - 1)) != 0 {
                let y = format!("y{i}");
                atoms.push(Atom::vars("R", &[&y, "y0"]));
                atoms.push(Atom::vars(&format!("Pp{i}"), &[&y]));
                nulls.push(Var::new(&y));
            }
        }
        let mut order = vec![Var::new("x")];
        order.extend(nulls.iter().cloned());
        let t = BlockType::new(atoms, &order, &nulls);
        ensure(types.iter().any(|g| renaming_between(&t, g).is_some()), || format!("t_S missing for S={s:03b}"))?;
    }
    Ok(format!("all 8 t_S present among {} types", types.len()))
}

fn total_relation_fixture() -> Outcome {
    let m = fixtures::symmetric_pair();
    let inst = fixtures::total_relation(&m, 4);
    let core = core_of(&m, &inst);
    let nulls = core.nulls().len();
    ensure(nulls == 6 && core.len() == 12, || format!("core has {nulls} nulls and {} facts", core.len()))?;
    let lac = naive_chase(&laconify(&m).unwrap(), &inst).unwrap();
    ensure(instances_isomorphic(&lac, &core), || "laconified chase differs from the core".into())?;
    Ok("core has 6 nulls and 12 facts; laconified chase is isomorphic".into())
}

fn interpretation_parity() -> Outcome {
    let shape = MappingShape::default();
    let mut pairs = 0;
    let mut queries = 0;
    for i in 0..500u64 {
        let m = random_mapping(SEED ^ i, &shape);
        let inst = random_source_instance(&m.source, SEED.wrapping_add(i), 5, 10);
        let pi = to_term_interpretation(&m).unwrap();
        let chased = naive_chase(&m, &inst).unwrap();
        ensure(eval_interpretation(&pi, &inst).unwrap() == chased, || {
            format!("interpretation differs on mapping\n{m}")
        })?;
        pairs += 1;
        if i % 4 == 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let q = random_cq(&m.target, &mut rng);
            let rewritten = unfold_with(&pi, &q).to_formula();
            let via_unfold = eval_formula(&rewritten, &inst, &q.answer).unwrap();
            let operational = certain_answers(&m, &q, &inst).unwrap();
            ensure(via_unfold == operational, || format!("unfold differs for {q:?} on\n{m}"))?;
            queries += 1;
        }
    }
    Ok(format!("{pairs} mapping/instance pairs, {queries} random queries"))
}

fn sql_parity() -> Outcome {
    let mut inputs: Vec<(String, SchemaMapping)> =
        vec![("skolem".into(), fixtures::skolem()), ("two-patterns".into(), fixtures::two_patterns())];
    for p in &PAIRS {
        inputs.push((format!("{}-left", p.name), fixtures::pair(p.name).unwrap().0));
    }
    for (name, m) in &inputs {
        let l = eliminate_mapping(&laconify(m).unwrap()).unwrap();
        let art = interpretation_to_sql(&to_term_interpretation(&l).unwrap()).unwrap();
        for i in 0..50u64 {
            let inst = random_source_instance(&m.source, SEED + 7 * i, 6, 12);
            let got = common::run_artifact(&art, &m.target, &inst);
            ensure(instances_isomorphic(&got, &core_of(m, &inst)), || format!("{name}: SQL result is not the core"))?;
        }
    }
    Ok(format!("{} laconified mappings, 50 instances each, SQLite", inputs.len()))
}

fn disjunctive() -> Outcome {
    let sampling = Sampling::new(40, SEED + 3);
    let mut seen = 0;
    let mut inputs: Vec<SchemaMapping> = PAIRS.iter().map(|p| fixtures::pair(p.name).unwrap().0).collect();
    inputs.push(fixtures::two_patterns());
    inputs.push(fixtures::skolem());
    for m in &inputs {
        let r = check_disjunctive_preservation(m, &sampling).unwrap();
        ensure(r.passed(), || format!("{r}"))?;
        seen += examined(&r);
    }
    // The separating dependency is exercised directly as well.
    let m = fixtures::symmetric_pair();
    let j = naive_chase(&m, &fixtures::total_relation(&m, 3)).unwrap();
    let sep = separating_dependency(&j);
    ensure(!eval_disjunctive(&sep, &j) && eval_disjunctive(&sep, &compute_core(&j).0), || {
        "separating dependency misbehaves".into()
    })?;
    ensure(seen >= 100, || format!("only {seen} non-core samples"))?;
    Ok(format!("{seen} non-core canonical solutions, 0 violations"))
}

fn restricted_remark() -> Outcome {
    let inputs = [fixtures::pair("e").unwrap().0, fixtures::two_patterns()];
    for m in &inputs {
        let stripped = m.with_tgds(laconic_rules(m).unwrap().iter().map(|r| r.to_tgd(false)).collect());
        for i in 0..SAMPLES {
            let inst = random_source_instance(&m.source, Sampling::new(SAMPLES, SEED + 5).sample_seed(i), 6, 12);
            let got = restricted_chase(&stripped, &inst).unwrap();
            ensure(instances_isomorphic(&got, &core_of(m, &inst)), || format!("differs from core on\n{inst}"))?;
        }
    }
    Ok(format!("2 mappings, {SAMPLES} samples each"))
}

fn side_conditions() -> Outcome {
    let mut mappings = vec![fixtures::symmetric_pair(), fixtures::two_patterns(), fixtures::skolem()];
    mappings.extend(PAIRS.iter().map(|p| fixtures::pair(p.name).unwrap().0));
    mappings.push(
        parse_mapping("source R/3. target S/2. tgd: R(x, y, z) -> exists n: S(x, n) & S(y, n) & S(z, n).").unwrap(),
    );
    mappings.push(
        parse_mapping("source R/3. target S/3. tgd: R(x, y, z) -> exists n: S(x, y, n) & S(y, z, n) & S(z, x, n).")
            .unwrap(),
    );
    let mut types = 0;
    let mut checks = 0;
    for m in &mappings {
        for rule in laconic_rules(m).unwrap() {
            let t = &rule.block_type;
            if self_maps(t).len() <= 1 {
                continue;
            }
            types += 1;
            let n = t.const_vars.len();
            let consts: Vec<Value> = (0..n).map(|i| Value::constant(&format!("c{i}"))).collect();
            let nulls: Vec<Value> = (0..t.null_vars.len()).map(|i| Value::fresh(i as u64)).collect();
            let phi = rule.side_condition.to_formula();
            // Null types are realized only at tuples of distinct constants.
            let assignments: Vec<Vec<usize>> = all_assignments(n)
                .into_iter()
                .filter(|a| t.is_ground() || a.iter().collect::<BTreeSet<_>>().len() == a.len())
                .collect();
            let inst_of = |a: &[usize]| {
                let vals: Vec<Value> = a.iter().map(|&k| consts[k].clone()).collect();
                t.instantiate(&m.target, &vals, &nulls)
            };
            // Φ is evaluated over the full ordered constant set.
            let universe = {
                let mut u = Instance::new(laconic::model::Schema::new().with("D", 1));
                for c in &consts {
                    u.insert(Fact::new("D", vec![c.clone()])).unwrap();
                }
                u
            };
            let allowed: Vec<bool> = assignments
                .iter()
                .map(|a| {
                    let env: Vec<(Var, Value)> =
                        t.const_vars.iter().cloned().zip(a.iter().map(|&k| consts[k].clone())).collect();
                    let by_formula = laconic::lang::Evaluator::new(&universe).holds(&phi, &env).unwrap();
                    assert_eq!(by_formula, rule.side_condition.holds(a));
                    by_formula
                })
                .collect();
            for (i, a) in assignments.iter().enumerate() {
                let ja = inst_of(a);
                checks += 1;
                // Safety: some allowed assignment realizes the same block.
                ensure(
                    assignments.iter().zip(&allowed).any(|(b, &ok)| ok && instances_isomorphic(&ja, &inst_of(b))),
                    || format!("unsafe side condition for {:?} at {a:?}", t.atoms),
                )?;
                // Rigidity: distinct allowed assignments give distinct blocks.
                if allowed[i] {
                    for (b, &ok) in assignments.iter().zip(&allowed).skip(i + 1) {
                        ensure(!(ok && instances_isomorphic(&ja, &inst_of(b))), || {
                            format!("not rigid for {:?}: {a:?} and {b:?}", t.atoms)
                        })?;
                    }
                }
            }
        }
    }
    ensure(types > 0, || "no type with non-trivial self maps".into())?;
    Ok(format!("{types} types with non-trivial self maps, {checks} realizing assignments"))
}

fn all_assignments(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..n).map(move |k| {
                    let mut b = a.clone();
                    b.push(k);
                    b
                })
            })
            .collect();
    }
    out
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("classic pairs", pairs_suite),
        ("laconify end to end", laconify_suite),
        ("two-pattern types and preconditions", example_exactness),
        ("exponential types", exponential_types),
        ("total relation core", total_relation_fixture),
        ("term interpretation and unfolding parity", interpretation_parity),
        ("SQL parity", sql_parity),
        ("disjunctive preservation", disjunctive),
        ("restricted chase without side conditions", restricted_remark),
        ("side condition rigidity and safety", side_conditions),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
