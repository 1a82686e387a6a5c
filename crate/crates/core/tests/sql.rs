mod common;

use laconic::certain::eliminate_mapping;
use laconic::chase::{eval_interpretation, naive_chase, to_term_interpretation};
use laconic::fixtures;
use laconic::laconify::laconify;
use laconic::lang::{eval_formula, parse_formula, Var};
use laconic::model::{compute_core, instances_isomorphic, parse_facts};
use laconic::sqlgen::interpretation_to_sql;
use laconic::verify::{random_source_instance, Sampling};

#[test]
fn negated_existential_matches_evaluator() {
    let m = fixtures::pair("c").unwrap().0;
    let i = parse_facts("P(a). P(b). R(b, c).", &m.source).unwrap();
    let f = parse_formula("P(x) & !(exists y: R(x, y))", &m.source).unwrap();
    let (conn, _d) = common::database(&i);
    let x = [Var::new("x")];
    let ans = common::sql_answers(&conn, &f, &x, &m.source);
    assert_eq!(ans, eval_formula(&f, &i, &x).unwrap());
    assert_eq!(ans.len(), 1);
}

#[test]
fn order_and_disjunction() {
    let m = fixtures::symmetric_pair();
    let i = parse_facts("R(b, a). R(c, c). R(a, d).", &m.source).unwrap();
    let vars = [Var::new("x1"), Var::new("x2")];
    for text in
        ["(R(x1, x2) | R(x2, x1)) & x1 <= x2", "x1 < x2", "forall z: R(x1, z) | x2 = z", "!R(x1, x2) & x1 = 'c'"]
    {
        let f = parse_formula(text, &m.source).unwrap();
        let (conn, _d) = common::database(&i);
        assert_eq!(common::sql_answers(&conn, &f, &vars, &m.source), eval_formula(&f, &i, &vars).unwrap(), "{text}");
    }
}

#[test]
fn skolem_interpretation_rows() {
    let m = fixtures::skolem();
    let i = parse_facts("R(a, b).", &m.source).unwrap();
    let pi = to_term_interpretation(&m).unwrap();
    let art = interpretation_to_sql(&pi).unwrap();
    let j = common::run_artifact(&art, &m.target, &i);
    assert_eq!(j, eval_interpretation(&pi, &i).unwrap());
    assert_eq!(j.len(), 2);
}

#[test]
fn laconified_fixtures_compute_cores() {
    let mut cases = vec![fixtures::skolem(), fixtures::two_patterns()];
    for p in fixtures::PAIRS {
        cases.push(fixtures::pair(p.name).unwrap().0);
    }
    for m in cases {
        let l = eliminate_mapping(&laconify(&m).unwrap()).unwrap();
        let art = interpretation_to_sql(&to_term_interpretation(&l).unwrap()).unwrap();
        let s = Sampling::new(20, 5);
        for k in 0..s.samples {
            let i = random_source_instance(&m.source, s.sample_seed(k), 6, 12);
            let j = common::run_artifact(&art, &m.target, &i);
            let core = compute_core(&naive_chase(&m, &i).unwrap()).0;
            assert!(instances_isomorphic(&j, &core), "{m}\n{i:?}");
        }
    }
}

#[test]
fn skolem_rows_are_encoded_terms() {
    let m = fixtures::skolem();
    let i = parse_facts("R(a, b).", &m.source).unwrap();
    let art = interpretation_to_sql(&to_term_interpretation(&m).unwrap()).unwrap();
    let (conn, _d) = common::database(&i);
    conn.execute_batch(&art.to_script(false).replace(&laconic::sqlgen::adom_view(&m.source), "")).unwrap();
    let rows = |view: &str| -> Vec<(String, String)> {
        let mut stmt = conn.prepare(&format!("SELECT * FROM \"{view}\"")).unwrap();
        let out = stmt.query_map([], |r| Ok((r.get(0)?, r.get(1)?))).unwrap();
        out.map(Result::unwrap).collect()
    };
    assert_eq!(rows("target_S"), vec![("a".to_string(), "@f1_1(a,b)".to_string())]);
    assert_eq!(rows("target_T"), vec![("b".to_string(), "@f1_1(a,b)".to_string())]);
}

#[test]
fn laconified_symmetric_pair_shares_one_null() {
    let m = fixtures::symmetric_pair();
    let l = eliminate_mapping(&laconify(&m).unwrap()).unwrap();
    let art = interpretation_to_sql(&to_term_interpretation(&l).unwrap()).unwrap();
    let i = parse_facts("R(a, b). R(b, a).", &m.source).unwrap();
    let j = common::run_artifact(&art, &m.target, &i);
    assert_eq!(j.len(), 2);
    assert_eq!(j.nulls().len(), 1);
}
