//! Built-in example mappings and instances used by tests, the CLI and the
//! verification suites.

use crate::lang::{parse_mapping, SchemaMapping};
use crate::model::{Fact, Instance, Value};

/// A non-laconic mapping and a logically equivalent laconic one.
#[derive(Clone, Copy, Debug)]
pub struct Pair {
    pub name: &'static str,
    pub left: &'static str,
    pub right: &'static str,
}

/// The five classic pairs, labelled `a` to `e`.
pub const PAIRS: [Pair; 5] = [
    Pair {
        name: "a",
        left: "source P/1. target R/2.\n\
               tgd: P(x) -> exists y, z: R(x, y) & R(x, z).\n",
        right: "source P/1. target R/2.\n\
                tgd: P(x) -> exists y: R(x, y).\n",
    },
    Pair {
        name: "b",
        left: "source P/1. target R/2.\n\
               tgd: P(x) -> exists y: R(x, y).\n\
               tgd: P(x) -> R(x, x).\n",
        right: "source P/1. target R/2.\n\
                tgd: P(x) -> R(x, x).\n",
    },
    Pair {
        name: "c",
        left: "source R/2, P/1. target S/2.\n\
               tgd: R(x, y) -> S(x, y).\n\
               tgd: P(x) -> exists y: S(x, y).\n",
        right: "source R/2, P/1. target S/2.\n\
                tgd: R(x, y) -> S(x, y).\n\
                tgd: P(x) & !(exists y: R(x, y)) -> exists y: S(x, y).\n",
    },
    Pair {
        name: "d",
        left: "source R/2. target S/3.\n\
               tgd: R(x, y) -> exists z: S(x, y, z).\n\
               tgd: R(x, x) -> S(x, x, x).\n",
        right: "source R/2. target S/3.\n\
                tgd: R(x, y) & x != y -> exists z: S(x, y, z).\n\
                tgd: R(x, x) -> S(x, x, x).\n",
    },
    Pair {
        name: "e",
        left: "source R/2. target S/2.\n\
               tgd: R(x, y) -> exists z: S(x, z) & S(y, z).\n",
        right: "source R/2. target S/2.\n\
                tgd: (R(x, y) | R(y, x)) & x < y -> exists z: S(x, z) & S(y, z).\n\
                tgd: R(x, x) & !(exists y: (R(x, y) | R(y, x)) & x != y) -> exists z: S(x, z).\n",
    },
];

/// The commonly quoted laconic form of pair `e`. It is logically equivalent
/// to the left mapping but not laconic: on `R(a, a), R(a, b)` the block
/// `S(a, N)` folds into `S(a, M), S(b, M)`. Kept as a known negative.
pub const E_ORDER_ONLY: &str = "source R/2. target S/2.\n\
    tgd: (R(x, y) | R(y, x)) & x <= y -> exists z: S(x, z) & S(y, z).\n";

/// Two unary sources feeding overlapping target patterns.
pub const TWO_PATTERNS: &str = "source P/1, Q/1. target R1/2, R2/2.\n\
    tgd: P(x) -> exists y: R1(x, y).\n\
    tgd: Q(x) -> exists y, z, u: R2(x, y) & R2(z, y) & R1(z, u).\n";

/// Skolemization example: one binary source, two target relations.
pub const SKOLEM: &str = "source R/2. target S/2, T/2.\n\
    tgd: R(x1, x2) -> exists y: S(x1, y) & T(x2, y).\n\
    tgd: R(x, x) -> S(x, x).\n";

/// The symmetric pair mapping; no order-free term interpretation computes its cores.
pub const SYMMETRIC_PAIR: &str = "source R/2. target S/2.\n\
    tgd: R(x, y) -> exists z: S(x, z) & S(y, z).\n";

fn parse(text: &str) -> SchemaMapping {
    parse_mapping(text).expect("built-in mapping parses")
}

pub fn pair(name: &str) -> Option<(SchemaMapping, SchemaMapping)> {
    PAIRS.iter().find(|p| p.name == name).map(|p| (parse(p.left), parse(p.right)))
}

pub fn two_patterns() -> SchemaMapping {
    parse(TWO_PATTERNS)
}

pub fn skolem() -> SchemaMapping {
    parse(SKOLEM)
}

pub fn symmetric_pair() -> SchemaMapping {
    parse(SYMMETRIC_PAIR)
}

/// Text of the mapping with `k` marker relations whose types multiply:
/// `P_i(x) -> P'_i(x)` for each i, and `Q(x) -> exists y0..yk: R(x,y0) & R(yi,y0) & P'_i(yi)`.
pub fn exponential_text(k: usize) -> String {
    let mut s = String::from("source Q/1");
    for i in 1..=k {
        s += &format!(", P{i}/1");
    }
    s += ". target R/2";
    for i in 1..=k {
        s += &format!(", Pp{i}/1");
    }
    s += ".\n";
    for i in 1..=k {
        s += &format!("tgd: P{i}(x) -> Pp{i}(x).\n");
    }
    let ys: Vec<String> = (0..=k).map(|i| format!("y{i}")).collect();
    let mut atoms = vec!["R(x, y0)".to_string()];
    for i in 1..=k {
        atoms.push(format!("R(y{i}, y0)"));
        atoms.push(format!("Pp{i}(y{i})"));
    }
    s += &format!("tgd: Q(x) -> exists {}: {}.\n", ys.join(", "), atoms.join(" & "));
    s
}

pub fn exponential(k: usize) -> SchemaMapping {
    parse(&exponential_text(k))
}

/// Source instance over `symmetric_pair` where `R` is total on `n` constants.
pub fn total_relation(m: &SchemaMapping, n: usize) -> Instance {
    let consts: Vec<Value> = (0..n).map(|i| Value::constant(&((b'a' + i as u8) as char).to_string())).collect();
    let mut inst = Instance::new(m.source.clone());
    for a in &consts {
        for b in &consts {
            inst.insert(Fact::new("R", vec![a.clone(), b.clone()])).expect("R/2 in source");
        }
    }
    inst
}

/// Every built-in mapping, named.
pub fn all() -> Vec<(String, SchemaMapping)> {
    let mut out = Vec::new();
    for p in &PAIRS {
        out.push((format!("{}-left", p.name), parse(p.left)));
        out.push((format!("{}-right", p.name), parse(p.right)));
    }
    out.push(("two-patterns".into(), two_patterns()));
    out.push(("skolem".into(), skolem()));
    out.push(("exponential-3".into(), exponential(3)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_fixtures_parse() {
        assert_eq!(all().len(), 13);
        assert_eq!(exponential(3).tgds.len(), 4);
        assert_eq!(total_relation(&symmetric_pair(), 4).len(), 16);
    }
}
