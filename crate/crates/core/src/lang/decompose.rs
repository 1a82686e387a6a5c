use crate::lang::ast::{SchemaMapping, Tgd, Var};

/// Splits every tgd into one tgd per connected component of its consequent,
/// where atoms are connected when they share an existential variable.
pub fn decompose(m: &SchemaMapping) -> SchemaMapping {
    let mut out = Vec::new();
    for tgd in &m.tgds {
        out.extend(split_tgd(tgd));
    }
    m.with_tgds(out)
}

pub(crate) fn split_tgd(tgd: &Tgd) -> Vec<Tgd> {
    let n = tgd.consequent.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for y in &tgd.exists {
        let holders: Vec<usize> = (0..n).filter(|&i| tgd.consequent[i].variables().any(|v| v == y)).collect();
        for w in holders.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    groups
        .into_iter()
        .map(|(_, idx)| {
            let atoms: Vec<_> = idx.iter().map(|&i| tgd.consequent[i].clone()).collect();
            let exists: Vec<Var> =
                tgd.exists.iter().filter(|y| atoms.iter().any(|a| a.variables().any(|v| v == *y))).cloned().collect();
            Tgd { antecedent: tgd.antecedent.clone(), exists, consequent: atoms }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_mapping;

    #[test]
    fn splits_independent_existentials() {
        let m = parse_mapping("source Q/1. target A/2, B/2. tgd: Q(x) -> exists y1, y2: A(x, y1) & B(x, y2).").unwrap();
        let d = decompose(&m);
        assert_eq!(d.tgds.len(), 2);
        assert_eq!(d.tgds[0].exists, vec![Var::new("y1")]);
        assert_eq!(d.tgds[1].exists, vec![Var::new("y2")]);
    }

    #[test]
    fn keeps_connected_consequent() {
        let m = parse_mapping(
            "source Q/1. target R1/2, R2/2. tgd: Q(x) -> exists y, z, u: R2(x, y) & R2(z, y) & R1(z, u).",
        )
        .unwrap();
        assert_eq!(decompose(&m), m);
    }

    #[test]
    fn full_tgd_splits_per_atom() {
        let m = parse_mapping("source R/2. target S/2, T/2. tgd: R(x, y) -> S(x, y) & T(x, y).").unwrap();
        let d = decompose(&m);
        assert_eq!(d.tgds.len(), 2);
        assert!(d.tgds.iter().all(Tgd::is_full));
    }
}
