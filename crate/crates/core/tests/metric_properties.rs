mod common;

use std::collections::HashSet;
use std::sync::OnceLock;

use proptest::collection::vec;
use proptest::prelude::*;
use twotier_core::metrics::{
    hamming_distance, injection_distance, min_distance, rank_distance, subspace_distance, Subspace,
};
use twotier_core::{FieldContext, FieldElement};

fn vectors(p: u8, len: usize, max_rows: usize) -> impl Strategy<Value = Vec<Vec<u8>>> {
    vec(vec(0..p, len), 0..=max_rows)
}

/// Dimension of a span from its size.
fn dim_of(set: &HashSet<Vec<u8>>, p: u8) -> usize {
    let mut d = 0;
    let mut n = 1usize;
    while n < set.len() {
        n *= p as usize;
        d += 1;
    }
    assert_eq!(n, set.len());
    d
}

fn oracle_distances(a: &[Vec<u8>], b: &[Vec<u8>], len: usize, p: u8) -> (usize, usize) {
    let sa = common::span(a, len, p);
    let sb = common::span(b, len, p);
    let (da, db) = (dim_of(&sa, p), dim_of(&sb, p));
    let inter: HashSet<Vec<u8>> = sa.intersection(&sb).cloned().collect();
    let di = dim_of(&inter, p);
    let sum = da + db - di;
    (sum - di, da.max(db) - di)
}

static GF8: OnceLock<FieldContext> = OnceLock::new();

fn gf8() -> &'static FieldContext {
    GF8.get_or_init(|| FieldContext::builtin(2, 3).unwrap())
}

fn word(values: &[u32]) -> Vec<FieldElement> {
    values.iter().map(|&v| gf8().from_value(v % 8).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn hamming_is_a_metric(x in vec(0u8..3, 7), y in vec(0u8..3, 7), z in vec(0u8..3, 7)) {
        let d = |a: &[u8], b: &[u8]| hamming_distance(a, b).unwrap();
        prop_assert_eq!(d(&x, &y), common::hamming(&x, &y));
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &x), 0);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
        prop_assert_eq!(d(&x, &y) == 0, x == y);
    }

    #[test]
    fn subspace_metrics_match_oracle(a in vectors(3, 4, 3), b in vectors(3, 4, 3)) {
        let (ds, di) = oracle_distances(&a, &b, 4, 3);
        let u = Subspace::from_rows(&a, 4, 3).unwrap();
        let v = Subspace::from_rows(&b, 4, 3).unwrap();
        prop_assert_eq!(subspace_distance(&u, &v).unwrap(), ds);
        prop_assert_eq!(injection_distance(&u, &v).unwrap(), di);
        prop_assert!(di <= ds && ds <= 2 * di);
        for row in common::span(&a, 4, 3) {
            prop_assert!(u.contains(&row));
        }
    }

    #[test]
    fn subspace_metrics_are_metrics(a in vectors(2, 5, 3), b in vectors(2, 5, 3), c in vectors(2, 5, 3)) {
        let s = |r: &[Vec<u8>]| Subspace::from_rows(r, 5, 2).unwrap();
        let (u, v, w) = (s(&a), s(&b), s(&c));
        for f in [subspace_distance, injection_distance] {
            prop_assert_eq!(f(&u, &u).unwrap(), 0);
            prop_assert_eq!(f(&u, &v).unwrap(), f(&v, &u).unwrap());
            prop_assert!(f(&u, &w).unwrap() <= f(&u, &v).unwrap() + f(&v, &w).unwrap());
            prop_assert_eq!(f(&u, &v).unwrap() == 0, u == v);
        }
    }

    #[test]
    fn rank_distance_is_a_metric(x in vec(0u32..8, 3), y in vec(0u32..8, 3), z in vec(0u32..8, 3)) {
        let f = gf8();
        let (a, b, c) = (word(&x), word(&y), word(&z));
        let d = |p: &[FieldElement], q: &[FieldElement]| rank_distance(f, p, q).unwrap();
        let diff: Vec<Vec<u8>> = a.iter().zip(&b).map(|(&s, &t)| f.to_vector(f.sub(s, t).unwrap()).unwrap()).collect();
        prop_assert_eq!(d(&a, &b), common::rank(&diff, 2));
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(d(&a, &b) <= x.iter().zip(&y).filter(|(s, t)| s != t).count());
        prop_assert_eq!(d(&a, &b) == 0, a == b);
    }

    #[test]
    fn min_distance_matches_pairwise_oracle(set in proptest::collection::hash_set(vec(0u8..2, 6), 2..20)) {
        let set: Vec<Vec<u8>> = set.into_iter().collect();
        prop_assert_eq!(min_distance(&set).unwrap(), common::min_distance(&set).unwrap());
    }
}

#[test]
fn min_distance_rejects_degenerate_input() {
    assert!(min_distance(&[vec![0, 1]]).is_err());
    assert!(min_distance(&[vec![0, 1], vec![0, 1]]).is_err());
    assert!(min_distance(&[vec![0, 1], vec![0, 1, 1]]).is_err());
}
