mod common;

use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::Arc;

use common::{concat, Oracle};
use proptest::prelude::*;
use twotier_core::codes::{CodeSpec, GabidulinSpec, KkSpec, MvLayout, MvSpec, DEFAULT_CODEBOOK_BUDGET};
use twotier_core::config::RunConfig;
use twotier_core::union::{build_union, UnionCode, DEFAULT_UNION_BUDGET};
use twotier_core::FieldContext;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn union_of(spec: &CodeSpec) -> UnionCode {
    build_union(&spec.build_codebook(DEFAULT_CODEBOOK_BUDGET).unwrap(), DEFAULT_UNION_BUDGET).unwrap()
}

/// `sum_i u_i a^(q^i)` in oracle arithmetic.
fn linearized(o: &Oracle, u: &[Vec<u8>], a: &[u8]) -> Vec<u8> {
    let q = o.p as u64;
    let mut acc = vec![0u8; o.n];
    let mut power = a.to_vec();
    for ui in u {
        acc = o.add(&acc, &o.mul(ui, &power));
        power = o.pow(&power, q);
    }
    acc
}

#[test]
fn kk_example_base_component() {
    let f = Arc::new(FieldContext::builtin(2, 3).unwrap());
    let o = Oracle::new(2, &[1, 1, 0, 1]);
    let spec = CodeSpec::Kk(KkSpec::new(f.clone(), 1, vec![f.gamma_pow(3), f.gamma_pow(4)]).unwrap());
    let union = union_of(&spec);
    let zero = vec![0u8; 3];
    let expected: HashSet<Vec<u8>> = [zero.clone(), o.gamma_pow(3), o.gamma_pow(4), o.gamma_pow(6)]
        .iter()
        .map(|a| concat(&[a, &zero]))
        .collect();
    let c0 = common::span(&union.components()[0].generator, 6, 2);
    assert_eq!(c0, expected);
    assert_eq!(common::min_weight(&c0), Some(2));
    assert_eq!(union.len(), 25);
    assert_eq!(union.union_min_distance().unwrap(), 1);
}

#[test]
fn kk_encoding_matches_oracle() {
    let f = Arc::new(FieldContext::builtin(2, 3).unwrap());
    let o = Oracle::new(2, &[1, 1, 0, 1]);
    let alphas = [0u64, 1, 2];
    let spec = KkSpec::new(f.clone(), 2, alphas.iter().map(|&k| f.gamma_pow(k as i64)).collect()).unwrap();
    let spec = CodeSpec::Kk(spec);
    let book = spec.build_codebook(DEFAULT_CODEBOOK_BUDGET).unwrap();
    assert_eq!(book.len(), 64);
    for cw in &book.codewords {
        let u: Vec<Vec<u8>> = cw.message.iter().map(|&e| f.to_vector(e).unwrap()).collect();
        for (row, &k) in cw.component_matrix().iter().zip(&alphas) {
            let a = o.gamma_pow(k);
            assert_eq!(row, &concat(&[&a, &linearized(&o, &u, &a)]));
        }
    }
}

#[test]
fn gabidulin_encoding_matches_oracle() {
    let f = Arc::new(FieldContext::new(3, 2, vec![2, 1, 1]).unwrap());
    let o = Oracle::new(3, &[2, 1, 1]);
    let spec = CodeSpec::Gabidulin(GabidulinSpec::new(f.clone(), 1, vec![f.one(), f.gamma()]).unwrap());
    let book = spec.build_codebook(DEFAULT_CODEBOOK_BUDGET).unwrap();
    assert_eq!(book.len(), 9);
    for cw in &book.codewords {
        let u: Vec<Vec<u8>> = cw.message.iter().map(|&e| f.to_vector(e).unwrap()).collect();
        let got: Vec<Vec<u8>> = cw.symbols().unwrap().iter().map(|&s| f.to_vector(s).unwrap()).collect();
        let want = vec![linearized(&o, &u, &o.one()), linearized(&o, &u, &o.gamma_pow(1))];
        assert_eq!(got, want);
    }
}

#[test]
fn mv1_rows_match_oracle() {
    let f = Arc::new(FieldContext::builtin(2, 3).unwrap());
    let o = Oracle::new(2, &[1, 1, 0, 1]);
    let spec = CodeSpec::Mv(MvSpec::new(f.clone(), 3, 2, 1, vec![f.gamma_pow(5)], MvLayout::Uncompressed).unwrap());
    let book = spec.build_codebook(DEFAULT_CODEBOOK_BUDGET).unwrap();
    let a = o.gamma_pow(5);
    for (c, cw) in book.codewords.iter().enumerate() {
        let u = vec![vec![c as u8, 0, 0]];
        let u1 = linearized(&o, &u, &a);
        let u2 = linearized(&o, &u, &u1);
        assert_eq!(cw.component_matrix(), &[concat(&[&a, &u1, &u2])]);
    }
    assert_eq!(book.codewords[1].component_matrix()[0], vec![1u8; 9]);
}

#[test]
fn union_matches_oracle_on_fixtures() {
    for name in ["kk_example.toml", "kk_gf9.toml", "mv1.toml", "mv2_compressed.toml", "gabidulin_gf8_n3_k2.toml"] {
        let cfg = RunConfig::from_path(&fixture(name)).unwrap();
        let r = cfg.resolve().unwrap();
        let book = r.spec.build_codebook(r.codebook_budget).unwrap();
        let union = build_union(&book, r.union_budget).unwrap();
        let p = r.spec.q();
        let len = union.ambient_len();
        let mut all = HashSet::new();
        for cw in &book.codewords {
            let span = common::span(cw.component_matrix(), len, p);
            for v in &span {
                assert!(union.contains(v), "{name}");
            }
            all.extend(span);
        }
        assert_eq!(all.len(), union.len(), "{name}");
        assert_eq!(union.min_distance(), common::min_distance(&all), "{name}");
        for (comp, (_, d)) in union.components().iter().zip(union.component_min_distances()) {
            assert_eq!(d, common::min_weight(&common::span(&comp.generator, len, p)), "{name}");
        }
    }
}

fn kk_count(q: u128, l: u32, m: u32) -> usize {
    ((q.pow(l) - 1) * q.pow(m) + 1) as usize
}

#[test]
fn kk_count_on_fixtures() {
    for (name, l) in [("kk_example.toml", 2), ("kk_gf8_l3.toml", 3), ("kk_gf9.toml", 2), ("kk_reed_solomon.toml", 2)] {
        let cfg = RunConfig::from_path(&fixture(name)).unwrap();
        let r = cfg.resolve().unwrap();
        let union = union_of(&r.spec);
        assert_eq!(union.len(), kk_count(r.spec.q() as u128, l, r.ctx.n()), "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn kk_count_for_random_alphas(p_idx in 0usize..2, e1 in 0i64..80, e2 in 0i64..80, k in 1usize..3) {
        let (p, modulus): (u32, Vec<u32>) = [(2, vec![1, 1, 0, 1]), (3, vec![2, 1, 1])][p_idx].clone();
        let f = Arc::new(FieldContext::new(p, modulus.len() as u32 - 1, modulus).unwrap());
        let alphas = vec![f.gamma_pow(e1), f.gamma_pow(e2)];
        let Ok(kk) = KkSpec::new(f.clone(), k, alphas) else {
            // dependent pair: rejected at construction
            let v1 = f.to_vector(f.gamma_pow(e1)).unwrap();
            let v2 = f.to_vector(f.gamma_pow(e2)).unwrap();
            prop_assert!(common::rank(&[v1, v2], p as u8) < 2);
            return Ok(());
        };
        let union = union_of(&CodeSpec::Kk(kk));
        prop_assert_eq!(union.len(), kk_count(p as u128, 2, f.n()));
        prop_assert_eq!(union.union_min_distance().unwrap(), 1);
    }
}
