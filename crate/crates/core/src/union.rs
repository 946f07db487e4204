//! The union code: every valid packet of every codeword, with provenance.

use std::sync::OnceLock;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::codes::{Codebook, CodeSpec, MvLayout};
use crate::error::{Error, Result};
use crate::gfp::{self, Vector};
use crate::metrics;

pub const DEFAULT_UNION_BUDGET: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub index: usize,
    pub generator: Vec<Vector>,
    pub dimension: usize,
}

#[derive(Debug)]
pub struct UnionCode {
    p: u8,
    ambient_len: usize,
    vectors: IndexMap<Vector, Vec<usize>>,
    components: Vec<Component>,
    min_distance: OnceLock<Option<usize>>,
}

impl Clone for UnionCode {
    fn clone(&self) -> Self {
        UnionCode {
            p: self.p,
            ambient_len: self.ambient_len,
            vectors: self.vectors.clone(),
            components: self.components.clone(),
            min_distance: self.min_distance.clone(),
        }
    }
}

/// Union of all component codes of a codebook.
pub fn build_union(codebook: &Codebook, budget: u128) -> Result<UnionCode> {
    let gens: Vec<Vec<Vector>> = codebook
        .codewords
        .iter()
        .map(|c| c.component_matrix().to_vec())
        .collect();
    UnionCode::from_generators(&gens, codebook.ambient_len, codebook.p, budget)
}

impl UnionCode {
    /// Union of the row spaces of `generators[i]`; component `i` gets index `i`.
    pub fn from_generators(generators: &[Vec<Vector>], ambient_len: usize, p: u8, budget: u128) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::EmptyInput("union of zero components"));
        }
        let components: Vec<Component> = generators
            .iter()
            .enumerate()
            .map(|(index, g)| {
                if let Some(bad) = g.iter().find(|r| r.len() != ambient_len) {
                    return Err(Error::LengthMismatch { expected: ambient_len, got: bad.len() });
                }
                let ech = gfp::rref(g, ambient_len, p);
                Ok(Component { index, generator: ech.rows, dimension: ech.pivots.len() })
            })
            .collect::<Result<_>>()?;
        let needed: u128 = components
            .iter()
            .map(|c| (p as u128).checked_pow(c.dimension as u32).unwrap_or(u128::MAX))
            .fold(0u128, |a, b| a.saturating_add(b));
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let spans: Vec<Vec<Vector>> = components
            .par_iter()
            .map(|c| gfp::span(&c.generator, ambient_len, p))
            .collect();
        let mut vectors: IndexMap<Vector, Vec<usize>> = IndexMap::new();
        for (c, span) in components.iter().zip(spans) {
            for v in span {
                vectors.entry(v).or_default().push(c.index);
            }
        }
        Ok(UnionCode { p, ambient_len, vectors, components, min_distance: OnceLock::new() })
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn ambient_len(&self) -> usize {
        self.ambient_len
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.vectors.contains_key(v)
    }

    /// Component indices whose span contains `v`, ascending.
    pub fn provenance(&self, v: &[u8]) -> Option<&[usize]> {
        self.vectors.get(v).map(|p| p.as_slice())
    }

    pub fn vectors(&self) -> impl Iterator<Item = &Vector> {
        self.vectors.keys()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Minimum pairwise Hamming distance; `None` for a single-vector union.
    pub fn min_distance(&self) -> Option<usize> {
        *self.min_distance.get_or_init(|| {
            let all: Vec<Vector> = self.vectors.keys().cloned().collect();
            metrics::min_distance(&all).ok()
        })
    }

    pub fn union_min_distance(&self) -> Result<usize> {
        self.min_distance()
            .ok_or(Error::EmptyInput("union has fewer than two vectors"))
    }

    /// `floor((d - 1) / 2)`, or 0 for a degenerate union.
    pub fn correction_radius(&self) -> usize {
        self.min_distance().map(|d| (d - 1) / 2).unwrap_or(0)
    }

    /// Minimum weight of each component (`None` for the zero code).
    pub fn component_min_distances(&self) -> Vec<(usize, Option<usize>)> {
        self.components
            .par_iter()
            .map(|c| (c.index, metrics::linear_code_min_distance(&c.generator, self.ambient_len, self.p)))
            .collect()
    }

    /// The union of only the listed components.
    pub fn restrict(&self, list: &[usize]) -> Result<UnionCode> {
        if list.is_empty() {
            return Err(Error::EmptyInput("restriction list is empty"));
        }
        let mut keep: Vec<usize> = list.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&i| !self.components.iter().any(|c| c.index == i)) {
            return Err(Error::InvalidSpec(format!("no component with index {bad}")));
        }
        let components: Vec<Component> = self
            .components
            .iter()
            .filter(|c| keep.binary_search(&c.index).is_ok())
            .cloned()
            .collect();
        let vectors: IndexMap<Vector, Vec<usize>> = self
            .vectors
            .iter()
            .filter_map(|(v, prov)| {
                let kept: Vec<usize> = prov.iter().copied().filter(|i| keep.binary_search(i).is_ok()).collect();
                (!kept.is_empty()).then(|| (v.clone(), kept))
            })
            .collect();
        Ok(UnionCode {
            p: self.p,
            ambient_len: self.ambient_len,
            vectors,
            components,
            min_distance: OnceLock::new(),
        })
    }

    /// CSV dump: one row per vector with its provenance.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["vector", "components"]).map_err(err)?;
        for (v, prov) in &self.vectors {
            let ids: Vec<String> = prov.iter().map(|i| i.to_string()).collect();
            w.write_record([gfp::to_digit_string(v), ids.join(" ")]).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii csv"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub id: String,
    pub claim: String,
    pub measured: String,
    pub pass: bool,
    /// Informational checks are reported but never fail a run.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub code: String,
    pub layout: Option<MvLayout>,
    pub basis: String,
    pub q: u8,
    pub ambient_len: usize,
    pub union_size: usize,
    pub union_min_distance: Option<usize>,
    pub component_count: usize,
    pub checks: Vec<LemmaCheck>,
    pub all_pass: bool,
}

fn check(id: &str, claim: String, measured: String, pass: bool) -> LemmaCheck {
    LemmaCheck { id: id.into(), claim, measured, pass, informational: false }
}

fn info(id: &str, claim: String, measured: String, pass: bool) -> LemmaCheck {
    LemmaCheck { id: id.into(), claim, measured, pass, informational: true }
}

fn fmt_opt(d: Option<usize>) -> String {
    d.map(|x| x.to_string()).unwrap_or_else(|| "inf".into())
}

/// Checks a single component bound `d_H(C) <= bound` over the listed
/// components, skipping zero codes. Reports the worst offender.
fn bound_over(id: &str, claim: String, dists: &[(usize, Option<usize>)], bound: usize) -> LemmaCheck {
    let worst = dists.iter().filter_map(|&(i, d)| d.map(|d| (i, d))).max_by_key(|&(i, d)| (d, usize::MAX - i));
    match worst {
        Some((i, d)) => check(id, claim, format!("max d_H = {d} (component {i})"), d <= bound),
        None => check(id, claim, "no nonzero component".into(), true),
    }
}

/// Evaluate every distance and cardinality claim that applies to `spec`'s
/// union code. Failures are entries in the report, not errors.
pub fn verify_lemmas(spec: &CodeSpec, union: &UnionCode) -> LemmaReport {
    let q = spec.q() as u128;
    let m = spec.m();
    let d_union = union.min_distance();
    let comp = union.component_min_distances();
    let size = union.len() as u128;
    let ambient_total = q.checked_pow(union.ambient_len() as u32);
    let proper_ambient = |id: &str| {
        let pass = ambient_total.map(|t| size < t).unwrap_or(true);
        check(
            id,
            format!("|C_U| < q^ambient_len = {}^{}", q, union.ambient_len()),
            format!("|C_U| = {size}"),
            pass,
        )
    };
    let mut checks = Vec::new();
    let mut layout = None;

    match spec {
        CodeSpec::Gabidulin(g) => {
            let (n, k) = (g.n(), g.k());
            checks.push(check("gabidulin-union-distance", "d_H(C_U) = 1".into(), format!("d_H(C_U) = {}", fmt_opt(d_union)), d_union == Some(1)));
            checks.push(bound_over("gabidulin-component-bound", format!("d_H(C) <= m - n + k = {}", m + k - n), &comp, m + k - n));
            // Components of single-term messages u(x) = u_i x^[i].
            let single: Vec<(usize, Option<usize>)> = comp
                .iter()
                .copied()
                .filter(|&(i, _)| {
                    let msg = spec.message_at(i as u128);
                    msg.iter().filter(|e| !e.is_zero()).count() == 1
                })
                .collect();
            checks.push(bound_over("gabidulin-single-term-bound", format!("d_H(C_j) <= m - n + 1 = {}", m + 1 - n), &single, m + 1 - n));
        }
        CodeSpec::Kk(kk) => {
            let l = kk.l();
            checks.push(check("kk-union-distance", "d_H(C_U) = 1".into(), format!("d_H(C_U) = {}", fmt_opt(d_union)), d_union == Some(1)));
            let d0 = comp.first().and_then(|&(_, d)| d);
            let others_min = comp.iter().skip(1).filter_map(|&(_, d)| d).min();
            checks.push(check(
                "kk-base-component-minimal",
                "d_H(C_0) <= d_H(C) for every component C".into(),
                format!("d_H(C_0) = {}, min over others = {}", fmt_opt(d0), fmt_opt(others_min)),
                match (d0, others_min) {
                    (Some(a), Some(b)) => a <= b,
                    _ => true,
                },
            ));
            checks.push(check(
                "kk-base-component-bound",
                format!("d_H(C_0) <= m - l + 1 = {}", m + 1 - l),
                format!("d_H(C_0) = {}", fmt_opt(d0)),
                d0.map(|d| d <= m + 1 - l).unwrap_or(false),
            ));
            checks.push(bound_over("kk-component-bound", format!("d_H(C) <= 2m - l + 1 = {}", 2 * m + 1 - l), &comp, 2 * m + 1 - l));
            checks.push(info(
                "kk-base-component-exact",
                format!("d_H(C_0) = m - l + 1 = {} (attainable when q >= m)", m + 1 - l),
                format!("d_H(C_0) = {}", fmt_opt(d0)),
                d0 == Some(m + 1 - l),
            ));
            let count = (q.pow(l as u32) - 1) * q.pow(m as u32) + 1;
            checks.push(check(
                "kk-union-count",
                format!("|C_U| = (q^l - 1) q^m + 1 = {count}"),
                format!("|C_U| = {size}"),
                size == count,
            ));
            let compact_ambient = q.pow((l + m) as u32);
            checks.push(check(
                "kk-union-below-ambient",
                format!("|C_U| < q^(l+m) = {compact_ambient}"),
                format!("|C_U| = {size}"),
                size < compact_ambient,
            ));
            checks.push(proper_ambient("kk-union-proper"));
        }
        CodeSpec::Mv(mv) => {
            let (l, big_l) = (mv.l(), mv.list_size());
            layout = Some(mv.layout());
            let d0 = comp.first().and_then(|&(_, d)| d);
            let others_min = comp.iter().skip(1).filter_map(|&(_, d)| d).min();
            checks.push(check(
                "mv-base-component-minimal",
                "d_H(C_0) <= d_H(C) for every component C".into(),
                format!("d_H(C_0) = {}, min over others = {}", fmt_opt(d0), fmt_opt(others_min)),
                match (d0, others_min) {
                    (Some(a), Some(b)) => a <= b,
                    _ => true,
                },
            ));
            let c0_bound = m * l - l + 1;
            checks.push(check(
                "mv-base-component-bound",
                format!("d_H(C_0) <= ml - l + 1 = {c0_bound}"),
                format!("d_H(C_0) = {}", fmt_opt(d0)),
                d0.map(|d| d <= c0_bound).unwrap_or(false),
            ));
            checks.push(info(
                "mv-base-component-exact",
                format!("d_H(C_0) = ml - l + 1 = {c0_bound} (attainable when q >= ml)"),
                format!("d_H(C_0) = {}", fmt_opt(d0)),
                d0 == Some(c0_bound),
            ));
            let (claim, bound) = if l == 1 {
                (format!("l = 1: d_H(C_U) <= m = {m}"), m)
            } else {
                let b = c0_bound.min(big_l);
                (format!("l > 1: d_H(C_U) <= min(ml - l + 1, L) = {b}"), b)
            };
            let pass = d_union.map(|d| d <= bound).unwrap_or(false);
            let measured = format!("d_H(C_U) = {}", fmt_opt(d_union));
            if spec.ctx().has_polynomial_basis() {
                checks.push(check("mv-union-distance-bound", claim, measured, pass));
            } else {
                checks.push(info("mv-union-distance-bound", format!("{claim} [non-polynomial basis]"), measured, pass));
            }
            let upper = (q.pow(l as u32) - 1).saturating_mul(q.saturating_pow((big_l * m) as u32)).saturating_add(1);
            checks.push(check(
                "mv-union-count-bound",
                format!("|C_U| <= (q^l - 1) q^(Lm) + 1 = {upper}"),
                format!("|C_U| = {size}"),
                size <= upper,
            ));
            let compact_ambient = q.saturating_pow((l + big_l * m) as u32);
            checks.push(check(
                "mv-union-below-ambient",
                format!("|C_U| < q^(l+Lm) = {compact_ambient}"),
                format!("|C_U| = {size}"),
                size < compact_ambient,
            ));
            checks.push(proper_ambient("mv-union-proper"));
        }
    }

    let all_pass = checks.iter().all(|c| c.informational || c.pass);
    LemmaReport {
        code: format!("{:?}", spec.kind()).to_lowercase(),
        layout,
        basis: spec.ctx().basis_label().into(),
        q: spec.q(),
        ambient_len: union.ambient_len(),
        union_size: union.len(),
        union_min_distance: d_union,
        component_count: union.components().len(),
        checks,
        all_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{GabidulinSpec, KkSpec, MvSpec, DEFAULT_CODEBOOK_BUDGET};
    use crate::gf::FieldContext;
    use crate::metrics::Subspace;
    use std::sync::Arc;

    fn gf8() -> Arc<FieldContext> {
        Arc::new(FieldContext::builtin(2, 3).unwrap())
    }

    fn union_of(spec: &CodeSpec) -> UnionCode {
        build_union(&spec.build_codebook(DEFAULT_CODEBOOK_BUDGET).unwrap(), DEFAULT_UNION_BUDGET).unwrap()
    }

    fn kk_example() -> CodeSpec {
        let f = gf8();
        CodeSpec::Kk(KkSpec::new(f.clone(), 1, vec![f.gamma_pow(3), f.gamma_pow(4)]).unwrap())
    }

    fn mv1() -> CodeSpec {
        let f = gf8();
        CodeSpec::Mv(MvSpec::new(f.clone(), 3, 2, 1, vec![f.gamma_pow(5)], MvLayout::Uncompressed).unwrap())
    }

    #[test]
    fn zero_dimensional_component() {
        let u = UnionCode::from_generators(&[vec![vec![0, 0, 0]]], 3, 2, 10).unwrap();
        assert_eq!(u.len(), 1);
        assert!(u.contains(&[0, 0, 0]));
        assert_eq!(u.min_distance(), None);
        assert!(u.union_min_distance().is_err());
        assert_eq!(u.component_min_distances(), vec![(0, None)]);
    }

    #[test]
    fn kk_example_union() {
        let spec = kk_example();
        let u = union_of(&spec);
        assert_eq!(u.len(), 25);
        assert_eq!(u.union_min_distance().unwrap(), 1);
        assert_eq!(u.component_min_distances()[0], (0, Some(2)));
        // Zero vector belongs to every component.
        assert_eq!(u.provenance(&[0; 6]).unwrap(), (0..8).collect::<Vec<_>>().as_slice());
        let report = verify_lemmas(&spec, &u);
        assert!(report.all_pass, "{report:#?}");
        assert!(report.checks.iter().any(|c| c.id == "kk-union-distance" && c.pass));
        assert!(report.checks.iter().any(|c| c.id == "kk-union-count" && c.claim.contains("= 25") && c.pass));
    }

    #[test]
    fn mv1_union() {
        let spec = mv1();
        let u = union_of(&spec);
        assert_eq!(u.len(), 3);
        assert_eq!(u.union_min_distance().unwrap(), 3);
        assert_eq!(u.component_min_distances(), vec![(0, Some(3)), (1, Some(9))]);
        assert_eq!(u.correction_radius(), 1);
        let report = verify_lemmas(&spec, &u);
        assert!(report.all_pass);
        let l8 = report.checks.iter().find(|c| c.id == "mv-union-distance-bound").unwrap();
        assert!(l8.pass && l8.claim.starts_with("l = 1"));
    }

    #[test]
    fn gabidulin_union() {
        let f = gf8();
        let spec = CodeSpec::Gabidulin(GabidulinSpec::new(f.clone(), 1, vec![f.gamma_pow(3), f.gamma_pow(4)]).unwrap());
        let u = union_of(&spec);
        assert_eq!(u.union_min_distance().unwrap(), 1);
        let one = u.component_min_distances()[1].1.unwrap();
        assert!(one <= 2);
        let report = verify_lemmas(&spec, &u);
        assert!(report.all_pass, "{report:#?}");
        for id in ["gabidulin-union-distance", "gabidulin-component-bound", "gabidulin-single-term-bound"] {
            assert!(report.checks.iter().any(|c| c.id == id && c.pass));
        }
    }

    #[test]
    fn restriction() {
        let u = union_of(&mv1());
        let all = u.restrict(&[0, 1]).unwrap();
        assert_eq!(all.vectors().collect::<Vec<_>>(), u.vectors().collect::<Vec<_>>());
        let c1 = u.restrict(&[1]).unwrap();
        assert_eq!(c1.len(), 2);
        assert_eq!(c1.union_min_distance().unwrap(), 9);
        assert_eq!(c1.correction_radius(), 4);
        assert!(u.restrict(&[]).is_err());
        assert!(u.restrict(&[5]).is_err());
    }

    #[test]
    fn restriction_is_monotone_on_kk() {
        let u = union_of(&kk_example());
        let d = u.union_min_distance().unwrap();
        for list in [vec![0], vec![0, 3], vec![1, 2, 7], vec![5]] {
            let r = u.restrict(&list).unwrap();
            assert!(r.vectors().all(|v| u.contains(v)));
            assert!(r.union_min_distance().unwrap() >= d);
        }
    }

    #[test]
    fn provenance_is_sound() {
        let u = union_of(&kk_example());
        let subspaces: Vec<Subspace> = u
            .components()
            .iter()
            .map(|c| Subspace::from_rows(&c.generator, 6, 2).unwrap())
            .collect();
        for v in u.vectors() {
            let prov = u.provenance(v).unwrap();
            for (i, s) in subspaces.iter().enumerate() {
                assert_eq!(prov.contains(&i), s.contains(v));
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let spec = kk_example();
        let book = spec.build_codebook(DEFAULT_CODEBOOK_BUDGET).unwrap();
        assert!(matches!(build_union(&book, 31), Err(Error::BudgetExceeded { needed: 32, budget: 31 })));
    }
}
