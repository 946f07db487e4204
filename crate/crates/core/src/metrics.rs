//! Hamming, rank, subspace and injection distances, and minimum distance of
//! finite vector sets.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldContext, FieldElement};
use crate::gfp::{self, Vector};

/// A subspace of GF(p)^ambient_len held as its reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: Vec<Vector>,
    pivots: Vec<usize>,
    ambient_len: usize,
    p: u8,
}

impl Subspace {
    /// Row space of `rows`.
    pub fn from_rows(rows: &[Vector], ambient_len: usize, p: u8) -> Result<Self> {
        for r in rows {
            if r.len() != ambient_len {
                return Err(Error::LengthMismatch { expected: ambient_len, got: r.len() });
            }
        }
        let ech = gfp::rref(rows, ambient_len, p);
        Ok(Subspace { basis: ech.rows, pivots: ech.pivots, ambient_len, p })
    }

    pub fn zero(ambient_len: usize, p: u8) -> Self {
        Subspace { basis: Vec::new(), pivots: Vec::new(), ambient_len, p }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn ambient_len(&self) -> usize {
        self.ambient_len
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        if v.len() != self.ambient_len {
            return false;
        }
        // In RREF the coefficients are read off the pivot columns.
        let coeffs: Vec<u8> = self.pivots.iter().map(|&c| v[c]).collect();
        gfp::combine(&coeffs, &self.basis, self.ambient_len, self.p) == v
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.ambient_len != other.ambient_len {
            return Err(Error::LengthMismatch { expected: self.ambient_len, got: other.ambient_len });
        }
        Ok(())
    }

    pub fn sum_dim(&self, other: &Subspace) -> Result<usize> {
        self.check_compatible(other)?;
        let stacked: Vec<Vector> = self.basis.iter().chain(&other.basis).cloned().collect();
        Ok(gfp::rank(&stacked, self.ambient_len, self.p))
    }

    pub fn intersection_dim(&self, other: &Subspace) -> Result<usize> {
        Ok(self.dim() + other.dim() - self.sum_dim(other)?)
    }
}

pub fn hamming_distance(x: &[u8], y: &[u8]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    Ok(gfp::hamming(x, y))
}

/// Rank over GF(p) of the `|x| x n` coordinate matrix of `x`.
pub fn rank_over_base(ctx: &FieldContext, x: &[FieldElement]) -> Result<usize> {
    let rows: Vec<Vector> = x.iter().map(|&e| ctx.to_vector(e)).collect::<Result<_>>()?;
    Ok(gfp::rank(&rows, ctx.n() as usize, ctx.p() as u8))
}

pub fn rank_distance(ctx: &FieldContext, x: &[FieldElement], y: &[FieldElement]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let diff: Vec<FieldElement> = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| ctx.sub(a, b))
        .collect::<Result<_>>()?;
    rank_over_base(ctx, &diff)
}

/// `dim(U + V) - dim(U ∩ V)`
pub fn subspace_distance(u: &Subspace, v: &Subspace) -> Result<usize> {
    let sum = u.sum_dim(v)?;
    let inter = u.dim() + v.dim() - sum;
    Ok(sum - inter)
}

/// `max(dim U, dim V) - dim(U ∩ V)`
pub fn injection_distance(u: &Subspace, v: &Subspace) -> Result<usize> {
    let inter = u.intersection_dim(v)?;
    Ok(u.dim().max(v.dim()) - inter)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceMetric {
    Subspace,
    #[default]
    Injection,
}

impl SubspaceMetric {
    pub fn distance(self, u: &Subspace, v: &Subspace) -> Result<usize> {
        match self {
            SubspaceMetric::Subspace => subspace_distance(u, v),
            SubspaceMetric::Injection => injection_distance(u, v),
        }
    }
}

fn check_equal_lengths(set: &[Vector]) -> Result<usize> {
    let len = set.first().map(|v| v.len()).unwrap_or(0);
    for v in set {
        if v.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: v.len() });
        }
    }
    Ok(len)
}

/// Minimum pairwise Hamming distance of a set of distinct vectors.
///
/// Pairs are scanned in parallel against a shared running minimum; the
/// scan stops early once distance 1 is seen. The result is the global
/// minimum, independent of scheduling.
pub fn min_distance(set: &[Vector]) -> Result<usize> {
    if set.len() < 2 {
        return Err(Error::EmptyInput("minimum distance needs at least two vectors"));
    }
    check_equal_lengths(set)?;
    let best = AtomicUsize::new(usize::MAX);
    (0..set.len()).into_par_iter().for_each(|i| {
        let a = &set[i];
        for b in &set[i + 1..] {
            let cur = best.load(Ordering::Relaxed);
            if cur <= 1 {
                return;
            }
            // Bounded count: stop as soon as we reach the current best.
            let mut d = 0;
            for (x, y) in a.iter().zip(b) {
                if x != y {
                    d += 1;
                    if d >= cur {
                        break;
                    }
                }
            }
            if d < cur {
                best.fetch_min(d, Ordering::Relaxed);
            }
        }
    });
    match best.into_inner() {
        0 => Err(Error::InvalidSpec("set contains duplicate vectors".into())),
        d => Ok(d),
    }
}

/// True iff `set` is closed under addition and GF(p)-scaling.
pub fn is_linear(set: &[Vector], p: u8) -> bool {
    let members: HashSet<&[u8]> = set.iter().map(|v| v.as_slice()).collect();
    let Some(first) = set.first() else {
        return false;
    };
    if !members.contains(vec![0u8; first.len()].as_slice()) {
        return false;
    }
    set.par_iter().all(|a| {
        (2..p).all(|c| members.contains(gfp::vec_scale(a, c, p).as_slice()))
            && set.iter().all(|b| members.contains(gfp::vec_add(a, b, p).as_slice()))
    })
}

/// Minimum distance using the minimum-nonzero-weight shortcut when the set
/// is verified linear, pairwise otherwise.
pub fn min_distance_auto(set: &[Vector], p: u8) -> Result<usize> {
    if set.len() >= 2 && is_linear(set, p) {
        check_equal_lengths(set)?;
        return set
            .iter()
            .map(|v| gfp::weight(v))
            .filter(|&w| w > 0)
            .min()
            .ok_or(Error::EmptyInput("linear set has no nonzero vector"));
    }
    min_distance(set)
}

/// Minimum nonzero weight of the row space of `gens`; `None` for the zero
/// code (no nonzero codeword, distance is infinite).
pub fn linear_code_min_distance(gens: &[Vector], len: usize, p: u8) -> Option<usize> {
    let ech = gfp::rref(gens, len, p);
    if ech.rank() == 0 {
        return None;
    }
    gfp::all_vectors(ech.rank(), p)
        .skip(1)
        .map(|c| gfp::weight(&gfp::combine(&c, &ech.rows, len, p)))
        .min()
}
