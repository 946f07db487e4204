//! Vectors and matrices over a prime field GF(p).
//!
//! Packets, component-code generators and subspace bases all live here as
//! plain `u8` digit vectors. Row reduction always picks the first nonzero
//! entry in column order as the pivot and normalizes it to 1, so the reduced
//! basis of a given row space is unique and reproducible.

use crate::error::{Error, Result};

/// A vector over GF(p), one digit per coordinate.
pub type Vector = Vec<u8>;

#[inline]
pub fn add(a: u8, b: u8, p: u8) -> u8 {
    ((a as u16 + b as u16) % p as u16) as u8
}

#[inline]
pub fn sub(a: u8, b: u8, p: u8) -> u8 {
    ((a as u16 + p as u16 - b as u16) % p as u16) as u8
}

#[inline]
pub fn mul(a: u8, b: u8, p: u8) -> u8 {
    ((a as u16 * b as u16) % p as u16) as u8
}

/// Inverse of a nonzero residue by Fermat's little theorem.
pub fn inv(a: u8, p: u8) -> u8 {
    debug_assert!(!a.is_multiple_of(p));
    let mut result = 1u8;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = mul(result, base, p);
        }
        base = mul(base, base, p);
        e >>= 1;
    }
    result
}

pub fn weight(v: &[u8]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn vec_add(a: &[u8], b: &[u8], p: u8) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| add(x, y, p)).collect()
}

pub fn vec_sub(a: &[u8], b: &[u8], p: u8) -> Vector {
    a.iter().zip(b).map(|(&x, &y)| sub(x, y, p)).collect()
}

pub fn vec_scale(a: &[u8], c: u8, p: u8) -> Vector {
    a.iter().map(|&x| mul(x, c, p)).collect()
}

/// `dst += c * src`
pub fn axpy(dst: &mut [u8], c: u8, src: &[u8], p: u8) {
    if c == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = add(*d, mul(c, s, p), p);
    }
}

/// Linear combination `sum coeffs[i] * rows[i]`.
pub fn combine(coeffs: &[u8], rows: &[Vector], len: usize, p: u8) -> Vector {
    let mut out = vec![0u8; len];
    for (&c, row) in coeffs.iter().zip(rows) {
        axpy(&mut out, c, row, p);
    }
    out
}

/// Reduced row echelon form of a row set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Vec<Vector>,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Reduce `rows` (all of length `len`) to RREF. Zero rows are dropped.
pub fn rref(rows: &[Vector], len: usize, p: u8) -> Echelon {
    let mut m: Vec<Vector> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..len {
        let Some(found) = (r..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(r, found);
        let scale = inv(m[r][col], p);
        if scale != 1 {
            m[r] = vec_scale(&m[r], scale, p);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[col] != 0 {
                let c = sub(0, row[col], p);
                axpy(row, c, &pivot_row, p);
            }
        }
        pivots.push(col);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    Echelon { rows: m, pivots }
}

pub fn rank(rows: &[Vector], len: usize, p: u8) -> usize {
    rref(rows, len, p).rank()
}

/// Coefficients `c` with `sum c[i] * basis[i] = target`, if any. `basis`
/// must be linearly independent for the answer to be unique.
pub fn solve(basis: &[Vector], target: &[u8], p: u8) -> Option<Vector> {
    let k = basis.len();
    let len = target.len();
    // Augmented system: columns are basis vectors, one equation per coordinate.
    let rows: Vec<Vector> = (0..len)
        .map(|j| {
            let mut row: Vector = basis.iter().map(|b| b[j]).collect();
            row.push(target[j]);
            row
        })
        .collect();
    let ech = rref(&rows, k + 1, p);
    if ech.pivots.last() == Some(&k) {
        return None;
    }
    let mut coeffs = vec![0u8; k];
    for (row, &col) in ech.rows.iter().zip(&ech.pivots) {
        coeffs[col] = row[k];
    }
    Some(coeffs)
}

/// All `p^len` digit vectors in lexicographic order, lowest coordinate fastest.
pub fn all_vectors(len: usize, p: u8) -> impl Iterator<Item = Vector> {
    let total = (p as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    (0..total).map(move |t| index_to_digits(t, len, p))
}

pub fn index_to_digits(mut t: u128, len: usize, p: u8) -> Vector {
    let mut out = vec![0u8; len];
    for d in out.iter_mut() {
        *d = (t % p as u128) as u8;
        t /= p as u128;
    }
    out
}

/// Every vector in the row space of `gens`, enumerated over coefficient
/// vectors in lexicographic order (so the zero vector comes first).
/// Rows are expected to be independent; dependent rows yield repeats.
pub fn span(gens: &[Vector], len: usize, p: u8) -> Vec<Vector> {
    all_vectors(gens.len(), p)
        .map(|c| combine(&c, gens, len, p))
        .collect()
}

/// Render a digit vector, one base-36 character per coordinate.
pub fn to_digit_string(v: &[u8]) -> String {
    v.iter()
        .map(|&d| char::from_digit(d as u32, 36).expect("digit below 36"))
        .collect()
}

pub fn parse_digit_string(s: &str, p: u8) -> Result<Vector> {
    s.trim()
        .chars()
        .map(|ch| {
            ch.to_digit(36)
                .filter(|&d| d < p as u32)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Parse(format!("invalid base-{p} digit {ch:?} in {s:?}")))
        })
        .collect()
}
