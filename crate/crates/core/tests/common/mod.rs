//! Brute-force reference implementations used as test oracles. Nothing here
//! calls into the crate's arithmetic.
#![allow(dead_code)]

use std::collections::HashSet;

pub type Vector = Vec<u8>;

/// GF(p^n) elements as coefficient vectors (low-to-high), multiplied by
/// schoolbook product and long division.
#[derive(Clone, Debug)]
pub struct Oracle {
    pub p: u32,
    pub n: usize,
    pub modulus: Vec<u32>,
}

impl Oracle {
    pub fn new(p: u32, modulus: &[u32]) -> Self {
        Oracle { p, n: modulus.len() - 1, modulus: modulus.to_vec() }
    }

    pub fn add(&self, a: &[u8], b: &[u8]) -> Vector {
        a.iter().zip(b).map(|(&x, &y)| ((x as u32 + y as u32) % self.p) as u8).collect()
    }

    pub fn mul(&self, a: &[u8], b: &[u8]) -> Vector {
        let p = self.p;
        let mut prod = vec![0u32; 2 * self.n];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u32 * y as u32) % p;
            }
        }
        // The modulus is monic: eliminate from the top degree down.
        for d in (self.n..2 * self.n).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            for (k, &mk) in self.modulus.iter().enumerate() {
                let idx = d - self.n + k;
                prod[idx] = (prod[idx] + p * p - c * mk % p) % p;
            }
        }
        prod[..self.n].iter().map(|&c| c as u8).collect()
    }

    pub fn one(&self) -> Vector {
        let mut v = vec![0u8; self.n];
        v[0] = 1;
        v
    }

    pub fn pow(&self, a: &[u8], e: u64) -> Vector {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// `x^k` by repeated multiplication by x.
    pub fn gamma_pow(&self, k: u64) -> Vector {
        let mut x = vec![0u8; self.n];
        if self.n > 1 {
            x[1] = 1;
        } else {
            x[0] = ((self.p - self.modulus[0]) % self.p) as u8;
        }
        self.pow(&x, k)
    }

    pub fn size(&self) -> u64 {
        (self.p as u64).pow(self.n as u32)
    }

    pub fn all(&self) -> Vec<Vector> {
        all_vectors(self.n, self.p as u8)
    }
}

pub fn all_vectors(len: usize, p: u8) -> Vec<Vector> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn inv_mod(a: u32, p: u32) -> u32 {
    (1..p).find(|&x| a * x % p == 1).expect("nonzero residue")
}

/// Rank by plain Gaussian elimination.
pub fn rank(rows: &[Vector], p: u8) -> usize {
    let p = p as u32;
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&x| x as u32).collect()).collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let inv = inv_mod(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = (*x + p * p - f * y % p) % p;
                }
            }
        }
        r += 1;
    }
    r
}

/// Every GF(p)-combination of `gens`.
pub fn span(gens: &[Vector], len: usize, p: u8) -> HashSet<Vector> {
    let mut out = HashSet::new();
    for coeffs in all_vectors(gens.len(), p) {
        let mut v = vec![0u8; len];
        for (c, g) in coeffs.iter().zip(gens) {
            for (x, y) in v.iter_mut().zip(g) {
                *x = ((*x as u32 + *c as u32 * *y as u32) % p as u32) as u8;
            }
        }
        out.insert(v);
    }
    out
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn weight(a: &[u8]) -> usize {
    a.iter().filter(|&&x| x != 0).count()
}

/// Minimum pairwise distance by checking every pair.
pub fn min_distance<'a>(set: impl IntoIterator<Item = &'a Vector>) -> Option<usize> {
    let v: Vec<&Vector> = set.into_iter().collect();
    let mut best = None;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let d = hamming(v[i], v[j]);
            best = Some(best.map_or(d, |b: usize| b.min(d)));
        }
    }
    best
}

/// Minimum nonzero weight of a span.
pub fn min_weight(set: &HashSet<Vector>) -> Option<usize> {
    set.iter().map(|v| weight(v)).filter(|&w| w > 0).min()
}

pub fn concat(parts: &[&[u8]]) -> Vector {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}
