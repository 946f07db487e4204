//! Arithmetic in GF(p^n) in polynomial basis.
//!
//! An element is stored as the packed integer `sum c_i p^i` of its
//! polynomial-basis coordinates `c_0..c_{n-1}` (low-order first), tagged with
//! the id of the context that created it. Every operation checks the tag, so
//! elements of two different contexts never mix even when the parameters
//! coincide.

use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Error, Result};
use crate::gfp::{self, Vector};

static NEXT_CONTEXT_ID: AtomicU32 = AtomicU32::new(1);

/// Fields up to this size get log/antilog tables; larger ones multiply by
/// schoolbook reduction.
const TABLE_LIMIT: u32 = 1 << 20;

/// Largest field order accepted.
pub const MAX_FIELD_ORDER: u64 = 1 << 30;

/// Largest prime accepted; digit strings use base-36 characters.
pub const MAX_PRIME: u32 = 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    ctx: u32,
    value: u32,
}

impl FieldElement {
    pub fn context_id(&self) -> u32 {
        self.ctx
    }

    /// Packed polynomial-basis coordinates, `sum c_i p^i`.
    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

#[derive(Debug, Clone)]
struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Coordinates with respect to a non-polynomial basis: row `j` holds the
/// coordinates of the polynomial basis vector `x^j`.
#[derive(Debug, Clone)]
struct RepresentationBasis {
    elements: Vec<u32>,
    poly_to_basis: Vec<Vector>,
}

#[derive(Debug, Clone)]
pub struct FieldContext {
    id: u32,
    p: u32,
    n: u32,
    size: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
    basis: Option<RepresentationBasis>,
}

/// Built-in moduli: (p, n, coefficients low-to-high including the leading 1).
const BUILTIN_MODULI: &[(u32, u32, &[u32])] = &[(2, 3, &[1, 1, 0, 1]), (3, 6, &[2, 1, 0, 0, 0, 0, 1])];

pub fn builtin_modulus(p: u32, n: u32) -> Option<Vec<u32>> {
    BUILTIN_MODULI
        .iter()
        .find(|(bp, bn, _)| *bp == p && *bn == n)
        .map(|(_, _, m)| m.to_vec())
}

pub fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn prime_factors(mut x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= x {
        if x.is_multiple_of(d) {
            out.push(d);
            while x.is_multiple_of(d) {
                x /= d;
            }
        }
        d += 1;
    }
    if x > 1 {
        out.push(x);
    }
    out
}

// Polynomials over GF(p) as coefficient vectors, low-to-high.

fn poly_trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = poly_trim(a.to_vec());
    let m = poly_trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = gfp::inv(m[dm] as u8, p as u8) as u32;
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let c = r[r.len() - 1] * lead_inv % p;
        for (i, &mi) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
        }
        r = poly_trim(r);
    }
    r
}

fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let n = modulus.len() - 1;
    for deg in 1..=n / 2 {
        let count = (p as u64).pow(deg as u32);
        for t in 0..count {
            let mut d: Vec<u32> = gfp::index_to_digits(t as u128, deg, p as u8)
                .into_iter()
                .map(u32::from)
                .collect();
            d.push(1);
            if poly_rem(modulus, &d, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl FieldContext {
    /// Build GF(p^n) from a monic modulus given low-to-high, leading 1
    /// included. The modulus must be irreducible and primitive.
    pub fn new(p: u32, n: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) || p > MAX_PRIME {
            return Err(Error::InvalidField(format!("p = {p} must be a prime <= {MAX_PRIME}")));
        }
        if n == 0 {
            return Err(Error::InvalidField("extension degree must be >= 1".into()));
        }
        let order = (p as u64).checked_pow(n).filter(|&o| o <= MAX_FIELD_ORDER);
        let Some(order) = order else {
            return Err(Error::InvalidField(format!("{p}^{n} exceeds the supported field order")));
        };
        if modulus.len() != n as usize + 1 || modulus[n as usize] != 1 {
            return Err(Error::InvalidField(format!(
                "modulus must be monic of degree {n} ({} coefficients, last = 1)",
                n + 1
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField(format!("modulus coefficients must be < {p}")));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible over GF({p})")));
        }
        let mut ctx = FieldContext {
            id: NEXT_CONTEXT_ID.fetch_add(1, Ordering::Relaxed),
            p,
            n,
            size: order as u32,
            modulus,
            tables: None,
            basis: None,
        };
        let gamma = ctx.gamma();
        if ctx.element_order(gamma)? != order - 1 {
            return Err(Error::InvalidField(format!(
                "modulus {:?} is not primitive: x does not generate GF({p}^{n})*",
                ctx.modulus
            )));
        }
        if ctx.size <= TABLE_LIMIT {
            ctx.tables = Some(ctx.build_tables());
        }
        Ok(ctx)
    }

    /// GF(p^n) with a modulus from the built-in table.
    pub fn builtin(p: u32, n: u32) -> Result<Self> {
        let modulus = builtin_modulus(p, n)
            .ok_or_else(|| Error::InvalidField(format!("no built-in modulus for GF({p}^{n}); supply one")))?;
        Self::new(p, n, modulus)
    }

    /// Switch coordinates (`coordinates`, and therefore packet layouts) to
    /// the basis given by `elements`.
    pub fn with_basis(mut self, elements: &[FieldElement]) -> Result<Self> {
        if elements.len() != self.n as usize {
            return Err(Error::LengthMismatch { expected: self.n as usize, got: elements.len() });
        }
        let rows: Vec<Vector> = elements
            .iter()
            .map(|&e| self.to_vector(e))
            .collect::<Result<_>>()?;
        let p = self.p as u8;
        if gfp::rank(&rows, self.n as usize, p) != self.n as usize {
            return Err(Error::InvalidField("representation basis is not linearly independent".into()));
        }
        let poly_to_basis = (0..self.n as usize)
            .map(|j| {
                let mut unit = vec![0u8; self.n as usize];
                unit[j] = 1;
                gfp::solve(&rows, &unit, p).expect("full-rank basis")
            })
            .collect();
        self.basis = Some(RepresentationBasis {
            elements: elements.iter().map(|e| e.value).collect(),
            poly_to_basis,
        });
        Ok(self)
    }

    fn build_tables(&self) -> Tables {
        let q1 = self.size as usize - 1;
        let mut exp = vec![0u32; q1];
        let mut log = vec![0u32; self.size as usize];
        let mut x = 1u32;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = x;
            log[x as usize] = i as u32;
            x = self.mul_schoolbook(x, self.gamma().value);
        }
        Tables { exp, log }
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Field order p^n.
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn basis_label(&self) -> &'static str {
        if self.basis.is_some() {
            "custom"
        } else {
            "polynomial"
        }
    }

    pub fn has_polynomial_basis(&self) -> bool {
        self.basis.is_none()
    }

    pub fn representation_basis(&self) -> Option<Vec<FieldElement>> {
        self.basis
            .as_ref()
            .map(|b| b.elements.iter().map(|&v| self.wrap(v)).collect())
    }

    fn wrap(&self, value: u32) -> FieldElement {
        FieldElement { ctx: self.id, value }
    }

    fn check(&self, a: FieldElement) -> Result<u32> {
        if a.ctx != self.id {
            return Err(Error::ContextMismatch(self.id, a.ctx));
        }
        Ok(a.value)
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// The residue class of the indeterminate, a primitive element.
    pub fn gamma(&self) -> FieldElement {
        if self.n == 1 {
            // GF(p) with modulus x + c: x == -c.
            return self.wrap((self.p - self.modulus[0]) % self.p);
        }
        self.wrap(self.p)
    }

    /// `gamma^k` for any integer exponent.
    pub fn gamma_pow(&self, k: i64) -> FieldElement {
        let e = k.rem_euclid(self.size as i64 - 1) as u64;
        self.pow(self.gamma(), e).expect("own element")
    }

    /// Embed a prime-field residue.
    pub fn from_base(&self, c: u8) -> FieldElement {
        self.wrap(c as u32 % self.p)
    }

    pub fn from_digits(&self, digits: &[u8]) -> Result<FieldElement> {
        if digits.len() > self.n as usize {
            return Err(Error::LengthMismatch { expected: self.n as usize, got: digits.len() });
        }
        let mut value = 0u32;
        for &d in digits.iter().rev() {
            if d as u32 >= self.p {
                return Err(Error::Parse(format!("digit {d} out of range for GF({})", self.p)));
            }
            value = value * self.p + d as u32;
        }
        Ok(self.wrap(value))
    }

    /// Element with packed value `v` (`0 <= v < p^n`).
    pub fn from_value(&self, v: u32) -> Result<FieldElement> {
        if v >= self.size {
            return Err(Error::Parse(format!("value {v} out of range for field of order {}", self.size)));
        }
        Ok(self.wrap(v))
    }

    /// Every field element, in packed-value order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.size).map(|v| self.wrap(v))
    }

    fn digits_of(&self, mut v: u32) -> Vector {
        let mut out = vec![0u8; self.n as usize];
        for d in out.iter_mut() {
            *d = (v % self.p) as u8;
            v /= self.p;
        }
        out
    }

    fn pack(&self, digits: &[u8]) -> u32 {
        digits.iter().rev().fold(0u32, |acc, &d| acc * self.p + d as u32)
    }

    /// Polynomial-basis coordinates, low-to-high.
    pub fn to_vector(&self, a: FieldElement) -> Result<Vector> {
        Ok(self.digits_of(self.check(a)?))
    }

    /// Coordinates in the representation basis (polynomial unless a custom
    /// basis was installed). Packet layouts use these.
    pub fn coordinates(&self, a: FieldElement) -> Result<Vector> {
        let digits = self.to_vector(a)?;
        match &self.basis {
            None => Ok(digits),
            Some(b) => {
                let p = self.p as u8;
                let coeffs: Vec<u8> = digits.clone();
                Ok(gfp::combine(&coeffs, &b.poly_to_basis, self.n as usize, p))
            }
        }
    }

    /// Inverse of `coordinates`.
    pub fn from_coordinates(&self, coords: &[u8]) -> Result<FieldElement> {
        if coords.len() != self.n as usize {
            return Err(Error::LengthMismatch { expected: self.n as usize, got: coords.len() });
        }
        match &self.basis {
            None => self.from_digits(coords),
            Some(b) => {
                let mut acc = self.zero();
                for (&c, &e) in coords.iter().zip(&b.elements) {
                    acc = self.add(acc, self.mul(self.from_base(c), self.wrap(e))?)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let (x, y) = (self.check(a)?, self.check(b)?);
        if self.p == 2 {
            return Ok(self.wrap(x ^ y));
        }
        let p = self.p as u8;
        let s = gfp::vec_add(&self.digits_of(x), &self.digits_of(y), p);
        Ok(self.wrap(self.pack(&s)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let (x, y) = (self.check(a)?, self.check(b)?);
        if self.p == 2 {
            return Ok(self.wrap(x ^ y));
        }
        let p = self.p as u8;
        let s = gfp::vec_sub(&self.digits_of(x), &self.digits_of(y), p);
        Ok(self.wrap(self.pack(&s)))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement> {
        self.sub(self.zero(), a)
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let (x, y) = (self.check(a)?, self.check(b)?);
        Ok(self.wrap(self.mul_raw(x, y)))
    }

    fn mul_raw(&self, x: u32, y: u32) -> u32 {
        if x == 0 || y == 0 {
            return 0;
        }
        match &self.tables {
            Some(t) => {
                let q1 = t.exp.len();
                t.exp[(t.log[x as usize] as usize + t.log[y as usize] as usize) % q1]
            }
            None => self.mul_schoolbook(x, y),
        }
    }

    /// Polynomial product reduced by the modulus, without tables.
    pub(crate) fn mul_schoolbook(&self, x: u32, y: u32) -> u32 {
        let p = self.p as u64;
        let n = self.n as usize;
        let a = self.digits_of(x);
        let b = self.digits_of(y);
        let mut prod = vec![0u64; 2 * n - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        // x^n == -(m_0 + ... + m_{n-1} x^{n-1})
        for top in (n..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for (k, &mk) in self.modulus[..n].iter().enumerate() {
                let idx = top - n + k;
                prod[idx] = (prod[idx] + p * p - c * mk as u64 % p) % p;
            }
        }
        let digits: Vec<u8> = prod[..n].iter().map(|&d| d as u8).collect();
        self.pack(&digits)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> Result<FieldElement> {
        let x = self.check(a)?;
        if let Some(t) = &self.tables {
            if x == 0 {
                return Ok(self.wrap(if e == 0 { 1 } else { 0 }));
            }
            let q1 = t.exp.len() as u64;
            let l = t.log[x as usize] as u64;
            return Ok(self.wrap(t.exp[((l as u128 * (e % q1) as u128) % q1 as u128) as usize]));
        }
        let mut result = 1u32;
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_raw(result, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        Ok(self.wrap(result))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        let x = self.check(a)?;
        if x == 0 {
            return Err(Error::ZeroElement("inverse"));
        }
        self.pow(a, self.size as u64 - 2)
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        let binv = self.inv(b)?;
        self.mul(a, binv)
    }

    /// Discrete logarithm to base gamma.
    pub fn log(&self, a: FieldElement) -> Result<u32> {
        let x = self.check(a)?;
        if x == 0 {
            return Err(Error::ZeroElement("logarithm"));
        }
        if let Some(t) = &self.tables {
            return Ok(t.log[x as usize]);
        }
        let mut cur = 1u32;
        let g = self.gamma().value;
        for k in 0..self.size - 1 {
            if cur == x {
                return Ok(k);
            }
            cur = self.mul_raw(cur, g);
        }
        unreachable!("gamma is primitive")
    }

    /// Degree `s` with `q = p^s`, provided GF(q) is a subfield.
    fn subfield_degree_of(&self, q: u64) -> Result<u32> {
        let mut s = 0u32;
        let mut acc = 1u64;
        while acc < q {
            acc *= self.p as u64;
            s += 1;
        }
        if acc != q || s == 0 || !self.n.is_multiple_of(s) {
            return Err(Error::InvalidSubfield { p: self.p, degree: s, n: self.n });
        }
        Ok(s)
    }

    /// `a^(q^i)`, with `q` a subfield order `p^s`, `s | n`.
    pub fn frobenius(&self, a: FieldElement, i: u64, q: u64) -> Result<FieldElement> {
        let s = self.subfield_degree_of(q)? as u64;
        let r = (s * (i % self.n as u64)) % self.n as u64;
        self.pow(a, (self.p as u64).pow(r as u32))
    }

    fn check_subfield_degree(&self, degree: u32) -> Result<()> {
        if degree == 0 || !self.n.is_multiple_of(degree) {
            return Err(Error::InvalidSubfield { p: self.p, degree, n: self.n });
        }
        Ok(())
    }

    /// True iff `a` lies in GF(p^degree), i.e. `a^(p^degree) = a`.
    pub fn is_in_subfield(&self, a: FieldElement, degree: u32) -> Result<bool> {
        self.check_subfield_degree(degree)?;
        Ok(self.pow(a, (self.p as u64).pow(degree))? == a)
    }

    /// Power basis `1, b, ..., b^(degree-1)` of GF(p^degree), where `b` is
    /// the primitive element `gamma^((p^n - 1)/(p^degree - 1))`.
    pub fn subfield_basis(&self, degree: u32) -> Result<Vec<FieldElement>> {
        self.check_subfield_degree(degree)?;
        let q1 = self.size as u64 - 1;
        let sub1 = (self.p as u64).pow(degree) - 1;
        let b = self.pow(self.gamma(), q1 / sub1)?;
        (0..degree as u64).map(|j| self.pow(b, j)).collect()
    }

    /// Length-`degree` coordinates of a subfield element against
    /// `subfield_basis(degree)`.
    pub fn subfield_coordinates(&self, a: FieldElement, degree: u32) -> Result<Vector> {
        let basis = self.subfield_basis(degree)?;
        let rows: Vec<Vector> = basis.iter().map(|&b| self.to_vector(b)).collect::<Result<_>>()?;
        let target = self.to_vector(a)?;
        gfp::solve(&rows, &target, self.p as u8).ok_or_else(|| {
            Error::NotRepresentable(format!(
                "{} is not in GF({}^{degree})",
                self.format_element(a),
                self.p
            ))
        })
    }

    /// Multiplicative order of a nonzero element.
    pub fn element_order(&self, a: FieldElement) -> Result<u64> {
        let x = self.check(a)?;
        if x == 0 {
            return Err(Error::ZeroElement("element order"));
        }
        let group = self.size as u64 - 1;
        let mut e = group;
        for r in prime_factors(group) {
            while e.is_multiple_of(r) && self.pow_unchecked_table_free(x, e / r) == 1 {
                e /= r;
            }
        }
        Ok(e)
    }

    // Square-and-multiply that works before tables are built.
    fn pow_unchecked_table_free(&self, x: u32, mut e: u64) -> u32 {
        let mut result = 1u32;
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_schoolbook(result, base);
            }
            base = self.mul_schoolbook(base, base);
            e >>= 1;
        }
        result
    }

    /// Base-p digit string, low-order digit first.
    pub fn format_element(&self, a: FieldElement) -> String {
        gfp::to_digit_string(&self.digits_of(a.value))
    }

    /// Parse `0`, `1`, `g`, `g^k` (also `gamma^k`, `γ^k`, negative `k`
    /// allowed) or a digit string (low-order digit first, zero-padded to n).
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let t = s.trim();
        for prefix in ["gamma", "γ", "g"] {
            if let Some(rest) = t.strip_prefix(prefix) {
                if rest.is_empty() {
                    return Ok(self.gamma());
                }
                if let Some(exp) = rest.strip_prefix('^') {
                    let k: i64 = exp
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
                    return Ok(self.gamma_pow(k));
                }
                return Err(Error::Parse(format!("cannot parse field element {s:?}")));
            }
        }
        if t.is_empty() {
            return Err(Error::Parse("empty field element".into()));
        }
        let digits = gfp::parse_digit_string(t, self.p as u8)?;
        self.from_digits(&digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> FieldContext {
        FieldContext::builtin(2, 3).unwrap()
    }

    fn gf729() -> FieldContext {
        FieldContext::builtin(3, 6).unwrap()
    }

    #[test]
    fn add_identities() {
        let f = gf8();
        let g = f.gamma();
        assert_eq!(f.add(g, f.zero()).unwrap(), g);
        assert_eq!(f.add(g, g).unwrap(), f.zero());

        let h = gf729();
        let a = h.from_digits(&[1, 1, 0, 0, 0, 0]).unwrap();
        let b = h.from_digits(&[2, 2, 0, 0, 0, 0]).unwrap();
        assert_eq!(h.add(a, b).unwrap(), h.zero());
    }

    #[test]
    fn mul_small_cases() {
        let f = gf8();
        let g = f.gamma();
        assert_eq!(f.mul(g, f.one()).unwrap(), g);
        assert_eq!(f.mul(f.gamma_pow(3), f.gamma_pow(4)).unwrap(), f.one());
        let g3 = f.mul(g, f.gamma_pow(2)).unwrap();
        assert_eq!(f.to_vector(g3).unwrap(), vec![1, 1, 0]);
    }

    #[test]
    fn schoolbook_matches_tables() {
        for f in [gf8(), gf729()] {
            for a in f.elements() {
                for b in f.elements().step_by(7) {
                    assert_eq!(f.mul(a, b).unwrap().value(), f.mul_schoolbook(a.value(), b.value()));
                }
            }
        }
    }

    #[test]
    fn inverses() {
        let f = gf8();
        assert_eq!(f.inv(f.one()).unwrap(), f.one());
        assert_eq!(f.inv(f.gamma_pow(3)).unwrap(), f.gamma_pow(4));
        assert_eq!(f.inv(f.zero()), Err(Error::ZeroElement("inverse")));

        let h = gf729();
        for k in 1..728 {
            assert_eq!(h.inv(h.gamma_pow(k)).unwrap(), h.gamma_pow(728 - k));
        }
    }

    #[test]
    fn frobenius_cases() {
        let f = gf8();
        let g = f.gamma();
        assert_eq!(f.frobenius(g, 0, 2).unwrap(), g);
        assert_eq!(f.frobenius(g, 1, 2).unwrap(), f.gamma_pow(2));
        assert_eq!(f.frobenius(f.gamma_pow(3), 1, 2).unwrap(), f.gamma_pow(6));
        assert!(matches!(f.frobenius(g, 1, 4), Err(Error::InvalidSubfield { .. })));
        assert!(matches!(f.frobenius(g, 1, 3), Err(Error::InvalidSubfield { .. })));

        let h = gf729();
        // q = 27 is a subfield order of GF(3^6); its Frobenius has order 2.
        let a = h.gamma_pow(5);
        assert_eq!(h.frobenius(a, 2, 27).unwrap(), a);
        assert_eq!(h.frobenius(a, 1, 27).unwrap(), h.gamma_pow(5 * 27));
    }

    #[test]
    fn subfield_membership() {
        let f = gf8();
        assert!(f.is_in_subfield(f.zero(), 1).unwrap());
        assert!(f.is_in_subfield(f.one(), 1).unwrap());
        assert!(!f.is_in_subfield(f.gamma(), 1).unwrap());
        assert!(f.is_in_subfield(f.gamma(), 3).unwrap());
        assert!(f.is_in_subfield(f.gamma(), 2).is_err());

        // Fixed set of x -> x^27 in GF(3^6), found by enumeration with
        // 27-fold repeated multiplication.
        let h = gf729();
        let fixed: Vec<FieldElement> = h
            .elements()
            .filter(|&x| {
                let mut y = h.one();
                for _ in 0..27 {
                    y = h.mul(y, x).unwrap();
                }
                y == x
            })
            .collect();
        assert_eq!(fixed.len(), 27);
        assert!(fixed.contains(&h.gamma_pow(28)));
        assert!(fixed.contains(&h.gamma_pow(504)));
        assert!(!fixed.contains(&h.gamma_pow(294)));
        for x in h.elements() {
            assert_eq!(h.is_in_subfield(x, 3).unwrap(), fixed.contains(&x));
        }
    }

    #[test]
    fn subfield_coordinates_roundtrip() {
        let h = gf729();
        let basis = h.subfield_basis(3).unwrap();
        for x in h.elements() {
            match h.subfield_coordinates(x, 3) {
                Ok(c) => {
                    let mut acc = h.zero();
                    for (&ci, &b) in c.iter().zip(&basis) {
                        acc = h.add(acc, h.mul(h.from_base(ci), b).unwrap()).unwrap();
                    }
                    assert_eq!(acc, x);
                }
                Err(Error::NotRepresentable(_)) => assert!(!h.is_in_subfield(x, 3).unwrap()),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn to_vector_cases() {
        let f = gf8();
        assert_eq!(f.to_vector(f.zero()).unwrap(), vec![0, 0, 0]);
        assert_eq!(f.to_vector(f.gamma_pow(5)).unwrap(), vec![1, 1, 1]);
        assert_eq!(f.to_vector(f.gamma_pow(3)).unwrap(), vec![1, 1, 0]);
    }

    #[test]
    fn element_orders() {
        let f = gf8();
        assert_eq!(f.element_order(f.one()).unwrap(), 1);
        assert_eq!(f.element_order(f.gamma()).unwrap(), 7);
        let h = gf729();
        assert_eq!(h.element_order(h.gamma()).unwrap(), 728);
        assert!(f.element_order(f.zero()).is_err());
    }

    #[test]
    fn rejects_bad_moduli() {
        // x^3 + x^2 + x + 1 = (x + 1)^3 over GF(2)
        assert!(FieldContext::new(2, 3, vec![1, 1, 1, 1]).is_err());
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
        assert!(FieldContext::new(2, 4, vec![1, 1, 1, 1, 1]).is_err());
        assert!(FieldContext::new(4, 2, vec![1, 1, 1]).is_err());
        assert!(FieldContext::new(2, 31, [vec![1, 0, 0, 1], vec![0; 27], vec![1]].concat()).is_err());
        assert!(FieldContext::new(2, 4, vec![1, 1, 0, 0, 1]).is_ok());
        assert!(FieldContext::new(5, 4, vec![2, 3, 1, 0, 1]).is_ok());
    }

    #[test]
    fn contexts_do_not_mix() {
        let a = gf8();
        let b = gf8();
        assert!(matches!(a.add(a.one(), b.one()), Err(Error::ContextMismatch(..))));
        assert!(matches!(a.mul(b.gamma(), a.one()), Err(Error::ContextMismatch(..))));
    }

    #[test]
    fn parse_and_format() {
        let f = gf8();
        assert_eq!(f.parse_element("g^3").unwrap(), f.gamma_pow(3));
        assert_eq!(f.parse_element("γ^-1").unwrap(), f.gamma_pow(6));
        assert_eq!(f.parse_element("110").unwrap(), f.gamma_pow(3));
        assert_eq!(f.parse_element("1").unwrap(), f.one());
        assert_eq!(f.format_element(f.gamma_pow(5)), "111");
        assert!(f.parse_element("1101").is_err());
        assert!(f.parse_element("g^x").is_err());
    }

    #[test]
    fn custom_basis_coordinates() {
        let f = gf8();
        // Normal basis generated by gamma^3: {g^3, g^6, g^12 = g^5}
        let nb = [f.gamma_pow(3), f.gamma_pow(6), f.gamma_pow(5)];
        let f = f.with_basis(&nb).unwrap();
        assert_eq!(f.basis_label(), "custom");
        assert_eq!(f.coordinates(f.gamma_pow(3)).unwrap(), vec![1, 0, 0]);
        assert_eq!(f.coordinates(f.gamma_pow(5)).unwrap(), vec![0, 0, 1]);
        // 1 = sum of the normal basis
        assert_eq!(f.coordinates(f.one()).unwrap(), vec![1, 1, 1]);
        let g = FieldContext::builtin(2, 3).unwrap();
        let dep = [g.one(), g.one(), g.gamma()];
        assert!(g.with_basis(&dep).is_err());
    }
}
