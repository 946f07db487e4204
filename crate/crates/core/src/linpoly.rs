//! Linearized polynomials `u(x) = sum u_i x^(q^i)`.

use crate::error::{Error, Result};
use crate::gf::{FieldContext, FieldElement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedPoly {
    coeffs: Vec<FieldElement>,
    q: u64,
}

impl LinearizedPoly {
    pub fn new(ctx: &FieldContext, coeffs: Vec<FieldElement>, q: u64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec("linearized polynomial needs k >= 1 coefficients".into()));
        }
        for c in &coeffs {
            if c.context_id() != ctx.id() {
                return Err(Error::ContextMismatch(ctx.id(), c.context_id()));
            }
        }
        // Rejects q that is not a subfield order.
        ctx.frobenius(ctx.one(), 1, q)?;
        Ok(LinearizedPoly { coeffs, q })
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `sum_i u_i * x^(q^i)`
    pub fn evaluate(&self, ctx: &FieldContext, x: FieldElement) -> Result<FieldElement> {
        let mut acc = ctx.zero();
        // x^(q^i) by repeated Frobenius
        let mut power = x;
        for (i, &u) in self.coeffs.iter().enumerate() {
            if i > 0 {
                power = ctx.frobenius(power, 1, self.q)?;
            }
            if !u.is_zero() {
                acc = ctx.add(acc, ctx.mul(u, power)?)?;
            }
        }
        Ok(acc)
    }

    /// `u^(⊗j)(x)`: `j` successive evaluations; `j = 0` returns `x`.
    pub fn iterate_evaluate(&self, ctx: &FieldContext, x: FieldElement, j: usize) -> Result<FieldElement> {
        let mut y = x;
        for _ in 0..j {
            y = self.evaluate(ctx, y)?;
        }
        Ok(y)
    }
}
