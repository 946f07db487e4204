//! Gabidulin, KK and MV encoders and the base-field matrices of their
//! component codes.
//!
//! All codes here live over an extension of the prime field GF(q), q = p.
//! A Gabidulin or KK code over GF(q^m) uses a context of degree m; an MV
//! code over GF(q^(ml)) uses a context of degree ml.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{FieldContext, FieldElement};
use crate::gfp::{self, Vector};
use crate::linpoly::LinearizedPoly;
use crate::metrics::Subspace;

pub const DEFAULT_CODEBOOK_BUDGET: u128 = 1 << 20;

fn check_ctx(ctx: &FieldContext, elems: &[FieldElement]) -> Result<()> {
    for e in elems {
        if e.context_id() != ctx.id() {
            return Err(Error::ContextMismatch(ctx.id(), e.context_id()));
        }
    }
    Ok(())
}

fn independent_over_base(ctx: &FieldContext, elems: &[FieldElement]) -> Result<bool> {
    let rows: Vec<Vector> = elems.iter().map(|&e| ctx.to_vector(e)).collect::<Result<_>>()?;
    Ok(gfp::rank(&rows, ctx.n() as usize, ctx.p() as u8) == elems.len())
}

#[derive(Debug, Clone)]
pub struct GabidulinSpec {
    ctx: Arc<FieldContext>,
    n: usize,
    k: usize,
    generators: Vec<FieldElement>,
}

impl GabidulinSpec {
    pub fn new(ctx: Arc<FieldContext>, k: usize, generators: Vec<FieldElement>) -> Result<Self> {
        let n = generators.len();
        let m = ctx.n() as usize;
        check_ctx(&ctx, &generators)?;
        if n == 0 || n > m {
            return Err(Error::InvalidSpec(format!("Gabidulin length n = {n} must satisfy 1 <= n <= m = {m}")));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidSpec(format!("Gabidulin dimension k = {k} must satisfy 1 <= k <= n = {n}")));
        }
        if !independent_over_base(&ctx, &generators)? {
            return Err(Error::InvalidSpec("Gabidulin generators are linearly dependent over GF(q)".into()));
        }
        Ok(GabidulinSpec { ctx, n, k, generators })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[FieldElement] {
        &self.generators
    }
}

#[derive(Debug, Clone)]
pub struct KkSpec {
    ctx: Arc<FieldContext>,
    k: usize,
    alphas: Vec<FieldElement>,
}

impl KkSpec {
    pub fn new(ctx: Arc<FieldContext>, k: usize, alphas: Vec<FieldElement>) -> Result<Self> {
        let l = alphas.len();
        let m = ctx.n() as usize;
        check_ctx(&ctx, &alphas)?;
        if l == 0 || l > m {
            return Err(Error::InvalidSpec(format!("KK dimension l = {l} must satisfy 1 <= l <= m = {m}")));
        }
        if k == 0 || k > l {
            return Err(Error::InvalidSpec(format!("KK message length k = {k} must satisfy 1 <= k <= l = {l}")));
        }
        if !independent_over_base(&ctx, &alphas)? {
            return Err(Error::InvalidSpec("KK alphas are linearly dependent over GF(q)".into()));
        }
        Ok(KkSpec { ctx, k, alphas })
    }

    pub fn l(&self) -> usize {
        self.alphas.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphas(&self) -> &[FieldElement] {
        &self.alphas
    }
}

/// How blocks 1..L of an MV packet are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MvLayout {
    /// Every block has the full width ml.
    #[default]
    Uncompressed,
    /// Blocks 1..L are GF(q^m) coordinates of width m.
    Compressed,
}

#[derive(Debug, Clone)]
pub struct MvSpec {
    ctx: Arc<FieldContext>,
    m: usize,
    list_size: usize,
    k: usize,
    alphas: Vec<FieldElement>,
    layout: MvLayout,
}

impl MvSpec {
    /// Validates the parameters and, for every message, that
    /// `u^(⊗j)(alpha_i) / alpha_i` lies in GF(q^m) for rows `i >= 1`.
    pub fn new(
        ctx: Arc<FieldContext>,
        m: usize,
        list_size: usize,
        k: usize,
        alphas: Vec<FieldElement>,
        layout: MvLayout,
    ) -> Result<Self> {
        let l = alphas.len();
        let q = ctx.p() as usize;
        check_ctx(&ctx, &alphas)?;
        if l == 0 || m == 0 || m * l != ctx.n() as usize {
            return Err(Error::InvalidSpec(format!(
                "MV field degree {} must equal m * l = {m} * {l}",
                ctx.n()
            )));
        }
        if !(q - 1).is_multiple_of(l) {
            return Err(Error::InvalidSpec(format!("MV dimension l = {l} must divide q - 1 = {}", q - 1)));
        }
        if k == 0 || list_size == 0 {
            return Err(Error::InvalidSpec("MV needs k >= 1 and L >= 1".into()));
        }
        if !independent_over_base(&ctx, &alphas)? {
            return Err(Error::InvalidSpec("MV alphas are linearly dependent over GF(q)".into()));
        }
        let spec = MvSpec { ctx, m, list_size, k, alphas, layout };
        let count = spec.message_count();
        if count > DEFAULT_CODEBOOK_BUDGET {
            return Err(Error::BudgetExceeded { needed: count, budget: DEFAULT_CODEBOOK_BUDGET });
        }
        (0..count)
            .into_par_iter()
            .try_for_each(|t| spec.row_entries(&spec.message_at(t)).map(|_| ()))?;
        Ok(spec)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.alphas.len()
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphas(&self) -> &[FieldElement] {
        &self.alphas
    }

    pub fn layout(&self) -> MvLayout {
        self.layout
    }

    pub fn with_layout(mut self, layout: MvLayout) -> Self {
        self.layout = layout;
        self
    }

    fn message_count(&self) -> u128 {
        (self.ctx.p() as u128).pow(self.k as u32)
    }

    fn message_at(&self, t: u128) -> Vec<FieldElement> {
        gfp::index_to_digits(t, self.k, self.ctx.p() as u8)
            .into_iter()
            .map(|d| self.ctx.from_base(d))
            .collect()
    }

    /// Row 0: `(alpha_0, u(alpha_0), ..., u^(⊗L)(alpha_0))`;
    /// rows i >= 1: `(alpha_i, u(alpha_i)/alpha_i, ..., u^(⊗L)(alpha_i)/alpha_i)`.
    fn row_entries(&self, u: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
        let ctx = &self.ctx;
        let poly = LinearizedPoly::new(ctx, u.to_vec(), ctx.p() as u64)?;
        let mut rows = Vec::with_capacity(self.l());
        for (i, &alpha) in self.alphas.iter().enumerate() {
            let mut row = vec![alpha];
            let mut cur = alpha;
            for j in 1..=self.list_size {
                cur = poly.evaluate(ctx, cur)?;
                if i == 0 {
                    row.push(cur);
                } else {
                    let ratio = ctx.div(cur, alpha)?;
                    if !ctx.is_in_subfield(ratio, self.m as u32)? {
                        return Err(Error::InvalidSpec(format!(
                            "u^(⊗{j})(alpha_{i}) / alpha_{i} = {} is not in GF(q^{}) for message {:?}",
                            ctx.format_element(ratio),
                            self.m,
                            u.iter().map(|e| ctx.format_element(*e)).collect::<Vec<_>>()
                        )));
                    }
                    row.push(ratio);
                }
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

/// Width of one block of a packed packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// Coordinates in the field's representation basis, width n.
    Full,
    /// Coordinates against the power basis of the subfield GF(p^d), width d.
    Subfield(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackLayout {
    pub blocks: Vec<Block>,
}

impl PackLayout {
    pub fn kk() -> Self {
        PackLayout { blocks: vec![Block::Full, Block::Full] }
    }

    pub fn mv(list_size: usize, m: usize, layout: MvLayout) -> Self {
        let tail = match layout {
            MvLayout::Uncompressed => Block::Full,
            MvLayout::Compressed => Block::Subfield(m as u32),
        };
        let mut blocks = vec![Block::Full];
        blocks.extend(std::iter::repeat_n(tail, list_size));
        PackLayout { blocks }
    }

    pub fn len(&self, ctx: &FieldContext) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Full => ctx.n() as usize,
                Block::Subfield(d) => *d as usize,
            })
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Concatenate the per-block coordinate vectors of `entries`.
pub fn pack_vector(ctx: &FieldContext, entries: &[FieldElement], layout: &PackLayout) -> Result<Vector> {
    if entries.len() != layout.blocks.len() {
        return Err(Error::LengthMismatch { expected: layout.blocks.len(), got: entries.len() });
    }
    let mut out = Vec::with_capacity(layout.len(ctx));
    for (&e, block) in entries.iter().zip(&layout.blocks) {
        match block {
            Block::Full => out.extend(ctx.coordinates(e)?),
            Block::Subfield(d) => out.extend(ctx.subfield_coordinates(e, *d)?),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Gabidulin,
    Kk,
    Mv,
}

#[derive(Debug, Clone)]
pub enum CodeSpec {
    Gabidulin(GabidulinSpec),
    Kk(KkSpec),
    Mv(MvSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodewordBody {
    /// A Gabidulin codeword `(u(g_0), ..., u(g_{n-1}))`.
    Vector(Vec<FieldElement>),
    /// Basis rows (block entries) of a KK/MV subspace and its reduced form.
    Subspace { rows: Vec<Vec<FieldElement>>, subspace: Subspace },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub message: Vec<FieldElement>,
    pub body: CodewordBody,
    matrix: Vec<Vector>,
}

impl Codeword {
    /// Generator matrix of the component code over GF(q): the coordinate
    /// rows of the symbols (Gabidulin) or the packed basis rows (KK/MV).
    pub fn component_matrix(&self) -> &[Vector] {
        &self.matrix
    }

    pub fn symbols(&self) -> Option<&[FieldElement]> {
        match &self.body {
            CodewordBody::Vector(s) => Some(s),
            CodewordBody::Subspace { .. } => None,
        }
    }

    pub fn subspace(&self) -> Option<&Subspace> {
        match &self.body {
            CodewordBody::Vector(_) => None,
            CodewordBody::Subspace { subspace, .. } => Some(subspace),
        }
    }
}

fn check_message(ctx: &FieldContext, u: &[FieldElement], k: usize) -> Result<()> {
    if u.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: u.len() });
    }
    check_ctx(ctx, u)
}

pub fn gabidulin_encode(spec: &GabidulinSpec, u: &[FieldElement]) -> Result<Codeword> {
    let ctx = &spec.ctx;
    check_message(ctx, u, spec.k)?;
    let poly = LinearizedPoly::new(ctx, u.to_vec(), ctx.p() as u64)?;
    let symbols: Vec<FieldElement> = spec
        .generators
        .iter()
        .map(|&g| poly.evaluate(ctx, g))
        .collect::<Result<_>>()?;
    let matrix = symbols.iter().map(|&s| ctx.coordinates(s)).collect::<Result<_>>()?;
    Ok(Codeword { message: u.to_vec(), body: CodewordBody::Vector(symbols), matrix })
}

fn subspace_codeword(
    ctx: &FieldContext,
    u: &[FieldElement],
    rows: Vec<Vec<FieldElement>>,
    layout: &PackLayout,
) -> Result<Codeword> {
    let matrix: Vec<Vector> = rows.iter().map(|r| pack_vector(ctx, r, layout)).collect::<Result<_>>()?;
    let subspace = Subspace::from_rows(&matrix, layout.len(ctx), ctx.p() as u8)?;
    if subspace.dim() != rows.len() {
        return Err(Error::InvalidSpec(format!(
            "codeword basis has rank {} instead of {}",
            subspace.dim(),
            rows.len()
        )));
    }
    Ok(Codeword { message: u.to_vec(), body: CodewordBody::Subspace { rows, subspace }, matrix })
}

/// Subspace spanned by `(alpha_i, u(alpha_i))`, packed as length-2m vectors.
pub fn kk_encode(spec: &KkSpec, u: &[FieldElement]) -> Result<Codeword> {
    let ctx = &spec.ctx;
    check_message(ctx, u, spec.k)?;
    let poly = LinearizedPoly::new(ctx, u.to_vec(), ctx.p() as u64)?;
    let rows = spec
        .alphas
        .iter()
        .map(|&a| Ok(vec![a, poly.evaluate(ctx, a)?]))
        .collect::<Result<_>>()?;
    subspace_codeword(ctx, u, rows, &PackLayout::kk())
}

/// MV codeword for a message over GF(q).
pub fn mv_encode(spec: &MvSpec, u: &[FieldElement]) -> Result<Codeword> {
    let ctx = &spec.ctx;
    check_message(ctx, u, spec.k)?;
    for &e in u {
        if !ctx.is_in_subfield(e, 1)? {
            return Err(Error::InvalidSpec(format!(
                "MV message entry {} is not in GF(q)",
                ctx.format_element(e)
            )));
        }
    }
    let rows = spec.row_entries(u)?;
    subspace_codeword(ctx, u, rows, &PackLayout::mv(spec.list_size, spec.m, spec.layout))
}

/// Rows of an `(width, l)` Reed–Solomon generator over GF(p), evaluation
/// points `0, 1, ..., width-1`, read back as field elements through their
/// polynomial-basis coordinates. `width` is the field degree, so this needs
/// `p >= n`.
pub fn reed_solomon_alphas(ctx: &FieldContext, l: usize) -> Result<Vec<FieldElement>> {
    let width = ctx.n() as usize;
    let p = ctx.p() as usize;
    if p < width {
        return Err(Error::InvalidSpec(format!(
            "Reed-Solomon construction needs q >= {width} distinct points, q = {p}"
        )));
    }
    if l == 0 || l > width {
        return Err(Error::InvalidSpec(format!("Reed-Solomon dimension {l} out of range 1..={width}")));
    }
    (0..l)
        .map(|i| {
            let row: Vec<u8> = (0..width)
                .map(|x| {
                    let mut v = 1usize;
                    for _ in 0..i {
                        v = v * x % p;
                    }
                    v as u8
                })
                .collect();
            ctx.from_digits(&row)
        })
        .collect()
}

impl CodeSpec {
    pub fn ctx(&self) -> &Arc<FieldContext> {
        match self {
            CodeSpec::Gabidulin(s) => &s.ctx,
            CodeSpec::Kk(s) => &s.ctx,
            CodeSpec::Mv(s) => &s.ctx,
        }
    }

    pub fn kind(&self) -> CodeKind {
        match self {
            CodeSpec::Gabidulin(_) => CodeKind::Gabidulin,
            CodeSpec::Kk(_) => CodeKind::Kk,
            CodeSpec::Mv(_) => CodeKind::Mv,
        }
    }

    pub fn q(&self) -> u8 {
        self.ctx().p() as u8
    }

    /// Degree of the field the code's symbols are counted in: m for
    /// Gabidulin/KK over GF(q^m), m for MV over GF(q^(ml)).
    pub fn m(&self) -> usize {
        match self {
            CodeSpec::Mv(s) => s.m,
            _ => self.ctx().n() as usize,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            CodeSpec::Gabidulin(s) => s.k,
            CodeSpec::Kk(s) => s.k,
            CodeSpec::Mv(s) => s.k,
        }
    }

    /// Packet length over GF(q).
    pub fn ambient_len(&self) -> usize {
        let n = self.ctx().n() as usize;
        match self {
            CodeSpec::Gabidulin(_) => n,
            CodeSpec::Kk(_) => 2 * n,
            CodeSpec::Mv(s) => PackLayout::mv(s.list_size, s.m, s.layout).len(&s.ctx),
        }
    }

    pub fn is_subspace_code(&self) -> bool {
        !matches!(self, CodeSpec::Gabidulin(_))
    }

    /// Number of base-field digits in a message.
    fn message_digits(&self) -> usize {
        match self {
            CodeSpec::Mv(s) => s.k,
            _ => self.k() * self.ctx().n() as usize,
        }
    }

    pub fn message_count(&self) -> u128 {
        (self.q() as u128)
            .checked_pow(self.message_digits() as u32)
            .unwrap_or(u128::MAX)
    }

    /// Message number `t` in lexicographic order over base-field digits,
    /// lowest digit fastest.
    pub fn message_at(&self, t: u128) -> Vec<FieldElement> {
        let ctx = self.ctx();
        match self {
            CodeSpec::Mv(s) => s.message_at(t),
            _ => {
                let n = ctx.n() as usize;
                let digits = gfp::index_to_digits(t, self.message_digits(), self.q());
                digits
                    .chunks(n)
                    .map(|c| ctx.from_digits(c).expect("digits in range"))
                    .collect()
            }
        }
    }

    pub fn encode(&self, u: &[FieldElement]) -> Result<Codeword> {
        match self {
            CodeSpec::Gabidulin(s) => gabidulin_encode(s, u),
            CodeSpec::Kk(s) => kk_encode(s, u),
            CodeSpec::Mv(s) => mv_encode(s, u),
        }
    }

    /// Encode every message, in message order.
    pub fn build_codebook(&self, budget: u128) -> Result<Codebook> {
        let count = self.message_count();
        if count > budget {
            return Err(Error::BudgetExceeded { needed: count, budget });
        }
        let codewords: Vec<Codeword> = (0..count)
            .into_par_iter()
            .map(|t| self.encode(&self.message_at(t)))
            .collect::<Result<_>>()?;
        if self.is_subspace_code() {
            let mut seen = HashSet::with_capacity(codewords.len());
            for (i, c) in codewords.iter().enumerate() {
                if !seen.insert(c.subspace().expect("subspace code")) {
                    return Err(Error::InvalidSpec(format!("message {i} repeats an earlier codeword subspace")));
                }
            }
        }
        Ok(Codebook { ambient_len: self.ambient_len(), p: self.q(), kind: self.kind(), codewords })
    }
}

#[derive(Debug, Clone)]
pub struct Codebook {
    pub ambient_len: usize,
    pub p: u8,
    pub kind: CodeKind,
    pub codewords: Vec<Codeword>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Index of the codeword whose message equals `u`.
    pub fn index_of_message(&self, u: &[FieldElement]) -> Option<usize> {
        self.codewords.iter().position(|c| c.message == u)
    }

    /// CSV export: one row per basis packet.
    pub fn to_csv(&self, ctx: &FieldContext) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "message", "row", "packet"])
            .map_err(|e| Error::Parse(e.to_string()))?;
        for (i, c) in self.codewords.iter().enumerate() {
            let msg: Vec<String> = c.message.iter().map(|&e| ctx.format_element(e)).collect();
            for (r, row) in c.component_matrix().iter().enumerate() {
                w.write_record([i.to_string(), msg.join(" "), r.to_string(), gfp::to_digit_string(row)])
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii csv"))
    }
}
