//! Tier-1 (packet, Hamming metric against the union code) and tier-2
//! (codeword, subspace or rank metric) decoding, and the combined pipeline
//! with erasure passing and list feedback.
//!
//! Tier-2 decoders are exhaustive nearest-codeword searches. Ties always
//! resolve to the lowest codeword index.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeKind, Codebook};
use crate::error::{Error, Result};
use crate::gf::{FieldContext, FieldElement};
use crate::gfp::{self, Vector};
use crate::metrics::{self, Subspace, SubspaceMetric};
use crate::union::UnionCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Tier1Mode {
    /// Accept members, reject everything else.
    Detect,
    /// Correct to the unique nearest member within the radius; reject ties
    /// and far packets.
    #[default]
    Correct,
    /// As `Correct`, but ties and far packets become erasures.
    CorrectOrErase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Valid,
    Corrected,
    Erased,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PacketVerdict {
    pub outcome: Outcome,
    #[serde(serialize_with = "ser_opt_vector")]
    pub vector: Option<Vector>,
    pub flips: usize,
    pub candidates: usize,
}

fn ser_opt_vector<S: serde::Serializer>(v: &Option<Vector>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&gfp::to_digit_string(v)),
        None => s.serialize_none(),
    }
}

impl PacketVerdict {
    fn new(outcome: Outcome, vector: Option<Vector>, flips: usize, candidates: usize) -> Self {
        PacketVerdict { outcome, vector, flips, candidates }
    }

    /// Packet that survives into the tier-2 span, if any.
    pub fn surviving(&self) -> Option<&Vector> {
        match self.outcome {
            Outcome::Valid | Outcome::Corrected => self.vector.as_ref(),
            Outcome::Erased | Outcome::Rejected => None,
        }
    }
}

/// Tier-1 decoding with the radius limited to `floor((d_H - 1) / 2)` in the
/// correcting modes.
pub fn tier1_decode(packet: &[u8], union: &UnionCode, radius: usize, mode: Tier1Mode) -> Result<PacketVerdict> {
    tier1_decode_with(packet, union, radius, mode, false)
}

/// Tier-1 decoding; `allow_unsafe_radius` lifts the unique-decoding limit
/// on the radius for experiments.
pub fn tier1_decode_with(
    packet: &[u8],
    union: &UnionCode,
    radius: usize,
    mode: Tier1Mode,
    allow_unsafe_radius: bool,
) -> Result<PacketVerdict> {
    if packet.len() != union.ambient_len() {
        return Err(Error::LengthMismatch { expected: union.ambient_len(), got: packet.len() });
    }
    if mode != Tier1Mode::Detect && !allow_unsafe_radius && radius > union.correction_radius() {
        return Err(Error::InvalidSpec(format!(
            "tier-1 radius {radius} exceeds the unique-decoding radius {}",
            union.correction_radius()
        )));
    }
    if union.contains(packet) {
        return Ok(PacketVerdict::new(Outcome::Valid, Some(packet.to_vec()), 0, 1));
    }
    let fail = match mode {
        Tier1Mode::Detect => return Ok(PacketVerdict::new(Outcome::Rejected, None, 0, 0)),
        Tier1Mode::Correct => Outcome::Rejected,
        Tier1Mode::CorrectOrErase => Outcome::Erased,
    };
    let mut best = radius + 1;
    let mut nearest: Option<&Vector> = None;
    let mut count = 0usize;
    for v in union.vectors() {
        let mut d = 0;
        for (a, b) in v.iter().zip(packet) {
            if a != b {
                d += 1;
                if d > best {
                    break;
                }
            }
        }
        if d < best {
            best = d;
            nearest = Some(v);
            count = 1;
        } else if d == best {
            count += 1;
        }
    }
    match nearest {
        Some(v) if count == 1 => Ok(PacketVerdict::new(Outcome::Corrected, Some(v.clone()), best, 1)),
        Some(_) => Ok(PacketVerdict::new(fail, None, 0, count)),
        None => Ok(PacketVerdict::new(fail, None, 0, 0)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    /// Index of the decoded codeword; `None` marks a decoding failure.
    pub chosen: Option<usize>,
    pub metric_value: Option<usize>,
    pub tie: bool,
    /// Every codeword at the minimal distance, ascending (only when `tie`).
    pub tied: Vec<usize>,
    /// List-decoding output, ascending by distance then index.
    pub list: Option<Vec<usize>>,
}

impl DecodeResult {
    pub fn failure() -> Self {
        DecodeResult { chosen: None, metric_value: None, tie: false, tied: Vec::new(), list: None }
    }

    fn from_distances(dists: &[usize]) -> Self {
        let Some(&best) = dists.iter().min() else {
            return Self::failure();
        };
        let tied: Vec<usize> = dists.iter().enumerate().filter(|(_, &d)| d == best).map(|(i, _)| i).collect();
        let tie = tied.len() > 1;
        DecodeResult {
            chosen: Some(tied[0]),
            metric_value: Some(best),
            tie,
            tied: if tie { tied } else { Vec::new() },
            list: None,
        }
    }
}

fn subspace_distances(received: &Subspace, codebook: &Codebook, metric: SubspaceMetric) -> Result<Vec<usize>> {
    if codebook.kind == CodeKind::Gabidulin {
        return Err(Error::InvalidSpec("subspace decoding needs a KK or MV codebook".into()));
    }
    codebook
        .codewords
        .par_iter()
        .map(|c| metric.distance(received, c.subspace().expect("subspace codebook")))
        .collect()
}

fn received_subspace(packets: &[Vector], codebook: &Codebook) -> Result<Subspace> {
    Subspace::from_rows(packets, codebook.ambient_len, codebook.p)
}

/// Nearest codeword to the row space of `packets`.
pub fn tier2_subspace_decode(packets: &[Vector], codebook: &Codebook, metric: SubspaceMetric) -> Result<DecodeResult> {
    if packets.is_empty() {
        return Err(Error::EmptyInput("no packets for tier-2 decoding"));
    }
    let received = received_subspace(packets, codebook)?;
    Ok(DecodeResult::from_distances(&subspace_distances(&received, codebook, metric)?))
}

/// Nearest Gabidulin codeword in rank distance.
pub fn tier2_rank_decode(ctx: &FieldContext, word: &[FieldElement], codebook: &Codebook) -> Result<DecodeResult> {
    if codebook.kind != CodeKind::Gabidulin {
        return Err(Error::InvalidSpec("rank decoding needs a Gabidulin codebook".into()));
    }
    let n = codebook.codewords.first().and_then(|c| c.symbols()).map(|s| s.len()).unwrap_or(0);
    if word.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: word.len() });
    }
    let dists: Vec<usize> = codebook
        .codewords
        .par_iter()
        .map(|c| metrics::rank_distance(ctx, word, c.symbols().expect("gabidulin codeword")))
        .collect::<Result<_>>()?;
    Ok(DecodeResult::from_distances(&dists))
}

/// All codewords within `radius` of the received row space. An empty packet
/// set is the zero subspace.
pub fn tier2_list_decode(
    packets: &[Vector],
    codebook: &Codebook,
    radius: usize,
    metric: SubspaceMetric,
) -> Result<DecodeResult> {
    let received = if packets.is_empty() {
        Subspace::zero(codebook.ambient_len, codebook.p)
    } else {
        received_subspace(packets, codebook)?
    };
    let dists = subspace_distances(&received, codebook, metric)?;
    let mut list: Vec<(usize, usize)> = dists
        .iter()
        .enumerate()
        .filter(|(_, &d)| d <= radius)
        .map(|(i, &d)| (d, i))
        .collect();
    list.sort_unstable();
    let mut result = DecodeResult::from_distances(&dists);
    result.list = Some(list.into_iter().map(|(_, i)| i).collect());
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tier1Settings {
    pub mode: Tier1Mode,
    /// `None` uses the union's unique-decoding radius.
    pub radius: Option<usize>,
    pub allow_unsafe_radius: bool,
}

impl Default for Tier1Settings {
    fn default() -> Self {
        Tier1Settings { mode: Tier1Mode::Correct, radius: None, allow_unsafe_radius: false }
    }
}

impl Tier1Settings {
    pub fn radius_for(&self, union: &UnionCode) -> usize {
        self.radius.unwrap_or_else(|| union.correction_radius())
    }

    pub fn apply(&self, packets: &[Vector], union: &UnionCode) -> Result<Vec<PacketVerdict>> {
        let radius = self.radius_for(union);
        packets
            .iter()
            .map(|p| tier1_decode_with(p, union, radius, self.mode, self.allow_unsafe_radius))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTierConfig {
    /// `None` disables tier 1: packets go to tier 2 untouched.
    pub tier1: Option<Tier1Settings>,
    pub metric: SubspaceMetric,
    /// List radius for the feedback round; `None` disables feedback.
    pub feedback_list_radius: Option<usize>,
}

impl Default for TwoTierConfig {
    fn default() -> Self {
        TwoTierConfig { tier1: Some(Tier1Settings::default()), metric: SubspaceMetric::Injection, feedback_list_radius: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub valid: usize,
    pub corrected: usize,
    pub erased: usize,
    pub rejected: usize,
    pub flips: usize,
}

impl VerdictCounts {
    pub fn tally(verdicts: &[PacketVerdict]) -> Self {
        let mut c = VerdictCounts::default();
        for v in verdicts {
            c.add(v);
        }
        c
    }

    pub fn add(&mut self, v: &PacketVerdict) {
        match v.outcome {
            Outcome::Valid => self.valid += 1,
            Outcome::Corrected => self.corrected += 1,
            Outcome::Erased => self.erased += 1,
            Outcome::Rejected => self.rejected += 1,
        }
        self.flips += v.flips;
    }

    pub fn merge(&mut self, other: &VerdictCounts) {
        self.valid += other.valid;
        self.corrected += other.corrected;
        self.erased += other.erased;
        self.rejected += other.rejected;
        self.flips += other.flips;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeedbackRound {
    pub list: Vec<usize>,
    pub restricted_min_distance: Option<usize>,
    pub restricted_radius: usize,
    pub verdicts: Vec<PacketVerdict>,
    pub counts: VerdictCounts,
    pub first_pass: DecodeResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoTierOutcome {
    pub result: DecodeResult,
    pub verdicts: Vec<PacketVerdict>,
    pub counts: VerdictCounts,
    pub tier1_radius: Option<usize>,
    pub surviving_packets: usize,
    pub feedback: Option<FeedbackRound>,
}

fn survivors(verdicts: &[PacketVerdict]) -> Vec<Vector> {
    verdicts.iter().filter_map(|v| v.surviving().cloned()).collect()
}

/// Tier 1 on each packet, then tier 2 on the surviving span. Rejected and
/// erased packets are left out of the span. With feedback, the tier-2 list
/// restricts the union, tier 1 re-decodes the original packets against it,
/// and tier 2 runs again.
pub fn two_tier_decode(
    packets: &[Vector],
    union: &UnionCode,
    codebook: &Codebook,
    config: &TwoTierConfig,
) -> Result<TwoTierOutcome> {
    for p in packets {
        if p.len() != codebook.ambient_len {
            return Err(Error::LengthMismatch { expected: codebook.ambient_len, got: p.len() });
        }
    }
    let Some(t1) = config.tier1 else {
        let result = if packets.is_empty() {
            DecodeResult::failure()
        } else {
            tier2_subspace_decode(packets, codebook, config.metric)?
        };
        return Ok(TwoTierOutcome {
            result,
            verdicts: Vec::new(),
            counts: VerdictCounts::default(),
            tier1_radius: None,
            surviving_packets: packets.len(),
            feedback: None,
        });
    };

    let verdicts = t1.apply(packets, union)?;
    let counts = VerdictCounts::tally(&verdicts);
    let kept = survivors(&verdicts);
    let mut outcome = TwoTierOutcome {
        result: DecodeResult::failure(),
        verdicts,
        counts,
        tier1_radius: Some(t1.radius_for(union)),
        surviving_packets: kept.len(),
        feedback: None,
    };
    if kept.is_empty() {
        return Ok(outcome);
    }

    let Some(list_radius) = config.feedback_list_radius else {
        outcome.result = tier2_subspace_decode(&kept, codebook, config.metric)?;
        return Ok(outcome);
    };

    let first = tier2_list_decode(&kept, codebook, list_radius, config.metric)?;
    let list = first.list.clone().unwrap_or_default();
    if list.is_empty() {
        outcome.result = first;
        return Ok(outcome);
    }
    let restricted = union.restrict(&list)?;
    let restricted_radius = restricted.correction_radius();
    let redo = Tier1Settings { radius: Some(restricted_radius), ..t1 };
    let verdicts2 = redo.apply(packets, &restricted)?;
    let counts2 = VerdictCounts::tally(&verdicts2);
    let kept2 = survivors(&verdicts2);
    outcome.result = if kept2.is_empty() {
        DecodeResult::failure()
    } else {
        tier2_subspace_decode(&kept2, codebook, config.metric)?
    };
    outcome.result.list = Some(list.clone());
    outcome.surviving_packets = kept2.len();
    outcome.feedback = Some(FeedbackRound {
        list,
        restricted_min_distance: restricted.min_distance(),
        restricted_radius,
        verdicts: verdicts2,
        counts: counts2,
        first_pass: first,
    });
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankDecodeOutcome {
    pub result: DecodeResult,
    pub verdicts: Vec<PacketVerdict>,
    pub counts: VerdictCounts,
}

/// Coherent Gabidulin decoding: each received row (one symbol's coordinates)
/// passes through tier 1, corrected rows replace the received ones, and the
/// resulting word is rank-decoded. Rows tier 1 cannot vouch for stay as
/// received, since a word-level decoder has no way to drop a symbol.
pub fn two_tier_rank_decode(
    ctx: &FieldContext,
    rows: &[Vector],
    union: &UnionCode,
    codebook: &Codebook,
    tier1: Option<Tier1Settings>,
) -> Result<RankDecodeOutcome> {
    let verdicts = match tier1 {
        Some(t1) => t1.apply(rows, union)?,
        None => Vec::new(),
    };
    let word: Vec<FieldElement> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let row = verdicts.get(i).and_then(|v| v.surviving()).unwrap_or(r);
            ctx.from_coordinates(row)
        })
        .collect::<Result<_>>()?;
    let result = tier2_rank_decode(ctx, &word, codebook)?;
    Ok(RankDecodeOutcome { counts: VerdictCounts::tally(&verdicts), verdicts, result })
}
