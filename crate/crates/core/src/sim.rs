//! Seeded random linear network coding over a DAG.
//!
//! Every random draw comes from a ChaCha8 stream keyed by
//! `(base seed, trial, purpose, ...)`, so a trial is a pure function of the
//! configuration and its index. Strategies are paired: they share the same
//! mixing and channel streams, and packets occupy fixed slots (in-edge,
//! slot index) so a packet dropped by one strategy does not shift the draws
//! of any other packet.

use std::collections::HashMap;

use petgraph::algo::{has_path_connecting, toposort};
use petgraph::graph::{DiGraph, NodeIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{CodeKind, Codebook};
use crate::decoders::{
    tier1_decode_with, two_tier_decode, Outcome, Tier1Mode, Tier1Settings, TwoTierConfig, VerdictCounts,
};
use crate::error::{Error, Result};
use crate::gfp::{self, Vector};
use crate::union::UnionCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Source,
    Intermediate,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub role: Role,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<(String, String)>,
    /// Packets each node sends on each of its out-edges.
    #[serde(default = "one")]
    pub packets_per_edge: usize,
}

impl TopologySpec {
    /// `s -> a, s -> b, a -> t, b -> t`.
    pub fn diamond() -> Self {
        let node = |id: &str, role| NodeSpec { id: id.into(), role };
        let edge = |a: &str, b: &str| (a.to_string(), b.to_string());
        TopologySpec {
            nodes: vec![
                node("s", Role::Source),
                node("a", Role::Intermediate),
                node("b", Role::Intermediate),
                node("t", Role::Sink),
            ],
            edges: vec![edge("s", "a"), edge("s", "b"), edge("a", "t"), edge("b", "t")],
            packets_per_edge: 1,
        }
    }
}

/// A validated topology.
#[derive(Debug, Clone)]
pub struct Topology {
    spec: TopologySpec,
    roles: Vec<Role>,
    edges: Vec<(usize, usize)>,
    order: Vec<usize>,
    source: usize,
    sinks: Vec<usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(spec: TopologySpec) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, n) in spec.nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::Topology(format!("duplicate node id {:?}", n.id)));
            }
        }
        if spec.packets_per_edge == 0 {
            return Err(Error::Topology("packets_per_edge must be >= 1".into()));
        }
        let mut graph = DiGraph::<usize, usize>::new();
        let ids: Vec<NodeIndex> = (0..spec.nodes.len()).map(|i| graph.add_node(i)).collect();
        let mut edges = Vec::with_capacity(spec.edges.len());
        for (e, (a, b)) in spec.edges.iter().enumerate() {
            let lookup = |name: &String| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::Topology(format!("edge {e} references unknown node {name:?}")))
            };
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(Error::Topology(format!("self-loop on {a:?}")));
            }
            graph.add_edge(ids[u], ids[v], e);
            edges.push((u, v));
        }
        let order: Vec<usize> = toposort(&graph, None)
            .map_err(|c| Error::Topology(format!("cycle through node {:?}", spec.nodes[graph[c.node_id()]].id)))?
            .into_iter()
            .map(|n| graph[n])
            .collect();

        let roles: Vec<Role> = spec.nodes.iter().map(|n| n.role).collect();
        let sources: Vec<usize> = (0..roles.len()).filter(|&i| roles[i] == Role::Source).collect();
        let [source] = sources[..] else {
            return Err(Error::Topology(format!("need exactly one source, found {}", sources.len())));
        };
        let sinks: Vec<usize> = (0..roles.len()).filter(|&i| roles[i] == Role::Sink).collect();
        if sinks.is_empty() {
            return Err(Error::Topology("no sink".into()));
        }
        let mut in_edges = vec![Vec::new(); roles.len()];
        let mut out_edges = vec![Vec::new(); roles.len()];
        for (e, &(u, v)) in edges.iter().enumerate() {
            out_edges[u].push(e);
            in_edges[v].push(e);
        }
        if !in_edges[source].is_empty() {
            return Err(Error::Topology("the source has incoming edges".into()));
        }
        for &t in &sinks {
            if !out_edges[t].is_empty() {
                return Err(Error::Topology(format!("sink {:?} has outgoing edges", spec.nodes[t].id)));
            }
            if !has_path_connecting(&graph, ids[source], ids[t], None) {
                return Err(Error::Topology(format!("sink {:?} is unreachable from the source", spec.nodes[t].id)));
            }
        }
        Ok(Topology { spec, roles, edges, order, source, sinks, in_edges, out_edges })
    }

    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.spec.nodes.iter().position(|n| n.id == id)
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.in_edges[node].len()
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.out_edges[node].len()
    }

    pub fn sinks(&self) -> &[usize] {
        &self.sinks
    }
}

fn full_corruption() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModel {
    /// Per-coordinate flip probability for a corrupted packet; ignored when
    /// `fixed_flips` is set.
    #[serde(default)]
    pub bit_flip_prob: f64,
    /// Exact number of distinct coordinates flipped in a corrupted packet.
    #[serde(default)]
    pub fixed_flips: Option<usize>,
    /// Probability that a packet crosses a bad edge.
    #[serde(default = "full_corruption")]
    pub corrupt_packet_prob: f64,
    /// Uniformly random packets added at `injection_node` in every trial.
    #[serde(default)]
    pub injected_packets: usize,
    #[serde(default)]
    pub injection_node: Option<String>,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel {
            bit_flip_prob: 0.0,
            fixed_flips: None,
            corrupt_packet_prob: 1.0,
            injected_packets: 0,
            injection_node: None,
        }
    }
}

impl ErrorModel {
    pub fn validate(&self, ambient_len: usize, topology: &Topology) -> Result<()> {
        for (name, v) in [("bit_flip_prob", self.bit_flip_prob), ("corrupt_packet_prob", self.corrupt_packet_prob)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if let Some(f) = self.fixed_flips {
            if f > ambient_len {
                return Err(Error::Config(format!("fixed_flips = {f} exceeds the packet length {ambient_len}")));
            }
        }
        if self.injected_packets > 0 {
            let Some(node) = &self.injection_node else {
                return Err(Error::Config("injected_packets needs an injection_node".into()));
            };
            if topology.node_index(node).is_none() {
                return Err(Error::Config(format!("injection_node {node:?} is not in the topology")));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        let flips = match self.fixed_flips {
            Some(f) => f > 0,
            None => self.bit_flip_prob > 0.0,
        };
        self.injected_packets == 0 && !(flips && self.corrupt_packet_prob > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "tier2-only")]
    Tier2Only,
    #[serde(rename = "two-tier")]
    TwoTier,
    #[serde(rename = "two-tier+node-filter")]
    NodeFilter,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Tier2Only, Strategy::TwoTier, Strategy::NodeFilter];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Tier2Only => "tier2-only",
            Strategy::TwoTier => "two-tier",
            Strategy::NodeFilter => "two-tier+node-filter",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSettings {
    pub trials: usize,
    pub seed: u64,
    pub strategies: Vec<Strategy>,
    /// Sink-side decoding for the two-tier strategies.
    pub decode: TwoTierConfig,
    /// Tier 1 at intermediate nodes for the node-filter strategy.
    pub node_filter: Tier1Settings,
    /// Redraw mixing coefficients until every sink's noiseless span has
    /// full rank, at most `max_retries` times.
    pub retry_rank_deficient: bool,
    pub max_retries: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            trials: 100,
            seed: 0,
            strategies: Strategy::ALL.to_vec(),
            decode: TwoTierConfig::default(),
            node_filter: Tier1Settings { mode: Tier1Mode::Detect, radius: None, allow_unsafe_radius: false },
            retry_rank_deficient: false,
            max_retries: 16,
        }
    }
}

const PURPOSE_MIX: u64 = 1;
const PURPOSE_CHANNEL: u64 = 2;
const PURPOSE_INJECT: u64 = 3;

pub const SEED_DERIVATION: &str = "ChaCha8(splitmix64 fold of [base_seed, trial, purpose, ...]); \
purpose 1 = mixing (attempt, node, out-edge, slot), 2 = channel (edge, slot), 3 = injection (node)";

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(base: u64, parts: &[u64]) -> ChaCha8Rng {
    let seed = parts.iter().fold(splitmix64(base), |h, &p| splitmix64(h ^ p));
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Audit {
    /// Packets put on edges.
    pub emitted: usize,
    pub injected: usize,
    pub filter_drops: usize,
    /// Edge deliveries into sinks.
    pub sink_deliveries: usize,
    pub injected_at_sinks: usize,
    /// Packets handed to sink decoders.
    pub sink_arrivals: usize,
}

impl Audit {
    fn merge(&mut self, o: &Audit) {
        self.emitted += o.emitted;
        self.injected += o.injected;
        self.filter_drops += o.filter_drops;
        self.sink_deliveries += o.sink_deliveries;
        self.injected_at_sinks += o.injected_at_sinks;
        self.sink_arrivals += o.sink_arrivals;
    }

    /// Sink arrivals equal in-edge deliveries plus local injections (no
    /// filtering happens at sinks).
    pub fn balanced(&self) -> bool {
        self.sink_arrivals == self.sink_deliveries + self.injected_at_sinks
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkOutcome {
    pub sink: String,
    pub success: bool,
    pub chosen: Option<usize>,
    pub metric_value: Option<usize>,
    pub tie: bool,
    pub received: usize,
    pub received_rank: usize,
    pub verdicts: VerdictCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyTrial {
    pub strategy: Strategy,
    /// Every sink decoded the sent message.
    pub success: bool,
    pub sinks: Vec<SinkOutcome>,
    pub node_filter: VerdictCounts,
    pub audit: Audit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub attempt: usize,
    pub rank_deficient: bool,
    pub outcomes: Vec<StrategyTrial>,
}

/// Per-(in-edge, slot) packet positions, then local injections.
type Inbox = Vec<Option<Vector>>;

struct Propagation {
    sink_inboxes: Vec<(usize, Vec<Vector>)>,
    filter: VerdictCounts,
    audit: Audit,
}

pub struct Simulator<'a> {
    codebook: &'a Codebook,
    union: &'a UnionCode,
    message_index: usize,
    topology: &'a Topology,
    errors: &'a ErrorModel,
    settings: &'a SimSettings,
    injection_node: Option<usize>,
}

impl<'a> Simulator<'a> {
    pub fn new(
        codebook: &'a Codebook,
        union: &'a UnionCode,
        message_index: usize,
        topology: &'a Topology,
        errors: &'a ErrorModel,
        settings: &'a SimSettings,
    ) -> Result<Self> {
        if codebook.kind == CodeKind::Gabidulin {
            return Err(Error::Config("simulation needs a KK or MV code".into()));
        }
        if message_index >= codebook.len() {
            return Err(Error::Config(format!(
                "message index {message_index} out of range for {} codewords",
                codebook.len()
            )));
        }
        if union.ambient_len() != codebook.ambient_len {
            return Err(Error::LengthMismatch { expected: codebook.ambient_len, got: union.ambient_len() });
        }
        if settings.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if settings.strategies.is_empty() {
            return Err(Error::Config("no strategies selected".into()));
        }
        errors.validate(codebook.ambient_len, topology)?;
        let injection_node = match &errors.injection_node {
            Some(id) if errors.injected_packets > 0 => topology.node_index(id),
            _ => None,
        };
        Ok(Simulator { codebook, union, message_index, topology, errors, settings, injection_node })
    }

    fn q(&self) -> u8 {
        self.codebook.p
    }

    fn len(&self) -> usize {
        self.codebook.ambient_len
    }

    fn corrupt(&self, packet: &mut Vector, rng: &mut ChaCha8Rng) {
        let q = self.q();
        if !rng.gen_bool(self.errors.corrupt_packet_prob) {
            return;
        }
        match self.errors.fixed_flips {
            Some(f) => {
                for pos in sample(rng, packet.len(), f).into_vec() {
                    let off = rng.gen_range(1..q);
                    packet[pos] = gfp::add(packet[pos], off, q);
                }
            }
            None => {
                for c in packet.iter_mut() {
                    if rng.gen_bool(self.errors.bit_flip_prob) {
                        let off = rng.gen_range(1..q);
                        *c = gfp::add(*c, off, q);
                    }
                }
            }
        }
    }

    fn inject(&self, trial: usize, node: usize, inbox: &mut Inbox) -> usize {
        if self.injection_node != Some(node) {
            return 0;
        }
        let mut rng = stream(self.settings.seed, &[trial as u64, PURPOSE_INJECT, node as u64]);
        let q = self.q();
        for _ in 0..self.errors.injected_packets {
            inbox.push(Some((0..self.len()).map(|_| rng.gen_range(0..q)).collect()));
        }
        self.errors.injected_packets
    }

    fn filter(&self, inbox: &mut Inbox, counts: &mut VerdictCounts) -> Result<usize> {
        let t1 = &self.settings.node_filter;
        let radius = t1.radius_for(self.union);
        let mut drops = 0;
        for slot in inbox.iter_mut() {
            let Some(packet) = slot else { continue };
            let v = tier1_decode_with(packet, self.union, radius, t1.mode, t1.allow_unsafe_radius)?;
            counts.add(&v);
            match v.outcome {
                Outcome::Valid | Outcome::Corrected => *slot = v.vector,
                Outcome::Erased | Outcome::Rejected => {
                    *slot = None;
                    drops += 1;
                }
            }
        }
        Ok(drops)
    }

    /// Push one trial through the network. `noisy = false` skips the
    /// channel and injections (used for the rank check).
    fn propagate(&self, trial: usize, attempt: usize, noisy: bool, node_filter: bool) -> Result<Propagation> {
        let topo = self.topology;
        let ppe = topo.spec.packets_per_edge;
        let q = self.q();
        let len = self.len();
        let seed = self.settings.seed;
        let mut edge_packets: Vec<Vec<Option<Vector>>> = vec![Vec::new(); topo.edges.len()];
        let mut filter = VerdictCounts::default();
        let mut audit = Audit::default();
        let mut sink_inboxes = Vec::new();

        for &node in &topo.order {
            let mut inbox: Inbox = if node == topo.source {
                self.codebook.codewords[self.message_index]
                    .component_matrix()
                    .iter()
                    .cloned()
                    .map(Some)
                    .collect()
            } else {
                topo.in_edges[node]
                    .iter()
                    .flat_map(|&e| std::mem::take(&mut edge_packets[e]))
                    .collect()
            };
            if topo.roles[node] == Role::Sink {
                audit.sink_deliveries += inbox.iter().flatten().count();
            }
            if noisy {
                let added = self.inject(trial, node, &mut inbox);
                audit.injected += added;
                if topo.roles[node] == Role::Sink {
                    audit.injected_at_sinks += added;
                }
            }
            if node_filter && topo.roles[node] == Role::Intermediate {
                audit.filter_drops += self.filter(&mut inbox, &mut filter)?;
            }
            if topo.roles[node] == Role::Sink {
                let packets: Vec<Vector> = inbox.into_iter().flatten().collect();
                audit.sink_arrivals += packets.len();
                sink_inboxes.push((node, packets));
                continue;
            }
            let live = inbox.iter().any(|p| p.is_some());
            for &e in &topo.out_edges[node] {
                let mut channel = stream(seed, &[trial as u64, PURPOSE_CHANNEL, e as u64]);
                let mut out = Vec::with_capacity(ppe);
                for slot in 0..ppe {
                    let mut mix =
                        stream(seed, &[trial as u64, PURPOSE_MIX, attempt as u64, node as u64, e as u64, slot as u64]);
                    // One coefficient per position, drawn even for empty
                    // positions, so all strategies see the same draws.
                    let coeffs: Vec<u8> = (0..inbox.len()).map(|_| mix.gen_range(0..q)).collect();
                    let mut packet = live.then(|| {
                        let mut acc = vec![0u8; len];
                        for (c, p) in coeffs.iter().zip(&inbox) {
                            if let Some(p) = p {
                                gfp::axpy(&mut acc, *c, p, q);
                            }
                        }
                        acc
                    });
                    // Channel draws are consumed for every slot as well.
                    let mut scratch = vec![0u8; len];
                    let target = packet.as_mut().unwrap_or(&mut scratch);
                    if noisy {
                        self.corrupt(target, &mut channel);
                    }
                    if packet.is_some() {
                        audit.emitted += 1;
                    }
                    out.push(packet);
                }
                edge_packets[e] = out;
            }
        }
        Ok(Propagation { sink_inboxes, filter, audit })
    }

    fn full_rank_at_sinks(&self, trial: usize, attempt: usize) -> Result<bool> {
        let want = self.codebook.codewords[self.message_index].component_matrix().len();
        let prop = self.propagate(trial, attempt, false, false)?;
        Ok(prop
            .sink_inboxes
            .iter()
            .all(|(_, pk)| gfp::rank(pk, self.len(), self.q()) == want))
    }

    fn decode_config(&self, strategy: Strategy) -> TwoTierConfig {
        match strategy {
            Strategy::Tier2Only => TwoTierConfig { tier1: None, metric: self.settings.decode.metric, feedback_list_radius: None },
            Strategy::TwoTier | Strategy::NodeFilter => self.settings.decode,
        }
    }

    /// One strategy on one trial, using mixing attempt `attempt`.
    pub fn run_trial(&self, trial: usize, attempt: usize, strategy: Strategy) -> Result<StrategyTrial> {
        let prop = self.propagate(trial, attempt, true, strategy == Strategy::NodeFilter)?;
        let config = self.decode_config(strategy);
        let mut sinks = Vec::with_capacity(prop.sink_inboxes.len());
        for (node, packets) in &prop.sink_inboxes {
            let out = two_tier_decode(packets, self.union, self.codebook, &config)?;
            sinks.push(SinkOutcome {
                sink: self.topology.spec.nodes[*node].id.clone(),
                success: out.result.chosen == Some(self.message_index),
                chosen: out.result.chosen,
                metric_value: out.result.metric_value,
                tie: out.result.tie,
                received: packets.len(),
                received_rank: gfp::rank(packets, self.len(), self.q()),
                verdicts: out.feedback.as_ref().map(|f| f.counts.clone()).unwrap_or(out.counts),
            });
        }
        Ok(StrategyTrial {
            strategy,
            success: sinks.iter().all(|s| s.success),
            sinks,
            node_filter: prop.filter,
            audit: prop.audit,
        })
    }

    /// Every configured strategy on trial `trial`, paired.
    pub fn run_paired_trial(&self, trial: usize) -> Result<TrialRecord> {
        let mut attempt = 0;
        let mut full = self.full_rank_at_sinks(trial, 0)?;
        if self.settings.retry_rank_deficient {
            while !full && attempt < self.settings.max_retries {
                attempt += 1;
                full = self.full_rank_at_sinks(trial, attempt)?;
            }
        }
        let outcomes = self
            .settings
            .strategies
            .iter()
            .map(|&s| self.run_trial(trial, attempt, s))
            .collect::<Result<_>>()?;
        Ok(TrialRecord { trial, attempt, rank_deficient: !full, outcomes })
    }

    pub fn run(&self) -> Result<(SimReport, Vec<TrialRecord>)> {
        let records: Vec<TrialRecord> = (0..self.settings.trials)
            .into_par_iter()
            .map(|t| self.run_paired_trial(t))
            .collect::<Result<_>>()?;
        let report = SimReport::aggregate(self, &records);
        Ok((report, records))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub sink_decodes: usize,
    pub sink_successes: usize,
    pub decode_failures: usize,
    pub ties: usize,
    pub verdicts: VerdictCounts,
    pub node_filter: VerdictCounts,
    pub mean_tier2_metric: Option<f64>,
    pub audit: Audit,
    pub audit_balanced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairedComparison {
    pub a: Strategy,
    pub b: Strategy,
    pub both: usize,
    pub a_only: usize,
    pub b_only: usize,
    pub neither: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedInfo {
    pub base_seed: u64,
    pub derivation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimEcho {
    pub topology: TopologySpec,
    pub errors: serde_json::Value,
    pub message_index: usize,
    pub ambient_len: usize,
    pub codebook_size: usize,
    pub union_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub trials: usize,
    pub seeds: SeedInfo,
    pub rank_deficient_trials: usize,
    pub retried_trials: usize,
    pub total_retries: usize,
    pub strategies: Vec<StrategyReport>,
    pub paired: Vec<PairedComparison>,
    pub setup: SimEcho,
}

impl SimReport {
    fn aggregate(sim: &Simulator, records: &[TrialRecord]) -> Self {
        let strategies = sim.settings.strategies.clone();
        let mut reports = Vec::with_capacity(strategies.len());
        for (k, &strategy) in strategies.iter().enumerate() {
            let mut r = StrategyReport {
                strategy,
                trials: records.len(),
                successes: 0,
                success_rate: 0.0,
                sink_decodes: 0,
                sink_successes: 0,
                decode_failures: 0,
                ties: 0,
                verdicts: VerdictCounts::default(),
                node_filter: VerdictCounts::default(),
                mean_tier2_metric: None,
                audit: Audit::default(),
                audit_balanced: true,
            };
            let (mut metric_sum, mut metric_n) = (0usize, 0usize);
            for rec in records {
                let o = &rec.outcomes[k];
                r.successes += o.success as usize;
                r.node_filter.merge(&o.node_filter);
                r.audit.merge(&o.audit);
                r.audit_balanced &= o.audit.balanced();
                for s in &o.sinks {
                    r.sink_decodes += 1;
                    r.sink_successes += s.success as usize;
                    r.decode_failures += s.chosen.is_none() as usize;
                    r.ties += s.tie as usize;
                    r.verdicts.merge(&s.verdicts);
                    if let Some(m) = s.metric_value {
                        metric_sum += m;
                        metric_n += 1;
                    }
                }
            }
            r.success_rate = r.successes as f64 / r.trials as f64;
            r.mean_tier2_metric = (metric_n > 0).then(|| metric_sum as f64 / metric_n as f64);
            reports.push(r);
        }

        let mut paired = Vec::new();
        for i in 0..strategies.len() {
            for j in 0..i {
                let mut c = PairedComparison { a: strategies[i], b: strategies[j], both: 0, a_only: 0, b_only: 0, neither: 0 };
                for rec in records {
                    match (rec.outcomes[i].success, rec.outcomes[j].success) {
                        (true, true) => c.both += 1,
                        (true, false) => c.a_only += 1,
                        (false, true) => c.b_only += 1,
                        (false, false) => c.neither += 1,
                    }
                }
                paired.push(c);
            }
        }

        SimReport {
            trials: records.len(),
            seeds: SeedInfo { base_seed: sim.settings.seed, derivation: SEED_DERIVATION },
            rank_deficient_trials: records.iter().filter(|r| r.rank_deficient).count(),
            retried_trials: records.iter().filter(|r| r.attempt > 0).count(),
            total_retries: records.iter().map(|r| r.attempt).sum(),
            strategies: reports,
            paired,
            setup: SimEcho {
                topology: sim.topology.spec.clone(),
                errors: serde_json::to_value(sim.errors).expect("error model serializes"),
                message_index: sim.message_index,
                ambient_len: sim.len(),
                codebook_size: sim.codebook.len(),
                union_size: sim.union.len(),
            },
        }
    }

    pub fn strategy(&self, s: Strategy) -> Option<&StrategyReport> {
        self.strategies.iter().find(|r| r.strategy == s)
    }

    pub fn comparison(&self, a: Strategy, b: Strategy) -> Option<PairedComparison> {
        self.paired.iter().find_map(|c| {
            if c.a == a && c.b == b {
                Some(c.clone())
            } else if c.a == b && c.b == a {
                Some(PairedComparison { a, b, both: c.both, a_only: c.b_only, b_only: c.a_only, neither: c.neither })
            } else {
                None
            }
        })
    }

    /// One row per strategy.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record([
            "strategy",
            "trials",
            "successes",
            "success_rate",
            "sink_decodes",
            "sink_successes",
            "decode_failures",
            "ties",
            "valid",
            "corrected",
            "erased",
            "rejected",
            "flips",
            "filter_drops",
            "mean_tier2_metric",
            "rank_deficient_trials",
            "base_seed",
        ])
        .map_err(err)?;
        for r in &self.strategies {
            w.write_record([
                r.strategy.name().to_string(),
                r.trials.to_string(),
                r.successes.to_string(),
                r.success_rate.to_string(),
                r.sink_decodes.to_string(),
                r.sink_successes.to_string(),
                r.decode_failures.to_string(),
                r.ties.to_string(),
                r.verdicts.valid.to_string(),
                r.verdicts.corrected.to_string(),
                r.verdicts.erased.to_string(),
                r.verdicts.rejected.to_string(),
                r.verdicts.flips.to_string(),
                r.audit.filter_drops.to_string(),
                r.mean_tier2_metric.map(|m| m.to_string()).unwrap_or_default(),
                self.rank_deficient_trials.to_string(),
                self.seeds.base_seed.to_string(),
            ])
            .map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii csv"))
    }
}

/// Validate the setup and run every trial.
pub fn run_experiment(
    codebook: &Codebook,
    union: &UnionCode,
    message_index: usize,
    topology: &Topology,
    errors: &ErrorModel,
    settings: &SimSettings,
) -> Result<SimReport> {
    Simulator::new(codebook, union, message_index, topology, errors, settings)?
        .run()
        .map(|(report, _)| report)
}
