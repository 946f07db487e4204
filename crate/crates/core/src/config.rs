//! TOML run configuration: field, code, budgets, decoding, topology, channel
//! and experiment sections.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codes::{
    reed_solomon_alphas, CodeKind, CodeSpec, GabidulinSpec, KkSpec, MvLayout, MvSpec, DEFAULT_CODEBOOK_BUDGET,
};
use crate::decoders::{Tier1Mode, Tier1Settings, TwoTierConfig};
use crate::error::{Error, Result};
use crate::gf::{builtin_modulus, FieldContext, FieldElement};
use crate::metrics::SubspaceMetric;
use crate::sim::{ErrorModel, SimSettings, Strategy, Topology, TopologySpec};
use crate::union::DEFAULT_UNION_BUDGET;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub p: u32,
    pub n: u32,
    /// Coefficients low-to-high, leading 1 included. Defaults to the
    /// built-in table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
    /// Representation basis for packet coordinates; polynomial if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    ReedSolomon,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeConfig {
    pub kind: CodeKind,
    pub k: usize,
    /// MV: degree of the intermediate field GF(q^m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// MV: list size L.
    #[serde(default, alias = "L", skip_serializing_if = "Option::is_none")]
    pub list_size: Option<usize>,
    #[serde(default)]
    pub layout: MvLayout,
    /// Gabidulin evaluation points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    /// KK/MV alphas.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
    /// Derive the alphas instead of listing them; needs `l`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas_from: Option<AlphaSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
}

fn default_codebook_budget() -> u64 {
    DEFAULT_CODEBOOK_BUDGET as u64
}

fn default_union_budget() -> u64 {
    DEFAULT_UNION_BUDGET as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "default_codebook_budget")]
    pub codebook: u64,
    #[serde(default = "default_union_budget")]
    pub union: u64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig { codebook: default_codebook_budget(), union: default_union_budget() }
    }
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier1Config {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub mode: Tier1Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<usize>,
    #[serde(default)]
    pub allow_unsafe_radius: bool,
}

impl Default for Tier1Config {
    fn default() -> Self {
        Tier1Config { enabled: true, mode: Tier1Mode::Correct, radius: None, allow_unsafe_radius: false }
    }
}

impl Tier1Config {
    pub fn settings(&self) -> Option<Tier1Settings> {
        self.enabled.then_some(Tier1Settings {
            mode: self.mode,
            radius: self.radius,
            allow_unsafe_radius: self.allow_unsafe_radius,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier2Config {
    #[serde(default)]
    pub metric: SubspaceMetric,
    #[serde(default)]
    pub feedback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list_radius: Option<usize>,
}

fn detect() -> Tier1Mode {
    Tier1Mode::Detect
}

fn default_trials() -> usize {
    100
}

fn default_retries() -> usize {
    16
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Message entries; defaults to message index 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<Strategy>>,
    #[serde(default = "detect")]
    pub node_filter_mode: Tier1Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_filter_radius: Option<usize>,
    #[serde(default)]
    pub retry_rank_deficient: bool,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: default_trials(),
            seed: 0,
            message: None,
            strategies: None,
            node_filter_mode: Tier1Mode::Detect,
            node_filter_radius: None,
            retry_rank_deficient: false,
            max_retries: default_retries(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    /// Encode only: one packet per line, ready for `decode`.
    Packets,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub meta: MetaConfig,
    pub field: FieldConfig,
    pub code: CodeConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub tier1: Tier1Config,
    #[serde(default)]
    pub tier2: Tier2Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
    #[serde(default)]
    pub errors: ErrorModel,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Everything a command needs, built and validated from a `RunConfig`.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub ctx: Arc<FieldContext>,
    pub spec: CodeSpec,
    pub codebook_budget: u128,
    pub union_budget: u128,
}

fn parse_list(ctx: &FieldContext, what: &str, items: &[String]) -> Result<Vec<FieldElement>> {
    items
        .iter()
        .map(|s| ctx.parse_element(s).map_err(|e| Error::Config(format!("{what}: {e}"))))
        .collect()
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn build_field(&self) -> Result<FieldContext> {
        let f = &self.field;
        let modulus = match &f.modulus {
            Some(m) => m.clone(),
            None => builtin_modulus(f.p, f.n).ok_or_else(|| {
                Error::Config(format!("no built-in modulus for GF({}^{}); set field.modulus", f.p, f.n))
            })?,
        };
        let ctx = FieldContext::new(f.p, f.n, modulus)?;
        match &f.basis {
            None => Ok(ctx),
            Some(b) => {
                let elems = parse_list(&ctx, "field.basis", b)?;
                ctx.with_basis(&elems)
            }
        }
    }

    fn alphas(&self, ctx: &FieldContext) -> Result<Vec<FieldElement>> {
        let c = &self.code;
        match (&c.alphas, c.alphas_from) {
            (Some(_), Some(_)) => Err(Error::Config("set code.alphas or code.alphas_from, not both".into())),
            (Some(a), None) => parse_list(ctx, "code.alphas", a),
            (None, Some(AlphaSource::ReedSolomon)) => {
                let l = c.l.ok_or_else(|| Error::Config("code.alphas_from needs code.l".into()))?;
                reed_solomon_alphas(ctx, l)
            }
            (None, None) => Err(Error::Config("code.alphas is required".into())),
        }
    }

    /// Build the field and code and check every section. Budget problems
    /// surface as `Error::BudgetExceeded`, everything else as a config or
    /// invalid-parameter error.
    pub fn resolve(&self) -> Result<Resolved> {
        let ctx = Arc::new(self.build_field()?);
        let c = &self.code;
        if let Some(l) = c.l {
            if c.alphas.as_ref().is_some_and(|a| a.len() != l) {
                return Err(Error::Config(format!("code.l = {l} but {} alphas are listed", c.alphas.as_ref().map_or(0, Vec::len))));
            }
        }
        let spec = match c.kind {
            CodeKind::Gabidulin => {
                let g = c
                    .generators
                    .as_ref()
                    .ok_or_else(|| Error::Config("code.generators is required for gabidulin".into()))?;
                CodeSpec::Gabidulin(GabidulinSpec::new(ctx.clone(), c.k, parse_list(&ctx, "code.generators", g)?)?)
            }
            CodeKind::Kk => CodeSpec::Kk(KkSpec::new(ctx.clone(), c.k, self.alphas(&ctx)?)?),
            CodeKind::Mv => {
                let m = c.m.ok_or_else(|| Error::Config("code.m is required for mv".into()))?;
                let big_l = c.list_size.ok_or_else(|| Error::Config("code.list_size is required for mv".into()))?;
                CodeSpec::Mv(MvSpec::new(ctx.clone(), m, big_l, c.k, self.alphas(&ctx)?, c.layout)?)
            }
        };
        if self.tier2.feedback && self.tier2.list_radius.is_none() {
            return Err(Error::Config("tier2.feedback needs tier2.list_radius".into()));
        }
        if let Some(t) = &self.topology {
            let topo = Topology::new(t.clone())?;
            self.errors.validate(spec.ambient_len(), &topo)?;
        }
        if self.experiment.trials == 0 {
            return Err(Error::Config("experiment.trials must be >= 1".into()));
        }
        Ok(Resolved {
            ctx,
            spec,
            codebook_budget: self.budget.codebook as u128,
            union_budget: self.budget.union as u128,
        })
    }

    pub fn two_tier(&self) -> TwoTierConfig {
        TwoTierConfig {
            tier1: self.tier1.settings(),
            metric: self.tier2.metric,
            feedback_list_radius: if self.tier2.feedback { self.tier2.list_radius } else { None },
        }
    }

    pub fn sim_settings(&self) -> SimSettings {
        let e = &self.experiment;
        SimSettings {
            trials: e.trials,
            seed: e.seed,
            strategies: e.strategies.clone().unwrap_or_else(|| Strategy::ALL.to_vec()),
            decode: self.two_tier(),
            node_filter: Tier1Settings {
                mode: e.node_filter_mode,
                radius: e.node_filter_radius,
                allow_unsafe_radius: self.tier1.allow_unsafe_radius,
            },
            retry_rank_deficient: e.retry_rank_deficient,
            max_retries: e.max_retries,
        }
    }

    pub fn topology(&self) -> Result<Topology> {
        let t = self.topology.clone().ok_or_else(|| Error::Config("a [topology] section is required".into()))?;
        Topology::new(t)
    }

    /// The configured message, or message 0.
    pub fn message(&self, r: &Resolved) -> Result<Vec<FieldElement>> {
        match &self.experiment.message {
            Some(m) => {
                let u = parse_list(&r.ctx, "experiment.message", m)?;
                if u.len() != r.spec.k() {
                    return Err(Error::Config(format!(
                        "experiment.message has {} entries, the code needs k = {}",
                        u.len(),
                        r.spec.k()
                    )));
                }
                Ok(u)
            }
            None => Ok(r.spec.message_at(0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MV1: &str = r#"
[field]
p = 2
n = 3

[code]
kind = "mv"
k = 1
m = 3
L = 2
alphas = ["g^5"]
"#;

    #[test]
    fn parses_minimal_mv() {
        let c = RunConfig::from_toml_str(MV1).unwrap();
        assert_eq!(c.code.list_size, Some(2));
        let r = c.resolve().unwrap();
        assert_eq!(r.spec.ambient_len(), 9);
        assert_eq!(c.message(&r).unwrap(), vec![r.ctx.zero()]);
    }

    #[test]
    fn rejects_unknown_keys_and_missing_parts() {
        assert!(RunConfig::from_toml_str(&format!("{MV1}\n[tier1]\nbogus = 1\n")).is_err());
        let no_alpha = MV1.replace("alphas = [\"g^5\"]", "");
        assert!(matches!(RunConfig::from_toml_str(&no_alpha).unwrap().resolve(), Err(Error::Config(_))));
        let no_mod = MV1.replace("p = 2\nn = 3", "p = 5\nn = 3");
        assert!(RunConfig::from_toml_str(&no_mod).unwrap().resolve().is_err());
    }

    #[test]
    fn dependent_alphas_rejected() {
        let kk = r#"
[field]
p = 2
n = 3
[code]
kind = "kk"
k = 1
alphas = ["g^3", "g^3"]
"#;
        let err = RunConfig::from_toml_str(kk).unwrap().resolve().unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)), "{err:?}");
    }

    #[test]
    fn reed_solomon_alphas_from_config() {
        let kk = r#"
[field]
p = 5
n = 4
modulus = [2, 3, 1, 0, 1]
[code]
kind = "kk"
k = 1
l = 2
alphas_from = "reed-solomon"
"#;
        let r = RunConfig::from_toml_str(kk).unwrap().resolve().unwrap();
        assert_eq!(r.spec.ambient_len(), 8);
    }

    #[test]
    fn feedback_needs_radius() {
        let c = RunConfig::from_toml_str(&format!("{MV1}\n[tier2]\nfeedback = true\n")).unwrap();
        assert!(c.resolve().is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::from_toml_str(MV1).unwrap();
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }
}
