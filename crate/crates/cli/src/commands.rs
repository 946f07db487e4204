use std::path::Path;

use serde_json::{json, Value};
use twotier_core::codes::Codebook;
use twotier_core::config::{OutputFormat, Resolved, RunConfig};
use twotier_core::decoders::{two_tier_decode, two_tier_rank_decode};
use twotier_core::gfp::{self, Vector};
use twotier_core::sim::run_experiment;
use twotier_core::union::{self, build_union, UnionCode};
use twotier_core::{Error, FieldContext, FieldElement, Result, VERSION};

use crate::{Common, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_LEMMA_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

struct Run {
    cfg: RunConfig,
    resolved: Resolved,
}

fn load(c: &Common) -> Result<Run> {
    let mut cfg = RunConfig::from_path(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(f) = c.format {
        cfg.output.format = match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Packets => OutputFormat::Packets,
        };
    }
    if let Some(out) = &c.out {
        cfg.output.path = Some(out.display().to_string());
    }
    let resolved = cfg.resolve()?;
    Ok(Run { cfg, resolved })
}

impl Run {
    fn codebook(&self) -> Result<Codebook> {
        self.resolved.spec.build_codebook(self.resolved.codebook_budget)
    }

    fn union(&self, book: &Codebook) -> Result<UnionCode> {
        build_union(book, self.resolved.union_budget)
    }

    fn ctx(&self) -> &FieldContext {
        &self.resolved.ctx
    }

    fn format(&self) -> OutputFormat {
        self.cfg.output.format
    }

    fn envelope(&self, command: &str, result: Value) -> Value {
        json!({
            "version": VERSION,
            "command": command,
            "config": serde_json::to_value(&self.cfg).expect("config serializes"),
            "result": result,
        })
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.cfg.output.path {
            Some(p) => std::fs::write(p, text).map_err(|e| Error::Config(format!("cannot write {p}: {e}"))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, v: &Value) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
        s.push('\n');
        self.emit(&s)
    }

    fn format_message(&self, u: &[FieldElement]) -> Vec<String> {
        u.iter().map(|&e| self.ctx().format_element(e)).collect()
    }

    fn no_packet_format(&self, command: &str) -> Result<()> {
        if self.format() == OutputFormat::Packets {
            return Err(Error::Config(format!("--format packets is only valid for encode, not {command}")));
        }
        Ok(())
    }
}

fn finish(r: Result<u8>) -> u8 {
    match r {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_budget() {
                EXIT_BUDGET
            } else {
                EXIT_CONFIG
            }
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

pub fn verify_lemmas(c: &Common) -> u8 {
    finish((|| {
        let run = load(c)?;
        run.no_packet_format("verify-lemmas")?;
        let book = run.codebook()?;
        let union = run.union(&book)?;
        let report = union::verify_lemmas(&run.resolved.spec, &union);
        match run.format() {
            OutputFormat::Csv => run.emit(&union.to_csv()?)?,
            _ => run.emit_json(&run.envelope("verify-lemmas", to_json(&report)))?,
        }
        for check in report.checks.iter().filter(|c| !c.pass) {
            let tag = if check.informational { "info" } else { "FAIL" };
            eprintln!("{tag}: {}: {} (measured {})", check.id, check.claim, check.measured);
        }
        Ok(if report.all_pass { EXIT_OK } else { EXIT_LEMMA_FAILURE })
    })())
}

pub fn encode(c: &Common, message: Option<&str>) -> u8 {
    finish((|| {
        let mut run = load(c)?;
        if let Some(m) = message {
            run.cfg.experiment.message = Some(m.split(',').map(|s| s.trim().to_string()).collect());
        }
        let u = run.cfg.message(&run.resolved)?;
        let word = run.resolved.spec.encode(&u)?;
        match run.format() {
            OutputFormat::Packets => {
                let mut s = String::new();
                for row in word.component_matrix() {
                    s.push_str(&gfp::to_digit_string(row));
                    s.push('\n');
                }
                run.emit(&s)?;
            }
            OutputFormat::Csv => run.emit(&run.codebook()?.to_csv(run.ctx())?)?,
            OutputFormat::Json => {
                let rows: Vec<String> = word.component_matrix().iter().map(|r| gfp::to_digit_string(r)).collect();
                let symbols = word.symbols().map(|s| run.format_message(s));
                let result = json!({
                    "message": run.format_message(&u),
                    "ambient_len": run.resolved.spec.ambient_len(),
                    "rows": rows,
                    "symbols": symbols,
                    "dimension": word.subspace().map(|s| s.dim()),
                });
                run.emit_json(&run.envelope("encode", result))?;
            }
        }
        Ok(EXIT_OK)
    })())
}

fn read_packets(path: &Path, p: u8, len: usize) -> Result<Vec<Vector>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v = gfp::parse_digit_string(t, p).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        if v.len() != len {
            return Err(Error::Config(format!("line {}: packet length {} != {len}", i + 1, v.len())));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Config(format!("{} contains no packets", path.display())));
    }
    Ok(out)
}

pub fn decode(c: &Common, packets: &Path) -> u8 {
    finish((|| {
        let run = load(c)?;
        run.no_packet_format("decode")?;
        let spec = &run.resolved.spec;
        let p = spec.q();
        let row_len = match spec.kind() {
            twotier_core::codes::CodeKind::Gabidulin => run.ctx().n() as usize,
            _ => spec.ambient_len(),
        };
        let rows = read_packets(packets, p, row_len)?;
        let book = run.codebook()?;
        let union = run.union(&book)?;
        let (result, verdicts, audit) = if spec.is_subspace_code() {
            let out = two_tier_decode(&rows, &union, &book, &run.cfg.two_tier())?;
            let audit = json!({
                "counts": out.counts,
                "tier1_radius": out.tier1_radius,
                "surviving_packets": out.surviving_packets,
                "feedback": out.feedback,
            });
            (out.result, out.verdicts, audit)
        } else {
            let out = two_tier_rank_decode(run.ctx(), &rows, &union, &book, run.cfg.tier1.settings())?;
            let audit = json!({ "counts": out.counts });
            (out.result, out.verdicts, audit)
        };
        match run.format() {
            OutputFormat::Csv => {
                let mut s = String::from("index,outcome,vector,flips,candidates\n");
                for (i, v) in verdicts.iter().enumerate() {
                    let vec = v.vector.as_deref().map(gfp::to_digit_string).unwrap_or_default();
                    let outcome = to_json(&v.outcome);
                    s.push_str(&format!("{i},{},{vec},{},{}\n", outcome.as_str().unwrap_or(""), v.flips, v.candidates));
                }
                run.emit(&s)?;
            }
            _ => {
                let chosen_message = result.chosen.map(|i| run.format_message(&book.codewords[i].message));
                let body = json!({
                    "verdicts": verdicts,
                    "chosen": result.chosen,
                    "chosen_message": chosen_message,
                    "metric_value": result.metric_value,
                    "tie": result.tie,
                    "tied": result.tied,
                    "list": result.list,
                    "audit": audit,
                });
                run.emit_json(&run.envelope("decode", body))?;
            }
        }
        Ok(EXIT_OK)
    })())
}

pub fn simulate(c: &Common, trials: Option<usize>) -> u8 {
    finish((|| {
        let mut run = load(c)?;
        run.no_packet_format("simulate")?;
        if let Some(t) = trials {
            if t == 0 {
                return Err(Error::Config("--trials must be >= 1".into()));
            }
            run.cfg.experiment.trials = t;
        }
        let topology = run.cfg.topology()?;
        let u = run.cfg.message(&run.resolved)?;
        let book = run.codebook()?;
        let union = run.union(&book)?;
        let index = book
            .index_of_message(&u)
            .ok_or_else(|| Error::Config("experiment.message is not a codebook message".into()))?;
        let report = run_experiment(&book, &union, index, &topology, &run.cfg.errors, &run.cfg.sim_settings())?;
        match run.format() {
            OutputFormat::Csv => run.emit(&report.to_csv()?)?,
            _ => run.emit_json(&run.envelope("simulate", to_json(&report)))?,
        }
        Ok(EXIT_OK)
    })())
}

pub fn analyze_distances(c: &Common) -> u8 {
    finish((|| {
        let run = load(c)?;
        run.no_packet_format("analyze-distances")?;
        let book = run.codebook()?;
        let union = run.union(&book)?;
        let dists = union.component_min_distances();
        match run.format() {
            OutputFormat::Csv => {
                let mut s = String::from("component,message,dimension,min_distance\n");
                for (comp, &(i, d)) in union.components().iter().zip(&dists) {
                    let msg = run.format_message(&book.codewords[i].message).join(" ");
                    let d = d.map(|d| d.to_string()).unwrap_or_else(|| "inf".into());
                    s.push_str(&format!("{i},{msg},{},{d}\n", comp.dimension));
                }
                run.emit(&s)?;
            }
            _ => {
                let comps: Vec<Value> = union
                    .components()
                    .iter()
                    .zip(&dists)
                    .map(|(comp, &(i, d))| {
                        json!({
                            "index": i,
                            "message": run.format_message(&book.codewords[i].message),
                            "dimension": comp.dimension,
                            "min_distance": d,
                        })
                    })
                    .collect();
                let body = json!({
                    "ambient_len": union.ambient_len(),
                    "codebook_size": book.len(),
                    "union_size": union.len(),
                    "union_min_distance": union.min_distance(),
                    "correction_radius": union.correction_radius(),
                    "components": comps,
                });
                run.emit_json(&run.envelope("analyze-distances", body))?;
            }
        }
        Ok(EXIT_OK)
    })())
}
