//! Experiment configuration, orchestration, and deterministic report
//! emission. Configs are JSON with a strict schema; every stochastic
//! operation requires a seed; reruns of the same config produce
//! byte-identical outputs.

use crate::bounds::{self, Grids, VarLowerForm};
use crate::element::ElementId;
use crate::error::{Error, Result};
use crate::lowerset::LowerSet;
use crate::mc::{self, McMethod, RNG_ALGORITHM};
use crate::monoid::{self, ShapeConfig};
use crate::oracle::{Oracle, DEFAULT_MEMO_CAP};
use crate::paths;
use crate::poset::Poset;
use crate::rates::{RateMap, RateRule};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PosetConfig {
    Lattice { d: usize },
    Tree { alphabet: Vec<String> },
    Cone { generators: Vec<Vec<i64>> },
    Columnar { labels: Vec<String> },
    Custom { covers: Vec<(String, String)> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RateConfig {
    Constant { lambda: f64 },
    LevelDecay { base: f64, gamma: f64 },
    Table {
        entries: Vec<(Value, f64)>,
        #[serde(default)]
        default: Option<f64>,
    },
    RandomUniform { lo: f64, hi: f64, seed: u64 },
}

/// A target lower set: either the down-closure of listed elements or an
/// explicit element list (validated for lower-closedness).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    #[serde(default)]
    pub down_of: Option<Vec<Value>>,
    #[serde(default)]
    pub elements: Option<Vec<Value>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Oracle,
    Simulate,
    VerifyBounds,
    Shape,
    Paths,
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Oracle => "oracle",
            Operation::Simulate => "simulate",
            Operation::VerifyBounds => "verify-bounds",
            Operation::Shape => "shape",
            Operation::Paths => "paths",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub replicas: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_method")]
    pub method: McMethod,
}

fn default_method() -> McMethod {
    McMethod::StaticLpp
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    #[serde(default = "Budgets::default_memo")]
    pub memo_entries: usize,
    /// Cap on |B| for sub-lower-set enumeration.
    #[serde(default = "Budgets::default_enumeration")]
    pub enumeration_elements: usize,
    /// Cap on enumerated lower-set counts (CDF lattice, generic envelope).
    #[serde(default = "Budgets::default_state_count")]
    pub state_count: usize,
    #[serde(default = "Budgets::default_path_cap")]
    pub path_cap: usize,
    #[serde(default = "Budgets::default_node_budget")]
    pub node_budget: usize,
}

impl Budgets {
    fn default_memo() -> usize {
        DEFAULT_MEMO_CAP
    }
    fn default_enumeration() -> usize {
        16
    }
    fn default_state_count() -> usize {
        500_000
    }
    fn default_path_cap() -> usize {
        1_000_000
    }
    fn default_node_budget() -> usize {
        200_000
    }
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            memo_entries: Budgets::default_memo(),
            enumeration_elements: Budgets::default_enumeration(),
            state_count: Budgets::default_state_count(),
            path_cap: Budgets::default_path_cap(),
            node_budget: Budgets::default_node_budget(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSection {
    pub n_max: u32,
    #[serde(default = "ShapeSection::default_exact")]
    pub exact_n_max: u32,
}

impl ShapeSection {
    fn default_exact() -> u32 {
        2
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub poset: PosetConfig,
    pub rates: RateConfig,
    pub targets: Vec<TargetConfig>,
    pub operation: Operation,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub shape: Option<ShapeSection>,
    /// Raw moments up to this order in oracle reports.
    #[serde(default = "default_n_max")]
    pub moment_order: u32,
}

fn default_n_max() -> u32 {
    3
}

/// Outcome summary handed to the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub operation: String,
    pub targets: usize,
    pub checks: usize,
    pub failures: usize,
    pub artifacts: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::Config("at least one target set is required".into()));
        }
        for t in &self.targets {
            match (&t.down_of, &t.elements) {
                (Some(_), None) | (None, Some(_)) => {}
                _ => {
                    return Err(Error::Config(
                        "each target needs exactly one of `down_of` or `elements`".into(),
                    ))
                }
            }
        }
        let needs_seed = match self.operation {
            Operation::Simulate => true,
            Operation::Shape => {
                let shape = self.shape.as_ref().ok_or_else(|| {
                    Error::Config("shape operation needs a `shape` section".into())
                })?;
                shape.n_max > shape.exact_n_max
            }
            _ => false,
        };
        if needs_seed {
            let has_seed = self.mc.as_ref().and_then(|m| m.seed).is_some();
            if !has_seed {
                return Err(Error::Config(
                    "stochastic operations require `mc.seed`".into(),
                ));
            }
        }
        if matches!(self.operation, Operation::Simulate) && self.mc.is_none() {
            return Err(Error::Config("simulate needs an `mc` section".into()));
        }
        Ok(())
    }

    pub fn build_poset(&self) -> Result<Arc<Poset>> {
        let poset = match &self.poset {
            PosetConfig::Lattice { d } => Poset::lattice(*d)?,
            PosetConfig::Tree { alphabet } => {
                let mut chars = Vec::new();
                for s in alphabet {
                    let mut it = s.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => chars.push(c),
                        _ => {
                            return Err(Error::Config(format!(
                                "alphabet symbols must be single characters, got '{s}'"
                            )))
                        }
                    }
                }
                Poset::tree(chars)?
            }
            PosetConfig::Cone { generators } => Poset::cone(generators.clone())?,
            PosetConfig::Columnar { labels } => Poset::columnar(labels.clone())?,
            PosetConfig::Custom { covers } => Poset::custom(covers)?,
        };
        Ok(Arc::new(poset))
    }

    pub fn build_rates(&self, poset: Arc<Poset>) -> Result<RateMap> {
        let rule = match &self.rates {
            RateConfig::Constant { lambda } => RateRule::Constant(*lambda),
            RateConfig::LevelDecay { base, gamma } => RateRule::LevelDecay {
                base: *base,
                gamma: *gamma,
            },
            RateConfig::Table { entries, default } => {
                let mut map = HashMap::new();
                for (raw, rate) in entries {
                    map.insert(parse_element(&poset, raw)?, *rate);
                }
                RateRule::Table {
                    entries: map,
                    default: *default,
                }
            }
            RateConfig::RandomUniform { lo, hi, seed } => RateRule::RandomUniform {
                lo: *lo,
                hi: *hi,
                seed: *seed,
            },
        };
        RateMap::new(poset, rule)
    }

    pub fn build_targets(&self, poset: &Arc<Poset>) -> Result<Vec<LowerSet>> {
        let mut out = Vec::with_capacity(self.targets.len());
        for t in &self.targets {
            let set = if let Some(tops) = &t.down_of {
                let elems: Result<Vec<ElementId>> =
                    tops.iter().map(|v| parse_element(poset, v)).collect();
                LowerSet::down_of_many(poset.clone(), &elems?, self.budgets.node_budget)?
            } else {
                let elems: Result<Vec<ElementId>> = t
                    .elements
                    .as_ref()
                    .unwrap()
                    .iter()
                    .map(|v| parse_element(poset, v))
                    .collect();
                LowerSet::from_elements(poset.clone(), elems?)?
            };
            out.push(set);
        }
        Ok(out)
    }
}

/// Parses an element literal per family: integer arrays for lattice, cone
/// and columnar; strings for tree words and custom node labels.
pub fn parse_element(poset: &Arc<Poset>, raw: &Value) -> Result<ElementId> {
    let id = match (poset.as_ref(), raw) {
        (Poset::Lattice { .. } | Poset::Cone(_) | Poset::Columnar { .. }, Value::Array(items)) => {
            let coords: Option<Vec<i64>> = items.iter().map(|v| v.as_i64()).collect();
            ElementId::Coords(coords.ok_or_else(|| {
                Error::Config(format!("element {raw} must be an integer array"))
            })?)
        }
        (Poset::Tree { .. }, Value::String(s)) => ElementId::word(s.clone()),
        (Poset::Custom(_), Value::String(s)) => ElementId::node(s.clone()),
        _ => {
            return Err(Error::Config(format!(
                "element literal {raw} does not fit family {}",
                poset.family_name()
            )))
        }
    };
    poset
        .validate_element(&id)
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(id)
}

/// Runs one experiment and writes its artifacts under `out_dir`.
pub fn run(config_text: &str, out_dir: &Path, emit_samples: bool) -> Result<RunSummary> {
    let config = ExperimentConfig::from_json(config_text)?;
    let poset = config.build_poset()?;
    let rates = config
        .build_rates(poset.clone())
        .map_err(|e| Error::Config(e.to_string()))?;
    let targets = config.build_targets(&poset)?;
    std::fs::create_dir_all(out_dir)?;
    let provenance = provenance_block(config_text, &config);

    match config.operation {
        Operation::Oracle => run_oracle(&config, &rates, &targets, out_dir, provenance),
        Operation::Simulate => {
            run_simulate(&config, &rates, &targets, out_dir, provenance, emit_samples)
        }
        Operation::VerifyBounds => run_verify_bounds(&config, &rates, &targets, out_dir, provenance),
        Operation::Shape => run_shape(&config, &rates, &targets, out_dir, provenance),
        Operation::Paths => run_paths(&config, &rates, &targets, out_dir, provenance),
    }
}

fn provenance_block(config_text: &str, config: &ExperimentConfig) -> Value {
    let mut hasher = Sha256::new();
    hasher.update(config_text.as_bytes());
    let digest = hasher.finalize();
    json!({
        "config_sha256": hex_string(&digest),
        "seed": config.mc.as_ref().and_then(|m| m.seed),
        "rng": RNG_ALGORITHM,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn run_oracle(
    config: &ExperimentConfig,
    rates: &RateMap,
    targets: &[LowerSet],
    out_dir: &Path,
    provenance: Value,
) -> Result<RunSummary> {
    let mut oracle = Oracle::with_memo_cap(rates.clone(), config.budgets.memo_entries);
    let mut results = Vec::new();
    for set in targets {
        let report = oracle.report(
            set,
            config.moment_order,
            &config.grids.u,
            &config.grids.t,
            config.budgets.state_count,
        )?;
        results.push(json!({
            "target": set.key().render(),
            "size": set.len(),
            "report": report,
        }));
    }
    let artifact = write_json(
        out_dir,
        "oracle.json",
        &json!({
            "operation": "oracle",
            "provenance": provenance,
            "results": results,
        }),
    )?;
    Ok(RunSummary {
        operation: "oracle".into(),
        targets: targets.len(),
        checks: 0,
        failures: 0,
        artifacts: vec![artifact],
    })
}

fn run_simulate(
    config: &ExperimentConfig,
    rates: &RateMap,
    targets: &[LowerSet],
    out_dir: &Path,
    provenance: Value,
    emit_samples: bool,
) -> Result<RunSummary> {
    let mc_cfg = config.mc.as_ref().expect("validated");
    let seed = mc_cfg.seed.expect("validated");
    let mut results = Vec::new();
    let mut artifacts = Vec::new();
    for (idx, set) in targets.iter().enumerate() {
        let est = mc::estimate(set, rates, mc_cfg.method, mc_cfg.replicas, seed)?;
        if emit_samples {
            let values = mc::sample_values(set, rates, mc_cfg.method, mc_cfg.replicas, seed)?;
            let mut lines = String::new();
            for (r, v) in values.iter().enumerate() {
                lines.push_str(&format!(
                    "{{\"replica\":{r},\"tau\":{}}}\n",
                    fmt_f64(*v)
                ));
            }
            artifacts.push(write_text(
                out_dir,
                &format!("samples_{idx}.jsonl"),
                &lines,
            )?);
        }
        results.push(json!({
            "target": set.key().render(),
            "size": set.len(),
            "estimate": est,
        }));
    }
    artifacts.insert(
        0,
        write_json(
            out_dir,
            "simulate.json",
            &json!({
                "operation": "simulate",
                "provenance": provenance,
                "results": results,
            }),
        )?,
    );
    Ok(RunSummary {
        operation: "simulate".into(),
        targets: targets.len(),
        checks: 0,
        failures: 0,
        artifacts,
    })
}

fn run_verify_bounds(
    config: &ExperimentConfig,
    rates: &RateMap,
    targets: &[LowerSet],
    out_dir: &Path,
    provenance: Value,
) -> Result<RunSummary> {
    let mut reports = Vec::new();
    for set in targets {
        reports.extend(bounds::verify_all(
            rates,
            set,
            &config.grids,
            config.budgets.enumeration_elements,
            config.budgets.state_count,
            config.budgets.memo_entries,
        )?);
        // Family-specific extra form on columnar posets.
        if set.poset().family_name() == "columnar" {
            let mut oracle = Oracle::with_memo_cap(rates.clone(), config.budgets.memo_entries);
            let b = set.poset().minimal_elements().len();
            reports.push(bounds::var_lower_bound(
                &mut oracle,
                set,
                VarLowerForm::Columnar { b },
                config.budgets.state_count,
            )?);
        }
    }
    let failures = reports.iter().filter(|r| !r.pass).count();
    let mut csv = String::from(
        "bound,set_key,rates,params,lhs,rhs,margin,reference_method,pass\n",
    );
    let mut jsonl = String::new();
    for r in &reports {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&r.bound),
            csv_field(&r.set_key),
            csv_field(&r.rates),
            csv_field(&r.params),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs),
            fmt_f64(r.margin),
            r.reference_method,
            r.pass
        ));
        jsonl.push_str(&serde_json::to_string(r)?);
        jsonl.push('\n');
    }
    let artifacts = vec![
        write_json(
            out_dir,
            "bounds.json",
            &json!({
                "operation": "verify-bounds",
                "provenance": provenance,
                "checks": reports.len(),
                "failures": failures,
            }),
        )?,
        write_text(out_dir, "bounds.csv", &csv)?,
        write_text(out_dir, "bounds.jsonl", &jsonl)?,
    ];
    Ok(RunSummary {
        operation: "verify-bounds".into(),
        targets: targets.len(),
        checks: reports.len(),
        failures,
        artifacts,
    })
}

fn run_shape(
    config: &ExperimentConfig,
    rates: &RateMap,
    targets: &[LowerSet],
    out_dir: &Path,
    provenance: Value,
) -> Result<RunSummary> {
    let section = config
        .shape
        .as_ref()
        .ok_or_else(|| Error::Config("shape operation needs a `shape` section".into()))?;
    let (replicas, seed) = match &config.mc {
        Some(m) => (m.replicas, m.seed.unwrap_or(0)),
        None => (100_000, 0),
    };
    let mut traces = Vec::new();
    let mut csv = String::from("target,n,value,stderr,method,bound\n");
    let mut failures = 0usize;
    let mut checks = 0usize;
    for set in targets {
        let mut oracle = Oracle::with_memo_cap(rates.clone(), config.budgets.memo_entries);
        let cfg = ShapeConfig {
            n_max: section.n_max,
            exact_n_max: section.exact_n_max,
            replicas,
            seed,
            node_budget: config.budgets.node_budget,
        };
        let trace = monoid::shape_trace(&mut oracle, set, &cfg)?;
        for row in &trace.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&set.key().render()),
                row.n,
                fmt_f64(row.value),
                fmt_f64(row.stderr),
                row.method,
                fmt_f64(trace.upper_bound)
            ));
        }
        checks += 2;
        if !trace.monotone_corrected_ok {
            failures += 1;
        }
        if !trace.below_bound_ok {
            failures += 1;
        }
        traces.push(json!({
            "target": set.key().render(),
            "trace": trace,
        }));
    }
    let artifacts = vec![
        write_json(
            out_dir,
            "shape.json",
            &json!({
                "operation": "shape",
                "provenance": provenance,
                "results": traces,
            }),
        )?,
        write_text(out_dir, "shape.csv", &csv)?,
    ];
    Ok(RunSummary {
        operation: "shape".into(),
        targets: targets.len(),
        checks,
        failures,
        artifacts,
    })
}

fn run_paths(
    config: &ExperimentConfig,
    rates: &RateMap,
    targets: &[LowerSet],
    out_dir: &Path,
    provenance: Value,
) -> Result<RunSummary> {
    let mut results = Vec::new();
    for set in targets {
        let stats = paths::path_stats(set, rates)?;
        // Explicit maximal paths are included while they fit the cap.
        let maximal_paths: Option<Vec<Vec<String>>> =
            match paths::enumerate_maximal_paths(set, config.budgets.path_cap) {
                Ok(list) => Some(
                    list.iter()
                        .map(|p| p.iter().map(|e| e.to_string()).collect())
                        .collect(),
                ),
                Err(Error::Budget(_)) => None,
                Err(e) => return Err(e),
            };
        results.push(json!({
            "target": set.key().render(),
            "size": set.len(),
            "stats": {
                "ell": stats.ell,
                "ell_steps": stats.ell_steps,
                "ell_star": stats.ell_star,
                "kappa": stats.kappa,
                "count_maximal": stats.count_maximal,
                "eta": stats.eta,
            },
            "maximal_paths": maximal_paths,
        }));
    }
    let artifact = write_json(
        out_dir,
        "paths.json",
        &json!({
            "operation": "paths",
            "provenance": provenance,
            "results": results,
        }),
    )?;
    Ok(RunSummary {
        operation: "paths".into(),
        targets: targets.len(),
        checks: 0,
        failures: 0,
        artifacts: vec![artifact],
    })
}

/// Serializes with 17 significant digits, enough to round-trip f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes atomically: the content lands in a temp file first and is
/// renamed into place.
fn write_text(out_dir: &Path, name: &str, content: &str) -> Result<String> {
    let target: PathBuf = out_dir.join(name);
    let tmp = out_dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, &target)?;
    Ok(target.display().to_string())
}

fn write_json(out_dir: &Path, name: &str, value: &Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out_dir, name, &text)
}

/// Supported poset families and their parameter schemas.
pub fn list_posets() -> Value {
    Poset::catalog()
}

/// Process exit code for an error, per the CLI contract: 2 for schema and
/// configuration problems, 3 for exhausted budgets, 4 otherwise. Bound
/// failures map to 1 via the run summary.
pub fn exit_code_for_error(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidElement(_)
        | Error::InvalidPoset(_)
        | Error::Domain(_)
        | Error::Precondition(_) => 2,
        Error::Budget(_) => 3,
        _ => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_config(op: &str, extra: &str) -> String {
        format!(
            r#"{{
  "poset": {{"family": "lattice", "d": 2}},
  "rates": {{"rule": "constant", "lambda": 1.0}},
  "targets": [{{"down_of": [[1, 1]]}}],
  "operation": "{op}"{extra}
}}"#
        )
    }

    #[test]
    fn parses_and_validates_basic_config() {
        let cfg = ExperimentConfig::from_json(&square_config("oracle", "")).unwrap();
        let poset = cfg.build_poset().unwrap();
        let targets = cfg.build_targets(&poset).unwrap();
        assert_eq!(targets[0].len(), 4);
    }

    #[test]
    fn missing_seed_is_a_schema_error() {
        let text = square_config(
            "simulate",
            r#", "mc": {"replicas": 1000}"#,
        );
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert_eq!(exit_code_for_error(&err), 2);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = square_config("oracle", r#", "unknown_knob": 1"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn oracle_run_writes_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&square_config("oracle", ""), dir.path(), false).unwrap();
        assert_eq!(summary.failures, 0);
        let text = std::fs::read_to_string(&summary.artifacts[0]).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["operation"], "oracle");
        let mean = value["results"][0]["report"]["mean"].as_f64().unwrap();
        assert!((mean - 3.5).abs() < 1e-9);
        assert!(value["provenance"]["config_sha256"].is_string());
    }

    #[test]
    fn simulate_run_is_byte_reproducible() {
        let text = square_config(
            "simulate",
            r#", "mc": {"replicas": 5000, "seed": 42, "method": "static-lpp"}"#,
        );
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let s1 = run(&text, d1.path(), true).unwrap();
        let s2 = run(&text, d2.path(), true).unwrap();
        for (a, b) in s1.artifacts.iter().zip(&s2.artifacts) {
            let ba = std::fs::read(a).unwrap();
            let bb = std::fs::read(b).unwrap();
            assert_eq!(ba, bb, "artifacts differ: {a} vs {b}");
        }
    }

    #[test]
    fn verify_bounds_run_passes_on_square() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&square_config("verify-bounds", ""), dir.path(), false).unwrap();
        assert!(summary.checks > 0);
        assert_eq!(summary.failures, 0);
        let csv = std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap();
        assert!(csv.lines().count() > summary.checks);
    }

    #[test]
    fn memo_budget_maps_to_exit_three() {
        let text = format!(
            r#"{{
  "poset": {{"family": "lattice", "d": 2}},
  "rates": {{"rule": "constant", "lambda": 1.0}},
  "targets": [{{"down_of": [[5, 5]]}}],
  "operation": "oracle",
  "budgets": {{"memo_entries": 1000}}
}}"#
        );
        let dir = tempfile::tempdir().unwrap();
        let err = run(&text, dir.path(), false).unwrap_err();
        assert_eq!(exit_code_for_error(&err), 3);
    }

    #[test]
    fn paths_run_emits_stats() {
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&square_config("paths", ""), dir.path(), false).unwrap();
        let text = std::fs::read_to_string(&summary.artifacts[0]).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["results"][0]["stats"]["count_maximal"], "2");
        assert_eq!(value["results"][0]["stats"]["ell"], 3);
    }

    #[test]
    fn shape_run_produces_csv() {
        let text = format!(
            r#"{{
  "poset": {{"family": "lattice", "d": 2}},
  "rates": {{"rule": "constant", "lambda": 1.0}},
  "targets": [{{"down_of": [[1, 1]]}}],
  "operation": "shape",
  "shape": {{"n_max": 3, "exact_n_max": 2}},
  "mc": {{"replicas": 20000, "seed": 9}}
}}"#
        );
        let dir = tempfile::tempdir().unwrap();
        let summary = run(&text, dir.path(), false).unwrap();
        assert_eq!(summary.failures, 0);
        let csv = std::fs::read_to_string(dir.path().join("shape.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4); // header + 3 rows
    }

    #[test]
    fn custom_poset_and_table_rates_via_config() {
        let text = r#"{
  "poset": {"family": "custom", "covers": [["a", "b"], ["a", "c"], ["b", "d"], ["c", "d"]]},
  "rates": {"rule": "table", "entries": [["a", 1.0], ["b", 2.0], ["c", 2.0], ["d", 1.0]]},
  "targets": [{"elements": ["a", "b", "c", "d"]}],
  "operation": "oracle"
}"#;
        let dir = tempfile::tempdir().unwrap();
        let summary = run(text, dir.path(), false).unwrap();
        assert_eq!(summary.targets, 1);
        let text = std::fs::read_to_string(&summary.artifacts[0]).unwrap();
        let value: Value = serde_json::from_str(&text).unwrap();
        // E = 1 + E[max of two Exp(2)] + 1 = 1 + 3/4 + 1
        let mean = value["results"][0]["report"]["mean"].as_f64().unwrap();
        assert!((mean - 2.75).abs() < 1e-9);
    }

    #[test]
    fn columnar_targets_via_config() {
        let text = r#"{
  "poset": {"family": "columnar", "labels": ["p", "q", "r"]},
  "rates": {"rule": "constant", "lambda": 1.0},
  "targets": [{"down_of": [[1, 0], [1, 1], [1, 2]]}],
  "operation": "verify-bounds"
}"#;
        let dir = tempfile::tempdir().unwrap();
        let summary = run(text, dir.path(), false).unwrap();
        assert_eq!(summary.failures, 0, "columnar bound suite");
    }

    #[test]
    fn catalog_lists_all_families() {
        let catalog = list_posets();
        let families: Vec<&str> = catalog
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["family"].as_str().unwrap())
            .collect();
        assert_eq!(
            families,
            vec!["lattice", "tree", "cone", "columnar", "custom"]
        );
    }
}
