//! Command-line front end: parse space specifications, orchestrate the
//! pipeline, and emit machine-readable JSON reports.
//!
//! Space-spec format: whitespace-separated `key=value` pairs with keys
//! `family` (so | u | su | sp), `n`, `blocks` (comma list) and `det_one`
//! (default false), e.g. `family=su n=5 blocks=2,2 det_one=true`.
//!
//! Exit codes: 0 when a verdict was computed (including CertifiedNotGO),
//! 1 on an invalid spec or argument, 2 on numerical failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::Tolerances;
use crate::error::Error;
use crate::gocheck::{
    certify_go, scan_parameters, section5_pipeline, CertifyConfig, GoVerdict, ScanReport,
};
use crate::homspace::{
    build_space_with, isotypic_decompose_with, normalizer, reductive_split, HomogeneousSpace,
    ModuleDecomposition, SpaceSpec,
};
use crate::invmetrics::{
    apply_normalizer_constraint, default_grid, eigen_constraints, instantiate, metric_space,
    MetricFamily,
};
use crate::liealg::{AlgebraVector, Family};
use crate::Result;

/// Run-wide configuration: tolerances, sampling, seed, grid, output.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub tol: Tolerances,
    pub samples: usize,
    pub seed: u64,
    /// Explicit per-parameter grid values; defaults are used when absent.
    pub grid: Option<BTreeMap<String, Vec<f64>>>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: Tolerances::default(),
            samples: 200,
            seed: 2024,
            grid: None,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidSpec("samples must be at least 1".into()));
        }
        for (name, value) in [
            ("rel", self.tol.rel),
            ("abs", self.tol.abs),
            ("refutation", self.tol.refutation),
            ("acceptance", self.tol.acceptance),
        ] {
            if value <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "tolerance '{name}' must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn certify(&self) -> CertifyConfig {
        CertifyConfig {
            samples: self.samples,
            seed: self.seed,
            refutation: self.tol.refutation,
            acceptance: self.tol.acceptance,
        }
    }
}

/// Parses the space-spec text format, reporting the line and column of the
/// first offending token.
pub fn parse_spec(text: &str) -> Result<SpaceSpec> {
    let mut family: Option<Family> = None;
    let mut n: Option<usize> = None;
    let mut blocks: Option<Vec<usize>> = None;
    let mut det_one = false;

    for (line_idx, line) in text.lines().enumerate() {
        let mut cursor = 0;
        for token in line.split_whitespace() {
            let col = line[cursor..]
                .find(token)
                .map(|o| cursor + o + 1)
                .unwrap_or(cursor + 1);
            cursor = col - 1 + token.len();
            let err = |message: String| Error::Parse {
                line: line_idx + 1,
                column: col,
                message,
            };
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{token}'")))?;
            match key {
                "family" => {
                    family = Some(Family::from_str(value).map_err(|e| err(e.to_string()))?)
                }
                "n" => {
                    n = Some(value.parse::<usize>().map_err(|_| {
                        err(format!("n must be a positive integer, got '{value}'"))
                    })?)
                }
                "blocks" => {
                    let parsed: std::result::Result<Vec<usize>, _> =
                        value.split(',').map(|b| b.parse::<usize>()).collect();
                    blocks = Some(parsed.map_err(|_| {
                        err(format!(
                            "blocks must be comma-separated integers, got '{value}'"
                        ))
                    })?);
                }
                "det_one" => {
                    det_one = match value {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        other => {
                            return Err(err(format!(
                                "det_one must be true or false, got '{other}'"
                            )))
                        }
                    }
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
    }

    let family = family.ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing 'family'".into(),
    })?;
    let n = n.ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing 'n'".into(),
    })?;
    let blocks = blocks.ok_or_else(|| Error::Parse {
        line: 1,
        column: 1,
        message: "missing 'blocks'".into(),
    })?;
    SpaceSpec::new(family, n, blocks, det_one)
}

/// Which reduction stage of the metric family to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyStage {
    /// The raw equivariant family from the commutant.
    Full,
    /// After the normalizer block constraint.
    Normalizer,
    /// After the normalizer and eigenvalue constraints.
    Reduced,
}

#[derive(Parser, Debug)]
#[command(
    name = "gomet",
    about = "Invariant metrics and geodesic-orbit certification on compact homogeneous spaces",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CommonOpts {
    /// Random directions sampled per certification.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// RNG seed; reports are bit-identical for a fixed seed.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Acceptance threshold on relative residuals.
    #[arg(long = "tol-accept", default_value_t = 1e-9)]
    pub tol_accept: f64,
    /// Refutation threshold on relative residuals.
    #[arg(long = "tol-refute", default_value_t = 1e-6)]
    pub tol_refute: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Space dimensions, normalizer, and module decomposition.
    Describe {
        /// Space spec, e.g. "family=su n=5 blocks=2,2 det_one=true".
        spec: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// The invariant-metric family and its reductions.
    Metrics {
        spec: String,
        #[arg(long, value_enum, default_value_t = FamilyStage::Reduced)]
        stage: FamilyStage,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Certify a single instantiated metric (normal metric by default).
    Check {
        spec: String,
        /// Metric parameter, repeatable: --param mu=2
        #[arg(long = "param", value_parser = parse_key_value)]
        params: Vec<(String, f64)>,
        #[arg(long, value_enum, default_value_t = FamilyStage::Reduced)]
        stage: FamilyStage,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Certify every point of a parameter grid.
    Scan {
        spec: String,
        /// Grid range per parameter, repeatable: --grid mu=0.25:4:7
        #[arg(long = "grid", value_parser = parse_grid_range)]
        grid: Vec<(String, Vec<f64>)>,
        #[arg(long, value_enum, default_value_t = FamilyStage::Reduced)]
        stage: FamilyStage,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the SU(5)/S(U(2)xU(2)) end-to-end pipeline.
    Section5 {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_key_value(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let value: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.to_string(), value))
}

fn parse_grid_range(s: &str) -> std::result::Result<(String, Vec<f64>), String> {
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=start:stop:count, got '{s}'"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:count, got '{range}'"));
    }
    let start: f64 = parts[0].parse().map_err(|_| "bad start".to_string())?;
    let stop: f64 = parts[1].parse().map_err(|_| "bad stop".to_string())?;
    let count: usize = parts[2].parse().map_err(|_| "bad count".to_string())?;
    if count == 0 {
        return Err("count must be at least 1".into());
    }
    let values = if count == 1 {
        vec![start]
    } else {
        (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect()
    };
    Ok((name.to_string(), values))
}

/// Rounds to 12 significant digits, the report serialization contract.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Recursively rounds every number in a JSON value to 12 significant digits.
fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64() {
                    return serde_json::Number::from_f64(sig12(f))
                        .map(Value::Number)
                        .unwrap_or(Value::Null);
                }
            }
            Value::Number(n)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn vector_json(v: &AlgebraVector) -> Value {
    let mut map = Map::new();
    for (label, c) in v.labelled_coeffs(1e-14) {
        if let Some(n) = serde_json::Number::from_f64(sig12(c)) {
            map.insert(label, Value::Number(n));
        }
    }
    Value::Object(map)
}

fn verdict_json(v: &GoVerdict) -> Value {
    let mut obj = json!({
        "kind": format!("{:?}", v.kind),
        "samples": v.samples,
        "max_residual": v.max_residual,
        "seed": v.seed,
    });
    if let Some(w) = &v.witness {
        obj["witness"] = json!({
            "x": vector_json(&w.x),
            "a": vector_json(&w.a),
            "residual": w.residual,
            "relative_residual": w.relative_residual,
        });
    }
    obj
}

fn config_json(config: &RunConfig) -> Value {
    json!({
        "samples": config.samples,
        "seed": config.seed,
        "tolerances": {
            "rel": config.tol.rel,
            "abs": config.tol.abs,
            "refutation": config.tol.refutation,
            "acceptance": config.tol.acceptance,
        },
        "note": "ProbablyGO is a probabilistic certificate over sampled directions",
    })
}

fn decomposition_json(space: &HomogeneousSpace, decomp: &ModuleDecomposition) -> Value {
    let summands: Vec<Value> = decomp
        .summands
        .iter()
        .map(|s| {
            json!({
                "dim": s.dim,
                "class_id": s.class_id,
                "in_n": s.in_n,
                "basis": s.basis.iter().map(vector_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "dim_g": space.g.dim,
        "dim_h": space.dim_h(),
        "dim_m": space.dim_m(),
        "n_dim": decomp.n_dim,
        "summand_dims": decomp.dims(),
        "summands": summands,
        "normalizer_summand_dims": decomp
            .normalizer_summands
            .iter()
            .map(|s| s.dim)
            .collect::<Vec<_>>(),
        "warnings": space.spec.warnings(),
    })
}

fn family_json(family: &MetricFamily) -> Value {
    serde_json::to_value(family.summary()).unwrap_or(Value::Null)
}

struct Pipeline {
    space: HomogeneousSpace,
    decomp: ModuleDecomposition,
    family: MetricFamily,
}

fn build_pipeline(spec: &SpaceSpec, config: &RunConfig, stage: FamilyStage) -> Result<Pipeline> {
    let space = build_space_with(spec, config.tol)?;
    let norm_basis = normalizer(&space)?;
    let split = reductive_split(&space, &norm_basis)?;
    let decomp = isotypic_decompose_with(&space, &norm_basis, &split, config.seed)?;
    let full = metric_space(&space, &decomp)?;
    let family = match stage {
        FamilyStage::Full => full,
        FamilyStage::Normalizer => apply_normalizer_constraint(&space, &decomp, &split, &full)?,
        FamilyStage::Reduced => {
            let constrained = apply_normalizer_constraint(&space, &decomp, &split, &full)?;
            eigen_constraints(&space, &decomp, &constrained)?
        }
    };
    Ok(Pipeline {
        space,
        decomp,
        family,
    })
}

fn scan_json(report: &ScanReport) -> Value {
    json!({
        "space": report.space,
        "family_parameters": report.family_parameters,
        "grid": report.grid,
        "verdicts": report.verdicts.iter().map(verdict_json).collect::<Vec<_>>(),
        "passing_set": report.passing_points(),
        "seed": report.seed,
    })
}

/// Builds the report for a parsed command. Used by both the binary and the
/// Python bindings.
pub fn run_command(command: &Command) -> Result<(Value, RunConfig)> {
    let common = match command {
        Command::Describe { common, .. }
        | Command::Metrics { common, .. }
        | Command::Check { common, .. }
        | Command::Scan { common, .. }
        | Command::Section5 { common } => common.clone(),
    };
    let mut config = RunConfig {
        samples: common.samples,
        seed: common.seed,
        output_path: common.out.clone(),
        ..RunConfig::default()
    };
    config.tol.acceptance = common.tol_accept;
    config.tol.refutation = common.tol_refute;
    config.validate()?;

    let report = match command {
        Command::Describe { spec, .. } => {
            let spec = parse_spec(spec)?;
            let pipe = build_pipeline(&spec, &config, FamilyStage::Reduced)?;
            json!({
                "space": spec.to_string(),
                "config": config_json(&config),
                "decomposition": decomposition_json(&pipe.space, &pipe.decomp),
            })
        }
        Command::Metrics { spec, stage, .. } => {
            let spec = parse_spec(spec)?;
            let pipe = build_pipeline(&spec, &config, *stage)?;
            json!({
                "space": spec.to_string(),
                "config": config_json(&config),
                "decomposition": decomposition_json(&pipe.space, &pipe.decomp),
                "metric_family": family_json(&pipe.family),
            })
        }
        Command::Check {
            spec,
            params,
            stage,
            ..
        } => {
            let spec = parse_spec(spec)?;
            let pipe = build_pipeline(&spec, &config, *stage)?;
            let params: BTreeMap<String, f64> = params.iter().cloned().collect();
            let lambda = instantiate(&pipe.family, &params)?;
            let verdict = certify_go(&pipe.space, &lambda, &pipe.decomp, &config.certify())?;
            json!({
                "space": spec.to_string(),
                "config": config_json(&config),
                "decomposition": decomposition_json(&pipe.space, &pipe.decomp),
                "metric_family": family_json(&pipe.family),
                "parameters": params,
                "verdicts": [verdict_json(&verdict)],
                "witnesses": verdict.witness.iter().map(|w| json!({
                    "x": vector_json(&w.x),
                    "a": vector_json(&w.a),
                    "residual": w.residual,
                })).collect::<Vec<_>>(),
            })
        }
        Command::Scan {
            spec, grid, stage, ..
        } => {
            let spec = parse_spec(spec)?;
            let pipe = build_pipeline(&spec, &config, *stage)?;
            let points = if grid.is_empty() {
                default_grid(&pipe.family)
            } else {
                let names: Vec<String> = grid.iter().map(|(n, _)| n.clone()).collect();
                for name in &names {
                    if !pipe.family.parameter_names().contains(name) {
                        return Err(Error::InvalidArgument(format!(
                            "grid parameter '{name}' is not in the family ({})",
                            pipe.family.parameter_names().join(", ")
                        )));
                    }
                }
                let mut points = vec![BTreeMap::new()];
                for (name, values) in grid {
                    let mut next = Vec::new();
                    for p in &points {
                        for &v in values {
                            let mut q = p.clone();
                            q.insert(name.clone(), v);
                            next.push(q);
                        }
                    }
                    points = next;
                }
                points
            };
            let report = scan_parameters(
                &pipe.space,
                &pipe.family,
                &pipe.decomp,
                &points,
                &config.certify(),
            )?;
            let witnesses: Vec<Value> = report
                .grid
                .iter()
                .zip(&report.verdicts)
                .filter_map(|(point, v)| {
                    v.witness.as_ref().map(|w| {
                        json!({
                            "params": point,
                            "x": vector_json(&w.x),
                            "a": vector_json(&w.a),
                            "residual": w.residual,
                        })
                    })
                })
                .collect();
            json!({
                "space": spec.to_string(),
                "config": config_json(&config),
                "decomposition": decomposition_json(&pipe.space, &pipe.decomp),
                "metric_family": family_json(&pipe.family),
                "scan": scan_json(&report),
                "verdicts": report.verdicts.iter().map(verdict_json).collect::<Vec<_>>(),
                "witnesses": witnesses,
                "derived_answers": {
                    "passing_set": report.passing_points(),
                    "note": "derived by the certifier, not asserted ground truth",
                },
            })
        }
        Command::Section5 { .. } => {
            let report = section5_pipeline(&config.certify())?;
            let value = serde_json::to_value(&report)
                .map_err(|e| Error::Numerical(format!("report serialization failed: {e}")))?;
            json!({
                "space": report.space,
                "config": config_json(&config),
                "section5": value,
                "lemma_5_1": value_path(&value, "lemma_5_1"),
                "derived_answers": {
                    "mu_passing_set": report.derived_mu_passing_set,
                    "note": report.derived_note,
                },
            })
        }
    };
    Ok((round_value(report), config))
}

fn value_path(v: &Value, key: &str) -> Value {
    v.get(key).cloned().unwrap_or(Value::Null)
}

/// Executes a command and writes the report; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match run_command(&cli.command) {
        Ok((report, config)) => {
            let text = serde_json::to_string_pretty(&report)
                .unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"));
            match &config.output_path {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write report to {}: {e}", path.display());
                        return 2;
                    }
                    println!("report written to {}", path.display());
                }
                None => println!("{text}"),
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidSpec(_) | Error::InvalidArgument(_) | Error::Parse { .. } => 1,
                _ => 2,
            }
        }
    }
}
