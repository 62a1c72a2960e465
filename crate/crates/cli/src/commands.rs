//! The four subcommands. Each takes parsed options and writes its files
//! under the output directory.

use std::path::{Path, PathBuf};

use panelqr::diagnostics::summarize_series;
use panelqr::effects::{compute_effects, Contrast, EffectOptions, EffectResult};
use panelqr::model::RunMeta;
use panelqr::simgen::{generate, CovariateDist, SimSpec};
use panelqr::{run_chain, Algorithm, Error, ModelSpec, PanelData, Prior, Result, RngStream, SamplerConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ConfigDoc;
use crate::io::{ingest_panel_csv, read_draws_csv, write_draws_csv, write_panel_csv};

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Data(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Seed of the chain at quantile `p`, derived from the run seed so that
/// each quantile gets its own stream regardless of the order of the list.
pub fn quantile_seed(seed: u64, p: f64) -> u64 {
    RngStream::new(seed).substream((p * 1e6).round() as u64).next_u64()
}

#[derive(Debug, Clone, Serialize)]
pub struct Truth {
    pub quantile: f64,
    pub seed: u64,
    pub n: usize,
    pub t_min: usize,
    pub t_max: usize,
    pub observations: usize,
    pub beta: Vec<f64>,
    pub zeta: Vec<f64>,
    pub sigma_alpha_sq: f64,
    pub mundlak: Vec<String>,
    pub zeros: usize,
    pub ones: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SimulateArgs {
    pub out: PathBuf,
    pub quantile: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

pub fn simulate(doc: &ConfigDoc, args: &SimulateArgs) -> Result<Truth> {
    let seed = doc.resolve_seed(args.seed)?;
    let p = match args.quantile {
        Some(p) => p,
        None => doc.f64_or("sim.quantile", 0.5)?,
    };
    let mut sim = SimSpec::reference(p, seed);
    sim.n = args.n.map_or_else(|| doc.usize_or("sim.n", sim.n), Ok)?;
    sim.t_min = doc.usize_or("sim.t_min", sim.t_min)?;
    sim.t_max = doc.usize_or("sim.t_max", sim.t_max)?;
    sim.sigma_alpha_sq = doc.f64_or("sim.sigma_alpha_sq", sim.sigma_alpha_sq)?;
    if let Some(b) = doc.f64_list("sim.beta")? {
        sim.beta = b;
    }
    if let Some(z) = doc.f64_list("sim.zeta")? {
        sim.zeta = z;
    }
    let low = doc.f64_or("sim.low", -2.0)?;
    let high = doc.f64_or("sim.high", 2.0)?;
    for c in &mut sim.covariates {
        c.dist = CovariateDist::Uniform { low, high };
    }
    sim.validate()?;

    let out = generate(&sim, &mut RngStream::new(seed))?;
    ensure_dir(&args.out)?;
    write_panel_csv(&args.out.join("data.csv"), &out.data)?;
    let truth = Truth {
        quantile: p,
        seed,
        n: sim.n,
        t_min: sim.t_min,
        t_max: sim.t_max,
        observations: out.data.total(),
        beta: sim.beta.clone(),
        zeta: sim.zeta.clone(),
        sigma_alpha_sq: sim.sigma_alpha_sq,
        mundlak: sim.mundlak_cols.iter().map(|&c| out.data.columns()[c].clone()).collect(),
        zeros: out.counts.0,
        ones: out.counts.1,
    };
    write_json(&args.out.join("truth.json"), &truth)?;
    Ok(truth)
}

/// A covariate transformation applied after ingestion, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Transform {
    /// Subtract the pooled mean; `mean` is filled in when applied.
    Demean { column: String, mean: Option<f64> },
    Scale { column: String, factor: f64 },
}

impl Transform {
    /// Parses `col` for demeaning or `col:factor` for scaling.
    pub fn parse_scale(spec: &str) -> Result<Self> {
        let (col, f) = spec
            .split_once(':')
            .ok_or_else(|| Error::config("--scale", format!("expected column:factor, got `{spec}`")))?;
        let factor = f
            .parse()
            .map_err(|_| Error::config("--scale", format!("`{f}` is not a number")))?;
        Ok(Transform::Scale { column: col.to_string(), factor })
    }
}

fn column_of(data: &PanelData, name: &str, field: &str) -> Result<usize> {
    match data.column_index(name) {
        Some(0) | None => Err(Error::config(field, format!("no covariate named `{name}`"))),
        Some(c) => Ok(c),
    }
}

/// Applies the transforms and returns them with demeaning constants filled.
pub fn apply_transforms(data: &mut PanelData, transforms: &[Transform]) -> Result<Vec<Transform>> {
    transforms
        .iter()
        .map(|t| match t {
            Transform::Demean { column, .. } => {
                let c = column_of(data, column, "demean")?;
                let mean = data.demean_column(c)?;
                Ok(Transform::Demean { column: column.clone(), mean: Some(mean) })
            }
            Transform::Scale { column, factor } => {
                let c = column_of(data, column, "scale")?;
                data.scale_column(c, *factor)?;
                Ok(t.clone())
            }
        })
        .collect()
}

/// Replays transforms recorded in a meta file, reusing the stored means.
fn replay_transforms(data: &mut PanelData, transforms: &[Transform]) -> Result<()> {
    for t in transforms {
        match t {
            Transform::Demean { column, mean } => {
                let c = column_of(data, column, "demean")?;
                let actual = data.demean_column(c)?;
                if let Some(m) = mean {
                    if (actual - m).abs() > 1e-9 * (1.0 + m.abs()) {
                        return Err(Error::Data(format!(
                            "column `{column}` has mean {actual}, the fit recorded {m}; is this the same data file?"
                        )));
                    }
                }
            }
            Transform::Scale { column, factor } => {
                let c = column_of(data, column, "scale")?;
                data.scale_column(c, *factor)?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorEcho {
    pub beta_var: f64,
    pub zeta_var: f64,
    pub c1: f64,
    pub d1: f64,
}

/// Contents of `meta_<p>.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitMeta {
    pub quantile: f64,
    pub run_seed: u64,
    pub seed: u64,
    pub algorithm: String,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub kept: usize,
    pub store_alpha: bool,
    pub wall_time_secs: f64,
    pub data: String,
    pub n: usize,
    pub observations: usize,
    pub zeros: usize,
    pub ones: usize,
    pub columns: Vec<String>,
    pub mundlak: Vec<String>,
    pub transforms: Vec<Transform>,
    pub prior: PriorEcho,
    pub config: Value,
}

impl FitMeta {
    fn run_meta(&self) -> Result<RunMeta> {
        Ok(RunMeta {
            quantile: self.quantile,
            seed: self.seed,
            algorithm: self.algorithm.parse()?,
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            wall_time_secs: self.wall_time_secs,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct FitArgs {
    pub data: PathBuf,
    pub out: PathBuf,
    pub quantiles: Vec<f64>,
    pub algorithm: Option<Algorithm>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub seed: Option<u64>,
    pub no_store_alpha: bool,
    pub mundlak: Option<Vec<String>>,
    pub transforms: Vec<Transform>,
}

pub fn draws_file_name(p: f64) -> String {
    format!("draws_{p}.csv")
}

pub fn meta_file_name(p: f64) -> String {
    format!("meta_{p}.json")
}

/// Meta file written next to a draws file by `fit`.
pub fn meta_path_for(draws: &Path) -> Result<PathBuf> {
    let name = draws.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let p = name
        .strip_prefix("draws_")
        .and_then(|s| s.strip_suffix(".csv"))
        .ok_or_else(|| Error::config("draws", format!("expected a file named draws_<p>.csv, got `{name}`")))?;
    Ok(draws.with_file_name(format!("meta_{p}.json")))
}

pub fn fit(doc: &mut ConfigDoc, args: &FitArgs) -> Result<Vec<FitMeta>> {
    // flags win over the document; fold them in so the echo is complete
    if !args.quantiles.is_empty() {
        doc.set("quantiles", json!(args.quantiles));
    }
    if let Some(a) = args.algorithm {
        doc.set("algorithm", json!(a.as_str()));
    }
    for (key, v) in [("iterations", args.iterations), ("burn_in", args.burn_in), ("thin", args.thin)] {
        if let Some(v) = v {
            doc.set(key, json!(v));
        }
    }
    if args.no_store_alpha {
        doc.set("store_alpha", json!(false));
    }
    if let Some(m) = &args.mundlak {
        doc.set("mundlak", json!(m));
    }
    let seed = doc.resolve_seed(args.seed)?;
    doc.set("seed", json!(seed));

    let quantiles = doc.f64_list("quantiles")?.unwrap_or_else(|| vec![0.5]);
    if quantiles.is_empty() {
        return Err(Error::config("quantiles", "at least one quantile is required"));
    }
    for &p in &quantiles {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::config("quantiles", format!("{p} is not in (0, 1)")));
        }
    }
    let defaults = SamplerConfig::default();
    let base = SamplerConfig {
        iterations: doc.usize_or("iterations", defaults.iterations)?,
        burn_in: doc.usize_or("burn_in", defaults.burn_in)?,
        thin: doc.usize_or("thin", defaults.thin)?,
        seed,
        algorithm: doc.algorithm_or("algorithm", defaults.algorithm)?,
        store_alpha: doc.bool_or("store_alpha", defaults.store_alpha)?,
    };
    base.validate()?;

    let mundlak = doc.string_list("mundlak")?;
    let mut data = ingest_panel_csv(&args.data, mundlak.as_deref())?;
    let transforms = apply_transforms(&mut data, &args.transforms)?;
    let prior_echo = PriorEcho {
        beta_var: doc.f64_or("prior.beta_var", 1e3)?,
        zeta_var: doc.f64_or("prior.zeta_var", 1e3)?,
        c1: doc.f64_or("prior.c1", 10.0)?,
        d1: doc.f64_or("prior.d1", 9.0)?,
    };
    let prior = Prior::isotropic(data.k(), data.q(), prior_echo.beta_var, prior_echo.zeta_var, prior_echo.c1, prior_echo.d1);
    let (zeros, ones) = data.class_counts();
    ensure_dir(&args.out)?;

    let mut metas = Vec::with_capacity(quantiles.len());
    for &p in &quantiles {
        let spec = ModelSpec::new(p, &prior).map_err(|e| match e {
            Error::Domain(m) => Error::config("quantiles", m),
            other => other,
        })?;
        let config = SamplerConfig { seed: quantile_seed(seed, p), ..base.clone() };
        let draws = run_chain(&data, &spec, &config)?;
        write_draws_csv(&args.out.join(draws_file_name(p)), &draws)?;
        let meta = FitMeta {
            quantile: p,
            run_seed: seed,
            seed: config.seed,
            algorithm: config.algorithm.as_str().to_string(),
            iterations: config.iterations,
            burn_in: config.burn_in,
            thin: config.thin,
            kept: draws.len(),
            store_alpha: config.store_alpha,
            wall_time_secs: draws.meta.wall_time_secs,
            data: args.data.display().to_string(),
            n: data.n(),
            observations: data.total(),
            zeros,
            ones,
            columns: data.columns().to_vec(),
            mundlak: data.mundlak_cols().iter().map(|&c| data.columns()[c].clone()).collect(),
            transforms: transforms.clone(),
            prior: prior_echo.clone(),
            config: doc.as_json(),
        };
        write_json(&args.out.join(meta_file_name(p)), &meta)?;
        metas.push(meta);
    }
    Ok(metas)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub hpdi_lo: f64,
    pub hpdi_hi: f64,
    #[serde(rename = "if")]
    pub inefficiency: f64,
    pub geweke_z: f64,
    pub acf1: f64,
    pub acf5: f64,
    pub acf10: f64,
}

pub const SUMMARY_HEADER: [&str; 11] =
    ["name", "mean", "std", "median", "hpdi_lo", "hpdi_hi", "if", "geweke_z", "acf1", "acf5", "acf10"];

pub fn diagnose(draws_path: &Path, out: &Path) -> Result<Vec<SummaryRow>> {
    let table = read_draws_csv(draws_path)?;
    let mut rows = Vec::new();
    for (name, series) in table.parameters() {
        let s = summarize_series(&name, &series)?;
        if s.inefficiency_degenerate {
            log::warn!("{name} is constant; its inefficiency factor is reported as 1");
        }
        rows.push(SummaryRow {
            name: s.name,
            mean: s.mean,
            std: s.std,
            median: s.median,
            hpdi_lo: s.hpdi_lo,
            hpdi_hi: s.hpdi_hi,
            inefficiency: s.inefficiency,
            geweke_z: s.geweke_z,
            acf1: s.acf1,
            acf5: s.acf5,
            acf10: s.acf10,
        });
    }
    ensure_dir(out)?;
    let csv_path = out.join("summary.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::Data(format!("{}: {e}", csv_path.display())))?;
    let werr = |e: csv::Error| Error::Data(format!("{}: {e}", csv_path.display()));
    w.write_record(SUMMARY_HEADER).map_err(werr)?;
    for r in &rows {
        let vals = [r.mean, r.std, r.median, r.hpdi_lo, r.hpdi_hi, r.inefficiency, r.geweke_z, r.acf1, r.acf5, r.acf10];
        let mut rec = vec![r.name.clone()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(werr)?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let within = rows.iter().filter(|r| r.geweke_z.abs() < 2.58).count();
    write_json(
        &out.join("summary.json"),
        &json!({
            "draws": draws_path.display().to_string(),
            "kept": table.rows.len(),
            "geweke_share_within_2_58": within as f64 / rows.len().max(1) as f64,
            "parameters": rows,
        }),
    )?;
    Ok(rows)
}

#[derive(Debug, Clone, Default)]
pub struct EffectsArgs {
    pub data: PathBuf,
    pub draws: Vec<PathBuf>,
    pub covariate: String,
    pub from: f64,
    pub to: f64,
    pub out: PathBuf,
    pub subsample: Option<usize>,
    pub seed: Option<u64>,
}

fn effect_json(r: &EffectResult) -> Value {
    json!({
        "mean": r.mean,
        "std": r.std,
        "hpdi": r.hpdi.map(|(lo, hi)| vec![lo, hi]),
    })
}

pub fn effects(doc: &ConfigDoc, args: &EffectsArgs) -> Result<Value> {
    if args.draws.is_empty() {
        return Err(Error::config("draws", "at least one draws file is required"));
    }
    let options = EffectOptions {
        subsample: match args.subsample {
            None => None,
            Some(m) => Some((m, doc.resolve_seed(args.seed)?)),
        },
    };
    let mut blocks = Vec::new();
    for path in &args.draws {
        let meta: FitMeta = read_json(&meta_path_for(path)?)?;
        let mut data = ingest_panel_csv(&args.data, Some(&meta.mundlak))?;
        replay_transforms(&mut data, &meta.transforms)?;
        let column = column_of(&data, &args.covariate, "covariate")?;
        let contrast = Contrast::new(column, args.from, args.to)?;
        let draws = read_draws_csv(path)?.into_draws(meta.run_meta()?)?;
        let e = compute_effects(&draws, &data, &contrast, &options)?;
        blocks.push(json!({
            "quantile": meta.quantile,
            "draws": path.display().to_string(),
            "ame": effect_json(&e.ame),
            "rr": effect_json(&e.rr),
            "or": effect_json(&e.or),
        }));
    }
    let doc = json!({
        "covariate": args.covariate,
        "from": args.from,
        "to": args.to,
        "blocks": blocks,
    });
    ensure_dir(&args.out)?;
    write_json(&args.out.join("effects.json"), &doc)?;
    Ok(doc)
}
