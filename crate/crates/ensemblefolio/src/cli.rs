//! Configuration-driven experiment runner and command-line front end.
//!
//! One JSON config describes a full experiment: where the gross-return
//! data comes from (CSV or a synthetic generator), the rolling window and
//! risk-aversion ladder of the mean-variance components, which ensembles
//! to run, and the grid resolutions. `run` executes it end to end and
//! writes six artifacts into the output directory:
//!
//! - `wealth.csv` per-period log and linear wealth per strategy
//! - `metrics.json` summary metrics keyed by strategy name
//! - `allocations.csv` per-period capital split over components per ensemble
//! - `lambda_best.csv` trajectory of the best grid combination in hindsight
//! - `gaps.csv` growth-rate differences between benchmark, baseline, ensembles
//! - `bounds.csv` realized regret gaps next to their guarantees
//!
//! plus `run_manifest.json` recording the config hash and timings. Reruns
//! of the same config produce byte-identical data files; only the
//! manifest's timings vary. `ENSEMBLEFOLIO_THREADS` caps the worker pool
//! without changing any output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::ensemble::{EnsembleEngine, EnsembleKind, Partition};
use crate::market_data::{
    self, default_regime, prices_to_returns, synth_returns, RegimeSpec, ReturnSeries,
};
use crate::simplex_grid::{enumerate_grid_with_cap, grid_point_count, SimplexGrid,
    DEFAULT_POINT_CAP};
use crate::strategies::{estimates_at, mv_portfolio, Portfolio};
use crate::{Error, Result};

/// Slack allowed when re-checking stored gaps against stored bounds.
const BOUND_CHECK_TOL: f64 = 1e-9;

/// Default clamp band for synthetic gross returns.
pub const DEFAULT_BAND: (f64, f64) = (0.5, 2.0);

// ===== configuration =====

/// Where the gross-return series comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// A CSV table, either prices or gross returns.
    Csv {
        path: PathBuf,
        #[serde(default)]
        format: CsvFormat,
    },
    /// Reproducible synthetic returns.
    Synth {
        assets: usize,
        periods: usize,
        #[serde(default = "default_regime")]
        regime: RegimeSpec,
        #[serde(default = "default_band")]
        band: (f64, f64),
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CsvFormat {
    #[default]
    Prices,
    Returns,
}

fn default_band() -> (f64, f64) {
    DEFAULT_BAND
}

/// Partition setup for the ensemble over base-set representatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargeScaleConfig {
    /// Disjoint component index sets covering all components.
    pub base_sets: Vec<Vec<usize>>,
    /// Per-set masses over members; uniform when omitted.
    #[serde(default)]
    pub masses: Option<Vec<Vec<f64>>>,
    /// Grid resolution on the representative simplex.
    pub grid_step_den: u32,
}

/// A complete experiment description. All fields have defaults, so `{}`
/// is a valid config describing the stock synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    /// Rolling estimation window, which is also the burn-in length.
    pub window: usize,
    /// Risk aversions, one mean-variance component per entry.
    pub alphas: Vec<f64>,
    /// Extra constant-portfolio components appended after the ladder.
    pub constant_components: Vec<Vec<f64>>,
    /// Ensembles to run side by side.
    pub ensembles: Vec<EnsembleKind>,
    /// Grid resolution on the component-combination simplex.
    pub grid_step_den: u32,
    pub large_scale: Option<LargeScaleConfig>,
    pub solver_tol: f64,
    /// Seed for the synthetic data source.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSource::Synth {
                assets: 6,
                periods: 6798,
                regime: default_regime(),
                band: DEFAULT_BAND,
            },
            window: 20,
            alphas: vec![0.005, 1.0],
            constant_components: Vec::new(),
            ensembles: vec![EnsembleKind::Uc, EnsembleKind::Wae, EnsembleKind::Fl],
            grid_step_den: 2000,
            large_scale: None,
            solver_tol: 1e-10,
            seed: 7,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {}", e)))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        ExperimentConfig::from_json(&text)
    }

    /// Total number of component strategies.
    pub fn components(&self) -> usize {
        self.alphas.len() + self.constant_components.len()
    }

    /// Strategy name per component, ladder first, constants after.
    pub fn component_names(&self) -> Vec<String> {
        self.alphas
            .iter()
            .map(|a| format!("mv_{}", a))
            .chain((0..self.constant_components.len()).map(|i| format!("const_{}", i)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::Config("alphas must not be empty".into()));
        }
        for &a in &self.alphas {
            if !a.is_finite() || a < 0.0 {
                return Err(Error::Config(format!("alpha {} must be nonnegative", a)));
            }
        }
        if self.window < 2 {
            return Err(Error::Config("window must be at least 2".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::Config("solver_tol must be positive".into()));
        }
        for (i, w) in self.constant_components.iter().enumerate() {
            Portfolio::new(w.clone())
                .map_err(|e| Error::Config(format!("constant component {}: {}", i, e)))?;
        }
        if self.ensembles.is_empty() {
            return Err(Error::Config("ensembles must not be empty".into()));
        }
        let mut names = std::collections::HashSet::new();
        for kind in &self.ensembles {
            if let EnsembleKind::Ucw { support_fraction } | EnsembleKind::Ucl { support_fraction } =
                kind
            {
                if !(*support_fraction > 0.0 && *support_fraction <= 1.0) {
                    return Err(Error::Config(format!(
                        "support fraction {} outside (0, 1]",
                        support_fraction
                    )));
                }
            }
            if !names.insert(kind.name()) {
                return Err(Error::Config(format!(
                    "duplicate ensemble kind {}",
                    kind.name()
                )));
            }
        }
        let k = self.components();
        let needs_grid = self.ensembles.iter().any(|e| {
            matches!(
                e,
                EnsembleKind::Uc | EnsembleKind::Ucw { .. } | EnsembleKind::Ucl { .. }
            )
        });
        if needs_grid {
            if self.grid_step_den == 0 {
                return Err(Error::Config("grid_step_den must be positive".into()));
            }
            let count = grid_point_count(k, self.grid_step_den)?;
            if count > DEFAULT_POINT_CAP as u128 {
                return Err(Error::Capacity {
                    count,
                    cap: DEFAULT_POINT_CAP,
                });
            }
        }
        if self.ensembles.contains(&EnsembleKind::UcLarge) {
            let ls = self.large_scale.as_ref().ok_or_else(|| {
                Error::Config("the uc_large kind needs a large_scale section".into())
            })?;
            let partition = Partition::new(ls.base_sets.clone(), ls.masses.clone())?;
            if partition.components() != k {
                return Err(Error::Config(format!(
                    "partition covers {} components, config defines {}",
                    partition.components(),
                    k
                )));
            }
            if ls.grid_step_den == 0 {
                return Err(Error::Config("large_scale grid_step_den must be positive".into()));
            }
            let count = grid_point_count(partition.n_sets(), ls.grid_step_den)?;
            if count > DEFAULT_POINT_CAP as u128 {
                return Err(Error::Capacity {
                    count,
                    cap: DEFAULT_POINT_CAP,
                });
            }
        }
        Ok(())
    }
}

/// What a completed run left behind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// FNV-1a hash of the effective config JSON.
    pub config_hash: String,
    pub engine_version: String,
    /// Output name to path, relative to the run directory.
    pub files: BTreeMap<String, PathBuf>,
    pub timings_ms: BTreeMap<String, f64>,
}

// ===== the runner =====

fn load_data(config: &ExperimentConfig) -> Result<ReturnSeries> {
    match &config.data {
        DataSource::Csv { path, format } => match format {
            CsvFormat::Prices => prices_to_returns(&market_data::load_prices(path)?),
            CsvFormat::Returns => market_data::load_returns(path),
        },
        DataSource::Synth {
            assets,
            periods,
            regime,
            band,
        } => synth_returns(*assets, *periods, regime, config.seed, *band),
    }
}

/// Component portfolios for every tradable period, ladder order then
/// constants. Period p trades on raw row `window + p - 1`.
fn component_portfolios(
    config: &ExperimentConfig,
    returns: &ReturnSeries,
) -> Result<Vec<Vec<Portfolio>>> {
    use rayon::prelude::*;
    let horizon = returns.len().saturating_sub(config.window);
    if horizon == 0 {
        return Err(Error::InsufficientData(format!(
            "{} return rows cannot cover a burn-in window of {}",
            returns.len(),
            config.window
        )));
    }
    let constants: Vec<Portfolio> = config
        .constant_components
        .iter()
        .map(|w| Portfolio::new(w.clone()))
        .collect::<Result<_>>()?;
    (1..=horizon)
        .into_par_iter()
        .map(|p| {
            let est = estimates_at(returns, config.window + p, config.window)?;
            let mut row = Vec::with_capacity(config.components());
            for &alpha in &config.alphas {
                row.push(mv_portfolio(&est, alpha, config.solver_tol)?);
            }
            row.extend(constants.iter().cloned());
            Ok(row)
        })
        .collect()
}

struct RunHistory {
    comp_names: Vec<String>,
    ens_names: Vec<String>,
    comp_logs: Vec<Vec<f64>>,
    ens_logs: Vec<Vec<f64>>,
    comp_returns: Vec<Vec<f64>>,
    ens_returns: Vec<Vec<f64>>,
    allocations: Vec<Vec<Vec<f64>>>,
    grid_best: Vec<(usize, f64)>,
    large_best: Vec<(usize, f64)>,
    epsilon: Vec<f64>,
}

fn execute(
    config: &ExperimentConfig,
    returns: &ReturnSeries,
    comps_by_period: &[Vec<Portfolio>],
) -> Result<(RunHistory, Option<SimplexGrid>, Option<SimplexGrid>)> {
    let k = config.components();
    let assets = returns.assets();
    let needs_grid = config.ensembles.iter().any(|e| {
        matches!(
            e,
            EnsembleKind::Uc | EnsembleKind::Ucw { .. } | EnsembleKind::Ucl { .. }
        )
    });
    let comp_grid = if needs_grid {
        Some(enumerate_grid_with_cap(k, config.grid_step_den, DEFAULT_POINT_CAP)?)
    } else {
        None
    };
    let large = if config.ensembles.contains(&EnsembleKind::UcLarge) {
        let ls = config.large_scale.as_ref().expect("validated");
        let partition = Partition::new(ls.base_sets.clone(), ls.masses.clone())?;
        let grid = enumerate_grid_with_cap(partition.n_sets(), ls.grid_step_den, DEFAULT_POINT_CAP)?;
        Some((partition, grid))
    } else {
        None
    };
    let large_grid = large.as_ref().map(|(_, g)| g.clone());
    let mut engine = EnsembleEngine::new(
        assets,
        k,
        config.ensembles.clone(),
        comp_grid.clone(),
        large,
    )?;

    let horizon = comps_by_period.len();
    let mut history = RunHistory {
        comp_names: config.component_names(),
        ens_names: config.ensembles.iter().map(EnsembleKind::name).collect(),
        comp_logs: Vec::with_capacity(horizon),
        ens_logs: Vec::with_capacity(horizon),
        comp_returns: Vec::with_capacity(horizon),
        ens_returns: Vec::with_capacity(horizon),
        allocations: Vec::with_capacity(horizon),
        grid_best: Vec::new(),
        large_best: Vec::new(),
        epsilon: Vec::new(),
    };
    for (p, comps) in comps_by_period.iter().enumerate() {
        let x = returns.row(config.window + p);
        let rec = engine.step(comps, x)?;
        if let Some(best) = rec.grid_best {
            history.grid_best.push((best.index, best.log_wealth));
        }
        if let Some(best) = rec.large_best {
            history.large_best.push((best.index, best.log_wealth));
        }
        if let Some(partition) = engine.partition() {
            history
                .epsilon
                .push(analysis::epsilon_n(partition, &rec.comp_log_wealth)?);
        }
        history.comp_logs.push(rec.comp_log_wealth);
        history.ens_logs.push(rec.ens_log_wealth);
        history.comp_returns.push(rec.comp_returns);
        history.ens_returns.push(rec.ens_returns);
        history.allocations.push(rec.allocations);
    }
    Ok((history, comp_grid, large_grid))
}

fn write_wealth_csv(path: &Path, h: &RunHistory) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "period")?;
    for name in h.comp_names.iter().chain(&h.ens_names) {
        write!(w, ",{}_log,{}_lin", name, name)?;
    }
    writeln!(w)?;
    for p in 0..h.comp_logs.len() {
        write!(w, "{}", p + 1)?;
        for &v in h.comp_logs[p].iter().chain(&h.ens_logs[p]) {
            write!(w, ",{},{}", v, v.exp())?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn write_metrics_json(path: &Path, h: &RunHistory) -> Result<()> {
    let mut out: BTreeMap<String, analysis::MetricsReport> = BTreeMap::new();
    let horizon = h.comp_logs.len();
    for (j, name) in h.comp_names.iter().enumerate() {
        let series: Vec<f64> = (0..horizon).map(|p| h.comp_returns[p][j]).collect();
        out.insert(
            name.clone(),
            analysis::metrics(h.comp_logs[horizon - 1][j], &series)?,
        );
    }
    for (j, name) in h.ens_names.iter().enumerate() {
        let series: Vec<f64> = (0..horizon).map(|p| h.ens_returns[p][j]).collect();
        out.insert(
            name.clone(),
            analysis::metrics(h.ens_logs[horizon - 1][j], &series)?,
        );
    }
    fs::write(path, serde_json::to_string_pretty(&out)?)?;
    Ok(())
}

fn write_allocations_csv(path: &Path, h: &RunHistory) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "period,strategy")?;
    for name in &h.comp_names {
        write!(w, ",{}", name)?;
    }
    writeln!(w)?;
    for p in 0..h.allocations.len() {
        for (j, name) in h.ens_names.iter().enumerate() {
            write!(w, "{},{}", p + 1, name)?;
            for &a in &h.allocations[p][j] {
                write!(w, ",{}", a)?;
            }
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_lambda_best_csv(
    path: &Path,
    h: &RunHistory,
    comp_grid: Option<&SimplexGrid>,
    large_grid: Option<&SimplexGrid>,
) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    let max_dim = comp_grid
        .map(SimplexGrid::dim)
        .unwrap_or(0)
        .max(large_grid.map(SimplexGrid::dim).unwrap_or(0));
    write!(w, "period,grid")?;
    for j in 0..max_dim {
        write!(w, ",l{}", j)?;
    }
    writeln!(w)?;
    let mut emit = |label: &str, grid: &SimplexGrid, best: &[(usize, f64)]| -> Result<()> {
        for (p, &(idx, _)) in best.iter().enumerate() {
            write!(w, "{},{}", p + 1, label)?;
            let point = grid.point(idx);
            for j in 0..max_dim {
                match point.get(j) {
                    Some(v) => write!(w, ",{}", v)?,
                    None => write!(w, ",")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    };
    if let Some(grid) = comp_grid {
        emit("components", grid, &h.grid_best)?;
    }
    if let Some(grid) = large_grid {
        emit("representatives", grid, &h.large_best)?;
    }
    w.flush()?;
    Ok(())
}

fn write_gaps_csv(path: &Path, h: &RunHistory, has_grid: bool) -> Result<()> {
    let horizon = h.comp_logs.len();
    let baseline = analysis::baseline_wealth(&h.comp_logs)?;
    let benchmark: Option<Vec<f64>> = if has_grid {
        Some(h.grid_best.iter().map(|&(_, w)| w).collect())
    } else {
        None
    };
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "period")?;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    if let Some(bench) = &benchmark {
        write!(w, ",benchmark_minus_baseline")?;
        columns.push(analysis::growth_gap_series(bench, &baseline)?);
    }
    for (j, name) in h.ens_names.iter().enumerate() {
        let ens: Vec<f64> = (0..horizon).map(|p| h.ens_logs[p][j]).collect();
        write!(w, ",baseline_minus_{}", name)?;
        columns.push(analysis::growth_gap_series(&baseline, &ens)?);
        if let Some(bench) = &benchmark {
            write!(w, ",benchmark_minus_{}", name)?;
            columns.push(analysis::growth_gap_series(bench, &ens)?);
        }
    }
    writeln!(w)?;
    for p in 0..horizon {
        write!(w, "{}", p + 1)?;
        for col in &columns {
            write!(w, ",{}", col[p])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn write_bounds_csv(
    path: &Path,
    h: &RunHistory,
    comp_grid: Option<&SimplexGrid>,
    large_grid: Option<&SimplexGrid>,
) -> Result<()> {
    let horizon = h.comp_logs.len();
    let k = h.comp_names.len();
    let uc_idx = h.ens_names.iter().position(|n| n == "uc");
    let large_idx = h.ens_names.iter().position(|n| n == "uc_large");
    let mut w = BufWriter::new(fs::File::create(path)?);
    write!(w, "period")?;
    let has_uc = uc_idx.is_some() && comp_grid.is_some();
    if has_uc {
        write!(w, ",gap_uc,bound_uc_grid,bound_uc_continuous")?;
    }
    let has_large = large_idx.is_some() && large_grid.is_some();
    if has_large {
        write!(w, ",gap_uc_large,bound_uc_large_grid,bound_uc_large_continuous")?;
    }
    writeln!(w)?;
    let baseline = analysis::baseline_wealth(&h.comp_logs)?;
    let n_sets = large_grid.map(SimplexGrid::dim).unwrap_or(0);
    for p in 0..horizon {
        write!(w, "{}", p + 1)?;
        if has_uc {
            let j = uc_idx.expect("checked");
            let grid = comp_grid.expect("checked");
            let gap = h.grid_best[p].1 - h.ens_logs[p][j];
            write!(
                w,
                ",{},{},{}",
                gap,
                analysis::grid_bound(grid.len()),
                analysis::small_scale_bound(k, p + 1)
            )?;
        }
        if has_large {
            let j = large_idx.expect("checked");
            let grid = large_grid.expect("checked");
            let gap = baseline[p] - h.ens_logs[p][j];
            let eps = h.epsilon[p];
            write!(
                w,
                ",{},{},{}",
                gap,
                analysis::mixture_large_bound(grid.len(), eps)?,
                analysis::large_scale_bound(n_sets, p + 1, eps)?
            )?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let canonical = serde_json::to_string(config)?;
    Ok(format!("{:016x}", crate::numeric::fnv1a64(canonical.as_bytes())))
}

/// Runs the configured experiment into `out_dir` and returns the manifest,
/// which is also written there as `run_manifest.json`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    let t_total = Instant::now();
    fs::create_dir_all(out_dir)?;

    let t = Instant::now();
    let returns = load_data(config)?;
    let load_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let comps_by_period = component_portfolios(config, &returns)?;
    let components_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let (history, comp_grid, large_grid) = execute(config, &returns, &comps_by_period)?;
    let engine_ms = t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let mut files = BTreeMap::new();
    let entries: [(&str, &str); 6] = [
        ("wealth", "wealth.csv"),
        ("metrics", "metrics.json"),
        ("allocations", "allocations.csv"),
        ("lambda_best", "lambda_best.csv"),
        ("gaps", "gaps.csv"),
        ("bounds", "bounds.csv"),
    ];
    for (key, file) in entries {
        files.insert(key.to_string(), PathBuf::from(file));
    }
    write_wealth_csv(&out_dir.join("wealth.csv"), &history)?;
    write_metrics_json(&out_dir.join("metrics.json"), &history)?;
    write_allocations_csv(&out_dir.join("allocations.csv"), &history)?;
    write_lambda_best_csv(
        &out_dir.join("lambda_best.csv"),
        &history,
        comp_grid.as_ref(),
        large_grid.as_ref(),
    )?;
    write_gaps_csv(&out_dir.join("gaps.csv"), &history, comp_grid.is_some())?;
    write_bounds_csv(
        &out_dir.join("bounds.csv"),
        &history,
        comp_grid.as_ref(),
        large_grid.as_ref(),
    )?;
    let write_ms = t.elapsed().as_secs_f64() * 1e3;

    let mut timings_ms = BTreeMap::new();
    timings_ms.insert("load".to_string(), load_ms);
    timings_ms.insert("components".to_string(), components_ms);
    timings_ms.insert("engine".to_string(), engine_ms);
    timings_ms.insert("write".to_string(), write_ms);
    timings_ms.insert("total".to_string(), t_total.elapsed().as_secs_f64() * 1e3);
    let manifest = RunManifest {
        config_hash: config_hash(config)?,
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        files,
        timings_ms,
    };
    fs::write(
        out_dir.join("run_manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

// ===== grid info =====

/// Describes a grid without materializing it: point count and what the
/// points alone would occupy in memory.
pub fn grid_info(k: usize, step_den: u32) -> Result<String> {
    let count = grid_point_count(k, step_den)?;
    let bytes = count.saturating_mul(k as u128).saturating_mul(8);
    let mb = bytes as f64 / (1024.0 * 1024.0);
    let mut out = format!(
        "grid k={} step_den={}: {} points, about {:.1} MiB of coordinates",
        k, step_den, count, mb
    );
    if count > DEFAULT_POINT_CAP as u128 {
        out.push_str(&format!(
            "\nabove the default materialization cap of {} points",
            DEFAULT_POINT_CAP
        ));
    }
    Ok(out)
}

// ===== bound re-checking =====

/// Outcome of re-checking one gap/bound column pair of a stored run.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCheckLine {
    pub name: String,
    pub periods: usize,
    pub max_excess: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheckReport {
    pub checks: Vec<BoundCheckLine>,
    pub passed: bool,
}

/// Re-reads `bounds.csv` from a run directory and verifies every stored
/// realized gap against its stored guarantee.
pub fn bound_check(run_dir: &Path) -> Result<BoundCheckReport> {
    let path = run_dir.join("bounds.csv");
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Data(format!("cannot read {}: {}", path.display(), e)))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Data("bounds.csv is empty".into()))?
        .split(',')
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let pairs = [
        ("uc", col("gap_uc"), col("bound_uc_grid")),
        ("uc_large", col("gap_uc_large"), col("bound_uc_large_grid")),
    ];
    let mut checks = Vec::new();
    for (name, gap_col, bound_col) in pairs {
        let (Some(gi), Some(bi)) = (gap_col, bound_col) else {
            continue;
        };
        let mut max_excess = f64::NEG_INFINITY;
        let mut periods = 0usize;
        for line in text.lines().skip(1) {
            let fields: Vec<&str> = line.split(',').collect();
            let parse = |i: usize| -> Result<f64> {
                fields
                    .get(i)
                    .and_then(|f| f.parse::<f64>().ok())
                    .ok_or_else(|| Error::Data(format!("bad row in bounds.csv: {}", line)))
            };
            let excess = parse(gi)? - parse(bi)?;
            max_excess = max_excess.max(excess);
            periods += 1;
        }
        if periods > 0 {
            checks.push(BoundCheckLine {
                name: name.to_string(),
                periods,
                max_excess,
                passed: max_excess <= BOUND_CHECK_TOL,
            });
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(BoundCheckReport { checks, passed })
}

// ===== command line =====

#[derive(Parser)]
#[command(
    name = "ensemblefolio",
    version,
    about = "Online ensembles of portfolio strategies with verifiable regret bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment end to end.
    Run {
        /// Experiment config JSON; defaults apply for omitted fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the effective config as JSON and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Report the size of a combination grid without materializing it.
    Grid {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        step_den: u32,
    },
    /// Re-check the stored regret bounds of a completed run.
    BoundCheck {
        /// Run directory containing bounds.csv.
        #[arg(long)]
        run: PathBuf,
    },
    /// Generate a synthetic gross-return CSV.
    Synth {
        #[arg(long)]
        assets: usize,
        #[arg(long)]
        periods: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2.0e-4)]
        drift: f64,
        #[arg(long, default_value_t = 0.012)]
        vol: f64,
        #[arg(long, default_value_t = 0.5)]
        asset_spread: f64,
    },
}

/// Prints a line, swallowing broken-pipe errors from closed readers.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout(), "{}", text);
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run {
            config,
            out,
            print_config,
        } => {
            let config = match config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            if print_config {
                emit(&serde_json::to_string_pretty(&config)?);
                return Ok(0);
            }
            let out_dir = out
                .or_else(|| config.output_dir.clone())
                .ok_or_else(|| Error::Config("no output directory: set --out or output_dir".into()))?;
            let manifest = run(&config, &out_dir)?;
            emit(&format!(
                "run complete: {} strategies over {} files in {}",
                config.components() + config.ensembles.len(),
                manifest.files.len(),
                out_dir.display()
            ));
            Ok(0)
        }
        Command::Grid { k, step_den } => {
            emit(&grid_info(k, step_den)?);
            Ok(0)
        }
        Command::BoundCheck { run } => {
            let report = bound_check(&run)?;
            if report.checks.is_empty() {
                emit("no gap/bound columns present: trivially pass");
            }
            for line in &report.checks {
                emit(&format!(
                    "{}: {} over {} periods, max excess {:e}",
                    line.name,
                    if line.passed { "pass" } else { "FAIL" },
                    line.periods,
                    line.max_excess
                ));
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Synth {
            assets,
            periods,
            seed,
            out,
            drift,
            vol,
            asset_spread,
        } => {
            let regime = RegimeSpec::IidLognormal {
                drift,
                vol,
                asset_spread,
            };
            let returns = synth_returns(assets, periods, &regime, seed, DEFAULT_BAND)?;
            market_data::write_returns_csv(&out, &returns)?;
            emit(&format!(
                "wrote {} periods x {} assets to {}",
                periods,
                assets,
                out.display()
            ));
            Ok(0)
        }
    }
}

/// Entry point used by the binary: parses arguments, applies the
/// ENSEMBLEFOLIO_THREADS cap, and maps errors to exit codes.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let outcome = match thread_cap() {
        Ok(Some(n)) => {
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(|| dispatch(cli)),
                Err(e) => Err(Error::Config(format!("cannot build thread pool: {}", e))),
            }
        }
        Ok(None) => dispatch(cli),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            e.exit_code()
        }
    }
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("ENSEMBLEFOLIO_THREADS") {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "ENSEMBLEFOLIO_THREADS must be a positive integer, got {:?}",
                        raw
                    ))
                })?;
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_round_trips() {
        let config = ExperimentConfig::default();
        config.validate().unwrap();
        let json = serde_json::to_string_pretty(&config).unwrap();
        let back = ExperimentConfig::from_json(&json).unwrap();
        assert_eq!(back, config);
        assert_eq!(config.components(), 2);
        assert_eq!(config.component_names(), vec!["mv_0.005", "mv_1"]);
    }

    #[test]
    fn empty_object_uses_all_defaults() {
        let config = ExperimentConfig::from_json("{}").unwrap();
        assert_eq!(config, ExperimentConfig::default());
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let bad = |patch: &str| {
            let text = format!("{{{}}}", patch);
            ExperimentConfig::from_json(&text).unwrap_err()
        };
        assert!(matches!(bad("\"alphas\": []"), Error::Config(_)));
        assert!(matches!(bad("\"alphas\": [-1.0]"), Error::Config(_)));
        assert!(matches!(bad("\"window\": 1"), Error::Config(_)));
        assert!(matches!(bad("\"solver_tol\": 0.0"), Error::Config(_)));
        assert!(matches!(bad("\"ensembles\": []"), Error::Config(_)));
        assert!(matches!(bad("\"unknown_field\": 1"), Error::Config(_)));
        assert!(matches!(
            bad("\"ensembles\": [{\"kind\": \"ucw\", \"support_fraction\": 0.0}]"),
            Error::Config(_)
        ));
        assert!(matches!(
            bad("\"ensembles\": [{\"kind\": \"uc\"}, {\"kind\": \"uc\"}]"),
            Error::Config(_)
        ));
        assert!(matches!(
            bad("\"ensembles\": [{\"kind\": \"uc_large\"}]"),
            Error::Config(_)
        ));
        assert!(matches!(
            bad("\"alphas\": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6], \"grid_step_den\": 200"),
            Error::Capacity { .. }
        ));
    }

    #[test]
    fn config_hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        b.seed = 8;
        assert_ne!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
    }

    #[test]
    fn grid_info_reports_counts() {
        let text = grid_info(2, 2000).unwrap();
        assert!(text.contains("2001 points"));
        let text = grid_info(2, 1).unwrap();
        assert!(text.contains("2 points"));
        let text = grid_info(4, 3).unwrap();
        assert!(text.contains("20 points"));
        let text = grid_info(6, 200).unwrap();
        assert!(text.contains("above the default materialization cap"));
    }
}
