//! The whole pipeline as the binary drives it, but from library calls:
//! configure an experiment, run it into an output directory, re-verify the
//! stored regret bounds, and read back the metrics.
//!
//! The same artifacts come out of `ensemblefolio run`; this is the
//! programmatic route.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use std::collections::BTreeMap;
use std::fs;

use ensemblefolio::cli::{self, DataSource, ExperimentConfig};
use ensemblefolio::ensemble::EnsembleKind;
use ensemblefolio::MetricsReport;

fn main() -> ensemblefolio::Result<()> {
    let config = ExperimentConfig {
        data: DataSource::Synth {
            assets: 5,
            periods: 1020,
            regime: ensemblefolio::market_data::default_regime(),
            band: cli::DEFAULT_BAND,
        },
        alphas: vec![0.005, 0.1, 1.0],
        ensembles: vec![
            EnsembleKind::Uc,
            EnsembleKind::Wae,
            EnsembleKind::Fl,
            EnsembleKind::Ucw { support_fraction: 0.25 },
        ],
        grid_step_den: 60,
        seed: 99,
        ..ExperimentConfig::default()
    };

    let out = std::env::temp_dir().join("ensemblefolio_full_pipeline");
    let manifest = cli::run(&config, &out)?;
    println!("run {} wrote:", manifest.config_hash);
    for (key, path) in &manifest.files {
        println!("  {:<12} {}", key, out.join(path).display());
    }
    println!("timings: {:?} ms\n", manifest.timings_ms);

    let report = cli::bound_check(&out)?;
    for check in &report.checks {
        println!(
            "bound re-check {:<12} {} periods, max excess {:.2e} -> {}",
            check.name,
            check.periods,
            check.max_excess,
            if check.passed { "ok" } else { "VIOLATED" }
        );
    }

    let metrics: BTreeMap<String, MetricsReport> =
        serde_json::from_str(&fs::read_to_string(out.join("metrics.json"))?)?;
    println!("\n{:<10} {:>12} {:>14} {:>10}", "strategy", "final wealth", "growth/period", "sharpe");
    for (name, m) in &metrics {
        println!(
            "{:<10} {:>12.4} {:>14.6} {:>10.4}",
            name, m.final_wealth, m.avg_growth_rate, m.sharpe
        );
    }
    Ok(())
}
