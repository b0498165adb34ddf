//! The data side: seeded synthetic gross-return series under the two
//! built-in regimes, and the CSV round trip the binary's `synth` and `run`
//! subcommands rely on.
//!
//! ```bash
//! cargo run --example synthetic_markets
//! ```

use ensemblefolio::cli::DEFAULT_BAND;
use ensemblefolio::market_data::{
    default_regime, load_returns, synth_returns, write_returns_csv, LognormalParams, RegimeSpec,
};

fn summarize(label: &str, returns: &ensemblefolio::ReturnSeries) {
    let mut log_sum = vec![0.0; returns.assets()];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in 0..returns.len() {
        for (a, &r) in returns.row(t).iter().enumerate() {
            log_sum[a] += r.ln();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let growth: Vec<f64> = log_sum.iter().map(|s| s / returns.len() as f64).collect();
    println!("{}", label);
    println!("  {} periods x {} assets, gross returns in [{:.4}, {:.4}]", returns.len(), returns.assets(), lo, hi);
    print!("  per-asset growth rates:");
    for g in growth {
        print!(" {:+.2e}", g);
    }
    println!("\n");
}

fn main() -> ensemblefolio::Result<()> {
    let calm = synth_returns(4, 2000, &default_regime(), 7, DEFAULT_BAND)?;
    summarize("iid lognormal (default regime, seed 7):", &calm);

    let switching = RegimeSpec::RegimeSwitching {
        calm: LognormalParams { drift: 5e-4, vol: 0.007 },
        turbulent: LognormalParams { drift: -4e-4, vol: 0.03 },
        stay_prob: 0.99,
        asset_spread: 0.6,
    };
    let rough = synth_returns(4, 2000, &switching, 7, DEFAULT_BAND)?;
    summarize("regime switching (sticky calm/turbulent, seed 7):", &rough);

    let again = synth_returns(4, 2000, &default_regime(), 7, DEFAULT_BAND)?;
    let identical = (0..calm.len()).all(|t| calm.row(t) == again.row(t));
    println!("same seed, same series: {}", identical);

    let path = std::env::temp_dir().join("ensemblefolio_synthetic_markets.csv");
    write_returns_csv(&path, &calm)?;
    let loaded = load_returns(&path)?;
    let round_trip = (0..calm.len()).all(|t| calm.row(t) == loaded.row(t));
    println!("csv round trip through {} preserves every value: {}", path.display(), round_trip);
    Ok(())
}
