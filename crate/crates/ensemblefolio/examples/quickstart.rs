//! Smallest end-to-end use of the library: synthesize a return series,
//! run two mean-variance components side by side with the combining
//! ensembles, and print where the wealth ends up.
//!
//! ```bash
//! cargo run --example quickstart
//! ```

use ensemblefolio::cli::DEFAULT_BAND;
use ensemblefolio::ensemble::{EnsembleEngine, EnsembleKind};
use ensemblefolio::market_data::{default_regime, synth_returns};
use ensemblefolio::simplex_grid::enumerate_grid;
use ensemblefolio::strategies::{estimates_at, mv_portfolio};

fn main() -> ensemblefolio::Result<()> {
    let assets = 4;
    let window = 20;
    let periods = 500;
    let returns = synth_returns(assets, window + periods, &default_regime(), 7, DEFAULT_BAND)?;

    // one cautious and one aggressive mean-variance component
    let alphas = [0.005, 1.0];
    let grid = enumerate_grid(alphas.len(), 100)?;
    let kinds = vec![EnsembleKind::Uc, EnsembleKind::Wae, EnsembleKind::Fl];
    let mut engine = EnsembleEngine::new(assets, alphas.len(), kinds, Some(grid), None)?;

    let mut last = None;
    for p in 0..periods {
        let est = estimates_at(&returns, window + p + 1, window)?;
        let comps = alphas
            .iter()
            .map(|&a| mv_portfolio(&est, a, 1e-10))
            .collect::<ensemblefolio::Result<Vec<_>>>()?;
        last = Some(engine.step(&comps, returns.row(window + p))?);
    }
    let rec = last.expect("at least one period");

    println!("after {} periods on {} synthetic assets:", periods, assets);
    for (i, &a) in alphas.iter().enumerate() {
        println!(
            "  component alpha={:<6} log wealth {:+.4}  (x{:.3})",
            a,
            rec.comp_log_wealth[i],
            rec.comp_log_wealth[i].exp()
        );
    }
    for (i, kind) in engine.kinds().iter().enumerate() {
        println!(
            "  ensemble  {:<12} log wealth {:+.4}  (x{:.3})",
            kind.name(),
            rec.ens_log_wealth[i],
            rec.ens_log_wealth[i].exp()
        );
    }
    println!(
        "\nthe mixture tracks the better component without knowing in advance which one it is;"
    );
    println!("see regret_bounds for the guarantee behind that.");
    Ok(())
}
