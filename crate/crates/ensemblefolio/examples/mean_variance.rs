//! The component strategy family: long-only mean-variance portfolios from
//! rolling estimates, solved by projected gradient on the simplex.
//!
//! Sweeps the risk-appetite knob alpha from pure variance minimization to
//! return chasing, and cross-checks one solve against an exhaustive grid
//! scan of the objective.
//!
//! ```bash
//! cargo run --example mean_variance
//! ```

use ensemblefolio::strategies::{mv_grid_scan, mv_objective, mv_portfolio, RollingEstimates};

fn main() -> ensemblefolio::Result<()> {
    // three assets: low-risk/low-return, middling, high-risk/high-return,
    // with the first two positively correlated
    let mean = vec![1.0004, 1.0008, 1.0016];
    let cov = vec![
        2.0e-4, 1.5e-4, 0.0e-4, //
        1.5e-4, 5.0e-4, 1.0e-4, //
        0.0e-4, 1.0e-4, 20.0e-4,
    ];
    let est = RollingEstimates::new(mean, cov, 20)?;

    println!("alpha sweep (risk appetite rises left to right in the objective):\n");
    println!("{:>8}  {:>22}  {:>12}", "alpha", "weights", "objective");
    for alpha in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let b = mv_portfolio(&est, alpha, 1e-10)?;
        let w = b.weights();
        println!(
            "{:>8}  [{:>6.4} {:>6.4} {:>6.4}]  {:>12.6}",
            alpha,
            w[0],
            w[1],
            w[2],
            mv_objective(&est, alpha, w)
        );
    }

    let alpha = 2.0;
    let solved = mv_portfolio(&est, alpha, 1e-10)?;
    let (scanned, scan_obj) = mv_grid_scan(&est, alpha, 1000)?;
    println!("\ncross-check at alpha = {}:", alpha);
    println!("  solver     {:?}  obj {:.9}", solved.weights(), mv_objective(&est, alpha, solved.weights()));
    println!("  grid scan  {:?}  obj {:.9}", scanned.weights(), scan_obj);
    println!("\nthe solver lands at or above the best of 501501 scanned grid points;");
    println!("the scan is the independent oracle the test suite holds it against.");
    Ok(())
}
