//! Regret bounds, wealth comparisons, and summary metrics.
//!
//! The mixture ensembles come with two families of guarantees. The
//! discrete one is unconditional: a wealth mixture over G grid points
//! trails the best point by at most ln G, and the partitioned variant by
//! at most ln G - ln epsilon_n, where epsilon_n is the smallest mass a
//! base set assigns to its current best member. The continuous-form
//! counterparts grow like (k - 1) ln(n + 1) against the best combination
//! on the whole simplex and are what the curves in `BoundCurve` are
//! usually compared against. This module evaluates both, turns wealth
//! series into gap and exceedance summaries, and computes the per-strategy
//! metrics the pipeline reports.

use serde::{Deserialize, Serialize};

use crate::ensemble::{Partition, WealthLedger};
use crate::numeric::argmax;
use crate::simplex_grid::{enumerate_grid, SimplexGrid};
use crate::{Error, Result};

/// Log wealth of the best single component in hindsight.
pub fn baseline_log_wealth(comp_log_wealth: &[f64]) -> Result<f64> {
    argmax(comp_log_wealth)
        .map(|i| comp_log_wealth[i])
        .ok_or_else(|| Error::Data("no components".into()))
}

/// Per-period log wealth of the best single component: the upper envelope
/// of the component wealth histories.
pub fn baseline_wealth(comp_log_history: &[Vec<f64>]) -> Result<Vec<f64>> {
    comp_log_history.iter().map(|row| baseline_log_wealth(row)).collect()
}

/// Per-period log wealth of the best constant combination on the grid.
///
/// Requires the grid to contain every vertex so the series dominates the
/// baseline pointwise.
pub fn benchmark_wealth(grid: &SimplexGrid, grid_log_history: &[Vec<f64>]) -> Result<Vec<f64>> {
    for j in 0..grid.dim() {
        if grid.vertex_index(j).is_none() {
            return Err(Error::Data(format!(
                "grid is missing vertex {}, benchmark would not cover single components",
                j
            )));
        }
    }
    grid_log_history
        .iter()
        .map(|row| {
            if row.len() != grid.len() {
                return Err(Error::Data(format!(
                    "wealth row covers {} grid points, grid has {}",
                    row.len(),
                    grid.len()
                )));
            }
            baseline_log_wealth(row)
        })
        .collect()
}

/// Index and log wealth of the best grid point in hindsight.
pub fn best_constant_combination(
    grid: &SimplexGrid,
    grid_ledger: &WealthLedger,
) -> Result<(usize, f64)> {
    if grid.len() != grid_ledger.len() {
        return Err(Error::Data(format!(
            "grid has {} points but ledger tracks {}",
            grid.len(),
            grid_ledger.len()
        )));
    }
    let i = argmax(grid_ledger.log_wealth())
        .ok_or_else(|| Error::Data("empty grid ledger".into()))?;
    Ok((i, grid_ledger.log_wealth()[i]))
}

/// Log wealth of the best constant combination in hindsight.
///
/// Requires the grid to contain every vertex of the simplex so the value
/// is guaranteed to be at least the best single component.
pub fn benchmark_log_wealth(grid: &SimplexGrid, grid_ledger: &WealthLedger) -> Result<f64> {
    for j in 0..grid.dim() {
        if grid.vertex_index(j).is_none() {
            return Err(Error::Data(format!(
                "grid is missing vertex {}, benchmark would not cover single components",
                j
            )));
        }
    }
    best_constant_combination(grid, grid_ledger).map(|(_, w)| w)
}

/// Continuous-form regret bound against the best combination of k
/// components after n periods: (k - 1) ln(n + 1).
pub fn small_scale_bound(k: usize, n: usize) -> f64 {
    (k as f64 - 1.0) * ((n + 1) as f64).ln()
}

/// Unconditional regret bound of a wealth mixture against the best of its
/// G grid points: ln G.
pub fn grid_bound(grid_size: usize) -> f64 {
    (grid_size as f64).ln()
}

/// Continuous-form bound for the partitioned ensemble with N base sets:
/// (N - 1) ln(n + 1) - ln epsilon.
pub fn large_scale_bound(n_sets: usize, n: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((n_sets as f64 - 1.0) * ((n + 1) as f64).ln() - epsilon.ln())
}

/// Unconditional bound for the partitioned mixture over G representative
/// grid points: ln G - ln epsilon.
pub fn mixture_large_bound(grid_size: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok((grid_size as f64).ln() - epsilon.ln())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Domain(format!(
            "mass epsilon {} must be strictly positive",
            epsilon
        )));
    }
    Ok(())
}

/// The mass each base set assigns to its currently best member, minimized
/// over sets. Ties go to the lowest component index.
pub fn epsilon_n(partition: &Partition, comp_log_wealth: &[f64]) -> Result<f64> {
    if partition.components() != comp_log_wealth.len() {
        return Err(Error::Data(format!(
            "partition covers {} components, wealth vector has {}",
            partition.components(),
            comp_log_wealth.len()
        )));
    }
    let mut eps = f64::INFINITY;
    for (set, masses) in partition.base_sets().iter().zip(partition.masses()) {
        let local: Vec<f64> = set.iter().map(|&i| comp_log_wealth[i]).collect();
        let best = argmax(&local).expect("non-empty base set");
        eps = eps.min(masses[best]);
    }
    Ok(eps)
}

/// Per-period difference of average growth rates: (log a_n - log b_n) / n
/// for n = 1..=len.
pub fn growth_gap_series(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "gap series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| (x - y) / (i + 1) as f64)
        .collect())
}

/// A per-period realized regret series next to its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub periods: Vec<usize>,
    pub gap: Vec<f64>,
    pub bound: Vec<f64>,
}

impl BoundCurve {
    pub fn new(periods: Vec<usize>, gap: Vec<f64>, bound: Vec<f64>) -> Result<Self> {
        if periods.len() != gap.len() || gap.len() != bound.len() {
            return Err(Error::Data("bound curve series lengths differ".into()));
        }
        Ok(BoundCurve { periods, gap, bound })
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    /// Largest amount by which the gap exceeds the bound.
    pub fn max_excess(&self) -> f64 {
        self.gap
            .iter()
            .zip(&self.bound)
            .map(|(g, b)| g - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// First period whose gap exceeds the bound by more than `tol`.
    pub fn first_violation(&self, tol: f64) -> Option<usize> {
        self.periods
            .iter()
            .zip(self.gap.iter().zip(&self.bound))
            .find(|(_, (g, b))| *g - *b > tol)
            .map(|(p, _)| *p)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.first_violation(tol).is_none()
    }
}

/// How one log-wealth gap series behaves over time: how often it is
/// positive, where it last changed sign, and from which period on it stays
/// positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceReport {
    /// Periods with a strictly positive gap.
    pub exceed_count: usize,
    /// Last 1-based period whose sign differs from the one before it.
    pub last_crossing: Option<usize>,
    /// Earliest 1-based period from which the gap stays strictly positive.
    pub always_exceeds_from: Option<usize>,
}

/// Compares two wealth series (log or linear, the verdicts agree) and
/// summarizes where a strictly exceeds b.
pub fn exceedance_report(wealth_a: &[f64], wealth_b: &[f64]) -> Result<ExceedanceReport> {
    if wealth_a.len() != wealth_b.len() {
        return Err(Error::Data(format!(
            "wealth series lengths differ: {} vs {}",
            wealth_a.len(),
            wealth_b.len()
        )));
    }
    let positive: Vec<bool> = wealth_a.iter().zip(wealth_b).map(|(a, b)| a > b).collect();
    Ok(summarize_exceedance(&positive))
}

fn summarize_exceedance(positive: &[bool]) -> ExceedanceReport {
    let exceed_count = positive.iter().filter(|&&p| p).count();
    let last_crossing = (1..positive.len())
        .rev()
        .find(|&i| positive[i] != positive[i - 1])
        .map(|i| i + 1);
    let always_exceeds_from = if *positive.last().unwrap_or(&false) {
        let start = (0..positive.len())
            .rev()
            .find(|&i| !positive[i])
            .map(|i| i + 2)
            .unwrap_or(1);
        Some(start)
    } else {
        None
    };
    ExceedanceReport {
        exceed_count,
        last_crossing,
        always_exceeds_from,
    }
}

/// Summary statistics of one strategy's realized path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Wealth after the final period, from the compensated log ledger.
    pub final_wealth: f64,
    /// Final log wealth divided by the number of periods.
    pub avg_growth_rate: f64,
    /// Mean gross per-period return.
    pub avg_return: f64,
    /// Mean gross return over its sample standard deviation (n - 1
    /// divisor), no annualization. Infinity when the deviation is zero,
    /// which JSON carries as null.
    #[serde(with = "infinite_as_null")]
    pub sharpe: f64,
    /// True when the return series has no variation, so the Sharpe ratio
    /// is the infinity sentinel.
    pub sharpe_degenerate: bool,
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Computes the summary metrics from the final log wealth and the gross
/// per-period return series.
pub fn metrics(final_log_wealth: f64, gross_returns: &[f64]) -> Result<MetricsReport> {
    let n = gross_returns.len();
    if n == 0 {
        return Err(Error::Data("metrics need at least one period".into()));
    }
    let mean = gross_returns.iter().sum::<f64>() / n as f64;
    let std = if n >= 2 {
        let ss: f64 = gross_returns.iter().map(|r| (r - mean) * (r - mean)).sum();
        (ss / (n as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    let (sharpe, sharpe_degenerate) = if std > 0.0 {
        (mean / std, false)
    } else {
        (f64::INFINITY, true)
    };
    Ok(MetricsReport {
        final_wealth: final_log_wealth.exp(),
        avg_growth_rate: final_log_wealth / n as f64,
        avg_return: mean,
        sharpe,
        sharpe_degenerate,
    })
}

/// Result of checking that per-set dominant components make the full
/// combination grid redundant.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReduction {
    /// The pointwise-dominant member of each base set.
    pub dominators: Vec<usize>,
    /// Per-period best log wealth over the full grid on all components.
    pub full_best_log: Vec<f64>,
    /// Per-period best log wealth over the grid on the dominators only.
    pub reduced_best_log: Vec<f64>,
    /// Largest per-period absolute difference between the two.
    pub max_abs_gap: f64,
}

/// Verifies that when every base set contains a member whose return is at
/// least every other member's return in every period, the best point of
/// the full grid equals the best point of the grid over the dominant
/// members alone, period by period, at the same grid resolution.
pub fn dominance_reduction_check(
    comp_returns: &[Vec<f64>],
    partition: &Partition,
    step_den: u32,
) -> Result<DominanceReduction> {
    if comp_returns.is_empty() {
        return Err(Error::Data("no return periods".into()));
    }
    let k = partition.components();
    if comp_returns.iter().any(|row| row.len() != k) {
        return Err(Error::Data(format!(
            "each return row must cover all {} components",
            k
        )));
    }
    let mut dominators = Vec::with_capacity(partition.n_sets());
    for set in partition.base_sets() {
        let dominant = set.iter().copied().find(|&cand| {
            comp_returns
                .iter()
                .all(|row| set.iter().all(|&other| row[cand] >= row[other]))
        });
        match dominant {
            Some(d) => dominators.push(d),
            None => {
                return Err(Error::Domain(format!(
                    "base set {:?} has no member dominant in every period",
                    set
                )))
            }
        }
    }

    let full_grid = enumerate_grid(k, step_den)?;
    let reduced_grid = enumerate_grid(partition.n_sets(), step_den)?;
    let mut full_ledger = WealthLedger::new(full_grid.len())?;
    let mut reduced_ledger = WealthLedger::new(reduced_grid.len())?;
    let mut full_best_log = Vec::with_capacity(comp_returns.len());
    let mut reduced_best_log = Vec::with_capacity(comp_returns.len());
    let mut rho_full = vec![0.0; full_grid.len()];
    let mut rho_red = vec![0.0; reduced_grid.len()];
    for row in comp_returns {
        for (j, slot) in rho_full.iter_mut().enumerate() {
            *slot = crate::numeric::dot(full_grid.point(j), row);
        }
        let red_row: Vec<f64> = dominators.iter().map(|&d| row[d]).collect();
        for (j, slot) in rho_red.iter_mut().enumerate() {
            *slot = crate::numeric::dot(reduced_grid.point(j), &red_row);
        }
        full_ledger.update(&rho_full)?;
        reduced_ledger.update(&rho_red)?;
        full_best_log.push(best_constant_combination(&full_grid, &full_ledger)?.1);
        reduced_best_log.push(best_constant_combination(&reduced_grid, &reduced_ledger)?.1);
    }
    let max_abs_gap = full_best_log
        .iter()
        .zip(&reduced_best_log)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DominanceReduction {
        dominators,
        full_best_log,
        reduced_best_log,
        max_abs_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Partition;

    #[test]
    fn bound_formula_hand_values() {
        assert!((small_scale_bound(2, 1) - 2.0f64.ln()).abs() < 1e-15);
        assert!((small_scale_bound(3, 6797) - 2.0 * 6798.0f64.ln()).abs() < 1e-12);
        assert_eq!(small_scale_bound(1, 100), 0.0);
        assert!((grid_bound(2001) - 2001.0f64.ln()).abs() < 1e-15);
        assert!((large_scale_bound(2, 1, 0.5).unwrap() - 2.0 * 2.0f64.ln()).abs() < 1e-15);
        assert_eq!(large_scale_bound(1, 50, 1.0).unwrap(), 0.0);
        assert!(matches!(large_scale_bound(2, 1, 0.0), Err(Error::Domain(_))));
        let expect = 10.0f64.ln() - 0.25f64.ln();
        assert!((mixture_large_bound(10, 0.25).unwrap() - expect).abs() < 1e-12);
        assert!(matches!(mixture_large_bound(10, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn epsilon_takes_mass_of_per_set_leader() {
        let part = Partition::new(
            vec![vec![0, 1], vec![2]],
            Some(vec![vec![0.25, 0.75], vec![1.0]]),
        )
        .unwrap();
        let eps = epsilon_n(&part, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(eps, 0.25);
        let eps = epsilon_n(&part, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(eps, 0.75);
        // tie goes to the lowest index
        let eps = epsilon_n(&part, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(eps, 0.25);
        assert!(epsilon_n(&part, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn baseline_and_benchmark() {
        assert_eq!(baseline_log_wealth(&[0.1, 0.5, 0.3]).unwrap(), 0.5);
        assert!(baseline_log_wealth(&[]).is_err());

        let grid = enumerate_grid(2, 2).unwrap();
        let mut ledger = WealthLedger::new(grid.len()).unwrap();
        ledger.update(&[1.0, 3.0, 2.0]).unwrap();
        let (i, w) = best_constant_combination(&grid, &ledger).unwrap();
        assert_eq!(i, 1);
        assert!((w - 3.0f64.ln()).abs() < 1e-15);
        assert!((benchmark_log_wealth(&grid, &ledger).unwrap() - 3.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bound_curve_reports_violations() {
        let curve = BoundCurve::new(
            vec![1, 2, 3],
            vec![0.5, 1.4, 0.9],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        assert!((curve.max_excess() - 0.4).abs() < 1e-15);
        assert_eq!(curve.first_violation(1e-12), Some(2));
        assert!(!curve.holds(1e-12));
        assert!(curve.holds(0.5));
    }

    #[test]
    fn exceedance_hand_cases() {
        // six-period alternating leader, a - b = [-1, 2, -3, 1, 2, 3]
        let a = [1.0, 3.0, 0.0, 2.0, 3.0, 4.0];
        let b = [2.0, 1.0, 3.0, 1.0, 1.0, 1.0];
        let rep = exceedance_report(&a, &b).unwrap();
        assert_eq!(rep.exceed_count, 4);
        assert_eq!(rep.last_crossing, Some(4));
        assert_eq!(rep.always_exceeds_from, Some(4));

        // uniform domination
        let rep = exceedance_report(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(rep.exceed_count, 3);
        assert_eq!(rep.last_crossing, None);
        assert_eq!(rep.always_exceeds_from, Some(1));

        // identical series never strictly exceed
        let rep = exceedance_report(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(rep.exceed_count, 0);
        assert_eq!(rep.last_crossing, None);
        assert_eq!(rep.always_exceeds_from, None);

        // exceeds only at the start
        let rep = exceedance_report(&[2.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(rep.exceed_count, 1);
        assert_eq!(rep.last_crossing, Some(2));
        assert_eq!(rep.always_exceeds_from, None);

        // exceeds only at the end
        let rep = exceedance_report(&[0.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_eq!(rep.always_exceeds_from, Some(2));

        assert!(exceedance_report(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn growth_gap_divides_by_period() {
        let g = growth_gap_series(&[1.0, 2.0], &[0.5, 2.5]).unwrap();
        assert_eq!(g, vec![0.5, -0.25]);
        // constant log offset decays like c/n
        let a = [3.0, 3.0, 3.0, 3.0];
        let b = [1.0, 1.0, 1.0, 1.0];
        let g = growth_gap_series(&a, &b).unwrap();
        for (i, v) in g.iter().enumerate() {
            assert!((v - 2.0 / (i + 1) as f64).abs() < 1e-15);
        }
        assert!(growth_gap_series(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn baseline_and_benchmark_series_take_upper_envelopes() {
        let history = vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![1.0, 3.0]];
        assert_eq!(baseline_wealth(&history).unwrap(), vec![1.0, 2.0, 3.0]);

        let grid = enumerate_grid(2, 2).unwrap();
        let rows = vec![vec![0.1, 0.5, 0.3], vec![0.4, 0.2, 0.9]];
        assert_eq!(benchmark_wealth(&grid, &rows).unwrap(), vec![0.5, 0.9]);
        assert!(benchmark_wealth(&grid, &[vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn metrics_match_direct_formulas() {
        let returns = [1.1f64, 0.9, 1.2, 1.0];
        let log_final: f64 = returns.iter().map(|r| r.ln()).sum();
        let rep = metrics(log_final, &returns).unwrap();
        let mean = (1.1 + 0.9 + 1.2 + 1.0) / 4.0;
        let ss = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>();
        let std = (ss / 3.0).sqrt();
        assert!((rep.final_wealth - 1.1 * 0.9 * 1.2).abs() < 1e-12);
        assert!((rep.avg_growth_rate - log_final / 4.0).abs() < 1e-15);
        assert!((rep.avg_return - mean).abs() < 1e-15);
        assert!((rep.sharpe - mean / std).abs() < 1e-12);
        assert!(!rep.sharpe_degenerate);
        // wealth and growth rate stay consistent
        assert!((rep.final_wealth - (4.0 * rep.avg_growth_rate).exp()).abs() < 1e-9);
    }

    #[test]
    fn metrics_degenerate_when_returns_constant() {
        let rep = metrics(0.0, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(rep.sharpe, f64::INFINITY);
        assert!(rep.sharpe_degenerate);
        assert_eq!(rep.avg_return, 1.0);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"sharpe\":null"));
        let back: MetricsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
        assert!(metrics(0.0, &[]).is_err());
    }

    #[test]
    fn dominance_reduction_on_constructed_instance() {
        // components 0 and 2 dominate their sets in every period
        let returns = vec![
            vec![1.2, 1.0, 1.1, 1.05],
            vec![1.1, 0.9, 1.3, 1.2],
            vec![1.05, 1.05, 0.9, 0.85],
        ];
        let part = Partition::new(vec![vec![0, 1], vec![2, 3]], None).unwrap();
        let red = dominance_reduction_check(&returns, &part, 6).unwrap();
        assert_eq!(red.dominators, vec![0, 2]);
        assert!(red.max_abs_gap <= 1e-9, "gap {}", red.max_abs_gap);
    }

    #[test]
    fn dominance_reduction_rejects_undominated_sets() {
        let returns = vec![vec![1.2, 1.0], vec![0.9, 1.1]];
        let part = Partition::new(vec![vec![0, 1]], None).unwrap();
        assert!(matches!(
            dominance_reduction_check(&returns, &part, 4),
            Err(Error::Domain(_))
        ));
    }
}
