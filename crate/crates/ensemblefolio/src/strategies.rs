//! Component strategies: rolling mean-variance portfolios and constants.
//!
//! A mean-variance component with risk appetite alpha plays, each period,
//!
//!   b_n = argmax over the simplex of  alpha * <b, mean> - <b, cov b>
//!
//! where mean and cov are rolling-window estimates over the J most recent
//! return observations. The maximizer is found by accelerated projected
//! gradient with a fixed step 1/(2 * lambda_max(cov) + eps), and can be
//! cross-checked against an exhaustive grid oracle.

use rayon::prelude::*;

use crate::numeric::{dot, sym_eigenvalues};
use crate::simplex_grid::SimplexGrid;
use crate::{market_data::ReturnSeries, Error, Result};

// ===== portfolio =====

/// A long-only portfolio: nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio(Vec<f64>);

impl Portfolio {
    /// Validates and wraps a weight vector.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("portfolio needs at least one weight".into()));
        }
        let mut sum = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!("invalid portfolio weight {}", w)));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "portfolio weights sum to {}, not 1",
                sum
            )));
        }
        Ok(Portfolio(weights))
    }

    /// The uniform portfolio over m assets.
    pub fn equal_weight(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("portfolio needs at least one weight".into()));
        }
        Ok(Portfolio(vec![1.0 / m as f64; m]))
    }

    /// All weight on asset j.
    pub fn vertex(m: usize, j: usize) -> Result<Self> {
        if j >= m {
            return Err(Error::Domain(format!("vertex {} out of range for {} assets", j, m)));
        }
        let mut w = vec![0.0; m];
        w[j] = 1.0;
        Ok(Portfolio(w))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Portfolio {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Gross return <b, x> realized by a portfolio under per-asset returns x.
pub fn portfolio_return(b: &Portfolio, x: &[f64]) -> Result<f64> {
    if b.dim() != x.len() {
        return Err(Error::Data(format!(
            "portfolio dimension {} does not match {} returns",
            b.dim(),
            x.len()
        )));
    }
    Ok(dot(b.weights(), x))
}

// ===== rolling estimates =====

/// Rolling mean and covariance of returns over a window ending just before
/// the decision period.
#[derive(Debug, Clone)]
pub struct RollingEstimates {
    mean: Vec<f64>,
    cov: Vec<f64>,
    window: usize,
    lambda_min: f64,
    lambda_max: f64,
}

impl RollingEstimates {
    /// Validates symmetry (1e-12) and positive semidefiniteness (eigenvalues
    /// above -1e-10) of the covariance.
    pub fn new(mean: Vec<f64>, cov: Vec<f64>, window: usize) -> Result<Self> {
        let m = mean.len();
        if cov.len() != m * m {
            return Err(Error::Estimator(format!(
                "covariance has {} entries, expected {}",
                cov.len(),
                m * m
            )));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if (cov[i * m + j] - cov[j * m + i]).abs() > 1e-12 {
                    return Err(Error::Estimator(format!(
                        "covariance asymmetric at ({}, {})",
                        i, j
                    )));
                }
            }
        }
        let ev = sym_eigenvalues(&cov, m);
        let lambda_min = ev.first().copied().unwrap_or(0.0);
        let lambda_max = ev.last().copied().unwrap_or(0.0);
        if lambda_min < -1e-10 {
            return Err(Error::Estimator(format!(
                "covariance not positive semidefinite: eigenvalue {}",
                lambda_min
            )));
        }
        Ok(RollingEstimates {
            mean,
            cov,
            window,
            lambda_min,
            lambda_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major m-by-m covariance.
    pub fn cov(&self) -> &[f64] {
        &self.cov
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }
}

/// Mean of the J observations before period n (n is 1-based, needs n > J).
pub fn rolling_mean(returns: &ReturnSeries, n: usize, window: usize) -> Result<Vec<f64>> {
    check_window(returns, n, window)?;
    let m = returns.assets();
    let rows = returns.rows(n - 1 - window, n - 1);
    let mut mean = vec![0.0; m];
    for row in rows.chunks_exact(m) {
        for j in 0..m {
            mean[j] += row[j];
        }
    }
    for v in mean.iter_mut() {
        *v /= window as f64;
    }
    Ok(mean)
}

/// Unbiased covariance (divisor J - 1) of the J observations before period n.
pub fn rolling_cov(returns: &ReturnSeries, n: usize, window: usize) -> Result<Vec<f64>> {
    if window < 2 {
        return Err(Error::Config(format!(
            "covariance window must be at least 2, got {}",
            window
        )));
    }
    check_window(returns, n, window)?;
    let m = returns.assets();
    let mean = rolling_mean(returns, n, window)?;
    let rows = returns.rows(n - 1 - window, n - 1);
    let mut cov = vec![0.0; m * m];
    for row in rows.chunks_exact(m) {
        for i in 0..m {
            let di = row[i] - mean[i];
            for j in i..m {
                cov[i * m + j] += di * (row[j] - mean[j]);
            }
        }
    }
    let denom = (window - 1) as f64;
    for i in 0..m {
        for j in i..m {
            cov[i * m + j] /= denom;
            cov[j * m + i] = cov[i * m + j];
        }
    }
    Ok(cov)
}

/// Rolling estimates for decision period n (1-based, needs n > window).
pub fn estimates_at(returns: &ReturnSeries, n: usize, window: usize) -> Result<RollingEstimates> {
    let mean = rolling_mean(returns, n, window)?;
    let cov = rolling_cov(returns, n, window)?;
    RollingEstimates::new(mean, cov, window)
}

fn check_window(returns: &ReturnSeries, n: usize, window: usize) -> Result<()> {
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    if n <= window || n - 1 > returns.len() {
        return Err(Error::InsufficientHistory { period: n, window });
    }
    Ok(())
}

// ===== mean-variance solver =====

/// Parameters of a mean-variance component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MVConfig {
    pub alpha: f64,
    pub window: usize,
    pub solver_tol: f64,
}

impl MVConfig {
    pub fn new(alpha: f64, window: usize, solver_tol: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(Error::Domain(format!("alpha must be nonnegative, got {}", alpha)));
        }
        if window < 2 {
            return Err(Error::Config(format!(
                "mean-variance window must be at least 2, got {}",
                window
            )));
        }
        if !(solver_tol.is_finite() && solver_tol > 0.0) {
            return Err(Error::Domain(format!("solver tolerance {} must be positive", solver_tol)));
        }
        Ok(MVConfig { alpha, window, solver_tol })
    }
}

/// The mean-variance objective alpha * <b, mean> - <b, cov b>.
pub fn mv_objective(est: &RollingEstimates, alpha: f64, b: &[f64]) -> f64 {
    let m = est.dim();
    let mut quad = 0.0;
    for i in 0..m {
        quad += b[i] * dot(&est.cov()[i * m..(i + 1) * m], b);
    }
    alpha * dot(b, est.mean()) - quad
}

const MAX_SOLVER_ITERS: usize = 10_000;
const MIN_SOLVER_ITERS: usize = 50;
const PLATEAU_ITERS: usize = 10;

/// Maximizes the mean-variance objective over the simplex.
///
/// Accelerated projected gradient with monotone safeguard and momentum
/// restart; stops once the best objective stops improving by more than
/// `tol` (default contract 1e-10) or after 10,000 iterations. With a zero
/// covariance and alpha = 0 the objective is constant and the equal-weight
/// portfolio is returned.
pub fn mv_portfolio(est: &RollingEstimates, alpha: f64, tol: f64) -> Result<Portfolio> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!("alpha must be nonnegative, got {}", alpha)));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("solver tolerance {} must be positive", tol)));
    }
    let m = est.dim();
    if m == 0 {
        return Err(Error::Domain("estimates have dimension 0".into()));
    }
    if m == 1 {
        return Portfolio::new(vec![1.0]);
    }
    if est.lambda_max() <= 0.0 && alpha == 0.0 {
        return Portfolio::equal_weight(m);
    }
    let step = 1.0 / (2.0 * est.lambda_max() + 1e-12);
    let cov = est.cov();
    let grad = |b: &[f64], out: &mut [f64]| {
        for i in 0..m {
            out[i] = alpha * est.mean()[i] - 2.0 * dot(&cov[i * m..(i + 1) * m], b);
        }
    };

    let mut x = vec![1.0 / m as f64; m];
    let mut fx = mv_objective(est, alpha, &x);
    let mut y = x.clone();
    let mut g = vec![0.0; m];
    let mut cand = vec![0.0; m];
    let mut t_prev = 1.0f64;
    let mut plateau = 0usize;
    for iter in 0..MAX_SOLVER_ITERS {
        grad(&y, &mut g);
        for i in 0..m {
            cand[i] = y[i] + step * g[i];
        }
        let z = project_simplex(&cand)?;
        let fz = mv_objective(est, alpha, z.weights());
        let gain;
        if fz > fx {
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t_prev * t_prev).sqrt());
            for i in 0..m {
                y[i] = z.weights()[i]
                    + ((t_prev - 1.0) / t_new) * (z.weights()[i] - x[i]);
            }
            x = z.weights().to_vec();
            gain = fz - fx;
            fx = fz;
            t_prev = t_new;
        } else {
            // no progress: keep the incumbent and restart momentum cold
            y.copy_from_slice(&x);
            gain = 0.0;
            t_prev = 1.0;
        }
        if gain < tol {
            plateau += 1;
        } else {
            plateau = 0;
        }
        if iter + 1 >= MIN_SOLVER_ITERS && plateau >= PLATEAU_ITERS {
            break;
        }
    }
    Portfolio::new(x)
}

/// Exhaustive oracle: best grid point for the mean-variance objective,
/// ties resolved to the lowest grid index.
pub fn mv_grid_oracle(est: &RollingEstimates, alpha: f64, grid: &SimplexGrid) -> Result<Portfolio> {
    if grid.dim() != est.dim() {
        return Err(Error::Data(format!(
            "grid dimension {} does not match {} assets",
            grid.dim(),
            est.dim()
        )));
    }
    if grid.is_empty() {
        return Err(Error::Data("grid has no points".into()));
    }
    let mut best = 0usize;
    let mut best_obj = mv_objective(est, alpha, grid.point(0));
    for i in 1..grid.len() {
        let obj = mv_objective(est, alpha, grid.point(i));
        if obj > best_obj {
            best = i;
            best_obj = obj;
        }
    }
    Portfolio::new(grid.point(best).to_vec())
}

/// Streaming version of the grid oracle for grids too large to materialize.
///
/// Scans every composition of `step_den` into m parts in the canonical
/// enumeration order without storing them, returning the best point and its
/// objective. Parallel over the first coordinate; the result is identical
/// to running `mv_grid_oracle` on the enumerated grid.
pub fn mv_grid_scan(
    est: &RollingEstimates,
    alpha: f64,
    step_den: u32,
) -> Result<(Portfolio, f64)> {
    let m = est.dim();
    if m == 0 {
        return Err(Error::Domain("estimates have dimension 0".into()));
    }
    if step_den == 0 {
        return Err(Error::Config("step denominator must be at least 1".into()));
    }
    if m == 1 {
        let b = Portfolio::new(vec![1.0])?;
        let obj = mv_objective(est, alpha, b.weights());
        return Ok((b, obj));
    }
    // one branch per leading coordinate, in enumeration order
    let branches: Vec<Option<(f64, Vec<u32>)>> = (0..=step_den)
        .rev()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c0| {
            let mut state = ScanState::new(est, alpha, step_den);
            state.push(c0);
            let mut best: Option<(f64, Vec<u32>)> = None;
            state.scan(step_den - c0, &mut best);
            best
        })
        .collect();
    let (obj, comp) = branches
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one composition");
    let d = step_den as f64;
    let b = Portfolio::new(comp.iter().map(|&c| c as f64 / d).collect())?;
    Ok((b, obj))
}

/// Incremental objective evaluation along the composition tree: maintains
/// the linear part, the quadratic part, and h_j = sum_i b_i cov_ij over the
/// fixed prefix, so each leaf costs O(1).
struct ScanState<'a> {
    est: &'a RollingEstimates,
    alpha: f64,
    d: f64,
    prefix: Vec<f64>,
    lin: f64,
    quad: f64,
    h: Vec<f64>,
}

impl<'a> ScanState<'a> {
    fn new(est: &'a RollingEstimates, alpha: f64, step_den: u32) -> Self {
        ScanState {
            est,
            alpha,
            d: step_den as f64,
            prefix: Vec::with_capacity(est.dim()),
            lin: 0.0,
            quad: 0.0,
            h: vec![0.0; est.dim()],
        }
    }

    fn push(&mut self, c: u32) {
        let m = self.est.dim();
        let l = self.prefix.len();
        let b = c as f64 / self.d;
        self.lin += self.alpha * b * self.est.mean()[l];
        self.quad += 2.0 * b * self.h[l] + b * b * self.est.cov()[l * m + l];
        for j in 0..m {
            self.h[j] += b * self.est.cov()[l * m + j];
        }
        self.prefix.push(b);
    }

    fn pop(&mut self) {
        let m = self.est.dim();
        let b = self.prefix.pop().expect("pop on empty prefix");
        let l = self.prefix.len();
        for j in 0..m {
            self.h[j] -= b * self.est.cov()[l * m + j];
        }
        self.quad -= 2.0 * b * self.h[l] + b * b * self.est.cov()[l * m + l];
        self.lin -= self.alpha * b * self.est.mean()[l];
    }

    fn scan(&mut self, remaining: u32, best: &mut Option<(f64, Vec<u32>)>) {
        let m = self.est.dim();
        let slots = m - self.prefix.len();
        if slots == 1 {
            let l = m - 1;
            let b = remaining as f64 / self.d;
            let obj = self.lin + self.alpha * b * self.est.mean()[l]
                - (self.quad + 2.0 * b * self.h[l] + b * b * self.est.cov()[l * m + l]);
            if best.as_ref().map_or(true, |(bo, _)| obj > *bo) {
                let mut comp: Vec<u32> = self
                    .prefix
                    .iter()
                    .map(|&w| (w * self.d).round() as u32)
                    .collect();
                comp.push(remaining);
                *best = Some((obj, comp));
            }
            return;
        }
        for c in (0..=remaining).rev() {
            self.push(c);
            self.scan(remaining - c, best);
            self.pop();
        }
    }
}

// ===== simplex projection =====

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(v: &[f64]) -> Result<Portfolio> {
    if v.is_empty() {
        return Err(Error::Domain("cannot project an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("cannot project non-finite values".into()));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|&x| (x - tau).max(0.0)).collect();
    let z: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= z;
    }
    Portfolio::new(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::synth_returns;
    use crate::simplex_grid::enumerate_grid;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(rows: &[&[f64]]) -> ReturnSeries {
        let m = rows[0].len();
        ReturnSeries::new(m, rows.iter().flat_map(|r| r.iter().copied()).collect()).unwrap()
    }

    fn random_psd(rng: &mut ChaCha8Rng, m: usize, scale: f64) -> Vec<f64> {
        let a: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0) * scale).collect();
        let mut cov = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                for l in 0..m {
                    cov[i * m + j] += a[l * m + i] * a[l * m + j];
                }
            }
        }
        cov
    }

    #[test]
    fn rolling_mean_hand_case() {
        let r = series(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(rolling_mean(&r, 3, 2).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn rolling_mean_needs_history() {
        let r = series(&[&[1.0], &[2.0]]);
        assert!(matches!(
            rolling_mean(&r, 2, 2),
            Err(Error::InsufficientHistory { period: 2, window: 2 })
        ));
        assert!(matches!(
            rolling_mean(&r, 5, 2),
            Err(Error::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn rolling_mean_matches_naive() {
        let r = synth_returns(3, 30, &crate::market_data::default_regime(), 11, (0.8, 1.25)).unwrap();
        for n in 21..=31 {
            let got = rolling_mean(&r, n, 20).unwrap();
            for j in 0..3 {
                let mut s = 0.0;
                for i in (n - 21)..(n - 1) {
                    s += r.row(i)[j];
                }
                assert!((got[j] - s / 20.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rolling_cov_hand_case() {
        let r = series(&[&[1.0, 1.0], &[3.0, 3.0]]);
        let cov = rolling_cov(&r, 3, 2).unwrap();
        assert_eq!(cov, vec![2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn rolling_cov_constant_is_zero() {
        let r = series(&[&[1.01, 0.99], &[1.01, 0.99], &[1.01, 0.99]]);
        let cov = rolling_cov(&r, 4, 3).unwrap();
        for c in cov {
            assert!(c.abs() < 1e-15);
        }
    }

    #[test]
    fn rolling_cov_window_one_rejected() {
        let r = series(&[&[1.0], &[2.0]]);
        assert!(matches!(rolling_cov(&r, 2, 1), Err(Error::Config(_))));
    }

    #[test]
    fn rolling_cov_matches_two_pass_oracle() {
        let r = synth_returns(3, 40, &crate::market_data::default_regime(), 13, (0.8, 1.25)).unwrap();
        let n = 30;
        let j = 20;
        let cov = rolling_cov(&r, n, j).unwrap();
        // independent two-pass computation per coordinate pair
        for a in 0..3 {
            for b in 0..3 {
                let mut ma = 0.0;
                let mut mb = 0.0;
                for t in (n - 1 - j)..(n - 1) {
                    ma += r.row(t)[a];
                    mb += r.row(t)[b];
                }
                ma /= j as f64;
                mb /= j as f64;
                let mut s = 0.0;
                for t in (n - 1 - j)..(n - 1) {
                    s += (r.row(t)[a] - ma) * (r.row(t)[b] - mb);
                }
                assert!((cov[a * 3 + b] - s / (j - 1) as f64).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn estimates_validate_covariance() {
        assert!(matches!(
            RollingEstimates::new(vec![1.0, 1.0], vec![1.0, 0.5, 0.2, 1.0], 5),
            Err(Error::Estimator(_))
        ));
        assert!(matches!(
            RollingEstimates::new(vec![1.0, 1.0], vec![1.0, 2.0, 2.0, 1.0], 5),
            Err(Error::Estimator(_))
        ));
        // eigenvalue 0 is fine
        assert!(RollingEstimates::new(vec![1.0, 1.0], vec![1.0, 1.0, 1.0, 1.0], 5).is_ok());
    }

    #[test]
    fn mv_config_validation() {
        assert!(matches!(MVConfig::new(-0.1, 20, 1e-10), Err(Error::Domain(_))));
        assert!(matches!(MVConfig::new(1.0, 1, 1e-10), Err(Error::Config(_))));
        assert!(MVConfig::new(0.0, 2, 1e-10).is_ok());
    }

    #[test]
    fn solver_equal_weight_when_risk_only() {
        let est = RollingEstimates::new(vec![1.2, 0.9], vec![1.0, 0.0, 0.0, 1.0], 5).unwrap();
        let b = mv_portfolio(&est, 0.0, 1e-10).unwrap();
        assert!((b.weights()[0] - 0.5).abs() < 1e-10);
        assert!((b.weights()[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn solver_hand_kkt_instance() {
        let est = RollingEstimates::new(vec![1.1, 1.0], vec![1.0, 0.0, 0.0, 1.0], 5).unwrap();
        let b = mv_portfolio(&est, 4.0, 1e-10).unwrap();
        assert!((b.weights()[0] - 0.6).abs() < 1e-6);
        assert!((b.weights()[1] - 0.4).abs() < 1e-6);
    }

    #[test]
    fn solver_zero_variance_cases() {
        let est = RollingEstimates::new(vec![1.0, 1.0], vec![0.0; 4], 5).unwrap();
        let b = mv_portfolio(&est, 0.0, 1e-10).unwrap();
        assert_eq!(b.weights(), &[0.5, 0.5]);

        let est = RollingEstimates::new(vec![1.05, 1.0, 1.01], vec![0.0; 9], 5).unwrap();
        let b = mv_portfolio(&est, 1.0, 1e-10).unwrap();
        assert!((b.weights()[0] - 1.0).abs() < 1e-9);
        assert!(b.weights()[1].abs() < 1e-9 && b.weights()[2].abs() < 1e-9);
    }

    #[test]
    fn solver_monotone_in_alpha() {
        let est = RollingEstimates::new(vec![1.2, 1.0], vec![1.0, 0.0, 0.0, 1.0], 5).unwrap();
        let mut prev = 0.0;
        for alpha in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let b = mv_portfolio(&est, alpha, 1e-10).unwrap();
            assert!(b.weights()[0] >= prev - 1e-9);
            prev = b.weights()[0];
        }
        // large alpha saturates at the high-mean vertex
        let b = mv_portfolio(&est, 64.0, 1e-10).unwrap();
        assert!((b.weights()[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn grid_oracle_hand_cases() {
        let est = RollingEstimates::new(vec![1.0, 1.0], vec![1.0, 0.0, 0.0, 1.0], 5).unwrap();
        let g = enumerate_grid(2, 2).unwrap();
        let b = mv_grid_oracle(&est, 0.0, &g).unwrap();
        assert_eq!(b.weights(), &[0.5, 0.5]);
        // vertices tie at alpha 0: lowest index wins
        let g = enumerate_grid(2, 1).unwrap();
        let b = mv_grid_oracle(&est, 0.0, &g).unwrap();
        assert_eq!(b.weights(), &[1.0, 0.0]);
    }

    #[test]
    fn scan_matches_materialized_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let mean: Vec<f64> = (0..3).map(|_| rng.random_range(0.9..1.1)).collect();
            let cov = random_psd(&mut rng, 3, 0.1);
            let est = RollingEstimates::new(mean, cov, 5).unwrap();
            for alpha in [0.0, 0.7, 5.0] {
                let g = enumerate_grid(3, 40).unwrap();
                let dense = mv_grid_oracle(&est, alpha, &g).unwrap();
                let (scanned, obj) = mv_grid_scan(&est, alpha, 40).unwrap();
                assert_eq!(dense.weights(), scanned.weights());
                assert!((obj - mv_objective(&est, alpha, dense.weights())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solver_beats_grid_oracle_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..6 {
            let mean: Vec<f64> = (0..3).map(|_| rng.random_range(0.9..1.1)).collect();
            let cov = random_psd(&mut rng, 3, 0.2);
            let est = RollingEstimates::new(mean, cov, 5).unwrap();
            for alpha in [0.0, 0.5, 4.0] {
                let b = mv_portfolio(&est, alpha, 1e-10).unwrap();
                let (_, grid_obj) = mv_grid_scan(&est, alpha, 200).unwrap();
                let solver_obj = mv_objective(&est, alpha, b.weights());
                assert!(
                    solver_obj >= grid_obj - 1e-6,
                    "solver {} vs grid {}",
                    solver_obj,
                    grid_obj
                );
            }
        }
    }

    #[test]
    fn projection_hand_cases() {
        let p = project_simplex(&[2.2, 2.0]).unwrap();
        assert!((p.weights()[0] - 0.6).abs() < 1e-12);
        assert!((p.weights()[1] - 0.4).abs() < 1e-12);

        let p = project_simplex(&[-1.0, -1.0]).unwrap();
        assert_eq!(p.weights(), &[0.5, 0.5]);

        // already feasible: fixed point
        let p = project_simplex(&[0.3, 0.7]).unwrap();
        assert!((p.weights()[0] - 0.3).abs() < 1e-12);

        assert!(matches!(project_simplex(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn portfolio_validation() {
        assert!(Portfolio::new(vec![0.5, 0.5]).is_ok());
        assert!(matches!(Portfolio::new(vec![0.6, 0.5]), Err(Error::Domain(_))));
        assert!(matches!(Portfolio::new(vec![-0.1, 1.1]), Err(Error::Domain(_))));
        assert!(matches!(Portfolio::new(vec![]), Err(Error::Domain(_))));
        assert_eq!(Portfolio::vertex(3, 1).unwrap().weights(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn portfolio_return_checks_dims() {
        let b = Portfolio::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(portfolio_return(&b, &[1.1, 0.9]).unwrap(), 1.0);
        assert!(matches!(portfolio_return(&b, &[1.0]), Err(Error::Data(_))));
    }

    /// Exact projection by enumerating KKT support sets; valid for small m.
    fn qp_projection_oracle(v: &[f64]) -> Vec<f64> {
        let m = v.len();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1 << m) {
            let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
            let s: f64 = idx.iter().map(|&i| v[i]).sum();
            let shift = (1.0 - s) / idx.len() as f64;
            let mut w = vec![0.0; m];
            let mut ok = true;
            for &i in &idx {
                w[i] = v[i] + shift;
                if w[i] < 0.0 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let dist: f64 = (0..m).map(|i| (w[i] - v[i]) * (w[i] - v[i])).sum();
            if best.as_ref().map_or(true, |(d, _)| dist < *d) {
                best = Some((dist, w));
            }
        }
        best.unwrap().1
    }

    proptest! {
        #[test]
        fn projection_matches_qp_oracle(v in proptest::collection::vec(-5.0f64..5.0, 1..8)) {
            let p = project_simplex(&v).unwrap();
            let oracle = qp_projection_oracle(&v);
            let dist: f64 = p
                .weights()
                .iter()
                .zip(&oracle)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            prop_assert!(dist.sqrt() <= 1e-9);
        }

        #[test]
        fn projection_is_idempotent_and_nonexpansive(
            u in proptest::collection::vec(-5.0f64..5.0, 2..8)
        ) {
            let p = project_simplex(&u).unwrap();
            let pp = project_simplex(p.weights()).unwrap();
            for (a, b) in p.weights().iter().zip(pp.weights()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            let mut v = u.clone();
            v[0] += 0.5;
            let q = project_simplex(&v).unwrap();
            let dp: f64 = p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b) * (a - b)).sum();
            let du: f64 = u.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
            prop_assert!(dp.sqrt() <= du.sqrt() + 1e-12);
        }

        #[test]
        fn sample_estimates_are_psd(seed in 0u64..500) {
            let r = synth_returns(4, 60, &crate::market_data::default_regime(), seed, (0.8, 1.25)).unwrap();
            let est = estimates_at(&r, 40, 20).unwrap();
            prop_assert!(est.lambda_min() >= -1e-10);
        }

        #[test]
        fn solver_output_beats_vertices(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = rng.random_range(2usize..5);
            let mean: Vec<f64> = (0..m).map(|_| rng.random_range(0.9..1.1)).collect();
            let cov = random_psd(&mut rng, m, 0.15);
            let est = RollingEstimates::new(mean, cov, 5).unwrap();
            let alpha = rng.random_range(0.0..8.0);
            let b = mv_portfolio(&est, alpha, 1e-10).unwrap();
            let obj = mv_objective(&est, alpha, b.weights());
            for j in 0..m {
                let v = Portfolio::vertex(m, j).unwrap();
                prop_assert!(obj >= mv_objective(&est, alpha, v.weights()) - 1e-8);
            }
        }
    }
}
