//! Wealth ledgers and mixture ensembles over component strategies.
//!
//! The central object is the wealth-mixture ensemble: given a grid of
//! constant convex combinations of k component strategies, it plays each
//! period the average of the combination portfolios weighted by their
//! accumulated wealth. Its wealth therefore equals the plain average of
//! all combination wealths, an identity the test suite checks to float
//! precision, and which bounds its regret against the best combination in
//! hindsight by the log of the grid size.
//!
//! Variants: winner/loser support masks restrict the mixture to the top or
//! bottom wealth quantile of the grid; a base-set partition compresses many
//! components into per-set representative portfolios so the grid lives on
//! a much smaller simplex; wealth-weighted averaging of the components
//! themselves and follow-the-leader round out the ensemble set.
//!
//! Everything is deterministic: mixture sums run over fixed index orders
//! with a fixed-shape pairwise reduction, so results do not depend on
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::{argmax, dot, normalized_exp_weights, pairwise_sum};
use crate::simplex_grid::SimplexGrid;
use crate::strategies::Portfolio;
use crate::{Error, Result};

// ===== wealth ledger =====

/// Log-space wealth accumulator for a family of tracked entities.
///
/// Wealth products over thousands of periods overflow linear doubles, so
/// the ledger stores log wealth and adds log returns with compensated
/// summation.
#[derive(Debug, Clone)]
pub struct WealthLedger {
    log_wealth: Vec<f64>,
    comp: Vec<f64>,
    period: usize,
}

impl WealthLedger {
    /// A fresh ledger with unit wealth (log 0) for n entities.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Data("ledger needs at least one entity".into()));
        }
        Ok(WealthLedger {
            log_wealth: vec![0.0; n],
            comp: vec![0.0; n],
            period: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.log_wealth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_wealth.is_empty()
    }

    /// Periods absorbed so far.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Current log wealth per entity.
    pub fn log_wealth(&self) -> &[f64] {
        &self.log_wealth
    }

    /// Absorbs one period of gross returns, one per entity.
    pub fn update(&mut self, per_entity_returns: &[f64]) -> Result<()> {
        if per_entity_returns.len() != self.log_wealth.len() {
            return Err(Error::Data(format!(
                "ledger has {} entities, got {} returns",
                self.log_wealth.len(),
                per_entity_returns.len()
            )));
        }
        for (i, &r) in per_entity_returns.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Data(format!(
                    "non-positive or non-finite return {} for entity {}",
                    r, i
                )));
            }
            let y = r.ln() - self.comp[i];
            let t = self.log_wealth[i] + y;
            self.comp[i] = (t - self.log_wealth[i]) - y;
            self.log_wealth[i] = t;
            if !self.log_wealth[i].is_finite() {
                return Err(Error::Data(format!(
                    "log wealth of entity {} left the finite range",
                    i
                )));
            }
        }
        self.period += 1;
        Ok(())
    }
}

// ===== support masks =====

/// A subset of grid indices the mixture is restricted to, kept in
/// ascending order so masked iteration matches unmasked iteration when the
/// mask is full.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMask {
    included: Vec<usize>,
    fraction: f64,
}

impl SupportMask {
    /// Mask containing every index below n.
    pub fn full(n: usize) -> Self {
        SupportMask {
            included: (0..n).collect(),
            fraction: 1.0,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.included
    }

    /// The fraction of the grid this mask was built to keep.
    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn len(&self) -> usize {
        self.included.len()
    }

    pub fn is_empty(&self) -> bool {
        self.included.is_empty()
    }
}

fn support_quantile(ledger: &WealthLedger, fraction: f64, winners: bool) -> Result<SupportMask> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Support(format!(
            "support fraction {} outside (0, 1]",
            fraction
        )));
    }
    let n = ledger.len();
    let count = ((fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    let w = ledger.log_wealth();
    order.sort_by(|&a, &b| {
        let cmp = if winners {
            w[b].partial_cmp(&w[a]).unwrap()
        } else {
            w[a].partial_cmp(&w[b]).unwrap()
        };
        cmp.then(a.cmp(&b))
    });
    let mut included: Vec<usize> = order[..count].to_vec();
    included.sort_unstable();
    Ok(SupportMask { included, fraction })
}

/// Indices of the top ceil(fraction * n) entities by wealth, ties to the
/// lowest index.
pub fn support_winners(ledger: &WealthLedger, fraction: f64) -> Result<SupportMask> {
    support_quantile(ledger, fraction, true)
}

/// Indices of the bottom ceil(fraction * n) entities by wealth, ties to
/// the lowest index.
pub fn support_losers(ledger: &WealthLedger, fraction: f64) -> Result<SupportMask> {
    support_quantile(ledger, fraction, false)
}

// ===== base-set partitions =====

/// A partition of the component index set into disjoint base sets, each
/// carrying a mass distribution over its members.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    base_sets: Vec<Vec<usize>>,
    masses: Vec<Vec<f64>>,
}

impl Partition {
    /// Builds a partition of components 0..k; `masses` defaults to uniform
    /// per set. Sets must be disjoint, non-empty, and cover 0..k exactly.
    pub fn new(base_sets: Vec<Vec<usize>>, masses: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if base_sets.is_empty() {
            return Err(Error::Partition("partition needs at least one base set".into()));
        }
        let mut base_sets = base_sets;
        for set in base_sets.iter_mut() {
            if set.is_empty() {
                return Err(Error::Partition("base sets must be non-empty".into()));
            }
            set.sort_unstable();
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Partition("base set repeats a member".into()));
            }
        }
        let k: usize = base_sets.iter().map(Vec::len).sum();
        let mut seen = vec![false; k];
        for set in &base_sets {
            for &m in set {
                if m >= k || seen[m] {
                    return Err(Error::Partition(format!(
                        "base sets must partition 0..{} exactly, member {} breaks that",
                        k, m
                    )));
                }
                seen[m] = true;
            }
        }
        let masses = match masses {
            None => base_sets
                .iter()
                .map(|s| vec![1.0 / s.len() as f64; s.len()])
                .collect(),
            Some(ms) => {
                if ms.len() != base_sets.len() {
                    return Err(Error::Partition(format!(
                        "{} mass vectors for {} base sets",
                        ms.len(),
                        base_sets.len()
                    )));
                }
                for (set, mass) in base_sets.iter().zip(&ms) {
                    if mass.len() != set.len() {
                        return Err(Error::Partition(
                            "mass vector length does not match its base set".into(),
                        ));
                    }
                    let mut sum = 0.0;
                    for &w in mass {
                        if !w.is_finite() || w <= 0.0 {
                            return Err(Error::Partition(format!(
                                "masses must be strictly positive, got {}",
                                w
                            )));
                        }
                        sum += w;
                    }
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(Error::Partition(format!(
                            "masses sum to {}, not 1",
                            sum
                        )));
                    }
                }
                ms
            }
        };
        Ok(Partition { base_sets, masses })
    }

    /// Singleton partition: every component is its own base set.
    pub fn singletons(k: usize) -> Result<Self> {
        Partition::new((0..k).map(|i| vec![i]).collect(), None)
    }

    /// Total number of components covered.
    pub fn components(&self) -> usize {
        self.base_sets.iter().map(Vec::len).sum()
    }

    /// Number of base sets N.
    pub fn n_sets(&self) -> usize {
        self.base_sets.len()
    }

    pub fn base_sets(&self) -> &[Vec<usize>] {
        &self.base_sets
    }

    pub fn masses(&self) -> &[Vec<f64>] {
        &self.masses
    }
}

// ===== mixture portfolios =====

/// The portfolio of the constant combination lambda over the components.
pub fn constant_combo_portfolio(lambda: &[f64], comps: &[Portfolio]) -> Result<Portfolio> {
    if comps.is_empty() {
        return Err(Error::Data("no component portfolios".into()));
    }
    if lambda.len() != comps.len() {
        return Err(Error::Data(format!(
            "combination has {} weights for {} components",
            lambda.len(),
            comps.len()
        )));
    }
    let m = comps[0].dim();
    let mut out = vec![0.0; m];
    for (l, c) in lambda.iter().zip(comps) {
        if c.dim() != m {
            return Err(Error::Data("component portfolio dimensions differ".into()));
        }
        for (o, w) in out.iter_mut().zip(c.weights()) {
            *o += l * w;
        }
    }
    Portfolio::new(out)
}

/// Wealth-mixture weights over the components induced by a grid ledger:
/// entry alpha is the wealth-weighted average of lambda_alpha over the
/// (optionally masked) grid. At period one all grid wealths are equal and
/// the result is the grid centroid.
pub fn uc_allocation(
    grid: &SimplexGrid,
    grid_ledger: &WealthLedger,
    mask: Option<&SupportMask>,
) -> Result<Vec<f64>> {
    if grid.len() != grid_ledger.len() {
        return Err(Error::Data(format!(
            "grid has {} points but ledger tracks {}",
            grid.len(),
            grid_ledger.len()
        )));
    }
    let full;
    let active: &[usize] = match mask {
        Some(m) => {
            if m.is_empty() {
                return Err(Error::Support("support mask is empty".into()));
            }
            if m.indices().iter().any(|&i| i >= grid.len()) {
                return Err(Error::Support("support mask indexes beyond the grid".into()));
            }
            m.indices()
        }
        None => {
            full = SupportMask::full(grid.len());
            return uc_allocation(grid, grid_ledger, Some(&full));
        }
    };
    let mut weights = Vec::with_capacity(active.len());
    normalized_exp_weights(grid_ledger.log_wealth(), active, &mut weights);
    let k = grid.dim();
    let mut alloc = vec![0.0; k];
    let mut col = vec![0.0; active.len()];
    for (a, slot) in alloc.iter_mut().enumerate() {
        for (t, (&j, &w)) in active.iter().zip(&weights).enumerate() {
            col[t] = w * grid.point(j)[a];
        }
        *slot = pairwise_sum(&col);
    }
    Ok(alloc)
}

/// The wealth-mixture ensemble portfolio over a combination grid.
pub fn uc_portfolio(
    grid: &SimplexGrid,
    grid_ledger: &WealthLedger,
    comps: &[Portfolio],
    mask: Option<&SupportMask>,
) -> Result<Portfolio> {
    if grid.dim() != comps.len() {
        return Err(Error::Data(format!(
            "grid dimension {} does not match {} components",
            grid.dim(),
            comps.len()
        )));
    }
    let alloc = uc_allocation(grid, grid_ledger, mask)?;
    constant_combo_portfolio(&alloc, comps)
}

/// The representative portfolio of one base set: members averaged with
/// weights proportional to wealth times mass.
pub fn representative_portfolio(
    set: &[usize],
    masses: &[f64],
    comp_ledger: &WealthLedger,
    comps: &[Portfolio],
) -> Result<Portfolio> {
    if set.is_empty() || set.len() != masses.len() {
        return Err(Error::Partition(
            "base set and mass vector must be non-empty and equal length".into(),
        ));
    }
    if set.iter().any(|&i| i >= comps.len() || i >= comp_ledger.len()) {
        return Err(Error::Partition("base set indexes beyond the components".into()));
    }
    let logs = comp_ledger.log_wealth();
    let scored: Vec<f64> = set
        .iter()
        .zip(masses)
        .map(|(&i, &mu)| logs[i] + mu.ln())
        .collect();
    let active: Vec<usize> = (0..set.len()).collect();
    let mut weights = Vec::with_capacity(set.len());
    normalized_exp_weights(&scored, &active, &mut weights);
    let members: Vec<Portfolio> = set.iter().map(|&i| comps[i].clone()).collect();
    constant_combo_portfolio(&weights, &members)
}

/// Wealth-mixture ensemble over a grid on the representative simplex.
pub fn uc_large_portfolio(
    grid: &SimplexGrid,
    grid_ledger: &WealthLedger,
    representatives: &[Portfolio],
    mask: Option<&SupportMask>,
) -> Result<Portfolio> {
    uc_portfolio(grid, grid_ledger, representatives, mask)
}

/// Distribution of capital over the individual components implied by the
/// ensemble over representatives: the factor over base sets comes from the
/// grid mixture, the factor within a set from wealth times mass.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationDistribution {
    probs: Vec<f64>,
}

impl AllocationDistribution {
    fn new(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Data(format!(
                "allocation distribution sums to {}, not 1",
                sum
            )));
        }
        Ok(AllocationDistribution { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Capital allocation over components for the partitioned ensemble.
pub fn allocation_distribution(
    grid: &SimplexGrid,
    grid_ledger: &WealthLedger,
    comp_ledger: &WealthLedger,
    partition: &Partition,
) -> Result<AllocationDistribution> {
    if grid.dim() != partition.n_sets() {
        return Err(Error::Data(format!(
            "grid dimension {} does not match {} base sets",
            grid.dim(),
            partition.n_sets()
        )));
    }
    if partition.components() != comp_ledger.len() {
        return Err(Error::Data(
            "partition does not cover the component ledger".into(),
        ));
    }
    let outer = uc_allocation(grid, grid_ledger, None)?;
    let logs = comp_ledger.log_wealth();
    let mut probs = vec![0.0; partition.components()];
    for (i, (set, masses)) in partition
        .base_sets()
        .iter()
        .zip(partition.masses())
        .enumerate()
    {
        let scored: Vec<f64> = set
            .iter()
            .zip(masses)
            .map(|(&a, &mu)| logs[a] + mu.ln())
            .collect();
        let active: Vec<usize> = (0..set.len()).collect();
        let mut inner = Vec::with_capacity(set.len());
        normalized_exp_weights(&scored, &active, &mut inner);
        for (&a, w) in set.iter().zip(&inner) {
            probs[a] = outer[i] * w;
        }
    }
    AllocationDistribution::new(probs)
}

/// Wealth-weighted average of the component portfolios themselves.
pub fn wae_portfolio(comp_ledger: &WealthLedger, comps: &[Portfolio]) -> Result<Portfolio> {
    if comp_ledger.len() != comps.len() {
        return Err(Error::Data(format!(
            "ledger tracks {} entities but {} portfolios given",
            comp_ledger.len(),
            comps.len()
        )));
    }
    let active: Vec<usize> = (0..comps.len()).collect();
    let mut weights = Vec::with_capacity(comps.len());
    normalized_exp_weights(comp_ledger.log_wealth(), &active, &mut weights);
    constant_combo_portfolio(&weights, comps)
}

/// Follow the leader: replays the portfolio of the component with the
/// highest wealth so far (ties to the lowest index); before any wealth is
/// observed it plays the equal average of the components.
pub fn fl_portfolio(comp_ledger: &WealthLedger, comps: &[Portfolio]) -> Result<Portfolio> {
    if comp_ledger.len() != comps.len() {
        return Err(Error::Data(format!(
            "ledger tracks {} entities but {} portfolios given",
            comp_ledger.len(),
            comps.len()
        )));
    }
    if comp_ledger.period() == 0 {
        let k = comps.len();
        return constant_combo_portfolio(&vec![1.0 / k as f64; k], comps);
    }
    let leader = argmax(comp_ledger.log_wealth()).expect("non-empty ledger");
    Ok(comps[leader].clone())
}

// ===== ensemble kinds =====

/// The ensembles the engine can run side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnsembleKind {
    /// Wealth mixture over the full combination grid.
    Uc,
    /// Wealth-weighted average of the components.
    Wae,
    /// Follow the leader.
    Fl,
    /// Mixture restricted to the top wealth quantile of the grid.
    Ucw { support_fraction: f64 },
    /// Mixture restricted to the bottom wealth quantile of the grid.
    Ucl { support_fraction: f64 },
    /// Mixture over a grid on the representative simplex of a partition.
    UcLarge,
}

impl EnsembleKind {
    /// Stable name used in output column headers and metrics keys.
    pub fn name(&self) -> String {
        match self {
            EnsembleKind::Uc => "uc".into(),
            EnsembleKind::Wae => "wae".into(),
            EnsembleKind::Fl => "fl".into(),
            EnsembleKind::Ucw { support_fraction } => format!("ucw_{}", support_fraction),
            EnsembleKind::Ucl { support_fraction } => format!("ucl_{}", support_fraction),
            EnsembleKind::UcLarge => "uc_large".into(),
        }
    }

    fn needs_comp_grid(&self) -> bool {
        matches!(
            self,
            EnsembleKind::Uc | EnsembleKind::Ucw { .. } | EnsembleKind::Ucl { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        match self {
            EnsembleKind::Ucw { support_fraction } | EnsembleKind::Ucl { support_fraction } => {
                if !(*support_fraction > 0.0 && *support_fraction <= 1.0) {
                    return Err(Error::Support(format!(
                        "support fraction {} outside (0, 1]",
                        support_fraction
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

// ===== the period engine =====

/// Best grid entry after an update: index into the grid and its log wealth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBest {
    pub index: usize,
    pub log_wealth: f64,
}

/// Everything one period produces: decided portfolios, realized returns,
/// and post-update wealth snapshots.
#[derive(Debug, Clone)]
pub struct PeriodRecord {
    /// 1-based period number.
    pub period: usize,
    /// Decided portfolio per ensemble kind, in engine kind order.
    pub portfolios: Vec<Portfolio>,
    /// Capital allocation over components per ensemble kind.
    pub allocations: Vec<Vec<f64>>,
    /// Realized gross return per component.
    pub comp_returns: Vec<f64>,
    /// Realized gross return per ensemble kind.
    pub ens_returns: Vec<f64>,
    /// Component log wealth after the update.
    pub comp_log_wealth: Vec<f64>,
    /// Ensemble log wealth after the update.
    pub ens_log_wealth: Vec<f64>,
    /// Best point of the combination grid after the update.
    pub grid_best: Option<GridBest>,
    /// Best point of the representative grid after the update.
    pub large_best: Option<GridBest>,
}

/// Runs a set of ensembles period by period over caller-supplied component
/// portfolios and realized returns.
pub struct EnsembleEngine {
    assets: usize,
    k: usize,
    kinds: Vec<EnsembleKind>,
    comp_ledger: WealthLedger,
    comp_grid: Option<(SimplexGrid, WealthLedger)>,
    large: Option<(Partition, SimplexGrid, WealthLedger)>,
    ens_ledger: WealthLedger,
}

/// Grids at or above this size update their ledgers with a parallel map.
const PAR_GRID_THRESHOLD: usize = 8192;

impl EnsembleEngine {
    /// Builds an engine for k components on `assets` assets.
    ///
    /// A combination grid over the component simplex is required by the
    /// grid-backed kinds, and a partition plus representative grid by the
    /// partitioned kind.
    pub fn new(
        assets: usize,
        k: usize,
        kinds: Vec<EnsembleKind>,
        comp_grid: Option<SimplexGrid>,
        large: Option<(Partition, SimplexGrid)>,
    ) -> Result<Self> {
        if assets == 0 || k == 0 {
            return Err(Error::Config(
                "engine needs at least one asset and one component".into(),
            ));
        }
        if kinds.is_empty() {
            return Err(Error::Config("engine needs at least one ensemble kind".into()));
        }
        let mut names = std::collections::HashSet::new();
        for kind in &kinds {
            kind.validate()?;
            if !names.insert(kind.name()) {
                return Err(Error::Config(format!("duplicate ensemble kind {}", kind.name())));
            }
        }
        let comp_grid = if kinds.iter().any(EnsembleKind::needs_comp_grid) {
            let grid = comp_grid.ok_or_else(|| {
                Error::Config("grid-backed ensemble kinds need a combination grid".into())
            })?;
            if grid.dim() != k {
                return Err(Error::Config(format!(
                    "combination grid dimension {} does not match {} components",
                    grid.dim(),
                    k
                )));
            }
            let ledger = WealthLedger::new(grid.len())?;
            Some((grid, ledger))
        } else {
            None
        };
        let large = if kinds.contains(&EnsembleKind::UcLarge) {
            let (partition, grid) = large.ok_or_else(|| {
                Error::Config("the partitioned kind needs a partition and its grid".into())
            })?;
            if partition.components() != k {
                return Err(Error::Config(format!(
                    "partition covers {} components, engine has {}",
                    partition.components(),
                    k
                )));
            }
            if grid.dim() != partition.n_sets() {
                return Err(Error::Config(format!(
                    "representative grid dimension {} does not match {} base sets",
                    grid.dim(),
                    partition.n_sets()
                )));
            }
            let ledger = WealthLedger::new(grid.len())?;
            Some((partition, grid, ledger))
        } else {
            None
        };
        let ens_ledger = WealthLedger::new(kinds.len())?;
        Ok(EnsembleEngine {
            assets,
            k,
            kinds,
            comp_ledger: WealthLedger::new(k)?,
            comp_grid,
            large,
            ens_ledger,
        })
    }

    pub fn kinds(&self) -> &[EnsembleKind] {
        &self.kinds
    }

    pub fn period(&self) -> usize {
        self.comp_ledger.period()
    }

    pub fn comp_ledger(&self) -> &WealthLedger {
        &self.comp_ledger
    }

    pub fn grid(&self) -> Option<&SimplexGrid> {
        self.comp_grid.as_ref().map(|(g, _)| g)
    }

    pub fn grid_ledger(&self) -> Option<&WealthLedger> {
        self.comp_grid.as_ref().map(|(_, l)| l)
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.large.as_ref().map(|(p, _, _)| p)
    }

    pub fn large_grid(&self) -> Option<&SimplexGrid> {
        self.large.as_ref().map(|(_, g, _)| g)
    }

    pub fn large_ledger(&self) -> Option<&WealthLedger> {
        self.large.as_ref().map(|(_, _, l)| l)
    }

    pub fn ens_ledger(&self) -> &WealthLedger {
        &self.ens_ledger
    }

    /// Representative portfolios of the partition under current wealths.
    pub fn representatives(&self, comps: &[Portfolio]) -> Result<Vec<Portfolio>> {
        let (partition, _, _) = self
            .large
            .as_ref()
            .ok_or_else(|| Error::Config("engine has no partition".into()))?;
        partition
            .base_sets()
            .iter()
            .zip(partition.masses())
            .map(|(set, masses)| representative_portfolio(set, masses, &self.comp_ledger, comps))
            .collect()
    }

    /// Decides every ensemble portfolio from current wealths, realizes the
    /// period with gross returns x, and updates all ledgers.
    pub fn step(&mut self, comps: &[Portfolio], x: &[f64]) -> Result<PeriodRecord> {
        if comps.len() != self.k {
            return Err(Error::Data(format!(
                "expected {} component portfolios, got {}",
                self.k,
                comps.len()
            )));
        }
        if x.len() != self.assets {
            return Err(Error::Data(format!(
                "expected {} asset returns, got {}",
                self.assets,
                x.len()
            )));
        }
        for (i, &r) in x.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Data(format!(
                    "non-positive or non-finite return {} for asset {}",
                    r, i
                )));
            }
        }
        for (i, c) in comps.iter().enumerate() {
            if c.dim() != self.assets {
                return Err(Error::Data(format!(
                    "component {} has dimension {}, expected {}",
                    i,
                    c.dim(),
                    self.assets
                )));
            }
        }

        // decide with the wealths accumulated so far
        let reps = if self.large.is_some() {
            Some(self.representatives(comps)?)
        } else {
            None
        };
        let mut portfolios = Vec::with_capacity(self.kinds.len());
        let mut allocations = Vec::with_capacity(self.kinds.len());
        for kind in &self.kinds {
            let (b, alloc) = match kind {
                EnsembleKind::Uc => {
                    let (grid, ledger) = self.comp_grid.as_ref().expect("validated");
                    let alloc = uc_allocation(grid, ledger, None)?;
                    (constant_combo_portfolio(&alloc, comps)?, alloc)
                }
                EnsembleKind::Ucw { support_fraction } | EnsembleKind::Ucl { support_fraction } => {
                    let (grid, ledger) = self.comp_grid.as_ref().expect("validated");
                    let mask = if ledger.period() == 0 {
                        None
                    } else if matches!(kind, EnsembleKind::Ucw { .. }) {
                        Some(support_winners(ledger, *support_fraction)?)
                    } else {
                        Some(support_losers(ledger, *support_fraction)?)
                    };
                    let alloc = uc_allocation(grid, ledger, mask.as_ref())?;
                    (constant_combo_portfolio(&alloc, comps)?, alloc)
                }
                EnsembleKind::Wae => {
                    let active: Vec<usize> = (0..self.k).collect();
                    let mut weights = Vec::with_capacity(self.k);
                    normalized_exp_weights(self.comp_ledger.log_wealth(), &active, &mut weights);
                    (constant_combo_portfolio(&weights, comps)?, weights)
                }
                EnsembleKind::Fl => {
                    let b = fl_portfolio(&self.comp_ledger, comps)?;
                    let alloc = if self.comp_ledger.period() == 0 {
                        vec![1.0 / self.k as f64; self.k]
                    } else {
                        let leader = argmax(self.comp_ledger.log_wealth()).expect("non-empty");
                        let mut a = vec![0.0; self.k];
                        a[leader] = 1.0;
                        a
                    };
                    (b, alloc)
                }
                EnsembleKind::UcLarge => {
                    let (partition, grid, ledger) = self.large.as_ref().expect("validated");
                    let reps = reps.as_ref().expect("representatives computed");
                    let b = uc_large_portfolio(grid, ledger, reps, None)?;
                    let dist =
                        allocation_distribution(grid, ledger, &self.comp_ledger, partition)?;
                    (b, dist.probs().to_vec())
                }
            };
            portfolios.push(b);
            allocations.push(alloc);
        }

        // realize
        let comp_returns: Vec<f64> = comps.iter().map(|c| dot(c.weights(), x)).collect();
        let ens_returns: Vec<f64> = portfolios.iter().map(|b| dot(b.weights(), x)).collect();
        let rep_returns: Option<Vec<f64>> = reps
            .as_ref()
            .map(|rs| rs.iter().map(|b| dot(b.weights(), x)).collect());

        // update ledgers
        self.comp_ledger.update(&comp_returns)?;
        if let Some((grid, ledger)) = self.comp_grid.as_mut() {
            let rho = grid_returns(grid, &comp_returns);
            ledger.update(&rho)?;
        }
        if let Some((_, grid, ledger)) = self.large.as_mut() {
            let rho = grid_returns(grid, rep_returns.as_ref().expect("computed"));
            ledger.update(&rho)?;
        }
        self.ens_ledger.update(&ens_returns)?;

        let grid_best = self.comp_grid.as_ref().map(|(_, l)| best_entry(l));
        let large_best = self.large.as_ref().map(|(_, _, l)| best_entry(l));
        Ok(PeriodRecord {
            period: self.comp_ledger.period(),
            portfolios,
            allocations,
            comp_returns,
            ens_returns,
            comp_log_wealth: self.comp_ledger.log_wealth().to_vec(),
            ens_log_wealth: self.ens_ledger.log_wealth().to_vec(),
            grid_best,
            large_best,
        })
    }
}

fn best_entry(ledger: &WealthLedger) -> GridBest {
    let index = argmax(ledger.log_wealth()).expect("non-empty ledger");
    GridBest {
        index,
        log_wealth: ledger.log_wealth()[index],
    }
}

/// Per-grid-point gross returns <lambda, r> from per-component returns.
fn grid_returns(grid: &SimplexGrid, comp_returns: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut rho = vec![0.0; n];
    if n >= PAR_GRID_THRESHOLD {
        rho.par_iter_mut()
            .enumerate()
            .for_each(|(j, slot)| *slot = dot(grid.point(j), comp_returns));
    } else {
        for (j, slot) in rho.iter_mut().enumerate() {
            *slot = dot(grid.point(j), comp_returns);
        }
    }
    rho
}
