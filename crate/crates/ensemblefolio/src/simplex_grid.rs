//! Deterministic enumeration of simplex grids.
//!
//! A grid over the k-simplex with step denominator D is the set of points
//! c/D where c runs over all integer compositions of D into k parts. The
//! enumeration order is descending lexicographic in the compositions, so
//! the first point is always the first vertex e_1 and the last is e_k.
//! Counts follow the stars-and-bars formula C(D+k-1, k-1).

use crate::{Error, Result};

/// Default cap on the number of grid points that may be materialized.
pub const DEFAULT_POINT_CAP: u64 = 5_000_000;

/// An enumerated grid on the k-simplex.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    dim: usize,
    step_den: u32,
    comps: Vec<u32>,
    points: Vec<f64>,
}

impl SimplexGrid {
    /// Number of grid points.
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.points.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Dimension k of the simplex.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Step denominator D; every coordinate is an exact multiple of 1/D.
    pub fn step_den(&self) -> u32 {
        self.step_den
    }

    /// The i-th grid point as a weight vector.
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// The i-th grid point as an integer composition of D.
    pub fn composition(&self, i: usize) -> &[u32] {
        &self.comps[i * self.dim..(i + 1) * self.dim]
    }

    /// Iterates over all grid points in enumeration order.
    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    /// Index of the vertex that puts all weight on coordinate j.
    pub fn vertex_index(&self, j: usize) -> Option<usize> {
        (0..self.len()).find(|&i| {
            let c = self.composition(i);
            c[j] == self.step_den && c.iter().enumerate().all(|(l, &v)| l == j || v == 0)
        })
    }

    fn from_compositions(dim: usize, step_den: u32, comps: Vec<u32>) -> Self {
        let d = step_den as f64;
        let points = comps.iter().map(|&c| c as f64 / d).collect();
        SimplexGrid {
            dim,
            step_den,
            comps,
            points,
        }
    }
}

/// Number of points of the (k, D) grid without materializing it.
pub fn grid_point_count(k: usize, step_den: u32) -> Result<u128> {
    if k < 1 {
        return Err(Error::Config("grid dimension must be at least 1".into()));
    }
    if step_den < 1 {
        return Err(Error::Config("step denominator must be at least 1".into()));
    }
    let n = step_den as u128 + k as u128 - 1;
    let mut r = k as u128 - 1;
    r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc
            .checked_mul(n - r + 1 + i)
            .ok_or(Error::Capacity {
                count: u128::MAX,
                cap: u64::MAX,
            })?
            / (i + 1);
    }
    Ok(acc)
}

/// Enumerates the (k, D) grid under the default point cap.
pub fn enumerate_grid(k: usize, step_den: u32) -> Result<SimplexGrid> {
    enumerate_grid_with_cap(k, step_den, DEFAULT_POINT_CAP)
}

/// Enumerates the (k, D) grid, refusing to materialize more than `cap` points.
pub fn enumerate_grid_with_cap(k: usize, step_den: u32, cap: u64) -> Result<SimplexGrid> {
    let count = grid_point_count(k, step_den)?;
    if count > cap as u128 {
        return Err(Error::Capacity { count, cap });
    }
    let mut comps = Vec::with_capacity(count as usize * k);
    let mut prefix = Vec::with_capacity(k);
    fill_compositions(&mut comps, &mut prefix, step_den, k);
    Ok(SimplexGrid::from_compositions(k, step_den, comps))
}

fn fill_compositions(out: &mut Vec<u32>, prefix: &mut Vec<u32>, remaining: u32, slots: usize) {
    if slots == 1 {
        out.extend_from_slice(prefix);
        out.push(remaining);
        return;
    }
    for c in (0..=remaining).rev() {
        prefix.push(c);
        fill_compositions(out, prefix, remaining - c, slots - 1);
        prefix.pop();
    }
}

/// Union of two grids over the same simplex, with exact deduplication.
///
/// Compositions are rescaled to the least common step denominator, merged,
/// and re-sorted into the canonical descending-lexicographic order, so the
/// union of a grid with itself is the grid again. Mixture weights over a
/// union stay uniform per point.
pub fn union_grids(a: &SimplexGrid, b: &SimplexGrid) -> Result<SimplexGrid> {
    if a.dim != b.dim {
        return Err(Error::Config(format!(
            "cannot union grids of dimension {} and {}",
            a.dim, b.dim
        )));
    }
    let l = lcm_u32(a.step_den, b.step_den).ok_or_else(|| {
        Error::Config("union step denominator overflows supported range".into())
    })?;
    let fa = l / a.step_den;
    let fb = l / b.step_den;
    let mut rows: Vec<Vec<u32>> = Vec::with_capacity(a.len() + b.len());
    for i in 0..a.len() {
        rows.push(a.composition(i).iter().map(|&c| c * fa).collect());
    }
    for i in 0..b.len() {
        rows.push(b.composition(i).iter().map(|&c| c * fb).collect());
    }
    rows.sort_by(|x, y| y.cmp(x));
    rows.dedup();
    let comps = rows.into_iter().flatten().collect();
    Ok(SimplexGrid::from_compositions(a.dim, l, comps))
}

fn lcm_u32(a: u32, b: u32) -> Option<u32> {
    fn gcd(mut a: u32, mut b: u32) -> u32 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    let g = gcd(a, b);
    (a / g).checked_mul(b)
}
