//! Small numeric kernel shared by the other modules.
//!
//! Everything here is deterministic by construction: summations use a fixed
//! reduction tree, so results do not depend on thread count or call site.

/// Sums a slice with a fixed-shape pairwise reduction tree.
///
/// More accurate than a running sum for long slices and bit-reproducible
/// for a given input, which the wealth engine relies on.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// log(sum(exp(x_i))) with max subtraction for stability.
///
/// Returns negative infinity for an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let exps: Vec<f64> = xs.iter().map(|&x| (x - m).exp()).collect();
    m + pairwise_sum(&exps).ln()
}

/// Writes into `out` the weights proportional to exp(logs[i]) for i in
/// `active`, normalized to sum to one, in the order of `active`.
pub fn normalized_exp_weights(logs: &[f64], active: &[usize], out: &mut Vec<f64>) {
    out.clear();
    let m = active
        .iter()
        .map(|&i| logs[i])
        .fold(f64::NEG_INFINITY, f64::max);
    out.extend(active.iter().map(|&i| (logs[i] - m).exp()));
    let z = pairwise_sum(out);
    for w in out.iter_mut() {
        *w /= z;
    }
}

/// Index of the maximum entry; ties resolve to the lowest index.
pub fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(j) => {
                if x > xs[j] {
                    best = Some(i);
                }
            }
        }
    }
    best
}

/// Eigenvalues of a symmetric n-by-n matrix (row-major), ascending.
///
/// Cyclic Jacobi sweeps; intended for the small matrices that show up as
/// return covariances, not as a general-purpose eigensolver.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix must be n*n");
    let mut m = a.to_vec();
    if n <= 1 {
        return m;
    }
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for _ in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].abs();
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-18 * scale {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = m[i * n + p];
                    let aiq = m[i * n + q];
                    m[i * n + p] = c * aip - s * aiq;
                    m[i * n + q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = m[p * n + i];
                    let aqi = m[q * n + i];
                    m[p * n + i] = c * api - s * aqi;
                    m[q * n + i] = s * api + c * aqi;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// FNV-1a 64-bit hash, used to fingerprint configurations in manifests.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
