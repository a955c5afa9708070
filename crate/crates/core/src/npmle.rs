//! Grid-based nonparametric maximum likelihood estimation of the mixing
//! law: the atom locations are fixed on a grid (making the inner problem
//! convex over the weight simplex) and the weights are driven by
//! monotone multiplicative (EM) updates until first-order optimality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::{AtomicLaw, MixingLaw};
use crate::mixture::{divergence, DivergenceKind};

/// Prior class the estimated mixing law must respect; only its support
/// interval matters for the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    Bounded { m_halfwidth: f64 },
    SubWeibull { alpha: f64, beta: f64 },
}

impl Constraint {
    /// Effective support interval used to clip the grid.
    pub fn interval(&self) -> Result<(f64, f64)> {
        match *self {
            Constraint::Bounded { m_halfwidth } => {
                if !(m_halfwidth > 0.0) {
                    return Err(Error::Validation("constraint needs M > 0".into()));
                }
                Ok((-m_halfwidth, m_halfwidth))
            }
            Constraint::SubWeibull { alpha, beta } => {
                let law = MixingLaw::sub_weibull(alpha, beta)?;
                Ok(law.support())
            }
        }
    }
}

/// A sample plus the candidate atom grid.
#[derive(Debug, Clone)]
pub struct NpmleProblem {
    /// Sorted observations.
    pub sample: Vec<f64>,
    /// Sorted candidate atom locations inside the constraint support.
    pub grid: Vec<f64>,
    pub constraint: Constraint,
}

/// Default grid spacing.
pub const GRID_STEP: f64 = 0.05;
/// Default padding added on both sides of the sample range.
pub const GRID_PAD: f64 = 3.0;

impl NpmleProblem {
    /// Build a problem with the default grid: the sample range padded by
    /// 3 on each side, step 0.05, clipped to the constraint support.
    pub fn new(mut sample: Vec<f64>, constraint: Constraint) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::Validation("sample must be non-empty".into()));
        }
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation("sample must be finite".into()));
        }
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (clo, chi) = constraint.interval()?;
        let lo = (sample[0] - GRID_PAD).max(clo);
        let hi = (sample[sample.len() - 1] + GRID_PAD).min(chi);
        let mut grid = Vec::new();
        let mut g = lo;
        while g <= hi + 1e-12 {
            grid.push(g.min(hi));
            g += GRID_STEP;
        }
        if grid.is_empty() {
            grid.push(clo.max(lo.min(chi)));
        }
        Self::with_grid(sample, grid, constraint)
    }

    /// Build a problem with an explicit grid.
    pub fn with_grid(sample: Vec<f64>, grid: Vec<f64>, constraint: Constraint) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Validation("grid must be non-empty".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("grid must be strictly increasing".into()));
        }
        let (clo, chi) = constraint.interval()?;
        if grid[0] < clo - 1e-12 || grid[grid.len() - 1] > chi + 1e-12 {
            return Err(Error::Validation(
                "grid must lie inside the constraint support".into(),
            ));
        }
        let mut sample = sample;
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(NpmleProblem {
            sample,
            grid,
            constraint,
        })
    }
}

/// Result of a fit: weights on the grid simplex plus diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NpmleFit {
    pub weights: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: u32,
    /// max_j (1/n) sum_i phi(X_i - g_j) / f_w(X_i) - 1 at termination.
    pub gradient_slack: f64,
    /// Per-iteration average log-likelihood, for monotonicity checks.
    pub loglik_trace: Vec<f64>,
}

impl NpmleFit {
    /// The fitted mixing law, with negligible atoms pruned.
    pub fn mixing_law(&self, grid: &[f64]) -> Result<MixingLaw> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (&g, &w) in grid.iter().zip(&self.weights) {
            if w > 1e-12 {
                atoms.push(g);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(MixingLaw::Atomic(AtomicLaw::new(atoms, weights)?))
    }
}

const INV_SQRT_2PI: f64 = 0.3989422804014327;

/// One likelihood pass: average log-likelihood and the normalized
/// directional derivatives (1/n) sum_i phi(X_i - g_j) / f_w(X_i).
fn likelihood_pass(kernel: &[f64], n: usize, g: usize, w: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut ll = 0.0f64;
    let mut direction = vec![0.0f64; g];
    for i in 0..n {
        let row = &kernel[i * g..(i + 1) * g];
        let f: f64 = row.iter().zip(w).map(|(&k, &wj)| k * wj).sum();
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Numerical(format!(
                "likelihood vanished at observation {i}; grid does not cover the sample"
            )));
        }
        ll += f.ln();
        let inv = 1.0 / f;
        for (dj, &k) in direction.iter_mut().zip(row) {
            *dj += k * inv;
        }
    }
    for dj in &mut direction {
        *dj /= n as f64;
    }
    Ok((ll / n as f64, direction))
}

/// Multiplicative update w_j <- w_j d_j, renormalized (the update
/// conserves mass analytically; this removes floating-point drift).
fn em_update(w: &[f64], direction: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = w.iter().zip(direction).map(|(&wj, &dj)| wj * dj).collect();
    let total: f64 = out.iter().sum();
    for wj in &mut out {
        *wj /= total;
    }
    out
}

/// Solve the dense symmetric linear system by Gaussian elimination with
/// partial pivoting; returns None when the pivot degenerates.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if !(mag > 1e-300) {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Active-set Newton polish: restrict to the grid points carrying
/// weight, solve the equality-constrained first-order conditions by
/// Newton steps with a positivity ratio test, and re-admit outside
/// points whose directional derivative exceeds one. Returns an improved
/// weight vector or None when no progress is possible.
fn refine_active_set(
    kernel: &[f64],
    n: usize,
    g: usize,
    w: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let mut active: Vec<usize> = (0..g).filter(|&j| w[j] > 1e-12).collect();
    if active.is_empty() {
        return None;
    }
    let mut wa: Vec<f64> = active.iter().map(|&j| w[j]).collect();
    let total: f64 = wa.iter().sum();
    for x in &mut wa {
        *x /= total;
    }
    for _ in 0..200 {
        let k = active.len();
        // Mixture values and full-grid directional derivatives.
        let mut f = vec![0.0f64; n];
        for (i, fi) in f.iter_mut().enumerate() {
            let row = &kernel[i * g..(i + 1) * g];
            *fi = active.iter().zip(&wa).map(|(&j, &x)| row[j] * x).sum();
            if !(*fi > 0.0) {
                return None;
            }
        }
        let mut dir = vec![0.0f64; g];
        for i in 0..n {
            let row = &kernel[i * g..(i + 1) * g];
            let inv = 1.0 / f[i];
            for (dj, &kij) in dir.iter_mut().zip(row) {
                *dj += kij * inv;
            }
        }
        for dj in &mut dir {
            *dj /= n as f64;
        }
        // KKT residual on the active set and worst outside violator.
        let active_res = active
            .iter()
            .map(|&j| (dir[j] - 1.0).abs())
            .fold(0.0f64, f64::max);
        let outside = (0..g)
            .filter(|j| !active.contains(j))
            .max_by(|&a, &b| dir[a].partial_cmp(&dir[b]).unwrap());
        if active_res <= 0.1 * tol {
            if let Some(j) = outside {
                if dir[j] > 1.0 + 0.1 * tol {
                    active.push(j);
                    active.sort_unstable();
                    let pos = active.iter().position(|&x| x == j).unwrap();
                    wa.insert(pos, 0.0);
                    continue;
                }
            }
            // Converged: expand back to the full grid.
            let mut out = vec![0.0f64; g];
            for (&j, &x) in active.iter().zip(&wa) {
                out[j] = x.max(0.0);
            }
            let total: f64 = out.iter().sum();
            for x in &mut out {
                *x /= total;
            }
            return Some(out);
        }
        // Newton system on the active set with the simplex equality:
        // [H 1; 1^T 0] [dw; nu] = [1 - dir_A; 0],
        // H_{jk} = (1/n) sum_i K_ij K_ik / f_i^2.
        let mut sys = vec![vec![0.0f64; k + 1]; k + 1];
        for (aj, &j) in active.iter().enumerate() {
            for (ak, &kk) in active.iter().enumerate().skip(aj) {
                let mut h = 0.0;
                for i in 0..n {
                    let row = &kernel[i * g..(i + 1) * g];
                    h += row[j] * row[kk] / (f[i] * f[i]);
                }
                h /= n as f64;
                sys[aj][ak] = h;
                sys[ak][aj] = h;
            }
            sys[aj][k] = 1.0;
            sys[k][aj] = 1.0;
        }
        let mut rhs = vec![0.0f64; k + 1];
        for (aj, &j) in active.iter().enumerate() {
            rhs[aj] = dir[j] - 1.0;
        }
        let sol = solve_dense(sys, rhs)?;
        // Ratio test: stay strictly feasible, dropping any weight that
        // the full step would push through zero.
        let mut step = 1.0f64;
        for (aj, x) in wa.iter().enumerate() {
            if sol[aj] < 0.0 {
                step = step.min(-x / sol[aj]);
            }
        }
        let hit_boundary = step < 1.0;
        let step = step.min(1.0);
        for (aj, x) in wa.iter_mut().enumerate() {
            *x = (*x + step * sol[aj]).max(0.0);
        }
        let total: f64 = wa.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        for x in &mut wa {
            *x /= total;
        }
        if hit_boundary {
            let keep: Vec<(usize, f64)> = active
                .iter()
                .zip(&wa)
                .filter(|&(_, &x)| x > 1e-14)
                .map(|(&j, &x)| (j, x))
                .collect();
            if keep.is_empty() {
                return None;
            }
            active = keep.iter().map(|&(j, _)| j).collect();
            wa = keep.iter().map(|&(_, x)| x).collect();
        }
    }
    None
}

/// Multiplicative (EM) fixed-point iteration
/// w_j <- w_j (1/n) sum_i phi(X_i - g_j) / f_w(X_i),
/// stopped when the gradient slack drops to tol or when max_iters
/// likelihood passes have been spent. Plain EM steps are interleaved
/// with squared-extrapolation (SQUAREM-style) steps that are accepted
/// only when they do not decrease the log-likelihood, so the recorded
/// trace stays non-decreasing.
pub fn npmle_fit(problem: &NpmleProblem, max_iters: u32, tol: f64) -> Result<NpmleFit> {
    let n = problem.sample.len();
    let g = problem.grid.len();
    // Kernel matrix phi(X_i - g_j), row-major by observation.
    let mut kernel = vec![0.0f64; n * g];
    for (i, &x) in problem.sample.iter().enumerate() {
        for (j, &a) in problem.grid.iter().enumerate() {
            let d = x - a;
            kernel[i * g + j] = INV_SQRT_2PI * (-0.5 * d * d).exp();
        }
    }
    let mut w = vec![1.0 / g as f64; g];
    let mut trace = Vec::new();
    let mut iterations = 0u32;
    let mut outer = 0u32;
    loop {
        let (ll0, d0) = likelihood_pass(&kernel, n, g, &w)?;
        iterations += 1;
        trace.push(ll0);
        let slack = d0.iter().fold(f64::NEG_INFINITY, |a, &d| a.max(d)) - 1.0;
        if slack <= tol || iterations >= max_iters {
            return Ok(NpmleFit {
                weights: w,
                log_likelihood: ll0,
                iterations,
                gradient_slack: slack,
                loglik_trace: trace,
            });
        }
        // Once EM has localized the support, polish the active set with
        // Newton steps on the first-order conditions; accept only
        // likelihood improvements so the trace stays monotone.
        outer += 1;
        if slack <= 1e-3 || outer % 16 == 0 {
            if let Some(cand) = refine_active_set(&kernel, n, g, &w, tol) {
                if let Ok((llr, _)) = likelihood_pass(&kernel, n, g, &cand) {
                    iterations += 1;
                    if llr >= ll0 {
                        w = cand;
                        continue;
                    }
                }
            }
        }
        // Two plain EM steps.
        let w1 = em_update(&w, &d0);
        let (_ll1, d1) = likelihood_pass(&kernel, n, g, &w1)?;
        iterations += 1;
        let w2 = em_update(&w1, &d1);
        if iterations + 2 >= max_iters {
            w = w2;
            continue;
        }
        // Squared extrapolation through w0, w1, w2.
        let r: Vec<f64> = w1.iter().zip(&w).map(|(&a, &b)| a - b).collect();
        let v: Vec<f64> = w2
            .iter()
            .zip(&w1)
            .zip(&r)
            .map(|((&a, &b), &rj)| a - b - rj)
            .collect();
        let rn: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let vn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(vn > 0.0) || !rn.is_finite() {
            w = w2;
            continue;
        }
        let alpha = -(rn / vn).max(1.0);
        let mut cand: Vec<f64> = (0..g)
            .map(|j| (w[j] - 2.0 * alpha * r[j] + alpha * alpha * v[j]).max(0.0))
            .collect();
        let total: f64 = cand.iter().sum();
        if !(total > 0.0) {
            w = w2;
            continue;
        }
        for c in &mut cand {
            *c /= total;
        }
        // Stabilize with one EM step and accept only if it beats the
        // plain double step.
        let (ll2, d2) = likelihood_pass(&kernel, n, g, &w2)?;
        iterations += 1;
        match likelihood_pass(&kernel, n, g, &cand) {
            Ok((llc, dc)) => {
                iterations += 1;
                if llc >= ll2 {
                    w = em_update(&cand, &dc);
                } else {
                    w = em_update(&w2, &d2);
                }
            }
            Err(_) => {
                w = em_update(&w2, &d2);
            }
        }
    }
}

/// Default stopping parameters.
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: u32 = 20_000;

/// Reference rate epsilon_n = log n / sqrt(n log(1 + sqrt(log n) / M)).
pub fn epsilon_n(n: usize, m_halfwidth: f64) -> f64 {
    let ln_n = (n as f64).ln();
    ln_n / (n as f64 * (1.0 + ln_n.sqrt() / m_halfwidth).ln()).sqrt()
}

/// One replicate of the rate scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateScanRow {
    pub n: usize,
    pub replicate: u32,
    pub hellinger: f64,
    pub log_likelihood: f64,
    pub iterations: u32,
}

/// Per-n summary of the rate scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateSummary {
    pub n: usize,
    pub mean_hellinger: f64,
    pub std_error: f64,
    pub epsilon_n: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateScan {
    pub rows: Vec<RateScanRow>,
    pub summary: Vec<RateSummary>,
}

fn replicate_seed(seed: u64, n: usize, replicate: u32) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (replicate as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Sample X_i = U_i + Z_i with U ~ truth and Z standard normal, fit the
/// NPMLE under the constraint, and measure the Hellinger distance to
/// the true mixture, for each n and replicate. Replicates run in
/// parallel; the output ordering and values are independent of the
/// worker count.
pub fn rate_scan(
    truth: &MixingLaw,
    constraint: Constraint,
    n_list: &[usize],
    replicates: u32,
    seed: u64,
) -> Result<RateScan> {
    if n_list.is_empty() || replicates == 0 {
        return Err(Error::Validation(
            "need at least one sample size and one replicate".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("n_list must be strictly increasing".into()));
    }
    let cases: Vec<(usize, u32)> = n_list
        .iter()
        .flat_map(|&n| (0..replicates).map(move |r| (n, r)))
        .collect();
    let rows: Vec<RateScanRow> = cases
        .par_iter()
        .map(|&(n, replicate)| -> Result<RateScanRow> {
            let s = replicate_seed(seed, n, replicate);
            let centers = truth.sample(n, s)?;
            let noise_law = MixingLaw::gaussian(1.0)?;
            let noise = noise_law.sample(n, s ^ 0xA5A5_A5A5_A5A5_A5A5)?;
            let sample: Vec<f64> = centers
                .iter()
                .zip(&noise)
                .map(|(&u, &z)| u + z)
                .collect();
            let problem = NpmleProblem::new(sample, constraint)?;
            let fit = npmle_fit(&problem, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;
            let fitted = fit.mixing_law(&problem.grid)?;
            let h2 = divergence(DivergenceKind::H2, &fitted, truth)?;
            Ok(RateScanRow {
                n,
                replicate,
                hellinger: h2.value.max(0.0).sqrt(),
                log_likelihood: fit.log_likelihood,
                iterations: fit.iterations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m_eff = {
        let (lo, hi) = constraint.interval()?;
        0.5 * (hi - lo)
    };
    let summary = n_list
        .iter()
        .map(|&n| {
            let hs: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.hellinger)
                .collect();
            let mean = hs.iter().sum::<f64>() / hs.len() as f64;
            let var = if hs.len() > 1 {
                hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (hs.len() - 1) as f64
            } else {
                0.0
            };
            RateSummary {
                n,
                mean_hellinger: mean,
                std_error: (var / hs.len() as f64).sqrt(),
                epsilon_n: epsilon_n(n, m_eff),
            }
        })
        .collect();
    Ok(RateScan { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_observation_concentrates() {
        let problem = NpmleProblem::with_grid(
            vec![0.0],
            vec![-1.0, 0.0, 1.0],
            Constraint::Bounded { m_halfwidth: 1.0 },
        )
        .unwrap();
        let fit = npmle_fit(&problem, DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap();
        assert!(fit.weights[1] > 0.999, "weights {:?}", fit.weights);
        assert!(fit.gradient_slack <= DEFAULT_TOL);
        let sum: f64 = fit.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_loglik_and_slack() {
        let truth = MixingLaw::atomic(vec![-0.5, 0.5], vec![0.5, 0.5]).unwrap();
        let centers = truth.sample(400, 7).unwrap();
        let noise = MixingLaw::gaussian(1.0).unwrap().sample(400, 8).unwrap();
        let sample: Vec<f64> = centers.iter().zip(&noise).map(|(&u, &z)| u + z).collect();
        let problem =
            NpmleProblem::new(sample, Constraint::Bounded { m_halfwidth: 1.0 }).unwrap();
        let fit = npmle_fit(&problem, DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap();
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "log-likelihood decreased: {w:?}");
        }
        assert!(fit.gradient_slack <= DEFAULT_TOL);
        // First-order optimality on the support of w: directional
        // derivative equals 1 up to tolerance where weight is positive.
        let n = problem.sample.len();
        let g = problem.grid.len();
        for j in 0..g {
            if fit.weights[j] > 1e-6 {
                let mut d = 0.0;
                for i in 0..n {
                    let f: f64 = (0..g)
                        .map(|k| {
                            let dx = problem.sample[i] - problem.grid[k];
                            fit.weights[k] * INV_SQRT_2PI * (-0.5 * dx * dx).exp()
                        })
                        .sum();
                    let dx = problem.sample[i] - problem.grid[j];
                    d += INV_SQRT_2PI * (-0.5 * dx * dx).exp() / f;
                }
                let dir = d / n as f64;
                assert!((dir - 1.0).abs() <= 1e-6, "support point {j}: {dir}");
            }
        }
    }

    #[test]
    fn point_mass_recovery() {
        let truth = MixingLaw::atomic(vec![0.0], vec![1.0]).unwrap();
        let noise = MixingLaw::gaussian(1.0).unwrap().sample(2000, 42).unwrap();
        let problem =
            NpmleProblem::new(noise, Constraint::Bounded { m_halfwidth: 1.0 }).unwrap();
        let fit = npmle_fit(&problem, DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap();
        let fitted = fit.mixing_law(&problem.grid).unwrap();
        let h2 = divergence(DivergenceKind::H2, &fitted, &truth).unwrap();
        let h = h2.value.max(0.0).sqrt();
        assert!(h < 0.1, "Hellinger {h}");
    }

    #[test]
    fn grid_refinement_never_hurts() {
        let sample = vec![-0.8, -0.1, 0.3, 0.9];
        let coarse = NpmleProblem::with_grid(
            sample.clone(),
            vec![-0.8, 0.0, 0.8],
            Constraint::Bounded { m_halfwidth: 1.0 },
        )
        .unwrap();
        let fine = NpmleProblem::with_grid(
            sample,
            vec![-0.8, -0.4, 0.0, 0.4, 0.8],
            Constraint::Bounded { m_halfwidth: 1.0 },
        )
        .unwrap();
        let f1 = npmle_fit(&coarse, DEFAULT_MAX_ITERS, 1e-10).unwrap();
        let f2 = npmle_fit(&fine, DEFAULT_MAX_ITERS, 1e-10).unwrap();
        assert!(f2.log_likelihood >= f1.log_likelihood - 1e-9);
    }

    #[test]
    fn epsilon_n_formula() {
        let e = epsilon_n(8000, 1.0);
        let ln_n = 8000f64.ln();
        let want = ln_n / (8000.0 * (1.0 + ln_n.sqrt()).ln()).sqrt();
        assert_abs_diff_eq!(e, want, epsilon = 1e-15);
    }

    #[test]
    fn rate_scan_determinism() {
        let truth = MixingLaw::uniform(1.0).unwrap();
        let c = Constraint::Bounded { m_halfwidth: 1.0 };
        let a = rate_scan(&truth, c, &[120, 240], 2, 99).unwrap();
        let b = rate_scan(&truth, c, &[120, 240], 2, 99).unwrap();
        assert_eq!(a.rows.len(), 4);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.hellinger.to_bits(), y.hellinger.to_bits());
            assert_eq!(x.log_likelihood.to_bits(), y.log_likelihood.to_bits());
            assert_eq!(x.iterations, y.iterations);
        }
        assert_eq!(a.summary.len(), 2);
        assert!(a.summary[0].epsilon_n > a.summary[1].epsilon_n);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            NpmleProblem::new(vec![], Constraint::Bounded { m_halfwidth: 1.0 }),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            NpmleProblem::with_grid(
                vec![0.0],
                vec![0.0, 5.0],
                Constraint::Bounded { m_halfwidth: 1.0 }
            ),
            Err(Error::Validation(_))
        ));
        let truth = MixingLaw::uniform(1.0).unwrap();
        assert!(matches!(
            rate_scan(
                &truth,
                Constraint::Bounded { m_halfwidth: 1.0 },
                &[200, 100],
                1,
                1
            ),
            Err(Error::Validation(_))
        ));
    }
}
