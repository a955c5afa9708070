//! Dense symmetric/Hermitian eigenvalue routines for the small matrices
//! used throughout (order <= 64): cyclic Jacobi, generic over the scalar
//! so the extended-precision fallback reuses the same code path.
//!
//! Hermitian problems are handled through the real embedding
//! [[Re, -Im], [Im, Re]], which has the same spectrum with every
//! eigenvalue doubled.

use crate::dd::Real;

/// Cyclic Jacobi on a symmetric matrix (row-major, square).
/// Returns eigenvalues (unsorted) and, optionally, the eigenvector matrix
/// with eigenvectors in columns.
pub fn jacobi_symmetric<R: Real>(
    mut a: Vec<Vec<R>>,
    want_vectors: bool,
) -> (Vec<R>, Option<Vec<Vec<R>>>) {
    let n = a.len();
    let mut v = if want_vectors {
        let mut id = vec![vec![R::zero(); n]; n];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = R::one();
        }
        Some(id)
    } else {
        None
    };
    if n <= 1 {
        let evs = (0..n).map(|i| a[i][i]).collect();
        return (evs, v);
    }

    let tol = R::from_f64(R::eps());
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        // Off-diagonal Frobenius norm vs. diagonal scale.
        let mut off = R::zero();
        let mut diag = R::zero();
        for i in 0..n {
            diag = diag + a[i][i] * a[i][i];
            for j in (i + 1)..n {
                off = off + a[i][j] * a[i][j];
            }
        }
        let scale = (diag + off + off).sqrt();
        if off.sqrt().to_f64() <= tol.to_f64() * scale.to_f64().max(1e-300) {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs().to_f64() == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (apq + apq);
                // t = sign(theta) / (|theta| + sqrt(1 + theta^2)); for huge
                // theta use t = 1/(2 theta) so theta^2 cannot overflow.
                let t = if theta.to_f64().abs() > 1e150 {
                    R::one() / (theta + theta)
                } else {
                    let t_abs =
                        R::one() / (theta.abs() + (R::one() + theta * theta).sqrt());
                    if theta.to_f64() < 0.0 {
                        -t_abs
                    } else {
                        t_abs
                    }
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = t * c;
                let tau = s / (R::one() + c);
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = R::zero();
                a[q][p] = R::zero();
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        let new_ip = aip - s * (aiq + tau * aip);
                        let new_iq = aiq + s * (aip - tau * aiq);
                        a[i][p] = new_ip;
                        a[p][i] = new_ip;
                        a[i][q] = new_iq;
                        a[q][i] = new_iq;
                    }
                }
                if let Some(vm) = v.as_mut() {
                    for row in vm.iter_mut() {
                        let vip = row[p];
                        let viq = row[q];
                        row[p] = vip - s * (viq + tau * vip);
                        row[q] = viq + s * (vip - tau * viq);
                    }
                }
            }
        }
    }
    let evs = (0..n).map(|i| a[i][i]).collect();
    (evs, v)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues<R: Real>(a: Vec<Vec<R>>) -> Vec<R> {
    let (mut evs, _) = jacobi_symmetric(a, false);
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    evs
}

/// Eigenvalues of a Hermitian matrix given as (real part, imaginary part),
/// ascending, via the real embedding.
pub fn hermitian_eigenvalues<R: Real>(re: &[Vec<R>], im: &[Vec<R>]) -> Vec<R> {
    let n = re.len();
    let mut big = vec![vec![R::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            big[i][j] = re[i][j];
            big[n + i][n + j] = re[i][j];
            big[i][n + j] = -im[i][j];
            big[n + i][j] = im[i][j];
        }
    }
    let evs = symmetric_eigenvalues(big);
    // Each eigenvalue appears twice; keep one representative per pair.
    evs.into_iter().step_by(2).collect()
}

/// Nodes and weights of a Gauss rule from the Jacobi (tridiagonal) matrix:
/// `diag` holds the recurrence alphas, `offdiag[k]` = sqrt(beta_{k+1}).
/// `total_mass` is the zeroth moment of the measure.
/// Returns (nodes ascending, weights).
pub fn golub_welsch<R: Real>(diag: &[R], offdiag: &[R], total_mass: R) -> (Vec<R>, Vec<R>) {
    let n = diag.len();
    let mut a = vec![vec![R::zero(); n]; n];
    for i in 0..n {
        a[i][i] = diag[i];
        if i + 1 < n {
            a[i][i + 1] = offdiag[i];
            a[i + 1][i] = offdiag[i];
        }
    }
    let (evs, vecs) = jacobi_symmetric(a, true);
    let vecs = vecs.unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| evs[i].partial_cmp(&evs[j]).unwrap());
    let nodes: Vec<R> = order.iter().map(|&i| evs[i]).collect();
    let weights: Vec<R> = order
        .iter()
        .map(|&i| vecs[0][i] * vecs[0][i] * total_mass)
        .collect();
    (nodes, weights)
}

/// Eckart–Young residual: the Frobenius distance from a Hermitian matrix
/// to the nearest rank-k matrix, sqrt(sigma_{k+1}^2 + ... + sigma_n^2).
pub fn low_rank_gap(re: &[Vec<f64>], im: &[Vec<f64>], k: usize) -> f64 {
    let evs = hermitian_eigenvalues(re, im);
    let mut sing: Vec<f64> = evs.iter().map(|e| e.abs()).collect();
    sing.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sing.iter().skip(k).map(|s| s * s).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::Dd;

    #[test]
    fn two_by_two_known_spectrum() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let evs = symmetric_eigenvalues(a);
        assert!((evs[0] - 1.0).abs() < 1e-14);
        assert!((evs[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_embedding() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let re = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let im = vec![vec![0.0, 1.0], vec![-1.0, 0.0]];
        let evs = hermitian_eigenvalues(&re, &im);
        assert!(evs[0].abs() < 1e-14);
        assert!((evs[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golub_welsch_legendre_two_point() {
        // Monic Legendre on [-1,1]: alpha_k = 0, beta_1 = 1/3.
        let diag = vec![0.0, 0.0];
        let off = vec![(1.0f64 / 3.0).sqrt()];
        let (nodes, weights) = golub_welsch(&diag, &off, 1.0);
        let x = 1.0 / 3.0f64.sqrt();
        assert!((nodes[0] + x).abs() < 1e-14);
        assert!((nodes[1] - x).abs() < 1e-14);
        assert!((weights[0] - 0.5).abs() < 1e-14);
        assert!((weights[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn extended_precision_eigen() {
        let a = vec![
            vec![Dd::from_f64(2.0), Dd::from_f64(1.0)],
            vec![Dd::from_f64(1.0), Dd::from_f64(2.0)],
        ];
        let evs = symmetric_eigenvalues(a);
        assert!((evs[0] - Dd::ONE).abs().to_f64() < 1e-28);
        assert!((evs[1] - Dd::from_f64(3.0)).abs().to_f64() < 1e-28);
    }

    #[test]
    fn low_rank_gap_identity() {
        let re = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let im = vec![vec![0.0; 3]; 3];
        assert!((low_rank_gap(&re, &im, 2) - 1.0).abs() < 1e-14);
        assert!((low_rank_gap(&re, &im, 0) - 3.0f64.sqrt()).abs() < 1e-14);
    }
}
