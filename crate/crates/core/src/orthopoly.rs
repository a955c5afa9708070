//! Orthogonal polynomial kernel: Hermite, scaled Legendre, Chebyshev-U,
//! and Rogers-Szego families, q-series utilities, and the arc
//! construction that transfers Chebyshev orthogonality from an interval
//! to an arc of the unit circle.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::integrate;

const PI: f64 = std::f64::consts::PI;

/// Polynomial family selector. The real-line families evaluate at real
/// points; Rogers-Szego evaluates on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolyFamily {
    /// Probabilists' Hermite: E[H_j(Z) H_k(Z)] = k! delta_jk for Z ~ N(0,1).
    Hermite,
    /// sqrt(2n+1) P_n: orthonormal for U ~ Unif[-1,1].
    LegendreScaled,
    /// Chebyshev second kind: orthonormal under (2/pi) sqrt(1-x^2).
    ChebyshevU,
    /// Orthonormal under the wrapped Gaussian of variance -log q.
    RogersSzego { q: f64 },
}

/// q-Pochhammer (q)_n = (1-q)(1-q^2)...(1-q^n); (q)_0 = 1.
pub fn q_pochhammer(q: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    let mut qk = q;
    for _ in 0..n {
        acc *= 1.0 - qk;
        qk *= q;
    }
    acc
}

/// Euler function (q)_infinity, truncated when the factors are
/// indistinguishable from 1.
pub fn q_pochhammer_inf(q: f64) -> f64 {
    let mut acc = 1.0;
    let mut qk = q;
    while qk > 1e-17 {
        acc *= 1.0 - qk;
        qk *= q;
    }
    acc
}

/// The standard upper bound exp(pi^2 / (6t)) on 1/(q)_infinity,
/// where q = exp(-t).
pub fn euler_inverse_bound(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Validation("q must lie in (0,1)".into()));
    }
    let t = -q.ln();
    Ok((PI * PI / (6.0 * t)).exp())
}

/// q-binomial coefficient [n choose j]_q.
pub fn q_binomial(q: f64, n: u32, j: u32) -> f64 {
    if j > n {
        return 0.0;
    }
    q_pochhammer(q, n) / (q_pochhammer(q, j) * q_pochhammer(q, n - j))
}

fn binom_i128(n: u64, k: u64) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Dense coefficient vector (lowest degree first) of the n-th member of a
/// real-line family, from the printed closed forms. All intermediate
/// quantities are integers (evaluated in i128, exact for n <= 20) apart
/// from a final scale factor.
pub fn poly_coeffs(family: PolyFamily, n: u32) -> Result<Vec<f64>> {
    let mut c = vec![0.0; n as usize + 1];
    match family {
        PolyFamily::Hermite => {
            // Coefficient of x^{n-2j}: (-1)^j C(n, 2j) (2j-1)!!.
            for j in 0..=(n / 2) {
                let mut dfact: i128 = 1;
                let mut i = 2 * j as i128 - 1;
                while i > 1 {
                    dfact *= i;
                    i -= 2;
                }
                let v = binom_i128(n as u64, 2 * j as u64) * dfact;
                c[(n - 2 * j) as usize] = if j % 2 == 0 { v as f64 } else { -(v as f64) };
            }
        }
        PolyFamily::LegendreScaled => {
            // sqrt(2n+1)/2^n * (-1)^k C(n,k) C(2n-2k, n) x^{n-2k}.
            let scale = ((2 * n + 1) as f64).sqrt() / 2f64.powi(n as i32);
            for k in 0..=(n / 2) {
                let v = binom_i128(n as u64, k as u64)
                    * binom_i128((2 * n - 2 * k) as u64, n as u64);
                let signed = if k % 2 == 0 { v as f64 } else { -(v as f64) };
                c[(n - 2 * k) as usize] = scale * signed;
            }
        }
        PolyFamily::ChebyshevU => {
            // Coefficient of x^{n-2k}: (-1)^k C(n-k, k) 2^{n-2k}.
            for k in 0..=(n / 2) {
                let v = binom_i128((n - k) as u64, k as u64)
                    * (1i128 << (n - 2 * k));
                c[(n - 2 * k) as usize] = if k % 2 == 0 { v as f64 } else { -(v as f64) };
            }
        }
        PolyFamily::RogersSzego { q } => {
            return rogers_szego_coeffs(q, n);
        }
    }
    Ok(c)
}

/// Coefficients of the orthonormal Rogers-Szego polynomial
/// R_n(z) = (q)_n^{-1/2} sum_j (-1)^{n-j} [n choose j]_q q^{(n-j)/2} z^j.
pub fn rogers_szego_coeffs(q: f64, n: u32) -> Result<Vec<f64>> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Validation("q must lie in (0,1)".into()));
    }
    let norm = q_pochhammer(q, n).sqrt();
    let mut c = vec![0.0; n as usize + 1];
    for j in 0..=n {
        let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
        c[j as usize] = sign * q_binomial(q, n, j) * q.powf((n - j) as f64 / 2.0) / norm;
    }
    Ok(c)
}

/// Evaluate a real-line family member by its three-term recurrence.
pub fn eval_poly(family: PolyFamily, n: u32, x: f64) -> Result<f64> {
    match family {
        PolyFamily::Hermite => {
            // H_{n+1} = x H_n - n H_{n-1}.
            let (mut prev, mut cur) = (1.0, x);
            if n == 0 {
                return Ok(1.0);
            }
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            Ok(cur)
        }
        PolyFamily::LegendreScaled => {
            // (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}; scale by sqrt(2n+1).
            let (mut prev, mut cur) = (1.0, x);
            if n == 0 {
                return Ok(1.0);
            }
            for k in 1..n {
                let next =
                    ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
                prev = cur;
                cur = next;
            }
            Ok(((2 * n + 1) as f64).sqrt() * cur)
        }
        PolyFamily::ChebyshevU => {
            // U_{n+1} = 2x U_n - U_{n-1}.
            let (mut prev, mut cur) = (1.0, 2.0 * x);
            if n == 0 {
                return Ok(1.0);
            }
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            Ok(cur)
        }
        PolyFamily::RogersSzego { .. } => Err(Error::Unsupported(
            "Rogers-Szego takes a unit-complex argument; use eval_rogers_szego".into(),
        )),
    }
}

/// Evaluate R_n at a point on the unit circle.
pub fn eval_rogers_szego(q: f64, n: u32, z: Complex64) -> Result<Complex64> {
    let c = rogers_szego_coeffs(q, n)?;
    // Horner from the top coefficient.
    let mut acc = Complex64::new(0.0, 0.0);
    for &cj in c.iter().rev() {
        acc = acc * z + cj;
    }
    Ok(acc)
}

/// Max over j, k <= n_max of |<p_j, p_k> - delta_jk| under the family's
/// own weight, computed by quadrature.
pub fn orthonormality_defect(family: PolyFamily, n_max: u32) -> Result<f64> {
    if n_max > 20 {
        return Err(Error::Validation("defect check limited to n <= 20".into()));
    }
    let mut worst = 0.0f64;
    match family {
        PolyFamily::Hermite => {
            for j in 0..=n_max {
                for k in j..=n_max {
                    // Normalize by sqrt(j! k!) to compare against delta.
                    let mut norm = 1.0;
                    for i in 2..=j {
                        norm *= i as f64;
                    }
                    for i in 2..=k {
                        norm *= i as f64;
                    }
                    let norm = norm.sqrt();
                    let (v, _) = integrate(
                        |x| {
                            let hj = eval_poly(PolyFamily::Hermite, j, x).unwrap();
                            let hk = eval_poly(PolyFamily::Hermite, k, x).unwrap();
                            hj * hk / norm * (-0.5 * x * x).exp()
                                / (2.0 * PI).sqrt()
                        },
                        -15.0,
                        15.0,
                        1e-12,
                    )?;
                    let target = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((v - target).abs());
                }
            }
        }
        PolyFamily::LegendreScaled => {
            for j in 0..=n_max {
                for k in j..=n_max {
                    let (v, _) = integrate(
                        |x| {
                            0.5 * eval_poly(PolyFamily::LegendreScaled, j, x).unwrap()
                                * eval_poly(PolyFamily::LegendreScaled, k, x).unwrap()
                        },
                        -1.0,
                        1.0,
                        1e-12,
                    )?;
                    let target = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((v - target).abs());
                }
            }
        }
        PolyFamily::ChebyshevU => {
            // Substitute x = cos t: weight becomes (2/pi) sin^2 t on [0, pi].
            for j in 0..=n_max {
                for k in j..=n_max {
                    let (v, _) = integrate(
                        |t| {
                            let x = t.cos();
                            2.0 / PI
                                * eval_poly(PolyFamily::ChebyshevU, j, x).unwrap()
                                * eval_poly(PolyFamily::ChebyshevU, k, x).unwrap()
                                * t.sin()
                                * t.sin()
                        },
                        0.0,
                        PI,
                        1e-12,
                    )?;
                    let target = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((v - target).abs());
                }
            }
        }
        PolyFamily::RogersSzego { q } => {
            // E[R_j(e^{iaZ}) conj(R_k(e^{iaZ}))] with a^2 = -log q:
            // circle integral against the wrapped Gaussian of variance a^2,
            // by trapezoid rule (spectrally accurate for periodic data).
            let var = -q.ln();
            let n_grid = 1 << 14;
            let coeffs: Vec<Vec<f64>> = (0..=n_max)
                .map(|n| rogers_szego_coeffs(q, n))
                .collect::<Result<_>>()?;
            let mut grams =
                vec![vec![Complex64::new(0.0, 0.0); n_max as usize + 1]; n_max as usize + 1];
            for g in 0..n_grid {
                let theta = 2.0 * PI * g as f64 / n_grid as f64;
                let w = wrapped_gaussian_density(theta, var);
                let z = Complex64::new(0.0, theta).exp();
                let vals: Vec<Complex64> = coeffs
                    .iter()
                    .map(|c| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for &cj in c.iter().rev() {
                            acc = acc * z + cj;
                        }
                        acc
                    })
                    .collect();
                for j in 0..=n_max as usize {
                    for k in j..=n_max as usize {
                        grams[j][k] += vals[j] * vals[k].conj() * w;
                    }
                }
            }
            let h = 2.0 * PI / n_grid as f64;
            for j in 0..=n_max as usize {
                for k in j..=n_max as usize {
                    let v = grams[j][k] * h;
                    let target = if j == k { 1.0 } else { 0.0 };
                    worst = worst.max((v - Complex64::new(target, 0.0)).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// Density at theta of a N(0, var) variable wrapped onto [0, 2pi).
pub fn wrapped_gaussian_density(theta: f64, var: f64) -> f64 {
    let norm = 1.0 / (2.0 * PI * var).sqrt();
    let mut sum = 0.0;
    let mut j = 0i64;
    loop {
        let mut term = 0.0;
        let t1 = theta + 2.0 * PI * j as f64;
        term += (-0.5 * t1 * t1 / var).exp();
        if j > 0 {
            let t2 = theta - 2.0 * PI * j as f64;
            term += (-0.5 * t2 * t2 / var).exp();
        }
        sum += term;
        if term * norm < 1e-18 * (1.0 + sum * norm) && j >= 1 {
            break;
        }
        j += 1;
        if j > 10_000 {
            break;
        }
    }
    sum * norm
}

/// Lower-triangular coefficient matrix of an orthonormal polynomial
/// system on the unit circle: entry (n, j) is the z^j coefficient of
/// the n-th orthonormal member.
#[derive(Debug, Clone)]
pub struct CoeffMatrix {
    pub entries: Vec<Vec<f64>>,
    pub frobenius_sq: f64,
}

impl CoeffMatrix {
    fn from_rows(entries: Vec<Vec<f64>>) -> Self {
        let frobenius_sq = entries
            .iter()
            .flat_map(|r| r.iter())
            .map(|v| v * v)
            .sum();
        CoeffMatrix {
            entries,
            frobenius_sq,
        }
    }

    pub fn order(&self) -> usize {
        self.entries.len()
    }

    /// Sum of squares of row n (used to check the per-row arc bound).
    pub fn row_norm_sq(&self, n: usize) -> f64 {
        self.entries[n].iter().map(|v| v * v).sum()
    }
}

/// Summary of the arc system: leading coefficients and the Frobenius
/// bound sum 2^{2n} kappa_n^2, plus its closed geometric-series majorant.
#[derive(Debug, Clone)]
pub struct ArcSummary {
    pub gamma: f64,
    /// r_n(1/gamma) for the ratio chain r_0 = x, r_n = x - 1/(4 r_{n-1}).
    pub r_chain: Vec<f64>,
    /// kappa_n^2 = 1 / (gamma^{2n+1} r_n(1/gamma)).
    pub kappa_sq: Vec<f64>,
    /// sum_{n<=m} 2^{2n} kappa_n^2.
    pub frobenius_bound: f64,
    /// 2 ((2/gamma)^{2m+2} - 1) / ((2/gamma)^2 - 1).
    pub geometric_bound: f64,
}

/// The ratio chain r_n(x) = p_{n+1}(x)/p_n(x) for monic Chebyshev-U.
pub fn chebyshev_ratio_chain(x: f64, m: u32) -> Vec<f64> {
    let mut r = Vec::with_capacity(m as usize + 1);
    let mut cur = x;
    r.push(cur);
    for _ in 0..m {
        cur = x - 1.0 / (4.0 * cur);
        r.push(cur);
    }
    r
}

/// Leading coefficients and Frobenius bound for the orthonormal system
/// on an arc with opening parameter gamma in (0, 1), built on the
/// Chebyshev weight w(x) = (2/pi) sqrt(1-x^2) with monic p_n = 2^{-n} U_n
/// and h_n = 4^{-n}.
pub fn arc_opuc(gamma: f64, m: u32) -> Result<ArcSummary> {
    if !(gamma > 0.0 && gamma <= 0.99) {
        return Err(Error::OutOfRegime(
            "arc construction requires 0 < gamma <= 0.99".into(),
        ));
    }
    let x = 1.0 / gamma;
    let r_chain = chebyshev_ratio_chain(x, m);
    let mut kappa_sq = Vec::with_capacity(m as usize + 1);
    let mut frob = 0.0;
    for n in 0..=m as usize {
        // kappa_n^{-2} = 2^{2n} gamma^{2n+1} r_n(1/gamma) h_n
        //              = gamma^{2n+1} r_n(1/gamma).
        let ks = 1.0 / (gamma.powi(2 * n as i32 + 1) * r_chain[n]);
        kappa_sq.push(ks);
        frob += 4f64.powi(n as i32) * ks;
    }
    let t = 2.0 / gamma;
    let geometric_bound = 2.0 * (t.powi(2 * m as i32 + 2) - 1.0) / (t * t - 1.0);
    Ok(ArcSummary {
        gamma,
        r_chain,
        kappa_sq,
        frobenius_bound: frob,
        geometric_bound,
    })
}

/// OPUC family selector for explicit coefficient matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpucFamily {
    RogersSzego { q: f64 },
    Arc { gamma: f64 },
}

/// Explicit coefficient matrix of the orthonormal circle polynomials.
///
/// For the arc family the rows are the coefficients of the system for
/// the arc density centered at theta = 0, obtained from the Chebyshev
/// system on the translated arc via phi~_n(z) = (-1)^n psi_n(-z).
pub fn opuc_coeff_matrix(family: OpucFamily, m: u32) -> Result<CoeffMatrix> {
    if m > 40 {
        return Err(Error::Validation("coefficient matrix limited to m <= 40".into()));
    }
    match family {
        OpucFamily::RogersSzego { q } => {
            let mut rows = Vec::with_capacity(m as usize + 1);
            for n in 0..=m {
                let mut row = rogers_szego_coeffs(q, n)?;
                row.resize(m as usize + 1, 0.0);
                rows.push(row);
            }
            Ok(CoeffMatrix::from_rows(rows))
        }
        OpucFamily::Arc { gamma } => {
            if !(gamma > 0.0 && gamma <= 0.99) {
                return Err(Error::OutOfRegime(
                    "arc construction requires 0 < gamma <= 0.99".into(),
                ));
            }
            let summary = arc_opuc(gamma, m)?;
            // Laurent representation of p_n((w + 1/w) / (2 gamma)) on the
            // exponent grid -n..n (step 2): store coefficient of w^{-n+2i}
            // at index i.
            let mut laurent: Vec<Vec<f64>> = vec![vec![1.0]];
            laurent.push(vec![1.0 / (2.0 * gamma), 1.0 / (2.0 * gamma)]);
            for n in 1..=m as usize {
                let pn = &laurent[n];
                let pn1 = &laurent[n - 1];
                // x * p_n: each w^e splits into w^{e-1} and w^{e+1}.
                let mut next = vec![0.0; n + 2];
                for (i, &c) in pn.iter().enumerate() {
                    next[i] += c / (2.0 * gamma);
                    next[i + 1] += c / (2.0 * gamma);
                }
                // minus p_{n-1} / 4, whose exponents sit at offset +1 in
                // the next grid (-n+1..n-1 vs -n-1..n+1).
                for (i, &c) in pn1.iter().enumerate() {
                    next[i + 1] -= c / 4.0;
                }
                laurent.push(next);
            }
            let mut rows = Vec::with_capacity(m as usize + 1);
            for n in 0..=m as usize {
                // S(w) = w^n (w p_{n+1} - r_n p_n): even powers 0..2n+2,
                // i.e. a z-polynomial of degree n+1 with c[i] the z^i coeff.
                let r_n = summary.r_chain[n];
                let mut c = vec![0.0; n + 2];
                for (i, &v) in laurent[n + 1].iter().enumerate() {
                    // w * w^{-(n+1)+2i} * w^n = w^{2i}, i.e. z^i.
                    c[i] += v;
                }
                for (i, &v) in laurent[n].iter().enumerate() {
                    // w^{-n+2i} * w^n = w^{2i}, i.e. z^i.
                    c[i] -= r_n * v;
                }
                // Psi_n(z) = (2 gamma)^{n+1} S(z) / (z - 1), synthetic
                // division from the top (z = 1 is a root by construction).
                let mut psi = vec![0.0; n + 1];
                let mut carry = 0.0;
                for i in (0..=n).rev() {
                    carry += c[i + 1];
                    psi[i] = carry;
                }
                let rem = c[0] + carry;
                if rem.abs() > 1e-8 * carry.abs().max(1.0) {
                    return Err(Error::Numerical(format!(
                        "arc division residual {rem:e} at n = {n}"
                    )));
                }
                let scale = (2.0 * gamma).powi(n as i32 + 1) * summary.kappa_sq[n].sqrt();
                // Translate back: phi~_n(z) = (-1)^n psi_n(-z).
                let flip = if n % 2 == 0 { 1.0 } else { -1.0 };
                let mut row = vec![0.0; m as usize + 1];
                for (j, &v) in psi.iter().enumerate() {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    row[j] = flip * sign * v * scale;
                }
                rows.push(row);
            }
            Ok(CoeffMatrix::from_rows(rows))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn q_series_values() {
        assert_abs_diff_eq!(q_pochhammer(0.5, 1), 0.5, epsilon = 1e-16);
        let inf = q_pochhammer_inf(0.5);
        assert!((inf - 0.2887880951).abs() < 1e-9, "inf = {inf}");
        // (q)_infinity <= (q)_n for all n: factors lie in (0, 1).
        for n in [1, 3, 10] {
            assert!(inf <= q_pochhammer(0.5, n));
        }
        assert!(euler_inverse_bound(0.5).unwrap() >= 1.0 / inf * 0.1);
    }

    #[test]
    fn printed_eval_examples() {
        assert_abs_diff_eq!(
            eval_poly(PolyFamily::Hermite, 3, 2.0).unwrap(),
            2.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            eval_poly(PolyFamily::LegendreScaled, 2, 1.0).unwrap(),
            5f64.sqrt(),
            epsilon = 1e-14
        );
        let q = (-1.0f64).exp();
        let v = eval_rogers_szego(q, 1, Complex64::new(1.0, 0.0)).unwrap();
        let expected = (1.0 - q.sqrt()) / (1.0 - q).sqrt();
        assert_abs_diff_eq!(v.re, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.4948926, epsilon = 1e-7);
    }

    #[test]
    fn recurrence_matches_coefficients() {
        for family in [
            PolyFamily::Hermite,
            PolyFamily::LegendreScaled,
            PolyFamily::ChebyshevU,
        ] {
            for n in 0..=15u32 {
                let c = poly_coeffs(family, n).unwrap();
                for x in [-1.5, -0.3, 0.0, 0.7, 2.0] {
                    let direct = eval_poly(family, n, x).unwrap();
                    let mut horner = 0.0;
                    for &cj in c.iter().rev() {
                        horner = horner * x + cj;
                    }
                    let scale = direct.abs().max(1.0);
                    assert!(
                        (direct - horner).abs() < 1e-11 * scale,
                        "{family:?} n={n} x={x}: {direct} vs {horner}"
                    );
                }
            }
        }
    }

    #[test]
    fn chebyshev_u_angle_identity() {
        // U_n(cos t) = sin((n+1) t) / sin t.
        for n in 0..=12u32 {
            for t in [0.3f64, 1.0, 2.5] {
                let lhs = eval_poly(PolyFamily::ChebyshevU, n, t.cos()).unwrap();
                let rhs = ((n as f64 + 1.0) * t).sin() / t.sin();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hermite_translation_identity() {
        // E[H_k(x + Z)] = x^k for Z ~ N(0,1).
        for k in 0..=10u32 {
            for x in [0.0, 1.0, -1.0, 2.0] {
                let (v, _) = integrate(
                    |z| {
                        eval_poly(PolyFamily::Hermite, k, x + z).unwrap()
                            * (-0.5 * z * z).exp()
                            / (2.0 * PI).sqrt()
                    },
                    -15.0,
                    15.0,
                    1e-11,
                )
                .unwrap();
                assert!(
                    (v - x.powi(k as i32)).abs() < 1e-9 * x.powi(k as i32).abs().max(1.0),
                    "k={k} x={x}: {v}"
                );
            }
        }
    }

    #[test]
    fn rogers_szego_leading_coefficient() {
        let q = 0.4;
        for n in 0..=8u32 {
            let c = rogers_szego_coeffs(q, n).unwrap();
            assert_abs_diff_eq!(
                c[n as usize],
                1.0 / q_pochhammer(q, n).sqrt(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn orthonormality_defects_small() {
        assert!(orthonormality_defect(PolyFamily::LegendreScaled, 5).unwrap() < 1e-10);
        assert!(orthonormality_defect(PolyFamily::Hermite, 5).unwrap() < 1e-10);
        assert!(orthonormality_defect(PolyFamily::ChebyshevU, 6).unwrap() < 1e-10);
        let q = (-1.0f64).exp();
        assert!(orthonormality_defect(PolyFamily::RogersSzego { q }, 4).unwrap() < 1e-8);
    }

    #[test]
    fn ratio_chain_values() {
        let r = chebyshev_ratio_chain(2.0, 2);
        assert_abs_diff_eq!(r[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], 1.875, epsilon = 1e-15);
        assert_abs_diff_eq!(r[2], 1.8666666666666667, epsilon = 1e-15);
        // r_n(x) >= x/2 for x >= 1.
        for x in [1.0, 1.5, 4.0] {
            for v in chebyshev_ratio_chain(x, 50) {
                assert!(v >= x / 2.0 - 1e-12);
            }
        }
    }

    #[test]
    fn arc_bounds() {
        for gamma in [0.2, 0.5, 0.9] {
            for m in [0u32, 3, 8] {
                let s = arc_opuc(gamma, m).unwrap();
                assert!(
                    s.frobenius_bound <= s.geometric_bound * (1.0 + 1e-12),
                    "gamma={gamma} m={m}"
                );
            }
        }
        assert!(arc_opuc(1.0, 3).is_err());
    }

    #[test]
    fn rogers_szego_matrix_m1() {
        let q = (-1.0f64).exp();
        let cm = opuc_coeff_matrix(OpucFamily::RogersSzego { q }, 1).unwrap();
        // ||R||_F^2 = 1 + (1 + q) / (1 - q).
        assert_abs_diff_eq!(
            cm.frobenius_sq,
            1.0 + (1.0 + q) / (1.0 - q),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(cm.frobenius_sq, 3.163953, epsilon = 1e-6);

        let cm0 = opuc_coeff_matrix(OpucFamily::RogersSzego { q }, 0).unwrap();
        assert_abs_diff_eq!(cm0.frobenius_sq, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn arc_matrix_row_bounds_and_orthonormality() {
        let gamma = 0.6;
        let m = 10;
        let cm = opuc_coeff_matrix(OpucFamily::Arc { gamma }, m).unwrap();
        let s = arc_opuc(gamma, m).unwrap();
        for n in 0..=m as usize {
            assert!(
                cm.row_norm_sq(n) <= 4f64.powi(n as i32) * s.kappa_sq[n] * (1.0 + 1e-10),
                "row {n}"
            );
            // Diagonal entry is the leading coefficient kappa_n.
            assert_abs_diff_eq!(
                cm.entries[n][n],
                s.kappa_sq[n].sqrt(),
                epsilon = 1e-9 * s.kappa_sq[n].sqrt()
            );
        }
        assert!(cm.frobenius_sq <= s.frobenius_bound * (1.0 + 1e-10));

        // Independent orthonormality check against the arc density
        // f(theta) = sqrt(gamma^2 - sin^2(theta/2)) cos(theta/2) / (pi gamma^2)
        // on [-b, b] with gamma = sin(b/2).
        let b = 2.0 * gamma.asin();
        let small = opuc_coeff_matrix(OpucFamily::Arc { gamma }, 4).unwrap();
        for j in 0..=4usize {
            for k in j..=4usize {
                let (re, _) = integrate(
                    |theta| {
                        let s2 = (theta / 2.0).sin();
                        let density = (gamma * gamma - s2 * s2).max(0.0).sqrt()
                            * (theta / 2.0).cos()
                            / (PI * gamma * gamma);
                        let z = Complex64::new(0.0, theta).exp();
                        let mut pj = Complex64::new(0.0, 0.0);
                        let mut pk = Complex64::new(0.0, 0.0);
                        for idx in (0..=4).rev() {
                            pj = pj * z + small.entries[j].get(idx).copied().unwrap_or(0.0);
                            pk = pk * z + small.entries[k].get(idx).copied().unwrap_or(0.0);
                        }
                        (pj * pk.conj()).re * density
                    },
                    -b,
                    b,
                    1e-11,
                )
                .unwrap();
                let target = if j == k { 1.0 } else { 0.0 };
                assert!(
                    (re - target).abs() < 1e-7,
                    "gram({j},{k}) = {re}"
                );
            }
        }
    }
}
