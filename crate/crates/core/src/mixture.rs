//! Gaussian convolution densities f_P = P * phi and f-divergences
//! between two such mixtures, evaluated by adaptive quadrature with
//! closed forms where the mixing law admits them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laws::{std_normal_interval, MixingLaw};
use crate::quad::integrate;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Padding around the mixing supports; Gaussian tails beyond it
/// contribute less than 1e-30 to every divergence integrand.
const WINDOW_PAD: f64 = 12.0;

/// Half-width of the kernel window used when the density must be
/// integrated numerically. It must exceed WINDOW_PAD so the evaluator
/// stays strictly positive on the whole integration window; a hard zero
/// inside the window wrecks ratio integrands such as the chi-square one.
const KERNEL_REACH: f64 = 13.0;

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Evaluator for the mixture density f_P(x) = int phi(x - theta) dP(theta).
#[derive(Debug, Clone)]
pub struct MixtureDensity {
    pub mixing: MixingLaw,
    support: (f64, f64),
}

impl MixtureDensity {
    pub fn new(mixing: MixingLaw) -> Self {
        let support = mixing.support();
        MixtureDensity { mixing, support }
    }

    /// Window outside which the mixture carries mass below ~1e-16.
    pub fn window(&self) -> (f64, f64) {
        (self.support.0 - WINDOW_PAD, self.support.1 + WINDOW_PAD)
    }

    /// Density at x. A quadrature failure surfaces as NaN so that an
    /// enclosing integrator reports the location.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.mixing {
            MixingLaw::Atomic(a) => a
                .atoms
                .iter()
                .zip(&a.weights)
                .map(|(&t, &w)| w * phi(x - t))
                .sum(),
            MixingLaw::Gaussian { stddev } => {
                let v = 1.0 + stddev * stddev;
                (-0.5 * x * x / v).exp() / (SQRT_2PI * v.sqrt())
            }
            MixingLaw::Uniform { halfwidth } => {
                std_normal_interval(x - halfwidth, x + halfwidth) / (2.0 * halfwidth)
            }
            MixingLaw::Conditioned { base, lower, upper, .. }
                if matches!(**base, MixingLaw::Uniform { .. }) =>
            {
                // Conditioned uniform is uniform on the clipped interval.
                let m = match **base {
                    MixingLaw::Uniform { halfwidth } => halfwidth,
                    _ => unreachable!(),
                };
                let lo = lower.max(-m);
                let hi = upper.min(m);
                std_normal_interval(x - hi, x - lo) / (hi - lo)
            }
            law => {
                let lo = self.support.0.max(x - KERNEL_REACH);
                let hi = self.support.1.min(x + KERNEL_REACH);
                if lo >= hi {
                    return 0.0;
                }
                match integrate(
                    |t| phi(x - t) * law.density(t).unwrap_or(f64::NAN),
                    lo,
                    hi,
                    1e-14,
                ) {
                    Ok((v, _)) => v.max(0.0),
                    Err(_) => f64::NAN,
                }
            }
        }
    }
}

/// Convenience wrapper for one-off evaluations.
pub fn mixture_density(mixing: &MixingLaw, x: f64) -> f64 {
    MixtureDensity::new(mixing.clone()).eval(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DivergenceKind {
    Tv,
    H2,
    Kl,
    Chi2,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 4] = [
        DivergenceKind::Tv,
        DivergenceKind::H2,
        DivergenceKind::Kl,
        DivergenceKind::Chi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::Tv => "tv",
            DivergenceKind::H2 => "h2",
            DivergenceKind::Kl => "kl",
            DivergenceKind::Chi2 => "chi2",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub kind: DivergenceKind,
    pub value: f64,
    pub abs_err: f64,
}

/// Divergence d(f_P, f_Q) between the Gaussian mixtures of two mixing
/// laws. For KL and chi-square the second argument is the denominator
/// (reference) mixture.
pub fn divergence(kind: DivergenceKind, p: &MixingLaw, q: &MixingLaw) -> Result<DivergenceValue> {
    if p == q {
        return Ok(DivergenceValue {
            kind,
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let fp = MixtureDensity::new(p.clone());
    let fq = MixtureDensity::new(q.clone());
    let (a1, b1) = fp.window();
    let (a2, b2) = fq.window();
    let (a, b) = (a1.min(a2), b1.max(b2));

    let tol = match kind {
        DivergenceKind::Tv | DivergenceKind::H2 => 2e-12,
        DivergenceKind::Kl | DivergenceKind::Chi2 => 1e-13,
    };
    let (raw, err) = match kind {
        DivergenceKind::Tv => integrate(|x| 0.5 * (fp.eval(x) - fq.eval(x)).abs(), a, b, tol)?,
        DivergenceKind::H2 => integrate(
            |x| {
                let d = fp.eval(x).max(0.0).sqrt() - fq.eval(x).max(0.0).sqrt();
                d * d
            },
            a,
            b,
            tol,
        )?,
        DivergenceKind::Kl => integrate(
            |x| {
                let f = fp.eval(x);
                if f <= 0.0 {
                    0.0
                } else {
                    f * (f / fq.eval(x).max(1e-300)).ln()
                }
            },
            a,
            b,
            tol,
        )?,
        DivergenceKind::Chi2 => integrate(
            |x| {
                let d = fp.eval(x) - fq.eval(x);
                d * d / fq.eval(x).max(1e-300)
            },
            a,
            b,
            tol,
        )?,
    };
    let mut value = raw.max(0.0);
    if kind == DivergenceKind::Tv {
        value = value.min(1.0);
    }
    Ok(DivergenceValue {
        kind,
        value,
        abs_err: err,
    })
}

/// Certified chi-square bound when the first J-1 moments of two laws on
/// [-M, M] agree: 4 exp(M^2/2) (4 e M^2 / J)^J, valid for J > 4 M^2.
pub fn chi2_moment_bound(m_halfwidth: f64, j: u32) -> Result<f64> {
    if !(m_halfwidth > 0.0) {
        return Err(Error::Validation("halfwidth must be > 0".into()));
    }
    let m2 = m_halfwidth * m_halfwidth;
    if (j as f64) <= 4.0 * m2 {
        return Err(Error::Validation(format!(
            "bound needs J > 4M^2 (J = {j}, 4M^2 = {})",
            4.0 * m2
        )));
    }
    let log_v =
        4.0f64.ln() + 0.5 * m2 + j as f64 * ((4.0 * std::f64::consts::E * m2 / j as f64).ln());
    Ok(log_v.exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub links: Vec<ChainLink>,
}

impl ChainReport {
    pub fn all_pass(&self) -> bool {
        self.links.iter().all(|l| l.pass)
    }
}

/// Verify the two standard f-divergence inequality chains
/// H^2/2 <= TV <= sqrt(KL/2) <= sqrt(chi^2/2) and TV <= H <= sqrt(KL)
/// on computed values, with slack ten times the quadrature estimates.
pub fn fdiv_chain_check(p: &MixingLaw, q: &MixingLaw) -> Result<ChainReport> {
    let tv = divergence(DivergenceKind::Tv, p, q)?;
    let h2 = divergence(DivergenceKind::H2, p, q)?;
    let kl = divergence(DivergenceKind::Kl, p, q)?;
    let chi2 = divergence(DivergenceKind::Chi2, p, q)?;
    let slack = 10.0 * (tv.abs_err + h2.abs_err + kl.abs_err + chi2.abs_err) + 1e-12;

    let mut links = Vec::new();
    let mut push = |name, lhs: f64, rhs: f64| {
        links.push(ChainLink {
            name,
            lhs,
            rhs,
            pass: lhs <= rhs + slack,
        });
    };
    let h = h2.value.max(0.0).sqrt();
    push("h2_half_le_tv", 0.5 * h2.value, tv.value);
    push("tv_le_sqrt_half_kl", tv.value, (0.5 * kl.value.max(0.0)).sqrt());
    push(
        "sqrt_half_kl_le_sqrt_half_chi2",
        (0.5 * kl.value.max(0.0)).sqrt(),
        (0.5 * chi2.value.max(0.0)).sqrt(),
    );
    push("tv_le_h", tv.value, h);
    push("h_le_sqrt_kl", h, kl.value.max(0.0).sqrt());
    Ok(ChainReport { links })
}

/// Certified TV lower bound from characteristic functions: the test
/// function g(x) = e^{i omega x - omega^2 / 2} has sup-norm <= 1 after
/// convolution with phi, giving
/// TV >= max_omega e^{-omega^2/2} |E_P e^{i omega X} - E_Q e^{i omega X}| / 2.
pub fn tv_char_fn_lower(p: &MixingLaw, q: &MixingLaw, omegas: &[f64]) -> Result<f64> {
    if omegas.is_empty() {
        return Err(Error::Validation("need at least one frequency".into()));
    }
    let mut best = 0.0f64;
    for &omega in omegas {
        let w = omega.abs();
        if w == 0.0 {
            continue;
        }
        let tp = p.trig_moment(1, w)?;
        let tq = q.trig_moment(1, w)?;
        let v = 0.5 * (-0.5 * w * w).exp() * (tp - tq).norm();
        best = best.max(v);
    }
    Ok(best)
}
