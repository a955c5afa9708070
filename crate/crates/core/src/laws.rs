//! Mixing distributions: the one-dimensional laws whose Gaussian
//! convolutions we approximate. Each variant exposes moments,
//! trigonometric moments E[e^{ik delta X}], density and tail information,
//! conditioning, scaling, and deterministic sampling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::dd::{Dd, PrecisionMode, Real};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_complex};

/// A discrete law with finitely many support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicLaw {
    pub atoms: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AtomicLaw {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let law = AtomicLaw { atoms, weights };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() || self.atoms.len() != self.weights.len() {
            return Err(Error::Validation(
                "atomic law needs equal, nonzero numbers of atoms and weights".into(),
            ));
        }
        for pair in self.atoms.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Validation(
                    "atoms must be strictly increasing".into(),
                ));
            }
        }
        let mut sum = 0.0;
        for &w in &self.weights {
            if !(w >= 0.0) {
                return Err(Error::Validation("weights must be nonnegative".into()));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sum of w_i f(atom_i) in the requested precision.
    pub fn expect<R: Real>(&self, f: impl Fn(R) -> R) -> R {
        let mut acc = R::zero();
        for (&a, &w) in self.atoms.iter().zip(&self.weights) {
            acc = acc + R::from_f64(w) * f(R::from_f64(a));
        }
        acc
    }
}

/// The sub-Weibull normalizer C_alpha = alpha / (2 Gamma(1/alpha)), so that
/// (C_alpha / beta) exp(-|x/beta|^alpha) integrates to one.
pub fn sub_weibull_normalizer(alpha: f64) -> f64 {
    alpha / (2.0 * gamma(1.0 / alpha))
}

/// A mixing distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingLaw {
    Atomic(AtomicLaw),
    Uniform {
        halfwidth: f64,
    },
    Gaussian {
        stddev: f64,
    },
    Laplace {
        scale: f64,
    },
    SubWeibull {
        shape: f64,
        scale: f64,
    },
    /// Density a x^{-(alpha+1)} on [b, k b].
    TruncPareto {
        shape: f64,
        lower: f64,
        ratio: f64,
        normalizer: f64,
    },
    Conditioned {
        base: Box<MixingLaw>,
        lower: f64,
        upper: f64,
        /// Base-law probability of [lower, upper], cached at construction.
        mass: f64,
    },
    Scaled {
        base: Box<MixingLaw>,
        factor: f64,
    },
}

impl MixingLaw {
    pub fn atomic(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Ok(MixingLaw::Atomic(AtomicLaw::new(atoms, weights)?))
    }

    pub fn point_mass(at: f64) -> Self {
        MixingLaw::Atomic(AtomicLaw {
            atoms: vec![at],
            weights: vec![1.0],
        })
    }

    pub fn uniform(halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return Err(Error::Validation("uniform halfwidth must be > 0".into()));
        }
        Ok(MixingLaw::Uniform { halfwidth })
    }

    pub fn gaussian(stddev: f64) -> Result<Self> {
        if !(stddev > 0.0) {
            return Err(Error::Validation("gaussian stddev must be > 0".into()));
        }
        Ok(MixingLaw::Gaussian { stddev })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Validation("laplace scale must be > 0".into()));
        }
        Ok(MixingLaw::Laplace { scale })
    }

    pub fn sub_weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0) {
            return Err(Error::Validation(
                "sub-weibull shape and scale must be > 0".into(),
            ));
        }
        Ok(MixingLaw::SubWeibull { shape, scale })
    }

    /// Truncated Pareto on [b, k b] with density a x^{-(alpha+1)},
    /// parametrized directly.
    pub fn trunc_pareto(shape: f64, lower: f64, ratio: f64) -> Result<Self> {
        if !(shape > 0.0 && lower > 0.0 && ratio > 1.0) {
            return Err(Error::Validation(
                "trunc pareto needs shape > 0, lower > 0, ratio > 1".into(),
            ));
        }
        // Normalizer forcing unit mass: a = alpha b^alpha / (1 - k^{-alpha}).
        let a = shape * lower.powf(shape) / (1.0 - ratio.powf(-shape));
        Ok(MixingLaw::TruncPareto {
            shape,
            lower,
            ratio: ratio,
            normalizer: a,
        })
    }

    /// Truncated Pareto calibrated so that E|X|^alpha = beta^alpha:
    /// a = beta^alpha / log k, b = [a (1 - k^{-alpha}) / alpha]^{1/alpha}.
    pub fn trunc_pareto_moment_calibrated(alpha: f64, beta: f64, ratio: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && ratio > 1.0) {
            return Err(Error::Validation(
                "calibrated trunc pareto needs alpha > 0, beta > 0, ratio > 1".into(),
            ));
        }
        let a = beta.powf(alpha) / ratio.ln();
        let b = (a * (1.0 - ratio.powf(-alpha)) / alpha).powf(1.0 / alpha);
        Ok(MixingLaw::TruncPareto {
            shape: alpha,
            lower: b,
            ratio,
            normalizer: a,
        })
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        if factor == 0.0 || !factor.is_finite() {
            return Err(Error::Validation("scale factor must be finite, nonzero".into()));
        }
        // Families closed under scaling stay in closed form; only
        // conditioned laws (and negatively scaled Pareto) need a wrapper.
        match self {
            MixingLaw::Atomic(a) => {
                let mut pairs: Vec<(f64, f64)> = a
                    .atoms
                    .iter()
                    .zip(&a.weights)
                    .map(|(&x, &w)| (factor * x, w))
                    .collect();
                pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
                let (atoms, weights) = pairs.into_iter().unzip();
                MixingLaw::atomic(atoms, weights)
            }
            MixingLaw::Uniform { halfwidth } => MixingLaw::uniform(halfwidth * factor.abs()),
            MixingLaw::Gaussian { stddev } => MixingLaw::gaussian(stddev * factor.abs()),
            MixingLaw::Laplace { scale } => MixingLaw::laplace(scale * factor.abs()),
            MixingLaw::SubWeibull { shape, scale } => {
                MixingLaw::sub_weibull(*shape, scale * factor.abs())
            }
            MixingLaw::TruncPareto {
                shape,
                lower,
                ratio,
                normalizer,
            } if factor > 0.0 => Ok(MixingLaw::TruncPareto {
                shape: *shape,
                lower: lower * factor,
                ratio: *ratio,
                normalizer: normalizer * factor.powf(*shape),
            }),
            _ => Ok(MixingLaw::Scaled {
                base: Box::new(self.clone()),
                factor,
            }),
        }
    }

    pub fn as_atomic(&self) -> Option<&AtomicLaw> {
        match self {
            MixingLaw::Atomic(a) => Some(a),
            _ => None,
        }
    }

    /// Interval outside which the law carries mass below ~1e-17.
    pub fn support(&self) -> (f64, f64) {
        match self {
            MixingLaw::Atomic(a) => (a.atoms[0], *a.atoms.last().unwrap()),
            MixingLaw::Uniform { halfwidth } => (-halfwidth, *halfwidth),
            MixingLaw::Gaussian { stddev } => (-9.0 * stddev, 9.0 * stddev),
            MixingLaw::Laplace { scale } => (-40.0 * scale, 40.0 * scale),
            MixingLaw::SubWeibull { shape, scale } => {
                let t = scale * 40.0f64.powf(1.0 / shape);
                (-t, t)
            }
            MixingLaw::TruncPareto { lower, ratio, .. } => (*lower, lower * ratio),
            MixingLaw::Conditioned { base, lower, upper, .. } => {
                let (a, b) = base.support();
                (a.max(*lower), b.min(*upper))
            }
            MixingLaw::Scaled { base, factor } => {
                let (a, b) = base.support();
                let (x, y) = (factor * a, factor * b);
                (x.min(y), x.max(y))
            }
        }
    }

    /// Density at x, for variants that have one.
    pub fn density(&self, x: f64) -> Result<f64> {
        match self {
            MixingLaw::Atomic(_) => Err(Error::Unsupported(
                "atomic law has no Lebesgue density".into(),
            )),
            MixingLaw::Uniform { halfwidth } => {
                Ok(if x.abs() <= *halfwidth {
                    0.5 / halfwidth
                } else {
                    0.0
                })
            }
            MixingLaw::Gaussian { stddev } => {
                let z = x / stddev;
                Ok((-0.5 * z * z).exp() / (stddev * (2.0 * std::f64::consts::PI).sqrt()))
            }
            MixingLaw::Laplace { scale } => Ok((-x.abs() / scale).exp() / (2.0 * scale)),
            MixingLaw::SubWeibull { shape, scale } => {
                let c = sub_weibull_normalizer(*shape);
                Ok((c / scale) * (-(x.abs() / scale).powf(*shape)).exp())
            }
            MixingLaw::TruncPareto {
                shape,
                lower,
                ratio,
                normalizer,
            } => {
                Ok(if x >= *lower && x <= lower * ratio {
                    normalizer * x.powf(-(shape + 1.0))
                } else {
                    0.0
                })
            }
            MixingLaw::Conditioned {
                base,
                lower,
                upper,
                mass,
            } => {
                if x < *lower || x > *upper {
                    Ok(0.0)
                } else {
                    Ok(base.density(x)? / mass)
                }
            }
            MixingLaw::Scaled { base, factor } => {
                Ok(base.density(x / factor)? / factor.abs())
            }
        }
    }

    /// Probability of [l, u].
    pub fn mass(&self, l: f64, u: f64) -> Result<f64> {
        if l > u {
            return Ok(0.0);
        }
        match self {
            MixingLaw::Atomic(a) => Ok(a
                .atoms
                .iter()
                .zip(&a.weights)
                .filter(|(&x, _)| x >= l && x <= u)
                .map(|(_, &w)| w)
                .sum()),
            MixingLaw::Uniform { halfwidth } => {
                let lo = l.max(-halfwidth);
                let hi = u.min(*halfwidth);
                Ok(((hi - lo) / (2.0 * halfwidth)).max(0.0))
            }
            MixingLaw::Gaussian { stddev } => Ok(std_normal_cdf(u / stddev) - std_normal_cdf(l / stddev)),
            MixingLaw::Laplace { scale } => Ok(laplace_cdf(u / scale) - laplace_cdf(l / scale)),
            MixingLaw::TruncPareto {
                shape,
                lower,
                ratio,
                normalizer,
            } => {
                let lo = l.max(*lower);
                let hi = u.min(lower * ratio);
                if lo >= hi {
                    return Ok(0.0);
                }
                Ok(normalizer / shape * (lo.powf(-shape) - hi.powf(-shape)))
            }
            MixingLaw::Conditioned {
                base,
                lower,
                upper,
                mass,
            } => Ok(base.mass(l.max(*lower), u.min(*upper))? / mass),
            MixingLaw::Scaled { base, factor } => {
                let (a, b) = (l / factor, u / factor);
                base.mass(a.min(b), a.max(b))
            }
            MixingLaw::SubWeibull { .. } => {
                let (a, b) = self.support();
                let lo = l.max(a);
                let hi = u.min(b);
                if lo >= hi {
                    return Ok(0.0);
                }
                let (v, _) = integrate(|x| self.density(x).unwrap_or(0.0), lo, hi, 1e-13)?;
                Ok(v.clamp(0.0, 1.0))
            }
        }
    }

    /// k-th raw moment.
    pub fn moment(&self, k: u32, precision: PrecisionMode) -> Result<f64> {
        match precision {
            PrecisionMode::Extended => match self.moment_dd(k) {
                Ok(v) => Ok(v.to_f64()),
                Err(Error::Unsupported(_)) => self.moment_f64(k),
                Err(e) => Err(e),
            },
            PrecisionMode::Double => self.moment_f64(k),
        }
    }

    fn moment_f64(&self, k: u32) -> Result<f64> {
        let v = match self {
            MixingLaw::Atomic(a) => a.expect(|x: f64| x.powi(k as i32)),
            MixingLaw::Uniform { halfwidth } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    let p = halfwidth.powi(k as i32);
                    if !p.is_finite() {
                        return Err(Error::Range(format!(
                            "uniform moment of order {k} overflows"
                        )));
                    }
                    p / (k as f64 + 1.0)
                }
            }
            MixingLaw::Gaussian { stddev } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    let mut v = stddev.powi(k as i32);
                    let mut j = k as i64 - 1;
                    while j > 1 {
                        v *= j as f64;
                        j -= 2;
                    }
                    if !v.is_finite() {
                        return Err(Error::Range(format!(
                            "gaussian moment of order {k} overflows"
                        )));
                    }
                    v
                }
            }
            MixingLaw::Laplace { scale } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    let mut v = scale.powi(k as i32);
                    for j in 2..=k as i64 {
                        v *= j as f64;
                    }
                    if !v.is_finite() {
                        return Err(Error::Range(format!(
                            "laplace moment of order {k} overflows"
                        )));
                    }
                    v
                }
            }
            MixingLaw::TruncPareto {
                shape,
                lower,
                ratio,
                normalizer,
            } => {
                // a int_b^{kb} x^{k - alpha - 1} dx.
                let p = k as f64 - shape;
                let hi = lower * ratio;
                if p.abs() < 1e-12 {
                    normalizer * ratio.ln()
                } else {
                    normalizer * (hi.powf(p) - lower.powf(p)) / p
                }
            }
            MixingLaw::SubWeibull { shape, scale } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    // E X^k = scale^k Gamma((k+1)/alpha) / Gamma(1/alpha).
                    let lg = ln_gamma((k as f64 + 1.0) / shape) - ln_gamma(1.0 / shape);
                    let v = scale.powi(k as i32) * lg.exp();
                    if !v.is_finite() {
                        return Err(Error::Range(format!(
                            "sub-Weibull moment of order {k} overflows"
                        )));
                    }
                    v
                }
            }
            MixingLaw::Conditioned { .. } => {
                let (a, b) = self.support();
                let (v, _) = integrate(
                    |x| x.powi(k as i32) * self.density(x).unwrap_or(0.0),
                    a,
                    b,
                    1e-14,
                )?;
                v
            }
            MixingLaw::Scaled { base, factor } => factor.powi(k as i32) * base.moment_f64(k)?,
        };
        Ok(v)
    }

    /// k-th raw moment in double-double precision; only the closed-form
    /// variants support this path.
    pub fn moment_dd(&self, k: u32) -> Result<Dd> {
        let v = match self {
            MixingLaw::Atomic(a) => a.expect(|x: Dd| x.powi(k as i32)),
            MixingLaw::Uniform { halfwidth } => {
                if k % 2 == 1 {
                    Dd::ZERO
                } else {
                    Dd::from_f64(*halfwidth).powi(k as i32) / Dd::from_f64(k as f64 + 1.0)
                }
            }
            MixingLaw::Gaussian { stddev } => {
                if k % 2 == 1 {
                    Dd::ZERO
                } else {
                    let mut v = Dd::from_f64(*stddev).powi(k as i32);
                    let mut j = k as i64 - 1;
                    while j > 1 {
                        v = v * Dd::from_f64(j as f64);
                        j -= 2;
                    }
                    v
                }
            }
            MixingLaw::Laplace { scale } => {
                if k % 2 == 1 {
                    Dd::ZERO
                } else {
                    let mut v = Dd::from_f64(*scale).powi(k as i32);
                    for j in 2..=k as i64 {
                        v = v * Dd::from_f64(j as f64);
                    }
                    v
                }
            }
            MixingLaw::Scaled { base, factor } => {
                Dd::from_f64(*factor).powi(k as i32) * base.moment_dd(k)?
            }
            _ => {
                return Err(Error::Unsupported(
                    "extended-precision moments need a closed form".into(),
                ))
            }
        };
        if !v.to_f64().is_finite() {
            return Err(Error::Range(format!("moment of order {k} overflows")));
        }
        Ok(v)
    }

    /// Trigonometric moment t_k(delta X) = E[e^{i k delta X}].
    pub fn trig_moment(&self, k: i64, delta: f64) -> Result<Complex64> {
        if !(delta > 0.0) {
            return Err(Error::Validation("delta must be > 0".into()));
        }
        if k == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if k < 0 {
            return Ok(self.trig_moment(-k, delta)?.conj());
        }
        let omega = k as f64 * delta;
        let v = match self {
            MixingLaw::Atomic(a) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (&x, &w) in a.atoms.iter().zip(&a.weights) {
                    acc += w * Complex64::new(0.0, omega * x).exp();
                }
                acc
            }
            MixingLaw::Uniform { halfwidth } => {
                let t = omega * halfwidth;
                Complex64::new((t.sin() / t).min(1.0), 0.0)
            }
            MixingLaw::Gaussian { stddev } => {
                Complex64::new((-0.5 * (omega * stddev).powi(2)).exp(), 0.0)
            }
            MixingLaw::Laplace { scale } => {
                Complex64::new(1.0 / (1.0 + (omega * scale).powi(2)), 0.0)
            }
            MixingLaw::SubWeibull { .. } => {
                // Symmetric density: the characteristic function is real.
                let (_, b) = self.support();
                let (v, _) = integrate(
                    |x| (omega * x).cos() * self.density(x).unwrap_or(0.0),
                    0.0,
                    b,
                    5e-14,
                )?;
                Complex64::new((2.0 * v).clamp(-1.0, 1.0), 0.0)
            }
            MixingLaw::Scaled { base, factor } => {
                let inner = base.trig_moment(k, delta * factor.abs())?;
                if *factor < 0.0 {
                    inner.conj()
                } else {
                    inner
                }
            }
            _ => {
                let (a, b) = self.support();
                let (v, _) = integrate_complex(
                    |x| {
                        Complex64::new(0.0, omega * x).exp() * self.density(x).unwrap_or(0.0)
                    },
                    a,
                    b,
                    5e-14,
                )?;
                v
            }
        };
        Ok(v)
    }

    /// Printed upper bound on P[|X| >= t], clamped to [0, 1]:
    /// sub-Weibull families get 2 exp(-(t/beta)^alpha), the
    /// moment-constrained truncated Pareto gets 2 (beta/t)^alpha.
    pub fn tail_probability_bound(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Ok(1.0);
        }
        let raw = match self {
            MixingLaw::SubWeibull { shape, scale } => 2.0 * (-(t / scale).powf(*shape)).exp(),
            // Gaussian(sigma) is sub-Weibull with alpha = 2, beta = sigma sqrt(2).
            MixingLaw::Gaussian { stddev } => 2.0 * (-0.5 * (t / stddev).powi(2)).exp(),
            // Laplace(lambda) is sub-Weibull with alpha = 1, beta = lambda.
            MixingLaw::Laplace { scale } => 2.0 * (-t / scale).exp(),
            MixingLaw::TruncPareto {
                shape, normalizer, ratio, ..
            } => {
                // E|X|^alpha = a log k; Markov gives (beta/t)^alpha.
                let beta_alpha = normalizer * ratio.ln();
                2.0 * beta_alpha / t.powf(*shape)
            }
            MixingLaw::Scaled { base, factor } => {
                return base.tail_probability_bound(t / factor.abs());
            }
            _ => {
                return Err(Error::Unsupported(
                    "no printed tail bound for this variant".into(),
                ))
            }
        };
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Condition the law on [l, u], renormalizing. Atomic laws condition
    /// in closed form; a base with all atoms inside comes back unchanged.
    pub fn condition(&self, l: f64, u: f64) -> Result<MixingLaw> {
        if !(l < u) {
            return Err(Error::Validation("conditioning needs l < u".into()));
        }
        if let MixingLaw::Atomic(a) = self {
            let kept: Vec<(f64, f64)> = a
                .atoms
                .iter()
                .zip(&a.weights)
                .filter(|(&x, _)| x >= l && x <= u)
                .map(|(&x, &w)| (x, w))
                .collect();
            let total: f64 = kept.iter().map(|p| p.1).sum();
            if total <= 1e-300 {
                return Err(Error::Degenerate(format!(
                    "no atomic mass in [{l}, {u}]"
                )));
            }
            let (atoms, weights) = kept
                .into_iter()
                .map(|(x, w)| (x, w / total))
                .unzip();
            return MixingLaw::atomic(atoms, weights);
        }
        let mass = self.mass(l, u)?;
        if mass <= 1e-300 {
            return Err(Error::Degenerate(format!(
                "conditioning interval [{l}, {u}] has zero mass"
            )));
        }
        Ok(MixingLaw::Conditioned {
            base: Box::new(self.clone()),
            lower: l,
            upper: u,
            mass,
        })
    }

    /// Mass of the interval a Conditioned wrapper was built on, or 1.
    pub fn conditioning_mass(&self) -> f64 {
        match self {
            MixingLaw::Conditioned { mass, .. } => *mass,
            _ => 1.0,
        }
    }

    /// n i.i.d. draws, deterministic in the seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Validation("sample count must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    fn sample_with(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        match self {
            MixingLaw::Atomic(a) => {
                for _ in 0..n {
                    let u: f64 = rng.gen();
                    let mut acc = 0.0;
                    let mut chosen = *a.atoms.last().unwrap();
                    for (&x, &w) in a.atoms.iter().zip(&a.weights) {
                        acc += w;
                        if u <= acc {
                            chosen = x;
                            break;
                        }
                    }
                    out.push(chosen);
                }
            }
            MixingLaw::Uniform { halfwidth } => {
                for _ in 0..n {
                    out.push(rng.gen_range(-halfwidth..*halfwidth));
                }
            }
            MixingLaw::Gaussian { stddev } => {
                for _ in 0..n {
                    let u: f64 = rng.gen_range(1e-17..1.0 - 1e-17);
                    out.push(stddev * std::f64::consts::SQRT_2 * erf::erf_inv(2.0 * u - 1.0));
                }
            }
            MixingLaw::Laplace { scale } => {
                for _ in 0..n {
                    let u: f64 = rng.gen_range(1e-17..1.0 - 1e-17);
                    let x = if u < 0.5 {
                        scale * (2.0 * u).ln()
                    } else {
                        -scale * (2.0 * (1.0 - u)).ln()
                    };
                    out.push(x);
                }
            }
            MixingLaw::TruncPareto {
                shape,
                lower,
                normalizer,
                ..
            } => {
                // Closed-form inverse CDF: F(x) = (a/alpha)(b^-a - x^-a).
                for _ in 0..n {
                    let u: f64 = rng.gen();
                    let inner = lower.powf(-shape) - shape * u / normalizer;
                    out.push(inner.powf(-1.0 / shape));
                }
            }
            MixingLaw::SubWeibull { .. } => {
                // Inverse CDF by bisection on a tabulated CDF, as no closed
                // inverse exists for general shape.
                let (a, b) = self.support();
                let steps = 10_000usize;
                let h = (b - a) / steps as f64;
                let mut cdf = Vec::with_capacity(steps + 1);
                let mut acc = 0.0;
                cdf.push(0.0);
                let mut prev = self.density(a)?;
                for i in 1..=steps {
                    let x = a + i as f64 * h;
                    let d = self.density(x)?;
                    acc += 0.5 * (prev + d) * h;
                    prev = d;
                    cdf.push(acc);
                }
                let total = *cdf.last().unwrap();
                for _ in 0..n {
                    let u: f64 = rng.gen::<f64>() * total;
                    let idx = cdf.partition_point(|&c| c < u).max(1);
                    let (c0, c1) = (cdf[idx - 1], cdf[idx]);
                    let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
                    out.push(a + (idx as f64 - 1.0 + frac) * h);
                }
            }
            MixingLaw::Conditioned {
                base,
                lower,
                upper,
                mass,
            } => {
                // Rejection from the base; expected tries per draw is 1/mass.
                let cap = ((200.0 / mass).ceil() as usize).max(1000);
                for _ in 0..n {
                    let mut accepted = None;
                    for _ in 0..cap {
                        let x = base.sample_with(rng, 1)?[0];
                        if x >= *lower && x <= *upper {
                            accepted = Some(x);
                            break;
                        }
                    }
                    match accepted {
                        Some(x) => out.push(x),
                        None => {
                            return Err(Error::Numerical(
                                "rejection sampling exhausted its try budget".into(),
                            ))
                        }
                    }
                }
            }
            MixingLaw::Scaled { base, factor } => {
                out = base.sample_with(rng, n)?;
                for x in &mut out {
                    *x *= factor;
                }
            }
        }
        Ok(out)
    }

    /// Numeric normalization check for density variants; atomic laws
    /// re-validate their weights instead.
    pub fn validate(&self) -> Result<()> {
        match self {
            MixingLaw::Atomic(a) => a.validate(),
            _ => {
                let (a, b) = self.support();
                let (total, _) = integrate(|x| self.density(x).unwrap_or(0.0), a, b, 1e-12)?;
                if (total - 1.0).abs() > 1e-10 {
                    return Err(Error::Validation(format!(
                        "density integrates to {total}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// P(a < Z < b) for a standard normal Z, computed from the tail with the
/// smaller mass so the result stays accurate far out (the naive CDF
/// difference cancels to 0 beyond |z| ~ 8).
pub(crate) fn std_normal_interval(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let mass = if a + b > 0.0 {
        0.5 * (libm::erfc(a / std::f64::consts::SQRT_2)
            - libm::erfc(b / std::f64::consts::SQRT_2))
    } else {
        0.5 * (libm::erfc(-b / std::f64::consts::SQRT_2)
            - libm::erfc(-a / std::f64::consts::SQRT_2))
    };
    mass.max(0.0)
}

fn laplace_cdf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 * z.exp()
    } else {
        1.0 - 0.5 * (-z).exp()
    }
}
