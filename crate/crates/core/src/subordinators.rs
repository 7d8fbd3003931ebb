//! Catalog of Lévy subordinators: closed-form Laplace exponents and exact
//! increment sampling.
//!
//! Every family satisfies `E[exp(-x Λ_t)] = exp(-t Ψ(x))` with `Ψ(0) = 0` and
//! `Ψ` nondecreasing and concave on `(0, ∞)`. Killed drift may return `+∞`
//! increments (a jump that wipes out every surviving component at once);
//! consumers must treat `exp(-∞)` as 0.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma as GammaDist, InverseGaussian, Poisson};

use crate::{Error, Result};

/// Jump-size law of the compound-Poisson family.
///
/// Kept to laws with a closed-form `E[1 - exp(-x J)]` so the Laplace exponent
/// stays exact: `x/(x+ρ)` for `Exponential(ρ)` jumps and `1 - exp(-x c)` for
/// constant jumps of size `c`.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpFamily {
    Exponential { rate: f64 },
    Constant { size: f64 },
}

impl JumpFamily {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            JumpFamily::Exponential { rate } => rate.is_finite() && *rate > 0.0,
            JumpFamily::Constant { size } => size.is_finite() && *size > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("jump family parameters must be positive: {self:?}")))
        }
    }

    /// `E[1 - exp(-x J)]`.
    fn one_minus_laplace(&self, x: f64) -> f64 {
        match self {
            JumpFamily::Exponential { rate } => x / (x + rate),
            JumpFamily::Constant { size } => -(-x * size).exp_m1(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpFamily::Exponential { rate } => Exp::new(*rate).unwrap().sample(rng),
            JumpFamily::Constant { size } => *size,
        }
    }
}

/// A Lévy subordinator, specified by family and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SubordinatorSpec {
    /// `Λ_t = μ t`, `μ > 0`.
    Drift { mu: f64 },
    /// `Λ_t = μ t + ∞·1{t > E}` with `E ~ Exp(λ)`: drift plus a single
    /// killing jump to infinity. `Ψ(x) = μ x + λ 1{x > 0}`.
    KilledDrift { mu: f64, lambda: f64 },
    /// Compound Poisson with drift: `Ψ(x) = μ x + λ E[1 - exp(-x J)]`.
    CompoundPoissonDrift { mu: f64, lambda: f64, jumps: JumpFamily },
    /// Gamma subordinator: `Ψ(x) = β log(1 + x/η)`; `Λ_t ~ Gamma(β t, η)`.
    Gamma { beta: f64, eta: f64 },
    /// Inverse Gaussian subordinator: `Ψ(x) = β (√(2x + η²) - η)`.
    InverseGaussian { beta: f64, eta: f64 },
    /// Stable subordinator, `α ∈ (0, 1]`: `Ψ(x) = x^α`; `α = 1` degenerates
    /// to unit drift.
    Stable { alpha: f64 },
    /// Weighted sum of independent subordinators: the Laplace exponents form
    /// a cone, `Ψ(x) = Σ_i Ψ_i(c_i x)`.
    Sum(Vec<(f64, SubordinatorSpec)>),
}

impl SubordinatorSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            SubordinatorSpec::Drift { mu } => {
                if !(mu.is_finite() && *mu > 0.0) {
                    return fail(format!("drift needs mu > 0, got {mu}"));
                }
            }
            SubordinatorSpec::KilledDrift { mu, lambda } => {
                if !(mu.is_finite() && *mu >= 0.0) || !(lambda.is_finite() && *lambda > 0.0) {
                    return fail(format!("killed drift needs mu >= 0, lambda > 0, got mu={mu}, lambda={lambda}"));
                }
            }
            SubordinatorSpec::CompoundPoissonDrift { mu, lambda, jumps } => {
                if !(mu.is_finite() && *mu >= 0.0) || !(lambda.is_finite() && *lambda > 0.0) {
                    return fail(format!("compound Poisson needs mu >= 0, lambda > 0, got mu={mu}, lambda={lambda}"));
                }
                jumps.validate()?;
            }
            SubordinatorSpec::Gamma { beta, eta } | SubordinatorSpec::InverseGaussian { beta, eta } => {
                if !(beta.is_finite() && *beta > 0.0) || !(eta.is_finite() && *eta > 0.0) {
                    return fail(format!("needs beta > 0, eta > 0, got beta={beta}, eta={eta}"));
                }
            }
            SubordinatorSpec::Stable { alpha } => {
                if !(alpha.is_finite() && *alpha > 0.0 && *alpha <= 1.0) {
                    return fail(format!("stable needs alpha in (0,1], got {alpha}"));
                }
            }
            SubordinatorSpec::Sum(terms) => {
                if terms.is_empty() {
                    return fail("sum needs at least one term".into());
                }
                for (weight, spec) in terms {
                    if !(weight.is_finite() && *weight > 0.0) {
                        return fail(format!("sum weights must be positive, got {weight}"));
                    }
                    spec.validate()?;
                }
            }
        }
        Ok(())
    }

    /// The Laplace exponent `Ψ(x)`, exact closed form.
    pub fn laplace_exponent(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0);
        match self {
            SubordinatorSpec::Drift { mu } => mu * x,
            SubordinatorSpec::KilledDrift { mu, lambda } => {
                mu * x + if x > 0.0 { *lambda } else { 0.0 }
            }
            SubordinatorSpec::CompoundPoissonDrift { mu, lambda, jumps } => {
                mu * x + lambda * jumps.one_minus_laplace(x)
            }
            SubordinatorSpec::Gamma { beta, eta } => beta * (x / eta).ln_1p(),
            SubordinatorSpec::InverseGaussian { beta, eta } => {
                beta * ((2.0 * x + eta * eta).sqrt() - eta)
            }
            SubordinatorSpec::Stable { alpha } => x.powf(*alpha),
            SubordinatorSpec::Sum(terms) => terms
                .iter()
                .map(|(c, spec)| spec.laplace_exponent(c * x))
                .sum(),
        }
    }

    /// Draws `Λ_dt` exactly from the increment law; may be `+∞` (killed drift).
    pub fn sample_increment<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> f64 {
        debug_assert!(dt > 0.0);
        match self {
            SubordinatorSpec::Drift { mu } => mu * dt,
            SubordinatorSpec::KilledDrift { mu, lambda } => {
                let survive: f64 = rng.random();
                if survive < (-lambda * dt).exp() {
                    mu * dt
                } else {
                    f64::INFINITY
                }
            }
            SubordinatorSpec::CompoundPoissonDrift { mu, lambda, jumps } => {
                let n = Poisson::new(lambda * dt).unwrap().sample(rng) as u64;
                let mut total = mu * dt;
                for _ in 0..n {
                    total += jumps.sample(rng);
                }
                total
            }
            SubordinatorSpec::Gamma { beta, eta } => {
                GammaDist::new(beta * dt, 1.0 / eta).unwrap().sample(rng)
            }
            SubordinatorSpec::InverseGaussian { beta, eta } => {
                let bt = beta * dt;
                InverseGaussian::new(bt / eta, bt * bt).unwrap().sample(rng)
            }
            SubordinatorSpec::Stable { alpha } => {
                if *alpha == 1.0 {
                    dt
                } else {
                    dt.powf(1.0 / alpha) * sample_positive_stable(*alpha, rng)
                }
            }
            SubordinatorSpec::Sum(terms) => terms
                .iter()
                .map(|(c, spec)| c * spec.sample_increment(dt, rng))
                .sum(),
        }
    }
}

/// Positive stable variate with `E[exp(-x S)] = exp(-x^α)`, `α ∈ (0, 1)`,
/// by the Kanter / Chambers–Mallows–Stuck representation.
pub fn sample_positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let u = std::f64::consts::PI * rng.random::<f64>().clamp(1e-300, 1.0 - 1e-16);
    let w = -rng.random::<f64>().clamp(1e-300, 1.0).ln();
    let s1 = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let s2 = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    s1 * s2
}

/// Outcome of an empirical Laplace-transform check.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceCheck {
    /// Empirical mean of `exp(-x Λ_t)` over `n` draws.
    pub empirical: f64,
    /// Closed-form target `exp(-t Ψ(x))`.
    pub target: f64,
    /// Standardized deviation `(empirical - target) / se(empirical)`.
    pub z_score: f64,
}

/// Compares the sampled increment law against `E[exp(-x Λ_t)] = exp(-t Ψ(x))`.
pub fn empirical_laplace_check<R: Rng + ?Sized>(
    spec: &SubordinatorSpec,
    x: f64,
    t: f64,
    n: usize,
    rng: &mut R,
) -> LaplaceCheck {
    assert!(n >= 10_000, "need n >= 10^4 for a meaningful check");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let inc = spec.sample_increment(t, rng);
        let v = neg_exp(x, inc);
        sum += v;
        sum_sq += v * v;
    }
    let nf = n as f64;
    let empirical = sum / nf;
    let var = (sum_sq / nf - empirical * empirical).max(0.0);
    let se = (var / nf).sqrt();
    let target = (-t * spec.laplace_exponent(x)).exp();
    let z_score = if se > 0.0 { (empirical - target) / se } else { 0.0 };
    LaplaceCheck { empirical, target, z_score }
}

/// `exp(-x·v)` with the extended-real convention `exp(-∞) = 0` (also for x=0
/// paired with a finite increment, where it is just `exp(0)`).
pub(crate) fn neg_exp(x: f64, v: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if v.is_infinite() {
        0.0
    } else {
        (-x * v).exp()
    }
}
