//! Exact Marshall–Olkin machinery: the subset-rate parameterization, the
//! joint survival function, the exponential shock-model sampler, the
//! compound-Poisson (Arnold) sampler, and the bivariate MO copula.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Exp};

use crate::types::{DefaultTimeVector, SubsetLabel, BEYOND_HORIZON};
use crate::{Error, Result};

/// Dimension guard for the shock sampler (one exponential per positive-rate
/// subset, up to `2^d - 1` of them).
pub const MAX_SHOCK_DIMENSION: usize = 25;

/// Marshall–Olkin parameters: a sparse map from nonempty subsets of
/// `{1, …, d}` to shock rates `λ_I ≥ 0`.
///
/// Only positive-rate subsets are stored, so sparse models in moderate
/// dimension stay cheap. Every component must be covered by at least one
/// positive rate. The alias table used by the Arnold sampler is built once
/// at construction.
#[derive(Debug, Clone)]
pub struct MOParameters {
    dim: usize,
    rates: Vec<(SubsetLabel, f64)>,
    total_rate: f64,
    mark_table: WeightedAliasIndex<f64>,
}

impl MOParameters {
    pub fn new(d: usize, entries: Vec<(SubsetLabel, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        let mut rates: Vec<(SubsetLabel, f64)> = Vec::new();
        for (subset, rate) in entries {
            if subset.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "subset dimension {} does not match model dimension {d}",
                    subset.dim()
                )));
            }
            if subset.is_empty() {
                return Err(Error::InvalidParameter("the empty set carries no shock rate".into()));
            }
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "shock rate for {:?} must be nonnegative, got {rate}",
                    subset.members()
                )));
            }
            if rates.iter().any(|(s, _)| s == &subset) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate rate entry for subset {:?}",
                    subset.members()
                )));
            }
            if rate > 0.0 {
                rates.push((subset, rate));
            }
        }
        rates.sort_by_key(|(s, _)| s.mask());
        let total_rate: f64 = rates.iter().map(|(_, r)| r).sum();
        for k in 1..=d {
            let covered: f64 = rates.iter().filter(|(s, _)| s.contains(k)).map(|(_, r)| r).sum();
            if !(covered > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "component {k} has zero total shock rate"
                )));
            }
        }
        let mark_table = WeightedAliasIndex::new(rates.iter().map(|(_, r)| *r).collect())
            .map_err(|e| Error::InvalidParameter(format!("alias table: {e}")))?;
        Ok(Self { dim: d, rates, total_rate, mark_table })
    }

    /// Convenience constructor for the bivariate model
    /// `(λ_{1}, λ_{2}, λ_{12})`.
    pub fn bivariate(lambda1: f64, lambda2: f64, lambda12: f64) -> Result<Self> {
        Self::new(
            2,
            vec![
                (SubsetLabel::new(&[1], 2)?, lambda1),
                (SubsetLabel::new(&[2], 2)?, lambda2),
                (SubsetLabel::new(&[1, 2], 2)?, lambda12),
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Positive-rate subsets, sorted by bitmask.
    pub fn rates(&self) -> &[(SubsetLabel, f64)] {
        &self.rates
    }

    pub fn rate_of(&self, subset: &SubsetLabel) -> f64 {
        self.rates
            .iter()
            .find(|(s, _)| s == subset)
            .map(|(_, r)| *r)
            .unwrap_or(0.0)
    }

    /// Total shock arrival rate `λ = Σ_I λ_I`.
    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }

    /// Exponential rate of the marginal `τ_k`: `Σ_{I ∋ k} λ_I`.
    pub fn marginal_rate(&self, k: usize) -> f64 {
        self.rates.iter().filter(|(s, _)| s.contains(k)).map(|(_, r)| r).sum()
    }

    /// `P(τ_1 > t_1, …, τ_d > t_d) = exp(-Σ_I λ_I max_{i∈I} t_i)`.
    pub fn survival(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} times, got {}",
                self.dim,
                t.len()
            )));
        }
        for &ti in t {
            if !(ti >= 0.0) {
                return Err(Error::InvalidParameter(format!("times must be nonnegative, got {ti}")));
            }
        }
        let mut exponent = 0.0;
        for (subset, rate) in &self.rates {
            let max_t = subset
                .members()
                .iter()
                .map(|&k| t[k - 1])
                .fold(0.0f64, f64::max);
            exponent += rate * max_t;
        }
        Ok((-exponent).exp())
    }

    /// Shock-model sampler: independent `E_I ~ Exp(λ_I)` per positive-rate
    /// subset, `τ_k = min{E_I : k ∈ I}`. Exact continuous-time sample.
    pub fn sample_shock<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DefaultTimeVector> {
        if self.dim > MAX_SHOCK_DIMENSION {
            return Err(Error::InvalidParameter(format!(
                "shock sampler is limited to d <= {MAX_SHOCK_DIMENSION}, got {}",
                self.dim
            )));
        }
        let mut taus = vec![BEYOND_HORIZON; self.dim];
        for (subset, rate) in &self.rates {
            let shock = Exp::new(*rate).unwrap().sample(rng);
            for k in subset.members() {
                if shock < taus[k - 1] {
                    taus[k - 1] = shock;
                }
            }
        }
        DefaultTimeVector::new(taus)
    }

    /// Arnold's sampler: a Poisson arrival process with rate `λ` whose marks
    /// are subsets drawn with probability `λ_K / λ`; `τ_k` is the arrival
    /// time of the first mark containing `k`.
    pub fn sample_arnold<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DefaultTimeVector> {
        let gap = Exp::new(self.total_rate).unwrap();
        let mut taus = vec![BEYOND_HORIZON; self.dim];
        let mut alive = self.dim;
        let mut t = 0.0;
        while alive > 0 {
            t += gap.sample(rng);
            let mark = &self.rates[self.mark_table.sample(rng)].0;
            for k in mark.members() {
                if taus[k - 1] == BEYOND_HORIZON {
                    taus[k - 1] = t;
                    alive -= 1;
                }
            }
        }
        DefaultTimeVector::new(taus)
    }
}

/// The two auxiliary parameters of the bivariate Marshall–Olkin survival
/// copula `C(u, v) = min{v u^{1-α}, u v^{1-β}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateMoCopulaParams {
    alpha: f64,
    beta: f64,
}

impl BivariateMoCopulaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be in [0,1], got {v}")));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `α = λ12/(λ1+λ12)`, `β = λ12/(λ2+λ12)`.
    pub fn from_rates(lambda1: f64, lambda2: f64, lambda12: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2), ("lambda12", lambda12)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if lambda1 + lambda12 <= 0.0 || lambda2 + lambda12 <= 0.0 {
            return Err(Error::InvalidParameter(
                "marginal rates lambda_i + lambda12 must be positive".into(),
            ));
        }
        Ok(Self {
            alpha: lambda12 / (lambda1 + lambda12),
            beta: lambda12 / (lambda2 + lambda12),
        })
    }

    /// `C(u, v) = min{v u^{1-α}, u v^{1-β}}`; `α = β` reduces to
    /// `min(u,v)·max(u,v)^{1-α}`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v));
        if u == 0.0 || v == 0.0 {
            return 0.0;
        }
        (v * u.powf(1.0 - self.alpha)).min(u * v.powf(1.0 - self.beta))
    }

    /// Recovers `(λ_{1}, λ_{2}, λ_{12})` from copula parameters plus the
    /// marginal exponential rates `r_i = λ_{i} + λ_{12}`.
    ///
    /// The inputs must be jointly consistent, `α r_1 = β r_2 (= λ_{12})`;
    /// everything else is rejected: gluing exponential margins of arbitrary
    /// rates onto an MO copula does not produce a Marshall–Olkin law.
    pub fn rates_with_margins(&self, r1: f64, r2: f64) -> Result<MOParameters> {
        if !(r1.is_finite() && r1 > 0.0 && r2.is_finite() && r2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "marginal rates must be positive, got {r1}, {r2}"
            )));
        }
        let l12_a = self.alpha * r1;
        let l12_b = self.beta * r2;
        let scale = l12_a.max(l12_b).max(1e-300);
        if (l12_a - l12_b).abs() > 1e-9 * scale {
            return Err(Error::InvalidParameter(format!(
                "inconsistent copula/margin combination: alpha*r1 = {l12_a} but beta*r2 = {l12_b}"
            )));
        }
        let lambda12 = 0.5 * (l12_a + l12_b);
        let lambda1 = (r1 - lambda12).max(0.0);
        let lambda2 = (r2 - lambda12).max(0.0);
        MOParameters::bivariate(lambda1, lambda2, lambda12)
    }
}
