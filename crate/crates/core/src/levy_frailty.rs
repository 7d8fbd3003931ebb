//! Lévy-frailty default-time models: grid sampling of first-passage times of
//! subordinators across exponential triggers, one-factor and multi-factor,
//! with closed-form joint survival functions.
//!
//! Default times are grid-valued: a component killed during a step is
//! recorded at the *right* endpoint of that step, and components that survive
//! the horizon carry the beyond-horizon sentinel. At grid points this
//! right-rounding leaves the joint survival indicators unchanged, which is
//! what makes the sampler unbiased against the closed forms.

use rand::Rng;

use crate::marshall_olkin::MOParameters;
use crate::subordinators::SubordinatorSpec;
use crate::types::{DefaultTimeVector, IndicatorPath, TimeGrid, BEYOND_HORIZON};
use crate::{Error, Result};

/// How a component's killing test consumes randomness in each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriggerMode {
    /// Draw a fresh unit exponential residual `E` and kill if the step
    /// exposure exceeds it.
    ExponentialResidual,
    /// Kill with probability `1 - exp(-exposure)` directly.
    Bernoulli,
}

/// One-factor Lévy-frailty model: all components are triggered by a single
/// subordinator; `trigger_rates` all equal to 1 is the homogeneous
/// (exchangeable) case, the only one with a closed-form survival function.
#[derive(Debug, Clone)]
pub struct OneFactorLfm {
    spec: SubordinatorSpec,
    trigger_rates: Vec<f64>,
}

impl OneFactorLfm {
    pub fn homogeneous(spec: SubordinatorSpec, d: usize) -> Result<Self> {
        Self::with_trigger_rates(spec, vec![1.0; d.max(1)])
    }

    pub fn with_trigger_rates(spec: SubordinatorSpec, trigger_rates: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if trigger_rates.is_empty() {
            return Err(Error::InvalidParameter("model needs at least one component".into()));
        }
        for &r in &trigger_rates {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "trigger rates must be positive, got {r}"
                )));
            }
        }
        Ok(Self { spec, trigger_rates })
    }

    pub fn dim(&self) -> usize {
        self.trigger_rates.len()
    }

    pub fn spec(&self) -> &SubordinatorSpec {
        &self.spec
    }

    pub fn trigger_rates(&self) -> &[f64] {
        &self.trigger_rates
    }

    pub fn is_homogeneous(&self) -> bool {
        self.trigger_rates.iter().all(|&r| r == 1.0)
    }

    /// Closed-form joint survival; homogeneous triggers only (no closed form
    /// is available for heterogeneous rates, use Monte Carlo there).
    pub fn survival(&self, t: &[f64]) -> Result<f64> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} times, got {}",
                self.dim(),
                t.len()
            )));
        }
        if !self.is_homogeneous() {
            return Err(Error::NoExactMethod(
                "no closed-form survival for heterogeneous trigger rates".into(),
            ));
        }
        survival_one_factor(&self.spec, t)
    }

    /// Algorithm-style grid sampling: one shared subordinator increment per
    /// step feeds every component.
    pub fn sample_path<R: Rng + ?Sized>(
        &self,
        grid: &TimeGrid,
        mode: TriggerMode,
        rng: &mut R,
    ) -> Result<(DefaultTimeVector, IndicatorPath)> {
        let rates = self.trigger_rates.clone();
        let spec = self.spec.clone();
        sample_frailty_path(self.dim(), grid, mode, rng, move |dt, rng, exposures| {
            let inc = spec.sample_increment(dt, rng);
            for (e, &r) in exposures.iter_mut().zip(&rates) {
                *e = scaled(r, inc);
            }
        })
    }
}

/// Multi-factor Lévy-frailty model: component `k` is triggered by the
/// weighted combination `Λ^{(k)} = Σ_ℓ θ_{k,ℓ} Λ̂^{(ℓ)}` of `m` independent
/// subordinators.
#[derive(Debug, Clone)]
pub struct MultiFactorLfm {
    factors: Vec<SubordinatorSpec>,
    /// `d × m` nonnegative loadings, each row with at least one positive entry.
    weights: Vec<Vec<f64>>,
}

impl MultiFactorLfm {
    pub fn new(factors: Vec<SubordinatorSpec>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("model needs at least one factor".into()));
        }
        for f in &factors {
            f.validate()?;
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter("model needs at least one component".into()));
        }
        let m = factors.len();
        for (k, row) in weights.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "weight row {k} has {} entries for {m} factors",
                    row.len()
                )));
            }
            let mut any_positive = false;
            for &w in row {
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "weights must be nonnegative, got {w}"
                    )));
                }
                any_positive |= w > 0.0;
            }
            if !any_positive {
                return Err(Error::InvalidParameter(format!(
                    "weight row {k} is all zero; the component would never default"
                )));
            }
        }
        Ok(Self { factors, weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[SubordinatorSpec] {
        &self.factors
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Exact joint survival
    /// `exp(-Σ_ℓ Σ_j Ψ̂_ℓ(Σ_{k=j}^d θ_{ℓ,π(k)}) (t_{π(j)} - t_{π(j-1)}))`
    /// over the ascending ordering `π` of the times. Ties contribute
    /// zero-length intervals, so any tie-breaking permutation evaluates to
    /// the same value.
    pub fn survival(&self, t: &[f64]) -> Result<f64> {
        let d = self.dim();
        if t.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "expected {d} times, got {}",
                t.len()
            )));
        }
        for &ti in t {
            if !(ti >= 0.0) {
                return Err(Error::InvalidParameter(format!("times must be nonnegative, got {ti}")));
            }
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| t[a].partial_cmp(&t[b]).unwrap());

        let mut exponent = 0.0;
        for (ell, factor) in self.factors.iter().enumerate() {
            // running tail sums Σ_{k=j}^d θ_{ℓ,π(k)}
            let mut tail: f64 = order.iter().map(|&k| self.weights[k][ell]).sum();
            let mut prev = 0.0;
            for &k in &order {
                let tk = t[k];
                if tk > prev {
                    exponent += factor.laplace_exponent(tail) * (tk - prev);
                    prev = tk;
                }
                tail -= self.weights[k][ell];
            }
        }
        Ok((-exponent).exp())
    }

    pub fn sample_path<R: Rng + ?Sized>(
        &self,
        grid: &TimeGrid,
        mode: TriggerMode,
        rng: &mut R,
    ) -> Result<(DefaultTimeVector, IndicatorPath)> {
        let factors = self.factors.clone();
        let weights = self.weights.clone();
        let mut increments = vec![0.0; factors.len()];
        sample_frailty_path(self.dim(), grid, mode, rng, move |dt, rng, exposures| {
            // one shared draw of each factor increment per step
            for (inc, factor) in increments.iter_mut().zip(&factors) {
                *inc = factor.sample_increment(dt, rng);
            }
            for (e, row) in exposures.iter_mut().zip(&weights) {
                let mut total = 0.0;
                for (&w, &inc) in row.iter().zip(&increments) {
                    total += scaled(w, inc);
                }
                *e = total;
            }
        })
    }
}

/// `w * inc` with `0 * ∞ = 0` (an unloaded factor cannot kill).
fn scaled(w: f64, inc: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        w * inc
    }
}

/// Homogeneous one-factor joint survival:
/// `Π_k exp(-(t_{π(k)} - t_{π(k-1)}) Ψ(d+1-k))` over the ascending ordering.
pub fn survival_one_factor(spec: &SubordinatorSpec, t: &[f64]) -> Result<f64> {
    if t.is_empty() {
        return Err(Error::InvalidParameter("need at least one time".into()));
    }
    for &ti in t {
        if !(ti >= 0.0) {
            return Err(Error::InvalidParameter(format!("times must be nonnegative, got {ti}")));
        }
    }
    let d = t.len();
    let mut sorted = t.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut exponent = 0.0;
    let mut prev = 0.0;
    for (k, &tk) in sorted.iter().enumerate() {
        exponent += (tk - prev) * spec.laplace_exponent((d - k) as f64);
        prev = tk;
    }
    Ok((-exponent).exp())
}

/// Core of the grid sampler: advance the step clock, build per-component
/// exposures from the shared factor increments, and test each still-alive
/// component against its trigger.
fn sample_frailty_path<R, F>(
    d: usize,
    grid: &TimeGrid,
    mode: TriggerMode,
    rng: &mut R,
    mut step_exposures: F,
) -> Result<(DefaultTimeVector, IndicatorPath)>
where
    R: Rng + ?Sized,
    F: FnMut(f64, &mut R, &mut [f64]),
{
    if !grid.starts_at_zero() {
        return Err(Error::InvalidParameter("frailty sampling grid must start at t0 = 0".into()));
    }
    let points = grid.points();
    let mut taus = vec![BEYOND_HORIZON; d];
    let mut alive = d;
    let mut exposures = vec![0.0; d];
    for step in 1..points.len() {
        if alive == 0 {
            break;
        }
        let t_star = points[step];
        let dt = points[step] - points[step - 1];
        step_exposures(dt, rng, &mut exposures);
        for k in 0..d {
            if taus[k] != BEYOND_HORIZON {
                continue;
            }
            let exposure = exposures[k];
            let killed = match mode {
                TriggerMode::ExponentialResidual => {
                    let e = -rng.random::<f64>().clamp(1e-300, 1.0).ln();
                    exposure > e
                }
                TriggerMode::Bernoulli => {
                    let p = if exposure.is_infinite() { 1.0 } else { -(-exposure).exp_m1() };
                    rng.random::<f64>() < p
                }
            };
            if killed {
                taus[k] = t_star;
                alive -= 1;
            }
        }
    }
    let taus = DefaultTimeVector::new(taus)?;
    let path = IndicatorPath::from_default_times(&taus, grid.clone());
    Ok((taus, path))
}

/// Weight matrix of the hierarchical (global + group factor) model:
/// component `k` in group `g` loads `α_g` on the global factor (column 0)
/// and `β_g` on its group factor (column `g`), all other entries zero.
///
/// `group_of` assigns each component a 1-based group in `1..=J`; `global`
/// and `group_loads` hold `α_1..α_J` and `β_1..β_J`.
pub fn hierarchical_weights(
    group_of: &[usize],
    global: &[f64],
    group_loads: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if group_of.is_empty() {
        return Err(Error::InvalidParameter("need at least one component".into()));
    }
    let j = global.len();
    if group_loads.len() != j {
        return Err(Error::DimensionMismatch(format!(
            "{} global loads but {} group loads",
            j,
            group_loads.len()
        )));
    }
    for &a in global.iter().chain(group_loads) {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::InvalidParameter(format!("loads must be nonnegative, got {a}")));
        }
    }
    let mut weights = Vec::with_capacity(group_of.len());
    for (k, &g) in group_of.iter().enumerate() {
        if g == 0 || g > j {
            return Err(Error::InvalidParameter(format!(
                "component {} assigned to group {g}, valid groups are 1..={j}",
                k + 1
            )));
        }
        if global[g - 1] + group_loads[g - 1] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "group {g} has alpha + beta = 0; its components would never default"
            )));
        }
        let mut row = vec![0.0; j + 1];
        row[0] = global[g - 1];
        row[g] = group_loads[g - 1];
        weights.push(row);
    }
    Ok(weights)
}

/// Matches the `d = 2` homogeneous one-factor survival function with the
/// explicit Marshall–Olkin rates: `λ_{1} = λ_{2} = Ψ(2) - Ψ(1)`,
/// `λ_{12} = 2Ψ(1) - Ψ(2)` (nonnegative by concavity of `Ψ`).
pub fn bivariate_mo_from_psi(spec: &SubordinatorSpec) -> Result<MOParameters> {
    spec.validate()?;
    let psi1 = spec.laplace_exponent(1.0);
    let psi2 = spec.laplace_exponent(2.0);
    if !psi1.is_finite() || !psi2.is_finite() {
        return Err(Error::Numerical("laplace exponent must be finite at 1 and 2".into()));
    }
    let single = psi2 - psi1;
    let joint = 2.0 * psi1 - psi2;
    if single < -1e-12 || joint < -1e-12 {
        return Err(Error::Numerical(format!(
            "spec violates monotonicity/concavity: psi(1)={psi1}, psi(2)={psi2}"
        )));
    }
    MOParameters::bivariate(single.max(0.0), single.max(0.0), joint.max(0.0))
}
