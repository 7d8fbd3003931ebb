//! Batch simulation and exact-evaluation dispatch for parsed model configs.
//!
//! Path-level parallelism is deterministic by construction: path `i` always
//! consumes random substream `(seed, i)` and records are assembled in path
//! order, so the output is identical for any worker count.

use rayon::prelude::*;

use crate::config::{ModelKind, MoSamplerKind, SimulationConfig};
use crate::looping::{sample_ctmc_path_with, LoopingRateSpec, TransitionMatrix};
use crate::rng::RandomStream;
use crate::stepwise::simulate_stepwise_indicators;
use crate::types::{DefaultTimeVector, IndicatorPath, IndicatorState, TimeGrid, BEYOND_HORIZON};
use crate::{Error, Result};

/// One simulated path: exact or grid-valued default times, and optionally
/// the indicator path on the config grid.
#[derive(Debug, Clone)]
pub struct PathRecord {
    pub path_id: u64,
    pub taus: Vec<f64>,
    pub indicators: Option<Vec<IndicatorState>>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub dim: usize,
    pub grid: Option<TimeGrid>,
    pub records: Vec<PathRecord>,
}

/// First grid point at which each component is dead; sentinel if it survives
/// the horizon.
fn default_times_from_path(path: &IndicatorPath) -> Vec<f64> {
    let d = path.dim();
    let mut taus = vec![BEYOND_HORIZON; d];
    for (i, &t) in path.grid().points().iter().enumerate() {
        let state = path.state_at(i);
        for (k, tau) in taus.iter_mut().enumerate() {
            if tau.is_infinite() && !state.is_alive(k + 1) {
                *tau = t;
            }
        }
    }
    taus
}

/// Simulates `paths` independent paths of the configured model.
///
/// `include_indicators` additionally records the indicator path on the
/// config grid (which must then be present).
pub fn simulate_paths(
    config: &SimulationConfig,
    paths: u64,
    seed: u64,
    include_indicators: bool,
) -> Result<SimulationOutput> {
    let dim = config.model.dim();
    let grid = config.grid.clone();
    if include_indicators && grid.is_none() {
        return Err(Error::Config("indicator output needs a grid in the config".into()));
    }

    // per-model sampler closure over (path_id, rng)
    enum Sampler<'a> {
        Exact(Box<dyn Fn(&mut RandomStream) -> Result<DefaultTimeVector> + Sync + 'a>),
        Grid(Box<dyn Fn(&mut RandomStream) -> Result<IndicatorPath> + Sync + 'a>),
    }

    let needs_grid = || -> Result<&TimeGrid> {
        config
            .grid
            .as_ref()
            .ok_or_else(|| Error::Config(format!("model {:?} needs a grid", config.model.name())))
    };

    // precompute the transition matrix once for CTMC models
    let ctmc: Option<TransitionMatrix> = match &config.model {
        ModelKind::Freund(p) => {
            let dt = needs_grid()?.equal_step()?;
            Some(p.generator().transition(dt)?)
        }
        ModelKind::Looping(spec) => {
            let dt = needs_grid()?.equal_step()?;
            Some(spec.generator().transition(dt)?)
        }
        _ => None,
    };

    let sampler = match &config.model {
        ModelKind::MarshallOlkin { params, sampler } => match sampler {
            MoSamplerKind::Shock => {
                Sampler::Exact(Box::new(move |rng| params.sample_shock(rng)))
            }
            MoSamplerKind::Arnold => {
                Sampler::Exact(Box::new(move |rng| params.sample_arnold(rng)))
            }
        },
        ModelKind::Freund(_) | ModelKind::Looping(_) => {
            let p = ctmc.as_ref().unwrap();
            let grid = needs_grid()?;
            Sampler::Grid(Box::new(move |rng| {
                sample_ctmc_path_with(p, IndicatorState::all_alive(p.dim())?, grid, rng)
            }))
        }
        ModelKind::LfmOneFactor { model, mode } => {
            let grid = needs_grid()?;
            Sampler::Grid(Box::new(move |rng| Ok(model.sample_path(grid, *mode, rng)?.1)))
        }
        ModelKind::LfmMultiFactor { model, mode } => {
            let grid = needs_grid()?;
            Sampler::Grid(Box::new(move |rng| Ok(model.sample_path(grid, *mode, rng)?.1)))
        }
        ModelKind::CopulaMargins { copula, lambda1, lambda2 } => {
            if let Some(grid) = &config.grid {
                let steps = grid.len() - 1;
                let dt = grid.equal_step()?;
                if !grid.starts_at_zero() {
                    return Err(Error::Config("stepwise copula simulation needs a grid starting at 0".into()));
                }
                let (c, l1, l2) = (*copula, *lambda1, *lambda2);
                Sampler::Grid(Box::new(move |rng| {
                    simulate_stepwise_indicators(&c, l1, l2, dt, steps, rng)
                }))
            } else {
                let sampler = copula.sampler()?;
                let (l1, l2) = (*lambda1, *lambda2);
                Sampler::Exact(Box::new(move |rng| {
                    let (x1, x2) = sampler.sample_default_times(l1, l2, rng);
                    DefaultTimeVector::new(vec![x1, x2])
                }))
            }
        }
    };

    let records: Result<Vec<PathRecord>> = (0..paths)
        .into_par_iter()
        .map(|path_id| {
            let mut rng = RandomStream::new(seed, path_id);
            match &sampler {
                Sampler::Exact(f) => {
                    let taus = f(&mut rng)?;
                    let indicators = if include_indicators {
                        let grid = config.grid.as_ref().unwrap();
                        Some(IndicatorPath::from_default_times(&taus, grid.clone()).states().to_vec())
                    } else {
                        None
                    };
                    Ok(PathRecord { path_id, taus: taus.taus().to_vec(), indicators })
                }
                Sampler::Grid(f) => {
                    let path = f(&mut rng)?;
                    let taus = default_times_from_path(&path);
                    let indicators = include_indicators.then(|| path.states().to_vec());
                    Ok(PathRecord { path_id, taus, indicators })
                }
            }
        })
        .collect();

    Ok(SimulationOutput { dim, grid, records: records? })
}

/// Exact joint survival `P(τ_1 > t_1, …, τ_d > t_d)` where the model admits
/// one; [`Error::NoExactMethod`] otherwise.
pub fn survival(config: &SimulationConfig, t: &[f64]) -> Result<f64> {
    let d = config.model.dim();
    if t.len() != d {
        return Err(Error::DimensionMismatch(format!("model has dimension {d}, got {} times", t.len())));
    }
    for &ti in t {
        if !(ti.is_finite() && ti >= 0.0) {
            return Err(Error::InvalidParameter(format!("times must be nonnegative, got {ti}")));
        }
    }
    match &config.model {
        ModelKind::MarshallOlkin { params, .. } => params.survival(t),
        ModelKind::Freund(p) => Ok(p.survival(t[0], t[1])),
        ModelKind::Looping(spec) => {
            let grid = config.grid.as_ref().ok_or_else(|| {
                Error::NoExactMethod("looping survival needs a grid to chain transition matrices".into())
            })?;
            looping_survival_on_grid(spec, grid, t)
        }
        ModelKind::LfmOneFactor { model, .. } => model.survival(t),
        ModelKind::LfmMultiFactor { model, .. } => model.survival(t),
        ModelKind::CopulaMargins { copula, lambda1, lambda2 } => {
            Ok(copula.cdf((-lambda1 * t[0]).exp(), (-lambda2 * t[1]).exp()))
        }
    }
}

/// Markov-chain survival by forward propagation: transition over each
/// segment between requested times, projecting onto "component still alive"
/// at its own horizon. Every positive `t_i` must be a grid point.
fn looping_survival_on_grid(spec: &LoopingRateSpec, grid: &TimeGrid, t: &[f64]) -> Result<f64> {
    let d = spec.dim();
    for &ti in t {
        if ti > 0.0 && !grid.points().iter().any(|&p| (p - ti).abs() <= 1e-9 * p.max(1.0)) {
            return Err(Error::NoExactMethod(format!(
                "time {ti} is not on the model grid; matrix-exponential chaining needs grid times"
            )));
        }
    }
    let q = spec.generator();
    let n = q.size();
    let mut v = vec![0.0f64; n];
    v[IndicatorState::all_alive(d)?.matrix_index()] = 1.0;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| t[a].partial_cmp(&t[b]).unwrap());
    let mut prev = 0.0;
    for &k in &order {
        let tk = t[k];
        if tk > prev {
            let p = q.transition(tk - prev)?;
            let mut next = vec![0.0f64; n];
            for (i, &vi) in v.iter().enumerate() {
                if vi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[j] += vi * p.matrix()[(i, j)];
                }
            }
            v = next;
            prev = tk;
        }
        // require component k alive at its own horizon
        for (i, vi) in v.iter_mut().enumerate() {
            if !IndicatorState::from_matrix_index(i, d)?.is_alive(k + 1) {
                *vi = 0.0;
            }
        }
    }
    Ok(v.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// The transition matrix `P[t]` of a Markov-chain model (Freund/ACBVE or
/// looping), for CSV export.
pub fn transition_matrix(config: &SimulationConfig, t: f64) -> Result<TransitionMatrix> {
    match &config.model {
        ModelKind::Freund(p) => p.generator().transition(t),
        ModelKind::Looping(spec) => spec.generator().transition(t),
        other => Err(Error::Config(format!(
            "transition matrices exist only for freund/acbve/looping models, not {:?}",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn deterministic_and_worker_invariant_records() {
        let cfg = parse_config(
            r#"{"model": "freund", "lambda1": 1.0, "lambda2": 1.0,
                "lambda1_post": 3.0, "lambda2_post": 3.0,
                "grid": {"dt": 0.5, "steps": 6}, "seed": 42, "paths": 50}"#,
        )
        .unwrap();
        let a = simulate_paths(&cfg, 50, 42, true).unwrap();
        let b = simulate_paths(&cfg, 50, 42, true).unwrap();
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.path_id, rb.path_id);
            assert_eq!(ra.taus, rb.taus);
            assert_eq!(ra.indicators, rb.indicators);
        }

        // a dedicated two-worker pool must produce the identical records
        let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let c = pool.install(|| simulate_paths(&cfg, 50, 42, true)).unwrap();
        for (ra, rc) in a.records.iter().zip(&c.records) {
            assert_eq!(ra.taus, rc.taus);
        }
    }

    #[test]
    fn grid_models_require_grid() {
        let cfg = parse_config(
            r#"{"model": "freund", "lambda1": 1.0, "lambda2": 1.0,
                "lambda1_post": 3.0, "lambda2_post": 3.0}"#,
        )
        .unwrap();
        assert!(simulate_paths(&cfg, 5, 0, false).is_err());
    }

    #[test]
    fn grid_valued_taus_match_indicator_paths() {
        let cfg = parse_config(
            r#"{"model": "lfm_one_factor", "d": 3,
                "subordinator": {"family": "gamma", "beta": 1.0, "eta": 1.0},
                "grid": {"dt": 0.5, "steps": 4}}"#,
        )
        .unwrap();
        let out = simulate_paths(&cfg, 200, 7, true).unwrap();
        let grid = out.grid.as_ref().unwrap();
        for rec in &out.records {
            let states = rec.indicators.as_ref().unwrap();
            for (i, state) in states.iter().enumerate() {
                for k in 1..=3 {
                    assert_eq!(state.is_alive(k), rec.taus[k - 1] > grid.points()[i]);
                }
            }
        }
    }

    #[test]
    fn survival_dispatch() {
        // Marshall-Olkin
        let cfg = parse_config(
            r#"{"model": "marshall_olkin", "d": 2,
                "rates": {"0b01": 0.03333333333333333, "0b10": 0.03333333333333333, "0b11": 0.06666666666666667}}"#,
        )
        .unwrap();
        let p = survival(&cfg, &[10.0, 10.0]).unwrap();
        assert!((p - (-4.0f64 / 3.0).exp()).abs() < 1e-12);

        // Freund closed form
        let cfg = parse_config(
            r#"{"model": "freund", "lambda1": 1.0, "lambda2": 1.0, "lambda1_post": 3.0, "lambda2_post": 3.0}"#,
        )
        .unwrap();
        assert!((survival(&cfg, &[1.0, 1.0]).unwrap() - (-2.0f64).exp()).abs() < 1e-14);

        // copula margins
        let cfg = parse_config(
            r#"{"model": "copula_margins", "copula": {"family": "gumbel", "theta": 0.5},
                "lambda1": 0.1, "lambda2": 0.1}"#,
        )
        .unwrap();
        assert!((survival(&cfg, &[10.0, 10.0]).unwrap() - (-2.0f64.sqrt()).exp()).abs() < 1e-14);
    }

    #[test]
    fn looping_survival_chains_and_rejects_off_grid() {
        // a d=2 looping spec that mirrors Freund (1,1,3,3)
        let cfg = parse_config(
            r#"{"model": "looping", "d": 2,
                "rates": {"0b11->0b10": 1.0, "0b11->0b01": 1.0, "0b10->0b00": 3.0, "0b01->0b00": 3.0},
                "grid": {"dt": 0.5, "steps": 8}}"#,
        )
        .unwrap();
        // NB mask 0b10 is the alive-set {2}: component 1 defaulted first
        let freund = parse_config(
            r#"{"model": "freund", "lambda1": 1.0, "lambda2": 1.0, "lambda1_post": 3.0, "lambda2_post": 3.0}"#,
        )
        .unwrap();
        for probe in [[1.0, 1.0], [0.5, 2.0], [3.0, 1.5], [0.0, 2.5]] {
            let a = survival(&cfg, &probe).unwrap();
            let b = survival(&freund, &probe).unwrap();
            assert!((a - b).abs() < 1e-10, "probe {probe:?}: {a} vs {b}");
        }
        match survival(&cfg, &[1.0, 1.23]) {
            Err(Error::NoExactMethod(_)) => {}
            other => panic!("expected NoExactMethod, got {other:?}"),
        }
    }

    #[test]
    fn transition_matrix_export_dispatch() {
        let cfg = parse_config(
            r#"{"model": "acbve", "eta1": 1.0, "eta2": 1.0, "eta12": 1.0}"#,
        )
        .unwrap();
        let p = transition_matrix(&cfg, 0.0).unwrap();
        assert_eq!(p.matrix(), &nalgebra::DMatrix::<f64>::identity(4, 4));

        let cfg = parse_config(
            r#"{"model": "copula_margins", "copula": {"family": "gumbel", "theta": 0.5},
                "lambda1": 0.1, "lambda2": 0.1}"#,
        )
        .unwrap();
        assert!(transition_matrix(&cfg, 1.0).is_err());
    }
}
