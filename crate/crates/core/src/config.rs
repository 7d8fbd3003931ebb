//! JSON model-configuration documents.
//!
//! Every document carries a `"model"` discriminator plus model-specific
//! fields, and optionally `"grid"`, `"seed"` and `"paths"`. Unknown fields
//! are rejected. Subset keys are bitmask strings, either binary (`"0b011"`)
//! or decimal (`"3"`), with component `k` on bit `k-1`; looping rate keys
//! combine two masks as `"aliveMask->targetMask"`.

use serde::Deserialize;
use serde_json::Value;

use crate::copulas::CopulaSpec;
use crate::levy_frailty::{MultiFactorLfm, OneFactorLfm, TriggerMode};
use crate::looping::{FreundParams, LoopingRateSpec};
use crate::marshall_olkin::MOParameters;
use crate::subordinators::{JumpFamily, SubordinatorSpec};
use crate::types::{SubsetLabel, TimeGrid};
use crate::{Error, Result};

/// Which exact sampler a Marshall–Olkin config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoSamplerKind {
    Shock,
    Arnold,
}

/// A parsed and validated model: the simulation target of one config file.
#[derive(Debug, Clone)]
pub enum ModelKind {
    MarshallOlkin { params: MOParameters, sampler: MoSamplerKind },
    Freund(FreundParams),
    Looping(LoopingRateSpec),
    LfmOneFactor { model: OneFactorLfm, mode: TriggerMode },
    LfmMultiFactor { model: MultiFactorLfm, mode: TriggerMode },
    CopulaMargins { copula: CopulaSpec, lambda1: f64, lambda2: f64 },
}

impl ModelKind {
    pub fn dim(&self) -> usize {
        match self {
            ModelKind::MarshallOlkin { params, .. } => params.dim(),
            ModelKind::Freund(_) => 2,
            ModelKind::Looping(spec) => spec.dim(),
            ModelKind::LfmOneFactor { model, .. } => model.dim(),
            ModelKind::LfmMultiFactor { model, .. } => model.dim(),
            ModelKind::CopulaMargins { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::MarshallOlkin { .. } => "marshall_olkin",
            ModelKind::Freund(_) => "freund",
            ModelKind::Looping(_) => "looping",
            ModelKind::LfmOneFactor { .. } => "lfm_one_factor",
            ModelKind::LfmMultiFactor { .. } => "lfm_multi_factor",
            ModelKind::CopulaMargins { .. } => "copula_margins",
        }
    }
}

/// A fully validated configuration document.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub model: ModelKind,
    pub grid: Option<TimeGrid>,
    pub seed: u64,
    pub paths: u64,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

pub fn load_config(path: &std::path::Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(json: &str) -> Result<SimulationConfig> {
    let value: Value = serde_json::from_str(json).map_err(config_err)?;
    let model_tag = value
        .get("model")
        .and_then(Value::as_str)
        .ok_or_else(|| config_err("missing string field \"model\""))?
        .to_string();

    match model_tag.as_str() {
        "marshall_olkin" => {
            let doc: MarshallOlkinDoc = from_value(&value)?;
            let d = doc.d;
            let entries = doc
                .rates
                .iter()
                .map(|(key, rate)| Ok((parse_mask_key(key, d)?, parse_rate(rate)?)))
                .collect::<Result<Vec<_>>>()?;
            let params = MOParameters::new(d, entries)?;
            let sampler = match doc.sampler.as_deref() {
                None | Some("shock") => MoSamplerKind::Shock,
                Some("arnold") => MoSamplerKind::Arnold,
                Some(other) => {
                    return Err(config_err(format!(
                        "unknown sampler {other:?}, expected \"shock\" or \"arnold\""
                    )))
                }
            };
            finish(ModelKind::MarshallOlkin { params, sampler }, common(doc.grid, doc.seed, doc.paths))
        }
        "freund" => {
            let doc: FreundDoc = from_value(&value)?;
            let params = FreundParams::new(doc.lambda1, doc.lambda2, doc.lambda1_post, doc.lambda2_post)?;
            finish(ModelKind::Freund(params), common(doc.grid, doc.seed, doc.paths))
        }
        "acbve" => {
            let doc: AcbveDoc = from_value(&value)?;
            let params = FreundParams::from_acbve(doc.eta1, doc.eta2, doc.eta12)?;
            finish(ModelKind::Freund(params), common(doc.grid, doc.seed, doc.paths))
        }
        "looping" => {
            let doc: LoopingDoc = from_value(&value)?;
            let d = doc.d;
            let entries = doc
                .rates
                .iter()
                .map(|(key, rate)| {
                    let (from, to) = parse_transition_key(key, d)?;
                    Ok((from, to, parse_rate(rate)?))
                })
                .collect::<Result<Vec<_>>>()?;
            finish(ModelKind::Looping(LoopingRateSpec::new(d, entries)?), common(doc.grid, doc.seed, doc.paths))
        }
        "lfm_one_factor" => {
            let doc: LfmOneFactorDoc = from_value(&value)?;
            let spec = subordinator_from_value(&doc.subordinator)?;
            let model = match doc.trigger_rates {
                Some(rates) => {
                    if rates.len() != doc.d {
                        return Err(config_err(format!(
                            "{} trigger rates for d = {}",
                            rates.len(),
                            doc.d
                        )));
                    }
                    OneFactorLfm::with_trigger_rates(spec, rates)?
                }
                None => OneFactorLfm::homogeneous(spec, doc.d)?,
            };
            let mode = parse_trigger_mode(doc.trigger_mode.as_deref())?;
            finish(ModelKind::LfmOneFactor { model, mode }, common(doc.grid, doc.seed, doc.paths))
        }
        "lfm_multi_factor" => {
            let doc: LfmMultiFactorDoc = from_value(&value)?;
            let factors = doc
                .factors
                .iter()
                .map(subordinator_from_value)
                .collect::<Result<Vec<_>>>()?;
            let model = MultiFactorLfm::new(factors, doc.weights)?;
            let mode = parse_trigger_mode(doc.trigger_mode.as_deref())?;
            finish(ModelKind::LfmMultiFactor { model, mode }, common(doc.grid, doc.seed, doc.paths))
        }
        "copula_margins" => {
            let doc: CopulaMarginsDoc = from_value(&value)?;
            let copula = copula_from_value(&doc.copula)?;
            for (name, v) in [("lambda1", doc.lambda1), ("lambda2", doc.lambda2)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(config_err(format!("{name} must be positive, got {v}")));
                }
            }
            finish(
                ModelKind::CopulaMargins { copula, lambda1: doc.lambda1, lambda2: doc.lambda2 },
                common(doc.grid, doc.seed, doc.paths),
            )
        }
        other => Err(config_err(format!("unknown model {other:?}"))),
    }
}

fn common(grid: Option<GridDoc>, seed: Option<u64>, paths: Option<u64>) -> CommonFields {
    CommonFields { grid, seed, paths }
}

fn finish(model: ModelKind, common: CommonFields) -> Result<SimulationConfig> {
    let grid = match common.grid {
        Some(g) => Some(g.build()?),
        None => None,
    };
    Ok(SimulationConfig {
        model,
        grid,
        seed: common.seed.unwrap_or(0),
        paths: common.paths.unwrap_or(1),
    })
}

fn from_value<'a, T: Deserialize<'a>>(value: &'a Value) -> Result<T> {
    T::deserialize(value).map_err(config_err)
}

struct CommonFields {
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    #[serde(default)]
    t0: Option<f64>,
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    steps: Option<usize>,
    #[serde(default)]
    points: Option<Vec<f64>>,
}

impl GridDoc {
    fn build(self) -> Result<TimeGrid> {
        match (self.points, self.dt, self.steps) {
            (Some(points), None, None) => {
                if self.t0.is_some() {
                    return Err(config_err("grid: give either points or t0/dt/steps, not both"));
                }
                TimeGrid::new(points)
            }
            (None, Some(dt), Some(steps)) => TimeGrid::uniform(self.t0.unwrap_or(0.0), dt, steps),
            _ => Err(config_err("grid needs either {points} or {t0?, dt, steps}")),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarshallOlkinDoc {
    #[allow(dead_code)]
    model: String,
    d: usize,
    rates: serde_json::Map<String, Value>,
    sampler: Option<String>,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FreundDoc {
    #[allow(dead_code)]
    model: String,
    lambda1: f64,
    lambda2: f64,
    lambda1_post: f64,
    lambda2_post: f64,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AcbveDoc {
    #[allow(dead_code)]
    model: String,
    eta1: f64,
    eta2: f64,
    eta12: f64,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoopingDoc {
    #[allow(dead_code)]
    model: String,
    d: usize,
    rates: serde_json::Map<String, Value>,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LfmOneFactorDoc {
    #[allow(dead_code)]
    model: String,
    d: usize,
    subordinator: Value,
    trigger_rates: Option<Vec<f64>>,
    trigger_mode: Option<String>,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LfmMultiFactorDoc {
    #[allow(dead_code)]
    model: String,
    factors: Vec<Value>,
    weights: Vec<Vec<f64>>,
    trigger_mode: Option<String>,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CopulaMarginsDoc {
    #[allow(dead_code)]
    model: String,
    copula: Value,
    lambda1: f64,
    lambda2: f64,
    grid: Option<GridDoc>,
    seed: Option<u64>,
    paths: Option<u64>,
}

fn parse_trigger_mode(mode: Option<&str>) -> Result<TriggerMode> {
    match mode {
        None | Some("exponential_residual") => Ok(TriggerMode::ExponentialResidual),
        Some("bernoulli") => Ok(TriggerMode::Bernoulli),
        Some(other) => Err(config_err(format!(
            "unknown trigger_mode {other:?}, expected \"exponential_residual\" or \"bernoulli\""
        ))),
    }
}

fn parse_rate(value: &Value) -> Result<f64> {
    value
        .as_f64()
        .ok_or_else(|| config_err(format!("rate must be a number, got {value}")))
}

/// Parses a subset bitmask key, binary (`"0b101"`) or decimal (`"5"`).
fn parse_mask_key(key: &str, d: usize) -> Result<SubsetLabel> {
    let mask = if let Some(bits) = key.strip_prefix("0b") {
        u32::from_str_radix(bits, 2).map_err(|e| config_err(format!("bad bitmask {key:?}: {e}")))?
    } else {
        key.parse::<u32>().map_err(|e| config_err(format!("bad bitmask {key:?}: {e}")))?
    };
    SubsetLabel::from_mask(mask, d)
}

fn parse_transition_key(key: &str, d: usize) -> Result<(SubsetLabel, SubsetLabel)> {
    let (from, to) = key
        .split_once("->")
        .ok_or_else(|| config_err(format!("transition key {key:?} must look like \"fromMask->toMask\"")))?;
    Ok((parse_mask_key(from.trim(), d)?, parse_mask_key(to.trim(), d)?))
}

/// Parses a subordinator document, dispatching on `"family"`.
pub fn subordinator_from_value(value: &Value) -> Result<SubordinatorSpec> {
    let family = value
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| config_err("subordinator needs a string field \"family\""))?;
    let spec = match family {
        "drift" => {
            let doc: DriftDoc = from_value(value)?;
            SubordinatorSpec::Drift { mu: doc.mu }
        }
        "killed_drift" => {
            let doc: KilledDriftDoc = from_value(value)?;
            SubordinatorSpec::KilledDrift { mu: doc.mu, lambda: doc.lambda }
        }
        "compound_poisson_drift" => {
            let doc: CompoundPoissonDoc = from_value(value)?;
            SubordinatorSpec::CompoundPoissonDrift {
                mu: doc.mu,
                lambda: doc.lambda,
                jumps: jump_family_from_value(&doc.jumps)?,
            }
        }
        "gamma" => {
            let doc: BetaEtaDoc = from_value(value)?;
            SubordinatorSpec::Gamma { beta: doc.beta, eta: doc.eta }
        }
        "inverse_gaussian" => {
            let doc: BetaEtaDoc = from_value(value)?;
            SubordinatorSpec::InverseGaussian { beta: doc.beta, eta: doc.eta }
        }
        "stable" => {
            let doc: StableDoc = from_value(value)?;
            SubordinatorSpec::Stable { alpha: doc.alpha }
        }
        "sum" => {
            let doc: SumDoc = from_value(value)?;
            let terms = doc
                .terms
                .iter()
                .map(|t| Ok((t.weight, subordinator_from_value(&t.spec)?)))
                .collect::<Result<Vec<_>>>()?;
            SubordinatorSpec::Sum(terms)
        }
        other => return Err(config_err(format!("unknown subordinator family {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriftDoc {
    #[allow(dead_code)]
    family: String,
    mu: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KilledDriftDoc {
    #[allow(dead_code)]
    family: String,
    mu: f64,
    lambda: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompoundPoissonDoc {
    #[allow(dead_code)]
    family: String,
    mu: f64,
    lambda: f64,
    jumps: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BetaEtaDoc {
    #[allow(dead_code)]
    family: String,
    beta: f64,
    eta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StableDoc {
    #[allow(dead_code)]
    family: String,
    alpha: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SumDoc {
    #[allow(dead_code)]
    family: String,
    terms: Vec<SumTermDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SumTermDoc {
    weight: f64,
    spec: Value,
}

fn jump_family_from_value(value: &Value) -> Result<JumpFamily> {
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| config_err("jump family needs a string field \"kind\""))?;
    match kind {
        "exponential" => {
            let doc: ExponentialJumpDoc = from_value(value)?;
            Ok(JumpFamily::Exponential { rate: doc.rate })
        }
        "constant" => {
            let doc: ConstantJumpDoc = from_value(value)?;
            Ok(JumpFamily::Constant { size: doc.size })
        }
        other => Err(config_err(format!("unknown jump family {other:?}"))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExponentialJumpDoc {
    #[allow(dead_code)]
    kind: String,
    rate: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantJumpDoc {
    #[allow(dead_code)]
    kind: String,
    size: f64,
}

/// Parses a copula document, dispatching on `"family"`.
pub fn copula_from_value(value: &Value) -> Result<CopulaSpec> {
    let family = value
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| config_err("copula needs a string field \"family\""))?;
    match family {
        "gaussian" => {
            let doc: GaussianCopulaDoc = from_value(value)?;
            CopulaSpec::gaussian(doc.rho)
        }
        "gumbel" => {
            let doc: GumbelCopulaDoc = from_value(value)?;
            CopulaSpec::gumbel(doc.theta)
        }
        "marshall_olkin" => {
            let doc: MoCopulaDoc = from_value(value)?;
            CopulaSpec::marshall_olkin(doc.alpha, doc.beta)
        }
        other => Err(config_err(format!("unknown copula family {other:?}"))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianCopulaDoc {
    #[allow(dead_code)]
    family: String,
    rho: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GumbelCopulaDoc {
    #[allow(dead_code)]
    family: String,
    theta: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoCopulaDoc {
    #[allow(dead_code)]
    family: String,
    alpha: f64,
    beta: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_marshall_olkin_with_mixed_key_styles() {
        let cfg = parse_config(
            r#"{
                "model": "marshall_olkin",
                "d": 2,
                "rates": {"0b01": 0.0333, "2": 0.0333, "0b11": 0.0667},
                "seed": 42,
                "paths": 10
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.paths, 10);
        match cfg.model {
            ModelKind::MarshallOlkin { params, sampler } => {
                assert_eq!(sampler, MoSamplerKind::Shock);
                assert_eq!(params.dim(), 2);
                assert!((params.total_rate() - 0.1333).abs() < 1e-12);
            }
            other => panic!("wrong model {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_fields_and_bad_masks() {
        let err = parse_config(
            r#"{"model": "freund", "lambda1": 1, "lambda2": 1, "lambda1_post": 3, "lambda2_post": 3, "typo": 1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");

        assert!(parse_config(r#"{"model": "marshall_olkin", "d": 2, "rates": {"0b111": 1.0}}"#).is_err());
        assert!(parse_config(r#"{"model": "marshall_olkin", "d": 2, "rates": {"xyz": 1.0}}"#).is_err());
        assert!(parse_config("not json at all").is_err());
        assert!(parse_config(r#"{"model": "nope"}"#).is_err());
    }

    #[test]
    fn parses_looping_transitions() {
        let cfg = parse_config(
            r#"{
                "model": "looping",
                "d": 2,
                "rates": {
                    "0b11->0b10": 1.0,
                    "0b11->0b01": 1.0,
                    "0b11->0b00": 0.25,
                    "0b10->0b00": 2.0,
                    "0b01->0b00": 2.0
                },
                "grid": {"dt": 0.5, "steps": 4}
            }"#,
        )
        .unwrap();
        match cfg.model {
            ModelKind::Looping(spec) => {
                assert_eq!(spec.dim(), 2);
                let from = SubsetLabel::from_mask(0b11, 2).unwrap();
                let to = SubsetLabel::from_mask(0b00, 2).unwrap();
                assert_eq!(spec.rate(&from, &to), 0.25);
            }
            other => panic!("wrong model {other:?}"),
        }
        assert_eq!(cfg.grid.unwrap().points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn parses_nested_subordinators() {
        let spec = subordinator_from_value(
            &serde_json::json!({
                "family": "sum",
                "terms": [
                    {"weight": 0.5, "spec": {"family": "gamma", "beta": 1.0, "eta": 1.0}},
                    {"weight": 1.0, "spec": {"family": "stable", "alpha": 0.5}}
                ]
            }),
        )
        .unwrap();
        match spec {
            SubordinatorSpec::Sum(terms) => assert_eq!(terms.len(), 2),
            other => panic!("wrong spec {other:?}"),
        }

        assert!(subordinator_from_value(&serde_json::json!({"family": "gamma", "beta": 1.0})).is_err());
        assert!(subordinator_from_value(
            &serde_json::json!({"family": "gamma", "beta": 1.0, "eta": 1.0, "oops": 2})
        )
        .is_err());
    }

    #[test]
    fn parses_lfm_and_copula_models() {
        let cfg = parse_config(
            r#"{
                "model": "lfm_one_factor",
                "d": 5,
                "subordinator": {"family": "gamma", "beta": 1.0, "eta": 1.0},
                "trigger_mode": "bernoulli",
                "grid": {"dt": 0.5, "steps": 8},
                "paths": 100
            }"#,
        )
        .unwrap();
        match cfg.model {
            ModelKind::LfmOneFactor { model, mode } => {
                assert_eq!(model.dim(), 5);
                assert_eq!(mode, TriggerMode::Bernoulli);
            }
            other => panic!("wrong model {other:?}"),
        }

        let cfg = parse_config(
            r#"{
                "model": "copula_margins",
                "copula": {"family": "gaussian", "rho": 0.7071067811865476},
                "lambda1": 0.1,
                "lambda2": 0.1
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.model.dim(), 2);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.paths, 1);
    }

    #[test]
    fn grid_document_variants() {
        let cfg = parse_config(
            r#"{"model": "acbve", "eta1": 1.0, "eta2": 1.0, "eta12": 1.0,
                "grid": {"points": [0.0, 1.0, 2.5]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.grid.unwrap().points(), &[0.0, 1.0, 2.5]);

        assert!(parse_config(
            r#"{"model": "acbve", "eta1": 1.0, "eta2": 1.0, "eta12": 1.0,
                "grid": {"points": [0.0, 1.0], "dt": 1.0, "steps": 2}}"#,
        )
        .is_err());
        assert!(parse_config(
            r#"{"model": "acbve", "eta1": 1.0, "eta2": 1.0, "eta12": 1.0, "grid": {"dt": 1.0}}"#,
        )
        .is_err());
    }
}
