//! Looping-default machinery: generator matrices on indicator states, matrix
//! exponentials, the bivariate Freund special case with closed-form
//! transitions and survival, the ACBVE subfamily mapping, and stepwise CTMC
//! path sampling.
//!
//! States of `{0,1}^d` are indexed as documented on
//! [`IndicatorState::matrix_index`]: decreasing alive-mask, so the bivariate
//! rows are ordered `(1,1), (0,1), (1,0), (0,0)`.

use nalgebra::DMatrix;
use rand::Rng;
use std::collections::BTreeMap;

use crate::expm::expm;
use crate::types::{IndicatorPath, IndicatorState, SubsetLabel, TimeGrid};
use crate::{Error, Result};

/// Largest dimension for which dense `2^d × 2^d` matrices are built.
pub const MAX_MATRIX_DIMENSION: usize = 12;

/// Tolerance for generator row sums and transition-row drift.
const ROW_TOLERANCE: f64 = 1e-12;

fn check_matrix_dimension(d: usize) -> Result<()> {
    if d == 0 || d > MAX_MATRIX_DIMENSION {
        return Err(Error::InvalidParameter(format!(
            "indicator-state matrices are limited to 1..={MAX_MATRIX_DIMENSION} components (2^d states), got d={d}"
        )));
    }
    Ok(())
}

/// Pre- and post-default hazard rates of the bivariate looping-default model.
///
/// Company `i` has hazard `lambda_i` while both are alive; after the other
/// company defaults the surviving hazard jumps to `lambda_post_i`. Equality
/// `lambda_post_i = lambda1 + lambda2` is admissible: the singularities of
/// the closed forms are removable and evaluated by their analytic limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreundParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_post1: f64,
    pub lambda_post2: f64,
}

impl FreundParams {
    pub fn new(lambda1: f64, lambda2: f64, lambda_post1: f64, lambda_post2: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda1", lambda1),
            ("lambda2", lambda2),
            ("lambda_post1", lambda_post1),
            ("lambda_post2", lambda_post2),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { lambda1, lambda2, lambda_post1, lambda_post2 })
    }

    /// The ACBVE(η₁, η₂, η₁₂) three-parameter subfamily.
    pub fn from_acbve(eta1: f64, eta2: f64, eta12: f64) -> Result<Self> {
        if !(eta1.is_finite() && eta1 > 0.0) || !(eta2.is_finite() && eta2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ACBVE needs eta1, eta2 > 0, got {eta1}, {eta2}"
            )));
        }
        if !(eta12.is_finite() && eta12 >= 0.0) {
            return Err(Error::InvalidParameter(format!("ACBVE needs eta12 >= 0, got {eta12}")));
        }
        let shared = eta12 / (eta1 + eta2);
        Self::new(
            eta1 + shared * eta1,
            eta2 + shared * eta2,
            eta1 + eta12,
            eta2 + eta12,
        )
    }

    /// The 4×4 generator with rows `(1,1), (0,1), (1,0), (0,0)`:
    ///
    /// ```text
    /// -(λ1+λ2)   λ1      λ2     0
    ///     0     -λ̂2      0     λ̂2
    ///     0       0     -λ̂1    λ̂1
    ///     0       0      0     0
    /// ```
    pub fn generator(&self) -> GeneratorMatrix {
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m[(0, 0)] = -(self.lambda1 + self.lambda2);
        m[(0, 1)] = self.lambda1;
        m[(0, 2)] = self.lambda2;
        m[(1, 1)] = -self.lambda_post2;
        m[(1, 3)] = self.lambda_post2;
        m[(2, 2)] = -self.lambda_post1;
        m[(2, 3)] = self.lambda_post1;
        GeneratorMatrix { m, dim: 2 }
    }

    /// Closed-form `P[t] = exp(tQ)`.
    ///
    /// Entries with the removable singularity at `lambda_post_i = λ1+λ2` are
    /// written in terms of `expm1`, which evaluates the analytic limit
    /// continuously instead of cancelling catastrophically.
    pub fn transition_closed_form(&self, t: f64) -> Result<TransitionMatrix> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
        }
        let s = self.lambda1 + self.lambda2;
        let d1 = s - self.lambda_post1;
        let d2 = s - self.lambda_post2;
        let est = (-s * t).exp();

        let p11_11 = est;
        let p11_01 = self.lambda1 * t * est * expm1_over_x(d2 * t);
        let p11_10 = self.lambda2 * t * est * expm1_over_x(d1 * t);
        let p11_00 = (1.0 - p11_11 - p11_01 - p11_10).max(0.0);
        let p01_01 = (-self.lambda_post2 * t).exp();
        let p10_10 = (-self.lambda_post1 * t).exp();

        let mut m = DMatrix::<f64>::zeros(4, 4);
        m[(0, 0)] = p11_11;
        m[(0, 1)] = p11_01;
        m[(0, 2)] = p11_10;
        m[(0, 3)] = p11_00;
        m[(1, 1)] = p01_01;
        m[(1, 3)] = 1.0 - p01_01;
        m[(2, 2)] = p10_10;
        m[(2, 3)] = 1.0 - p10_10;
        m[(3, 3)] = 1.0;
        Ok(TransitionMatrix { m, dim: 2, t })
    }

    /// Closed-form joint survival `P(τ1 > t1, τ2 > t2)`.
    pub fn survival(&self, t1: f64, t2: f64) -> f64 {
        assert!(t1 >= 0.0 && t2 >= 0.0, "times must be nonnegative");
        let s = self.lambda1 + self.lambda2;
        if t2 >= t1 {
            let gap = t2 - t1;
            let d2 = s - self.lambda_post2;
            (-s * t2).exp() * (1.0 + self.lambda1 * gap * expm1_over_x(d2 * gap))
        } else {
            let gap = t1 - t2;
            let d1 = s - self.lambda_post1;
            (-s * t1).exp() * (1.0 + self.lambda2 * gap * expm1_over_x(d1 * gap))
        }
    }
}

/// `(e^x - 1)/x`, continuous through the removable singularity at 0.
fn expm1_over_x(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// Transition rates of a `d`-dimensional looping-default chain.
///
/// Each entry maps an alive-set `I` to a strictly smaller alive-set `J ⊊ I`
/// with an exponential rate; `|I| - |J| > 1` encodes simultaneous defaults.
/// Unspecified pairs have rate zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopingRateSpec {
    dim: usize,
    rates: BTreeMap<(u32, u32), f64>,
}

impl LoopingRateSpec {
    pub fn new(d: usize, entries: Vec<(SubsetLabel, SubsetLabel, f64)>) -> Result<Self> {
        check_matrix_dimension(d)?;
        let mut rates = BTreeMap::new();
        for (from, to, rate) in entries {
            if from.dim() != d || to.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "rate entry dimensions {}/{} do not match model dimension {d}",
                    from.dim(),
                    to.dim()
                )));
            }
            if !to.is_strict_subset_of(&from) {
                return Err(Error::InvalidParameter(format!(
                    "transition target {:?} must be a strict subset of the alive set {:?}",
                    to.members(),
                    from.members()
                )));
            }
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::InvalidParameter(format!("rates must be nonnegative, got {rate}")));
            }
            if rates.insert((from.mask(), to.mask()), rate).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate rate entry for {:?} -> {:?}",
                    from.members(),
                    to.members()
                )));
            }
        }
        let spec = Self { dim: d, rates };
        spec.check_absorption()?;
        Ok(spec)
    }

    /// Every state reachable from the full alive set must have an exit, so
    /// the chain is absorbed at the empty set almost surely.
    fn check_absorption(&self) -> Result<()> {
        let full = (1u32 << self.dim) - 1;
        let mut stack = vec![full];
        let mut seen = vec![false; (full + 1) as usize];
        seen[full as usize] = true;
        while let Some(state) = stack.pop() {
            if state == 0 {
                continue;
            }
            let mut has_exit = false;
            for (&(from, to), &rate) in self.rates.range((state, 0)..=(state, full)) {
                debug_assert_eq!(from, state);
                if rate > 0.0 {
                    has_exit = true;
                    if !seen[to as usize] {
                        seen[to as usize] = true;
                        stack.push(to);
                    }
                }
            }
            if !has_exit {
                let label = SubsetLabel::from_mask(state, self.dim).unwrap();
                return Err(Error::InvalidParameter(format!(
                    "alive set {:?} is reachable but has no positive exit rate",
                    label.members()
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rate(&self, from: &SubsetLabel, to: &SubsetLabel) -> f64 {
        self.rates.get(&(from.mask(), to.mask())).copied().unwrap_or(0.0)
    }

    /// Assembles the `2^d × 2^d` generator.
    pub fn generator(&self) -> GeneratorMatrix {
        let n = 1usize << self.dim;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (&(from, to), &rate) in &self.rates {
            let i = IndicatorState::from_alive_mask(from, self.dim).unwrap().matrix_index();
            let j = IndicatorState::from_alive_mask(to, self.dim).unwrap().matrix_index();
            m[(i, j)] = rate;
        }
        for i in 0..n {
            let row_sum: f64 = m.row(i).iter().sum();
            m[(i, i)] = -row_sum;
        }
        GeneratorMatrix { m, dim: self.dim }
    }
}

/// Intensity matrix of the indicator chain: off-diagonals nonnegative, rows
/// sum to zero, transitions only shrink the alive set, all-dead row zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    m: DMatrix<f64>,
    dim: usize,
}

impl GeneratorMatrix {
    /// Validates and wraps a raw matrix indexed per
    /// [`IndicatorState::matrix_index`].
    pub fn from_matrix(m: DMatrix<f64>, d: usize) -> Result<Self> {
        check_matrix_dimension(d)?;
        let n = 1usize << d;
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "generator for d={d} must be {n}x{n}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..n {
            let alive_i = IndicatorState::from_matrix_index(i, d).unwrap().alive_mask();
            let mut row_sum = 0.0;
            for j in 0..n {
                let v = m[(i, j)];
                row_sum += v;
                if i == j {
                    continue;
                }
                if v < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "off-diagonal generator entry ({i},{j}) is negative: {v}"
                    )));
                }
                let alive_j = IndicatorState::from_matrix_index(j, d).unwrap().alive_mask();
                let shrinks = alive_j & !alive_i == 0 && alive_j != alive_i;
                if v != 0.0 && !shrinks {
                    return Err(Error::InvalidParameter(format!(
                        "generator entry ({i},{j}) would resurrect components"
                    )));
                }
            }
            if row_sum.abs() > ROW_TOLERANCE {
                return Err(Error::InvalidParameter(format!(
                    "generator row {i} sums to {row_sum}, expected 0"
                )));
            }
        }
        Ok(Self { m, dim: d })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn entry(&self, from: &IndicatorState, to: &IndicatorState) -> f64 {
        self.m[(from.matrix_index(), to.matrix_index())]
    }

    /// `P[t] = exp(tQ)`.
    ///
    /// Structural zeros (resurrection entries) and negative round-off are
    /// cleaned up, and rows are renormalized, all within a `1e-12` slack;
    /// larger drift is reported as a numerical failure.
    pub fn transition(&self, t: f64) -> Result<TransitionMatrix> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
        }
        let mut p = expm(&(&self.m * t))?;
        let n = p.nrows();
        for i in 0..n {
            let alive_i = IndicatorState::from_matrix_index(i, self.dim).unwrap().alive_mask();
            for j in 0..n {
                let alive_j = IndicatorState::from_matrix_index(j, self.dim).unwrap().alive_mask();
                let allowed = alive_j & !alive_i == 0;
                let v = p[(i, j)];
                if !allowed || v < 0.0 {
                    if v.abs() > ROW_TOLERANCE {
                        return Err(Error::Numerical(format!(
                            "transition entry ({i},{j}) = {v} violates monotonicity/positivity beyond tolerance"
                        )));
                    }
                    p[(i, j)] = 0.0;
                }
            }
            let row_sum: f64 = p.row(i).iter().sum();
            if (row_sum - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::Numerical(format!(
                    "transition row {i} sums to {row_sum}, drift exceeds tolerance"
                )));
            }
            for j in 0..n {
                p[(i, j)] /= row_sum;
            }
        }
        Ok(TransitionMatrix { m: p, dim: self.dim, t })
    }
}

/// A stochastic transition matrix `P[t]` on indicator states.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    m: DMatrix<f64>,
    dim: usize,
    t: f64,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn entry(&self, from: &IndicatorState, to: &IndicatorState) -> f64 {
        self.m[(from.matrix_index(), to.matrix_index())]
    }

    /// Samples the successor state of `from` from its transition row.
    pub fn sample_next<R: Rng + ?Sized>(&self, from: &IndicatorState, rng: &mut R) -> IndicatorState {
        let i = from.matrix_index();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_positive = i;
        for j in 0..self.m.ncols() {
            let p = self.m[(i, j)];
            if p > 0.0 {
                acc += p;
                last_positive = j;
                if u < acc {
                    return IndicatorState::from_matrix_index(j, self.dim).unwrap();
                }
            }
        }
        IndicatorState::from_matrix_index(last_positive, self.dim).unwrap()
    }
}

/// Stepwise CTMC sampling of an indicator path on an equidistant grid
/// starting at 0, from the all-alive state. `P[Δ]` is computed once.
pub fn sample_ctmc_path<R: Rng + ?Sized>(
    q: &GeneratorMatrix,
    grid: &TimeGrid,
    rng: &mut R,
) -> Result<IndicatorPath> {
    let dt = grid.equal_step()?;
    let p = q.transition(dt)?;
    sample_ctmc_path_with(&p, IndicatorState::all_alive(q.dim())?, grid, rng)
}

/// Stepwise sampling given a precomputed `P[Δ]` and an explicit start state;
/// the absorbing all-dead state short-circuits.
pub fn sample_ctmc_path_with<R: Rng + ?Sized>(
    p: &TransitionMatrix,
    start: IndicatorState,
    grid: &TimeGrid,
    rng: &mut R,
) -> Result<IndicatorPath> {
    if !grid.starts_at_zero() {
        return Err(Error::InvalidParameter("CTMC sampling grid must start at 0".into()));
    }
    let dt = grid.equal_step()?;
    if (dt - p.time()).abs() > 1e-9 * dt.max(1.0) {
        return Err(Error::DimensionMismatch(format!(
            "grid step {dt} does not match transition horizon {}",
            p.time()
        )));
    }
    if start.dim() != p.dim() {
        return Err(Error::DimensionMismatch("start state dimension mismatch".into()));
    }
    let mut states = Vec::with_capacity(grid.len());
    let mut current = start;
    states.push(current);
    for _ in 1..grid.len() {
        if !current.is_all_dead() {
            let next = p.sample_next(&current, rng);
            debug_assert!(current.dominates(&next), "resurrection in sampled CTMC path");
            current = next;
        }
        states.push(current);
    }
    IndicatorPath::new(grid.clone(), states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expm::tests::expm_taylor;
    use crate::rng::RandomStream;
    use rand::Rng;

    fn freund_1133() -> FreundParams {
        FreundParams::new(1.0, 1.0, 3.0, 3.0).unwrap()
    }

    fn subset(members: &[usize], d: usize) -> SubsetLabel {
        SubsetLabel::new(members, d).unwrap()
    }

    #[test]
    fn freund_generator_matches_display() {
        let q = freund_1133().generator();
        let expected = [
            [-2.0, 1.0, 1.0, 0.0],
            [0.0, -3.0, 0.0, 3.0],
            [0.0, 0.0, -3.0, 3.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(q.matrix()[(i, j)], expected[i][j], "({i},{j})");
            }
        }
    }

    #[test]
    fn freund_generator_row_sums_vanish_and_no_direct_joint_default() {
        let mut rng = RandomStream::new(2, 0);
        for _ in 0..20 {
            let p = FreundParams::new(
                rng.random::<f64>() * 3.0 + 0.01,
                rng.random::<f64>() * 3.0 + 0.01,
                rng.random::<f64>() * 3.0 + 0.01,
                rng.random::<f64>() * 3.0 + 0.01,
            )
            .unwrap();
            let q = p.generator();
            for i in 0..4 {
                assert!(q.matrix().row(i).iter().sum::<f64>().abs() < 1e-12);
            }
            // no direct (1,1) -> (0,0) transition
            assert_eq!(q.matrix()[(0, 3)], 0.0);
        }
    }

    #[test]
    fn looping_generator_mirrors_freund() {
        let p = freund_1133();
        let spec = LoopingRateSpec::new(
            2,
            vec![
                (subset(&[1, 2], 2), subset(&[2], 2), p.lambda1),
                (subset(&[1, 2], 2), subset(&[1], 2), p.lambda2),
                (subset(&[2], 2), subset(&[], 2), p.lambda_post2),
                (subset(&[1], 2), subset(&[], 2), p.lambda_post1),
            ],
        )
        .unwrap();
        assert_eq!(spec.generator().matrix(), p.generator().matrix());
    }

    #[test]
    fn looping_generator_single_default_rates() {
        // rate 1 for every single-default transition: diagonal is -|alive set|
        let d = 3;
        let mut entries = Vec::new();
        for mask in 1u32..(1 << d) {
            let from = SubsetLabel::from_mask(mask, d).unwrap();
            for k in from.members() {
                let to_mask = mask & !(1 << (k - 1));
                entries.push((from, SubsetLabel::from_mask(to_mask, d).unwrap(), 1.0));
            }
        }
        let q = LoopingRateSpec::new(d, entries).unwrap().generator();
        for i in 0..q.size() {
            let alive = IndicatorState::from_matrix_index(i, d).unwrap().num_alive();
            assert_eq!(q.matrix()[(i, i)], -(alive as f64));
        }
    }

    #[test]
    fn looping_generator_joint_default_entry() {
        let r = 0.4;
        let spec = LoopingRateSpec::new(
            2,
            vec![
                (subset(&[1, 2], 2), subset(&[2], 2), 1.0),
                (subset(&[1, 2], 2), subset(&[1], 2), 1.0),
                (subset(&[1, 2], 2), subset(&[], 2), r),
                (subset(&[2], 2), subset(&[], 2), 1.0),
                (subset(&[1], 2), subset(&[], 2), 1.0),
            ],
        )
        .unwrap();
        // entry Q[1,4] in 1-based indexing
        assert_eq!(spec.generator().matrix()[(0, 3)], r);
    }

    #[test]
    fn looping_spec_rejections() {
        // target not a subset
        assert!(LoopingRateSpec::new(
            2,
            vec![(subset(&[1], 2), subset(&[2], 2), 1.0)]
        )
        .is_err());
        // target equal to source
        assert!(LoopingRateSpec::new(
            2,
            vec![(subset(&[1, 2], 2), subset(&[1, 2], 2), 1.0)]
        )
        .is_err());
        // dead end: {1} reachable but has no exit
        assert!(LoopingRateSpec::new(
            2,
            vec![
                (subset(&[1, 2], 2), subset(&[1], 2), 1.0),
                (subset(&[1, 2], 2), subset(&[2], 2), 1.0),
                (subset(&[2], 2), subset(&[], 2), 1.0),
            ]
        )
        .is_err());
        // dimension guard
        assert!(LoopingRateSpec::new(13, vec![]).is_err());
    }

    #[test]
    fn transition_matrix_at_zero_is_identity() {
        let q = freund_1133().generator();
        let p = q.transition(0.0).unwrap();
        assert_eq!(p.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn transition_matrix_survival_entry() {
        let q = freund_1133().generator();
        let p = q.transition(1.0).unwrap();
        let all = IndicatorState::all_alive(2).unwrap();
        assert!((p.entry(&all, &all) - (-2.0f64).exp()).abs() < 1e-13);
    }

    fn random_looping_spec(d: usize, rng: &mut RandomStream) -> LoopingRateSpec {
        // single defaults always present (guarantees absorption), plus a few
        // random multi-default entries
        let mut entries = Vec::new();
        for mask in 1u32..(1 << d) {
            let from = SubsetLabel::from_mask(mask, d).unwrap();
            for k in from.members() {
                let to_mask = mask & !(1 << (k - 1));
                entries.push((
                    from,
                    SubsetLabel::from_mask(to_mask, d).unwrap(),
                    rng.random::<f64>() * 2.0 + 0.05,
                ));
            }
            if from.len() >= 2 && rng.random::<f64>() < 0.5 {
                entries.push((from, SubsetLabel::empty(d).unwrap(), rng.random::<f64>()));
            }
        }
        LoopingRateSpec::new(d, entries).unwrap()
    }

    #[test]
    fn transition_matrix_matches_taylor_oracle() {
        let mut rng = RandomStream::new(31, 0);
        let spec = random_looping_spec(3, &mut rng);
        let q = spec.generator();
        let p = q.transition(0.7).unwrap();
        let oracle = expm_taylor(&(q.matrix() * 0.7));
        let max_diff = (p.matrix() - &oracle)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-10, "max diff {max_diff}");
    }

    #[test]
    fn closed_form_examples() {
        let p = freund_1133();
        let m = p.transition_closed_form(1.0).unwrap();
        let s11 = IndicatorState::new(&[1, 1]).unwrap();
        let s01 = IndicatorState::new(&[0, 1]).unwrap();
        let want = (-3.0f64).exp() * (1.0 / (2.0 - 3.0)) - (-2.0f64).exp() * (1.0 / (2.0 - 3.0));
        assert!((m.entry(&s11, &s01) - want).abs() < 1e-15);
        assert!((m.entry(&s11, &s01) - ((-2.0f64).exp() - (-3.0f64).exp())).abs() < 1e-15);
        assert!((m.entry(&s01, &s01) - (-3.0f64).exp()).abs() < 1e-15);

        let id = p.transition_closed_form(0.0).unwrap();
        assert_eq!(id.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn closed_form_handles_removable_singularity() {
        // lambda_post2 = lambda1 + lambda2 = 2: limit entry λ1 t e^{-2t}
        let p = FreundParams::new(1.0, 1.0, 3.0, 2.0).unwrap();
        let m = p.transition_closed_form(1.0).unwrap();
        let s11 = IndicatorState::new(&[1, 1]).unwrap();
        let s01 = IndicatorState::new(&[0, 1]).unwrap();
        assert!((m.entry(&s11, &s01) - (-2.0f64).exp()).abs() < 1e-14);

        let via_expm = p.generator().transition(1.0).unwrap();
        let max_diff = (m.matrix() - via_expm.matrix())
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-10, "max diff {max_diff}");
    }

    #[test]
    fn closed_form_equals_pade_over_parameter_grid() {
        let mut rng = RandomStream::new(5, 0);
        for trial in 0..20 {
            let base: f64 = rng.random::<f64>() * 2.0 + 0.05;
            let p = FreundParams::new(
                base,
                rng.random::<f64>() * 2.0 + 0.05,
                rng.random::<f64>() * 4.0 + 0.05,
                rng.random::<f64>() * 4.0 + 0.05,
            )
            .unwrap();
            for t in [0.1, 0.5, 1.0, 5.0] {
                let a = p.transition_closed_form(t).unwrap();
                let b = p.generator().transition(t).unwrap();
                let diff = (a.matrix() - b.matrix()).iter().map(|v| v.abs()).fold(0.0, f64::max);
                assert!(diff < 1e-10, "trial {trial}, t={t}: {diff}");
            }
        }
    }

    #[test]
    fn survival_examples() {
        let mut rng = RandomStream::new(8, 0);
        // equal horizons: e^{-(λ1+λ2)t} regardless of post-default rates
        for _ in 0..10 {
            let p = FreundParams::new(
                rng.random::<f64>() + 0.05,
                rng.random::<f64>() + 0.05,
                rng.random::<f64>() * 5.0 + 0.05,
                rng.random::<f64>() * 5.0 + 0.05,
            )
            .unwrap();
            let t = rng.random::<f64>() * 3.0;
            let want = (-(p.lambda1 + p.lambda2) * t).exp();
            assert!((p.survival(t, t) - want).abs() < 1e-15);
        }

        // contagion-free case factorizes
        let p = FreundParams::new(0.7, 1.1, 0.7, 1.1).unwrap();
        for (t1, t2) in [(0.3, 1.4), (2.0, 0.2), (1.0, 1.0)] {
            let want = (-0.7 * t1 - 1.1f64 * t2).exp();
            assert!((p.survival(t1, t2) - want).abs() < 1e-14);
        }

        // Chapman-Kolmogorov oracle from the closed-form matrix
        let p = freund_1133();
        let (t1, t2) = (0.5, 1.0);
        let m = p.transition_closed_form(t2 - t1).unwrap();
        let s11 = IndicatorState::new(&[1, 1]).unwrap();
        let s01 = IndicatorState::new(&[0, 1]).unwrap();
        let first = p.transition_closed_form(t1).unwrap().entry(&s11, &s11);
        let oracle = first * (m.entry(&s11, &s11) + m.entry(&s11, &s01));
        assert!((p.survival(t1, t2) - oracle).abs() < 1e-12);
    }

    #[test]
    fn survival_is_monotone_and_one_at_origin() {
        let p = FreundParams::new(0.8, 1.3, 2.5, 0.4).unwrap();
        assert_eq!(p.survival(0.0, 0.0), 1.0);
        let mut prev = 1.0;
        for i in 1..=20 {
            let t = i as f64 * 0.3;
            let v = p.survival(t, 1.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn acbve_mapping() {
        let p = FreundParams::from_acbve(1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            (p.lambda1, p.lambda2, p.lambda_post1, p.lambda_post2),
            (1.5, 1.5, 2.0, 2.0)
        );

        let p = FreundParams::from_acbve(0.6, 1.7, 0.0).unwrap();
        assert_eq!(
            (p.lambda1, p.lambda2, p.lambda_post1, p.lambda_post2),
            (0.6, 1.7, 0.6, 1.7)
        );

        let p = FreundParams::from_acbve(2.0, 1.0, 3.0).unwrap();
        assert_eq!(
            (p.lambda1, p.lambda2, p.lambda_post1, p.lambda_post2),
            (4.0, 2.0, 5.0, 4.0)
        );
    }

    #[test]
    fn semigroup_property_on_random_generators() {
        let mut rng = RandomStream::new(77, 0);
        for d in [2usize, 3, 4] {
            for _ in 0..3 {
                let q = random_looping_spec(d, &mut rng).generator();
                let (s, t) = (0.4, 0.9);
                let ps = q.transition(s).unwrap();
                let pt = q.transition(t).unwrap();
                let pst = q.transition(s + t).unwrap();
                let prod = ps.matrix() * pt.matrix();
                let diff = (&prod - pst.matrix()).iter().map(|v| v.abs()).fold(0.0, f64::max);
                assert!(diff < 1e-10, "d={d}: {diff}");
            }
        }
    }

    #[test]
    fn single_step_state_distribution_matches_transition_row() {
        let p = freund_1133();
        let q = p.generator();
        let dt = 0.5;
        let pm = q.transition(dt).unwrap();
        let grid = TimeGrid::uniform(0.0, dt, 1).unwrap();
        let mut rng = RandomStream::new(9, 0);
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let path = sample_ctmc_path_with(&pm, IndicatorState::all_alive(2).unwrap(), &grid, &mut rng).unwrap();
            counts[path.state_at(1).matrix_index()] += 1;
        }
        for j in 0..4 {
            let want = pm.matrix()[(0, j)];
            let got = counts[j] as f64 / n as f64;
            let se = (want * (1.0 - want) / n as f64).sqrt().max(1e-9);
            assert!((got - want).abs() < 4.0 * se, "state {j}: got {got}, want {want}");
        }
    }

    #[test]
    fn all_dead_start_is_absorbing() {
        let q = freund_1133().generator();
        let p = q.transition(0.5).unwrap();
        let grid = TimeGrid::uniform(0.0, 0.5, 6).unwrap();
        let mut rng = RandomStream::new(10, 0);
        let path =
            sample_ctmc_path_with(&p, IndicatorState::all_dead(2).unwrap(), &grid, &mut rng).unwrap();
        assert!(path.states().iter().all(|s| s.is_all_dead()));
    }

    #[test]
    fn two_half_steps_match_one_full_step_in_distribution() {
        let p = freund_1133();
        let q = p.generator();
        let dt = 0.6;
        let n = 200_000;

        let mut rng = RandomStream::new(12, 0);
        let grid2 = TimeGrid::uniform(0.0, dt, 2).unwrap();
        let pm2 = q.transition(dt).unwrap();
        let mut counts2 = [0usize; 4];
        for _ in 0..n {
            let path = sample_ctmc_path_with(&pm2, IndicatorState::all_alive(2).unwrap(), &grid2, &mut rng).unwrap();
            counts2[path.state_at(2).matrix_index()] += 1;
        }

        let grid1 = TimeGrid::uniform(0.0, 2.0 * dt, 1).unwrap();
        let pm1 = q.transition(2.0 * dt).unwrap();
        let mut counts1 = [0usize; 4];
        for _ in 0..n {
            let path = sample_ctmc_path_with(&pm1, IndicatorState::all_alive(2).unwrap(), &grid1, &mut rng).unwrap();
            counts1[path.state_at(1).matrix_index()] += 1;
        }

        for j in 0..4 {
            let (p1, p2) = (counts1[j] as f64 / n as f64, counts2[j] as f64 / n as f64);
            let se = ((p1 * (1.0 - p1) + p2 * (1.0 - p2)) / n as f64).sqrt().max(1e-9);
            assert!((p1 - p2).abs() < 4.0 * se, "state {j}: {p1} vs {p2}");
        }
    }

    #[test]
    fn sampled_paths_are_monotone() {
        let mut rng = RandomStream::new(13, 0);
        let spec = random_looping_spec(4, &mut rng);
        let q = spec.generator();
        let grid = TimeGrid::uniform(0.0, 0.25, 12).unwrap();
        let p = q.transition(0.25).unwrap();
        for _ in 0..500 {
            // IndicatorPath::new re-checks monotonicity internally
            let path = sample_ctmc_path_with(&p, IndicatorState::all_alive(4).unwrap(), &grid, &mut rng).unwrap();
            for w in path.states().windows(2) {
                assert!(w[0].dominates(&w[1]));
            }
        }
    }

    #[test]
    fn generator_validation_rejects_bad_matrices() {
        // resurrection entry
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m[(3, 0)] = 1.0;
        m[(3, 3)] = -1.0;
        assert!(GeneratorMatrix::from_matrix(m, 2).is_err());

        // row sum violation
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m[(0, 1)] = 1.0;
        assert!(GeneratorMatrix::from_matrix(m, 2).is_err());
    }
}
