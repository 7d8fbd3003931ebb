//! Shared domain types: time grids, subset/indicator encoding, default-time
//! vectors and indicator paths.
//!
//! Conventions used throughout the crate:
//!
//! * indicator bit 1 means *alive*; a component is alive at `t` iff `τ > t`
//!   (strict inequality);
//! * indicator paths are componentwise nonincreasing (no resurrection);
//! * a default time strictly beyond the simulation horizon is represented by
//!   the sentinel [`BEYOND_HORIZON`] (`f64::INFINITY`), serialized as `"inf"`.

use crate::{Error, Result};

/// Sentinel default time for components that survive past the horizon.
pub const BEYOND_HORIZON: f64 = f64::INFINITY;

/// Largest dimension supported by the bitmask-based subset and state types.
pub const MAX_DIMENSION: usize = 25;

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::InvalidParameter(format!(
            "dimension must be in 1..={MAX_DIMENSION}, got {d}"
        )));
    }
    Ok(())
}

/// Strictly increasing finite list of nonnegative times (years).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("time grid must be nonempty".into()));
        }
        for (i, &p) in points.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "grid point {i} must be finite and nonnegative, got {p}"
                )));
            }
            if i > 0 && p <= points[i - 1] {
                return Err(Error::InvalidParameter(format!(
                    "grid must be strictly increasing, violated at index {i}"
                )));
            }
        }
        Ok(Self { points })
    }

    /// Equidistant grid `t0, t0 + dt, …, t0 + steps*dt`.
    pub fn uniform(t0: f64, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("grid step must be positive, got {dt}")));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("grid needs at least one step".into()));
        }
        Self::new((0..=steps).map(|i| t0 + i as f64 * dt).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn starts_at_zero(&self) -> bool {
        self.points[0] == 0.0
    }

    /// The common step size, if the grid is (numerically) equidistant.
    pub fn equal_step(&self) -> Result<f64> {
        if self.points.len() < 2 {
            return Err(Error::InvalidParameter("grid has no step".into()));
        }
        let dt = self.points[1] - self.points[0];
        for w in self.points.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::InvalidParameter(
                    "grid is not equidistant".into(),
                ));
            }
        }
        Ok(dt)
    }
}

/// A subset of the component index set `{1, …, d}`.
///
/// Stored as a bitmask with component `k` on bit `k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetLabel {
    mask: u32,
    dim: u8,
}

impl SubsetLabel {
    /// Builds a subset from 1-based member indices.
    pub fn new(members: &[usize], d: usize) -> Result<Self> {
        check_dimension(d)?;
        let mut mask = 0u32;
        for &k in members {
            if k == 0 || k > d {
                return Err(Error::InvalidParameter(format!(
                    "member {k} outside 1..={d}"
                )));
            }
            mask |= 1 << (k - 1);
        }
        Ok(Self { mask, dim: d as u8 })
    }

    pub fn from_mask(mask: u32, d: usize) -> Result<Self> {
        check_dimension(d)?;
        if mask >= (1u32 << d) {
            return Err(Error::InvalidParameter(format!(
                "bitmask {mask:#b} has bits beyond dimension {d}"
            )));
        }
        Ok(Self { mask, dim: d as u8 })
    }

    pub fn empty(d: usize) -> Result<Self> {
        Self::from_mask(0, d)
    }

    pub fn full(d: usize) -> Result<Self> {
        check_dimension(d)?;
        Ok(Self { mask: (1u32 << d) - 1, dim: d as u8 })
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    /// 1-based member indices in increasing order.
    pub fn members(&self) -> Vec<usize> {
        (1..=self.dim()).filter(|&k| self.contains(k)).collect()
    }

    /// Membership test for the 1-based component index `k`.
    pub fn contains(&self, k: usize) -> bool {
        k >= 1 && k <= self.dim() && self.mask & (1 << (k - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &SubsetLabel) -> bool {
        self.dim == other.dim && self.mask & !other.mask == 0
    }

    pub fn is_strict_subset_of(&self, other: &SubsetLabel) -> bool {
        self.is_subset_of(other) && self.mask != other.mask
    }

    /// The bijection `h(I) = (1{1∈I}, …, 1{d∈I})` onto indicator states.
    pub fn indicator(&self) -> IndicatorState {
        IndicatorState { alive: self.mask, dim: self.dim }
    }
}

/// A point of the survival-indicator process: one alive/dead bit per component.
///
/// Bit 1 means alive (`τ_k > t`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndicatorState {
    alive: u32,
    dim: u8,
}

impl IndicatorState {
    /// Builds a state from bits, component 1 first.
    pub fn new(bits: &[u8]) -> Result<Self> {
        check_dimension(bits.len())?;
        let mut alive = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => alive |= 1 << i,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "indicator bit must be 0 or 1, got {b}"
                    )))
                }
            }
        }
        Ok(Self { alive, dim: bits.len() as u8 })
    }

    pub fn from_alive_mask(mask: u32, d: usize) -> Result<Self> {
        Ok(SubsetLabel::from_mask(mask, d)?.indicator())
    }

    pub fn all_alive(d: usize) -> Result<Self> {
        Ok(SubsetLabel::full(d)?.indicator())
    }

    pub fn all_dead(d: usize) -> Result<Self> {
        Ok(SubsetLabel::empty(d)?.indicator())
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn alive_mask(&self) -> u32 {
        self.alive
    }

    /// Whether the 1-based component `k` is alive.
    pub fn is_alive(&self, k: usize) -> bool {
        self.alive & (1 << (k - 1)) != 0
    }

    pub fn num_alive(&self) -> usize {
        self.alive.count_ones() as usize
    }

    pub fn is_all_dead(&self) -> bool {
        self.alive == 0
    }

    /// Bits as a vector, component 1 first.
    pub fn bits(&self) -> Vec<u8> {
        (1..=self.dim()).map(|k| self.is_alive(k) as u8).collect()
    }

    /// Bit string with component 1 leftmost, e.g. `"10"` for `(1,0)`.
    pub fn bit_string(&self) -> String {
        (1..=self.dim()).map(|k| if self.is_alive(k) { '1' } else { '0' }).collect()
    }

    /// Inverse of the bijection `h`: the set of alive components.
    pub fn alive_subset(&self) -> SubsetLabel {
        SubsetLabel { mask: self.alive, dim: self.dim }
    }

    /// Componentwise `self ≥ other` (no component dead here is alive there).
    pub fn dominates(&self, other: &IndicatorState) -> bool {
        self.dim == other.dim && other.alive & !self.alive == 0
    }

    /// Row/column index of this state in generator and transition matrices.
    ///
    /// States are ordered by decreasing alive-mask, i.e. the index is the
    /// integer whose binary digits are the *dead* flags (component 1 on the
    /// least significant bit). For `d = 2` this yields the order
    /// `(1,1), (0,1), (1,0), (0,0)` for rows 1–4, the layout used by the
    /// bivariate looping-default generator.
    pub fn matrix_index(&self) -> usize {
        (((1u32 << self.dim) - 1) ^ self.alive) as usize
    }

    pub fn from_matrix_index(index: usize, d: usize) -> Result<Self> {
        check_dimension(d)?;
        let full = (1u32 << d) - 1;
        if index as u32 > full {
            return Err(Error::InvalidParameter(format!(
                "matrix index {index} out of range for dimension {d}"
            )));
        }
        Ok(Self { alive: full ^ index as u32, dim: d as u8 })
    }
}

/// A vector of `d` default times; entries are positive or [`BEYOND_HORIZON`].
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultTimeVector {
    taus: Vec<f64>,
}

impl DefaultTimeVector {
    pub fn new(taus: Vec<f64>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidParameter("default-time vector must be nonempty".into()));
        }
        for (i, &t) in taus.iter().enumerate() {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "default time {i} must be positive or the beyond-horizon sentinel, got {t}"
                )));
            }
        }
        Ok(Self { taus })
    }

    pub fn dim(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Indicator state at time `t`: component `k` alive iff `τ_k > t`.
    pub fn indicator_at(&self, t: f64) -> IndicatorState {
        let mut alive = 0u32;
        for (i, &tau) in self.taus.iter().enumerate() {
            if tau > t {
                alive |= 1 << i;
            }
        }
        IndicatorState { alive, dim: self.taus.len() as u8 }
    }
}

/// A sampled indicator path on a time grid, componentwise nonincreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPath {
    grid: TimeGrid,
    states: Vec<IndicatorState>,
}

impl IndicatorPath {
    pub fn new(grid: TimeGrid, states: Vec<IndicatorState>) -> Result<Self> {
        if states.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} states for {} grid points",
                states.len(),
                grid.len()
            )));
        }
        let d = states[0].dim;
        for w in states.windows(2) {
            if w[0].dim != d || w[1].dim != d {
                return Err(Error::DimensionMismatch("states of unequal dimension".into()));
            }
            if !w[0].dominates(&w[1]) {
                return Err(Error::InvalidParameter(
                    "indicator path must be componentwise nonincreasing".into(),
                ));
            }
        }
        Ok(Self { grid, states })
    }

    /// Discretizes default times on a grid: bit `k` at grid point `t` is
    /// `1{τ_k > t}`.
    pub fn from_default_times(taus: &DefaultTimeVector, grid: TimeGrid) -> Self {
        let states = grid.points().iter().map(|&t| taus.indicator_at(t)).collect();
        Self { grid, states }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn states(&self) -> &[IndicatorState] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// State at the `i`-th grid point.
    pub fn state_at(&self, i: usize) -> IndicatorState {
        self.states[i]
    }
}
