//! Factored plane-wave states and their piecewise assemblies.
//!
//! A label `(p_re, p_im, E)` stands for the product
//! `e^{-p_re·q_re/(iħ)} · e^{-p_im·q_im/(iħ)} · e^{E·t/(iħ)}` with a real
//! `p_re` and an imaginary `p_im`. On the imaginary axis `q_im = i·x`, so the
//! second factor has the real exponent product `p_im·q_im` divided by `iħ`:
//! it is a unit-modulus oscillation in `x`, not a growing or decaying one.
//!
//! States are delta-normalised and never L²-normalised; everything here is
//! compared pointwise or through residuals.
//!
//! Tunneling momenta use `√(2m(E0 - barrier))` throughout, which keeps
//! momentum units and gives `E_T = p²/2m = E0 - W0` inside a temporal
//! barrier. (The unit-amplitude formulas for the barrier momentum are
//! sometimes written without the `2m` factor; that form is not dimensionally a
//! momentum and is not used.)
//!
//! Along a state's own axis a region carries `A·e^{ikq} + B·e^{-ikq}` with
//! `ħk = p_re + p_im`, i.e. the sign convention `e^{-p·q/(iħ)}` for the
//! forward wave. In [`Mode::Literal`] `A = 1, B = 0` everywhere; in
//! [`Mode::Matched`] the amplitudes come from the transfer matrix and `ψ`,
//! `ψ'` are continuous at every boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Axis, GridSpec, StateVector, Units};
use crate::black_hole::BlackHoleModel;
use crate::spatial_tunneling::{transmission_reflection, tunneling_momentum, PiecewisePotential, ScatterError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative boundary mismatch accepted for a matched state.
pub const MATCH_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("p_re must be real, got {0}")]
    ImaginaryRealMomentum(Complex64),
    #[error("p_im must be imaginary, got {0}")]
    RealImaginaryMomentum(Complex64),
    #[error("label entries must be finite")]
    NonFiniteLabel,
    #[error("interval bounds must satisfy lo < hi (got {lo} and {hi})")]
    BadInterval { lo: f64, hi: f64 },
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("boundary matching along the time axis is not defined")]
    TemporalMatching,
    #[error("regions must tile the axis without gaps or overlaps")]
    BadTiling,
    #[error("position-dependent regions cannot be amplitude-matched")]
    LocalRegion,
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveLabel {
    pub p_re: Complex64,
    pub p_im: Complex64,
    pub energy: Complex64,
}

impl PlaneWaveLabel {
    pub fn new(p_re: Complex64, p_im: Complex64, energy: Complex64) -> Result<Self, StateError> {
        let label = Self { p_re, p_im, energy };
        label.validate()?;
        Ok(label)
    }

    pub fn real(p_re: f64, energy: f64) -> Self {
        Self {
            p_re: Complex64::new(p_re, 0.0),
            p_im: ZERO,
            energy: Complex64::new(energy, 0.0),
        }
    }

    /// Places a momentum in the real or the imaginary slot by its nature.
    ///
    /// Tunneling momenta come from a principal square root of a real number,
    /// so they are exactly real or exactly imaginary.
    pub fn from_momentum(p: Complex64, energy: f64) -> Self {
        let energy = Complex64::new(energy, 0.0);
        if p.im == 0.0 {
            Self { p_re: p, p_im: ZERO, energy }
        } else {
            Self { p_re: ZERO, p_im: p, energy }
        }
    }

    pub fn validate(&self) -> Result<(), StateError> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !(finite(self.p_re) && finite(self.p_im) && finite(self.energy)) {
            return Err(StateError::NonFiniteLabel);
        }
        if self.p_re.im != 0.0 {
            return Err(StateError::ImaginaryRealMomentum(self.p_re));
        }
        if self.p_im.re != 0.0 {
            return Err(StateError::RealImaginaryMomentum(self.p_im));
        }
        Ok(())
    }

    /// Momentum governing the dependence along the state's own axis.
    pub fn axial_momentum(&self) -> Complex64 {
        self.p_re + self.p_im
    }

    /// `p_re² + p_im²` (the imaginary slot contributes a negative square).
    pub fn momentum_squared(&self) -> Complex64 {
        self.p_re * self.p_re + self.p_im * self.p_im
    }
}

/// Sign in front of the momentum exponents of [`plane_wave`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSign {
    /// `e^{-p·q/(iħ)}`, the form used for the tunneling states.
    #[default]
    Minus,
    /// `e^{+p·q/(iħ)}`
    Plus,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProductGrid {
    pub q_re: Option<GridSpec>,
    pub x_im: Option<GridSpec>,
    pub t: Option<GridSpec>,
}

/// Samples on the product of the present axes, row-major in `(q_re, x_im, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSamples {
    pub shape: Vec<usize>,
    pub values: Vec<Complex64>,
}

fn axis_points(grid: &Option<GridSpec>, axis: Axis) -> Result<Vec<f64>, StateError> {
    match grid {
        None => Ok(vec![0.0]),
        Some(g) if g.axis == axis => Ok(g.points()),
        Some(g) => Err(StateError::Algebra(AlgebraError::AxisMismatch {
            kind: match axis {
                Axis::QRe => crate::algebra::OperatorKind::PositionRe,
                Axis::XIm => crate::algebra::OperatorKind::PositionIm,
                Axis::T => crate::algebra::OperatorKind::Time,
            },
            expected: axis,
            found: g.axis,
        })),
    }
}

pub fn plane_wave(
    label: &PlaneWaveLabel,
    grids: &ProductGrid,
    units: &Units,
    sign: PhaseSign,
) -> Result<ProductSamples, StateError> {
    label.validate()?;
    units.validate()?;
    let ihbar = I * units.hbar;
    let s = match sign {
        PhaseSign::Minus => -1.0,
        PhaseSign::Plus => 1.0,
    };
    let qs = axis_points(&grids.q_re, Axis::QRe)?;
    let xs = axis_points(&grids.x_im, Axis::XIm)?;
    let ts = axis_points(&grids.t, Axis::T)?;
    let mut values = Vec::with_capacity(qs.len() * xs.len() * ts.len());
    for &q in &qs {
        for &x in &xs {
            for &t in &ts {
                let q_im = I * x;
                let exponent = (label.p_re * q * s + label.p_im * q_im * s + label.energy * t) / ihbar;
                values.push(exponent.exp());
            }
        }
    }
    let shape = [(&grids.q_re, qs.len()), (&grids.x_im, xs.len()), (&grids.t, ts.len())]
        .iter()
        .filter(|(g, _)| g.is_some())
        .map(|(_, n)| *n)
        .collect();
    Ok(ProductSamples { shape, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateAxis {
    QRe,
    RRe,
    T,
}

impl StateAxis {
    pub fn is_spatial(self) -> bool {
        !matches!(self, StateAxis::T)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Literal,
    Matched,
}

/// Position-dependent momentum of the region outside a black hole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMomentum {
    pub model: BlackHoleModel,
    pub p0_re: f64,
}

impl LocalMomentum {
    pub fn label_at(&self, r: f64) -> PlaneWaveLabel {
        let p = self.model.escape_momentum(r, self.p0_re).value;
        PlaneWaveLabel::from_momentum(p, self.model.kinetic_energy(self.p0_re))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
    pub label: PlaneWaveLabel,
    pub amp_fwd: Complex64,
    pub amp_bwd: Complex64,
    /// Set when the momentum varies across the region; `label` then holds
    /// its value at `lo`.
    pub local: Option<LocalMomentum>,
}

impl Region {
    pub fn new(lo: f64, hi: f64, label: PlaneWaveLabel) -> Result<Self, StateError> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(StateError::BadInterval { lo, hi });
        }
        label.validate()?;
        Ok(Self {
            lo,
            hi,
            label,
            amp_fwd: ONE,
            amp_bwd: ZERO,
            local: None,
        })
    }

    pub fn contains(&self, q: f64) -> bool {
        self.lo <= q && q < self.hi
    }

    pub fn label_at(&self, q: f64) -> PlaneWaveLabel {
        match &self.local {
            Some(local) => local.label_at(q),
            None => self.label,
        }
    }

    /// `(ψ, ψ')` of the region's wave at `q` (extended past its bounds).
    pub fn evaluate(&self, q: f64, units: &Units) -> (Complex64, Complex64) {
        match &self.local {
            None => {
                let k = self.label.axial_momentum() / units.hbar;
                if k == ZERO {
                    (self.amp_fwd + self.amp_bwd * q, self.amp_bwd)
                } else {
                    let f = self.amp_fwd * (I * k * q).exp();
                    let b = self.amp_bwd * (-I * k * q).exp();
                    (f + b, I * k * (f - b))
                }
            }
            Some(local) => {
                // Local wavenumber: phase k(r)·r, so d/dr brings k + r·k'(r).
                let k = local.model.escape_momentum(q, local.p0_re).value / units.hbar;
                let dk = local.model.escape_momentum_slope(q, local.p0_re) / units.hbar;
                let f = self.amp_fwd * (I * k * q).exp();
                let b = self.amp_bwd * (-I * k * q).exp();
                (f + b, I * (k + dk * q) * (f - b))
            }
        }
    }

    /// Summed magnitudes of the two partial waves in `ψ` and `ψ'` at `q`.
    fn partial_scale(&self, q: f64, units: &Units) -> (f64, f64) {
        let (k, dk) = match &self.local {
            None => (self.label.axial_momentum() / units.hbar, ZERO),
            Some(local) => (
                Complex64::from(local.model.escape_momentum(q, local.p0_re).value / units.hbar),
                Complex64::from(local.model.escape_momentum_slope(q, local.p0_re) / units.hbar),
            ),
        };
        if k == ZERO && self.local.is_none() {
            return (self.amp_fwd.norm() + (self.amp_bwd * q).norm(), self.amp_bwd.norm());
        }
        let f = (self.amp_fwd * (I * k * q).exp()).norm();
        let b = (self.amp_bwd * (-I * k * q).exp()).norm();
        (f + b, (k + dk * q).norm() * (f + b))
    }

    pub fn sample(&self, grid: &GridSpec, units: &Units) -> StateVector {
        StateVector::from_fn(grid, |q| self.evaluate(q, units).0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseState {
    pub axis: StateAxis,
    pub regions: Vec<Region>,
    pub mode: Mode,
}

impl PiecewiseState {
    pub fn new(axis: StateAxis, regions: Vec<Region>, mode: Mode) -> Result<Self, StateError> {
        let state = Self { axis, regions, mode };
        state.check_tiling()?;
        Ok(state)
    }

    fn check_tiling(&self) -> Result<(), StateError> {
        let first = self.regions.first().ok_or(StateError::BadTiling)?;
        let last = self.regions.last().ok_or(StateError::BadTiling)?;
        let start = match self.axis {
            StateAxis::RRe => 0.0,
            _ => f64::NEG_INFINITY,
        };
        if first.lo != start || last.hi != f64::INFINITY {
            return Err(StateError::BadTiling);
        }
        if self.regions.windows(2).any(|w| w[0].hi != w[1].lo) {
            return Err(StateError::BadTiling);
        }
        Ok(())
    }

    pub fn region_at(&self, q: f64) -> Option<&Region> {
        self.regions.iter().find(|r| r.contains(q))
    }

    pub fn evaluate(&self, q: f64, units: &Units) -> Option<(Complex64, Complex64)> {
        self.region_at(q).map(|r| r.evaluate(q, units))
    }

    /// Samples `ψ` on `grid`, zero outside the tiled axis.
    pub fn sample(&self, grid: &GridSpec, units: &Units) -> StateVector {
        StateVector::from_fn(grid, |q| self.evaluate(q, units).map_or(ZERO, |v| v.0))
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, StateError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(StateError::NotPositive { name, value })
    }
}

/// Three regions on `q_re`: free, barrier, free.
pub fn spatial_tunnel_state(
    q_a: f64,
    q_b: f64,
    v0: f64,
    e0: f64,
    m: f64,
    units: &Units,
    mode: Mode,
) -> Result<PiecewiseState, StateError> {
    units.validate()?;
    positive("E0", e0)?;
    positive("m", m)?;
    if !(q_a < q_b) || !q_a.is_finite() || !q_b.is_finite() {
        return Err(StateError::BadInterval { lo: q_a, hi: q_b });
    }
    let outer = PlaneWaveLabel::real((2.0 * m * e0).sqrt(), e0);
    // The barrier region keeps the time phase E0.
    let inner = PlaneWaveLabel::from_momentum(tunneling_momentum(e0, v0, m), e0);
    let regions = vec![
        Region::new(f64::NEG_INFINITY, q_a, outer)?,
        Region::new(q_a, q_b, inner)?,
        Region::new(q_b, f64::INFINITY, outer)?,
    ];
    let state = PiecewiseState::new(StateAxis::QRe, regions, Mode::Literal)?;
    match mode {
        Mode::Literal => Ok(state),
        Mode::Matched => {
            let pot = PiecewisePotential::square_barrier(q_a, q_b, v0)?;
            fill_amplitudes(state, &pot, e0, m, units)
        }
    }
}

fn fill_amplitudes(
    mut state: PiecewiseState,
    pot: &PiecewisePotential,
    e0: f64,
    m: f64,
    units: &Units,
) -> Result<PiecewiseState, StateError> {
    let scatter = transmission_reflection(pot, e0, m, units)?;
    for (region, (a, b)) in state.regions.iter_mut().zip(scatter.amplitudes) {
        region.amp_fwd = a;
        region.amp_bwd = b;
    }
    state.mode = Mode::Matched;
    Ok(state)
}

/// Recomputes continuity-enforcing amplitudes from the region labels.
///
/// Each region's height is recovered as `E - p²/2m`. Applying this to an
/// already matched state reproduces it.
pub fn match_amplitudes(state: &PiecewiseState, m: f64, units: &Units) -> Result<PiecewiseState, StateError> {
    if !state.axis.is_spatial() {
        return Err(StateError::TemporalMatching);
    }
    if state.regions.iter().any(|r| r.local.is_some()) || state.axis == StateAxis::RRe {
        return Err(StateError::LocalRegion);
    }
    positive("m", m)?;
    let e0 = state.regions[0].label.energy.re;
    let breakpoints = state.regions.iter().skip(1).map(|r| r.lo).collect();
    let values = state
        .regions
        .iter()
        .map(|r| (r.label.energy - r.label.momentum_squared() / (2.0 * m)).re)
        .collect();
    let pot = PiecewisePotential::new(breakpoints, values)?;
    fill_amplitudes(state.clone(), &pot, e0, m, units)
}

/// Energy bookkeeping of the tunneling labels in a temporal barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemporalEnergies {
    pub e0: f64,
    pub e_t: f64,
    pub w0: f64,
}

/// Three regions on `t`: before, during and after a square drain `W0`.
pub fn temporal_tunnel_state(
    t_a: f64,
    t_b: f64,
    w0: f64,
    p0_re: f64,
    m: f64,
    units: &Units,
    mode: Mode,
) -> Result<(PiecewiseState, TemporalEnergies), StateError> {
    units.validate()?;
    positive("m", m)?;
    if mode == Mode::Matched {
        return Err(StateError::TemporalMatching);
    }
    if !(t_a < t_b) || !t_a.is_finite() || !t_b.is_finite() {
        return Err(StateError::BadInterval { lo: t_a, hi: t_b });
    }
    if !w0.is_finite() || !p0_re.is_finite() {
        return Err(StateError::NonFiniteLabel);
    }
    let e0 = p0_re * p0_re / (2.0 * m);
    let outside = PlaneWaveLabel::real(p0_re, e0);
    let p_t = tunneling_momentum(e0, w0, m);
    // E_T = p_T²/2m, written in the form that needs no square root.
    let e_t = e0 - w0;
    let during = PlaneWaveLabel::from_momentum(p_t, e_t);
    let regions = vec![
        Region::new(f64::NEG_INFINITY, t_a, outside)?,
        Region::new(t_a, t_b, during)?,
        Region::new(t_b, f64::INFINITY, outside)?,
    ];
    Ok((
        PiecewiseState::new(StateAxis::T, regions, Mode::Literal)?,
        TemporalEnergies { e0, e_t, w0 },
    ))
}

/// Inside `[0, r_a)` a free outward wave, outside a local-momentum wave.
pub fn bh_escape_state(model: &BlackHoleModel, r_a: f64, p0_re: f64, units: &Units) -> Result<PiecewiseState, StateError> {
    units.validate()?;
    positive("r_a", r_a)?;
    let e0 = model.kinetic_energy(p0_re);
    let local = LocalMomentum { model: *model, p0_re };
    let inside = Region::new(0.0, r_a, PlaneWaveLabel::real(p0_re, e0))?;
    let mut outside = Region::new(r_a, f64::INFINITY, local.label_at(r_a))?;
    outside.local = Some(local);
    PiecewiseState::new(StateAxis::RRe, vec![inside, outside], Mode::Literal)
}

/// What the label energy must balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HamiltonianSpec {
    /// `E = p²/2m + V`.
    Potential(f64),
    /// The label's energy is the system's own, `E = p²/2m`, and an external
    /// drain `w` holds the rest of a conserved `total`.
    Drain { w: f64, total: f64 },
}

/// How far a region's label is from solving `ŝψ = Hψ`.
pub fn schrodinger_residual(region: &Region, spec: HamiltonianSpec, m: f64) -> f64 {
    let label = region.label;
    let kinetic = label.momentum_squared() / (2.0 * m);
    match spec {
        HamiltonianSpec::Potential(v) => (label.energy - kinetic - v).norm(),
        HamiltonianSpec::Drain { w, total } => {
            let own = (label.energy - kinetic).norm();
            let balance = (label.energy + w - total).norm();
            own.max(balance)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryMismatch {
    pub at: f64,
    pub value: f64,
    pub slope: f64,
    pub value_rel: f64,
    pub slope_rel: f64,
}

impl BoundaryMismatch {
    pub fn worst_rel(&self) -> f64 {
        self.value_rel.max(self.slope_rel)
    }
}

pub fn boundary_mismatch(state: &PiecewiseState, units: &Units) -> Result<Vec<BoundaryMismatch>, StateError> {
    if !state.axis.is_spatial() {
        return Err(StateError::TemporalMatching);
    }
    Ok(state
        .regions
        .windows(2)
        .map(|w| {
            let at = w[0].hi;
            let (psi_l, dpsi_l) = w[0].evaluate(at, units);
            let (psi_r, dpsi_r) = w[1].evaluate(at, units);
            let value = (psi_l - psi_r).norm();
            let slope = (dpsi_l - dpsi_r).norm();
            // Scaled by the partial waves, not by ψ, which may cancel to nothing.
            let (vl, sl) = w[0].partial_scale(at, units);
            let (vr, sr) = w[1].partial_scale(at, units);
            let rel = |d: f64, scale: f64| if scale == 0.0 { d } else { d / scale };
            BoundaryMismatch {
                at,
                value,
                slope,
                value_rel: rel(value, vl.max(vr)),
                slope_rel: rel(slope, sl.max(sr)),
            }
        })
        .collect())
}

// JSON shape: {axis, regions: [{lo, hi, p_re, p_im, E, amp_fwd, amp_bwd}], mode}
// with complex numbers as [re, im] and infinite bounds as null.

#[derive(Serialize, Deserialize)]
struct RegionJson {
    lo: Option<f64>,
    hi: Option<f64>,
    p_re: [f64; 2],
    p_im: [f64; 2],
    #[serde(rename = "E")]
    energy: [f64; 2],
    amp_fwd: [f64; 2],
    amp_bwd: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    local: Option<LocalMomentum>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    axis: StateAxis,
    regions: Vec<RegionJson>,
    mode: Mode,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl Serialize for PiecewiseState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        StateJson {
            axis: self.axis,
            mode: self.mode,
            regions: self
                .regions
                .iter()
                .map(|r| RegionJson {
                    lo: finite_or_none(r.lo),
                    hi: finite_or_none(r.hi),
                    p_re: pair(r.label.p_re),
                    p_im: pair(r.label.p_im),
                    energy: pair(r.label.energy),
                    amp_fwd: pair(r.amp_fwd),
                    amp_bwd: pair(r.amp_bwd),
                    local: r.local,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PiecewiseState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = StateJson::deserialize(deserializer)?;
        let regions = raw
            .regions
            .into_iter()
            .map(|r| {
                let label = PlaneWaveLabel::new(unpair(r.p_re), unpair(r.p_im), unpair(r.energy))?;
                let mut region = Region::new(r.lo.unwrap_or(f64::NEG_INFINITY), r.hi.unwrap_or(f64::INFINITY), label)?;
                region.amp_fwd = unpair(r.amp_fwd);
                region.amp_bwd = unpair(r.amp_bwd);
                region.local = r.local;
                Ok(region)
            })
            .collect::<Result<Vec<_>, StateError>>()
            .map_err(D::Error::custom)?;
        PiecewiseState::new(raw.axis, regions, raw.mode).map_err(D::Error::custom)
    }
}
