//! Scattering on piecewise-constant potentials and the classical contrast.
//!
//! Inside an interval of height `V` a stationary state of energy `E0` is
//! `A·e^{ikq} + B·e^{-ikq}` with `ħk = √(2m(E0 - V))`, the principal root
//! (`Im k ≥ 0`), so `k` is imaginary under a barrier. At `E0 = V` the pair
//! degenerates to `A + B·q`.
//!
//! The transfer matrix maps right-hand asymptotic amplitudes onto left-hand
//! ones, `c_left = M·c_right`. With a wave `(1, r)` incident from the left and
//! `(t, 0)` leaving on the right, `t = 1/M₁₁` and `r = M₂₁/M₁₁`.
//!
//! Propagation through each interval is carried out on `(ψ, ψ')`, where the
//! interval matrix `[[cos kL, sin(kL)/k], [-k sin kL, cos kL]]` stays finite as
//! `k → 0`. That is what makes the marginal case a limit instead of a pole.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Units;

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `|kL|` below which `sin(kL)/k` is evaluated by its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("breakpoints must be finite and strictly ascending")]
    UnsortedBreakpoints,
    #[error("{breakpoints} breakpoints need {} interval values, got {values}", breakpoints + 1)]
    ValueCount { breakpoints: usize, values: usize },
    #[error("potential values must be finite")]
    NonFiniteValue,
    #[error("mass must be positive, got {0}")]
    BadMass(f64),
    #[error("energy must be positive, got {0}")]
    BadEnergy(f64),
    #[error("energy {energy} does not exceed the asymptotic value {value}; no propagating wave")]
    ClosedChannel { energy: f64, value: f64 },
    #[error(transparent)]
    Units(#[from] crate::algebra::AlgebraError),
}

/// `k` breakpoints split the line into `k + 1` intervals of constant height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewisePotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self, ScatterError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(ScatterError::ValueCount {
                breakpoints: breakpoints.len(),
                values: values.len(),
            });
        }
        if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScatterError::UnsortedBreakpoints);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ScatterError::NonFiniteValue);
        }
        Ok(Self { breakpoints, values })
    }

    /// `V ≡ 0`.
    pub fn free() -> Self {
        Self {
            breakpoints: Vec::new(),
            values: vec![0.0],
        }
    }

    pub fn square_barrier(q_a: f64, q_b: f64, height: f64) -> Result<Self, ScatterError> {
        Self::new(vec![q_a, q_b], vec![0.0, height, 0.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `q`; a breakpoint belongs to the interval on its right.
    pub fn value_at(&self, q: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= q);
        self.values[idx]
    }

    /// `(lo, hi, value)` for every interval, with infinite outer ends.
    pub fn intervals(&self) -> Vec<(f64, f64, f64)> {
        let mut edges = Vec::with_capacity(self.breakpoints.len() + 2);
        edges.push(f64::NEG_INFINITY);
        edges.extend_from_slice(&self.breakpoints);
        edges.push(f64::INFINITY);
        edges
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
            .collect()
    }
}

/// `√(2m(E0 - V))` on the principal branch; `+i·√(2m(V - E0))` under a barrier.
pub fn tunneling_momentum(e0: f64, v: f64, m: f64) -> Complex64 {
    Complex64::new(2.0 * m * (e0 - v), 0.0).sqrt()
}

fn wavenumber(e0: f64, v: f64, m: f64, units: &Units) -> Complex64 {
    tunneling_momentum(e0, v, m) / units.hbar
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn apply(a: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn det(a: &Mat2) -> Complex64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// `sin(kL)/k`, continuous through `k = 0`.
fn sin_over_k(k: Complex64, len: f64) -> Complex64 {
    let x = k * len;
    if x.norm() < SERIES_THRESHOLD {
        let x2 = x * x;
        // L·(1 - x²/6 + x⁴/120 - x⁶/5040)
        (ONE - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0) * len
    } else {
        x.sin() / k
    }
}

/// Maps `(ψ, ψ')` at `q` to `(ψ, ψ')` at `q + len` inside one interval.
fn propagator(k: Complex64, len: f64) -> Mat2 {
    let x = k * len;
    let cos = x.cos();
    let s = sin_over_k(k, len);
    [[cos, s], [-k * k * s, cos]]
}

/// Maps amplitudes `(A, B)` to `(ψ, ψ')` at `q`.
pub(crate) fn basis(k: Complex64, q: f64) -> Mat2 {
    if k == ZERO {
        [[ONE, Complex64::new(q, 0.0)], [ZERO, ONE]]
    } else {
        let f = (I * k * q).exp();
        let b = (-I * k * q).exp();
        [[f, b], [I * k * f, -I * k * b]]
    }
}

pub(crate) fn basis_inverse(k: Complex64, q: f64) -> Mat2 {
    if k == ZERO {
        [[ONE, Complex64::new(-q, 0.0)], [ZERO, ONE]]
    } else {
        let f = (I * k * q).exp();
        let b = (-I * k * q).exp();
        let s = ONE / (2.0 * I * k);
        [[b * 0.5, b * s], [f * 0.5, -f * s]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub matrix: Mat2,
    /// Wavenumbers of the left and right asymptotic intervals.
    pub k_left: Complex64,
    pub k_right: Complex64,
    /// Intervals where `E0` equals the local height exactly.
    pub marginal: Vec<usize>,
}

fn check_inputs(e0: f64, m: f64, units: &Units) -> Result<(), ScatterError> {
    units.validate()?;
    if !(m.is_finite() && m > 0.0) {
        return Err(ScatterError::BadMass(m));
    }
    if !(e0.is_finite() && e0 > 0.0) {
        return Err(ScatterError::BadEnergy(e0));
    }
    Ok(())
}

fn asymptote(e0: f64, value: f64, m: f64, units: &Units) -> Result<Complex64, ScatterError> {
    if e0 <= value {
        return Err(ScatterError::ClosedChannel { energy: e0, value });
    }
    Ok(wavenumber(e0, value, m, units))
}

pub fn transfer_matrix(
    pot: &PiecewisePotential,
    e0: f64,
    m: f64,
    units: &Units,
) -> Result<TransferMatrix, ScatterError> {
    check_inputs(e0, m, units)?;
    let values = pot.values();
    let k_left = asymptote(e0, values[0], m, units)?;
    let k_right = asymptote(e0, values[values.len() - 1], m, units)?;
    let marginal = values.iter().enumerate().filter(|(_, &v)| v == e0).map(|(j, _)| j).collect();
    let bps = pot.breakpoints();
    if bps.is_empty() {
        return Ok(TransferMatrix {
            matrix: [[ONE, ZERO], [ZERO, ONE]],
            k_left,
            k_right,
            marginal,
        });
    }
    // c_left = W_L(q_first)⁻¹ · P₁(-L₁) ⋯ P_n(-L_n) · W_R(q_last) · c_right
    let mut acc = basis_inverse(k_left, bps[0]);
    for (j, w) in bps.windows(2).enumerate() {
        let k = wavenumber(e0, values[j + 1], m, units);
        acc = mul(&acc, &propagator(k, w[0] - w[1]));
    }
    acc = mul(&acc, &basis(k_right, bps[bps.len() - 1]));
    Ok(TransferMatrix {
        matrix: acc,
        k_left,
        k_right,
        marginal,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterResult {
    pub transmission: f64,
    pub reflection: f64,
    /// Transmitted amplitude `t`.
    pub t: Complex64,
    /// Reflected amplitude `r`.
    pub r: Complex64,
    /// `(A, B)` per interval, left to right, for a unit wave from the left.
    pub amplitudes: Vec<(Complex64, Complex64)>,
    pub wavenumbers: Vec<Complex64>,
    pub marginal: Vec<usize>,
}

pub fn transmission_reflection(
    pot: &PiecewisePotential,
    e0: f64,
    m: f64,
    units: &Units,
) -> Result<ScatterResult, ScatterError> {
    let tm = transfer_matrix(pot, e0, m, units)?;
    let mm = tm.matrix;
    let t = ONE / mm[0][0];
    let r = mm[1][0] / mm[0][0];
    let transmission = (tm.k_right.re / tm.k_left.re) * t.norm_sqr();
    let reflection = r.norm_sqr();

    let wavenumbers: Vec<Complex64> = pot.values().iter().map(|&v| wavenumber(e0, v, m, units)).collect();
    let n = wavenumbers.len();
    let mut amplitudes = vec![(ZERO, ZERO); n];
    amplitudes[n - 1] = (t, ZERO);
    let bps = pot.breakpoints();
    if let Some(&last) = bps.last() {
        // Walk leftwards carrying (ψ, ψ'). Amplitudes are read off at each
        // interval's right edge, before the field is propagated across it.
        let mut field = apply(&basis(wavenumbers[n - 1], last), [t, ZERO]);
        for j in (1..n - 1).rev() {
            let (lo, hi) = (bps[j - 1], bps[j]);
            let c = apply(&basis_inverse(wavenumbers[j], hi), field);
            amplitudes[j] = (c[0], c[1]);
            field = apply(&propagator(wavenumbers[j], lo - hi), field);
        }
        let c = apply(&basis_inverse(wavenumbers[0], bps[0]), field);
        amplitudes[0] = (c[0], c[1]);
    } else {
        amplitudes[0] = (ONE, ZERO);
    }
    Ok(ScatterResult {
        transmission,
        reflection,
        t,
        r,
        amplitudes,
        wavenumbers,
        marginal: tm.marginal,
    })
}

/// Transmission through a single square barrier of height `v0` and width
/// `len` in closed form.
pub fn square_barrier_transmission(e0: f64, v0: f64, len: f64, m: f64, units: &Units) -> f64 {
    let h2 = units.hbar * units.hbar;
    if e0 == v0 {
        return 1.0 / (1.0 + m * v0 * len * len / (2.0 * h2));
    }
    let k = (2.0 * m * (e0 - v0).abs()).sqrt() / units.hbar;
    let shape = if e0 < v0 { (k * len).sinh() } else { (k * len).sin() };
    1.0 / (1.0 + v0 * v0 * shape * shape / (4.0 * e0 * (e0 - v0).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Encounter {
    /// Pushed back at the edge of the first interval it cannot afford.
    Reflected { at: f64, exit_momentum: f64 },
    /// Crosses every step; speed per interval along the way.
    Transmitted { itinerary: Vec<Segment> },
}

impl Encounter {
    pub fn is_reflected(&self) -> bool {
        matches!(self, Encounter::Reflected { .. })
    }
}

/// Classical particle of momentum `p0` launched at `q0` into `pot`.
///
/// No force acts inside an interval; at a step the particle is reflected when
/// its energy is below the next height, otherwise its speed changes to
/// `√(2(E - V)/m)`.
pub fn classical_encounter(
    q0: f64,
    p0: f64,
    pot: &PiecewisePotential,
    m: f64,
) -> Result<Encounter, ScatterError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(ScatterError::BadMass(m));
    }
    let energy = p0 * p0 / (2.0 * m) + pot.value_at(q0);
    let speed = |v: f64| (2.0 * (energy - v) / m).max(0.0).sqrt();
    let intervals = pot.intervals();
    let start = pot.breakpoints().partition_point(|&b| b <= q0);
    let mut itinerary = Vec::new();
    if p0 >= 0.0 {
        itinerary.push(Segment { lo: q0, hi: intervals[start].1, speed: speed(intervals[start].2) });
        for &(lo, hi, v) in &intervals[start + 1..] {
            if energy < v {
                return Ok(Encounter::Reflected { at: lo, exit_momentum: -p0 });
            }
            itinerary.push(Segment { lo, hi, speed: speed(v) });
        }
    } else {
        itinerary.push(Segment { lo: intervals[start].0, hi: q0, speed: speed(intervals[start].2) });
        for &(lo, hi, v) in intervals[..start].iter().rev() {
            if energy < v {
                return Ok(Encounter::Reflected { at: hi, exit_momentum: -p0 });
            }
            itinerary.push(Segment { lo, hi, speed: speed(v) });
        }
    }
    Ok(Encounter::Transmitted { itinerary })
}
