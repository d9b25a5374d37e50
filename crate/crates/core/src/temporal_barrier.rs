//! Classical motion under a time-dependent energy drain.
//!
//! An external system holds the energy `W(t)` and the pair conserves
//! `E_tot = E_system + W(t)`. No force acts in space: the particle's momentum
//! is fixed by energy bookkeeping alone. When `W` rises above the particle's
//! energy, the non-relativistic system has nothing left and is destroyed.
//! The relativistic model instead lets the energy go negative by flipping the
//! sign of the mass; the flip is recorded as metadata, the integration itself
//! keeps running forward in `t`.
//!
//! The quantum state with the same data simply tunnels: its label after the
//! drain equals its label before it.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Units};
use crate::states::{temporal_tunnel_state, Mode, PiecewiseState, StateError, TemporalEnergies};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemporalError {
    #[error("profile times must be finite and strictly increasing")]
    BadProfileTimes,
    #[error("drain height must be finite and non-negative, got {0}")]
    BadHeight(f64),
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("state fields must be finite")]
    NonFiniteState,
    #[error("t_end = {t_end} must exceed the start time {t0}")]
    BadSpan { t0: f64, t_end: f64 },
    #[error("speed {v} reaches the speed of light {c}")]
    Superluminal { v: f64, c: f64 },
    #[error("drain changes by {dw} in one step near t = {t}; the limit is 1% of W0, use a smaller dt")]
    StepTooCoarse { t: f64, dw: f64 },
    #[error("quantum contrast needs a square profile")]
    NotSquare,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Units(#[from] AlgebraError),
}

/// Largest change of `W` allowed in one step, as a fraction of `W0`.
pub const MAX_STEP_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemporalProfile {
    /// `W0` on `[t_a, t_b]`, zero elsewhere.
    Square {
        t_a: f64,
        t_b: f64,
        #[serde(rename = "W0")]
        w0: f64,
    },
    /// Cubic smoothstep up on `[t1, t_a]`, plateau `W0`, down on `[t_b, t2]`.
    SmoothBump {
        t1: f64,
        t_a: f64,
        t_b: f64,
        t2: f64,
        #[serde(rename = "W0")]
        w0: f64,
    },
}

fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

impl TemporalProfile {
    pub fn validate(&self) -> Result<(), TemporalError> {
        let increasing = |ts: &[f64]| ts.iter().all(|t| t.is_finite()) && ts.windows(2).all(|w| w[0] < w[1]);
        let (ok, w0) = match *self {
            TemporalProfile::Square { t_a, t_b, w0 } => (increasing(&[t_a, t_b]), w0),
            TemporalProfile::SmoothBump { t1, t_a, t_b, t2, w0 } => (increasing(&[t1, t_a, t_b, t2]), w0),
        };
        if !ok {
            return Err(TemporalError::BadProfileTimes);
        }
        if !(w0.is_finite() && w0 >= 0.0) {
            return Err(TemporalError::BadHeight(w0));
        }
        Ok(())
    }

    pub fn height(&self) -> f64 {
        match *self {
            TemporalProfile::Square { w0, .. } | TemporalProfile::SmoothBump { w0, .. } => w0,
        }
    }

    /// First and last instants where the drain can be non-zero.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            TemporalProfile::Square { t_a, t_b, .. } => (t_a, t_b),
            TemporalProfile::SmoothBump { t1, t2, .. } => (t1, t2),
        }
    }

    /// Instants where `W` jumps.
    fn jumps(&self) -> Vec<f64> {
        match *self {
            TemporalProfile::Square { t_a, t_b, .. } => vec![t_a, t_b],
            TemporalProfile::SmoothBump { .. } => Vec::new(),
        }
    }

    /// `W` just before and just after `t`; equal away from jumps.
    fn limits(&self, t: f64) -> (f64, f64) {
        match *self {
            TemporalProfile::Square { t_a, w0, .. } if t == t_a => (0.0, w0),
            TemporalProfile::Square { t_a, t_b, w0 } if t == t_b && t_a < t_b => (w0, 0.0),
            _ => {
                let w = profile_value(self, t);
                (w, w)
            }
        }
    }
}

pub fn profile_value(profile: &TemporalProfile, t: f64) -> f64 {
    match *profile {
        TemporalProfile::Square { t_a, t_b, w0 } => {
            if (t_a..=t_b).contains(&t) {
                w0
            } else {
                0.0
            }
        }
        TemporalProfile::SmoothBump { t1, t_a, t_b, t2, w0 } => {
            if t <= t1 || t >= t2 {
                0.0
            } else if t < t_a {
                w0 * smoothstep((t - t1) / (t_a - t1))
            } else if t <= t_b {
                w0
            } else {
                w0 * smoothstep((t2 - t) / (t2 - t_b))
            }
        }
    }
}

/// First instant at which the drain reaches `energy`, `None` if it never does.
///
/// The rising edge of a smooth bump is monotone, so bisection on it converges.
pub fn exhaustion_time(profile: &TemporalProfile, energy: f64) -> Option<f64> {
    if profile.height() < energy {
        return None;
    }
    match *profile {
        TemporalProfile::Square { t_a, .. } => Some(t_a),
        TemporalProfile::SmoothBump { t1, t_a, .. } => {
            if energy <= 0.0 {
                return Some(t1);
            }
            let (mut lo, mut hi) = (t1, t_a);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if profile_value(profile, mid) < energy {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(hi)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    NonRel,
    Rel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub t: f64,
    pub q_re: f64,
    pub p_re: f64,
    /// `q_im = i·x_im`
    pub x_im: f64,
    /// `p_im = i·pi_im`
    pub pi_im: f64,
    pub m: f64,
    /// `+1` or `-1`.
    pub mass_sign: i8,
}

impl ClassicalState {
    pub fn at_rest(m: f64) -> Self {
        Self {
            t: 0.0,
            q_re: 0.0,
            p_re: 0.0,
            x_im: 0.0,
            pi_im: 0.0,
            m,
            mass_sign: 1,
        }
    }

    pub fn validate(&self) -> Result<(), TemporalError> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(TemporalError::NotPositive { name: "m", value: self.m });
        }
        let fields = [self.t, self.q_re, self.p_re, self.x_im, self.pi_im];
        if !fields.iter().all(|v| v.is_finite()) || !matches!(self.mass_sign, 1 | -1) {
            return Err(TemporalError::NonFiniteState);
        }
        Ok(())
    }
}

/// `γ = √(1 + (p/mc)²)`
fn lorentz_from_momentum(p: f64, m: f64, c: f64) -> f64 {
    (p / (m * c)).hypot(1.0)
}

/// `mc²/√(1 - v_re²/c²) + m·c_im²/√(1 - v_im²/c_im²)` with `c_im = ic`, `v_im = i·v_x`.
///
/// Both ratios under the roots are real: `v_im²/c_im² = v_x²/c²`. The second
/// term is therefore `-mc²/√(1 - v_x²/c²)`, and the sum vanishes at rest.
pub fn relativistic_energy(v_re: f64, v_x: f64, m: f64, units: &Units) -> Result<f64, TemporalError> {
    units.validate()?;
    let c = units.c;
    for v in [v_re, v_x] {
        if !(v.abs() < c) {
            return Err(TemporalError::Superluminal { v, c });
        }
    }
    let rest = m * c * c;
    Ok(rest / (1.0 - (v_re / c).powi(2)).sqrt() + m * units.c_im_squared() / (1.0 - (v_x / c).powi(2)).sqrt())
}

/// Energy of the particle alone, with the mass sign applied.
pub fn system_energy(state: &ClassicalState, model: Model, units: &Units) -> f64 {
    let sign = f64::from(state.mass_sign);
    let m = state.m;
    match model {
        Model::NonRel => sign * (state.p_re * state.p_re - state.pi_im * state.pi_im) / (2.0 * m),
        Model::Rel => {
            let c = units.c;
            sign * m * c * c * (lorentz_from_momentum(state.p_re, m, c) - lorentz_from_momentum(state.pi_im, m, c))
        }
    }
}

/// `E_system + W(t)`.
///
/// The imaginary-world contribution is `(i·pi_im)²/2m = -pi_im²/2m`, so the
/// total is real and returned as such.
pub fn total_energy(state: &ClassicalState, profile: &TemporalProfile, model: Model, units: &Units) -> Result<f64, TemporalError> {
    state.validate()?;
    units.validate()?;
    Ok(system_energy(state, model, units) + profile_value(profile, state.t))
}

/// Real momentum carrying `e_sys` when the imaginary momentum is `pi_im`.
fn momentum_for(e_sys: f64, pi_im: f64, m: f64, sign: f64, model: Model, units: &Units) -> f64 {
    match model {
        Model::NonRel => sign * (2.0 * m * e_sys + pi_im * pi_im).max(0.0).sqrt(),
        Model::Rel => {
            let c = units.c;
            let gamma = lorentz_from_momentum(pi_im, m, c) + e_sys.abs() / (m * c * c);
            sign * m * c * (gamma * gamma - 1.0).max(0.0).sqrt()
        }
    }
}

fn velocity(p: f64, m: f64, model: Model, units: &Units) -> f64 {
    match model {
        Model::NonRel => p / m,
        Model::Rel => p / (m * lorentz_from_momentum(p, m, units.c)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    BarrierEntered,
    BarrierExited,
    EnergyZero,
    Destroyed,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::BarrierEntered => "barrier_entered",
            EventKind::BarrierExited => "barrier_exited",
            EventKind::EnergyZero => "energy_zero",
            EventKind::Destroyed => "destroyed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    pub kind: EventKind,
    pub t: f64,
    pub state: ClassicalState,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub state: ClassicalState,
    pub w: f64,
    pub e_system: f64,
    pub events: Vec<EventKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub model: Model,
    pub total_energy: f64,
    pub rows: Vec<TrajectoryRow>,
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    pub fn first(&self, kind: EventKind) -> Option<&TrajectoryEvent> {
        self.events.iter().find(|e| e.kind == kind)
    }

    pub fn destroyed(&self) -> bool {
        self.first(EventKind::Destroyed).is_some()
    }

    pub fn last_state(&self) -> &ClassicalState {
        &self.rows.last().expect("a trajectory has at least its initial row").state
    }

    pub const CSV_HEADER: &'static str = "t,q_re,p_re,x_im,pi_im,W,E_system,mass_sign,event";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let s = &row.state;
            let events: Vec<String> = row.events.iter().map(|e| e.to_string()).collect();
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                s.t,
                s.q_re,
                s.p_re,
                s.x_im,
                s.pi_im,
                row.w,
                row.e_system,
                s.mass_sign,
                events.join(";")
            ));
        }
        out
    }
}

/// Step times from `t0` to `t_end` on the `dt` lattice plus every jump.
fn step_times(t0: f64, t_end: f64, dt: f64, jumps: &[f64]) -> Vec<f64> {
    let n = ((t_end - t0) / dt).ceil() as usize;
    let mut times: Vec<f64> = (1..=n).map(|k| (t0 + k as f64 * dt).min(t_end)).collect();
    times.extend(jumps.iter().copied().filter(|&t| t > t0 && t < t_end));
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

/// Advances the particle with energy bookkeeping from `state0.t` to `t_end`.
pub fn integrate_classical(
    state0: &ClassicalState,
    profile: &TemporalProfile,
    model: Model,
    dt: f64,
    t_end: f64,
    units: &Units,
) -> Result<Trajectory, TemporalError> {
    state0.validate()?;
    profile.validate()?;
    units.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TemporalError::NotPositive { name: "dt", value: dt });
    }
    if !(t_end.is_finite() && t_end > state0.t) {
        return Err(TemporalError::BadSpan { t0: state0.t, t_end });
    }
    let w0 = profile.height();
    let jumps = profile.jumps();
    let (enter, exit) = profile.support();
    let m = state0.m;
    let direction = if state0.p_re < 0.0 { -1.0 } else { 1.0 };

    let w_start = profile.limits(state0.t).1;
    let e_start = system_energy(state0, model, units);
    let e_tot = e_start + w_start;
    let ctx = Stepper { e_tot, m, direction, model, units };

    let mut events = Vec::new();
    let mut rows = vec![TrajectoryRow {
        state: *state0,
        w: w_start,
        e_system: e_start,
        events: Vec::new(),
    }];
    if state0.t == enter && w_start > 0.0 {
        push_event(&mut rows, &mut events, EventKind::BarrierEntered, state0.t);
    }
    if model == Model::NonRel && e_start < 0.0 {
        push_event(&mut rows, &mut events, EventKind::Destroyed, state0.t);
        return Ok(Trajectory { model, total_energy: e_tot, rows, events });
    }

    let mut prev = *state0;
    let mut prev_w = w_start;
    let mut prev_e = e_start;
    for t in step_times(state0.t, t_end, dt, &jumps) {
        let (w_left, w_right) = profile.limits(t);
        let on_jump = jumps.contains(&t);
        if !on_jump && (w_left - prev_w).abs() > MAX_STEP_FRACTION * w0 {
            return Err(TemporalError::StepTooCoarse { t, dw: (w_left - prev_w).abs() });
        }
        // Left limit first; at a jump a second row carries the right limit.
        let mut values = vec![w_left];
        if w_right != w_left {
            values.push(w_right);
        }
        for w in values {
            let e_sys = e_tot - w;
            let span = prev.t..=t;
            let entered = prev_w == 0.0 && w > 0.0;
            let exited = prev_w > 0.0 && w == 0.0;
            let crossing_down = prev_e > 0.0 && e_sys <= 0.0;
            let crossing_up = prev_e <= 0.0 && e_sys > 0.0;
            let t_cross = if on_jump || prev.t == t {
                t
            } else {
                prev.t + (t - prev.t) * prev_e / (prev_e - e_sys)
            };

            if model == Model::NonRel && e_sys < 0.0 {
                let w_cross = if on_jump { w } else { profile_value(profile, t_cross) };
                let state = ctx.advance(&prev, t_cross, w_cross.min(e_tot), prev.mass_sign);
                rows.push(TrajectoryRow { state, w: w_cross, e_system: e_tot - w_cross, events: Vec::new() });
                if entered {
                    push_event(&mut rows, &mut events, EventKind::BarrierEntered, clamp_into(enter, &span));
                }
                if crossing_down {
                    push_event(&mut rows, &mut events, EventKind::EnergyZero, t_cross);
                }
                push_event(&mut rows, &mut events, EventKind::Destroyed, t_cross);
                return Ok(Trajectory { model, total_energy: e_tot, rows, events });
            }

            let sign = match model {
                Model::Rel if e_sys < 0.0 => -1,
                Model::Rel if e_sys > 0.0 => 1,
                _ => prev.mass_sign,
            };
            let state = ctx.advance(&prev, t, w, sign);
            rows.push(TrajectoryRow { state, w, e_system: e_sys, events: Vec::new() });
            if entered {
                push_event(&mut rows, &mut events, EventKind::BarrierEntered, clamp_into(enter, &span));
            }
            if crossing_down || (model == Model::Rel && crossing_up) {
                push_event(&mut rows, &mut events, EventKind::EnergyZero, t_cross);
            }
            if exited {
                push_event(&mut rows, &mut events, EventKind::BarrierExited, clamp_into(exit, &span));
            }
            prev = state;
            prev_w = w;
            prev_e = e_sys;
        }
    }
    Ok(Trajectory { model, total_energy: e_tot, rows, events })
}

fn clamp_into(t: f64, span: &std::ops::RangeInclusive<f64>) -> f64 {
    t.clamp(*span.start(), *span.end())
}

struct Stepper<'a> {
    e_tot: f64,
    m: f64,
    direction: f64,
    model: Model,
    units: &'a Units,
}

impl Stepper<'_> {
    /// State at `t` with drain `w`; positions use the mean velocity.
    fn advance(&self, prev: &ClassicalState, t: f64, w: f64, mass_sign: i8) -> ClassicalState {
        let (m, model, units) = (self.m, self.model, self.units);
        let p_re = momentum_for(self.e_tot - w, prev.pi_im, m, self.direction, model, units);
        let step = t - prev.t;
        let v_mean = 0.5 * (velocity(prev.p_re, m, model, units) + velocity(p_re, m, model, units));
        ClassicalState {
            t,
            q_re: prev.q_re + v_mean * step,
            p_re,
            x_im: prev.x_im + velocity(prev.pi_im, m, model, units) * step,
            mass_sign,
            ..*prev
        }
    }
}

fn push_event(rows: &mut [TrajectoryRow], events: &mut Vec<TrajectoryEvent>, kind: EventKind, t: f64) {
    let row = rows.last_mut().expect("rows are never empty");
    row.events.push(kind);
    events.push(TrajectoryEvent { kind, t, state: row.state });
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ClassicalVerdict {
    Survived,
    Destroyed { t: f64 },
    /// Energy touched zero without going negative.
    Grazed { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContrastReport {
    pub state: PiecewiseState,
    pub energies: TemporalEnergies,
    /// `|E_T + W0 - E0|`
    pub energy_identity_residual: f64,
    /// Label after the drain equals the label before it.
    pub quantum_survives: bool,
    pub classical: ClassicalVerdict,
}

/// Quantum tunneling state and classical fate for the same square drain.
pub fn quantum_contrast(profile: &TemporalProfile, p0_re: f64, m: f64, units: &Units) -> Result<ContrastReport, TemporalError> {
    profile.validate()?;
    let TemporalProfile::Square { t_a, t_b, w0 } = *profile else {
        return Err(TemporalError::NotSquare);
    };
    let (state, energies) = temporal_tunnel_state(t_a, t_b, w0, p0_re, m, units, Mode::Literal)?;
    let energy_identity_residual = (energies.e_t + energies.w0 - energies.e0).abs();
    let quantum_survives = state.regions[2].label == state.regions[0].label;

    let width = t_b - t_a;
    let start = ClassicalState {
        t: t_a - width,
        p_re: p0_re,
        m,
        ..ClassicalState::at_rest(m)
    };
    let run = integrate_classical(&start, profile, Model::NonRel, width / 1000.0, t_b + width, units)?;
    let classical = if let Some(e) = run.first(EventKind::Destroyed) {
        ClassicalVerdict::Destroyed { t: e.t }
    } else if let Some(e) = run.first(EventKind::EnergyZero) {
        ClassicalVerdict::Grazed { t: e.t }
    } else {
        ClassicalVerdict::Survived
    };
    Ok(ContrastReport {
        state,
        energies,
        energy_identity_residual,
        quantum_survives,
        classical,
    })
}
