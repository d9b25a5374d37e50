//! Toy universe with a real tangential coordinate and an imaginary radius.
//!
//! `H = pT²/2m + (pR_im)²/2m - k·(qR_im)²/qT` with `pR_im = i·π` and
//! `qR_im = i·x`. After the `i`-algebra everything is real:
//!
//! ```text
//! H = pT²/2m - π²/2m + k·x²/qT
//! ```
//!
//! Hamilton's equations on the complex coordinates give
//! `q̇T = pT/m`, `ṗT = k x²/qT²`, `ẋ = π/m`, `π̇ = 2k x/qT`.
//! In the real `(x, π)` pair this is `π̇ = +∂H/∂x`: the imaginary sector has
//! the opposite symplectic sign. Both accelerations are positive whenever
//! `x > 0`, so the tangential coordinate and the radius run away together.
//!
//! What is often called the real radial acceleration is, from the equations
//! above, the tangential one; it is exposed here as [`Accelerations::a_t_re`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CosmoError {
    #[error("qT_re must be positive, got {0}")]
    NonPositiveQt(f64),
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("state fields must be finite")]
    NonFinite,
    #[error("t_end = {t_end} must exceed the start time {t0}")]
    BadSpan { t0: f64, t_end: f64 },
    #[error("qT_re approached the singularity at t = {}", last.t)]
    HaltedNearSingularity { last: CosmoState },
}

/// Fraction of the initial `qT_re` below which integration halts.
pub const SINGULARITY_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosmoState {
    #[serde(default)]
    pub t: f64,
    #[serde(rename = "qT_re")]
    pub q_t: f64,
    #[serde(rename = "pT_re")]
    pub p_t: f64,
    /// `qR_im = i·x_r`
    #[serde(rename = "xR_im")]
    pub x_r: f64,
    /// `pR_im = i·pi_r`
    #[serde(rename = "pR_im_mag")]
    pub pi_r: f64,
    pub k: f64,
    pub m: f64,
}

impl CosmoState {
    pub fn validate(&self) -> Result<(), CosmoError> {
        let fields = [self.t, self.q_t, self.p_t, self.x_r, self.pi_r, self.k, self.m];
        if !fields.iter().all(|v| v.is_finite()) {
            return Err(CosmoError::NonFinite);
        }
        if self.q_t <= 0.0 {
            return Err(CosmoError::NonPositiveQt(self.q_t));
        }
        for (name, value) in [("k", self.k), ("m", self.m)] {
            if value <= 0.0 {
                return Err(CosmoError::NotPositive { name, value });
            }
        }
        Ok(())
    }
}

pub fn hamiltonian(state: &CosmoState) -> Result<f64, CosmoError> {
    if !(state.q_t > 0.0) {
        return Err(CosmoError::NonPositiveQt(state.q_t));
    }
    let s = state;
    Ok((s.p_t * s.p_t - s.pi_r * s.pi_r) / (2.0 * s.m) + s.k * s.x_r * s.x_r / s.q_t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Accelerations {
    #[serde(rename = "aT_re")]
    pub a_t_re: f64,
    /// Imaginary acceleration `i·a_r_im_mag` of the radius.
    #[serde(rename = "aR_im_mag")]
    pub a_r_im_mag: f64,
}

pub fn accelerations(state: &CosmoState) -> Result<Accelerations, CosmoError> {
    if !(state.q_t > 0.0) {
        return Err(CosmoError::NonPositiveQt(state.q_t));
    }
    let ratio = state.x_r / state.q_t;
    let km = state.k / state.m;
    Ok(Accelerations {
        a_t_re: km * ratio * ratio,
        a_r_im_mag: 2.0 * km * ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosmoTrajectory {
    pub dt: f64,
    /// Leapfrog steps between stored samples.
    pub stride: usize,
    pub samples: Vec<CosmoState>,
}

impl CosmoTrajectory {
    pub const CSV_HEADER: &'static str = "t,qT_re,pT_re,xR_im,pR_im_mag,H,aT_re,aR_im_mag";
    pub const DRIFT_HEADER: &'static str = "t,H,rel_drift";

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| hamiltonian(s).unwrap_or(f64::NAN)).collect()
    }

    /// Largest `|H - H0| / |H0|` over the samples (absolute when `H0 = 0`).
    pub fn max_energy_drift(&self) -> f64 {
        let h = self.energies();
        let scale = if h[0] == 0.0 { 1.0 } else { h[0].abs() };
        h.iter().map(|e| (e - h[0]).abs() / scale).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let h = hamiltonian(s).unwrap_or(f64::NAN);
            let a = accelerations(s).unwrap_or(Accelerations { a_t_re: f64::NAN, a_r_im_mag: f64::NAN });
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t, s.q_t, s.p_t, s.x_r, s.pi_r, h, a.a_t_re, a.a_r_im_mag
            ));
        }
        out
    }

    pub fn drift_csv(&self) -> String {
        let h = self.energies();
        let scale = if h[0] == 0.0 { 1.0 } else { h[0].abs() };
        let mut out = String::from(Self::DRIFT_HEADER);
        out.push('\n');
        for (s, e) in self.samples.iter().zip(&h) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.t, e, (e - h[0]) / scale));
        }
        out
    }
}

/// Kick-drift-kick leapfrog, storing every step.
pub fn integrate(state0: &CosmoState, dt: f64, t_end: f64) -> Result<CosmoTrajectory, CosmoError> {
    integrate_strided(state0, dt, t_end, 1)
}

/// Kick-drift-kick leapfrog, storing every `stride`-th step and the last one.
pub fn integrate_strided(state0: &CosmoState, dt: f64, t_end: f64, stride: usize) -> Result<CosmoTrajectory, CosmoError> {
    state0.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CosmoError::NotPositive { name: "dt", value: dt });
    }
    if !(t_end.is_finite() && t_end > state0.t) {
        return Err(CosmoError::BadSpan { t0: state0.t, t_end });
    }
    let stride = stride.max(1);
    let steps = ((t_end - state0.t) / dt).round().max(1.0) as usize;
    let floor = SINGULARITY_FRACTION * state0.q_t;
    let mut s = *state0;
    let mut samples = vec![s];
    for n in 1..=steps {
        let (f_t, f_r) = forces(&s);
        let p_half = s.p_t + 0.5 * dt * f_t;
        let pi_half = s.pi_r + 0.5 * dt * f_r;
        let mut next = CosmoState {
            t: state0.t + n as f64 * dt,
            q_t: s.q_t + dt * p_half / s.m,
            x_r: s.x_r + dt * pi_half / s.m,
            p_t: p_half,
            pi_r: pi_half,
            ..s
        };
        if !(next.q_t.is_finite() && next.x_r.is_finite()) || next.q_t < floor {
            return Err(CosmoError::HaltedNearSingularity { last: s });
        }
        let (f_t, f_r) = forces(&next);
        next.p_t += 0.5 * dt * f_t;
        next.pi_r += 0.5 * dt * f_r;
        if !(next.p_t.is_finite() && next.pi_r.is_finite()) {
            return Err(CosmoError::HaltedNearSingularity { last: s });
        }
        s = next;
        if n % stride == 0 || n == steps {
            samples.push(s);
        }
    }
    Ok(CosmoTrajectory { dt, stride, samples })
}

/// `(ṗT, π̇)`
fn forces(s: &CosmoState) -> (f64, f64) {
    let ratio = s.x_r / s.q_t;
    (s.k * ratio * ratio, 2.0 * s.k * ratio)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneSpan {
    pub t_start: f64,
    pub t_end: f64,
    pub increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    /// No radius at any sample: both accelerations vanish identically.
    pub degenerate: bool,
    /// Samples with `x > 0` where both accelerations are positive, out of all such samples.
    pub positive_samples: usize,
    pub eligible_samples: usize,
    pub all_positive: bool,
    /// Largest relative gap between the finite-difference and the exact accelerations.
    pub max_fd_rel_error: f64,
    pub v_t_spans: Vec<MonotoneSpan>,
    pub v_r_spans: Vec<MonotoneSpan>,
}

fn spans(times: &[f64], values: &[f64]) -> Vec<MonotoneSpan> {
    let mut out: Vec<MonotoneSpan> = Vec::new();
    for i in 1..values.len() {
        let increasing = values[i] >= values[i - 1];
        match out.last_mut() {
            Some(span) if span.increasing == increasing => span.t_end = times[i],
            _ => out.push(MonotoneSpan { t_start: times[i - 1], t_end: times[i], increasing }),
        }
    }
    out
}

/// Velocities and accelerations by central differences of the stored positions.
pub fn expansion_report(traj: &CosmoTrajectory) -> Option<ExpansionReport> {
    let s = &traj.samples;
    if s.len() < 3 {
        return None;
    }
    let mut times = Vec::new();
    let mut v_t = Vec::new();
    let mut v_r = Vec::new();
    let mut max_fd_rel_error: f64 = 0.0;
    for i in 1..s.len() - 1 {
        let (a, b, c) = (&s[i - 1], &s[i], &s[i + 1]);
        let (h0, h1) = (b.t - a.t, c.t - b.t);
        if h0 != h1 {
            continue;
        }
        let h = h0;
        times.push(b.t);
        v_t.push((c.q_t - a.q_t) / (2.0 * h));
        v_r.push((c.x_r - a.x_r) / (2.0 * h));
        let fd_t = (c.q_t - 2.0 * b.q_t + a.q_t) / (h * h);
        let fd_r = (c.x_r - 2.0 * b.x_r + a.x_r) / (h * h);
        if let Ok(exact) = accelerations(b) {
            for (fd, ex) in [(fd_t, exact.a_t_re), (fd_r, exact.a_r_im_mag)] {
                if ex != 0.0 {
                    max_fd_rel_error = max_fd_rel_error.max((fd - ex).abs() / ex.abs());
                }
            }
        }
    }
    let eligible: Vec<_> = s.iter().filter(|st| st.x_r > 0.0 && st.q_t > 0.0).collect();
    let positive_samples = eligible
        .iter()
        .filter(|st| accelerations(st).is_ok_and(|a| a.a_t_re > 0.0 && a.a_r_im_mag > 0.0))
        .count();
    Some(ExpansionReport {
        degenerate: s.iter().all(|st| st.x_r == 0.0),
        positive_samples,
        eligible_samples: eligible.len(),
        all_positive: positive_samples == eligible.len(),
        max_fd_rel_error,
        v_t_spans: spans(&times, &v_t),
        v_r_spans: spans(&times, &v_r),
    })
}
