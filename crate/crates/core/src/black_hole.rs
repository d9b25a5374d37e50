//! Finite-well black hole.
//!
//! A particle falling from rest at infinity reaches the speed of light at
//! `r_E = 2γM/c²` (Newtonian energetics, `½c² = γM/r`). The potential is
//! `-γmM/r` outside that radius and held at its horizon value inside it, so
//! the gravitational force vanishes in the interior and nothing diverges at
//! `r = 0`.
//!
//! A particle leaving the interior with kinetic energy `E0 = p0²/2m` has the
//! local momentum `√(2m(V(r_E) + E0 - V(r)))`. It turns imaginary beyond the
//! classical turning radius when `E0` is below the well depth `γmM/r_E`.
//!
//! That forbidden shell extends to infinity: the asymptotic value of the
//! potential sits above the particle's total energy. The barrier-penetration
//! estimate therefore needs an explicit outer radius `r_out`, and asking
//! for `r_out = ∞` with a non-empty shell is an error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Classification, Units};
use crate::quadrature::{adaptive_simpson, QuadratureError};

/// Relative tolerance of the action integral.
pub const ACTION_REL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlackHoleError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("forbidden shell starts at r = {turning_radius} and extends to infinity; the action diverges")]
    NonIntegrable { turning_radius: f64 },
    #[error("action quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Units(#[from] AlgebraError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, BlackHoleError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(BlackHoleError::NotPositive { name, value })
    }
}

pub fn horizon_radius(hole_mass: f64, grav: f64, c: f64) -> f64 {
    2.0 * grav * hole_mass / (c * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackHoleModel {
    #[serde(rename = "M")]
    pub hole_mass: f64,
    #[serde(rename = "m")]
    pub particle_mass: f64,
    #[serde(rename = "gamma")]
    pub grav: f64,
    pub c: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeMomentum {
    pub value: Complex64,
    pub class: Classification,
}

impl EscapeMomentum {
    /// Real (or zero) momentum: the particle is classically allowed here.
    pub fn is_allowed(&self) -> bool {
        matches!(self.class, Classification::Real | Classification::Zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeVerdict {
    Escapes,
    TurnsBack,
    /// No outward motion at all.
    Trapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalEscape {
    pub verdict: EscapeVerdict,
    /// `∞` when the particle escapes.
    pub turning_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub r: f64,
    pub potential: f64,
    pub momentum: Complex64,
    pub allowed: bool,
}

impl BlackHoleModel {
    pub fn new(hole_mass: f64, particle_mass: f64, units: &Units) -> Result<Self, BlackHoleError> {
        units.validate()?;
        let hole_mass = positive("M", hole_mass)?;
        let particle_mass = positive("m", particle_mass)?;
        Ok(Self {
            hole_mass,
            particle_mass,
            grav: units.grav,
            c: units.c,
            horizon: horizon_radius(hole_mass, units.grav, units.c),
        })
    }

    /// `γmM`
    fn coupling(&self) -> f64 {
        self.grav * self.particle_mass * self.hole_mass
    }

    /// Depth `γmM/r_E` of the flat interior.
    pub fn well_depth(&self) -> f64 {
        self.coupling() / self.horizon
    }

    pub fn kinetic_energy(&self, p0_re: f64) -> f64 {
        p0_re * p0_re / (2.0 * self.particle_mass)
    }

    pub fn potential(&self, r: f64) -> f64 {
        -self.coupling() / r.max(self.horizon)
    }

    /// Radial force `-dV/dr`; zero inside the horizon.
    pub fn force(&self, r: f64) -> f64 {
        if r < self.horizon {
            0.0
        } else {
            -self.coupling() / (r * r)
        }
    }

    pub fn escape_momentum(&self, r: f64, p0_re: f64) -> EscapeMomentum {
        let e0 = self.kinetic_energy(p0_re);
        let arg = 2.0 * self.particle_mass * (self.potential(self.horizon) + e0 - self.potential(r));
        let value = Complex64::new(arg, 0.0).sqrt();
        EscapeMomentum {
            value,
            class: Classification::of(value),
        }
    }

    /// `dp/dr` of the local momentum, from `2p·p' = -2m·V'(r)`.
    pub fn escape_momentum_slope(&self, r: f64, p0_re: f64) -> Complex64 {
        let p = self.escape_momentum(r, p0_re).value;
        let dv = -self.force(r);
        -self.particle_mass * dv / p
    }

    /// Radius where the local momentum vanishes, `∞` when it never does.
    pub fn turning_radius(&self, e0: f64) -> f64 {
        let deficit = self.well_depth() - e0;
        if deficit <= 0.0 {
            f64::INFINITY
        } else {
            self.coupling() / deficit
        }
    }

    pub fn classical_escape(&self, p0_re: f64) -> ClassicalEscape {
        self.classical_escape_to(p0_re, f64::INFINITY)
    }

    /// Whether an outward particle starting inside the horizon reaches `r_out`.
    pub fn classical_escape_to(&self, p0_re: f64, r_out: f64) -> ClassicalEscape {
        if p0_re == 0.0 {
            return ClassicalEscape {
                verdict: EscapeVerdict::Trapped,
                turning_radius: self.horizon,
            };
        }
        self.classical_escape_with_energy(self.kinetic_energy(p0_re), r_out)
    }

    /// [`Self::classical_escape_to`] for a given kinetic energy, without the
    /// rounding of a momentum round trip.
    pub fn classical_escape_with_energy(&self, e0: f64, r_out: f64) -> ClassicalEscape {
        if e0 <= 0.0 {
            return ClassicalEscape {
                verdict: EscapeVerdict::Trapped,
                turning_radius: self.horizon,
            };
        }
        let turning_radius = self.turning_radius(e0);
        let verdict = if turning_radius >= r_out {
            EscapeVerdict::Escapes
        } else {
            EscapeVerdict::TurnsBack
        };
        ClassicalEscape {
            verdict,
            turning_radius,
        }
    }

    /// `exp(-(2/ħ)·∫|Im p(r)| dr)` over the forbidden part of `[r_E, r_out]`.
    ///
    /// Returns exactly 1 when that part is empty. The square-root edge at the
    /// turning radius is removed with `r = r_t + u²` before integrating.
    pub fn wkb_escape_probability(&self, e0: f64, r_out: f64, units: &Units) -> Result<f64, BlackHoleError> {
        units.validate()?;
        let e0 = positive("E0", e0)?;
        if r_out.is_nan() || r_out <= 0.0 {
            return Err(BlackHoleError::NotPositive { name: "r_out", value: r_out });
        }
        let r_t = self.turning_radius(e0);
        if r_t >= r_out {
            return Ok(1.0);
        }
        if r_out.is_infinite() {
            return Err(BlackHoleError::NonIntegrable { turning_radius: r_t });
        }
        let p0 = (2.0 * self.particle_mass * e0).sqrt();
        let integrand = |u: f64| 2.0 * u * self.escape_momentum(r_t + u * u, p0).value.im.abs();
        let action = adaptive_simpson(integrand, 0.0, (r_out - r_t).sqrt(), ACTION_REL_TOL * 1e-3)?;
        Ok((-2.0 * action / units.hbar).exp())
    }

    pub fn radial_profile(&self, p0_re: f64, r_max: f64, points: usize) -> Result<Vec<ProfileRow>, BlackHoleError> {
        positive("r_max", r_max)?;
        let n = points.max(2);
        Ok((0..n)
            .map(|i| {
                let r = r_max * i as f64 / (n - 1) as f64;
                let p = self.escape_momentum(r, p0_re);
                ProfileRow {
                    r,
                    potential: self.potential(r),
                    momentum: p.value,
                    allowed: p.is_allowed(),
                }
            })
            .collect())
    }
}
