//! Finite-grid matrix representations of the six fundamental operators.
//!
//! Every operator acts on a single axis: the real coordinate `q_re`, the
//! imaginary coordinate `q_im`, or time `t`. The imaginary axis is stored by
//! its real magnitude `x`, with `q_im = i·x`; every factor of `i` coming from
//! that substitution is applied explicitly when the matrix is built.
//!
//! | kind          | axis   | matrix      | class              |
//! |---------------|--------|-------------|--------------------|
//! | `PositionRe`  | `q_re` | `diag(q)`   | self-adjoint       |
//! | `MomentumRe`  | `q_re` | `-iħ·D`     | self-adjoint       |
//! | `PositionIm`  | `x_im` | `i·diag(x)` | anti self-adjoint  |
//! | `MomentumIm`  | `x_im` | `-ħ·D`      | anti self-adjoint  |
//! | `Time`        | `t`    | `diag(t)`   | self-adjoint       |
//! | `Energy`      | `t`    | `+iħ·D`     | self-adjoint       |
//!
//! `D` is the central difference with periodic wrap. It is exactly
//! antisymmetric, so the symmetry classes above hold with zero defect.
//!
//! `-iħ ∂/∂q_im` becomes `-ħ ∂/∂x` after `q_im = i·x`, which is why the
//! imaginary momentum is a real antisymmetric matrix. The commutator of the
//! imaginary pair follows as `[i·x, -ħ∂_x] = iħ`; this constant is derived,
//! not quoted.
//!
//! A commutator of finite matrices is traceless, so `[Q, P] = iħ·I` can never
//! hold as a matrix identity. Heisenberg relations are checked on smooth
//! probe vectors supported away from the grid edges.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Minimum number of grid points accepted by [`GridSpec::new`].
pub const MIN_POINTS: usize = 8;

/// Relative threshold used by [`Classification::of`].
pub const CLASSIFY_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("grid needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("grid bounds must satisfy min < max (got min = {min}, max = {max})")]
    BadBounds { min: f64, max: f64 },
    #[error("operator {kind:?} lives on the {expected:?} axis, grid is on {found:?}")]
    AxisMismatch {
        kind: OperatorKind,
        expected: Axis,
        found: Axis,
    },
    #[error("operators are defined on different grids")]
    GridMismatch,
    #[error("state has {found} amplitudes, grid has {expected} points")]
    LengthMismatch { expected: usize, found: usize },
    #[error("state vector has zero norm")]
    ZeroState,
    #[error("state vector has non-finite entries")]
    NonFinite,
    #[error("row range {start}..{end} is empty or outside 0..{n}")]
    BadRows { start: usize, end: usize, n: usize },
    #[error("units must be strictly positive (hbar = {hbar}, c = {c}, gamma = {grav})")]
    BadUnits { hbar: f64, c: f64, grav: f64 },
}

/// Physical scales. `c_im = i·c` is never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Units {
    pub hbar: f64,
    /// Speed of light in the real world.
    pub c: f64,
    /// Gravitational constant.
    #[serde(rename = "gamma")]
    pub grav: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            grav: 1.0,
        }
    }
}

impl Units {
    pub fn validate(&self) -> Result<(), AlgebraError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.hbar) && ok(self.c) && ok(self.grav) {
            Ok(())
        } else {
            Err(AlgebraError::BadUnits {
                hbar: self.hbar,
                c: self.c,
                grav: self.grav,
            })
        }
    }

    /// `c_im² = (i·c)² = -c²`.
    pub fn c_im_squared(&self) -> f64 {
        -self.c * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Real coordinate.
    QRe,
    /// Magnitude `x` of the imaginary coordinate `q_im = i·x`.
    XIm,
    /// Time.
    T,
}

/// Uniform grid `min + k·Δ`, `k = 0..n`, with `Δ = (max - min)/(n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(axis: Axis, min: f64, max: f64, n: usize) -> Result<Self, AlgebraError> {
        if n < MIN_POINTS {
            return Err(AlgebraError::TooFewPoints(n));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(AlgebraError::BadBounds { min, max });
        }
        Ok(Self { axis, min, max, n })
    }

    /// Grid of `n` points covering one period `[start, start + period)`.
    ///
    /// The last point sits one spacing before `start + period`, so the
    /// periodic wrap of the difference stencil closes the period exactly.
    pub fn periodic(axis: Axis, start: f64, period: f64, n: usize) -> Result<Self, AlgebraError> {
        let step = period / n as f64;
        Self::new(axis, start, start + step * (n - 1) as f64, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        self.min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// Rows whose stencil never wraps around the grid edge.
    pub fn interior_rows(&self) -> Range<usize> {
        1..self.n - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    PositionRe,
    MomentumRe,
    PositionIm,
    MomentumIm,
    Time,
    Energy,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 6] = [
        OperatorKind::PositionRe,
        OperatorKind::MomentumRe,
        OperatorKind::PositionIm,
        OperatorKind::MomentumIm,
        OperatorKind::Time,
        OperatorKind::Energy,
    ];

    pub fn axis(self) -> Axis {
        match self {
            OperatorKind::PositionRe | OperatorKind::MomentumRe => Axis::QRe,
            OperatorKind::PositionIm | OperatorKind::MomentumIm => Axis::XIm,
            OperatorKind::Time | OperatorKind::Energy => Axis::T,
        }
    }

    pub fn symmetry(self) -> Symmetry {
        match self {
            OperatorKind::PositionIm | OperatorKind::MomentumIm => Symmetry::AntiSelfAdjoint,
            _ => Symmetry::SelfAdjoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    SelfAdjoint,
    AntiSelfAdjoint,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOperator {
    pub matrix: DMatrix<Complex64>,
    pub symmetry: Symmetry,
    pub grid: GridSpec,
}

impl GridOperator {
    pub fn axis(&self) -> Axis {
        self.grid.axis
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector, AlgebraError> {
        state.check_len(&self.grid)?;
        Ok(StateVector {
            amplitudes: &self.matrix * &state.amplitudes,
        })
    }

    /// All eigenvalues, from a complex Schur decomposition.
    ///
    /// The general (non-Hermitian) solver is used on purpose, so reality of
    /// the spectrum is a measured property rather than an assumption.
    pub fn eigenvalues(&self) -> Option<DVector<Complex64>> {
        Schur::new(self.matrix.clone()).eigenvalues()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self {
            amplitudes: DVector::from_vec(amplitudes),
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        Self::new(grid.points().into_iter().map(f).collect())
    }

    /// Normalised Gaussian shape `exp(-(x - center)² / (2 width²))`.
    pub fn gaussian(grid: &GridSpec, center: f64, width: f64) -> Self {
        Self::from_fn(grid, |x| {
            let u = (x - center) / width;
            Complex64::new((-0.5 * u * u).exp(), 0.0)
        })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    fn check_len(&self, grid: &GridSpec) -> Result<(), AlgebraError> {
        if self.len() != grid.n {
            return Err(AlgebraError::LengthMismatch {
                expected: grid.n,
                found: self.len(),
            });
        }
        if self.amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(())
    }
}

/// Antisymmetric central difference `(ψ[k+1] - ψ[k-1]) / 2Δ`, indices mod n.
fn central_difference(grid: &GridSpec) -> DMatrix<f64> {
    let n = grid.n;
    let w = 0.5 / grid.spacing();
    let mut d = DMatrix::zeros(n, n);
    for k in 0..n {
        d[(k, (k + 1) % n)] = w;
        d[(k, (k + n - 1) % n)] = -w;
    }
    d
}

pub fn build_operator(
    kind: OperatorKind,
    grid: &GridSpec,
    units: &Units,
) -> Result<GridOperator, AlgebraError> {
    units.validate()?;
    if grid.n < MIN_POINTS {
        return Err(AlgebraError::TooFewPoints(grid.n));
    }
    if kind.axis() != grid.axis {
        return Err(AlgebraError::AxisMismatch {
            kind,
            expected: kind.axis(),
            found: grid.axis,
        });
    }
    let hbar = units.hbar;
    let diag = |scale: Complex64| {
        DMatrix::from_diagonal(&DVector::from_iterator(
            grid.n,
            grid.points().into_iter().map(|x| scale * x),
        ))
    };
    let deriv = |scale: Complex64| central_difference(grid).map(|v| scale * v);
    let matrix = match kind {
        OperatorKind::PositionRe | OperatorKind::Time => diag(Complex64::new(1.0, 0.0)),
        OperatorKind::PositionIm => diag(I),
        OperatorKind::MomentumRe => deriv(-I * hbar),
        OperatorKind::MomentumIm => deriv(Complex64::new(-hbar, 0.0)),
        OperatorKind::Energy => deriv(I * hbar),
    };
    Ok(GridOperator {
        matrix,
        symmetry: kind.symmetry(),
        grid: *grid,
    })
}

/// Self-adjoint and anti self-adjoint defects of one operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjointDefect {
    /// `max |M - M†|`
    pub hermitian: f64,
    /// `max |M + M†|`
    pub anti_hermitian: f64,
}

impl AdjointDefect {
    /// Defect in the operator's declared class, `None` for `General`.
    pub fn in_class(&self, symmetry: Symmetry) -> Option<f64> {
        match symmetry {
            Symmetry::SelfAdjoint => Some(self.hermitian),
            Symmetry::AntiSelfAdjoint => Some(self.anti_hermitian),
            Symmetry::General => None,
        }
    }
}

pub fn adjoint_defect(op: &GridOperator) -> AdjointDefect {
    let m = &op.matrix;
    let n = m.nrows();
    let mut hermitian = 0.0_f64;
    let mut anti_hermitian = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let adj = m[(j, i)].conj();
            hermitian = hermitian.max((m[(i, j)] - adj).norm());
            anti_hermitian = anti_hermitian.max((m[(i, j)] + adj).norm());
        }
    }
    AdjointDefect {
        hermitian,
        anti_hermitian,
    }
}

fn same_grid(a: &GridOperator, b: &GridOperator) -> Result<(), AlgebraError> {
    if a.grid == b.grid {
        Ok(())
    } else {
        Err(AlgebraError::GridMismatch)
    }
}

/// `AB - BA`, tagged `General`.
pub fn commutator(a: &GridOperator, b: &GridOperator) -> Result<GridOperator, AlgebraError> {
    same_grid(a, b)?;
    let ab = &a.matrix * &b.matrix;
    let ba = &b.matrix * &a.matrix;
    Ok(GridOperator {
        matrix: ab - ba,
        symmetry: Symmetry::General,
        grid: a.grid,
    })
}

/// Fraction of points at each grid edge that a probe must stay out of.
pub const PROBE_MARGIN: f64 = 0.1;
/// Largest amplitude (relative to the peak) tolerated inside the margin.
pub const PROBE_EDGE_TOL: f64 = 1e-3;

/// Frozen residual coefficient for a width-2 Gaussian probe, measured at
/// `n = 256` on `[-10, 10]` (0.1094) and rounded up.
pub const COMMUTATOR_RESIDUAL_COEFF: f64 = 0.12;

/// Width of the Gaussian probe the coefficient was frozen for.
pub const REFERENCE_PROBE_WIDTH: f64 = 2.0;

/// `C·ħ·Δ²·(w_ref/w)²`: the residual scales with the probe's curvature.
pub fn commutator_bound(grid: &GridSpec, units: &Units, probe_width: f64) -> f64 {
    let dx = grid.spacing();
    let scale = REFERENCE_PROBE_WIDTH / probe_width;
    COMMUTATOR_RESIDUAL_COEFF * units.hbar * dx * dx * scale * scale
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorResidual {
    /// `‖(AB - BA)ψ - expected·ψ‖ / ‖ψ‖`
    pub residual: f64,
    /// The probe has non-negligible weight inside the edge margin, where the
    /// periodic wrap pollutes the stencil.
    pub boundary_warning: bool,
}

pub fn commutator_residual(
    a: &GridOperator,
    b: &GridOperator,
    expected: Complex64,
    probe: &StateVector,
) -> Result<CommutatorResidual, AlgebraError> {
    same_grid(a, b)?;
    probe.check_len(&a.grid)?;
    let norm = probe.norm();
    if norm == 0.0 {
        return Err(AlgebraError::ZeroState);
    }
    let psi = &probe.amplitudes;
    let abpsi = &a.matrix * (&b.matrix * psi);
    let bapsi = &b.matrix * (&a.matrix * psi);
    let defect = abpsi - bapsi - psi * expected;
    Ok(CommutatorResidual {
        residual: defect.norm() / norm,
        boundary_warning: touches_margin(probe),
    })
}

fn touches_margin(probe: &StateVector) -> bool {
    let n = probe.len();
    let margin = ((n as f64) * PROBE_MARGIN).ceil() as usize;
    let peak = probe.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let limit = PROBE_EDGE_TOL * peak;
    probe
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k < margin || *k >= n.saturating_sub(margin))
        .any(|(_, z)| z.norm() > limit)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Real,
    Imaginary,
    Mixed,
    Zero,
}

impl Classification {
    /// Real when `|Im z| < 1e-9·|z|`, imaginary when `|Re z| < 1e-9·|z|`.
    pub fn of(z: Complex64) -> Self {
        let size = z.norm();
        if size == 0.0 {
            Classification::Zero
        } else if z.im.abs() < CLASSIFY_REL_TOL * size {
            Classification::Real
        } else if z.re.abs() < CLASSIFY_REL_TOL * size {
            Classification::Imaginary
        } else {
            Classification::Mixed
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: Complex64,
    pub class: Classification,
}

/// `⟨ψ|M|ψ⟩ / ⟨ψ|ψ⟩` over every row.
///
/// For a self-adjoint `M` this is always real, whatever `ψ` is. To see the
/// imaginary momentum of a decaying state use [`rayleigh_eigenvalue_rows`]
/// restricted to rows that do not wrap.
pub fn rayleigh_eigenvalue(
    op: &GridOperator,
    state: &StateVector,
) -> Result<Expectation, AlgebraError> {
    rayleigh_eigenvalue_rows(op, state, 0..op.grid.n)
}

/// Rayleigh quotient restricted to `rows`: `Σ_k conj(ψ_k)(Mψ)_k / Σ_k |ψ_k|²`.
///
/// On an eigenvector of the local stencil this returns the eigenvalue even
/// when the vector is not periodic.
pub fn rayleigh_eigenvalue_rows(
    op: &GridOperator,
    state: &StateVector,
    rows: Range<usize>,
) -> Result<Expectation, AlgebraError> {
    state.check_len(&op.grid)?;
    let n = op.grid.n;
    if rows.start >= rows.end || rows.end > n {
        return Err(AlgebraError::BadRows {
            start: rows.start,
            end: rows.end,
            n,
        });
    }
    let psi = &state.amplitudes;
    let mpsi = &op.matrix * psi;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for k in rows {
        num += psi[k].conj() * mpsi[k];
        den += psi[k].norm_sqr();
    }
    if den == 0.0 {
        return Err(AlgebraError::ZeroState);
    }
    let value = num / den;
    Ok(Expectation {
        value,
        class: Classification::of(value),
    })
}
