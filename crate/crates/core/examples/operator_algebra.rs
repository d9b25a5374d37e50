//! Builds the six grid operators, checks their adjoint class and spectra, and
//! probes the three canonical commutators with a Gaussian.

use complexmech::algebra::{
    adjoint_defect, build_operator, commutator_bound, commutator_residual, Axis, GridSpec, OperatorKind, StateVector,
    Units,
};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let units = Units::default();
    for kind in OperatorKind::ALL {
        let grid = GridSpec::new(kind.axis(), -10.0, 10.0, 64)?;
        let op = build_operator(kind, &grid, &units)?;
        let defect = adjoint_defect(&op).in_class(op.symmetry).unwrap_or(f64::NAN);
        let eig = op.eigenvalues().ok_or("no convergence")?;
        let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        println!("{kind:?}: {:?}, defect {defect:e}, spectral radius {radius:.4}", op.symmetry);
    }

    let pairs = [
        ("[q_re, p_re]", Axis::QRe, OperatorKind::PositionRe, OperatorKind::MomentumRe, 1.0),
        ("[q_im, p_im]", Axis::XIm, OperatorKind::PositionIm, OperatorKind::MomentumIm, 1.0),
        ("[t, s]", Axis::T, OperatorKind::Time, OperatorKind::Energy, -1.0),
    ];
    for (label, axis, a, b, sign) in pairs {
        let grid = GridSpec::new(axis, -10.0, 10.0, 256)?;
        let (oa, ob) = (build_operator(a, &grid, &units)?, build_operator(b, &grid, &units)?);
        let probe = StateVector::gaussian(&grid, 0.0, 2.0);
        let res = commutator_residual(&oa, &ob, Complex64::new(0.0, sign * units.hbar), &probe)?;
        println!(
            "{label} = {}iħ: residual {:.3e} (bound {:.3e})",
            if sign > 0.0 { "+" } else { "-" },
            res.residual,
            commutator_bound(&grid, &units, 2.0)
        );
    }
    Ok(())
}
