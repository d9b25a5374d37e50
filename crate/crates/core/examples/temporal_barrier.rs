//! A classical particle drained by a smooth energy bump, and the quantum state
//! that crosses a square drain untouched.

use complexmech::algebra::Units;
use complexmech::temporal_barrier::{
    integrate_classical, quantum_contrast, ClassicalState, Model, TemporalProfile,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let units = Units::default();
    let start = ClassicalState { p_re: 1.0, ..ClassicalState::at_rest(1.0) };
    let bump = TemporalProfile::SmoothBump { t1: 0.5, t_a: 1.0, t_b: 2.0, t2: 2.5, w0: 1.0 };

    for model in [Model::NonRel, Model::Rel] {
        let run = integrate_classical(&start, &bump, model, 1e-3, 3.0, &units)?;
        println!("{model:?}: {} rows", run.rows.len());
        for ev in &run.events {
            println!("  {:<16} t = {:.6}  mass sign {}", ev.kind.to_string(), ev.t, ev.state.mass_sign);
        }
    }

    let square = TemporalProfile::Square { t_a: 1.0, t_b: 2.0, w0: 1.0 };
    let report = quantum_contrast(&square, 1.0, 1.0, &units)?;
    println!(
        "E0 = {}, E_T = {}, W0 = {}; classical {:?}; quantum label preserved: {}",
        report.energies.e0, report.energies.e_t, report.energies.w0, report.classical, report.quantum_survives
    );
    Ok(())
}
