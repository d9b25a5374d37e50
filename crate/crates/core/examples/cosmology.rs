//! Toy universe: leapfrog run from rest, energy drift and the sign of both
//! accelerations.

use complexmech::cosmology::{accelerations, expansion_report, hamiltonian, integrate_strided, CosmoState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let start = CosmoState { t: 0.0, q_t: 1.0, p_t: 0.0, x_r: 1.0, pi_r: 0.0, k: 1.0, m: 1.0 };
    println!("H0 = {}", hamiltonian(&start)?);
    let traj = integrate_strided(&start, 1e-5, 1.0, 10_000)?;
    for s in &traj.samples {
        let a = accelerations(s)?;
        println!(
            "t = {:.1}: qT = {:.6}, xR = {:.6}, aT = {:.6}, aR = {:.6}",
            s.t, s.q_t, s.x_r, a.a_t_re, a.a_r_im_mag
        );
    }
    println!("max relative energy drift {:.2e}", traj.max_energy_drift());
    if let Some(report) = expansion_report(&traj) {
        println!("accelerations positive at {}/{} samples", report.positive_samples, report.eligible_samples);
    }
    Ok(())
}
