//! Square barrier: transfer-matrix transmission, the classical particle that
//! bounces, and the matched tunneling state.

use complexmech::algebra::Units;
use complexmech::spatial_tunneling::{
    classical_encounter, square_barrier_transmission, transmission_reflection, PiecewisePotential,
};
use complexmech::states::{boundary_mismatch, spatial_tunnel_state, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let units = Units::default();
    let (q_a, q_b, v0, m) = (0.0, 1.0, 2.0, 1.0);
    let pot = PiecewisePotential::square_barrier(q_a, q_b, v0)?;

    println!("{:>6} {:>12} {:>12} {:>12}  classical", "E0", "T", "R", "closed form");
    for e0 in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
        let s = transmission_reflection(&pot, e0, m, &units)?;
        let closed = square_barrier_transmission(e0, v0, q_b - q_a, m, &units);
        let enc = classical_encounter(-1.0, (2.0 * m * e0).sqrt(), &pot, m)?;
        let outcome = if enc.is_reflected() { "reflected" } else { "transmitted" };
        println!("{e0:>6.2} {:>12.8} {:>12.8} {closed:>12.8}  {outcome}", s.transmission, s.reflection);
    }

    let state = spatial_tunnel_state(q_a, q_b, v0, 1.0, m, &units, Mode::Matched)?;
    for b in boundary_mismatch(&state, &units)? {
        println!("boundary q = {}: relative mismatch {:.2e}", b.at, b.worst_rel());
    }
    println!("{}", serde_json::to_string_pretty(&state)?);
    Ok(())
}
