//! Finite-well black hole: where the escape momentum turns imaginary and how
//! the barrier-penetration estimate grows with the launch energy.

use complexmech::algebra::Units;
use complexmech::black_hole::BlackHoleModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let units = Units::default();
    let bh = BlackHoleModel::new(1.0, 1.0, &units)?;
    println!("r_E = {}, well depth = {}", bh.horizon, bh.well_depth());

    let p0 = 0.6;
    for r in [0.0, 1.0, 2.0, 3.0, 3.125, 4.0, 10.0] {
        let p = bh.escape_momentum(r, p0);
        println!("r = {r:>6}: V = {:>8.5}, p = {:.5} ({:?})", bh.potential(r), p.value, p.class);
    }

    let r_out = 10.0;
    for e0 in [0.05_f64, 0.1, 0.2, 0.3, 0.4, 0.45, 0.5] {
        let escape = bh.classical_escape_with_energy(e0, r_out);
        let prob = bh.wkb_escape_probability(e0, r_out, &units)?;
        println!("E0 = {e0:.2}: classical {:?}, P = {prob:.6e}", escape.verdict);
    }
    Ok(())
}
