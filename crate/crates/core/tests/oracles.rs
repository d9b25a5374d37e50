//! Library results against independent closed forms and root finders.

use complexmech::algebra::Units;
use complexmech::black_hole::BlackHoleModel;
use complexmech::cosmology::{integrate, CosmoState};
use complexmech::spatial_tunneling::{transmission_reflection, PiecewisePotential};
use complexmech::temporal_barrier::{integrate_classical, ClassicalState, EventKind, Model, TemporalProfile};

/// Textbook single-barrier transmission, with ħ kept explicit.
fn barrier_oracle(e: f64, v: f64, a: f64, m: f64, hbar: f64) -> f64 {
    if (e - v).abs() < 1e-300 {
        return 1.0 / (1.0 + m * a * a * v / (2.0 * hbar * hbar));
    }
    let q = (2.0 * m * (v - e).abs()).sqrt() * a / hbar;
    let s2 = if e < v { q.sinh().powi(2) } else { q.sin().powi(2) };
    1.0 / (1.0 + v * v * s2 / (4.0 * e * (v - e).abs()))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn reference_barrier_value() {
    let units = Units::default();
    let pot = PiecewisePotential::square_barrier(0.0, 1.0, 2.0).unwrap();
    let t = transmission_reflection(&pot, 1.0, 1.0, &units).unwrap().transmission;
    let oracle = barrier_oracle(1.0, 2.0, 1.0, 1.0, 1.0);
    assert!((oracle - 0.210_771_093_966_13).abs() < 1e-13);
    assert!((t - oracle).abs() < 1e-4);
    assert!((t - oracle).abs() / oracle < 1e-10);
}

#[test]
fn barrier_sweep_with_units() {
    let units = Units { hbar: 0.7, ..Units::default() };
    let (v0, a, m) = (3.0, 0.8, 1.9);
    let pot = PiecewisePotential::square_barrier(-0.3, -0.3 + a, v0).unwrap();
    for i in 1..=100 {
        let e = 0.06 * i as f64;
        let s = transmission_reflection(&pot, e, m, &units).unwrap();
        let oracle = barrier_oracle(e, v0, a, m, units.hbar);
        assert!((s.transmission - oracle).abs() / oracle < 1e-10, "E = {e}");
        assert!((s.transmission + s.reflection - 1.0).abs() < 1e-10);
    }
}

#[test]
fn smooth_drain_destruction_converges_to_root() {
    let units = Units::default();
    let profile = TemporalProfile::SmoothBump { t1: 0.5, t_a: 1.5, t_b: 2.0, t2: 3.0, w0: 2.0 };
    let start = ClassicalState { p_re: 1.3, ..ClassicalState::at_rest(1.0) };
    let e0 = 1.3 * 1.3 / 2.0;
    // Smoothstep written out on the rising edge.
    let rise = |t: f64| {
        let s = (t - 0.5) / 1.0;
        2.0 * s * s * (3.0 - 2.0 * s)
    };
    let root = bisect(0.5, 1.5, |t| e0 - rise(t));
    let mut last_gap = f64::INFINITY;
    for dt in [4e-3, 2e-3, 1e-3, 5e-4] {
        let run = integrate_classical(&start, &profile, Model::NonRel, dt, 4.0, &units).unwrap();
        let hit = run.first(EventKind::Destroyed).unwrap().t;
        let gap = (hit - root).abs();
        assert!(gap < dt, "dt = {dt}: gap {gap}");
        assert!(gap <= last_gap * 1.01 || gap < 1e-9);
        last_gap = gap;
    }
}

#[test]
fn horizon_from_free_fall() {
    for (mass, grav, c) in [(1.0, 1.0, 1.0), (3.0, 0.5, 2.0), (1e3, 6.7e-3, 30.0)] {
        let units = Units { grav, c, ..Units::default() };
        let bh = BlackHoleModel::new(mass, 1.0, &units).unwrap();
        // Speed reached from rest at infinity equals c: ½c² = γM/r.
        let r = bisect(1e-9, 1e9, |r| 0.5 * c * c - grav * mass / r);
        assert!((bh.horizon - r).abs() / r < 1e-12, "{} vs {r}", bh.horizon);
    }
}

#[test]
fn wkb_action_closed_form() {
    let units = Units { hbar: 0.9, ..Units::default() };
    let bh = BlackHoleModel::new(1.3, 0.8, &units).unwrap();
    let g = 1.3 * 0.8;
    let u = bh.well_depth();
    for (e0, r_out) in [(0.1, 6.0), (0.25, 20.0), (0.35, 30.0)] {
        let d = u - e0;
        let theta = ((d * r_out / g).sqrt()).acosh();
        let action = (2.0 * 0.8_f64).sqrt() * g / d.sqrt() * (theta.sinh() * theta.cosh() - theta);
        let oracle = (-2.0 * action / units.hbar).exp();
        let p = bh.wkb_escape_probability(e0, r_out, &units).unwrap();
        assert!((p.ln() - oracle.ln()).abs() < 1e-6 * oracle.ln().abs(), "{p} vs {oracle}");
    }
}

#[test]
fn leapfrog_is_second_order() {
    let start = CosmoState { t: 0.0, q_t: 1.0, p_t: 0.2, x_r: 0.7, pi_r: -0.1, k: 1.0, m: 1.0 };
    let at_end = |dt: f64| *integrate(&start, dt, 0.5).unwrap().samples.last().unwrap();
    let reference = at_end(1e-4);
    let err = |dt: f64| {
        let s = at_end(dt);
        (s.q_t - reference.q_t).hypot(s.x_r - reference.x_r)
    };
    let (coarse, fine) = (err(1e-2), err(5e-3));
    let order = (coarse / fine).log2();
    assert!((order - 2.0).abs() < 0.1, "observed order {order}");
}
