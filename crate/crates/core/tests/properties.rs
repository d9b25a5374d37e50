use complexmech::algebra::{adjoint_defect, build_operator, Axis, GridSpec, OperatorKind, Units};
use complexmech::black_hole::BlackHoleModel;
use complexmech::cosmology::{accelerations, hamiltonian, integrate, CosmoState};
use complexmech::spatial_tunneling::{det, transfer_matrix, transmission_reflection, PiecewisePotential};
use complexmech::states::{
    boundary_mismatch, match_amplitudes, schrodinger_residual, spatial_tunnel_state, temporal_tunnel_state,
    HamiltonianSpec, Mode, MATCH_REL_TOL,
};
use complexmech::temporal_barrier::{
    integrate_classical, quantum_contrast, system_energy, ClassicalState, Model, TemporalProfile,
};
use proptest::prelude::*;

fn units() -> Units {
    Units::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operators_sit_exactly_in_their_class(n in 8usize..48, lo in -20.0f64..0.0, width in 0.5f64..30.0, hbar in 0.1f64..3.0) {
        let u = Units { hbar, ..Units::default() };
        for kind in OperatorKind::ALL {
            let grid = GridSpec::new(kind.axis(), lo, lo + width, n).unwrap();
            let op = build_operator(kind, &grid, &u).unwrap();
            prop_assert_eq!(adjoint_defect(&op).in_class(op.symmetry), Some(0.0));
        }
    }

    #[test]
    fn flux_is_conserved(
        steps in prop::collection::vec((0.05f64..1.5, -2.0f64..4.0), 1..5),
        e0 in 0.05f64..5.0,
        m in 0.2f64..3.0,
    ) {
        let mut q = -1.0;
        let mut bps = Vec::new();
        let mut values = vec![0.0];
        for (w, v) in &steps {
            bps.push(q);
            values.push(*v);
            q += w;
        }
        bps.push(q);
        values.push(0.0);
        let pot = PiecewisePotential::new(bps, values).unwrap();
        let s = transmission_reflection(&pot, e0, m, &units()).unwrap();
        prop_assert!((s.transmission + s.reflection - 1.0).abs() < 1e-9, "T + R = {}", s.transmission + s.reflection);
        let tm = transfer_matrix(&pot, e0, m, &units()).unwrap();
        let expected = tm.k_right / tm.k_left;
        prop_assert!((det(&tm.matrix) - expected).norm() < 1e-8 * tm.matrix.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().max(1.0));
    }

    #[test]
    fn spatial_labels_solve_their_region(v0 in 0.0f64..5.0, e0 in 0.01f64..5.0, m in 0.1f64..4.0, len in 0.1f64..3.0) {
        let s = spatial_tunnel_state(0.0, len, v0, e0, m, &units(), Mode::Literal).unwrap();
        let scale = e0.max(v0);
        for (region, v) in s.regions.iter().zip([0.0, v0, 0.0]) {
            prop_assert!(schrodinger_residual(region, HamiltonianSpec::Potential(v), m) <= 4.0 * f64::EPSILON * scale);
        }
        prop_assert_eq!(s.regions[0].label, s.regions[2].label);
        if v0 == 0.0 {
            prop_assert_eq!(s.regions[1].label, s.regions[0].label);
        }
    }

    #[test]
    fn matching_is_continuous_and_idempotent(v0 in 0.0f64..5.0, e0 in 0.01f64..5.0, m in 0.1f64..4.0, len in 0.1f64..2.0) {
        let matched = spatial_tunnel_state(0.0, len, v0, e0, m, &units(), Mode::Matched).unwrap();
        for b in boundary_mismatch(&matched, &units()).unwrap() {
            prop_assert!(b.worst_rel() < MATCH_REL_TOL, "{:?}", b);
        }
        let again = match_amplitudes(&matched, m, &units()).unwrap();
        for (a, b) in again.regions.iter().zip(&matched.regions) {
            prop_assert!((a.amp_fwd - b.amp_fwd).norm() <= 1e-9 * b.amp_fwd.norm().max(1.0));
            prop_assert!((a.amp_bwd - b.amp_bwd).norm() <= 1e-9 * b.amp_bwd.norm().max(1.0));
        }
        prop_assert_eq!(match_amplitudes(&again, m, &units()).unwrap(), match_amplitudes(&again, m, &units()).unwrap());
    }

    #[test]
    fn temporal_energy_identity(p0 in -5.0f64..5.0, w0 in 0.0f64..20.0, m in 0.1f64..5.0) {
        let (state, e) = temporal_tunnel_state(0.0, 1.0, w0, p0, m, &units(), Mode::Literal).unwrap();
        let scale = e.e0.abs().max(e.e_t.abs()).max(w0);
        prop_assert!((e.e_t + e.w0 - e.e0).abs() <= f64::EPSILON * scale);
        prop_assert_eq!(state.regions[2].label, state.regions[0].label);
        let drain = HamiltonianSpec::Drain { w: w0, total: e.e0 };
        prop_assert!(schrodinger_residual(&state.regions[1], drain, m) <= 4.0 * f64::EPSILON * scale.max(1.0));
    }

    #[test]
    fn quantum_label_survives_any_square_drain(p0 in 0.1f64..3.0, extra in 0.0f64..10.0, m in 0.2f64..3.0) {
        let e0 = p0 * p0 / (2.0 * m);
        let profile = TemporalProfile::Square { t_a: 0.0, t_b: 1.0, w0: e0 + extra };
        let report = quantum_contrast(&profile, p0, m, &units()).unwrap();
        prop_assert!(report.quantum_survives);
        prop_assert_eq!(report.state.regions[2].label, report.state.regions[0].label);
    }

    #[test]
    fn non_relativistic_bookkeeping_conserves_energy(p0 in 0.2f64..3.0, w_frac in 0.0f64..0.99, pi0 in 0.0f64..0.5) {
        let m = 1.0;
        let e_sys = (p0 * p0 - pi0 * pi0) / (2.0 * m);
        prop_assume!(e_sys > 0.0);
        let profile = TemporalProfile::SmoothBump { t1: 0.2, t_a: 0.7, t_b: 1.0, t2: 1.4, w0: w_frac * e_sys };
        let start = ClassicalState { p_re: p0, pi_im: pi0, ..ClassicalState::at_rest(m) };
        let run = integrate_classical(&start, &profile, Model::NonRel, 2e-3, 2.0, &units()).unwrap();
        prop_assert!(!run.destroyed());
        for row in &run.rows {
            let total = system_energy(&row.state, Model::NonRel, &units()) + row.w;
            prop_assert!((total - run.total_energy).abs() <= 1e-8 * run.total_energy.abs());
        }
        prop_assert!((run.last_state().p_re - p0).abs() <= 1e-6 * p0);
    }

    #[test]
    fn escape_momentum_partition(mass in 0.1f64..10.0, p0 in 0.01f64..3.0, r in 0.0f64..200.0) {
        let bh = BlackHoleModel::new(mass, 1.0, &units()).unwrap();
        let p = bh.escape_momentum(r, p0);
        let e0 = p0 * p0 / 2.0;
        let allowed = e0 + bh.potential(bh.horizon) >= bh.potential(r);
        prop_assert_eq!(p.is_allowed(), allowed);
        if r < bh.horizon {
            prop_assert_eq!(bh.force(r), 0.0);
        }
    }

    #[test]
    fn wkb_grows_with_energy(e_lo in 0.01f64..0.6, gap in 0.001f64..0.3, r_out in 3.0f64..40.0) {
        let bh = BlackHoleModel::new(1.0, 1.0, &units()).unwrap();
        let lo = bh.wkb_escape_probability(e_lo, r_out, &units()).unwrap();
        let hi = bh.wkb_escape_probability(e_lo + gap, r_out, &units()).unwrap();
        prop_assert!(lo > 0.0 && lo <= 1.0);
        prop_assert!(hi >= lo);
        let escapes = bh.classical_escape_with_energy(e_lo, r_out).verdict == complexmech::black_hole::EscapeVerdict::Escapes;
        prop_assert_eq!(lo == 1.0, escapes);
    }

    #[test]
    fn accelerations_are_positive_and_hamiltonian(q_t in 0.05f64..10.0, x in 1e-3f64..10.0, p_t in -2.0f64..2.0, pi in -2.0f64..2.0, k in 0.1f64..5.0, m in 0.1f64..5.0) {
        let s = CosmoState { t: 0.0, q_t, p_t, x_r: x, pi_r: pi, k, m };
        let a = accelerations(&s).unwrap();
        prop_assert!(a.a_t_re > 0.0 && a.a_r_im_mag > 0.0);
        let h = 1e-6;
        let dq = (hamiltonian(&CosmoState { q_t: q_t * (1.0 + h), ..s }).unwrap()
            - hamiltonian(&CosmoState { q_t: q_t * (1.0 - h), ..s }).unwrap()) / (2.0 * h * q_t);
        let dx = (hamiltonian(&CosmoState { x_r: x * (1.0 + h), ..s }).unwrap()
            - hamiltonian(&CosmoState { x_r: x * (1.0 - h), ..s }).unwrap()) / (2.0 * h * x);
        // Central differences lose about ε·|terms of H|/h to cancellation.
        let terms = (p_t * p_t + pi * pi) / (2.0 * m) + k * x * x / q_t;
        let noise = |scale: f64| 16.0 * f64::EPSILON * terms / (h * scale * m);
        prop_assert!((a.a_t_re + dq / m).abs() <= 1e-6 * a.a_t_re + noise(q_t));
        prop_assert!((a.a_r_im_mag - dx / m).abs() <= 1e-6 * a.a_r_im_mag + noise(x));
    }

    #[test]
    fn leapfrog_positions_obey_second_difference(x0 in 0.1f64..2.0, q0 in 0.5f64..3.0) {
        let start = CosmoState { t: 0.0, q_t: q0, p_t: 0.0, x_r: x0, pi_r: 0.0, k: 1.0, m: 1.0 };
        let dt = 1e-3;
        let traj = integrate(&start, dt, 0.05).unwrap();
        for w in traj.samples.windows(3) {
            let a = accelerations(&w[1]).unwrap();
            let fd_t = (w[2].q_t - 2.0 * w[1].q_t + w[0].q_t) / (dt * dt);
            let fd_r = (w[2].x_r - 2.0 * w[1].x_r + w[0].x_r) / (dt * dt);
            prop_assert!((fd_t - a.a_t_re).abs() <= 1e-6 * a.a_t_re.max(1.0));
            prop_assert!((fd_r - a.a_r_im_mag).abs() <= 1e-6 * a.a_r_im_mag.max(1.0));
        }
    }
}

#[test]
fn operators_refuse_foreign_axes() {
    let grid = GridSpec::new(Axis::T, 0.0, 1.0, 16).unwrap();
    assert!(build_operator(OperatorKind::MomentumRe, &grid, &units()).is_err());
}
