//! Acceptance suite: one report line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Exits
//! non-zero when a criterion fails for any reason other than a documented
//! known limit, which is still reported as FAIL.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use complexmech::algebra::{
    adjoint_defect, build_operator, commutator_bound, commutator_residual, rayleigh_eigenvalue_rows, Axis,
    Classification, GridSpec, OperatorKind, StateVector, Symmetry, Units,
};
use complexmech::black_hole::{BlackHoleModel, EscapeVerdict};
use complexmech::cosmology::{accelerations, hamiltonian, integrate, CosmoState};
use complexmech::spatial_tunneling::{classical_encounter, transmission_reflection, PiecewisePotential};
use complexmech::states::{spatial_tunnel_state, Mode};
use complexmech::temporal_barrier::{
    integrate_classical, quantum_contrast, relativistic_energy, ClassicalState, EventKind, Model, TemporalProfile,
};
use num_complex::Complex64;
use proptest::test_runner::{RngAlgorithm, TestRng};
use proptest::prelude::RngExt;

/// Measurements gathered for one criterion.
struct Criterion {
    parts: Vec<String>,
    pass: bool,
    /// A failure outside the documented known limits.
    unexpected: bool,
}

impl Criterion {
    fn new() -> Self {
        Self { parts: Vec::new(), pass: true, unexpected: false }
    }

    fn record(&mut self, ok: bool, part: String) {
        self.pass &= ok;
        self.unexpected |= !ok;
        self.parts.push(part);
    }

    /// Passes when `value <= tol`.
    fn within(&mut self, label: &str, value: f64, tol: f64) {
        let ok = value <= tol;
        self.record(ok, format!("{label}={value:.3e}{}{tol:.1e}", if ok { "<=" } else { ">" }));
    }

    fn holds(&mut self, label: &str, ok: bool) {
        self.record(ok, format!("{label}={}", if ok { "yes" } else { "no" }));
    }

    fn count(&mut self, label: &str, bad: usize, total: usize) {
        self.record(bad == 0, format!("{label}={}/{total}", total - bad));
    }

    /// Like `count`, but a shortfall is a documented limit of f64 arithmetic
    /// and fails the criterion without failing the suite.
    fn count_known_limit(&mut self, label: &str, bad: usize, total: usize, limit: &str) {
        self.pass &= bad == 0;
        let note = if bad == 0 { String::new() } else { format!(" [known limit: {limit}]") };
        self.parts.push(format!("{label}={}/{total}{note}", total - bad));
    }
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

/// Closed-form single-barrier transmission.
fn barrier_oracle(e: f64, v: f64, a: f64, m: f64, hbar: f64) -> f64 {
    let q = (2.0 * m * (v - e).abs()).sqrt() * a / hbar;
    let s2 = if e < v { q.sinh().powi(2) } else { q.sin().powi(2) };
    1.0 / (1.0 + v * v * s2 / (4.0 * e * (v - e).abs()))
}

fn operator_symmetry() -> Criterion {
    let mut c = Criterion::new();
    let units = Units::default();
    let (mut defect, mut axis) = (0.0_f64, 0.0_f64);
    for kind in OperatorKind::ALL {
        let grid = GridSpec::new(kind.axis(), -10.0, 10.0, 256).unwrap();
        let op = build_operator(kind, &grid, &units).unwrap();
        defect = defect.max(adjoint_defect(&op).in_class(op.symmetry).unwrap_or(f64::INFINITY));
        let eig = op.eigenvalues().expect("eigenvalues converge");
        let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let off = eig
            .iter()
            .map(|z| if op.symmetry == Symmetry::SelfAdjoint { z.im.abs() } else { z.re.abs() })
            .fold(0.0, f64::max);
        axis = axis.max(off / radius);
    }
    c.within("adjoint_defect", defect, 0.0);
    c.within("spectrum_off_axis_rel", axis, 1e-10);
    c
}

fn heisenberg_probes() -> Criterion {
    let mut c = Criterion::new();
    let units = Units::default();
    let pairs = [
        ("q_re", Axis::QRe, OperatorKind::PositionRe, OperatorKind::MomentumRe, 1.0),
        ("q_im", Axis::XIm, OperatorKind::PositionIm, OperatorKind::MomentumIm, 1.0),
        ("t_s", Axis::T, OperatorKind::Time, OperatorKind::Energy, -1.0),
    ];
    for (name, axis, a, b, sign) in pairs {
        let grid = GridSpec::new(axis, -10.0, 10.0, 256).unwrap();
        let oa = build_operator(a, &grid, &units).unwrap();
        let ob = build_operator(b, &grid, &units).unwrap();
        let probe = StateVector::gaussian(&grid, 0.0, 2.0);
        let expected = Complex64::new(0.0, sign * units.hbar);
        let res = commutator_residual(&oa, &ob, expected, &probe).unwrap();
        let bound = commutator_bound(&grid, &units, 2.0);
        c.within(name, res.residual, bound);
        c.holds(&format!("{name}_clear_of_edges"), !res.boundary_warning);
        if name == "t_s" {
            let flipped = commutator_residual(&oa, &ob, -expected, &probe).unwrap();
            c.holds("t_s_sign_is_minus", flipped.residual > 1e3 * bound);
        }
    }
    c
}

const SWEEP: usize = 100;

fn sweep_energy(i: usize) -> f64 {
    0.02 + (6.0 - 0.02) * i as f64 / (SWEEP - 1) as f64
}

fn scattering_oracle() -> Criterion {
    let mut c = Criterion::new();
    let units = Units::default();
    let pot = PiecewisePotential::square_barrier(0.0, 1.0, 2.0).unwrap();
    let (mut closed, mut flux) = (0.0_f64, 0.0_f64);
    for i in 0..SWEEP {
        let e = sweep_energy(i);
        let s = transmission_reflection(&pot, e, 1.0, &units).unwrap();
        let oracle = barrier_oracle(e, 2.0, 1.0, 1.0, 1.0);
        closed = closed.max((s.transmission - oracle).abs() / oracle);
        flux = flux.max((s.transmission + s.reflection - 1.0).abs());
    }
    c.within("closed_form_rel", closed, 1e-10);
    c.within("t_plus_r", flux, 1e-10);
    let t = transmission_reflection(&pot, 1.0, 1.0, &units).unwrap().transmission;
    c.within("reference_T_0.2108", (t - barrier_oracle(1.0, 2.0, 1.0, 1.0, 1.0)).abs(), 1e-4);
    c
}

fn spatial_contrast() -> Criterion {
    let mut c = Criterion::new();
    let units = Units::default();
    let (q_a, q_b, v0, m) = (0.0, 1.0, 2.0, 1.0);
    let pot = PiecewisePotential::square_barrier(q_a, q_b, v0).unwrap();
    let grid = GridSpec::new(Axis::QRe, q_a, q_b, 256).unwrap();
    let p_re = build_operator(OperatorKind::MomentumRe, &grid, &units).unwrap();
    let dx = grid.spacing();
    let (mut below, mut not_reflected, mut no_tunnel, mut off) = (0, 0, 0, 0);
    let mut worst_ratio = 0.0_f64;
    for e0 in (0..SWEEP).map(sweep_energy).filter(|&e| e < v0) {
        below += 1;
        let enc = classical_encounter(q_a - 1.0, (2.0 * m * e0).sqrt(), &pot, m).unwrap();
        not_reflected += usize::from(!enc.is_reflected());
        let t = transmission_reflection(&pot, e0, m, &units).unwrap().transmission;
        no_tunnel += usize::from(t.is_nan() || t <= 0.0);
        let state = spatial_tunnel_state(q_a, q_b, v0, e0, m, &units, Mode::Literal).unwrap();
        let psi = state.regions[1].sample(&grid, &units);
        let value = rayleigh_eigenvalue_rows(&p_re, &psi, grid.interior_rows()).unwrap();
        let magnitude = (2.0 * m * (v0 - e0)).sqrt();
        let kappa = magnitude / units.hbar;
        let tol = units.hbar * kappa.powi(3) * dx * dx / 6.0 * 1.01;
        if value.class == Classification::Imaginary {
            worst_ratio = worst_ratio.max((value.value.im - magnitude).abs() / tol);
        } else {
            off += 1;
        }
    }
    c.count("classical_reflected", not_reflected, below);
    c.count("tunnels", no_tunnel, below);
    c.count("rayleigh_imaginary", off, below);
    c.within("rayleigh_gap_over_grid_tol", worst_ratio, 1.0);
    c
}

fn temporal_barrier() -> Criterion {
    let mut c = Criterion::new();
    let units = Units::default();
    let mut worst_identity = 0.0_f64;
    let mut inexact = 0;
    let mut relabelled = 0;
    let mut cases = 0;
    for p0 in [0.1, 0.5, 1.0, 1.7, 3.0] {
        for w0 in [0.0, 0.01, 0.3, 1.0, 2.5, 10.0] {
            for m in [0.5, 1.0, 2.0] {
                cases += 1;
                let profile = TemporalProfile::Square { t_a: 1.0, t_b: 2.0, w0 };
                let report = quantum_contrast(&profile, p0, m, &units).unwrap();
                let e = report.energies;
                let scale = e.e0.abs().max(e.e_t.abs()).max(e.w0.abs());
                inexact += usize::from(e.e_t + e.w0 != e.e0);
                worst_identity = worst_identity.max((e.e_t + e.w0 - e.e0).abs() / (f64::EPSILON * scale));
                let regions = &report.state.regions;
                relabelled += usize::from(regions[2].label != regions[0].label || !report.quantum_survives);
            }
        }
    }
    c.count_known_limit("energy_identity_exact", inexact, cases, "E0 - W0 is rounded to one f64");
    c.within("energy_identity_in_ulps", worst_identity, 1.0);
    c.count("label_after_equals_before", relabelled, cases);

    let start = ClassicalState { p_re: 1.3, ..ClassicalState::at_rest(1.0) };
    let e0 = 1.3 * 1.3 / 2.0;
    let smooth = TemporalProfile::SmoothBump { t1: 0.5, t_a: 1.5, t_b: 2.0, t2: 3.0, w0: 2.0 };
    let rise = |t: f64| {
        let s = t - 0.5;
        2.0 * s * s * (3.0 - 2.0 * s)
    };
    let root = bisect(0.5, 1.5, |t| e0 - rise(t));
    let mut worst_gap = 0.0_f64;
    for dt in [4e-3, 1e-3, 1e-4] {
        let run = integrate_classical(&start, &smooth, Model::NonRel, dt, 4.0, &units).unwrap();
        let hit = run.first(EventKind::Destroyed).map_or(f64::INFINITY, |ev| ev.t);
        worst_gap = worst_gap.max((hit - root).abs() / dt);
    }
    c.within("destroyed_gap_over_dt", worst_gap, 1.0);

    let rest = [1e-3, 1.0, 1e3].map(|m| relativistic_energy(0.0, 0.0, m, &units).unwrap().abs());
    c.within("rest_energy", rest.into_iter().fold(0.0, f64::max), 0.0);
    c
}

fn black_hole() -> Criterion {
    let mut c = Criterion::new();
    let mut horizon = 0.0_f64;
    let (mut partition_bad, mut partition_total) = (0, 0);
    let (mut range_bad, mut monotone_bad, mut iff_bad, mut wkb_total) = (0, 0, 0, 0);
    let (mut jump, mut inside_force) = (0.0_f64, 0.0_f64);
    for (mass, grav, speed) in [(1.0, 1.0, 1.0), (3.0, 0.5, 2.0), (1e3, 6.7e-3, 30.0)] {
        let units = Units { grav, c: speed, ..Units::default() };
        let bh = BlackHoleModel::new(mass, 1.0, &units).unwrap();
        let oracle = bisect(1e-9, 1e9, |r| 0.5 * speed * speed - grav * mass / r);
        horizon = horizon.max((bh.horizon - oracle).abs() / oracle);
        let eps = 1e-12 * bh.horizon;
        jump = jump.max((bh.potential(bh.horizon + eps) - bh.potential(bh.horizon - eps)).abs() / bh.well_depth());

        for p_frac in [0.3, 0.6, 0.99, 1.2] {
            let p0 = p_frac * (2.0 * bh.well_depth()).sqrt();
            let e0 = bh.kinetic_energy(p0);
            for row in bh.radial_profile(p0, 20.0 * bh.horizon, 1000).unwrap() {
                partition_total += 1;
                let allowed = e0 + bh.potential(bh.horizon) >= bh.potential(row.r);
                partition_bad += usize::from(allowed != row.allowed);
                if row.r < bh.horizon {
                    inside_force = inside_force.max(bh.force(row.r).abs());
                }
            }
        }

        for r_out in [2.0 * bh.horizon, 10.0 * bh.horizon] {
            let mut previous = 0.0;
            for i in 1..=200 {
                let e0 = 1.5 * bh.well_depth() * i as f64 / 200.0;
                let p = bh.wkb_escape_probability(e0, r_out, &units).unwrap();
                let escapes = bh.classical_escape_with_energy(e0, r_out).verdict == EscapeVerdict::Escapes;
                wkb_total += 1;
                range_bad += usize::from(!(p > 0.0 && p <= 1.0));
                monotone_bad += usize::from(p < previous);
                iff_bad += usize::from((p == 1.0) != escapes);
                previous = p;
            }
        }
    }
    c.within("horizon_rel", horizon, 1e-12);
    c.within("potential_jump_rel", jump, 1e-10);
    c.within("force_inside", inside_force, 0.0);
    c.count("partition", partition_bad, partition_total);
    c.count("wkb_in_range", range_bad, wkb_total);
    c.count("wkb_monotone", monotone_bad, wkb_total);
    c.count("wkb_one_iff_classical", iff_bad, wkb_total);
    c
}

/// Fourth-order central difference of `f` at 0 with step `h`.
fn derivative(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

fn cosmology() -> Criterion {
    let mut c = Criterion::new();
    let mut rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let (mut worst_t, mut worst_r) = (0.0_f64, 0.0_f64);
    let mut negative = 0;
    for _ in 0..100 {
        let s = CosmoState {
            t: 0.0,
            q_t: rng.random_range(0.2..5.0),
            p_t: rng.random_range(-2.0..2.0),
            x_r: rng.random_range(0.05..5.0),
            pi_r: rng.random_range(-2.0..2.0),
            k: rng.random_range(0.1..3.0),
            m: rng.random_range(0.2..3.0),
        };
        let a = accelerations(&s).unwrap();
        negative += usize::from(!(a.a_t_re > 0.0 && a.a_r_im_mag > 0.0));
        let h_q = 1e-3 * s.q_t;
        let h_x = 1e-3 * s.x_r;
        let dq = derivative(|h| hamiltonian(&CosmoState { q_t: s.q_t + h, ..s }).unwrap(), h_q);
        let dx = derivative(|h| hamiltonian(&CosmoState { x_r: s.x_r + h, ..s }).unwrap(), h_x);
        worst_t = worst_t.max((a.a_t_re + dq / s.m).abs() / a.a_t_re.abs());
        // The imaginary pair carries the opposite symplectic sign.
        worst_r = worst_r.max((a.a_r_im_mag - dx / s.m).abs() / a.a_r_im_mag.abs());
    }
    c.within("fd_rel_t", worst_t, 1e-6);
    c.within("fd_rel_r", worst_r, 1e-6);
    c.count("positive_accelerations", negative, 100);

    let start = CosmoState { t: 0.0, q_t: 1.0, p_t: 0.0, x_r: 1.0, pi_r: 0.0, k: 1.0, m: 1.0 };
    let traj = integrate(&start, 1e-5, 1.0).unwrap();
    c.holds("steps_1e5", traj.samples.len() > 100_000);
    let along = traj
        .samples
        .iter()
        .filter(|s| !accelerations(s).is_ok_and(|a| a.a_t_re > 0.0 && a.a_r_im_mag > 0.0))
        .count();
    c.count("positive_along_run", along, traj.samples.len());
    c.within("energy_drift_rel", traj.max_energy_drift(), 1e-6);
    c
}

fn run_into(config: &Path, out: &Path) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_complexmech"))
        .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env_remove("COMPLEXMECH_OUT")
        .output()
        .unwrap()
        .status
        .code()
}

fn listing(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (PathBuf::from(p.file_name().unwrap()), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn cli_determinism() -> Criterion {
    let mut c = Criterion::new();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let mut configs: Vec<PathBuf> = fs::read_dir(root.join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    let (mut failed, mut differ, mut off_golden) = (0, 0, 0);
    for config in &configs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        failed += usize::from(run_into(config, a.path()) != Some(0) || run_into(config, b.path()) != Some(0));
        differ += usize::from(listing(a.path()) != listing(b.path()));
        let golden = root.join("tests/golden").join(config.file_stem().unwrap()).join("summary.json");
        off_golden += usize::from(fs::read(golden).ok() != fs::read(a.path().join("summary.json")).ok());
    }
    c.count("bundled_exit_0", failed, configs.len());
    c.count("identical_across_runs", differ, configs.len());
    c.count("match_golden", off_golden, configs.len());
    let out = tempfile::tempdir().unwrap();
    let code = run_into(&root.join("tests/fixtures/doctored_cosmology.toml"), out.path());
    c.holds("doctored_exit_3", code == Some(3));
    c
}

fn main() -> ExitCode {
    type Check = fn() -> Criterion;
    let criteria: [(&str, Check); 8] = [
        ("operator symmetry", operator_symmetry),
        ("heisenberg probes", heisenberg_probes),
        ("scattering oracle", scattering_oracle),
        ("spatial contrast", spatial_contrast),
        ("temporal barrier", temporal_barrier),
        ("black hole", black_hole),
        ("cosmology", cosmology),
        ("cli determinism", cli_determinism),
    ];
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let c = check();
        all &= !c.unexpected;
        println!("criterion {} {} ({name}): {}", i + 1, if c.pass { "PASS" } else { "FAIL" }, c.parts.join(" "));
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
