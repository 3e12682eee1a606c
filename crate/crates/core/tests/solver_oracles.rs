mod common;

use common::*;
use derham_ns::exterior::d_star;
use derham_ns::nonlinearity::{builtin, Builtin};
use derham_ns::potentials::{leray_project, HeatParams, Trajectory};
use derham_ns::random::{band_limited_form, gaussian_bumps, Seeded};
use derham_ns::solver::{picard_solve, picard_solve_from, ProblemSpec, SolveStatus};
use derham_ns::spaces::{proxy_norm, PairSet};
use derham_ns::Grid;

#[test]
fn cole_hopf_oracle_is_self_consistent() {
    // t = 0 reproduces the initial data
    let ch = ColeHopf::new(1.0, std::f64::consts::PI, 0.1);
    for x in [-2.0, -0.3, 0.7, 2.9] {
        let err = (ch.eval(x, 0.0) - x.sin()).abs();
        // phi is small near x = ±π, which costs a few digits there
        assert!(err < 1e-9, "x={x}: {err:e}");
    }
}

#[test]
fn burgers_matches_cole_hopf() {
    let (spec, oracle) = burgers_problem(128, 51, 1.0);
    let r = picard_solve(&spec).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    let err = burgers_error(&spec, r.u.last(), &oracle);
    eprintln!("Cole-Hopf error {err:e} after {} iterations", r.iterations);
    assert!(err <= 1e-4);
}

#[test]
fn taylor_green_velocity_and_pressure() {
    let spec = taylor_green_problem(32, 11);
    let r = picard_solve(&spec).unwrap();
    assert_eq!(r.status, SolveStatus::Converged);
    let mu = spec.heat.mu;
    let p = r.p.as_ref().unwrap();
    for (j, t) in spec.heat.times().into_iter().enumerate() {
        let exact = spec.u0.scaled((-2.0 * mu * t).exp());
        assert!((r.u.slice(j) - &exact).max_abs() <= 1e-6);
        let pe = taylor_green_pressure(&spec.grid, mu, t);
        let err = error_up_to_constant(p.slice(j), &pe);
        assert!(err <= 1e-5, "t={t}: pressure error {err:e}");
    }
}

fn lamb_energy_run(slices: usize) -> derham_ns::solver::SolveResult {
    let g = Grid::new(3, 16, std::f64::consts::PI).unwrap();
    let u0 = leray_project(&band_limited_form(&g, 1, 2, &mut Seeded::new(8))).scaled(0.5);
    let heat = HeatParams::new(0.1, 0.5, slices).unwrap();
    let mut spec = ProblemSpec::new(u0, heat, builtin(Builtin::Lamb, 3, None).unwrap(), true).unwrap();
    spec.periodic = true;
    spec.solver.tol = 1e-11;
    picard_solve(&spec).unwrap()
}

#[test]
fn lamb_energy_law() {
    let coarse = lamb_energy_run(11);
    let fine = lamb_energy_run(21);
    for r in [&coarse, &fine] {
        assert_eq!(r.status, SolveStatus::Converged);
        let d = r.diagnostics.as_ref().unwrap();
        assert!(d.non_increasing(0.0));
        let scale = d.energy[0];
        assert!(d.nonlinear.iter().all(|v| v.abs() <= 1e-8 * scale));
        for s in r.u.slices() {
            assert!(d_star(s).max_abs() <= 1e-6 * s.max_abs());
        }
    }
    let rc = coarse.diagnostics.unwrap().max_residual();
    let rf = fine.diagnostics.unwrap().max_residual();
    eprintln!("energy residual {rc:e} -> {rf:e}");
    assert!(rc / rf >= 3.0);
}

#[test]
fn small_data_fixed_point_is_unique() {
    let g = Grid::new(2, 32, 6.0).unwrap();
    let mut rng = Seeded::new(12);
    let u0 = gaussian_bumps(&g, 1, 2, 1.0, &mut rng).scaled(0.1);
    let heat = HeatParams::new(0.5, 0.5, 9).unwrap();
    let mut spec = ProblemSpec::new(u0, heat, builtin(Builtin::Ps, 2, Some(0.5)).unwrap(), false).unwrap();
    spec.solver.tol = 1e-10;
    let start = |seed| {
        let mut r = Seeded::new(seed);
        let slices = (0..heat.slices).map(|_| gaussian_bumps(&g, 1, 2, 1.0, &mut r)).collect();
        Trajectory::new(heat, slices).unwrap()
    };
    let a = picard_solve_from(&spec, start(1)).unwrap();
    let b = picard_solve_from(&spec, start(2)).unwrap();
    assert_eq!(a.status, SolveStatus::Converged);
    assert_eq!(b.status, SolveStatus::Converged);
    let pairs = PairSet::Auto;
    let diff = proxy_norm(&a.u.difference(&b.u).unwrap(), 0.5, 0.0, &pairs) / proxy_norm(&a.u, 0.5, 0.0, &pairs);
    assert!(diff <= 10.0 * spec.solver.tol, "{diff:e}");
    // geometric convergence for small data
    let tail: Vec<f64> = a.history.iter().map(|h| h.residual).collect();
    assert!(tail.windows(2).rev().take(5).all(|w| w[1] < w[0]));
}
