//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 even when a criterion fails so the line-by-line report stays part of
//! the ordinary test run; set `ACCEPTANCE_STRICT=1` to turn failures into a
//! non-zero exit.

mod common;

use std::time::Instant;

use common::*;
use derham_ns::exterior::d_star;
use derham_ns::nonlinearity::{builtin, Builtin};
use derham_ns::potentials::{leray_project, HeatParams, Trajectory};
use derham_ns::radial::{
    algebraic_bump, amplitude_sweep, lift_radial, radial_evolve, selfsim_shoot, stability_limit, RadialProfile,
    RadialStatus, SelfSimOptions, DECAY_WINDOW,
};
use derham_ns::random::{band_limited_form, gaussian_bumps, Seeded};
use derham_ns::solver::{picard_solve, picard_solve_from, ProblemSpec, SolveResult, SolveStatus};
use derham_ns::spaces::{holder_seminorm, lp_norm, proxy_norm, weighted_sup_norm, PairSet};
use derham_ns::verify::{self, Check};
use derham_ns::{Grid, GridForm, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn worst(checks: &[Check]) -> (bool, String) {
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
    let detail = match failed.first() {
        None => format!("{} checks", checks.len()),
        Some(c) => format!(
            "{} of {} checks failed, first: {} {} = {:.3e} > {:.1e}",
            failed.len(),
            checks.len(),
            c.group,
            c.name,
            c.value,
            c.limit
        ),
    };
    (failed.is_empty(), detail)
}

fn identities() -> Result<Outcome> {
    let clock = Instant::now();
    let mut checks = Vec::new();
    for n in [2, 3, 4] {
        checks.extend(verify::complex_identities(n, 32)?);
        checks.extend(verify::projection_identities(n, 32)?);
    }
    let secs = clock.elapsed().as_secs_f64();
    let (ok, detail) = worst(&checks);
    Ok(outcome(ok && secs < 30.0, format!("{detail}, {secs:.1} s (limit 30 s)")))
}

fn heat() -> Result<Outcome> {
    let clock = Instant::now();
    let poisson = verify::poisson_gaussian_error()?;
    let coarse = verify::duhamel_error(11)?;
    let fine = verify::duhamel_error(21)?;
    let ratio = coarse / fine;
    let secs = clock.elapsed().as_secs_f64();
    let ok = poisson <= 1e-8 && (ratio - 4.0).abs() <= 0.6 && secs < 10.0;
    Ok(outcome(
        ok,
        format!("Poisson error {poisson:.2e}, Duhamel halving ratio {ratio:.3}, {secs:.1} s"),
    ))
}

fn frechet() -> Result<Outcome> {
    let checks = verify::frechet_checks(true)?;
    let (ok, detail) = worst(&checks);
    let max = checks.iter().map(|c| c.value).fold(0.0, f64::max);
    Ok(outcome(ok, format!("{detail}; largest relative defect {max:.2e} (limit 1e-10)")))
}

fn cole_hopf() -> Result<Outcome> {
    let clock = Instant::now();
    let (spec, oracle) = burgers_problem(128, 51, 1.0);
    let r = picard_solve(&spec)?;
    let err = burgers_error(&spec, r.u.last(), &oracle);
    let secs = clock.elapsed().as_secs_f64();
    let ok = r.status == SolveStatus::Converged && err <= 1e-4 && secs < 60.0;
    Ok(outcome(ok, format!("sup error {err:.2e} at T = 0.5, {secs:.1} s")))
}

fn taylor_green_check() -> Result<Outcome> {
    let clock = Instant::now();
    let spec = taylor_green_problem(32, 11);
    let r = picard_solve(&spec)?;
    let mu = spec.heat.mu;
    let (mut eu, mut ep) = (0.0f64, 0.0f64);
    if let Some(p) = &r.p {
        for (j, t) in spec.heat.times().into_iter().enumerate() {
            let exact = spec.u0.scaled((-2.0 * mu * t).exp());
            eu = eu.max((r.u.slice(j) - &exact).max_abs());
            ep = ep.max(error_up_to_constant(p.slice(j), &taylor_green_pressure(&spec.grid, mu, t)));
        }
    } else {
        ep = f64::INFINITY;
    }
    let secs = clock.elapsed().as_secs_f64();
    let ok = r.status == SolveStatus::Converged && eu <= 1e-6 && ep <= 1e-5 && secs < 60.0;
    Ok(outcome(ok, format!("velocity error {eu:.2e}, pressure error {ep:.2e}, {secs:.1} s")))
}

fn lamb_run(slices: usize) -> Result<SolveResult> {
    let g = Grid::new(3, 16, std::f64::consts::PI)?;
    let u0 = leray_project(&band_limited_form(&g, 1, 2, &mut Seeded::new(8))).scaled(0.5);
    let heat = HeatParams::new(0.1, 0.5, slices)?;
    let mut spec = ProblemSpec::new(u0, heat, builtin(Builtin::Lamb, 3, None)?, true)?;
    spec.periodic = true;
    spec.solver.tol = 1e-11;
    picard_solve(&spec)
}

fn energy() -> Result<Outcome> {
    let coarse = lamb_run(11)?;
    let fine = lamb_run(21)?;
    let (Some(dc), Some(df)) = (&coarse.diagnostics, &fine.diagnostics) else {
        return Ok(outcome(false, "runs did not converge"));
    };
    let monotone = dc.non_increasing(0.0) && df.non_increasing(0.0);
    let co_closed = [&coarse, &fine]
        .iter()
        .all(|r| r.u.slices().iter().all(|s| d_star(s).max_abs() <= 1e-6 * s.max_abs()));
    let ratio = dc.max_residual() / df.max_residual();
    Ok(outcome(
        monotone && co_closed && ratio >= 3.0,
        format!(
            "energy non-increasing: {monotone}, residual {:.2e} -> {:.2e} (ratio {ratio:.2} under halving)",
            dc.max_residual(),
            df.max_residual()
        ),
    ))
}

fn uniqueness() -> Result<Outcome> {
    let g = Grid::new(2, 32, 6.0)?;
    let mut rng = Seeded::new(12);
    let u0 = gaussian_bumps(&g, 1, 2, 1.0, &mut rng).scaled(0.1);
    let heat = HeatParams::new(0.5, 0.5, 9)?;
    let mut spec = ProblemSpec::new(u0, heat, builtin(Builtin::Ps, 2, Some(0.5))?, false)?;
    spec.solver.tol = 1e-10;
    let start = |seed| {
        let mut r = Seeded::new(seed);
        let slices = (0..heat.slices).map(|_| gaussian_bumps(&g, 1, 2, 1.0, &mut r)).collect();
        Trajectory::new(heat, slices)
    };
    let a = picard_solve_from(&spec, start(1)?)?;
    let b = picard_solve_from(&spec, start(2)?)?;
    let pairs = PairSet::Auto;
    let diff = proxy_norm(&a.u.difference(&b.u)?, 0.5, 0.0, &pairs) / proxy_norm(&a.u, 0.5, 0.0, &pairs);
    let limit = 10.0 * spec.solver.tol;
    let ok = a.status == SolveStatus::Converged && b.status == SolveStatus::Converged && diff <= limit;
    Ok(outcome(ok, format!("relative difference {diff:.2e} (limit {limit:.0e})")))
}

fn radial_study() -> Result<Outcome> {
    let clock = Instant::now();
    let mut completed = true;
    for a in [1.0, 5.0] {
        let v0 = RadialProfile::from_fn(3, 64.0, 1281, |r| algebraic_bump(a, r))?;
        let run = radial_evolve(&v0, 1.0, stability_limit(3, v0.dr), 4)?;
        completed &= run.status == RadialStatus::Completed;
    }

    let amps = [50.0, 100.0, 200.0, 400.0, 800.0];
    let times: Vec<f64> = amplitude_sweep(5, &amps, 0.01, 0.05)?
        .iter()
        .map(|r| match r.status {
            RadialStatus::BlowUp { t_star } => t_star,
            RadialStatus::Completed => f64::NAN,
        })
        .collect();
    let sweep_ok = times.iter().all(|t| t.is_finite()) && times.windows(2).all(|w| w[1] <= w[0]);

    let p = selfsim_shoot(5, 1.0, 1.2, &SelfSimOptions::default())?;
    let spread = p.decay_spread(DECAY_WINDOW);
    let shoot_ok = p.matched && p.w.iter().all(|w| *w > 0.0) && spread <= 0.05;

    let secs = clock.elapsed().as_secs_f64();
    Ok(outcome(
        completed && sweep_ok && shoot_ok && secs < 300.0,
        format!(
            "(a) n=3 completed: {completed}; (b) n=5 t* = [{}]; (c) kappa {:.6}, c {:.4}, spread {:.2}%; {secs:.1} s",
            times.iter().map(|t| format!("{t:.3e}")).collect::<Vec<_>>().join(", "),
            p.kappa,
            p.c,
            100.0 * spread
        ),
    ))
}

fn lift_consistency() -> Result<Outcome> {
    let (amplitude, horizon, slices) = (0.5, 0.25, 21);
    let shape = |r: f64| amplitude * (-r * r).exp();
    let v0 = RadialProfile::from_fn(3, 16.0, 1601, shape)?;
    let radial = radial_evolve(&v0, horizon, stability_limit(3, v0.dr), 1)?;

    let g = Grid::new(3, 32, 6.0)?;
    let heat = HeatParams::new(1.0, horizon, slices)?;
    let mut spec = ProblemSpec::new(lift_radial(&v0, &g)?, heat, builtin(Builtin::Ps, 3, Some(0.5))?, false)?;
    spec.solver.tol = 1e-10;
    let full = picard_solve(&spec)?;

    let lifted = lift_radial(radial.last(), &g)?;
    let err = (full.u.last() - &lifted).max_abs();
    let ok = radial.status == RadialStatus::Completed && full.status == SolveStatus::Converged && err <= 1e-3;
    Ok(outcome(
        ok,
        format!("sup difference {err:.2e} at T = {horizon} (|u| up to {:.2e})", lifted.max_abs()),
    ))
}

fn norms() -> Result<Outcome> {
    let embedding = verify::embedding_ratio()?;
    let product = verify::product_ratio()?;
    let lp = verify::lp_ratio()?;

    let g = Grid::new(2, 32, 4.0)?;
    let u = gaussian(&g);
    let sup = weighted_sup_norm(&u, 0, 2.0, true)?.total;
    let mut brute = (sup - brute_weighted_sup_gaussian(4.0)).abs();
    for (lambda, delta) in [(0.5, 1.0), (1.0, 0.0), (0.25, 2.5)] {
        let got = holder_seminorm(&u, lambda, delta, &PairSet::Auto)?;
        let want = brute_seminorm(&g, u.component(0), lambda, delta);
        brute = brute.max((got - want).abs() / want);
    }
    let fine = Grid::new(2, 256, 2.0)?;
    let bump = GridForm::from_fn(&fine, 0, |x, _| smooth_bump(x.iter().map(|v| v * v).sum::<f64>().sqrt()));
    for p in [1.0, 2.0, 3.5] {
        let want = bump_lp_quadrature(p);
        brute = brute.max((lp_norm(&bump, p)? - want).abs() / want);
    }

    let ok = embedding <= verify::EMBEDDING_BOUND
        && product <= verify::PRODUCT_BOUND
        && lp <= verify::LP_BOUND
        && brute <= 1e-6;
    Ok(outcome(
        ok,
        format!(
            "product ratio {product:.4} (bound {}), embedding ratio {embedding:.4} (bound {}), \
             L^p ratio {lp:.4} (bound {}), brute-force gap {brute:.1e}",
            verify::PRODUCT_BOUND,
            verify::EMBEDDING_BOUND,
            verify::LP_BOUND
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("identity suite, n in {2,3,4}, N = 32", identities),
        ("heat oracle", heat),
        ("Frechet identity to 1e-10", frechet),
        ("Cole-Hopf oracle", cole_hopf),
        ("Taylor-Green oracle", taylor_green_check),
        ("energy law", energy),
        ("uniqueness shadow", uniqueness),
        ("radial blow-up study", radial_study),
        ("radial/full-grid consistency", lift_consistency),
        ("norm machinery", norms),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let result = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        failures += usize::from(!result.passed);
        println!(
            "criterion {:>2}: {verdict}  {name}: {} [{:.1} s]",
            i + 1,
            result.detail,
            clock.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
