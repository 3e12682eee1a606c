use std::path::{Path, PathBuf};
use std::time::Instant;

use derham_ns::io::{fmt_f64, DataConfig, FieldFile, Manifest, RunConfig, Table};
use derham_ns::potentials::{leray_project, Trajectory};
use derham_ns::radial::{
    algebraic_bump, amplitude_sweep, radial_evolve, selfsim_integrate, selfsim_shoot, RadialProfile, RadialStatus,
    SelfSimOptions, SelfSimilarProfile, DECAY_WINDOW,
};
use derham_ns::solver::{picard_solve, ProblemSpec, SolveStatus};
use derham_ns::spaces::{f_norm, holder_norm, PairSet};
use derham_ns::verify::{all_passed, identity_suite, to_table, Check};
use derham_ns::{Error, Grid, GridForm, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Collects outputs and timings, and writes the manifest last.
struct Run {
    out: PathBuf,
    manifest: Manifest,
    clock: Instant,
}

impl Run {
    fn new(command: &str, cfg: &RunConfig, out: Option<&Path>) -> Result<Self> {
        let out = out
            .map(Path::to_path_buf)
            .or_else(|| cfg.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out)?;
        Ok(Self {
            out,
            manifest: Manifest::new(command, cfg.clone()),
            clock: Instant::now(),
        })
    }

    fn lap(&mut self, phase: &str) {
        self.manifest.timings.insert(phase.to_string(), self.clock.elapsed().as_secs_f64());
        self.clock = Instant::now();
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let p = self.path(name);
        t.write(&p)
    }

    fn result(&mut self, key: &str, value: impl serde::Serialize) {
        let v = serde_json::to_value(value).expect("plain data serializes");
        self.manifest.results.insert(key.to_string(), v);
    }

    fn finish(mut self, status: impl serde::Serialize, exit_code: i32) -> Result<i32> {
        self.lap("write");
        self.manifest.status = serde_json::to_value(status).expect("status serializes");
        self.manifest.exit_code = exit_code;
        let p = self.out.join("manifest.json");
        self.manifest.write(&p)?;
        Ok(exit_code)
    }
}

fn missing(field: &str) -> Error {
    Error::Config(format!("{field}: missing"))
}

/// Data without decay at the box boundary is treated as periodic.
fn is_periodic(data: &DataConfig) -> bool {
    matches!(
        data,
        DataConfig::Zero | DataConfig::TaylorGreen { .. } | DataConfig::Sine { .. } | DataConfig::BandLimited { .. }
    )
}

pub fn solve(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let mut run = Run::new("solve", cfg, out)?;
    let grid = cfg.grid()?;
    let heat = cfg.heat()?;
    let data = cfg.data.as_ref().ok_or_else(|| missing("data"))?;
    let projected = cfg.problem.a == 1;
    let mut u0 = data.build(&grid, cfg.problem.q)?;
    if projected {
        u0 = leray_project(&u0);
    }
    let mut spec = ProblemSpec::new(u0, heat, cfg.nonlinearity()?, projected)?;
    spec.solver = cfg.solver;
    if let Some(norms) = &cfg.norms {
        spec.norms = norms.clone();
    }
    spec.periodic = is_periodic(data);
    spec.validate()?;
    run.lap("setup");

    let result = picard_solve(&spec)?;
    run.lap("solve");
    log::info!("solve finished: {:?} after {} iterations", result.status, result.iterations);

    let stride = cfg.output.snapshot_stride;
    let path = run.path("u.drns");
    FieldFile::from_trajectory(&result.u, stride)?.write(&path)?;
    if let Some(p) = &result.p {
        let path = run.path("p.drns");
        FieldFile::from_trajectory(p, stride)?.write(&path)?;
    }

    let mut iters = Table::new(&["iter", "residual", "change", "theta"]);
    for h in &result.history {
        iters.push(vec![h.iter.to_string(), fmt_f64(h.residual), fmt_f64(h.change), fmt_f64(h.theta)]);
    }
    run.table("iterations.csv", &iters)?;

    let mut diag = Table::new(&[
        "slice",
        "t",
        "energy",
        "dissipation",
        "nonlinear",
        "forcing",
        "energy_residual",
        "weighted_sup",
    ]);
    if let Some(d) = &result.diagnostics {
        for j in 0..d.times.len() {
            let mut row = vec![j.to_string()];
            row.extend(
                [d.times[j], d.energy[j], d.dissipation[j], d.nonlinear[j], d.forcing[j], d.residual[j], d.weighted_sup[j]]
                    .map(fmt_f64),
            );
            diag.push(row);
        }
        run.result("energy_non_increasing", d.non_increasing(1e-12));
    }
    run.table("diagnostics.csv", &diag)?;

    if let Some(report) = &result.norm_report {
        let mut t = Table::new(&["term", "value"]);
        for term in &report.terms {
            t.push(vec![term.label.clone(), fmt_f64(term.value)]);
        }
        t.push(vec!["total".into(), fmt_f64(report.total)]);
        run.table("norms.csv", &t)?;
    }

    if let (DataConfig::TaylorGreen { .. }, true) = (data, projected) {
        let k = std::f64::consts::PI / grid.half_width();
        let t = heat.horizon;
        let exact = spec.u0.scaled((-2.0 * heat.mu * k * k * t).exp());
        run.result("taylor_green_error", (result.u.last() - &exact).max_abs());
    }
    run.result("iterations", result.iterations);
    run.result("relative_change", result.relative_change);
    let code = match result.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIter => EXIT_MAX_ITER,
        SolveStatus::BlowUpSuspected { t_star } => {
            run.result("t_star", t_star);
            EXIT_BLOWUP
        }
    };
    run.finish(result.status, code)
}

fn profile_table(v: &RadialProfile) -> Table {
    let mut t = Table::new(&["r", "v"]);
    for (i, x) in v.values.iter().enumerate() {
        t.push_reals(&[v.r(i), *x]);
    }
    t
}

pub fn radial(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let mut run = Run::new("radial", cfg, out)?;
    let r = cfg.radial()?;
    let n = cfg.problem.n;
    let horizon = cfg.problem.horizon;
    let nr = r.nr.ok_or_else(|| missing("radial.nr"))?;
    let radius = r.radius.ok_or_else(|| missing("radial.R"))?;
    if nr < 2 || !(radius > 0.0) {
        return Err(Error::Config("radial: need nr >= 2 and R > 0".into()));
    }
    let dr = radius / (nr - 1) as f64;
    match r.amplitudes.as_slice() {
        [] => Err(missing("radial.amplitudes")),
        [a] => {
            let dt = r.dt.ok_or_else(|| missing("radial.dt"))?;
            let v0 = RadialProfile::from_fn(n, radius, nr, |x| algebraic_bump(*a, x))?;
            let edge = algebraic_bump(*a, radius).abs();
            if edge > 1e-10 * a.abs() {
                log::warn!("data is {edge:.2e} at R; the Dirichlet condition is felt early");
            }
            run.lap("setup");
            let result = radial_evolve(&v0, horizon, dt, r.snapshots.unwrap_or(1))?;
            run.lap("evolve");
            let mut index = Table::new(&["snapshot", "t", "max_abs", "file"]);
            for (k, v) in result.snapshots.iter().enumerate() {
                let name = format!("radial_{k:04}.csv");
                run.table(&name, &profile_table(v))?;
                index.push(vec![k.to_string(), fmt_f64(v.t), fmt_f64(v.max_abs()), name]);
            }
            run.table("snapshots.csv", &index)?;
            let mut peak = Table::new(&["t", "max_abs"]);
            for (t, m) in &result.peak {
                peak.push_reals(&[*t, *m]);
            }
            run.table("peak.csv", &peak)?;
            let code = match result.status {
                RadialStatus::Completed => EXIT_OK,
                RadialStatus::BlowUp { t_star } => {
                    run.result("t_star", t_star);
                    EXIT_BLOWUP
                }
            };
            run.finish(result.status, code)
        }
        amps => {
            run.lap("setup");
            let rows = amplitude_sweep(n, amps, dr, horizon)?;
            run.lap("evolve");
            let mut t = Table::new(&["A", "t_star", "status", "final_peak", "R"]);
            for row in &rows {
                let (t_star, status) = match row.status {
                    RadialStatus::Completed => (f64::NAN, "completed"),
                    RadialStatus::BlowUp { t_star } => (t_star, "blow_up"),
                };
                t.push(vec![
                    fmt_f64(row.amplitude),
                    fmt_f64(t_star),
                    status.into(),
                    fmt_f64(row.final_peak),
                    fmt_f64(row.radius),
                ]);
            }
            run.table("sweep.csv", &t)?;
            let blowups = rows.iter().filter(|r| matches!(r.status, RadialStatus::BlowUp { .. })).count();
            run.result("blow_ups", blowups);
            run.finish("sweep", EXIT_OK)
        }
    }
}

pub fn selfsim(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let mut run = Run::new("selfsim", cfg, out)?;
    let r = cfg.radial()?;
    let n = cfg.problem.n;
    if r.gamma.is_empty() {
        return Err(missing("radial.gamma"));
    }
    let y_max = r.y_max.ok_or_else(|| missing("radial.y_max"))?;
    let mut opts = SelfSimOptions {
        kappa_coeff: if r.coeff_2kw { 2.0 } else { 1.0 },
        ..SelfSimOptions::default()
    };
    if let Some(nr) = r.nr {
        opts.points = nr;
    }
    run.lap("setup");
    let mut table = Table::new(&["gamma", "kappa", "c", "matched", "decay_spread", "file"]);
    let mut all_good = true;
    for (i, &gamma) in r.gamma.iter().enumerate() {
        let profile: Result<SelfSimilarProfile> = match r.kappa {
            Some(kappa) => selfsim_integrate(n, gamma, kappa, y_max, &opts),
            // the zero profile solves the equation for every κ
            None if gamma == 0.0 => selfsim_integrate(n, 0.0, 1.0, y_max, &opts).map(|mut p| {
                p.kappa = f64::NAN;
                p
            }),
            None => selfsim_shoot(n, gamma, y_max, &opts),
        };
        let p = match profile {
            Ok(p) => p,
            Err(e @ Error::NoBracket { .. }) => {
                log::warn!("gamma = {gamma}: {e}");
                all_good = false;
                table.push(vec![fmt_f64(gamma), fmt_f64(f64::NAN), fmt_f64(f64::NAN), "false".into(), fmt_f64(f64::NAN), String::new()]);
                continue;
            }
            Err(e) => return Err(e),
        };
        let matched = if r.kappa.is_none() && gamma > 0.0 { p.matched } else { p.divergence.is_none() };
        all_good &= matched;
        let name = format!("profile_{i:03}.csv");
        let mut t = Table::new(&["y", "w", "dw"]);
        for k in 0..p.y.len() {
            t.push_reals(&[p.y[k], p.w[k], p.dw[k]]);
        }
        run.table(&name, &t)?;
        let spread = if gamma == 0.0 { 0.0 } else { p.decay_spread(DECAY_WINDOW) };
        table.push(vec![fmt_f64(gamma), fmt_f64(p.kappa), fmt_f64(p.c), matched.to_string(), fmt_f64(spread), name]);
    }
    run.lap("integrate");
    run.table("selfsim.csv", &table)?;
    let code = if all_good { EXIT_OK } else { EXIT_MAX_ITER };
    run.finish(if all_good { "matched" } else { "unmatched" }, code)
}

pub fn norms(cfg: &RunConfig, out: Option<&Path>) -> Result<i32> {
    let mut run = Run::new("norms", cfg, out)?;
    let params = cfg.norms.clone().ok_or_else(|| missing("norms"))?;
    let data = cfg.data.as_ref().ok_or_else(|| missing("data"))?;
    let slices: Vec<(f64, GridForm)>;
    let mut traj: Option<Trajectory> = None;
    if let DataConfig::File { path, .. } = data {
        let file = FieldFile::read(path)?;
        slices = (0..file.slices)
            .map(|j| {
                let t = if file.slices > 1 { file.horizon * j as f64 / (file.slices - 1) as f64 } else { file.horizon };
                file.slice(j).map(|s| (t, s))
            })
            .collect::<Result<_>>()?;
        if file.slices > 1 {
            traj = Some(file.to_trajectory(cfg.problem.mu)?);
        }
    } else {
        let grid: Grid = cfg.grid()?;
        slices = vec![(0.0, data.build(&grid, cfg.problem.q)?)];
    }
    run.lap("setup");
    let pairs = PairSet::Auto;
    let mut t = Table::new(&["slice", "t", "term", "value"]);
    for (j, (time, u)) in slices.iter().enumerate() {
        let report = holder_norm(u, &params, &pairs)?;
        for term in &report.terms {
            t.push(vec![j.to_string(), fmt_f64(*time), term.label.clone(), fmt_f64(term.value)]);
        }
        t.push(vec![j.to_string(), fmt_f64(*time), "total".into(), fmt_f64(report.total)]);
    }
    if let (Some(traj), Some(_)) = (&traj, params.lambda_prime) {
        let report = f_norm(traj, &params, &pairs)?;
        for term in &report.terms {
            t.push(vec!["all".into(), String::new(), term.label.clone(), fmt_f64(term.value)]);
        }
        t.push(vec!["all".into(), String::new(), "f_total".into(), fmt_f64(report.total)]);
        run.result("f_norm", report.total);
    }
    run.lap("norms");
    run.table("norms.csv", &t)?;
    run.finish("done", EXIT_OK)
}

pub fn print_checks(checks: &[Check]) {
    println!("{:<12} {:<48} {:>12} {:>10}  result", "group", "check", "value", "limit");
    for c in checks {
        let verdict = if c.passed() { "pass" } else { "FAIL" };
        println!("{:<12} {:<48} {:>12.3e} {:>10.1e}  {verdict}", c.group, c.name, c.value, c.limit);
    }
}

pub fn verify(cfg: Option<&RunConfig>, out: Option<&Path>) -> Result<i32> {
    let points = cfg.and_then(|c| c.grid).map_or(32, |g| g.points);
    let clock = Instant::now();
    let checks = identity_suite(points)?;
    print_checks(&checks);
    let passed = all_passed(&checks);
    println!(
        "{} of {} checks passed in {:.1} s",
        checks.iter().filter(|c| c.passed()).count(),
        checks.len(),
        clock.elapsed().as_secs_f64()
    );
    let code = if passed { EXIT_OK } else { EXIT_VERIFY };
    if let Some(cfg) = cfg {
        let mut run = Run::new("verify", cfg, out)?;
        run.lap("suite");
        run.table("verify.csv", &to_table(&checks))?;
        run.finish(if passed { "passed" } else { "failed" }, code)?;
    } else if let Some(dir) = out {
        to_table(&checks).write(&dir.join("verify.csv"))?;
    }
    Ok(code)
}
