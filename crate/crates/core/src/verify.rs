//! The identity suite run by `derham-ns verify`.
//!
//! Each check reports a measured value and the limit it must not exceed.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exterior::{d, d_star, hodge_laplacian, hodge_star, laplacian, GridForm};
use crate::grid::Grid;
use crate::io::Table;
use crate::nonlinearity::{builtin, Builtin, NonlinearitySpec};
use crate::potentials::{leray_project, poisson_potential, semigroup, volume_potential, HeatParams, Trajectory};
use crate::random::{band_limited_form, gaussian_bumps, Seeded};
use crate::spaces::{aniso_norm, holder_norm, lp_norm, NormParams, PairSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub group: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn new(group: &str, name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            group: group.to_string(),
            name: name.into(),
            value,
            limit,
        }
    }

    /// NaN never passes.
    pub fn passed(&self) -> bool {
        self.value <= self.limit
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

pub fn to_table(checks: &[Check]) -> Table {
    let mut t = Table::new(&["group", "check", "value", "limit", "passed"]);
    for c in checks {
        t.push(vec![
            c.group.clone(),
            c.name.clone(),
            crate::io::fmt_f64(c.value),
            crate::io::fmt_f64(c.limit),
            c.passed().to_string(),
        ]);
    }
    t
}

fn rel(a: &GridForm, b: &GridForm, scale: f64) -> f64 {
    (a - b).max_abs() / scale
}

/// `dd = 0`, `d*d* = 0`, `⋆⋆ = ±1` and `Δ_H = -Δ` in every degree.
pub fn complex_identities(n: usize, points: usize) -> Result<Vec<Check>> {
    let g = Grid::new(n, points, 1.3)?;
    let mut rng = Seeded::new(100 + n as u64);
    let mut out = Vec::new();
    for q in 0..=n {
        let u = band_limited_form(&g, q, points / 2 - 1, &mut rng);
        let scale = u.max_abs();
        let tag = |what: &str| format!("{what} n={n} q={q}");
        if q < n {
            out.push(Check::new("complex", tag("dd"), d(&d(&u)).max_abs() / scale, 1e-12));
        }
        if q > 0 {
            out.push(Check::new("complex", tag("d*d*"), d_star(&d_star(&u)).max_abs() / scale, 1e-12));
        }
        let sign = if (q * (n - q)) % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Check::new("complex", tag("star star"), rel(&hodge_star(&hodge_star(&u)), &u.scaled(sign), scale), 0.0));
        let lap = laplacian(&u);
        let w = (&hodge_laplacian(&u) + &lap).max_abs() / lap.max_abs();
        out.push(Check::new("complex", tag("weitzenbock"), w, 1e-10));
    }
    Ok(out)
}

/// Idempotence and self-adjointness of the Leray projection, and its
/// commutation with the heat semigroup.
pub fn projection_identities(n: usize, points: usize) -> Result<Vec<Check>> {
    let g = Grid::new(n, points, PI)?;
    let mut rng = Seeded::new(200 + n as u64);
    let u = band_limited_form(&g, 1, points / 2 - 1, &mut rng);
    let v = band_limited_form(&g, 1, points / 2 - 1, &mut rng);
    let scale = u.max_abs();
    let pu = leray_project(&u);
    let pv = leray_project(&v);
    let tag = |what: &str| format!("{what} n={n}");
    let lhs = pu.inner(&v)?;
    let rhs = u.inner(&pv)?;
    let adj = (lhs - rhs).abs() / (u.l2_norm_sq() * v.l2_norm_sq()).sqrt();
    let heat_then_p = leray_project(&semigroup(&u, 0.7, 0.3));
    let p_then_heat = semigroup(&pu, 0.7, 0.3);
    Ok(vec![
        Check::new("projection", tag("idempotent"), rel(&leray_project(&pu), &pu, scale), 1e-10),
        Check::new("projection", tag("self-adjoint"), adj, 1e-10),
        Check::new("projection", tag("co-closed"), d_star(&pu).max_abs() / scale, 1e-10),
        Check::new("projection", tag("heat commutation"), rel(&heat_then_p, &p_then_heat, scale), 1e-12),
    ])
}

/// `max |Poisson potential - widened Gaussian|` on `[-8, 8)²`.
pub fn poisson_gaussian_error() -> Result<f64> {
    let g = Grid::new(2, 64, 8.0)?;
    let (sigma, mu) = (0.5, 0.3);
    let gauss = |x: &[f64], s: f64| (-x.iter().map(|v| v * v).sum::<f64>() / (4.0 * s)).exp() * (sigma / s);
    let u0 = GridForm::from_fn(&g, 0, |x, _| gauss(x, sigma));
    let p = HeatParams::new(mu, 1.0, 5)?;
    let traj = poisson_potential(&u0, p)?;
    let mut worst = 0.0f64;
    for (j, t) in p.times().into_iter().enumerate() {
        let exact = GridForm::from_fn(&g, 0, |x, _| gauss(x, sigma + mu * t));
        worst = worst.max((traj.slice(j) - &exact).max_abs());
    }
    Ok(worst)
}

/// Error of the Duhamel integral of `f = cos(ωt) G(x)` with `slices` time
/// slices, against the exact per-mode integral.
pub fn duhamel_error(slices: usize) -> Result<f64> {
    let g = Grid::new(2, 32, 6.0)?;
    let (mu, horizon, omega) = (0.5, 1.0, 3.0);
    let bump = GridForm::from_fn(&g, 0, |x, _| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
    let params = HeatParams::new(mu, horizon, slices)?;
    let f = Trajectory::from_fn(params, |t| bump.scaled((omega * t).cos()))?;
    let got = volume_potential(&f)?;
    let spec = bump.to_spectral();
    let ksq = g.wavenumber_sq();
    let mut worst = 0.0f64;
    for (j, t) in params.times().into_iter().enumerate() {
        let mut s = spec.clone();
        for (c, k2) in s.components_mut()[0].iter_mut().zip(ksq) {
            let a = mu * k2;
            let integral = (a * (omega * t).cos() + omega * (omega * t).sin() - a * (-a * t).exp()) / (a * a + omega * omega);
            *c *= Complex64::new(integral, 0.0);
        }
        worst = worst.max((got.slice(j) - &s.to_grid()).max_abs());
    }
    Ok(worst)
}

/// Poisson potential accuracy and second-order convergence of the Duhamel
/// integral.
pub fn heat_checks() -> Result<Vec<Check>> {
    let coarse = duhamel_error(11)?;
    let fine = duhamel_error(21)?;
    Ok(vec![
        Check::new("heat", "poisson potential vs widened gaussian", poisson_gaussian_error()?, 1e-8),
        // ratio 4 under halving; accept anything within 15%
        Check::new("heat", format!("duhamel |ratio - 4| ({coarse:.3e} -> {fine:.3e})"), (coarse / fine - 4.0).abs(), 0.6),
    ])
}

/// Relative Fréchet defect and the rounding floor of the cancellation that
/// produces it.
fn frechet_defect(spec: &NonlinearitySpec, u: &GridForm, h: &GridForm, eps: f64) -> Result<(f64, f64)> {
    let moved = spec.apply_n(&(u + &h.scaled(eps)))?;
    let base = spec.apply_n(u)?;
    let linear = spec.apply_b(u, h)?.scaled(eps);
    let remainder = &(&moved - &base) - &linear;
    let want = spec.apply_b(h, h)?.max_abs() * eps * eps / 2.0;
    let cancelled = moved.max_abs() + base.max_abs() + linear.max_abs();
    Ok(((remainder.max_abs() - want).abs() / want, f64::EPSILON * cancelled / want))
}

/// The built-ins with their labels: Lamb and `ps` with `b ∈ {0, 1/2, 1}`.
pub fn builtin_family() -> Result<Vec<(String, NonlinearitySpec)>> {
    let mut out = vec![("lamb".to_string(), builtin(Builtin::Lamb, 3, None)?)];
    for b in [0.0, 0.5, 1.0] {
        out.push((format!("ps b={b}"), builtin(Builtin::Ps, 3, Some(b))?));
    }
    Ok(out)
}

/// `‖N(u+εh) - N(u) - εB(u,h)‖ = (ε²/2)‖B(h,h)‖` for `ε ∈ {1e-1, 1e-2, 1e-3}`.
///
/// The limit is `1e-10`, raised to the rounding floor of the cancellation
/// unless `strict` is set.
pub fn frechet_checks(strict: bool) -> Result<Vec<Check>> {
    let g = Grid::new(3, 12, 1.0)?;
    let mut rng = Seeded::new(300);
    let u = band_limited_form(&g, 1, 2, &mut rng);
    let h = band_limited_form(&g, 1, 2, &mut rng);
    let mut out = Vec::new();
    for (label, spec) in builtin_family()? {
        for eps in [1e-1, 1e-2, 1e-3] {
            let (v, floor) = frechet_defect(&spec, &u, &h, eps)?;
            let limit = if strict { 1e-10 } else { floor.max(1e-10) };
            out.push(Check::new("frechet", format!("{label} eps={eps:e} (floor {floor:.1e})"), v, limit));
        }
    }
    Ok(out)
}

/// `B(u,u) = 2N(u)`, `B(w,u) = B(u,w)` and `B(w,0) = 0`.
pub fn bilinear_checks() -> Result<Vec<Check>> {
    let g = Grid::new(3, 12, 1.0)?;
    let mut rng = Seeded::new(400);
    let u = band_limited_form(&g, 1, 2, &mut rng);
    let w = band_limited_form(&g, 1, 2, &mut rng);
    let zero = GridForm::zeros(&g, 1);
    let mut out = Vec::new();
    for (label, spec) in builtin_family()? {
        let nu = spec.apply_n(&u)?;
        let scale = nu.max_abs();
        out.push(Check::new("bilinear", format!("{label} B(u,u)=2N(u)"), rel(&spec.apply_b(&u, &u)?, &nu.scaled(2.0), scale), 1e-12));
        let bwu = spec.apply_b(&w, &u)?;
        out.push(Check::new("bilinear", format!("{label} symmetric"), rel(&bwu, &spec.apply_b(&u, &w)?, bwu.max_abs()), 1e-12));
        out.push(Check::new("bilinear", format!("{label} B(w,0)=0"), spec.apply_b(&w, &zero)?.max_abs(), 0.0));
    }
    Ok(out)
}

/// Seeded scalar bump family on `[-6, 6)²`, `N = 32`.
pub fn bump_family(g: &Grid, members: usize, seed: u64) -> Vec<GridForm> {
    let mut rng = Seeded::new(seed);
    (0..members)
        .map(|_| {
            let width = rng.uniform(0.6, 1.2);
            gaussian_bumps(g, 0, 3, width, &mut rng)
        })
        .collect()
}

// Empirical constants, measured once on the fixed families below and frozen
// (measured value rounded up in the fourth digit).
pub const EMBEDDING_BOUND: f64 = 0.08201;
pub const PRODUCT_BOUND: f64 = 0.05820;
pub const LP_BOUND: f64 = 1.1436;

fn family_grid() -> Result<Grid> {
    Grid::new(2, 32, 6.0)
}

/// `max ‖u‖_{0,1/2,1} / ‖u‖_{1,1/2,2}` over 20 bumps.
pub fn embedding_ratio() -> Result<f64> {
    let g = family_grid()?;
    let strong = NormParams::new(1, 0.5, 2.0);
    let weak = NormParams::new(0, 0.5, 1.0);
    let mut worst = 0.0f64;
    for u in bump_family(&g, 20, 11) {
        let r = holder_norm(&u, &weak, &PairSet::Auto)?.total / holder_norm(&u, &strong, &PairSet::Auto)?.total;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `max ‖uv‖_{1,1/2,3/2} / (‖u‖_{1,1/2,1} ‖v‖_{1,1/2,1/2})` over 50 pairs.
pub fn product_ratio() -> Result<f64> {
    let g = family_grid()?;
    let (s, lambda, delta, delta2) = (1, 0.5, 1.0, 0.5);
    let us = bump_family(&g, 50, 21);
    let vs = bump_family(&g, 50, 22);
    let mut worst = 0.0f64;
    for (u, v) in us.iter().zip(&vs) {
        let uv = GridForm::scalar(&g, u.component(0).iter().zip(v.component(0)).map(|(a, b)| a * b).collect())?;
        let lhs = holder_norm(&uv, &NormParams::new(s, lambda, delta + delta2), &PairSet::Auto)?.total;
        let nu = holder_norm(u, &NormParams::new(s, lambda, delta), &PairSet::Auto)?.total;
        let nv = holder_norm(v, &NormParams::new(s, lambda, delta2), &PairSet::Auto)?.total;
        worst = worst.max(lhs / (nu * nv));
    }
    Ok(worst)
}

/// `max ‖u(t)‖_{L²} / ‖u‖_{C^{0,0,3/2}}` along heat flows of 20 bumps
/// (`δ = 3/2 > n/p = 1`).
pub fn lp_ratio() -> Result<f64> {
    let g = family_grid()?;
    let (p, delta) = (2.0, 1.5);
    let params = HeatParams::new(0.2, 0.5, 5)?;
    let mut worst = 0.0f64;
    for u0 in bump_family(&g, 20, 31) {
        let traj = crate::potentials::heat_flow(&u0, params)?;
        let denom = aniso_norm(&traj, 0, 0.0, delta, &PairSet::Auto)?.total;
        for u in traj.slices() {
            worst = worst.max(lp_norm(u, p)? / denom);
        }
    }
    Ok(worst)
}

pub fn norm_family_checks() -> Result<Vec<Check>> {
    Ok(vec![
        Check::new("norms", "multiplication ratio over 50 pairs", product_ratio()?, PRODUCT_BOUND),
        Check::new("norms", "embedding ratio over 20 fields", embedding_ratio()?, EMBEDDING_BOUND),
        Check::new("norms", "L^p ratio over 20 flows", lp_ratio()?, LP_BOUND),
    ])
}

/// Everything above: complex and projection identities for `n ∈ {2, 3, 4}`
/// on `points` per axis, heat, Fréchet, bilinear and norm-family checks.
pub fn identity_suite(points: usize) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in [2, 3, 4] {
        out.extend(complex_identities(n, points)?);
        out.extend(projection_identities(n, points)?);
    }
    out.extend(heat_checks()?);
    out.extend(frechet_checks(false)?);
    out.extend(bilinear_checks()?);
    out.extend(norm_family_checks()?);
    Ok(out)
}
