//! Closed-form oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use derham_ns::nonlinearity::{builtin, Builtin};
use derham_ns::potentials::HeatParams;
use derham_ns::solver::ProblemSpec;
use derham_ns::spaces::weight;
use derham_ns::{Grid, GridForm};

/// `e^{-z} I_k(z)` by the trapezoid rule on `(1/π)∫_0^π e^{z cos θ} cos kθ dθ`,
/// which converges geometrically for this periodic integrand.
pub fn scaled_bessel_i(k: usize, z: f64) -> f64 {
    let m = 4096;
    let h = PI / m as f64;
    let f = |th: f64| (z * (th.cos() - 1.0)).exp() * (k as f64 * th).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h / PI
}

/// Viscous Burgers `V_t + V V_x = μ V_xx` with `V(x, 0) = A sin(πx/L)` on
/// the periodic interval `[-L, L)`, by the Cole-Hopf transform.
pub struct ColeHopf {
    pub amplitude: f64,
    pub half_width: f64,
    pub mu: f64,
    coeffs: Vec<f64>,
}

impl ColeHopf {
    pub fn new(amplitude: f64, half_width: f64, mu: f64) -> Self {
        let z = amplitude * half_width / (2.0 * mu * PI);
        let mut coeffs = vec![scaled_bessel_i(0, z)];
        for k in 1..200 {
            let c = scaled_bessel_i(k, z);
            if c.abs() < 1e-18 * coeffs[0] {
                break;
            }
            coeffs.push(c);
        }
        Self {
            amplitude,
            half_width,
            mu,
            coeffs,
        }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let kappa = PI / self.half_width;
        let (mut phi, mut phi_x) = (self.coeffs[0], 0.0);
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let kk = k as f64 * kappa;
            let decay = (-self.mu * kk * kk * t).exp();
            phi += 2.0 * c * decay * (kk * x).cos();
            phi_x -= 2.0 * c * decay * kk * (kk * x).sin();
        }
        -2.0 * self.mu * phi_x / phi
    }
}

/// PS with `b = 0` on `u = (U(x_1), 0)` reduces to `U_t + (3/2) U U_x = μ U_xx`,
/// so `U = V / 1.5` with `V` the Burgers solution.
pub const BURGERS_RESCALE: f64 = 1.5;

pub fn burgers_problem(points: usize, slices: usize, amplitude: f64) -> (ProblemSpec, ColeHopf) {
    let (l, mu, horizon) = (PI, 0.1, 0.5);
    let g = Grid::new(2, points, l).unwrap();
    let u0 = GridForm::from_fn(&g, 1, |x, c| {
        if c == 0 {
            amplitude / BURGERS_RESCALE * (PI * x[0] / l).sin()
        } else {
            0.0
        }
    });
    let heat = HeatParams::new(mu, horizon, slices).unwrap();
    let mut spec = ProblemSpec::new(u0, heat, builtin(Builtin::Ps, 2, Some(0.0)).unwrap(), false).unwrap();
    spec.periodic = true;
    spec.solver.tol = 1e-9;
    (spec, ColeHopf::new(amplitude, l, mu))
}

pub fn burgers_error(spec: &ProblemSpec, u_final: &GridForm, oracle: &ColeHopf) -> f64 {
    let t = spec.heat.horizon;
    let g = &spec.grid;
    let mut err = u_final.component(1).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..g.len() {
        let x = g.coords(i);
        let want = oracle.eval(x[0], t) / BURGERS_RESCALE;
        err = err.max((u_final.component(0)[i] - want).abs());
    }
    err
}

/// Taylor-Green vortex `(sin x1 cos x2, -cos x1 sin x2)` on `[-π, π)^2`.
pub fn taylor_green(g: &Grid) -> GridForm {
    GridForm::from_fn(g, 1, |x, c| {
        if c == 0 {
            x[0].sin() * x[1].cos()
        } else {
            -x[0].cos() * x[1].sin()
        }
    })
}

pub fn taylor_green_pressure(g: &Grid, mu: f64, t: f64) -> GridForm {
    GridForm::from_fn(g, 0, |x, _| ((2.0 * x[0]).cos() + (2.0 * x[1]).cos()) * (-4.0 * mu * t).exp() / 4.0)
}

pub fn taylor_green_problem(points: usize, slices: usize) -> ProblemSpec {
    let g = Grid::new(2, points, PI).unwrap();
    let heat = HeatParams::new(0.1, 1.0, slices).unwrap();
    let mut spec = ProblemSpec::new(taylor_green(&g), heat, builtin(Builtin::Ps, 2, Some(1.0)).unwrap(), true).unwrap();
    spec.periodic = true;
    spec.solver.tol = 1e-12;
    spec
}

/// Largest deviation after removing the mean difference.
pub fn error_up_to_constant(a: &GridForm, b: &GridForm) -> f64 {
    let d = a - b;
    let c = d.component(0);
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    c.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()))
}

pub fn gaussian(g: &Grid) -> GridForm {
    GridForm::from_fn(g, 0, |x, _| (-x.iter().map(|v| v * v).sum::<f64>()).exp())
}

/// Maximum of `(1 + r^2) exp(-r^2)` over a 1000 x 1000 sample of `[-l, l]^2`.
pub fn brute_weighted_sup_gaussian(l: f64) -> f64 {
    let m = 1000;
    let mut best = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            let x = -l + 2.0 * l * a as f64 / (m - 1) as f64;
            let y = -l + 2.0 * l * b as f64 / (m - 1) as f64;
            let r2 = x * x + y * y;
            best = best.max((1.0 + r2) * (-r2).exp());
        }
    }
    best
}

/// Every ordered pair of grid points, checked against the constraint directly.
pub fn brute_seminorm(g: &Grid, u: &[f64], lambda: f64, delta: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..g.len() {
        let x = g.coords(i);
        let rx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        for j in 0..g.len() {
            if i == j {
                continue;
            }
            let y = g.coords(j);
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dist > rx / 2.0 {
                continue;
            }
            let w = weight(&x).max(weight(&y));
            best = best.max(w.powf(delta + lambda) * (u[i] - u[j]).abs() / dist.powf(lambda));
        }
    }
    best
}

pub fn smooth_bump(r: f64) -> f64 {
    if r < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// `(2π ∫_0^1 bump(r)^p r dr)^{1/p}` by composite Simpson.
pub fn bump_lp_quadrature(p: f64) -> f64 {
    let m = 200_000;
    let h = 1.0 / m as f64;
    let f = |r: f64| smooth_bump(r).powf(p) * r;
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (2.0 * PI * s * h / 3.0).powf(1.0 / p)
}
