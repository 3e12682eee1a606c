//! Radial vector fields `u = -2 v(|x|, t) x` for the PS nonlinearity.
//!
//! With unit viscosity, `u` solves the PS system for any `b` exactly when
//!
//! ```text
//! v_t = v_rr + (n+1)/r v_r + (n+2) v^2 + 3 r v v_r.
//! ```
//!
//! The module integrates this equation by the method of lines, integrates the
//! self-similar profile equation
//!
//! ```text
//! w'' + (n+1)/y w' - κ y w' + (n+2) w^2 + 3 y w w' - 2κ w = 0
//! ```
//!
//! with `v(r, t) = w(r/√s)/s`, `s = 2κ(T - t)`, and shoots on `κ` for
//! profiles decaying like `c y^{-2}`.

use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dopri5, System, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::GridForm;
use crate::grid::Grid;

/// `max |v|` above which a radial run is declared to blow up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

/// Smallest admissible radial mesh.
pub const MIN_POINTS: usize = 16;

/// Scale between `v` and the lifted field: `u = -LIFT_FACTOR v(|x|) x`.
pub const LIFT_FACTOR: f64 = 2.0;

/// The lift window is 1 for `|x_j| ≤ LIFT_WINDOW_START·L` on every axis.
pub const LIFT_WINDOW_START: f64 = 0.8;

/// Interval scanned for a shooting bracket.
pub const KAPPA_RANGE: (f64, f64) = (1e-3, 1e3);

/// Fraction of the profile mesh over which the decay `w ≈ c y^{-2}` is tested.
pub const DECAY_WINDOW: f64 = 0.1;

/// Allowed spread of `y² w` around `c` in the decay window.
pub const DECAY_TOLERANCE: f64 = 0.05;

/// `v(r_i)` on the mesh `r_i = i·dr`, `i = 0..nr`; `r_0 = 0` is a regularity
/// node and `v = 0` is imposed at `r_{nr-1} = R`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: usize,
    pub dr: f64,
    pub values: Vec<f64>,
    pub t: f64,
}

impl RadialProfile {
    pub fn new(n: usize, dr: f64, values: Vec<f64>, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("radial dimension must be positive".into()));
        }
        if values.len() < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "radial mesh needs at least {MIN_POINTS} points, got {}",
                values.len()
            )));
        }
        if !(dr > 0.0 && dr.is_finite()) {
            return Err(Error::InvalidParameter(format!("radial spacing must be positive, got {dr}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n, dr, values, t })
    }

    /// Samples `f` on `points` nodes spanning `[0, radius]`.
    pub fn from_fn(n: usize, radius: f64, points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParameter("radial mesh needs at least two points".into()));
        }
        let dr = radius / (points - 1) as f64;
        Self::new(n, dr, (0..points).map(|i| f(i as f64 * dr)).collect(), 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn radius(&self) -> f64 {
        (self.len() - 1) as f64 * self.dr
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Four-point Lagrange interpolation, extended evenly through the origin
    /// and by zero beyond `R`.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let last = self.len() - 1;
        if r >= self.radius() {
            return 0.0;
        }
        let s = r / self.dr;
        let i = (s.floor() as usize).min(last - 1);
        let at = |k: isize| -> f64 {
            let k = k.unsigned_abs();
            if k > last {
                0.0
            } else {
                self.values[k]
            }
        };
        let t = s - i as f64;
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        -t * (t - 1.0) * (t - 2.0) / 6.0 * p0 + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * p1
            - (t + 1.0) * t * (t - 2.0) / 2.0 * p2
            + (t + 1.0) * t * (t - 1.0) / 6.0 * p3
    }
}

fn rhs_into(n: usize, dr: f64, v: &[f64], out: &mut [f64]) {
    let m = v.len();
    let nf = n as f64;
    let inv2 = 1.0 / (dr * dr);
    // v'(0) = 0 turns (n+1) v_r / r into (n+1) v''(0)
    out[0] = 2.0 * (nf + 2.0) * (v[1] - v[0]) * inv2 + (nf + 2.0) * v[0] * v[0];
    for i in 1..m - 1 {
        let r = i as f64 * dr;
        let vr = (v[i + 1] - v[i - 1]) / (2.0 * dr);
        let vrr = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * inv2;
        out[i] = vrr + (nf + 1.0) / r * vr + (nf + 2.0) * v[i] * v[i] + 3.0 * r * v[i] * vr;
    }
    out[m - 1] = 0.0;
}

/// Time derivative of the radial equation with centred differences.
pub fn radial_rhs(v: &RadialProfile) -> RadialProfile {
    let mut out = vec![0.0; v.len()];
    rhs_into(v.n, v.dr, &v.values, &mut out);
    RadialProfile {
        n: v.n,
        dr: v.dr,
        values: out,
        t: v.t,
    }
}

/// Largest admissible RK4 step for mesh spacing `dr`.
///
/// The origin row of the discrete operator has Gershgorin radius
/// `4(n+2)/dr²`, so `0.4 dr²` alone is not enough once `n ≥ 1`.
pub fn stability_limit(n: usize, dr: f64) -> f64 {
    let rk4_real_axis = 2.5;
    (0.4f64).min(rk4_real_axis / (4.0 * (n as f64 + 2.0))) * dr * dr
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RadialStatus {
    Completed,
    BlowUp { t_star: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialRun {
    pub status: RadialStatus,
    /// Profiles at (roughly) equally spaced times, the last one at the end of the run.
    pub snapshots: Vec<RadialProfile>,
    /// `(t, max |v|)` after every step.
    pub peak: Vec<(f64, f64)>,
}

impl RadialRun {
    pub fn last(&self) -> &RadialProfile {
        self.snapshots.last().expect("a run keeps at least its initial profile")
    }
}

/// Classical RK4 march of the radial equation up to `horizon`.
///
/// `snapshots` profiles are kept besides the initial one.
pub fn radial_evolve(v0: &RadialProfile, horizon: f64, dt: f64, snapshots: usize) -> Result<RadialRun> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let limit = stability_limit(v0.n, v0.dr);
    if !(dt > 0.0) || dt > limit {
        return Err(Error::StabilityViolation { dt, limit });
    }
    let steps = (horizon / dt).ceil() as usize;
    let every = (steps / snapshots.max(1)).max(1);
    let (n, dr) = (v0.n, v0.dr);
    let m = v0.len();
    let mut v = v0.values.clone();
    v[m - 1] = 0.0;
    let mut k = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    let mut stage = vec![0.0; m];
    let mut t = v0.t;
    let mut out = vec![v0.clone()];
    let mut peak = Vec::with_capacity(steps);
    let mut status = RadialStatus::Completed;
    for step in 1..=steps {
        let h = dt.min(v0.t + horizon - t);
        rhs_into(n, dr, &v, &mut k[0]);
        for (s, (a, b)) in [(0.5, 0), (0.5, 1), (1.0, 2)].into_iter().enumerate() {
            for i in 0..m {
                stage[i] = v[i] + a * h * k[b][i];
            }
            let (_, rest) = k.split_at_mut(s + 1);
            rhs_into(n, dr, &stage, &mut rest[0]);
        }
        for i in 0..m {
            v[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        t += h;
        let top = v.iter().fold(0.0f64, |acc, x| if x.is_nan() { f64::INFINITY } else { acc.max(x.abs()) });
        peak.push((t, top));
        if top > BLOWUP_THRESHOLD {
            status = RadialStatus::BlowUp { t_star: t };
            log::info!("radial blow-up at t = {t:.6e}");
            break;
        }
        if step % every == 0 || step == steps {
            out.push(RadialProfile {
                n,
                dr,
                values: v.clone(),
                t,
            });
        }
    }
    Ok(RadialRun {
        status,
        snapshots: out,
        peak,
    })
}

/// Smallest radius of the form `2^k` (at least 1) beyond which
/// `|f| < floor` on a sampled check out to twice that radius.
pub fn decay_radius(f: impl Fn(f64) -> f64, floor: f64) -> f64 {
    let mut radius = 1.0;
    while radius < 1e6 {
        let tail_small = (0..=200).all(|i| f(radius * (1.0 + i as f64 / 200.0)).abs() < floor);
        if tail_small {
            return radius;
        }
        radius *= 2.0;
    }
    radius
}

/// `A / (1 + r²)³`, the data family of the blow-up study.
pub fn algebraic_bump(amplitude: f64, r: f64) -> f64 {
    amplitude / (1.0 + r * r).powi(3)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub amplitude: f64,
    pub radius: f64,
    pub status: RadialStatus,
    pub final_peak: f64,
}

/// Runs [`algebraic_bump`] data for each amplitude in parallel, with the
/// Dirichlet radius chosen so the data is below `1e-10` there.
pub fn amplitude_sweep(n: usize, amplitudes: &[f64], dr: f64, horizon: f64) -> Result<Vec<SweepRow>> {
    amplitudes
        .par_iter()
        .map(|&a| {
            let radius = decay_radius(|r| algebraic_bump(a, r), 1e-10);
            let points = (radius / dr).round() as usize + 1;
            let v0 = RadialProfile::from_fn(n, radius, points, |r| algebraic_bump(a, r))?;
            let run = radial_evolve(&v0, horizon, stability_limit(n, v0.dr), 1)?;
            Ok(SweepRow {
                amplitude: a,
                radius,
                status: run.status,
                final_peak: run.peak.last().map_or(0.0, |p| p.1),
            })
        })
        .collect()
}

/// Samples `u = -2 v(|x|) x` on `grid`, damped near the box boundary.
pub fn lift_radial(v: &RadialProfile, grid: &Grid) -> Result<GridForm> {
    if v.n != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "radial profile is for n = {} but the grid has dimension {}",
            v.n,
            grid.dim()
        )));
    }
    let required = (grid.dim() as f64).sqrt() * grid.half_width();
    if v.radius() < required * (1.0 - 1e-12) {
        return Err(Error::MeshTooShort {
            radius: v.radius(),
            required,
        });
    }
    let l = grid.half_width();
    Ok(GridForm::from_fn(grid, 1, |x, c| {
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let window: f64 = x.iter().map(|a| window_1d(a.abs() / l)).product();
        -LIFT_FACTOR * v.eval(r) * x[c] * window
    }))
}

fn window_1d(s: f64) -> f64 {
    let f = |z: f64| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 };
    let t = (s - LIFT_WINDOW_START) / (1.0 - LIFT_WINDOW_START);
    f(1.0 - t) / (f(1.0 - t) + f(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfSimOptions {
    /// Start of the integration; the series `γ + a y²` supplies the data there.
    pub y0: f64,
    /// Number of uniform output intervals on `[y0, y_max]`.
    pub points: usize,
    pub rtol: f64,
    pub atol: f64,
    /// Coefficient of the `κ w` term; the profile equation carries 2.
    pub kappa_coeff: f64,
    /// `|w|` beyond which the growing mode is taken to have fired.
    pub overflow: f64,
}

impl Default for SelfSimOptions {
    fn default() -> Self {
        Self {
            y0: 1e-4,
            points: 10_000,
            rtol: 1e-12,
            atol: 1e-14,
            kappa_coeff: 2.0,
            overflow: 1e6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Divergence {
    /// `w` exceeded the overflow bound at `y`.
    Overflow { y: f64 },
    /// `w` became non-positive at `y`.
    SignFlip { y: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfSimilarProfile {
    pub n: usize,
    pub gamma: f64,
    pub kappa: f64,
    pub kappa_coeff: f64,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
    /// `y² w` at the last mesh point.
    pub c: f64,
    pub matched: bool,
    pub divergence: Option<Divergence>,
}

impl SelfSimilarProfile {
    pub fn y_max(&self) -> f64 {
        *self.y.last().expect("profiles are never empty")
    }

    /// `y³ w' + 2 y² w` at the end of the mesh; zero on an exact `c y^{-2}` tail.
    pub fn matching_functional(&self) -> f64 {
        let i = self.y.len() - 1;
        let y = self.y[i];
        y * y * (y * self.dw[i] + 2.0 * self.w[i])
    }

    /// `max |y² w - c| / c` over the last `fraction` of the mesh.
    pub fn decay_spread(&self, fraction: f64) -> f64 {
        let m = self.y.len();
        let start = ((1.0 - fraction) * (m - 1) as f64).floor() as usize;
        (start..m)
            .map(|i| (self.y[i] * self.y[i] * self.w[i] - self.c).abs())
            .fold(0.0, f64::max)
            / self.c.abs()
    }

    /// `(w, w')` by cubic Hermite interpolation; `None` outside the mesh.
    /// Below `y0` the even series is used.
    pub fn eval(&self, y: f64) -> Option<(f64, f64)> {
        let y = y.abs();
        let y0 = self.y[0];
        if y <= y0 {
            let a = series_coefficient(self.n, self.gamma, self.kappa, self.kappa_coeff);
            return Some((self.gamma + a * y * y, 2.0 * a * y));
        }
        if y > self.y_max() || self.y.len() < 2 {
            return None;
        }
        let h = self.y[1] - self.y[0];
        let i = (((y - y0) / h).floor() as usize).min(self.y.len() - 2);
        let t = (y - self.y[i]) / h;
        let (w0, w1, d0, d1) = (self.w[i], self.w[i + 1], self.dw[i] * h, self.dw[i + 1] * h);
        let (t2, t3) = (t * t, t * t * t);
        let w = (2.0 * t3 - 3.0 * t2 + 1.0) * w0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * w1 + (t3 - t2) * d1;
        let dw = ((6.0 * t2 - 6.0 * t) * w0 + (3.0 * t2 - 4.0 * t + 1.0) * d0 + (-6.0 * t2 + 6.0 * t) * w1
            + (3.0 * t2 - 2.0 * t) * d1)
            / h;
        Some((w, dw))
    }

    /// `s = 2κ(T - t)` for a blow-up time `horizon`.
    fn scale(&self, horizon: f64, t: f64) -> Result<f64> {
        let s = 2.0 * self.kappa * (horizon - t);
        if s > 0.0 {
            Ok(s)
        } else {
            Err(Error::InvalidParameter(format!("self-similar time {t} is not before {horizon}")))
        }
    }

    /// `v(r, t) = w(r/√s)/s` on `points` nodes out to the end of the profile.
    pub fn to_radial(&self, horizon: f64, t: f64, points: usize) -> Result<RadialProfile> {
        let s = self.scale(horizon, t)?;
        let radius = self.y_max() * s.sqrt();
        let mut p = RadialProfile::from_fn(self.n, radius, points, |r| self.eval(r / s.sqrt()).map_or(0.0, |e| e.0) / s)?;
        p.t = t;
        Ok(p)
    }

    /// Exact `∂_t v(r, t)` of the self-similar field.
    pub fn time_derivative(&self, horizon: f64, t: f64, r: f64) -> Result<f64> {
        let s = self.scale(horizon, t)?;
        let y = r / s.sqrt();
        let (w, dw) = self
            .eval(y)
            .ok_or_else(|| Error::InvalidParameter(format!("r = {r} lies beyond the profile")))?;
        Ok(self.kappa * (self.kappa_coeff * w + y * dw) / (s * s))
    }
}

/// `a` in `w ≈ γ + a y²`.
pub fn series_coefficient(n: usize, gamma: f64, kappa: f64, kappa_coeff: f64) -> f64 {
    let nf = n as f64 + 2.0;
    (kappa_coeff * kappa * gamma - nf * gamma * gamma) / (2.0 * nf)
}

struct ProfileOde {
    n: f64,
    kappa: f64,
    coeff: f64,
    overflow: f64,
    stop: Option<Divergence>,
}

impl System<f64, Vector2<f64>> for ProfileOde {
    fn system(&self, y: f64, s: &Vector2<f64>, ds: &mut Vector2<f64>) {
        let (w, p) = (s[0], s[1]);
        ds[0] = p;
        ds[1] = -(self.n + 1.0) / y * p + self.kappa * y * p - (self.n + 2.0) * w * w - 3.0 * y * w * p
            + self.coeff * self.kappa * w;
    }

    fn solout(&mut self, y: f64, s: &Vector2<f64>, _ds: &Vector2<f64>) -> bool {
        if !(s[0].abs() < self.overflow) {
            self.stop = Some(Divergence::Overflow { y });
        } else if s[0] <= 0.0 {
            self.stop = Some(Divergence::SignFlip { y });
        }
        self.stop.is_some()
    }
}

/// Integrates the profile equation from the series start to `y_max` with an
/// adaptive Dormand-Prince 5(4) method, sampled on a uniform mesh.
///
/// Integration stops early when `w` leaves `(0, overflow)`; the reason is
/// reported in [`SelfSimilarProfile::divergence`].
pub fn selfsim_integrate(n: usize, gamma: f64, kappa: f64, y_max: f64, opts: &SelfSimOptions) -> Result<SelfSimilarProfile> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    if !(y_max > opts.y0) || opts.points < 2 {
        return Err(Error::InvalidParameter(format!("need y_max > {} and at least two points", opts.y0)));
    }
    let y0 = opts.y0;
    let dy = (y_max - y0) / opts.points as f64;
    let mk = |w: Vec<f64>, dw: Vec<f64>, divergence| {
        let y: Vec<f64> = (0..w.len()).map(|i| y0 + i as f64 * dy).collect();
        let last = y.len() - 1;
        SelfSimilarProfile {
            n,
            gamma,
            kappa,
            kappa_coeff: opts.kappa_coeff,
            c: y[last] * y[last] * w[last],
            y,
            w,
            dw,
            matched: false,
            divergence,
        }
    };
    if gamma == 0.0 {
        let m = opts.points + 1;
        return Ok(mk(vec![0.0; m], vec![0.0; m], None));
    }
    let a = series_coefficient(n, gamma, kappa, opts.kappa_coeff);
    let ode = ProfileOde {
        n: n as f64,
        kappa,
        coeff: opts.kappa_coeff,
        overflow: opts.overflow,
        stop: None,
    };
    let start = Vector2::new(gamma + a * y0 * y0, 2.0 * a * y0);
    // the 1/y term trips the default stiffness detector near the origin, and
    // the dense output at the final endpoint is unreliable, so run one step past it
    let mut stepper = Dopri5::from_param(
        ode,
        y0,
        y_max + dy,
        dy,
        start,
        opts.rtol,
        opts.atol,
        0.9,
        0.04,
        0.2,
        10.0,
        y_max + dy - y0,
        0.0,
        10_000_000,
        u32::MAX,
        OutputType::Dense,
    );
    let outcome = stepper.integrate();
    let (mut w, mut dw): (Vec<f64>, Vec<f64>) = stepper.y_out().iter().map(|s| (s[0], s[1])).unzip();
    w.truncate(opts.points + 1);
    dw.truncate(opts.points + 1);
    let mut divergence = None;
    if let Err(e) = outcome {
        log::debug!("profile integration stopped: {e}");
        let y_stop = y0 + (w.len() - 1) as f64 * dy;
        divergence = Some(Divergence::Overflow { y: y_stop });
    }
    // trust the samples rather than the stop hook, which sees dense output only
    if let Some(i) = w.iter().position(|v| !(v.abs() < opts.overflow) || *v <= 0.0) {
        let y = y0 + i as f64 * dy;
        divergence = Some(if w[i] <= 0.0 {
            Divergence::SignFlip { y }
        } else {
            Divergence::Overflow { y }
        });
        w.truncate(i + 1);
        dw.truncate(i + 1);
    }
    if w.len() < 2 && divergence.is_none() {
        return Err(Error::InvalidParameter("profile integration produced no samples".into()));
    }
    Ok(mk(w, dw, divergence))
}

/// +1 on the overflow side of the matched profile, -1 on the sign-flip side.
fn branch(p: &SelfSimilarProfile) -> f64 {
    match p.divergence {
        Some(Divergence::Overflow { .. }) => 1.0,
        Some(Divergence::SignFlip { .. }) => -1.0,
        None if p.matching_functional() < 0.0 => -1.0,
        None => 1.0,
    }
}

/// Bisection on `κ` for the profile with `w(0) = γ` decaying like `c y^{-2}`.
///
/// `κ` is first scanned on a logarithmic grid over [`KAPPA_RANGE`]; the first
/// change of branch is then bisected down to the last representable `κ`.
pub fn selfsim_shoot(n: usize, gamma: f64, y_max: f64, opts: &SelfSimOptions) -> Result<SelfSimilarProfile> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("shooting needs gamma > 0, got {gamma}")));
    }
    let (lo, hi) = KAPPA_RANGE;
    let per_decade = 10;
    let count = ((hi / lo).log10() * per_decade as f64).round() as usize;
    let grid: Vec<f64> = (0..=count)
        .map(|i| lo * 10f64.powf(i as f64 / per_decade as f64))
        .collect();
    let signs = grid
        .par_iter()
        .map(|&k| selfsim_integrate(n, gamma, k, y_max, opts).map(|p| branch(&p)))
        .collect::<Result<Vec<f64>>>()?;
    let i = signs
        .windows(2)
        .position(|s| s[0] != s[1])
        .ok_or(Error::NoBracket { lo, hi })?;
    let (mut a, mut b) = (grid[i], grid[i + 1]);
    let side_a = signs[i];
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if branch(&selfsim_integrate(n, gamma, mid, y_max, opts)?) == side_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    let kappa = if side_a > 0.0 { a } else { b };
    let mut profile = selfsim_integrate(n, gamma, kappa, y_max, opts)?;
    profile.matched = profile.divergence.is_none() && profile.decay_spread(DECAY_WINDOW) <= DECAY_TOLERANCE;
    log::info!(
        "shooting: kappa = {kappa:.12e}, c = {:.6e}, matched = {}",
        profile.c,
        profile.matched
    );
    Ok(profile)
}
