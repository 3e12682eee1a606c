//! Discrete estimators for weighted Hölder norms.
//!
//! With `w(x) = sqrt(1 + |x|²)` and `w(x, y) = max(w(x), w(y))`:
//!
//! * `C^{s,0,δ}`: `Σ_{|α|≤s} sup w^{δ+|α|} |∂^α u|`.
//! * `⟨u⟩_{λ,δ}`: `sup w(x,y)^{δ+λ} |u(x)-u(y)| / |x-y|^λ` over pairs with
//!   `0 < |x-y| ≤ |x|/2`.
//! * `C^{0,λ,δ}`: classical `C^{0,λ}` norm on the ball `|x| ≤ 1/2`, plus
//!   `C^{0,0,δ}`, plus `⟨u⟩_{λ,δ}`.
//! * `C^{s,λ,δ}`: `Σ_{|α|≤s} ‖∂^α u‖_{C^{0,λ,δ+|α|}}`.
//!
//! Time-dependent scales count one time derivative as two space derivatives
//! and add `λ/2` Hölder quotients in time. Every sup is a max over grid
//! points (and over form components), so the estimators are exact for the
//! sampled field and bit-stable across thread counts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{partial_multi, GridForm, DECAY_LIMIT};
use crate::grid::Grid;
use crate::potentials::Trajectory;
use crate::random::Seeded;

/// Radius of the neighbourhood of the origin carrying the classical Hölder term.
pub const LOCAL_RADIUS: f64 = 0.5;

pub fn weight(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

pub fn pair_weight(x: &[f64], y: &[f64]) -> f64 {
    weight(x).max(weight(y))
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParams {
    #[serde(default)]
    pub s: usize,
    pub lambda: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_prime: Option<f64>,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "default_true")]
    pub enforce_decay: bool,
}

impl NormParams {
    pub fn new(s: usize, lambda: f64, delta: f64) -> Self {
        Self {
            s,
            lambda,
            delta,
            lambda_prime: None,
            k: 0,
            enforce_decay: true,
        }
    }

    pub fn with_f_scale(mut self, k: usize, lambda_prime: f64) -> Self {
        self.k = k;
        self.lambda_prime = Some(lambda_prime);
        self
    }

    /// Accepts `λ = 0` (no Hölder terms) besides the usual `0 < λ ≤ 1`.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda = {} outside [0, 1]", self.lambda)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        if let Some(lp) = self.lambda_prime {
            if !(lp > self.lambda && lp < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "lambda_prime = {lp} must lie in (lambda, 1)"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormTerm {
    pub label: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub terms: Vec<NormTerm>,
    pub total: f64,
}

impl NormReport {
    pub fn push(&mut self, label: impl Into<String>, value: f64) {
        self.terms.push(NormTerm {
            label: label.into(),
            value,
        });
        self.total += value;
    }

    /// Appends all terms of `other` with `prefix` prepended to their labels.
    pub fn absorb(&mut self, prefix: &str, other: NormReport) {
        for t in other.terms {
            self.push(format!("{prefix}{}", t.label), t.value);
        }
    }

    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.label == label).map(|t| t.value)
    }

    /// Sum of the terms whose label starts with `prefix`.
    pub fn sum_prefixed(&self, prefix: &str) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.label.starts_with(prefix))
            .map(|t| t.value)
            .sum()
    }
}

/// Which point pairs the weighted seminorm maximises over.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSet {
    /// Exhaustive for `n = 2, N ≤ 32`, sampled otherwise.
    Auto,
    Exhaustive,
    /// `count` seeded random pairs plus every nearest-neighbour pair.
    Sampled { count: usize, seed: u64 },
    /// Explicit flat index pairs `(x, y)`; pairs violating the constraint
    /// are ignored.
    Explicit(Vec<(usize, usize)>),
}

pub const DEFAULT_SAMPLED_PAIRS: usize = 100_000;

impl PairSet {
    fn resolve(&self, grid: &Grid) -> PairSet {
        match self {
            PairSet::Auto if grid.dim() == 2 && grid.points() <= 32 => PairSet::Exhaustive,
            PairSet::Auto => PairSet::Sampled {
                count: DEFAULT_SAMPLED_PAIRS,
                seed: 0x5eed,
            },
            other => other.clone(),
        }
    }
}

/// Point coordinates and weights, computed once per evaluation.
struct Geometry {
    dim: usize,
    coords: Vec<f64>,
    radius: Vec<f64>,
    weight: Vec<f64>,
}

impl Geometry {
    fn new(grid: &Grid) -> Self {
        let dim = grid.dim();
        let mut coords = vec![0.0; grid.len() * dim];
        for (i, x) in coords.chunks_mut(dim).enumerate() {
            grid.coords_into(i, x);
        }
        let radius: Vec<f64> = coords
            .chunks(dim)
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let weight = radius.iter().map(|r| (1.0 + r * r).sqrt()).collect();
        Self {
            dim,
            coords,
            radius,
            weight,
        }
    }

    fn x(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        self.x(i)
            .iter()
            .zip(self.x(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    fn admissible(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return None;
        }
        let dist = self.dist(i, j);
        (dist <= 0.5 * self.radius[i] * (1.0 + 1e-12)).then_some(dist)
    }
}

fn max_diff(comps: &[&[f64]], i: usize, j: usize) -> f64 {
    comps.iter().fold(0.0f64, |m, c| m.max((c[i] - c[j]).abs()))
}

fn max_abs_at(comps: &[&[f64]], i: usize) -> f64 {
    comps.iter().fold(0.0f64, |m, c| m.max(c[i].abs()))
}

fn fmax(a: f64, b: f64) -> f64 {
    a.max(b)
}

/// Flat indices `j` with every axis offset from `i` bounded by `reach`.
fn index_box(grid: &Grid, i: usize, reach: usize, mut visit: impl FnMut(usize)) {
    let n = grid.points() as isize;
    let dim = grid.dim();
    let base: Vec<isize> = (0..dim).map(|a| grid.axis_index(i, a) as isize).collect();
    let r = reach as isize;
    let lo: Vec<isize> = base.iter().map(|b| (b - r).max(0)).collect();
    let hi: Vec<isize> = base.iter().map(|b| (b + r).min(n - 1)).collect();
    let mut cur = lo.clone();
    loop {
        let flat: usize = cur
            .iter()
            .enumerate()
            .map(|(a, &c)| c as usize * grid.stride(a))
            .sum();
        visit(flat);
        let mut a = 0;
        loop {
            if a == dim {
                return;
            }
            if cur[a] < hi[a] {
                cur[a] += 1;
                break;
            }
            cur[a] = lo[a];
            a += 1;
        }
    }
}

fn sampled_pairs(grid: &Grid, geo: &Geometry, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let h = grid.spacing();
    let n = grid.points() as i64;
    let dim = grid.dim();
    let mut rng = Seeded::new(seed);
    let mut pairs = Vec::with_capacity(count + grid.len() * dim);
    let mut attempts = 0;
    while pairs.len() < count && attempts < 20 * count {
        attempts += 1;
        let i = rng.rng().gen_range(0..grid.len());
        let reach = (0.5 * geo.radius[i] / h).floor() as i64;
        if reach == 0 {
            continue;
        }
        let mut j = 0usize;
        let mut inside = true;
        for a in 0..dim {
            let c = grid.axis_index(i, a) as i64 + rng.rng().gen_range(-reach..=reach);
            if !(0..n).contains(&c) {
                inside = false;
                break;
            }
            j += c as usize * grid.stride(a);
        }
        if inside && geo.admissible(i, j).is_some() {
            pairs.push((i, j));
        }
    }
    for i in 0..grid.len() {
        for a in 0..dim {
            let c = grid.axis_index(i, a);
            let s = grid.stride(a);
            if c + 1 < grid.points() {
                pairs.push((i, i + s));
            }
            if c > 0 {
                pairs.push((i, i - s));
            }
        }
    }
    pairs.retain(|&(i, j)| geo.admissible(i, j).is_some());
    pairs
}

fn exhaustive_pairs(grid: &Grid, geo: &Geometry) -> Vec<(usize, usize)> {
    let h = grid.spacing();
    let mut pairs = Vec::new();
    for i in 0..grid.len() {
        let reach = (0.5 * geo.radius[i] / h * (1.0 + 1e-12)).floor() as usize;
        if reach > 0 {
            index_box(grid, i, reach, |j| {
                if geo.admissible(i, j).is_some() {
                    pairs.push((i, j));
                }
            });
        }
    }
    pairs
}

fn seminorm_raw(grid: &Grid, geo: &Geometry, comps: &[&[f64]], lambda: f64, delta: f64, pairs: &PairSet) -> f64 {
    let quotient = |i: usize, j: usize, dist: f64| {
        let w = geo.weight[i].max(geo.weight[j]);
        w.powf(delta + lambda) * max_diff(comps, i, j) / dist.powf(lambda)
    };
    match pairs.resolve(grid) {
        PairSet::Exhaustive => {
            let h = grid.spacing();
            (0..grid.len())
                .into_par_iter()
                .map(|i| {
                    let reach = (0.5 * geo.radius[i] / h * (1.0 + 1e-12)).floor() as usize;
                    let mut best = 0.0f64;
                    if reach > 0 {
                        index_box(grid, i, reach, |j| {
                            if let Some(dist) = geo.admissible(i, j) {
                                best = best.max(quotient(i, j, dist));
                            }
                        });
                    }
                    best
                })
                .reduce(|| 0.0, fmax)
        }
        PairSet::Sampled { count, seed } => sampled_pairs(grid, geo, count, seed)
            .par_iter()
            .map(|&(i, j)| quotient(i, j, geo.dist(i, j)))
            .reduce(|| 0.0, fmax),
        PairSet::Explicit(list) => list
            .par_iter()
            .filter(|&&(i, j)| i < grid.len() && j < grid.len())
            .filter_map(|&(i, j)| geo.admissible(i, j).map(|d| quotient(i, j, d)))
            .reduce(|| 0.0, fmax),
        PairSet::Auto => unreachable!("resolved above"),
    }
}

fn component_slices(u: &GridForm) -> Vec<&[f64]> {
    u.components().iter().map(Vec::as_slice).collect()
}

fn decay_guard(u: &GridForm, enforce: bool) -> Result<()> {
    if enforce {
        u.check_decay(DECAY_LIMIT)
    } else {
        Ok(())
    }
}

/// Weighted seminorm `⟨u⟩_{λ,δ}`, maximised over components.
pub fn holder_seminorm(u: &GridForm, lambda: f64, delta: f64, pairs: &PairSet) -> Result<f64> {
    decay_guard(u, true)?;
    let geo = Geometry::new(u.grid());
    Ok(seminorm_raw(u.grid(), &geo, &component_slices(u), lambda, delta, pairs))
}

/// `sup_x w(x)^δ |u(x)|`.
fn weighted_sup_raw(geo: &Geometry, comps: &[&[f64]], delta: f64) -> f64 {
    (0..geo.weight.len())
        .into_par_iter()
        .map(|i| geo.weight[i].powf(delta) * max_abs_at(comps, i))
        .reduce(|| 0.0, fmax)
}

/// Classical `C^{0,λ}` norm on the ball `|x| ≤ 1/2`: sup plus seminorm over
/// all grid pairs in the ball.
fn local_holder_raw(geo: &Geometry, comps: &[&[f64]], lambda: f64) -> (f64, f64) {
    let ball: Vec<usize> = (0..geo.radius.len())
        .filter(|&i| geo.radius[i] <= LOCAL_RADIUS)
        .collect();
    let sup = ball.iter().fold(0.0f64, |m, &i| m.max(max_abs_at(comps, i)));
    let semi = (0..ball.len())
        .into_par_iter()
        .map(|a| {
            let i = ball[a];
            ball[a + 1..].iter().fold(0.0f64, |m, &j| {
                m.max(max_diff(comps, i, j) / geo.dist(i, j).powf(lambda))
            })
        })
        .reduce(|| 0.0, fmax);
    (sup, semi)
}

pub fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(axis: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if axis == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[axis] = k;
            rec(axis + 1, left - k, cur, out);
        }
        cur[axis] = 0;
    }
    rec(0, max_order, &mut vec![0; dim], &mut out);
    out.sort_by_key(|a| a.iter().sum::<usize>());
    out
}

fn alpha_label(alpha: &[usize]) -> String {
    let parts: Vec<String> = alpha.iter().map(|a| a.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// `‖u‖_{C^{s,0,δ}}`, one term per multi-index.
pub fn weighted_sup_norm(u: &GridForm, s: usize, delta: f64, enforce_decay: bool) -> Result<NormReport> {
    decay_guard(u, enforce_decay)?;
    let geo = Geometry::new(u.grid());
    let mut report = NormReport::default();
    for alpha in multi_indices(u.dim(), s) {
        let order = alpha.iter().sum::<usize>() as f64;
        let du = partial_multi(u, &alpha);
        let value = weighted_sup_raw(&geo, &component_slices(&du), delta + order);
        report.push(format!("sup{}", alpha_label(&alpha)), value);
    }
    Ok(report)
}

/// `‖u‖_{C^{0,λ,δ}}` split into `local`, `sup` and `holder` terms.
fn c0_report(geo: &Geometry, grid: &Grid, comps: &[&[f64]], lambda: f64, delta: f64, pairs: &PairSet) -> NormReport {
    let mut r = NormReport::default();
    r.push("sup", weighted_sup_raw(geo, comps, delta));
    if lambda > 0.0 {
        let (sup, semi) = local_holder_raw(geo, comps, lambda);
        r.push("local", sup + semi);
        r.push("holder", seminorm_raw(grid, geo, comps, lambda, delta, pairs));
    }
    r
}

/// `‖u‖_{C^{s,λ,δ}}`.
pub fn holder_norm(u: &GridForm, p: &NormParams, pairs: &PairSet) -> Result<NormReport> {
    p.validate()?;
    decay_guard(u, p.enforce_decay)?;
    let geo = Geometry::new(u.grid());
    let mut report = NormReport::default();
    for alpha in multi_indices(u.dim(), p.s) {
        let order = alpha.iter().sum::<usize>() as f64;
        let du = partial_multi(u, &alpha);
        let part = c0_report(&geo, u.grid(), &component_slices(&du), p.lambda, p.delta + order, pairs);
        report.absorb(&format!("{}.", alpha_label(&alpha)), part);
    }
    Ok(report)
}

/// Discrete `L^p` norm of the pointwise Euclidean magnitude, cell measure `h^n`.
pub fn lp_norm(u: &GridForm, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("L^p needs finite p >= 1, got {p}")));
    }
    let sum: f64 = u.pointwise_norm().iter().map(|v| v.powf(p)).sum();
    Ok((sum * u.grid().cell_volume()).powf(1.0 / p))
}

/// `‖u‖_{C^{s(0,λ,δ)}_T}` for a list of slices sharing one grid.
fn aniso_zero(slices: &[GridForm], times: &[f64], lambda: f64, delta: f64, pairs: &PairSet) -> NormReport {
    let grid = slices[0].grid();
    let geo = Geometry::new(grid);
    let mut report = NormReport::default();
    let mut space = 0.0f64;
    let mut holder = NormReport::default();
    for u in slices {
        let r = c0_report(&geo, grid, &component_slices(u), lambda, delta, pairs);
        space = space.max(r.total);
        if r.total >= holder.total {
            holder = r;
        }
    }
    if lambda == 0.0 {
        report.push("sup", space);
        return report;
    }
    report.push("space", space);
    // sup over t' != t'' of the weighted sup of the difference
    let nt = slices.len();
    let pairs_t: Vec<(usize, usize)> = (0..nt).flat_map(|a| (a + 1..nt).map(move |b| (a, b))).collect();
    let quotient = pairs_t
        .par_iter()
        .map(|&(a, b)| {
            let diff = &slices[a] - &slices[b];
            weighted_sup_raw(&geo, &component_slices(&diff), delta) / (times[b] - times[a]).abs().powf(lambda / 2.0)
        })
        .reduce(|| 0.0, fmax);
    report.push("time", quotient);
    report
}

fn map_slices(traj: &Trajectory, f: impl Fn(&GridForm) -> GridForm + Sync + Send) -> Vec<GridForm> {
    traj.slices().par_iter().map(f).collect()
}

/// `‖u‖_{C^{s(s,λ,δ)}_T}`: `Σ_{|α|+2j ≤ 2s} ‖∂_x^α ∂_t^j u‖_{C^{s(0,λ,δ+|α|)}_T}`.
pub fn aniso_norm(traj: &Trajectory, s: usize, lambda: f64, delta: f64, pairs: &PairSet) -> Result<NormReport> {
    if traj.len() < 2 * s + 2 {
        return Err(Error::TooFewTimeSlices {
            required: 2 * s + 2,
            got: traj.len(),
        });
    }
    let times = traj.params().times();
    let mut report = NormReport::default();
    let mut dt_j = traj.clone();
    for j in 0..=s {
        if j > 0 {
            dt_j = dt_j.time_derivative()?;
        }
        for alpha in multi_indices(traj.grid().dim(), 2 * (s - j)) {
            let order = alpha.iter().sum::<usize>() as f64;
            let slices = if order == 0.0 {
                dt_j.slices().to_vec()
            } else {
                map_slices(&dt_j, |u| partial_multi(u, &alpha))
            };
            let part = aniso_zero(&slices, &times, lambda, delta + order, pairs);
            report.absorb(&format!("t{j}{}.", alpha_label(&alpha)), part);
        }
    }
    Ok(report)
}

/// `‖u‖_{C^{k,s(s,λ,δ)}_T}`: `Σ_{|β|≤k} ‖∂^β u‖_{C^{s(s,λ,δ+|β|)}_T}`.
pub fn ck_aniso_norm(traj: &Trajectory, k: usize, s: usize, lambda: f64, delta: f64, pairs: &PairSet) -> Result<NormReport> {
    let mut report = NormReport::default();
    for beta in multi_indices(traj.grid().dim(), k) {
        let order = beta.iter().sum::<usize>() as f64;
        let db = if order == 0.0 {
            traj.clone()
        } else {
            Trajectory::new(*traj.params(), map_slices(traj, |u| partial_multi(u, &beta)))?
        };
        let part = aniso_norm(&db, s, lambda, delta + order, pairs)?;
        report.absorb(&format!("b{}.", alpha_label(&beta)), part);
    }
    Ok(report)
}

fn trajectory_decay(traj: &Trajectory, enforce: bool) -> Result<()> {
    if enforce {
        traj.slices().iter().try_for_each(|u| u.check_decay(DECAY_LIMIT))
    } else {
        Ok(())
    }
}

/// `‖u‖_{F^{k,s(s,λ,λ',δ)}_T} = ‖u‖_{C^{k+1,s(s,λ,δ)}_T} + ‖u‖_{C^{k,s(s,λ',δ)}_T}`.
pub fn f_norm(traj: &Trajectory, p: &NormParams, pairs: &PairSet) -> Result<NormReport> {
    p.validate()?;
    let lp = p
        .lambda_prime
        .ok_or_else(|| Error::InvalidParameter("the F scale needs lambda_prime".into()))?;
    trajectory_decay(traj, p.enforce_decay)?;
    let mut report = NormReport::default();
    report.absorb("lambda:", ck_aniso_norm(traj, p.k + 1, p.s, p.lambda, p.delta, pairs)?);
    report.absorb("lambda':", ck_aniso_norm(traj, p.k, p.s, lp, p.delta, pairs)?);
    Ok(report)
}

/// The anisotropic `C^{s(0,λ,δ)}_T` norm, used as a cheap proxy.
pub fn proxy_norm(traj: &Trajectory, lambda: f64, delta: f64, pairs: &PairSet) -> f64 {
    ProxyNorm::new(traj.grid(), lambda, delta, pairs).eval(traj)
}

/// Sampled pairs used by [`ProxyNorm`] when given [`PairSet::Auto`].
pub const PROXY_SAMPLED_PAIRS: usize = 4096;

/// Cheap stand-in for `‖·‖_{C^{s(0,λ,δ)}_T}` used as a convergence metric.
///
/// The spatial pair set is resolved once, and the time quotient only visits
/// slice pairs whose index gap is a power of two.
pub struct ProxyNorm {
    lambda: f64,
    delta: f64,
    geo: Geometry,
    weight_delta: Vec<f64>,
    pairs: Vec<(usize, usize)>,
}

impl ProxyNorm {
    pub fn new(grid: &Grid, lambda: f64, delta: f64, pairs: &PairSet) -> Self {
        let geo = Geometry::new(grid);
        let resolved = match pairs {
            PairSet::Auto => PairSet::Sampled {
                count: PROXY_SAMPLED_PAIRS,
                seed: 0x5eed,
            },
            other => other.resolve(grid),
        };
        let pairs = if lambda > 0.0 {
            match resolved {
                PairSet::Sampled { count, seed } => sampled_pairs(grid, &geo, count, seed),
                PairSet::Explicit(list) => list
                    .into_iter()
                    .filter(|&(i, j)| i < grid.len() && j < grid.len() && geo.admissible(i, j).is_some())
                    .collect(),
                _ => exhaustive_pairs(grid, &geo),
            }
        } else {
            Vec::new()
        };
        let weight_delta = geo.weight.iter().map(|w| w.powf(delta)).collect();
        Self {
            lambda,
            delta,
            geo,
            weight_delta,
            pairs,
        }
    }

    fn space(&self, u: &GridForm) -> f64 {
        let comps = component_slices(u);
        let mut total = (0..self.weight_delta.len())
            .map(|i| self.weight_delta[i] * max_abs_at(&comps, i))
            .fold(0.0, fmax);
        if self.lambda > 0.0 {
            let (sup, semi) = local_holder_raw(&self.geo, &comps, self.lambda);
            let geo = &self.geo;
            let holder = self
                .pairs
                .iter()
                .map(|&(i, j)| {
                    let w = geo.weight[i].max(geo.weight[j]);
                    w.powf(self.delta + self.lambda) * max_diff(&comps, i, j) / geo.dist(i, j).powf(self.lambda)
                })
                .fold(0.0, fmax);
            total += sup + semi + holder;
        }
        total
    }

    pub fn eval(&self, traj: &Trajectory) -> f64 {
        let slices = traj.slices();
        let space = slices.par_iter().map(|u| self.space(u)).reduce(|| 0.0, fmax);
        if self.lambda == 0.0 {
            return space;
        }
        let times = traj.params().times();
        let nt = slices.len();
        let mut lagged = Vec::new();
        let mut lag = 1;
        while lag < nt {
            lagged.extend((0..nt - lag).map(|a| (a, a + lag)));
            lag *= 2;
        }
        let quotient = lagged
            .par_iter()
            .map(|&(a, b)| {
                let comps_a = component_slices(&slices[a]);
                let comps_b = component_slices(&slices[b]);
                let sup = (0..self.weight_delta.len())
                    .map(|i| {
                        let d = comps_a.iter().zip(&comps_b).fold(0.0f64, |m, (x, y)| m.max((x[i] - y[i]).abs()));
                        self.weight_delta[i] * d
                    })
                    .fold(0.0, fmax);
                sup / (times[b] - times[a]).powf(self.lambda / 2.0)
            })
            .reduce(|| 0.0, fmax);
        space + quotient
    }
}
