//! Differential forms on the periodic grid: multi-index bookkeeping, wedge,
//! Hodge star, exterior derivative, codifferential and Laplacian.
//!
//! Sign conventions (Euclidean metric, standard orientation):
//!
//! * `⋆ dx_I = sign(I, I^c) dx_{I^c}`, so `⋆⋆ = (-1)^{q(n-q)}`.
//! * `(du)_J = Σ_m (-1)^m ∂_{j_m} u_{J∖j_m}` for `J = (j_0 < … < j_q)`.
//! * `d*` is the formal L² adjoint of `d`, hence `d*d + dd* = -Δ` and
//!   `d*u = -div u` on 1-forms.
//!
//! All derivatives are Fourier multipliers; see [`crate::grid::Grid`] for
//! the wavenumber convention.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign of the permutation that sorts `seq` (entries distinct), or 0 if an
/// entry repeats.
pub fn permutation_sign(seq: &[usize]) -> i32 {
    let mut inversions = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] == seq[j] {
                return 0;
            }
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All strictly increasing `q`-tuples from `{0..n}` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiIndexTable {
    dim: usize,
    degree: usize,
    indices: Vec<Vec<usize>>,
}

impl MultiIndexTable {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut indices = Vec::with_capacity(binomial(dim, degree));
        let mut cur = Vec::with_capacity(degree);
        fn rec(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..dim {
                cur.push(i);
                rec(i + 1, dim, left - 1, cur, out);
                cur.pop();
            }
        }
        if degree <= dim {
            rec(0, dim, degree, &mut cur, &mut indices);
        }
        Self {
            dim,
            degree,
            indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn get(&self, rank: usize) -> &[usize] {
        &self.indices[rank]
    }

    /// Position of a strictly increasing tuple.
    pub fn rank(&self, tuple: &[usize]) -> Option<usize> {
        self.indices
            .binary_search_by(|probe| probe.as_slice().cmp(tuple))
            .ok()
    }

    /// Complementary multi-index of entry `rank`, in increasing order.
    pub fn complement(&self, rank: usize) -> Vec<usize> {
        let idx = &self.indices[rank];
        (0..self.dim).filter(|i| !idx.contains(i)).collect()
    }
}

/// One term of the exterior derivative `d_q`: `(d u)_high += sign ∂_axis u_low`.
#[derive(Clone, Copy, Debug)]
pub struct DerivativeEntry {
    pub high: usize,
    pub low: usize,
    pub axis: usize,
    pub sign: f64,
}

/// Coefficient pattern of `d_q` on `(n, q)` forms.
pub fn derivative_entries(dim: usize, degree: usize) -> Vec<DerivativeEntry> {
    if degree >= dim {
        return Vec::new();
    }
    let low = MultiIndexTable::new(dim, degree);
    let high = MultiIndexTable::new(dim, degree + 1);
    let mut out = Vec::new();
    for (h, idx) in high.indices().iter().enumerate() {
        for m in 0..idx.len() {
            let rest: Vec<usize> = idx
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != m)
                .map(|(_, &v)| v)
                .collect();
            let l = low.rank(&rest).expect("sub-index present");
            out.push(DerivativeEntry {
                high: h,
                low: l,
                axis: idx[m],
                sign: if m % 2 == 0 { 1.0 } else { -1.0 },
            });
        }
    }
    out
}

/// `(a, b, out, sign)`: `dx_{A[a]} ∧ dx_{B[b]} = sign dx_{C[out]}`.
pub fn wedge_entries(dim: usize, p: usize, q: usize) -> Vec<(usize, usize, usize, f64)> {
    let ta = MultiIndexTable::new(dim, p);
    let tb = MultiIndexTable::new(dim, q);
    let tc = MultiIndexTable::new(dim, p + q);
    let mut out = Vec::new();
    for (a, ia) in ta.indices().iter().enumerate() {
        for (b, ib) in tb.indices().iter().enumerate() {
            let seq: Vec<usize> = ia.iter().chain(ib.iter()).copied().collect();
            let sign = permutation_sign(&seq);
            if sign == 0 {
                continue;
            }
            let mut sorted = seq.clone();
            sorted.sort_unstable();
            let c = tc.rank(&sorted).expect("sorted index present");
            out.push((a, b, c, sign as f64));
        }
    }
    out
}

/// `(in, out, sign)`: `⋆ dx_I = sign dx_{I^c}`.
pub fn star_entries(dim: usize, q: usize) -> Vec<(usize, usize, f64)> {
    let t = MultiIndexTable::new(dim, q);
    let tc = MultiIndexTable::new(dim, dim - q);
    (0..t.len())
        .map(|i| {
            let comp = t.complement(i);
            let seq: Vec<usize> = t.get(i).iter().chain(comp.iter()).copied().collect();
            let out = tc.rank(&comp).expect("complement present");
            (i, out, permutation_sign(&seq) as f64)
        })
        .collect()
}

/// Exterior product of two coefficient vectors at a single point.
pub fn wedge_coeffs(dim: usize, a: &[f64], p: usize, b: &[f64], q: usize) -> Vec<f64> {
    let mut out = vec![0.0; binomial(dim, p + q)];
    if p + q > dim {
        return Vec::new();
    }
    for (i, j, k, s) in wedge_entries(dim, p, q) {
        out[k] += s * a[i] * b[j];
    }
    out
}

/// Hodge star of a coefficient vector at a single point.
pub fn star_coeffs(dim: usize, a: &[f64], q: usize) -> Vec<f64> {
    let mut out = vec![0.0; binomial(dim, dim - q)];
    for (i, o, s) in star_entries(dim, q) {
        out[o] += s * a[i];
    }
    out
}

/// A q-form sampled on the grid: one scalar field per increasing multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct GridForm {
    grid: Grid,
    table: MultiIndexTable,
    comps: Vec<Vec<f64>>,
}

impl GridForm {
    pub fn zeros(grid: &Grid, degree: usize) -> Self {
        let table = MultiIndexTable::new(grid.dim(), degree);
        let comps = vec![vec![0.0; grid.len()]; table.len()];
        Self {
            grid: grid.clone(),
            table,
            comps,
        }
    }

    pub fn from_components(grid: &Grid, degree: usize, comps: Vec<Vec<f64>>) -> Result<Self> {
        if degree > grid.dim() {
            return Err(Error::DegreeOverflow {
                p: degree,
                q: 0,
                n: grid.dim(),
            });
        }
        let table = MultiIndexTable::new(grid.dim(), degree);
        if comps.len() != table.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} components for a {degree}-form in dimension {}, expected {}",
                comps.len(),
                grid.dim(),
                table.len()
            )));
        }
        if let Some(c) = comps.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::ShapeMismatch(format!(
                "component has {} samples, grid has {}",
                c.len(),
                grid.len()
            )));
        }
        if comps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            grid: grid.clone(),
            table,
            comps,
        })
    }

    /// Samples `f(x, component)` at every grid point.
    pub fn from_fn<F>(grid: &Grid, degree: usize, f: F) -> Self
    where
        F: Fn(&[f64], usize) -> f64,
    {
        let table = MultiIndexTable::new(grid.dim(), degree);
        let comps = (0..table.len())
            .map(|c| grid.sample(|x| f(x, c)))
            .collect();
        Self {
            grid: grid.clone(),
            table,
            comps,
        }
    }

    /// A 0-form from samples.
    pub fn scalar(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        Self::from_components(grid, 0, vec![data])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn table(&self) -> &MultiIndexTable {
        &self.table
    }

    pub fn degree(&self) -> usize {
        self.table.degree()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    pub fn component(&self, rank: usize) -> &[f64] {
        &self.comps[rank]
    }

    /// Component of the increasing multi-index `idx` (0-based axes).
    pub fn component_of(&self, idx: &[usize]) -> Option<&[f64]> {
        self.table.rank(idx).map(|r| self.comps[r].as_slice())
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest absolute sample over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean norm of the coefficient vector.
    pub fn pointwise_norm(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        out.iter_mut().for_each(|v| *v = v.sqrt());
        out
    }

    /// Discrete L² inner product, `h^n Σ_x Σ_I u_I v_I`.
    pub fn inner(&self, other: &GridForm) -> Result<f64> {
        self.ensure_compatible(other)?;
        let s: f64 = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum();
        Ok(s * self.grid.cell_volume())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let s: f64 = self.comps.iter().flatten().map(|v| v * v).sum();
        s * self.grid.cell_volume()
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            grid: self.grid.clone(),
            table: self.table.clone(),
            comps: self
                .comps
                .iter()
                .map(|c| c.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &GridForm) -> Result<()> {
        self.ensure_compatible(other)?;
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in c.iter_mut().zip(o) {
                *x += a * y;
            }
        }
        Ok(())
    }

    pub fn ensure_compatible(&self, other: &GridForm) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.degree() != other.degree() {
            return Err(Error::ShapeMismatch(format!(
                "degree {} vs {}",
                self.degree(),
                other.degree()
            )));
        }
        Ok(())
    }

    /// Largest magnitude on the outermost grid face (`x_i = -L` for some
    /// axis), which is where periodic wraparound pollution shows first.
    pub fn boundary_magnitude(&self) -> f64 {
        let g = &self.grid;
        let mut m = 0.0f64;
        for i in 0..g.len() {
            if (0..g.dim()).any(|a| g.axis_index(i, a) == 0) {
                for c in &self.comps {
                    m = m.max(c[i].abs());
                }
            }
        }
        m
    }

    /// Truncated free-space check: the boundary face must stay below
    /// `limit` times the peak magnitude.
    pub fn check_decay(&self, limit: f64) -> Result<()> {
        let peak = self.max_abs();
        if peak == 0.0 {
            return Ok(());
        }
        let boundary = self.boundary_magnitude();
        if boundary > limit * peak {
            return Err(Error::DecayViolation {
                boundary: boundary / peak,
                limit,
            });
        }
        Ok(())
    }

    pub fn to_spectral(&self) -> SpectralForm {
        SpectralForm {
            grid: self.grid.clone(),
            table: self.table.clone(),
            comps: self.comps.par_iter().map(|c| self.grid.forward(c)).collect(),
        }
    }
}

/// Relative decay threshold for the truncated free-space mode.
pub const DECAY_LIMIT: f64 = 1e-6;

impl Add for &GridForm {
    type Output = GridForm;
    fn add(self, rhs: &GridForm) -> GridForm {
        let mut out = self.clone();
        out.axpy(1.0, rhs).expect("compatible forms");
        out
    }
}

impl Sub for &GridForm {
    type Output = GridForm;
    fn sub(self, rhs: &GridForm) -> GridForm {
        let mut out = self.clone();
        out.axpy(-1.0, rhs).expect("compatible forms");
        out
    }
}

impl Neg for &GridForm {
    type Output = GridForm;
    fn neg(self) -> GridForm {
        self.scaled(-1.0)
    }
}

impl Mul<&GridForm> for f64 {
    type Output = GridForm;
    fn mul(self, rhs: &GridForm) -> GridForm {
        rhs.scaled(self)
    }
}

/// Fourier coefficients of a [`GridForm`], same component layout.
#[derive(Clone, Debug)]
pub struct SpectralForm {
    grid: Grid,
    table: MultiIndexTable,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralForm {
    pub fn zeros(grid: &Grid, degree: usize) -> Self {
        let table = MultiIndexTable::new(grid.dim(), degree);
        let comps = vec![vec![Complex64::default(); grid.len()]; table.len()];
        Self {
            grid: grid.clone(),
            table,
            comps,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn degree(&self) -> usize {
        self.table.degree()
    }

    pub fn table(&self) -> &MultiIndexTable {
        &self.table
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.comps
    }

    pub fn to_grid(&self) -> GridForm {
        GridForm {
            grid: self.grid.clone(),
            table: self.table.clone(),
            comps: self.comps.par_iter().map(|c| self.grid.inverse(c)).collect(),
        }
    }

    /// Multiplies every component by a real per-bin symbol.
    pub fn apply_multiplier(&mut self, symbol: &[f64]) {
        self.comps.par_iter_mut().for_each(|c| {
            for (z, s) in c.iter_mut().zip(symbol) {
                *z *= *s;
            }
        });
    }

    pub fn axpy(&mut self, a: Complex64, other: &SpectralForm) {
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in c.iter_mut().zip(o) {
                *x += a * y;
            }
        }
    }

    /// Exterior derivative in Fourier space.
    pub fn d(&self) -> SpectralForm {
        let n = self.grid.dim();
        let q = self.degree();
        if q >= n {
            return SpectralForm::zeros(&self.grid, (q + 1).min(n));
        }
        let mut out = SpectralForm::zeros(&self.grid, q + 1);
        let entries = derivative_entries(n, q);
        let grid = &self.grid;
        out.comps.par_iter_mut().enumerate().for_each(|(h, dst)| {
            for e in entries.iter().filter(|e| e.high == h) {
                let k = grid.derivative_wavenumbers(e.axis);
                for ((z, u), kk) in dst.iter_mut().zip(&self.comps[e.low]).zip(k) {
                    *z += Complex64::new(0.0, e.sign * kk) * u;
                }
            }
        });
        out
    }

    /// Codifferential in Fourier space.
    pub fn d_star(&self) -> SpectralForm {
        let n = self.grid.dim();
        let q = self.degree();
        if q == 0 {
            // d*_{-1} = 0; keep the degree-0 shape
            return SpectralForm::zeros(&self.grid, 0);
        }
        let mut out = SpectralForm::zeros(&self.grid, q - 1);
        let entries = derivative_entries(n, q - 1);
        let grid = &self.grid;
        out.comps.par_iter_mut().enumerate().for_each(|(l, dst)| {
            for e in entries.iter().filter(|e| e.low == l) {
                let k = grid.derivative_wavenumbers(e.axis);
                for ((z, v), kk) in dst.iter_mut().zip(&self.comps[e.high]).zip(k) {
                    *z += Complex64::new(0.0, -e.sign * kk) * v;
                }
            }
        });
        out
    }

    /// Partial derivative of every component along `axis`.
    pub fn partial(&self, axis: usize) -> SpectralForm {
        let k = self.grid.derivative_wavenumbers(axis);
        let mut out = self.clone();
        out.comps.par_iter_mut().for_each(|c| {
            for (z, kk) in c.iter_mut().zip(k) {
                *z *= Complex64::new(0.0, *kk);
            }
        });
        out
    }

    pub fn laplacian(&self) -> SpectralForm {
        let sym: Vec<f64> = self.grid.wavenumber_sq().iter().map(|k| -k).collect();
        let mut out = self.clone();
        out.apply_multiplier(&sym);
        out
    }
}

/// Pointwise exterior product `a ∧ b`.
pub fn wedge(a: &GridForm, b: &GridForm) -> Result<GridForm> {
    a.grid.ensure_same(&b.grid)?;
    let (p, q, n) = (a.degree(), b.degree(), a.dim());
    if p + q > n {
        return Err(Error::DegreeOverflow { p, q, n });
    }
    let mut out = GridForm::zeros(&a.grid, p + q);
    let entries = wedge_entries(n, p, q);
    out.comps.par_iter_mut().enumerate().for_each(|(k, dst)| {
        for &(i, j, _, s) in entries.iter().filter(|e| e.2 == k) {
            for ((z, x), y) in dst.iter_mut().zip(&a.comps[i]).zip(&b.comps[j]) {
                *z += s * x * y;
            }
        }
    });
    Ok(out)
}

pub fn hodge_star(u: &GridForm) -> GridForm {
    let (n, q) = (u.dim(), u.degree());
    let mut out = GridForm::zeros(&u.grid, n - q);
    for (i, o, s) in star_entries(n, q) {
        out.comps[o] = u.comps[i].iter().map(|v| s * v).collect();
    }
    out
}

/// Exterior derivative; the zero form of degree `q+1` (capped at `n`) when
/// `q >= n`.
pub fn d(u: &GridForm) -> GridForm {
    if u.degree() >= u.dim() {
        return GridForm::zeros(&u.grid, u.dim());
    }
    u.to_spectral().d().to_grid()
}

/// Codifferential; the zero 0-form when `q = 0`.
pub fn d_star(u: &GridForm) -> GridForm {
    if u.degree() == 0 {
        return GridForm::zeros(&u.grid, 0);
    }
    u.to_spectral().d_star().to_grid()
}

/// `d*d u + dd* u`, with the term that leaves the complex dropped at
/// `q = 0` and `q = n`. Equals `-Δu` on every degree.
pub fn hodge_laplacian(u: &GridForm) -> GridForm {
    let s = u.to_spectral();
    let mut out = SpectralForm::zeros(u.grid(), u.degree());
    if u.degree() < u.dim() {
        out.axpy(Complex64::new(1.0, 0.0), &s.d().d_star());
    }
    if u.degree() > 0 {
        out.axpy(Complex64::new(1.0, 0.0), &s.d_star().d());
    }
    out.to_grid()
}

/// Componentwise Laplacian `Σ ∂_j²`.
pub fn laplacian(u: &GridForm) -> GridForm {
    u.to_spectral().laplacian().to_grid()
}

/// Componentwise `∂_axis`.
pub fn partial(u: &GridForm, axis: usize) -> GridForm {
    u.to_spectral().partial(axis).to_grid()
}

/// Componentwise mixed derivative `∂^alpha` (`alpha[i]` = order along axis i).
pub fn partial_multi(u: &GridForm, alpha: &[usize]) -> GridForm {
    let mut s = u.to_spectral();
    for (axis, &order) in alpha.iter().enumerate() {
        for _ in 0..order {
            s = s.partial(axis);
        }
    }
    s.to_grid()
}

/// Classical vector calculus on 1-form proxies, computed directly from
/// partial derivatives rather than through `d`/`d*`.
pub mod vector {
    use super::*;

    pub fn grad(f: &GridForm) -> Result<GridForm> {
        if f.degree() != 0 {
            return Err(Error::ShapeMismatch("grad needs a 0-form".into()));
        }
        let s = f.to_spectral();
        let comps = (0..f.dim())
            .map(|a| s.partial(a).to_grid().comps.remove(0))
            .collect();
        GridForm::from_components(f.grid(), 1, comps)
    }

    pub fn div(u: &GridForm) -> Result<GridForm> {
        if u.degree() != 1 {
            return Err(Error::ShapeMismatch("div needs a 1-form".into()));
        }
        let mut acc = vec![0.0; u.grid().len()];
        for a in 0..u.dim() {
            let c = GridForm::scalar(u.grid(), u.component(a).to_vec())?;
            let dc = partial(&c, a);
            for (z, v) in acc.iter_mut().zip(dc.component(0)) {
                *z += v;
            }
        }
        GridForm::scalar(u.grid(), acc)
    }

    /// Curl of a 3-vector field.
    pub fn curl(u: &GridForm) -> Result<GridForm> {
        if u.dim() != 3 || u.degree() != 1 {
            return Err(Error::ShapeMismatch("curl needs a 1-form in 3D".into()));
        }
        let g = u.grid();
        let der = |comp: usize, axis: usize| -> Vec<f64> {
            let c = GridForm::scalar(g, u.component(comp).to_vec()).expect("valid");
            partial(&c, axis).comps.remove(0)
        };
        let sub = |a: Vec<f64>, b: Vec<f64>| -> Vec<f64> {
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        };
        let c0 = sub(der(2, 1), der(1, 2));
        let c1 = sub(der(0, 2), der(2, 0));
        let c2 = sub(der(1, 0), der(0, 1));
        GridForm::from_components(g, 1, vec![c0, c1, c2])
    }
}
