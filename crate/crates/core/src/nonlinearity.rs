//! Quadratic nonlinearities built from two constant-coefficient bilinear maps.
//!
//! For a q-form `u`,
//!
//! ```text
//! N(u) = M1((d ⊕ d*) u, u) + d M2(u, u)
//! ```
//!
//! where the first slot of `M1` runs over the components of `du` followed by
//! the components of `d*u`. The symmetric linearisation is
//! `B(u, w) = Q(u, w) + Q(w, u)` with `Q(u, w) = M1((d ⊕ d*) u, w) + d M2(u, w)`,
//! so `B(u, u) = 2 N(u)`.
//!
//! Built-ins are generated from pointwise exterior algebra so they share the
//! generic evaluation path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{self, binomial, star_coeffs, wedge_coeffs, GridForm};

/// Dense bilinear map `out[o] = Σ c[o][l][r] left[l] right[r]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    pub shape: [usize; 3],
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(out: usize, left: usize, right: usize) -> Self {
        Self {
            shape: [out, left, right],
            data: vec![0.0; out * left * right],
        }
    }

    fn offset(&self, o: usize, l: usize, r: usize) -> usize {
        (o * self.shape[1] + l) * self.shape[2] + r
    }

    pub fn get(&self, o: usize, l: usize, r: usize) -> f64 {
        self.data[self.offset(o, l, r)]
    }

    pub fn set(&mut self, o: usize, l: usize, r: usize, v: f64) {
        let k = self.offset(o, l, r);
        self.data[k] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0.0)
    }

    fn nonzeros(&self, o: usize) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for l in 0..self.shape[1] {
            for r in 0..self.shape[2] {
                let c = self.get(o, l, r);
                if c != 0.0 {
                    out.push((l, r, c));
                }
            }
        }
        out
    }

    /// Pointwise evaluation on component arrays.
    fn apply(&self, left: &[&[f64]], right: &[&[f64]], len: usize) -> Vec<Vec<f64>> {
        (0..self.shape[0])
            .into_par_iter()
            .map(|o| {
                let mut acc = vec![0.0; len];
                for (l, r, c) in self.nonzeros(o) {
                    for ((z, x), y) in acc.iter_mut().zip(left[l]).zip(right[r]) {
                        *z += c * x * y;
                    }
                }
                acc
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Lamb,
    Ps,
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lamb" => Ok(Self::Lamb),
            "ps" => Ok(Self::Ps),
            "burgers" => Err(Error::UnsupportedCombination(
                "burgers needs n = 1; use ps with b = 0 on a field constant in the other axes".into(),
            )),
            other => Err(Error::UnsupportedCombination(format!("unknown nonlinearity `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySpec {
    pub n: usize,
    pub q: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub m1: Tensor3,
    pub m2: Tensor3,
}

fn m1_shape(n: usize, q: usize) -> [usize; 3] {
    let slot = binomial(n, q + 1) + if q > 0 { binomial(n, q - 1) } else { 0 };
    [binomial(n, q), slot, binomial(n, q)]
}

fn m2_shape(n: usize, q: usize) -> [usize; 3] {
    let low = if q > 0 { binomial(n, q - 1) } else { 0 };
    [low, binomial(n, q), binomial(n, q)]
}

impl NonlinearitySpec {
    /// Generic spec from explicit tensors.
    pub fn new(n: usize, q: usize, m1: Tensor3, m2: Tensor3) -> Result<Self> {
        let spec = Self {
            n,
            q,
            name: None,
            b: None,
            m1,
            m2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `N ≡ 0`.
    pub fn zero(n: usize, q: usize) -> Result<Self> {
        let [a, b, c] = m1_shape(n, q);
        let [x, y, z] = m2_shape(n, q);
        Self::new(n, q, Tensor3::zeros(a, b, c), Tensor3::zeros(x, y, z))
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=crate::grid::MAX_DIM).contains(&self.n) || self.q > self.n {
            return Err(Error::InvalidParameter(format!(
                "no forms of degree {} in dimension {}",
                self.q, self.n
            )));
        }
        for (t, want, tag) in [
            (&self.m1, m1_shape(self.n, self.q), "M1"),
            (&self.m2, m2_shape(self.n, self.q), "M2"),
        ] {
            if t.shape != want || t.data.len() != want.iter().product::<usize>() {
                return Err(Error::ShapeMismatch(format!(
                    "{tag} has shape {:?}, expected {want:?}",
                    t.shape
                )));
            }
            if t.data.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!("{tag} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// True when both tensors vanish.
    pub fn is_zero(&self) -> bool {
        self.m1.is_zero() && self.m2.is_zero()
    }

    fn check(&self, u: &GridForm) -> Result<()> {
        if u.dim() != self.n || u.degree() != self.q {
            return Err(Error::ShapeMismatch(format!(
                "nonlinearity acts on ({}, {}) forms, got ({}, {})",
                self.n,
                self.q,
                u.dim(),
                u.degree()
            )));
        }
        Ok(())
    }

    /// Components of `du` followed by those of `d*u`.
    fn derivative_slot(&self, u: &GridForm) -> Vec<Vec<f64>> {
        let s = u.to_spectral();
        let mut out = Vec::with_capacity(self.m1.shape[1]);
        if self.q < self.n {
            out.extend(s.d().to_grid().into_components());
        }
        if self.q > 0 {
            out.extend(s.d_star().to_grid().into_components());
        }
        out
    }

    /// `M1(Du, w)` accumulated into `acc`, with `Du` precomputed.
    fn m1_term(&self, du: &[Vec<f64>], w: &GridForm, acc: &mut [Vec<f64>]) {
        let left: Vec<&[f64]> = du.iter().map(Vec::as_slice).collect();
        let right: Vec<&[f64]> = w.components().iter().map(Vec::as_slice).collect();
        for (dst, src) in acc.iter_mut().zip(self.m1.apply(&left, &right, w.grid().len())) {
            dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
        }
    }

    /// Pointwise `M2(u, w)` (plus `M2(w, u)` when symmetric) as a (q−1)-form.
    fn m2_form(&self, u: &GridForm, w: &GridForm, symmetric: bool) -> Result<GridForm> {
        let len = u.grid().len();
        let uc: Vec<&[f64]> = u.components().iter().map(Vec::as_slice).collect();
        let wc: Vec<&[f64]> = w.components().iter().map(Vec::as_slice).collect();
        let mut comps = self.m2.apply(&uc, &wc, len);
        if symmetric {
            for (dst, src) in comps.iter_mut().zip(self.m2.apply(&wc, &uc, len)) {
                dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
            }
        }
        GridForm::from_components(u.grid(), self.q - 1, comps)
    }

    fn add_dm2(&self, u: &GridForm, w: &GridForm, symmetric: bool, acc: &mut [Vec<f64>]) -> Result<()> {
        if self.q == 0 || self.m2.is_zero() {
            return Ok(());
        }
        let dm2 = exterior::d(&self.m2_form(u, w, symmetric)?);
        for (dst, src) in acc.iter_mut().zip(dm2.components()) {
            dst.iter_mut().zip(src).for_each(|(a, b)| *a += b);
        }
        Ok(())
    }

    /// `N(u)`.
    pub fn apply_n(&self, u: &GridForm) -> Result<GridForm> {
        self.check(u)?;
        let mut acc = vec![vec![0.0; u.grid().len()]; u.table().len()];
        if !self.m1.is_zero() {
            let du = self.derivative_slot(u);
            self.m1_term(&du, u, &mut acc);
        }
        self.add_dm2(u, u, false, &mut acc)?;
        GridForm::from_components(u.grid(), self.q, acc)
    }

    /// Symmetric linearisation `B(w, u)`.
    pub fn apply_b(&self, w: &GridForm, u: &GridForm) -> Result<GridForm> {
        self.check(u)?;
        self.check(w)?;
        u.ensure_compatible(w)?;
        let mut acc = vec![vec![0.0; u.grid().len()]; u.table().len()];
        if !self.m1.is_zero() {
            let du = self.derivative_slot(u);
            self.m1_term(&du, w, &mut acc);
            let dw = self.derivative_slot(w);
            self.m1_term(&dw, u, &mut acc);
        }
        self.add_dm2(u, w, true, &mut acc)?;
        GridForm::from_components(u.grid(), self.q, acc)
    }
}

/// Built-in nonlinearity on 1-forms.
///
/// * `lamb` (n = 3): `⋆(⋆du ∧ u) + d|u|²/2`, which is `(u·∇)u`.
/// * `ps` (any n): `b ⋆(⋆du ∧ u) + d|u|²/2 − (d*u) u/2`, i.e.
///   `b (u·∇)u + ((1−b)∇|u|² + (div u) u)/2`.
pub fn builtin(name: Builtin, n: usize, b: Option<f64>) -> Result<NonlinearitySpec> {
    if !(2..=crate::grid::MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedCombination(format!("dimension {n}")));
    }
    let coupling = match name {
        Builtin::Lamb => {
            if n != 3 {
                return Err(Error::UnsupportedCombination(format!("lamb needs n = 3, got {n}")));
            }
            1.0
        }
        Builtin::Ps => b.unwrap_or(1.0),
    };
    if !coupling.is_finite() {
        return Err(Error::InvalidParameter("b must be finite".into()));
    }
    let mut spec = NonlinearitySpec::zero(n, 1)?;
    let two = binomial(n, 2);
    let mut basis2 = vec![0.0; two];
    let mut basis1 = vec![0.0; n];
    for a in 0..two {
        basis2[a] = 1.0;
        let s2 = star_coeffs(n, &basis2, 2);
        for i in 0..n {
            basis1[i] = 1.0;
            let out = star_coeffs(n, &wedge_coeffs(n, &s2, n - 2, &basis1, 1), n - 1);
            for (o, c) in out.into_iter().enumerate() {
                if c != 0.0 {
                    spec.m1.set(o, a, i, coupling * c);
                }
            }
            basis1[i] = 0.0;
        }
        basis2[a] = 0.0;
    }
    if name == Builtin::Ps {
        for i in 0..n {
            spec.m1.set(i, two, i, -0.5);
        }
    }
    for i in 0..n {
        spec.m2.set(0, i, i, 0.5);
    }
    spec.name = Some(name);
    spec.b = (name == Builtin::Ps).then_some(coupling);
    Ok(spec)
}
