//! Heat and Newton potentials realised as Fourier multipliers.
//!
//! * [`poisson_potential`]: `u0 ↦ e^{μtΔ} u0` on the slice grid.
//! * [`volume_potential`]: the Duhamel integral `∫_0^t e^{μ(t-s)Δ} f(s) ds`,
//!   trapezoidal on the slice grid with exact semigroup factors.
//! * [`leray_project`]: `d* d (-Δ)^{-1}`, the L² projection onto `ker d*`
//!   along `range d`.
//! * [`phi_inverse_d`]: `d* (-Δ)^{-1}`, the co-closed inverse of `d` on
//!   closed forms.
//!
//! The pointwise kernels [`heat_kernel`] and [`newton_kernel`] are kept for
//! direct-quadrature cross-checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{GridForm, SpectralForm, DECAY_LIMIT};
use crate::grid::Grid;

/// Viscosity, horizon and number of stored time slices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatParams {
    pub mu: f64,
    pub horizon: f64,
    pub slices: usize,
}

impl HeatParams {
    pub fn new(mu: f64, horizon: f64, slices: usize) -> Result<Self> {
        let p = Self {
            mu,
            horizon,
            slices,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.slices < 2 {
            return Err(Error::TooFewTimeSlices {
                required: 2,
                got: self.slices,
            });
        }
        Ok(())
    }

    /// Uniform step `τ = T / (nt - 1)`.
    pub fn step(&self) -> f64 {
        self.horizon / (self.slices - 1) as f64
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.step()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.slices).map(|j| self.time(j)).collect()
    }

    /// Same horizon with `2(nt-1)+1` slices.
    pub fn refined(&self) -> Self {
        Self {
            slices: 2 * (self.slices - 1) + 1,
            ..*self
        }
    }
}

/// A form-valued function on the uniform time grid over `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    params: HeatParams,
    slices: Vec<GridForm>,
}

impl Trajectory {
    pub fn new(params: HeatParams, slices: Vec<GridForm>) -> Result<Self> {
        params.validate()?;
        if slices.len() != params.slices {
            return Err(Error::ShapeMismatch(format!(
                "{} slices for a time grid of {}",
                slices.len(),
                params.slices
            )));
        }
        for s in &slices[1..] {
            s.ensure_compatible(&slices[0])?;
        }
        Ok(Self { params, slices })
    }

    pub fn zeros(grid: &Grid, degree: usize, params: HeatParams) -> Self {
        Self {
            params,
            slices: vec![GridForm::zeros(grid, degree); params.slices],
        }
    }

    /// Samples `f(t)` at every slice time.
    pub fn from_fn<F: Fn(f64) -> GridForm>(params: HeatParams, f: F) -> Result<Self> {
        Self::new(params, params.times().into_iter().map(f).collect())
    }

    pub fn params(&self) -> &HeatParams {
        &self.params
    }

    pub fn slices(&self) -> &[GridForm] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [GridForm] {
        &mut self.slices
    }

    pub fn into_slices(self) -> Vec<GridForm> {
        self.slices
    }

    pub fn slice(&self, j: usize) -> &GridForm {
        &self.slices[j]
    }

    pub fn last(&self) -> &GridForm {
        self.slices.last().expect("at least two slices")
    }

    pub fn grid(&self) -> &Grid {
        self.slices[0].grid()
    }

    pub fn degree(&self) -> usize {
        self.slices[0].degree()
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.slices.iter().fold(0.0f64, |m, s| m.max(s.max_abs()))
    }

    pub fn map_slices<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&GridForm) -> GridForm + Sync + Send,
    {
        Self::new(self.params, self.slices.par_iter().map(f).collect())
    }

    /// `self += a * other`, slice by slice.
    pub fn axpy(&mut self, a: f64, other: &Trajectory) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch("trajectory lengths differ".into()));
        }
        for (s, o) in self.slices.iter_mut().zip(&other.slices) {
            s.axpy(a, o)?;
        }
        Ok(())
    }

    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Second-order finite-difference time derivative: centred inside,
    /// one-sided at both ends.
    pub fn time_derivative(&self) -> Result<Trajectory> {
        let nt = self.len();
        if nt < 3 {
            return Err(Error::TooFewTimeSlices {
                required: 3,
                got: nt,
            });
        }
        let tau = self.params.step();
        let comb = |terms: &[(f64, usize)]| -> GridForm {
            let mut out = GridForm::zeros(self.grid(), self.degree());
            for &(c, j) in terms {
                out.axpy(c / tau, &self.slices[j]).expect("compatible");
            }
            out
        };
        let slices = (0..nt)
            .into_par_iter()
            .map(|j| {
                if j == 0 {
                    comb(&[(-1.5, 0), (2.0, 1), (-0.5, 2)])
                } else if j == nt - 1 {
                    comb(&[(1.5, nt - 1), (-2.0, nt - 2), (0.5, nt - 3)])
                } else {
                    comb(&[(0.5, j + 1), (-0.5, j - 1)])
                }
            })
            .collect();
        Trajectory::new(self.params, slices)
    }
}

/// Heat fundamental solution `θ(t) (4πμt)^{-n/2} exp(-|x|²/4μt)`, with
/// `n = x.len()`.
pub fn heat_kernel(x: &[f64], t: f64, mu: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let n = x.len() as i32;
    (4.0 * PI * mu * t).powf(-(n as f64) / 2.0) * (-r2 / (4.0 * mu * t)).exp()
}

/// Surface area of the unit sphere in `R^n`, `2π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    // Γ(n/2) for integer or half-integer argument
    let gamma_half = |m: usize| -> f64 {
        if m % 2 == 0 {
            (1..m / 2).map(|k| k as f64).product()
        } else {
            let mut g = PI.sqrt();
            let mut a = 0.5;
            while a < m as f64 / 2.0 - 0.25 {
                g *= a;
                a += 1.0;
            }
            g
        }
    };
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Two-sided fundamental solution of the Laplacian: `ln|x| / π` for
/// `n = 2`, `|x|^{2-n} / (σ_n (2-n))` for `n >= 3`.
pub fn newton_kernel(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter("Newton kernel needs n >= 2".into()));
    }
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    Ok(if n == 2 {
        r.ln() / PI
    } else {
        r.powi(2 - n as i32) / (sphere_area(n) * (2.0 - n as f64))
    })
}

fn heat_symbol(grid: &Grid, mu: f64, t: f64) -> Vec<f64> {
    grid.wavenumber_sq().iter().map(|k2| (-mu * k2 * t).exp()).collect()
}

/// `e^{μtΔ} u` for a single time `t >= 0`.
pub fn semigroup(u: &GridForm, mu: f64, t: f64) -> GridForm {
    let mut s = u.to_spectral();
    s.apply_multiplier(&heat_symbol(u.grid(), mu, t));
    s.to_grid()
}

/// Heat flow of `u0` on the slice grid, without the decay check.
pub fn heat_flow(u0: &GridForm, params: HeatParams) -> Result<Trajectory> {
    params.validate()?;
    let base = u0.to_spectral();
    let times = params.times();
    let slices = times
        .par_iter()
        .enumerate()
        .map(|(j, &t)| {
            if j == 0 {
                u0.clone()
            } else {
                let mut s = base.clone();
                s.apply_multiplier(&heat_symbol(u0.grid(), params.mu, t));
                s.to_grid()
            }
        })
        .collect();
    Trajectory::new(params, slices)
}

/// Poisson parabolic potential: the heat semigroup applied to `u0`.
/// The slice at `t = 0` is `u0` itself.
pub fn poisson_potential(u0: &GridForm, params: HeatParams) -> Result<Trajectory> {
    u0.check_decay(DECAY_LIMIT)?;
    heat_flow(u0, params)
}

/// Volume parabolic potential (Duhamel integral) of `f`, composite
/// trapezoid on the slice grid: `U_{j+1} = E(U_j + τ/2 F_j) + τ/2 F_{j+1}`
/// with `E = e^{μτΔ}`.
pub fn volume_potential(f: &Trajectory) -> Result<Trajectory> {
    let params = *f.params();
    let grid = f.grid();
    let tau = params.step();
    let decay = heat_symbol(grid, params.mu, tau);
    let spectra: Vec<SpectralForm> = f.slices().par_iter().map(|s| s.to_spectral()).collect();
    let ncomp = spectra[0].components().len();
    // component-wise recursion
    let per_comp: Vec<Vec<Vec<Complex64>>> = (0..ncomp)
        .into_par_iter()
        .map(|c| {
            let mut out = Vec::with_capacity(params.slices);
            let mut acc = vec![Complex64::default(); grid.len()];
            out.push(acc.clone());
            for j in 0..params.slices - 1 {
                let fj = &spectra[j].components()[c];
                let fj1 = &spectra[j + 1].components()[c];
                for i in 0..grid.len() {
                    acc[i] = decay[i] * (acc[i] + 0.5 * tau * fj[i]) + 0.5 * tau * fj1[i];
                }
                out.push(acc.clone());
            }
            out
        })
        .collect();
    let slices = (0..params.slices)
        .into_par_iter()
        .map(|j| {
            let comps = (0..ncomp).map(|c| grid.inverse(&per_comp[c][j])).collect();
            GridForm::from_components(grid, f.degree(), comps).expect("consistent shape")
        })
        .collect();
    Trajectory::new(params, slices)
}

/// Leray-Helmholtz projection in Fourier space; bins with `|k| = 0` pass
/// through unchanged.
pub fn leray_project_spectral(s: &SpectralForm) -> SpectralForm {
    let ksq = s.grid().wavenumber_sq();
    let mut out = s.d().d_star();
    if s.degree() >= s.grid().dim() {
        // d = 0 on top-degree forms: range d* d is empty except k = 0
        out = SpectralForm::zeros(s.grid(), s.degree());
    }
    for (o, src) in out.components_mut().iter_mut().zip(s.components()) {
        for ((z, k2), u) in o.iter_mut().zip(ksq).zip(src) {
            if *k2 == 0.0 {
                *z = *u;
            } else {
                *z /= *k2;
            }
        }
    }
    out
}

/// Projection onto co-closed forms along exact forms.
pub fn leray_project(u: &GridForm) -> GridForm {
    leray_project_spectral(&u.to_spectral()).to_grid()
}

/// Result of [`phi_inverse_d`].
#[derive(Clone, Debug)]
pub struct InverseD {
    pub form: GridForm,
    /// Magnitude of the discarded mean of `g` when it exceeds
    /// [`ZERO_MODE_LIMIT`].
    pub zero_mode_loss: Option<f64>,
}

/// Closedness tolerance of [`phi_inverse_d`], relative to `max|g|`.
pub const CLOSED_LIMIT: f64 = 1e-8;
/// Mean value above which [`phi_inverse_d`] reports a zero-mode loss.
pub const ZERO_MODE_LIMIT: f64 = 1e-10;

/// The co-closed `u` with `du = g` for closed `g`: `û = d*ĝ / |k|²`.
pub fn phi_inverse_d(g: &GridForm) -> Result<InverseD> {
    if g.degree() == 0 {
        return Err(Error::ShapeMismatch("phi_inverse_d needs degree >= 1".into()));
    }
    let s = g.to_spectral();
    let scale = g.max_abs();
    if g.degree() < g.dim() {
        let dg = s.d().to_grid().max_abs();
        if dg > CLOSED_LIMIT * scale {
            return Err(Error::NotClosed {
                residual: dg,
                limit: CLOSED_LIMIT * scale,
            });
        }
    }
    let mean = s
        .components()
        .iter()
        .map(|c| c[0].norm() / g.grid().len() as f64)
        .fold(0.0f64, f64::max);
    let zero_mode_loss = if mean > ZERO_MODE_LIMIT {
        log::warn!("phi_inverse_d: discarding mean {mean:.3e} of a closed form");
        Some(mean)
    } else {
        None
    };
    let mut out = s.d_star();
    let ksq = g.grid().wavenumber_sq();
    for c in out.components_mut() {
        for (z, k2) in c.iter_mut().zip(ksq) {
            if *k2 == 0.0 {
                *z = Complex64::default();
            } else {
                *z /= *k2;
            }
        }
    }
    Ok(InverseD {
        form: out.to_grid(),
        zero_mode_loss,
    })
}
