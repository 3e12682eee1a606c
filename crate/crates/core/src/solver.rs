//! Mild fixed-point solver.
//!
//! The problem `∂_t u - μΔu + N(u) + a dp = f`, `u(0) = u0` (with
//! `d*u = 0` when `a = 1`) is recast as
//!
//! ```text
//! u + [P] Ψ N(u) = v0,    v0 = [P](Ψ f + Ψ0 u0)
//! ```
//!
//! where `Ψ` is the Duhamel integral, `Ψ0` the heat semigroup and `P` the
//! Leray projection (only when `a = 1`). The equation is solved by damped
//! Picard iteration over whole trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{self, partial, GridForm, DECAY_LIMIT};
use crate::grid::Grid;
use crate::nonlinearity::NonlinearitySpec;
use crate::potentials::{heat_flow, leray_project, phi_inverse_d, volume_potential, HeatParams, Trajectory};
use crate::spaces::{f_norm, weighted_sup_norm, NormParams, NormReport, PairSet, ProxyNorm};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iter: usize,
    pub theta: f64,
    pub blowup_threshold: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200,
            theta: 1.0,
            blowup_threshold: 1e6,
        }
    }
}

/// Smallest damping factor reached by automatic halving.
pub const MIN_THETA: f64 = 0.125;

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub grid: Grid,
    pub q: usize,
    /// `a = 1`: project onto co-closed forms and recover a pressure.
    pub projected: bool,
    pub heat: HeatParams,
    pub nonlinearity: NonlinearitySpec,
    pub u0: GridForm,
    /// Right-hand side; `None` means `f = 0`.
    pub f: Option<Trajectory>,
    pub norms: NormParams,
    pub solver: SolverParams,
    /// Data is genuinely periodic, so the free-space decay checks are skipped.
    pub periodic: bool,
}

impl ProblemSpec {
    /// Problem with zero forcing and default solver and norm settings.
    pub fn new(u0: GridForm, heat: HeatParams, nonlinearity: NonlinearitySpec, projected: bool) -> Result<Self> {
        let spec = Self {
            grid: u0.grid().clone(),
            q: u0.degree(),
            projected,
            heat,
            nonlinearity,
            u0,
            f: None,
            norms: NormParams::new(0, 0.5, 0.0),
            solver: SolverParams::default(),
            periodic: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.dim();
        self.heat.validate()?;
        self.norms.validate()?;
        if self.u0.grid() != &self.grid || self.u0.degree() != self.q {
            return Err(Error::ShapeMismatch("u0 does not live on the problem grid and degree".into()));
        }
        if self.nonlinearity.n != n || self.nonlinearity.q != self.q {
            return Err(Error::ShapeMismatch(format!(
                "nonlinearity is for ({}, {}) but the problem is ({n}, {})",
                self.nonlinearity.n, self.nonlinearity.q, self.q
            )));
        }
        if let Some(f) = &self.f {
            if f.grid() != &self.grid || f.degree() != self.q || f.params() != &self.heat {
                return Err(Error::ShapeMismatch("forcing trajectory does not match the problem".into()));
            }
        }
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_iter == 0 || !(s.theta > 0.0 && s.theta <= 1.0) || !(s.blowup_threshold > 0.0) {
            return Err(Error::InvalidParameter(format!("solver settings {s:?}")));
        }
        if self.projected {
            if self.q == 0 || self.q >= n {
                return Err(Error::UnsupportedCombination(format!(
                    "a = 1 needs 1 <= q <= n-1, got q = {}",
                    self.q
                )));
            }
            let div = exterior::d_star(&self.u0).max_abs();
            if div > 1e-8 * self.u0.max_abs() {
                return Err(Error::InvalidParameter(format!(
                    "a = 1 needs d*u0 = 0, |d*u0| = {div:.3e}"
                )));
            }
        }
        Ok(())
    }

    fn project(&self, t: Trajectory) -> Result<Trajectory> {
        if self.projected {
            t.map_slices(leray_project)
        } else {
            Ok(t)
        }
    }

    fn pairs(&self) -> PairSet {
        PairSet::Auto
    }
}

/// `v0 = [P](Ψ f + Ψ0 u0)`.
pub fn assemble_rhs(spec: &ProblemSpec) -> Result<Trajectory> {
    spec.validate()?;
    if !spec.periodic {
        spec.u0.check_decay(DECAY_LIMIT)?;
    }
    let mut v0 = heat_flow(&spec.u0, spec.heat)?;
    if let Some(f) = &spec.f {
        v0.axpy(1.0, &volume_potential(f)?)?;
    }
    spec.project(v0)
}

/// `N(u(t))` slice by slice.
pub fn nonlinear_trajectory(spec: &NonlinearitySpec, u: &Trajectory) -> Result<Trajectory> {
    let slices = u
        .slices()
        .par_iter()
        .map(|s| spec.apply_n(s))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(*u.params(), slices)
}

/// `v0 - [P] Ψ N(u)`.
fn fixed_point_map(spec: &ProblemSpec, v0: &Trajectory, u: &Trajectory) -> Result<Trajectory> {
    let mut out = v0.clone();
    if spec.nonlinearity.is_zero() {
        return Ok(out);
    }
    let duhamel = spec.project(volume_potential(&nonlinear_trajectory(&spec.nonlinearity, u)?)?)?;
    out.axpy(-1.0, &duhamel)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    BlowUpSuspected { t_star: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Proxy norm of `u - G(u)` relative to `G(u)`.
    pub residual: f64,
    /// Proxy norm of the update relative to the new iterate.
    pub change: f64,
    pub theta: f64,
}

/// Per-slice energy bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyDiagnostics {
    pub times: Vec<f64>,
    /// `‖u‖²`.
    pub energy: Vec<f64>,
    /// `μ Σ_j ‖∂_j u‖²`.
    pub dissipation: Vec<f64>,
    /// `([P] N u, u)`.
    pub nonlinear: Vec<f64>,
    /// `(f, u)`.
    pub forcing: Vec<f64>,
    /// `|∂_t‖u‖² + 2 dissipation + 2 nonlinear - 2 forcing|`.
    pub residual: Vec<f64>,
    /// `C^{0,0,δ}` norm of each slice.
    pub weighted_sup: Vec<f64>,
}

impl EnergyDiagnostics {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |m, v| m.max(*v))
    }

    /// True when the energy never increases by more than `slack` relative.
    pub fn non_increasing(&self, slack: f64) -> bool {
        self.energy.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub u: Trajectory,
    /// Pressure (degree `q-1`), only for `a = 1` runs that did not blow up.
    pub p: Option<Trajectory>,
    pub iterations: usize,
    pub relative_change: f64,
    pub history: Vec<IterationRecord>,
    pub diagnostics: Option<EnergyDiagnostics>,
    /// Full F-norm report when `norms.lambda_prime` is set.
    pub norm_report: Option<NormReport>,
}

/// First slice time at which `u` is non-finite or exceeds `threshold`.
fn blowup_time(u: &Trajectory, threshold: f64) -> Option<f64> {
    u.slices()
        .iter()
        .enumerate()
        .find(|(_, s)| !s.is_finite() || s.max_abs() > threshold)
        .map(|(j, _)| u.params().time(j))
}

fn relative(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den.max(f64::MIN_POSITIVE)
    }
}

pub fn picard_solve(spec: &ProblemSpec) -> Result<SolveResult> {
    let v0 = assemble_rhs(spec)?;
    iterate(spec, &v0, v0.clone())
}

/// Same as [`picard_solve`], starting from a caller-supplied first iterate.
pub fn picard_solve_from(spec: &ProblemSpec, initial: Trajectory) -> Result<SolveResult> {
    let v0 = assemble_rhs(spec)?;
    if initial.params() != v0.params() || initial.grid() != v0.grid() || initial.degree() != v0.degree() {
        return Err(Error::ShapeMismatch("initial iterate does not match the problem".into()));
    }
    iterate(spec, &v0, initial)
}

fn iterate(spec: &ProblemSpec, v0: &Trajectory, mut u: Trajectory) -> Result<SolveResult> {
    let params = spec.solver;
    let (lambda, delta) = (spec.norms.lambda, spec.norms.delta);
    let metric = ProxyNorm::new(&spec.grid, lambda, delta, &spec.pairs());
    let proxy = |t: &Trajectory| metric.eval(t);
    let mut theta = params.theta;
    let mut prev_residual = f64::INFINITY;
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut change = f64::INFINITY;
    for iter in 1..=params.max_iter {
        if let Some(t_star) = blowup_time(&u, params.blowup_threshold) {
            status = SolveStatus::BlowUpSuspected { t_star };
            break;
        }
        let g = match fixed_point_map(spec, v0, &u) {
            Ok(g) => g,
            Err(Error::NonFinite) => {
                status = SolveStatus::BlowUpSuspected {
                    t_star: blowup_time(&u, 0.0).unwrap_or(spec.heat.horizon),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        let step = g.difference(&u)?;
        let residual = relative(proxy(&step), proxy(&g));
        if residual > prev_residual && theta > MIN_THETA {
            theta = (theta / 2.0).max(MIN_THETA);
            log::debug!("residual increased, damping to {theta}");
        }
        prev_residual = residual;
        u.axpy(theta, &step)?;
        change = relative(theta * proxy(&step), proxy(&u));
        history.push(IterationRecord {
            iter,
            residual,
            change,
            theta,
        });
        log::debug!("iteration {iter}: residual {residual:.3e}, change {change:.3e}");
        if !change.is_finite() {
            status = SolveStatus::BlowUpSuspected {
                t_star: blowup_time(&u, params.blowup_threshold).unwrap_or(spec.heat.horizon),
            };
            break;
        }
        if change <= params.tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    if matches!(status, SolveStatus::MaxIter) {
        if let Some(t_star) = blowup_time(&u, params.blowup_threshold) {
            status = SolveStatus::BlowUpSuspected { t_star };
        }
    }
    let healthy = !matches!(status, SolveStatus::BlowUpSuspected { .. });
    let p = if spec.projected && healthy {
        Some(recover_pressure(spec, &u)?)
    } else {
        None
    };
    let diagnostics = if healthy { Some(energy_monitor(spec, &u)?) } else { None };
    let norm_report = if healthy && spec.norms.lambda_prime.is_some() {
        let mut p = spec.norms.clone();
        p.enforce_decay &= !spec.periodic;
        Some(f_norm(&u, &p, &spec.pairs())?)
    } else {
        None
    };
    Ok(SolveResult {
        status,
        u,
        p,
        iterations: history.len(),
        relative_change: change,
        history,
        diagnostics,
        norm_report,
    })
}

/// Pressure with `dp = (I - P)(f - N u)` at every slice.
pub fn recover_pressure(spec: &ProblemSpec, u: &Trajectory) -> Result<Trajectory> {
    if !spec.projected {
        return Err(Error::UnsupportedCombination("pressure exists only for a = 1".into()));
    }
    let nu = nonlinear_trajectory(&spec.nonlinearity, u)?;
    let slices = (0..u.len())
        .into_par_iter()
        .map(|j| {
            let mut g = match &spec.f {
                Some(f) => f.slice(j).clone(),
                None => GridForm::zeros(u.grid(), spec.q),
            };
            g.axpy(-1.0, nu.slice(j))?;
            let exact = &g - &leray_project(&g);
            if exact.max_abs() == 0.0 {
                return Ok(GridForm::zeros(u.grid(), spec.q - 1));
            }
            Ok(phi_inverse_d(&exact)?.form)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(*u.params(), slices)
}

/// Energy, dissipation and the residual of the energy identity per slice.
pub fn energy_monitor(spec: &ProblemSpec, u: &Trajectory) -> Result<EnergyDiagnostics> {
    let mu = spec.heat.mu;
    let n = u.grid().dim();
    let per_slice: Vec<(f64, f64, f64, f64, f64)> = (0..u.len())
        .into_par_iter()
        .map(|j| {
            let s = u.slice(j);
            let energy = s.l2_norm_sq();
            let dissipation = mu * (0..n).map(|a| partial(s, a).l2_norm_sq()).sum::<f64>();
            let mut nl = spec.nonlinearity.apply_n(s)?;
            if spec.projected {
                nl = leray_project(&nl);
            }
            let nonlinear = nl.inner(s)?;
            let forcing = match &spec.f {
                Some(f) => f.slice(j).inner(s)?,
                None => 0.0,
            };
            let weighted = weighted_sup_norm(s, 0, spec.norms.delta, false)?.total;
            Ok((energy, dissipation, nonlinear, forcing, weighted))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut d = EnergyDiagnostics {
        times: u.params().times(),
        ..Default::default()
    };
    for (e, diss, nl, f, w) in per_slice {
        d.energy.push(e);
        d.dissipation.push(diss);
        d.nonlinear.push(nl);
        d.forcing.push(f);
        d.weighted_sup.push(w);
    }
    let de = time_derivative(&d.energy, u.params().step());
    d.residual = (0..u.len())
        .map(|j| (de[j] + 2.0 * d.dissipation[j] + 2.0 * d.nonlinear[j] - 2.0 * d.forcing[j]).abs())
        .collect();
    Ok(d)
}

/// Second-order differences of a scalar series (one-sided at the ends).
pub fn time_derivative(values: &[f64], tau: f64) -> Vec<f64> {
    let nt = values.len();
    if nt < 3 {
        return vec![0.0; nt];
    }
    (0..nt)
        .map(|j| {
            if j == 0 {
                (-1.5 * values[0] + 2.0 * values[1] - 0.5 * values[2]) / tau
            } else if j == nt - 1 {
                (1.5 * values[nt - 1] - 2.0 * values[nt - 2] + 0.5 * values[nt - 3]) / tau
            } else {
                (values[j + 1] - values[j - 1]) / (2.0 * tau)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{builtin, Builtin};
    use crate::random::{band_limited_form, Seeded};

    fn gaussian(g: &Grid, q: usize) -> GridForm {
        GridForm::from_fn(g, q, |x, c| (c as f64 + 1.0) * (-x.iter().map(|v| v * v).sum::<f64>()).exp())
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let heat = HeatParams::new(0.5, 0.2, 5).unwrap();
        let spec = ProblemSpec::new(GridForm::zeros(&g, 1), heat, builtin(Builtin::Ps, 2, Some(1.0)).unwrap(), false).unwrap();
        let r = picard_solve(&spec).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.u.max_abs(), 0.0);
    }

    #[test]
    fn zero_nonlinearity_returns_heat_flow_in_one_sweep() {
        let g = Grid::new(2, 32, 5.0).unwrap();
        let heat = HeatParams::new(0.3, 0.5, 6).unwrap();
        let u0 = gaussian(&g, 1);
        let spec = ProblemSpec::new(u0.clone(), heat, NonlinearitySpec::zero(2, 1).unwrap(), false).unwrap();
        let r = picard_solve(&spec).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.u, heat_flow(&u0, heat).unwrap());
    }

    #[test]
    fn projected_problem_rejects_divergent_data_and_bad_degree() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let heat = HeatParams::new(0.5, 0.2, 5).unwrap();
        let nl = builtin(Builtin::Ps, 2, Some(1.0)).unwrap();
        // a gradient field has d*u != 0
        let grad = exterior::d(&gaussian(&g, 0));
        assert!(ProblemSpec::new(grad, heat, nl, true).is_err());
        let scalar = gaussian(&g, 0);
        assert!(ProblemSpec::new(scalar, heat, NonlinearitySpec::zero(2, 0).unwrap(), true).is_err());
    }

    #[test]
    fn gradient_forcing_is_removed_by_projection() {
        let g = Grid::new(2, 32, 5.0).unwrap();
        let heat = HeatParams::new(0.5, 0.2, 5).unwrap();
        let grad = exterior::d(&gaussian(&g, 0));
        let mut spec = ProblemSpec::new(GridForm::zeros(&g, 1), heat, NonlinearitySpec::zero(2, 1).unwrap(), true).unwrap();
        spec.f = Some(Trajectory::from_fn(heat, |_| grad.clone()).unwrap());
        let v0 = assemble_rhs(&spec).unwrap();
        assert!(v0.max_abs() < 1e-12);
    }

    #[test]
    fn blowup_is_a_status() {
        let g = Grid::new(2, 16, 4.0).unwrap();
        let heat = HeatParams::new(0.1, 1.0, 9).unwrap();
        let u0 = band_limited_form(&g, 1, 2, &mut Seeded::new(2)).scaled(50.0);
        let mut spec = ProblemSpec::new(u0, heat, builtin(Builtin::Ps, 2, Some(0.0)).unwrap(), false).unwrap();
        spec.periodic = true;
        spec.solver.blowup_threshold = 1e3;
        spec.solver.max_iter = 30;
        let r = picard_solve(&spec).unwrap();
        assert!(matches!(r.status, SolveStatus::BlowUpSuspected { .. }), "{:?}", r.status);
    }

    #[test]
    fn scalar_time_derivative_is_exact_on_quadratics() {
        let v: Vec<f64> = (0..6).map(|j| (j as f64 * 0.1).powi(2)).collect();
        let d = time_derivative(&v, 0.1);
        for (j, dj) in d.iter().enumerate() {
            assert!((dj - 2.0 * j as f64 * 0.1).abs() < 1e-12);
        }
    }
}
