//! Seeded random test fields.
//!
//! Everything here is deterministic given the seed so that identity checks
//! and regression fixtures are reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exterior::{GridForm, MultiIndexTable};
use crate::grid::Grid;

pub struct Seeded(ChaCha8Rng);

impl Seeded {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..hi)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }
}

/// Real q-form whose Fourier support is `|m_a| <= max_mode` on every axis,
/// with O(1) amplitude. `max_mode` must stay below `N/2`.
pub fn band_limited_form(grid: &Grid, degree: usize, max_mode: usize, rng: &mut Seeded) -> GridForm {
    assert!(2 * max_mode < grid.points(), "band limit reaches the Nyquist bin");
    let table = MultiIndexTable::new(grid.dim(), degree);
    let comps = (0..table.len())
        .map(|_| {
            let spec: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    let inside = (0..grid.dim())
                        .all(|a| grid.mode_number(grid.axis_index(i, a)).unsigned_abs() as usize <= max_mode);
                    if inside {
                        Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
                    } else {
                        Complex64::default()
                    }
                })
                .collect();
            let mut data = grid.inverse(&spec);
            let peak = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            data.iter_mut().for_each(|v| *v /= peak);
            data
        })
        .collect();
    GridForm::from_components(grid, degree, comps).expect("consistent shape")
}

/// Sum of a few randomly placed Gaussian bumps per component, decaying to
/// machine zero well inside the box when `width` is small against `L`.
pub fn gaussian_bumps(grid: &Grid, degree: usize, bumps: usize, width: f64, rng: &mut Seeded) -> GridForm {
    let table = MultiIndexTable::new(grid.dim(), degree);
    let spread = 0.25 * grid.half_width();
    let params: Vec<Vec<(Vec<f64>, f64)>> = (0..table.len())
        .map(|_| {
            (0..bumps)
                .map(|_| {
                    let c: Vec<f64> = (0..grid.dim()).map(|_| rng.uniform(-spread, spread)).collect();
                    (c, rng.uniform(-1.0, 1.0))
                })
                .collect()
        })
        .collect();
    GridForm::from_fn(grid, degree, |x, comp| {
        params[comp]
            .iter()
            .map(|(c, a)| {
                let r2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                a * (-r2 / (width * width)).exp()
            })
            .sum()
    })
}
