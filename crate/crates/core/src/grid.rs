//! Uniform periodic grid over the box `[-L, L)^n` and its Fourier transform.
//!
//! Samples are stored flat with `x_1` varying fastest. Grid point `j` along
//! an axis sits at `-L + j h` with `h = 2L/N`, so the origin is always a grid
//! point (`N` is even).

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest supported space dimension.
pub const MAX_DIM: usize = 6;

#[derive(Clone)]
pub struct Grid {
    dim: usize,
    points: usize,
    half_width: f64,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kvecs: Arc<OnceLock<Vec<Vec<f64>>>>,
    ksq: Arc<OnceLock<Vec<f64>>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim)
            .field("points", &self.points)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.points == other.points
            && self.half_width.to_bits() == other.half_width.to_bits()
    }
}

impl Grid {
    /// `dim` in `2..=6`, `points` even and at least 4, `half_width > 0`.
    pub fn new(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} outside 2..={MAX_DIM}"
            )));
        }
        if points < 4 || points % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "grid points per axis must be even and >= 4, got {points}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half box width must be positive, got {half_width}"
            )));
        }
        let len = points
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            dim,
            points,
            half_width,
            len,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
            kvecs: Arc::default(),
            ksq: Arc::default(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Grid points per axis, `N`.
    pub fn points(&self) -> usize {
        self.points
    }

    /// Half box width, `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total number of samples, `N^n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Volume of one grid cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow(axis as u32)
    }

    /// Index of `flat` along `axis`.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.points
    }

    pub fn axis_coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// Writes the coordinates of sample `flat` into `x`.
    pub fn coords_into(&self, flat: usize, x: &mut [f64]) {
        let mut rest = flat;
        for xi in x.iter_mut().take(self.dim) {
            *xi = self.axis_coord(rest % self.points);
            rest /= self.points;
        }
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.coords_into(flat, &mut x);
        x
    }

    /// Flat index of the origin.
    pub fn origin_index(&self) -> usize {
        let half = self.points / 2;
        (0..self.dim).map(|a| half * self.stride(a)).sum()
    }

    /// Samples a scalar function at every grid point.
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        (0..self.len)
            .map(|i| {
                self.coords_into(i, &mut x);
                f(&x)
            })
            .collect()
    }

    /// Signed integer wavenumber of FFT bin `j`, in `-N/2..N/2`.
    pub fn mode_number(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Physical wavenumber of FFT bin `j`: `mode_number(j) * pi / L`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode_number(j) as f64 * std::f64::consts::PI / self.half_width
    }

    /// Wavenumber used by first-derivative symbols. The Nyquist bin is
    /// zeroed so that odd derivatives of real fields stay real; every other
    /// operator symbol is built from this one.
    pub fn derivative_wavenumber(&self, j: usize) -> f64 {
        if j == self.points / 2 {
            0.0
        } else {
            self.wavenumber(j)
        }
    }

    /// Derivative wavenumber of every spectral bin along `axis`.
    pub fn derivative_wavenumbers(&self, axis: usize) -> &[f64] {
        &self.kvecs.get_or_init(|| {
            (0..self.dim)
                .map(|a| {
                    (0..self.len)
                        .map(|i| self.derivative_wavenumber(self.axis_index(i, a)))
                        .collect()
                })
                .collect()
        })[axis]
    }

    /// `|k|^2` per spectral bin (with the Nyquist convention above).
    pub fn wavenumber_sq(&self) -> &[f64] {
        self.ksq.get_or_init(|| {
            let per_axis: Vec<f64> = (0..self.points)
                .map(|j| self.derivative_wavenumber(j).powi(2))
                .collect();
            (0..self.len)
                .map(|i| {
                    let mut rest = i;
                    let mut acc = 0.0;
                    for _ in 0..self.dim {
                        acc += per_axis[rest % self.points];
                        rest /= self.points;
                    }
                    acc
                })
                .collect()
        })
    }

    /// Forward n-dimensional DFT of a real field.
    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(data.len(), self.len);
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse n-dimensional DFT, normalised, keeping the real part.
    pub fn inverse(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.transform(&mut buf, &self.inverse);
        let scale = 1.0 / self.len as f64;
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    /// Inverse DFT without discarding the imaginary part.
    pub fn inverse_complex(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut buf = spec.to_vec();
        self.transform(&mut buf, &self.inverse);
        let scale = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.points;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // axis 0 lines are contiguous
        plan.process_with_scratch(buf, &mut scratch);
        let mut lines = vec![Complex64::default(); self.len];
        for axis in 1..self.dim {
            let stride = self.stride(axis);
            let block = stride * n;
            // gather every line along `axis` into contiguous storage, reading
            // the source in contiguous runs
            for (b, outer) in (0..self.len).step_by(block).enumerate() {
                let dst = &mut lines[b * block..(b + 1) * block];
                for j in 0..n {
                    let src = &buf[outer + j * stride..outer + (j + 1) * stride];
                    for (inner, v) in src.iter().enumerate() {
                        dst[inner * n + j] = *v;
                    }
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for (b, outer) in (0..self.len).step_by(block).enumerate() {
                let src = &lines[b * block..(b + 1) * block];
                for j in 0..n {
                    let dst = &mut buf[outer + j * stride..outer + (j + 1) * stride];
                    for (inner, v) in dst.iter_mut().enumerate() {
                        *v = src[inner * n + j];
                    }
                }
            }
        }
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn origin_is_a_grid_point() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        assert!(g.coords(g.origin_index()).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_odd_points_and_bad_dimension() {
        assert!(Grid::new(2, 7, 1.0).is_err());
        assert!(Grid::new(1, 8, 1.0).is_err());
        assert!(Grid::new(7, 4, 1.0).is_err());
        assert!(Grid::new(2, 8, 0.0).is_err());
    }

    #[test]
    fn round_trip_recovers_samples() {
        let g = Grid::new(3, 12, 1.5).unwrap();
        let data = g.sample(|x| (x[0] * 1.3).sin() + x[1] * x[2] + 0.25);
        let back = g.inverse(&g.forward(&data));
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = data
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-12 * scale, "round trip error {err}");
    }

    #[test]
    fn single_mode_lands_in_expected_bin() {
        let g = Grid::new(2, 16, PI).unwrap();
        // cos(2 x_2) on L = pi has mode number 2 along axis 1
        let data = g.sample(|x| (2.0 * x[1]).cos());
        let spec = g.forward(&data);
        let peak = spec
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(g.axis_index(peak, 0), 0);
        assert_eq!(g.mode_number(g.axis_index(peak, 1)).abs(), 2);
    }

    #[test]
    fn real_field_spectrum_is_conjugate_symmetric() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let data = g.sample(|x| (x[0] * 2.0).exp() * (1.0 + x[1]).sin());
        let spec = g.forward(&data);
        let n = g.points();
        for i in 0..g.len() {
            let (a, b) = (g.axis_index(i, 0), g.axis_index(i, 1));
            let j = ((n - a) % n) + ((n - b) % n) * n;
            assert!((spec[i] - spec[j].conj()).norm() < 1e-10);
        }
    }
}
