//! Sampled fields on a periodic box `[0, L)^n`.
//!
//! A [`Grid`] fixes the dimension `n` (1 or 2), the samples per axis `N`
//! (a power of two, at least 8) and the side length `L`. Samples sit at
//! `x_k = (L/N) k`; the frequency lattice is `{m / L : -N/2 <= m < N/2}^n`
//! in the usual FFT ordering. Values are stored row-major with the first
//! axis slowest.

mod exponent;
mod fields;
mod fourier;
mod io;
mod norm;

pub use exponent::{Exponent, ExponentPair, Rational};
pub use fields::{make_test_field, TestField};
pub(crate) use fourier::fft_in_place;
pub use fourier::{dft_forward, dft_inverse};
pub use io::{read_binary, read_csv, write_binary, write_csv};
pub use norm::{lp_norm, lp_norm_f64};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[0, L)^n`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    dim: usize,
    samples: usize,
    side: f64,
}

impl Grid {
    pub fn new(dim: usize, samples: usize, side: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::invalid("n", format!("dimension must be 1 or 2, got {dim}")));
        }
        if samples < 8 || !samples.is_power_of_two() {
            return Err(Error::invalid(
                "N",
                format!("samples per axis must be a power of two >= 8, got {samples}"),
            ));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::invalid("L", format!("side length must be positive, got {side}")));
        }
        Ok(Grid { dim, samples, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples per axis.
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Side length `L`.
    pub fn side(&self) -> f64 {
        self.side
    }

    /// Total number of samples `N^n`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.side / self.samples as f64
    }

    /// Riemann-sum measure of one cell, `(L/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Frequency lattice spacing `1/L`.
    pub fn frequency_spacing(&self) -> f64 {
        1.0 / self.side
    }

    /// Measure of one frequency cell, `(1/L)^n`.
    pub fn frequency_cell(&self) -> f64 {
        self.frequency_spacing().powi(self.dim as i32)
    }

    /// Largest representable frequency modulus along an axis, `N / (2L)`.
    pub fn nyquist(&self) -> f64 {
        0.5 * self.samples as f64 / self.side
    }

    /// Per-axis indices of a flat index; unused axes are zero.
    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.samples, flat % self.samples]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.samples + idx[1]
        }
    }

    /// Signed lattice index `m` for an FFT-ordered axis index.
    pub fn signed_mode(&self, i: usize) -> i64 {
        let n = self.samples as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT-ordered axis index for a signed lattice index (wrapped mod `N`).
    pub fn wrap_mode(&self, m: i64) -> usize {
        m.rem_euclid(self.samples as i64) as usize
    }

    /// Signed lattice modes of a flat frequency index.
    pub fn modes(&self, flat: usize) -> [i64; 2] {
        let [a, b] = self.axis_indices(flat);
        if self.dim == 1 {
            [self.signed_mode(a), 0]
        } else {
            [self.signed_mode(a), self.signed_mode(b)]
        }
    }

    /// Frequency vector of a flat frequency index; unused axes are zero.
    pub fn frequency(&self, flat: usize) -> [f64; 2] {
        let m = self.modes(flat);
        [m[0] as f64 / self.side, m[1] as f64 / self.side]
    }

    pub fn frequency_modulus(&self, flat: usize) -> f64 {
        let [a, b] = self.frequency(flat);
        (a * a + b * b).sqrt()
    }

    /// Sample position `x_k` of a flat index.
    pub fn position(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.axis_indices(flat);
        let h = self.spacing();
        [a as f64 * h, b as f64 * h]
    }

    /// Periodic displacement of sample `flat` from `center`, each component
    /// wrapped into `[-L/2, L/2)`.
    pub fn displacement(&self, flat: usize, center: [f64; 2]) -> [f64; 2] {
        let x = self.position(flat);
        let wrap = |d: f64| d - self.side * (d / self.side + 0.5).floor();
        let mut out = [wrap(x[0] - center[0]), wrap(x[1] - center[1])];
        if self.dim == 1 {
            out[1] = 0.0;
        }
        out
    }

    /// Displacement of sample `flat` from the origin, as above.
    pub fn centered_position(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.axis_indices(flat);
        let h = self.spacing();
        let m = [self.signed_mode(a), self.signed_mode(b)];
        if self.dim == 1 {
            [m[0] as f64 * h, 0.0]
        } else {
            [m[0] as f64 * h, m[1] as f64 * h]
        }
    }

    /// The same samples on a grid with side `factor * L`.
    pub fn dilated(&self, factor: f64) -> Result<Grid> {
        Grid::new(self.dim, self.samples, self.side * factor)
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn zeros(grid: Grid) -> Self {
        SampledField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "values",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::invalid("values", "all samples must be finite"));
        }
        Ok(SampledField { grid, values })
    }

    /// Samples `f` at each position `x_k`.
    pub fn from_fn<F: Fn([f64; 2]) -> Complex64>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        SampledField { grid, values }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SampledField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Same samples reinterpreted on another grid of equal shape.
    pub fn with_grid(&self, grid: Grid) -> Result<Self> {
        if grid.dim() != self.grid.dim() || grid.samples() != self.grid.samples() {
            return Err(Error::invalid("grid", "grid shapes differ"));
        }
        Ok(SampledField {
            grid,
            values: self.values.clone(),
        })
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        SampledField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &SampledField, b: Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(SampledField {
            grid: self.grid,
            values,
        })
    }

    pub fn pointwise_mul(&self, other: &SampledField) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x * y).collect();
        Ok(SampledField {
            grid: self.grid,
            values,
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub(crate) fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::invalid("grid", "fields live on different grids"));
        }
        Ok(())
    }
}

/// `||a - b||_2 / ||b||_2` with the Riemann-sum measure.
pub fn relative_l2_error(a: &SampledField, b: &SampledField) -> Result<f64> {
    a.check_same_grid(b)?;
    let num: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.values.iter().map(|y| y.norm_sqr()).sum();
    Ok(if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    })
}
