//! Riemann-sum Fourier transform on the periodic box.
//!
//! Forward: `F(m/L) = (L/N)^n sum_k f(x_k) exp(-2 pi i x_k . m/L)`.
//! Inverse: `f(x_k) = (1/L)^n sum_m F(m/L) exp(2 pi i x_k . m/L)`.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::{Grid, SampledField};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Unnormalized in-place transform along every axis.
pub(crate) fn fft_in_place(grid: &Grid, data: &mut [Complex64], direction: FftDirection) {
    let n = grid.samples();
    let fft = plan(n, direction);
    if grid.dim() == 1 {
        fft.process(data);
        return;
    }
    // rows are contiguous
    fft.process(data);
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

pub fn dft_forward(f: &SampledField) -> SampledField {
    let grid = *f.grid();
    let mut data = f.values().to_vec();
    fft_in_place(&grid, &mut data, FftDirection::Forward);
    let w = grid.cell_volume();
    data.iter_mut().for_each(|v| *v *= w);
    SampledField::from_raw(grid, data)
}

pub fn dft_inverse(spectrum: &SampledField) -> SampledField {
    let grid = *spectrum.grid();
    let mut data = spectrum.values().to_vec();
    fft_in_place(&grid, &mut data, FftDirection::Inverse);
    let w = grid.frequency_cell();
    data.iter_mut().for_each(|v| *v *= w);
    SampledField::from_raw(grid, data)
}
