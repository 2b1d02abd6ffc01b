//! Restriction operators, band multipliers, and the bilinear means.
//!
//! Restriction to a sphere is discretized on the frequency lattice: the
//! lattice points of an annulus around radius `lambda` stand in for the
//! sphere, so `R_lambda f` becomes the inverse transform of `f_hat`
//! restricted to that annulus. Three independent paths evaluate the
//! bilinear means; see [`br_apply_oracle`], [`br_apply_radial`] and
//! [`br_apply_kernel`].

mod bilinear;

pub use bilinear::{
    bilinear_frequency_sum, br_apply_kernel, br_apply_kernel_capped, br_apply_oracle, br_apply_oracle_capped,
    br_apply_radial, PreparedMultiplier, DEFAULT_OPERATION_CAP,
};

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Flagged, Result, Warning};
use crate::grid::{dft_forward, dft_inverse, SampledField};

/// Smoothness index `alpha` and radius `R` of the multiplier
/// `(1 - (|xi|^2 + |eta|^2) / R^2)_+^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    alpha: f64,
    radius: f64,
}

impl MultiplierSpec {
    pub fn new(alpha: f64, radius: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be finite and >= 0, got {alpha}")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("R", format!("must be positive, got {radius}")));
        }
        Ok(MultiplierSpec { alpha, radius })
    }

    /// Unit radius.
    pub fn unit(alpha: f64) -> Result<Self> {
        MultiplierSpec::new(alpha, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Multiplier value at `|xi| = s`, `|eta| = t`. On the sphere
    /// `s^2 + t^2 = R^2` it is 0 for `alpha > 0` and 1 for `alpha = 0`
    /// (closed ball).
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let u = 1.0 - (s * s + t * t) / (self.radius * self.radius);
        if self.alpha == 0.0 {
            if u >= 0.0 {
                1.0
            } else {
                0.0
            }
        } else if u <= 0.0 {
            0.0
        } else {
            u.powf(self.alpha)
        }
    }
}

/// A bounded multiplier `m` on the radial band `[a, b]`.
#[derive(Clone)]
pub struct BandSpec {
    a: f64,
    b: f64,
    m: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
}

impl fmt::Debug for BandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandSpec")
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

/// Number of samples used to certify that `m` is bounded.
const BAND_TABLE: usize = 1025;

impl BandSpec {
    /// Fails if `m` is non-finite anywhere on a dense sample of `[a, b]`.
    pub fn new<M>(a: f64, b: f64, m: M) -> Result<Self>
    where
        M: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        if !(a >= 0.0) || !(b > a) || !b.is_finite() {
            return Err(Error::invalid("band", format!("need 0 <= a < b, got [{a}, {b}]")));
        }
        let band = BandSpec { a, b, m: Arc::new(m) };
        if !band.sup_abs().is_finite() {
            return Err(Error::invalid("m", "multiplier is not bounded on the band"));
        }
        Ok(band)
    }

    /// `m = c` on `[a, b]`.
    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        BandSpec::new(a, b, move |_| Complex64::new(c, 0.0))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eval(&self, lambda: f64) -> Complex64 {
        (self.m)(lambda)
    }

    /// `max |m|` over a uniform sample of the band.
    pub fn sup_abs(&self) -> f64 {
        let h = (self.b - self.a) / (BAND_TABLE - 1) as f64;
        (0..BAND_TABLE)
            .map(|i| self.eval(self.a + i as f64 * h).norm())
            .fold(0.0, |acc, v| if v.is_nan() { f64::NAN } else { acc.max(v) })
    }

    fn contains(&self, r: f64) -> bool {
        r >= self.a && r <= self.b
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    Ok(())
}

/// Inverse transform of `f_hat` restricted to the lattice frequencies with
/// `lo <= |xi| < hi`, together with the number of such frequencies.
pub(crate) fn annulus_component(spectrum: &SampledField, lo: f64, hi: f64) -> (SampledField, usize) {
    let grid = *spectrum.grid();
    let mut count = 0;
    let values = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = grid.frequency_modulus(i);
            if r >= lo && r < hi {
                count += 1;
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    (dft_inverse(&SampledField::from_raw(grid, values)), count)
}

/// Radial density `lambda^{n-1} R_lambda f` of the spectrum near the sphere
/// of radius `lambda`: the annulus `lambda - width/2 <= |xi| < lambda + width/2`
/// transformed back and divided by `width`.
///
/// For `f` a delta this approximates `lambda^{n-1} phi_lambda(x)`. The
/// result is flagged with [`Warning::EmptyAnnulus`] (and is zero) when the
/// annulus contains no lattice frequency. `width` must be at least the
/// lattice spacing `1/L`.
pub fn restriction(f: &SampledField, lambda: f64, width: f64) -> Result<Flagged<SampledField>> {
    check_lambda(lambda)?;
    let spacing = f.grid().frequency_spacing();
    if !(width >= spacing * (1.0 - 1e-12)) || !width.is_finite() {
        return Err(Error::Domain(format!(
            "annulus width {width} is below the lattice spacing {spacing}"
        )));
    }
    let (inner, outer) = (lambda - 0.5 * width, lambda + 0.5 * width);
    let (component, count) = annulus_component(&dft_forward(f), inner, outer);
    let warning = (count == 0).then_some(Warning::EmptyAnnulus { inner, outer });
    Ok(Flagged {
        value: component.scaled(Complex64::new(1.0 / width, 0.0)),
        warning,
    })
}

fn check_band_on_grid(f: &SampledField, band: &BandSpec) -> Result<()> {
    let grid = f.grid();
    let reach = grid.nyquist() * (grid.dim() as f64).sqrt();
    if band.b > reach {
        return Err(Error::Domain(format!(
            "band edge {} lies beyond the frequency lattice (|xi| <= {reach})",
            band.b
        )));
    }
    Ok(())
}

/// `T_m f = int_a^b m(lambda) R_lambda f lambda^{n-1} d lambda`, evaluated
/// exactly as the multiplier `chi_[a,b](|xi|) m(|xi|)` on `f_hat`.
pub fn band_operator(f: &SampledField, band: &BandSpec) -> Result<SampledField> {
    check_band_on_grid(f, band)?;
    let spectrum = dft_forward(f);
    let grid = *f.grid();
    let values = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = grid.frequency_modulus(i);
            if band.contains(r) {
                band.eval(r) * v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(dft_inverse(&SampledField::from_raw(grid, values)))
}

/// [`band_operator`] through its defining `lambda` integral: midpoint rule
/// with `nodes` cells on `[a, b]`, each cell contributing
/// `m(lambda_i) * h * lambda_i^{n-1} R_{lambda_i} f` with the restriction
/// taken over the cell itself. The last cell is closed on the right.
pub fn band_operator_quadrature(f: &SampledField, band: &BandSpec, nodes: usize) -> Result<SampledField> {
    check_band_on_grid(f, band)?;
    if nodes == 0 {
        return Err(Error::invalid("nodes", "need at least one quadrature cell"));
    }
    let grid = *f.grid();
    let h = (band.b - band.a) / nodes as f64;
    let weights: Vec<Complex64> = (0..nodes).map(|i| band.eval(band.a + (i as f64 + 0.5) * h)).collect();
    let spectrum = dft_forward(f);
    // Cells are disjoint, so summing the per-cell restrictions is one
    // masked inverse transform.
    let values = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = grid.frequency_modulus(i);
            if !band.contains(r) {
                return Complex64::new(0.0, 0.0);
            }
            let cell = (((r - band.a) / h).floor() as usize).min(nodes - 1);
            weights[cell] * v
        })
        .collect();
    Ok(dft_inverse(&SampledField::from_raw(grid, values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::sphere_ft_radial;
    use crate::grid::{lp_norm_f64, make_test_field, relative_l2_error, Grid, TestField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(grid: Grid, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SampledField::from_values(grid, v).unwrap()
    }

    fn delta(grid: Grid) -> SampledField {
        let mut v = vec![Complex64::new(0.0, 0.0); grid.len()];
        v[0] = Complex64::new(1.0 / grid.cell_volume(), 0.0);
        SampledField::from_values(grid, v).unwrap()
    }

    #[test]
    fn multiplier_boundary_convention() {
        let smooth = MultiplierSpec::unit(2.0).unwrap();
        assert_eq!(smooth.eval(0.6, 0.8), 0.0);
        assert_eq!(smooth.eval(0.0, 0.0), 1.0);
        let sharp = MultiplierSpec::unit(0.0).unwrap();
        assert_eq!(sharp.eval(0.6, 0.8), 1.0);
        assert_eq!(sharp.eval(0.6, 0.81), 0.0);
        assert!(MultiplierSpec::new(-1.0, 1.0).is_err());
        assert!(MultiplierSpec::new(1.0, 0.0).is_err());
    }

    #[test]
    fn restriction_of_disjoint_spectrum_vanishes() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let f = make_test_field(TestField::BandLimitedRandom { inner: 2.0, outer: 3.0 }, grid, 4).unwrap();
        let r = restriction(&f, 1.0, 0.25).unwrap();
        assert!(r.is_clean());
        assert!(r.value.max_modulus() < 1e-14);
    }

    #[test]
    fn restriction_flags_empty_annulus() {
        let grid = Grid::new(2, 16, 4.0).unwrap();
        let f = random(grid, 3);
        assert!(restriction(&f, 1.0, 0.25).unwrap().is_clean());
        // the lattice ends at |xi| = 2 sqrt(2)
        let r = restriction(&f, 5.0, 0.25).unwrap();
        assert!(matches!(r.warning, Some(Warning::EmptyAnnulus { .. })));
        assert!(r.value.is_zero());
    }

    #[test]
    fn restriction_rejects_narrow_width() {
        let grid = Grid::new(1, 64, 4.0).unwrap();
        assert!(restriction(&random(grid, 0), 1.0, 0.1).is_err());
        assert!(restriction(&random(grid, 0), 0.0, 1.0).is_err());
    }

    #[test]
    fn restriction_of_delta_in_one_dimension_is_exact() {
        // width 1/L around a lattice radius picks out exactly the pair +-lambda
        let grid = Grid::new(1, 512, 64.0).unwrap();
        let lambda = 3.0;
        let r = restriction(&delta(grid), lambda, 1.0 / grid.side()).unwrap().value;
        for i in 0..grid.len() {
            let x = grid.centered_position(i)[0];
            let expected = sphere_ft_radial(lambda, x.abs(), 1).unwrap();
            assert!((r.values()[i] - Complex64::new(expected, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn restriction_of_delta_in_two_dimensions_approximates_sphere_transform() {
        let grid = Grid::new(2, 128, 32.0).unwrap();
        let lambda = 1.5;
        let width = 4.0 / grid.side();
        let r = restriction(&delta(grid), lambda, width).unwrap().value;
        let peak = lambda * sphere_ft_radial(lambda, 0.0, 2).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..grid.len() {
            let x = grid.centered_position(i);
            let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if rho > 1.0 {
                continue;
            }
            let expected = lambda * sphere_ft_radial(lambda, rho, 2).unwrap();
            worst = worst.max((r.values()[i].re - expected).abs() / peak);
            assert!(r.values()[i].im.abs() < 1e-10 * peak);
        }
        assert!(worst < 0.05, "worst deviation {worst}");
    }

    #[test]
    fn band_operator_identity_and_zero() {
        let grid = Grid::new(1, 256, 16.0).unwrap();
        let f = make_test_field(TestField::BandLimitedRandom { inner: 1.0, outer: 2.0 }, grid, 9).unwrap();
        let id = band_operator(&f, &BandSpec::constant(0.5, 2.5, 1.0).unwrap()).unwrap();
        assert!(relative_l2_error(&id, &f).unwrap() < 1e-10);
        let zero = band_operator(&f, &BandSpec::constant(0.5, 2.5, 0.0).unwrap()).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn band_operator_trivial_l2_bound() {
        let grid = Grid::new(2, 32, 8.0).unwrap();
        let band = BandSpec::new(0.3, 1.5, |r| Complex64::from_polar(1.0 + r.sin(), 3.0 * r)).unwrap();
        for seed in 0..8 {
            let f = random(grid, seed);
            let lhs = lp_norm_f64(&band_operator(&f, &band).unwrap(), 2.0).unwrap();
            assert!(lhs <= band.sup_abs() * lp_norm_f64(&f, 2.0).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn quadrature_form_converges_to_exact_multiplier() {
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let f = make_test_field(
            TestField::Gaussian {
                center: [16.0, 0.0],
                width: 0.5,
            },
            grid,
            0,
        )
        .unwrap();
        let band = BandSpec::new(0.5, 2.0, |r| Complex64::new((2.0 * r).cos(), r)).unwrap();
        let exact = band_operator(&f, &band).unwrap();
        let errors: Vec<f64> = [6, 12, 24]
            .iter()
            .map(|&nodes| relative_l2_error(&band_operator_quadrature(&f, &band, nodes).unwrap(), &exact).unwrap())
            .collect();
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
        // constant multipliers are reproduced exactly by any cell layout
        let flat = BandSpec::constant(0.5, 2.0, 1.5).unwrap();
        let a = band_operator(&f, &flat).unwrap();
        let b = band_operator_quadrature(&f, &flat, 7).unwrap();
        assert!(relative_l2_error(&b, &a).unwrap() < 1e-14);
    }
}
