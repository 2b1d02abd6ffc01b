//! Test functions used as inputs and as norm-search witnesses.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dft_inverse, Grid, SampledField};
use crate::error::{Error, Result};

/// Parameterized families of test functions. Centers are physical points in
/// the box; distances are measured periodically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestField {
    /// `exp(-pi |x - c|^2 / w^2)`.
    Gaussian { center: [f64; 2], width: f64 },
    /// Indicator of the closed ball `|x - c| <= radius`.
    BallIndicator { center: [f64; 2], radius: f64 },
    /// Random complex coefficients on the lattice frequencies with
    /// `inner <= |xi| <= outer`, normalized to unit `L^2` norm.
    BandLimitedRandom { inner: f64, outer: f64 },
    /// `exp(1 - 1 / (1 - |x - c|^2 / radius^2))` inside the ball, zero outside.
    Bump { center: [f64; 2], radius: f64 },
}

fn check_center(grid: &Grid, center: [f64; 2]) -> Result<()> {
    let ok = |c: f64| c.is_finite() && (0.0..grid.side()).contains(&c);
    if !ok(center[0]) || (grid.dim() == 2 && !ok(center[1])) {
        return Err(Error::invalid(
            "center",
            format!("center {center:?} lies outside [0, {})^{}", grid.side(), grid.dim()),
        ));
    }
    Ok(())
}

fn check_radius(grid: &Grid, field: &'static str, radius: f64) -> Result<()> {
    if !(radius > 0.0) || radius >= 0.25 * grid.side() {
        return Err(Error::invalid(
            field,
            format!("must lie in (0, L/4) = (0, {}), got {radius}", 0.25 * grid.side()),
        ));
    }
    Ok(())
}

fn distance(grid: &Grid, flat: usize, center: [f64; 2]) -> f64 {
    let d = grid.displacement(flat, center);
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

/// Samples a [`TestField`] on `grid`. `seed` only affects random kinds, and
/// identical arguments give bit-identical fields.
pub fn make_test_field(kind: TestField, grid: Grid, seed: u64) -> Result<SampledField> {
    let radial = |center: [f64; 2], profile: &dyn Fn(f64) -> f64| {
        let values = (0..grid.len())
            .map(|i| Complex64::new(profile(distance(&grid, i, center)), 0.0))
            .collect();
        SampledField::from_raw(grid, values)
    };
    match kind {
        TestField::Gaussian { center, width } => {
            check_center(&grid, center)?;
            check_radius(&grid, "width", width)?;
            Ok(radial(center, &|r| {
                (-std::f64::consts::PI * r * r / (width * width)).exp()
            }))
        }
        TestField::BallIndicator { center, radius } => {
            check_center(&grid, center)?;
            check_radius(&grid, "radius", radius)?;
            Ok(radial(center, &|r| if r <= radius { 1.0 } else { 0.0 }))
        }
        TestField::Bump { center, radius } => {
            check_center(&grid, center)?;
            check_radius(&grid, "radius", radius)?;
            Ok(radial(center, &|r| {
                let u = r / radius;
                if u < 1.0 {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }))
        }
        TestField::BandLimitedRandom { inner, outer } => {
            if !(inner >= 0.0) || !(outer > inner) {
                return Err(Error::invalid(
                    "band",
                    format!("need 0 <= inner < outer, got [{inner}, {outer}]"),
                ));
            }
            if outer >= grid.nyquist() {
                return Err(Error::invalid(
                    "band",
                    format!("outer radius {outer} reaches the Nyquist limit {}", grid.nyquist()),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut any = false;
            let spectrum: Vec<Complex64> = (0..grid.len())
                .map(|i| {
                    // draw for every index so the stream does not depend on the band
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    let r = grid.frequency_modulus(i);
                    if r >= inner && r <= outer {
                        any = true;
                        z
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            if !any {
                return Err(Error::invalid(
                    "band",
                    format!("annulus [{inner}, {outer}] contains no lattice frequencies"),
                ));
            }
            let f = dft_inverse(&SampledField::from_raw(grid, spectrum));
            let norm = super::lp_norm_f64(&f, 2.0)?;
            Ok(f.scaled(Complex64::new(1.0 / norm, 0.0)))
        }
    }
}
