//! Riemann-sum `L^p` (quasi-)norms.

use super::{Exponent, SampledField};
use crate::error::{Error, Result};

/// `((L/N)^n sum |f|^p)^{1/p}`, or `max |f|` for `p = infinity`.
pub fn lp_norm(f: &SampledField, p: Exponent) -> f64 {
    lp_norm_f64(f, p.as_f64()).expect("exponents are positive by construction")
}

/// [`lp_norm`] for a floating-point exponent; `p <= 0` is a domain error.
pub fn lp_norm_f64(f: &SampledField, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Domain(format!("norm exponent must be positive, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_modulus());
    }
    let w = f.grid().cell_volume();
    let sum: f64 = if p == 2.0 {
        f.values().iter().map(|v| v.norm_sqr()).sum()
    } else if p == 1.0 {
        f.values().iter().map(|v| v.norm()).sum()
    } else {
        f.values().iter().map(|v| v.norm().powf(p)).sum()
    };
    Ok((w * sum).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn field(values: &[(f64, f64)]) -> SampledField {
        let grid = Grid::new(1, values.len(), 3.0).unwrap();
        SampledField::from_values(grid, values.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap()
    }

    #[test]
    fn indicator_norm_is_measure_power() {
        let grid = Grid::new(2, 32, 4.0).unwrap();
        // indicator of [0,1) x [0,2): 8 x 16 cells of area 1/64
        let f = SampledField::from_fn(grid, |x| {
            Complex64::new(if x[0] < 1.0 && x[1] < 2.0 { 1.0 } else { 0.0 }, 0.0)
        });
        for p in [0.5, 1.0, 1.5, 2.0, 7.0] {
            let got = lp_norm_f64(&f, p).unwrap();
            assert!((got - 2f64.powf(1.0 / p)).abs() < 1e-12, "p = {p}");
        }
        assert_eq!(lp_norm(&f, Exponent::Infinity), 1.0);
    }

    #[test]
    fn nonpositive_exponent_is_domain_error() {
        let f = field(&[(1.0, 0.0); 8]);
        assert!(lp_norm_f64(&f, 0.0).is_err());
        assert!(lp_norm_f64(&f, -1.0).is_err());
        assert!(lp_norm_f64(&f, f64::NAN).is_err());
    }

    fn values() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 16)
    }

    proptest! {
        #[test]
        fn homogeneous(v in values(), c in -4.0..4.0f64, p in 0.3..6.0f64) {
            let f = field(&v);
            let lhs = lp_norm_f64(&f.scaled(Complex64::new(c, 0.0)), p).unwrap();
            let rhs = c.abs() * lp_norm_f64(&f, p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
        }

        #[test]
        fn monotone_in_modulus(v in values(), shrink in prop::collection::vec(0.0..1.0f64, 16), p in 0.3..6.0f64) {
            let g = field(&v);
            let f = field(&v.iter().zip(&shrink).map(|(&(a, b), &s)| (a * s, b * s)).collect::<Vec<_>>());
            prop_assert!(lp_norm_f64(&f, p).unwrap() <= lp_norm_f64(&g, p).unwrap() * (1.0 + 1e-12));
            prop_assert!(f.max_modulus() <= g.max_modulus());
        }

        #[test]
        fn quasi_triangle_below_one(a in values(), b in values(), p in 0.1..1.0f64) {
            let (f, g) = (field(&a), field(&b));
            let sum = f.combine(Complex64::new(1.0, 0.0), &g, Complex64::new(1.0, 0.0)).unwrap();
            let lhs = lp_norm_f64(&sum, p).unwrap().powf(p);
            let rhs = lp_norm_f64(&f, p).unwrap().powf(p) + lp_norm_f64(&g, p).unwrap().powf(p);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
