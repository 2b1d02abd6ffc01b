//! Dyadic decomposition of the multiplier near the unit sphere of `R^{2n}`.
//!
//! A smooth bump `phi` supported in `[1/2, 2]` with `sum_j phi(2^j s) = 1`
//! splits `(1 - s^2 - t^2)_+^alpha` into slices
//! `phi_j^alpha(s, t) = (1 - s^2 - t^2)_+^alpha phi(2^j (1 - s^2 - t^2))`.
//! Each slice expands in a cosine series in `t` on `[-1, 1]` with
//! coefficients `gamma_{j,k}(s)`, which turns the slice operator into a sum
//! of products of two linear radial multipliers.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::grid::{dft_forward, dft_inverse, SampledField};
use crate::operators::{bilinear_frequency_sum, DEFAULT_OPERATION_CAP};

/// Trapezoid intervals on `[0, 1]` for the cosine coefficients.
pub const GAMMA_INTERVALS: usize = 4096;

/// Default rank cutoff of the separable path.
pub const DEFAULT_RANK: usize = 512;

/// `phi(s) = psi(s) / sum_{j in Z} psi(2^j s)` with
/// `psi(s) = exp(-1 / ((s - 1/2)(2 - s)))` on `(1/2, 2)`.
///
/// Evaluated in closed form. Scaling by a power of two is exact in floating
/// point, so the normalizing sum takes bit-identical values along a dyadic
/// orbit and the partition identity holds to round-off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction;

pub fn make_bump() -> BumpFunction {
    BumpFunction
}

impl BumpFunction {
    /// The unnormalized profile `psi`.
    pub fn profile(&self, s: f64) -> f64 {
        if s <= 0.5 || s >= 2.0 {
            return 0.0;
        }
        (-1.0 / ((s - 0.5) * (2.0 - s))).exp()
    }

    pub fn eval(&self, s: f64) -> f64 {
        let top = self.profile(s);
        if top == 0.0 {
            return 0.0;
        }
        // for s in (1/2, 2) only j in {-1, 0, 1} can contribute
        let mut sum = 0.0;
        for j in -2i32..=2 {
            sum += self.profile(s * 2f64.powi(j));
        }
        top / sum
    }
}

/// Slice index `j >= 0` and smoothness `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPiece {
    j: u32,
    alpha: f64,
}

impl DyadicPiece {
    pub fn new(j: u32, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(DyadicPiece { j, alpha })
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `2^j`.
    pub fn scale(&self) -> f64 {
        2f64.powi(self.j as i32)
    }

    /// Radii `r` of `R^{2n}` where the slice can be nonzero:
    /// `1 - r^2` in `[2^{-j-1}, 2^{1-j}]`.
    pub fn radial_support(&self) -> (f64, f64) {
        let lo = (1.0 - 2.0 / self.scale()).max(0.0).sqrt();
        let hi = (1.0 - 0.5 / self.scale()).sqrt();
        (lo, hi)
    }
}

/// `phi_j^alpha(s, t)`.
pub fn phi_j_alpha(s: f64, t: f64, piece: &DyadicPiece, bump: &BumpFunction) -> f64 {
    slice_profile(1.0 - s * s - t * t, piece, bump)
}

/// The slice as a function of `u = 1 - s^2 - t^2`.
pub(crate) fn slice_profile(u: f64, piece: &DyadicPiece, bump: &BumpFunction) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let b = bump.eval(piece.scale() * u);
    if b == 0.0 {
        0.0
    } else {
        u.powf(piece.alpha) * b
    }
}

/// `T_j^alpha(f, g)`: the frequency double sum with multiplier
/// `phi_j^alpha(|xi|, |eta|)`.
pub fn t_j_apply(f: &SampledField, g: &SampledField, piece: &DyadicPiece, bump: &BumpFunction) -> Result<SampledField> {
    t_j_apply_capped(f, g, piece, bump, DEFAULT_OPERATION_CAP)
}

pub fn t_j_apply_capped(
    f: &SampledField,
    g: &SampledField,
    piece: &DyadicPiece,
    bump: &BumpFunction,
    cap: u128,
) -> Result<SampledField> {
    bilinear_frequency_sum(
        f,
        g,
        |s, t| phi_j_alpha(s, t, piece, bump),
        piece.radial_support().1,
        cap,
    )
}

fn check_s(s: f64) -> Result<()> {
    if !(s.abs() <= 1.0) {
        return Err(Error::Domain(format!("gamma coefficients need |s| <= 1, got {s}")));
    }
    Ok(())
}

/// `gamma_{j,k}(s) = 1/2 int_{-1}^{1} phi_j^alpha(|s|, |t|) e^{-i pi k t} dt
/// = int_0^1 phi_j^alpha(|s|, t) cos(pi k t) dt`, by the trapezoid rule with
/// [`GAMMA_INTERVALS`] intervals.
pub fn gamma_coeff(piece: &DyadicPiece, k: i64, s: f64, bump: &BumpFunction) -> Result<f64> {
    check_s(s)?;
    let m = GAMMA_INTERVALS;
    let h = 1.0 / m as f64;
    let s = s.abs();
    let kf = k as f64;
    let mut sum = 0.5 * phi_j_alpha(s, 0.0, piece, bump);
    for i in 1..m {
        let t = i as f64 * h;
        let v = phi_j_alpha(s, t, piece, bump);
        if v != 0.0 {
            sum += v * (std::f64::consts::PI * kf * t).cos();
        }
    }
    sum += 0.5 * phi_j_alpha(s, 1.0, piece, bump) * (std::f64::consts::PI * kf).cos();
    Ok(h * sum)
}

/// `gamma_{j,k}(s)` for `k = 0..=k_max` by one FFT of the even extension;
/// identical to [`gamma_coeff`] up to round-off.
pub fn gamma_spectrum(piece: &DyadicPiece, s: f64, k_max: usize, bump: &BumpFunction) -> Result<Vec<f64>> {
    check_s(s)?;
    let m = GAMMA_INTERVALS;
    if k_max > m {
        return Err(Error::invalid(
            "k_max",
            format!("at most {m} coefficients are resolved"),
        ));
    }
    let h = 1.0 / m as f64;
    let s = s.abs();
    let samples: Vec<f64> = (0..=m).map(|i| phi_j_alpha(s, i as f64 * h, piece, bump)).collect();
    let mut buf: Vec<Complex64> = (0..2 * m)
        .map(|i| Complex64::new(samples[if i <= m { i } else { 2 * m - i }], 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(2 * m).process(&mut buf);
    // sum over the even extension counts interior nodes twice
    Ok(buf[..=k_max].iter().map(|c| 0.5 * h * c.re).collect())
}

/// `gamma_{j,k}(s)` tabulated on an `s` grid for `|k| <= k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTable {
    pub piece: DyadicPiece,
    pub k_max: usize,
    pub s_values: Vec<f64>,
    /// `values[i][k]` for `k >= 0`; negative `k` mirror.
    values: Vec<Vec<f64>>,
}

impl GammaTable {
    pub fn build(piece: DyadicPiece, k_max: usize, s_values: Vec<f64>, bump: &BumpFunction) -> Result<Self> {
        let values = s_values
            .par_iter()
            .map(|&s| gamma_spectrum(&piece, s, k_max, bump))
            .collect::<Result<Vec<_>>>()?;
        Ok(GammaTable {
            piece,
            k_max,
            s_values,
            values,
        })
    }

    /// Uniform `s` grid with `points` nodes on `[0, 1]`; the coefficients
    /// are even in `s`.
    pub fn uniform(piece: DyadicPiece, k_max: usize, points: usize, bump: &BumpFunction) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid("points", "need at least two s values"));
        }
        let s = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
        GammaTable::build(piece, k_max, s, bump)
    }

    pub fn get(&self, s_index: usize, k: i64) -> f64 {
        self.values[s_index][k.unsigned_abs() as usize]
    }

    /// `sup_s |gamma_{j,k}(s)|` over the table.
    pub fn sup_abs(&self, k: i64) -> f64 {
        let k = k.unsigned_abs() as usize;
        self.values.iter().map(|row| row[k].abs()).fold(0.0, f64::max)
    }
}

/// One `(j, k)` row of a decay report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaDecayRow {
    pub j: u32,
    pub k: i64,
    pub sup_abs: f64,
    /// `sup_s |gamma| (1 + |k|)^{1 + delta} 2^{j (alpha - delta)}`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDecayReport {
    pub alpha: f64,
    pub delta: f64,
    pub rows: Vec<GammaDecayRow>,
    /// `(j, max_k normalized)`.
    pub per_j: Vec<(u32, f64)>,
    /// Largest normalized value: the empirical constant.
    pub constant: f64,
    /// Least-squares slope of `log2` of the per-`j` maxima against `j`.
    pub log2_slope: f64,
    /// The fitted trend grows by more than 10% across the `j` range.
    pub growth_flagged: bool,
}

impl GammaDecayReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(w, "j,k,sup_abs_gamma,normalized").map_err(io)?;
        for r in &self.rows {
            writeln!(w, "{},{},{:e},{:e}", r.j, r.k, r.sup_abs, r.normalized).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Points on the `s` grid used by [`gamma_decay_check`].
pub const DECAY_S_POINTS: usize = 257;

/// Measures `sup_s |gamma_{j,k}(s)| (1 + |k|)^{1+delta} 2^{j(alpha - delta)}`
/// for `j` in `js` and `|k| <= k_max`.
pub fn gamma_decay_check(
    alpha: f64,
    delta: f64,
    js: &[u32],
    k_max: usize,
    bump: &BumpFunction,
) -> Result<GammaDecayReport> {
    if !(delta > 0.0 && delta < alpha) {
        return Err(Error::Domain(format!(
            "need 0 < delta < alpha, got delta = {delta}, alpha = {alpha}"
        )));
    }
    if js.is_empty() {
        return Err(Error::invalid("j_range", "no slice indices given"));
    }
    let mut rows = Vec::new();
    let mut per_j = Vec::new();
    for &j in js {
        let table = GammaTable::uniform(DyadicPiece::new(j, alpha)?, k_max, DECAY_S_POINTS, bump)?;
        let scale = 2f64.powf(j as f64 * (alpha - delta));
        let mut best: f64 = 0.0;
        for k in -(k_max as i64)..=(k_max as i64) {
            let sup = table.sup_abs(k);
            let normalized = sup * (1.0 + k.abs() as f64).powf(1.0 + delta) * scale;
            best = best.max(normalized);
            rows.push(GammaDecayRow {
                j,
                k,
                sup_abs: sup,
                normalized,
            });
        }
        per_j.push((j, best));
    }
    let constant = per_j.iter().map(|p| p.1).fold(0.0, f64::max);
    let (log2_slope, growth_flagged) = if per_j.len() >= 2 {
        let xs: Vec<f64> = per_j.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = per_j.iter().map(|p| p.1.log2()).collect();
        let slope = line_fit(&xs, &ys)?.slope;
        let span = xs[xs.len() - 1] - xs[0];
        (slope, 2f64.powf(slope * span) > 1.1)
    } else {
        (0.0, false)
    };
    Ok(GammaDecayReport {
        alpha,
        delta,
        rows,
        per_j,
        constant,
        log2_slope,
        growth_flagged,
    })
}

/// `T_j^alpha(f, g)` through the cosine expansion in `|eta|`:
///
/// ```text
/// T_j(f, g) = sum_{|k| <= K} T_{gamma_k} f * T_{e^{i pi k .}} g
/// ```
///
/// where `T_m` is the radial multiplier `m(|xi|)` on `[0, 1]`. Terms `k` and
/// `-k` share the `f` factor and are applied together.
pub fn br_apply_separable(
    f: &SampledField,
    g: &SampledField,
    piece: &DyadicPiece,
    rank: usize,
    bump: &BumpFunction,
) -> Result<SampledField> {
    f.check_same_grid(g)?;
    if rank == 0 {
        return Err(Error::invalid("K", "rank cutoff must be at least 1"));
    }
    let grid = *f.grid();
    let fh = dft_forward(f);
    let gh = dft_forward(g);
    let radii: Vec<f64> = (0..grid.len()).map(|i| grid.frequency_modulus(i)).collect();

    // coefficient rows for the distinct radii inside the unit ball
    let mut distinct: Vec<f64> = radii.iter().copied().filter(|&r| r <= 1.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let spectra = distinct
        .par_iter()
        .map(|&r| gamma_spectrum(piece, r, rank, bump))
        .collect::<Result<Vec<_>>>()?;
    let row_of = |r: f64| distinct.binary_search_by(|x| x.total_cmp(&r)).ok();
    let rows: Vec<Option<usize>> = radii.iter().map(|&r| row_of(r)).collect();

    let terms: Vec<Vec<Complex64>> = (0..=rank)
        .into_par_iter()
        .map(|k| {
            let fk: Vec<Complex64> = fh
                .values()
                .iter()
                .zip(&rows)
                .map(|(&v, row)| match row {
                    Some(i) => spectra[*i][k] * v,
                    None => Complex64::new(0.0, 0.0),
                })
                .collect();
            // e^{i pi k t} + e^{-i pi k t} for k >= 1
            let weight = if k == 0 { 1.0 } else { 2.0 };
            let gk: Vec<Complex64> = gh
                .values()
                .iter()
                .zip(&radii)
                .map(|(&v, &r)| {
                    if r <= 1.0 {
                        v * weight * (std::f64::consts::PI * k as f64 * r).cos()
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            let a = dft_inverse(&SampledField::from_raw(grid, fk));
            let b = dft_inverse(&SampledField::from_raw(grid, gk));
            a.values().iter().zip(b.values()).map(|(x, y)| x * y).collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for term in &terms {
        for (o, t) in out.iter_mut().zip(term) {
            *o += t;
        }
    }
    Ok(SampledField::from_raw(grid, out))
}

/// `S^alpha(f, g)` at unit radius as the telescoped sum of separable
/// pieces `j = 0..=j_max`, each at rank `rank`. The pieces beyond `j_max`
/// carry multiplier mass of order `2^{-j_max alpha}`.
pub fn br_apply_separable_sum(
    f: &SampledField,
    g: &SampledField,
    alpha: f64,
    j_max: u32,
    rank: usize,
    bump: &BumpFunction,
) -> Result<SampledField> {
    f.check_same_grid(g)?;
    let one = Complex64::new(1.0, 0.0);
    let mut total = SampledField::zeros(*f.grid());
    for j in 0..=j_max {
        let piece = DyadicPiece::new(j, alpha)?;
        total = total.combine(one, &br_apply_separable(f, g, &piece, rank, bump)?, one)?;
    }
    Ok(total)
}
