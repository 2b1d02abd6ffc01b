//! The bilinear Bochner-Riesz kernel on `R^n x R^n`.
//!
//! As a function on `R^{2n}` the kernel is radial and equals the
//! Bochner-Riesz kernel of order `alpha` there:
//!
//! ```text
//! S^alpha(x1, x2) = Gamma(1 + alpha) / (pi^alpha rho^{n+alpha}) J_{n+alpha}(2 pi rho)
//! ```
//!
//! with `rho = |(x1, x2)|`. The quadrature path instead integrates the
//! radial representation over `(l1, l2)` in polar coordinates, which shares
//! only the sphere transform with the closed form.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::bessel::{scaled_unchecked, sphere_profile};
use crate::decomposition::{slice_profile, BumpFunction, DyadicPiece};
use crate::error::{Error, Flagged, Result, Warning};
use crate::fit::line_fit;
use crate::operators::MultiplierSpec;
use crate::quadrature::{gauss_jacobi, gauss_legendre};

/// Quadrature nodes per polar axis.
pub const DEFAULT_NODES: usize = 256;

/// Largest `R rho` the default rule resolves.
pub const OSCILLATION_BUDGET: f64 = 50.0;

/// A point `(x1, x2)` of `R^n x R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    x1: Vec<f64>,
    x2: Vec<f64>,
}

impl KernelPoint {
    pub fn new(x1: &[f64], x2: &[f64]) -> Result<Self> {
        if x1.is_empty() || x1.len() != x2.len() {
            return Err(Error::invalid("x", "x1 and x2 must share a positive dimension"));
        }
        if x1.iter().chain(x2).any(|v| !v.is_finite()) {
            return Err(Error::invalid("x", "coordinates must be finite"));
        }
        Ok(KernelPoint {
            x1: x1.to_vec(),
            x2: x2.to_vec(),
        })
    }

    /// The point at distance `rho` from the origin of `R^{2n}` in direction
    /// `(cos psi e_1, sin psi e_1)`.
    pub fn polar(n: usize, rho: f64, psi: f64) -> Result<Self> {
        let mut x1 = vec![0.0; n];
        let mut x2 = vec![0.0; n];
        if n == 0 {
            return Err(Error::invalid("n", "dimension must be at least 1"));
        }
        x1[0] = rho * psi.cos();
        x2[0] = rho * psi.sin();
        KernelPoint::new(&x1, &x2)
    }

    pub fn dim(&self) -> usize {
        self.x1.len()
    }

    pub fn x1(&self) -> &[f64] {
        &self.x1
    }

    pub fn x2(&self) -> &[f64] {
        &self.x2
    }

    pub fn norm1(&self) -> f64 {
        self.x1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm2(&self) -> f64 {
        self.x2.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `|(x1, x2)|`.
    pub fn rho(&self) -> f64 {
        self.norm1().hypot(self.norm2())
    }

    pub fn swapped(&self) -> Self {
        KernelPoint {
            x1: self.x2.clone(),
            x2: self.x1.clone(),
        }
    }

    fn scaled(&self, factor: f64) -> Self {
        KernelPoint {
            x1: self.x1.iter().map(|v| v * factor).collect(),
            x2: self.x2.iter().map(|v| v * factor).collect(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

/// `S^alpha` at `|(x1, x2)| = rho`, unit radius. Written as
/// `Gamma(1 + alpha) pi^n J_nu(z) / (z/2)^nu` with `nu = n + alpha` and
/// `z = 2 pi rho`, so the origin takes the series value
/// `pi^n Gamma(1 + alpha) / Gamma(n + alpha + 1)` without a limit.
pub fn closed_form_radial(rho: f64, alpha: f64, n: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be finite and >= 0, got {rho}")));
    }
    let nu = n as f64 + alpha;
    Ok(gamma(1.0 + alpha) * PI.powi(n as i32) * scaled_unchecked(nu, 2.0 * PI * rho)?)
}

pub fn kernel_closed_form(pt: &KernelPoint, alpha: f64) -> Result<f64> {
    closed_form_radial(pt.rho(), alpha, pt.dim())
}

/// Generic polar quadrature of
/// `int int w(l1, l2) phi_l1(x1) phi_l2(x2) l1^{n-1} l2^{n-1} dl1 dl2`
/// over `l1, l2 >= 0`, where `w` depends on `r = |(l1, l2)|` only.
/// `radial` yields `(r, weight)` pairs that already include `w(r)` (or the
/// part of it absorbed by a Jacobi weight).
fn polar_integral(pt: &KernelPoint, radial: &[(f64, f64)], angular_nodes: usize) -> Result<f64> {
    let n = pt.dim();
    let (a1, a2) = (pt.norm1(), pt.norm2());
    let angular: Vec<(f64, f64)> = gauss_legendre(angular_nodes).mapped(0.0, 0.5 * PI).collect();
    let mut total = 0.0;
    for &(r, wr) in radial {
        if wr == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for &(theta, wt) in &angular {
            let (c, s) = (theta.cos(), theta.sin());
            let jac = if n == 1 { 1.0 } else { (c * s).powi(n as i32 - 1) };
            let p1 = sphere_profile(2.0 * PI * r * c * a1, n)?;
            let p2 = sphere_profile(2.0 * PI * r * s * a2, n)?;
            inner += wt * jac * p1 * p2;
        }
        total += wr * r.powi(2 * n as i32 - 1) * inner;
    }
    Ok(total)
}

fn oscillation_warning(argument: f64) -> Option<Warning> {
    (argument > OSCILLATION_BUDGET).then_some(Warning::OscillationBudget {
        argument,
        limit: OSCILLATION_BUDGET,
    })
}

/// `S_R^alpha(x1, x2)` by quadrature of the radial representation.
///
/// Polar coordinates `(l1, l2) = r (cos t, sin t)`: Gauss-Jacobi in `r` on
/// `[0, R]` absorbs `(1 - r/R)^alpha`, Gauss-Legendre in `t` on
/// `[0, pi/2]`. Flagged when `R rho` exceeds [`OSCILLATION_BUDGET`].
pub fn kernel_quadrature(pt: &KernelPoint, spec: &MultiplierSpec, nodes: usize) -> Result<Flagged<f64>> {
    if nodes < 2 {
        return Err(Error::invalid("nodes", "need at least two quadrature nodes"));
    }
    let (big_r, alpha) = (spec.radius(), spec.alpha());
    let rule = gauss_jacobi(nodes, alpha, 0.0);
    let half = 0.5 * big_r;
    // (1 - r/R)^alpha = ((1 - x)/2)^alpha
    let jacobi_scale = half * 0.5f64.powf(alpha);
    let radial: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let r = half * (1.0 + x);
            (r, w * jacobi_scale * (1.0 + r / big_r).powf(alpha))
        })
        .collect();
    let value = polar_integral(pt, &radial, nodes)?;
    Ok(Flagged {
        value,
        warning: oscillation_warning(big_r * pt.rho()),
    })
}

/// Relative residual of `S_R(x1, x2) = R^{2n} S_1(R x1, R x2)`: quadrature
/// at radius `R` against the closed form at radius 1. The denominator is
/// floored at `1e-6` of the kernel's peak `R^{2n} S_1(0)` so that the
/// residual stays meaningful at zeros of the kernel.
pub fn dilation_check(pt: &KernelPoint, alpha: f64, radius: f64) -> Result<Flagged<f64>> {
    let spec = MultiplierSpec::new(alpha, radius)?;
    let n = pt.dim();
    let scale = radius.powi(2 * n as i32);
    let closed = scale * kernel_closed_form(&pt.scaled(radius), alpha)?;
    if radius == 1.0 {
        return Ok(Flagged::clean(0.0));
    }
    let quad = kernel_quadrature(pt, &spec, DEFAULT_NODES)?;
    let peak = scale * closed_form_radial(0.0, alpha, n)?;
    let floor = 1e-6 * peak;
    Ok(Flagged {
        value: (quad.value - closed).abs() / (closed.abs() + floor),
        warning: quad.warning,
    })
}

/// Piece kernel `K_j^alpha(x1, x2)`: the radial representation with weight
/// `phi_j^alpha`, integrated over the annulus of `R^2` where the slice is
/// supported. Zero when that annulus collapses in floating point.
pub fn kj_kernel(pt: &KernelPoint, piece: &DyadicPiece, bump: &BumpFunction, nodes: usize) -> Result<Flagged<f64>> {
    if nodes < 2 {
        return Err(Error::invalid("nodes", "need at least two quadrature nodes"));
    }
    let warning = oscillation_warning(pt.rho());
    let (lo, hi) = piece.radial_support();
    if !(hi > lo) {
        return Ok(Flagged { value: 0.0, warning });
    }
    let radial: Vec<(f64, f64)> = gauss_legendre(nodes)
        .mapped(lo, hi)
        .map(|(r, w)| (r, w * slice_profile(1.0 - r * r, piece, bump)))
        .collect();
    Ok(Flagged {
        value: polar_integral(pt, &radial, nodes)?,
        warning,
    })
}

/// Points on rays `psi_i = i pi / (2 (rays - 1))` of the `(x1, x2)` quarter
/// plane at radii `rho_max * m / (radii - 1)`.
pub fn radial_samples(n: usize, rho_max: f64, radii: usize, rays: usize) -> Result<Vec<KernelPoint>> {
    if radii < 2 || rays < 1 || !(rho_max > 0.0) {
        return Err(Error::invalid("samples", "need radii >= 2, rays >= 1 and rho_max > 0"));
    }
    let mut out = Vec::with_capacity(radii * rays);
    for m in 0..radii {
        let rho = rho_max * m as f64 / (radii - 1) as f64;
        for i in 0..rays {
            let psi = if rays == 1 {
                0.0
            } else {
                0.5 * PI * i as f64 / (rays - 1) as f64
            };
            out.push(KernelPoint::polar(n, rho, psi)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub alpha: f64,
    pub m: f64,
    /// `(j, C_j)`.
    pub constants: Vec<(u32, f64)>,
    /// Least-squares slope of `log2 C_j` against `j`; zero for one piece.
    pub log2_slope: f64,
    /// Any sample beyond the quadrature's oscillation budget.
    pub flagged: bool,
}

impl EnvelopeReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(w, "j,c_j").map_err(io)?;
        for (j, c) in &self.constants {
            writeln!(w, "{j},{c:e}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// `C_j = max |K_j| / [2^{-j alpha} 2^{-j} (1 + 2^{-j}|x1|)^{-M} (1 + 2^{-j}|x2|)^{-M}]`
/// over `samples`, for each `j` in `js`.
pub fn envelope_fit(
    js: &[u32],
    alpha: f64,
    m: f64,
    samples: &[KernelPoint],
    bump: &BumpFunction,
    nodes: usize,
) -> Result<EnvelopeReport> {
    if !(m > 0.0) {
        return Err(Error::invalid("M", format!("must be positive, got {m}")));
    }
    if js.is_empty() || samples.is_empty() {
        return Err(Error::invalid("samples", "need at least one piece and one sample"));
    }
    let mut constants = Vec::with_capacity(js.len());
    let mut flagged = false;
    for &j in js {
        let piece = DyadicPiece::new(j, alpha)?;
        let s = 0.5f64.powi(j as i32);
        let ratios = samples
            .par_iter()
            .map(|pt| {
                let k = kj_kernel(pt, &piece, bump, nodes)?;
                let envelope = s.powf(alpha) * s * (1.0 + s * pt.norm1()).powf(-m) * (1.0 + s * pt.norm2()).powf(-m);
                Ok((k.value.abs() / envelope, !k.is_clean()))
            })
            .collect::<Result<Vec<_>>>()?;
        flagged |= ratios.iter().any(|r| r.1);
        constants.push((j, ratios.iter().map(|r| r.0).fold(0.0, f64::max)));
    }
    let log2_slope = if constants.len() >= 2 {
        let xs: Vec<f64> = constants.iter().map(|c| c.0 as f64).collect();
        let ys: Vec<f64> = constants.iter().map(|c| c.1.log2()).collect();
        line_fit(&xs, &ys)?.slope
    } else {
        0.0
    };
    Ok(EnvelopeReport {
        alpha,
        m,
        constants,
        log2_slope,
        flagged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDecay {
    /// `(rho, |S|)` at the local maxima of `|S^alpha|`.
    pub peaks: Vec<(f64, f64)>,
    /// Log-log slope of the peaks; the decay exponent is its negative.
    pub slope: f64,
    pub exponent: f64,
    pub residual: f64,
}

/// Fits the decay of the envelope of `|S^alpha|` over `[rho_lo, rho_hi]`
/// from its local maxima on a grid of spacing `step`.
pub fn kernel_decay(alpha: f64, n: usize, rho_lo: f64, rho_hi: f64, step: f64) -> Result<KernelDecay> {
    if !(rho_lo > 0.0 && rho_hi > rho_lo && step > 0.0) {
        return Err(Error::invalid("range", "need 0 < rho_lo < rho_hi and step > 0"));
    }
    let count = ((rho_hi - rho_lo) / step).ceil() as usize + 1;
    let values = (0..count)
        .map(|i| {
            let rho = rho_lo + i as f64 * step;
            closed_form_radial(rho, alpha, n).map(|v| (rho, v.abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let peaks: Vec<(f64, f64)> = values
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1)
        .map(|w| w[1])
        .collect();
    if peaks.len() < 2 {
        return Err(Error::invalid("range", "fewer than two local maxima in range"));
    }
    let xs: Vec<f64> = peaks.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = peaks.iter().map(|p| p.1.ln()).collect();
    let fit = line_fit(&xs, &ys)?;
    Ok(KernelDecay {
        peaks,
        slope: fit.slope,
        exponent: -fit.slope,
        residual: fit.residual,
    })
}

/// Writes `(rho, value)` rows.
pub fn write_kernel_csv(rows: &[(f64, f64)], path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(w, "rho,value").map_err(io)?;
    for (rho, v) in rows {
        writeln!(w, "{rho:?},{v:e}").map_err(io)?;
    }
    w.flush().map_err(io)
}
