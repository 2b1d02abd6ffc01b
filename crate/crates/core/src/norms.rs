//! Lower bounds for mixed-norm operator bounds by witness search.
//!
//! Every estimate is a ratio actually achieved by a stored pair of inputs,
//! so it is a certified lower bound for the discrete operator and nothing
//! more.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{phi_j_alpha, BumpFunction, DyadicPiece};
use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::grid::{
    dft_forward, dft_inverse, lp_norm, make_test_field, read_binary, write_binary, Exponent, ExponentPair, Grid,
    SampledField, TestField,
};
use crate::operators::{band_operator, BandSpec, MultiplierSpec, PreparedMultiplier, DEFAULT_OPERATION_CAP};

/// Perturbation steps per trial.
pub const CLIMB_STEPS: usize = 50;

/// A pure bilinear operator on sampled fields.
pub trait BilinearOperator: Sync {
    fn apply(&self, f: &SampledField, g: &SampledField) -> Result<SampledField>;
}

impl<F> BilinearOperator for F
where
    F: Fn(&SampledField, &SampledField) -> Result<SampledField> + Sync,
{
    fn apply(&self, f: &SampledField, g: &SampledField) -> Result<SampledField> {
        self(f, g)
    }
}

/// A radial frequency multiplier prepared once for a grid and evaluated
/// under an operation cap.
#[derive(Debug, Clone)]
pub struct MultiplierOperator {
    table: PreparedMultiplier,
    cap: u128,
}

impl MultiplierOperator {
    /// `S_R^alpha` on `grid`.
    pub fn bochner_riesz(grid: Grid, spec: &MultiplierSpec) -> Self {
        let spec = *spec;
        MultiplierOperator {
            table: PreparedMultiplier::new(grid, spec.radius(), |s, t| spec.eval(s, t)),
            cap: DEFAULT_OPERATION_CAP,
        }
    }

    /// The dyadic piece `T_j^alpha` on `grid`.
    pub fn piece(grid: Grid, piece: &DyadicPiece, bump: &BumpFunction) -> Self {
        MultiplierOperator {
            table: PreparedMultiplier::new(grid, piece.radial_support().1, |s, t| phi_j_alpha(s, t, piece, bump)),
            cap: DEFAULT_OPERATION_CAP,
        }
    }

    pub fn with_cap(mut self, cap: u128) -> Self {
        self.cap = cap;
        self
    }
}

impl BilinearOperator for MultiplierOperator {
    fn apply(&self, f: &SampledField, g: &SampledField) -> Result<SampledField> {
        self.table.apply(f, g, self.cap)
    }
}

/// The operator that returns zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroOperator;

impl BilinearOperator for ZeroOperator {
    fn apply(&self, f: &SampledField, g: &SampledField) -> Result<SampledField> {
        if f.grid() != g.grid() {
            return Err(Error::invalid("grid", "fields live on different grids"));
        }
        Ok(SampledField::zeros(*f.grid()))
    }
}

/// A named input function.
#[derive(Debug, Clone)]
pub struct Witness {
    pub id: String,
    pub field: SampledField,
}

/// Where modulated witnesses put their frequency. A pair modulated at
/// `1/sqrt(2)` sits on the unit sphere of the joint frequency space; `1`
/// puts a single input on the unit sphere.
pub const MODULATIONS: [f64; 2] = [FRAC_1_SQRT_2, 1.0];

fn center(grid: &Grid) -> [f64; 2] {
    let c = 0.5 * grid.side();
    [c, if grid.dim() == 2 { c } else { 0.0 }]
}

/// Lattice frequency nearest to `radius` along the first axis.
fn lattice_frequency(grid: &Grid, radius: f64) -> f64 {
    (radius * grid.side()).round() / grid.side()
}

fn plane_wave(grid: &Grid, frequency: f64) -> SampledField {
    SampledField::from_fn(*grid, |x| Complex64::from_polar(1.0, 2.0 * PI * frequency * x[0]))
}

fn spike(grid: &Grid) -> SampledField {
    let c = center(grid);
    let h = grid.spacing();
    let idx = [(c[0] / h).round() as usize, (c[1] / h).round() as usize];
    let flat = grid.flat_index([
        idx[0] % grid.samples(),
        if grid.dim() == 2 { idx[1] % grid.samples() } else { 0 },
    ]);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    values[flat] = Complex64::new(1.0 / grid.cell_volume(), 0.0);
    SampledField::from_values(*grid, values).expect("length matches")
}

/// Unimodular field `exp(i theta)` with `theta` a random band-limited real
/// phase of amplitude `pi`.
fn random_phase(grid: &Grid, outer: f64, seed: u64) -> Result<SampledField> {
    let base = make_test_field(TestField::BandLimitedRandom { inner: 0.0, outer }, *grid, seed)?;
    let peak = base.values().iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let scale = if peak > 0.0 { PI / peak } else { 0.0 };
    Ok(base.map(|v| Complex64::from_polar(1.0, scale * v.re)))
}

/// The standard witness catalog on `grid`, for an input slot with exponent
/// `p`: a spike of unit mass, Gaussians and ball indicators at three scales,
/// band-limited random fields on three annuli, and modulated copies of the
/// Gaussians and balls. For `p = infinity` unimodular fields come first:
/// the constant, plane waves and random-phase fields.
///
/// Members that do not fit on the grid are skipped.
pub fn witness_catalog(grid: &Grid, p: Exponent, seed: u64) -> Vec<Witness> {
    let mut out = Vec::new();
    let c = center(grid);
    if p.is_infinite() {
        out.push(Witness {
            id: "constant".into(),
            field: SampledField::from_fn(*grid, |_| Complex64::new(1.0, 0.0)),
        });
        for m in MODULATIONS {
            out.push(Witness {
                id: format!("plane_wave_{m:.3}"),
                field: plane_wave(grid, lattice_frequency(grid, m)),
            });
        }
        for (k, outer) in [0.25, 0.5, 1.0].into_iter().enumerate() {
            if outer < grid.nyquist() {
                if let Ok(field) = random_phase(grid, outer, seed.wrapping_add(k as u64)) {
                    out.push(Witness {
                        id: format!("random_phase_{outer}"),
                        field,
                    });
                }
            }
        }
    }
    out.push(Witness {
        id: "spike".into(),
        field: spike(grid),
    });
    let mut localized = Vec::new();
    for width in [1.0, 4.0, 16.0] {
        if width >= 2.0 * grid.spacing() {
            if let Ok(field) = make_test_field(TestField::Gaussian { center: c, width }, *grid, 0) {
                localized.push(Witness {
                    id: format!("gaussian_{width}"),
                    field,
                });
            }
        }
    }
    for radius in [0.5, 2.0, 8.0] {
        if radius >= 2.0 * grid.spacing() {
            if let Ok(field) = make_test_field(TestField::BallIndicator { center: c, radius }, *grid, 0) {
                localized.push(Witness {
                    id: format!("ball_{radius}"),
                    field,
                });
            }
        }
    }
    let modulated: Vec<Witness> = MODULATIONS
        .iter()
        .flat_map(|&m| {
            let wave = plane_wave(grid, lattice_frequency(grid, m));
            localized.iter().map(move |w| Witness {
                id: format!("{}_mod_{m:.3}", w.id),
                field: w.field.pointwise_mul(&wave).expect("same grid"),
            })
        })
        .collect();
    out.extend(localized);
    for (k, (inner, outer)) in [(0.0, 0.5), (0.5, 1.0), (0.9, 1.1)].into_iter().enumerate() {
        if outer < grid.nyquist() {
            if let Ok(field) = make_test_field(
                TestField::BandLimitedRandom { inner, outer },
                *grid,
                seed.wrapping_add(16 + k as u64),
            ) {
                out.push(Witness {
                    id: format!("band_{inner}_{outer}"),
                    field,
                });
            }
        }
    }
    out.extend(modulated);
    out
}

/// A certified lower bound and the inputs that achieve it.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub value: f64,
    pub witness_f: SampledField,
    pub witness_g: SampledField,
    pub witness_id: String,
    pub exponents: ExponentPair,
    pub trials: usize,
    pub seed: u64,
}

/// `||T(f, g)||_p / (||f||_p1 ||g||_p2)`, zero when either input vanishes.
pub fn norm_ratio(
    op: &dyn BilinearOperator,
    f: &SampledField,
    g: &SampledField,
    exponents: &ExponentPair,
) -> Result<f64> {
    let den = lp_norm(f, exponents.p1()) * lp_norm(g, exponents.p2());
    if den == 0.0 || !den.is_finite() {
        return Ok(0.0);
    }
    let out = op.apply(f, g)?;
    Ok(lp_norm(&out, exponents.p()) / den)
}

impl NormEstimate {
    /// The ratio recomputed from the stored witnesses.
    pub fn recompute(&self, op: &dyn BilinearOperator) -> Result<f64> {
        norm_ratio(op, &self.witness_f, &self.witness_g, &self.exponents)
    }

    /// Writes `<stem>.json` next to the witnesses `<stem>_f.bin` and
    /// `<stem>_g.bin`, and returns the JSON path.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let f_name = format!("{stem}_f.bin");
        let g_name = format!("{stem}_g.bin");
        write_binary(&self.witness_f, &dir.join(&f_name))?;
        write_binary(&self.witness_g, &dir.join(&g_name))?;
        let record = EstimateRecord {
            value: self.value,
            witness_id: self.witness_id.clone(),
            p1: self.exponents.p1(),
            p2: self.exponents.p2(),
            p: self.exponents.p(),
            trials: self.trials,
            seed: self.seed,
            side: self.witness_f.grid().side(),
            witness_f: f_name,
            witness_g: g_name,
        };
        let path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&record).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let record: EstimateRecord = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        Ok(NormEstimate {
            value: record.value,
            witness_f: read_binary(&dir.join(&record.witness_f), record.side)?,
            witness_g: read_binary(&dir.join(&record.witness_g), record.side)?,
            witness_id: record.witness_id,
            exponents: ExponentPair::new(record.p1, record.p2)?,
            trials: record.trials,
            seed: record.seed,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EstimateRecord {
    value: f64,
    witness_id: String,
    p1: Exponent,
    p2: Exponent,
    p: Exponent,
    trials: usize,
    seed: u64,
    side: f64,
    witness_f: String,
    witness_g: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Hill-climbing steps per trial.
    pub steps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { steps: CLIMB_STEPS }
    }
}

/// Catalog pairs in trial order: matched indices first, then the rest
/// row by row.
fn pair_order(nf: usize, ng: usize) -> Vec<(usize, usize)> {
    let diag = nf.min(ng);
    let mut out: Vec<(usize, usize)> = (0..diag).map(|k| (k, k)).collect();
    for a in 0..nf {
        for b in 0..ng {
            if a != b || a >= diag {
                out.push((a, b));
            }
        }
    }
    out
}

fn perturb(field: &SampledField, p: Exponent, step: f64, rng: &mut ChaCha8Rng) -> Result<SampledField> {
    let grid = *field.grid();
    let outer = grid.nyquist().min(2.0) * 0.99;
    let noise = make_test_field(TestField::BandLimitedRandom { inner: 0.0, outer }, grid, rng.gen())?;
    if p.is_infinite() {
        // rotate the phase, keeping the modulus
        let peak = noise.values().iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        let scale = if peak > 0.0 { PI * step / peak } else { 0.0 };
        return Ok(SampledField::from_values(
            grid,
            field
                .values()
                .iter()
                .zip(noise.values())
                .map(|(v, n)| v * Complex64::from_polar(1.0, scale * n.re))
                .collect(),
        )
        .expect("same length"));
    }
    // noise has unit L^2 norm
    let size = lp_norm(field, Exponent::integer(2).expect("2 is valid"));
    field.combine(Complex64::new(1.0, 0.0), &noise, Complex64::new(step * size, 0.0))
}

struct TrialResult {
    value: f64,
    f: SampledField,
    g: SampledField,
    id: String,
}

fn run_trial(
    op: &dyn BilinearOperator,
    exponents: &ExponentPair,
    start: (&Witness, &Witness),
    rng: &mut ChaCha8Rng,
    config: &SearchConfig,
) -> Result<TrialResult> {
    let (mut f, mut g) = (start.0.field.clone(), start.1.field.clone());
    let mut best = norm_ratio(op, &f, &g, exponents)?;
    let mut step = 0.1;
    let mut rejected = 0;
    let mut accepted = 0;
    for s in 0..config.steps {
        let (cf, cg) = if s % 2 == 0 {
            (perturb(&f, exponents.p1(), step, rng)?, g.clone())
        } else {
            (f.clone(), perturb(&g, exponents.p2(), step, rng)?)
        };
        let value = norm_ratio(op, &cf, &cg, exponents)?;
        if value > best {
            best = value;
            f = cf;
            g = cg;
            accepted += 1;
            rejected = 0;
        } else {
            rejected += 1;
            if rejected == 10 {
                step *= 0.5;
                rejected = 0;
            }
        }
    }
    let id = if accepted > 0 {
        format!("{}+{}/climb{}", start.0.id, start.1.id, accepted)
    } else {
        format!("{}+{}", start.0.id, start.1.id)
    };
    Ok(TrialResult { value: best, f, g, id })
}

/// Lower bound for the `L^p1 x L^p2 -> L^p` norm of `op` on `grid`.
///
/// Trial `i` starts from the `i`-th pair of catalog witnesses (matched pairs
/// first, then random pairs once the catalog is exhausted) and hill-climbs
/// with random perturbations drawn from stream `i` of `seed`. The result is
/// the best trial, ties going to the lower index, so adding trials never
/// lowers the estimate.
pub fn estimate_bilinear_norm(
    op: &dyn BilinearOperator,
    exponents: &ExponentPair,
    grid: &Grid,
    trials: usize,
    seed: u64,
) -> Result<NormEstimate> {
    estimate_bilinear_norm_with(op, exponents, grid, trials, seed, &SearchConfig::default())
}

pub fn estimate_bilinear_norm_with(
    op: &dyn BilinearOperator,
    exponents: &ExponentPair,
    grid: &Grid,
    trials: usize,
    seed: u64,
    config: &SearchConfig,
) -> Result<NormEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one trial"));
    }
    let cat_f = witness_catalog(grid, exponents.p1(), seed);
    let cat_g = witness_catalog(grid, exponents.p2(), seed.wrapping_add(1 << 32));
    let order = pair_order(cat_f.len(), cat_g.len());
    let results = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (a, b) = match order.get(i) {
                Some(&pair) => pair,
                None => (rng.gen_range(0..cat_f.len()), rng.gen_range(0..cat_g.len())),
            };
            run_trial(op, exponents, (&cat_f[a], &cat_g[b]), &mut rng, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best].value {
            best = i;
        }
    }
    let r = results.into_iter().nth(best).expect("at least one trial");
    Ok(NormEstimate {
        value: r.value,
        witness_f: r.f,
        witness_g: r.g,
        witness_id: r.id,
        exponents: *exponents,
        trials,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub js: Vec<u32>,
    pub norms: Vec<f64>,
    pub witness_ids: Vec<String>,
    /// Least-squares slope of `log2(norms)` against `js`.
    pub slope: f64,
    pub epsilon: f64,
    /// Root-mean-square residual of the fit in `log2` units.
    pub residual: f64,
    /// Some estimate was zero, so no logarithmic fit exists.
    pub degenerate: bool,
}

impl DecayFit {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(w, "j,estimate,witness").map_err(io)?;
        for ((j, v), id) in self.js.iter().zip(&self.norms).zip(&self.witness_ids) {
            writeln!(w, "{j},{v:e},{id}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Estimates `||T_j||` for each `j` and fits `log2 ||T_j|| ~ -epsilon j`.
pub fn decay_fit<O, F>(
    op_family: F,
    exponents: &ExponentPair,
    grid: &Grid,
    js: &[u32],
    trials: usize,
    seed: u64,
    config: &SearchConfig,
) -> Result<DecayFit>
where
    O: BilinearOperator,
    F: Fn(u32) -> Result<O>,
{
    if js.len() < 4 {
        return Err(Error::invalid("j_range", "a decay fit needs at least four pieces"));
    }
    let mut norms = Vec::with_capacity(js.len());
    let mut witness_ids = Vec::with_capacity(js.len());
    for &j in js {
        let op = op_family(j)?;
        let est = estimate_bilinear_norm_with(&op, exponents, grid, trials, seed, config)?;
        norms.push(est.value);
        witness_ids.push(est.witness_id);
    }
    let degenerate = norms.iter().any(|&v| !(v > 0.0));
    let (slope, residual) = if degenerate {
        (0.0, 0.0)
    } else {
        let xs: Vec<f64> = js.iter().map(|&j| j as f64).collect();
        let ys: Vec<f64> = norms.iter().map(|v| v.log2()).collect();
        let fit = line_fit(&xs, &ys)?;
        (fit.slope, fit.residual)
    };
    Ok(DecayFit {
        js: js.to_vec(),
        norms,
        witness_ids,
        slope,
        epsilon: -slope,
        residual,
        degenerate,
    })
}

/// [`decay_fit`] for the pieces `T_j^alpha` on `grid`.
pub fn piece_decay_fit(
    alpha: f64,
    exponents: &ExponentPair,
    grid: &Grid,
    js: &[u32],
    trials: usize,
    seed: u64,
    config: &SearchConfig,
) -> Result<DecayFit> {
    let bump = BumpFunction;
    decay_fit(
        |j| Ok(MultiplierOperator::piece(*grid, &DyadicPiece::new(j, alpha)?, &bump)),
        exponents,
        grid,
        js,
        trials,
        seed,
        config,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub width: f64,
    pub estimate: f64,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub p: Exponent,
    pub b: f64,
    pub rows: Vec<ScalingRow>,
    /// Fitted exponent of the estimates against `w b^{n-1}`; absent for a
    /// single width.
    pub exponent: Option<f64>,
    pub predicted: f64,
    pub residual: Option<f64>,
}

impl ScalingReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(w, "w,estimate,witness").map_err(io)?;
        for r in &self.rows {
            writeln!(w, "{},{:e},{}", r.width, r.estimate, r.witness).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// The band's own kernel: the inverse transform of the band indicator.
fn band_witness(grid: &Grid, a: f64, b: f64) -> SampledField {
    let spectrum = SampledField::from_values(
        *grid,
        (0..grid.len())
            .map(|i| {
                let r = grid.frequency_modulus(i);
                Complex64::new(if r >= a && r <= b { 1.0 } else { 0.0 }, 0.0)
            })
            .collect(),
    )
    .expect("length matches");
    dft_inverse(&spectrum)
}

/// `sup_f ||T_m f||_2 / ||f||_p` over witnesses, for `m = 1` on the bands
/// `[b - w, b]`, and the fitted exponent of the estimates in `w b^{n-1}`.
///
/// The witnesses are the catalog, its Gaussians and balls modulated to the
/// middle of the band, random fields on the band, and the band kernel.
pub fn lemma1_scaling_experiment(p: Exponent, b: f64, widths: &[f64], grid: &Grid, seed: u64) -> Result<ScalingReport> {
    let pf = p.as_f64();
    if !(1.0..=2.0).contains(&pf) {
        return Err(Error::invalid("p", format!("must lie in [1, 2], got {p}")));
    }
    if widths.is_empty() || widths.iter().any(|&w| !(w > 0.0) || w > b) {
        return Err(Error::invalid("band", "widths must lie in (0, b]"));
    }
    let n = grid.dim();
    let two = Exponent::integer(2)?;
    let mut rows = Vec::with_capacity(widths.len());
    for &w in widths {
        let band = BandSpec::constant(b - w, b, 1.0)?;
        let mid = lattice_frequency(grid, b - 0.5 * w);
        let wave = plane_wave(grid, mid);
        let mut witnesses = witness_catalog(grid, p, seed);
        let modulated: Vec<Witness> = witnesses
            .iter()
            .filter(|w| w.id.starts_with("gaussian") || w.id.starts_with("ball"))
            .filter(|w| !w.id.contains("_mod_"))
            .map(|w| Witness {
                id: format!("{}_band", w.id),
                field: w.field.pointwise_mul(&wave).expect("same grid"),
            })
            .collect();
        witnesses.extend(modulated);
        for k in 0..3u64 {
            if let Ok(field) = make_test_field(
                TestField::BandLimitedRandom { inner: b - w, outer: b },
                *grid,
                seed.wrapping_add(k),
            ) {
                witnesses.push(Witness {
                    id: format!("band_random_{k}"),
                    field,
                });
            }
        }
        witnesses.push(Witness {
            id: "band_kernel".into(),
            field: band_witness(grid, b - w, b),
        });
        let ratios = witnesses
            .par_iter()
            .map(|wit| {
                let den = lp_norm(&wit.field, p);
                if den == 0.0 {
                    return Ok(0.0);
                }
                Ok(lp_norm(&band_operator(&wit.field, &band)?, two) / den)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut best = 0;
        for (i, &r) in ratios.iter().enumerate() {
            if r > ratios[best] {
                best = i;
            }
        }
        rows.push(ScalingRow {
            width: w,
            estimate: ratios[best],
            witness: witnesses[best].id.clone(),
        });
    }
    let (exponent, residual) = if rows.len() >= 2 {
        let xs: Vec<f64> = rows.iter().map(|r| (r.width * b.powi(n as i32 - 1)).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.estimate.ln()).collect();
        let fit = line_fit(&xs, &ys)?;
        (Some(fit.slope), Some(fit.residual))
    } else {
        (None, None)
    };
    Ok(ScalingReport {
        p,
        b,
        rows,
        exponent,
        predicted: 1.0 / pf - 0.5,
        residual,
    })
}

/// Lower bound for the `L^1 x L^inf -> L^1` norm of `S^alpha` on `grid`.
pub fn corollary_experiment(alpha: f64, grid: &Grid, trials: usize, seed: u64) -> Result<NormEstimate> {
    let spec = MultiplierSpec::unit(alpha)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    let op = MultiplierOperator::bochner_riesz(*grid, &spec);
    let exponents = ExponentPair::new(Exponent::integer(1)?, Exponent::Infinity)?;
    estimate_bilinear_norm(&op, &exponents, grid, trials, seed)
}

/// The spectrum of `f` restricted to `|xi| <= radius`.
pub fn low_pass(f: &SampledField, radius: f64) -> SampledField {
    let spectrum = dft_forward(f);
    let grid = *f.grid();
    let cut = SampledField::from_values(
        grid,
        spectrum
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if grid.frequency_modulus(i) <= radius {
                    v
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect(),
    )
    .expect("length matches");
    dft_inverse(&cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::make_bump;

    fn pair(a: &str, b: &str) -> ExponentPair {
        ExponentPair::parse(a, b).unwrap()
    }

    fn product(f: &SampledField, g: &SampledField) -> Result<SampledField> {
        f.pointwise_mul(g)
    }

    #[test]
    fn catalog_has_expected_members() {
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let finite = witness_catalog(&grid, Exponent::integer(1).unwrap(), 0);
        assert_eq!(finite[0].id, "spike");
        assert!(finite.iter().any(|w| w.id == "gaussian_4"));
        assert!(finite.iter().any(|w| w.id.ends_with("_mod_0.707")));
        assert!(finite.iter().all(|w| !w.field.is_zero()));
        let inf = witness_catalog(&grid, Exponent::Infinity, 0);
        assert_eq!(inf[0].id, "constant");
        for w in inf
            .iter()
            .filter(|w| w.id.starts_with("random_phase") || w.id.starts_with("plane"))
        {
            assert!(w.field.values().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn spike_has_unit_mass() {
        let grid = Grid::new(2, 16, 8.0).unwrap();
        assert!((lp_norm(&spike(&grid), Exponent::integer(1).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pointwise_product_with_matched_gaussians() {
        // for Gaussians of width w, ||f g||_1 = w^2/2 and ||f||_2 = w/sqrt(2)
        // (one dimension), so the ratio is exactly 1
        let grid = Grid::new(1, 256, 32.0).unwrap();
        let exps = pair("2", "2");
        let est = estimate_bilinear_norm_with(&product, &exps, &grid, 8, 3, &SearchConfig { steps: 10 }).unwrap();
        let g = make_test_field(
            TestField::Gaussian {
                center: [16.0, 0.0],
                width: 4.0,
            },
            grid,
            0,
        )
        .unwrap();
        let direct = norm_ratio(&product, &g, &g, &exps).unwrap();
        assert!((direct - 1.0).abs() < 1e-10);
        assert!(est.value >= (1.0 - 1e-6) * direct);
        // Cauchy-Schwarz caps the ratio at 1
        assert!(est.value <= 1.0 + 1e-12);
    }

    #[test]
    fn sharp_cutoff_on_interior_band_acts_as_a_product() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let op = MultiplierOperator::bochner_riesz(grid, &MultiplierSpec::unit(0.0).unwrap());
        let f = low_pass(
            &make_test_field(
                TestField::Gaussian {
                    center: [8.0, 0.0],
                    width: 2.0,
                },
                grid,
                0,
            )
            .unwrap(),
            0.6,
        );
        let exps = pair("2", "2");
        let a = norm_ratio(&op, &f, &f, &exps).unwrap();
        let b = norm_ratio(&product, &f, &f, &exps).unwrap();
        assert!((a - b).abs() < 1e-10 * b);
    }

    #[test]
    fn zero_operator_gives_zero() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let est = estimate_bilinear_norm_with(
            &ZeroOperator,
            &pair("1", "inf"),
            &grid,
            3,
            0,
            &SearchConfig { steps: 4 },
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn more_trials_never_lower_the_estimate() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let op = MultiplierOperator::bochner_riesz(grid, &MultiplierSpec::unit(1.0).unwrap());
        let exps = pair("1", "2");
        let cfg = SearchConfig { steps: 6 };
        let few = estimate_bilinear_norm_with(&op, &exps, &grid, 8, 11, &cfg).unwrap();
        let many = estimate_bilinear_norm_with(&op, &exps, &grid, 64, 11, &cfg).unwrap();
        assert!(many.value >= few.value);
    }

    #[test]
    fn estimates_are_deterministic_and_reproducible() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let op = MultiplierOperator::bochner_riesz(grid, &MultiplierSpec::unit(1.0).unwrap());
        let exps = pair("1", "inf");
        let cfg = SearchConfig { steps: 8 };
        let a = estimate_bilinear_norm_with(&op, &exps, &grid, 5, 2, &cfg).unwrap();
        let b = estimate_bilinear_norm_with(&op, &exps, &grid, 5, 2, &cfg).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.witness_id, b.witness_id);
        let again = a.recompute(&op).unwrap();
        assert!((again - a.value).abs() <= 1e-12 * a.value);

        let dir = tempfile::tempdir().unwrap();
        let path = a.save(dir.path(), "estimate").unwrap();
        let loaded = NormEstimate::load(&path).unwrap();
        assert_eq!(loaded.witness_id, a.witness_id);
        assert!((loaded.recompute(&op).unwrap() - a.value).abs() <= 1e-12 * a.value);
    }

    #[test]
    fn budget_errors_propagate() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let op = MultiplierOperator::bochner_riesz(grid, &MultiplierSpec::unit(1.0).unwrap()).with_cap(100);
        let r = estimate_bilinear_norm_with(&op, &pair("2", "2"), &grid, 1, 0, &SearchConfig { steps: 0 });
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn decay_fit_contract() {
        let grid = Grid::new(1, 64, 16.0).unwrap();
        let exps = pair("1", "1");
        let cfg = SearchConfig { steps: 0 };
        let zero = decay_fit(|_| Ok(ZeroOperator), &exps, &grid, &[0, 1, 2, 3], 1, 0, &cfg).unwrap();
        assert!(zero.degenerate);
        assert!(decay_fit(|_| Ok(ZeroOperator), &exps, &grid, &[0, 1, 2], 1, 0, &cfg).is_err());
        // a family scaled by 2^{-j} fits epsilon = 1 exactly
        let fit = decay_fit(
            |j| {
                let s = 0.5f64.powi(j as i32);
                Ok(move |f: &SampledField, g: &SampledField| Ok(f.pointwise_mul(g)?.scaled(Complex64::new(s, 0.0))))
            },
            &exps,
            &grid,
            &[0, 1, 2, 3, 4],
            2,
            0,
            &cfg,
        )
        .unwrap();
        assert!((fit.epsilon - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn piece_norms_shrink_with_j() {
        let grid = Grid::new(1, 512, 64.0).unwrap();
        let bump = make_bump();
        let exps = pair("2", "2");
        let cfg = SearchConfig { steps: 0 };
        let at = |j| {
            let op = MultiplierOperator::piece(grid, &DyadicPiece::new(j, 2.0).unwrap(), &bump);
            estimate_bilinear_norm_with(&op, &exps, &grid, 4, 0, &cfg)
                .unwrap()
                .value
        };
        assert!(at(3) < at(1));
    }

    #[test]
    fn lemma1_endpoints() {
        let grid = Grid::new(1, 2048, 64.0).unwrap();
        let widths = [0.5, 1.0, 2.0, 4.0];
        let flat = lemma1_scaling_experiment(Exponent::integer(2).unwrap(), 8.0, &widths, &grid, 0).unwrap();
        assert!(flat.exponent.unwrap().abs() < 0.1);
        for r in &flat.rows {
            assert!(r.estimate <= 1.0 + 1e-12);
        }
        let single = lemma1_scaling_experiment(Exponent::integer(1).unwrap(), 8.0, &[1.0], &grid, 0).unwrap();
        assert!(single.exponent.is_none());
        // the spike gives ||T f||_2^2 = (number of band frequencies) / L
        let expected = ((2.0 * (64.0 + 1.0)) / 64.0f64).sqrt();
        assert!((single.rows[0].estimate - expected).abs() < 1e-9 * expected);
        assert!(lemma1_scaling_experiment(Exponent::integer(4).unwrap(), 8.0, &widths, &grid, 0).is_err());
    }

    #[test]
    fn corollary_is_monotone_in_alpha_at_fixed_witnesses() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let exps = pair("1", "inf");
        let f = spike(&grid);
        let g = SampledField::from_fn(grid, |_| Complex64::new(1.0, 0.0));
        let at = |alpha: f64| {
            let op = MultiplierOperator::bochner_riesz(grid, &MultiplierSpec::unit(alpha).unwrap());
            norm_ratio(&op, &f, &g, &exps).unwrap()
        };
        assert!(at(2.5) <= at(1.5));
        let est = corollary_experiment(1.5, &grid, 4, 0).unwrap();
        assert!(est.value.is_finite() && est.value > 0.0);
    }
}
