//! The three evaluation paths of the bilinear means.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use super::MultiplierSpec;
use crate::error::{Error, Result};
use crate::grid::{dft_forward, dft_inverse, Grid, SampledField};
use crate::kernel::closed_form_radial;

/// Default cap on `N^{2n}` for the quadratic paths; admits `N = 256` at
/// `n = 1` and `N = 64` at `n = 2`.
pub const DEFAULT_OPERATION_CAP: u128 = 1 << 26;

/// Rows per partial accumulator. Fixed so that the reduction order does not
/// depend on the thread count.
const CHUNK: usize = 32;

fn check_budget(grid: &Grid, cap: u128) -> Result<()> {
    let required = (grid.len() as u128).pow(2);
    if required > cap {
        return Err(Error::Budget { required, cap });
    }
    Ok(())
}

/// A radial multiplier `m(|xi|, |eta|)` tabulated on the lattice radii of
/// one grid, for frequencies with `|xi| <= support`.
///
/// Lattice frequencies are grouped by the integer `sum m_i^2`, so `m` is
/// evaluated once per pair of distinct radii. Building the table once and
/// applying it to many inputs is the fast way to probe a fixed operator.
#[derive(Debug, Clone)]
pub struct PreparedMultiplier {
    grid: Grid,
    indices: Vec<usize>,
    class: Vec<usize>,
    classes: usize,
    table: Vec<f64>,
}

impl PreparedMultiplier {
    pub fn new<M>(grid: Grid, support: f64, multiplier: M) -> Self
    where
        M: Fn(f64, f64) -> f64 + Sync,
    {
        let key = |i: usize| -> i64 {
            let [a, b] = grid.axis_indices(i);
            let ma = grid.signed_mode(a);
            if grid.dim() == 1 {
                ma * ma
            } else {
                let mb = grid.signed_mode(b);
                ma * ma + mb * mb
            }
        };
        let indices: Vec<usize> = (0..grid.len())
            .filter(|&i| grid.frequency_modulus(i) <= support)
            .collect();
        let mut keys: Vec<i64> = indices.iter().map(|&i| key(i)).collect();
        keys.sort_unstable();
        keys.dedup();
        let class: Vec<usize> = indices.iter().map(|&i| keys.binary_search(&key(i)).unwrap()).collect();
        let radius: Vec<f64> = keys.iter().map(|&k| (k as f64).sqrt() / grid.side()).collect();
        let classes = keys.len();
        let table: Vec<f64> = (0..classes)
            .into_par_iter()
            .flat_map_iter(|a| {
                let ra = radius[a];
                radius.iter().map(move |&rb| (ra, rb))
            })
            .map(|(ra, rb)| multiplier(ra, rb))
            .collect();
        PreparedMultiplier {
            grid,
            indices,
            class,
            classes,
            table,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The double sum over lattice pairs in the support, accumulated at the
    /// wrapped lattice index of `xi + eta` (exact at the sample points).
    /// Pairs are visited in a fixed order within fixed blocks of `xi` and
    /// block sums are added in block order, so results are bit-reproducible.
    pub fn apply(&self, f: &SampledField, g: &SampledField, cap: u128) -> Result<SampledField> {
        f.check_same_grid(g)?;
        let grid = self.grid;
        if *f.grid() != grid {
            return Err(Error::invalid("grid", "multiplier was prepared for another grid"));
        }
        check_budget(&grid, cap)?;
        let fh = dft_forward(f);
        let gh = dft_forward(g);
        let (fh, gh) = (fh.values(), gh.values());
        let len = grid.len();
        let mask = grid.samples() - 1;
        let axes: Vec<[usize; 2]> = (0..len).map(|i| grid.axis_indices(i)).collect();
        let zero = Complex64::new(0.0, 0.0);
        let positions: Vec<usize> = (0..self.indices.len()).collect();

        let partials: Vec<Vec<Complex64>> = positions
            .par_chunks(CHUNK)
            .map(|rows| {
                let mut acc = vec![zero; len];
                for &p in rows {
                    let i = self.indices[p];
                    if fh[i] == zero {
                        continue;
                    }
                    let row = &self.table[self.class[p] * self.classes..][..self.classes];
                    let a = axes[i];
                    for (q, &j) in self.indices.iter().enumerate() {
                        let m = row[self.class[q]];
                        if m != 0.0 {
                            let b = axes[j];
                            let k = grid.flat_index([(a[0] + b[0]) & mask, (a[1] + b[1]) & mask]);
                            acc[k] += m * fh[i] * gh[j];
                        }
                    }
                }
                acc
            })
            .collect();
        let mut total = vec![zero; len];
        for part in &partials {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        let w = grid.frequency_cell();
        total.iter_mut().for_each(|v| *v *= w);
        Ok(dft_inverse(&SampledField::from_raw(grid, total)))
    }
}

/// `int int m(|xi|, |eta|) f_hat(xi) g_hat(eta) e^{2 pi i x.(xi + eta)}` as a
/// double sum over lattice pairs. `m` must vanish once either radius
/// exceeds `support`; pass `f64::INFINITY` to sum over the whole lattice.
pub fn bilinear_frequency_sum<M>(
    f: &SampledField,
    g: &SampledField,
    multiplier: M,
    support: f64,
    cap: u128,
) -> Result<SampledField>
where
    M: Fn(f64, f64) -> f64 + Sync,
{
    f.check_same_grid(g)?;
    check_budget(f.grid(), cap)?;
    PreparedMultiplier::new(*f.grid(), support, multiplier).apply(f, g, cap)
}

/// Reference evaluation of `S_R^alpha(f, g)` by the full frequency double
/// sum, under [`DEFAULT_OPERATION_CAP`].
pub fn br_apply_oracle(f: &SampledField, g: &SampledField, spec: &MultiplierSpec) -> Result<SampledField> {
    br_apply_oracle_capped(f, g, spec, DEFAULT_OPERATION_CAP)
}

pub fn br_apply_oracle_capped(
    f: &SampledField,
    g: &SampledField,
    spec: &MultiplierSpec,
    cap: u128,
) -> Result<SampledField> {
    bilinear_frequency_sum(f, g, |s, t| spec.eval(s, t), spec.radius(), cap)
}

/// `S_R^alpha(f, g)` through the radial representation
/// `int int m(l1, l2) R_l1 f R_l2 g l1^{n-1} l2^{n-1} dl1 dl2` on `[0, R]^2`.
///
/// Nodes sit at `l_i = i h` with `h = R / nodes`; node `i` owns the lattice
/// frequencies with `|xi|` in `[(i - 1/2) h, (i + 1/2) h)`, so every lattice
/// frequency is counted once. When `h` divides the lattice spacing `1/L`
/// the nodes land on the lattice radii and, in one dimension, the result
/// equals the oracle up to round-off; coarser nodes give a first-order
/// binning error.
pub fn br_apply_radial(
    f: &SampledField,
    g: &SampledField,
    spec: &MultiplierSpec,
    nodes: usize,
) -> Result<SampledField> {
    f.check_same_grid(g)?;
    if nodes == 0 {
        return Err(Error::invalid("nodes", "need at least one radial node"));
    }
    let grid = *f.grid();
    let h = spec.radius() / nodes as f64;
    let fh = dft_forward(f);
    let gh = dft_forward(g);
    // Each lattice frequency goes to exactly one node, the nearest one, with
    // ties to even; rounding ties up biases every radius the same way and the
    // error then stops shrinking under node doubling.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nodes + 1];
    for idx in 0..grid.len() {
        let bin = (grid.frequency_modulus(idx) * nodes as f64 / spec.radius()).round_ties_even();
        if bin <= nodes as f64 {
            members[bin as usize].push(idx);
        }
    }
    // (lambda_i, f-component, g-component) for non-empty shells
    let shells: Vec<(f64, SampledField, SampledField)> = members
        .par_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(i, m)| (i as f64 * h, shell_component(&fh, m), shell_component(&gh, m)))
        .collect();

    let len = grid.len();
    let partials: Vec<Vec<Complex64>> = shells
        .par_iter()
        .map(|(l1, u, _)| {
            let mut w = vec![Complex64::new(0.0, 0.0); len];
            for (l2, _, v) in &shells {
                let m = spec.eval(*l1, *l2);
                if m == 0.0 {
                    continue;
                }
                for (acc, &val) in w.iter_mut().zip(v.values()) {
                    *acc += m * val;
                }
            }
            u.values().iter().zip(&w).map(|(a, b)| a * b).collect()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for part in &partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p;
        }
    }
    Ok(SampledField::from_raw(grid, out))
}

/// `S_R^alpha(f, g)(x) = sum_{y1, y2} f(x - y1) g(x - y2) S_R(y1, y2) dV^2`
/// with the closed-form kernel sampled at periodic displacements.
///
/// The kernel is not band-limited, so the output carries periodization and
/// truncation error relative to the oracle.
pub fn br_apply_kernel(f: &SampledField, g: &SampledField, spec: &MultiplierSpec) -> Result<SampledField> {
    br_apply_kernel_capped(f, g, spec, DEFAULT_OPERATION_CAP)
}

pub fn br_apply_kernel_capped(
    f: &SampledField,
    g: &SampledField,
    spec: &MultiplierSpec,
    cap: u128,
) -> Result<SampledField> {
    f.check_same_grid(g)?;
    let grid = *f.grid();
    check_budget(&grid, cap)?;
    let n = grid.dim();
    let len = grid.len();
    let samples = grid.samples();
    let half = (samples / 2) as i64;
    let h = grid.spacing();
    let r = spec.radius();

    // |(y1, y2)|^2 / h^2 is an integer sum of squared signed indices.
    let max_key = (2 * n) as i64 * half * half;
    let table: Vec<f64> = (0..=max_key)
        .into_par_iter()
        .map(|key| {
            let rho = h * (key as f64).sqrt();
            closed_form_radial(r * rho, spec.alpha(), n).map(|v| r.powi(2 * n as i32) * v)
        })
        .collect::<Result<_>>()?;
    let sq: Vec<i64> = (0..len)
        .map(|i| {
            let [a, b] = grid.axis_indices(i);
            let (ma, mb) = (grid.signed_mode(a), grid.signed_mode(b));
            if n == 1 {
                ma * ma
            } else {
                ma * ma + mb * mb
            }
        })
        .collect();

    let mut g_spectrum = g.values().to_vec();
    crate::grid::fft_in_place(&grid, &mut g_spectrum, FftDirection::Forward);
    let dv = grid.cell_volume();
    // circular convolution through unnormalized transforms
    let conv_scale = dv / len as f64;
    let axes: Vec<[usize; 2]> = (0..len).map(|i| grid.axis_indices(i)).collect();
    let mask = samples - 1;

    let partials: Vec<Vec<Complex64>> = (0..len)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|rows| {
            let mut acc = vec![Complex64::new(0.0, 0.0); len];
            let mut row = vec![Complex64::new(0.0, 0.0); len];
            for &a in rows {
                for (b, slot) in row.iter_mut().enumerate() {
                    *slot = Complex64::new(table[(sq[a] + sq[b]) as usize], 0.0);
                }
                crate::grid::fft_in_place(&grid, &mut row, FftDirection::Forward);
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot *= g_spectrum[k];
                }
                crate::grid::fft_in_place(&grid, &mut row, FftDirection::Inverse);
                let ya = axes[a];
                for (x, out) in acc.iter_mut().enumerate() {
                    let xa = axes[x];
                    let shifted =
                        grid.flat_index([(xa[0].wrapping_sub(ya[0])) & mask, (xa[1].wrapping_sub(ya[1])) & mask]);
                    *out += f.values()[shifted] * row[x] * conv_scale;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for part in &partials {
        for (o, p) in out.iter_mut().zip(part) {
            *o += p * dv;
        }
    }
    Ok(SampledField::from_raw(grid, out))
}

fn shell_component(spectrum: &SampledField, members: &[usize]) -> SampledField {
    let grid = *spectrum.grid();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &i in members {
        values[i] = spectrum.values()[i];
    }
    dft_inverse(&SampledField::from_raw(grid, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_test_field, relative_l2_error, TestField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(grid: Grid, seed: u64) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SampledField::from_values(grid, v).unwrap()
    }

    fn gaussian(grid: Grid, center: f64, width: f64) -> SampledField {
        make_test_field(
            TestField::Gaussian {
                center: [center, center],
                width,
            },
            grid,
            0,
        )
        .unwrap()
    }

    #[test]
    fn sharp_cutoff_on_interior_band_is_pointwise_product() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let f = make_test_field(TestField::BandLimitedRandom { inner: 0.1, outer: 0.6 }, grid, 1).unwrap();
        let g = make_test_field(TestField::BandLimitedRandom { inner: 0.0, outer: 0.6 }, grid, 2).unwrap();
        let spec = MultiplierSpec::unit(0.0).unwrap();
        let product = f.pointwise_mul(&g).unwrap();
        let oracle = br_apply_oracle(&f, &g, &spec).unwrap();
        assert!(relative_l2_error(&oracle, &product).unwrap() < 1e-10);
        let radial = br_apply_radial(&f, &g, &spec, 16).unwrap();
        assert!(relative_l2_error(&radial, &product).unwrap() < 1e-10);
    }

    #[test]
    fn prepared_table_matches_a_direct_pair_sum() {
        let grid = Grid::new(2, 8, 4.0).unwrap();
        let (f, g) = (random(grid, 3), random(grid, 4));
        let m = |s: f64, t: f64| (1.0 + s) * (2.0 - t).max(0.0);
        let fast = bilinear_frequency_sum(&f, &g, m, 1.0, DEFAULT_OPERATION_CAP).unwrap();
        let (fh, gh) = (dft_forward(&f), dft_forward(&g));
        let mut h = vec![Complex64::new(0.0, 0.0); grid.len()];
        for i in 0..grid.len() {
            for j in 0..grid.len() {
                let (s, t) = (grid.frequency_modulus(i), grid.frequency_modulus(j));
                if s > 1.0 || t > 1.0 {
                    continue;
                }
                let (a, b) = (grid.axis_indices(i), grid.axis_indices(j));
                let k = grid.flat_index([(a[0] + b[0]) % 8, (a[1] + b[1]) % 8]);
                h[k] += m(s, t) * fh.values()[i] * gh.values()[j] * grid.frequency_cell();
            }
        }
        let slow = dft_inverse(&SampledField::from_values(grid, h).unwrap());
        assert!(relative_l2_error(&fast, &slow).unwrap() < 1e-13);
    }

    #[test]
    fn zero_input_gives_zero() {
        let grid = Grid::new(1, 64, 8.0).unwrap();
        let f = random(grid, 1);
        let z = SampledField::zeros(grid);
        let spec = MultiplierSpec::unit(1.5).unwrap();
        assert!(br_apply_oracle(&f, &z, &spec).unwrap().max_modulus() == 0.0);
        assert!(br_apply_radial(&z, &f, &spec, 8).unwrap().max_modulus() == 0.0);
        assert!(br_apply_kernel(&f, &z, &spec).unwrap().max_modulus() == 0.0);
    }

    #[test]
    fn paths_are_symmetric() {
        let grid = Grid::new(2, 16, 4.0).unwrap();
        let (f, g) = (random(grid, 3), random(grid, 4));
        let spec = MultiplierSpec::unit(1.0).unwrap();
        let fg = br_apply_oracle(&f, &g, &spec).unwrap();
        let gf = br_apply_oracle(&g, &f, &spec).unwrap();
        assert!(relative_l2_error(&fg, &gf).unwrap() < 1e-12);
        let fg = br_apply_kernel(&f, &g, &spec).unwrap();
        let gf = br_apply_kernel(&g, &f, &spec).unwrap();
        assert!(relative_l2_error(&fg, &gf).unwrap() < 1e-12);
    }

    #[test]
    fn all_paths_are_bilinear() {
        let grid = Grid::new(1, 32, 4.0).unwrap();
        let (f1, f2, g) = (random(grid, 5), random(grid, 6), random(grid, 7));
        let (a, b) = (Complex64::new(0.7, -0.2), Complex64::new(-1.3, 0.4));
        let spec = MultiplierSpec::unit(2.0).unwrap();
        type Path<'a> = &'a dyn Fn(&SampledField, &SampledField) -> SampledField;
        let paths: [Path; 3] = [
            &|f, g| br_apply_oracle(f, g, &spec).unwrap(),
            &|f, g| br_apply_radial(f, g, &spec, 8).unwrap(),
            &|f, g| br_apply_kernel(f, g, &spec).unwrap(),
        ];
        for op in paths {
            let lhs = op(&f1.combine(a, &f2, b).unwrap(), &g);
            let rhs = op(&f1, &g).combine(a, &op(&f2, &g), b).unwrap();
            assert!(relative_l2_error(&lhs, &rhs).unwrap() < 1e-12);
            let lhs = op(&g, &f1.combine(a, &f2, b).unwrap());
            let rhs = op(&g, &f1).combine(a, &op(&g, &f2), b).unwrap();
            assert!(relative_l2_error(&lhs, &rhs).unwrap() < 1e-12);
        }
    }

    #[test]
    fn lattice_aligned_radial_nodes_reproduce_the_oracle() {
        let grid = Grid::new(1, 128, 16.0).unwrap();
        let (f, g) = (gaussian(grid, 8.0, 1.0), gaussian(grid, 7.0, 0.7));
        let spec = MultiplierSpec::unit(1.5).unwrap();
        let oracle = br_apply_oracle(&f, &g, &spec).unwrap();
        let radial = br_apply_radial(&f, &g, &spec, 16).unwrap();
        assert!(relative_l2_error(&radial, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn radius_dilation_matches_rescaled_grid() {
        // S_R on [0, L) equals S_1 on [0, R L) applied to the same samples
        let radius = 2.0;
        let spec_r = MultiplierSpec::new(2.0, radius).unwrap();
        let spec_1 = MultiplierSpec::unit(2.0).unwrap();
        let grid = Grid::new(1, 128, 8.0).unwrap();
        let wide = grid.dilated(radius).unwrap();
        let (f, g) = (gaussian(grid, 4.0, 0.5), gaussian(grid, 3.0, 0.6));
        let lhs = br_apply_radial(&f, &g, &spec_r, 32).unwrap();
        let rhs = br_apply_radial(&f.with_grid(wide).unwrap(), &g.with_grid(wide).unwrap(), &spec_1, 32).unwrap();
        assert!(relative_l2_error(&lhs.with_grid(wide).unwrap(), &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn output_spectrum_stays_in_the_doubled_ball() {
        let grid = Grid::new(2, 16, 8.0).unwrap();
        let (f, g) = (random(grid, 8), random(grid, 9));
        let spec = MultiplierSpec::unit(1.0).unwrap();
        for out in [
            br_apply_oracle(&f, &g, &spec).unwrap(),
            br_apply_radial(&f, &g, &spec, 8).unwrap(),
        ] {
            let spectrum = dft_forward(&out);
            let peak = spectrum.max_modulus();
            for (i, v) in spectrum.values().iter().enumerate() {
                if grid.frequency_modulus(i) > 2.0 + 1e-12 {
                    assert!(v.norm() <= 1e-10 * peak);
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let grid = Grid::new(2, 128, 8.0).unwrap();
        let f = SampledField::zeros(grid);
        let spec = MultiplierSpec::unit(1.0).unwrap();
        assert!(matches!(br_apply_oracle(&f, &f, &spec), Err(Error::Budget { .. })));
        assert!(matches!(br_apply_kernel(&f, &f, &spec), Err(Error::Budget { .. })));
        let small = Grid::new(1, 16, 2.0).unwrap();
        let f = SampledField::zeros(small);
        assert!(matches!(
            br_apply_oracle_capped(&f, &f, &spec, 100),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn kernel_path_tracks_the_oracle_on_a_small_grid() {
        let grid = Grid::new(1, 128, 32.0).unwrap();
        let (f, g) = (gaussian(grid, 16.0, 1.0), gaussian(grid, 15.0, 1.5));
        let spec = MultiplierSpec::unit(3.0).unwrap();
        let oracle = br_apply_oracle(&f, &g, &spec).unwrap();
        let kernel = br_apply_kernel(&f, &g, &spec).unwrap();
        assert!(relative_l2_error(&kernel, &oracle).unwrap() < 5e-2);
    }
}
