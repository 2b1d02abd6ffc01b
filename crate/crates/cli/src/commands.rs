use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use brmeans::bessel::{bessel_j, bessel_j_oracle, BesselOrder};
use brmeans::decomposition::{br_apply_separable_sum, gamma_decay_check, make_bump};
use brmeans::grid::{
    make_test_field, relative_l2_error, write_csv, Exponent, ExponentPair, Grid, SampledField, TestField,
};
use brmeans::kernel::{
    closed_form_radial, dilation_check, envelope_fit, kernel_closed_form, kernel_decay, kernel_quadrature,
    radial_samples, write_kernel_csv, KernelPoint,
};
use brmeans::norms::{
    corollary_experiment, estimate_bilinear_norm_with, lemma1_scaling_experiment, piece_decay_fit, MultiplierOperator,
    SearchConfig,
};
use brmeans::operators::{br_apply_kernel, br_apply_oracle, br_apply_radial, MultiplierSpec};
use brmeans::regions::{admissible_pair, describe, region_grid_export};
use brmeans::Error;
use serde_json::json;

use crate::run::{missing, CliResult, Run};
use crate::{
    BesselArgs, DecayArgs, DecayMode, EvaluateArgs, InputKind, KernelArgs, KernelCheck, NormsArgs, NormsExperiment,
    RegionsArgs,
};

fn exponent(text: &str, field: &'static str) -> CliResult<Exponent> {
    text.parse()
        .map_err(|e: Error| Error::invalid(field, e.to_string()).into())
}

fn pair(p1: &str, p2: &str) -> CliResult<ExponentPair> {
    let pair = ExponentPair::new(exponent(p1, "p1")?, exponent(p2, "p2")?)?;
    Ok(pair)
}

/// `"a:b"` (inclusive) or `"a,b,c"`.
fn parse_js(text: &str) -> CliResult<Vec<u32>> {
    let bad = || Error::invalid("j_range", format!("expected \"a:b\" or a comma list, got `{text}`"));
    let js = if let Some((a, b)) = text.split_once(':') {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?
    };
    if js.is_empty() {
        return Err(bad().into());
    }
    Ok(js)
}

/// A rational `"a/b"` or a decimal.
fn parse_real(text: &str, field: &'static str) -> CliResult<f64> {
    let bad = || Error::invalid(field, format!("`{text}` is not a number"));
    let value = match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => text.trim().parse().map_err(|_| bad())?,
    };
    if !value.is_finite() {
        return Err(bad().into());
    }
    Ok(value)
}

fn input_field(kind: InputKind, grid: Grid, center: f64, width: f64, seed: Option<u64>) -> CliResult<SampledField> {
    let c = [center, if grid.dim() == 2 { center } else { 0.0 }];
    let spec = match kind {
        InputKind::Gaussian => TestField::Gaussian { center: c, width },
        InputKind::Ball => TestField::BallIndicator {
            center: c,
            radius: width,
        },
        InputKind::Bump => TestField::Bump {
            center: c,
            radius: width,
        },
        InputKind::Random => TestField::BandLimitedRandom { inner: 0.0, outer: 1.0 },
    };
    let seed = match kind {
        InputKind::Random => seed.ok_or_else(|| missing("seed"))?,
        _ => 0,
    };
    Ok(make_test_field(spec, grid, seed)?)
}

pub fn evaluate(args: EvaluateArgs, root: &Path) -> CliResult<PathBuf> {
    let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
    let spec = MultiplierSpec::new(alpha, args.radius)?;
    let grid = Grid::new(args.n, args.samples, args.side)?;
    for p in &args.paths {
        if !matches!(p.as_str(), "oracle" | "radial" | "kernel" | "separable") {
            return Err(Error::invalid("paths", format!("unknown path `{p}`")).into());
        }
    }
    if args.paths.is_empty() {
        return Err(Error::invalid("paths", "need at least one path").into());
    }
    let half = 0.5 * args.side;
    let f = input_field(args.f, grid, half, args.width, args.seed)?;
    let g = input_field(
        args.g,
        grid,
        half + 0.5 * args.width,
        args.width,
        args.seed.map(|s| s + 1),
    )?;

    let mut run = Run::create(root, "evaluate", args.seed)?;
    let mut outputs = Vec::new();
    for name in &args.paths {
        let out = match name.as_str() {
            "oracle" => br_apply_oracle(&f, &g, &spec)?,
            "radial" => br_apply_radial(&f, &g, &spec, args.nodes)?,
            "kernel" => br_apply_kernel(&f, &g, &spec)?,
            _ => {
                // the pieces live at unit radius; S_R on L is S_1 on R L
                let wide = grid.dilated(args.radius)?;
                let out = br_apply_separable_sum(
                    &f.with_grid(wide)?,
                    &g.with_grid(wide)?,
                    alpha,
                    args.j_max,
                    args.rank,
                    &make_bump(),
                )?;
                out.with_grid(grid)?
            }
        };
        write_csv(&out, &run.output(&format!("{name}.csv")))?;
        outputs.push((name.clone(), out));
    }
    let mut csv = String::from("path_a,path_b,relative_l2_error\n");
    let mut rows = Vec::new();
    for (i, (a, fa)) in outputs.iter().enumerate() {
        for (b, fb) in &outputs[i + 1..] {
            let err = relative_l2_error(fb, fa)?;
            writeln!(csv, "{a},{b},{err:e}").unwrap();
            println!("{a} vs {b}: relative L2 error {err:.3e}");
            rows.push(json!({"path_a": a, "path_b": b, "relative_l2_error": err}));
        }
    }
    let path = run.output("agreement.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    run.finish(&args, json!({ "agreement": rows }))
}

pub fn decay(args: DecayArgs, root: &Path) -> CliResult<PathBuf> {
    let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
    let js = parse_js(&args.j_range)?;
    match args.mode {
        DecayMode::Norms => {
            if js.len() < 4 {
                return Err(Error::invalid("j_range", "a decay fit needs at least four pieces").into());
            }
            let seed = args.seed.ok_or_else(|| missing("seed"))?;
            let exps = pair(&args.p1, &args.p2)?;
            let grid = Grid::new(args.n, args.samples, args.side)?;
            let mut run = Run::create(root, "decay", Some(seed))?;
            let fit = piece_decay_fit(
                alpha,
                &exps,
                &grid,
                &js,
                args.trials,
                seed,
                &SearchConfig { steps: args.steps },
            )?;
            fit.write_csv(&run.output("decay.csv"))?;
            if fit.degenerate {
                println!("degenerate fit: some estimate is zero");
            } else {
                println!("epsilon = {:.4} (log2 residual {:.3})", fit.epsilon, fit.residual);
            }
            let summary = json!({"epsilon": fit.epsilon, "slope": fit.slope, "residual": fit.residual, "degenerate": fit.degenerate});
            run.finish(&args, summary)
        }
        DecayMode::Gamma => {
            let delta = args.delta.ok_or_else(|| missing("delta"))?;
            let mut run = Run::create(root, "decay", args.seed)?;
            let report = gamma_decay_check(alpha, delta, &js, args.k_max, &make_bump())?;
            report.write_csv(&run.output("gamma.csv"))?;
            println!(
                "constant = {:.4e}, log2 slope = {:.4}, growth {}",
                report.constant,
                report.log2_slope,
                if report.growth_flagged {
                    "flagged"
                } else {
                    "not flagged"
                }
            );
            let summary = json!({
                "constant": report.constant,
                "log2_slope": report.log2_slope,
                "growth_flagged": report.growth_flagged,
            });
            run.finish(&args, summary)
        }
    }
}

pub fn regions(args: RegionsArgs, root: &Path) -> CliResult<PathBuf> {
    match (&args.p1, &args.p2) {
        (Some(p1), Some(p2)) => {
            let exps = admissible_pair(exponent(p1, "p1")?, exponent(p2, "p2")?)?;
            let line = describe(&exps, args.n)?;
            let run = Run::create(root, "regions", None)?;
            println!("{line}");
            run.finish(&args, json!({ "query": line }))
        }
        (None, None) => {
            let mut run = Run::create(root, "regions", None)?;
            let csv = run.output("regions.csv");
            let svg = run.output("regions.svg");
            region_grid_export(args.n, args.resolution, &csv, &svg)?;
            run.finish(&args, json!({}))
        }
        (None, Some(_)) => Err(missing("p1")),
        (Some(_), None) => Err(missing("p2")),
    }
}

pub fn kernel(mut args: KernelArgs, root: &Path) -> CliResult<PathBuf> {
    let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
    let rho_max = args
        .rho_max
        .unwrap_or(if args.check == KernelCheck::Decay { 100.0 } else { 50.0 });
    args.rho_max = Some(rho_max);
    if rho_max.is_nan() || rho_max <= 0.0 {
        return Err(Error::invalid("rho_max", "sweep range is empty").into());
    }
    if args.points < 2 {
        return Err(Error::invalid("points", "need at least two radii").into());
    }
    let n = args.n;
    let radii: Vec<f64> = (0..args.points)
        .map(|i| rho_max * i as f64 / (args.points - 1) as f64)
        .collect();
    let mut run = Run::create(root, "kernel", None)?;
    let summary = match args.check {
        KernelCheck::Sweep => {
            let spec = MultiplierSpec::unit(alpha)?;
            let mut csv = String::from("rho,closed_form,quadrature,abs_diff,flagged\n");
            let mut worst: f64 = 0.0;
            let mut flagged = 0;
            for &rho in &radii {
                let pt = KernelPoint::polar(n, rho, args.psi)?;
                let c = kernel_closed_form(&pt, alpha)?;
                let q = kernel_quadrature(&pt, &spec, args.nodes)?;
                let d = (q.value - c).abs();
                worst = worst.max(d);
                flagged += usize::from(!q.is_clean());
                writeln!(csv, "{rho:?},{c:e},{:e},{d:e},{}", q.value, !q.is_clean()).unwrap();
            }
            let path = run.output("sweep.csv");
            std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
            let table: Vec<(f64, f64)> = radii
                .iter()
                .map(|&r| closed_form_radial(r, alpha, n).map(|v| (r, v)))
                .collect::<Result<_, _>>()?;
            write_kernel_csv(&table, &run.output("kernel.csv"))?;
            println!("max |closed form - quadrature| = {worst:.3e}");
            json!({"max_abs_diff": worst, "flagged": flagged})
        }
        KernelCheck::Dilation => {
            let mut csv = String::from("rho,residual,flagged\n");
            let mut worst: f64 = 0.0;
            for &rho in &radii {
                let pt = KernelPoint::polar(n, rho, args.psi)?;
                let r = dilation_check(&pt, alpha, args.radius)?;
                worst = worst.max(r.value);
                writeln!(csv, "{rho:?},{:e},{}", r.value, !r.is_clean()).unwrap();
            }
            let path = run.output("dilation.csv");
            std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
            println!("max dilation residual = {worst:.3e}");
            json!({"max_residual": worst})
        }
        KernelCheck::Envelope => {
            let js = parse_js(&args.j_range)?;
            let samples = radial_samples(n, rho_max, args.points, 5)?;
            let report = envelope_fit(&js, alpha, args.m, &samples, &make_bump(), args.nodes)?;
            report.write_csv(&run.output("envelope.csv"))?;
            println!("log2 slope of C_j = {:.4}", report.log2_slope);
            json!({"log2_slope": report.log2_slope, "flagged": report.flagged})
        }
        KernelCheck::Decay => {
            let fit = kernel_decay(alpha, n, args.rho_min, rho_max, args.step)?;
            write_kernel_csv(&fit.peaks, &run.output("peaks.csv"))?;
            let predicted = n as f64 + alpha + 0.5;
            println!("decay exponent = {:.4} (n + alpha + 1/2 = {predicted})", fit.exponent);
            json!({"exponent": fit.exponent, "predicted": predicted, "residual": fit.residual})
        }
    };
    run.finish(&args, summary)
}

pub fn norms(mut args: NormsArgs, root: &Path) -> CliResult<PathBuf> {
    let seed = args.seed.ok_or_else(|| missing("seed"))?;
    let (default_n, default_l) = match args.experiment {
        NormsExperiment::Bilinear => (256, 32.0),
        NormsExperiment::Lemma1 => (2048, 64.0),
        NormsExperiment::Corollary => (256, 16.0),
    };
    let samples = *args.samples.get_or_insert(default_n);
    let side = *args.side.get_or_insert(default_l);
    let grid = Grid::new(args.n, samples, side)?;
    let config = SearchConfig { steps: args.steps };
    let mut run = Run::create(root, "norms", Some(seed))?;
    let summary = match args.experiment {
        NormsExperiment::Bilinear => {
            let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
            let exps = pair(
                args.p1.as_deref().ok_or_else(|| missing("p1"))?,
                args.p2.as_deref().ok_or_else(|| missing("p2"))?,
            )?;
            let op = MultiplierOperator::bochner_riesz(grid, &MultiplierSpec::unit(alpha)?);
            let est = estimate_bilinear_norm_with(&op, &exps, &grid, args.trials, seed, &config)?;
            write_estimate(&mut run, &est)?;
            println!("lower bound = {:.6e} ({})", est.value, est.witness_id);
            json!({"value": est.value, "witness": est.witness_id})
        }
        NormsExperiment::Corollary => {
            let alpha = args.alpha.ok_or_else(|| missing("alpha"))?;
            let est = corollary_experiment(alpha, &grid, args.trials, seed)?;
            write_estimate(&mut run, &est)?;
            println!("L1 x Linf -> L1 lower bound = {:.6e} ({})", est.value, est.witness_id);
            json!({"value": est.value, "witness": est.witness_id})
        }
        NormsExperiment::Lemma1 => {
            let p = exponent(args.p.as_deref().ok_or_else(|| missing("p"))?, "p")?;
            let report = lemma1_scaling_experiment(p, args.b, &args.widths, &grid, seed)?;
            report.write_csv(&run.output("scaling.csv"))?;
            match report.exponent {
                Some(e) => println!("fitted exponent = {e:.4} (1/p - 1/2 = {:.4})", report.predicted),
                None => println!("estimate = {:.6e}", report.rows[0].estimate),
            }
            json!({"exponent": report.exponent, "predicted": report.predicted})
        }
    };
    run.finish(&args, summary)
}

fn write_estimate(run: &mut Run, est: &brmeans::norms::NormEstimate) -> CliResult<()> {
    run.output("estimate.json");
    run.output("estimate_f.bin");
    run.output("estimate_g.bin");
    est.save(&run.dir, "estimate")?;
    let path = run.output("estimate.csv");
    let csv = format!("estimate,witness\n{:e},{}\n", est.value, est.witness_id);
    std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

pub fn bessel_check(args: BesselArgs, root: &Path) -> CliResult<PathBuf> {
    if args.points < 2 || !(args.r_min > 0.0 && args.r_max > args.r_min) {
        return Err(Error::invalid("points", "need at least two points and 0 < r_min < r_max").into());
    }
    let orders = args
        .orders
        .iter()
        .map(|t| parse_real(t, "orders"))
        .collect::<CliResult<Vec<f64>>>()?;
    let mut run = Run::create(root, "bessel-check", None)?;
    let mut csv = String::from("k,r,series,oracle,abs_diff,flagged\n");
    let mut worst: f64 = 0.0;
    let ratio = (args.r_max / args.r_min).ln();
    for &k in &orders {
        let order = BesselOrder::new(k)?;
        for i in 0..args.points {
            let r = args.r_min * (ratio * i as f64 / (args.points - 1) as f64).exp();
            let a = bessel_j(order, r)?;
            let b = bessel_j_oracle(order, r)?;
            let d = (a - b.value).abs();
            worst = worst.max(d);
            writeln!(csv, "{k:?},{r:?},{a:e},{:e},{d:e},{}", b.value, !b.is_clean()).unwrap();
        }
    }
    let path = run.output("bessel.csv");
    std::fs::write(&path, csv).map_err(|e| Error::io(&path, e))?;
    println!("max |series - oracle| = {worst:.3e}");
    run.finish(&args, json!({ "max_abs_diff": worst }))
}
