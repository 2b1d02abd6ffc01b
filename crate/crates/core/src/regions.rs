//! Exact smoothness thresholds over the `(1/p1, 1/p2)` square.
//!
//! Every threshold has the form `c_n * n + c_0` with rational coefficients
//! and is computed without floating point. `1/infinity` is exactly zero.

use std::fmt;
use std::io::Write;
use std::path::Path;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Exponent, ExponentPair, Rational};

/// Parts of the admissible square.
///
/// `IA`: `1 <= p1 <= 2 <= p2`, `p < 1`. `IB`: the mirror image.
/// `IIA`: `1 <= p1 <= p2 <= 2`. `IIB`: `1 <= p2 <= p1 <= 2`.
/// `BanachFallback`: target `p >= 1` outside the II regions. `Basic` labels
/// the estimate that holds everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    #[serde(rename = "I_a")]
    IA,
    #[serde(rename = "I_b")]
    IB,
    #[serde(rename = "II_a")]
    IIA,
    #[serde(rename = "II_b")]
    IIB,
    #[serde(rename = "Banach_fallback")]
    BanachFallback,
    #[serde(rename = "Basic")]
    Basic,
}

impl RegionLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::IA => "I_a",
            RegionLabel::IB => "I_b",
            RegionLabel::IIA => "II_a",
            RegionLabel::IIB => "II_b",
            RegionLabel::BanachFallback => "Banach_fallback",
            RegionLabel::Basic => "Basic",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A statement that yields a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statement {
    /// `n (1/p1 - 1/2)` on region `I_a`, `n >= 2`.
    RegionIA,
    /// `n (1/p2 - 1/2)` on region `I_b`, `n >= 2`.
    RegionIB,
    /// `n (1/p - 1) - (1/p2 - 1/2)` on region `II_a`, `n >= 2`.
    RegionIIA,
    /// `n (1/p - 1) - (1/p1 - 1/2)` on region `II_b`, `n >= 2`.
    RegionIIB,
    /// `n (1/p - 1)` for `1 <= p1, p2 <= 2`, from the dyadic pieces, `n >= 2`.
    Dyadic,
    /// `n / 2` at `(1, inf)` and `(inf, 1)`, `n >= 2`.
    EndpointL1Linf,
    /// `n - 1/2` everywhere.
    Basic,
}

impl Statement {
    pub fn name(self) -> &'static str {
        match self {
            Statement::RegionIA => "I_a",
            Statement::RegionIB => "I_b",
            Statement::RegionIIA => "II_a",
            Statement::RegionIIB => "II_b",
            Statement::Dyadic => "dyadic",
            Statement::EndpointL1Linf => "l1_linf",
            Statement::Basic => "basic",
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `c_n * n + c_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(with = "rational_string")]
    pub c_n: Rational,
    #[serde(with = "rational_string")]
    pub c_0: Rational,
}

impl Threshold {
    pub fn new(c_n: Rational, c_0: Rational) -> Self {
        Threshold { c_n, c_0 }
    }

    pub fn at(&self, n: usize) -> Rational {
        self.c_n * Rational::from_integer(n as i64) + self.c_0
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.c_n.is_zero(), self.c_0.is_zero()) {
            (true, _) => write!(f, "{}", self.c_0),
            (false, true) => write!(f, "{}*n", self.c_n),
            (false, false) if self.c_0 < Rational::zero() => write!(f, "{}*n - {}", self.c_n, -self.c_0),
            (false, false) => write!(f, "{}*n + {}", self.c_n, self.c_0),
        }
    }
}

mod rational_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexResult {
    pub n: usize,
    pub label: RegionLabel,
    /// Every statement that applies, with its threshold.
    pub sources: Vec<(Statement, Threshold)>,
    /// The source with the smallest value at `n`; the first one on ties.
    pub chosen: (Statement, Threshold),
}

impl IndexResult {
    pub fn value(&self) -> Rational {
        self.chosen.1.at(self.n)
    }
}

fn half() -> Rational {
    Rational::new(1, 2)
}

fn reciprocals(exponents: &ExponentPair) -> (Rational, Rational, Rational) {
    let r1 = exponents.p1().reciprocal();
    let r2 = exponents.p2().reciprocal();
    (r1, r2, r1 + r2)
}

/// Region of a pair. On shared boundaries the first of `I_a`, `I_b`,
/// `II_a`, `II_b` whose closed conditions hold wins.
pub fn classify(exponents: &ExponentPair) -> RegionLabel {
    let (r1, r2, r) = reciprocals(exponents);
    let one = Rational::one();
    let h = half();
    // p_i in [1, 2] iff 1/p_i in [1/2, 1]; p_i >= 2 iff 1/p_i <= 1/2
    let low1 = r1 >= h;
    let low2 = r2 >= h;
    let below_one = r > one;
    if low1 && r2 <= h && below_one {
        RegionLabel::IA
    } else if low2 && r1 <= h && below_one {
        RegionLabel::IB
    } else if low1 && low2 && r1 >= r2 {
        RegionLabel::IIA
    } else if low1 && low2 {
        RegionLabel::IIB
    } else {
        RegionLabel::BanachFallback
    }
}

/// [`classify`] for raw exponents; `p1` or `p2` below 1 is a domain error.
pub fn classify_exponents(p1: Exponent, p2: Exponent) -> Result<RegionLabel> {
    Ok(classify(&admissible_pair(p1, p2)?))
}

/// The pair `(p1, p2)`; either exponent below 1 is a domain error.
pub fn admissible_pair(p1: Exponent, p2: Exponent) -> Result<ExponentPair> {
    ExponentPair::new(p1, p2).map_err(|_| Error::Domain(format!("exponents must be >= 1, got ({p1}, {p2})")))
}

/// Every applicable threshold for `(p1, p2)` in dimension `n` and their
/// minimum. Statements restricted to `n >= 2` are omitted for `n = 1`.
pub fn smoothness_index(exponents: &ExponentPair, n: usize) -> Result<IndexResult> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    let (r1, r2, r) = reciprocals(exponents);
    let one = Rational::one();
    let zero = Rational::zero();
    let h = half();
    let in_low = |x: Rational| x >= h && x <= one;
    let mut sources = Vec::new();
    if n >= 2 {
        if in_low(r1) && r2 <= h && r > one {
            sources.push((Statement::RegionIA, Threshold::new(r1 - h, zero)));
        }
        if in_low(r2) && r1 <= h && r > one {
            sources.push((Statement::RegionIB, Threshold::new(r2 - h, zero)));
        }
        if in_low(r1) && in_low(r2) && r1 >= r2 {
            sources.push((Statement::RegionIIA, Threshold::new(r - one, h - r2)));
        }
        if in_low(r1) && in_low(r2) && r2 >= r1 {
            sources.push((Statement::RegionIIB, Threshold::new(r - one, h - r1)));
        }
        if in_low(r1) && in_low(r2) {
            sources.push((Statement::Dyadic, Threshold::new(r - one, zero)));
        }
        // derived from the dyadic estimate, so it shares the n >= 2 hypothesis
        if (r1 == one && r2 == zero) || (r1 == zero && r2 == one) {
            sources.push((Statement::EndpointL1Linf, Threshold::new(h, zero)));
        }
    }
    sources.push((Statement::Basic, Threshold::new(one, -h)));
    let mut chosen = sources[0];
    for s in &sources[1..] {
        if s.1.at(n) < chosen.1.at(n) {
            chosen = *s;
        }
    }
    Ok(IndexResult {
        n,
        label: classify(exponents),
        sources,
        chosen,
    })
}

/// Query line `"<label>, threshold <c_n*n + c_0> = <value>"`.
pub fn describe(exponents: &ExponentPair, n: usize) -> Result<String> {
    let res = smoothness_index(exponents, n)?;
    Ok(format!("{}, threshold {} = {}", res.label, res.chosen.1, res.value()))
}

fn exponent_of(r: Rational) -> Exponent {
    Exponent::from_reciprocal(r).expect("grid nodes lie in [0, 1]")
}

/// Writes the region CSV and SVG for dimension `n` on the
/// `(resolution + 1)^2` nodes `(i, k) / resolution` of the square.
pub fn region_grid_export(n: usize, resolution: usize, csv_path: &Path, svg_path: &Path) -> Result<()> {
    if resolution < 16 {
        return Err(Error::invalid(
            "resolution",
            format!("must be at least 16, got {resolution}"),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be at least 1"));
    }
    let res = resolution as i64;
    let io = |e| Error::io(csv_path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(csv_path).map_err(io)?);
    writeln!(w, "inv_p1,inv_p2,region,threshold,threshold_exact").map_err(io)?;
    for i in 0..=res {
        for k in 0..=res {
            let (r1, r2) = (Rational::new(i, res), Rational::new(k, res));
            let pair = ExponentPair::new(exponent_of(r1), exponent_of(r2))?;
            let idx = smoothness_index(&pair, n)?;
            let v = idx.value();
            writeln!(
                w,
                "{},{},{},{},{}",
                r1,
                r2,
                idx.label,
                *v.numer() as f64 / *v.denom() as f64,
                idx.chosen.1
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    write_svg(resolution, svg_path)
}

fn color(label: RegionLabel) -> &'static str {
    match label {
        RegionLabel::IA => "#4e79a7",
        RegionLabel::IB => "#a0cbe8",
        RegionLabel::IIA => "#f28e2b",
        RegionLabel::IIB => "#ffbe7d",
        RegionLabel::BanachFallback => "#bab0ac",
        RegionLabel::Basic => "#ffffff",
    }
}

const SVG_SIZE: f64 = 800.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_TOP: f64 = 40.0;
const PLOT_SIZE: f64 = 600.0;

fn write_svg(resolution: usize, path: &Path) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    let px = |x: f64| PLOT_LEFT + x * PLOT_SIZE;
    let py = |y: f64| PLOT_TOP + (1.0 - y) * PLOT_SIZE;
    writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#
    )
    .map_err(io)?;
    writeln!(w, "<!-- brmeans {} -->", env!("CARGO_PKG_VERSION")).map_err(io)?;
    writeln!(w, r#"<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>"#).map_err(io)?;
    // cells colored by the label at their centers
    let res = resolution as i64;
    let cell = PLOT_SIZE / resolution as f64;
    writeln!(w, r#"<g id="regions" shape-rendering="crispEdges">"#).map_err(io)?;
    for i in 0..res {
        for k in 0..res {
            let r1 = Rational::new(2 * i + 1, 2 * res);
            let r2 = Rational::new(2 * k + 1, 2 * res);
            let label = classify(&ExponentPair::new(exponent_of(r1), exponent_of(r2))?);
            writeln!(
                w,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                px(i as f64 / res as f64),
                py((k + 1) as f64 / res as f64),
                cell,
                cell,
                color(label)
            )
            .map_err(io)?;
        }
    }
    writeln!(w, "</g>").map_err(io)?;
    let boundaries = [
        ("inv_p1_half", (0.5, 0.0), (0.5, 1.0)),
        ("inv_p2_half", (0.0, 0.5), (1.0, 0.5)),
        ("target_p_one", (0.0, 1.0), (1.0, 0.0)),
        ("diagonal", (0.0, 0.0), (1.0, 1.0)),
    ];
    writeln!(w, r#"<g id="boundaries" stroke="black" stroke-width="2">"#).map_err(io)?;
    for (id, a, b) in boundaries {
        writeln!(
            w,
            r#"<line class="boundary" id="{id}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            px(a.0),
            py(a.1),
            px(b.0),
            py(b.1)
        )
        .map_err(io)?;
    }
    writeln!(w, "</g>").map_err(io)?;
    writeln!(
        w,
        r#"<rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{PLOT_SIZE}" height="{PLOT_SIZE}" fill="none" stroke="black"/>"#
    )
    .map_err(io)?;
    writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="16">1/p1</text>"#,
        PLOT_LEFT + 0.5 * PLOT_SIZE,
        PLOT_TOP + PLOT_SIZE + 30.0
    )
    .map_err(io)?;
    writeln!(
        w,
        r#"<text x="30" y="{}" text-anchor="middle" font-family="sans-serif" font-size="16" transform="rotate(-90 30 {})">1/p2</text>"#,
        PLOT_TOP + 0.5 * PLOT_SIZE,
        PLOT_TOP + 0.5 * PLOT_SIZE
    )
    .map_err(io)?;
    for (t, label) in [(0.0, "0"), (0.5, "1/2"), (1.0, "1")] {
        writeln!(
            w,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-family="sans-serif" font-size="12">{label}</text>"#,
            px(t),
            PLOT_TOP + PLOT_SIZE + 15.0
        )
        .map_err(io)?;
        writeln!(
            w,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end" font-family="sans-serif" font-size="12">{label}</text>"#,
            PLOT_LEFT - 6.0,
            py(t) + 4.0
        )
        .map_err(io)?;
    }
    writeln!(w, r#"<g id="legend" font-family="sans-serif" font-size="14">"#).map_err(io)?;
    let legend = [
        RegionLabel::IA,
        RegionLabel::IB,
        RegionLabel::IIA,
        RegionLabel::IIB,
        RegionLabel::BanachFallback,
    ];
    for (k, label) in legend.into_iter().enumerate() {
        let x = 700.0;
        let y = PLOT_TOP + 20.0 + 28.0 * k as f64;
        writeln!(
            w,
            r#"<rect x="{x}" y="{y}" width="18" height="18" fill="{}" stroke="black"/><text x="{}" y="{}">{label}</text>"#,
            color(label),
            x + 24.0,
            y + 14.0
        )
        .map_err(io)?;
    }
    writeln!(w, "</g>\n</svg>").map_err(io)?;
    w.flush().map_err(io)
}
