//! Field import and export.
//!
//! CSV: a header line, then one row per sample `i0[,i1],re,im` in storage
//! order. Binary: little-endian `u32 n`, `u32 N`, then `N^n` pairs of `f64`
//! `(re, im)`. Neither format stores `L`; readers take it as an argument.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Grid, SampledField};
use crate::error::{Error, Result};

pub fn write_csv(field: &SampledField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let grid = field.grid();
    let io = |e| Error::io(path, e);
    if grid.dim() == 1 {
        writeln!(w, "i0,re,im").map_err(io)?;
    } else {
        writeln!(w, "i0,i1,re,im").map_err(io)?;
    }
    for (flat, v) in field.values().iter().enumerate() {
        let [a, b] = grid.axis_indices(flat);
        if grid.dim() == 1 {
            writeln!(w, "{a},{:?},{:?}", v.re, v.im).map_err(io)?;
        } else {
            writeln!(w, "{a},{b},{:?},{:?}", v.re, v.im).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_csv(path: &Path, side: f64) -> Result<SampledField> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::Format(format!("{}: empty file", path.display()))),
    };
    let dim = match header.trim() {
        "i0,re,im" => 1,
        "i0,i1,re,im" => 2,
        other => return Err(Error::Format(format!("{}: unknown header `{other}`", path.display()))),
    };
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("{}:{}: malformed row `{line}`", path.display(), lineno + 2));
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != dim + 2 {
            return Err(bad());
        }
        let mut idx = [0usize; 2];
        for (slot, col) in idx.iter_mut().zip(&cols[..dim]) {
            *slot = col.parse().map_err(|_| bad())?;
        }
        let re: f64 = cols[dim].parse().map_err(|_| bad())?;
        let im: f64 = cols[dim + 1].parse().map_err(|_| bad())?;
        rows.push((idx, Complex64::new(re, im)));
    }
    let samples = match dim {
        1 => rows.len(),
        _ => (rows.len() as f64).sqrt().round() as usize,
    };
    let grid = Grid::new(dim, samples, side)?;
    if grid.len() != rows.len() {
        return Err(Error::Format(format!(
            "{}: {} rows do not form a square grid",
            path.display(),
            rows.len()
        )));
    }
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut seen = vec![false; grid.len()];
    for (idx, v) in rows {
        if idx.iter().take(dim).any(|&i| i >= samples) {
            return Err(Error::Format(format!("{}: index {idx:?} out of range", path.display())));
        }
        let flat = grid.flat_index(idx);
        if std::mem::replace(&mut seen[flat], true) {
            return Err(Error::Format(format!("{}: duplicate index {idx:?}", path.display())));
        }
        values[flat] = v;
    }
    SampledField::from_values(grid, values)
}

pub fn write_binary(field: &SampledField, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let grid = field.grid();
    w.write_all(&(grid.dim() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(grid.samples() as u32).to_le_bytes()).map_err(io)?;
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes()).map_err(io)?;
        w.write_all(&v.im.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_binary(path: &Path, side: f64) -> Result<SampledField> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 8 {
        return Err(Error::Format(format!("{}: missing 8-byte header", path.display())));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let grid = Grid::new(word(0), word(4), side)?;
    let body = &bytes[8..];
    if body.len() != 16 * grid.len() {
        return Err(Error::Format(format!(
            "{}: expected {} payload bytes, found {}",
            path.display(),
            16 * grid.len(),
            body.len()
        )));
    }
    let values = body
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    SampledField::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(grid: Grid) -> SampledField {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() * 1e-7))
            .collect();
        SampledField::from_values(grid, values).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        for grid in [Grid::new(1, 16, 2.0).unwrap(), Grid::new(2, 8, 3.0).unwrap()] {
            let f = random(grid);
            let path = dir.path().join("f.csv");
            write_csv(&f, &path).unwrap();
            assert_eq!(read_csv(&path, grid.side()).unwrap(), f);
        }
    }

    #[test]
    fn binary_round_trip_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(2, 8, 1.5).unwrap();
        let f = random(grid);
        let path = dir.path().join("f.bin");
        write_binary(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..8], &[2, 0, 0, 0, 8, 0, 0, 0]);
        assert_eq!(bytes.len(), 8 + 16 * 64);
        assert_eq!(read_binary(&path, 1.5).unwrap(), f);
    }

    #[test]
    fn malformed_inputs_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "i0,re,im\n0,1.0\n").unwrap();
        assert!(matches!(read_csv(&path, 1.0), Err(Error::Format(_))));
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, [1u8, 0, 0, 0, 8, 0, 0, 0, 0]).unwrap();
        assert!(matches!(read_binary(&path, 1.0), Err(Error::Format(_))));
        let missing = dir.path().join("missing.csv");
        assert!(matches!(read_csv(&missing, 1.0), Err(Error::Io { .. })));
    }
}
