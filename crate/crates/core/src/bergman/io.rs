//! Plain-text kernel files.
//!
//! ```text
//! squeezelab-kernel 1
//! dim 1
//! degree 12
//! seed 42
//! count 200000
//! shape 13 13
//! dropped -
//! <rows x cols lines of "re im" pairs, row-major, 17 significant digits>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::basis::MonomialBasis;
use super::kernel::KernelEvaluator;
use crate::error::{Error, Result};
use crate::point::C64;

const MAGIC: &str = "squeezelab-kernel";
const VERSION: u32 = 1;

pub fn to_text(ev: &KernelEvaluator) -> String {
    let mut s = String::new();
    let (rows, cols) = ev.coeff.shape();
    let dropped = if ev.dropped.is_empty() {
        "-".to_string()
    } else {
        ev.dropped.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    };
    writeln!(s, "{MAGIC} {VERSION}").unwrap();
    writeln!(s, "dim {}", ev.dim()).unwrap();
    writeln!(s, "degree {}", ev.degree()).unwrap();
    writeln!(s, "seed {}", ev.seed).unwrap();
    writeln!(s, "count {}", ev.count).unwrap();
    writeln!(s, "shape {rows} {cols}").unwrap();
    writeln!(s, "dropped {dropped}").unwrap();
    for r in 0..rows {
        let line: Vec<String> = (0..cols)
            .map(|c| {
                let z = ev.coeff[(r, c)];
                format!("{:.16e} {:.16e}", z.re, z.im)
            })
            .collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    s
}

fn header<'a>(lines: &mut impl Iterator<Item = &'a str>, key: &str) -> Result<&'a str> {
    let line = lines
        .next()
        .ok_or_else(|| Error::KernelFile(format!("missing '{key}' line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::KernelFile(format!("expected '{key}', found '{line}'")))
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::KernelFile(format!("bad {what} '{s}'")))
}

pub fn from_text(text: &str) -> Result<KernelEvaluator> {
    let mut lines = text.lines();
    let version: u32 = num(header(&mut lines, MAGIC)?, "version")?;
    if version != VERSION {
        return Err(Error::KernelFile(format!("unsupported version {version}")));
    }
    let dim: usize = num(header(&mut lines, "dim")?, "dim")?;
    let degree: usize = num(header(&mut lines, "degree")?, "degree")?;
    let seed: u64 = num(header(&mut lines, "seed")?, "seed")?;
    let count: usize = num(header(&mut lines, "count")?, "count")?;
    let shape = header(&mut lines, "shape")?;
    let mut parts = shape.split_whitespace();
    let rows: usize = num(parts.next().unwrap_or(""), "rows")?;
    let cols: usize = num(parts.next().unwrap_or(""), "cols")?;
    let dropped_s = header(&mut lines, "dropped")?;
    let dropped = if dropped_s.trim() == "-" {
        Vec::new()
    } else {
        dropped_s
            .split(',')
            .map(|d| num(d, "dropped index"))
            .collect::<Result<Vec<usize>>>()?
    };
    let basis = MonomialBasis::new(dim, degree);
    if basis.len() != rows || cols + dropped.len() != rows {
        return Err(Error::KernelFile(format!(
            "shape {rows}x{cols} does not fit dim {dim} degree {degree}"
        )));
    }
    let mut coeff = DMatrix::<C64>::zeros(rows, cols);
    for r in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::KernelFile(format!("missing row {r}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| num(t, "coefficient"))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * cols {
            return Err(Error::KernelFile(format!("row {r} has {} numbers", vals.len())));
        }
        for c in 0..cols {
            coeff[(r, c)] = C64::new(vals[2 * c], vals[2 * c + 1]);
        }
    }
    Ok(KernelEvaluator {
        basis,
        coeff,
        dropped,
        seed,
        count,
    })
}

pub fn save(ev: &KernelEvaluator, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(ev))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<KernelEvaluator> {
    from_text(&std::fs::read_to_string(path)?)
}
