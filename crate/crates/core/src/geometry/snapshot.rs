//! Plain-text field snapshots.
//!
//! Header `FIELD v1 <kind> <n_r> <n_theta> <r_inner> <r_outer> <center_re> <center_im>`,
//! then one `re im` pair per line with θ as the outer index and r the inner
//! one. One-forms write the dz block followed by the dz̄ block.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;

use super::field::{OneForm, ScalarField, TwoForm};
use super::grid::{Domain, PolarGrid};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub enum Snapshot {
    Scalar(ScalarField),
    OneForm(OneForm),
    TwoForm(TwoForm),
}

impl Snapshot {
    fn grid(&self) -> &Arc<PolarGrid> {
        match self {
            Snapshot::Scalar(f) => f.grid(),
            Snapshot::OneForm(f) => f.grid(),
            Snapshot::TwoForm(f) => f.grid(),
        }
    }
}

fn write_block(out: &mut impl Write, g: &PolarGrid, v: &[Complex64]) -> Result<()> {
    for k in 0..g.n_theta() {
        for j in 0..g.n_r() {
            let z = v[j * g.n_theta() + k];
            writeln!(out, "{:.16e} {:.16e}", z.re, z.im)?;
        }
    }
    Ok(())
}

pub fn write_snapshot(out: &mut impl Write, s: &Snapshot) -> Result<()> {
    let g = s.grid();
    let d = g.domain();
    let kind = match s {
        Snapshot::Scalar(_) => "scalar",
        Snapshot::OneForm(_) => "oneform",
        Snapshot::TwoForm(_) => "twoform",
    };
    let c = d.center();
    writeln!(
        out,
        "FIELD v1 {kind} {} {} {:.16e} {:.16e} {:.16e} {:.16e}",
        g.n_r(),
        g.n_theta(),
        d.r_inner(),
        d.r_outer(),
        c.re,
        c.im
    )?;
    match s {
        Snapshot::Scalar(f) => write_block(out, g, f.values())?,
        Snapshot::OneForm(f) => {
            write_block(out, g, &f.c10)?;
            write_block(out, g, &f.c01)?;
        }
        Snapshot::TwoForm(f) => write_block(out, g, &f.c)?,
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<T> {
    s.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse(format!("bad or missing {what}")))
}

pub fn read_snapshot(input: impl BufRead) -> Result<Snapshot> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty snapshot".into()))??;
    let mut it = header.split_whitespace();
    if it.next() != Some("FIELD") || it.next() != Some("v1") {
        return Err(Error::Parse(format!("unrecognized header `{header}`")));
    }
    let kind = it.next().unwrap_or("").to_string();
    let n_r: usize = parse(it.next(), "n_r")?;
    let n_theta: usize = parse(it.next(), "n_theta")?;
    let r_inner: f64 = parse(it.next(), "r_inner")?;
    let r_outer: f64 = parse(it.next(), "r_outer")?;
    let center = Complex64::new(parse(it.next(), "center_re")?, parse(it.next(), "center_im")?);
    let domain = if r_inner == 0.0 {
        Domain::Disk { center, radius: r_outer }
    } else {
        Domain::Annulus { center, r_inner, r_outer }
    };
    let grid = PolarGrid::new(domain, n_r, n_theta)?;
    let blocks = match kind.as_str() {
        "scalar" | "twoform" => 1,
        "oneform" => 2,
        _ => return Err(Error::Parse(format!("unknown field kind `{kind}`"))),
    };
    let mut data = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; blocks];
    for b in data.iter_mut() {
        for k in 0..n_theta {
            for j in 0..n_r {
                let line = lines.next().ok_or_else(|| Error::Parse("truncated snapshot".into()))??;
                let mut p = line.split_whitespace();
                b[j * n_theta + k] = Complex64::new(parse(p.next(), "re")?, parse(p.next(), "im")?);
            }
        }
    }
    let mut data = data.into_iter();
    Ok(match kind.as_str() {
        "scalar" => Snapshot::Scalar(ScalarField::new(grid, data.next().unwrap())?),
        "twoform" => Snapshot::TwoForm(TwoForm::new(grid, data.next().unwrap())?),
        _ => {
            let c10 = data.next().unwrap();
            Snapshot::OneForm(OneForm::new(grid, c10, data.next().unwrap())?)
        }
    })
}
