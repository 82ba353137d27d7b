use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::{Error, Result};

/// Boundary operator in the Fourier basis e^{inθ}, |n| ≤ n_max, on each
/// boundary circle (outer first). Entry (c', m; c, n) is the m-th
/// coefficient on circle c' of the image of e^{inθ} placed on circle c.
#[derive(Clone, Debug, PartialEq)]
pub struct DtnMatrix {
    pub circles: usize,
    pub n_max: usize,
    data: Vec<Complex64>,
}

impl DtnMatrix {
    pub fn zeros(circles: usize, n_max: usize) -> Self {
        let k = circles * (2 * n_max + 1);
        Self { circles, n_max, data: vec![Complex64::new(0.0, 0.0); k * k] }
    }

    pub fn dim(&self) -> usize {
        self.circles * (2 * self.n_max + 1)
    }

    /// Flat index of (circle, mode).
    pub fn index(&self, c: usize, m: i64) -> usize {
        c * (2 * self.n_max + 1) + (m + self.n_max as i64) as usize
    }

    /// (circle, mode) of a flat index.
    pub fn label(&self, i: usize) -> (usize, i64) {
        let w = 2 * self.n_max + 1;
        (i / w, (i % w) as i64 - self.n_max as i64)
    }

    pub fn get(&self, cm: usize, m: i64, cn: usize, n: i64) -> Complex64 {
        self.data[self.index(cm, m) * self.dim() + self.index(cn, n)]
    }

    pub fn set(&mut self, cm: usize, m: i64, cn: usize, n: i64, v: Complex64) {
        let (i, j, d) = (self.index(cm, m), self.index(cn, n), self.dim());
        self.data[i * d + j] = v;
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let d = self.dim();
        &mut self.data[i * d + j]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.circles == other.circles && self.n_max == other.n_max
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::DataMismatch("DtN matrices of different shapes".into()));
        }
        Ok(Self {
            circles: self.circles,
            n_max: self.n_max,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    /// Leading block with modes |n| ≤ n_max.
    pub fn truncate(&self, n_max: usize) -> Self {
        let mut out = Self::zeros(self.circles, n_max);
        let n = n_max as i64;
        for cm in 0..self.circles {
            for m in -n..=n {
                for cn in 0..self.circles {
                    for k in -n..=n {
                        out.set(cm, m, cn, k, self.get(cm, m, cn, k));
                    }
                }
            }
        }
        out
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "DTN v1 {} {}", self.n_max, self.circles)?;
        writeln!(out, "circle_m,m,circle_n,n,re,im")?;
        let d = self.dim();
        for i in 0..d {
            let (cm, m) = self.label(i);
            for j in 0..d {
                let (cn, n) = self.label(j);
                let v = self.at(i, j);
                writeln!(out, "{cm},{m},{cn},{n},{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        Ok(())
    }

    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let head = lines.next().ok_or_else(|| Error::Parse("empty DtN file".into()))??;
        let h: Vec<&str> = head.split_whitespace().collect();
        if h.len() != 4 || h[0] != "DTN" || h[1] != "v1" {
            return Err(Error::Parse(format!("unrecognized DtN header `{head}`")));
        }
        let n_max: usize = h[2].parse().map_err(|_| Error::Parse("bad N".into()))?;
        let circles: usize = h[3].parse().map_err(|_| Error::Parse("bad circle count".into()))?;
        let mut out = Self::zeros(circles, n_max);
        let mut seen = 0usize;
        for line in lines {
            let line = line?;
            if line.starts_with("circle_m") || line.trim().is_empty() {
                continue;
            }
            let p: Vec<&str> = line.split(',').collect();
            if p.len() != 6 {
                return Err(Error::Parse(format!("bad DtN row `{line}`")));
            }
            let pi = |s: &str| s.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad integer `{s}`")));
            let pf = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")));
            let (cm, m, cn, n) = (pi(p[0])?, pi(p[1])?, pi(p[2])?, pi(p[3])?);
            let lim = n_max as i64;
            if cm < 0 || cn < 0 || cm as usize >= circles || cn as usize >= circles || m.abs() > lim || n.abs() > lim {
                return Err(Error::Parse(format!("DtN index out of range in `{line}`")));
            }
            out.set(cm as usize, m, cn as usize, n, Complex64::new(pf(p[4])?, pf(p[5])?));
            seen += 1;
        }
        if seen != out.dim() * out.dim() {
            return Err(Error::Parse(format!("expected {} DtN entries, found {seen}", out.dim() * out.dim())));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut d = DtnMatrix::zeros(2, 3);
        for i in 0..d.dim() {
            for j in 0..d.dim() {
                *d.at_mut(i, j) = Complex64::new((i * 7 + j) as f64 / 3.0, -(j as f64).sqrt());
            }
        }
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = DtnMatrix::read_csv(&buf[..]).unwrap();
        assert_eq!(d, back);
    }
}
