use std::f64::consts::PI;

use num_complex::Complex64;

use super::field::OneForm;
use super::grid::Domain;
use super::interp::interpolate;
use crate::{Error, Result};

/// Closed curve; the first sample is repeated at the end. Parametrized
/// curves also carry dγ/dt at uniformly spaced t ∈ [0, 2π), which upgrades
/// the quadrature to the periodic trapezoid rule.
#[derive(Clone, Debug)]
pub struct Loop {
    samples: Vec<Complex64>,
    tangents: Option<Vec<Complex64>>,
}

impl Loop {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::DataMismatch("a loop needs at least 4 samples".into()));
        }
        let gap = (samples[0] - samples[samples.len() - 1]).norm();
        let scale = samples.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);
        if gap > 1e-12 * scale {
            return Err(Error::LoopNotClosed { gap });
        }
        Ok(Self { samples, tangents: None })
    }

    /// Closes an open polyline by repeating its first point.
    pub fn closed_polyline(mut pts: Vec<Complex64>) -> Result<Self> {
        if let Some(&p) = pts.first() {
            pts.push(p);
        }
        Self::new(pts)
    }

    pub fn circle(center: Complex64, radius: f64, n: usize) -> Self {
        Self::ellipse(center, radius, radius, 0.0, n)
    }

    /// Counter-clockwise ellipse with semi-axes a, b rotated by `tilt`.
    pub fn ellipse(center: Complex64, a: f64, b: f64, tilt: f64, n: usize) -> Self {
        let rot = Complex64::from_polar(1.0, tilt);
        let ts = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64);
        let mut s: Vec<Complex64> = ts.clone().map(|t| center + rot * Complex64::new(a * t.cos(), b * t.sin())).collect();
        s.push(s[0]);
        let d = ts.map(|t| rot * Complex64::new(-a * t.sin(), b * t.cos())).collect();
        Self { samples: s, tangents: Some(d) }
    }

    /// Traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut s = self.samples.clone();
        s.reverse();
        // γ(-t): sample k of the reversed loop is γ(t_{n-k}).
        let tangents = self.tangents.as_ref().map(|d| {
            let n = d.len();
            (0..n).map(|k| -d[(n - k) % n]).collect()
        });
        Self { samples: s, tangents }
    }

    /// Same points, forgetting the parametrization.
    pub fn as_polyline(&self) -> Self {
        Self { samples: self.samples.clone(), tangents: None }
    }

    pub fn is_parametrized(&self) -> bool {
        self.tangents.is_some()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn length(&self) -> f64 {
        match &self.tangents {
            Some(d) => d.iter().map(|t| t.norm()).sum::<f64>() * 2.0 * PI / d.len() as f64,
            None => self.samples.windows(2).map(|w| (w[1] - w[0]).norm()).sum(),
        }
    }

    pub fn check_inside(&self, domain: &Domain) -> Result<()> {
        for (i, z) in self.samples.iter().enumerate() {
            if !domain.contains(*z, 1e-12) {
                return Err(Error::LoopOutsideDomain { index: i, re: z.re, im: z.im });
            }
        }
        Ok(())
    }
}

/// ∮_γ ω with bicubic interpolation of the coefficients: periodic
/// trapezoid rule on parametrized loops, chord trapezoid on polylines.
pub fn loop_quadrature(w: &OneForm, gamma: &Loop) -> Result<Complex64> {
    let g = w.grid();
    gamma.check_inside(&g.domain())?;
    let vals: Vec<(Complex64, Complex64)> = gamma
        .samples()
        .iter()
        .map(|z| (interpolate(g, &w.c10, *z), interpolate(g, &w.c01, *z)))
        .collect();
    let s = gamma.samples();
    let mut acc = Complex64::new(0.0, 0.0);
    if let Some(d) = &gamma.tangents {
        let dt = 2.0 * PI / d.len() as f64;
        for (k, t) in d.iter().enumerate() {
            acc += (vals[k].0 * t + vals[k].1 * t.conj()) * dt;
        }
        return Ok(acc);
    }
    for i in 0..s.len() - 1 {
        let dz = s[i + 1] - s[i];
        acc += 0.5 * ((vals[i].0 + vals[i + 1].0) * dz + (vals[i].1 + vals[i + 1].1) * dz.conj());
    }
    Ok(acc)
}
