//! Magnetic and electric potentials: analytic descriptions that can be
//! sampled on any grid, and the sampled pair used by the solvers.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{codiff, d0, d1, OneForm, PolarGrid, ScalarField, TwoForm};
use crate::{Error, Result};

/// Gaussian bump with a vector amplitude (for X) or complex amplitude (for q).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub width: f64,
    pub amp: [f64; 2],
}

impl Bump {
    fn profile(&self, z: Complex64) -> f64 {
        let d = z - Complex64::new(self.center[0], self.center[1]);
        (-d.norm_sqr() / (self.width * self.width)).exp()
    }
}

/// Gauge function f added to X as df.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaugeFn {
    /// amp (1 - |z|²/R²)², vanishing to second order on |z| = R.
    Quartic { amp: f64, radius: f64 },
    /// ax x + ay y; does not vanish on the boundary.
    Linear { ax: f64, ay: f64 },
    /// amp (1 - |z|²/R_out²)(|z|²/R_in² - 1) sin(xy); zero on both circles of an annulus.
    AnnulusBump { amp: f64, r_inner: f64, r_outer: f64 },
}

impl GaugeFn {
    pub fn value(&self, z: Complex64) -> f64 {
        match *self {
            GaugeFn::Quartic { amp, radius } => amp * (1.0 - z.norm_sqr() / (radius * radius)).powi(2),
            GaugeFn::Linear { ax, ay } => ax * z.re + ay * z.im,
            GaugeFn::AnnulusBump { amp, r_inner, r_outer } => {
                let r2 = z.norm_sqr();
                amp * (1.0 - r2 / (r_outer * r_outer)) * (r2 / (r_inner * r_inner) - 1.0) * (z.re * z.im).sin()
            }
        }
    }

    pub fn gradient(&self, z: Complex64) -> (f64, f64) {
        let (x, y) = (z.re, z.im);
        match *self {
            GaugeFn::Quartic { amp, radius } => {
                let s = 1.0 - z.norm_sqr() / (radius * radius);
                let k = amp * 2.0 * s * (-2.0 / (radius * radius));
                (k * x, k * y)
            }
            GaugeFn::Linear { ax, ay } => (ax, ay),
            GaugeFn::AnnulusBump { amp, r_inner, r_outer } => {
                let r2 = z.norm_sqr();
                let (a, b) = (1.0 - r2 / (r_outer * r_outer), r2 / (r_inner * r_inner) - 1.0);
                let (da, db) = (-2.0 / (r_outer * r_outer), 2.0 / (r_inner * r_inner));
                let s = (x * y).sin();
                let c = (x * y).cos();
                let gx = amp * ((da * x * b + a * db * x) * s + a * b * c * y);
                let gy = amp * ((da * y * b + a * db * y) * s + a * b * c * x);
                (gx, gy)
            }
        }
    }
}

/// Analytic potential pair: X = Σ bumps + rot (-y, x) + uniform + df, q = q0 + Σ bumps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(default)]
    pub x_bumps: Vec<Bump>,
    #[serde(default)]
    pub rot: f64,
    #[serde(default)]
    pub uniform: [f64; 2],
    #[serde(default)]
    pub q0: [f64; 2],
    #[serde(default)]
    pub q_bumps: Vec<Bump>,
    #[serde(default)]
    pub gauge: Option<GaugeFn>,
}

impl PotentialSpec {
    pub fn x_at(&self, z: Complex64) -> (f64, f64) {
        let mut x = self.uniform[0] - self.rot * z.im;
        let mut y = self.uniform[1] + self.rot * z.re;
        for b in &self.x_bumps {
            let p = b.profile(z);
            x += b.amp[0] * p;
            y += b.amp[1] * p;
        }
        if let Some(g) = &self.gauge {
            let (gx, gy) = g.gradient(z);
            x += gx;
            y += gy;
        }
        (x, y)
    }

    pub fn q_at(&self, z: Complex64) -> Complex64 {
        let mut q = Complex64::new(self.q0[0], self.q0[1]);
        for b in &self.q_bumps {
            q += Complex64::new(b.amp[0], b.amp[1]) * b.profile(z);
        }
        q
    }

    /// self + t·other, with the gauge term of `self` kept.
    pub fn blend(&self, other: &Self, t: f64) -> Self {
        let mut out = self.clone();
        out.x_bumps.extend(other.x_bumps.iter().map(|b| Bump { amp: [b.amp[0] * t, b.amp[1] * t], ..*b }));
        out.q_bumps.extend(other.q_bumps.iter().map(|b| Bump { amp: [b.amp[0] * t, b.amp[1] * t], ..*b }));
        out.rot += t * other.rot;
        out.uniform = [self.uniform[0] + t * other.uniform[0], self.uniform[1] + t * other.uniform[1]];
        out.q0 = [self.q0[0] + t * other.q0[0], self.q0[1] + t * other.q0[1]];
        out
    }

    pub fn with_gauge(&self, g: Option<GaugeFn>) -> Self {
        Self { gauge: g, ..self.clone() }
    }

    pub fn sample(&self, grid: &Arc<PolarGrid>) -> Result<Potential> {
        let x = OneForm::from_xy(grid, |z| self.x_at(z));
        let q = ScalarField::from_fn(grid, |z| self.q_at(z));
        Potential::new(x, q)
    }
}

/// Sampled pair (X, q) with X a real 1-form.
#[derive(Clone, Debug)]
pub struct Potential {
    pub x: OneForm,
    pub q: ScalarField,
}

impl Potential {
    pub fn new(x: OneForm, q: ScalarField) -> Result<Self> {
        if !x.grid().same_as(q.grid()) {
            return Err(Error::GridMismatch);
        }
        let defect = x.reality_defect();
        if defect > 1e-12 * x.max_abs().max(1.0) {
            return Err(Error::NotReal(defect));
        }
        Ok(Self { x, q })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        self.x.grid()
    }

    /// Gauge transform X + df.
    pub fn gauge(&self, f: &ScalarField) -> Result<Self> {
        let df = d0(f);
        Potential::new(&self.x + &df, self.q.clone())
    }

    pub fn dx(&self) -> TwoForm {
        d1(&self.x)
    }

    /// Coefficients of L = Δ - 2i⟨X, d·⟩ + (iδX + |X|² + q):
    /// (dz̄ coefficient a, dz coefficient b, zeroth order c₀).
    pub(crate) fn coefficients(&self) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let dx = codiff(&self.x);
        let a = self.x.c01.clone();
        let b = self.x.c10.clone();
        let i = Complex64::new(0.0, 1.0);
        let c0 = (0..a.len()).map(|k| i * dx.values()[k] + 4.0 * a[k] * b[k] + self.q.values()[k]).collect();
        (a, b, c0)
    }

    /// ‖q‖_{W^{1,p}} and ‖X‖_{W^{2,p}} by quadrature.
    pub fn sobolev_norms(&self, p: f64) -> (f64, f64) {
        let lp = |f: &ScalarField| f.integrate_abs_pow(p).max(0.0).powf(1.0 / p);
        let (qz, qzb) = crate::geometry::wirtinger(&self.q);
        let q_norm = lp(&self.q) + lp(&qz) + lp(&qzb);
        let mut x_norm = 0.0;
        for part in [self.x.part01(), self.x.part10()] {
            let (az, azb) = crate::geometry::wirtinger(&part);
            let (azz, azzb) = crate::geometry::wirtinger(&az);
            let (_, azbzb) = crate::geometry::wirtinger(&azb);
            x_norm += lp(&part) + lp(&az) + lp(&azb) + lp(&azz) + lp(&azzb) + lp(&azbzb);
        }
        (q_norm, x_norm)
    }
}
