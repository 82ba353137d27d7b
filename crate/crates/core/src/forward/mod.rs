//! Dirichlet problem for the magnetic Schrödinger operator
//!
//!   L_{X,q} u = Δu - 2i⟨X, du⟩ + (iδX + |X|² + q) u,
//!
//! its magnetic Neumann trace ∂_ν u + i X(ν) u and the Dirichlet-to-Neumann
//! map in a truncated Fourier basis.
//!
//! Discretization: 4th-order radial stencils, spectral in θ. The linear
//! system is solved by GMRES preconditioned with the constant-coefficient
//! operator Δ + c̄, which decouples into banded radial systems per mode.

mod dtn;
pub mod linalg;
pub mod potential;

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use dtn::DtnMatrix;
pub use potential::{Bump, GaugeFn, Potential, PotentialSpec};

use crate::geometry::calculus::theta_derivs;
use crate::geometry::{PolarGrid, ScalarField};
use crate::{Error, Result, I};
use linalg::{gmres, BandedLu};

/// Condition estimate above which a solve is reported as an eigenvalue collision.
pub const COLLISION_THRESHOLD: f64 = 1e12;
/// Accepted relative residual of the discrete system.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Accepted normwise backward error when the relative residual stalls.
pub const BACKWARD_TOL: f64 = 1e-13;

struct ModalPreconditioner {
    lus: Vec<BandedLu>,
    cond: f64,
    norm: f64,
}

/// Compiled operator L_{X,q} on a grid.
pub struct MagneticSchrodinger {
    grid: Arc<PolarGrid>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c0: Vec<Complex64>,
    interior: Vec<usize>,
    precond: ModalPreconditioner,
}

/// Result of a Dirichlet solve.
#[derive(Clone, Debug)]
pub struct ForwardSolution {
    pub u: ScalarField,
    pub relative_residual: f64,
    /// ‖r‖ / (‖A‖ ‖x‖), with ‖A‖ from the radial blocks.
    pub backward_error: f64,
    pub iterations: usize,
}

fn norm1_estimate_inverse(lu: &BandedLu, n: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut best = 0.0f64;
    for _ in 0..3 {
        let mut x: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let xn: f64 = x.iter().map(|v| v.norm()).sum();
        lu.solve_in_place(&mut x);
        let yn: f64 = x.iter().map(|v| v.norm()).sum();
        best = best.max(yn / xn);
    }
    best
}

impl MagneticSchrodinger {
    pub fn new(pot: &Potential) -> Result<Self> {
        let grid = pot.grid().clone();
        let (a, b, c0) = pot.coefficients();
        let interior: Vec<usize> = (0..grid.n_r()).filter(|j| !grid.is_boundary_ring(*j)).collect();
        let mean = c0.iter().sum::<Complex64>() / c0.len() as f64;
        let precond = Self::build_precond(&grid, &interior, mean);
        Ok(Self { grid, a, b, c0, interior, precond })
    }

    fn build_precond(grid: &PolarGrid, interior: &[usize], shift: Complex64) -> ModalPreconditioner {
        let n = grid.n_theta();
        let mut ring_to_int = vec![usize::MAX; grid.n_r()];
        for (i, j) in interior.iter().enumerate() {
            ring_to_int[*j] = i;
        }
        let ni = interior.len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut lus = Vec::with_capacity(n / 2 + 1);
        let mut cond = 0.0f64;
        let mut norm = 0.0f64;
        for m in 0..=n / 2 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mut e = Vec::new();
            for (i, &j) in interior.iter().enumerate() {
                let r = grid.radii()[j];
                for t in grid.d2_taps(j) {
                    if ring_to_int[t.ring] != usize::MAX {
                        let s = if t.flip { sign } else { 1.0 };
                        e.push((i, ring_to_int[t.ring], Complex64::new(-t.w * s, 0.0)));
                    }
                }
                for t in grid.d1_taps(j) {
                    if ring_to_int[t.ring] != usize::MAX {
                        let s = if t.flip { sign } else { 1.0 };
                        e.push((i, ring_to_int[t.ring], Complex64::new(-t.w * s / r, 0.0)));
                    }
                }
                e.push((i, i, Complex64::new((m * m) as f64 / (r * r), 0.0) + shift));
            }
            let mut col = vec![0.0f64; ni];
            for &(_, c, v) in &e {
                col[c] += v.norm();
            }
            let a1 = col.iter().cloned().fold(0.0, f64::max);
            let lu = BandedLu::factor(ni, &e);
            let inv = norm1_estimate_inverse(&lu, ni, &mut rng);
            cond = cond.max(a1 * inv);
            norm = norm.max(a1);
            lus.push(lu);
        }
        ModalPreconditioner { lus, cond, norm }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    /// Condition estimate of the mode-decoupled part of the operator.
    pub fn condition_estimate(&self) -> f64 {
        self.precond.cond
    }

    /// L u for ring-major data on the whole grid.
    pub fn apply_full(&self, u: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.n_theta();
        let mut ur = vec![Complex64::new(0.0, 0.0); u.len()];
        let mut urr = vec![Complex64::new(0.0, 0.0); u.len()];
        g.apply_radial(g.d1_all(), u, &mut ur);
        g.apply_radial(g.d2_all(), u, &mut urr);
        let (uth, uthth) = theta_derivs(g, u, true);
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        for j in 0..g.n_r() {
            let r = g.radii()[j];
            for k in 0..n {
                let i = j * n + k;
                let e = g.phases()[k];
                let t = I * uth[i] / r;
                let uz = 0.5 * e.conj() * (ur[i] - t);
                let uzb = 0.5 * e * (ur[i] + t);
                let lap = -(urr[i] + ur[i] / r + uthth[i] / (r * r));
                out[i] = lap - 4.0 * I * (self.a[i] * uz + self.b[i] * uzb) + self.c0[i] * u[i];
            }
        }
        out
    }

    pub fn apply(&self, u: &ScalarField) -> ScalarField {
        ScalarField::raw(self.grid.clone(), self.apply_full(u.values()))
    }

    fn apply_precond(&self, v: &mut [Complex64]) {
        let g = &self.grid;
        let n = g.n_theta();
        let ni = self.interior.len();
        g.fft_rings(v);
        let mut col = vec![Complex64::new(0.0, 0.0); ni];
        for k in 0..n {
            let m = g.mode(k).unsigned_abs() as usize;
            for i in 0..ni {
                col[i] = v[i * n + k];
            }
            self.precond.lus[m].solve_in_place(&mut col);
            for i in 0..ni {
                v[i * n + k] = col[i];
            }
        }
        g.ifft_rings(v);
    }

    fn embed(&self, x: &[Complex64], full: &mut [Complex64]) {
        let n = self.grid.n_theta();
        for (i, &j) in self.interior.iter().enumerate() {
            full[j * n..(j + 1) * n].copy_from_slice(&x[i * n..(i + 1) * n]);
        }
    }

    fn extract(&self, full: &[Complex64], x: &mut [Complex64]) {
        let n = self.grid.n_theta();
        for (i, &j) in self.interior.iter().enumerate() {
            x[i * n..(i + 1) * n].copy_from_slice(&full[j * n..(j + 1) * n]);
        }
    }

    /// Solve L u = rhs in M with u = boundary[c] on boundary ring c
    /// (ordered as `grid.boundary_rings()`).
    pub fn solve(&self, boundary: &[Vec<Complex64>], rhs: Option<&ScalarField>) -> Result<ForwardSolution> {
        let g = &self.grid;
        let n = g.n_theta();
        let rings = g.boundary_rings();
        if boundary.len() != rings.len() || boundary.iter().any(|b| b.len() != n) {
            return Err(Error::DataMismatch("Dirichlet data does not match the boundary rings".into()));
        }
        if self.precond.cond > COLLISION_THRESHOLD {
            return Err(Error::EigenvalueCollision(self.precond.cond));
        }
        let mut lift = vec![Complex64::new(0.0, 0.0); g.len()];
        for (ring, vals) in rings.iter().zip(boundary) {
            lift[ring * n..(ring + 1) * n].copy_from_slice(vals);
        }
        let l_lift = self.apply_full(&lift);
        let ni = self.interior.len() * n;
        let mut b = vec![Complex64::new(0.0, 0.0); ni];
        self.extract(&l_lift, &mut b);
        for v in b.iter_mut() {
            *v = -*v;
        }
        if let Some(f) = rhs {
            let mut fi = vec![Complex64::new(0.0, 0.0); ni];
            self.extract(f.values(), &mut fi);
            for (bi, fv) in b.iter_mut().zip(&fi) {
                *bi += fv;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); ni];
        let mut full = vec![Complex64::new(0.0, 0.0); g.len()];
        let mut apply = |v: &[Complex64], out: &mut [Complex64]| {
            full.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            self.embed(v, &mut full);
            let lv = self.apply_full(&full);
            self.extract(&lv, out);
        };
        let mut pre = |v: &mut [Complex64]| self.apply_precond(v);
        let stats = gmres(&mut apply, &mut pre, &b, &mut x, 1e-12, 60, 1200);
        let bn = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let xn = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let backward = if xn > 0.0 { stats.relative_residual * bn / (self.precond.norm * xn) } else { 0.0 };
        // Near a Dirichlet eigenvalue the relative residual floors at
        // roughly eps·cond; a backward error at rounding level is accepted.
        if !(stats.relative_residual <= RESIDUAL_TOL || backward <= BACKWARD_TOL) {
            return Err(Error::NotConverged { residual: stats.relative_residual, iterations: stats.iterations });
        }
        let mut u = lift;
        self.embed(&x, &mut u);
        Ok(ForwardSolution {
            u: ScalarField::raw(g.clone(), u),
            relative_residual: stats.relative_residual,
            backward_error: backward,
            iterations: stats.iterations,
        })
    }

    /// ∂_ν u + i X(ν) u on every boundary ring, ν the outward unit normal.
    pub fn neumann_trace(&self, u: &ScalarField) -> Vec<Vec<Complex64>> {
        let g = &self.grid;
        let n = g.n_theta();
        let half = n / 2;
        g.boundary_rings()
            .into_iter()
            .map(|j| {
                let sign = if g.domain().is_annulus() && j == 0 { -1.0 } else { 1.0 };
                (0..n)
                    .map(|k| {
                        let mut ur = Complex64::new(0.0, 0.0);
                        for t in g.d1_taps(j) {
                            let kk = if t.flip { (k + half) % n } else { k };
                            ur += u.values()[t.ring * n + kk] * t.w;
                        }
                        let i = j * n + k;
                        let e = g.phases()[k];
                        let x_r = self.b[i] * e + self.a[i] * e.conj();
                        sign * (ur + I * x_r * u.values()[i])
                    })
                    .collect()
            })
            .collect()
    }

    /// DtN map on modes |n| ≤ n_max of every boundary circle.
    pub fn dtn(&self, n_max: usize) -> Result<DtnMatrix> {
        let g = &self.grid;
        let n = g.n_theta();
        if 2 * n_max + 1 > n {
            return Err(Error::DataMismatch(format!("{n_max} modes exceed the angular resolution")));
        }
        let circles = g.boundary_rings().len();
        let mut out = DtnMatrix::zeros(circles, n_max);
        for c in 0..circles {
            for m in -(n_max as i64)..=n_max as i64 {
                let mut data = vec![vec![Complex64::new(0.0, 0.0); n]; circles];
                for (k, th) in g.thetas().iter().enumerate() {
                    data[c][k] = Complex64::from_polar(1.0, m as f64 * th);
                }
                let sol = self.solve(&data, None)?;
                let gtr = self.neumann_trace(&sol.u);
                for (c2, ring) in gtr.iter().enumerate() {
                    let coef = fourier_coefficients(g, ring, n_max);
                    for (idx, v) in coef.iter().enumerate() {
                        out.set(c2, idx as i64 - n_max as i64, c, m, *v);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// f̂_m = (1/n_θ) Σ f(θ_k) e^{-imθ_k} for |m| ≤ n_max, ordered from -n_max.
pub fn fourier_coefficients(g: &PolarGrid, ring: &[Complex64], n_max: usize) -> Vec<Complex64> {
    let mut hat = ring.to_vec();
    g.fft_rings(&mut hat);
    let s = 1.0 / g.n_theta() as f64;
    (-(n_max as i64)..=n_max as i64).map(|m| hat[g.slot(m)] * s).collect()
}

/// Dirichlet solve with an eigenvalue-collision fallback: on collision q is
/// shifted by +1e-6 i and the solve repeated. The flag reports the shift.
pub fn solve_dirichlet(pot: &Potential, boundary: &[Vec<Complex64>]) -> Result<(ForwardSolution, bool)> {
    match MagneticSchrodinger::new(pot)?.solve(boundary, None) {
        Err(Error::EigenvalueCollision(_)) => {
            let q = pot.q.map(|v| v + Complex64::new(0.0, 1e-6));
            let shifted = Potential::new(pot.x.clone(), q)?;
            Ok((MagneticSchrodinger::new(&shifted)?.solve(boundary, None)?, true))
        }
        other => other.map(|s| (s, false)),
    }
}

/// DtN matrix of a potential, with the same collision fallback.
pub fn dtn_matrix(pot: &Potential, n_max: usize) -> Result<DtnMatrix> {
    match MagneticSchrodinger::new(pot)?.dtn(n_max) {
        Err(Error::EigenvalueCollision(_)) => {
            let q = pot.q.map(|v| v + Complex64::new(0.0, 1e-6));
            MagneticSchrodinger::new(&Potential::new(pot.x.clone(), q)?)?.dtn(n_max)
        }
        other => other,
    }
}
