//! Direct evaluation of the Cauchy transform as a sum over grid cells.
//!
//! Each node owns a polar cell. The cell containing the target is handled
//! by an exact ray integral of the kernel plus a bounded remainder, the
//! eight neighbouring cells by 4×4 Gauss with bicubic interpolation of f,
//! and all other cells by the midpoint rule. Kernels are tabulated once
//! per target ring and rotated to the other targets on that ring.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::geometry::interp::radial_weights;
use crate::geometry::stencil::{gauss_on, lagrange};
use crate::geometry::{PolarGrid, ScalarField};

struct GaussTap {
    kernel: Complex64,
    taps: Vec<(usize, i64, f64)>,
}

struct RingTable {
    far: Vec<Complex64>,
    near: Vec<GaussTap>,
    singular: Complex64,
}

/// Precomputed direct-sum weights for a grid.
pub struct CauchyKernelTable {
    grid: Arc<PolarGrid>,
    rings: Vec<RingTable>,
}

fn cell(grid: &PolarGrid, j: usize) -> (f64, f64) {
    let r = grid.radii()[j];
    let h = 0.5 * grid.dr();
    let (lo, hi) = (grid.domain().r_inner(), grid.domain().r_outer());
    ((r - h).max(lo).max(0.0), (r + h).min(hi))
}

// Distance from x0 (on the positive real axis) along direction e to the
// boundary of the polar cell [ra, rb] × [-h, h].
fn exit_distance(x0: f64, e: Complex64, ra: f64, rb: f64, h: f64) -> f64 {
    let p = x0 * e.re;
    let mut best = f64::INFINITY;
    let disc = p * p + rb * rb - x0 * x0;
    best = best.min((-p + disc.max(0.0).sqrt()).max(0.0));
    if ra > 0.0 {
        let disc = p * p - (x0 * x0 - ra * ra);
        if disc >= 0.0 {
            let s = -p - disc.sqrt();
            if s >= -1e-15 {
                best = best.min(s.max(0.0));
            }
        }
    }
    for beta in [-h, h] {
        let u = Complex64::from_polar(1.0, beta);
        let den = (u.conj() * e).im;
        if den.abs() < 1e-300 {
            continue;
        }
        let s = -(u.conj() * x0).im / den;
        if s >= 0.0 {
            let t = (u.conj() * (x0 + e * s)).re;
            let slack = 1e-12 * rb;
            if t >= ra - slack && t <= rb + slack {
                best = best.min(s);
            }
        }
    }
    best
}

/// ∫_cell dA / (x0 - ζ) for the cell [ra, rb] × [-h, h] containing x0.
pub(crate) fn singular_cell_integral(x0: f64, ra: f64, rb: f64, h: f64) -> Complex64 {
    let mut cuts = vec![-PI, -0.5 * PI, 0.5 * PI, PI];
    for &rho in &[ra, rb] {
        for &b in &[-h, h] {
            let d = Complex64::from_polar(rho, b) - x0;
            if d.norm() > 1e-14 * rb {
                cuts.push(d.arg());
            }
        }
    }
    if ra > 0.0 && x0 > ra {
        let a = (ra / x0).asin();
        cuts.push(PI - a);
        cuts.push(-PI + a);
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        if w[1] - w[0] < 1e-15 {
            continue;
        }
        for (phi, wt) in gauss_on(w[0], w[1], 24) {
            let e = Complex64::from_polar(1.0, phi);
            acc -= e.conj() * exit_distance(x0, e, ra, rb, h) * wt;
        }
    }
    acc
}

fn bicubic_taps(grid: &PolarGrid, z: Complex64) -> Vec<(usize, i64, f64)> {
    let n = grid.n_theta();
    let mut th = z.arg();
    if th < 0.0 {
        th += 2.0 * PI;
    }
    let t = th / grid.dtheta();
    let k0 = t.floor();
    let lt = lagrange(&[-1.0, 0.0, 1.0, 2.0], t - k0);
    let (ivi, lr) = radial_weights(grid, z.norm());
    let iv = &grid.intervals()[ivi];
    let mut out = Vec::with_capacity(16);
    for s in 0..4 {
        let shift = if iv.flip[s] { (n / 2) as i64 } else { 0 };
        for (a, w) in lt.iter().enumerate() {
            out.push((iv.rings[s], k0 as i64 - 1 + a as i64 + shift, lr[s] * w));
        }
    }
    out
}

impl CauchyKernelTable {
    pub fn new(grid: &Arc<PolarGrid>) -> Self {
        let n = grid.n_theta();
        let nr = grid.n_r();
        let h = 0.5 * grid.dtheta();
        let mut rings = Vec::with_capacity(nr);
        for jc in 0..nr {
            let x0 = grid.radii()[jc];
            let mut far = vec![Complex64::new(0.0, 0.0); nr * n];
            let mut near = Vec::new();
            for j in 0..nr {
                let (ra, rb) = cell(grid, j);
                let area = 0.5 * (rb * rb - ra * ra) * grid.dtheta();
                for dk in 0..n {
                    let sdk = if dk > n / 2 { dk as i64 - n as i64 } else { dk as i64 };
                    let is_near = (j as i64 - jc as i64).abs() <= 1 && sdk.abs() <= 1;
                    let zeta = Complex64::from_polar(grid.radii()[j], sdk as f64 * grid.dtheta());
                    if !is_near {
                        far[j * n + dk] = area / (PI * (x0 - zeta));
                        continue;
                    }
                    let self_cell = j == jc && sdk == 0;
                    for (rho, wr) in gauss_on(ra, rb, 4) {
                        let phi0 = sdk as f64 * grid.dtheta();
                        for (phi, wp) in gauss_on(phi0 - h, phi0 + h, 4) {
                            let zeta = Complex64::from_polar(rho, phi);
                            let kernel = wr * wp * rho / (PI * (x0 - zeta));
                            let mut taps = bicubic_taps(grid, zeta);
                            if self_cell {
                                taps.push((jc, 0, -1.0));
                            }
                            near.push(GaussTap { kernel, taps });
                        }
                    }
                }
            }
            let (ra, rb) = cell(grid, jc);
            let singular = singular_cell_integral(x0, ra, rb, h) / PI;
            rings.push(RingTable { far, near, singular });
        }
        Self { grid: grid.clone(), rings }
    }

    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        let g = &self.grid;
        let n = g.n_theta();
        let nr = g.n_r();
        let v = f.values();
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        for jc in 0..nr {
            let tab = &self.rings[jc];
            for i in 0..n {
                let mut acc = tab.singular * v[jc * n + i];
                for j in 0..nr {
                    let row = &tab.far[j * n..(j + 1) * n];
                    let src = &v[j * n..(j + 1) * n];
                    for dk in 0..n {
                        let k = (i + dk) % n;
                        acc += row[dk] * src[k];
                    }
                }
                for gt in &tab.near {
                    let mut val = Complex64::new(0.0, 0.0);
                    for &(ring, koff, w) in &gt.taps {
                        let k = (koff + i as i64).rem_euclid(n as i64) as usize;
                        val += v[ring * n + k] * w;
                    }
                    acc += gt.kernel * val;
                }
                out[jc * n + i] = acc * g.phases()[i].conj();
            }
        }
        ScalarField::raw(g.clone(), out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent check of the singular cell integral: polar coordinates
    // around the cell's own origin with a fine tensor rule, skipping the
    // point itself (integrable 1/|x| singularity, slow but unbiased).
    #[test]
    fn singular_cell_matches_brute_force() {
        let (x0, ra, rb, h) = (0.55, 0.5, 0.6, 0.08);
        let s = singular_cell_integral(x0, ra, rb, h);
        let mut brute = Complex64::new(0.0, 0.0);
        let m = 1200;
        for a in 0..m {
            let rho = ra + (a as f64 + 0.5) * (rb - ra) / m as f64;
            for b in 0..m {
                let phi = -h + (b as f64 + 0.5) * 2.0 * h / m as f64;
                let z = Complex64::from_polar(rho, phi);
                brute += rho / (x0 - z) * ((rb - ra) / m as f64) * (2.0 * h / m as f64);
            }
        }
        assert!((s - brute).norm() < 2e-3 * s.norm().max(0.05), "{s} {brute}");
        // Symmetry about the real axis makes the integral real.
        assert!(s.im.abs() < 1e-12);
    }

    #[test]
    fn exit_distance_hits_outer_arc_for_boundary_target() {
        let d = exit_distance(1.0, Complex64::new(1.0, 0.0), 0.9, 1.0, 0.1);
        assert!(d.abs() < 1e-14);
        let d = exit_distance(1.0, Complex64::new(-1.0, 0.0), 0.9, 1.0, 0.1);
        assert!((d - 0.1).abs() < 1e-14);
    }
}
