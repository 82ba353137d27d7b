//! Cauchy transform by Fourier modes. For f = Σ f_k(ρ) e^{ikθ} the transform
//! Tf(z) = (1/π) ∫ f(ζ) / (z - ζ) dA(ζ) has modes
//!
//!   u_m(r) =  2 ∫_{r_in}^{r} f_{m+1}(ρ) (ρ/r)^{|m|} dρ   (m ≤ -1)
//!   u_m(r) = -2 ∫_{r}^{R}    f_{m+1}(ρ) (r/ρ)^{m}   dρ   (m ≥ 0)
//!
//! Both are swept ring to ring with ratios below one, so the recurrences
//! are stable for every mode. Each interval uses Gauss points and the
//! cubic interpolant of f_{m+1}.

use num_complex::Complex64;

use crate::geometry::stencil::{gauss_on, lagrange};
use crate::geometry::{PolarGrid, ScalarField};

const GAUSS_POINTS: usize = 8;

struct Node {
    rho: f64,
    w: f64,
    l: [f64; 4],
}

fn nodes(a: f64, b: f64, xs: &[f64; 4]) -> Vec<Node> {
    gauss_on(a, b, GAUSS_POINTS)
        .into_iter()
        .map(|(rho, w)| {
            let l = lagrange(xs, rho);
            Node { rho, w, l: [l[0], l[1], l[2], l[3]] }
        })
        .collect()
}

/// Values of every source mode at ρ, from the cubic interpolant. Reflected
/// nodes pick up (-1)^k in mode k.
fn modes_at(grid: &PolarGrid, hat: &[Complex64], ring: &[usize; 4], flip: &[bool; 4], l: &[f64; 4], out: &mut [Complex64]) {
    let n = grid.n_theta();
    out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for s in 0..4 {
        let src = &hat[ring[s] * n..(ring[s] + 1) * n];
        if flip[s] {
            for k in 0..n {
                let sign = if grid.mode(k) % 2 == 0 { 1.0 } else { -1.0 };
                out[k] += src[k] * (l[s] * sign);
            }
        } else {
            for k in 0..n {
                out[k] += src[k] * l[s];
            }
        }
    }
}

pub(crate) fn transform(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    let n = grid.n_theta();
    let nr = grid.n_r();
    let half = n / 2;
    let mut hat = f.values().to_vec();
    grid.fft_rings(&mut hat);
    let radii = grid.radii();
    let disk = !grid.domain().is_annulus();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut fg = vec![Complex64::new(0.0, 0.0); n];

    // Source slot for output mode m is the slot of m + 1.
    let src_neg: Vec<usize> = (1..=half).map(|p| grid.slot(-(p as i64) + 1)).collect();
    let src_pos: Vec<usize> = (0..half).map(|p| grid.slot(p as i64 + 1)).collect();
    let dst_neg: Vec<usize> = (1..=half).map(|p| grid.slot(-(p as i64))).collect();
    let dst_pos: Vec<usize> = (0..half).map(|p| grid.slot(p as i64)).collect();

    let ivs = grid.intervals();
    let first = if disk { 1 } else { 0 };

    // m ≤ -1: sweep outward.
    let mut acc = vec![Complex64::new(0.0, 0.0); half];
    if disk {
        let iv = &ivs[0];
        for nd in nodes(iv.a, iv.b, &iv.xs) {
            modes_at(&grid, &hat, &iv.rings, &iv.flip, &nd.l, &mut fg);
            let t = nd.rho / radii[0];
            let mut pw = nd.w;
            for p in 0..half {
                pw *= t;
                acc[p] += fg[src_neg[p]] * pw;
            }
        }
    }
    for p in 0..half {
        out[dst_neg[p]] = acc[p] * 2.0;
    }
    for j in 0..nr - 1 {
        let iv = &ivs[first + j];
        let ratio = radii[j] / radii[j + 1];
        let mut pw = 1.0;
        for a in acc.iter_mut() {
            pw *= ratio;
            *a *= pw;
        }
        for nd in nodes(iv.a, iv.b, &iv.xs) {
            modes_at(&grid, &hat, &iv.rings, &iv.flip, &nd.l, &mut fg);
            let t = nd.rho / radii[j + 1];
            let mut pw = nd.w;
            for p in 0..half {
                pw *= t;
                acc[p] += fg[src_neg[p]] * pw;
            }
        }
        let row = &mut out[(j + 1) * n..(j + 2) * n];
        for p in 0..half {
            row[dst_neg[p]] = acc[p] * 2.0;
        }
    }

    // m ≥ 0: sweep inward from the outer circle, where these modes vanish.
    let mut acc = vec![Complex64::new(0.0, 0.0); half];
    for j in (0..nr - 1).rev() {
        let iv = &ivs[first + j];
        let ratio = radii[j] / radii[j + 1];
        let mut pw = 1.0;
        for (p, a) in acc.iter_mut().enumerate() {
            if p > 0 {
                pw *= ratio;
            }
            *a *= pw;
        }
        for nd in nodes(iv.a, iv.b, &iv.xs) {
            modes_at(&grid, &hat, &iv.rings, &iv.flip, &nd.l, &mut fg);
            let t = radii[j] / nd.rho;
            let mut pw = nd.w;
            for p in 0..half {
                if p > 0 {
                    pw *= t;
                }
                acc[p] += fg[src_pos[p]] * pw;
            }
        }
        let row = &mut out[j * n..(j + 1) * n];
        for p in 0..half {
            row[dst_pos[p]] = acc[p] * -2.0;
        }
    }
    grid.ifft_rings(&mut out);
    ScalarField::raw(grid, out)
}
