use num_complex::Complex64;

use super::grid::PolarGrid;
use super::stencil::lagrange;

/// Radial interval index and cubic weights for radius r.
pub(crate) fn radial_weights(grid: &PolarGrid, r: f64) -> (usize, [f64; 4]) {
    let radii = grid.radii();
    let n = grid.n_r();
    let iv_index = if grid.domain().is_annulus() {
        (((r - radii[0]) / grid.dr()).floor().max(0.0) as usize).min(n - 2)
    } else if r < radii[0] {
        0
    } else {
        1 + (((r - radii[0]) / grid.dr()).floor() as usize).min(n - 2)
    };
    let iv = &grid.intervals()[iv_index];
    let l = lagrange(&iv.xs, r);
    (iv_index, [l[0], l[1], l[2], l[3]])
}

/// Interpolation of ring-major samples at z: cubic Lagrange in r (reflected
/// nodes across the center of a disk) and trigonometric in θ.
pub fn interpolate(grid: &PolarGrid, values: &[Complex64], z: Complex64) -> Complex64 {
    let w = z - grid.domain().center();
    let r = w.norm();
    let n = grid.n_theta();
    let th = w.arg();
    // Periodic sinc weights for even n: (-1)^k sin(nθ/2) cot((θ - θ_k)/2) / n.
    let mut wt = vec![0.0; n];
    let s = (0.5 * n as f64 * th).sin() / n as f64;
    let mut exact = None;
    for (k, t) in grid.thetas().iter().enumerate() {
        let half = 0.5 * (th - t);
        let sh = half.sin();
        if sh.abs() < 1e-14 {
            exact = Some(k);
            break;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        wt[k] = sign * s * half.cos() / sh;
    }
    if let Some(k) = exact {
        wt.iter_mut().for_each(|v| *v = 0.0);
        wt[k] = 1.0;
    }
    let (ivi, lr) = radial_weights(grid, r);
    let iv = &grid.intervals()[ivi];
    let mut acc = Complex64::new(0.0, 0.0);
    for sidx in 0..4 {
        let shift = if iv.flip[sidx] { n / 2 } else { 0 };
        let base = iv.rings[sidx] * n;
        let mut ring = Complex64::new(0.0, 0.0);
        for (k, c) in wt.iter().enumerate() {
            if *c != 0.0 {
                ring += values[base + (k + shift) % n] * *c;
            }
        }
        acc += ring * lr[sidx];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::super::{Domain, ScalarField};
    use super::*;

    #[test]
    fn interpolation_is_accurate_everywhere() {
        for dom in [Domain::disk(1.0), Domain::annulus(0.3, 1.0)] {
            let g = PolarGrid::new(dom, 64, 128).unwrap();
            let f = |z: Complex64| (z * 1.3).sin() + z.conj() * z * 0.5;
            let field = ScalarField::from_fn(&g, f);
            for &z in &[
                Complex64::new(0.001, 0.0005),
                Complex64::new(0.35, -0.2),
                Complex64::new(-0.7, 0.69),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.31, 0.0),
            ] {
                if !dom.contains(z, 0.0) {
                    continue;
                }
                assert!((field.interp(z) - f(z)).norm() < 2e-5, "{z}");
            }
        }
    }
}
