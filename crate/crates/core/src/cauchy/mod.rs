//! Inverses of ∂̄ and its adjoint on a disk or annulus, the Beurling
//! composition ∂∂̄⁻¹, and the primitive α with ∂̄α = A used to build the
//! gauge factor F = e^{iα}.
//!
//! Normalization: ∂̄⁻¹(f dz̄)(z) = (1/π) ∫ f(ζ) / (z - ζ) dA(ζ), so that
//! ∂_z̄ ∂̄⁻¹ f = f and ∂̄⁻¹(1) = z̄ on the unit disk.

mod direct;
mod modal;

use std::sync::Arc;

use faer::prelude::Solve;
use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use direct::CauchyKernelTable;

use crate::geometry::{inner1, partial, OneForm, PolarGrid, ScalarField};
use crate::{Error, Result};

/// How the area integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CauchyRoute {
    /// Fourier-mode recurrences, O(n_r n_θ) per ring sweep.
    Modal,
    /// Cell sum with a singular-cell correction, O(N²).
    Direct,
}

/// Cauchy transform Tf = (1/π) ∫ f(ζ) / (z - ζ) dA(ζ) of a function.
pub fn cauchy_transform(f: &ScalarField) -> ScalarField {
    modal::transform(f)
}

pub fn cauchy_transform_with(f: &ScalarField, route: CauchyRoute) -> ScalarField {
    match route {
        CauchyRoute::Modal => modal::transform(f),
        CauchyRoute::Direct => CauchyKernelTable::new(f.grid()).apply(f),
    }
}

fn require_01(w: &OneForm) -> Result<()> {
    let scale = w.max_abs().max(1.0);
    if w.part10().max_abs() > 1e-13 * scale {
        return Err(Error::WrongBidegree("expected a (0,1)-form"));
    }
    Ok(())
}

/// u with ∂̄u = ω for a (0,1)-form ω = f dz̄.
pub fn dbar_inverse(w: &OneForm) -> Result<ScalarField> {
    require_01(w)?;
    Ok(modal::transform(&w.part01()))
}

/// ω = w dz̄ with ∂̄*ω = -2 ∂_z w = v.
pub fn dbar_star_inverse(v: &ScalarField) -> OneForm {
    let t = modal::transform(&v.conj());
    let w = t.map(|x| -0.5 * x.conj());
    OneForm::raw(v.grid().clone(), vec![Complex64::new(0.0, 0.0); v.grid().len()], w.into_values())
}

/// Beurling composition ∂(∂̄⁻¹ω) for a (0,1)-form ω.
pub fn beurling(w: &OneForm) -> Result<OneForm> {
    Ok(partial(&dbar_inverse(w)?))
}

/// α with ∂̄α = A for the (0,1) part A of a magnetic potential.
pub fn primitive_alpha(a: &OneForm) -> Result<ScalarField> {
    dbar_inverse(a)
}

/// Norm estimates for the Beurling composition on L² of (0,1)-forms.
#[derive(Clone, Copy, Debug)]
pub struct BeurlingNorm {
    /// Largest ‖Bω‖/‖ω‖ over the random samples.
    pub sample_max: f64,
    /// Largest Rayleigh quotient over the span of the samples.
    pub subspace: f64,
}

fn random_smooth_form(grid: &Arc<PolarGrid>, rng: &mut ChaCha8Rng) -> OneForm {
    let mut coef = Vec::new();
    for a in 0..=3 {
        for b in 0..=3 - a {
            coef.push((a, b, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        }
    }
    let s = grid.domain().r_outer();
    let c = grid.domain().center();
    let v = ScalarField::from_fn(grid, |z| {
        let w = (z - c) / s;
        coef.iter().map(|&(a, b, k)| k * w.powi(a) * w.conj().powi(b)).sum()
    });
    OneForm::raw(grid.clone(), vec![Complex64::new(0.0, 0.0); grid.len()], v.into_values())
}

/// Estimate ‖∂∂̄⁻¹‖ on `samples` random smooth (0,1)-forms, and by power
/// iteration on the Gram pencil of their span.
pub fn beurling_norm_estimate(grid: &Arc<PolarGrid>, samples: usize, seed: u64) -> Result<BeurlingNorm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms: Vec<OneForm> = (0..samples).map(|_| random_smooth_form(grid, &mut rng)).collect();
    let images: Vec<OneForm> = forms.iter().map(beurling).collect::<Result<_>>()?;
    let mut sample_max = 0.0f64;
    for (w, b) in forms.iter().zip(&images) {
        sample_max = sample_max.max(b.l2_norm() / w.l2_norm());
    }
    let k = samples;
    let g = Mat::<Complex64>::from_fn(k, k, |i, j| inner1(&forms[j], &forms[i]).unwrap());
    let gb = Mat::<Complex64>::from_fn(k, k, |i, j| inner1(&images[j], &images[i]).unwrap());
    // Generalized Rayleigh quotient max c*Gb c / c*G c. G is a Gram matrix
    // of random polynomials and may be ill conditioned; regularize lightly.
    let reg = Mat::<Complex64>::from_fn(k, k, |i, j| g[(i, j)] + if i == j { g[(i, i)] * 1e-10 } else { Complex64::new(0.0, 0.0) });
    let lu = reg.partial_piv_lu();
    let mut x = Mat::<Complex64>::from_fn(k, 1, |i, _| Complex64::new(1.0 + i as f64 * 0.01, 0.0));
    let mut est = 0.0;
    for _ in 0..200 {
        let y = lu.solve(&(&gb * &x));
        let nrm = (0..k).map(|i| y[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        x = Mat::from_fn(k, 1, |i, _| y[(i, 0)] / nrm);
        let num = (x.adjoint() * &gb * &x)[(0, 0)].re;
        let den = (x.adjoint() * &reg * &x)[(0, 0)].re;
        let q = num / den;
        if (q - est).abs() < 1e-12 * q.abs() {
            est = q;
            break;
        }
        est = q;
    }
    Ok(BeurlingNorm { sample_max, subspace: est.max(0.0).sqrt().max(sample_max) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dbar, wirtinger, Domain};

    #[test]
    fn constant_maps_to_conjugate() {
        let g = PolarGrid::new(Domain::disk(1.0), 48, 32).unwrap();
        let u = cauchy_transform(&ScalarField::constant(&g, Complex64::new(1.0, 0.0)));
        let err = u.map_with_point(|z, v| v - z.conj()).max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn z_maps_to_modulus_minus_radius() {
        let r = 1.3;
        let g = PolarGrid::new(Domain::disk(r), 48, 32).unwrap();
        let u = cauchy_transform(&ScalarField::from_fn(&g, |z| z));
        let err = u.map_with_point(|z, v| v - (z.norm_sqr() - r * r)).max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn disk_transform_round_trips_at_fourth_order() {
        let f = |z: Complex64| (z * 0.8).exp() * z.conj() + Complex64::new(0.3, 0.0) * z.norm_sqr();
        let err = |n: usize| {
            let g = PolarGrid::new(Domain::disk(1.0), n, 64).unwrap();
            let fs = ScalarField::from_fn(&g, f);
            let u = cauchy_transform(&fs);
            let (_, uzb) = wirtinger(&u);
            (&uzb - &fs).max_abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 1e-5, "{e2}");
        assert!(e1 / e2 > 8.0, "{}", e1 / e2);
    }

    #[test]
    fn annulus_transform_round_trips() {
        let g = PolarGrid::new(Domain::annulus(0.4, 1.0), 64, 64).unwrap();
        let fs = ScalarField::from_fn(&g, |z| (z.conj() * 1.5).sin() + z);
        let u = cauchy_transform(&fs);
        let (_, uzb) = wirtinger(&u);
        assert!((&uzb - &fs).max_abs() < 1e-5);
    }

    #[test]
    fn direct_route_agrees_with_modal_route() {
        let g = PolarGrid::new(Domain::disk(1.0), 32, 32).unwrap();
        let fs = ScalarField::from_fn(&g, |z| (z * 0.7).cos() + z.conj() * 0.4);
        let a = cauchy_transform_with(&fs, CauchyRoute::Modal);
        let b = cauchy_transform_with(&fs, CauchyRoute::Direct);
        let rel = (&a - &b).max_abs() / a.max_abs();
        assert!(rel < 2e-2, "{rel}");
    }

    #[test]
    fn dbar_star_inverse_is_right_inverse() {
        let g = PolarGrid::new(Domain::disk(1.0), 64, 64).unwrap();
        let v = ScalarField::from_fn(&g, |z| z * z.conj() + Complex64::new(0.0, 1.0) * z);
        let w = dbar_star_inverse(&v);
        let back = crate::geometry::dbar_star(&w);
        assert!((&back - &v).max_abs() < 1e-5);
    }

    #[test]
    fn refuses_mixed_forms() {
        let g = PolarGrid::new(Domain::disk(1.0), 16, 16).unwrap();
        let f = ScalarField::from_fn(&g, |z| z);
        let w = crate::geometry::d0(&f);
        assert!(matches!(dbar_inverse(&w), Err(Error::WrongBidegree(_))));
        assert!(dbar_inverse(&dbar(&f)).is_ok());
    }
}
