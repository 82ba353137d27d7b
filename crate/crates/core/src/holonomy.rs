//! Loop integrals of connection differences, the quotient Θ = F₁/F₂ of
//! integrating factors, winding integrals ∮ dΘ/Θ and the mod-2π defect.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::{d0, loop_quadrature, Loop, OneForm, ScalarField};
use crate::{Error, Result, I};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct HolonomyReport {
    pub length: f64,
    /// ∫_γ (X₁ - X₂).
    pub integral: f64,
    pub nearest_k: i64,
    /// |integral - 2π k|, at most π.
    pub defect: f64,
    /// e^{i ∫_γ (X₁ - X₂)}.
    pub transport: Complex64,
}

/// Nearest multiple of 2π and the distance to it.
pub fn nearest_period(integral: f64) -> (i64, f64) {
    let k = (integral / (2.0 * PI)).round();
    (k as i64, (integral - 2.0 * PI * k).abs())
}

pub fn holonomy_defect(x1: &OneForm, x2: &OneForm, gamma: &Loop) -> Result<HolonomyReport> {
    gamma.check_inside(&x1.grid().domain())?;
    let diff = x1 - x2;
    let v = loop_quadrature(&diff, gamma)?;
    let (nearest_k, defect) = nearest_period(v.re);
    Ok(HolonomyReport { length: gamma.length(), integral: v.re, nearest_k, defect, transport: (I * v).exp() })
}

/// Θ = F₁ F₂⁻¹.
pub fn theta_field(f1: &ScalarField, f2: &ScalarField) -> Result<ScalarField> {
    let min = f2.values().iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        return Err(Error::VanishingTheta(0.0));
    }
    f1.zip_with(f2, |a, b| a / b)
}

#[derive(Clone, Debug)]
pub struct ThetaDecomposition {
    /// θ = Θ̄⁻¹ - Θ; zero exactly when |Θ| = 1.
    pub theta_pert: ScalarField,
    pub sup: f64,
}

pub fn theta_decomposition(theta: &ScalarField) -> ThetaDecomposition {
    let theta_pert = theta.map(|t| 1.0 / t.conj() - t);
    let sup = theta_pert.max_abs();
    ThetaDecomposition { theta_pert, sup }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Winding {
    /// ∮ dΘ/Θ.
    pub value: Complex64,
    /// Im(value) / 2π.
    pub turns: f64,
    pub nearest: i64,
    /// |turns - nearest|.
    pub distance: f64,
    pub evaluations: usize,
}

const MIN_THETA: f64 = 1e-6;
const MAX_STEP: f64 = PI / 4.0;

/// ∮ dΘ/Θ for Θ given pointwise, by summing principal logarithms of
/// consecutive ratios. Segments whose phase step exceeds π/4 are bisected.
pub fn winding_of(theta: impl Fn(Complex64) -> Complex64, gamma: &Loop) -> Result<Winding> {
    let pts = gamma.samples();
    let mut evaluations = 0usize;
    let mut eval = |z: Complex64| -> Result<Complex64> {
        evaluations += 1;
        let v = theta(z);
        if !(v.norm() >= MIN_THETA) {
            return Err(Error::VanishingTheta(v.norm()));
        }
        Ok(v)
    };
    let mut total = Complex64::new(0.0, 0.0);
    let mut prev = eval(pts[0])?;
    for w in pts.windows(2) {
        let end = eval(w[1])?;
        // Explicit stack of (z_a, Θ_a, z_b, Θ_b, depth).
        let mut stack = vec![(w[0], prev, w[1], end, 0u32)];
        while let Some((za, ta, zb, tb, depth)) = stack.pop() {
            let step = (tb / ta).ln();
            if step.im.abs() <= MAX_STEP || depth >= 30 {
                total += step;
                continue;
            }
            let zm = 0.5 * (za + zb);
            let tm = eval(zm)?;
            // Right half first so the left half is summed first.
            stack.push((zm, tm, zb, tb, depth + 1));
            stack.push((za, ta, zm, tm, depth + 1));
        }
        prev = end;
    }
    let turns = total.im / (2.0 * PI);
    let nearest = turns.round() as i64;
    Ok(Winding { value: total, turns, nearest, distance: (turns - nearest as f64).abs(), evaluations })
}

/// Winding integral of a sampled Θ, interpolated bicubically along γ.
pub fn winding_integral(theta: &ScalarField, gamma: &Loop) -> Result<Winding> {
    gamma.check_inside(&theta.grid().domain())?;
    winding_of(|z| theta.interp(z), gamma)
}

#[derive(Clone, Debug)]
pub struct GaugeResidual {
    /// i(X₁ - X₂) - dΘ/Θ.
    pub form: OneForm,
    pub sup: f64,
}

pub fn gauge_residual(x1: &OneForm, x2: &OneForm, theta: &ScalarField) -> Result<GaugeResidual> {
    let dt = d0(theta);
    let inv = theta.map(|t| 1.0 / t);
    let log_d = dt.mul_scalar(&inv)?;
    let form = &(x1 - x2).scale(I) - &log_d;
    let sup = form.max_abs();
    Ok(GaugeResidual { form, sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, PolarGrid};

    #[test]
    fn period_arithmetic() {
        let (k, d) = nearest_period(6.4);
        assert_eq!(k, 1);
        assert!((d - (6.4 - 2.0 * PI)).abs() < 1e-15);
        assert_eq!(nearest_period(0.0), (0, 0.0));
    }

    #[test]
    fn winding_of_powers_and_exponentials() {
        let gamma = Loop::circle(Complex64::new(0.0, 0.0), 1.2, 64);
        for k in -2..=2 {
            let w = winding_of(|z| z.powi(k), &gamma).unwrap();
            assert_eq!(w.nearest, k as i64);
            assert!(w.distance < 1e-12);
        }
        let w = winding_of(|z| z * z.sin().exp(), &gamma).unwrap();
        assert_eq!(w.nearest, 1);
        let w = winding_of(|z| (z * z + z.conj()).exp(), &gamma).unwrap();
        assert_eq!(w.nearest, 0);
        assert!(w.distance < 1e-12);
    }

    #[test]
    fn circle_integral_of_angle_form() {
        let g = PolarGrid::new(Domain::annulus(0.5, 2.0), 128, 64).unwrap();
        // n dθ = n (x dy - y dx)/r².
        let x1 = OneForm::from_xy(&g, |z| {
            let r2 = z.norm_sqr();
            (-3.0 * z.im / r2, 3.0 * z.re / r2)
        });
        let x2 = OneForm::zeros(&g);
        let rep = holonomy_defect(&x1, &x2, &Loop::circle(Complex64::new(0.0, 0.0), 1.5, 400)).unwrap();
        assert_eq!(rep.nearest_k, 3);
        assert!(rep.defect < 1e-6, "{rep:?}");
        assert!((rep.transport.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unimodular_theta_has_zero_perturbation() {
        let g = PolarGrid::new(Domain::disk(1.0), 16, 32).unwrap();
        let f1 = ScalarField::from_fn(&g, |z| (I * z.re).exp());
        let f2 = ScalarField::from_fn(&g, |z| (I * z.im * z.re).exp());
        let t = theta_field(&f1, &f2).unwrap();
        assert!(theta_decomposition(&t).sup < 1e-14);
    }
}
