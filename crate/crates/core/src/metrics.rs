//! Distances between Cauchy data sets given by DtN matrices, boundary
//! Sobolev norms, the first-order system trace and holomorphic defects.
//!
//! Circle norms use ‖f‖_s² = Σ_n (1 + n²)^s |f̂_n|² with
//! f̂_n = (1/n_θ) Σ_k f(θ_k) e^{-inθ_k}, summed over boundary circles.

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::forward::DtnMatrix;
use crate::geometry::{PolarGrid, ScalarField};
use crate::{Error, Result, I};

/// Values on the boundary rings of a grid, outer circle first.
#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub radii: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
}

impl BoundaryTrace {
    pub fn of(f: &ScalarField) -> Self {
        let g = f.grid();
        let rings = g.boundary_rings();
        Self { radii: rings.iter().map(|&j| g.radii()[j]).collect(), values: rings.iter().map(|&j| f.ring(j).to_vec()).collect() }
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.values.iter().map(|v| circle_sobolev_norm(v, s).powi(2)).sum::<f64>().sqrt()
    }
}

fn dft(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    let mut planner = rustfft::FftPlanner::new();
    let mut hat = v.to_vec();
    planner.plan_fft_forward(n).process(&mut hat);
    hat.iter().map(|x| x / n as f64).collect()
}

fn signed(k: usize, n: usize) -> f64 {
    if k < n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// H^s norm of samples on one circle.
pub fn circle_sobolev_norm(v: &[Complex64], s: f64) -> f64 {
    let n = v.len();
    dft(v).iter().enumerate().map(|(k, c)| (1.0 + signed(k, n).powi(2)).powf(s) * c.norm_sqr()).sum::<f64>().sqrt()
}

fn weight(m: i64, s: f64) -> f64 {
    (1.0 + (m * m) as f64).powf(0.5 * s)
}

fn to_mat(d: &DtnMatrix) -> Mat<Complex64> {
    Mat::from_fn(d.dim(), d.dim(), |i, j| d.at(i, j))
}

fn spectral_norm(m: &Mat<Complex64>) -> f64 {
    m.singular_values().map(|s| s.first().copied().unwrap_or(0.0)).unwrap_or(f64::NAN)
}

/// ‖W_{-1/2} (Λ₁ - Λ₂) W_{1/2}⁻¹‖₂ on the truncated Fourier basis.
pub fn surrogate_distance(a: &DtnMatrix, b: &DtnMatrix) -> Result<f64> {
    let d = a.sub(b)?;
    let m = Mat::from_fn(d.dim(), d.dim(), |i, j| {
        let (_, mi) = d.label(i);
        let (_, nj) = d.label(j);
        d.at(i, j) * weight(mi, -0.5) / weight(nj, 0.5)
    });
    Ok(spectral_norm(&m))
}

/// Weighted coordinates: f ↦ W_{1/2} f, g ↦ W_{-1/2} g.
fn weighted(d: &DtnMatrix) -> (Vec<f64>, Vec<f64>) {
    let w_plus = (0..d.dim()).map(|i| weight(d.label(i).1, 0.5)).collect();
    let w_minus = (0..d.dim()).map(|i| weight(d.label(i).1, -0.5)).collect();
    (w_plus, w_minus)
}

fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

// inf over f₂ of ‖f₁ - f₂‖_{1/2} + ‖Λ₁f₁ - Λ₂f₂‖_{-1/2} for f₁ = e_j, by
// iteratively reweighted least squares started from the plain least-squares
// solution, compared against the feasible choice f₂ = f₁.
fn inf_for_basis(l1: &DtnMatrix, l2: &Mat<Complex64>, j: usize, wp: &[f64], wm: &[f64]) -> f64 {
    let k = l1.dim();
    let g1: Vec<Complex64> = (0..k).map(|i| l1.at(i, j)).collect();
    let objective = |f2: &[Complex64]| {
        let a: Vec<Complex64> = (0..k)
            .map(|i| (if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } - f2[i]) * wp[i])
            .collect();
        let b: Vec<Complex64> =
            (0..k).map(|i| (g1[i] - (0..k).map(|c| l2[(i, c)] * f2[c]).sum::<Complex64>()) * wm[i]).collect();
        (vnorm(&a), vnorm(&b))
    };
    let feasible = {
        let mut e = vec![Complex64::new(0.0, 0.0); k];
        e[j] = Complex64::new(1.0, 0.0);
        let (a, b) = objective(&e);
        a + b
    };
    let (mut alpha, mut beta) = (1.0f64, 1.0f64);
    let mut best = feasible;
    for _ in 0..8 {
        // Stack [√α W₊; √β W₋ Λ₂] f₂ ≈ [√α W₊ e_j; √β W₋ g₁].
        let a = Mat::<Complex64>::from_fn(2 * k, k, |r, c| {
            if r < k {
                if r == c { Complex64::new(alpha.sqrt() * wp[r], 0.0) } else { Complex64::new(0.0, 0.0) }
            } else {
                l2[(r - k, c)] * (beta.sqrt() * wm[r - k])
            }
        });
        let rhs = Mat::<Complex64>::from_fn(2 * k, 1, |r, _| {
            if r < k {
                if r == j { Complex64::new(alpha.sqrt() * wp[r], 0.0) } else { Complex64::new(0.0, 0.0) }
            } else {
                g1[r - k] * (beta.sqrt() * wm[r - k])
            }
        });
        let qr = a.qr();
        let sol = faer::linalg::solvers::SolveLstsq::solve_lstsq(&qr, &rhs);
        let f2: Vec<Complex64> = (0..k).map(|i| sol[(i, 0)]).collect();
        let (na, nb) = objective(&f2);
        best = best.min(na + nb);
        alpha = 1.0 / na.max(1e-14);
        beta = 1.0 / nb.max(1e-14);
    }
    best
}

fn directed_sup_inf(a: &DtnMatrix, b: &DtnMatrix) -> f64 {
    let (wp, wm) = weighted(a);
    let lb = to_mat(b);
    (0..a.dim()).map(|j| inf_for_basis(a, &lb, j, &wp, &wm) / wp[j]).fold(0.0, f64::max)
}

/// Symmetrized sup-inf distance between the Cauchy data sets of two DtN
/// maps, sup taken over the truncated Fourier basis normalized in H^{1/2}.
pub fn sup_inf_distance(a: &DtnMatrix, b: &DtnMatrix) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DataMismatch("DtN matrices of different shapes".into()));
    }
    Ok(directed_sup_inf(a, b).max(directed_sup_inf(b, a)))
}

/// Distances reported together.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CauchyDistance {
    pub surrogate: f64,
    pub sup_inf: f64,
}

pub fn cauchy_distance(a: &DtnMatrix, b: &DtnMatrix) -> Result<CauchyDistance> {
    Ok(CauchyDistance { surrogate: surrogate_distance(a, b)?, sup_inf: sup_inf_distance(a, b)? })
}

/// Multiplication by a boundary function in the truncated basis, per circle.
pub fn multiplication_matrix(shape: &DtnMatrix, values: &[Vec<Complex64>]) -> DtnMatrix {
    let mut out = DtnMatrix::zeros(shape.circles, shape.n_max);
    let n = shape.n_max as i64;
    for (c, v) in values.iter().enumerate() {
        let hat = dft(v);
        let len = v.len() as i64;
        for m in -n..=n {
            for k in -n..=n {
                out.set(c, m, c, k, hat[(m - k).rem_euclid(len) as usize]);
            }
        }
    }
    out
}

fn matmul(a: &DtnMatrix, b: &DtnMatrix) -> DtnMatrix {
    let mut out = DtnMatrix::zeros(a.circles, a.n_max);
    let d = a.dim();
    for i in 0..d {
        for k in 0..d {
            let v = a.at(i, k);
            if v.norm() == 0.0 {
                continue;
            }
            for j in 0..d {
                *out.at_mut(i, j) += v * b.at(k, j);
            }
        }
    }
    out
}

/// Tangential component X(τ) on each boundary circle, τ the unit tangent
/// of the induced orientation (counter-clockwise outside, clockwise on an
/// inner circle).
pub fn tangential_trace(x: &crate::geometry::OneForm) -> Vec<Vec<Complex64>> {
    let g = x.grid();
    let n = g.n_theta();
    g.boundary_rings()
        .into_iter()
        .map(|j| {
            let sign = if g.domain().is_annulus() && j == 0 { -1.0 } else { 1.0 };
            (0..n).map(|k| x.pair_vector(j * n + k, I * g.phases()[k] * sign)).collect()
        })
        .collect()
}

/// Trace map of the first-order system, f ↦ λ = ½(Λf + i(∂_τ f + i X_τ f)).
pub fn system_matrix(dtn: &DtnMatrix, grid: &PolarGrid, x_tau: &[Vec<Complex64>]) -> DtnMatrix {
    let mx = multiplication_matrix(dtn, x_tau);
    let radii: Vec<(f64, f64)> = grid
        .boundary_rings()
        .into_iter()
        .map(|j| (grid.radii()[j], if grid.domain().is_annulus() && j == 0 { -1.0 } else { 1.0 }))
        .collect();
    let mut out = DtnMatrix::zeros(dtn.circles, dtn.n_max);
    let d = dtn.dim();
    for i in 0..d {
        for j in 0..d {
            let (ci, mi) = dtn.label(i);
            let mut v = dtn.at(i, j) - mx.at(i, j);
            if i == j {
                let (r, s) = radii[ci];
                v += I * (I * mi as f64 * s / r);
            }
            *out.at_mut(i, j) = 0.5 * v;
        }
    }
    out
}

/// Surrogate distance of first-order system data, d′.
pub fn system_distance(a: &DtnMatrix, b: &DtnMatrix) -> Result<f64> {
    surrogate_distance(a, b)
}

/// Conjugated system map for the diagonalized unknowns (F u, F̄⁻¹ ω):
/// M_{F̄⁻¹} Λ_sys M_F⁻¹.
pub fn diagonalized_system(sys: &DtnMatrix, f_boundary: &[Vec<Complex64>]) -> DtnMatrix {
    let inv_f: Vec<Vec<Complex64>> = f_boundary.iter().map(|v| v.iter().map(|x| 1.0 / x).collect()).collect();
    let inv_fbar: Vec<Vec<Complex64>> = f_boundary.iter().map(|v| v.iter().map(|x| 1.0 / x.conj()).collect()).collect();
    let left = multiplication_matrix(sys, &inv_fbar);
    let right = multiplication_matrix(sys, &inv_f);
    matmul(&matmul(&left, sys), &right)
}

/// Projection of circle data onto boundary values of holomorphic functions:
/// keep modes n ≥ 0, i.e. Σ_{n≥0} ĝ_n (z/R)^n.
pub fn holo_project(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let hat = dft(values);
    (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            (0..n / 2).map(|m| hat[m] * Complex64::from_polar(1.0, m as f64 * th)).sum()
        })
        .collect()
}

/// Power-series extension G(z) = Σ_{n≥0} ĝ_n ((z - c)/R)^n of circle data.
pub fn holo_extension(values: &[Complex64], grid: &std::sync::Arc<PolarGrid>) -> ScalarField {
    let hat = dft(values);
    let (c, r) = (grid.domain().center(), grid.domain().r_outer());
    let n = values.len();
    ScalarField::from_fn(grid, |z| {
        let w = (z - c) / r;
        hat[..n / 2].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * w + k)
    })
}

/// (Σ_{m≥1} (1 + m²)^r |ĝ_{-m}|²)^{1/2}: the part of circle data that is
/// not a boundary value of a holomorphic function on the disk.
pub fn holomorphic_defect(values: &[Complex64], r: f64) -> f64 {
    let n = values.len();
    let hat = dft(values);
    (n / 2..n).map(|k| (1.0 + signed(k, n).powi(2)).powf(r) * hat[k].norm_sqr()).sum::<f64>().sqrt()
}

/// Holomorphic defect of the outer-circle trace of a disk field.
pub fn field_holomorphic_defect(f: &ScalarField, r: f64) -> Result<f64> {
    let g = f.grid();
    if g.domain().is_annulus() {
        return Err(Error::InvalidDomain("holomorphic projection is implemented on the disk only".into()));
    }
    Ok(holomorphic_defect(f.ring(g.n_r() - 1), r))
}

/// Boundary pair (f, g) given by samples on each boundary circle.
#[derive(Clone, Debug)]
pub struct CauchyPair {
    pub f: BoundaryTrace,
    pub g: BoundaryTrace,
}

fn trace_diff(a: &BoundaryTrace, b: &BoundaryTrace) -> Result<BoundaryTrace> {
    if a.values.len() != b.values.len() || a.values.iter().zip(&b.values).any(|(x, y)| x.len() != y.len()) {
        return Err(Error::DataMismatch("traces sampled differently".into()));
    }
    Ok(BoundaryTrace {
        radii: a.radii.clone(),
        values: a.values.iter().zip(&b.values).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect(),
    })
}

/// (‖f₁ - f₂‖_{1/2} + ‖g₁ - g₂‖_{-1/2}) / ‖f₁‖_{1/2}.
pub fn pair_distance(p1: &CauchyPair, p2: &CauchyPair) -> Result<f64> {
    let den = p1.f.sobolev_norm(0.5);
    if den == 0.0 {
        return Err(Error::DataMismatch("reference Dirichlet datum has zero norm".into()));
    }
    Ok((trace_diff(&p1.f, &p2.f)?.sobolev_norm(0.5) + trace_diff(&p1.g, &p2.g)?.sobolev_norm(-0.5)) / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(n_max: usize, f: impl Fn(i64) -> f64) -> DtnMatrix {
        let mut d = DtnMatrix::zeros(1, n_max);
        for m in -(n_max as i64)..=n_max as i64 {
            d.set(0, m, 0, m, Complex64::new(f(m), 0.0));
        }
        d
    }

    #[test]
    fn distances_vanish_on_identical_data_and_are_symmetric() {
        let a = diag(6, |m| m.abs() as f64);
        let b = diag(6, |m| (m * m + 2) as f64 / (m.abs() as f64 + 1.0));
        assert_eq!(surrogate_distance(&a, &a).unwrap(), 0.0);
        assert!(sup_inf_distance(&a, &a).unwrap() < 1e-12);
        let (ab, ba) = (sup_inf_distance(&a, &b).unwrap(), sup_inf_distance(&b, &a).unwrap());
        assert!((ab - ba).abs() < 1e-12);
        assert!((surrogate_distance(&a, &b).unwrap() - surrogate_distance(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn surrogate_of_diagonal_difference() {
        // Diagonal difference c_m gives max |c_m| / √(1 + m²).
        let a = diag(4, |_| 0.0);
        let b = diag(4, |m| if m == 2 { 5.0 } else { 0.1 });
        let s = surrogate_distance(&a, &b).unwrap();
        assert!((s - 5.0 / 5f64.sqrt()).abs() < 1e-12);
        // The sup-inf distance never exceeds the feasible choice f₂ = f₁.
        assert!(sup_inf_distance(&a, &b).unwrap() <= s + 1e-12);
    }

    #[test]
    fn sobolev_norm_of_single_mode() {
        let n = 32;
        let v: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 3.0 * 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
        assert!((circle_sobolev_norm(&v, 0.5) - 10f64.powf(0.25)).abs() < 1e-12);
        assert!(holomorphic_defect(&v, 0.5) < 1e-14);
        let w: Vec<Complex64> = v.iter().map(|x| x.conj()).collect();
        assert!((holomorphic_defect(&w, 1.0) - 10f64.sqrt()).abs() < 1e-12);
    }
}
