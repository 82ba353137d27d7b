//! Exterior calculus on polar grids: Wirtinger derivatives, d, ⋆, wedge,
//! codifferentials, L² pairings and the Laplacian.
//!
//! Conventions: dz∧dz̄ = -2i dx∧dy, ⋆1 = dx∧dy, ⋆dz = -i dz, ⋆dz̄ = i dz̄,
//! and the Laplacian is the positive one, Δ = δd = -(∂²_x + ∂²_y).

use num_complex::Complex64;

use super::field::{OneForm, ScalarField, TwoForm};
use super::grid::PolarGrid;
use crate::{Error, Result, I};

/// ∂_r, ∂_θ and ∂²_θ of ring-major data. θ derivatives are spectral with the
/// Nyquist mode dropped from odd orders.
pub(crate) struct PolarDerivs {
    pub r: Vec<Complex64>,
    pub th: Vec<Complex64>,
    pub thth: Vec<Complex64>,
}

pub(crate) fn theta_derivs(grid: &PolarGrid, v: &[Complex64], second: bool) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.n_theta();
    let mut hat = v.to_vec();
    grid.fft_rings(&mut hat);
    let mut th = hat.clone();
    let mut thth = if second { hat } else { Vec::new() };
    for k in 0..n {
        let m = grid.mode(k) as f64;
        let f1 = if 2 * k == n { Complex64::new(0.0, 0.0) } else { I * m };
        for j in 0..grid.n_r() {
            th[j * n + k] *= f1;
            if second {
                thth[j * n + k] *= -m * m;
            }
        }
    }
    grid.ifft_rings(&mut th);
    if second {
        grid.ifft_rings(&mut thth);
    }
    (th, thth)
}

pub(crate) fn polar_derivs(grid: &PolarGrid, v: &[Complex64], second: bool) -> PolarDerivs {
    let mut r = vec![Complex64::new(0.0, 0.0); v.len()];
    grid.apply_radial(grid.d1_all(), v, &mut r);
    let (th, thth) = theta_derivs(grid, v, second);
    PolarDerivs { r, th, thth }
}

pub(crate) fn wirtinger_raw(grid: &PolarGrid, v: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = polar_derivs(grid, v, false);
    let n = grid.n_theta();
    let mut fz = vec![Complex64::new(0.0, 0.0); v.len()];
    let mut fzb = vec![Complex64::new(0.0, 0.0); v.len()];
    for j in 0..grid.n_r() {
        let inv_r = 1.0 / grid.radii()[j];
        for k in 0..n {
            let i = j * n + k;
            let e = grid.phases()[k];
            let t = I * d.th[i] * inv_r;
            fz[i] = 0.5 * e.conj() * (d.r[i] - t);
            fzb[i] = 0.5 * e * (d.r[i] + t);
        }
    }
    (fz, fzb)
}

/// (∂_z f, ∂_z̄ f).
pub fn wirtinger(f: &ScalarField) -> (ScalarField, ScalarField) {
    let (a, b) = wirtinger_raw(f.grid(), f.values());
    (ScalarField::raw(f.grid().clone(), a), ScalarField::raw(f.grid().clone(), b))
}

/// df = f_z dz + f_z̄ dz̄.
pub fn d0(f: &ScalarField) -> OneForm {
    let (a, b) = wirtinger_raw(f.grid(), f.values());
    OneForm::raw(f.grid().clone(), a, b)
}

/// ∂f = f_z dz.
pub fn partial(f: &ScalarField) -> OneForm {
    d0(f).project10()
}

/// ∂̄f = f_z̄ dz̄.
pub fn dbar(f: &ScalarField) -> OneForm {
    d0(f).project01()
}

/// d(u dz + v dz̄) = (v_z - u_z̄) dz∧dz̄.
pub fn d1(w: &OneForm) -> TwoForm {
    let g = w.grid();
    let (_, u_zb) = wirtinger_raw(g, &w.c10);
    let (v_z, _) = wirtinger_raw(g, &w.c01);
    TwoForm::raw(g.clone(), v_z.iter().zip(&u_zb).map(|(a, b)| a - b).collect())
}

/// ∂ of a (0,1)-form: ∂(v dz̄) = v_z dz∧dz̄ (the (1,0) part is ignored).
pub fn partial1(w: &OneForm) -> TwoForm {
    let (v_z, _) = wirtinger_raw(w.grid(), &w.c01);
    TwoForm::raw(w.grid().clone(), v_z)
}

/// ∂̄ of a (1,0)-form: ∂̄(u dz) = -u_z̄ dz∧dz̄.
pub fn dbar1(w: &OneForm) -> TwoForm {
    let (_, u_zb) = wirtinger_raw(w.grid(), &w.c10);
    TwoForm::raw(w.grid().clone(), u_zb.iter().map(|v| -v).collect())
}

/// Hodge star on functions: f ↦ f dx∧dy = (i f / 2) dz∧dz̄.
pub fn star0(f: &ScalarField) -> TwoForm {
    TwoForm::raw(f.grid().clone(), f.values().iter().map(|v| 0.5 * I * v).collect())
}

/// Hodge star on 2-forms: c dz∧dz̄ ↦ -2i c.
pub fn star2(w: &TwoForm) -> ScalarField {
    ScalarField::raw(w.grid().clone(), w.c.iter().map(|v| -2.0 * I * v).collect())
}

/// Hodge star on 1-forms: u dz + v dz̄ ↦ -i u dz + i v dz̄.
pub fn star1(w: &OneForm) -> OneForm {
    OneForm::raw(
        w.grid().clone(),
        w.c10.iter().map(|v| -I * v).collect(),
        w.c01.iter().map(|v| I * v).collect(),
    )
}

/// α∧β for 1-forms, as a multiple of dz∧dz̄.
pub fn wedge(a: &OneForm, b: &OneForm) -> Result<TwoForm> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch);
    }
    let c = (0..a.c10.len()).map(|i| a.c10[i] * b.c01[i] - a.c01[i] * b.c10[i]).collect();
    Ok(TwoForm::raw(a.grid().clone(), c))
}

/// Codifferential δ = -⋆d⋆ on 1-forms: δ(u dz + v dz̄) = -2(u_z̄ + v_z).
pub fn codiff(w: &OneForm) -> ScalarField {
    let g = w.grid();
    let (_, u_zb) = wirtinger_raw(g, &w.c10);
    let (v_z, _) = wirtinger_raw(g, &w.c01);
    ScalarField::raw(g.clone(), u_zb.iter().zip(&v_z).map(|(a, b)| -2.0 * (a + b)).collect())
}

/// Adjoint of ∂̄ on (0,1)-forms: ∂̄*(w dz̄) = -2 w_z.
pub fn dbar_star(w: &OneForm) -> ScalarField {
    let (w_z, _) = wirtinger_raw(w.grid(), &w.c01);
    ScalarField::raw(w.grid().clone(), w_z.iter().map(|v| -2.0 * v).collect())
}

/// Adjoint of ∂ on (1,0)-forms: ∂*(u dz) = -2 u_z̄.
pub fn partial_star(w: &OneForm) -> ScalarField {
    let (_, u_zb) = wirtinger_raw(w.grid(), &w.c10);
    ScalarField::raw(w.grid().clone(), u_zb.iter().map(|v| -2.0 * v).collect())
}

/// ⟨f, g⟩ = ∫ f ḡ dA.
pub fn inner0(f: &ScalarField, g: &ScalarField) -> Result<Complex64> {
    Ok(f.zip_with(g, |a, b| a * b.conj())?.integrate())
}

/// ⟨λ, η⟩ = 2 ∫ (λ₁₀ η̄₁₀ + λ₀₁ η̄₀₁) dA.
pub fn inner1(a: &OneForm, b: &OneForm) -> Result<Complex64> {
    if !a.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch);
    }
    let v = (0..a.c10.len()).map(|i| 2.0 * (a.c10[i] * b.c10[i].conj() + a.c01[i] * b.c01[i].conj())).collect();
    Ok(ScalarField::raw(a.grid().clone(), v).integrate())
}

/// ⟨c dz∧dz̄, e dz∧dz̄⟩ = 4 ∫ c ē dA.
pub fn inner2(a: &TwoForm, b: &TwoForm) -> Result<Complex64> {
    Ok(inner0(&a.coefficient(), &b.coefficient())? * 4.0)
}

/// How the Laplacian is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianRoute {
    /// -2i ⋆ ∂ ∂̄ f, two Wirtinger passes.
    Composition,
    /// -(f_rr + f_r / r + f_θθ / r²) with the grid stencils.
    Direct,
}

pub fn laplacian(f: &ScalarField, route: LaplacianRoute) -> ScalarField {
    match route {
        LaplacianRoute::Composition => star2(&partial1(&dbar(f))).scale(-2.0 * I),
        LaplacianRoute::Direct => ScalarField::raw(f.grid().clone(), laplacian_direct(f.grid(), f.values())),
    }
}

pub(crate) fn laplacian_direct(grid: &PolarGrid, v: &[Complex64]) -> Vec<Complex64> {
    let d = polar_derivs(grid, v, true);
    let mut rr = vec![Complex64::new(0.0, 0.0); v.len()];
    grid.apply_radial(grid.d2_all(), v, &mut rr);
    let n = grid.n_theta();
    let mut out = rr;
    for j in 0..grid.n_r() {
        let r = grid.radii()[j];
        for k in 0..n {
            let i = j * n + k;
            out[i] = -(out[i] + d.r[i] / r + d.thth[i] / (r * r));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::Domain;
    use crate::geometry::PolarGrid;
    use std::sync::Arc;

    fn sample(z: Complex64) -> Complex64 {
        (z * z * 0.3 + z.conj() * 0.7 + Complex64::new(0.2, 0.1)).exp() * (1.0 + z.norm_sqr())
    }

    // Exact Wirtinger derivatives of `sample`, from the product rule.
    fn sample_dz(z: Complex64) -> Complex64 {
        let e = (z * z * 0.3 + z.conj() * 0.7 + Complex64::new(0.2, 0.1)).exp();
        e * (0.6 * z * (1.0 + z.norm_sqr()) + z.conj())
    }
    fn sample_dzb(z: Complex64) -> Complex64 {
        let e = (z * z * 0.3 + z.conj() * 0.7 + Complex64::new(0.2, 0.1)).exp();
        e * (0.7 * (1.0 + z.norm_sqr()) + z)
    }

    fn grids() -> Vec<(Arc<PolarGrid>, Arc<PolarGrid>)> {
        vec![
            (PolarGrid::new(Domain::disk(1.0), 32, 32).unwrap(), PolarGrid::new(Domain::disk(1.0), 64, 32).unwrap()),
            (
                PolarGrid::new(Domain::annulus(0.4, 1.2), 32, 48).unwrap(),
                PolarGrid::new(Domain::annulus(0.4, 1.2), 63, 48).unwrap(),
            ),
        ]
    }

    #[test]
    fn wirtinger_derivatives_converge_fourth_order() {
        for (g1, g2) in grids() {
            let err = |g: &Arc<PolarGrid>| {
                let f = ScalarField::from_fn(g, sample);
                let (fz, fzb) = wirtinger(&f);
                let ez = fz.map_with_point(|z, v| v - sample_dz(z)).max_abs();
                let ezb = fzb.map_with_point(|z, v| v - sample_dzb(z)).max_abs();
                ez.max(ezb)
            };
            let (e1, e2) = (err(&g1), err(&g2));
            assert!(e2 < 1e-5, "{e2}");
            assert!(e1 / e2 > 10.0, "ratio {}", e1 / e2);
        }
    }

    #[test]
    fn laplacian_routes_agree_with_exact_value() {
        // f = x² y + e^x: Δf = -(2y + e^x).
        for (_, g) in grids() {
            let f = ScalarField::from_fn(&g, |z| Complex64::new(z.re * z.re * z.im + z.re.exp(), 0.0));
            let exact = ScalarField::from_fn(&g, |z| Complex64::new(-(2.0 * z.im + z.re.exp()), 0.0));
            let a = laplacian(&f, LaplacianRoute::Direct);
            let b = laplacian(&f, LaplacianRoute::Composition);
            assert!((&a - &exact).max_abs() < 1e-4);
            assert!((&b - &exact).max_abs() < 1e-4);
        }
    }

    #[test]
    fn d_squared_vanishes() {
        for (_, g) in grids() {
            let f = ScalarField::from_fn(&g, sample);
            let dd = d1(&d0(&f));
            assert!(dd.max_abs() < 1e-5 * d0(&f).max_abs());
        }
    }

    #[test]
    fn star_conventions() {
        let g = PolarGrid::new(Domain::disk(1.0), 16, 16).unwrap();
        let dz = OneForm::from_fns(&g, |_| Complex64::new(1.0, 0.0), |_| Complex64::new(0.0, 0.0));
        let dzb = dz.conj();
        // dz∧dz̄ = -2i dx∧dy, so ⋆(dz∧dz̄) = -2i.
        let w = wedge(&dz, &dzb).unwrap();
        assert!((star2(&w).at(3, 4) - Complex64::new(0.0, -2.0)).norm() < 1e-15);
        // ⋆⋆ = -1 on 1-forms, ⋆₂⋆₀ = 1.
        let s = star1(&star1(&dz));
        assert!((s.c10[5] + 1.0).norm() < 1e-15);
        let f = ScalarField::constant(&g, Complex64::new(2.0, 1.0));
        assert!((star2(&star0(&f)).at(2, 2) - Complex64::new(2.0, 1.0)).norm() < 1e-15);
        // ⟨dz, dz⟩ on the unit disk is 2π.
        assert!((inner1(&dz, &dz).unwrap().re - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn dbar_adjoint_pairs_against_compact_forms() {
        let g = PolarGrid::new(Domain::disk(1.0), 96, 64).unwrap();
        let bump = |z: Complex64| {
            let r2 = z.norm_sqr();
            if r2 < 0.81 { ((0.81 - r2) / 0.81).powi(4) } else { 0.0 }
        };
        let f = ScalarField::from_fn(&g, |z| Complex64::new(bump(z), 0.0) * (z + 0.3));
        let w = OneForm::from_fns(&g, |_| Complex64::new(0.0, 0.0), |z| (z.conj() * 0.5).exp() * bump(z + 0.05));
        let lhs = inner1(&dbar(&f), &w).unwrap();
        let rhs = inner0(&f, &dbar_star(&w)).unwrap();
        assert!((lhs - rhs).norm() < 1e-6 * lhs.norm().max(1.0), "{lhs} {rhs}");
    }
}
