//! First-order ∂̄-system (D + V)U = 0 on Σ = Λ⁰ ⊕ Λ^{0,1}.
//!
//! D = [0 ∂̄*; ∂̄ 0] and V = [Q⁺ A′; A Q⁻] act on U = (u, ω) as
//! VU = (Q⁺u + ⋆(Ā′∧ω), uA + Q⁻ω). A (0,1)-form ω = w dz̄ is stored with
//! its coefficient w; ⋆(Ā′∧ω) = -2i ā′ w and ∂̄*ω = -2 w_z.

mod cgo;

pub use cgo::{dense_remainder_oracle, CgoProblem, CgoSolution, OscillatoryKind, Seed};

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::cauchy::primitive_alpha;
use crate::forward::Potential;
use crate::geometry::{d0, d1, inner0, inner1, star2, wirtinger, OneForm, PolarGrid, ScalarField};
use crate::{Error, Result, I};

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// U = (u, ω) with ω a (0,1)-form.
#[derive(Clone, Debug)]
pub struct SigmaSection {
    pub u: ScalarField,
    pub omega: OneForm,
}

impl SigmaSection {
    pub fn new(u: ScalarField, omega: OneForm) -> Result<Self> {
        if !u.grid().same_as(omega.grid()) {
            return Err(Error::GridMismatch);
        }
        if omega.part10().max_abs() > 0.0 {
            return Err(Error::WrongBidegree("Σ needs a (0,1)-form second component"));
        }
        Ok(Self { u, omega })
    }

    /// From the scalar u and the dz̄ coefficient w.
    pub fn from_parts(u: ScalarField, w: ScalarField) -> Result<Self> {
        let g = u.grid().clone();
        let omega = OneForm::new(g.clone(), vec![zero(); g.len()], w.into_values())?;
        Self::new(u, omega)
    }

    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self { u: ScalarField::zeros(grid), omega: OneForm::zeros(grid) }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        self.u.grid()
    }

    pub fn w(&self) -> ScalarField {
        self.omega.part01()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.u.l2_norm().powi(2) + self.omega.l2_norm().powi(2)).sqrt()
    }

    /// ‖u‖² + ‖du‖² + ‖ω‖² + ‖∇ω‖², with |∇w|² = 2(|w_z|² + |w_z̄|²).
    pub fn h1_norm(&self) -> f64 {
        let du = d0(&self.u).l2_norm();
        let w = self.w();
        let grad_w = d0(&w).l2_norm();
        (self.u.l2_norm().powi(2) + du * du + self.omega.l2_norm().powi(2) + 2.0 * grad_w * grad_w).sqrt()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        Ok(inner0(&self.u, &other.u)? + inner1(&self.omega, &other.omega)?)
    }

    pub fn restrict_to(&self, grid: &Arc<PolarGrid>) -> Result<Self> {
        Ok(Self { u: self.u.restrict_to(grid)?, omega: self.omega.restrict_to(grid)? })
    }
}

/// V = [Q⁺ A′; A Q⁻]; `a` and `a_prime` are (0,1)-forms.
#[derive(Clone, Debug)]
pub struct PotentialMatrix {
    pub q_plus: ScalarField,
    pub a: OneForm,
    pub a_prime: OneForm,
    pub q_minus: ScalarField,
}

impl PotentialMatrix {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self {
            q_plus: ScalarField::zeros(grid),
            a: OneForm::zeros(grid),
            a_prime: OneForm::zeros(grid),
            q_minus: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        self.q_plus.grid()
    }

    /// Pointwise adjoint in L²(Σ). The off-diagonal slots swap roles:
    /// (u ↦ uA)* = ⋆(\overline{-iA}∧·) and (⋆(Ā′∧·))* = (u ↦ u·iA′).
    pub fn adjoint(&self) -> Self {
        Self {
            q_plus: self.q_plus.conj(),
            a: self.a_prime.scale(I),
            a_prime: self.a.scale(-I),
            q_minus: self.q_minus.conj(),
        }
    }

    /// VU.
    pub fn apply(&self, u: &SigmaSection) -> Result<SigmaSection> {
        let g = self.grid();
        if !g.same_as(u.grid()) {
            return Err(Error::GridMismatch);
        }
        let (uu, w) = (u.u.values(), &u.omega.c01);
        let first: Vec<Complex64> = (0..g.len())
            .map(|i| self.q_plus.values()[i] * uu[i] - 2.0 * I * self.a_prime.c01[i].conj() * w[i])
            .collect();
        let second: Vec<Complex64> =
            (0..g.len()).map(|i| uu[i] * self.a.c01[i] + self.q_minus.values()[i] * w[i]).collect();
        SigmaSection::from_parts(ScalarField::new(g.clone(), first)?, ScalarField::new(g.clone(), second)?)
    }
}

/// DU = (∂̄*ω, ∂̄u).
pub fn dirac_free(u: &SigmaSection) -> SigmaSection {
    let (_, u_zb) = wirtinger(&u.u);
    let (w_z, _) = wirtinger(&u.w());
    SigmaSection::from_parts(w_z.scale(Complex64::new(-2.0, 0.0)), u_zb).expect("same grid")
}

/// (D + V)U.
pub fn dirac_apply(v: &PotentialMatrix, u: &SigmaSection) -> Result<SigmaSection> {
    let du = dirac_free(u);
    let vu = v.apply(u)?;
    SigmaSection::from_parts(&du.u + &vu.u, &du.w() + &vu.w())
}

/// Output of the reduction of L_{X,q} to a first-order system.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub v: PotentialMatrix,
    /// Q = -⋆dX + q.
    pub q_full: ScalarField,
    /// α with ∂̄α = π₀₁X.
    pub alpha: ScalarField,
    /// F = e^{iα}.
    pub f: ScalarField,
    pub f_sup: f64,
    pub f_inv_sup: f64,
}

/// V = [Q/2, ⋆(Ā∧·); iA, -1] with A = π₀₁X, and the integrating factor F.
pub fn reduce(pot: &Potential) -> Result<Reduction> {
    let g = pot.grid();
    let q_full = &star2(&d1(&pot.x)).scale(Complex64::new(-1.0, 0.0)) + &pot.q;
    let a = pot.x.project01();
    let alpha = primitive_alpha(&a)?;
    let f = alpha.map(|x| (I * x).exp());
    let v = PotentialMatrix {
        q_plus: q_full.scale(Complex64::new(0.5, 0.0)),
        a: a.scale(I),
        a_prime: a.clone(),
        q_minus: ScalarField::constant(g, Complex64::new(-1.0, 0.0)),
    };
    let f_sup = f.max_abs();
    let f_inv_sup = f.values().iter().map(|x| 1.0 / x.norm()).fold(0.0, f64::max);
    Ok(Reduction { v, q_full, alpha, f, f_sup, f_inv_sup })
}

/// U = (u, (∂̄ + iA)u) for a scalar solution u.
pub fn lift_solution(u: &ScalarField, x: &OneForm) -> Result<SigmaSection> {
    let (_, u_zb) = wirtinger(u);
    let w = u_zb.zip_with(&(u * &x.part01()), |d, ua| d + I * ua)?;
    SigmaSection::from_parts(u.clone(), w)
}

/// Diagonal potential [Q̃ 0; 0 F̃].
#[derive(Clone, Debug)]
pub struct DiagonalPotential {
    pub q_tilde: ScalarField,
    pub f_tilde: ScalarField,
}

impl DiagonalPotential {
    pub fn grid(&self) -> &Arc<PolarGrid> {
        self.q_tilde.grid()
    }

    pub fn matrix(&self) -> PotentialMatrix {
        let g = self.grid();
        PotentialMatrix {
            q_plus: self.q_tilde.clone(),
            a: OneForm::zeros(g),
            a_prime: OneForm::zeros(g),
            q_minus: self.f_tilde.clone(),
        }
    }
}

/// Q̃ = |F|⁻² Q⁺ and F̃ = |F|² Q⁻. Conjugation by diag(F, F̄⁻¹) removes the
/// off-diagonal slots when V comes from `reduce` and F = e^{iα}.
pub fn diagonalize(v: &PotentialMatrix, f: &ScalarField) -> Result<DiagonalPotential> {
    if f.values().iter().any(|x| x.norm() == 0.0) {
        return Err(Error::NonFinite("integrating factor (vanishes)"));
    }
    let q_tilde = v.q_plus.zip_with(f, |q, f| q / f.norm_sqr())?;
    let f_tilde = v.q_minus.zip_with(f, |q, f| q * f.norm_sqr())?;
    Ok(DiagonalPotential { q_tilde, f_tilde })
}

/// Ũ = (F u, F̄⁻¹ ω).
pub fn to_diagonal(u: &SigmaSection, f: &ScalarField) -> Result<SigmaSection> {
    SigmaSection::from_parts(&u.u * f, u.w().zip_with(f, |w, f| w / f.conj())?)
}

/// U = (F⁻¹ ũ, F̄ ω̃).
pub fn undiagonalize(ut: &SigmaSection, f: &ScalarField) -> Result<SigmaSection> {
    SigmaSection::from_parts(&ut.u / f, ut.w().zip_with(f, |w, f| w * f.conj())?)
}

// Orientation sign and radius of each boundary ring.
fn boundary_circles(g: &PolarGrid) -> Vec<(usize, f64, f64)> {
    g.boundary_rings()
        .into_iter()
        .map(|j| (j, g.radii()[j], if g.domain().is_annulus() && j == 0 { -1.0 } else { 1.0 }))
        .collect()
}

/// ∮ ι*(u ⋆ω̄′ - ⋆ω ū′) over the oriented boundary.
pub fn boundary_pairing(u: &SigmaSection, up: &SigmaSection) -> Result<Complex64> {
    let g = u.grid();
    if !g.same_as(up.grid()) {
        return Err(Error::GridMismatch);
    }
    let n = g.n_theta();
    let mut total = zero();
    for (j, r, s) in boundary_circles(g) {
        for k in 0..n {
            let i = j * n + k;
            let e = g.phases()[k];
            let v = u.u.values()[i] * up.omega.c01[i].conj() * e - u.omega.c01[i] * up.u.values()[i].conj() * e.conj();
            total += v * (s * r * g.dtheta());
        }
    }
    Ok(total)
}

/// |⟨(D+V)U, U′⟩ - ⟨U, U′⟩_∂| for U′ solving the adjoint system.
pub fn verify_green(v: &PotentialMatrix, u: &SigmaSection, up: &SigmaSection) -> Result<f64> {
    let lhs = dirac_apply(v, u)?.inner(up)?;
    Ok((lhs - boundary_pairing(u, up)?).norm())
}

/// Interior and boundary forms of the pairing of F₁⁻¹F₂ a (A₁ - A₂) with b.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AuxiliaryReport {
    pub interior: Complex64,
    pub boundary: Complex64,
    /// |boundary + i·interior| / max(|interior|, |boundary|); Stokes gives
    /// boundary = -i·interior.
    pub relative_defect: f64,
}

/// ∫ F₁⁻¹F₂ a (A₁-A₂)∧⋆b̄ and ∮ ι*(F₂F₁⁻¹ a ⋆b̄), with a holomorphic and b an
/// antiholomorphic (0,1)-form.
pub fn auxiliary_functional(
    f1: &ScalarField,
    f2: &ScalarField,
    a1: &OneForm,
    a2: &OneForm,
    a: &ScalarField,
    b: &OneForm,
) -> Result<AuxiliaryReport> {
    let g = f1.grid();
    for other in [f2.grid(), a1.grid(), a2.grid(), a.grid(), b.grid()] {
        if !g.same_as(other) {
            return Err(Error::GridMismatch);
        }
    }
    let ratio = f2 / f1;
    let beta = b.part01();
    let diff = &a1.part01() - &a2.part01();
    let integrand = &(&(&ratio * a) * &diff) * &beta.conj();
    let interior = integrand.integrate() * 2.0;
    let n = g.n_theta();
    let mut boundary = zero();
    for (j, r, s) in boundary_circles(g) {
        for k in 0..n {
            let i = j * n + k;
            boundary += ratio.values()[i] * a.values()[i] * beta.values()[i].conj() * g.phases()[k] * (s * r * g.dtheta());
        }
    }
    let scale = interior.norm().max(boundary.norm());
    let relative_defect = if scale == 0.0 { 0.0 } else { (boundary + I * interior).norm() / scale };
    Ok(AuxiliaryReport { interior, boundary, relative_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{Bump, MagneticSchrodinger, PotentialSpec};
    use crate::geometry::Domain;

    fn spec() -> PotentialSpec {
        PotentialSpec {
            x_bumps: vec![Bump { center: [0.2, -0.1], width: 0.5, amp: [0.6, -0.4] }],
            rot: 0.3,
            q_bumps: vec![Bump { center: [-0.2, 0.3], width: 0.6, amp: [1.0, 0.5] }],
            ..Default::default()
        }
    }

    #[test]
    fn free_operator_kills_holomorphic_and_antiholomorphic_seeds() {
        let g = PolarGrid::new(Domain::disk(1.0), 24, 32).unwrap();
        let a = ScalarField::from_fn(&g, |z| z * z + 1.0);
        let u = SigmaSection::from_parts(a, ScalarField::zeros(&g)).unwrap();
        assert!(dirac_free(&u).l2_norm() < 1e-9);
        let b = ScalarField::from_fn(&g, |z| z.conj().powi(3));
        let u = SigmaSection::from_parts(ScalarField::zeros(&g), b).unwrap();
        assert!(dirac_free(&u).l2_norm() < 1e-9);
    }

    #[test]
    fn lifted_solution_solves_reduced_system() {
        let g = PolarGrid::new(Domain::disk(1.0), 48, 64).unwrap();
        let pot = spec().sample(&g).unwrap();
        let op = MagneticSchrodinger::new(&pot).unwrap();
        let ring: Vec<Complex64> = g.phases().iter().map(|e| e * e + 0.5).collect();
        let bnd = vec![ring];
        let sol = op.solve(&bnd, None).unwrap();
        let red = reduce(&pot).unwrap();
        let u = lift_solution(&sol.u, &pot.x).unwrap();
        let res = dirac_apply(&red.v, &u).unwrap();
        assert!(res.l2_norm() / u.h1_norm() < 1e-3, "{}", res.l2_norm() / u.h1_norm());
        // The diagonal system is solved by the transformed section.
        let diag = diagonalize(&red.v, &red.f).unwrap();
        let ut = to_diagonal(&u, &red.f).unwrap();
        let res_t = dirac_apply(&diag.matrix(), &ut).unwrap();
        assert!(res_t.l2_norm() / ut.h1_norm() < 1e-3);
        let back = undiagonalize(&ut, &red.f).unwrap();
        let err = (&back.u - &u.u).max_abs() + (&back.w() - &u.w()).max_abs();
        assert!(err < 1e-10 * u.u.max_abs());
    }

    #[test]
    fn auxiliary_identity_holds_by_stokes() {
        let g = PolarGrid::new(Domain::disk(1.0), 48, 64).unwrap();
        let p1 = spec().sample(&g).unwrap();
        let p2 = PotentialSpec { x_bumps: vec![Bump { center: [-0.3, 0.2], width: 0.4, amp: [-0.5, 0.7] }], ..spec() }
            .sample(&g)
            .unwrap();
        let (r1, r2) = (reduce(&p1).unwrap(), reduce(&p2).unwrap());
        let a = ScalarField::from_fn(&g, |z| 1.0 + z * 0.5);
        let b = OneForm::from_fns(&g, |_| zero(), |z| z.conj() - 0.3);
        let rep = auxiliary_functional(&r1.f, &r2.f, &p1.x.project01(), &p2.x.project01(), &a, &b).unwrap();
        assert!(rep.interior.norm() > 1e-2, "{rep:?}");
        assert!(rep.relative_defect < 1e-3, "{rep:?}");
    }
}
