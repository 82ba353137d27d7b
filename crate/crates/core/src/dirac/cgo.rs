//! CGO remainders for a diagonal system [Q̃ 0; 0 F̃] with phase Φ/h.
//!
//! The grid covers an enlarged disk N ⊃ M. Extension to N is multiplication
//! by a C² cutoff χ (1 on M, 0 on ∂N) and restriction is the ring prefix.
//! With ψ = Im Φ and e± = e^{±2iψ/h}:
//!
//!   P  w = ∂̄_ψ⁻¹ (w dz̄) = T(e₋ χ w)
//!   P′ v = ∂̄_ψ*⁻¹ v     = -½ conj T(conj(e₊ χ v))   (dz̄ coefficient)
//!   S    = P F̃ P′ Q̃
//!
//! and the remainders solve r + P(F̃ s) = -P(F̃ b), s + P′(Q̃ r) = -P′(Q̃ a).

use std::sync::{Arc, OnceLock};

use faer::prelude::Solve;
use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DiagonalPotential, SigmaSection};
use crate::cauchy::cauchy_transform;
use crate::geometry::{PolarGrid, ScalarField};
use crate::phase::{quintic_cutoff, HolomorphicPhase};
use crate::{Error, Result};

const TERM_TOL: f64 = 1e-12;
const MAX_TERMS: usize = 200;
const CONTRACTION_LIMIT: f64 = 0.9;
const POWER_STEPS: usize = 20;

/// Polynomial seed in powers of (z - c) or its conjugate, degree ≤ 8.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "coefficients", rename_all = "snake_case")]
pub enum Seed {
    /// a(z) = Σ c_k (z - c)^k.
    Holomorphic(Vec<[f64; 2]>),
    /// b = Σ c_k conj(z - c)^k dz̄.
    Antiholomorphic(Vec<[f64; 2]>),
}

impl Seed {
    fn coefficients(&self) -> &[[f64; 2]] {
        match self {
            Seed::Holomorphic(c) | Seed::Antiholomorphic(c) => c,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients().len() > 9 {
            return Err(Error::InvalidParameter("seed polynomials have degree at most 8".into()));
        }
        Ok(())
    }

    /// Sampled a, or the dz̄ coefficient of b.
    pub fn sample(&self, grid: &Arc<PolarGrid>) -> ScalarField {
        let c = grid.domain().center();
        let coef: Vec<Complex64> = self.coefficients().iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let conj = matches!(self, Seed::Antiholomorphic(_));
        ScalarField::from_fn(grid, |z| {
            let w = if conj { (z - c).conj() } else { z - c };
            coef.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * w + k)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OscillatoryKind {
    Dbar,
    DbarStar,
}

/// Discretized remainder problem on N for one (Ṽ, Φ, h).
pub struct CgoProblem {
    grid: Arc<PolarGrid>,
    m_grid: Arc<PolarGrid>,
    chi: Vec<f64>,
    e_minus: Vec<Complex64>,
    q: Vec<Complex64>,
    f: Vec<Complex64>,
    phase: HolomorphicPhase,
    h: f64,
    contraction: OnceLock<f64>,
}

fn norm_on(grid: &PolarGrid, v: &[Complex64]) -> f64 {
    let n = grid.n_theta();
    let w = grid.ring_weights();
    v.iter().enumerate().map(|(i, x)| w[i / n] * x.norm_sqr()).sum::<f64>().sqrt()
}

impl CgoProblem {
    /// `diag` lives on the enlarged disk; M is its first `m_rings` rings.
    pub fn new(diag: &DiagonalPotential, m_rings: usize, phase: &HolomorphicPhase, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("semiclassical parameter h = {h} must be positive")));
        }
        let grid = diag.grid().clone();
        if grid.domain().is_annulus() || m_rings >= grid.n_r() {
            return Err(Error::InvalidDomain("CGO solves need a disk M strictly inside the grid disk".into()));
        }
        let m_grid = grid.restrict_rings(m_rings)?;
        let (r_m, r_n) = (m_grid.domain().r_outer(), grid.domain().r_outer());
        let n = grid.n_theta();
        let chi: Vec<f64> = (0..grid.len()).map(|i| quintic_cutoff((grid.radii()[i / n] - r_m) / (r_n - r_m))).collect();
        let e_minus = grid.points().map(|z| Complex64::from_polar(1.0, -2.0 * phase.psi(z) / h)).collect();
        Ok(Self {
            chi,
            e_minus,
            q: diag.q_tilde.values().to_vec(),
            f: diag.f_tilde.values().to_vec(),
            phase: phase.clone(),
            h,
            m_grid,
            grid,
            contraction: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn m_grid(&self) -> &Arc<PolarGrid> {
        &self.m_grid
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn transform(&self, v: Vec<Complex64>) -> Vec<Complex64> {
        cauchy_transform(&ScalarField::raw(self.grid.clone(), v)).into_values()
    }

    fn p(&self, w: &[Complex64]) -> Vec<Complex64> {
        self.transform((0..w.len()).map(|i| self.e_minus[i] * self.chi[i] * w[i]).collect())
    }

    fn p_star(&self, v: &[Complex64]) -> Vec<Complex64> {
        let t = self.transform((0..v.len()).map(|i| (self.e_minus[i].conj() * self.chi[i] * v[i]).conj()).collect());
        t.into_iter().map(|x| -0.5 * x.conj()).collect()
    }

    // Continuous adjoints of P and P′ for the L²(Λ⁰) and L²(Λ^{0,1}) pairings.
    fn p_adj(&self, g: &[Complex64]) -> Vec<Complex64> {
        let t = self.transform(g.iter().map(|x| x.conj()).collect());
        (0..g.len()).map(|i| -0.5 * self.chi[i] * self.e_minus[i].conj() * t[i].conj()).collect()
    }

    fn p_star_adj(&self, w: &[Complex64]) -> Vec<Complex64> {
        let t = self.transform(w.to_vec());
        (0..w.len()).map(|i| self.chi[i] * self.e_minus[i] * t[i]).collect()
    }

    fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x * y).collect()
    }

    /// S r = P F̃ P′ Q̃ r.
    pub fn apply_s(&self, r: &[Complex64]) -> Vec<Complex64> {
        self.p(&Self::mul(&self.f, &self.p_star(&Self::mul(&self.q, r))))
    }

    fn apply_s_adj(&self, g: &[Complex64]) -> Vec<Complex64> {
        let fbar: Vec<Complex64> = self.f.iter().map(|x| x.conj()).collect();
        let qbar: Vec<Complex64> = self.q.iter().map(|x| x.conj()).collect();
        Self::mul(&qbar, &self.p_star_adj(&Self::mul(&fbar, &self.p_adj(g))))
    }

    /// Lower estimate of ‖S‖ on L²(N): ‖S x‖ after power steps on S*S from
    /// a seeded random start.
    pub fn s_norm_estimate(&self, steps: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x: Vec<Complex64> =
            (0..self.grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mut est = 0.0;
        for _ in 0..steps.max(1) {
            let nx = norm_on(&self.grid, &x);
            if nx == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            let sx = self.apply_s(&x);
            est = norm_on(&self.grid, &sx);
            if est == 0.0 {
                return 0.0;
            }
            x = self.apply_s_adj(&sx);
        }
        est
    }

    /// The ‖S‖ estimate used to accept a Neumann series, computed once.
    pub fn contraction_estimate(&self) -> f64 {
        *self.contraction.get_or_init(|| self.s_norm_estimate(POWER_STEPS, 0x5eed))
    }

    /// ∂̄_ψ⁻¹ω or ∂̄_ψ*⁻¹v for input sampled on N, restricted to M. The
    /// input of the ∂̄ case is the dz̄ coefficient.
    pub fn oscillatory_inverse(&self, input: &ScalarField, kind: OscillatoryKind) -> Result<ScalarField> {
        if !input.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let out = match kind {
            OscillatoryKind::Dbar => self.p(input.values()),
            OscillatoryKind::DbarStar => self.p_star(input.values()),
        };
        ScalarField::raw(self.grid.clone(), out).restrict_to(&self.m_grid)
    }

    // Right-hand side of (I - S) r = rhs and the seed split (a, b).
    fn seed_terms(&self, seed: &Seed) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
        seed.validate()?;
        let sampled = seed.sample(&self.grid).into_values();
        let zeros = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        Ok(match seed {
            Seed::Antiholomorphic(_) => {
                let rhs = self.p(&Self::mul(&self.f, &sampled)).into_iter().map(|x| -x).collect();
                (rhs, zeros, sampled)
            }
            Seed::Holomorphic(_) => (self.apply_s(&sampled), sampled, zeros),
        })
    }

    pub fn solve(&self, seed: &Seed) -> Result<CgoSolution> {
        let (rhs, a, b) = self.seed_terms(seed)?;
        let s_est = self.contraction_estimate();
        if s_est >= CONTRACTION_LIMIT {
            return Err(Error::NeumannDivergent(s_est));
        }
        let rhs_norm = norm_on(&self.grid, &rhs);
        let mut r = rhs.clone();
        let mut term = rhs.clone();
        let mut terms = 1;
        let mut prev = rhs_norm;
        while prev > TERM_TOL * rhs_norm && prev > 0.0 && terms < MAX_TERMS {
            term = self.apply_s(&term);
            let tn = norm_on(&self.grid, &term);
            if terms > 3 && tn >= prev {
                return Err(Error::NeumannDivergent(tn / prev));
            }
            r.iter_mut().zip(&term).for_each(|(x, t)| *x += t);
            prev = tn;
            terms += 1;
        }
        let qa: Vec<Complex64> = (0..r.len()).map(|i| self.q[i] * (r[i] + a[i])).collect();
        let s: Vec<Complex64> = self.p_star(&qa).into_iter().map(|x| -x).collect();
        // Coupled residual r + P(F̃ (s + b)).
        let fs: Vec<Complex64> = (0..r.len()).map(|i| self.f[i] * (s[i] + b[i])).collect();
        let back = self.p(&fs);
        let res: Vec<Complex64> = r.iter().zip(&back).map(|(x, y)| x + y).collect();
        let scale = norm_on(&self.grid, &r).max(rhs_norm);
        let residual = if scale == 0.0 { 0.0 } else { norm_on(&self.grid, &res) / scale };
        let r_f = ScalarField::raw(self.grid.clone(), r);
        let s_f = ScalarField::raw(self.grid.clone(), s);
        let norm_r = r_f.restrict_to(&self.m_grid)?.l2_norm();
        let norm_s = std::f64::consts::SQRT_2 * s_f.restrict_to(&self.m_grid)?.l2_norm();
        Ok(CgoSolution {
            h: self.h,
            seed: seed.clone(),
            r: r_f,
            s: s_f,
            norm_r,
            norm_s,
            s_norm_estimate: s_est,
            terms,
            residual,
        })
    }

    /// Ũ_h e^{-c} on M with c = max_M Re Φ / h, and c. The unscaled section
    /// is (e^{Φ/h}(a + r), e^{Φ̄/h}(b + s)).
    pub fn section(&self, sol: &CgoSolution) -> Result<(SigmaSection, f64)> {
        let m = &self.m_grid;
        let a = match sol.seed {
            Seed::Holomorphic(_) => sol.seed.sample(m),
            _ => ScalarField::zeros(m),
        };
        let b = match sol.seed {
            Seed::Antiholomorphic(_) => sol.seed.sample(m),
            _ => ScalarField::zeros(m),
        };
        let phi: Vec<Complex64> = m.points().map(|z| self.phase.eval(z) / self.h).collect();
        let c = phi.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max);
        let r = sol.r.restrict_to(m)?;
        let s = sol.s.restrict_to(m)?;
        let u: Vec<Complex64> = (0..m.len()).map(|i| (phi[i] - c).exp() * (a.values()[i] + r.values()[i])).collect();
        let w: Vec<Complex64> =
            (0..m.len()).map(|i| (phi[i].conj() - c).exp() * (b.values()[i] + s.values()[i])).collect();
        Ok((SigmaSection::from_parts(ScalarField::new(m.clone(), u)?, ScalarField::new(m.clone(), w)?)?, c))
    }
}

/// Remainders of one CGO build; norms are over M.
#[derive(Clone, Debug)]
pub struct CgoSolution {
    pub h: f64,
    pub seed: Seed,
    /// r_h on N.
    pub r: ScalarField,
    /// dz̄ coefficient of s_h on N.
    pub s: ScalarField,
    pub norm_r: f64,
    pub norm_s: f64,
    pub s_norm_estimate: f64,
    pub terms: usize,
    /// Relative residual of the coupled remainder equations.
    pub residual: f64,
}

/// r from a dense LU solve of (I - S) r = rhs, for grids up to 4096 nodes.
pub fn dense_remainder_oracle(problem: &CgoProblem, seed: &Seed) -> Result<ScalarField> {
    let n = problem.grid.len();
    if n > 4096 {
        return Err(Error::InvalidParameter(format!("dense oracle limited to 4096 nodes, got {n}")));
    }
    let (rhs, _, _) = problem.seed_terms(seed)?;
    let mut m = Mat::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        let col = problem.apply_s(&e);
        for i in 0..n {
            m[(i, j)] = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } - col[i];
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    let b = Mat::<Complex64>::from_fn(n, 1, |i, _| rhs[i]);
    let x = m.partial_piv_lu().solve(&b);
    ScalarField::new(problem.grid.clone(), (0..n).map(|i| x[(i, 0)]).collect())
}
