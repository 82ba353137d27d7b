//! Holomorphic phases Φ with ψ = Im Φ: critical points, Morse data,
//! exclusion neighbourhoods and brute-force stationary phase.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::Serialize;

use crate::geometry::Domain;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PhaseKind {
    /// (z - a)²
    Base,
    /// ((z - a)² - (p̂ - a)²)²
    Squared,
    Custom,
}

/// Critical point of Φ with its complex Hessian Φ''.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CriticalPoint {
    pub z: Complex64,
    pub hessian: Complex64,
}

impl CriticalPoint {
    /// |∂²_z ψ| = |Φ''| / 2, the scale entering the leading stationary term.
    pub fn psi_hessian(&self) -> f64 {
        0.5 * self.hessian.norm()
    }
}

/// Polynomial phase with known critical points.
#[derive(Clone, Debug, Serialize)]
pub struct HolomorphicPhase {
    kind: PhaseKind,
    anchor: Complex64,
    p_hat: Option<Complex64>,
    /// Coefficients in powers of (z - anchor), lowest first.
    coeffs: Vec<Complex64>,
    critical: Vec<CriticalPoint>,
}

fn horner(c: &[Complex64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, k| acc * w + k)
}

fn deriv(c: &[Complex64]) -> Vec<Complex64> {
    c.iter().enumerate().skip(1).map(|(k, v)| v * k as f64).collect()
}

impl HolomorphicPhase {
    /// Φ(z) = (z - a)².
    pub fn base(a: Complex64) -> Self {
        let z0 = Complex64::new(0.0, 0.0);
        Self {
            kind: PhaseKind::Base,
            anchor: a,
            p_hat: None,
            coeffs: vec![z0, z0, Complex64::new(1.0, 0.0)],
            critical: vec![CriticalPoint { z: a, hessian: Complex64::new(2.0, 0.0) }],
        }
    }

    /// Φ(z) = ((z - a)² - (p̂ - a)²)², refusing p̂ inside the √δ ball around a.
    pub fn squared(a: Complex64, p_hat: Complex64, delta: f64) -> Result<Self> {
        let d = (p_hat - a).norm();
        let radius = delta.sqrt();
        if d < radius || d == 0.0 {
            return Err(Error::InsideExclusion { re: p_hat.re, im: p_hat.im, distance: d, radius });
        }
        let b = (p_hat - a) * (p_hat - a);
        let z0 = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        Ok(Self {
            kind: PhaseKind::Squared,
            anchor: a,
            p_hat: Some(p_hat),
            coeffs: vec![b * b, z0, -2.0 * b, z0, one],
            critical: vec![
                CriticalPoint { z: a, hessian: -4.0 * b },
                CriticalPoint { z: p_hat, hessian: 8.0 * b },
                CriticalPoint { z: 2.0 * a - p_hat, hessian: 8.0 * b },
            ],
        })
    }

    pub fn kind(&self) -> PhaseKind {
        self.kind
    }
    pub fn anchor(&self) -> Complex64 {
        self.anchor
    }
    pub fn p_hat(&self) -> Option<Complex64> {
        self.p_hat
    }
    pub fn critical_points(&self) -> &[CriticalPoint] {
        &self.critical
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.coeffs, z - self.anchor)
    }
    pub fn d1(&self, z: Complex64) -> Complex64 {
        horner(&deriv(&self.coeffs), z - self.anchor)
    }
    pub fn d2(&self, z: Complex64) -> Complex64 {
        horner(&deriv(&deriv(&self.coeffs)), z - self.anchor)
    }
    /// ψ = Im Φ.
    pub fn psi(&self, z: Complex64) -> f64 {
        self.eval(z).im
    }

    /// Critical points inside the closed domain.
    pub fn critical_in(&self, domain: &Domain) -> Vec<CriticalPoint> {
        self.critical.iter().copied().filter(|c| domain.contains(c.z, 0.0)).collect()
    }

    /// Morse data on a domain: smallest |Φ''| over the critical points inside,
    /// and the worst relative mismatch between the recorded Hessians and a
    /// central difference of Φ'.
    pub fn morse_certificate(&self, domain: &Domain) -> Result<MorseCertificate> {
        let inside = self.critical_in(domain);
        let mut min_h = f64::INFINITY;
        let mut fd_mismatch = 0.0f64;
        for c in &inside {
            let hn = c.hessian.norm();
            if hn < 1e-12 {
                return Err(Error::NotMorse { hessian: hn, re: c.z.re, im: c.z.im });
            }
            min_h = min_h.min(hn);
            let e = 1e-4 * domain.r_outer();
            let fd = (self.d1(c.z + e) - self.d1(c.z - e)) / (2.0 * e);
            fd_mismatch = fd_mismatch.max((fd - c.hessian).norm() / hn);
            if self.d1(c.z).norm() > 1e-10 * hn.max(1.0) {
                return Err(Error::NotMorse { hessian: hn, re: c.z.re, im: c.z.im });
            }
        }
        Ok(MorseCertificate { critical: inside, min_hessian: min_h, fd_mismatch })
    }

    /// Union of the components of {|Φ - Φ(ẑ)| < δ} around each critical point ẑ,
    /// approximated by balls of radius √(2δ/|Φ''(ẑ)|). For the base phase
    /// this is the ball of radius √δ around a.
    pub fn exclusion_set(&self, delta: f64) -> ExclusionSet {
        let balls = match self.kind {
            PhaseKind::Base => vec![(self.anchor, delta.sqrt())],
            _ => self.critical.iter().map(|c| (c.z, (2.0 * delta / c.hessian.norm()).sqrt())).collect(),
        };
        ExclusionSet { balls }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MorseCertificate {
    pub critical: Vec<CriticalPoint>,
    pub min_hessian: f64,
    pub fd_mismatch: f64,
}

/// Finite union of open balls.
#[derive(Clone, Debug, Serialize)]
pub struct ExclusionSet {
    pub balls: Vec<(Complex64, f64)>,
}

impl ExclusionSet {
    pub fn contains(&self, z: Complex64) -> bool {
        self.balls.iter().any(|(c, r)| (z - c).norm() < *r)
    }
}

/// C² quintic step: 1 for t ≤ 0, 0 for t ≥ 1.
pub fn quintic_cutoff(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Amplitude supported in the disk |z - center| ≤ radius.
pub struct Amplitude<'a> {
    f: Box<dyn Fn(Complex64) -> Complex64 + 'a>,
    pub center: Complex64,
    pub radius: f64,
}

impl<'a> Amplitude<'a> {
    /// `f` must already vanish outside the support disk.
    pub fn new(f: impl Fn(Complex64) -> Complex64 + 'a, center: Complex64, radius: f64) -> Self {
        Self { f: Box::new(f), center, radius }
    }

    /// `f` multiplied by a cutoff equal to 1 on the inner half of the disk.
    pub fn with_cutoff(f: impl Fn(Complex64) -> Complex64 + 'a, center: Complex64, radius: f64) -> Self {
        Self::new(
            move |z| {
                let t = ((z - center).norm() / radius - 0.5) * 2.0;
                let chi = quintic_cutoff(t);
                if chi == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    f(z) * chi
                }
            },
            center,
            radius,
        )
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.f)(z)
    }

    /// max(|u|, |∇u|, |∇²u|) sampled on a 201² lattice.
    pub fn w2inf(&self) -> f64 {
        let m = 201;
        let s = 2.0 * self.radius / (m - 1) as f64;
        let e = 1e-3 * self.radius;
        let mut best = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let z = self.center + Complex64::new(-self.radius + a as f64 * s, -self.radius + b as f64 * s);
                let u = self.eval(z);
                let (dx, dy) = (Complex64::new(e, 0.0), Complex64::new(0.0, e));
                let ux = (self.eval(z + dx) - self.eval(z - dx)) / (2.0 * e);
                let uy = (self.eval(z + dy) - self.eval(z - dy)) / (2.0 * e);
                let uxx = (self.eval(z + dx) - 2.0 * u + self.eval(z - dx)) / (e * e);
                let uyy = (self.eval(z + dy) - 2.0 * u + self.eval(z - dy)) / (e * e);
                let uxy = (self.eval(z + dx + dy) - self.eval(z + dx - dy) - self.eval(z - dx + dy) + self.eval(z - dx - dy))
                    / (4.0 * e * e);
                for v in [u.norm(), ux.norm(), uy.norm(), uxx.norm(), uyy.norm(), uxy.norm()] {
                    best = best.max(v);
                }
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StationaryMode {
    /// Brute integral and the bound h ‖u‖_{W^{2,∞}} / δ with unit constant.
    Bound { delta: f64 },
    /// Brute integral and the leading term c h u(ẑ) e^{2iψ(ẑ)/h} / |∂²_z ψ(ẑ)|.
    Leading,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StationaryReport {
    pub h: f64,
    pub integral: Complex64,
    pub critical: Complex64,
    pub leading: Option<Complex64>,
    /// |integral - leading|.
    pub residual: Option<f64>,
    pub bound: Option<f64>,
    pub points_per_side: usize,
}

/// ∫ u e^{2iψ/h} dA by the tensor trapezoid rule on the bounding square of
/// the amplitude support. The spacing resolves the local wavenumber on the
/// inner half of the support twice over, with at least 2048 points per side.
pub fn oscillatory_integral(amp: &Amplitude, phase: &HolomorphicPhase, h: f64) -> (Complex64, usize) {
    let mut kmax = 0.0f64;
    for t in 0..256 {
        let z = amp.center + Complex64::from_polar(0.5 * amp.radius, 2.0 * PI * t as f64 / 256.0);
        kmax = kmax.max(2.0 * phase.d1(z).norm() / h);
    }
    let side = 2.0 * amp.radius;
    let spacing = (side / 2048.0).min(PI / (2.0 * kmax.max(1e-300)));
    let n = ((side / spacing).ceil() as usize).clamp(2048, 20000);
    oscillatory_integral_n(amp, phase, h, n)
}

pub fn oscillatory_integral_n(amp: &Amplitude, phase: &HolomorphicPhase, h: f64, n: usize) -> (Complex64, usize) {
    let side = 2.0 * amp.radius;
    let s = side / n as f64;
    let x0 = amp.center.re - amp.radius;
    let y0 = amp.center.im - amp.radius;
    let r2 = amp.radius * amp.radius;
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..=n {
        let x = x0 + a as f64 * s;
        let mut row = Complex64::new(0.0, 0.0);
        for b in 0..=n {
            let z = Complex64::new(x, y0 + b as f64 * s);
            if (z - amp.center).norm_sqr() > r2 {
                continue;
            }
            let u = amp.eval(z);
            if u.re == 0.0 && u.im == 0.0 {
                continue;
            }
            row += u * Complex64::from_polar(1.0, 2.0 * phase.psi(z) / h);
        }
        total += row;
    }
    (total * s * s, n)
}

/// Leading-order constant c for ψ = Im z² with |∂²_z ψ| = 1, calibrated by
/// Richardson extrapolation of brute integrals of e^{-|z|²}.
pub fn leading_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let ph = HolomorphicPhase::base(Complex64::new(0.0, 0.0));
        let amp = Amplitude::with_cutoff(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0), Complex64::new(0.0, 0.0), 8.0);
        let (h1, h2) = (0.1, 0.05);
        let i1 = oscillatory_integral_n(&amp, &ph, h1, 2048).0.re / h1;
        let i2 = oscillatory_integral_n(&amp, &ph, h2, 2048).0.re / h2;
        (4.0 * i2 - i1) / 3.0
    })
}

/// Brute-force oscillatory integral with either the bound or the leading term.
pub fn stationary_phase_eval(
    amp: &Amplitude,
    phase: &HolomorphicPhase,
    h: f64,
    mode: StationaryMode,
) -> Result<StationaryReport> {
    let inside: Vec<&CriticalPoint> =
        phase.critical_points().iter().filter(|c| (c.z - amp.center).norm() <= amp.radius).collect();
    if inside.len() != 1 {
        let d = phase
            .critical_points()
            .iter()
            .map(|c| (c.z - amp.center).norm())
            .filter(|d| *d <= amp.radius)
            .fold(f64::INFINITY, f64::min);
        return Err(Error::SupportHitsCritical(d));
    }
    let cp = *inside[0];
    if cp.hessian.norm() < 1e-12 {
        return Err(Error::NotMorse { hessian: cp.hessian.norm(), re: cp.z.re, im: cp.z.im });
    }
    let (integral, n) = oscillatory_integral(amp, phase, h);
    let mut rep = StationaryReport {
        h,
        integral,
        critical: cp.z,
        leading: None,
        residual: None,
        bound: None,
        points_per_side: n,
    };
    match mode {
        StationaryMode::Leading => {
            let lead = leading_constant() * h * amp.eval(cp.z) * Complex64::from_polar(1.0, 2.0 * phase.psi(cp.z) / h)
                / cp.psi_hessian();
            rep.leading = Some(lead);
            rep.residual = Some((integral - lead).norm());
        }
        StationaryMode::Bound { delta } => {
            rep.bound = Some(h * amp.w2inf() / delta);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squared_phase_hessians_and_refusal() {
        let a = Complex64::new(0.1, -0.2);
        let p = a + Complex64::new(0.3, 0.1);
        let ph = HolomorphicPhase::squared(a, p, 0.04).unwrap();
        let cert = ph.morse_certificate(&Domain::disk(2.0)).unwrap();
        assert_eq!(cert.critical.len(), 3);
        assert!(cert.fd_mismatch < 1e-6);
        let b = (p - a) * (p - a);
        assert!((cert.min_hessian - 4.0 * b.norm()).abs() < 1e-12);
        assert!(matches!(
            HolomorphicPhase::squared(a, a + Complex64::new(0.1, 0.0), 0.04),
            Err(Error::InsideExclusion { .. })
        ));
    }

    #[test]
    fn base_exclusion_ball_has_radius_sqrt_delta() {
        let ph = HolomorphicPhase::base(Complex64::new(0.2, 0.0));
        let ex = ph.exclusion_set(0.09);
        assert!((ex.balls[0].1 - 0.3).abs() < 1e-15);
        assert!(ex.contains(Complex64::new(0.49, 0.0)));
        assert!(!ex.contains(Complex64::new(0.51, 0.0)));
    }

    #[test]
    fn calibrated_constant_is_half_pi() {
        assert!((leading_constant() - PI / 2.0).abs() < 1e-5, "{}", leading_constant());
    }

    #[test]
    fn gaussian_integral_matches_closed_form() {
        // ∫ e^{-r²} e^{4ixy/h} dA = π / √(1 + 4/h²).
        let ph = HolomorphicPhase::base(Complex64::new(0.0, 0.0));
        let amp = Amplitude::with_cutoff(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0), Complex64::new(0.0, 0.0), 12.0);
        let h = 0.1;
        let (v, _) = oscillatory_integral(&amp, &ph, h);
        let exact = PI / (1.0 + 4.0 / (h * h)).sqrt();
        assert!((v.re - exact).abs() < 1e-10 && v.im.abs() < 1e-10, "{v} {exact}");
    }
}
