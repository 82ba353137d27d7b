use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::stencil::{fornberg, gauss_on, lagrange};
use crate::{Error, Result};

/// Planar domain: a disk or a concentric annulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Disk { center: Complex64, radius: f64 },
    Annulus { center: Complex64, r_inner: f64, r_outer: f64 },
}

impl Domain {
    pub fn disk(radius: f64) -> Self {
        Domain::Disk { center: Complex64::new(0.0, 0.0), radius }
    }

    pub fn annulus(r_inner: f64, r_outer: f64) -> Self {
        Domain::Annulus { center: Complex64::new(0.0, 0.0), r_inner, r_outer }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            Domain::Disk { center, .. } | Domain::Annulus { center, .. } => center,
        }
    }

    pub fn r_inner(&self) -> f64 {
        match *self {
            Domain::Disk { .. } => 0.0,
            Domain::Annulus { r_inner, .. } => r_inner,
        }
    }

    pub fn r_outer(&self) -> f64 {
        match *self {
            Domain::Disk { radius, .. } => radius,
            Domain::Annulus { r_outer, .. } => r_outer,
        }
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self, Domain::Annulus { .. })
    }

    pub fn kind(&self) -> &'static str {
        if self.is_annulus() {
            "annulus"
        } else {
            "disk"
        }
    }

    /// Closed-domain membership with a relative slack.
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        let r = (z - self.center()).norm();
        let tol = slack * self.r_outer();
        r <= self.r_outer() + tol && r >= self.r_inner() - tol
    }

    pub fn area(&self) -> f64 {
        PI * (self.r_outer().powi(2) - self.r_inner().powi(2))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Disk { radius, .. } => radius.is_finite() && radius > 0.0,
            Domain::Annulus { r_inner, r_outer, .. } => {
                r_inner.is_finite() && r_outer.is_finite() && r_inner > 0.0 && r_outer > r_inner
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}")))
        }
    }
}

/// One term of a radial stencil. `flip` marks a reflected node across the
/// disk center: the value is read from `ring` at the opposite angle.
#[derive(Clone, Copy, Debug)]
pub struct Tap {
    pub ring: usize,
    pub flip: bool,
    pub w: f64,
}

/// Radial interval with a cubic interpolation stencil, used by the
/// product-integration rules.
#[derive(Clone, Debug)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    pub rings: [usize; 4],
    pub flip: [bool; 4],
    pub xs: [f64; 4],
}

/// Polar sampling of a disk or annulus.
///
/// Disk rings sit at r_j = (j + 1/2) Δr so the last ring is the boundary
/// circle and the center is never sampled; reflected nodes f(-r, θ) =
/// f(r, θ + π) close the stencils there. Annulus rings include both
/// boundary circles. Values are stored ring by ring, `j * n_theta + k`.
pub struct PolarGrid {
    domain: Domain,
    n_r: usize,
    n_theta: usize,
    radii: Vec<f64>,
    dr: f64,
    ring_weights: Vec<f64>,
    thetas: Vec<f64>,
    phases: Vec<Complex64>,
    d1: Vec<Vec<Tap>>,
    d2: Vec<Vec<Tap>>,
    intervals: Vec<Interval>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PolarGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarGrid")
            .field("domain", &self.domain)
            .field("n_r", &self.n_r)
            .field("n_theta", &self.n_theta)
            .finish()
    }
}

impl PolarGrid {
    pub fn new(domain: Domain, n_r: usize, n_theta: usize) -> Result<Arc<Self>> {
        domain.validate()?;
        if n_r < 8 || n_theta < 16 || n_theta % 2 != 0 {
            return Err(Error::GridTooCoarse { n_r, n_theta });
        }
        let (dr, radii) = match domain {
            Domain::Disk { radius, .. } => {
                let dr = radius / (n_r as f64 - 0.5);
                (dr, (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect::<Vec<_>>())
            }
            Domain::Annulus { r_inner, r_outer, .. } => {
                let dr = (r_outer - r_inner) / (n_r as f64 - 1.0);
                (dr, (0..n_r).map(|j| r_inner + j as f64 * dr).collect())
            }
        };
        Ok(Arc::new(Self::build(domain, n_r, n_theta, dr, radii)))
    }

    /// Disk of radius `r_m` sampled with `n_r_m` rings, continued outward by
    /// `extra` rings of the same spacing. The prefix of `n_r_m` rings is
    /// exactly the grid `new(disk(r_m), n_r_m, n_theta)`.
    pub fn disk_extended(center: Complex64, r_m: f64, n_r_m: usize, extra: usize, n_theta: usize) -> Result<Arc<Self>> {
        let dr = r_m / (n_r_m as f64 - 0.5);
        let n_r = n_r_m + extra;
        let radius = (n_r as f64 - 0.5) * dr;
        Self::new(Domain::Disk { center, radius }, n_r, n_theta)
    }

    /// Disk grid made of the first `n_rings` rings of this disk grid.
    pub fn restrict_rings(&self, n_rings: usize) -> Result<Arc<Self>> {
        match self.domain {
            Domain::Disk { center, .. } if n_rings <= self.n_r => {
                let radius = self.radii[n_rings - 1];
                Self::new(Domain::Disk { center, radius }, n_rings, self.n_theta)
            }
            _ => Err(Error::InvalidDomain("ring restriction needs a disk grid".into())),
        }
    }

    fn build(domain: Domain, n_r: usize, n_theta: usize, dr: f64, radii: Vec<f64>) -> Self {
        let thetas: Vec<f64> = (0..n_theta).map(|k| 2.0 * PI * k as f64 / n_theta as f64).collect();
        let phases = thetas.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_theta);
        let ifft = planner.plan_fft_inverse(n_theta);
        let mut g = PolarGrid {
            domain,
            n_r,
            n_theta,
            radii,
            dr,
            ring_weights: Vec::new(),
            thetas,
            phases,
            d1: Vec::new(),
            d2: Vec::new(),
            intervals: Vec::new(),
            fft,
            ifft,
        };
        g.d1 = (0..n_r).map(|j| g.radial_stencil(j, 1)).collect();
        g.d2 = (0..n_r).map(|j| g.radial_stencil(j, 2)).collect();
        g.intervals = g.build_intervals();
        g.ring_weights = g.build_ring_weights();
        g
    }

    fn lowest_node(&self) -> isize {
        if self.domain.is_annulus() {
            0
        } else {
            -(self.n_r as isize)
        }
    }

    // Signed node index: negative indices are reflected rings on the disk.
    fn node(&self, i: isize) -> (usize, bool, f64) {
        if i >= 0 {
            (i as usize, false, self.radii[i as usize])
        } else {
            let ring = (-i - 1) as usize;
            (ring, true, -self.radii[ring])
        }
    }

    fn radial_stencil(&self, j: usize, order: usize) -> Vec<Tap> {
        let (lo, hi) = (self.lowest_node(), self.n_r as isize - 1);
        let j = j as isize;
        let (start, len) = if j - 2 >= lo && j + 2 <= hi {
            (j - 2, 5)
        } else {
            let len = 4 + order as isize;
            ((j - len / 2).clamp(lo, hi + 1 - len), len)
        };
        let nodes: Vec<(usize, bool, f64)> = (start..start + len).map(|i| self.node(i)).collect();
        let xs: Vec<f64> = nodes.iter().map(|n| n.2).collect();
        let w = fornberg(self.radii[j as usize], &xs, order);
        let mut taps: Vec<Tap> = Vec::new();
        for (n, wt) in nodes.iter().zip(&w[order]) {
            if let Some(t) = taps.iter_mut().find(|t| t.ring == n.0 && t.flip == n.1) {
                t.w += wt;
            } else {
                taps.push(Tap { ring: n.0, flip: n.1, w: *wt });
            }
        }
        taps
    }

    fn build_intervals(&self) -> Vec<Interval> {
        let (lo, hi) = (self.lowest_node(), self.n_r as isize - 1);
        let mut out = Vec::with_capacity(self.n_r);
        let mut push = |a: f64, b: f64, start: isize| {
            let mut rings = [0; 4];
            let mut flip = [false; 4];
            let mut xs = [0.0; 4];
            for s in 0..4 {
                let (r, f, x) = self.node(start + s as isize);
                rings[s] = r;
                flip[s] = f;
                xs[s] = x;
            }
            out.push(Interval { a, b, rings, flip, xs });
        };
        if !self.domain.is_annulus() {
            push(0.0, self.radii[0], -2);
        }
        for j in 0..self.n_r - 1 {
            let start = (j as isize - 1).clamp(lo, hi - 3);
            push(self.radii[j], self.radii[j + 1], start);
        }
        out
    }

    // Radial weights for ∫ G(r) dr with G = r f, summed over θ. On the disk G
    // is odd across the center.
    fn build_ring_weights(&self) -> Vec<f64> {
        let mut rw = vec![0.0; self.n_r];
        for iv in &self.intervals {
            for (x, w) in gauss_on(iv.a, iv.b, 4) {
                let l = lagrange(&iv.xs, x);
                for s in 0..4 {
                    let sign = if iv.flip[s] { -1.0 } else { 1.0 };
                    rw[iv.rings[s]] += w * l[s] * sign;
                }
            }
        }
        let dth = 2.0 * PI / self.n_theta as f64;
        rw.iter().zip(&self.radii).map(|(w, r)| w * r * dth).collect()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
    pub fn n_r(&self) -> usize {
        self.n_r
    }
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn dr(&self) -> f64 {
        self.dr
    }
    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
    /// e^{iθ_k}.
    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }
    /// Area weight of every node on ring j (∫ f dA ≈ Σ w_j f_jk).
    pub fn ring_weights(&self) -> &[f64] {
        &self.ring_weights
    }
    pub fn d1_taps(&self, j: usize) -> &[Tap] {
        &self.d1[j]
    }
    pub fn d2_taps(&self, j: usize) -> &[Tap] {
        &self.d2[j]
    }
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Rings lying on the boundary: the outer circle, then the inner one for an annulus.
    pub fn boundary_rings(&self) -> Vec<usize> {
        if self.domain.is_annulus() {
            vec![self.n_r - 1, 0]
        } else {
            vec![self.n_r - 1]
        }
    }

    pub fn is_boundary_ring(&self, j: usize) -> bool {
        j == self.n_r - 1 || (self.domain.is_annulus() && j == 0)
    }

    pub fn point(&self, j: usize, k: usize) -> Complex64 {
        self.domain.center() + self.phases[k] * self.radii[j]
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n_r).flat_map(move |j| (0..self.n_theta).map(move |k| self.point(j, k)))
    }

    /// Same sampling as `other` (same domain and resolution).
    pub fn same_as(&self, other: &PolarGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.domain == other.domain && self.n_r == other.n_r && self.n_theta == other.n_theta)
    }

    /// Signed Fourier mode stored at FFT slot k; slot n/2 is the Nyquist mode.
    pub fn mode(&self, k: usize) -> i64 {
        let n = self.n_theta as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// FFT slot of signed mode m.
    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.n_theta as i64) as usize
    }

    /// Forward DFT of every ring in place (unnormalized).
    pub fn fft_rings(&self, data: &mut [Complex64]) {
        self.fft.process(data);
    }

    /// Inverse DFT of every ring in place, normalized.
    pub fn ifft_rings(&self, data: &mut [Complex64]) {
        self.ifft.process(data);
        let s = 1.0 / self.n_theta as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    /// Index of the value opposite to slot k on the same ring.
    pub fn opposite(&self, k: usize) -> usize {
        (k + self.n_theta / 2) % self.n_theta
    }

    /// Apply a radial stencil set to ring-major data.
    pub fn apply_radial(&self, taps: &[Vec<Tap>], data: &[Complex64], out: &mut [Complex64]) {
        let n = self.n_theta;
        let half = n / 2;
        for (j, row) in taps.iter().enumerate() {
            let o = &mut out[j * n..(j + 1) * n];
            o.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for t in row {
                let src = &data[t.ring * n..(t.ring + 1) * n];
                if t.flip {
                    for k in 0..n {
                        o[k] += src[(k + half) % n] * t.w;
                    }
                } else {
                    for k in 0..n {
                        o[k] += src[k] * t.w;
                    }
                }
            }
        }
    }

    pub fn d1_all(&self) -> &[Vec<Tap>] {
        &self.d1
    }
    pub fn d2_all(&self) -> &[Vec<Tap>] {
        &self.d2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(PolarGrid::new(Domain::disk(1.0), 7, 32), Err(Error::GridTooCoarse { .. })));
        assert!(matches!(PolarGrid::new(Domain::disk(1.0), 16, 15), Err(Error::GridTooCoarse { .. })));
        assert!(PolarGrid::new(Domain::annulus(1.0, 0.5), 16, 16).is_err());
    }

    #[test]
    fn disk_area_weights_integrate_polynomials() {
        let g = PolarGrid::new(Domain::disk(1.3), 40, 32).unwrap();
        let mut area = 0.0;
        let mut r2 = 0.0;
        for j in 0..g.n_r() {
            let w = g.ring_weights()[j] * g.n_theta() as f64;
            area += w;
            r2 += w * g.radii()[j].powi(2);
        }
        assert!((area - PI * 1.69).abs() < 1e-12);
        assert!((r2 - PI * 1.3f64.powi(4) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn annulus_weights_are_fourth_order() {
        let exact = 2.0 * PI * (2f64.powi(7) - 0.5f64.powi(7)) / 7.0;
        let err = |n: usize| {
            let g = PolarGrid::new(Domain::annulus(0.5, 2.0), n, 16).unwrap();
            let s: f64 = (0..n).map(|j| g.ring_weights()[j] * 16.0 * g.radii()[j].powi(5)).sum();
            (s - exact).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn extended_disk_prefix_matches() {
        let big = PolarGrid::disk_extended(Complex64::new(0.0, 0.0), 1.0, 20, 6, 32).unwrap();
        let small = big.restrict_rings(20).unwrap();
        let direct = PolarGrid::new(Domain::disk(1.0), 20, 32).unwrap();
        for j in 0..20 {
            assert!((small.radii()[j] - direct.radii()[j]).abs() < 1e-15);
            assert!((big.radii()[j] - direct.radii()[j]).abs() < 1e-15);
        }
    }
}
