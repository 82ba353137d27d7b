//! Banded LU with partial pivoting and restarted GMRES, both complex.

use num_complex::Complex64;

/// Banded matrix factorized in place. Row r stores columns r-kl ..= r+ku+kl,
/// the extra kl slots absorbing fill-in from row swaps.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    w: usize,
    a: Vec<Complex64>,
    piv: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedLu {
    /// `entries` are (row, col, value); repeated positions add up.
    pub fn factor(n: usize, entries: &[(usize, usize, Complex64)]) -> Self {
        let kl = entries.iter().map(|e| e.0.saturating_sub(e.1)).max().unwrap_or(0);
        let ku = entries.iter().map(|e| e.1.saturating_sub(e.0)).max().unwrap_or(0);
        let w = 2 * kl + ku + 1;
        let mut a = vec![Complex64::new(0.0, 0.0); n * w];
        for &(r, c, v) in entries {
            a[r * w + (c + kl - r)] += v;
        }
        let mut lu = Self { n, kl, ku, w, a, piv: vec![0; n], min_pivot: f64::INFINITY, max_pivot: 0.0 };
        lu.eliminate();
        lu
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> usize {
        r * self.w + (c + self.kl - r)
    }

    fn eliminate(&mut self) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.a[self.at(k, k)].norm();
            for r in k + 1..=last {
                let v = self.a[self.at(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            self.piv[k] = p;
            let cmax = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (i, j) = (self.at(k, c), self.at(p, c));
                    self.a.swap(i, j);
                }
            }
            let d = self.a[self.at(k, k)];
            self.min_pivot = self.min_pivot.min(d.norm());
            self.max_pivot = self.max_pivot.max(d.norm());
            if d.norm() == 0.0 {
                continue;
            }
            for r in k + 1..=last {
                let ir = self.at(r, k);
                let l = self.a[ir] / d;
                self.a[ir] = l;
                if l.norm() == 0.0 {
                    continue;
                }
                for c in k + 1..=cmax {
                    let v = self.a[self.at(k, c)];
                    let i = self.at(r, c);
                    self.a[i] -= l * v;
                }
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] -= self.a[self.at(r, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.a[self.at(k, c)] * b[c];
            }
            b[k] = s / self.a[self.at(k, k)];
        }
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.max_pivot / self.min_pivot
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug)]
pub struct GmresStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Right-preconditioned restarted GMRES for A x = b. `apply` computes A v,
/// `precond` overwrites v with P⁻¹ v.
pub fn gmres(
    apply: &mut dyn FnMut(&[Complex64], &mut [Complex64]),
    precond: &mut dyn FnMut(&mut [Complex64]),
    b: &[Complex64],
    x: &mut [Complex64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresStats {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        return GmresStats { iterations: 0, relative_residual: 0.0 };
    }
    let mut total = 0;
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut rel;
    loop {
        apply(x, &mut tmp);
        let r: Vec<Complex64> = b.iter().zip(&tmp).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol || total >= max_iter {
            return GmresStats { iterations: total, relative_residual: rel };
        }
        let mut v: Vec<Vec<Complex64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![Complex64::new(0.0, 0.0); restart]; restart + 1];
        let mut cs = vec![Complex64::new(0.0, 0.0); restart];
        let mut sn = vec![Complex64::new(0.0, 0.0); restart];
        let mut g = vec![Complex64::new(0.0, 0.0); restart + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_done = 0;
        for k in 0..restart {
            let mut z = v[k].clone();
            precond(&mut z);
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            apply(&z, &mut w);
            for i in 0..=k {
                let hik = dot(&v[i], &w);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= hik * vj;
                }
            }
            // One reorthogonalization pass keeps long cycles stable.
            for i in 0..=k {
                let c = dot(&v[i], &w);
                h[i][k] += c;
                for (wj, vj) in w.iter_mut().zip(&v[i]) {
                    *wj -= c * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = Complex64::new(hn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let den = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if den == 0.0 {
                k_done = k;
                break;
            }
            cs[k] = a / den;
            sn[k] = bb / den;
            h[k][k] = Complex64::new(den, 0.0);
            h[k + 1][k] = Complex64::new(0.0, 0.0);
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            total += 1;
            k_done = k + 1;
            let res = g[k + 1].norm() / bnorm;
            if res <= tol * 0.5 || hn == 0.0 || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![Complex64::new(0.0, 0.0); k_done];
        for i in (0..k_done).rev() {
            let mut s = g[i];
            for j in i + 1..k_done {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut upd = vec![Complex64::new(0.0, 0.0); n];
        for (yi, vi) in y.iter().zip(&v) {
            for (u, vv) in upd.iter_mut().zip(vi) {
                *u += yi * vv;
            }
        }
        precond(&mut upd);
        for (xi, u) in x.iter_mut().zip(&upd) {
            *xi += u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_lu_solves_with_pivoting() {
        let n = 40;
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, Complex64::new(if i % 7 == 0 { 1e-3 } else { 2.0 }, 0.3)));
            if i + 1 < n {
                e.push((i, i + 1, Complex64::new(-1.0, 0.0)));
                e.push((i + 1, i, Complex64::new(-1.5, 0.2)));
            }
            if i + 3 < n {
                e.push((i + 3, i, Complex64::new(0.4, 0.0)));
            }
        }
        let lu = BandedLu::factor(n, &e);
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for &(r, c, v) in &e {
            b[r] += v * x[c];
        }
        lu.solve_in_place(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn gmres_converges_on_nonnormal_system() {
        let n = 60;
        let a = |v: &[Complex64], out: &mut [Complex64]| {
            for i in 0..n {
                out[i] = v[i] * (3.0 + i as f64 * 0.05) + if i + 1 < n { v[i + 1] * 1.2 } else { Complex64::new(0.0, 0.0) };
            }
        };
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, i as f64 * 0.1)).collect();
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        let st = gmres(&mut { a }, &mut |_| {}, &b, &mut x, 1e-12, 20, 500);
        assert!(st.relative_residual < 1e-12);
        let mut ax = vec![Complex64::new(0.0, 0.0); n];
        a(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }
}
