use std::sync::Arc;

use num_complex::Complex64;

use super::grid::PolarGrid;
use crate::{Error, Result};

fn check_finite(v: &[Complex64], what: &'static str) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn same(a: &PolarGrid, b: &PolarGrid) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Complex function sampled on a polar grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<PolarGrid>,
    values: Vec<Complex64>,
}

impl ScalarField {
    pub fn new(grid: Arc<PolarGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DataMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        check_finite(&values, "scalar field")?;
        Ok(Self { grid, values })
    }

    pub(crate) fn raw(grid: Arc<PolarGrid>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: &Arc<PolarGrid>, c: Complex64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: grid.clone(), values: grid.points().map(f).collect() }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn at(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.grid.n_theta() + k]
    }
    pub fn ring(&self, j: usize) -> &[Complex64] {
        let n = self.grid.n_theta();
        &self.values[j * n..(j + 1) * n]
    }

    pub fn is_finite(&self) -> bool {
        check_finite(&self.values, "").is_ok()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// Pointwise map with access to the node position.
    pub fn map_with_point(&self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let values = self.grid.points().zip(&self.values).map(|(z, v)| f(z, *v)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        same(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// ∫ f dA.
    pub fn integrate(&self) -> Complex64 {
        let n = self.grid.n_theta();
        let mut s = Complex64::new(0.0, 0.0);
        for (j, w) in self.grid.ring_weights().iter().enumerate() {
            let ring: Complex64 = self.values[j * n..(j + 1) * n].iter().sum();
            s += ring * *w;
        }
        s
    }

    /// ∫ |f|^p dA.
    pub fn integrate_abs_pow(&self, p: f64) -> f64 {
        let n = self.grid.n_theta();
        let mut s = 0.0;
        for (j, w) in self.grid.ring_weights().iter().enumerate() {
            let ring: f64 = self.values[j * n..(j + 1) * n].iter().map(|v| v.norm().powf(p)).sum();
            s += ring * w;
        }
        s
    }

    pub fn l2_norm(&self) -> f64 {
        self.integrate_abs_pow(2.0).max(0.0).sqrt()
    }

    /// Copy onto the first rings of a coarser-outside grid sharing the same spacing.
    pub fn restrict_to(&self, grid: &Arc<PolarGrid>) -> Result<Self> {
        if grid.n_theta() != self.grid.n_theta() || grid.n_r() > self.grid.n_r() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid: grid.clone(), values: self.values[..grid.len()].to_vec() })
    }

    /// Zero-extend onto an outward continuation of this grid.
    pub fn extend_to(&self, grid: &Arc<PolarGrid>) -> Result<Self> {
        if grid.n_theta() != self.grid.n_theta() || grid.n_r() < self.grid.n_r() {
            return Err(Error::GridMismatch);
        }
        let mut values = self.values.clone();
        values.resize(grid.len(), Complex64::new(0.0, 0.0));
        Ok(Self { grid: grid.clone(), values })
    }

    /// Bicubic value at an arbitrary point of the domain.
    pub fn interp(&self, z: Complex64) -> Complex64 {
        super::interp::interpolate(&self.grid, &self.values, z)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl std::ops::$tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                self.zip_with(rhs, |a, b| a $op b).expect("fields on different grids")
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

/// u dz + v dz̄ on a polar grid.
#[derive(Clone, Debug)]
pub struct OneForm {
    grid: Arc<PolarGrid>,
    pub c10: Vec<Complex64>,
    pub c01: Vec<Complex64>,
}

impl OneForm {
    pub fn new(grid: Arc<PolarGrid>, c10: Vec<Complex64>, c01: Vec<Complex64>) -> Result<Self> {
        if c10.len() != grid.len() || c01.len() != grid.len() {
            return Err(Error::DataMismatch("one-form coefficient length".into()));
        }
        check_finite(&c10, "one-form (1,0) part")?;
        check_finite(&c01, "one-form (0,1) part")?;
        Ok(Self { grid, c10, c01 })
    }

    pub(crate) fn raw(grid: Arc<PolarGrid>, c10: Vec<Complex64>, c01: Vec<Complex64>) -> Self {
        Self { grid, c10, c01 }
    }

    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid: grid.clone(), c10: z.clone(), c01: z }
    }

    pub fn from_parts(u: &ScalarField, v: &ScalarField) -> Result<Self> {
        same(u.grid(), v.grid())?;
        Ok(Self { grid: u.grid().clone(), c10: u.values().to_vec(), c01: v.values().to_vec() })
    }

    pub fn from_fns(
        grid: &Arc<PolarGrid>,
        u: impl Fn(Complex64) -> Complex64,
        v: impl Fn(Complex64) -> Complex64,
    ) -> Self {
        Self { grid: grid.clone(), c10: grid.points().map(u).collect(), c01: grid.points().map(v).collect() }
    }

    /// Real 1-form with dz̄ coefficient `a`: ā dz + a dz̄.
    pub fn real_from_01(a: &ScalarField) -> Self {
        Self {
            grid: a.grid().clone(),
            c10: a.values().iter().map(|v| v.conj()).collect(),
            c01: a.values().to_vec(),
        }
    }

    /// Real 1-form from Cartesian components X_x dx + X_y dy.
    pub fn from_xy(grid: &Arc<PolarGrid>, x: impl Fn(Complex64) -> (f64, f64)) -> Self {
        let mut c10 = Vec::with_capacity(grid.len());
        let mut c01 = Vec::with_capacity(grid.len());
        for z in grid.points() {
            let (ax, ay) = x(z);
            let a = Complex64::new(ax, ay) * 0.5;
            c10.push(a.conj());
            c01.push(a);
        }
        Self { grid: grid.clone(), c10, c01 }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn part10(&self) -> ScalarField {
        ScalarField::raw(self.grid.clone(), self.c10.clone())
    }
    pub fn part01(&self) -> ScalarField {
        ScalarField::raw(self.grid.clone(), self.c01.clone())
    }

    pub fn project01(&self) -> Self {
        Self { grid: self.grid.clone(), c10: vec![Complex64::new(0.0, 0.0); self.grid.len()], c01: self.c01.clone() }
    }
    pub fn project10(&self) -> Self {
        Self { grid: self.grid.clone(), c10: self.c10.clone(), c01: vec![Complex64::new(0.0, 0.0); self.grid.len()] }
    }

    /// Complex conjugate form: conj(u dz + v dz̄) = v̄ dz + ū dz̄.
    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            c10: self.c01.iter().map(|v| v.conj()).collect(),
            c01: self.c10.iter().map(|v| v.conj()).collect(),
        }
    }

    /// max |X_{1,0} - conj(X_{0,1})|, zero for real forms.
    pub fn reality_defect(&self) -> f64 {
        self.c10.iter().zip(&self.c01).fold(0.0, |m, (a, b)| m.max((a - b.conj()).norm()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            c10: self.c10.iter().map(|v| v * s).collect(),
            c01: self.c01.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul_scalar(&self, f: &ScalarField) -> Result<Self> {
        same(&self.grid, f.grid())?;
        Ok(Self {
            grid: self.grid.clone(),
            c10: self.c10.iter().zip(f.values()).map(|(a, b)| a * b).collect(),
            c01: self.c01.iter().zip(f.values()).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        same(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            c10: self.c10.iter().zip(&other.c10).map(|(a, b)| f(*a, *b)).collect(),
            c01: self.c01.iter().zip(&other.c01).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.c10.iter().chain(&self.c01).fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Pointwise |ω|² in the metric where |dz|² = 2.
    pub fn pointwise_norm_sq(&self) -> ScalarField {
        let v = self.c10.iter().zip(&self.c01).map(|(a, b)| Complex64::new(2.0 * (a.norm_sqr() + b.norm_sqr()), 0.0)).collect();
        ScalarField::raw(self.grid.clone(), v)
    }

    pub fn l2_norm(&self) -> f64 {
        self.pointwise_norm_sq().integrate().re.max(0.0).sqrt()
    }

    /// Value on a tangent vector t = t_x + i t_y: u t + v t̄.
    pub fn pair_vector(&self, idx: usize, t: Complex64) -> Complex64 {
        self.c10[idx] * t + self.c01[idx] * t.conj()
    }

    pub fn restrict_to(&self, grid: &Arc<PolarGrid>) -> Result<Self> {
        Ok(Self {
            grid: grid.clone(),
            c10: self.part10().restrict_to(grid)?.into_values(),
            c01: self.part01().restrict_to(grid)?.into_values(),
        })
    }

    pub fn extend_to(&self, grid: &Arc<PolarGrid>) -> Result<Self> {
        Ok(Self {
            grid: grid.clone(),
            c10: self.part10().extend_to(grid)?.into_values(),
            c01: self.part01().extend_to(grid)?.into_values(),
        })
    }
}

impl std::ops::Add<&OneForm> for &OneForm {
    type Output = OneForm;
    fn add(self, rhs: &OneForm) -> OneForm {
        self.zip_with(rhs, |a, b| a + b).expect("forms on different grids")
    }
}
impl std::ops::Sub<&OneForm> for &OneForm {
    type Output = OneForm;
    fn sub(self, rhs: &OneForm) -> OneForm {
        self.zip_with(rhs, |a, b| a - b).expect("forms on different grids")
    }
}

/// c dz∧dz̄ on a polar grid.
#[derive(Clone, Debug)]
pub struct TwoForm {
    grid: Arc<PolarGrid>,
    pub c: Vec<Complex64>,
}

impl TwoForm {
    pub fn new(grid: Arc<PolarGrid>, c: Vec<Complex64>) -> Result<Self> {
        if c.len() != grid.len() {
            return Err(Error::DataMismatch("two-form coefficient length".into()));
        }
        check_finite(&c, "two-form")?;
        Ok(Self { grid, c })
    }

    pub(crate) fn raw(grid: Arc<PolarGrid>, c: Vec<Complex64>) -> Self {
        Self { grid, c }
    }

    pub fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    pub fn coefficient(&self) -> ScalarField {
        ScalarField::raw(self.grid.clone(), self.c.clone())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        same(&self.grid, &other.grid)?;
        Ok(Self { grid: self.grid.clone(), c: self.c.iter().zip(&other.c).map(|(a, b)| f(*a, *b)).collect() })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { grid: self.grid.clone(), c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// L² norm with |dz∧dz̄|² = 4.
    pub fn l2_norm(&self) -> f64 {
        2.0 * self.coefficient().l2_norm()
    }

    pub fn restrict_to(&self, grid: &Arc<PolarGrid>) -> Result<Self> {
        Ok(Self { grid: grid.clone(), c: self.coefficient().restrict_to(grid)?.into_values() })
    }
}

impl std::ops::Add<&TwoForm> for &TwoForm {
    type Output = TwoForm;
    fn add(self, rhs: &TwoForm) -> TwoForm {
        self.zip_with(rhs, |a, b| a + b).expect("forms on different grids")
    }
}
impl std::ops::Sub<&TwoForm> for &TwoForm {
    type Output = TwoForm;
    fn sub(self, rhs: &TwoForm) -> TwoForm {
        self.zip_with(rhs, |a, b| a - b).expect("forms on different grids")
    }
}
