use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use ndarray::Array2;

use super::chart::Chart;
use crate::error::{Error, Result};

pub(crate) fn check_same(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) {
        Ok(())
    } else {
        Err(Error::ChartMismatch)
    }
}

/// Grid-sampled function.
#[derive(Debug, Clone)]
pub struct ScalarField {
    chart: Arc<Chart>,
    pub values: Array2<f64>,
}

/// Grid-sampled vector field in contravariant chart components.
#[derive(Debug, Clone)]
pub struct VectorField {
    chart: Arc<Chart>,
    pub comps: [Array2<f64>; 2],
}

/// (1,1) tensor field, `comps[k][i]` = T^k_i.
#[derive(Debug, Clone)]
pub struct Tensor11Field {
    chart: Arc<Chart>,
    pub comps: [[Array2<f64>; 2]; 2],
}

/// (1,2) tensor field, `comps[k][i][j]` = T^k_{ij}. Used for second
/// covariant derivatives u^k_{;ij}, where j is the later derivative.
#[derive(Debug, Clone)]
pub struct Tensor12Field {
    chart: Arc<Chart>,
    pub comps: [[[Array2<f64>; 2]; 2]; 2],
}

impl ScalarField {
    pub fn new(chart: &Arc<Chart>, values: Array2<f64>) -> Self {
        assert_eq!(values.dim(), chart.shape(), "scalar field shape does not match chart");
        ScalarField { chart: chart.clone(), values }
    }

    pub fn zeros(chart: &Arc<Chart>) -> Self {
        Self::new(chart, Array2::zeros(chart.shape()))
    }

    pub fn constant(chart: &Arc<Chart>, c: f64) -> Self {
        Self::new(chart, Array2::from_elem(chart.shape(), c))
    }

    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(chart, chart.sample(f))
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(&self.chart, &self.values * a)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ScalarField) -> Self {
        Self::new(&self.chart, &self.values * &other.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl VectorField {
    pub fn new(chart: &Arc<Chart>, comps: [Array2<f64>; 2]) -> Self {
        for c in &comps {
            assert_eq!(c.dim(), chart.shape(), "vector component shape does not match chart");
        }
        VectorField { chart: chart.clone(), comps }
    }

    pub fn zeros(chart: &Arc<Chart>) -> Self {
        Self::new(chart, [Array2::zeros(chart.shape()), Array2::zeros(chart.shape())])
    }

    /// Samples `f(lon, lat) -> (u¹, u²)`.
    pub fn from_fn(chart: &Arc<Chart>, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let a = chart.sample(|x, y| f(x, y).0);
        let b = chart.sample(|x, y| f(x, y).1);
        Self::new(chart, [a, b])
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(&self.chart, [&self.comps[0] * a, &self.comps[1] * a])
    }

    /// Multiplies by a scalar field pointwise.
    pub fn scale_by(&self, f: &ScalarField) -> Self {
        Self::new(&self.chart, [&self.comps[0] * &f.values, &self.comps[1] * &f.values])
    }

    /// Pointwise metric inner product g(u, v).
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let g = &self.chart.metric().g;
        let mut out = Array2::zeros(self.chart.shape());
        for i in 0..2 {
            for j in 0..2 {
                out = out + &(&g[i][j] * &self.comps[i]) * &other.comps[j];
            }
        }
        ScalarField::new(&self.chart, out)
    }

    /// Pointwise length |u|_g.
    pub fn speed(&self) -> ScalarField {
        let d = self.dot(self);
        ScalarField::new(&self.chart, d.values.mapv(f64::sqrt))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Tensor11Field {
    pub fn new(chart: &Arc<Chart>, comps: [[Array2<f64>; 2]; 2]) -> Self {
        Tensor11Field { chart: chart.clone(), comps }
    }

    pub fn zeros(chart: &Arc<Chart>) -> Self {
        let z = || Array2::zeros(chart.shape());
        Self::new(chart, [[z(), z()], [z(), z()]])
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn trace(&self) -> ScalarField {
        ScalarField::new(&self.chart, &self.comps[0][0] + &self.comps[1][1])
    }

    /// Metric adjoint: (T*)^k_l = g^{ki} T^j_i g_{jl}.
    pub fn adjoint(&self) -> Self {
        let m = self.chart.metric();
        let mut out = Self::zeros(&self.chart);
        for k in 0..2 {
            for l in 0..2 {
                let mut acc = Array2::zeros(self.chart.shape());
                for i in 0..2 {
                    for j in 0..2 {
                        acc = acc + &(&m.g_inv[k][i] * &self.comps[j][i]) * &m.g[j][l];
                    }
                }
                out.comps[k][l] = acc;
            }
        }
        out
    }

    /// Applies the tensor to a vector: (T u)^k = T^k_i u^i.
    pub fn apply(&self, u: &VectorField) -> VectorField {
        let mut comps = [Array2::zeros(self.chart.shape()), Array2::zeros(self.chart.shape())];
        for (k, c) in comps.iter_mut().enumerate() {
            for i in 0..2 {
                *c = &*c + &(&self.comps[k][i] * &u.comps[i]);
            }
        }
        VectorField::new(&self.chart, comps)
    }

    /// Pointwise fiber inner product g(T, B) = tr(T B*).
    pub fn dot(&self, other: &Tensor11Field) -> ScalarField {
        let b_adj = other.adjoint();
        let mut acc = Array2::zeros(self.chart.shape());
        for k in 0..2 {
            for l in 0..2 {
                acc = acc + &(&self.comps[k][l] * &b_adj.comps[l][k]);
            }
        }
        ScalarField::new(&self.chart, acc)
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        for row in out.comps.iter_mut() {
            for c in row.iter_mut() {
                *c *= a;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flatten()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Tensor12Field {
    pub fn new(chart: &Arc<Chart>, comps: [[[Array2<f64>; 2]; 2]; 2]) -> Self {
        Tensor12Field { chart: chart.clone(), comps }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }
}

trait ZipWith {
    fn zip_with(&self, other: &Self, f: impl Fn(&Array2<f64>, &Array2<f64>) -> Array2<f64>) -> Self;
}

impl ZipWith for ScalarField {
    fn zip_with(&self, other: &Self, f: impl Fn(&Array2<f64>, &Array2<f64>) -> Array2<f64>) -> Self {
        ScalarField::new(&self.chart, f(&self.values, &other.values))
    }
}

impl ZipWith for VectorField {
    fn zip_with(&self, other: &Self, f: impl Fn(&Array2<f64>, &Array2<f64>) -> Array2<f64>) -> Self {
        VectorField::new(&self.chart, [f(&self.comps[0], &other.comps[0]), f(&self.comps[1], &other.comps[1])])
    }
}

impl ZipWith for Tensor11Field {
    fn zip_with(&self, other: &Self, f: impl Fn(&Array2<f64>, &Array2<f64>) -> Array2<f64>) -> Self {
        let c = |k: usize, i: usize| f(&self.comps[k][i], &other.comps[k][i]);
        Tensor11Field::new(&self.chart, [[c(0, 0), c(0, 1)], [c(1, 0), c(1, 1)]])
    }
}

macro_rules! impl_linear {
    ($ty:ident) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                assert!(Arc::ptr_eq(&self.chart, &rhs.chart), "chart mismatch");
                self.zip_with(rhs, |a, b| a + b)
            }
        }
        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                assert!(Arc::ptr_eq(&self.chart, &rhs.chart), "chart mismatch");
                self.zip_with(rhs, |a, b| a - b)
            }
        }
        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, rhs: f64) -> $ty {
                self.scale(rhs)
            }
        }
        impl Neg for &$ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                self.scale(-1.0)
            }
        }
    };
}

impl_linear!(ScalarField);
impl_linear!(VectorField);
impl_linear!(Tensor11Field);
