use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use super::diff::Differentiator;
use crate::error::{Error, Result};
use crate::gauss::gauss_legendre;

/// The three built-in charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    /// Unit sphere in (longitude θ, colatitude φ).
    Sphere,
    /// Flat torus [0, 2π)² in (x, y).
    Torus,
    /// Surface of revolution with profile r(φ) = sin φ (1 + ε sin² φ).
    PerturbedSphere,
}

impl ChartKind {
    pub fn name(self) -> &'static str {
        match self {
            ChartKind::Sphere => "sphere",
            ChartKind::Torus => "torus",
            ChartKind::PerturbedSphere => "perturbed_sphere",
        }
    }

    pub fn is_spherical(self) -> bool {
        !matches!(self, ChartKind::Torus)
    }

    pub fn coordinate_names(self) -> [&'static str; 2] {
        match self {
            ChartKind::Torus => ["x", "y"],
            _ => ["theta", "phi"],
        }
    }
}

impl std::str::FromStr for ChartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "sphere" => Ok(ChartKind::Sphere),
            "torus" => Ok(ChartKind::Torus),
            "perturbed_sphere" => Ok(ChartKind::PerturbedSphere),
            other => Err(Error::config("chart", format!("unknown chart `{other}` (sphere, torus, perturbed_sphere)"))),
        }
    }
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid size. For spherical charts `n_lon` counts longitudes and `n_lat`
/// colatitudes; on the torus they are the x and y point counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Resolution {
    pub n_lon: usize,
    pub n_lat: usize,
}

impl Resolution {
    pub fn new(n_lon: usize, n_lat: usize) -> Self {
        Resolution { n_lon, n_lat }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_lat, self.n_lon)
    }
}

/// Per-node metric quantities. Arrays are indexed `[lat, lon]`; tensor
/// indices use 0 for θ (or x) and 1 for φ (or y).
#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: [[Array2<f64>; 2]; 2],
    pub g_inv: [[Array2<f64>; 2]; 2],
    pub sqrt_det: Array2<f64>,
    /// `christoffel[k][i][j]` = Γ^k_{ij}.
    pub christoffel: [[[Array2<f64>; 2]; 2]; 2],
    pub curvature: Array2<f64>,
    /// ε_{ij} = √det g · (antisymmetric symbol), ε_{01} > 0.
    pub eps: [[Array2<f64>; 2]; 2],
    /// ε^k_j = g^{ki} ε_{ij}; this is the K operator as a matrix.
    pub eps_mixed: [[Array2<f64>; 2]; 2],
}

/// Quadrature weights (area units) for integrating grid functions.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub weights: Array2<f64>,
    pub area: f64,
}

/// Profile of a surface of revolution with metric diag(r(φ)², 1).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Profile {
    pub eps: f64,
}

impl Profile {
    /// (r, r', r'') at colatitude φ.
    pub fn eval(&self, phi: f64) -> (f64, f64, f64) {
        let (s, c) = phi.sin_cos();
        let e = self.eps;
        let r = s * (1.0 + e * s * s);
        let dr = c * (1.0 + 3.0 * e * s * s);
        let ddr = -s + e * (6.0 * s * c * c - 3.0 * s * s * s);
        (r, dr, ddr)
    }
}

/// A 2-D coordinate chart with sampled metric data.
pub struct Chart {
    kind: ChartKind,
    resolution: Resolution,
    perturbation: f64,
    lon: Vec<f64>,
    lat: Vec<f64>,
    /// GL nodes cos φ (spherical charts only).
    gl_nodes: Vec<f64>,
    gl_weights: Vec<f64>,
    metric: MetricData,
    quadrature: QuadratureRule,
    pub(crate) diff: Differentiator,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("kind", &self.kind)
            .field("resolution", &self.resolution)
            .field("perturbation", &self.perturbation)
            .finish()
    }
}

/// Builds a chart and its metric. `perturbation` is only read for the
/// perturbed sphere.
pub fn build_chart(kind: ChartKind, resolution: Resolution, perturbation: f64) -> Result<Arc<Chart>> {
    Chart::new(kind, resolution, perturbation).map(Arc::new)
}

fn zeros(shape: (usize, usize)) -> Array2<f64> {
    Array2::zeros(shape)
}

fn zero2(shape: (usize, usize)) -> [[Array2<f64>; 2]; 2] {
    [[zeros(shape), zeros(shape)], [zeros(shape), zeros(shape)]]
}

impl Chart {
    fn new(kind: ChartKind, resolution: Resolution, perturbation: f64) -> Result<Self> {
        let Resolution { n_lon, n_lat } = resolution;
        if n_lon < 4 || n_lat < 4 {
            return Err(Error::InvalidResolution {
                n_lon,
                n_lat,
                reason: "need at least 4 points per direction",
            });
        }
        if kind.is_spherical() && n_lon % 2 != 0 {
            return Err(Error::InvalidResolution {
                n_lon,
                n_lat,
                reason: "longitude count must be even",
            });
        }
        let eps = match kind {
            ChartKind::PerturbedSphere => {
                if !perturbation.is_finite() || perturbation.abs() >= 1.0 {
                    return Err(Error::DegenerateMetric(perturbation));
                }
                perturbation
            }
            _ => 0.0,
        };
        let shape = resolution.shape();
        let lon: Vec<f64> = (0..n_lon).map(|j| 2.0 * PI * j as f64 / n_lon as f64).collect();
        let (lat, gl_nodes, gl_weights): (Vec<f64>, Vec<f64>, Vec<f64>) = if kind.is_spherical() {
            let (x, w) = gauss_legendre(n_lat);
            (x.iter().map(|x| x.acos()).collect(), x, w)
        } else {
            (
                (0..n_lat).map(|i| 2.0 * PI * i as f64 / n_lat as f64).collect(),
                Vec::new(),
                Vec::new(),
            )
        };

        let mut metric = MetricData {
            g: zero2(shape),
            g_inv: zero2(shape),
            sqrt_det: zeros(shape),
            christoffel: [zero2(shape), zero2(shape)],
            curvature: zeros(shape),
            eps: zero2(shape),
            eps_mixed: zero2(shape),
        };
        let mut weights = zeros(shape);

        for i in 0..n_lat {
            // metric depends on the latitude coordinate only
            let (r, dr, ddr) = match kind {
                ChartKind::Torus => (1.0, 0.0, 0.0),
                _ => Profile { eps }.eval(lat[i]),
            };
            let (g00, gam_0_01, gam_1_00, kappa) = match kind {
                ChartKind::Torus => (1.0, 0.0, 0.0, 0.0),
                ChartKind::Sphere => {
                    let (s, c) = lat[i].sin_cos();
                    (s * s, c / s, -s * c, 1.0)
                }
                ChartKind::PerturbedSphere => (r * r, dr / r, -r * dr, -ddr / r),
            };
            let w = match kind {
                ChartKind::Torus => (2.0 * PI / n_lon as f64) * (2.0 * PI / n_lat as f64),
                _ => gl_weights[i] * (r / lat[i].sin()) * 2.0 * PI / n_lon as f64,
            };
            let sq = g00.sqrt();
            for j in 0..n_lon {
                metric.g[0][0][[i, j]] = g00;
                metric.g[1][1][[i, j]] = 1.0;
                metric.g_inv[0][0][[i, j]] = 1.0 / g00;
                metric.g_inv[1][1][[i, j]] = 1.0;
                metric.sqrt_det[[i, j]] = sq;
                metric.christoffel[0][0][1][[i, j]] = gam_0_01;
                metric.christoffel[0][1][0][[i, j]] = gam_0_01;
                metric.christoffel[1][0][0][[i, j]] = gam_1_00;
                metric.curvature[[i, j]] = kappa;
                metric.eps[0][1][[i, j]] = sq;
                metric.eps[1][0][[i, j]] = -sq;
                // ε^k_j = g^{kk} ε_{kj} for diagonal metrics
                metric.eps_mixed[0][1][[i, j]] = sq / g00;
                metric.eps_mixed[1][0][[i, j]] = -sq;
                weights[[i, j]] = w;
            }
        }
        let area = weights.sum();
        let diff = Differentiator::new(kind, resolution, &gl_nodes, &gl_weights, &lat);
        Ok(Chart {
            kind,
            resolution,
            perturbation: eps,
            lon,
            lat,
            gl_nodes,
            gl_weights,
            metric,
            quadrature: QuadratureRule { weights, area },
            diff,
        })
    }

    pub fn kind(&self) -> ChartKind {
        self.kind
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn shape(&self) -> (usize, usize) {
        self.resolution.shape()
    }

    pub fn perturbation(&self) -> f64 {
        self.perturbation
    }

    /// Longitude (or x) values of the grid columns.
    pub fn lon(&self) -> &[f64] {
        &self.lon
    }

    /// Colatitude (or y) values of the grid rows.
    pub fn lat(&self) -> &[f64] {
        &self.lat
    }

    pub fn gl_nodes(&self) -> &[f64] {
        &self.gl_nodes
    }

    pub fn gl_weights(&self) -> &[f64] {
        &self.gl_weights
    }

    pub fn metric(&self) -> &MetricData {
        &self.metric
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    /// Both coordinates periodic on the torus; longitude only otherwise.
    pub fn periodic(&self) -> [bool; 2] {
        [true, self.kind == ChartKind::Torus]
    }

    /// Smallest coordinate spacing used for CFL estimates.
    pub fn grid_spacing(&self) -> f64 {
        2.0 * PI / self.resolution.n_lon as f64
    }

    /// Evaluates `f(lon, lat)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Array2<f64> {
        Array2::from_shape_fn(self.shape(), |(i, j)| f(self.lon[j], self.lat[i]))
    }
}
