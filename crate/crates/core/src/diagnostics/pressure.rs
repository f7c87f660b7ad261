//! Pressure recovery from a divergence-free velocity:
//! −Δp = tr((∇u)²) + Ri(u,u) + div(aKu) − c μ div(Ri(u)),
//! with c = 2 for L, 1 for Bochner, 0 for Hodge.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::geometry::{covariant_derivative, div, grad, k_rotate, Chart, ChartKind, Resolution, ScalarField, VectorField};
use crate::operators::{integrate, norm_sq, ricci_action, DiffusionKind};
use crate::spectral::SpectralBackend;

/// Largest harmonic degree used by the Galerkin solve on the perturbed sphere.
const GALERKIN_MAX_DEGREE: usize = 24;
const SOLVABILITY_TOL: f64 = 1e-8;
const DIVERGENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PressureSolution {
    /// Pressure with zero mean.
    pub p: ScalarField,
    pub source: ScalarField,
    /// ‖−Δp − source‖ / ‖source‖ on the grid (0 for a zero source).
    pub residual: f64,
    /// Mean of the source relative to its RMS, removed before solving.
    pub source_mean: f64,
}

/// Right-hand side of the pressure Poisson equation.
pub fn pressure_source(u: &VectorField, mu: f64, kind: DiffusionKind, rotation_rate: f64) -> Result<ScalarField> {
    let chart = u.chart();
    let du = covariant_derivative(u);
    let mut tr = ndarray::Array2::<f64>::zeros(chart.shape());
    for k in 0..2 {
        for i in 0..2 {
            tr = tr + &du.comps[k][i] * &du.comps[i][k];
        }
    }
    let ri = ricci_action(u);
    let mut s = tr + u.dot(&ri).values;
    if rotation_rate != 0.0 {
        if chart.kind() == ChartKind::Torus {
            return Err(Error::UnsupportedChart { op: "Coriolis pressure", chart: "torus" });
        }
        let a = ScalarField::from_fn(chart, |_, p| 2.0 * rotation_rate * p.cos());
        s = s + div(&k_rotate(u).scale_by(&a)).values;
    }
    let c = kind.curvature_factor();
    if c != 0.0 && mu != 0.0 {
        s = s - div(&ri).values * (c * mu);
    }
    Ok(ScalarField::new(chart, s))
}

/// Pressure for `u` on its own chart.
pub fn pressure_solve(u: &VectorField, mu: f64, kind: DiffusionKind, rotation_rate: f64) -> Result<PressureSolution> {
    PressureSolver::new(u.chart())?.solve(u, mu, kind, rotation_rate)
}

/// p_K = ½(c² sin²φ − cω cos 2φ), the pressure balancing the zonal flow
/// c∂_θ on the rotating unit sphere (up to a constant).
pub fn coriolis_zonal_pressure(chart: &Arc<Chart>, c: f64, rotation_rate: f64) -> ScalarField {
    ScalarField::from_fn(chart, |_, p| 0.5 * (c * c * p.sin().powi(2) - c * rotation_rate * (2.0 * p).cos()))
}

enum Method {
    Spectral(SpectralBackend),
    Galerkin(Galerkin),
}

/// Poisson solver bound to one chart: diagonal spectral inversion on the
/// sphere and torus, a harmonic Galerkin solve on the perturbed sphere.
pub struct PressureSolver {
    chart: Arc<Chart>,
    truncation: usize,
    method: Method,
}

impl std::fmt::Debug for PressureSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PressureSolver").field("chart", &self.chart.kind()).field("truncation", &self.truncation).finish()
    }
}

/// Largest truncation whose transforms are exact on the grid.
fn grid_truncation(kind: ChartKind, res: Resolution) -> usize {
    match kind {
        ChartKind::Torus => (res.n_lon.min(res.n_lat) - 1) / 2,
        _ => ((res.n_lon - 1) / 2).min(res.n_lat - 1),
    }
}

impl PressureSolver {
    pub fn new(chart: &Arc<Chart>) -> Result<Self> {
        let lmax = grid_truncation(chart.kind(), chart.resolution());
        let (truncation, method) = match chart.kind() {
            ChartKind::PerturbedSphere => {
                let n = lmax.min(GALERKIN_MAX_DEGREE);
                (n, Method::Galerkin(Galerkin::new(chart, n)?))
            }
            _ => (lmax, Method::Spectral(SpectralBackend::transforms_only(chart, lmax, lmax)?)),
        };
        Ok(PressureSolver { chart: chart.clone(), truncation, method })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// The transform backend of the spectral method.
    pub fn backend(&self) -> Option<&SpectralBackend> {
        match &self.method {
            Method::Spectral(b) => Some(b),
            Method::Galerkin(_) => None,
        }
    }

    pub fn solve(&self, u: &VectorField, mu: f64, kind: DiffusionKind, rotation_rate: f64) -> Result<PressureSolution> {
        crate::geometry::check_same(&self.chart, u.chart())?;
        let scale = norm_sq(&covariant_derivative(u)).sqrt();
        let d = norm_sq(&div(u)).sqrt();
        if d > DIVERGENCE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotDivergenceFree(d / scale));
        }
        let s = pressure_source(u, mu, kind, rotation_rate)?;
        // natural size of the source terms, so round-off sources are not amplified
        let area = self.chart.quadrature().area;
        let coriolis = 2.0 * rotation_rate.abs() * (norm_sq(u) / area).sqrt() * (1.0 + mu);
        self.solve_source_scaled(&s, scale * scale / area + coriolis)
    }

    /// Solves −Δp = s with zero mean after removing the (small) mean of s.
    pub fn solve_source(&self, s: &ScalarField) -> Result<PressureSolution> {
        self.solve_source_scaled(s, 0.0)
    }

    /// As `solve_source`; residual and mean are measured relative to
    /// max(rms(s), `scale`).
    pub fn solve_source_scaled(&self, s: &ScalarField, scale: f64) -> Result<PressureSolution> {
        crate::geometry::check_same(&self.chart, s.chart())?;
        let area = self.chart.quadrature().area;
        let mean = integrate(s) / area;
        let rms = (norm_sq(s) / area).sqrt().max(scale);
        let source_mean = if rms == 0.0 { 0.0 } else { mean.abs() / rms };
        if source_mean > SOLVABILITY_TOL {
            return Err(Error::Solvability(source_mean));
        }
        let s0 = ScalarField::new(&self.chart, &s.values - mean);
        let p = match &self.method {
            Method::Spectral(b) => {
                let mut c = b.analysis(&s0)?;
                let i = if c.kind() == crate::spectral::SpectralKind::Torus { c.torus_index(0, 0) } else { 0 };
                c.data[i] = num_complex::Complex64::new(0.0, 0.0);
                b.synthesis(&c.map_eigen(|lam| if lam == 0.0 { 0.0 } else { 1.0 / lam }))?
            }
            Method::Galerkin(g) => g.solve(&s0),
        };
        let residual = if rms == 0.0 {
            0.0
        } else {
            let lap = div(&grad(&p));
            (norm_sq(&ScalarField::new(&self.chart, &lap.values + &s0.values)) / area).sqrt() / rms
        };
        Ok(PressureSolution { p, source: s.clone(), residual, source_mean })
    }
}

/// Galerkin discretisation of −Δ on span{Y_lm : 1 ≤ l ≤ N} (real harmonics
/// of the round sphere) with the metric of the chart.
struct Galerkin {
    chart: Arc<Chart>,
    /// Basis values, one column per function, rows in grid order.
    values: DMatrix<f64>,
    stiffness: Cholesky<f64, Dyn>,
}

impl Galerkin {
    fn new(chart: &Arc<Chart>, degree: usize) -> Result<Self> {
        let backend = SpectralBackend::transforms_only(chart, degree, degree)?;
        let npts = chart.shape().0 * chart.shape().1;
        let nb = (degree + 1) * (degree + 1) - 1;
        let mut values = DMatrix::zeros(npts, nb);
        let mut d0 = DMatrix::zeros(npts, nb);
        let mut d1 = DMatrix::zeros(npts, nb);
        let m = chart.metric();
        let w = &chart.quadrature().weights;
        let mut col = 0;
        for l in 1..=degree as i64 {
            for mm in -l..=l {
                let c = backend.real_mode(l, mm, 1.0)?;
                let f = backend.synthesis(&c)?;
                let [p0, p1] = backend.synthesis_partials(&c)?;
                for (k, (((v, a), b), ((g00, g11), wk))) in f
                    .values
                    .iter()
                    .zip(p0.iter())
                    .zip(p1.iter())
                    .zip(m.g_inv[0][0].iter().zip(m.g_inv[1][1].iter()).zip(w.iter()))
                    .enumerate()
                {
                    values[(k, col)] = *v;
                    d0[(k, col)] = a * (g00 * wk).sqrt();
                    d1[(k, col)] = b * (g11 * wk).sqrt();
                }
                col += 1;
            }
        }
        // the chart metric is diagonal
        let k = d0.transpose() * &d0 + d1.transpose() * &d1;
        let stiffness = k.cholesky().ok_or(Error::SingularGram)?;
        Ok(Galerkin { chart: chart.clone(), values, stiffness })
    }

    fn solve(&self, s: &ScalarField) -> ScalarField {
        let w = &self.chart.quadrature().weights;
        let rhs_grid = DVector::from_iterator(w.len(), s.values.iter().zip(w.iter()).map(|(a, b)| a * b));
        let load = self.values.transpose() * rhs_grid;
        let coeffs = self.stiffness.solve(&load);
        let p = &self.values * coeffs;
        let mut out = ndarray::Array2::from_shape_vec(self.chart.shape(), p.iter().copied().collect()).expect("grid shape");
        let mean = (&out * w).sum() / self.chart.quadrature().area;
        out -= mean;
        ScalarField::new(&self.chart, out)
    }
}
