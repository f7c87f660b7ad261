//! Scalar spectral transforms and diagonal elliptic solves: orthonormal
//! spherical harmonics on the sphere, double Fourier series on the torus.
//!
//! Stream functions follow u = K grad ψ, so rot(u) = −Δψ.

mod coeffs;
mod legendre;

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub use coeffs::{SpectralCoeffs, SpectralKind};
pub(crate) use legendre::LegendreTable;

use crate::error::{Error, Result};
use crate::geometry::{build_chart, Chart, ChartKind, Resolution, ScalarField, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Smallest dealiasing grid for truncation `lmax`.
pub fn dealiased_resolution(kind: ChartKind, lmax: usize) -> Resolution {
    match kind {
        ChartKind::Torus => {
            let n = (3 * lmax + 1).next_power_of_two().max(8);
            Resolution::new(n, n)
        }
        _ => {
            let mut n_lat = (3 * lmax + 2).div_ceil(2);
            n_lat += n_lat % 2;
            let n_lat = n_lat.max(4);
            Resolution::new(2 * n_lat, n_lat)
        }
    }
}

/// Transform engine bound to one chart and truncation.
pub struct SpectralBackend {
    chart: Arc<Chart>,
    kind: SpectralKind,
    lmax: usize,
    fft_lon: Arc<dyn Fft<f64>>,
    ifft_lon: Arc<dyn Fft<f64>>,
    fft_lat: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    legendre: Option<LegendreTable>,
}

impl std::fmt::Debug for SpectralBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralBackend").field("kind", &self.kind).field("lmax", &self.lmax).finish()
    }
}

impl SpectralBackend {
    /// Builds a backend on the smallest dealiasing grid.
    pub fn for_truncation(kind: ChartKind, lmax: usize) -> Result<Self> {
        let chart = build_chart(kind, dealiased_resolution(kind, lmax), 0.0)?;
        Self::new(&chart, lmax)
    }

    /// Binds a backend to an existing chart. The grid must support
    /// dealiased quadratic products: n_lon ≥ 3L+1 and, on the sphere,
    /// n_lat ≥ (3L+1)/2; on the torus n_lat ≥ 3L+1 as well.
    pub fn new(chart: &Arc<Chart>, lmax: usize) -> Result<Self> {
        if chart.kind() == ChartKind::PerturbedSphere {
            return Err(Error::UnsupportedChart { op: "spectral backend", chart: "perturbed_sphere" });
        }
        Self::build(chart, lmax, 2 * lmax)
    }

    /// Binds a backend that only needs exact transforms of fields of degree
    /// at most `max_degree` (≥ L). Also accepts the perturbed sphere, where
    /// the transforms use the round-sphere harmonics on the same nodes and
    /// the Laplacian-based methods are unavailable.
    pub fn transforms_only(chart: &Arc<Chart>, lmax: usize, max_degree: usize) -> Result<Self> {
        Self::build(chart, lmax, max_degree.max(lmax))
    }

    fn build(chart: &Arc<Chart>, lmax: usize, max_degree: usize) -> Result<Self> {
        let Resolution { n_lon, n_lat } = chart.resolution();
        let kind = match chart.kind() {
            ChartKind::Torus => SpectralKind::Torus,
            _ => SpectralKind::Sphere,
        };
        if lmax < 1 {
            return Err(Error::InvalidTruncation { truncation: lmax, reason: "truncation must be at least 1".into() });
        }
        let span = max_degree + lmax + 1;
        let need_lat = match kind {
            SpectralKind::Sphere => span.div_ceil(2),
            SpectralKind::Torus => span,
        };
        if n_lon < span || n_lat < need_lat {
            return Err(Error::InvalidResolution { n_lon, n_lat, reason: "grid too coarse for exact transforms at this truncation" });
        }
        let mut planner = FftPlanner::new();
        let fft_lat = match kind {
            SpectralKind::Torus => Some((planner.plan_fft_forward(n_lat), planner.plan_fft_inverse(n_lat))),
            SpectralKind::Sphere => None,
        };
        let legendre = match kind {
            SpectralKind::Sphere => Some(LegendreTable::new(lmax, chart.gl_nodes())),
            SpectralKind::Torus => None,
        };
        Ok(SpectralBackend {
            chart: chart.clone(),
            kind,
            lmax,
            fft_lon: planner.plan_fft_forward(n_lon),
            ifft_lon: planner.plan_fft_inverse(n_lon),
            fft_lat,
            legendre,
        })
    }

    fn check_round(&self) -> Result<()> {
        if self.chart.kind() == ChartKind::PerturbedSphere {
            return Err(Error::UnsupportedChart { op: "spectral Laplacian", chart: "perturbed_sphere" });
        }
        Ok(())
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn truncation(&self) -> usize {
        self.lmax
    }

    pub fn zeros(&self) -> SpectralCoeffs {
        SpectralCoeffs::zeros(self.kind, self.lmax)
    }

    fn check_coeffs(&self, c: &SpectralCoeffs) -> Result<()> {
        if c.kind() != self.kind || c.truncation() != self.lmax {
            return Err(Error::InvalidTruncation {
                truncation: c.truncation(),
                reason: format!("coefficients do not match backend truncation {}", self.lmax),
            });
        }
        Ok(())
    }

    fn check_field(&self, f: &Arc<Chart>) -> Result<()> {
        crate::geometry::check_same(&self.chart, f)
    }

    /// Row-wise longitude DFT scaled by 2π/n_lon; returns `[row][wavenumber]`.
    fn lon_dft(&self, f: &Array2<f64>) -> Vec<Vec<Complex64>> {
        let (rows, n) = f.dim();
        let scale = 2.0 * PI / n as f64;
        (0..rows)
            .map(|i| {
                let mut buf: Vec<Complex64> = f.row(i).iter().map(|v| Complex64::new(*v, 0.0)).collect();
                self.fft_lon.process(&mut buf);
                buf.iter_mut().for_each(|v| *v *= scale);
                buf
            })
            .collect()
    }

    /// Inverse of `lon_dft` for a real field given wavenumbers 0..=L.
    fn lon_synth_real(&self, g: &[Complex64], out: &mut [f64]) {
        let n = out.len();
        let mut buf = vec![ZERO; n];
        buf[0] = Complex64::new(g[0].re, 0.0);
        for m in 1..g.len() {
            buf[m] = g[m];
            buf[n - m] = g[m].conj();
        }
        self.ifft_lon.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }

    fn sphere_analysis(&self, rows: &[Vec<Complex64>], weights: &[f64], table: impl Fn(&LegendreTable, usize) -> Vec<f64>) -> SpectralCoeffs {
        let leg = self.legendre.as_ref().expect("sphere backend");
        let mut c = self.zeros();
        for (idx, _l, m) in c.clone().sphere_modes() {
            let t = table(leg, idx);
            let mut acc = ZERO;
            for (i, row) in rows.iter().enumerate() {
                acc += row[m] * (weights[i] * t[i]);
            }
            c.data[idx] = acc;
        }
        c
    }

    /// Sphere synthesis of Σ c_lm T_lm(φ) (i m)^p e^{imθ} with T a tabulated
    /// latitude profile.
    fn sphere_synth(&self, c: &SpectralCoeffs, tab: &[f64], times_im: bool) -> Array2<f64> {
        let leg = self.legendre.as_ref().expect("sphere backend");
        let (n_lat, n_lon) = self.chart.shape();
        let mut out = Array2::zeros((n_lat, n_lon));
        let mut g = vec![vec![ZERO; self.lmax + 1]; n_lat];
        for (idx, _l, m) in c.sphere_modes() {
            let mut v = c.data[idx];
            if times_im {
                v *= Complex64::new(0.0, m as f64);
            }
            if v == ZERO {
                continue;
            }
            let t = leg.row(tab, idx);
            for i in 0..n_lat {
                g[i][m] += v * t[i];
            }
        }
        let mut row = vec![0.0; n_lon];
        for i in 0..n_lat {
            self.lon_synth_real(&g[i], &mut row);
            out.row_mut(i).iter_mut().zip(&row).for_each(|(o, r)| *o = *r);
        }
        out
    }

    /// 2-D DFT over [y][x] scaled so the result is the coefficient table of
    /// the orthonormal Fourier basis; returns the full n_lat × n_lon spectrum.
    fn torus_dft(&self, f: &Array2<f64>) -> Array2<Complex64> {
        let (ny, nx) = f.dim();
        let mut spec = Array2::from_elem((ny, nx), ZERO);
        let mut buf = vec![ZERO; nx];
        for i in 0..ny {
            for j in 0..nx {
                buf[j] = Complex64::new(f[[i, j]], 0.0);
            }
            self.fft_lon.process(&mut buf);
            for j in 0..nx {
                spec[[i, j]] = buf[j];
            }
        }
        let (fwd, _) = self.fft_lat.as_ref().expect("torus backend");
        let mut col = vec![ZERO; ny];
        for j in 0..nx {
            for i in 0..ny {
                col[i] = spec[[i, j]];
            }
            fwd.process(&mut col);
            for i in 0..ny {
                spec[[i, j]] = col[i];
            }
        }
        spec.mapv_inplace(|v| v * (2.0 * PI / (nx * ny) as f64));
        spec
    }

    fn torus_pick(&self, spec: &Array2<Complex64>) -> SpectralCoeffs {
        let (ny, nx) = spec.dim();
        let mut c = self.zeros();
        for (idx, kx, ky) in c.clone().torus_modes() {
            let j = kx.rem_euclid(nx as i64) as usize;
            let i = ky.rem_euclid(ny as i64) as usize;
            c.data[idx] = spec[[i, j]];
        }
        c
    }

    /// Torus synthesis of Σ c_k m(k) e^{ik·x}/(2π).
    fn torus_synth(&self, c: &SpectralCoeffs, mult: impl Fn(i64, i64) -> Complex64) -> Array2<f64> {
        let (ny, nx) = self.chart.shape();
        let mut spec = Array2::from_elem((ny, nx), ZERO);
        for (idx, kx, ky) in c.torus_modes() {
            let j = kx.rem_euclid(nx as i64) as usize;
            let i = ky.rem_euclid(ny as i64) as usize;
            spec[[i, j]] = c.data[idx] * mult(kx, ky);
        }
        let (_, inv) = self.fft_lat.as_ref().expect("torus backend");
        let mut col = vec![ZERO; ny];
        for j in 0..nx {
            for i in 0..ny {
                col[i] = spec[[i, j]];
            }
            inv.process(&mut col);
            for i in 0..ny {
                spec[[i, j]] = col[i];
            }
        }
        let mut out = Array2::zeros((ny, nx));
        let mut buf = vec![ZERO; nx];
        for i in 0..ny {
            for j in 0..nx {
                buf[j] = spec[[i, j]];
            }
            self.ifft_lon.process(&mut buf);
            for j in 0..nx {
                out[[i, j]] = buf[j].re / (2.0 * PI);
            }
        }
        out
    }

    /// Projects a grid function onto the truncated basis.
    pub fn analysis(&self, f: &ScalarField) -> Result<SpectralCoeffs> {
        self.check_field(f.chart())?;
        Ok(match self.kind {
            SpectralKind::Sphere => {
                let rows = self.lon_dft(&f.values);
                self.sphere_analysis(&rows, self.chart.gl_weights(), |leg, idx| leg.row(&leg.value, idx).to_vec())
            }
            SpectralKind::Torus => self.torus_pick(&self.torus_dft(&f.values)),
        })
    }

    /// Evaluates the represented field on the grid.
    pub fn synthesis(&self, c: &SpectralCoeffs) -> Result<ScalarField> {
        self.check_coeffs(c)?;
        let values = match self.kind {
            SpectralKind::Sphere => self.sphere_synth(c, &self.legendre.as_ref().unwrap().value, false),
            SpectralKind::Torus => self.torus_synth(c, |_, _| Complex64::new(1.0, 0.0)),
        };
        Ok(ScalarField::new(&self.chart, values))
    }

    /// Coordinate partials (∂_θ f, ∂_φ f) (or (∂_x f, ∂_y f)) on the grid.
    pub fn synthesis_partials(&self, c: &SpectralCoeffs) -> Result<[Array2<f64>; 2]> {
        self.check_coeffs(c)?;
        Ok(match self.kind {
            SpectralKind::Sphere => {
                let leg = self.legendre.as_ref().unwrap();
                [self.sphere_synth(c, &leg.value, true), self.sphere_synth(c, &leg.dphi, false)]
            }
            SpectralKind::Torus => [
                self.torus_synth(c, |kx, _| Complex64::new(0.0, kx as f64)),
                self.torus_synth(c, |_, ky| Complex64::new(0.0, ky as f64)),
            ],
        })
    }

    /// grad f as a vector field.
    pub fn synthesis_gradient(&self, c: &SpectralCoeffs) -> Result<VectorField> {
        self.check_round()?;
        let [d0, d1] = self.synthesis_partials(c)?;
        let gi = &self.chart.metric().g_inv;
        Ok(VectorField::new(&self.chart, [&gi[0][0] * &d0, &gi[1][1] * &d1]))
    }

    /// K grad ψ on the grid.
    pub fn synthesis_k_grad(&self, psi: &SpectralCoeffs) -> Result<VectorField> {
        self.check_round()?;
        self.check_coeffs(psi)?;
        match self.kind {
            SpectralKind::Sphere => {
                // (K grad ψ)^θ = ψ_φ / sin φ, (K grad ψ)^φ = −ψ_θ / sin φ
                let leg = self.legendre.as_ref().unwrap();
                let mut u0 = self.sphere_synth(psi, &leg.dphi, false);
                let s = self.chart.sample(|_, p| 1.0 / p.sin());
                u0 *= &s;
                let u1 = -self.sphere_synth(psi, &leg.over_sin, true);
                Ok(VectorField::new(&self.chart, [u0, u1]))
            }
            SpectralKind::Torus => {
                let [dx, dy] = self.synthesis_partials(psi)?;
                Ok(VectorField::new(&self.chart, [dy, -dx]))
            }
        }
    }

    /// Spectral coefficients of rot(w), computed from the weak form
    /// ∫ rot(w) Ȳ = −∫ g(Kw, grad Ȳ); exact when the components of w are
    /// dealiased products of band-limited fields.
    pub fn rot_analysis(&self, w: &VectorField) -> Result<SpectralCoeffs> {
        self.check_round()?;
        self.check_field(w.chart())?;
        match self.kind {
            SpectralKind::Sphere => {
                let sin = self.chart.sample(|_, p| p.sin());
                let a_rows = self.lon_dft(&(&w.comps[0] * &sin));
                let b_rows = self.lon_dft(&w.comps[1]);
                let leg = self.legendre.as_ref().unwrap();
                let wts = self.chart.gl_weights();
                let mut c = self.zeros();
                for (idx, _l, m) in c.clone().sphere_modes() {
                    let dn = leg.row(&leg.dphi, idx);
                    let ns = leg.row(&leg.over_sin, idx);
                    let im = Complex64::new(0.0, m as f64);
                    let mut acc = ZERO;
                    for i in 0..wts.len() {
                        acc += (a_rows[i][m] * dn[i] + im * b_rows[i][m] * ns[i]) * wts[i];
                    }
                    c.data[idx] = acc;
                }
                Ok(c)
            }
            SpectralKind::Torus => {
                let wx = self.torus_pick(&self.torus_dft(&w.comps[0]));
                let wy = self.torus_pick(&self.torus_dft(&w.comps[1]));
                let mut c = self.zeros();
                for (idx, kx, ky) in wx.torus_modes() {
                    c.data[idx] = Complex64::new(0.0, kx as f64) * wy.data[idx] - Complex64::new(0.0, ky as f64) * wx.data[idx];
                }
                Ok(c)
            }
        }
    }

    /// Multiplies by −λ (the Laplacian eigenvalue).
    pub fn laplacian(&self, c: &SpectralCoeffs) -> Result<SpectralCoeffs> {
        self.check_round()?;
        self.check_coeffs(c)?;
        Ok(c.map_eigen(|lam| -lam))
    }

    /// Solves Δf = c with zero mean. The input must have zero mean.
    pub fn invert_laplacian(&self, c: &SpectralCoeffs) -> Result<SpectralCoeffs> {
        self.check_round()?;
        self.check_coeffs(c)?;
        let mean = c.mean_coeff().norm();
        if mean > 1e-12 * (1.0 + c.max_abs()) {
            return Err(Error::NonzeroMean(mean));
        }
        Ok(c.map_eigen(|lam| if lam == 0.0 { 0.0 } else { -1.0 / lam }))
    }

    /// Stream function ψ = (−Δ)⁻¹ζ and velocity u = K grad ψ.
    pub fn velocity_from_vorticity(&self, zeta: &SpectralCoeffs) -> Result<(SpectralCoeffs, VectorField)> {
        let psi = self.invert_laplacian(zeta)?.scale(-1.0);
        let u = self.synthesis_k_grad(&psi)?;
        Ok((psi, u))
    }

    /// Coefficients of a single real orthonormal mode (see
    /// [`SpectralCoeffs::add_real_mode`]).
    pub fn real_mode(&self, l: i64, m: i64, amp: f64) -> Result<SpectralCoeffs> {
        let mut c = self.zeros();
        c.add_real_mode(l, m, amp)?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests;
