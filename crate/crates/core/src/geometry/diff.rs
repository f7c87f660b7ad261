//! Partial derivatives of grid-sampled tensor components.
//!
//! Periodic directions are differentiated with the FFT. On spherical charts
//! the colatitude derivative works per longitudinal wavenumber m: a smooth
//! tensor component has the form sin^p φ · q(cos φ), where the parity of p
//! follows from m and the number of φ indices and the lowest admissible p
//! from the excess of contravariant θ indices. After dividing out sin^p φ the
//! remainder q is differentiated by barycentric interpolation through the
//! Gauss-Legendre nodes, which is exact for band-limited fields.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::chart::{ChartKind, Resolution};
use crate::gauss::barycentric_diff_matrix;

/// Index structure of a tensor component, used to pick the right pole
/// behaviour on spherical charts. Ignored on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSig {
    /// Number of φ indices (upper or lower).
    pub lat_indices: u8,
    /// Upper θ indices minus lower θ indices.
    pub lon_excess: i8,
}

impl IndexSig {
    pub const SCALAR: IndexSig = IndexSig { lat_indices: 0, lon_excess: 0 };

    /// Component of a contravariant vector.
    pub fn vector(k: usize) -> Self {
        if k == 0 {
            IndexSig { lat_indices: 0, lon_excess: 1 }
        } else {
            IndexSig { lat_indices: 1, lon_excess: 0 }
        }
    }

    /// Component `T^k_i` of a (1,1) tensor.
    pub fn tensor11(k: usize, i: usize) -> Self {
        IndexSig {
            lat_indices: (k == 1) as u8 + (i == 1) as u8,
            lon_excess: (k == 0) as i8 - (i == 0) as i8,
        }
    }

    /// Component `T^k_{ij}` of a (1,2) tensor.
    pub fn tensor12(k: usize, i: usize, j: usize) -> Self {
        IndexSig {
            lat_indices: (k == 1) as u8 + (i == 1) as u8 + (j == 1) as u8,
            lon_excess: (k == 0) as i8 - (i == 0) as i8 - (j == 0) as i8,
        }
    }

    /// Treats the component as more singular at the poles by `order`
    /// powers of 1/sin φ (used for non-tensorial quantities).
    pub fn with_pole_order(mut self, order: i8) -> Self {
        self.lon_excess += 2 * order;
        self
    }
}

pub(crate) enum Differentiator {
    Periodic {
        fft_lon: Arc<dyn Fft<f64>>,
        ifft_lon: Arc<dyn Fft<f64>>,
        fft_lat: Arc<dyn Fft<f64>>,
        ifft_lat: Arc<dyn Fft<f64>>,
        res: Resolution,
    },
    Polar {
        fft_lon: Arc<dyn Fft<f64>>,
        ifft_lon: Arc<dyn Fft<f64>>,
        res: Resolution,
        dmat: Vec<f64>,
        sin: Vec<f64>,
        cos: Vec<f64>,
    },
}

fn wavenumber(j: usize, n: usize) -> i64 {
    if j < n.div_ceil(2) {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn is_nyquist(j: usize, n: usize) -> bool {
    n % 2 == 0 && j == n / 2
}

impl Differentiator {
    pub fn new(kind: ChartKind, res: Resolution, gl_nodes: &[f64], gl_weights: &[f64], lat: &[f64]) -> Self {
        let mut planner = FftPlanner::new();
        let fft_lon = planner.plan_fft_forward(res.n_lon);
        let ifft_lon = planner.plan_fft_inverse(res.n_lon);
        match kind {
            ChartKind::Torus => Differentiator::Periodic {
                fft_lon,
                ifft_lon,
                fft_lat: planner.plan_fft_forward(res.n_lat),
                ifft_lat: planner.plan_fft_inverse(res.n_lat),
                res,
            },
            _ => Differentiator::Polar {
                fft_lon,
                ifft_lon,
                res,
                dmat: barycentric_diff_matrix(gl_nodes, gl_weights),
                sin: lat.iter().map(|p| p.sin()).collect(),
                cos: gl_nodes.to_vec(),
            },
        }
    }

    /// ∂f/∂x^dir for a component with the given index structure.
    pub fn partial(&self, f: &Array2<f64>, dir: usize, sig: IndexSig) -> Array2<f64> {
        match (self, dir) {
            (Differentiator::Periodic { fft_lon, ifft_lon, res, .. }, 0)
            | (Differentiator::Polar { fft_lon, ifft_lon, res, .. }, 0) => {
                periodic_rows(f, res.n_lon, fft_lon, ifft_lon)
            }
            (Differentiator::Periodic { fft_lat, ifft_lat, res, .. }, _) => {
                let t = f.t().to_owned();
                periodic_rows(&t, res.n_lat, fft_lat, ifft_lat).t().to_owned()
            }
            (Differentiator::Polar { fft_lon, ifft_lon, res, dmat, sin, cos }, _) => {
                polar_lat(f, sig, *res, fft_lon, ifft_lon, dmat, sin, cos)
            }
        }
    }
}

fn periodic_rows(f: &Array2<f64>, n: usize, fft: &Arc<dyn Fft<f64>>, ifft: &Arc<dyn Fft<f64>>) -> Array2<f64> {
    let (rows, cols) = f.dim();
    debug_assert_eq!(cols, n);
    let mut out = Array2::zeros((rows, cols));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..rows {
        for c in 0..n {
            buf[c] = Complex64::new(f[[r, c]], 0.0);
        }
        fft.process(&mut buf);
        for (c, v) in buf.iter_mut().enumerate() {
            if is_nyquist(c, n) {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, wavenumber(c, n) as f64);
            }
        }
        ifft.process(&mut buf);
        for c in 0..n {
            out[[r, c]] = buf[c].re / n as f64;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn polar_lat(
    f: &Array2<f64>,
    sig: IndexSig,
    res: Resolution,
    fft: &Arc<dyn Fft<f64>>,
    ifft: &Arc<dyn Fft<f64>>,
    dmat: &[f64],
    sin: &[f64],
    cos: &[f64],
) -> Array2<f64> {
    let Resolution { n_lon, n_lat } = res;
    let mut spec = vec![Complex64::new(0.0, 0.0); n_lat * n_lon];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_lon];
    for i in 0..n_lat {
        for j in 0..n_lon {
            buf[j] = Complex64::new(f[[i, j]], 0.0);
        }
        fft.process(&mut buf);
        spec[i * n_lon..(i + 1) * n_lon].copy_from_slice(&buf);
    }

    let d = sig.lon_excess as i64;
    let mut q = vec![Complex64::new(0.0, 0.0); n_lat];
    let mut dq = vec![Complex64::new(0.0, 0.0); n_lat];
    for col in 0..n_lon {
        if is_nyquist(col, n_lon) {
            for i in 0..n_lat {
                spec[i * n_lon + col] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        let m = wavenumber(col, n_lon).abs();
        let s = (m + sig.lat_indices as i64) % 2;
        // the component is sin^(s-2j) φ times a polynomial in cos φ
        let need = if d % 2 == 0 { d } else { d + 2 * s - 1 };
        let j = if need > 0 { (need + 1) / 2 } else { 0 };
        let p = s - 2 * j;
        for i in 0..n_lat {
            q[i] = spec[i * n_lon + col] * sin[i].powi(-p as i32);
        }
        for i in 0..n_lat {
            let row = &dmat[i * n_lat..(i + 1) * n_lat];
            dq[i] = row.iter().zip(&q).map(|(a, b)| b * *a).sum();
        }
        for i in 0..n_lat {
            let (si, ci) = (sin[i], cos[i]);
            spec[i * n_lon + col] = (q[i] * (p as f64 * ci) - dq[i] * (si * si)) * si.powi(p as i32 - 1);
        }
    }

    let mut out = Array2::zeros((n_lat, n_lon));
    for i in 0..n_lat {
        buf.copy_from_slice(&spec[i * n_lon..(i + 1) * n_lon]);
        ifft.process(&mut buf);
        for j in 0..n_lon {
            out[[i, j]] = buf[j].re / n_lon as f64;
        }
    }
    out
}
