use std::f64::consts::PI;

use super::coeffs::{sphere_len, sphere_offset};

/// Normalised associated Legendre functions Ñ_lm(cos φ) (no Condon-Shortley
/// phase, 2π∫Ñ² dx = 1) and their colatitude derivatives, tabulated on a
/// set of nodes. Layout is `[mode][node]` with m-major mode ordering.
#[derive(Debug, Clone)]
pub(crate) struct LegendreTable {
    pub n_nodes: usize,
    pub value: Vec<f64>,
    /// dÑ/dφ.
    pub dphi: Vec<f64>,
    /// Ñ / sin φ.
    pub over_sin: Vec<f64>,
}

impl LegendreTable {
    pub fn new(lmax: usize, cos_nodes: &[f64]) -> Self {
        let n = cos_nodes.len();
        let len = sphere_len(lmax);
        let mut value = vec![0.0; len * n];
        let mut dphi = vec![0.0; len * n];
        let mut over_sin = vec![0.0; len * n];
        for (k, &x) in cos_nodes.iter().enumerate() {
            let s = (1.0 - x * x).sqrt();
            let mut pmm = 1.0 / (4.0 * PI).sqrt();
            for m in 0..=lmax {
                if m > 0 {
                    pmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
                }
                let base = sphere_offset(lmax, m);
                let mut prev2 = 0.0;
                let mut prev = pmm;
                value[base * n + k] = pmm;
                for l in (m + 1)..=lmax {
                    let cur = if l == m + 1 {
                        ((2 * m + 3) as f64).sqrt() * x * pmm
                    } else {
                        let (lf, mf) = (l as f64, m as f64);
                        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                        let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                        a * (x * prev - b * prev2)
                    };
                    value[(base + l - m) * n + k] = cur;
                    prev2 = prev;
                    prev = cur;
                }
                for l in m..=lmax {
                    let i = (base + l - m) * n + k;
                    let (lf, mf) = (l as f64, m as f64);
                    let lower = if l > m {
                        let c = ((2.0 * lf + 1.0) / (2.0 * lf - 1.0) * (lf * lf - mf * mf)).sqrt();
                        c * value[(base + l - m - 1) * n + k]
                    } else {
                        0.0
                    };
                    dphi[i] = (lf * x * value[i] - lower) / s;
                    over_sin[i] = value[i] / s;
                }
            }
        }
        LegendreTable { n_nodes: n, value, dphi, over_sin }
    }

    pub fn row<'a>(&self, table: &'a [f64], mode: usize) -> &'a [f64] {
        &table[mode * self.n_nodes..(mode + 1) * self.n_nodes]
    }
}
