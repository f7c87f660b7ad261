use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which scalar basis a coefficient table refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    /// Orthonormal spherical harmonics, triangular truncation l ≤ L, only
    /// m ≥ 0 stored (c_{l,−m} = conj(c_{lm})).
    Sphere,
    /// Fourier modes e^{ik·x}/(2π) with |k_x|, |k_y| ≤ L, full table.
    Torus,
}

/// Band-limited spectral representation of a real scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    kind: SpectralKind,
    truncation: usize,
    pub(crate) data: Vec<Complex64>,
}

pub(crate) fn sphere_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Start of the m block in m-major sphere storage.
pub(crate) fn sphere_offset(lmax: usize, m: usize) -> usize {
    m * (lmax + 1) - m * (m.saturating_sub(1)) / 2
}

impl SpectralCoeffs {
    pub fn zeros(kind: SpectralKind, truncation: usize) -> Self {
        let len = match kind {
            SpectralKind::Sphere => sphere_len(truncation),
            SpectralKind::Torus => (2 * truncation + 1).pow(2),
        };
        SpectralCoeffs { kind, truncation, data: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn kind(&self) -> SpectralKind {
        self.kind
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.data
    }

    /// Storage index of the sphere coefficient (l, m), m ≥ 0.
    pub fn sphere_index(&self, l: usize, m: usize) -> usize {
        debug_assert!(self.kind == SpectralKind::Sphere && m <= l && l <= self.truncation);
        sphere_offset(self.truncation, m) + (l - m)
    }

    /// Storage index of the torus coefficient (k_x, k_y).
    pub fn torus_index(&self, kx: i64, ky: i64) -> usize {
        let l = self.truncation as i64;
        debug_assert!(self.kind == SpectralKind::Torus && kx.abs() <= l && ky.abs() <= l);
        ((kx + l) * (2 * l + 1) + (ky + l)) as usize
    }

    /// Iterates (index, l, m) over sphere storage.
    pub fn sphere_modes(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let lmax = self.truncation;
        (0..=lmax).flat_map(move |m| (m..=lmax).map(move |l| (l, m))).enumerate().map(|(i, (l, m))| (i, l, m))
    }

    /// Iterates (index, k_x, k_y) over torus storage.
    pub fn torus_modes(&self) -> impl Iterator<Item = (usize, i64, i64)> {
        let l = self.truncation as i64;
        (-l..=l).flat_map(move |kx| (-l..=l).map(move |ky| (kx, ky))).enumerate().map(|(i, (kx, ky))| (i, kx, ky))
    }

    /// −Δ eigenvalue of each stored mode.
    pub fn eigenvalues(&self) -> Vec<f64> {
        match self.kind {
            SpectralKind::Sphere => self.sphere_modes().map(|(_, l, _)| (l * (l + 1)) as f64).collect(),
            SpectralKind::Torus => self.torus_modes().map(|(_, kx, ky)| (kx * kx + ky * ky) as f64).collect(),
        }
    }

    /// Multiplicity of each stored mode in Parseval sums.
    pub fn parseval_weights(&self) -> Vec<f64> {
        match self.kind {
            SpectralKind::Sphere => self.sphere_modes().map(|(_, _, m)| if m == 0 { 1.0 } else { 2.0 }).collect(),
            SpectralKind::Torus => vec![1.0; self.data.len()],
        }
    }

    /// Coefficient of the constant mode.
    pub fn mean_coeff(&self) -> Complex64 {
        match self.kind {
            SpectralKind::Sphere => self.data[0],
            SpectralKind::Torus => self.data[self.torus_index(0, 0)],
        }
    }

    /// Sets the coefficient of a real orthonormal mode. On the sphere,
    /// `(l, m)` with m > 0 selects √2·N·cos(mθ) and m < 0 selects
    /// √2·N·sin(|m|θ). On the torus `(l, m)` is the wave vector (k_x, k_y)
    /// and the mode is cos(k·x)/(π√2).
    pub fn add_real_mode(&mut self, l: i64, m: i64, amp: f64) -> Result<()> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self.kind {
            SpectralKind::Sphere => {
                let (lu, mu) = (l as usize, m.unsigned_abs() as usize);
                if l < 0 || lu > self.truncation || mu > lu {
                    return Err(Error::InvalidTruncation {
                        truncation: self.truncation,
                        reason: format!("mode ({l}, {m}) outside triangular truncation"),
                    });
                }
                let idx = self.sphere_index(lu, mu);
                self.data[idx] += match m {
                    0 => Complex64::new(amp, 0.0),
                    m if m > 0 => Complex64::new(amp * s, 0.0),
                    _ => Complex64::new(0.0, -amp * s),
                };
            }
            SpectralKind::Torus => {
                let t = self.truncation as i64;
                if l.abs() > t || m.abs() > t {
                    return Err(Error::InvalidTruncation {
                        truncation: self.truncation,
                        reason: format!("wave vector ({l}, {m}) outside truncation"),
                    });
                }
                if l == 0 && m == 0 {
                    let i = self.torus_index(0, 0);
                    self.data[i] += Complex64::new(amp, 0.0);
                    return Ok(());
                }
                let (a, b) = (self.torus_index(l, m), self.torus_index(-l, -m));
                self.data[a] += Complex64::new(amp * s, 0.0);
                self.data[b] += Complex64::new(amp * s, 0.0);
            }
        }
        Ok(())
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// self += a·other.
    pub fn axpy(&mut self, a: f64, other: &SpectralCoeffs) {
        assert!(self.compatible(other), "spectral tables differ");
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    pub fn compatible(&self, other: &SpectralCoeffs) -> bool {
        self.kind == other.kind && self.truncation == other.truncation
    }

    /// Real L² inner product of the represented fields.
    pub fn inner(&self, other: &SpectralCoeffs) -> f64 {
        assert!(self.compatible(other), "spectral tables differ");
        self.parseval_weights()
            .iter()
            .zip(self.data.iter().zip(&other.data))
            .map(|(w, (a, b))| w * (a * b.conj()).re)
            .sum()
    }

    /// L² norm squared by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    /// Σ w λ |c|², the Dirichlet energy ∫|grad f|².
    pub fn dirichlet_energy(&self) -> f64 {
        self.parseval_weights()
            .iter()
            .zip(self.eigenvalues())
            .zip(&self.data)
            .map(|((w, lam), c)| w * lam * c.norm_sqr())
            .sum()
    }

    /// Multiplies every mode by f(−Δ eigenvalue).
    pub fn map_eigen(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for (v, lam) in out.data.iter_mut().zip(self.eigenvalues()) {
            *v *= f(lam);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Splits into the −Δ eigenvalue-2 part (l = 1 on the sphere) and the
    /// rest. On the torus the first part is always zero.
    pub fn split_degree_one(&self) -> (SpectralCoeffs, SpectralCoeffs) {
        let mut low = SpectralCoeffs::zeros(self.kind, self.truncation);
        let mut high = self.clone();
        if self.kind == SpectralKind::Sphere {
            for (i, l, _) in self.sphere_modes() {
                if l == 1 {
                    low.data[i] = self.data[i];
                    high.data[i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        (low, high)
    }

    /// Copies modes common to both truncations into a table of truncation `lmax`.
    pub fn retruncate(&self, lmax: usize) -> SpectralCoeffs {
        let mut out = SpectralCoeffs::zeros(self.kind, lmax);
        match self.kind {
            SpectralKind::Sphere => {
                for (i, l, m) in self.sphere_modes() {
                    if l <= lmax {
                        let j = out.sphere_index(l, m);
                        out.data[j] = self.data[i];
                    }
                }
            }
            SpectralKind::Torus => {
                let t = lmax as i64;
                for (i, kx, ky) in self.torus_modes() {
                    if kx.abs() <= t && ky.abs() <= t {
                        let j = out.torus_index(kx, ky);
                        out.data[j] = self.data[i];
                    }
                }
            }
        }
        out
    }
}
