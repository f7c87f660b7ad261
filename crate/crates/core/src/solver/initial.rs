use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::InitialCondition;
use crate::error::{Error, Result};
use crate::geometry::VectorField;
use crate::spectral::{SpectralBackend, SpectralCoeffs, SpectralKind};

/// Vorticity coefficient of the solid rotation c·∂_θ: rot(∂_θ) = −2 cos φ.
pub fn solid_rotation_vorticity(backend: &SpectralBackend, c: f64) -> SpectralCoeffs {
    let mut z = backend.zeros();
    if backend.kind() == SpectralKind::Sphere {
        let i = z.sphere_index(1, 0);
        z.data[i] = Complex64::new(-2.0 * (4.0 * PI / 3.0).sqrt() * c, 0.0);
    }
    z
}

/// Random vorticity with unit-normal coefficients in the given band.
/// On the torus the band is l_min ≤ |k| ≤ l_max (Euclidean length).
pub fn random_band(backend: &SpectralBackend, l_min: usize, l_max: usize, rms_speed: f64, seed: u64) -> Result<SpectralCoeffs> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = backend.zeros();
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    match backend.kind() {
        SpectralKind::Sphere => {
            for (i, l, m) in z.clone().sphere_modes() {
                if (l_min..=l_max).contains(&l) {
                    let re = normal();
                    let im = if m == 0 { 0.0 } else { normal() };
                    z.data[i] = Complex64::new(re, im);
                }
            }
        }
        SpectralKind::Torus => {
            let (lo, hi) = ((l_min * l_min) as i64, (l_max * l_max) as i64);
            for (i, kx, ky) in z.clone().torus_modes() {
                let k2 = kx * kx + ky * ky;
                if k2 < lo || k2 > hi {
                    continue;
                }
                let j = z.torus_index(-kx, -ky);
                if j > i {
                    let v = Complex64::new(normal(), normal());
                    z.data[i] = v;
                    z.data[j] = v.conj();
                }
            }
        }
    }
    // ‖u‖² = Σ w |ζ|²/λ
    let energy: f64 = z
        .parseval_weights()
        .iter()
        .zip(z.eigenvalues())
        .zip(&z.data)
        .filter(|(( _, lam), _)| *lam > 0.0)
        .map(|((w, lam), c)| w * c.norm_sqr() / lam)
        .sum();
    if energy == 0.0 {
        return Err(Error::InitialCondition(format!("band {l_min}..={l_max} contains no modes")));
    }
    let area = backend.chart().quadrature().area;
    Ok(z.scale(rms_speed * (area / energy).sqrt()))
}

/// Builds the initial vorticity and torus mean flow for a preset.
pub fn initial_vorticity(backend: &SpectralBackend, ic: &InitialCondition, default_seed: u64) -> Result<(SpectralCoeffs, [f64; 2])> {
    let torus = backend.kind() == SpectralKind::Torus;
    let zonal = |c: f64| -> (SpectralCoeffs, [f64; 2]) {
        if torus {
            (backend.zeros(), [c, 0.0])
        } else {
            (solid_rotation_vorticity(backend, c), [0.0, 0.0])
        }
    };
    match *ic {
        InitialCondition::SingleMode { l, m, amplitude } => {
            check_mode(backend, l, m)?;
            Ok((backend.real_mode(l, m, amplitude)?, [0.0, 0.0]))
        }
        InitialCondition::RandomBand { l_min, l_max, amplitude, seed, zonal: c } => {
            if l_min < 1 || l_min > l_max || l_max > backend.truncation() {
                return Err(Error::InitialCondition(format!("band {l_min}..={l_max} invalid for truncation {}", backend.truncation())));
            }
            let mut z = random_band(backend, l_min, l_max, amplitude, seed.unwrap_or(default_seed))?;
            let (zk, mean) = zonal(c);
            z.axpy(1.0, &zk);
            Ok((z, mean))
        }
        InitialCondition::KillingPlusPerturbation { c, l, m, amplitude } => {
            check_mode(backend, l, m)?;
            let (mut z, mean) = zonal(c);
            z.axpy(1.0, &backend.real_mode(l, m, amplitude)?);
            Ok((z, mean))
        }
        InitialCondition::ZonalJet { amplitude, center, width } => {
            let chart = backend.chart();
            let u = if torus {
                VectorField::from_fn(chart, |_, y| (amplitude * (-(1.0 - (y - center).cos()) / (width * width)).exp(), 0.0))
            } else {
                let x0 = center.cos();
                VectorField::from_fn(chart, |_, p| (amplitude * (-((p.cos() - x0) / width).powi(2)).exp(), 0.0))
            };
            let mut z = backend.rot_analysis(&u)?;
            let mean_index = if torus { z.torus_index(0, 0) } else { 0 };
            z.data[mean_index] = Complex64::new(0.0, 0.0);
            let mean = if torus {
                let q = &chart.quadrature();
                [(&u.comps[0] * &q.weights).sum() / q.area, 0.0]
            } else {
                [0.0, 0.0]
            };
            Ok((z, mean))
        }
    }
}

fn check_mode(backend: &SpectralBackend, l: i64, m: i64) -> Result<()> {
    let lmax = backend.truncation() as i64;
    let ok = match backend.kind() {
        SpectralKind::Sphere => l >= 1 && l <= lmax && m.abs() <= l,
        SpectralKind::Torus => (l, m) != (0, 0) && l.abs() <= lmax && m.abs() <= lmax,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InitialCondition(format!("mode ({l}, {m}) not admissible at truncation {lmax}")))
    }
}
