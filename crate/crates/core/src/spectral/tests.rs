use std::f64::consts::PI;

use super::*;
use crate::geometry::{div, rot};
use crate::operators::{inner_l2, norm_sq};

fn sphere(l: usize) -> SpectralBackend {
    SpectralBackend::for_truncation(ChartKind::Sphere, l).unwrap()
}

fn torus(l: usize) -> SpectralBackend {
    SpectralBackend::for_truncation(ChartKind::Torus, l).unwrap()
}

fn pseudo_random(b: &SpectralBackend, seed: u64) -> SpectralCoeffs {
    let mut c = b.zeros();
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    match b.kind() {
        SpectralKind::Sphere => {
            for (i, _, m) in c.clone().sphere_modes() {
                c.data[i] = Complex64::new(next(), if m == 0 { 0.0 } else { next() });
            }
        }
        SpectralKind::Torus => {
            for (i, kx, ky) in c.clone().torus_modes() {
                let j = c.torus_index(-kx, -ky);
                if j < i {
                    c.data[i] = c.data[j].conj();
                } else if j == i {
                    c.data[i] = Complex64::new(next(), 0.0);
                } else {
                    c.data[i] = Complex64::new(next(), next());
                }
            }
        }
    }
    c
}

#[test]
fn grid_sizes() {
    assert_eq!(dealiased_resolution(ChartKind::Sphere, 31), Resolution::new(96, 48));
    assert_eq!(dealiased_resolution(ChartKind::Sphere, 15), Resolution::new(48, 24));
    assert_eq!(dealiased_resolution(ChartKind::Torus, 10), Resolution::new(32, 32));
    assert_eq!(dealiased_resolution(ChartKind::Torus, 21), Resolution::new(64, 64));
}

#[test]
fn round_trips() {
    for b in [sphere(12), torus(8)] {
        let c = pseudo_random(&b, 3);
        let f = b.synthesis(&c).unwrap();
        let c2 = b.analysis(&f).unwrap();
        let mut d = c2.clone();
        d.axpy(-1.0, &c);
        assert!(d.max_abs() < 1e-12, "{:?}", b.kind());
        let f2 = b.synthesis(&c2).unwrap();
        assert!((&f2 - &f).max_abs() < 1e-12);
    }
}

#[test]
fn parseval() {
    for b in [sphere(10), torus(6)] {
        let c = pseudo_random(&b, 11);
        let f = b.synthesis(&c).unwrap();
        let q = norm_sq(&f);
        assert!((q - c.norm_sq()).abs() < 1e-10 * q);
    }
}

#[test]
fn y10_is_a_single_coefficient() {
    let b = sphere(6);
    let f = ScalarField::from_fn(b.chart(), |_, p| (3.0 / (4.0 * PI)).sqrt() * p.cos());
    let c = b.analysis(&f).unwrap();
    let i = c.sphere_index(1, 0);
    assert!((c.data[i].re - 1.0).abs() < 1e-13);
    let rest: f64 = c.data.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v.norm()).sum();
    assert!(rest < 1e-13);
}

#[test]
fn real_harmonic_y21_is_normalised() {
    let b = sphere(6);
    let c = b.real_mode(2, 1, 1.0).unwrap();
    let f = b.synthesis(&c).unwrap();
    assert!((inner_l2(&f, &f).unwrap() - 1.0).abs() < 1e-12);
    // √2 Ñ_21 cos θ = sqrt(15/4π) sin φ cos φ cos θ
    let expected = ScalarField::from_fn(b.chart(), |t, p| (15.0 / (4.0 * PI)).sqrt() * p.sin() * p.cos() * t.cos());
    assert!((&f - &expected).max_abs() < 1e-13);
}

#[test]
fn super_truncation_content_is_discarded() {
    let b = sphere(8);
    let f = ScalarField::from_fn(b.chart(), |t, p| (p.cos() * 3.0).sin().signum() + (t * 2.0).cos());
    let c = b.analysis(&f).unwrap();
    let retained = b.synthesis(&c).unwrap();
    // Bessel: the projection cannot have more energy than the field
    assert!(c.norm_sq() <= norm_sq(&f) + 1e-12);
    assert!((norm_sq(&retained) - c.norm_sq()).abs() < 1e-10);
}

#[test]
fn laplacian_eigenvalues() {
    let b = sphere(6);
    for (l, lam) in [(1, 2.0), (2, 6.0)] {
        for m in -(l as i64)..=(l as i64) {
            let c = b.real_mode(l as i64, m, 1.0).unwrap();
            let lap = b.laplacian(&c).unwrap();
            let mut d = lap.clone();
            d.axpy(lam, &c);
            assert!(d.max_abs() < 1e-15);
        }
    }
    let c = pseudo_random(&b, 5);
    let mut c0 = c.clone();
    c0.data[0] = Complex64::new(0.0, 0.0);
    let back = b.invert_laplacian(&b.laplacian(&c0).unwrap()).unwrap();
    let mut d = back;
    d.axpy(-1.0, &c0);
    assert!(d.max_abs() < 1e-14);
    assert!(matches!(b.invert_laplacian(&c), Err(Error::NonzeroMean(_))));
}

#[test]
fn velocity_round_trip_and_divergence() {
    for b in [sphere(12), torus(8)] {
        let mut z = pseudo_random(&b, 9);
        let i0 = match b.kind() {
            SpectralKind::Sphere => 0,
            SpectralKind::Torus => z.torus_index(0, 0),
        };
        z.data[i0] = Complex64::new(0.0, 0.0);
        let (psi, u) = b.velocity_from_vorticity(&z).unwrap();
        let zeta = b.synthesis(&z).unwrap();
        let scale = zeta.max_abs();
        assert!((&rot(&u) - &zeta).max_abs() < 1e-10 * scale, "{:?}", b.kind());
        assert!(div(&u).max_abs() < 1e-10 * scale);
        let energy = norm_sq(&u);
        assert!((energy - psi.dirichlet_energy()).abs() < 1e-10 * energy);
        // weak-form analysis of rot agrees with the pointwise operator
        let mut d = b.rot_analysis(&u).unwrap();
        d.axpy(-1.0, &z);
        assert!(d.max_abs() < 1e-10 * scale);
    }
}

#[test]
fn degree_one_vorticity_is_solid_rotation() {
    let b = sphere(5);
    // rot(∂_θ) = −2 cos φ = −2 sqrt(4π/3) Y_10
    let z = b.real_mode(1, 0, -2.0 * (4.0 * PI / 3.0).sqrt()).unwrap();
    let (_, u) = b.velocity_from_vorticity(&z).unwrap();
    let expected = VectorField::from_fn(b.chart(), |_, _| (1.0, 0.0));
    assert!((&u - &expected).max_abs() < 1e-13);
}

#[test]
fn zero_vorticity_gives_zero_velocity() {
    let b = torus(4);
    let (_, u) = b.velocity_from_vorticity(&b.zeros()).unwrap();
    assert_eq!(u.max_abs(), 0.0);
}

#[test]
fn rejects_coarse_grids_and_perturbed_sphere() {
    let c = build_chart(ChartKind::Sphere, Resolution::new(32, 16), 0.0).unwrap();
    assert!(SpectralBackend::new(&c, 31).is_err());
    let p = build_chart(ChartKind::PerturbedSphere, Resolution::new(32, 16), 0.1).unwrap();
    assert!(SpectralBackend::new(&p, 5).is_err());
}
