//! Randomised invariants over fields, configs and fits.

use std::sync::OnceLock;

use ns_manifold::diagnostics::fit_decay;
use ns_manifold::geometry::{div, k_rotate, lie_bracket, rot, ChartKind, VectorField};
use ns_manifold::killing::{killing_basis, project_killing, KillingBasis};
use ns_manifold::operators::{advect, deformation_l, inner_l2, norm_sq};
use ns_manifold::solver::{random_band, InitialCondition, SimConfig};
use ns_manifold::spectral::SpectralBackend;
use proptest::prelude::*;

const LMAX: usize = 8;

fn sphere() -> &'static SpectralBackend {
    static B: OnceLock<SpectralBackend> = OnceLock::new();
    B.get_or_init(|| SpectralBackend::for_truncation(ChartKind::Sphere, LMAX).unwrap())
}

fn torus() -> &'static SpectralBackend {
    static B: OnceLock<SpectralBackend> = OnceLock::new();
    B.get_or_init(|| SpectralBackend::for_truncation(ChartKind::Torus, LMAX).unwrap())
}

fn backend(on_torus: bool) -> &'static SpectralBackend {
    if on_torus {
        torus()
    } else {
        sphere()
    }
}

fn basis(on_torus: bool) -> &'static KillingBasis {
    static S: OnceLock<KillingBasis> = OnceLock::new();
    static T: OnceLock<KillingBasis> = OnceLock::new();
    let cell = if on_torus { &T } else { &S };
    cell.get_or_init(|| killing_basis(backend(on_torus).chart()).unwrap())
}

/// Divergence-free field K grad ψ with ψ band-limited to degree `deg`.
fn stream_field(on_torus: bool, deg: usize, seed: u64) -> VectorField {
    let b = backend(on_torus);
    let psi = random_band(b, 1, deg, 1.0, seed).unwrap();
    b.synthesis_k_grad(&psi).unwrap()
}

fn rel(a: &VectorField, b: &VectorField) -> f64 {
    norm_sq(&(a - b)).sqrt() / (norm_sq(a).sqrt() + norm_sq(b).sqrt()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_round_trip(seed in any::<u64>(), on_torus in any::<bool>(), deg in 1usize..=LMAX) {
        let b = backend(on_torus);
        let c = random_band(b, 1, deg, 1.0, seed).unwrap();
        let back = b.analysis(&b.synthesis(&c).unwrap()).unwrap();
        let mut d = back.clone();
        d.axpy(-1.0, &c);
        prop_assert!(d.max_abs() <= 1e-12 * c.max_abs().max(1.0));
    }

    #[test]
    fn k_squares_to_minus_identity(seed in any::<u64>(), on_torus in any::<bool>()) {
        let u = stream_field(on_torus, 5, seed);
        let kk = k_rotate(&k_rotate(&u));
        prop_assert!(rel(&kk, &u.scale(-1.0)) < 1e-13);
        // K is an isometry and rotates by a right angle
        prop_assert!((norm_sq(&k_rotate(&u)) - norm_sq(&u)).abs() <= 1e-12 * norm_sq(&u));
        prop_assert!(inner_l2(&k_rotate(&u), &u).unwrap().abs() <= 1e-12 * norm_sq(&u));
    }

    #[test]
    fn stream_fields_are_divergence_free(seed in any::<u64>(), on_torus in any::<bool>()) {
        let u = stream_field(on_torus, 6, seed);
        let scale = norm_sq(&u).sqrt();
        prop_assert!(div(&u).max_abs() < 1e-10 * scale.max(1.0));
    }

    #[test]
    fn rot_inverts_stream_synthesis(seed in any::<u64>(), on_torus in any::<bool>()) {
        // rot(K grad ψ) = −Δψ with the outward orientation
        let b = backend(on_torus);
        let psi = random_band(b, 1, 5, 1.0, seed).unwrap();
        let u = b.synthesis_k_grad(&psi).unwrap();
        let lap = b.synthesis(&b.laplacian(&psi).unwrap()).unwrap();
        let r = rot(&u);
        let err = (&r + &lap).max_abs();
        prop_assert!(err < 1e-10 * lap.max_abs().max(1.0), "{}", err);
    }

    #[test]
    fn killing_projection_is_orthogonal(seed in any::<u64>(), on_torus in any::<bool>(), shift in -2.0f64..2.0) {
        let mut u = stream_field(on_torus, 4, seed);
        let basis = basis(on_torus);
        u = &u + &basis.fields[0].scale(shift);
        let p = project_killing(&u, basis).unwrap();
        let total = norm_sq(&u);
        let parts = norm_sq(&p.killing) + norm_sq(&p.perp);
        prop_assert!((total - parts).abs() <= 1e-12 * total);
        for v in &basis.fields {
            prop_assert!(inner_l2(&p.perp, v).unwrap().abs() <= 1e-12 * total.sqrt() * norm_sq(v).sqrt());
        }
        // projecting twice changes nothing
        let again = project_killing(&p.killing, basis).unwrap();
        prop_assert!(norm_sq(&again.perp) <= 1e-24 * total.max(1.0));
    }

    #[test]
    fn deformation_operator_kills_killing_fields(c in proptest::collection::vec(-3.0f64..3.0, 3)) {
        let basis = basis(false);
        let mut w = VectorField::zeros(backend(false).chart());
        for (ci, v) in c.iter().zip(&basis.fields) {
            w = &w + &v.scale(*ci);
        }
        let scale = norm_sq(&w).sqrt().max(1e-3);
        prop_assert!(norm_sq(&deformation_l(&w)).sqrt() < 1e-10 * scale);
    }

    #[test]
    fn advection_is_energy_neutral(a in any::<u64>(), b in any::<u64>(), on_torus in any::<bool>()) {
        // ⟨∇_u v, v⟩ = 0 for divergence-free u
        let u = stream_field(on_torus, 3, a);
        let v = stream_field(on_torus, 3, b);
        let t = inner_l2(&advect(&u, &v).unwrap(), &v).unwrap();
        prop_assert!(t.abs() < 1e-10 * norm_sq(&u).sqrt() * norm_sq(&v));
    }

    #[test]
    fn lie_bracket_is_antisymmetric(a in any::<u64>(), b in any::<u64>(), on_torus in any::<bool>()) {
        let u = stream_field(on_torus, 3, a);
        let v = stream_field(on_torus, 3, b);
        let uv = lie_bracket(&u, &v).unwrap();
        let vu = lie_bracket(&v, &u).unwrap();
        prop_assert!(norm_sq(&(&uv + &vu)).sqrt() <= 1e-12 * norm_sq(&uv).sqrt().max(1.0));
    }

    #[test]
    fn decay_fit_recovers_exponents(rate in -2.0f64..0.5, amp in 1e-6f64..1e3, n in 4usize..40) {
        let series: Vec<(f64, f64)> = (0..n).map(|i| {
            let t = i as f64 * 0.1;
            (t, amp * (rate * t).exp())
        }).collect();
        let fit = fit_decay(&series, (0.0, 10.0)).unwrap();
        prop_assert!((fit.exponent - rate).abs() < 1e-9);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn config_survives_serde(
        truncation in 2usize..64,
        viscosity in 0.0f64..1.0,
        dt in proptest::option::of(1e-4f64..0.1),
        cadence in 1usize..100,
        seed in any::<u64>(),
        band in (1usize..4, 0usize..4),
        zonal in -1.0f64..1.0,
    ) {
        let cfg = SimConfig {
            truncation,
            viscosity,
            dt,
            cadence,
            seed,
            initial: InitialCondition::RandomBand { l_min: band.0, l_max: band.0 + band.1, amplitude: 0.5, seed: Some(seed), zonal },
            ..SimConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: SimConfig = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
