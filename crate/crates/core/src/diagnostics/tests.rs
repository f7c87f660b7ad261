use std::f64::consts::PI;

use super::*;
use crate::geometry::{build_chart, ChartKind, Resolution, ScalarField, VectorField};
use crate::killing::sphere_rotation_generators;
use crate::operators::{norm_sq, DiffusionKind};
use crate::solver::{InitialCondition, SimConfig, Solver};
use crate::spectral::SpectralBackend;

#[test]
fn suite_passes_on_all_charts() {
    for kind in [ChartKind::Sphere, ChartKind::Torus, ChartKind::PerturbedSphere] {
        let r = lemma_suite(kind, 42);
        println!("{r}");
        assert!(r.passed(), "{r}");
    }
}

fn sphere(n_lat: usize) -> std::sync::Arc<crate::geometry::Chart> {
    build_chart(ChartKind::Sphere, Resolution::new(2 * n_lat, n_lat), 0.0).unwrap()
}

fn rms_after_mean(chart: &crate::geometry::Chart, f: &ndarray::Array2<f64>) -> f64 {
    let q = chart.quadrature();
    let mean = (f * &q.weights).sum() / q.area;
    ((f.mapv(|v| (v - mean).powi(2)) * &q.weights).sum() / q.area).sqrt()
}

#[test]
fn killing_pressure_is_half_speed_squared() {
    let c = sphere(24);
    let [rx, ry, rz] = sphere_rotation_generators(&c);
    let u = &(&rx + &ry.scale(0.3)) + &rz.scale(-0.7);
    for kind in DiffusionKind::ALL {
        let sol = pressure_solve(&u, 0.01, kind, 0.0).unwrap();
        assert!(sol.residual < 1e-10, "{}", sol.residual);
        let diff = &sol.p.values - &(u.dot(&u).values * 0.5);
        let err = rms_after_mean(&c, &diff);
        assert!(err < 1e-12, "{kind}: {err}");
    }
}

#[test]
fn zero_velocity_has_zero_pressure() {
    let c = sphere(12);
    let sol = pressure_solve(&VectorField::zeros(&c), 0.01, DiffusionKind::Deformation, 0.0).unwrap();
    assert_eq!(sol.p.max_abs(), 0.0);
    assert_eq!(sol.residual, 0.0);
}

#[test]
fn coriolis_zonal_pressure_matches_closed_form() {
    let c = sphere(16);
    let (speed, omega) = (0.5, 2.0 * PI);
    let u = VectorField::from_fn(&c, |_, _| (speed, 0.0));
    let sol = pressure_solve(&u, 0.02, DiffusionKind::Deformation, omega).unwrap();
    let expected = coriolis_zonal_pressure(&c, speed, omega);
    let err = rms_after_mean(&c, &(&sol.p.values - &expected.values));
    let scale = rms_after_mean(&c, &expected.values);
    assert!(err < 1e-10 * scale, "{err} vs {scale}");
}

#[test]
fn divergent_field_is_rejected() {
    let c = sphere(12);
    let u = crate::geometry::grad(&ScalarField::from_fn(&c, |_, p| p.cos()));
    assert!(matches!(pressure_solve(&u, 0.0, DiffusionKind::Hodge, 0.0), Err(crate::Error::NotDivergenceFree(_))));
}

#[test]
fn nonzero_mean_source_is_rejected() {
    let c = sphere(12);
    let ps = PressureSolver::new(&c).unwrap();
    assert!(matches!(ps.solve_source(&ScalarField::constant(&c, 1.0)), Err(crate::Error::Solvability(_))));
}

#[test]
fn perturbed_sphere_curvature_pressure_difference() {
    let c = build_chart(ChartKind::PerturbedSphere, Resolution::new(64, 32), 0.2).unwrap();
    let b = SpectralBackend::transforms_only(&c, 6, 6).unwrap();
    let psi = b.synthesis(&crate::solver::random_band(&b, 1, 6, 1.0, 9).unwrap()).unwrap();
    let u = crate::geometry::perp_grad(&psi);
    let mu = 0.05;
    let l = pressure_solve(&u, mu, DiffusionKind::Deformation, 0.0).unwrap();
    let h = pressure_solve(&u, mu, DiffusionKind::Hodge, 0.0).unwrap();
    assert!(l.residual < 1e-8 && h.residual < 1e-8, "{} {}", l.residual, h.residual);
    // −Δ(δp) = −2μ div(Ri(u)), with a right side that does not vanish
    let rhs = crate::geometry::div(&crate::operators::ricci_action(&u)).scale(-2.0 * mu);
    assert!(norm_sq(&rhs).sqrt() > 1e-3);
    let dp = ScalarField::new(&c, &l.p.values - &h.p.values);
    let lap = crate::geometry::div(&crate::geometry::grad(&dp));
    let res = norm_sq(&(&lap.scale(-1.0) - &rhs)).sqrt() / norm_sq(&rhs).sqrt();
    assert!(res < 1e-8, "{res}");
}

#[test]
fn vorticity_split_examples() {
    let b = SpectralBackend::for_truncation(ChartKind::Sphere, 8).unwrap();
    let y10 = b.real_mode(1, 0, 1.0).unwrap();
    let (k, p) = vorticity_decompose(&y10);
    assert_eq!(k, y10);
    assert_eq!(p.max_abs(), 0.0);
    let y21 = b.real_mode(2, 1, 1.0).unwrap();
    assert_eq!(vorticity_decompose(&y21).0.max_abs(), 0.0);
    let rz = VectorField::from_fn(b.chart(), |_, _| (1.0, 0.0));
    let (k, p) = vorticity_decompose(&b.rot_analysis(&rz).unwrap());
    assert!(p.max_abs() < 1e-13);
    let i = k.sphere_index(1, 0);
    assert!(k.values().iter().enumerate().all(|(j, v)| j == i || v.norm() < 1e-13));
}

fn run_records(cfg: SimConfig, pressure: bool) -> Vec<DiagnosticsRecord> {
    let s = Solver::new(cfg).unwrap();
    let init = s.initial_state().unwrap();
    let rec = Recorder::new(&s, &init, pressure).unwrap();
    let mut out = Vec::new();
    s.run(|st| {
        out.push(rec.record(&s, st)?);
        Ok(())
    })
    .unwrap();
    out
}

#[test]
fn records_satisfy_decomposition_invariants() {
    let ic = InitialCondition::RandomBand { l_min: 1, l_max: 6, amplitude: 0.5, seed: Some(11), zonal: 0.3 };
    let cfg = SimConfig { truncation: 10, t_end: 0.2, dt: Some(0.02), cadence: 2, initial: ic, ..SimConfig::default() };
    let recs = run_records(cfg, true);
    assert_eq!(recs.len(), 6);
    for r in &recs {
        assert!((r.energy_total - r.energy_killing - r.energy_perp).abs() < 1e-8 * r.energy_total);
        assert!(r.enstrophy_cross.abs() < 1e-12 * r.enstrophy_total);
        assert!((r.enstrophy_total - r.enstrophy_killing - r.enstrophy_perp).abs() < 1e-10 * r.enstrophy_total);
        assert!(r.pressure_residual.unwrap() < 1e-9, "{:?}", r.pressure_residual);
        assert!(r.coriolis_uhat.is_none());
        assert!(r.dissipation >= 0.0);
    }
}

#[test]
fn torus_records_have_no_killing_vorticity() {
    let cfg = SimConfig {
        chart: ChartKind::Torus,
        truncation: 5,
        t_end: 0.1,
        initial: InitialCondition::KillingPlusPerturbation { c: 0.4, l: 2, m: 1, amplitude: 0.1 },
        ..SimConfig::default()
    };
    let recs = run_records(cfg, true);
    let r = &recs[0];
    assert_eq!(r.enstrophy_killing, 0.0);
    assert!((r.energy_killing - 0.16 * 4.0 * PI * PI).abs() < 1e-12);
    assert!(r.pressure_residual.unwrap() < 1e-10);
}

#[test]
fn coriolis_uhat_starts_at_perturbation_energy() {
    let cfg = SimConfig {
        truncation: 8,
        rotation_rate: 2.0 * PI,
        t_end: 0.0,
        initial: InitialCondition::KillingPlusPerturbation { c: 0.5, l: 3, m: 1, amplitude: 0.1 },
        ..SimConfig::default()
    };
    let s = Solver::new(cfg.clone()).unwrap();
    let init = s.initial_state().unwrap();
    let rec = Recorder::new(&s, &init, false).unwrap();
    assert!((rec.zonal_reference().unwrap() - 0.5).abs() < 1e-12);
    let r = rec.record(&s, &init).unwrap();
    let uhat = r.coriolis_uhat.unwrap();
    assert!((uhat - r.energy_perp).abs() < 1e-10 * r.energy_total, "{uhat} {}", r.energy_perp);
}

#[test]
fn bracket_claims_vanish_for_rotations() {
    let c = sphere(32);
    let b = SpectralBackend::transforms_only(&c, 8, 8).unwrap();
    let psi = b.synthesis(&crate::solver::random_band(&b, 1, 8, 1.0, 4).unwrap()).unwrap();
    let chi = b.synthesis(&crate::solver::random_band(&b, 1, 8, 1.0, 5).unwrap()).unwrap();
    let u = crate::geometry::perp_grad(&psi);
    let [rx, ..] = sphere_rotation_generators(&c);
    let claims = bracket_claims(&u, &rx, &chi).unwrap();
    assert!(claims.max() < 1e-9, "{claims:?}");
    // u = v gives [u, v] = 0
    assert_eq!(crate::geometry::lie_bracket(&rx, &rx).unwrap().max_abs(), 0.0);
    let r = bracket_residual(&rx, &rx, 0.02, DiffusionKind::Deformation, PressureMode::Formula).unwrap();
    assert!(r < 1e-9, "{r}");
    for mode in [PressureMode::Formula, PressureMode::Solve] {
        for kind in DiffusionKind::ALL {
            let r = bracket_residual(&u, &rx, 0.02, kind, mode).unwrap();
            assert!(r < 1e-10, "{mode:?} {kind}: {r}");
        }
    }
}

#[test]
fn bracket_requires_killing_background() {
    let c = sphere(16);
    let u = VectorField::from_fn(&c, |_, p| (p.cos(), 0.0));
    assert!(matches!(bracket_claims(&u, &u, &ScalarField::zeros(&c)), Err(crate::Error::NotKilling(_))));
}

#[test]
fn perturbed_bracket_with_axial_rotation() {
    let c = build_chart(ChartKind::PerturbedSphere, Resolution::new(64, 32), 0.15).unwrap();
    let b = SpectralBackend::transforms_only(&c, 6, 6).unwrap();
    let psi = b.synthesis(&crate::solver::random_band(&b, 1, 6, 1.0, 8).unwrap()).unwrap();
    let u = crate::geometry::perp_grad(&psi);
    let v = VectorField::from_fn(&c, |_, _| (1.0, 0.0));
    assert!(bracket_claims(&u, &v, &psi).unwrap().max() < 1e-10);
    let r = bracket_residual(&u, &v, 0.05, DiffusionKind::Deformation, PressureMode::Formula).unwrap();
    assert!(r < 1e-7, "{r}");
}

#[test]
fn beta_vanishes_at_start() {
    let ic = InitialCondition::RandomBand { l_min: 1, l_max: 6, amplitude: 1.0, seed: Some(2), zonal: 0.5 };
    let s = Solver::new(SimConfig { truncation: 10, initial: ic, ..SimConfig::default() }).unwrap();
    let st = s.initial_state().unwrap();
    let b0 = beta(&st.u, &st.u, s.killing_basis()).unwrap();
    let scale = norm_sq(&st.u) * norm_sq(&crate::geometry::covariant_derivative(&st.u)).sqrt();
    assert!(b0.abs() < 1e-12 * scale, "{b0}");
}

