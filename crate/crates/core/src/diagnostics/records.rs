use serde::Serialize;

use super::pressure::PressureSolver;
use crate::error::Result;
use crate::geometry::{build_chart, ChartKind, Resolution, VectorField};
use crate::killing::project_killing;
use crate::operators::{deformation_s, inner_l2, norm_sq};
use crate::solver::{RunOutcome, SimState, Solver};
use crate::spectral::{SpectralBackend, SpectralCoeffs, SpectralKind};

/// Per-tick observables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: usize,
    pub energy_total: f64,
    pub energy_killing: f64,
    pub energy_perp: f64,
    /// ⟨u, v_i⟩ for the Killing basis fields.
    pub killing_moments: Vec<f64>,
    pub enstrophy_total: f64,
    pub enstrophy_killing: f64,
    pub enstrophy_perp: f64,
    /// ⟨ζ_K, ζ_⊥⟩ by grid quadrature.
    pub enstrophy_cross: f64,
    /// ∫ g(S_u, S_u).
    pub dissipation: f64,
    pub pressure_residual: Option<f64>,
    /// ‖u − c∂_θ‖² for the zonal reference c of the initial state.
    pub coriolis_uhat: Option<f64>,
}

/// Splits ζ into its degree-one part (vorticity of the Killing component)
/// and the remainder. On the torus Killing fields carry no vorticity and
/// the split is (0, ζ).
pub fn vorticity_decompose(zeta: &SpectralCoeffs) -> (SpectralCoeffs, SpectralCoeffs) {
    zeta.split_degree_one()
}

/// Computes records for one solver, holding the fine-grid pressure solver.
pub struct Recorder {
    zonal: Option<(f64, VectorField)>,
    pressure: Option<PressureSolver>,
}

impl std::fmt::Debug for Recorder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Recorder").field("zonal", &self.zonal.as_ref().map(|z| z.0)).field("pressure", &self.pressure).finish()
    }
}

/// Fine grid on which products of two truncation-L fields are exact.
fn pressure_resolution(kind: ChartKind, lmax: usize) -> Resolution {
    match kind {
        ChartKind::Torus => {
            let n = (4 * lmax + 2).next_power_of_two();
            Resolution::new(n, n)
        }
        _ => Resolution::new(4 * lmax + 4, 2 * lmax + 2),
    }
}

impl Recorder {
    /// `with_pressure` enables the pressure solve at every record. The
    /// Coriolis ‖û‖² column is filled when the rotation rate is nonzero.
    pub fn new(solver: &Solver, initial: &SimState, with_pressure: bool) -> Result<Self> {
        let cfg = solver.config();
        let zonal = if cfg.rotation_rate != 0.0 && cfg.chart == ChartKind::Sphere {
            let basis = solver.killing_basis();
            let c = initial.killing_moments[2] / basis.gram[(2, 2)];
            Some((c, basis.fields[2].clone()))
        } else {
            None
        };
        let pressure = if with_pressure {
            let chart = build_chart(cfg.chart, pressure_resolution(cfg.chart, cfg.truncation), 0.0)?;
            Some(PressureSolver::new(&chart)?)
        } else {
            None
        };
        Ok(Recorder { zonal, pressure })
    }

    pub fn zonal_reference(&self) -> Option<f64> {
        self.zonal.as_ref().map(|z| z.0)
    }

    /// Velocity of `state` resampled on the pressure grid.
    pub fn fine_velocity(&self, state: &SimState) -> Option<Result<VectorField>> {
        let ps = self.pressure.as_ref()?;
        let b: &SpectralBackend = ps.backend()?;
        Some((|| {
            let mut u = b.synthesis_k_grad(&state.psi.retruncate(b.truncation()))?;
            u.comps[0] += state.mean_flow[0];
            u.comps[1] += state.mean_flow[1];
            Ok(u)
        })())
    }

    pub fn record(&self, solver: &Solver, state: &SimState) -> Result<DiagnosticsRecord> {
        let cfg = solver.config();
        let backend = solver.backend();
        let proj = project_killing(&state.u, solver.killing_basis())?;
        let energy_total = norm_sq(&state.u);
        let energy_killing = norm_sq(&proj.killing);
        let energy_perp = norm_sq(&proj.perp);

        let (zk, zp) = vorticity_decompose(&state.zeta);
        let (enstrophy_killing, enstrophy_perp, enstrophy_cross) = if backend.kind() == SpectralKind::Sphere {
            let gk = backend.synthesis(&zk)?;
            let gp = backend.synthesis(&zp)?;
            (norm_sq(&gk), norm_sq(&gp), inner_l2(&gk, &gp)?)
        } else {
            let gp = backend.synthesis(&zp)?;
            (0.0, norm_sq(&gp), 0.0)
        };
        let enstrophy_total = norm_sq(&backend.synthesis(&state.zeta)?);
        let dissipation = norm_sq(&deformation_s(&state.u));

        let pressure_residual = match (&self.pressure, self.fine_velocity(state)) {
            (Some(ps), Some(u)) => Some(ps.solve(&u?, cfg.viscosity, cfg.diffusion, cfg.rotation_rate)?.residual),
            _ => None,
        };
        let coriolis_uhat = self.zonal.as_ref().map(|(c, dz)| norm_sq(&(&state.u - &dz.scale(*c))));
        Ok(DiagnosticsRecord {
            t: state.t,
            step: state.step,
            energy_total,
            energy_killing,
            energy_perp,
            killing_moments: state.killing_moments.clone(),
            enstrophy_total,
            enstrophy_killing,
            enstrophy_perp,
            enstrophy_cross,
            dissipation,
            pressure_residual,
            coriolis_uhat,
        })
    }
}

/// Runs the solver, recording diagnostics at every observation. The
/// callback sees each state with its record (snapshots, streaming output).
pub fn record_run(
    solver: &Solver,
    with_pressure: bool,
    mut on_record: impl FnMut(&SimState, &DiagnosticsRecord) -> Result<()>,
) -> Result<(RunOutcome, Vec<DiagnosticsRecord>)> {
    let initial = solver.initial_state()?;
    let recorder = Recorder::new(solver, &initial, with_pressure)?;
    let mut records = Vec::new();
    let outcome = solver.run(|st| {
        let r = recorder.record(solver, st)?;
        on_record(st, &r)?;
        records.push(r);
        Ok(())
    })?;
    Ok((outcome, records))
}
