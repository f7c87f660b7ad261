//! Time integration of the vorticity equation
//! ζ_t = μΔζ + c·μκζ − g(grad ζ, u) + g(grad a, u)
//! and of its linearization about a frozen field, with an integrating
//! factor for the mode-diagonal linear part and SSP-RK3 for the rest.

mod config;
mod initial;

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

pub use config::{Background, Dynamics, InitialCondition, LinearVariant, SimConfig, CFL_FRACTION, CFL_SAFETY, DEFAULT_DT_CAP};
pub use initial::{initial_vorticity, random_band, solid_rotation_vorticity};

use crate::error::{Error, Result};
use crate::geometry::{build_chart, div, Chart, ChartKind, Resolution, ScalarField, VectorField};
use crate::killing::{killing_basis, project_killing, sphere_rotation_generators, KillingBasis};
use crate::operators::advect;
use crate::spectral::{dealiased_resolution, SpectralBackend, SpectralCoeffs, SpectralKind};

/// Coriolis parameter a = 2ω cos φ and its gradient.
#[derive(Debug, Clone)]
pub struct CoriolisData {
    pub rate: f64,
    pub a: ScalarField,
    pub grad_a: VectorField,
}

impl CoriolisData {
    pub fn new(chart: &Arc<Chart>, rate: f64) -> Self {
        let a = ScalarField::from_fn(chart, |_, p| 2.0 * rate * p.cos());
        let grad_a = VectorField::from_fn(chart, |_, p| (0.0, -2.0 * rate * p.sin()));
        CoriolisData { rate, a, grad_a }
    }
}

/// Snapshot of the flow at time t.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub zeta: SpectralCoeffs,
    pub psi: SpectralCoeffs,
    /// Mean flow (harmonic part), nonzero only on the torus.
    pub mean_flow: [f64; 2],
    pub u: VectorField,
    /// ⟨u, v_i⟩ for the Killing basis fields v_i.
    pub killing_moments: Vec<f64>,
}

/// Integrator bound to one configuration.
pub struct Solver {
    config: SimConfig,
    backend: SpectralBackend,
    basis: KillingBasis,
    coriolis: Option<CoriolisData>,
    background: Option<VectorField>,
    linear_rates: Vec<f64>,
    mean_index: usize,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("config", &self.config).finish()
    }
}

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub final_state: SimState,
    pub dt: f64,
    pub steps: usize,
}

impl Solver {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let res = match config.resolution {
            Some([n_lon, n_lat]) => Resolution::new(n_lon, n_lat),
            None => dealiased_resolution(config.chart, config.truncation),
        };
        let chart = build_chart(config.chart, res, 0.0)?;
        let backend = SpectralBackend::new(&chart, config.truncation)?;
        let basis = killing_basis(&chart)?;
        let coriolis = (config.rotation_rate != 0.0 && config.advection).then(|| CoriolisData::new(&chart, config.rotation_rate));
        let kappa = if config.chart == ChartKind::Sphere { 1.0 } else { 0.0 };
        let factor = config.diffusion.curvature_factor();
        let mu = config.viscosity;
        let zeros = backend.zeros();
        let linear_rates = zeros.eigenvalues().iter().map(|lam| mu * (-lam + factor * kappa)).collect();
        let mean_index = match backend.kind() {
            SpectralKind::Sphere => 0,
            SpectralKind::Torus => zeros.torus_index(0, 0),
        };
        let mut solver = Solver { config, backend, basis, coriolis, background: None, linear_rates, mean_index };
        if let Dynamics::Linearized { background, .. } = solver.config.dynamics {
            let v = match background {
                Background::Initial => solver.initial_state()?.u,
                Background::RotationX => sphere_rotation_generators(&chart)[0].clone(),
                Background::RotationY => sphere_rotation_generators(&chart)[1].clone(),
                Background::RotationZ => sphere_rotation_generators(&chart)[2].clone(),
            };
            solver.background = Some(v);
        }
        Ok(solver)
    }

    /// Replaces the frozen background of a linearized run.
    pub fn with_background(mut self, v: VectorField) -> Result<Self> {
        crate::geometry::check_same(self.chart(), v.chart())?;
        let d = div(&v).max_abs();
        if d > 1e-6 * (1.0 + v.max_abs()) {
            return Err(Error::NotDivergenceFree(d));
        }
        self.background = Some(v);
        Ok(self)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn backend(&self) -> &SpectralBackend {
        &self.backend
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.backend.chart()
    }

    pub fn killing_basis(&self) -> &KillingBasis {
        &self.basis
    }

    pub fn coriolis(&self) -> Option<&CoriolisData> {
        self.coriolis.as_ref()
    }

    pub fn background(&self) -> Option<&VectorField> {
        self.background.as_ref()
    }

    /// Per-mode rate of the linear part μ(−λ + cκ).
    pub fn linear_rates(&self) -> &[f64] {
        &self.linear_rates
    }

    pub fn initial_state(&self) -> Result<SimState> {
        let (zeta, mean) = initial_vorticity(&self.backend, &self.config.initial, self.config.seed)?;
        self.state_from_vorticity(0.0, 0, zeta, mean)
    }

    /// Derives ψ, u and Killing moments from ζ.
    pub fn state_from_vorticity(&self, t: f64, step: usize, mut zeta: SpectralCoeffs, mean_flow: [f64; 2]) -> Result<SimState> {
        let mean = zeta.data[self.mean_index].norm();
        if mean > 1e-10 * (1.0 + zeta.max_abs()) {
            return Err(Error::NonzeroMean(mean));
        }
        zeta.data[self.mean_index] = Complex64::new(0.0, 0.0);
        let (psi, u) = self.velocity(&zeta, mean_flow)?;
        let killing_moments = project_killing(&u, &self.basis)?.moments;
        Ok(SimState { t, step, zeta, psi, mean_flow, u, killing_moments })
    }

    fn velocity(&self, zeta: &SpectralCoeffs, mean_flow: [f64; 2]) -> Result<(SpectralCoeffs, VectorField)> {
        let (psi, mut u) = self.backend.velocity_from_vorticity(zeta)?;
        if mean_flow != [0.0, 0.0] {
            u.comps[0] += mean_flow[0];
            u.comps[1] += mean_flow[1];
        }
        Ok((psi, u))
    }

    /// Explicit tendency of the nonlinear system: −g(grad ζ, u) + g(grad a, u).
    fn explicit_nonlinear(&self, zeta: &SpectralCoeffs, mean_flow: [f64; 2]) -> Result<SpectralCoeffs> {
        if !self.config.advection {
            return Ok(self.backend.zeros());
        }
        let (_, u) = self.velocity(zeta, mean_flow)?;
        let [zt, zp] = self.backend.synthesis_partials(zeta)?;
        let mut prod: Array2<f64> = -(&zt * &u.comps[0] + &zp * &u.comps[1]);
        if let Some(c) = &self.coriolis {
            prod = prod + &c.grad_a.comps[1] * &u.comps[1];
        }
        self.backend.analysis(&ScalarField::new(self.chart(), prod))
    }

    /// Explicit tendency of the linearized system about `v`:
    /// −rot(∇_u v + ∇_v u) (or a single-term variant) plus the Coriolis term.
    fn explicit_linearized(&self, zeta: &SpectralCoeffs, mean_flow: [f64; 2], v: &VectorField, variant: LinearVariant) -> Result<SpectralCoeffs> {
        if !self.config.advection {
            return Ok(self.backend.zeros());
        }
        let (_, u) = self.velocity(zeta, mean_flow)?;
        let w = match variant {
            LinearVariant::Full => &advect(&u, v)? + &advect(v, &u)?,
            LinearVariant::VOnly => advect(v, &u)?,
            LinearVariant::UOnly => advect(&u, v)?,
        };
        let mut tend = self.backend.rot_analysis(&w)?.scale(-1.0);
        if let Some(c) = &self.coriolis {
            let g = ScalarField::new(self.chart(), &c.grad_a.comps[1] * &u.comps[1]);
            tend.axpy(1.0, &self.backend.analysis(&g)?);
        }
        Ok(tend)
    }

    fn explicit(&self, zeta: &SpectralCoeffs, mean_flow: [f64; 2]) -> Result<SpectralCoeffs> {
        let mut t = match self.config.dynamics {
            Dynamics::Nonlinear => self.explicit_nonlinear(zeta, mean_flow)?,
            Dynamics::Linearized { variant, .. } => {
                let v = self.background.as_ref().expect("linearized run has a background");
                self.explicit_linearized(zeta, mean_flow, v, variant)?
            }
        };
        t.data[self.mean_index] = Complex64::new(0.0, 0.0);
        Ok(t)
    }

    fn linear_part(&self, zeta: &SpectralCoeffs) -> SpectralCoeffs {
        let mut out = zeta.clone();
        for (v, r) in out.data.iter_mut().zip(&self.linear_rates) {
            *v *= *r;
        }
        out
    }

    /// Full vorticity tendency of the nonlinear system.
    pub fn rhs_nonlinear(&self, state: &SimState) -> Result<SpectralCoeffs> {
        let mut t = self.explicit_nonlinear(&state.zeta, state.mean_flow)?;
        t.axpy(1.0, &self.linear_part(&state.zeta));
        t.data[self.mean_index] = Complex64::new(0.0, 0.0);
        Ok(t)
    }

    /// Full vorticity tendency of the linearized system about `v`.
    pub fn rhs_linearized(&self, state: &SimState, v: &VectorField, variant: LinearVariant) -> Result<SpectralCoeffs> {
        crate::geometry::check_same(self.chart(), v.chart())?;
        let d = div(v).max_abs();
        if d > 1e-6 * (1.0 + v.max_abs()) {
            return Err(Error::NotDivergenceFree(d));
        }
        let mut t = self.explicit_linearized(&state.zeta, state.mean_flow, v, variant)?;
        t.axpy(1.0, &self.linear_part(&state.zeta));
        t.data[self.mean_index] = Complex64::new(0.0, 0.0);
        Ok(t)
    }

    fn propagate(&self, zeta: &SpectralCoeffs, tau: f64) -> SpectralCoeffs {
        let mut out = zeta.clone();
        for (v, r) in out.data.iter_mut().zip(&self.linear_rates) {
            *v *= (r * tau).exp();
        }
        out
    }

    /// One integrating-factor SSP-RK3 step of size `dt`.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        let mf = state.mean_flow;
        let z0 = &state.zeta;
        let stage = |z: &SpectralCoeffs| -> Result<SpectralCoeffs> {
            let mut s = z.clone();
            s.axpy(dt, &self.explicit(z, mf)?);
            Ok(s)
        };
        let z1 = self.propagate(&stage(z0)?, dt);
        let mut z2 = self.propagate(z0, 0.5 * dt).scale(0.75);
        z2.axpy(0.25, &self.propagate(&stage(&z1)?, -0.5 * dt));
        let mut z3 = self.propagate(z0, dt).scale(1.0 / 3.0);
        z3.axpy(2.0 / 3.0, &self.propagate(&stage(&z2)?, 0.5 * dt));
        z3.data[self.mean_index] = Complex64::new(0.0, 0.0);
        let t = state.t + dt;
        let step = state.step + 1;
        if z3.data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { step, t });
        }
        self.state_from_vorticity(t, step, z3, mf)
    }

    /// Largest advecting speed |u|_g (including the background field).
    pub fn max_speed(&self, state: &SimState) -> f64 {
        let mut s = state.u.speed().max_abs();
        if let Some(v) = &self.background {
            s = s.max(v.speed().max_abs());
        }
        s
    }

    /// Advective time-step limit c_safe·h/max|u|.
    pub fn cfl_limit(&self, state: &SimState) -> f64 {
        let s = self.max_speed(state);
        if s == 0.0 {
            f64::INFINITY
        } else {
            CFL_SAFETY * self.chart().grid_spacing() / s
        }
    }

    /// Time step and step count covering [0, t_end] exactly.
    pub fn plan_steps(&self, initial: &SimState) -> Result<(f64, usize)> {
        let t_end = self.config.t_end;
        let limit = self.cfl_limit(initial);
        let dt0 = match self.config.dt {
            Some(dt) => {
                if dt > limit {
                    return Err(Error::Cfl { step: 0, dt, limit });
                }
                dt
            }
            None => (CFL_FRACTION * limit).min(DEFAULT_DT_CAP),
        };
        if t_end == 0.0 {
            return Ok((dt0, 0));
        }
        let n = (t_end / dt0 - 1e-9).ceil().max(1.0) as usize;
        Ok((t_end / n as f64, n))
    }

    /// Integrates to `t_end`, calling `observer` at step 0, at every
    /// `cadence` steps and at the final step.
    pub fn run(&self, observer: impl FnMut(&SimState) -> Result<()>) -> Result<RunOutcome> {
        self.run_from(self.initial_state()?, observer)
    }

    /// Integrates `state` forward over a span of t_end.
    pub fn run_from(&self, mut state: SimState, mut observer: impl FnMut(&SimState) -> Result<()>) -> Result<RunOutcome> {
        let (dt, steps) = self.plan_steps(&state)?;
        observer(&state)?;
        let cadence = self.config.cadence;
        for k in 1..=steps {
            state = self.step(&state, dt)?;
            let limit = self.cfl_limit(&state);
            if dt > limit {
                return Err(Error::Cfl { step: k, dt, limit });
            }
            if k % cadence == 0 || k == steps {
                observer(&state)?;
            }
        }
        Ok(RunOutcome { final_state: state, dt, steps })
    }
}
