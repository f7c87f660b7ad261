use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChartKind;
use crate::operators::DiffusionKind;

/// Initial vorticity presets. On the torus `(l, m)` is read as a wave
/// vector (k_x, k_y) and zonal Killing amplitudes become a mean flow (c, 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// ζ = amplitude · Y_lm (real orthonormal harmonic).
    SingleMode { l: i64, m: i64, amplitude: f64 },
    /// Unit-normal random coefficients in l_min ≤ l ≤ l_max, scaled to RMS
    /// speed `amplitude`, plus an optional zonal rotation `zonal`·∂_θ.
    RandomBand {
        l_min: usize,
        l_max: usize,
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        zonal: f64,
    },
    /// c·∂_θ plus amplitude · Y_lm in vorticity.
    KillingPlusPerturbation { c: f64, l: i64, m: i64, amplitude: f64 },
    /// Zonal jet u^θ = amplitude · exp(−((cos φ − cos center)/width)²).
    ZonalJet { amplitude: f64, center: f64, width: f64 },
}

/// Variants of the linearized advection term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearVariant {
    /// ∇_u v + ∇_v u.
    Full,
    /// ∇_v u only.
    VOnly,
    /// ∇_u v only.
    UOnly,
}

/// Frozen background field of a linearized run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    /// The initial velocity.
    Initial,
    RotationX,
    RotationY,
    RotationZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dynamics {
    Nonlinear,
    Linearized { variant: LinearVariant, background: Background },
}

/// Complete description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub chart: ChartKind,
    /// Spectral truncation L.
    pub truncation: usize,
    /// Grid override `[n_lon, n_lat]`; defaults to the smallest dealiasing grid.
    #[serde(default)]
    pub resolution: Option<[usize; 2]>,
    /// Viscosity μ.
    pub viscosity: f64,
    pub diffusion: DiffusionKind,
    /// Rotation rate ω of the frame; 0 disables the Coriolis term.
    #[serde(default)]
    pub rotation_rate: f64,
    /// Time step; chosen from the CFL limit when absent.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub initial: InitialCondition,
    /// Diagnostics every `cadence` steps.
    pub cadence: usize,
    /// Grid snapshots every this many steps (none when absent).
    #[serde(default)]
    pub snapshot_cadence: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub seed: u64,
    #[serde(default = "default_dynamics")]
    pub dynamics: Dynamics,
    /// Test hook: drop the advection and Coriolis terms.
    #[serde(default = "default_true")]
    pub advection: bool,
}

fn default_dynamics() -> Dynamics {
    Dynamics::Nonlinear
}

fn default_true() -> bool {
    true
}

pub const DEFAULT_DT_CAP: f64 = 0.01;
pub const CFL_SAFETY: f64 = 1.0;
pub const CFL_FRACTION: f64 = 0.5;

impl Default for SimConfig {
    /// Decaying turbulence on the sphere with the deformation operator.
    fn default() -> Self {
        SimConfig {
            chart: ChartKind::Sphere,
            truncation: 31,
            resolution: None,
            viscosity: 0.01,
            diffusion: DiffusionKind::Deformation,
            rotation_rate: 0.0,
            dt: None,
            t_end: 5.0,
            initial: InitialCondition::SingleMode { l: 2, m: 1, amplitude: 1e-3 },
            cadence: 10,
            snapshot_cadence: None,
            output_dir: None,
            seed: 42,
            dynamics: Dynamics::Nonlinear,
            advection: true,
        }
    }
}

impl SimConfig {
    /// Checks field-level invariants.
    pub fn validate(&self) -> Result<()> {
        if self.chart == ChartKind::PerturbedSphere {
            return Err(Error::config("chart", "time integration is not supported on perturbed_sphere"));
        }
        if self.truncation < 1 {
            return Err(Error::config("truncation", "must be at least 1"));
        }
        if !(self.viscosity.is_finite() && self.viscosity >= 0.0) {
            return Err(Error::config("viscosity", format!("must be finite and >= 0, got {}", self.viscosity)));
        }
        if !self.rotation_rate.is_finite() {
            return Err(Error::config("rotation_rate", "must be finite"));
        }
        if self.rotation_rate != 0.0 && self.chart == ChartKind::Torus {
            return Err(Error::config("rotation_rate", "the Coriolis term is only defined on the sphere"));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::config("dt", format!("must be > 0, got {dt}")));
            }
            if self.t_end > 0.0 && self.t_end < dt {
                return Err(Error::config("t_end", format!("must be >= dt ({dt}), got {}", self.t_end)));
            }
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::config("t_end", format!("must be >= 0, got {}", self.t_end)));
        }
        if self.cadence == 0 {
            return Err(Error::config("cadence", "must be at least 1"));
        }
        if self.snapshot_cadence == Some(0) {
            return Err(Error::config("snapshot_cadence", "must be at least 1"));
        }
        if let Some([n_lon, n_lat]) = self.resolution {
            if n_lon < 4 || n_lat < 4 {
                return Err(Error::config("resolution", "need at least 4 points per direction"));
            }
        }
        if let Dynamics::Linearized { background, .. } = self.dynamics {
            if self.chart == ChartKind::Torus && background != Background::Initial {
                return Err(Error::config("dynamics.background", "rotation backgrounds exist only on the sphere"));
            }
        }
        self.validate_initial()
    }

    fn validate_initial(&self) -> Result<()> {
        let lmax = self.truncation as i64;
        let check_mode = |l: i64, m: i64| -> Result<()> {
            match self.chart {
                ChartKind::Torus => {
                    if (l, m) == (0, 0) {
                        return Err(Error::config("initial", "wave vector (0, 0) carries no vorticity"));
                    }
                    if l.abs() > lmax || m.abs() > lmax {
                        return Err(Error::config("initial", format!("wave vector ({l}, {m}) exceeds truncation {lmax}")));
                    }
                }
                _ => {
                    if l < 1 {
                        return Err(Error::config("initial.l", format!("must be >= 1, got {l}")));
                    }
                    if l > lmax {
                        return Err(Error::config("initial.l", format!("{l} exceeds truncation {lmax}")));
                    }
                    if m.abs() > l {
                        return Err(Error::config("initial.m", format!("|m| = {} exceeds l = {l}", m.abs())));
                    }
                }
            }
            Ok(())
        };
        match &self.initial {
            InitialCondition::SingleMode { l, m, amplitude } | InitialCondition::KillingPlusPerturbation { l, m, amplitude, .. } => {
                check_mode(*l, *m)?;
                if !amplitude.is_finite() {
                    return Err(Error::config("initial.amplitude", "must be finite"));
                }
            }
            InitialCondition::RandomBand { l_min, l_max, amplitude, .. } => {
                if *l_min < 1 || l_min > l_max {
                    return Err(Error::config("initial.l_min", format!("need 1 <= l_min <= l_max, got {l_min}..{l_max}")));
                }
                if *l_max as i64 > lmax {
                    return Err(Error::config("initial.l_max", format!("{l_max} exceeds truncation {lmax}")));
                }
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(Error::config("initial.amplitude", "must be finite and >= 0"));
                }
            }
            InitialCondition::ZonalJet { width, .. } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::config("initial.width", "must be > 0"));
                }
            }
        }
        Ok(())
    }
}
