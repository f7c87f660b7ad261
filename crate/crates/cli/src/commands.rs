//! Subcommand implementations. Each returns the summary it wrote.

use std::path::{Path, PathBuf};

use ns_manifold::diagnostics::{beta, fit_decay, lemma_suite, record_run, DiagnosticsRecord, LemmaReport};
use ns_manifold::geometry::{lie_bracket, ChartKind};
use ns_manifold::killing::{estimate_alpha, AlphaKind};
use ns_manifold::operators::{norm_sq, DiffusionKind};
use ns_manifold::solver::{Background, Dynamics, SimConfig, SimState, Solver};

use crate::config::{AlphaOptions, Preset, VerifyOptions};
use crate::error::CliError;
use crate::output::{self, Summary, CONFIG_FILE, DIAGNOSTICS_FILE, SUMMARY_FILE};

pub const DEFAULT_OUTPUT_DIR: &str = "nsm_output";
/// Relative Killing-moment drift accepted as conservation.
pub const KILLING_DRIFT_TOL: f64 = 1e-6;
/// Slack for the monotonicity flags.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Output directory: command line, then config, then the default.
pub fn output_dir(flag: Option<&Path>, config: Option<&str>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn nonincreasing(values: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK) + f64::MIN_POSITIVE)
}

/// Fit window: the last nine tenths of the run, capped to start by t = 0.5.
fn fit_window(t_end: f64) -> (f64, f64) {
    ((0.1 * t_end).min(0.5), t_end)
}

fn fit_into(summary: &mut Summary, key: &str, records: &[DiagnosticsRecord], value: impl Fn(&DiagnosticsRecord) -> f64, t_end: f64) {
    let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, value(r))).collect();
    match fit_decay(&series, fit_window(t_end)) {
        Ok(fit) => {
            summary.num(format!("{key}.exponent"), fit.exponent);
            summary.num(format!("{key}.r_squared"), fit.r_squared);
        }
        Err(e) => {
            summary.put(format!("{key}.exponent"), format!("unavailable ({e})"));
        }
    }
}

/// ‖û(T) − [u(T), v]‖ / ‖u(T)‖ where û starts from [u(0), v].
fn bracket_error(solver: &Solver, initial: &SimState, final_state: &SimState) -> Result<f64, CliError> {
    let v = solver.background().expect("linearized solver has a background");
    let hat0 = solver.backend().rot_analysis(&lie_bracket(&initial.u, v)?)?;
    let hat0 = solver.state_from_vorticity(initial.t, 0, hat0, [0.0, 0.0])?;
    let hat = solver.run_from(hat0, |_| Ok(()))?.final_state;
    let expected = lie_bracket(&final_state.u, v)?;
    let u_norm = norm_sq(&final_state.u).sqrt();
    Ok(norm_sq(&(&hat.u - &expected)).sqrt() / u_norm.max(f64::MIN_POSITIVE))
}

fn write_snapshot(solver: &Solver, state: &SimState, out: &Path) -> Result<(), CliError> {
    let text = output::snapshot_csv(solver, state)?;
    output::write_file(&out.join(output::snapshot_name(state.step)), &text)
}

/// Runs one simulation and writes config echo, diagnostics, snapshots and
/// summary into `out`.
pub fn run_simulation(config: &SimConfig, preset: Option<Preset>, out: &Path) -> Result<Summary, CliError> {
    output::ensure_dir(out)?;
    let mut echo = config.clone();
    echo.output_dir = Some(out.display().to_string());
    let json = serde_json::to_string_pretty(&echo).expect("config serializes");
    output::write_file(&out.join(CONFIG_FILE), &(json + "\n"))?;

    let solver = Solver::new(config.clone())?;
    let linearized = matches!(config.dynamics, Dynamics::Linearized { .. });
    let mut betas: Vec<(f64, f64)> = Vec::new();
    // the first I/O failure stops further snapshots and is reported after the run
    let mut io_error: Option<CliError> = None;
    let result = record_run(&solver, !linearized, |state, _| {
        if let Some(v) = solver.background() {
            betas.push((state.t, beta(&state.u, v, solver.killing_basis())?));
        }
        match config.snapshot_cadence {
            Some(every) if io_error.is_none() && state.step % every == 0 => match write_snapshot(&solver, state, out) {
                Err(CliError::Runtime(e)) => Err(e),
                Err(e) => {
                    io_error = Some(e);
                    Ok(())
                }
                Ok(()) => Ok(()),
            },
            _ => Ok(()),
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let (outcome, records) = result?;
    let n_killing = solver.killing_basis().dim();
    output::write_file(&out.join(DIAGNOSTICS_FILE), &output::diagnostics_csv(&records, n_killing))?;

    let mut s = Summary::new();
    s.put("preset", preset.map_or("none", Preset::name))
        .put("chart", config.chart)
        .put("diffusion", config.diffusion)
        .put("truncation", config.truncation)
        .num("viscosity", config.viscosity)
        .num("rotation_rate", config.rotation_rate)
        .num("dt", outcome.dt)
        .put("steps", outcome.steps)
        .put("records", records.len());

    let first = &records[0];
    let last = &records[records.len() - 1];
    let u0 = first.energy_total.sqrt();
    let drift = records
        .iter()
        .flat_map(|r| r.killing_moments.iter().zip(&first.killing_moments).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
        / u0.max(f64::MIN_POSITIVE);
    s.num("energy_ratio", last.energy_total / first.energy_total.max(f64::MIN_POSITIVE));
    s.num("killing_drift", drift);
    if config.diffusion == DiffusionKind::Deformation && config.rotation_rate == 0.0 && !linearized {
        s.flag("killing_conserved", drift < KILLING_DRIFT_TOL);
    }
    if !linearized {
        s.flag("enstrophy_monotone", nonincreasing(records.iter().map(|r| r.enstrophy_total)));
    }
    if config.t_end > 0.0 {
        fit_into(&mut s, "energy_perp", &records, |r| r.energy_perp, config.t_end);
        if config.chart == ChartKind::Sphere {
            fit_into(&mut s, "enstrophy_perp", &records, |r| r.enstrophy_perp, config.t_end);
        }
    }
    if config.chart == ChartKind::Sphere {
        s.num("max_enstrophy_cross", records.iter().map(|r| r.enstrophy_cross.abs()).fold(0.0, f64::max));
    }
    if let Some(worst) = records.iter().filter_map(|r| r.pressure_residual).reduce(f64::max) {
        s.num("max_pressure_residual", worst);
    }
    if let (Some(a), Some(b)) = (first.coriolis_uhat, last.coriolis_uhat) {
        s.num("coriolis_uhat_ratio", b / a.max(f64::MIN_POSITIVE));
        s.flag("coriolis_uhat_monotone", nonincreasing(records.iter().filter_map(|r| r.coriolis_uhat)));
    }
    if !betas.is_empty() {
        let mut csv = String::from("t,beta\n");
        for (t, b) in &betas {
            csv.push_str(&format!("{},{}\n", output::num(*t), output::num(*b)));
        }
        output::write_file(&out.join("beta.csv"), &csv)?;
        s.num("beta_initial", betas[0].1);
    }
    if let Dynamics::Linearized { background, .. } = config.dynamics {
        if background != Background::Initial {
            let initial = solver.initial_state()?;
            s.num("bracket_error", bracket_error(&solver, &initial, &outcome.final_state)?);
        }
    }
    output::write_file(&out.join(SUMMARY_FILE), &s.to_string())?;
    Ok(s)
}

/// Runs the configuration once per diffusion operator, each into its own
/// subdirectory, and tabulates the contrast.
pub fn compare_operators(config: &SimConfig, preset: Option<Preset>, out: &Path) -> Result<Summary, CliError> {
    output::ensure_dir(out)?;
    let mut s = Summary::new();
    let mut table = String::from("diffusion,energy_ratio,killing_energy_ratio,killing_drift\n");
    for kind in DiffusionKind::ALL {
        let dir = out.join(kind.name());
        let cfg = SimConfig { diffusion: kind, output_dir: None, ..config.clone() };
        let run = run_simulation(&cfg, preset, &dir)?;
        let csv = std::fs::read_to_string(dir.join(DIAGNOSTICS_FILE)).map_err(|e| CliError::io(&dir, e))?;
        let killing_ratio = killing_energy_ratio(&csv);
        table.push_str(&format!(
            "{},{},{},{}\n",
            kind.name(),
            run.get("energy_ratio").unwrap_or(""),
            output::num(killing_ratio),
            run.get("killing_drift").unwrap_or("")
        ));
        s.extend(kind.name(), &run);
        s.num(format!("{}.killing_energy_ratio", kind.name()), killing_ratio);
    }
    output::write_file(&out.join("comparison.csv"), &table)?;
    output::write_file(&out.join(SUMMARY_FILE), &s.to_string())?;
    Ok(s)
}

/// energy_killing(T) / energy_killing(0) read back from a diagnostics CSV.
fn killing_energy_ratio(csv: &str) -> f64 {
    let col = |line: &str| line.split(',').nth(2).and_then(|c| c.parse::<f64>().ok()).unwrap_or(0.0);
    let mut rows = csv.lines().skip(1);
    let first = rows.next().map(col).unwrap_or(0.0);
    let last = rows.last().map(col).unwrap_or(first);
    if first == 0.0 {
        0.0
    } else {
        last / first
    }
}

/// Identity suite on one or all charts.
pub fn verify(opts: &VerifyOptions, out: Option<&Path>) -> Result<(String, bool), CliError> {
    let charts = match opts.chart {
        Some(c) => vec![c],
        None => vec![ChartKind::Sphere, ChartKind::Torus, ChartKind::PerturbedSphere],
    };
    let reports: Vec<LemmaReport> = charts.into_iter().map(|c| lemma_suite(c, opts.seed)).collect();
    let passed = reports.iter().all(LemmaReport::passed);
    let mut text = String::new();
    for r in &reports {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    text.push_str(&format!("verify: {}\n", if passed { "PASS" } else { "FAIL" }));
    let dir = out.map(Path::to_path_buf).or_else(|| opts.output_dir.as_ref().map(PathBuf::from));
    if let Some(dir) = dir {
        output::ensure_dir(&dir)?;
        output::write_file(&dir.join(SUMMARY_FILE), &text)?;
        let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
        output::write_file(&dir.join("verify.json"), &(json + "\n"))?;
    }
    Ok((text, passed))
}

/// α constants; on spherical charts α_P is skipped (no parallel fields).
pub fn alpha(opts: &AlphaOptions, out: Option<&Path>) -> Result<Summary, CliError> {
    let kinds = match opts.kind {
        Some(k) => vec![k],
        None => match opts.chart {
            ChartKind::Torus => vec![AlphaKind::P, AlphaKind::K, AlphaKind::H],
            _ => vec![AlphaKind::K, AlphaKind::H],
        },
    };
    let mut s = Summary::new();
    s.put("chart", opts.chart).put("lmax", opts.lmax);
    for kind in kinds {
        let est = estimate_alpha(kind, opts.chart, opts.lmax)?;
        s.num(format!("alpha_{kind}"), est.value);
    }
    let dir = out.map(Path::to_path_buf).or_else(|| opts.output_dir.as_ref().map(PathBuf::from));
    if let Some(dir) = dir {
        output::ensure_dir(&dir)?;
        output::write_file(&dir.join(SUMMARY_FILE), &s.to_string())?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ns_manifold::solver::InitialCondition;

    #[test]
    fn monotone_detection() {
        assert!(nonincreasing([3.0, 2.0, 2.0, 0.0].into_iter()));
        assert!(!nonincreasing([1.0, 1.1].into_iter()));
        assert!(nonincreasing(std::iter::empty()));
    }

    #[test]
    fn output_dir_precedence() {
        assert_eq!(output_dir(Some(Path::new("a")), Some("b")), PathBuf::from("a"));
        assert_eq!(output_dir(None, Some("b")), PathBuf::from("b"));
        assert_eq!(output_dir(None, None), PathBuf::from(DEFAULT_OUTPUT_DIR));
    }

    #[test]
    fn small_run_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SimConfig {
            truncation: 6,
            t_end: 0.1,
            dt: Some(0.01),
            cadence: 5,
            snapshot_cadence: Some(10),
            initial: InitialCondition::SingleMode { l: 2, m: 1, amplitude: 1e-3 },
            ..SimConfig::default()
        };
        let s = run_simulation(&cfg, Some(Preset::Decay), dir.path()).unwrap();
        assert_eq!(s.get("records"), Some("3"));
        assert_eq!(s.get("killing_conserved"), Some("PASS"));
        for f in [CONFIG_FILE, DIAGNOSTICS_FILE, SUMMARY_FILE, "snapshot_000000.csv", "snapshot_000010.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let snap = std::fs::read_to_string(dir.path().join("snapshot_000000.csv")).unwrap();
        // header plus one row per node of the dealiased 20x10 grid
        assert_eq!(snap.lines().count(), 1 + solver_nodes(&cfg));
    }

    fn solver_nodes(cfg: &SimConfig) -> usize {
        let (a, b) = Solver::new(cfg.clone()).unwrap().chart().shape();
        a * b
    }

    #[test]
    fn killing_ratio_from_csv() {
        let csv = "h\n0,1,2\n0,1,1\n";
        assert_eq!(killing_energy_ratio(csv), 0.5);
    }
}
