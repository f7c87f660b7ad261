//! Observables and verification instruments: energy and vorticity
//! decompositions, decay fits, pressure recovery, the identity suite and
//! the bracket-solution residuals.

mod bracket;
mod fit;
mod lemmas;
mod pressure;
mod records;

pub use bracket::{beta, bracket_claims, bracket_residual, BracketClaims, PressureMode};
pub use fit::{fit_decay, DecayFit};
pub use lemmas::{lemma_suite, LemmaReport, LemmaResult, ORDER_THRESHOLD, RESIDUAL_FLOOR, RESIDUAL_LIMIT};
pub use pressure::{coriolis_zonal_pressure, pressure_solve, pressure_source, PressureSolution, PressureSolver};
pub use records::{record_run, vorticity_decompose, DiagnosticsRecord, Recorder};

#[cfg(test)]
mod tests;
