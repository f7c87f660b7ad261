//! New solutions of the linearized system from old: for Killing v and a
//! solution (u, p), ([u,v], −g(grad p, v)) is again a solution.

use serde::Serialize;

use super::pressure::PressureSolver;
use crate::error::{Error, Result};
use crate::geometry::{covariant_derivative, div, grad, lie_bracket, ScalarField, VectorField};
use crate::killing::{killing_residual, project_killing, KillingBasis};
use crate::operators::{advect, apply_diffusion, bochner, inner_l2, norm_sq, ricci_action, DiffusionKind};

/// Fields with a relative S residual above this are not accepted as Killing.
pub const KILLING_TOL: f64 = 1e-8;

/// How the bracket pressure p̂ is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PressureMode {
    /// p̂ = −g(grad p, v).
    Formula,
    /// p̂ from the pressure Poisson equation of û.
    Solve,
}

/// Relative residuals of the identities behind the bracket theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketClaims {
    /// [grad p, v] = grad p̂ with p̂ = −g(grad p, v).
    pub gradient: f64,
    /// ∇_v[u,v] = [∇_v u, v].
    pub transport: f64,
    /// ∇_{[u,v]} v = [∇_u v, v].
    pub bracket_transport: f64,
    /// Δ_B[u,v] = [Δ_B u, v].
    pub bochner: f64,
    /// Ri[u,v] = [Ri(u), v].
    pub ricci: f64,
}

impl BracketClaims {
    pub fn max(&self) -> f64 {
        [self.gradient, self.transport, self.bracket_transport, self.bochner, self.ricci]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn rel(a: &VectorField, b: &VectorField) -> f64 {
    let d = norm_sq(&(a - b)).sqrt();
    let s = norm_sq(a).sqrt() + norm_sq(b).sqrt();
    if d == 0.0 {
        0.0
    } else {
        d / s
    }
}

fn check_killing(v: &VectorField) -> Result<()> {
    let r = killing_residual(v);
    if r > KILLING_TOL {
        return Err(Error::NotKilling(r));
    }
    Ok(())
}

/// Evaluates the claim-level identities for a Killing `v`.
pub fn bracket_claims(u: &VectorField, v: &VectorField, p: &ScalarField) -> Result<BracketClaims> {
    check_killing(v)?;
    let uv = lie_bracket(u, v)?;
    let gp = grad(p);
    let p_hat = gp.dot(v).scale(-1.0);
    Ok(BracketClaims {
        gradient: rel(&lie_bracket(&gp, v)?, &grad(&p_hat)),
        transport: rel(&advect(v, &uv)?, &lie_bracket(&advect(v, u)?, v)?),
        bracket_transport: rel(&advect(&uv, v)?, &lie_bracket(&advect(u, v)?, v)?),
        bochner: rel(&bochner(&uv), &lie_bracket(&bochner(u), v)?),
        ricci: rel(&ricci_action(&uv), &lie_bracket(&ricci_action(u), v)?),
    })
}

/// Pressure of the linearized system about `v`:
/// −Δp = μ div(D u) − div(∇_u v + ∇_v u) with D the diffusion operator.
fn linearized_pressure(ps: &PressureSolver, u: &VectorField, v: &VectorField, mu: f64, kind: DiffusionKind) -> Result<ScalarField> {
    let adv = &advect(u, v)? + &advect(v, u)?;
    let s = &div(&adv) - &div(&apply_diffusion(kind, u)).scale(mu);
    Ok(ps.solve_source(&s)?.p)
}

/// Residual of ([u,v], p̂) in the linearized equation about the Killing
/// field `v`, where (u, p) is the exact snapshot: u_t follows from the
/// equation with p from its Poisson problem. Relative to the largest term.
pub fn bracket_residual(u: &VectorField, v: &VectorField, mu: f64, kind: DiffusionKind, mode: PressureMode) -> Result<f64> {
    check_killing(v)?;
    let ps = PressureSolver::new(u.chart())?;
    let p = linearized_pressure(&ps, u, v, mu, kind)?;
    let transport = |w: &VectorField| -> Result<VectorField> { Ok(&advect(w, v)? + &advect(v, w)?) };
    let u_t = &(&apply_diffusion(kind, u).scale(mu) - &transport(u)?) - &grad(&p);
    let u_hat = lie_bracket(u, v)?;
    let p_hat = match mode {
        PressureMode::Formula => grad(&p).dot(v).scale(-1.0),
        PressureMode::Solve => linearized_pressure(&ps, &u_hat, v, mu, kind)?,
    };
    let terms = [
        lie_bracket(&u_t, v)?,
        transport(&u_hat)?,
        apply_diffusion(kind, &u_hat).scale(-mu),
        grad(&p_hat),
    ];
    // size of [u_t, v] before cancellation, so that u_t ≈ 0 is not amplified
    let area = u.chart().quadrature().area;
    let dv = (norm_sq(&covariant_derivative(v)) / area).sqrt();
    let parts = [transport(u)?, apply_diffusion(kind, u).scale(mu), grad(&p)];
    let mut scale: f64 = dv * parts.iter().map(|t| norm_sq(t).sqrt()).sum::<f64>();
    let mut total = VectorField::zeros(u.chart());
    for t in &terms {
        total = &total + t;
        scale += norm_sq(t).sqrt();
    }
    let r = norm_sq(&total).sqrt();
    Ok(if r == 0.0 { 0.0 } else { r / scale })
}

/// β = ⟨f, u⊥⟩ − ⟨∇_{u⊥} v⊥, u⊥⟩ with f = −∇_{u_K} v⊥ − ∇_{v⊥} u_K,
/// for the linearization about `v`. β = 0 when u = v.
pub fn beta(u: &VectorField, v: &VectorField, basis: &KillingBasis) -> Result<f64> {
    let pu = project_killing(u, basis)?;
    let pv = project_killing(v, basis)?;
    let f = &advect(&pu.killing, &pv.perp)?.scale(-1.0) - &advect(&pv.perp, &pu.killing)?;
    Ok(inner_l2(&f, &pu.perp)? - inner_l2(&advect(&pu.perp, &pv.perp)?, &pu.perp)?)
}
