//! Second-order vector operators, advection and L² inner products.

use ndarray::Array2;

use crate::error::Result;
use crate::geometry::{
    check_same, covariant_derivative, covariant_derivative_tensor, div, grad, perp_grad, rot,
    second_covariant_derivative, ScalarField, Tensor11Field, VectorField,
};

pub use crate::geometry::QuadratureRule;

/// Vector diffusion operator used in the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionKind {
    /// Δ_B u = g^{ij} u^k_{;ij}.
    Bochner,
    /// Δ_H u = Δ_B u − Ri(u).
    Hodge,
    /// L u = div(S_u) = Δ_B u + grad div u + Ri(u).
    #[serde(alias = "l", alias = "deformation_l")]
    Deformation,
}

impl DiffusionKind {
    pub const ALL: [DiffusionKind; 3] = [DiffusionKind::Bochner, DiffusionKind::Hodge, DiffusionKind::Deformation];

    pub fn name(self) -> &'static str {
        match self {
            DiffusionKind::Bochner => "bochner",
            DiffusionKind::Hodge => "hodge",
            DiffusionKind::Deformation => "deformation",
        }
    }

    /// Coefficient of μκζ in the vorticity equation, obtained by taking rot
    /// of the momentum equation: rot(Δ_B u) = Δζ + κζ for div-free u on a
    /// constant-curvature surface, and each Ri term contributes another ±κζ.
    pub fn curvature_factor(self) -> f64 {
        match self {
            DiffusionKind::Deformation => 2.0,
            DiffusionKind::Bochner => 1.0,
            DiffusionKind::Hodge => 0.0,
        }
    }
}

impl std::fmt::Display for DiffusionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Deformation tensor S_u = ∇u + (∇u)* (no factor ½).
pub fn deformation_s(u: &VectorField) -> Tensor11Field {
    let du = covariant_derivative(u);
    &du + &du.adjoint()
}

/// Antisymmetric part A_u = (∇u)* − ∇u.
pub fn antisym_a(u: &VectorField) -> Tensor11Field {
    let du = covariant_derivative(u);
    &du.adjoint() - &du
}

/// Divergence of a (1,1) tensor: (div T)^k = g^{ij} T^k_{i;j}.
pub fn div_tensor(t: &Tensor11Field) -> VectorField {
    let chart = t.chart();
    let gi = &chart.metric().g_inv;
    let dt = covariant_derivative_tensor(t);
    let mut comps = [Array2::zeros(chart.shape()), Array2::zeros(chart.shape())];
    for (k, c) in comps.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *c = &*c + &(&gi[i][j] * &dt.comps[k][i][j]);
            }
        }
    }
    VectorField::new(chart, comps)
}

/// Bochner Laplacian g^{ij} u^k_{;ij}.
pub fn bochner(u: &VectorField) -> VectorField {
    let chart = u.chart();
    let gi = &chart.metric().g_inv;
    let d2 = second_covariant_derivative(u);
    let mut comps = [Array2::zeros(chart.shape()), Array2::zeros(chart.shape())];
    for (k, c) in comps.iter_mut().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                *c = &*c + &(&gi[i][j] * &d2.comps[k][i][j]);
            }
        }
    }
    VectorField::new(chart, comps)
}

/// Ri(u) = κu in two dimensions.
pub fn ricci_action(u: &VectorField) -> VectorField {
    let kappa = ScalarField::new(u.chart(), u.chart().metric().curvature.clone());
    u.scale_by(&kappa)
}

/// Hodge Laplacian Δ_B u − Ri(u).
pub fn hodge(u: &VectorField) -> VectorField {
    &bochner(u) - &ricci_action(u)
}

/// Hodge Laplacian through the first-order operators: grad div u + Rot rot u.
pub fn hodge_first_order(u: &VectorField) -> VectorField {
    &grad(&div(u)) + &perp_grad(&rot(u))
}

/// Deformation operator L u = Δ_B u + grad div u + Ri(u).
pub fn deformation_l(u: &VectorField) -> VectorField {
    &(&bochner(u) + &grad(&div(u))) + &ricci_action(u)
}

/// L u assembled directly as div(S_u).
pub fn deformation_l_direct(u: &VectorField) -> VectorField {
    div_tensor(&deformation_s(u))
}

pub fn apply_diffusion(kind: DiffusionKind, u: &VectorField) -> VectorField {
    match kind {
        DiffusionKind::Bochner => bochner(u),
        DiffusionKind::Hodge => hodge(u),
        DiffusionKind::Deformation => deformation_l(u),
    }
}

/// Covariant derivative of v along u: (∇_u v)^k = v^k_{;i} u^i.
pub fn advect(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    check_same(u.chart(), v.chart())?;
    Ok(covariant_derivative(v).apply(u))
}

/// ∫ f ω_M by the chart quadrature.
pub fn integrate(f: &ScalarField) -> f64 {
    (&f.values * &f.chart().quadrature().weights).sum()
}

/// Fields with a pointwise fiber inner product.
pub trait L2Inner {
    fn pointwise(&self, other: &Self) -> Result<ScalarField>;
}

impl L2Inner for ScalarField {
    fn pointwise(&self, other: &Self) -> Result<ScalarField> {
        check_same(self.chart(), other.chart())?;
        Ok(self.mul(other))
    }
}

impl L2Inner for VectorField {
    fn pointwise(&self, other: &Self) -> Result<ScalarField> {
        check_same(self.chart(), other.chart())?;
        Ok(self.dot(other))
    }
}

impl L2Inner for Tensor11Field {
    fn pointwise(&self, other: &Self) -> Result<ScalarField> {
        check_same(self.chart(), other.chart())?;
        Ok(self.dot(other))
    }
}

/// ⟨a, b⟩ = ∫ g(a, b) ω_M.
pub fn inner_l2<T: L2Inner>(a: &T, b: &T) -> Result<f64> {
    Ok(integrate(&a.pointwise(b)?))
}

/// ‖a‖² without the chart check.
pub fn norm_sq<T: L2Inner>(a: &T) -> f64 {
    integrate(&a.pointwise(a).expect("same chart"))
}
