//! Chart-based Riemannian geometry: metrics, Christoffel symbols,
//! curvature, covariant derivatives and the first-order operators grad,
//! div, K, rot, Rot and the Lie bracket.
//!
//! Orientation: ε_{12} = +√det g with coordinate order (θ, φ) on spherical
//! charts and (x, y) on the torus. With this choice rot(∂_θ) = −2 cos φ on
//! the unit sphere and K agrees with r̂ × (·) for the outward normal.

mod chart;
mod diff;
mod field;
mod ops;

pub use chart::{build_chart, Chart, ChartKind, MetricData, QuadratureRule, Resolution};
pub use diff::IndexSig;
pub(crate) use field::check_same;
pub use field::{ScalarField, Tensor11Field, Tensor12Field, VectorField};
pub use ops::{
    covariant_derivative, covariant_derivative_tensor, div, grad, k_rotate, lie_bracket, lie_bracket_covariant,
    perp_grad, riemann_2d, riemann_from_christoffel, rot, second_covariant_derivative,
};
