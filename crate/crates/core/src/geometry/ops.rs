use ndarray::Array2;

use super::chart::Chart;
use super::diff::IndexSig;
use super::field::{check_same, ScalarField, Tensor11Field, Tensor12Field, VectorField};
use crate::error::Result;

impl Chart {
    /// Raw partial derivative ∂f/∂x^dir of a component with the given
    /// index structure.
    pub fn partial(&self, f: &Array2<f64>, dir: usize, sig: IndexSig) -> Array2<f64> {
        self.diff.partial(f, dir, sig)
    }
}

/// Covariant derivative u^k_{;i} = ∂_i u^k + Γ^k_{ij} u^j.
pub fn covariant_derivative(u: &VectorField) -> Tensor11Field {
    let chart = u.chart();
    let gam = &chart.metric().christoffel;
    let mut t = Tensor11Field::zeros(chart);
    for k in 0..2 {
        for i in 0..2 {
            let mut c = chart.partial(&u.comps[k], i, IndexSig::vector(k));
            for j in 0..2 {
                c = c + &(&gam[k][i][j] * &u.comps[j]);
            }
            t.comps[k][i] = c;
        }
    }
    t
}

/// Covariant derivative of a (1,1) tensor:
/// T^k_{i;j} = ∂_j T^k_i + Γ^k_{jl} T^l_i − Γ^l_{ji} T^k_l.
pub fn covariant_derivative_tensor(t: &Tensor11Field) -> Tensor12Field {
    let chart = t.chart();
    let gam = &chart.metric().christoffel;
    let z = || Array2::<f64>::zeros(chart.shape());
    let mut out = [[[z(), z()], [z(), z()]], [[z(), z()], [z(), z()]]];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut c = chart.partial(&t.comps[k][i], j, IndexSig::tensor11(k, i));
                for l in 0..2 {
                    c = c + &(&gam[k][j][l] * &t.comps[l][i]) - &(&gam[l][j][i] * &t.comps[k][l]);
                }
                out[k][i][j] = c;
            }
        }
    }
    Tensor12Field::new(chart, out)
}

/// Second covariant derivative u^k_{;ij}.
pub fn second_covariant_derivative(u: &VectorField) -> Tensor12Field {
    covariant_derivative_tensor(&covariant_derivative(u))
}

/// grad(f)^i = g^{ij} ∂_j f.
pub fn grad(f: &ScalarField) -> VectorField {
    let chart = f.chart();
    let gi = &chart.metric().g_inv;
    let d = [
        chart.partial(&f.values, 0, IndexSig::SCALAR),
        chart.partial(&f.values, 1, IndexSig::SCALAR),
    ];
    let c = |i: usize| &(&gi[i][0] * &d[0]) + &(&gi[i][1] * &d[1]);
    VectorField::new(chart, [c(0), c(1)])
}

/// div(u) = u^i_{;i}.
pub fn div(u: &VectorField) -> ScalarField {
    covariant_derivative(u).trace()
}

/// Quarter turn by the area form: (Ku)^k = ε^k_j u^j. K(K(u)) = −u.
pub fn k_rotate(u: &VectorField) -> VectorField {
    let chart = u.chart();
    let e = &chart.metric().eps_mixed;
    let c = |k: usize| &(&e[k][0] * &u.comps[0]) + &(&e[k][1] * &u.comps[1]);
    VectorField::new(chart, [c(0), c(1)])
}

/// Scalar vorticity rot(u) = div(Ku).
pub fn rot(u: &VectorField) -> ScalarField {
    div(&k_rotate(u))
}

/// The Rot operator on functions: Rot(f) = −K grad f (divergence free).
pub fn perp_grad(f: &ScalarField) -> VectorField {
    k_rotate(&grad(f)).scale(-1.0)
}

/// Directional derivative u^j ∂_j of each component of v.
fn directional_partials(u: &VectorField, v: &VectorField) -> VectorField {
    let chart = u.chart();
    let c = |k: usize| {
        let d0 = chart.partial(&v.comps[k], 0, IndexSig::vector(k));
        let d1 = chart.partial(&v.comps[k], 1, IndexSig::vector(k));
        &(&u.comps[0] * &d0) + &(&u.comps[1] * &d1)
    };
    VectorField::new(chart, [c(0), c(1)])
}

/// Lie bracket [u,v]^i = u^j ∂_j v^i − v^j ∂_j u^i.
pub fn lie_bracket(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    check_same(u.chart(), v.chart())?;
    Ok(&directional_partials(u, v) - &directional_partials(v, u))
}

/// Lie bracket assembled as ∇_u v − ∇_v u (torsion-free connection).
pub fn lie_bracket_covariant(u: &VectorField, v: &VectorField) -> Result<VectorField> {
    check_same(u.chart(), v.chart())?;
    Ok(&covariant_derivative(v).apply(u) - &covariant_derivative(u).apply(v))
}

/// Riemann tensor R^l_{ijk} = (R(∂_i, ∂_j)∂_k)^l assembled from the
/// Christoffel symbols; indexed `[l][i][j][k]`.
pub fn riemann_from_christoffel(chart: &Chart) -> [[[[Array2<f64>; 2]; 2]; 2]; 2] {
    let gam = &chart.metric().christoffel;
    // Γ is not a tensor; its pole behaviour is one order worse than its indices suggest
    let d = |l: usize, j: usize, k: usize, dir: usize| {
        chart.partial(&gam[l][j][k], dir, IndexSig::tensor12(l, j, k).with_pole_order(1))
    };
    let mut r: [[[[Array2<f64>; 2]; 2]; 2]; 2] = Default::default();
    for l in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let mut acc = d(l, j, k, i) - d(l, i, k, j);
                    for m in 0..2 {
                        acc = acc + &(&gam[l][i][m] * &gam[m][j][k]) - &(&gam[l][j][m] * &gam[m][i][k]);
                    }
                    r[l][i][j][k] = acc;
                }
            }
        }
    }
    r
}

/// Closed 2-D form R^l_{ijk} = κ (g_{jk} δ^l_i − g_{ik} δ^l_j).
pub fn riemann_2d(chart: &Chart) -> [[[[Array2<f64>; 2]; 2]; 2]; 2] {
    let m = chart.metric();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut r: [[[[Array2<f64>; 2]; 2]; 2]; 2] = Default::default();
    for l in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    r[l][i][j][k] = &m.curvature * &(&m.g[j][k] * delta(l, i) - &m.g[i][k] * delta(l, j));
                }
            }
        }
    }
    r
}
