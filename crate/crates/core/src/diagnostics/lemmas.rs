//! Residuals of the geometric and variational identities on seeded random
//! fields, evaluated at two resolutions.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use serde::Serialize;

use super::pressure::pressure_source;
use crate::error::Result;
use crate::geometry::{
    build_chart, covariant_derivative, div, grad, k_rotate, lie_bracket, lie_bracket_covariant, perp_grad, riemann_2d,
    riemann_from_christoffel, rot, second_covariant_derivative, Chart, ChartKind, Resolution, ScalarField, VectorField,
};
use crate::killing::sphere_rotation_generators;
use crate::operators::{
    advect, bochner, deformation_l, deformation_l_direct, deformation_s, hodge, hodge_first_order, inner_l2, norm_sq,
    ricci_action, DiffusionKind, L2Inner,
};
use crate::solver::random_band;
use crate::spectral::SpectralBackend;

/// Production residuals must stay below this.
pub const RESIDUAL_LIMIT: f64 = 1e-6;
/// Below this the residual is round-off and no order is required.
pub const RESIDUAL_FLOOR: f64 = 1e-10;
pub const ORDER_THRESHOLD: f64 = 3.0;
/// Shape parameter of the perturbed sphere used by the suite.
pub const SUITE_PERTURBATION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct LemmaResult {
    pub name: &'static str,
    pub coarse: f64,
    pub fine: f64,
    /// log2(coarse / fine); None when either residual is zero.
    pub order: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub chart: ChartKind,
    pub seed: u64,
    pub coarse: Resolution,
    pub fine: Resolution,
    /// Sorted by name.
    pub results: Vec<LemmaResult>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, name: &str) -> Option<&LemmaResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "identity suite: chart={} seed={} grids={}x{} -> {}x{}",
            self.chart, self.seed, self.coarse.n_lon, self.coarse.n_lat, self.fine.n_lon, self.fine.n_lat
        )?;
        for r in &self.results {
            let order = r.order.map_or_else(|| "-".to_string(), |o| format!("{o:.2}"));
            writeln!(
                f,
                "  {:<22} coarse={:.3e} fine={:.3e} order={:>6} {}",
                r.name,
                r.coarse,
                r.fine,
                order,
                if r.pass { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Default grids: 48x24 -> 96x48 on spherical charts, 16² -> 32² on the torus.
pub fn suite_resolutions(kind: ChartKind) -> (Resolution, Resolution) {
    match kind {
        ChartKind::Torus => (Resolution::new(16, 16), Resolution::new(32, 32)),
        _ => (Resolution::new(48, 24), Resolution::new(96, 48)),
    }
}

/// Runs every identity on the default grids.
pub fn lemma_suite(kind: ChartKind, seed: u64) -> LemmaReport {
    let (coarse, fine) = suite_resolutions(kind);
    lemma_suite_at(kind, seed, coarse, fine)
}

pub fn lemma_suite_at(kind: ChartKind, seed: u64, coarse: Resolution, fine: Resolution) -> LemmaReport {
    let lo = Sample::new(kind, coarse, seed);
    let hi = Sample::new(kind, fine, seed);
    let mut results: Vec<LemmaResult> = IDENTITIES
        .iter()
        .map(|(name, check)| {
            let eval = |s: &Result<Sample>| s.as_ref().ok().and_then(|s| check(s).ok()).unwrap_or(f64::NAN);
            let (c, f) = (eval(&lo), eval(&hi));
            let order = if c > 0.0 && f > 0.0 { Some((c / f).log2()) } else { None };
            let pass = f.is_finite()
                && c.is_finite()
                && f < RESIDUAL_LIMIT
                && (f < RESIDUAL_FLOOR || order.is_some_and(|o| o >= ORDER_THRESHOLD));
            LemmaResult { name, coarse: c, fine: f, order, pass }
        })
        .collect();
    results.sort_by(|a, b| a.name.cmp(b.name));
    LemmaReport { chart: kind, seed, coarse, fine, results }
}

/// Random fields on one grid.
struct Sample {
    chart: Arc<Chart>,
    f: ScalarField,
    /// General fields (gradient plus rotational part, plus a mean on the torus).
    u: VectorField,
    v: VectorField,
    /// Divergence-free fields.
    u0: VectorField,
    v0: VectorField,
    /// A Killing field.
    w: VectorField,
}

/// Highest degree (|k| on the torus) of the random scalars.
fn sample_degree(kind: ChartKind) -> usize {
    match kind {
        ChartKind::Torus => 3,
        _ => 8,
    }
}

impl Sample {
    fn new(kind: ChartKind, res: Resolution, seed: u64) -> Result<Self> {
        let chart = build_chart(kind, res, SUITE_PERTURBATION)?;
        let deg = sample_degree(kind);
        let backend = SpectralBackend::transforms_only(&chart, deg, deg)?;
        let scalar = |k: u64| -> Result<ScalarField> {
            backend.synthesis(&random_band(&backend, 1, deg, 1.0, seed.wrapping_mul(31).wrapping_add(k))?)
        };
        let f = scalar(0)?;
        let (p1, p2, c1, c2) = (scalar(1)?, scalar(2)?, scalar(3)?, scalar(4)?);
        let u0 = perp_grad(&p1);
        let v0 = perp_grad(&p2);
        let mut u = &u0 + &grad(&c1);
        let mut v = &v0 + &grad(&c2).scale(0.5);
        let w = match kind {
            ChartKind::Sphere => {
                let [rx, _, rz] = sphere_rotation_generators(&chart);
                &rx + &rz.scale(0.5)
            }
            ChartKind::PerturbedSphere => VectorField::from_fn(&chart, |_, _| (1.0, 0.0)),
            ChartKind::Torus => {
                u.comps[0] += 0.3;
                v.comps[1] -= 0.2;
                VectorField::from_fn(&chart, |_, _| (1.0, 0.5))
            }
        };
        Ok(Sample { chart, f, u, v, u0, v0, w })
    }
}

type Check = fn(&Sample) -> Result<f64>;

const IDENTITIES: &[(&str, Check)] = &[
    ("rot_grad", |s| Ok(ratio(norm_sq(&rot(&grad(&s.f))).sqrt(), laplacian_norm(&s.f)))),
    ("div_rot", |s| Ok(ratio(norm_sq(&div(&perp_grad(&s.f))).sqrt(), laplacian_norm(&s.f)))),
    ("two_d_lemma", two_d_lemma),
    ("ricci_identity", ricci_identity),
    ("killing_curvature", killing_curvature),
    ("curvature_2d", curvature_2d),
    ("deformation_split", |s| Ok(rel_vec(&deformation_l_direct(&s.u), &deformation_l(&s.u)))),
    ("hodge_2d", |s| Ok(rel_vec(&hodge(&s.u), &hodge_first_order(&s.u)))),
    ("div_deformation", div_deformation),
    ("div_bochner", div_bochner),
    ("advection_divergence", advection_divergence),
    ("var_lemma_l", |s| {
        let (lu, su, sv) = (deformation_l(&s.u), deformation_s(&s.u), deformation_s(&s.v));
        Ok(rel_sum(&[(inner_l2(&lu, &s.v)?, bound(&lu, &s.v)), (0.5 * inner_l2(&su, &sv)?, 0.5 * bound(&su, &sv))]))
    }),
    ("var_lemma_bochner", |s| {
        let (bu, du, dv) = (bochner(&s.u), covariant_derivative(&s.u), covariant_derivative(&s.v));
        Ok(rel_sum(&[(inner_l2(&bu, &s.v)?, bound(&bu, &s.v)), (inner_l2(&du, &dv)?, bound(&du, &dv))]))
    }),
    ("symmetry_l", |s| {
        let (lu, lv) = (deformation_l(&s.u), deformation_l(&s.v));
        Ok(rel_sum(&[(inner_l2(&lu, &s.v)?, bound(&lu, &s.v)), (-inner_l2(&s.u, &lv)?, bound(&s.u, &lv))]))
    }),
    ("symmetry_bochner", |s| {
        let (bu, bv) = (bochner(&s.u), bochner(&s.v));
        Ok(rel_sum(&[(inner_l2(&bu, &s.v)?, bound(&bu, &s.v)), (-inner_l2(&s.u, &bv)?, bound(&s.u, &bv))]))
    }),
    ("b_lemma", |s| {
        let (a, b) = (advect(&s.v0, &s.u)?, advect(&s.v0, &s.v)?);
        Ok(rel_sum(&[(inner_l2(&a, &s.v)?, bound(&a, &s.v)), (inner_l2(&b, &s.u)?, bound(&b, &s.u))]))
    }),
    ("c_lemma", |s| {
        let (a, b) = (advect(&s.v0, &s.u0)?, advect(&s.u0, &s.v0)?);
        Ok(rel_sum(&[(inner_l2(&a, &s.w)?, bound(&a, &s.w)), (inner_l2(&b, &s.w)?, bound(&b, &s.w))]))
    }),
    ("d_lemma", |s| {
        let a = advect(&s.u0, &s.u0)?;
        Ok(rel_sum(&[(inner_l2(&a, &s.w)?, bound(&a, &s.w))]))
    }),
    ("killing_deformation", |s| {
        let scale = norm_sq(&covariant_derivative(&s.w)).sqrt() + norm_sq(&s.w).sqrt();
        Ok(ratio(norm_sq(&deformation_s(&s.w)).sqrt(), scale))
    }),
    ("lie_bracket_forms", |s| Ok(rel_vec(&lie_bracket(&s.u, &s.v)?, &lie_bracket_covariant(&s.u, &s.v)?))),
];

fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn laplacian_norm(f: &ScalarField) -> f64 {
    norm_sq(&div(&grad(f))).sqrt()
}

/// ‖a − b‖ / (‖a‖ + ‖b‖).
fn rel_vec<T: L2Inner + Clone>(a: &T, b: &T) -> f64
where
    for<'x> &'x T: std::ops::Sub<&'x T, Output = T>,
{
    let d = norm_sq(&(a - b)).sqrt();
    ratio(d, norm_sq(a).sqrt() + norm_sq(b).sqrt())
}

/// Cauchy-Schwarz bound ‖a‖‖b‖ of ⟨a, b⟩.
fn bound<T: L2Inner>(a: &T, b: &T) -> f64 {
    (norm_sq(a) * norm_sq(b)).sqrt()
}

/// |Σ value| / Σ bound for integral identities.
fn rel_sum(terms: &[(f64, f64)]) -> f64 {
    ratio(terms.iter().map(|t| t.0).sum::<f64>().abs(), terms.iter().map(|t| t.1).sum())
}

/// Quadrature norm of a rank-`rank` tensor whose first `up` indices are
/// contravariant; the chart metrics are diagonal.
fn tensor_norm(chart: &Chart, rank: usize, up: usize, comp: impl Fn(&[usize]) -> Array2<f64>) -> f64 {
    let m = chart.metric();
    let mut total = 0.0;
    for code in 0..(1usize << rank) {
        let idx: Vec<usize> = (0..rank).map(|n| (code >> n) & 1).collect();
        let mut weight = chart.quadrature().weights.clone();
        for (n, &i) in idx.iter().enumerate() {
            weight = weight * if n < up { &m.g[i][i] } else { &m.g_inv[i][i] };
        }
        total += (&weight * &comp(&idx).mapv(|x| x * x)).sum();
    }
    total.sqrt()
}

type T12 = [[[Array2<f64>; 2]; 2]; 2];

fn t12_residual(chart: &Chart, res: &T12, scale: &T12) -> f64 {
    let n = |t: &T12| tensor_norm(chart, 3, 1, |i| t[i[0]][i[1]][i[2]].clone());
    ratio(n(res), n(scale))
}

fn two_d_lemma(s: &Sample) -> Result<f64> {
    let (u, v) = (&s.u, &s.v);
    let lhs = &advect(&k_rotate(u), v)? + &advect(u, &k_rotate(v))?;
    let rhs = &k_rotate(u).scale_by(&div(v)) + &u.scale_by(&div(&k_rotate(v)));
    Ok(rel_vec(&lhs, &rhs))
}

/// u^k_{;ij} − u^k_{;ji} = −u^l R^k_{ijl}.
fn ricci_identity(s: &Sample) -> Result<f64> {
    let d2 = second_covariant_derivative(&s.u).comps;
    let r = riemann_2d(&s.chart);
    let mut res: T12 = Default::default();
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut c = &d2[k][i][j] - &d2[k][j][i];
                for l in 0..2 {
                    c = c + &r[k][i][j][l] * &s.u.comps[l];
                }
                res[k][i][j] = c;
            }
        }
    }
    Ok(t12_residual(&s.chart, &res, &d2))
}

/// w^i_{;hk} = −w^l R^i_{lkh} for Killing w.
fn killing_curvature(s: &Sample) -> Result<f64> {
    let d2 = second_covariant_derivative(&s.w).comps;
    let r = riemann_2d(&s.chart);
    let mut res: T12 = Default::default();
    for i in 0..2 {
        for h in 0..2 {
            for k in 0..2 {
                let mut c = d2[i][h][k].clone();
                for l in 0..2 {
                    c = c + &r[i][l][k][h] * &s.w.comps[l];
                }
                res[i][h][k] = c;
            }
        }
    }
    Ok(t12_residual(&s.chart, &res, &d2))
}

fn curvature_2d(s: &Sample) -> Result<f64> {
    let a = riemann_from_christoffel(&s.chart);
    let b = riemann_2d(&s.chart);
    let res = tensor_norm(&s.chart, 4, 1, |i| &a[i[0]][i[1]][i[2]][i[3]] - &b[i[0]][i[1]][i[2]][i[3]]);
    let scale = tensor_norm(&s.chart, 4, 1, |i| b[i[0]][i[1]][i[2]][i[3]].clone());
    Ok(ratio(res, scale))
}

/// div(Lu) = 2Δ div u + 2 div Ri(u).
fn div_deformation(s: &Sample) -> Result<f64> {
    let lhs = div(&deformation_l(&s.u));
    let rhs = (&div(&grad(&div(&s.u))) + &div(&ricci_action(&s.u))).scale(2.0);
    Ok(rel_vec(&lhs, &rhs))
}

/// div(Δ_B u) = Δ div u + div Ri(u).
fn div_bochner(s: &Sample) -> Result<f64> {
    let lhs = div(&bochner(&s.u));
    let rhs = &div(&grad(&div(&s.u))) + &div(&ricci_action(&s.u));
    Ok(rel_vec(&lhs, &rhs))
}

/// div(∇_u u) = tr((∇u)²) + Ri(u,u) for divergence-free u.
fn advection_divergence(s: &Sample) -> Result<f64> {
    let lhs = div(&advect(&s.u0, &s.u0)?);
    let rhs = pressure_source(&s.u0, 0.0, DiffusionKind::Hodge, 0.0)?;
    Ok(rel_vec(&lhs, &rhs))
}
