//! Killing and harmonic field bases, L²-orthogonal projection onto the
//! Killing space, and Rayleigh-quotient estimates of the Poincaré-type
//! constants α_P, α_K, α_H.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{covariant_derivative, div, Chart, ChartKind, VectorField};
use crate::operators::{antisym_a, deformation_s, inner_l2, norm_sq};
use crate::spectral::{SpectralBackend, SpectralKind};

/// Killing fields of a chart together with their L² Gram matrix.
#[derive(Debug, Clone)]
pub struct KillingBasis {
    pub fields: Vec<VectorField>,
    pub gram: DMatrix<f64>,
}

impl KillingBasis {
    pub fn dim(&self) -> usize {
        self.fields.len()
    }
}

fn unsupported(op: &'static str, chart: &Chart) -> Error {
    Error::UnsupportedChart { op, chart: chart.kind().name() }
}

fn gram_of(fields: &[VectorField]) -> DMatrix<f64> {
    let n = fields.len();
    DMatrix::from_fn(n, n, |i, j| inner_l2(&fields[i], &fields[j]).expect("same chart"))
}

/// Rotation generators about the x, y and z axes of the embedding, in
/// (θ, φ) components: R_x = (−cot φ cos θ, −sin θ),
/// R_y = (−cot φ sin θ, cos θ), R_z = ∂_θ.
pub fn sphere_rotation_generators(chart: &Arc<Chart>) -> [VectorField; 3] {
    [
        VectorField::from_fn(chart, |t, p| (-t.cos() / p.tan(), -t.sin())),
        VectorField::from_fn(chart, |t, p| (-t.sin() / p.tan(), t.cos())),
        VectorField::from_fn(chart, |_, _| (1.0, 0.0)),
    ]
}

/// Killing basis: the three rotation generators on the sphere, the
/// coordinate fields {∂_x, ∂_y} on the torus.
pub fn killing_basis(chart: &Arc<Chart>) -> Result<KillingBasis> {
    let fields: Vec<VectorField> = match chart.kind() {
        ChartKind::Sphere => sphere_rotation_generators(chart).into(),
        ChartKind::Torus => torus_constants(chart),
        ChartKind::PerturbedSphere => return Err(unsupported("killing basis", chart)),
    };
    let gram = gram_of(&fields);
    Ok(KillingBasis { fields, gram })
}

fn torus_constants(chart: &Arc<Chart>) -> Vec<VectorField> {
    vec![
        VectorField::from_fn(chart, |_, _| (1.0, 0.0)),
        VectorField::from_fn(chart, |_, _| (0.0, 1.0)),
    ]
}

/// Harmonic fields (A u = 0, div u = 0): none on the sphere, the constant
/// fields on the torus.
pub fn harmonic_basis(chart: &Arc<Chart>) -> Result<Vec<VectorField>> {
    match chart.kind() {
        ChartKind::Sphere => Ok(Vec::new()),
        ChartKind::Torus => Ok(torus_constants(chart)),
        ChartKind::PerturbedSphere => Err(unsupported("harmonic basis", chart)),
    }
}

/// ‖S_v‖ / ‖v‖_{H¹}.
pub fn killing_residual(v: &VectorField) -> f64 {
    let s = norm_sq(&deformation_s(v)).sqrt();
    let h1 = (norm_sq(v) + norm_sq(&covariant_derivative(v))).sqrt();
    if h1 == 0.0 {
        0.0
    } else {
        s / h1
    }
}

/// Decomposition u = u_K + u_⊥.
#[derive(Debug, Clone)]
pub struct KillingProjection {
    pub killing: VectorField,
    pub perp: VectorField,
    /// Coefficients of u_K in the basis.
    pub coeffs: Vec<f64>,
    /// ⟨u, v_i⟩.
    pub moments: Vec<f64>,
}

/// L²-orthogonal projection onto the span of the basis.
pub fn project_killing(u: &VectorField, basis: &KillingBasis) -> Result<KillingProjection> {
    let moments = basis
        .fields
        .iter()
        .map(|v| inner_l2(u, v))
        .collect::<Result<Vec<f64>>>()?;
    let chol = basis.gram.clone().cholesky().ok_or(Error::SingularGram)?;
    let coeffs = chol.solve(&DVector::from_column_slice(&moments));
    let mut killing = VectorField::zeros(u.chart());
    for (c, v) in coeffs.iter().zip(&basis.fields) {
        killing = &killing + &v.scale(*c);
    }
    let perp = u - &killing;
    Ok(KillingProjection { killing, perp, coeffs: coeffs.iter().copied().collect(), moments })
}

/// Which Poincaré-type constant to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AlphaKind {
    /// ∫g(∇u,∇u) over fields orthogonal to parallel fields.
    P,
    /// ∫g(S_u,S_u) over fields orthogonal to Killing fields.
    K,
    /// ∫(½g(A_u,A_u) + div(u)²) over fields orthogonal to harmonic fields.
    H,
}

impl fmt::Display for AlphaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlphaKind::P => "P",
            AlphaKind::K => "K",
            AlphaKind::H => "H",
        })
    }
}

impl FromStr for AlphaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P" => Ok(AlphaKind::P),
            "K" => Ok(AlphaKind::K),
            "H" => Ok(AlphaKind::H),
            _ => Err(Error::config("kind", format!("unknown alpha kind '{s}' (expected P, K or H)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaEstimate {
    pub kind: AlphaKind,
    pub value: f64,
    pub truncation: usize,
}

/// Stream-generated trial fields K grad Y for every non-constant real mode
/// up to the truncation, plus the constant fields on the torus.
fn trial_fields(backend: &SpectralBackend) -> Result<Vec<VectorField>> {
    let lmax = backend.truncation() as i64;
    let mut out = Vec::new();
    match backend.kind() {
        SpectralKind::Sphere => {
            for l in 1..=lmax {
                for m in -l..=l {
                    out.push(backend.synthesis_k_grad(&backend.real_mode(l, m, 1.0)?)?);
                }
            }
        }
        SpectralKind::Torus => {
            out.extend(torus_constants(backend.chart()));
            // one representative per ±k pair, cos and sin
            for kx in -lmax..=lmax {
                for ky in -lmax..=lmax {
                    if (kx, ky) <= (0, 0) {
                        continue;
                    }
                    let cos = backend.real_mode(kx, ky, 1.0)?;
                    let mut sin = backend.zeros();
                    let (a, b) = (sin.torus_index(kx, ky), sin.torus_index(-kx, -ky));
                    sin.data[a] = num_complex::Complex64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2);
                    sin.data[b] = num_complex::Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
                    out.push(backend.synthesis_k_grad(&cos)?);
                    out.push(backend.synthesis_k_grad(&sin)?);
                }
            }
        }
    }
    Ok(out)
}

/// Minimises the Rayleigh quotient of the chosen functional over
/// divergence-free band-limited fields orthogonal to the relevant basis.
pub fn estimate_alpha(kind: AlphaKind, chart_kind: ChartKind, truncation: usize) -> Result<AlphaEstimate> {
    if truncation < 3 {
        return Err(Error::InvalidTruncation { truncation, reason: "alpha estimation needs L >= 3".into() });
    }
    if chart_kind == ChartKind::PerturbedSphere {
        return Err(Error::UnsupportedChart { op: "alpha estimate", chart: chart_kind.name() });
    }
    let backend = SpectralBackend::for_truncation(chart_kind, truncation)?;
    let chart = backend.chart().clone();
    let constraints: Vec<VectorField> = match kind {
        AlphaKind::K => killing_basis(&chart)?.fields,
        AlphaKind::H => harmonic_basis(&chart)?,
        AlphaKind::P => match chart_kind {
            ChartKind::Torus => torus_constants(&chart),
            _ => return Err(Error::UnsupportedChart { op: "alpha_P estimate", chart: chart_kind.name() }),
        },
    };
    let trial = trial_fields(&backend)?;
    let n = trial.len();

    let features: Vec<_> = trial
        .iter()
        .map(|u| match kind {
            AlphaKind::K => (deformation_s(u), None),
            AlphaKind::P => (covariant_derivative(u), None),
            AlphaKind::H => (antisym_a(u), Some(div(u))),
        })
        .collect();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let t = inner_l2(&features[i].0, &features[j].0).expect("same chart");
        match (kind, &features[i].1, &features[j].1) {
            (AlphaKind::H, Some(di), Some(dj)) => 0.5 * t + inner_l2(di, dj).expect("same chart"),
            _ => t,
        }
    });
    let b = gram_of(&trial);

    // restrict to the orthogonal complement of the constraint fields
    let z = if constraints.is_empty() {
        DMatrix::identity(n, n)
    } else {
        let c = DMatrix::from_fn(constraints.len(), n, |i, j| inner_l2(&constraints[i], &trial[j]).expect("same chart"));
        let cct = &c * c.transpose();
        let inv = cct.try_inverse().ok_or(Error::SingularGram)?;
        let proj = DMatrix::identity(n, n) - c.transpose() * inv * &c;
        let eig = SymmetricEigen::new(proj);
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        if keep.is_empty() {
            return Err(Error::InvalidTruncation { truncation, reason: "no feasible field orthogonal to the constraint space".into() });
        }
        eig.eigenvectors.select_columns(&keep)
    };
    let ar = z.transpose() * &a * &z;
    let br = z.transpose() * &b * &z;
    let chol = br.cholesky().ok_or(Error::SingularGram)?;
    let l_inv = chol.l().try_inverse().ok_or(Error::SingularGram)?;
    let m = &l_inv * ar * l_inv.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let value = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AlphaEstimate { kind, value, truncation })
}
