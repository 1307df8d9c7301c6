//! Closed-form spectral analysis of three interacting groups with a
//! symmetric group matrix
//!
//! ```text
//!     | a11 a12 a13 |
//! W = | a12 a22 a23 |
//!     | a13 a23 a33 |
//! ```
//!
//! The Laplacian has eigenvalues `0`, `s + d` and `s - d` where
//! `s = a12 + a13 + a23` and `d` is the [`discriminant`]. The sign of the
//! smallest one decides whether the three group means merge, settle on three
//! separate limits, or drift apart; the sign of each row sum `μ_j` decides
//! whether a group contracts around its mean, moves rigidly, or explodes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::graphon::{GroupMatrix, StepGraphon};
use crate::{Error, Result};

/// Relative size of the discriminant below which the spectrum is treated as
/// degenerate (`λ2 = λ3`).
const DEGENERATE_REL: f64 = 1e-12;

/// A formula eigenvector shorter than this fraction of its partner is
/// recomputed from the partner to avoid cancellation.
const CANCELLATION_RATIO: f64 = 1e-3;

/// Symmetric three-group interaction: off-diagonal couplings plus the
/// in-group terms `a11, a22, a33` (which only affect within-group dispersion).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling3 {
    pub a12: f64,
    pub a13: f64,
    pub a23: f64,
    pub diag: [f64; 3],
}

impl Coupling3 {
    pub fn new(a12: f64, a13: f64, a23: f64) -> Self {
        Coupling3 { a12, a13, a23, diag: [0.0; 3] }
    }

    pub fn with_diagonal(mut self, diag: [f64; 3]) -> Self {
        self.diag = diag;
        self
    }

    /// Reads the couplings off a symmetric 3×3 group matrix.
    pub fn from_group_matrix(m: &GroupMatrix) -> Result<Self> {
        if m.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: m.dim() });
        }
        let e = m.entries();
        let scale = e.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if !m.is_symmetric(1e-12 * scale) {
            return Err(Error::InvalidGraphon("three-group analysis needs a symmetric group matrix".into()));
        }
        Ok(Coupling3::new(e[(0, 1)], e[(0, 2)], e[(1, 2)]).with_diagonal([e[(0, 0)], e[(1, 1)], e[(2, 2)]]))
    }

    pub fn group_matrix(&self) -> GroupMatrix {
        let [a11, a22, a33] = self.diag;
        GroupMatrix::from_entries(DMatrix::from_row_slice(
            3,
            3,
            &[a11, self.a12, self.a13, self.a12, a22, self.a23, self.a13, self.a23, a33],
        ))
        .expect("3x3")
    }

    /// Row sums `μ_j`, diagonal included.
    pub fn mu(&self) -> [f64; 3] {
        let [a11, a22, a33] = self.diag;
        [a11 + self.a12 + self.a13, self.a12 + a22 + self.a23, self.a13 + self.a23 + a33]
    }

    fn scale(&self) -> f64 {
        self.a12.abs() + self.a13.abs() + self.a23.abs()
    }

    /// `-a12 a23 / (a12 + a23)`, the `a13` at which `λ3` changes sign.
    pub fn threshold_a13(&self) -> Option<f64> {
        let s = self.a12 + self.a23;
        (s != 0.0).then(|| -self.a12 * self.a23 / s)
    }
}

/// `sqrt(((a12-a13)² + (a12-a23)² + (a13-a23)²) / 2)`.
pub fn discriminant(a12: f64, a13: f64, a23: f64) -> f64 {
    (((a12 - a13).powi(2) + (a12 - a23).powi(2) + (a13 - a23).powi(2)) / 2.0).sqrt()
}

/// Eigen-decomposition of the three-group Laplacian.
///
/// `vectors[k]` is the unnormalised eigenvector for `lambdas[k]`:
///
/// ```text
/// v1 = (1, 1, 1)
/// v2 = (a23 - a12 - d, a12 - a13 + d, a13 - a23)
/// v3 = (a23 - a12 + d, a12 - a13 - d, a13 - a23)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum3 {
    pub a12: f64,
    pub a13: f64,
    pub a23: f64,
    pub disc: f64,
    pub lambdas: [f64; 3],
    pub vectors: [[f64; 3]; 3],
    pub norms2: [f64; 3],
    /// `λ2 = λ3`: `v2, v3` replaced by an orthonormal basis of `1^⊥`.
    pub degenerate: bool,
    /// One of `v2, v3` vanished (or nearly) and was rebuilt as `1 × other`.
    pub substituted: bool,
}

pub fn spectrum3(a12: f64, a13: f64, a23: f64) -> Spectrum3 {
    let disc = discriminant(a12, a13, a23);
    let s = a12 + a13 + a23;
    let scale = a12.abs() + a13.abs() + a23.abs();
    let lambdas = [0.0, s + disc, s - disc];
    let ones = [1.0, 1.0, 1.0];
    let mut substituted = false;

    let degenerate = disc <= DEGENERATE_REL * scale;
    let (v2, v3) = if degenerate {
        let r2 = 1.0 / 2f64.sqrt();
        let r6 = 1.0 / 6f64.sqrt();
        ([r2, -r2, 0.0], [r6, r6, -2.0 * r6])
    } else {
        let v2 = [a23 - a12 - disc, a12 - a13 + disc, a13 - a23];
        let v3 = [a23 - a12 + disc, a12 - a13 - disc, a13 - a23];
        let (n2, n3) = (norm2(&v2).sqrt(), norm2(&v3).sqrt());
        if n2 < CANCELLATION_RATIO * n3 {
            substituted = true;
            (cross(&ones, &v3), v3)
        } else if n3 < CANCELLATION_RATIO * n2 {
            substituted = true;
            (v2, cross(&ones, &v2))
        } else {
            (v2, v3)
        }
    };
    let vectors = [ones, v2, v3];
    let norms2 = [3.0, norm2(&v2), norm2(&v3)];
    Spectrum3 { a12, a13, a23, disc, lambdas, vectors, norms2, degenerate, substituted }
}

impl Spectrum3 {
    /// `exp(-Δ t) u0 = Σ_k e^{-λ_k t} v_k (v_kᵀ u0) / ‖v_k‖²`.
    pub fn evolve(&self, means0: [f64; 3], t: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            let coeff = (-self.lambdas[k] * t).exp() * dot(&self.vectors[k], &means0) / self.norms2[k];
            for i in 0..3 {
                out[i] += coeff * self.vectors[k][i];
            }
        }
        out
    }

    /// `Δ` itself, in row-major order.
    pub fn laplacian(&self) -> [[f64; 3]; 3] {
        let (a12, a13, a23) = (self.a12, self.a13, self.a23);
        [[a12 + a13, -a12, -a13], [-a12, a12 + a23, -a23], [-a13, -a23, a13 + a23]]
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm2(a: &[f64; 3]) -> f64 {
    dot(a, a)
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarycenterCase {
    /// `λ3 > 0`: all group means converge to the common barycenter.
    Collapse,
    /// `λ3 = 0`: the means settle on three (generally distinct) limits.
    ThreeLimits,
    /// `λ3 < 0`: the group means drift apart around a fixed barycenter.
    Divergence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupCase {
    Contract,
    Rigid,
    Explode,
}

impl GroupCase {
    pub fn from_rate(mu: f64, eps: f64) -> Self {
        if mu > eps {
            GroupCase::Contract
        } else if mu < -eps {
            GroupCase::Explode
        } else {
            GroupCase::Rigid
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub lambda: [f64; 3],
    pub disc: f64,
    pub threshold_a13: Option<f64>,
    pub barycenter_case: BarycenterCase,
    pub mu: [f64; 3],
    pub group_cases: [GroupCase; 3],
    pub u_infinity: Option<[f64; 3]>,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

/// Default sign tolerance `1e-10 max(1, |a12| + |a13| + |a23|)`.
pub fn default_eps(c: &Coupling3) -> f64 {
    1e-10 * c.scale().max(1.0)
}

pub fn classify(c: &Coupling3, means0: [f64; 3], eps: Option<f64>) -> ScenarioReport {
    let eps = eps.unwrap_or_else(|| default_eps(c));
    let sp = spectrum3(c.a12, c.a13, c.a23);
    let [_, l2, l3] = sp.lambdas;
    let mut warnings = Vec::new();
    if !(c.a12.min(c.a23) >= 0.0 && c.a12 + c.a23 > 0.0) {
        warnings.push("outside the mediator regime (min(a12, a23) >= 0, a12 + a23 > 0); lambda2 > 0 is not guaranteed".to_string());
    }
    if sp.substituted {
        warnings.push("a closed-form eigenvector vanished and was rebuilt from its partner".to_string());
    }

    let b0 = (means0[0] + means0[1] + means0[2]) / 3.0;
    let barycenter_case = if l3 > eps {
        BarycenterCase::Collapse
    } else if l3 >= -eps {
        BarycenterCase::ThreeLimits
    } else {
        BarycenterCase::Divergence
    };
    let u_infinity = match barycenter_case {
        BarycenterCase::Collapse => Some([b0; 3]),
        BarycenterCase::ThreeLimits if l2 <= eps => {
            warnings.push("lambda2 is also zero: group means do not move".to_string());
            Some(means0)
        }
        BarycenterCase::ThreeLimits => {
            let v3 = sp.vectors[2];
            let coeff = dot(&v3, &means0) / sp.norms2[2];
            Some([b0 + coeff * v3[0], b0 + coeff * v3[1], b0 + coeff * v3[2]])
        }
        BarycenterCase::Divergence => None,
    };
    let mu = c.mu();
    let group_cases = mu.map(|m| GroupCase::from_rate(m, eps));
    ScenarioReport {
        lambda: sp.lambdas,
        disc: sp.disc,
        threshold_a13: c.threshold_a13(),
        barycenter_case,
        mu,
        group_cases,
        u_infinity,
        degenerate: sp.degenerate,
        warnings,
    }
}

/// `μ_j` and its case for group `j` (zero-based) of a three-group graphon.
pub fn dispersion_rate(g: &StepGraphon, j: usize) -> Result<(f64, GroupCase)> {
    if g.groups() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: g.groups() });
    }
    if j >= 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: j + 1 });
    }
    let m = GroupMatrix::from_graphon(g);
    let mu = m.row_sums()[j];
    let scale: f64 = m.entries().row(j).iter().map(|v| v.abs()).sum();
    Ok((mu, GroupCase::from_rate(mu, 1e-10 * scale.max(1.0))))
}
