//! Tangent vectors to the groupoid of invertible 1-jets, the distribution
//! `D(S(ξ))`, the involution ψ, the algebroid splitting σ and preservation
//! of tensors by 1-jets.

use super::{affine_extension_s, affine_extension_s3, classical_tensors, ConnectionField, SymmetryJetField};
use crate::error::{Error, Result};
use crate::fields::TensorValue;
use crate::jets::Jet1;
use crate::multilinear::{max_abs, max_abs_mat, Bilinear, Matrix, Trilinear, Vector};
use crate::tangent::{check_close, Involution, FIBER_TOL};

/// A tangent vector at a 1-jet `ξ`: source velocity `u`, target velocity `v`
/// and velocity `Λ` of the linear part.
///
/// Along a product `ξ₂·ξ₁` velocities combine as `(u₁, v₂, Λ₂L₁ + L₂Λ₁)`,
/// which requires `v₁ = u₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidTangent {
    pub u: Vector,
    pub v: Vector,
    pub lam: Matrix,
}

impl GroupoidTangent {
    pub fn new(u: Vector, v: Vector, lam: Matrix) -> Self {
        Self { u, v, lam }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(Vector::zeros(n), Vector::zeros(n), Matrix::zeros(n, n))
    }

    /// The velocity of `ξ₂·ξ₁` from velocities `outer` at `ξ₂` and `inner` at `ξ₁`.
    pub fn compose(outer: &Self, outer_l: &Matrix, inner: &Self, inner_l: &Matrix) -> Result<Self> {
        check_close("composable velocities", &inner.v, &outer.u, FIBER_TOL * (1.0 + max_abs(&inner.v)))?;
        Ok(Self::new(inner.u.clone(), outer.v.clone(), &outer.lam * inner_l + outer_l * &inner.lam))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.u + &other.u, &self.v + &other.v, &self.lam + &other.lam)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(&self.u * a, &self.v * a, &self.lam * a)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        max_abs(&(&self.u - &other.u))
            .max(max_abs(&(&self.v - &other.v)))
            .max(max_abs_mat(&(&self.lam - &other.lam)))
    }
}

/// The element of `D(S(ξ))` over the source velocity `u`: `(u, ξu, B_{S(ξ)}(·, u))`.
pub fn d_distribution(c: &ConnectionField, xi: &Jet1, u: &Vector) -> Result<GroupoidTangent> {
    let s = affine_extension_s(c, xi)?;
    Ok(GroupoidTangent::new(u.clone(), &xi.l * u, s.b.right(u)))
}

/// `ψ_ξ(u, v, Λ) = (−u, −v, Λ − Γ_s^y(ξ·, v) + ξΓ_s^x(·, u))`.
pub fn psi_involution(s: &SymmetryJetField, xi: &Jet1, t: &GroupoidTangent) -> Result<GroupoidTangent> {
    let gx = s.gamma_s(&xi.x)?;
    let gy = s.gamma_s(&xi.y)?;
    let lam = &t.lam - gy.right(&t.v) * &xi.l + &xi.l * gx.right(&t.u);
    Ok(GroupoidTangent::new(-&t.u, -&t.v, lam))
}

/// The splitting `σ(X) = ½((α|_𝒩)⁻¹X + ε_*X)` at the identity `I_x`, where `𝒩`
/// is the translate of `D(𝔰)` from `−I` back to the identity section.
pub fn algebroid_sigma(s: &SymmetryJetField, x: &Vector, xv: &Vector) -> Result<GroupoidTangent> {
    let n = x.len();
    let minus = -Matrix::identity(n, n);
    let gs = s.gamma_s(x)?;
    // D(𝔰(x)) at −I_x over the source velocity X.
    let d = GroupoidTangent::new(xv.clone(), -xv, gs.right(xv));
    // Left translation by the section −I: compose with its velocity (v, v, 0).
    let section = GroupoidTangent::new(d.v.clone(), d.v.clone(), Matrix::zeros(n, n));
    let lifted = GroupoidTangent::compose(&section, &minus, &d, &minus)?;
    let unit = GroupoidTangent::new(xv.clone(), xv.clone(), Matrix::zeros(n, n));
    Ok(lifted.add(&unit).scale(0.5))
}

/// `F(Y) = Y − ε_*α_*Y`.
fn f_map(t: &GroupoidTangent) -> GroupoidTangent {
    GroupoidTangent::new(Vector::zeros(t.u.len()), &t.v - &t.u, t.lam.clone())
}

/// `φ_σ(ξ, X) = (L_ξ)_*σ(X) − (R_ξ)_*F(σ(ξX))`.
pub fn phi_sigma(s: &SymmetryJetField, xi: &Jet1, xv: &Vector) -> Result<GroupoidTangent> {
    let n = xi.dim();
    let id = Matrix::identity(n, n);
    let at_xi = GroupoidTangent::zero(n);
    let left = GroupoidTangent::compose(&at_xi, &xi.l, &algebroid_sigma(s, &xi.x, xv)?, &id)?;
    let f = f_map(&algebroid_sigma(s, &xi.y, &(&xi.l * xv))?);
    let right = GroupoidTangent::compose(&f, &id, &at_xi, &xi.l)?;
    Ok(left.add(&right.scale(-1.0)))
}

/// `max |ρ(ξ)Q_x − Q_y|`, the failure of `Q_y(ξX₁, …) = ξQ_x(X₁, …)`.
pub fn preserves_tensor_residual(xi: &Jet1, q_x: &TensorValue, q_y: &TensorValue) -> Result<f64> {
    if q_x.ty != q_y.ty || q_x.n != q_y.n {
        return Err(Error::DimensionMismatch { expected: q_x.c.len(), got: q_y.c.len() });
    }
    let inv = xi.l.clone().try_inverse().ok_or(Error::SingularJet)?;
    Ok(q_x.push(&xi.l, &inv).sub(q_y).max_abs())
}

/// Preservation of torsion and curvature by a 1-jet next to the κ-invariance of `𝕊(ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub torsion_residual: f64,
    pub curvature_residual: f64,
    /// Distance between `𝕊(ξ)` and `κ(𝕊(ξ))`.
    pub kappa_defect: f64,
    /// Both residuals within tolerance.
    pub integrable: bool,
    /// Whether `integrable` agrees with the κ-invariance test.
    pub consistent: bool,
}

pub fn integrability_check(c: &ConnectionField, xi: &Jet1, tol: f64) -> Result<IntegrabilityReport> {
    let tx = classical_tensors(c, &xi.x)?;
    let ty = classical_tensors(c, &xi.y)?;
    let torsion_residual =
        preserves_tensor_residual(xi, &TensorValue::from_bilinear(&tx.t), &TensorValue::from_bilinear(&ty.t))?;
    let curvature_residual =
        preserves_tensor_residual(xi, &TensorValue::from_trilinear(&tx.r), &TensorValue::from_trilinear(&ty.r))?;
    let big = affine_extension_s3(c, xi)?;
    let kappa_defect = big.distance(&big.involution(Involution::Kappa));
    let integrable = torsion_residual <= tol && curvature_residual <= tol;
    Ok(IntegrabilityReport {
        torsion_residual,
        curvature_residual,
        kappa_defect,
        integrable,
        consistent: integrable == (kappa_defect <= tol),
    })
}

/// Tensor whose preservation is differentiated by [`tangency_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorKind {
    Torsion,
    Curvature,
}

/// Derivative of the preservation residual along `D(S(ξ))` next to the
/// preservation residual of the covariant derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct TangencyReport {
    /// `ρ(ξ)Q_x − Q_y` at `ξ` itself.
    pub residual: TensorValue,
    /// Central difference of the residual along the curve `t ↦ ξ + t·D(S(ξ))(u)`.
    pub derivative: TensorValue,
    /// `ρ(ξ)(∇_u Q)_x − (∇_{ξu} Q)_y`.
    pub nabla_residual: TensorValue,
}

impl TangencyReport {
    pub fn mismatch(&self) -> f64 {
        self.derivative.sub(&self.nabla_residual).max_abs()
    }
}

fn tensor_at(c: &ConnectionField, x: &Vector, kind: TensorKind) -> Result<(TensorValue, Vec<TensorValue>)> {
    let n = x.len();
    let set = classical_tensors(c, x)?;
    let e = |i: usize| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
    Ok(match kind {
        TensorKind::Torsion => {
            let d = (0..n)
                .map(|a| TensorValue::from_bilinear(&Bilinear::from_columns(n, |i, j| set.nabla_t.apply(&e(a), &e(i), &e(j)))))
                .collect();
            (TensorValue::from_bilinear(&set.t), d)
        }
        TensorKind::Curvature => {
            let d = (0..n)
                .map(|a| {
                    TensorValue::from_trilinear(&Trilinear::from_columns(n, |i, j, l| {
                        set.nabla_r.apply(&e(a), &e(i), &e(j), &e(l))
                    }))
                })
                .collect();
            (TensorValue::from_trilinear(&set.r), d)
        }
    })
}

fn contract(d: &[TensorValue], u: &Vector) -> TensorValue {
    let mut out = TensorValue::zeros(d[0].n, d[0].ty);
    for (a, t) in d.iter().enumerate() {
        out = out.add(&t.scale(u[a]));
    }
    out
}

/// Tangency test: when `ξ` preserves `Q`, differentiating the
/// preservation residual along `D(S(ξ))` in the direction `u` gives the
/// preservation residual of `∇_u Q`.
pub fn tangency_check(c: &ConnectionField, xi: &Jet1, u: &Vector, kind: TensorKind, h: f64) -> Result<TangencyReport> {
    let dir = d_distribution(c, xi, u)?;
    let residual_at = |t: f64| -> Result<TensorValue> {
        let x = &xi.x + &dir.u * t;
        let y = &xi.y + &dir.v * t;
        let l = &xi.l + &dir.lam * t;
        let (qx, _) = tensor_at(c, &x, kind)?;
        let (qy, _) = tensor_at(c, &y, kind)?;
        let inv = l.clone().try_inverse().ok_or(Error::SingularJet)?;
        Ok(qx.push(&l, &inv).sub(&qy))
    };
    let residual = residual_at(0.0)?;
    let derivative = residual_at(h)?.sub(&residual_at(-h)?).scale(0.5 / h);
    let (_, dx) = tensor_at(c, &xi.x, kind)?;
    let (_, dy) = tensor_at(c, &xi.y, kind)?;
    let inv = xi.l.clone().try_inverse().ok_or(Error::SingularJet)?;
    let nabla_residual = contract(&dx, u).push(&xi.l, &inv).sub(&contract(&dy, &(&xi.l * u)));
    Ok(TangencyReport { residual, derivative, nabla_residual })
}
