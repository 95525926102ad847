//! Symmetry jets and affine connections: the correspondence between them,
//! affine extensions of 1-jets, and torsion and curvature read off as defects
//! of jets acting on T²M and T³M.

mod groupoid;
mod tensors;

use std::sync::Arc;

pub use groupoid::{
    algebroid_sigma, d_distribution, integrability_check, phi_sigma, preserves_tensor_residual, psi_involution,
    tangency_check, GroupoidTangent, IntegrabilityReport, TangencyReport, TensorKind,
};
pub use tensors::{
    classical_tensor_derivative, classical_tensors, levi_civita, levi_civita_sjet, tensor_covariant_derivative,
    LeviCivita, TensorValueSet,
};

use crate::error::{Error, Result};
use crate::fields::{transformed, BilinearField, BilinearJet, Domain, ManifoldSpec, SpecKind};
use crate::jets::{Jet1, Jet11, Jet111};
use crate::multilinear::{max_abs, Bilinear, Matrix, Trilinear, Vector};
use crate::tangent::{
    pushforward, t2_combine, t2_pi_tol, Involution, T2Elem, T2Structure, T3Elem, VectorField,
};

/// Agreement demanded between the equivalent jet forms of a quantity, relative to its size.
pub const FORM_TOL: f64 = 1e-9;

/// An affine connection given by its Christoffel field, `∇_d V = ∂V·d + Γ(d, V)`.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    gamma: Arc<dyn BilinearField>,
}

impl ConnectionField {
    pub fn new(gamma: Arc<dyn BilinearField>) -> Self {
        Self { gamma }
    }

    /// The connection of a manifold spec, converting a symmetry-jet spec.
    pub fn from_spec(spec: &ManifoldSpec) -> Self {
        match spec.kind {
            SpecKind::SymmetryJet => connection_from_sjet(&SymmetryJetField::new(spec.defining_field().clone())),
            _ => Self::new(spec.defining_field().clone()),
        }
    }

    pub fn field(&self) -> &Arc<dyn BilinearField> {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn domain(&self) -> &Domain {
        self.gamma.domain()
    }

    pub fn gamma(&self, x: &Vector) -> Result<Bilinear> {
        self.gamma.value(x)
    }

    pub fn taylor(&self, x: &Vector, order: usize) -> Result<BilinearJet> {
        self.gamma.taylor(x, order)
    }

    /// Torsion `T(X, Y) = Γ(X, Y) − Γ(Y, X)` at a point.
    pub fn torsion(&self, x: &Vector) -> Result<Bilinear> {
        let g = self.gamma(x)?;
        Ok(g.clone() - g.transpose())
    }
}

/// A field of symmetry jets `𝔰(x) = (x, x, −I, −I, Γ_s(x))`.
#[derive(Debug, Clone)]
pub struct SymmetryJetField {
    gs: Arc<dyn BilinearField>,
}

impl SymmetryJetField {
    pub fn new(gs: Arc<dyn BilinearField>) -> Self {
        Self { gs }
    }

    /// The symmetry-jet field of a manifold spec, converting connection specs.
    pub fn from_spec(spec: &ManifoldSpec) -> Self {
        match spec.kind {
            SpecKind::SymmetryJet => Self::new(spec.defining_field().clone()),
            _ => sjet_from_connection(&ConnectionField::new(spec.defining_field().clone())),
        }
    }

    pub fn field(&self) -> &Arc<dyn BilinearField> {
        &self.gs
    }

    pub fn dim(&self) -> usize {
        self.gs.dim()
    }

    pub fn domain(&self) -> &Domain {
        self.gs.domain()
    }

    pub fn gamma_s(&self, x: &Vector) -> Result<Bilinear> {
        self.gs.value(x)
    }

    /// `𝔰(x)`.
    pub fn at(&self, x: &Vector) -> Result<Jet11> {
        let n = self.dim();
        let minus = -Matrix::identity(n, n);
        Ok(Jet11::new(x.clone(), x.clone(), minus.clone(), minus, self.gamma_s(x)?))
    }

    /// `j¹𝔰(x)` as a (1,1,1)-jet: first orders `(−I, −I, I)`, `B12 = Γ_s(x)`,
    /// `B13 = B23 = 0`, `C(s1, s2, s3) = (∂_{s3}Γ_s)(s1, s2)`.
    pub fn jet1_at(&self, x: &Vector) -> Result<Jet111> {
        let n = self.dim();
        let jet = self.gs.taylor(x, 1)?;
        let id = Matrix::identity(n, n);
        let c = Trilinear::from_fn(n, |k, i, j, l| jet.d1[l].get(k, i, j));
        Ok(Jet111::new(
            x.clone(),
            x.clone(),
            [-id.clone(), -id.clone(), id],
            [jet.value, Bilinear::zeros(n), Bilinear::zeros(n)],
            c,
        ))
    }

    /// Largest asymmetry of `Γ_s(x)`; zero exactly when `𝔰(x)` is holonomic.
    pub fn holonomy_defect(&self, x: &Vector) -> Result<f64> {
        Ok(self.gamma_s(x)?.symmetry_defect())
    }
}

/// `Γ(d, v) = −½ Γ_s(v, d)`.
pub fn connection_from_sjet(s: &SymmetryJetField) -> ConnectionField {
    ConnectionField::new(transformed(s.gs.clone(), -0.5, true))
}

/// `Γ_s(v, d) = −2 Γ(d, v)`.
pub fn sjet_from_connection(c: &ConnectionField) -> SymmetryJetField {
    SymmetryJetField::new(transformed(c.gamma.clone(), -2.0, true))
}

/// `∇̃(e) = e.s12 + Γ(e.s2, e.s1)`.
pub fn tilde_nabla(c: &ConnectionField, e: &T2Elem) -> Result<Vector> {
    Ok(&e.s12 + c.gamma(&e.base)?.apply(&e.s2, &e.s1))
}

/// `m_{−1} ∘ m_{−1*}`: `(x, a, b, w) ↦ (x, −a, −b, w)`.
pub fn thick_minus(e: &T2Elem) -> T2Elem {
    e.scale(T2Structure::P, -1.0).scale(T2Structure::PStar, -1.0)
}

/// The covariant derivative `∇_d V` at `x` computed four ways.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantForms {
    /// `∂V·d + Γ(d, V)`.
    pub classical: Vector,
    /// `∇̃(V_*d)`.
    pub tilde: Vector,
    /// `½[d, V + s_*V]` with the bracket taken through κ and `s_*V` through `𝔰(x)`.
    pub bracket: Vector,
    /// `½π(V_*d, −𝔰(x)·V_*d)` with the thick minus.
    pub pi: Vector,
}

impl CovariantForms {
    pub fn disagreement(&self) -> f64 {
        [&self.tilde, &self.bracket, &self.pi]
            .iter()
            .map(|v| max_abs(&(*v - &self.classical)))
            .fold(0.0, f64::max)
    }
}

fn scaled_tol(scale: f64) -> f64 {
    FORM_TOL * (1.0 + scale)
}

/// All forms of `∇_d V` at `x`.
pub fn covariant_forms(c: &ConnectionField, v: &dyn VectorField, x: &Vector, d: &Vector) -> Result<CovariantForms> {
    let s = sjet_from_connection(c);
    let g = c.gamma(x)?;
    let e = pushforward(v, x, d)?;
    let classical = &e.s12 + g.apply(d, &e.s1);
    let tilde = tilde_nabla(c, &e)?;
    let sx = s.at(x)?;
    let tol = scaled_tol(max_abs(&e.s1).max(max_abs(&e.s12)).max(max_abs(d)));

    let pi = t2_pi_tol(&e, &thick_minus(&sx.act(&e)?), tol)? * 0.5;

    // (s_*V)_*d = 𝔰(x)·V_*(−d), because s fixes x and reverses T_xM.
    let reflected = sx.act(&pushforward(v, x, &(-d))?)?;
    let z = t2_combine(T2Structure::PStar, 1.0, &e, 1.0, &reflected)?;
    let dz = T2Elem::new(x.clone(), d.clone(), z.s1.clone(), Vector::zeros(x.len())).kappa();
    let bracket = t2_pi_tol(&z, &dz, tol)? * 0.5;
    Ok(CovariantForms { classical, tilde, bracket, pi })
}

/// `∇_d V` at `x`, after checking that the jet forms agree with the classical one.
pub fn covariant_derivative(c: &ConnectionField, v: &dyn VectorField, x: &Vector, d: &Vector) -> Result<Vector> {
    let forms = covariant_forms(c, v, x, d)?;
    let dev = forms.disagreement();
    let tol = scaled_tol(max_abs(&forms.classical));
    if dev > tol {
        return Err(Error::FiberMismatch { what: "covariant derivative forms", deviation: dev, tol });
    }
    Ok(forms.classical)
}

/// The bilinear block of `S(ξ)`: `B(v, d) = ξ·Γ_x(d, v) − Γ_y(ξd, ξv)`.
fn s_block(gx: &Bilinear, gy: &Bilinear, l: &Matrix) -> Bilinear {
    gx.transpose().post(l) - gy.transpose().pre(l, l)
}

/// The affine extension `S(ξ)` of a 1-jet.
pub fn affine_extension_s(c: &ConnectionField, xi: &Jet1) -> Result<Jet11> {
    let b = s_block(&c.gamma(&xi.x)?, &c.gamma(&xi.y)?, &xi.l);
    Ok(Jet11::new(xi.x.clone(), xi.y.clone(), xi.l.clone(), xi.l.clone(), b))
}

/// The affine (1,1,1)-extension `𝕊(ξ)`: all faces `S(ξ)` and trilinear block
/// `C(s1, s2, s3) = B(Γ_x(s2, s1), s3) + ξ(∂_{s3}Γ_x)(s2, s1) − (∂_{ξs3}Γ_y)(ξs2, ξs1)
/// − Γ_y(B(s2, s3), ξs1) − Γ_y(ξs2, B(s1, s3))`.
pub fn affine_extension_s3(c: &ConnectionField, xi: &Jet1) -> Result<Jet111> {
    let n = xi.dim();
    let jx = c.taylor(&xi.x, 1)?;
    let jy = c.taylor(&xi.y, 1)?;
    let l = &xi.l;
    let b = s_block(&jx.value, &jy.value, l);
    let e = |i: usize| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
    let lcols: Vec<Vector> = (0..n).map(|i| l.column(i).into_owned()).collect();
    let dy: Vec<Bilinear> = (0..n).map(|i| jy.derivative(&lcols[i])).collect();
    let cc = Trilinear::from_columns(n, |i, j, k| {
        let (s1, s2, s3) = (e(i), e(j), e(k));
        b.apply(&jx.value.apply(&s2, &s1), &s3) + l * jx.d1[k].apply(&s2, &s1)
            - dy[k].apply(&lcols[j], &lcols[i])
            - jy.value.apply(&b.apply(&s2, &s3), &lcols[i])
            - jy.value.apply(&lcols[j], &b.apply(&s1, &s3))
    });
    Ok(Jet111::new(
        xi.x.clone(),
        xi.y.clone(),
        [l.clone(), l.clone(), l.clone()],
        [b.clone(), b.clone(), b],
        cc,
    ))
}

/// The constant-extension element `(x; s1, s2, 0)` of T²M.
fn t2_const(x: &Vector, s1: &Vector, s2: &Vector) -> T2Elem {
    T2Elem::new(x.clone(), s1.clone(), s2.clone(), Vector::zeros(x.len()))
}

/// The constant-extension element `(x; Z, Y, X, 0, 0, 0, 0)` of T³M.
pub fn t3_const(x: &Vector, z: &Vector, y: &Vector, xx: &Vector) -> T3Elem {
    let o = Vector::zeros(x.len());
    T3Elem::new(x.clone(), [z.clone(), y.clone(), xx.clone(), o.clone(), o.clone(), o.clone(), o])
}

/// Torsion as a jet defect on a chosen element `e` with `p(e) = Y`, `p*(e) = X`.
///
/// Without `xi` this is `T(X, Y) = ½π(κ(𝔰(x))·e, 𝔰(x)·e)`; with `xi` it is
/// `π(S(ξ)·e, κ(S(ξ))·e) = ξT(X, Y) − T(ξX, ξY)`.
pub fn torsion_from_sjet_at(s: &SymmetryJetField, xi: Option<&Jet1>, e: &T2Elem) -> Result<Vector> {
    match xi {
        None => {
            let sx = s.at(&e.base)?;
            let a = sx.kappa().act(e)?;
            let b = sx.act(e)?;
            Ok(t2_pi_tol(&a, &b, scaled_tol(max_abs(&e.s1).max(max_abs(&e.s2))))? * 0.5)
        }
        Some(xi) => {
            crate::tangent::check_close("torsion base", &xi.x, &e.base, crate::tangent::FIBER_TOL)?;
            let sj = affine_extension_s(&connection_from_sjet(s), xi)?;
            let a = sj.act(e)?;
            let b = sj.kappa().act(e)?;
            Ok(t2_pi_tol(&a, &b, scaled_tol(max_abs(&a.s1).max(max_abs(&a.s2))))?)
        }
    }
}

/// [`torsion_from_sjet_at`] on the constant extension `(x; Y, X, 0)`.
pub fn torsion_from_sjet(s: &SymmetryJetField, xi: Option<&Jet1>, x: &Vector, xv: &Vector, yv: &Vector) -> Result<Vector> {
    torsion_from_sjet_at(s, xi, &t2_const(x, yv, xv))
}

fn t3_scale(e: &T3Elem) -> f64 {
    e.slots().iter().map(max_abs).fold(0.0, f64::max)
}

/// `R(X, Y)Z = ¼Π(κ(ℓ)·ℓ·𝔛, ℓ·κ(ℓ)·𝔛)` with `ℓ = j¹𝔰(x)` and `𝔛 = (x; Z, Y, X, 0, …)`.
pub fn curvature_from_sjet(s: &SymmetryJetField, x: &Vector, xv: &Vector, yv: &Vector, zv: &Vector) -> Result<Vector> {
    let ell = s.jet1_at(x)?;
    let k_ell = ell.involution(Involution::Kappa);
    let e = t3_const(x, zv, yv, xv);
    let a = k_ell.act(&ell.act(&e)?)?;
    let b = ell.act(&k_ell.act(&e)?)?;
    let tol = scaled_tol(t3_scale(&a).max(t3_scale(&b)));
    Ok(crate::tangent::t3_pi_tol(&a, &b, tol)? * 0.25)
}

/// Largest torsion coefficient tolerated by [`curvature_homothety`].
pub const TORSION_TOL: f64 = 1e-9;

/// `R(X, Y)Z = Π(𝕊(m_a)·𝔛, κ(𝕊(m_a))·𝔛) / (a(1 − a²))` for a torsion-free connection.
pub fn curvature_homothety(
    c: &ConnectionField,
    a: f64,
    x: &Vector,
    xv: &Vector,
    yv: &Vector,
    zv: &Vector,
) -> Result<Vector> {
    if !a.is_finite() || a == 0.0 || a == 1.0 || a == -1.0 {
        return Err(Error::BadScalar(a));
    }
    let t = c.torsion(x)?.max_abs();
    if t > TORSION_TOL {
        return Err(Error::TorsionNotZero(t));
    }
    let big = affine_extension_s3(c, &Jet1::homothety(x, a))?;
    let e = t3_const(x, zv, yv, xv);
    let p = big.act(&e)?;
    let q = big.involution(Involution::Kappa).act(&e)?;
    let tol = scaled_tol(t3_scale(&p).max(t3_scale(&q)));
    Ok(crate::tangent::t3_pi_tol(&p, &q, tol)? / (a * (1.0 - a * a)))
}

/// A jet-level defect next to its classical prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectResidual {
    /// `Π` of the two jet images (their top slots subtracted when the fibers differ).
    pub jet: Vector,
    /// The classical tensor expression.
    pub classical: Vector,
    /// Whether the identity's hypothesis holds, i.e. `ξ` preserves the torsion.
    pub hypothesis_met: bool,
    /// Largest disagreement of the lower slots of the two jet images.
    pub fiber_defect: f64,
}

impl DefectResidual {
    /// Distance between the jet and classical sides.
    pub fn mismatch(&self) -> f64 {
        max_abs(&(&self.jet - &self.classical))
    }
}

fn defect_pair(big: &Jet111, which: Involution, e: &T3Elem) -> Result<(Vector, f64)> {
    let p = big.act(e)?;
    let q = big.involution(which).act(e)?;
    let slots_p = p.slots();
    let slots_q = q.slots();
    let fiber = slots_p[..6].iter().zip(&slots_q[..6]).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max);
    Ok((&p.s123 - &q.s123, fiber))
}

fn torsion_preserved(c: &ConnectionField, xi: &Jet1) -> Result<bool> {
    let tx = crate::fields::TensorValue::from_bilinear(&c.torsion(&xi.x)?);
    let ty = crate::fields::TensorValue::from_bilinear(&c.torsion(&xi.y)?);
    Ok(preserves_tensor_residual(xi, &tx, &ty)? <= TORSION_TOL)
}

/// `Π(𝕊(ξ)·𝔛, κ*(𝕊(ξ))·𝔛)` against `ξ(∇_X T)(Y, Z) − (∇_{ξX}T)(ξY, ξZ)`,
/// where `𝔛 = (x; Z, Y, X, 0, …)` so that the derivative is taken along the third slot.
pub fn torsion_derivative_defect(c: &ConnectionField, xi: &Jet1, xv: &Vector, yv: &Vector, zv: &Vector) -> Result<DefectResidual> {
    let big = affine_extension_s3(c, xi)?;
    let (jet, fiber_defect) = defect_pair(&big, Involution::KappaStar, &t3_const(&xi.x, zv, yv, xv))?;
    let tx = classical_tensors(c, &xi.x)?;
    let ty = classical_tensors(c, &xi.y)?;
    let l = &xi.l;
    let classical = l * tx.nabla_t.apply(xv, yv, zv) - ty.nabla_t.apply(&(l * xv), &(l * yv), &(l * zv));
    Ok(DefectResidual { jet, classical, hypothesis_met: torsion_preserved(c, xi)?, fiber_defect })
}

/// `Π(𝕊(ξ)·𝔛, κ(𝕊(ξ))·𝔛)` against `ξR(X, Y)Z − R(ξX, ξY)ξZ`.
pub fn curvature_defect(c: &ConnectionField, xi: &Jet1, xv: &Vector, yv: &Vector, zv: &Vector) -> Result<DefectResidual> {
    let big = affine_extension_s3(c, xi)?;
    let (jet, fiber_defect) = defect_pair(&big, Involution::Kappa, &t3_const(&xi.x, zv, yv, xv))?;
    let tx = classical_tensors(c, &xi.x)?;
    let ty = classical_tensors(c, &xi.y)?;
    let l = &xi.l;
    let classical = l * tx.r.apply(xv, yv, zv) - ty.r.apply(&(l * xv), &(l * yv), &(l * zv));
    Ok(DefectResidual { jet, classical, hypothesis_met: torsion_preserved(c, xi)?, fiber_defect })
}
