//! Torsion, curvature and their covariant derivatives by classical component
//! formulas, covariant derivatives of tensor fields, and the Levi-Civita connection.

use std::sync::Arc;

use super::{sjet_from_connection, ConnectionField, SymmetryJetField};
use crate::error::{Error, Result};
use crate::fields::{ExprTensorField, MetricChristoffel, MetricField, TensorValue};
use crate::jets::Jet11;
use crate::multilinear::{Bilinear, Matrix, Quadrilinear, Trilinear, Vector};

/// Torsion, curvature and their covariant derivatives at a point.
///
/// * `t(X, Y) = ∇_X Y − ∇_Y X − [X, Y]`
/// * `r(X, Y, Z) = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z`
/// * `nabla_t(W, X, Y) = (∇_W T)(X, Y)`
/// * `nabla_r(W, X, Y, Z) = (∇_W R)(X, Y)Z`
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValueSet {
    pub t: Bilinear,
    pub r: Trilinear,
    pub nabla_t: Trilinear,
    pub nabla_r: Quadrilinear,
}

fn basis(n: usize) -> Vec<Vector> {
    (0..n).map(|i| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect()
}

/// The classical tensors of `c` at `x`, from Γ and its first two derivatives.
pub fn classical_tensors(c: &ConnectionField, x: &Vector) -> Result<TensorValueSet> {
    let n = c.dim();
    let jet = c.taylor(x, 2)?;
    let g = &jet.value;
    let e = basis(n);
    let t = g.clone() - g.transpose();
    let r = Trilinear::from_columns(n, |i, j, l| {
        jet.d1[i].apply(&e[j], &e[l]) - jet.d1[j].apply(&e[i], &e[l]) + g.apply(&e[i], &g.apply(&e[j], &e[l]))
            - g.apply(&e[j], &g.apply(&e[i], &e[l]))
    });
    let nabla_t = Trilinear::from_columns(n, |a, i, j| {
        let dt = jet.d1[a].apply(&e[i], &e[j]) - jet.d1[a].apply(&e[j], &e[i]);
        dt + g.apply(&e[a], &t.apply(&e[i], &e[j]))
            - t.apply(&g.apply(&e[a], &e[i]), &e[j])
            - t.apply(&e[i], &g.apply(&e[a], &e[j]))
    });
    let dr = |a: usize, u: &Vector, v: &Vector, w: &Vector| -> Vector {
        let d2 = |p: &Vector| jet.second_derivative(&e[a], p);
        let da = &jet.d1[a];
        d2(u).apply(v, w) - d2(v).apply(u, w) + da.apply(u, &g.apply(v, w)) + g.apply(u, &da.apply(v, w))
            - da.apply(v, &g.apply(u, w))
            - g.apply(v, &da.apply(u, w))
    };
    let nabla_r = Quadrilinear::from_columns(n, |a, i, j, l| {
        let (u, v, w) = (&e[i], &e[j], &e[l]);
        dr(a, u, v, w) + g.apply(&e[a], &r.apply(u, v, w))
            - r.apply(&g.apply(&e[a], u), v, w)
            - r.apply(u, &g.apply(&e[a], v), w)
            - r.apply(u, v, &g.apply(&e[a], w))
    });
    Ok(TensorValueSet { t, r, nabla_t, nabla_r })
}

/// `∂_d Q` at `x`, with the value `Q(x)`.
fn value_and_directional(q: &ExprTensorField, x: &Vector, d: &Vector) -> Result<(TensorValue, TensorValue)> {
    let (value, partials) = q.jet1(x)?;
    let mut dq = TensorValue::zeros(value.n, value.ty);
    for (a, p) in partials.iter().enumerate() {
        dq = dq.add(&p.scale(d[a]));
    }
    Ok((value, dq))
}

/// `(∇_d Q)` by the index formula: `∂_d Q` plus `Γ(d, ·)` on each upper index
/// minus `Γ(d, ·)` fed into each lower index.
pub fn classical_tensor_derivative(
    c: &ConnectionField,
    q: &ExprTensorField,
    x: &Vector,
    d: &Vector,
) -> Result<TensorValue> {
    let n = q.dim();
    let (value, mut out) = value_and_directional(q, x, d)?;
    let gd = c.gamma(x)?.left(d);
    let contra = value.ty.contra;
    for flat in 0..out.c.len() {
        let idx = value.index(flat);
        let mut acc = 0.0;
        for s in 0..idx.len() {
            let mut j = idx.clone();
            for m in 0..n {
                j[s] = m;
                acc += if s < contra { gd[(idx[s], m)] * value.get(&j) } else { -gd[(m, idx[s])] * value.get(&j) };
            }
        }
        out.c[flat] += acc;
    }
    Ok(out)
}

/// Image of the tangent element `(q, d, q̇)` of the tensor bundle under a (1,1)-jet:
/// `(ρ(L1)q, L2 d, ρ(L1)q̇ + ρ'(L1)[B(·, d)]q)`.
fn act_on_tensor_element(
    j: &Jet11,
    q: &TensorValue,
    d: &Vector,
    qdot: &TensorValue,
) -> Result<(TensorValue, Vector, TensorValue)> {
    let l1_inv = j.l1.clone().try_inverse().ok_or(Error::SingularJet)?;
    let q2 = q.push(&j.l1, &l1_inv);
    let qdot2 = qdot.push(&j.l1, &l1_inv).add(&q.push_derivative(&j.l1, &l1_inv, &j.b.right(d)));
    Ok((q2, &j.l2 * d, qdot2))
}

/// `∇_d Q = ½π(Q_*d, −𝔰(x)·Q_*d)` on the tensor bundle, where the thick minus
/// acts by `ρ(−I)` on the fiber and by `−1` on the tangent directions.
pub fn tensor_covariant_derivative(
    s: &SymmetryJetField,
    q: &ExprTensorField,
    x: &Vector,
    d: &Vector,
) -> Result<TensorValue> {
    let n = q.dim();
    let (value, dq) = value_and_directional(q, x, d)?;
    let (q2, d2, qdot2) = act_on_tensor_element(&s.at(x)?, &value, d, &dq)?;
    let minus = -Matrix::identity(n, n);
    let q3 = q2.push(&minus, &minus);
    let qdot3 = qdot2.push(&minus, &minus).scale(-1.0);
    let d3 = -d2;
    let dev = q3.sub(&value).max_abs().max(crate::multilinear::max_abs(&(&d3 - d)));
    let tol = crate::tangent::FIBER_TOL * (1.0 + value.max_abs());
    if dev > tol {
        return Err(Error::FiberMismatch { what: "tensor-bundle pi", deviation: dev, tol });
    }
    Ok(dq.sub(&qdot3).scale(0.5))
}

/// The Levi-Civita connection at a point, computed two ways.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviCivita {
    /// `Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)`.
    pub closed_form: Bilinear,
    /// Symmetric solution of `∇g = 0` through the operator `A ↦ −½(g(A·, ·) + g(·, A·))`.
    pub solved: Bilinear,
    /// Rank of that operator on symmetric `A`.
    pub rank: usize,
    /// Its dimension `n²(n+1)/2`.
    pub full_rank: usize,
}

impl LeviCivita {
    pub fn disagreement(&self) -> f64 {
        (self.closed_form.clone() - self.solved.clone()).max_abs()
    }

    pub fn is_unique(&self) -> bool {
        self.rank == self.full_rank
    }
}

/// Relative singular-value threshold for the rank count.
const RANK_TOL: f64 = 1e-10;

/// Symmetric index pairs `i ≤ j`.
fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

pub fn levi_civita(metric: &MetricField, x: &Vector) -> Result<LeviCivita> {
    let n = metric.dim();
    let g = metric.check_nondegenerate(x)?;
    let g_inv = g.clone().try_inverse().ok_or(Error::DegenerateMetric(0.0))?;
    let taylor = metric.taylor(x, 1)?;
    let dg = |a: usize, i: usize, j: usize| taylor[i * n + j].d1(a);

    let closed_form = Bilinear::from_fn(n, |k, i, j| {
        0.5 * (0..n).map(|l| g_inv[(k, l)] * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j))).sum::<f64>()
    });

    // Unknowns A^m_{ab} with a ≤ b; rows indexed by (direction a, pair j ≤ k).
    let pairs = sym_pairs(n);
    let dim = n * pairs.len();
    let col = |m: usize, a: usize, b: usize| {
        let p = pairs.iter().position(|&q| q == (a.min(b), a.max(b))).expect("pair");
        m * pairs.len() + p
    };
    let mut op = Matrix::zeros(dim, dim);
    let mut rhs = Vector::zeros(dim);
    for a in 0..n {
        for (p, &(j, k)) in pairs.iter().enumerate() {
            let row = a * pairs.len() + p;
            for m in 0..n {
                op[(row, col(m, a, j))] -= 0.5 * g[(m, k)];
                op[(row, col(m, a, k))] -= 0.5 * g[(j, m)];
            }
            rhs[row] = -0.5 * dg(a, j, k);
        }
    }
    let svd = op.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax.max(1.0)).count();
    let sol = op.lu().solve(&rhs).ok_or(Error::DegenerateMetric(0.0))?;
    let solved = Bilinear::from_fn(n, |k, i, j| sol[col(k, i, j)]);
    Ok(LeviCivita { closed_form, solved, rank, full_rank: dim })
}

/// The holonomic symmetry-jet field of a metric's Levi-Civita connection.
pub fn levi_civita_sjet(metric: Arc<MetricField>) -> SymmetryJetField {
    sjet_from_connection(&ConnectionField::new(Arc::new(MetricChristoffel::new(metric))))
}
