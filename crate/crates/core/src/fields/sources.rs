//! Bilinear-coefficient fields (Christoffel symbols, symmetry-jet blocks) and
//! metric fields, all Taylor-queryable.

use std::fmt::Debug;
use std::sync::Arc;

use super::domain::Domain;
use super::expr::Program;
use super::taylor::{Shape, Taylor};
use crate::error::{Error, Result};
use crate::multilinear::{Bilinear, Matrix, Vector};

/// Value and derivatives of a bilinear field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearJet {
    pub value: Bilinear,
    /// `d1[i] = ∂_i B`, present for order ≥ 1.
    pub d1: Vec<Bilinear>,
    /// `d2[i*n + j] = ∂_i∂_j B`, present for order 2.
    pub d2: Vec<Bilinear>,
}

impl BilinearJet {
    pub fn dim(&self) -> usize {
        self.value.dim()
    }

    pub fn order(&self) -> usize {
        if !self.d2.is_empty() {
            2
        } else if !self.d1.is_empty() {
            1
        } else {
            0
        }
    }

    /// `∂_d B = Σ dⁱ ∂_i B`.
    pub fn derivative(&self, d: &Vector) -> Bilinear {
        let n = self.dim();
        assert!(!self.d1.is_empty(), "first derivative not computed");
        let mut out = Bilinear::zeros(n);
        for i in 0..n {
            if d[i] != 0.0 {
                out += &self.d1[i].scale(d[i]);
            }
        }
        out
    }

    /// `∂_a∂_b B = Σ aⁱ bʲ ∂_i∂_j B`.
    pub fn second_derivative(&self, a: &Vector, b: &Vector) -> Bilinear {
        let n = self.dim();
        assert!(!self.d2.is_empty(), "second derivative not computed");
        let mut out = Bilinear::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let w = a[i] * b[j];
                if w != 0.0 {
                    out += &self.d2[i * n + j].scale(w);
                }
            }
        }
        out
    }

    fn map(&self, f: impl Fn(&Bilinear) -> Bilinear) -> BilinearJet {
        BilinearJet {
            value: f(&self.value),
            d1: self.d1.iter().map(&f).collect(),
            d2: self.d2.iter().map(&f).collect(),
        }
    }

    /// Assembles a jet from per-coefficient Taylor blocks, indexed `(k*n + i)*n + j`.
    pub fn from_taylor(n: usize, order: usize, blocks: &[Vec<f64>]) -> BilinearJet {
        let coeff = |slot: usize| Bilinear::from_fn(n, |k, i, j| blocks[(k * n + i) * n + j][slot]);
        BilinearJet {
            value: coeff(0),
            d1: if order >= 1 { (0..n).map(|a| coeff(1 + a)).collect() } else { Vec::new() },
            d2: if order >= 2 { (0..n * n).map(|ab| coeff(1 + n + ab)).collect() } else { Vec::new() },
        }
    }
}

/// A field of bilinear maps `x ↦ B_x` over a chart.
pub trait BilinearField: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> &Domain;

    /// Value and derivative blocks up to `order ≤ 2`.
    fn taylor(&self, x: &Vector, order: usize) -> Result<BilinearJet>;

    fn value(&self, x: &Vector) -> Result<Bilinear> {
        Ok(self.taylor(x, 0)?.value)
    }
}

fn check_point(n: usize, domain: &Domain, x: &Vector) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    domain.check(x)
}

/// A bilinear field with one expression per coefficient `(k, i, j)`.
#[derive(Debug, Clone)]
pub struct ExprBilinear {
    n: usize,
    comps: Vec<Program>,
    domain: Domain,
}

impl ExprBilinear {
    /// `comps[(k*n + i)*n + j]` is the k-th component of `B(e_i, e_j)`.
    pub fn new(n: usize, comps: Vec<Program>, domain: Domain) -> Self {
        assert_eq!(comps.len(), n * n * n, "one expression per coefficient");
        Self { n, comps, domain }
    }

    pub fn zero(n: usize, domain: Domain) -> Self {
        let zero = Program::compile(&super::expr::Expr::Num(0.0));
        Self::new(n, vec![zero; n * n * n], domain)
    }
}

impl BilinearField for ExprBilinear {
    fn dim(&self) -> usize {
        self.n
    }

    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn taylor(&self, x: &Vector, order: usize) -> Result<BilinearJet> {
        check_point(self.n, &self.domain, x)?;
        let shape = Shape::new(self.n, order);
        let mut work = Vec::new();
        let mut blocks = Vec::with_capacity(self.comps.len());
        for p in &self.comps {
            let mut out = vec![0.0; shape.len()];
            if !p.is_zero() {
                p.taylor_with(x.as_slice(), shape, &mut work, &mut out)?;
            }
            blocks.push(out);
        }
        Ok(BilinearJet::from_taylor(self.n, order, &blocks))
    }

    fn value(&self, x: &Vector) -> Result<Bilinear> {
        check_point(self.n, &self.domain, x)?;
        let mut stack = Vec::new();
        let mut c = Vec::with_capacity(self.comps.len());
        for p in &self.comps {
            c.push(if p.is_zero() { 0.0 } else { p.eval_with(x.as_slice(), &mut stack)? });
        }
        let n = self.n;
        Ok(Bilinear::from_fn(n, |k, i, j| c[(k * n + i) * n + j]))
    }
}

/// `B'(u, v) = s·B(u, v)`, or `s·B(v, u)` when `transpose` is set.
#[derive(Debug, Clone)]
pub struct Transformed {
    pub inner: Arc<dyn BilinearField>,
    pub scale: f64,
    pub transpose: bool,
}

impl Transformed {
    fn apply(&self, b: &Bilinear) -> Bilinear {
        let b = if self.transpose { b.transpose() } else { b.clone() };
        b.scale(self.scale)
    }
}

impl BilinearField for Transformed {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn domain(&self) -> &Domain {
        self.inner.domain()
    }

    fn taylor(&self, x: &Vector, order: usize) -> Result<BilinearJet> {
        Ok(self.inner.taylor(x, order)?.map(|b| self.apply(b)))
    }

    fn value(&self, x: &Vector) -> Result<Bilinear> {
        Ok(self.apply(&self.inner.value(x)?))
    }
}

/// Wraps `inner` in a [`Transformed`] field. Scales used by the library are
/// powers of two, so a transformation followed by its inverse is exact.
pub fn transformed(inner: Arc<dyn BilinearField>, scale: f64, transpose: bool) -> Arc<dyn BilinearField> {
    Arc::new(Transformed { inner, scale, transpose })
}

/// Signature requirement of a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    /// Positive definite.
    Riemannian,
    /// Any nondegenerate signature.
    Nondegenerate,
}

/// Threshold below which `|det g|` counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// A symmetric (0,2)-tensor field given by expressions.
#[derive(Debug, Clone)]
pub struct MetricField {
    n: usize,
    /// Row-major n×n; entries `(i, j)` and `(j, i)` share one program.
    comps: Vec<Program>,
    domain: Domain,
    pub signature: Signature,
}

impl MetricField {
    /// `upper[i][j - i]` holds `g_ij` for `i ≤ j`.
    pub fn new(n: usize, upper: Vec<Vec<Program>>, domain: Domain, signature: Signature) -> Self {
        let mut comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (i.min(j), i.max(j));
                comps.push(upper[a][b - a].clone());
            }
        }
        Self { n, comps, domain, signature }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn value(&self, x: &Vector) -> Result<Matrix> {
        check_point(self.n, &self.domain, x)?;
        let mut stack = Vec::new();
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.comps[i * self.n + j].eval_with(x.as_slice(), &mut stack)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// Taylor blocks of all entries, `out[i*n + j]`.
    pub fn taylor(&self, x: &Vector, order: usize) -> Result<Vec<Taylor>> {
        check_point(self.n, &self.domain, x)?;
        let n = self.n;
        let shape = Shape::new(n, order);
        let mut work = Vec::new();
        let mut upper = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let mut out = vec![0.0; shape.len()];
                self.comps[i * n + j].taylor_with(x.as_slice(), shape, &mut work, &mut out)?;
                upper[i * n + j] = Some(Taylor::from_data(shape, out));
            }
        }
        Ok((0..n * n)
            .map(|ij| {
                let (i, j) = (ij / n, ij % n);
                upper[i.min(j) * n + i.max(j)].clone().expect("filled")
            })
            .collect())
    }

    /// Fails with `DegenerateMetric` when `|det g(x)|` is too small, and with
    /// `Validation` when a Riemannian metric is not positive definite.
    pub fn check_nondegenerate(&self, x: &Vector) -> Result<Matrix> {
        let g = self.value(x)?;
        let det = g.determinant();
        if !(det.abs() > DEGENERACY_TOL) {
            return Err(Error::DegenerateMetric(det.abs()));
        }
        if self.signature == Signature::Riemannian {
            let eig = g.clone().symmetric_eigenvalues();
            if eig.iter().any(|&l| l <= 0.0) {
                return Err(Error::Validation(vec![format!(
                    "metric is not positive definite at {:?}",
                    x.as_slice()
                )]));
            }
        }
        Ok(g)
    }
}

/// Taylor blocks (order ≤ 2) of the inverse of a matrix-valued function.
fn inverse_taylor(n: usize, g: &[Taylor]) -> Result<Vec<Taylor>> {
    let shape = g[0].shape;
    assert!(shape.order <= 2, "inverse blocks are provided up to order 2");
    let at = |f: &dyn Fn(&Taylor) -> f64| Matrix::from_fn(n, n, |i, j| f(&g[i * n + j]));
    let g0 = at(&|t| t.value());
    let det = g0.determinant();
    if !(det.abs() > DEGENERACY_TOL) {
        return Err(Error::DegenerateMetric(det.abs()));
    }
    let h0 = g0.try_inverse().ok_or(Error::DegenerateMetric(det.abs()))?;
    let m = shape.n;
    let d1: Vec<Matrix> = if shape.order >= 1 { (0..m).map(|a| at(&|t| t.d1(a))).collect() } else { Vec::new() };
    let h1: Vec<Matrix> = d1.iter().map(|da| -(&h0 * da * &h0)).collect();
    let mut h2 = Vec::new();
    if shape.order >= 2 {
        for a in 0..m {
            for b in 0..m {
                let dab = at(&|t| t.d2(a, b));
                h2.push(-(&h0 * dab * &h0) - &h1[a] * &d1[b] * &h0 - &h1[b] * &d1[a] * &h0);
            }
        }
    }
    Ok((0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            let mut data = vec![0.0; shape.len()];
            data[0] = h0[(i, j)];
            for a in 0..h1.len() {
                data[1 + a] = h1[a][(i, j)];
            }
            for (ab, hab) in h2.iter().enumerate() {
                data[1 + m + ab] = hab[(i, j)];
            }
            Taylor::from_data(shape, data)
        })
        .collect())
}

/// Inverse of a metric as Taylor blocks of order `order`.
pub fn metric_inverse_taylor(metric: &MetricField, x: &Vector, order: usize) -> Result<Vec<Taylor>> {
    inverse_taylor(metric.dim(), &metric.taylor(x, order)?)
}

/// The Levi-Civita Christoffel symbols of a metric field,
/// `Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)`.
#[derive(Debug, Clone)]
pub struct MetricChristoffel {
    pub metric: Arc<MetricField>,
}

impl MetricChristoffel {
    pub fn new(metric: Arc<MetricField>) -> Self {
        Self { metric }
    }
}

impl BilinearField for MetricChristoffel {
    fn dim(&self) -> usize {
        self.metric.dim()
    }

    fn domain(&self) -> &Domain {
        self.metric.domain()
    }

    fn taylor(&self, x: &Vector, order: usize) -> Result<BilinearJet> {
        let n = self.dim();
        let g = self.metric.taylor(x, order + 1)?;
        let gl = |i: usize, j: usize| &g[i * n + j];
        let lowered = |l: usize, i: usize, j: usize| {
            gl(l, j).partial(i).add(&gl(l, i).partial(j)).sub(&gl(i, j).partial(l)).scale(0.5)
        };
        let truncated: Vec<Taylor> = g.iter().map(|t| t.truncate(order)).collect();
        let ginv = inverse_taylor(n, &truncated)?;
        let mut first = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    first.push(lowered(l, i, j));
                }
            }
        }
        let mut blocks = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Taylor::constant(Shape::new(n, order), 0.0);
                    for l in 0..n {
                        acc = acc.add(&ginv[k * n + l].mul(&first[(l * n + i) * n + j]));
                    }
                    blocks.push(acc.data);
                }
            }
        }
        Ok(BilinearJet::from_taylor(n, order, &blocks))
    }

    fn value(&self, x: &Vector) -> Result<Bilinear> {
        let n = self.dim();
        let g = self.metric.taylor(x, 1)?;
        let g0 = Matrix::from_fn(n, n, |i, j| g[i * n + j].value());
        let det = g0.determinant();
        if !(det.abs() > DEGENERACY_TOL) {
            return Err(Error::DegenerateMetric(det.abs()));
        }
        let h = g0.try_inverse().ok_or(Error::DegenerateMetric(det.abs()))?;
        let dg = |a: usize, i: usize, j: usize| g[i * n + j].d1(a);
        Ok(Bilinear::from_fn(n, |k, i, j| {
            0.5 * (0..n).map(|l| h[(k, l)] * (dg(i, l, j) + dg(j, l, i) - dg(l, i, j))).sum::<f64>()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::expr::parse_expr;

    fn prog(s: &str) -> Program {
        Program::compile(&parse_expr(s, Some(2)).unwrap())
    }

    fn sphere() -> MetricField {
        let f = "4/(1 + x1^2 + x2^2)^2";
        MetricField::new(2, vec![vec![prog(f), prog("0")], vec![prog(f)]], Domain::ball(2, 0.9), Signature::Riemannian)
    }

    #[test]
    fn christoffel_value_matches_taylor_block() {
        let c = MetricChristoffel::new(Arc::new(sphere()));
        let x = Vector::from_vec(vec![0.3, -0.4]);
        let a = c.value(&x).unwrap();
        let b = c.taylor(&x, 0).unwrap().value;
        assert!((a - b).max_abs() < 1e-14);
    }

    #[test]
    fn sphere_christoffels_vanish_at_origin() {
        let c = MetricChristoffel::new(Arc::new(sphere()));
        let j = c.taylor(&Vector::zeros(2), 1).unwrap();
        assert!(j.value.max_abs() < 1e-15);
        // Conformal factor e^{2φ}, φ = log 2 − log(1 + r²): Γ^k_ij = δ_ik φ_j + δ_jk φ_i − δ_ij φ_k,
        // with ∂_a∂_b φ = −2δ_ab at the origin.
        let expected = |a: usize, k: usize, i: usize, j: usize| {
            let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
            -2.0 * (d(i, k) * d(j, a) + d(j, k) * d(i, a) - d(i, j) * d(k, a))
        };
        for a in 0..2 {
            for k in 0..2 {
                for i in 0..2 {
                    for jj in 0..2 {
                        assert!((j.d1[a].get(k, i, jj) - expected(a, k, i, jj)).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_taylor_matches_finite_differences() {
        let m = sphere();
        let x = Vector::from_vec(vec![0.3, -0.2]);
        let inv = metric_inverse_taylor(&m, &x, 2).unwrap();
        let h = 1e-3;
        let inv_at = |y: &Vector| m.value(y).unwrap().try_inverse().unwrap();
        let e0 = Vector::from_vec(vec![h, 0.0]);
        let e1 = Vector::from_vec(vec![0.0, h]);
        let fd = (inv_at(&(&x + &e0)) - inv_at(&(&x - &e0)))[(0, 0)] / (2.0 * h);
        assert!((inv[0].d1(0) - fd).abs() < 1e-5);
        let first = |y: &Vector| metric_inverse_taylor(&m, y, 1).unwrap()[1].d1(0);
        let fd2 = (first(&(&x + &e1)) - first(&(&x - &e1))) / (2.0 * h);
        assert!((inv[1].d2(0, 1) - fd2).abs() < 1e-5);
    }

    #[test]
    fn transformation_round_trip_is_exact() {
        let base: Arc<dyn BilinearField> = Arc::new(ExprBilinear::new(
            2,
            ["x1", "x2^2", "0.3", "x1*x2", "1", "-x1", "sin(x2)", "2"].iter().map(|s| prog(s)).collect(),
            Domain::Whole,
        ));
        let there = transformed(base.clone(), -2.0, true);
        let back = transformed(there, -0.5, true);
        let x = Vector::from_vec(vec![0.7, -0.4]);
        assert_eq!(back.taylor(&x, 2).unwrap(), base.taylor(&x, 2).unwrap());
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let m = MetricField::new(2, vec![vec![prog("1"), prog("1")], vec![prog("1")]], Domain::Whole, Signature::Nondegenerate);
        assert!(matches!(m.check_nondegenerate(&Vector::zeros(2)), Err(Error::DegenerateMetric(_))));
    }
}
