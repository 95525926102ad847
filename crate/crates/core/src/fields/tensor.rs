//! Scalar, vector and general tensor fields given by component expressions.

use super::domain::Domain;
use super::expr::{parse_expr, Program};
use super::taylor::Shape;
use crate::error::{Error, Result};
use crate::multilinear::{Bilinear, Matrix, Quadrilinear, Trilinear, Vector};
use crate::tangent::VectorField;

fn compile_all(n: usize, texts: &[&str]) -> Result<Vec<Program>> {
    texts.iter().map(|t| parse_expr(t, Some(n)).map(|e| Program::compile(&e))).collect()
}

/// Value and gradient of every component of a field at a point.
fn jet1(n: usize, comps: &[Program], domain: &Domain, x: &Vector) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    domain.check(x)?;
    let shape = Shape::new(n, 1);
    let mut work = Vec::new();
    let mut block = vec![0.0; shape.len()];
    let mut vals = Vec::with_capacity(comps.len());
    let mut grads = Vec::with_capacity(comps.len());
    for p in comps {
        p.taylor_with(x.as_slice(), shape, &mut work, &mut block)?;
        vals.push(block[0]);
        grads.push(block[1..].to_vec());
    }
    Ok((vals, grads))
}

/// A scalar field.
#[derive(Debug, Clone)]
pub struct ScalarField {
    n: usize,
    prog: Program,
    domain: Domain,
}

impl ScalarField {
    pub fn parse(n: usize, text: &str, domain: Domain) -> Result<Self> {
        Ok(Self { n, prog: compile_all(n, &[text])?.remove(0), domain })
    }

    pub fn value_and_gradient(&self, x: &Vector) -> Result<(f64, Vector)> {
        let (v, g) = jet1(self.n, std::slice::from_ref(&self.prog), &self.domain, x)?;
        Ok((v[0], Vector::from_vec(g[0].clone())))
    }
}

/// A vector field with one expression per component.
#[derive(Debug, Clone)]
pub struct ExprVectorField {
    n: usize,
    comps: Vec<Program>,
    domain: Domain,
}

impl ExprVectorField {
    pub fn parse(n: usize, texts: &[&str], domain: Domain) -> Result<Self> {
        if texts.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: texts.len() });
        }
        Ok(Self { n, comps: compile_all(n, texts)?, domain })
    }
}

impl VectorField for ExprVectorField {
    fn dim(&self) -> usize {
        self.n
    }

    fn value_and_jacobian(&self, x: &Vector) -> Result<(Vector, Matrix)> {
        let (v, g) = jet1(self.n, &self.comps, &self.domain, x)?;
        Ok((Vector::from_vec(v), Matrix::from_fn(self.n, self.n, |k, i| g[k][i])))
    }
}

/// Type of a tensor: `contra` upper and `cov` lower indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorType {
    pub contra: usize,
    pub cov: usize,
}

impl TensorType {
    pub fn rank(&self) -> usize {
        self.contra + self.cov
    }
}

/// Components of a tensor at a point, flattened row-major over
/// (upper indices, then lower indices).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    pub n: usize,
    pub ty: TensorType,
    pub c: Vec<f64>,
}

impl TensorValue {
    pub fn zeros(n: usize, ty: TensorType) -> Self {
        Self { n, ty, c: vec![0.0; n.pow(ty.rank() as u32)] }
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.c[self.flat(idx)]
    }

    /// Multi-index of a flat position.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let r = self.ty.rank();
        let mut idx = vec![0; r];
        for slot in (0..r).rev() {
            idx[slot] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn sub(&self, other: &TensorValue) -> TensorValue {
        TensorValue { n: self.n, ty: self.ty, c: self.c.iter().zip(&other.c).map(|(a, b)| a - b).collect() }
    }

    /// The natural action of a linear isomorphism `A`: upper slots are pushed by
    /// `A`, lower slots pulled back by `A⁻¹`.
    pub fn push(&self, a: &Matrix, a_inv: &Matrix) -> TensorValue {
        let factors: Vec<&Matrix> =
            (0..self.ty.rank()).map(|s| if s < self.ty.contra { a } else { a_inv }).collect();
        self.transform(&factors)
    }

    /// Derivative of [`TensorValue::push`] at `A` in the direction `Ȧ`.
    pub fn push_derivative(&self, a: &Matrix, a_inv: &Matrix, a_dot: &Matrix) -> TensorValue {
        let r = self.ty.rank();
        let inv_dot = -(a_inv * a_dot * a_inv);
        let mut out = TensorValue::zeros(self.n, self.ty);
        for slot in 0..r {
            let factors: Vec<&Matrix> = (0..r)
                .map(|s| match (s < self.ty.contra, s == slot) {
                    (true, true) => a_dot,
                    (true, false) => a,
                    (false, true) => &inv_dot,
                    (false, false) => a_inv,
                })
                .collect();
            out = out.add(&self.transform(&factors));
        }
        out
    }

    /// Applies one matrix per slot: upper slots as `M`, lower slots as `Mᵀ`.
    fn transform(&self, factors: &[&Matrix]) -> TensorValue {
        let mut out = TensorValue::zeros(self.n, self.ty);
        let r = self.ty.rank();
        for (flat, o) in out.c.iter_mut().enumerate() {
            let idx = self.index(flat);
            let mut acc = 0.0;
            for (src, &v) in self.c.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let sidx = self.index(src);
                let mut w = v;
                for s in 0..r {
                    w *= if s < self.ty.contra { factors[s][(idx[s], sidx[s])] } else { factors[s][(sidx[s], idx[s])] };
                    if w == 0.0 {
                        break;
                    }
                }
                acc += w;
            }
            *o = acc;
        }
        out
    }

    pub fn add(&self, other: &TensorValue) -> TensorValue {
        TensorValue { n: self.n, ty: self.ty, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: f64) -> TensorValue {
        TensorValue { n: self.n, ty: self.ty, c: self.c.iter().map(|a| a * s).collect() }
    }

    /// A (1,2) tensor from a bilinear map, `T^k_ij = B(e_i, e_j)^k`.
    pub fn from_bilinear(b: &Bilinear) -> TensorValue {
        TensorValue { n: b.dim(), ty: TensorType { contra: 1, cov: 2 }, c: b.coeffs().to_vec() }
    }

    /// A (1,3) tensor from a trilinear map.
    pub fn from_trilinear(t: &Trilinear) -> TensorValue {
        TensorValue { n: t.dim(), ty: TensorType { contra: 1, cov: 3 }, c: t.coeffs().to_vec() }
    }

    /// A (1,4) tensor from a quadrilinear map.
    pub fn from_quadrilinear(q: &Quadrilinear) -> TensorValue {
        TensorValue { n: q.dim(), ty: TensorType { contra: 1, cov: 4 }, c: q.coeffs().to_vec() }
    }
}

/// A tensor field with one expression per component.
#[derive(Debug, Clone)]
pub struct ExprTensorField {
    n: usize,
    pub ty: TensorType,
    comps: Vec<Program>,
    domain: Domain,
}

impl ExprTensorField {
    pub fn parse(n: usize, ty: TensorType, texts: &[&str], domain: Domain) -> Result<Self> {
        let expected = n.pow(ty.rank() as u32);
        if texts.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: texts.len() });
        }
        Ok(Self { n, ty, comps: compile_all(n, texts)?, domain })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The value and its partial derivatives `∂_a Q` for each coordinate direction.
    pub fn jet1(&self, x: &Vector) -> Result<(TensorValue, Vec<TensorValue>)> {
        let (v, g) = jet1(self.n, &self.comps, &self.domain, x)?;
        let value = TensorValue { n: self.n, ty: self.ty, c: v };
        let d = (0..self.n)
            .map(|a| TensorValue { n: self.n, ty: self.ty, c: g.iter().map(|gr| gr[a]).collect() })
            .collect();
        Ok((value, d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_field_jacobian() {
        let f = ExprVectorField::parse(2, &["x1*x2", "sin(x1)"], Domain::Whole).unwrap();
        let (v, j) = f.value_and_jacobian(&Vector::from_vec(vec![2.0, 3.0])).unwrap();
        assert_eq!(v[0], 6.0);
        assert_eq!(j[(0, 0)], 3.0);
        assert_eq!(j[(0, 1)], 2.0);
        assert_eq!(j[(1, 0)], 2.0f64.cos());
    }

    #[test]
    fn tensor_push_by_scaling() {
        let ty = TensorType { contra: 1, cov: 2 };
        let mut t = TensorValue::zeros(2, ty);
        let f = t.flat(&[0, 1, 1]);
        t.c[f] = 1.0;
        let a = Matrix::identity(2, 2) * 2.0;
        let pushed = t.push(&a, &(Matrix::identity(2, 2) * 0.5));
        assert_eq!(pushed.get(&[0, 1, 1]), 0.5);
    }

    #[test]
    fn push_derivative_matches_difference_quotient() {
        let ty = TensorType { contra: 1, cov: 1 };
        let t = TensorValue { n: 2, ty, c: vec![1.0, 2.0, -0.5, 0.25] };
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.2, -0.3, 1.5]);
        let dot = Matrix::from_row_slice(2, 2, &[0.4, -1.0, 0.7, 0.1]);
        let h = 1e-6;
        let at = |m: &Matrix| t.push(m, &m.clone().try_inverse().unwrap());
        let fd = at(&(&a + &dot * h)).sub(&at(&(&a - &dot * h))).scale(0.5 / h);
        let exact = t.push_derivative(&a, &a.clone().try_inverse().unwrap(), &dot);
        assert!(fd.sub(&exact).max_abs() < 1e-8);
    }

    #[test]
    fn index_round_trip() {
        let t = TensorValue::zeros(3, TensorType { contra: 1, cov: 2 });
        for f in 0..27 {
            assert_eq!(t.flat(&t.index(f)), f);
        }
    }
}
