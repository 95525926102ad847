//! Vector-valued bilinear and trilinear maps on ℝⁿ stored as dense coefficient arrays.

use nalgebra::{DMatrix, DVector};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Largest absolute entry of a vector.
pub fn max_abs(v: &Vector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest absolute entry of a matrix.
pub fn max_abs_mat(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// A bilinear map `B: ℝⁿ × ℝⁿ → ℝⁿ`.
///
/// Coefficient `(k, i, j)` is the k-th component of `B(e_i, e_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bilinear {
    n: usize,
    c: Vec<f64>,
}

impl Bilinear {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            c: vec![0.0; n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut b = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    b.c[(k * n + i) * n + j] = f(k, i, j);
                }
            }
        }
        b
    }

    /// Builds `B` from its values on basis pairs: `f(i, j) = B(e_i, e_j)`.
    pub fn from_columns(n: usize, mut f: impl FnMut(usize, usize) -> Vector) -> Self {
        let mut b = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                for k in 0..n {
                    b.c[(k * n + i) * n + j] = v[k];
                }
            }
        }
        b
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.n + i) * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.c[(k * self.n + i) * self.n + j] = v;
    }

    pub fn apply(&self, u: &Vector, v: &Vector) -> Vector {
        let n = self.n;
        let mut out = Vector::zeros(n);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                if u[i] == 0.0 {
                    continue;
                }
                let row = &self.c[(k * n + i) * n..(k * n + i + 1) * n];
                let mut t = 0.0;
                for j in 0..n {
                    t += row[j] * v[j];
                }
                s += u[i] * t;
            }
            out[k] = s;
        }
        out
    }

    /// The linear map `v ↦ B(u, v)`.
    pub fn left(&self, u: &Vector) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |k, j| (0..n).map(|i| self.get(k, i, j) * u[i]).sum())
    }

    /// The linear map `u ↦ B(u, v)`.
    pub fn right(&self, v: &Vector) -> Matrix {
        let n = self.n;
        Matrix::from_fn(n, n, |k, i| (0..n).map(|j| self.get(k, i, j) * v[j]).sum())
    }

    /// `Bᵀ(u, v) = B(v, u)`.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |k, i, j| self.get(k, j, i))
    }

    /// `M ∘ B`.
    pub fn post(&self, m: &Matrix) -> Self {
        let n = self.n;
        Self::from_fn(n, |k, i, j| (0..n).map(|l| m[(k, l)] * self.get(l, i, j)).sum())
    }

    /// `(u, v) ↦ B(A u, C v)`.
    pub fn pre(&self, a: &Matrix, c: &Matrix) -> Self {
        let n = self.n;
        let mut tmp = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for q in 0..n {
                    let mut s = 0.0;
                    for p in 0..n {
                        s += self.get(k, p, q) * a[(p, i)];
                    }
                    tmp.set(k, i, q, s);
                }
            }
        }
        Self::from_fn(n, |k, i, j| (0..n).map(|q| tmp.get(k, i, q) * c[(q, j)]).sum())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn symmetric_part(&self) -> Self {
        (self.clone() + self.transpose()).scale(0.5)
    }

    pub fn antisymmetric_part(&self) -> Self {
        (self.clone() - self.transpose()).scale(0.5)
    }

    pub fn symmetry_defect(&self) -> f64 {
        (self.clone() - self.transpose()).max_abs()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }
}

impl Add for Bilinear {
    type Output = Bilinear;
    fn add(mut self, rhs: Bilinear) -> Bilinear {
        self += &rhs;
        self
    }
}

impl AddAssign<&Bilinear> for Bilinear {
    fn add_assign(&mut self, rhs: &Bilinear) {
        assert_eq!(self.n, rhs.n, "bilinear dimension mismatch");
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl Sub for Bilinear {
    type Output = Bilinear;
    fn sub(mut self, rhs: Bilinear) -> Bilinear {
        assert_eq!(self.n, rhs.n, "bilinear dimension mismatch");
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Bilinear {
    type Output = Bilinear;
    fn neg(self) -> Bilinear {
        self.scale(-1.0)
    }
}

impl Mul<f64> for Bilinear {
    type Output = Bilinear;
    fn mul(self, s: f64) -> Bilinear {
        self.scale(s)
    }
}

/// A trilinear map `C: ℝⁿ × ℝⁿ × ℝⁿ → ℝⁿ`.
///
/// Coefficient `(k, i, j, l)` is the k-th component of `C(e_i, e_j, e_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trilinear {
    n: usize,
    c: Vec<f64>,
}

impl Trilinear {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            c: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        t.c[((k * n + i) * n + j) * n + l] = f(k, i, j, l);
                    }
                }
            }
        }
        t
    }

    /// Builds `C` from its values on basis triples: `f(i, j, l) = C(e_i, e_j, e_l)`.
    pub fn from_columns(n: usize, mut f: impl FnMut(usize, usize, usize) -> Vector) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v = f(i, j, l);
                    for k in 0..n {
                        t.c[((k * n + i) * n + j) * n + l] = v[k];
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize, l: usize) -> f64 {
        self.c[((k * self.n + i) * self.n + j) * self.n + l]
    }

    pub fn apply(&self, u: &Vector, v: &Vector, w: &Vector) -> Vector {
        let n = self.n;
        let mut out = Vector::zeros(n);
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                if u[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if v[j] == 0.0 {
                        continue;
                    }
                    let base = ((k * n + i) * n + j) * n;
                    let mut t = 0.0;
                    for l in 0..n {
                        t += self.c[base + l] * w[l];
                    }
                    s += u[i] * v[j] * t;
                }
            }
            out[k] = s;
        }
        out
    }

    /// Argument permutation: `C'(u₀, u₁, u₂) = C(u_{σ(0)}, u_{σ(1)}, u_{σ(2)})`.
    pub fn permute(&self, sigma: [usize; 3]) -> Self {
        let n = self.n;
        Self::from_fn(n, |k, i, j, l| {
            let idx = [i, j, l];
            self.get(k, idx[sigma[0]], idx[sigma[1]], idx[sigma[2]])
        })
    }

    /// `M ∘ C`.
    pub fn post(&self, m: &Matrix) -> Self {
        let n = self.n;
        Self::from_fn(n, |k, i, j, l| {
            (0..n).map(|q| m[(k, q)] * self.get(q, i, j, l)).sum()
        })
    }

    /// `(u, v, w) ↦ C(A u, B v, D w)`.
    pub fn pre(&self, a: &Matrix, b: &Matrix, d: &Matrix) -> Self {
        let n = self.n;
        Self::from_columns(n, |i, j, l| {
            self.apply(
                &a.column(i).into_owned(),
                &b.column(j).into_owned(),
                &d.column(l).into_owned(),
            )
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest deviation from total symmetry in the three arguments.
    pub fn symmetry_defect(&self) -> f64 {
        [[1, 0, 2], [0, 2, 1], [2, 1, 0]]
            .iter()
            .map(|s| (self.clone() - self.permute(*s)).max_abs())
            .fold(0.0, f64::max)
    }
}

impl Add for Trilinear {
    type Output = Trilinear;
    fn add(mut self, rhs: Trilinear) -> Trilinear {
        self += &rhs;
        self
    }
}

impl AddAssign<&Trilinear> for Trilinear {
    fn add_assign(&mut self, rhs: &Trilinear) {
        assert_eq!(self.n, rhs.n, "trilinear dimension mismatch");
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl Sub for Trilinear {
    type Output = Trilinear;
    fn sub(mut self, rhs: Trilinear) -> Trilinear {
        assert_eq!(self.n, rhs.n, "trilinear dimension mismatch");
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Trilinear {
    type Output = Trilinear;
    fn neg(self) -> Trilinear {
        self.scale(-1.0)
    }
}

/// A quadrilinear map `ℝⁿ × ℝⁿ × ℝⁿ × ℝⁿ → ℝⁿ`.
///
/// Coefficient `(k, a, i, j, l)` is the k-th component of `Q(e_a, e_i, e_j, e_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrilinear {
    n: usize,
    c: Vec<f64>,
}

impl Quadrilinear {
    pub fn zeros(n: usize) -> Self {
        Self { n, c: vec![0.0; n.pow(5)] }
    }

    /// Builds `Q` from its values on basis quadruples.
    pub fn from_columns(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> Vector) -> Self {
        let mut q = Self::zeros(n);
        for a in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let v = f(a, i, j, l);
                        for k in 0..n {
                            q.c[(((k * n + a) * n + i) * n + j) * n + l] = v[k];
                        }
                    }
                }
            }
        }
        q
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    #[inline]
    pub fn get(&self, k: usize, a: usize, i: usize, j: usize, l: usize) -> f64 {
        let n = self.n;
        self.c[(((k * n + a) * n + i) * n + j) * n + l]
    }

    pub fn apply(&self, w: &Vector, u: &Vector, v: &Vector, z: &Vector) -> Vector {
        let n = self.n;
        Vector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for a in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let f = w[a] * u[i] * v[j];
                        if f == 0.0 {
                            continue;
                        }
                        for l in 0..n {
                            s += f * self.get(k, a, i, j, l) * z[l];
                        }
                    }
                }
            }
            s
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_bilinear(n: usize) -> Bilinear {
        Bilinear::from_fn(n, |k, i, j| (k as f64 + 1.0) * 0.3 - (i as f64) * 0.7 + (j * j) as f64 * 0.11)
    }

    #[test]
    fn apply_matches_coefficients() {
        let b = sample_bilinear(3);
        let e = |i| Vector::from_fn(3, |r, _| if r == i { 1.0 } else { 0.0 });
        let v = b.apply(&e(1), &e(2));
        for k in 0..3 {
            assert_eq!(v[k], b.get(k, 1, 2));
        }
    }

    #[test]
    fn pre_and_post_agree_with_pointwise_evaluation() {
        let n = 3;
        let b = sample_bilinear(n);
        let a = Matrix::from_fn(n, n, |i, j| (i as f64) - 0.5 * (j as f64) + 0.2);
        let c = Matrix::from_fn(n, n, |i, j| ((i + 2 * j) as f64).sin());
        let m = Matrix::from_fn(n, n, |i, j| ((3 * i + j) as f64).cos());
        let u = Vector::from_vec(vec![0.3, -1.2, 0.7]);
        let v = Vector::from_vec(vec![1.1, 0.4, -0.5]);
        let lhs = b.pre(&a, &c).post(&m).apply(&u, &v);
        let rhs = &m * b.apply(&(&a * &u), &(&c * &v));
        assert!(max_abs(&(lhs - rhs)) < 1e-13);
    }

    #[test]
    fn left_and_right_partial_maps() {
        let b = sample_bilinear(2);
        let u = Vector::from_vec(vec![0.3, -1.2]);
        let v = Vector::from_vec(vec![1.1, 0.4]);
        assert!(max_abs(&(b.left(&u) * &v - b.apply(&u, &v))) < 1e-14);
        assert!(max_abs(&(b.right(&v) * &u - b.apply(&u, &v))) < 1e-14);
    }

    #[test]
    fn trilinear_permutation_moves_arguments() {
        let n = 2;
        let t = Trilinear::from_fn(n, |k, i, j, l| (k + 2 * i + 3 * j + 5 * l) as f64 * 0.1 + (i * l) as f64);
        let u = Vector::from_vec(vec![0.3, -1.2]);
        let v = Vector::from_vec(vec![1.1, 0.4]);
        let w = Vector::from_vec(vec![-0.6, 0.9]);
        let p = t.permute([1, 2, 0]);
        assert!(max_abs(&(p.apply(&u, &v, &w) - t.apply(&v, &w, &u))) < 1e-14);
    }
}
