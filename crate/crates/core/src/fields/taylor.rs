//! Truncated multivariate Taylor arithmetic up to order three.
//!
//! A value is stored as its full derivative blocks
//! `[f, ∂_i f, ∂_i∂_j f, ∂_i∂_j∂_k f]`, truncated at the requested order.
//! Blocks are dense (no symmetry reduction), row-major in the indices.

use crate::error::{Error, Result};

/// Largest supported derivative order.
pub const MAX_ORDER: usize = 3;

/// Denominators below this magnitude are treated as a singularity.
pub const DIV_EPS: f64 = 1e-14;

/// Dimension and order of a family of Taylor blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub order: usize,
}

impl Shape {
    pub fn new(n: usize, order: usize) -> Self {
        assert!(order <= MAX_ORDER, "Taylor order {order} exceeds {MAX_ORDER}");
        Self { n, order }
    }

    pub fn len(&self) -> usize {
        let n = self.n;
        match self.order {
            0 => 1,
            1 => 1 + n,
            2 => 1 + n + n * n,
            _ => 1 + n + n * n + n * n * n,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn g(&self) -> usize {
        1
    }

    fn h(&self) -> usize {
        1 + self.n
    }

    fn t(&self) -> usize {
        1 + self.n + self.n * self.n
    }

    pub fn constant(&self, c: f64, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = c;
    }

    pub fn variable(&self, value: f64, i: usize, out: &mut [f64]) {
        out.fill(0.0);
        out[0] = value;
        if self.order >= 1 {
            out[self.g() + i] = 1.0;
        }
    }

    pub fn add(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x + y;
        }
    }

    pub fn sub(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = x - y;
        }
    }

    pub fn neg(&self, a: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(a) {
            *o = -x;
        }
    }

    pub fn scale(&self, s: f64, a: &[f64], out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(a) {
            *o = s * x;
        }
    }

    /// Leibniz rule.
    pub fn mul(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (g, h, t) = (self.g(), self.h(), self.t());
        out[0] = a[0] * b[0];
        if self.order >= 1 {
            for i in 0..n {
                out[g + i] = a[g + i] * b[0] + a[0] * b[g + i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let ij = h + i * n + j;
                    out[ij] = a[ij] * b[0]
                        + a[g + i] * b[g + j]
                        + a[g + j] * b[g + i]
                        + a[0] * b[ij];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let ijk = t + (i * n + j) * n + k;
                        let (ij, ik, jk) = (h + i * n + j, h + i * n + k, h + j * n + k);
                        out[ijk] = a[ijk] * b[0]
                            + a[ij] * b[g + k]
                            + a[ik] * b[g + j]
                            + a[jk] * b[g + i]
                            + a[g + i] * b[jk]
                            + a[g + j] * b[ik]
                            + a[g + k] * b[ij]
                            + a[0] * b[ijk];
                    }
                }
            }
        }
    }

    /// Chain rule for `φ∘a` given `d = [φ(a₀), φ'(a₀), φ''(a₀), φ'''(a₀)]` (Faà di Bruno).
    pub fn compose(&self, a: &[f64], d: [f64; 4], out: &mut [f64]) {
        let n = self.n;
        let (g, h, t) = (self.g(), self.h(), self.t());
        out[0] = d[0];
        if self.order >= 1 {
            for i in 0..n {
                out[g + i] = d[1] * a[g + i];
            }
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    let ij = h + i * n + j;
                    out[ij] = d[2] * a[g + i] * a[g + j] + d[1] * a[ij];
                }
            }
        }
        if self.order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let ijk = t + (i * n + j) * n + k;
                        let (ij, ik, jk) = (h + i * n + j, h + i * n + k, h + j * n + k);
                        out[ijk] = d[3] * a[g + i] * a[g + j] * a[g + k]
                            + d[2] * (a[ij] * a[g + k] + a[ik] * a[g + j] + a[jk] * a[g + i])
                            + d[1] * a[ijk];
                    }
                }
            }
        }
    }

    pub fn recip(&self, a: &[f64], out: &mut [f64]) -> Result<()> {
        let x = a[0];
        if x.abs() < DIV_EPS {
            return Err(Error::NonSmoothPoint(format!("division by {x:e}")));
        }
        let r = 1.0 / x;
        self.compose(a, [r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r], out);
        Ok(())
    }

    pub fn powi(&self, a: &[f64], k: i32, out: &mut [f64]) -> Result<()> {
        let x = a[0];
        if k < 0 && x.abs() < DIV_EPS {
            return Err(Error::NonSmoothPoint(format!("negative power of {x:e}")));
        }
        let kf = k as f64;
        let coeff = [1.0, kf, kf * (kf - 1.0), kf * (kf - 1.0) * (kf - 2.0)];
        let mut d = [0.0; 4];
        for (m, dm) in d.iter_mut().enumerate() {
            if coeff[m] != 0.0 {
                *dm = coeff[m] * x.powi(k - m as i32);
            }
        }
        self.compose(a, d, out);
        Ok(())
    }

    pub fn func(&self, f: Func, a: &[f64], out: &mut [f64]) -> Result<()> {
        let x = a[0];
        let d = match f {
            Func::Sin => {
                let (s, c) = x.sin_cos();
                [s, c, -s, -c]
            }
            Func::Cos => {
                let (s, c) = x.sin_cos();
                [c, -s, -c, s]
            }
            Func::Exp => {
                let e = x.exp();
                [e; 4]
            }
            Func::Log => {
                if x < 0.0 {
                    return Err(Error::Domain(format!("log of negative value {x:e}")));
                }
                if x < DIV_EPS {
                    return Err(Error::NonSmoothPoint(format!("log at {x:e}")));
                }
                let r = 1.0 / x;
                [x.ln(), r, -r * r, 2.0 * r * r * r]
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(Error::Domain(format!("sqrt of negative value {x:e}")));
                }
                let s = x.sqrt();
                if self.order == 0 {
                    [s, 0.0, 0.0, 0.0]
                } else {
                    if x < DIV_EPS {
                        return Err(Error::NonSmoothPoint(format!("sqrt at {x:e}")));
                    }
                    [s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x)]
                }
            }
            Func::Atan => {
                let q = 1.0 / (1.0 + x * x);
                [x.atan(), q, -2.0 * x * q * q, (6.0 * x * x - 2.0) * q * q * q]
            }
        };
        self.compose(a, d, out);
        Ok(())
    }
}

/// The elementary functions of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Sin, Func::Cos, Func::Exp, Func::Log, Func::Sqrt, Func::Atan];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn eval(self, x: f64) -> Result<f64> {
        match self {
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
            Func::Exp => Ok(x.exp()),
            Func::Log => {
                if x < 0.0 {
                    Err(Error::Domain(format!("log of negative value {x:e}")))
                } else if x < DIV_EPS {
                    Err(Error::NonSmoothPoint(format!("log at {x:e}")))
                } else {
                    Ok(x.ln())
                }
            }
            Func::Sqrt => {
                if x < 0.0 {
                    Err(Error::Domain(format!("sqrt of negative value {x:e}")))
                } else {
                    Ok(x.sqrt())
                }
            }
            Func::Atan => Ok(x.atan()),
        }
    }
}

/// An owned Taylor block of a scalar function.
#[derive(Debug, Clone, PartialEq)]
pub struct Taylor {
    pub shape: Shape,
    pub data: Vec<f64>,
}

impl Taylor {
    pub fn constant(shape: Shape, c: f64) -> Self {
        let mut data = vec![0.0; shape.len()];
        shape.constant(c, &mut data);
        Self { shape, data }
    }

    pub fn from_data(shape: Shape, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), shape.len());
        Self { shape, data }
    }

    pub fn value(&self) -> f64 {
        self.data[0]
    }

    pub fn d1(&self, i: usize) -> f64 {
        self.data[1 + i]
    }

    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.data[1 + self.shape.n + i * self.shape.n + j]
    }

    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.shape.n;
        self.data[1 + n + n * n + (i * n + j) * n + k]
    }

    /// The Taylor block of `∂_i f`, one order lower.
    pub fn partial(&self, i: usize) -> Taylor {
        let n = self.shape.n;
        assert!(self.shape.order >= 1);
        let shape = Shape::new(n, self.shape.order - 1);
        let mut data = vec![0.0; shape.len()];
        data[0] = self.d1(i);
        if shape.order >= 1 {
            for j in 0..n {
                data[1 + j] = self.d2(i, j);
            }
        }
        if shape.order >= 2 {
            for j in 0..n {
                for k in 0..n {
                    data[1 + n + j * n + k] = self.d3(i, j, k);
                }
            }
        }
        Taylor { shape, data }
    }

    /// Drops derivative blocks above `order`.
    pub fn truncate(&self, order: usize) -> Taylor {
        let shape = Shape::new(self.shape.n, order.min(self.shape.order));
        Taylor { shape, data: self.data[..shape.len()].to_vec() }
    }

    fn binary(&self, other: &Taylor, f: impl Fn(&Shape, &[f64], &[f64], &mut [f64])) -> Taylor {
        assert_eq!(self.shape, other.shape);
        let mut data = vec![0.0; self.shape.len()];
        f(&self.shape, &self.data, &other.data, &mut data);
        Taylor { shape: self.shape, data }
    }

    pub fn add(&self, other: &Taylor) -> Taylor {
        self.binary(other, |s, a, b, o| s.add(a, b, o))
    }

    pub fn sub(&self, other: &Taylor) -> Taylor {
        self.binary(other, |s, a, b, o| s.sub(a, b, o))
    }

    pub fn mul(&self, other: &Taylor) -> Taylor {
        self.binary(other, |s, a, b, o| s.mul(a, b, o))
    }

    pub fn scale(&self, c: f64) -> Taylor {
        let mut data = vec![0.0; self.shape.len()];
        self.shape.scale(c, &self.data, &mut data);
        Taylor { shape: self.shape, data }
    }

    pub fn recip(&self) -> Result<Taylor> {
        let mut data = vec![0.0; self.shape.len()];
        self.shape.recip(&self.data, &mut data)?;
        Ok(Taylor { shape: self.shape, data })
    }

    pub fn div(&self, other: &Taylor) -> Result<Taylor> {
        Ok(self.mul(&other.recip()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(shape: Shape, x: &[f64], i: usize) -> Taylor {
        let mut data = vec![0.0; shape.len()];
        shape.variable(x[i], i, &mut data);
        Taylor::from_data(shape, data)
    }

    #[test]
    fn product_of_coordinates() {
        let s = Shape::new(2, 3);
        let x = [1.0, 2.0];
        let p = var(s, &x, 0).mul(&var(s, &x, 1));
        assert_eq!(p.value(), 2.0);
        assert_eq!((p.d1(0), p.d1(1)), (2.0, 1.0));
        assert_eq!((p.d2(0, 1), p.d2(1, 0), p.d2(0, 0)), (1.0, 1.0, 0.0));
        assert!(p.data[7..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn cube_third_derivative() {
        let s = Shape::new(1, 3);
        let x = var(s, &[0.5], 0);
        let c = x.mul(&x).mul(&x);
        assert_eq!(c.data, vec![0.125, 0.75, 3.0, 6.0]);
        let mut p = vec![0.0; 4];
        s.powi(&x.data, 3, &mut p).unwrap();
        assert_eq!(p, c.data);
    }

    #[test]
    fn exp_of_sum_mixed_third() {
        // exp(x + 2y): every derivative is a monomial weight times exp.
        let s = Shape::new(2, 3);
        let pt = [0.1, -0.2];
        let u = var(s, &pt, 0).add(&var(s, &pt, 1).scale(2.0));
        let mut out = vec![0.0; s.len()];
        s.func(Func::Exp, &u.data, &mut out).unwrap();
        let e = (0.1f64 - 0.4).exp();
        let t = Taylor::from_data(s, out);
        assert!((t.d3(0, 1, 1) - 4.0 * e).abs() < 1e-15);
        assert!((t.d3(1, 1, 1) - 8.0 * e).abs() < 1e-15);
        assert!((t.d2(0, 1) - 2.0 * e).abs() < 1e-15);
    }

    #[test]
    fn reciprocal_matches_power() {
        let s = Shape::new(1, 3);
        let x = var(s, &[1.7], 0);
        let mut p = vec![0.0; 4];
        s.powi(&x.data, -1, &mut p).unwrap();
        let r = x.recip().unwrap();
        for (a, b) in p.iter().zip(&r.data) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn singularities_are_reported() {
        let s = Shape::new(1, 1);
        let x = var(s, &[0.0], 0);
        let mut out = vec![0.0; 2];
        assert!(matches!(s.recip(&x.data, &mut out), Err(Error::NonSmoothPoint(_))));
        assert!(matches!(s.func(Func::Sqrt, &x.data, &mut out), Err(Error::NonSmoothPoint(_))));
        assert!(matches!(s.func(Func::Log, &x.data, &mut out), Err(Error::NonSmoothPoint(_))));
        let y = var(s, &[-1.0], 0);
        assert!(matches!(s.func(Func::Log, &y.data, &mut out), Err(Error::Domain(_))));
    }

    #[test]
    fn partial_shifts_blocks() {
        let s = Shape::new(2, 3);
        let pt = [0.3, 0.4];
        let x = var(s, &pt, 0);
        let y = var(s, &pt, 1);
        let f = x.mul(&x).mul(&y);
        let fx = f.partial(0);
        assert!((fx.value() - 2.0 * 0.3 * 0.4).abs() < 1e-15);
        assert!((fx.d1(1) - 0.6).abs() < 1e-15);
        assert!((fx.d2(0, 1) - 2.0).abs() < 1e-15);
    }
}
