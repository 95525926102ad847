//! Central finite differences for the first two derivatives of a map between charts.

use crate::error::{Error, Result};
use crate::multilinear::{Bilinear, Matrix, Vector};

/// Default finite-difference step.
pub const DEFAULT_H: f64 = 1e-3;

/// First and second derivative blocks of a map `ℝⁿ → ℝᵐ` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FdJet {
    pub value: Vector,
    /// `d1[(k, i)] = ∂_i f^k`.
    pub d1: Matrix,
    /// `d2[k][(i, j)] = ∂_i∂_j f^k`, present for order 2.
    pub d2: Option<Vec<Matrix>>,
}

impl FdJet {
    /// The second derivative as a bilinear map, for maps between charts of equal dimension.
    pub fn d2_bilinear(&self) -> Option<Bilinear> {
        let d2 = self.d2.as_ref()?;
        let n = self.d1.ncols();
        if d2.len() != n {
            return None;
        }
        Some(Bilinear::from_fn(n, |k, i, j| d2[k][(i, j)]))
    }
}

fn eval(f: &dyn Fn(&Vector) -> Result<Vector>, x: &Vector) -> Result<Vector> {
    f(x).map_err(|e| match e {
        Error::Domain(_) | Error::LeftDomain { .. } | Error::StencilOutOfDomain => Error::StencilOutOfDomain,
        other => other,
    })
}

fn plain(f: &dyn Fn(&Vector) -> Result<Vector>, x: &Vector, order: usize, h: f64) -> Result<FdJet> {
    let n = x.len();
    let f0 = eval(f, x)?;
    let m = f0.len();
    let e = |i: usize| Vector::from_fn(n, |r, _| if r == i { h } else { 0.0 });
    let mut d1 = Matrix::zeros(m, n);
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let fp = eval(f, &(x + e(i)))?;
        let fm = eval(f, &(x - e(i)))?;
        d1.set_column(i, &((&fp - &fm) / (2.0 * h)));
        plus.push(fp);
        minus.push(fm);
    }
    let d2 = if order >= 2 {
        let mut d2 = vec![Matrix::zeros(n, n); m];
        for i in 0..n {
            let diag = (&plus[i] - 2.0 * &f0 + &minus[i]) / (h * h);
            for k in 0..m {
                d2[k][(i, i)] = diag[k];
            }
            for j in (i + 1)..n {
                let fpp = eval(f, &(x + e(i) + e(j)))?;
                let fpm = eval(f, &(x + e(i) - e(j)))?;
                let fmp = eval(f, &(x - e(i) + e(j)))?;
                let fmm = eval(f, &(x - e(i) - e(j)))?;
                let off = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                for k in 0..m {
                    d2[k][(i, j)] = off[k];
                    d2[k][(j, i)] = off[k];
                }
            }
        }
        Some(d2)
    } else {
        None
    };
    Ok(FdJet { value: f0, d1, d2 })
}

/// Central-difference derivatives of `f` at `x` up to `order` (1 or 2) with step `h`.
///
/// The error is `O(h²)`; with `richardson` the steps `h` and `h/2` are combined
/// to cancel the leading term, giving `O(h⁴)`.
pub fn fd_jet_oracle(
    f: &dyn Fn(&Vector) -> Result<Vector>,
    x: &Vector,
    order: usize,
    h: f64,
    richardson: bool,
) -> Result<FdJet> {
    if !(h > 0.0) || !(1..=2).contains(&order) {
        return Err(Error::PreconditionFailed(format!("invalid finite-difference request: order {order}, h {h}")));
    }
    let coarse = plain(f, x, order, h)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = plain(f, x, order, h / 2.0)?;
    let extrap = |a: &Matrix, b: &Matrix| (b * 4.0 - a) / 3.0;
    Ok(FdJet {
        value: fine.value.clone(),
        d1: extrap(&coarse.d1, &fine.d1),
        d2: match (coarse.d2, fine.d2) {
            (Some(c), Some(f)) => Some(c.iter().zip(&f).map(|(a, b)| extrap(a, b)).collect()),
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_is_exact() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let f = |x: &Vector| -> Result<Vector> { Ok(&a * x) };
        let j = fd_jet_oracle(&f, &Vector::zeros(2), 2, 1e-3, false).unwrap();
        assert!((j.d1 - &a).amax() < 1e-10);
        assert!(j.d2.unwrap().iter().all(|m| m.amax() < 1e-10));
    }

    #[test]
    fn quadratic_in_one_dimension() {
        let f = |x: &Vector| -> Result<Vector> { Ok(Vector::from_element(1, x[0] + x[0] * x[0])) };
        let j = fd_jet_oracle(&f, &Vector::from_element(1, 0.0), 2, 1e-3, false).unwrap();
        assert!((j.d2_bilinear().unwrap().get(0, 0, 0) - 2.0).abs() < 1e-6);
        assert!((j.d1[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_improves_order() {
        let f = |x: &Vector| -> Result<Vector> { Ok(Vector::from_element(1, (x[0] * 2.0).sin() * x[1].exp())) };
        let x = Vector::from_vec(vec![0.4, 0.2]);
        let exact = -4.0 * 0.8f64.sin() * 0.2f64.exp();
        let p = fd_jet_oracle(&f, &x, 2, 1e-2, false).unwrap().d2.unwrap()[0][(0, 0)];
        let r = fd_jet_oracle(&f, &x, 2, 1e-2, true).unwrap().d2.unwrap()[0][(0, 0)];
        assert!((r - exact).abs() < (p - exact).abs() / 10.0);
    }

    #[test]
    fn domain_errors_become_stencil_errors() {
        let f = |x: &Vector| -> Result<Vector> {
            if x[0] > 0.0 {
                Err(Error::Domain("outside".into()))
            } else {
                Ok(x.clone())
            }
        };
        assert_eq!(
            fd_jet_oracle(&f, &Vector::from_element(1, 0.0), 1, 1e-3, false),
            Err(Error::StencilOutOfDomain)
        );
    }
}
