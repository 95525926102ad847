//! First- and second-order frames at the chart level, admissible sections of
//! the 2-frame bundle, and their correspondence with symmetry jets.
//!
//! A 1-frame at `x` is the 1-jet at `0 ∈ ℝⁿ` of a map `ℝⁿ → M` sending `0` to
//! `x`; a (1,1)-frame is the first jet of a family of 1-frames. Both are acted
//! on from the right by `GL(n)`, through composition with linear maps of `ℝⁿ`.

use crate::connection::ConnectionField;
use crate::error::{Error, Result};
use crate::jets::{Jet11, JetClass};
use crate::multilinear::{max_abs, max_abs_mat, Bilinear, Matrix, Vector};
use crate::tangent::T2Elem;

/// Tolerance used when classifying jets and frames as holonomic.
pub const FRAME_TOL: f64 = 1e-12;

/// Relative singular-value threshold below which [`solve_m`] reports a singular frame.
const SOLVE_RANK_TOL: f64 = 1e-12;

/// A frame `F: ℝⁿ → T_xM`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame1 {
    pub x: Vector,
    pub f: Matrix,
}

impl Frame1 {
    pub fn new(x: Vector, f: Matrix) -> Result<Self> {
        let n = x.len();
        if f.nrows() != n || f.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: f.nrows() });
        }
        if f.clone().try_inverse().is_none() {
            return Err(Error::SingularFrame);
        }
        Ok(Self { x, f })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// `e·A`, the frame `F A`.
    pub fn act(&self, a: &Matrix) -> Result<Self> {
        Self::new(self.x.clone(), &self.f * a)
    }

    /// The frame `−F`.
    pub fn negate(&self) -> Self {
        Self { x: self.x.clone(), f: -&self.f }
    }
}

/// A (1,1)-frame at `x`: base frame `F`, derivative `G` of the frame family and
/// the bilinear block `H`, acting on `T²ℝⁿ` at the origin by
/// `(0; s1, s2, s12) ↦ (x; F s1, G s2, F s12 + H(s1, s2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame11 {
    pub x: Vector,
    pub f: Matrix,
    pub g: Matrix,
    pub h: Bilinear,
}

impl Frame11 {
    pub fn new(x: Vector, f: Matrix, g: Matrix, h: Bilinear) -> Self {
        Self { x, f, g, h }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The frame as a (1,1)-jet from the origin of `ℝⁿ`.
    pub fn as_jet(&self) -> Jet11 {
        Jet11::new(Vector::zeros(self.dim()), self.x.clone(), self.f.clone(), self.g.clone(), self.h.clone())
    }

    /// Reads a (1,1)-jet from the origin as a frame; fails unless its vertical part is `L1`.
    pub fn from_jet(j: &Jet11) -> Result<Self> {
        let dev = j.vertical_defect().max(max_abs(&j.x));
        if dev > FRAME_TOL * (1.0 + max_abs_mat(&j.l1)) {
            return Err(Error::FiberMismatch { what: "frame from jet", deviation: dev, tol: FRAME_TOL });
        }
        Ok(Self::new(j.y.clone(), j.l1.clone(), j.l2.clone(), j.b.clone()))
    }

    /// `j·A = j ∘ j²₀A`: `(F A, G A, H(A·, A·))`.
    pub fn act(&self, a: &Matrix) -> Self {
        Self::new(self.x.clone(), &self.f * a, &self.g * a, self.h.pre(a, a))
    }

    pub fn is_holonomic(&self, tol: f64) -> bool {
        self.as_jet().classify(tol) == JetClass::Holonomic
    }

    pub fn base(&self) -> Frame1 {
        Frame1 { x: self.x.clone(), f: self.f.clone() }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.as_jet().distance(&other.as_jet())
    }
}

/// A section of the (1,1)-frame bundle over the frame bundle.
pub trait FrameSection {
    fn at(&self, e: &Frame1) -> Result<Frame11>;
}

/// The admissible section of a connection.
pub struct ConnectionSection<'a>(pub &'a ConnectionField);

impl FrameSection for ConnectionSection<'_> {
    fn at(&self, e: &Frame1) -> Result<Frame11> {
        admissible_section(self.0, e)
    }
}

/// The affine 2-jet from flat `ℝⁿ` extending the frame `e`:
/// `(F, F, H)` with `H(u, v) = −Γ_x(F v, F u)`.
pub fn admissible_section(c: &ConnectionField, e: &Frame1) -> Result<Frame11> {
    if e.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: e.dim() });
    }
    let gamma = c.gamma(&e.x)?;
    let h = gamma.transpose().pre(&e.f, &e.f).scale(-1.0);
    Ok(Frame11::new(e.x.clone(), e.f.clone(), e.f.clone(), h))
}

/// The spanning set `(0; e_i, e_j, 0)`, `(0; 0, 0, e_k)` of `T²ℝⁿ` at the origin.
///
/// Inputs with all three slots nonzero would leave a kernel: a shift of `M`
/// by a rank-one map can be absorbed into `B`.
fn spanning_inputs(n: usize) -> Vec<T2Elem> {
    let e = |i: usize| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
    let zero = Vector::zeros(n);
    let mut out = Vec::with_capacity(n * n + n);
    for i in 0..n {
        for j in 0..n {
            out.push(T2Elem::new(zero.clone(), e(i), e(j), zero.clone()));
        }
    }
    for k in 0..n {
        out.push(T2Elem::new(zero.clone(), zero.clone(), zero.clone(), e(k)));
    }
    out
}

/// Number of unknowns `(L1, L2, M, B)` of a homomorphism of `T²ℝⁿ`.
fn unknowns(n: usize) -> usize {
    3 * n * n + n * n * n
}

/// Unpacks the unknown vector into `(L1, L2, M, B)` over `x → y`.
fn unpack(x: &Vector, y: &Vector, z: &Vector) -> Jet11 {
    let n = x.len();
    let nn = n * n;
    let mat = |s: usize| Matrix::from_column_slice(n, n, &z.as_slice()[s..s + nn]);
    let b = Bilinear::from_fn(n, |k, i, j| z[3 * nn + (k * n + i) * n + j]);
    Jet11::homomorphism(x.clone(), y.clone(), mat(0), mat(nn), mat(2 * nn), b)
}

fn stacked(e: &T2Elem) -> Vec<f64> {
    e.s1.iter().chain(e.s2.iter()).chain(e.s12.iter()).copied().collect()
}

/// Outcome of the linear solve behind [`solve_m`].
#[derive(Debug, Clone, PartialEq)]
pub struct MSolve {
    pub jet: Jet11,
    /// Smallest singular value of the action equations; positive iff the solution is unique.
    pub sigma_min: f64,
    /// Largest action residual `|ξ·(j1·e) − j2·e|` of the solution over the spanning set.
    pub residual: f64,
}

/// Solves `ξ·j1 = j2` for the homomorphism `ξ = (L1, L2, M, B)` from the action
/// equations on a spanning set of `T²ℝⁿ` at the origin.
pub fn solve_m_report(j1: &Frame11, j2: &Frame11) -> Result<MSolve> {
    let n = j1.dim();
    if j2.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: j2.dim() });
    }
    let a1 = j1.as_jet();
    let a2 = j2.as_jet();
    let inputs = spanning_inputs(n);
    let images: Vec<T2Elem> = inputs.iter().map(|e| a1.act(e)).collect::<Result<_>>()?;
    let rows = 3 * n * inputs.len();
    let cols = unknowns(n);
    let mut sys = Matrix::zeros(rows, cols);
    for c in 0..cols {
        let mut z = Vector::zeros(cols);
        z[c] = 1.0;
        let xi = unpack(&j1.x, &j2.x, &z);
        let mut r = 0;
        for img in &images {
            for v in stacked(&xi.act(img)?) {
                sys[(r, c)] = v;
                r += 1;
            }
        }
    }
    let rhs = Vector::from_iterator(
        rows,
        inputs.iter().map(|e| a2.act(e).map(|t| stacked(&t))).collect::<Result<Vec<_>>>()?.into_iter().flatten(),
    );
    let singular = sys.clone().singular_values();
    let smax = singular.max();
    let sigma_min = singular.min();
    if !(sigma_min > SOLVE_RANK_TOL * smax.max(1.0)) {
        return Err(Error::SingularFrame);
    }
    // Normal equations with one step of iterative refinement.
    let normal = sys.transpose() * &sys;
    let lu = normal.lu();
    let mut z = lu.solve(&(sys.transpose() * &rhs)).ok_or(Error::SingularFrame)?;
    let correction = lu.solve(&(sys.transpose() * (&rhs - &sys * &z))).ok_or(Error::SingularFrame)?;
    z += correction;
    let residual = max_abs(&(&sys * &z - &rhs));
    Ok(MSolve { jet: unpack(&j1.x, &j2.x, &z), sigma_min, residual })
}

/// The unique `ξ` with `ξ·j1 = j2`.
pub fn solve_m(j1: &Frame11, j2: &Frame11) -> Result<Jet11> {
    Ok(solve_m_report(j1, j2)?.jet)
}

/// `𝔰(x) = m(s(e_x), s(−e_x))` for a frame `e_x` at `x`.
pub fn sjet_from_admissible(section: &dyn FrameSection, e: &Frame1) -> Result<Jet11> {
    solve_m(&section.at(e)?, &section.at(&e.negate())?)
}

/// The 2-frame `s` over `f1` with `𝔰(x)·s = s·(−I)`.
///
/// With `θ = j²₀(f1)` the frame extended with zero second derivative, the
/// conjugate `η = θ⁻¹ 𝔰 θ` is a 2-jet over `−I` at the origin with bilinear
/// block `E`, and `s = θ ∘ (I, I, ½E)`.
pub fn holonomic_solve(sjet: &Jet11, f1: &Frame1) -> Result<Frame11> {
    let n = f1.dim();
    if sjet.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sjet.dim() });
    }
    if sjet.classify(FRAME_TOL * (1.0 + sjet.b.max_abs())) != JetClass::Holonomic {
        return Err(Error::PreconditionFailed("symmetry jet is not holonomic".into()));
    }
    let dev = max_abs(&(&sjet.x - &f1.x)).max(max_abs(&(&sjet.y - &f1.x)));
    if dev > 0.0 {
        return Err(Error::BasePointMismatch(dev));
    }
    let origin = Vector::zeros(n);
    let theta = Jet11::holonomic(origin.clone(), f1.x.clone(), f1.f.clone(), Bilinear::zeros(n));
    let eta = theta.inverse()?.compose(&sjet.compose(&theta)?)?;
    let id = Matrix::identity(n, n);
    let k = Jet11::holonomic(origin.clone(), origin, id, eta.b.scale(0.5));
    Frame11::from_jet(&theta.compose(&k)?)
}

#[cfg(test)]
mod tests;
