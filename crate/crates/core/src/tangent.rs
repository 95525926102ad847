//! Coordinate models of the second and third tangent bundles.
//!
//! A point of T²M over a chart point is stored as `(base; s1, s2, s12)` with
//! `p(e) = (base, s1)` and `p*(e) = (base, s2)`. A point of T³M is stored as
//! `(base; s1, s2, s3; s12, s13, s23; s123)`, slots indexed by the nonempty
//! subsets of {1, 2, 3}, with faces
//! `p = (s1, s2, s12)`, `p* = (s1, s3, s13)`, `p** = (s2, s3, s23)`.
//! All projections are plain reads of these slots.

use crate::error::{Error, Result};
use crate::multilinear::{max_abs, Matrix, Vector};

/// Default componentwise tolerance for fiber comparisons.
pub const FIBER_TOL: f64 = 1e-12;

pub(crate) fn check_close(what: &'static str, a: &Vector, b: &Vector, tol: f64) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let deviation = max_abs(&(a - b));
    if deviation > tol || deviation.is_nan() {
        return Err(Error::FiberMismatch {
            what,
            deviation,
            tol,
        });
    }
    Ok(())
}

/// A tangent vector `v` at a chart point `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Vector,
    pub v: Vector,
}

impl TangentVector {
    pub fn new(base: Vector, v: Vector) -> Self {
        assert_eq!(base.len(), v.len(), "tangent vector dimension mismatch");
        Self { base, v }
    }
}

/// Which vector bundle structure of T²M over TM is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2Structure {
    /// `p`: fixes `s1`, linear in `(s2, s12)`.
    P,
    /// `p*`: fixes `s2`, linear in `(s1, s12)`.
    PStar,
}

/// An element of the second tangent bundle T²M.
#[derive(Debug, Clone, PartialEq)]
pub struct T2Elem {
    pub base: Vector,
    pub s1: Vector,
    pub s2: Vector,
    pub s12: Vector,
}

impl T2Elem {
    /// Panics if the four components do not share one dimension.
    pub fn new(base: Vector, s1: Vector, s2: Vector, s12: Vector) -> Self {
        Self::try_new(base, s1, s2, s12).expect("T2Elem components must share one dimension")
    }

    pub fn try_new(base: Vector, s1: Vector, s2: Vector, s12: Vector) -> Result<Self> {
        let n = base.len();
        for len in [s1.len(), s2.len(), s12.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        Ok(Self { base, s1, s2, s12 })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn p(&self) -> TangentVector {
        TangentVector::new(self.base.clone(), self.s1.clone())
    }

    pub fn p_star(&self) -> TangentVector {
        TangentVector::new(self.base.clone(), self.s2.clone())
    }

    /// The canonical involution: swaps the two middle slots.
    pub fn kappa(&self) -> Self {
        Self::new(self.base.clone(), self.s2.clone(), self.s1.clone(), self.s12.clone())
    }

    /// Zero of the `p`-structure in the fiber through `self`.
    pub fn zero_p(&self) -> Self {
        let z = Vector::zeros(self.dim());
        Self::new(self.base.clone(), self.s1.clone(), z.clone(), z)
    }

    /// Zero of the `p*`-structure in the fiber through `self`.
    pub fn zero_p_star(&self) -> Self {
        let z = Vector::zeros(self.dim());
        Self::new(self.base.clone(), z.clone(), self.s2.clone(), z)
    }

    pub fn scale(&self, structure: T2Structure, a: f64) -> Self {
        match structure {
            T2Structure::P => Self::new(self.base.clone(), self.s1.clone(), &self.s2 * a, &self.s12 * a),
            T2Structure::PStar => Self::new(self.base.clone(), &self.s1 * a, self.s2.clone(), &self.s12 * a),
        }
    }

    /// Largest componentwise deviation from `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        [
            max_abs(&(&self.base - &other.base)),
            max_abs(&(&self.s1 - &other.s1)),
            max_abs(&(&self.s2 - &other.s2)),
            max_abs(&(&self.s12 - &other.s12)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Fiberwise linear combination `a·e1 + b·e2` for the chosen structure.
pub fn t2_combine(structure: T2Structure, a: f64, e1: &T2Elem, b: f64, e2: &T2Elem) -> Result<T2Elem> {
    t2_combine_tol(structure, a, e1, b, e2, FIBER_TOL)
}

pub fn t2_combine_tol(
    structure: T2Structure,
    a: f64,
    e1: &T2Elem,
    b: f64,
    e2: &T2Elem,
    tol: f64,
) -> Result<T2Elem> {
    check_close("T2 base", &e1.base, &e2.base, tol)?;
    let s12 = &e1.s12 * a + &e2.s12 * b;
    match structure {
        T2Structure::P => {
            check_close("T2 p-fiber", &e1.s1, &e2.s1, tol)?;
            Ok(T2Elem::new(e1.base.clone(), e1.s1.clone(), &e1.s2 * a + &e2.s2 * b, s12))
        }
        T2Structure::PStar => {
            check_close("T2 p*-fiber", &e1.s2, &e2.s2, tol)?;
            Ok(T2Elem::new(e1.base.clone(), &e1.s1 * a + &e2.s1 * b, e1.s2.clone(), s12))
        }
    }
}

/// The affine difference on a fiber of `p × p*`: returns `e1.s12 − e2.s12`.
pub fn t2_pi(e1: &T2Elem, e2: &T2Elem) -> Result<Vector> {
    t2_pi_tol(e1, e2, FIBER_TOL)
}

pub fn t2_pi_tol(e1: &T2Elem, e2: &T2Elem, tol: f64) -> Result<Vector> {
    check_close("pi base", &e1.base, &e2.base, tol)?;
    check_close("pi p-face", &e1.s1, &e2.s1, tol)?;
    check_close("pi p*-face", &e1.s2, &e2.s2, tol)?;
    Ok(&e1.s12 - &e2.s12)
}

/// `A_e(V)`: the element of the `p × p*` fiber of `e` at affine offset `V`.
pub fn t2_affine_offset(e: &T2Elem, v: &Vector) -> T2Elem {
    T2Elem::new(e.base.clone(), e.s1.clone(), e.s2.clone(), &e.s12 + v)
}

/// `i(X) = (x, X, 0, 0)`.
pub fn t2_i(x: &Vector, v: &Vector) -> T2Elem {
    let z = Vector::zeros(x.len());
    T2Elem::new(x.clone(), v.clone(), z.clone(), z)
}

/// `i*(X) = (x, 0, X, 0)`.
pub fn t2_i_star(x: &Vector, v: &Vector) -> T2Elem {
    let z = Vector::zeros(x.len());
    T2Elem::new(x.clone(), z.clone(), v.clone(), z)
}

/// The vertical inclusion `i^p_0(V) = (x, 0, 0, V)`.
pub fn t2_vertical(x: &Vector, v: &Vector) -> T2Elem {
    let z = Vector::zeros(x.len());
    T2Elem::new(x.clone(), z.clone(), z, v.clone())
}

/// `I_p(X1, X2) = (x, 0, X1, X2)`.
pub fn t2_big_i_p(x: &Vector, x1: &Vector, x2: &Vector) -> T2Elem {
    T2Elem::new(x.clone(), Vector::zeros(x.len()), x1.clone(), x2.clone())
}

/// `I_{p*}(X1, X2) = (x, X1, 0, X2)`.
pub fn t2_big_i_p_star(x: &Vector, x1: &Vector, x2: &Vector) -> T2Elem {
    T2Elem::new(x.clone(), x1.clone(), Vector::zeros(x.len()), x2.clone())
}

/// A vector field that can report its value and Jacobian at a point.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn value_and_jacobian(&self, x: &Vector) -> Result<(Vector, Matrix)>;
}

/// `Y_*X` at `x`: the derivative of the section `Y` along `X`, `(x, Y, X, DY·X)`.
pub fn pushforward(y: &dyn VectorField, x: &Vector, dir: &Vector) -> Result<T2Elem> {
    let (val, jac) = y.value_and_jacobian(x)?;
    Ok(T2Elem::new(x.clone(), val, dir.clone(), jac * dir))
}

/// The Lie bracket as the affine difference `π(Y_*X, κ(X_*Y))`.
pub fn bracket_via_kappa(xf: &dyn VectorField, yf: &dyn VectorField, x: &Vector) -> Result<Vector> {
    let (xv, _) = xf.value_and_jacobian(x)?;
    let (yv, _) = yf.value_and_jacobian(x)?;
    let a = pushforward(yf, x, &xv)?;
    let b = pushforward(xf, x, &yv)?.kappa();
    t2_pi(&a, &b)
}

/// Which vector bundle structure of T³M over T²M is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T3Structure {
    /// `p`: fixes slots {1, 2, 12}.
    P,
    /// `p*`: fixes slots {1, 3, 13}.
    PStar,
    /// `p**`: fixes slots {2, 3, 23}.
    PStarStar,
}

/// Slot labels of T³M, one per nonempty subset of {1, 2, 3}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    S1,
    S2,
    S3,
    S12,
    S13,
    S23,
    S123,
}

impl Slot {
    pub const ALL: [Slot; 7] = [Slot::S1, Slot::S2, Slot::S3, Slot::S12, Slot::S13, Slot::S23, Slot::S123];

    fn mask(self) -> u8 {
        match self {
            Slot::S1 => 0b001,
            Slot::S2 => 0b010,
            Slot::S3 => 0b100,
            Slot::S12 => 0b011,
            Slot::S13 => 0b101,
            Slot::S23 => 0b110,
            Slot::S123 => 0b111,
        }
    }

    fn from_mask(m: u8) -> Slot {
        match m {
            0b001 => Slot::S1,
            0b010 => Slot::S2,
            0b100 => Slot::S3,
            0b011 => Slot::S12,
            0b101 => Slot::S13,
            0b110 => Slot::S23,
            0b111 => Slot::S123,
            _ => unreachable!("empty slot mask"),
        }
    }

    /// Image of the slot under a transposition of the labels {1, 2, 3}.
    pub fn permuted(self, which: Involution) -> Slot {
        let (a, b) = which.transposition();
        let m = self.mask();
        let bit = |i: usize| (m >> (i - 1)) & 1;
        let mut out = m & !(1 << (a - 1)) & !(1 << (b - 1));
        out |= bit(a) << (b - 1);
        out |= bit(b) << (a - 1);
        Slot::from_mask(out)
    }
}

impl T3Structure {
    pub fn fixed_slots(self) -> [Slot; 3] {
        match self {
            T3Structure::P => [Slot::S1, Slot::S2, Slot::S12],
            T3Structure::PStar => [Slot::S1, Slot::S3, Slot::S13],
            T3Structure::PStarStar => [Slot::S2, Slot::S3, Slot::S23],
        }
    }
}

/// The three canonical involutions of T³M.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Involution {
    /// Transposition (2 3).
    Kappa,
    /// Transposition (1 2).
    KappaStar,
    /// Transposition (1 3).
    KappaPrime,
}

impl Involution {
    pub fn transposition(self) -> (usize, usize) {
        match self {
            Involution::Kappa => (2, 3),
            Involution::KappaStar => (1, 2),
            Involution::KappaPrime => (1, 3),
        }
    }

    /// The label permutation as a map on {0, 1, 2}.
    pub fn index_map(self) -> [usize; 3] {
        let (a, b) = self.transposition();
        let mut s = [0, 1, 2];
        s.swap(a - 1, b - 1);
        s
    }
}

/// An element of the third tangent bundle T³M.
#[derive(Debug, Clone, PartialEq)]
pub struct T3Elem {
    pub base: Vector,
    pub s1: Vector,
    pub s2: Vector,
    pub s3: Vector,
    pub s12: Vector,
    pub s13: Vector,
    pub s23: Vector,
    pub s123: Vector,
}

impl T3Elem {
    /// Slots are given in the order `s1, s2, s3, s12, s13, s23, s123`.
    pub fn new(base: Vector, slots: [Vector; 7]) -> Self {
        let n = base.len();
        assert!(n > 0, "T3Elem needs positive dimension");
        assert!(slots.iter().all(|s| s.len() == n), "T3Elem slots must share one dimension");
        let [s1, s2, s3, s12, s13, s23, s123] = slots;
        Self {
            base,
            s1,
            s2,
            s3,
            s12,
            s13,
            s23,
            s123,
        }
    }

    pub fn zero(base: Vector) -> Self {
        let z = Vector::zeros(base.len());
        Self::new(base, std::array::from_fn(|_| z.clone()))
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn slot(&self, s: Slot) -> &Vector {
        match s {
            Slot::S1 => &self.s1,
            Slot::S2 => &self.s2,
            Slot::S3 => &self.s3,
            Slot::S12 => &self.s12,
            Slot::S13 => &self.s13,
            Slot::S23 => &self.s23,
            Slot::S123 => &self.s123,
        }
    }

    pub fn slot_mut(&mut self, s: Slot) -> &mut Vector {
        match s {
            Slot::S1 => &mut self.s1,
            Slot::S2 => &mut self.s2,
            Slot::S3 => &mut self.s3,
            Slot::S12 => &mut self.s12,
            Slot::S13 => &mut self.s13,
            Slot::S23 => &mut self.s23,
            Slot::S123 => &mut self.s123,
        }
    }

    pub fn slots(&self) -> [Vector; 7] {
        Slot::ALL.map(|s| self.slot(s).clone())
    }

    pub fn p(&self) -> T2Elem {
        T2Elem::new(self.base.clone(), self.s1.clone(), self.s2.clone(), self.s12.clone())
    }

    pub fn p_star(&self) -> T2Elem {
        T2Elem::new(self.base.clone(), self.s1.clone(), self.s3.clone(), self.s13.clone())
    }

    pub fn p_star_star(&self) -> T2Elem {
        T2Elem::new(self.base.clone(), self.s2.clone(), self.s3.clone(), self.s23.clone())
    }

    pub fn face(&self, structure: T3Structure) -> T2Elem {
        match structure {
            T3Structure::P => self.p(),
            T3Structure::PStar => self.p_star(),
            T3Structure::PStarStar => self.p_star_star(),
        }
    }

    fn keep(&self, keep: &[Slot]) -> Self {
        let mut out = Self::zero(self.base.clone());
        for s in keep {
            *out.slot_mut(*s) = self.slot(*s).clone();
        }
        out
    }

    /// Zero of the given structure in the fiber through `self` (`e`, `e*`, `e**`).
    pub fn zero_of(&self, structure: T3Structure) -> Self {
        self.keep(&structure.fixed_slots())
    }

    /// `E_i`: keeps only the slot `s_i`, `i ∈ {1, 2, 3}`.
    pub fn big_e(&self, i: usize) -> Self {
        match i {
            1 => self.keep(&[Slot::S1]),
            2 => self.keep(&[Slot::S2]),
            3 => self.keep(&[Slot::S3]),
            _ => panic!("E_i is defined for i in 1..=3"),
        }
    }

    /// Relabels slots by the transposition of the involution.
    pub fn involution(&self, which: Involution) -> Self {
        let mut out = Self::zero(self.base.clone());
        for s in Slot::ALL {
            *out.slot_mut(s.permuted(which)) = self.slot(s).clone();
        }
        out
    }

    pub fn distance(&self, other: &Self) -> f64 {
        let mut d = max_abs(&(&self.base - &other.base));
        for s in Slot::ALL {
            d = d.max(max_abs(&(self.slot(s) - other.slot(s))));
        }
        d
    }
}

/// Fiberwise linear combination `a·E1 + b·E2` for the chosen structure.
pub fn t3_combine(structure: T3Structure, a: f64, e1: &T3Elem, b: f64, e2: &T3Elem) -> Result<T3Elem> {
    t3_combine_tol(structure, a, e1, b, e2, FIBER_TOL)
}

pub fn t3_combine_tol(
    structure: T3Structure,
    a: f64,
    e1: &T3Elem,
    b: f64,
    e2: &T3Elem,
    tol: f64,
) -> Result<T3Elem> {
    check_close("T3 base", &e1.base, &e2.base, tol)?;
    let fixed = structure.fixed_slots();
    for s in fixed {
        check_close("T3 fixed slot", e1.slot(s), e2.slot(s), tol)?;
    }
    let mut out = T3Elem::zero(e1.base.clone());
    for s in Slot::ALL {
        *out.slot_mut(s) = if fixed.contains(&s) {
            e1.slot(s).clone()
        } else {
            e1.slot(s) * a + e2.slot(s) * b
        };
    }
    Ok(out)
}

/// Sum in the given structure.
pub fn t3_add(structure: T3Structure, e1: &T3Elem, e2: &T3Elem) -> Result<T3Elem> {
    t3_combine(structure, 1.0, e1, 1.0, e2)
}

/// The affine difference on a fiber of `𝒫 = p × p* × p**`: `E1.s123 − E2.s123`.
pub fn t3_pi(e1: &T3Elem, e2: &T3Elem) -> Result<Vector> {
    t3_pi_tol(e1, e2, FIBER_TOL)
}

pub fn t3_pi_tol(e1: &T3Elem, e2: &T3Elem, tol: f64) -> Result<Vector> {
    check_close("Pi base", &e1.base, &e2.base, tol)?;
    for s in &Slot::ALL[..6] {
        check_close("Pi fiber", e1.slot(*s), e2.slot(*s), tol)?;
    }
    Ok(&e1.s123 - &e2.s123)
}

/// Single-argument form `Π(E) = Π(E, e(E))`.
pub fn t3_pi_single(e: &T3Elem) -> Result<Vector> {
    t3_pi(e, &e.zero_of(T3Structure::P))
}

/// `A_𝒫^E(V)`: the point of the `𝒫`-fiber of `E` at offset `V`.
pub fn t3_affine_offset(e: &T3Elem, v: &Vector) -> T3Elem {
    let mut out = e.clone();
    out.s123 += v;
    out
}

/// Partial difference `Π_i` on the fibers of `𝒫_1 = p×p*`, `𝒫_2 = p*×p**`, `𝒫_3 = p**×p`.
///
/// `Π_2(E1, E2) = (base, ΔS12, s3, ΔS123)`; `Π_3 = Π_2 ∘ (κ × κ)` and
/// `Π_1 = κ ∘ Π_2 ∘ (κ′ × κ′)`.
pub fn t3_pi_partial(i: usize, e1: &T3Elem, e2: &T3Elem) -> Result<T2Elem> {
    match i {
        1 => Ok(pi2(&e1.involution(Involution::KappaPrime), &e2.involution(Involution::KappaPrime))?.kappa()),
        2 => pi2(e1, e2),
        3 => pi2(&e1.involution(Involution::Kappa), &e2.involution(Involution::Kappa)),
        _ => Err(Error::PreconditionFailed(format!("partial difference index {i} not in 1..=3"))),
    }
}

fn pi2(e1: &T3Elem, e2: &T3Elem) -> Result<T2Elem> {
    check_close("Pi_2 base", &e1.base, &e2.base, FIBER_TOL)?;
    for s in [Slot::S1, Slot::S2, Slot::S3, Slot::S13, Slot::S23] {
        check_close("Pi_2 fiber", e1.slot(s), e2.slot(s), FIBER_TOL)?;
    }
    Ok(T2Elem::new(
        e1.base.clone(),
        &e1.s12 - &e2.s12,
        e1.s3.clone(),
        &e1.s123 - &e2.s123,
    ))
}

/// `A_{𝒫_i}^E(𝒰)`: inverse of `Π_i` in its first argument.
pub fn t3_affine_offset_partial(i: usize, e: &T3Elem, u: &T2Elem) -> Result<T3Elem> {
    match i {
        1 => {
            let k = Involution::KappaPrime;
            Ok(offset2(&e.involution(k), &u.kappa())?.involution(k))
        }
        2 => offset2(e, u),
        3 => {
            let k = Involution::Kappa;
            Ok(offset2(&e.involution(k), u)?.involution(k))
        }
        _ => Err(Error::PreconditionFailed(format!("partial offset index {i} not in 1..=3"))),
    }
}

// E +* (e*(E) +** (i^p_0)_*(𝒰))
fn offset2(e: &T3Elem, u: &T2Elem) -> Result<T3Elem> {
    let inner = t3_add(T3Structure::PStarStar, &e.zero_of(T3Structure::PStar), &t3_vertical_pushforward(u))?;
    t3_add(T3Structure::PStar, e, &inner)
}

/// `I(V)`: the vertical copy of TM, nonzero only in `s123`.
pub fn t3_big_i(x: &Vector, v: &Vector) -> T3Elem {
    let mut out = T3Elem::zero(x.clone());
    out.s123 = v.clone();
    out
}

/// `i^p_{0_TM}(𝒱) = (𝒱.s1, 0, 0; 0, 0, 𝒱.s2; 𝒱.s12)`.
pub fn t3_vertical_p(u: &T2Elem) -> T3Elem {
    let mut out = T3Elem::zero(u.base.clone());
    out.s1 = u.s1.clone();
    out.s23 = u.s2.clone();
    out.s123 = u.s12.clone();
    out
}

/// `(i^p_{0_M})_*(𝒰) = (0, 0, 𝒰.s2; 𝒰.s1, 0, 0; 𝒰.s12)`.
pub fn t3_vertical_pushforward(u: &T2Elem) -> T3Elem {
    let mut out = T3Elem::zero(u.base.clone());
    out.s3 = u.s2.clone();
    out.s12 = u.s1.clone();
    out.s123 = u.s12.clone();
    out
}

/// `i^{p*}_{0*_TM}(𝒱) = (0, 𝒱.s2, 0; 0, 𝒱.s1, 0; 𝒱.s12)`.
pub fn t3_vertical_p_star(u: &T2Elem) -> T3Elem {
    let mut out = T3Elem::zero(u.base.clone());
    out.s2 = u.s2.clone();
    out.s13 = u.s1.clone();
    out.s123 = u.s12.clone();
    out
}

/// `i(𝒲)`: the element with `p`-face `𝒲` and all other slots zero.
pub fn t3_i(w: &T2Elem) -> T3Elem {
    let mut out = T3Elem::zero(w.base.clone());
    out.s1 = w.s1.clone();
    out.s2 = w.s2.clone();
    out.s12 = w.s12.clone();
    out
}

/// `i_*(𝒲)`: the element with `p*`-face `𝒲` and all other slots zero.
pub fn t3_i_star(w: &T2Elem) -> T3Elem {
    let mut out = T3Elem::zero(w.base.clone());
    out.s1 = w.s1.clone();
    out.s3 = w.s2.clone();
    out.s13 = w.s12.clone();
    out
}

/// `i_**(𝒲)`: the element with `p**`-face `𝒲` and all other slots zero.
pub fn t3_i_star_star(w: &T2Elem) -> T3Elem {
    let mut out = T3Elem::zero(w.base.clone());
    out.s2 = w.s1.clone();
    out.s3 = w.s2.clone();
    out.s23 = w.s12.clone();
    out
}

/// The six inclusions of `T²M ⊕ T²M` into the kernels of the projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairInclusion {
    /// `𝓘_p(𝒴, 𝒱) = i_*(𝒴) + i^p_{0_TM}(𝒱)`.
    P,
    /// `𝓘*_p(𝒳, 𝒱) = i_**(𝒳) + i^{p*}_{0*_TM}(𝒱)`.
    PDual,
    /// `𝓘_{p*}(𝒵, 𝒱) = i(𝒵) +_* i^p_{0_TM}(𝒱)`.
    PStar,
    /// `𝓘*_{p*}(𝒳, 𝒱) = i_**(𝒳) +_* (i^p_{0_M})_*(𝒱)`.
    PStarDual,
    /// `𝓘_{p**}(𝒵, 𝒱) = i(𝒵) +_** i^{p*}_{0*_TM}(𝒱)`.
    PStarStar,
    /// `𝓘*_{p**}(𝒴, 𝒱) = i_*(𝒴) +_** (i^p_{0_M})_*(𝒱)`.
    PStarStarDual,
}

pub fn t3_pair_inclusion(kind: PairInclusion, a: &T2Elem, v: &T2Elem) -> Result<T3Elem> {
    use T3Structure::*;
    match kind {
        PairInclusion::P => t3_add(P, &t3_i_star(a), &t3_vertical_p(v)),
        PairInclusion::PDual => t3_add(P, &t3_i_star_star(a), &t3_vertical_p_star(v)),
        PairInclusion::PStar => t3_add(PStar, &t3_i(a), &t3_vertical_p(v)),
        PairInclusion::PStarDual => t3_add(PStar, &t3_i_star_star(a), &t3_vertical_pushforward(v)),
        PairInclusion::PStarStar => t3_add(PStarStar, &t3_i(a), &t3_vertical_p_star(v)),
        PairInclusion::PStarStarDual => t3_add(PStarStar, &t3_i_star(a), &t3_vertical_pushforward(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    fn sample_t3() -> T3Elem {
        T3Elem::new(
            v(&[0.1, 0.2]),
            [
                v(&[1.0, 2.0]),
                v(&[3.0, 4.0]),
                v(&[5.0, 6.0]),
                v(&[7.0, 8.0]),
                v(&[9.0, 10.0]),
                v(&[11.0, 12.0]),
                v(&[13.0, 14.0]),
            ],
        )
    }

    #[test]
    fn p_star_scaling_by_minus_one() {
        let e = T2Elem::new(v(&[0.0]), v(&[1.0]), v(&[2.0]), v(&[3.0]));
        let out = t2_combine(T2Structure::PStar, -1.0, &e, 0.0, &e).unwrap();
        assert_eq!(out, T2Elem::new(v(&[0.0]), v(&[-1.0]), v(&[2.0]), v(&[-3.0])));
    }

    #[test]
    fn thick_minus_negates_both_directions() {
        let e = T2Elem::new(v(&[0.0]), v(&[1.0]), v(&[2.0]), v(&[3.0]));
        let out = e.scale(T2Structure::PStar, -1.0).scale(T2Structure::P, -1.0);
        assert_eq!(out, T2Elem::new(v(&[0.0]), v(&[-1.0]), v(&[-2.0]), v(&[3.0])));
    }

    #[test]
    fn combine_rejects_fiber_mismatch() {
        let a = T2Elem::new(v(&[0.0]), v(&[1.0]), v(&[2.0]), v(&[3.0]));
        let b = T2Elem::new(v(&[0.0]), v(&[1.5]), v(&[2.0]), v(&[3.0]));
        assert!(matches!(
            t2_combine(T2Structure::P, 1.0, &a, 1.0, &b),
            Err(Error::FiberMismatch { .. })
        ));
        assert!(t2_combine(T2Structure::PStar, 1.0, &a, 1.0, &b).is_ok());
    }

    #[test]
    fn kappa_swaps_middle_slots_and_fixes_vertical() {
        let e = T2Elem::new(v(&[0.0]), v(&[1.0]), v(&[2.0]), v(&[3.0]));
        assert_eq!(e.kappa(), T2Elem::new(v(&[0.0]), v(&[2.0]), v(&[1.0]), v(&[3.0])));
        let vert = t2_vertical(&v(&[0.5]), &v(&[4.0]));
        assert_eq!(vert.kappa(), vert);
    }

    #[test]
    fn big_i_p_star_is_sum_of_inclusions() {
        let x = v(&[0.3, -0.2]);
        let x1 = v(&[1.0, 2.0]);
        let x2 = v(&[-0.5, 0.25]);
        let lhs = t2_big_i_p_star(&x, &x1, &x2);
        let rhs = t2_combine(T2Structure::PStar, 1.0, &t2_i(&x, &x1), 1.0, &t2_vertical(&x, &x2)).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn kappa_on_t3_is_transposition_of_labels_two_and_three() {
        let e = sample_t3();
        let k = e.involution(Involution::Kappa);
        assert_eq!(k.s1, e.s1);
        assert_eq!(k.s2, e.s3);
        assert_eq!(k.s3, e.s2);
        assert_eq!(k.s12, e.s13);
        assert_eq!(k.s13, e.s12);
        assert_eq!(k.s23, e.s23);
        assert_eq!(k.s123, e.s123);
    }

    #[test]
    fn kappa_prime_is_conjugate_of_kappa() {
        let e = sample_t3();
        let lhs = e.involution(Involution::KappaPrime);
        let rhs = e
            .involution(Involution::KappaStar)
            .involution(Involution::Kappa)
            .involution(Involution::KappaStar);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn partial_difference_two_reads_slots() {
        let e2 = sample_t3();
        let mut e1 = e2.clone();
        e1.s12 += v(&[0.5, -0.5]);
        e1.s123 += v(&[2.0, 1.0]);
        let u = t3_pi_partial(2, &e1, &e2).unwrap();
        assert_eq!(u, T2Elem::new(e2.base.clone(), v(&[0.5, -0.5]), e2.s3.clone(), v(&[2.0, 1.0])));
        let back = t3_affine_offset_partial(2, &e2, &u).unwrap();
        assert!(back.distance(&e1) < 1e-14);
    }

    #[test]
    fn vertical_pushforward_slot_pattern() {
        let u = T2Elem::new(v(&[0.0]), v(&[1.0]), v(&[2.0]), v(&[3.0]));
        let e = t3_vertical_pushforward(&u);
        assert_eq!(e.slots(), [v(&[0.0]), v(&[0.0]), v(&[2.0]), v(&[1.0]), v(&[0.0]), v(&[0.0]), v(&[3.0])]);
    }

    #[test]
    fn pair_inclusion_kernel_patterns() {
        let x = v(&[0.0]);
        let y = T2Elem::new(x.clone(), v(&[1.0]), v(&[2.0]), v(&[3.0]));
        let w = T2Elem::new(x.clone(), v(&[1.0]), v(&[4.0]), v(&[5.0]));
        let e = t3_pair_inclusion(PairInclusion::P, &y, &w).unwrap();
        // p(e) is the zero over p(y) so e lies in the kernel of p over 0_TM.
        assert_eq!(e.p(), T2Elem::new(x.clone(), v(&[1.0]), v(&[0.0]), v(&[0.0])));
        assert_eq!(e.p_star(), y);
        assert_eq!(e.s23, v(&[4.0]));
        assert_eq!(e.s123, v(&[5.0]));
    }
}
