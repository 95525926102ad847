//! The groupoids of 1-jets, (1,1)-jets and (1,1,1)-jets of local diffeomorphisms
//! of a chart, realized as homomorphisms of the tangent towers.
//!
//! Bilinear blocks follow the convention `B(v, d)`: `v` is the vector in the
//! `p`-slot, `d` the direction along which the family of 1-jets is differentiated.

use crate::error::{Error, Result};
use crate::multilinear::{max_abs, max_abs_mat, Bilinear, Matrix, Trilinear, Vector};
use crate::tangent::{check_close, Involution, T2Elem, T2Structure, T3Elem, TangentVector, FIBER_TOL};

/// Default tolerance for face comparisons of algebraically produced jets.
pub const JET_TOL: f64 = 1e-12;

fn invert(m: &Matrix) -> Result<Matrix> {
    let scale = max_abs_mat(m).max(1.0);
    let det = m.determinant();
    if !(det.abs() > 1e-12 * scale.powi(m.nrows() as i32)) {
        return Err(Error::SingularJet);
    }
    m.clone().try_inverse().ok_or(Error::SingularJet)
}

fn check_chain(y1: &Vector, x2: &Vector) -> Result<()> {
    let d = max_abs(&(y1 - x2));
    if d > FIBER_TOL {
        return Err(Error::ChainMismatch(d));
    }
    Ok(())
}

fn check_base(x: &Vector, base: &Vector) -> Result<()> {
    let d = max_abs(&(x - base));
    if d > FIBER_TOL {
        return Err(Error::BasePointMismatch(d));
    }
    Ok(())
}

/// A 1-jet `ξ: T_xM → T_yM`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub x: Vector,
    pub y: Vector,
    pub l: Matrix,
}

impl Jet1 {
    pub fn new(x: Vector, y: Vector, l: Matrix) -> Self {
        assert!(l.nrows() == x.len() && l.ncols() == x.len() && y.len() == x.len(), "Jet1 dimensions");
        Self { x, y, l }
    }

    pub fn identity(x: &Vector) -> Self {
        let n = x.len();
        Self::new(x.clone(), x.clone(), Matrix::identity(n, n))
    }

    /// `a·I_x`.
    pub fn homothety(x: &Vector, a: f64) -> Self {
        let n = x.len();
        Self::new(x.clone(), x.clone(), Matrix::identity(n, n) * a)
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_invertible(&self) -> bool {
        invert(&self.l).is_ok()
    }

    pub fn compose(&self, first: &Jet1) -> Result<Jet1> {
        check_chain(&first.y, &self.x)?;
        Ok(Jet1::new(first.x.clone(), self.y.clone(), &self.l * &first.l))
    }

    pub fn inverse(&self) -> Result<Jet1> {
        Ok(Jet1::new(self.y.clone(), self.x.clone(), invert(&self.l)?))
    }

    pub fn act(&self, v: &TangentVector) -> Result<TangentVector> {
        check_base(&self.x, &v.base)?;
        Ok(TangentVector::new(self.y.clone(), &self.l * &v.v))
    }
}

/// Holonomy class of a (1,1)-jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetClass {
    Nonholonomic,
    Semiholonomic,
    Holonomic,
}

impl std::fmt::Display for JetClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            JetClass::Nonholonomic => "nonholonomic",
            JetClass::Semiholonomic => "semiholonomic",
            JetClass::Holonomic => "holonomic",
        };
        f.write_str(s)
    }
}

/// A homomorphism of T²M, acting by
/// `(x, s1, s2, s12) ↦ (y, L1 s1, L2 s2, M s12 + B(s1, s2))`.
///
/// It is a (1,1)-jet exactly when the vertical part `M` equals `L1`; the other
/// homomorphisms (such as `m_{-1}∘m_{-1*}`) are kept representable.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet11 {
    pub x: Vector,
    pub y: Vector,
    /// Linear part on the `p`-slot.
    pub l1: Matrix,
    /// Linear part on the `p*`-slot (derivative of the base map).
    pub l2: Matrix,
    /// Action on the vertical slot.
    pub m: Matrix,
    pub b: Bilinear,
}

impl Jet11 {
    /// A (1,1)-jet: the vertical part is `L1`.
    pub fn new(x: Vector, y: Vector, l1: Matrix, l2: Matrix, b: Bilinear) -> Self {
        let m = l1.clone();
        Self::homomorphism(x, y, l1, l2, m, b)
    }

    pub fn homomorphism(x: Vector, y: Vector, l1: Matrix, l2: Matrix, m: Matrix, b: Bilinear) -> Self {
        let n = x.len();
        assert!(
            y.len() == n
                && [&l1, &l2, &m].iter().all(|a| a.nrows() == n && a.ncols() == n)
                && b.dim() == n,
            "Jet11 dimensions"
        );
        Self { x, y, l1, l2, m, b }
    }

    pub fn identity(x: &Vector) -> Self {
        let n = x.len();
        let id = Matrix::identity(n, n);
        Self::new(x.clone(), x.clone(), id.clone(), id, Bilinear::zeros(n))
    }

    /// The holonomic 2-jet with first derivative `l` and second derivative `d2`.
    pub fn holonomic(x: Vector, y: Vector, l: Matrix, d2: Bilinear) -> Self {
        Self::new(x, y, l.clone(), l, d2)
    }

    /// The fiberwise scalings `m_a` (structure `P`) and `m_{a*}` (structure `PStar`) at `x`.
    pub fn scaling(x: &Vector, structure: T2Structure, a: f64) -> Self {
        let n = x.len();
        let id = Matrix::identity(n, n);
        let (l1, l2) = match structure {
            T2Structure::P => (id.clone(), &id * a),
            T2Structure::PStar => (&id * a, id.clone()),
        };
        Self::homomorphism(x.clone(), x.clone(), l1, l2, id * a, Bilinear::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Deviation of the vertical part from `L1`; zero for (1,1)-jets.
    pub fn vertical_defect(&self) -> f64 {
        max_abs_mat(&(&self.m - &self.l1))
    }

    pub fn is_jet(&self, tol: f64) -> bool {
        self.vertical_defect() <= tol
    }

    pub fn face_defect(&self) -> f64 {
        max_abs_mat(&(&self.l1 - &self.l2))
    }

    pub fn classify(&self, tol: f64) -> JetClass {
        if self.face_defect() > tol || !self.is_jet(tol) {
            JetClass::Nonholonomic
        } else if self.b.is_symmetric(tol) {
            JetClass::Holonomic
        } else {
            JetClass::Semiholonomic
        }
    }

    pub fn act(&self, e: &T2Elem) -> Result<T2Elem> {
        check_base(&self.x, &e.base)?;
        Ok(T2Elem::new(
            self.y.clone(),
            &self.l1 * &e.s1,
            &self.l2 * &e.s2,
            &self.m * &e.s12 + self.b.apply(&e.s1, &e.s2),
        ))
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Jet11) -> Result<Jet11> {
        check_chain(&first.y, &self.x)?;
        let b = first.b.post(&self.m) + self.b.pre(&first.l1, &first.l2);
        Ok(Jet11::homomorphism(
            first.x.clone(),
            self.y.clone(),
            &self.l1 * &first.l1,
            &self.l2 * &first.l2,
            &self.m * &first.m,
            b,
        ))
    }

    pub fn inverse(&self) -> Result<Jet11> {
        let l1i = invert(&self.l1)?;
        let l2i = invert(&self.l2)?;
        let mi = invert(&self.m)?;
        let b = self.b.pre(&l1i, &l2i).post(&mi).scale(-1.0);
        Ok(Jet11::homomorphism(self.y.clone(), self.x.clone(), l1i, l2i, mi, b))
    }

    /// The canonical involution `κ(ξ)·𝒳 = κ(ξ·κ(𝒳))`. The result is a (1,1)-jet
    /// exactly when `self` is semiholonomic; check with [`Jet11::is_jet`].
    pub fn kappa(&self) -> Jet11 {
        Jet11::homomorphism(
            self.x.clone(),
            self.y.clone(),
            self.l2.clone(),
            self.l1.clone(),
            self.m.clone(),
            self.b.transpose(),
        )
    }

    /// The bouncing map: the 1-jet of the base map, `β_*∘(α_*|_{D(ξ)})⁻¹`.
    pub fn bounce(&self) -> Jet1 {
        Jet1::new(self.x.clone(), self.y.clone(), self.l2.clone())
    }

    pub fn p_face(&self) -> Jet1 {
        Jet1::new(self.x.clone(), self.y.clone(), self.l1.clone())
    }

    /// Bilinear difference `ξ − ξ₀` of two jets with the same first-order parts.
    pub fn difference(&self, other: &Jet11) -> Result<Bilinear> {
        check_base(&self.x, &other.x)?;
        check_base(&self.y, &other.y)?;
        let d = [
            max_abs_mat(&(&self.l1 - &other.l1)),
            max_abs_mat(&(&self.l2 - &other.l2)),
            max_abs_mat(&(&self.m - &other.m)),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if d > JET_TOL {
            return Err(Error::FaceMismatch(d));
        }
        Ok(self.b.clone() - other.b.clone())
    }

    /// Largest deviation from `other` over all coefficient blocks.
    pub fn distance(&self, other: &Jet11) -> f64 {
        [
            max_abs(&(&self.x - &other.x)),
            max_abs(&(&self.y - &other.y)),
            max_abs_mat(&(&self.l1 - &other.l1)),
            max_abs_mat(&(&self.l2 - &other.l2)),
            max_abs_mat(&(&self.m - &other.m)),
            (self.b.clone() - other.b.clone()).max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Second derivative of a conjugated map:
/// `d²(g∘f∘h)(X) = g_*∘d²f(h_*X)∘h_* + d²(g∘h)(X)`, for `f` a 2-jet over the identity.
pub fn conjugate_d2(f2: &Jet11, g2: &Jet11, h2: &Jet11) -> Result<Bilinear> {
    let n = f2.dim();
    let id = Matrix::identity(n, n);
    let d = max_abs_mat(&(&f2.l1 - &id)).max(max_abs_mat(&(&f2.l2 - &id)));
    if d > JET_TOL || !f2.is_jet(JET_TOL) || !f2.b.is_symmetric(JET_TOL) {
        return Err(Error::PreconditionFailed(
            "f must be a holonomic 2-jet over the identity".into(),
        ));
    }
    let gh = g2.compose(h2)?;
    let d = max_abs_mat(&(&gh.l1 - &id)).max(max_abs_mat(&(&gh.l2 - &id)));
    if d > 1e-9 {
        return Err(Error::PreconditionFailed(
            "first-order part of g must invert that of h".into(),
        ));
    }
    check_chain(&h2.y, &f2.x)?;
    check_chain(&f2.y, &g2.x)?;
    Ok(f2.b.pre(&h2.l1, &h2.l2).post(&g2.l1) + gh.b)
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn pair_index(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 1) => 0,
        (0, 2) => 1,
        (1, 2) => 2,
        _ => unreachable!("labels must be distinct"),
    }
}

/// Index of the pair complementary to label `c`.
fn complement(c: usize) -> usize {
    match c {
        0 => 2,
        1 => 1,
        2 => 0,
        _ => unreachable!(),
    }
}

/// A homomorphism of T³M in slot coordinates (labels 1, 2, 3 stored as 0, 1, 2):
///
/// * `s_a ↦ L_a s_a`;
/// * `s_ab ↦ M_ab s_ab + B_ab(s_a, s_b)` for `ab ∈ {12, 13, 23}`;
/// * `s123 ↦ M123 s123 + Σ_c K_c(s_{ab}, s_c) + C(s1, s2, s3)`, where `ab` is
///   the pair complementary to `c`.
///
/// A (1,1,1)-jet is the case `M12 = M13 = M123 = L1`, `M23 = L2`, `K_3 = B13`,
/// `K_2 = B12`, `K_1(a, s1) = B12(s1, a)`, which gives
/// `s123' = L1 s123 + B13(s12, s3) + B12(s13, s2) + B12(s1, s23) + C(s1, s2, s3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet111 {
    pub x: Vector,
    pub y: Vector,
    /// `[L1, L2, L3]`.
    pub l: [Matrix; 3],
    /// `[M12, M13, M23]`.
    pub m: [Matrix; 3],
    pub m123: Matrix,
    /// `[B12, B13, B23]`.
    pub b: [Bilinear; 3],
    /// `[K_1, K_2, K_3]`.
    pub k: [Bilinear; 3],
    pub c: Trilinear,
}

impl Jet111 {
    /// A (1,1,1)-jet from its faces and trilinear block.
    pub fn new(x: Vector, y: Vector, l: [Matrix; 3], b: [Bilinear; 3], c: Trilinear) -> Self {
        let m = [l[0].clone(), l[0].clone(), l[1].clone()];
        let m123 = l[0].clone();
        let k = [b[0].transpose(), b[0].clone(), b[1].clone()];
        Self::homomorphism(x, y, l, m, m123, b, k, c)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn homomorphism(
        x: Vector,
        y: Vector,
        l: [Matrix; 3],
        m: [Matrix; 3],
        m123: Matrix,
        b: [Bilinear; 3],
        k: [Bilinear; 3],
        c: Trilinear,
    ) -> Self {
        let n = x.len();
        assert!(
            y.len() == n
                && l.iter().chain(m.iter()).chain(std::iter::once(&m123)).all(|a| a.nrows() == n && a.ncols() == n)
                && b.iter().chain(k.iter()).all(|q| q.dim() == n)
                && c.dim() == n,
            "Jet111 dimensions"
        );
        Self { x, y, l, m, m123, b, k, c }
    }

    pub fn identity(x: &Vector) -> Self {
        let n = x.len();
        let id = Matrix::identity(n, n);
        let z = Bilinear::zeros(n);
        Self::new(
            x.clone(),
            x.clone(),
            [id.clone(), id.clone(), id],
            [z.clone(), z.clone(), z],
            Trilinear::zeros(n),
        )
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Largest deviation from the (1,1,1)-jet relations between the blocks.
    pub fn jet_defect(&self) -> f64 {
        let [l1, l2, _] = &self.l;
        [
            max_abs_mat(&(&self.m[0] - l1)),
            max_abs_mat(&(&self.m[1] - l1)),
            max_abs_mat(&(&self.m[2] - l2)),
            max_abs_mat(&(&self.m123 - l1)),
            (self.k[0].clone() - self.b[0].transpose()).max_abs(),
            (self.k[1].clone() - self.b[0].clone()).max_abs(),
            (self.k[2].clone() - self.b[1].clone()).max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn is_jet(&self, tol: f64) -> bool {
        self.jet_defect() <= tol
    }

    /// Largest disagreement between the three faces.
    pub fn face_defect(&self) -> f64 {
        [
            max_abs_mat(&(&self.l[0] - &self.l[1])),
            max_abs_mat(&(&self.l[0] - &self.l[2])),
            (self.b[0].clone() - self.b[1].clone()).max_abs(),
            (self.b[0].clone() - self.b[2].clone()).max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Membership in the groupoid of (1,1,1)-jets with equal faces.
    pub fn is_semiholonomic(&self, tol: f64) -> bool {
        self.is_jet(tol) && self.face_defect() <= tol
    }

    /// Holonomic 3-jet: equal faces, symmetric bilinear and trilinear blocks.
    pub fn is_holonomic(&self, tol: f64) -> bool {
        self.is_semiholonomic(tol) && self.b[0].is_symmetric(tol) && self.c.symmetry_defect() <= tol
    }

    fn face(&self, pair: usize) -> Jet11 {
        let (a, b) = PAIRS[pair];
        Jet11::homomorphism(
            self.x.clone(),
            self.y.clone(),
            self.l[a].clone(),
            self.l[b].clone(),
            self.m[pair].clone(),
            self.b[pair].clone(),
        )
    }

    /// `p(ξ)`, acting on slots (1, 2, 12).
    pub fn p(&self) -> Jet11 {
        self.face(0)
    }

    /// `p*(ξ)`, acting on slots (1, 3, 13).
    pub fn p_star(&self) -> Jet11 {
        self.face(1)
    }

    /// `p**(ξ)`, acting on slots (2, 3, 23).
    pub fn p_star_star(&self) -> Jet11 {
        self.face(2)
    }

    pub fn act(&self, e: &T3Elem) -> Result<T3Elem> {
        check_base(&self.x, &e.base)?;
        let s = [&e.s1, &e.s2, &e.s3];
        let pairs = [&e.s12, &e.s13, &e.s23];
        let singles: [Vector; 3] = std::array::from_fn(|a| &self.l[a] * s[a]);
        let doubles: [Vector; 3] = std::array::from_fn(|p| {
            let (a, b) = PAIRS[p];
            &self.m[p] * pairs[p] + self.b[p].apply(s[a], s[b])
        });
        let mut top = &self.m123 * &e.s123 + self.c.apply(s[0], s[1], s[2]);
        for c in 0..3 {
            top += self.k[c].apply(pairs[complement(c)], s[c]);
        }
        let [s1, s2, s3] = singles;
        let [s12, s13, s23] = doubles;
        Ok(T3Elem::new(self.y.clone(), [s1, s2, s3, s12, s13, s23, top]))
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &Jet111) -> Result<Jet111> {
        check_chain(&first.y, &self.x)?;
        let l = std::array::from_fn(|a| &self.l[a] * &first.l[a]);
        let m = std::array::from_fn(|p| &self.m[p] * &first.m[p]);
        let b = std::array::from_fn(|p| {
            let (a, bb) = PAIRS[p];
            first.b[p].post(&self.m[p]) + self.b[p].pre(&first.l[a], &first.l[bb])
        });
        let k = std::array::from_fn(|c| {
            let p = complement(c);
            first.k[c].post(&self.m123) + self.k[c].pre(&first.m[p], &first.l[c])
        });
        let n = self.dim();
        let c = Trilinear::from_columns(n, |i, j, q| {
            let e = |r: usize| Vector::from_fn(n, |t, _| if t == r { 1.0 } else { 0.0 });
            let u = [e(i), e(j), e(q)];
            let mut out = &self.m123 * first.c.apply(&u[0], &u[1], &u[2]);
            for cc in 0..3 {
                let p = complement(cc);
                let (a, bb) = PAIRS[p];
                let inner = first.b[p].apply(&u[a], &u[bb]);
                out += self.k[cc].apply(&inner, &(&first.l[cc] * &u[cc]));
            }
            out += self.c.apply(&(&first.l[0] * &u[0]), &(&first.l[1] * &u[1]), &(&first.l[2] * &u[2]));
            out
        });
        Ok(Jet111::homomorphism(
            first.x.clone(),
            self.y.clone(),
            l,
            m,
            &self.m123 * &first.m123,
            b,
            k,
            c,
        ))
    }

    pub fn inverse(&self) -> Result<Jet111> {
        let li: [Matrix; 3] = [invert(&self.l[0])?, invert(&self.l[1])?, invert(&self.l[2])?];
        let mi: [Matrix; 3] = [invert(&self.m[0])?, invert(&self.m[1])?, invert(&self.m[2])?];
        let m123i = invert(&self.m123)?;
        let b: [Bilinear; 3] = std::array::from_fn(|p| {
            let (a, bb) = PAIRS[p];
            self.b[p].pre(&li[a], &li[bb]).post(&mi[p]).scale(-1.0)
        });
        let k: [Bilinear; 3] = std::array::from_fn(|c| {
            let p = complement(c);
            self.k[c].pre(&mi[p], &li[c]).post(&m123i).scale(-1.0)
        });
        let n = self.dim();
        let c = Trilinear::from_columns(n, |i, j, q| {
            let e = |r: usize| Vector::from_fn(n, |t, _| if t == r { 1.0 } else { 0.0 });
            let v = [e(i), e(j), e(q)];
            let w: [Vector; 3] = std::array::from_fn(|a| &li[a] * &v[a]);
            let mut out = -(&m123i * self.c.apply(&w[0], &w[1], &w[2]));
            for cc in 0..3 {
                let p = complement(cc);
                let (a, bb) = PAIRS[p];
                out -= k[cc].apply(&self.b[p].apply(&w[a], &w[bb]), &v[cc]);
            }
            out
        });
        Ok(Jet111::homomorphism(self.y.clone(), self.x.clone(), li, mi, m123i, b, k, c))
    }

    /// Conjugation by a slot relabeling: `κ_o(ξ)·𝔛 = κ_o(ξ·κ_o(𝔛))`.
    ///
    /// Always computed in the homomorphism form; the result is a (1,1,1)-jet
    /// only under the face equality checked by [`Jet111::involution_checked`].
    pub fn involution(&self, which: Involution) -> Jet111 {
        let sigma = which.index_map();
        let l = std::array::from_fn(|a| self.l[sigma[a]].clone());
        let mut m: [Matrix; 3] = std::array::from_fn(|p| self.m[p].clone());
        let mut b: [Bilinear; 3] = std::array::from_fn(|p| self.b[p].clone());
        for (p, &(a, bb)) in PAIRS.iter().enumerate() {
            let (sa, sb) = (sigma[a], sigma[bb]);
            let q = pair_index(sa, sb);
            m[p] = self.m[q].clone();
            b[p] = if sa < sb { self.b[q].clone() } else { self.b[q].transpose() };
        }
        let mut k: [Bilinear; 3] = std::array::from_fn(|c| self.k[c].clone());
        for c in 0..3 {
            k[sigma[c]] = self.k[c].clone();
        }
        Jet111::homomorphism(
            self.x.clone(),
            self.y.clone(),
            l,
            m,
            self.m123.clone(),
            b,
            k,
            self.c.permute(sigma),
        )
    }

    /// As [`Jet111::involution`], but fails unless the faces swapped by the
    /// involution agree (`p = p*` for κ, `p* = p**` for κ*, `p = p**` for κ′).
    pub fn involution_checked(&self, which: Involution, tol: f64) -> Result<Jet111> {
        let (f, g) = match which {
            Involution::Kappa => (self.p(), self.p_star()),
            Involution::KappaStar => (self.p_star(), self.p_star_star()),
            Involution::KappaPrime => (self.p(), self.p_star_star()),
        };
        let d = f.distance(&g);
        if d > tol {
            return Err(Error::PreconditionFailed(format!(
                "faces exchanged by {which:?} differ by {d:e}"
            )));
        }
        Ok(self.involution(which))
    }

    /// Trilinear difference `ξ − ξ₀` of jets agreeing in all lower-order blocks.
    pub fn difference(&self, other: &Jet111) -> Result<Trilinear> {
        let mut probe = other.clone();
        probe.c = self.c.clone();
        let d = self.distance(&probe);
        if d > JET_TOL {
            return Err(Error::FaceMismatch(d));
        }
        Ok(self.c.clone() - other.c.clone())
    }

    pub fn distance(&self, other: &Jet111) -> f64 {
        let mut d = max_abs(&(&self.x - &other.x)).max(max_abs(&(&self.y - &other.y)));
        for a in 0..3 {
            d = d.max(max_abs_mat(&(&self.l[a] - &other.l[a])));
            d = d.max(max_abs_mat(&(&self.m[a] - &other.m[a])));
            d = d.max((self.b[a].clone() - other.b[a].clone()).max_abs());
            d = d.max((self.k[a].clone() - other.k[a].clone()).max_abs());
        }
        d = d.max(max_abs_mat(&(&self.m123 - &other.m123)));
        d.max((self.c.clone() - other.c.clone()).max_abs())
    }
}

/// Checks that two T²M elements lie over the same point of TM×TM; used by
/// callers that form affine differences of jet images.
pub fn same_pair_fiber(a: &T2Elem, b: &T2Elem, tol: f64) -> Result<()> {
    check_close("pair fiber base", &a.base, &b.base, tol)?;
    check_close("pair fiber p", &a.s1, &b.s1, tol)?;
    check_close("pair fiber p*", &a.s2, &b.s2, tol)
}
