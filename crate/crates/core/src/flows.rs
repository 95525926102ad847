//! Geodesics, the exponential map and its inverse, geodesic symmetries,
//! parallel transport, lifts tangent to `D(S(·))`, and the maps
//! `φ_ξ = exp_y ∘ ξ ∘ exp_x⁻¹` with their leaf test.
//!
//! All integrations use the classical fixed-step fourth-order Runge–Kutta
//! scheme with `⌈|t|/h⌉` equal steps.

use crate::connection::{affine_extension_s, tilde_nabla, ConnectionField, GroupoidTangent};
use crate::error::{Error, Result};
use crate::fields::fd_jet_oracle;
use crate::jets::{Jet1, Jet11};
use crate::multilinear::{max_abs, max_abs_mat, Bilinear, Matrix, Vector};
use crate::tangent::T2Elem;

/// Default integration step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Iteration cap of the exponential-map inverse.
pub const NEWTON_MAX_ITER: usize = 50;
/// Largest accepted residual `|exp(x, V) − y|` of the inverse.
pub const EXP_INVERSE_TOL: f64 = 1e-10;
/// Finite-difference step for first derivatives of flow maps.
pub const FD_STEP_1: f64 = 1e-4;
/// Finite-difference step for second derivatives of flow maps.
pub const FD_STEP_2: f64 = 1e-3;

fn step_count(t: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !t.is_finite() {
        return Err(Error::PreconditionFailed(format!("invalid integration request: t {t}, h {h}")));
    }
    Ok(((t.abs() / h).ceil() as usize).max(1))
}

/// Integrates `ẏ = f(t, y)` from 0 to `t_end`, calling `observe` at every grid time.
///
/// A domain error inside `f` becomes [`Error::LeftDomain`] carrying the last grid
/// time at which the state was valid.
fn rk4<F, O>(f: F, y0: Vector, t_end: f64, h: f64, mut observe: O) -> Result<Vector>
where
    F: Fn(f64, &Vector) -> Result<Vector>,
    O: FnMut(f64, &Vector),
{
    let steps = step_count(t_end, h)?;
    let dt = t_end / steps as f64;
    let mut y = y0;
    observe(0.0, &y);
    for k in 0..steps {
        let t = k as f64 * dt;
        let leave = |e: Error| match e {
            Error::Domain(_) => Error::LeftDomain { t },
            other => other,
        };
        let k1 = f(t, &y).map_err(leave)?;
        let k2 = f(t + 0.5 * dt, &(&y + &k1 * (0.5 * dt))).map_err(leave)?;
        let k3 = f(t + 0.5 * dt, &(&y + &k2 * (0.5 * dt))).map_err(leave)?;
        let k4 = f(t + dt, &(&y + &k3 * dt)).map_err(leave)?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        observe((k + 1) as f64 * dt, &y);
    }
    Ok(y)
}

fn segment(s: &Vector, start: usize, len: usize) -> Vector {
    s.rows(start, len).into_owned()
}

fn matrix_at(s: &Vector, start: usize, n: usize) -> Matrix {
    Matrix::from_column_slice(n, n, s.rows(start, n * n).as_slice())
}

fn stack(parts: &[&[f64]]) -> Vector {
    Vector::from_iterator(parts.iter().map(|p| p.len()).sum(), parts.iter().flat_map(|p| p.iter().copied()))
}

/// Right-hand side of the geodesic equation on the state `(x, v)`.
fn geodesic_rhs(c: &ConnectionField, s: &Vector) -> Result<Vector> {
    let n = s.len() / 2;
    let x = segment(s, 0, n);
    let v = segment(s, n, n);
    let acc = -c.gamma(&x)?.apply(&v, &v);
    Ok(stack(&[v.as_slice(), acc.as_slice()]))
}

/// Samples of a geodesic `ẍ = −Γ(ẋ, ẋ)` at every grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub x0: Vector,
    pub v0: Vector,
    pub h: f64,
    pub times: Vec<f64>,
    pub points: Vec<Vector>,
    pub velocities: Vec<Vector>,
}

impl GeodesicPath {
    pub fn end(&self) -> &Vector {
        self.points.last().expect("nonempty path")
    }
}

fn check_start(c: &ConnectionField, x: &Vector, v: &Vector) -> Result<()> {
    let n = c.dim();
    if x.len() != n || v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: if x.len() != n { x.len() } else { v.len() } });
    }
    c.domain().check(x)
}

pub fn geodesic_path(c: &ConnectionField, x: &Vector, v: &Vector, t: f64, h: f64) -> Result<GeodesicPath> {
    check_start(c, x, v)?;
    let n = x.len();
    let mut path = GeodesicPath {
        x0: x.clone(),
        v0: v.clone(),
        h,
        times: Vec::new(),
        points: Vec::new(),
        velocities: Vec::new(),
    };
    rk4(|_, s| geodesic_rhs(c, s), stack(&[x.as_slice(), v.as_slice()]), t, h, |tk, s| {
        path.times.push(tk);
        path.points.push(segment(s, 0, n));
        path.velocities.push(segment(s, n, n));
    })?;
    Ok(path)
}

/// Position and velocity at time `t` of the geodesic through `x` tangent to `v`.
pub fn geodesic_state(c: &ConnectionField, x: &Vector, v: &Vector, t: f64, h: f64) -> Result<(Vector, Vector)> {
    check_start(c, x, v)?;
    let n = x.len();
    let s = rk4(|_, s| geodesic_rhs(c, s), stack(&[x.as_slice(), v.as_slice()]), t, h, |_, _| {})?;
    Ok((segment(&s, 0, n), segment(&s, n, n)))
}

pub fn geodesic(c: &ConnectionField, x: &Vector, v: &Vector, t: f64, h: f64) -> Result<Vector> {
    Ok(geodesic_state(c, x, v, t, h)?.0)
}

/// The time-one geodesic with step `h`.
pub fn exp_map_h(c: &ConnectionField, x: &Vector, v: &Vector, h: f64) -> Result<Vector> {
    geodesic(c, x, v, 1.0, h)
}

pub fn exp_map(c: &ConnectionField, x: &Vector, v: &Vector) -> Result<Vector> {
    exp_map_h(c, x, v, DEFAULT_STEP)
}

fn exp_jacobian(c: &ConnectionField, x: &Vector, v: &Vector, h: f64) -> Result<Matrix> {
    let n = x.len();
    let d = 1e-6 * (1.0 + max_abs(v));
    let mut jac = Matrix::zeros(n, n);
    for i in 0..n {
        let mut vp = v.clone();
        let mut vm = v.clone();
        vp[i] += d;
        vm[i] -= d;
        let col = (exp_map_h(c, x, &vp, h)? - exp_map_h(c, x, &vm, h)?) / (2.0 * d);
        jac.set_column(i, &col);
    }
    Ok(jac)
}

/// `V` with `exp(x, V) = y`, by damped Newton iteration from `V = y − x`.
///
/// The first steps reuse the identity, which is the exact Jacobian at `V = 0`;
/// a finite-difference Jacobian replaces it as soon as the residual stops
/// contracting quickly. The step is halved while the residual grows.
pub fn exp_inverse(c: &ConnectionField, x: &Vector, y: &Vector, h: f64) -> Result<Vector> {
    check_start(c, x, y)?;
    let n = x.len();
    let target = 1e-14 * (1.0 + max_abs(x) + max_abs(y));
    let mut v = y - x;
    let mut r = exp_map_h(c, x, &v, h)? - y;
    let mut res = max_abs(&r);
    let mut jac = Matrix::identity(n, n);
    let mut fd = false;
    let mut iterations = 0;
    while iterations < NEWTON_MAX_ITER && res > target {
        iterations += 1;
        let dv = jac.clone().lu().solve(&r).ok_or(Error::NoConvergence { iterations, residual: res })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1.0 / 64.0 {
            let cand = &v - &dv * lambda;
            if let Ok(e) = exp_map_h(c, x, &cand, h) {
                let rc = e - y;
                if max_abs(&rc) < res {
                    accepted = Some((cand, rc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let ratio = match accepted {
            Some((cand, rc)) => {
                let new_res = max_abs(&rc);
                let ratio = new_res / res;
                v = cand;
                r = rc;
                res = new_res;
                ratio
            }
            None => 1.0,
        };
        if ratio > 0.25 {
            if fd {
                if ratio > 0.9 {
                    break;
                }
            } else {
                jac = exp_jacobian(c, x, &v, h)?;
                fd = true;
            }
        }
    }
    if res <= EXP_INVERSE_TOL {
        Ok(v)
    } else {
        Err(Error::NoConvergence { iterations, residual: res })
    }
}

/// `a_x(y) = exp_x(−exp_x⁻¹(y))`.
pub fn geodesic_symmetry(c: &ConnectionField, x: &Vector, y: &Vector, h: f64) -> Result<Vector> {
    let v = exp_inverse(c, x, y, h)?;
    exp_map_h(c, x, &(-v), h)
}

/// Central-difference 2-jet of `a_x` at `x` with stencil step `fd_h` and integration step `h`.
pub fn numeric_symmetry_2jet(c: &ConnectionField, x: &Vector, fd_h: f64, h: f64) -> Result<Jet11> {
    let f = |y: &Vector| geodesic_symmetry(c, x, y, h);
    let j = fd_jet_oracle(&f, x, 2, fd_h, false)?;
    let d2 = j.d2_bilinear().ok_or(Error::PreconditionFailed("second derivative missing".into()))?;
    Ok(Jet11::holonomic(x.clone(), j.value, j.d1, d2))
}

/// A parametrized curve in the chart.
pub trait Curve {
    fn dim(&self) -> usize;
    fn point(&self, t: f64) -> Vector;
    fn velocity(&self, t: f64) -> Vector;
}

/// A curve given by a closure returning position and velocity.
pub struct FnCurve<F: Fn(f64) -> (Vector, Vector)> {
    pub n: usize,
    pub f: F,
}

impl<F: Fn(f64) -> (Vector, Vector)> FnCurve<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(f64) -> (Vector, Vector)> Curve for FnCurve<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn point(&self, t: f64) -> Vector {
        (self.f)(t).0
    }

    fn velocity(&self, t: f64) -> Vector {
        (self.f)(t).1
    }
}

/// The straight segment `t ↦ a + t(b − a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: Vector,
    pub b: Vector,
}

impl Curve for Segment {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn point(&self, t: f64) -> Vector {
        &self.a + (&self.b - &self.a) * t
    }

    fn velocity(&self, _t: f64) -> Vector {
        &self.b - &self.a
    }
}

/// A path along which transport and lifts are integrated: either an explicit
/// curve or the geodesic through `x` tangent to `v`, integrated alongside.
pub enum Path<'a> {
    Curve(&'a dyn Curve),
    Geodesic { x: Vector, v: Vector },
}

/// Position, velocity and Γ at the path's current point, with the derivative of
/// the path's own state.
struct PathPoint {
    point: Vector,
    velocity: Vector,
    gamma: Bilinear,
    state_dot: Vector,
}

impl Path<'_> {
    fn dim(&self) -> usize {
        match self {
            Path::Curve(c) => c.dim(),
            Path::Geodesic { x, .. } => x.len(),
        }
    }

    pub fn start(&self) -> Vector {
        match self {
            Path::Curve(c) => c.point(0.0),
            Path::Geodesic { x, .. } => x.clone(),
        }
    }

    fn state_len(&self) -> usize {
        match self {
            Path::Curve(_) => 0,
            Path::Geodesic { x, .. } => 2 * x.len(),
        }
    }

    fn initial_state(&self) -> Vec<f64> {
        match self {
            Path::Curve(_) => Vec::new(),
            Path::Geodesic { x, v } => x.iter().chain(v.iter()).copied().collect(),
        }
    }

    fn eval(&self, c: &ConnectionField, t: f64, s: &Vector) -> Result<PathPoint> {
        let n = self.dim();
        match self {
            Path::Curve(curve) => {
                let point = curve.point(t);
                let gamma = c.gamma(&point)?;
                Ok(PathPoint { velocity: curve.velocity(t), point, gamma, state_dot: Vector::zeros(0) })
            }
            Path::Geodesic { .. } => {
                let point = segment(s, 0, n);
                let velocity = segment(s, n, n);
                let gamma = c.gamma(&point)?;
                let acc = -gamma.apply(&velocity, &velocity);
                let state_dot = stack(&[velocity.as_slice(), acc.as_slice()]);
                Ok(PathPoint { point, velocity, gamma, state_dot })
            }
        }
    }

    fn check(&self, c: &ConnectionField) -> Result<()> {
        let n = c.dim();
        if self.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.dim() });
        }
        c.domain().check(&self.start())
    }
}

/// Parallel transport `τ(t): T_{γ(0)}M → T_{γ(t)}M` sampled on the integration grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportFrame {
    pub times: Vec<f64>,
    pub points: Vec<Vector>,
    pub velocities: Vec<Vector>,
    pub taus: Vec<Matrix>,
}

impl TransportFrame {
    pub fn end(&self) -> &Matrix {
        self.taus.last().expect("nonempty frame")
    }

    /// Largest `|∇̃|` of the tangent elements `(γ, τe_j, γ̇, d(τe_j)/dt)` of the
    /// transported basis vectors, with the time derivative taken by central
    /// differences of the samples.
    pub fn horizontality_residual(&self, c: &ConnectionField) -> Result<f64> {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut worst = 0.0f64;
        for k in 1..self.times.len().saturating_sub(1) {
            let dt = self.times[k + 1] - self.times[k - 1];
            let dtau = (&self.taus[k + 1] - &self.taus[k - 1]) / dt;
            for j in 0..n {
                let e = T2Elem::new(
                    self.points[k].clone(),
                    self.taus[k].column(j).into_owned(),
                    self.velocities[k].clone(),
                    dtau.column(j).into_owned(),
                );
                worst = worst.max(max_abs(&tilde_nabla(c, &e)?));
            }
        }
        Ok(worst)
    }
}

/// Integrates `τ̇ = −Γ(γ̇, τ·)` from `τ(0) = I` up to time `t`.
pub fn parallel_transport(c: &ConnectionField, path: &Path, t: f64, h: f64) -> Result<TransportFrame> {
    path.check(c)?;
    let n = c.dim();
    let m = path.state_len();
    let id = Matrix::identity(n, n);
    let y0 = stack(&[&path.initial_state(), id.as_slice()]);
    let f = |tk: f64, s: &Vector| -> Result<Vector> {
        let p = path.eval(c, tk, s)?;
        let tau = matrix_at(s, m, n);
        let dtau = -p.gamma.left(&p.velocity) * tau;
        Ok(stack(&[p.state_dot.as_slice(), dtau.as_slice()]))
    };
    let mut frame = TransportFrame { times: Vec::new(), points: Vec::new(), velocities: Vec::new(), taus: Vec::new() };
    rk4(&f, y0, t, h, |tk, s| {
        let (point, velocity) = match path {
            Path::Curve(curve) => (curve.point(tk), curve.velocity(tk)),
            Path::Geodesic { .. } => (segment(s, 0, n), segment(s, n, n)),
        };
        frame.times.push(tk);
        frame.points.push(point);
        frame.velocities.push(velocity);
        frame.taus.push(matrix_at(s, m, n));
    })?;
    Ok(frame)
}

/// The path `ℐ(v)` with `γ̇ = τ^γ v(t)`, integrated with its transport.
#[derive(Debug, Clone, PartialEq)]
pub struct DevelopedPath {
    pub times: Vec<f64>,
    pub points: Vec<Vector>,
    pub velocities: Vec<Vector>,
    pub taus: Vec<Matrix>,
}

impl DevelopedPath {
    pub fn end(&self) -> &Vector {
        self.points.last().expect("nonempty path")
    }

    /// `max |τ(t)⁻¹γ̇(t) − v(t)|` over the samples.
    pub fn round_trip_residual(&self, v: &dyn Fn(f64) -> Vector) -> Result<f64> {
        let mut worst = 0.0f64;
        for k in 0..self.times.len() {
            let inv = self.taus[k].clone().try_inverse().ok_or(Error::SingularJet)?;
            worst = worst.max(max_abs(&(inv * &self.velocities[k] - v(self.times[k]))));
        }
        Ok(worst)
    }
}

pub fn path_from_velocity(
    c: &ConnectionField,
    x: &Vector,
    v: &dyn Fn(f64) -> Vector,
    t: f64,
    h: f64,
) -> Result<DevelopedPath> {
    let n = c.dim();
    check_start(c, x, &v(0.0))?;
    let id = Matrix::identity(n, n);
    let f = |tk: f64, s: &Vector| -> Result<Vector> {
        let g = segment(s, 0, n);
        let tau = matrix_at(s, n, n);
        let gdot = &tau * v(tk);
        let dtau = -c.gamma(&g)?.left(&gdot) * tau;
        Ok(stack(&[gdot.as_slice(), dtau.as_slice()]))
    };
    let mut out = DevelopedPath { times: Vec::new(), points: Vec::new(), velocities: Vec::new(), taus: Vec::new() };
    rk4(&f, stack(&[x.as_slice(), id.as_slice()]), t, h, |tk, s| {
        let tau = matrix_at(s, n, n);
        out.times.push(tk);
        out.points.push(segment(s, 0, n));
        out.velocities.push(&tau * v(tk));
        out.taus.push(tau);
    })?;
    Ok(out)
}

/// A lift `t ↦ ξ(t)` of a path to the groupoid of invertible 1-jets, with velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    pub times: Vec<f64>,
    pub jets: Vec<Jet1>,
    pub velocities: Vec<GroupoidTangent>,
}

impl Lift {
    pub fn end(&self) -> &Jet1 {
        self.jets.last().expect("nonempty lift")
    }

    /// `max` over samples of the distance to another sampled lift on the same grid.
    pub fn distance(&self, other: &[Jet1]) -> f64 {
        self.jets
            .iter()
            .zip(other)
            .map(|(a, b)| max_abs(&(&a.y - &b.y)).max(max_abs_mat(&(&a.l - &b.l))).max(max_abs(&(&a.x - &b.x))))
            .fold(0.0, f64::max)
    }
}

fn check_lift_start(c: &ConnectionField, xi: &Jet1, path: &Path) -> Result<()> {
    path.check(c)?;
    if xi.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: xi.dim() });
    }
    let dev = max_abs(&(&path.start() - &xi.x));
    if dev > 1e-12 * (1.0 + max_abs(&xi.x)) {
        return Err(Error::BasePointMismatch(dev));
    }
    c.domain().check(&xi.y)
}

/// The lift of `γ` through `ξ` tangent to `D(S(·))`:
/// `ẏ = Lγ̇`, `L̇w = LΓ_x(γ̇, w) − Γ_y(Lγ̇, Lw)`.
pub fn d_lift(c: &ConnectionField, xi: &Jet1, path: &Path, t: f64, h: f64) -> Result<Lift> {
    check_lift_start(c, xi, path)?;
    let n = c.dim();
    let m = path.state_len();
    let rhs = |tk: f64, s: &Vector| -> Result<(PathPoint, Vector, Matrix)> {
        let p = path.eval(c, tk, s)?;
        let y = segment(s, m, n);
        let l = matrix_at(s, m + n, n);
        let ydot = &l * &p.velocity;
        let ldot = &l * p.gamma.left(&p.velocity) - c.gamma(&y)?.left(&ydot) * &l;
        Ok((p, ydot, ldot))
    };
    let f = |tk: f64, s: &Vector| -> Result<Vector> {
        let (p, ydot, ldot) = rhs(tk, s)?;
        Ok(stack(&[p.state_dot.as_slice(), ydot.as_slice(), ldot.as_slice()]))
    };
    let y0 = stack(&[&path.initial_state(), xi.y.as_slice(), xi.l.as_slice()]);
    let mut samples = Vec::new();
    rk4(&f, y0, t, h, |tk, s| samples.push((tk, s.clone())))?;
    let mut lift = Lift { times: Vec::new(), jets: Vec::new(), velocities: Vec::new() };
    for (tk, s) in samples {
        let (p, ydot, ldot) = rhs(tk, &s).map_err(|e| match e {
            Error::Domain(_) => Error::LeftDomain { t: tk },
            other => other,
        })?;
        lift.times.push(tk);
        lift.jets.push(Jet1::new(p.point, segment(&s, m, n), matrix_at(&s, m + n, n)));
        lift.velocities.push(GroupoidTangent::new(p.velocity, ydot, ldot));
    }
    Ok(lift)
}

/// `τ^{γ′}(t) ∘ ξ ∘ τ^γ(t)⁻¹` with `γ′ = ℐ(ξ τ^γ(t)⁻¹ γ̇)` starting at `ξ.y`,
/// integrated from the transport equations alone.
pub fn lift_by_transport(c: &ConnectionField, xi: &Jet1, path: &Path, t: f64, h: f64) -> Result<Vec<Jet1>> {
    check_lift_start(c, xi, path)?;
    let n = c.dim();
    let m = path.state_len();
    let nn = n * n;
    let f = |tk: f64, s: &Vector| -> Result<Vector> {
        let p = path.eval(c, tk, s)?;
        let tau = matrix_at(s, m, n);
        let g2 = segment(s, m + nn, n);
        let tau2 = matrix_at(s, m + nn + n, n);
        let dtau = -p.gamma.left(&p.velocity) * &tau;
        let inv = tau.try_inverse().ok_or(Error::SingularJet)?;
        let v2 = &xi.l * (inv * &p.velocity);
        let g2dot = &tau2 * v2;
        let dtau2 = -c.gamma(&g2)?.left(&g2dot) * &tau2;
        Ok(stack(&[p.state_dot.as_slice(), dtau.as_slice(), g2dot.as_slice(), dtau2.as_slice()]))
    };
    let id = Matrix::identity(n, n);
    let y0 = stack(&[&path.initial_state(), id.as_slice(), xi.y.as_slice(), id.as_slice()]);
    let mut out = Vec::new();
    let mut failure = None;
    rk4(&f, y0, t, h, |tk, s| {
        let point = match path {
            Path::Curve(curve) => curve.point(tk),
            Path::Geodesic { .. } => segment(s, 0, n),
        };
        let tau = matrix_at(s, m, n);
        match tau.try_inverse() {
            Some(inv) => {
                let l = matrix_at(s, m + nn + n, n) * &xi.l * inv;
                out.push(Jet1::new(point, segment(s, m + nn, n), l));
            }
            None => failure = Some(Error::SingularJet),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `φ_ξ(x′) = exp_y(ξ exp_x⁻¹(x′))`.
pub fn phi_xi(c: &ConnectionField, xi: &Jet1, xp: &Vector, h: f64) -> Result<Vector> {
    let u = exp_inverse(c, &xi.x, xp, h)?;
    exp_map_h(c, &xi.y, &(&xi.l * u), h)
}

/// The 1-jet of `φ_ξ` at `x′` by central differences.
pub fn phi_xi_1jet(c: &ConnectionField, xi: &Jet1, xp: &Vector, h: f64) -> Result<Jet1> {
    let f = |p: &Vector| phi_xi(c, xi, p, h);
    let j = fd_jet_oracle(&f, xp, 1, FD_STEP_1, false)?;
    Ok(Jet1::new(xp.clone(), j.value, j.d1))
}

/// Unit directions sampling the sphere of a reference inner product: 16 equally
/// spaced angles for `n = 2`, otherwise `±e_i` and `(±e_i ± e_j)/√2`.
pub fn ray_directions(n: usize) -> Vec<Vector> {
    if n == 2 {
        return (0..16)
            .map(|k| {
                let a = std::f64::consts::PI * k as f64 / 8.0;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect();
    }
    let e = |i: usize| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
    let mut out = Vec::new();
    for i in 0..n {
        out.push(e(i));
        out.push(-e(i));
        for j in (i + 1)..n {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                out.push((e(i) * a + e(j) * b) / 2f64.sqrt());
            }
        }
    }
    out
}

/// The endpoint at `x′` of `b_ξ`: the `D`-lift through `ξ` of the geodesic ray
/// from `ξ.x` to `x′`.
pub fn b_xi(c: &ConnectionField, xi: &Jet1, xp: &Vector, h: f64) -> Result<Jet1> {
    let u = exp_inverse(c, &xi.x, xp, h)?;
    Ok(d_lift(c, xi, &Path::Geodesic { x: xi.x.clone(), v: u }, 1.0, h)?.end().clone())
}

/// The 1-jet of `φ_ξ` at `x′` as the bounce of the tangent plane of `b_ξ`:
/// targets of `b_ξ` over the ring `x′ + δw_k` are fitted by least squares
/// against the offsets `δw_k`.
pub fn phi_xi_1jet_from_lifts(c: &ConnectionField, xi: &Jet1, xp: &Vector, h: f64) -> Result<Jet1> {
    let n = c.dim();
    let delta = FD_STEP_1;
    let centre = b_xi(c, xi, xp, h)?;
    let mut cross = Matrix::zeros(n, n);
    let mut gram = Matrix::zeros(n, n);
    for w in ray_directions(n) {
        let dx = &w * delta;
        let dy = b_xi(c, xi, &(xp + &dx), h)?.y - &centre.y;
        cross += &dy * dx.transpose();
        gram += &dx * dx.transpose();
    }
    let inv = gram.try_inverse().ok_or(Error::SingularFrame)?;
    Ok(Jet1::new(xp.clone(), centre.y, cross * inv))
}

/// `max |j²φ_ξ − S(j¹φ_ξ)|` over the sample points, with the points themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafReport {
    pub residual: f64,
    pub points: Vec<Vector>,
    pub residuals: Vec<f64>,
}

/// Number of sample directions of [`leaf_residual`].
pub const LEAF_DIRECTIONS: usize = 4;

/// Compares the numeric 2-jet of `φ_ξ` with the affine extension of its 1-jet
/// at `exp_x(r w_k)` for [`LEAF_DIRECTIONS`] equally spaced directions `w_k`
/// in the plane of the first two coordinates.
pub fn leaf_residual(c: &ConnectionField, xi: &Jet1, radius: f64, h: f64) -> Result<LeafReport> {
    let n = c.dim();
    let mut report = LeafReport { residual: 0.0, points: Vec::new(), residuals: Vec::new() };
    for k in 0..LEAF_DIRECTIONS {
        let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / LEAF_DIRECTIONS as f64;
        let mut w = Vector::zeros(n);
        w[0] = a.cos();
        if n > 1 {
            w[1] = a.sin();
        }
        let xp = exp_map_h(c, &xi.x, &(w * radius), h)?;
        let f = |p: &Vector| phi_xi(c, xi, p, h);
        let j = fd_jet_oracle(&f, &xp, 2, FD_STEP_2, false)?;
        let d2 = j.d2_bilinear().ok_or(Error::PreconditionFailed("second derivative missing".into()))?;
        let s = affine_extension_s(c, &Jet1::new(xp.clone(), j.value, j.d1))?;
        let r = (d2 - s.b).max_abs();
        report.residual = report.residual.max(r);
        report.points.push(xp);
        report.residuals.push(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
