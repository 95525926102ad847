//! Verification checks, grouped into suites.
//!
//! Every check measures a largest residual between two independent
//! computations of the same quantity at seeded sample points.

use std::time::Instant;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetconn::connection::{
    affine_extension_s, classical_tensors, connection_from_sjet, covariant_forms, curvature_defect,
    curvature_from_sjet, curvature_homothety, levi_civita, sjet_from_connection, torsion_derivative_defect,
    torsion_from_sjet, DefectResidual, TORSION_TOL,
};
use jetconn::fields::{ExprVectorField, ManifoldSpec};
use jetconn::flows::{
    d_lift, exp_inverse, exp_map_h, geodesic_path, geodesic_symmetry, lift_by_transport, numeric_symmetry_2jet,
    path_from_velocity, Path, Segment, FD_STEP_2,
};
use jetconn::frames::{
    admissible_section, holonomic_solve, sjet_from_admissible, solve_m, ConnectionSection, Frame1, Frame11,
};
use jetconn::multilinear::max_abs;
use jetconn::{Bilinear, ConnectionField, Jet1, Jet11, Matrix, Result, SymmetryJetField, Vector};

use crate::report::{CheckRecord, CheckStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Core,
    Curvature,
    Flows,
    Frames,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Core => "core",
            Suite::Curvature => "curvature",
            Suite::Flows => "flows",
            Suite::Frames => "frames",
        }
    }

    fn includes(self, group: Suite) -> bool {
        self == Suite::All || self == group
    }
}

/// Number of sample points per check.
const POINTS: usize = 5;

/// Everything a check needs.
pub struct Ctx {
    pub spec: ManifoldSpec,
    pub c: ConnectionField,
    pub s: SymmetryJetField,
    pub points: Vec<Vector>,
    pub h: f64,
}

impl Ctx {
    pub fn new(spec: ManifoldSpec, seed: u64, h: f64) -> Self {
        let c = ConnectionField::from_spec(&spec);
        let s = SymmetryJetField::from_spec(&spec);
        let points = spec.sample_points(POINTS, seed);
        Self { spec, c, s, points, h }
    }

    fn n(&self) -> usize {
        self.spec.dim
    }

    fn torsion_free(&self) -> Result<bool> {
        for p in &self.points {
            if self.c.torsion(p)?.max_abs() > TORSION_TOL {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A random sample point.
    fn point(&self, rng: &mut ChaCha8Rng) -> Vector {
        self.points[rng.gen_range(0..self.points.len())].clone()
    }

    /// A random invertible 1-jet between sample points.
    fn jet(&self, rng: &mut ChaCha8Rng) -> Jet1 {
        Jet1::new(self.point(rng), self.point(rng), random_matrix(self.n(), rng))
    }

    /// A small random direction, scaled to stay well inside a normal neighborhood.
    fn direction(&self, rng: &mut ChaCha8Rng, fraction: f64) -> Vector {
        let n = self.n();
        let v = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let len = v.norm().max(1e-3);
        v * (fraction * self.spec.normal_radius() / len)
    }
}

fn basis(n: usize) -> Vec<Vector> {
    (0..n).map(|i| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect()
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::identity(n, n) + Matrix::from_fn(n, n, |_, _| rng.gen_range(-0.3..0.3))
}

fn random_frame(x: &Vector, rng: &mut ChaCha8Rng) -> Result<Frame1> {
    Frame1::new(x.clone(), random_matrix(x.len(), rng))
}

fn random_frame11(x: &Vector, rng: &mut ChaCha8Rng) -> Frame11 {
    let n = x.len();
    Frame11::new(
        x.clone(),
        random_matrix(n, rng),
        random_matrix(n, rng),
        Bilinear::from_fn(n, |_, _, _| rng.gen_range(-1.0..1.0)),
    )
}

/// A 1-jet preserving the torsion: a random jet when the connection is
/// torsion-free; in dimension two a jet at `x` fixing the direction of
/// `T_x(e1, e2)`; otherwise the identity.
fn torsion_preserving_jet(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<(Jet1, Option<String>)> {
    if ctx.torsion_free()? {
        return Ok((ctx.jet(rng), None));
    }
    let x = ctx.point(rng);
    let n = ctx.n();
    if n != 2 {
        return Ok((Jet1::identity(&x), Some("identity jet: no torsion-preserving family in this dimension".into())));
    }
    let e = basis(2);
    let t = ctx.c.torsion(&x)?.apply(&e[0], &e[1]);
    if t.norm() <= TORSION_TOL {
        return Ok((Jet1::new(x.clone(), x, random_matrix(2, rng)), None));
    }
    let p = Matrix::from_columns(&[t.clone(), Vector::from_vec(vec![-t[1], t[0]])]);
    let lambda = rng.gen_range(0.5..1.5);
    let mu = rng.gen_range(-0.5..0.5);
    let shear = Matrix::from_row_slice(2, 2, &[lambda, mu, 0.0, 1.0]);
    let inv = p.clone().try_inverse().expect("nonzero torsion direction");
    Ok((Jet1::new(x.clone(), x, &p * shear * inv), None))
}

/// Result of running one check.
enum Outcome {
    Measured { residual: f64, note: Option<String> },
    Skipped(String),
}

fn measured(residual: f64) -> Result<Outcome> {
    Ok(Outcome::Measured { residual, note: None })
}

type CheckFn = fn(&Ctx, &mut ChaCha8Rng) -> Result<Outcome>;

struct Check {
    id: &'static str,
    group: Suite,
    anchor: &'static str,
    tolerance: f64,
    run: CheckFn,
}

const CHECKS: &[Check] = &[
    Check {
        id: "core.covariant_derivative",
        group: Suite::Core,
        anchor: "covariant derivative: classical, lifted, bracket and symmetry forms agree",
        tolerance: 1e-9,
        run: covariant_derivative,
    },
    Check {
        id: "core.s_minus_identity",
        group: Suite::Core,
        anchor: "affine extension of -I is the symmetry jet",
        tolerance: 1e-12,
        run: s_minus_identity,
    },
    Check {
        id: "core.s_morphism",
        group: Suite::Core,
        anchor: "affine extension respects composition and identities",
        tolerance: 1e-12,
        run: s_morphism,
    },
    Check {
        id: "core.sjet_roundtrip",
        group: Suite::Core,
        anchor: "symmetry jet and connection coefficients round trip",
        tolerance: 1e-13,
        run: sjet_roundtrip,
    },
    Check {
        id: "core.torsion",
        group: Suite::Core,
        anchor: "torsion as the defect of the symmetry jet under the canonical flip",
        tolerance: 1e-12,
        run: torsion,
    },
    Check {
        id: "core.torsion_kappa",
        group: Suite::Core,
        anchor: "flip defect of an affine extension measures torsion preservation",
        tolerance: 1e-12,
        run: torsion_kappa,
    },
    Check {
        id: "curvature.commutator",
        group: Suite::Curvature,
        anchor: "curvature from the commutator of the first jet of the symmetry field",
        tolerance: 1e-9,
        run: commutator,
    },
    Check {
        id: "curvature.homothety",
        group: Suite::Curvature,
        anchor: "curvature from the third-order extension of a homothety",
        tolerance: 1e-9,
        run: homothety,
    },
    Check {
        id: "curvature.kappa_defect",
        group: Suite::Curvature,
        anchor: "flip defect of the third-order extension against the curvature defect",
        tolerance: 1e-9,
        run: kappa_defect,
    },
    Check {
        id: "curvature.kappa_star_defect",
        group: Suite::Curvature,
        anchor: "dual flip defect of the third-order extension against the torsion-derivative defect",
        tolerance: 1e-9,
        run: kappa_star_defect,
    },
    Check {
        id: "curvature.levi_civita",
        group: Suite::Curvature,
        anchor: "Levi-Civita coefficients: closed form against the metric-compatibility solve",
        tolerance: 1e-10,
        run: levi_civita_check,
    },
    Check {
        id: "flows.developed_geodesic",
        group: Suite::Flows,
        anchor: "developing a constant velocity gives a geodesic",
        tolerance: 1e-8,
        run: developed_geodesic,
    },
    Check {
        id: "flows.exp_roundtrip",
        group: Suite::Flows,
        anchor: "exponential map inverse round trip",
        tolerance: 1e-8,
        run: exp_roundtrip,
    },
    Check {
        id: "flows.lift_identity",
        group: Suite::Flows,
        anchor: "horizontal lift of a path equals transport conjugation",
        tolerance: 1e-6,
        run: lift_identity,
    },
    Check {
        id: "flows.symmetry_2jet",
        group: Suite::Flows,
        anchor: "second jet of the geodesic symmetry is the symmetry jet",
        tolerance: 1e-4,
        run: symmetry_2jet,
    },
    Check {
        id: "flows.symmetry_involution",
        group: Suite::Flows,
        anchor: "geodesic symmetry is an involution",
        tolerance: 1e-8,
        run: symmetry_involution,
    },
    Check {
        id: "frames.equivariance",
        group: Suite::Frames,
        anchor: "admissible section is equivariant under the linear group",
        tolerance: 1e-13,
        run: equivariance,
    },
    Check {
        id: "frames.frame_independence",
        group: Suite::Frames,
        anchor: "symmetry jet from admissible sections is independent of the frame",
        tolerance: 1e-12,
        run: frame_independence,
    },
    Check {
        id: "frames.holonomic_solve",
        group: Suite::Frames,
        anchor: "section solved from a holonomic symmetry jet is the admissible section",
        tolerance: 1e-12,
        run: holonomic_solve_check,
    },
    Check {
        id: "frames.solve_m_cocycle",
        group: Suite::Frames,
        anchor: "transition jets between second-order frames form a cocycle",
        tolerance: 1e-12,
        run: solve_m_cocycle,
    },
    Check {
        id: "frames.triangle",
        group: Suite::Frames,
        anchor: "connection to admissible section to symmetry jet to connection",
        tolerance: 1e-12,
        run: triangle,
    },
];

/// 64-bit FNV-1a, used to give every check its own random stream.
fn stream_id(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Runs the checks of `suite`, in id order.
pub fn run(ctx: &Ctx, suite: Suite, seed: u64, tol: Option<f64>, timings: bool) -> Vec<CheckRecord> {
    CHECKS
        .iter()
        .filter(|check| suite.includes(check.group))
        .map(|check| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream_id(check.id));
            let tolerance = tol.unwrap_or(check.tolerance);
            let start = Instant::now();
            let outcome = (check.run)(ctx, &mut rng);
            let time_s = timings.then(|| start.elapsed().as_secs_f64());
            let (residual, status, note) = match outcome {
                Ok(Outcome::Measured { residual, note }) => {
                    let ok = residual <= tolerance;
                    let residual = residual.is_finite().then_some(residual);
                    (residual, if ok { CheckStatus::Pass } else { CheckStatus::Fail }, note)
                }
                Ok(Outcome::Skipped(why)) => (None, CheckStatus::Skipped, Some(why)),
                Err(e) => (None, CheckStatus::Fail, Some(e.to_string())),
            };
            let pass = (status != CheckStatus::Skipped).then_some(status == CheckStatus::Pass);
            CheckRecord {
                id: check.id.into(),
                anchor: check.anchor.into(),
                residual,
                tolerance,
                pass,
                status,
                note,
                time_s,
            }
        })
        .collect()
}

fn sjet_roundtrip(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let there = sjet_from_connection(&ctx.c);
    let back = connection_from_sjet(&there);
    let again = sjet_from_connection(&connection_from_sjet(&ctx.s));
    let mut worst = 0.0f64;
    for p in &ctx.points {
        worst = worst.max((back.gamma(p)? - ctx.c.gamma(p)?).max_abs());
        worst = worst.max((again.gamma_s(p)? - ctx.s.gamma_s(p)?).max_abs());
    }
    measured(worst)
}

fn s_morphism(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..POINTS {
        let first = ctx.jet(rng);
        let second = Jet1::new(first.y.clone(), ctx.point(rng), random_matrix(ctx.n(), rng));
        let whole = affine_extension_s(&ctx.c, &second.compose(&first)?)?;
        let parts = affine_extension_s(&ctx.c, &second)?.compose(&affine_extension_s(&ctx.c, &first)?)?;
        worst = worst.max(whole.distance(&parts));
        let id = affine_extension_s(&ctx.c, &Jet1::identity(&first.x))?;
        worst = worst.max(id.distance(&Jet11::identity(&first.x)));
    }
    measured(worst)
}

fn s_minus_identity(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let ext = affine_extension_s(&ctx.c, &Jet1::homothety(p, -1.0))?;
        worst = worst.max(ext.distance(&ctx.s.at(p)?));
    }
    measured(worst)
}

fn torsion(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let e = basis(ctx.n());
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let t = ctx.c.torsion(p)?;
        for a in &e {
            for b in &e {
                worst = worst.max(max_abs(&(torsion_from_sjet(&ctx.s, None, p, a, b)? - t.apply(a, b))));
            }
        }
    }
    measured(worst)
}

fn torsion_kappa(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let e = basis(ctx.n());
    let mut worst = 0.0f64;
    for _ in 0..POINTS {
        let xi = ctx.jet(rng);
        let (tx, ty) = (ctx.c.torsion(&xi.x)?, ctx.c.torsion(&xi.y)?);
        for a in &e {
            for b in &e {
                let expected = &xi.l * tx.apply(a, b) - ty.apply(&(&xi.l * a), &(&xi.l * b));
                let got = torsion_from_sjet(&ctx.s, Some(&xi), &xi.x, a, b)?;
                worst = worst.max(max_abs(&(got - expected)));
            }
        }
    }
    measured(worst)
}

fn covariant_derivative(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let n = ctx.n();
    let texts: Vec<String> = (1..=n).map(|k| format!("x{k}*x{} + 0.5*x{k} - 0.25", k % n + 1)).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let field = ExprVectorField::parse(n, &refs, ctx.spec.domain.clone())?;
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let d = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        worst = worst.max(covariant_forms(&ctx.c, &field, p, &d)?.disagreement());
    }
    measured(worst)
}

fn commutator(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let e = basis(ctx.n());
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let r = classical_tensors(&ctx.c, p)?.r;
        for a in &e {
            for b in &e {
                for z in &e {
                    worst = worst.max(max_abs(&(curvature_from_sjet(&ctx.s, p, a, b, z)? - r.apply(a, b, z))));
                }
            }
        }
    }
    measured(worst)
}

fn homothety(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    if !ctx.torsion_free()? {
        return Ok(Outcome::Skipped("connection has torsion".into()));
    }
    let e = basis(ctx.n());
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let r = classical_tensors(&ctx.c, p)?.r;
        for a in [2.0, 3.0, 0.5] {
            for x in &e {
                for y in &e {
                    for z in &e {
                        let got = curvature_homothety(&ctx.c, a, p, x, y, z)?;
                        worst = worst.max(max_abs(&(got - r.apply(x, y, z))));
                    }
                }
            }
        }
    }
    measured(worst)
}

fn defect_check(
    ctx: &Ctx,
    rng: &mut ChaCha8Rng,
    residual: fn(&ConnectionField, &Jet1, &Vector, &Vector, &Vector) -> Result<DefectResidual>,
) -> Result<Outcome> {
    let e = basis(ctx.n());
    let mut worst = 0.0f64;
    let mut note = None;
    for _ in 0..3 {
        let (xi, why) = torsion_preserving_jet(ctx, rng)?;
        note = note.or(why);
        for x in &e {
            for y in &e {
                for z in &e {
                    let d = residual(&ctx.c, &xi, x, y, z)?;
                    if !d.hypothesis_met {
                        return Ok(Outcome::Measured {
                            residual: f64::INFINITY,
                            note: Some("sampled jet does not preserve the torsion".into()),
                        });
                    }
                    worst = worst.max(d.mismatch());
                }
            }
        }
    }
    Ok(Outcome::Measured { residual: worst, note })
}

fn kappa_defect(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    defect_check(ctx, rng, curvature_defect)
}

fn kappa_star_defect(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    defect_check(ctx, rng, torsion_derivative_defect)
}

fn levi_civita_check(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let Some(metric) = ctx.spec.metric() else {
        return Ok(Outcome::Skipped("spec has no metric".into()));
    };
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let lc = levi_civita(metric, p)?;
        if !lc.is_unique() {
            return Ok(Outcome::Measured {
                residual: f64::INFINITY,
                note: Some(format!("compatibility operator has rank {} of {}", lc.rank, lc.full_rank)),
            });
        }
        worst = worst.max(lc.disagreement()).max(lc.closed_form.symmetry_defect());
        worst = worst.max((lc.closed_form - ctx.c.gamma(p)?).max_abs());
    }
    measured(worst)
}

/// Geodesics only see the symmetric part of Γ, so the reference is the
/// symmetry jet of the torsion-free part of the connection.
fn symmetry_2jet(ctx: &Ctx, _: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in ctx.points.iter().take(3) {
        let numeric = numeric_symmetry_2jet(&ctx.c, p, FD_STEP_2, ctx.h)?;
        let mut reference = ctx.s.at(p)?;
        reference.b = reference.b.symmetric_part();
        worst = worst.max(numeric.distance(&reference));
    }
    let note = (!ctx.torsion_free()?).then(|| "compared with the torsion-free part".to_string());
    Ok(Outcome::Measured { residual: worst, note })
}

fn exp_roundtrip(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let v = ctx.direction(rng, 0.5);
        let y = exp_map_h(&ctx.c, p, &v, ctx.h)?;
        worst = worst.max(max_abs(&(exp_inverse(&ctx.c, p, &y, ctx.h)? - v)));
    }
    measured(worst)
}

fn symmetry_involution(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let y = exp_map_h(&ctx.c, p, &ctx.direction(rng, 0.5), ctx.h)?;
        let twice = geodesic_symmetry(&ctx.c, p, &geodesic_symmetry(&ctx.c, p, &y, ctx.h)?, ctx.h)?;
        worst = worst.max(max_abs(&(twice - y)));
    }
    measured(worst)
}

fn lift_identity(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let xi = ctx.jet(rng);
        let seg = Segment { a: xi.x.clone(), b: &xi.x + ctx.direction(rng, 0.3) };
        let geo = Path::Geodesic { x: xi.x.clone(), v: ctx.direction(rng, 0.3) };
        for path in [Path::Curve(&seg), geo] {
            let lift = d_lift(&ctx.c, &xi, &path, 1.0, ctx.h)?;
            worst = worst.max(lift.distance(&lift_by_transport(&ctx.c, &xi, &path, 1.0, ctx.h)?));
        }
    }
    measured(worst)
}

fn developed_geodesic(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let v = ctx.direction(rng, 0.5);
        let developed = path_from_velocity(&ctx.c, p, &|_| v.clone(), 1.0, ctx.h)?;
        let geo = geodesic_path(&ctx.c, p, &v, 1.0, ctx.h)?;
        for (a, b) in developed.points.iter().zip(&geo.points) {
            worst = worst.max(max_abs(&(a - b)));
        }
    }
    measured(worst)
}

fn triangle(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let s = sjet_from_admissible(&ConnectionSection(&ctx.c), &random_frame(p, rng)?)?;
        worst = worst.max((s.b.transpose().scale(-0.5) - ctx.c.gamma(p)?).max_abs());
    }
    measured(worst)
}

fn equivariance(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let e = random_frame(p, rng)?;
        let a = random_matrix(ctx.n(), rng);
        let moved = admissible_section(&ctx.c, &e.act(&a)?)?;
        worst = worst.max(moved.distance(&admissible_section(&ctx.c, &e)?.act(&a)));
    }
    measured(worst)
}

fn frame_independence(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let reference = ctx.s.at(p)?;
        for _ in 0..10 {
            let s = sjet_from_admissible(&ConnectionSection(&ctx.c), &random_frame(p, rng)?)?;
            worst = worst.max(s.distance(&reference));
        }
    }
    measured(worst)
}

fn holonomic_solve_check(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    if !ctx.torsion_free()? {
        return Ok(Outcome::Skipped("symmetry jets are not holonomic".into()));
    }
    let mut worst = 0.0f64;
    for p in &ctx.points {
        let e = random_frame(p, rng)?;
        let solved = holonomic_solve(&ctx.s.at(p)?, &e)?;
        worst = worst.max(solved.distance(&admissible_section(&ctx.c, &e)?));
    }
    measured(worst)
}

fn solve_m_cocycle(ctx: &Ctx, rng: &mut ChaCha8Rng) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for _ in 0..POINTS {
        let j1 = random_frame11(&ctx.point(rng), rng);
        let j2 = random_frame11(&ctx.point(rng), rng);
        let j3 = random_frame11(&ctx.point(rng), rng);
        let direct = solve_m(&j1, &j3)?;
        let through = solve_m(&j2, &j3)?.compose(&solve_m(&j1, &j2)?)?;
        worst = worst.max(direct.distance(&through));
    }
    measured(worst)
}
