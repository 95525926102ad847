//! The subcommands.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};

use jetconn::connection::{affine_extension_s, affine_extension_s3, classical_tensors, integrability_check};
use jetconn::fields::{load_manifold, ManifoldSpec};
use jetconn::flows::{geodesic_path, geodesic_symmetry};
use jetconn::jets::JET_TOL;
use jetconn::{ConnectionField, Error, Involution, Jet1, Matrix, SymmetryJetField, Vector};

use crate::parse;
use crate::report::{ConfigEcho, SuiteReport};
use crate::suites::{self, Ctx, Suite};
use crate::Status;

fn load(manifold: &str) -> Result<ManifoldSpec, Status> {
    load_manifold(manifold).map_err(|e| {
        eprintln!("error: {e}");
        Status::Usage
    })
}

fn usage(msg: impl std::fmt::Display) -> Status {
    eprintln!("error: {msg}");
    Status::Usage
}

/// Writes `text` to `path`, or to stdout for `None` and `"-"`.
fn emit(path: Option<&str>, text: &str) -> Result<(), Status> {
    let res = match path {
        None | Some("-") => io::stdout().write_all(text.as_bytes()),
        Some(p) => fs::write(p, text),
    };
    res.map_err(|e| usage(format!("cannot write {}: {e}", path.unwrap_or("stdout"))))
}

pub fn verify(
    manifold: &str,
    suite: Suite,
    tol: Option<f64>,
    seed: u64,
    h: f64,
    report: Option<&str>,
    timings: bool,
) -> Status {
    let spec = match load(manifold) {
        Ok(s) => s,
        Err(status) => return status,
    };
    if !(h > 0.0 && h.is_finite()) {
        return usage(format!("step h must be positive, got {h}"));
    }
    if let Some(t) = tol {
        if !(t >= 0.0 && t.is_finite()) {
            return usage(format!("tolerance must be a nonnegative number, got {t}"));
        }
    }
    let ctx = Ctx::new(spec, seed, h);
    let records = suites::run(&ctx, suite, seed, tol, timings);
    let config = ConfigEcho { manifold: manifold.to_string(), suite: suite.name().into(), seed, h, tol };
    let report_data = SuiteReport::new(config, records);

    let mut lines = String::new();
    for r in &report_data.checks {
        let residual = r.residual.map_or("-".to_string(), |v| format!("{v:.3e}"));
        let status = format!("{:?}", r.status).to_uppercase();
        let _ = write!(lines, "{status:<7} {:<28} {residual:>10} <= {:.0e}", r.id, r.tolerance);
        if let Some(note) = &r.note {
            let _ = write!(lines, "  ({note})");
        }
        lines.push('\n');
    }
    let s = report_data.summary;
    let _ = writeln!(lines, "{} checks: {} passed, {} failed, {} skipped", s.total, s.passed, s.failed, s.skipped);
    if report == Some("-") {
        eprint!("{lines}");
    } else {
        print!("{lines}");
    }
    if let Some(path) = report {
        if let Err(status) = emit(Some(path), &report_data.to_json()) {
            return status;
        }
    }
    if report_data.all_passed() {
        Status::Ok
    } else {
        Status::Failed
    }
}

/// Indices of at most `rows` samples out of `len`, evenly strided, always keeping the last.
fn strided(len: usize, rows: usize) -> Vec<usize> {
    if len == 0 {
        return Vec::new();
    }
    let stride = if rows <= 1 { len } else { (len - 1).div_ceil(rows - 1).max(1) };
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().expect("nonempty") != len - 1 {
        idx.push(len - 1);
    }
    idx
}

fn csv_row(out: &mut String, parts: &[&[f64]]) {
    let cells: Vec<String> = parts.iter().flat_map(|p| p.iter().map(|v| format!("{v}"))).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

#[allow(clippy::too_many_arguments)]
pub fn geodesic(
    manifold: &str,
    from: &str,
    dir: &str,
    t: f64,
    h: f64,
    path: Option<&str>,
    symmetry: bool,
    rows: usize,
) -> Status {
    let spec = match load(manifold) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let n = spec.dim;
    let (x, v) = match (parse::vector(from, n), parse::vector(dir, n)) {
        (Ok(x), Ok(v)) => (x, v),
        (Err(e), _) | (_, Err(e)) => return usage(e),
    };
    if !(h > 0.0 && h.is_finite()) || !t.is_finite() || rows == 0 {
        return usage("need a finite --t, positive --h and positive --rows");
    }
    if let Err(e) = spec.domain.check(&x) {
        return usage(e);
    }
    let c = ConnectionField::from_spec(&spec);
    let geo = match geodesic_path(&c, &x, &v, t, h) {
        Ok(g) => g,
        Err(Error::LeftDomain { t }) => {
            eprintln!("error: geodesic left the domain; last valid t = {t}");
            return Status::Failed;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Status::Failed;
        }
    };
    let mut out = String::new();
    let mut header = vec!["t".to_string()];
    for prefix in ["x", "v"].iter().chain(if symmetry { ["r"].iter() } else { [].iter() }) {
        header.extend((1..=n).map(|i| format!("{prefix}{i}")));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for k in strided(geo.times.len(), rows) {
        let (pt, vel) = (&geo.points[k], &geo.velocities[k]);
        if symmetry {
            let r = match geodesic_symmetry(&c, &x, pt, h) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: symmetry at t = {}: {e}", geo.times[k]);
                    return Status::Failed;
                }
            };
            csv_row(&mut out, &[&[geo.times[k]], pt.as_slice(), vel.as_slice(), r.as_slice()]);
        } else {
            csv_row(&mut out, &[&[geo.times[k]], pt.as_slice(), vel.as_slice()]);
        }
    }
    match emit(path, &out) {
        Ok(()) => Status::Ok,
        Err(status) => status,
    }
}

/// A number rounded to 12 significant digits, without a negative zero.
fn num(v: f64) -> String {
    let r: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{}", r + 0.0)
}

fn vec_str(v: &Vector) -> String {
    format!("[{}]", v.iter().map(|a| num(*a)).collect::<Vec<_>>().join(", "))
}

fn mat_str(m: &Matrix) -> String {
    let rows: Vec<String> = m.row_iter().map(|r| r.iter().map(|a| num(*a)).collect::<Vec<_>>().join(", ")).collect();
    format!("[[{}]]", rows.join("], ["))
}

fn basis(n: usize) -> Vec<Vector> {
    (0..n).map(|i| Vector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })).collect()
}

fn inspect_report(spec: &ManifoldSpec, x: &Vector, xi: Option<Jet1>, tol: f64) -> jetconn::Result<String> {
    let n = spec.dim;
    let c = ConnectionField::from_spec(spec);
    let s = SymmetryJetField::from_spec(spec);
    let e = basis(n);
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "manifold {} ({}, dim {n})", spec.name, spec.kind.name());
    let _ = writeln!(w, "point {}", vec_str(x));

    let gamma = c.gamma(x)?;
    let gamma_s = s.gamma_s(x)?;
    let tensors = classical_tensors(&c, x)?;
    for (label, b) in [("Gamma", &gamma), ("Gamma_s", &gamma_s)] {
        let _ = writeln!(w, "{label}:");
        for i in 0..n {
            for j in 0..n {
                let _ = writeln!(w, "  {label}(e{},e{}) = {}", i + 1, j + 1, vec_str(&b.apply(&e[i], &e[j])));
            }
        }
    }
    let _ = writeln!(w, "T:");
    for i in 0..n {
        for j in i + 1..n {
            let _ = writeln!(w, "  T(e{},e{}) = {}", i + 1, j + 1, vec_str(&tensors.t.apply(&e[i], &e[j])));
        }
    }
    let _ = writeln!(w, "R:");
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let r = tensors.r.apply(&e[i], &e[j], &e[k]);
                let _ = writeln!(w, "  R(e{},e{})e{} = {}", i + 1, j + 1, k + 1, vec_str(&r));
            }
        }
    }
    let sx = s.at(x)?;
    let _ = writeln!(w, "symmetry jet: {}", sx.classify(JET_TOL * (1.0 + gamma_s.max_abs())));

    let Some(xi) = xi else {
        return Ok(out);
    };
    let _ = writeln!(w, "jet {} -> {}, L = {}", vec_str(&xi.x), vec_str(&xi.y), mat_str(&xi.l));
    let sj = affine_extension_s(&c, &xi)?;
    let _ = writeln!(w, "S(xi): {}", sj.classify(JET_TOL * (1.0 + sj.b.max_abs())));
    for i in 0..n {
        for j in 0..n {
            let _ = writeln!(w, "  B(e{},e{}) = {}", i + 1, j + 1, vec_str(&sj.b.apply(&e[i], &e[j])));
        }
    }
    let big = affine_extension_s3(&c, &xi)?;
    let _ = writeln!(w, "SS(xi) faces:");
    for (label, face) in [("p", big.p()), ("p*", big.p_star()), ("p**", big.p_star_star())] {
        let _ = writeln!(w, "  |{label} - S(xi)| = {}", num(face.distance(&sj)));
    }
    let _ = writeln!(w, "  |C| = {}", num(big.c.max_abs()));
    let _ = writeln!(w, "flip defects:");
    let _ = writeln!(w, "  |S(xi) - kappa S(xi)| = {}", num(sj.distance(&sj.kappa())));
    let _ = writeln!(w, "  |SS(xi) - kappa SS(xi)| = {}", num(big.distance(&big.involution(Involution::Kappa))));
    let _ = writeln!(
        w,
        "  |SS(xi) - kappa* SS(xi)| = {}",
        num(big.distance(&big.involution(Involution::KappaStar)))
    );
    let report = integrability_check(&c, &xi, tol)?;
    let _ = writeln!(w, "preservation:");
    let _ = writeln!(w, "  torsion residual = {}", num(report.torsion_residual));
    let _ = writeln!(w, "  curvature residual = {}", num(report.curvature_residual));
    let _ = writeln!(w, "verdict: {}", if report.integrable { "in Int(D)" } else { "not in Int(D)" });
    Ok(out)
}

pub fn inspect(manifold: &str, at: &str, to: Option<&str>, xi: Option<&str>, tol: f64) -> Status {
    let spec = match load(manifold) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let n = spec.dim;
    let x = match parse::vector(at, n) {
        Ok(x) => x,
        Err(e) => return usage(e),
    };
    if let Err(e) = spec.domain.check(&x) {
        return usage(e);
    }
    let jet = match (to, xi) {
        (None, None) => None,
        (to, xi) => {
            let y = match to.map(|t| parse::vector(t, n)).transpose() {
                Ok(y) => y.unwrap_or_else(|| x.clone()),
                Err(e) => return usage(e),
            };
            let l = match xi.map(|m| parse::matrix(m, n)).transpose() {
                Ok(l) => l.unwrap_or_else(|| Matrix::identity(n, n)),
                Err(e) => return usage(e),
            };
            if let Err(e) = spec.domain.check(&y) {
                return usage(e);
            }
            let jet = Jet1::new(x.clone(), y, l);
            if !jet.is_invertible() {
                return usage("jet is not invertible");
            }
            Some(jet)
        }
    };
    match inspect_report(&spec, &x, jet, tol) {
        Ok(text) => match emit(None, &text) {
            Ok(()) => Status::Ok,
            Err(status) => status,
        },
        Err(e) => usage(e),
    }
}
