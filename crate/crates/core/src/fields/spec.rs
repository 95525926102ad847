//! Manifold specifications: chart dimension, domain, and the defining field
//! (metric, Christoffel symbols, or symmetry-jet bilinear block).
//!
//! Spec files use a restricted TOML subset: the tables `[manifold]`, `[domain]`
//! and `[fields]`, with string, number and number-array values only.
//!
//! ```toml
//! [manifold]
//! name = "sphere_stereo"
//! dim = 2
//! kind = "metric"
//!
//! [domain]
//! type = "ball"
//! radius = 0.9
//!
//! [fields]
//! g11 = "4/(1+x1^2+x2^2)^2"
//! g12 = "0"
//! g22 = "4/(1+x1^2+x2^2)^2"
//! ```
//!
//! Field names: metrics use `gij` (`i ≤ j`, diagonal required, off-diagonal
//! default `0`); Christoffel symbols use `Gk_ij` for `Γ^k(e_i, e_j)`, where the
//! first argument is the differentiation direction; symmetry jets use `Sk_ij`
//! for the k-th component of `Γ_s(e_i, e_j)`, first argument the vector slot.
//! Missing Christoffel and symmetry-jet coefficients are zero. Indices are 1-based.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::domain::Domain;
use super::expr::{parse_expr, Expr, Program};
use super::sources::{BilinearField, ExprBilinear, MetricChristoffel, MetricField, Signature};
use crate::error::{Error, Result};
use crate::multilinear::Vector;

/// Largest chart dimension accepted in spec files (single-digit field indices).
pub const MAX_DIM: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecKind {
    Metric,
    Christoffel,
    SymmetryJet,
}

impl SpecKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecKind::Metric => "metric",
            SpecKind::Christoffel => "christoffel",
            SpecKind::SymmetryJet => "symmetry_jet",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "metric" => Some(SpecKind::Metric),
            "christoffel" => Some(SpecKind::Christoffel),
            "symmetry_jet" => Some(SpecKind::SymmetryJet),
            _ => None,
        }
    }
}

/// A validated manifold specification.
#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    pub name: String,
    pub dim: usize,
    pub kind: SpecKind,
    pub domain: Domain,
    pub signature: Signature,
    /// Field expressions as given, keyed by field name.
    pub fields: BTreeMap<String, String>,
    metric: Option<Arc<MetricField>>,
    bilinear: Arc<dyn BilinearField>,
}

impl ManifoldSpec {
    /// The defining metric, for metric specs.
    pub fn metric(&self) -> Option<&Arc<MetricField>> {
        self.metric.as_ref()
    }

    /// The defining bilinear field: Christoffel symbols `Γ(d, v)` for metric and
    /// Christoffel specs, the symmetry-jet block `Γ_s(v, d)` for symmetry-jet specs.
    pub fn defining_field(&self) -> &Arc<dyn BilinearField> {
        &self.bilinear
    }

    /// Deterministic sample points well inside the domain.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.domain.sample(self.dim, 0.6, &mut rng)).collect()
    }

    /// Radius of a ball around sample points inside which exponential-map
    /// computations are expected to stay in a normal neighborhood.
    pub fn normal_radius(&self) -> f64 {
        0.5 * self.domain.inner_radius().min(1.0)
    }
}

fn validation(msgs: Vec<String>) -> Error {
    Error::Validation(msgs)
}

fn index_digit(c: char, n: usize) -> Option<usize> {
    let d = c.to_digit(10)? as usize;
    (1..=n).contains(&d).then_some(d - 1)
}

/// Parses a field name of the form `Pk_ij` with prefix `P`.
fn parse_coeff_name(key: &str, prefix: char, n: usize) -> Option<(usize, usize, usize)> {
    let c: Vec<char> = key.chars().collect();
    if c.len() != 5 || c[0] != prefix || c[2] != '_' {
        return None;
    }
    Some((index_digit(c[1], n)?, index_digit(c[3], n)?, index_digit(c[4], n)?))
}

fn parse_metric_name(key: &str, n: usize) -> Option<(usize, usize)> {
    let c: Vec<char> = key.chars().collect();
    if c.len() != 3 || c[0] != 'g' {
        return None;
    }
    Some((index_digit(c[1], n)?, index_digit(c[2], n)?))
}

/// Builds and validates a spec from its parts.
pub fn build_spec(
    name: &str,
    dim: usize,
    kind: SpecKind,
    domain: Domain,
    signature: Signature,
    fields: BTreeMap<String, String>,
) -> Result<ManifoldSpec> {
    let mut errors = Vec::new();
    if dim == 0 || dim > MAX_DIM {
        return Err(validation(vec![format!("dim must be between 1 and {MAX_DIM}, got {dim}")]));
    }
    match &domain {
        Domain::Ball { center, radius } => {
            if center.len() != dim {
                errors.push(format!("domain center has {} entries, expected {dim}", center.len()));
            }
            if !(*radius > 0.0) {
                errors.push(format!("domain radius must be positive, got {radius}"));
            }
        }
        Domain::Box { lo, hi } => {
            if lo.len() != dim || hi.len() != dim {
                errors.push(format!("domain bounds must have {dim} entries"));
            } else if lo.iter().zip(hi.iter()).any(|(l, h)| !(l < h)) {
                errors.push("domain box is empty".to_string());
            }
        }
        Domain::Whole => {}
    }
    let mut parsed: BTreeMap<String, Expr> = BTreeMap::new();
    for (key, text) in &fields {
        match parse_expr(text, Some(dim)) {
            Ok(e) => {
                parsed.insert(key.clone(), e);
            }
            Err(e) => errors.push(format!("field {key}: {e}")),
        }
    }
    let zero = Expr::Num(0.0);
    let (metric, bilinear): (Option<Arc<MetricField>>, Option<Arc<dyn BilinearField>>) = match kind {
        SpecKind::Metric => {
            let mut entries: BTreeMap<(usize, usize), (String, Expr)> = BTreeMap::new();
            for (key, e) in &parsed {
                match parse_metric_name(key, dim) {
                    None => errors.push(format!("unknown metric field {key}")),
                    Some((i, j)) => {
                        let k = (i.min(j), i.max(j));
                        if let Some((other, prev)) = entries.get(&k) {
                            if prev != e {
                                errors.push(format!("asymmetric metric: {other} and {key} differ"));
                            }
                        } else {
                            entries.insert(k, (key.clone(), e.clone()));
                        }
                    }
                }
            }
            for i in 0..dim {
                if !entries.contains_key(&(i, i)) && fields.keys().all(|k| parse_metric_name(k, dim).is_some()) {
                    errors.push(format!("missing metric field g{}{}", i + 1, i + 1));
                }
            }
            if errors.is_empty() {
                let upper = (0..dim)
                    .map(|i| {
                        (i..dim)
                            .map(|j| Program::compile(entries.get(&(i, j)).map_or(&zero, |(_, e)| e)))
                            .collect()
                    })
                    .collect();
                let m = Arc::new(MetricField::new(dim, upper, domain.clone(), signature));
                let c: Arc<dyn BilinearField> = Arc::new(MetricChristoffel::new(m.clone()));
                (Some(m), Some(c))
            } else {
                (None, None)
            }
        }
        SpecKind::Christoffel | SpecKind::SymmetryJet => {
            let prefix = if kind == SpecKind::Christoffel { 'G' } else { 'S' };
            let mut comps = vec![Program::compile(&zero); dim * dim * dim];
            for (key, e) in &parsed {
                match parse_coeff_name(key, prefix, dim) {
                    None => errors.push(format!("unknown {} field {key}", kind.name())),
                    Some((k, i, j)) => comps[(k * dim + i) * dim + j] = Program::compile(e),
                }
            }
            (None, Some(Arc::new(ExprBilinear::new(dim, comps, domain.clone())) as Arc<dyn BilinearField>))
        }
    };
    if !errors.is_empty() {
        return Err(validation(errors));
    }
    let spec = ManifoldSpec {
        name: name.to_string(),
        dim,
        kind,
        domain,
        signature,
        fields,
        metric,
        bilinear: bilinear.expect("built when valid"),
    };
    let mut probe = vec![spec.domain.center(dim)];
    probe.extend(spec.sample_points(8, 0));
    for x in &probe {
        if let Some(m) = &spec.metric {
            match m.check_nondegenerate(x) {
                Ok(_) => {}
                Err(Error::Validation(v)) => errors.extend(v),
                Err(e) => errors.push(format!("metric at {:?}: {e}", x.as_slice())),
            }
        }
        if let Err(e) = spec.bilinear.value(x) {
            errors.push(format!("field evaluation at {:?}: {e}", x.as_slice()));
        }
    }
    if !errors.is_empty() {
        errors.dedup();
        return Err(validation(errors));
    }
    Ok(spec)
}

fn value_desc(v: &toml::Value) -> &'static str {
    match v {
        toml::Value::String(_) => "string",
        toml::Value::Integer(_) => "integer",
        toml::Value::Float(_) => "float",
        toml::Value::Boolean(_) => "boolean",
        toml::Value::Datetime(_) => "datetime",
        toml::Value::Array(_) => "array",
        toml::Value::Table(_) => "table",
    }
}

fn as_number(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::Float(f) => Some(*f),
        _ => None,
    }
}

fn as_vector(v: &toml::Value) -> Option<Vector> {
    let arr = v.as_array()?;
    let xs: Option<Vec<f64>> = arr.iter().map(as_number).collect();
    xs.map(Vector::from_vec)
}

/// Parses a spec from the text of a spec file.
pub fn parse_spec(text: &str) -> Result<ManifoldSpec> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| validation(vec![format!("malformed spec: {}", e.message())]))?;
    let mut errors = Vec::new();
    for (key, val) in &doc {
        if !matches!(key.as_str(), "manifold" | "domain" | "fields") {
            errors.push(format!("unknown table [{key}]"));
        } else if let Some(t) = val.as_table() {
            for (k, v) in t {
                let ok = match v {
                    toml::Value::String(_) | toml::Value::Integer(_) | toml::Value::Float(_) => true,
                    toml::Value::Array(a) => a.iter().all(|x| as_number(x).is_some()),
                    _ => false,
                };
                if !ok {
                    errors.push(format!("{key}.{k}: unsupported {} value", value_desc(v)));
                }
            }
        } else {
            errors.push(format!("{key} must be a table"));
        }
    }
    let empty = toml::Table::new();
    let table = |name: &str| doc.get(name).and_then(|v| v.as_table()).unwrap_or(&empty);
    let manifold = table("manifold");
    let name = manifold.get("name").and_then(|v| v.as_str()).unwrap_or("unnamed").to_string();
    let dim = match manifold.get("dim").and_then(|v| v.as_integer()) {
        Some(d) if d >= 1 => d as usize,
        _ => {
            errors.push("manifold.dim must be a positive integer".into());
            0
        }
    };
    let kind = match manifold.get("kind").and_then(|v| v.as_str()) {
        Some(k) => SpecKind::parse(k).unwrap_or_else(|| {
            errors.push(format!("manifold.kind '{k}' is not one of metric, christoffel, symmetry_jet"));
            SpecKind::Metric
        }),
        None => {
            errors.push("manifold.kind is required".into());
            SpecKind::Metric
        }
    };
    let signature = match manifold.get("signature").and_then(|v| v.as_str()) {
        None | Some("riemannian") => Signature::Riemannian,
        Some("any") | Some("nondegenerate") => Signature::Nondegenerate,
        Some(s) => {
            errors.push(format!("manifold.signature '{s}' is not riemannian or any"));
            Signature::Riemannian
        }
    };
    let dt = table("domain");
    let domain = match dt.get("type").and_then(|v| v.as_str()).unwrap_or("whole") {
        "whole" => Domain::Whole,
        "ball" => {
            let radius = dt.get("radius").and_then(as_number).unwrap_or_else(|| {
                errors.push("domain.radius is required for a ball".into());
                1.0
            });
            let center = dt.get("center").and_then(as_vector).unwrap_or_else(|| Vector::zeros(dim));
            Domain::Ball { center, radius }
        }
        "box" => {
            let lo = dt.get("lo").and_then(as_vector);
            let hi = dt.get("hi").and_then(as_vector);
            match (lo, hi) {
                (Some(lo), Some(hi)) => Domain::Box { lo, hi },
                _ => {
                    errors.push("domain.lo and domain.hi are required for a box".into());
                    Domain::Whole
                }
            }
        }
        other => {
            errors.push(format!("domain.type '{other}' is not whole, ball or box"));
            Domain::Whole
        }
    };
    let mut fields = BTreeMap::new();
    for (k, v) in table("fields") {
        match v.as_str() {
            Some(s) => {
                fields.insert(k.clone(), s.to_string());
            }
            None => match as_number(v) {
                Some(x) => {
                    fields.insert(k.clone(), format!("{x:?}"));
                }
                None => errors.push(format!("fields.{k} must be an expression string")),
            },
        }
    }
    if !errors.is_empty() {
        return Err(validation(errors));
    }
    build_spec(&name, dim, kind, domain, signature, fields)
}

/// Loads a spec from a file path or a builtin name.
pub fn load_manifold(arg: &str) -> Result<ManifoldSpec> {
    let path = Path::new(arg);
    if path.exists() || arg.ends_with(".toml") {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{arg}: {e}")))?;
        return parse_spec(&text);
    }
    builtin(arg)
}

/// Names of the builtin specs (parameterized families shown with their default arguments).
pub const BUILTINS: [&str; 7] = [
    "euclidean_2",
    "euclidean_3",
    "sphere_stereo",
    "poincare_disk",
    "flat_torsion_c",
    "poly_random(1)",
    "poly_random_torsion(1)",
];

fn call_args(name: &str, head: &str) -> Option<Vec<String>> {
    let rest = name.strip_prefix(head)?;
    if rest.is_empty() {
        return Some(Vec::new());
    }
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(|s| s.trim().to_string()).collect())
}

fn diag_metric(n: usize, factor: &str) -> BTreeMap<String, String> {
    let mut f = BTreeMap::new();
    for i in 1..=n {
        for j in i..=n {
            f.insert(format!("g{i}{j}"), if i == j { factor.to_string() } else { "0".to_string() });
        }
    }
    f
}

/// Default torsion constant of `flat_torsion_c`.
pub const DEFAULT_TORSION_C: f64 = 0.5;

fn bad_builtin(name: &str) -> Error {
    Error::Validation(vec![format!(
        "unknown manifold '{name}'; builtins are euclidean_n, sphere_stereo, poincare_disk, flat_torsion_c[(c)], poly_random(seed[, dim]), poly_random_torsion(seed[, dim])"
    )])
}

/// Random quadratic polynomial in `x1..xn` with coefficients in `[-scale, scale]`.
fn random_quadratic(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> String {
    let mut terms = vec![format!("{:?}", rng.gen_range(-scale..scale))];
    for a in 1..=n {
        terms.push(format!("{:?}*x{a}", rng.gen_range(-scale..scale)));
    }
    for a in 1..=n {
        for b in a..=n {
            terms.push(format!("{:?}*x{a}*x{b}", rng.gen_range(-scale..scale)));
        }
    }
    terms.join(" + ")
}

/// Random quadratic Christoffel symbols on the cube `[-1, 1]ⁿ`: symmetric in the
/// two lower indices, plus an antisymmetric part when `torsion` is set.
fn poly_random(seed: u64, n: usize, torsion: bool) -> BTreeMap<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = BTreeMap::new();
    for k in 1..=n {
        for i in 1..=n {
            for j in i..=n {
                let sym = random_quadratic(n, 0.25, &mut rng);
                if torsion && i != j {
                    let anti = random_quadratic(n, 0.25, &mut rng);
                    f.insert(format!("G{k}_{i}{j}"), format!("{sym} + ({anti})"));
                    f.insert(format!("G{k}_{j}{i}"), format!("{sym} - ({anti})"));
                } else {
                    f.insert(format!("G{k}_{i}{j}"), sym.clone());
                    if i != j {
                        f.insert(format!("G{k}_{j}{i}"), sym);
                    }
                }
            }
        }
    }
    f
}

/// Builds a builtin spec by name.
pub fn builtin(name: &str) -> Result<ManifoldSpec> {
    let name = name.trim();
    if let Some(d) = name.strip_prefix("euclidean_") {
        let n: usize = d.parse().map_err(|_| bad_builtin(name))?;
        return build_spec(name, n, SpecKind::Metric, Domain::Whole, Signature::Riemannian, diag_metric(n, "1"));
    }
    match name {
        "sphere_stereo" => {
            return build_spec(
                name,
                2,
                SpecKind::Metric,
                Domain::ball(2, 0.9),
                Signature::Riemannian,
                diag_metric(2, "4/(1 + x1^2 + x2^2)^2"),
            )
        }
        "poincare_disk" => {
            return build_spec(
                name,
                2,
                SpecKind::Metric,
                Domain::ball(2, 0.9),
                Signature::Riemannian,
                diag_metric(2, "4/(1 - x1^2 - x2^2)^2"),
            )
        }
        _ => {}
    }
    if let Some(args) = call_args(name, "flat_torsion_c") {
        let c = match args.as_slice() {
            [] => DEFAULT_TORSION_C,
            [c] => c.parse::<f64>().map_err(|_| bad_builtin(name))?,
            _ => return Err(bad_builtin(name)),
        };
        let mut f = BTreeMap::new();
        f.insert("G1_12".to_string(), format!("{c:?}"));
        f.insert("G1_21".to_string(), format!("{:?}", -c));
        return build_spec(name, 2, SpecKind::Christoffel, Domain::cube(2, 1.0), Signature::Riemannian, f);
    }
    for (head, torsion) in [("poly_random_torsion", true), ("poly_random", false)] {
        if let Some(args) = call_args(name, head) {
            let (seed, n) = match args.as_slice() {
                [s] => (s.parse::<u64>().map_err(|_| bad_builtin(name))?, 2),
                [s, d] => (
                    s.parse::<u64>().map_err(|_| bad_builtin(name))?,
                    d.parse::<usize>().map_err(|_| bad_builtin(name))?,
                ),
                _ => return Err(bad_builtin(name)),
            };
            return build_spec(name, n, SpecKind::Christoffel, Domain::cube(n, 1.0), Signature::Riemannian, poly_random(seed, n, torsion));
        }
    }
    Err(bad_builtin(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_has_zero_christoffels() {
        let s = builtin("euclidean_2").unwrap();
        let j = s.defining_field().taylor(&Vector::from_vec(vec![0.3, 4.0]), 2).unwrap();
        assert_eq!(j.value.max_abs(), 0.0);
        assert!(j.d1.iter().chain(&j.d2).all(|b| b.max_abs() == 0.0));
    }

    #[test]
    fn sphere_metric_expression() {
        let s = builtin("sphere_stereo").unwrap();
        assert_eq!(s.kind, SpecKind::Metric);
        let g = s.metric().unwrap().value(&Vector::zeros(2)).unwrap();
        assert_eq!(g[(0, 0)], 4.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn file_round_trip() {
        let text = r#"
[manifold]
name = "sphere_stereo"
dim = 2
kind = "metric"

[domain]
type = "ball"
radius = 0.9

[fields]
g11 = "4/(1+x1^2+x2^2)^2"
g12 = "0"
g22 = "4/(1+x1^2+x2^2)^2"
"#;
        let s = parse_spec(text).unwrap();
        let x = Vector::from_vec(vec![0.2, -0.3]);
        let a = s.defining_field().taylor(&x, 1).unwrap();
        let b = builtin("sphere_stereo").unwrap().defining_field().taylor(&x, 1).unwrap();
        assert!((a.value - b.value).max_abs() < 1e-15);
    }

    #[test]
    fn asymmetric_metric_is_rejected() {
        let text = r#"
[manifold]
dim = 2
kind = "metric"
[fields]
g11 = "1"
g12 = "x1"
g21 = "x2"
g22 = "1"
"#;
        match parse_spec(text) {
            Err(Error::Validation(msgs)) => assert!(msgs.iter().any(|m| m.contains("asymmetric")), "{msgs:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_tables_are_listed() {
        let text = r#"
[manifold]
dim = 2
kind = "christoffel"
flag = true
[fields]
G1_12 = "x1 +"
H1 = "0"
[extra]
a = 1
"#;
        match parse_spec(text) {
            Err(Error::Validation(msgs)) => {
                assert!(msgs.iter().any(|m| m.contains("[extra]")));
                assert!(msgs.iter().any(|m| m.contains("boolean")));
            }
            other => panic!("{other:?}"),
        }
        let text = "[manifold]\ndim = 2\nkind = \"christoffel\"\n[fields]\nG1_12 = \"x1 +\"\nH1 = \"0\"\n";
        match parse_spec(text) {
            Err(Error::Validation(msgs)) => {
                assert!(msgs.iter().any(|m| m.contains("G1_12") && m.contains("column 5")), "{msgs:?}");
                assert!(msgs.iter().any(|m| m.contains("H1")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn indefinite_metric_needs_signature_flag() {
        let base = "[manifold]\ndim = 2\nkind = \"metric\"\n[fields]\ng11 = \"1\"\ng22 = \"-1\"\n";
        assert!(matches!(parse_spec(base), Err(Error::Validation(_))));
        let flagged = base.replace("kind = \"metric\"", "kind = \"metric\"\nsignature = \"any\"");
        assert!(parse_spec(&flagged).is_ok());
    }

    #[test]
    fn builtin_families() {
        let t = builtin("flat_torsion_c(0.25)").unwrap();
        let g = t.defining_field().value(&Vector::zeros(2)).unwrap();
        assert_eq!((g.get(0, 0, 1), g.get(0, 1, 0)), (0.25, -0.25));
        let p = builtin("poly_random(3)").unwrap();
        let x = Vector::from_vec(vec![0.1, 0.2]);
        assert!(p.defining_field().value(&x).unwrap().symmetry_defect() < 1e-15);
        let q = builtin("poly_random_torsion(3, 3)").unwrap();
        assert_eq!(q.dim, 3);
        assert!(q.defining_field().value(&Vector::from_vec(vec![0.1, 0.2, 0.3])).unwrap().symmetry_defect() > 1e-3);
        assert!(builtin("poly_random(x)").is_err());
        assert!(builtin("nowhere").is_err());
        assert_eq!(
            builtin("poly_random(3)").unwrap().fields,
            builtin("poly_random(3)").unwrap().fields
        );
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_manifold("/nonexistent/spec.toml"), Err(Error::Io(_))));
    }
}
