use criterion::{black_box, criterion_group, criterion_main, Criterion};

use jetconn::connection::{affine_extension_s, curvature_from_sjet};
use jetconn::fields::builtin;
use jetconn::flows::{geodesic, DEFAULT_STEP};
use jetconn::{Bilinear, ConnectionField, Jet1, Jet11, Jet111, Matrix, SymmetryJetField, T2Elem, T3Elem, Trilinear, Vector};

fn vec3(a: f64) -> Vector {
    Vector::from_vec(vec![a, -0.5 * a, 0.25 * a])
}

fn mat3(a: f64) -> Matrix {
    Matrix::identity(3, 3) + Matrix::from_fn(3, 3, |r, c| a * (r as f64 - c as f64 + 0.5))
}

fn bil3(a: f64) -> Bilinear {
    Bilinear::from_fn(3, |k, i, j| a * (k + 2 * i + 3 * j) as f64)
}

fn jets(c: &mut Criterion) {
    let (x, y, z) = (vec3(0.1), vec3(0.2), vec3(0.3));
    let a = Jet11::new(x.clone(), y.clone(), mat3(0.1), mat3(0.2), bil3(0.01));
    let b = Jet11::new(y.clone(), z.clone(), mat3(-0.1), mat3(0.05), bil3(-0.02));
    let e = T2Elem::new(x.clone(), vec3(1.0), vec3(-1.0), vec3(0.5));
    c.bench_function("jet11_compose", |bn| bn.iter(|| black_box(&b).compose(black_box(&a)).unwrap()));
    c.bench_function("jet11_act", |bn| bn.iter(|| black_box(&a).act(black_box(&e)).unwrap()));

    let l = [mat3(0.1), mat3(0.2), mat3(0.3)];
    let bs = [bil3(0.01), bil3(0.02), bil3(0.03)];
    let t = Trilinear::from_fn(3, |k, i, j, m| 0.01 * (k + i + j + m) as f64);
    let a3 = Jet111::new(x.clone(), y.clone(), l.clone(), bs.clone(), t.clone());
    let b3 = Jet111::new(y, z, l, bs, t);
    let e3 = T3Elem::new(x, std::array::from_fn(|i| vec3(0.1 * i as f64 + 0.1)));
    c.bench_function("jet111_compose", |bn| bn.iter(|| black_box(&b3).compose(black_box(&a3)).unwrap()));
    c.bench_function("jet111_act", |bn| bn.iter(|| black_box(&a3).act(black_box(&e3)).unwrap()));
}

fn connections(c: &mut Criterion) {
    let spec = builtin("sphere_stereo").unwrap();
    let conn = ConnectionField::from_spec(&spec);
    let s = SymmetryJetField::from_spec(&spec);
    let x = Vector::from_vec(vec![0.2, -0.1]);
    let (u, v) = (Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0]));
    let xi = Jet1::new(x.clone(), Vector::from_vec(vec![0.1, 0.3]), Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    c.bench_function("affine_extension_sphere", |bn| bn.iter(|| affine_extension_s(&conn, black_box(&xi)).unwrap()));
    c.bench_function("curvature_from_sjet_sphere", |bn| {
        bn.iter(|| curvature_from_sjet(&s, black_box(&x), &u, &v, &u).unwrap())
    });
    c.bench_function("geodesic_sphere_t1", |bn| {
        bn.iter(|| geodesic(&conn, black_box(&x), &(&u * 0.3), 1.0, DEFAULT_STEP).unwrap())
    });
}

criterion_group!(benches, jets, connections);
criterion_main!(benches);
