use super::*;
use crate::connection::{integrability_check, psi_involution, sjet_from_connection};
use crate::fields::builtin;

fn v(a: &[f64]) -> Vector {
    Vector::from_vec(a.to_vec())
}

fn conn(name: &str) -> ConnectionField {
    ConnectionField::from_spec(&builtin(name).unwrap())
}

fn rotation(angle: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()])
}

/// The differential at `x` of the rotation of the chart about the origin.
fn rotation_jet(x: &Vector, angle: f64) -> Jet1 {
    let q = rotation(angle);
    Jet1::new(x.clone(), &q * x, q)
}

const TWO_DIM: [&str; 5] = ["euclidean_2", "sphere_stereo", "poincare_disk", "flat_torsion_c", "poly_random(1)"];

#[test]
fn flat_exp_is_translation() {
    let c = conn("euclidean_2");
    let x = v(&[0.3, -1.2]);
    let d = v(&[2.0, 0.7]);
    assert!(max_abs(&(exp_map(&c, &x, &d).unwrap() - (&x + &d))) < 1e-13);
    assert!(max_abs(&(exp_inverse(&c, &x, &(&x + &d), DEFAULT_STEP).unwrap() - &d)) < 1e-13);
}

#[test]
fn sphere_geodesics_through_origin_are_radial() {
    let c = conn("sphere_stereo");
    let d = v(&[0.3, 0.4]);
    let path = geodesic_path(&c, &Vector::zeros(2), &d, 1.0, DEFAULT_STEP).unwrap();
    for p in &path.points {
        assert!((p[0] * d[1] - p[1] * d[0]).abs() < 1e-14);
    }
    // Arc length 2·atan(r) equals 2|d| since the metric is 4δ at the origin.
    let r = path.end().norm();
    assert!((r - d.norm().tan()).abs() < 1e-12);
}

#[test]
fn homogeneity_of_geodesics() {
    let c = conn("poly_random(1)");
    let x = v(&[0.1, -0.2]);
    let d = v(&[0.3, 0.25]);
    let a = geodesic(&c, &x, &(&d * 2.0), 0.5, DEFAULT_STEP).unwrap();
    let b = geodesic(&c, &x, &d, 1.0, DEFAULT_STEP).unwrap();
    assert!(max_abs(&(a - b)) < 1e-8);
}

#[test]
fn integrator_is_fourth_order() {
    let c = conn("poly_random(1)");
    let x = v(&[0.1, -0.2]);
    let d = v(&[0.6, 0.5]);
    let reference = geodesic(&c, &x, &d, 1.0, 0.1 / 64.0).unwrap();
    let e1 = max_abs(&(geodesic(&c, &x, &d, 1.0, 0.1).unwrap() - &reference));
    let e2 = max_abs(&(geodesic(&c, &x, &d, 1.0, 0.05).unwrap() - &reference));
    assert!(e1 / e2 >= 12.0, "ratio {}", e1 / e2);
}

#[test]
fn geodesic_energy_is_conserved() {
    for name in ["sphere_stereo", "poincare_disk"] {
        let spec = builtin(name).unwrap();
        let c = ConnectionField::from_spec(&spec);
        let metric = spec.metric().unwrap();
        let path = geodesic_path(&c, &v(&[0.2, -0.1]), &v(&[0.3, 0.2]), 1.0, DEFAULT_STEP).unwrap();
        let energy = |k: usize| {
            let g = metric.value(&path.points[k]).unwrap();
            path.velocities[k].dot(&(g * &path.velocities[k]))
        };
        let e0 = energy(0);
        for k in 0..path.points.len() {
            assert!((energy(k) - e0).abs() < 1e-8, "{name}");
        }
    }
}

#[test]
fn leaving_the_domain_reports_the_last_valid_time() {
    let c = conn("poincare_disk");
    match geodesic(&c, &Vector::zeros(2), &v(&[5.0, 0.0]), 1.0, 1e-2) {
        Err(Error::LeftDomain { t }) => assert!(t > 0.0 && t < 1.0),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn exp_inverse_round_trips() {
    for name in TWO_DIM {
        let c = conn(name);
        let x = v(&[0.15, -0.1]);
        for d in [v(&[0.2, 0.1]), v(&[-0.3, 0.05]), v(&[0.01, -0.02])] {
            let y = exp_map(&c, &x, &d).unwrap();
            let back = exp_inverse(&c, &x, &y, DEFAULT_STEP).unwrap();
            assert!(max_abs(&(&back - &d)) < 1e-8, "{name}");
            assert!(max_abs(&(exp_map(&c, &x, &back).unwrap() - &y)) < 1e-10, "{name}");
        }
    }
}

#[test]
fn poincare_radial_inverse_stays_on_the_ray() {
    let c = conn("poincare_disk");
    let y = v(&[0.3, 0.4]);
    let back = exp_inverse(&c, &Vector::zeros(2), &y, DEFAULT_STEP).unwrap();
    assert!((back[0] * y[1] - back[1] * y[0]).abs() < 1e-12);
    // Hyperbolic distance 2·atanh(r) equals 2|V| since the metric is 4δ at the origin.
    assert!((back.norm() - (0.5f64).atanh()).abs() < 1e-10);
}

#[test]
fn flat_geodesic_symmetry_is_point_reflection() {
    let c = conn("euclidean_2");
    let x = v(&[0.5, 0.5]);
    let y = v(&[0.9, -0.2]);
    let r = geodesic_symmetry(&c, &x, &y, DEFAULT_STEP).unwrap();
    assert!(max_abs(&(r - (&x * 2.0 - &y))) < 1e-13);
    let j = numeric_symmetry_2jet(&c, &x, FD_STEP_2, DEFAULT_STEP).unwrap();
    assert!(max_abs_mat(&(j.l1 + Matrix::identity(2, 2))) < 1e-9);
    assert!(j.b.max_abs() < 1e-6);
}

#[test]
fn geodesic_symmetry_is_an_involution() {
    for name in TWO_DIM {
        let c = conn(name);
        let x = v(&[0.1, 0.2]);
        let y = v(&[0.3, 0.05]);
        let r = geodesic_symmetry(&c, &x, &y, DEFAULT_STEP).unwrap();
        let back = geodesic_symmetry(&c, &x, &r, DEFAULT_STEP).unwrap();
        assert!(max_abs(&(back - &y)) < 1e-8, "{name}");
    }
}

#[test]
fn numeric_symmetry_jet_matches_the_symmetry_jet() {
    for name in ["sphere_stereo", "poly_random(1)"] {
        let c = conn(name);
        let s = sjet_from_connection(&c);
        for x in [Vector::zeros(2), v(&[0.3, -0.2])] {
            let j = numeric_symmetry_2jet(&c, &x, FD_STEP_2, DEFAULT_STEP).unwrap();
            assert!(max_abs_mat(&(&j.l1 + Matrix::identity(2, 2))) < 1e-6, "{name}");
            assert!((j.b - s.gamma_s(&x).unwrap()).max_abs() < 1e-4, "{name}");
        }
    }
}

#[test]
fn flat_transport_is_identity() {
    let c = conn("euclidean_2");
    let seg = Segment { a: v(&[0.0, 0.0]), b: v(&[1.0, 2.0]) };
    let f = parallel_transport(&c, &Path::Curve(&seg), 1.0, DEFAULT_STEP).unwrap();
    assert!(max_abs_mat(&(f.end() - Matrix::identity(2, 2))) < 1e-15);
}

fn circle(radius: f64) -> FnCurve<impl Fn(f64) -> (Vector, Vector)> {
    let w = 2.0 * std::f64::consts::PI;
    FnCurve::new(2, move |t: f64| {
        let (s, co) = (w * t).sin_cos();
        (v(&[radius * co, radius * s]), v(&[-radius * w * s, radius * w * co]))
    })
}

#[test]
fn transport_preserves_the_round_metric() {
    let spec = builtin("sphere_stereo").unwrap();
    let c = ConnectionField::from_spec(&spec);
    let metric = spec.metric().unwrap();
    let curve = FnCurve::new(2, |t: f64| (v(&[0.1 + 0.3 * t, -0.2 + 0.2 * t * t]), v(&[0.3, 0.4 * t])));
    let f = parallel_transport(&c, &Path::Curve(&curve), 1.0, DEFAULT_STEP).unwrap();
    let g0 = metric.value(&f.points[0]).unwrap();
    for (p, tau) in f.points.iter().zip(&f.taus) {
        let g = metric.value(p).unwrap();
        assert!(max_abs_mat(&(tau.transpose() * g * tau - &g0)) < 1e-8);
    }
    assert!(f.horizontality_residual(&c).unwrap() < 1e-5);
}

#[test]
fn sphere_holonomy_around_a_circle_is_the_enclosed_area() {
    let c = conn("sphere_stereo");
    let rho: f64 = 0.2;
    let curve = circle(rho);
    let f = parallel_transport(&c, &Path::Curve(&curve), 1.0, DEFAULT_STEP).unwrap();
    let tau = f.end();
    // The chart metric is conformal, so the loop transport is a rotation by the enclosed area.
    let area = 4.0 * std::f64::consts::PI * rho * rho / (1.0 + rho * rho);
    let angle = tau[(1, 0)].atan2(tau[(0, 0)]);
    assert!((angle.abs() - area).abs() < 1e-8, "angle {angle} area {area}");
    assert!(max_abs_mat(&(tau - rotation(angle))) < 1e-8);
    assert!(max_abs_mat(&(tau - Matrix::identity(2, 2))) > 0.01);
    assert!(f.horizontality_residual(&c).unwrap() < 1e-5);
}

#[test]
fn transport_along_geodesic_carries_its_velocity() {
    let c = conn("poincare_disk");
    let x = v(&[0.1, 0.2]);
    let d = v(&[0.4, -0.3]);
    let f = parallel_transport(&c, &Path::Geodesic { x: x.clone(), v: d.clone() }, 1.0, DEFAULT_STEP).unwrap();
    for (tau, vel) in f.taus.iter().zip(&f.velocities) {
        assert!(max_abs(&(tau * &d - vel)) < 1e-12);
    }
}

#[test]
fn developing_constant_velocity_gives_geodesics() {
    for name in TWO_DIM {
        let c = conn(name);
        let x = v(&[0.1, -0.15]);
        let d = v(&[0.3, 0.2]);
        let p = path_from_velocity(&c, &x, &|_| d.clone(), 1.0, DEFAULT_STEP).unwrap();
        let g = geodesic_path(&c, &x, &d, 1.0, DEFAULT_STEP).unwrap();
        for (a, b) in p.points.iter().zip(&g.points) {
            assert!(max_abs(&(a - b)) < 1e-8, "{name}");
        }
    }
}

#[test]
fn developing_zero_velocity_is_constant() {
    let c = conn("sphere_stereo");
    let x = v(&[0.2, 0.1]);
    let p = path_from_velocity(&c, &x, &|_| Vector::zeros(2), 1.0, DEFAULT_STEP).unwrap();
    assert!(p.points.iter().all(|q| q == &x));
}

#[test]
fn developed_path_round_trip() {
    let c = conn("poly_random(1)");
    let vel = |t: f64| v(&[0.3 * (2.0 * t).cos(), 0.2 + 0.1 * t]);
    let p = path_from_velocity(&c, &v(&[0.0, 0.1]), &vel, 1.0, DEFAULT_STEP).unwrap();
    assert!(p.round_trip_residual(&vel).unwrap() < 1e-8);
}

#[test]
fn flat_lift_is_constant() {
    let c = conn("euclidean_2");
    let xi = Jet1::new(v(&[0.0, 0.0]), v(&[1.0, 1.0]), Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, -1.0]));
    let seg = Segment { a: xi.x.clone(), b: v(&[0.5, 0.3]) };
    let lift = d_lift(&c, &xi, &Path::Curve(&seg), 1.0, DEFAULT_STEP).unwrap();
    for j in &lift.jets {
        assert!(max_abs_mat(&(&j.l - &xi.l)) < 1e-14);
        assert!(max_abs(&(&j.y - &xi.y - &xi.l * (&j.x - &xi.x))) < 1e-12);
    }
}

#[test]
fn identity_lift_along_a_geodesic_stays_identity() {
    let c = conn("sphere_stereo");
    let x = v(&[0.2, -0.1]);
    let path = Path::Geodesic { x: x.clone(), v: v(&[0.3, 0.3]) };
    let lift = d_lift(&c, &Jet1::identity(&x), &path, 1.0, DEFAULT_STEP).unwrap();
    for j in &lift.jets {
        assert!(max_abs(&(&j.y - &j.x)) < 1e-12);
        assert!(max_abs_mat(&(&j.l - Matrix::identity(2, 2))) < 1e-12);
    }
}

#[test]
fn lift_matches_transport_conjugation() {
    let curve = FnCurve::new(2, |t: f64| (v(&[0.1 + 0.2 * t - 0.1 * t * t, -0.1 + 0.3 * t]), v(&[0.2 - 0.2 * t, 0.3])));
    let xi = Jet1::new(v(&[0.1, -0.1]), v(&[-0.2, 0.15]), Matrix::from_row_slice(2, 2, &[0.9, 0.3, -0.2, 1.1]));
    for name in TWO_DIM {
        let c = conn(name);
        for path in [Path::Curve(&curve), Path::Geodesic { x: xi.x.clone(), v: v(&[0.25, -0.2]) }] {
            let lift = d_lift(&c, &xi, &path, 1.0, DEFAULT_STEP).unwrap();
            let closed = lift_by_transport(&c, &xi, &path, 1.0, DEFAULT_STEP).unwrap();
            assert_eq!(closed.len(), lift.jets.len());
            assert!(lift.distance(&closed) < 1e-6, "{name}");
        }
    }
}

#[test]
fn sphere_rotation_lift_is_tangent_to_the_distribution() {
    let c = conn("sphere_stereo");
    let s = sjet_from_connection(&c);
    let xi = rotation_jet(&v(&[0.2, 0.1]), 0.8);
    let curve = FnCurve::new(2, |t: f64| (v(&[0.2 + 0.2 * t, 0.1 - 0.3 * t * t]), v(&[0.2, -0.6 * t])));
    let lift = d_lift(&c, &xi, &Path::Curve(&curve), 1.0, DEFAULT_STEP).unwrap();
    for (j, vel) in lift.jets.iter().zip(&lift.velocities) {
        let back = psi_involution(&s, j, vel).unwrap();
        assert!(back.distance(&vel.scale(-1.0)) < 1e-6);
        // Rotations are isometries, so the lift follows the rotation itself.
        assert!(max_abs_mat(&(&j.l - &xi.l)) < 1e-10);
    }
}

#[test]
fn phi_of_identity_and_minus_identity() {
    for name in ["sphere_stereo", "poly_random(1)"] {
        let c = conn(name);
        let x = v(&[0.1, 0.05]);
        let xp = v(&[0.25, -0.1]);
        let id = phi_xi(&c, &Jet1::identity(&x), &xp, DEFAULT_STEP).unwrap();
        assert!(max_abs(&(id - &xp)) < 1e-10, "{name}");
        let minus = phi_xi(&c, &Jet1::homothety(&x, -1.0), &xp, DEFAULT_STEP).unwrap();
        let sym = geodesic_symmetry(&c, &x, &xp, DEFAULT_STEP).unwrap();
        assert!(max_abs(&(minus - sym)) < 1e-9, "{name}");
    }
}

#[test]
fn phi_one_jet_two_ways() {
    let xi = Jet1::new(v(&[0.1, -0.1]), v(&[-0.1, 0.15]), Matrix::from_row_slice(2, 2, &[0.9, 0.3, -0.2, 1.1]));
    for name in ["sphere_stereo", "poly_random(1)"] {
        let c = conn(name);
        let xp = v(&[0.25, 0.05]);
        let a = phi_xi_1jet(&c, &xi, &xp, DEFAULT_STEP).unwrap();
        let b = phi_xi_1jet_from_lifts(&c, &xi, &xp, DEFAULT_STEP).unwrap();
        assert!(max_abs(&(&a.y - &b.y)) < 1e-9, "{name}");
        assert!(max_abs_mat(&(&a.l - &b.l)) < 1e-5, "{name}");
    }
}

#[test]
fn ray_directions_cover_the_sphere() {
    assert_eq!(ray_directions(2).len(), 16);
    for n in [2, 3] {
        let dirs = ray_directions(n);
        assert!(dirs.iter().all(|w| (w.norm() - 1.0).abs() < 1e-15));
        let sum = dirs.iter().fold(Vector::zeros(n), |acc, w| acc + w);
        assert!(max_abs(&sum) < 1e-14);
    }
}

#[test]
fn identity_has_zero_leaf_residual() {
    let c = conn("poly_random(1)");
    let r = leaf_residual(&c, &Jet1::identity(&v(&[0.1, 0.1])), 0.2, DEFAULT_STEP).unwrap();
    assert!(r.residual < 1e-4, "{}", r.residual);
}

#[test]
fn sphere_leaf_test_separates_rotations_from_generic_jets() {
    let c = conn("sphere_stereo");
    let good = rotation_jet(&v(&[0.1, -0.05]), 0.6);
    let r = leaf_residual(&c, &good, 0.25, DEFAULT_STEP).unwrap();
    assert!(r.residual <= 1e-4, "{}", r.residual);
    assert!(integrability_check(&c, &good, 1e-9).unwrap().integrable);

    let mut bad = good.clone();
    bad.l = &bad.l * Matrix::from_row_slice(2, 2, &[1.3, 0.2, 0.0, 0.8]);
    let r = leaf_residual(&c, &bad, 0.25, DEFAULT_STEP).unwrap();
    assert!(r.residual >= 1e-2, "{}", r.residual);
    assert!(!integrability_check(&c, &bad, 1e-9).unwrap().integrable);
}
