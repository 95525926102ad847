use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::connection::{connection_from_sjet, sjet_from_connection};
use crate::fields::builtin;

fn v(a: &[f64]) -> Vector {
    Vector::from_vec(a.to_vec())
}

fn conn(name: &str) -> ConnectionField {
    ConnectionField::from_spec(&builtin(name).unwrap())
}

/// A well-conditioned random matrix: identity plus a bounded perturbation.
fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::identity(n, n) + Matrix::from_fn(n, n, |_, _| rng.gen_range(-0.4..0.4))
}

fn random_bilinear(n: usize, rng: &mut ChaCha8Rng) -> Bilinear {
    Bilinear::from_fn(n, |_, _, _| rng.gen_range(-1.0..1.0))
}

fn random_frame11(x: &Vector, rng: &mut ChaCha8Rng) -> Frame11 {
    let n = x.len();
    Frame11::new(x.clone(), random_matrix(n, rng), random_matrix(n, rng), random_bilinear(n, rng))
}

#[test]
fn singular_frames_are_rejected() {
    assert_eq!(Frame1::new(v(&[0.0, 0.0]), Matrix::zeros(2, 2)), Err(Error::SingularFrame));
}

#[test]
fn flat_section_has_no_second_order_part() {
    let c = conn("euclidean_2");
    let e = Frame1::new(v(&[0.3, 0.1]), Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
    let s = admissible_section(&c, &e).unwrap();
    assert_eq!(s.h.max_abs(), 0.0);
    assert!(s.is_holonomic(0.0));
}

#[test]
fn admissible_section_is_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["sphere_stereo", "poly_random_torsion(2)", "flat_torsion_c"] {
        let c = conn(name);
        for _ in 0..10 {
            let x = v(&[rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)]);
            let e = Frame1::new(x, random_matrix(2, &mut rng)).unwrap();
            let a = random_matrix(2, &mut rng);
            let lhs = admissible_section(&c, &e.act(&a).unwrap()).unwrap();
            let rhs = admissible_section(&c, &e).unwrap().act(&a);
            assert!(lhs.distance(&rhs) < 1e-14, "{name}");
        }
    }
}

#[test]
fn torsionless_sections_are_holonomic() {
    let c = conn("poly_random(4)");
    let e = Frame1::new(v(&[0.2, -0.3]), Matrix::from_row_slice(2, 2, &[0.7, 0.2, -0.1, 1.3])).unwrap();
    assert!(admissible_section(&c, &e).unwrap().is_holonomic(1e-14));
    let t = conn("flat_torsion_c");
    assert!(!admissible_section(&t, &e).unwrap().is_holonomic(1e-14));
}

#[test]
fn section_is_the_affine_extension_across_the_flat_chart() {
    // Pushing the constant field w through the section reproduces ∇̃ = 0 along
    // the image of straight lines: s·(0; w, d, 0) has ∇̃ = 0.
    let c = conn("sphere_stereo");
    let e = Frame1::new(v(&[0.3, 0.2]), Matrix::from_row_slice(2, 2, &[1.0, 0.4, -0.3, 0.8])).unwrap();
    let s = admissible_section(&c, &e).unwrap().as_jet();
    let img = s.act(&T2Elem::new(Vector::zeros(2), v(&[0.3, -0.7]), v(&[1.1, 0.2]), Vector::zeros(2))).unwrap();
    let tilde = crate::connection::tilde_nabla(&c, &img).unwrap();
    assert!(max_abs(&tilde) < 1e-15);
}

#[test]
fn solve_m_of_a_frame_with_itself_is_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let j = random_frame11(&v(&[0.1, 0.2]), &mut rng);
    let m = solve_m(&j, &j).unwrap();
    assert!(m.distance(&Jet11::identity(&j.x)) < 1e-12);
}

#[test]
fn solve_m_satisfies_the_action_and_matches_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in [2, 3] {
        for _ in 0..5 {
            let j1 = random_frame11(&Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)), &mut rng);
            let j2 = random_frame11(&Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)), &mut rng);
            let report = solve_m_report(&j1, &j2).unwrap();
            assert!(report.residual < 1e-12);
            assert!(report.sigma_min > 1e-3);
            let acted = Frame11::from_jet(&report.jet.compose(&j1.as_jet()).unwrap()).unwrap();
            assert!(acted.distance(&j2) < 1e-12);
            let direct = j2.as_jet().compose(&j1.as_jet().inverse().unwrap()).unwrap();
            assert!(report.jet.distance(&direct) < 1e-12);
        }
    }
}

#[test]
fn solve_m_is_a_cocycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = v(&[0.0, 0.5]);
    let j1 = random_frame11(&x, &mut rng);
    let j2 = random_frame11(&v(&[0.4, -0.2]), &mut rng);
    let j3 = random_frame11(&v(&[-0.3, 0.1]), &mut rng);
    let lhs = solve_m(&j1, &j3).unwrap();
    let rhs = solve_m(&j2, &j3).unwrap().compose(&solve_m(&j1, &j2).unwrap()).unwrap();
    assert!(lhs.distance(&rhs) < 1e-12);
}

#[test]
fn perturbing_the_bilinear_block_breaks_the_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let j1 = random_frame11(&v(&[0.1, 0.1]), &mut rng);
    let j2 = random_frame11(&v(&[0.2, 0.3]), &mut rng);
    let report = solve_m_report(&j1, &j2).unwrap();
    let smin = |m: &Matrix| m.clone().svd(false, false).singular_values.min();
    for _ in 0..10 {
        let a = random_bilinear(2, &mut rng);
        let mut xi = report.jet.clone();
        xi.b = xi.b + a.clone();
        let moved = Frame11::from_jet(&xi.compose(&j1.as_jet()).unwrap()).unwrap();
        let residual = (moved.h - j2.h.clone()).max_abs();
        // The perturbation enters as A(F·, G·).
        assert!(residual >= 0.5 * a.max_abs() * smin(&j1.f) * smin(&j1.g));
    }
}

#[test]
fn flat_symmetry_jet_from_sections() {
    let c = conn("euclidean_2");
    let e = Frame1::new(v(&[0.5, 0.5]), Matrix::identity(2, 2)).unwrap();
    let s = sjet_from_admissible(&ConnectionSection(&c), &e).unwrap();
    assert!(s.distance(&Jet11::new(e.x.clone(), e.x.clone(), -Matrix::identity(2, 2), -Matrix::identity(2, 2), Bilinear::zeros(2))) < 1e-14);
}

#[test]
fn symmetry_jet_is_independent_of_the_frame() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for name in ["sphere_stereo", "poly_random_torsion(1)"] {
        let c = conn(name);
        let x = v(&[0.2, -0.1]);
        let reference = sjet_from_connection(&c).at(&x).unwrap();
        for _ in 0..10 {
            let e = Frame1::new(x.clone(), random_matrix(2, &mut rng)).unwrap();
            let s = sjet_from_admissible(&ConnectionSection(&c), &e).unwrap();
            assert!(s.distance(&reference) < 1e-12, "{name}");
        }
    }
}

#[test]
fn kobayashi_triangle_closes() {
    let c = conn("poly_random_torsion(3)");
    for x in [v(&[0.1, 0.4]), v(&[-0.5, 0.2])] {
        let e = Frame1::new(x.clone(), Matrix::from_row_slice(2, 2, &[0.9, 0.1, 0.3, -1.2])).unwrap();
        let s = sjet_from_admissible(&ConnectionSection(&c), &e).unwrap();
        // Γ(d, v) = −½ Γ_s(v, d) recovers the coefficients.
        let back = s.b.transpose().scale(-0.5);
        assert!((back - c.gamma(&x).unwrap()).max_abs() < 1e-12);
        assert!(connection_from_sjet(&sjet_from_connection(&c)).gamma(&x).unwrap() == c.gamma(&x).unwrap());
    }
}

#[test]
fn holonomic_solve_agrees_with_the_admissible_section() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for name in ["euclidean_2", "sphere_stereo", "poincare_disk", "poly_random(2)"] {
        let c = conn(name);
        let s = sjet_from_connection(&c);
        for _ in 0..5 {
            let x = v(&[rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)]);
            let e = Frame1::new(x.clone(), random_matrix(2, &mut rng)).unwrap();
            let solved = holonomic_solve(&s.at(&x).unwrap(), &e).unwrap();
            assert!(solved.is_holonomic(1e-13), "{name}");
            assert!(solved.distance(&admissible_section(&c, &e).unwrap()) < 1e-12, "{name}");
            // The defining relation 𝔰·s = s·(−I).
            let minus = Jet11::holonomic(Vector::zeros(2), Vector::zeros(2), -Matrix::identity(2, 2), Bilinear::zeros(2));
            let lhs = s.at(&x).unwrap().compose(&solved.as_jet()).unwrap();
            let rhs = solved.as_jet().compose(&minus).unwrap();
            assert!(lhs.distance(&rhs) < 1e-12, "{name}");
        }
    }
}

#[test]
fn holonomic_solve_rejects_torsion() {
    let c = conn("flat_torsion_c");
    let x = v(&[0.0, 0.0]);
    let e = Frame1::new(x.clone(), Matrix::identity(2, 2)).unwrap();
    assert!(matches!(
        holonomic_solve(&sjet_from_connection(&c).at(&x).unwrap(), &e),
        Err(Error::PreconditionFailed(_))
    ));
}
