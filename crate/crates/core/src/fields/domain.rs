//! Chart domains.

use rand::Rng;

use crate::error::{Error, Result};
use crate::multilinear::Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// All of ℝⁿ.
    Whole,
    /// Open ball.
    Ball { center: Vector, radius: f64 },
    /// Open axis-aligned box.
    Box { lo: Vector, hi: Vector },
}

impl Domain {
    pub fn ball(n: usize, radius: f64) -> Self {
        Domain::Ball { center: Vector::zeros(n), radius }
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        Domain::Box { lo: Vector::from_element(n, -half_width), hi: Vector::from_element(n, half_width) }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Domain::Whole => x.iter().all(|c| c.is_finite()),
            Domain::Ball { center, radius } => x.len() == center.len() && (x - center).norm() < *radius,
            Domain::Box { lo, hi } => {
                x.len() == lo.len() && x.iter().zip(lo.iter().zip(hi.iter())).all(|(c, (l, h))| l < c && c < h)
            }
        }
    }

    pub fn check(&self, x: &Vector) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{:?} is outside {}", x.as_slice(), self.describe())))
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Domain::Whole => "the whole chart".into(),
            Domain::Ball { center, radius } => format!("ball(center {:?}, radius {radius})", center.as_slice()),
            Domain::Box { lo, hi } => format!("box({:?}, {:?})", lo.as_slice(), hi.as_slice()),
        }
    }

    /// Center of the domain (origin for the whole chart).
    pub fn center(&self, n: usize) -> Vector {
        match self {
            Domain::Whole => Vector::zeros(n),
            Domain::Ball { center, .. } => center.clone(),
            Domain::Box { lo, hi } => (lo + hi) / 2.0,
        }
    }

    /// Radius of the largest ball around the center inside the domain (1 for the whole chart).
    pub fn inner_radius(&self) -> f64 {
        match self {
            Domain::Whole => 1.0,
            Domain::Ball { radius, .. } => *radius,
            Domain::Box { lo, hi } => lo.iter().zip(hi.iter()).map(|(l, h)| (h - l) / 2.0).fold(f64::INFINITY, f64::min),
        }
    }

    /// A uniformly random point of the domain shrunk by `fraction` about its center.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, fraction: f64, rng: &mut R) -> Vector {
        match self {
            Domain::Box { lo, hi } => Vector::from_fn(n, |i, _| {
                let c = (lo[i] + hi[i]) / 2.0;
                let w = (hi[i] - lo[i]) / 2.0 * fraction;
                c + w * rng.gen_range(-1.0..1.0)
            }),
            _ => {
                let r = self.inner_radius() * fraction;
                loop {
                    let v = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                    if v.norm() < 1.0 {
                        return self.center(n) + v * r;
                    }
                }
            }
        }
    }
}
