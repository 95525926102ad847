//! Affine connections on a coordinate chart described through jets: tangent
//! towers T²M and T³M, jet groupoids acting on them, symmetry jets, and the
//! extraction of torsion and curvature as jet defects.

pub mod connection;
pub mod error;
pub mod fields;
pub mod flows;
pub mod frames;
pub mod jets;
pub mod multilinear;
pub mod tangent;

pub use error::{Error, Result};
pub use jets::{Jet1, Jet11, Jet111, JetClass};
pub use connection::{ConnectionField, SymmetryJetField, TensorValueSet};
pub use multilinear::{Bilinear, Matrix, Quadrilinear, Trilinear, Vector};
pub use tangent::{Involution, Slot, T2Elem, T2Structure, T3Elem, T3Structure, TangentVector};
