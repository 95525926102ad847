//! Smooth fields on a chart: an expression language, truncated Taylor
//! evaluation, a finite-difference oracle, and manifold specifications.

pub mod domain;
pub mod expr;
pub mod fd;
pub mod sources;
pub mod spec;
pub mod taylor;
pub mod tensor;

pub use domain::Domain;
pub use expr::{parse_expr, Expr, Program};
pub use fd::{fd_jet_oracle, FdJet};
pub use sources::{transformed, BilinearField, BilinearJet, ExprBilinear, MetricChristoffel, MetricField, Signature};
pub use spec::{builtin, load_manifold, parse_spec, ManifoldSpec, SpecKind, BUILTINS, DEFAULT_TORSION_C};
pub use taylor::{Func, Shape, Taylor};
pub use tensor::{ExprTensorField, ExprVectorField, ScalarField, TensorType, TensorValue};
