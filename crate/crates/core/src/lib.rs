//! Exact series algebra and localization computations for Gromov–Witten
//! invariants of hypersurfaces in projective space.

pub mod coeffring;
pub mod cy3;
pub mod error;
pub mod genfun;
pub mod hypertail;
pub mod loc0;
pub mod series;
pub mod verify;

pub use coeffring::{LambdaRational, Laurent, Poly, Scalar, Q};
pub use error::{Error, Result};
pub use series::{MultiSeries, VariableSet};
