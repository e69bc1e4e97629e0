pub mod corays;
pub mod dlfield;
pub mod error;
pub mod gh;
pub mod pseudometric;
pub mod space;
pub mod suites;
pub mod window;
pub mod zoo;

pub use dlfield::{FieldExport, FieldKind, ScalarField};
pub use error::{Error, Result};
pub use gh::{Correspondence, EpsIsometry, FiniteMetricSpace};
pub use space::{Generator, GraphSpace, Scale, SpaceSpec, Vertex};
pub use window::{VertexSet, Window, WindowExport};
