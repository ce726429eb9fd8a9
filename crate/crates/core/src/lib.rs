//! Calculus of Hermitian differential structures presented by finite frames:
//! graded torus algebras with a 2-cocycle deformation, right-frame tensor
//! calculus, the two-projection solver on three-tensors, and construction and
//! certification of Hermitian torsion-free connections.
//!
//! The crate is organised around the pipeline
//!
//! ```text
//! algebra  ->  geometry (frame, Ψ, inner product)  ->  W, P, Q, Π  ->  A  ->  certify
//! ```
//!
//! Three algebra backends sit behind one element type: an exact Laurent torus
//! (cyclotomic scalars at rational deformation parameter), a fuzzy torus
//! (clock/shift matrix algebra, optionally with a central circle factor), and
//! a sampled commutative torus grid for floating-point classical geometry.

pub mod algebra;
pub mod builders;
pub mod cmatrix;
pub mod connection;
pub mod cyclotomic;
pub mod error;
pub mod geometry;
pub mod sample;
pub mod scalar;
pub mod tensor;
pub mod twoproj;

pub use algebra::{Algebra, AlgebraElement, Degree};
pub use connection::{CertificationReport, Connection};
pub use error::CoreError;
pub use geometry::{FrameSpec, Geometry, ValidationReport};
pub use scalar::Scalar;
pub use tensor::{ModuleOp, Tensor};
pub use twoproj::TwoProjectionReport;

/// Thread cap honoured by the internally parallel routines.
///
/// Reads `LCW_THREADS` once; unset or unparsable means "let rayon decide".
pub fn thread_cap() -> Option<usize> {
    static CAP: once_cell::sync::Lazy<Option<usize>> = once_cell::sync::Lazy::new(|| {
        std::env::var("LCW_THREADS").ok().and_then(|s| s.parse().ok())
    });
    *CAP
}
