//! Chart-based Riemannian backend: metrics, Christoffel symbols,
//! orthonormal frames, iterated covariant derivatives, the momentum
//! representation of tensor words on smooth functions, parallel transport,
//! holonomy sampling and holonomy-invariant tensor subspaces.
//!
//! Built-in presets (`r2`, `torus`, `s2`, `h2`) carry their metric data as
//! symbolic expressions, so derivatives of parsed functions are analytic;
//! caller-supplied metrics fall back to finite differences throughout.

pub mod chart;
pub mod covariant;
pub mod error;
pub mod expr;
pub mod function;
pub mod invariant;
pub mod tensor;
pub mod transport;

pub use chart::{Chart, SymbolicChart, SINGULARITY_MARGIN};
pub use covariant::{
    covariant_derivative_tensor, iterated_covariant_derivative, laplacian,
    laplacian_coordinate, momentum_rep_apply, MAX_DERIVATIVE_ORDER,
};
pub use error::GeomError;
pub use expr::{parse, Expr};
pub use function::SmoothFunction;
pub use invariant::{
    certify_parallel, invariant_tensors, rep_homomorphism_error, HolonomySample,
    PARALLEL_DERIVATIVE_TOL, PARALLEL_FIXED_TOL,
};
pub use tensor::{TensorElement, TensorWord};
pub use transport::{
    holonomy_loop, parallel_transport, preset_loops, rotation_angle, LoopPath, Segment,
};
