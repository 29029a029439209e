//! Bergman kernel, metric and curvature from quadrature-orthonormalized monomials.
//!
//! The kernel of L^2 holomorphic functions is used; on domains in C^n with the
//! Euclidean volume this is the kernel of L^2 holomorphic n-forms written in
//! the coordinate frame `dz_1 ^ ... ^ dz_n`.

pub mod basis;
pub mod charts;
pub mod gram;
pub mod io;
pub mod jet;
pub mod kernel;

pub use basis::MonomialBasis;
pub use charts::{boundary_growth, chart_image, ChartKernels, GrowthTable};
pub use gram::{gram_matrix, GramMatrix};
pub use kernel::{build_evaluator, orthonormalize, KernelEvaluator, KernelOptions};
