//! Invariant metrics of bounded domains in C^n: Bergman, Kobayashi,
//! Caratheodory and model Kahler-Einstein metrics, together with squeezing
//! certificates and a verifier for the quasi-isometry inequalities between them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bergman;
pub mod domain;
pub mod error;
pub mod finsler;
pub mod ke;
pub mod point;
pub mod verify;

pub use bergman::{KernelEvaluator, KernelOptions};
pub use domain::config::DomainConfig;
pub use domain::squeeze::SqueezingCertificate;
pub use domain::{BiholoMap, Domain, ModelKind};
pub use error::{Error, Result};
pub use finsler::{Bracket, FinslerOptions};
pub use ke::KeModelMetric;
pub use point::{CDirection, CPoint, CVec, C64};
pub use verify::{ClaimId, InequalityReport};
