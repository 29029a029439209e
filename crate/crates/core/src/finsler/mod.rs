//! One-sided bounds for the Kobayashi and Caratheodory metrics.
//!
//! Any holomorphic disk through `x` inside the domain bounds `g_K` from above and
//! any bounded holomorphic function vanishing at `x` bounds `g_C` from below, so
//! each optimizer result is a certificate in its own right. Both problems are
//! convex in the ansatz coefficients when the domain is convex.

pub mod caratheodory;
pub mod kobayashi;
pub mod model;
pub mod optim;

use serde::Serialize;

use crate::bergman::chart_image;
use crate::domain::squeeze::squeeze_certificate;
use crate::domain::{BiholoMap, Domain, Shape};
use crate::error::{Error, Result};
use crate::point::{CDirection, CPoint};

pub use caratheodory::{caratheodory_lower, caratheodory_lower_from, CaratheodoryBound, FunctionalAnsatz};
pub use kobayashi::{kobayashi_upper, kobayashi_upper_from, DiskAnsatz, KobayashiBound};
pub use model::kobayashi_model;

/// Smoothing parameters `beta * max` used in turn; each stage warm-starts the next.
pub(crate) const BETA_STAGES: [f64; 6] = [10.0, 40.0, 160.0, 640.0, 2560.0, 10240.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FinslerOptions {
    /// Polynomial degree of the ansatz.
    pub degree: usize,
    /// BFGS iterations per smoothing stage.
    pub budget: usize,
    pub seed: u64,
    pub starts: usize,
    pub trace: bool,
    /// Optimize in squeezing coordinates centered at the base point.
    pub recenter: bool,
}

impl Default for FinslerOptions {
    fn default() -> Self {
        FinslerOptions {
            degree: 6,
            budget: 200,
            seed: 42,
            starts: 8,
            trace: false,
            recenter: true,
        }
    }
}

/// One optimizer step. `objective` is the smoothed maximum being minimized,
/// `bound` the metric bound certified by the iterate, `margin` the relative gap
/// between the smoothed and the exact maximum of the constraint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub start: usize,
    pub stage: usize,
    pub iteration: usize,
    pub objective: f64,
    pub bound: f64,
    pub margin: f64,
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("start,stage,iteration,objective,bound,feasibility_margin\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e}\n",
            r.start, r.stage, r.iteration, r.objective, r.bound, r.margin
        ));
    }
    s
}

#[derive(Clone, Debug)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub lower: CaratheodoryBound,
    pub upper: KobayashiBound,
}

impl Bracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Relative tolerance of the sandwich `lo <= hi`.
pub const BRACKET_TOLERANCE: f64 = 1e-3;

/// `[g_C lower bound, g_K upper bound]` at `(x, v)`.
pub fn bracket(domain: &Domain, x: &CPoint, v: &CDirection, opts: &FinslerOptions) -> Result<Bracket> {
    let upper = kobayashi_upper(domain, x, v, opts)?;
    let lower = caratheodory_lower(domain, x, v, opts)?;
    let (lo, hi) = (lower.value, upper.value);
    if lo > hi * (1.0 + 2.0 * BRACKET_TOLERANCE) {
        return Err(Error::BracketInconsistent { lo, hi });
    }
    Ok(Bracket { lo, hi, lower, upper })
}

pub(crate) fn check_inputs(domain: &Domain, x: &CPoint, v: &CDirection) -> Result<()> {
    x.ensure_dim(domain.dim())?;
    x.ensure_finite()?;
    if v.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: v.dim(),
        });
    }
    v.normalized()?;
    let rho = domain.rho(x);
    if rho >= 0.0 {
        return Err(Error::OutsideDomain { rho });
    }
    Ok(())
}

/// Coordinates where the base point is the center of a convex image of the domain.
/// The extremal maps there have no singularities close to the boundary.
#[derive(Clone, Debug)]
pub(crate) struct Chart {
    pub map: BiholoMap,
    pub image: Domain,
}

pub(crate) fn recentering_chart(domain: &Domain, x: &CPoint, opts: &FinslerOptions) -> Option<Chart> {
    if !opts.recenter || !(domain.is_homogeneous_model() || domain.is_convex()) {
        return None;
    }
    let cert = squeeze_certificate(domain, x).ok()?;
    let image = chart_image(domain, &cert).ok()?;
    if !matches!(
        image.shape(),
        Shape::Ball { .. } | Shape::Polydisc { .. } | Shape::Quadric { .. }
    ) {
        return None;
    }
    Some(Chart { map: cert.map, image })
}
