//! Kernel and metric evaluated through squeezing charts.
//!
//! With `phi` a chart at `x`, `K_Omega(z, z) = K_phi(Omega)(phi z, phi z) |J_phi(z)|^2`
//! and `g_Omega(z; v) = g_phi(Omega)(phi z; dphi v)`. Polynomial kernels are most
//! accurate at the center of the chart image, which is where they are evaluated.

use std::sync::Arc;

use super::kernel::{build_evaluator, KernelEvaluator, KernelOptions};
use crate::domain::squeeze::{squeeze_certificate, SqueezingCertificate};
use crate::domain::{Domain, ModelKind};
use crate::error::{Error, Result};
use crate::point::{CDirection, CPoint};

/// Image of `domain` under the certificate chart. Model automorphisms land on the
/// unit model; other charts give an image domain inside `B_{1.25 b}`.
pub fn chart_image(domain: &Domain, cert: &SqueezingCertificate) -> Result<Domain> {
    let n = domain.dim();
    if cert.automorphism {
        return match domain.model_kind() {
            ModelKind::Disc | ModelKind::Ball => Ok(Domain::unit_ball(n)),
            ModelKind::Polydisc => Ok(Domain::unit_polydisc(n)),
            kind => Err(Error::Unsupported(format!("automorphism chart on {kind}"))),
        };
    }
    Domain::image(domain, &cert.map, 1.25 * cert.b)
}

/// Evaluators on chart images, built on demand and reused.
#[derive(Debug)]
pub struct ChartKernels {
    pub opts: KernelOptions,
    model: Option<Arc<KernelEvaluator>>,
    charts: Vec<(CPoint, Arc<KernelEvaluator>)>,
}

impl ChartKernels {
    pub fn new(opts: KernelOptions) -> Self {
        ChartKernels {
            opts,
            model: None,
            charts: Vec::new(),
        }
    }

    pub fn evaluator(&mut self, domain: &Domain, cert: &SqueezingCertificate) -> Result<Arc<KernelEvaluator>> {
        if cert.automorphism {
            if let Some(ev) = &self.model {
                return Ok(ev.clone());
            }
            let ev = Arc::new(build_evaluator(&chart_image(domain, cert)?, &self.opts)?);
            self.model = Some(ev.clone());
            return Ok(ev);
        }
        if let Some((_, ev)) = self.charts.iter().find(|(p, _)| *p == cert.base_point) {
            return Ok(ev.clone());
        }
        let ev = Arc::new(build_evaluator(&chart_image(domain, cert)?, &self.opts)?);
        self.charts.push((cert.base_point.clone(), ev.clone()));
        Ok(ev)
    }

    /// `K_Omega(x, x)` at the certificate base point.
    pub fn kernel_at_base(&mut self, domain: &Domain, cert: &SqueezingCertificate) -> Result<f64> {
        let ev = self.evaluator(domain, cert)?;
        let center = cert.map.apply(&cert.base_point)?;
        let j = cert.map.jacobian_det(&cert.base_point)?;
        Ok(ev.kernel_diag(&center)? * j.norm_sqr())
    }

    /// `K_phi(Omega)(0, 0)`.
    pub fn kernel_at_center(&mut self, domain: &Domain, cert: &SqueezingCertificate) -> Result<f64> {
        let ev = self.evaluator(domain, cert)?;
        ev.kernel_diag(&CPoint::origin(domain.dim()))
    }

    /// `g_B(x; v)` at the certificate base point.
    pub fn metric_at_base(&mut self, domain: &Domain, cert: &SqueezingCertificate, v: &CDirection) -> Result<f64> {
        let ev = self.evaluator(domain, cert)?;
        let center = cert.map.apply(&cert.base_point)?;
        let pushed = cert.map.push_forward(cert.base_point.coords(), v.coords())?;
        ev.metric(&center, &CDirection::new(pushed))
    }
}

#[derive(Clone, Debug)]
pub struct GrowthRow {
    pub point: CPoint,
    pub distance: f64,
    pub kernel: f64,
    /// `K d^2 (-log d)^2`.
    pub scaled: f64,
}

#[derive(Clone, Debug)]
pub struct GrowthTable {
    pub rows: Vec<GrowthRow>,
    pub min_scaled: f64,
}

/// `min K(z, z) d^2 (-log d)^2` along a path approaching the boundary.
pub fn boundary_growth(domain: &Domain, ray: &[CPoint], kernels: &mut ChartKernels) -> Result<GrowthTable> {
    let mut rows = Vec::with_capacity(ray.len());
    let mut last = f64::INFINITY;
    for z in ray {
        let d = domain.boundary_distance(z)?;
        if d >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "boundary distance {d} >= 1; rescale the domain into the unit ball"
            )));
        }
        if d > last {
            return Err(Error::InvalidParameter("path must approach the boundary".into()));
        }
        last = d;
        let cert = squeeze_certificate(domain, z)?;
        let k = kernels.kernel_at_base(domain, &cert)?;
        let l = -d.ln();
        rows.push(GrowthRow {
            point: z.clone(),
            distance: d,
            kernel: k,
            scaled: k * d * d * l * l,
        });
    }
    let min_scaled = rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    Ok(GrowthTable { rows, min_scaled })
}
