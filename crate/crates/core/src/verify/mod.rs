//! Checks the quantitative inequalities between the invariant metrics on a
//! concrete domain and reports each one with a signed margin.

pub mod claims;
pub mod report;

use crate::bergman::{ChartKernels, KernelOptions};
use crate::domain::config::DomainConfig;
use crate::domain::squeeze::{squeeze_certificate, uniform_bounds, SqueezingCertificate};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::finsler::FinslerOptions;
use crate::ke::default_alpha;
use crate::point::{CDirection, CVec, C64};

pub use claims::{
    boundary_ray, chain_legs, comparison_from_legs, comparison_report, exhaustion_report, growth_report,
    jacobian_blowup_report, kernel_bounds_report, kernel_center_bounds_check, sample_directions, schwarz_squeeze_check,
    ChainLegs,
};
pub use report::{all_pass, to_json, to_text, ClaimId, InequalityReport, ReportRow, Tolerances};

/// Relative slack on every asserted inequality.
pub const DEFAULT_SLACK: f64 = 0.05;

/// Offsets of the blow-up path, as fractions of the distance to the boundary.
pub const BLOWUP_PATH: [f64; 4] = [0.3, 0.1, 0.03, 0.003];
/// Offsets of the growth ray.
pub const GROWTH_RAY: [f64; 4] = [0.1, 0.03, 0.01, 0.003];

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Resolution of chart kernels.
    pub kernel: KernelOptions,
    pub finsler: FinslerOptions,
    pub slack: f64,
    /// `(x, v)` pairs in the inequality chain.
    pub pairs: usize,
    /// Base points for the kernel bounds.
    pub kernel_points: usize,
    pub exhaustion_samples: usize,
    /// Exhaustion exponent; `1 / (n + 1)` when unset.
    pub alpha: Option<f64>,
    pub growth_floor: f64,
    pub blowup_ratio: f64,
}

impl VerifyOptions {
    /// Degree 12 with 2e5 points in one variable; degree 6 with 1e5 points otherwise,
    /// since every off-center base point needs its own chart kernel.
    pub fn for_dim(dim: usize) -> Self {
        let kernel = if dim == 1 {
            KernelOptions::for_dim(1)
        } else {
            KernelOptions {
                degree: 6,
                count: 100_000,
                seed: 42,
            }
        };
        VerifyOptions {
            kernel,
            finsler: FinslerOptions::default(),
            slack: DEFAULT_SLACK,
            pairs: 10,
            kernel_points: 4,
            exhaustion_samples: 100,
            alpha: None,
            growth_floor: 0.1,
            blowup_ratio: 10.0,
        }
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.kernel.seed = seed;
        self.finsler.seed = seed;
        self
    }
}

/// Certificate carrying the uniform `(min a, max b)` over `certs`, charted at the first.
pub fn uniform_certificate(certs: &[SqueezingCertificate]) -> Option<SqueezingCertificate> {
    let (a, b) = uniform_bounds(certs)?;
    Some(certs[0].with_radii(a, b))
}

/// Runs the suite on the domain described by `config`; an empty config yields no reports.
pub fn full_suite(config: &DomainConfig, seed: u64) -> Result<Vec<InequalityReport>> {
    if config.is_empty() {
        return Ok(Vec::new());
    }
    let domain = config.build()?;
    let opts = VerifyOptions::for_dim(domain.dim());
    Ok(run_suite(&domain, seed, &opts))
}

/// Kernel bounds, Jacobian blow-up, the inequality chain, boundary growth, the
/// exhaustion and the Schwarz bounds, in that order. A claim that cannot be
/// evaluated yields a failed report carrying the error; the exhaustion is left
/// out on domains without a closed-form KE metric.
pub fn run_suite(domain: &Domain, seed: u64, opts: &VerifyOptions) -> Vec<InequalityReport> {
    let opts = opts.clone().seeded(seed);
    let n = domain.dim();
    let kind = domain.model_kind().to_string();
    let mut kernels = ChartKernels::new(opts.kernel);
    let mut out = Vec::new();
    let anchor = domain.anchor().clone();
    let e1 = CDirection::axis(n, 0).coords().clone();
    let fail = |id: ClaimId, e: Error| InequalityReport::failed(id, kind.clone(), opts.slack, e.to_string()).finish();

    // kernel bounds
    let kernel_bounds = (|| -> Result<InequalityReport> {
        let mut pts = vec![anchor.clone()];
        pts.extend(domain.sample_interior(opts.kernel_points.saturating_sub(1), seed ^ 0x11)?);
        let certs = pts
            .iter()
            .map(|x| squeeze_certificate(domain, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(kernel_bounds_report(domain, &certs, &mut kernels, &opts))
    })();
    out.push(kernel_bounds.unwrap_or_else(|e| fail(ClaimId::LEM1_KERNEL, e)));

    // Jacobian blow-up
    match boundary_ray(domain, &anchor, &e1, &BLOWUP_PATH) {
        Ok(path) => out.push(jacobian_blowup_report(domain, &path, opts.blowup_ratio)),
        Err(e) => out.push(fail(ClaimId::LEM2_JACOBIAN, e)),
    }

    // inequality chain
    let chain = (|| -> Result<Vec<InequalityReport>> {
        let pts = domain.sample_interior(opts.pairs, seed ^ 0x2a)?;
        let dirs = sample_directions(n, opts.pairs.max(1), seed ^ 0x2b);
        let certs = pts
            .iter()
            .map(|x| squeeze_certificate(domain, x))
            .collect::<Result<Vec<_>>>()?;
        let cert = uniform_certificate(&certs).ok_or_else(|| Error::InvalidParameter("no chain points".into()))?;
        let mut reps = comparison_report(domain, &cert, &pts, &dirs, &mut kernels, &opts)?;
        for r in &mut reps {
            r.notes
                .push(format!("uniform (a, b) over {} sampled base points", certs.len()));
        }
        Ok(reps)
    })();
    match chain {
        Ok(reps) => out.extend(reps),
        Err(e) => {
            for id in [ClaimId::THM2A_CK, ClaimId::THM2A_BK, ClaimId::THM2A_KEK] {
                out.push(InequalityReport::failed(id, kind.clone(), opts.slack, e.to_string()).finish());
            }
        }
    }

    // boundary growth, in the unit ball
    let growth = (|| -> Result<InequalityReport> {
        let r = domain.bounding_radius();
        if r > 1.0 {
            let scaled = domain.scaled(1.0 / r)?;
            let ray = boundary_ray(&scaled, scaled.anchor(), &e1, &GROWTH_RAY)?;
            let mut own = ChartKernels::new(opts.kernel);
            let mut rep = growth_report(&scaled, &ray, &mut own, &opts);
            rep.notes.push(format!("domain scaled by 1/{r}"));
            Ok(rep)
        } else {
            let ray = boundary_ray(domain, &anchor, &e1, &GROWTH_RAY)?;
            Ok(growth_report(domain, &ray, &mut kernels, &opts))
        }
    })();
    out.push(growth.unwrap_or_else(|e| fail(ClaimId::COR3_GROWTH, e)));

    // exhaustion
    let alpha = opts.alpha.unwrap_or(default_alpha(n));
    let exhaustion = domain
        .sample_interior(opts.exhaustion_samples, seed ^ 0x55)
        .and_then(|pts| exhaustion_report(domain, &pts, alpha, opts.slack));
    match exhaustion {
        Ok(rep) => out.push(rep),
        Err(Error::Unsupported(_)) => {}
        Err(e) => out.push(fail(ClaimId::LEM5_PSH, e)),
    }

    // Schwarz bounds at the anchor
    let schwarz = squeeze_certificate(domain, &anchor).map(|cert| {
        let mut dirs: Vec<CDirection> = (0..n).map(|i| CDirection::axis(n, i)).collect();
        if n > 1 {
            dirs.push(CDirection::new(CVec::from_element(n, C64::new(1.0, 0.0))));
        }
        schwarz_squeeze_check(domain, &cert, &dirs, &opts)
    });
    out.push(schwarz.unwrap_or_else(|e| fail(ClaimId::SCHWARZ_SQUEEZE, e)));
    out
}
