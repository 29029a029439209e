//! Upper bounds for `g_K` from polynomial analytic disks.
//!
//! In chart coordinates the disk is `p(zeta) = x + t (v zeta + sum_{k=2}^K d_k zeta^k)`.
//! For a fixed shape `d` the largest admissible speed is `1 / max_j mu(h_d(zeta_j))`,
//! with `mu` the gauge of `Omega - x`, so the shape is chosen to minimize that maximum.
//! The chart image is convex, so a disk whose boundary circle lies inside is inside.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::optim::{bfgs, log_sum_exp};
use super::{check_inputs, recentering_chart, FinslerOptions, TraceRow, BETA_STAGES};
use crate::domain::{BiholoMap, Domain};
use crate::error::{Error, Result};
use crate::point::{CDirection, CPoint, CVec, C64};

/// Required `rho` margin of the disk samples at the certified speed.
pub const FEASIBILITY_MARGIN: f64 = 1e-6;
const BOUNDARY_ANGLES: usize = 256;
const INTERIOR_RADII: [f64; 4] = [0.25, 0.5, 0.75, 0.9];
const INTERIOR_ANGLES: usize = 64;
const CHECK_ANGLES: usize = 1024;

/// `f = chart^-1 o p` with `p(zeta) = chart(x) + sum_k zeta^(k+1) coeffs[k]`;
/// `f'(0) = speed * direction`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskAnsatz {
    pub base_point: CPoint,
    /// Unit vector.
    pub direction: CVec,
    pub speed: f64,
    pub coeffs: Vec<CVec>,
    /// Identity when `None`.
    pub chart: Option<BiholoMap>,
}

impl DiskAnsatz {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, zeta: C64) -> Result<CVec> {
        let center = match &self.chart {
            Some(m) => m.apply_vec(self.base_point.coords())?,
            None => self.base_point.coords().clone(),
        };
        let mut out = center;
        let mut p = C64::new(1.0, 0.0);
        for c in &self.coeffs {
            p *= zeta;
            out += c * p;
        }
        match &self.chart {
            Some(m) => m.inverse()?.apply_vec(&out),
            None => Ok(out),
        }
    }
}

#[derive(Clone, Debug)]
pub struct KobayashiBound {
    /// Upper bound on `g_K(x; v)` for the caller's `v`.
    pub value: f64,
    pub disk: DiskAnsatz,
    /// `-max rho` over the disk samples at the certified speed.
    pub margin: f64,
    pub trace: Vec<TraceRow>,
}

fn constraint_nodes() -> Vec<C64> {
    let mut z = Vec::with_capacity(BOUNDARY_ANGLES + INTERIOR_RADII.len() * INTERIOR_ANGLES);
    for j in 0..BOUNDARY_ANGLES {
        z.push(C64::from_polar(
            1.0,
            std::f64::consts::TAU * j as f64 / BOUNDARY_ANGLES as f64,
        ));
    }
    for &r in &INTERIOR_RADII {
        for j in 0..INTERIOR_ANGLES {
            let th = std::f64::consts::TAU * (j as f64 + 0.5) / INTERIOR_ANGLES as f64;
            z.push(C64::from_polar(r, th));
        }
    }
    z
}

fn check_nodes() -> Vec<C64> {
    let mut z = constraint_nodes();
    z.extend(
        (0..CHECK_ANGLES).map(|j| C64::from_polar(1.0, std::f64::consts::TAU * (j as f64 + 0.5) / CHECK_ANGLES as f64)),
    );
    z
}

struct Problem<'a> {
    domain: &'a Domain,
    x: &'a CVec,
    v: &'a CVec,
    n: usize,
    k: usize,
    nodes: Vec<C64>,
    /// `powers[j][m] = zeta_j^(m + 2)`.
    powers: Vec<Vec<C64>>,
}

impl Problem<'_> {
    fn shape(&self, y: &[f64], j: usize) -> CVec {
        let mut u = self.v * self.nodes[j];
        for m in 0..self.k - 1 {
            let p = self.powers[j][m];
            for i in 0..self.n {
                let idx = 2 * (m * self.n + i);
                u[i] += C64::new(y[idx], y[idx + 1]) * p;
            }
        }
        u
    }

    fn exact_max(&self, y: &[f64]) -> f64 {
        (0..self.nodes.len())
            .map(|j| self.domain.gauge(self.x, &self.shape(y, j)).0)
            .fold(0.0, f64::max)
    }

    fn smoothed(&self, y: &[f64], beta: f64, grad: &mut [f64], w: &mut Vec<f64>) -> f64 {
        let mut mus = Vec::with_capacity(self.nodes.len());
        let mut grads = Vec::with_capacity(self.nodes.len());
        for j in 0..self.nodes.len() {
            let (mu, g) = self.domain.gauge(self.x, &self.shape(y, j));
            mus.push(mu);
            grads.push(g);
        }
        let val = log_sum_exp(&mus, beta, w);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for j in 0..self.nodes.len() {
            if w[j] < 1e-300 {
                continue;
            }
            for m in 0..self.k - 1 {
                let pc = self.powers[j][m].conj();
                for (i, g) in grads[j].iter().enumerate() {
                    // real gradient in d_{m,i}, encoded as d/dRe + i d/dIm
                    let gd = g * pc * w[j];
                    let idx = 2 * (m * self.n + i);
                    grad[idx] += gd.re;
                    grad[idx + 1] += gd.im;
                }
            }
        }
        val
    }
}

pub fn kobayashi_upper(domain: &Domain, x: &CPoint, v: &CDirection, opts: &FinslerOptions) -> Result<KobayashiBound> {
    kobayashi_upper_from(domain, x, v, opts, None)
}

/// Speed and margin of `start` if its samples lie inside `domain`.
fn certify_seed(domain: &Domain, x: &CPoint, vhat: &CVec, start: &DiskAnsatz) -> Option<(f64, f64)> {
    if (start.base_point.coords() - x.coords()).norm() > 1e-12 * (1.0 + x.norm())
        || (start.direction.dotc(vhat).norm() - 1.0).abs() > 1e-9
        || !(start.speed > 0.0)
    {
        return None;
    }
    let mut worst = f64::NEG_INFINITY;
    for z in check_nodes() {
        let r = domain.rho_vec(&start.eval(z).ok()?);
        if !(r <= -FEASIBILITY_MARGIN) {
            return None;
        }
        worst = worst.max(r);
    }
    Some((start.speed, -worst))
}

/// As [`kobayashi_upper`], additionally trying `start` (for example the optimum on a
/// smaller domain or at a lower degree). The result is never worse than a `start`
/// that lies inside `domain`.
pub fn kobayashi_upper_from(
    domain: &Domain,
    x: &CPoint,
    v: &CDirection,
    opts: &FinslerOptions,
    start: Option<&DiskAnsatz>,
) -> Result<KobayashiBound> {
    check_inputs(domain, x, v)?;
    let (vnorm, vhat) = v.canonical()?;
    let d = domain.boundary_distance(x)?;
    if d < 1e-8 {
        return Err(Error::Infeasible(format!("base point within {d:.1e} of the boundary")));
    }
    let chart = recentering_chart(domain, x, opts);
    let (work, xc, vc) = match &chart {
        Some(c) => (
            &c.image,
            c.map.apply_vec(x.coords())?,
            c.map.push_forward(x.coords(), &vhat)?,
        ),
        None => (domain, x.coords().clone(), vhat.clone()),
    };
    let vc_norm = vc.norm();
    let vc_hat = vc.unscale(vc_norm);
    let chart_map = chart.as_ref().map(|c| c.map.clone());

    let n = domain.dim();
    let k = opts.degree.max(1);
    let nodes = constraint_nodes();
    let powers = nodes
        .iter()
        .map(|z| {
            let mut row = Vec::with_capacity(k.saturating_sub(1));
            let mut p = *z;
            for _ in 2..=k {
                p *= z;
                row.push(p);
            }
            row
        })
        .collect();
    let prob = Problem {
        domain: work,
        x: &xc,
        v: &vc_hat,
        n,
        k,
        nodes,
        powers,
    };
    let nvar = 2 * n * (k - 1);

    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; nvar]];
    if let Some(s) = start.filter(|s| s.chart == chart_map && !s.coeffs.is_empty()) {
        // warm start in shared coordinates: p = x + t (u zeta + sum d_k zeta^k)
        let lead = &s.coeffs[0];
        let t = lead.norm();
        let align = vc_hat.dotc(lead) / t;
        if t > 0.0 && (align.norm() - 1.0).abs() < 1e-9 {
            let mut y = vec![0.0; nvar];
            for (m, c) in s.coeffs.iter().skip(1).enumerate().take(k - 1) {
                for i in 0..n {
                    let dv = c[i] * align / t;
                    y[2 * (m * n + i)] = dv.re;
                    y[2 * (m * n + i) + 1] = dv.im;
                }
            }
            starts.push(y);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let want = opts.starts.max(1) + starts.len() - 1;
    while starts.len() < want {
        let amp = 0.3 / (starts.len() as f64).sqrt();
        starts.push((0..nvar).map(|_| amp * (2.0 * rng.gen::<f64>() - 1.0)).collect());
    }

    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |y: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
        let f = prob.exact_max(&y);
        if f.is_finite() && best.as_ref().is_none_or(|b| f < b.0) {
            *best = Some((f, y));
        }
    };
    for (si, y0) in starts.into_iter().enumerate() {
        consider(y0.clone(), &mut best);
        if nvar == 0 {
            continue;
        }
        let mut y = y0;
        for (stage, c) in BETA_STAGES.iter().enumerate() {
            let scale = prob.exact_max(&y).max(1e-12);
            let beta = c / scale;
            let mut w = Vec::new();
            let mut obj = |yy: &[f64], g: &mut [f64]| prob.smoothed(yy, beta, g, &mut w);
            let mut rows = Vec::new();
            let res = bfgs(&mut obj, &y, opts.budget, 1e-12, &mut |it, f| {
                if opts.trace {
                    rows.push((it, f));
                }
            });
            if opts.trace {
                // the iterate is only available at the end of the stage
                let exact = prob.exact_max(&res.x);
                for (it, f) in rows {
                    trace.push(TraceRow {
                        start: si,
                        stage,
                        iteration: it,
                        objective: f,
                        bound: vc_norm * vc_norm * exact * exact,
                        margin: 1.0 - exact / f,
                    });
                }
            }
            y = res.x;
        }
        consider(y, &mut best);
    }
    let (fmax, y) = best.expect("at least one start");

    // certified speed: largest t with rho <= -margin on all samples
    let shapes: Vec<CVec> = check_nodes()
        .iter()
        .map(|z| {
            let mut u = &vc_hat * *z;
            let mut p = *z;
            for m in 0..k - 1 {
                p *= z;
                for i in 0..n {
                    let idx = 2 * (m * n + i);
                    u[i] += C64::new(y[idx], y[idx + 1]) * p;
                }
            }
            u
        })
        .collect();
    let worst = |t: f64| -> f64 {
        shapes
            .iter()
            .map(|u| work.rho_vec(&(&xc + u * C64::new(t, 0.0))))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (mut lo, mut hi) = (0.0, 1.0 / fmax);
    if worst(lo) > -FEASIBILITY_MARGIN {
        return Err(Error::Infeasible("base point too close to the boundary".into()));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if worst(mid) <= -FEASIBILITY_MARGIN {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = lo;
    if !(t > 0.0) {
        return Err(Error::Infeasible("no admissible disk speed".into()));
    }
    let mut coeffs = vec![&vc_hat * C64::new(t, 0.0)];
    coeffs.extend((0..k - 1).map(|m| {
        CVec::from_iterator(
            n,
            (0..n).map(|i| C64::new(y[2 * (m * n + i)], y[2 * (m * n + i) + 1]) * t),
        )
    }));
    let own = KobayashiBound {
        value: (vc_norm / t).powi(2) * vnorm * vnorm,
        disk: DiskAnsatz {
            base_point: x.clone(),
            direction: vhat.clone(),
            speed: t / vc_norm,
            coeffs,
            chart: chart_map,
        },
        margin: -worst(t),
        trace,
    };
    if let Some(s) = start {
        if let Some((speed, margin)) = certify_seed(domain, x, &vhat, s) {
            if speed > own.disk.speed {
                return Ok(KobayashiBound {
                    value: (vnorm / speed).powi(2),
                    disk: s.clone(),
                    margin,
                    trace: own.trace,
                });
            }
        }
    }
    Ok(own)
}
