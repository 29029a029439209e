//! The individual checks. Each returns a finished report; numerical failures
//! inside a check become skipped rows or a report-level error.

use std::f64::consts::PI;

use crate::bergman::{boundary_growth, ChartKernels, KernelEvaluator};
use crate::domain::sampling::sphere_directions;
use crate::domain::squeeze::{squeeze_certificate, SqueezingCertificate};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::finsler::{bracket, FinslerOptions};
use crate::ke::{exhaustion_levi_min, hyperconvex_exhaustion, ke_metric, KeModelMetric, FD_STEP};
use crate::point::{CDirection, CPoint, CVec, ComplexList, C64};

use super::report::{ClaimId, InequalityReport, ReportRow, Tolerances};
use super::VerifyOptions;

/// Floor on the Levi form eigenvalue for plurisubharmonicity.
pub const LEVI_FLOOR: f64 = 1e-4;

fn kernel_tol(opts: &VerifyOptions) -> Tolerances {
    Tolerances {
        kernel_degree: Some(opts.kernel.degree),
        kernel_points: Some(opts.kernel.count),
        ..Tolerances::default()
    }
}

fn finsler_tol(opts: &VerifyOptions) -> Tolerances {
    Tolerances {
        ansatz_degree: Some(opts.finsler.degree),
        optimizer_budget: Some(opts.finsler.budget),
        ..Tolerances::default()
    }
}

fn chain_tol(opts: &VerifyOptions) -> Tolerances {
    Tolerances {
        ansatz_degree: Some(opts.finsler.degree),
        optimizer_budget: Some(opts.finsler.budget),
        ..kernel_tol(opts)
    }
}

/// `pi^n / n!`.
pub fn unit_ball_volume(n: usize) -> f64 {
    (1..=n).fold(1.0, |v, k| v * PI / k as f64)
}

/// Points `x0 + (1 - f) t u` for unit `u`, where `t` is the exit distance along
/// `u`; on the unit disc from 0 these are `1 - f`.
pub fn boundary_ray(domain: &Domain, from: &CPoint, dir: &CVec, fractions: &[f64]) -> Result<Vec<CPoint>> {
    let (_, u) = CDirection::new(dir.clone()).normalized()?;
    let t = domain
        .ray_exit(from.coords(), &u)
        .filter(|t| t.is_finite())
        .ok_or_else(|| Error::InvalidParameter("ray does not leave the domain".into()))?;
    fractions
        .iter()
        .map(|&f| {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidParameter(format!("fraction {f} outside (0, 1)")));
            }
            Ok(CPoint::new(from.coords() + &u * C64::new((1.0 - f) * t, 0.0)))
        })
        .collect()
}

/// `count` directions in C^n, well spread on the unit sphere.
pub fn sample_directions(dim: usize, count: usize, seed: u64) -> Vec<CDirection> {
    sphere_directions(2 * dim, count, seed)
        .into_iter()
        .map(|r| CDirection::new(CPoint::from_real(&r).into_inner()))
        .collect()
}

/// Mean-value bounds `1/(b^2n V) <= K(0, 0) <= 1/(a^2n V)` on the chart image,
/// `V` the volume of the unit ball. `ev` must be built on the image.
pub fn kernel_center_bounds_check(ev: &KernelEvaluator, cert: &SqueezingCertificate, slack: f64) -> Vec<ReportRow> {
    let n = ev.dim();
    let vol = unit_ball_volume(n);
    let p = ComplexList::from(&cert.base_point);
    let tol = Tolerances {
        kernel_degree: Some(ev.degree()),
        kernel_points: Some(ev.count),
        ..Tolerances::default()
    };
    let k = match ev.kernel_diag(&CPoint::origin(n)) {
        Ok(k) => k,
        Err(e) => return vec![ReportRow::skipped("K(0,0) bounds", p, e.to_string())],
    };
    let lower = 1.0 / (cert.b.powi(2 * n as i32) * vol);
    let upper = 1.0 / (cert.a.powi(2 * n as i32) * vol);
    vec![
        ReportRow::check("1/(b^2n V) <= K(0,0)", p.clone(), lower, k, slack).with_tolerances(tol.clone()),
        ReportRow::check("K(0,0) <= 1/(a^2n V)", p, k, upper, slack).with_tolerances(tol),
    ]
}

/// Kernel bounds at each certificate's base point.
pub fn kernel_bounds_report(
    domain: &Domain,
    certs: &[SqueezingCertificate],
    kernels: &mut ChartKernels,
    opts: &VerifyOptions,
) -> InequalityReport {
    let mut rep = InequalityReport::new(ClaimId::LEM1_KERNEL, domain.model_kind().to_string(), opts.slack);
    rep.cert = certs.first().map(|c| c.summary());
    for cert in certs {
        match kernels.evaluator(domain, cert) {
            Ok(ev) => rep.rows.extend(kernel_center_bounds_check(&ev, cert, opts.slack)),
            Err(e) => rep.rows.push(ReportRow::skipped(
                "K(0,0) bounds",
                ComplexList::from(&cert.base_point),
                e.to_string(),
            )),
        }
    }
    rep.finish()
}

/// `|J(phi_x)(x)|` along a path to the boundary: strictly increasing, and the
/// last value at least `ratio` times the first.
pub fn jacobian_blowup_report(domain: &Domain, path: &[CPoint], ratio: f64) -> InequalityReport {
    let mut rep = InequalityReport::new(ClaimId::LEM2_JACOBIAN, domain.model_kind().to_string(), 0.0);
    let mut values: Vec<(ComplexList, f64)> = Vec::new();
    for x in path {
        let p = ComplexList::from(x);
        let j = squeeze_certificate(domain, x).and_then(|c| {
            if rep.cert.is_none() {
                rep.cert = Some(c.summary());
            }
            c.map.jacobian_det(x)
        });
        match j {
            Ok(j) => values.push((p, j.norm())),
            Err(e) => rep.rows.push(ReportRow::skipped(
                "|J| along path",
                p,
                format!("map construction: {e}"),
            )),
        }
    }
    if values.len() < 2 {
        rep.error = Some(format!("{} usable path points, need 2", values.len()));
        return rep.finish();
    }
    for w in values.windows(2) {
        let row = ReportRow::strict("|J(x_k)| < |J(x_k+1)|", w[1].0.clone(), w[0].1, w[1].1);
        let row = if row.pass {
            row
        } else {
            row.with_note("not strictly increasing")
        };
        rep.rows.push(row);
    }
    let first = values[0].1;
    let (last_p, last) = values.last().cloned().expect("two values");
    rep.rows.push(
        ReportRow::check("ratio >= threshold", last_p, ratio, last / first, 0.0)
            .with_note(format!("|J| from {first:.6e} to {last:.6e}")),
    );
    rep.notes.push(format!("required ratio {ratio}"));
    rep.finish()
}

/// Metric values feeding the inequality chain at one `(x, v)`.
#[derive(Clone, Debug)]
pub struct ChainLegs {
    pub point: CPoint,
    pub direction: CDirection,
    /// `[lo, hi]` for `g_K`; `lo` bounds `g_C` from below.
    pub kobayashi: std::result::Result<(f64, f64), String>,
    pub bergman: std::result::Result<f64, String>,
    pub ke: std::result::Result<f64, String>,
    /// `ke` holds the Bergman value.
    pub ke_proxy: bool,
}

pub fn chain_legs(
    domain: &Domain,
    pairs: &[(CPoint, CDirection)],
    kernels: &mut ChartKernels,
    finsler: &FinslerOptions,
) -> Vec<ChainLegs> {
    let model = KeModelMetric::for_domain(domain).ok();
    pairs
        .iter()
        .map(|(x, v)| {
            let kobayashi = bracket(domain, x, v, finsler)
                .map(|b| (b.lo, b.hi))
                .map_err(|e| e.to_string());
            let bergman = squeeze_certificate(domain, x)
                .and_then(|c| kernels.metric_at_base(domain, &c, v))
                .map_err(|e| e.to_string());
            let (ke, ke_proxy) = match &model {
                Some(m) => (ke_metric(m, x, v).map_err(|e| e.to_string()), false),
                None => (bergman.clone(), true),
            };
            ChainLegs {
                point: x.clone(),
                direction: v.clone(),
                kobayashi,
                bergman,
                ke,
                ke_proxy,
            }
        })
        .collect()
}

/// Both printed forms of the upper KE constant: `b^(4n-2) n^(n-1) / a` and
/// `b^(4n-2) n^(n-1) / a^(2n-2)`.
pub fn ke_upper_constants(a: f64, b: f64, n: usize) -> (f64, f64) {
    let base = b.powi(4 * n as i32 - 2) * (n as f64).powi(n as i32 - 1);
    (base / a, base / a.powi(2 * n as i32 - 2))
}

/// `[2 pi / a^3 (2b / a)^n]^2`.
pub fn bergman_upper_constant(a: f64, b: f64, n: usize) -> f64 {
    (2.0 * PI / a.powi(3) * (2.0 * b / a).powi(n as i32)).powi(2)
}

/// The three two-sided comparisons with `g_K` under the constants of `cert`.
/// Lower bounds use the upper end of the `g_K` bracket and upper bounds the lower end.
pub fn comparison_from_legs(
    domain: &Domain,
    cert: &SqueezingCertificate,
    legs: &[ChainLegs],
    opts: &VerifyOptions,
) -> Vec<InequalityReport> {
    let n = domain.dim();
    let (a, b) = (cert.a, cert.b);
    let s = opts.slack;
    let kind = domain.model_kind().to_string();
    let mut ck = InequalityReport::new(ClaimId::THM2A_CK, kind.clone(), s);
    let mut bk = InequalityReport::new(ClaimId::THM2A_BK, kind.clone(), s);
    let mut kek = InequalityReport::new(ClaimId::THM2A_KEK, kind, s);
    let c_b = bergman_upper_constant(a, b, n);
    let (ke1, ke2) = ke_upper_constants(a, b, n);
    let c_ke = ke1.max(ke2);
    let tol = chain_tol(opts);
    let proxied = legs.iter().any(|l| l.ke_proxy);

    for l in legs {
        let p = ComplexList::from(&l.point);
        let d = ComplexList::from(&l.direction);
        let row = |r: ReportRow| r.with_direction(d.clone()).with_tolerances(tol.clone());
        let skip = |label: &str, why: &str| row(ReportRow::skipped(label, p.clone(), why));
        match &l.kobayashi {
            &Ok((lo, hi)) => {
                ck.rows
                    .push(row(ReportRow::check("(a/b) g_K <= g_C", p.clone(), a / b * hi, lo, s)));
                ck.rows.push(row(ReportRow::check("g_C <= g_K", p.clone(), lo, hi, s)));
                match &l.bergman {
                    Ok(gb) => {
                        bk.rows
                            .push(row(ReportRow::check("(a/b) g_K <= g_B", p.clone(), a / b * hi, *gb, s)));
                        bk.rows
                            .push(row(ReportRow::check("g_B <= C_B g_K", p.clone(), *gb, c_b * lo, s)));
                    }
                    Err(e) => {
                        bk.rows.push(skip("(a/b) g_K <= g_B", e));
                        bk.rows.push(skip("g_B <= C_B g_K", e));
                    }
                }
                match &l.ke {
                    Ok(gke) => {
                        let lower = a * a / (b * b * n as f64) * hi;
                        let mut r1 = row(ReportRow::check("(a^2/(b^2 n)) g_K <= g_KE", p.clone(), lower, *gke, s));
                        let alt = super::report::relative_margin(*gke, ke1.min(ke2) * lo);
                        let mut r2 = row(ReportRow::check("g_KE <= C_KE g_K", p.clone(), *gke, c_ke * lo, s))
                            .with_note(format!(
                                "C_KE = max({ke1:.6e}, {ke2:.6e}); margin with the smaller constant {alt:.6e}"
                            ));
                        if l.ke_proxy {
                            r1 = r1.with_note("KE-by-proxy");
                            r2.note = r2.note.map(|n| format!("KE-by-proxy; {n}"));
                        }
                        kek.rows.push(r1);
                        kek.rows.push(r2);
                    }
                    Err(e) => {
                        kek.rows.push(skip("(a^2/(b^2 n)) g_K <= g_KE", e));
                        kek.rows.push(skip("g_KE <= C_KE g_K", e));
                    }
                }
            }
            Err(e) => {
                for (rep, labels) in [
                    (&mut ck, ["(a/b) g_K <= g_C", "g_C <= g_K"]),
                    (&mut bk, ["(a/b) g_K <= g_B", "g_B <= C_B g_K"]),
                    (&mut kek, ["(a^2/(b^2 n)) g_K <= g_KE", "g_KE <= C_KE g_K"]),
                ] {
                    for lab in labels {
                        rep.rows.push(skip(lab, e));
                    }
                }
            }
        }
    }
    bk.notes.push(format!("C_B = {c_b:.6e}"));
    kek.notes.push(format!(
        "C_KE candidates {ke1:.6e} and {ke2:.6e}; the larger is asserted"
    ));
    if proxied {
        kek.notes
            .push("KE-by-proxy: g_KE replaced by g_B (no closed form on this domain)".into());
    }
    [ck, bk, kek]
        .into_iter()
        .map(|mut r| {
            r.cert = Some(cert.summary());
            r.finish()
        })
        .collect()
}

/// Pairs `points[i]` with `dirs[i % dirs.len()]` and runs the chain.
pub fn comparison_report(
    domain: &Domain,
    cert: &SqueezingCertificate,
    points: &[CPoint],
    dirs: &[CDirection],
    kernels: &mut ChartKernels,
    opts: &VerifyOptions,
) -> Result<Vec<InequalityReport>> {
    if dirs.is_empty() {
        return Err(Error::InvalidParameter("no directions".into()));
    }
    for v in dirs {
        v.normalized()?;
    }
    let pairs: Vec<(CPoint, CDirection)> = points
        .iter()
        .enumerate()
        .map(|(i, x)| (x.clone(), dirs[i % dirs.len()].clone()))
        .collect();
    let legs = chain_legs(domain, &pairs, kernels, &opts.finsler);
    Ok(comparison_from_legs(domain, cert, &legs, opts))
}

/// `K d^2 (-log d)^2 >= floor` along a ray; the domain must lie in the unit ball.
pub fn growth_report(
    domain: &Domain,
    ray: &[CPoint],
    kernels: &mut ChartKernels,
    opts: &VerifyOptions,
) -> InequalityReport {
    let mut rep = InequalityReport::new(ClaimId::COR3_GROWTH, domain.model_kind().to_string(), opts.slack);
    match boundary_growth(domain, ray, kernels) {
        Ok(table) => {
            for r in &table.rows {
                rep.rows.push(
                    ReportRow::check(
                        "floor <= K d^2 (-log d)^2",
                        ComplexList::from(&r.point),
                        opts.growth_floor,
                        r.scaled,
                        opts.slack,
                    )
                    .with_note(format!("d = {:.3e}, K = {:.6e}", r.distance, r.kernel))
                    .with_tolerances(kernel_tol(opts)),
                );
            }
            rep.notes
                .push(format!("min K d^2 (-log d)^2 = {:.6e}", table.min_scaled));
        }
        Err(e) => rep.error = Some(e.to_string()),
    }
    rep.finish()
}

/// `u = -(det g_KE)^(-alpha)`: `-1 <= u < 0` and Levi form `>= 1e-4` at each point.
pub fn exhaustion_report(domain: &Domain, points: &[CPoint], alpha: f64, slack: f64) -> Result<InequalityReport> {
    let model = KeModelMetric::for_domain(domain)?;
    let mut rep = InequalityReport::new(ClaimId::LEM5_PSH, domain.model_kind().to_string(), slack);
    let tol = Tolerances {
        fd_step: Some(FD_STEP),
        ..Tolerances::default()
    };
    let mut worst = f64::INFINITY;
    for x in points {
        let p = ComplexList::from(x);
        match hyperconvex_exhaustion(&model, x, alpha) {
            Ok(u) => {
                let mut row = ReportRow::check("|u| <= 1", p.clone(), u.abs(), 1.0, 0.0);
                if !(u < 0.0) {
                    row.pass = false;
                    row = row.with_note("u is not negative");
                }
                rep.rows.push(row.with_tolerances(tol.clone()));
            }
            Err(e) => rep.rows.push(ReportRow::skipped("|u| <= 1", p.clone(), e.to_string())),
        }
        match exhaustion_levi_min(&model, x, alpha, FD_STEP) {
            Ok(l) => {
                worst = worst.min(l);
                rep.rows.push(
                    ReportRow::check("1e-4 <= min eig ddbar u", p, LEVI_FLOOR, l, 0.0).with_tolerances(tol.clone()),
                );
            }
            Err(e) => rep
                .rows
                .push(ReportRow::skipped("1e-4 <= min eig ddbar u", p, e.to_string())),
        }
    }
    rep.notes
        .push(format!("alpha = {alpha}; smallest Levi eigenvalue {worst:.6e}"));
    Ok(rep.finish())
}

/// `|dphi v|^2 / b^2 <= g_K(x; v) <= |dphi v|^2 / a^2` at the base point, with the
/// lower end of the bracket tested against the lower bound and the upper end
/// against the upper bound.
pub fn schwarz_squeeze_check(
    domain: &Domain,
    cert: &SqueezingCertificate,
    dirs: &[CDirection],
    opts: &VerifyOptions,
) -> InequalityReport {
    let mut rep = InequalityReport::new(ClaimId::SCHWARZ_SQUEEZE, domain.model_kind().to_string(), opts.slack);
    rep.cert = Some(cert.summary());
    let x = &cert.base_point;
    let p = ComplexList::from(x);
    for v in dirs {
        let d = ComplexList::from(v);
        let pushed = match cert.map.push_forward(x.coords(), v.coords()) {
            Ok(w) => w.norm_squared(),
            Err(e) => {
                rep.rows
                    .push(ReportRow::skipped("Schwarz bounds", p.clone(), e.to_string()).with_direction(d));
                continue;
            }
        };
        match bracket(domain, x, v, &opts.finsler) {
            Ok(b) => {
                let tol = finsler_tol(opts);
                rep.rows.push(
                    ReportRow::check(
                        "|dphi v|^2 / b^2 <= g_K",
                        p.clone(),
                        pushed / (cert.b * cert.b),
                        b.lo,
                        opts.slack,
                    )
                    .with_direction(d.clone())
                    .with_tolerances(tol.clone()),
                );
                rep.rows.push(
                    ReportRow::check(
                        "g_K <= |dphi v|^2 / a^2",
                        p.clone(),
                        b.hi,
                        pushed / (cert.a * cert.a),
                        opts.slack,
                    )
                    .with_direction(d)
                    .with_tolerances(tol),
                );
            }
            Err(e) => rep
                .rows
                .push(ReportRow::skipped("Schwarz bounds", p.clone(), e.to_string()).with_direction(d)),
        }
    }
    rep.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::{build_evaluator, KernelOptions};
    use crate::domain::squeeze::model_certificate;

    fn opts(dim: usize) -> VerifyOptions {
        VerifyOptions::for_dim(dim)
    }

    #[test]
    fn volumes() {
        assert!((unit_ball_volume(1) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI * PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn constants() {
        // polydisc, a = 1, b = sqrt 2: [2 pi (2 sqrt 2)^2]^2
        let c = bergman_upper_constant(1.0, 2f64.sqrt(), 2);
        assert!((c - (16.0 * PI).powi(2)).abs() < 1e-9 * c);
        let (k1, k2) = ke_upper_constants(0.5, 1.0, 2);
        assert_eq!((k1, k2), (4.0, 8.0));
    }

    #[test]
    fn disc_kernel_bounds_saturate() {
        let d = Domain::unit_disc();
        let ev = build_evaluator(&d, &KernelOptions::for_dim(1)).unwrap();
        let cert = model_certificate(&d, &CPoint::origin(1)).unwrap();
        let rows = kernel_center_bounds_check(&ev, &cert, 0.05);
        assert!(rows.iter().all(|r| r.pass && r.margin.abs() < 0.02), "{rows:?}");
    }

    #[test]
    fn disc_jacobian_path() {
        let d = Domain::unit_disc();
        let path = boundary_ray(
            &d,
            &CPoint::origin(1),
            &CVec::from_element(1, C64::new(1.0, 0.0)),
            &[0.3, 0.1, 0.03, 0.003],
        )
        .unwrap();
        let rep = jacobian_blowup_report(&d, &path, 80.0);
        assert!(rep.pass, "{rep:?}");
        let flat = jacobian_blowup_report(&d, &[CPoint::real(&[0.5]), CPoint::real(&[0.5])], 1.0);
        assert!(!flat.pass);
        assert_eq!(flat.rows[0].note.as_deref(), Some("not strictly increasing"));
    }

    #[test]
    fn polydisc_center_chain() {
        let d = Domain::unit_polydisc(2);
        let mut o = opts(2);
        o.kernel = KernelOptions {
            degree: 6,
            count: 50_000,
            seed: 42,
        };
        let x = CPoint::origin(2);
        let cert = model_certificate(&d, &x).unwrap();
        let mut kernels = ChartKernels::new(o.kernel);
        let reps = comparison_report(&d, &cert, &[x], &[CDirection::axis(2, 0)], &mut kernels, &o).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().all(|r| r.pass), "{reps:#?}");
        assert!(comparison_report(
            &d,
            &cert,
            &[CPoint::origin(2)],
            &[CDirection::real(&[0.0, 0.0])],
            &mut kernels,
            &o
        )
        .is_err());
    }

    #[test]
    fn exhaustion_on_models() {
        let disc = Domain::unit_disc();
        let pts = disc.sample_interior(20, 3).unwrap();
        assert!(exhaustion_report(&disc, &pts, 0.5, 0.05).unwrap().pass);
        let ball = Domain::unit_ball(2);
        let pts = ball.sample_interior(20, 3).unwrap();
        assert!(exhaustion_report(&ball, &pts, 1.0 / 3.0, 0.05).unwrap().pass);
        assert!(exhaustion_report(&Domain::ellipsoid(&[1.0, 4.0]).unwrap(), &pts, 0.5, 0.05).is_err());
    }

    #[test]
    fn schwarz_on_the_polydisc() {
        let d = Domain::unit_polydisc(2);
        let cert = model_certificate(&d, &CPoint::origin(2)).unwrap();
        let v = CDirection::real(&[0.5f64.sqrt(), 0.5f64.sqrt()]);
        let rep = schwarz_squeeze_check(&d, &cert, &[v], &opts(2));
        assert!(rep.pass, "{rep:#?}");
    }
}
