//! Squeezing certificates: a chart `phi` with `phi(x) = 0` and `B_a ⊂ phi(Omega) ⊂ B_b`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::maps::{aligning_unitary, BiholoMap, MapKind};
use super::{Domain, ModelKind};
use crate::error::{Error, Result};
use crate::point::{rdot, CPoint, CVec, ComplexList, C64};

/// Boundary samples used when a certificate is measured.
pub const DEFAULT_BOUNDARY_SAMPLES: usize = 1024;
const BOUNDARY_SEED: u64 = 0x5c0e;

#[derive(Clone, Debug)]
pub struct SqueezingCertificate {
    pub base_point: CPoint,
    pub map: BiholoMap,
    /// Inner radius.
    pub a: f64,
    /// Outer radius.
    pub b: f64,
    pub n_boundary_samples: usize,
    /// True when `phi` is an automorphism onto a model and `(a, b)` are exact.
    pub automorphism: bool,
    /// A priori upper bound on `b` from the construction, when there is one.
    pub outer_bound: Option<f64>,
}

/// Serializable view of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub base_point: ComplexList,
    pub map_kind: MapKind,
    pub a: f64,
    pub b: f64,
    pub n_boundary_samples: usize,
    pub automorphism: bool,
}

/// Outcome of checking a certificate against fresh samples.
#[derive(Clone, Debug)]
pub struct CertificateCheck {
    pub min_modulus: f64,
    pub max_modulus: f64,
    pub center_residual: f64,
    pub pullback_inside: usize,
    pub pullback_total: usize,
}

impl CertificateCheck {
    pub fn passes(&self, cert: &SqueezingCertificate) -> bool {
        self.min_modulus >= cert.a - 1e-6
            && self.max_modulus <= cert.b + 1e-6
            && self.center_residual <= 1e-10
            && self.pullback_inside == self.pullback_total
    }
}

impl SqueezingCertificate {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            base_point: ComplexList::from(&self.base_point),
            map_kind: self.map.kind(),
            a: self.a,
            b: self.b,
            n_boundary_samples: self.n_boundary_samples,
            automorphism: self.automorphism,
        }
    }

    /// Same chart with a different `(a, b)`; used for negative controls.
    pub fn with_radii(&self, a: f64, b: f64) -> Self {
        SqueezingCertificate { a, b, ..self.clone() }
    }

    /// Checks containment on `samples` boundary points, the centering of the base
    /// point and that a grid of `B_{a - 1e-3}` pulls back into the domain.
    pub fn validate(&self, domain: &Domain, samples: usize, seed: u64) -> Result<CertificateCheck> {
        let (min_modulus, max_modulus) = image_moduli(domain, &self.map, samples, seed)?;
        let center_residual = self.map.apply(&self.base_point)?.norm();
        let inverse = self.map.inverse()?;
        let n = domain.dim();
        let r = self.a - 1e-3;
        let mut grid = Vec::new();
        if r > 0.0 {
            let ball = Domain::ball(n, r)?;
            grid.extend(ball.sample_interior(samples, seed ^ 0x9a1d)?);
            grid.extend(ball.sample_boundary(samples, seed ^ 0x9a1e)?);
        }
        let pullback_inside = grid
            .iter()
            .filter(|w| matches!(inverse.apply(w), Ok(z) if domain.rho(&z) < 0.0))
            .count();
        Ok(CertificateCheck {
            min_modulus,
            max_modulus,
            center_residual,
            pullback_inside,
            pullback_total: grid.len(),
        })
    }
}

fn image_moduli(domain: &Domain, map: &BiholoMap, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for p in domain.sample_boundary(samples, seed)? {
        let m = map.apply(&p)?.norm();
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok((lo, hi))
}

/// Sample starts polished by local search along the boundary.
const REFINE_STARTS: usize = 8;
const REFINE_EVALS: usize = 4000;

/// `(min, max)` of `|map(p)|` over boundary samples, with the extreme samples
/// polished by a pattern search over ray directions from the domain anchor.
fn refined_moduli(domain: &Domain, map: &BiholoMap, boundary: &[CPoint]) -> Result<(f64, f64)> {
    let mut mods = Vec::with_capacity(boundary.len());
    for p in boundary {
        mods.push(map.apply(p)?.norm());
    }
    let mut order: Vec<usize> = (0..mods.len()).collect();
    order.sort_by(|&i, &j| mods[i].total_cmp(&mods[j]));
    let mut lo = mods.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = mods.iter().cloned().fold(0.0, f64::max);
    let anchor = domain.anchor().coords().clone();
    let modulus = |u: &CVec| -> Option<f64> {
        let t = domain.ray_exit(&anchor, u)?;
        let p = CPoint::new(&anchor + u * C64::new(t, 0.0));
        map.apply(&p).ok().map(|w| w.norm()).filter(|m| m.is_finite())
    };
    for (sign, starts) in [
        (-1.0, order.iter().take(REFINE_STARTS).collect::<Vec<_>>()),
        (1.0, order.iter().rev().take(REFINE_STARTS).collect::<Vec<_>>()),
    ] {
        for &&i in &starts {
            let mut u = boundary[i].coords() - &anchor;
            let norm = u.norm();
            if !(norm > 0.0) {
                continue;
            }
            u /= C64::new(norm, 0.0);
            let Some(mut best) = modulus(&u) else { continue };
            let mut step = 0.05;
            let mut evals = 0;
            while step > 1e-9 && evals < REFINE_EVALS {
                let mut moved = false;
                for k in 0..2 * u.len() {
                    for dir in [1.0, -1.0] {
                        let mut v = u.clone();
                        let unit = if k % 2 == 0 {
                            C64::new(dir * step, 0.0)
                        } else {
                            C64::new(0.0, dir * step)
                        };
                        v[k / 2] += unit;
                        let vn = v.norm();
                        v /= C64::new(vn, 0.0);
                        evals += 1;
                        if let Some(m) = modulus(&v) {
                            if sign * (m - best) > 1e-14 * best {
                                best = m;
                                u = v;
                                moved = true;
                            }
                        }
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            if sign > 0.0 {
                hi = hi.max(best);
            } else {
                lo = lo.min(best);
            }
        }
    }
    Ok((lo, hi))
}

/// Exact certificate from a model automorphism: ball/disc of radius r map onto the
/// unit ball (`a = b = 1`), a polydisc onto the unit polydisc (`a = 1, b = sqrt(n)`).
pub fn model_certificate(domain: &Domain, x: &CPoint) -> Result<SqueezingCertificate> {
    if !domain.contains(x)? {
        return Err(Error::OutsideDomain { rho: domain.rho(x) });
    }
    let n = domain.dim();
    let (map, b) = match (domain.model_kind(), domain.shape()) {
        (ModelKind::Disc, super::Shape::Ball { radius }) => {
            let w = x[0] / radius;
            (compose_scaled(BiholoMap::disc_mobius(w)?, &[*radius])?, 1.0)
        }
        (ModelKind::Ball, super::Shape::Ball { radius }) => {
            let w = CPoint::new(x.coords().unscale(*radius));
            (compose_scaled(BiholoMap::ball_mobius(&w)?, &vec![*radius; n])?, 1.0)
        }
        (ModelKind::Polydisc, super::Shape::Polydisc { radii }) => {
            let w = CPoint::from_slice(&x.coords().iter().zip(radii).map(|(z, r)| z / r).collect::<Vec<_>>());
            (
                compose_scaled(BiholoMap::product_mobius(&w)?, radii)?,
                (n as f64).sqrt(),
            )
        }
        (kind, _) => {
            return Err(Error::Unsupported(format!(
                "no automorphism certificate for {kind} domains"
            )))
        }
    };
    Ok(SqueezingCertificate {
        base_point: x.clone(),
        map,
        a: 1.0,
        b,
        n_boundary_samples: 0,
        automorphism: true,
        outer_bound: Some(b),
    })
}

fn compose_scaled(outer: BiholoMap, radii: &[f64]) -> Result<BiholoMap> {
    if radii.iter().all(|&r| r == 1.0) {
        return Ok(outer);
    }
    let n = radii.len();
    let linear = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(1.0 / radii[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let scale = BiholoMap::affine(linear, crate::point::CVec::zeros(n))?;
    Ok(BiholoMap::compose(outer, scale))
}

/// Chart for strongly convex domains. The largest ball tangent at the nearest
/// boundary point `q` is normalized to the unit ball touching `e_1`, then the
/// ball automorphism moves the image of `x` to the origin. `(a, b)` are the
/// measured moduli on boundary samples, with `a` capped at 1 (the unit ball
/// lies inside the image by construction).
pub fn convex_squeeze_map(domain: &Domain, x: &CPoint, samples: usize) -> Result<(BiholoMap, SqueezingCertificate)> {
    if !domain.is_convex() {
        return Err(Error::Unsupported("convex squeeze needs a convex domain".into()));
    }
    let foot = domain.nearest_boundary(x)?;
    let d = foot.distance;
    let q = foot.point.coords().clone();
    let nu = foot.normal.clone();
    if !(nu.norm() - 1.0).abs().lt(&1e-6) {
        return Err(Error::Bracketing("boundary normal is degenerate".into()));
    }

    // largest inner tangent radius: balls B_r(q - r nu) are nested in r
    let fits = |r: f64| -> bool {
        let c = CPoint::new(&q - &nu * C64::new(r, 0.0));
        match domain.boundary_distance(&c) {
            Ok(dist) => dist >= r * (1.0 - 1e-6),
            Err(_) => false,
        }
    };
    let mut lo = d;
    let mut hi = domain.bounding_radius();
    let a_q = if fits(hi) {
        hi
    } else {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        lo
    };
    if !(a_q > 0.0) {
        return Err(Error::Bracketing("inner tangent radius collapsed".into()));
    }

    // smallest outer tangent radius: p in B_r(q - r nu) iff |p - q|^2 <= 2 r <q - p, nu>
    let boundary = domain.sample_boundary(samples, BOUNDARY_SEED)?;
    let mut b_q: f64 = a_q;
    for p in &boundary {
        let diff = &q - p.coords();
        let h = rdot(&diff, &nu);
        let dd = diff.norm_squared();
        if h > 1e-12 {
            b_q = b_q.max(dd / (2.0 * h));
        } else if dd > 1e-12 {
            return Err(Error::Bracketing(
                "boundary sample outside the supporting half-space".into(),
            ));
        }
    }

    let u = aligning_unitary(&nu)?;
    let c = &q - &nu * C64::new(a_q, 0.0);
    let linear = u.unscale(a_q);
    let offset = -(&linear * &c);
    let affine = BiholoMap::affine(linear, offset)?;
    // A(x) = ((a_q - d) / a_q) e_1 up to rounding; recentre on the computed image
    let center = affine.apply(x)?;
    let mobius = BiholoMap::ball_mobius(&center)?;
    let map = BiholoMap::ConvexSqueeze {
        steps: vec![affine, mobius],
    };

    let (lo_mod, hi_mod) = refined_moduli(domain, &map, &boundary)?;
    let cert = SqueezingCertificate {
        base_point: x.clone(),
        map: map.clone(),
        a: lo_mod.min(1.0),
        b: hi_mod,
        n_boundary_samples: boundary.len(),
        automorphism: false,
        outer_bound: Some(2.0 * b_q / a_q),
    };
    Ok((map, cert))
}

/// Fallback chart `z -> z - x` with the inscribed and measured outer radii.
pub fn translation_certificate(domain: &Domain, x: &CPoint, samples: usize) -> Result<SqueezingCertificate> {
    let a = domain.boundary_distance(x)?;
    let map = BiholoMap::translation(x);
    let boundary = domain.sample_boundary(samples, BOUNDARY_SEED)?;
    let (_, b) = refined_moduli(domain, &map, &boundary)?;
    Ok(SqueezingCertificate {
        base_point: x.clone(),
        map,
        a,
        b: b.max(a),
        n_boundary_samples: samples,
        automorphism: false,
        outer_bound: None,
    })
}

/// Best available chart: model automorphism, convex construction, or translation.
pub fn squeeze_certificate(domain: &Domain, x: &CPoint) -> Result<SqueezingCertificate> {
    if domain.is_homogeneous_model() {
        model_certificate(domain, x)
    } else if domain.is_convex() {
        convex_squeeze_map(domain, x, DEFAULT_BOUNDARY_SAMPLES).map(|(_, c)| c)
    } else {
        translation_certificate(domain, x, DEFAULT_BOUNDARY_SAMPLES)
    }
}

/// Empirical uniform pair over a family of certificates: `(min a, max b)`.
pub fn uniform_bounds(certs: &[SqueezingCertificate]) -> Option<(f64, f64)> {
    if certs.is_empty() {
        return None;
    }
    let a = certs.iter().map(|c| c.a).fold(f64::INFINITY, f64::min);
    let b = certs.iter().map(|c| c.b).fold(0.0, f64::max);
    Some((a, b))
}
