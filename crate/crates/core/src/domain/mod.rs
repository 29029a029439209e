//! Bounded domains in C^n, their samplers and boundary geometry.

pub mod config;
pub mod expr;
pub mod maps;
pub mod sampling;
pub mod squeeze;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{rdot, CPoint, CVec, C64};

pub use expr::Expr;
pub use maps::BiholoMap;
use maps::CMat;
use sampling::{sphere_directions, Halton};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Disc,
    Ball,
    Polydisc,
    Ellipsoid,
    GenericConvex,
    Generic,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::Disc => "disc",
            ModelKind::Ball => "ball",
            ModelKind::Polydisc => "polydisc",
            ModelKind::Ellipsoid => "ellipsoid",
            ModelKind::GenericConvex => "generic-convex",
            ModelKind::Generic => "generic",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub enum Shape {
    /// `|z| < radius`; the disc when n = 1.
    Ball { radius: f64 },
    /// `|z_i| < radii[i]` for every i.
    Polydisc { radii: Vec<f64> },
    /// `sum c_i |z_i|^2 < 1`.
    Ellipsoid { coeffs: Vec<f64> },
    /// `(z - center)^H matrix (z - center) < 1` with `matrix` Hermitian positive definite.
    Quadric { matrix: CMat, center: CVec },
    /// `Re expr(z / scale) < 0`.
    Expr { expr: Arc<Expr>, scale: f64 },
    /// Image of `base` under a chart; `inverse` maps back into `base`.
    Image { base: Arc<Domain>, inverse: Arc<BiholoMap> },
}

/// A bounded domain `{rho < 0}` contained in `B_R(0)`.
#[derive(Clone, Debug)]
pub struct Domain {
    dim: usize,
    shape: Shape,
    bounding_radius: f64,
    convex: bool,
    anchor: CPoint,
}

/// Result of a nearest-boundary query.
#[derive(Clone, Debug)]
pub struct BoundaryFoot {
    pub distance: f64,
    pub point: CPoint,
    /// Outward unit normal at `point` (Euclidean, as a complex vector).
    pub normal: CVec,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

impl Domain {
    pub fn disc(radius: f64) -> Result<Self> {
        Self::ball(1, radius)
    }

    pub fn unit_disc() -> Self {
        Self::disc(1.0).expect("valid")
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be >= 1".into()));
        }
        Ok(Domain {
            dim,
            shape: Shape::Ball { radius },
            bounding_radius: radius,
            convex: true,
            anchor: CPoint::origin(dim),
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(dim, 1.0).expect("valid")
    }

    pub fn polydisc(radii: &[f64]) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidParameter("polydisc needs radii".into()));
        }
        for &r in radii {
            positive("radius", r)?;
        }
        Ok(Domain {
            dim: radii.len(),
            bounding_radius: radii.iter().map(|r| r * r).sum::<f64>().sqrt(),
            shape: Shape::Polydisc { radii: radii.to_vec() },
            convex: true,
            anchor: CPoint::origin(radii.len()),
        })
    }

    pub fn unit_polydisc(dim: usize) -> Self {
        Self::polydisc(&vec![1.0; dim]).expect("valid")
    }

    /// `sum coeffs[i] |z_i|^2 < 1`.
    pub fn ellipsoid(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("ellipsoid needs coefficients".into()));
        }
        for &c in coeffs {
            positive("coefficient", c)?;
        }
        let cmin = coeffs.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Domain {
            dim: coeffs.len(),
            bounding_radius: 1.0 / cmin.sqrt(),
            shape: Shape::Ellipsoid {
                coeffs: coeffs.to_vec(),
            },
            convex: true,
            anchor: CPoint::origin(coeffs.len()),
        })
    }

    /// Domain given by a parsed defining function.
    pub fn generic(dim: usize, expr: Expr, bounding_radius: f64, convex: bool) -> Result<Self> {
        positive("bounding radius", bounding_radius)?;
        if expr.max_var() > dim {
            return Err(Error::InvalidParameter(format!(
                "defining function references z{} but dim = {dim}",
                expr.max_var()
            )));
        }
        let mut d = Domain {
            dim,
            shape: Shape::Expr {
                expr: Arc::new(expr),
                scale: 1.0,
            },
            bounding_radius,
            convex,
            anchor: CPoint::origin(dim),
        };
        d.anchor = d.find_anchor()?;
        Ok(d)
    }

    /// `map(base)`, described through the inverse of `map`. Linear fractional images
    /// of balls and ellipsoids are again ellipsoids and are stored in closed form.
    pub fn image(base: &Domain, map: &BiholoMap, bounding_radius: f64) -> Result<Self> {
        positive("bounding radius", bounding_radius)?;
        if let Some(shape) = quadric_image(base, map) {
            let mut d = Domain {
                dim: base.dim,
                shape,
                bounding_radius,
                convex: true,
                anchor: CPoint::origin(base.dim),
            };
            d.anchor = d.find_anchor()?;
            return Ok(d);
        }
        let mut d = Domain {
            dim: base.dim,
            shape: Shape::Image {
                base: Arc::new(base.clone()),
                inverse: Arc::new(map.inverse()?),
            },
            bounding_radius,
            convex: false,
            anchor: CPoint::origin(base.dim),
        };
        d.anchor = d.find_anchor()?;
        Ok(d)
    }

    fn find_anchor(&self) -> Result<CPoint> {
        let origin = CPoint::origin(self.dim);
        if self.rho(&origin) < 0.0 {
            return Ok(origin);
        }
        let pts = self.sample_interior(1, 0)?;
        Ok(pts.into_iter().next().expect("one point"))
    }

    /// `lambda * Omega` for real `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        positive("scale", lambda)?;
        let shape = match &self.shape {
            Shape::Ball { radius } => Shape::Ball {
                radius: radius * lambda,
            },
            Shape::Polydisc { radii } => Shape::Polydisc {
                radii: radii.iter().map(|r| r * lambda).collect(),
            },
            Shape::Ellipsoid { coeffs } => Shape::Ellipsoid {
                coeffs: coeffs.iter().map(|c| c / (lambda * lambda)).collect(),
            },
            Shape::Expr { expr, scale } => Shape::Expr {
                expr: expr.clone(),
                scale: scale * lambda,
            },
            Shape::Quadric { matrix, center } => Shape::Quadric {
                matrix: matrix / C64::new(lambda * lambda, 0.0),
                center: center * C64::new(lambda, 0.0),
            },
            Shape::Image { .. } => return Err(Error::Unsupported("scaling an image domain".into())),
        };
        Ok(Domain {
            dim: self.dim,
            shape,
            bounding_radius: self.bounding_radius * lambda,
            convex: self.convex,
            anchor: CPoint::new(self.anchor.coords() * C64::new(lambda, 0.0)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn anchor(&self) -> &CPoint {
        &self.anchor
    }

    pub fn model_kind(&self) -> ModelKind {
        match &self.shape {
            Shape::Ball { .. } if self.dim == 1 => ModelKind::Disc,
            Shape::Ball { .. } => ModelKind::Ball,
            Shape::Polydisc { .. } => ModelKind::Polydisc,
            Shape::Ellipsoid { .. } => ModelKind::Ellipsoid,
            Shape::Quadric { .. } => ModelKind::GenericConvex,
            Shape::Expr { .. } if self.convex => ModelKind::GenericConvex,
            _ => ModelKind::Generic,
        }
    }

    /// Disc, ball or polydisc: domains with a transitive automorphism group.
    pub fn is_homogeneous_model(&self) -> bool {
        matches!(
            self.model_kind(),
            ModelKind::Disc | ModelKind::Ball | ModelKind::Polydisc
        )
    }

    /// Defining function. Unchecked dimension; `+1` where an image chart is singular.
    pub fn rho_vec(&self, z: &CVec) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => z.norm_squared() / (radius * radius) - 1.0,
            Shape::Polydisc { radii } => {
                z.iter()
                    .zip(radii)
                    .map(|(zi, r)| zi.norm_sqr() / (r * r))
                    .fold(f64::NEG_INFINITY, f64::max)
                    - 1.0
            }
            Shape::Ellipsoid { coeffs } => z.iter().zip(coeffs).map(|(zi, c)| c * zi.norm_sqr()).sum::<f64>() - 1.0,
            Shape::Quadric { matrix, center } => {
                let w = z - center;
                w.dotc(&(matrix * &w)).re - 1.0
            }
            Shape::Expr { expr, scale } => {
                let w: Vec<C64> = z.iter().map(|zi| zi / *scale).collect();
                expr.eval(&w).re
            }
            Shape::Image { base, inverse } => match inverse.apply_vec(z) {
                Ok(p) => base.rho_vec(&p),
                Err(_) => 1.0,
            },
        }
    }

    pub fn rho(&self, z: &CPoint) -> f64 {
        self.rho_vec(z.coords())
    }

    /// Real gradient of rho, encoded as `d/dx_i + i d/dy_i`.
    pub fn rho_gradient(&self, z: &CVec) -> CVec {
        match &self.shape {
            Shape::Ball { radius } => z * C64::new(2.0 / (radius * radius), 0.0),
            Shape::Ellipsoid { coeffs } => {
                CVec::from_iterator(self.dim, z.iter().zip(coeffs).map(|(zi, c)| zi * (2.0 * c)))
            }
            Shape::Quadric { matrix, center } => (matrix * (z - center)) * C64::new(2.0, 0.0),
            Shape::Polydisc { radii } => {
                let (i, _) = z
                    .iter()
                    .zip(radii)
                    .map(|(zi, r)| zi.norm_sqr() / (r * r))
                    .enumerate()
                    .fold(
                        (0, f64::NEG_INFINITY),
                        |acc, (i, v)| {
                            if v > acc.1 {
                                (i, v)
                            } else {
                                acc
                            }
                        },
                    );
                let mut g = CVec::zeros(self.dim);
                g[i] = z[i] * (2.0 / (radii[i] * radii[i]));
                g
            }
            _ => {
                let h = 1e-6 * self.bounding_radius.max(1.0);
                let mut g = CVec::zeros(self.dim);
                let mut w = z.clone();
                for i in 0..self.dim {
                    for (unit, slot) in [(C64::new(h, 0.0), 0), (C64::new(0.0, h), 1)] {
                        w[i] = z[i] + unit;
                        let fp = self.rho_vec(&w);
                        w[i] = z[i] - unit;
                        let fm = self.rho_vec(&w);
                        w[i] = z[i];
                        let d = (fp - fm) / (2.0 * h);
                        if slot == 0 {
                            g[i].re = d;
                        } else {
                            g[i].im = d;
                        }
                    }
                }
                g
            }
        }
    }

    fn check_point(&self, z: &CPoint) -> Result<()> {
        z.ensure_dim(self.dim)?;
        z.ensure_finite()
    }

    pub fn contains(&self, z: &CPoint) -> Result<bool> {
        self.check_point(z)?;
        Ok(self.rho(z) < 0.0)
    }

    /// Largest `t > 0` with `x + s u` inside for all `s < t` (first exit along the ray).
    /// `None` when `u = 0`.
    pub fn ray_exit(&self, x: &CVec, u: &CVec) -> Option<f64> {
        let uu = u.norm_squared();
        if uu == 0.0 {
            return None;
        }
        let quadratic_exit = |weights: &dyn Fn(usize) -> f64| {
            let (mut a, mut b, mut c) = (0.0, 0.0, -1.0);
            for i in 0..self.dim {
                let w = weights(i);
                a += w * u[i].norm_sqr();
                b += w * (x[i].conj() * u[i]).re;
                c += w * x[i].norm_sqr();
            }
            let disc = (b * b - a * c).max(0.0);
            // stable root of a t^2 + 2 b t + c = 0 with c < 0
            if b >= 0.0 {
                -c / (b + disc.sqrt())
            } else {
                (disc.sqrt() - b) / a
            }
        };
        match &self.shape {
            Shape::Ball { radius } => {
                let w = 1.0 / (radius * radius);
                Some(quadratic_exit(&|_| w))
            }
            Shape::Ellipsoid { coeffs } => Some(quadratic_exit(&|i| coeffs[i])),
            Shape::Quadric { matrix, center } => {
                let w = x - center;
                let mu = matrix * u;
                let a = u.dotc(&mu).re;
                let b = w.dotc(&mu).re;
                let c = w.dotc(&(matrix * &w)).re - 1.0;
                let disc = (b * b - a * c).max(0.0);
                Some(if b >= 0.0 {
                    -c / (b + disc.sqrt())
                } else {
                    (disc.sqrt() - b) / a
                })
            }
            Shape::Polydisc { radii } => {
                let mut t = f64::INFINITY;
                for i in 0..self.dim {
                    let a = u[i].norm_sqr();
                    if a == 0.0 {
                        continue;
                    }
                    let b = (x[i].conj() * u[i]).re;
                    let c = x[i].norm_sqr() - radii[i] * radii[i];
                    let disc = (b * b - a * c).max(0.0);
                    let ti = if b >= 0.0 {
                        -c / (b + disc.sqrt())
                    } else {
                        (disc.sqrt() - b) / a
                    };
                    t = t.min(ti);
                }
                Some(t)
            }
            _ => self.ray_exit_numeric(x, u),
        }
    }

    fn ray_exit_numeric(&self, x: &CVec, u: &CVec) -> Option<f64> {
        let un = u.norm();
        let t_max = (self.bounding_radius + x.norm()) / un * 1.001;
        const STEPS: usize = 64;
        let mut lo = 0.0;
        let mut hi = t_max;
        for k in 1..=STEPS {
            let t = t_max * k as f64 / STEPS as f64;
            if self.rho_vec(&(x + u * C64::new(t, 0.0))) >= 0.0 {
                hi = t;
                break;
            }
            lo = t;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.rho_vec(&(x + u * C64::new(mid, 0.0))) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Minkowski gauge of `Omega - x` at `u` and its real gradient in `u`.
    /// Exact on star-shaped domains; `gauge < 1` iff `x + u` lies inside.
    pub fn gauge(&self, x: &CVec, u: &CVec) -> (f64, CVec) {
        let t = match self.ray_exit(x, u) {
            Some(t) if t.is_finite() => t,
            _ => return (0.0, CVec::zeros(self.dim)),
        };
        let q = x + u * C64::new(t, 0.0);
        let g = self.rho_gradient(&q);
        let gu = rdot(&g, u);
        if gu <= 0.0 {
            return (1.0 / t, CVec::zeros(self.dim));
        }
        (1.0 / t, g * C64::new(1.0 / (t * gu), 0.0))
    }

    /// Euclidean distance to the boundary.
    pub fn boundary_distance(&self, z: &CPoint) -> Result<f64> {
        Ok(self.nearest_boundary(z)?.distance)
    }

    /// Nearest boundary point. Closed form for the model kinds; direction-sampled
    /// ray bisection refined by projected descent otherwise.
    pub fn nearest_boundary(&self, z: &CPoint) -> Result<BoundaryFoot> {
        self.check_point(z)?;
        let rho = self.rho(z);
        if rho >= 0.0 {
            return Err(Error::OutsideDomain { rho });
        }
        let x = z.coords();
        let foot = |q: CVec| {
            let g = self.rho_gradient(&q);
            let gn = g.norm();
            BoundaryFoot {
                distance: (&q - x).norm(),
                normal: if gn > 0.0 { g.unscale(gn) } else { g },
                point: CPoint::new(q),
            }
        };
        match &self.shape {
            Shape::Ball { radius } => {
                let r = x.norm();
                let u = if r > 0.0 { x.unscale(r) } else { first_axis(self.dim) };
                Ok(BoundaryFoot {
                    distance: radius - r,
                    point: CPoint::new(&u * C64::new(*radius, 0.0)),
                    normal: u,
                })
            }
            Shape::Polydisc { radii } => {
                let (i, gap) = (0..self.dim)
                    .map(|i| (i, radii[i] - x[i].norm()))
                    .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                let mut q = x.clone();
                let phase = if x[i].norm() > 0.0 {
                    x[i] / x[i].norm()
                } else {
                    C64::new(1.0, 0.0)
                };
                q[i] = phase * radii[i];
                let mut normal = CVec::zeros(self.dim);
                normal[i] = phase;
                Ok(BoundaryFoot {
                    distance: gap,
                    point: CPoint::new(q),
                    normal,
                })
            }
            Shape::Ellipsoid { coeffs } => Ok(foot(ellipsoid_foot(coeffs, x))),
            Shape::Quadric { matrix, center } => {
                let eig = matrix.clone().symmetric_eigen();
                let u = &eig.eigenvectors;
                let y = u.adjoint() * (x - center);
                let q = ellipsoid_foot(eig.eigenvalues.as_slice(), &y);
                Ok(foot(u * q + center))
            }
            _ => self.nearest_boundary_numeric(x).map(foot),
        }
    }

    fn nearest_boundary_numeric(&self, x: &CVec) -> Result<CVec> {
        let n = self.dim;
        let count = 64.max(32 * 2 * n);
        let dirs = sphere_directions(2 * n, count, 0x5eed);
        let mut best: Option<(f64, CVec)> = None;
        let consider = |u: CVec, best: &mut Option<(f64, CVec)>| {
            if let Some(t) = self.ray_exit(x, &u) {
                if best.as_ref().is_none_or(|b| t < b.0) {
                    *best = Some((t, u));
                }
            }
        };
        for i in 0..n {
            for s in [1.0, -1.0] {
                for unit in [C64::new(s, 0.0), C64::new(0.0, s)] {
                    let mut u = CVec::zeros(n);
                    u[i] = unit;
                    consider(u, &mut best);
                }
            }
        }
        for d in &dirs {
            consider(CPoint::from_real(d).into_inner(), &mut best);
        }
        let (mut t, mut u) = best.ok_or_else(|| Error::Bracketing("no boundary crossing found".into()))?;
        // projected gradient descent of the exit time over unit directions
        let mut step = 0.1;
        for _ in 0..500 {
            let q = x + &u * C64::new(t, 0.0);
            let g = self.rho_gradient(&q);
            let gu = rdot(&g, &u);
            if gu <= 0.0 {
                break;
            }
            // dT/du = -T g / (g.u), projected onto the tangent space of the sphere
            let grad = &g * C64::new(-t / gu, 0.0);
            let tangential = &grad - &u * C64::new(rdot(&grad, &u), 0.0);
            let gnorm = tangential.norm();
            if gnorm < 1e-12 * t {
                break;
            }
            let mut improved = false;
            while step > 1e-14 {
                let cand = &u - &tangential * C64::new(step / gnorm, 0.0);
                let cand = cand.unscale(cand.norm());
                if let Some(tc) = self.ray_exit(x, &cand) {
                    if tc < t {
                        t = tc;
                        u = cand;
                        improved = true;
                        step *= 1.5;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok(x + u * C64::new(t, 0.0))
    }

    /// Deterministic QMC points of the bounding box filtered by `rho < 0`.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Result<Vec<CPoint>> {
        self.sample_interior_counted(count, seed).map(|(pts, _)| pts)
    }

    /// As [`Domain::sample_interior`], also returning the number of box draws.
    pub fn sample_interior_counted(&self, count: usize, seed: u64) -> Result<(Vec<CPoint>, usize)> {
        if count == 0 {
            return Err(Error::InvalidParameter("count must be >= 1".into()));
        }
        let seq = Halton::new(2 * self.dim, seed);
        let r = self.bounding_radius;
        let mut u = vec![0.0; 2 * self.dim];
        let mut out = Vec::with_capacity(count);
        let mut drawn = 0usize;
        while out.len() < count {
            seq.point_into(drawn as u64, &mut u);
            drawn += 1;
            let z = CPoint::from_real(&u.iter().map(|t| r * (2.0 * t - 1.0)).collect::<Vec<_>>());
            if self.rho(&z) < 0.0 {
                out.push(z);
            }
            if drawn.is_multiple_of(100_000) {
                let rate = out.len() as f64 / drawn as f64;
                if rate < 1e-4 {
                    return Err(Error::DegenerateDomain { rate, drawn });
                }
            }
        }
        Ok((out, drawn))
    }

    /// Volume of the sampling box `[-R, R]^{2n}`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.bounding_radius).powi(2 * self.dim as i32)
    }

    /// Monte Carlo volume: box volume times acceptance rate.
    pub fn volume_estimate(&self, count: usize, seed: u64) -> f64 {
        let seq = Halton::new(2 * self.dim, seed);
        let r = self.bounding_radius;
        let mut u = vec![0.0; 2 * self.dim];
        let mut hits = 0usize;
        for i in 0..count {
            seq.point_into(i as u64, &mut u);
            let z = CPoint::from_real(&u.iter().map(|t| r * (2.0 * t - 1.0)).collect::<Vec<_>>());
            if self.rho(&z) < 0.0 {
                hits += 1;
            }
        }
        (2.0 * r).powi(2 * self.dim as i32) * hits as f64 / count as f64
    }

    /// Boundary points found by ray bisection from the anchor.
    pub fn sample_boundary(&self, count: usize, seed: u64) -> Result<Vec<CPoint>> {
        if count == 0 {
            return Err(Error::InvalidParameter("count must be >= 1".into()));
        }
        let x = self.anchor.coords();
        let dirs = sphere_directions(2 * self.dim, count, seed ^ 0xb0da);
        dirs.iter()
            .map(|d| {
                let u = CPoint::from_real(d).into_inner();
                let t = self
                    .ray_exit(x, &u)
                    .ok_or_else(|| Error::Bracketing("zero direction".into()))?;
                let q = x + u * C64::new(t, 0.0);
                let r = self.rho_vec(&q);
                if r.abs() > 1e-8 {
                    return Err(Error::Bracketing(format!("|rho| = {r:.3e} after bisection")));
                }
                Ok(CPoint::new(q))
            })
            .collect()
    }
}

/// Hermitian form `[z; 1]^H H [z; 1]` whose negative set is `base`.
fn projective_form(base: &Domain) -> Option<CMat> {
    let n = base.dim;
    let mut h = CMat::zeros(n + 1, n + 1);
    match &base.shape {
        Shape::Ball { radius } => {
            for i in 0..n {
                h[(i, i)] = C64::new(1.0 / (radius * radius), 0.0);
            }
        }
        Shape::Ellipsoid { coeffs } => {
            for i in 0..n {
                h[(i, i)] = C64::new(coeffs[i], 0.0);
            }
        }
        Shape::Quadric { matrix, center } => {
            let mc = matrix * center;
            h.view_mut((0, 0), (n, n)).copy_from(matrix);
            h.view_mut((0, n), (n, 1)).copy_from(&(-&mc));
            h.view_mut((n, 0), (1, n)).copy_from(&(-mc.adjoint()));
            h[(n, n)] = C64::new(center.dotc(&mc).re, 0.0);
        }
        _ => return None,
    }
    h[(n, n)] -= C64::new(1.0, 0.0);
    Some(h)
}

/// `map(base)` as a quadric when `base` is one and `map` is linear fractional.
fn quadric_image(base: &Domain, map: &BiholoMap) -> Option<Shape> {
    let n = base.dim;
    let hb = projective_form(base)?;
    let w = map.inverse().ok()?.projective(n)?;
    let h = w.adjoint() * hb * w;
    let m = h.view((0, 0), (n, n)).into_owned();
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let chol = m.clone().cholesky()?;
    let center = -chol.solve(&h.view((0, n), (n, 1)).into_owned()).column(0).into_owned();
    let k = center.dotc(&(&m * &center)).re - h[(n, n)].re;
    if !(k > 0.0) || !k.is_finite() {
        return None;
    }
    Some(Shape::Quadric {
        matrix: m / C64::new(k, 0.0),
        center,
    })
}

fn first_axis(dim: usize) -> CVec {
    let mut u = CVec::zeros(dim);
    u[0] = C64::new(1.0, 0.0);
    u
}

/// Nearest point of `{sum c_i |z_i|^2 = 1}` to an interior `x`:
/// `q_i = x_i / (1 + lambda c_i)` with `lambda` in `(-1/c_max, 0]` solving the constraint.
fn ellipsoid_foot(c: &[f64], x: &CVec) -> CVec {
    let cmax = c.iter().cloned().fold(0.0, f64::max);
    let f = |lam: f64| -> f64 {
        c.iter()
            .zip(x.iter())
            .map(|(ci, xi)| ci * xi.norm_sqr() / (1.0 + lam * ci).powi(2))
            .sum::<f64>()
    };
    let lo_limit = -1.0 / cmax;
    // Degenerate case: no mass in the max-coefficient directions.
    let top: Vec<usize> = (0..c.len()).filter(|&i| c[i] == cmax).collect();
    let top_mass: f64 = top.iter().map(|&i| x[i].norm_sqr()).sum();
    if top_mass < 1e-28 {
        let mut q = CVec::zeros(c.len());
        let mut used = 0.0;
        for i in 0..c.len() {
            if c[i] != cmax {
                q[i] = x[i] / (1.0 - c[i] / cmax);
                used += c[i] * q[i].norm_sqr();
            }
        }
        if used <= 1.0 {
            q[top[0]] = C64::new(((1.0 - used) / cmax).sqrt(), 0.0);
            return q;
        }
    }
    let (mut lo, mut hi) = (lo_limit, 0.0);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lam = 0.5 * (lo + hi);
    let mut q = CVec::from_iterator(c.len(), c.iter().zip(x.iter()).map(|(ci, xi)| xi / (1.0 + lam * ci)));
    // project radially onto the level set to remove the residual
    let s = q.iter().zip(c).map(|(qi, ci)| ci * qi.norm_sqr()).sum::<f64>().sqrt();
    q.unscale_mut(s);
    q
}
