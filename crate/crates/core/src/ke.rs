//! Closed-form Kahler-Einstein metrics on the model domains.
//!
//! Convention: `Ric = -ddbar log det g`, normalized so that `Ric = -(n + 1) g`.
//! On a ball of radius `r` this is the metric with potential `-log(r^2 - |z|^2)`,
//! which equals `1 / r^2` at the center. A polydisc carries the product of disc
//! metrics scaled by `2 / (n + 1)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::domain::{Domain, Shape};
use crate::error::{Error, Result};
use crate::point::{CDirection, CPoint, CVec, C64};

/// Finite-difference step for Levi forms and Ricci checks.
pub const FD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KeModelKind {
    Disc,
    Ball,
    Polydisc,
    ScaledBall,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeModelMetric {
    pub kind: KeModelKind,
    pub dim: usize,
    /// One radius for balls, one per factor for polydiscs.
    pub radii: Vec<f64>,
}

impl KeModelMetric {
    pub fn for_domain(domain: &Domain) -> Result<Self> {
        let dim = domain.dim();
        match domain.shape() {
            Shape::Ball { radius } => Ok(KeModelMetric {
                kind: if *radius != 1.0 {
                    KeModelKind::ScaledBall
                } else if dim == 1 {
                    KeModelKind::Disc
                } else {
                    KeModelKind::Ball
                },
                dim,
                radii: vec![*radius],
            }),
            Shape::Polydisc { radii } if dim == 1 => Ok(KeModelMetric {
                kind: if radii[0] == 1.0 {
                    KeModelKind::Disc
                } else {
                    KeModelKind::ScaledBall
                },
                dim,
                radii: radii.clone(),
            }),
            Shape::Polydisc { radii } => Ok(KeModelMetric {
                kind: KeModelKind::Polydisc,
                dim,
                radii: radii.clone(),
            }),
            _ => Err(Error::Unsupported(format!(
                "no closed-form Kahler-Einstein metric on {} domains",
                domain.model_kind()
            ))),
        }
    }

    /// `-(n + 1)`, the Einstein constant in the convention above.
    pub fn einstein_constant(&self) -> f64 {
        -(self.dim as f64 + 1.0)
    }

    fn check(&self, z: &CVec) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        if !z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        let rho = self.rho(z);
        if rho >= 0.0 {
            return Err(Error::OutsideDomain { rho });
        }
        Ok(())
    }

    fn rho(&self, z: &CVec) -> f64 {
        match self.kind {
            KeModelKind::Polydisc => {
                z.iter()
                    .zip(&self.radii)
                    .map(|(c, r)| c.norm_sqr() / (r * r))
                    .fold(f64::NEG_INFINITY, f64::max)
                    - 1.0
            }
            _ => z.norm_squared() / (self.radii[0] * self.radii[0]) - 1.0,
        }
    }

    fn boundary_distance(&self, z: &CVec) -> f64 {
        match self.kind {
            KeModelKind::Polydisc => z
                .iter()
                .zip(&self.radii)
                .map(|(c, r)| r - c.norm())
                .fold(f64::INFINITY, f64::min),
            _ => self.radii[0] - z.norm(),
        }
    }

    /// `g_{i jbar}(z)`, Hermitian positive definite.
    pub fn metric_tensor(&self, z: &CPoint) -> Result<DMatrix<C64>> {
        let z = z.coords();
        self.check(z)?;
        let n = self.dim;
        Ok(match self.kind {
            KeModelKind::Polydisc => {
                let c = 2.0 / (n as f64 + 1.0);
                DMatrix::from_fn(n, n, |i, j| {
                    if i != j {
                        return C64::new(0.0, 0.0);
                    }
                    let r2 = self.radii[i] * self.radii[i];
                    let q = r2 - z[i].norm_sqr();
                    C64::new(c * r2 / (q * q), 0.0)
                })
            }
            _ => {
                let r2 = self.radii[0] * self.radii[0];
                let q = r2 - z.norm_squared();
                DMatrix::from_fn(n, n, |i, j| {
                    let d = if i == j { 1.0 / q } else { 0.0 };
                    C64::new(d, 0.0) + z[i].conj() * z[j] / (q * q)
                })
            }
        })
    }

    /// Log of the determinant, in closed form.
    pub fn log_det(&self, z: &CPoint) -> Result<f64> {
        let w = z.coords();
        self.check(w)?;
        let n = self.dim as f64;
        Ok(match self.kind {
            KeModelKind::Polydisc => {
                let c = 2.0 / (n + 1.0);
                w.iter()
                    .zip(&self.radii)
                    .map(|(zi, r)| {
                        let r2 = r * r;
                        (c * r2).ln() - 2.0 * (r2 - zi.norm_sqr()).ln()
                    })
                    .sum()
            }
            _ => {
                let r2 = self.radii[0] * self.radii[0];
                r2.ln() - (n + 1.0) * (r2 - w.norm_squared()).ln()
            }
        })
    }
}

/// `g_KE(z; v) = sum g_{i jbar} v_i conj(v_j)`.
pub fn ke_metric(model: &KeModelMetric, z: &CPoint, v: &CDirection) -> Result<f64> {
    if v.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            got: v.dim(),
        });
    }
    let g = model.metric_tensor(z)?;
    let v = v.coords();
    Ok((v.transpose() * g * v.conjugate())[(0, 0)].re)
}

/// `det g_KE(z)`.
pub fn ke_volume_density(model: &KeModelMetric, z: &CPoint) -> Result<f64> {
    Ok(model.log_det(z)?.exp())
}

/// `u = -(det g_KE)^(-alpha)`.
pub fn hyperconvex_exhaustion(model: &KeModelMetric, z: &CPoint, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    Ok(-(-alpha * model.log_det(z)?).exp())
}

/// `1 / (n + 1)`: the largest exponent with `u` plurisubharmonic on the ball.
pub fn default_alpha(dim: usize) -> f64 {
    1.0 / (dim as f64 + 1.0)
}

/// Complex Hessian `d^2 f / dz_i dzbar_j` at `z` by centered second differences
/// along the `n^2` complex lines `e_i`, `e_i + e_j`, `e_i + i e_j`, extrapolated
/// from steps `step` and `step / 2`.
pub fn levi_form(f: &dyn Fn(&CVec) -> Result<f64>, z: &CVec, step: f64) -> Result<DMatrix<C64>> {
    let n = z.len();
    let f0 = f(z)?;
    // (1/4) of the Laplacian of f restricted to the complex line through w
    let second = |w: &CVec, h: f64| -> Result<f64> {
        let mut acc = 0.0;
        for dir in [C64::new(h, 0.0), C64::new(0.0, h)] {
            let p = f(&(z + w * dir))?;
            let m = f(&(z - w * dir))?;
            acc += (p - 2.0 * f0 + m) / (h * h);
        }
        Ok(acc / 4.0)
    };
    // one Richardson step on h and h/2 removes the O(h^2) term near the boundary
    let line = |w: &CVec| -> Result<f64> {
        let coarse = second(w, step)?;
        let fine = second(w, step / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    };
    let unit = |i: usize, c: C64| {
        let mut w = CVec::zeros(n);
        w[i] = c;
        w
    };
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(line(&unit(i, C64::new(1.0, 0.0)))?, 0.0);
    }
    for i in 0..n {
        for j in i + 1..n {
            let re =
                (line(&(unit(i, C64::new(1.0, 0.0)) + unit(j, C64::new(1.0, 0.0))))? - h[(i, i)].re - h[(j, j)].re)
                    / 2.0;
            let im =
                (line(&(unit(i, C64::new(1.0, 0.0)) + unit(j, C64::new(0.0, 1.0))))? - h[(i, i)].re - h[(j, j)].re)
                    / 2.0;
            h[(i, j)] = C64::new(re, im);
            h[(j, i)] = C64::new(re, -im);
        }
    }
    Ok(h)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &DMatrix<C64>) -> f64 {
    h.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue of the finite-difference Levi form of the exhaustion.
pub fn exhaustion_levi_min(model: &KeModelMetric, z: &CPoint, alpha: f64, step: f64) -> Result<f64> {
    model.check(z.coords())?;
    let step = step.min(model.boundary_distance(z.coords()) / 20.0);
    let f = |w: &CVec| hyperconvex_exhaustion(model, &CPoint::new(w.clone()), alpha);
    Ok(min_eigenvalue(&levi_form(&f, z.coords(), step)?))
}

/// Finite-difference `-ddbar log det g`. The step shrinks to a twentieth of the
/// boundary distance when that is smaller.
pub fn ricci_fd(model: &KeModelMetric, z: &CPoint, step: f64) -> Result<DMatrix<C64>> {
    model.check(z.coords())?;
    let step = step.min(model.boundary_distance(z.coords()) / 20.0);
    let h = levi_form(&|w: &CVec| model.log_det(&CPoint::new(w.clone())), z.coords(), step)?;
    Ok(-h)
}

/// Largest `|Ric_{i jbar} - k g_{i jbar}|`, relative to the largest `|g_{i jbar}|`.
pub fn einstein_residual(model: &KeModelMetric, z: &CPoint, step: f64) -> Result<f64> {
    let ric = ricci_fd(model, z, step)?;
    let g = model.metric_tensor(z)?;
    let diff = ric - &g * C64::new(model.einstein_constant(), 0.0);
    Ok(diff.camax() / g.camax())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(d: &Domain) -> KeModelMetric {
        KeModelMetric::for_domain(d).unwrap()
    }

    #[test]
    fn center_values() {
        let v = CDirection::real(&[1.0, 0.0]);
        let b = model(&Domain::unit_ball(2));
        assert_eq!(ke_metric(&b, &CPoint::origin(2), &v).unwrap(), 1.0);
        let b2 = model(&Domain::ball(2, 2.0).unwrap());
        assert_eq!(b2.kind, KeModelKind::ScaledBall);
        assert_eq!(ke_metric(&b2, &CPoint::origin(2), &v).unwrap(), 0.25);
        let p = model(&Domain::unit_polydisc(2));
        assert!((ke_metric(&p, &CPoint::origin(2), &v).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn densities() {
        let d = model(&Domain::unit_disc());
        assert!((ke_volume_density(&d, &CPoint::origin(1)).unwrap() - 1.0).abs() < 1e-15);
        // det g = g = (1 - |z|^2)^-2, consistent with u = -(1 - |z|^2) at alpha = 1/2
        let want = 1.0 / 0.5625;
        assert!((ke_volume_density(&d, &CPoint::real(&[0.5])).unwrap() - want).abs() < 1e-12);
        let b = model(&Domain::unit_ball(2));
        assert!((ke_volume_density(&b, &CPoint::origin(2)).unwrap() - 1.0).abs() < 1e-15);
        // closed-form log det against the matrix determinant
        let z = CPoint::from_slice(&[C64::new(0.3, 0.1), C64::new(-0.2, 0.4)]);
        for m in [b, model(&Domain::polydisc(&[1.0, 2.0]).unwrap())] {
            let det = m.metric_tensor(&z).unwrap().determinant().re;
            assert!((det.ln() - m.log_det(&z).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_exhaustion_is_one_minus_modulus_squared() {
        let d = model(&Domain::unit_disc());
        assert_eq!(hyperconvex_exhaustion(&d, &CPoint::origin(1), 0.5).unwrap(), -1.0);
        let z = CPoint::from_slice(&[C64::new(0.3, -0.4)]);
        let u = hyperconvex_exhaustion(&d, &z, 0.5).unwrap();
        assert!((u + 0.75).abs() < 1e-14);
        let f = |w: &CVec| hyperconvex_exhaustion(&d, &CPoint::new(w.clone()), 0.5);
        let l = levi_form(&f, z.coords(), FD_STEP).unwrap();
        assert!((l[(0, 0)].re - 1.0).abs() < 1e-6);
        assert!(hyperconvex_exhaustion(&d, &z, 0.0).is_err());
    }

    #[test]
    fn einstein_identity() {
        for d in [
            Domain::unit_ball(2),
            Domain::unit_polydisc(2),
            Domain::ball(3, 1.5).unwrap(),
        ] {
            let m = model(&d);
            for z in d.sample_interior(20, 1).unwrap() {
                let r = einstein_residual(&m, &z, FD_STEP).unwrap();
                assert!(r < 1e-3, "{r} at rho {}", d.rho(&z));
            }
        }
    }

    #[test]
    fn levi_form_of_a_known_function() {
        // f = |z1|^2 + 2 Re(i z1 conj(z2)) has Hessian [[1, i], [-i, 0]]
        let f = |w: &CVec| Ok(w[0].norm_sqr() + 2.0 * (C64::new(0.0, 1.0) * w[0] * w[1].conj()).re);
        let z = CVec::from_vec(vec![C64::new(0.2, 0.1), C64::new(-0.3, 0.5)]);
        let h = levi_form(&f, &z, 1e-3).unwrap();
        let want = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 0.0),
            ],
        );
        assert!((h - want).camax() < 1e-8);
    }

    #[test]
    fn ellipsoid_is_unsupported() {
        assert!(KeModelMetric::for_domain(&Domain::ellipsoid(&[1.0, 4.0]).unwrap()).is_err());
    }

    #[test]
    fn outside_is_rejected() {
        let d = model(&Domain::unit_disc());
        assert!(ke_volume_density(&d, &CPoint::real(&[1.0])).is_err());
    }
}
