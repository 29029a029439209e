//! Holomorphic coordinate changes used as squeezing charts.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{CPoint, CVec, C64};

pub type CMat = DMatrix<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    Affine,
    DiscMobius,
    BallMobius,
    ProductMobius,
    ConvexSqueeze,
    Composition,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BiholoMap {
    /// `z -> A z + b`.
    Affine { linear: CMat, offset: CVec },
    /// `z -> (z - w) / (1 - conj(w) z)` on the unit disc.
    DiscMobius { w: C64 },
    /// `z -> U^H phi_a(U z)` with
    /// `phi_a(u) = ((u1 - a) / (1 - conj(a) u1), sqrt(1 - |a|^2) u' / (1 - conj(a) u1))`.
    BallMobius { a: C64, rotation: CMat },
    /// Coordinatewise disc automorphisms of the unit polydisc.
    ProductMobius { w: Vec<C64> },
    /// Affine normalization followed by a ball automorphism (strongly convex charts).
    ConvexSqueeze { steps: Vec<BiholoMap> },
    /// Steps applied first to last.
    Composition { steps: Vec<BiholoMap> },
}

const SINGULAR_EPS: f64 = 1e-300;

/// Unitary `U` with `U u = |u| e_1`.
pub fn aligning_unitary(u: &CVec) -> Result<CMat> {
    let n = u.len();
    let norm = u.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidParameter("cannot align a zero vector".into()));
    }
    let mut basis: Vec<CVec> = vec![u.unscale(norm)];
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = CVec::zeros(n);
        e[k] = C64::new(1.0, 0.0);
        for b in &basis {
            let proj = b.dotc(&e);
            e -= b * proj;
        }
        let en = e.norm();
        if en > 1e-8 {
            basis.push(e.unscale(en));
        }
    }
    let mut m = CMat::zeros(n, n);
    for (i, b) in basis.iter().enumerate() {
        for j in 0..n {
            m[(i, j)] = b[j].conj();
        }
    }
    Ok(m)
}

fn check_unit_interior(w: f64) -> Result<()> {
    if !w.is_finite() {
        return Err(Error::NonFinite("Mobius center"));
    }
    if w >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Mobius center must satisfy |w| < 1, got {w}"
        )));
    }
    Ok(())
}

impl BiholoMap {
    pub fn identity(dim: usize) -> Self {
        BiholoMap::Affine {
            linear: CMat::identity(dim, dim),
            offset: CVec::zeros(dim),
        }
    }

    pub fn affine(linear: CMat, offset: CVec) -> Result<Self> {
        if linear.nrows() != linear.ncols() || linear.nrows() != offset.len() {
            return Err(Error::InvalidParameter("affine map shape mismatch".into()));
        }
        let det = linear.determinant();
        if det.norm() == 0.0 || !det.norm().is_finite() {
            return Err(Error::InvalidParameter("affine linear part is singular".into()));
        }
        Ok(BiholoMap::Affine { linear, offset })
    }

    /// `z -> z - center`.
    pub fn translation(center: &CPoint) -> Self {
        let n = center.dim();
        BiholoMap::Affine {
            linear: CMat::identity(n, n),
            offset: -center.coords(),
        }
    }

    /// Automorphism of the unit disc sending `w` to 0.
    pub fn disc_mobius(w: C64) -> Result<Self> {
        check_unit_interior(w.norm())?;
        Ok(BiholoMap::DiscMobius { w })
    }

    /// Automorphism of the unit ball sending `w` to 0. A `w` off the first axis is
    /// first rotated onto it by a unitary, which is undone afterwards.
    pub fn ball_mobius(w: &CPoint) -> Result<Self> {
        w.ensure_finite()?;
        check_unit_interior(w.norm())?;
        let n = w.dim();
        let aligned = w.coords().iter().skip(1).all(|z| *z == C64::new(0.0, 0.0));
        if aligned {
            Ok(BiholoMap::BallMobius {
                a: w[0],
                rotation: CMat::identity(n, n),
            })
        } else {
            Ok(BiholoMap::BallMobius {
                a: C64::new(w.norm(), 0.0),
                rotation: aligning_unitary(w.coords())?,
            })
        }
    }

    /// Automorphism of the unit polydisc sending `w` to 0.
    pub fn product_mobius(w: &CPoint) -> Result<Self> {
        w.ensure_finite()?;
        for z in w.coords().iter() {
            check_unit_interior(z.norm())?;
        }
        Ok(BiholoMap::ProductMobius {
            w: w.coords().iter().cloned().collect(),
        })
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: BiholoMap, inner: BiholoMap) -> Self {
        BiholoMap::Composition {
            steps: vec![inner, outer],
        }
    }

    pub fn kind(&self) -> MapKind {
        match self {
            BiholoMap::Affine { .. } => MapKind::Affine,
            BiholoMap::DiscMobius { .. } => MapKind::DiscMobius,
            BiholoMap::BallMobius { .. } => MapKind::BallMobius,
            BiholoMap::ProductMobius { .. } => MapKind::ProductMobius,
            BiholoMap::ConvexSqueeze { .. } => MapKind::ConvexSqueeze,
            BiholoMap::Composition { .. } => MapKind::Composition,
        }
    }

    pub fn is_invertible(&self) -> bool {
        true
    }

    pub fn apply(&self, z: &CPoint) -> Result<CPoint> {
        z.ensure_finite()?;
        self.apply_vec(z.coords()).map(CPoint::new)
    }

    pub fn apply_vec(&self, z: &CVec) -> Result<CVec> {
        match self {
            BiholoMap::Affine { linear, offset } => Ok(linear * z + offset),
            BiholoMap::DiscMobius { w } => {
                let den = C64::new(1.0, 0.0) - w.conj() * z[0];
                if den.norm() < SINGULAR_EPS {
                    return Err(Error::SingularMap("disc Mobius pole".into()));
                }
                let mut out = z.clone();
                out[0] = (z[0] - w) / den;
                Ok(out)
            }
            BiholoMap::BallMobius { a, rotation } => {
                let u = rotation * z;
                let den = C64::new(1.0, 0.0) - a.conj() * u[0];
                if den.norm() < SINGULAR_EPS {
                    return Err(Error::SingularMap("ball Mobius pole".into()));
                }
                let s = (1.0 - a.norm_sqr()).sqrt();
                let mut v = u.clone();
                v[0] = (u[0] - a) / den;
                for k in 1..v.len() {
                    v[k] = u[k] * s / den;
                }
                Ok(rotation.adjoint() * v)
            }
            BiholoMap::ProductMobius { w } => {
                let mut out = z.clone();
                for (i, wi) in w.iter().enumerate() {
                    let den = C64::new(1.0, 0.0) - wi.conj() * z[i];
                    if den.norm() < SINGULAR_EPS {
                        return Err(Error::SingularMap("polydisc Mobius pole".into()));
                    }
                    out[i] = (z[i] - wi) / den;
                }
                Ok(out)
            }
            BiholoMap::ConvexSqueeze { steps } | BiholoMap::Composition { steps } => {
                let mut cur = z.clone();
                for s in steps {
                    cur = s.apply_vec(&cur)?;
                }
                Ok(cur)
            }
        }
    }

    /// Complex Jacobian matrix `J_ij = d f_i / d z_j`.
    pub fn jacobian(&self, z: &CVec) -> Result<CMat> {
        let one = C64::new(1.0, 0.0);
        match self {
            BiholoMap::Affine { linear, .. } => Ok(linear.clone()),
            BiholoMap::DiscMobius { w } => {
                let den = one - w.conj() * z[0];
                if den.norm() < SINGULAR_EPS {
                    return Err(Error::SingularMap("disc Mobius pole".into()));
                }
                let mut j = CMat::identity(z.len(), z.len());
                j[(0, 0)] = (1.0 - w.norm_sqr()) / (den * den);
                Ok(j)
            }
            BiholoMap::BallMobius { a, rotation } => {
                let u = rotation * z;
                let den = one - a.conj() * u[0];
                if den.norm() < SINGULAR_EPS {
                    return Err(Error::SingularMap("ball Mobius pole".into()));
                }
                let n = u.len();
                let s = (1.0 - a.norm_sqr()).sqrt();
                let mut j = CMat::zeros(n, n);
                j[(0, 0)] = (1.0 - a.norm_sqr()) / (den * den);
                for k in 1..n {
                    j[(k, 0)] = u[k] * s * a.conj() / (den * den);
                    j[(k, k)] = C64::new(s, 0.0) / den;
                }
                Ok(rotation.adjoint() * j * rotation)
            }
            BiholoMap::ProductMobius { w } => {
                let mut j = CMat::identity(z.len(), z.len());
                for (i, wi) in w.iter().enumerate() {
                    let den = one - wi.conj() * z[i];
                    if den.norm() < SINGULAR_EPS {
                        return Err(Error::SingularMap("polydisc Mobius pole".into()));
                    }
                    j[(i, i)] = (1.0 - wi.norm_sqr()) / (den * den);
                }
                Ok(j)
            }
            BiholoMap::ConvexSqueeze { steps } | BiholoMap::Composition { steps } => {
                let n = z.len();
                let mut cur = z.clone();
                let mut acc = CMat::identity(n, n);
                for s in steps {
                    acc = s.jacobian(&cur)? * acc;
                    cur = s.apply_vec(&cur)?;
                }
                Ok(acc)
            }
        }
    }

    /// Holomorphic Jacobian determinant; analytic per kind, chain rule for compositions.
    pub fn jacobian_det(&self, z: &CPoint) -> Result<C64> {
        z.ensure_finite()?;
        self.jacobian_det_vec(z.coords())
    }

    pub fn jacobian_det_vec(&self, z: &CVec) -> Result<C64> {
        let one = C64::new(1.0, 0.0);
        match self {
            BiholoMap::Affine { linear, .. } => Ok(linear.determinant()),
            BiholoMap::DiscMobius { w } => {
                let den = one - w.conj() * z[0];
                if den.norm() < SINGULAR_EPS {
                    return Err(Error::SingularMap("disc Mobius pole".into()));
                }
                Ok((1.0 - w.norm_sqr()) / (den * den))
            }
            BiholoMap::BallMobius { a, rotation } => {
                let u0 = (rotation.row(0) * z)[0];
                let den = one - a.conj() * u0;
                if den.norm() < SINGULAR_EPS {
                    return Err(Error::SingularMap("ball Mobius pole".into()));
                }
                let n = z.len() as i32;
                let s2 = 1.0 - a.norm_sqr();
                Ok(C64::new(s2.powf(0.5 * (n + 1) as f64), 0.0) / den.powi(n + 1))
            }
            BiholoMap::ProductMobius { w } => {
                let mut det = one;
                for (i, wi) in w.iter().enumerate() {
                    let den = one - wi.conj() * z[i];
                    if den.norm() < SINGULAR_EPS {
                        return Err(Error::SingularMap("polydisc Mobius pole".into()));
                    }
                    det *= (1.0 - wi.norm_sqr()) / (den * den);
                }
                Ok(det)
            }
            BiholoMap::ConvexSqueeze { steps } | BiholoMap::Composition { steps } => {
                let mut cur = z.clone();
                let mut det = one;
                for s in steps {
                    det *= s.jacobian_det_vec(&cur)?;
                    cur = s.apply_vec(&cur)?;
                }
                Ok(det)
            }
        }
    }

    /// Differential `df_z(v)`.
    pub fn push_forward(&self, z: &CVec, v: &CVec) -> Result<CVec> {
        Ok(self.jacobian(z)? * v)
    }

    /// `(n+1) x (n+1)` matrix `W` with `f(z) = (W [z; 1])' / (W [z; 1])_n` when `f` is
    /// linear fractional; `None` for the coordinatewise polydisc maps.
    pub fn projective(&self, dim: usize) -> Option<CMat> {
        let one = C64::new(1.0, 0.0);
        match self {
            BiholoMap::Affine { linear, offset } => {
                let mut w = CMat::zeros(dim + 1, dim + 1);
                w.view_mut((0, 0), (dim, dim)).copy_from(linear);
                w.view_mut((0, dim), (dim, 1)).copy_from(offset);
                w[(dim, dim)] = one;
                Some(w)
            }
            BiholoMap::DiscMobius { w } | BiholoMap::BallMobius { a: w, .. } => {
                if matches!(self, BiholoMap::DiscMobius { .. }) && dim != 1 {
                    return None;
                }
                let s = (1.0 - w.norm_sqr()).sqrt();
                let mut m = CMat::identity(dim + 1, dim + 1) * C64::new(s, 0.0);
                m[(0, 0)] = one;
                m[(0, dim)] = -w;
                m[(dim, 0)] = -w.conj();
                m[(dim, dim)] = one;
                if let BiholoMap::BallMobius { rotation, .. } = self {
                    let mut r = CMat::identity(dim + 1, dim + 1);
                    r.view_mut((0, 0), (dim, dim)).copy_from(rotation);
                    m = r.adjoint() * m * r;
                }
                Some(m)
            }
            BiholoMap::ProductMobius { w } if w.len() == 1 => BiholoMap::DiscMobius { w: w[0] }.projective(dim),
            BiholoMap::ProductMobius { .. } => None,
            BiholoMap::ConvexSqueeze { steps } | BiholoMap::Composition { steps } => {
                let mut m = CMat::identity(dim + 1, dim + 1);
                for s in steps {
                    m = s.projective(dim)? * m;
                }
                Some(m)
            }
        }
    }

    pub fn inverse(&self) -> Result<BiholoMap> {
        match self {
            BiholoMap::Affine { linear, offset } => {
                let inv = linear
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::SingularMap("affine linear part".into()))?;
                let off = -(&inv * offset);
                Ok(BiholoMap::Affine {
                    linear: inv,
                    offset: off,
                })
            }
            BiholoMap::DiscMobius { w } => Ok(BiholoMap::DiscMobius { w: -w }),
            BiholoMap::BallMobius { a, rotation } => Ok(BiholoMap::BallMobius {
                a: -a,
                rotation: rotation.clone(),
            }),
            BiholoMap::ProductMobius { w } => Ok(BiholoMap::ProductMobius {
                w: w.iter().map(|x| -x).collect(),
            }),
            BiholoMap::ConvexSqueeze { steps } => Ok(BiholoMap::ConvexSqueeze {
                steps: steps.iter().rev().map(|s| s.inverse()).collect::<Result<_>>()?,
            }),
            BiholoMap::Composition { steps } => Ok(BiholoMap::Composition {
                steps: steps.iter().rev().map(|s| s.inverse()).collect::<Result<_>>()?,
            }),
        }
    }
}
