//! Points and tangent directions in C^n.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVec = DVector<C64>;

/// A point of C^n.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoint(CVec);

impl CPoint {
    pub fn new(coords: CVec) -> Self {
        CPoint(coords)
    }

    pub fn from_slice(coords: &[C64]) -> Self {
        CPoint(CVec::from_column_slice(coords))
    }

    /// Point with real coordinates.
    pub fn real(coords: &[f64]) -> Self {
        CPoint(CVec::from_iterator(
            coords.len(),
            coords.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn origin(dim: usize) -> Self {
        CPoint(CVec::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &CVec {
        &self.0
    }

    pub fn into_inner(self) -> CVec {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite("point coordinates"))
        }
    }

    pub fn ensure_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        }
    }

    /// Real coordinates `(x1, y1, x2, y2, ...)`.
    pub fn to_real(&self) -> Vec<f64> {
        self.0.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_real(xs: &[f64]) -> Self {
        CPoint(CVec::from_iterator(
            xs.len() / 2,
            xs.chunks_exact(2).map(|p| C64::new(p[0], p[1])),
        ))
    }
}

impl From<CVec> for CPoint {
    fn from(v: CVec) -> Self {
        CPoint(v)
    }
}

impl std::ops::Index<usize> for CPoint {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// A holomorphic tangent vector. Metric operations normalize it on entry and
/// restore the caller's scale through quadratic homogeneity.
#[derive(Clone, Debug, PartialEq)]
pub struct CDirection(CVec);

impl CDirection {
    pub fn new(coords: CVec) -> Self {
        CDirection(coords)
    }

    pub fn from_slice(coords: &[C64]) -> Self {
        CDirection(CVec::from_column_slice(coords))
    }

    pub fn real(coords: &[f64]) -> Self {
        CDirection(CPoint::real(coords).into_inner())
    }

    /// Coordinate direction `e_i` in C^dim.
    pub fn axis(dim: usize, i: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[i] = C64::new(1.0, 0.0);
        CDirection(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &CVec {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Splits into Euclidean norm and unit direction.
    pub fn normalized(&self) -> Result<(f64, CVec)> {
        let n = self.norm();
        if !n.is_finite() {
            return Err(Error::NonFinite("direction"));
        }
        if n == 0.0 {
            return Err(Error::InvalidParameter("zero direction".into()));
        }
        Ok((n, self.0.unscale(n)))
    }

    /// Unit representative of the complex line: largest component real and positive.
    pub fn canonical(&self) -> Result<(f64, CVec)> {
        let (n, u) = self.normalized()?;
        let k = (0..u.len()).fold(0, |k, i| if u[i].norm() > u[k].norm() { i } else { k });
        let phase = u[k].conj() / u[k].norm();
        Ok((n, u * phase))
    }
}

impl From<CVec> for CDirection {
    fn from(v: CVec) -> Self {
        CDirection(v)
    }
}

/// Serializable form: list of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexList(pub Vec<[f64; 2]>);

impl From<&CVec> for ComplexList {
    fn from(v: &CVec) -> Self {
        ComplexList(v.iter().map(|z| [z.re, z.im]).collect())
    }
}

impl From<&CPoint> for ComplexList {
    fn from(p: &CPoint) -> Self {
        ComplexList::from(p.coords())
    }
}

impl From<&CDirection> for ComplexList {
    fn from(p: &CDirection) -> Self {
        ComplexList::from(p.coords())
    }
}

/// Hermitian inner product `<u, v> = sum u_i conj(v_i)`.
pub fn hdot(u: &CVec, v: &CVec) -> C64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Real inner product of the underlying R^{2n} vectors.
pub fn rdot(u: &CVec, v: &CVec) -> f64 {
    hdot(u, v).re
}
