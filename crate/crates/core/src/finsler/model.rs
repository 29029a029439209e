//! Closed forms on the model domains, where Kobayashi and Caratheodory agree.

use super::check_inputs;
use crate::domain::{Domain, Shape};
use crate::error::{Error, Result};
use crate::point::{hdot, CDirection, CPoint};

/// `g_K(x; v)` on a ball or polydisc, by pulling back to the center.
pub fn kobayashi_model(domain: &Domain, x: &CPoint, v: &CDirection) -> Result<f64> {
    check_inputs(domain, x, v)?;
    match domain.shape() {
        Shape::Ball { radius } => {
            let s = 1.0 / radius;
            let xs = x.coords().map(|c| c * s);
            let vs = v.coords().map(|c| c * s);
            let q = 1.0 - xs.norm_squared();
            let c = hdot(&vs, &xs).norm_sqr();
            Ok(vs.norm_squared() / q + c / (q * q))
        }
        Shape::Polydisc { radii } => Ok(radii
            .iter()
            .zip(x.coords().iter().zip(v.coords().iter()))
            .map(|(r, (xi, vi))| {
                let q = r * r - xi.norm_sqr();
                r * r * vi.norm_sqr() / (q * q)
            })
            .fold(0.0, f64::max)),
        _ => Err(Error::Unsupported(format!(
            "no closed form on {:?} domains",
            domain.model_kind()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::C64;

    #[test]
    fn examples() {
        let b2 = Domain::disc(2.0).unwrap();
        let g = kobayashi_model(&b2, &CPoint::origin(1), &CDirection::real(&[1.0])).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
        let p = Domain::unit_polydisc(2);
        let g = kobayashi_model(&p, &CPoint::origin(2), &CDirection::real(&[0.6, 0.8])).unwrap();
        assert!((g - 0.64).abs() < 1e-15);
        let d = Domain::unit_disc();
        let g = kobayashi_model(&d, &CPoint::real(&[0.5]), &CDirection::real(&[1.0])).unwrap();
        assert!((g - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn ball_pullback_matches_mobius() {
        // g(x; v) = |d phi_x(v)|^2 at the origin
        use crate::domain::BiholoMap;
        let d = Domain::unit_ball(2);
        let x = CPoint::from_slice(&[C64::new(0.3, 0.2), C64::new(-0.1, 0.4)]);
        let v = CDirection::from_slice(&[C64::new(0.5, -0.1), C64::new(0.2, 0.7)]);
        let m = BiholoMap::ball_mobius(&x).unwrap();
        let w = m.push_forward(x.coords(), v.coords()).unwrap();
        let g = kobayashi_model(&d, &x, &v).unwrap();
        assert!((g - w.norm().powi(2)).abs() < 1e-12 * g);
    }

    #[test]
    fn ellipsoid_is_unsupported() {
        let e = Domain::ellipsoid(&[1.0, 4.0]).unwrap();
        assert!(kobayashi_model(&e, &CPoint::origin(2), &CDirection::real(&[1.0, 0.0])).is_err());
    }
}
