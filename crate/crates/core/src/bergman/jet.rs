//! Truncated Taylor expansions in `(h, conj h)` around a point of C.
//!
//! Coefficient `(a, b)` multiplies `h^a conj(h)^b`. Used for the curvature of
//! one-variable metrics, where `log` and `d dbar` of expansions are needed to
//! fourth order.

use crate::point::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    order: usize,
    c: Vec<C64>,
}

impl Jet {
    pub fn zeros(order: usize) -> Self {
        Jet {
            order,
            c: vec![C64::new(0.0, 0.0); (order + 1) * (order + 1)],
        }
    }

    /// `coeff(a, b)` for `a, b <= order`.
    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut j = Jet::zeros(order);
        for a in 0..=order {
            for b in 0..=order {
                j.c[a * (order + 1) + b] = f(a, b);
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, a: usize, b: usize) -> C64 {
        self.c[a * (self.order + 1) + b]
    }

    fn set(&mut self, a: usize, b: usize, v: C64) {
        let o = self.order;
        self.c[a * (o + 1) + b] = v;
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let o = self.order.min(other.order);
        let mut out = Jet::zeros(o);
        for a1 in 0..=o {
            for b1 in 0..=o {
                let x = self.coeff(a1, b1);
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for a2 in 0..=(o - a1) {
                    for b2 in 0..=(o - b1) {
                        let v = out.coeff(a1 + a2, b1 + b2) + x * other.coeff(a2, b2);
                        out.set(a1 + a2, b1 + b2, v);
                    }
                }
            }
        }
        out
    }

    fn scale(&self, s: C64) -> Jet {
        Jet {
            order: self.order,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    fn add(&self, other: &Jet) -> Jet {
        Jet {
            order: self.order,
            c: self.c.iter().zip(&other.c).map(|(x, y)| x + y).collect(),
        }
    }

    /// Principal logarithm via `log c0 + log(1 + u)`, `u` without constant term.
    pub fn ln(&self) -> Jet {
        let c0 = self.value();
        let mut u = self.scale(c0.inv());
        u.c[0] = C64::new(0.0, 0.0);
        let mut out = Jet::zeros(self.order);
        out.c[0] = c0.ln();
        let mut power = u.clone();
        for k in 1..=2 * self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            out = out.add(&power.scale(C64::new(sign / k as f64, 0.0)));
            power = power.mul(&u);
        }
        out
    }

    /// `d dbar` as an expansion of one lower order.
    pub fn ddbar(&self) -> Jet {
        assert!(self.order >= 1, "ddbar needs order >= 1");
        Jet::from_fn(self.order - 1, |a, b| {
            self.coeff(a + 1, b + 1) * ((a + 1) * (b + 1)) as f64
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `log(1 / (1 - |z + h|^2)^2)` expanded at real `z`.
    fn log_poincare_jet(z: f64) -> Jet {
        // 1 - |z + h|^2 = (1 - z^2) - z h - z conj(h) - h conj(h)
        let mut w = Jet::zeros(2);
        w.c[0] = C64::new(1.0 - z * z, 0.0);
        w.set(1, 0, C64::new(-z, 0.0));
        w.set(0, 1, C64::new(-z, 0.0));
        w.set(1, 1, C64::new(-1.0, 0.0));
        w.ln().scale(C64::new(-2.0, 0.0))
    }

    #[test]
    fn ddbar_of_log_poincare() {
        for z in [0.0, 0.3, 0.5] {
            let l = log_poincare_jet(z);
            let lam = l.ddbar();
            let want = 2.0 / (1.0 - z * z).powi(2);
            assert!((lam.value().re - want).abs() < 1e-12 * want);
            let kappa = -lam.ln().ddbar().value().re / lam.value().re;
            assert!((kappa + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_of_product_is_sum() {
        let a = Jet::from_fn(2, |i, j| C64::new(1.0 + 0.1 * (i + 2 * j) as f64, 0.05 * i as f64));
        let b = Jet::from_fn(2, |i, j| C64::new(2.0 - 0.2 * (i * j) as f64, -0.03 * j as f64));
        let lhs = a.mul(&b).ln();
        let rhs = a.ln().add(&b.ln());
        for k in 0..9 {
            assert!((lhs.c[k] - rhs.c[k]).norm() < 1e-12);
        }
    }
}
