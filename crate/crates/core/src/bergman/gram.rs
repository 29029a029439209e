//! Quadrature Gram matrices of monomials.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::basis::MonomialBasis;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::point::{CPoint, C64};

/// Points per partial sum. Partials are reduced in index order, so the result
/// does not depend on the thread count.
pub const CHUNK: usize = 2048;

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub basis: MonomialBasis,
    /// `G[(a, b)] = int z^alpha_a conj(z^alpha_b) dV`.
    pub entries: DMatrix<C64>,
    pub quadrature_count: usize,
    pub seed: u64,
    /// Box draws needed to collect `quadrature_count` interior points.
    pub draws: usize,
}

/// Interior QMC points and the weight `box volume / draws` of each.
pub fn quadrature(domain: &Domain, count: usize, seed: u64) -> Result<(Vec<CPoint>, f64, usize)> {
    let (pts, draws) = domain.sample_interior_counted(count, seed)?;
    Ok((pts, domain.box_volume() / draws as f64, draws))
}

pub fn gram_matrix(domain: &Domain, degree: usize, count: usize, seed: u64) -> Result<GramMatrix> {
    if count < 1000 {
        return Err(Error::InvalidParameter(format!(
            "quadrature count must be at least 1000, got {count}"
        )));
    }
    let basis = MonomialBasis::new(domain.dim(), degree);
    let (pts, weight, draws) = quadrature(domain, count, seed)?;
    let entries = accumulate(&basis, &pts, weight);
    let g = GramMatrix {
        basis,
        entries,
        quadrature_count: count,
        seed,
        draws,
    };
    g.check_cholesky()?;
    Ok(g)
}

/// `sum_q w m(q) m(q)^H`, Hermitian-symmetrized.
pub fn accumulate(basis: &MonomialBasis, pts: &[CPoint], weight: f64) -> DMatrix<C64> {
    let nb = basis.len();
    let partials: Vec<Vec<C64>> = pts
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![C64::new(0.0, 0.0); nb * nb];
            let mut m = vec![C64::new(0.0, 0.0); nb];
            let mut scratch = Vec::new();
            for p in chunk {
                basis.eval_into(p.coords().as_slice(), &mut scratch, &mut m);
                for a in 0..nb {
                    let ma = m[a];
                    let row = &mut acc[a * nb..(a + 1) * nb];
                    for b in a..nb {
                        row[b] += ma * m[b].conj();
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![C64::new(0.0, 0.0); nb * nb];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    let mut g = DMatrix::from_fn(nb, nb, |a, b| {
        if a <= b {
            total[a * nb + b] * weight
        } else {
            total[b * nb + a].conj() * weight
        }
    });
    // diagonal is real in exact arithmetic
    for a in 0..nb {
        g[(a, a)] = C64::new(g[(a, a)].re, 0.0);
    }
    let gh = g.adjoint();
    (g + gh) * C64::new(0.5, 0.0)
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).camax()
    }

    /// Plain Cholesky; names the first leading minor that is not positive.
    pub fn check_cholesky(&self) -> Result<()> {
        let n = self.dim();
        let mut l = self.entries.clone();
        for k in 0..n {
            let mut d = l[(k, k)].re;
            for j in 0..k {
                d -= l[(k, j)].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { minor: k + 1, pivot: d });
            }
            let dk = d.sqrt();
            l[(k, k)] = C64::new(dk, 0.0);
            for i in k + 1..n {
                let mut s = l[(i, k)];
                for j in 0..k {
                    s -= l[(i, j)] * l[(k, j)].conj();
                }
                l[(i, k)] = s / dk;
            }
        }
        Ok(())
    }

    /// Principal block of the monomials of degree at most `degree`, on the same quadrature.
    pub fn truncated(&self, degree: usize) -> GramMatrix {
        let k = self.basis.prefix_len(degree);
        GramMatrix {
            basis: MonomialBasis::new(self.basis.dim(), degree.min(self.basis.degree())),
            entries: self.entries.view((0, 0), (k, k)).into_owned(),
            quadrature_count: self.quadrature_count,
            seed: self.seed,
            draws: self.draws,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disc_volume_and_moments() {
        let d = Domain::unit_disc();
        let g0 = gram_matrix(&d, 0, 20_000, 1).unwrap();
        assert!((g0.entries[(0, 0)].re - PI).abs() / PI < 0.01);
        let g2 = gram_matrix(&d, 2, 20_000, 1).unwrap();
        for k in 0..3 {
            let want = PI / (k as f64 + 1.0);
            assert!((g2.entries[(k, k)].re - want).abs() / want < 0.02);
            for j in 0..3 {
                if j != k {
                    assert!(g2.entries[(k, j)].norm() <= 1e-2);
                }
            }
        }
        assert!(g2.hermitian_defect() <= 1e-12);
    }

    #[test]
    fn ball_volume() {
        let g = gram_matrix(&Domain::unit_ball(2), 0, 20_000, 1).unwrap();
        let want = PI * PI / 2.0;
        assert!((g.entries[(0, 0)].re - want).abs() / want < 0.01);
    }

    #[test]
    fn too_few_points_is_rejected() {
        assert!(gram_matrix(&Domain::unit_disc(), 2, 10, 1).is_err());
    }

    #[test]
    fn indefinite_matrix_names_minor() {
        let mut g = gram_matrix(&Domain::unit_disc(), 1, 2000, 1).unwrap();
        g.entries[(1, 1)] = C64::new(-1.0, 0.0);
        match g.check_cholesky() {
            Err(Error::NotPositiveDefinite { minor, .. }) => assert_eq!(minor, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn chunked_sum_is_reproducible() {
        let d = Domain::unit_ball(2);
        let a = gram_matrix(&d, 3, 5000, 9).unwrap();
        let b = gram_matrix(&d, 3, 5000, 9).unwrap();
        assert_eq!(a.entries, b.entries);
    }
}
