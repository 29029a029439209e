//! Monomials `z^alpha` with `|alpha| <= D`, graded by total degree.

use std::cmp::Ordering;

use crate::point::{CVec, C64};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    dim: usize,
    degree: usize,
    indices: Vec<Vec<u32>>,
}

/// Graded order: total degree first, then lexicographically larger exponents
/// first (`z1^2, z1 z2, z2^2`).
pub fn grlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

fn compositions(dim: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == dim {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        compositions(dim, total - first, prefix, out);
        prefix.pop();
    }
}

/// `C(n + d, n)`.
pub fn basis_size(dim: usize, degree: usize) -> usize {
    let mut num: u128 = 1;
    for k in 1..=dim as u128 {
        num = num * (degree as u128 + k) / k;
    }
    num as usize
}

impl MonomialBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut indices = Vec::with_capacity(basis_size(dim, degree));
        for d in 0..=degree as u32 {
            compositions(dim, d, &mut Vec::with_capacity(dim), &mut indices);
        }
        MonomialBasis { dim, degree, indices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    /// Number of leading elements of total degree at most `d`.
    pub fn prefix_len(&self, d: usize) -> usize {
        basis_size(self.dim, d.min(self.degree))
    }

    fn powers(&self, z: &[C64], table: &mut Vec<C64>) {
        let stride = self.degree + 1;
        table.clear();
        table.resize(self.dim * stride, C64::new(1.0, 0.0));
        for i in 0..self.dim {
            for k in 1..stride {
                table[i * stride + k] = table[i * stride + k - 1] * z[i];
            }
        }
    }

    /// Writes `z^alpha` for every index into `out`; `scratch` holds the power table.
    pub fn eval_into(&self, z: &[C64], scratch: &mut Vec<C64>, out: &mut [C64]) {
        self.powers(z, scratch);
        let stride = self.degree + 1;
        for (o, alpha) in out.iter_mut().zip(&self.indices) {
            let mut v = C64::new(1.0, 0.0);
            for (i, &a) in alpha.iter().enumerate() {
                if a > 0 {
                    v *= scratch[i * stride + a as usize];
                }
            }
            *o = v;
        }
    }

    pub fn eval(&self, z: &CVec) -> CVec {
        let mut out = CVec::zeros(self.len());
        let mut scratch = Vec::new();
        self.eval_into(z.as_slice(), &mut scratch, out.as_mut_slice());
        out
    }

    /// Mixed holomorphic derivative `d^k z^alpha` for the multi-order `k`.
    pub fn eval_derivative(&self, z: &CVec, order: &[u32]) -> CVec {
        let mut scratch = Vec::new();
        self.powers(z.as_slice(), &mut scratch);
        let stride = self.degree + 1;
        CVec::from_iterator(
            self.len(),
            self.indices.iter().map(|alpha| {
                let mut v = C64::new(1.0, 0.0);
                for i in 0..self.dim {
                    let (a, k) = (alpha[i], order[i]);
                    if k > a {
                        return C64::new(0.0, 0.0);
                    }
                    let falling: f64 = ((a - k + 1)..=a).map(|t| t as f64).product();
                    v *= scratch[i * stride + (a - k) as usize] * falling;
                }
                v
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_match_binomials() {
        assert_eq!(MonomialBasis::new(1, 12).len(), 13);
        assert_eq!(MonomialBasis::new(2, 8).len(), 45);
        assert_eq!(MonomialBasis::new(3, 4).len(), 35);
        assert_eq!(basis_size(2, 8), 45);
    }

    #[test]
    fn indices_are_sorted_unique_complete() {
        let b = MonomialBasis::new(3, 5);
        for w in b.indices().windows(2) {
            assert_eq!(grlex_cmp(&w[0], &w[1]), Ordering::Less);
        }
        assert!(b.indices().iter().all(|a| a.iter().sum::<u32>() <= 5));
        assert_eq!(
            &b.indices()[..4],
            &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        );
        assert_eq!(b.prefix_len(1), 4);
    }

    #[test]
    fn derivatives_of_monomials() {
        let b = MonomialBasis::new(2, 3);
        let z = CVec::from_column_slice(&[C64::new(0.5, 0.1), C64::new(-0.2, 0.3)]);
        let m = b.eval(&z);
        let d1 = b.eval_derivative(&z, &[1, 0]);
        let h = 1e-6;
        let mut zp = z.clone();
        zp[0] += C64::new(h, 0.0);
        let fd = (b.eval(&zp) - &m) / C64::new(h, 0.0);
        assert!((fd - d1).norm() < 1e-5);
        assert_eq!(b.eval_derivative(&z, &[0, 0]), m);
    }
}
