//! Orthonormal polynomial bases and the kernel, metric and curvature they induce.

use nalgebra::DMatrix;

use super::basis::MonomialBasis;
use super::gram::{gram_matrix, GramMatrix};
use super::jet::Jet;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::point::{CDirection, CPoint, CVec, C64};

/// Pivots below `DROP_TOLERANCE * trace` end the factorization.
pub const DROP_TOLERANCE: f64 = 1e-10;

/// Truncation degree, quadrature size and seed for a kernel build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelOptions {
    pub degree: usize,
    pub count: usize,
    pub seed: u64,
}

impl KernelOptions {
    /// Degree 12 with 2e5 points in one variable, degree 8 with 1e6 points otherwise.
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            KernelOptions {
                degree: 12,
                count: 200_000,
                seed: 42,
            }
        } else {
            KernelOptions {
                degree: 8,
                count: 1_000_000,
                seed: 42,
            }
        }
    }
}

/// `phi_i = sum_a coeff[(a, i)] z^alpha_a`, orthonormal for the quadrature inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelEvaluator {
    pub basis: MonomialBasis,
    pub coeff: DMatrix<C64>,
    /// Basis positions removed by the pivoted factorization.
    pub dropped: Vec<usize>,
    pub seed: u64,
    pub count: usize,
}

pub fn build_evaluator(domain: &Domain, opts: &KernelOptions) -> Result<KernelEvaluator> {
    orthonormalize(&gram_matrix(domain, opts.degree, opts.count, opts.seed)?)
}

/// Inverse of the pivoted upper Cholesky factor of `H = G^T`, where
/// `H[(a, b)] = int conj(z^alpha_a) z^alpha_b`, so that `C^H H C = I`.
pub fn orthonormalize(g: &GramMatrix) -> Result<KernelEvaluator> {
    let n = g.dim();
    let mut work = g.entries.transpose();
    let trace: f64 = (0..n).map(|i| work[(i, i)].re).sum();
    if !(trace > 0.0) {
        return Err(Error::NotPositiveDefinite { minor: 1, pivot: trace });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut r = DMatrix::<C64>::zeros(n, n);
    let mut rank = 0;
    for k in 0..n {
        let (p, piv) = (k..n)
            .map(|i| (i, work[(perm[i], perm[i])].re))
            .fold((k, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        if piv < DROP_TOLERANCE * trace {
            if piv < -DROP_TOLERANCE * trace {
                return Err(Error::NotPositiveDefinite {
                    minor: k + 1,
                    pivot: piv,
                });
            }
            break;
        }
        perm.swap(k, p);
        r.swap_columns(k, p);
        // r[(k, j)] for the permuted ordering
        let rkk = piv.sqrt();
        r[(k, k)] = C64::new(rkk, 0.0);
        let pk = perm[k];
        for j in k + 1..n {
            r[(k, j)] = work[(pk, perm[j])] / rkk;
        }
        for i in k + 1..n {
            let ri = r[(k, i)].conj();
            for j in k + 1..n {
                let v = ri * r[(k, j)];
                work[(perm[i], perm[j])] -= v;
            }
        }
        rank = k + 1;
    }
    let rk = r.view((0, 0), (rank, rank)).into_owned();
    let inv = rk
        .solve_upper_triangular(&DMatrix::identity(rank, rank))
        .ok_or(Error::NotPositiveDefinite {
            minor: rank,
            pivot: 0.0,
        })?;
    let mut coeff = DMatrix::<C64>::zeros(n, rank);
    for (k, &pk) in perm.iter().take(rank).enumerate() {
        for i in 0..rank {
            coeff[(pk, i)] = inv[(k, i)];
        }
    }
    let mut dropped: Vec<usize> = perm[rank..].to_vec();
    dropped.sort_unstable();
    Ok(KernelEvaluator {
        basis: g.basis.clone(),
        coeff,
        dropped,
        seed: g.seed,
        count: g.quadrature_count,
    })
}

fn check(ev: &KernelEvaluator, z: &CPoint) -> Result<()> {
    z.ensure_dim(ev.basis.dim())?;
    z.ensure_finite()
}

impl KernelEvaluator {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    /// Number of orthonormal functions kept.
    pub fn rank(&self) -> usize {
        self.coeff.ncols()
    }

    /// `max |C^H H C - I|` against a Gram matrix of the same basis.
    pub fn basis_residual(&self, g: &GramMatrix) -> f64 {
        let h = g.entries.transpose();
        let m = self.coeff.adjoint() * h * &self.coeff;
        (m - DMatrix::identity(self.rank(), self.rank())).camax()
    }

    /// Orthonormal functions at `z`.
    pub fn phi(&self, z: &CVec) -> CVec {
        self.coeff.tr_mul(&self.basis.eval(z))
    }

    /// Holomorphic derivative of every orthonormal function, of multi-order `order`.
    pub fn phi_derivative(&self, z: &CVec, order: &[u32]) -> CVec {
        self.coeff.tr_mul(&self.basis.eval_derivative(z, order))
    }

    /// `K(z, w) = sum_i phi_i(z) conj(phi_i(w))`.
    pub fn kernel(&self, z: &CPoint, w: &CPoint) -> Result<C64> {
        check(self, z)?;
        check(self, w)?;
        let pz = self.phi(z.coords());
        let pw = self.phi(w.coords());
        Ok(pz.iter().zip(pw.iter()).map(|(a, b)| a * b.conj()).sum())
    }

    pub fn kernel_diag(&self, z: &CPoint) -> Result<f64> {
        check(self, z)?;
        Ok(self.phi(z.coords()).norm_squared())
    }

    fn first_order(&self, z: &CVec) -> (CVec, Vec<CVec>) {
        let n = self.dim();
        let phi = self.phi(z);
        let grads = (0..n)
            .map(|i| {
                let mut o = vec![0u32; n];
                o[i] = 1;
                self.phi_derivative(z, &o)
            })
            .collect();
        (phi, grads)
    }

    /// `g_{i jbar} = (K K_{i jbar} - K_i K_{jbar}) / K^2`.
    pub fn metric_tensor(&self, z: &CPoint) -> Result<DMatrix<C64>> {
        check(self, z)?;
        let n = self.dim();
        let (phi, grads) = self.first_order(z.coords());
        let k = phi.norm_squared();
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("nonpositive kernel {k}")));
        }
        let ki: Vec<C64> = grads.iter().map(|g| g.dotc(&phi).conj()).collect();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let kij = grads[j].dotc(&grads[i]);
            (kij * k - ki[i] * ki[j].conj()) / (k * k)
        }))
    }

    /// `g_B(z; v) = sum v_i conj(v_j) g_{i jbar}`; quadratic in `v`.
    pub fn metric(&self, z: &CPoint, v: &CDirection) -> Result<f64> {
        check(self, z)?;
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        if !v.coords().iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        let (phi, grads) = self.first_order(z.coords());
        let k = phi.norm_squared();
        if !(k > 0.0) {
            return Err(Error::InvalidParameter(format!("nonpositive kernel {k}")));
        }
        let mut dv = CVec::zeros(phi.len());
        for (g, vi) in grads.iter().zip(v.coords().iter()) {
            dv += g * *vi;
        }
        let cross = phi.dotc(&dv);
        Ok((k * dv.norm_squared() - cross.norm_sqr()) / (k * k))
    }

    /// Taylor coefficients of `K(z + h, z + h)` in `(h, conj h)` up to order 2 each.
    fn kernel_jet(&self, z: &CVec) -> Jet {
        let derivs: Vec<CVec> = (0..=2u32).map(|a| self.phi_derivative(z, &[a])).collect();
        let fact = [1.0, 1.0, 2.0];
        Jet::from_fn(2, |a, b| derivs[b].dotc(&derivs[a]) / (fact[a] * fact[b]))
    }

    /// Gaussian curvature `-(d dbar log lambda) / lambda` of `lambda |dz|^2`,
    /// `lambda = d dbar log K`. One variable only.
    pub fn curvature_1d(&self, z: &CPoint) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::Unsupported("curvature is implemented for one variable".into()));
        }
        check(self, z)?;
        let kj = self.kernel_jet(z.coords());
        if !(kj.value().re > 0.0) {
            return Err(Error::InvalidParameter("nonpositive kernel".into()));
        }
        let lambda = kj.ln().ddbar();
        let l0 = lambda.value().re;
        if !(l0 > 0.0) {
            return Err(Error::InvalidParameter("degenerate metric".into()));
        }
        Ok(-lambda.ln().ddbar().value().re / l0)
    }
}
