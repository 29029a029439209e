//! Deterministic low-discrepancy sequences.
//!
//! Halton points with a seeded Cranley-Patterson rotation: the shift is drawn
//! once from a ChaCha stream, so a `(seed, index)` pair always maps to the same
//! point and the sequence can be evaluated out of order (chunked reductions).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

#[derive(Clone, Debug)]
pub struct Halton {
    shift: Vec<f64>,
}

impl Halton {
    /// # Panics
    /// If `dims` exceeds the built-in prime table (16 real dimensions).
    pub fn new(dims: usize, seed: u64) -> Self {
        assert!(dims <= PRIMES.len(), "Halton supports at most {} dims", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dims).map(|_| rng.gen::<f64>()).collect();
        Halton { shift }
    }

    pub fn dims(&self) -> usize {
        self.shift.len()
    }

    /// Point with index `i` (1-based indices avoid the all-zero point).
    pub fn point_into(&self, i: u64, out: &mut [f64]) {
        for (d, o) in out.iter_mut().enumerate() {
            let u = radical_inverse(i + 1, PRIMES[d]) + self.shift[d];
            *o = u - u.floor();
        }
    }

    pub fn point(&self, i: u64) -> Vec<f64> {
        let mut v = vec![0.0; self.dims()];
        self.point_into(i, &mut v);
        v
    }
}

/// Well-spread unit vectors in R^dims (Box-Muller over Halton pairs).
pub fn sphere_directions(dims: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let padded = dims + dims % 2;
    let seq = Halton::new(padded, seed);
    let mut u = vec![0.0; padded];
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        seq.point_into(i, &mut u);
        i += 1;
        let mut g = Vec::with_capacity(padded);
        for pair in u.chunks_exact(2) {
            let r = (-2.0 * pair[0].max(1e-300).ln()).sqrt();
            let t = std::f64::consts::TAU * pair[1];
            g.push(r * t.cos());
            g.push(r * t.sin());
        }
        g.truncate(dims);
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            out.push(g.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn halton_is_deterministic_and_in_unit_cube() {
        let a = Halton::new(4, 7);
        let b = Halton::new(4, 7);
        for i in 0..100 {
            let p = a.point(i);
            assert_eq!(p, b.point(i));
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        assert_ne!(Halton::new(4, 8).point(0), a.point(0));
    }

    #[test]
    fn sphere_directions_are_unit() {
        let dirs = sphere_directions(3, 50, 1);
        assert_eq!(dirs.len(), 50);
        for d in &dirs {
            let n: f64 = d.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
