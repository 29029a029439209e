//! Dense BFGS and log-sum-exp smoothing of a maximum.

/// Smooth maximum `(1/beta) log sum exp(beta v_j)` and its weights (softmax).
pub fn log_sum_exp(values: &[f64], beta: f64, weights: &mut Vec<f64>) -> f64 {
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    weights.clear();
    weights.extend(values.iter().map(|v| (beta * (v - m)).exp()));
    let s: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= s;
    }
    m + s.ln() / beta
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
}

/// Minimizes `f` (returning value, writing the gradient) from `x0`.
/// `on_iter(iteration, value)` is called after each accepted step.
pub fn bfgs(
    f: &mut dyn FnMut(&[f64], &mut [f64]) -> f64,
    x0: &[f64],
    max_iter: usize,
    gtol: f64,
    on_iter: &mut dyn FnMut(usize, f64),
) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if n == 0 {
        return Minimum {
            x,
            f: fx,
            iterations: 0,
        };
    }
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    let mut first = true;
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut iterations = 0;
    for it in 0..max_iter {
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !gnorm.is_finite() || gnorm <= gtol {
            break;
        }
        for i in 0..n {
            dir[i] = -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            // lost descent: restart from steepest descent
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] = if i == j { 1.0 } else { 0.0 };
                }
                dir[i] = -g[i];
            }
            slope = -gnorm * gnorm;
        }
        let mut step = 1.0;
        let mut accepted = false;
        let mut fn_ = fx;
        for _ in 0..50 {
            for i in 0..n {
                xn[i] = x[i] + step * dir[i];
            }
            fn_ = f(&xn, &mut gn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let s: Vec<f64> = (0..n).map(|i| xn[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let decrease = fx - fn_;
        x.copy_from_slice(&xn);
        g.copy_from_slice(&gn);
        fx = fn_;
        iterations = it + 1;
        on_iter(iterations, fx);
        if sy > 1e-14 {
            if first {
                let yy: f64 = y.iter().map(|v| v * v).sum();
                let scale = sy / yy;
                for i in 0..n {
                    for j in 0..n {
                        h[i * n + j] = if i == j { scale } else { 0.0 };
                    }
                }
                first = false;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
        if decrease.abs() <= 1e-15 * fx.abs().max(1e-300) {
            break;
        }
    }
    Minimum { x, f: fx, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let mut f = |x: &[f64], g: &mut [f64]| {
            let (a, b) = (x[0], x[1]);
            g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            g[1] = 200.0 * (b - a * a);
            (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
        };
        let m = bfgs(&mut f, &[-1.2, 1.0], 500, 1e-10, &mut |_, _| {});
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn lse_bounds_max() {
        let v = [1.0, 3.0, 2.0];
        let mut w = Vec::new();
        let s = log_sum_exp(&v, 10.0, &mut w);
        assert!(s >= 3.0 && s <= 3.0 + (3f64).ln() / 10.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
