//! Lower bounds for `g_C` from polynomial functionals.
//!
//! With `w = z - x` the competitor is `h = sum_{1 <= |alpha| <= K} c_alpha w^alpha`,
//! normalized by `dh(v) = 1`. A polynomial attains its modulus maximum on the
//! boundary, so `h / max |h|` maps into the unit disc and `g_C(x; v) >= |v|^2 / max |h|^2`.
//! Minimizing `max |h|` under the linear normalization is a convex problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::optim::{bfgs, log_sum_exp};
use super::{check_inputs, recentering_chart, FinslerOptions, TraceRow, BETA_STAGES};
use crate::bergman::MonomialBasis;
use crate::domain::{BiholoMap, Domain};
use crate::error::Result;
use crate::point::{hdot, CDirection, CPoint, CVec, C64};

/// Modulus target for the normalized functional.
pub const MODULUS_MARGIN: f64 = 1e-6;
const CONSTRAINT_SAMPLES: usize = 2048;
const CHECK_SAMPLES: usize = 8192;
const REFINE_POINTS: usize = 24;
const EXCHANGE_ROUNDS: usize = 3;
const EXCHANGE_FIRST_STAGE: usize = 3;

/// Local maximum of `|h|` on the boundary near `p`, by random-direction hill
/// climbing over rays from the anchor.
fn refine_peak(domain: &Domain, h: &FunctionalAnsatz, p: &CVec, rng: &mut ChaCha8Rng) -> (f64, CVec) {
    let anchor = domain.anchor().coords();
    let mut u = p - anchor;
    let mut best = h.eval(p).norm();
    let mut step = 0.05 * u.norm();
    let mut fails = 0;
    for _ in 0..400 {
        let du = CVec::from_iterator(
            u.len(),
            (0..u.len()).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)),
        );
        let cand = &u + du * C64::new(step, 0.0);
        let Some(t) = domain.ray_exit(anchor, &cand) else {
            continue;
        };
        let q = anchor + &cand * C64::new(t, 0.0);
        let val = h.eval(&q).norm();
        if val > best {
            best = val;
            u = q - anchor;
            fails = 0;
        } else {
            fails += 1;
            if fails >= 12 {
                step *= 0.5;
                fails = 0;
                if step < 1e-9 {
                    break;
                }
            }
        }
    }
    (best, anchor + u)
}

/// `h(z) = sum_m coeffs[m] * (F(z) - F(x))^exponents[m]` with `F` the chart
/// (identity when `None`), so `h(x) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalAnsatz {
    pub base_point: CPoint,
    pub exponents: Vec<Vec<u32>>,
    pub coeffs: Vec<C64>,
    pub chart: Option<BiholoMap>,
}

impl FunctionalAnsatz {
    /// `+inf` where the chart is singular.
    pub fn eval(&self, z: &CVec) -> C64 {
        let w = match &self.chart {
            Some(m) => match (m.apply_vec(z), m.apply_vec(self.base_point.coords())) {
                (Ok(a), Ok(b)) => a - b,
                _ => return C64::new(f64::INFINITY, 0.0),
            },
            None => z - self.base_point.coords(),
        };
        self.exponents
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                let mut p = *c;
                for (wi, &k) in w.iter().zip(e) {
                    p *= wi.powu(k);
                }
                p
            })
            .sum()
    }

    /// `dh(v)` at the base point.
    pub fn differential(&self, v: &CVec) -> Result<C64> {
        let v = match &self.chart {
            Some(m) => m.push_forward(self.base_point.coords(), v)?,
            None => v.clone(),
        };
        Ok(self
            .exponents
            .iter()
            .zip(&self.coeffs)
            .filter(|(e, _)| e.iter().sum::<u32>() == 1)
            .map(|(e, c)| {
                let i = e.iter().position(|&k| k == 1).unwrap();
                c * v[i]
            })
            .sum())
    }
}

#[derive(Clone, Debug)]
pub struct CaratheodoryBound {
    /// Lower bound on `g_C(x; v)` for the caller's `v`.
    pub value: f64,
    /// Scaled so that `|h| <= 1 - MODULUS_MARGIN` on all samples.
    pub functional: FunctionalAnsatz,
    /// Largest `|h|` on the samples before scaling, with `dh(v_hat) = 1`.
    pub max_modulus: f64,
    pub trace: Vec<TraceRow>,
}

/// `h_j = a_j + sum_m B_jm c_m` on a fixed point set.
struct Affine {
    a: Vec<C64>,
    b: Vec<Vec<C64>>,
}

struct Reduced {
    exponents: Vec<Vec<u32>>,
    /// Index of the eliminated linear monomial and the pivot `v_hat[k]`.
    k_mono: usize,
    k: usize,
    vk: C64,
    /// Linear monomial index of each coordinate.
    linear: Vec<usize>,
    vhat: CVec,
}

impl Reduced {
    fn new(n: usize, degree: usize, vhat: &CVec) -> Self {
        let basis = MonomialBasis::new(n, degree.max(1));
        let exponents: Vec<Vec<u32>> = basis.indices()[1..].to_vec();
        let linear: Vec<usize> = (0..n)
            .map(|i| {
                exponents
                    .iter()
                    .position(|e| e.iter().sum::<u32>() == 1 && e[i] == 1)
                    .unwrap()
            })
            .collect();
        let k = (0..n)
            .max_by(|&a, &b| vhat[a].norm().total_cmp(&vhat[b].norm()))
            .unwrap();
        Reduced {
            exponents,
            k_mono: linear[k],
            k,
            vk: vhat[k],
            linear,
            vhat: vhat.clone(),
        }
    }

    fn nfree(&self) -> usize {
        self.exponents.len() - 1
    }

    /// Monomial index of free variable `m`.
    fn mono(&self, m: usize) -> usize {
        if m < self.k_mono {
            m
        } else {
            m + 1
        }
    }

    fn affine(&self, x: &CVec, pts: &[CVec]) -> Affine {
        let mut a = Vec::with_capacity(pts.len());
        let mut b = Vec::with_capacity(pts.len());
        for p in pts {
            let w = p - x;
            let mono: Vec<C64> = self
                .exponents
                .iter()
                .map(|e| {
                    let mut r = C64::new(1.0, 0.0);
                    for (wi, &k) in w.iter().zip(e) {
                        r *= wi.powu(k);
                    }
                    r
                })
                .collect();
            let wk = mono[self.k_mono];
            a.push(wk / self.vk);
            let row = (0..self.nfree())
                .map(|m| {
                    let idx = self.mono(m);
                    match self.linear.iter().position(|&l| l == idx) {
                        Some(i) => mono[idx] - self.vhat[i] * wk / self.vk,
                        None => mono[idx],
                    }
                })
                .collect();
            b.push(row);
        }
        Affine { a, b }
    }

    /// Full coefficient list from the free variables.
    fn coefficients(&self, c: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.exponents.len()];
        for (m, cm) in c.iter().enumerate() {
            out[self.mono(m)] = *cm;
        }
        let mut lin = C64::new(1.0, 0.0);
        for (i, &l) in self.linear.iter().enumerate() {
            if i != self.k {
                lin -= out[l] * self.vhat[i];
            }
        }
        out[self.k_mono] = lin / self.vk;
        out
    }

    /// Free variables of `f`, rescaled to `dh(v) = 1`; terms outside the basis are dropped.
    fn embed(&self, f: &FunctionalAnsatz) -> Option<Vec<f64>> {
        let coeff = |e: &Vec<u32>| {
            f.exponents
                .iter()
                .position(|g| g == e)
                .map_or(C64::new(0.0, 0.0), |i| f.coeffs[i])
        };
        let d: C64 = self
            .linear
            .iter()
            .enumerate()
            .map(|(i, &l)| coeff(&self.exponents[l]) * self.vhat[i])
            .sum();
        if d.norm() < 1e-300 {
            return None;
        }
        let mut y = vec![0.0; 2 * self.nfree()];
        for m in 0..self.nfree() {
            let c = coeff(&self.exponents[self.mono(m)]) / d;
            y[2 * m] = c.re;
            y[2 * m + 1] = c.im;
        }
        Some(y)
    }

    /// Free variables of a linear functional `sum_i l_i w_i` with `sum l_i v_i = 1`.
    fn coords_of_linear(&self, l: &CVec) -> Vec<f64> {
        let mut y = vec![0.0; 2 * self.nfree()];
        for (i, &li) in self.linear.iter().enumerate() {
            if i == self.k {
                continue;
            }
            let m = if li < self.k_mono { li } else { li - 1 };
            y[2 * m] = l[i].re;
            y[2 * m + 1] = l[i].im;
        }
        y
    }
}

fn values(aff: &Affine, y: &[f64]) -> Vec<C64> {
    aff.a
        .iter()
        .zip(&aff.b)
        .map(|(a, row)| {
            let mut h = *a;
            for (m, bm) in row.iter().enumerate() {
                h += bm * C64::new(y[2 * m], y[2 * m + 1]);
            }
            h
        })
        .collect()
}

fn max_modulus(aff: &Affine, y: &[f64]) -> f64 {
    values(aff, y).into_iter().map(|h| h.norm()).fold(0.0, f64::max)
}

struct Search<'a> {
    opts: &'a FinslerOptions,
    /// Scale turning `max |h|^2` into the reported bound.
    scale: f64,
    trace: Vec<TraceRow>,
}

impl Search<'_> {
    /// Multi-start continuation; returns the start or end point with the smallest maximum.
    fn run(&mut self, aff: &Affine, starts: Vec<Vec<f64>>, first_stage: usize) -> (f64, Vec<f64>) {
        let mut best: Option<(f64, Vec<f64>)> = None;
        let consider = |y: Vec<f64>, best: &mut Option<(f64, Vec<f64>)>| {
            let f = max_modulus(aff, &y);
            if f.is_finite() && best.as_ref().is_none_or(|b| f < b.0) {
                *best = Some((f, y));
            }
        };
        let first = self.trace.last().map_or(0, |r| r.start + 1);
        for (si, y0) in starts.into_iter().enumerate() {
            consider(y0.clone(), &mut best);
            if y0.is_empty() {
                continue;
            }
            let mut y = y0;
            for (stage, c) in BETA_STAGES.iter().enumerate().skip(first_stage) {
                let beta = c / max_modulus(aff, &y).powi(2).max(1e-12);
                let mut w = Vec::new();
                let mut obj = |yy: &[f64], g: &mut [f64]| {
                    let h = values(aff, yy);
                    let sq: Vec<f64> = h.iter().map(|v| v.norm_sqr()).collect();
                    let val = log_sum_exp(&sq, beta, &mut w);
                    g.iter_mut().for_each(|v| *v = 0.0);
                    for (j, hj) in h.iter().enumerate() {
                        if w[j] < 1e-300 {
                            continue;
                        }
                        for (m, bm) in aff.b[j].iter().enumerate() {
                            let gd = hj * bm.conj() * (2.0 * w[j]);
                            g[2 * m] += gd.re;
                            g[2 * m + 1] += gd.im;
                        }
                    }
                    val
                };
                let mut rows = Vec::new();
                let res = bfgs(&mut obj, &y, self.opts.budget, 1e-14, &mut |it, f| {
                    if self.opts.trace {
                        rows.push((it, f));
                    }
                });
                if self.opts.trace {
                    let exact = max_modulus(aff, &res.x).powi(2);
                    for (it, f) in rows {
                        self.trace.push(TraceRow {
                            start: first + si,
                            stage,
                            iteration: it,
                            objective: f,
                            bound: self.scale / exact,
                            margin: 1.0 - exact / f,
                        });
                    }
                }
                y = res.x;
            }
            consider(y, &mut best);
        }
        best.expect("at least one start")
    }
}

pub fn caratheodory_lower(
    domain: &Domain,
    x: &CPoint,
    v: &CDirection,
    opts: &FinslerOptions,
) -> Result<CaratheodoryBound> {
    caratheodory_lower_from(domain, x, v, opts, None)
}

/// As [`caratheodory_lower`], also trying `start` when it was built at the same
/// base point in the same chart (for example at a lower degree).
pub fn caratheodory_lower_from(
    domain: &Domain,
    x: &CPoint,
    v: &CDirection,
    opts: &FinslerOptions,
    start: Option<&FunctionalAnsatz>,
) -> Result<CaratheodoryBound> {
    check_inputs(domain, x, v)?;
    let (vnorm, vhat) = v.canonical()?;
    let n = domain.dim();
    // with a chart the samples live on the boundary of its (convex) image
    let chart = recentering_chart(domain, x, opts);
    let (work, xc, vc) = match &chart {
        Some(c) => (
            &c.image,
            c.map.apply_vec(x.coords())?,
            c.map.push_forward(x.coords(), &vhat)?,
        ),
        None => (domain, x.coords().clone(), vhat.clone()),
    };
    let vc_norm = vc.norm();
    let vc_hat = vc.unscale(vc_norm);
    let boundary = |count: usize, seed: u64| -> Result<Vec<CVec>> {
        Ok(work
            .sample_boundary(count, seed)?
            .into_iter()
            .map(CPoint::into_inner)
            .collect())
    };
    let red = Reduced::new(n, opts.degree, &vc_hat);
    let nvar = 2 * red.nfree();
    let mut pts = boundary(CONSTRAINT_SAMPLES, opts.seed)?;
    let mut aff = red.affine(&xc, &pts);

    let mut starts = vec![vec![0.0; nvar]];
    starts.push(red.coords_of_linear(&vc_hat.map(|c| c.conj())));
    if work.is_convex() || work.is_homogeneous_model() {
        if let Ok(foot) = work.nearest_boundary(&CPoint::new(xc.clone())) {
            let s = hdot(&vc_hat, &foot.normal);
            if s.norm() > 1e-3 {
                let l = foot.normal.map(|c| c.conj() / s);
                starts.push(red.coords_of_linear(&l));
            }
        }
    }
    let chart_map = chart.as_ref().map(|c| c.map.clone());
    if let Some(f) = start.filter(|f| f.chart == chart_map && f.base_point == *x) {
        if let Some(y) = red.embed(f) {
            starts.push(y);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xca7a);
    let want = (opts.starts / 2).max(starts.len() + 1);
    while starts.len() < want {
        starts.push((0..nvar).map(|_| 0.2 * (2.0 * rng.gen::<f64>() - 1.0)).collect());
    }

    let mut search = Search {
        opts,
        scale: (vnorm * vc_norm).powi(2),
        trace: Vec::new(),
    };
    let (_, mut y) = search.run(&aff, starts.clone(), 0);

    // exchange rounds: add the true peaks between samples and re-optimize
    let check = boundary(CHECK_SAMPLES, opts.seed.wrapping_add(0x9e37))?;
    let check_aff = red.affine(&xc, &check);
    let local = |y: &[f64]| FunctionalAnsatz {
        base_point: CPoint::new(xc.clone()),
        exponents: red.exponents.clone(),
        coeffs: red.coefficients(&free_coeffs(y)),
        chart: None,
    };
    // sup of |h| over the boundary: samples, denser check points, refined peaks
    let mut certify = |y: &[f64], aff: &Affine| {
        let on_samples = max_modulus(aff, y);
        let h = local(y);
        let mut ranked: Vec<(f64, &CVec)> = values(&check_aff, y)
            .into_iter()
            .map(|h| h.norm())
            .zip(&check)
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut m = on_samples.max(ranked[0].0);
        let mut peaks = Vec::new();
        for (_, p) in ranked.into_iter().take(REFINE_POINTS) {
            let (val, q) = refine_peak(work, &h, p, &mut rng);
            m = m.max(val);
            if val > on_samples {
                peaks.push(q);
            }
        }
        (m, on_samples, peaks)
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for y0 in starts {
        let (m, _, _) = certify(&y0, &aff);
        if best.as_ref().is_none_or(|b| m < b.0) {
            best = Some((m, y0));
        }
    }
    let mut round = 0;
    loop {
        let (m, on_samples, peaks) = certify(&y, &aff);
        if best.as_ref().is_none_or(|b| m < b.0) {
            best = Some((m, y.clone()));
        }
        if round == EXCHANGE_ROUNDS || m <= on_samples * (1.0 + 1e-5) || nvar == 0 {
            break;
        }
        round += 1;
        pts.extend(peaks);
        aff = red.affine(&xc, &pts);
        y = search.run(&aff, vec![y], EXCHANGE_FIRST_STAGE).1;
    }
    let (m, y) = best.expect("at least one round");

    let s = (1.0 - MODULUS_MARGIN) / m;
    let functional = FunctionalAnsatz {
        base_point: x.clone(),
        exponents: red.exponents.clone(),
        coeffs: red.coefficients(&free_coeffs(&y)).into_iter().map(|c| c * s).collect(),
        chart: chart_map,
    };
    Ok(CaratheodoryBound {
        value: (vnorm * vc_norm * s).powi(2),
        functional,
        max_modulus: m,
        trace: search.trace,
    })
}

fn free_coeffs(y: &[f64]) -> Vec<C64> {
    y.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}
