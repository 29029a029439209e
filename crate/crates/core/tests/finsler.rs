use proptest::prelude::*;
use squeezelab::finsler::{
    bracket, caratheodory_lower, caratheodory_lower_from, kobayashi_model, kobayashi_upper, kobayashi_upper_from,
    trace_csv, FinslerOptions,
};
use squeezelab::{BiholoMap, CDirection, CPoint, Domain, C64};

fn opts() -> FinslerOptions {
    FinslerOptions::default()
}

fn ellipsoid() -> Domain {
    Domain::ellipsoid(&[1.0, 4.0]).unwrap()
}

/// The ellipsoid is `L^-1(B)` with `L = diag(1, 2)`, so `g_E(x; v) = g_B(Lx; Lv)`.
fn ellipsoid_exact(x: &CPoint, v: &CDirection) -> f64 {
    let c = x.coords();
    let w = v.coords();
    kobayashi_model(
        &Domain::unit_ball(2),
        &CPoint::from_slice(&[c[0], c[1] * 2.0]),
        &CDirection::from_slice(&[w[0], w[1] * 2.0]),
    )
    .unwrap()
}

#[test]
fn model_centers() {
    let o = opts();
    let disc = Domain::unit_disc();
    let b = bracket(&disc, &CPoint::origin(1), &CDirection::real(&[1.0]), &o).unwrap();
    assert!(b.lo >= 0.997 && b.hi <= 1.003, "[{}, {}]", b.lo, b.hi);

    let ball = Domain::unit_ball(2);
    for v in [
        CDirection::real(&[1.0, 0.0]),
        CDirection::real(&[0.6, 0.8]),
        CDirection::from_slice(&[C64::new(0.0, 0.6), C64::new(0.48, -0.64)]),
    ] {
        let hi = kobayashi_upper(&ball, &CPoint::origin(2), &v, &o).unwrap().value;
        assert!(hi <= 1.0 + 1e-3, "{hi}");
    }
    let lo = caratheodory_lower(&ball, &CPoint::origin(2), &CDirection::real(&[1.0, 0.0]), &o)
        .unwrap()
        .value;
    assert!(lo >= 1.0 - 1e-3, "{lo}");

    let poly = Domain::unit_polydisc(2);
    let b = bracket(&poly, &CPoint::origin(2), &CDirection::real(&[1.0, 0.0]), &o).unwrap();
    assert!(b.hi <= 1.0 + 1e-3 && b.lo >= 1.0 - 1e-3, "[{}, {}]", b.lo, b.hi);
}

#[test]
fn ellipsoid_minor_axis() {
    let b = bracket(
        &ellipsoid(),
        &CPoint::origin(2),
        &CDirection::real(&[0.0, 1.0]),
        &opts(),
    )
    .unwrap();
    assert!(b.lo >= 4.0 * 0.98 && b.hi <= 4.0 * 1.02, "[{}, {}]", b.lo, b.hi);
}

#[test]
fn brackets_enclose_the_closed_form() {
    let e = ellipsoid();
    let dirs = [
        CDirection::real(&[1.0, 0.0]),
        CDirection::from_slice(&[C64::new(0.3, 0.4), C64::new(-0.5, 0.2)]),
    ];
    for (i, x) in e.sample_interior(4, 11).unwrap().iter().enumerate() {
        let v = &dirs[i % 2];
        let b = bracket(&e, x, v, &opts()).unwrap();
        let exact = ellipsoid_exact(x, v);
        assert!(b.lo <= exact * (1.0 + 1e-4), "lo {} exact {exact}", b.lo);
        assert!(b.hi >= exact * (1.0 - 1e-4), "hi {} exact {exact}", b.hi);
        assert!(b.width() <= 0.05 * b.midpoint(), "[{}, {}]", b.lo, b.hi);
    }
}

#[test]
fn sandwich_without_recentering() {
    let o = FinslerOptions {
        recenter: false,
        ..opts()
    };
    let d = Domain::polydisc(&[1.0, 0.5]).unwrap();
    for x in d.sample_interior(3, 5).unwrap() {
        let v = CDirection::real(&[0.3, -0.7]);
        let b = bracket(&d, &x, &v, &o).unwrap();
        assert!(b.lo <= b.hi * (1.0 + 2e-3));
        let exact = kobayashi_model(&d, &x, &v).unwrap();
        assert!(b.lo <= exact * (1.0 + 1e-4) && b.hi >= exact * (1.0 - 1e-4));
    }
}

#[test]
fn quadratic_homogeneity() {
    let e = ellipsoid();
    let x = CPoint::real(&[0.2, -0.15]);
    let v = CDirection::from_slice(&[C64::new(0.1, 0.5), C64::new(0.3, 0.0)]);
    let v2 = CDirection::new(v.coords() * C64::new(0.0, 2.0));
    let v3 = CDirection::new(v.coords() * C64::new(2.0, 0.0));
    let a = bracket(&e, &x, &v, &opts()).unwrap();
    let b = bracket(&e, &x, &v2, &opts()).unwrap();
    let c = bracket(&e, &x, &v3, &opts()).unwrap();
    // a power-of-two real factor leaves the unit direction bit-identical
    assert_eq!(c.lo, 4.0 * a.lo);
    assert_eq!(c.hi, 4.0 * a.hi);
    assert!((b.lo - 4.0 * a.lo).abs() <= 1e-9 * b.lo, "{} {}", b.lo, a.lo);
    assert!((b.hi - 4.0 * a.hi).abs() <= 1e-9 * b.hi, "{} {}", b.hi, a.hi);
}

#[test]
fn inclusion_monotonicity_with_seed() {
    // E is inside the unit ball, so its disks are admissible there
    let e = ellipsoid();
    let ball = Domain::unit_ball(2);
    for recenter in [true, false] {
        let o = FinslerOptions { recenter, ..opts() };
        let x = CPoint::real(&[0.3, 0.2]);
        let v = CDirection::real(&[0.0, 1.0]);
        let small = kobayashi_upper(&e, &x, &v, &o).unwrap();
        let big = kobayashi_upper_from(&ball, &x, &v, &o, Some(&small.disk)).unwrap();
        assert!(big.value <= small.value, "{} > {}", big.value, small.value);
    }
}

#[test]
fn degree_doubling_does_not_worsen() {
    let e = ellipsoid();
    let x = CPoint::real(&[-0.4, 0.25]);
    let v = CDirection::from_slice(&[C64::new(0.5, 0.5), C64::new(0.0, 0.7)]);
    for recenter in [true, false] {
        let low = FinslerOptions {
            degree: 3,
            recenter,
            ..opts()
        };
        let high = FinslerOptions { degree: 6, ..low };
        let k3 = kobayashi_upper(&e, &x, &v, &low).unwrap();
        let k6 = kobayashi_upper_from(&e, &x, &v, &high, Some(&k3.disk)).unwrap();
        assert!(k6.value <= k3.value, "{} > {}", k6.value, k3.value);
        let c3 = caratheodory_lower(&e, &x, &v, &low).unwrap();
        let c6 = caratheodory_lower_from(&e, &x, &v, &high, Some(&c3.functional)).unwrap();
        assert!(c6.value >= c3.value * (1.0 - 1e-9), "{} < {}", c6.value, c3.value);
    }
}

#[test]
fn automorphism_invariance_on_the_ball() {
    // evaluation at x against the pushed-forward vector at the center
    let ball = Domain::unit_ball(2);
    let x = CPoint::from_slice(&[C64::new(0.3, 0.1), C64::new(-0.2, 0.25)]);
    let v = CDirection::from_slice(&[C64::new(0.5, -0.1), C64::new(0.2, 0.7)]);
    let m = BiholoMap::ball_mobius(&x).unwrap();
    let w = CDirection::new(m.push_forward(x.coords(), v.coords()).unwrap());
    let at_x = bracket(&ball, &x, &v, &opts()).unwrap();
    let at_0 = bracket(&ball, &CPoint::origin(2), &w, &opts()).unwrap();
    for (a, b) in [(at_x.lo, at_0.lo), (at_x.hi, at_0.hi)] {
        assert!((a - b).abs() <= 0.01 * b, "{a} vs {b}");
    }
    // disks need no chart; polynomial functionals off-center do (the extremal is rational)
    let raw = FinslerOptions {
        recenter: false,
        ..opts()
    };
    let hi = kobayashi_upper(&ball, &x, &v, &raw).unwrap().value;
    assert!((hi - at_0.hi).abs() <= 0.01 * at_0.hi, "{hi} vs {}", at_0.hi);
}

#[test]
fn trace_rows_are_emitted() {
    let o = FinslerOptions {
        trace: true,
        degree: 2,
        budget: 20,
        starts: 2,
        ..opts()
    };
    let k = kobayashi_upper(
        &ellipsoid(),
        &CPoint::real(&[0.1, 0.1]),
        &CDirection::real(&[1.0, 1.0]),
        &o,
    )
    .unwrap();
    assert!(!k.trace.is_empty());
    let csv = trace_csv(&k.trace);
    assert!(csv.starts_with("start,stage,iteration,objective,bound,feasibility_margin\n"));
    assert_eq!(csv.lines().count(), k.trace.len() + 1);
}

#[test]
fn invalid_inputs() {
    let d = Domain::unit_disc();
    let o = opts();
    assert!(bracket(&d, &CPoint::real(&[1.5]), &CDirection::real(&[1.0]), &o).is_err());
    assert!(bracket(&d, &CPoint::origin(1), &CDirection::real(&[0.0]), &o).is_err());
    assert!(bracket(&d, &CPoint::origin(1), &CDirection::real(&[1.0, 0.0]), &o).is_err());
    assert!(kobayashi_model(&ellipsoid(), &CPoint::origin(2), &CDirection::real(&[1.0, 0.0])).is_err());
}

fn cvec2() -> impl Strategy<Value = [C64; 2]> {
    prop::array::uniform4(-1.0f64..1.0).prop_map(|a| [C64::new(a[0], a[1]), C64::new(a[2], a[3])])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_metric_is_quadratic(x in cvec2(), v in cvec2(), l in 0.1f64..5.0, th in 0.0f64..std::f64::consts::TAU) {
        let x = CPoint::from_slice(&[x[0] * 0.4, x[1] * 0.4]);
        prop_assume!(v[0].norm() + v[1].norm() > 1e-3);
        let lam = C64::from_polar(l, th);
        let v1 = CDirection::from_slice(&v);
        let v2 = CDirection::from_slice(&[v[0] * lam, v[1] * lam]);
        for d in [Domain::unit_ball(2), Domain::unit_polydisc(2)] {
            let a = kobayashi_model(&d, &x, &v1).unwrap();
            let b = kobayashi_model(&d, &x, &v2).unwrap();
            prop_assert!((b - l * l * a).abs() <= 1e-10 * b.max(1e-300));
        }
    }

    #[test]
    fn model_metric_is_mobius_invariant(x in cvec2(), v in cvec2()) {
        let x = CPoint::from_slice(&[x[0] * 0.4, x[1] * 0.4]);
        prop_assume!(v[0].norm() + v[1].norm() > 1e-3);
        let v = CDirection::from_slice(&v);
        let ball = Domain::unit_ball(2);
        let m = BiholoMap::ball_mobius(&x).unwrap();
        let w = CDirection::new(m.push_forward(x.coords(), v.coords()).unwrap());
        let a = kobayashi_model(&ball, &x, &v).unwrap();
        let b = kobayashi_model(&ball, &CPoint::origin(2), &w).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b);
    }
}
