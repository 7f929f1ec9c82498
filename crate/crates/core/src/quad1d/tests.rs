use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use super::*;
use crate::constants::{catalan, zeta3};

fn ts(lo: f64, hi: f64) -> Interval1D {
    Interval1D::finite(lo, hi)
        .unwrap()
        .with_transform(Transform::TanhSinh)
        .unwrap()
}

fn e16(r: f64) -> f64 {
    if r == 0.0 {
        return std::f64::consts::LN_2;
    }
    let sech = 1.0 / r.cosh();
    r * sech * sech.ln_1p() / r.sinh()
}

#[test]
fn interval_validation() {
    assert!(Interval1D::finite(1.0, 1.0).is_err());
    assert!(Interval1D::finite(2.0, 1.0).is_err());
    assert!(Interval1D::finite(0.0, f64::INFINITY).is_err());
    assert!(Interval1D::semi_infinite(f64::NAN).is_err());
    assert!(Interval1D::finite(0.0, 1.0)
        .unwrap()
        .with_transform(Transform::LogMap)
        .is_err());
    assert!(Interval1D::semi_infinite(0.0)
        .unwrap()
        .with_transform(Transform::None)
        .is_err());
}

#[test]
fn rejects_bad_tolerances() {
    let i = Interval1D::finite(0.0, 1.0).unwrap();
    let l = Limits::default();
    assert!(integrate_adaptive(|x| x, &i, 0.0, 0.0, &l).is_err());
    assert!(integrate_adaptive(|x| x, &i, -1.0, 1e-3, &l).is_err());
    assert!(integrate_adaptive(|x| x, &i, f64::NAN, 1e-3, &l).is_err());
}

#[test]
fn polynomial_exactness() {
    let r = integrate_adaptive(|x| x * x, &Interval1D::finite(0.0, 1.0).unwrap(), 1e-14, 0.0, &Limits::default())
        .unwrap();
    assert!(r.status.is_converged());
    assert!((r.value - 1.0 / 3.0).abs() < 1e-16);
    assert_eq!(r.n_evals, 15);
}

#[test]
fn catalan_integrals_gk_and_ts() {
    let g = catalan();
    let f = |phi: f64| phi / phi.sin();
    let f2 = |phi: f64| phi * phi / phi.sin();
    let expect2 = 2.0 * PI * g - 3.5 * zeta3();
    for interval in [Interval1D::finite(0.0, FRAC_PI_2).unwrap(), ts(0.0, FRAC_PI_2)] {
        let r = integrate_adaptive(f, &interval, 1e-13, 0.0, &Limits::default()).unwrap();
        assert!(r.status.is_converged());
        assert!((r.value - 2.0 * g).abs() < 1e-13, "{:?}", r);
        assert!((r.value - 1.831_931_188_354_4).abs() < 1e-12);
        let r = integrate_adaptive(f2, &interval, 1e-13, 0.0, &Limits::default()).unwrap();
        assert!((r.value - expect2).abs() < 1e-13, "{:?}", r);
        assert!((r.value - 1.547_982_4).abs() < 1e-7);
    }
}

#[test]
fn inverse_sqrt_endpoint_under_tanh_sinh() {
    let r = integrate_adaptive(|x| 1.0 / x.sqrt(), &ts(0.0, 1.0), 1e-13, 0.0, &Limits::default()).unwrap();
    assert!(r.status.is_converged());
    assert!((r.value - 2.0).abs() < 1e-13, "{:?}", r);
}

#[test]
fn tanh_sinh_never_samples_endpoints() {
    for (lo, hi) in [(0.0, 1.0), (-1.0, 1.0), (0.0, FRAC_PI_2), (1.0, 1.0 + 1e-9), (-3.0, -2.0)] {
        let r = integrate_adaptive(
            |x| {
                assert!(x > lo && x < hi, "sampled {x} outside ({lo}, {hi})");
                1.0
            },
            &ts(lo, hi),
            1e-14,
            0.0,
            &Limits::default(),
        )
        .unwrap();
        assert!(((r.value - (hi - lo)) / (hi - lo)).abs() < 1e-14, "{lo} {hi} {r:?}");
    }
}

#[test]
fn semi_infinite_identities() {
    let l = Limits::default();
    let t1 = |r: f64| if r == 0.0 { 1.0 } else { r / r.sinh() };
    let t2 = |r: f64| if r == 0.0 { 0.5 } else { r / (2.0 * r).sinh() };
    let si_ts = Interval1D::semi_infinite(0.0).unwrap().with_transform(Transform::TanhSinh).unwrap();
    for (f, exact) in [(&t1 as &(dyn Fn(f64) -> f64 + Sync), PI * PI / 4.0), (&t2, PI * PI / 16.0)] {
        let a = integrate_semi_infinite(f, 0.0, 1e-13, 0.0, &l).unwrap();
        assert!(a.status.is_converged(), "{:?}", a);
        assert!((a.value - exact).abs() < 1e-12, "{:?} vs {exact}", a);
        let b = integrate_adaptive(f, &si_ts, 1e-13, 0.0, &l).unwrap();
        assert!((b.value - exact).abs() < 1e-12, "{:?} vs {exact}", b);
    }
    let e = integrate_semi_infinite(|r| (-r).exp(), 0.0, 1e-13, 0.0, &l).unwrap();
    assert!((e.value - 1.0).abs() < 1e-13);
    assert!((2.467_401_100_3 - PI * PI / 4.0).abs() < 1e-10);
    assert!((0.616_850_275_1 - PI * PI / 16.0).abs() < 1e-10);
}

#[test]
fn e16_integral_by_both_semi_infinite_paths() {
    let exact = (PI * PI * std::f64::consts::LN_2 - 3.5 * zeta3()) / 4.0;
    let l = Limits::default();
    let log_map = integrate_semi_infinite(e16, 0.0, 1e-13, 0.0, &l).unwrap();
    let truncated = integrate_truncated(
        e16,
        0.0,
        40.0,
        ExpTailBound { coefficient: 8.0, rate: 3.0 },
        1e-13,
        0.0,
        &l,
    )
    .unwrap();
    assert!((log_map.value - exact).abs() < 1e-12);
    assert!((truncated.value - exact).abs() < 1e-12);
    assert!(
        (log_map.value - truncated.value).abs() <= log_map.error_estimate + truncated.error_estimate
    );
}

#[test]
fn tail_bound_dominates_integrand() {
    let tail = ExpTailBound { coefficient: 8.0, rate: 3.0 };
    for r in [1.0, 5.0, 20.0, 40.0] {
        assert!(e16(r) <= 8.0 * r * (-3.0 * r).exp());
    }
    assert!(tail.bound(40.0) < 1e-50);
}

#[test]
fn error_honesty_battery() {
    let l = Limits::default();
    let g = catalan();
    let checks = [
        estimate_true_error(|x| x * x, &Interval1D::finite(0.0, 1.0).unwrap(), 1.0 / 3.0, 1e-10, 0.0, &l),
        estimate_true_error(|p| p / p.sin(), &Interval1D::finite(0.0, FRAC_PI_2).unwrap(), 2.0 * g, 1e-10, 0.0, &l),
        estimate_true_error(|x| 1.0 / x.sqrt(), &ts(0.0, 1.0), 2.0, 1e-10, 0.0, &l),
        estimate_true_error(|x| x.ln(), &ts(0.0, 1.0), -1.0, 1e-10, 0.0, &l),
        estimate_true_error(|x| (-x).exp(), &Interval1D::semi_infinite(0.0).unwrap(), 1.0, 1e-10, 0.0, &l),
        estimate_true_error(|x| x.sqrt(), &Interval1D::finite(0.0, 1.0).unwrap(), 2.0 / 3.0, 1e-8, 0.0, &l),
    ];
    for c in checks {
        let c = c.unwrap();
        assert!(c.is_honest(10.0), "{:?}", c);
    }
}

#[test]
fn nonfinite_value_reports_abscissa() {
    let err = integrate_adaptive(
        |x| if x > 0.5 { f64::NAN } else { x },
        &Interval1D::finite(0.0, 1.0).unwrap(),
        1e-10,
        0.0,
        &Limits::default(),
    )
    .unwrap_err();
    match err {
        Error::EvaluationFailure { point, value } => {
            assert_eq!(point.len(), 1);
            assert!(point[0] > 0.5);
            assert!(value.is_nan());
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn budget_exhaustion_is_a_status_not_an_error() {
    let limits = Limits { max_evals: 200, ..Limits::default() };
    let r = integrate_adaptive(
        |x: f64| (1.0 / x).sin(),
        &Interval1D::finite(1e-3, 1.0).unwrap(),
        1e-14,
        0.0,
        &limits,
    )
    .unwrap();
    assert_eq!(r.status, Status::MaxEvals);
    assert!(r.n_evals <= 200);
    assert!(r.error_estimate.is_finite() && r.error_estimate >= 0.0);

    let limits = Limits { max_level: 2, ..Limits::default() };
    let r = integrate_adaptive(|x: f64| x.cos(), &ts(0.0, 1.0), 1e-15, 0.0, &limits).unwrap();
    assert_eq!(r.status, Status::MaxDepth);
}

#[test]
fn parallel_flag_is_bit_identical() {
    let f = |x: f64| (3.0 * x).sin() * (-x).exp() / x.sqrt();
    for interval in [ts(0.0, 2.0), Interval1D::finite(0.1, 2.0).unwrap()] {
        let a = integrate_adaptive(f, &interval, 1e-12, 0.0, &Limits::default()).unwrap();
        let b = integrate_adaptive(f, &interval, 1e-12, 0.0, &Limits { parallel: true, ..Limits::default() })
            .unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interval_additivity(c in 0.05f64..1.5, which in 0usize..3) {
        let fs: [fn(f64) -> f64; 3] = [|p| p / p.sin(), |p| p * p / p.sin(), |p| p.cos() * (p * 3.0).sin()];
        let f = fs[which];
        let l = Limits::default();
        let whole = integrate_adaptive(f, &Interval1D::finite(0.0, FRAC_PI_2).unwrap(), 1e-12, 0.0, &l).unwrap();
        let left = integrate_adaptive(f, &Interval1D::finite(0.0, c).unwrap(), 1e-12, 0.0, &l).unwrap();
        let right = integrate_adaptive(f, &Interval1D::finite(c, FRAC_PI_2).unwrap(), 1e-12, 0.0, &l).unwrap();
        let gap = (whole.value - left.value - right.value).abs();
        prop_assert!(gap <= whole.error_estimate + left.error_estimate + right.error_estimate + 4.0 * f64::EPSILON * whole.value.abs());
    }

    #[test]
    fn linearity(alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let l = Limits::default();
        let i = ts(0.0, 1.0);
        let f = |x: f64| x.ln();
        let g = |x: f64| 1.0 / x.sqrt();
        let combo = integrate_adaptive(|x| alpha * f(x) + beta * g(x), &i, 1e-12, 0.0, &l).unwrap();
        let a = integrate_adaptive(f, &i, 1e-12, 0.0, &l).unwrap();
        let b = integrate_adaptive(g, &i, 1e-12, 0.0, &l).unwrap();
        let diff = (combo.value - alpha * a.value - beta * b.value).abs();
        prop_assert!(diff <= combo.error_estimate + alpha.abs() * a.error_estimate + beta.abs() * b.error_estimate + 1e-14);
    }
}
