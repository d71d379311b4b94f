mod common;

use common::{c, rel};
use proptest::prelude::*;
use qaw::qkernel::*;
use qaw::{QContext, QawError, C64};

/// Euler: (z;q)_inf = sum_n (-1)^n q^{n(n-1)/2} z^n / (q;q)_n.
fn euler_series(z: C64, q: f64) -> C64 {
    let mut s = c(0.0, 0.0);
    let mut qq = 1.0;
    for n in 0..200 {
        if n > 0 {
            qq *= 1.0 - q.powi(n);
        }
        let t = z.powi(n) * (-1f64).powi(n) * q.powf((n * (n - 1)) as f64 / 2.0) / qq;
        s += t;
        if t.norm() < 1e-300 {
            break;
        }
    }
    s
}

/// Jacobi triple product left side: sum_n (-1)^n q^{n(n-1)/2} z^n over all n.
fn triple_sum(z: C64, q: f64) -> C64 {
    (-60..=60)
        .map(|n: i32| z.powi(n) * (-1f64).powi(n) * q.powf((n * (n - 1)) as f64 / 2.0))
        .sum()
}

#[test]
fn qpoch_inf_matches_euler_series() {
    let ctx = QContext::real(0.3).unwrap();
    for z in [c(0.5, 0.0), c(-0.7, 0.2), c(1.4, -0.3), c(2.5, 0.0)] {
        let v = qpoch_inf(z, &ctx);
        assert!(v.converged);
        assert!(rel(v.value, euler_series(z, 0.3)) < 1e-13, "z = {z}");
    }
}

#[test]
fn theta_is_jacobi_triple_product() {
    let q = 0.25;
    let ctx = QContext::real(q).unwrap();
    let qq = qpoch_inf(c(q, 0.0), &ctx).value;
    for z in [c(0.3, 0.1), c(-1.7, 0.4), c(0.9, -0.9)] {
        let lhs = triple_sum(z, q);
        assert!(rel(qq * theta(z, &ctx).unwrap(), lhs) < 1e-13);
    }
}

#[test]
fn finite_pochhammer_small_cases() {
    let q = c(0.5, 0.0);
    assert_eq!(qpoch_n(c(0.3, 0.0), q, 0), c(1.0, 0.0));
    let v = qpoch_n(c(0.3, 0.0), q, 2);
    assert!((v - c(0.7 * 0.85, 0.0)).norm() < 1e-15);
    // (q^-1; q)_n vanishes from n = 2 on
    assert_eq!(qpoch_n(c(2.0, 0.0), q, 3), c(0.0, 0.0));
}

#[test]
fn qbinom_known_values() {
    let q = c(0.5, 0.0);
    // [4, 2]_q = 1 + q + 2q^2 + q^3 + q^4
    let expect = 1.0 + 0.5 + 2.0 * 0.25 + 0.125 + 0.0625;
    assert!((qbinom(4, 2, q).unwrap() - c(expect, 0.0)).norm() < 1e-14);
    assert!(matches!(qbinom(3, 4, q), Err(QawError::InvalidInput(_))));
    assert!(matches!(qbinom(3, -1, q), Err(QawError::InvalidInput(_))));
}

#[test]
fn context_rejects_bad_q() {
    assert!(QContext::real(0.0).is_err());
    assert!(QContext::real(0.96).is_err());
    assert!(QContext::new(c(0.6, 0.8)).is_err());
    assert!(QContext::real(0.5).unwrap().with_eps(0.0).is_err());
    assert!(QContext::real(-0.4).is_ok());
}

#[test]
fn theta_rejects_zero_argument() {
    let ctx = QContext::real(0.2).unwrap();
    assert!(theta(c(0.0, 0.0), &ctx).is_err());
    assert!(matches!(
        theta_guarded(c(0.04, 0.0), c(0.2, 0.0), 1e-14, 1e-8, "x"),
        Err(QawError::ThetaZero(_))
    ));
}

#[test]
fn lattice_detection() {
    let q = c(0.1, 0.0);
    assert_eq!(lattice_index(c(0.001, 0.0), q, 1e-8), Some(3));
    assert_eq!(lattice_index(c(100.0, 0.0), q, 1e-8), Some(-2));
    assert_eq!(lattice_index(c(0.002, 0.0), q, 1e-8), None);
    assert_eq!(pole_index(c(10.0, 0.0), q, 1e-8), Some(1));
    assert_eq!(pole_index(c(0.1, 0.0), q, 1e-8), None);
}

#[test]
fn scaled_product_survives_overflow() {
    let a = c(1e30, 0.0);
    let q = c(0.5, 0.0);
    let s = pinf_scaled(a, q, 1e-15);
    // |(1e30; 1/2)_inf| is about 2^{(log2 1e30)^2 / 2}, far beyond f64
    assert!(s.e > 1024);
    let mut r = s;
    r.div_s(pinf_scaled(a * q, q, 1e-15));
    assert!(rel(r.value(), 1.0 - a) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_quasi_periodic(re in -2.0..2.0f64, im in -2.0..2.0f64, q in 0.05..0.8f64) {
        let z = c(re, im);
        prop_assume!(z.norm() > 0.1);
        let ctx = QContext::real(q).unwrap();
        let t = theta(z, &ctx).unwrap();
        let tq = theta(z * q, &ctx).unwrap();
        let scale = t.norm().max(tq.norm());
        prop_assume!(scale > 1e-12);
        // theta(qz) = -theta(z)/z and theta(q/z) = theta(z)
        prop_assert!((tq + t / z).norm() <= 1e-11 * scale.max((t / z).norm()));
        let tr = theta(c(q, 0.0) / z, &ctx).unwrap();
        prop_assert!((tr - t).norm() <= 1e-11 * scale.max(tr.norm()));
    }

    #[test]
    fn qbinom_pascal(n in 1u64..25, m in 1i64..24, q in -0.9..0.9f64) {
        prop_assume!((m as u64) < n && q.abs() > 1e-3);
        let q = c(q, 0.0);
        let lhs = qbinom(n, m, q).unwrap();
        let rhs = qbinom(n - 1, m - 1, q).unwrap() + q.powi(m as i32) * qbinom(n - 1, m, q).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-11);
    }

    #[test]
    fn elementary_symmetric_generate_product(xs in prop::collection::vec(-1.5..1.5f64, 1..8), t in -2.0..2.0f64) {
        let v: Vec<C64> = xs.iter().map(|&x| c(x, 0.0)).collect();
        let e = elem_sym_all(&v);
        let lhs: C64 = v.iter().map(|&x| 1.0 + x * t).product();
        let rhs: C64 = e.iter().enumerate().map(|(k, &ek)| ek * t.powi(k as i32)).sum();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        prop_assert_eq!(e.len(), v.len() + 1);
        prop_assert!(rel(e[v.len()], prod(&v)) < 1e-12 || prod(&v).norm() < 1e-300);
    }

    #[test]
    fn qpoch_inf_splits(re in -0.9..0.9f64, im in -0.9..0.9f64, q in 0.05..0.7f64, n in 0usize..12) {
        let a = c(re, im);
        let ctx = QContext::real(q).unwrap();
        let qc = c(q, 0.0);
        let full = qpoch_inf(a, &ctx).value;
        let split = qpoch_n(a, qc, n) * qpoch_inf(a * qc.powi(n as i32), &ctx).value;
        prop_assert!(rel(full, split) < 1e-13);
    }
}
