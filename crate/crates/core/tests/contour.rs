mod common;

use common::{c, n3_lifted, n3_ref, n4_ref, params, reals, rel};
use proptest::prelude::*;
use qaw::contour::*;
use qaw::integrand::Laurent;
use qaw::qkernel::pinf;
use qaw::{FamilyParams, Method, QContext, QawError, C64};

/// 2 (abcd; q)_inf / ((q; q)_inf prod_{i<j} (a_i a_j; q)_inf), from products only.
fn aw_oracle(a: &[f64], q: f64) -> f64 {
    let pi = |x: f64| pinf(c(x, 0.0), c(q, 0.0), 1e-17).re;
    let mut den = pi(q);
    for i in 0..4 {
        for j in i + 1..4 {
            den *= pi(a[i] * a[j]);
        }
    }
    2.0 * pi(a.iter().product()) / den
}

#[test]
fn askey_wilson_reference_value() {
    let a = [0.5, 0.6, 0.7, 0.8];
    let p = params(2, 0.1, &a);
    let want = aw_oracle(&a, 0.1);
    for m in [Method::Circle, Method::ClosedForm, Method::ResidueFull, Method::ResidueReduced] {
        let v = eval_in(&p, m).unwrap();
        assert!(rel(v.value, c(want, 0.0)) < 1e-11, "{m}: {}", v.value);
        assert_eq!(v.method, m);
    }
}

#[test]
fn odd_n_circle_plus_tail_matches_reference() {
    // independent high-precision value of I_3 at the reference point
    let want = c(448.95061271, 0.0);
    let p = n3_ref();
    let full = eval_in(&p, Method::CirclePlusTail).unwrap();
    assert!(rel(full.value, want) < 1e-10);
    assert!(!full.tail_omitted);
    let circle = eval_in(&p, Method::Circle).unwrap();
    assert!(circle.tail_omitted);
    let tail = integrate_tail(&p).unwrap().value;
    assert!((tail.re + 0.0066653195503).abs() < 1e-11);
    assert!((circle.value + tail - full.value).norm() < 1e-9);
}

#[test]
fn residue_sums_agree_with_quadrature() {
    for p in [n3_ref(), n4_ref()] {
        let quad = eval_in(&p, Method::default_for(p.n())).unwrap().value;
        for m in [Method::ResidueFull, Method::ResidueReduced] {
            assert!(rel(eval_in(&p, m).unwrap().value, quad) < 1e-10, "N = {} {m}", p.n());
        }
    }
}

#[test]
fn closed_form_is_n2_only() {
    assert!(eval_in(&n3_ref(), Method::ClosedForm).is_err());
}

#[test]
fn method_names_round_trip() {
    for m in Method::ALL {
        assert_eq!(m.name().parse::<Method>().unwrap(), m);
    }
    assert!("nope".parse::<Method>().is_err());
    assert_eq!(Method::default_for(2), Method::Circle);
    assert_eq!(Method::default_for(3), Method::CirclePlusTail);
}

#[test]
fn escaped_poles_of_lifted_point() {
    let p = n3_lifted();
    let mut e = escaped_poles(&p).unwrap();
    e.sort();
    assert_eq!(e, vec![(0, 0), (1, 0)]);
}

#[test]
fn pole_on_circle_is_rejected() {
    let ctx = QContext::real(0.1).unwrap();
    let p = FamilyParams::new_continued(2, reals(&[10.0, 0.6, 0.7, 0.8]), ctx).unwrap();
    assert!(matches!(eval_in(&p, Method::Circle), Err(QawError::PoleProximity(_))));
}

#[test]
fn continuation_is_analytic_across_the_circle() {
    // I_2 continued past |a_1| = 1 must equal the closed form there
    let ctx = QContext::real(0.1).unwrap();
    let a = [3.0, 0.2, 0.25, 0.3];
    let p = FamilyParams::new_continued(2, reals(&a), ctx).unwrap();
    let v = eval_in(&p, Method::Circle).unwrap().value;
    assert!(rel(v, c(aw_oracle(&a, 0.1), 0.0)) < 1e-10);
}

#[test]
fn root_identity_at_lifted_point() {
    let r = root_identity(&n3_lifted()).unwrap();
    assert!(r.full.residual_rel < ROOT_IDENTITY_TOL);
    // at the unlifted point the tail of F Phi does not converge
    assert!(matches!(root_identity(&n3_ref()), Err(QawError::Divergence(_))));
}

#[test]
fn moments_of_monomials_are_symmetric() {
    for p in [common::aw_ref(), n4_ref()] {
        let a = moment_monomial(&p, 1).unwrap().value;
        let b = moment_monomial(&p, -1).unwrap().value;
        assert!(rel(a, b) < 1e-10, "N = {}", p.n());
        assert!(moment_monomial(&p, 2).is_err());
    }
    // odd N: only the circle parts match; the cut tail weighs z and 1/z differently
    let p = n3_ref();
    let up = circle_with(&p, &Laurent::monomial(1)).unwrap().value;
    let dn = circle_with(&p, &Laurent::monomial(-1)).unwrap().value;
    assert!(rel(up, dn) < 1e-12);
    let tu = tail_with(&p, &Laurent::monomial(1), 1.0).unwrap().value;
    let td = tail_with(&p, &Laurent::monomial(-1), 1.0).unwrap().value;
    assert!(rel(tu, td) > 0.1);
}

#[test]
fn shifted_moment_matches_shifted_integral() {
    // M with shifts (1, 0, ..) weights by (a_1 z, a_1/z; q)_1, which is I at q a_1
    let p = n4_ref();
    let mut shifts = vec![0u32; 8];
    shifts[0] = 1;
    let m = moment(&p, &shifts).unwrap().value;
    let mut sh = vec![0i64; 8];
    sh[0] = 1;
    let i = eval_in(&p.shifted(&sh).unwrap(), Method::Circle).unwrap().value;
    assert!(rel(m, i) < 1e-11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn askey_wilson_random(a in prop::collection::vec(-0.8..0.8f64, 4), q in 0.05..0.5f64) {
        prop_assume!(a.iter().all(|x| x.abs() > 0.05));
        let p = params(2, q, &a);
        let v = eval_in(&p, Method::Circle).unwrap();
        prop_assert!(rel(v.value, c(aw_oracle(&a, q), 0.0)) < 1e-10);
        prop_assert!(v.est_error < 1e-9 * v.value.norm());
    }

    #[test]
    fn integral_symmetric_in_parameters(perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let base = [0.45, 0.5, 0.55, 0.6, 0.65, 0.7];
        let a: Vec<f64> = perm.iter().map(|&i| base[i]).collect();
        let v = eval_in(&params(3, 0.01, &a), Method::CirclePlusTail).unwrap().value;
        prop_assert!(rel(v, c(448.95061271, 0.0)) < 1e-10);
    }

    #[test]
    fn conjugate_parameters_conjugate_value(re in prop::collection::vec(-0.6..0.6f64, 4), im in prop::collection::vec(-0.3..0.3f64, 4)) {
        let ctx = QContext::real(0.2).unwrap();
        let a: Vec<C64> = re.iter().zip(&im).map(|(&x, &y)| c(x, y)).collect();
        let ac: Vec<C64> = a.iter().map(|x| x.conj()).collect();
        let v = eval_in(&FamilyParams::new(2, a, ctx).unwrap(), Method::Circle).unwrap().value;
        let w = eval_in(&FamilyParams::new(2, ac, ctx).unwrap(), Method::Circle).unwrap().value;
        prop_assert!((v - w.conj()).norm() < 1e-11 * v.norm());
    }
}
