#![allow(dead_code)]

use qaw::{FamilyParams, QContext, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn reals(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| c(x, 0.0)).collect()
}

pub fn params(n: usize, q: f64, a: &[f64]) -> FamilyParams {
    FamilyParams::new(n, reals(a), QContext::real(q).unwrap()).unwrap()
}

pub fn aw_ref() -> FamilyParams {
    params(2, 0.1, &[0.5, 0.6, 0.7, 0.8])
}

pub fn n3_ref() -> FamilyParams {
    params(3, 0.01, &[0.45, 0.5, 0.55, 0.6, 0.65, 0.7])
}

pub fn n4_ref() -> FamilyParams {
    params(4, 0.1, &[0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75])
}

/// The N = 3 reference point with a_1, a_2 divided by q: two escaped poles,
/// and sum s_j small enough for the tail of F Phi to converge.
pub fn n3_lifted() -> FamilyParams {
    let a = reals(&[45.0, 50.0, 0.55, 0.6, 0.65, 0.7]);
    FamilyParams::new_continued(3, a, QContext::real(0.01).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// z with log-uniform modulus in (lo, hi) and uniform argument.
pub fn random_z(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> C64 {
    let m = r.gen_range(lo.ln()..hi.ln()).exp();
    let th = r.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    C64::from_polar(m, th)
}

pub fn random_reals(r: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64) -> Vec<C64> {
    (0..k).map(|_| c(r.gen_range(lo..hi), 0.0)).collect()
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(a.norm())
}

/// n3-ref with a_6 = 30: the tail diverges but the residue sum converges.
pub fn n3_cont() -> FamilyParams {
    let a = reals(&[0.45, 0.5, 0.55, 0.6, 0.65, 30.0]);
    FamilyParams::new_continued(3, a, QContext::real(0.01).unwrap()).unwrap()
}
