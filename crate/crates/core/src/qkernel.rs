//! Scalar building blocks: q-Pochhammer symbols, theta, q-binomials and
//! elementary symmetric polynomials.

use crate::{fmt_c, QawError, Result, C64};

/// Base q plus every truncation and quadrature knob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QContext {
    pub q: C64,
    pub eps: f64,
    pub max_terms: usize,
    pub quad_max_doublings: u32,
    /// Proximity guard for poles and theta zeros.
    pub guard: f64,
}

impl QContext {
    pub const DEFAULT_EPS: f64 = 1e-14;
    pub const DEFAULT_MAX_TERMS: usize = 1_000_000;
    pub const DEFAULT_DOUBLINGS: u32 = 24;
    pub const DEFAULT_GUARD: f64 = 1e-8;
    /// Default cap on |q|.
    pub const Q_LIMIT: f64 = 0.95;

    pub fn new(q: C64) -> Result<Self> {
        Self::with_limit(q, Self::Q_LIMIT)
    }

    pub fn real(q: f64) -> Result<Self> {
        Self::new(C64::new(q, 0.0))
    }

    /// Like [`QContext::new`] with a custom cap on |q| (must stay below 1).
    pub fn with_limit(q: C64, limit: f64) -> Result<Self> {
        if !(limit > 0.0 && limit < 1.0) {
            return Err(QawError::InvalidInput(format!("q limit {limit} must lie in (0,1)")));
        }
        let r = q.norm();
        if !r.is_finite() || r == 0.0 || r > limit {
            return Err(QawError::InvalidInput(format!(
                "|q| = {r} must satisfy 0 < |q| <= {limit}"
            )));
        }
        Ok(QContext {
            q,
            eps: Self::DEFAULT_EPS,
            max_terms: Self::DEFAULT_MAX_TERMS,
            quad_max_doublings: Self::DEFAULT_DOUBLINGS,
            guard: Self::DEFAULT_GUARD,
        })
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(QawError::InvalidInput(format!("eps = {eps} must lie in (0,1)")));
        }
        self.eps = eps;
        Ok(self)
    }

    pub fn with_max_terms(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(QawError::InvalidInput("max_terms must be positive".into()));
        }
        self.max_terms = n;
        Ok(self)
    }

    pub fn with_doublings(mut self, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(QawError::InvalidInput("quad_max_doublings must be positive".into()));
        }
        self.quad_max_doublings = d;
        Ok(self)
    }

    pub fn with_guard(mut self, g: f64) -> Result<Self> {
        if !(g > 0.0 && g < 1.0) {
            return Err(QawError::InvalidInput(format!("guard = {g} must lie in (0,1)")));
        }
        self.guard = g;
        Ok(self)
    }

    /// q^x with the principal logarithm of q.
    pub fn qpow(&self, x: C64) -> C64 {
        (x * self.q.ln()).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: C64,
    pub terms_used: usize,
    pub tail_bound: f64,
    pub converged: bool,
}

/// (a;q)_n, exact finite product.
pub fn qpoch_n(a: C64, q: C64, n: usize) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    let mut w = a;
    for _ in 0..n {
        p *= 1.0 - w;
        w *= q;
    }
    p
}

/// (a;q)_infinity with a geometric bound on the discarded log-remainder.
pub fn qpoch_inf(a: C64, ctx: &QContext) -> SeriesResult {
    let qn = ctx.q.norm();
    let mut p = C64::new(1.0, 0.0);
    let mut w = a;
    let mut k = 0usize;
    while w.norm() >= ctx.eps * 0.01 {
        if k >= ctx.max_terms {
            break;
        }
        p *= 1.0 - w;
        w *= ctx.q;
        k += 1;
        if p == C64::new(0.0, 0.0) {
            return SeriesResult { value: p, terms_used: k, tail_bound: 0.0, converged: true };
        }
    }
    let r = w.norm();
    let tail_bound = if r < 1.0 {
        let b = r / ((1.0 - qn) * (1.0 - r));
        p.norm() * b.exp_m1()
    } else {
        f64::INFINITY
    };
    SeriesResult {
        value: p,
        terms_used: k,
        tail_bound,
        converged: tail_bound <= ctx.eps * p.norm().max(1.0),
    }
}

/// Unchecked (a;q)_infinity for inner loops. Same truncation rule as [`qpoch_inf`].
pub fn pinf(a: C64, q: C64, eps: f64) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    let mut w = a;
    let cut = eps * 0.01;
    let mut k = 0;
    while w.norm() >= cut && k < 100_000 {
        p *= 1.0 - w;
        w *= q;
        k += 1;
    }
    p
}

/// theta(z;q) = (z;q)_inf (q/z;q)_inf.
pub fn theta(z: C64, ctx: &QContext) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(QawError::InvalidInput("theta at z = 0".into()));
    }
    Ok(theta_raw(z, ctx.q, ctx.eps))
}

pub fn theta_raw(z: C64, q: C64, eps: f64) -> C64 {
    pinf(z, q, eps) * pinf(q / z, q, eps)
}

/// theta with a hard error when z sits within `guard` of a zero q^m.
pub fn theta_guarded(z: C64, q: C64, eps: f64, guard: f64, what: &str) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(QawError::ThetaZero(format!("{what}: argument 0")));
    }
    if let Some(m) = lattice_index(z, q, guard) {
        return Err(QawError::ThetaZero(format!("{what} = {} is q^{m}", fmt_c(z))));
    }
    Ok(theta_raw(z, q, eps))
}

/// Some(m) when x lies within relative distance `delta` of q^m.
pub fn lattice_index(x: C64, q: C64, delta: f64) -> Option<i64> {
    if x.norm() == 0.0 {
        return None;
    }
    let lq = q.norm().ln();
    let m0 = (x.norm().ln() / lq).round() as i64;
    for m in m0 - 1..=m0 + 1 {
        let qm = q.powi(m as i32);
        if (1.0 - x / qm).norm() < delta {
            return Some(m);
        }
    }
    None
}

/// Some(k) when 1 - w q^k is within `delta` of zero for some k >= 0,
/// i.e. (w;q)_inf is near a zero.
pub fn pole_index(w: C64, q: C64, delta: f64) -> Option<u64> {
    match lattice_index(w, q, delta) {
        Some(m) if m <= 0 => Some((-m) as u64),
        _ => None,
    }
}

/// Complex mantissa with a separate binary exponent, for products that
/// overflow f64 before their final cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub m: C64,
    pub e: i32,
}

impl Scaled {
    pub fn one() -> Self {
        Scaled { m: C64::new(1.0, 0.0), e: 0 }
    }

    pub fn from_c(z: C64) -> Self {
        let mut s = Scaled { m: z, e: 0 };
        s.norm();
        s
    }

    fn norm(&mut self) {
        let r = self.m.norm();
        if r == 0.0 || !r.is_finite() {
            return;
        }
        if !(1e-100..=1e100).contains(&r) {
            let k = r.log2().floor() as i32;
            self.m *= 2f64.powi(-k);
            self.e += k;
        }
    }

    pub fn mul(&mut self, z: C64) {
        self.m *= z;
        self.norm();
    }

    pub fn mul_s(&mut self, o: Scaled) {
        self.m *= o.m;
        self.e += o.e;
        self.norm();
    }

    pub fn div_s(&mut self, o: Scaled) {
        self.m /= o.m;
        self.e -= o.e;
        self.norm();
    }

    pub fn value(self) -> C64 {
        if self.e > 1000 || self.e < -1000 {
            let h = self.e / 2;
            return self.m * 2f64.powi(h) * 2f64.powi(self.e - h);
        }
        self.m * 2f64.powi(self.e)
    }

    pub fn is_zero(self) -> bool {
        self.m.norm() == 0.0
    }
}

/// (a;q)_infinity as a [`Scaled`] value; safe for very large |a|.
pub fn pinf_scaled(a: C64, q: C64, eps: f64) -> Scaled {
    let mut p = Scaled::one();
    let mut w = a;
    let cut = eps * 0.01;
    let mut k = 0;
    while w.norm() >= cut && k < 100_000 {
        p.mul(1.0 - w);
        w *= q;
        k += 1;
    }
    p
}

/// Gaussian binomial [n, m]_q as a product of n-m+k over k ratios.
pub fn qbinom(n: u64, m: i64, q: C64) -> Result<C64> {
    if m < 0 || m as u64 > n {
        return Err(QawError::InvalidInput(format!("q-binomial [{n}, {m}] out of range")));
    }
    let m = m as u64;
    let m = m.min(n - m);
    let mut r = C64::new(1.0, 0.0);
    for k in 1..=m {
        r *= (1.0 - q.powu((n - m + k) as u32)) / (1.0 - q.powu(k as u32));
    }
    Ok(r)
}

/// All elementary symmetric polynomials sigma_0..sigma_n in one pass.
pub fn elem_sym_all(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut e = vec![C64::new(0.0, 0.0); n + 1];
    e[0] = C64::new(1.0, 0.0);
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            let prev = e[j - 1];
            e[j] += prev * x;
        }
    }
    e
}

pub fn elem_sym(values: &[C64], k: usize) -> Result<C64> {
    if k > values.len() {
        return Err(QawError::InvalidInput(format!(
            "sigma_{k} of {} values",
            values.len()
        )));
    }
    Ok(elem_sym_all(values)[k])
}

/// sigma_k with the convention 0 outside 0..=n.
pub(crate) fn sig(e: &[C64], k: i64) -> C64 {
    if k < 0 || k as usize >= e.len() {
        C64::new(0.0, 0.0)
    } else {
        e[k as usize]
    }
}

pub fn prod(values: &[C64]) -> C64 {
    values.iter().fold(C64::new(1.0, 0.0), |p, &x| p * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_round_trip() {
        let mut s = Scaled::one();
        for _ in 0..40 {
            s.mul(C64::new(1e20, 0.0));
        }
        for _ in 0..40 {
            s.mul(C64::new(1e-20, 0.0));
        }
        assert!((s.value() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn lattice_detects_powers() {
        let q = C64::new(0.3, 0.0);
        assert_eq!(lattice_index(q.powi(3), q, 1e-8), Some(3));
        assert_eq!(lattice_index(q.powi(-2), q, 1e-8), Some(-2));
        assert_eq!(lattice_index(C64::new(0.5, 0.0), q, 1e-8), None);
    }
}
