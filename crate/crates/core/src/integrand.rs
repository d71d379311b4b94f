//! The integrand Phi, the weight on the circle, the basis functions
//! phi~_n(z;a), the Laurent function F and the spectral data W +- dy V.

use crate::qkernel::{elem_sym_all, pinf, pole_index, qpoch_n, sig, QContext};
use crate::{c, fmt_c, QawError, Result, C64};

/// N together with the 2N parameters a_1..a_{2N}.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    n: usize,
    a: Vec<C64>,
    continued: bool,
    pub ctx: QContext,
}

impl FamilyParams {
    /// Parameters inside the unit disc, where the circle separates the
    /// two pole sequences.
    pub fn new(n: usize, a: Vec<C64>, ctx: QContext) -> Result<Self> {
        let p = Self::build(n, a, ctx, false)?;
        if let Some((j, x)) = p.a.iter().enumerate().find(|(_, x)| x.norm() >= 1.0) {
            return Err(QawError::InvalidInput(format!(
                "|a_{}| = {} is not below 1 (use the continued constructor)",
                j + 1,
                x.norm()
            )));
        }
        Ok(p)
    }

    /// Any nonzero parameters. Contour evaluations add the residues of the
    /// poles a_k q^nu that have left the unit disc.
    pub fn new_continued(n: usize, a: Vec<C64>, ctx: QContext) -> Result<Self> {
        Self::build(n, a, ctx, true)
    }

    fn build(n: usize, a: Vec<C64>, ctx: QContext, continued: bool) -> Result<Self> {
        if n < 2 {
            return Err(QawError::InvalidInput(format!("N = {n} must be at least 2")));
        }
        if a.len() != 2 * n {
            return Err(QawError::InvalidInput(format!(
                "N = {n} needs {} parameters, got {}",
                2 * n,
                a.len()
            )));
        }
        for (j, x) in a.iter().enumerate() {
            if !(x.re.is_finite() && x.im.is_finite()) || x.norm() == 0.0 {
                return Err(QawError::InvalidInput(format!("a_{} = {} must be finite and nonzero", j + 1, fmt_c(*x))));
            }
        }
        Ok(FamilyParams { n, a, continued, ctx })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn q(&self) -> C64 {
        self.ctx.q
    }

    pub fn is_continued(&self) -> bool {
        self.continued
    }

    /// True when some a_j lies outside the unit disc.
    pub fn needs_continuation(&self) -> bool {
        self.a.iter().any(|x| x.norm() >= 1.0)
    }

    /// s_j = log a_j / log q, principal logarithms.
    pub fn s(&self, j: usize) -> C64 {
        self.a[j].ln() / self.ctx.q.ln()
    }

    pub fn sum_re_s(&self) -> f64 {
        (0..self.a.len()).map(|j| self.s(j).re).sum()
    }

    pub fn prod_a(&self) -> C64 {
        self.a.iter().product()
    }

    /// sigma_0..sigma_{2N} of the parameters.
    pub fn sigmas(&self) -> Vec<C64> {
        elem_sym_all(&self.a)
    }

    /// p = q^{N/2}, principal branch.
    pub fn p_half(&self) -> C64 {
        self.ctx.qpow(c(self.n as f64 / 2.0, 0.0))
    }

    /// Same family with a_j replaced by q^{shift_j} a_j. Keeps the
    /// validity mode of `self`.
    pub fn shifted(&self, shifts: &[i64]) -> Result<Self> {
        if shifts.len() != self.a.len() {
            return Err(QawError::InvalidInput(format!(
                "{} shifts for {} parameters",
                shifts.len(),
                self.a.len()
            )));
        }
        let a = self
            .a
            .iter()
            .zip(shifts)
            .map(|(&x, &k)| x * self.ctx.q.powi(k as i32))
            .collect();
        self.with_params(a)
    }

    /// Same N, context and validity mode with new parameters.
    pub fn with_params(&self, a: Vec<C64>) -> Result<Self> {
        if self.continued {
            Self::new_continued(self.n, a, self.ctx)
        } else {
            Self::new(self.n, a, self.ctx)
        }
    }

    /// Errors naming the first pair (i, j) with a_i within guard of a_j.
    pub fn require_distinct(&self) -> Result<()> {
        for i in 0..self.a.len() {
            for j in i + 1..self.a.len() {
                if (self.a[i] - self.a[j]).norm() <= self.ctx.guard * self.a[i].norm() {
                    return Err(QawError::Degenerate(format!("a_{} and a_{} coincide", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }

    fn check_poles(&self, z: C64) -> Result<()> {
        let q = self.ctx.q;
        for (j, &x) in self.a.iter().enumerate() {
            for (w, side) in [(x * z, "a z"), (x / z, "a / z")] {
                if let Some(k) = pole_index(w, q, self.ctx.guard) {
                    return Err(QawError::PoleProximity(format!(
                        "{side} = q^-{k} for a_{} at z = {}",
                        j + 1,
                        fmt_c(z)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// R(z) = (p z^N, p z^-N; p)_inf / prod_j (a_j z, a_j/z; q)_inf. With
/// `skip = Some((k, nu))` the factor 1 - a_k q^nu / z is left out.
pub(crate) fn ratio_part(z: C64, p: &FamilyParams, skip: Option<(usize, usize)>) -> C64 {
    let q = p.ctx.q;
    let eps = p.ctx.eps;
    let ph = p.p_half();
    let zn = z.powi(p.n as i32);
    let mut num = pinf(ph * zn, ph, eps) * pinf(ph / zn, ph, eps);
    for (j, &x) in p.a.iter().enumerate() {
        num /= pinf(x * z, q, eps);
        match skip {
            Some((k, nu)) if k == j => {
                num /= qpoch_n(x / z, q, nu) * pinf(x * q.powi(nu as i32 + 1) / z, q, eps);
            }
            _ => num /= pinf(x / z, q, eps),
        }
    }
    num
}

fn on_circle(z: C64) -> bool {
    (z.norm() - 1.0).abs() < 1e-14
}

/// Phi(z) in the cancelled form -(z - 1/z)(z^{N/2} - z^{-N/2}) R(z), with the
/// prefactor 4 sin(theta) sin(N theta / 2) on |z| = 1.
pub fn big_phi(z: C64, p: &FamilyParams) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(QawError::InvalidInput("Phi at z = 0".into()));
    }
    p.check_poles(z)?;
    Ok(prefactor(z, p.n) * ratio_part(z, p, None))
}

/// Phi with the factor (1 - a_k q^nu / z) removed; at z = a_k q^nu this is
/// the residue of Phi(z)/z there.
pub fn phi_without_factor(z: C64, p: &FamilyParams, k: usize, nu: usize) -> C64 {
    prefactor(z, p.n) * ratio_part(z, p, Some((k, nu)))
}

pub(crate) fn prefactor(z: C64, n: usize) -> C64 {
    if on_circle(z) {
        let th = z.arg();
        return c(4.0 * th.sin() * (n as f64 * th / 2.0).sin(), 0.0);
    }
    let zh = half_power(z, n);
    -(z - 1.0 / z) * (zh - 1.0 / zh)
}

/// z^{N/2}, principal branch; integer power for even N.
pub fn half_power(z: C64, n: usize) -> C64 {
    if n.is_multiple_of(2) {
        z.powi((n / 2) as i32)
    } else {
        (z.ln() * (n as f64 / 2.0)).exp()
    }
}

/// Phi(e^{i theta}), branch-free.
pub fn phi_on_circle(theta: f64, p: &FamilyParams) -> Result<C64> {
    let z = C64::from_polar(1.0, theta);
    p.check_poles(z)?;
    let pre = 4.0 * theta.sin() * (p.n as f64 * theta / 2.0).sin();
    Ok(ratio_part(z, p, None) * pre)
}

/// The weight on the circle, Phi(e^{i theta}) / sin(theta); odd in theta.
pub fn weight_w(theta: f64, p: &FamilyParams) -> Result<C64> {
    let s = (p.n as f64 * theta / 2.0).sin();
    if s.abs() < p.ctx.guard {
        return Err(QawError::Degenerate(format!("sin(N theta/2) vanishes at theta = {theta}")));
    }
    let z = C64::from_polar(1.0, theta);
    p.check_poles(z)?;
    Ok(ratio_part(z, p, None) * (4.0 * s))
}

/// Analytic weight 2i Phi(z)/(z - 1/z), equal to weight_w on the circle.
pub fn weight_z(z: C64, p: &FamilyParams) -> Result<C64> {
    if (z * z - 1.0).norm() < p.ctx.guard {
        return Err(QawError::Degenerate("weight at z = +-1".into()));
    }
    let zh = half_power(z, p.n);
    p.check_poles(z)?;
    Ok(c(0.0, -2.0) * (zh - 1.0 / zh) * ratio_part(z, p, None))
}

/// Order of phi_r: a nonnegative integer or a complex continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Int(usize),
    Complex(C64),
}

/// phi~_n(z;a) = (a z, a/z; q)_n by finite products.
pub fn phi_tilde(z: C64, a: C64, n: usize, q: C64) -> C64 {
    qpoch_n(a * z, q, n) * qpoch_n(a / z, q, n)
}

/// phi_r(x;a) in the z-representation. Non-integer orders use the ratio
/// (a z^{+-1}; q)_inf / (a q^r z^{+-1}; q)_inf.
pub fn basis_phi(z: C64, a: C64, r: Order, ctx: &QContext) -> Result<C64> {
    if z.norm() == 0.0 {
        return Err(QawError::InvalidInput("basis function at z = 0".into()));
    }
    match r {
        Order::Int(n) => Ok(phi_tilde(z, a, n, ctx.q)),
        Order::Complex(r) => {
            let b = a * ctx.qpow(r);
            for w in [b * z, b / z] {
                if let Some(k) = pole_index(w, ctx.q, ctx.guard) {
                    return Err(QawError::PoleProximity(format!(
                        "continued basis denominator {} is q^-{k}",
                        fmt_c(w)
                    )));
                }
            }
            let num = pinf(a * z, ctx.q, ctx.eps) * pinf(a / z, ctx.q, ctx.eps);
            let den = pinf(b * z, ctx.q, ctx.eps) * pinf(b / z, ctx.q, ctx.eps);
            Ok(num / den)
        }
    }
}

/// Finite Laurent polynomial sum_k c[k] z^{lo + k}.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub lo: i32,
    pub c: Vec<C64>,
}

impl Laurent {
    pub fn one() -> Self {
        Laurent { lo: 0, c: vec![c(1.0, 0.0)] }
    }

    pub fn monomial(k: i32) -> Self {
        Laurent { lo: k, c: vec![c(1.0, 0.0)] }
    }

    pub fn mul(&self, o: &Laurent) -> Laurent {
        let mut out = vec![c(0.0, 0.0); self.c.len() + o.c.len() - 1];
        for (i, &x) in self.c.iter().enumerate() {
            for (j, &y) in o.c.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Laurent { lo: self.lo + o.lo, c: out }
    }

    pub fn scale(&self, s: C64) -> Laurent {
        Laurent { lo: self.lo, c: self.c.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, o: &Laurent) -> Laurent {
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        let mut out = vec![c(0.0, 0.0); (hi - lo + 1) as usize];
        for (i, &x) in self.c.iter().enumerate() {
            out[(self.lo - lo) as usize + i] += x;
        }
        for (i, &x) in o.c.iter().enumerate() {
            out[(o.lo - lo) as usize + i] += x;
        }
        Laurent { lo, c: out }
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.c.len() as i32 - 1
    }

    /// Highest power with a nonzero coefficient.
    pub fn growth(&self) -> i32 {
        for (i, x) in self.c.iter().enumerate().rev() {
            if x.norm() != 0.0 {
                return self.lo + i as i32;
            }
        }
        i32::MIN
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut s = c(0.0, 0.0);
        for x in self.c.iter().rev() {
            s = s * z + x;
        }
        s * z.powi(self.lo)
    }
}

/// phi~_n(z;a) expanded as a Laurent polynomial.
pub fn phi_tilde_laurent(a: C64, n: usize, q: C64) -> Laurent {
    let mut out = Laurent::one();
    let mut w = a;
    for _ in 0..n {
        // (1 - w z)(1 - w/z) = -w z^-1 + (1 + w^2) - w z
        out = out.mul(&Laurent { lo: -1, c: vec![-w, 1.0 + w * w, -w] });
        w *= q;
    }
    out
}

/// (F_-, F_+, F) with F_- = z^N prod(1 - a_j/z)/(z - 1/z) and
/// F_+ = z^-N prod(1 - a_j z)/(1/z - z).
pub fn f_parts(z: C64, p: &FamilyParams) -> Result<(C64, C64, C64)> {
    if z.norm() == 0.0 {
        return Err(QawError::InvalidInput("F at z = 0".into()));
    }
    if (z * z - 1.0).norm() < p.ctx.guard {
        return Err(QawError::Degenerate("F parts at z^2 = 1".into()));
    }
    let n = p.n as i32;
    let mut fm = z.powi(n);
    let mut fp = z.powi(-n);
    for &x in &p.a {
        fm *= 1.0 - x / z;
        fp *= 1.0 - x * z;
    }
    let fm = fm / (z - 1.0 / z);
    let fp = fp / (1.0 / z - z);
    Ok((fm, fp, fm + fp))
}

/// F from the symmetric functions: z/(1 - z^2) sum_m (-1)^m (sigma_m - sigma_{2N-m}) z^{m-N}.
pub fn f_symmetric(z: C64, p: &FamilyParams) -> Result<C64> {
    if (z * z - 1.0).norm() < p.ctx.guard {
        return Err(QawError::Degenerate("F at z^2 = 1".into()));
    }
    let e = p.sigmas();
    let n = p.n as i64;
    let mut s = c(0.0, 0.0);
    for m in 0..=2 * n {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        s += (sig(&e, m) - sig(&e, 2 * n - m)) * sign * z.powi((m - n) as i32);
    }
    Ok(s * z / (1.0 - z * z))
}

/// F as the Laurent polynomial sum_{k=0}^{2N-2} Q_k z^{k+1-N}, obtained by
/// dividing sum_m e_m z^m by 1 - z^2.
pub fn f_laurent(p: &FamilyParams) -> Laurent {
    let e = p.sigmas();
    let n = p.n as i64;
    let pm: Vec<C64> = (0..=2 * n)
        .map(|m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            (sig(&e, m) - sig(&e, 2 * n - m)) * sign
        })
        .collect();
    let len = (2 * n - 1) as usize;
    let mut qk = vec![c(0.0, 0.0); len];
    for k in 0..len {
        qk[k] = pm[k] + if k >= 2 { qk[k - 2] } else { c(0.0, 0.0) };
    }
    Laurent { lo: 1 - p.n as i32, c: qk }
}

/// Values of W + dy V and W - dy V at z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPair {
    pub w_plus: C64,
    pub w_minus: C64,
}

impl SpectralPair {
    pub fn w_value(&self) -> C64 {
        (self.w_plus + self.w_minus) / 2.0
    }

    /// V at z, using dy = (q^{1/2} - q^{-1/2})(z - 1/z)/2.
    pub fn v_value(&self, z: C64, q: C64) -> C64 {
        let dy = delta_y(z, q);
        (self.w_plus - self.w_minus) / (2.0 * dy)
    }
}

pub fn delta_y(z: C64, q: C64) -> C64 {
    let h = q.sqrt();
    0.5 * (h - 1.0 / h) * (z - 1.0 / z)
}

/// z^{-+N} prod_j (1 - a_j q^{-1/2} z^{+-1}).
pub fn spectral_wv(z: C64, p: &FamilyParams) -> Result<SpectralPair> {
    if z.norm() == 0.0 {
        return Err(QawError::InvalidInput("spectral data at z = 0".into()));
    }
    let n = p.n as i32;
    let h = p.ctx.q.sqrt();
    let mut wp = z.powi(-n);
    let mut wm = z.powi(n);
    for &x in &p.a {
        wp *= 1.0 - x / h * z;
        wm *= 1.0 - x / h / z;
    }
    Ok(SpectralPair { w_plus: wp, w_minus: wm })
}

pub fn chebyshev_t(n: usize, x: C64) -> C64 {
    let (mut t0, mut t1) = (c(1.0, 0.0), x);
    if n == 0 {
        return t0;
    }
    for _ in 1..n {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

pub fn chebyshev_u(n: usize, x: C64) -> C64 {
    let (mut u0, mut u1) = (c(1.0, 0.0), 2.0 * x);
    if n == 0 {
        return u0;
    }
    for _ in 1..n {
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    u1
}

fn tilde_sigmas(p: &FamilyParams) -> Vec<C64> {
    let h = p.ctx.q.sqrt();
    let b: Vec<C64> = p.a.iter().map(|&x| x / h).collect();
    elem_sym_all(&b)
}

/// W(x) from its Chebyshev-T expansion in the symmetric functions of q^{-1/2} a.
pub fn w_chebyshev(x: C64, p: &FamilyParams) -> C64 {
    let e = tilde_sigmas(p);
    let n = p.n;
    let mut s = e[n] * if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    for l in 0..n {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        s += (e[l] + e[2 * n - l]) * sign * chebyshev_t(n - l, x);
    }
    s
}

/// V(x) from its Chebyshev-U expansion.
pub fn v_chebyshev(x: C64, p: &FamilyParams) -> C64 {
    let e = tilde_sigmas(p);
    let n = p.n;
    let h = p.ctx.q.sqrt();
    let mut s = c(0.0, 0.0);
    for l in 0..n {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        s += (e[l] - e[2 * n - l]) * sign * chebyshev_u(n - l - 1, x);
    }
    -s / (h - 1.0 / h)
}

/// x = (z + 1/z)/2.
pub fn x_of(z: C64) -> C64 {
    (z + 1.0 / z) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdKind {
    D,
    M,
}

/// Askey-Wilson divided difference D or average M of f at z, where f is
/// given as a function of z.
pub fn dd_apply(kind: DdKind, f: &dyn Fn(C64) -> Result<C64>, z: C64, ctx: &QContext) -> Result<C64> {
    let h = ctx.q.sqrt();
    let up = f(h * z)?;
    let dn = f(z / h)?;
    match kind {
        DdKind::M => Ok((up + dn) / 2.0),
        DdKind::D => {
            let dy = delta_y(z, ctx.q);
            if dy.norm() < ctx.guard {
                return Err(QawError::Degenerate("divided difference at z = +-1".into()));
            }
            Ok((up - dn) / dy)
        }
    }
}
