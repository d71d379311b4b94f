//! Expansion and recurrence coefficients, and residual checkers for the
//! q-difference equations satisfied by I_N and its moments.

use crate::contour::{contour_functional, eval_in, Method};
use crate::hyperseries::vwp_w_series;
use crate::integrand::{f_parts, phi_tilde, phi_tilde_laurent, spectral_wv, weight_z, x_of, FamilyParams, Laurent};
use crate::qkernel::{elem_sym_all, lattice_index, pinf, pole_index, qbinom, qpoch_n, sig, QContext};
use crate::{c, fmt_c, QawError, Result, C64};

/// N, q, the parameters and any extra named values of a checked point.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSnapshot {
    pub n: usize,
    pub q: C64,
    pub a: Vec<C64>,
    pub extra: Vec<(String, C64)>,
}

impl ParamSnapshot {
    pub fn of(p: &FamilyParams) -> Self {
        ParamSnapshot { n: p.n(), q: p.q(), a: p.a().to_vec(), extra: Vec::new() }
    }

    pub fn values(n: usize, q: C64, a: &[C64]) -> Self {
        ParamSnapshot { n, q, a: a.to_vec(), extra: Vec::new() }
    }

    pub fn with(mut self, name: &str, v: C64) -> Self {
        self.extra.push((name.into(), v));
        self
    }

    pub fn describe(&self) -> String {
        let a: Vec<String> = self.a.iter().map(|&x| fmt_c(x)).collect();
        let mut s = format!("N={} q={} a=[{}]", self.n, fmt_c(self.q), a.join(","));
        for (k, v) in &self.extra {
            s.push_str(&format!(" {k}={}", fmt_c(*v)));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub identity: String,
    pub params: ParamSnapshot,
    pub residual_abs: f64,
    pub scale: f64,
    pub residual_rel: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    /// |sum of terms| normalised by the largest |term|.
    pub fn from_terms(identity: &str, params: ParamSnapshot, terms: &[C64], tolerance: f64) -> Self {
        let total: C64 = terms.iter().sum();
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        Self::from_abs(identity, params, total.norm(), scale, tolerance)
    }

    pub fn from_abs(identity: &str, params: ParamSnapshot, residual_abs: f64, scale: f64, tolerance: f64) -> Self {
        let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
        let rel = residual_abs / scale;
        ResidualReport {
            identity: identity.into(),
            params,
            residual_abs,
            scale,
            residual_rel: rel,
            tolerance,
            pass: rel.is_finite() && rel <= tolerance,
        }
    }
}

fn sgn(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn binom2(n: i64) -> i64 {
    n * (n - 1) / 2
}

fn check_base(p: &FamilyParams, a: C64) -> Result<()> {
    if a.norm() == 0.0 {
        return Err(QawError::InvalidInput("expansion point a = 0".into()));
    }
    if let Some(m) = lattice_index(a * a, p.q(), p.ctx.guard) {
        return Err(QawError::PoleProximity(format!("a^2 = q^{m} for a = {}", fmt_c(a))));
    }
    Ok(())
}

/// f_{N,k}(a), 0 <= k <= N, as the displayed double sum.
pub fn coeff_f(p: &FamilyParams, a: C64, k: usize) -> Result<C64> {
    let n = p.n() as i64;
    if k as i64 > n {
        return Err(QawError::InvalidInput(format!("f_(N,k) needs k <= N, got {k}")));
    }
    check_base(p, a)?;
    let q = p.q();
    let e = p.sigmas();
    let k = k as i64;
    let mut tot = c(0.0, 0.0);
    for m in 0..=2 * n {
        let mut inner = c(0.0, 0.0);
        for l in 0..=k {
            let d = k - l;
            let num = qbinom(k as u64, l, q)?
                * a.powi((2 * (l - k) + n - m) as i32)
                * q.powi((-d * d + d * (n - m)) as i32);
            let den = qpoch_n(q.powi((1 + 2 * d) as i32) * a * a, q, l as usize)
                * qpoch_n(q.powi((1 - 2 * d) as i32) / (a * a), q, d as usize);
            inner += num / den;
        }
        tot += (sig(&e, m) + sig(&e, 2 * n - m)) * sgn(m) * inner;
    }
    let pre = p.ctx.qpow(c(k as f64 - n as f64 / 2.0, 0.0)) / qpoch_n(q, q, k as usize) / 2.0;
    Ok(pre * tot)
}

/// g_{N,k}(a), 0 <= k <= N - 1, as the displayed double sum.
pub fn coeff_g(p: &FamilyParams, a: C64, k: usize) -> Result<C64> {
    let n = p.n() as i64;
    if k as i64 >= n {
        return Err(QawError::InvalidInput(format!("g_(N,k) needs k < N, got {k}")));
    }
    check_base(p, a)?;
    let q = p.q();
    let e = p.sigmas();
    let k = k as i64;
    let mut tot = c(0.0, 0.0);
    for m in 0..=2 * n {
        let mut inner = c(0.0, 0.0);
        for l in 0..=k {
            let d = k - l;
            let num = qbinom(k as u64, l, q)?
                * a.powi((1 + 2 * (l - k)) as i32)
                * q.powi((-d * d + d * (m + 1 - n)) as i32);
            let den = qpoch_n(q.powi((2 * d) as i32) * a * a, q, (l + 1) as usize)
                * qpoch_n(q.powi((1 - 2 * d) as i32) / (a * a), q, d as usize);
            inner += num / den;
        }
        tot += (sig(&e, m) - sig(&e, 2 * n - m)) * sgn(m) * a.powi((m - n) as i32) * inner;
    }
    let pre = -p.ctx.qpow(c(k as f64 - n as f64 / 2.0, 0.0)) / qpoch_n(q, q, k as usize);
    Ok(pre * tot)
}

/// g_i(a) of the (N-1)-th order equation, as the displayed closed double sum.
pub fn coeff_g_new(p: &FamilyParams, a: C64, i: usize) -> Result<C64> {
    let n = p.n() as i64;
    if i as i64 >= n {
        return Err(QawError::InvalidInput(format!("g_i needs i < N, got {i}")));
    }
    check_base(p, a)?;
    let q = p.q();
    let e = p.sigmas();
    let i = i as i64;
    let mut tot = c(0.0, 0.0);
    for j in 0..=i {
        let qja = q.powi(j as i32) * a;
        let den = qpoch_n(q, q, (i - j) as usize)
            * qpoch_n(q, q, j as usize)
            * qpoch_n(q.powi((2 * j) as i32) * a * a, q, (i - j + 1) as usize)
            * qpoch_n(q.powi(j as i32) * a * a, q, j as usize);
        for m in 0..=2 * n {
            tot += (sig(&e, m) - sig(&e, 2 * n - m)) * sgn(j + m) * qja.powi((m - n) as i32)
                * q.powi(binom2(j + 1) as i32)
                / den;
        }
    }
    Ok(a * q.powi(i as i32) * tot)
}

/// The closed top coefficient (-a)^{1-N} q^{-binom(N-1,2)} (1 - sigma_{2N}).
pub fn coeff_g_top(p: &FamilyParams, a: C64) -> C64 {
    let n = p.n() as i64;
    let e = p.sigmas();
    (-a).powi((1 - n) as i32) * p.q().powi(-binom2(n - 1) as i32) * (1.0 - e[2 * p.n()])
}

/// Lower-triangular inverse (c_ij) of (phi~_j(q^i a; a)), N x N.
pub fn cij_matrix(p: &FamilyParams, a: C64) -> Result<Vec<Vec<C64>>> {
    check_base(p, a)?;
    let n = p.n();
    let q = p.q();
    let mut m = vec![vec![c(0.0, 0.0); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate().take(i + 1) {
            let (ii, jj) = (i as i64, j as i64);
            let den = qpoch_n(q, q, i - j)
                * qpoch_n(q, q, j)
                * qpoch_n(q.powi((2 * jj + 1) as i32) * a * a, q, i - j)
                * qpoch_n(q.powi(jj as i32) * a * a, q, j);
            *x = q.powi((ii + binom2(jj)) as i32) * sgn(jj) / den;
        }
    }
    Ok(m)
}

/// (phi~_j(q^i a; a))_{ij}.
pub fn basis_matrix(p: &FamilyParams, a: C64) -> Vec<Vec<C64>> {
    let n = p.n();
    let q = p.q();
    (0..n)
        .map(|i| (0..n).map(|j| phi_tilde(q.powi(i as i32) * a, a, j, q)).collect())
        .collect()
}

pub const G_ROUTE_TOL: f64 = 1e-10;

/// g_i two ways: the closed sum and sum_j c_ij F(q^j a). Errors when the
/// routes disagree beyond 1e-10 relative.
pub fn coeff_g_direct(p: &FamilyParams, a: C64, i: usize) -> Result<C64> {
    let g = coeff_g_new(p, a, i)?;
    let cm = cij_matrix(p, a)?;
    let q = p.q();
    let mut s = c(0.0, 0.0);
    for (j, &cij) in cm[i].iter().enumerate().take(i + 1) {
        s += cij * f_parts(q.powi(j as i32) * a, p)?.2;
    }
    let scale = g.norm().max(s.norm());
    if (g - s).norm() > G_ROUTE_TOL * scale {
        return Err(QawError::NoConvergence(format!(
            "g_{i} routes disagree: {} vs {}",
            fmt_c(g),
            fmt_c(s)
        )));
    }
    Ok(g)
}

fn need_n(p: &FamilyParams, lo: usize) -> Result<()> {
    if p.n() < lo {
        return Err(QawError::InvalidInput(format!("needs N >= {lo}, got {}", p.n())));
    }
    Ok(())
}

/// C_0 and C_1..C_{N-1} of F(z) = C_0 prod phi~_1(z;a_i) + sum_j C_j prod_{i != j} phi~_1(z;a_i),
/// products over the first N - 1 parameters.
pub fn lemc_coeffs(p: &FamilyParams) -> Result<(C64, Vec<C64>)> {
    let n = p.n();
    let a = p.a();
    let head = &a[..n - 1];
    for i in 0..n - 1 {
        for j in i + 1..n - 1 {
            if (1.0 - a[i] / a[j]).norm() < p.ctx.guard {
                return Err(QawError::Degenerate(format!("a_{} = a_{}", i + 1, j + 1)));
            }
        }
    }
    let ph: C64 = head.iter().product();
    let e = p.sigmas();
    let c0 = sgn(n as i64 - 1) / ph * (1.0 - e[2 * n]);
    let mut cs = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let mut v = c(sgn(n as i64), 0.0) / ph;
        for &am in &a[n - 1..] {
            v *= 1.0 - a[i] * am;
        }
        for (j, &aj) in head.iter().enumerate() {
            if j != i {
                v /= 1.0 - a[i] / aj;
            }
        }
        cs.push(v);
    }
    Ok((c0, cs))
}

pub const EXPANSION_TOL: f64 = 1e-10;

/// F(z) - C_0 prod phi~_1 - sum_j C_j prod_{i != j} phi~_1 at z.
pub fn lemc_residual(p: &FamilyParams, z: C64) -> Result<ResidualReport> {
    let (c0, cs) = lemc_coeffs(p)?;
    let n = p.n();
    let q = p.q();
    let a = p.a();
    let f = f_parts(z, p)?.2;
    let mut terms = vec![f];
    let all: C64 = a[..n - 1].iter().map(|&x| phi_tilde(z, x, 1, q)).product();
    terms.push(-c0 * all);
    for (j, &cj) in cs.iter().enumerate() {
        let pr: C64 = (0..n - 1).filter(|&i| i != j).map(|i| phi_tilde(z, a[i], 1, q)).product();
        terms.push(-cj * pr);
    }
    Ok(ResidualReport::from_terms("lem_c_expansion", ParamSnapshot::of(p).with("z", z), &terms, EXPANSION_TOL))
}

/// F(z) - sum_i g_i(a) phi~_i(z;a).
pub fn lem_g_residual(p: &FamilyParams, a: C64, z: C64) -> Result<ResidualReport> {
    let q = p.q();
    let mut terms = vec![f_parts(z, p)?.2];
    for i in 0..p.n() {
        terms.push(-coeff_g_new(p, a, i)? * phi_tilde(z, a, i, q));
    }
    let snap = ParamSnapshot::of(p).with("base", a).with("z", z);
    Ok(ResidualReport::from_terms("lem_g_expansion", snap, &terms, EXPANSION_TOL))
}

/// E+(W + dy V) and E-(W - dy V) at z, i.e. the spectral products at q^{+-1/2} z.
pub fn shifted_spectral(p: &FamilyParams, z: C64) -> Result<(C64, C64)> {
    let h = p.q().sqrt();
    Ok((spectral_wv(h * z, p)?.w_plus, spectral_wv(z / h, p)?.w_minus))
}

/// E+(W+dyV) + E-(W-dyV) - 2 sum_l f_{N,l}(a) phi~_l(z;a).
pub fn sum_bexp_residual(p: &FamilyParams, a: C64, z: C64) -> Result<ResidualReport> {
    let q = p.q();
    let (ep, em) = shifted_spectral(p, z)?;
    let mut terms = vec![ep, em];
    for l in 0..=p.n() {
        terms.push(-2.0 * coeff_f(p, a, l)? * phi_tilde(z, a, l, q));
    }
    let snap = ParamSnapshot::of(p).with("base", a).with("z", z);
    Ok(ResidualReport::from_terms("sum_bexp_expansion", snap, &terms, EXPANSION_TOL))
}

/// The terms g_{N,l}(a) phi~_l(z;a) of G(z).
pub fn g_expansion_terms(p: &FamilyParams, a: C64, z: C64) -> Result<Vec<C64>> {
    let q = p.q();
    (0..p.n()).map(|l| Ok(coeff_g(p, a, l)? * phi_tilde(z, a, l, q))).collect()
}

/// G(z) = sum_l g_{N,l}(a) phi~_l(z;a).
pub fn g_expansion(p: &FamilyParams, a: C64, z: C64) -> Result<C64> {
    Ok(g_expansion_terms(p, a, z)?.iter().sum())
}

/// (E+(W+dyV) - E-(W-dyV)) - (z - 1/z) G(z).
pub fn diff_bexp_residual(p: &FamilyParams, a: C64, z: C64) -> Result<ResidualReport> {
    let (ep, em) = shifted_spectral(p, z)?;
    let mut terms = vec![ep, -em];
    terms.extend(g_expansion_terms(p, a, z)?.into_iter().map(|t| -(z - 1.0 / z) * t));
    let snap = ParamSnapshot::of(p).with("base", a).with("z", z);
    Ok(ResidualReport::from_terms("diff_bexp_expansion", snap, &terms, EXPANSION_TOL))
}

pub const PEARSON_TOL: f64 = 1e-12;

/// w(q^{1/2} z) (W - dy V)(z) - w(q^{-1/2} z) (W + dy V)(z), the ratio form
/// of the Pearson equation.
pub fn pearson_residual(p: &FamilyParams, z: C64) -> Result<ResidualReport> {
    let h = p.q().sqrt();
    let sp = spectral_wv(z, p)?;
    let terms = [weight_z(h * z, p)? * sp.w_minus, -weight_z(z / h, p)? * sp.w_plus];
    Ok(ResidualReport::from_terms("pearson", ParamSnapshot::of(p).with("z", z), &terms, PEARSON_TOL))
}

/// The constant -q^{N/2} in the G-F tie as stated for acceptance.
pub fn tie_constant_stated(p: &FamilyParams) -> C64 {
    -p.ctx.qpow(c(p.n() as f64 / 2.0, 0.0))
}

/// -q^{-N/2}, the ratio g_{N,i}/g_i of the two coefficient routes.
pub fn tie_constant_ratio(p: &FamilyParams) -> C64 {
    -p.ctx.qpow(c(-(p.n() as f64) / 2.0, 0.0))
}

/// G(z) - k F(z).
pub fn g_f_tie_residual(p: &FamilyParams, a: C64, z: C64, k: C64) -> Result<ResidualReport> {
    let mut terms = g_expansion_terms(p, a, z)?;
    terms.push(-k * f_parts(z, p)?.2);
    let snap = ParamSnapshot::of(p).with("base", a).with("z", z).with("constant", k);
    Ok(ResidualReport::from_terms("g_f_tie", snap, &terms, EXPANSION_TOL))
}

pub const CIJ_TOL: f64 = 1e-12;

/// max |(C M - 1)_{ij}| for C = cij_matrix and M = basis_matrix.
pub fn cij_inverse_residual(p: &FamilyParams, a: C64) -> Result<ResidualReport> {
    let cm = cij_matrix(p, a)?;
    let m = basis_matrix(p, a);
    let n = p.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let s: C64 = (0..n).map(|k| cm[i][k] * m[k][j]).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - id).norm());
        }
    }
    Ok(ResidualReport::from_abs("cij_inverse", ParamSnapshot::of(p).with("base", a), worst, 1.0, CIJ_TOL))
}

pub const RATIO_TOL: f64 = 1e-11;

/// Spread of g_{N,i}/g_i over i, relative to the ratio at i = 0.
pub fn g_ratio_residual(p: &FamilyParams, a: C64) -> Result<ResidualReport> {
    let r0 = coeff_g(p, a, 0)? / coeff_g_new(p, a, 0)?;
    let mut worst: f64 = 0.0;
    for i in 1..p.n() {
        let r = coeff_g(p, a, i)? / coeff_g_new(p, a, i)?;
        worst = worst.max((r - r0).norm());
    }
    let snap = ParamSnapshot::of(p).with("base", a).with("ratio", r0);
    Ok(ResidualReport::from_abs("g_route_ratio", snap, worst, r0.norm(), RATIO_TOL))
}

/// b_i and c_i of the mixed equation
/// I(q a_1, ..., q a_{N-1}, rest) = sum_i c_i I(..., a_i unshifted, ...).
pub fn mixed_coeffs(p: &FamilyParams) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = p.n();
    let a = p.a();
    let q = p.q();
    let e = p.sigmas();
    let s = e[2 * n];
    if (1.0 - s).norm() < p.ctx.guard || (1.0 - s * q.powi(1 - n as i32)).norm() < p.ctx.guard {
        return Err(QawError::Degenerate("1 - prod a vanishes".into()));
    }
    let mut bs = Vec::new();
    let mut cs = Vec::new();
    for i in 0..n - 1 {
        let mut den = c(1.0, 0.0);
        for j in (0..n - 1).filter(|&j| j != i) {
            let d = 1.0 - a[i] / a[j];
            if d.norm() < p.ctx.guard {
                return Err(QawError::Degenerate(format!("a_{} = a_{}", i + 1, j + 1)));
            }
            den *= d;
        }
        let mut cn = c(1.0, 0.0);
        let mut bn = c(1.0, 0.0);
        for &am in &a[n - 1..] {
            cn *= 1.0 - a[i] * am;
            bn *= 1.0 - a[i] * am / q;
        }
        cs.push(cn / ((1.0 - s) * den));
        bs.push(bn / ((1.0 - s * q.powi(1 - n as i32)) * den));
    }
    Ok((bs, cs))
}

/// The coefficient matrix A of T_{a_1} I = I A with its displayed factors.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussSystem {
    pub a: Vec<Vec<C64>>,
    pub upper_factor: Vec<Vec<C64>>,
    pub lower_factor: Vec<Vec<C64>>,
    pub c: Vec<C64>,
    /// d_2..d_{N-1}
    pub d: Vec<C64>,
}

impl GaussSystem {
    pub fn det(&self) -> C64 {
        self.c[0] * self.d.iter().product::<C64>()
    }

    /// Largest entry of |U L - A|.
    pub fn factor_error(&self) -> f64 {
        let m = self.a.len();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let s: C64 = (0..m).map(|k| self.upper_factor[i][k] * self.lower_factor[k][j]).sum();
                worst = worst.max((s - self.a[i][j]).norm());
            }
        }
        worst
    }
}

/// prod_{m >= 2} (1 - a_1 a_m) / (1 - a_1 ... a_{2N}).
pub fn det_closed(p: &FamilyParams) -> C64 {
    let a = p.a();
    let num: C64 = a[1..].iter().map(|&x| 1.0 - a[0] * x).product();
    num / (1.0 - p.prod_a())
}

pub fn matrix_system(p: &FamilyParams) -> Result<GaussSystem> {
    need_n(p, 2)?;
    let a = p.a();
    if (1.0 - p.prod_a()).norm() < p.ctx.guard {
        return Err(QawError::Degenerate("1 - prod a vanishes".into()));
    }
    for (m, &x) in a.iter().enumerate().skip(1) {
        if (1.0 - a[0] * x).norm() < p.ctx.guard {
            return Err(QawError::Degenerate(format!("a_1 a_{} = 1", m + 1)));
        }
    }
    let (_, cs) = mixed_coeffs(p)?;
    let m = p.n() - 1;
    let d: Vec<C64> = (1..m).map(|i| (1.0 - a[0] * a[i]) * (1.0 - a[0] / a[i])).collect();
    let z = c(0.0, 0.0);
    let mut up = vec![vec![z; m]; m];
    let mut lo = vec![vec![z; m]; m];
    up[0][0] = cs[0];
    lo[0][0] = c(1.0, 0.0);
    for i in 1..m {
        up[0][i] = a[0] / a[i];
        up[i][i] = d[i - 1];
        lo[i][i] = c(1.0, 0.0);
        lo[i][0] = cs[i];
    }
    let mut am = vec![vec![z; m]; m];
    am[0][0] = cs[0];
    for i in 1..m {
        am[0][0] += cs[i] * a[0] / a[i];
        am[0][i] = a[0] / a[i];
        am[i][0] = cs[i] * d[i - 1];
        am[i][i] = d[i - 1];
    }
    Ok(GaussSystem { a: am, upper_factor: up, lower_factor: lo, c: cs, d })
}

/// How shifted integrals in a residual check get evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluator {
    /// Quadrature when the tail converges, else the residue sum.
    Auto,
    Quadrature,
    Residue,
    ClosedForm,
}

fn quadrature_ok(p: &FamilyParams) -> bool {
    p.n().is_multiple_of(2) || p.sum_re_s() < (p.n() - 1) as f64
}

fn residue_ok(p: &FamilyParams) -> bool {
    p.prod_a().norm() > p.q().norm().powi(p.n() as i32 - 1)
}

/// The method used for one shifted parameter set, or the unsupported-domain error.
pub fn choose_method(p: &FamilyParams, ev: Evaluator) -> Result<Method> {
    let unsupported = |why: &str| {
        Err(QawError::UnsupportedDomain(format!(
            "{} is outside the {why}",
            ParamSnapshot::of(p).describe()
        )))
    };
    match ev {
        Evaluator::Quadrature => {
            if quadrature_ok(p) {
                Ok(Method::default_for(p.n()))
            } else {
                unsupported("tail convergence region sum Re s_j < N - 1")
            }
        }
        Evaluator::Residue => {
            if residue_ok(p) {
                Ok(Method::ResidueFull)
            } else {
                unsupported("residue-sum region |prod a| > |q|^(N-1)")
            }
        }
        Evaluator::ClosedForm => {
            if p.n() == 2 {
                Ok(Method::ClosedForm)
            } else {
                unsupported("closed form (N = 2 only)")
            }
        }
        Evaluator::Auto => {
            if quadrature_ok(p) {
                Ok(Method::default_for(p.n()))
            } else if residue_ok(p) {
                Ok(Method::ResidueFull)
            } else {
                unsupported("tail and residue regions")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    /// sum_i g_i(a_1) I(q^i a_1) = 0.
    OrderNMinus1,
    /// The mixed partial equation in a_1 .. a_{N-1}.
    Mixed,
    /// I(q a_i) - (a_i/a_j) I(q a_j) = phi~_1(a_j; a_i) I, 0-based slots.
    T3Identity { i: usize, j: usize },
    /// Moment recurrence in k for m_{k,l} = I(q^k a_1, q^l a_2).
    Mrecur { k: u32 },
    /// N = 3 three-term recurrence in a_1.
    N3Single,
    /// N = 3 three-term recurrence in a_5, a_6.
    N3Double,
}

impl Recurrence {
    pub fn name(&self) -> String {
        match self {
            Recurrence::OrderNMinus1 => "order_n_minus_1".into(),
            Recurrence::Mixed => "mixed".into(),
            Recurrence::T3Identity { i, j } => format!("t3_identity({},{})", i + 1, j + 1),
            Recurrence::Mrecur { k } => format!("mrecur({k})"),
            Recurrence::N3Single => "n3_single".into(),
            Recurrence::N3Double => "n3_double".into(),
        }
    }
}

pub const RECURRENCE_TOL: f64 = 1e-8;

fn unit_shift(len: usize, slots: &[(usize, i64)]) -> Vec<i64> {
    let mut s = vec![0; len];
    for &(i, k) in slots {
        s[i] += k;
    }
    s
}

/// (coefficient, shifts) pairs whose weighted sum of integrals vanishes.
pub fn recurrence_terms(p: &FamilyParams, which: Recurrence) -> Result<Vec<(C64, Vec<i64>)>> {
    let n = p.n();
    let len = 2 * n;
    let a = p.a();
    let q = p.q();
    let mut out = Vec::new();
    match which {
        Recurrence::OrderNMinus1 => {
            for i in 0..n {
                out.push((coeff_g_new(p, a[0], i)?, unit_shift(len, &[(0, i as i64)])));
            }
        }
        Recurrence::Mixed => {
            let (_, cs) = mixed_coeffs(p)?;
            let all: Vec<(usize, i64)> = (0..n - 1).map(|i| (i, 1)).collect();
            out.push((c(1.0, 0.0), unit_shift(len, &all)));
            for (i, &ci) in cs.iter().enumerate() {
                let sl: Vec<(usize, i64)> = (0..n - 1).filter(|&j| j != i).map(|j| (j, 1)).collect();
                out.push((-ci, unit_shift(len, &sl)));
            }
        }
        Recurrence::T3Identity { i, j } => {
            if i >= len || j >= len || i == j {
                return Err(QawError::InvalidInput(format!("t3 slots ({i}, {j}) invalid")));
            }
            out.push((c(1.0, 0.0), unit_shift(len, &[(i, 1)])));
            out.push((-a[i] / a[j], unit_shift(len, &[(j, 1)])));
            out.push((-phi_tilde(a[j], a[i], 1, q), vec![0; len]));
        }
        Recurrence::Mrecur { k } => {
            let (jj, ii) = (0usize, 1usize);
            let (aj, ai) = (a[jj], a[ii]);
            let k = k as i64;
            let g: Vec<C64> = (0..n).map(|l| coeff_g(p, ai, l)).collect::<Result<_>>()?;
            let f: Vec<C64> = (0..=n).map(|l| coeff_f(p, ai, l)).collect::<Result<_>>()?;
            let qk = q.powi(k as i32);
            for (l, &gl) in g.iter().enumerate() {
                out.push((0.5 * (1.0 + 1.0 / qk) * gl, unit_shift(len, &[(jj, k), (ii, l as i64)])));
            }
            if k > 0 {
                let pre = (1.0 - qk) * aj / q;
                let half = 0.5 * (q.powi(k as i32 - 1) * aj - q.powi(1 - k as i32) / aj);
                for (l, &fl) in f.iter().enumerate() {
                    let gl = if l < n { g[l] } else { c(0.0, 0.0) };
                    out.push((pre * (fl + half * gl), unit_shift(len, &[(jj, k - 1), (ii, l as i64)])));
                }
            }
        }
        Recurrence::N3Single => {
            if n != 3 {
                return Err(QawError::InvalidInput(format!("n3_single needs N = 3, got {n}")));
            }
            let a1 = a[0];
            let big_p = p.prod_a();
            let c0: C64 = a[1..].iter().map(|&x| a1 * x - 1.0).product();
            let s_rest: C64 = a[1..].iter().sum();
            let s_inv: C64 = a[1..].iter().map(|&x| 1.0 / x).sum();
            let c1 = 1.0 + 1.0 / q - a1 * (s_rest - q * a1) + big_p * (a1 * s_inv - 1.0 / q - (q + 1.0) * a1 * a1);
            let c2 = (big_p - 1.0) / q;
            out.push((c0, vec![0; len]));
            out.push((c1, unit_shift(len, &[(0, 1)])));
            out.push((c2, unit_shift(len, &[(0, 2)])));
        }
        Recurrence::N3Double => {
            if n != 3 {
                return Err(QawError::InvalidInput(format!("n3_double needs N = 3, got {n}")));
            }
            let e = elem_sym_all(&a[..4]);
            let (a5, a6) = (a[4], a[5]);
            let p6: C64 = a[..4].iter().map(|&x| 1.0 - x * a6).product();
            let p5: C64 = a[..4].iter().map(|&x| 1.0 - x * a5).product();
            let mid = (1.0 + q) * (1.0 + q * a5 * a6 * e[2] + q * q * a5 * a5 * a6 * a6 * e[4])
                - (q * a5 - a6) * (q * a6 - a5) * (q + e[4])
                - q * (a5 + a6) * (e[1] + q * a5 * a6 * e[3]);
            out.push(((a5 - q * a6) * p6, unit_shift(len, &[(4, 2)])));
            out.push((-(a5 - a6) * mid, unit_shift(len, &[(4, 1), (5, 1)])));
            out.push(((q * a5 - a6) * p5, unit_shift(len, &[(5, 2)])));
        }
    }
    Ok(out)
}

/// Assembles the relation from integrals of shifted parameter sets. Every
/// set is checked against the evaluator's domain before anything is
/// evaluated.
pub fn recurrence_residual(p: &FamilyParams, which: Recurrence, ev: Evaluator) -> Result<ResidualReport> {
    let terms = recurrence_terms(p, which)?;
    let mut plan = Vec::with_capacity(terms.len());
    for (coef, sh) in &terms {
        let ps = p.shifted(sh)?;
        let m = choose_method(&ps, ev)?;
        plan.push((*coef, ps, m));
    }
    let mut vals = Vec::with_capacity(plan.len());
    for (coef, ps, m) in &plan {
        vals.push(*coef * eval_in(ps, *m)?.value);
    }
    Ok(ResidualReport::from_terms(&which.name(), ParamSnapshot::of(p), &vals, RECURRENCE_TOL))
}

/// T I_j - sum_i I_i A_ij for each column j, with I_1 = I(a_1, q a_2, ..., q a_{N-1}, rest)
/// and I_i (i >= 2) the same with a_i also unshifted.
pub fn system_residual(p: &FamilyParams, ev: Evaluator) -> Result<Vec<ResidualReport>> {
    let sys = matrix_system(p)?;
    let n = p.n();
    let m = n - 1;
    let len = 2 * n;
    let shifts = |i: usize, t: bool| {
        let mut s = vec![0i64; len];
        for (j, x) in s.iter_mut().enumerate().take(m).skip(1) {
            if j != i {
                *x = 1;
            }
        }
        if t {
            s[0] += 1;
        }
        s
    };
    let mut plan = Vec::with_capacity(2 * m);
    for t in [false, true] {
        for i in 0..m {
            let ps = p.shifted(&shifts(i, t))?;
            let meth = choose_method(&ps, ev)?;
            plan.push((ps, meth));
        }
    }
    let vals: Vec<C64> = plan.iter().map(|(ps, meth)| eval_in(ps, *meth).map(|r| r.value)).collect::<Result<_>>()?;
    let (base, shifted) = vals.split_at(m);
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut terms = vec![shifted[j]];
        for i in 0..m {
            terms.push(-base[i] * sys.a[i][j]);
        }
        let snap = ParamSnapshot::of(p).with("column", c((j + 1) as f64, 0.0));
        out.push(ResidualReport::from_terms("matrix_system", snap, &terms, RECURRENCE_TOL));
    }
    Ok(out)
}

/// N = 3 with a_5 = alpha t and a_6 = alpha / t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFamily {
    pub a4: [C64; 4],
    pub alpha: C64,
    pub ctx: QContext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solution {
    First,
    /// The first solution with t replaced by 1/t.
    Second,
}

impl AlphaFamily {
    pub fn new(a4: [C64; 4], alpha: C64, ctx: QContext) -> Result<Self> {
        if (alpha * alpha).norm() <= ctx.q.norm() {
            return Err(QawError::InvalidInput(format!(
                "|alpha^2| = {} must exceed |q|",
                (alpha * alpha).norm()
            )));
        }
        Ok(AlphaFamily { a4, alpha, ctx })
    }

    pub fn params(&self, t: C64) -> Result<FamilyParams> {
        let mut a = self.a4.to_vec();
        a.push(self.alpha * t);
        a.push(self.alpha / t);
        FamilyParams::new_continued(3, a, self.ctx)
    }

    fn sig(&self) -> Vec<C64> {
        elem_sym_all(&self.a4)
    }

    fn w0(&self, z: C64) -> C64 {
        let h = self.ctx.q.sqrt();
        self.a4.iter().map(|&x| 1.0 - x * z / h).product()
    }
}

fn pinf_checked(w: C64, ctx: &QContext, what: &str) -> Result<C64> {
    if let Some(k) = pole_index(w, ctx.q, ctx.guard) {
        return Err(QawError::PoleProximity(format!("{what} = q^-{k}")));
    }
    Ok(pinf(w, ctx.q, ctx.eps))
}

/// The very-well-poised solution of the three-term moment recurrence.
pub fn w87_m00(t: C64, fam: &AlphaFamily, which: Solution) -> Result<C64> {
    let t = match which {
        Solution::First => t,
        Solution::Second => 1.0 / t,
    };
    let ctx = &fam.ctx;
    let q = ctx.q;
    let h = q.sqrt();
    let al = fam.alpha;
    let s4 = fam.sig()[4];
    let at = al * t;
    let mut pre = t.sqrt()
        * pinf(q * at, q, ctx.eps)
        * pinf(1.0 / at, q, ctx.eps)
        * pinf(h * at, q, ctx.eps)
        * pinf(h / at, q, ctx.eps);
    for &x in &fam.a4 {
        pre *= pinf(s4 * at / x, q, ctx.eps) / pinf_checked(x * at, ctx, "a_j alpha t")?;
    }
    pre /= pinf_checked(1.0 / (t * t), ctx, "t^-2")? * pinf_checked(s4 * al * al * t * t, ctx, "sigma_4 alpha^2 t^2")?;
    let a1 = s4 * al * al * t * t / q;
    let mut tail = vec![s4 * al * al / q];
    tail.extend(fam.a4.iter().map(|&x| x * at));
    let w = vwp_w_series(a1, &tail, q / (al * al), ctx)?;
    Ok(pre * w.value)
}

/// (A, B, C) with A m(q t) + B m(t) + C m(t/q) = 0.
pub fn three_term_coeffs(fam: &AlphaFamily, t: C64) -> (C64, C64, C64) {
    let q = fam.ctx.q;
    let h = q.sqrt();
    let al = fam.alpha;
    let e = fam.sig();
    let a = (t / h - h / t) * fam.w0(al / (h * t));
    let b = -(t - 1.0 / t) / h
        * ((1.0 + q) * (1.0 + al * al * e[2] / q + al.powi(4) * e[4] / (q * q))
            + al * al * (q + e[4]) * (h * t - 1.0 / (h * t)) * (t / h - h / t) / q
            - al * (t + 1.0 / t) * (e[1] + al * al * e[3] / q));
    let cc = (h * t - 1.0 / (h * t)) * fam.w0(al * t / h);
    (a, b, cc)
}

pub const W87_TOL: f64 = 1e-9;

pub fn three_term_residual(
    fam: &AlphaFamily,
    t: C64,
    m: &dyn Fn(C64) -> Result<C64>,
    identity: &str,
) -> Result<ResidualReport> {
    let q = fam.ctx.q;
    let (a, b, cc) = three_term_coeffs(fam, t);
    let terms = [a * m(q * t)?, b * m(t)?, cc * m(t / q)?];
    let snap = ParamSnapshot::values(3, q, &fam.a4).with("alpha", fam.alpha).with("t", t);
    Ok(ResidualReport::from_terms(identity, snap, &terms, W87_TOL))
}

pub fn w87_three_term_residual(fam: &AlphaFamily, t: C64, which: Solution) -> Result<ResidualReport> {
    let name = match which {
        Solution::First => "three_term_w87_first",
        Solution::Second => "three_term_w87_second",
    };
    three_term_residual(fam, t, &|u| w87_m00(u, fam, which), name)
}

/// The single-variable N = 3 recurrence in a_1 applied to one ₈W₇
/// solution. Exploratory: nothing is asserted about it.
pub fn w87_single_variable_report(fam: &AlphaFamily, t: C64, which: Solution) -> Result<ResidualReport> {
    let p = fam.params(t)?;
    let terms = recurrence_terms(&p, Recurrence::N3Single)?;
    let q = fam.ctx.q;
    let mut vals = Vec::new();
    for (coef, sh) in terms {
        let mut f = *fam;
        f.a4[0] *= q.powi(sh[0] as i32);
        vals.push(coef * w87_m00(t, &f, which)?);
    }
    Ok(ResidualReport::from_terms("w87_single_variable", ParamSnapshot::of(&p), &vals, W87_TOL))
}

/// The contour functional of (z + 1/z) Phi, i.e. m_{0,+} + m_{0,-}.
pub fn moment_pm_sum(p: &FamilyParams) -> Result<C64> {
    let ins = Laurent { lo: -1, c: vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)] };
    Ok(contour_functional(p, &ins)?.value)
}

pub const LEMMA_TOL: f64 = 1e-7;

/// The m_{0,+-} contiguous relation between m(t), m(t/q) and S(t) = m_{0,+} + m_{0,-}.
pub fn m0pm_lemma_residual(fam: &AlphaFamily, t: C64) -> Result<ResidualReport> {
    let q = fam.ctx.q;
    let h = q.sqrt();
    let al = fam.alpha;
    let e = fam.sig();
    let p = fam.params(t)?;
    let m = contour_functional(&p, &Laurent::one())?.value;
    let s = moment_pm_sum(&p)?;
    let mq = contour_functional(&fam.params(t / q)?, &Laurent::one())?.value;
    let s6 = e[4] * al * al;
    let at = al * t;
    let lhs = (s6 / (q * q) - 1.0 / q) * s;
    let r1 = (al * al * e[3] / (q * q) - e[1] / q + (q - al * al) * (q * q / at + e[4] * at) / q.powi(3)) * m;
    let r2 = fam.w0(at / h) / at * (t * mq / h - h * m / t) / (t / h - h / t);
    let snap = ParamSnapshot::of(&p).with("alpha", al).with("t", t);
    Ok(ResidualReport::from_terms("m0pm_lemma", snap, &[lhs, -r1, r2], LEMMA_TOL))
}

/// m_{0,n}(a) = L[phi~_n(z;a) Phi].
pub fn moment_basis(p: &FamilyParams, a: C64, n: usize) -> Result<C64> {
    Ok(contour_functional(p, &phi_tilde_laurent(a, n, p.q()))?.value)
}

/// U from the triple sum, given m_{0,n}(a) for n <= N - 2.
pub fn u_poly_with_moments(p: &FamilyParams, a: C64, z: C64, mom: &[C64]) -> Result<C64> {
    let n = p.n();
    if mom.len() + 1 < n {
        return Err(QawError::InvalidInput(format!("need {} moments, got {}", n - 1, mom.len())));
    }
    let q = p.q();
    let h = q.sqrt();
    let f: Vec<C64> = (0..=n).map(|k| coeff_f(p, a, k)).collect::<Result<_>>()?;
    let g: Vec<C64> = (0..n).map(|k| coeff_g(p, a, k)).collect::<Result<_>>()?;
    let qp = |x: i64| q.powi(x as i32);
    let base = |m: i64| h.powi(2 * m as i32 + 3) * a;
    let mut tot = c(0.0, 0.0);
    for k in 2..=n as i64 {
        for m in 0..=k - 2 {
            tot += -4.0 * a * a * f[k as usize] * qp(m) / h * (qp(m + 1) - qp(k)) * mom[m as usize]
                * phi_tilde(z, base(m), (k - m - 2) as usize, q);
        }
    }
    for k in 1..n as i64 {
        for m in 0..k {
            tot += 2.0 * a * g[k as usize] * qp(m - k) * h * (qp(k) + qp(m)) * mom[m as usize]
                * phi_tilde(z, base(m), (k - m - 1) as usize, q);
        }
    }
    for k in 2..n as i64 {
        for m in 0..=k - 2 {
            tot += -2.0 * a * g[k as usize] * qp(m - k) / h * (1.0 - a * a * qp(2 * k)) * (qp(m + 1) - qp(k))
                * mom[m as usize]
                * phi_tilde(z, base(m), (k - m - 2) as usize, q);
        }
    }
    Ok(tot / (h - 1.0 / h))
}

/// U(x) at x = (z + 1/z)/2, moments from the contour functional.
pub fn u_poly(p: &FamilyParams, a: C64, z: C64) -> Result<C64> {
    let mom: Vec<C64> = (0..p.n().saturating_sub(1).max(1)).map(|k| moment_basis(p, a, k)).collect::<Result<_>>()?;
    u_poly_with_moments(p, a, z, &mom)
}

/// The N = 3 closed form of U from m_{0,0} and S = m_{0,+} + m_{0,-}.
pub fn u_m3(p: &FamilyParams, z: C64, m00: C64, s: C64) -> Result<C64> {
    if p.n() != 3 {
        return Err(QawError::InvalidInput(format!("closed U needs N = 3, got {}", p.n())));
    }
    let q = p.q();
    let h = q.sqrt();
    let e = p.sigmas();
    let x = x_of(z);
    let v = m00 * (-2.0 / h * (e[6] - q * q) * x + e[5] - q * e[1]) - (e[6] - q) * s;
    Ok(4.0 / (q * q * (h - 1.0 / h)) * v)
}
