//! The split Phi = P Q, the bilateral Jackson sum J_N, its regularisation,
//! the residue prefactors R_k and A_ki, residue-sum evaluations of I_N and
//! the Sears-Slater connection formula.

use crate::contour::{aw_closed_i2, IntegralResult, Method};
use crate::hyperseries::{psi_series, SeriesSpec};
use crate::integrand::{big_phi, FamilyParams};
use crate::qdiff::{ParamSnapshot, ResidualReport};
use crate::qkernel::{lattice_index, pinf, pole_index, theta_guarded, theta_raw};
use crate::{c, fmt_c, QawError, Result, C64};

const SMALL: f64 = 0.5;
const RUN: usize = 3;
// Runtime divergence check starts after this many terms on a side.
const WARMUP: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonValue {
    pub raw: C64,
    pub regularized: C64,
    pub h_value: C64,
    pub terms_used: usize,
}

/// |q^{N-1}| < |a_1 ... a_{2N}|.
pub fn check_condition(p: &FamilyParams) -> Result<()> {
    let lhs = p.q().norm().powi(p.n() as i32 - 1);
    let rhs = p.prod_a().norm();
    if lhs >= rhs {
        return Err(QawError::Divergence(format!(
            "|q|^(N-1) = {lhs:e} is not below |prod a| = {rhs:e}"
        )));
    }
    Ok(())
}

fn zpow(z: C64, e: C64) -> C64 {
    (z.ln() * e).exp()
}

/// (P(z), Q(z)) with P(z) = z^{N/2} theta(z^-N; q^{N/2}) / prod z^{1/2-s_j} theta(a_j/z)
/// and Q(z) = (1/z - z) prod z^{1/2-s_j} (q z/a_j; q)_inf / (a_j z; q)_inf.
pub fn split_pq(z: C64, p: &FamilyParams) -> Result<(C64, C64)> {
    big_phi(z, p)?;
    let q = p.q();
    let eps = p.ctx.eps;
    let n = p.n();
    let e: C64 = (0..2 * n).map(|j| 0.5 - p.s(j)).sum();
    let zp = zpow(z, e);
    let ph = p.p_half();
    let mut big_p = crate::integrand::half_power(z, n) * theta_raw(z.powi(-(n as i32)), ph, eps) / zp;
    let mut big_q = (1.0 / z - z) * zp;
    for &x in p.a() {
        big_p /= theta_raw(x / z, q, eps);
        big_q *= pinf(q * z / x, q, eps) / pinf(x * z, q, eps);
    }
    Ok((big_p, big_q))
}

/// h(z) = z^{N-1-sum s} theta(z^2) / prod theta(a_j z).
pub fn h_value(z: C64, p: &FamilyParams) -> Result<C64> {
    let pre = regularizer(z, p)?;
    Ok(zpow(z, alpha(p)) / pre)
}

fn alpha(p: &FamilyParams) -> C64 {
    let s: C64 = (0..2 * p.n()).map(|j| p.s(j)).sum();
    c(p.n() as f64 - 1.0, 0.0) - s
}

// prod theta(a_j z) / theta(z^2)
fn regularizer(z: C64, p: &FamilyParams) -> Result<C64> {
    let q = p.q();
    let (eps, g) = (p.ctx.eps, p.ctx.guard);
    let mut r = 1.0 / theta_guarded(z * z, q, eps, g, "theta(z^2)")?;
    for (j, &x) in p.a().iter().enumerate() {
        r *= theta_guarded(x * z, q, eps, g, &format!("theta(a_{} z)", j + 1))?;
    }
    Ok(r)
}

fn check_lattices(z: C64, p: &FamilyParams) -> Result<()> {
    let q = p.q();
    for (j, &x) in p.a().iter().enumerate() {
        if let Some(m) = lattice_index(x * z, q, p.ctx.guard) {
            return Err(QawError::PoleProximity(format!(
                "a_{} z = q^{m} at z = {}: a term of the bilateral sum has a pole",
                j + 1,
                fmt_c(z)
            )));
        }
        if let Some(m) = lattice_index(z / x, q, p.ctx.guard) {
            if m < 0 {
                return Err(QawError::PoleProximity(format!(
                    "z = a_{} q^{m}: shift z to a_{} and use the truncated sum",
                    j + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// sum_nu (1 - z^2 q^{2 nu}) q^-nu rho^nu prod (q^{1+nu} z/a_j; q)_inf / (a_j z q^nu; q)_inf,
/// rho = q^N / prod a. Over nu >= 0 only when `forward_only`.
fn lattice_sum(z: C64, p: &FamilyParams, forward_only: bool) -> Result<(C64, usize)> {
    let q = p.q();
    let eps = p.ctx.eps;
    let rho = q.powi(p.n() as i32) / p.prod_a();
    let r = (rho / q).norm().min(0.999_999);
    let mut u0 = c(1.0, 0.0);
    for &x in p.a() {
        u0 *= pinf(q * z / x, q, eps) / pinf(x * z, q, eps);
    }
    let z2 = z * z;
    let mut sum = (1.0 - z2) * u0;
    let mut terms = 1usize;
    for back in [false, true] {
        if back && forward_only {
            break;
        }
        let mut u = u0;
        // w = q^{2 nu} u, carried separately so neither factor overflows
        let mut w = u0;
        let q2 = if back { 1.0 / (q * q) } else { q * q };
        let mut nu: i64 = 0;
        let mut small = 0;
        let mut growing = 0;
        let mut last = sum.norm();
        let mut count = 0usize;
        loop {
            let mut f = if back { q / rho } else { rho / q };
            if back {
                let iq = q.powi(-nu as i32);
                for &x in p.a() {
                    f *= (iq - z / x) / (iq - x * z / q);
                }
            } else {
                let qn = q.powi(nu as i32);
                for &x in p.a() {
                    f *= (1.0 - x * z * qn) / (1.0 - q * qn * z / x);
                }
            }
            u *= f;
            w *= f * q2;
            nu += if back { -1 } else { 1 };
            let t = u - z2 * w;
            if !t.is_finite() {
                return Err(QawError::NoConvergence(format!("bilateral sum term overflowed at nu = {nu}")));
            }
            sum += t;
            terms += 1;
            count += 1;
            if u.norm() == 0.0 {
                break;
            }
            let tn = t.norm();
            if count > WARMUP && last > 0.0 && tn >= (1.0 - eps) * last {
                growing += 1;
                if growing >= RUN {
                    return Err(QawError::Divergence(format!(
                        "bilateral sum terms stopped decaying at nu = {nu}"
                    )));
                }
            } else {
                growing = 0;
            }
            last = tn;
            if tn <= SMALL * eps * sum.norm().max(f64::MIN_POSITIVE) * (1.0 - r) {
                small += 1;
                if small >= RUN {
                    break;
                }
            } else {
                small = 0;
            }
            if terms >= p.ctx.max_terms {
                return Err(QawError::NoConvergence(format!(
                    "bilateral sum exceeded {} terms",
                    p.ctx.max_terms
                )));
            }
        }
    }
    Ok((sum, terms))
}

/// J_N(z) = sum_nu Q(z q^nu), or its nu >= 0 part at z = a_i when
/// `truncated_at = Some(i)` (0-based).
pub fn jackson_j(z: C64, p: &FamilyParams, truncated_at: Option<usize>) -> Result<JacksonValue> {
    check_condition(p)?;
    let z = match truncated_at {
        Some(i) => {
            let ai = *p.a().get(i).ok_or_else(|| QawError::InvalidInput(format!("no parameter index {i}")))?;
            if (z - ai).norm() > p.ctx.guard * ai.norm() {
                return Err(QawError::InvalidInput(format!(
                    "truncation at a_{} needs z = a_{}, got {}",
                    i + 1,
                    i + 1,
                    fmt_c(z)
                )));
            }
            ai
        }
        None => z,
    };
    if z.norm() == 0.0 {
        return Err(QawError::InvalidInput("Jackson sum at z = 0".into()));
    }
    check_lattices(z, p)?;
    let (s, terms) = lattice_sum(z, p, truncated_at.is_some())?;
    let pre = regularizer(z, p)?;
    let za = zpow(z, alpha(p));
    Ok(JacksonValue { raw: za * s, regularized: pre * s, h_value: za / pre, terms_used: terms })
}

/// The regularised sum J_N(z)/h(z). Falls back to 1/z, by reflection
/// symmetry, when z itself sits on a pole lattice of the summand.
pub fn regularized_j(z: C64, p: &FamilyParams) -> Result<JacksonValue> {
    match jackson_j(z, p, None) {
        Err(QawError::PoleProximity(msg)) => jackson_j(1.0 / z, p, None).map_err(|_| QawError::PoleProximity(msg)),
        r => r,
    }
}

/// The regularised sum through the bilateral series
/// psi[qz, -qz, z a_j; z, -z, q z/a_j; q^{N-1}/prod a].
pub fn regularized_psi(z: C64, p: &FamilyParams) -> Result<C64> {
    check_condition(p)?;
    let q = p.q();
    let eps = p.ctx.eps;
    let mut upper = vec![q * z, -q * z];
    let mut lower = vec![z, -z];
    let mut pre = 1.0 / (pinf(q * z * z, q, eps) * pinf(q / (z * z), q, eps));
    for &x in p.a() {
        upper.push(z * x);
        lower.push(q * z / x);
        pre *= pinf(q * z / x, q, eps) * pinf(q / (x * z), q, eps);
    }
    let arg = q.powi(p.n() as i32 - 1) / p.prod_a();
    let r = psi_series(&SeriesSpec::new(upper, lower, arg), &p.ctx)?;
    Ok(pre * r.value)
}

fn theta_pair(x: C64, y: C64, p: &FamilyParams, what: &str) -> Result<C64> {
    let (q, eps, g) = (p.q(), p.ctx.eps, p.ctx.guard);
    Ok(theta_guarded(x * y, q, eps, g, what)? * theta_guarded(x / y, q, eps, g, what)?)
}

/// R_k = a_k^{N/2-1} theta(a_k^-N; q^{N/2}) / ((q;q)^2 prod_{j != k} theta(a_j a_k) theta(a_j/a_k)).
pub fn residue_rk(k: usize, p: &FamilyParams) -> Result<C64> {
    let a = p.a();
    let ak = *a.get(k).ok_or_else(|| QawError::InvalidInput(format!("no parameter index {k}")))?;
    let n = p.n();
    let q = p.q();
    let num = zpow(ak, c(n as f64 / 2.0 - 1.0, 0.0)) * theta_raw(ak.powi(-(n as i32)), p.p_half(), p.ctx.eps);
    let qq = pinf(q, q, p.ctx.eps);
    let mut den = qq * qq;
    for (j, &aj) in a.iter().enumerate() {
        if j != k {
            den *= theta_pair(aj, ak, p, &format!("pair ({}, {})", j + 1, k + 1))?;
        }
    }
    Ok(num / den)
}

/// A_ki = prod_{j <= N-1, j != i} theta(a_j a_k) theta(a_j/a_k) / (theta(a_j a_i) theta(a_j/a_i)),
/// indices 0-based with i < N - 1.
pub fn coeff_aki(k: usize, i: usize, p: &FamilyParams) -> Result<C64> {
    let n = p.n();
    if i >= n - 1 || k >= 2 * n {
        return Err(QawError::InvalidInput(format!("A_ki needs i < N-1 and k < 2N, got k = {k}, i = {i}")));
    }
    let a = p.a();
    let mut r = c(1.0, 0.0);
    for j in (0..n - 1).filter(|&j| j != i) {
        r *= theta_pair(a[j], a[k], p, &format!("pair ({}, {})", j + 1, k + 1))?
            / theta_pair(a[j], a[i], p, &format!("pair ({}, {})", j + 1, i + 1))?;
    }
    Ok(r)
}

/// Coefficient of the truncated value at a_i in the reduced residue sum.
pub fn reduced_coefficient(i: usize, p: &FamilyParams) -> Result<C64> {
    Ok(reduced_coefficient_abs(i, p)?.0)
}

// Also returns sum |R_k A_ki|, the scale the coefficient cancels from.
fn reduced_coefficient_abs(i: usize, p: &FamilyParams) -> Result<(C64, f64)> {
    let mut s = residue_rk(i, p)?;
    let mut abs = s.norm();
    for k in p.n() - 1..2 * p.n() {
        let t = residue_rk(k, p)? * coeff_aki(k, i, p)?;
        s += t;
        abs += t.norm();
    }
    Ok((s, abs))
}

/// I_N as sum_k R_k J(a_k) over all 2N parameters, or over the first N-1
/// after applying the connection coefficients.
pub fn in_residue(p: &FamilyParams, reduced: bool) -> Result<IntegralResult> {
    check_condition(p)?;
    p.require_distinct()?;
    let n = p.n();
    let idx: Vec<usize> = if reduced { (0..n - 1).collect() } else { (0..2 * n).collect() };
    let mut value = c(0.0, 0.0);
    let mut abs = 0.0;
    let mut terms = 0;
    for &k in &idx {
        let (coef, coef_abs) = if reduced {
            reduced_coefficient_abs(k, p)?
        } else {
            let r = residue_rk(k, p)?;
            (r, r.norm())
        };
        let jv = jackson_j(p.a()[k], p, Some(k))?;
        let t = coef * jv.regularized;
        value += t;
        abs += coef_abs * jv.regularized.norm();
        terms += jv.terms_used;
    }
    Ok(IntegralResult {
        value,
        method: if reduced { Method::ResidueReduced } else { Method::ResidueFull },
        nodes_or_terms: terms,
        est_error: 10.0 * p.ctx.eps * abs,
        tail_omitted: false,
    })
}

pub const SEARS_SLATER_TOL: f64 = 1e-9;
pub const SS_TRUNCATED_TOL: f64 = 1e-10;

/// J(z) - sum_i J(a_i) prod_{j != i} theta(a_j z) theta(a_j/z) / (theta(a_j a_i) theta(a_j/a_i)).
pub fn sears_slater_residual(z: C64, p: &FamilyParams) -> Result<ResidualReport> {
    let n = p.n();
    let a = p.a();
    let mut terms = vec![regularized_j(z, p)?.regularized];
    for i in 0..n - 1 {
        let ji = jackson_j(a[i], p, Some(i))?.regularized;
        let mut w = c(1.0, 0.0);
        for j in (0..n - 1).filter(|&j| j != i) {
            w *= theta_pair(a[j], z, p, &format!("a_{} with z", j + 1))?
                / theta_pair(a[j], a[i], p, &format!("pair ({}, {})", j + 1, i + 1))?;
        }
        terms.push(-ji * w);
    }
    let mut snap = ParamSnapshot::of(p);
    snap.extra.push(("z".into(), z));
    Ok(ResidualReport::from_terms("sears_slater", snap, &terms, SEARS_SLATER_TOL))
}

/// J(a_k) - sum_i A_ki J(a_i) for k >= N - 1 (0-based).
pub fn ss_truncated_residual(k: usize, p: &FamilyParams) -> Result<ResidualReport> {
    let a = p.a();
    let mut terms = vec![jackson_j(a[k], p, Some(k))?.regularized];
    for i in 0..p.n() - 1 {
        terms.push(-coeff_aki(k, i, p)? * jackson_j(a[i], p, Some(i))?.regularized);
    }
    let mut snap = ParamSnapshot::of(p);
    snap.extra.push(("k".into(), c(k as f64, 0.0)));
    Ok(ResidualReport::from_terms("sears_slater_truncated", snap, &terms, SS_TRUNCATED_TOL))
}

/// (q;q)_inf prod_{j<k} (q/(a_j a_k); q)_inf / (q/(a_1 a_2 a_3 a_4); q)_inf.
pub fn j2_closed(p: &FamilyParams) -> Result<C64> {
    if p.n() != 2 {
        return Err(QawError::InvalidInput(format!("closed Jackson value needs N = 2, got {}", p.n())));
    }
    check_condition(p)?;
    let a = p.a();
    let q = p.q();
    let eps = p.ctx.eps;
    let mut num = pinf(q, q, eps);
    for j in 0..4 {
        for k in j + 1..4 {
            num *= pinf(q / (a[j] * a[k]), q, eps);
        }
    }
    let w = q / p.prod_a();
    if let Some(m) = pole_index(w, q, p.ctx.guard) {
        return Err(QawError::PoleProximity(format!("q / prod a = q^-{m}")));
    }
    Ok(num / pinf(w, q, eps))
}

pub const J2_TOL: f64 = 1e-10;

/// The closed value against the regularised bilateral sum at z.
pub fn j2_bilateral_residual(z: C64, p: &FamilyParams) -> Result<ResidualReport> {
    let closed = j2_closed(p)?;
    let sum = regularized_j(z, p)?.regularized;
    let snap = ParamSnapshot::of(p).with("z", z);
    Ok(ResidualReport::from_terms("j2_closed_vs_bilateral", snap, &[closed, -sum], J2_TOL))
}

pub const I2_J2_TOL: f64 = 1e-10;

/// I_2 against 2 theta(a1 a2 a3 a4) / ((q;q)^2 prod theta(a_i a_j)) times the closed J_2.
pub fn i2_j2_relation(p: &FamilyParams) -> Result<ResidualReport> {
    let i2 = aw_closed_i2(p.a(), &p.ctx)?;
    let j2 = j2_closed(p)?;
    let a = p.a();
    let q = p.q();
    let (eps, g) = (p.ctx.eps, p.ctx.guard);
    let qq = pinf(q, q, eps);
    let mut den = qq * qq;
    for i in 0..4 {
        for j in i + 1..4 {
            den *= theta_guarded(a[i] * a[j], q, eps, g, &format!("theta(a_{} a_{})", i + 1, j + 1))?;
        }
    }
    let rhs = 2.0 * theta_guarded(p.prod_a(), q, eps, g, "theta(a1 a2 a3 a4)")? / den * j2;
    Ok(ResidualReport::from_terms("i2_j2_relation", ParamSnapshot::of(p), &[i2, -rhs], I2_J2_TOL))
}
