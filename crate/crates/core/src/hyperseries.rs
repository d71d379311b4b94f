//! Summation of unilateral, bilateral and very-well-poised basic
//! hypergeometric series.

use crate::qkernel::{lattice_index, pole_index, QContext, SeriesResult};
use crate::{fmt_c, QawError, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    pub upper: Vec<C64>,
    pub lower: Vec<C64>,
    pub z: C64,
}

impl SeriesSpec {
    pub fn new(upper: Vec<C64>, lower: Vec<C64>, z: C64) -> Self {
        SeriesSpec { upper, lower, z }
    }
}

// Terms below this fraction of eps*max(1,|sum|)*(1-rho) count as small.
const SMALL: f64 = 0.5;
const RUN: usize = 3;

fn first_zero_index(params: &[C64], q: C64, guard: f64) -> Option<u64> {
    params.iter().filter_map(|&a| pole_index(a, q, guard)).min()
}

/// Sum of (a_1..a_{r+1};q)_n / (q,b_1..b_r;q)_n z^n.
///
/// Stops after three consecutive negligible terms, or at the terminating
/// index when an upper parameter is q^{-m}.
pub fn phi_series(spec: &SeriesSpec, ctx: &QContext) -> Result<SeriesResult> {
    let q = ctx.q;
    let term_at = first_zero_index(&spec.upper, q, ctx.guard);
    for &b in &spec.lower {
        if let Some(k) = pole_index(b, q, ctx.guard) {
            if term_at.is_none_or(|m| k < m) {
                return Err(QawError::InvalidInput(format!(
                    "lower parameter {} is q^-{k}",
                    fmt_c(b)
                )));
            }
        }
    }
    if spec.z.norm() == 0.0 {
        return Ok(SeriesResult { value: C64::new(1.0, 0.0), terms_used: 1, tail_bound: 0.0, converged: true });
    }
    if term_at.is_none() && spec.z.norm() >= 1.0 {
        return Err(QawError::Divergence(format!(
            "|z| = {} outside the unit disc",
            spec.z.norm()
        )));
    }
    let rho = spec.z.norm().min(0.999_999);
    let mut sum = C64::new(0.0, 0.0);
    let mut t = C64::new(1.0, 0.0);
    let mut qn = C64::new(1.0, 0.0);
    let mut small = 0;
    let mut n = 0usize;
    loop {
        sum += t;
        if let Some(m) = term_at {
            if n as u64 >= m {
                return Ok(SeriesResult { value: sum, terms_used: n + 1, tail_bound: 0.0, converged: true });
            }
        }
        if n + 1 >= ctx.max_terms {
            let tail = t.norm() / (1.0 - rho);
            return Ok(SeriesResult { value: sum, terms_used: n + 1, tail_bound: tail, converged: false });
        }
        let mut r = spec.z / (1.0 - qn * q);
        for &a in &spec.upper {
            r *= 1.0 - a * qn;
        }
        for &b in &spec.lower {
            r /= 1.0 - b * qn;
        }
        t *= r;
        qn *= q;
        n += 1;
        let lim = SMALL * ctx.eps * sum.norm().max(1.0) * (1.0 - rho);
        if t.norm() <= lim {
            small += 1;
            if small >= RUN {
                let tail = t.norm() / (1.0 - rho);
                return Ok(SeriesResult {
                    value: sum,
                    terms_used: n,
                    tail_bound: tail,
                    converged: tail <= ctx.eps * sum.norm().max(1.0),
                });
            }
        } else {
            small = 0;
        }
    }
}

/// Bilateral sum over all integers n of (a;q)_n/(b;q)_n z^n, equal
/// numbers of upper and lower parameters. Negative-n terms come from the
/// reciprocal ratio recursion.
pub fn psi_series(spec: &SeriesSpec, ctx: &QContext) -> Result<SeriesResult> {
    let q = ctx.q;
    if spec.upper.len() != spec.lower.len() {
        return Err(QawError::InvalidInput("bilateral series needs equal parameter counts".into()));
    }
    for &b in &spec.lower {
        if let Some(k) = pole_index(b, q, ctx.guard) {
            return Err(QawError::InvalidInput(format!("lower parameter {} is q^-{k}", fmt_c(b))));
        }
    }
    for &a in &spec.upper {
        if let Some(m) = lattice_index(a, q, ctx.guard) {
            if m >= 1 {
                return Err(QawError::InvalidInput(format!("upper parameter {} is q^{m}", fmt_c(a))));
            }
        }
    }
    let z = spec.z;
    let pa: C64 = spec.upper.iter().product();
    let pb: C64 = spec.lower.iter().product();
    let inner = if pa.norm() == 0.0 { f64::INFINITY } else { (pb / pa).norm() };
    let pos_ends = first_zero_index(&spec.upper, q, ctx.guard).is_some();
    // negative side ends when some lower parameter is q^m with m >= 1
    let neg_ends = spec
        .lower
        .iter()
        .any(|&b| matches!(lattice_index(b, q, ctx.guard), Some(m) if m >= 1));
    if (!pos_ends && z.norm() >= 1.0) || (!neg_ends && z.norm() <= inner) {
        return Err(QawError::Divergence(format!(
            "|z| = {} outside the annulus ({inner}, 1)",
            z.norm()
        )));
    }
    let (sp, np, tp) = one_side(&spec.upper, &spec.lower, z, q, ctx, false)?;
    let (sn, nn, tn) = one_side(&spec.upper, &spec.lower, z, q, ctx, true)?;
    let value = sp + sn;
    let tail = tp + tn;
    Ok(SeriesResult {
        value,
        terms_used: np + nn,
        tail_bound: tail,
        converged: tail <= ctx.eps * value.norm().max(1.0),
    })
}

// Forward side sums n >= 0; backward side sums n <= -1 through
// t_{-n-1} = t_{-n} prod (1 - b q^{-n-1}) / (1 - a q^{-n-1}) / z.
fn one_side(
    upper: &[C64],
    lower: &[C64],
    z: C64,
    q: C64,
    ctx: &QContext,
    negative: bool,
) -> Result<(C64, usize, f64)> {
    let pa: C64 = upper.iter().product();
    let pb: C64 = lower.iter().product();
    let rho = if negative {
        if pa.norm() == 0.0 { 0.999_999 } else { ((pb / pa) / z).norm().min(0.999_999) }
    } else {
        z.norm().min(0.999_999)
    };
    let step = if negative { 1.0 / q } else { q };
    let mut qn = if negative { step } else { C64::new(1.0, 0.0) };
    let mut sum = C64::new(0.0, 0.0);
    let mut t = C64::new(1.0, 0.0);
    let mut n = 0usize;
    let mut small = 0;
    loop {
        let mut r = if negative { 1.0 / z } else { z };
        for (&a, &b) in upper.iter().zip(lower) {
            r *= if negative { (1.0 - b * qn) / (1.0 - a * qn) } else { (1.0 - a * qn) / (1.0 - b * qn) };
        }
        if negative {
            t *= r;
            sum += t;
        } else {
            sum += t;
            t *= r;
        }
        qn *= step;
        n += 1;
        if t.norm() == 0.0 {
            return Ok((sum, n, 0.0));
        }
        let lim = SMALL * ctx.eps * sum.norm().max(1.0) * (1.0 - rho);
        if t.norm() <= lim {
            small += 1;
            if small >= RUN {
                return Ok((sum, n, t.norm() / (1.0 - rho)));
            }
        } else {
            small = 0;
        }
        if n >= ctx.max_terms {
            return Err(QawError::NoConvergence(format!(
                "bilateral series exceeded {} terms",
                ctx.max_terms
            )));
        }
    }
}

/// Parameters of r+1 W r (a1; tail; q, z) written as a phi spec:
/// upper a1, q sqrt(a1), -q sqrt(a1), tail..., lower sqrt(a1), -sqrt(a1), q a1 / tail...
pub fn vwp_spec(a1: C64, tail_params: &[C64], z: C64, q: C64) -> SeriesSpec {
    let s = a1.sqrt();
    let mut upper = vec![a1, q * s, -q * s];
    let mut lower = vec![s, -s];
    for &t in tail_params {
        upper.push(t);
        lower.push(q * a1 / t);
    }
    SeriesSpec { upper, lower, z }
}

pub fn vwp_w_series(a1: C64, tail_params: &[C64], z: C64, ctx: &QContext) -> Result<SeriesResult> {
    if tail_params.iter().any(|t| t.norm() == 0.0) {
        return Err(QawError::InvalidInput("zero very-well-poised parameter".into()));
    }
    phi_series(&vwp_spec(a1, tail_params, z, ctx.q), ctx)
}
