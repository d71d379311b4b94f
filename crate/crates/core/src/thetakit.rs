//! The four-term theta identity and pointwise reconstruction of the
//! symmetric function f = R(x) prod_{i<j} theta(x_i x_j).

use crate::qdiff::{ParamSnapshot, ResidualReport};
use crate::qkernel::{lattice_index, theta_raw, QContext};
use crate::{c, fmt_c, QawError, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTuple {
    xs: Vec<C64>,
    pub ctx: QContext,
}

impl ThetaTuple {
    /// Rejects zeros and any x_i x_j or x_i/x_j (i != j) on the lattice q^Z.
    pub fn new(xs: Vec<C64>, ctx: QContext) -> Result<Self> {
        if xs.len() < 2 {
            return Err(QawError::InvalidInput(format!("theta tuple needs at least 2 entries, got {}", xs.len())));
        }
        if let Some(i) = xs.iter().position(|x| !(x.norm() > 0.0 && x.norm().is_finite())) {
            return Err(QawError::InvalidInput(format!("x_{} = {} is not a nonzero finite value", i + 1, fmt_c(xs[i]))));
        }
        let q = ctx.q;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                for (w, what) in [(xs[i] * xs[j], "x_i x_j"), (xs[i] / xs[j], "x_i / x_j")] {
                    if let Some(m) = lattice_index(w, q, ctx.guard) {
                        return Err(QawError::ThetaZero(format!("{what} = q^{m} at (i, j) = ({}, {})", i + 1, j + 1)));
                    }
                }
            }
        }
        Ok(ThetaTuple { xs, ctx })
    }

    pub fn xs(&self) -> &[C64] {
        &self.xs
    }

    /// N = len - 2.
    pub fn n(&self) -> usize {
        self.xs.len() - 2
    }

    fn th(&self, z: C64) -> C64 {
        theta_raw(z, self.ctx.q, self.ctx.eps)
    }

    fn pair_product(&self, k: usize) -> C64 {
        let xk = self.xs[k];
        self.xs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, &xi)| self.th(xi * xk) * self.th(xi / xk))
            .product()
    }

    fn snapshot(&self) -> ParamSnapshot {
        ParamSnapshot::values(self.n(), self.ctx.q, &self.xs)
    }
}

pub const FOUR_TERM_TOL: f64 = 1e-11;

/// sum_k theta(x_k^-2)/prod_{i != k} theta(x_i x_k) theta(x_i/x_k) - 2 theta(x1x2x3x4)/prod_{i<j} theta(x_i x_j).
pub fn four_term_theta_residual(t: &ThetaTuple) -> Result<ResidualReport> {
    if t.xs.len() != 4 {
        return Err(QawError::InvalidInput(format!("four-term identity takes 4 values, got {}", t.xs.len())));
    }
    let mut terms: Vec<C64> = (0..4).map(|k| t.th(1.0 / (t.xs[k] * t.xs[k])) / t.pair_product(k)).collect();
    let all: C64 = t.xs.iter().product();
    let mut den = c(1.0, 0.0);
    for i in 0..4 {
        for j in i + 1..4 {
            den *= t.th(t.xs[i] * t.xs[j]);
        }
    }
    terms.push(-2.0 * t.th(all) / den);
    Ok(ResidualReport::from_terms("four_term_theta", t.snapshot(), &terms, FOUR_TERM_TOL))
}

/// The summands of R, one per slot.
pub fn r_terms(t: &ThetaTuple) -> Result<Vec<C64>> {
    let n = t.n();
    if n == 0 {
        return Err(QawError::InvalidInput("R needs N >= 1".into()));
    }
    let half = n as f64 / 2.0;
    let p = t.ctx.qpow(c(half, 0.0));
    Ok(t.xs
        .iter()
        .enumerate()
        .map(|(k, &xk)| {
            xk.powc(c(half - 1.0, 0.0)) * theta_raw(xk.powi(-(n as i32)), p, t.ctx.eps) / t.pair_product(k)
        })
        .collect())
}

fn pair_theta_product(t: &ThetaTuple) -> C64 {
    let mut v = c(1.0, 0.0);
    for i in 0..t.xs.len() {
        for j in i + 1..t.xs.len() {
            v *= t.th(t.xs[i] * t.xs[j]);
        }
    }
    v
}

/// R(x) = sum_k x_k^{N/2-1} theta(x_k^-N; q^{N/2}) / prod_{i != k} theta(x_i x_k) theta(x_i/x_k).
pub fn r_function(t: &ThetaTuple) -> Result<C64> {
    Ok(r_terms(t)?.iter().sum())
}

/// f = R(x) prod_{i<j} theta(x_i x_j).
pub fn f_reconstruct(t: &ThetaTuple) -> Result<C64> {
    Ok(r_function(t)? * pair_theta_product(t))
}

pub const QUASI_TOL: f64 = 1e-10;

/// f(.., q x_i, ..) - (-1)^{N+1} f / ((prod x) x_i^{N-2}).
pub fn quasi_periodicity_residual(t: &ThetaTuple, i: usize) -> Result<ResidualReport> {
    if i >= t.xs.len() {
        return Err(QawError::InvalidInput(format!("slot {i} out of range")));
    }
    let n = t.n() as i32;
    let mut ys = t.xs.clone();
    ys[i] *= t.ctx.q;
    let st = ThetaTuple::new(ys, t.ctx)?;
    let sp = pair_theta_product(&st);
    let mut terms: Vec<C64> = r_terms(&st)?.into_iter().map(|r| r * sp).collect();
    let all: C64 = t.xs.iter().product();
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let k = -sign * pair_theta_product(t) / (all * t.xs[i].powi(n - 2));
    terms.extend(r_terms(t)?.into_iter().map(|r| r * k));
    let snap = t.snapshot().with("slot", c((i + 1) as f64, 0.0));
    Ok(ResidualReport::from_terms("quasi_periodicity", snap, &terms, QUASI_TOL))
}

/// R(1/x_1, ..., 1/x_{N+2}) + (prod x)^2 R(x).
pub fn inversion_residual(t: &ThetaTuple) -> Result<ResidualReport> {
    let inv = ThetaTuple::new(t.xs.iter().map(|&x| 1.0 / x).collect(), t.ctx)?;
    let all: C64 = t.xs.iter().product();
    let mut terms = r_terms(&inv)?;
    terms.extend(r_terms(t)?.into_iter().map(|r| all * all * r));
    Ok(ResidualReport::from_terms("r_inversion", t.snapshot(), &terms, QUASI_TOL))
}

/// f - 2 theta(x1 x2 x3 x4) at N = 2.
pub fn n2_closed_residual(t: &ThetaTuple) -> Result<ResidualReport> {
    if t.n() != 2 {
        return Err(QawError::InvalidInput(format!("N = 2 closed form needs 4 values, got {}", t.xs.len())));
    }
    let all: C64 = t.xs.iter().product();
    let pt = pair_theta_product(t);
    let mut terms: Vec<C64> = r_terms(t)?.into_iter().map(|r| r * pt).collect();
    terms.push(-2.0 * t.th(all));
    Ok(ResidualReport::from_terms("f_n2_closed", t.snapshot(), &terms, FOUR_TERM_TOL))
}
