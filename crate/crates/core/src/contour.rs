//! Direct evaluation of I_N: trapezoid quadrature on the unit circle, the
//! branch-cut tail for odd N, residues of poles that left the unit disc,
//! the Askey-Wilson product and moment accessors.
//!
//! Normalisation: I_N = (1/2 pi) int Phi(e^{i theta}) d theta (+ tail).

use std::fmt;
use std::str::FromStr;

use crate::integrand::{f_laurent, phi_on_circle, phi_without_factor, FamilyParams, Laurent};
use crate::qdiff::{ParamSnapshot, ResidualReport};
use crate::qkernel::{pinf, pole_index, QContext};
use crate::{c, fmt_c, jackson, QawError, Result, C64};

/// Orientation of the tail, calibrated against the residue sum at the
/// N = 3 reference point.
pub const TAIL_SIGN: f64 = 1.0;

/// First node count of the circle rule.
pub const CIRCLE_START: usize = 64;

// Tail panels stop after this many consecutive negligible panels.
const QUIET_PANELS: usize = 3;
const U_MIN: f64 = 640.0;
const U_CAP: f64 = 1.0e5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Circle,
    CirclePlusTail,
    ResidueFull,
    ResidueReduced,
    ClosedForm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Circle,
        Method::CirclePlusTail,
        Method::ResidueFull,
        Method::ResidueReduced,
        Method::ClosedForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Circle => "circle",
            Method::CirclePlusTail => "circle_plus_tail",
            Method::ResidueFull => "residue_full",
            Method::ResidueReduced => "residue_reduced",
            Method::ClosedForm => "closed_form",
        }
    }

    /// Circle for even N, circle plus tail for odd N.
    pub fn default_for(n: usize) -> Method {
        if n.is_multiple_of(2) {
            Method::Circle
        } else {
            Method::CirclePlusTail
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = QawError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| QawError::InvalidInput(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: C64,
    pub method: Method,
    pub nodes_or_terms: usize,
    pub est_error: f64,
    pub tail_omitted: bool,
}

fn check_circle_clear(p: &FamilyParams) -> Result<()> {
    let lq = p.q().norm().ln();
    for (j, &x) in p.a().iter().enumerate() {
        let nu = (x.norm().ln() / -lq).round();
        if nu >= 0.0 {
            let r = x.norm() * p.q().norm().powf(nu);
            if (r - 1.0).abs() < p.ctx.guard {
                return Err(QawError::PoleProximity(format!(
                    "pole a_{} q^{nu} lies on the unit circle",
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn circle_sum(p: &FamilyParams, ins: &Laurent, m: usize) -> Result<(C64, f64)> {
    let mut s = c(0.0, 0.0);
    let mut abs = 0.0;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let odd = p.n() % 2 == 1;
    for k in 0..m {
        let t = -std::f64::consts::PI + h * (k as f64 + 0.5);
        // For odd N the integrand has a kink at z = -1; theta(t) flattens
        // it with theta' = (2/3)(1 + cos t)^2.
        let (th, jac) = if odd {
            (t + 4.0 / 3.0 * t.sin() + (2.0 * t).sin() / 6.0, 2.0 / 3.0 * (1.0 + t.cos()).powi(2))
        } else {
            (t, 1.0)
        };
        let v = phi_on_circle(th, p)? * ins.eval(C64::from_polar(1.0, th)) * jac;
        abs += v.norm();
        s += v;
    }
    Ok((s / m as f64, abs / m as f64))
}

/// (1/2 pi) int phi(e^{i theta}) Phi(e^{i theta}) d theta by midpoint
/// trapezoid, doubling the node count from 64.
pub fn circle_with(p: &FamilyParams, ins: &Laurent) -> Result<IntegralResult> {
    check_circle_clear(p)?;
    let mut m = CIRCLE_START;
    let (mut prev, _) = circle_sum(p, ins, m)?;
    let mut nodes = m;
    for _ in 0..p.ctx.quad_max_doublings {
        m *= 2;
        let (cur, mean_abs) = circle_sum(p, ins, m)?;
        nodes += m;
        let diff = (cur - prev).norm();
        let floor = 32.0 * f64::EPSILON * mean_abs;
        if diff <= (p.ctx.eps * cur.norm().max(1.0)).max(floor) {
            return Ok(IntegralResult {
                value: cur,
                method: Method::Circle,
                nodes_or_terms: nodes,
                est_error: diff.max(floor),
                tail_omitted: p.n() % 2 == 1,
            });
        }
        prev = cur;
    }
    Err(QawError::NoConvergence(format!(
        "circle rule not settled after {} doublings",
        p.ctx.quad_max_doublings
    )))
}

/// The circle component of I_N. For odd N it is flagged `tail_omitted`.
pub fn integrate_circle(p: &FamilyParams) -> Result<IntegralResult> {
    circle_with(p, &Laurent::one())
}

/// sum_k log(1 - exp(lw + k lq)), the log of (w;q)_inf given log w.
fn ln_pinf(lw: C64, lq: C64, eps: f64, guard: f64) -> Result<C64> {
    let mut s = c(0.0, 0.0);
    let mut l = lw;
    let cut = (eps * 0.01).ln();
    let mut k = 0;
    while l.re >= cut {
        let w = l.exp();
        if (1.0 - w).norm() < guard {
            return Err(QawError::PoleProximity(format!("tail integrand factor 1 - {} vanishes", fmt_c(w))));
        }
        s += if l.re > 0.0 {
            // log(1 - w) = log(-w) + log(1 - 1/w)
            l + c(0.0, std::f64::consts::PI) + (1.0 - (-l).exp()).ln()
        } else {
            (1.0 - w).ln()
        };
        l += lq;
        k += 1;
        if k > 1_000_000 {
            break;
        }
    }
    Ok(s)
}

struct TailKernel<'a> {
    p: &'a FamilyParams,
    ins: &'a Laurent,
    growth: i32,
    lq: C64,
    lp: C64,
    la: Vec<C64>,
    sign: f64,
}

impl<'a> TailKernel<'a> {
    fn new(p: &'a FamilyParams, ins: &'a Laurent) -> Self {
        let lq = p.q().ln();
        let n = p.n();
        let sign = if ((n - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        TailKernel {
            p,
            ins,
            growth: ins.growth().max(ins.lo),
            lq,
            lp: lq * (n as f64 / 2.0),
            la: p.a().iter().map(|&x| x.ln() + c(0.0, std::f64::consts::PI)).collect(),
            sign,
        }
    }

    /// Jump of phi Phi / (2 pi i) across the cut at x = e^u.
    fn jump(&self, u: f64) -> Result<C64> {
        if u <= 0.0 {
            return Ok(c(0.0, 0.0));
        }
        let n = self.p.n() as f64;
        let eps = self.p.ctx.eps;
        let g = self.p.ctx.guard;
        let lxn = c(n * u, std::f64::consts::PI);
        let mut lr = ln_pinf(self.lp + lxn, self.lp, eps, g)? + ln_pinf(self.lp - lxn, self.lp, eps, g)?;
        for &la in &self.la {
            lr -= ln_pinf(la + u, self.lq, eps, g)? + ln_pinf(la - u, self.lq, eps, g)?;
        }
        // log(x - 1/x) and log(x^{N/2} + x^{-N/2})
        let l_sinh = u + (-(-2.0 * u).exp()).ln_1p();
        let y = n * u / 2.0;
        let l_cosh = y + (-2.0 * y).exp().ln_1p();
        let gr = self.growth as f64;
        let total = lr + l_sinh + l_cosh + gr * u;
        if total.re < -740.0 {
            return Ok(c(0.0, 0.0));
        }
        let mut inner = c(0.0, 0.0);
        for (i, &ck) in self.ins.c.iter().enumerate() {
            let k = self.ins.lo + i as i32;
            let sgn = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            inner += ck * sgn * ((k as f64 - gr) * u).exp();
        }
        Ok(total.exp() * inner * (self.sign * TAIL_SIGN / std::f64::consts::PI))
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> Result<C64>, a: f64, b: f64) -> Result<(C64, f64)> {
    let h = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let fc = f(mid)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(mid - x)? + f(mid + x)?;
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    Ok((k * h, ((k - g) * h).norm()))
}

fn gk_adapt(f: &dyn Fn(f64) -> Result<C64>, a: f64, b: f64, tol: f64, depth: u32, evals: &mut usize) -> Result<(C64, f64)> {
    let (v, e) = gk15(f, a, b)?;
    *evals += 15;
    if e <= tol || depth >= 40 {
        return Ok((v, e));
    }
    let m = (a + b) / 2.0;
    let (v1, e1) = gk_adapt(f, a, m, tol / 2.0, depth + 1, evals)?;
    let (v2, e2) = gk_adapt(f, m, b, tol / 2.0, depth + 1, evals)?;
    Ok((v1 + v2, e1 + e2))
}

fn check_tail_domain(p: &FamilyParams, growth: i32) -> Result<()> {
    if p.n().is_multiple_of(2) {
        return Err(QawError::InvalidInput(format!("no tail for even N = {}", p.n())));
    }
    let s = p.sum_re_s() + growth as f64;
    if s >= (p.n() - 1) as f64 {
        return Err(QawError::Divergence(format!(
            "tail diverges: sum Re s_j + {growth} = {s:.6} is not below N - 1 = {}",
            p.n() - 1
        )));
    }
    Ok(())
}

/// Tail with an inserted Laurent factor, integrated in u = log x over
/// panels [0,1], [1,2], [2,4], ... until three panels in a row are
/// negligible against `scale`.
pub fn tail_with(p: &FamilyParams, ins: &Laurent, scale: f64) -> Result<IntegralResult> {
    let growth = ins.growth();
    check_tail_domain(p, growth)?;
    let ker = TailKernel::new(p, ins);
    let f = |u: f64| ker.jump(u);
    let tol = p.ctx.eps * scale.max(1.0);
    let mut total = c(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0usize;
    // |jump| decays like x^-d; go far enough for x^-d to drop below tol
    let d = (p.n() - 1) as f64 - p.sum_re_s() - growth as f64;
    let u_max = (8.0 * -(tol * 0.01).ln() / d).clamp(U_MIN, U_CAP);
    let (mut a, mut b) = (0.0, 1.0);
    let mut quiet = 0;
    while a < u_max {
        let (v, e) = gk_adapt(&f, a, b, tol / 8.0, 0, &mut evals)?;
        total += v;
        err += e;
        if v.norm() + e <= tol * 0.01 {
            quiet += 1;
            if quiet >= QUIET_PANELS {
                return Ok(IntegralResult {
                    value: total,
                    method: Method::CirclePlusTail,
                    nodes_or_terms: evals,
                    est_error: err,
                    tail_omitted: false,
                });
            }
        } else {
            quiet = 0;
        }
        a = b;
        b *= 2.0;
    }
    Err(QawError::NoConvergence(format!("tail still contributing at log x = {a}")))
}

/// (1/2 pi i) int_1^inf [Phi(x e^{i pi}) - Phi(x e^{-i pi})] dx/x for odd N.
pub fn integrate_tail(p: &FamilyParams) -> Result<IntegralResult> {
    tail_with(p, &Laurent::one(), 1.0)
}

/// Poles a_k q^nu outside the closed unit disc, as (k, nu).
pub fn escaped_poles(p: &FamilyParams) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (k, &x) in p.a().iter().enumerate() {
        let mut w = x;
        let mut nu = 0;
        while w.norm() >= 1.0 - p.ctx.guard {
            if (w.norm() - 1.0).abs() < p.ctx.guard {
                return Err(QawError::PoleProximity(format!("pole a_{} q^{nu} on the unit circle", k + 1)));
            }
            if p.n() % 2 == 1 && w.re < 0.0 && w.im.abs() < p.ctx.guard * w.norm() {
                return Err(QawError::PoleProximity(format!("pole a_{} q^{nu} on the branch cut", k + 1)));
            }
            out.push((k, nu));
            w *= p.q();
            nu += 1;
        }
    }
    Ok(out)
}

/// Contribution of escaped poles: (phi(w) + phi(1/w)) Res_{z=w} Phi(z)/z
/// for each pole w = a_k q^nu with |w| > 1.
fn residue_correction(p: &FamilyParams, ins: &Laurent) -> Result<(C64, usize)> {
    let poles = escaped_poles(p)?;
    let mut s = c(0.0, 0.0);
    for &(k, nu) in &poles {
        let w = p.a()[k] * p.q().powi(nu as i32);
        s += (ins.eval(w) + ins.eval(1.0 / w)) * phi_without_factor(w, p, k, nu);
    }
    Ok((s, poles.len()))
}

/// The full contour functional L[phi] = circle + tail (odd N) + escaped residues.
pub fn contour_functional(p: &FamilyParams, ins: &Laurent) -> Result<IntegralResult> {
    let circ = circle_with(p, ins)?;
    let (res, npoles) = if p.needs_continuation() { residue_correction(p, ins)? } else { (c(0.0, 0.0), 0) };
    let mut out = IntegralResult {
        value: circ.value + res,
        method: Method::Circle,
        nodes_or_terms: circ.nodes_or_terms + npoles,
        est_error: circ.est_error,
        tail_omitted: false,
    };
    if p.n() % 2 == 1 {
        let t = tail_with(p, ins, circ.value.norm())?;
        out.value += t.value;
        out.nodes_or_terms += t.nodes_or_terms;
        out.est_error += t.est_error;
        out.method = Method::CirclePlusTail;
    }
    Ok(out)
}

/// Dispatch on the evaluation method.
pub fn eval_in(p: &FamilyParams, method: Method) -> Result<IntegralResult> {
    match method {
        Method::Circle => {
            if p.n().is_multiple_of(2) {
                contour_functional(p, &Laurent::one())
            } else {
                integrate_circle(p)
            }
        }
        Method::CirclePlusTail => {
            if p.n().is_multiple_of(2) {
                return Err(QawError::InvalidInput(format!("circle_plus_tail needs odd N, got {}", p.n())));
            }
            contour_functional(p, &Laurent::one())
        }
        Method::ResidueFull => jackson::in_residue(p, false),
        Method::ResidueReduced => jackson::in_residue(p, true),
        Method::ClosedForm => {
            if p.n() != 2 {
                return Err(QawError::InvalidInput(format!("closed_form needs N = 2, got {}", p.n())));
            }
            let v = aw_closed_i2(p.a(), &p.ctx)?;
            Ok(IntegralResult { value: v, method, nodes_or_terms: 0, est_error: 0.0, tail_omitted: false })
        }
    }
}

/// 2 (a1 a2 a3 a4; q)_inf / ((q;q)_inf prod_{j<k} (a_j a_k; q)_inf).
pub fn aw_closed_i2(a: &[C64], ctx: &QContext) -> Result<C64> {
    if a.len() != 4 {
        return Err(QawError::InvalidInput(format!("closed form takes 4 parameters, got {}", a.len())));
    }
    let q = ctx.q;
    let mut den = pinf(q, q, ctx.eps);
    for j in 0..4 {
        for k in j + 1..4 {
            let w = a[j] * a[k];
            if let Some(m) = pole_index(w, q, ctx.guard) {
                return Err(QawError::PoleProximity(format!("a_{} a_{} = q^-{m}", j + 1, k + 1)));
            }
            den *= pinf(w, q, ctx.eps);
        }
    }
    let s4 = a[0] * a[1] * a[2] * a[3];
    Ok(2.0 * pinf(s4, q, ctx.eps) / den)
}

/// I_N with a_j replaced by q^{shift_j} a_j, by the default method.
pub fn moment(p: &FamilyParams, shifts: &[u32]) -> Result<IntegralResult> {
    moment_with(p, shifts, Method::default_for(p.n()))
}

pub fn moment_with(p: &FamilyParams, shifts: &[u32], method: Method) -> Result<IntegralResult> {
    let s: Vec<i64> = shifts.iter().map(|&k| k as i64).collect();
    eval_in(&p.shifted(&s)?, method)
}

/// The contour functional of z^power Phi(z), power in {-1, 0, 1}.
pub fn moment_monomial(p: &FamilyParams, power: i32) -> Result<IntegralResult> {
    match power {
        0 => eval_in(p, Method::default_for(p.n())),
        -1 | 1 => contour_functional(p, &Laurent::monomial(power)),
        _ => Err(QawError::InvalidInput(format!("monomial power {power} not in {{-1, 0, 1}}"))),
    }
}

/// Both readings of L[F Phi] = 0: the full contour (circle, tail and escaped
/// residues) and the circle alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RootIdentity {
    pub full: ResidualReport,
    pub circle_only: ResidualReport,
}

pub const ROOT_IDENTITY_TOL: f64 = 1e-6;

/// L[F Phi] split into its Laurent terms Q_k L[z^k Phi]; residuals are
/// normalised by the largest term.
pub fn root_identity(p: &FamilyParams) -> Result<RootIdentity> {
    let f = f_laurent(p);
    let mut full = Vec::new();
    let mut circ = Vec::new();
    for (i, &qk) in f.c.iter().enumerate() {
        let ins = Laurent::monomial(f.lo + i as i32);
        circ.push(qk * circle_with(p, &ins)?.value);
    }
    for (i, &qk) in f.c.iter().enumerate() {
        let ins = Laurent::monomial(f.lo + i as i32);
        full.push(qk * contour_functional(p, &ins)?.value);
    }
    let snap = ParamSnapshot::of(p);
    Ok(RootIdentity {
        full: ResidualReport::from_terms("root_identity", snap.clone(), &full, ROOT_IDENTITY_TOL),
        circle_only: ResidualReport::from_terms("root_identity_circle_only", snap, &circ, ROOT_IDENTITY_TOL),
    })
}
