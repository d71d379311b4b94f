//! The `qaw` command line: `eval` prints one integral as JSON, `verify`
//! runs a named suite of residual checks and prints a JSON report.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 evaluation
//! failure.

use std::ffi::OsString;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::contour::{aw_closed_i2, eval_in, moment_monomial, root_identity};
use crate::jackson::{i2_j2_relation, j2_bilateral_residual, sears_slater_residual, ss_truncated_residual};
use crate::qdiff::*;
use crate::qkernel::qpoch_n;
use crate::thetakit::{
    four_term_theta_residual, inversion_residual, n2_closed_residual, quasi_periodicity_residual, ThetaTuple,
};
use crate::{FamilyParams, Method, QContext, QawError, ResidualReport, Result, C64};

#[derive(Parser, Debug)]
#[command(name = "qaw", version, about = "Evaluate I_N and verify its identities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate I_N at one parameter point.
    Eval {
        #[command(flatten)]
        point: PointArgs,
        /// circle, circle_plus_tail, residue_full, residue_reduced or closed_form
        #[arg(long)]
        method: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        suite: Suite,
        #[command(flatten)]
        point: PointArgs,
        /// Override every case tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct PointArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Base q, real or complex such as 0.1+0.02i.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Comma-separated parameters a_1..a_2N.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// With --t and four values in --a: a_5 = alpha t, a_6 = alpha / t.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub json: bool,
    #[arg(long)]
    pub max_terms: Option<usize>,
    /// Series and quadrature tolerance.
    #[arg(long, env = "QAW_EPS")]
    pub eps: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    AwClosedForm,
    Pearson,
    Expansions,
    RecurrenceEven,
    MatrixSystem,
    MixedEquation,
    N3Series,
    CrossEvaluators,
    RootIdentity,
    SearsSlater,
    ThetaIdentity,
    Moments,
    UPoly,
    All,
}

impl Suite {
    const EACH: [Suite; 13] = [
        Suite::AwClosedForm,
        Suite::Pearson,
        Suite::Expansions,
        Suite::RecurrenceEven,
        Suite::MatrixSystem,
        Suite::MixedEquation,
        Suite::N3Series,
        Suite::CrossEvaluators,
        Suite::RootIdentity,
        Suite::SearsSlater,
        Suite::ThetaIdentity,
        Suite::Moments,
        Suite::UPoly,
    ];

    fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

/// Named reference points.
#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// N = 2, q = 0.1, a = (0.5, 0.6, 0.7, 0.8)
    AwRef,
    /// N = 3, q = 0.01, a = (0.45, 0.5, 0.55, 0.6, 0.65, 0.7)
    N3Ref,
    /// N = 4, q = 0.1, a = (0.40, 0.45, ..., 0.75)
    N4Ref,
    /// N = 3, q = 0.1, a_1..4 = (0.3, 0.4, 0.5, 0.7), alpha = 0.6, t = 1.2
    W87Ref,
    /// N = 3, q = 0.1, a_1..4 = (0.8, 0.85, 0.9, 0.95), alpha = 0.6, t = 1.2
    LemmaRef,
    /// n3-ref with a_1, a_2 divided by q
    N3Lifted,
    /// n3-ref with a_6 = 30
    N3Cont,
}

impl Preset {
    fn name(self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }

    /// (N, q, a, alpha and t when the point is an alpha family).
    fn raw(self) -> (usize, f64, Vec<f64>, Option<(f64, f64)>) {
        match self {
            Preset::AwRef => (2, 0.1, vec![0.5, 0.6, 0.7, 0.8], None),
            Preset::N3Ref => (3, 0.01, vec![0.45, 0.5, 0.55, 0.6, 0.65, 0.7], None),
            Preset::N4Ref => (4, 0.1, vec![0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75], None),
            Preset::W87Ref => (3, 0.1, vec![0.3, 0.4, 0.5, 0.7], Some((0.6, 1.2))),
            Preset::LemmaRef => (3, 0.1, vec![0.8, 0.85, 0.9, 0.95], Some((0.6, 1.2))),
            Preset::N3Lifted => (3, 0.01, vec![45.0, 50.0, 0.55, 0.6, 0.65, 0.7], None),
            Preset::N3Cont => (3, 0.01, vec![0.45, 0.5, 0.55, 0.6, 0.65, 30.0], None),
        }
    }
}

/// A resolved evaluation point.
#[derive(Debug, Clone)]
pub struct Point {
    pub label: String,
    pub params: FamilyParams,
    pub family: Option<(AlphaFamily, C64)>,
}

#[derive(Debug, Clone, Copy, Default)]
struct CtxCfg {
    eps: Option<f64>,
    max_terms: Option<usize>,
}

impl CtxCfg {
    fn build(&self, q: C64) -> Result<QContext> {
        let mut ctx = QContext::new(q)?;
        if let Some(e) = self.eps {
            ctx = ctx.with_eps(e)?;
        }
        if let Some(m) = self.max_terms {
            ctx = ctx.with_max_terms(m)?;
        }
        Ok(ctx)
    }
}

fn bad(msg: String) -> QawError {
    QawError::InvalidInput(msg)
}

/// Parses 0.5, -1e-3, 0.2i, 0.1+0.02i, 0.1-2e-3i.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let err = || bad(format!("cannot parse '{s}' as a number"));
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| err());
    };
    // split at the last sign that is not the leading one or an exponent sign
    let bytes = body.as_bytes();
    let mut cut = None;
    for k in (1..bytes.len()).rev() {
        if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
            cut = Some(k);
            break;
        }
    }
    let im_of = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| err()),
        }
    };
    match cut {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| err())?;
            Ok(C64::new(re, im_of(&body[k..])?))
        }
        None => Ok(C64::new(0.0, im_of(body)?)),
    }
}

fn parse_list(s: &str) -> Result<Vec<C64>> {
    s.split(',').map(parse_complex).collect()
}

fn make_params(n: usize, a: Vec<C64>, ctx: QContext) -> Result<FamilyParams> {
    if a.iter().any(|x| x.norm() >= 1.0) {
        FamilyParams::new_continued(n, a, ctx)
    } else {
        FamilyParams::new(n, a, ctx)
    }
}

fn preset_point(p: Preset, cfg: &CtxCfg) -> Result<Point> {
    let (n, q, a, fam) = p.raw();
    let ctx = cfg.build(C64::new(q, 0.0))?;
    let a: Vec<C64> = a.into_iter().map(|x| C64::new(x, 0.0)).collect();
    point_from(p.name(), n, a, fam.map(|(x, t)| (C64::new(x, 0.0), C64::new(t, 0.0))), ctx)
}

fn point_from(label: String, n: usize, a: Vec<C64>, fam: Option<(C64, C64)>, ctx: QContext) -> Result<Point> {
    match fam {
        Some((alpha, t)) => {
            if n != 3 || a.len() != 4 {
                return Err(bad(format!(
                    "--alpha/--t need N = 3 and four values in --a, got N = {n} and {} values",
                    a.len()
                )));
            }
            let f = AlphaFamily::new([a[0], a[1], a[2], a[3]], alpha, ctx)?;
            Ok(Point { label, params: f.params(t)?, family: Some((f, t)) })
        }
        None => Ok(Point { label, params: make_params(n, a, ctx)?, family: None }),
    }
}

impl PointArgs {
    fn cfg(&self) -> CtxCfg {
        CtxCfg { eps: self.eps, max_terms: self.max_terms }
    }

    fn explicit(&self) -> bool {
        self.preset.is_some() || self.a.is_some()
    }

    /// The point named by the flags; None when neither --preset nor --a is given.
    fn resolve(&self) -> Result<Option<Point>> {
        if !self.explicit() {
            if self.q.is_some() || self.alpha.is_some() || self.t.is_some() {
                return Err(bad("--q, --alpha and --t need --a or --preset".into()));
            }
            return Ok(None);
        }
        let (mut n, mut q, mut a, mut fam, mut label) = match self.preset {
            Some(p) => {
                let (n, q, a, fam) = p.raw();
                (
                    n,
                    C64::new(q, 0.0),
                    a.into_iter().map(|x| C64::new(x, 0.0)).collect(),
                    fam.map(|(x, t)| (C64::new(x, 0.0), C64::new(t, 0.0))),
                    p.name(),
                )
            }
            None => (0, C64::new(0.0, 0.0), Vec::new(), None, "custom".to_string()),
        };
        if let Some(s) = &self.a {
            a = parse_list(s)?;
            label = "custom".into();
            fam = None;
        }
        if let Some(s) = &self.q {
            q = parse_complex(s)?;
            label = "custom".into();
        } else if self.preset.is_none() {
            return Err(bad("--q is required with --a".into()));
        }
        if self.alpha.is_some() || self.t.is_some() {
            // either one may override the preset's value
            let pick = |s: &Option<String>, old: Option<C64>| -> Result<C64> {
                match s {
                    Some(s) => parse_complex(s),
                    None => old.ok_or_else(|| bad("--alpha and --t go together".into())),
                }
            };
            fam = Some((pick(&self.alpha, fam.map(|f| f.0))?, pick(&self.t, fam.map(|f| f.1))?));
            label = "custom".into();
        }
        let len = a.len() + if fam.is_some() { 2 } else { 0 };
        if let Some(m) = self.n {
            n = m;
        } else if self.preset.is_none() || self.a.is_some() {
            if len % 2 == 1 {
                return Err(bad(format!("expected 2N parameters, got {len}")));
            }
            n = len / 2;
        }
        if len != 2 * n {
            return Err(bad(format!("N = {n} needs {} parameters, got {len}", 2 * n)));
        }
        let ctx = self.cfg().build(q)?;
        point_from(label, n, a, fam, ctx).map(Some)
    }
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn snapshot_json(s: &ParamSnapshot) -> Value {
    let extra: serde_json::Map<String, Value> = s.extra.iter().map(|(k, v)| (k.clone(), cjson(*v))).collect();
    json!({
        "N": s.n,
        "q": cjson(s.q),
        "a": s.a.iter().map(|&x| cjson(x)).collect::<Vec<_>>(),
        "extra": extra,
    })
}

fn error_kind(e: &QawError) -> &'static str {
    match e {
        QawError::InvalidInput(_) => "invalid_input",
        QawError::PoleProximity(_) => "pole_proximity",
        QawError::ThetaZero(_) => "theta_zero",
        QawError::Divergence(_) => "divergence",
        QawError::NoConvergence(_) => "no_convergence",
        QawError::UnsupportedDomain(_) => "unsupported_domain",
        QawError::Degenerate(_) => "degenerate",
    }
}

fn exit_code(e: &QawError) -> i32 {
    match e {
        QawError::InvalidInput(_) => 2,
        _ => 3,
    }
}

fn report_error(e: &QawError, json_out: bool) -> i32 {
    if json_out {
        println!("{}", json!({"error": error_kind(e), "message": e.to_string()}));
    }
    eprintln!("qaw: {e}");
    exit_code(e)
}

fn cmd_eval(point: &PointArgs, method: Option<&str>) -> Result<Value> {
    let pt = point.resolve()?.ok_or_else(|| bad("eval needs --a or --preset".into()))?;
    let p = &pt.params;
    let m = match method {
        Some(s) => s.parse::<Method>()?,
        None => Method::default_for(p.n()),
    };
    let r = eval_in(p, m)?;
    if !(r.value.is_finite() && r.est_error.is_finite()) {
        return Err(QawError::NoConvergence("non-finite result".into()));
    }
    Ok(json!({
        "method": r.method.name(),
        "N": p.n(),
        "q": cjson(p.q()),
        "a": p.a().iter().map(|&x| cjson(x)).collect::<Vec<_>>(),
        "value_re": r.value.re,
        "value_im": r.value.im,
        "est_error": r.est_error,
        "nodes_or_terms": r.nodes_or_terms,
        "tail_omitted": r.tail_omitted,
    }))
}

/// One checked identity at one point.
#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub report: ResidualReport,
}

struct SuiteRun {
    cases: Vec<Case>,
    exploratory: Vec<Case>,
}

struct SuiteCtx {
    point: Option<Point>,
    n_hint: Option<usize>,
    seed: u64,
    cfg: CtxCfg,
}

impl SuiteCtx {
    /// The given point, or the suite's default presets (filtered by --n).
    fn points(&self, defaults: &[Preset]) -> Result<Vec<Point>> {
        if let Some(p) = &self.point {
            return Ok(vec![p.clone()]);
        }
        let mut out = Vec::new();
        for &d in defaults {
            let p = preset_point(d, &self.cfg)?;
            if self.n_hint.is_none_or(|n| n == p.params.n()) {
                out.push(p);
            }
        }
        if out.is_empty() {
            return Err(bad(format!("no default point with N = {}; pass --a", self.n_hint.unwrap_or(0))));
        }
        Ok(out)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
    }
}

fn random_z(r: &mut ChaCha8Rng) -> C64 {
    let m = r.gen_range(0.5f64.ln()..2.0f64.ln()).exp();
    C64::from_polar(m, r.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

fn case(label: &str, tag: &str, report: ResidualReport) -> Case {
    Case { name: format!("{label}/{tag}"), report }
}

fn compare(label: &str, tag: &str, identity: &str, snap: ParamSnapshot, x: C64, y: C64, tol: f64) -> Case {
    case(label, tag, ResidualReport::from_terms(identity, snap, &[x, -y], tol))
}

fn residue_ok(p: &FamilyParams) -> bool {
    p.prod_a().norm() > p.q().norm().powi(p.n() as i32 - 1)
}

fn suite_aw_closed_form(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut pts = cx.points(&[Preset::AwRef])?;
    if cx.point.is_none() {
        let mut r = cx.rng(11);
        let ctx = cx.cfg.build(C64::new(0.1, 0.0))?;
        while pts.len() < 6 {
            let a: Vec<C64> = (0..4).map(|_| C64::new(r.gen_range(-0.8..0.8), 0.0)).collect();
            if let Ok(p) = FamilyParams::new(2, a, ctx) {
                pts.push(Point { label: format!("random{}", pts.len()), params: p, family: None });
            }
        }
    }
    let mut cases = Vec::new();
    for pt in &pts {
        let p = &pt.params;
        if p.n() != 2 {
            return Err(bad(format!("aw-closed-form needs N = 2, got {}", p.n())));
        }
        let closed = aw_closed_i2(p.a(), &p.ctx)?;
        let snap = ParamSnapshot::of(p);
        let quad = eval_in(p, Method::Circle)?.value;
        cases.push(compare(&pt.label, "quadrature", "aw_closed_form", snap.clone(), quad, closed, 1e-10));
        if residue_ok(p) {
            for m in [Method::ResidueFull, Method::ResidueReduced] {
                let v = eval_in(p, m)?.value;
                cases.push(compare(&pt.label, m.name(), "aw_closed_form", snap.clone(), v, closed, 1e-9));
            }
        }
        let mut rep = recurrence_residual(p, Recurrence::OrderNMinus1, Evaluator::Quadrature)?;
        rep.tolerance = 1e-10;
        rep.pass = rep.residual_rel <= 1e-10;
        cases.push(case(&pt.label, "two_term", rep));
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_pearson(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let mut r = cx.rng(12);
    for pt in cx.points(&[Preset::AwRef, Preset::N3Ref, Preset::N4Ref])? {
        for k in 0..10 {
            let z = random_z(&mut r);
            cases.push(case(&pt.label, &format!("pearson/{k:02}"), pearson_residual(&pt.params, z)?));
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_expansions(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let mut r = cx.rng(13);
    for pt in cx.points(&[Preset::AwRef, Preset::N3Ref, Preset::N4Ref])? {
        let p = &pt.params;
        let base = p.a()[0];
        let l = &pt.label;
        for k in 0..10 {
            let z = random_z(&mut r);
            cases.push(case(l, &format!("lem_g/{k:02}"), lem_g_residual(p, base, z)?));
            cases.push(case(l, &format!("lem_c/{k:02}"), lemc_residual(p, z)?));
            cases.push(case(l, &format!("sum_bexp/{k:02}"), sum_bexp_residual(p, base, z)?));
            cases.push(case(l, &format!("diff_bexp/{k:02}"), diff_bexp_residual(p, base, z)?));
            cases.push(case(l, &format!("g_f_tie/{k:02}"), g_f_tie_residual(p, base, z, tie_constant_ratio(p))?));
        }
        cases.push(case(l, "cij_inverse", cij_inverse_residual(p, base)?));
        cases.push(case(l, "g_route_ratio", g_ratio_residual(p, base)?));
        let top = coeff_g_new(p, base, p.n() - 1)?;
        let snap = ParamSnapshot::of(p).with("base", base);
        cases.push(compare(l, "g_top", "g_top_closed", snap, top, coeff_g_top(p, base), 1e-12));
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn require_even(cx: &SuiteCtx, suite: &str) -> Result<()> {
    let n = cx.point.as_ref().map(|p| p.params.n()).or(cx.n_hint);
    if let Some(n) = n {
        if n % 2 == 1 {
            return Err(bad(format!("{suite} requires even N, got {n}")));
        }
    }
    Ok(())
}

fn suite_recurrence_even(cx: &SuiteCtx) -> Result<SuiteRun> {
    require_even(cx, "recurrence-even")?;
    let mut cases = Vec::new();
    for pt in cx.points(&[Preset::AwRef, Preset::N4Ref])? {
        let p = &pt.params;
        let l = &pt.label;
        let ev = Evaluator::Quadrature;
        let mut which = vec![Recurrence::OrderNMinus1, Recurrence::Mixed];
        which.push(Recurrence::T3Identity { i: 0, j: 1 });
        which.push(Recurrence::T3Identity { i: 1, j: 2 * p.n() - 1 });
        for k in 0..3 {
            which.push(Recurrence::Mrecur { k });
        }
        for w in which {
            cases.push(case(l, &w.name(), recurrence_residual(p, w, ev)?));
        }
        for (j, rep) in system_residual(p, ev)?.into_iter().enumerate() {
            cases.push(case(l, &format!("matrix_column/{j}"), rep));
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_matrix_system(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    for pt in cx.points(&[Preset::AwRef, Preset::N4Ref])? {
        let p = &pt.params;
        let l = &pt.label;
        let sys = matrix_system(p)?;
        let snap = ParamSnapshot::of(p);
        cases.push(compare(l, "det", "det_closed", snap.clone(), sys.det(), det_closed(p), 1e-12));
        let scale = sys.a.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
        cases.push(case(l, "gauss_factors", ResidualReport::from_abs("gauss_factors", snap, sys.factor_error(), scale, 1e-12)));
        for (j, rep) in system_residual(p, Evaluator::Auto)?.into_iter().enumerate() {
            cases.push(case(l, &format!("matrix_column/{j}"), rep));
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_mixed(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    for pt in cx.points(&[Preset::AwRef, Preset::N4Ref, Preset::N3Cont])? {
        let rep = recurrence_residual(&pt.params, Recurrence::Mixed, Evaluator::Auto)?;
        cases.push(case(&pt.label, "mixed", rep));
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn w87_family(cx: &SuiteCtx) -> Result<(String, AlphaFamily, C64)> {
    if let Some(Point { label, family: Some((f, t)), .. }) = &cx.point {
        return Ok((label.clone(), *f, *t));
    }
    match preset_point(Preset::W87Ref, &cx.cfg)? {
        Point { label, family: Some((f, t)), .. } => Ok((label, f, t)),
        _ => Err(bad("w87 preset lost its alpha family".into())),
    }
}

fn suite_n3_series(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let mut exploratory = Vec::new();
    let pts = if cx.point.as_ref().is_some_and(|p| p.family.is_some()) {
        Vec::new()
    } else {
        cx.points(&[Preset::N3Cont])?
    };
    for pt in &pts {
        let p = &pt.params;
        if p.n() != 3 {
            return Err(bad(format!("n3-series needs N = 3, got {}", p.n())));
        }
        for w in [Recurrence::OrderNMinus1, Recurrence::N3Single, Recurrence::N3Double] {
            cases.push(case(&pt.label, &w.name(), recurrence_residual(p, w, Evaluator::Auto)?));
        }
    }
    let (label, fam, t0) = w87_family(cx)?;
    let ts = if cx.point.is_some() { vec![t0] } else { vec![t0, C64::new(0.8, 0.0), C64::new(1.5, 0.0)] };
    for (k, &t) in ts.iter().enumerate() {
        for (s, tag) in [(Solution::First, "first"), (Solution::Second, "second")] {
            cases.push(case(&label, &format!("three_term_{tag}/{k}"), w87_three_term_residual(&fam, t, s)?));
            exploratory.push(case(&label, &format!("single_variable_{tag}/{k}"), w87_single_variable_report(&fam, t, s)?));
        }
    }
    Ok(SuiteRun { cases, exploratory })
}

fn suite_cross(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let mut pts = cx.points(&[Preset::AwRef, Preset::N3Ref, Preset::N4Ref])?;
    if cx.point.is_none() {
        // t = 1.2 puts alpha/t on a_3; move t off it
        let (label, fam, _) = w87_family(cx)?;
        pts.push(Point { label, params: fam.params(C64::new(1.25, 0.0))?, family: None });
    }
    for pt in pts {
        let p = &pt.params;
        let reference = Method::default_for(p.n());
        let base = eval_in(p, reference)?.value;
        let mut others = Vec::new();
        if residue_ok(p) {
            others.push(Method::ResidueFull);
            others.push(Method::ResidueReduced);
        }
        if p.n() == 2 {
            others.push(Method::ClosedForm);
        }
        if others.is_empty() {
            return Err(QawError::UnsupportedDomain(format!(
                "{} admits only {}",
                ParamSnapshot::of(p).describe(),
                reference
            )));
        }
        for m in others {
            let v = eval_in(p, m)?.value;
            let tag = format!("{}_vs_{}", reference.name(), m.name());
            cases.push(compare(&pt.label, &tag, "cross_evaluator", ParamSnapshot::of(p), base, v, 1e-8));
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_root_identity(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let mut exploratory = Vec::new();
    for pt in cx.points(&[Preset::AwRef, Preset::N3Lifted, Preset::N4Ref])? {
        let r = root_identity(&pt.params)?;
        cases.push(case(&pt.label, "root_identity", r.full));
        if pt.params.n() % 2 == 1 {
            exploratory.push(case(&pt.label, "root_identity_circle_only", r.circle_only));
        }
    }
    Ok(SuiteRun { cases, exploratory })
}

fn suite_sears_slater(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let mut r = cx.rng(14);
    for pt in cx.points(&[Preset::AwRef, Preset::N3Ref])? {
        let p = &pt.params;
        let l = &pt.label;
        for k in 0..10 {
            cases.push(case(l, &format!("sears_slater/{k:02}"), sears_slater_residual(random_z(&mut r), p)?));
        }
        for k in p.n() - 1..2 * p.n() {
            cases.push(case(l, &format!("truncated/{k}"), ss_truncated_residual(k, p)?));
        }
        if p.n() == 2 {
            for k in 0..3 {
                cases.push(case(l, &format!("j2_closed/{k}"), j2_bilateral_residual(random_z(&mut r), p)?));
            }
            cases.push(case(l, "i2_j2_relation", i2_j2_relation(p)?));
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_theta(cx: &SuiteCtx) -> Result<SuiteRun> {
    let q = cx.point.as_ref().map(|p| p.params.q()).unwrap_or(C64::new(0.2, 0.0));
    let ctx = cx.cfg.build(q)?;
    let mut r = cx.rng(15);
    let mut cases = Vec::new();
    let mut k = 0;
    while k < 100 {
        let xs: Vec<C64> = (0..4)
            .map(|_| {
                let m = r.gen_range(0.3f64.ln()..1.5f64.ln()).exp();
                C64::from_polar(m, r.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            })
            .collect();
        if let Ok(t) = ThetaTuple::new(xs, ctx) {
            cases.push(case("theta", &format!("four_term/{k:03}"), four_term_theta_residual(&t)?));
            k += 1;
        }
    }
    let reals = |r: &mut ChaCha8Rng, n: usize| -> Vec<C64> { (0..n).map(|_| C64::new(r.gen_range(0.3..0.9), 0.0)).collect() };
    let mut k = 0;
    while k < 20 {
        if let Ok(t) = ThetaTuple::new(reals(&mut r, 5), ctx) {
            cases.push(case("theta", &format!("quasi_periodicity/{k:02}"), quasi_periodicity_residual(&t, k % 5)?));
            cases.push(case("theta", &format!("r_inversion/{k:02}"), inversion_residual(&t)?));
            k += 1;
        }
    }
    let mut k = 0;
    while k < 20 {
        if let Ok(t) = ThetaTuple::new(reals(&mut r, 4), ctx) {
            cases.push(case("theta", &format!("f_n2_closed/{k:02}"), n2_closed_residual(&t)?));
            k += 1;
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_moments(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    for pt in cx.points(&[Preset::AwRef])? {
        let p = &pt.params;
        let l = &pt.label;
        for k in 0..3 {
            let w = Recurrence::Mrecur { k };
            cases.push(case(l, &w.name(), recurrence_residual(p, w, Evaluator::Quadrature)?));
        }
        let snap = ParamSnapshot::of(p);
        let zp = moment_monomial(p, 1)?.value;
        let zm = moment_monomial(p, -1)?.value;
        cases.push(compare(l, "monomial_symmetry", "moment_symmetry", snap.clone(), zp, zm, 1e-10));
        if p.n() == 2 {
            let a = p.a();
            let q = p.q();
            let m0 = moment_basis(p, a[0], 0)?;
            for n in 1..=4 {
                let mn = moment_basis(p, a[0], n)?;
                let expect = qpoch_n(a[0] * a[1], q, n) * qpoch_n(a[0] * a[2], q, n) * qpoch_n(a[0] * a[3], q, n)
                    / qpoch_n(p.prod_a(), q, n);
                cases.push(compare(l, &format!("aw_moment_ratio/{n}"), "aw_moment_ratio", snap.clone(), mn / m0, expect, 1e-9));
            }
        }
    }
    if cx.point.is_none() {
        if let Point { label, family: Some((f, t)), .. } = preset_point(Preset::LemmaRef, &cx.cfg)? {
            cases.push(case(&label, "m0pm_lemma", m0pm_lemma_residual(&f, t)?));
        }
    } else if let Some(Point { label, family: Some((f, t)), .. }) = &cx.point {
        cases.push(case(label, "m0pm_lemma", m0pm_lemma_residual(f, *t)?));
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn suite_u_poly(cx: &SuiteCtx) -> Result<SuiteRun> {
    let mut cases = Vec::new();
    let zs = [C64::new(1.3, 0.4), C64::new(0.7, -0.2), C64::new(-0.9, 0.5)];
    for pt in cx.points(&[Preset::AwRef, Preset::N3Ref])? {
        let p = &pt.params;
        let l = &pt.label;
        let (b1, b2) = (C64::new(0.3, 0.0), C64::new(0.55, 0.0));
        let m00 = if p.n() == 3 { Some((eval_in(p, Method::CirclePlusTail)?.value, moment_pm_sum(p)?)) } else { None };
        for (k, &z) in zs.iter().enumerate() {
            let u1 = u_poly(p, b1, z)?;
            let u2 = u_poly(p, b2, z)?;
            let snap = ParamSnapshot::of(p).with("z", z);
            cases.push(compare(l, &format!("a_independence/{k}"), "u_a_independence", snap.clone(), u1, u2, 1e-8));
            if let Some((m, s)) = m00 {
                cases.push(compare(l, &format!("n3_closed/{k}"), "u_n3_closed", snap, u1, u_m3(p, z, m, s)?, 1e-7));
            }
        }
    }
    Ok(SuiteRun { cases, exploratory: Vec::new() })
}

fn run_suite(s: Suite, cx: &SuiteCtx) -> Result<SuiteRun> {
    match s {
        Suite::AwClosedForm => suite_aw_closed_form(cx),
        Suite::Pearson => suite_pearson(cx),
        Suite::Expansions => suite_expansions(cx),
        Suite::RecurrenceEven => suite_recurrence_even(cx),
        Suite::MatrixSystem => suite_matrix_system(cx),
        Suite::MixedEquation => suite_mixed(cx),
        Suite::N3Series => suite_n3_series(cx),
        Suite::CrossEvaluators => suite_cross(cx),
        Suite::RootIdentity => suite_root_identity(cx),
        Suite::SearsSlater => suite_sears_slater(cx),
        Suite::ThetaIdentity => suite_theta(cx),
        Suite::Moments => suite_moments(cx),
        Suite::UPoly => suite_u_poly(cx),
        Suite::All => {
            let mut cases = Vec::new();
            let mut exploratory = Vec::new();
            for each in Suite::EACH {
                if each == Suite::RecurrenceEven && require_even(cx, "").is_err() {
                    continue;
                }
                let r = run_suite(each, cx)?;
                let prefix = |c: Case| Case { name: format!("{}/{}", each.name(), c.name), report: c.report };
                cases.extend(r.cases.into_iter().map(prefix));
                exploratory.extend(r.exploratory.into_iter().map(prefix));
            }
            Ok(SuiteRun { cases, exploratory })
        }
    }
}

fn case_json(c: &Case) -> Value {
    let r = &c.report;
    json!({
        "name": c.name,
        "identity": r.identity,
        "params": snapshot_json(&r.params),
        "residual_rel": r.residual_rel,
        "tolerance": r.tolerance,
        "pass": r.pass,
    })
}

/// The verify report and whether every case passed.
pub fn verify(suite: Suite, point: &PointArgs, tol: Option<f64>, seed: u64) -> Result<(Value, bool)> {
    let cx = SuiteCtx { point: point.resolve()?, n_hint: point.n, seed, cfg: point.cfg() };
    if suite == Suite::RecurrenceEven {
        require_even(&cx, "recurrence-even")?;
    }
    let mut run = run_suite(suite, &cx)?;
    if let Some(t) = tol {
        for c in &mut run.cases {
            c.report.tolerance = t;
            c.report.pass = c.report.residual_rel.is_finite() && c.report.residual_rel <= t;
        }
    }
    run.cases.sort_by(|a, b| a.name.cmp(&b.name));
    run.exploratory.sort_by(|a, b| a.name.cmp(&b.name));
    if let Some(c) = run.cases.iter().chain(&run.exploratory).find(|c| !c.report.residual_rel.is_finite()) {
        return Err(QawError::NoConvergence(format!("case {} produced a non-finite residual", c.name)));
    }
    let max = run.cases.iter().map(|c| c.report.residual_rel).fold(0.0, f64::max);
    let pass = run.cases.iter().all(|c| c.report.pass);
    let mut v = json!({
        "suite": suite.name(),
        "cases": run.cases.iter().map(case_json).collect::<Vec<_>>(),
        "max_residual_rel": max,
        "pass": pass,
    });
    if !run.exploratory.is_empty() {
        v["exploratory"] = Value::Array(run.exploratory.iter().map(case_json).collect());
    }
    Ok((v, pass))
}

fn print_human(v: &Value) {
    if let Some(cases) = v["cases"].as_array() {
        for c in cases {
            let tag = if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            println!("{tag} {:.3e} {}", c["residual_rel"].as_f64().unwrap_or(f64::NAN), c["name"].as_str().unwrap_or(""));
        }
        println!("{} max {:.3e}", v["suite"].as_str().unwrap_or(""), v["max_residual_rel"].as_f64().unwrap_or(f64::NAN));
    } else if let Some(obj) = v.as_object() {
        for (k, x) in obj {
            println!("{k}: {x}");
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Eval { point, method } => match cmd_eval(&point, method.as_deref()) {
            Ok(v) => {
                if point.json {
                    println!("{v}");
                } else {
                    print_human(&v);
                }
                0
            }
            Err(e) => report_error(&e, point.json),
        },
        Command::Verify { suite, point, tol, seed } => match verify(suite, &point, tol, seed) {
            Ok((v, pass)) => {
                if point.json {
                    println!("{v}");
                } else {
                    print_human(&v);
                }
                if pass {
                    0
                } else {
                    1
                }
            }
            Err(e) => report_error(&e, point.json),
        },
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}
