//! Batch front end for `wkcalc-core`: parse a JSON input (inline or from a
//! file), dispatch, and render the report as JSON or as a flat text table.
//!
//! Exit codes: 0 success, 2 validation error, 64 unknown or missing
//! subcommand, 65 malformed JSON.

use std::io::Read;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use wkcalc_core::conditions::{self, DeltaEstimate, JAsserted, ProbeConfig};
use wkcalc_core::fibration::{self, FibrationSpec};
use wkcalc_core::invariants::{self, BetaKind};
use wkcalc_core::oracle::{self, OracleConfig};
use wkcalc_core::weights::{check_w_eps, hat_v, ProductPoint};
use wkcalc_core::{dh, Error, Extended, Polytope, Scalar, ToricClassFamily, Vector, Weight};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_MALFORMED: i32 = 65;

/// Agreement between an exact value and its Monte-Carlo twin, in standard errors.
const MC_SIGMAS: f64 = 4.0;
/// Default agreement between `inf_product` and the grid oracle.
const INF_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "wkcalc",
    version,
    about = "Weighted Kähler invariants calculator",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    /// Exact rational arithmetic (default).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point weights.
    #[arg(long, global = true)]
    float: bool,
    /// Tolerance for oracle comparisons, as a rational.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol: Option<String>,
    /// Grid density for minimization and convexity probes.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Seed for Monte-Carlo oracles.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// JSON output (default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Flat `key = value` output.
    #[arg(long, global = true)]
    text: bool,
    /// Re-derive the result through an independent oracle.
    #[arg(long, global = true)]
    verify: bool,
}

#[derive(Args, Debug)]
struct Input {
    /// Inline JSON, a file path, or `-` for standard input.
    input: String,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Weighted volume and barycenter of a polytope.
    Barycenter(Input),
    /// Kähler threshold of a class family.
    Threshold(Input),
    /// Weighted beta of a toric Fano manifold.
    BetaToric(Input),
    /// Upper bound for the weighted beta of a toric class.
    BetaUpper(Input),
    /// Compatible beta of a fibration.
    Fibration(Input),
    /// P¹-bundle: closed form and the fibration report.
    P1Bundle {
        #[arg(long = "p", allow_hyphen_values = true)]
        p: String,
        #[arg(long = "c", allow_hyphen_values = true)]
        c: String,
        #[arg(long = "d")]
        d: u32,
        #[arg(long = "lambda", default_value = "1", allow_hyphen_values = true)]
        lambda: String,
        /// Beta of the basis for its anticanonical class.
        #[arg(long = "beta-basis", default_value = "1")]
        beta_basis: String,
    },
    /// Delta of a P¹-bundle over a Fano base.
    Zz {
        #[arg(long = "r")]
        r: String,
        #[arg(long = "delta-b")]
        delta_b: String,
        #[arg(long = "beta0")]
        beta0: String,
        #[arg(long = "beta-b")]
        beta_b: Option<String>,
    },
    /// Beta of SGr(n, 2n+1) and the compatibly Fano probe.
    Sgr {
        #[arg(long = "n", conflicts_with_all = ["r", "scan"])]
        n: Option<u32>,
        #[arg(long = "r", conflicts_with = "scan")]
        r: Option<u32>,
        /// Scan r = 2..=R.
        #[arg(long = "scan")]
        scan: Option<u32>,
    },
    /// Sufficient conditions for weighted cscK existence.
    #[command(name = "check-cscK")]
    CheckCscK(Input),
    /// Hypotheses of the weighted J-equation.
    CheckJ(Input),
}

/// What `run` produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Validation(String),
    Malformed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Json(j) => Failure::Malformed(j.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

struct Ctx {
    float: bool,
    tol: Option<f64>,
    grid: Option<usize>,
    oracle: OracleConfig,
    verify: bool,
}

impl Ctx {
    fn weight(&self, w: Weight, name: &str) -> Res<Weight> {
        if self.float {
            return Ok(w.to_approx());
        }
        if matches!(w, Weight::Expression { .. }) {
            return Err(invalid(format!(
                "--exact rejects expression weights ({name}); use --float"
            )));
        }
        Ok(w)
    }

    fn scalar(&self, s: &str, name: &str) -> Res<Scalar> {
        let q: Scalar = s.parse().map_err(|e| invalid(format!("--{name}: {e}")))?;
        Ok(if self.float { q.to_approx() } else { q })
    }

    fn probe(&self) -> ProbeConfig {
        let mut p = ProbeConfig::default();
        if let Some(g) = self.grid {
            p.grid = g;
        }
        p
    }

    /// Grid density for the oracle over a product of total dimension `dim`.
    fn oracle_grid(&self, dim: usize) -> OracleConfig {
        let mut cfg = self.oracle.clone();
        cfg.grid = self.grid.unwrap_or(match dim {
            0..=2 => 24,
            3..=4 => 8,
            _ => 4,
        });
        cfg
    }
}

fn parse_input<T: for<'de> Deserialize<'de>>(arg: &str) -> Res<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| invalid(format!("cannot read standard input: {e}")))?;
        s
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| invalid(format!("cannot read input file {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::Malformed(e.to_string()))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn claim(value: &Scalar, kind: &str) -> String {
    if value.is_exact() {
        kind.to_string()
    } else {
        format!("{kind} (floating point)")
    }
}

fn kind_claim(kind: BetaKind) -> &'static str {
    match kind {
        BetaKind::ExactToric => "exact_value",
        BetaKind::UpperBoundOnly => "upper_bound",
        BetaKind::Supplied => "supplied_value",
    }
}

struct Report {
    provenance: &'static str,
    claims: Map<String, Value>,
    body: Map<String, Value>,
    verify: Option<Value>,
}

impl Report {
    fn new(provenance: &'static str) -> Self {
        Report {
            provenance,
            claims: Map::new(),
            body: Map::new(),
            verify: None,
        }
    }

    fn put(&mut self, k: &str, v: impl serde::Serialize) -> &mut Self {
        self.body.insert(k.to_string(), to_value(&v));
        self
    }

    fn claim(&mut self, k: &str, c: impl Into<String>) -> &mut Self {
        self.claims.insert(k.to_string(), Value::String(c.into()));
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeWeight {
    polytope: Polytope,
    #[serde(default = "Weight::one")]
    weight: Weight,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyInput {
    family: ToricClassFamily,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UpperInput {
    family: ToricClassFamily,
    #[serde(default = "Weight::one")]
    weight: Weight,
    #[serde(default)]
    kind: Option<BetaKind>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CscKInput {
    /// Absent for the `P¹` case with `[ω0] = 2πc1`.
    #[serde(default)]
    class_family: Option<ToricClassFamily>,
    #[serde(default = "Weight::one")]
    v: Weight,
    w: Weight,
    delta_eps: Scalar,
    #[serde(default)]
    delta_provenance: Option<String>,
    #[serde(default = "one_u32")]
    n: u32,
    futaki_vanishes: bool,
}

fn one_u32() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JInput {
    #[serde(default = "Weight::one")]
    v: Weight,
    w_hat: Weight,
    dx: Polytope,
    #[serde(default)]
    dy: Option<Polytope>,
    normalization: bool,
    chi_bound: bool,
}

fn mc_barycenter_check(
    p: &Polytope,
    v: &Weight,
    exact: &dh::Moments,
    cfg: &OracleConfig,
) -> Res<(Value, bool)> {
    let mc = oracle::mc_moments(p, v, cfg)?;
    let vol = exact.volume.to_f64();
    let mut ok = mc.volume.agrees_with(vol, MC_SIGMAS);
    for (e, m) in exact.first.iter().zip(&mc.first) {
        ok &= m.agrees_with(e.to_f64(), MC_SIGMAS);
    }
    let bary: Vec<f64> = mc
        .first
        .iter()
        .map(|m| m.estimate / mc.volume.estimate)
        .collect();
    Ok((
        json!({ "monte_carlo": mc, "barycenter_estimate": bary, "samples": cfg.samples, "seed": cfg.seed }),
        ok,
    ))
}

fn cmd_barycenter(ctx: &Ctx, input: &str) -> Res<Report> {
    let i: PolytopeWeight = parse_input(input)?;
    let v = ctx.weight(i.weight, "weight")?;
    let m = dh::Measure::new(i.polytope.clone(), v.clone())?;
    let mom = dh::moments(&m)?;
    let b = mom.barycenter()?;
    let mut r =
        Report::new("weighted Duistermaat-Heckman volume and barycenter over the moment polytope");
    r.put("volume", &mom.volume)
        .put("barycenter", &b)
        .put("integration", &mom.method);
    r.claim("barycenter", claim(&mom.volume, "exact_value"));
    if ctx.verify {
        let (mut val, ok) = mc_barycenter_check(&i.polytope, &v, &mom, &ctx.oracle)?;
        val["agrees"] = json!(ok);
        r.verify = Some(val);
    }
    Ok(r)
}

fn cmd_threshold(ctx: &Ctx, input: &str) -> Res<Report> {
    let i: FamilyInput = parse_input(input)?;
    let f = i.family;
    let s = f.kahler_threshold()?;
    let mut r = Report::new("Kähler threshold: supremum of s with 2πc1 − s[ω0] Kähler");
    r.put("kahler_threshold", &s);
    if f.proportional_ratio().is_none() {
        r.put("breakpoints", f.threshold_breakpoints()?);
    }
    r.claim("kahler_threshold", "exact_value");
    if ctx.verify {
        let mut proper = |t: &Scalar| -> wkcalc_core::Result<bool> {
            Ok(f.combine_class(&-t, &Scalar::one())?.kahler_proper)
        };
        let val = match &s {
            Extended::Finite(s) => {
                let lo = if s.is_positive() {
                    s * Scalar::ratio(1, 2)
                } else {
                    s - Scalar::one()
                };
                let hi = s + Scalar::one();
                match oracle::bisect_threshold(&mut proper, lo, hi, 40) {
                    Ok(b) => json!({ "bisection": b, "agrees": b.contains(s) }),
                    Err(e) => json!({ "bisection_error": e.to_string(), "agrees": false }),
                }
            }
            Extended::Infinity => {
                let far = Scalar::int(1 << 20);
                let ok = proper(&far)?;
                json!({ "proper_at": far, "agrees": ok })
            }
        };
        r.verify = Some(val);
    }
    Ok(r)
}

fn cmd_beta_toric(ctx: &Ctx, input: &str) -> Res<Report> {
    let i: PolytopeWeight = parse_input(input)?;
    let v = ctx.weight(i.weight, "weight")?;
    let rep = invariants::fano_toric_beta(&i.polytope, &v, BetaKind::ExactToric)?;
    let mut r = Report::new(
        "toric Fano: beta_v = s/(1+s) for the largest s with −s·barycenter in the polytope",
    );
    r.put("beta", &rep.value)
        .put("report", &rep)
        .put("delta", rep.delta_statement());
    r.claim("beta", claim(&rep.value, kind_claim(rep.kind)));
    if ctx.verify {
        let m = dh::Measure::new(i.polytope.clone(), v.clone())?;
        let mom = dh::moments(&m)?;
        let (mut val, ok) = mc_barycenter_check(&i.polytope, &v, &mom, &ctx.oracle)?;
        let b: Vec<f64> =
            serde_json::from_value(val["barycenter_estimate"].clone()).unwrap_or_default();
        let dir = Vector::from_f64(&b).neg();
        if let Extended::Finite(s) = i.polytope.ray_max_scale(&dir)? {
            let s = s.to_f64();
            val["beta_from_estimate"] = json!(s / (1.0 + s));
        }
        val["agrees"] = json!(ok);
        r.verify = Some(val);
    }
    Ok(r)
}

fn cmd_beta_upper(ctx: &Ctx, input: &str) -> Res<Report> {
    let i: UpperInput = parse_input(input)?;
    let v = ctx.weight(i.weight, "weight")?;
    let kind = i.kind.unwrap_or(BetaKind::UpperBoundOnly);
    let (rep, ub) = invariants::beta_upper_report(&i.family, &v, kind)?;
    let mut r = Report::new("upper bound: beta_v <= sup of beta with −beta·barycenter in the polytope of 2πc1 − beta[ω0]");
    r.put("beta", &rep.value)
        .put("report", &rep)
        .put("upper_bound", &ub)
        .put("delta", rep.delta_statement());
    r.claim("beta", claim(&rep.value, kind_claim(rep.kind)));
    if ctx.verify {
        let p = i.family.omega0_polytope()?;
        let m = dh::Measure::new(p.clone(), v.clone())?;
        let mom = dh::moments(&m)?;
        let (mut val, ok) = mc_barycenter_check(&p, &v, &mom, &ctx.oracle)?;
        let scan_ok = ub
            .certificate
            .bracket
            .as_ref()
            .is_none_or(|b| b.contains(&ub.value));
        val["scan_certificate_contains_value"] = json!(scan_ok);
        val["agrees"] = json!(ok && scan_ok);
        r.verify = Some(val);
    }
    Ok(r)
}

fn fibration_report(
    ctx: &Ctx,
    spec: &FibrationSpec,
    r: &mut Report,
) -> Res<fibration::FibrationReport> {
    let closed = spec.lambda().is_some();
    let mut rep = if closed {
        fibration::compatible_beta_fano_fiber(spec)?
    } else {
        fibration::compatible_beta_general(spec, None)?
    };
    fibration::toric_fiber_sharpness(&mut rep, spec)?;
    let semi = fibration::semistability_report(&rep, spec)?;
    let cf = fibration::compatibly_fano_check(spec)?;
    let achiever = match rep.achiever {
        fibration::Achiever::Fiber => "fiber".to_string(),
        fibration::Achiever::Basis(i) => format!("basis[{i}]"),
    };
    r.put("beta_comp", &rep.beta_comp)
        .put("achiever", achiever)
        .put("report", &rep)
        .put("compatibly_fano", &cf)
        .put("semistability", semi)
        .put("method", if closed { "closed_form" } else { "bisection" });
    r.claim("beta_comp", claim(&rep.beta_comp, "lower_bound_for_beta_v"));
    if rep.sharp {
        r.claim("beta_v", claim(&rep.fiber_term, "exact_value"));
    }
    if ctx.verify {
        let val = if closed {
            let twin = fibration::compatible_beta_general(spec, Some(rep.fiber_term.clone()))?;
            // the bisection form only searches below the fiber term
            let ok = twin
                .basis_terms
                .iter()
                .zip(&rep.basis_terms)
                .all(|(a, b)| *a == b.clone().min(rep.fiber_term.clone()));
            json!({ "bisection_terms": twin.basis_terms, "brackets": twin.brackets, "agrees": ok && twin.beta_comp == rep.beta_comp })
        } else {
            let fam = spec.class_family()?;
            let ub = invariants::beta_upper_bound(&fam, &spec.fiber_weight()?)?;
            let ok = ub
                .certificate
                .bracket
                .as_ref()
                .is_none_or(|b| b.contains(&rep.fiber_term));
            json!({ "fiber_scan_certificate": ub.certificate, "agrees": ok })
        };
        r.verify = Some(val);
    }
    Ok(rep)
}

fn cmd_fibration(ctx: &Ctx, input: &str) -> Res<Report> {
    let mut spec: FibrationSpec = parse_input(input)?;
    spec.weight_v = ctx.weight(spec.weight_v, "weight_v")?;
    let mut r = Report::new("compatible beta of a semisimple principal fibration: minimum of the fiber term and the basis terms");
    fibration_report(ctx, &spec, &mut r)?;
    Ok(r)
}

fn cmd_p1_bundle(
    ctx: &Ctx,
    p: &str,
    c: &str,
    d: u32,
    lambda: &str,
    beta_basis: &str,
) -> Res<Report> {
    let p = ctx.scalar(p, "p")?;
    let c = ctx.scalar(c, "c")?;
    let lambda = ctx.scalar(lambda, "lambda")?;
    let bb = ctx.scalar(beta_basis, "beta-basis")?;
    let beta = fibration::p1_beta(&p, &c, d, &lambda)?;
    let bary = dh::barycenter_p1_closed_form(&p, &c, d, &lambda)?;
    let mut r = Report::new("P¹-bundle: weighted beta of P¹ with weight (pλu + c)^d in closed form, and the compatible beta of the bundle");
    r.put("beta", &beta).put("barycenter", &bary);
    r.claim("beta", claim(&beta, "exact_value"));
    let spec = fibration::p1_bundle_spec(&p, &c, d, &lambda, &bb)?;
    let inner = Ctx {
        verify: false,
        float: ctx.float,
        tol: ctx.tol,
        grid: ctx.grid,
        oracle: ctx.oracle.clone(),
    };
    fibration_report(&inner, &spec, &mut r)?;
    if ctx.verify {
        let seg = Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])])?;
        let w = Weight::power_of_affine(Vector(vec![&p * &lambda]), c.clone(), d);
        let generic = invariants::fano_toric_beta(&seg, &w, BetaKind::ExactToric)?;
        let generic_beta = generic.value.checked_div(&lambda)?;
        let b = dh::barycenter(&dh::Measure::new(seg.clone(), w)?)?;
        // t ↦ −(t/(1−t))·b ∈ [−1, 1]
        let mut pred = |t: &Scalar| -> wkcalc_core::Result<bool> {
            if *t >= Scalar::one() {
                return Ok(false);
            }
            let k = t.checked_div(&(Scalar::one() - t))?;
            seg.contains(&b.scale(&-k))
        };
        let bracket = oracle::bisect_threshold(&mut pred, Scalar::zero(), Scalar::one(), 40);
        let (bracket_val, in_bracket) = match bracket {
            Ok(br) => {
                let scaled = oracle::Bracket {
                    lo: br.lo.checked_div(&lambda)?,
                    hi: br.hi.checked_div(&lambda)?,
                };
                let ok = scaled.contains(&beta);
                (to_value(&scaled), ok)
            }
            Err(e) => (json!(e.to_string()), generic.value == Scalar::one()),
        };
        r.verify = Some(json!({
            "generic_pipeline": generic_beta,
            "bisection": bracket_val,
            "agrees": generic_beta == beta && in_bracket,
        }));
    }
    Ok(r)
}

fn cmd_zz(ctx: &Ctx, rr: &str, delta_b: &str, beta0: &str, beta_b: Option<&str>) -> Res<Report> {
    let r_ = ctx.scalar(rr, "r")?;
    let db = ctx.scalar(delta_b, "delta-b")?;
    let b0 = ctx.scalar(beta0, "beta0")?;
    let delta = fibration::zz_delta(&r_, &db, &b0)?;
    let mut r =
        Report::new("delta of a P¹-bundle over a Fano base: min(δ_B r β0 / (1 + β0 (r − 1)), β0)");
    r.put("delta", &delta);
    r.claim("delta", claim(&delta, "exact_value"));
    if let Some(bb) = beta_b {
        let bb = ctx.scalar(bb, "beta-b")?;
        r.put(
            "equivalence",
            fibration::zz_equivalence(&r_, &bb, &db, &b0)?,
        );
    }
    if ctx.verify {
        let bb = match beta_b {
            Some(s) => ctx.scalar(s, "beta-b")?,
            None => db.clone().min(Scalar::one()),
        };
        let eq = fibration::zz_equivalence(&r_, &bb, &db, &b0)?;
        let f = db.to_f64() * r_.to_f64() * b0.to_f64() / (1.0 + b0.to_f64() * (r_.to_f64() - 1.0));
        let float = f.min(b0.to_f64());
        let ok = eq.agree() && (float - delta.to_f64()).abs() <= 1e-12 * float.abs().max(1.0);
        r.verify = Some(json!({ "equivalence": eq, "floating_point": float, "agrees": ok }));
    }
    Ok(r)
}

/// `2(2n+1)!/((n+2)(n! 2^n)²)` in floating point via `Π (2k−1)/(2k)`.
fn sgr_beta_f64(n: u32) -> f64 {
    let central: f64 = (1..=n)
        .map(|k| (2.0 * k as f64 - 1.0) / (2.0 * k as f64))
        .product();
    2.0 * (2.0 * n as f64 + 1.0) * central / (n as f64 + 2.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn cmd_sgr(ctx: &Ctx, n: Option<u32>, rr: Option<u32>, scan: Option<u32>) -> Res<Report> {
    let mut r =
        Report::new("beta of SGr(n, 2n+1), and P¹-bundles over SGr(r³ − 2, 2r³ − 3) with c = r");
    match (n, rr, scan) {
        (Some(n), None, None) => {
            let b = fibration::sgr_beta(n)?;
            r.put("n", n).put("beta", &b);
            r.claim("beta", "exact_value");
            if ctx.verify {
                let f = sgr_beta_f64(n);
                r.verify = Some(json!({ "floating_point": f, "agrees": close(f, b.to_f64()) }));
            }
        }
        (None, Some(rv), None) => {
            let p = fibration::sgr_compatibly_fano_probe(rv)?;
            r.put("probe", &p).put("compatibly_fano", p.compatibly_fano);
            r.claim("margin", "exact_value");
            if ctx.verify {
                let f = rv as f64 * sgr_beta_f64(p.n) - 1.0;
                r.verify = Some(
                    json!({ "floating_point_margin": f, "agrees": (f > 0.0) == p.compatibly_fano && close(f, p.margin.to_f64()) }),
                );
            }
        }
        (None, None, Some(rmax)) => {
            let s = fibration::sgr_scan(rmax)?;
            r.put("scan", &s).put("first_failure", s.first_failure);
            r.claim("first_failure", "exact_scan_with_tail_bound");
            if ctx.verify {
                let ok = s.probes.iter().all(|p| {
                    let f = p.r as f64 * sgr_beta_f64(p.n) - 1.0;
                    (f > 0.0) == p.compatibly_fano
                });
                r.verify = Some(json!({ "floating_point_signs_agree": ok, "agrees": ok }));
            }
        }
        _ => return Err(invalid("sgr needs exactly one of --n, --r, --scan")),
    }
    Ok(r)
}

/// Cartesian product of two polytopes, by vertices.
fn product_polytope(a: &Polytope, b: &Polytope) -> Res<Polytope> {
    let mut pts = Vec::new();
    for x in a.vertices() {
        for y in b.vertices() {
            let mut c = x.0.clone();
            c.extend(y.0.iter().cloned());
            pts.push(Vector(c));
        }
    }
    Ok(Polytope::from_vertices(&pts)?)
}

fn grid_twin(
    ctx: &Ctx,
    f: &dyn Fn(&ProductPoint) -> wkcalc_core::Result<Scalar>,
    dx: &Polytope,
    dy: &Polytope,
    ours: &Scalar,
) -> Res<Value> {
    let rx = dx.ambient_dim();
    let prod = product_polytope(dx, dy)?;
    let cfg = ctx.oracle_grid(prod.ambient_dim());
    let joint = |z: &Vector| {
        f(&ProductPoint::new(
            Vector(z.0[..rx].to_vec()),
            Vector(z.0[rx..].to_vec()),
        ))
    };
    let (val, at) = oracle::grid_inf(&joint, &prod, &cfg)?;
    let tol = ctx.tol.unwrap_or(INF_TOL);
    let ok = (val.to_f64() - ours.to_f64()).abs() <= tol;
    Ok(json!({ "grid_inf": val, "at": at, "grid": cfg.grid, "tolerance": tol, "agrees": ok }))
}

fn cmd_check_csck(ctx: &Ctx, input: &str) -> Res<Report> {
    let i: CscKInput = parse_input(input)?;
    let v = ctx.weight(i.v, "v")?;
    let w = ctx.weight(i.w, "w")?;
    let d = match i.delta_provenance {
        Some(p) => DeltaEstimate::new(i.delta_eps, p)?,
        None => DeltaEstimate::asserted(i.delta_eps)?,
    };
    let cfg = ctx.probe();
    let mut r = Report::new("sufficient conditions for weighted cscK existence from a lower bound on the reduced delta invariant");
    let (rep, dx, dy, n) = match &i.class_family {
        None => {
            if i.n != 1 {
                return Err(invalid(
                    "without class_family the P¹ case is checked, which needs n = 1",
                ));
            }
            let rep = conditions::p1_cscK_check(&v, &w, &d, i.futaki_vanishes, &cfg)?;
            let seg =
                Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])])?;
            let gap = &d.delta_eps - Scalar::one();
            let dy = if gap.is_negative() {
                None
            } else {
                Some(Polytope::from_vertices(&[
                    Vector(vec![-gap.clone()]),
                    Vector(vec![gap]),
                ])?)
            };
            r.put("case", "p1");
            (rep, seg, dy, 1)
        }
        Some(f) => {
            let rep = conditions::exi_delta_check(f, &v, &w, &d, i.n, i.futaki_vanishes, &cfg)?;
            let theta = conditions::theta_eps_polytope(f, &d)?;
            let dy = if theta.kahler_proper {
                theta.polytope
            } else {
                None
            };
            r.put("case", "general");
            (rep, f.omega0_polytope()?, dy, i.n)
        }
    };
    r.put("overall", rep.overall)
        .put("report", &rep)
        .put("delta_eps", &d);
    r.claim("overall", "sufficient_condition_check");
    if ctx.verify {
        let mut val = Map::new();
        let mut ok = true;
        if let (Some(dy), Some(inf)) =
            (&dy, rep.get("inf_check_w").and_then(|c| c.witness.as_ref()))
        {
            let ours: Scalar =
                serde_json::from_value(inf["value"].clone()).map_err(|e| invalid(e.to_string()))?;
            let g = |pt: &ProductPoint| check_w_eps(&v, &w, &d.delta_eps, n, pt);
            let t = grid_twin(ctx, &g, &dx, dy, &ours)?;
            ok &= t["agrees"] == json!(true);
            val.insert("inf_check_w".into(), t);
        }
        if let Some(inf) = rep
            .get("one_plus_inf_hat_v")
            .and_then(|c| c.witness.as_ref())
        {
            let ours: Scalar =
                serde_json::from_value(inf["value"].clone()).map_err(|e| invalid(e.to_string()))?;
            let g = |pt: &ProductPoint| hat_v(&v, &pt.x, &pt.y);
            let t = grid_twin(ctx, &g, &dx, &dx, &ours)?;
            ok &= t["agrees"] == json!(true);
            val.insert("inf_hat_v".into(), t);
        }
        val.insert("agrees".into(), json!(ok));
        r.verify = Some(Value::Object(val));
    }
    Ok(r)
}

fn cmd_check_j(ctx: &Ctx, input: &str) -> Res<Report> {
    let i: JInput = parse_input(input)?;
    let v = ctx.weight(i.v, "v")?;
    let w = ctx.weight(i.w_hat, "w_hat")?;
    let dy = i.dy.unwrap_or_else(|| i.dx.clone());
    let asserted = JAsserted {
        normalization: i.normalization,
        chi_bound: i.chi_bound,
    };
    let rep = conditions::j_hypotheses_check(&v, &w, &i.dx, &dy, asserted, &ctx.probe())?;
    let mut r = Report::new("hypotheses for solvability of the weighted J-equation");
    r.put("overall", rep.overall).put("report", &rep);
    r.claim("overall", "sufficient_condition_check");
    if ctx.verify {
        let mut val = json!({ "agrees": true });
        if let Some(inf) = rep
            .get("one_plus_inf_hat_v")
            .and_then(|c| c.witness.as_ref())
        {
            let ours: Scalar =
                serde_json::from_value(inf["value"].clone()).map_err(|e| invalid(e.to_string()))?;
            let g = |pt: &ProductPoint| hat_v(&v, &pt.x, &pt.y);
            let t = grid_twin(ctx, &g, &i.dx, &i.dx, &ours)?;
            val["agrees"] = t["agrees"].clone();
            val["inf_hat_v"] = t;
        }
        r.verify = Some(val);
    }
    Ok(r)
}

fn dispatch(ctx: &Ctx, cmd: &Cmd) -> Res<(&'static str, Report)> {
    Ok(match cmd {
        Cmd::Barycenter(i) => ("barycenter", cmd_barycenter(ctx, &i.input)?),
        Cmd::Threshold(i) => ("threshold", cmd_threshold(ctx, &i.input)?),
        Cmd::BetaToric(i) => ("beta-toric", cmd_beta_toric(ctx, &i.input)?),
        Cmd::BetaUpper(i) => ("beta-upper", cmd_beta_upper(ctx, &i.input)?),
        Cmd::Fibration(i) => ("fibration", cmd_fibration(ctx, &i.input)?),
        Cmd::P1Bundle {
            p,
            c,
            d,
            lambda,
            beta_basis,
        } => (
            "p1-bundle",
            cmd_p1_bundle(ctx, p, c, *d, lambda, beta_basis)?,
        ),
        Cmd::Zz {
            r,
            delta_b,
            beta0,
            beta_b,
        } => ("zz", cmd_zz(ctx, r, delta_b, beta0, beta_b.as_deref())?),
        Cmd::Sgr { n, r, scan } => ("sgr", cmd_sgr(ctx, *n, *r, *scan)?),
        Cmd::CheckCscK(i) => ("check-cscK", cmd_check_csck(ctx, &i.input)?),
        Cmd::CheckJ(i) => ("check-j", cmd_check_j(ctx, &i.input)?),
    })
}

fn envelope(name: &str, mode: &str, r: Report) -> Value {
    let mut out = r.body;
    out.insert("subcommand".into(), json!(name));
    out.insert("mode".into(), json!(mode));
    out.insert("provenance".into(), json!(r.provenance));
    out.insert("claims".into(), Value::Object(r.claims));
    if let Some(v) = r.verify {
        out.insert("verify".into(), v);
    }
    Value::Object(out)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Array(a)
            if a.iter().any(|x| {
                x.is_object()
                    || x.is_array() && x.as_array().is_some_and(|y| y.iter().any(Value::is_object))
            }) =>
        {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// `key = value` table, keys sorted, nested keys dotted.
pub fn render_text(v: &Value) -> String {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    let mut s = String::new();
    for (k, x) in rows {
        s.push_str(&format!("{k:<width$}  {x}\n"));
    }
    s
}

fn usage_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
        ErrorKind::InvalidSubcommand
        | ErrorKind::MissingSubcommand
        | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
        _ => EXIT_VALIDATION,
    }
}

/// Parse `argv` (including the program name) and run one subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = usage_code(e.kind());
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let o = &cli.opts;
    let tol = match &o.tol {
        None => None,
        Some(t) => match t.parse::<Scalar>() {
            Ok(q) if q.is_positive() => Some(q.to_f64()),
            _ => {
                return Outcome {
                    code: EXIT_VALIDATION,
                    stdout: String::new(),
                    stderr: format!("error: --tol must be a positive rational, got {t}\n"),
                }
            }
        },
    };
    let mut oracle = OracleConfig::default();
    if let Some(s) = o.seed {
        oracle.seed = s;
    }
    if let Some(n) = o.samples {
        oracle.samples = n;
    }
    if let Some(t) = &tol {
        oracle.tol = Scalar::approx(*t);
    }
    let ctx = Ctx {
        float: o.float,
        tol,
        grid: o.grid,
        oracle,
        verify: o.verify,
    };
    match dispatch(&ctx, &cli.cmd) {
        Ok((name, report)) => {
            let v = envelope(name, if o.float { "float" } else { "exact" }, report);
            let stdout = if o.text {
                render_text(&v)
            } else {
                let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
                s.push('\n');
                s
            };
            Outcome {
                code: EXIT_OK,
                stdout,
                stderr: String::new(),
            }
        }
        Err(Failure::Validation(m)) => Outcome {
            code: EXIT_VALIDATION,
            stdout: String::new(),
            stderr: format!("error: {m}\n"),
        },
        Err(Failure::Malformed(m)) => Outcome {
            code: EXIT_MALFORMED,
            stdout: String::new(),
            stderr: format!("error: malformed JSON: {m}\n"),
        },
    }
}
