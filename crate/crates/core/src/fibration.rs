//! Semisimple principal fibrations with toric fiber: compatible beta
//! invariants, the compatibly-Fano test, P¹-bundle closed forms, the
//! comparison with the algebraic delta formula for P¹-bundles, and the odd
//! symplectic Grassmannian family.

use num_bigint::BigInt;
use num_rational::BigRational as Q;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Polytope, ToricClassFamily};
use crate::invariants::{beta_upper_bound, fano_toric_beta, BetaKind};
use crate::oracle::{bisect_threshold, Bracket};
use crate::poly::factorial;
use crate::scalar::{Scalar, Vector};
use crate::weights::{p_weight, Weight};

/// Which class the supplied basis beta refers to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisBetaKind {
    /// `β(B_a, 2πc1(B_a))`, with `c_a [ω_a] = 2πc1(B_a)`.
    #[default]
    Anticanonical,
    /// `β(B_a, [ω_a])` directly.
    Class,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisFactor {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Catalog entry used to fill `dim` and `beta_basis` when they are absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default)]
    pub dim: u32,
    pub c: Scalar,
    pub p: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_basis: Option<Scalar>,
    #[serde(default)]
    pub beta_kind: BasisBetaKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_alg: Option<Scalar>,
}

impl BasisFactor {
    pub fn new(dim: u32, c: Scalar, p: Vector, beta_basis: Scalar) -> Self {
        BasisFactor {
            name: None,
            catalog: None,
            dim,
            c,
            p,
            beta_basis: Some(beta_basis),
            beta_kind: BasisBetaKind::Anticanonical,
            delta_alg: None,
        }
    }

    fn label(&self, index: usize) -> String {
        self.name
            .clone()
            .or_else(|| self.catalog.clone())
            .unwrap_or_else(|| format!("B_{}", index + 1))
    }

    fn beta(&self) -> Result<&Scalar> {
        self.beta_basis.as_ref().ok_or_else(|| {
            Error::Precondition(format!(
                "basis factor with p = {} has no beta value",
                self.p
            ))
        })
    }

    /// `β(B_a, [ω_a])`.
    pub fn beta_class(&self) -> Result<Scalar> {
        let b = self.beta()?;
        Ok(match self.beta_kind {
            BasisBetaKind::Class => b.clone(),
            BasisBetaKind::Anticanonical => &self.c * b,
        })
    }

    /// `β(B_a, 2πc1(B_a))`.
    pub fn beta_anticanonical(&self) -> Result<Scalar> {
        let b = self.beta()?;
        match self.beta_kind {
            BasisBetaKind::Anticanonical => Ok(b.clone()),
            BasisBetaKind::Class => b.checked_div(&self.c),
        }
    }

    /// Fills `dim` and `beta_basis` from the catalog and checks `dim >= 1`.
    pub fn resolve(&self) -> Result<BasisFactor> {
        let mut out = self.clone();
        if let Some(name) = &self.catalog {
            let entry = catalog_entry(name)?;
            if out.dim == 0 {
                out.dim = entry.dim;
            } else if out.dim != entry.dim {
                return Err(Error::Invalid(format!(
                    "{name} has dimension {}, not {}",
                    entry.dim, out.dim
                )));
            }
            if out.beta_basis.is_none() {
                out.beta_basis = Some(entry.beta_c1);
                out.beta_kind = BasisBetaKind::Anticanonical;
            }
        }
        if out.dim == 0 {
            return Err(Error::Precondition(
                "basis dimension must be at least 1".into(),
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FiberClass {
    /// `[ω0] = λ 2πc1(X)`.
    Proportional { lambda: Scalar },
    /// `[ω0]` given by its offsets over the normals of the fiber polytope.
    Family { family: ToricClassFamily },
}

fn default_weight() -> Weight {
    Weight::one()
}

fn default_true() -> bool {
    true
}

/// The weight `v` lives on the moment polytope of `[ω0]`, like `𝚙`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FibrationSpec {
    pub fiber_delta_c1: Polytope,
    pub class: FiberClass,
    #[serde(default = "default_weight")]
    pub weight_v: Weight,
    pub factors: Vec<BasisFactor>,
    #[serde(default = "default_true")]
    pub fiber_toric: bool,
}

impl FibrationSpec {
    pub fn proportional(
        fiber_delta_c1: Polytope,
        lambda: Scalar,
        weight_v: Weight,
        factors: Vec<BasisFactor>,
    ) -> Self {
        FibrationSpec {
            fiber_delta_c1,
            class: FiberClass::Proportional { lambda },
            weight_v,
            factors,
            fiber_toric: true,
        }
    }

    /// Factors with catalog data filled in.
    pub fn resolved(&self) -> Result<FibrationSpec> {
        let mut out = self.clone();
        out.factors = self
            .factors
            .iter()
            .map(BasisFactor::resolve)
            .collect::<Result<_>>()?;
        if out.factors.is_empty() {
            return Err(Error::Empty("fibration has no basis factors".into()));
        }
        let r = out.fiber_delta_c1.ambient_dim();
        for f in &out.factors {
            f.p.check_dim(r)?;
        }
        if let FiberClass::Proportional { lambda } = &out.class {
            if !lambda.is_positive() {
                return Err(Error::Precondition(format!(
                    "lambda = {lambda} must be positive"
                )));
            }
        }
        Ok(out)
    }

    pub fn lambda(&self) -> Option<&Scalar> {
        match &self.class {
            FiberClass::Proportional { lambda } => Some(lambda),
            FiberClass::Family { .. } => None,
        }
    }

    /// The family `t1 [ω0] + t2 2πc1(X)` over the facets of the fiber polytope.
    pub fn class_family(&self) -> Result<ToricClassFamily> {
        match &self.class {
            FiberClass::Family { family } => Ok(family.clone()),
            FiberClass::Proportional { lambda } => {
                let hs = self.fiber_delta_c1.halfspaces();
                ToricClassFamily::new(
                    hs.iter().map(|h| h.normal.clone()).collect(),
                    hs.iter().map(|h| lambda * &h.offset).collect(),
                    hs.iter().map(|h| h.offset.clone()).collect(),
                )
            }
        }
    }

    /// Moment polytope of `[ω0]`.
    pub fn omega0_polytope(&self) -> Result<Polytope> {
        match &self.class {
            FiberClass::Proportional { lambda } => self
                .fiber_delta_c1
                .affine_image(lambda, &Vector::zeros(self.fiber_delta_c1.ambient_dim())),
            FiberClass::Family { family } => family.omega0_polytope(),
        }
    }

    /// `v · 𝚙` on the moment polytope of `[ω0]`, after the positivity check.
    pub fn fiber_weight(&self) -> Result<Weight> {
        let delta0 = self.omega0_polytope()?;
        let data: Vec<(Vector, Scalar, u32)> = self
            .factors
            .iter()
            .map(|f| (f.p.clone(), f.c.clone(), f.dim))
            .collect();
        let p = p_weight(&data, &delta0)?;
        Ok(self.weight_v.product(&p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Achiever {
    Fiber,
    Basis(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct FibrationReport {
    pub beta_comp: Scalar,
    pub achiever: Achiever,
    pub fiber_term: Scalar,
    pub basis_terms: Vec<Scalar>,
    pub sharp: bool,
    pub conclusions: Vec<String>,
    /// Bisection brackets per factor (general form only; `None` when the
    /// fiber term binds or the closed form was used).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub brackets: Vec<Option<Bracket>>,
}

impl FibrationReport {
    fn from_terms(
        fiber_term: Scalar,
        basis_terms: Vec<Scalar>,
        brackets: Vec<Option<Bracket>>,
    ) -> Self {
        let mut beta_comp = fiber_term.clone();
        let mut achiever = Achiever::Fiber;
        for (i, t) in basis_terms.iter().enumerate() {
            // ties stay with the fiber
            if *t < beta_comp {
                beta_comp = t.clone();
                achiever = Achiever::Basis(i);
            }
        }
        FibrationReport {
            beta_comp,
            achiever,
            fiber_term,
            basis_terms,
            sharp: false,
            conclusions: Vec::new(),
            brackets,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorMargin {
    pub index: usize,
    pub c_positive: bool,
    pub inf_p: Scalar,
    /// `-c_a β(B_a, 2πc1(B_a))`.
    pub bound: Scalar,
    pub margin: Scalar,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatiblyFano {
    pub holds: bool,
    pub fiber_fano: bool,
    pub lambda_is_one: bool,
    pub margins: Vec<FactorMargin>,
}

/// Fano fiber, `λ = 1`, and for every factor `c_a > 0` and
/// `inf_{Δ_{2πc1}} <p_a, ·> > -c_a β(B_a, 2πc1(B_a))` (strict).
pub fn compatibly_fano_check(spec: &FibrationSpec) -> Result<CompatiblyFano> {
    let spec = spec.resolved()?;
    let delta = &spec.fiber_delta_c1;
    let r = delta.ambient_dim();
    if !delta.contains(&Vector::zeros(r))? {
        return Err(Error::OriginNotContained);
    }
    let fiber_fano =
        delta.is_full_dimensional() && delta.halfspaces().iter().all(|h| h.offset.is_positive());
    let lambda_is_one = match &spec.class {
        FiberClass::Proportional { lambda } => *lambda == Scalar::one(),
        FiberClass::Family { family } => family.proportional_ratio() == Some(Scalar::one()),
    };
    let mut margins = Vec::new();
    for (index, f) in spec.factors.iter().enumerate() {
        let inf_p = delta.support_min(&f.p)?;
        let bound = -(&f.c * f.beta_anticanonical()?);
        let margin = &inf_p - &bound;
        let c_positive = f.c.is_positive();
        margins.push(FactorMargin {
            index,
            c_positive,
            holds: c_positive && margin.is_positive(),
            inf_p,
            bound,
            margin,
        });
    }
    let holds = fiber_fano && lambda_is_one && margins.iter().all(|m| m.holds);
    Ok(CompatiblyFano {
        holds,
        fiber_fano,
        lambda_is_one,
        margins,
    })
}

/// Closed form for `[ω0] = λ 2πc1(X)`: the fiber term is the weighted beta of
/// `X` for `v 𝚙`, each basis term is
/// `(β(B_a,[ω_a]) + inf p_a) / (c_a + λ inf p_a)` with the infimum over
/// `Δ_{2πc1(X)}`.
pub fn compatible_beta_fano_fiber(spec: &FibrationSpec) -> Result<FibrationReport> {
    let spec = spec.resolved()?;
    let lambda = spec.lambda().cloned().ok_or_else(|| {
        Error::Precondition("closed form needs [w0] proportional to 2πc1(X)".into())
    })?;
    let vp = spec.fiber_weight()?;
    let rescaled = vp.rescale_argument(&lambda);
    let fiber = fano_toric_beta(&spec.fiber_delta_c1, &rescaled, BetaKind::ExactToric)?;
    let fiber_term = fiber.value.checked_div(&lambda)?;
    let mut basis_terms = Vec::new();
    for f in &spec.factors {
        let m = spec.fiber_delta_c1.support_min(&f.p)?;
        let den = &f.c + &lambda * &m;
        if !den.is_positive() {
            return Err(Error::Inconsistent(format!(
                "c_a + λ inf p_a = {den} is not positive"
            )));
        }
        basis_terms.push((f.beta_class()? + m).checked_div(&den)?);
    }
    Ok(FibrationReport::from_terms(
        fiber_term,
        basis_terms,
        Vec::new(),
    ))
}

/// Largest bisection depth allowed when shrinking a bracket below `1e-12`.
const MAX_BISECTION_ITERS: u32 = 200;

fn bisection_iters(width: f64) -> u32 {
    let target = 1e-13;
    if width <= target {
        return 1;
    }
    ((width / target).log2().ceil() as u32 + 1).min(MAX_BISECTION_ITERS)
}

/// General form: per factor, the sup of `t < β_{v𝚙}(X,[ω0])` with
/// `inf_{Δ_t} <p_a, ·> − t c_a > −β(B_a,[ω_a])`, `Δ_t = Δ_{2πc1 − t[ω0]}`.
///
/// The left side is convex and piecewise affine in `t`, so the constraint
/// fails exactly on an interval. The sup is located by exact bisection and
/// then snapped to the root of the affine piece, which is checked exactly.
/// When `fiber_beta` is `None` it is computed from the upper bound for `v 𝚙`.
pub fn compatible_beta_general(
    spec: &FibrationSpec,
    fiber_beta: Option<Scalar>,
) -> Result<FibrationReport> {
    let spec = spec.resolved()?;
    let family = spec.class_family()?;
    let fiber_term = match fiber_beta {
        Some(b) => b,
        None => beta_upper_bound(&family, &spec.fiber_weight()?)?.value,
    };
    let support_at = |p: &Vector, t: &Scalar| -> Result<Option<Scalar>> {
        let c = family.combine_class(&-t, &Scalar::one())?;
        c.polytope.map(|poly| poly.support_min(p)).transpose()
    };
    let mut basis_terms = Vec::new();
    let mut brackets = Vec::new();
    for f in &spec.factors {
        let beta_a = f.beta_class()?;
        let g = |t: &Scalar| -> Result<Scalar> {
            let m = support_at(&f.p, t)?
                .ok_or_else(|| Error::Precondition(format!("Δ_t is empty at t = {t}")))?;
            Ok(m - t * &f.c + &beta_a)
        };
        if g(&Scalar::zero()).is_err() {
            return Err(Error::Precondition("Δ_t is empty at t = 0".into()));
        }
        if g(&fiber_term)?.is_positive() {
            basis_terms.push(fiber_term.clone());
            brackets.push(None);
            continue;
        }
        let mut lo = Scalar::zero();
        let mut step = Scalar::one();
        let mut found = g(&lo)?.is_positive();
        for _ in 0..64 {
            if found {
                break;
            }
            lo = -step.clone();
            found = g(&lo)?.is_positive();
            step = &step * Scalar::int(2);
        }
        if !found {
            return Err(Error::NoConvergence {
                residual: f64::INFINITY,
            });
        }
        let iters = bisection_iters((&fiber_term - &lo).to_f64());
        let bracket = bisect_threshold(
            &mut |t| Ok(g(t)?.is_positive()),
            lo,
            fiber_term.clone(),
            iters,
        )?;
        let root = snap_root(&g, &bracket)?;
        basis_terms.push(root.unwrap_or_else(|| bracket.lo.midpoint(&bracket.hi).to_approx()));
        brackets.push(Some(bracket));
    }
    Ok(FibrationReport::from_terms(
        fiber_term,
        basis_terms,
        brackets,
    ))
}

/// Exact zero of a piecewise affine `g` inside `bracket`, tried from the
/// secant across the bracket and from the affine pieces on either side.
fn snap_root(g: &dyn Fn(&Scalar) -> Result<Scalar>, bracket: &Bracket) -> Result<Option<Scalar>> {
    let (lo, hi) = (&bracket.lo, &bracket.hi);
    let w = bracket.width();
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    let mut candidates = Vec::new();
    let d = &g_lo - &g_hi;
    if !d.is_zero() {
        candidates.push(lo + &g_lo * &w / &d);
    }
    let lo2 = lo - &w;
    if let Ok(g_lo2) = g(&lo2) {
        let slope = (&g_lo - g_lo2) / &w;
        if !slope.is_zero() {
            candidates.push(lo - &g_lo / &slope);
        }
    }
    let hi2 = hi + &w;
    if let Ok(g_hi2) = g(&hi2) {
        let slope = (g_hi2 - &g_hi) / &w;
        if !slope.is_zero() {
            candidates.push(hi - &g_hi / &slope);
        }
    }
    for r in candidates {
        if lo <= &r && &r <= hi && r.is_exact() && g(&r)?.is_zero() {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// With a toric fiber and the fiber term achieving the minimum (ties
/// included), `β_v(Y) = β^comp = fiber term`.
pub fn toric_fiber_sharpness(
    report: &mut FibrationReport,
    spec: &FibrationSpec,
) -> Result<Option<Scalar>> {
    if !spec.fiber_toric || !compatibly_fano_check(spec)?.holds {
        return Ok(None);
    }
    if report.achiever != Achiever::Fiber {
        return Ok(None);
    }
    report.sharp = true;
    report.conclusions.push(format!(
        "beta_v(Y, 2πc1(Y)) = beta^comp = beta_vp(X, 2πc1(X)) = {}",
        report.fiber_term
    ));
    Ok(Some(report.fiber_term.clone()))
}

/// K-semistability conclusions available when `β^comp >= 1`.
pub fn semistability_report(report: &FibrationReport, spec: &FibrationSpec) -> Result<Vec<String>> {
    if report.beta_comp < Scalar::one() {
        return Ok(Vec::new());
    }
    let spec = spec.resolved()?;
    let mut out = vec![
        "Y is K-semistable".to_string(),
        "every basis B_a is K-semistable".to_string(),
        "the fiber X is weighted K-semistable for the weight v·p".to_string(),
    ];
    if report.beta_comp == Scalar::one() {
        for (i, f) in spec.factors.iter().enumerate() {
            let b = f.beta_anticanonical()?;
            if b != Scalar::one() {
                return Err(Error::Inconsistent(format!(
                    "beta^comp = 1 forces beta(B_a) = 1, but factor {} has beta {b}",
                    f.label(i)
                )));
            }
        }
        out.push("beta_v(Y) = beta_vp(X) = beta(B_a) = 1".to_string());
    }
    Ok(out)
}

/// `P¹`-bundle: `Δ = [−1, 1]`, one factor `(p, c, dim)`.
pub fn p1_bundle_spec(
    p: &Scalar,
    c: &Scalar,
    dim: u32,
    lambda: &Scalar,
    beta_basis: &Scalar,
) -> Result<FibrationSpec> {
    let seg = Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])])?;
    Ok(FibrationSpec::proportional(
        seg,
        lambda.clone(),
        Weight::one(),
        vec![BasisFactor::new(
            dim,
            c.clone(),
            Vector(vec![p.clone()]),
            beta_basis.clone(),
        )],
    ))
}

/// Closed form of the weighted beta of `P¹` with weight `(p u + c)^d` on
/// `[−λ, λ]`.
pub fn p1_beta(p: &Scalar, c: &Scalar, d: u32, lambda: &Scalar) -> Result<Scalar> {
    if !p.is_positive() {
        return Err(Error::Precondition(format!("p = {p} must be positive")));
    }
    if !lambda.is_positive() {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let pl = p * lambda;
    if !(c > &pl) {
        return Err(Error::Precondition(format!(
            "need c > lambda p, got c = {c}, lambda p = {pl}"
        )));
    }
    let plus = &pl + c;
    let minus = c - &pl;
    let diff = |k: u32| plus.powi(k) - minus.powi(k);
    let d1 = Scalar::int(d as i64 + 1);
    let d2 = Scalar::int(d as i64 + 2);
    let num = p * &d2 * diff(d + 1);
    let den = (&pl - c) * &d2 * diff(d + 1) + d1 * diff(d + 2);
    num.checked_div(&den)
}

/// `min(δ_B r β0 / (1 + β0 (r − 1)), β0)`.
pub fn zz_delta(r: &Scalar, delta_b: &Scalar, beta0: &Scalar) -> Result<Scalar> {
    let one = Scalar::one();
    if !(r > &one) {
        return Err(Error::Precondition(format!("r = {r} must exceed 1")));
    }
    if !beta0.is_positive() || beta0 > &one {
        return Err(Error::Precondition(format!(
            "beta0 = {beta0} must lie in (0, 1]"
        )));
    }
    if !delta_b.is_positive() {
        return Err(Error::Precondition(format!(
            "delta_B = {delta_b} must be positive"
        )));
    }
    let first = (delta_b * r * beta0).checked_div(&(&one + beta0 * (r - &one)))?;
    Ok(first.min(beta0.clone()))
}

/// The three equivalent statements for a `P¹`-bundle with index ratio `r`:
/// `(rβ_B − 1)/(r − 1) >= β0`, `δ_B r β0/(1 + β0(r − 1)) >= β0`, and
/// `β^comp = β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ZzEquivalence {
    pub basis_bound: bool,
    pub delta_bound: bool,
    pub comp_equals_beta: bool,
}

impl ZzEquivalence {
    pub fn agree(&self) -> bool {
        self.basis_bound == self.delta_bound && self.delta_bound == self.comp_equals_beta
    }
}

pub fn zz_equivalence(
    r: &Scalar,
    beta_b: &Scalar,
    delta_b: &Scalar,
    beta0: &Scalar,
) -> Result<ZzEquivalence> {
    let one = Scalar::one();
    if !beta_b.is_positive() || beta_b > &one || beta_b > delta_b {
        return Err(Error::Precondition(format!(
            "need 0 < beta_B <= min(1, delta_B), got beta_B = {beta_b}, delta_B = {delta_b}"
        )));
    }
    if delta_b > beta_b && *beta_b != one {
        return Err(Error::Precondition(
            "delta_B > beta_B is only possible when beta_B = 1".into(),
        ));
    }
    let basis = (r * beta_b - &one).checked_div(&(r - &one))?;
    let delta_term = (delta_b * r * beta0).checked_div(&(&one + beta0 * (r - &one)))?;
    let beta = zz_delta(r, delta_b, beta0)?;
    let comp = basis.clone().min(beta0.clone());
    let out = ZzEquivalence {
        basis_bound: basis >= *beta0,
        delta_bound: delta_term >= *beta0,
        comp_equals_beta: comp == beta,
    };
    if !out.agree() {
        return Err(Error::Inconsistent(format!(
            "equivalence fails at r = {r}, beta_B = {beta_b}, beta0 = {beta0}: {out:?}"
        )));
    }
    Ok(out)
}

/// `2 (2n+1)! / ((n+2) (n! 2^n)^2)`.
pub fn sgr_beta(n: u32) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::Precondition("n must be at least 1".into()));
    }
    let num = BigInt::from(2) * factorial(2 * n + 1);
    let base = factorial(n) * (BigInt::from(1) << n as usize);
    let den = BigInt::from(n + 2) * &base * &base;
    Ok(Scalar::Exact(Q::new(num, den)))
}

#[derive(Clone, Debug, Serialize)]
pub struct SgrProbe {
    pub r: u32,
    pub n: u32,
    pub beta: Scalar,
    /// `r β(SGr(n, 2n+1)) − 1`; compatibly Fano needs it positive.
    pub margin: Scalar,
    pub compatibly_fano: bool,
}

/// `P¹`-bundle over `SGr(n, 2n+1)` with `n = r³ − 2` and `c = r`.
pub fn sgr_compatibly_fano_probe(r: u32) -> Result<SgrProbe> {
    if r < 2 {
        return Err(Error::Precondition("r must be at least 2".into()));
    }
    let n = r
        .checked_pow(3)
        .and_then(|x| x.checked_sub(2))
        .ok_or_else(|| Error::Precondition(format!("r = {r} is too large")))?;
    let beta = sgr_beta(n)?;
    let margin = Scalar::int(r as i64) * &beta - Scalar::one();
    Ok(SgrProbe {
        r,
        n,
        compatibly_fano: margin.is_positive(),
        beta,
        margin,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SgrScan {
    pub probes: Vec<SgrProbe>,
    /// Smallest `r` whose bundle is not compatibly Fano.
    pub first_failure: Option<u32>,
    /// Every scanned `r >= first_failure` also fails.
    pub fails_from_first_failure: bool,
    /// Smallest `r` from which `16 r² < (157/50)(r³ − 2)`. Since
    /// `C(2n, n) / 4^n <= 1/√(πn)` gives `r β < 4r / √(π(r³ − 2))`, which
    /// decreases in `r`, every `r` from here on fails without evaluation.
    pub bound_certifies_from: u32,
}

fn tail_bound_holds(r: u32) -> bool {
    let r = Scalar::int(r as i64);
    Scalar::int(16) * r.powi(2) < Scalar::ratio(157, 50) * (r.powi(3) - Scalar::int(2))
}

pub fn sgr_scan(r_max: u32) -> Result<SgrScan> {
    let probes: Vec<SgrProbe> = (2..=r_max)
        .map(sgr_compatibly_fano_probe)
        .collect::<Result<_>>()?;
    let first_failure = probes.iter().find(|p| !p.compatibly_fano).map(|p| p.r);
    let fails_from_first_failure = match first_failure {
        Some(r0) => probes
            .iter()
            .filter(|p| p.r >= r0)
            .all(|p| !p.compatibly_fano),
        None => false,
    };
    let bound_certifies_from = (2..)
        .find(|r| tail_bound_holds(*r))
        .expect("cubic beats quadratic");
    Ok(SgrScan {
        probes,
        first_failure,
        fails_from_first_failure,
        bound_certifies_from,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: u32,
    /// `β(B, 2πc1(B))`.
    pub beta_c1: Scalar,
    pub source: String,
}

/// Built-in bases: `P1`, `P2`, `Bl1P2`, `Bl1P3` (the `P¹`-bundle
/// `P(O ⊕ O(1))` over `P²`) and `SGr(n,2n+1)`.
pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    let entry = |dim: u32, beta: Scalar, source: &str| CatalogEntry {
        name: name.to_string(),
        dim,
        beta_c1: beta,
        source: source.to_string(),
    };
    match name {
        "P1" => Ok(entry(1, Scalar::one(), "symmetric polytope, barycenter 0")),
        "P2" => Ok(entry(2, Scalar::one(), "symmetric polytope, barycenter 0")),
        "Bl1P2" => {
            let p = Polytope::from_vertices(&[
                Vector::from_ints(&[-1, 0]),
                Vector::from_ints(&[0, -1]),
                Vector::from_ints(&[2, -1]),
                Vector::from_ints(&[-1, 2]),
            ])?;
            let b = fano_toric_beta(&p, &Weight::one(), BetaKind::ExactToric)?;
            Ok(entry(
                2,
                b.value,
                "toric barycenter of the anticanonical polytope",
            ))
        }
        "Bl1P3" => {
            let spec = p1_bundle_spec(
                &Scalar::one(),
                &Scalar::int(3),
                2,
                &Scalar::one(),
                &Scalar::one(),
            )?;
            let mut report = compatible_beta_fano_fiber(&spec)?;
            let beta = toric_fiber_sharpness(&mut report, &spec)?
                .ok_or_else(|| Error::Inconsistent("P(O+O(1)) over P2 should be sharp".into()))?;
            Ok(entry(
                3,
                beta,
                "P1-bundle P(O+O(1)) over P2, fiber term is sharp",
            ))
        }
        _ => parse_sgr(name)
            .map(|n| -> Result<CatalogEntry> {
                Ok(entry(
                    n * (n + 3) / 2,
                    sgr_beta(n)?,
                    "odd symplectic Grassmannian closed form",
                ))
            })
            .unwrap_or_else(|| Err(Error::Invalid(format!("unknown catalog entry {name:?}")))),
    }
}

fn parse_sgr(name: &str) -> Option<u32> {
    let inner = name.strip_prefix("SGr(")?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    let n: u32 = a.trim().parse().ok()?;
    let m: u32 = b.trim().parse().ok()?;
    (n >= 1 && m == 2 * n + 1).then_some(n)
}
