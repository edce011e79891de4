//! Checkers for sufficient conditions of weighted cscK existence and for the
//! hypotheses of the weighted J-equation.
//!
//! Analytic inputs that are not computed here (vanishing of the weighted
//! Futaki invariant, the normalization identity, the χ bound) enter as
//! asserted booleans and are echoed in the report.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CombinedClass, Polytope, ToricClassFamily};
use crate::invariants::{BetaKind, BetaReport, DeltaConclusion};
use crate::oracle::fd_hessian;
use crate::scalar::{Extended, Scalar, Vector};
use crate::weights::{bar_w, check_w_eps, hat_v, ProductPoint, Weight};

/// Strict inequalities on approximate margins need to clear this.
pub const APPROX_MARGIN: f64 = 1e-9;
/// Relative eigenvalue floor for the finite-difference convexity test.
pub const HESSIAN_EIG_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_eps: Scalar,
    pub provenance: String,
}

impl DeltaEstimate {
    pub fn new(delta_eps: Scalar, provenance: impl Into<String>) -> Result<Self> {
        if !delta_eps.is_positive() {
            return Err(Error::Precondition(format!(
                "delta_eps = {delta_eps} must be positive"
            )));
        }
        Ok(DeltaEstimate {
            delta_eps,
            provenance: provenance.into(),
        })
    }

    pub fn asserted(delta_eps: Scalar) -> Result<Self> {
        Self::new(delta_eps, "user-asserted")
    }

    /// `δ_ε = δ − ε` from a beta value. When `β_v < s` then `δ_v = β_v`, and
    /// otherwise `δ_v >= s`; the torus-reduced delta is at least `δ_v`.
    pub fn from_beta(report: &BetaReport, eps: &Scalar) -> Result<Self> {
        if report.kind == BetaKind::UpperBoundOnly {
            return Err(Error::Precondition(
                "an upper bound on beta gives no lower bound on delta".into(),
            ));
        }
        if eps.is_negative() {
            return Err(Error::Precondition(format!(
                "eps = {eps} must be nonnegative"
            )));
        }
        let (base, how) = match (&report.delta_conclusion, &report.s_threshold) {
            (DeltaConclusion::DeltaEqualsValue, _) => {
                (report.value.clone(), "delta_v = beta_v < s")
            }
            (DeltaConclusion::DeltaAtLeastS, Extended::Finite(s)) => {
                (s.clone(), "delta_v >= s = beta_v")
            }
            (DeltaConclusion::DeltaAtLeastS, Extended::Infinity) => {
                return Err(Error::Precondition(
                    "infinite threshold gives no finite delta".into(),
                ));
            }
        };
        Self::new(
            &base - eps,
            format!(
                "from beta = {} ({how}), reduced delta >= delta_v, minus eps = {eps}",
                report.value
            ),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<Scalar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    /// The margin is exact and attained (not a grid estimate).
    pub certified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Verdict {
    fn flag(name: &str, value: bool, note: &str) -> Self {
        Verdict {
            name: name.into(),
            status: if value { Status::Pass } else { Status::Fail },
            margin: None,
            witness: None,
            certified: true,
            note: Some(note.into()),
        }
    }

    fn not_applicable(name: &str, why: &str) -> Self {
        Verdict {
            name: name.into(),
            status: Status::NotApplicable,
            margin: None,
            witness: None,
            certified: false,
            note: Some(why.into()),
        }
    }

    fn from_margin(
        name: &str,
        margin: Scalar,
        witness: Option<serde_json::Value>,
        certified: bool,
    ) -> Self {
        let status = if strictly_positive(&margin) {
            Status::Pass
        } else {
            Status::Fail
        };
        Verdict {
            name: name.into(),
            status,
            margin: Some(margin),
            witness,
            certified,
            note: None,
        }
    }
}

fn strictly_positive(x: &Scalar) -> bool {
    if x.is_exact() {
        x.is_positive()
    } else {
        x.to_f64() > APPROX_MARGIN
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub conditions: Vec<Verdict>,
    pub overall: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(conditions: Vec<Verdict>, notes: Vec<String>) -> Self {
        let overall = conditions.iter().all(|c| c.status == Status::Pass);
        ConditionReport {
            conditions,
            overall,
            notes,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Verdict> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// `Δ_{θ_ε}` for `θ_ε = δ_ε [ω0] − 2πc1(X)`.
pub fn theta_eps_polytope(f: &ToricClassFamily, d: &DeltaEstimate) -> Result<CombinedClass> {
    f.combine_class(&d.delta_eps, &Scalar::int(-1))
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeConfig {
    /// Barycentric grid density per simplex.
    pub grid: usize,
    /// Number of local halvings around the running argmin.
    pub levels: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            grid: 12,
            levels: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InfResult {
    pub value: Scalar,
    pub witness: ProductPoint,
    pub certified: bool,
    /// Spacing of the finest grid used in `x` (0 when only vertices were needed).
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct InfShape {
    pub affine_in_y: bool,
    /// Concave in `x` for each fixed `y`, so the minimum sits at a vertex.
    pub concave_in_x: bool,
}

fn grid_of(p: &Polytope, density: usize) -> Result<Vec<Vector>> {
    if !p.is_full_dimensional() {
        return Ok(p.vertices().to_vec());
    }
    let mut out = Vec::new();
    for s in crate::geometry::triangulate(p)? {
        out.extend(s.grid_points(density));
    }
    Ok(out)
}

fn diameter(p: &Polytope) -> f64 {
    let vs: Vec<Vec<f64>> = p.vertices().iter().map(Vector::to_f64).collect();
    let mut d: f64 = 0.0;
    for a in &vs {
        for b in &vs {
            d = d.max(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt(),
            );
        }
    }
    d
}

/// `inf f` over `Dx × Dy`. In `y` only the vertices of `Dy` are visited when
/// `f` is affine there; in `x` a grid is refined around the running argmin.
pub fn inf_product(
    f: &dyn Fn(&ProductPoint) -> Result<Scalar>,
    dx: &Polytope,
    dy: &Polytope,
    shape: InfShape,
    cfg: &ProbeConfig,
) -> Result<InfResult> {
    let ys = if shape.affine_in_y {
        dy.vertices().to_vec()
    } else {
        grid_of(dy, cfg.grid)?
    };
    let inner = |x: &Vector| -> Result<(Scalar, Vector)> {
        let mut best: Option<(Scalar, Vector)> = None;
        for y in &ys {
            let v = f(&ProductPoint::new(x.clone(), y.clone()))?;
            if !v.is_exact() && !v.to_f64().is_finite() {
                return Err(Error::Invalid(format!(
                    "non-finite value at x = {x}, y = {y}"
                )));
            }
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, y.clone()));
            }
        }
        best.ok_or_else(|| Error::Empty("Dy has no points".into()))
    };
    let scan = |pts: &[Vector]| -> Result<(Scalar, ProductPoint)> {
        let mut best: Option<(Scalar, ProductPoint)> = None;
        for x in pts {
            let (v, y) = inner(x)?;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, ProductPoint::new(x.clone(), y)));
            }
        }
        best.ok_or_else(|| Error::Empty("Dx has no points".into()))
    };
    let certified = shape.affine_in_y && shape.concave_in_x;
    if certified || !dx.is_full_dimensional() {
        let (value, witness) = scan(dx.vertices())?;
        return Ok(InfResult {
            value,
            witness,
            certified,
            resolution: 0.0,
        });
    }
    let (mut value, mut witness) = scan(&grid_of(dx, cfg.grid)?)?;
    let mut k = Scalar::one();
    let half = Scalar::ratio(1, 2);
    for _ in 0..cfg.levels {
        k = &k * &half;
        let t = witness.x.scale(&(Scalar::one() - &k));
        let local = dx.affine_image(&k, &t)?;
        let (v, w) = scan(&grid_of(&local, cfg.grid)?)?;
        if v < value {
            value = v;
            witness = w;
        }
    }
    let resolution = diameter(dx) * k.to_f64() / cfg.grid as f64;
    Ok(InfResult {
        value,
        witness,
        certified: false,
        resolution,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Convexity {
    CertifiedConvex,
    ConvexOnGrid {
        points: usize,
        skipped: usize,
        min_eigenvalue: f64,
    },
    NotConvex {
        x: Vec<f64>,
        y: Vector,
        direction: Vec<f64>,
        eigenvalue: f64,
    },
}

impl Convexity {
    pub fn is_convex(&self) -> bool {
        !matches!(self, Convexity::NotConvex { .. })
    }
}

/// Finite-difference Hessian test of `x -> f(x, y)` on interior grid points
/// of `dx`, for each `y` in `ys`.
pub fn probe_convex(
    f: &dyn Fn(&Vector, &Vector) -> Result<Scalar>,
    dx: &Polytope,
    ys: &[Vector],
    cfg: &ProbeConfig,
) -> Result<Convexity> {
    if !dx.is_full_dimensional() {
        return Err(Error::Degenerate(
            "convexity probe needs a full-dimensional domain".into(),
        ));
    }
    let r = dx.ambient_dim();
    let verts: Vec<Vec<f64>> = dx.vertices().iter().map(Vector::to_f64).collect();
    let center: Vec<f64> = (0..r)
        .map(|i| verts.iter().map(|v| v[i]).sum::<f64>() / verts.len() as f64)
        .collect();
    let h = 1e-3 * diameter(dx);
    let mut points = 0;
    let mut skipped = 0;
    let mut min_eig = f64::INFINITY;
    for x in grid_of(dx, cfg.grid)? {
        // pull grid points slightly inside so the stencil fits
        let xf: Vec<f64> = x
            .to_f64()
            .iter()
            .zip(&center)
            .map(|(a, c)| c + 0.98 * (a - c))
            .collect();
        for y in ys {
            let g = |z: &[f64]| -> Result<f64> { Ok(f(&Vector::from_f64(z), y)?.to_f64()) };
            let hess = match fd_hessian(&g, &xf, h, dx) {
                Ok(m) => m,
                Err(Error::Precondition(_)) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            points += 1;
            let m = DMatrix::from_fn(r, r, |i, j| hess[i][j]);
            let scale = hess
                .iter()
                .flatten()
                .fold(g(&xf)?.abs(), |a, b| a.max(b.abs()))
                .max(1.0);
            let eig = SymmetricEigen::new(m);
            let (idx, lambda) =
                eig.eigenvalues
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |(bi, bv), (i, v)| if *v < bv { (i, *v) } else { (bi, bv) },
                    );
            min_eig = min_eig.min(lambda);
            if lambda < -HESSIAN_EIG_TOL * scale {
                return Ok(Convexity::NotConvex {
                    x: xf,
                    y: y.clone(),
                    direction: eig.eigenvectors.column(idx).iter().copied().collect(),
                    eigenvalue: lambda,
                });
            }
        }
    }
    if points == 0 {
        return Err(Error::Degenerate(
            "no grid point leaves room for the difference stencil".into(),
        ));
    }
    Ok(Convexity::ConvexOnGrid {
        points,
        skipped,
        min_eigenvalue: min_eig,
    })
}

/// Convexity of `x -> w̌_ε(x, y)` for every vertex `y` of `dy`.
pub fn convexity_probe(
    v: &Weight,
    w: &Weight,
    d: &DeltaEstimate,
    n: u32,
    dx: &Polytope,
    dy: &Polytope,
    cfg: &ProbeConfig,
) -> Result<Convexity> {
    // log v affine: w̌_ε = affine − w/2
    if v.is_log_affine() && w.is_certified_concave() {
        return Ok(Convexity::CertifiedConvex);
    }
    let f = |x: &Vector, y: &Vector| {
        check_w_eps(
            v,
            w,
            &d.delta_eps,
            n,
            &ProductPoint::new(x.clone(), y.clone()),
        )
    };
    probe_convex(&f, dx, dy.vertices(), cfg)
}

/// Reading of the convexity hypothesis where `log v` affine and `w` convex
/// suffice; reported next to the literal one when they differ.
fn convexity_other_reading(v: &Weight, w: &Weight) -> Option<bool> {
    (v.is_log_affine() && w.is_certified_convex()).then_some(true)
}

fn json<T: Serialize>(x: &T) -> Option<serde_json::Value> {
    serde_json::to_value(x).ok()
}

#[allow(clippy::too_many_arguments)]
pub fn exi_delta_check(
    f: &ToricClassFamily,
    v: &Weight,
    w: &Weight,
    d: &DeltaEstimate,
    n: u32,
    futaki_vanishes: bool,
    cfg: &ProbeConfig,
) -> Result<ConditionReport> {
    if n == 0 {
        return Err(Error::Precondition(
            "complex dimension n must be at least 1".into(),
        ));
    }
    let delta = f.omega0_polytope()?;
    v.check_positive_on(&delta)?;
    let mut out = Vec::new();
    let mut notes = vec![format!("delta_eps = {} ({})", d.delta_eps, d.provenance)];
    out.push(Verdict::flag(
        "futaki_vanishes",
        futaki_vanishes,
        "asserted by the caller",
    ));

    let theta = theta_eps_polytope(f, d)?;
    out.push(Verdict {
        name: "theta_eps_kahler".into(),
        status: if theta.kahler_proper {
            Status::Pass
        } else {
            Status::Fail
        },
        margin: None,
        witness: json(&theta.offsets),
        certified: true,
        note: None,
    });

    let s = f.kahler_threshold()?;
    let shape_w = InfShape {
        affine_in_y: true,
        concave_in_x: v.is_log_affine() && w.is_certified_convex(),
    };
    match (&theta.polytope, theta.kahler_proper) {
        (Some(dy), true) => {
            let g = |pt: &ProductPoint| check_w_eps(v, w, &d.delta_eps, n, pt);
            let inf = inf_product(&g, &delta, dy, shape_w, cfg)?;
            let extra = match &s {
                Extended::Finite(s) => Some(Scalar::int(n as i64 - 1) * (s - &d.delta_eps)),
                Extended::Infinity if n == 1 => Some(Scalar::zero()),
                Extended::Infinity => None,
            };
            match extra {
                Some(e) => out.push(Verdict::from_margin(
                    "inf_check_w",
                    &inf.value + e,
                    json(&inf),
                    inf.certified,
                )),
                None => {
                    let mut v = Verdict::flag(
                        "inf_check_w",
                        true,
                        "Kähler threshold is infinite and n > 1",
                    );
                    v.witness = json(&inf);
                    out.push(v);
                }
            }
        }
        _ => out.push(Verdict::not_applicable(
            "inf_check_w",
            "theta_eps is not Kähler",
        )),
    }

    let shape_v = InfShape {
        affine_in_y: true,
        concave_in_x: v.is_log_affine(),
    };
    let hv = |pt: &ProductPoint| hat_v(v, &pt.x, &pt.y);
    let inf = inf_product(&hv, &delta, &delta, shape_v, cfg)?;
    out.push(Verdict::from_margin(
        "one_plus_inf_hat_v",
        Scalar::one() + &inf.value,
        json(&inf),
        inf.certified,
    ));

    match (&theta.polytope, theta.kahler_proper) {
        (Some(dy), true) => {
            let c = convexity_probe(v, w, d, n, &delta, dy, cfg)?;
            let literal = c.is_convex();
            if let Some(other) = convexity_other_reading(v, w) {
                if other != literal {
                    notes.push(
                        "convexity: the literal check_w contains -w/2 and fails here, while the reading \
                         \"log v affine and w convex\" would accept it"
                            .into(),
                    );
                }
            }
            out.push(Verdict {
                name: "check_w_convex".into(),
                status: if literal { Status::Pass } else { Status::Fail },
                margin: None,
                certified: matches!(c, Convexity::CertifiedConvex),
                witness: json(&c),
                note: None,
            });
        }
        _ => out.push(Verdict::not_applicable(
            "check_w_convex",
            "theta_eps is not Kähler",
        )),
    }
    Ok(ConditionReport::new(out, notes))
}

/// The `P¹` case with `[ω0] = 2πc1`: `δ_ε > 1` and `inf w̌_ε > 0` over
/// `[−1, 1] × [−(δ_ε − 1), δ_ε − 1]`, plus the asserted Futaki flag.
#[allow(non_snake_case)]
pub fn p1_cscK_check(
    v: &Weight,
    w: &Weight,
    d: &DeltaEstimate,
    futaki_vanishes: bool,
    cfg: &ProbeConfig,
) -> Result<ConditionReport> {
    let seg = Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])])?;
    v.check_positive_on(&seg)?;
    let one = Scalar::one();
    let mut out = vec![Verdict::flag(
        "futaki_vanishes",
        futaki_vanishes,
        "asserted by the caller",
    )];
    let gap = &d.delta_eps - &one;
    out.push(Verdict::from_margin(
        "delta_eps_gt_1",
        gap.clone(),
        None,
        gap.is_exact(),
    ));
    if gap.is_negative() {
        out.push(Verdict::not_applicable(
            "inf_check_w",
            "delta_eps < 1 leaves theta_eps empty",
        ));
    } else {
        let dy = Polytope::from_vertices(&[Vector(vec![-gap.clone()]), Vector(vec![gap])])?;
        let g = |pt: &ProductPoint| check_w_eps(v, w, &d.delta_eps, 1, pt);
        let shape = InfShape {
            affine_in_y: true,
            concave_in_x: v.is_log_affine() && w.is_certified_convex(),
        };
        let inf = inf_product(&g, &seg, &dy, shape, cfg)?;
        out.push(Verdict::from_margin(
            "inf_check_w",
            inf.value.clone(),
            json(&inf),
            inf.certified,
        ));
    }
    Ok(ConditionReport::new(
        out,
        vec![format!("delta_eps = {} ({})", d.delta_eps, d.provenance)],
    ))
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct JAsserted {
    pub normalization: bool,
    pub chi_bound: bool,
}

/// Hypotheses of the weighted J-equation existence result: convexity of
/// `x -> w̄(x, y)`, `1 + inf v̂ > 0`, and two asserted analytic conditions.
pub fn j_hypotheses_check(
    v: &Weight,
    w_hat: &Weight,
    dx: &Polytope,
    dy: &Polytope,
    asserted: JAsserted,
    cfg: &ProbeConfig,
) -> Result<ConditionReport> {
    v.check_positive_on(dx)?;
    let mut out = Vec::new();
    let convex = if v.is_log_affine() && w_hat.is_certified_convex() {
        Convexity::CertifiedConvex
    } else {
        let f = |x: &Vector, y: &Vector| bar_w(v, w_hat, &ProductPoint::new(x.clone(), y.clone()));
        probe_convex(&f, dx, dy.vertices(), cfg)?
    };
    out.push(Verdict {
        name: "bar_w_convex".into(),
        status: if convex.is_convex() {
            Status::Pass
        } else {
            Status::Fail
        },
        margin: None,
        certified: matches!(convex, Convexity::CertifiedConvex),
        witness: json(&convex),
        note: None,
    });
    let hv = |pt: &ProductPoint| hat_v(v, &pt.x, &pt.y);
    let shape = InfShape {
        affine_in_y: true,
        concave_in_x: v.is_log_affine(),
    };
    let inf = inf_product(&hv, dx, dx, shape, cfg)?;
    out.push(Verdict::from_margin(
        "one_plus_inf_hat_v",
        Scalar::one() + &inf.value,
        json(&inf),
        inf.certified,
    ));
    out.push(Verdict::flag(
        "normalization",
        asserted.normalization,
        "asserted by the caller",
    ));
    out.push(Verdict::flag(
        "chi_bound",
        asserted.chi_bound,
        "asserted by the caller",
    ));
    Ok(ConditionReport::new(out, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{grid_inf, OracleConfig};

    fn seg() -> Polytope {
        Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])]).unwrap()
    }

    fn p1(lambda: Scalar) -> ToricClassFamily {
        ToricClassFamily::proportional(
            vec![Vector::from_ints(&[1]), Vector::from_ints(&[-1])],
            lambda,
        )
        .unwrap()
    }

    fn est(q: Scalar) -> DeltaEstimate {
        DeltaEstimate::asserted(q).unwrap()
    }

    fn cw(k: i64) -> Weight {
        Weight::constant(Scalar::int(k))
    }

    #[test]
    fn theta_examples() {
        let f = p1(Scalar::one());
        let t = theta_eps_polytope(&f, &est(Scalar::int(2))).unwrap();
        assert!(t.kahler_proper);
        assert!(t.polytope.unwrap().same_set(&seg()));
        assert!(
            !theta_eps_polytope(&f, &est(Scalar::one()))
                .unwrap()
                .kahler_proper
        );
        let t = theta_eps_polytope(&f, &est(Scalar::ratio(3, 2))).unwrap();
        assert!(t.kahler_proper);
        let half = Polytope::from_vertices(&[
            Vector(vec![Scalar::ratio(-1, 2)]),
            Vector(vec![Scalar::ratio(1, 2)]),
        ])
        .unwrap();
        assert!(t.polytope.unwrap().same_set(&half));
    }

    #[test]
    fn inf_product_examples() {
        let cfg = ProbeConfig::default();
        let c = |_: &ProductPoint| Ok(Scalar::ratio(2, 3));
        assert_eq!(
            inf_product(&c, &seg(), &seg(), InfShape::default(), &cfg)
                .unwrap()
                .value,
            Scalar::ratio(2, 3)
        );
        let g = |pt: &ProductPoint| check_w_eps(&Weight::one(), &cw(2), &Scalar::one(), 1, pt);
        assert_eq!(
            inf_product(
                &g,
                &seg(),
                &seg(),
                InfShape {
                    affine_in_y: true,
                    concave_in_x: true
                },
                &cfg
            )
            .unwrap()
            .value,
            Scalar::zero()
        );
        let la = Weight::log_affine(Vector::from_ints(&[1]), Scalar::zero());
        let hv = |pt: &ProductPoint| hat_v(&la, &pt.x, &pt.y);
        let r = inf_product(
            &hv,
            &seg(),
            &seg(),
            InfShape {
                affine_in_y: true,
                concave_in_x: true,
            },
            &cfg,
        )
        .unwrap();
        assert_eq!(r.value, Scalar::int(-2));
        assert!(r.certified);
    }

    #[test]
    fn inf_product_matches_grid_oracle() {
        let v = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let w = cw(0);
        let dy = Polytope::from_vertices(&[
            Vector(vec![Scalar::ratio(-1, 2)]),
            Vector(vec![Scalar::ratio(1, 2)]),
        ])
        .unwrap();
        let g = |pt: &ProductPoint| check_w_eps(&v, &w, &Scalar::ratio(3, 2), 1, pt);
        let ours = inf_product(
            &g,
            &seg(),
            &dy,
            InfShape {
                affine_in_y: true,
                concave_in_x: false,
            },
            &ProbeConfig::default(),
        )
        .unwrap();
        let square = Polytope::from_vertices(&[
            Vector(vec![Scalar::int(-1), Scalar::ratio(-1, 2)]),
            Vector(vec![Scalar::int(1), Scalar::ratio(-1, 2)]),
            Vector(vec![Scalar::int(-1), Scalar::ratio(1, 2)]),
            Vector(vec![Scalar::int(1), Scalar::ratio(1, 2)]),
        ])
        .unwrap();
        let joint = |z: &Vector| {
            g(&ProductPoint::new(
                Vector(vec![z[0].clone()]),
                Vector(vec![z[1].clone()]),
            ))
        };
        let (oracle, _) = grid_inf(
            &joint,
            &square,
            &OracleConfig {
                grid: 64,
                ..OracleConfig::default()
            },
        )
        .unwrap();
        assert!((ours.value.to_f64() - oracle.to_f64()).abs() < 1e-6);
    }

    #[test]
    fn convexity_examples() {
        let cfg = ProbeConfig::default();
        let d = est(Scalar::int(2));
        let c = convexity_probe(&Weight::one(), &cw(3), &d, 1, &seg(), &seg(), &cfg).unwrap();
        assert!(matches!(c, Convexity::CertifiedConvex));
        let la = Weight::log_affine(Vector::from_ints(&[1]), Scalar::zero());
        let c = convexity_probe(&la, &cw(3), &d, 1, &seg(), &seg(), &cfg).unwrap();
        assert!(matches!(c, Convexity::CertifiedConvex));
        // d²/du² of 2(u − y)/(u + 3) is −4(3 + y)/(u + 3)³ < 0
        let v = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let point = Polytope::from_vertices(&[Vector::from_ints(&[0])]).unwrap();
        let c = convexity_probe(&v, &cw(0), &est(Scalar::one()), 1, &seg(), &point, &cfg).unwrap();
        match c {
            Convexity::NotConvex { eigenvalue, x, .. } => {
                let u = x[0];
                assert!((eigenvalue + 12.0 / (u + 3.0).powi(3)).abs() < 1e-4);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
        // a convex quadratic in x passes on the grid
        let q = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let c = probe_convex(&|x, _| q.eval(x), &seg(), &[Vector::from_ints(&[0])], &cfg).unwrap();
        assert!(matches!(c, Convexity::ConvexOnGrid { .. }));
    }

    #[test]
    fn p1_check_boundary() {
        let cfg = ProbeConfig::default();
        let r = p1_cscK_check(
            &Weight::one(),
            &cw(2),
            &est(Scalar::ratio(3, 2)),
            true,
            &cfg,
        )
        .unwrap();
        assert!(r.overall);
        assert_eq!(
            r.get("inf_check_w").unwrap().margin,
            Some(Scalar::ratio(1, 2))
        );
        let r = p1_cscK_check(&Weight::one(), &cw(2), &est(Scalar::one()), true, &cfg).unwrap();
        assert!(!r.overall);
        let tiny = Scalar::one() + Scalar::ratio(1, 1_000_000_000);
        assert!(
            p1_cscK_check(&Weight::one(), &cw(2), &est(tiny), true, &cfg)
                .unwrap()
                .overall
        );
        assert!(
            !p1_cscK_check(&Weight::one(), &cw(2), &est(Scalar::int(2)), false, &cfg)
                .unwrap()
                .overall
        );
        let v = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let r = p1_cscK_check(&v, &cw(0), &est(Scalar::ratio(3, 2)), true, &cfg).unwrap();
        assert!(r.get("inf_check_w").unwrap().margin.is_some());
    }

    #[test]
    fn exi_delta_constant_family() {
        let cfg = ProbeConfig::default();
        let f = p1(Scalar::one());
        let r = exi_delta_check(
            &f,
            &Weight::one(),
            &cw(2),
            &est(Scalar::int(2)),
            1,
            true,
            &cfg,
        )
        .unwrap();
        assert!(r.overall, "{r:?}");
        assert_eq!(r.get("inf_check_w").unwrap().margin, Some(Scalar::one()));
        assert_eq!(
            r.get("one_plus_inf_hat_v").unwrap().margin,
            Some(Scalar::one())
        );
        let r = exi_delta_check(
            &f,
            &Weight::one(),
            &cw(2),
            &est(Scalar::int(2)),
            1,
            false,
            &cfg,
        )
        .unwrap();
        assert!(!r.overall);
        let r = exi_delta_check(
            &f,
            &Weight::one(),
            &cw(2),
            &est(Scalar::ratio(1, 2)),
            1,
            true,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.get("theta_eps_kahler").unwrap().status, Status::Fail);
        assert_eq!(r.get("inf_check_w").unwrap().status, Status::NotApplicable);
        assert!(!r.overall);
    }

    #[test]
    fn sign_readings_differ_for_convex_w() {
        let cfg = ProbeConfig::default();
        let f = p1(Scalar::one());
        let w = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let r =
            exi_delta_check(&f, &Weight::one(), &w, &est(Scalar::int(2)), 1, true, &cfg).unwrap();
        assert_eq!(r.get("check_w_convex").unwrap().status, Status::Fail);
        assert!(r.notes.iter().any(|n| n.contains("literal")));
    }

    #[test]
    fn j_examples() {
        let cfg = ProbeConfig::default();
        let ok = JAsserted {
            normalization: true,
            chi_bound: true,
        };
        let r = j_hypotheses_check(&Weight::one(), &cw(2), &seg(), &seg(), ok, &cfg).unwrap();
        assert!(r.overall);
        assert_eq!(
            r.get("one_plus_inf_hat_v").unwrap().margin,
            Some(Scalar::one())
        );
        let r = j_hypotheses_check(
            &Weight::one(),
            &cw(2),
            &seg(),
            &seg(),
            JAsserted {
                normalization: false,
                chi_bound: true,
            },
            &cfg,
        )
        .unwrap();
        assert!(!r.overall);
        let v = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(2), 3);
        let r = j_hypotheses_check(&v, &cw(2), &seg(), &seg(), ok, &cfg).unwrap();
        assert_eq!(
            r.get("one_plus_inf_hat_v").unwrap().margin,
            Some(Scalar::int(-5))
        );
        assert!(!r.overall);
    }

    #[test]
    fn delta_from_beta() {
        let r =
            crate::invariants::beta_delta_report(&Scalar::one(), &Scalar::ratio(14, 17)).unwrap();
        let d = DeltaEstimate::from_beta(&r, &Scalar::ratio(1, 17)).unwrap();
        assert_eq!(d.delta_eps, Scalar::ratio(13, 17));
        let mut ub = r.clone();
        ub.kind = BetaKind::UpperBoundOnly;
        assert!(DeltaEstimate::from_beta(&ub, &Scalar::zero()).is_err());
    }
}
