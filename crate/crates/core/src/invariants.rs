//! Weighted beta invariants of toric classes: the general upper bound, the
//! Fano toric value and the β/δ reporting rule.

use serde::{Deserialize, Serialize};

use crate::dh::{self, Measure};
use crate::error::{Error, Result};
use crate::geometry::{Polytope, ToricClassFamily};
use crate::oracle::{self, Bracket};
use crate::scalar::{Extended, Scalar, Vector};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaKind {
    /// Equality is claimed (toric data).
    ExactToric,
    /// Only the upper bound is established.
    UpperBoundOnly,
    /// The caller supplied the value of β itself.
    Supplied,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaConclusion {
    DeltaEqualsValue,
    DeltaAtLeastS,
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaReport {
    pub value: Scalar,
    pub kind: BetaKind,
    pub s_threshold: Extended,
    pub delta_conclusion: DeltaConclusion,
    /// Barycenter used, when the value came from one.
    pub witness: Option<Vector>,
}

impl BetaReport {
    pub fn new(
        value: Scalar,
        kind: BetaKind,
        s_threshold: Extended,
        witness: Option<Vector>,
    ) -> Result<Self> {
        let delta_conclusion = match &s_threshold {
            Extended::Infinity => DeltaConclusion::DeltaEqualsValue,
            Extended::Finite(s) if value > *s => {
                return Err(Error::Inconsistent(format!(
                    "beta = {value} exceeds the Kähler threshold {s}"
                )));
            }
            Extended::Finite(s) if value == *s => DeltaConclusion::DeltaAtLeastS,
            Extended::Finite(_) => DeltaConclusion::DeltaEqualsValue,
        };
        Ok(BetaReport {
            value,
            kind,
            s_threshold,
            delta_conclusion,
            witness,
        })
    }

    /// Human-readable consequence for `δ_v`.
    pub fn delta_statement(&self) -> String {
        match self.delta_conclusion {
            DeltaConclusion::DeltaEqualsValue => format!("delta_v = {}", self.value),
            DeltaConclusion::DeltaAtLeastS => format!("delta_v >= {}", self.s_threshold),
        }
    }
}

/// `β_v = min(s, δ_v)` read backwards from a known `β`.
pub fn beta_delta_report(s: &Scalar, beta: &Scalar) -> Result<BetaReport> {
    BetaReport::new(
        beta.clone(),
        BetaKind::Supplied,
        Extended::Finite(s.clone()),
        None,
    )
}

/// `β` of `t[w0]` with weight `v(·/t)` from `β` of `[w0]` with `v`.
pub fn scaling_transport(beta: &Scalar, t: &Scalar) -> Result<Scalar> {
    if !t.is_positive() {
        return Err(Error::Precondition(format!(
            "scale t = {t} must be positive"
        )));
    }
    beta.checked_div(t)
}

/// Value for a reflexive polytope from the ray through `-bary`.
pub fn fano_toric_beta(delta_c1: &Polytope, v: &Weight, kind: BetaKind) -> Result<BetaReport> {
    if !delta_c1.contains(&Vector::zeros(delta_c1.ambient_dim()))? {
        return Err(Error::OriginNotContained);
    }
    let b = dh::barycenter(&Measure::new(delta_c1.clone(), v.clone())?)?;
    let value = match delta_c1.ray_max_scale(&b.neg())? {
        Extended::Infinity => Scalar::one(),
        Extended::Finite(s) => s.checked_div(&(&s + Scalar::one()))?,
    };
    BetaReport::new(value, kind, Extended::Finite(Scalar::one()), Some(b))
}

/// Scan of `β -> [−β bary ∈ Δ_{2πc1 − β[w0]}]` on a uniform grid, refined by
/// bisection at the first infeasible grid point.
#[derive(Clone, Debug, Serialize)]
pub struct ScanCertificate {
    pub step: Scalar,
    pub grid_points: usize,
    /// Largest grid value with every grid value up to it feasible.
    pub feasible_prefix_end: Scalar,
    /// Feasible grid values found after the first infeasible one.
    pub feasible_after_gap: usize,
    pub bracket: Option<Bracket>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBound {
    pub value: Scalar,
    pub s_threshold: Extended,
    pub barycenter: Vector,
    /// Index of the halfspace that stops the feasible interval, if any.
    pub binding_facet: Option<usize>,
    pub certificate: ScanCertificate,
}

pub const SCAN_POINTS: usize = 1000;
const SCAN_BISECTION_ITERS: u32 = 48;

fn feasible(f: &ToricClassFamily, b: &Vector, beta: &Scalar) -> bool {
    let x = b.scale(&-beta);
    f.normals
        .iter()
        .zip(f.offsets(&-beta, &Scalar::one()))
        .all(|(n, off)| !(n.dot(&x) + off).is_negative())
}

fn scan(f: &ToricClassFamily, b: &Vector, upper: &Scalar) -> Result<ScanCertificate> {
    let step = upper / Scalar::int(SCAN_POINTS as i64);
    let mut prefix_end = Scalar::zero();
    let mut first_bad: Option<Scalar> = None;
    let mut feasible_after_gap = 0;
    for k in 1..SCAN_POINTS {
        let beta = &step * Scalar::int(k as i64);
        let ok = feasible(f, b, &beta);
        match (&first_bad, ok) {
            (None, true) => prefix_end = beta,
            (None, false) => first_bad = Some(beta),
            (Some(_), true) => feasible_after_gap += 1,
            (Some(_), false) => {}
        }
    }
    let bracket = match &first_bad {
        Some(hi) => Some(oracle::bisect_threshold(
            &mut |t| Ok(feasible(f, b, t)),
            prefix_end.clone(),
            hi.clone(),
            SCAN_BISECTION_ITERS,
        )?),
        None => None,
    };
    Ok(ScanCertificate {
        step,
        grid_points: SCAN_POINTS - 1,
        feasible_prefix_end: prefix_end,
        feasible_after_gap,
        bracket,
    })
}

/// `sup { β < s : −β bary_v([w0]) ∈ Δ_{2πc1 − β[w0]} }`.
///
/// Each halfspace reads `β (<n, bary> + λ0) <= λ1`; the barycenter lies in
/// `Δ_{[w0]}`, so every coefficient is nonnegative and the feasible set in
/// `β >= 0` is an interval ending at the smallest ratio.
pub fn beta_upper_bound(f: &ToricClassFamily, v: &Weight) -> Result<UpperBound> {
    let delta0 = f.omega0_polytope()?;
    let s = f.kahler_threshold()?;
    let b = dh::barycenter(&Measure::new(delta0, v.clone())?)?;
    let mut cut: Option<(Scalar, usize)> = None;
    for (i, ((n, l0), l1)) in f
        .normals
        .iter()
        .zip(&f.offsets_omega0)
        .zip(&f.offsets_c1)
        .enumerate()
    {
        let a = n.dot(&b) + l0;
        if a.is_negative() {
            return Err(Error::Inconsistent(format!(
                "barycenter {b} lies outside the polytope of [w0]"
            )));
        }
        if l1.is_negative() {
            return Err(Error::Inconsistent(format!(
                "offset {l1} of 2πc1 is negative; no β > 0 is feasible"
            )));
        }
        if a.is_positive() {
            let ratio = l1.checked_div(&a)?;
            if cut.as_ref().is_none_or(|(c, _)| ratio < *c) {
                cut = Some((ratio, i));
            }
        }
    }
    let (value, binding) = match (&s, cut) {
        (Extended::Finite(s), Some((c, i))) if c < *s => (c, Some(i)),
        (Extended::Finite(s), _) => (s.clone(), None),
        (Extended::Infinity, Some((c, i))) => (c, Some(i)),
        (Extended::Infinity, None) => {
            return Err(Error::Unbounded);
        }
    };
    let scan_top = match &s {
        Extended::Finite(s) => s.clone(),
        Extended::Infinity => &value * Scalar::int(2),
    };
    let certificate = scan(f, &b, &scan_top)?;
    Ok(UpperBound {
        value,
        s_threshold: s,
        barycenter: b,
        binding_facet: binding,
        certificate,
    })
}

/// The upper bound packaged with its δ reading.
pub fn beta_upper_report(
    f: &ToricClassFamily,
    v: &Weight,
    kind: BetaKind,
) -> Result<(BetaReport, UpperBound)> {
    let ub = beta_upper_bound(f, v)?;
    let report = BetaReport::new(
        ub.value.clone(),
        kind,
        ub.s_threshold.clone(),
        Some(ub.barycenter.clone()),
    )?;
    Ok((report, ub))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg() -> Polytope {
        Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])]).unwrap()
    }

    fn p1_family(lambda: Scalar) -> ToricClassFamily {
        ToricClassFamily::proportional(
            vec![Vector::from_ints(&[1]), Vector::from_ints(&[-1])],
            lambda,
        )
        .unwrap()
    }

    fn p2_family() -> ToricClassFamily {
        ToricClassFamily::proportional(
            vec![
                Vector::from_ints(&[1, 0]),
                Vector::from_ints(&[0, 1]),
                Vector::from_ints(&[-1, -1]),
            ],
            Scalar::one(),
        )
        .unwrap()
    }

    fn affine_power(p: i64, c: i64, d: u32) -> Weight {
        Weight::power_of_affine(Vector::from_ints(&[p]), Scalar::int(c), d)
    }

    #[test]
    fn upper_bound_examples() {
        let ub = beta_upper_bound(&p1_family(Scalar::one()), &affine_power(1, 3, 2)).unwrap();
        assert_eq!(ub.value, Scalar::ratio(14, 17));
        let br = ub.certificate.bracket.unwrap();
        assert!(br.contains(&ub.value));
        assert_eq!(ub.certificate.feasible_after_gap, 0);

        let ub = beta_upper_bound(&p2_family(), &Weight::one()).unwrap();
        assert_eq!(ub.value, Scalar::one());
        assert!(ub.certificate.bracket.is_none());

        let ub = beta_upper_bound(&p1_family(Scalar::one()), &affine_power(1, 2, 3)).unwrap();
        assert_eq!(ub.value, Scalar::ratio(50, 71));
    }

    #[test]
    fn fano_toric_examples() {
        let r = fano_toric_beta(&seg(), &affine_power(1, 3, 2), BetaKind::ExactToric).unwrap();
        assert_eq!(r.value, Scalar::ratio(14, 17));
        assert_eq!(r.delta_conclusion, DeltaConclusion::DeltaEqualsValue);
        let r = fano_toric_beta(&seg(), &affine_power(2, 3, 2), BetaKind::ExactToric).unwrap();
        assert_eq!(r.value, Scalar::ratio(31, 43));
        let r = fano_toric_beta(&seg(), &Weight::one(), BetaKind::ExactToric).unwrap();
        assert_eq!(r.value, Scalar::one());
        assert_eq!(r.delta_conclusion, DeltaConclusion::DeltaAtLeastS);
    }

    #[test]
    fn bl1p2_anticanonical() {
        let p = Polytope::from_vertices(&[
            Vector::from_ints(&[-1, 0]),
            Vector::from_ints(&[0, -1]),
            Vector::from_ints(&[2, -1]),
            Vector::from_ints(&[-1, 2]),
        ])
        .unwrap();
        let r = fano_toric_beta(&p, &Weight::one(), BetaKind::ExactToric).unwrap();
        assert_eq!(r.value, Scalar::ratio(6, 7));
    }

    #[test]
    fn origin_required() {
        let shifted =
            Polytope::from_vertices(&[Vector::from_ints(&[1]), Vector::from_ints(&[3])]).unwrap();
        assert!(matches!(
            fano_toric_beta(&shifted, &Weight::one(), BetaKind::ExactToric),
            Err(Error::OriginNotContained)
        ));
    }

    #[test]
    fn delta_reports() {
        let r = beta_delta_report(&Scalar::one(), &Scalar::ratio(14, 17)).unwrap();
        assert_eq!(r.delta_conclusion, DeltaConclusion::DeltaEqualsValue);
        let r = beta_delta_report(&Scalar::one(), &Scalar::one()).unwrap();
        assert_eq!(r.delta_conclusion, DeltaConclusion::DeltaAtLeastS);
        let r = beta_delta_report(&Scalar::int(2), &Scalar::int(2)).unwrap();
        assert_eq!(r.delta_statement(), "delta_v >= 2");
        assert!(beta_delta_report(&Scalar::one(), &Scalar::int(2)).is_err());
    }

    #[test]
    fn scaling_examples() {
        assert_eq!(
            scaling_transport(&Scalar::one(), &Scalar::int(2)).unwrap(),
            Scalar::ratio(1, 2)
        );
        assert_eq!(
            scaling_transport(&Scalar::ratio(14, 17), &Scalar::one()).unwrap(),
            Scalar::ratio(14, 17)
        );
        assert_eq!(
            scaling_transport(&Scalar::ratio(1, 2), &Scalar::ratio(1, 2)).unwrap(),
            Scalar::one()
        );
        assert!(scaling_transport(&Scalar::one(), &Scalar::zero()).is_err());
    }

    #[test]
    fn non_proportional_bound_below_threshold() {
        let f = ToricClassFamily::new(
            vec![
                Vector::from_ints(&[1, 0]),
                Vector::from_ints(&[0, 1]),
                Vector::from_ints(&[1, 1]),
                Vector::from_ints(&[-1, -1]),
            ],
            vec![
                Scalar::int(1),
                Scalar::int(1),
                Scalar::int(1),
                Scalar::int(2),
            ],
            vec![Scalar::one(); 4],
        )
        .unwrap();
        let ub = beta_upper_bound(&f, &Weight::one()).unwrap();
        assert!(ub.value <= Scalar::ratio(2, 3));
        assert_eq!(ub.certificate.feasible_after_gap, 0);
        if let Some(br) = &ub.certificate.bracket {
            assert!(br.contains(&ub.value));
        }
    }
}
