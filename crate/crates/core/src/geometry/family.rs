//! Linear families of moment polytopes `t1 [w0] + t2 2πc1(X)` over a fixed
//! set of facet normals.

use num_rational::BigRational as Q;
use serde::{Deserialize, Serialize};

use super::polytope::{combinations, to_q, Halfspace, Polytope};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Extended, Scalar, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToricClassFamily {
    pub normals: Vec<Vector>,
    pub offsets_omega0: Vec<Scalar>,
    pub offsets_c1: Vec<Scalar>,
}

/// Result of combining two classes: the polytope (absent when the system is
/// infeasible) and whether the combination is Kähler-proper.
#[derive(Clone, Debug)]
pub struct CombinedClass {
    pub polytope: Option<Polytope>,
    pub kahler_proper: bool,
    pub offsets: Vec<Scalar>,
}

impl ToricClassFamily {
    pub fn new(
        normals: Vec<Vector>,
        offsets_omega0: Vec<Scalar>,
        offsets_c1: Vec<Scalar>,
    ) -> Result<Self> {
        let f = ToricClassFamily {
            normals,
            offsets_omega0,
            offsets_c1,
        };
        f.validate()?;
        Ok(f)
    }

    /// Family whose anticanonical offsets are all 1 and `[w0] = λ 2πc1`.
    pub fn proportional(normals: Vec<Vector>, lambda: Scalar) -> Result<Self> {
        let m = normals.len();
        Self::new(normals, vec![lambda; m], vec![Scalar::one(); m])
    }

    pub fn validate(&self) -> Result<()> {
        if self.normals.is_empty() {
            return Err(Error::Empty("class family has no normals".into()));
        }
        let m = self.normals.len();
        for (name, len) in [
            ("offsets_omega0", self.offsets_omega0.len()),
            ("offsets_c1", self.offsets_c1.len()),
        ] {
            if len != m {
                return Err(Error::Invalid(format!(
                    "{name} has {len} entries for {m} normals"
                )));
            }
        }
        let r = self.ambient_dim();
        for n in &self.normals {
            n.check_dim(r)?;
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.normals[0].dim()
    }

    /// Offsets of `t1 [w0] + t2 2πc1`, exact when inputs are.
    pub fn offsets(&self, t1: &Scalar, t2: &Scalar) -> Vec<Scalar> {
        self.offsets_omega0
            .iter()
            .zip(&self.offsets_c1)
            .map(|(a, b)| t1 * a + t2 * b)
            .collect()
    }

    pub fn combine_class(&self, t1: &Scalar, t2: &Scalar) -> Result<CombinedClass> {
        let offsets = self.offsets(t1, t2);
        let halfspaces: Vec<Halfspace> = self
            .normals
            .iter()
            .zip(&offsets)
            .map(|(n, b)| Halfspace::new(n.clone(), b.clone()))
            .collect();
        let polytope = match Polytope::from_halfspaces(&halfspaces) {
            Ok(p) => p,
            Err(Error::EmptyPolytope) => {
                return Ok(CombinedClass {
                    polytope: None,
                    kahler_proper: false,
                    offsets,
                });
            }
            Err(e) => return Err(e),
        };
        let mut proper = polytope.is_full_dimensional();
        if proper {
            let facet_dim = polytope.ambient_dim() - 1;
            for h in &halfspaces {
                if polytope.face_dim(h)? != Some(facet_dim) {
                    proper = false;
                    break;
                }
            }
        }
        Ok(CombinedClass {
            polytope: Some(polytope),
            kahler_proper: proper,
            offsets,
        })
    }

    /// The moment polytope of `[w0]` itself.
    pub fn omega0_polytope(&self) -> Result<Polytope> {
        let c = self.combine_class(&Scalar::one(), &Scalar::zero())?;
        match (c.polytope, c.kahler_proper) {
            (Some(p), true) => Ok(p),
            _ => Err(Error::NotKahler(
                "[w0] does not give a Kähler-proper polytope".into(),
            )),
        }
    }

    /// `λ > 0` with `offsets_omega0 = λ · offsets_c1`, if the family is proportional.
    pub fn proportional_ratio(&self) -> Option<Scalar> {
        let mut lambda: Option<Scalar> = None;
        for (a, b) in self.offsets_omega0.iter().zip(&self.offsets_c1) {
            if b.is_zero() {
                if !a.is_zero() {
                    return None;
                }
                continue;
            }
            let r = a / b;
            match &lambda {
                None => lambda = Some(r),
                Some(l) if *l == r => {}
                Some(_) => return None,
            }
        }
        lambda.filter(Scalar::is_positive)
    }

    fn proper_at(&self, s: &Scalar) -> Result<bool> {
        Ok(self.combine_class(&-s, &Scalar::one())?.kahler_proper)
    }

    /// Values of `s` at which `r + 1` hyperplanes of `2πc1 - s[w0]` become
    /// concurrent; properness is constant between consecutive values.
    pub fn threshold_breakpoints(&self) -> Result<Vec<Scalar>> {
        let r = self.ambient_dim();
        let normals: Vec<Vec<Q>> = self.normals.iter().map(to_q).collect::<Result<_>>()?;
        let exact = |xs: &[Scalar]| -> Result<Vec<Q>> {
            xs.iter()
                .map(|x| {
                    x.as_rational()
                        .cloned()
                        .ok_or_else(|| Error::NotExact("class offsets".into()))
                })
                .collect()
        };
        let w = exact(&self.offsets_omega0)?;
        let c = exact(&self.offsets_c1)?;
        let mut out: Vec<Q> = Vec::new();
        for subset in combinations(normals.len(), r + 1) {
            let with = |col: &[Q]| -> Q {
                let m: Vec<Vec<Q>> = subset
                    .iter()
                    .map(|&i| {
                        let mut row = normals[i].clone();
                        row.push(col[i].clone());
                        row
                    })
                    .collect();
                linalg::det(&m)
            };
            let dw = with(&w);
            if num_traits::Zero::is_zero(&dw) {
                continue;
            }
            // det[N | c - s w] = det[N | c] - s det[N | w]
            out.push(with(&c) / dw);
        }
        out.sort();
        out.dedup();
        Ok(out.into_iter().map(Scalar::Exact).collect())
    }

    /// `s([w0]) = sup { s : 2πc1 - s[w0] is Kähler-proper }`.
    pub fn kahler_threshold(&self) -> Result<Extended> {
        self.omega0_polytope()?;
        if let Some(lambda) = self.proportional_ratio() {
            return Ok(Extended::Finite(lambda.recip()?));
        }
        let cuts = self.threshold_breakpoints()?;
        let Some(first) = cuts.first() else {
            return if self.proper_at(&Scalar::zero())? {
                Ok(Extended::Infinity)
            } else {
                Err(Error::Inconsistent(
                    "class family is never Kähler-proper".into(),
                ))
            };
        };
        if !self.proper_at(&(first - Scalar::one()))? {
            return Err(Error::Inconsistent(
                "2πc1 - s[w0] is not proper for s far below the threshold".into(),
            ));
        }
        for (i, cut) in cuts.iter().enumerate() {
            let probe = match cuts.get(i + 1) {
                Some(next) => cut.midpoint(next),
                None => cut + Scalar::one(),
            };
            if !self.proper_at(&probe)? {
                return Ok(Extended::Finite(cut.clone()));
            }
        }
        Ok(Extended::Infinity)
    }
}
