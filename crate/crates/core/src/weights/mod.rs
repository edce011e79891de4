//! Weight functions on moment polytopes and the derived weights built from
//! `d log v`.
//!
//! Each descriptor carries its own symbolic log-derivative. `Constant` and
//! `PolyProduct` weights with rational data evaluate exactly; `LogAffine`
//! weights have an exact log-gradient but approximate values; `Expression`
//! weights are approximate throughout.

mod derived;
mod expr;

pub use derived::{
    bar_w, check_w_eps, check_w_eps_via_tilde, hat_v, tilde_v, ProductPoint, TildeV,
};
pub use expr::Expr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{triangulate, Polytope};
use crate::scalar::{Scalar, Vector};

/// One factor `(<p, x> + c)^power` of a product weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub p: Vector,
    pub c: Scalar,
    pub power: u32,
}

impl Factor {
    pub fn new(p: Vector, c: Scalar, power: u32) -> Self {
        Factor { p, c, power }
    }

    pub fn affine_value(&self, x: &Vector) -> Scalar {
        self.p.dot(x) + &self.c
    }

    fn is_constant(&self) -> bool {
        self.power == 0 || self.p.is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Weight {
    Constant {
        k: Scalar,
    },
    /// `exp(<a, x> + b)`
    LogAffine {
        a: Vector,
        b: Scalar,
    },
    /// `Π (<p, x> + c)^power`
    PolyProduct {
        factors: Vec<Factor>,
    },
    #[serde(rename = "expr")]
    Expression {
        tree: Expr,
    },
}

/// Smallest value seen while checking positivity, with where it was seen.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityWitness {
    pub min_value: Scalar,
    pub argmin: Vector,
    pub points_checked: usize,
}

impl Weight {
    pub fn constant(k: Scalar) -> Self {
        Weight::Constant { k }
    }

    pub fn one() -> Self {
        Weight::Constant { k: Scalar::one() }
    }

    pub fn log_affine(a: Vector, b: Scalar) -> Self {
        Weight::LogAffine { a, b }
    }

    pub fn poly_product(factors: Vec<Factor>) -> Self {
        Weight::PolyProduct { factors }
    }

    /// Single-factor product `(<p, x> + c)^power`.
    pub fn power_of_affine(p: Vector, c: Scalar, power: u32) -> Self {
        Weight::PolyProduct {
            factors: vec![Factor::new(p, c, power)],
        }
    }

    pub fn expression(tree: Expr) -> Self {
        Weight::Expression { tree }
    }

    /// Dimension pinned by the descriptor (constants have none).
    pub fn dim(&self) -> Option<usize> {
        match self {
            Weight::Constant { .. } => None,
            Weight::LogAffine { a, .. } => Some(a.dim()),
            Weight::PolyProduct { factors } => factors.first().map(|f| f.p.dim()),
            Weight::Expression { tree } => tree.dim(),
        }
    }

    fn check_point(&self, x: &Vector) -> Result<()> {
        match self {
            Weight::PolyProduct { factors } => {
                factors.iter().try_for_each(|f| x.check_dim(f.p.dim()))
            }
            _ => match self.dim() {
                Some(d) => x.check_dim(d),
                None => Ok(()),
            },
        }
    }

    /// True when values are exact on exact points.
    pub fn is_exact(&self) -> bool {
        match self {
            Weight::Constant { k } => k.is_exact(),
            Weight::PolyProduct { factors } => {
                factors.iter().all(|f| f.p.is_exact() && f.c.is_exact())
            }
            Weight::LogAffine { .. } | Weight::Expression { .. } => false,
        }
    }

    /// `log v` is affine (constant and log-affine weights).
    pub fn is_log_affine(&self) -> bool {
        matches!(self, Weight::Constant { .. } | Weight::LogAffine { .. })
    }

    fn nonconstant_factors(&self) -> Option<Vec<&Factor>> {
        match self {
            Weight::PolyProduct { factors } => {
                Some(factors.iter().filter(|f| !f.is_constant()).collect())
            }
            _ => None,
        }
    }

    fn constant_coefficient(&self) -> Option<Scalar> {
        match self {
            Weight::PolyProduct { factors } => Some(
                factors
                    .iter()
                    .filter(|f| f.is_constant())
                    .fold(Scalar::one(), |acc, f| acc * f.c.powi(f.power)),
            ),
            _ => None,
        }
    }

    /// Affine in `x` by its descriptor.
    pub fn is_affine(&self) -> bool {
        match self {
            Weight::Constant { .. } => true,
            Weight::PolyProduct { .. } => {
                let nc = self.nonconstant_factors().unwrap();
                nc.is_empty() || (nc.len() == 1 && nc[0].power == 1)
            }
            _ => false,
        }
    }

    /// Convexity that follows from the descriptor alone.
    pub fn is_certified_convex(&self) -> bool {
        if self.is_affine() || matches!(self, Weight::LogAffine { .. }) {
            return true;
        }
        match (self.nonconstant_factors(), self.constant_coefficient()) {
            (Some(nc), Some(k)) => nc.len() == 1 && nc[0].power % 2 == 0 && !k.is_negative(),
            _ => false,
        }
    }

    /// Concavity that follows from the descriptor alone.
    pub fn is_certified_concave(&self) -> bool {
        if self.is_affine() {
            return true;
        }
        match (self.nonconstant_factors(), self.constant_coefficient()) {
            (Some(nc), Some(k)) => nc.len() == 1 && nc[0].power % 2 == 0 && !k.is_positive(),
            _ => false,
        }
    }

    pub fn eval(&self, x: &Vector) -> Result<Scalar> {
        self.check_point(x)?;
        match self {
            Weight::Constant { k } => Ok(k.clone()),
            Weight::LogAffine { a, b } => {
                let e = a.dot(x) + b;
                if e.is_exact() && e.is_zero() {
                    Ok(Scalar::one())
                } else {
                    Ok(Scalar::approx(e.to_f64().exp()))
                }
            }
            Weight::PolyProduct { factors } => Ok(factors.iter().fold(Scalar::one(), |acc, f| {
                acc * f.affine_value(x).powi(f.power)
            })),
            Weight::Expression { tree } => Ok(Scalar::approx(tree.eval(&x.to_f64())?)),
        }
    }

    /// `d log v` at `x`.
    pub fn grad_log(&self, x: &Vector) -> Result<Vector> {
        self.check_point(x)?;
        match self {
            Weight::Constant { .. } => Ok(Vector::zeros(x.dim())),
            Weight::LogAffine { a, .. } => Ok(a.clone()),
            Weight::PolyProduct { factors } => {
                let mut g = Vector::zeros(x.dim());
                for f in factors.iter().filter(|f| f.power > 0) {
                    let u = f.affine_value(x);
                    if u.is_zero() {
                        return Err(Error::NonPositiveWeight(format!("factor vanishes at {x}")));
                    }
                    g = g.add(&f.p.scale(&(Scalar::int(f.power as i64) / u)));
                }
                Ok(g)
            }
            Weight::Expression { tree } => {
                let (v, g) = tree.eval_grad(&x.to_f64())?;
                if v <= 0.0 {
                    return Err(Error::NonPositiveWeight(format!("value {v} at {x}")));
                }
                Ok(Vector::from_f64(
                    &g.iter().map(|gi| gi / v).collect::<Vec<_>>(),
                ))
            }
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Weight::Constant { k } => Expr::constant(k.to_f64()),
            Weight::LogAffine { a, b } => Expr::Exp {
                arg: Box::new(Expr::affine(a.to_f64(), b.to_f64())),
            },
            Weight::PolyProduct { factors } => Expr::Mul {
                args: factors
                    .iter()
                    .map(|f| Expr::Pow {
                        base: Box::new(Expr::affine(f.p.to_f64(), f.c.to_f64())),
                        exponent: f.power as f64,
                    })
                    .collect(),
            },
            Weight::Expression { tree } => tree.clone(),
        }
    }

    /// Same weight with exactness dropped (used by the floating-point mode).
    pub fn to_approx(&self) -> Weight {
        Weight::Expression {
            tree: self.to_expr(),
        }
    }

    /// `x -> v(k x + t)`.
    pub fn compose_affine(&self, k: &Scalar, t: &Vector) -> Weight {
        match self {
            Weight::Constant { k: c } => Weight::Constant { k: c.clone() },
            Weight::LogAffine { a, b } => Weight::LogAffine {
                a: a.scale(k),
                b: b + a.dot(t),
            },
            Weight::PolyProduct { factors } => Weight::PolyProduct {
                factors: factors
                    .iter()
                    .map(|f| Factor::new(f.p.scale(k), &f.c + f.p.dot(t), f.power))
                    .collect(),
            },
            Weight::Expression { tree } => Weight::Expression {
                tree: tree.map_affine(k.to_f64(), &t.to_f64()),
            },
        }
    }

    /// `x -> v(k x)`.
    pub fn rescale_argument(&self, k: &Scalar) -> Weight {
        let dim = self.dim().unwrap_or(0);
        self.compose_affine(k, &Vector::zeros(dim))
    }

    /// Pointwise product, kept exact when both sides are constant or products.
    pub fn product(&self, other: &Weight) -> Weight {
        use Weight::*;
        match (self, other) {
            (Constant { k: a }, Constant { k: b }) => Constant { k: a * b },
            (Constant { k }, PolyProduct { factors })
            | (PolyProduct { factors }, Constant { k }) => {
                let mut fs = factors.clone();
                if let Some(d) = factors.first().map(|f| f.p.dim()) {
                    fs.push(Factor::new(Vector::zeros(d), k.clone(), 1));
                    PolyProduct { factors: fs }
                } else {
                    Constant { k: k.clone() }
                }
            }
            (PolyProduct { factors: a }, PolyProduct { factors: b }) => PolyProduct {
                factors: a.iter().chain(b).cloned().collect(),
            },
            (a, b) => Expression {
                tree: Expr::Mul {
                    args: vec![a.to_expr(), b.to_expr()],
                },
            },
        }
    }

    /// Checks `v > 0` at every vertex and on a deterministic grid of `P`.
    pub fn check_positive_on(&self, p: &Polytope) -> Result<PositivityWitness> {
        if let Some(d) = self.dim() {
            if d != p.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    expected: p.ambient_dim(),
                    found: d,
                });
            }
        }
        if let Weight::Constant { k } = self {
            if !k.is_positive() {
                return Err(Error::NonPositiveWeight(format!("constant {k}")));
            }
        }
        if let Weight::PolyProduct { factors } = self {
            // each affine factor has its extremes at vertices
            for f in factors.iter().filter(|f| f.power > 0) {
                let vals: Vec<Scalar> = p.vertices().iter().map(|v| f.affine_value(v)).collect();
                let all_pos = vals.iter().all(Scalar::is_positive);
                let all_neg = vals.iter().all(Scalar::is_negative);
                if !(all_pos || (f.power % 2 == 0 && all_neg)) {
                    return Err(Error::NonPositiveWeight(format!(
                        "factor <{}, x> + {} is not bounded away from zero on the polytope",
                        f.p, f.c
                    )));
                }
            }
        }
        let mut points: Vec<Vector> = p.vertices().to_vec();
        if p.is_full_dimensional() {
            for s in triangulate(p)? {
                points.extend(s.grid_points(4));
            }
        }
        let mut best: Option<(Scalar, Vector)> = None;
        for x in &points {
            let v = self.eval(x)?;
            if !v.is_positive() {
                return Err(Error::NonPositiveWeight(format!("value {v} at {x}")));
            }
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, x.clone()));
            }
        }
        let (min_value, argmin) = best.expect("polytope has vertices");
        Ok(PositivityWitness {
            min_value,
            argmin,
            points_checked: points.len(),
        })
    }
}

/// The weight `y -> Π_a (<p_a, y> + c_a)^{dim B_a}` of a semisimple principal
/// fibration, validated on the fiber moment polytope.
pub fn p_weight(factors: &[(Vector, Scalar, u32)], fiber: &Polytope) -> Result<Weight> {
    for (p, c, _) in factors {
        p.check_dim(fiber.ambient_dim())?;
        for v in fiber.vertices() {
            let val = p.dot(v) + c;
            if !val.is_positive() {
                return Err(Error::NotCompatible(format!(
                    "<{p}, x> + {c} = {val} is not positive at vertex {v}"
                )));
            }
        }
    }
    Ok(Weight::PolyProduct {
        factors: factors
            .iter()
            .map(|(p, c, d)| Factor::new(p.clone(), c.clone(), *d))
            .collect(),
    })
}
