//! Floating-point expression trees for weights that have no exact form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All dependence on the point goes through `Affine` leaves, so rescaling or
/// translating the argument only rewrites those leaves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    Const { value: f64 },
    Affine { a: Vec<f64>, b: f64 },
    Add { args: Vec<Expr> },
    Mul { args: Vec<Expr> },
    Pow { base: Box<Expr>, exponent: f64 },
    Exp { arg: Box<Expr> },
    Log { arg: Box<Expr> },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const { value }
    }

    pub fn affine(a: Vec<f64>, b: f64) -> Self {
        Expr::Affine { a, b }
    }

    /// Value and gradient at `x` (forward mode).
    pub fn eval_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = x.len();
        Ok(match self {
            Expr::Const { value } => (*value, vec![0.0; n]),
            Expr::Affine { a, b } => {
                if a.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: a.len(),
                        found: n,
                    });
                }
                (
                    a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + b,
                    a.clone(),
                )
            }
            Expr::Add { args } => {
                let mut v = 0.0;
                let mut g = vec![0.0; n];
                for e in args {
                    let (ve, ge) = e.eval_grad(x)?;
                    v += ve;
                    g.iter_mut().zip(ge).for_each(|(a, b)| *a += b);
                }
                (v, g)
            }
            Expr::Mul { args } => {
                let mut v = 1.0;
                let mut g = vec![0.0; n];
                for e in args {
                    let (ve, ge) = e.eval_grad(x)?;
                    g.iter_mut().zip(ge).for_each(|(a, b)| *a = *a * ve + v * b);
                    v *= ve;
                }
                (v, g)
            }
            Expr::Pow { base, exponent } => {
                let (u, gu) = base.eval_grad(x)?;
                if u <= 0.0 && exponent.fract() != 0.0 {
                    return Err(Error::Invalid(format!(
                        "non-integer power of nonpositive value {u}"
                    )));
                }
                let v = u.powf(*exponent);
                let d = if *exponent == 0.0 {
                    0.0
                } else {
                    exponent * u.powf(exponent - 1.0)
                };
                (v, gu.into_iter().map(|g| d * g).collect())
            }
            Expr::Exp { arg } => {
                let (u, gu) = arg.eval_grad(x)?;
                let v = u.exp();
                (v, gu.into_iter().map(|g| v * g).collect())
            }
            Expr::Log { arg } => {
                let (u, gu) = arg.eval_grad(x)?;
                if u <= 0.0 {
                    return Err(Error::Invalid(format!("log of nonpositive value {u}")));
                }
                (u.ln(), gu.into_iter().map(|g| g / u).collect())
            }
        })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_grad(x)?.0)
    }

    /// Dimension fixed by the first `Affine` leaf, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Expr::Const { .. } => None,
            Expr::Affine { a, .. } => Some(a.len()),
            Expr::Add { args } | Expr::Mul { args } => args.iter().find_map(Expr::dim),
            Expr::Pow { base: e, .. } | Expr::Exp { arg: e } | Expr::Log { arg: e } => e.dim(),
        }
    }

    /// Rewrites every affine leaf `l` into `x -> l(k x + t)`.
    pub fn map_affine(&self, k: f64, t: &[f64]) -> Expr {
        match self {
            Expr::Const { value } => Expr::Const { value: *value },
            Expr::Affine { a, b } => Expr::Affine {
                a: a.iter().map(|ai| ai * k).collect(),
                b: b + a.iter().zip(t).map(|(ai, ti)| ai * ti).sum::<f64>(),
            },
            Expr::Add { args } => Expr::Add {
                args: args.iter().map(|e| e.map_affine(k, t)).collect(),
            },
            Expr::Mul { args } => Expr::Mul {
                args: args.iter().map(|e| e.map_affine(k, t)).collect(),
            },
            Expr::Pow { base, exponent } => Expr::Pow {
                base: Box::new(base.map_affine(k, t)),
                exponent: *exponent,
            },
            Expr::Exp { arg } => Expr::Exp {
                arg: Box::new(arg.map_affine(k, t)),
            },
            Expr::Log { arg } => Expr::Log {
                arg: Box::new(arg.map_affine(k, t)),
            },
        }
    }
}
