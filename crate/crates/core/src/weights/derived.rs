//! Weights built from `d log v`: `ṽ`, `v̂`, `w̄` and `w̌_ε`.

use serde::{Deserialize, Serialize};

use super::Weight;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Vector};

/// A point `(x, y)` of `Δ × Δ_θ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub x: Vector,
    pub y: Vector,
}

impl ProductPoint {
    pub fn new(x: Vector, y: Vector) -> Self {
        ProductPoint { x, y }
    }
}

/// `x -> 2(n + <d log v(x), x>)`.
#[derive(Clone, Debug)]
pub struct TildeV {
    pub v: Weight,
    pub n: u32,
}

impl TildeV {
    pub fn eval(&self, x: &Vector) -> Result<Scalar> {
        let g = self.v.grad_log(x)?;
        Ok(Scalar::int(2) * (Scalar::int(self.n as i64) + g.dot(x)))
    }
}

pub fn tilde_v(v: &Weight, n: u32) -> Result<TildeV> {
    if n == 0 {
        return Err(Error::Precondition(
            "complex dimension n must be at least 1".into(),
        ));
    }
    Ok(TildeV { v: v.clone(), n })
}

/// `<d log v(x), x - x2>`.
pub fn hat_v(v: &Weight, x: &Vector, x2: &Vector) -> Result<Scalar> {
    x2.check_dim(x.dim())?;
    Ok(v.grad_log(x)?.dot(&x.sub(x2)))
}

/// `w(x)/2 - <d log v(x), y>`.
pub fn bar_w(v: &Weight, w: &Weight, pt: &ProductPoint) -> Result<Scalar> {
    pt.y.check_dim(pt.x.dim())?;
    let half = Scalar::ratio(1, 2);
    Ok(half * w.eval(&pt.x)? - v.grad_log(&pt.x)?.dot(&pt.y))
}

/// `δ n - w(x)/2 + <d log v(x), δ x - y>`.
pub fn check_w_eps(
    v: &Weight,
    w: &Weight,
    delta_eps: &Scalar,
    n: u32,
    pt: &ProductPoint,
) -> Result<Scalar> {
    pt.y.check_dim(pt.x.dim())?;
    let g = v.grad_log(&pt.x)?;
    let shifted = pt.x.scale(delta_eps).sub(&pt.y);
    Ok(delta_eps * Scalar::int(n as i64) - Scalar::ratio(1, 2) * w.eval(&pt.x)? + g.dot(&shifted))
}

/// Second evaluation path for `w̌_ε`: `(δ ṽ(x) - w(x))/2 - <d log v(x), y>`.
pub fn check_w_eps_via_tilde(
    v: &Weight,
    w: &Weight,
    delta_eps: &Scalar,
    n: u32,
    pt: &ProductPoint,
) -> Result<Scalar> {
    pt.y.check_dim(pt.x.dim())?;
    let tv = tilde_v(v, n)?.eval(&pt.x)?;
    Ok(Scalar::ratio(1, 2) * (delta_eps * tv - w.eval(&pt.x)?) - v.grad_log(&pt.x)?.dot(&pt.y))
}
