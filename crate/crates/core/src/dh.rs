//! Weighted Duistermaat–Heckman integrals over moment polytopes.
//!
//! Polynomial weights with rational data are integrated exactly: each simplex
//! of a triangulation is pulled back to the standard simplex and the expanded
//! integrand is integrated monomial by monomial. Other weights use
//! Grundmann–Möller rules of increasing degree.

use num_rational::BigRational as Q;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{polytope::to_q, triangulate, Polytope, Simplex};
use crate::poly::{factorial, Poly};
use crate::scalar::{Scalar, Vector};
use crate::weights::{PositivityWitness, Weight};

/// Relative change between successive quadrature degrees accepted as converged.
pub const QUADRATURE_RTOL: f64 = 1e-10;
/// Largest Grundmann–Möller index tried (rule degree `2s + 1`).
pub const QUADRATURE_MAX_S: usize = 12;

/// A polytope together with a weight that is positive on it.
#[derive(Clone, Debug)]
pub struct Measure {
    pub polytope: Polytope,
    pub weight: Weight,
    pub witness: PositivityWitness,
}

impl Measure {
    pub fn new(polytope: Polytope, weight: Weight) -> Result<Self> {
        let witness = weight.check_positive_on(&polytope)?;
        Ok(Measure {
            polytope,
            weight,
            witness,
        })
    }

    pub fn dim(&self) -> usize {
        self.polytope.ambient_dim()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Exact,
    Quadrature { degree: usize, residual: f64 },
}

/// `∫ v` and `∫ x_i v` for all `i`.
#[derive(Clone, Debug, Serialize)]
pub struct Moments {
    pub volume: Scalar,
    pub first: Vector,
    pub method: Method,
}

impl Moments {
    pub fn barycenter(&self) -> Result<Vector> {
        Ok(Vector(
            self.first
                .iter()
                .map(|m| m.checked_div(&self.volume))
                .collect::<Result<_>>()?,
        ))
    }
}

pub fn moments(m: &Measure) -> Result<Moments> {
    if !m.polytope.is_full_dimensional() {
        return Err(Error::Degenerate(
            "weighted volume needs a full-dimensional polytope".into(),
        ));
    }
    let simplices = triangulate(&m.polytope)?;
    if m.weight.is_exact() {
        exact_moments(&simplices, &m.weight)
    } else {
        quadrature_moments(&simplices, &m.weight)
    }
}

pub fn vol_v(m: &Measure) -> Result<Scalar> {
    Ok(moments(m)?.volume)
}

pub fn moment(m: &Measure, i: usize) -> Result<Scalar> {
    if i >= m.dim() {
        return Err(Error::Invalid(format!(
            "coordinate index {i} out of range for dimension {}",
            m.dim()
        )));
    }
    Ok(moments(m)?.first.0.swap_remove(i))
}

pub fn barycenter(m: &Measure) -> Result<Vector> {
    moments(m)?.barycenter()
}

/// Affine pullback of `<p, x> + c` along `λ -> v0 + Σ λ_i (v_i - v0)`.
fn pullback(p: &[Q], c: &Q, simplex: &[Vec<Q>]) -> Poly {
    let dot = |a: &[Q], b: &[Q]| a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + x * y);
    let v0 = &simplex[0];
    let c0 = c + dot(p, v0);
    let coeffs: Vec<Q> = simplex[1..]
        .iter()
        .map(|vi| {
            let e: Vec<Q> = vi.iter().zip(v0).map(|(a, b)| a - b).collect();
            dot(p, &e)
        })
        .collect();
    Poly::affine(c0, &coeffs)
}

fn exact_q(s: &Scalar, what: &str) -> Result<Q> {
    s.as_rational()
        .cloned()
        .ok_or_else(|| Error::NotExact(what.into()))
}

fn exact_moments(simplices: &[Simplex], weight: &Weight) -> Result<Moments> {
    let r = simplices[0].dim();
    let mut vol = Q::zero();
    let mut first = vec![Q::zero(); r];
    for s in simplices {
        let verts: Vec<Vec<Q>> = s.vertices.iter().map(to_q).collect::<Result<_>>()?;
        let jac = exact_q(&s.jacobian(), "simplex jacobian")?;
        let jac = if jac < Q::zero() { -jac } else { jac };
        let integrand = match weight {
            Weight::Constant { k } => Poly::constant(r, exact_q(k, "weight constant")?),
            Weight::PolyProduct { factors } => {
                let mut acc = Poly::constant(r, Q::one());
                for f in factors {
                    let p = to_q(&f.p)?;
                    let c = exact_q(&f.c, "factor constant")?;
                    acc = acc.mul(&pullback(&p, &c, &verts).pow(f.power));
                }
                acc
            }
            _ => return Err(Error::NotExact("weight has no exact integral".into())),
        };
        vol += &jac * integrand.integrate_standard_simplex();
        for (i, slot) in first.iter_mut().enumerate() {
            let mut e = vec![Q::zero(); r];
            e[i] = Q::one();
            let xi = pullback(&e, &Q::zero(), &verts);
            *slot += &jac * xi.mul(&integrand).integrate_standard_simplex();
        }
    }
    Ok(Moments {
        volume: Scalar::Exact(vol),
        first: Vector(first.into_iter().map(Scalar::Exact).collect()),
        method: Method::Exact,
    })
}

/// All `β ∈ N^parts` with `|β| = total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Grundmann–Möller rule of index `s` (degree `2s + 1`) applied to a vector
/// valued integrand over one simplex.
fn gm_rule(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    verts: &[Vec<f64>],
    volume: f64,
    s: usize,
    out_len: usize,
) -> Result<Vec<f64>> {
    let n = verts.len() - 1;
    let d = 2 * s + 1;
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, j| a * j as f64);
    let mut acc = vec![0.0; out_len];
    for i in 0..=s {
        let denom = (d + n - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w =
            sign * 2f64.powi(-2 * s as i32) * denom.powi(d as i32) / (fact(i) * fact(d + n - i));
        let mut part = vec![0.0; out_len];
        for beta in compositions(s - i, n + 1) {
            let mut x = vec![0.0; verts[0].len()];
            for (bj, vj) in beta.iter().zip(verts) {
                let t = (2 * bj + 1) as f64 / denom;
                x.iter_mut().zip(vj).for_each(|(a, b)| *a += t * b);
            }
            for (a, b) in part.iter_mut().zip(f(&x)?) {
                *a += b;
            }
        }
        acc.iter_mut().zip(part).for_each(|(a, b)| *a += w * b);
    }
    let scale = fact(n) * volume;
    Ok(acc.into_iter().map(|a| a * scale).collect())
}

fn quadrature_moments(simplices: &[Simplex], weight: &Weight) -> Result<Moments> {
    let r = simplices[0].dim();
    let expr = weight.to_expr();
    let f = |x: &[f64]| -> Result<Vec<f64>> {
        let v = expr.eval(x)?;
        let mut out = Vec::with_capacity(r + 1);
        out.push(v);
        out.extend(x.iter().map(|xi| xi * v));
        Ok(out)
    };
    let geo: Vec<(Vec<Vec<f64>>, f64)> = simplices
        .iter()
        .map(|s| {
            (
                s.vertices.iter().map(Vector::to_f64).collect(),
                s.volume().to_f64(),
            )
        })
        .collect();
    let total = |s: usize| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; r + 1];
        for (verts, vol) in &geo {
            for (a, b) in acc.iter_mut().zip(gm_rule(&f, verts, *vol, s, r + 1)?) {
                *a += b;
            }
        }
        Ok(acc)
    };
    let mut prev = total(1)?;
    let mut residual = f64::INFINITY;
    for s in 2..=QUADRATURE_MAX_S {
        let cur = total(s)?;
        let scale = cur
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        residual = cur
            .iter()
            .zip(&prev)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            / scale;
        prev = cur;
        if residual < QUADRATURE_RTOL {
            return Ok(Moments {
                volume: Scalar::approx(prev[0]),
                first: Vector(prev[1..].iter().map(|x| Scalar::approx(*x)).collect()),
                method: Method::Quadrature {
                    degree: 2 * s + 1,
                    residual,
                },
            });
        }
    }
    Err(Error::NoConvergence { residual })
}

/// Barycenter of `[-λ, λ]` for the weight `(p u + c)^d`, rescaled to `[-1, 1]`,
/// from its closed form.
pub fn barycenter_p1_closed_form(
    p: &Scalar,
    c: &Scalar,
    d: u32,
    lambda: &Scalar,
) -> Result<Scalar> {
    if p.is_zero() {
        return Err(Error::Precondition(
            "p = 0 is the product case; the closed form divides by p".into(),
        ));
    }
    if !lambda.is_positive() {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let pl = p * lambda;
    if !(c > &pl.abs()) {
        return Err(Error::Precondition(format!(
            "need c > lambda |p|, got c = {c}, lambda |p| = {}",
            pl.abs()
        )));
    }
    let plus = &pl + c;
    let minus = c - &pl;
    let diff = |k: u32| plus.powi(k) - minus.powi(k);
    let ratio = (Scalar::int(d as i64 + 1) * diff(d + 2))
        .checked_div(&(Scalar::int(d as i64 + 2) * diff(d + 1)))?;
    (ratio - c).checked_div(&pl)
}

/// `n!` as an exact scalar.
pub fn factorial_scalar(n: u32) -> Scalar {
    Scalar::from_big(Q::from_integer(factorial(n)))
}
