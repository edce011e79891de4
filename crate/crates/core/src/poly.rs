//! Sparse multivariate polynomials with rational coefficients, and their exact
//! integrals over the standard simplex.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::{One, Zero};

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// `c0 + Σ coeffs[i] λ_i`.
    pub fn affine(c0: Q, coeffs: &[Q]) -> Self {
        let n = coeffs.len();
        let mut p = Poly::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; n];
                e[i] = 1;
                p.terms.insert(e, c.clone());
            }
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            let entry = out.terms.entry(e.clone()).or_insert_with(Q::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(e);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(e).or_insert_with(Q::zero);
                *entry += c1 * c2;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::constant(self.nvars, Q::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.terms.iter().fold(Q::zero(), |acc, (e, c)| {
            let m = e.iter().zip(x).fold(Q::one(), |m, (&k, xi)| {
                m * num_traits::pow(xi.clone(), k as usize)
            });
            acc + c * m
        })
    }

    /// `∫ p dλ` over `{λ_i >= 0, Σ λ_i <= 1}` via `∫ λ^α = α! / (|α| + n)!`.
    pub fn integrate_standard_simplex(&self) -> Q {
        let n = self.nvars as u32;
        self.terms.iter().fold(Q::zero(), |acc, (e, c)| {
            let num = e.iter().fold(BigInt::one(), |m, &k| m * factorial(k));
            let total: u32 = e.iter().sum();
            acc + c * Q::new(num, factorial(total + n))
        })
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}
