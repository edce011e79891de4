//! Brute-force twins of the exact code paths: seeded Monte-Carlo integration,
//! grid minimization, rational bisection and finite-difference Hessians.
//!
//! Nothing here shares code with the exact integrator or the closed forms
//! beyond the polytope kernel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{triangulate, Polytope};
use crate::scalar::{Scalar, Vector};
use crate::weights::Weight;

#[derive(Clone, Debug, Serialize)]
pub struct OracleConfig {
    pub samples: usize,
    pub grid: usize,
    pub seed: u64,
    pub tol: Scalar,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            samples: 100_000,
            grid: 24,
            seed: 0,
            tol: Scalar::ratio(1, 1_000_000_000),
        }
    }
}

/// Estimate with its standard error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl McEstimate {
    /// `|estimate - target| <= k · std_error`, allowing exact agreement for
    /// zero-variance integrands.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        let slack = (k * self.std_error).max(1e-12 * target.abs().max(1.0));
        (self.estimate - target).abs() <= slack
    }
}

/// Monte-Carlo estimates of `∫ v` and `∫ x_i v` over `P`.
#[derive(Clone, Debug, Serialize)]
pub struct McMoments {
    pub volume: McEstimate,
    pub first: Vec<McEstimate>,
}

const CHUNK: usize = 4096;

fn sample_moments(p: &Polytope, v: &Weight, cfg: &OracleConfig) -> Result<McMoments> {
    if cfg.samples < 2 {
        return Err(Error::Precondition(
            "at least two samples are needed".into(),
        ));
    }
    let simplices = triangulate(p)?;
    let r = p.ambient_dim();
    let verts: Vec<Vec<Vec<f64>>> = simplices
        .iter()
        .map(|s| s.vertices.iter().map(Vector::to_f64).collect())
        .collect();
    let vols: Vec<f64> = simplices.iter().map(|s| s.volume().to_f64()).collect();
    let total: f64 = vols.iter().sum();
    let mut cumulative = Vec::with_capacity(vols.len());
    let mut acc = 0.0;
    for w in &vols {
        acc += w / total;
        cumulative.push(acc);
    }
    let expr = v.to_expr();
    let mut sum = vec![0.0; r + 1];
    let mut sum_sq = vec![0.0; r + 1];
    let mut done = 0usize;
    let mut chunk_index = 0u64;
    while done < cfg.samples {
        // per-chunk streams keep results independent of how chunks are scheduled
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk_index);
        let n = CHUNK.min(cfg.samples - done);
        for _ in 0..n {
            let u: f64 = rng.random();
            let k = cumulative.partition_point(|c| *c < u).min(vols.len() - 1);
            let e: Vec<f64> = (0..=r).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let s: f64 = e.iter().sum();
            let mut x = vec![0.0; r];
            for (ej, vj) in e.iter().zip(&verts[k]) {
                x.iter_mut().zip(vj).for_each(|(a, b)| *a += ej / s * b);
            }
            let val = expr.eval(&x)?;
            let f = std::iter::once(val).chain(x.iter().map(|xi| xi * val));
            for (i, fi) in f.enumerate() {
                sum[i] += fi;
                sum_sq[i] += fi * fi;
            }
        }
        done += n;
        chunk_index += 1;
    }
    let n = cfg.samples as f64;
    let est: Vec<McEstimate> = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, s2)| {
            let mean = s / n;
            let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
            McEstimate {
                estimate: total * mean,
                std_error: total * (var / n).sqrt(),
            }
        })
        .collect();
    Ok(McMoments {
        volume: est[0],
        first: est[1..].to_vec(),
    })
}

/// Unbiased estimate of `∫_P v` by volume-weighted simplex choice and uniform
/// Dirichlet barycentric sampling.
pub fn mc_integrate(p: &Polytope, v: &Weight, cfg: &OracleConfig) -> Result<McEstimate> {
    Ok(sample_moments(p, v, cfg)?.volume)
}

pub fn mc_moments(p: &Polytope, v: &Weight, cfg: &OracleConfig) -> Result<McMoments> {
    sample_moments(p, v, cfg)
}

fn polytope_grid(p: &Polytope, density: usize) -> Result<Vec<Vector>> {
    if p.is_full_dimensional() {
        let mut pts = Vec::new();
        for s in triangulate(p)? {
            pts.extend(s.grid_points(density));
        }
        Ok(pts)
    } else {
        Ok(p.vertices().to_vec())
    }
}

fn argmin_over(f: &dyn Fn(&Vector) -> Result<Scalar>, pts: &[Vector]) -> Result<(Scalar, Vector)> {
    let mut best: Option<(Scalar, Vector)> = None;
    for x in pts {
        let v = f(x)?;
        if !v.is_exact() && !v.to_f64().is_finite() {
            return Err(Error::Invalid(format!("non-finite value at {x}")));
        }
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, x.clone()));
        }
    }
    best.ok_or_else(|| Error::Empty("no grid points".into()))
}

/// Minimum over a barycentric grid of density `cfg.grid`, then once more over
/// the homothetic copy of `P` shrunk by `1/grid` around the argmin.
pub fn grid_inf(
    f: &dyn Fn(&Vector) -> Result<Scalar>,
    p: &Polytope,
    cfg: &OracleConfig,
) -> Result<(Scalar, Vector)> {
    let (best, at) = argmin_over(f, &polytope_grid(p, cfg.grid)?)?;
    if !p.is_full_dimensional() || cfg.grid < 2 {
        return Ok((best, at));
    }
    let k = Scalar::ratio(1, cfg.grid as i64);
    let t = at.scale(&(Scalar::one() - &k));
    let local = p.affine_image(&k, &t)?;
    let (fine, fine_at) = argmin_over(f, &polytope_grid(&local, cfg.grid)?)?;
    Ok(if fine < best {
        (fine, fine_at)
    } else {
        (best, at)
    })
}

/// `[lo, hi]` with `predicate(lo)` true and `predicate(hi)` false.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Bracket {
    pub fn width(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Exact bisection: the bracket shrinks to `(hi - lo) / 2^iters`.
pub fn bisect_threshold(
    predicate: &mut dyn FnMut(&Scalar) -> Result<bool>,
    lo: Scalar,
    hi: Scalar,
    iters: u32,
) -> Result<Bracket> {
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "need lo < hi, got [{lo}, {hi}]"
        )));
    }
    if !predicate(&lo)? {
        return Err(Error::Precondition(format!(
            "predicate is false at lo = {lo}"
        )));
    }
    if predicate(&hi)? {
        return Err(Error::Precondition(format!(
            "predicate is true at hi = {hi}"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..iters {
        let mid = lo.midpoint(&hi);
        if predicate(&mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bracket { lo, hi })
}

/// Centered second differences of `f` at `x` with step `h`. Every stencil
/// point must lie in `domain`.
pub fn fd_hessian(
    f: &dyn Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    h: f64,
    domain: &Polytope,
) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    if n != domain.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.ambient_dim(),
            found: n,
        });
    }
    if h <= 0.0 {
        return Err(Error::Precondition("step must be positive".into()));
    }
    let at = |di: usize, si: f64, dj: usize, sj: f64| -> Result<f64> {
        let mut y = x.to_vec();
        y[di] += si * h;
        y[dj] += sj * h;
        let inside = domain.halfspaces().iter().all(|hs| {
            let slack: f64 = hs
                .normal
                .to_f64()
                .iter()
                .zip(&y)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + hs.offset.to_f64();
            slack >= -1e-14
        });
        if !inside {
            return Err(Error::Precondition(format!(
                "stencil point {y:?} leaves the domain"
            )));
        }
        f(&y)
    };
    let f0 = f(x)?;
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = (at(i, 1.0, i, 0.0)? - 2.0 * f0 + at(i, -1.0, i, 0.0)?) / (h * h);
        for j in 0..i {
            let v = (at(i, 1.0, j, 1.0)? - at(i, 1.0, j, -1.0)? - at(i, -1.0, j, 1.0)?
                + at(i, -1.0, j, -1.0)?)
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Ok(hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg() -> Polytope {
        Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])]).unwrap()
    }

    #[test]
    fn constant_integrand_has_zero_variance() {
        let e = mc_integrate(&seg(), &Weight::one(), &OracleConfig::default()).unwrap();
        assert!((e.estimate - 2.0).abs() < 1e-12);
        assert!(e.std_error < 1e-12);
        let unit = Polytope::from_vertices(&[
            Vector::from_ints(&[0, 0]),
            Vector::from_ints(&[1, 0]),
            Vector::from_ints(&[0, 1]),
            Vector::from_ints(&[1, 1]),
        ])
        .unwrap();
        let e = mc_integrate(&unit, &Weight::one(), &OracleConfig::default()).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_segment_within_four_sigma() {
        let w = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let e = mc_integrate(&seg(), &w, &OracleConfig::default()).unwrap();
        assert!(e.agrees_with(56.0 / 3.0, 4.0));
    }

    #[test]
    fn seeded_runs_repeat() {
        let w = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(3), 2);
        let cfg = OracleConfig {
            samples: 5000,
            seed: 7,
            ..OracleConfig::default()
        };
        let a = mc_integrate(&seg(), &w, &cfg).unwrap();
        let b = mc_integrate(&seg(), &w, &cfg).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
    }

    #[test]
    fn grid_inf_examples() {
        let cfg = OracleConfig::default();
        let affine = |x: &Vector| Ok(Scalar::int(2) * x[0].clone() + Scalar::one());
        let (v, at) = grid_inf(&affine, &seg(), &cfg).unwrap();
        assert_eq!(v, Scalar::int(-1));
        assert_eq!(at, Vector::from_ints(&[-1]));
        let constant = |_: &Vector| Ok(Scalar::ratio(5, 7));
        assert_eq!(
            grid_inf(&constant, &seg(), &cfg).unwrap().0,
            Scalar::ratio(5, 7)
        );
    }

    #[test]
    fn bisection_examples() {
        // t < 1/λ with λ = 1/2
        let b = bisect_threshold(
            &mut |t| Ok(*t < Scalar::int(2)),
            Scalar::zero(),
            Scalar::int(4),
            40,
        )
        .unwrap();
        assert!(b.contains(&Scalar::int(2)));
        assert_eq!(
            b.width(),
            Scalar::Exact(num_rational::BigRational::new(
                4.into(),
                num_bigint::BigInt::from(1u64) << 40
            ))
        );
        assert!(bisect_threshold(&mut |_| Ok(true), Scalar::zero(), Scalar::int(4), 10).is_err());
    }

    #[test]
    fn hessian_examples() {
        let big = Polytope::from_vertices(&[Vector::from_ints(&[-10]), Vector::from_ints(&[10])])
            .unwrap();
        let h = fd_hessian(&|x| Ok(x[0] * x[0]), &[0.3], 1e-3, &big).unwrap();
        assert!((h[0][0] - 2.0).abs() < 1e-6);
        let h = fd_hessian(&|x| Ok(3.0 * x[0] + 1.0), &[0.3], 1e-3, &big).unwrap();
        assert!(h[0][0].abs() < 1e-6);
        // δ · 2 log(u + 3) with δ = 1 has second derivative -2/(u+3)^2
        let h = fd_hessian(&|x| Ok(2.0 * (x[0] + 3.0).ln()), &[0.5], 1e-4, &seg()).unwrap();
        assert!((h[0][0] + 2.0 / 12.25).abs() < 1e-5);
        assert!(fd_hessian(&|x| Ok(x[0]), &[1.0], 1e-3, &seg()).is_err());
    }
}
