//! Bounded rational convex polytopes with paired V- and H-representations.
//!
//! Halfspaces use the convention `<n, x> >= -offset`, so the reflexive
//! anticanonical normalization has every offset equal to 1.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational as Q;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::MAX_DIM;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{Extended, Scalar, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: Scalar,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: Scalar) -> Self {
        Halfspace { normal, offset }
    }

    /// `<n, x> + offset`, nonnegative exactly on the halfspace.
    pub fn slack(&self, x: &Vector) -> Scalar {
        self.normal.dot(x) + &self.offset
    }
}

#[derive(Clone, Debug)]
pub struct Polytope {
    ambient: usize,
    dim: usize,
    vertices: Vec<Vector>,
    halfspaces: Vec<Halfspace>,
}

pub(crate) fn to_q(v: &Vector) -> Result<Vec<Q>> {
    v.iter()
        .map(|x| {
            x.as_rational()
                .cloned()
                .ok_or_else(|| Error::NotExact("polytope coordinate".into()))
        })
        .collect()
}

pub(crate) fn from_q(v: &[Q]) -> Vector {
    Vector(v.iter().cloned().map(Scalar::Exact).collect())
}

fn dot_q(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Affine hull data of a finite point set.
pub(crate) struct AffineHull {
    pub dim: usize,
    /// Coordinates that parametrize the hull injectively.
    pub pivots: Vec<usize>,
    /// Normals `e` with `<e, x>` constant on the hull.
    pub equations: Vec<Vec<Q>>,
}

pub(crate) fn affine_hull(points: &[Vec<Q>]) -> AffineHull {
    let n = points[0].len();
    let base = &points[0];
    let mut dirs: Matrix = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let equations = linalg::nullspace(&dirs, n);
    let pivots = linalg::rref(&mut dirs);
    AffineHull {
        dim: pivots.len(),
        pivots,
        equations,
    }
}

pub(crate) fn project(points: &[Vec<Q>], pivots: &[usize]) -> Vec<Vec<Q>> {
    points
        .iter()
        .map(|p| pivots.iter().map(|&i| p[i].clone()).collect())
        .collect()
}

/// Scales `a` (and `b` alongside) by a positive factor so that `a` becomes a
/// primitive integer vector.
fn primitive(a: &[Q], b: &Q) -> (Vec<Q>, Q) {
    let lcm = a.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = a
        .iter()
        .map(|x| (x * Q::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    let factor = Q::new(lcm, if g.is_zero() { BigInt::one() } else { g });
    (a.iter().map(|x| x * &factor).collect(), b * &factor)
}

/// Facets `<a, x> >= -b` of the hull of a full-dimensional point set in `R^k`.
pub(crate) fn full_dim_facets(points: &[Vec<Q>]) -> Vec<(Vec<Q>, Q)> {
    let k = points[0].len();
    let mut facets: Vec<(Vec<Q>, Q)> = Vec::new();
    for subset in combinations(points.len(), k) {
        let rows: Matrix = subset
            .iter()
            .map(|&i| {
                let mut r = points[i].clone();
                r.push(Q::one());
                r
            })
            .collect();
        let ns = linalg::nullspace(&rows, k + 1);
        if ns.len() != 1 {
            continue;
        }
        let mut a = ns[0][..k].to_vec();
        let mut b = ns[0][k].clone();
        let mut side = Ordering::Equal;
        let mut ok = true;
        for p in points {
            let s = dot_q(&a, p) + &b;
            let c = s.cmp(&Q::zero());
            if c == Ordering::Equal {
                continue;
            }
            if side == Ordering::Equal {
                side = c;
            } else if side != c {
                ok = false;
                break;
            }
        }
        if !ok || side == Ordering::Equal {
            continue;
        }
        if side == Ordering::Less {
            a = a.iter().map(|x| -x).collect();
            b = -b;
        }
        let f = primitive(&a, &b);
        if !facets.contains(&f) {
            facets.push(f);
        }
    }
    facets
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn sort_dedup(points: &mut Vec<Vec<Q>>) {
    points.sort();
    points.dedup();
}

impl Polytope {
    /// Convex hull of a finite point set; points that are not vertices are dropped.
    pub fn from_vertices(points: &[Vector]) -> Result<Polytope> {
        if points.is_empty() {
            return Err(Error::Empty("no points given".into()));
        }
        let ambient = points[0].dim();
        if ambient > MAX_DIM {
            return Err(Error::DimensionTooLarge(ambient));
        }
        for p in points {
            p.check_dim(ambient)?;
        }
        let mut pts: Vec<Vec<Q>> = points.iter().map(to_q).collect::<Result<_>>()?;
        sort_dedup(&mut pts);

        let hull = affine_hull(&pts);
        let base = pts[0].clone();
        let mut halfspaces = Vec::new();
        for e in &hull.equations {
            let c = dot_q(e, &base);
            let (e, c) = primitive(e, &c);
            halfspaces.push(Halfspace::new(from_q(&e), Scalar::Exact(-c.clone())));
            let neg: Vec<Q> = e.iter().map(|x| -x).collect();
            halfspaces.push(Halfspace::new(from_q(&neg), Scalar::Exact(c)));
        }
        if hull.dim > 0 {
            let projected = project(&pts, &hull.pivots);
            for (a, b) in full_dim_facets(&projected) {
                let mut normal = vec![Q::zero(); ambient];
                for (j, &pc) in hull.pivots.iter().enumerate() {
                    normal[pc] = a[j].clone();
                }
                halfspaces.push(Halfspace::new(from_q(&normal), Scalar::Exact(b)));
            }
        }
        let mut poly = Polytope {
            ambient,
            dim: hull.dim,
            vertices: Vec::new(),
            halfspaces,
        };
        let vertices = pts
            .iter()
            .filter(|p| poly.is_vertex_q(p))
            .map(|p| from_q(p))
            .collect();
        poly.vertices = vertices;
        Ok(poly)
    }

    /// The polytope `{x : <n_i, x> >= -offset_i}`. Halfspaces that touch no
    /// vertex are dropped.
    pub fn from_halfspaces(halfspaces: &[Halfspace]) -> Result<Polytope> {
        if halfspaces.is_empty() {
            return Err(Error::Unbounded);
        }
        let ambient = halfspaces[0].normal.dim();
        if ambient > MAX_DIM {
            return Err(Error::DimensionTooLarge(ambient));
        }
        for h in halfspaces {
            h.normal.check_dim(ambient)?;
        }
        let normals: Vec<Vec<Q>> = halfspaces
            .iter()
            .map(|h| to_q(&h.normal))
            .collect::<Result<_>>()?;
        let offsets: Vec<Q> = halfspaces
            .iter()
            .map(|h| {
                h.offset
                    .as_rational()
                    .cloned()
                    .ok_or_else(|| Error::NotExact("halfspace offset".into()))
            })
            .collect::<Result<_>>()?;

        if linalg::rank(&normals) < ambient {
            // nonempty or not, a lineality space means no bounded polytope
            return Err(Error::Unbounded);
        }
        let feasible = |x: &[Q]| {
            normals
                .iter()
                .zip(&offsets)
                .all(|(n, b)| dot_q(n, x) + b >= Q::zero())
        };

        let mut verts: Vec<Vec<Q>> = Vec::new();
        for subset in combinations(normals.len(), ambient) {
            let a: Matrix = subset.iter().map(|&i| normals[i].clone()).collect();
            let b: Vec<Q> = subset.iter().map(|&i| -offsets[i].clone()).collect();
            if let Some(x) = linalg::solve(&a, &b) {
                if feasible(&x) {
                    verts.push(x);
                }
            }
        }
        sort_dedup(&mut verts);
        if verts.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        // extreme rays of the recession cone
        if ambient > 0 {
            for subset in combinations(normals.len(), ambient - 1) {
                let a: Matrix = subset.iter().map(|&i| normals[i].clone()).collect();
                let ns = linalg::nullspace(&a, ambient);
                if ns.len() != 1 {
                    continue;
                }
                let d = &ns[0];
                let nd: Vec<Q> = d.iter().map(|x| -x).collect();
                for dir in [d, &nd] {
                    if normals.iter().all(|n| dot_q(n, dir) >= Q::zero()) {
                        return Err(Error::Unbounded);
                    }
                }
            }
        }

        let hull = affine_hull(&verts);
        let kept = halfspaces
            .iter()
            .zip(normals.iter().zip(&offsets))
            .filter(|(_, (n, b))| verts.iter().any(|v| (dot_q(n, v) + *b).is_zero()))
            .map(|(h, _)| h.clone())
            .collect();
        Ok(Polytope {
            ambient,
            dim: hull.dim,
            vertices: verts.iter().map(|v| from_q(v)).collect(),
            halfspaces: kept,
        })
    }

    fn is_vertex_q(&self, p: &[Q]) -> bool {
        let tight: Matrix = self
            .halfspaces
            .iter()
            .filter(|h| {
                let n = to_q(&h.normal).expect("exact");
                let b = h.offset.as_rational().expect("exact");
                (dot_q(&n, p) + b).is_zero()
            })
            .map(|h| to_q(&h.normal).expect("exact"))
            .collect();
        linalg::rank(&tight) == self.ambient
    }

    /// Dimension of the ambient space `t*`.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Affine dimension of the polytope itself.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim == self.ambient
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Closed membership. Exact on exact input; approximate points get an
    /// absolute tolerance of `APPROX_EPS`.
    pub fn contains(&self, x: &Vector) -> Result<bool> {
        x.check_dim(self.ambient)?;
        Ok(self.halfspaces.iter().all(|h| !h.slack(x).is_negative()))
    }

    /// `min_{x in P} <p, x>`, attained at a vertex.
    pub fn support_min(&self, p: &Vector) -> Result<Scalar> {
        p.check_dim(self.ambient)?;
        Ok(self
            .vertices
            .iter()
            .map(|v| p.dot(v))
            .reduce(Scalar::min)
            .expect("polytope has vertices"))
    }

    /// `max {s >= 0 : s d in P}` for a polytope containing the origin.
    pub fn ray_max_scale(&self, d: &Vector) -> Result<Extended> {
        d.check_dim(self.ambient)?;
        if !self.contains(&Vector::zeros(self.ambient))? {
            return Err(Error::OriginNotContained);
        }
        let mut best: Option<Scalar> = None;
        for h in &self.halfspaces {
            let nd = h.normal.dot(d);
            if nd.is_negative() {
                let s = &h.offset / &(-nd);
                best = Some(match best {
                    Some(b) => b.min(s),
                    None => s,
                });
            }
        }
        Ok(best.map_or(Extended::Infinity, Extended::Finite))
    }

    /// Affine dimension of the face cut out by `h` (its equality set), or `None`
    /// when the hyperplane misses the polytope.
    pub fn face_dim(&self, h: &Halfspace) -> Result<Option<usize>> {
        h.normal.check_dim(self.ambient)?;
        let on: Vec<Vec<Q>> = self
            .vertices
            .iter()
            .filter(|v| h.slack(v).is_zero())
            .map(to_q)
            .collect::<Result<_>>()?;
        if on.is_empty() {
            return Ok(None);
        }
        Ok(Some(affine_hull(&on).dim))
    }

    /// True when both describe the same point set (mutual halfspace satisfaction).
    pub fn same_set(&self, other: &Polytope) -> bool {
        self.ambient == other.ambient
            && self
                .vertices
                .iter()
                .all(|v| other.contains(v).unwrap_or(false))
            && other
                .vertices
                .iter()
                .all(|v| self.contains(v).unwrap_or(false))
    }

    /// Image under `x -> k x + t`.
    pub fn affine_image(&self, k: &Scalar, t: &Vector) -> Result<Polytope> {
        if !k.is_positive() {
            return Err(Error::Precondition("scale factor must be positive".into()));
        }
        t.check_dim(self.ambient)?;
        let verts: Vec<Vector> = self.vertices.iter().map(|v| v.scale(k).add(t)).collect();
        Polytope::from_vertices(&verts)
    }

    /// Lebesgue volume in the ambient space (zero for degenerate polytopes).
    pub fn volume(&self) -> Result<Scalar> {
        if !self.is_full_dimensional() {
            return Ok(Scalar::zero());
        }
        Ok(super::triangulate(self)?.iter().map(|s| s.volume()).sum())
    }

    /// Checks the V/H invariants; used by tests and after deserialization.
    pub fn validate(&self) -> Result<()> {
        for v in &self.vertices {
            if !self.contains(v)? {
                return Err(Error::Inconsistent(format!(
                    "vertex {v} violates a halfspace"
                )));
            }
        }
        for h in &self.halfspaces {
            if !self.vertices.iter().any(|v| h.slack(v).is_zero()) {
                return Err(Error::Inconsistent("halfspace is not supporting".into()));
            }
        }
        Ok(())
    }
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.same_set(other)
    }
}

/// Sign-flip helper used by callers that want `max` from `support_min`.
pub fn support_max(p: &Polytope, dir: &Vector) -> Result<Scalar> {
    Ok(-p.support_min(&dir.neg())?)
}
