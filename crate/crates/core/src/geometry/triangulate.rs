//! Pulling triangulation: cone from a fixed apex over the triangulated facets
//! that avoid it, recursively.

use num_rational::BigRational as Q;
use num_traits::{Signed, Zero};

use super::polytope::{affine_hull, from_q, full_dim_facets, project, to_q, Polytope};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{Scalar, Vector};

/// A full-dimensional simplex given by its `d + 1` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<Vector>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Edge vectors `v_i - v_0` as rows.
    pub fn edge_matrix(&self) -> Vec<Vector> {
        let v0 = &self.vertices[0];
        self.vertices[1..].iter().map(|v| v.sub(v0)).collect()
    }

    /// Signed determinant of the edge matrix (the Jacobian of the affine
    /// pullback from the standard simplex).
    pub fn jacobian(&self) -> Scalar {
        let rows: Vec<Vec<Q>> = self
            .edge_matrix()
            .iter()
            .map(|e| to_q(e).expect("simplex vertices are exact"))
            .collect();
        if rows.is_empty() {
            return Scalar::one();
        }
        Scalar::Exact(linalg::det(&rows))
    }

    /// Points `Σ (k_i / density) v_i` with `Σ k_i = density`; includes the
    /// vertices and is exact for exact vertices.
    pub fn grid_points(&self, density: usize) -> Vec<Vector> {
        let m = self.vertices.len();
        let density = density.max(1);
        let denom = Scalar::int(density as i64);
        let mut out = Vec::new();
        let mut counts = vec![0usize; m];
        fn rec(i: usize, left: usize, counts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
            if i + 1 == counts.len() {
                counts[i] = left;
                f(counts);
                return;
            }
            for k in 0..=left {
                counts[i] = k;
                rec(i + 1, left - k, counts, f);
            }
        }
        rec(0, density, &mut counts, &mut |ks: &[usize]| {
            let mut p = Vector::zeros(self.vertices[0].dim());
            for (k, v) in ks.iter().zip(&self.vertices) {
                if *k > 0 {
                    p = p.add(&v.scale(&(Scalar::int(*k as i64) / &denom)));
                }
            }
            out.push(p);
        });
        out
    }

    pub fn volume(&self) -> Scalar {
        let d = self.dim() as i64;
        let fact: i64 = (1..=d).product();
        Scalar::Exact(self.jacobian().as_rational().expect("exact").abs())
            / Scalar::int(fact.max(1))
    }
}

fn tri_indices(points: &[Vec<Q>], idx: &[usize]) -> Vec<Vec<usize>> {
    let sub: Vec<Vec<Q>> = idx.iter().map(|&i| points[i].clone()).collect();
    let hull = affine_hull(&sub);
    match hull.dim {
        0 => return vec![vec![idx[0]]],
        1 => {
            let c = hull.pivots[0];
            let lo = (0..idx.len())
                .min_by(|&a, &b| sub[a][c].cmp(&sub[b][c]))
                .unwrap();
            let hi = (0..idx.len())
                .max_by(|&a, &b| sub[a][c].cmp(&sub[b][c]))
                .unwrap();
            return vec![vec![idx[lo], idx[hi]]];
        }
        _ => {}
    }
    let projected = project(&sub, &hull.pivots);
    let apex = &projected[0];
    let mut out = Vec::new();
    for (a, b) in full_dim_facets(&projected) {
        let on = |p: &Vec<Q>| {
            (a.iter().zip(p).fold(Q::zero(), |acc, (x, y)| acc + x * y) + &b).is_zero()
        };
        if on(apex) {
            continue;
        }
        let facet: Vec<usize> = (0..idx.len())
            .filter(|&j| on(&projected[j]))
            .map(|j| idx[j])
            .collect();
        for mut s in tri_indices(points, &facet) {
            s.insert(0, idx[0]);
            out.push(s);
        }
    }
    out
}

/// Splits a full-dimensional polytope into simplices meeting in measure zero.
pub fn triangulate(p: &Polytope) -> Result<Vec<Simplex>> {
    if !p.is_full_dimensional() {
        return Err(Error::Degenerate(format!(
            "affine dimension {} in ambient dimension {}",
            p.dim(),
            p.ambient_dim()
        )));
    }
    let points: Vec<Vec<Q>> = p.vertices().iter().map(to_q).collect::<Result<_>>()?;
    let idx: Vec<usize> = (0..points.len()).collect();
    Ok(tri_indices(&points, &idx)
        .into_iter()
        .map(|s| Simplex {
            vertices: s.iter().map(|&i| from_q(&points[i])).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[&[i64]]) -> Polytope {
        Polytope::from_vertices(&pts.iter().map(|p| Vector::from_ints(p)).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn segment_is_itself() {
        let t = triangulate(&poly(&[&[-1], &[1]])).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].volume(), Scalar::int(2));
    }

    #[test]
    fn square_gives_two_triangles() {
        let t = triangulate(&poly(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]])).unwrap();
        assert_eq!(t.len(), 2);
        for s in &t {
            assert_eq!(s.volume(), Scalar::ratio(1, 2));
        }
    }

    #[test]
    fn simplex_is_itself() {
        let t = triangulate(&poly(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].volume(), Scalar::ratio(1, 2));
    }

    #[test]
    fn cube_and_hexagon_volumes() {
        let cube = poly(&[
            &[0, 0, 0],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 0, 1],
            &[1, 1, 0],
            &[1, 0, 1],
            &[0, 1, 1],
            &[1, 1, 1],
        ]);
        assert_eq!(cube.volume().unwrap(), Scalar::one());
        let hex = poly(&[&[1, 0], &[0, 1], &[-1, 1], &[-1, 0], &[0, -1], &[1, -1]]);
        assert_eq!(hex.volume().unwrap(), Scalar::int(3));
    }

    #[test]
    fn grid_counts() {
        let t = triangulate(&poly(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        // C(4 + 2, 2) = 15 points for density 4 on a triangle
        assert_eq!(t[0].grid_points(4).len(), 15);
        assert!(t[0]
            .grid_points(4)
            .contains(&Vector(vec![Scalar::ratio(1, 4), Scalar::ratio(1, 2)])));
    }

    #[test]
    fn degenerate_rejected() {
        let p = poly(&[&[0, 0], &[1, 1]]);
        assert!(matches!(triangulate(&p), Err(Error::Degenerate(_))));
    }
}
