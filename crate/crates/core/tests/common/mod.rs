#![allow(dead_code)]

use proptest::prelude::*;
use wkcalc_core::{Factor, Polytope, Scalar, ToricClassFamily, Vector, Weight};

pub fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

pub fn seg() -> Polytope {
    Polytope::from_vertices(&[Vector::from_ints(&[-1]), Vector::from_ints(&[1])]).unwrap()
}

pub fn poly(pts: &[&[i64]]) -> Polytope {
    let v: Vec<Vector> = pts.iter().map(|p| Vector::from_ints(p)).collect();
    Polytope::from_vertices(&v).unwrap()
}

/// Anticanonical polytopes of a few toric Fano manifolds.
pub fn fano_polytopes() -> Vec<(&'static str, Polytope)> {
    vec![
        ("P1", seg()),
        ("P2", poly(&[&[-1, -1], &[2, -1], &[-1, 2]])),
        ("P1xP1", poly(&[&[-1, -1], &[1, -1], &[-1, 1], &[1, 1]])),
        ("Bl1P2", poly(&[&[-1, 0], &[0, -1], &[2, -1], &[-1, 2]])),
        (
            "dP6",
            poly(&[&[1, 0], &[1, 1], &[0, 1], &[-1, 0], &[-1, -1], &[0, -1]]),
        ),
    ]
}

/// The class family `[ω0] = λ 2πc1` over the facets of `p`.
pub fn proportional(p: &Polytope, lambda: Scalar) -> ToricClassFamily {
    let normals = p.halfspaces().iter().map(|h| h.normal.clone()).collect();
    let off0 = p.halfspaces().iter().map(|h| &h.offset * &lambda).collect();
    let off1 = p.halfspaces().iter().map(|h| h.offset.clone()).collect();
    ToricClassFamily::new(normals, off0, off1).unwrap()
}

pub fn rational(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Scalar> {
    (lo..=hi, 1..=den).prop_map(|(n, d)| Scalar::ratio(n, d))
}

pub fn positive_rational(hi: i64, den: i64) -> impl Strategy<Value = Scalar> {
    (1..=hi, 1..=den).prop_map(|(n, d)| Scalar::ratio(n, d))
}

/// Full-dimensional planar polytopes from small integer point clouds.
pub fn planar_polytope() -> impl Strategy<Value = Polytope> {
    prop::collection::vec((-3i64..=3, -3i64..=3), 3..8).prop_filter_map("degenerate", |pts| {
        let v: Vec<Vector> = pts
            .iter()
            .map(|(a, b)| Vector::from_ints(&[*a, *b]))
            .collect();
        Polytope::from_vertices(&v)
            .ok()
            .filter(|p| p.is_full_dimensional())
    })
}

pub fn spatial_polytope() -> impl Strategy<Value = Polytope> {
    prop::collection::vec((-2i64..=2, -2i64..=2, -2i64..=2), 4..8).prop_filter_map(
        "degenerate",
        |pts| {
            let v: Vec<Vector> = pts
                .iter()
                .map(|(a, b, c)| Vector::from_ints(&[*a, *b, *c]))
                .collect();
            Polytope::from_vertices(&v)
                .ok()
                .filter(|p| p.is_full_dimensional())
        },
    )
}

/// A product of affine factors positive on `p`: each factor gets its
/// constant shifted above the worst vertex.
pub fn positive_product(p: &Polytope, raw: &[(Vec<i64>, u32)]) -> Weight {
    let factors = raw
        .iter()
        .map(|(a, power)| {
            let pv = Vector::from_ints(&a[..p.ambient_dim()]);
            let worst = p
                .vertices()
                .iter()
                .map(|v| pv.dot(v))
                .fold(Scalar::zero(), |m, x| m.min(x));
            Factor::new(pv, Scalar::one() - worst, *power)
        })
        .collect();
    Weight::poly_product(factors)
}

pub fn factor_data() -> impl Strategy<Value = Vec<(Vec<i64>, u32)>> {
    prop::collection::vec((prop::collection::vec(-2i64..=2, 3), 1u32..=2), 1..3)
}

/// `(p, c, d, λ)` with `p > 0` and `c > λ p`.
pub fn p1_fixture() -> impl Strategy<Value = (Scalar, Scalar, u32, Scalar)> {
    (
        positive_rational(4, 3),
        positive_rational(3, 2),
        1u32..=4,
        1i64..=6,
    )
        .prop_map(|(p, lambda, d, extra)| {
            let c = &lambda * &p + Scalar::ratio(extra, 2);
            (p, c, d, lambda)
        })
}
