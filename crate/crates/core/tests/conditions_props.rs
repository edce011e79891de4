mod common;

use common::*;
use proptest::prelude::*;
use wkcalc_core::conditions::{
    inf_product, p1_cscK_check, probe_convex, theta_eps_polytope, Convexity, DeltaEstimate,
    InfShape, ProbeConfig, Status,
};
use wkcalc_core::oracle::{grid_inf, OracleConfig};
use wkcalc_core::weights::{check_w_eps, hat_v, ProductPoint};
use wkcalc_core::{Polytope, Scalar, Vector, Weight};

fn interval(a: Scalar) -> Polytope {
    Polytope::from_vertices(&[Vector(vec![-a.clone()]), Vector(vec![a])]).unwrap()
}

fn square(a: Scalar) -> Polytope {
    let m = -a.clone();
    Polytope::from_vertices(&[
        Vector(vec![Scalar::int(-1), m.clone()]),
        Vector(vec![Scalar::int(1), m]),
        Vector(vec![Scalar::int(-1), a.clone()]),
        Vector(vec![Scalar::int(1), a]),
    ])
    .unwrap()
}

fn split(z: &Vector) -> ProductPoint {
    ProductPoint::new(Vector(vec![z[0].clone()]), Vector(vec![z[1].clone()]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn p1_check_reduces_to_delta_gt_1(d in positive_rational(12, 7)) {
        let r = p1_cscK_check(&Weight::one(), &Weight::constant(Scalar::int(2)), &DeltaEstimate::asserted(d.clone()).unwrap(), true, &ProbeConfig::default()).unwrap();
        prop_assert_eq!(r.overall, d > Scalar::one());
    }

    #[test]
    fn inf_product_matches_grid(c in 2i64..=6, power in 1u32..=3, delta in (3i64..=8).prop_map(|k| q(k, 2))) {
        let v = Weight::power_of_affine(Vector::from_ints(&[1]), Scalar::int(c), power);
        let w = Weight::constant(q(1, 1));
        let half = &delta - Scalar::one();
        let g = |pt: &ProductPoint| check_w_eps(&v, &w, &delta, 1, pt);
        let ours = inf_product(&g, &seg(), &interval(half.clone()), InfShape { affine_in_y: true, concave_in_x: false }, &ProbeConfig::default()).unwrap();
        let joint = |z: &Vector| g(&split(z));
        let (oracle, _) = grid_inf(&joint, &square(half), &OracleConfig { grid: 64, ..OracleConfig::default() }).unwrap();
        prop_assert!((ours.value.to_f64() - oracle.to_f64()).abs() < 1e-6, "{} vs {}", ours.value, oracle);
        let h = |pt: &ProductPoint| hat_v(&v, &pt.x, &pt.y);
        let ours = inf_product(&h, &seg(), &seg(), InfShape { affine_in_y: true, concave_in_x: false }, &ProbeConfig::default()).unwrap();
        let (oracle, _) = grid_inf(&|z: &Vector| h(&split(z)), &square(Scalar::one()), &OracleConfig { grid: 64, ..OracleConfig::default() }).unwrap();
        prop_assert!((ours.value.to_f64() - oracle.to_f64()).abs() < 1e-6);
    }

    #[test]
    fn certified_convexity_holds_on_every_grid(a in rational(-2, 2, 2), k in positive_rational(4, 2), slope in rational(-1, 1, 4), grid in 2usize..10) {
        let v = Weight::log_affine(Vector(vec![a]), Scalar::zero());
        // affine w, hence concave; w̌ is then affine in x
        let w = Weight::poly_product(vec![wkcalc_core::Factor::new(Vector(vec![slope]), Scalar::int(2), 1)]);
        let d = DeltaEstimate::asserted(k).unwrap();
        let f = |x: &Vector, y: &Vector| check_w_eps(&v, &w, &d.delta_eps, 1, &ProductPoint::new(x.clone(), y.clone()));
        let c = probe_convex(&f, &seg(), &[Vector::from_ints(&[0]), Vector::from_ints(&[1])], &ProbeConfig { grid, levels: 0 }).unwrap();
        prop_assert!(matches!(c, Convexity::ConvexOnGrid { .. }), "{c:?}");
    }

    #[test]
    fn theta_offsets_are_affine_in_delta(d1 in positive_rational(6, 3), d2 in positive_rational(6, 3)) {
        let (_, p) = &fano_polytopes()[3];
        let f = proportional(p, Scalar::one());
        let at = |d: &Scalar| theta_eps_polytope(&f, &DeltaEstimate::asserted(d.clone()).unwrap()).unwrap().offsets;
        let mid = at(&d1.midpoint(&d2));
        let avg: Vec<Scalar> = at(&d1).iter().zip(at(&d2)).map(|(a, b)| a.midpoint(&b)).collect();
        prop_assert_eq!(mid, avg);
    }
}

#[test]
fn condition_margins_are_exposed() {
    let f = proportional(&seg(), Scalar::one());
    let r = wkcalc_core::conditions::exi_delta_check(
        &f,
        &Weight::one(),
        &Weight::constant(Scalar::int(2)),
        &DeltaEstimate::asserted(q(3, 2)).unwrap(),
        1,
        true,
        &ProbeConfig::default(),
    )
    .unwrap();
    for name in ["inf_check_w", "one_plus_inf_hat_v"] {
        let c = r.get(name).unwrap();
        assert_eq!(c.status, Status::Pass);
        assert!(c.margin.as_ref().unwrap().is_positive());
    }
}
