mod common;

use common::*;
use proptest::prelude::*;
use wkcalc_core::geometry::triangulate;
use wkcalc_core::weights::{check_w_eps, check_w_eps_via_tilde, hat_v, tilde_v, ProductPoint};
use wkcalc_core::{Factor, Polytope, Scalar, Vector, Weight};

fn interior_points(p: &Polytope) -> Vec<Vector> {
    // strictly interior: grid points of density 4 pulled halfway to the vertex centroid
    let n = p.vertices().len() as i64;
    let centroid = p
        .vertices()
        .iter()
        .fold(Vector::zeros(p.ambient_dim()), |a, v| a.add(v))
        .scale(&q(1, n));
    triangulate(p)
        .unwrap()
        .iter()
        .flat_map(|s| s.grid_points(4))
        .map(|x| x.add(&centroid).scale(&q(1, 2)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grad_log_matches_finite_differences(p in planar_polytope(), raw in factor_data()) {
        let v = positive_product(&p, &raw).to_approx();
        let h = 1e-5;
        for x in interior_points(&p).into_iter().take(12) {
            let xf = x.to_f64();
            let g = v.grad_log(&Vector::from_f64(&xf)).unwrap().to_f64();
            for i in 0..2 {
                let mut a = xf.clone();
                let mut b = xf.clone();
                a[i] += h;
                b[i] -= h;
                let la = v.eval(&Vector::from_f64(&a)).unwrap().to_f64().ln();
                let lb = v.eval(&Vector::from_f64(&b)).unwrap().to_f64().ln();
                let fd = (la - lb) / (2.0 * h);
                prop_assert!((fd - g[i]).abs() <= 1e-6 * g[i].abs().max(1.0), "fd {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn tilde_of_constant_is_2n(k in positive_rational(9, 4), n in 1u32..6, a in rational(-3, 3, 2), b in rational(-3, 3, 2)) {
        let t = tilde_v(&Weight::constant(k), n).unwrap();
        prop_assert_eq!(t.eval(&Vector(vec![a, b])).unwrap(), Scalar::int(2 * n as i64));
    }

    #[test]
    fn check_w_paths_agree(
        p in planar_polytope(),
        raw in factor_data(),
        w in positive_rational(5, 3),
        d in positive_rational(5, 3),
        n in 1u32..4,
        y in (rational(-3, 3, 2), rational(-3, 3, 2)),
    ) {
        let v = positive_product(&p, &raw);
        let w = Weight::constant(w);
        let y = Vector(vec![y.0, y.1]);
        for x in p.vertices().iter().chain(interior_points(&p).iter().take(6)) {
            let pt = ProductPoint::new(x.clone(), y.clone());
            prop_assert_eq!(check_w_eps(&v, &w, &d, n, &pt).unwrap(), check_w_eps_via_tilde(&v, &w, &d, n, &pt).unwrap());
        }
    }

    #[test]
    fn hat_v_vanishes_on_the_diagonal(p in planar_polytope(), raw in factor_data()) {
        let v = positive_product(&p, &raw);
        for x in p.vertices() {
            prop_assert!(hat_v(&v, x, x).unwrap().is_zero());
        }
    }

    #[test]
    fn affine_positivity_is_decided_at_vertices(p in planar_polytope(), a in -3i64..=3, b in -3i64..=3, c in rational(-6, 6, 2)) {
        let f = Factor::new(Vector::from_ints(&[a, b]), c, 1);
        let at_vertices = p.vertices().iter().all(|x| f.affine_value(x).is_positive());
        let v = Weight::poly_product(vec![f]);
        prop_assert_eq!(v.check_positive_on(&p).is_ok(), at_vertices);
    }
}
