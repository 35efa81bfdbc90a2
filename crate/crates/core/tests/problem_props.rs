use mintau::problem::{best_inner_product, planar_directions};
use mintau::{DynamicsSpec, TargetSpec};
use proptest::prelude::*;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn union() -> impl Strategy<Value = TargetSpec> {
    prop::collection::vec(((-4.0..4.0f64, -4.0..4.0f64), 0.2..1.5f64), 1..=3).prop_map(|balls| {
        let centers = balls.iter().map(|((x, y), _)| vec![*x, *y]).collect();
        let radii = balls.iter().map(|(_, r)| *r).collect();
        TargetSpec::new(centers, radii).unwrap()
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-8.0..8.0f64, 2)
}

proptest! {
    #[test]
    fn distance_matches_brute_force(k in union(), z in point()) {
        let brute = k
            .centers()
            .iter()
            .zip(k.radii())
            .map(|(c, r)| (dist(&z, c) - r).max(0.0))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((k.distance(&z) - brute).abs() <= 1e-12);
        prop_assert_eq!(k.contains(&z), brute <= 0.0);
    }

    #[test]
    fn projection_is_a_nearest_point_and_idempotent(k in union(), z in point()) {
        let p = k.project(&z);
        prop_assert!(k.distance(&p) <= 1e-12);
        prop_assert!((dist(&z, &p) - k.distance(&z)).abs() <= 1e-10);
        let pp = k.project(&p);
        prop_assert!(dist(&p, &pp) <= 1e-12);
    }

    #[test]
    fn distance_is_one_lipschitz(k in union(), z in point(), w in point()) {
        prop_assert!((k.distance(&z) - k.distance(&w)).abs() <= dist(&z, &w) + 1e-12);
    }

    #[test]
    fn outward_normal_is_unit_and_points_away(k in union(), z in point()) {
        match k.outward_normal(&z) {
            None => prop_assert!(k.contains(&z)),
            Some(n) => {
                prop_assert!((n.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() <= 1e-12);
                let p = k.project(&z);
                let along = (z[0] - p[0]) * n[0] + (z[1] - p[1]) * n[1];
                prop_assert!((along - k.distance(&z)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn best_inner_product_is_the_minimum(k in union(), z in point(), m in 3usize..=24) {
        prop_assume!(!k.contains(&z));
        let dyn_ = DynamicsSpec::unit_speed(planar_directions(m)).unwrap();
        let n = k.outward_normal(&z).unwrap();
        let (i, v) = best_inner_product(&dyn_, &k, &z);
        let all: Vec<f64> = dyn_.controls().iter().map(|u| u[0] * n[0] + u[1] * n[1]).collect();
        let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!((v - min).abs() <= 1e-12);
        prop_assert!(all[..i].iter().all(|w| *w > v));
        prop_assert!(v <= -(std::f64::consts::PI / m as f64).cos() + 1e-12);
    }

    #[test]
    fn scalar_decay_field_is_bounded_and_lipschitz(z in -3.0..3.0f64, y in -3.0..3.0f64, m in 0.5..4.0f64) {
        let dyn_ = DynamicsSpec::scalar_decay(m, vec![-1.0, 1.0]).unwrap();
        for u in 0..2 {
            let a = dyn_.eval(&[z], u)[0];
            let b = dyn_.eval(&[y], u)[0];
            prop_assert!(a.abs() <= m + 1e-12);
            prop_assert!((a - b).abs() <= (z - y).abs() + 1e-12);
        }
    }
}

#[test]
fn equidistant_balls_project_to_the_lowest_index() {
    let k = TargetSpec::new(vec![vec![-2.0, 0.0], vec![2.0, 0.0]], vec![1.0, 1.0]).unwrap();
    let z = [0.0, 3.0];
    assert_eq!(k.nearest_ball(&z).0, 0);
    let p = k.project(&z);
    assert!(p[0] < 0.0);
}
