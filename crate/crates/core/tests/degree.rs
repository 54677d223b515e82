use std::f64::consts::PI;

use coarsedeg::degree::{degree, DEFAULT_TEST_POINTS};
use coarsedeg::demo::theorem_zoo;
use coarsedeg::lattice::Window;
use coarsedeg::maps::{fold_to_full_space, parse_map, MapSpec};
use proptest::prelude::*;

fn stable_degree(m: &MapSpec, half_width: i64, seed: u64) -> i64 {
    let r = degree(m, &Window::new(m.dim(), half_width), DEFAULT_TEST_POINTS, seed).unwrap();
    assert!(r.stable, "{m}: {:?}", r.reason);
    r.d.unwrap()
}

/// Row-major matrix of a linear builtin, evaluated on the basis vectors.
fn matrix(m: &MapSpec) -> Vec<Vec<f64>> {
    let n = m.dim();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            m.evaluate(&e).unwrap()
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Cofactor expansion; fine for n <= 3.
fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
                .collect();
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            s * a[0][j] * det(&minor)
        })
        .sum()
}

fn linear_zoo(n: usize) -> Vec<MapSpec> {
    let mut zoo = vec![MapSpec::identity(n), MapSpec::antipodal(n)];
    zoo.extend((0..n).map(|i| MapSpec::reflection(n, i).unwrap()));
    if n >= 2 {
        zoo.push(MapSpec::rotation(n, PI / 2.0, 0, 1).unwrap());
        zoo.push(MapSpec::rotation(n, PI, 0, 1).unwrap());
    }
    zoo
}

#[test]
fn linear_maps_have_degree_sign_det() {
    for n in 1..=3 {
        for m in linear_zoo(n) {
            let expect = det(&matrix(&m)).signum() as i64;
            assert_eq!(stable_degree(&m, 8, 0), expect, "{m}");
        }
    }
}

#[test]
fn degree_is_multiplicative() {
    for n in [1, 2] {
        let zoo = linear_zoo(n);
        let degrees: Vec<i64> = zoo.iter().map(|m| stable_degree(m, 8, 0)).collect();
        for (a, da) in zoo.iter().zip(&degrees) {
            for (b, db) in zoo.iter().zip(&degrees) {
                let c = MapSpec::composition(vec![a.clone(), b.clone()]).unwrap();
                assert_eq!(stable_degree(&c, 8, 0), da * db, "{c}");
            }
        }
    }
    // A sample of three-dimensional pairs.
    let zoo = linear_zoo(3);
    for (a, b) in [(1, 3), (2, 4), (5, 0), (6, 2)] {
        let c = MapSpec::composition(vec![zoo[a].clone(), zoo[b].clone()]).unwrap();
        assert_eq!(stable_degree(&c, 8, 0), stable_degree(&zoo[a], 8, 0) * stable_degree(&zoo[b], 8, 0));
    }
}

#[test]
fn folds_of_the_zoo_have_degree_zero() {
    for f in theorem_zoo(0) {
        assert_eq!(stable_degree(&fold_to_full_space(f).unwrap(), 16, 0), 0);
    }
    let f = parse_map("fold{(x1 + x2, x2 + 1, abs(x3))}", 3).unwrap();
    assert_eq!(stable_degree(&f, 8, 0), 0);
}

#[test]
fn degree_reports_are_deterministic() {
    let m = parse_map("perturb(1.5,3){rotate(0.7)}", 2).unwrap();
    let w = Window::new(2, 8);
    assert_eq!(degree(&m, &w, 32, 5).unwrap(), degree(&m, &w, 32, 5).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bounded_perturbations_keep_the_degree(idx in 0usize..6, eps in 0.0f64..=2.0, seed in any::<u64>()) {
        let m = linear_zoo(2)[idx].clone();
        let p = MapSpec::perturbation(m.clone(), eps, seed).unwrap();
        prop_assert_eq!(stable_degree(&p, 16, seed), stable_degree(&m, 16, 0));
    }

    #[test]
    fn half_plane_folds_vanish(k in -2.0f64..2.0, a in -3.0f64..3.0, b in 0.0f64..3.0) {
        let f = MapSpec::composition(vec![
            MapSpec::shear(2, k).unwrap(),
            MapSpec::translation(vec![a, b]),
        ]).unwrap();
        prop_assert_eq!(stable_degree(&fold_to_full_space(f).unwrap(), 16, 0), 0);
    }
}
