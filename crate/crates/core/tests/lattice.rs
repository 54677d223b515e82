use coarsedeg::chains::boundary;
use coarsedeg::degree::Realization;
use coarsedeg::lattice::{fundamental_cycle, kuhn_simplices, Window};
use std::sync::OnceLock;

use num_bigint::BigInt;
use proptest::prelude::*;

/// Gaussian elimination with partial pivoting; an oracle independent of the
/// library's exact determinant.
fn det_f64(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        let (top, below) = a.split_at_mut(col + 1);
        for row in below {
            let f = row[col] / top[col][col];
            for (x, p) in row[col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * p;
            }
        }
    }
    det
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn signs_match_edge_determinants_and_volumes_add_up() {
    for n in 1..=3 {
        for l in [1i64, 2, 3] {
            let w = Window::new(n, l);
            let mut volume = 0.0;
            for s in kuhn_simplices(&w).unwrap() {
                let v0 = &s.vertices[0].0;
                let edges = s.vertices[1..]
                    .iter()
                    .map(|v| v.0.iter().zip(v0).map(|(a, b)| (a - b) as f64).collect())
                    .collect();
                let d = det_f64(edges);
                assert_eq!(d.signum() as i8, s.sign);
                volume += d.abs() / factorial(n);
            }
            assert!((volume - (2.0 * l as f64).powi(n as i32)).abs() < 1e-9);
        }
    }
}

#[test]
fn boundary_lives_next_to_the_window_faces() {
    for n in 1..=3 {
        for l in 2..=4 {
            let w = Window::new(n, l);
            let b = boundary(&fundamental_cycle(&w).unwrap()).unwrap();
            assert!(!b.is_zero());
            for (t, _) in b.terms() {
                assert!(t.iter().any(|v| v.0.iter().any(|c| c.abs() >= l - 1)), "{t:?}");
            }
        }
    }
}

#[test]
fn enumeration_is_deterministic() {
    let w = Window::new(3, 2);
    assert_eq!(kuhn_simplices(&w).unwrap(), kuhn_simplices(&w).unwrap());
    assert_eq!(fundamental_cycle(&w).unwrap(), fundamental_cycle(&w).unwrap());
}

fn interior_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.999f64..6.999, n)
}

/// Realizations of the `L = 8` fundamental cycles for `n = 1, 2, 3`.
fn realizations() -> &'static [Realization] {
    static CACHE: OnceLock<Vec<Realization>> = OnceLock::new();
    CACHE.get_or_init(|| {
        (1..=3)
            .map(|n| Realization::new(&fundamental_cycle(&Window::new(n, 8)).unwrap()).unwrap())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn interior_points_are_covered_once(p1 in interior_point(1), p2 in interior_point(2), p3 in interior_point(3)) {
        for p in [p1, p2, p3] {
            prop_assert_eq!(realizations()[p.len() - 1].covering(&p).unwrap(), BigInt::from(1));
        }
    }
}
