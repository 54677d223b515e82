use std::f64::consts::PI;

use coarsedeg::degree::{degree, DEFAULT_TEST_POINTS};
use coarsedeg::homotopy::{
    check_pseudocontinuity, check_uniformly_proper, linear_homotopy, run_homotopy_checks, triangle_bound_check,
    uniform_t_grid, HomotopyConfig,
};
use coarsedeg::lattice::{enumerate_window, Window};
use coarsedeg::maps::{parse_map, MapSpec, Verdict};
use proptest::prelude::*;

fn zoo() -> Vec<MapSpec> {
    ["identity", "antipodal", "reflect(0)", "rotate(1.5707963267948966)", "rotate(2.5)", "translate(2,1)", "scale(3)", "shear(1)"]
        .iter()
        .map(|s| parse_map(s, 2).unwrap())
        .collect()
}

#[test]
fn endpoints_are_exact_on_the_window() {
    let pts: Vec<Vec<f64>> = enumerate_window(&Window::new(2, 8)).unwrap().iter().map(|p| p.to_world(1.0)).collect();
    for h in zoo() {
        let fam = linear_homotopy(h.clone());
        for p in &pts {
            let minus: Vec<f64> = p.iter().map(|v| -v).collect();
            assert_eq!(fam.eval(0.0, p).unwrap(), minus);
            assert_eq!(fam.eval(1.0, p).unwrap(), h.evaluate(p).unwrap());
        }
    }
}

/// Where the linear homotopy is uniformly proper, `h` has the degree of the
/// antipodal map.
#[test]
fn proper_homotopies_see_the_antipodal_degree() {
    let ladder: Vec<Window> = [4, 8, 16].iter().map(|&l| Window::new(2, l)).collect();
    let grid = uniform_t_grid(16);
    let mut proper = 0;
    for h in zoo() {
        let rep = check_uniformly_proper(&linear_homotopy(h.clone()), 1.0, &ladder, &grid).unwrap();
        if rep.verdict == Verdict::ProperAtScale {
            proper += 1;
            let r = degree(&h, &Window::new(2, 8), DEFAULT_TEST_POINTS, 0).unwrap();
            assert_eq!(r.d, Some(1), "{h}");
        }
    }
    assert!(proper >= 3);
}

#[test]
fn reflection_homotopy_is_not_uniformly_proper() {
    // t reflect - (1 - t) id kills the first axis at t = 1/2.
    let ladder: Vec<Window> = [4, 8, 16].iter().map(|&l| Window::new(2, l)).collect();
    let rep = check_uniformly_proper(&linear_homotopy(MapSpec::reflection(2, 1).unwrap()), 1.0, &ladder, &uniform_t_grid(16))
        .unwrap();
    assert_eq!(rep.verdict, Verdict::Suspect);
}

#[test]
fn pseudocontinuity_halves_with_the_grid() {
    let w = Window::new(2, 8);
    for h in zoo() {
        let rep = check_pseudocontinuity(&linear_homotopy(h), &uniform_t_grid(8), &w, 0).unwrap();
        assert!(rep.refines);
        assert!((rep.max_jump_half_step - rep.max_jump / 2.0).abs() <= 1e-9 * (1.0 + rep.max_jump));
    }
}

#[test]
fn reports_are_reproducible_and_embed_their_settings() {
    let mut cfg = HomotopyConfig::new(2);
    cfg.triangle_samples = 500;
    cfg.seed = 9;
    let h = parse_map("rotate(0.4)", 2).unwrap();
    let a = serde_json::to_string(&run_homotopy_checks(&h, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run_homotopy_checks(&h, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["triangle"]["seed"], 9);
    assert_eq!(v["uniformly_proper"]["t_grid"].as_array().unwrap().len(), 17);
    assert_eq!(v["uniformly_bornologous"]["window"]["L"], 16);
}

fn linear_map() -> impl Strategy<Value = MapSpec> {
    prop_oneof![
        (0.0f64..2.0 * PI).prop_map(|a| MapSpec::rotation(2, a, 0, 1).unwrap()),
        (0.1f64..4.0).prop_map(|k| MapSpec::scaling(2, k)),
        prop::collection::vec(-6.0f64..6.0, 2).prop_map(MapSpec::translation),
        (-2.0f64..2.0).prop_map(|k| MapSpec::shear(2, k).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn triangle_bound_holds(h in linear_map(), t in 0.5f64..3.0, seed in any::<u64>()) {
        let tb = triangle_bound_check(&h, t, &Window::new(2, 32), 2000, seed).unwrap();
        prop_assert!(tb.violations.is_empty(), "{:?}", tb.violations.first());
        prop_assert!(tb.step_violations.is_empty());
        prop_assert_eq!(tb.c, 2.0 * (1.0 + tb.growth));
    }
}
