use coarsedeg::lattice::{enumerate_window, Window};
use coarsedeg::maps::{
    check_properness, estimate_bornologous_modulus, fold_to_full_space, parse_map, CoarseMap, MapSpec,
    RadialProfile,
};
use proptest::prelude::*;

fn lattice(dim: usize) -> Vec<Vec<f64>> {
    enumerate_window(&Window::new(dim, 8))
        .unwrap()
        .iter()
        .map(|p| p.to_world(1.0))
        .collect()
}

fn agree_on_lattice(a: &MapSpec, b: &MapSpec) {
    for p in lattice(a.dim()) {
        assert_eq!(a.evaluate(&p).unwrap(), b.evaluate(&p).unwrap(), "{a} vs {b} at {p:?}");
    }
}

#[test]
fn builtins_agree_with_expression_twins() {
    let pairs = [
        ("reflect(0)", "(-x1, x2)"),
        ("reflect(1)", "(x1, -x2)"),
        ("antipodal", "(-x1, -x2)"),
        ("translate(3,-2)", "(x1 + 3, x2 - 2)"),
        ("linear(2,1,-1,3)", "(2*x1 + 1*x2, -1*x1 + 3*x2)"),
    ];
    for (builtin, expr) in pairs {
        agree_on_lattice(&parse_map(builtin, 2).unwrap(), &parse_map(expr, 2).unwrap());
    }
    agree_on_lattice(&parse_map("antipodal", 3).unwrap(), &parse_map("(-x1, -x2, -x3)", 3).unwrap());
    agree_on_lattice(&parse_map("reflect(2)", 3).unwrap(), &parse_map("(x1, x2, -x3)", 3).unwrap());
}

fn translation() -> impl Strategy<Value = MapSpec> {
    prop::collection::vec(-20.0f64..20.0, 2).prop_map(MapSpec::translation)
}

fn simple_map() -> impl Strategy<Value = MapSpec> {
    prop_oneof![
        Just(MapSpec::identity(2)),
        Just(MapSpec::antipodal(2)),
        (0usize..2).prop_map(|i| MapSpec::reflection(2, i).unwrap()),
        translation(),
        prop::collection::vec(-3.0f64..3.0, 4).prop_map(|a| MapSpec::linear(2, a).unwrap()),
        (-3.0f64..3.0).prop_map(|k| MapSpec::scaling(2, k)),
        (-3.0f64..3.0).prop_map(|k| MapSpec::shear(2, k).unwrap()),
        (-7.0f64..7.0).prop_map(|a| MapSpec::rotation(2, a, 0, 1).unwrap()),
        (0.1f64..3.0, -2.0f64..2.0).prop_map(|(scale, offset)| MapSpec::radial(2, RadialProfile { scale, offset })),
        Just(parse_map("(x1 + abs(x2), max(x2, 0) - 1)", 2).unwrap()),
    ]
}

fn any_map() -> impl Strategy<Value = MapSpec> {
    simple_map().prop_recursive(2, 6, 3, |inner| {
        prop_oneof![
            (inner.clone(), 0.0f64..2.0, any::<u64>())
                .prop_map(|(m, eps, seed)| MapSpec::perturbation(m, eps, seed).unwrap()),
            prop::collection::vec(inner, 1..3).prop_map(|ms| MapSpec::composition(ms).unwrap()),
        ]
    })
}

fn world_point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn display_reparses_to_the_same_map(m in any_map(), pts in prop::collection::vec(world_point(), 8)) {
        let text = m.to_string();
        let back = parse_map(&text, 2).unwrap();
        prop_assert_eq!(back.to_string(), text);
        for p in pts {
            prop_assert_eq!(back.evaluate(&p).unwrap(), m.evaluate(&p).unwrap());
        }
    }

    #[test]
    fn fold_is_symmetric(v in prop::collection::vec(-20.0f64..20.0, 2), k in 0.0f64..3.0, p in world_point()) {
        // Translations along the boundary and shears keep the half-plane.
        let f = MapSpec::composition(vec![
            MapSpec::shear(2, k).unwrap(),
            MapSpec::translation(vec![v[0], v[1].abs()]),
        ]).unwrap();
        let g = fold_to_full_space(f).unwrap();
        let q = vec![p[0], -p[1]];
        prop_assert_eq!(g.evaluate(&p).unwrap(), g.evaluate(&q).unwrap());
    }

    #[test]
    fn perturbation_stays_within_eps(m in simple_map(), eps in 0.0f64..2.0, seed in any::<u64>(), p in world_point()) {
        let q = MapSpec::perturbation(m.clone(), eps, seed).unwrap();
        let (a, b) = (q.evaluate(&p).unwrap(), m.evaluate(&p).unwrap());
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d <= eps * (1.0 + 1e-12) + 1e-12);
        prop_assert_eq!(q.evaluate(&p).unwrap(), a);
    }
}

#[test]
fn fold_rejects_maps_leaving_the_half_plane() {
    assert!(fold_to_full_space(MapSpec::antipodal(2)).is_err());
    assert!(fold_to_full_space(parse_map("translate(0,-1)", 2).unwrap()).is_err());
    assert!(fold_to_full_space(parse_map("(x1, abs(x2))", 2).unwrap()).is_ok());
}

#[test]
fn modulus_is_monotone_and_deterministic() {
    let w = Window::new(2, 16);
    let radii = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
    for text in ["rotate(0.3)", "(x1 + abs(x2), x2)", "perturb(2,5){identity}", "radial(2,1)"] {
        let m = parse_map(text, 2).unwrap();
        let a = estimate_bornologous_modulus(&m, &radii, &w, 128, 11).unwrap();
        let b = estimate_bornologous_modulus(&m, &radii, &w, 128, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.samples.windows(2).all(|p| p[0].s <= p[1].s), "{text}");
    }
}

#[test]
fn properness_is_deterministic() {
    let ladder: Vec<Window> = [4, 8, 16].iter().map(|&l| Window::new(2, l)).collect();
    let m = parse_map("shear(2)", 2).unwrap();
    assert_eq!(check_properness(&m, 1.0, &ladder).unwrap(), check_properness(&m, 1.0, &ladder).unwrap());
    assert_eq!(m.dim(), CoarseMap::dim(&m));
}
