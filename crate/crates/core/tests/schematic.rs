mod common;

use common::{random_netlist, rng, soi};
use memsflow::fixtures;
use memsflow::schematic::{
    component_footprint, lumped_params, parse_netlist, serialize_netlist, to_canonical,
    validate_netlist, ComponentKind, Issue, LumpedParams, Material, NetlistError,
};
use proptest::prelude::*;

#[test]
fn gyro_fixture_validates() {
    let n = fixtures::gyro();
    assert!(validate_netlist(&n, &fixtures::stack()).is_empty());
    assert_eq!(n.instances.len(), 38);
    assert_eq!(n.material("si").unwrap().youngs_modulus, 160e9);
}

#[test]
fn syntax_errors_carry_line() {
    let e = parse_netlist("process \"soi\"\nmass m1 node=(a) w=10u\n").unwrap_err();
    assert!(e.to_string().starts_with("line 2"), "{e}");
    assert!(matches!(
        parse_netlist("widget w1 node=(a)\n"),
        Err(NetlistError::UnknownKind { line: 1, .. })
    ));
}

#[test]
fn process_mismatch() {
    let n = parse_netlist("process \"other\"\nanchor a node=(g) w=10u h=10u anchor_layer=ANCHOR pos=(0,0) layer=STRUCT\n").unwrap();
    let r = validate_netlist(&n, &soi());
    assert!(r
        .issues
        .iter()
        .any(|i| matches!(i, Issue::ProcessMismatch { .. })));
}

#[test]
fn lumped_spring_mass_frequency() {
    // 400 µm square plate on a 200 × 2 µm fixed-guided beam
    let n = parse_netlist(
        "process \"soi\"\nbeam b node=(g,x) l=200u w=2u pos=(0,0) layer=STRUCT\n\
         mass m node=(x) w=400u h=400u pos=(200u,-200u) layer=STRUCT\n",
    )
    .unwrap();
    let si = Material::silicon();
    let LumpedParams::Spring(k) = lumped_params(&n.instances[0], &si, &soi()).unwrap() else {
        panic!()
    };
    let LumpedParams::Mass { mass, .. } = lumped_params(&n.instances[1], &si, &soi()).unwrap()
    else {
        panic!()
    };
    let f0 = (k.lateral / mass).sqrt() / (2.0 * std::f64::consts::PI);
    assert!((f0 - 3297.2).abs() < 0.1, "{f0}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_round_trip(seed in any::<u64>()) {
        let n = random_netlist(&mut rng(seed), 50, true);
        let text = serialize_netlist(&n);
        let back = parse_netlist(&text).unwrap();
        prop_assert_eq!(&back, &n);
        prop_assert_eq!(serialize_netlist(&back), text);
    }

    #[test]
    fn isolated_nodes_dangle(seed in any::<u64>()) {
        let n = random_netlist(&mut rng(seed), 30, false);
        let r = validate_netlist(&n, &soi());
        let dangling = r.issues.iter().filter(|i| matches!(i, Issue::DanglingNode(_))).count();
        let expected: usize = n
            .instances
            .iter()
            .filter(|i| i.kind() != ComponentKind::Anchor)
            .map(|i| i.nodes.len())
            .sum();
        prop_assert_eq!(dangling, expected);
    }

    #[test]
    fn canonical_keeps_footprint(seed in any::<u64>()) {
        let n = random_netlist(&mut rng(seed), 20, false);
        for c in &n.instances {
            let canon = to_canonical(c).unwrap();
            let a = component_footprint(c, &soi()).unwrap();
            let b = component_footprint(&canon, &soi()).unwrap();
            prop_assert_eq!(a.shapes, b.shapes);
        }
    }
}
