mod common;

use common::{random_layout, random_manhattan_polygon, rng};
use memsflow::fixtures;
use memsflow::flows::netlist_to_layout;
use memsflow::geometry::{
    emit_cif, emit_esm, parse_cif, parse_cif_with_warnings, parse_esm, CifError, Layout, Point,
    Polygon, ProcessStack,
};
use proptest::prelude::*;

const GYRO: &str = include_str!("golden/gyro.cif");
const ACCEL: &str = include_str!("golden/accel.cif");
const PADS: &str = include_str!("golden/pads.cif");

#[test]
fn golden_gyro_layout() {
    let l = netlist_to_layout(&fixtures::gyro(), &fixtures::stack()).unwrap();
    assert_eq!(emit_cif(&l).unwrap(), GYRO);
}

#[test]
fn golden_accel_layout() {
    assert_eq!(emit_cif(&fixtures::accel()).unwrap(), ACCEL);
}

#[test]
fn golden_pads_layout() {
    let mut l = Layout::new("pads");
    l.add("ANCHOR", &Polygon::rect(0, 0, 4_000, 4_000)).unwrap();
    l.add("STRUCT", &Polygon::rect(0, 0, 20_000, 10_000))
        .unwrap();
    let pts = |v: &[(i64, i64)]| Polygon::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect());
    l.add(
        "STRUCT",
        &pts(&[
            (0, 20_000),
            (30_000, 20_000),
            (30_000, 30_000),
            (10_000, 30_000),
            (10_000, 40_000),
            (0, 40_000),
        ]),
    )
    .unwrap();
    l.add(
        "STRUCT",
        &pts(&[
            (50_000, 0),
            (90_000, 0),
            (90_000, 30_000),
            (80_000, 30_000),
            (80_000, 10_000),
            (60_000, 10_000),
            (60_000, 30_000),
            (50_000, 30_000),
        ]),
    )
    .unwrap();
    assert_eq!(emit_cif(&l).unwrap(), PADS);
}

#[test]
fn goldens_are_fixed_points() {
    for text in [GYRO, ACCEL, PADS] {
        let l = parse_cif(text).unwrap();
        assert_eq!(emit_cif(&l).unwrap(), text);
    }
    assert_eq!(parse_cif(PADS).unwrap().cell_name, "pads");
}

#[test]
fn cif_errors() {
    assert!(matches!(
        parse_cif("DS 1 1 1;\nL STRUCT;\nW 10 0 0 100 0;\nDF;\nE\n"),
        Err(CifError::Unsupported { .. })
    ));
    assert!(parse_cif("DS 1 1 1;\nL STRUCT;\nB 10 10 5 5\n").is_err());
    let lenient =
        parse_cif_with_warnings("DS 1 1 1;\nL STRUCT;\nB 100 100 50 50;\nDF;\nC 1;\n").unwrap();
    assert_eq!(lenient.layout.shape_count(), 1);
    assert_eq!(lenient.warnings.len(), 1);
}

#[test]
fn esm_format() {
    let text = "esm 1\nstack soi\nsolid demo\nprism layer=STRUCT z0=2000 z1=4000 poly=(0,0 10,0 10,10 0,10)\n";
    let m = parse_esm(text).unwrap();
    assert_eq!((m.name.as_str(), m.len()), ("demo", 1));
    assert_eq!(emit_esm(&m), text);
    assert!(parse_esm("esm 2\nstack soi\n").is_err());
}

#[test]
fn stack_text_round_trip() {
    let s = fixtures::stack();
    assert_eq!(ProcessStack::parse(&s.to_text()).unwrap(), s);
    assert!(ProcessStack::parse("stack bad\nA z0=0 t=2u si\nB z0=1u t=2u si\n").is_err());
}

proptest! {
    #[test]
    fn cif_round_trip(seed in any::<u64>()) {
        let l = random_layout(&mut rng(seed));
        let text = emit_cif(&l).unwrap();
        let back = parse_cif(&text).unwrap();
        prop_assert!(back.same_shapes(&l));
        prop_assert_eq!(emit_cif(&back).unwrap(), text);
    }

    #[test]
    fn normalize_is_canonical(seed in any::<u64>(), shift in 0usize..8, reverse: bool) {
        let p = random_manhattan_polygon(&mut rng(seed), Point::new(0, 0));
        let mut v = p.vertices().to_vec();
        if reverse {
            v.reverse();
        }
        let k = shift % v.len();
        v.rotate_left(k);
        let q = Polygon::new(v);
        prop_assert_eq!(q.normalize().unwrap(), p.normalize().unwrap());
        prop_assert!(p.is_simple() && p.is_rectilinear());
        prop_assert!(p.normalize().unwrap().twice_signed_area() > 0);
    }

    #[test]
    fn rotation_preserves_area(seed in any::<u64>(), q in -4i32..8) {
        let p = random_manhattan_polygon(&mut rng(seed), Point::new(-5_000, 7_000));
        let r = p.rotate_quarters(q);
        prop_assert_eq!(r.twice_signed_area(), p.twice_signed_area());
        prop_assert_eq!(r.rotate_quarters(4 - q.rem_euclid(4)).normalize().unwrap(), p.normalize().unwrap());
    }
}
