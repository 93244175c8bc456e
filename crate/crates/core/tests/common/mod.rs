#![allow(dead_code)]

use memsflow::mor::StateSpace;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit-variance uniform entries.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let s = 3f64.sqrt();
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-s..s))
}

/// A = G/√N − 1.5 I: spectrum inside the disk of radius ~1 about −1.5.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, outputs: usize) -> StateSpace {
    let a = random_matrix(rng, n, n) / (n as f64).sqrt() - DMatrix::identity(n, n) * 1.5;
    let b = DVector::from_column_slice(random_matrix(rng, n, 1).as_slice());
    let c = random_matrix(rng, outputs, n);
    StateSpace::new(a, b, c).unwrap()
}

/// |a − b| / max(|b|, floor), entrywise maximum.
pub fn max_rel(a: &DVector<f64>, b: &DVector<f64>, floor: f64) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(floor))
        .fold(0.0, f64::max)
}

use memsflow::geometry::{Layout, Point, Polygon, ProcessStack, StackLayer};
use memsflow::schematic::{
    to_canonical, CombParams, ComponentInstance, Geometry, Material, Netlist, Orient,
};

pub fn soi() -> ProcessStack {
    ProcessStack::new(
        "soi",
        vec![
            StackLayer::new("ANCHOR", 0, 2_000, "oxide"),
            StackLayer::new("STRUCT", 2_000, 2_000, "si"),
        ],
    )
    .unwrap()
}

/// Cell pitch of generated netlists; every footprint fits inside one cell.
pub const CELL: i64 = 1_000_000;

/// Up to `max` library instances, one per grid cell so nothing touches.
/// With `oblique`, some instances get non-Manhattan angles.
pub fn random_netlist(rng: &mut ChaCha8Rng, max: usize, oblique: bool) -> Netlist {
    let count = rng.gen_range(1..=max);
    let mut instances = Vec::with_capacity(count);
    for k in 0..count {
        let origin = Point::new(
            (k % 8) as i64 * CELL + CELL / 2,
            (k / 8) as i64 * CELL + CELL / 2,
        );
        let angle = if oblique && rng.gen_bool(0.2) {
            rng.gen_range(1..90) as f64 + 0.5
        } else {
            90.0 * rng.gen_range(0..4) as f64
        };
        let (prefix, geometry) = match rng.gen_range(0..5) {
            0 => {
                let width = rng.gen_range(1_000..=5_000);
                (
                    'b',
                    Geometry::Beam {
                        length: rng.gen_range(10 * width..=300_000),
                        width,
                    },
                )
            }
            1 => (
                'm',
                Geometry::RigidMass {
                    width: rng.gen_range(20_000..=400_000),
                    height: rng.gen_range(20_000..=400_000),
                },
            ),
            2 => (
                'a',
                Geometry::Anchor {
                    width: rng.gen_range(10_000..=100_000),
                    height: rng.gen_range(10_000..=100_000),
                    anchor_layer: "ANCHOR".into(),
                },
            ),
            kind => {
                let p = CombParams {
                    fingers: rng.gen_range(3..=20),
                    finger_length: rng.gen_range(10_000..=60_000),
                    finger_width: rng.gen_range(1_000..=4_000),
                    gap: rng.gen_range(1_000..=4_000),
                    overlap: rng.gen_range(1_000..=10_000),
                    orient: Orient::from_quarters(rng.gen_range(0..4)),
                };
                if kind == 3 {
                    ('c', Geometry::LinearComb(p))
                } else {
                    ('d', Geometry::BiasComb(p))
                }
            }
        };
        let nodes = match geometry {
            Geometry::Beam { .. } => vec![format!("n{k}a"), format!("n{k}b")],
            _ => vec![format!("n{k}")],
        };
        instances.push(ComponentInstance {
            name: format!("{prefix}{k}"),
            nodes,
            geometry,
            position: origin,
            angle,
            layer: "STRUCT".into(),
        });
    }
    Netlist {
        process: "soi".into(),
        materials: vec![
            Material::silicon(),
            Material::new("oxide", 70e9, 0.17, 2200.0),
        ],
        instances,
    }
}

/// What extraction can recover of an instance: kind and shape, with bias
/// combs read as linear combs and the electrical overlap dropped.
pub fn extraction_key(c: &ComponentInstance) -> String {
    let c = to_canonical(c).expect("Manhattan instance");
    let geometry = match c.geometry {
        Geometry::LinearComb(p) | Geometry::BiasComb(p) => {
            Geometry::LinearComb(CombParams { overlap: 0, ..p })
        }
        g => g,
    };
    format!("{geometry:?} at {:?} angle {}", c.position, c.angle)
}

/// Random simple rectilinear polygon: a rectangle, or an L, U or T cut from one.
pub fn random_manhattan_polygon(rng: &mut ChaCha8Rng, origin: Point) -> Polygon {
    let w = rng.gen_range(4..=60) * 1_000;
    let h = rng.gen_range(4..=60) * 1_000;
    let p = |x: i64, y: i64| Point::new(origin.x + x, origin.y + y);
    let (cw, ch) = (
        rng.gen_range(1..w / 1_000) * 1_000,
        rng.gen_range(1..h / 1_000) * 1_000,
    );
    let v = match rng.gen_range(0..3) {
        0 => vec![p(0, 0), p(w, 0), p(w, h), p(0, h)],
        1 => vec![p(0, 0), p(w, 0), p(w, ch), p(cw, ch), p(cw, h), p(0, h)],
        _ => {
            // notch in the top edge
            let a = rng.gen_range(1..(w / 1_000 - 1).max(2)) * 1_000;
            let b = (a + 1_000).min(w - 1_000).max(a + 1);
            vec![
                p(0, 0),
                p(w, 0),
                p(w, h),
                p(b, h),
                p(b, ch),
                p(a, ch),
                p(a, h),
                p(0, h),
            ]
        }
    };
    Polygon::new(v)
}

/// Non-overlapping polygons on both stack layers, with arbitrary vertex order
/// and starting vertex.
pub fn random_layout(rng: &mut ChaCha8Rng) -> Layout {
    let mut l = Layout::new("rand");
    let count = rng.gen_range(1..=40);
    for k in 0..count {
        let origin = Point::new((k % 6) as i64 * 100_000, (k / 6) as i64 * 100_000);
        let mut poly = random_manhattan_polygon(rng, origin);
        let mut v = poly.vertices().to_vec();
        if rng.gen_bool(0.5) {
            v.reverse();
        }
        let shift = rng.gen_range(0..v.len());
        v.rotate_left(shift);
        poly = Polygon::new(v);
        let layer = if rng.gen_bool(0.3) {
            "ANCHOR"
        } else {
            "STRUCT"
        };
        l.add(layer, &poly).unwrap();
    }
    l
}
