use thiserror::Error;

use crate::geometry::{Point, Polygon, ProcessStack, Rect};
use crate::units::Nm;

use super::netlist::{ComponentInstance, Geometry, Orient};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AnglePolicy {
    /// Non-Manhattan angles are rejected.
    Exact,
    /// Non-Manhattan angles are rotated in floating point and rounded to the
    /// nm grid; a warning is recorded.
    #[default]
    Snap,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FootprintError {
    #[error("{instance}: layer {layer} is not in the process stack")]
    UnknownLayer { instance: String, layer: String },
    #[error("{instance}: angle {angle} is not a multiple of 90 degrees")]
    NonManhattan { instance: String, angle: f64 },
    #[error("{instance}: footprint degenerates to zero area")]
    Degenerate { instance: String },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    pub shapes: Vec<(String, Polygon)>,
    pub warnings: Vec<String>,
}

/// Quarter turns for a Manhattan angle, `None` otherwise.
pub fn manhattan_quarters(angle: f64) -> Option<i32> {
    let q = angle / 90.0;
    let r = q.round();
    ((q - r).abs() < 1e-9 && r.abs() < 1e9).then(|| (r as i64).rem_euclid(4) as i32)
}

/// Axis-aligned shapes relative to the instance origin, before the angle.
fn local_shapes(c: &ComponentInstance) -> Vec<(&str, Rect)> {
    let layer = c.layer.as_str();
    let rect =
        |x0: Nm, y0: Nm, x1: Nm, y1: Nm| Rect::from_corners(Point::new(x0, y0), Point::new(x1, y1));
    match &c.geometry {
        Geometry::RigidMass { width, height } => vec![(layer, rect(0, 0, *width, *height))],
        Geometry::Anchor {
            width,
            height,
            anchor_layer,
        } => vec![
            (anchor_layer.as_str(), rect(0, 0, *width, *height)),
            (layer, rect(0, 0, *width, *height)),
        ],
        Geometry::Beam { length, width } => {
            let lo = -(width / 2);
            vec![(layer, rect(0, lo, *length, lo + width))]
        }
        Geometry::LinearComb(p) | Geometry::BiasComb(p) => {
            let q = p.orient.quarters();
            let turn = |r: Rect| {
                Rect::from_corners(
                    Point::new(r.x0, r.y0).rotate_quarters(q),
                    Point::new(r.x1, r.y1).rotate_quarters(q),
                )
            };
            let fw = p.finger_width;
            let mut out = vec![(layer, turn(rect(0, 0, fw, p.span())))];
            for i in 0..p.fingers as Nm {
                let y = i * p.pitch();
                out.push((layer, turn(rect(fw, y, fw + p.finger_length, y + fw))));
            }
            out
        }
    }
}

fn place(c: &ComponentInstance, policy: AnglePolicy) -> Result<Footprint, FootprintError> {
    let mut fp = Footprint::default();
    let quarters = manhattan_quarters(c.angle);
    if quarters.is_none() {
        if policy == AnglePolicy::Exact {
            return Err(FootprintError::NonManhattan {
                instance: c.name.clone(),
                angle: c.angle,
            });
        }
        fp.warnings.push(format!(
            "{}: angle {} snapped to the nm grid",
            c.name, c.angle
        ));
    }
    let (sin, cos) = c.angle.to_radians().sin_cos();
    for (layer, r) in local_shapes(c) {
        let poly = match quarters {
            Some(q) => r.to_polygon().rotate_quarters(q),
            None => Polygon::new(
                r.to_polygon()
                    .vertices()
                    .iter()
                    .map(|v| {
                        let (x, y) = (v.x as f64, v.y as f64);
                        Point::new(
                            (x * cos - y * sin).round() as Nm,
                            (x * sin + y * cos).round() as Nm,
                        )
                    })
                    .collect(),
            ),
        };
        let poly = poly
            .translate(c.position.x, c.position.y)
            .normalize()
            .map_err(|_| FootprintError::Degenerate {
                instance: c.name.clone(),
            })?;
        fp.shapes.push((layer.to_string(), poly));
    }
    Ok(fp)
}

pub fn component_footprint(
    c: &ComponentInstance,
    stack: &ProcessStack,
) -> Result<Footprint, FootprintError> {
    component_footprint_with(c, stack, AnglePolicy::Snap)
}

pub fn component_footprint_with(
    c: &ComponentInstance,
    stack: &ProcessStack,
    policy: AnglePolicy,
) -> Result<Footprint, FootprintError> {
    let mut layers = vec![c.layer.as_str()];
    if let Geometry::Anchor { anchor_layer, .. } = &c.geometry {
        layers.push(anchor_layer);
    }
    for layer in layers {
        if stack.layer(layer).is_none() {
            return Err(FootprintError::UnknownLayer {
                instance: c.name.clone(),
                layer: layer.to_string(),
            });
        }
    }
    place(c, policy)
}

fn bbox_min(fp: &Footprint) -> Point {
    fp.shapes
        .iter()
        .map(|(_, p)| p.bbox().min_corner())
        .min()
        .unwrap_or_default()
}

/// Rewrites a Manhattan instance so that its geometry is expressed with the
/// smallest rotation: masses, anchors and combs at angle 0 (comb direction in
/// `orient`), beams at 0° or 90°. The footprint is unchanged. Returns `None`
/// for non-Manhattan angles.
pub fn to_canonical(c: &ComponentInstance) -> Option<ComponentInstance> {
    let q = manhattan_quarters(c.angle)?;
    let mut out = c.clone();
    out.angle = 0.0;
    match &mut out.geometry {
        Geometry::Beam { .. } => {
            if q % 2 == 1 {
                out.angle = 90.0;
            }
        }
        Geometry::RigidMass { width, height } | Geometry::Anchor { width, height, .. } => {
            if q % 2 == 1 {
                std::mem::swap(width, height);
            }
        }
        Geometry::LinearComb(p) | Geometry::BiasComb(p) => {
            p.orient = Orient::from_quarters(p.orient.quarters() + q);
        }
    }
    let actual = place(c, AnglePolicy::Exact).ok()?;
    let moved = place(&out, AnglePolicy::Exact).ok()?;
    let (a, b) = (bbox_min(&actual), bbox_min(&moved));
    out.position = c.position.offset(a.x - b.x, a.y - b.y);
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StackLayer;
    use crate::schematic::netlist::CombParams;

    fn stack() -> ProcessStack {
        ProcessStack::new(
            "p",
            vec![
                StackLayer::new("ANCHOR", 0, 2_000, "oxide"),
                StackLayer::new("STRUCT", 2_000, 2_000, "si"),
            ],
        )
        .unwrap()
    }

    fn inst(geometry: Geometry, angle: f64) -> ComponentInstance {
        ComponentInstance {
            name: "x".into(),
            nodes: vec!["a".into()],
            geometry,
            position: Point::default(),
            angle,
            layer: "STRUCT".into(),
        }
    }

    #[test]
    fn mass_rectangle() {
        let c = inst(
            Geometry::RigidMass {
                width: 100_000,
                height: 50_000,
            },
            0.0,
        );
        let fp = component_footprint(&c, &stack()).unwrap();
        assert_eq!(
            fp.shapes,
            vec![("STRUCT".to_string(), Polygon::rect(0, 0, 100_000, 50_000))]
        );
    }

    #[test]
    fn vertical_beam() {
        let c = inst(
            Geometry::Beam {
                length: 200_000,
                width: 4_000,
            },
            90.0,
        );
        let fp = component_footprint(&c, &stack()).unwrap();
        assert_eq!(fp.shapes[0].1, Polygon::rect(-2_000, 0, 2_000, 200_000));
    }

    #[test]
    fn comb_pitch_and_span() {
        let p = CombParams {
            fingers: 3,
            finger_length: 20_000,
            finger_width: 2_000,
            gap: 2_000,
            overlap: 10_000,
            orient: Orient::PosY,
        };
        assert_eq!(p.span(), 10_000);
        let c = inst(Geometry::LinearComb(p), 0.0);
        let fp = component_footprint(&c, &stack()).unwrap();
        assert_eq!(fp.shapes.len(), 4);
        let mut xs: Vec<_> = fp.shapes[1..].iter().map(|(_, s)| s.bbox().x0).collect();
        xs.sort();
        assert_eq!(
            xs.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>(),
            vec![4_000, 4_000]
        );
        let spine = fp.shapes[0].1.bbox();
        assert_eq!(spine.width(), 10_000);
    }

    #[test]
    fn anchor_two_layers() {
        let c = inst(
            Geometry::Anchor {
                width: 10_000,
                height: 20_000,
                anchor_layer: "ANCHOR".into(),
            },
            0.0,
        );
        let fp = component_footprint(&c, &stack()).unwrap();
        assert_eq!(fp.shapes[0].0, "ANCHOR");
        assert_eq!(fp.shapes[1].0, "STRUCT");
        assert_eq!(fp.shapes[0].1, fp.shapes[1].1);
    }

    #[test]
    fn unknown_layer() {
        let mut c = inst(
            Geometry::RigidMass {
                width: 1,
                height: 1,
            },
            0.0,
        );
        c.layer = "METAL9".into();
        assert!(matches!(
            component_footprint(&c, &stack()),
            Err(FootprintError::UnknownLayer { .. })
        ));
    }

    #[test]
    fn oblique_angle_snaps_or_fails() {
        let c = inst(
            Geometry::Beam {
                length: 100_000,
                width: 2_000,
            },
            30.0,
        );
        let fp = component_footprint(&c, &stack()).unwrap();
        assert_eq!(fp.warnings.len(), 1);
        assert!(fp.shapes[0].1.is_simple());
        assert!(matches!(
            component_footprint_with(&c, &stack(), AnglePolicy::Exact),
            Err(FootprintError::NonManhattan { .. })
        ));
    }

    #[test]
    fn canonical_preserves_shapes() {
        let mut c = inst(
            Geometry::RigidMass {
                width: 30_000,
                height: 10_000,
            },
            270.0,
        );
        c.position = Point::new(5_000, 7_000);
        let k = to_canonical(&c).unwrap();
        assert_eq!(k.angle, 0.0);
        let s = stack();
        assert_eq!(
            component_footprint(&c, &s).unwrap().shapes,
            component_footprint(&k, &s).unwrap().shapes
        );
    }
}
