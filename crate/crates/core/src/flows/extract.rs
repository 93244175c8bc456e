use std::collections::BTreeMap;

use crate::geometry::{Point, Polygon, ProcessStack, Rect};
use crate::schematic::{
    component_footprint, CombParams, ComponentInstance, Geometry, Material, Netlist, Orient,
};
use crate::units::{parse_length, Nm};

use super::FlowError;

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionRules {
    pub beam_max_width: Nm,
    pub beam_min_aspect: f64,
    pub comb_min_fingers: u32,
    pub anchor_layer: String,
    pub struct_layer: String,
    /// Copied into the recognized netlist; layouts carry no material data.
    pub materials: Vec<Material>,
}

impl Default for ExtractionRules {
    fn default() -> Self {
        Self {
            beam_max_width: 5_000,
            beam_min_aspect: 10.0,
            comb_min_fingers: 3,
            anchor_layer: "ANCHOR".into(),
            struct_layer: "STRUCT".into(),
            materials: vec![
                Material::silicon(),
                Material::new("oxide", 70e9, 0.17, 2200.0),
            ],
        }
    }
}

impl ExtractionRules {
    pub fn is_valid(&self) -> bool {
        self.beam_max_width > 0 && self.beam_min_aspect > 1.0 && self.comb_min_fingers >= 2
    }

    /// `key=value` lines over the defaults. `material=<name> <E> <nu> <rho>`
    /// lines replace the default material list.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut rules = Self::default();
        let mut materials = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| format!("line {}: {m}", i + 1);
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected key=value".into()))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| err(format!("bad number `{v}`")))
            };
            match key {
                "beam_max_width" => rules.beam_max_width = parse_length(value).map_err(err)?,
                "beam_min_aspect" => rules.beam_min_aspect = num(value)?,
                "comb_min_fingers" => {
                    rules.comb_min_fingers = value
                        .parse()
                        .map_err(|_| err(format!("bad count `{value}`")))?
                }
                "anchor_layer" => rules.anchor_layer = value.to_string(),
                "struct_layer" => rules.struct_layer = value.to_string(),
                "material" => {
                    let t: Vec<&str> = value.split_whitespace().collect();
                    let [name, e, nu, rho] = t[..] else {
                        return Err(err("material needs name E nu rho".into()));
                    };
                    materials.push(Material::new(name, num(e)?, num(nu)?, num(rho)?));
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        if !materials.is_empty() {
            rules.materials = materials;
        }
        if !rules.is_valid() {
            return Err("rules out of range".into());
        }
        Ok(rules)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unrecognized {
    pub layer: String,
    pub polygon: Polygon,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionReport {
    pub recognized: Netlist,
    pub unrecognized: Vec<Unrecognized>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Anchor,
    Comb(Orient),
    Beam,
    Mass,
}

struct Component {
    role: Role,
    /// Indices into the shape table; for combs the spine comes first.
    shapes: Vec<usize>,
}

struct Shape<'a> {
    layer: &'a str,
    poly: &'a Polygon,
    rect: Option<Rect>,
}

/// Side of `r` facing direction `o`: the fixed coordinate and the span along it.
fn side(r: &Rect, o: Orient) -> (Nm, Nm, Nm) {
    match o {
        Orient::PosX => (r.x1, r.y0, r.y1),
        Orient::NegX => (r.x0, r.y0, r.y1),
        Orient::PosY => (r.y1, r.x0, r.x1),
        Orient::NegY => (r.y0, r.x0, r.x1),
    }
}

/// Returns (start along side, width along side, length away from side) if
/// `f` sits on the `o` side of `s` without crossing it.
fn finger_on(s: &Rect, f: &Rect, o: Orient) -> Option<(Nm, Nm, Nm)> {
    let (c, lo, hi) = side(s, o);
    let (near, a0, a1, len) = match o {
        Orient::PosX => (f.x0, f.y0, f.y1, f.width()),
        Orient::NegX => (f.x1, f.y0, f.y1, f.width()),
        Orient::PosY => (f.y0, f.x0, f.x1, f.height()),
        Orient::NegY => (f.y1, f.x0, f.x1, f.height()),
    };
    (near == c && a0 >= lo && a1 <= hi).then_some((a0, a1 - a0, len))
}

fn spine_depth(s: &Rect, o: Orient) -> Nm {
    match o {
        Orient::PosX | Orient::NegX => s.width(),
        Orient::PosY | Orient::NegY => s.height(),
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

pub fn layout_to_netlist(
    l: &crate::geometry::Layout,
    stack: &ProcessStack,
    rules: &ExtractionRules,
) -> Result<ExtractionReport, FlowError> {
    if !rules.is_valid() {
        return Err(FlowError::InvalidRules);
    }
    let shapes: Vec<Shape> = l
        .iter()
        .map(|(layer, poly)| Shape {
            layer,
            poly,
            rect: poly.as_rect(),
        })
        .collect();
    for s in &shapes {
        if !s.poly.is_rectilinear() {
            return Err(FlowError::NonManhattan {
                layer: s.layer.to_string(),
                polygon: s.poly.clone(),
            });
        }
    }

    let mut unrecognized: Vec<(usize, &str)> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; shapes.len()];
    let mut comps: Vec<Component> = Vec::new();
    let mut structural = Vec::new();
    let mut anchor_rects = Vec::new();
    for (i, s) in shapes.iter().enumerate() {
        let extractable = s.layer == rules.struct_layer || s.layer == rules.anchor_layer;
        if !extractable {
            unrecognized.push((i, "layer not extractable"));
        } else if s.rect.is_none() {
            unrecognized.push((i, "non-rectangular"));
        } else if s.layer == rules.struct_layer {
            structural.push(i);
        } else {
            anchor_rects.push(i);
        }
    }

    // anchors: anchor-layer rectangle with a congruent structural rectangle
    for &a in &anchor_rects {
        let ra = shapes[a].rect;
        let partner = structural
            .iter()
            .copied()
            .find(|&s| owner[s].is_none() && shapes[s].rect == ra);
        match partner {
            Some(s) => {
                owner[a] = Some(comps.len());
                owner[s] = Some(comps.len());
                comps.push(Component {
                    role: Role::Anchor,
                    shapes: vec![s, a],
                });
            }
            None => unrecognized.push((a, "anchor without structural shape")),
        }
    }

    let rect = |i: usize| shapes[i].rect.unwrap();

    // combs: a spine with equal fingers at constant pitch covering one side exactly
    for &s in &structural {
        if owner[s].is_some() {
            continue;
        }
        let rs = rect(s);
        for o in [Orient::PosX, Orient::PosY, Orient::NegX, Orient::NegY] {
            let mut fingers: Vec<(Nm, Nm, Nm, usize)> = structural
                .iter()
                .filter(|&&f| f != s && owner[f].is_none())
                .filter_map(|&f| finger_on(&rs, &rect(f), o).map(|(a, w, len)| (a, w, len, f)))
                .collect();
            if fingers.len() < rules.comb_min_fingers as usize {
                continue;
            }
            fingers.sort();
            let (_, fw, fl, _) = fingers[0];
            let (_, lo, hi) = side(&rs, o);
            let pitch = if fingers.len() > 1 {
                fingers[1].0 - fingers[0].0
            } else {
                0
            };
            let regular = fingers
                .iter()
                .enumerate()
                .all(|(k, &(a, w, len, _))| w == fw && len == fl && a == lo + k as Nm * pitch);
            let last = fingers.last().unwrap();
            let covers = fingers[0].0 == lo && last.0 + fw == hi;
            if !(regular && covers && pitch > fw && spine_depth(&rs, o) == fw && fl > 0) {
                continue;
            }
            // fingers must be free apart from the spine
            let free = fingers.iter().all(|&(_, _, _, f)| {
                structural
                    .iter()
                    .all(|&t| t == f || t == s || !rect(t).meets(&rect(f)))
            });
            if !free {
                continue;
            }
            let id = comps.len();
            owner[s] = Some(id);
            let mut members = vec![s];
            for &(_, _, _, f) in &fingers {
                owner[f] = Some(id);
                members.push(f);
            }
            comps.push(Component {
                role: Role::Comb(o),
                shapes: members,
            });
            break;
        }
    }

    // beams, then masses
    for &s in &structural {
        if owner[s].is_some() {
            continue;
        }
        let r = rect(s);
        let (short, long) = (r.width().min(r.height()), r.width().max(r.height()));
        let role = if short <= rules.beam_max_width
            && long as f64 >= rules.beam_min_aspect * short as f64
        {
            Role::Beam
        } else {
            Role::Mass
        };
        owner[s] = Some(comps.len());
        comps.push(Component {
            role,
            shapes: vec![s],
        });
    }

    // overlaps: only a beam end buried in a mass or anchor is allowed
    let mut ambiguous = vec![false; comps.len()];
    for (i, &a) in structural.iter().enumerate() {
        for &b in &structural[i + 1..] {
            let (Some(ca), Some(cb)) = (owner[a], owner[b]) else {
                continue;
            };
            if ca == cb || !rect(a).overlaps(&rect(b)) {
                continue;
            }
            let allowed = beam_end_overlap(&comps, ca, rect(a), cb, rect(b))
                || beam_end_overlap(&comps, cb, rect(b), ca, rect(a));
            if !allowed {
                ambiguous[ca] = true;
                ambiguous[cb] = true;
            }
        }
    }
    for (c, comp) in comps.iter().enumerate() {
        if ambiguous[c] {
            for &s in &comp.shapes {
                owner[s] = None;
                unrecognized.push((s, "ambiguous overlap"));
            }
        }
    }

    // ports: one per component, beams get two (low end, high end)
    let mut port_base = Vec::with_capacity(comps.len());
    let mut ports = 0;
    for comp in &comps {
        port_base.push(ports);
        ports += if comp.role == Role::Beam { 2 } else { 1 };
    }
    let port_of = |c: usize, own: Rect, other: Rect| -> usize {
        if comps[c].role != Role::Beam {
            return port_base[c];
        }
        let horizontal = own.width() >= own.height();
        let contact = Rect {
            x0: own.x0.max(other.x0),
            y0: own.y0.max(other.y0),
            x1: own.x1.min(other.x1),
            y1: own.y1.min(other.y1),
        };
        let (lo, hi, c0, c1) = if horizontal {
            (own.x0, own.x1, contact.x0, contact.x1)
        } else {
            (own.y0, own.y1, contact.y0, contact.y1)
        };
        let high = if c0 == lo {
            false
        } else if c1 == hi {
            true
        } else {
            (c0 + c1) - (lo + hi) > 0
        };
        port_base[c] + high as usize
    };
    let mut uf = UnionFind::new(ports);
    for (i, &a) in structural.iter().enumerate() {
        for &b in &structural[i + 1..] {
            let (Some(ca), Some(cb)) = (owner[a], owner[b]) else {
                continue;
            };
            if ca == cb || !contacts(&rect(a), &rect(b)) {
                continue;
            }
            // comb fingers are electrically active but mechanically free
            let finger = |c: usize, s: usize| {
                matches!(comps[c].role, Role::Comb(_)) && comps[c].shapes[0] != s
            };
            if finger(ca, a) || finger(cb, b) {
                continue;
            }
            uf.union(port_of(ca, rect(a), rect(b)), port_of(cb, rect(b), rect(a)));
        }
    }

    // deterministic naming in scan order of each component's first shape
    let mut order: Vec<usize> = (0..comps.len()).filter(|&c| !ambiguous[c]).collect();
    order.sort_by_key(|&c| comps[c].shapes.iter().min().copied());
    let mut node_names: BTreeMap<usize, String> = BTreeMap::new();
    let mut counters: BTreeMap<char, usize> = BTreeMap::new();
    let mut netlist = Netlist {
        process: stack.name.clone(),
        materials: rules.materials.clone(),
        instances: Vec::new(),
    };
    for &c in &order {
        let comp = &comps[c];
        let nports = if comp.role == Role::Beam { 2 } else { 1 };
        let mut nodes = Vec::new();
        for p in port_base[c]..port_base[c] + nports {
            let root = uf.find(p);
            let next = node_names.len() + 1;
            nodes.push(
                node_names
                    .entry(root)
                    .or_insert_with(|| format!("n{next}"))
                    .clone(),
            );
        }
        let r = rect(comp.shapes[0]);
        let (prefix, geometry, angle) = match comp.role {
            Role::Anchor => (
                'a',
                Geometry::Anchor {
                    width: r.width(),
                    height: r.height(),
                    anchor_layer: rules.anchor_layer.clone(),
                },
                0.0,
            ),
            Role::Mass => (
                'm',
                Geometry::RigidMass {
                    width: r.width(),
                    height: r.height(),
                },
                0.0,
            ),
            Role::Beam => {
                let horizontal = r.width() >= r.height();
                let (length, width) = if horizontal {
                    (r.width(), r.height())
                } else {
                    (r.height(), r.width())
                };
                (
                    'b',
                    Geometry::Beam { length, width },
                    if horizontal { 0.0 } else { 90.0 },
                )
            }
            Role::Comb(orient) => {
                let f = rect(comp.shapes[1]);
                let (fw, fl) = match orient {
                    Orient::PosX | Orient::NegX => (f.height(), f.width()),
                    _ => (f.width(), f.height()),
                };
                let pitch = match orient {
                    Orient::PosX | Orient::NegX => rect(comp.shapes[2]).y0 - f.y0,
                    _ => rect(comp.shapes[2]).x0 - f.x0,
                };
                (
                    'c',
                    Geometry::LinearComb(CombParams {
                        fingers: (comp.shapes.len() - 1) as u32,
                        finger_length: fl,
                        finger_width: fw,
                        gap: pitch.abs() - fw,
                        overlap: fl / 2,
                        orient,
                    }),
                    0.0,
                )
            }
        };
        let k = counters.entry(prefix).or_insert(0);
        *k += 1;
        let mut inst = ComponentInstance {
            name: format!("{prefix}{k}"),
            nodes,
            geometry,
            position: Point::default(),
            angle,
            layer: rules.struct_layer.clone(),
        };
        let at_origin = component_footprint(&inst, stack)?;
        let min = at_origin
            .shapes
            .iter()
            .map(|(_, p)| p.bbox().min_corner())
            .min()
            .unwrap_or_default();
        let want = comp
            .shapes
            .iter()
            .map(|&s| rect(s).min_corner())
            .min()
            .unwrap_or_default();
        inst.position = Point::new(want.x - min.x, want.y - min.y);
        netlist.instances.push(inst);
    }

    unrecognized.sort_by_key(|&(i, _)| i);
    Ok(ExtractionReport {
        recognized: netlist,
        unrecognized: unrecognized
            .into_iter()
            .map(|(i, reason)| Unrecognized {
                layer: shapes[i].layer.to_string(),
                polygon: shapes[i].poly.clone(),
                reason: reason.to_string(),
            })
            .collect(),
    })
}

/// Shared boundary of positive length, or overlapping interiors.
fn contacts(a: &Rect, b: &Rect) -> bool {
    if !a.meets(b) {
        return false;
    }
    let dx = a.x1.min(b.x1) - a.x0.max(b.x0);
    let dy = a.y1.min(b.y1) - a.y0.max(b.y0);
    dx > 0 || dy > 0
}

fn beam_end_overlap(comps: &[Component], cb: usize, beam: Rect, cm: usize, body: Rect) -> bool {
    if comps[cb].role != Role::Beam || !matches!(comps[cm].role, Role::Mass | Role::Anchor) {
        return false;
    }
    // the overlap must reach one end of the beam and not cut across it
    if beam.width() >= beam.height() {
        body.y0 <= beam.y0 && body.y1 >= beam.y1 && (body.x0 <= beam.x0 || body.x1 >= beam.x1)
    } else {
        body.x0 <= beam.x0 && body.x1 >= beam.x1 && (body.y0 <= beam.y0 || body.y1 >= beam.y1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::netlist_to_layout;
    use crate::geometry::{Layout, StackLayer};
    use crate::schematic::{parse_netlist, ComponentKind};

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

    fn extract(text: &str) -> ExtractionReport {
        let n = parse_netlist(text).unwrap();
        let l = netlist_to_layout(&n, &stack()).unwrap();
        layout_to_netlist(&l, &stack(), &ExtractionRules::default()).unwrap()
    }

    #[test]
    fn rules_file() {
        let r = ExtractionRules::parse(
            "beam_max_width = 3u\ncomb_min_fingers=4\nmaterial = poly 150e9 0.2 2300\n",
        )
        .unwrap();
        assert_eq!((r.beam_max_width, r.comb_min_fingers), (3_000, 4));
        assert_eq!(r.materials.len(), 1);
        assert!(ExtractionRules::parse("beam_min_aspect=0.5\n").is_err());
        assert!(ExtractionRules::parse("colour=red\n").is_err());
    }

    #[test]
    fn single_mass() {
        let r = extract("mass m node=(a) w=120u h=80u pos=(10u,0) layer=STRUCT\n");
        assert!(r.unrecognized.is_empty());
        let i = &r.recognized.instances[0];
        assert_eq!(
            i.geometry,
            Geometry::RigidMass {
                width: 120_000,
                height: 80_000
            }
        );
        assert_eq!(i.position, Point::new(10_000, 0));
    }

    #[test]
    fn three_finger_comb() {
        let r = extract(
            "lincomb c node=(a) fingers=3 fl=20u fw=2u gap=2u overlap=10u orient=+y pos=(0,0) layer=STRUCT\n",
        );
        assert!(r.unrecognized.is_empty());
        assert_eq!(r.recognized.instances.len(), 1);
        let c = r.recognized.instances[0].geometry.comb().unwrap();
        assert_eq!(
            (c.fingers, c.finger_width, c.gap, c.orient),
            (3, 2_000, 2_000, Orient::PosY)
        );
        assert_eq!(r.recognized.instances[0].position, Point::default());
    }

    #[test]
    fn l_shape_unrecognized() {
        let mut l = Layout::default();
        let poly = Polygon::new(vec![
            Point::new(0, 0),
            Point::new(20, 0),
            Point::new(20, 10),
            Point::new(10, 10),
            Point::new(10, 20),
            Point::new(0, 20),
        ]);
        l.add("STRUCT", &poly).unwrap();
        let r = layout_to_netlist(&l, &stack(), &ExtractionRules::default()).unwrap();
        assert!(r.recognized.instances.is_empty());
        assert_eq!(r.unrecognized[0].reason, "non-rectangular");
    }

    #[test]
    fn oblique_polygon_is_error() {
        let mut l = Layout::default();
        l.add(
            "STRUCT",
            &Polygon::new(vec![Point::new(0, 0), Point::new(10, 0), Point::new(0, 10)]),
        )
        .unwrap();
        assert!(matches!(
            layout_to_netlist(&l, &stack(), &ExtractionRules::default()),
            Err(FlowError::NonManhattan { .. })
        ));
    }

    #[test]
    fn chain_connectivity() {
        let r = extract(
            "anchor a node=(g) w=20u h=20u anchor_layer=ANCHOR pos=(0,0) layer=STRUCT\n\
             beam b node=(g,x) l=100u w=2u pos=(20u,10u) layer=STRUCT\n\
             mass m node=(x) w=50u h=50u pos=(120u,-15u) layer=STRUCT\n\
             lincomb c node=(x) fingers=4 fl=20u fw=2u gap=2u overlap=10u orient=+x pos=(170u,0) layer=STRUCT\n",
        );
        assert!(r.unrecognized.is_empty(), "{:?}", r.unrecognized);
        let n = &r.recognized;
        assert_eq!(n.count(ComponentKind::Anchor), 1);
        assert_eq!(n.count(ComponentKind::Beam), 1);
        assert_eq!(n.count(ComponentKind::RigidMass), 1);
        assert_eq!(n.count(ComponentKind::LinearComb), 1);
        let node_of = |k: ComponentKind| {
            n.instances
                .iter()
                .find(|i| i.kind() == k)
                .unwrap()
                .nodes
                .clone()
        };
        let beam = node_of(ComponentKind::Beam);
        assert_eq!(node_of(ComponentKind::Anchor), vec![beam[0].clone()]);
        assert_eq!(node_of(ComponentKind::RigidMass), vec![beam[1].clone()]);
        assert_eq!(node_of(ComponentKind::LinearComb), vec![beam[1].clone()]);
    }

    #[test]
    fn crossing_overlap_is_ambiguous() {
        let mut l = Layout::default();
        l.add("STRUCT", &Polygon::rect(0, 0, 50_000, 50_000))
            .unwrap();
        l.add("STRUCT", &Polygon::rect(40_000, 40_000, 90_000, 90_000))
            .unwrap();
        l.add("STRUCT", &Polygon::rect(200_000, 0, 250_000, 50_000))
            .unwrap();
        let r = layout_to_netlist(&l, &stack(), &ExtractionRules::default()).unwrap();
        assert_eq!(r.unrecognized.len(), 2);
        assert!(r
            .unrecognized
            .iter()
            .all(|u| u.reason == "ambiguous overlap"));
        assert_eq!(r.recognized.instances.len(), 1);
    }

    #[test]
    fn buried_beam_end_connects() {
        let mut l = Layout::default();
        l.add("STRUCT", &Polygon::rect(0, 0, 50_000, 50_000))
            .unwrap();
        l.add("STRUCT", &Polygon::rect(40_000, 20_000, 140_000, 22_000))
            .unwrap();
        let r = layout_to_netlist(&l, &stack(), &ExtractionRules::default()).unwrap();
        assert!(r.unrecognized.is_empty());
        let n = &r.recognized;
        let m = n
            .instances
            .iter()
            .find(|i| i.kind() == ComponentKind::RigidMass)
            .unwrap();
        let b = n
            .instances
            .iter()
            .find(|i| i.kind() == ComponentKind::Beam)
            .unwrap();
        assert_eq!(m.nodes[0], b.nodes[0]);
    }
}
