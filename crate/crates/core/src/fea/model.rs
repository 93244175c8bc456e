use std::collections::{BTreeMap, BTreeSet};

use nalgebra::Vector3;

use crate::geometry::ProcessStack;
use crate::schematic::{ComponentKind, Geometry, Material, Netlist};
use crate::units::nm_to_m;

use super::FeaError;

pub const DOFS_PER_NODE: usize = 6;

/// Index of a nodal degree of freedom: 0..3 translations, 3..6 rotations.
pub type Dof = u8;

#[derive(Clone, Debug, PartialEq)]
pub struct BeamElement {
    pub nodes: [usize; 2],
    pub width: f64,
    pub thickness: f64,
    pub material: Material,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointMass {
    pub node: usize,
    pub mass: f64,
    /// Principal rotary inertias about x, y, z through the node.
    pub inertia: [f64; 3],
}

/// Which in-plane or out-of-plane DOFs to suppress on every node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    /// Keep ux, uy, rz.
    InPlane,
    /// Keep uz, rx, ry.
    OutOfPlane,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeaModel {
    /// Coordinates in meters.
    pub nodes: Vec<Vector3<f64>>,
    pub elements: Vec<BeamElement>,
    pub point_masses: Vec<PointMass>,
    pub fixed_dofs: BTreeSet<(usize, Dof)>,
    /// (master, slave)
    pub rigid_links: Vec<(usize, usize)>,
    /// Rayleigh coefficients: Cd = alpha·M + beta·K.
    pub alpha: f64,
    pub beta: f64,
    /// Netlist node name → representative FEA node.
    pub labels: BTreeMap<String, usize>,
    /// RigidMass instance name → its master node.
    pub mass_nodes: BTreeMap<String, usize>,
}

impl FeaModel {
    pub fn add_node(&mut self, p: Vector3<f64>) -> usize {
        self.nodes.push(p);
        self.nodes.len() - 1
    }

    pub fn fix_node(&mut self, node: usize) {
        for d in 0..DOFS_PER_NODE as Dof {
            self.fixed_dofs.insert((node, d));
        }
    }

    pub fn constrain_plane(&mut self, plane: Plane) {
        let dofs: [Dof; 3] = match plane {
            Plane::InPlane => [2, 3, 4],
            Plane::OutOfPlane => [0, 1, 5],
        };
        for n in 0..self.nodes.len() {
            for d in dofs {
                self.fixed_dofs.insert((n, d));
            }
        }
    }

    pub fn node(&self, label: &str) -> Result<usize, FeaError> {
        self.labels
            .get(label)
            .copied()
            .ok_or_else(|| FeaError::UnknownNode(label.to_string()))
    }

    /// Checks element and constraint references and the rigid-link graph.
    pub fn check(&self) -> Result<(), FeaError> {
        let n = self.nodes.len();
        let bad = |m: String| Err(FeaError::InvalidModel(m));
        for (i, e) in self.elements.iter().enumerate() {
            if e.nodes[0] == e.nodes[1] || e.nodes.iter().any(|&k| k >= n) {
                return bad(format!("element {i} has invalid nodes"));
            }
            if (self.nodes[e.nodes[0]] - self.nodes[e.nodes[1]]).norm() == 0.0 {
                return bad(format!("element {i} has zero length"));
            }
        }
        if self
            .fixed_dofs
            .iter()
            .any(|&(k, d)| k >= n || d as usize >= DOFS_PER_NODE)
        {
            return bad("fixed DOF references a missing node".into());
        }
        if self.point_masses.iter().any(|p| p.node >= n) {
            return bad("point mass references a missing node".into());
        }
        let mut master_of = vec![None; n];
        for &(m, s) in &self.rigid_links {
            if m >= n || s >= n || m == s {
                return bad(format!("rigid link ({m}, {s}) is invalid"));
            }
            if master_of[s].replace(m).is_some() {
                return bad(format!("node {s} is slaved twice"));
            }
        }
        for &(m, _) in &self.rigid_links {
            if master_of[m].is_some() {
                return bad(format!("master node {m} is itself a slave"));
            }
        }
        Ok(())
    }
}

fn plate_mass(m: &Material, w: f64, h: f64, t: f64) -> PointMass {
    let mass = m.density * w * h * t;
    PointMass {
        node: 0,
        mass,
        inertia: [
            mass * (h * h + t * t) / 12.0,
            mass * (w * w + t * t) / 12.0,
            mass * (w * w + h * h) / 12.0,
        ],
    }
}

/// Beam graph of a netlist: beams become `refine` elements each, masses a
/// master node at their centroid rigidly linked to the beam ends they hold,
/// anchors clamp the beam ends on their node. Combs are ignored.
pub fn build_fea_model(
    n: &Netlist,
    m: &Material,
    stack: &ProcessStack,
    refine: usize,
) -> Result<FeaModel, FeaError> {
    if refine == 0 {
        return Err(FeaError::InvalidModel("refine must be at least 1".into()));
    }
    let mut model = FeaModel::default();
    let layer_of = |name: &str| {
        stack
            .layer(name)
            .ok_or_else(|| FeaError::InvalidModel(format!("layer {name} is not in the stack")))
    };

    // beam ends per netlist node
    let mut ends: BTreeMap<&str, Vec<(usize, usize, Vector3<f64>)>> = BTreeMap::new();
    let mut beams = Vec::new();
    for inst in &n.instances {
        if let Geometry::Beam { length, width } = &inst.geometry {
            if inst.nodes.len() != 2 {
                return Err(FeaError::InvalidModel(format!(
                    "{} needs two nodes",
                    inst.name
                )));
            }
            let layer = layer_of(&inst.layer)?;
            let z = nm_to_m(layer.z0) + nm_to_m(layer.thickness) / 2.0;
            let lo = -(width / 2);
            let c = nm_to_m(lo) + nm_to_m(*width) / 2.0;
            let (sin, cos) = inst.angle.to_radians().sin_cos();
            let (px, py) = (nm_to_m(inst.position.x), nm_to_m(inst.position.y));
            let at = |x: f64| Vector3::new(px + x * cos - c * sin, py + x * sin + c * cos, z);
            let b = beams.len();
            beams.push((inst, nm_to_m(*width), nm_to_m(layer.thickness)));
            for (k, p) in [at(0.0), at(nm_to_m(*length))].into_iter().enumerate() {
                ends.entry(inst.nodes[k].as_str())
                    .or_default()
                    .push((b, k, p));
            }
        }
    }

    let mut anchored = BTreeSet::new();
    let mut masses: BTreeMap<&str, Vec<&crate::schematic::ComponentInstance>> = BTreeMap::new();
    for inst in &n.instances {
        match inst.kind() {
            ComponentKind::Anchor => {
                anchored.extend(inst.nodes.iter().map(String::as_str));
            }
            ComponentKind::RigidMass => {
                for node in &inst.nodes {
                    masses.entry(node.as_str()).or_default().push(inst);
                }
            }
            _ => {}
        }
    }

    let mut end_node = vec![[usize::MAX; 2]; beams.len()];
    let mut names: BTreeSet<&str> = ends.keys().copied().collect();
    names.extend(masses.keys().copied());
    for name in names {
        let here = ends.get(name).map(Vec::as_slice).unwrap_or(&[]);
        let mut master = None;
        for inst in masses.get(name).map(Vec::as_slice).unwrap_or(&[]) {
            let Geometry::RigidMass { width, height } = &inst.geometry else {
                unreachable!()
            };
            let layer = layer_of(&inst.layer)?;
            let (w, h, t) = (nm_to_m(*width), nm_to_m(*height), nm_to_m(layer.thickness));
            let (sin, cos) = inst.angle.to_radians().sin_cos();
            let (cx, cy) = (w / 2.0, h / 2.0);
            let centroid = Vector3::new(
                nm_to_m(inst.position.x) + cx * cos - cy * sin,
                nm_to_m(inst.position.y) + cx * sin + cy * cos,
                nm_to_m(layer.z0) + t / 2.0,
            );
            let node = model.add_node(centroid);
            let mut pm = plate_mass(m, w, h, t);
            if inst.angle != 0.0 {
                // in-plane rotation mixes the x/y inertias
                let (c2, s2) = (cos * cos, sin * sin);
                let [ix, iy, iz] = pm.inertia;
                pm.inertia = [ix * c2 + iy * s2, ix * s2 + iy * c2, iz];
            }
            pm.node = node;
            model.point_masses.push(pm);
            model.mass_nodes.insert(inst.name.clone(), node);
            match master {
                None => master = Some(node),
                Some(mn) => model.rigid_links.push((mn, node)),
            }
        }
        let is_anchor = anchored.contains(name);
        if let Some(mn) = master {
            model.labels.insert(name.to_string(), mn);
            if is_anchor {
                model.fix_node(mn);
            }
        }
        for &(b, k, p) in here {
            let node = match master {
                Some(mn) if !is_anchor => {
                    let node = model.add_node(p);
                    model.rigid_links.push((mn, node));
                    node
                }
                _ if is_anchor => {
                    let node = model.add_node(p);
                    model.fix_node(node);
                    node
                }
                _ => {
                    // beam junction: first end is the master, others follow rigidly
                    let node = model.add_node(p);
                    match master {
                        None => master = Some(node),
                        Some(mn) => {
                            if model.nodes[mn] == p {
                                model.nodes.pop();
                                end_node[b][k] = mn;
                                continue;
                            }
                            model.rigid_links.push((mn, node));
                        }
                    }
                    node
                }
            };
            end_node[b][k] = node;
            model.labels.entry(name.to_string()).or_insert(node);
        }
    }

    for (b, (inst, width, thickness)) in beams.iter().enumerate() {
        let [a, z] = end_node[b];
        let (pa, pz) = (model.nodes[a], model.nodes[z]);
        if (pz - pa).norm() == 0.0 {
            return Err(FeaError::InvalidModel(format!(
                "{} has zero length",
                inst.name
            )));
        }
        let mut prev = a;
        for i in 1..=refine {
            let next = if i == refine {
                z
            } else {
                model.add_node(pa + (pz - pa) * (i as f64 / refine as f64))
            };
            model.elements.push(BeamElement {
                nodes: [prev, next],
                width: *width,
                thickness: *thickness,
                material: m.clone(),
            });
            prev = next;
        }
    }

    check_anchored(&model)?;
    model.check()?;
    Ok(model)
}

/// Every connected piece of structure must touch a clamped node.
fn check_anchored(model: &FeaModel) -> Result<(), FeaError> {
    let n = model.nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let pairs = model
        .elements
        .iter()
        .map(|e| (e.nodes[0], e.nodes[1]))
        .chain(model.rigid_links.iter().copied());
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut grounded = BTreeSet::new();
    for &(node, _) in &model.fixed_dofs {
        grounded.insert(find(&mut parent, node));
    }
    for i in 0..n {
        if !grounded.contains(&find(&mut parent, i)) {
            return Err(FeaError::Unanchored { node: i });
        }
    }
    Ok(())
}
