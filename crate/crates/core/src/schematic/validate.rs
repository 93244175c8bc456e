use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::ProcessStack;

use super::netlist::{ComponentKind, Geometry, Netlist};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Issue {
    /// Node referenced by exactly one instance, which is not an anchor.
    DanglingNode(String),
    UnknownLayer {
        instance: String,
        layer: String,
    },
    UnknownMaterial {
        layer: String,
        material: String,
    },
    InvalidMaterial(String),
    ParameterRange {
        instance: String,
        message: String,
    },
    NodeArity {
        instance: String,
        found: usize,
    },
    ProcessMismatch {
        netlist: String,
        stack: String,
    },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::DanglingNode(n) => write!(f, "dangling node {n}"),
            Issue::UnknownLayer { instance, layer } => {
                write!(f, "{instance}: layer {layer} is not in the process stack")
            }
            Issue::UnknownMaterial { layer, material } => {
                write!(f, "layer {layer}: material {material} is not defined")
            }
            Issue::InvalidMaterial(m) => write!(f, "material {m} has out-of-range properties"),
            Issue::ParameterRange { instance, message } => write!(f, "{instance}: {message}"),
            Issue::NodeArity { instance, found } => {
                write!(f, "{instance}: wrong number of nodes ({found})")
            }
            Issue::ProcessMismatch { netlist, stack } => {
                write!(
                    f,
                    "netlist process {netlist:?} differs from stack {stack:?}"
                )
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.issues {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

pub fn validate_netlist(n: &Netlist, stack: &ProcessStack) -> ValidationReport {
    let mut issues = Vec::new();
    if !n.process.is_empty() && n.process != stack.name {
        issues.push(Issue::ProcessMismatch {
            netlist: n.process.clone(),
            stack: stack.name.clone(),
        });
    }
    for m in &n.materials {
        if !m.is_valid() {
            issues.push(Issue::InvalidMaterial(m.name.clone()));
        }
    }

    let mut uses: BTreeMap<&str, (usize, bool)> = BTreeMap::new();
    let mut checked_layers = Vec::new();
    for inst in &n.instances {
        let is_anchor = inst.kind() == ComponentKind::Anchor;
        for node in &inst.nodes {
            let e = uses.entry(node).or_insert((0, false));
            e.0 += 1;
            e.1 |= is_anchor;
        }

        let arity_ok = match inst.kind() {
            ComponentKind::Beam => inst.nodes.len() == 2,
            _ => !inst.nodes.is_empty(),
        };
        if !arity_ok {
            issues.push(Issue::NodeArity {
                instance: inst.name.clone(),
                found: inst.nodes.len(),
            });
        }

        let mut layers = vec![inst.layer.as_str()];
        if let Geometry::Anchor { anchor_layer, .. } = &inst.geometry {
            layers.push(anchor_layer);
        }
        for layer in layers {
            match stack.layer(layer) {
                None => issues.push(Issue::UnknownLayer {
                    instance: inst.name.clone(),
                    layer: layer.to_string(),
                }),
                Some(l) => {
                    if !checked_layers.contains(&layer) {
                        checked_layers.push(layer);
                        if n.material(&l.material).is_none() {
                            issues.push(Issue::UnknownMaterial {
                                layer: layer.to_string(),
                                material: l.material.clone(),
                            });
                        }
                    }
                }
            }
        }

        let range = |message: &str| Issue::ParameterRange {
            instance: inst.name.clone(),
            message: message.to_string(),
        };
        match &inst.geometry {
            Geometry::Beam { length, width } => {
                if *length <= 0 || *width <= 0 {
                    issues.push(range("beam length and width must be positive"));
                }
            }
            Geometry::RigidMass { width, height } | Geometry::Anchor { width, height, .. } => {
                if *width <= 0 || *height <= 0 {
                    issues.push(range("width and height must be positive"));
                }
            }
            Geometry::LinearComb(c) | Geometry::BiasComb(c) => {
                if c.fingers < 1 {
                    issues.push(range("finger count must be at least 1"));
                }
                if c.finger_length <= 0 || c.finger_width <= 0 || c.gap <= 0 || c.overlap <= 0 {
                    issues.push(range("comb lengths must be positive"));
                }
                if c.overlap > c.finger_length {
                    issues.push(range("overlap exceeds finger length"));
                }
            }
        }
        if !inst.angle.is_finite() {
            issues.push(range("angle must be finite"));
        }
    }
    for (node, (count, anchored)) in uses {
        if count == 1 && !anchored {
            issues.push(Issue::DanglingNode(node.to_string()));
        }
    }
    ValidationReport { issues }
}
