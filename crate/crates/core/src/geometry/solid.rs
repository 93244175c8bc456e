use crate::units::Nm;

use super::{GeometryError, Polygon, ProcessStack};

/// A footprint extruded through the z-interval `[z0, z1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Prism {
    pub layer: String,
    pub footprint: Polygon,
    pub z0: Nm,
    pub z1: Nm,
}

/// Device-level design: a multiset of layer-tagged prisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolidModel {
    pub name: String,
    pub stack_ref: String,
    prisms: Vec<Prism>,
}

impl SolidModel {
    pub fn new(name: &str, stack_ref: &str) -> Self {
        Self {
            name: name.to_string(),
            stack_ref: stack_ref.to_string(),
            prisms: Vec::new(),
        }
    }

    /// Inserts at the canonical position (layer, then footprint, then z).
    pub fn add(&mut self, prism: Prism) -> Result<(), GeometryError> {
        if prism.z1 <= prism.z0 {
            return Err(GeometryError::EmptyInterval {
                z0: prism.z0,
                z1: prism.z1,
            });
        }
        let prism = Prism {
            footprint: prism.footprint.normalize()?,
            ..prism
        };
        let at = self.prisms.partition_point(|p| *p <= prism);
        self.prisms.insert(at, prism);
        Ok(())
    }

    pub fn prisms(&self) -> &[Prism] {
        &self.prisms
    }

    pub fn len(&self) -> usize {
        self.prisms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prisms.is_empty()
    }
}

pub fn extrude_polygon(
    polygon: &Polygon,
    layer: &str,
    stack: &ProcessStack,
) -> Result<Prism, GeometryError> {
    let l = stack.require(layer)?;
    Ok(Prism {
        layer: layer.to_string(),
        footprint: polygon.normalize()?,
        z0: l.z0,
        z1: l.z1(),
    })
}

/// The mask shape that reproduces `prism`.
pub fn project_prism(prism: &Prism) -> (String, Polygon) {
    (prism.layer.clone(), prism.footprint.clone())
}

/// As [`project_prism`], but rejects prisms whose z-interval is not the
/// stack interval of their layer.
pub fn project_prism_checked(
    prism: &Prism,
    stack: &ProcessStack,
) -> Result<(String, Polygon), GeometryError> {
    let l = stack.require(&prism.layer)?;
    if l.z0 != prism.z0 || l.z1() != prism.z1 {
        return Err(GeometryError::StackMismatch {
            layer: prism.layer.clone(),
            z0: prism.z0,
            z1: prism.z1,
        });
    }
    Ok(project_prism(prism))
}
