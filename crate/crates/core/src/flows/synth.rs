use crate::geometry::{extrude_polygon, project_prism_checked, Layout, ProcessStack, SolidModel};
use crate::schematic::{component_footprint, ComponentKind, Netlist};

use super::FlowError;

/// Shapes of one instance, tagged with its kind and name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeGroup {
    pub kind: ComponentKind,
    pub instance: String,
    pub shapes: Vec<(String, crate::geometry::Polygon)>,
}

/// Resolves every instance to its footprint, in netlist order.
pub fn footprint_groups(
    n: &Netlist,
    stack: &ProcessStack,
) -> Result<(Vec<ShapeGroup>, Vec<String>), FlowError> {
    let mut groups = Vec::with_capacity(n.instances.len());
    let mut warnings = Vec::new();
    for inst in &n.instances {
        let fp = component_footprint(inst, stack)?;
        warnings.extend(fp.warnings);
        groups.push(ShapeGroup {
            kind: inst.kind(),
            instance: inst.name.clone(),
            shapes: fp.shapes,
        });
    }
    Ok((groups, warnings))
}

pub fn netlist_to_layout(n: &Netlist, stack: &ProcessStack) -> Result<Layout, FlowError> {
    netlist_to_layout_with_warnings(n, stack).map(|(l, _)| l)
}

/// As [`netlist_to_layout`], also returning angle-snapping warnings.
pub fn netlist_to_layout_with_warnings(
    n: &Netlist,
    stack: &ProcessStack,
) -> Result<(Layout, Vec<String>), FlowError> {
    let (groups, warnings) = footprint_groups(n, stack)?;
    let mut layout = Layout::default();
    for g in &groups {
        for (layer, poly) in &g.shapes {
            layout.add(layer, poly)?;
        }
    }
    Ok((layout, warnings))
}

pub fn netlist_to_solid(n: &Netlist, stack: &ProcessStack) -> Result<SolidModel, FlowError> {
    let (groups, _) = footprint_groups(n, stack)?;
    let mut solid = SolidModel::new("", &stack.name);
    for g in &groups {
        for (layer, poly) in &g.shapes {
            solid.add(extrude_polygon(poly, layer, stack)?)?;
        }
    }
    Ok(solid)
}

pub fn solid_to_layout(s: &SolidModel, stack: &ProcessStack) -> Result<Layout, FlowError> {
    let mut layout = Layout::new(if s.name.is_empty() { "1" } else { &s.name });
    for (index, prism) in s.prisms().iter().enumerate() {
        let (layer, poly) = project_prism_checked(prism, stack)
            .map_err(|source| FlowError::Prism { index, source })?;
        layout.add(&layer, &poly)?;
    }
    Ok(layout)
}

pub fn layout_to_solid(l: &Layout, stack: &ProcessStack) -> Result<SolidModel, FlowError> {
    let name = if l.cell_name == "1" { "" } else { &l.cell_name };
    let mut solid = SolidModel::new(name, &stack.name);
    for (layer, poly) in l.iter() {
        solid.add(extrude_polygon(poly, layer, stack)?)?;
    }
    Ok(solid)
}
