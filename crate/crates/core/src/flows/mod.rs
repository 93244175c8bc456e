//! The five geometric inter-level interfaces: netlist → layout,
//! netlist → solid, solid ↔ layout, and layout → netlist extraction.

mod extract;
mod synth;

use thiserror::Error;

use crate::geometry::{GeometryError, Polygon};
use crate::schematic::FootprintError;

pub use extract::{layout_to_netlist, ExtractionReport, ExtractionRules, Unrecognized};
pub use synth::{
    footprint_groups, layout_to_solid, netlist_to_layout, netlist_to_layout_with_warnings,
    netlist_to_solid, solid_to_layout, ShapeGroup,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error(transparent)]
    Footprint(#[from] FootprintError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("prism {index}: {source}")]
    Prism { index: usize, source: GeometryError },
    #[error("non-Manhattan polygon on {layer}: {polygon:?}")]
    NonManhattan { layer: String, polygon: Polygon },
    #[error("invalid extraction rules")]
    InvalidRules,
}
