//! Integer-grid 2D polygons, layer-tagged prisms, the process stack, and the
//! CIF / ESM file formats.

mod cif;
mod esm;
mod layout;
mod polygon;
mod solid;
mod stack;

use thiserror::Error;

use crate::units::Nm;

pub use cif::{emit_cif, parse_cif, parse_cif_with_warnings, CifError, CifParse};
pub use esm::{emit_esm, parse_esm, EsmError};
pub use layout::Layout;
pub use polygon::{polygon_set_equal, Point, Polygon, Rect};
pub use solid::{extrude_polygon, project_prism, project_prism_checked, Prism, SolidModel};
pub use stack::{ProcessStack, StackLayer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate polygon (zero area or fewer than 3 distinct vertices)")]
    Degenerate,
    #[error("unknown layer {0}")]
    UnknownLayer(String),
    #[error("empty layer name")]
    EmptyLayerName,
    #[error(
        "prism on {layer} spans [{z0}, {z1}] nm, which is not the stack interval of that layer"
    )]
    StackMismatch { layer: String, z0: Nm, z1: Nm },
    #[error("empty z-interval [{z0}, {z1}]")]
    EmptyInterval { z0: Nm, z1: Nm },
    #[error("invalid process stack: {0}")]
    InvalidStack(String),
    #[error("stack line {line}: {message}")]
    StackSyntax { line: usize, message: String },
}
