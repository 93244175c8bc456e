//! System-level netlist: component library, text format, validation,
//! mask footprints and lumped physical parameters.

mod footprint;
mod lumped;
mod netlist;
mod validate;

pub use footprint::{
    component_footprint, component_footprint_with, manhattan_quarters, to_canonical, AnglePolicy,
    Footprint, FootprintError,
};
pub use lumped::{lumped_params, BeamStiffness, LumpedError, LumpedParams};
pub use netlist::{
    parse_netlist, serialize_netlist, CombParams, ComponentInstance, ComponentKind, Geometry,
    Material, Netlist, NetlistError, Orient,
};
pub use validate::{validate_netlist, Issue, ValidationReport};
