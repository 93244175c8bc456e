//! Bundled design fixtures: a four-mass comb-drive gyroscope netlist, a
//! folded-flexure accelerometer layout and the two-mask process they share.

pub const STACK: &str = include_str!("../fixtures/soi.stack");
pub const GYRO_NETLIST: &str = include_str!("../fixtures/gyro.net");
pub const ACCEL_CIF: &str = include_str!("../fixtures/accel.cif");

use crate::geometry::{parse_cif, Layout, ProcessStack};
use crate::schematic::{parse_netlist, Netlist};

pub fn stack() -> ProcessStack {
    ProcessStack::parse(STACK).expect("bundled stack parses")
}

pub fn gyro() -> Netlist {
    parse_netlist(GYRO_NETLIST).expect("bundled gyroscope parses")
}

pub fn accel() -> Layout {
    parse_cif(ACCEL_CIF).expect("bundled accelerometer parses")
}
