//! Netlist to CIF, directly and through the solid model.

use memsflow::fixtures;
use memsflow::flows::{netlist_to_layout, netlist_to_solid, solid_to_layout};
use memsflow::geometry::emit_cif;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stack = fixtures::stack();
    let n = fixtures::gyro();
    let layout = netlist_to_layout(&n, &stack)?;
    for name in layout.layers() {
        println!("{name}: {} shapes", layout.layer(name).len());
    }
    let via_solid = solid_to_layout(&netlist_to_solid(&n, &stack)?, &stack)?;
    println!("triangle closed: {}", layout.same_shapes(&via_solid));

    let cif = emit_cif(&layout)?;
    println!("{} bytes of CIF, first lines:", cif.len());
    for line in cif.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
