//! Recognizes anchors, beams, masses and combs in a mask layout.

use memsflow::fixtures;
use memsflow::flows::{layout_to_netlist, ExtractionRules};
use memsflow::schematic::serialize_netlist;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let report = layout_to_netlist(
        &fixtures::accel(),
        &fixtures::stack(),
        &ExtractionRules::default(),
    )?;
    let n = &report.recognized;
    for (kind, count) in n.count_by_kind() {
        println!("{:>8}: {count}", kind.keyword());
    }
    println!("unrecognized shapes: {}", report.unrecognized.len());
    let text = serialize_netlist(n);
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
