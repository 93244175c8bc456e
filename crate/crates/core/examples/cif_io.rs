//! Parsing and emitting CIF, including non-rectangular polygons.

use memsflow::geometry::{emit_cif, parse_cif, parse_cif_with_warnings};

const CIF: &str = "DS 1 1 1;
9 pads;
L STRUCT;
B 2000 1000 1000 500;
P 0 2000 3000 2000 3000 3000 1000 3000 1000 4000 0 4000;
L ANCHOR;
B 400 400 200 200;
DF;
C 1;
E
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = parse_cif(CIF)?;
    println!(
        "cell {} with {} shapes",
        layout.cell_name,
        layout.shape_count()
    );
    let canonical = emit_cif(&layout)?;
    print!("{canonical}");
    println!(
        "stable under reparse: {}",
        emit_cif(&parse_cif(&canonical)?)? == canonical
    );

    // wires are outside the supported subset
    if let Err(e) = parse_cif("DS 1 1 1;\nL STRUCT;\nW 10 0 0 100 0;\nDF;\nC 1;\nE\n") {
        println!("rejected: {e}");
    }
    let lenient = parse_cif_with_warnings("DS 1 1 1;\nL STRUCT;\nB 100 100 50 50;\nDF;\nC 1;\n")?;
    for w in &lenient.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
