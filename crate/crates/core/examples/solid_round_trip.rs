//! Layout → extruded solid → ESM text → solid → layout.

use memsflow::fixtures;
use memsflow::flows::{layout_to_solid, solid_to_layout};
use memsflow::geometry::{emit_esm, parse_esm, Layout, Polygon};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stack = fixtures::stack();
    let mut layout = Layout::new("lshape");
    // an L on the structural layer over a square anchor
    let l = Polygon::new(
        [
            (0, 0),
            (40_000, 0),
            (40_000, 10_000),
            (10_000, 10_000),
            (10_000, 30_000),
            (0, 30_000),
        ]
        .iter()
        .map(|&(x, y)| memsflow::geometry::Point { x, y })
        .collect(),
    );
    layout.add("STRUCT", &l)?;
    layout.add("ANCHOR", &Polygon::rect(0, 0, 10_000, 10_000))?;

    let solid = layout_to_solid(&layout, &stack)?;
    let text = emit_esm(&solid);
    print!("{text}");
    let back = solid_to_layout(&parse_esm(&text)?, &stack)?;
    println!("layout recovered exactly: {}", back.same_shapes(&layout));
    Ok(())
}
