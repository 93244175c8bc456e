//! Beam FEA of the gyroscope: in-plane modes, then a static load.

use memsflow::fea::{assemble, build_fea_model, modal_analysis, static_solve, Plane};
use memsflow::fixtures;
use memsflow::schematic::Material;
use nalgebra::DVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = fixtures::gyro();
    let mut model = build_fea_model(&n, &Material::silicon(), &fixtures::stack(), 4)?;
    model.constrain_plane(Plane::InPlane);
    let p0 = model.node("p0")?;
    let sys = assemble(&model, &[(p0, 0, 1.0)], &[(p0, 0)])?;
    println!(
        "{} nodes, {} elements, {} free DOFs",
        model.nodes.len(),
        model.elements.len(),
        sys.size()
    );
    for (i, m) in modal_analysis(&sys, 4)?.iter().enumerate() {
        println!("mode {}: {:.1} Hz", i + 1, m.frequency);
    }
    // 1 µN on p0 along x
    let load = DVector::from_column_slice(sys.b_load.column(0).as_slice()) * 1e-6;
    let u = static_solve(&sys, &load)?;
    let x = (&sys.c_out * &u)[0];
    println!("static deflection of p0: {:.3} nm", x * 1e9);
    Ok(())
}
