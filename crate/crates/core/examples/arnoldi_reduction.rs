//! Shift-invert Arnoldi on a folded-beam FEA model, checked in frequency.

use memsflow::fea::{assemble, build_fea_model, Plane};
use memsflow::fixtures;
use memsflow::flows::{layout_to_netlist, ExtractionRules};
use memsflow::mor::{imaginary_axis, reduce, to_first_order, transfer_function, ReductionMode};
use memsflow::schematic::Material;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stack = fixtures::stack();
    let n = layout_to_netlist(&fixtures::accel(), &stack, &ExtractionRules::default())?.recognized;
    let mut model = build_fea_model(&n, &Material::silicon(), &stack, 1)?;
    model.constrain_plane(Plane::OutOfPlane);
    let pm = model.node("n14")?;
    let sys = assemble(&model, &[(pm, 2, 1.0)], &[(pm, 2)])?;
    let full = to_first_order(&sys)?;

    let freqs = [10.0, 100.0, 1e3, 2e3, 5e3];
    let omegas: Vec<f64> = freqs
        .iter()
        .map(|f| 2.0 * std::f64::consts::PI * f)
        .collect();
    let s = imaginary_axis(&omegas);
    let h = transfer_function(&full, &s)?;
    for q in [2, 4, 6, 10] {
        let r = reduce(&full, q, ReductionMode::ShiftInvert(0.0))?;
        let hr = transfer_function(&r, &s)?;
        let worst = h
            .iter()
            .zip(&hr)
            .map(|(a, b)| (a[0] - b[0]).norm() / a[0].norm())
            .fold(0.0, f64::max);
        println!(
            "N = {} q = {q:>2}: worst relative error {worst:.2e}",
            full.order()
        );
    }
    Ok(())
}
