//! Comb-driven spring-mass resonator: transient and AC sweep.

use memsflow::fixtures;
use memsflow::schematic::{parse_netlist, Material};
use memsflow::sim::{
    build_sim_model, frequency_response, suggest_dt, transient, AcInput, Axis, Probe, SimOptions,
    Source,
};

const NETLIST: &str = "process \"soi\"
anchor a1 node=(g) w=10u h=10u anchor_layer=ANCHOR pos=(0u,0u) layer=STRUCT
beam b1 node=(g,n1) l=200u w=2u pos=(10u,5u) layer=STRUCT
mass m1 node=(n1) w=400u h=400u pos=(210u,-195u) layer=STRUCT
lincomb c1 node=(n1) fingers=20 fl=40u fw=2u gap=2u overlap=20u orient=+y pos=(300u,205u) layer=STRUCT
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = parse_netlist(NETLIST)?;
    let options = SimOptions {
        axis: Axis::Y,
        alpha: 1e4,
        beta: 0.0,
    };
    let model = build_sim_model(&n, &Material::silicon(), &fixtures::stack(), &[], options)?
        .with_probes(vec![
            Probe::Displacement("n1".into()),
            Probe::Capacitance("c1".into()),
        ])?;
    let k = model.k_lumped[(0, 0)];
    let m = model.m_lumped[(0, 0)];
    let f0 = (k / m).sqrt() / (2.0 * std::f64::consts::PI);
    println!("k = {k:.4} N/m, m = {m:.3e} kg, f0 = {f0:.1} Hz");

    let step = Source::parse("voltage c1 step 20 0")?;
    let dt = suggest_dt(&model).min(1.0 / (100.0 * f0));
    let r = transient(&model, &[step], 40.0 / f0, dt)?;
    let x = r.signal("x(n1)").unwrap();
    let settled = x[x.len() - 1];
    let force = model.comb_force("c1", 20.0)?;
    println!(
        "{} steps: settles to {:.4} nm, static force / k = {:.4} nm",
        r.stats.steps,
        settled * 1e9,
        force / k * 1e9
    );

    let freqs: Vec<f64> = (1..=8).map(|i| f0 * i as f64 / 4.0).collect();
    let input = AcInput::Voltage {
        comb: "c1".into(),
        bias: 20.0,
    };
    for (f, h) in freqs.iter().zip(frequency_response(
        &model,
        &input,
        &Probe::Displacement("n1".into()),
        &freqs,
    )?) {
        println!("{f:>10.1} Hz  |x/v| = {:.3e} m/V", h?.norm());
    }
    Ok(())
}
