//! The two end-to-end design flows on the bundled fixtures.
//!
//! Gyroscope: netlist → solid → layout → triangle check → lumped AC sweep,
//! cross-checked against a beam FEA of the same netlist.
//! Accelerometer: layout → solid → extracted netlist → FEA → Arnoldi
//! macromodel → transient with a pulse and a sine force, compared against
//! the unreduced model.

use std::fmt;
use std::path::Path;

use crate::fea::{assemble, build_fea_model, modal_analysis, Plane};
use crate::fixtures;
use crate::flows::{
    layout_to_netlist, layout_to_solid, netlist_to_layout, netlist_to_solid, solid_to_layout,
    ExtractionRules,
};
use crate::fsio::write_atomic;
use crate::geometry::{emit_cif, emit_esm, parse_cif, Layout};
use crate::mor::{export_reduced, reduce, to_first_order, ReductionMode};
use crate::schematic::{
    serialize_netlist, validate_netlist, ComponentKind, Geometry, Material, Netlist,
};
use crate::sim::{
    build_sim_model, compare_results, frequency_response, suggest_dt, transient, AcInput, Axis,
    Comparison, Macromodel, MacromodelAttachment, Probe, SimModel, SimOptions, SimResult, Source,
    Waveform,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemoError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for DemoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for DemoError {}

fn at<E: fmt::Display>(stage: &'static str) -> impl Fn(E) -> DemoError {
    move |e| DemoError {
        stage,
        message: e.to_string(),
    }
}

/// One line per stage, in flow order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageReport {
    pub stages: Vec<(String, String)>,
}

impl StageReport {
    fn push(&mut self, stage: &str, summary: String) {
        self.stages.push((stage.to_string(), summary));
    }

    pub fn stage_names(&self) -> Vec<&str> {
        self.stages.iter().map(|(s, _)| s.as_str()).collect()
    }
}

impl fmt::Display for StageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (stage, summary) in &self.stages {
            writeln!(f, "[{stage}] {summary}")?;
        }
        Ok(())
    }
}

fn save(dir: Option<&Path>, name: &str, text: &str) -> Result<(), DemoError> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d).map_err(at("write"))?;
            write_atomic(&d.join(name), text).map_err(at("write"))
        }
        None => Ok(()),
    }
}

#[derive(Debug, Clone)]
pub struct GyroDemo {
    pub report: StageReport,
    pub triangle_closed: bool,
    /// Drive-mode peak of the lumped sweep, Hz.
    pub peak_hz: f64,
    /// First in-plane mode of the beam FEA, Hz.
    pub fea_hz: f64,
}

/// Runs the gyroscope flow, writing artifacts to `out` when given.
pub fn gyro_demo(out: Option<&Path>) -> Result<GyroDemo, DemoError> {
    let stack = fixtures::stack();
    let n = fixtures::gyro();
    let mut report = StageReport::default();
    let issues = validate_netlist(&n, &stack);
    if !issues.is_empty() {
        return Err(DemoError {
            stage: "netlist",
            message: format!("{} validation issues", issues.issues.len()),
        });
    }
    report.push(
        "netlist",
        format!(
            "{} instances: {} masses, {} beams, {} anchors, {} combs",
            n.instances.len(),
            n.count(ComponentKind::RigidMass),
            n.count(ComponentKind::Beam),
            n.count(ComponentKind::Anchor),
            n.count(ComponentKind::LinearComb) + n.count(ComponentKind::BiasComb)
        ),
    );
    save(out, "gyro.net", &serialize_netlist(&n))?;

    let solid = netlist_to_solid(&n, &stack).map_err(at("solid"))?;
    save(out, "gyro.esm", &emit_esm(&solid))?;
    report.push("solid", format!("{} prisms", solid.len()));

    let via_solid = solid_to_layout(&solid, &stack).map_err(at("layout"))?;
    let cif = emit_cif(&via_solid).map_err(at("layout"))?;
    save(out, "gyro.cif", &cif)?;
    let reread = parse_cif(&cif).map_err(at("layout"))?;
    report.push(
        "layout",
        format!(
            "{} shapes on {} layers, CIF round trip {}",
            via_solid.shape_count(),
            via_solid.layers().count(),
            if reread.same_shapes(&via_solid) {
                "exact"
            } else {
                "DIFFERS"
            }
        ),
    );

    let direct = netlist_to_layout(&n, &stack).map_err(at("triangle"))?;
    let triangle_closed = direct.same_shapes(&via_solid);
    report.push(
        "triangle",
        format!(
            "netlist→layout {} netlist→solid→layout",
            if triangle_closed { "==" } else { "!=" }
        ),
    );

    let options = SimOptions {
        axis: Axis::X,
        alpha: 0.0,
        beta: 1e-9,
    };
    let model =
        build_sim_model(&n, &Material::silicon(), &stack, &[], options).map_err(at("ac"))?;
    let node = first_mass_node(&n).ok_or_else(|| DemoError {
        stage: "ac",
        message: "no rigid mass".into(),
    })?;
    let comb = n
        .instances
        .iter()
        .find(|i| i.kind() == ComponentKind::LinearComb && i.nodes[0] == node)
        .map(|i| i.name.clone());
    let input = match comb {
        Some(comb) => AcInput::Voltage { comb, bias: 10.0 },
        None => AcInput::Force(node.clone()),
    };
    let freqs: Vec<f64> = (0..=600).map(|i| 30e3 + 100.0 * i as f64).collect();
    let h = frequency_response(&model, &input, &Probe::Displacement(node.clone()), &freqs)
        .map_err(at("ac"))?;
    let mags: Vec<f64> = h
        .iter()
        .map(|v| v.as_ref().map_or(0.0, |c| c.norm()))
        .collect();
    let peak = (0..mags.len())
        .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
        .unwrap_or(0);
    let peak_hz = freqs[peak];
    let mut csv = String::from("f,mag\n");
    for (f, m) in freqs.iter().zip(&mags) {
        csv.push_str(&format!(
            "{},{}\n",
            crate::units::format_f64(*f),
            crate::units::format_f64(*m)
        ));
    }
    save(out, "gyro_ac.csv", &csv)?;

    let mut fea = build_fea_model(&n, &Material::silicon(), &stack, 4).map_err(at("fea"))?;
    fea.constrain_plane(Plane::InPlane);
    let sys = assemble(&fea, &[], &[]).map_err(at("fea"))?;
    let fea_hz = modal_analysis(&sys, 1).map_err(at("fea"))?[0].frequency;
    report.push(
        "ac",
        format!(
            "{} states, drive peak {:.1} kHz at {node}, FEA first mode {:.1} kHz ({:+.2}%)",
            model.state_count(),
            peak_hz / 1e3,
            fea_hz / 1e3,
            100.0 * (peak_hz - fea_hz) / fea_hz
        ),
    );
    Ok(GyroDemo {
        report,
        triangle_closed,
        peak_hz,
        fea_hz,
    })
}

fn first_mass_node(n: &Netlist) -> Option<String> {
    n.instances
        .iter()
        .find(|i| i.kind() == ComponentKind::RigidMass)
        .map(|i| i.nodes[0].clone())
}

/// Node of the largest rigid mass.
fn proof_mass(n: &Netlist) -> Option<String> {
    n.instances
        .iter()
        .filter_map(|i| match i.geometry {
            Geometry::RigidMass { width, height } => Some((width * height, i.nodes[0].clone())),
            _ => None,
        })
        .max_by_key(|(a, _)| *a)
        .map(|(_, node)| node)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelOptions {
    pub q: usize,
    pub refine: usize,
    pub t_end: f64,
    /// Pulse force on the proof mass, N, over `[0, pulse_width)`.
    pub pulse: f64,
    pub pulse_width: f64,
    pub sine: f64,
    pub sine_hz: f64,
    /// Also run the q = N reduction, which must reproduce the full model.
    pub exact_check: bool,
}

impl Default for AccelOptions {
    fn default() -> Self {
        Self {
            q: 10,
            refine: 1,
            t_end: 2e-3,
            pulse: 1e-7,
            pulse_width: 2e-4,
            sine: 5e-8,
            sine_hz: 1e3,
            exact_check: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AccelDemo {
    pub report: StageReport,
    pub unrecognized: usize,
    pub full_states: usize,
    pub reduced_states: usize,
    pub fundamental_hz: f64,
    pub full: SimResult,
    pub reduced: SimResult,
    pub comparison: Comparison,
    /// q = N against the full model on the same step.
    pub exact: Option<Comparison>,
}

/// Largest step no bigger than `dt` that divides `span` evenly.
fn snap_dt(dt: f64, span: f64) -> f64 {
    span / (span / dt).ceil()
}

fn attach(model: Macromodel, node: &str, n: &Netlist) -> MacromodelAttachment {
    MacromodelAttachment {
        model,
        node: node.to_string(),
        covers: n
            .instances
            .iter()
            .filter(|i| i.kind() != ComponentKind::Anchor)
            .map(|i| i.name.clone())
            .collect(),
    }
}

/// Runs the accelerometer flow, writing artifacts to `out` when given.
pub fn accel_demo(opts: &AccelOptions, out: Option<&Path>) -> Result<AccelDemo, DemoError> {
    let stack = fixtures::stack();
    let layout: Layout = fixtures::accel();
    let mut report = StageReport::default();
    report.push(
        "layout",
        format!(
            "cell {} with {} shapes",
            layout.cell_name,
            layout.shape_count()
        ),
    );

    let solid = layout_to_solid(&layout, &stack).map_err(at("solid"))?;
    save(out, "accel.esm", &emit_esm(&solid))?;
    let back = solid_to_layout(&solid, &stack).map_err(at("solid"))?;
    report.push(
        "solid",
        format!(
            "{} prisms, projection {}",
            solid.len(),
            if back.same_shapes(&layout) {
                "exact"
            } else {
                "DIFFERS"
            }
        ),
    );

    let extracted =
        layout_to_netlist(&layout, &stack, &ExtractionRules::default()).map_err(at("extract"))?;
    let n = extracted.recognized;
    save(out, "accel.net", &serialize_netlist(&n))?;
    report.push(
        "extract",
        format!(
            "{} masses, {} beams, {} anchors, {} unrecognized",
            n.count(ComponentKind::RigidMass),
            n.count(ComponentKind::Beam),
            n.count(ComponentKind::Anchor),
            extracted.unrecognized.len()
        ),
    );
    let node = proof_mass(&n).ok_or_else(|| DemoError {
        stage: "extract",
        message: "no proof mass".into(),
    })?;

    let si = Material::silicon();
    let mut fea = build_fea_model(&n, &si, &stack, opts.refine).map_err(at("fea"))?;
    fea.constrain_plane(Plane::OutOfPlane);
    let pm = fea.node(&node).map_err(at("fea"))?;
    let sys = assemble(&fea, &[(pm, 2, 1.0)], &[(pm, 2)]).map_err(at("fea"))?;
    let fundamental_hz = modal_analysis(&sys, 1).map_err(at("fea"))?[0].frequency;
    report.push(
        "fea",
        format!(
            "{} nodes, {} elements, {} DOFs, first mode {:.3} kHz",
            fea.nodes.len(),
            fea.elements.len(),
            sys.size(),
            fundamental_hz / 1e3
        ),
    );

    let ss = to_first_order(&sys).map_err(at("mor"))?;
    let red = reduce(&ss, opts.q, ReductionMode::ShiftInvert(0.0)).map_err(at("mor"))?;
    if let Some(d) = out {
        export_reduced(&red, &d.join("accel_q")).map_err(at("mor"))?;
    }
    report.push(
        "mor",
        format!(
            "N = {} reduced to q = {} (shift-invert at 0{})",
            ss.order(),
            red.order(),
            if red.breakdown { ", breakdown" } else { "" }
        ),
    );

    let options = SimOptions {
        axis: Axis::Z,
        ..SimOptions::default()
    };
    let probes = vec![
        Probe::Displacement(node.clone()),
        Probe::Velocity(node.clone()),
    ];
    let system = |m: Macromodel| -> Result<SimModel, DemoError> {
        build_sim_model(&n, &si, &stack, &[attach(m, &node, &n)], options)
            .and_then(|s| s.with_probes(probes.clone()))
            .map_err(at("system"))
    };
    let full_model = system(Macromodel::from(&ss))?;
    let reduced_model = system(Macromodel::from(&red))?;
    report.push(
        "system",
        format!(
            "full {} states, macromodel {} states, attached at {node}",
            full_model.state_count(),
            reduced_model.state_count()
        ),
    );

    let sources = vec![
        Source::force(
            &node,
            Waveform::Pulse {
                amplitude: opts.pulse,
                t_on: 0.0,
                t_off: opts.pulse_width,
            },
        ),
        Source::force(
            &node,
            Waveform::Sine {
                amplitude: opts.sine,
                frequency: opts.sine_hz,
                phase: 0.0,
            },
        ),
    ];
    // resolve the fundamental and the sine, stay inside RK4 stability
    let resolve = 1.0 / (50.0 * fundamental_hz.max(opts.sine_hz));
    let dt_for = |m: &SimModel| snap_dt(suggest_dt(m).min(resolve), opts.pulse_width);
    let dt_full = dt_for(&full_model);
    let dt_red = dt_for(&reduced_model);
    let full = transient(&full_model, &sources, opts.t_end, dt_full).map_err(at("transient"))?;
    let reduced =
        transient(&reduced_model, &sources, opts.t_end, dt_red).map_err(at("transient"))?;
    save(out, "accel_full.csv", &full.to_csv())?;
    save(out, "accel_reduced.csv", &reduced.to_csv())?;
    report.push(
        "transient",
        format!(
            "pulse {:e} N + sine {:e} N at {} Hz; full {} steps of {:.3e} s in {:.3} s, macromodel {} steps of {:.3e} s in {:.4} s",
            opts.pulse,
            opts.sine,
            opts.sine_hz,
            full.stats.steps,
            dt_full,
            full.stats.wall.as_secs_f64(),
            reduced.stats.steps,
            dt_red,
            reduced.stats.wall.as_secs_f64()
        ),
    );

    let comparison = compare_results(&reduced, &full).map_err(at("compare"))?;
    let errs: Vec<String> = comparison
        .probes
        .iter()
        .map(|p| format!("{} rel L2 {:.3e}", p.probe, p.relative_l2))
        .collect();
    report.push(
        "compare",
        format!("{}, speedup {:.1}x", errs.join(", "), comparison.wall_ratio),
    );

    let exact = if opts.exact_check {
        let all = reduce(&ss, ss.order(), ReductionMode::ShiftInvert(0.0)).map_err(at("exact"))?;
        let model = system(Macromodel::from(&all))?;
        let r = transient(&model, &sources, opts.t_end, dt_full).map_err(at("exact"))?;
        let c = compare_results(&r, &full).map_err(at("exact"))?;
        report.push(
            "exact",
            format!(
                "q = {} worst rel L2 {:.3e}",
                all.order(),
                c.worst_relative_l2()
            ),
        );
        Some(c)
    } else {
        None
    };

    Ok(AccelDemo {
        report,
        unrecognized: extracted.unrecognized.len(),
        full_states: full_model.state_count(),
        reduced_states: reduced_model.state_count(),
        fundamental_hz,
        full,
        reduced,
        comparison,
        exact,
    })
}
