//! Command-line driver: one subcommand per flow edge, plus the verifier and
//! the two demos.
//!
//! Exit status: 0 on success, 2 for usage or input parse errors, 3 for flow
//! errors, 4 for I/O errors. Failures print one `error: <class>: ...` line
//! to standard error.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::demo::{accel_demo, gyro_demo, AccelOptions};
use crate::fea::{assemble, build_fea_model, export_system, import_system, Dof, Plane};
use crate::flows::{
    layout_to_netlist, layout_to_solid, netlist_to_layout, netlist_to_solid, solid_to_layout,
    ExtractionRules,
};
use crate::fsio::{read_text, write_atomic, BundleError};
use crate::geometry::{
    emit_cif, emit_esm, parse_cif, parse_esm, polygon_set_equal, Layout, ProcessStack,
};
use crate::mor::{export_reduced, import_reduced, reduce, to_first_order, ReductionMode};
use crate::schematic::{parse_netlist, serialize_netlist, Geometry, Material, Netlist};
use crate::sim::{
    build_sim_model, frequency_response, suggest_dt, transient, AcInput, Macromodel,
    MacromodelAttachment, Probe, RunConfig, SimModel, SimOptions,
};
use crate::units::format_f64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Parse { path: PathBuf, message: String },
    Flow { stage: String, message: String },
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Flow { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: usage: {m}"),
            CliError::Parse { path, message } => {
                write!(f, "error: parse: {}: {message}", path.display())
            }
            CliError::Flow { stage, message } => write!(f, "error: flow: {stage}: {message}"),
            CliError::Io { path, message } => {
                write!(f, "error: io: {} ({message})", path.display())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        match e {
            BundleError::Io(path, message) => CliError::Io { path, message },
            BundleError::Format(path, message) => CliError::Parse { path, message },
        }
    }
}

fn flow<E: fmt::Display>(stage: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Flow {
        stage: stage.to_string(),
        message: e.to_string(),
    }
}

fn parse_err<E: fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "memsflow",
    version,
    about = "MEMS design flows between netlist, solid model and layout"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Stack file, positional or as `--stack`.
#[derive(Debug, Args)]
pub struct StackArg {
    #[arg(value_name = "STACK")]
    stack_pos: Option<PathBuf>,
    #[arg(long = "stack", value_name = "PATH")]
    stack: Option<PathBuf>,
}

impl StackArg {
    fn path(&self) -> Result<&Path, CliError> {
        match (&self.stack_pos, &self.stack) {
            (Some(_), Some(_)) => Err(CliError::Usage("stack given twice".into())),
            (Some(p), None) | (None, Some(p)) => Ok(p),
            (None, None) => Err(CliError::Usage("a process stack file is required".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Netlist to CIF layout.
    SynthLayout {
        netlist: PathBuf,
        #[command(flatten)]
        stack: StackArg,
        #[arg(short)]
        o: PathBuf,
    },
    /// Netlist to ESM solid model.
    SynthSolid {
        netlist: PathBuf,
        #[command(flatten)]
        stack: StackArg,
        #[arg(short)]
        o: PathBuf,
    },
    /// ESM solid model to CIF layout.
    #[command(name = "solid2layout")]
    SolidToLayout {
        solid: PathBuf,
        #[command(flatten)]
        stack: StackArg,
        #[arg(short)]
        o: PathBuf,
    },
    /// CIF layout to ESM solid model.
    #[command(name = "layout2solid")]
    LayoutToSolid {
        layout: PathBuf,
        #[command(flatten)]
        stack: StackArg,
        #[arg(short)]
        o: PathBuf,
    },
    /// CIF layout to netlist.
    Extract {
        layout: PathBuf,
        #[command(flatten)]
        stack: StackArg,
        #[arg(short)]
        o: PathBuf,
        /// key=value extraction rules.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Beam FEA of a netlist, written as a Matrix Market bundle.
    FeaAssemble {
        netlist: PathBuf,
        #[command(flatten)]
        stack: StackArg,
        #[arg(short)]
        o: PathBuf,
        #[arg(long, default_value_t = 1)]
        refine: usize,
        /// in, out or full.
        #[arg(long, default_value = "full")]
        plane: String,
        /// node:dof load; defaults to the largest mass along uz (ux in-plane).
        #[arg(long)]
        input: Option<String>,
        /// node:dof output; defaults to the input.
        #[arg(long)]
        output: Option<String>,
    },
    /// Arnoldi reduction of an FEA bundle.
    MorReduce {
        fea: PathBuf,
        #[arg(short)]
        o: PathBuf,
        #[arg(long, default_value_t = 10)]
        q: usize,
        /// direct or shift:<s0>.
        #[arg(long, default_value = "shift:0")]
        mode: String,
    },
    /// RK4 transient from a run file, written as CSV.
    SimTransient {
        config: PathBuf,
        #[arg(short)]
        o: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        tend: Option<f64>,
    },
    /// Small-signal frequency sweep from a run file, written as CSV.
    SimAc {
        config: PathBuf,
        #[arg(short)]
        o: PathBuf,
        /// force:<node> or voltage:<comb>:<bias>.
        #[arg(long)]
        input: String,
        #[arg(long)]
        probe: String,
        #[arg(long)]
        fstart: f64,
        #[arg(long)]
        fstop: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Checks netlist→layout against netlist→solid→layout per layer.
    VerifyTriangle {
        netlist: PathBuf,
        #[command(flatten)]
        stack: StackArg,
    },
    /// Gyroscope flow on the bundled fixture.
    DemoGyro {
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Accelerometer flow on the bundled fixture.
    DemoAccel {
        #[arg(short)]
        o: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        refine: usize,
        /// Also run the full-order reduction.
        #[arg(long)]
        exact: bool,
    },
}

/// Parses `args` (program name first), runs, prints, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    Ok(read_text(path)?)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    Ok(write_atomic(path, text)?)
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn same_path(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn distinct(output: &Path, inputs: &[&Path]) -> Result<(), CliError> {
    match inputs.iter().find(|i| same_path(output, i)) {
        Some(i) => Err(CliError::Usage(format!(
            "output {} would overwrite an input",
            i.display()
        ))),
        None => Ok(()),
    }
}

fn load_stack(path: &Path) -> Result<ProcessStack, CliError> {
    ProcessStack::parse(&read(path)?).map_err(parse_err(path))
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    parse_netlist(&read(path)?).map_err(parse_err(path))
}

fn load_layout(path: &Path) -> Result<Layout, CliError> {
    parse_cif(&read(path)?).map_err(parse_err(path))
}

/// Material of the topmost stack layer as declared in the netlist.
fn structural_material(n: &Netlist, stack: &ProcessStack) -> Material {
    stack
        .layers()
        .iter()
        .max_by_key(|l| l.z1())
        .and_then(|l| n.material(&l.material))
        .cloned()
        .unwrap_or_else(Material::silicon)
}

fn largest_mass(n: &Netlist) -> Option<String> {
    n.instances
        .iter()
        .filter_map(|i| match i.geometry {
            Geometry::RigidMass { width, height } => Some((width * height, i.nodes[0].clone())),
            _ => None,
        })
        .max_by_key(|(a, _)| *a)
        .map(|(_, node)| node)
}

const DOF_NAMES: [&str; 6] = ["ux", "uy", "uz", "rx", "ry", "rz"];

fn parse_node_dof(s: &str) -> Result<(String, Dof), CliError> {
    let (node, dof) = s
        .rsplit_once(':')
        .ok_or_else(|| CliError::Usage(format!("expected node:dof, got `{s}`")))?;
    let d = DOF_NAMES
        .iter()
        .position(|n| *n == dof)
        .ok_or_else(|| CliError::Usage(format!("unknown dof `{dof}`")))?;
    Ok((node.to_string(), d as Dof))
}

fn parse_ac_input(s: &str) -> Result<AcInput, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "expected force:<node> or voltage:<comb>:<bias>, got `{s}`"
        ))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        ["force", node] => Ok(AcInput::Force(node.to_string())),
        ["voltage", comb, bias] => Ok(AcInput::Voltage {
            comb: comb.to_string(),
            bias: bias.parse().map_err(|_| bad())?,
        }),
        _ => Err(bad()),
    }
}

fn count_summary(n: &Netlist) -> String {
    let parts: Vec<String> = n
        .count_by_kind()
        .iter()
        .map(|(k, c)| format!("{c} {}", k.keyword()))
        .collect();
    format!("{} instances ({})", n.instances.len(), parts.join(", "))
}

fn layout_summary(l: &Layout) -> String {
    let parts: Vec<String> = l
        .layers()
        .map(|name| format!("{name}={}", l.layer(name).len()))
        .collect();
    format!("{} shapes ({})", l.shape_count(), parts.join(", "))
}

struct SimSetup {
    config: RunConfig,
    model: SimModel,
}

fn load_sim(config: &Path) -> Result<SimSetup, CliError> {
    let base = config.parent().unwrap_or(Path::new("."));
    let cfg = RunConfig::parse(&read(config)?, base).map_err(parse_err(config))?;
    let n = load_netlist(&cfg.netlist)?;
    let stack = load_stack(&cfg.stack)?;
    let material = match &cfg.material {
        Some(name) => n.material(name).cloned().ok_or_else(|| CliError::Parse {
            path: config.to_path_buf(),
            message: format!("netlist has no material `{name}`"),
        })?,
        None => structural_material(&n, &stack),
    };
    let mut attachments = Vec::new();
    for m in &cfg.macromodels {
        let r = import_reduced(&m.dir)?;
        attachments.push(MacromodelAttachment {
            model: Macromodel::from(&r),
            node: m.node.clone(),
            covers: m.covers.clone(),
        });
    }
    let options = SimOptions {
        axis: cfg.axis,
        alpha: cfg.alpha,
        beta: cfg.beta,
    };
    let mut model =
        build_sim_model(&n, &material, &stack, &attachments, options).map_err(flow("system"))?;
    if !cfg.probes.is_empty() {
        model = model
            .with_probes(cfg.probes.clone())
            .map_err(flow("system"))?;
    }
    Ok(SimSetup { config: cfg, model })
}

/// Runs one command and returns its stdout summary.
pub fn run(cmd: &Command) -> Result<String, CliError> {
    match cmd {
        Command::SynthLayout { netlist, stack, o } => {
            let sp = stack.path()?;
            distinct(o, &[netlist, sp])?;
            let (n, s) = (load_netlist(netlist)?, load_stack(sp)?);
            let l = netlist_to_layout(&n, &s).map_err(flow("synth-layout"))?;
            write(o, &emit_cif(&l).map_err(flow("synth-layout"))?)?;
            Ok(format!(
                "synth-layout: {} -> {}",
                count_summary(&n),
                layout_summary(&l)
            ))
        }
        Command::SynthSolid { netlist, stack, o } => {
            let sp = stack.path()?;
            distinct(o, &[netlist, sp])?;
            let (n, s) = (load_netlist(netlist)?, load_stack(sp)?);
            let solid = netlist_to_solid(&n, &s).map_err(flow("synth-solid"))?;
            write(o, &emit_esm(&solid))?;
            Ok(format!(
                "synth-solid: {} -> {} prisms",
                count_summary(&n),
                solid.len()
            ))
        }
        Command::SolidToLayout { solid, stack, o } => {
            let sp = stack.path()?;
            distinct(o, &[solid, sp])?;
            let m = parse_esm(&read(solid)?).map_err(parse_err(solid))?;
            let s = load_stack(sp)?;
            let l = solid_to_layout(&m, &s).map_err(flow("solid2layout"))?;
            write(o, &emit_cif(&l).map_err(flow("solid2layout"))?)?;
            Ok(format!(
                "solid2layout: {} prisms -> {}",
                m.len(),
                layout_summary(&l)
            ))
        }
        Command::LayoutToSolid { layout, stack, o } => {
            let sp = stack.path()?;
            distinct(o, &[layout, sp])?;
            let (l, s) = (load_layout(layout)?, load_stack(sp)?);
            let m = layout_to_solid(&l, &s).map_err(flow("layout2solid"))?;
            write(o, &emit_esm(&m))?;
            Ok(format!(
                "layout2solid: {} -> {} prisms",
                layout_summary(&l),
                m.len()
            ))
        }
        Command::Extract {
            layout,
            stack,
            o,
            rules,
        } => {
            let sp = stack.path()?;
            let mut inputs = vec![layout.as_path(), sp];
            inputs.extend(rules.as_deref());
            distinct(o, &inputs)?;
            let (l, s) = (load_layout(layout)?, load_stack(sp)?);
            let rules = match rules {
                Some(p) => ExtractionRules::parse(&read(p)?).map_err(parse_err(p))?,
                None => ExtractionRules::default(),
            };
            let r = layout_to_netlist(&l, &s, &rules).map_err(flow("extract"))?;
            write(o, &serialize_netlist(&r.recognized))?;
            Ok(format!(
                "extract: {}, {} unrecognized",
                count_summary(&r.recognized),
                r.unrecognized.len()
            ))
        }
        Command::FeaAssemble {
            netlist,
            stack,
            o,
            refine,
            plane,
            input,
            output,
        } => {
            let sp = stack.path()?;
            distinct(o, &[netlist, sp])?;
            let plane = match plane.as_str() {
                "in" => Some(Plane::InPlane),
                "out" => Some(Plane::OutOfPlane),
                "full" => None,
                p => {
                    return Err(CliError::Usage(format!(
                        "plane must be in, out or full, got `{p}`"
                    )))
                }
            };
            let (n, s) = (load_netlist(netlist)?, load_stack(sp)?);
            let (in_node, in_dof) = match input {
                Some(t) => parse_node_dof(t)?,
                None => {
                    let node = largest_mass(&n).ok_or_else(|| {
                        CliError::Usage("netlist has no rigid mass; pass --input".into())
                    })?;
                    (node, if plane == Some(Plane::InPlane) { 0 } else { 2 })
                }
            };
            let (out_node, out_dof) = match output {
                Some(t) => parse_node_dof(t)?,
                None => (in_node.clone(), in_dof),
            };
            let mut fea = build_fea_model(&n, &structural_material(&n, &s), &s, *refine)
                .map_err(flow("fea"))?;
            if let Some(p) = plane {
                fea.constrain_plane(p);
            }
            let i = fea.node(&in_node).map_err(flow("fea"))?;
            let j = fea.node(&out_node).map_err(flow("fea"))?;
            let sys = assemble(&fea, &[(i, in_dof, 1.0)], &[(j, out_dof)]).map_err(flow("fea"))?;
            create_dir(o)?;
            export_system(&sys, o)?;
            Ok(format!(
                "fea-assemble: {} nodes, {} elements, {} DOFs, input {in_node}:{}, output {out_node}:{}",
                fea.nodes.len(),
                fea.elements.len(),
                sys.size(),
                DOF_NAMES[in_dof as usize],
                DOF_NAMES[out_dof as usize]
            ))
        }
        Command::MorReduce { fea, o, q, mode } => {
            distinct(o, &[fea])?;
            let mode = ReductionMode::from_str(mode).map_err(CliError::Usage)?;
            let sys = import_system(fea)?;
            let ss = to_first_order(&sys).map_err(flow("mor"))?;
            let q = (*q).min(ss.order());
            let r = reduce(&ss, q, mode).map_err(flow("mor"))?;
            create_dir(o)?;
            export_reduced(&r, o)?;
            Ok(format!(
                "mor-reduce: N = {} -> q = {} ({mode}{})",
                ss.order(),
                r.order(),
                if r.breakdown { ", breakdown" } else { "" }
            ))
        }
        Command::SimTransient {
            config,
            o,
            dt,
            tend,
        } => {
            distinct(o, &[config])?;
            let setup = load_sim(config)?;
            let t_end = tend.or(setup.config.t_end).ok_or_else(|| CliError::Parse {
                path: config.to_path_buf(),
                message: "missing `t_end`".into(),
            })?;
            let dt = match dt.or(setup.config.dt) {
                Some(dt) => dt,
                // stable, at least 1000 steps, and landing on t_end
                None => {
                    let dt = suggest_dt(&setup.model).min(t_end / 1000.0);
                    t_end / (t_end / dt).ceil()
                }
            };
            let r = transient(&setup.model, &setup.config.sources, t_end, dt)
                .map_err(flow("transient"))?;
            write(o, &r.to_csv())?;
            Ok(format!(
                "sim-transient: {} states, {} steps of {dt:e} s, {} probes, {:.3} ms",
                setup.model.state_count(),
                r.stats.steps,
                r.signals.len(),
                r.stats.wall.as_secs_f64() * 1e3
            ))
        }
        Command::SimAc {
            config,
            o,
            input,
            probe,
            fstart,
            fstop,
            points,
        } => {
            distinct(o, &[config])?;
            let input = parse_ac_input(input)?;
            let probe = Probe::from_str(probe).map_err(|e| CliError::Usage(e.to_string()))?;
            if !(*fstart > 0.0 && fstop > fstart && *points >= 2) {
                return Err(CliError::Usage(
                    "need 0 < fstart < fstop and points >= 2".into(),
                ));
            }
            let setup = load_sim(config)?;
            let ratio = (fstop / fstart).powf(1.0 / (*points - 1) as f64);
            let freqs: Vec<f64> = (0..*points)
                .map(|i| fstart * ratio.powi(i as i32))
                .collect();
            let h = frequency_response(&setup.model, &input, &probe, &freqs).map_err(flow("ac"))?;
            let mut csv = String::from("f,re,im,mag\n");
            let mut singular = 0;
            for (f, v) in freqs.iter().zip(&h) {
                let (re, im, mag) = match v {
                    Ok(c) => (c.re, c.im, c.norm()),
                    Err(_) => {
                        singular += 1;
                        (f64::NAN, f64::NAN, f64::NAN)
                    }
                };
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    format_f64(*f),
                    format_f64(re),
                    format_f64(im),
                    format_f64(mag)
                ));
            }
            write(o, &csv)?;
            let peak = freqs
                .iter()
                .zip(&h)
                .filter_map(|(f, v)| v.as_ref().ok().map(|c| (*f, c.norm())))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            Ok(format!(
                "sim-ac: {} points, {singular} singular, peak {}",
                freqs.len(),
                peak.map_or("none".into(), |(f, m)| format!("{m:e} at {f:.1} Hz"))
            ))
        }
        Command::VerifyTriangle { netlist, stack } => {
            let (n, s) = (load_netlist(netlist)?, load_stack(stack.path()?)?);
            let direct = netlist_to_layout(&n, &s).map_err(flow("triangle"))?;
            let solid = netlist_to_solid(&n, &s).map_err(flow("triangle"))?;
            let via = solid_to_layout(&solid, &s).map_err(flow("triangle"))?;
            let mut layers: Vec<&str> = direct.layers().chain(via.layers()).collect();
            layers.sort_unstable();
            layers.dedup();
            let mut parts = Vec::new();
            let mut bad = Vec::new();
            for name in layers {
                let ok = polygon_set_equal(direct.layer(name), via.layer(name));
                parts.push(format!("{name} {}", if ok { "equal" } else { "DIFFER" }));
                if !ok {
                    bad.push(name);
                }
            }
            if bad.is_empty() {
                Ok(format!("verify-triangle: ok, {}", parts.join(", ")))
            } else {
                Err(CliError::Flow {
                    stage: "triangle".into(),
                    message: format!("layers differ: {}", bad.join(", ")),
                })
            }
        }
        Command::DemoGyro { o } => {
            if let Some(d) = o {
                create_dir(d)?;
            }
            let g = gyro_demo(o.as_deref()).map_err(|e| CliError::Flow {
                stage: e.stage.to_string(),
                message: e.message,
            })?;
            Ok(g.report.to_string())
        }
        Command::DemoAccel {
            o,
            q,
            refine,
            exact,
        } => {
            if let Some(d) = o {
                create_dir(d)?;
            }
            let opts = AccelOptions {
                q: *q,
                refine: *refine,
                exact_check: *exact,
                ..AccelOptions::default()
            };
            let a = accel_demo(&opts, o.as_deref()).map_err(|e| CliError::Flow {
                stage: e.stage.to_string(),
                message: e.message,
            })?;
            Ok(a.report.to_string())
        }
    }
}
