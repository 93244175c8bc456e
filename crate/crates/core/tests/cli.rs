use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn memsflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_memsflow"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn synth_layout_matches_golden_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.cif"), dir.path().join("b.cif"));
    let net = fixture("gyro.net");
    let before = fs::read(&net).unwrap();
    for out in [&a, &b] {
        let o = memsflow(&[
            "synth-layout",
            s(&net),
            s(&fixture("soi.stack")),
            "-o",
            s(out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("38 instances"));
    }
    let golden = include_str!("golden/gyro.cif");
    assert_eq!(fs::read_to_string(&a).unwrap(), golden);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&net).unwrap(), before);
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.net");
    let o = memsflow(&[
        "synth-solid",
        s(&missing),
        "--stack",
        s(&fixture("soi.stack")),
        "-o",
        s(&dir.path().join("x.esm")),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(
        stderr(&o).starts_with(&format!("error: io: {}", missing.display())),
        "{}",
        stderr(&o)
    );
    assert!(!dir.path().join("x.esm").exists());
}

#[test]
fn parse_usage_and_flow_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let stack = fixture("soi.stack");
    let bad = dir.path().join("bad.net");
    fs::write(
        &bad,
        "process \"soi\"\nmass m1 node=(a) w=oops h=1u pos=(0,0) layer=STRUCT\n",
    )
    .unwrap();
    let o = memsflow(&[
        "synth-layout",
        s(&bad),
        s(&stack),
        "-o",
        s(&dir.path().join("o.cif")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: parse: "));

    let metal = dir.path().join("metal.net");
    fs::write(
        &metal,
        "process \"soi\"\nmass m1 node=(a) w=10u h=10u pos=(0,0) layer=METAL\n",
    )
    .unwrap();
    let o = memsflow(&[
        "synth-layout",
        s(&metal),
        s(&stack),
        "-o",
        s(&dir.path().join("o.cif")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(
        stderr(&o).starts_with("error: flow: synth-layout: "),
        "{}",
        stderr(&o)
    );

    let net = fixture("gyro.net");
    let o = memsflow(&["synth-layout", s(&net), s(&stack), "-o", s(&net)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(memsflow(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        memsflow(&["synth-layout", s(&net), "-o", "x.cif"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_triangle_reports_layers() {
    let o = memsflow(&[
        "verify-triangle",
        s(&fixture("gyro.net")),
        s(&fixture("soi.stack")),
    ]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "verify-triangle: ok, ANCHOR equal, STRUCT equal\n"
    );
}

#[test]
fn layout_to_system_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stack = fixture("soi.stack");
    let run = |args: &[&str]| {
        let o = memsflow(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    run(&[
        "layout2solid",
        s(&fixture("accel.cif")),
        s(&stack),
        "-o",
        s(&d.join("a.esm")),
    ]);
    run(&[
        "solid2layout",
        s(&d.join("a.esm")),
        s(&stack),
        "-o",
        s(&d.join("a.cif")),
    ]);
    let rules = d.join("rules.txt");
    fs::write(&rules, "beam_max_width = 5u\ncomb_min_fingers = 3\n").unwrap();
    let out = run(&[
        "extract",
        s(&d.join("a.cif")),
        s(&stack),
        "-o",
        s(&d.join("accel.net")),
        "--rules",
        s(&rules),
    ]);
    assert!(out.contains("0 unrecognized"), "{out}");
    let out = run(&[
        "fea-assemble",
        s(&d.join("accel.net")),
        s(&stack),
        "-o",
        s(&d.join("fea")),
        "--plane",
        "out",
    ]);
    assert!(out.contains("111 DOFs"), "{out}");
    let out = run(&[
        "mor-reduce",
        s(&d.join("fea")),
        "-o",
        s(&d.join("red")),
        "--q",
        "8",
    ]);
    assert!(out.contains("N = 222 -> q = 8"), "{out}");

    // macromodel for every moving part, on the proof mass
    let net = fs::read_to_string(d.join("accel.net")).unwrap();
    let covers: Vec<&str> = net
        .lines()
        .filter(|l| l.starts_with("mass ") || l.starts_with("beam "))
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    let node = largest_mass_node(&net);
    fs::copy(&stack, d.join("soi.stack")).unwrap();
    fs::write(
        d.join("accel.run"),
        format!(
            "netlist = accel.net\nstack = soi.stack\naxis = z\nt_end = 1e-3\n\
             source = force {node} pulse 1e-7 0 2e-4\nprobe = x({node})\n\
             macromodel = red node={node} covers={}\n",
            covers.join(",")
        ),
    )
    .unwrap();
    let csv = d.join("x.csv");
    let out = run(&["sim-transient", s(&d.join("accel.run")), "-o", s(&csv)]);
    assert!(out.contains("8 states"), "{out}");
    let first = fs::read(&csv).unwrap();
    run(&["sim-transient", s(&d.join("accel.run")), "-o", s(&csv)]);
    assert_eq!(fs::read(&csv).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with(&format!("t,x({node})\n")));

    let ac = d.join("ac.csv");
    let out = run(&[
        "sim-ac",
        s(&d.join("accel.run")),
        "-o",
        s(&ac),
        "--input",
        &format!("force:{node}"),
        "--probe",
        &format!("x({node})"),
        "--fstart",
        "100",
        "--fstop",
        "10000",
        "--points",
        "41",
    ]);
    assert!(out.contains("41 points, 0 singular"), "{out}");
    assert_eq!(fs::read_to_string(&ac).unwrap().lines().count(), 42);
}

/// The netlist node of the largest mass, which fea-assemble drives by default.
fn largest_mass_node(net: &str) -> String {
    net.lines()
        .filter(|l| l.starts_with("mass "))
        .max_by_key(|l| {
            let get = |k: &str| -> f64 {
                let v = l
                    .split_whitespace()
                    .find_map(|t| t.strip_prefix(k))
                    .unwrap();
                v.trim_end_matches('u').parse().unwrap()
            };
            (get("w=") * get("h=")) as i64
        })
        .and_then(|l| l.split_once("node=("))
        .map(|(_, r)| r.split(')').next().unwrap().to_string())
        .unwrap()
}

#[test]
fn demo_gyro_stage_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = memsflow(&["demo-gyro", "-o", s(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stages: Vec<String> = String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| l[1..l.find(']').unwrap()].to_string())
        .collect();
    assert_eq!(stages, ["netlist", "solid", "layout", "triangle", "ac"]);
    for f in ["gyro.net", "gyro.esm", "gyro.cif", "gyro_ac.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}
