use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::fsio::{read_text, write_atomic, BundleError};
use crate::mtx::{read_mtx, write_array};
use crate::units::format_f64;

use super::{ReducedModel, ReductionMode};

/// File name → contents: `Ar.mtx`, `br.mtx`, `cr.mtx`, `V.mtx`, `manifest.txt`.
pub fn reduced_files(r: &ReducedModel) -> Vec<(&'static str, String)> {
    let mut manifest = String::from("reduced-model 1\n");
    let _ = writeln!(manifest, "q {}", r.order());
    let _ = writeln!(manifest, "outputs {}", r.c_r.nrows());
    let _ = writeln!(manifest, "source_order {}", r.source_order);
    match r.mode {
        ReductionMode::Direct => manifest.push_str("mode direct\n"),
        ReductionMode::ShiftInvert(s0) => {
            manifest.push_str("mode shift_invert\n");
            let _ = writeln!(manifest, "s0 {}", format_f64(s0));
        }
    }
    let _ = writeln!(manifest, "breakdown {}", r.breakdown);
    for (i, (node, d)) in r.dof_map.iter().flatten().enumerate() {
        let _ = writeln!(manifest, "dof {i} {node} {d}");
    }
    vec![
        ("Ar.mtx", write_array(&r.a_r)),
        (
            "br.mtx",
            write_array(&DMatrix::from_column_slice(
                r.b_r.len(),
                1,
                r.b_r.as_slice(),
            )),
        ),
        ("cr.mtx", write_array(&r.c_r)),
        ("V.mtx", write_array(&r.v)),
        ("manifest.txt", manifest),
    ]
}

pub fn export_reduced(r: &ReducedModel, dir: &Path) -> Result<(), BundleError> {
    std::fs::create_dir_all(dir).map_err(|e| BundleError::Io(dir.to_path_buf(), e.to_string()))?;
    for (name, text) in reduced_files(r) {
        write_atomic(&dir.join(name), &text)?;
    }
    Ok(())
}

pub fn import_reduced(dir: &Path) -> Result<ReducedModel, BundleError> {
    let load = |name: &str| -> Result<DMatrix<f64>, BundleError> {
        let path = dir.join(name);
        read_mtx(&read_text(&path)?).map_err(|e| BundleError::Format(path, e.to_string()))
    };
    let path = dir.join("manifest.txt");
    let manifest = read_text(&path)?;
    let bad = |m: &str| BundleError::Format(path.clone(), m.to_string());
    let mut lines = manifest.lines();
    if lines.next() != Some("reduced-model 1") {
        return Err(bad("expected `reduced-model 1` header"));
    }
    let (mut q, mut mode, mut s0, mut breakdown, mut source_order) = (None, None, None, false, 0);
    let mut dof_map = Vec::new();
    for l in lines {
        let (key, value) = l
            .split_once(' ')
            .ok_or_else(|| bad("expected `key value`"))?;
        match key {
            "q" => q = Some(value.parse::<usize>().map_err(|_| bad("bad q"))?),
            "outputs" => {}
            "source_order" => source_order = value.parse().map_err(|_| bad("bad source_order"))?,
            "mode" => mode = Some(value.to_string()),
            "s0" => s0 = Some(value.parse::<f64>().map_err(|_| bad("bad s0"))?),
            "breakdown" => breakdown = value == "true",
            "dof" => {
                let t: Vec<&str> = value.split_whitespace().collect();
                let [_, node, d] = t[..] else {
                    return Err(bad("dof line needs three fields"));
                };
                dof_map.push((
                    node.parse().map_err(|_| bad("bad node"))?,
                    d.parse().map_err(|_| bad("bad dof"))?,
                ));
            }
            _ => return Err(bad(&format!("unknown key `{key}`"))),
        }
    }
    let mode = match (mode.as_deref(), s0) {
        (Some("direct"), _) => ReductionMode::Direct,
        (Some("shift_invert"), Some(s0)) => ReductionMode::ShiftInvert(s0),
        _ => return Err(bad("mode missing or shift_invert without s0")),
    };
    let a_r = load("Ar.mtx")?;
    let b = load("br.mtx")?;
    let c_r = load("cr.mtx")?;
    let v = load("V.mtx")?;
    let q = q.ok_or_else(|| bad("missing q"))?;
    if a_r.shape() != (q, q) || b.shape() != (q, 1) || c_r.ncols() != q || v.ncols() != q {
        return Err(bad("matrix dimensions disagree with q"));
    }
    Ok(ReducedModel {
        a_r,
        b_r: b.column(0).into_owned(),
        c_r,
        v,
        mode,
        breakdown,
        source_order,
        dof_map: (!dof_map.is_empty()).then_some(dof_map),
    })
}
