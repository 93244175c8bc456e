use std::fmt::Write as _;
use std::path::Path;

use crate::fsio::{read_text, write_atomic, BundleError};
use crate::mtx::{read_mtx, write_array, write_coordinate};

use super::SystemMatrices;

pub const SYSTEM_FILES: [&str; 6] = ["M.mtx", "K.mtx", "Cd.mtx", "B.mtx", "C.mtx", "manifest.txt"];

/// File name → contents for the Matrix Market export of `sys`.
pub fn system_files(sys: &SystemMatrices) -> Vec<(&'static str, String)> {
    let mut manifest = String::from("fea-system 1\n");
    let _ = writeln!(manifest, "dofs {}", sys.size());
    let _ = writeln!(manifest, "inputs {}", sys.b_load.ncols());
    let _ = writeln!(manifest, "outputs {}", sys.c_out.nrows());
    manifest.push_str("units M=kg K=N/m Cd=N*s/m B=1 C=1\n");
    for (i, (node, d)) in sys.dof_map.iter().enumerate() {
        let _ = writeln!(manifest, "dof {i} {node} {d}");
    }
    vec![
        ("M.mtx", write_coordinate(&sys.m)),
        ("K.mtx", write_coordinate(&sys.k)),
        ("Cd.mtx", write_coordinate(&sys.cd)),
        ("B.mtx", write_array(&sys.b_load)),
        ("C.mtx", write_array(&sys.c_out)),
        ("manifest.txt", manifest),
    ]
}

pub fn export_system(sys: &SystemMatrices, dir: &Path) -> Result<(), BundleError> {
    std::fs::create_dir_all(dir).map_err(|e| BundleError::Io(dir.to_path_buf(), e.to_string()))?;
    for (name, text) in system_files(sys) {
        write_atomic(&dir.join(name), &text)?;
    }
    Ok(())
}

pub fn import_system(dir: &Path) -> Result<SystemMatrices, BundleError> {
    let load = |name: &str| -> Result<_, BundleError> {
        let path = dir.join(name);
        read_mtx(&read_text(&path)?).map_err(|e| BundleError::Format(path, e.to_string()))
    };
    let manifest_path = dir.join("manifest.txt");
    let manifest = read_text(&manifest_path)?;
    let bad = |m: &str| BundleError::Format(manifest_path.clone(), m.to_string());
    if manifest.lines().next() != Some("fea-system 1") {
        return Err(bad("expected `fea-system 1` header"));
    }
    let mut dof_map = Vec::new();
    for l in manifest.lines() {
        if let Some(rest) = l.strip_prefix("dof ") {
            let t: Vec<&str> = rest.split_whitespace().collect();
            let [i, node, d] = t[..] else {
                return Err(bad("dof line needs three fields"));
            };
            let (i, node, d): (usize, usize, u8) = (
                i.parse().map_err(|_| bad("bad dof index"))?,
                node.parse().map_err(|_| bad("bad node"))?,
                d.parse().map_err(|_| bad("bad dof"))?,
            );
            if i != dof_map.len() {
                return Err(bad("dof lines out of order"));
            }
            dof_map.push((node, d));
        }
    }
    let sys = SystemMatrices {
        m: load("M.mtx")?,
        k: load("K.mtx")?,
        cd: load("Cd.mtx")?,
        b_load: load("B.mtx")?,
        c_out: load("C.mtx")?,
        dof_map,
    };
    let n = sys.size();
    let shapes_ok = [&sys.m, &sys.k, &sys.cd]
        .iter()
        .all(|a| a.shape() == (n, n))
        && sys.b_load.nrows() == n
        && sys.c_out.ncols() == n;
    if !shapes_ok {
        return Err(bad("matrix dimensions disagree with the dof list"));
    }
    Ok(sys)
}
