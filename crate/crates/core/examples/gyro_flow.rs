//! System → solid → layout on the gyroscope, with a lumped AC sweep.
//! Pass a directory to keep the artifacts.

use std::path::PathBuf;

use memsflow::demo::gyro_demo;

fn main() {
    let out = std::env::args().nth(1).map(PathBuf::from);
    match gyro_demo(out.as_deref()) {
        Ok(g) => print!("{}", g.report),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
