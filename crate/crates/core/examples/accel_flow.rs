//! Layout → solid → system on the accelerometer: extraction, FEA, a q = 10
//! macromodel, and its transient against the full model.

use std::path::PathBuf;

use memsflow::demo::{accel_demo, AccelOptions};

fn main() {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let opts = AccelOptions {
        exact_check: true,
        ..AccelOptions::default()
    };
    match accel_demo(&opts, out.as_deref()) {
        Ok(a) => {
            print!("{}", a.report);
            println!(
                "reduced {} of {} states, worst rel L2 {:.2e}",
                a.reduced_states,
                a.full_states,
                a.comparison.worst_relative_l2()
            );
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    }
}
