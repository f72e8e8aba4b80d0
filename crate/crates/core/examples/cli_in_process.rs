//! Drive the command line from code: every instance file shipped with the
//! examples, solved in one batch.
//!
//!     cargo run --example cli_in_process

use std::path::Path;

fn main() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = uqcone::cli::run(["uqcone", "batch", data.to_str().unwrap()], &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
    println!("exit code {code}");

    let one = data.join("example1.json");
    let mut out = Vec::new();
    uqcone::cli::run(["uqcone", "solve", one.to_str().unwrap(), "--report-format", "structured"], &mut out, &mut err);
    let report: serde_json::Value = serde_json::from_slice(&out).expect("structured output is JSON");
    println!("example1 relaxation value: {}", report["result"]["relaxation"]["value"]);
}
