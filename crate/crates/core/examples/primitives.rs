//! Writes the synthetic three-class mesh dataset used by the test suite.
//!
//! `cargo run -p viewfuse --example primitives -- <root> [per_class] [seed]`

use std::path::PathBuf;
use std::process::ExitCode;

use viewfuse::harness::synthetic::write_primitive_dataset;

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let Some(root) = args.next().map(PathBuf::from) else {
        eprintln!("usage: primitives <root> [per_class] [seed]");
        return ExitCode::from(2);
    };
    let per_class = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    match write_primitive_dataset(&root, "test", per_class, seed) {
        Ok(()) => {
            println!("wrote {} objects under {}", 3 * per_class, root.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
