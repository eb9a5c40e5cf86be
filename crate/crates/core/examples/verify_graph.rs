//! Runs the `verify` invariant checks through the library entry point.
//!
//! Usage: cargo run --example verify_graph [graph.json]

use clap::Parser;
use node_certainty::cli::{main_with, Cli};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig1.json").to_owned());
    let cli = Cli::parse_from(["node-certainty", "--format", "csv", "verify", &path]);
    std::process::exit(main_with(&cli));
}
