//! Certainty index of every node by the three routes.
//!
//! Usage: cargo run --example analyze_graph [graph.json]
//! Without an argument the bundled five-node reference graph (fixtures/fig1.json) is used.

use std::path::PathBuf;

use node_certainty::certainty::{certainty_routes, ModelParams};
use node_certainty::cli::load_graph;
use node_certainty::graph::classify;
use node_certainty::tolerance::Tolerances;

fn main() -> node_certainty::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/fig1.json"));
    let (_, g) = load_graph(&path)?;
    let tol = Tolerances::default();
    let profile = classify(&g, tol.normality);
    println!(
        "{} nodes, {} arcs; balanced {}, strongly connected {}, normal {}",
        g.node_count(),
        g.edges().len(),
        profile.balanced,
        profile.strongly_connected,
        profile.normal_laplacian
    );

    let params = ModelParams::default();
    for (route, report) in certainty_routes(&g, &params, &tol) {
        match report {
            Ok(r) => {
                let mu: Vec<String> = r.mu_values().iter().map(|m| format!("{m:.4}")).collect();
                println!("{:>14}: mu = [{}]", route.as_str(), mu.join(", "));
            }
            Err(e) => println!("{:>14}: not applicable ({e})", route.as_str()),
        }
    }
    Ok(())
}
