//! Node variances over time for a directed graph, against the bounds
//! sigma^2 t / n and sigma^2 t.
//!
//! Usage: cargo run --example variance_curves

use node_certainty::certainty::{covariance_trajectory, variance_envelope, Integrator, ModelParams};
use node_certainty::graph::{classify, laplacian, WeightedDigraph};

fn main() -> node_certainty::Result<()> {
    // A directed cycle with one chord: strongly connected, not balanced.
    let g = WeightedDigraph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0), (0, 2, 2.0)])?;
    let profile = classify(&g, 1e-10);
    println!("balanced {}, normal {}", profile.balanced, profile.normal_laplacian);

    let params = ModelParams::new(1.0, 0.8)?;
    let times: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
    let cov = covariance_trajectory(&laplacian(&g), &params, &times, &Integrator::default())?;
    println!("t     lower    v1       v2       v3       v4       upper");
    for (t, p) in times.iter().zip(&cov) {
        let env = variance_envelope(&params, 4, *t)?;
        let vars: Vec<String> = p.diagonal().iter().map(|v| format!("{v:<8.4}")).collect();
        println!("{t:<5} {:<8.4} {} {:.4}", env.lower, vars.join(" "), env.upper);
    }
    Ok(())
}
