//! Monte Carlo check of the reference-graph covariance and certainty plateau.
//!
//! Usage: cargo run --release --example monte_carlo [trajectories]

use std::time::Instant;

use node_certainty::certainty::{
    analytic_covariance, certainty_spectral, spectral_decompose, CovarianceMode, ModelParams,
};
use node_certainty::graph::{laplacian, WeightedDigraph};
use node_certainty::simulator::{empirical_moments, simulate_ensemble, validate_moments, SimConfig, DEFAULT_GATE};
use node_certainty::tolerance::Tolerances;

fn main() -> node_certainty::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let g = WeightedDigraph::undirected(
        5,
        [(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)].map(|(k, j)| (k, j, 1.0)),
    )?;
    let params = ModelParams::default();
    let times = vec![3.0, 3.5, 4.0, 4.5, 5.0];
    let cfg = SimConfig {
        params,
        horizon: 5.0,
        step: 1e-3,
        trajectories: m,
        seed: 2024,
        sample_times: times.clone(),
    };

    let start = Instant::now();
    let ensemble = simulate_ensemble(&g, &cfg)?;
    println!("{m} trajectories in {:.1?}", start.elapsed());

    let lap = laplacian(&g);
    let target = analytic_covariance(&lap, &params, 5.0, CovarianceMode::Normal)?;
    let report = empirical_moments(&ensemble, 5.0)?;
    let check = validate_moments(&report, &target, DEFAULT_GATE)?;
    println!("t=5 variances (empirical / analytic / z):");
    for k in 0..5 {
        let e = check.entries.iter().find(|e| e.row == k && e.col == k).unwrap();
        println!("  v{}  {:.4}  {:.4}  {:+.2}", k + 1, e.empirical, e.target, e.z);
    }
    println!("diagonal gate {}: {}", check.diagonal_gate, if check.passed { "pass" } else { "fail" });

    let spec = spectral_decompose(&lap, &Tolerances::default())?;
    let exact = certainty_spectral(&spec, &params);
    println!("plateau of Var - t/n against 1/mu:");
    for k in 0..5 {
        let plateau = times
            .iter()
            .map(|&t| empirical_moments(&ensemble, t).map(|r| r.covariance[k][k] - t / 5.0))
            .sum::<node_certainty::Result<f64>>()?
            / times.len() as f64;
        println!("  v{}  {:.4}  {:.4}", k + 1, plateau, exact.inv_mu[k]);
    }
    Ok(())
}
