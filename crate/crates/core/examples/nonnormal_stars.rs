//! Variance of exploding and imploding stars next to the undirected star.
//!
//! Usage: cargo run --example nonnormal_stars [n]

use node_certainty::certainty::ModelParams;
use node_certainty::families::{closed_form_covariance, FamilySpec};

fn main() -> node_certainty::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(9);
    let params = ModelParams::default();
    let kinds = ["exploding_star", "imploding_star", "undirected_star"];
    let specs: Vec<FamilySpec> = kinds
        .iter()
        .map(|k| format!("{k}:{n}:1").parse())
        .collect::<Result<_, _>>()?;
    println!("t     t/n     expl.center expl.leaf  impl.center impl.leaf  star.center star.leaf");
    for step in 1..=10 {
        let t = 0.5 * step as f64;
        let mut row = format!("{t:<5} {:<7.4}", t / n as f64);
        for s in &specs {
            let c = closed_form_covariance(s, &params, t)?;
            row.push_str(&format!(" {:<11.4} {:<10.4}", c[(0, 0)], c[(1, 1)]));
        }
        println!("{row}");
    }
    Ok(())
}
