//! Closed-form certainty of the canonical normal families at n = 9.
//!
//! Usage: cargo run --example families [n]

use node_certainty::families::{closed_form_mu, FamilySpec};

fn main() -> node_certainty::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(9);
    println!("1/mu per node, sigma = 1, alpha = 1, n = {n}");
    for kind in ["complete", "undirected_ring", "directed_ring", "undirected_star", "undirected_path"] {
        let spec: FamilySpec = format!("{kind}:{n}:1").parse()?;
        let r = closed_form_mu(&spec, 1.0)?;
        match r.inv_mu {
            Some(v) => {
                let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
                println!("{kind:>16}  {}", cells.join(" "));
            }
            None => println!("{kind:>16}  undefined: {}", r.reason.unwrap_or_default()),
        }
    }
    Ok(())
}
