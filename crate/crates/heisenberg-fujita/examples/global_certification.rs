// Supercritical Hénon cell: small data sized by the λ budget, then certified
// by monotone iteration under the barrier.
//
// `cargo run --release --example global_certification`

use heisenberg_fujita::cli::{run_single, RunConfig};

pub fn run() -> heisenberg_fujita::Result<()> {
    let mut cfg = RunConfig::default();
    for (key, value) in
        [("gamma", "0"), ("p", "2"), ("n_xy", "13"), ("n_tau", "13"), ("L", "4"), ("L_tau", "16"), ("t_horizon", "2")]
    {
        cfg.set(key, value)?;
    }
    cfg.validate()?;
    let cell = run_single(&cfg)?.cell;
    println!("verdict {} with data {}", cell.verdict.as_str(), cell.data);
    if let Some(b) = &cell.budget {
        println!("budget: λ = {:.4e}, Λ = {:.4}, verified = {}", b.lambda_scale, b.capital_lambda, b.verified);
    }
    if let Some(c) = &cell.certification {
        println!("certified = {} at depth {}; iterate distances {:?}", c.certified, c.depth, c.distances);
    }
    for note in &cell.notes {
        println!("note: {note}");
    }
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
