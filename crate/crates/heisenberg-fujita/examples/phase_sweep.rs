// A coarse `(p, γ)` sweep printed as CSV, with the threshold columns.
//
// `cargo run --release --example phase_sweep`

use heisenberg_fujita::cli::{run_sweep, sweep_csv, sweep_inversions, RunConfig};

pub fn run() -> heisenberg_fujita::Result<()> {
    let mut base = RunConfig::default();
    for (key, value) in [("n_xy", "13"), ("n_tau", "13"), ("L", "4"), ("L_tau", "16"), ("t_horizon", "2")] {
        base.set(key, value)?;
    }
    base.validate()?;
    let cells = run_sweep(&[1.3, 2.5], &[-0.5, 0.0, 1.0], &base)?;
    print!("{}", sweep_csv(&cells, base.q_dim()));
    println!("inversions: {:?}", sweep_inversions(&cells));
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
