// Subcritical Fujita run: a large bump at `γ = 0, p = 1.3` blows up in finite time.
//
// `cargo run --release --example blowup_run`

use heisenberg_fujita::evolve::{extend_maximal, EvolveConfig, Verdict};
use heisenberg_fujita::field::{sample, GridGeometry, HeatSemigroup};
use heisenberg_fujita::hgroup::koranyi_norm;

pub fn run() -> heisenberg_fujita::Result<()> {
    let geom = GridGeometry::new(4.0, 16.0, 13, 13, true)?;
    let sg = HeatSemigroup::new(geom)?;
    let u0 = sample(|p| 50.0 * (1.0 - (koranyi_norm(p) / 2.0).powi(2)).max(0.0).powi(2), &geom)?;
    let cfg = EvolveConfig { gamma: 0.0, p: 1.3, t_horizon: 6.0, ..Default::default() };
    let state = extend_maximal(&u0, &cfg, &sg)?;
    for (t, norm) in state.history.iter().step_by(4) {
        println!("t = {t:>8.4}  sup u = {norm:.4e}");
    }
    println!("verdict {} at t = {:.4}", state.verdict.as_str(), state.t);
    if state.verdict != Verdict::BlowupDetected {
        eprintln!("expected a blow-up before t = {}", cfg.t_horizon);
    }
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
