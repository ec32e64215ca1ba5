// Power-law fit of the smoothed Hardy weight `sup e^{tΔ}(|·|^{−γ})` against `t^{−γ/2}`.
//
// `cargo run --release --example decay_fit`

use heisenberg_fujita::diagnostics::{hardy_smoothing_decay, log_spaced};
use heisenberg_fujita::field::{GridField, GridGeometry};
use heisenberg_fujita::kernel::KernelBounds;

pub fn run() -> heisenberg_fujita::Result<()> {
    let geom = GridGeometry::new(6.0, 36.0, 17, 25, false)?;
    let ones = GridField::from_values(geom, vec![1.0; geom.len()])?;
    for gamma in [0.5, 1.0] {
        let fit = hardy_smoothing_decay(gamma, &ones, &log_spaced(0.1, 1.0, 8), &KernelBounds::reference())?;
        println!("γ = {gamma}: exponent {:.4} (expected {}), r² {:.5}", fit.exponent, -gamma / 2.0, fit.r_squared);
    }
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
