// Applies the discrete heat semigroup to a Gaussian on a small box.
//
// `cargo run --release --example heat_semigroup`

use heisenberg_fujita::field::{sample, semigroup_compose_check, GridGeometry, HeatSemigroup};
use heisenberg_fujita::hgroup::koranyi_norm;

pub fn run() -> heisenberg_fujita::Result<()> {
    let geom = GridGeometry::new(4.0, 12.0, 20, 24, true)?;
    let sg = HeatSemigroup::new(geom)?;
    let u0 = sample(|p| (-koranyi_norm(p).powi(2)).exp(), &geom)?;
    println!("grid {}×{}×{}, resolved step {:.4}", geom.n_xy, geom.n_xy, geom.n_tau, sg.resolved_step());
    println!("{:>5} {:>10} {:>10} {:>10}", "t", "sup", "mass", "leakage");
    println!("{:>5} {:>10.6} {:>10.6} {:>10.2e}", 0.0, u0.sup_abs(), u0.mass(), 0.0);
    for t in [0.1, 0.3, 1.0] {
        let (u, leak) = sg.apply_with_leakage(&u0, t)?;
        println!("{t:>5} {:>10.6} {:>10.6} {:>10.2e}", u.sup_abs(), u.mass(), leak);
    }
    println!("e^{{0.3Δ}}e^{{0.3Δ}} vs e^{{0.6Δ}}: {:.3e}", semigroup_compose_check(&u0, 0.3, 0.3, &sg)?);
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
