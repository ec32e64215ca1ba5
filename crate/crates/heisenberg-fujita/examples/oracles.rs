// Brute-force oracles: where a smoothed radial weight peaks, and reverse Hölder.
//
// `cargo run --release --example oracles`

use heisenberg_fujita::diagnostics::{rearrangement_max_at_origin, reverse_holder_check, RearrangementCase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run() -> heisenberg_fujita::Result<()> {
    let case = RearrangementCase { m: -1.5, c: 1.0, k: 4.0 / 3.0, delta: 0.0, t: 1.0, dim: 2 };
    let out = rearrangement_max_at_origin(case)?;
    println!("argmax {:?}, G(0) = {:.6}, relative margin {:.3e}", out.argmax, out.at_origin, out.margin);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 50;
    let f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    for p in [1.5, 2.0, 3.0] {
        let r = reverse_holder_check(&f, &g, &w, p)?;
        println!("p = {p}: ∫|fg| = {:.5} ≥ {:.5}: {}", r.lhs, r.rhs, r.holds);
    }
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
