// Evaluates the H¹ heat kernel, its dilation identity and the Gaussian envelope.
//
// `cargo run --release --example heat_kernel`

use heisenberg_fujita::hgroup::{dilate, koranyi_norm, GPoint};
use heisenberg_fujita::kernel::{heat_kernel, KernelBounds};

pub fn run() -> heisenberg_fujita::Result<()> {
    let bounds = KernelBounds::reference();
    let points =
        [GPoint::h1(0.0, 0.0, 0.0), GPoint::h1(1.0, 0.0, 0.0), GPoint::h1(0.0, 0.0, 1.0), GPoint::h1(0.7, -0.4, 2.5)];
    println!("{:>6} {:>24} {:>12} {:>12} {:>12}", "t", "point", "lower", "h_t", "upper");
    for t in [0.5, 1.0, 2.0] {
        for p in &points {
            let h = heat_kernel(t, p)?;
            let k2 = koranyi_norm(p).powi(2);
            println!(
                "{t:>6} {:>24} {:>12.5e} {:>12.5e} {:>12.5e}",
                format!("({}, {}, {})", p.x[0], p.y[0], p.tau),
                bounds.lower(t, k2),
                h,
                bounds.upper(t, k2)
            );
        }
    }
    // h_t(η) = t^{−2} h_1(δ_{1/√t} η) on H¹.
    let (t, p) = (4.0, points[3].clone());
    let lhs = heat_kernel(t, &p)?;
    let rhs = t.powi(-2) * heat_kernel(1.0, &dilate(1.0 / t.sqrt(), &p)?)?;
    println!("dilation identity at t = {t}: {lhs:.12e} vs {rhs:.12e}");
    Ok(())
}

fn main() -> heisenberg_fujita::Result<()> {
    run()
}
