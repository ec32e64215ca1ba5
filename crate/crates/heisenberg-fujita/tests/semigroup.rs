//! Semigroup composition, refinement and thread-count independence on small boxes.

use heisenberg_fujita::field::{sample, semigroup_compose_check, GridField, GridGeometry, HeatSemigroup};
use heisenberg_fujita::hgroup::koranyi_norm;

fn gaussian_on(n_xy: usize, n_tau: usize) -> (HeatSemigroup, GridField) {
    let g = GridGeometry::new(4.0, 12.0, n_xy, n_tau, true).unwrap();
    let u = sample(|p| (-koranyi_norm(p).powi(2)).exp(), &g).unwrap();
    (HeatSemigroup::new(g).unwrap(), u)
}

#[test]
fn composition_defect_is_small_and_shrinks_under_refinement() {
    let (coarse_sg, coarse_u) = gaussian_on(16, 20);
    let (fine_sg, fine_u) = gaussian_on(32, 40);
    for (s, t) in [(0.25, 0.25), (0.1, 0.4), (0.5, 0.5)] {
        let coarse = semigroup_compose_check(&coarse_u, s, t, &coarse_sg).unwrap();
        let fine = semigroup_compose_check(&fine_u, s, t, &fine_sg).unwrap();
        assert!(coarse < 2e-2, "s={s} t={t}: coarse defect {coarse}");
        assert!(fine < coarse, "s={s} t={t}: {fine} ≥ {coarse}");
    }
}

#[test]
fn output_does_not_depend_on_the_thread_count() {
    let (sg, u) = gaussian_on(16, 20);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sg.apply(&u, 0.3).unwrap())
    };
    assert_eq!(run(1).values(), run(3).values());
}
