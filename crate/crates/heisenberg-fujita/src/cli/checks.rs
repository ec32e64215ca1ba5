//! Fixed recipes behind `kernel-check`, `diagnose` and `oracle`.
//!
//! Each recipe pins its grid, sample times and data so that reports are
//! reproducible; the callers decide what counts as a pass.

use crate::diagnostics::{
    critical_mass_growth, decay_geometry, fit_power_law, fujita_expected_exponent, fujita_functional,
    hardy_blowup_functional, hardy_expected_exponent, hardy_smoothing_decay, hardy_smoothing_sensitivity,
    henon_expected_exponent, henon_weighted_decay, log_spaced, rearrangement_max_at_origin, reverse_holder_check,
    CriticalMass, DecayOutcome, DiagnosticRow, RearrangementCase, RearrangementOutcome, RowVerdict, SlopeFit,
};
use crate::error::Result;
use crate::evolve::{extend_maximal_observed, EvolveConfig};
use crate::field::{sample, GridField, GridGeometry, HeatSemigroup, WeightKind, WeightSpec};
use crate::hgroup::{dilate, koranyi_norm, GPoint};
use crate::kernel::{
    check_normalization, check_scaling, envelope_sample_points, fit_bounds, heat_equation_residual, heat_kernel,
    KernelBounds,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Relative tolerance of every exponent comparison.
pub const EXPONENT_TOLERANCE: f64 = 0.1;

// ---- kernel ----

/// Times at which the kernel mass is checked.
pub const NORMALIZATION_TIMES: [f64; 3] = [0.25, 1.0, 4.0];

/// Midpoint mass of `h_t` on `[−8√t, 8√t]² × [−64t, 64t]` with 64 × 64 × 96 cells.
pub fn kernel_mass(t: f64) -> Result<f64> {
    check_normalization(t, (8.0 * t.sqrt(), 64.0 * t), (64, 96), &KernelBounds::reference())
}

/// 100 points with `|η|²/t ≤ 20` used by the scaling check.
pub fn scaling_points() -> Vec<GPoint> {
    envelope_sample_points(1.0, 100, 20.0, 0.37)
}

/// Worst relative gap of the dilation identity at time `t`.
pub fn kernel_scaling_error(t: f64) -> Result<f64> {
    check_scaling(t, &scaling_points())
}

/// Envelope fitted on 200 quasi-random points with `|η|²/t ≤ 20` at five times in `[1/4, 4]`.
pub fn fitted_kernel_bounds() -> Result<KernelBounds> {
    fit_bounds(&[0.25, 0.5, 1.0, 2.0, 4.0], &envelope_sample_points(1.0, 200, 20.0, 0.0), heat_kernel)
}

/// Envelope violations on fresh random samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest `h/lower` and `upper/h` seen; both stay ≥ 1 when nothing is violated.
    pub min_lower_ratio: f64,
    pub min_upper_ratio: f64,
}

/// `samples` draws with `t` log-uniform in `[1/4, 4]` and `|η|²/t` uniform in `[0, 20]`.
pub fn kernel_sandwich(bounds: &KernelBounds, samples: usize, seed: u64) -> Result<SandwichReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out =
        SandwichReport { samples, violations: 0, min_lower_ratio: f64::INFINITY, min_upper_ratio: f64::INFINITY };
    for _ in 0..samples {
        let t = 4f64.powf(rng.gen_range(-1.0..1.0));
        let k2 = 20.0 * t * rng.gen::<f64>();
        let theta = std::f64::consts::FRAC_PI_2 * rng.gen::<f64>();
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let ang = std::f64::consts::TAU * rng.gen::<f64>();
        let r = (k2 * theta.cos()).sqrt();
        let p = GPoint::h1(r * ang.cos(), r * ang.sin(), sign * k2 * theta.sin());
        let k2 = koranyi_norm(&p).powi(2);
        let h = heat_kernel(t, &p)?;
        if !bounds.contains(t, k2, h, 0.0) {
            out.violations += 1;
        }
        out.min_lower_ratio = out.min_lower_ratio.min(h / bounds.lower(t, k2));
        out.min_upper_ratio = out.min_upper_ratio.min(bounds.upper(t, k2) / h);
    }
    Ok(out)
}

/// One Richardson sample: residuals at steps `h` and `h/2` and their ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct RichardsonSample {
    pub t: f64,
    pub point: GPoint,
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
}

/// 20 points with `|η|²/t ≤ 4` at `t ∈ {0.5, 1, 2}`, steps `0.05·(√t, √t, t)` and half of that.
pub fn kernel_richardson() -> Result<Vec<RichardsonSample>> {
    let h = 0.05;
    envelope_sample_points(1.0, 20, 4.0, 0.31)
        .iter()
        .enumerate()
        .map(|(i, p0)| {
            let t = [0.5, 1.0, 2.0][i % 3];
            let point = dilate(f64::sqrt(t), p0)?;
            let hs = h * f64::sqrt(t);
            let coarse = heat_equation_residual(t, &point, hs, hs, h * t)?;
            let fine = heat_equation_residual(t, &point, hs / 2.0, hs / 2.0, h * t / 2.0)?;
            Ok(RichardsonSample { t, point, coarse, fine, ratio: coarse / fine })
        })
        .collect()
}

/// Text report of the four kernel checks and whether all passed.
pub fn kernel_check_report(sandwich_samples: usize, seed: u64) -> Result<(String, bool)> {
    let mut out = String::new();
    let mut all = true;
    let mut line = |ok: bool, text: String| {
        all &= ok;
        out.push_str(&format!("{} {text}\n", if ok { "PASS" } else { "FAIL" }));
    };
    for t in NORMALIZATION_TIMES {
        let m = kernel_mass(t)?;
        line((m - 1.0).abs() < 2e-3, format!("normalization t={t}: mass={m:.9}"));
    }
    for t in [0.25, 4.0] {
        let e = kernel_scaling_error(t)?;
        line(e < 1e-6, format!("scaling t={t}: max relative error={e:.3e}"));
    }
    let s = kernel_sandwich(&fitted_kernel_bounds()?, sandwich_samples, seed)?;
    line(
        s.violations == 0,
        format!(
            "sandwich: {} violations in {} samples (min h/lower={:.4}, min upper/h={:.4})",
            s.violations, s.samples, s.min_lower_ratio, s.min_upper_ratio
        ),
    );
    let r = kernel_richardson()?;
    let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.ratio), b.max(x.ratio)));
    line(
        r.iter().all(|x| (3.5..=4.5).contains(&x.ratio)),
        format!("richardson: {} ratios in [{lo:.4}, {hi:.4}]", r.len()),
    );
    Ok((out, all))
}

// ---- oracles ----

/// Every tuple of the rearrangement matrix with `c = 1`.
pub fn rearrangement_matrix() -> Vec<RearrangementCase> {
    let mut out = Vec::new();
    for dim in [1, 2] {
        for m in [0.0, -0.25, -0.5] {
            for k in [1.0, 2.0, 4.0] {
                for delta in [0.0, 0.3] {
                    for t in [0.5, 2.0] {
                        out.push(RearrangementCase { m, c: 1.0, k, delta, t, dim });
                    }
                }
            }
        }
    }
    out
}

pub fn run_rearrangement_matrix() -> Result<Vec<(RearrangementCase, RearrangementOutcome)>> {
    rearrangement_matrix().into_iter().map(|c| Ok((c, rearrangement_max_at_origin(c)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderTrials {
    pub p: f64,
    pub trials: usize,
    pub violations: usize,
    /// Smallest `lhs/rhs` seen.
    pub min_ratio: f64,
}

/// Random positive samples: 1 to 32 points, values spread over `e^{±3}`.
pub fn reverse_holder_trials(p: f64, trials: usize, seed: u64) -> Result<HolderTrials> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = HolderTrials { p, trials, violations: 0, min_ratio: f64::INFINITY };
    for _ in 0..trials {
        let n = rng.gen_range(1..=32);
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-3.0f64..3.0).exp()).collect() };
        let (f, g, w) = (draw(n), draw(n), draw(n));
        let r = reverse_holder_check(&f, &g, &w, p)?;
        if !r.holds {
            out.violations += 1;
        }
        out.min_ratio = out.min_ratio.min(r.lhs / r.rhs);
    }
    Ok(out)
}

/// Text report of the rearrangement matrix and the reverse Hölder trials.
pub fn oracle_report(trials: usize, seed: u64) -> Result<(String, bool)> {
    let mut out = String::new();
    let mut all = true;
    let cases = run_rearrangement_matrix()?;
    let worst = cases.iter().map(|(_, o)| o.margin).fold(f64::INFINITY, f64::min);
    let off_origin = cases.iter().filter(|(_, o)| o.argmax.iter().any(|&x| x != 0.0)).count();
    let ok = worst >= -1e-9 && off_origin == 0;
    all &= ok;
    out.push_str(&format!(
        "{} rearrangement: {} cases, {off_origin} maxima away from the origin, worst margin {worst:.3e}\n",
        if ok { "PASS" } else { "FAIL" },
        cases.len()
    ));
    for (i, p) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        let h = reverse_holder_trials(p, trials, seed.wrapping_add(i as u64))?;
        let ok = h.violations == 0;
        all &= ok;
        out.push_str(&format!(
            "{} reverse_holder p={p}: {} violations in {} trials (min lhs/rhs {:.6})\n",
            if ok { "PASS" } else { "FAIL" },
            h.violations,
            h.trials,
            h.min_ratio
        ));
    }
    Ok((out, all))
}

// ---- diagnostics ----

/// Vertex version of the decay box, so the origin is a node.
pub fn decay_lab() -> Result<HeatSemigroup> {
    HeatSemigroup::new(GridGeometry { offset: false, ..decay_geometry() })
}

/// `(1+|η|)^{−Q}` cut off outside `|η| ≤ 3/2`; integrable and below the decay profile.
pub fn compact_profile(g: &GridGeometry) -> Result<GridField> {
    sample(
        |p| {
            let r = koranyi_norm(p);
            if r <= 1.5 {
                (1.0 + r).powi(-4)
            } else {
                0.0
            }
        },
        g,
    )
}

/// Smoothed `|η|^{−γ}` against `u₀ ≡ 1` over `t ∈ [0.1, 1]`.
pub fn smoothing_decay(gamma: f64, lab: &HeatSemigroup) -> Result<SlopeFit> {
    let ones = GridField::from_values(*lab.geom(), vec![1.0; lab.geom().len()])?;
    hardy_smoothing_decay(gamma, &ones, &log_spaced(0.1, 1.0, 8), &KernelBounds::reference())
}

/// The smoothing fit at 0.5, 1 and 2 times the Gaussian rate.
pub fn smoothing_sensitivity(gamma: f64, lab: &HeatSemigroup) -> Result<Vec<(f64, SlopeFit)>> {
    let ones = GridField::from_values(*lab.geom(), vec![1.0; lab.geom().len()])?;
    hardy_smoothing_sensitivity(gamma, &ones, &log_spaced(0.1, 1.0, 8), &KernelBounds::reference())
}

/// `‖φ e^{tΔ}u₀‖` over `t ∈ [1.5, 15]`, one semigroup application per sample gap.
pub fn henon_decay(gamma: f64, p: f64, lab: &HeatSemigroup) -> Result<DecayOutcome> {
    let u0 = compact_profile(lab.geom())?;
    let w = WeightSpec::new(gamma, p, WeightKind::Phi)?;
    henon_weighted_decay(&u0, &w, &log_spaced(1.5, 15.0, 8), f64::INFINITY, lab)
}

/// Growth of `F` over `s ∈ [2, 20]` with step 0.5.
pub fn fujita_growth(gamma: f64, p: f64, lab: &HeatSemigroup) -> Result<SlopeFit> {
    let u0 = compact_profile(lab.geom())?;
    fit_power_law(&fujita_functional(&u0, &log_spaced(2.0, 20.0, 8), p, gamma, 0.5, lab)?)
}

/// Growth of `G` over `s ∈ [2, 20]` (rounded to the step 0.25), evaluated within `|η| ≤ 2`.
pub fn hardy_growth(gamma: f64, p: f64, lab: &HeatSemigroup) -> Result<SlopeFit> {
    let step = 0.25;
    let u0 = compact_profile(lab.geom())?;
    let mut s: Vec<f64> = log_spaced(2.0, 20.0, 8).iter().map(|t| (t / step).round() * step).collect();
    s.dedup();
    fit_power_law(&hardy_blowup_functional(&u0, &s, p, gamma, step, 2.0, lab)?)
}

/// Ball masses along a desk run at `(γ, p) = (0, 1.5)` from a unit bump of radius 2,
/// at `t ∈ [0.5, 7]` rounded to the step.
pub fn critical_mass() -> Result<CriticalMass> {
    let g = GridGeometry::desk();
    let sg = HeatSemigroup::new(g)?;
    let u0 = sample(
        |p| {
            let s = koranyi_norm(p) / 2.0;
            if s < 1.0 {
                (1.0 - s * s).powi(2)
            } else {
                0.0
            }
        },
        &g,
    )?;
    let cfg = EvolveConfig { gamma: 0.0, p: 1.5, ..Default::default() };
    let mut path = Vec::new();
    let state = extend_maximal_observed(&u0, &cfg, &sg, |t, u| path.push((t, u.clone())))?;
    let mut ts: Vec<f64> = log_spaced(0.5, 7.0, 10).iter().map(|t| (t / cfg.dt).round() * cfg.dt).collect();
    ts.dedup();
    ts.retain(|t| t + 1.0 <= state.t + 1e-9);
    let snap = |t: f64| path.iter().position(|(s, _)| (s - t).abs() < 1e-9).map(|i| path[i].clone());
    let recorded: Vec<(f64, GridField)> = ts.iter().filter_map(|&t| snap(t + 1.0)).collect();
    critical_mass_growth(&recorded, &ts)
}

/// Every diagnostic measurement as report rows.
pub fn diagnostic_rows() -> Result<Vec<DiagnosticRow>> {
    let lab = decay_lab()?;
    let mut rows = Vec::new();
    for gamma in [0.5, 1.0] {
        let fit = smoothing_decay(gamma, &lab)?;
        rows.push(DiagnosticRow::from_fit(
            "hardy_smoothing_decay",
            &format!("gamma={gamma}"),
            &fit,
            -gamma / 2.0,
            EXPONENT_TOLERANCE,
        ));
        for (scale, fit) in smoothing_sensitivity(gamma, &lab)? {
            let mut row = DiagnosticRow::from_fit(
                "hardy_smoothing_sensitivity",
                &format!("gamma={gamma};rate_scale={scale}"),
                &fit,
                -gamma / 2.0,
                EXPONENT_TOLERANCE,
            );
            row.verdict = RowVerdict::Qualitative;
            rows.push(row);
        }
    }
    for (gamma, p) in [(0.0, 2.0), (1.0, 2.0)] {
        let out = henon_decay(gamma, p, &lab)?;
        let expected = henon_expected_exponent(4, gamma, p);
        let params = format!("gamma={gamma};p={p};leakage={:.2e}", out.max_leakage);
        rows.push(match &out.fit {
            Some(fit) => DiagnosticRow::from_fit("henon_weighted_decay", &params, fit, expected, EXPONENT_TOLERANCE),
            None => DiagnosticRow {
                functional: "henon_weighted_decay".into(),
                parameters: params,
                fitted: f64::NAN,
                expected,
                r_squared: f64::NAN,
                verdict: RowVerdict::Inconclusive,
            },
        });
    }
    let fit = fujita_growth(0.0, 1.3, &lab)?;
    rows.push(DiagnosticRow::from_fit(
        "fujita_functional",
        "gamma=0;p=1.3",
        &fit,
        fujita_expected_exponent(4, 0.0, 1.3),
        EXPONENT_TOLERANCE,
    ));
    let fit = hardy_growth(-0.5, 1.2, &lab)?;
    rows.push(DiagnosticRow::from_fit(
        "hardy_blowup_functional",
        "gamma=-0.5;p=1.2",
        &fit,
        hardy_expected_exponent(4, -0.5, 1.2),
        EXPONENT_TOLERANCE,
    ));
    let fit = hardy_growth(-0.5, 1.375, &lab)?;
    let mut row =
        DiagnosticRow::from_fit("hardy_blowup_functional", "gamma=-0.5;p=1.375", &fit, 0.0, EXPONENT_TOLERANCE);
    row.verdict = RowVerdict::Qualitative;
    rows.push(row);
    let cm = critical_mass()?;
    let (slope, r2) = cm.log_fit()?;
    rows.push(DiagnosticRow {
        functional: "critical_mass_growth".into(),
        parameters: format!("gamma=0;p=1.5;samples={}", cm.samples.len()),
        fitted: slope,
        expected: f64::NAN,
        r_squared: r2,
        verdict: if cm.inconclusive {
            RowVerdict::Inconclusive
        } else if slope > 0.0 && r2 > 0.9 {
            RowVerdict::Pass
        } else {
            RowVerdict::Fail
        },
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_covers_every_tuple() {
        let m = rearrangement_matrix();
        assert_eq!(m.len(), 2 * 3 * 3 * 2 * 2);
        assert!(m.iter().all(|c| c.validate().is_ok()));
    }

    #[test]
    fn holder_trials_are_reproducible() {
        let a = reverse_holder_trials(2.0, 200, 7).unwrap();
        let b = reverse_holder_trials(2.0, 200, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
    }

    #[test]
    fn sandwich_draws_depend_on_the_seed_only() {
        let b = KernelBounds::reference();
        let a = kernel_sandwich(&b, 20, 1).unwrap();
        assert_eq!(a, kernel_sandwich(&b, 20, 1).unwrap());
        assert_ne!(a.min_upper_ratio, kernel_sandwich(&b, 20, 2).unwrap().min_upper_ratio);
    }

    #[test]
    fn reference_bounds_are_the_frozen_fit() {
        assert_eq!(fitted_kernel_bounds().unwrap(), KernelBounds::reference());
    }

    #[test]
    fn compact_profile_sits_below_the_decay_profile() {
        let g = GridGeometry::new(3.0, 9.0, 13, 13, false).unwrap();
        let u = compact_profile(&g).unwrap();
        assert_eq!(u.sup_abs(), 1.0);
        assert!((0..g.len()).all(|i| u.values()[i] <= (1.0 + g.node_norm(i)).powi(-4)));
    }
}
