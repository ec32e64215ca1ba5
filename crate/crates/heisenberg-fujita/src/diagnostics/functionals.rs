//! Blow-up functionals and critical-case probes.

use super::decay::heat_samples;
use super::linear_fit;
use crate::error::{Error, Result};
use crate::field::{power_weight, sample, GridField, HeatSemigroup};
use crate::hgroup::koranyi_norm;

fn check_times(s_values: &[f64]) -> Result<()> {
    if let Some(s) = s_values.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::Argument(format!("sample times must be positive, got {s}")));
    }
    Ok(())
}

/// `F(s) = s^{(2+γ)/2} ‖e^{sΔ}u₀‖_∞^{p−1}` for `0 ≤ γ < Q(p−1)`.
pub fn fujita_functional(
    u0: &GridField,
    s_values: &[f64],
    p: f64,
    gamma: f64,
    step: f64,
    sg: &HeatSemigroup,
) -> Result<Vec<(f64, f64)>> {
    check_times(s_values)?;
    if !(p > 1.0) || !(gamma >= 0.0 && gamma < 4.0 * (p - 1.0)) {
        return Err(Error::Configuration(format!(
            "the Fujita functional needs p > 1 and 0 ≤ γ < Q(p−1), got p = {p}, γ = {gamma}"
        )));
    }
    if u0.is_zero() {
        return Ok(s_values.iter().map(|&s| (s, 0.0)).collect());
    }
    let heat = heat_samples(u0, s_values, step, sg)?;
    Ok(s_values
        .iter()
        .zip(&heat.fields)
        .map(|(&s, u)| (s, s.powf((2.0 + gamma) / 2.0) * u.sup_abs().powf(p - 1.0)))
        .collect())
}

/// Predicted growth exponent of `F` below the critical exponent: `−Q(p−1)/2 + (2+γ)/2`.
pub fn fujita_expected_exponent(q_dim: usize, gamma: f64, p: f64) -> f64 {
    -(q_dim as f64) * (p - 1.0) / 2.0 + (2.0 + gamma) / 2.0
}

/// `G(s) = sup_η [e^{sΔ}u₀]^{p−1}(η) ∫₀^s [e^{(s−t)Δ}|·|^{−γ/(p−1)}]^{1−p}(η) dt` for −2 < γ < 0.
///
/// The supremum runs over nodes with `|η| ≤ eval_radius`, where the truncated
/// weight's heat flow is still faithful. With `a = −γ/(p−1)` and `W(σ) = e^{σΔ}|·|^a`,
/// the integrand is `σ^{γ/2}·k(σ)^{1−p}` for the bounded `k = σ^{−a/2}W(σ)`; the time
/// integral takes `∫σ^{γ/2}` exactly per step against `k` at the right end.
/// Sample times must be multiples of `step`.
pub fn hardy_blowup_functional(
    u0: &GridField,
    s_values: &[f64],
    p: f64,
    gamma: f64,
    step: f64,
    eval_radius: f64,
    sg: &HeatSemigroup,
) -> Result<Vec<(f64, f64)>> {
    check_times(s_values)?;
    if !(gamma > -2.0 && gamma < 0.0) || !(p > 1.0) {
        return Err(Error::Configuration(format!(
            "the Hardy functional needs −2 < γ < 0 and p > 1, got γ = {gamma}, p = {p}"
        )));
    }
    if u0.is_zero() {
        return Ok(s_values.iter().map(|&s| (s, 0.0)).collect());
    }
    let counts: Vec<usize> = s_values
        .iter()
        .map(|&s| {
            let n = (s / step).round();
            if n < 1.0 || (n * step - s).abs() > 1e-9 * s {
                Err(Error::Argument(format!("sample time {s} is not a multiple of the step {step}")))
            } else {
                Ok(n as usize)
            }
        })
        .collect::<Result<_>>()?;
    let g = *u0.geom();
    let nodes: Vec<usize> = (0..g.len()).filter(|&i| g.node_norm(i) <= eval_radius).collect();
    if nodes.is_empty() {
        return Err(Error::Argument(format!("no node lies within radius {eval_radius}")));
    }
    let a = -gamma / (p - 1.0);
    let exponent = 1.0 + gamma / 2.0;
    let heat = heat_samples(u0, s_values, step, sg)?;
    let n_max = *counts.iter().max().expect("non-empty");
    // inner[j][i]: ∫₀^{jΔ} W(σ)^{1−p} dσ at evaluation node i.
    let mut inner = vec![vec![0.0; nodes.len()]];
    let mut w = sample(|q| power_weight(koranyi_norm(q), a), &g)?;
    for j in 1..=n_max {
        w = sg.apply(&w, step)?;
        let (lo, hi) = ((j - 1) as f64 * step, j as f64 * step);
        let span = (hi.powf(exponent) - lo.powf(exponent)) / exponent;
        let prev = inner.last().expect("seeded");
        let next = nodes
            .iter()
            .zip(prev)
            .map(|(&i, &acc)| {
                let k = hi.powf(-a / 2.0) * w.values()[i];
                acc + span * k.powf(1.0 - p)
            })
            .collect();
        inner.push(next);
    }
    Ok(s_values
        .iter()
        .zip(&counts)
        .zip(&heat.fields)
        .map(|((&s, &n), u)| {
            let sup =
                nodes.iter().zip(&inner[n]).map(|(&i, &int)| u.values()[i].powf(p - 1.0) * int).fold(0.0, f64::max);
            (s, sup)
        })
        .collect())
}

/// Predicted growth exponent of `G` below the critical exponent: `−Q(p−1)/2 + γ/2 + 1`.
pub fn hardy_expected_exponent(q_dim: usize, gamma: f64, p: f64) -> f64 {
    -(q_dim as f64) * (p - 1.0) / 2.0 + gamma / 2.0 + 1.0
}

/// Ball masses along a run at the critical exponent.
#[derive(Debug, Clone)]
pub struct CriticalMass {
    /// `(t, ∫_{|η| ≤ √(t+1)} u(η, t+1) dη)`.
    pub samples: Vec<(f64, f64)>,
    /// Set when some ball leaves the box; such samples are dropped.
    pub inconclusive: bool,
}

impl CriticalMass {
    /// Fit of mass against `ln t`: `(slope, r²)`.
    pub fn log_fit(&self) -> Result<(f64, f64)> {
        let xs: Vec<f64> = self.samples.iter().map(|s| s.0.ln()).collect();
        let ys: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        let (_, b, r2) = linear_fit(&xs, &ys)?;
        Ok((b, r2))
    }
}

/// Mass of `u(t+1)` over the Korányi ball of radius `√(t+1)`.
///
/// Each node carries its cell's horizontal area times the length of the ball's
/// τ-section `|τ| ≤ √(r⁴ − |x|⁴)` inside its τ-cell, so the ball grows continuously
/// instead of jumping a whole τ-layer at a time.
/// `path` holds `(time, field)` pairs; each `t + 1` must match a recorded time.
pub fn critical_mass_growth(path: &[(f64, GridField)], t_values: &[f64]) -> Result<CriticalMass> {
    check_times(t_values)?;
    let mut out = CriticalMass { samples: Vec::new(), inconclusive: false };
    for &t in t_values {
        let target = t + 1.0;
        let (_, u) = path
            .iter()
            .find(|(s, _)| (s - target).abs() <= 1e-9 * target)
            .ok_or_else(|| Error::Argument(format!("no recorded field at t = {target}")))?;
        let g = u.geom();
        let radius = target.sqrt();
        if radius > g.inscribed_radius() {
            out.inconclusive = true;
            continue;
        }
        out.samples.push((t, ball_mass(u, radius)));
    }
    Ok(out)
}

fn ball_mass(u: &GridField, radius: f64) -> f64 {
    let g = u.geom();
    let (h, ht) = (g.h_xy(), g.h_tau());
    let r4 = radius.powi(4);
    let mut mass = 0.0;
    for (idx, &v) in u.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let p = g.node(idx);
        let x4 = p.horizontal_sq().powi(2);
        if x4 >= r4 {
            continue;
        }
        let half = (r4 - x4).sqrt();
        let overlap = ((p.tau + ht / 2.0).min(half) - (p.tau - ht / 2.0).max(-half)).max(0.0);
        mass += v * h * h * overlap;
    }
    mass
}

/// `t^{Q/2}‖e^{tΔ}U₀‖_∞` for a restart field `U₀ = u(·, T₀)`.
pub fn tq2_contradiction_probe(
    restart: &GridField,
    t_values: &[f64],
    step: f64,
    sg: &HeatSemigroup,
) -> Result<Vec<(f64, f64)>> {
    check_times(t_values)?;
    if restart.is_zero() {
        return Ok(t_values.iter().map(|&t| (t, 0.0)).collect());
    }
    let heat = heat_samples(restart, t_values, step, sg)?;
    Ok(t_values.iter().zip(&heat.fields).map(|(&t, u)| (t, t * t * u.sup_abs())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridGeometry;

    fn setup() -> (GridGeometry, HeatSemigroup, GridField) {
        let g = GridGeometry::new(4.0, 16.0, 12, 16, true).unwrap();
        let sg = HeatSemigroup::new(g).unwrap();
        let u = sample(|p| (-koranyi_norm(p).powi(2)).exp(), &g).unwrap();
        (g, sg, u)
    }

    #[test]
    fn zero_data_gives_zero_functionals() {
        let (g, sg, _) = setup();
        let z = GridField::zeros(g);
        let s = [0.5, 1.0];
        assert!(fujita_functional(&z, &s, 1.3, 0.0, 0.5, &sg).unwrap().iter().all(|v| v.1 == 0.0));
        assert!(hardy_blowup_functional(&z, &s, 1.2, -0.5, 0.5, 1.0, &sg).unwrap().iter().all(|v| v.1 == 0.0));
        assert!(tq2_contradiction_probe(&z, &s, 0.5, &sg).unwrap().iter().all(|v| v.1 == 0.0));
        let cm = critical_mass_growth(&[(1.5, z.clone()), (2.0, z)], &[0.5, 1.0]).unwrap();
        assert!(cm.samples.iter().all(|v| v.1 == 0.0));
    }

    #[test]
    fn fujita_functional_without_weight_matches_a_direct_path() {
        let (_, sg, u) = setup();
        let s = [0.5, 1.0, 1.5];
        let got = fujita_functional(&u, &s, 1.3, 0.0, 0.5, &sg).unwrap();
        let mut v = u.clone();
        for (k, &(t, f)) in got.iter().enumerate() {
            v = sg.apply(&v, 0.5).unwrap();
            assert_eq!(t, s[k]);
            let direct = t * v.values().iter().fold(0.0_f64, |m, x| m.max(x.abs())).powf(0.3);
            assert!((f - direct).abs() <= 1e-14 * direct);
        }
    }

    #[test]
    fn argument_checks() {
        let (_, sg, u) = setup();
        assert!(matches!(fujita_functional(&u, &[0.0], 1.3, 0.0, 0.5, &sg), Err(Error::Argument(_))));
        assert!(fujita_functional(&u, &[1.0], 1.3, 2.0, 0.5, &sg).is_err());
        assert!(hardy_blowup_functional(&u, &[0.75], 1.2, -0.5, 0.5, 1.0, &sg).is_err());
        assert!(hardy_blowup_functional(&u, &[1.0], 1.2, 0.5, 0.5, 1.0, &sg).is_err());
    }

    #[test]
    fn probe_is_monotone_in_the_restart_field() {
        let (_, sg, u) = setup();
        let s = [0.5, 1.0];
        let small = tq2_contradiction_probe(&u, &s, 0.5, &sg).unwrap();
        let large = tq2_contradiction_probe(&u.scale(3.0), &s, 0.5, &sg).unwrap();
        assert!(small.iter().zip(&large).all(|(a, b)| b.1 >= a.1 && b.1 > 0.0));
    }

    #[test]
    fn ball_outside_the_box_is_inconclusive() {
        let (_, _, u) = setup();
        let cm = critical_mass_growth(&[(2.0, u.clone()), (30.0, u)], &[1.0, 29.0]).unwrap();
        assert!(cm.inconclusive);
        assert_eq!(cm.samples.len(), 1);
        assert!(critical_mass_growth(&[], &[1.0]).is_err());
    }
}
