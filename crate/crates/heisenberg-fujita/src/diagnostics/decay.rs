//! Decay of smoothed weights and of weighted heat flows.

use super::{fit_power_law, SlopeFit};
use crate::error::{Error, Result};
use crate::field::{weighted_sup_norm, GridField, GridGeometry, HeatSemigroup, WeightSpec};
use crate::hgroup::{compose, inverse, koranyi_norm, GPoint};
use crate::kernel::KernelBounds;
use crate::quad::GaussLegendre;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Mass fraction lost through the walls above which a decay fit is not trusted.
pub const LEAKAGE_GUARD: f64 = 0.01;

/// Box for large-time decay: L = 20, L_τ = 200, 41 × 41 × 81 cell centers.
pub fn decay_geometry() -> GridGeometry {
    GridGeometry { half_width_xy: 20.0, half_width_tau: 200.0, n_xy: 41, n_tau: 81, offset: true }
}

/// `e^{tΔ}u₀` at the requested times, marching with a fixed step.
#[derive(Debug, Clone)]
pub struct HeatSamples {
    pub times: Vec<f64>,
    pub fields: Vec<GridField>,
    /// `1 − mass(t)/mass(0)`.
    pub leakage: Vec<f64>,
}

/// Marches `e^{stepΔ}` from `u₀`, with one shorter step where a sample time is not a multiple of `step`.
pub fn heat_samples(u0: &GridField, times: &[f64], step: f64, sg: &HeatSemigroup) -> Result<HeatSamples> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return Err(Error::Argument("sample times must be positive and strictly increasing".into()));
    }
    if !(step > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    let m0 = u0.mass();
    let mut out = HeatSamples { times: times.to_vec(), fields: Vec::new(), leakage: Vec::new() };
    let (mut t, mut u) = (0.0, u0.clone());
    for &target in times {
        let eps = 1e-9 * target.max(1.0);
        while target - t > eps {
            let d = if target - t >= step - eps { step } else { target - t };
            u = sg.apply(&u, d)?;
            t += d;
        }
        t = target;
        out.leakage.push(if m0 > 0.0 { (1.0 - u.mass() / m0).max(0.0) } else { 0.0 });
        out.fields.push(u.clone());
    }
    Ok(out)
}

/// Quadrature for `∫ e^{−c|w|²} F(w) dw` in Korányi polar coordinates on H¹.
///
/// `w = (r√cosβ cosα, r√cosβ sinα, r² sinβ)` has `dw = r³ dr dα dβ`.
struct PolarRule {
    points: Vec<GPoint>,
    weights: Vec<f64>,
}

impl PolarRule {
    fn new(c: f64) -> Self {
        let r_max = (40.0 / c).sqrt();
        let gl_r = GaussLegendre::new(8);
        let gl_b = GaussLegendre::new(24);
        let n_alpha = 16;
        let (mut rs, mut rw) = (Vec::new(), Vec::new());
        let panels = 8;
        for k in 0..panels {
            let (a, b) = (r_max * k as f64 / panels as f64, r_max * (k + 1) as f64 / panels as f64);
            gl_r.push_mapped(a, b, &mut rs, &mut rw);
        }
        let (mut bs, mut bw) = (Vec::new(), Vec::new());
        gl_b.push_mapped(-PI / 2.0, PI / 2.0, &mut bs, &mut bw);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (&r, &wr) in rs.iter().zip(&rw) {
            let radial = wr * r.powi(3) * (-c * r * r).exp();
            for (&beta, &wb) in bs.iter().zip(&bw) {
                let s = r * beta.cos().sqrt();
                let tau = r * r * beta.sin();
                for ia in 0..n_alpha {
                    let alpha = 2.0 * PI * ia as f64 / n_alpha as f64;
                    points.push(GPoint::h1(s * alpha.cos(), s * alpha.sin(), tau));
                    weights.push(radial * wb * 2.0 * PI / n_alpha as f64);
                }
            }
        }
        Self { points, weights }
    }
}

/// Trilinear interpolation of a grid field, zero outside the node hull.
fn interpolate(u: &GridField, p: &GPoint) -> f64 {
    let g = u.geom();
    let locate = |v: f64, first: f64, h: f64, n: usize| -> Option<(usize, f64)> {
        let s = (v - first) / h;
        if s < 0.0 || s > (n - 1) as f64 {
            return None;
        }
        let i = (s.floor() as usize).min(n.saturating_sub(2));
        Some((i, s - i as f64))
    };
    let (hx, ht) = (g.h_xy(), g.h_tau());
    let (Some((ix, fx)), Some((iy, fy)), Some((it, ft))) =
        (locate(p.x[0], g.x(0), hx, g.n_xy), locate(p.y[0], g.x(0), hx, g.n_xy), locate(p.tau, g.tau(0), ht, g.n_tau))
    else {
        return 0.0;
    };
    let mut acc = 0.0;
    for (dx, wx) in [(0, 1.0 - fx), (1, fx)] {
        for (dy, wy) in [(0, 1.0 - fy), (1, fy)] {
            for (dt, wt) in [(0, 1.0 - ft), (1, ft)] {
                let w = wx * wy * wt;
                if w != 0.0 {
                    acc += w * u.get((ix + dx).min(g.n_xy - 1), (iy + dy).min(g.n_xy - 1), (it + dt).min(g.n_tau - 1));
                }
            }
        }
    }
    acc
}

/// Nodes at which smoothed quantities are evaluated: every `stride`-th node, keeping the
/// center lines so a vertex grid contributes its origin node.
fn candidate_nodes(g: &GridGeometry, per_axis: usize) -> Vec<usize> {
    let pick = |n: usize| -> Vec<usize> {
        let stride = n.div_ceil(per_axis).max(1);
        let c = n / 2;
        let mut v: Vec<usize> = (0..n).filter(|i| (*i as isize - c as isize) % stride as isize == 0).collect();
        v.dedup();
        v
    };
    let (xs, ts) = (pick(g.n_xy), pick(g.n_tau));
    let mut out = Vec::new();
    for &i in &xs {
        for &j in &xs {
            for &k in &ts {
                out.push(g.index(i, j, k));
            }
        }
    }
    out
}

/// `sup_η t^{−Q/2}∫ exp(−c|ς⁻¹∘η|²/t)|ς|^{−γ}u₀(ς) dς` at each time, over a sub-lattice of nodes.
pub fn smoothed_weight_sup(gamma: f64, u0: &GridField, times: &[f64], c_star: f64) -> Result<Vec<(f64, f64)>> {
    if !(gamma > 0.0 && gamma < 4.0) {
        return Err(Error::Argument(format!("smoothing decay needs 0 < γ < Q = 4, got {gamma}")));
    }
    if !(c_star > 0.0) {
        return Err(Error::Argument("the Gaussian rate must be positive".into()));
    }
    u0.ensure_clean()?;
    if u0.min() < 0.0 {
        return Err(Error::Argument("u₀ must be non-negative".into()));
    }
    let rule = PolarRule::new(c_star);
    let g = *u0.geom();
    let nodes = candidate_nodes(&g, 9);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > 0.0) {
            return Err(Error::Argument(format!("time must be positive, got {t}")));
        }
        let scale = t.sqrt();
        // ς = η∘z⁻¹ with z = δ_{√t} w, so |ς⁻¹∘η| = √t |w|.
        let shifts: Vec<GPoint> =
            rule.points.iter().map(|w| inverse(&GPoint::h1(scale * w.x[0], scale * w.y[0], t * w.tau))).collect();
        let sup = nodes
            .par_iter()
            .map(|&idx| {
                let eta = g.node(idx);
                shifts
                    .iter()
                    .zip(&rule.weights)
                    .map(|(zi, &w)| {
                        let s = compose(&eta, zi).expect("points share the dimension");
                        let u = interpolate(u0, &s);
                        if u == 0.0 {
                            0.0
                        } else {
                            w * u * koranyi_norm(&s).powf(-gamma)
                        }
                    })
                    .sum::<f64>()
            })
            .reduce(|| 0.0, f64::max);
        out.push((t, sup));
    }
    Ok(out)
}

/// Slope of the smoothed singular weight; the expected exponent is `−γ/2`.
pub fn hardy_smoothing_decay(gamma: f64, u0: &GridField, times: &[f64], bounds: &KernelBounds) -> Result<SlopeFit> {
    fit_power_law(&smoothed_weight_sup(gamma, u0, times, bounds.upper_rate)?)
}

/// The smoothing fit repeated with the Gaussian rate scaled by 0.5, 1 and 2.
pub fn hardy_smoothing_sensitivity(
    gamma: f64,
    u0: &GridField,
    times: &[f64],
    bounds: &KernelBounds,
) -> Result<Vec<(f64, SlopeFit)>> {
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&s| Ok((s, fit_power_law(&smoothed_weight_sup(gamma, u0, times, s * bounds.upper_rate)?)?)))
        .collect()
}

/// Result of a weighted decay measurement.
#[derive(Debug, Clone)]
pub struct DecayOutcome {
    pub samples: Vec<(f64, f64)>,
    /// `None` when the leakage guard tripped.
    pub fit: Option<SlopeFit>,
    pub max_leakage: f64,
}

impl DecayOutcome {
    pub fn is_inconclusive(&self) -> bool {
        self.fit.is_none_or(|f| !f.is_conclusive())
    }
}

/// Predicted large-time exponent of `‖φ e^{tΔ}u₀‖`: `−Q/2 + γ/(2(p−1))`.
pub fn henon_expected_exponent(q_dim: usize, gamma: f64, p: f64) -> f64 {
    -(q_dim as f64) / 2.0 + gamma / (2.0 * (p - 1.0))
}

/// Slope of `‖φ·e^{tΔ}u₀‖_∞` over the given times (all above 1).
///
/// `u₀` must lie below the profile `(1+|η|)^{−Q}` at every node.
pub fn henon_weighted_decay(
    u0: &GridField,
    weight: &WeightSpec,
    times: &[f64],
    step: f64,
    sg: &HeatSemigroup,
) -> Result<DecayOutcome> {
    if weight.gamma < 0.0 {
        return Err(Error::Precondition("weighted decay needs γ ≥ 0".into()));
    }
    if times.iter().any(|&t| !(t > 1.0)) {
        return Err(Error::Argument("weighted decay is fitted over times above 1".into()));
    }
    let g = u0.geom();
    u0.ensure_clean()?;
    if let Some((idx, v)) = u0
        .values()
        .iter()
        .enumerate()
        .find(|&(idx, &v)| v < 0.0 || v > (1.0 + g.node_norm(idx)).powi(-4) * (1.0 + 1e-12))
    {
        return Err(Error::Precondition(format!("u₀ = {v} at node {idx} violates 0 ≤ u₀ ≤ (1+|η|)^(−Q)")));
    }
    let heat = heat_samples(u0, times, step, sg)?;
    let samples = heat
        .fields
        .iter()
        .zip(times)
        .map(|(u, &t)| Ok((t, weighted_sup_norm(u, weight)?)))
        .collect::<Result<Vec<_>>>()?;
    let max_leakage = heat.leakage.iter().copied().fold(0.0, f64::max);
    let fit = if max_leakage < LEAKAGE_GUARD { Some(fit_power_law(&samples)?) } else { None };
    Ok(DecayOutcome { samples, fit, max_leakage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, WeightKind};

    #[test]
    fn polar_rule_integrates_the_gaussian() {
        for c in [0.1, 0.5] {
            let rule = PolarRule::new(c);
            let total: f64 = rule.weights.iter().sum();
            let exact = PI * PI / (c * c);
            assert!((total / exact - 1.0).abs() < 1e-10, "{total} vs {exact}");
        }
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let g = GridGeometry::new(2.0, 4.0, 9, 9, false).unwrap();
        let u = sample(|p| 1.0 + p.x[0] - 0.5 * p.y[0] + 0.25 * p.tau, &g).unwrap();
        let p = GPoint::h1(0.3, -0.7, 1.1);
        assert!((interpolate(&u, &p) - (1.0 + 0.3 + 0.35 + 0.275)).abs() < 1e-12);
        assert_eq!(interpolate(&u, &GPoint::h1(5.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn heat_samples_hit_requested_times() {
        let g = GridGeometry::new(3.0, 9.0, 9, 9, true).unwrap();
        let sg = HeatSemigroup::new(g).unwrap();
        let u = sample(|p| (-koranyi_norm(p).powi(2)).exp(), &g).unwrap();
        let s = heat_samples(&u, &[0.3, 0.5], 0.2, &sg).unwrap();
        let direct = sg.apply(&sg.apply(&sg.apply(&u, 0.2).unwrap(), 0.1).unwrap(), 0.2).unwrap();
        for (a, b) in s.fields[1].values().iter().zip(direct.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }
        assert!(heat_samples(&u, &[0.5, 0.3], 0.2, &sg).is_err());
    }

    #[test]
    fn profile_violation_is_a_precondition_error() {
        let g = GridGeometry::new(3.0, 9.0, 9, 9, true).unwrap();
        let sg = HeatSemigroup::new(g).unwrap();
        let u = GridField::from_values(g, vec![0.5; g.len()]).unwrap();
        let w = WeightSpec::new(0.0, 2.0, WeightKind::Phi).unwrap();
        assert!(matches!(henon_weighted_decay(&u, &w, &[2.0, 3.0], 0.5, &sg), Err(Error::Precondition(_))));
    }

    #[test]
    fn zero_data_is_a_degenerate_smoothing_fit() {
        let g = GridGeometry::new(3.0, 9.0, 9, 9, false).unwrap();
        let times = super::super::log_spaced(0.1, 1.0, 8);
        let r = hardy_smoothing_decay(1.0, &GridField::zeros(g), &times, &KernelBounds::reference());
        assert!(matches!(r, Err(Error::Numerical(_))));
    }
}
