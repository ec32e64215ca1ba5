use crate::error::Result;
use crate::field::{GridField, GridGeometry, HeatSemigroup};
use std::collections::VecDeque;

/// Weight of the source sample taken at `s` over `[s, s_next]`, seen from time `t ≥ s_next`.
///
/// For γ ≥ 0 this is the step length. For γ < 0 it is
/// `(t−s)^{−γ/2} ∫_s^{s_next} (t−σ)^{γ/2} dσ`, the exact integral of the singular
/// factor normalized at the sample point; it exceeds the step length.
pub fn duhamel_weight(gamma: f64, t: f64, s: f64, s_next: f64) -> f64 {
    let d = s_next - s;
    if gamma >= 0.0 {
        return d;
    }
    let a = gamma / 2.0;
    let (far, near) = (t - s, (t - s_next).max(0.0));
    far.powf(-a) * (far.powf(1.0 + a) - near.powf(1.0 + a)) / (1.0 + a)
}

/// Weight actually used for sample `j` at node `m`: exact while the sample is at most
/// `depth + 1` steps old, then frozen at its value for that age.
pub(crate) fn effective_weight(gamma: f64, depth: usize, times: &[f64], m: usize, j: usize) -> f64 {
    let at = if gamma >= 0.0 { m } else { m.min(j + depth + 1) };
    duhamel_weight(gamma, times[at], times[j], times[j + 1])
}

/// Running discrete Duhamel integral `Σ_j ρ_{m,j} P_{t_m ← s_j} F_j`.
///
/// Samples younger than `depth + 1` steps are kept separately so their weights
/// can follow the exact product rule; older ones are folded into one field.
#[derive(Debug, Clone)]
pub struct DuhamelSum {
    gamma: f64,
    depth: usize,
    geom: GridGeometry,
    times: Vec<f64>,
    recent: VecDeque<(usize, GridField)>,
    merged: Option<GridField>,
}

impl DuhamelSum {
    pub fn new(t0: f64, gamma: f64, depth: usize, geom: GridGeometry) -> Self {
        Self { gamma, depth, geom, times: vec![t0], recent: VecDeque::new(), merged: None }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Adds the source sampled at the current node, steps by `d`, and returns the integral at the new node.
    pub fn advance(&mut self, source: &GridField, d: f64, sg: &HeatSemigroup) -> Result<GridField> {
        let m = self.times.len() - 1;
        let t_next = self.times[m] + d;
        self.times.push(t_next);
        if self.gamma >= 0.0 || self.depth == 0 {
            // Every weight is final after one step: fold, then propagate once.
            let w = effective_weight(self.gamma, self.depth, &self.times, m + 1, m);
            let mut acc = self.merged.take().unwrap_or_else(|| GridField::zeros(self.geom));
            acc.add_scaled(w, source)?;
            let acc = sg.apply(&acc, d)?;
            self.merged = Some(acc.clone());
            return Ok(acc);
        }
        if let Some(mg) = self.merged.as_mut() {
            *mg = sg.apply(mg, d)?;
        }
        for (_, f) in self.recent.iter_mut() {
            *f = sg.apply(f, d)?;
        }
        self.recent.push_back((m, sg.apply(source, d)?));
        while let Some(&(j, _)) = self.recent.front() {
            if m + 1 - j <= self.depth {
                break;
            }
            let (j, f) = self.recent.pop_front().expect("front exists");
            let w = effective_weight(self.gamma, self.depth, &self.times, m + 1, j);
            let mg = self.merged.get_or_insert_with(|| GridField::zeros(self.geom));
            mg.add_scaled(w, &f)?;
        }
        let mut out = self.merged.clone().unwrap_or_else(|| GridField::zeros(self.geom));
        for (j, f) in &self.recent {
            out.add_scaled(effective_weight(self.gamma, self.depth, &self.times, m + 1, *j), f)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_reduce_to_step_length_without_singularity() {
        assert_eq!(duhamel_weight(0.0, 5.0, 1.0, 1.25), 0.25);
        assert_eq!(duhamel_weight(1.5, 5.0, 1.0, 1.25), 0.25);
    }

    #[test]
    fn last_interval_weight_is_closed_form() {
        // ∫_0^d σ^{γ/2} dσ · d^{−γ/2} = d / (1 + γ/2)
        let w = duhamel_weight(-1.0, 0.3, 0.1, 0.3);
        assert!((w - 0.2 / 0.5).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_the_singular_integral() {
        let gamma = -0.5;
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let t = *times.last().unwrap();
        let total: f64 =
            (0..40).map(|j| duhamel_weight(gamma, t, times[j], times[j + 1]) * (t - times[j]).powf(gamma / 2.0)).sum();
        let exact = t.powf(1.0 + gamma / 2.0) / (1.0 + gamma / 2.0);
        assert!((total - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn weights_exceed_step_and_decrease_with_age() {
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.1).collect();
        let mut last = f64::INFINITY;
        for m in 1..=20 {
            let w = duhamel_weight(-0.5, times[m], times[0], times[1]);
            assert!(w > 0.1 && w < last);
            last = w;
        }
        assert_eq!(effective_weight(-0.5, 2, &times, 10, 0), duhamel_weight(-0.5, times[3], times[0], times[1]));
        assert_eq!(effective_weight(-0.5, 2, &times, 3, 1), duhamel_weight(-0.5, times[3], times[1], times[2]));
    }
}
