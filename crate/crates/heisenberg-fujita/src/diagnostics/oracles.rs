//! Brute-force oracles: the maximum of a Gaussian-smoothed radial weight, and reverse Hölder.

use crate::error::{Error, Result};
use crate::quad::{graded_rule, GaussLegendre};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Parameters of `G(x) = ∫ exp(−c|x−y|^k/t)(δ+|y|)^m dy` on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangementCase {
    pub m: f64,
    pub c: f64,
    pub k: f64,
    pub delta: f64,
    pub t: f64,
    pub dim: usize,
}

/// Lattice maximizer of `G` and the relative margin `(G(0) − max_{x≠0} G(x)) / G(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangementOutcome {
    pub argmax: Vec<f64>,
    pub margin: f64,
    pub at_origin: f64,
}

/// Relative tolerance below which a lattice value ties with `G(0)`.
const TIE: f64 = 1e-12;
const LATTICE_HALF: i32 = 6;
const PER_PANEL: usize = 16;

impl RearrangementCase {
    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Argument(format!("dimension must be 1 or 2, got {}", self.dim)));
        }
        if !(self.c > 0.0 && self.k > 0.0 && self.t > 0.0) || !(self.delta >= 0.0) {
            return Err(Error::Argument("need c, k, t > 0 and δ ≥ 0".into()));
        }
        if !(self.m <= 0.0) {
            return Err(Error::Precondition(format!("the weight exponent must be ≤ 0, got {}", self.m)));
        }
        if self.delta == 0.0 && self.m <= -(self.dim as f64) {
            return Err(Error::Precondition(format!(
                "|y|^{} is not locally integrable in dimension {}",
                self.m, self.dim
            )));
        }
        Ok(())
    }

    /// Length on which the Gaussian factor varies by O(1).
    fn scale(&self) -> f64 {
        (self.t / self.c).powf(1.0 / self.k)
    }

    /// Radius beyond which `exp(−c r^k/t) < e^{−60}`.
    fn reach(&self) -> f64 {
        (60.0 * self.t / self.c).powf(1.0 / self.k)
    }

    fn kernel(&self, d: f64) -> f64 {
        (-self.c * d.powf(self.k) / self.t).exp()
    }

    fn weight(&self, r: f64) -> f64 {
        if self.m == 0.0 {
            1.0
        } else {
            (self.delta + r).powf(self.m)
        }
    }

    /// Composite rule on [a, b]: panels no longer than half the scale, end panels graded on request.
    fn rule(&self, a: f64, b: f64, grade_a: bool, grade_b: bool, levels: usize) -> (Vec<f64>, Vec<f64>) {
        let (mut xs, mut ws) = (Vec::new(), Vec::new());
        if !(b > a) {
            return (xs, ws);
        }
        let n = ((b - a) / (0.5 * self.scale())).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let gl = GaussLegendre::new(PER_PANEL);
        for i in 0..n {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (ga, gb) = (grade_a && i == 0, grade_b && i == n - 1);
            if ga || gb {
                let (px, pw) = graded_rule(lo, hi, ga, gb, PER_PANEL / 2, levels);
                xs.extend(px);
                ws.extend(pw);
            } else {
                gl.push_mapped(lo, hi, &mut xs, &mut ws);
            }
        }
        (xs, ws)
    }

    fn singular_weight(&self) -> bool {
        self.delta == 0.0 && self.m < 0.0
    }

    /// `G(x)` on the line.
    fn value_1d(&self, x: f64) -> f64 {
        let reach = self.reach();
        let mut cuts = vec![x - reach, x, x + reach];
        if 0.0 > x - reach && 0.0 < x + reach && x != 0.0 {
            cuts.push(0.0);
        }
        cuts.sort_by(f64::total_cmp);
        let sing = self.singular_weight();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (xs, ws) = self.rule(w[0], w[1], sing && w[0] == 0.0, sing && w[1] == 0.0, 60);
            total +=
                xs.iter().zip(&ws).map(|(&y, &wt)| wt * self.kernel((x - y).abs()) * self.weight(y.abs())).sum::<f64>();
        }
        total
    }

    /// `G(x)` in the plane for `|x| = rho`, in polar coordinates about the origin.
    fn value_2d(&self, rho: f64) -> f64 {
        let reach = self.reach();
        let smooth_kernel = self.k == 2.0 || self.k == 4.0;
        let theta: (Vec<f64>, Vec<f64>) = if smooth_kernel {
            let gl = GaussLegendre::new(PER_PANEL);
            let (mut xs, mut ws) = (Vec::new(), Vec::new());
            for i in 0..8 {
                gl.push_mapped(PI * i as f64 / 8.0, PI * (i + 1) as f64 / 8.0, &mut xs, &mut ws);
            }
            (xs, ws)
        } else {
            let (mut xs, mut ws) = graded_rule(0.0, PI / 8.0, true, false, PER_PANEL / 2, 30);
            let gl = GaussLegendre::new(PER_PANEL);
            for i in 1..8 {
                gl.push_mapped(PI * i as f64 / 8.0, PI * (i + 1) as f64 / 8.0, &mut xs, &mut ws);
            }
            (xs, ws)
        };
        let angular = |r: f64| -> f64 {
            if rho == 0.0 {
                return 2.0 * PI * self.kernel(r);
            }
            2.0 * theta
                .0
                .iter()
                .zip(&theta.1)
                .map(|(&th, &w)| {
                    let d2 = (r * r + rho * rho - 2.0 * r * rho * th.cos()).max(0.0);
                    w * self.kernel(d2.sqrt())
                })
                .sum::<f64>()
        };
        let sing = self.singular_weight();
        let mut pieces = Vec::new();
        if rho > 0.0 {
            pieces.push(self.rule(0.0, rho, sing, !smooth_kernel, 20));
            pieces.push(self.rule(rho, rho + reach, !smooth_kernel, false, 20));
        } else {
            pieces.push(self.rule(0.0, reach, sing, false, 60));
        }
        pieces
            .iter()
            .map(|(rs, ws)| rs.iter().zip(ws).map(|(&r, &w)| w * r * self.weight(r) * angular(r)).sum::<f64>())
            .sum()
    }
}

/// Evaluates `G` on a lattice around the origin (spacing a quarter of the Gaussian scale)
/// and reports the maximizer, with ties to within 1e-12 broken toward the origin.
pub fn rearrangement_max_at_origin(case: RearrangementCase) -> Result<RearrangementOutcome> {
    case.validate()?;
    let h = 0.25 * case.scale();
    let lattice: Vec<Vec<f64>> = match case.dim {
        1 => (-LATTICE_HALF..=LATTICE_HALF).map(|i| vec![i as f64 * h]).collect(),
        _ => (-LATTICE_HALF..=LATTICE_HALF)
            .flat_map(|i| (-LATTICE_HALF..=LATTICE_HALF).map(move |j| vec![i as f64 * h, j as f64 * h]))
            .collect(),
    };
    // G is radial in the plane; evaluate once per distinct radius.
    let mut radial: HashMap<u64, f64> = HashMap::new();
    let mut value = |x: &[f64]| -> f64 {
        if case.dim == 1 {
            return case.value_1d(x[0]);
        }
        let rho = x[0].hypot(x[1]);
        *radial.entry(rho.to_bits()).or_insert_with(|| case.value_2d(rho))
    };
    let origin = vec![0.0; case.dim];
    let at_origin = value(&origin);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x in lattice.iter().filter(|x| x.iter().any(|&v| v != 0.0)) {
        let g = value(x);
        if best.as_ref().is_none_or(|b| g > b.1) {
            best = Some((x.clone(), g));
        }
    }
    let (x_best, g_best) = best.expect("lattice has points besides the origin");
    let argmax = if at_origin >= g_best - TIE * at_origin { origin } else { x_best };
    Ok(RearrangementOutcome { argmax, margin: (at_origin - g_best) / at_origin, at_origin })
}

/// Both sides of `∫|fg| ≥ (∫|f|^{1/p})^p (∫|g|^{−1/(p−1)})^{−(p−1)}` for a discrete measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverseHolder {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn reverse_holder_check(f: &[f64], g: &[f64], weights: &[f64], p: f64) -> Result<ReverseHolder> {
    if f.len() != g.len() || f.len() != weights.len() || f.is_empty() {
        return Err(Error::Argument("f, g and weights need the same non-zero length".into()));
    }
    if !(p > 1.0) {
        return Err(Error::Argument(format!("p must exceed 1, got {p}")));
    }
    if g.iter().any(|&v| !(v.abs() > 0.0)) {
        return Err(Error::Precondition("g must not vanish on the sample set".into()));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::Precondition("measure weights must be positive".into()));
    }
    let lhs: f64 = f.iter().zip(g).zip(weights).map(|((a, b), w)| w * (a * b).abs()).sum();
    let sf: f64 = f.iter().zip(weights).map(|(a, w)| w * a.abs().powf(1.0 / p)).sum();
    let sg: f64 = g.iter().zip(weights).map(|(b, w)| w * b.abs().powf(-1.0 / (p - 1.0))).sum();
    let rhs = sf.powf(p) * sg.powf(-(p - 1.0));
    Ok(ReverseHolder { lhs, rhs, holds: lhs >= rhs * (1.0 - 1e-12) })
}
