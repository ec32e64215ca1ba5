//! τ-cumulative unit-time kernel on H^1:
//! `A(ρ, S) = ∫_0^S h_1(ρ, σ) dσ`, odd in `S`, non-decreasing in `S`.
//!
//! By scaling, `∫_a^b h_t(r, σ) dσ = [A(r/√t, b/t) − A(r/√t, a/t)] / t`,
//! so one table serves every time step.

use super::{kernel_constant, lambda_factor, HYPERBOLIC_CUTOFF};
use crate::quad::panel_rule;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const RHO_MAX: f64 = 10.0;
pub const S_MAX: f64 = 64.0;
const D_RHO: f64 = 0.05;
const D_S: f64 = 0.05;
const PANELS: usize = 320;

#[derive(Debug)]
pub struct ScaledCumulative {
    n_rho: usize,
    n_s: usize,
    /// Row-major in (ρ, S), S ≥ 0.
    values: Vec<f64>,
}

static TABLE: OnceLock<ScaledCumulative> = OnceLock::new();

/// Process-wide table, built on first use.
pub fn scaled_cumulative() -> &'static ScaledCumulative {
    TABLE.get_or_init(ScaledCumulative::build)
}

impl ScaledCumulative {
    fn build() -> Self {
        let n_rho = (RHO_MAX / D_RHO).round() as usize + 1;
        let n_s = (S_MAX / D_S).round() as usize + 1;
        let (lambdas, weights) = panel_rule(HYPERBOLIC_CUTOFF, PANELS, 8);
        let two_c = 2.0 * kernel_constant(1);
        let rows: Vec<Vec<f64>> = (0..n_rho)
            .into_par_iter()
            .map(|i| {
                let rho = i as f64 * D_RHO;
                // ∫_0^S cos(λσ/4) dσ = (4/λ) sin(λS/4); sines advance by the Chebyshev recurrence.
                let coef: Vec<f64> = lambdas
                    .iter()
                    .zip(&weights)
                    .map(|(&l, &w)| two_c * w * lambda_factor(1, 1.0, rho * rho, l) * 4.0 / l)
                    .collect();
                let twice_cos: Vec<f64> = lambdas.iter().map(|&l| 2.0 * (0.25 * l * D_S).cos()).collect();
                let mut cur = vec![0.0; lambdas.len()];
                let mut prev: Vec<f64> = lambdas.iter().map(|&l| -(0.25 * l * D_S).sin()).collect();
                let mut row = Vec::with_capacity(n_s);
                let mut running = 0.0_f64;
                for _ in 0..n_s {
                    let a: f64 = coef.iter().zip(&cur).map(|(c, s)| c * s).sum();
                    running = running.max(a);
                    row.push(running);
                    for k in 0..cur.len() {
                        let next = twice_cos[k] * cur[k] - prev[k];
                        prev[k] = cur[k];
                        cur[k] = next;
                    }
                }
                row
            })
            .collect();
        Self { n_rho, n_s, values: rows.into_iter().flatten().collect() }
    }

    #[inline]
    fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_s + j]
    }

    /// `A(ρ, S)` by bilinear interpolation; zero beyond `RHO_MAX`, flat beyond `S_MAX`.
    #[inline]
    pub fn at(&self, rho: f64, s: f64) -> f64 {
        let fr = rho / D_RHO;
        if !(fr < (self.n_rho - 1) as f64) {
            return 0.0;
        }
        let i = fr as usize;
        let a = fr - i as f64;
        let sa = s.abs();
        let fs = sa / D_S;
        let v = if fs >= (self.n_s - 1) as f64 {
            let j = self.n_s - 1;
            (1.0 - a) * self.node(i, j) + a * self.node(i + 1, j)
        } else {
            let j = fs as usize;
            let b = fs - j as f64;
            (1.0 - a) * ((1.0 - b) * self.node(i, j) + b * self.node(i, j + 1))
                + a * ((1.0 - b) * self.node(i + 1, j) + b * self.node(i + 1, j + 1))
        };
        if s < 0.0 {
            -v
        } else {
            v
        }
    }

    /// `A(ρ, S_MAX)`, half of the τ-marginal `e^{−ρ²/4}/(4π)`.
    #[inline]
    pub fn half_total(&self, rho: f64) -> f64 {
        self.at(rho, S_MAX)
    }
}

/// Closed form of `A(ρ, ∞)`.
pub fn half_total_exact(rho: f64) -> f64 {
    (-rho * rho / 4.0).exp() / (8.0 * PI)
}
