//! Heat kernel of the sub-Laplacian on H^N.
//!
//! With the group law τ-coefficient 2 and Δ_H carrying 4(|x|²+|y|²)∂²_ττ,
//! the kernel with unit mass is
//!
//! h_t(x,τ) = 2^{-(2N+3)} π^{-(N+1)} ∫_R (λ/sinh tλ)^N exp(−|x|²λ/(4 tanh tλ)) cos(λτ/4) dλ
//!
//! where |x| is the modulus of the joint 2N-vector. It satisfies
//! h_t(x,τ) = t^{-(N+1)} h_1(x/√t, τ/t), h_1(0) = 1/64 for N = 1.

mod bounds;
pub mod cumulative;
mod table;

pub use bounds::{envelope_sample_points, fit_bounds, KernelBounds};
pub use table::{build_table, build_table_with, interpolate, Interpolated, KernelTable};

use crate::error::{Error, Result};
use crate::hgroup::{dilate, GPoint};
use crate::quad::panel_rule;
use std::f64::consts::PI;

/// `tλ` beyond which `(tλ/sinh tλ)` is below 1e-16.
pub const HYPERBOLIC_CUTOFF: f64 = 40.0;
const NODES_PER_PANEL: usize = 8;
const MIN_PANELS: usize = 32;
const PANELS_PER_PERIOD: f64 = 3.0;
const CONVERGENCE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    Trapezoid,
    GaussLegendrePanels,
}

/// Truncated λ-quadrature for the kernel integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuadratureSpec {
    pub lambda_max: f64,
    pub n_lambda: usize,
    pub rule: QuadRule,
}

impl KernelQuadratureSpec {
    /// Panel rule resolving the cosine at `|τ| ≤ tau_max` with three panels per period.
    pub fn auto(t: f64, tau_max: f64) -> Self {
        let lambda_max = HYPERBOLIC_CUTOFF / t;
        let periods = lambda_max * tau_max.abs() / (8.0 * PI);
        let panels = MIN_PANELS.max((PANELS_PER_PERIOD * periods).ceil() as usize);
        Self { lambda_max, n_lambda: panels * NODES_PER_PANEL, rule: QuadRule::GaussLegendrePanels }
    }

    /// Integrand magnitude at `lambda_max` relative to its value at λ = 0.
    pub fn truncation_ratio(&self, n_heis: usize, t: f64, r2: f64) -> f64 {
        let u = t * self.lambda_max;
        let hyper = (u / u.sinh()).powi(n_heis as i32);
        let gauss = (-(r2 / 4.0) * (self.lambda_max / u.tanh() - 1.0 / t)).exp();
        hyper * gauss
    }

    pub fn validate(&self, n_heis: usize, t: f64, r2: f64) -> Result<()> {
        if !(self.lambda_max > 0.0) || self.n_lambda == 0 {
            return Err(Error::Argument("quadrature needs lambda_max > 0 and n_lambda > 0".into()));
        }
        if self.rule == QuadRule::GaussLegendrePanels && !self.n_lambda.is_multiple_of(NODES_PER_PANEL) {
            return Err(Error::Argument(format!("panel rule needs n_lambda divisible by {NODES_PER_PANEL}")));
        }
        let ratio = self.truncation_ratio(n_heis, t, r2);
        if ratio > 1e-14 {
            return Err(Error::Argument(format!(
                "lambda_max={} too small at t={t}: integrand ratio {ratio:e} at truncation",
                self.lambda_max
            )));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self { n_lambda: 2 * self.n_lambda, ..*self }
    }

    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        match self.rule {
            QuadRule::GaussLegendrePanels => {
                panel_rule(self.lambda_max, self.n_lambda / NODES_PER_PANEL, NODES_PER_PANEL)
            }
            QuadRule::Trapezoid => {
                let n = self.n_lambda.max(2);
                let h = self.lambda_max / (n - 1) as f64;
                let xs = (0..n).map(|k| k as f64 * h).collect();
                let ws = (0..n).map(|k| if k == 0 || k == n - 1 { 0.5 * h } else { h }).collect();
                (xs, ws)
            }
        }
    }
}

/// Normalizing constant 2^{-(2N+3)} π^{-(N+1)}.
pub fn kernel_constant(n_heis: usize) -> f64 {
    2f64.powi(-(2 * n_heis as i32 + 3)) * PI.powi(-(n_heis as i32 + 1))
}

/// `(λ/sinh tλ)^N exp(−r²λ/(4 tanh tλ))` with the λ → 0 limit.
#[inline]
pub fn lambda_factor(n_heis: usize, t: f64, r2: f64, lambda: f64) -> f64 {
    let u = t * lambda;
    let (ratio, coth) = if u.abs() < 1e-6 { (1.0 / t, 1.0 / t) } else { (lambda / u.sinh(), lambda / u.tanh()) };
    ratio.powi(n_heis as i32) * (-0.25 * r2 * coth).exp()
}

/// Reusable quadrature nodes for one time value.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    n_heis: usize,
    t: f64,
    spec: KernelQuadratureSpec,
    lambdas: Vec<f64>,
    weights: Vec<f64>,
}

impl KernelEvaluator {
    pub fn new(n_heis: usize, t: f64, spec: KernelQuadratureSpec) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Argument(format!("kernel time must be positive, got {t}")));
        }
        spec.validate(n_heis, t, 0.0)?;
        let (lambdas, weights) = spec.nodes();
        Ok(Self { n_heis, t, spec, lambdas, weights })
    }

    /// Evaluator resolving all `|τ| ≤ tau_max`.
    pub fn auto(n_heis: usize, t: f64, tau_max: f64) -> Result<Self> {
        Self::new(n_heis, t, KernelQuadratureSpec::auto(t, tau_max))
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn spec(&self) -> &KernelQuadratureSpec {
        &self.spec
    }

    /// Quadrature-weighted λ-profile at fixed horizontal radius.
    pub fn profile(&self, r2: f64) -> Vec<f64> {
        self.lambdas.iter().zip(&self.weights).map(|(&l, &w)| w * lambda_factor(self.n_heis, self.t, r2, l)).collect()
    }

    /// Cosine transform of a profile at `tau`.
    pub fn at_tau(&self, profile: &[f64], tau: f64) -> f64 {
        let s: f64 = profile.iter().zip(&self.lambdas).map(|(&p, &l)| p * (0.25 * l * tau).cos()).sum();
        2.0 * kernel_constant(self.n_heis) * s
    }

    pub fn value(&self, r2: f64, tau: f64) -> f64 {
        self.at_tau(&self.profile(r2), tau)
    }
}

/// Absolute noise floor of the cosine quadrature at time `t`.
fn noise_floor(n_heis: usize, t: f64) -> f64 {
    1e-12 * kernel_constant(n_heis) * t.powi(-(n_heis as i32 + 1))
}

/// h_t at a point, checked against the doubled rule.
pub fn eval_kernel(t: f64, p: &GPoint, quad: &KernelQuadratureSpec) -> Result<f64> {
    let n = p.dim();
    let r2 = p.horizontal_sq();
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!("kernel time must be positive, got {t}")));
    }
    quad.validate(n, t, r2)?;
    let coarse = KernelEvaluator::new(n, t, *quad)?.value(r2, p.tau);
    let fine = KernelEvaluator::new(n, t, quad.doubled())?.value(r2, p.tau);
    if (fine - coarse).abs() > CONVERGENCE_RTOL * fine.abs() + noise_floor(n, t) {
        return Err(Error::Numerical(format!(
            "kernel quadrature not converged at t={t}, |x|²={r2}, τ={}: {coarse:e} vs {fine:e}",
            p.tau
        )));
    }
    Ok(fine)
}

/// h_t with the automatic quadrature for the point's τ.
pub fn heat_kernel(t: f64, p: &GPoint) -> Result<f64> {
    eval_kernel(t, p, &KernelQuadratureSpec::auto(t, p.tau.abs()))
}

/// Max relative gap between h_t(ξ) and t^{−Q/2} h_1(δ_{t^{−1/2}} ξ).
pub fn check_scaling(t: f64, sample_points: &[GPoint]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for p in sample_points {
        let q = (2 * p.dim() + 2) as f64;
        let lhs = heat_kernel(t, p)?;
        let rhs = t.powf(-q / 2.0) * heat_kernel(1.0, &dilate(t.powf(-0.5), p)?)?;
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    Ok(worst)
}

/// Korányi ball volume |B_1| on H^1.
pub const KORANYI_BALL_VOLUME_H1: f64 = PI * PI / 2.0;

/// Upper-envelope mass of h_t outside the Korányi ball of radius `radius` (N = 1).
pub fn exterior_envelope_mass(bounds: &KernelBounds, t: f64, radius: f64) -> f64 {
    let c = bounds.upper_rate;
    let a = c * radius * radius / t;
    bounds.upper_prefactor * 4.0 * KORANYI_BALL_VOLUME_H1 * (-a).exp() * (a + 1.0) / (2.0 * c * c)
}

/// Midpoint-rule mass of h_t over [−L,L]² × [−L_τ,L_τ] on H^1.
pub fn check_normalization(
    t: f64,
    half_widths: (f64, f64),
    resolution: (usize, usize),
    bounds: &KernelBounds,
) -> Result<f64> {
    let (l, lt) = half_widths;
    let (nxy, nt) = resolution;
    if nxy == 0 || nt == 0 {
        return Err(Error::Configuration("normalization grid has zero resolution".into()));
    }
    if !(t > 0.0) || !(l > 0.0) || !(lt > 0.0) {
        return Err(Error::Configuration("normalization needs t, L, L_τ > 0".into()));
    }
    let radius = l.min(lt.sqrt());
    let exterior = exterior_envelope_mass(bounds, t, radius);
    if exterior >= 1e-4 {
        return Err(Error::Configuration(format!(
            "box too small at t={t}: exterior envelope mass bound {exterior:e} ≥ 1e-4"
        )));
    }
    let hx = 2.0 * l / nxy as f64;
    let ht = 2.0 * lt / nt as f64;
    let xs: Vec<f64> = (0..nxy).map(|i| -l + (i as f64 + 0.5) * hx).collect();
    let taus: Vec<f64> = (0..nt).map(|k| -lt + (k as f64 + 0.5) * ht).collect();
    let ev = KernelEvaluator::auto(1, t, lt)?;
    // Column sums depend on x² + y² only; cache by the sorted index pair.
    let half = nxy.div_ceil(2);
    let mut total = 0.0;
    for i in 0..half {
        for j in i..half {
            let (a, b) = (xs[nxy - 1 - i], xs[nxy - 1 - j]);
            let prof = ev.profile(a * a + b * b);
            let col: f64 = taus.iter().map(|&tau| ev.at_tau(&prof, tau)).sum();
            let mult = count_mirror(nxy, i) * count_mirror(nxy, j) * if i == j { 1.0 } else { 2.0 };
            total += mult * col;
        }
    }
    Ok(total * hx * hx * ht)
}

fn count_mirror(n: usize, i: usize) -> f64 {
    if n % 2 == 1 && i == n / 2 {
        1.0
    } else {
        2.0
    }
}

/// Finite-difference residual ∂_t h − Δ_H h at `p`.
pub fn heat_equation_residual(t: f64, p: &GPoint, h_space: f64, h_tau: f64, h_time: f64) -> Result<f64> {
    if !(t > h_time) || !(h_space > 0.0) || !(h_tau > 0.0) || !(h_time > 0.0) {
        return Err(Error::Argument("residual needs positive steps and t > h_time".into()));
    }
    let n = p.dim();
    let tau_reach = p.tau.abs() + 2.0 * h_tau;
    // One quadrature for every stencil point keeps the residual smooth in the steps.
    let spec = KernelQuadratureSpec::auto(t - h_time, tau_reach);
    let ev_at = |time: f64| -> Result<KernelEvaluator> {
        let mut s = spec;
        s.lambda_max = HYPERBOLIC_CUTOFF / (t - h_time);
        KernelEvaluator::new(n, time, s)
    };
    let ev = ev_at(t)?;
    let f = |q: &GPoint| ev.value(q.horizontal_sq(), q.tau);
    let shifted = |dx: Option<(usize, bool, f64)>, dtau: f64| {
        let mut q = p.clone();
        if let Some((i, is_y, d)) = dx {
            if is_y {
                q.y[i] += d;
            } else {
                q.x[i] += d;
            }
        }
        q.tau += dtau;
        q
    };
    let (hs, ht) = (h_space, h_tau);
    let f0 = f(p);
    let mut lap = 0.0;
    for i in 0..n {
        for is_y in [false, true] {
            let second =
                (f(&shifted(Some((i, is_y, hs)), 0.0)) - 2.0 * f0 + f(&shifted(Some((i, is_y, -hs)), 0.0))) / (hs * hs);
            let mixed = (f(&shifted(Some((i, is_y, hs)), ht))
                - f(&shifted(Some((i, is_y, hs)), -ht))
                - f(&shifted(Some((i, is_y, -hs)), ht))
                + f(&shifted(Some((i, is_y, -hs)), -ht)))
                / (4.0 * hs * ht);
            // 4(y_i ∂²_{x_i τ} − x_i ∂²_{y_i τ})
            let coeff = if is_y { -p.x[i] } else { p.y[i] };
            lap += second + 4.0 * coeff * mixed;
        }
    }
    let ftt = (f(&shifted(None, ht)) - 2.0 * f0 + f(&shifted(None, -ht))) / (ht * ht);
    lap += 4.0 * p.horizontal_sq() * ftt;
    let r2 = p.horizontal_sq();
    let dt = (ev_at(t + h_time)?.value(r2, p.tau) - ev_at(t - h_time)?.value(r2, p.tau)) / (2.0 * h_time);
    Ok(dt - lap)
}

/// Optional text dump: header lines then `|x| τ value` rows.
pub fn dump_table(table: &KernelTable) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let q = 2 * table.n_heis + 2;
    let _ = writeln!(s, "# t {}", table.t);
    let _ = writeln!(s, "# Q {q}");
    let _ = writeln!(
        s,
        "# quad lambda_max {} n_lambda {} rule {:?}",
        table.quad.lambda_max, table.quad.n_lambda, table.quad.rule
    );
    for (i, r) in table.radial_nodes.iter().enumerate() {
        for (k, tau) in table.tau_nodes.iter().enumerate() {
            let _ = writeln!(s, "{r:.12e} {tau:.12e} {:.12e}", table.value(i, k));
        }
    }
    s
}
