//! Mild-solution time stepping for `u_t − Δ_H u = |η|^γ u^p`.
//!
//! The Duhamel integral is discretized explicitly: the source is sampled at
//! the left end of each step and carried to later nodes by the discrete
//! semigroup. For γ < 0 each sample is weighted by the exact integral of the
//! singular factor `(t−s)^{γ/2}` over its step, normalized at the left end.

mod duhamel;
mod global;

pub use duhamel::{duhamel_weight, DuhamelSum};
pub use global::{
    hardy_lambda_budget, henon_lambda_budget, monotone_global, BarrierViolation, Construction,
    GlobalConstructionParams, MonotoneOutcome, ViolationKind, BARRIER_SLACK, MONOTONE_SLACK,
};

use crate::error::{Error, Result};
use crate::field::{apply_weight, weighted_sup_norm, GridField, HeatSemigroup, WeightKind, WeightSpec};
use crate::hgroup::GroupParams;

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    Uniform,
    /// Steps grow by a fixed ratio from a small first step until they reach the uniform step.
    Geometric,
}

/// Strictly increasing positive time nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_nodes: Vec<f64>,
    scheme: TimeScheme,
}

impl TimeGrid {
    pub fn from_nodes(t_nodes: Vec<f64>, scheme: TimeScheme) -> Result<Self> {
        if t_nodes.is_empty() || !(t_nodes[0] > 0.0) {
            return Err(Error::Argument("time nodes must start after 0".into()));
        }
        if t_nodes.windows(2).any(|w| !(w[0] < w[1])) || t_nodes.iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("time nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { t_nodes, scheme })
    }

    /// `dt, 2dt, …` up to `horizon`; the last node is snapped to the horizon.
    pub fn uniform(dt: f64, horizon: f64) -> Result<Self> {
        if !(dt > 0.0 && horizon > 0.0) {
            return Err(Error::Argument(format!("need dt > 0 and horizon > 0, got {dt}, {horizon}")));
        }
        let steps = (horizon / dt - TIME_EPS).ceil().max(1.0) as usize;
        let nodes = (1..=steps).map(|k| if k == steps { horizon } else { k as f64 * dt }).collect();
        Self::from_nodes(nodes, TimeScheme::Uniform)
    }

    /// Geometric steps `first·ratio^k` while below `dt`, then uniform `dt` up to `horizon`.
    pub fn geometric(first: f64, ratio: f64, dt: f64, horizon: f64) -> Result<Self> {
        if !(first > 0.0 && ratio > 1.0 && dt >= first && horizon > 0.0) {
            return Err(Error::Argument("geometric grid needs 0 < first ≤ dt, ratio > 1".into()));
        }
        let mut nodes = Vec::new();
        let mut t = 0.0;
        for d in geometric_steps(first, ratio, dt) {
            if t + d >= horizon - TIME_EPS {
                break;
            }
            t += d;
            nodes.push(t);
        }
        while t < horizon - TIME_EPS {
            t = if t + dt >= horizon - TIME_EPS { horizon } else { t + dt };
            nodes.push(t);
        }
        Self::from_nodes(nodes, TimeScheme::Geometric)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    pub fn scheme(&self) -> TimeScheme {
        self.scheme
    }

    /// Step sizes starting from `t = 0`.
    pub fn steps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.t_nodes
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }
}

fn geometric_steps(first: f64, ratio: f64, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = first;
    while d < dt * (1.0 - 1e-12) {
        out.push(d);
        d *= ratio;
    }
    out
}

/// Time-stepping parameters shared by every evolution routine.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub gamma: f64,
    pub p: f64,
    pub n_heis: usize,
    /// Uniform step.
    pub dt: f64,
    /// Default Picard window, in steps.
    pub window_steps: usize,
    pub t_horizon: f64,
    pub blowup_threshold: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub min_window: f64,
    /// Source samples younger than this many steps keep exact product weights.
    pub history_depth: usize,
    pub scheme: TimeScheme,
    pub geometric_first: f64,
    pub geometric_ratio: f64,
    pub monotone_depth: usize,
    /// `false` drops the nonlinear term (linear heat flow).
    pub source_enabled: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            gamma: 0.0,
            p: 2.0,
            n_heis: 1,
            dt: 0.1,
            window_steps: 4,
            t_horizon: 8.0,
            blowup_threshold: 1e6,
            picard_tol: 1e-10,
            picard_max: 50,
            min_window: 1e-5,
            history_depth: 4,
            scheme: TimeScheme::Geometric,
            geometric_first: 0.01,
            geometric_ratio: 1.2,
            monotone_depth: 5,
            source_enabled: true,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        WeightSpec::new(self.gamma, self.p, WeightKind::HardyHenon)?;
        GroupParams::new(self.n_heis).map_err(|e| Error::Configuration(e.to_string()))?;
        let positive = [
            ("dt", self.dt),
            ("t_horizon", self.t_horizon),
            ("blowup_threshold", self.blowup_threshold),
            ("picard_tol", self.picard_tol),
            ("min_window", self.min_window),
            ("geometric_first", self.geometric_first),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.window_steps == 0 || self.picard_max == 0 {
            return Err(Error::Configuration("window_steps and picard_max must be positive".into()));
        }
        if !(self.geometric_ratio > 1.0) {
            return Err(Error::Configuration("geometric_ratio must exceed 1".into()));
        }
        Ok(())
    }

    pub fn q_dim(&self) -> usize {
        2 * self.n_heis + 2
    }

    /// `|η|^γ u^p`.
    pub fn source_weight(&self) -> WeightSpec {
        WeightSpec { gamma: self.gamma, p: self.p, kind: WeightKind::HardyHenon }
    }

    /// The norm in which local existence is posed: `‖φ·u‖_∞` for γ ≥ 0, `‖u‖_∞` for γ < 0.
    pub fn governing_weight(&self) -> WeightSpec {
        if self.gamma >= 0.0 {
            WeightSpec { gamma: self.gamma, p: self.p, kind: WeightKind::Phi }
        } else {
            WeightSpec::unit()
        }
    }

    pub fn governing_norm(&self, u: &GridField) -> Result<f64> {
        weighted_sup_norm(u, &self.governing_weight())
    }

    /// Nonlinear source at a node; zero when the source is disabled.
    pub fn source(&self, u: &GridField) -> Result<GridField> {
        if !self.source_enabled {
            return Ok(GridField::zeros(*u.geom()));
        }
        apply_weight(u, &self.source_weight())
    }

    /// Uniform grid `dt, …, t_horizon`.
    pub fn uniform_grid(&self) -> Result<TimeGrid> {
        TimeGrid::uniform(self.dt, self.t_horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Running,
    BlowupDetected,
    HorizonReached,
    ContractionFailed,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Running => "running",
            Verdict::BlowupDetected => "blowup_detected",
            Verdict::HorizonReached => "horizon_reached",
            Verdict::ContractionFailed => "contraction_failed",
        }
    }
}

/// Marching memory: free evolution of the data plus the Duhamel sum.
#[derive(Debug, Clone)]
struct March {
    free: GridField,
    sum: DuhamelSum,
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub u: GridField,
    /// `(t, governing norm)` with strictly increasing times.
    pub history: Vec<(f64, f64)>,
    pub verdict: Verdict,
    /// Fraction of the free evolution's mass lost through the box walls so far.
    pub leakage: f64,
    pub halvings: usize,
    march: Option<March>,
}

impl EvolutionState {
    pub fn new(u0: GridField, cfg: &EvolveConfig) -> Result<Self> {
        cfg.validate()?;
        u0.ensure_clean()?;
        if u0.min() < 0.0 {
            return Err(Error::Argument("initial data must be non-negative".into()));
        }
        let n0 = cfg.governing_norm(&u0)?;
        Ok(Self {
            t: 0.0,
            u: u0,
            history: vec![(0.0, n0)],
            verdict: Verdict::Running,
            leakage: 0.0,
            halvings: 0,
            march: None,
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.history.iter().map(|h| h.1).fold(0.0, f64::max)
    }

    fn record(&mut self, t: f64, norm: f64, cfg: &EvolveConfig) {
        self.history.push((t, norm));
        if !(norm <= cfg.blowup_threshold) {
            self.verdict = Verdict::BlowupDetected;
        }
    }
}

/// One explicit Duhamel step over the whole history from `state.t` to `next_t`.
pub fn volterra_step(
    mut state: EvolutionState,
    next_t: f64,
    cfg: &EvolveConfig,
    sg: &HeatSemigroup,
) -> Result<EvolutionState> {
    if state.verdict != Verdict::Running {
        return Err(Error::Argument(format!("cannot step a state with verdict {}", state.verdict.as_str())));
    }
    if !(next_t > state.t) {
        return Err(Error::Argument(format!("next time {next_t} does not exceed {}", state.t)));
    }
    let d = next_t - state.t;
    let mut march = match state.march.take() {
        Some(m) => m,
        None => March {
            free: state.u.clone(),
            sum: DuhamelSum::new(state.t, cfg.gamma, cfg.history_depth, *state.u.geom()),
        },
    };
    let src = cfg.source(&state.u)?;
    let m_in = march.free.mass();
    let (free, leak) = sg.apply_with_leakage(&march.free, d)?;
    march.free = free;
    let integral = march.sum.advance(&src, d, sg)?;
    let mut u = march.free.clone();
    u.add_scaled(1.0, &integral)?;
    u.ensure_clean()?;
    if m_in > 0.0 {
        state.leakage = 1.0 - (1.0 - state.leakage) * (1.0 - leak);
    }
    let norm = cfg.governing_norm(&u)?;
    state.t = next_t;
    state.u = u;
    state.march = Some(march);
    state.record(next_t, norm, cfg);
    Ok(state)
}

/// Why a Picard window was abandoned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardFailure {
    /// Successive differences more than doubled.
    Diverged,
    /// An iterate left the finite range or exceeded the blow-up threshold.
    Overflow,
    /// `picard_max` reached without meeting the tolerance.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub converged: bool,
    /// Node times, starting at the window start.
    pub times: Vec<f64>,
    /// Last iterate at each node, starting with the window's initial field.
    pub path: Vec<GridField>,
    pub iterations: usize,
    /// Governing-norm distance between successive iterates.
    pub differences: Vec<f64>,
    pub failure: Option<PicardFailure>,
    /// Mass fraction lost by the free evolution over the window.
    pub leakage: f64,
}

impl PicardOutcome {
    pub fn last(&self) -> &GridField {
        self.path.last().expect("path holds the initial field")
    }
}

/// Picard iteration of the discrete Duhamel map on one window starting at `(t0, u_start)`.
///
/// Iterate zero is the free path `e^{(t−t0)Δ}u_start`. The explicit map fixes one
/// more node per sweep, so an `m`-step window converges in at most `m + 1` sweeps.
pub fn picard_local(
    u_start: &GridField,
    t0: f64,
    steps: &[f64],
    cfg: &EvolveConfig,
    sg: &HeatSemigroup,
) -> Result<PicardOutcome> {
    cfg.validate()?;
    u_start.ensure_clean()?;
    if steps.is_empty() || steps.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Argument("window needs at least one positive step".into()));
    }
    let mut times = vec![t0];
    for &d in steps {
        times.push(times.last().unwrap() + d);
    }
    let mut free = vec![u_start.clone()];
    for &d in steps {
        free.push(sg.apply(free.last().unwrap(), d)?);
    }
    let m_in = u_start.mass();
    let leakage = if m_in > 0.0 { (1.0 - free.last().unwrap().mass() / m_in).max(0.0) } else { 0.0 };
    let mut path = free.clone();
    let mut differences = Vec::new();
    let outcome = |path, differences, iterations, converged, failure| PicardOutcome {
        converged,
        times: times.clone(),
        path,
        iterations,
        differences,
        failure,
        leakage,
    };
    for k in 1..=cfg.picard_max {
        let next = match sweep(&path, &free, t0, steps, cfg, sg) {
            Ok(next) => next,
            Err(Error::Poisoned(_)) => return Ok(outcome(path, differences, k, false, Some(PicardFailure::Overflow))),
            Err(e) => return Err(e),
        };
        let mut diff = 0.0_f64;
        let mut top = 0.0_f64;
        for (a, b) in next.iter().zip(&path) {
            diff = diff.max(cfg.governing_norm(&a.zip_with(b, |x, y| x - y)?)?);
            top = top.max(cfg.governing_norm(a)?);
        }
        path = next;
        differences.push(diff);
        if !diff.is_finite() || !top.is_finite() {
            return Ok(outcome(path, differences, k, false, Some(PicardFailure::Overflow)));
        }
        if diff <= cfg.picard_tol * top.max(1.0) {
            return Ok(outcome(path, differences, k, true, None));
        }
        if top > cfg.blowup_threshold {
            return Ok(outcome(path, differences, k, false, Some(PicardFailure::Overflow)));
        }
        let n = differences.len();
        if n >= 2 && diff > 2.0 * differences[n - 2] {
            return Ok(outcome(path, differences, k, false, Some(PicardFailure::Diverged)));
        }
    }
    Ok(outcome(path, differences, cfg.picard_max, false, Some(PicardFailure::Exhausted)))
}

/// One application of the discrete Duhamel map to a window path.
fn sweep(
    path: &[GridField],
    free: &[GridField],
    t0: f64,
    steps: &[f64],
    cfg: &EvolveConfig,
    sg: &HeatSemigroup,
) -> Result<Vec<GridField>> {
    let mut sum = DuhamelSum::new(t0, cfg.gamma, cfg.history_depth, *path[0].geom());
    let mut out = vec![path[0].clone()];
    for (i, &d) in steps.iter().enumerate() {
        let src = cfg.source(&path[i])?;
        src.ensure_clean()?;
        let integral = sum.advance(&src, d, sg)?;
        let mut u = free[i + 1].clone();
        u.add_scaled(1.0, &integral)?;
        u.ensure_clean()?;
        out.push(u);
    }
    Ok(out)
}

/// Window planner: step size and step count, halved on failure and restored on success.
#[derive(Debug, Clone)]
struct WindowPlan {
    default_steps: usize,
    dt: f64,
    steps: usize,
    step: f64,
    geometric: std::collections::VecDeque<f64>,
}

impl WindowPlan {
    fn new(cfg: &EvolveConfig) -> Self {
        let geometric = if cfg.gamma < 0.0 && cfg.scheme == TimeScheme::Geometric {
            geometric_steps(cfg.geometric_first, cfg.geometric_ratio, cfg.dt).into()
        } else {
            Default::default()
        };
        Self { default_steps: cfg.window_steps, dt: cfg.dt, steps: cfg.window_steps, step: cfg.dt, geometric }
    }

    fn length(&self) -> f64 {
        self.steps as f64 * self.step
    }

    fn next_steps(&self, t: f64, horizon: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut s = t;
        let source: Box<dyn Iterator<Item = f64>> = if self.geometric.is_empty() {
            Box::new(std::iter::repeat_n(self.step, self.steps))
        } else {
            Box::new(self.geometric.iter().copied().take(self.steps))
        };
        for d in source {
            if s + d >= horizon - TIME_EPS {
                out.push(horizon - s);
                return out;
            }
            s += d;
            out.push(d);
        }
        out
    }

    fn consumed(&mut self, n: usize) {
        for _ in 0..n.min(self.geometric.len()) {
            self.geometric.pop_front();
        }
    }

    fn shrink(&mut self) {
        if !self.geometric.is_empty() {
            // Abandon the geometric ramp and continue on halved uniform steps.
            self.step = self.geometric[0];
            self.geometric.clear();
        }
        if self.steps > 1 {
            self.steps /= 2;
        } else {
            self.step /= 2.0;
        }
    }

    fn grow(&mut self) {
        if !self.geometric.is_empty() {
            return;
        }
        if self.step < self.dt {
            self.step = (self.step * 2.0).min(self.dt);
        } else {
            self.steps = (self.steps * 2).min(self.default_steps);
        }
    }
}

/// Picard windows until the horizon, blow-up, or an unrecoverable contraction failure.
pub fn extend_maximal(u0: &GridField, cfg: &EvolveConfig, sg: &HeatSemigroup) -> Result<EvolutionState> {
    extend_maximal_observed(u0, cfg, sg, |_, _| {})
}

/// [`extend_maximal`] calling `observe(t, u)` on every accepted time node, the initial one included.
pub fn extend_maximal_observed(
    u0: &GridField,
    cfg: &EvolveConfig,
    sg: &HeatSemigroup,
    mut observe: impl FnMut(f64, &GridField),
) -> Result<EvolutionState> {
    observe(0.0, u0);
    let mut state = EvolutionState::new(u0.clone(), cfg)?;
    let mut plan = WindowPlan::new(cfg);
    let mut small_failures = 0;
    while state.t < cfg.t_horizon - TIME_EPS {
        let steps = plan.next_steps(state.t, cfg.t_horizon);
        let out = picard_local(&state.u, state.t, &steps, cfg, sg)?;
        if out.converged {
            plan.consumed(steps.len());
            for (t, u) in out.times.iter().zip(&out.path).skip(1) {
                let norm = cfg.governing_norm(u)?;
                observe(*t, u);
                state.record(*t, norm, cfg);
                if state.verdict == Verdict::BlowupDetected {
                    state.t = *t;
                    state.u = u.clone();
                    return Ok(state);
                }
            }
            state.leakage = 1.0 - (1.0 - state.leakage) * (1.0 - out.leakage);
            state.t = *out.times.last().unwrap();
            state.u = out.path.last().unwrap().clone();
            plan.grow();
            small_failures = 0;
            continue;
        }
        state.halvings += 1;
        plan.shrink();
        if plan.length() < cfg.min_window {
            small_failures += 1;
            if small_failures >= 2 {
                let current = state.history.last().map_or(0.0, |h| h.1);
                let n = state.history.len();
                let growing = (n >= 2 && state.history[n - 1].1 > state.history[n - 2].1)
                    || out.path.iter().any(|u| cfg.governing_norm(u).map_or(true, |v| v > current));
                state.verdict = if growing { Verdict::BlowupDetected } else { Verdict::ContractionFailed };
                return Ok(state);
            }
        }
    }
    state.t = cfg.t_horizon;
    state.verdict = Verdict::HorizonReached;
    Ok(state)
}

#[cfg(test)]
mod tests;
