//! One phase-diagram cell: evolution, optional global certification, verdict.

use super::config::{InitialData, LambdaScale, RunConfig};
use crate::error::{Error, Result};
use crate::evolve::{
    extend_maximal, hardy_lambda_budget, henon_lambda_budget, monotone_global, Construction, GlobalConstructionParams,
    MonotoneOutcome, Verdict,
};
use crate::field::{read_snapshot, sample, GridField, HeatSemigroup};
use crate::hgroup::{koranyi_norm, GPoint};
use serde::Serialize;

/// Fujita exponent `1 + (2+γ)/Q`.
pub fn fujita_exponent(q_dim: usize, gamma: f64) -> f64 {
    1.0 + (2.0 + gamma) / q_dim as f64
}

/// Global-existence threshold `1 + (2+γ)/(Q+γ)` of the Hardy regime.
pub fn hardy_threshold(q_dim: usize, gamma: f64) -> f64 {
    1.0 + (2.0 + gamma) / (q_dim as f64 + gamma)
}

/// `γ < 0` and `p ∈ (1+(2+γ)/Q, 1+(2+γ)/(Q+γ)]`, where neither outcome is known.
pub fn in_open_gap(q_dim: usize, gamma: f64, p: f64) -> bool {
    gamma < 0.0 && p > fujita_exponent(q_dim, gamma) && p <= hardy_threshold(q_dim, gamma)
}

/// Exponent above which the matching global construction can be attempted.
pub fn global_threshold(q_dim: usize, gamma: f64) -> f64 {
    if gamma >= 0.0 {
        fujita_exponent(q_dim, gamma)
    } else {
        hardy_threshold(q_dim, gamma)
    }
}

/// Midpoint of the admissible Hardy interval `Q/(Q+γ) < q ≤ Q(p−1)/(2+γ)`, if non-empty.
pub fn default_hardy_q(q_dim: usize, gamma: f64, p: f64) -> Option<f64> {
    let q = q_dim as f64;
    let lo = q / (q + gamma);
    let hi = q * (p - 1.0) / (2.0 + gamma);
    (hi > lo).then_some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellVerdict {
    Blowup,
    GlobalCertified,
    GlobalUncertified,
    Inconclusive,
    OpenGap,
}

impl CellVerdict {
    pub const ALL: [CellVerdict; 5] = [
        CellVerdict::Blowup,
        CellVerdict::GlobalCertified,
        CellVerdict::GlobalUncertified,
        CellVerdict::Inconclusive,
        CellVerdict::OpenGap,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CellVerdict::Blowup => "blowup",
            CellVerdict::GlobalCertified => "global_certified",
            CellVerdict::GlobalUncertified => "global_uncertified",
            CellVerdict::Inconclusive => "inconclusive",
            CellVerdict::OpenGap => "open_gap",
        }
    }

    /// Integer used in plot files.
    pub fn code(&self) -> u8 {
        match self {
            CellVerdict::Blowup => 0,
            CellVerdict::GlobalCertified => 1,
            CellVerdict::GlobalUncertified => 2,
            CellVerdict::Inconclusive => 3,
            CellVerdict::OpenGap => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSummary {
    pub initial: f64,
    pub max: f64,
    pub last: f64,
    pub samples: usize,
}

impl NormSummary {
    fn from_history(history: &[(f64, f64)]) -> Self {
        Self {
            initial: history.first().map_or(0.0, |h| h.1),
            max: history.iter().map(|h| h.1).fold(0.0, f64::max),
            last: history.last().map_or(0.0, |h| h.1),
            samples: history.len(),
        }
    }
}

/// Budget constants in a serializable form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetSummary {
    pub construction: &'static str,
    pub lambda_scale: f64,
    pub capital_lambda: f64,
    pub q: Option<f64>,
    pub c0: Option<f64>,
    pub measured_lambda: f64,
    pub tail: f64,
    pub expected_exponent: f64,
    pub fitted_exponent: Option<f64>,
    pub verified: bool,
}

impl From<&GlobalConstructionParams> for BudgetSummary {
    fn from(b: &GlobalConstructionParams) -> Self {
        Self {
            construction: match b.construction {
                Construction::Henon => "henon",
                Construction::Hardy { .. } => "hardy",
            },
            lambda_scale: b.lambda_scale,
            capital_lambda: b.capital_lambda,
            q: b.q_exponent,
            c0: b.c0,
            measured_lambda: b.measured_lambda,
            tail: b.tail,
            expected_exponent: b.expected_exponent,
            fitted_exponent: b.fitted_exponent,
            verified: b.verified,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationSummary {
    pub certified: bool,
    pub depth: usize,
    /// `max_t sup|u_{n+1} − u_n|` per iteration.
    pub distances: Vec<f64>,
    pub first_violation: Option<String>,
}

impl From<&MonotoneOutcome> for CertificationSummary {
    fn from(m: &MonotoneOutcome) -> Self {
        Self {
            certified: m.certified,
            depth: m.depth,
            distances: m.distances.clone(),
            first_violation: m.first_violation.map(|v| {
                format!(
                    "{:?} at iterate {}, t = {}, node {}: {} > {}",
                    v.kind, v.iterate, v.t, v.node, v.value, v.bound
                )
            }),
        }
    }
}

/// Outcome of one `(p, γ)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub p: f64,
    pub gamma: f64,
    pub verdict: CellVerdict,
    pub t_final: f64,
    pub norms: NormSummary,
    pub budget: Option<BudgetSummary>,
    pub certification: Option<CertificationSummary>,
    /// Initial data actually evolved, e.g. `2.1e-3 × profile_Q_decay`.
    pub data: String,
    pub evolution: &'static str,
    pub leakage: f64,
    pub halvings: usize,
    pub notes: Vec<String>,
}

impl PhaseCell {
    /// A cell whose computation failed; the error text is kept as a note.
    pub fn failed(p: f64, gamma: f64, err: &Error) -> Self {
        Self {
            p,
            gamma,
            verdict: CellVerdict::Inconclusive,
            t_final: 0.0,
            norms: NormSummary { initial: 0.0, max: 0.0, last: 0.0, samples: 0 },
            budget: None,
            certification: None,
            data: String::new(),
            evolution: "failed",
            leakage: 0.0,
            halvings: 0,
            notes: vec![err.to_string()],
        }
    }
}

/// A cell together with its trajectory.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub cell: PhaseCell,
    /// `(t, governing norm)`.
    pub history: Vec<(f64, f64)>,
    pub final_field: GridField,
}

/// The configured data shape on the configured grid.
pub fn initial_shape(cfg: &RunConfig, data: &InitialData) -> Result<GridField> {
    let g = cfg.geom;
    let q_dim = cfg.q_dim() as i32;
    match data {
        InitialData::Bump => {
            let (a, r) = (cfg.amplitude, cfg.bump_radius);
            sample(
                |p| {
                    let s = koranyi_norm(p) / r;
                    if s < 1.0 {
                        a * (1.0 - s * s).powi(2)
                    } else {
                        0.0
                    }
                },
                &g,
            )
        }
        InitialData::ProfileQDecay => sample(|p| (1.0 + koranyi_norm(p)).powi(-q_dim), &g),
        InitialData::ProductHardy => sample(
            |p: &GPoint| ((1.0 + p.x[0] * p.x[0]) * (1.0 + p.y[0] * p.y[0]) * (1.0 + p.tau * p.tau)).powf(-0.5),
            &g,
        ),
        InitialData::CustomFile(path) => {
            let (u, _) = read_snapshot(path)
                .map_err(|e| Error::Configuration(format!("cannot load {}: {e}", path.display())))?;
            if *u.geom() != g {
                return Err(Error::Configuration(format!(
                    "{} was written on {:?}, the run uses {:?}",
                    path.display(),
                    u.geom(),
                    g
                )));
            }
            if u.min() < 0.0 {
                return Err(Error::Configuration(format!("{} holds negative values", path.display())));
            }
            Ok(u)
        }
    }
}

/// Profile the global construction is built on: the configured shape, or the
/// standard decaying profile of the regime when the configured shape is the bump.
fn construction_profile(cfg: &RunConfig) -> InitialData {
    match (&cfg.initial_data, cfg.gamma >= 0.0) {
        (InitialData::Bump, true) => InitialData::ProfileQDecay,
        (InitialData::Bump, false) => InitialData::ProductHardy,
        (other, _) => other.clone(),
    }
}

fn budget(cfg: &RunConfig, w0: &GridField, sg: &HeatSemigroup) -> Result<GlobalConstructionParams> {
    let e = cfg.evolve_config();
    if cfg.gamma >= 0.0 {
        henon_lambda_budget(w0, cfg.p, cfg.gamma, &e, sg)
    } else {
        let q = cfg
            .q
            .or_else(|| default_hardy_q(cfg.q_dim(), cfg.gamma, cfg.p))
            .ok_or_else(|| Error::BudgetInfeasible(format!("no admissible q at p = {}", cfg.p)))?;
        hardy_lambda_budget(w0, cfg.p, cfg.gamma, q, &e, sg)
    }
}

/// Runs one cell on a shared semigroup.
///
/// With `lambda_scale = auto` and `p` above the global threshold, the data are
/// `λ·w₀` sized by the budget; if the budget is infeasible the configured shape
/// runs unscaled. A run that reaches the horizon above threshold is certified by
/// the monotone iteration when `certify` is set.
pub fn run_cell(cfg: &RunConfig, sg: &HeatSemigroup) -> Result<CellRun> {
    cfg.validate()?;
    if *sg.geom() != cfg.geom {
        return Err(Error::Configuration("semigroup grid differs from the configured grid".into()));
    }
    let q_dim = cfg.q_dim();
    let above = cfg.p > global_threshold(q_dim, cfg.gamma);
    let mut notes = Vec::new();
    let mut params: Option<GlobalConstructionParams> = None;
    let (u0, w0, label) = match cfg.lambda_scale {
        LambdaScale::Auto if above && cfg.certify => {
            let profile = construction_profile(cfg);
            let w0 = initial_shape(cfg, &profile)?;
            match budget(cfg, &w0, sg) {
                Ok(b) => {
                    let l = b.lambda_scale;
                    params = Some(b);
                    (w0.scale(l), Some(w0), format!("{l:e} × {}", profile.label()))
                }
                Err(Error::BudgetInfeasible(msg)) => {
                    notes.push(format!("budget infeasible, running the configured data: {msg}"));
                    (initial_shape(cfg, &cfg.initial_data)?, None, cfg.initial_data.label())
                }
                Err(e) => return Err(e),
            }
        }
        LambdaScale::Auto => (initial_shape(cfg, &cfg.initial_data)?, None, cfg.initial_data.label()),
        LambdaScale::Fixed(l) => {
            let w0 = initial_shape(cfg, &cfg.initial_data)?;
            (w0.scale(l), Some(w0), format!("{l:e} × {}", cfg.initial_data.label()))
        }
    };
    let e = cfg.evolve_config();
    let state = extend_maximal(&u0, &e, sg)?;
    let mut certification = None;
    let mut verdict = match state.verdict {
        Verdict::BlowupDetected => CellVerdict::Blowup,
        Verdict::HorizonReached => CellVerdict::GlobalUncertified,
        Verdict::ContractionFailed | Verdict::Running => CellVerdict::Inconclusive,
    };
    if verdict == CellVerdict::GlobalUncertified && above && cfg.certify {
        if let Some(w0) = &w0 {
            if params.is_none() {
                match budget(cfg, w0, sg) {
                    Ok(mut b) => {
                        if let LambdaScale::Fixed(l) = cfg.lambda_scale {
                            b.lambda_scale = l;
                        }
                        params = Some(b);
                    }
                    Err(Error::BudgetInfeasible(msg)) => notes.push(format!("budget infeasible: {msg}")),
                    Err(e) => return Err(e),
                }
            }
            if let Some(b) = &params {
                let mut uniform = e.clone();
                uniform.scheme = crate::evolve::TimeScheme::Uniform;
                let outcome = monotone_global(&u0, b, &uniform, sg)?;
                if outcome.certified {
                    verdict = CellVerdict::GlobalCertified;
                }
                certification = Some(CertificationSummary::from(&outcome));
            }
        } else {
            notes.push("no construction profile for the evolved data".into());
        }
    }
    if in_open_gap(q_dim, cfg.gamma, cfg.p) {
        notes.push(format!("evolution verdict {} kept as trajectory only", verdict.as_str()));
        verdict = CellVerdict::OpenGap;
    }
    if state.leakage > 0.01 {
        notes.push(format!("wall leakage {:.3}", state.leakage));
    }
    let cell = PhaseCell {
        p: cfg.p,
        gamma: cfg.gamma,
        verdict,
        t_final: state.t,
        norms: NormSummary::from_history(&state.history),
        budget: params.as_ref().map(BudgetSummary::from),
        certification,
        data: label,
        evolution: state.verdict.as_str(),
        leakage: state.leakage,
        halvings: state.halvings,
        notes,
    };
    Ok(CellRun { cell, history: state.history, final_field: state.u })
}

/// [`run_cell`] on a freshly built semigroup.
pub fn run_single(cfg: &RunConfig) -> Result<CellRun> {
    cfg.validate()?;
    let sg = HeatSemigroup::new(cfg.geom)?;
    run_cell(cfg, &sg)
}
