//! Flat `key = value` run configuration.

use crate::error::{Error, Result};
use crate::evolve::{EvolveConfig, TimeScheme};
use crate::field::GridGeometry;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Shape of the initial data before the scale `λ` is applied.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `amplitude·(1 − (|η|/R)²)²` inside the Korányi ball of radius `R`.
    Bump,
    /// `(1 + |η|)^{−Q}`.
    ProfileQDecay,
    /// `((1+x²)(1+y²)(1+τ²))^{−1/2}`.
    ProductHardy,
    /// Snapshot file written by the field module.
    CustomFile(PathBuf),
}

impl InitialData {
    pub fn label(&self) -> String {
        match self {
            InitialData::Bump => "bump".into(),
            InitialData::ProfileQDecay => "profile_Q_decay".into(),
            InitialData::ProductHardy => "product_hardy".into(),
            InitialData::CustomFile(p) => format!("custom_file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaScale {
    /// Sized by the global-existence budget when it is feasible, 1 otherwise.
    Auto,
    Fixed(f64),
}

/// Everything that determines a run; the canonical text of this struct is hashed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_heis: usize,
    pub gamma: f64,
    pub p: f64,
    pub initial_data: InitialData,
    pub amplitude: f64,
    pub bump_radius: f64,
    pub lambda_scale: LambdaScale,
    /// Hardy construction exponent; chosen inside its admissible interval when absent.
    pub q: Option<f64>,
    pub geom: GridGeometry,
    pub dt: f64,
    pub window_steps: usize,
    pub time_scheme: TimeScheme,
    pub geometric_first: f64,
    pub geometric_ratio: f64,
    pub history_depth: usize,
    pub monotone_depth: usize,
    pub t_horizon: f64,
    pub blowup_threshold: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub min_window: f64,
    pub seed: u64,
    /// Concurrent sweep cells.
    pub workers: usize,
    /// Attempt the monotone certification when the horizon is reached above threshold.
    pub certify: bool,
    /// Record the Fujita functional, which needs `0 ≤ γ < Q(p−1)`.
    pub fujita_functional: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let e = EvolveConfig::default();
        Self {
            n_heis: 1,
            gamma: 0.0,
            p: 2.0,
            initial_data: InitialData::Bump,
            amplitude: DEFAULT_AMPLITUDE,
            bump_radius: 2.0,
            lambda_scale: LambdaScale::Auto,
            q: None,
            geom: GridGeometry::desk(),
            dt: e.dt,
            window_steps: e.window_steps,
            time_scheme: e.scheme,
            geometric_first: e.geometric_first,
            geometric_ratio: e.geometric_ratio,
            history_depth: e.history_depth,
            monotone_depth: e.monotone_depth,
            t_horizon: e.t_horizon,
            blowup_threshold: e.blowup_threshold,
            picard_tol: e.picard_tol,
            picard_max: e.picard_max,
            min_window: e.min_window,
            seed: 0,
            workers: 1,
            certify: true,
            fujita_functional: false,
        }
    }
}

/// Bump height used when nothing else is configured.
pub const DEFAULT_AMPLITUDE: f64 = 50.0;

const KEYS: &[&str] = &[
    "n_heis",
    "gamma",
    "p",
    "initial_data",
    "custom_file",
    "amplitude",
    "bump_radius",
    "lambda_scale",
    "q",
    "half_width_xy",
    "half_width_tau",
    "n_xy",
    "n_tau",
    "offset",
    "dt",
    "window_steps",
    "time_scheme",
    "geometric_first",
    "geometric_ratio",
    "history_depth",
    "monotone_depth",
    "t_horizon",
    "blowup_threshold",
    "picard_tol",
    "picard_max",
    "min_window",
    "seed",
    "workers",
    "certify",
    "fujita_functional",
];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Configuration(format!("{key}: cannot parse {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Configuration(format!("{key}: expected true or false, got {v:?}"))),
    }
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Configuration(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if seen.contains(&k) {
                return Err(Error::Configuration(format!("line {}: duplicate key {k}", n + 1)));
            }
            seen.push(k);
            cfg.set(k, v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Configuration(format!("override {assignment:?} is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "n_heis" => self.n_heis = parse_num(key, v)?,
            "gamma" => self.gamma = parse_num(key, v)?,
            "p" => self.p = parse_num(key, v)?,
            "initial_data" => {
                self.initial_data = match v {
                    "bump" => InitialData::Bump,
                    "profile_Q_decay" => InitialData::ProfileQDecay,
                    "product_hardy" => InitialData::ProductHardy,
                    "custom_file" => match &self.initial_data {
                        InitialData::CustomFile(p) => InitialData::CustomFile(p.clone()),
                        _ => InitialData::CustomFile(PathBuf::new()),
                    },
                    _ => return Err(Error::Configuration(format!("unknown initial_data {v:?}"))),
                }
            }
            "custom_file" => self.initial_data = InitialData::CustomFile(PathBuf::from(v)),
            "amplitude" => self.amplitude = parse_num(key, v)?,
            "bump_radius" => self.bump_radius = parse_num(key, v)?,
            "lambda_scale" => {
                self.lambda_scale = if v == "auto" { LambdaScale::Auto } else { LambdaScale::Fixed(parse_num(key, v)?) }
            }
            "q" => self.q = if v == "auto" { None } else { Some(parse_num(key, v)?) },
            "half_width_xy" | "L" => self.geom.half_width_xy = parse_num(key, v)?,
            "half_width_tau" | "L_tau" => self.geom.half_width_tau = parse_num(key, v)?,
            "n_xy" => self.geom.n_xy = parse_num(key, v)?,
            "n_tau" => self.geom.n_tau = parse_num(key, v)?,
            "offset" => self.geom.offset = parse_bool(key, v)?,
            "dt" => self.dt = parse_num(key, v)?,
            "window_steps" => self.window_steps = parse_num(key, v)?,
            "time_scheme" => {
                self.time_scheme = match v {
                    "uniform" => TimeScheme::Uniform,
                    "geometric" => TimeScheme::Geometric,
                    _ => return Err(Error::Configuration(format!("unknown time_scheme {v:?}"))),
                }
            }
            "geometric_first" => self.geometric_first = parse_num(key, v)?,
            "geometric_ratio" => self.geometric_ratio = parse_num(key, v)?,
            "history_depth" => self.history_depth = parse_num(key, v)?,
            "monotone_depth" => self.monotone_depth = parse_num(key, v)?,
            "t_horizon" => self.t_horizon = parse_num(key, v)?,
            "blowup_threshold" => self.blowup_threshold = parse_num(key, v)?,
            "picard_tol" => self.picard_tol = parse_num(key, v)?,
            "picard_max" => self.picard_max = parse_num(key, v)?,
            "min_window" => self.min_window = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            "certify" => self.certify = parse_bool(key, v)?,
            "fujita_functional" => self.fujita_functional = parse_bool(key, v)?,
            _ => {
                return Err(Error::Configuration(format!("unknown key {key:?}; known keys: {}", KEYS.join(", "))));
            }
        }
        Ok(())
    }

    pub fn q_dim(&self) -> usize {
        2 * self.n_heis + 2
    }

    /// Rejects invalid settings before any computation.
    pub fn validate(&self) -> Result<()> {
        let q_dim = self.q_dim() as f64;
        if !(self.gamma > -2.0) || !self.gamma.is_finite() {
            return Err(Error::Configuration(format!("gamma must exceed −2, got {}", self.gamma)));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::Configuration(format!("p must exceed 1, got {}", self.p)));
        }
        if self.n_heis != 1 {
            return Err(Error::Configuration(format!("grid runs support n_heis = 1 only, got {}", self.n_heis)));
        }
        if self.fujita_functional && !(self.gamma >= 0.0 && self.gamma < q_dim * (self.p - 1.0)) {
            return Err(Error::Configuration(format!(
                "the Fujita functional needs 0 ≤ γ < Q(p−1) = {}, got γ = {}",
                q_dim * (self.p - 1.0),
                self.gamma
            )));
        }
        for (name, v) in [("amplitude", self.amplitude), ("bump_radius", self.bump_radius)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Configuration(format!("{name} must be positive, got {v}")));
            }
        }
        if let LambdaScale::Fixed(l) = self.lambda_scale {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Configuration(format!("lambda_scale must be positive or auto, got {l}")));
            }
        }
        if let Some(q) = self.q {
            if !(q > 1.0) || !(1.0 / q < 1.0 + self.gamma / q_dim) {
                return Err(Error::Configuration(format!("q = {q} must exceed 1 with 1/q < 1 + γ/Q")));
            }
        }
        if let InitialData::CustomFile(p) = &self.initial_data {
            if p.as_os_str().is_empty() {
                return Err(Error::Configuration("initial_data = custom_file needs custom_file = <path>".into()));
            }
        }
        if self.workers == 0 {
            return Err(Error::Configuration("workers must be positive".into()));
        }
        self.geom.validate()?;
        let steps = self.t_horizon / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Configuration(format!(
                "t_horizon = {} must be a multiple of dt = {}",
                self.t_horizon, self.dt
            )));
        }
        self.evolve_config().validate().map_err(|e| Error::Configuration(e.to_string()))
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            gamma: self.gamma,
            p: self.p,
            n_heis: self.n_heis,
            dt: self.dt,
            window_steps: self.window_steps,
            t_horizon: self.t_horizon,
            blowup_threshold: self.blowup_threshold,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            min_window: self.min_window,
            history_depth: self.history_depth,
            scheme: self.time_scheme,
            geometric_first: self.geometric_first,
            geometric_ratio: self.geometric_ratio,
            monotone_depth: self.monotone_depth,
            source_enabled: true,
        }
    }

    /// One `key = value` line per setting in a fixed order; parsing it gives back `self`.
    pub fn canonical_text(&self) -> String {
        let lambda = match self.lambda_scale {
            LambdaScale::Auto => "auto".to_string(),
            LambdaScale::Fixed(l) => l.to_string(),
        };
        let (data, file) = match &self.initial_data {
            InitialData::CustomFile(p) => ("custom_file".to_string(), Some(p.display().to_string())),
            other => (other.label(), None),
        };
        let scheme = match self.time_scheme {
            TimeScheme::Uniform => "uniform",
            TimeScheme::Geometric => "geometric",
        };
        let g = &self.geom;
        let mut lines = vec![
            format!("n_heis = {}", self.n_heis),
            format!("gamma = {}", self.gamma),
            format!("p = {}", self.p),
            format!("initial_data = {data}"),
        ];
        if let Some(f) = file {
            lines.push(format!("custom_file = {f}"));
        }
        lines.extend([
            format!("amplitude = {}", self.amplitude),
            format!("bump_radius = {}", self.bump_radius),
            format!("lambda_scale = {lambda}"),
            format!("q = {}", self.q.map_or("auto".to_string(), |q| q.to_string())),
            format!("half_width_xy = {}", g.half_width_xy),
            format!("half_width_tau = {}", g.half_width_tau),
            format!("n_xy = {}", g.n_xy),
            format!("n_tau = {}", g.n_tau),
            format!("offset = {}", g.offset),
            format!("dt = {}", self.dt),
            format!("window_steps = {}", self.window_steps),
            format!("time_scheme = {scheme}"),
            format!("geometric_first = {}", self.geometric_first),
            format!("geometric_ratio = {}", self.geometric_ratio),
            format!("history_depth = {}", self.history_depth),
            format!("monotone_depth = {}", self.monotone_depth),
            format!("t_horizon = {}", self.t_horizon),
            format!("blowup_threshold = {}", self.blowup_threshold),
            format!("picard_tol = {}", self.picard_tol),
            format!("picard_max = {}", self.picard_max),
            format!("min_window = {}", self.min_window),
            format!("seed = {}", self.seed),
            format!("workers = {}", self.workers),
            format!("certify = {}", self.certify),
            format!("fujita_functional = {}", self.fujita_functional),
        ]);
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }

    /// First 12 hex digits of the SHA-256 of the canonical text.
    pub fn config_hash(&self) -> String {
        hash_text(&self.canonical_text())
    }
}

/// First 12 hex digits of the SHA-256 of `text`.
pub fn hash_text(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().take(6).map(|b| format!("{b:02x}")).collect()
}
