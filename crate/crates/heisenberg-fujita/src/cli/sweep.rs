//! Phase-diagram sweeps over `(p, γ)` and their tabular outputs.

use super::config::RunConfig;
use super::run::{fujita_exponent, hardy_threshold, run_cell, CellVerdict, PhaseCell};
use crate::error::{Error, Result};
use crate::field::HeatSemigroup;
use rayon::prelude::*;
use std::fmt::Write;

/// Header of the sweep CSV.
pub const SWEEP_HEADER: &str = "p,gamma,p_c,hardy_threshold,verdict,t_final,max_norm";

/// Runs every `(p, γ)` cell, γ-major in the given order, on `base.workers` threads.
///
/// A failing cell becomes `inconclusive` with the error kept in its notes.
pub fn run_sweep(ps: &[f64], gammas: &[f64], base: &RunConfig) -> Result<Vec<PhaseCell>> {
    if ps.is_empty() || gammas.is_empty() {
        return Err(Error::Argument("a sweep needs at least one p and one γ".into()));
    }
    base.geom.validate()?;
    let sg = HeatSemigroup::new(base.geom)?;
    let cells: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| ps.iter().map(move |&p| (p, g))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(base.workers.max(1))
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start {} workers: {e}", base.workers)))?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, gamma)| {
                let cfg = RunConfig { p, gamma, ..base.clone() };
                match run_cell(&cfg, &sg) {
                    Ok(run) => run.cell,
                    Err(e) => PhaseCell::failed(p, gamma, &e),
                }
            })
            .collect()
    }))
}

/// CSV with one row per cell; the Hardy threshold is left empty for γ > 0.
pub fn sweep_csv(cells: &[PhaseCell], q_dim: usize) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for c in cells {
        let hardy = if c.gamma > 0.0 { String::new() } else { format!("{:.6}", hardy_threshold(q_dim, c.gamma)) };
        let _ = writeln!(
            s,
            "{},{},{:.6},{},{},{:.6},{:.6e}",
            c.p,
            c.gamma,
            fujita_exponent(q_dim, c.gamma),
            hardy,
            c.verdict.as_str(),
            c.t_final,
            c.norms.max
        );
    }
    s
}

/// Gnuplot columns `p gamma verdict_code t_final max_norm` with the code table in the header.
pub fn emit_plotdata(cells: &[PhaseCell]) -> Result<String> {
    if cells.is_empty() {
        return Err(Error::Argument("no cells to plot".into()));
    }
    let codes: Vec<String> = CellVerdict::ALL.iter().map(|v| format!("{}={}", v.code(), v.as_str())).collect();
    let mut s = format!("# verdict codes: {}\n# p gamma verdict_code t_final max_norm\n", codes.join(" "));
    for c in cells {
        let _ = writeln!(s, "{} {} {} {:.6} {:.6e}", c.p, c.gamma, c.verdict.code(), c.t_final, c.norms.max);
    }
    Ok(s)
}

/// `(γ, p_certified, p_blowup)` for every γ ≥ 0 row with a certified cell below a blow-up cell.
pub fn sweep_inversions(cells: &[PhaseCell]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for a in cells.iter().filter(|c| c.gamma >= 0.0 && c.verdict == CellVerdict::GlobalCertified) {
        for b in cells.iter().filter(|c| c.gamma == a.gamma && c.verdict == CellVerdict::Blowup) {
            if a.p < b.p {
                out.push((a.gamma, a.p, b.p));
            }
        }
    }
    out
}
