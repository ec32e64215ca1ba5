//! Discrete heat semigroup `e^{tΔ_H}` as a direct group convolution.
//!
//! Output node η = (x, y, τ_a), source node ς = (x', y', τ_b):
//! the argument ς⁻¹∘η = (x−x', y−y', τ_a−τ_b + 2(x y' − x' y)).
//! Each source cell contributes the kernel integrated over its τ-extent,
//! read off the scaled cumulative table, so weights are non-negative and
//! telescope exactly in τ. A scalar renormalization makes the weights sum
//! to one on the unbounded lattice; mass is lost only through the box walls.

use super::{GridField, GridGeometry};
use crate::error::{Error, Result};
use crate::kernel::cumulative::{scaled_cumulative, ScaledCumulative, S_MAX};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Horizontal cutoff `R = factor·√t`; the marginal tail `e^{−R²/4t}` is below 1e-6.
pub const RADIUS_CUTOFF_FACTOR: f64 = 7.44;
const WEIGHT_FLOOR: f64 = 1e-17;
const CACHE_LIMIT_WEIGHTS: usize = 40_000_000;
const CONTRACTION_SLACK: f64 = 5e-3;

/// Banded τ-weights from one source column: `g[m]` acts at lag `k_lo + m`.
#[derive(Debug, Clone)]
struct Band {
    src: u32,
    k_lo: i32,
    start: u32,
    len: u32,
}

#[derive(Debug)]
struct StepOperator {
    bands: Vec<Vec<Band>>,
    pool: Vec<Vec<f64>>,
}

impl StepOperator {
    fn weight_count(&self) -> usize {
        self.pool.iter().map(Vec::len).sum()
    }
}

/// Per-time geometry shared by all output columns.
struct Stencil {
    offsets: Vec<(i32, i32, f64)>,
    norm: f64,
    inv_t: f64,
    h_tau: f64,
    n_tau: i32,
}

impl Stencil {
    fn new(geom: &GridGeometry, t: f64, tab: &ScaledCumulative) -> Self {
        let h = geom.h_xy();
        let radius = RADIUS_CUTOFF_FACTOR * t.sqrt();
        let reach = (radius / h).floor() as i32;
        let sqrt_t = t.sqrt();
        let mut offsets = Vec::new();
        let mut norm = 0.0;
        for di in -reach..=reach {
            for dj in -reach..=reach {
                let r = h * ((di * di + dj * dj) as f64).sqrt();
                if r <= radius {
                    let rho = r / sqrt_t;
                    norm += 2.0 * tab.half_total(rho);
                    offsets.push((di, dj, rho));
                }
            }
        }
        Self { offsets, norm, inv_t: 1.0 / t, h_tau: geom.h_tau(), n_tau: geom.n_tau as i32 }
    }

    /// Band of one (output, source) column pair, or `None` when it vanishes.
    fn band(&self, tab: &ScaledCumulative, rho: f64, shear: f64, t: f64) -> Option<(i32, Vec<f64>)> {
        let (ht, nt) = (self.h_tau, self.n_tau);
        let reach = S_MAX * t;
        let k_lo = (((-reach - shear) / ht - 0.5).floor() as i32).max(-(nt - 1));
        let k_hi = (((reach - shear) / ht + 0.5).ceil() as i32).min(nt - 1);
        if k_lo > k_hi {
            return None;
        }
        let edge = |k: i32| tab.at(rho, (((k as f64) - 0.5) * ht + shear) * self.inv_t);
        let mut lower = edge(k_lo);
        let mut w = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        for k in k_lo..=k_hi {
            let upper = edge(k + 1);
            let g = (upper - lower).max(0.0) / self.norm;
            w.push(if g < WEIGHT_FLOOR { 0.0 } else { g });
            lower = upper;
        }
        let first = w.iter().position(|&g| g > 0.0)?;
        let last = w.iter().rposition(|&g| g > 0.0)?;
        Some((k_lo + first as i32, w[first..=last].to_vec()))
    }
}

/// Heat semigroup on a fixed grid, with cached operators for repeated step sizes.
pub struct HeatSemigroup {
    geom: GridGeometry,
    cache: Mutex<HashMap<u64, Arc<StepOperator>>>,
    cached_weights: Mutex<usize>,
}

impl std::fmt::Debug for HeatSemigroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeatSemigroup").field("geom", &self.geom).finish()
    }
}

impl HeatSemigroup {
    pub fn new(geom: GridGeometry) -> Result<Self> {
        geom.validate()?;
        Ok(Self { geom, cache: Mutex::new(HashMap::new()), cached_weights: Mutex::new(0) })
    }

    pub fn geom(&self) -> &GridGeometry {
        &self.geom
    }

    fn column_bands(
        &self,
        tab: &ScaledCumulative,
        st: &Stencil,
        t: f64,
        out_col: usize,
        active: &dyn Fn(usize) -> bool,
        pool: &mut Vec<f64>,
    ) -> Vec<Band> {
        let g = &self.geom;
        let n = g.n_xy as i32;
        let (ox, oy) = ((out_col / g.n_xy) as i32, (out_col % g.n_xy) as i32);
        let (x, y) = (g.x(ox as usize), g.x(oy as usize));
        let mut bands = Vec::new();
        for &(di, dj, rho) in &st.offsets {
            let (sx, sy) = (ox - di, oy - dj);
            if sx < 0 || sy < 0 || sx >= n || sy >= n {
                continue;
            }
            let src = (sx * n + sy) as usize;
            if !active(src) {
                continue;
            }
            let (xs, ys) = (g.x(sx as usize), g.x(sy as usize));
            let shear = 2.0 * (x * ys - xs * y);
            if let Some((k_lo, w)) = st.band(tab, rho, shear, t) {
                bands.push(Band { src: src as u32, k_lo, start: pool.len() as u32, len: w.len() as u32 });
                pool.extend_from_slice(&w);
            }
        }
        bands
    }

    fn build_operator(&self, t: f64) -> StepOperator {
        let tab = scaled_cumulative();
        let st = Stencil::new(&self.geom, t, tab);
        let per_col: Vec<(Vec<Band>, Vec<f64>)> = (0..self.geom.columns())
            .into_par_iter()
            .map(|c| {
                let mut pool = Vec::new();
                let bands = self.column_bands(tab, &st, t, c, &|_| true, &mut pool);
                (bands, pool)
            })
            .collect();
        let (bands, pool) = per_col.into_iter().unzip();
        StepOperator { bands, pool }
    }

    fn cached_operator(&self, t: f64) -> Option<Arc<StepOperator>> {
        let key = t.to_bits();
        if let Some(op) = self.cache.lock().expect("cache lock").get(&key) {
            return Some(op.clone());
        }
        // Estimated size: offsets within the box times a band of a few cells.
        let h = self.geom.h_xy();
        let disc = std::f64::consts::PI * (RADIUS_CUTOFF_FACTOR * RADIUS_CUTOFF_FACTOR * t) / (h * h);
        let band = (2.0 * S_MAX * t / self.geom.h_tau()).min(2.0 * self.geom.n_tau as f64) + 2.0;
        let estimate = (disc.min(self.geom.columns() as f64) * self.geom.columns() as f64 * band) as usize;
        if estimate > CACHE_LIMIT_WEIGHTS / 4 {
            return None;
        }
        let op = Arc::new(self.build_operator(t));
        let mut total = self.cached_weights.lock().expect("cache size lock");
        if *total + op.weight_count() <= CACHE_LIMIT_WEIGHTS {
            *total += op.weight_count();
            self.cache.lock().expect("cache lock").insert(key, op.clone());
        }
        Some(op)
    }

    fn check_input(&self, u: &GridField, t: f64) -> Result<()> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Argument(format!("semigroup time must be positive, got {t}")));
        }
        if *u.geom() != self.geom {
            return Err(Error::Argument("field grid differs from the semigroup grid".into()));
        }
        u.ensure_clean()
    }

    /// Shortest step whose horizontal spread `√(2t)` resolves the grid (`h/√2`).
    ///
    /// Below it the normalized point weights collapse onto the center node and
    /// the discrete step loses most of its variance.
    pub fn resolved_step(&self) -> f64 {
        0.25 * self.geom.h_xy() * self.geom.h_xy()
    }

    /// `e^{tΔ_H} u` on the grid.
    ///
    /// Steps shorter than [`Self::resolved_step`] use `(1−θ)u + θ e^{t₀Δ}u` with
    /// `θ = t/t₀`, which keeps positivity, order, mass and the first-order generator.
    pub fn apply(&self, u: &GridField, t: f64) -> Result<GridField> {
        self.check_input(u, t)?;
        let base = self.resolved_step();
        if t >= base {
            return self.apply_direct(u, t);
        }
        let theta = t / base;
        let mut out = self.apply_direct(u, base)?.scale(theta);
        out.add_scaled(1.0 - theta, u)?;
        Ok(out)
    }

    fn apply_direct(&self, u: &GridField, t: f64) -> Result<GridField> {
        let nt = self.geom.n_tau;
        if u.is_zero() {
            return Ok(GridField::zeros(self.geom));
        }
        let src_vals = u.values();
        let active: Vec<bool> = src_vals.chunks(nt).map(|c| c.iter().any(|&v| v != 0.0)).collect();
        let mut out = vec![0.0; self.geom.len()];
        match self.cached_operator(t) {
            Some(op) => {
                out.par_chunks_mut(nt).enumerate().for_each(|(c, dst)| {
                    for b in &op.bands[c] {
                        if active[b.src as usize] {
                            let w = &op.pool[c][b.start as usize..(b.start + b.len) as usize];
                            accumulate(dst, &src_vals[b.src as usize * nt..][..nt], b.k_lo, w);
                        }
                    }
                });
            }
            None => {
                let tab = scaled_cumulative();
                let st = Stencil::new(&self.geom, t, tab);
                out.par_chunks_mut(nt).enumerate().for_each(|(c, dst)| {
                    let mut pool = Vec::new();
                    let bands = self.column_bands(tab, &st, t, c, &|s| active[s], &mut pool);
                    for b in &bands {
                        let w = &pool[b.start as usize..(b.start + b.len) as usize];
                        accumulate(dst, &src_vals[b.src as usize * nt..][..nt], b.k_lo, w);
                    }
                });
            }
        }
        let result = GridField::from_values(self.geom, out)?;
        result.ensure_clean().map_err(|_| Error::Numerical("semigroup produced non-finite values".into()))?;
        let (sin, sout) = (u.sup_abs(), result.sup_abs());
        if sout > sin * (1.0 + CONTRACTION_SLACK) {
            return Err(Error::Numerical(format!("semigroup expanded the sup norm: {sin:e} → {sout:e}")));
        }
        Ok(result)
    }

    /// `e^{tΔ_H} u` and the fraction of mass lost through the walls (u ≥ 0).
    pub fn apply_with_leakage(&self, u: &GridField, t: f64) -> Result<(GridField, f64)> {
        let out = self.apply(u, t)?;
        let m_in = u.mass();
        let leak = if m_in > 0.0 { (1.0 - out.mass() / m_in).max(0.0) } else { 0.0 };
        Ok((out, leak))
    }

    /// Row sums of the operator, i.e. `e^{tΔ}1`.
    pub fn apply_to_ones(&self, t: f64) -> Result<GridField> {
        self.apply(&GridField::from_values(self.geom, vec![1.0; self.geom.len()])?, t)
    }
}

#[inline]
fn accumulate(dst: &mut [f64], src: &[f64], k_lo: i32, w: &[f64]) {
    let nt = dst.len() as i32;
    for (m, &g) in w.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        let k = k_lo + m as i32;
        let a0 = k.max(0);
        let a1 = nt.min(nt + k);
        if a0 >= a1 {
            continue;
        }
        let d = &mut dst[a0 as usize..a1 as usize];
        let s = &src[(a0 - k) as usize..(a1 - k) as usize];
        for (o, &v) in d.iter_mut().zip(s) {
            *o += g * v;
        }
    }
}

/// Max interior deviation between `e^{tΔ}e^{sΔ}u` and `e^{(s+t)Δ}u`, relative to the latter's sup.
pub fn semigroup_compose_check(u: &GridField, s: f64, t: f64, sg: &HeatSemigroup) -> Result<f64> {
    let two = sg.apply(&sg.apply(u, s)?, t)?;
    let one = sg.apply(u, s + t)?;
    let scale = one.sup_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let g = sg.geom();
    let (lx, lt) = (0.5 * g.half_width_xy, 0.5 * g.half_width_tau);
    let mut worst = 0.0_f64;
    for idx in 0..g.len() {
        let (ix, iy, it) = g.unravel(idx);
        if g.x(ix).abs() <= lx && g.x(iy).abs() <= lx && g.tau(it).abs() <= lt {
            worst = worst.max((two.values()[idx] - one.values()[idx]).abs() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample;
    use crate::hgroup::koranyi_norm;

    fn geom() -> GridGeometry {
        GridGeometry::new(4.0, 12.0, 20, 24, true).unwrap()
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small() -> GridGeometry {
            GridGeometry::new(3.0, 9.0, 8, 10, true).unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn positive_sub_markov_and_linear(
                a in prop::collection::vec(0.0..5.0f64, 640),
                b in prop::collection::vec(0.0..5.0f64, 640),
                t in 0.005..1.5f64,
            ) {
                let sg = HeatSemigroup::new(small()).unwrap();
                let (u, v) = (GridField::from_values(small(), a).unwrap(), GridField::from_values(small(), b).unwrap());
                let (pu, pv) = (sg.apply(&u, t).unwrap(), sg.apply(&v, t).unwrap());
                prop_assert!(pu.min() >= 0.0);
                prop_assert!(pu.sup_abs() <= u.sup_abs() * (1.0 + 1e-12));
                prop_assert!(pu.mass() <= u.mass() * (1.0 + 1e-12));
                let sum = sg.apply(&u.zip_with(&v, |x, y| 2.0 * x + y).unwrap(), t).unwrap();
                let expected = pu.zip_with(&pv, |x, y| 2.0 * x + y).unwrap();
                let gap = sum.zip_with(&expected, |x, y| x - y).unwrap().sup_abs();
                prop_assert!(gap <= 1e-12 * expected.sup_abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let sg = HeatSemigroup::new(geom()).unwrap();
        let z = GridField::zeros(geom());
        assert!(sg.apply(&z, 0.3).unwrap().is_zero());
        assert_eq!(semigroup_compose_check(&z, 0.5, 0.5, &sg).unwrap(), 0.0);
    }

    #[test]
    fn ones_stay_one_in_the_interior() {
        let g = GridGeometry::new(6.0, 36.0, 24, 36, true).unwrap();
        let sg = HeatSemigroup::new(g).unwrap();
        let out = sg.apply_to_ones(0.05).unwrap();
        assert!(out.sup_abs() <= 1.0 + 1e-12);
        let c = g.index(12, 12, 18);
        assert!((out.values()[c] - 1.0).abs() < 5e-3, "{}", out.values()[c]);
    }

    #[test]
    fn tiny_time_is_nearly_the_identity() {
        let sg = HeatSemigroup::new(geom()).unwrap();
        let u = sample(|p| (-koranyi_norm(p).powi(2)).exp(), &geom()).unwrap();
        let diff = |t: f64| u.zip_with(&sg.apply(&u, t).unwrap(), |a, b| a - b).unwrap().sup_abs();
        let (d1, d2) = (diff(1e-6), diff(2e-6));
        assert!(d1 < 1e-4, "{d1}");
        assert!((d2 / d1 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn horizontal_variance_grows_like_two_t() {
        let g = GridGeometry::new(4.0, 12.0, 21, 24, true).unwrap();
        let sg = HeatSemigroup::new(g).unwrap();
        let (ci, ct) = (10, 12);
        let mut v = vec![0.0; g.len()];
        v[g.index(ci, ci, ct)] = 1.0;
        let delta = GridField::from_values(g, v).unwrap();
        let x0 = g.x(ci);
        for t in [0.2 * sg.resolved_step(), 0.7 * sg.resolved_step(), 2.0 * sg.resolved_step(), 0.3] {
            let out = sg.apply(&delta, t).unwrap();
            let var: f64 = (0..g.len()).map(|i| (g.node(i).x[0] - x0).powi(2) * out.values()[i]).sum::<f64>()
                / out.values().iter().sum::<f64>();
            assert!((var / (2.0 * t) - 1.0).abs() < 0.02, "t = {t}: variance {var}");
        }
    }

    #[test]
    fn positivity_and_order_are_preserved() {
        let sg = HeatSemigroup::new(geom()).unwrap();
        let u = sample(|p| (-(p.x[0] - 0.5).powi(2) - p.tau.abs()).exp(), &geom()).unwrap();
        let v = u.map(|a| a + 0.1);
        for t in [0.05, 0.7] {
            let (pu, pv) = (sg.apply(&u, t).unwrap(), sg.apply(&v, t).unwrap());
            assert!(pu.min() >= 0.0);
            assert!(pu.values().iter().zip(pv.values()).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn cached_and_streamed_operators_agree() {
        let sg = HeatSemigroup::new(geom()).unwrap();
        let u = sample(|p| (-koranyi_norm(p).powi(2)).exp(), &geom()).unwrap();
        let a = sg.apply(&u, 0.2).unwrap();
        let tab = scaled_cumulative();
        let st = Stencil::new(&geom(), 0.2, tab);
        let nt = geom().n_tau;
        let mut out = vec![0.0; geom().len()];
        for (c, dst) in out.chunks_mut(nt).enumerate() {
            let mut pool = Vec::new();
            for b in sg.column_bands(tab, &st, 0.2, c, &|_| true, &mut pool) {
                let w = &pool[b.start as usize..(b.start + b.len) as usize];
                accumulate(dst, &u.values()[b.src as usize * nt..][..nt], b.k_lo, w);
            }
        }
        assert_eq!(a.values(), &out[..]);
    }
}
