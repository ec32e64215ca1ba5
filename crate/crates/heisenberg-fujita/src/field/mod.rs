//! Scalar fields on a uniform box grid over H¹, weights and norms.

mod semigroup;
mod snapshot;

pub use semigroup::{semigroup_compose_check, HeatSemigroup, RADIUS_CUTOFF_FACTOR};
pub use snapshot::{format_snapshot, parse_snapshot, read_snapshot, write_snapshot, SnapshotMeta};

use crate::error::{Error, Result};
use crate::hgroup::{koranyi_from_parts, GPoint};

/// Uniform box `[−L,L]² × [−L_τ,L_τ]`.
///
/// Vertex grids (`offset = false`) place nodes at both walls. Offset grids use
/// cell centers, shifted by a further half cell on odd axes so that no node
/// sits on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub half_width_xy: f64,
    pub half_width_tau: f64,
    pub n_xy: usize,
    pub n_tau: usize,
    pub offset: bool,
}

impl GridGeometry {
    pub fn new(half_width_xy: f64, half_width_tau: f64, n_xy: usize, n_tau: usize, offset: bool) -> Result<Self> {
        let g = Self { half_width_xy, half_width_tau, n_xy, n_tau, offset };
        g.validate()?;
        Ok(g)
    }

    /// The 33³ box with L = 6, L_τ = 36.
    pub fn desk() -> Self {
        Self { half_width_xy: 6.0, half_width_tau: 36.0, n_xy: 33, n_tau: 33, offset: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width_xy > 0.0 && self.half_width_tau > 0.0) {
            return Err(Error::Configuration("grid half widths must be positive".into()));
        }
        let min_n = if self.offset { 1 } else { 2 };
        if self.n_xy < min_n || self.n_tau < min_n {
            return Err(Error::Configuration(format!("grid needs at least {min_n} nodes per axis")));
        }
        Ok(())
    }

    fn spacing(&self, half: f64, n: usize) -> f64 {
        if self.offset {
            2.0 * half / n as f64
        } else {
            2.0 * half / (n - 1) as f64
        }
    }

    pub fn h_xy(&self) -> f64 {
        self.spacing(self.half_width_xy, self.n_xy)
    }

    pub fn h_tau(&self) -> f64 {
        self.spacing(self.half_width_tau, self.n_tau)
    }

    fn coord(&self, half: f64, n: usize, i: usize) -> f64 {
        let h = self.spacing(half, n);
        if self.offset {
            let shift = if n % 2 == 1 { 0.5 * h } else { 0.0 };
            -half + (i as f64 + 0.5) * h + shift
        } else {
            -half + i as f64 * h
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.coord(self.half_width_xy, self.n_xy, i)
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.coord(self.half_width_tau, self.n_tau, k)
    }

    pub fn len(&self) -> usize {
        self.n_xy * self.n_xy * self.n_tau
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn columns(&self) -> usize {
        self.n_xy * self.n_xy
    }

    pub fn cell_volume(&self) -> f64 {
        self.h_xy() * self.h_xy() * self.h_tau()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (ix * self.n_xy + iy) * self.n_tau + it
    }

    /// `(ix, iy, iτ)` of a flat index.
    #[inline]
    pub fn unravel(&self, idx: usize) -> (usize, usize, usize) {
        let it = idx % self.n_tau;
        let col = idx / self.n_tau;
        (col / self.n_xy, col % self.n_xy, it)
    }

    pub fn node(&self, idx: usize) -> GPoint {
        let (ix, iy, it) = self.unravel(idx);
        GPoint::h1(self.x(ix), self.x(iy), self.tau(it))
    }

    /// Korányi norm of a node.
    #[inline]
    pub fn node_norm(&self, idx: usize) -> f64 {
        let (ix, iy, it) = self.unravel(idx);
        let (x, y) = (self.x(ix), self.x(iy));
        koranyi_from_parts(x * x + y * y, self.tau(it))
    }

    pub fn has_origin_node(&self) -> bool {
        let on_axis = |half: f64, n: usize| (0..n).any(|i| self.coord(half, n, i) == 0.0);
        on_axis(self.half_width_xy, self.n_xy) && on_axis(self.half_width_tau, self.n_tau)
    }

    /// Korányi radius of the largest ball centered at 0 inside the box.
    pub fn inscribed_radius(&self) -> f64 {
        let lx = self.x(self.n_xy - 1).min(-self.x(0));
        let lt = self.tau(self.n_tau - 1).min(-self.tau(0));
        lx.min(lt.max(0.0).sqrt())
    }
}

/// Node values of a function on the grid, τ fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    geom: GridGeometry,
    values: Vec<f64>,
    poisoned: bool,
}

impl GridField {
    pub fn zeros(geom: GridGeometry) -> Self {
        Self { geom, values: vec![0.0; geom.len()], poisoned: false }
    }

    /// Wraps raw values; non-finite entries mark the field as poisoned.
    pub fn from_values(geom: GridGeometry, values: Vec<f64>) -> Result<Self> {
        if values.len() != geom.len() {
            return Err(Error::Argument(format!("field has {} values, geometry needs {}", values.len(), geom.len())));
        }
        let poisoned = values.iter().any(|v| !v.is_finite());
        Ok(Self { geom, values, poisoned })
    }

    pub fn geom(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned
    }

    pub fn ensure_clean(&self) -> Result<()> {
        if self.poisoned {
            return Err(Error::Poisoned("field contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn get(&self, ix: usize, iy: usize, it: usize) -> f64 {
        self.values[self.geom.index(ix, iy, it)]
    }

    /// Node-wise map; the result is re-checked for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let poisoned = values.iter().any(|v| !v.is_finite());
        Self { geom: self.geom, values, poisoned }
    }

    /// Node-wise combination with another field on the same grid.
    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.geom != other.geom {
            return Err(Error::Argument("fields live on different grids".into()));
        }
        let values: Vec<f64> = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        let poisoned = values.iter().any(|v| !v.is_finite());
        Ok(Self { geom: self.geom, values, poisoned })
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self += a·x` in place.
    pub fn add_scaled(&mut self, a: f64, x: &GridField) -> Result<()> {
        if self.geom != x.geom {
            return Err(Error::Argument("fields live on different grids".into()));
        }
        for (s, &v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
        self.poisoned = self.values.iter().any(|v| !v.is_finite());
        Ok(())
    }

    /// Riemann-sum integral.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.geom.cell_volume()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// `values[i] = f(node_i)`.
pub fn sample(f: impl Fn(&GPoint) -> f64, geom: &GridGeometry) -> Result<GridField> {
    geom.validate()?;
    let mut values = Vec::with_capacity(geom.len());
    for idx in 0..geom.len() {
        let p = geom.node(idx);
        let v = f(&p);
        if !v.is_finite() {
            return Err(Error::Poisoned(format!("non-finite sample {v} at ({}, {}, {})", p.x[0], p.y[0], p.tau)));
        }
        values.push(v);
    }
    Ok(GridField { geom: *geom, values, poisoned: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// |η|^γ
    HardyHenon,
    /// (1 + |η|)^{γ/(p−1)}
    Phi,
}

/// Exponents of the source term and the weight family built from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub gamma: f64,
    pub p: f64,
    pub kind: WeightKind,
}

impl WeightSpec {
    pub fn new(gamma: f64, p: f64, kind: WeightKind) -> Result<Self> {
        if !(gamma > -2.0) || !gamma.is_finite() {
            return Err(Error::Configuration(format!("gamma must exceed −2, got {gamma}")));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Configuration(format!("p must exceed 1, got {p}")));
        }
        Ok(Self { gamma, p, kind })
    }

    /// Unit weight: the plain sup norm.
    pub fn unit() -> Self {
        Self { gamma: 0.0, p: 2.0, kind: WeightKind::Phi }
    }

    pub fn with_kind(self, kind: WeightKind) -> Self {
        Self { kind, ..self }
    }

    #[inline]
    pub fn at_norm(&self, k: f64) -> f64 {
        match self.kind {
            WeightKind::HardyHenon => power_weight(k, self.gamma),
            WeightKind::Phi => {
                if self.gamma == 0.0 {
                    1.0
                } else {
                    (1.0 + k).powf(self.gamma / (self.p - 1.0))
                }
            }
        }
    }
}

/// `k^γ` with `k^0 = 1`.
#[inline]
pub fn power_weight(k: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        k.powf(gamma)
    }
}

/// `max_η |weight(η) u(η)|`.
pub fn weighted_sup_norm(u: &GridField, w: &WeightSpec) -> Result<f64> {
    u.ensure_clean()?;
    let g = u.geom();
    Ok(u.values().iter().enumerate().fold(0.0_f64, |m, (idx, &v)| {
        if v == 0.0 {
            m
        } else {
            m.max((w.at_norm(g.node_norm(idx)) * v).abs())
        }
    }))
}

/// Source term `|η|^γ u^p` node-wise.
pub fn apply_weight(u: &GridField, w: &WeightSpec) -> Result<GridField> {
    u.ensure_clean()?;
    let g = *u.geom();
    if w.gamma < 0.0 && g.has_origin_node() {
        return Err(Error::Configuration("γ < 0 needs a grid without an origin node".into()));
    }
    let integer_p = w.p.fract() == 0.0;
    let mut values = Vec::with_capacity(g.len());
    for (idx, &v) in u.values().iter().enumerate() {
        if v < 0.0 && !integer_p {
            return Err(Error::Domain(format!("negative value {v} with fractional p = {}", w.p)));
        }
        if v == 0.0 {
            values.push(0.0);
            continue;
        }
        let pw = if integer_p { v.powi(w.p as i32) } else { v.powf(w.p) };
        values.push(power_weight(g.node_norm(idx), w.gamma) * pw);
    }
    GridField::from_values(g, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgroup::koranyi_norm;

    fn small() -> GridGeometry {
        GridGeometry::new(2.0, 4.0, 5, 7, true).unwrap()
    }

    #[test]
    fn offset_grids_avoid_the_origin() {
        for n in 1..8 {
            let g = GridGeometry::new(3.0, 9.0, n, n, true).unwrap();
            assert!(!g.has_origin_node(), "n = {n}");
        }
        assert!(GridGeometry::new(3.0, 9.0, 5, 5, false).unwrap().has_origin_node());
        assert!(!GridGeometry::desk().has_origin_node());
        assert!(GridGeometry::new(0.0, 1.0, 3, 3, true).is_err());
        assert!(GridGeometry::new(1.0, 1.0, 0, 3, true).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = small();
        for idx in 0..g.len() {
            let (a, b, c) = g.unravel(idx);
            assert_eq!(g.index(a, b, c), idx);
        }
    }

    #[test]
    fn sample_examples() {
        let g = small();
        let ones = sample(|_| 1.0, &g).unwrap();
        assert!(ones.values().iter().all(|&v| v == 1.0));
        let prof = sample(|p| (1.0 + koranyi_norm(p)).powi(-4), &g).unwrap();
        let (idx, k) = (0..g.len()).map(|i| (i, g.node_norm(i))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(prof.values()[idx], (1.0 + k).powi(-4));
        let bad = sample(|p| if p.tau.abs() < 1.0 { f64::NAN } else { 0.0 }, &g);
        assert!(matches!(bad, Err(Error::Poisoned(_))));
    }

    #[test]
    fn poisoned_fields_are_rejected() {
        let g = small();
        let mut v = vec![0.0; g.len()];
        v[3] = f64::INFINITY;
        let f = GridField::from_values(g, v).unwrap();
        assert!(f.is_poisoned());
        assert!(weighted_sup_norm(&f, &WeightSpec::unit()).is_err());
        assert!(apply_weight(&f, &WeightSpec::unit()).is_err());
    }

    #[test]
    fn weighted_norm_examples() {
        let g = small();
        let w0 = WeightSpec::new(0.0, 2.0, WeightKind::Phi).unwrap();
        assert_eq!(weighted_sup_norm(&sample(|_| 1.0, &g).unwrap(), &w0).unwrap(), 1.0);
        let w = WeightSpec::new(1.5, 2.0, WeightKind::Phi).unwrap();
        let u = sample(|p| (1.0 + koranyi_norm(p)).powf(-1.5), &g).unwrap();
        assert!((weighted_sup_norm(&u, &w).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(weighted_sup_norm(&GridField::zeros(g), &w).unwrap(), 0.0);
    }

    #[test]
    fn source_term_examples() {
        let g = small();
        let u = sample(|p| 0.5 + p.tau.abs(), &g).unwrap();
        let plain = apply_weight(&u, &WeightSpec::new(0.0, 2.0, WeightKind::HardyHenon).unwrap()).unwrap();
        for (a, b) in plain.values().iter().zip(u.values()) {
            assert_eq!(*a, b * b);
        }
        // γ = 2 at |η| = 2 and γ = −1 at |η| = 0.5.
        let gv = GridGeometry::new(2.0, 4.0, 3, 3, false).unwrap();
        let ones = sample(|_| 1.0, &gv).unwrap();
        let hen = apply_weight(&ones, &WeightSpec::new(2.0, 3.0, WeightKind::HardyHenon).unwrap()).unwrap();
        let idx = gv.index(2, 1, 1);
        assert_eq!(gv.node_norm(idx), 2.0);
        assert!((hen.values()[idx] - 4.0).abs() < 1e-15);
        // Offset nodes (±1/4, ±1/4, ±√(3/64)) have |η| = 1/2.
        let go = GridGeometry::new(0.5, 2.0 * (3.0f64 / 64.0).sqrt(), 2, 2, true).unwrap();
        let ones = sample(|_| 1.0, &go).unwrap();
        let hardy = apply_weight(&ones, &WeightSpec::new(-1.0, 2.0, WeightKind::HardyHenon).unwrap()).unwrap();
        for &v in hardy.values() {
            assert!((v - 2.0).abs() < 1e-12, "{v}");
        }
        let vertex = sample(|_| 1.0, &GridGeometry::new(1.0, 1.0, 3, 3, false).unwrap()).unwrap();
        assert!(matches!(
            apply_weight(&vertex, &WeightSpec::new(-1.0, 2.0, WeightKind::HardyHenon).unwrap()),
            Err(Error::Configuration(_))
        ));
        let neg = sample(|_| -1.0, &g).unwrap();
        assert!(matches!(
            apply_weight(&neg, &WeightSpec::new(0.0, 1.5, WeightKind::HardyHenon).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn weight_spec_validation() {
        assert!(WeightSpec::new(-2.0, 2.0, WeightKind::Phi).is_err());
        assert!(WeightSpec::new(0.0, 1.0, WeightKind::Phi).is_err());
    }
}
