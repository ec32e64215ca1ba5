use super::{KernelBounds, KernelEvaluator, KernelQuadratureSpec};
use crate::error::{Error, Result};
use crate::hgroup::{koranyi_from_parts, GPoint};
use rayon::prelude::*;

/// Sampled h_t on a (|x|, τ) lattice; |x| is the joint horizontal modulus.
#[derive(Debug, Clone)]
pub struct KernelTable {
    pub n_heis: usize,
    pub t: f64,
    pub radial_nodes: Vec<f64>,
    pub tau_nodes: Vec<f64>,
    /// Row-major in (radial, τ).
    values: Vec<f64>,
    pub quad: KernelQuadratureSpec,
    /// Envelope used for out-of-hull queries.
    pub envelope: KernelBounds,
    /// Set when values increase in |x| at τ = 0 by more than 1e-10.
    pub monotonicity_violation: bool,
}

/// Value with a flag telling whether the envelope replaced interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolated {
    pub value: f64,
    pub extrapolated: bool,
}

impl KernelTable {
    pub fn value(&self, i_radial: usize, i_tau: usize) -> f64 {
        self.values[i_radial * self.tau_nodes.len() + i_tau]
    }

    fn folds_tau(&self) -> bool {
        self.tau_nodes.first().is_some_and(|&t0| t0 >= 0.0)
    }
}

fn check_sorted(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() || v.windows(2).any(|w| !(w[0] < w[1])) || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Argument(format!("{name} must be non-empty, finite and strictly increasing")));
    }
    Ok(())
}

/// Table of h_t through the λ-quadrature `quad`.
pub fn build_table(t: f64, radial_nodes: &[f64], tau_nodes: &[f64], quad: KernelQuadratureSpec) -> Result<KernelTable> {
    let ev = KernelEvaluator::new(1, t, quad)?;
    let origin = ev.value(0.0, 0.0);
    let tab = build_table_with(t, radial_nodes, tau_nodes, quad, |r, tau| Ok(ev.value(r * r, tau)))?;
    clamp_noise(tab, origin)
}

/// Table filled from an arbitrary evaluator (used for stubs in tests).
pub fn build_table_with<F>(
    t: f64,
    radial_nodes: &[f64],
    tau_nodes: &[f64],
    quad: KernelQuadratureSpec,
    f: F,
) -> Result<KernelTable>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    if !(t > 0.0) {
        return Err(Error::Argument(format!("table time must be positive, got {t}")));
    }
    check_sorted("radial_nodes", radial_nodes)?;
    check_sorted("tau_nodes", tau_nodes)?;
    if radial_nodes[0] < 0.0 {
        return Err(Error::Argument("radial nodes must be non-negative".into()));
    }
    let nt = tau_nodes.len();
    let rows: Vec<Vec<f64>> = radial_nodes
        .par_iter()
        .map(|&r| tau_nodes.iter().map(|&tau| f(r, tau)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let mut monotonicity_violation = false;
    if let Some(k0) = tau_nodes.iter().position(|&tau| tau == 0.0) {
        for i in 1..radial_nodes.len() {
            if values[i * nt + k0] > values[(i - 1) * nt + k0] + 1e-10 {
                monotonicity_violation = true;
            }
        }
    }
    Ok(KernelTable {
        n_heis: 1,
        t,
        radial_nodes: radial_nodes.to_vec(),
        tau_nodes: tau_nodes.to_vec(),
        values,
        quad,
        envelope: KernelBounds::reference(),
        monotonicity_violation,
    })
}

fn clamp_noise(mut tab: KernelTable, origin: f64) -> Result<KernelTable> {
    let floor = 1e-10 * origin;
    for v in tab.values.iter_mut() {
        if *v < 0.0 {
            if *v < -floor {
                return Err(Error::Numerical(format!("kernel value {v:e} below the clamp floor −{floor:e}")));
            }
            *v = 0.0;
        }
    }
    Ok(tab)
}

fn bracket(nodes: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = nodes.len();
    if x < nodes[0] || x > nodes[n - 1] {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let hi = nodes.partition_point(|&v| v <= x).min(n - 1).max(1);
    let lo = hi - 1;
    Some((lo, (x - nodes[lo]) / (nodes[hi] - nodes[lo])))
}

/// Bilinear interpolation in (|x|, τ); envelope value outside the hull.
pub fn interpolate(table: &KernelTable, p: &GPoint) -> Interpolated {
    let r2 = p.horizontal_sq();
    let r = r2.sqrt();
    let tau = if table.folds_tau() { p.tau.abs() } else { p.tau };
    match (bracket(&table.radial_nodes, r), bracket(&table.tau_nodes, tau)) {
        (Some((i, a)), Some((k, b))) => {
            let nt = table.tau_nodes.len();
            let i1 = (i + 1).min(table.radial_nodes.len() - 1);
            let k1 = (k + 1).min(nt - 1);
            let v = |ii: usize, kk: usize| table.values[ii * nt + kk];
            let value = v(i, k) * (1.0 - a) * (1.0 - b)
                + v(i1, k) * a * (1.0 - b)
                + v(i, k1) * (1.0 - a) * b
                + v(i1, k1) * a * b;
            Interpolated { value, extrapolated: false }
        }
        _ => {
            let k = koranyi_from_parts(r2, p.tau);
            Interpolated { value: table.envelope.upper(table.t, k * k), extrapolated: true }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> KernelQuadratureSpec {
        KernelQuadratureSpec::auto(1.0, 8.0)
    }

    #[test]
    fn single_node_table_is_origin_value() {
        let tab = build_table(1.0, &[0.0], &[0.0], quad()).unwrap();
        assert_eq!(tab.value(0, 0), KernelEvaluator::new(1, 1.0, quad()).unwrap().value(0.0, 0.0));
        assert_eq!(interpolate(&tab, &GPoint::identity(1)).value, tab.value(0, 0));
    }

    #[test]
    fn nodes_are_reproduced_bit_exactly() {
        let r = [0.0, 0.5, 1.0, 2.0];
        let tau = [0.0, 1.0, 3.0, 8.0];
        let tab = build_table(1.0, &r, &tau, quad()).unwrap();
        assert!(!tab.monotonicity_violation);
        for (i, &ri) in r.iter().enumerate() {
            for (k, &tk) in tau.iter().enumerate() {
                let got = interpolate(&tab, &GPoint::h1(ri, 0.0, tk));
                assert!(!got.extrapolated);
                assert_eq!(got.value, tab.value(i, k));
                assert_eq!(interpolate(&tab, &GPoint::h1(0.0, ri, -tk)).value, tab.value(i, k));
            }
        }
    }

    #[test]
    fn midpoint_of_equal_values() {
        let tab = build_table_with(1.0, &[0.0, 1.0], &[0.0, 1.0], quad(), |_, _| Ok(0.25)).unwrap();
        assert_eq!(interpolate(&tab, &GPoint::h1(0.5, 0.0, 0.5)).value, 0.25);
    }

    #[test]
    fn out_of_hull_uses_envelope() {
        let tab = build_table(1.0, &[0.0, 1.0], &[0.0, 1.0], quad()).unwrap();
        let p = GPoint::h1(3.0, 0.0, 0.0);
        let got = interpolate(&tab, &p);
        assert!(got.extrapolated);
        assert_eq!(got.value, tab.envelope.upper(1.0, 9.0));
    }

    #[test]
    fn increasing_stub_raises_monotonicity_flag() {
        let tab = build_table_with(1.0, &[0.0, 1.0, 2.0], &[0.0], quad(), |r, _| Ok(r)).unwrap();
        assert!(tab.monotonicity_violation);
    }

    #[test]
    fn unsorted_nodes_are_rejected() {
        assert!(build_table(1.0, &[1.0, 0.0], &[0.0], quad()).is_err());
    }

    #[test]
    fn dump_has_one_row_per_node() {
        let tab = build_table(0.5, &[0.0, 1.0], &[0.0, 2.0, 4.0], KernelQuadratureSpec::auto(0.5, 4.0)).unwrap();
        let s = super::super::dump_table(&tab);
        assert_eq!(s.lines().filter(|l| !l.starts_with('#')).count(), 6);
        assert!(s.starts_with("# t 0.5\n# Q 4\n"));
    }
}
