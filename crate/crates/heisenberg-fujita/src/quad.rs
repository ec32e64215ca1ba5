//! Fixed quadrature rules shared by the kernel and diagnostics modules.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Integral of `f` over [a, b].
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(mid + half * z)).sum::<f64>() * half
    }

    /// Nodes and weights mapped to [a, b], appended to the given buffers.
    pub fn push_mapped(&self, a: f64, b: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&z, &w) in self.nodes.iter().zip(&self.weights) {
            xs.push(mid + half * z);
            ws.push(w * half);
        }
    }
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Composite Gauss–Legendre rule over [0, b] with equal panels.
pub fn panel_rule(b: f64, panels: usize, per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(per_panel);
    let mut xs = Vec::with_capacity(panels * per_panel);
    let mut ws = Vec::with_capacity(panels * per_panel);
    let h = b / panels as f64;
    for k in 0..panels {
        gl.push_mapped(k as f64 * h, (k + 1) as f64 * h, &mut xs, &mut ws);
    }
    (xs, ws)
}

/// Composite Gauss–Legendre rule on [a, b] with panels shrinking geometrically toward
/// the graded endpoints.
///
/// Each graded end gets `levels` panels of widths `0.4^j` of its half (60 levels reach
/// about 1e-24), so an integrable power singularity there costs at most the innermost
/// panel. Singular ends should sit at zero, where the nodes keep full relative precision.
pub fn graded_rule(
    a: f64,
    b: f64,
    grade_a: bool,
    grade_b: bool,
    per_panel: usize,
    levels: usize,
) -> (Vec<f64>, Vec<f64>) {
    const RATIO: f64 = 0.4;
    let levels = levels as i32;
    let gl = GaussLegendre::new(per_panel);
    let (mut xs, mut ws) = (Vec::new(), Vec::new());
    if !(b > a) {
        return (xs, ws);
    }
    let mut cuts = vec![a];
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    if grade_a {
        cuts.extend((1..levels).rev().map(|j| a + half * RATIO.powi(j)));
    }
    cuts.push(mid);
    if grade_b {
        cuts.extend((1..levels).map(|j| b - half * RATIO.powi(j)));
    }
    cuts.push(b);
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            gl.push_mapped(w[0], w[1], &mut xs, &mut ws);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        for n in [1, 2, 5, 8, 16] {
            let gl = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got = gl.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - exact).abs() < 1e-13, "n={n}: {got} vs {exact}");
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn panel_rule_integrates_oscillatory_cosine() {
        let (xs, ws) = panel_rule(10.0, 40, 8);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert!((got - (30.0f64).sin() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn graded_rule_handles_endpoint_singularities() {
        let (xs, ws) = graded_rule(0.0, 1.0, true, false, 12, 60);
        let (ys, vs) = graded_rule(-1.0, 0.0, false, true, 12, 60);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powf(-0.5)).sum::<f64>()
            + ys.iter().zip(&vs).map(|(y, w)| w * y.abs().powf(-0.25)).sum::<f64>();
        assert!((got - (2.0 + 4.0 / 3.0)).abs() < 1e-11, "{got}");
        let (xs, ws) = graded_rule(-1.0, 2.0, false, false, 8, 60);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x).sum();
        assert!((got - 3.0).abs() < 1e-13);
    }
}
