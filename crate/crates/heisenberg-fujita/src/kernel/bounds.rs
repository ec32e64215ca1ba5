use crate::error::{Error, Result};
use crate::hgroup::{dilate, koranyi_norm, GPoint};

/// Two-sided Gaussian envelope in the Korányi gauge:
/// `lower_prefactor·t^{−Q/2}e^{−lower_rate|η|²/t} ≤ h_t(η) ≤ upper_prefactor·t^{−Q/2}e^{−upper_rate|η|²/t}`.
///
/// The constants are empirical fits, not sharp values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBounds {
    pub q: usize,
    pub lower_prefactor: f64,
    pub lower_rate: f64,
    pub upper_rate: f64,
    pub upper_prefactor: f64,
}

impl KernelBounds {
    /// Constants fitted on H^1 over `|η|²/t ∈ [0, 20]`, `t ∈ [0.25, 4]`.
    pub fn reference() -> Self {
        Self {
            q: 4,
            lower_prefactor: 0.015065778825525733,
            lower_rate: 0.7446074183294509,
            upper_rate: 0.23497590019751205,
            upper_prefactor: 0.017387441274457724,
        }
    }

    pub fn upper(&self, t: f64, koranyi_sq: f64) -> f64 {
        self.upper_prefactor * t.powf(-(self.q as f64) / 2.0) * (-self.upper_rate * koranyi_sq / t).exp()
    }

    pub fn lower(&self, t: f64, koranyi_sq: f64) -> f64 {
        self.lower_prefactor * t.powf(-(self.q as f64) / 2.0) * (-self.lower_rate * koranyi_sq / t).exp()
    }

    /// Whether `value` lies inside the envelope at `(t, |η|²)`, with relative slack.
    pub fn contains(&self, t: f64, koranyi_sq: f64, value: f64, rel_slack: f64) -> bool {
        value <= self.upper(t, koranyi_sq) * (1.0 + rel_slack) && value >= self.lower(t, koranyi_sq) * (1.0 - rel_slack)
    }
}

/// Slope fits use samples with `|η|²/t` at least this large.
const SLOPE_MIN_RATIO: f64 = 1.0;
const RATE_MARGIN: f64 = 0.1;
const PREFACTOR_MARGIN: f64 = 1.05;

/// Fit the envelope constants over the product of `times` and `sample_points`.
///
/// Sample points are given at unit time and dilated by `√t` for each time,
/// so every time sees the same range of `|η|²/t`.
pub fn fit_bounds<K>(times: &[f64], sample_points: &[GPoint], kernel: K) -> Result<KernelBounds>
where
    K: Fn(f64, &GPoint) -> Result<f64>,
{
    let n_samples = times.len() * sample_points.len();
    if n_samples < 100 {
        return Err(Error::Argument(format!("need at least 100 (t, η) samples, got {n_samples}")));
    }
    let q = 2 * sample_points[0].dim() + 2;
    let mut samples = Vec::with_capacity(n_samples);
    for &t in times {
        for p0 in sample_points {
            let p = dilate(t.sqrt(), p0)?;
            let k = koranyi_norm(&p);
            let y = kernel(t, &p)? * t.powf(q as f64 / 2.0);
            samples.push((k * k / t, y));
        }
    }
    let max_ratio = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if max_ratio < 10.0 * SLOPE_MIN_RATIO {
        return Err(Error::Argument(format!("samples reach only |η|²/t = {max_ratio}")));
    }
    let y0 = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    if !(y0 > 0.0) {
        return Err(Error::Numerical("kernel samples are not positive".into()));
    }
    let (mut min_slope, mut max_slope) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(s, y) in samples.iter().filter(|s| s.0 >= SLOPE_MIN_RATIO) {
        if !(y > 0.0) {
            return Err(Error::Numerical(format!("non-positive kernel value at |η|²/t = {s}")));
        }
        let slope = (y0 / y).ln() / s;
        min_slope = min_slope.min(slope);
        max_slope = max_slope.max(slope);
    }
    let upper_rate = (1.0 - RATE_MARGIN) * min_slope;
    let lower_rate = (1.0 + RATE_MARGIN) * max_slope;
    if !(upper_rate > 0.0) || !upper_rate.is_finite() || !lower_rate.is_finite() {
        return Err(Error::Numerical(format!(
            "envelope unsatisfiable: fitted decay slope {min_slope} is not positive"
        )));
    }
    let upper_prefactor =
        PREFACTOR_MARGIN * samples.iter().map(|&(s, y)| y * (upper_rate * s).exp()).fold(0.0, f64::max);
    let lower_prefactor =
        samples.iter().map(|&(s, y)| y * (lower_rate * s).exp()).fold(f64::INFINITY, f64::min) / PREFACTOR_MARGIN;
    if !(lower_prefactor > 0.0) {
        return Err(Error::Numerical("lower envelope prefactor is not positive".into()));
    }
    Ok(KernelBounds { q, lower_prefactor, lower_rate, upper_rate, upper_prefactor })
}

/// Points with `|η|²_H/t0` spread over `[0, max_ratio]` and all directions
/// between the horizontal plane and the τ-axis (H^1).
pub fn envelope_sample_points(t0: f64, count: usize, max_ratio: f64, phase: f64) -> Vec<GPoint> {
    (0..count)
        .map(|i| {
            let u = ((i as f64 + phase) * 0.618_033_988_749_895).fract();
            let v = ((i as f64 + phase) * 0.754_877_666_246_692_7).fract();
            let w = ((i as f64 + phase) * 0.569_840_290_998_053_3).fract();
            let k2 = max_ratio * t0 * (i as f64 + 0.5) / count as f64;
            let theta = std::f64::consts::FRAC_PI_2 * u;
            let r2 = k2 * theta.cos();
            let tau = k2 * theta.sin() * if v < 0.5 { 1.0 } else { -1.0 };
            let ang = 2.0 * std::f64::consts::PI * w;
            let r = r2.sqrt();
            GPoint::h1(r * ang.cos(), r * ang.sin(), tau)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_is_rejected() {
        let pts = envelope_sample_points(1.0, 120, 20.0, 0.0);
        let r = fit_bounds(&[1.0], &pts, |_, _| Ok(0.3));
        assert!(matches!(r, Err(Error::Numerical(_))), "{r:?}");
    }

    #[test]
    fn too_few_samples_is_an_argument_error() {
        let pts = envelope_sample_points(1.0, 10, 20.0, 0.0);
        assert!(matches!(fit_bounds(&[1.0], &pts, |_, _| Ok(1.0)), Err(Error::Argument(_))));
    }

    #[test]
    fn exact_gaussian_is_enveloped() {
        let pts = envelope_sample_points(1.0, 200, 20.0, 0.0);
        let g = |t: f64, p: &GPoint| {
            let k = koranyi_norm(p);
            Ok(0.02 * t.powi(-2) * (-0.3 * k * k / t).exp())
        };
        let b = fit_bounds(&[0.5, 1.0], &pts, g).unwrap();
        for p in &pts {
            let q = dilate(0.5f64.sqrt(), p).unwrap();
            let k2 = koranyi_norm(&q).powi(2);
            assert!(b.contains(0.5, k2, g(0.5, &q).unwrap(), 0.0));
        }
        assert!(b.upper_rate <= 0.3 && b.lower_rate >= 0.3);
    }
}
