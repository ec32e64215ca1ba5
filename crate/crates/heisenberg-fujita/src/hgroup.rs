//! Heisenberg group algebra on H^N = R^N x R^N x R.
//!
//! Group law: (x,y,τ)∘(x̃,ỹ,τ̃) = (x+x̃, y+ỹ, τ+τ̃+2(x·ỹ − x̃·y)).

use crate::error::{Error, Result};

/// Heisenberg index and the matching homogeneous dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupParams {
    n: usize,
}

impl GroupParams {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("Heisenberg index must be positive".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension, always `2n + 2`.
    pub fn q(&self) -> usize {
        2 * self.n + 2
    }

    /// Volume factor of the dilation `δ_r`: `r^Q`.
    pub fn volume_factor(&self, r: f64) -> f64 {
        r.powi(self.q() as i32)
    }
}

/// A point η = (x, y, τ) of H^N.
#[derive(Debug, Clone, PartialEq)]
pub struct GPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
}

impl GPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, tau: f64) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::Argument(format!(
                "x and y must have the same positive length (got {} and {})",
                x.len(),
                y.len()
            )));
        }
        if !(x.iter().chain(y.iter()).all(|v| v.is_finite()) && tau.is_finite()) {
            return Err(Error::Argument("point components must be finite".into()));
        }
        Ok(Self { x, y, tau })
    }

    /// Convenience constructor for H^1.
    pub fn h1(x: f64, y: f64, tau: f64) -> Self {
        Self { x: vec![x], y: vec![y], tau }
    }

    pub fn identity(n: usize) -> Self {
        Self { x: vec![0.0; n], y: vec![0.0; n], tau: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Squared modulus of the horizontal part, |x|² + |y|².
    pub fn horizontal_sq(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|v| v * v).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.tau == 0.0 && self.x.iter().chain(self.y.iter()).all(|&v| v == 0.0)
    }
}

fn symplectic(a: &GPoint, b: &GPoint) -> f64 {
    a.x.iter().zip(&b.y).map(|(p, q)| p * q).sum::<f64>() - b.x.iter().zip(&a.y).map(|(p, q)| p * q).sum::<f64>()
}

fn same_dim(a: &GPoint, b: &GPoint) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Argument(format!("dimension mismatch: H^{} vs H^{}", a.dim(), b.dim())));
    }
    Ok(())
}

pub fn compose(a: &GPoint, b: &GPoint) -> Result<GPoint> {
    same_dim(a, b)?;
    Ok(GPoint {
        x: a.x.iter().zip(&b.x).map(|(p, q)| p + q).collect(),
        y: a.y.iter().zip(&b.y).map(|(p, q)| p + q).collect(),
        tau: a.tau + b.tau + 2.0 * symplectic(a, b),
    })
}

pub fn inverse(a: &GPoint) -> GPoint {
    GPoint { x: a.x.iter().map(|v| -v).collect(), y: a.y.iter().map(|v| -v).collect(), tau: -a.tau }
}

/// Anisotropic dilation δ_r(x,y,τ) = (rx, ry, r²τ).
pub fn dilate(r: f64, a: &GPoint) -> Result<GPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Argument(format!("dilation factor must be positive, got {r}")));
    }
    Ok(GPoint { x: a.x.iter().map(|v| r * v).collect(), y: a.y.iter().map(|v| r * v).collect(), tau: r * r * a.tau })
}

/// Korányi gauge from the horizontal squared modulus and τ.
#[inline]
pub fn koranyi_from_parts(horizontal_sq: f64, tau: f64) -> f64 {
    (horizontal_sq * horizontal_sq + tau * tau).sqrt().sqrt()
}

/// Korányi norm [(|x|²+|y|²)² + τ²]^{1/4}.
pub fn koranyi_norm(a: &GPoint) -> f64 {
    koranyi_from_parts(a.horizontal_sq(), a.tau)
}

/// The equivalent norm (|x|² + |y|² + |τ|)^{1/2}.
pub fn simple_norm(a: &GPoint) -> f64 {
    (a.horizontal_sq() + a.tau.abs()).sqrt()
}

/// Left-invariant distance d(a, b) = |b⁻¹∘a|.
pub fn left_distance(a: &GPoint, b: &GPoint) -> Result<f64> {
    Ok(koranyi_norm(&compose(&inverse(b), a)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: &GPoint, b: &GPoint, tol: f64) -> bool {
        let scale = 1.0 + koranyi_norm(a).powi(2) + koranyi_norm(b).powi(2);
        a.x.iter().zip(&b.x).chain(a.y.iter().zip(&b.y)).all(|(p, q)| (p - q).abs() <= tol * scale)
            && (a.tau - b.tau).abs() <= tol * scale
    }

    #[test]
    fn compose_examples() {
        let e = GPoint::identity(1);
        let p = GPoint::h1(0.3, -1.2, 4.0);
        assert_eq!(compose(&e, &p).unwrap(), p);
        assert_eq!(compose(&GPoint::h1(1.0, 0.0, 0.0), &GPoint::h1(0.0, 1.0, 0.0)).unwrap(), GPoint::h1(1.0, 1.0, 2.0));
        assert_eq!(
            compose(&GPoint::h1(0.0, 1.0, 0.0), &GPoint::h1(1.0, 0.0, 0.0)).unwrap(),
            GPoint::h1(1.0, 1.0, -2.0)
        );
    }

    #[test]
    fn compose_rejects_mixed_dimensions() {
        let a = GPoint::identity(1);
        let b = GPoint::identity(2);
        assert!(matches!(compose(&a, &b), Err(Error::Argument(_))));
        assert!(left_distance(&a, &b).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse(&GPoint::identity(1)), GPoint::identity(1));
        assert_eq!(inverse(&GPoint::h1(1.0, 2.0, 3.0)), GPoint::h1(-1.0, -2.0, -3.0));
        let p = GPoint::h1(1.0, 0.0, 5.0);
        assert!(compose(&inverse(&p), &p).unwrap().is_identity());
    }

    #[test]
    fn dilation_examples() {
        assert_eq!(dilate(2.0, &GPoint::h1(1.0, 1.0, 1.0)).unwrap(), GPoint::h1(2.0, 2.0, 4.0));
        let p = GPoint::h1(0.7, -0.1, 2.5);
        assert_eq!(dilate(1.0, &p).unwrap(), p);
        assert!(dilate(0.0, &p).is_err());
        assert!(dilate(-1.0, &p).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(koranyi_norm(&GPoint::identity(1)), 0.0);
        assert_eq!(koranyi_norm(&GPoint::h1(1.0, 0.0, 0.0)), 1.0);
        assert_eq!(koranyi_norm(&GPoint::h1(0.0, 0.0, 4.0)), 2.0);
        assert_eq!(simple_norm(&GPoint::identity(1)), 0.0);
        assert_eq!(simple_norm(&GPoint::h1(0.0, 0.0, 4.0)), 2.0);
    }

    #[test]
    fn distance_examples() {
        let a = GPoint::h1(0.4, 1.5, -2.0);
        assert_eq!(left_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(left_distance(&a, &GPoint::identity(1)).unwrap(), koranyi_norm(&a));
    }

    #[test]
    fn haar_scaling_of_boxes() {
        let g = GroupParams::new(1).unwrap();
        assert_eq!(g.q(), 4);
        let sides = [0.5, 1.5, 2.0];
        let r = 1.7_f64;
        let dilated = (r * sides[0]) * (r * sides[1]) * (r * r * sides[2]);
        let vol: f64 = sides.iter().product();
        assert!((dilated - g.volume_factor(r) * vol).abs() < 1e-12 * dilated);
        assert!(GroupParams::new(0).is_err());
        assert_eq!(GroupParams::new(3).unwrap().q(), 8);
    }

    #[test]
    fn norm_equivalence_constants_are_bounded() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for _ in 0..10_000 {
            let p = GPoint::h1(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-25.0..25.0));
            let r = koranyi_norm(&p) / simple_norm(&p);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        // On H^1 the ratio lies in [2^{-1/2}, 1] exactly.
        assert!(lo >= 2f64.powf(-0.5) - 1e-12 && hi <= 1.0 + 1e-12, "ratio range [{lo}, {hi}]");
    }

    fn pt(n: usize) -> impl Strategy<Value = GPoint> {
        (prop::collection::vec(-10.0..10.0f64, n), prop::collection::vec(-10.0..10.0f64, n), -50.0..50.0f64)
            .prop_map(|(x, y, tau)| GPoint { x, y, tau })
    }

    proptest! {
        #[test]
        fn associativity(a in pt(2), b in pt(2), c in pt(2)) {
            let l = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let r = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            prop_assert!(close(&l, &r, 1e-12));
        }

        #[test]
        fn inverse_cancels(a in pt(3)) {
            prop_assert!(close(&compose(&inverse(&a), &a).unwrap(), &GPoint::identity(3), 1e-14));
        }

        #[test]
        fn dilation_is_an_automorphism(a in pt(1), b in pt(1), r in 0.05..20.0f64) {
            let l = dilate(r, &compose(&a, &b).unwrap()).unwrap();
            let rr = compose(&dilate(r, &a).unwrap(), &dilate(r, &b).unwrap()).unwrap();
            prop_assert!(close(&l, &rr, 1e-12 * r * r));
            let back = dilate(1.0 / r, &dilate(r, &a).unwrap()).unwrap();
            prop_assert!(close(&back, &a, 1e-12));
        }

        #[test]
        fn norm_symmetry_and_homogeneity(a in pt(2), r in 0.05..20.0f64) {
            prop_assert_eq!(koranyi_norm(&inverse(&a)), koranyi_norm(&a));
            let k = koranyi_norm(&a);
            prop_assert!((koranyi_norm(&dilate(r, &a).unwrap()) - r * k).abs() <= 1e-12 * r * k.max(1e-300));
            let s = simple_norm(&a);
            prop_assert!((simple_norm(&dilate(r, &a).unwrap()) - r * s).abs() <= 1e-12 * r * s.max(1e-300));
        }

        #[test]
        fn triangle_inequality(a in pt(1), b in pt(1), c in pt(1)) {
            let ac = left_distance(&a, &c).unwrap();
            let ab = left_distance(&a, &b).unwrap();
            let bc = left_distance(&b, &c).unwrap();
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12) + 1e-12);
        }
    }
}
