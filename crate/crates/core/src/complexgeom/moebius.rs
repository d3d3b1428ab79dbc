//! Disk automorphisms in the canonical form `M(z) = e^{iθ}(z − a)/(1 − ā z)`.

use crate::error::ComplexGeomError;
use crate::scalar::{arg_2pi, unit, Cx, Real};
use num_complex::Complex;

/// A Moebius transformation of the unit disk, stored as `(θ, a)` with
/// `θ ∈ [0, 2π)` and `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius<T: Real> {
    theta: T,
    a: Cx<T>,
}

impl<T: Real> Moebius<T> {
    pub fn new(theta: T, a: Cx<T>) -> Self {
        assert!(a.norm() < T::one(), "Moebius center must satisfy |a| < 1");
        Self {
            theta: crate::scalar::mod_2pi(theta),
            a,
        }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), Complex::new(T::zero(), T::zero()))
    }

    pub fn rotation(theta: T) -> Self {
        Self::new(theta, Complex::new(T::zero(), T::zero()))
    }

    /// `F_a(z) = (z − a)/(1 − ā z)`, the rotation-free centering map.
    pub fn centering(a: Cx<T>) -> Self {
        Self::new(T::zero(), a)
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn a(&self) -> Cx<T> {
        self.a
    }

    pub fn is_identity(&self, tol: T) -> bool {
        let dt = self.theta.min(T::TAU() - self.theta);
        dt < tol && self.a.norm() < tol
    }

    /// Applies the transform. The pole `1/ā` lies outside the closed disk,
    /// so this is total on the closed disk; elsewhere division may overflow.
    pub fn apply(&self, z: Cx<T>) -> Cx<T> {
        unit(self.theta) * (z - self.a) / (Complex::new(T::one(), T::zero()) - self.a.conj() * z)
    }

    /// Like [`apply`](Self::apply) but reports a pole hit.
    pub fn checked_apply(&self, z: Cx<T>) -> Result<Cx<T>, ComplexGeomError> {
        let denom = Complex::new(T::one(), T::zero()) - self.a.conj() * z;
        if denom.norm() < T::of(1e-14) * (T::one() + z.norm()) {
            return Err(ComplexGeomError::PoleHit);
        }
        Ok(unit(self.theta) * (z - self.a) / denom)
    }

    /// Image of the point at infinity: `M(∞) = −e^{iθ}/ā`.
    pub fn apply_infinity(&self) -> Option<Cx<T>> {
        if self.a.norm() == T::zero() {
            None // infinity stays at infinity under a rotation
        } else {
            Some(-unit(self.theta) / self.a.conj())
        }
    }

    /// Matrix form `(A, B)` with `M(z) = (Az + B)/(B̄ z + Ā)`.
    fn matrix(&self) -> (Cx<T>, Cx<T>) {
        let half = unit(self.theta / T::of(2.0));
        (half, -half * self.a)
    }

    fn from_matrix(a_coef: Cx<T>, b_coef: Cx<T>) -> Self {
        let theta = arg_2pi(a_coef / a_coef.conj());
        let center = -b_coef / a_coef;
        Self::new(theta, center)
    }

    /// Group composition: `(self ∘ other)(z) = self(other(z))`.
    pub fn compose(&self, other: &Self) -> Self {
        let (a1, b1) = self.matrix();
        let (a2, b2) = other.matrix();
        Self::from_matrix(a1 * a2 + b1 * b2.conj(), a1 * b2 + b1 * a2.conj())
    }

    /// Algebraic inverse in the same canonical form.
    pub fn inverse(&self) -> Self {
        let (a, b) = self.matrix();
        Self::from_matrix(a.conj(), -b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    type C = Cx<f64>;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_fixes_everything() {
        let m = Moebius::<f64>::identity();
        for z in [cx(0.3, -0.2), cx(0.0, 0.0), cx(0.0, 1.0)] {
            assert!(close(m.apply(z), z, 1e-15));
        }
    }

    #[test]
    fn real_center_fixes_one() {
        // (1 − a)/(1 − a) = 1 for real a
        let m = Moebius::new(0.0, cx(0.5, 0.0));
        assert!(close(m.apply(cx(1.0, 0.0)), cx(1.0, 0.0), 1e-15));
    }

    #[test]
    fn center_maps_to_origin() {
        let m = Moebius::new(0.0, cx(0.5, 0.0));
        assert!(close(m.apply(cx(0.5, 0.0)), cx(0.0, 0.0), 1e-15));
    }

    #[test]
    fn inverse_round_trips_disk_points() {
        let m = Moebius::new(1.1, cx(0.3, -0.4));
        let mi = m.inverse();
        // a deterministic spread of disk points
        for k in 0..100 {
            let r = 0.95 * (k as f64 + 0.5) / 100.0;
            let t = 2.399963 * k as f64; // golden-angle spiral
            let z = C::from_polar(r, t);
            let back = mi.apply(m.apply(z));
            assert!(close(back, z, 1e-12), "k={k}: {back} vs {z}");
        }
    }

    #[test]
    fn rotation_inverse_is_negated_angle() {
        let m = Moebius::<f64>::rotation(std::f64::consts::FRAC_PI_2);
        let mi = m.inverse();
        assert!((mi.theta() - 3.0 * std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!(mi.a().norm() < 1e-15);
    }

    #[test]
    fn composition_matches_pointwise() {
        let m1 = Moebius::new(0.7, cx(0.2, 0.1));
        let m2 = Moebius::new(2.9, cx(-0.4, 0.3));
        let c = m1.compose(&m2);
        for k in 0..50 {
            let z = C::from_polar(0.9 * k as f64 / 50.0, 0.17 * k as f64);
            assert!(close(c.apply(z), m1.apply(m2.apply(z)), 1e-12));
        }
        // closure: canonical form still satisfies |a| < 1
        assert!(c.a().norm() < 1.0);
    }

    #[test]
    fn boundary_maps_to_boundary() {
        let m = Moebius::new(0.3, cx(0.6, 0.2));
        for k in 0..64 {
            let z = C::from_polar(1.0, k as f64 * 0.1);
            assert!((m.apply(z).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_is_reported() {
        let m = Moebius::new(0.0, cx(0.5, 0.0));
        let pole = cx(2.0, 0.0); // 1/ā = 2
        assert_eq!(m.checked_apply(pole), Err(ComplexGeomError::PoleHit));
    }
}
