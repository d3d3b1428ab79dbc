//! Fixes the Moebius degrees of freedom of the two disk parameterizations:
//! drive the interior boundary images to zero arithmetic mean (so the
//! interior ambiguity reduces to a rotation) and pin the exterior
//! parameterization at infinity.

use crate::complexgeom::Moebius;
use crate::error::NormalizeError;
use crate::scalar::{Cx, Real};
use crate::zipper::ConformalMapChain;
use num_complex::Complex;

/// Hard cap on the centering iteration; clustered inputs converge slowly.
pub const CENTER_ITERATION_CAP: usize = 10_000;

/// Outcome of the centering iteration.
#[derive(Debug, Clone)]
pub struct Centering<T: Real> {
    /// composed Moebius `M_Φ₁`, collapsed to canonical form
    pub transform: Moebius<T>,
    /// the centered boundary points `q_i = M_Φ₁(p_i)`
    pub points: Vec<Cx<T>>,
    pub iterations: usize,
    /// final |mean|
    pub residual: T,
}

fn mean<T: Real>(pts: &[Cx<T>]) -> Cx<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for p in pts {
        acc = acc + p;
    }
    acc / T::of_usize(pts.len())
}

/// Iteratively composes centering maps `F_{p_c}` at the running arithmetic
/// mean until `|mean| ≤ eps`.
///
/// The composed chain is collapsed to a single canonical Moebius transform;
/// the returned points are the iteration's own outputs, which the collapsed
/// transform reproduces up to roundoff.
pub fn center_boundary<T: Real>(
    points: &[Cx<T>],
    eps: T,
) -> Result<Centering<T>, NormalizeError> {
    if points.len() < 3 {
        return Err(NormalizeError::TooFewPoints(points.len()));
    }
    let mut pts = points.to_vec();
    let mut transform = Moebius::identity();
    let mut last_residual = T::infinity();
    for it in 0..=CENTER_ITERATION_CAP {
        let c = mean(&pts);
        let r = c.norm();
        if r <= eps {
            return Ok(Centering {
                transform,
                points: pts,
                iterations: it,
                residual: r,
            });
        }
        if it == CENTER_ITERATION_CAP {
            break;
        }
        // |mean| of unit vectors is < 1 except for fully degenerate input
        if r >= T::one() {
            return Err(NormalizeError::NoConvergence(it));
        }
        let step = Moebius::centering(c);
        for p in pts.iter_mut() {
            *p = step.apply(*p);
            // boundary points stay on the circle; renormalize to kill drift
            let n = p.norm();
            *p = *p / Complex::new(n, T::zero());
        }
        transform = step.compose(&transform);
        last_residual = r;
    }
    let _ = last_residual;
    Err(NormalizeError::NoConvergence(CENTER_ITERATION_CAP))
}

/// Solves `Σ (p_k − a)/(1 − ā p_k) = 0` for the unique `a` in the disk,
/// realized through the centering iteration: the composed chain equals
/// `e^{iθ} F_a`, so `a = M_Φ₁⁻¹(0)`.
pub fn solve_center_equation<T: Real>(points: &[Cx<T>]) -> Result<Cx<T>, NormalizeError> {
    let n = T::of_usize(points.len());
    // drive n·|mean| well below the 1e-8 residual contract
    let eps = T::of(1e-9).min(T::of(0.5e-8) / n);
    let run = center_boundary(points, eps)?;
    Ok(run.transform.inverse().apply(Complex::new(T::zero(), T::zero())))
}

/// Residual `|Σ F_a(p_k)|` of the centering equation at `a`.
pub fn center_equation_residual<T: Real>(points: &[Cx<T>], a: Cx<T>) -> T {
    let f = Moebius::centering(a);
    let mut acc = Complex::new(T::zero(), T::zero());
    for &p in points {
        acc = acc + f.apply(p);
    }
    acc.norm()
}

/// Pins the exterior parameterization at infinity.
///
/// `b = Φ₂⁻¹(∞) = 1/g₂(∞)` where `g₂` is the exterior chain; the correcting
/// map is `F_c` with `c = −1/b̄`, so that `(Φ₂ ∘ F_c)(∞) = Φ₂(b) = ∞`.
pub fn pin_infinity<T: Real>(
    chain: &ConformalMapChain<T>,
) -> Result<Moebius<T>, NormalizeError> {
    let g_inf = chain.eval_infinity();
    let gn = g_inf.norm();
    if (gn - T::one()).abs() < T::of(1e-9) {
        return Err(NormalizeError::InfinityUnresolvable(
            (T::one() / gn - T::one())
                .abs()
                .to_f64()
                .unwrap_or(f64::NAN),
        ));
    }
    if gn < T::of(1e-300) {
        // b = ∞: the chain already fixes infinity
        return Ok(Moebius::identity());
    }
    let b = Complex::new(T::one(), T::zero()) / g_inf;
    let c = -(Complex::new(T::one(), T::zero()) / b.conj());
    Ok(Moebius::centering(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Contour;
    use crate::scalar::cx;
    use crate::zipper::{zipper_build, Direction};

    fn unit_points(args: &[f64]) -> Vec<Cx<f64>> {
        args.iter().map(|&t| Cx::from_polar(1.0, t)).collect()
    }

    /// Deterministic pseudo-random angles.
    fn splitmix(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *seed;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn already_centered_is_identity() {
        // cube roots of unity have zero mean; zero iterations needed
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let pts = unit_points(&[0.0, tau, 2.0 * tau]);
        let run = center_boundary(&pts, 1e-5).unwrap();
        assert_eq!(run.iterations, 0);
        assert!(run.transform.is_identity(1e-12));
    }

    #[test]
    fn three_point_case_converges() {
        let pts = unit_points(&[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI]);
        let run = center_boundary(&pts, 1e-5).unwrap();
        assert!(run.residual <= 1e-5);
        // collapsed transform reproduces the iterated points
        for (p, q) in pts.iter().zip(&run.points) {
            let via = run.transform.apply(*p);
            assert!((via - q).norm() < 1e-9);
        }
    }

    #[test]
    fn solve_center_equation_three_points() {
        let pts = unit_points(&[0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI]);
        let a = solve_center_equation(&pts).unwrap();
        let res = center_equation_residual(&pts, a);
        assert!(res <= 1e-8, "residual {res:e}");
        // brute-force grid refinement oracle over the disk
        let mut best = cx::<f64>(0.0, 0.0);
        let mut center = cx::<f64>(0.0, 0.0);
        let mut half = 1.0f64;
        for _pass in 0..40 {
            let mut best_val = f64::MAX;
            for i in -8..=8 {
                for j in -8..=8 {
                    let cand = center + cx::<f64>(i as f64 * half / 8.0, j as f64 * half / 8.0);
                    if cand.norm() >= 0.999 {
                        continue;
                    }
                    let v = center_equation_residual(&pts, cand);
                    if v < best_val {
                        best_val = v;
                        best = cand;
                    }
                }
            }
            center = best;
            half *= 0.35;
        }
        assert!(
            (best - a).norm() < 1e-6,
            "oracle {best} vs iteration {a}"
        );
    }

    #[test]
    fn zero_mean_iff_a_zero() {
        let tau = 2.0 * std::f64::consts::PI / 3.0;
        let pts = unit_points(&[0.1, 0.1 + tau, 0.1 + 2.0 * tau]);
        let a = solve_center_equation(&pts).unwrap();
        assert!(a.norm() < 1e-8);
    }

    #[test]
    fn solution_is_permutation_invariant() {
        let pts = unit_points(&[0.3, 1.1, 2.0, 4.4, 5.3]);
        let mut shuffled = pts.clone();
        shuffled.swap(0, 3);
        shuffled.swap(1, 4);
        let a1 = solve_center_equation(&pts).unwrap();
        let a2 = solve_center_equation(&shuffled).unwrap();
        assert!((a1 - a2).norm() < 1e-8);
    }

    #[test]
    fn clustered_arc_converges() {
        // 200 points inside a 0.1-radian arc: the clustered hard case
        let pts: Vec<Cx<f64>> = (0..200)
            .map(|i| Cx::from_polar(1.0, 1.0 + 0.1 * i as f64 / 199.0))
            .collect();
        let run = center_boundary(&pts, 1e-5).unwrap();
        assert!(run.residual <= 1e-5);
        assert!(run.iterations < CENTER_ITERATION_CAP);
        // centered points should spread out: mean is near zero
        let m = mean(&run.points);
        assert!(m.norm() <= 1e-5);
    }

    #[test]
    fn uniqueness_up_to_rotation_across_restarts() {
        let mut seed = 7u64;
        for _case in 0..10 {
            let mut args: Vec<f64> = (0..40)
                .map(|_| 2.0 * std::f64::consts::PI * splitmix(&mut seed))
                .collect();
            args.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let pts = unit_points(&args);
            let run1 = center_boundary(&pts, 1e-12).unwrap();
            // restart from a Moebius-perturbed copy of the same points
            let pert = Moebius::new(0.77, cx(0.31, -0.22));
            let pts2: Vec<Cx<f64>> = pts.iter().map(|&p| pert.apply(p)).collect();
            let run2 = center_boundary(&pts2, 1e-12).unwrap();
            // final point sets must agree up to one global rotation
            let rot = run1.points[0] / run2.points[0];
            assert!((rot.norm() - 1.0).abs() < 1e-9);
            let mut worst = 0.0f64;
            for (q1, q2) in run1.points.iter().zip(&run2.points) {
                worst = worst.max((q1 - rot * q2).norm());
            }
            assert!(worst < 1e-6, "rotation alignment residual {worst:e}");
        }
    }

    #[test]
    fn monotone_progress_of_mean() {
        let pts: Vec<Cx<f64>> = (0..50)
            .map(|i| Cx::from_polar(1.0, 0.4 + 1.9 * i as f64 / 49.0))
            .collect();
        // replicate the iteration manually and watch |mean|
        let mut cur = pts;
        let mut last = f64::MAX;
        for _ in 0..200 {
            let m = mean(&cur);
            let r = m.norm();
            assert!(r < last + 1e-15, "|mean| must not increase: {r} after {last}");
            last = r;
            if r < 1e-13 {
                break;
            }
            let f = Moebius::centering(m);
            for p in cur.iter_mut() {
                *p = f.apply(*p);
            }
        }
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = unit_points(&[0.0, 1.0]);
        assert!(matches!(
            center_boundary(&pts, 1e-5),
            Err(NormalizeError::TooFewPoints(2))
        ));
    }

    #[test]
    fn pin_infinity_circle() {
        // the raw zipper normalization does not fix infinity even for the
        // unit circle (its boundary images crowd near one point); the pin
        // must still resolve, with b strictly outside the closed disk
        let pts: Vec<Cx<f64>> = (0..128)
            .map(|i| Cx::from_polar(1.0, -2.0 * std::f64::consts::PI * i as f64 / 128.0))
            .collect();
        let c = Contour::new(pts).unwrap();
        let chain = zipper_build(&c, Direction::Exterior).unwrap();
        let g_inf = chain.eval_infinity();
        assert!(g_inf.norm() < 1.0);
        let m = pin_infinity(&chain).unwrap();
        // c = −conj(g₂(∞)) pins the map: F_c(∞) = b = 1/g₂(∞)
        let b = cx::<f64>(1.0, 0.0) / g_inf;
        let at_inf = m.apply_infinity().unwrap();
        assert!((at_inf - b).norm() < 1e-9 * b.norm());
        assert!(b.norm() > 1.0);
    }

    #[test]
    fn pin_infinity_algebraic_identity() {
        // F_c(∞) = −1/c̄ = b
        let b = cx::<f64>(1.7, -0.9);
        let c = -(cx::<f64>(1.0, 0.0) / b.conj());
        let f = Moebius::centering(c);
        let at_inf = f.apply_infinity().unwrap();
        assert!((at_inf - b).norm() < 1e-12);
    }

    #[test]
    fn pinned_exterior_fixes_infinity() {
        // off-center ellipse: the raw exterior map moves ∞; after the pin,
        // a large-radius proxy point must map far outside the unit disk
        // through the corrected parameterization Φ̃₂(z) = Φ₂(F_c(z)).
        let pts: Vec<Cx<f64>> = (0..160)
            .map(|i| {
                let t = -2.0 * std::f64::consts::PI * i as f64 / 160.0;
                cx::<f64>(2.0 * t.cos() + 0.7, 1.0 * t.sin() - 0.4)
            })
            .collect();
        let c = Contour::new(pts).unwrap();
        let chain = zipper_build(&c, Direction::Exterior).unwrap();
        let m = pin_infinity(&chain).unwrap();
        // Φ̃₂(R) = g₂⁻¹(1/F_c(R)) for a big proxy R
        let proxy = cx::<f64>(1e6, 0.0);
        let w = m.apply(proxy);
        let target = chain
            .eval_inverse(cx::<f64>(1.0, 0.0) / w)
            .expect("inverse in the disk");
        assert!(
            target.norm() > 1e3,
            "pinned exterior parameterization must send large z far out, got |Φ̃₂(R)| = {}",
            target.norm()
        );
    }
}
