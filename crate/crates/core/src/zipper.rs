//! Numerical Riemann mapping by zipping boundary points onto the circle
//! through a chain of elementary conformal slit maps.
//!
//! Working frame is the upper half-plane. The initial map
//! `i·sqrt((z−z₂)/(z−z₁))` unfolds the first boundary segment onto the real
//! axis; each intermediate stage removes the hyperbolic-geodesic tooth from
//! the last zipped point (at the origin) to the image of the next boundary
//! point, using the basic map `sqrt(m(z)² + s²)` with the Moebius
//! `m(z) = z/(1 − z/x₂)` that straightens the tooth's circle; the terminal
//! stages `(z/(1 − z/p₁ₙ))²` and `(z−i)/(z+i)` close the curve and carry the
//! half-plane onto the unit disk. Feeding the points in reversed order
//! makes the chain map the complementary region onto the disk instead.

use crate::contour::Contour;
use crate::error::ZipperError;
use crate::scalar::{Cx, Real};
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Interior,
    Exterior,
}

/// One geodesic tooth: `f(z) = sqrt(m(z)² + s²)`, `m(z) = z/(1 − z/x₂)`.
/// `x2 = None` encodes the vertical tooth (`m = id`).
#[derive(Debug, Clone, Copy)]
struct Stage<T: Real> {
    x2: Option<T>,
    s: T,
}

/// A point of the extended plane; `None` is the point at infinity.
type EPoint<T> = Option<Cx<T>>;

/// Composition of elementary zipper maps for one curve.
#[derive(Debug, Clone)]
pub struct ConformalMapChain<T: Real> {
    direction: Direction,
    /// anchors of the initial map `i·sqrt((z − b)/(z − a))`
    a: Cx<T>,
    b: Cx<T>,
    stages: Vec<Stage<T>>,
    /// image of the first point before the closing stages (real, or ∞)
    p1n: Option<T>,
    /// final boundary images on the unit circle, in input order
    boundary: Vec<Cx<T>>,
    /// boundary images in the upper-half-plane frame just before the final
    /// Cayley stage (None is the point at infinity), in input order
    boundary_upper: Vec<Option<T>>,
}

/// `sqrt(m² + s²)` with the branch that preserves the upper half-plane and
/// the sign of real inputs: `m · principal_sqrt(1 + (s/m)²)`.
#[inline]
fn tooth<T: Real>(m: Cx<T>, s: T) -> Cx<T> {
    let one = Complex::new(T::one(), T::zero());
    // At the tooth base the two lips separate; resolve to the tracked
    // (east) side, matching the build's split convention. The threshold
    // sits above the sqrt-amplified cancellation noise (~1e-8·s) that the
    // preceding tip stage leaves on a freshly zipped point.
    if m.norm() < T::of(1e-6) * s {
        return Complex::new(s, T::zero());
    }
    let ratio = Complex::new(s, T::zero()) / m;
    m * (one + ratio * ratio).sqrt()
}

/// Inverse tooth `sqrt(y² − s²)`, mapping the half-plane back onto the
/// half-plane minus the tooth. Real values inside the welded seam
/// `(−s, s)` return the corresponding tooth position `i·sqrt(s² − y²)`
/// (well defined as a point; only the lip side is ambiguous there).
#[inline]
fn tooth_inv<T: Real>(y: Cx<T>, s: T) -> Result<Cx<T>, ZipperError> {
    let one = Complex::new(T::one(), T::zero());
    if y.norm() < T::of(1e-300) {
        // the tooth tip
        return Ok(Complex::new(T::zero(), s));
    }
    if y.im.abs() <= T::of(1e-12) * (s + y.re.abs()) {
        // factored differences keep exponentially small seam offsets alive
        let x = y.re;
        if x.abs() < s {
            return Ok(Complex::new(T::zero(), ((s - x) * (s + x)).sqrt()));
        }
        let off = (x.abs() - s) * (x.abs() + s);
        return Ok(Complex::new(x.signum() * off.sqrt(), T::zero()));
    }
    let ratio = Complex::new(s, T::zero()) / y;
    let rad = one - ratio * ratio;
    let r = y * rad.sqrt();
    // the forward map preserves the upper half-plane, so its inverse must
    Ok(if r.im < T::zero() { -r } else { r })
}

#[inline]
fn stage_apply<T: Real>(st: &Stage<T>, w: EPoint<T>) -> EPoint<T> {
    let m: EPoint<T> = match (st.x2, w) {
        (None, any) => any,
        (Some(x2), None) => Some(Complex::new(-x2, T::zero())),
        (Some(x2), Some(w)) => {
            let denom = Complex::new(T::one(), T::zero()) - w / Complex::new(x2, T::zero());
            if denom.norm() < T::of(1e-300) * (T::one() + w.norm()) {
                None
            } else {
                Some(w / denom)
            }
        }
    };
    m.map(|m| tooth(m, st.s))
}

#[inline]
fn stage_unapply<T: Real>(st: &Stage<T>, y: Cx<T>) -> Result<Cx<T>, ZipperError> {
    let m = tooth_inv(y, st.s)?;
    match st.x2 {
        None => Ok(m),
        Some(x2) => {
            let denom = Complex::new(T::one(), T::zero()) + m / Complex::new(x2, T::zero());
            Ok(m / denom)
        }
    }
}

#[inline]
fn initial<T: Real>(a: Cx<T>, b: Cx<T>, z: Cx<T>) -> EPoint<T> {
    let den = z - a;
    if den.norm() < T::of(1e-300) * (T::one() + z.norm()) {
        return None;
    }
    let t = (z - b) / den;
    Some(Complex::new(T::zero(), T::one()) * t.sqrt())
}

/// Lens opening and squaring: the half-plane value right before the final
/// Cayley stage.
#[inline]
fn terminal_upper<T: Real>(p1n: Option<T>, w: EPoint<T>) -> EPoint<T> {
    let one = Complex::new(T::one(), T::zero());
    let v: EPoint<T> = match (p1n, w) {
        (_, None) => None,
        (None, Some(w)) => Some(w),
        (Some(p), Some(w)) => {
            let denom = one - w / Complex::new(p, T::zero());
            if denom.norm() < T::of(1e-300) * (T::one() + w.norm()) {
                None
            } else {
                Some(w / denom)
            }
        }
    };
    v.map(|v| v * v)
}

#[inline]
fn terminal<T: Real>(p1n: Option<T>, w: EPoint<T>) -> Cx<T> {
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    match terminal_upper(p1n, w) {
        None => one, // ∞ ↦ 1 under the Cayley map
        Some(v2) => (v2 - i) / (v2 + i),
    }
}

impl<T: Real> ConformalMapChain<T> {
    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Boundary images `p_i` of the input contour points, aligned with the
    /// contour's stored point order.
    pub fn boundary_images(&self) -> &[Cx<T>] {
        &self.boundary
    }

    /// Evaluates the chain at a point of its source region.
    pub fn eval(&self, z: Cx<T>) -> Cx<T> {
        let mut w = initial(self.a, self.b, z);
        for st in &self.stages {
            w = stage_apply(st, w);
        }
        terminal(self.p1n, w)
    }

    /// Evaluates the chain in the upper-half-plane frame, stopping just
    /// before the final Cayley stage; `None` is the point at infinity.
    pub fn eval_upper(&self, z: Cx<T>) -> Option<Cx<T>> {
        let mut w = initial(self.a, self.b, z);
        for st in &self.stages {
            w = stage_apply(st, w);
        }
        terminal_upper(self.p1n, w)
    }

    /// Half-plane boundary images matching [`boundary_images`]
    /// (`None` is the point at infinity).
    pub fn boundary_upper_images(&self) -> &[Option<T>] {
        &self.boundary_upper
    }

    /// Evaluates the chain at the point at infinity.
    pub fn eval_infinity(&self) -> Cx<T> {
        // (z−b)/(z−a) → 1 at ∞, and the initial branch sends it to i
        let mut w: EPoint<T> = Some(Complex::new(T::zero(), T::one()));
        for st in &self.stages {
            w = stage_apply(st, w);
        }
        terminal(self.p1n, w)
    }

    /// Exterior parameterization `Φ₂(z) = g⁻¹(1/z)`, carrying the
    /// complement of the closed unit disk onto the complement of the
    /// curve. Only meaningful for exterior chains.
    pub fn exterior_map(&self, z: Cx<T>) -> Result<Cx<T>, ZipperError> {
        assert_eq!(
            self.direction,
            Direction::Exterior,
            "exterior_map needs an exterior chain"
        );
        let norm = z.norm();
        if norm < T::one() - T::of(1e-9) {
            return Err(ZipperError::OutsideDomain(norm.to_f64().unwrap_or(f64::NAN)));
        }
        self.eval_inverse(Complex::new(T::one(), T::zero()) / z)
    }

    /// Exterior parameterization at the point at infinity.
    pub fn exterior_map_infinity(&self) -> Result<Cx<T>, ZipperError> {
        assert_eq!(self.direction, Direction::Exterior);
        self.eval_inverse(Complex::new(T::zero(), T::zero()))
    }

    /// Inverse evaluation for points of the closed disk.
    ///
    /// The terminal unsquaring has two candidate roots (prime ends of the
    /// two complementary regions); both are traced back and the candidate
    /// whose forward evaluation reproduces the query wins. Interior points
    /// resolve cleanly this way. Exactly-on-boundary queries sit on the
    /// welding seams where the forward map is quantized by the teeth, so a
    /// small fraction of boundary samples can resolve to a nearby seam's
    /// prime end that is also bit-exactly forward-consistent.
    pub fn eval_inverse(&self, w: Cx<T>) -> Result<Cx<T>, ZipperError> {
        let norm = w.norm();
        if norm > T::one() + T::of(1e-9) {
            return Err(ZipperError::OutsideDomain(norm.to_f64().unwrap_or(f64::NAN)));
        }
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let guard = T::of(1e-14);

        // Cayley inverse: v² = i(1+w)/(1−w)
        let denom = one - w;
        if denom.norm() < guard {
            return Ok(self.a); // w = 1 is the image of the first anchor
        }
        let v2 = i * (one + w) / denom;
        let root = {
            let r = v2.sqrt();
            if r.im < T::zero() || (r.im == T::zero() && r.re < T::zero()) {
                -r
            } else {
                r
            }
        };
        let mut best: Option<(T, Cx<T>)> = None;
        let mut last_err = ZipperError::BranchAmbiguity;
        for cand in [root, -root] {
            match self.invert_from_halfplane(cand) {
                Ok(z) => {
                    let residual = (self.eval(z) - w).norm();
                    if best.as_ref().is_none_or(|(r, _)| residual < *r) {
                        best = Some((residual, z));
                    }
                }
                Err(e) => last_err = e,
            }
        }
        match best {
            Some((residual, z)) if residual <= T::of(1e-6) * (T::one() + w.norm()) => Ok(z),
            Some(_) => Err(ZipperError::BranchAmbiguity),
            None => Err(last_err),
        }
    }

    fn invert_from_halfplane(&self, v: Cx<T>) -> Result<Cx<T>, ZipperError> {
        let one = Complex::new(T::one(), T::zero());
        let guard = T::of(1e-14);
        let mut y = v;
        // undo the lens-opening Moebius v = y/(1 − y/p1n)
        if let Some(p) = self.p1n {
            let denom = one + y / Complex::new(p, T::zero());
            if denom.norm() < guard * (T::one() + y.norm()) {
                return Err(ZipperError::BranchAmbiguity);
            }
            y = y / denom;
        }
        for st in self.stages.iter().rev() {
            y = stage_unapply(st, y)?;
        }
        // initial inverse: y = i·sqrt(t) with t = (z−b)/(z−a), so t = −y²
        let t = -(y * y);
        let denom = t - one;
        if denom.norm() < guard * (T::one() + t.norm()) {
            return Err(ZipperError::BranchAmbiguity);
        }
        Ok((self.a * t - self.b) / denom)
    }
}

/// Builds the zipper chain for the contour and records the boundary images.
///
/// For `Direction::Interior` the stored point order is used directly (the
/// pipeline feeds clockwise contours); for `Direction::Exterior` the points
/// are reversed first, which makes the chain map the unbounded complement
/// onto the disk.
pub fn zipper_build<T: Real>(
    boundary: &Contour<T>,
    direction: Direction,
) -> Result<ConformalMapChain<T>, ZipperError> {
    let mut pts: Vec<Cx<T>> = boundary.points().to_vec();
    if direction == Direction::Exterior {
        pts.reverse();
    }
    let n = pts.len();
    for i in 0..n {
        let j = (i + 1) % n;
        if (pts[i] - pts[j]).norm() == T::zero() {
            return Err(ZipperError::DuplicatePoints(i, j));
        }
    }

    let a = pts[0];
    let b = pts[1];
    let mut cur: Vec<EPoint<T>> = Vec::with_capacity(n);
    cur.push(None); // image of pts[0] is ∞
    cur.push(Some(Complex::new(T::zero(), T::zero())));
    for &z in &pts[2..] {
        let w = initial(a, b, z);
        if w.is_none() {
            return Err(ZipperError::DuplicatePoints(0, 0));
        }
        cur.push(w);
    }

    let mut stages: Vec<Stage<T>> = Vec::with_capacity(n.saturating_sub(2));
    for k in 2..n {
        let Some(omega) = cur[k] else {
            return Err(ZipperError::SelfIntersection(k));
        };
        if !omega.re.is_finite() || !omega.im.is_finite() || omega.im <= T::zero() {
            return Err(ZipperError::SelfIntersection(k));
        }
        let n2 = omega.norm_sqr();
        let s = n2 / omega.im;
        let x2 = if omega.re.abs() * T::of(1e14) < n2 / omega.im.abs() {
            None // tooth is numerically vertical
        } else {
            Some(n2 / omega.re)
        };
        let st = Stage { x2, s };
        for (idx, p) in cur.iter_mut().enumerate() {
            if idx == k {
                *p = Some(Complex::new(T::zero(), T::zero())); // tip lands at 0
            } else if idx == k - 1 {
                // previous tip sits at the tooth base and splits; track the
                // side consistent with the traversal orientation
                *p = Some(Complex::new(st.s, T::zero()));
            } else {
                *p = stage_apply(&st, *p);
            }
        }
        stages.push(st);
    }

    // real up to roundoff by construction
    let p1n = cur[0].map(|w| w.re);
    let mut boundary_images: Vec<Cx<T>> = Vec::with_capacity(n);
    let mut boundary_upper: Vec<Option<T>> = Vec::with_capacity(n);
    for (i, p) in cur.iter().enumerate() {
        if i == 0 {
            boundary_images.push(Complex::new(T::one(), T::zero()));
            boundary_upper.push(None);
        } else {
            boundary_images.push(terminal(p1n, *p));
            // zipped material is real, so the half-plane value is too
            boundary_upper.push(terminal_upper(p1n, *p).map(|v| v.re));
        }
    }

    if direction == Direction::Exterior {
        boundary_images.reverse();
        boundary_upper.reverse();
    }
    Ok(ConformalMapChain {
        direction,
        a,
        b,
        stages,
        p1n,
        boundary: boundary_images,
        boundary_upper,
    })
}
