//! Shape ingestion: boundary tracing of binary masks, uniform arc-length
//! resampling, and orientation handling.

use crate::error::ContourError;
use crate::scalar::{Cx, Real};
use num_complex::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Clockwise,
    Counterclockwise,
}

/// Ordered boundary points of a simply-connected planar shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour<T: Real> {
    points: Vec<Cx<T>>,
}

impl<T: Real> Contour<T> {
    /// Validates the basic invariants: at least 3 points, consecutive
    /// points distinct (including the closing edge).
    pub fn new(points: Vec<Cx<T>>) -> Result<Self, ContourError> {
        if points.len() < 3 {
            return Err(ContourError::TooFewPoints(points.len()));
        }
        let n = points.len();
        for i in 0..n {
            let a = points[i];
            let b = points[(i + 1) % n];
            if a == b {
                return Err(ContourError::DuplicatePoint(i));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Cx<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shoelace signed area; positive for counterclockwise traversal.
    pub fn signed_area(&self) -> T {
        let two = T::of(2.0);
        let n = self.points.len();
        let mut acc = T::zero();
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            acc = acc + (a.re * b.im - b.re * a.im);
        }
        acc / two
    }

    pub fn centroid(&self) -> Cx<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for p in &self.points {
            acc = acc + p;
        }
        acc / T::of_usize(self.points.len())
    }

    pub fn perimeter(&self) -> T {
        let n = self.points.len();
        (0..n)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    /// Bounding-box area, used to scale the degeneracy tolerance.
    fn bbox_area(&self) -> T {
        let mut xmin = self.points[0].re;
        let mut xmax = xmin;
        let mut ymin = self.points[0].im;
        let mut ymax = ymin;
        for p in &self.points {
            xmin = xmin.min(p.re);
            xmax = xmax.max(p.re);
            ymin = ymin.min(p.im);
            ymax = ymax.max(p.im);
        }
        (xmax - xmin) * (ymax - ymin)
    }

    /// Detected orientation, or `DegenerateArea` when the signed area is
    /// below `1e-12 ×` the bounding-box area.
    pub fn orientation(&self) -> Result<Orientation, ContourError> {
        let area = self.signed_area();
        let tol = T::of(1e-12) * self.bbox_area();
        if area.abs() <= tol {
            return Err(ContourError::DegenerateArea);
        }
        Ok(if area > T::zero() {
            Orientation::Counterclockwise
        } else {
            Orientation::Clockwise
        })
    }

    /// Returns the contour traversed in `target` orientation, reversing the
    /// point order if needed. The first point stays first.
    pub fn orient(&self, target: Orientation) -> Result<(Contour<T>, Orientation), ContourError> {
        let current = self.orientation()?;
        if current == target {
            Ok((self.clone(), current))
        } else {
            let mut pts = self.points.clone();
            pts[1..].reverse();
            Ok((Contour { points: pts }, current))
        }
    }

    /// Cyclically rotates the point list so that index `start` comes first.
    pub fn with_start(&self, start: usize) -> Contour<T> {
        let n = self.points.len();
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            pts.push(self.points[(start + i) % n]);
        }
        Contour { points: pts }
    }

    /// Applies `z ↦ scale·e^{iθ}·z + shift` to every point.
    pub fn transform(&self, scale: T, theta: T, shift: Cx<T>) -> Contour<T> {
        let rot = crate::scalar::unit(theta) * scale;
        Contour {
            points: self.points.iter().map(|&p| rot * p + shift).collect(),
        }
    }

    /// `n` points equally spaced by arc length, starting at `points[0]`,
    /// linear interpolation along edges, orientation preserved.
    pub fn resample_uniform(&self, n: usize) -> Result<Contour<T>, ContourError> {
        if n < 3 {
            return Err(ContourError::TooFewPoints(n));
        }
        let m = self.points.len();
        // cumulative arc lengths over the closed polygon
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(T::zero());
        for i in 0..m {
            let seg = (self.points[(i + 1) % m] - self.points[i]).norm();
            let last = *cum.last().unwrap();
            cum.push(last + seg);
        }
        let total = *cum.last().unwrap();
        let step = total / T::of_usize(n);
        let mut out = Vec::with_capacity(n);
        let mut edge = 0usize;
        for i in 0..n {
            let target = step * T::of_usize(i);
            while edge + 1 < cum.len() && cum[edge + 1] < target {
                edge += 1;
            }
            let seg_len = cum[edge + 1] - cum[edge];
            let t = if seg_len > T::zero() {
                (target - cum[edge]) / seg_len
            } else {
                T::zero()
            };
            let a = self.points[edge % m];
            let b = self.points[(edge + 1) % m];
            out.push(a + (b - a) * t);
        }
        Contour::new(out)
    }
}

/// Binary raster mask, row-major, `true` = foreground.
#[derive(Debug, Clone)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            false
        } else {
            self.data[y as usize * self.width + x as usize]
        }
    }
}

/// Moore-neighbor boundary trace with Jacob's stopping criterion.
///
/// The mask must contain exactly one 4-connected foreground component with
/// no holes. Points are emitted at pixel centers `(x, y)` in clockwise
/// raster order, which is clockwise (negative signed area) with the y axis
/// pointing up. Components thinner than 3 traced points fall back to the
/// pixel-corner rectangle around the component.
pub fn trace_boundary<T: Real>(mask: &Mask) -> Result<Contour<T>, ContourError> {
    let w = mask.width as i64;
    let h = mask.height as i64;
    let total: usize = mask.data.iter().filter(|&&b| b).count();
    if total == 0 {
        return Err(ContourError::EmptyMask);
    }
    check_connectivity(mask, total)?;

    // top-most then left-most foreground pixel
    let mut start = None;
    'outer: for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                start = Some((x, y));
                break 'outer;
            }
        }
    }
    let start = start.unwrap();

    // Moore neighborhood, clockwise on screen (y grows downward), from W
    const NBR: [(i64, i64); 8] = [
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
    ];
    // the start is the first raster pixel, so its west neighbor is empty
    let start_back = (start.0 - 1, start.1);
    let mut cur = start;
    let mut back = start_back;
    let mut path = Vec::with_capacity(4 * total);
    let cap = 8 * total + 16;
    loop {
        path.push(cur);
        let d = (back.0 - cur.0, back.1 - cur.1);
        let base = NBR.iter().position(|&n| n == d).unwrap();
        let mut next = None;
        let mut last_empty = back;
        for step in 1..=8 {
            let n_off = NBR[(base + step) % 8];
            let n = (cur.0 + n_off.0, cur.1 + n_off.1);
            if mask.get(n.0, n.1) {
                next = Some(n);
                break;
            }
            last_empty = n;
        }
        let Some(next) = next else {
            break; // isolated pixel
        };
        back = last_empty;
        cur = next;
        // Jacob's stopping criterion: the start is re-entered in the state
        // (pixel, backtrack) that began the trace
        if cur == start && back == start_back {
            break;
        }
        if path.len() > cap {
            break; // safety bound, unreachable on valid masks
        }
    }

    path.dedup();
    if path.len() >= 3 {
        let pts: Vec<Cx<T>> = path
            .iter()
            .map(|&(x, y)| Complex::new(T::of(x as f64), T::of(y as f64)))
            .collect();
        let c = Contour::new(pts)?;
        // raster scan goes top row first; with y treated as "up" the Moore
        // clockwise walk already yields clockwise traversal
        let (cw, _) = c.orient(Orientation::Clockwise)?;
        return Ok(cw);
    }

    // degenerate component (single pixel or thin domino): emit the
    // pixel-corner rectangle around the component's bounding box
    let mut xmin = i64::MAX;
    let mut xmax = i64::MIN;
    let mut ymin = i64::MAX;
    let mut ymax = i64::MIN;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    let (x0, x1) = (xmin as f64 - 0.5, xmax as f64 + 0.5);
    let (y0, y1) = (ymin as f64 - 0.5, ymax as f64 + 0.5);
    let pts = vec![
        crate::scalar::cx(x0, y0),
        crate::scalar::cx(x0, y1),
        crate::scalar::cx(x1, y1),
        crate::scalar::cx(x1, y0),
    ];
    Contour::new(pts)
}

/// Flood fills to verify a single 4-connected component with no holes.
fn check_connectivity(mask: &Mask, total: usize) -> Result<(), ContourError> {
    let w = mask.width as i64;
    let h = mask.height as i64;
    // foreground connectivity
    let mut seen = vec![false; mask.width * mask.height];
    let first = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .find(|&(x, y)| mask.get(x, y))
        .unwrap();
    let mut stack = vec![first];
    seen[(first.1 * w + first.0) as usize] = true;
    let mut count = 0usize;
    while let Some((x, y)) = stack.pop() {
        count += 1;
        for (dx, dy) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let (nx, ny) = (x + dx, y + dy);
            if mask.get(nx, ny) && !seen[(ny * w + nx) as usize] {
                seen[(ny * w + nx) as usize] = true;
                stack.push((nx, ny));
            }
        }
    }
    if count != total {
        return Err(ContourError::MultipleComponents);
    }
    // background connectivity from an implicit border ring; any background
    // pixel not reached is enclosed, i.e. a hole (8-connected background)
    let mut bg_seen = vec![false; mask.width * mask.height];
    let mut stack: Vec<(i64, i64)> = Vec::new();
    for x in 0..w {
        for y in [0, h - 1] {
            if !mask.get(x, y) && !bg_seen[(y * w + x) as usize] {
                bg_seen[(y * w + x) as usize] = true;
                stack.push((x, y));
            }
        }
    }
    for y in 0..h {
        for x in [0, w - 1] {
            if !mask.get(x, y) && !bg_seen[(y * w + x) as usize] {
                bg_seen[(y * w + x) as usize] = true;
                stack.push((x, y));
            }
        }
    }
    while let Some((x, y)) = stack.pop() {
        for (dx, dy) in [
            (-1, 0),
            (1, 0),
            (0, -1),
            (0, 1),
            (-1, -1),
            (1, -1),
            (-1, 1),
            (1, 1),
        ] {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            if !mask.get(nx, ny) && !bg_seen[(ny * w + nx) as usize] {
                bg_seen[(ny * w + nx) as usize] = true;
                stack.push((nx, ny));
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) && !bg_seen[(y * w + x) as usize] {
                return Err(ContourError::HoleDetected);
            }
        }
    }
    Ok(())
}
