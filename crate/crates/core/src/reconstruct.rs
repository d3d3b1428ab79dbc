//! Shape reconstruction from a signature: solve a free-boundary Beltrami
//! equation on the disk grid, then conformally weld the interior and
//! exterior parameterizations back into a closed curve.

use crate::complexgeom::{beltrami_from_map, DiskGrid};
use crate::contour::Contour;
use crate::error::{ReconstructError, ZipperError};
use crate::hbs::HbsField;
use crate::scalar::{Cx, Real};
use crate::zipper::{zipper_build, Direction};
use num_complex::Complex;
use std::sync::Arc;

/// Symmetric average of the two directed Hausdorff distances between the
/// boundary point sets.
pub fn shape_distance<T: Real>(o1: &Contour<T>, o2: &Contour<T>) -> T {
    let d12 = directed_hausdorff(o1.points(), o2.points());
    let d21 = directed_hausdorff(o2.points(), o1.points());
    (d12 + d21) / T::of(2.0)
}

fn directed_hausdorff<T: Real>(from: &[Cx<T>], to: &[Cx<T>]) -> T {
    let mut worst = T::zero();
    for q in from {
        let mut best = T::infinity();
        for p in to {
            best = best.min((p - q).norm());
        }
        worst = worst.max(best);
    }
    worst
}

/// Rigid-plus-scale alignment of `b` onto `a` minimizing the shape
/// distance: centroids and mean radii matched in closed form, rotation by
/// golden-section refinement of a coarse sweep.
pub fn align_similarity<T: Real>(a: &Contour<T>, b: &Contour<T>) -> Contour<T> {
    let ca = a.centroid();
    let cb = b.centroid();
    let ra = mean_radius(a, ca);
    let rb = mean_radius(b, cb);
    let scale = ra / rb;
    let recentred: Vec<Cx<T>> = b.points().iter().map(|&p| (p - cb) * scale).collect();
    let target: Vec<Cx<T>> = a.points().iter().map(|&p| p - ca).collect();
    let ta = Contour::new(target).unwrap();
    let cost = |theta: T| -> T {
        let rot = crate::scalar::unit(theta);
        let moved: Vec<Cx<T>> = recentred.iter().map(|&p| rot * p).collect();
        shape_distance(&ta, &Contour::new(moved).unwrap())
    };
    let mut best_theta = T::zero();
    let mut best = T::infinity();
    let coarse = 256usize;
    for k in 0..coarse {
        let theta = T::TAU() * T::of_usize(k) / T::of_usize(coarse);
        let c = cost(theta);
        if c < best {
            best = c;
            best_theta = theta;
        }
    }
    // golden-section around the best coarse angle
    let gr = T::of(0.618_033_988_749_894_9);
    let width = T::TAU() / T::of_usize(coarse);
    let mut lo = best_theta - width;
    let mut hi = best_theta + width;
    for _ in 0..40 {
        let m1 = hi - (hi - lo) * gr;
        let m2 = lo + (hi - lo) * gr;
        if cost(m1) < cost(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let theta = (lo + hi) / T::of(2.0);
    let rot = crate::scalar::unit(theta);
    Contour::new(
        b.points()
            .iter()
            .map(|&p| rot * ((p - cb) * scale) + ca)
            .collect(),
    )
    .unwrap()
}

fn mean_radius<T: Real>(c: &Contour<T>, center: Cx<T>) -> T {
    let mut acc = T::zero();
    for p in c.points() {
        acc = acc + (p - center).norm();
    }
    acc / T::of_usize(c.len())
}

/// Sparse matrix in CSR form over the interleaved (u, v) dof vector.
struct Csr<T> {
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<T>,
}

impl<T: Real> Csr<T> {
    fn from_triplets(n: usize, mut trip: Vec<(u32, u32, T)>) -> Self {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_start = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<T> = Vec::new();
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                let idx = vals.len() - 1;
                vals[idx] = vals[idx] + v;
            } else {
                cols.push(c);
                vals.push(v);
                row_start[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        Self {
            row_start,
            cols,
            vals,
        }
    }

    fn matvec(&self, x: &[T], y: &mut [T]) {
        for (r, y_r) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc = acc + self.vals[k] * x[self.cols[k] as usize];
            }
            *y_r = acc;
        }
    }

    fn diagonal(&self, n: usize) -> Vec<T> {
        let mut d = vec![T::zero(); n];
        for r in 0..n {
            for k in self.row_start[r]..self.row_start[r + 1] {
                if self.cols[k] as usize == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

/// Least-squares Beltrami solve: finds the piecewise-linear map `F` on the
/// grid minimizing `Σ area·|F_z̄ − μ F_z|²` subject to `F(0) = 0` and
/// `F(1) = 1`, by Jacobi-preconditioned conjugate gradients on the normal
/// equations.
pub fn solve_beltrami_free<T: Real>(
    b: &HbsField<T>,
) -> Result<Vec<Cx<T>>, ReconstructError> {
    let sup = b.sup_norm();
    if sup >= T::one() {
        return Err(ReconstructError::NonAdmissible(
            sup.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let grid = &b.field.grid;
    let nn = grid.node_count();
    let ndof = 2 * nn;

    // pinned nodes: z = 0 and z = 1 (always lattice points)
    let m = grid.resolution() as i64;
    let pin0 = grid.node_id(0, 0).expect("origin node") as usize;
    let pin1 = grid.node_id(m, 0).expect("node at z = 1") as usize;

    // assemble K = Σ_T area·(aᵀa + bᵀb) from the per-face residual
    // R = Σᵢ Wᵢ fᵢ, Wᵢ = Dᵢ − μ Cᵢ
    let mut trip: Vec<(u32, u32, T)> = Vec::with_capacity(grid.face_count() * 36);
    let area = grid.face_area();
    for (f, mu) in grid.faces().iter().zip(&b.field.values) {
        let verts = [
            grid.nodes()[f[0] as usize],
            grid.nodes()[f[1] as usize],
            grid.nodes()[f[2] as usize],
        ];
        let e1 = verts[1] - verts[0];
        let e2 = verts[2] - verts[0];
        let den = e1 * e2.conj() - e2 * e1.conj();
        let c = [
            (e1.conj() - e2.conj()) / den,
            e2.conj() / den,
            -e1.conj() / den,
        ];
        let d = [(e2 - e1) / den, -e2 / den, e1 / den];
        let w: [Cx<T>; 3] = [
            d[0] - mu * c[0],
            d[1] - mu * c[1],
            d[2] - mu * c[2],
        ];
        for i in 0..3 {
            for j in 0..3 {
                let wij = w[i] * w[j].conj();
                let re = wij.re * area;
                let im = wij.im * area;
                let (ui, vi) = (2 * f[i], 2 * f[i] + 1);
                let (uj, vj) = (2 * f[j], 2 * f[j] + 1);
                trip.push((ui, uj, re));
                trip.push((ui, vj, im));
                trip.push((vi, uj, -im));
                trip.push((vi, vj, re));
            }
        }
    }
    let k = Csr::from_triplets(ndof, trip);

    // boundary conditions by elimination: x = x_free + x_pin
    let mut x_pin = vec![T::zero(); ndof];
    x_pin[2 * pin1] = T::one(); // u(1) = 1; the other pinned dofs are zero
    let pinned = [2 * pin0, 2 * pin0 + 1, 2 * pin1, 2 * pin1 + 1];

    let mut rhs = vec![T::zero(); ndof];
    k.matvec(&x_pin, &mut rhs);
    for r in rhs.iter_mut() {
        *r = -*r;
    }
    for &p in &pinned {
        rhs[p] = T::zero();
    }

    // initial guess: identity map (exact solution for μ = 0), reduced to
    // its free component
    let mut x = vec![T::zero(); ndof];
    for (i, z) in grid.nodes().iter().enumerate() {
        x[2 * i] = z.re;
        x[2 * i + 1] = z.im;
    }
    for i in 0..ndof {
        x[i] = x[i] - x_pin[i];
    }
    for &p in &pinned {
        x[p] = T::zero();
    }

    let mut diag = k.diagonal(ndof);
    for d in diag.iter_mut() {
        if *d <= T::zero() {
            *d = T::one();
        }
    }

    // PCG on the free dofs
    let apply = |x: &[T], y: &mut [T]| {
        k.matvec(x, y);
        for &p in &pinned {
            y[p] = T::zero();
        }
    };
    let mut r = vec![T::zero(); ndof];
    apply(&x, &mut r);
    for i in 0..ndof {
        r[i] = rhs[i] - r[i];
    }
    let mut z: Vec<T> = r.iter().zip(&diag).map(|(ri, di)| *ri / *di).collect();
    for &p in &pinned {
        z[p] = T::zero();
    }
    let mut p = z.clone();
    let dot = |a: &[T], bb: &[T]| -> T {
        a.iter()
            .zip(bb)
            .map(|(x, y)| *x * *y)
            .fold(T::zero(), |s, v| s + v)
    };
    let mut rho = dot(&r, &z);
    let rhs_norm = dot(&rhs, &rhs).sqrt().max(T::of(1e-300));
    let tol = T::of(1e-12) * rhs_norm;
    let mut q = vec![T::zero(); ndof];
    let max_iter = 60_000;
    let mut converged = false;
    for _it in 0..max_iter {
        let rn = dot(&r, &r).sqrt();
        if rn <= tol {
            converged = true;
            break;
        }
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if pq <= T::zero() {
            return Err(ReconstructError::SingularSystem);
        }
        let alpha = rho / pq;
        for i in 0..ndof {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * q[i];
        }
        for (zi, (ri, di)) in z.iter_mut().zip(r.iter().zip(&diag)) {
            *zi = *ri / *di;
        }
        for &pp in &pinned {
            z[pp] = T::zero();
        }
        let rho_new = dot(&r, &z);
        let beta = rho_new / rho;
        rho = rho_new;
        for i in 0..ndof {
            p[i] = z[i] + beta * p[i];
        }
    }
    if !converged {
        let rn = dot(&r, &r).sqrt() / rhs_norm;
        return Err(ReconstructError::NonConvergence(
            rn.to_f64().unwrap_or(f64::NAN),
        ));
    }

    let values: Vec<Cx<T>> = (0..nn)
        .map(|i| Complex::new(x[2 * i] + x_pin[2 * i], x[2 * i + 1] + x_pin[2 * i + 1]))
        .collect();
    Ok(values)
}

/// Root-mean-square mismatch between the per-face Beltrami coefficient of
/// the node map and the prescribed field.
pub fn beltrami_residual_rms<T: Real>(
    grid: &Arc<DiskGrid<T>>,
    node_map: &[Cx<T>],
    target: &HbsField<T>,
) -> T {
    let got = beltrami_from_map(grid, node_map).expect("solved map is orientation-preserving");
    let n = got.values.len();
    let mut acc = T::zero();
    for (a, b) in got.values.iter().zip(&target.field.values) {
        acc = acc + (a - b).norm_sqr();
    }
    (acc / T::of_usize(n)).sqrt()
}

/// Piecewise-linear interpolation of node values at an arbitrary disk point.
pub fn interpolate_node_map<T: Real>(
    grid: &Arc<DiskGrid<T>>,
    node_map: &[Cx<T>],
    z: Cx<T>,
) -> Cx<T> {
    let mut p = z;
    for _ in 0..8 {
        if let Some(face) = grid.locate(p) {
            let bc = grid.barycentric(face, p);
            let f = grid.faces()[face];
            return node_map[f[0] as usize] * Complex::new(bc[0], T::zero())
                + node_map[f[1] as usize] * Complex::new(bc[1], T::zero())
                + node_map[f[2] as usize] * Complex::new(bc[2], T::zero());
        }
        p = p * Complex::new(T::of(0.998), T::zero());
    }
    // fall back to the nearest node
    let mut best = T::infinity();
    let mut val = Complex::new(T::zero(), T::zero());
    for (n, v) in grid.nodes().iter().zip(node_map) {
        let d = (n - z).norm();
        if d < best {
            best = d;
            val = *v;
        }
    }
    val
}

/// Moebius of the form `κ(u − a)/(u − b)` kept factored so that the
/// anchor differences stay exact for inputs crowded around the anchors.
#[derive(Debug, Clone, Copy)]
struct LineFrame<T: Real> {
    kappa: Cx<T>,
    zero_anchor: Cx<T>,
    inf_anchor: Cx<T>,
}

impl<T: Real> LineFrame<T> {
    fn apply(&self, u: Cx<T>) -> Cx<T> {
        self.kappa * (u - self.zero_anchor) / (u - self.inf_anchor)
    }

    fn apply_infinity(&self) -> Cx<T> {
        self.kappa
    }
}

/// One welding stage: the pair that merged sat at `(xi, eta)` on the real
/// axis of the current frame. The stage map is
/// `S(ζ) = ±sqrt((ζ−ξ)(ζ−η))/half`, which sends ξ and η to 0, keeps the
/// outside material real with its sign, and lifts the fold between them
/// onto a vertical tooth. Working from the anchor differences keeps the
/// map exact when ζ is exponentially close to one of the fold ends.
#[derive(Debug, Clone, Copy)]
struct WeldStage<T: Real> {
    xi: T,
    eta: T,
    /// frame renormalization applied after the slit map, keeping the
    /// running coordinates O(1) across hundreds of stages
    scale: T,
}

impl<T: Real> WeldStage<T> {
    fn half(&self) -> T {
        (self.xi - self.eta) / T::of(2.0)
    }

    fn apply_real(&self, x: T) -> T {
        let h = self.half();
        let ep = (x - self.xi) / h;
        let em = (x - self.eta) / h;
        let s = (ep * em).sqrt() * self.scale;
        if ep >= T::zero() {
            s
        } else {
            -s
        }
    }

    fn apply_point(&self, z: Cx<T>) -> Cx<T> {
        let h = self.half();
        if z.im == T::zero() {
            let ep = (z.re - self.xi) / h;
            let em = (z.re - self.eta) / h;
            let p = ep * em;
            if p >= T::zero() {
                let s = p.sqrt() * self.scale;
                return Complex::new(if ep >= T::zero() { s } else { -s }, T::zero());
            }
            // inside the fold: lift onto the tooth from above
            return Complex::new(T::zero(), (-p).sqrt() * self.scale);
        }
        let hc = Complex::new(h, T::zero());
        let ep = (z - Complex::new(self.xi, T::zero())) / hc;
        let em = (z - Complex::new(self.eta, T::zero())) / hc;
        // factored roots keep far-field magnitudes (which can reach e^150
        // and beyond mid-cascade) from overflowing in the product
        let r = ep.sqrt() * em.sqrt();
        let r = if r.im < T::zero() || (r.im == T::zero() && r.re < T::zero()) {
            -r
        } else {
            r
        };
        r * Complex::new(self.scale, T::zero())
    }
}

/// Conformal pair produced by the welding construction.
pub struct WeldedMaps<T: Real> {
    /// interior zipper of the intermediate domain
    interior_chain: crate::zipper::ConformalMapChain<T>,
    /// interior layout map in the chain's half-plane frame: since the
    /// chain pins its first boundary image at 1, the composition of the
    /// Cayley stage with the anchored circle-to-line Moebius collapses to
    /// the affine map `w ↦ p_affine.0·w + p_affine.1`
    p_affine: (Cx<T>, Cx<T>),
    q_frame: LineFrame<T>,
    stages: Vec<WeldStage<T>>,
    pin: (Cx<T>, Cx<T>), // M(ζ) = (ζ − pin.0)/(ζ − pin.1)
    /// welded curve samples `y_k = g₁(w_k) = g₂(z_k)`
    pub curve: Vec<Cx<T>>,
}

impl<T: Real> WeldedMaps<T> {
    fn finish(&self, v: Cx<T>) -> Cx<T> {
        let one = Complex::new(T::one(), T::zero());
        if v.norm() > T::of(1e100) {
            // asymptotic form; v² would overflow
            let correction = (self.pin.1 - self.pin.0) / v / v;
            return one + correction;
        }
        let v2 = v * v;
        (v2 - self.pin.0) / (v2 - self.pin.1)
    }

    /// `g₂`: maps the exterior of the unit disk onto the curve's exterior.
    pub fn g2(&self, z: Cx<T>) -> Cx<T> {
        let mut w = self.q_frame.apply(z);
        for st in &self.stages {
            w = st.apply_point(w);
        }
        self.finish(w)
    }

    /// `g₁`: maps the intermediate domain onto the curve's interior.
    pub fn g1(&self, w: Cx<T>) -> Result<Cx<T>, ZipperError> {
        let Some(h) = self.interior_chain.eval_upper(w) else {
            // the first boundary anchor, pinned to 1 by construction
            return Ok(Complex::new(T::one(), T::zero()));
        };
        let mut v = self.p_affine.0 * h + self.p_affine.1;
        for st in &self.stages {
            v = st.apply_point(v);
        }
        Ok(self.finish(v))
    }
}

/// Conformal welding construction: given corresponding cyclic boundary
/// samples `disk_pts` on the unit circle and `target_pts` on the boundary
/// of the intermediate domain, produces conformal maps `g₁` (interior) and
/// `g₂` (exterior of the disk) agreeing on the samples, pinned by
/// `g₁(0) = 0`, `g₁(1) = 1`, `g₂(∞) = ∞`.
///
/// The construction runs the geodesic zipper in reverse: both boundary
/// parameter lines are laid on the real axis of a common half-plane
/// (interior material on the positive ray, exterior on the negative), and
/// one vertical geodesic tooth per sample merges the innermost pair after
/// an affine renormalization; the final squaring welds the leftover rays.
pub fn geodesic_weld<T: Real>(
    disk_pts: &[Cx<T>],
    target_pts: &[Cx<T>],
) -> Result<WeldedMaps<T>, ReconstructError> {
    let n = disk_pts.len();
    assert_eq!(n, target_pts.len());
    if n < 8 {
        return Err(ReconstructError::WeldingMismatch(f64::NAN));
    }

    // interior parameterization of the intermediate domain, built on all
    // the target points; the tracked boundary images keep the cyclic order
    // exactly even where they crowd
    let target = Contour::new(target_pts.to_vec())
        .map_err(|_| ReconstructError::WeldingMismatch(f64::NAN))?;
    let (oriented, was) = target
        .orient(crate::contour::Orientation::Clockwise)
        .map_err(|_| ReconstructError::WeldingMismatch(f64::NAN))?;
    let chain = zipper_build(&oriented, Direction::Interior)
        .map_err(|_| ReconstructError::WeldingMismatch(f64::NAN))?;
    let mut u: Vec<Cx<T>> = chain.boundary_images().to_vec();
    let mut uh: Vec<Option<T>> = chain.boundary_upper_images().to_vec();
    if was == crate::contour::Orientation::Counterclockwise {
        // orient() reversed indices 1..n; undo for the original order
        let mut back = vec![u[0]];
        back.extend(u[1..].iter().rev().copied());
        u = back;
        let mut back_h = vec![uh[0]];
        back_h.extend(uh[1..].iter().rev().copied());
        uh = back_h;
    }

    // The layout needs both sequences counterclockwise; reverse jointly to
    // keep the pairing. The image directions follow the polygon
    // orientations structurally (conformal maps preserve the boundary
    // orientation), which stays robust however tightly the images crowd.
    let mut zs: Vec<Cx<T>> = disk_pts.to_vec();
    let u_dir = was == crate::contour::Orientation::Counterclockwise;
    let z_dir = Contour::new(zs.clone())
        .ok()
        .and_then(|c| c.orientation().ok())
        .map(|o| o == crate::contour::Orientation::Counterclockwise)
        .ok_or(ReconstructError::WeldingMismatch(f64::NAN))?;
    if u_dir != z_dir {
        return Err(ReconstructError::WeldingMismatch(f64::NAN));
    }
    let mut us = u;
    if !u_dir {
        us[1..].reverse();
        uh[1..].reverse();
        zs[1..].reverse();
    }

    // Half-plane coordinates: anchors index 0 ↦ ∞, index 1 ↦ 0. The
    // interior side works in the chain's own half-plane frame, where the
    // anchored layout Moebius is affine (the chain pins us[0] = 1), so no
    // cancellation occurs however tightly the disk images crowd.
    let p_m = circle_to_line(us[1], us[0], us[2], true);
    let i_half = Complex::new(T::zero(), T::of(0.5));
    let one_c = Complex::new(T::one(), T::zero());
    let p_aff = (
        p_m.kappa * (one_c - us[1]) * i_half,
        p_m.kappa * (one_c + us[1]) / T::of(2.0),
    );
    let q_m = circle_to_line(zs[1], zs[0], zs[2], false);
    let mut xi: Vec<T> = Vec::with_capacity(n);
    let mut eta: Vec<T> = Vec::with_capacity(n);
    for k in 0..n {
        xi.push(match (k, uh[k]) {
            (0, _) | (_, None) => T::infinity(),
            (_, Some(h)) => {
                // h is real, so the affine image's real part needs no
                // complex product (which would overflow for the huge
                // half-plane values near the anchor)
                let v = p_aff.0.re * h + p_aff.1.re;
                if v.is_finite() {
                    v
                } else {
                    T::infinity() // effectively at the ∞ anchor
                }
            }
        });
        eta.push(if k == 0 {
            T::infinity()
        } else {
            q_m.apply(zs[k]).re
        });
    }
    // layout sanity: interior coordinates positive (infinite entries sit
    // at the anchor and alias later), exterior strictly negative
    for k in 2..n {
        let xi_ok = xi[k] > T::zero() || xi[k] == T::infinity();
        if !xi_ok || !(eta[k] < T::zero()) {
            return Err(ReconstructError::WeldingMismatch(k as f64));
        }
    }

    // merged curve positions; entry k holds the pair's welded position or
    // aliases the previous pair where the coordinates have collided at
    // floating-point resolution (very crowded boundary images)
    let mut merged: Vec<Cx<T>> = vec![Complex::new(T::zero(), T::zero()); n];
    let mut is_merged = vec![false; n];
    let mut alias: Vec<usize> = (0..n).collect();
    is_merged[1] = true; // pair 1 sits at the origin from the start
    let mut stages: Vec<WeldStage<T>> = Vec::with_capacity(n - 2);
    let mut last_active = 1usize;
    for k in 2..n {
        // the innermost remaining pair must be strictly separated from the
        // origin where the previous pair just landed
        if !(xi[k] > T::zero()) || !(eta[k] < T::zero()) || !xi[k].is_finite() || !eta[k].is_finite()
        {
            alias[k] = last_active;
            continue;
        }
        let mut st = WeldStage {
            xi: xi[k],
            eta: eta[k],
            scale: T::one(),
        };
        if !(st.half() > T::zero()) || !st.half().is_finite() {
            alias[k] = last_active;
            continue;
        }
        // unmerged boundary material stays real, outside the fold; pairs
        // folded in by rounding collapse to zero and alias later
        for j in k + 1..n {
            let new_xi = st.apply_real(xi[j]);
            let new_eta = st.apply_real(eta[j]);
            xi[j] = if new_xi > T::zero() { new_xi } else { T::zero() };
            eta[j] = if new_eta < T::zero() { new_eta } else { T::zero() };
        }
        // renormalize the frame around the next separable pair
        if let Some(next) = (k + 1..n).find(|&j| xi[j] > T::zero() && eta[j] < T::zero()) {
            let lambda = T::one() / (xi[next] * (-eta[next])).sqrt();
            if lambda.is_finite() && lambda > T::zero() {
                st.scale = lambda;
                for j in k + 1..n {
                    xi[j] = xi[j] * lambda;
                    eta[j] = eta[j] * lambda;
                }
            }
        }
        // previously merged curve points ride along
        for j in 0..n {
            if is_merged[j] {
                merged[j] = st.apply_point(merged[j]);
            }
        }
        // the welded pair lands at the new origin
        merged[k] = Complex::new(T::zero(), T::zero());
        is_merged[k] = true;
        last_active = k;
        stages.push(st);
    }
    // a few collided pairs are tolerable; wholesale collapse means the
    // boundary images have outrun f64 resolution for this sample count
    let aliased = alias.iter().enumerate().filter(|(i, a)| **a != *i).count();
    if aliased * 5 > n {
        return Err(ReconstructError::WeldingMismatch(aliased as f64));
    }

    // Pin Moebius: the construction's first pair is the boundary anchor
    // (disk point 1 ↔ target point 1) sitting at ∞ in raw coordinates, so
    // M(ζ) = (ζ − A)/(ζ − C) with A = raw g₁(0) and C = raw g₂(∞) realizes
    // all three pins at once: M(A) = 0, M(∞) = 1, M(C) = ∞.
    let interior_zero = {
        let h = chain
            .eval_upper(Complex::new(T::zero(), T::zero()))
            .ok_or(ReconstructError::WeldingMismatch(f64::NAN))?;
        let mut v = p_aff.0 * h + p_aff.1;
        for st in &stages {
            v = st.apply_point(v);
        }
        v
    };
    let exterior_inf = {
        let mut v = q_m.apply_infinity();
        for st in &stages {
            v = st.apply_point(v);
        }
        v
    };
    let one = Complex::new(T::one(), T::zero());
    let pin = (interior_zero * interior_zero, exterior_inf * exterior_inf);

    let welded = WeldedMaps {
        interior_chain: chain,
        p_affine: p_aff,
        q_frame: q_m,
        stages,
        pin,
        curve: Vec::new(),
    };
    let mut curve = Vec::with_capacity(n);
    for k in 0..n {
        let src = alias[k];
        let pos = if k == 0 {
            one // the ∞ anchor maps to the pin target exactly
        } else {
            welded.finish(merged[src])
        };
        curve.push(pos);
    }
    // undo the pairing reversal so curve[k] corresponds to disk_pts[k]
    if !u_dir {
        curve[1..].reverse();
    }

    let mut welded = welded;
    welded.curve = curve;
    Ok(welded)
}

/// Moebius sending the circle through (a0, a_inf) to the real line with
/// `a0 ↦ 0`, `a_inf ↦ ∞`, normalized so a third sample lands on the
/// positive axis; `inside` selects whether the disk interior or exterior
/// maps to the upper half-plane.
fn circle_to_line<T: Real>(
    a0: Cx<T>,
    a_inf: Cx<T>,
    probe: Cx<T>,
    inside: bool,
) -> LineFrame<T> {
    let d = (probe - a0) / (probe - a_inf);
    let kappa = Complex::new(d.norm(), T::zero()) / d;
    let frame = LineFrame {
        kappa,
        zero_anchor: a0,
        inf_anchor: a_inf,
    };
    // side check at a representative region point
    let rep = if inside {
        Complex::new(T::zero(), T::zero())
    } else {
        // far outside the unit circle
        Complex::new(T::of(37.0), T::of(11.0))
    };
    if frame.apply(rep).im >= T::zero() {
        frame
    } else {
        LineFrame {
            kappa: -kappa,
            ..frame
        }
    }
}

/// Reconstructed shape with its pin certificate.
#[derive(Debug, Clone)]
pub struct ReconstructedShape<T: Real> {
    pub boundary: Contour<T>,
    /// node values of the interior quasiconformal map F
    pub interior_map: Vec<Cx<T>>,
    /// achieved |F(0)| and |F(1) − 1|
    pub pin_residuals: (T, T),
    /// RMS mismatch between the per-face Beltrami coefficient of F and the
    /// input signature
    pub mu_residual: T,
}

/// Full reconstruction: free-boundary Beltrami solve, then geodesic
/// welding of `n` uniform boundary samples.
pub fn reconstruct_shape<T: Real>(
    b: &HbsField<T>,
    n: usize,
) -> Result<ReconstructedShape<T>, ReconstructError> {
    let grid = &b.field.grid;
    let f = solve_beltrami_free(b)?;
    let mu_residual = beltrami_residual_rms(grid, &f, b);

    let m = grid.resolution() as i64;
    let pin0 = grid.node_id(0, 0).unwrap() as usize;
    let pin1 = grid.node_id(m, 0).unwrap() as usize;
    let pin_res = (
        f[pin0].norm(),
        (f[pin1] - Complex::new(T::one(), T::zero())).norm(),
    );

    let disk_pts: Vec<Cx<T>> = (0..n)
        .map(|k| {
            let t = T::TAU() * T::of_usize(k) / T::of_usize(n);
            Complex::new(t.cos(), t.sin())
        })
        .collect();
    // boundary values of F by linear extrapolation from two interior
    // rings; direct sampling at |z| = 1 is not covered by the lattice
    // triangulation, and one-ring sampling leaves an O(h) inward bias that
    // shows up as an anchor-scale mismatch in the welded curve
    let h = T::one() / T::of_usize(grid.resolution());
    let r1 = T::one() - T::of(0.5) * h;
    let r2 = T::one() - T::of(1.5) * h;
    let w1 = (T::one() - r2) / (r1 - r2);
    let w2 = (r1 - T::one()) / (r1 - r2);
    let targets: Vec<Cx<T>> = disk_pts
        .iter()
        .map(|&z| {
            let a = interpolate_node_map(grid, &f, z * Complex::new(r1, T::zero()));
            let b = interpolate_node_map(grid, &f, z * Complex::new(r2, T::zero()));
            a * Complex::new(w1, T::zero()) + b * Complex::new(w2, T::zero())
        })
        .collect();
    let welded = geodesic_weld(&disk_pts, &targets)?;
    // pairs that collided at floating-point resolution share a welded
    // position; the polygon keeps one point per distinct position
    let mut boundary_pts: Vec<Cx<T>> = Vec::with_capacity(welded.curve.len());
    for &p in &welded.curve {
        if boundary_pts.last() != Some(&p) {
            boundary_pts.push(p);
        }
    }
    while boundary_pts.len() > 1 && boundary_pts.last() == boundary_pts.first() {
        boundary_pts.pop();
    }
    let boundary =
        Contour::new(boundary_pts).map_err(|_| ReconstructError::WeldingMismatch(f64::NAN))?;
    Ok(ReconstructedShape {
        boundary,
        interior_map: f,
        pin_residuals: pin_res,
        mu_residual,
    })
}
