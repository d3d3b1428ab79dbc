//! The harmonic Beltrami signature: full pipeline from a contour to the
//! rotation-normalized Beltrami field of the welding's harmonic extension,
//! plus the signature and welding distances.

use crate::complexgeom::{beltrami_from_map, BeltramiField, DiskGrid};
use crate::contour::{Contour, Orientation};
use crate::error::{HbsError, StageError};
use crate::harmonic::{poisson_extend, welding_from_chains, WeldingMap};
use crate::normalize::{center_boundary, pin_infinity};
use crate::scalar::{arg_2pi, mod_2pi, unit, Cx, Real};
use crate::zipper::{zipper_build, Direction};
use num_complex::Complex;
use std::sync::Arc;

/// Pipeline parameters; defaults follow the reference procedure
/// (200 boundary samples, grid resolution 100, centering tolerance 1e-5).
#[derive(Debug, Clone, Copy)]
pub struct HbsConfig {
    pub samples: usize,
    pub grid_m: usize,
    pub eps: f64,
}

impl Default for HbsConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            grid_m: 100,
            eps: 1e-5,
        }
    }
}

/// The signature: a Beltrami field satisfying the rotation-normalization
/// conditions, with the verified certificate values.
#[derive(Debug, Clone)]
pub struct HbsField<T: Real> {
    pub field: BeltramiField<T>,
    /// |arg ∫B| after normalization (must be ≤ 1e-6)
    pub tau0_residual: T,
    /// arg ∫B/z after normalization (must lie in [0, π))
    pub tau1: T,
}

impl<T: Real> HbsField<T> {
    pub fn sup_norm(&self) -> T {
        self.field.sup_norm()
    }
}

/// Everything the pipeline produces for one shape.
#[derive(Debug, Clone)]
pub struct PipelineOutput<T: Real> {
    /// welding after the mean-zero and infinity normalizations
    pub welding: WeldingMap<T>,
    /// welding additionally normalized by Φ₂′(∞) ≥ 0 and f(1) = 1, the
    /// baseline representation used for welding distances
    pub welding_baseline: WeldingMap<T>,
    pub hbs: HbsField<T>,
}

/// Disk integrals of a face field: `∫ μ dz` and `∫ μ/z dz` as centroid
/// Riemann sums; the `1/z` integrand excludes faces with centroids inside
/// radius `1.5/M` and rescales for the excluded area.
fn disk_integrals<T: Real>(field: &BeltramiField<T>) -> (Cx<T>, Cx<T>) {
    let grid = &field.grid;
    let area = grid.face_area();
    let cutoff = T::of(1.5) / T::of_usize(grid.resolution());
    let mut i0 = Complex::new(T::zero(), T::zero());
    let mut i1 = Complex::new(T::zero(), T::zero());
    let mut included = T::zero();
    let mut total = T::zero();
    for (v, c) in field.values.iter().zip(grid.centroids()) {
        i0 = i0 + v * Complex::new(area, T::zero());
        total = total + area;
        if c.norm() >= cutoff {
            i1 = i1 + v / c * Complex::new(area, T::zero());
            included = included + area;
        }
    }
    (i0, i1 * Complex::new(total / included, T::zero()))
}

/// Per-node mean of the incident face values, for interpolating a face
/// field at arbitrary points.
fn node_average<T: Real>(field: &BeltramiField<T>) -> Vec<Cx<T>> {
    let grid = &field.grid;
    let mut acc = vec![Complex::new(T::zero(), T::zero()); grid.node_count()];
    let mut cnt = vec![0u32; grid.node_count()];
    for (f, v) in grid.faces().iter().zip(&field.values) {
        for &vid in f {
            acc[vid as usize] = acc[vid as usize] + v;
            cnt[vid as usize] += 1;
        }
    }
    for (a, c) in acc.iter_mut().zip(&cnt) {
        if *c > 0 {
            *a = *a / T::of_usize(*c as usize);
        }
    }
    acc
}

fn interpolate<T: Real>(
    grid: &Arc<DiskGrid<T>>,
    node_vals: &[Cx<T>],
    face_vals: &[Cx<T>],
    w: Cx<T>,
) -> Cx<T> {
    let mut p = w;
    for _ in 0..6 {
        if let Some(face) = grid.locate(p) {
            let bc = grid.barycentric(face, p);
            let f = grid.faces()[face];
            return node_vals[f[0] as usize] * Complex::new(bc[0], T::zero())
                + node_vals[f[1] as usize] * Complex::new(bc[1], T::zero())
                + node_vals[f[2] as usize] * Complex::new(bc[2], T::zero());
        }
        // step inward; points rotated past the rim take near-rim values
        p = p * Complex::new(T::of(0.995), T::zero());
    }
    // nearest-face fallback
    let mut best = T::infinity();
    let mut val = Complex::new(T::zero(), T::zero());
    for (c, v) in grid.centroids().iter().zip(face_vals) {
        let d = (c - w).norm();
        if d < best {
            best = d;
            val = *v;
        }
    }
    val
}

/// Resampled field `e^{−2iθ}·μ(sign·e^{iθ}z)` on the standard grid, with
/// `sign·e^{iθ}` given as one unit factor.
fn rotated_field<T: Real>(
    field: &BeltramiField<T>,
    node_vals: &[Cx<T>],
    inner: Cx<T>,
    prefactor: Cx<T>,
) -> BeltramiField<T> {
    let grid = &field.grid;
    let values = grid
        .centroids()
        .iter()
        .map(|&c| prefactor * interpolate(grid, node_vals, &field.values, inner * c))
        .collect();
    BeltramiField::new(grid.clone(), values)
}

/// Rotation normalization: produces the unique class representative with
/// `arg ∫B = 0` and `arg ∫B/z ∈ [0, π)`.
///
/// The rotation angle is solved against the *resampled* field so the
/// certificate holds on the actual output: starting from `θ = τ₀/2`, the
/// residual argument of the resampled integral feeds back into θ until
/// `|arg ∫B| ≤ 1e-7`, and the sign of the inner rotation is chosen to put
/// `arg ∫B/z` into `[0, π)`.
pub fn normalize_rotation<T: Real>(mu: &BeltramiField<T>) -> Result<HbsField<T>, HbsError> {
    let (i0, i1) = disk_integrals(mu);
    let floor = T::of(1e-9);
    if i0.norm() < floor || i1.norm() < floor {
        return Err(HbsError::AmbiguousNormalization(
            i0.norm().min(i1.norm()).to_f64().unwrap_or(0.0),
        ));
    }
    let tau0 = arg_2pi(i0);
    let tau1 = arg_2pi(i1);
    let node_vals = node_average(mu);

    // target inner angle and lip sign from the continuum formula
    let mut theta = tau0 / T::of(2.0);
    let kappa = mod_2pi(tau1 - theta);
    if kappa >= T::PI() {
        theta = theta + T::PI();
    }

    let mut out = None;
    for _pass in 0..25 {
        let small = mod_2pi(theta).min(T::TAU() - mod_2pi(theta)) < T::of(1e-9);
        let candidate = if small {
            // no resampling needed: apply the residual prefactor only
            let (j0, _) = disk_integrals(mu);
            let pre = unit(-arg_2pi(j0));
            BeltramiField::new(
                mu.grid.clone(),
                mu.values.iter().map(|v| pre * v).collect(),
            )
        } else {
            let inner = unit(theta);
            let pre = unit(-T::of(2.0) * theta);
            let draft = rotated_field(mu, &node_vals, inner, pre);
            // zero the integral argument exactly on the sampled field
            let (j0, _) = disk_integrals(&draft);
            let fix = unit(-arg_2pi(j0));
            BeltramiField::new(
                draft.grid.clone(),
                draft.values.iter().map(|v| fix * v).collect(),
            )
        };
        let (j0, j1) = disk_integrals(&candidate);
        let res0 = {
            let a = arg_2pi(j0);
            a.min(T::TAU() - a)
        };
        let a1 = arg_2pi(j1);
        if a1 < T::PI() {
            if res0 <= T::of(1e-6) {
                out = Some(HbsField {
                    field: candidate,
                    tau0_residual: res0,
                    tau1: a1,
                });
                break;
            }
            theta = theta + arg_2pi(j0) / T::of(2.0);
        } else {
            // wrong lip: flip the inner sign
            theta = theta + T::PI();
        }
    }
    out.ok_or(HbsError::AmbiguousNormalization(f64::NAN))
}

/// L² distance between signatures over face centers.
pub fn hbs_distance<T: Real>(b1: &HbsField<T>, b2: &HbsField<T>) -> Result<T, HbsError> {
    if !b1.field.same_grid(&b2.field) {
        return Err(HbsError::GridMismatch);
    }
    let n = b1.field.values.len();
    let mut acc = T::zero();
    for (a, b) in b1.field.values.iter().zip(&b2.field.values) {
        acc = acc + (a - b).norm_sqr();
    }
    Ok((acc / T::of_usize(n)).sqrt())
}

/// Sup-norm distance between signatures, used by the reconstruction
/// robustness analysis.
pub fn hbs_distance_sup<T: Real>(b1: &HbsField<T>, b2: &HbsField<T>) -> Result<T, HbsError> {
    if !b1.field.same_grid(&b2.field) {
        return Err(HbsError::GridMismatch);
    }
    Ok(b1
        .field
        .values
        .iter()
        .zip(&b2.field.values)
        .map(|(a, b)| (a - b).norm())
        .fold(T::zero(), |x, y| x.max(y)))
}

/// Number of uniform boundary samples used by the welding distance.
pub const WELDING_DISTANCE_SAMPLES: usize = 1000;

/// L² distance between two baseline-normalized weldings, resampled at
/// `WELDING_DISTANCE_SAMPLES` common boundary points.
pub fn welding_distance<T: Real>(
    f1: &WeldingMap<T>,
    f2: &WeldingMap<T>,
) -> Result<T, HbsError> {
    for (tag, f) in [("first", f1), ("second", f2)] {
        let at_one = f.eval_angle(T::zero());
        let off = at_one.min(T::TAU() - at_one);
        if off > T::of(1e-6) {
            return Err(HbsError::NotNormalized(format!(
                "{tag} welding has f(1) = e^{{i{off:?}}}"
            )));
        }
    }
    let n = WELDING_DISTANCE_SAMPLES;
    let mut acc = T::zero();
    for k in 0..n {
        let phi = T::TAU() * T::of_usize(k) / T::of_usize(n);
        let d = f1.eval_point(phi) - f2.eval_point(phi);
        acc = acc + d.norm_sqr();
    }
    Ok((acc / T::of_usize(n)).sqrt())
}

/// Full pipeline: resample → zipper both sides → normalize both → welding
/// → harmonic extension → Beltrami field → rotation normalization.
pub fn compute_pipeline<T: Real>(
    shape: &Contour<T>,
    cfg: &HbsConfig,
    grid: &Arc<DiskGrid<T>>,
) -> Result<PipelineOutput<T>, StageError> {
    assert_eq!(grid.resolution(), cfg.grid_m, "grid must match the config");

    let (oriented, _) = shape
        .orient(Orientation::Clockwise)
        .map_err(|e| StageError::new("contour-orient", e))?;
    let pts = oriented
        .resample_uniform(cfg.samples)
        .map_err(|e| StageError::new("contour-resample", e))?;

    let interior = zipper_build(&pts, Direction::Interior).map_err(|e| StageError::new("zipper-interior", e))?;
    let exterior = zipper_build(&pts, Direction::Exterior).map_err(|e| StageError::new("zipper-exterior", e))?;

    let centered = center_boundary(interior.boundary_images(), T::of(cfg.eps))
        .map_err(|e| StageError::new("normalize-interior", e))?;
    let pin = pin_infinity(&exterior).map_err(|e| StageError::new("normalize-exterior", e))?;

    let welding =
        welding_from_chains(&centered, &exterior, &pin).map_err(|e| StageError::new("welding", e))?;

    // baseline-normalized welding: Φ₂′(∞) ≥ 0 via the large-radius proxy,
    // then f(1) = 1 via an interior rotation
    let welding_baseline = {
        let proxy = Complex::new(T::of(1e6), T::zero());
        let w_in = Complex::new(T::one(), T::zero()) / pin.apply(proxy);
        let far = exterior
            .eval_inverse(w_in)
            .map_err(|e| StageError::new("welding-baseline", e))?;
        let slope = far / proxy;
        let sigma = arg_2pi(slope);
        let rho = welding.eval_angle(sigma);
        let pairs: Vec<(T, T)> = welding
            .phis()
            .iter()
            .zip(welding.omegas())
            .map(|(&p, &o)| (p - sigma, o - rho))
            .collect();
        WeldingMap::new(&pairs).map_err(|e| StageError::new("welding-baseline", e))?
    };

    let h = poisson_extend(&welding, grid);
    let mu = beltrami_from_map(grid, &h.values).map_err(|e| StageError::new("beltrami", e))?;
    let hbs = normalize_rotation(&mu).map_err(|e| StageError::new("rotation-normalization", e))?;

    Ok(PipelineOutput {
        welding,
        welding_baseline,
        hbs,
    })
}

/// Convenience wrapper building its own grid.
pub fn compute_hbs<T: Real>(shape: &Contour<T>, cfg: &HbsConfig) -> Result<HbsField<T>, StageError> {
    let grid = DiskGrid::build(cfg.grid_m).map_err(|e| StageError::new("grid", e))?;
    Ok(compute_pipeline(shape, cfg, &grid)?.hbs)
}
