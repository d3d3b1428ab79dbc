//! The lattice disk grid `{j/M + ik/M : |z| ≤ 1}` with its fixed
//! triangulation, and per-face Beltrami coefficients of piecewise-linear maps.

use crate::error::ComplexGeomError;
use crate::scalar::{Cx, Real};
use num_complex::Complex;
use std::sync::Arc;

/// Triangulated lattice grid on the closed unit disk.
///
/// Nodes are scanned row-major (k outer, j inner, both from −M to M).
/// Each unit lattice square is split along the diagonal radially aligned
/// with the square's center ("toward the origin"); a triangle is kept only
/// if all three of its vertices lie in the disk. Face order is row-major
/// over squares with the lower triangle before the upper one. That order
/// is part of the serialization contract.
#[derive(Debug)]
pub struct DiskGrid<T: Real> {
    resolution: usize,
    nodes: Vec<Cx<T>>,
    /// lattice (j,k) -> node id, dense over the (2M+1)² lattice
    index: Vec<Option<u32>>,
    faces: Vec<[u32; 3]>,
    centroids: Vec<Cx<T>>,
    face_area: T,
    boundary: Vec<u32>,
    /// square (j,k) -> face ids (lower, upper), dense over the (2M)² squares
    square_faces: Vec<[i32; 2]>,
}

impl<T: Real> DiskGrid<T> {
    pub fn build(resolution: usize) -> Result<Arc<Self>, ComplexGeomError> {
        if resolution < 2 {
            return Err(ComplexGeomError::ResolutionTooSmall(resolution));
        }
        let m = resolution as i64;
        let side = (2 * m + 1) as usize;
        let mut index = vec![None; side * side];
        let mut nodes = Vec::new();
        let mut boundary = Vec::new();
        let inv_m = T::one() / T::of_usize(resolution);
        for k in -m..=m {
            for j in -m..=m {
                if j * j + k * k <= m * m {
                    let id = nodes.len() as u32;
                    index[((k + m) as usize) * side + (j + m) as usize] = Some(id);
                    nodes.push(Complex::new(T::of(j as f64) * inv_m, T::of(k as f64) * inv_m));
                    if j * j + k * k == m * m {
                        boundary.push(id);
                    }
                }
            }
        }
        let at = |j: i64, k: i64| -> Option<u32> {
            if j < -m || j > m || k < -m || k > m {
                None
            } else {
                index[((k + m) as usize) * side + (j + m) as usize]
            }
        };
        let mut faces = Vec::new();
        let squares = (2 * m) as usize;
        let mut square_faces = vec![[-1i32; 2]; squares * squares];
        for k in -m..m {
            for j in -m..m {
                let n00 = at(j, k);
                let n10 = at(j + 1, k);
                let n01 = at(j, k + 1);
                let n11 = at(j + 1, k + 1);
                // radial diagonal: main for quadrants 1 and 3, anti otherwise
                let main_diag = (j as f64 + 0.5) * (k as f64 + 0.5) >= 0.0;
                let split = |main: bool| -> [[Option<u32>; 3]; 2] {
                    if main {
                        [[n00, n10, n11], [n00, n11, n01]]
                    } else {
                        [[n00, n10, n01], [n10, n11, n01]]
                    }
                };
                let keepable = |tris: &[[Option<u32>; 3]; 2]| {
                    tris.iter()
                        .filter(|t| t.iter().all(|v| v.is_some()))
                        .count()
                };
                // at the rim, prefer the split that keeps more triangles so
                // every disk node (the z = 1 pin in particular) stays meshed
                let preferred = split(main_diag);
                let other = split(!main_diag);
                let tris = if keepable(&other) > keepable(&preferred) {
                    other
                } else {
                    preferred
                };
                let sq = ((k + m) as usize) * squares + (j + m) as usize;
                for (slot, tri) in tris.into_iter().enumerate() {
                    if let [Some(a), Some(b), Some(c)] = tri {
                        square_faces[sq][slot] = faces.len() as i32;
                        faces.push([a, b, c]);
                    }
                }
            }
        }
        let three = T::of(3.0);
        let centroids = faces
            .iter()
            .map(|f| (nodes[f[0] as usize] + nodes[f[1] as usize] + nodes[f[2] as usize]) / three)
            .collect();
        let face_area = inv_m * inv_m / T::of(2.0);
        Ok(Arc::new(Self {
            resolution,
            nodes,
            index,
            faces,
            centroids,
            face_area,
            boundary,
            square_faces,
        }))
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn nodes(&self) -> &[Cx<T>] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn centroids(&self) -> &[Cx<T>] {
        &self.centroids
    }

    /// Every face of the lattice triangulation has the same area `1/(2M²)`.
    pub fn face_area(&self) -> T {
        self.face_area
    }

    pub fn boundary_nodes(&self) -> &[u32] {
        &self.boundary
    }

    pub fn node_id(&self, j: i64, k: i64) -> Option<u32> {
        let m = self.resolution as i64;
        if j < -m || j > m || k < -m || k > m {
            return None;
        }
        let side = (2 * m + 1) as usize;
        self.index[((k + m) as usize) * side + (j + m) as usize]
    }

    /// Face containing the point, if any, by direct lattice lookup.
    pub fn locate(&self, z: Cx<T>) -> Option<usize> {
        let m = self.resolution as i64;
        let fm = T::of_usize(self.resolution);
        let x = (z.re * fm).to_f64()?;
        let y = (z.im * fm).to_f64()?;
        // candidate squares around (x, y); floor can sit on an edge
        let j0 = x.floor() as i64;
        let k0 = y.floor() as i64;
        for (j, k) in [
            (j0, k0),
            (j0 - 1, k0),
            (j0, k0 - 1),
            (j0 - 1, k0 - 1),
            (j0 + 1, k0),
            (j0, k0 + 1),
        ] {
            if j < -m || j >= m || k < -m || k >= m {
                continue;
            }
            let squares = 2 * self.resolution;
            let sq = ((k + m) as usize) * squares + (j + m) as usize;
            for fid in self.square_faces[sq] {
                if fid >= 0 && self.face_contains(fid as usize, z) {
                    return Some(fid as usize);
                }
            }
        }
        None
    }

    fn face_contains(&self, face: usize, z: Cx<T>) -> bool {
        let [a, b, c] = self.faces[face];
        let pa = self.nodes[a as usize];
        let pb = self.nodes[b as usize];
        let pc = self.nodes[c as usize];
        let eps = -T::of(1e-12);
        let cross = |u: Cx<T>, v: Cx<T>| u.re * v.im - u.im * v.re;
        cross(pb - pa, z - pa) >= eps && cross(pc - pb, z - pb) >= eps && cross(pa - pc, z - pc) >= eps
    }

    /// Barycentric coordinates of `z` in `face`.
    pub fn barycentric(&self, face: usize, z: Cx<T>) -> [T; 3] {
        let [a, b, c] = self.faces[face];
        let pa = self.nodes[a as usize];
        let pb = self.nodes[b as usize];
        let pc = self.nodes[c as usize];
        let cross = |u: Cx<T>, v: Cx<T>| u.re * v.im - u.im * v.re;
        let total = cross(pb - pa, pc - pa);
        [
            cross(pb - z, pc - z) / total,
            cross(pc - z, pa - z) / total,
            cross(pa - z, pb - z) / total,
        ]
    }

}

/// Complex field with one value per face of a [`DiskGrid`].
#[derive(Debug, Clone)]
pub struct BeltramiField<T: Real> {
    pub grid: Arc<DiskGrid<T>>,
    pub values: Vec<Cx<T>>,
}

impl<T: Real> BeltramiField<T> {
    pub fn new(grid: Arc<DiskGrid<T>>, values: Vec<Cx<T>>) -> Self {
        assert_eq!(grid.face_count(), values.len());
        Self { grid, values }
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.grid.resolution() == other.grid.resolution()
            && self.grid.face_count() == other.grid.face_count()
    }
}

/// Wirtinger derivatives `(f_z, f_z̄)` of the linear interpolant on one face.
pub fn face_derivatives<T: Real>(
    verts: [Cx<T>; 3],
    vals: [Cx<T>; 3],
) -> Result<(Cx<T>, Cx<T>), ComplexGeomError> {
    let e1 = verts[1] - verts[0];
    let e2 = verts[2] - verts[0];
    let g1 = vals[1] - vals[0];
    let g2 = vals[2] - vals[0];
    let denom = e1 * e2.conj() - e2 * e1.conj(); // = -4i * area for ccw faces
    if denom.norm() == T::zero() {
        return Err(ComplexGeomError::DegenerateFace(0));
    }
    let fz = (g1 * e2.conj() - g2 * e1.conj()) / denom;
    let fzb = (e1 * g2 - e2 * g1) / denom;
    Ok((fz, fzb))
}

/// Per-face Beltrami coefficient `μ = f_z̄ / f_z` of the piecewise-linear
/// interpolant of node values.
pub fn beltrami_from_map<T: Real>(
    grid: &Arc<DiskGrid<T>>,
    values: &[Cx<T>],
) -> Result<BeltramiField<T>, ComplexGeomError> {
    assert_eq!(values.len(), grid.node_count(), "one value per node");
    let mut fzs = Vec::with_capacity(grid.face_count());
    let mut mus = Vec::with_capacity(grid.face_count());
    for (fi, f) in grid.faces().iter().enumerate() {
        let verts = [
            grid.nodes()[f[0] as usize],
            grid.nodes()[f[1] as usize],
            grid.nodes()[f[2] as usize],
        ];
        let vals = [
            values[f[0] as usize],
            values[f[1] as usize],
            values[f[2] as usize],
        ];
        let (fz, fzb) =
            face_derivatives(verts, vals).map_err(|_| ComplexGeomError::DegenerateFace(fi))?;
        fzs.push(fz.norm());
        mus.push((fz, fzb));
    }
    // scale-free degeneracy test against the median |f_z|
    let mut sorted = fzs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    let tol = T::of(1e-12) * median;
    let mut values = Vec::with_capacity(mus.len());
    for (fi, (fz, fzb)) in mus.into_iter().enumerate() {
        if fz.norm() <= tol {
            return Err(ComplexGeomError::VanishingDerivative(fi));
        }
        values.push(fzb / fz);
    }
    Ok(BeltramiField::new(grid.clone(), values))
}

/// Beltrami coefficient of a composition `g ∘ f` at a point, given
/// `μ_f`, `μ_g(f(z))` and `τ = conj(f_z)/f_z`.
pub fn compose_beltrami<T: Real>(
    mu_f: Cx<T>,
    mu_g_at_fz: Cx<T>,
    tau: Cx<T>,
) -> Result<Cx<T>, ComplexGeomError> {
    let one = T::one();
    if mu_f.norm() >= one {
        return Err(ComplexGeomError::NonAdmissible(mu_f.norm().to_f64().unwrap_or(f64::NAN)));
    }
    if mu_g_at_fz.norm() >= one {
        return Err(ComplexGeomError::NonAdmissible(
            mu_g_at_fz.norm().to_f64().unwrap_or(f64::NAN),
        ));
    }
    if (tau.norm() - one).abs() > T::of(1e-6) {
        return Err(ComplexGeomError::NonAdmissible(tau.norm().to_f64().unwrap_or(f64::NAN)));
    }
    let num = mu_f + mu_g_at_fz * tau;
    let den = Complex::new(one, T::zero()) + mu_f.conj() * mu_g_at_fz * tau;
    Ok(num / den)
}

/// Dilation `K = (1 + |μ|)/(1 − |μ|)`.
pub fn dilation<T: Real>(mu: Cx<T>) -> Result<T, ComplexGeomError> {
    let m = mu.norm();
    if m >= T::one() {
        return Err(ComplexGeomError::NonAdmissible(m.to_f64().unwrap_or(f64::NAN)));
    }
    Ok((T::one() + m) / (T::one() - m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn resolution_one_rejected() {
        assert!(matches!(
            DiskGrid::<f64>::build(1),
            Err(ComplexGeomError::ResolutionTooSmall(1))
        ));
    }

    #[test]
    fn m2_lattice_count() {
        // brute-force count of (j,k) with j²+k² ≤ 4 is 13
        let g = DiskGrid::<f64>::build(2).unwrap();
        assert_eq!(g.node_count(), 13);
        for z in g.nodes() {
            assert!(z.norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn node_count_matches_brute_force() {
        for m in [3usize, 10, 25, 100] {
            let g = DiskGrid::<f64>::build(m).unwrap();
            let mi = m as i64;
            let mut count = 0usize;
            for k in -mi..=mi {
                for j in -mi..=mi {
                    if j * j + k * k <= mi * mi {
                        count += 1;
                    }
                }
            }
            assert_eq!(g.node_count(), count, "M={m}");
        }
    }

    #[test]
    fn faces_are_ccw_and_conforming() {
        let g = DiskGrid::<f64>::build(7).unwrap();
        let mut edge_use = std::collections::HashMap::new();
        for f in g.faces() {
            let p: Vec<_> = f.iter().map(|&i| g.nodes()[i as usize]).collect();
            let cross = (p[1] - p[0]).re * (p[2] - p[0]).im - (p[1] - p[0]).im * (p[2] - p[0]).re;
            assert!(cross > 0.0, "face must be positively oriented");
            for e in 0..3 {
                let a = f[e].min(f[(e + 1) % 3]);
                let b = f[e].max(f[(e + 1) % 3]);
                *edge_use.entry((a, b)).or_insert(0) += 1;
            }
        }
        // conforming: every edge is shared by at most two faces
        assert!(edge_use.values().all(|&c| c <= 2));
    }

    #[test]
    fn identity_map_has_zero_mu() {
        let g = DiskGrid::<f64>::build(10).unwrap();
        let vals: Vec<_> = g.nodes().to_vec();
        let bf = beltrami_from_map(&g, &vals).unwrap();
        assert!(bf.sup_norm() < 1e-14);
    }

    #[test]
    fn affine_antiholomorphic_part_recovered() {
        // f(z) = z + 0.3 z̄ has μ = 0.3 exactly on every face
        let g = DiskGrid::<f64>::build(10).unwrap();
        let vals: Vec<_> = g
            .nodes()
            .iter()
            .map(|&z| z + cx::<f64>(0.3, 0.0) * z.conj())
            .collect();
        let bf = beltrami_from_map(&g, &vals).unwrap();
        for v in &bf.values {
            assert!((v - cx::<f64>(0.3, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn conjugate_map_is_degenerate() {
        let g = DiskGrid::<f64>::build(6).unwrap();
        let vals: Vec<_> = g.nodes().iter().map(|z| z.conj()).collect();
        assert!(matches!(
            beltrami_from_map(&g, &vals),
            Err(ComplexGeomError::VanishingDerivative(_))
        ));
    }

    #[test]
    fn dilation_values() {
        assert_eq!(dilation(cx::<f64>(0.0, 0.0)).unwrap(), 1.0);
        assert!((dilation(cx::<f64>(0.5, 0.0)).unwrap() - 3.0).abs() < 1e-15);
        assert!(dilation(cx::<f64>(1.0, 0.0)).is_err());
    }

    #[test]
    fn dilation_monotone() {
        let mut last = 0.0;
        for k in 0..99 {
            let k = dilation(cx::<f64>(k as f64 / 100.0, 0.0)).unwrap();
            assert!(k > last);
            last = k;
        }
    }

    #[test]
    fn conformal_second_factor_is_identity() {
        // μ_g = 0 → the composition keeps μ_f (conformal second factor)
        let mu_f = cx::<f64>(0.21, -0.4);
        let tau = Cx::from_polar(1.0, 0.73);
        let got = compose_beltrami(mu_f, cx(0.0, 0.0), tau).unwrap();
        assert!((got - mu_f).norm() < 1e-15);
    }

    #[test]
    fn conformal_first_factor_passes_g() {
        let mu_g = cx::<f64>(0.3, 0.1);
        let got = compose_beltrami(cx(0.0, 0.0), mu_g, cx(1.0, 0.0)).unwrap();
        assert!((got - mu_g).norm() < 1e-15);
    }

    #[test]
    fn polynomial_interpolation_mu_decays_with_resolution() {
        // sampling an analytic polynomial at the nodes leaves a spurious
        // per-face coefficient that is pure interpolation error; over the
        // well-shaped faces (away from the clipped rim slivers, which do
        // not refine) it shrinks as the grid refines
        // derivative stays away from zero on the closed disk, so the
        // sampled map is locally injective everywhere
        let poly = |z: Cx<f64>| {
            z + z * z * cx::<f64>(0.1, 0.05) + z * z * z * cx::<f64>(0.04, -0.03)
                + z * z * z * z * cx::<f64>(0.02, 0.01)
        };
        let mut last = f64::MAX;
        for m in [25usize, 50, 100] {
            let g = DiskGrid::<f64>::build(m).unwrap();
            let vals: Vec<_> = g.nodes().iter().map(|&z| poly(z)).collect();
            let bf = beltrami_from_map(&g, &vals).unwrap();
            let rim = 1.0 - 0.5 / m as f64;
            let mut sup = 0.0f64;
            for (face, v) in g.faces().iter().zip(&bf.values) {
                let inside = face
                    .iter()
                    .all(|&i| g.nodes()[i as usize].norm() <= rim);
                if inside {
                    sup = sup.max(v.norm());
                }
            }
            assert!(sup < last, "M={m}: {sup} must shrink from {last}");
            last = sup;
        }
        assert!(last < 0.05, "interior max |mu| at M=100 is {last}");
    }

    #[test]
    fn locate_finds_faces() {
        let g = DiskGrid::<f64>::build(11).unwrap();
        for (fi, c) in g.centroids().iter().enumerate() {
            let found = g.locate(*c).expect("centroid must be inside its face");
            assert!(g.face_contains(found, *c));
            let _ = fi;
        }
    }
}
