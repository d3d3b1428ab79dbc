//! Desk-scale classification harness: pairwise distance matrices, classical
//! multidimensional scaling, k-medoids clustering, and accuracy scoring,
//! plus the deterministic synthetic shape generator standing in for the
//! unavailable animal data set.

use crate::contour::Contour;
use crate::error::ClassifyError;
use crate::scalar::{Cx, Real};
use num_complex::Complex;

/// Symmetric nonnegative distance matrix with labels.
#[derive(Debug, Clone)]
pub struct DistanceMatrix<T: Real> {
    pub labels: Vec<String>,
    pub d: Vec<Vec<T>>,
}

impl<T: Real> DistanceMatrix<T> {
    pub fn from_pairwise<F>(labels: Vec<String>, n: usize, mut dist: F) -> Self
    where
        F: FnMut(usize, usize) -> T,
    {
        let mut d = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = dist(i, j);
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        Self { labels, d }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Largest distance within a label group vs the smallest across groups.
    pub fn intra_inter(&self, truth: &[usize]) -> (T, T) {
        let n = self.len();
        let mut intra = T::zero();
        let mut inter = T::infinity();
        for i in 0..n {
            for j in i + 1..n {
                if truth[i] == truth[j] {
                    intra = intra.max(self.d[i][j]);
                } else {
                    inter = inter.min(self.d[i][j]);
                }
            }
        }
        (intra, inter)
    }
}

/// Classical (Torgerson) multidimensional scaling into `dim` coordinates.
///
/// Double-centers the squared-distance matrix and takes the leading
/// eigenpairs of `−½ J D² J`; dimensions with nonpositive eigenvalues are
/// filled with zeros.
pub fn mds_embed<T: Real>(d: &DistanceMatrix<T>, dim: usize) -> Vec<Vec<T>> {
    let n = d.len();
    let mut b = vec![vec![T::zero(); n]; n];
    // B = −½ J D² J via direct double-centering of the squared distances
    let mut row_mean = vec![T::zero(); n];
    let mut grand = T::zero();
    for i in 0..n {
        for j in 0..n {
            let sq = d.d[i][j] * d.d[i][j];
            row_mean[i] = row_mean[i] + sq;
            grand = grand + sq;
        }
        row_mean[i] = row_mean[i] / T::of_usize(n);
    }
    grand = grand / T::of_usize(n * n);
    let half = T::of(0.5);
    for i in 0..n {
        for j in 0..n {
            let sq = d.d[i][j] * d.d[i][j];
            b[i][j] = -half * (sq - row_mean[i] - row_mean[j] + grand);
        }
    }
    let (vals, vecs) = jacobi_eigen(&mut b);
    // sort eigenpairs by descending eigenvalue
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[y].partial_cmp(&vals[x]).unwrap());
    let mut coords = vec![vec![T::zero(); dim]; n];
    for (c, &e) in order.iter().take(dim).enumerate() {
        if vals[e] <= T::zero() {
            continue; // degenerate spectrum: leave zeros
        }
        let scale = vals[e].sqrt();
        for i in 0..n {
            coords[i][c] = vecs[i][e] * scale;
        }
    }
    coords
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (destroys the
/// input); returns eigenvalues and column eigenvectors.
fn jacobi_eigen<T: Real>(a: &mut [Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut v = vec![vec![T::zero(); n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a[i][j] * a[i][j];
            }
        }
        if off < T::of(1e-26) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < T::of(1e-300) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::of(2.0) * a[p][q]);
                let t = {
                    let s = if theta >= T::zero() { T::one() } else { -T::one() };
                    s / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals: Vec<T> = (0..n).map(|i| a[i][i]).collect();
    (vals, v)
}

/// Deterministic splitmix-based generator; all harness randomness flows
/// from one seed.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }
}

/// PAM k-medoids with greedy build and swap refinement, best of
/// `restarts` seedings; deterministic for a fixed seed.
pub fn k_medoids<T: Real>(
    points: &[Vec<T>],
    k: usize,
    seed: u64,
) -> Result<Vec<usize>, ClassifyError> {
    let n = points.len();
    if k > n {
        return Err(ClassifyError::KTooLarge { k, n });
    }
    let dist = |a: usize, b: usize| -> T {
        points[a]
            .iter()
            .zip(&points[b])
            .map(|(x, y)| (*x - *y) * (*x - *y))
            .fold(T::zero(), |s, v| s + v)
            .sqrt()
    };
    let mut best_assign = vec![0usize; n];
    let mut best_cost = T::infinity();
    let restarts = 10;
    let mut rng = Rng::new(seed);
    for _restart in 0..restarts {
        // k-means++-style seeding on the distance matrix
        let mut medoids = Vec::with_capacity(k);
        medoids.push(rng.below(n));
        while medoids.len() < k {
            let weights: Vec<f64> = (0..n)
                .map(|i| {
                    let d = medoids
                        .iter()
                        .map(|&m| dist(i, m))
                        .fold(T::infinity(), |a, b| a.min(b));
                    let d = d.to_f64().unwrap_or(0.0);
                    d * d
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if total <= 0.0 {
                medoids.push(rng.below(n));
                continue;
            }
            let mut pick = rng.uniform() * total;
            let mut chosen = n - 1;
            for (i, w) in weights.iter().enumerate() {
                pick -= w;
                if pick <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            medoids.push(chosen);
        }
        // PAM swap loop: cost is non-increasing, so this terminates
        let cost_of = |medoids: &[usize]| -> T {
            (0..n)
                .map(|i| {
                    medoids
                        .iter()
                        .map(|&m| dist(i, m))
                        .fold(T::infinity(), |a, b| a.min(b))
                })
                .fold(T::zero(), |s, v| s + v)
        };
        let mut cost = cost_of(&medoids);
        loop {
            let mut improved = false;
            for slot in 0..k {
                for cand in 0..n {
                    if medoids.contains(&cand) {
                        continue;
                    }
                    let saved = medoids[slot];
                    medoids[slot] = cand;
                    let c = cost_of(&medoids);
                    if c < cost {
                        cost = c;
                        improved = true;
                    } else {
                        medoids[slot] = saved;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        if cost < best_cost {
            best_cost = cost;
            for (i, a) in best_assign.iter_mut().enumerate() {
                let mut bm = 0usize;
                let mut bd = T::infinity();
                for (mi, &m) in medoids.iter().enumerate() {
                    let d = dist(i, m);
                    if d < bd {
                        bd = d;
                        bm = mi;
                    }
                }
                *a = bm;
            }
        }
    }
    Ok(best_assign)
}

/// Confusion matrix and accuracy after the optimal cluster-to-truth
/// assignment (exact maximum matching over the contingency table).
pub fn confusion_and_accuracy(
    predicted: &[usize],
    truth: &[usize],
) -> Result<(Vec<Vec<usize>>, f64), ClassifyError> {
    if predicted.len() != truth.len() {
        return Err(ClassifyError::LengthMismatch(predicted.len(), truth.len()));
    }
    let k_pred = predicted.iter().max().map_or(0, |m| m + 1);
    let k_true = truth.iter().max().map_or(0, |m| m + 1);
    let k = k_pred.max(k_true);
    let mut table = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        table[p][t] += 1;
    }
    // exact assignment by bitmask dynamic programming over truth columns
    let full = 1usize << k;
    let mut dp = vec![usize::MAX; full];
    dp[0] = 0;
    for mask in 0..full {
        if dp[mask] == usize::MAX {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row >= k {
            continue;
        }
        for col in 0..k {
            if mask & (1 << col) != 0 {
                continue;
            }
            let next = mask | (1 << col);
            let gain = dp[mask] + table[row][col];
            if dp[next] == usize::MAX || gain > dp[next] {
                dp[next] = gain;
            }
        }
    }
    let correct = dp[full - 1];
    let accuracy = correct as f64 / predicted.len() as f64;
    // re-derive the matching to permute the confusion matrix rows
    let mut perm = vec![0usize; k];
    let mut mask = full - 1;
    for row in (0..k).rev() {
        for col in 0..k {
            if mask & (1 << col) == 0 {
                continue;
            }
            let prev = mask ^ (1 << col);
            if dp[prev] != usize::MAX && dp[prev] + table[row][col] == dp[mask] {
                perm[row] = col;
                mask = prev;
                break;
            }
        }
    }
    let mut matrix = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        matrix[perm[p]][t] += 1;
    }
    Ok((matrix, accuracy))
}

/// One synthetic shape family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeClass {
    Ellipse,
    WideEllipse,
    Star4,
    Star6,
    RoundedRectangle,
    Peanut,
    TriLobe,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 7] = [
        ShapeClass::Ellipse,
        ShapeClass::WideEllipse,
        ShapeClass::Star4,
        ShapeClass::Star6,
        ShapeClass::RoundedRectangle,
        ShapeClass::Peanut,
        ShapeClass::TriLobe,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ShapeClass::Ellipse => "ellipse",
            ShapeClass::WideEllipse => "wide-ellipse",
            ShapeClass::Star4 => "star4",
            ShapeClass::Star6 => "star6",
            ShapeClass::RoundedRectangle => "rounded-rect",
            ShapeClass::Peanut => "peanut",
            ShapeClass::TriLobe => "trilobe",
        }
    }

    /// Radial profile r(t) of the family with the given jitter parameters.
    fn radius(&self, t: f64, j: &[f64; 4]) -> f64 {
        match self {
            ShapeClass::Ellipse => {
                let a = 1.5 * (1.0 + 0.05 * j[0]);
                let b = 1.0;
                ellipse_radius(t, a, b)
            }
            ShapeClass::WideEllipse => {
                let a = 2.8 * (1.0 + 0.04 * j[0]);
                let b = 1.0;
                ellipse_radius(t, a, b)
            }
            ShapeClass::Star4 => 1.0 + (0.3 + 0.02 * j[0]) * (4.0 * t + 0.3 * j[1]).cos(),
            ShapeClass::Star6 => 1.0 + (0.22 + 0.02 * j[0]) * (6.0 * t + 0.3 * j[1]).cos(),
            ShapeClass::RoundedRectangle => {
                let a = 1.9 * (1.0 + 0.04 * j[0]);
                let b = 1.0;
                // superellipse of exponent 6: rectangle with rounded corners
                let c = (t.cos() / a).abs().powi(6);
                let s = (t.sin() / b).abs().powi(6);
                (c + s).powf(-1.0 / 6.0)
            }
            ShapeClass::Peanut => {
                1.0 + (0.42 + 0.02 * j[0]) * (2.0 * t).cos() + 0.02 * j[1] * (3.0 * t).sin()
            }
            ShapeClass::TriLobe => 1.0 + (0.3 + 0.02 * j[0]) * (3.0 * t + 0.4 * j[1]).cos(),
        }
    }
}

fn ellipse_radius(t: f64, a: f64, b: f64) -> f64 {
    let c = t.cos() / a;
    let s = t.sin() / b;
    1.0 / (c * c + s * s).sqrt()
}

/// Deterministic synthetic benchmark: `per_class` shapes for each listed
/// class, with within-class jitter plus a random similarity placement.
///
/// Every shape carries an asymmetric "head" bump. Exactly n-fold symmetric
/// shapes have `∫B dz = 0`, which leaves the rotation normalization of the
/// signature undetermined; the bump keeps the integrals well away from
/// zero, the way natural shapes are.
pub fn synth_dataset<T: Real>(
    classes: &[ShapeClass],
    per_class: usize,
    seed: u64,
) -> Vec<(ShapeClass, Contour<T>)> {
    let mut rng = Rng::new(seed);
    let mut out = Vec::with_capacity(classes.len() * per_class);
    let n = 400;
    for &class in classes {
        for _ in 0..per_class {
            let j = [
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
                rng.range(-1.0, 1.0),
            ];
            // small smooth boundary perturbation, the within-class noise
            let amp1 = 0.01 * rng.uniform();
            let ph1 = rng.range(0.0, std::f64::consts::TAU);
            let amp2 = 0.008 * rng.uniform();
            let ph2 = rng.range(0.0, std::f64::consts::TAU);
            let head = 0.16 * (1.0 + 0.1 * j[2]);
            // random similarity placement
            let scale = rng.range(0.5, 3.0);
            let rot = rng.range(0.0, std::f64::consts::TAU);
            let shift = Complex::new(T::of(rng.range(-50.0, 50.0)), T::of(rng.range(-50.0, 50.0)));
            let pts: Vec<Cx<T>> = (0..n)
                .map(|i| {
                    let t = std::f64::consts::TAU * i as f64 / n as f64;
                    let r = class.radius(t, &j)
                        + head * head_bump(t)
                        + amp1 * (5.0 * t + ph1).cos()
                        + amp2 * (7.0 * t + ph2).sin();
                    let p = Complex::new(T::of(r * t.cos()), T::of(r * t.sin()));
                    p * crate::scalar::unit(T::of(rot)) * T::of(scale) + shift
                })
                .collect();
            out.push((class, Contour::new(pts).expect("generator yields simple curves")));
        }
    }
    out
}

/// Smooth one-sided bump at a fixed boundary location.
fn head_bump(t: f64) -> f64 {
    let d = {
        let raw = (t - 0.9).rem_euclid(std::f64::consts::TAU);
        raw.min(std::f64::consts::TAU - raw)
    };
    let width = 0.9;
    if d < width {
        let x = d / width;
        (1.0 - x * x).powi(2)
    } else {
        0.0
    }
}
