use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Validation("pearson inputs differ in length".into()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData("pearson needs two points".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Validation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each Lloyd iteration.
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, cent) in centroids.iter().enumerate() {
        let d = sq_dist(p, cent);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

const KMEANS_TOL: f64 = 1e-6;
const KMEANS_MAX_ITER: usize = 300;

/// k-means++ seeding followed by Lloyd iterations until centroids move
/// less than 1e-6 or 300 iterations pass.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeans> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Validation(format!("k = {k} for {n} points")));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|x| !x.is_finite())) {
        return Err(Error::Validation("points must be finite and equal-length".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && r < *d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            if d2[pick] == 0.0 {
                pick = d2.iter().rposition(|d| *d > 0.0).unwrap_or(pick);
            }
            pick
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    let mut centroids: Vec<Vec<f64>> = chosen.iter().map(|&i| points[i].clone()).collect();
    let mut assignment = vec![0; n];
    let mut history = Vec::new();
    for _ in 0..KMEANS_MAX_ITER {
        let mut inertia = 0.0;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest(p, &centroids);
            assignment[i] = c;
            inertia += d;
        }
        history.push(inertia);
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            shift = shift.max(sq_dist(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }
        if shift < KMEANS_TOL {
            break;
        }
    }
    let mut inertia = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (c, d) = nearest(p, &centroids);
        assignment[i] = c;
        inertia += d;
    }
    Ok(KMeans {
        assignment,
        centroids,
        inertia,
        history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub projected: Vec<Vec<f64>>,
    /// Unit-length principal axes, largest variance first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
}

/// Principal components from the eigen-decomposition of the sample
/// covariance. Each axis is signed so its largest-magnitude coordinate is
/// positive.
pub fn pca(points: &[Vec<f64>], d: usize) -> Result<Pca> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientData("pca needs two points".into()));
    }
    let dim = points[0].len();
    if d == 0 || d > dim || points.iter().any(|p| p.len() != dim) {
        return Err(Error::Validation(format!("d = {d} for {dim}-dimensional points")));
    }
    let means: Vec<f64> = (0..dim).map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
    let centred = DMatrix::from_fn(n, dim, |i, j| points[i][j] - means[j]);
    let cov = centred.transpose() * &centred / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Err(Error::Validation("points have zero variance".into()));
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut components = Vec::with_capacity(d);
    let mut ratios = Vec::with_capacity(d);
    for &j in order.iter().take(d) {
        let mut v: Vec<f64> = eig.eigenvectors.column(j).iter().copied().collect();
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        ratios.push(eig.eigenvalues[j].max(0.0) / total);
    }
    let projected = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|c| (0..dim).map(|j| centred[(i, j)] * c[j]).sum())
                .collect()
        })
        .collect();
    Ok(Pca {
        projected,
        components,
        explained_variance_ratio: ratios,
    })
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Validation("labelings must be non-empty and equal length".into()));
    }
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sa: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sb: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(a.len() as u64);
    let expected = if total > 0.0 { sa * sb / total } else { 0.0 };
    let max = (sa + sb) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
