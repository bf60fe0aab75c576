//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use corate::{ClusterSpec, RatingsMatrix, SimulatedData};
use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two anti-correlated user clusters on a 0-100 scale.
pub fn two_cluster(users_per_group: usize, n_items: usize, noise_sd: f64, seed: u64) -> SimulatedData {
    corate::simulate_clusters(&ClusterSpec {
        n_groups: 2,
        users_per_group,
        n_items,
        noise_sd,
        seed,
        scale_min: 0.0,
        scale_max: 100.0,
    })
    .unwrap()
}

/// One homogeneous user cluster on a 0-100 scale.
pub fn one_cluster(users: usize, n_items: usize, noise_sd: f64, seed: u64) -> SimulatedData {
    corate::simulate_clusters(&ClusterSpec {
        n_groups: 1,
        users_per_group: users,
        n_items,
        noise_sd,
        seed,
        scale_min: 0.0,
        scale_max: 100.0,
    })
    .unwrap()
}

/// 1 Hz time-series panel: a shared-period sinusoid with per-user amplitude
/// and phase, plus slow user-idiosyncratic components and light noise.
/// Mimics continuous affect traces: smooth in time, individually variable.
pub fn sinusoid_panel(n_users: usize, n_items: usize, period_s: f64, seed: u64) -> RatingsMatrix {
    let tau = 2.0 * std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idio_periods = [311.0, 203.0, 157.0];
    let mut grid = Array2::zeros((n_users, n_items));
    for u in 0..n_users {
        let amp = 10.0 + 20.0 * rng.random::<f64>();
        let phase = tau * rng.random::<f64>();
        let idio: Vec<(f64, f64, f64)> = idio_periods
            .iter()
            .map(|&p| (8.0 * rng.random::<f64>(), tau * rng.random::<f64>(), p))
            .collect();
        for t in 0..n_items {
            let tt = t as f64;
            let noise: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal);
            let mut v: f64 = 50.0 + amp * (tau * tt / period_s + phase).sin() + 2.0 * noise;
            for &(a, ph, p) in &idio {
                v += a * (tau * tt / p + ph).sin();
            }
            grid[[u, t]] = v.clamp(0.0, 100.0);
        }
    }
    RatingsMatrix::from_grid(
        grid,
        (0..n_users).map(|u| format!("u{u:02}")).collect(),
        (0..n_items).map(|t| t.to_string()).collect(),
        (0.0, 100.0),
    )
    .unwrap()
}

/// Dense pseudo-random matrix with values in [0, hi).
pub fn random_dense(n_users: usize, n_items: usize, hi: f64, seed: u64) -> RatingsMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Array2::from_shape_fn((n_users, n_items), |_| rng.random::<f64>() * hi);
    RatingsMatrix::from_grid(
        grid,
        (0..n_users).map(|u| format!("u{u:03}")).collect(),
        (0..n_items).map(|i| i.to_string()).collect(),
        (0.0, hi),
    )
    .unwrap()
}

/// Held-out RMSE of a prediction grid against the dense truth.
pub fn held_out_rmse(
    truth: &RatingsMatrix,
    pred: &corate::PredictionMatrix,
    cells: &[(usize, usize)],
) -> f64 {
    let mut sq = 0.0;
    for &(u, i) in cells {
        let e = truth.value(u, i) - pred.get(u, i);
        sq += e * e;
    }
    (sq / cells.len() as f64).sqrt()
}

/// Independent evaluation of the KNN weighted-neighbor prediction with the
/// full fallback cascade, recomputing pearson similarity from first
/// principles. This is the oracle the fast implementation is checked
/// against; keep it naive.
pub fn knn_oracle_predict(
    m: &RatingsMatrix,
    k: usize,
    min_overlap: usize,
    u: usize,
    i: usize,
) -> f64 {
    let n = m.n_users();
    let pearson = |a: usize, b: usize| -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for item in 0..m.n_items() {
            if let (Some(x), Some(y)) = (m.get(a, item), m.get(b, item)) {
                xs.push(x);
                ys.push(y);
            }
        }
        if xs.len() < min_overlap {
            return None;
        }
        let len = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / len;
        let my = ys.iter().sum::<f64>() / len;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        let mut syy = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
        }
        if sxx == 0.0 || syy == 0.0 {
            None
        } else {
            Some(sxy / (sxx.sqrt() * syy.sqrt()))
        }
    };

    let mut cands: Vec<(usize, f64)> = (0..n)
        .filter(|&v| v != u)
        .filter_map(|v| pearson(u, v).map(|s| (v, s)))
        .filter(|&(v, s)| s > 0.0 && m.is_observed(v, i))
        .collect();
    cands.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    cands.truncate(k);

    if !cands.is_empty() {
        let num: f64 = cands.iter().map(|&(v, s)| m.value(v, i) * s).sum();
        let den: f64 = cands.iter().map(|&(_, s)| s).sum();
        return num / den;
    }
    let col: Vec<f64> = (0..n).filter_map(|v| m.get(v, i)).collect();
    if !col.is_empty() {
        return col.iter().sum::<f64>() / col.len() as f64;
    }
    let all: Vec<f64> = m
        .observed_cells()
        .iter()
        .map(|&(v, j)| m.value(v, j))
        .collect();
    all.iter().sum::<f64>() / all.len() as f64
}
