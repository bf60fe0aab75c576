//! Pairwise user-user similarity over co-observed items.
//!
//! Entries are computed only over items both users rated. Pairs with fewer
//! than `min_overlap` co-observed items, and correlation-family pairs with a
//! zero-variance side, are *undefined* (stored as NaN) rather than zero, so
//! downstream neighbor selection can tell "no information" apart from
//! "uncorrelated".

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::ratings::RatingsMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Pearson,
    Cosine,
    Spearman,
    /// Kendall's tau with the tau-b tie correction.
    Kendall,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Pearson => "pearson",
            Metric::Cosine => "cosine",
            Metric::Spearman => "spearman",
            Metric::Kendall => "kendall",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pearson" => Ok(Metric::Pearson),
            "cosine" => Ok(Metric::Cosine),
            "spearman" => Ok(Metric::Spearman),
            "kendall" => Ok(Metric::Kendall),
            other => Err(format!(
                "unknown metric `{other}` (expected pearson, cosine, spearman, or kendall)"
            )),
        }
    }
}

/// Symmetric user × user similarity grid; NaN marks undefined pairs.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    values: Array2<f64>,
    metric: Metric,
    min_overlap: usize,
}

impl SimilarityMatrix {
    /// Wrap a precomputed grid (NaN = undefined). Used by tests that need
    /// exact similarity values.
    #[cfg(test)]
    pub(crate) fn from_raw(values: Array2<f64>, metric: Metric, min_overlap: usize) -> Self {
        Self {
            values,
            metric,
            min_overlap,
        }
    }

    pub fn n_users(&self) -> usize {
        self.values.nrows()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn min_overlap(&self) -> usize {
        self.min_overlap
    }

    /// Similarity value; `None` when the pair is undefined.
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let s = self.values[[u, v]];
        if s.is_nan() {
            None
        } else {
            Some(s)
        }
    }

    pub fn grid(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Compute user-user similarity from the observed entries of `matrix`.
///
/// `min_overlap` is the minimum number of co-observed items for a pair to be
/// defined; correlation-family metrics need at least 2 (fewer degenerates to
/// an undefined entry anyway). The diagonal is 1 for any user with at least
/// `min_overlap` observations.
pub fn compute_similarity(
    matrix: &RatingsMatrix,
    metric: Metric,
    min_overlap: usize,
) -> SimilarityMatrix {
    let n = matrix.n_users();
    let mut values = Array2::from_elem((n, n), f64::NAN);

    // Per-user observed item lists, extracted once.
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|u| {
            (0..matrix.n_items())
                .filter_map(|i| matrix.get(u, i).map(|r| (i, r)))
                .collect()
        })
        .collect();

    for u in 0..n {
        if rows[u].len() >= min_overlap {
            values[[u, u]] = 1.0;
        }
        for v in (u + 1)..n {
            let (xs, ys) = co_observed(&rows[u], &rows[v]);
            if xs.len() < min_overlap {
                continue;
            }
            let s = match metric {
                Metric::Pearson => pearson(&xs, &ys),
                Metric::Cosine => cosine(&xs, &ys),
                Metric::Spearman => {
                    let rx = average_ranks(&xs);
                    let ry = average_ranks(&ys);
                    pearson(&rx, &ry)
                }
                Metric::Kendall => kendall_tau_b(&xs, &ys),
            };
            if let Some(s) = s {
                values[[u, v]] = s;
                values[[v, u]] = s;
            }
        }
    }

    SimilarityMatrix {
        values,
        metric,
        min_overlap,
    }
}

/// Ratings of both users restricted to items observed by both, in item order.
fn co_observed(a: &[(usize, f64)], b: &[(usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                xs.push(a[i].1);
                ys.push(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    (xs, ys)
}

/// Pearson correlation as the cosine of mean-centered vectors. Returns `None`
/// when either side has zero variance.
fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx.sqrt() * syy.sqrt()))
    }
}

fn cosine(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx.sqrt() * syy.sqrt()))
    }
}

/// Average ranks (ties share the mean of their rank positions), 1-based.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average 1-based rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Kendall's tau-b: concordant minus discordant pairs normalized with tie
/// corrections in both variables.
fn kendall_tau_b(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_x = 0i64;
    let mut ties_y = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = xs[i] - xs[j];
            let dy = ys[i] - ys[j];
            if dx == 0.0 && dy == 0.0 {
                ties_x += 1;
                ties_y += 1;
            } else if dx == 0.0 {
                ties_x += 1;
            } else if dy == 0.0 {
                ties_y += 1;
            } else if dx * dy > 0.0 {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = (((n0 - ties_x) as f64) * ((n0 - ties_y) as f64)).sqrt();
    if denom == 0.0 {
        None
    } else {
        Some((concordant - discordant) as f64 / denom)
    }
}
