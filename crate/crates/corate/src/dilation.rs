//! Kernel dilation of sparse time-series training matrices.
//!
//! Each observed rating spreads into the missing timepoints of a centered
//! window around it, so that a model trains on a denser matrix. Dilation is
//! strictly a function of the training view: it must run *after* masking so
//! pseudo-observations can never leak held-out values. A missing timepoint
//! covered by several observed ratings receives their kernel-weighted
//! average; originally observed values are never overwritten; timepoints
//! covered by no window stay missing.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratings::RatingsMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelShape {
    /// Uniform weights: covered timepoints get the arithmetic mean of their
    /// covering observations.
    Boxcar,
    /// Gaussian weights truncated at the window edge; the window width is
    /// treated as 4 standard deviations.
    Gaussian,
}

impl std::str::FromStr for KernelShape {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boxcar" => Ok(KernelShape::Boxcar),
            "gaussian" => Ok(KernelShape::Gaussian),
            other => Err(format!(
                "unknown kernel shape `{other}` (expected boxcar or gaussian)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationKernel {
    pub shape: KernelShape,
    /// Full window width in seconds.
    pub width_seconds: u32,
    pub sample_rate_hz: f64,
}

impl DilationKernel {
    pub fn boxcar(width_seconds: u32, sample_rate_hz: f64) -> Self {
        Self {
            shape: KernelShape::Boxcar,
            width_seconds,
            sample_rate_hz,
        }
    }

    pub fn gaussian(width_seconds: u32, sample_rate_hz: f64) -> Self {
        Self {
            shape: KernelShape::Gaussian,
            width_seconds,
            sample_rate_hz,
        }
    }

    /// Window width in samples: `round(width_seconds * sample_rate_hz)`.
    pub fn width_samples(&self) -> Result<usize> {
        if self.width_seconds == 0 {
            return Err(Error::InvalidHyperparameter(
                "dilation width must be >= 1 second".into(),
            ));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "sample rate must be > 0, got {}",
                self.sample_rate_hz
            )));
        }
        let w = (self.width_seconds as f64 * self.sample_rate_hz).round() as usize;
        if w == 0 {
            return Err(Error::InvalidHyperparameter(
                "dilation window is narrower than one sample".into(),
            ));
        }
        Ok(w)
    }

    fn weight(&self, offset: isize, half: usize) -> f64 {
        match self.shape {
            KernelShape::Boxcar => 1.0,
            KernelShape::Gaussian => {
                // width = 4 sigma; half-window = width/2 = 2 sigma.
                let sigma = (2 * half).max(1) as f64 / 4.0;
                let d = offset as f64;
                (-d * d / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Training matrix after dilation, with the pseudo-observation flags that
/// distinguish filled-in cells from original ones.
#[derive(Debug, Clone)]
pub struct Dilated {
    pub matrix: RatingsMatrix,
    /// True where a cell was missing in the input and filled by dilation.
    pub pseudo: Array2<bool>,
}

impl Dilated {
    pub fn n_pseudo(&self) -> usize {
        self.pseudo.iter().filter(|&&b| b).count()
    }
}

/// Dilate a (masked) training matrix along its time axis, row by row.
///
/// Item labels must form a uniform time grid. Each originally observed
/// rating covers the missing timepoints within `±floor(width_samples / 2)`
/// of it; even widths round the half-window down on both sides. Windows
/// truncate at the series edges.
pub fn dilate(train: &RatingsMatrix, kernel: &DilationKernel) -> Result<Dilated> {
    train.uniform_time_index()?;
    let width = kernel.width_samples()?;
    let half = width / 2;

    let n_users = train.n_users();
    let n_items = train.n_items();
    let mut values = train.grid().clone();
    let mut pseudo = Array2::from_elem((n_users, n_items), false);

    for u in 0..n_users {
        for t in 0..n_items {
            if train.is_observed(u, t) {
                continue;
            }
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n_items - 1);
            // Weighted mean accumulated as offsets from the first source, so
            // identical sources reproduce their value exactly.
            let mut pivot = None;
            let mut num = 0.0;
            let mut den = 0.0;
            for s in lo..=hi {
                if let Some(r) = train.get(u, s) {
                    let w = kernel.weight(s as isize - t as isize, half);
                    let p = *pivot.get_or_insert(r);
                    num += w * (r - p);
                    den += w;
                }
            }
            if let Some(p) = pivot {
                values[[u, t]] = p + num / den;
                pseudo[[u, t]] = true;
            }
        }
    }

    let matrix = RatingsMatrix::from_grid(
        values,
        train.user_labels().to_vec(),
        train.item_labels().to_vec(),
        (train.scale_min(), train.scale_max()),
    )?;
    Ok(Dilated { matrix, pseudo })
}
