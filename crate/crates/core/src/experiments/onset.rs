use crate::error::{Error, Result};
use crate::model::{EnsembleSpec, ReservoirSpec, TimeGrid};
use crate::qfi::qfi_analytic;

/// Differences smaller than this are treated as flat.
pub const NOISE_GUARD: f64 = 1e-10;

/// True if the sequence has a strict rise (by more than `guard`) somewhere
/// after a strict fall.
pub fn is_non_monotone(values: &[f64], guard: f64) -> bool {
    let mut fallen = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d < -guard {
            fallen = true;
        } else if d > guard && fallen {
            return true;
        }
    }
    false
}

/// Sampled QFI over `[0, t_max]` for one qubit count.
pub fn qfi_series(spec: &ReservoirSpec, n: usize, grid: &TimeGrid) -> Result<Vec<f64>> {
    let ens = EnsembleSpec::new(n)?;
    grid.samples()
        .into_iter()
        .map(|t| qfi_analytic(spec, &ens, t).map(|q| q.value))
        .collect()
}

/// Smallest `N ≤ n_max` whose sampled QFI decays non-monotonically, or `None`.
pub fn detect_oscillation_onset(
    gamma0: f64,
    n_max: usize,
    t_max: f64,
    n_samples: usize,
) -> Result<Option<usize>> {
    if n_max == 0 {
        return Err(Error::param("n_max", "must be at least 1"));
    }
    if n_samples < 2 {
        return Err(Error::param(
            "n_samples",
            format!("need at least 2, got {n_samples}"),
        ));
    }
    // the amplitude does not depend on the transition frequency
    let spec = ReservoirSpec::new(gamma0, 5.0)?;
    let grid = TimeGrid::new(0.0, t_max, n_samples - 1)?;
    for n in 1..=n_max {
        if is_non_monotone(&qfi_series(&spec, n, &grid)?, NOISE_GUARD) {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
