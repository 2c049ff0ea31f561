use crate::error::{Error, Result};
use crate::source::{InfoDensityLaw, SourceStats};

/// Number of points in the default converse grid.
pub const DEFAULT_GRID_POINTS: usize = 61;

/// `sup_alpha [ Pr{W_n >= alpha} - m e^{-alpha} ]` over `grid`.
///
/// With an exact law this is a certified lower bound on the error
/// probability of every code with `m` key symbols at block length `n`.
pub fn converse_bound(law: &InfoDensityLaw, m: u64, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty alpha grid".into()));
    }
    Ok(grid
        .iter()
        .map(|&alpha| law.tail_ge(alpha) - m as f64 * (-alpha).exp())
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `points` equally spaced values spanning `nH ± 3 sigma sqrt(n)`.
pub fn alpha_grid(stats: &SourceStats, n: usize, points: usize) -> Vec<f64> {
    let center = n as f64 * stats.h_cond;
    let half = 3.0 * stats.sigma() * (n as f64).sqrt();
    if points == 1 {
        return vec![center];
    }
    (0..points)
        .map(|i| center - half + 2.0 * half * i as f64 / (points - 1) as f64)
        .collect()
}

pub fn default_alpha_grid(stats: &SourceStats, n: usize) -> Vec<f64> {
    alpha_grid(stats, n, DEFAULT_GRID_POINTS)
}

/// Second-order rate `(ln m - n h) / sqrt(n)` in nats.
pub fn second_order_rate(n: usize, m: u64, h_cond: f64) -> f64 {
    ((m as f64).ln() - n as f64 * h_cond) / (n as f64).sqrt()
}

/// `ceil(e^{n (h + margin)})`, at least 1.
pub fn rate_to_m(n: usize, h_cond: f64, margin: f64) -> u64 {
    let v = (n as f64 * (h_cond + margin)).exp().ceil();
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        (v as u64).max(1)
    }
}
