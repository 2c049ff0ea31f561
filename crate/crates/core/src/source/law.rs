use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::product::ProductSource;
use crate::combinatorics::{composition_count, for_each_composition, ln_factorials};
use crate::error::{Error, Result};

/// Cap on the number of type classes enumerated by [`InfoDensityLaw::exact`].
pub const TYPE_CLASS_LIMIT: u128 = 5_000_000;

/// Relative tolerance for resolving ties in [`InfoDensityLaw::tail_ge`].
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Distribution of `W_n = sum_i -ln P_{X|Z}(X_i|Z_i)` as a list of atoms
/// `(w, probability)` sorted by `w`.
///
/// The exact form enumerates compositions of `n` over the distinct
/// single-letter information values, which is polynomial in `n` for a fixed
/// alphabet. The sampled form is an empirical law with equal atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoDensityLaw {
    n: usize,
    atoms: Vec<(f64, f64)>,
    exact: bool,
}

impl InfoDensityLaw {
    pub fn exact(source: &ProductSource) -> Result<Self> {
        let n = source.n();
        let values = single_letter_law(source);
        let k = values.len();
        let classes = composition_count(n, k).unwrap_or(u128::MAX);
        if classes > TYPE_CLASS_LIMIT {
            return Err(Error::SizeLimit(format!(
                "{classes} type classes for n = {n} over {k} information values"
            )));
        }
        let lnf = ln_factorials(n);
        let ln_q: Vec<f64> = values.iter().map(|v| v.1.ln()).collect();
        let mut atoms = Vec::with_capacity(classes as usize);
        for_each_composition(n, k, &mut |counts| {
            let mut w = 0.0;
            let mut lp = lnf[n];
            for (j, &c) in counts.iter().enumerate() {
                if c > 0 {
                    w += c as f64 * values[j].0;
                    lp += c as f64 * ln_q[j] - lnf[c];
                }
            }
            atoms.push((w, lp.exp()));
        });
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            n,
            atoms,
            exact: true,
        })
    }

    /// Empirical law of `trials` independent draws of `W_n`, deterministic in `seed`.
    pub fn sampled(source: &ProductSource, seed: u64, trials: usize) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        let values = single_letter_law(source);
        let mut cumulative = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for v in &values {
            acc += v.1;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 1.0 / trials as f64;
        let mut atoms: Vec<(f64, f64)> = (0..trials)
            .map(|_| {
                let w = (0..source.n())
                    .map(|_| {
                        let u = rng.random::<f64>() * acc;
                        let j = cumulative.partition_point(|&c| c <= u).min(values.len() - 1);
                        values[j].0
                    })
                    .sum();
                (w, p)
            })
            .collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            n: source.n(),
            atoms,
            exact: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `Pr{W_n >= alpha}`. Atoms within [`TIE_TOLERANCE`] (relative) of
    /// `alpha` count as ties, so lattice points such as `ln 10` land on the
    /// side exact arithmetic puts them.
    pub fn tail_ge(&self, alpha: f64) -> f64 {
        let cut = alpha - TIE_TOLERANCE * alpha.abs().max(1.0);
        self.mass_where(|w| w >= cut)
    }

    /// `Pr{lo <= W_n < hi}`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        self.mass_where(|w| lo <= w && w < hi)
    }

    pub fn mass_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.atoms.iter().filter(|a| pred(a.0)).map(|a| a.1).sum()
    }

    /// `E[g(W_n); pred(W_n)]`.
    pub fn expectation_where(&self, pred: impl Fn(f64) -> bool, g: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| pred(a.0))
            .map(|a| a.1 * g(a.0))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expectation_where(|_| true, |w| w)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation_where(|_| true, |w| (w - m).powi(2))
    }
}

/// Distinct single-letter information values with their probabilities,
/// sorted by value.
fn single_letter_law(source: &ProductSource) -> Vec<(f64, f64)> {
    let mut cells: Vec<(f64, f64)> = source
        .base()
        .support()
        .into_iter()
        .map(|(_, _, p, w)| (w, p))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (w, p) in cells {
        match out.last_mut() {
            Some(last) if last.0 == w => last.1 += p,
            _ => out.push((w, p)),
        }
    }
    out
}
