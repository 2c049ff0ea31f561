use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest allowed deviation of the input mass from 1 before rejection.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Single-letter information values closer than this (relative) count as equal
/// when deciding whether the information density is constant.
const CONSTANT_DENSITY_TOLERANCE: f64 = 1e-12;

/// Joint distribution `P_XZ` over finite alphabets.
///
/// Entries are stored densely with index `x + x_size * z`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    x_size: usize,
    z_size: usize,
    probs: Vec<f64>,
}

/// Single-letter moments of the information density `-ln P_{X|Z}(X|Z)`, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceStats {
    /// Conditional entropy `H(X|Z)`, which is also the compression limit.
    pub h_cond: f64,
    /// Variance of the information density.
    pub sigma2: f64,
    /// Third absolute central moment of the information density.
    pub rho3: f64,
}

impl SourceStats {
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn compression_limit(&self) -> f64 {
        self.h_cond
    }

    /// Lyapunov ratio `rho3 / sigma^3` entering the Berry-Esseen term.
    /// Infinite for a constant information density.
    pub fn lyapunov_ratio(&self) -> f64 {
        if self.sigma2 == 0.0 {
            f64::INFINITY
        } else {
            self.rho3 / (self.sigma2 * self.sigma())
        }
    }

    /// Berry-Esseen correction `c1 * rho3 / (sigma^3 sqrt(n))`.
    pub fn berry_esseen_term(&self, c1: f64, n: usize) -> f64 {
        c1 * self.lyapunov_ratio() / (n as f64).sqrt()
    }
}

impl JointPmf {
    /// Builds a joint PMF from rows indexed by `x`, columns by `z`.
    ///
    /// The input must be rectangular and nonnegative and sum to 1 within
    /// [`SUM_TOLERANCE`]; it is renormalized exactly afterwards.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let x_size = rows.len();
        let z_size = rows.first().map_or(0, Vec::len);
        if x_size == 0 || z_size == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut probs = vec![0.0; x_size * z_size];
        for (x, row) in rows.iter().enumerate() {
            if row.len() != z_size {
                return Err(Error::Ragged {
                    row: x,
                    expected: z_size,
                    found: row.len(),
                });
            }
            for (z, &v) in row.iter().enumerate() {
                probs[x + x_size * z] = v;
            }
        }
        Self::from_dense(x_size, z_size, probs)
    }

    /// Builds a joint PMF from a dense vector indexed `x + x_size * z`.
    pub fn from_dense(x_size: usize, z_size: usize, mut probs: Vec<f64>) -> Result<Self> {
        if x_size == 0 || z_size == 0 || probs.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if probs.len() != x_size * z_size {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: x_size * z_size,
            });
        }
        for (i, &v) in probs.iter().enumerate() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidEntry {
                    x: i % x_size,
                    z: i / x_size,
                    value: v,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NotNormalized {
                sum,
                tolerance: SUM_TOLERANCE,
            });
        }
        if sum != 1.0 {
            probs.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self {
            x_size,
            z_size,
            probs,
        })
    }

    /// Uniform `X`, with `Z` equal to `X` flipped with probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "crossover probability {p} outside [0, 1]"
            )));
        }
        Self::new(&[
            vec![(1.0 - p) / 2.0, p / 2.0],
            vec![p / 2.0, (1.0 - p) / 2.0],
        ])
    }

    /// Independent uniform `k`-ary pair.
    pub fn independent(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("alphabet size must be positive".into()));
        }
        let v = 1.0 / (k * k) as f64;
        Self::from_dense(k, k, vec![v; k * k])
    }

    /// `X = Z` uniform over `k` symbols.
    pub fn deterministic(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("alphabet size must be positive".into()));
        }
        let mut probs = vec![0.0; k * k];
        for s in 0..k {
            probs[s + k * s] = 1.0 / k as f64;
        }
        Self::from_dense(k, k, probs)
    }

    /// Parses a named preset: `bsc:<p>`, `indep:<k>` or `det:<k>`.
    pub fn preset(spec: &str) -> Result<Self> {
        let bad = || Error::Parse(spec.to_string());
        let (name, arg) = spec.split_once(':').ok_or_else(bad)?;
        let arg = arg.trim();
        match name.trim() {
            "bsc" => Self::bsc(arg.parse().map_err(|_| bad())?),
            "indep" => Self::independent(arg.parse().map_err(|_| bad())?),
            "det" => Self::deterministic(arg.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }

    /// Parses the plain matrix format: one row of whitespace-separated decimals
    /// per `x`, columns indexed by `z`. `#` starts a comment.
    pub fn parse_matrix(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|_| Error::Parse(tok.to_string())))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(&rows)
    }

    /// Resolves a source specification: a preset name if it matches one,
    /// otherwise a path to a matrix file.
    pub fn load(spec: &str) -> Result<Self> {
        let is_preset = ["bsc:", "indep:", "det:"]
            .iter()
            .any(|p| spec.starts_with(p));
        if is_preset {
            return Self::preset(spec);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: spec.to_string(),
            message: e.to_string(),
        })?;
        Self::parse_matrix(&text)
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn z_size(&self) -> usize {
        self.z_size
    }

    pub fn prob(&self, x: usize, z: usize) -> f64 {
        self.probs[x + self.x_size * z]
    }

    /// Dense probabilities, index `x + x_size * z`.
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn z_marginal(&self) -> Vec<f64> {
        (0..self.z_size)
            .map(|z| (0..self.x_size).map(|x| self.prob(x, z)).sum())
            .collect()
    }

    /// `P_{X|Z}(x|z)`, undefined (`None`) where `P_Z(z) = 0`.
    pub fn conditional(&self, x: usize, z: usize) -> Option<f64> {
        let pz: f64 = (0..self.x_size).map(|a| self.prob(a, z)).sum();
        (pz > 0.0).then(|| self.prob(x, z) / pz)
    }

    /// Single-letter information value `-ln P_{X|Z}(x|z)`; `None` outside the support.
    pub fn info_value(&self, x: usize, z: usize) -> Option<f64> {
        if self.prob(x, z) == 0.0 {
            return None;
        }
        self.conditional(x, z).map(|c| -c.ln())
    }

    /// Support cells with their probability and information value.
    pub(crate) fn support(&self) -> Vec<(usize, usize, f64, f64)> {
        let pz = self.z_marginal();
        let mut out = Vec::new();
        for z in 0..self.z_size {
            for x in 0..self.x_size {
                let p = self.prob(x, z);
                if p > 0.0 {
                    out.push((x, z, p, -(p / pz[z]).ln()));
                }
            }
        }
        out
    }

    /// True when `-ln P_{X|Z}` takes a single value over the support.
    pub fn has_constant_density(&self) -> bool {
        let support = self.support();
        let first = support[0].3;
        support
            .iter()
            .all(|c| (c.3 - first).abs() <= CONSTANT_DENSITY_TOLERANCE * first.abs().max(1.0))
    }

    /// Exact single-letter moments of the information density.
    pub fn info_stats(&self) -> SourceStats {
        let support = self.support();
        let h_cond: f64 = support.iter().map(|c| c.2 * c.3).sum();
        if self.has_constant_density() {
            return SourceStats {
                h_cond,
                sigma2: 0.0,
                rho3: 0.0,
            };
        }
        let sigma2 = support.iter().map(|c| c.2 * (c.3 - h_cond).powi(2)).sum();
        let rho3 = support.iter().map(|c| c.2 * (c.3 - h_cond).abs().powi(3)).sum();
        SourceStats {
            h_cond,
            sigma2,
            rho3,
        }
    }
}

impl fmt::Display for JointPmf {
    /// Writes the matrix format accepted by [`JointPmf::parse_matrix`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for x in 0..self.x_size {
            let row: Vec<String> = (0..self.z_size).map(|z| self.prob(x, z).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
