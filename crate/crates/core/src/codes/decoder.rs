use rayon::prelude::*;

use super::encoder::EncoderMap;
use crate::error::{Error, Result};
use crate::source::{ProductSource, TupleSource};

/// Two-sided 99% standard normal quantile.
const Z_99: f64 = 2.575_829_303_548_901;

/// Decoder `psi_n(s, z^n) -> x^n`, stored as a table indexed `s + m * z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoder {
    n: usize,
    m: u64,
    z_count: usize,
    table: Vec<u32>,
    repaired: bool,
}

/// A Slepian-Wolf code `(phi_n, psi_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodePair {
    pub encoder: EncoderMap,
    pub decoder: Decoder,
}

/// Exact enumeration or a seeded Monte Carlo frequency estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    Exact,
    MonteCarlo { seed: u64, trials: u64 },
}

/// Error probability, with the half-width of a 99% normal confidence
/// interval for Monte Carlo estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub eps: f64,
    pub half_width: Option<f64>,
}

impl Decoder {
    /// Wraps an explicit table indexed `s + m * z`.
    pub fn from_table(n: usize, m: u64, z_count: usize, table: Vec<u32>) -> Result<Self> {
        if table.len() as u64 != m * z_count as u64 {
            return Err(Error::DimensionMismatch(format!(
                "decoder table of {} entries for m = {m}, |Z^n| = {z_count}",
                table.len()
            )));
        }
        Ok(Self {
            n,
            m,
            z_count,
            table,
            repaired: false,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn z_count(&self) -> usize {
        self.z_count
    }

    pub fn is_repaired(&self) -> bool {
        self.repaired
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn decode(&self, s: u64, z: u64) -> u64 {
        u64::from(self.table[(s + self.m * z) as usize])
    }
}

impl CodePair {
    pub fn new(encoder: EncoderMap, decoder: Decoder) -> Result<Self> {
        if encoder.m() != decoder.m() || encoder.n() != decoder.n() {
            return Err(Error::DimensionMismatch(format!(
                "encoder (n={}, m={}) vs decoder (n={}, m={})",
                encoder.n(),
                encoder.m(),
                decoder.n(),
                decoder.m()
            )));
        }
        Ok(Self { encoder, decoder })
    }

    /// True when `phi(psi(s, z)) = s` for every nonempty bin `s` and every `z`.
    pub fn is_consistent(&self) -> Result<bool> {
        let table = self.encoder.table()?;
        let reps = self.encoder.bin_representatives()?;
        let m = self.decoder.m as usize;
        Ok(self.decoder.table.chunks(m).all(|col| {
            col.iter()
                .enumerate()
                .all(|(s, &x)| reps[s].is_none() || table[x as usize] as usize == s)
        }))
    }
}

fn check_dims<S: TupleSource + ?Sized>(source: &S, encoder: &EncoderMap) -> Result<(usize, usize)> {
    let (xc, zc) = source.dims()?;
    if encoder.domain() != xc as u64 {
        return Err(Error::DimensionMismatch(format!(
            "encoder over {} tuples, source over {xc}",
            encoder.domain()
        )));
    }
    Ok((xc, zc))
}

/// Maximum a posteriori decoder: for each `(s, z)` the `x` in `f^{-1}(s)`
/// with the largest `P(x, z)`, ties to the smallest index, `0` for empty bins.
pub fn map_decoder<S: TupleSource + ?Sized>(source: &S, encoder: &EncoderMap) -> Result<Decoder> {
    let (xc, zc) = check_dims(source, encoder)?;
    let f = encoder.table()?;
    let m = encoder.m() as usize;
    let mut table = vec![0u32; m * zc];
    table
        .par_chunks_mut(m)
        .enumerate()
        .for_each_init(
            || (vec![0.0; xc], vec![-1.0f64; m]),
            |(row, best), (z, col)| {
                source.fill_row(z, row);
                best.fill(-1.0);
                for (x, &p) in row.iter().enumerate() {
                    let s = f[x] as usize;
                    if p > best[s] {
                        best[s] = p;
                        col[s] = x as u32;
                    }
                }
            },
        );
    Ok(Decoder {
        n: encoder.n(),
        m: encoder.m(),
        z_count: zc,
        table,
        repaired: false,
    })
}

/// Replaces every decision outside the received bin by the bin's smallest
/// member. Empty bins, which the encoder never emits, decode to tuple 0.
pub fn repair_decoder(code: &CodePair) -> Result<CodePair> {
    let f = code.encoder.table()?;
    let reps = code.encoder.bin_representatives()?;
    let m = code.decoder.m as usize;
    let mut table = code.decoder.table.clone();
    for col in table.chunks_mut(m) {
        for (s, x) in col.iter_mut().enumerate() {
            match reps[s] {
                Some(rep) if f[*x as usize] as usize != s => *x = rep,
                Some(_) => {}
                None => *x = 0,
            }
        }
    }
    Ok(CodePair {
        encoder: code.encoder.clone(),
        decoder: Decoder {
            table,
            repaired: true,
            ..code.decoder.clone()
        },
    })
}

/// Exact error probability `P{psi(phi(X^n), Z^n) != X^n}`.
pub fn error_probability<S: TupleSource + ?Sized>(source: &S, code: &CodePair) -> Result<f64> {
    let (xc, zc) = check_dims(source, &code.encoder)?;
    if code.decoder.z_count != zc {
        return Err(Error::DimensionMismatch("decoder side-information size".into()));
    }
    let f = code.encoder.table()?;
    let m = code.decoder.m as usize;
    let dec = &code.decoder.table;
    let partial: Vec<f64> = (0..zc)
        .into_par_iter()
        .map_init(
            || vec![0.0; xc],
            |row, z| {
                source.fill_row(z, row);
                let col = &dec[z * m..(z + 1) * m];
                row.iter()
                    .enumerate()
                    .map(|(x, &p)| if col[f[x] as usize] as usize != x { p } else { 0.0 })
                    .sum::<f64>()
            },
        )
        .collect();
    Ok(partial.iter().sum())
}

/// Error probability on a product source, exactly or by simulation.
pub fn estimate_error(source: &ProductSource, code: &CodePair, mode: ErrorMode) -> Result<ErrorEstimate> {
    match mode {
        ErrorMode::Exact => Ok(ErrorEstimate {
            eps: error_probability(source, code)?,
            half_width: None,
        }),
        ErrorMode::MonteCarlo { seed, trials } => {
            if trials < 1 {
                return Err(Error::InvalidParameter("trials must be positive".into()));
            }
            check_dims(source, &code.encoder)?;
            let mut errors = 0u64;
            source.sample_indices(seed, trials, |x, z| {
                let s = code.encoder.apply(x);
                if code.decoder.decode(s, z) != x {
                    errors += 1;
                }
            });
            let eps = errors as f64 / trials as f64;
            let half_width = Z_99 * (eps * (1.0 - eps) / trials as f64).sqrt();
            Ok(ErrorEstimate {
                eps,
                half_width: Some(half_width),
            })
        }
    }
}
