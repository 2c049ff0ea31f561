use std::borrow::Cow;

use crate::error::{Error, Result};

/// How an encoder assigns key symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncoderForm {
    /// Explicit lookup, `table[x^n index] = s`.
    Table(Vec<u32>),
    /// Seeded hash of the tuple index, see [`bin_of`].
    Binning { seed: u64 },
}

/// An encoder `f_n: X^n -> {0, .., m-1}`, doubling as the privacy
/// amplification function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderMap {
    n: usize,
    domain: u64,
    m: u64,
    form: EncoderForm,
}

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Bin of tuple index `x` under binning seed `seed` with `m` bins:
/// `h = splitmix64(splitmix64(seed) ^ x)`, bin `= floor(h * m / 2^64)`.
pub fn bin_of(seed: u64, x: u64, m: u64) -> u64 {
    let h = splitmix64(splitmix64(seed) ^ x);
    ((u128::from(h) * u128::from(m)) >> 64) as u64
}

impl EncoderMap {
    /// Seeded random binning of a domain of `domain = |X|^n` tuples into `m` bins.
    /// Collisions are allowed even when `m = domain`.
    pub fn random_binning(n: usize, domain: u64, m: u64, seed: u64) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if domain == 0 {
            return Err(Error::InvalidParameter("empty domain".into()));
        }
        Ok(Self {
            n,
            domain,
            m,
            form: EncoderForm::Binning { seed },
        })
    }

    /// Explicit table encoder; every entry must be below `m`.
    pub fn from_table(n: usize, m: u64, table: Vec<u32>) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        if table.is_empty() {
            return Err(Error::InvalidParameter("empty domain".into()));
        }
        if let Some(bad) = table.iter().find(|&&s| u64::from(s) >= m) {
            return Err(Error::InvalidParameter(format!(
                "table entry {bad} outside 0..{m}"
            )));
        }
        Ok(Self {
            n,
            domain: table.len() as u64,
            m,
            form: EncoderForm::Table(table),
        })
    }

    /// The bijection `x -> x` with `m = domain`.
    pub fn identity(n: usize, domain: u64) -> Result<Self> {
        let d = u32::try_from(domain)
            .map_err(|_| Error::SizeLimit(format!("identity table of {domain} entries")))?;
        Self::from_table(n, domain, (0..d).collect())
    }

    /// The zero-length key, `m = 1`.
    pub fn constant(n: usize, domain: u64) -> Result<Self> {
        let len = usize::try_from(domain)
            .map_err(|_| Error::SizeLimit(format!("table of {domain} entries")))?;
        Self::from_table(n, 1, vec![0; len])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> u64 {
        self.domain
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn form(&self) -> &EncoderForm {
        &self.form
    }

    pub fn apply(&self, x: u64) -> u64 {
        match &self.form {
            EncoderForm::Table(t) => u64::from(t[x as usize]),
            EncoderForm::Binning { seed } => bin_of(*seed, x, self.m),
        }
    }

    /// Full lookup table; binning encoders are materialized on the fly.
    pub fn table(&self) -> Result<Cow<'_, [u32]>> {
        match &self.form {
            EncoderForm::Table(t) => Ok(Cow::Borrowed(t)),
            EncoderForm::Binning { seed } => {
                if self.m > u64::from(u32::MAX) + 1 {
                    return Err(Error::SizeLimit(format!("{} key symbols", self.m)));
                }
                let len = usize::try_from(self.domain)
                    .map_err(|_| Error::SizeLimit(format!("{} tuples", self.domain)))?;
                Ok(Cow::Owned(
                    (0..len as u64)
                        .map(|x| bin_of(*seed, x, self.m) as u32)
                        .collect(),
                ))
            }
        }
    }

    /// `g ∘ f` for a regrouping `g: {0..m} -> {0..m2}`.
    pub fn compose(&self, g: &[u32], m2: u64) -> Result<Self> {
        if g.len() as u64 != self.m {
            return Err(Error::DimensionMismatch(format!(
                "regrouping of {} symbols applied to {} bins",
                g.len(),
                self.m
            )));
        }
        let table = self.table()?.iter().map(|&s| g[s as usize]).collect();
        Self::from_table(self.n, m2, table)
    }

    /// Smallest tuple index in each bin, `None` for empty bins.
    pub fn bin_representatives(&self) -> Result<Vec<Option<u32>>> {
        let table = self.table()?;
        let mut reps = vec![None; self.m as usize];
        for (x, &s) in table.iter().enumerate() {
            reps[s as usize].get_or_insert(x as u32);
        }
        Ok(reps)
    }

    /// Number of tuples in each bin.
    pub fn bin_sizes(&self) -> Result<Vec<u64>> {
        let mut sizes = vec![0u64; self.m as usize];
        for &s in self.table()?.iter() {
            sizes[s as usize] += 1;
        }
        Ok(sizes)
    }
}
