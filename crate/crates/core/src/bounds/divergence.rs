use rayon::prelude::*;

use super::gaussian::gaussian;
use crate::codes::EncoderMap;
use crate::error::{Error, Result};
use crate::metrics::key_eve_joint;
use crate::source::TupleSource;

/// `integral_{-inf}^{b/sigma} (b - sigma u) g(u) du = b G(b/sigma) + sigma g(b/sigma)`.
pub fn thm2_lower_bound(b: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let t = b / sigma;
    let (cdf, pdf) = gaussian(t);
    Ok(b * cdf + sigma * pdf)
}

/// Limit of [`thm2_lower_bound`] that also covers `sigma = 0`, where it is `max(b, 0)`.
pub fn thm2_rhs(b: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        b.max(0.0)
    } else {
        thm2_lower_bound(b, sigma).unwrap_or(f64::NAN)
    }
}

/// Lemma-2 quantities for one code at second-order target `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub n: usize,
    pub m: u64,
    pub b: f64,
    /// Per-letter deviation `sqrt(Var W_n / n)`; equals sigma for i.i.d. sources.
    pub sigma: f64,
    pub thm2_rhs: f64,
    /// `sum_T P W + P(T^c) [ln M - ln P(T^c)]`.
    pub lemma2_rhs: f64,
    /// `H(S_n | Z^n)` computed from the key-eavesdropper joint.
    pub h_sz_exact: f64,
    /// `P(T_n)`, with `T_n = {W_n - nH <= b sqrt(n)}`.
    pub tn_mass: f64,
}

impl BoundReport {
    /// `lemma2_rhs - H(S|Z)`, nonnegative by the lemma.
    pub fn lemma2_slack(&self) -> f64 {
        self.lemma2_rhs - self.h_sz_exact
    }
}

/// Exact sums over the cells of a source, split by membership in `T_n`.
#[derive(Debug, Clone, Copy, Default)]
struct CellSums {
    p_t: f64,
    pw_t: f64,
    pdev_t: f64,
    pw: f64,
    pw2: f64,
}

impl CellSums {
    fn add(mut self, o: Self) -> Self {
        self.p_t += o.p_t;
        self.pw_t += o.pw_t;
        self.pdev_t += o.pdev_t;
        self.pw += o.pw;
        self.pw2 += o.pw2;
        self
    }
}

fn cell_sums<S: TupleSource + ?Sized>(source: &S, b: f64) -> Result<CellSums> {
    let (xc, zc) = source.dims()?;
    let n = source.block_len() as f64;
    let nh = n * source.entropy_rate();
    let cut = b * n.sqrt();
    let partials: Vec<CellSums> = (0..zc)
        .into_par_iter()
        .map_init(
            || vec![0.0; xc],
            |row, z| {
                source.fill_row(z, row);
                let pz: f64 = row.iter().sum();
                let mut acc = CellSums::default();
                for &p in row.iter().filter(|&&p| p > 0.0) {
                    let w = -(p / pz).ln();
                    acc.pw += p * w;
                    acc.pw2 += p * w * w;
                    if w - nh <= cut {
                        acc.p_t += p;
                        acc.pw_t += p * w;
                        acc.pdev_t += p * (w - nh);
                    }
                }
                acc
            },
        )
        .collect();
    Ok(partials.into_iter().fold(CellSums::default(), CellSums::add))
}

fn x_ln_x(x: f64) -> f64 {
    if x > 0.0 { x * x.ln() } else { 0.0 }
}

fn lemma2_rhs(sums: &CellSums, m: u64) -> f64 {
    let c = (1.0 - sums.p_t).max(0.0);
    sums.pw_t + c * (m as f64).ln() - x_ln_x(c)
}

/// Evaluates both sides of the conditional entropy bound for `encoder` on `source` by full enumeration.
pub fn lemma2_bound<S: TupleSource + ?Sized>(
    source: &S,
    encoder: &EncoderMap,
    b: f64,
) -> Result<BoundReport> {
    let sums = cell_sums(source, b)?;
    let kj = key_eve_joint(source, encoder)?;
    let n = source.block_len();
    let var = (sums.pw2 - sums.pw * sums.pw).max(0.0);
    let sigma = (var / n as f64).sqrt();
    Ok(BoundReport {
        n,
        m: encoder.m(),
        b,
        sigma,
        thm2_rhs: thm2_rhs(b, sigma),
        lemma2_rhs: lemma2_rhs(&sums, encoder.m()),
        h_sz_exact: kj.conditional_entropy(),
        tn_mass: sums.p_t,
    })
}

/// Both sides of the finite-n chain
/// `D/sqrt(n) >= P(T) b_n - E[W - nH; T]/sqrt(n) + P(T^c) ln P(T^c)/sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofChain {
    pub n: usize,
    pub m: u64,
    pub b: f64,
    /// `ln M - H(S|Z)`.
    pub d_identity: f64,
    /// `D(P_SZ || U x P_Z)` summed directly.
    pub d_direct: f64,
    /// `(ln M - nH) / sqrt(n)`.
    pub b_n: f64,
    pub tn_mass: f64,
    /// `E[W - nH; T] / sqrt(n)`.
    pub partial_term: f64,
    /// `P(T^c) ln P(T^c) / sqrt(n)`.
    pub tail_term: f64,
    pub lemma2_rhs: f64,
    pub h_sz_exact: f64,
}

impl ProofChain {
    pub fn lhs(&self) -> f64 {
        self.d_identity / (self.n as f64).sqrt()
    }

    pub fn rhs(&self) -> f64 {
        self.tn_mass * self.b_n - self.partial_term + self.tail_term
    }

    /// Named residuals; each is nonnegative up to rounding when the step holds.
    pub fn residuals(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("identity", -(self.d_identity - self.d_direct).abs()),
            ("lemma2", self.lemma2_rhs - self.h_sz_exact),
            ("chain", self.lhs() - self.rhs()),
        ]
    }
}

pub fn thm2_proof_chain<S: TupleSource + ?Sized>(
    source: &S,
    encoder: &EncoderMap,
    b: f64,
) -> Result<ProofChain> {
    let sums = cell_sums(source, b)?;
    let kj = key_eve_joint(source, encoder)?;
    let n = source.block_len();
    let rn = (n as f64).sqrt();
    let m = encoder.m();
    let h_sz = kj.conditional_entropy();
    Ok(ProofChain {
        n,
        m,
        b,
        d_identity: (m as f64).ln() - h_sz,
        d_direct: kj.divergence_direct(),
        b_n: crate::codes::second_order_rate(n, m, source.entropy_rate()),
        tn_mass: sums.p_t,
        partial_term: sums.pdev_t / rn,
        tail_term: x_ln_x((1.0 - sums.p_t).max(0.0)) / rn,
        lemma2_rhs: lemma2_rhs(&sums, m),
        h_sz_exact: h_sz,
    })
}
