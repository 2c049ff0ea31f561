//! Secrecy metrics of a distilled key.
//!
//! For an encoder `f_n`, the key-eavesdropper joint is
//! `P_{S Z}(s, z) = sum_{x in f^{-1}(s)} P(x, z)`. Its distance to the ideal
//! `U_m x P_Z` gives the variational criterion `Delta`, its divergence from
//! the ideal gives `D`, and `D / n` is the weak criterion.

use rayon::prelude::*;

use crate::codes::EncoderMap;
use crate::error::{Error, Result};
use crate::source::TupleSource;

/// Cell budget for [`brute_force_discrimination`].
pub const DISCRIMINATION_LIMIT: u64 = 1 << 24;

/// Input distributions must sum to 1 within this tolerance.
const DISTRIBUTION_TOLERANCE: f64 = 1e-9;

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    for d in [p, q] {
        let sum: f64 = d.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE || d.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::NotNormalized {
                sum,
                tolerance: DISTRIBUTION_TOLERANCE,
            });
        }
    }
    Ok(())
}

/// Half the L1 distance, in `[0, 1]`.
pub fn variational_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `D(p || q)` in nats, `+inf` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    let mut acc = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            acc += a * (a / b).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// Joint distribution of the key `S_n` and the side information `Z^n`,
/// dense with index `s + m * z`.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyEveJoint {
    n: usize,
    m: u64,
    z_count: usize,
    probs: Vec<f64>,
}

impl KeyEveJoint {
    pub fn from_dense(n: usize, m: u64, z_count: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() as u64 != m * z_count as u64 {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: (m * z_count as u64) as usize,
            });
        }
        Ok(Self {
            n,
            m,
            z_count,
            probs,
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

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, s: u64, z: usize) -> f64 {
        self.probs[s as usize + self.m as usize * z]
    }

    fn columns(&self) -> std::slice::Chunks<'_, f64> {
        self.probs.chunks(self.m as usize)
    }

    pub fn z_marginal(&self) -> Vec<f64> {
        self.columns().map(|c| c.iter().sum()).collect()
    }

    /// The ideal distribution `U_m x P_Z`, same indexing.
    pub fn ideal(&self) -> Vec<f64> {
        let inv = 1.0 / self.m as f64;
        self.z_marginal()
            .into_iter()
            .flat_map(|pz| std::iter::repeat_n(pz * inv, self.m as usize))
            .collect()
    }

    /// `H(S_n | Z^n)` in nats.
    pub fn conditional_entropy(&self) -> f64 {
        self.columns()
            .map(|c| {
                let pz: f64 = c.iter().sum();
                c.iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| -p * (p / pz).ln())
                    .sum::<f64>()
            })
            .sum()
    }

    /// `Delta(f_n) = d(P_SZ, U x P_Z)`.
    pub fn delta_metric(&self) -> f64 {
        let inv = 1.0 / self.m as f64;
        0.5 * self
            .columns()
            .map(|c| {
                let q = c.iter().sum::<f64>() * inv;
                c.iter().map(|&p| (p - q).abs()).sum::<f64>()
            })
            .sum::<f64>()
    }

    /// `D(f_n)` through the identity `ln m - H(S_n | Z^n)`.
    pub fn divergence(&self) -> f64 {
        ((self.m as f64).ln() - self.conditional_entropy()).max(0.0)
    }

    /// `D(f_n)` as the direct sum `sum p ln(p / q)`.
    pub fn divergence_direct(&self) -> f64 {
        let m = self.m as f64;
        self.columns()
            .map(|c| {
                let pz: f64 = c.iter().sum();
                c.iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| p * (p * m / pz).ln())
                    .sum::<f64>()
            })
            .sum()
    }

    /// Key-eavesdropper joint of `g ∘ f`, obtained by merging key symbols.
    pub fn regroup(&self, g: &[u32], m2: u64) -> Result<Self> {
        if g.len() as u64 != self.m {
            return Err(Error::DimensionMismatch(format!(
                "regrouping of {} symbols applied to {} key symbols",
                g.len(),
                self.m
            )));
        }
        let mut probs = vec![0.0; m2 as usize * self.z_count];
        for (z, col) in self.columns().enumerate() {
            for (s, &p) in col.iter().enumerate() {
                probs[g[s] as usize + m2 as usize * z] += p;
            }
        }
        Self::from_dense(self.n, m2, self.z_count, probs)
    }
}

/// Builds `P_{S_n Z^n}` for `encoder` by full enumeration of the source.
pub fn key_eve_joint<S: TupleSource + ?Sized>(source: &S, encoder: &EncoderMap) -> Result<KeyEveJoint> {
    let (xc, zc) = source.dims()?;
    if encoder.domain() != xc as u64 {
        return Err(Error::DimensionMismatch(format!(
            "encoder over {} tuples, source over {xc}",
            encoder.domain()
        )));
    }
    let f = encoder.table()?;
    let m = encoder.m() as usize;
    let mut probs = vec![0.0; m * zc];
    probs
        .par_chunks_mut(m)
        .enumerate()
        .for_each_init(
            || vec![0.0; xc],
            |row, (z, col)| {
                source.fill_row(z, row);
                for (x, &p) in row.iter().enumerate() {
                    col[f[x] as usize] += p;
                }
            },
        );
    KeyEveJoint::from_dense(source.block_len(), encoder.m(), zc, probs)
}

/// The three secrecy criteria of one key, plus derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport {
    pub n: usize,
    pub m: u64,
    /// Variational distance `Delta(f_n)`.
    pub delta_metric: f64,
    /// `D(f_n)` in nats, via `ln m - H(S|Z)`.
    pub divergence: f64,
    /// `D(f_n)` by direct summation; kept as a cross-check.
    pub divergence_direct: f64,
    pub normalized: f64,
    pub root_scaled: f64,
    /// `(ln m - n H) / sqrt(n)`.
    pub second_order_rate: f64,
    /// Optimal probability of telling the real joint from the ideal one.
    pub distinguish_prob: f64,
}

impl SecurityReport {
    /// `h_rate` is the per-symbol conditional entropy used for the second-order rate.
    pub fn from_key_eve(kj: &KeyEveJoint, h_rate: f64) -> Self {
        let n = kj.n() as f64;
        let delta_metric = kj.delta_metric();
        let divergence = kj.divergence();
        Self {
            n: kj.n(),
            m: kj.m(),
            delta_metric,
            divergence,
            divergence_direct: kj.divergence_direct(),
            normalized: divergence / n,
            root_scaled: divergence / n.sqrt(),
            second_order_rate: crate::codes::second_order_rate(kj.n(), kj.m(), h_rate),
            distinguish_prob: 0.5 * (1.0 + delta_metric),
        }
    }

    /// `|D_identity - D_direct|`.
    pub fn identity_residual(&self) -> f64 {
        (self.divergence - self.divergence_direct).abs()
    }

    /// `sqrt(D / 2) - Delta`, nonnegative by Pinsker's inequality.
    pub fn pinsker_slack(&self) -> f64 {
        (self.divergence / 2.0).sqrt() - self.delta_metric
    }
}

pub fn security_report<S: TupleSource + ?Sized>(source: &S, encoder: &EncoderMap) -> Result<SecurityReport> {
    let kj = key_eve_joint(source, encoder)?;
    Ok(SecurityReport::from_key_eve(&kj, source.entropy_rate()))
}

/// `max_A (1/2)[P_SZ(A) + P_UZ(A^c)]`, computed by putting each cell on the
/// side where its mass is larger.
pub fn brute_force_discrimination(kj: &KeyEveJoint) -> Result<f64> {
    let cells = kj.m() * kj.z_count() as u64;
    if cells > DISCRIMINATION_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{cells} cells exceed the discrimination limit of {DISCRIMINATION_LIMIT}"
        )));
    }
    let ideal = kj.ideal();
    Ok(0.5 * kj.probs().iter().zip(&ideal).map(|(&p, &q)| p.max(q)).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{JointPmf, ProductSource, TupleJoint};
    use proptest::prelude::*;

    fn bsc(p: f64, n: usize) -> ProductSource {
        ProductSource::new(JointPmf::bsc(p).unwrap(), n).unwrap()
    }

    #[test]
    fn variational_examples() {
        let u = [0.25; 4];
        assert_eq!(variational_distance(&u, &u).unwrap(), 0.0);
        assert_eq!(variational_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        let d = variational_distance(&[0.45, 0.05, 0.05, 0.45], &u).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
        assert!(matches!(
            variational_distance(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn kl_examples() {
        let p = [0.3, 0.7];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let d = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(kl_divergence(&[0.5, 0.6], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn key_eve_examples() {
        let s = bsc(0.1, 1);
        let kj = key_eve_joint(&s, &EncoderMap::identity(1, 2).unwrap()).unwrap();
        assert_eq!(kj.probs(), JointPmf::bsc(0.1).unwrap().as_slice());

        let s = bsc(0.2, 3);
        let kj = key_eve_joint(&s, &EncoderMap::constant(3, 8).unwrap()).unwrap();
        let pz = vec![0.125; 8];
        for (a, b) in kj.probs().iter().zip(&pz) {
            assert!((a - b).abs() < 1e-15);
        }

        let s = bsc(0.2, 2);
        let kj = key_eve_joint(&s, &EncoderMap::identity(2, 4).unwrap()).unwrap();
        let t = TupleJoint::from_product(&s).unwrap();
        for (a, b) in kj.probs().iter().zip(t.pmf().as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }

        assert!(key_eve_joint(&s, &EncoderMap::identity(3, 8).unwrap()).is_err());
    }

    #[test]
    fn report_examples() {
        let indep = ProductSource::new(JointPmf::independent(2).unwrap(), 1).unwrap();
        let r = security_report(&indep, &EncoderMap::identity(1, 2).unwrap()).unwrap();
        assert_eq!(r.delta_metric, 0.0);
        assert!(r.divergence.abs() < 1e-15);

        let s = bsc(0.1, 1);
        let r = security_report(&s, &EncoderMap::identity(1, 2).unwrap()).unwrap();
        let h = JointPmf::bsc(0.1).unwrap().info_stats().h_cond;
        assert!((r.divergence - (2f64.ln() - h)).abs() < 1e-15);
        assert!((r.divergence - 0.368064).abs() < 1e-6);
        assert!((r.delta_metric - 0.4).abs() < 1e-15);
        assert!((r.distinguish_prob - 0.7).abs() < 1e-15);

        let r = security_report(&s, &EncoderMap::constant(1, 2).unwrap()).unwrap();
        assert_eq!(r.delta_metric, 0.0);
        assert_eq!(r.divergence, 0.0);
    }

    #[test]
    fn discrimination_examples() {
        let ideal = KeyEveJoint::from_dense(1, 2, 2, vec![0.25; 4]).unwrap();
        assert_eq!(brute_force_discrimination(&ideal).unwrap(), 0.5);

        let kj = key_eve_joint(&bsc(0.1, 1), &EncoderMap::identity(1, 2).unwrap()).unwrap();
        assert!((brute_force_discrimination(&kj).unwrap() - 0.7).abs() < 1e-15);

        // all mass on one key symbol: Delta = 1 - 1/m
        let kj = KeyEveJoint::from_dense(1, 4, 1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = brute_force_discrimination(&kj).unwrap();
        assert!((p - 0.5 * (1.0 + 0.75)).abs() < 1e-15);
    }

    #[test]
    fn discrimination_matches_subset_enumeration() {
        // explicit max over all 2^cells subsets A
        let s = bsc(0.3, 2);
        for seed in 0..5 {
            let f = EncoderMap::random_binning(2, 4, 3, seed).unwrap();
            let kj = key_eve_joint(&s, &f).unwrap();
            let p = kj.probs();
            let q = kj.ideal();
            let cells = p.len();
            let best = (0u32..1 << cells)
                .map(|a| {
                    (0..cells)
                        .map(|i| if a >> i & 1 == 1 { p[i] } else { q[i] })
                        .sum::<f64>()
                        / 2.0
                })
                .fold(0.0, f64::max);
            let closed = 0.5 * (1.0 + kj.delta_metric());
            assert!((best - closed).abs() < 1e-12);
            assert!((brute_force_discrimination(&kj).unwrap() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn discrimination_size_limit() {
        let kj = KeyEveJoint::from_dense(1, 1 << 13, 1 << 12, vec![0.0; 1 << 25]).unwrap();
        assert!(brute_force_discrimination(&kj).is_err());
    }

    #[test]
    fn markov_quotient() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in 1..=3 {
            let s = bsc(0.15, n);
            let domain = 1u64 << n;
            for seed in 0..10 {
                let m = rng.random_range(1..=domain);
                let f = EncoderMap::random_binning(n, domain, m, seed).unwrap();
                let m2 = rng.random_range(1..=m);
                let g: Vec<u32> = (0..m).map(|_| rng.random_range(0..m2 as u32)).collect();
                let direct = key_eve_joint(&s, &f.compose(&g, m2).unwrap()).unwrap();
                let regrouped = key_eve_joint(&s, &f).unwrap().regroup(&g, m2).unwrap();
                for (a, b) in direct.probs().iter().zip(regrouped.probs()) {
                    assert!((a - b).abs() < 1e-15);
                }
            }
        }
    }

    fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, len).prop_filter_map("zero mass", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    proptest! {
        #[test]
        fn triangle_inequality(p in distribution(8), q in distribution(8), r in distribution(8)) {
            let pq = variational_distance(&p, &q).unwrap();
            let qr = variational_distance(&q, &r).unwrap();
            let pr = variational_distance(&p, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-15);
            prop_assert!((pq - variational_distance(&q, &p).unwrap()).abs() < 1e-15);
        }

        #[test]
        fn criteria_ordering(p in 0.01f64..0.49, n in 1usize..=3, m in 1u64..=8, seed in 0u64..1000) {
            let s = bsc(p, n);
            let m = m.min(1 << n);
            let f = EncoderMap::random_binning(n, 1 << n, m, seed).unwrap();
            let kj = key_eve_joint(&s, &f).unwrap();
            let r = SecurityReport::from_key_eve(&kj, s.entropy_rate());
            prop_assert!(r.identity_residual() < 1e-9);
            prop_assert!(r.delta_metric <= (r.divergence / 2.0).sqrt() + 1e-12);
            prop_assert!(r.normalized <= r.divergence + 1e-15);
            let d = variational_distance(kj.probs(), &kj.ideal()).unwrap();
            prop_assert!((d - r.delta_metric).abs() < 1e-15);
            let kl = kl_divergence(kj.probs(), &kj.ideal()).unwrap();
            prop_assert!((kl - r.divergence).abs() < 1e-9);
        }
    }
}
