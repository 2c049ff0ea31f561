use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pmf::{JointPmf, SourceStats};
use super::profile::ConditionalProfile;
use crate::combinatorics::{for_each_composition, multinomial};
use crate::error::{Error, Result};
use crate::tuple;

/// Default cap on `|X|^n * |Z|^n` for exact enumeration.
pub const DEFAULT_MATERIALIZE_THRESHOLD: u64 = 1 << 28;

/// A joint distribution over `(x^n, z^n)` tuples that can be enumerated one
/// side-information row at a time.
///
/// Tuple indices follow the little-endian mixed-radix rule of [`crate::tuple`].
pub trait TupleSource: Sync {
    /// Block length `n`.
    fn block_len(&self) -> usize;

    /// `(|X^n|, |Z^n|)`; fails when the source is too large to enumerate.
    fn dims(&self) -> Result<(usize, usize)>;

    /// Writes `P(x^n, z^n)` for every `x^n` into `row`.
    fn fill_row(&self, z: usize, row: &mut [f64]);

    /// `H(X^n|Z^n) / n` in nats.
    fn entropy_rate(&self) -> f64;

    /// Sorted conditional masses of `X^n` given each side-information value,
    /// grouped by profile.
    fn conditional_profiles(&self) -> Result<Vec<ConditionalProfile>> {
        let (xc, zc) = self.dims()?;
        let mut row = vec![0.0; xc];
        let mut out = Vec::new();
        for z in 0..zc {
            self.fill_row(z, &mut row);
            let pz: f64 = row.iter().sum();
            if pz > 0.0 {
                let groups = row.iter().map(|&p| {
                    let c = p / pz;
                    (c, -c.ln(), 1u64)
                });
                out.push(ConditionalProfile::new(pz, groups));
            }
        }
        Ok(out)
    }
}

/// The n-fold i.i.d. extension of a [`JointPmf`]. Never materialized as a
/// whole; tuple probabilities are evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSource {
    base: JointPmf,
    n: usize,
    threshold: u64,
}

/// Value of `W_n = sum_i -ln P_{X|Z}(x_i|z_i)` for one tuple pair, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoDensitySample {
    pub w: f64,
}

impl ProductSource {
    pub fn new(base: JointPmf, n: usize) -> Result<Self> {
        Self::with_threshold(base, n, DEFAULT_MATERIALIZE_THRESHOLD)
    }

    pub fn with_threshold(base: JointPmf, n: usize, threshold: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        if threshold == 0 {
            return Err(Error::InvalidParameter("threshold must be positive".into()));
        }
        Ok(Self { base, n, threshold })
    }

    pub fn base(&self) -> &JointPmf {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn stats(&self) -> SourceStats {
        self.base.info_stats()
    }

    /// `|X|^n` when it fits in 64 bits.
    pub fn x_tuples(&self) -> Option<u64> {
        tuple::count(self.base.x_size(), self.n)
    }

    pub fn z_tuples(&self) -> Option<u64> {
        tuple::count(self.base.z_size(), self.n)
    }

    fn joint_cells(&self) -> u128 {
        let xs = (self.base.x_size() as u128).checked_pow(self.n as u32);
        let zs = (self.base.z_size() as u128).checked_pow(self.n as u32);
        match (xs, zs) {
            (Some(a), Some(b)) => a.saturating_mul(b),
            _ => u128::MAX,
        }
    }

    /// Exact `P(x^n, z^n)` for one tuple pair.
    pub fn prob(&self, x: &[usize], z: &[usize]) -> f64 {
        x.iter()
            .zip(z)
            .fold(1.0, |acc, (&a, &b)| acc * self.base.prob(a, b))
    }

    /// `W_n` for one tuple pair. Infinite when some coordinate has zero
    /// conditional probability.
    pub fn info_density(&self, x: &[usize], z: &[usize]) -> Result<InfoDensitySample> {
        if x.len() != self.n || z.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "tuples of length {}/{} for block length {}",
                x.len(),
                z.len(),
                self.n
            )));
        }
        let pz = self.base.z_marginal();
        let mut w = 0.0;
        for (i, (&a, &b)) in x.iter().zip(z).enumerate() {
            if pz[b] == 0.0 {
                return Err(Error::ZeroSideInformation {
                    coord: i,
                    symbol: b,
                });
            }
            w += self.base.info_value(a, b).unwrap_or(f64::INFINITY);
        }
        Ok(InfoDensitySample { w })
    }

    /// Draws `count` i.i.d. tuple pairs. Deterministic in `seed`: the
    /// generator is ChaCha8 seeded through `seed_from_u64`, and each
    /// coordinate consumes one uniform `f64` inverted through the cumulative
    /// table of the base cells in dense index order.
    pub fn sample(&self, seed: u64, count: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be positive".into()));
        }
        let mut sampler = CellSampler::new(&self.base, seed);
        Ok((0..count)
            .map(|_| {
                let mut x = vec![0; self.n];
                let mut z = vec![0; self.n];
                for i in 0..self.n {
                    let (a, b) = sampler.draw();
                    x[i] = a;
                    z[i] = b;
                }
                (x, z)
            })
            .collect())
    }

    /// Like [`sample`](Self::sample) but yields tuple indices, for callers
    /// that only need `(x^n index, z^n index)`.
    pub(crate) fn sample_indices(&self, seed: u64, count: u64, mut f: impl FnMut(u64, u64)) {
        let mut sampler = CellSampler::new(&self.base, seed);
        let xs = self.base.x_size() as u64;
        let zs = self.base.z_size() as u64;
        for _ in 0..count {
            let (mut xi, mut zi, mut xw, mut zw) = (0u64, 0u64, 1u64, 1u64);
            for _ in 0..self.n {
                let (a, b) = sampler.draw();
                xi += a as u64 * xw;
                zi += b as u64 * zw;
                xw = xw.wrapping_mul(xs);
                zw = zw.wrapping_mul(zs);
            }
            f(xi, zi);
        }
    }
}

struct CellSampler<'a> {
    base: &'a JointPmf,
    cumulative: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'a> CellSampler<'a> {
    fn new(base: &'a JointPmf, seed: u64) -> Self {
        let mut acc = 0.0;
        let cumulative = base
            .as_slice()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            base,
            cumulative,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn draw(&mut self) -> (usize, usize) {
        let total = *self.cumulative.last().unwrap();
        let u: f64 = self.rng.random::<f64>() * total;
        let mut cell = self.cumulative.partition_point(|&c| c <= u);
        // skip zero-mass cells that share the cumulative value
        cell = cell.min(self.cumulative.len() - 1);
        while self.base.as_slice()[cell] == 0.0 && cell > 0 {
            cell -= 1;
        }
        let xs = self.base.x_size();
        (cell % xs, cell / xs)
    }
}

impl TupleSource for ProductSource {
    fn block_len(&self) -> usize {
        self.n
    }

    fn dims(&self) -> Result<(usize, usize)> {
        let cells = self.joint_cells();
        if cells > u128::from(self.threshold) {
            return Err(Error::ThresholdExceeded {
                cells,
                threshold: self.threshold,
            });
        }
        Ok((
            self.x_tuples().unwrap() as usize,
            self.z_tuples().unwrap() as usize,
        ))
    }

    fn fill_row(&self, z: usize, row: &mut [f64]) {
        let xs = self.base.x_size();
        let zs = self.base.z_size();
        row[0] = 1.0;
        let mut len = 1;
        let mut rest = z;
        for _ in 0..self.n {
            let zc = rest % zs;
            rest /= zs;
            // row[k * len + j] = row[j] * P(k, zc); descending k keeps row[..len] intact
            for k in (0..xs).rev() {
                let p = self.base.prob(k, zc);
                for j in 0..len {
                    row[k * len + j] = row[j] * p;
                }
            }
            len *= xs;
        }
    }

    fn entropy_rate(&self) -> f64 {
        self.stats().h_cond
    }

    /// Groups side-information tuples by type class, so the cost scales with
    /// the number of types rather than `|Z|^n`.
    fn conditional_profiles(&self) -> Result<Vec<ConditionalProfile>> {
        let xs = self.base.x_size();
        let zs = self.base.z_size();
        self.x_tuples()
            .ok_or_else(|| Error::SizeLimit(format!("|X|^{} overflows", self.n)))?;
        let pz = self.base.z_marginal();
        let live: Vec<usize> = (0..zs).filter(|&z| pz[z] > 0.0).collect();
        let cond: Vec<Vec<f64>> = live
            .iter()
            .map(|&z| (0..xs).map(|x| self.base.prob(x, z) / pz[z]).collect())
            .collect();

        // per z symbol and count c: the type-class groups of x over c coordinates
        let symbol_groups = |zi: usize, c: usize| -> Result<Vec<(f64, f64, u64)>> {
            let mut out = Vec::new();
            let mut err = None;
            for_each_composition(c, xs, &mut |t| {
                let Some(count) = multinomial(t).and_then(|m| u64::try_from(m).ok()) else {
                    err = Some(Error::SizeLimit("type class size overflows".into()));
                    return;
                };
                let mut mass = 1.0;
                let mut info = 0.0;
                for (x, &k) in t.iter().enumerate() {
                    if k > 0 {
                        let q = cond[zi][x];
                        mass *= q.powi(k as i32);
                        info += if q > 0.0 { k as f64 * -q.ln() } else { f64::INFINITY };
                    }
                }
                out.push((mass, info, count));
            });
            match err {
                Some(e) => Err(e),
                None => Ok(out),
            }
        };

        let mut profiles = Vec::new();
        let mut err = None;
        for_each_composition(self.n, live.len(), &mut |counts| {
            if err.is_some() {
                return;
            }
            let Some(types) = multinomial(counts) else {
                err = Some(Error::SizeLimit("side-information type count overflows".into()));
                return;
            };
            let weight = live
                .iter()
                .zip(counts)
                .fold(types as f64, |acc, (&z, &c)| acc * pz[z].powi(c as i32));
            let mut groups = vec![(1.0f64, 0.0f64, 1u64)];
            for (zi, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let opts = match symbol_groups(zi, c) {
                    Ok(o) => o,
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                };
                let mut next = Vec::with_capacity(groups.len() * opts.len());
                for &(m0, i0, c0) in &groups {
                    for &(m1, i1, c1) in &opts {
                        let Some(cnt) = c0.checked_mul(c1) else {
                            err = Some(Error::SizeLimit("group size overflows".into()));
                            return;
                        };
                        next.push((m0 * m1, i0 + i1, cnt));
                    }
                }
                groups = next;
            }
            profiles.push(ConditionalProfile::new(weight, groups.into_iter()));
        });
        match err {
            Some(e) => Err(e),
            None => Ok(profiles),
        }
    }
}

/// An arbitrary joint distribution over tuples, stored explicitly. Used for
/// checks that do not rely on the i.i.d. structure.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleJoint {
    n: usize,
    pmf: JointPmf,
}

impl TupleJoint {
    /// `pmf` is indexed by `(x^n index, z^n index)`; `n` labels the block length.
    pub fn new(n: usize, pmf: JointPmf) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("block length must be positive".into()));
        }
        Ok(Self { n, pmf })
    }

    /// Materializes an enumerable product source.
    pub fn from_product(source: &ProductSource) -> Result<Self> {
        let (xc, zc) = source.dims()?;
        let mut probs = vec![0.0; xc * zc];
        for (z, row) in probs.chunks_mut(xc).enumerate() {
            source.fill_row(z, row);
        }
        Ok(Self {
            n: source.n(),
            pmf: JointPmf::from_dense(xc, zc, probs)?,
        })
    }

    pub fn pmf(&self) -> &JointPmf {
        &self.pmf
    }
}

impl TupleSource for TupleJoint {
    fn block_len(&self) -> usize {
        self.n
    }

    fn dims(&self) -> Result<(usize, usize)> {
        Ok((self.pmf.x_size(), self.pmf.z_size()))
    }

    fn fill_row(&self, z: usize, row: &mut [f64]) {
        let xs = self.pmf.x_size();
        row.copy_from_slice(&self.pmf.as_slice()[xs * z..xs * (z + 1)]);
    }

    fn entropy_rate(&self) -> f64 {
        self.pmf.info_stats().h_cond / self.n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(p: f64, n: usize) -> ProductSource {
        ProductSource::new(JointPmf::bsc(p).unwrap(), n).unwrap()
    }

    #[test]
    fn info_density_examples() {
        let s = bsc(0.1, 3);
        let w = s.info_density(&[0, 1, 1], &[0, 1, 1]).unwrap().w;
        assert!((w - 3.0 * (10.0f64 / 9.0).ln()).abs() < 1e-14);
        assert!((w - 0.316081).abs() < 1e-6);

        let s = bsc(0.1, 2);
        let w = s.info_density(&[0, 1], &[0, 0]).unwrap().w;
        assert!((w - ((10.0f64 / 9.0).ln() + 10f64.ln())).abs() < 1e-14);
        assert!((w - 2.407946).abs() < 1e-6);

        let s = ProductSource::new(JointPmf::independent(2).unwrap(), 5).unwrap();
        let w = s.info_density(&[1, 0, 1, 1, 0], &[0, 0, 1, 0, 1]).unwrap().w;
        assert!((w - 5.0 * 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn info_density_edge_cases() {
        let det = ProductSource::new(JointPmf::deterministic(2).unwrap(), 2).unwrap();
        assert_eq!(det.info_density(&[0, 1], &[1, 1]).unwrap().w, f64::INFINITY);

        let base = JointPmf::new(&[vec![0.5, 0.0], vec![0.5, 0.0]]).unwrap();
        let s = ProductSource::new(base, 2).unwrap();
        assert_eq!(
            s.info_density(&[0, 0], &[0, 1]),
            Err(Error::ZeroSideInformation { coord: 1, symbol: 1 })
        );
        assert!(s.info_density(&[0], &[0]).is_err());
    }

    #[test]
    fn info_density_is_additive() {
        let s3 = bsc(0.2, 3);
        let s2 = bsc(0.2, 2);
        let s1 = bsc(0.2, 1);
        let w = s3.info_density(&[0, 1, 1], &[1, 1, 0]).unwrap().w;
        let w2 = s2.info_density(&[0, 1], &[1, 1]).unwrap().w;
        let w1 = s1.info_density(&[1], &[0]).unwrap().w;
        assert!((w - (w2 + w1)).abs() < 1e-14);
    }

    #[test]
    fn rows_match_tuple_products() {
        let base = JointPmf::new(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]]).unwrap();
        let s = ProductSource::new(base, 3).unwrap();
        let (xc, zc) = s.dims().unwrap();
        assert_eq!((xc, zc), (8, 27));
        let mut row = vec![0.0; xc];
        let mut total = 0.0;
        for z in 0..zc {
            s.fill_row(z, &mut row);
            let zt = tuple::decode(z as u64, 3, 3);
            for x in 0..xc {
                let xt = tuple::decode(x as u64, 2, 3);
                assert_eq!(row[x], s.prob(&xt, &zt));
            }
            total += row.iter().sum::<f64>();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_w_scale_with_n() {
        let base = JointPmf::new(&[vec![0.3, 0.1], vec![0.05, 0.25], vec![0.2, 0.1]]).unwrap();
        let st = base.info_stats();
        for n in 1..=3 {
            let s = ProductSource::new(base.clone(), n).unwrap();
            let (xc, zc) = s.dims().unwrap();
            let (mut m1, mut m2) = (0.0, 0.0);
            for z in 0..zc {
                let zt = tuple::decode(z as u64, 2, n);
                for x in 0..xc {
                    let xt = tuple::decode(x as u64, 3, n);
                    let p = s.prob(&xt, &zt);
                    if p > 0.0 {
                        let w = s.info_density(&xt, &zt).unwrap().w;
                        m1 += p * w;
                        m2 += p * w * w;
                    }
                }
            }
            let var = m2 - m1 * m1;
            assert!((m1 - n as f64 * st.h_cond).abs() < 1e-12, "n={n}");
            assert!((var - n as f64 * st.sigma2).abs() < 1e-11, "n={n}");
        }
    }

    #[test]
    fn threshold_refuses_enumeration() {
        let s = ProductSource::with_threshold(JointPmf::bsc(0.1).unwrap(), 5, 1023).unwrap();
        assert!(matches!(s.dims(), Err(Error::ThresholdExceeded { cells: 1024, .. })));
        let s = ProductSource::with_threshold(JointPmf::bsc(0.1).unwrap(), 5, 1024).unwrap();
        assert_eq!(s.dims().unwrap(), (32, 32));
        let big = bsc(0.1, 200);
        assert!(big.dims().is_err());
        // single tuples remain exact regardless of n
        let x = vec![0; 200];
        assert!((big.prob(&x, &x) - 0.45f64.powi(200)).abs() <= 1e-12 * 0.45f64.powi(200));
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = bsc(0.1, 4);
        assert_eq!(s.sample(7, 3).unwrap(), s.sample(7, 3).unwrap());
        assert_ne!(s.sample(7, 3).unwrap(), s.sample(8, 3).unwrap());
        assert!(s.sample(7, 0).is_err());

        let point = JointPmf::new(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let s = ProductSource::new(point, 3).unwrap();
        for (x, z) in s.sample(1, 50).unwrap() {
            assert_eq!(x, vec![1, 1, 1]);
            assert_eq!(z, vec![0, 0, 0]);
        }
    }

    #[test]
    fn sampled_disagreement_rate() {
        let s = bsc(0.1, 1);
        let draws = s.sample(2024, 1_000_000).unwrap();
        let flips = draws.iter().filter(|(x, z)| x[0] != z[0]).count();
        let rate = flips as f64 / draws.len() as f64;
        assert!((rate - 0.1).abs() < 1e-3, "rate {rate}");
    }

    #[test]
    fn sampled_cells_pass_chi_square() {
        let base = JointPmf::new(&[vec![0.1, 0.2, 0.05], vec![0.3, 0.15, 0.2]]).unwrap();
        let s = ProductSource::new(base.clone(), 1).unwrap();
        let total = 1_000_000u64;
        let mut counts = [0u64; 6];
        s.sample_indices(99, total, |x, z| counts[(x + 2 * z) as usize] += 1);
        let chi2: f64 = counts
            .iter()
            .zip(base.as_slice())
            .map(|(&c, &p)| {
                let e = p * total as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 5 degrees of freedom; 99.9% quantile is 20.5
        assert!(chi2 < 20.5, "chi2 {chi2}");
    }

    #[test]
    fn tuple_joint_matches_product() {
        let s = bsc(0.25, 2);
        let t = TupleJoint::from_product(&s).unwrap();
        assert_eq!(t.dims().unwrap(), (4, 4));
        assert!((t.entropy_rate() - s.entropy_rate()).abs() < 1e-14);
    }
}
