use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::source::{ConditionalProfile, TupleSource};

/// Most `M` values [`delta_exact`] will evaluate.
pub const DELTA_M_LIMIT: u64 = 1 << 24;

/// Joint sizes [`delta_brute`] accepts by default.
pub const BRUTE_MAX_SIZE: usize = 4;

/// Distance from a joint to its nearest flat-per-z family.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaResult {
    pub delta: f64,
    pub best_m: u64,
    /// `(M, d(P, P_C))` for the optimal family at each evaluated `M`.
    pub curve: Vec<(u64, f64)>,
}

/// `d(P, P_C)` for the top-`m` family, from precomputed profiles.
pub fn flat_family_distance(profiles: &[ConditionalProfile], m: u64) -> f64 {
    0.5 * profiles
        .iter()
        .map(|p| p.weight() * p.flat_distance(m))
        .sum::<f64>()
}

/// Smallest `M` attaining the minimum in `curve`.
fn argmin(curve: &[(u64, f64)]) -> (u64, f64) {
    curve
        .iter()
        .copied()
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
}

/// Exact `delta(P_{X^n Z^n})`: for every `M` the best family keeps the `M`
/// largest conditional masses of each `z^n`.
pub fn delta_exact<S: TupleSource + ?Sized>(
    source: &S,
    m_range: Option<RangeInclusive<u64>>,
) -> Result<DeltaResult> {
    let profiles = source.conditional_profiles()?;
    let k = profiles
        .first()
        .map(ConditionalProfile::total_count)
        .ok_or_else(|| Error::InvalidParameter("source has no mass".into()))?;
    let range = m_range.unwrap_or(1..=k);
    let (lo, hi) = (*range.start(), (*range.end()).min(k));
    if lo < 1 || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "M range {lo}..={} is empty within 1..={k}",
            range.end()
        )));
    }
    if hi - lo + 1 > DELTA_M_LIMIT {
        return Err(Error::SizeLimit(format!(
            "{} values of M exceed the limit of {DELTA_M_LIMIT}",
            hi - lo + 1
        )));
    }
    let curve: Vec<(u64, f64)> = (lo..=hi)
        .into_par_iter()
        .map(|m| (m, flat_family_distance(&profiles, m).clamp(0.0, 1.0)))
        .collect();
    let (best_m, delta) = argmin(&curve);
    Ok(DeltaResult {
        delta,
        best_m,
        curve,
    })
}

/// Calls `f` with every `m`-subset of `0..k` as a bitmask.
fn for_each_subset(k: usize, m: usize, f: &mut impl FnMut(u32)) {
    for mask in 0u32..1 << k {
        if mask.count_ones() as usize == m {
            f(mask);
        }
    }
}

/// `delta` by enumeration of every family `{C_z}` with `|C_z| = M`, for every `M`.
/// Independent of the top-`M` argument used by [`delta_exact`].
pub fn delta_brute<S: TupleSource + ?Sized>(source: &S, max_size: usize) -> Result<f64> {
    let (xc, zc) = source.dims()?;
    if xc > max_size || zc > max_size || max_size > BRUTE_MAX_SIZE {
        return Err(Error::SizeLimit(format!(
            "brute force needs |X^n|, |Z^n| <= {} (got {xc} x {zc})",
            max_size.min(BRUTE_MAX_SIZE)
        )));
    }
    let mut joint = vec![0.0; xc * zc];
    for (z, row) in joint.chunks_mut(xc).enumerate() {
        source.fill_row(z, row);
    }
    let pz: Vec<f64> = joint.chunks(xc).map(|r| r.iter().sum()).collect();

    let mut best = f64::INFINITY;
    for m in 1..=xc {
        let mut subsets = Vec::new();
        for_each_subset(xc, m, &mut |s| subsets.push(s));
        // odometer over one subset per z
        let mut pick = vec![0usize; zc];
        loop {
            let mut d = 0.0;
            for z in 0..zc {
                let q = pz[z] / m as f64;
                for x in 0..xc {
                    let fam = if subsets[pick[z]] >> x & 1 == 1 { q } else { 0.0 };
                    d += (joint[x + xc * z] - fam).abs();
                }
            }
            best = best.min(0.5 * d);
            let mut i = 0;
            while i < zc {
                pick[i] += 1;
                if pick[i] < subsets.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == zc {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{JointPmf, ProductSource, TupleJoint};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn product(pmf: JointPmf, n: usize) -> ProductSource {
        ProductSource::new(pmf, n).unwrap()
    }

    fn random_pmf(rng: &mut ChaCha8Rng, xs: usize, zs: usize) -> JointPmf {
        let raw: Vec<f64> = (0..xs * zs)
            .map(|_| if rng.random::<f64>() < 0.15 { 0.0 } else { rng.random::<f64>() })
            .collect();
        let sum: f64 = raw.iter().sum();
        JointPmf::from_dense(xs, zs, raw.iter().map(|v| v / sum).collect()).unwrap()
    }

    #[test]
    fn delta_examples() {
        let r = delta_exact(&product(JointPmf::bsc(0.1).unwrap(), 1), None).unwrap();
        assert!((r.delta - 0.1).abs() < 1e-15);
        assert_eq!(r.best_m, 1);
        let r = delta_exact(&product(JointPmf::bsc(0.1).unwrap(), 2), None).unwrap();
        assert!((r.delta - 0.19).abs() < 1e-15);
        let r = delta_exact(&product(JointPmf::bsc(0.1).unwrap(), 3), None).unwrap();
        assert!((r.delta - 0.271).abs() < 1e-15);

        let r = delta_exact(&product(JointPmf::independent(2).unwrap(), 3), None).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.best_m, 8);
        assert_eq!(r.curve.len(), 8);
    }

    #[test]
    fn brute_examples() {
        let s = product(JointPmf::bsc(0.1).unwrap(), 1);
        assert!((delta_brute(&s, 4).unwrap() - 0.1).abs() < 1e-15);

        let s = product(JointPmf::bsc(0.4).unwrap(), 1);
        assert!((delta_brute(&s, 4).unwrap() - 0.1).abs() < 1e-15);
        let r = delta_exact(&s, None).unwrap();
        assert_eq!(r.best_m, 2);
        assert!((r.curve[0].1 - 0.4).abs() < 1e-15);

        let s = product(JointPmf::independent(2).unwrap(), 1);
        assert_eq!(delta_brute(&s, 4).unwrap(), 0.0);

        let s = product(JointPmf::bsc(0.1).unwrap(), 3);
        assert!(delta_brute(&s, 4).is_err());
    }

    #[test]
    fn exact_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let shapes = [(2, 2, 1), (2, 2, 2), (3, 2, 1), (2, 4, 1), (4, 4, 1), (4, 3, 1), (3, 3, 1)];
        for i in 0..70 {
            let (xs, zs, n) = shapes[i % shapes.len()];
            let s = product(random_pmf(&mut rng, xs, zs), n);
            let e = delta_exact(&s, None).unwrap().delta;
            let b = delta_brute(&s, 4).unwrap();
            assert!((e - b).abs() <= 1e-12, "case {i}: {e} vs {b}");
        }
        for p in [0.05, 0.1, 0.25, 0.5] {
            let s = product(JointPmf::bsc(p).unwrap(), 2);
            let e = delta_exact(&s, None).unwrap().delta;
            assert!((e - delta_brute(&s, 4).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn product_profiles_match_explicit_joint() {
        let base = JointPmf::new(&[vec![0.3, 0.1], vec![0.05, 0.25], vec![0.2, 0.1]]).unwrap();
        let s = product(base, 4);
        let t = TupleJoint::from_product(&s).unwrap();
        let a = delta_exact(&s, None).unwrap();
        let b = delta_exact(&t, None).unwrap();
        assert_eq!(a.best_m, b.best_m);
        for (x, y) in a.curve.iter().zip(&b.curve) {
            assert!((x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn relabeling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let pmf = random_pmf(&mut rng, 3, 3);
            let rows: Vec<Vec<f64>> = (0..3).map(|x| (0..3).map(|z| pmf.prob(x, z)).collect()).collect();
            let perm_x = [2, 0, 1];
            let perm_z = [1, 2, 0];
            let permuted: Vec<Vec<f64>> = (0..3)
                .map(|x| (0..3).map(|z| rows[perm_x[x]][perm_z[z]]).collect())
                .collect();
            let a = delta_exact(&product(pmf, 3), None).unwrap().delta;
            let b = delta_exact(&product(JointPmf::new(&permuted).unwrap(), 3), None).unwrap().delta;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn m_range_restricts_curve() {
        let s = product(JointPmf::bsc(0.2).unwrap(), 4);
        let r = delta_exact(&s, Some(3..=5)).unwrap();
        assert_eq!(r.curve.iter().map(|c| c.0).collect::<Vec<_>>(), vec![3, 4, 5]);
        assert!(r.curve.iter().all(|c| c.1 >= r.delta));
        assert!(delta_exact(&s, Some(0..=5)).is_err());
        assert!(delta_exact(&s, Some(20..=30)).is_err());
    }
}
