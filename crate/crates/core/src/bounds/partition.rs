use std::f64::consts::PI;

use super::delta::delta_exact;
use super::EXACT_SLACK;
use crate::error::{Error, Result};
use crate::source::{ProductSource, TupleSource};

/// Berry-Esseen constant for i.i.d. sums.
pub const DEFAULT_C1: f64 = 0.4748;

/// Masses of the three regions `A+`, `A-`, `A0` under the top-`M` family, with
/// their bounds.
///
/// `A+ = {P_{X|Z} > e^{b sqrt n} / M}`, `A- = {P_{X|Z} <= e^{-b sqrt n} / M}`,
/// `A0` is the rest; membership is decided on `W = -ln P_{X|Z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionReport {
    pub n: usize,
    pub m: u64,
    pub b: f64,
    pub c1: f64,
    /// `P_C(A+)`.
    pub p_c_aplus: f64,
    /// `P(A- ∩ support of P_C)`.
    pub p_aminus_cbar: f64,
    /// `P(A0)`.
    pub p_a0: f64,
    /// `e^{-b sqrt n}`.
    pub bound_exp: f64,
    /// `2b / (sigma sqrt(2 pi)) + 2 C1 (rho/sigma)^3 / sqrt n`; infinite when `sigma = 0`.
    pub bound_a0: f64,
}

impl PartitionReport {
    /// `1 - (P_C(A+) + P(A- ∩ C) + P(A0))`.
    pub fn lower_bound(&self) -> f64 {
        1.0 - (self.p_c_aplus + self.p_aminus_cbar + self.p_a0)
    }

    pub fn aplus_holds(&self) -> bool {
        self.p_c_aplus <= self.bound_exp + EXACT_SLACK
    }

    pub fn aminus_holds(&self) -> bool {
        self.p_aminus_cbar <= self.bound_exp + EXACT_SLACK
    }

    pub fn a0_holds(&self) -> bool {
        self.p_a0 <= self.bound_a0 + EXACT_SLACK
    }

    pub fn all_hold(&self) -> bool {
        self.aplus_holds() && self.aminus_holds() && self.a0_holds()
    }
}

/// Evaluates the partition exactly through type classes.
pub fn partition_report(source: &ProductSource, m: u64, b: f64, c1: f64) -> Result<PartitionReport> {
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("b must be finite and nonnegative, got {b}")));
    }
    if m < 1 {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let n = source.n();
    let shift = b * (n as f64).sqrt();
    let ln_m = (m as f64).ln();
    let lo = ln_m - shift;
    let hi = ln_m + shift;

    let (mut c_aplus, mut aminus_c, mut a0) = (0.0, 0.0, 0.0);
    for profile in source.conditional_profiles()? {
        let w = profile.weight();
        let mut taken = 0u64;
        let mut n_aplus = 0u64;
        for g in profile.groups() {
            let in_family = g.count.min(m.saturating_sub(taken));
            taken += in_family;
            if g.info < lo {
                n_aplus += g.count;
            } else if g.info >= hi {
                aminus_c += w * in_family as f64 * g.mass;
            } else {
                a0 += w * g.count as f64 * g.mass;
            }
        }
        c_aplus += w * n_aplus.min(m) as f64 / m as f64;
    }

    let stats = source.stats();
    let bound_a0 = if stats.sigma2 == 0.0 {
        f64::INFINITY
    } else {
        2.0 * b / (stats.sigma() * (2.0 * PI).sqrt()) + 2.0 * stats.berry_esseen_term(c1, n)
    };
    Ok(PartitionReport {
        n,
        m,
        b,
        c1,
        p_c_aplus: c_aplus,
        p_aminus_cbar: aminus_c,
        p_a0: a0,
        bound_exp: (-shift).exp(),
        bound_a0,
    })
}

/// The certified lower bound on `delta` at the `delta`-minimizing `M`.
pub fn thm4_lower_bound(source: &ProductSource, b: f64, c1: f64) -> Result<f64> {
    let best = delta_exact(source, None)?;
    Ok(partition_report(source, best.best_m, b, c1)?.lower_bound())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{JointPmf, TupleJoint};

    fn bsc(p: f64, n: usize) -> ProductSource {
        ProductSource::new(JointPmf::bsc(p).unwrap(), n).unwrap()
    }

    /// Region masses by walking every cell of the explicit joint.
    fn partition_by_cells(s: &ProductSource, m: u64, b: f64) -> (f64, f64, f64) {
        let t = TupleJoint::from_product(s).unwrap();
        let (xc, zc) = t.dims().unwrap();
        let shift = b * (s.n() as f64).sqrt();
        let (lo, hi) = ((m as f64).ln() - shift, (m as f64).ln() + shift);
        let mut row = vec![0.0; xc];
        let (mut cp, mut ac, mut a0) = (0.0, 0.0, 0.0);
        for z in 0..zc {
            t.fill_row(z, &mut row);
            let pz: f64 = row.iter().sum();
            let mut order: Vec<usize> = (0..xc).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
            for (rank, &x) in order.iter().enumerate() {
                let p = row[x];
                let w = -(p / pz).ln();
                let fam = (rank as u64) < m;
                if w < lo - 1e-9 {
                    if fam {
                        cp += pz / m as f64;
                    }
                } else if w >= hi + 1e-9 {
                    if fam {
                        ac += p;
                    }
                } else if w >= lo + 1e-9 && w < hi - 1e-9 {
                    a0 += p;
                }
            }
        }
        (cp, ac, a0)
    }

    #[test]
    fn matches_cell_enumeration() {
        let s = bsc(0.2, 6);
        for m in [1, 3, 7, 20, 64] {
            for b in [0.1, 0.3] {
                let r = partition_report(&s, m, b, DEFAULT_C1).unwrap();
                let (cp, ac, a0) = partition_by_cells(&s, m, b);
                assert!((r.p_c_aplus - cp).abs() < 1e-12, "m={m} b={b}");
                assert!((r.p_aminus_cbar - ac).abs() < 1e-12, "m={m} b={b}");
                assert!((r.p_a0 - a0).abs() < 1e-12, "m={m} b={b}");
            }
        }
    }

    #[test]
    fn partition_examples() {
        let s = bsc(0.1, 9);
        let m = (9.0 * s.stats().h_cond).exp().ceil() as u64;
        let r = partition_report(&s, m, 0.3, DEFAULT_C1).unwrap();
        assert!(r.all_hold(), "{r:?}");

        let r = partition_report(&s, m, 50.0, DEFAULT_C1).unwrap();
        assert!(r.p_a0 > 1.0 - 1e-12);
        assert!(r.p_c_aplus < 1e-12 && r.p_aminus_cbar < 1e-12);
        assert!(r.all_hold());

        assert!(partition_report(&s, m, -0.1, DEFAULT_C1).is_err());
        assert!(partition_report(&s, 0, 0.1, DEFAULT_C1).is_err());
    }

    #[test]
    fn constant_density_puts_everything_in_a0() {
        let s = ProductSource::new(JointPmf::independent(2).unwrap(), 5).unwrap();
        let r = partition_report(&s, 32, 0.2, DEFAULT_C1).unwrap();
        assert!((r.p_a0 - 1.0).abs() < 1e-12);
        assert_eq!(r.bound_a0, f64::INFINITY);
        assert!(r.all_hold());
        let lb = thm4_lower_bound(&s, 0.2, DEFAULT_C1).unwrap();
        assert!(lb <= 1e-12);
    }

    #[test]
    fn lower_bound_never_exceeds_delta() {
        for p in [0.1, 0.2] {
            for n in 1..=10 {
                let s = bsc(p, n);
                let d = delta_exact(&s, None).unwrap().delta;
                for b in [0.0, 0.1, 0.3, 0.5, 1.0] {
                    let lb = thm4_lower_bound(&s, b, DEFAULT_C1).unwrap();
                    assert!(lb <= d + EXACT_SLACK, "p={p} n={n} b={b}: {lb} > {d}");
                }
            }
        }
    }

    #[test]
    fn bounds_hold_on_a_grid() {
        for p in [0.1, 0.2, 0.35] {
            for n in [4, 9, 12] {
                let s = bsc(p, n);
                for m in [1, 2, 10, (n as f64 * s.stats().h_cond).exp().ceil() as u64, 1 << n] {
                    for b in [0.0, 0.1, 0.3, 0.5] {
                        let r = partition_report(&s, m, b, DEFAULT_C1).unwrap();
                        assert!(r.all_hold(), "p={p} n={n} m={m} b={b}: {r:?}");
                    }
                }
            }
        }
    }
}
