//! The inequality suite behind `skaudit verify`.

use std::fmt;

use rayon::prelude::*;

use skaudit_core::bounds::{
    delta_brute, delta_exact, partition_report, thm2_proof_chain, BRUTE_MAX_SIZE, EXACT_SLACK,
};
use skaudit_core::codes::{
    converse_bound, default_alpha_grid, error_probability, map_decoder, repair_decoder, CodePair,
    EncoderMap,
};
use skaudit_core::metrics::{
    brute_force_discrimination, key_eve_joint, SecurityReport, DISCRIMINATION_LIMIT,
};
use skaudit_core::source::InfoDensityLaw;

use crate::audit::{sources, Audited};
use crate::config::{ExperimentConfig, RateEntry, RatePolicy};
use crate::error::CliResult;

/// Tolerance of the trade-off, entropy-bound and divergence-chain checks.
pub const CHAIN_TOL: f64 = 1e-9;

/// Aggregated outcome of one named check. A residual is the signed margin
/// by which the checked inequality holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub tolerance: f64,
    pub cases: usize,
    pub violations: usize,
    pub worst: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            violations: 0,
            worst: f64::INFINITY,
        }
    }

    fn record(&mut self, residual: f64) {
        self.cases += 1;
        self.worst = self.worst.min(residual);
        if !(residual >= -self.tolerance) {
            self.violations += 1;
        }
    }

    fn merge(&mut self, o: &Check) {
        self.cases += o.cases;
        self.violations += o.violations;
        self.worst = self.worst.min(o.worst);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        if self.cases == 0 {
            return write!(f, "{tag} {:<22} cases=0 (not applicable)", self.name);
        }
        write!(
            f,
            "{tag} {:<22} cases={:<6} violations={:<4} worst_residual={:.3e}",
            self.name, self.cases, self.violations, self.worst
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

/// Defaults used by `verify` when no config is given.
pub fn default_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.n = (1..=6).collect();
    cfg.rate = RatePolicy::List(vec![
        RateEntry::Fixed(1),
        RateEntry::Fixed(2),
        RateEntry::Exp,
        RateEntry::Full,
    ]);
    cfg.b = vec![0.0, 0.1, 0.3, 0.5];
    cfg
}

const TRADEOFF: usize = 0;
const REPAIR: usize = 1;
const ENTROPY: usize = 2;
const CHAIN: usize = 3;
const CONVERSE: usize = 4;
const IDENTITY: usize = 5;
const PINSKER: usize = 6;
const DISTINGUISH: usize = 7;

fn code_checks() -> Vec<Check> {
    vec![
        Check::new("tradeoff", CHAIN_TOL),
        Check::new("decoder_repair", EXACT_SLACK),
        Check::new("entropy_bound", CHAIN_TOL),
        Check::new("divergence_chain", CHAIN_TOL),
        Check::new("converse", EXACT_SLACK),
        Check::new("divergence_identity", CHAIN_TOL),
        Check::new("pinsker", EXACT_SLACK),
        Check::new("distinguishability", EXACT_SLACK),
    ]
}

struct SourceContext<'a> {
    source: &'a Audited,
    delta: f64,
    law: Option<InfoDensityLaw>,
    grid: Vec<f64>,
}

fn check_code(ctx: &SourceContext, m: u64, seed: u64, b: &[f64], perturb: f64) -> skaudit_core::Result<Vec<Check>> {
    let mut checks = code_checks();
    let s = ctx.source.as_dyn();
    let n = ctx.source.n();
    let domain = ctx.source.domain().unwrap_or(u64::MAX);
    let f = EncoderMap::random_binning(n, domain, m, seed)?;
    let raw = CodePair::new(f.clone(), map_decoder(s, &f)?)?;
    let eps_raw = error_probability(s, &raw)?;
    let code = repair_decoder(&raw)?;
    let eps = error_probability(s, &code)?;
    checks[REPAIR].record(if code.is_consistent()? { eps_raw - eps } else { -1.0 });

    let kj = key_eve_joint(s, &code.encoder)?;
    let r = SecurityReport::from_key_eve(&kj, s.entropy_rate());
    checks[TRADEOFF].record(eps + r.delta_metric - (ctx.delta + perturb));
    checks[IDENTITY].record(-r.identity_residual());
    checks[PINSKER].record(r.pinsker_slack());
    if (kj.m() * kj.z_count() as u64) <= DISCRIMINATION_LIMIT {
        let p = brute_force_discrimination(&kj)?;
        checks[DISTINGUISH].record(-(p - r.distinguish_prob).abs());
    }
    if let Some(law) = &ctx.law {
        checks[CONVERSE].record(eps - converse_bound(law, m, &ctx.grid)?);
    }
    for &bv in b {
        let chain = thm2_proof_chain(s, &code.encoder, bv)?;
        for (name, v) in chain.residuals() {
            match name {
                "lemma2" => checks[ENTROPY].record(v),
                "chain" => checks[CHAIN].record(v),
                _ => {}
            }
        }
    }
    Ok(checks)
}

/// Runs every check on every `(n, M, seed)` of `cfg`. `perturb` is added to
/// `delta` in the trade-off check, for self-testing the harness.
pub fn run_verify(cfg: &ExperimentConfig, perturb: f64) -> CliResult<VerifyReport> {
    let srcs = sources(cfg)?;
    let mut checks = code_checks();
    let mut aplus = Check::new("partition_aplus", EXACT_SLACK);
    let mut aminus = Check::new("partition_aminus", EXACT_SLACK);
    let mut a0 = Check::new("partition_a0", EXACT_SLACK);
    let mut certified = Check::new("certified_delta_bound", EXACT_SLACK);
    let mut oracle = Check::new("delta_oracle", EXACT_SLACK);

    for source in &srcs {
        let s = source.as_dyn();
        let n = source.n();
        let d = delta_exact(s, None)?;
        let (xc, zc) = s.dims()?;
        if xc <= BRUTE_MAX_SIZE && zc <= BRUTE_MAX_SIZE {
            oracle.record(-(d.delta - delta_brute(s, BRUTE_MAX_SIZE)?).abs());
        }
        let (law, grid) = match source.product() {
            Some(p) => (Some(InfoDensityLaw::exact(p)?), default_alpha_grid(&p.stats(), n)),
            None => (None, Vec::new()),
        };
        if let Some(p) = source.product() {
            for &b in &cfg.b {
                let r = partition_report(p, d.best_m, b, cfg.c1)?;
                aplus.record(r.bound_exp - r.p_c_aplus);
                aminus.record(r.bound_exp - r.p_aminus_cbar);
                a0.record(if r.bound_a0.is_infinite() { 0.0 } else { r.bound_a0 - r.p_a0 });
                certified.record(d.delta - r.lower_bound());
            }
        }
        let ctx = SourceContext {
            source,
            delta: d.delta,
            law,
            grid,
        };
        let domain = source.domain().unwrap_or(u64::MAX);
        let jobs: Vec<(u64, u64)> = cfg
            .rate
            .ms(n, s.entropy_rate(), domain)
            .into_iter()
            .flat_map(|m| cfg.seeds.iter().map(move |&seed| (m, seed)))
            .collect();
        let per_code = jobs
            .par_iter()
            .map(|&(m, seed)| check_code(&ctx, m, seed, &cfg.b, perturb))
            .collect::<skaudit_core::Result<Vec<_>>>()?;
        for cs in &per_code {
            for (acc, c) in checks.iter_mut().zip(cs) {
                acc.merge(c);
            }
        }
    }
    checks.extend([aplus, aminus, a0, certified, oracle]);
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        let mut cfg = default_config();
        cfg.n = vec![1, 2, 3, 4];
        cfg.seeds = (0..5).collect();
        cfg
    }

    #[test]
    fn default_suite_passes() {
        let r = run_verify(&small(), 0.0).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.checks.iter().all(|c| c.cases > 0), "{r}");
    }

    #[test]
    fn perturbed_delta_fails_tradeoff() {
        let r = run_verify(&small(), 0.05).unwrap();
        let t = r.checks.iter().find(|c| c.name == "tradeoff").unwrap();
        assert!(!t.passed());
        assert!(!r.passed());
        assert!(r.checks.iter().filter(|c| c.name != "tradeoff").all(Check::passed));
    }

    #[test]
    fn check_display() {
        let mut c = Check::new("x", 1e-9);
        c.record(0.5);
        c.record(-1e-3);
        assert!(c.to_string().starts_with("FAIL x"));
        assert_eq!(c.violations, 1);
        assert!(Check::new("y", 0.0).to_string().contains("not applicable"));
    }
}
