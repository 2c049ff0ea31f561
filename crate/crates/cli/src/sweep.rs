//! Grid sweeps over `(n, M, seed)` with CSV output and a run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use skaudit_core::bounds::{delta_exact, partition_report, thm2_rhs};
use skaudit_core::codes::{
    error_probability, estimate_error, map_decoder, repair_decoder, CodePair, EncoderMap, ErrorMode,
};
use skaudit_core::metrics::{key_eve_joint, SecurityReport};
use skaudit_core::Error;

use crate::audit::{sources, Audited, BOUNDS_HEADER};
use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, CliResult};

pub const SECURITY_HEADER: &str =
    "n,M,seed,eps,delta,D_nats,D_over_n,D_over_sqrt_n,b_n,distinguish";
pub const DELTA_HEADER: &str = "n,delta,best_M";
pub const CURVE_HEADER: &str = "n,M,d";

/// Marker written in place of values when `n` is too large to enumerate.
pub const SKIPPED: &str = "skipped=threshold";

#[derive(Debug, Clone, PartialEq)]
pub struct SecurityRow {
    pub n: usize,
    pub m: u64,
    pub seed: u64,
    /// `None` when the grid point exceeds the enumeration threshold.
    pub values: Option<(f64, SecurityReport)>,
}

#[derive(Debug, Default)]
pub struct SweepOutput {
    pub security: Vec<SecurityRow>,
    pub delta: String,
    pub curve: String,
    pub bounds: String,
}

fn too_large(e: &Error) -> bool {
    matches!(e, Error::ThresholdExceeded { .. } | Error::SizeLimit(_))
}

fn evaluate(source: &Audited, m: u64, seed: u64, cfg: &ExperimentConfig) -> CliResult<Option<(f64, SecurityReport)>> {
    let n = source.n();
    let domain = source.domain().ok_or_else(|| Error::SizeLimit(format!("|X|^{n}")))?;
    let s = source.as_dyn();
    let run = || -> skaudit_core::Result<(f64, SecurityReport)> {
        let f = EncoderMap::random_binning(n, domain, m, seed)?;
        let dec = map_decoder(s, &f)?;
        let code = repair_decoder(&CodePair::new(f, dec)?)?;
        let eps = match (cfg.mode, source.product()) {
            (Mode::MonteCarlo, Some(p)) => {
                estimate_error(p, &code, ErrorMode::MonteCarlo { seed, trials: cfg.trials as u64 })?.eps
            }
            _ => error_probability(s, &code)?,
        };
        let kj = key_eve_joint(s, &code.encoder)?;
        Ok((eps, SecurityReport::from_key_eve(&kj, s.entropy_rate())))
    };
    match run() {
        Ok(v) => Ok(Some(v)),
        Err(e) if too_large(&e) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> CliResult<SweepOutput> {
    if cfg.mode == Mode::MonteCarlo && cfg.tuple_n.is_some() {
        return Err(CliError::Config("mode = mc needs an i.i.d. source".into()));
    }
    let srcs = sources(cfg)?;
    let mut jobs = Vec::new();
    for (i, s) in srcs.iter().enumerate() {
        let domain = s.domain().unwrap_or(u64::MAX);
        for m in cfg.rate.ms(s.n(), s.as_dyn().entropy_rate(), domain) {
            for &seed in &cfg.seeds {
                jobs.push((i, m, seed));
            }
        }
    }
    let security = jobs
        .par_iter()
        .map(|&(i, m, seed)| {
            Ok(SecurityRow {
                n: srcs[i].n(),
                m,
                seed,
                values: evaluate(&srcs[i], m, seed, cfg)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut out = SweepOutput {
        security,
        delta: format!("{DELTA_HEADER}\n"),
        curve: format!("{CURVE_HEADER}\n"),
        bounds: format!("{BOUNDS_HEADER}\n"),
    };
    for s in &srcs {
        let n = s.n();
        let d = match delta_exact(s.as_dyn(), None) {
            Ok(d) => d,
            Err(e) if too_large(&e) => {
                writeln!(out.delta, "{n},{SKIPPED},").unwrap();
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        writeln!(out.delta, "{n},{},{}", d.delta, d.best_m).unwrap();
        for (m, v) in &d.curve {
            writeln!(out.curve, "{n},{m},{v}").unwrap();
        }
        let Some(p) = s.product() else { continue };
        let sigma = p.stats().sigma();
        for &b in &cfg.b {
            let r = partition_report(p, d.best_m, b, cfg.c1)?;
            writeln!(
                out.bounds,
                "{n},{b},{sigma},{},{},{},{},{},{},{},{},{}",
                thm2_rhs(b, sigma),
                d.best_m,
                r.p_c_aplus,
                r.p_aminus_cbar,
                r.p_a0,
                r.bound_exp,
                r.bound_a0,
                r.lower_bound(),
                d.delta
            )
            .unwrap();
        }
    }
    Ok(out)
}

pub fn security_csv(rows: &[SecurityRow]) -> String {
    let mut out = format!("{SECURITY_HEADER}\n");
    for r in rows {
        match &r.values {
            Some((eps, s)) => writeln!(
                out,
                "{},{},{},{eps},{},{},{},{},{},{}",
                r.n,
                r.m,
                r.seed,
                s.delta_metric,
                s.divergence,
                s.normalized,
                s.root_scaled,
                s.second_order_rate,
                s.distinguish_prob
            ),
            None => writeln!(out, "{},{},{},{SKIPPED},,,,,,", r.n, r.m, r.seed),
        }
        .unwrap();
    }
    out
}

/// Least-squares slope `K` of median `D` against `sqrt(n)` through the origin.
pub fn fitted_k(rows: &[SecurityRow]) -> Option<f64> {
    let mut by_n: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for r in rows {
        if let Some((_, s)) = &r.values {
            by_n.entry(r.n).or_default().push(s.divergence);
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (n, mut ds) in by_n {
        ds.sort_by(f64::total_cmp);
        let med = ds[ds.len() / 2];
        num += med * (n as f64).sqrt();
        den += n as f64;
    }
    (den > 0.0).then(|| num / den)
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes the CSVs and `manifest.txt` into `cfg.out`; returns the written paths.
pub fn write_outputs(cfg: &ExperimentConfig, out: &SweepOutput) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let files = [
        ("security.csv", security_csv(&out.security)),
        ("delta.csv", out.delta.clone()),
        ("delta_curve.csv", out.curve.clone()),
        ("bounds.csv", out.bounds.clone()),
    ];
    let mut manifest = String::new();
    writeln!(manifest, "tool = skaudit {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(manifest, "timestamp = {}", chrono::Utc::now().to_rfc3339()).unwrap();
    for (k, v) in cfg.echo() {
        writeln!(manifest, "config.{k} = {v}").unwrap();
    }
    if let Some(k) = fitted_k(&out.security) {
        writeln!(manifest, "fit.K = {k}").unwrap();
    }
    let mut paths = Vec::new();
    for (name, text) in &files {
        let path = cfg.out.join(name);
        write(&path, text)?;
        writeln!(manifest, "file.{name} = sha256:{}", sha256_hex(text.as_bytes())).unwrap();
        paths.push(path);
    }
    let path = cfg.out.join("manifest.txt");
    write(&path, &manifest)?;
    paths.push(path);
    Ok(paths)
}
