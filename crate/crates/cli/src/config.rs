//! Experiment configuration: a flat `key = value` file plus flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use skaudit_core::bounds::DEFAULT_C1;
use skaudit_core::codes::rate_to_m;
use skaudit_core::source::DEFAULT_MATERIALIZE_THRESHOLD;

use crate::error::{CliError, CliResult};

/// How many key symbols a code gets at block length `n`.
#[derive(Debug, Clone, PartialEq)]
pub enum RatePolicy {
    Fixed(u64),
    /// `M = ceil(e^{n (H + margin)})`.
    Margin(f64),
    List(Vec<RateEntry>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateEntry {
    Fixed(u64),
    /// `ceil(e^{nH})`.
    Exp,
    /// `|X|^n`.
    Full,
}

impl RatePolicy {
    /// Distinct `M` values for block length `n`, clamped to `1..=domain`.
    pub fn ms(&self, n: usize, h: f64, domain: u64) -> Vec<u64> {
        let entry = |e: &RateEntry| match e {
            RateEntry::Fixed(m) => *m,
            RateEntry::Exp => rate_to_m(n, h, 0.0),
            RateEntry::Full => domain,
        };
        let mut ms: Vec<u64> = match self {
            Self::Fixed(m) => vec![*m],
            Self::Margin(x) => vec![rate_to_m(n, h, *x)],
            Self::List(es) => es.iter().map(entry).collect(),
        };
        for m in &mut ms {
            *m = (*m).clamp(1, domain.max(1));
        }
        ms.sort_unstable();
        ms.dedup();
        ms
    }
}

impl fmt::Display for RatePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(m) => write!(f, "fixed:{m}"),
            Self::Margin(x) => write!(f, "margin:{x}"),
            Self::List(es) => {
                let parts: Vec<String> = es
                    .iter()
                    .map(|e| match e {
                        RateEntry::Fixed(m) => m.to_string(),
                        RateEntry::Exp => "exp".into(),
                        RateEntry::Full => "full".into(),
                    })
                    .collect();
                write!(f, "list:{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Preset (`bsc:p`, `indep:k`, `det:k`) or matrix file path.
    pub source: String,
    /// When set, the source matrix is an explicit joint over tuples of this length.
    pub tuple_n: Option<usize>,
    pub n: Vec<usize>,
    pub rate: RatePolicy,
    pub seeds: Vec<u64>,
    pub b: Vec<f64>,
    pub mode: Mode,
    pub trials: usize,
    pub out: PathBuf,
    pub threshold: u64,
    pub c1: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: "bsc:0.1".into(),
            tuple_n: None,
            n: (1..=8).collect(),
            rate: RatePolicy::List(vec![RateEntry::Exp]),
            seeds: (0..20).collect(),
            b: vec![0.0, 0.3],
            mode: Mode::Exact,
            trials: 100_000,
            out: PathBuf::from("skaudit-out"),
            threshold: DEFAULT_MATERIALIZE_THRESHOLD,
            c1: DEFAULT_C1,
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key} = {value}: {why}"))
}

/// `a..b` (inclusive), `a,b,c`, or a single value.
pub fn parse_range(key: &str, value: &str) -> CliResult<Vec<u64>> {
    let one = |s: &str| s.trim().parse::<u64>().map_err(|_| bad(key, value, "not an integer"));
    let out: Vec<u64> = if let Some((a, b)) = value.split_once("..") {
        let (a, b) = (one(a)?, one(b)?);
        if a > b {
            return Err(bad(key, value, "empty range"));
        }
        (a..=b).collect()
    } else {
        value.split(',').map(one).collect::<CliResult<_>>()?
    };
    Ok(out)
}

fn parse_usize_range(key: &str, value: &str) -> CliResult<Vec<usize>> {
    Ok(parse_range(key, value)?.into_iter().map(|v| v as usize).collect())
}

fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    let v: f64 = value.trim().parse().map_err(|_| bad(key, value, "not a number"))?;
    if !v.is_finite() {
        return Err(bad(key, value, "not finite"));
    }
    Ok(v)
}

pub fn parse_rate(value: &str) -> CliResult<RatePolicy> {
    let key = "rate";
    let (kind, arg) = value
        .split_once(':')
        .ok_or_else(|| bad(key, value, "expected fixed:M, margin:x or list:..."))?;
    match kind.trim() {
        "fixed" => {
            let m: u64 = arg.trim().parse().map_err(|_| bad(key, value, "M is not an integer"))?;
            if m < 1 {
                return Err(bad(key, value, "M must be at least 1"));
            }
            Ok(RatePolicy::Fixed(m))
        }
        "margin" => Ok(RatePolicy::Margin(parse_f64(key, arg)?)),
        "list" => {
            let entries = arg
                .split(',')
                .map(|e| match e.trim() {
                    "exp" => Ok(RateEntry::Exp),
                    "full" => Ok(RateEntry::Full),
                    s => match s.parse::<u64>() {
                        Ok(m) if m >= 1 => Ok(RateEntry::Fixed(m)),
                        _ => Err(bad(key, value, "list entries are M >= 1, exp or full")),
                    },
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(RatePolicy::List(entries))
        }
        _ => Err(bad(key, value, "unknown rate policy")),
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key {
            "source" => self.source = value.to_string(),
            "tuple_n" => {
                let v: usize = value.parse().map_err(|_| bad(key, value, "not an integer"))?;
                if v == 0 {
                    return Err(bad(key, value, "must be positive"));
                }
                self.tuple_n = Some(v);
            }
            "n" => {
                let n = parse_usize_range(key, value)?;
                if n.contains(&0) {
                    return Err(bad(key, value, "block length must be positive"));
                }
                self.n = n;
            }
            "rate" => self.rate = parse_rate(value)?,
            "seeds" => self.seeds = parse_range(key, value)?,
            "b" => {
                let b = value
                    .split(',')
                    .map(|v| parse_f64(key, v))
                    .collect::<CliResult<Vec<_>>>()?;
                if b.iter().any(|&v| v < 0.0) {
                    return Err(bad(key, value, "b must be nonnegative"));
                }
                self.b = b;
            }
            "mode" => {
                self.mode = match value {
                    "exact" => Mode::Exact,
                    "mc" => Mode::MonteCarlo,
                    _ => return Err(bad(key, value, "expected exact or mc")),
                }
            }
            "trials" => {
                let t: usize = value.parse().map_err(|_| bad(key, value, "not an integer"))?;
                if t < 1 {
                    return Err(bad(key, value, "trials must be at least 1"));
                }
                self.trials = t;
            }
            "out" => self.out = PathBuf::from(value),
            "threshold" => {
                self.threshold = value.parse().map_err(|_| bad(key, value, "not an integer"))?
            }
            "c1" => {
                let c = parse_f64(key, value)?;
                if c <= 0.0 {
                    return Err(bad(key, value, "must be positive"));
                }
                self.c1 = c;
            }
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses config text; `#` starts a comment.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Config file (if any) with `key=value` overrides applied on top.
    pub fn resolve(path: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Every setting, defaults included, as ordered `key -> value` text.
    pub fn echo(&self) -> BTreeMap<&'static str, String> {
        let list = |v: Vec<String>| v.join(",");
        let mut m = BTreeMap::new();
        m.insert("source", self.source.clone());
        m.insert(
            "tuple_n",
            self.tuple_n.map(|v| v.to_string()).unwrap_or_else(|| "none".into()),
        );
        m.insert("n", list(self.n.iter().map(|v| v.to_string()).collect()));
        m.insert("rate", self.rate.to_string());
        m.insert("seeds", list(self.seeds.iter().map(|v| v.to_string()).collect()));
        m.insert("b", list(self.b.iter().map(|v| v.to_string()).collect()));
        m.insert(
            "mode",
            match self.mode {
                Mode::Exact => "exact".into(),
                Mode::MonteCarlo => "mc".into(),
            },
        );
        m.insert("trials", self.trials.to_string());
        m.insert("out", self.out.display().to_string());
        m.insert("threshold", self.threshold.to_string());
        m.insert("c1", self.c1.to_string());
        m
    }
}

/// Parses `key=value` strings given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges_and_lists() {
        assert_eq!(parse_range("n", "1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_range("n", "2,5,9").unwrap(), vec![2, 5, 9]);
        assert_eq!(parse_range("n", "7").unwrap(), vec![7]);
        assert!(parse_range("n", "4..1").is_err());
        assert!(parse_range("n", "x").is_err());
    }

    #[test]
    fn parses_rate_policies() {
        assert_eq!(parse_rate("fixed:8").unwrap(), RatePolicy::Fixed(8));
        assert_eq!(parse_rate("margin:0.1").unwrap(), RatePolicy::Margin(0.1));
        assert_eq!(
            parse_rate("list:1,exp,full").unwrap(),
            RatePolicy::List(vec![RateEntry::Fixed(1), RateEntry::Exp, RateEntry::Full])
        );
        assert!(parse_rate("fixed:0").is_err());
        assert!(parse_rate("margin:inf").is_err());
        assert!(parse_rate("list:1,huge").is_err());
        assert!(parse_rate("bogus").is_err());
    }

    #[test]
    fn rate_values() {
        let h = 0.325_082_973_391_448_2;
        assert_eq!(RatePolicy::Margin(0.1).ms(4, h, 16), vec![6]);
        assert_eq!(RatePolicy::Margin(0.1).ms(12, h, 4096), vec![165]);
        let l = RatePolicy::List(vec![RateEntry::Fixed(1), RateEntry::Fixed(2), RateEntry::Exp, RateEntry::Full]);
        assert_eq!(l.ms(1, h, 2), vec![1, 2]);
        assert_eq!(RatePolicy::Fixed(100).ms(2, h, 4), vec![4]);
    }

    #[test]
    fn file_then_overrides() {
        let cfg = ExperimentConfig::parse("# sweep\nsource = bsc:0.2\nn = 2..3\nseeds=0..4 # five\n").unwrap();
        assert_eq!(cfg.source, "bsc:0.2");
        assert_eq!(cfg.n, vec![2, 3]);
        assert_eq!(cfg.seeds.len(), 5);
        assert_eq!(cfg.c1, DEFAULT_C1);

        let mut cfg = cfg;
        cfg.set("n", "5").unwrap();
        assert_eq!(cfg.n, vec![5]);

        assert!(ExperimentConfig::parse("nonsense").is_err());
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("trials = 0").is_err());
        assert!(ExperimentConfig::parse("b = -1").is_err());
        assert!(ExperimentConfig::parse("n = 0..3").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = ExperimentConfig::parse("rate = list:1,exp\nmode = mc\nb = 0.1,0.5").unwrap();
        let text: String = cfg
            .echo()
            .into_iter()
            .filter(|(k, _)| *k != "tuple_n")
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }
}
