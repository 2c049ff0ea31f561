//! Source resolution and the one-shot commands `source-info`, `delta` and `bounds`.

use std::fmt::Write as _;

use skaudit_core::bounds::{delta_exact, partition_report, thm2_rhs, thm4_lower_bound};
use skaudit_core::{JointPmf, ProductSource, TupleJoint, TupleSource};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// A source at one block length: an i.i.d. extension or an explicit tuple joint.
pub enum Audited {
    Product(ProductSource),
    Tuple(TupleJoint),
}

impl Audited {
    pub fn n(&self) -> usize {
        self.as_dyn().block_len()
    }

    pub fn as_dyn(&self) -> &dyn TupleSource {
        match self {
            Self::Product(p) => p,
            Self::Tuple(t) => t,
        }
    }

    pub fn product(&self) -> Option<&ProductSource> {
        match self {
            Self::Product(p) => Some(p),
            Self::Tuple(_) => None,
        }
    }

    /// `|X^n|` without materializing anything.
    pub fn domain(&self) -> Option<u64> {
        match self {
            Self::Product(p) => p.x_tuples(),
            Self::Tuple(t) => Some(t.pmf().x_size() as u64),
        }
    }
}

pub fn load_pmf(spec: &str) -> CliResult<JointPmf> {
    JointPmf::load(spec).map_err(|e| CliError::Config(format!("source `{spec}`: {e}")))
}

/// Every source the config asks for, in `n` order.
pub fn sources(cfg: &ExperimentConfig) -> CliResult<Vec<Audited>> {
    let pmf = load_pmf(&cfg.source)?;
    if let Some(n) = cfg.tuple_n {
        return Ok(vec![Audited::Tuple(TupleJoint::new(n, pmf)?)]);
    }
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| Ok(Audited::Product(ProductSource::with_threshold(pmf.clone(), n, cfg.threshold)?)))
        .collect()
}

pub fn source_info(spec: &str) -> CliResult<String> {
    let pmf = load_pmf(spec)?;
    let st = pmf.info_stats();
    let sigma_zero = st.sigma2 == 0.0 || pmf.has_constant_density();
    let mut out = String::new();
    writeln!(out, "source          {spec}").unwrap();
    writeln!(out, "alphabets       |X| = {}, |Z| = {}", pmf.x_size(), pmf.z_size()).unwrap();
    writeln!(out, "H(X|Z)          {:.6} nats", st.h_cond).unwrap();
    writeln!(out, "sigma^2         {:.6}", st.sigma2).unwrap();
    writeln!(out, "sigma           {:.6}", st.sigma()).unwrap();
    writeln!(out, "rho3            {:.6}", st.rho3).unwrap();
    writeln!(out, "sigma=0         {sigma_zero}").unwrap();
    writeln!(
        out,
        "H={} sigma2={} sigma={} rho3={} sigma_zero={sigma_zero}",
        st.h_cond,
        st.sigma2,
        st.sigma(),
        st.rho3
    )
    .unwrap();
    Ok(out)
}

/// `delta` of one source with its full curve as `M,d` lines.
pub fn delta_command(spec: &str, n: usize, tuple: bool) -> CliResult<String> {
    let pmf = load_pmf(spec)?;
    let r = if tuple {
        delta_exact(&TupleJoint::new(n, pmf)?, None)?
    } else {
        delta_exact(&ProductSource::new(pmf, n)?, None)?
    };
    let mut out = format!("# delta={} best_M={} n={n}\nM,d\n", r.delta, r.best_m);
    for (m, d) in &r.curve {
        writeln!(out, "{m},{d}").unwrap();
    }
    Ok(out)
}

pub fn bounds_command(spec: &str, n: usize, bs: &[f64], m: Option<u64>, c1: f64) -> CliResult<String> {
    let source = ProductSource::new(load_pmf(spec)?, n)?;
    let st = source.stats();
    let d = delta_exact(&source, None)?;
    let m = m.unwrap_or(d.best_m);
    let mut out = format!(
        "# source={spec} n={n} sigma={} delta={} best_M={}\n{}\n",
        st.sigma(),
        d.delta,
        d.best_m,
        BOUNDS_HEADER
    );
    for &b in bs {
        let p = partition_report(&source, m, b, c1)?;
        let lb = if m == d.best_m {
            p.lower_bound()
        } else {
            thm4_lower_bound(&source, b, c1)?
        };
        writeln!(
            out,
            "{n},{b},{},{},{m},{},{},{},{},{},{lb},{}",
            st.sigma(),
            thm2_rhs(b, st.sigma()),
            p.p_c_aplus,
            p.p_aminus_cbar,
            p.p_a0,
            p.bound_exp,
            p.bound_a0,
            d.delta
        )
        .unwrap();
    }
    Ok(out)
}

pub const BOUNDS_HEADER: &str =
    "n,b,sigma,thm2_rhs,M,p_c_aplus,p_aminus_cbar,p_a0,bound_exp,bound_a0,thm4_lower_bound,delta";
