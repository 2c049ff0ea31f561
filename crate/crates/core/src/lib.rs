//! Privacy amplification by Slepian-Wolf encoders on finite i.i.d. sources.
//!
//! The crate evaluates, exactly wherever enumeration allows, the three
//! secrecy criteria of a key `S_n = f_n(X^n)` against an eavesdropper holding
//! `Z^n`: normalized divergence, variational distance and divergence. It also
//! provides the quantities that govern them: the minimum distance to a flat
//! family (`delta`), the error/secrecy trade-off of Slepian-Wolf codes,
//! second-order rates and the Gaussian approximations around them.
//!
//! All information quantities are in nats.

pub mod bounds;
pub mod codes;
mod combinatorics;
pub mod error;
pub mod metrics;
pub mod source;
pub mod tuple;

pub use error::{Error, Result};
pub use source::{JointPmf, ProductSource, SourceStats, TupleJoint, TupleSource};
