//! Finite correlated sources: single-letter joints, their i.i.d. extensions,
//! information-density statistics and sampling.

mod law;
mod pmf;
mod product;
mod profile;

pub use law::{InfoDensityLaw, TIE_TOLERANCE, TYPE_CLASS_LIMIT};
pub use pmf::{JointPmf, SourceStats, SUM_TOLERANCE};
pub use product::{
    InfoDensitySample, ProductSource, TupleJoint, TupleSource, DEFAULT_MATERIALIZE_THRESHOLD,
};
pub use profile::{ConditionalProfile, MassGroup};
