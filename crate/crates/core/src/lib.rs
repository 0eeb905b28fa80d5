//! Individually rational priority mechanism for balanced exchange of
//! bundles under trichotomous marginal preferences, with exact audits for
//! individual rationality, efficiency, incentives and the weak core.

pub mod audits;
pub mod cycles;
pub mod error;
pub mod generate;
pub mod mechanism;
pub mod model;
pub mod optimize;
pub mod responsive;
pub mod scalar;

pub use error::{Error, Result};
pub use mechanism::{run_ir_priority, MechanismTrace};
pub use model::{
    AgentId, DomainLabel, DomainSpec, Instance, MarginalPreference, Matching, ObjectId, ObjectSet, Profile,
    RankOrder, TrichotomousPreference,
};
pub use responsive::{AdditiveExtension, BundleComparison};
pub use scalar::Utility;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

/// Additive extension with exact rational utilities.
pub type ExactExtension = AdditiveExtension<Rational>;

/// Additive extension with floating-point utilities.
pub type FloatExtension = AdditiveExtension<f64>;
