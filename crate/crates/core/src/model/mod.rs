//! Instances, preferences, preference domains, and matchings.

mod domain;
mod instance;
pub mod io;
mod matching;
mod preference;

pub use domain::{classify_domain, domain_membership, DomainLabel, DomainSpec};
pub use instance::{validate_instance, AgentId, Instance, ObjectId, ObjectSet, RawInstance};
pub use matching::{Matching, MatchingDisplay};
pub use preference::{
    marginal_profile, to_trichotomous, trichotomous_profile, MarginalPreference, RankOrder,
    TrichotomousPreference,
};

/// One trichotomous preference per agent, indexed by priority position.
pub type Profile = Vec<TrichotomousPreference>;
