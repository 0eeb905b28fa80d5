//! Property auditors and reference fixtures.

mod efficiency;
mod enumerate;
mod fixtures;
mod incentives;
mod weak_core;

pub use efficiency::{
    brute_force_improvement, efficiency_witness, unambiguously_efficient, unambiguously_efficient_general,
    EfficiencyMode, Improvement,
};
pub use enumerate::{enumerate_matchings, enumerate_matchings_bounded, MatchingIter};
pub use incentives::{
    certificate_json, check_obvious_manipulability, check_obvious_manipulability_of, check_strategy_proofness,
    check_strategy_proofness_of, check_truncation_proofness, check_truncation_proofness_of, ir_priority,
    sweep_strategy_proofness, trichotomous_reports, truncations, ManipulationWitness, OmCase, OmWitness,
    OpponentUniverse, ProfileSpace, SweepWitness,
};
pub use weak_core::{
    can_strictly_prefer, efficient_ir_matchings, find_efficient_core_matching, unambiguously_in_weak_core,
    unambiguously_in_weak_core_bounded, BlockWitness,
};
pub use fixtures::{
    cir_matchings, load_fixture, verify_fixture, Check, Expected, Fixture, FixtureReport, FIXTURE_BOUND, FIXTURE_NAMES,
};
