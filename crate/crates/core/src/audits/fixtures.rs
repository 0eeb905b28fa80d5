//! Named reference profiles with the artifacts asserted for them.

use std::ops::ControlFlow;

use serde::Serialize;

use super::efficiency::{brute_force_improvement, efficiency_witness, EfficiencyMode};
use super::enumerate::search_matchings;
use super::weak_core::{efficient_ir_matchings, unambiguously_in_weak_core_bounded};
use crate::error::{Error, Result};
use crate::mechanism::run_ir_priority;
use crate::model::io::InstanceFile;
use crate::model::{
    trichotomous_profile, Instance, MarginalPreference, Matching, TrichotomousPreference,
};
use crate::responsive::{bundle_is_cir, cir_trichotomous};

/// Enumeration bound used when verifying fixtures; the largest has 12 objects.
pub const FIXTURE_BOUND: usize = 12;

pub const FIXTURE_NAMES: &[&str] = &[
    "example1",
    "deep-endowed-1",
    "deep-endowed-0",
    "competing-base",
    "competing-p2",
    "competing-p3",
    "competing-p3pp",
    "no-pe-core",
    "unit-demand-core",
    "tri-unit-demand",
];

/// Asserted artifacts. Empty lists and `None` assert nothing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expected {
    /// The complete set of component-wise individually rational matchings.
    pub cir: Option<Vec<Matching>>,
    /// The complete set of unambiguously individually rational and
    /// efficient matchings, in canonical order.
    pub efficient_ir: Option<Vec<Matching>>,
    /// Every component-wise individually rational matching admits an
    /// improvement.
    pub no_efficient_ir: bool,
    pub mechanism: Option<Matching>,
    /// Matchings asserted to be unambiguously in the weak core, with the
    /// strict acceptability flag.
    pub in_weak_core: Vec<(Matching, bool)>,
    /// Matchings asserted to be blocked, with the strict acceptability flag.
    pub blocked: Vec<(Matching, bool)>,
    pub inefficient: Vec<Matching>,
    pub efficient: Vec<Matching>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub instance: Instance,
    pub preferences: Vec<MarginalPreference>,
    pub expected: Expected,
    /// Soft fixtures record what the auditors find without asserting it.
    pub hard: bool,
}

impl Fixture {
    /// The trichotomous reading of the profile, when it has one.
    pub fn trichotomous(&self) -> Option<Vec<TrichotomousPreference>> {
        trichotomous_profile(&self.instance, &self.preferences).ok()
    }

    pub fn to_instance_file(&self) -> InstanceFile {
        let mut file = InstanceFile::from_instance(&self.instance);
        file = match self.trichotomous() {
            Some(t) => file.with_trichotomous(&self.instance, &t),
            None => file.with_marginal(&self.instance, &self.preferences),
        };
        file.meta = Some(serde_json::json!({ "fixture": self.name, "description": self.description }));
        file
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureReport {
    pub name: String,
    pub hard: bool,
    pub checks: Vec<Check>,
}

impl FixtureReport {
    /// All checks pass, or the fixture is soft.
    pub fn ok(&self) -> bool {
        !self.hard || self.checks.iter().all(|c| c.passed)
    }
}

fn m(inst: &Instance, bundles: &[&[&str]]) -> Matching {
    Matching::from_names(inst, bundles).expect("fixture matchings are valid")
}

fn marginal(inst: &Instance, classes: &[&[&str]]) -> MarginalPreference {
    MarginalPreference::from_names_with_rest(inst, classes).expect("fixture preferences are valid")
}

fn tri(inst: &Instance, attractive: &[&str], bearable: &[&str]) -> MarginalPreference {
    let acceptable: Vec<&str> = attractive.iter().chain(bearable).copied().collect();
    let rest: Vec<String> = inst
        .objects()
        .map(|o| inst.object_name(o).to_string())
        .filter(|n| !acceptable.contains(&n.as_str()))
        .collect();
    let rest: Vec<&str> = rest.iter().map(String::as_str).collect();
    MarginalPreference::from_names(inst, &[attractive, bearable, &rest]).expect("fixture preferences are valid")
}

fn competing_instance() -> Instance {
    Instance::from_endowments(&[
        ("1", &["o"][..]),
        ("2", &["p"][..]),
        ("3", &["q1", "q2"][..]),
        ("4", &["r"][..]),
    ])
    .expect("fixture instance is valid")
}

fn competing(name: &'static str) -> Fixture {
    let inst = competing_instance();
    let mu1 = m(&inst, &[&["q1"], &["r"], &["o", "p"], &["q2"]]);
    let mu2 = m(&inst, &[&["r"], &["q1"], &["o", "p"], &["q2"]]);
    let mu3 = m(&inst, &[&["q1"], &["p"], &["o", "q2"], &["r"]]);
    let mu4 = m(&inst, &[&["r"], &["p"], &["o", "q1"], &["q2"]]);
    let p1 = tri(&inst, &["q1"], &["o", "r"]);
    let p2 = tri(&inst, &["q1"], &["p", "r"]);
    let p2_prime = tri(&inst, &["q1"], &["p"]);
    let p3 = tri(&inst, &["o", "p"], &["q1", "q2"]);
    let p3_prime = tri(&inst, &["p"], &["q1", "q2", "o"]);
    let p3_second = tri(&inst, &["p"], &["q1", "q2"]);
    let p4 = tri(&inst, &["q2"], &["r"]);
    let (description, preferences, expected) = match name {
        "competing-base" => (
            "four agents; agents 1 and 2 compete for q1 and agent 3 wants both singletons",
            vec![p1, p2, p3, p4],
            Expected {
                efficient_ir: Some(vec![mu1.clone(), mu2]),
                mechanism: Some(mu1),
                ..Expected::default()
            },
        ),
        "competing-p2" => (
            "agent 2 no longer bears r",
            vec![p1, p2_prime, p3, p4],
            Expected {
                efficient_ir: Some(vec![mu3.clone(), mu2.clone()]),
                inefficient: vec![mu4],
                ..Expected::default()
            },
        ),
        "competing-p3" => (
            "agent 2 no longer bears r; agent 3 wants only p and bears o",
            vec![p1, p2_prime, p3_prime, p4],
            Expected {
                efficient_ir: Some(vec![mu3.clone(), mu2.clone()]),
                ..Expected::default()
            },
        ),
        "competing-p3pp" => (
            "agent 2 no longer bears r; agent 3 wants only p",
            vec![p1, p2_prime, p3_second, p4],
            Expected {
                efficient_ir: Some(vec![m(&inst, &[&["o"], &["q1"], &["p", "q2"], &["r"]])]),
                ..Expected::default()
            },
        ),
        _ => unreachable!(),
    };
    Fixture {
        name,
        description,
        instance: inst,
        preferences,
        expected,
        hard: true,
    }
}

/// Builds a named fixture.
pub fn load_fixture(name: &str) -> Result<Fixture> {
    let fixture = match name {
        "example1" => {
            let inst = Instance::from_endowments(&[("1", &["o1", "o2"][..]), ("2", &["p1", "p2"][..])])?;
            let pref = marginal(&inst, &[&["o1"], &["p1"], &["p2"], &["o2"]]);
            let omega = Matching::endowment(&inst);
            Fixture {
                name: "example1",
                description: "two agents with identical four-class preferences; the endowment is the only individually rational matching",
                expected: Expected {
                    cir: Some(vec![omega.clone()]),
                    no_efficient_ir: true,
                    inefficient: vec![omega],
                    ..Expected::default()
                },
                preferences: vec![pref.clone(), pref],
                instance: inst,
                hard: true,
            }
        }
        "deep-endowed-1" => {
            let inst = Instance::from_endowments(&[
                ("1", &["o1", "p1", "pp1", "q1"][..]),
                ("2", &["o2", "p2", "pp2", "q2"][..]),
                ("3", &["o3", "p3", "pp3", "q3"][..]),
            ])?;
            let others = |i: usize, prefixes: &[&str]| -> Vec<String> {
                (1..=3)
                    .filter(|&j| j != i)
                    .flat_map(|j| prefixes.iter().map(move |p| format!("{p}{j}")))
                    .collect()
            };
            let preferences = (1..=3)
                .map(|i| {
                    let top = others(i, &["o"]);
                    let second = others(i, &["p", "pp"]);
                    let own: Vec<String> = ["o", "p", "pp", "q"].iter().map(|p| format!("{p}{i}")).collect();
                    let classes: Vec<Vec<&str>> = [&top, &second, &own]
                        .iter()
                        .map(|c| c.iter().map(String::as_str).collect())
                        .collect();
                    let refs: Vec<&[&str]> = classes.iter().map(Vec::as_slice).collect();
                    marginal(&inst, &refs)
                })
                .collect();
            Fixture {
                name: "deep-endowed-1",
                description: "three agents with four objects each; others' p-objects share the second class",
                instance: inst,
                preferences,
                expected: Expected {
                    no_efficient_ir: true,
                    ..Expected::default()
                },
                hard: true,
            }
        }
        "deep-endowed-0" => {
            let inst = Instance::from_endowments(&[
                ("1", &["o1", "o2", "o3", "q1"][..]),
                ("2", &["p1", "p2", "p3", "q2"][..]),
                ("3", &["a1", "a2", "a3"][..]),
            ])?;
            let a = ["a1", "a2", "a3"];
            let o = ["o1", "o2", "o3"];
            let p = ["p1", "p2", "p3"];
            let op = ["o1", "o2", "o3", "p1", "p2", "p3"];
            let preferences = vec![
                marginal(&inst, &[&a, &o, &["q1"]]),
                marginal(&inst, &[&a, &p, &["q2"]]),
                marginal(&inst, &[&op, &a]),
            ];
            Fixture {
                name: "deep-endowed-0",
                description: "three agents; endowed objects reach the third class while non-endowed objects skip the second",
                instance: inst,
                preferences,
                expected: Expected {
                    no_efficient_ir: true,
                    ..Expected::default()
                },
                hard: true,
            }
        }
        "competing-base" | "competing-p2" | "competing-p3" | "competing-p3pp" => {
            let static_name = FIXTURE_NAMES.iter().find(|&&n| n == name).expect("listed");
            competing(static_name)
        }
        "no-pe-core" => {
            let inst = Instance::from_endowments(&[
                ("1", &["o1", "o2"][..]),
                ("2", &["p1", "p2"][..]),
                ("3", &["q1", "q2"][..]),
            ])?;
            let preferences = vec![
                tri(&inst, &["p1"], &["o1", "o2"]),
                tri(&inst, &["o1", "o2", "q1", "q2"], &["p1", "p2"]),
                tri(&inst, &["p1"], &["q1", "q2"]),
            ];
            let mut candidates = vec![
                m(&inst, &[&["o1", "p1"], &["o2", "p2"], &["q1", "q2"]]),
                m(&inst, &[&["o2", "p1"], &["o1", "p2"], &["q1", "q2"]]),
                m(&inst, &[&["o1", "o2"], &["p2", "q2"], &["p1", "q1"]]),
                m(&inst, &[&["o1", "o2"], &["p2", "q1"], &["p1", "q2"]]),
            ];
            candidates.sort();
            Fixture {
                name: "no-pe-core",
                description: "three agents with strongly trichotomous preferences; no efficient matching is in the weak core",
                expected: Expected {
                    efficient_ir: Some(candidates.clone()),
                    blocked: candidates.iter().map(|c| (c.clone(), false)).collect(),
                    in_weak_core: candidates.iter().map(|c| (c.clone(), true)).collect(),
                    ..Expected::default()
                },
                instance: inst,
                preferences,
                hard: true,
            }
        }
        "unit-demand-core" => {
            let inst = Instance::from_endowments(&[("1", &["o"][..]), ("2", &["p"][..]), ("3", &["q"][..])])?;
            let preferences = vec![
                tri(&inst, &["o", "p", "q"], &[]),
                tri(&inst, &["o"], &["p", "q"]),
                tri(&inst, &["o"], &["p", "q"]),
            ];
            let omega = Matching::endowment(&inst);
            Fixture {
                name: "unit-demand-core",
                description: "unit demand; the endowment is in the weak core but not efficient",
                expected: Expected {
                    in_weak_core: vec![(omega.clone(), false), (omega.clone(), true)],
                    inefficient: vec![omega],
                    ..Expected::default()
                },
                instance: inst,
                preferences,
                hard: true,
            }
        }
        "tri-unit-demand" => {
            let inst = Instance::from_endowments(&[
                ("1", &["o"][..]),
                ("2", &["p"][..]),
                ("3", &["q"][..]),
                ("4", &["r"][..]),
            ])?;
            let preferences = vec![
                tri(&inst, &["q"], &["o"]),
                tri(&inst, &["r"], &["p"]),
                tri(&inst, &["r"], &["o", "q"]),
                tri(&inst, &["q"], &["p", "r"]),
            ];
            let mu = m(&inst, &[&["q"], &["r"], &["o"], &["p"]]);
            Fixture {
                name: "tri-unit-demand",
                description: "unit demand with bearable non-endowments; the printed block is recorded, not asserted",
                expected: Expected {
                    efficient: vec![mu.clone()],
                    blocked: vec![(mu, true)],
                    ..Expected::default()
                },
                instance: inst,
                preferences,
                hard: false,
            }
        }
        other => return Err(Error::UnknownFixture(other.to_string())),
    };
    Ok(fixture)
}

fn list(inst: &Instance, ms: &[Matching]) -> String {
    let parts: Vec<String> = ms.iter().map(|mu| mu.display(inst).to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Every component-wise individually rational matching under arbitrary
/// marginal preferences, in canonical order.
pub fn cir_matchings(instance: &Instance, prefs: &[MarginalPreference]) -> Vec<Matching> {
    let mut out = Vec::new();
    search_matchings::<()>(
        instance,
        |a, bundle| bundle_is_cir(bundle, instance.endowment(a), &prefs[a.0]),
        |bundles| {
            out.push(Matching::new(instance, bundles.to_vec()).expect("enumerated matchings are valid"));
            ControlFlow::Continue(())
        },
    );
    out
}

/// Runs every assertion attached to `fixture`.
pub fn verify_fixture(fixture: &Fixture) -> Result<FixtureReport> {
    let inst = &fixture.instance;
    let prefs = &fixture.preferences;
    let tri_prefs = fixture.trichotomous();
    let mut checks = Vec::new();
    let mut check = |label: String, passed: bool, detail: String| checks.push(Check { label, passed, detail });
    let need_tri = || tri_prefs.clone().ok_or_else(|| Error::ModeScope(format!("fixture `{}` is not trichotomous", fixture.name)));

    if let Some(expected) = &fixture.expected.cir {
        let found = cir_matchings(inst, prefs);
        check("individually rational set".into(), &found == expected, list(inst, &found));
    }
    if fixture.expected.no_efficient_ir {
        let cir = cir_matchings(inst, prefs);
        let mut survivors = Vec::new();
        for mu in &cir {
            if brute_force_improvement(inst, mu, prefs, FIXTURE_BOUND)?.is_none() {
                survivors.push(mu.clone());
            }
        }
        check(
            "every individually rational matching is improvable".into(),
            survivors.is_empty(),
            format!("{} individually rational matchings, {} unimproved", cir.len(), survivors.len()),
        );
    }
    if let Some(expected) = &fixture.expected.efficient_ir {
        let t = need_tri()?;
        let found = efficient_ir_matchings(inst, &t, FIXTURE_BOUND)?;
        check("efficient individually rational set".into(), &found == expected, list(inst, &found));
        let mut agree = true;
        for mu in crate::audits::enumerate_matchings_bounded(inst, FIXTURE_BOUND)? {
            if cir_trichotomous(inst, &mu, &t) {
                let cycle = efficiency_witness(inst, &mu, &t, EfficiencyMode::Cycle)?.is_none();
                let brute = brute_force_improvement(inst, &mu, &t, FIXTURE_BOUND)?.is_none();
                agree &= cycle == brute;
            }
        }
        check("cycle and brute verdicts agree".into(), agree, String::new());
    }
    if let Some(t) = &tri_prefs {
        let (mu, trace) = run_ir_priority(inst, t)?;
        let cir = cir_trichotomous(inst, &mu, t);
        let efficient = efficiency_witness(inst, &mu, t, EfficiencyMode::Cycle)?.is_none();
        check(
            "mechanism output is individually rational and efficient".into(),
            cir && efficient,
            format!("{} after {} rounds", mu.display(inst), trace.last_round()),
        );
        if let Some(expected) = &fixture.expected.mechanism {
            check("mechanism output".into(), &mu == expected, mu.display(inst).to_string());
        }
        if let Some(set) = &fixture.expected.efficient_ir {
            check("mechanism output is a listed candidate".into(), set.contains(&mu), String::new());
        }
    }
    for mu in &fixture.expected.inefficient {
        let w = brute_force_improvement(inst, mu, prefs, FIXTURE_BOUND)?;
        let detail = w.as_ref().map(|nu| format!("improved by {}", nu.display(inst))).unwrap_or_default();
        check(format!("{} is not efficient", mu.display(inst)), w.is_some(), detail);
    }
    for mu in &fixture.expected.efficient {
        let w = brute_force_improvement(inst, mu, prefs, FIXTURE_BOUND)?;
        let detail = w.as_ref().map(|nu| format!("improved by {}", nu.display(inst))).unwrap_or_default();
        check(format!("{} is efficient", mu.display(inst)), w.is_none(), detail);
    }
    for (mu, sa) in &fixture.expected.in_weak_core {
        let w = unambiguously_in_weak_core_bounded(inst, mu, &need_tri()?, *sa, FIXTURE_BOUND)?;
        let detail = w.as_ref().map(|b| b.to_json(inst).to_string()).unwrap_or_default();
        check(format!("{} is in the weak core (strict acceptability {sa})", mu.display(inst)), w.is_none(), detail);
    }
    for (mu, sa) in &fixture.expected.blocked {
        let w = unambiguously_in_weak_core_bounded(inst, mu, &need_tri()?, *sa, FIXTURE_BOUND)?;
        let detail = w.as_ref().map(|b| b.to_json(inst).to_string()).unwrap_or_else(|| "no block".into());
        check(format!("{} is blocked (strict acceptability {sa})", mu.display(inst)), w.is_some(), detail);
    }
    Ok(FixtureReport {
        name: fixture.name.to_string(),
        hard: fixture.hard,
        checks,
    })
}
