//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use exchange_core::audits::{
    brute_force_improvement, check_strategy_proofness, check_truncation_proofness, efficiency_witness,
    efficient_ir_matchings, enumerate_matchings, find_efficient_core_matching, load_fixture,
    sweep_strategy_proofness, trichotomous_reports, unambiguously_in_weak_core, verify_fixture, EfficiencyMode,
    ProfileSpace, FIXTURE_BOUND, FIXTURE_NAMES,
};
use exchange_core::cycles::{apply_cycle, classify_cycle, decompose, distance};
use exchange_core::generate::{generate, random_instance, random_matching, random_profile, GeneratorConfig};
use exchange_core::mechanism::run_ir_priority;
use exchange_core::model::{AgentId, DomainSpec, Instance, ObjectSet, TrichotomousPreference};
use exchange_core::optimize::{brute_force_max, max_attractive, AgentConstraint, WelfareConstraints};
use exchange_core::responsive::{build_punishing_extension, bundle_is_cir, bundle_is_cir_trichotomous, cir_trichotomous};
use exchange_core::{Error, ExactExtension};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

/// Title, time budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Instances with one agent per entry of `sizes`, each endowed with that many
/// objects.
fn shaped(sizes: &[usize]) -> Instance {
    let names: Vec<(String, Vec<String>)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| (format!("{}", i + 1), (0..s).map(|k| format!("{}{}", (b'a' + i as u8) as char, k + 1)).collect()))
        .collect();
    let refs: Vec<(&str, Vec<&str>)> = names
        .iter()
        .map(|(a, os)| (a.as_str(), os.iter().map(String::as_str).collect()))
        .collect();
    let slices: Vec<(&str, &[&str])> = refs.iter().map(|(a, os)| (*a, os.as_slice())).collect();
    Instance::from_endowments(&slices).expect("shapes are valid")
}

/// Every size vector in `{1,2}^n` for `n` in `1..=max_agents`.
fn shapes(max_agents: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for n in 1..=max_agents {
        for mask in 0..1usize << n {
            out.push((0..n).map(|i| 1 + (mask >> i & 1)).collect());
        }
    }
    out
}

/// Component-wise individual rationality holds iff no punishing extension
/// (one per endowed pivot) ranks the endowment strictly above the bundle.
/// Both verdicts are conjunctions over agents of a condition on the agent's
/// own preference and bundle, so checking every (agent, preference,
/// reachable bundle) triple covers every profile and matching.
fn criterion_1() -> Verdict {
    let mut triples = 0usize;
    let mut matchings = 0usize;
    let domain = DomainSpec::trichotomous();
    for sizes in shapes(3).into_iter().filter(|s| s.len() == 3) {
        let inst = shaped(&sizes);
        let all: Vec<_> = enumerate_matchings(&inst).map_err(err)?.collect();
        matchings += all.len();
        for a in inst.agents() {
            let bundles: BTreeSet<ObjectSet> = all.iter().map(|mu| mu.bundle(a).clone()).collect();
            let endowment = inst.endowment(a);
            for pref in trichotomous_reports(&inst, a, &domain) {
                let marginal = pref.to_marginal(inst.num_objects());
                for bundle in &bundles {
                    triples += 1;
                    let cir = bundle_is_cir_trichotomous(bundle, endowment, &pref);
                    ensure(cir == bundle_is_cir(bundle, endowment, &marginal), || {
                        format!("trichotomous and rank-count tests disagree for agent {} on {bundle:?}", a.0)
                    })?;
                    let defeated = endowment.iter().any(|&pivot| {
                        let ext: ExactExtension =
                            build_punishing_extension(&marginal, pivot, endowment.len(), inst.num_objects());
                        debug_assert!(ext.is_consistent_with(&marginal));
                        ext.value(bundle) < ext.value(endowment)
                    });
                    ensure(cir != defeated, || {
                        format!("agent {} bundle {bundle:?}: cir {cir}, punished {defeated}", a.0)
                    })?;
                }
            }
        }
    }
    Ok(format!("{triples} agent/preference/bundle triples over {matchings} matchings on 8 shapes"))
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cycles_seen = 0;
    for _ in 0..10_000 {
        let config = GeneratorConfig {
            agents: rng.gen_range(1..=5),
            max_endowment: 3,
            ..Default::default()
        };
        let inst = random_instance(&config, &mut rng).map_err(err)?;
        let mu = random_matching(&inst, &mut rng);
        let nu = random_matching(&inst, &mut rng);
        let cycles = decompose(&inst, &nu, &mu);
        let mut used = ObjectSet::new();
        let mut moved = 0;
        let mut current = mu.clone();
        for c in &cycles {
            c.validate(&mu).map_err(err)?;
            for o in c.objects() {
                ensure(used.insert(o), || format!("object {o:?} appears in two cycles"))?;
            }
            moved += c.len();
            current = apply_cycle(&current, c).map_err(err)?;
        }
        ensure(current == nu, || format!("re-execution gave {current:?}, expected {nu:?}"))?;
        ensure(moved == distance(&inst, &mu, &nu), || "cycle lengths do not sum to the distance".into())?;
        cycles_seen += cycles.len();
    }
    Ok(format!("10000 pairs, {cycles_seen} cycles"))
}

/// Random instance with at most `max_objects` objects.
fn small_instance(rng: &mut ChaCha8Rng, max_agents: usize, max_objects: usize, strongly: bool) -> (Instance, Vec<TrichotomousPreference>) {
    let agents = rng.gen_range(1..=max_agents);
    let cap = max_objects.min(3 * agents);
    let objects = rng.gen_range((agents + 2).min(cap)..=cap);
    let config = GeneratorConfig {
        agents,
        max_endowment: 3,
        objects: Some(objects),
        attractive_probability: rng.gen_range(0.15..0.5),
        bearable_probability: rng.gen_range(0.1..0.6),
        strongly,
    };
    let inst = random_instance(&config, rng).expect("config is valid");
    let prefs = random_profile(&inst, &config, rng);
    (inst, prefs)
}

fn criterion_3() -> Verdict {
    let (mut checked, mut inefficient) = (0, 0);
    for seed in 0..200 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
        let (inst, prefs) = small_instance(&mut rng, 4, 8, false);
        for mu in enumerate_matchings(&inst).map_err(err)? {
            if !cir_trichotomous(&inst, &mu, &prefs) {
                continue;
            }
            checked += 1;
            let cycle = efficiency_witness(&inst, &mu, &prefs, EfficiencyMode::Cycle).map_err(err)?;
            let brute = brute_force_improvement(&inst, &mu, &prefs, 8).map_err(err)?;
            ensure(cycle.is_none() == brute.is_none(), || {
                format!("seed {seed}: verdicts differ on {}", mu.display(&inst))
            })?;
            if let Some(exchange_core::audits::Improvement::Cycle(c)) = cycle {
                inefficient += 1;
                let class = classify_cycle(&c, &mu, &prefs).map_err(err)?;
                ensure(class.cir && class.pareto_improving, || format!("seed {seed}: bad cycle {class:?}"))?;
            }
        }
    }
    Ok(format!("{checked} individually rational matchings, {inefficient} improvable, 200 profiles"))
}

fn check_mechanism(inst: &Instance, prefs: &[TrichotomousPreference], label: &str) -> Result<usize, String> {
    let (mu, trace) = run_ir_priority(inst, prefs).map_err(|e| format!("{label}: {e}"))?;
    let n = inst.num_agents();
    ensure(cir_trichotomous(inst, &mu, prefs), || format!("{label}: output not individually rational"))?;
    let w = efficiency_witness(inst, &mu, prefs, EfficiencyMode::Cycle).map_err(err)?;
    ensure(w.is_none(), || format!("{label}: output improvable"))?;
    if inst.num_objects() <= 8 {
        let b = brute_force_improvement(inst, &mu, prefs, 8).map_err(err)?;
        ensure(b.is_none(), || format!("{label}: brute force improves the output"))?;
    }
    let rounds = trace.last_round();
    ensure(rounds <= n, || format!("{label}: {rounds} rounds for {n} agents"))?;
    let covered = trace.rounds.last().map_or(n == 0, |r| r.non_improvable.len() == n);
    ensure(covered, || format!("{label}: last round does not cover every agent"))?;
    ensure(trace.flow_queries <= 2 * n * (rounds + 1), || {
        format!("{label}: {} flow queries", trace.flow_queries)
    })?;
    Ok(rounds)
}

fn criterion_4() -> Verdict {
    let mut fixtures = 0;
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).map_err(err)?;
        if let Some(t) = f.trichotomous() {
            check_mechanism(&f.instance, &t, name)?;
            fixtures += 1;
        }
    }
    let mut max_rounds = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let config = GeneratorConfig {
            agents: rng.gen_range(1..=5),
            max_endowment: 3,
            objects: None,
            attractive_probability: rng.gen_range(0.1..0.6),
            bearable_probability: rng.gen_range(0.0..0.7),
            strongly: false,
        };
        let g = generate(&config, seed).map_err(err)?;
        max_rounds = max_rounds.max(check_mechanism(&g.instance, &g.preferences, &format!("seed {seed}"))?);
    }
    Ok(format!("{fixtures} fixtures and 1000 random instances, at most {max_rounds} rounds"))
}

fn random_constraint(inst: &Instance, a: AgentId, rng: &mut ChaCha8Rng) -> AgentConstraint {
    let pick = |p: f64, rng: &mut ChaCha8Rng| -> ObjectSet { inst.objects().filter(|_| rng.gen_bool(p)).collect() };
    let attractive = pick(0.4, rng);
    let mut allowed = pick(0.6, rng);
    allowed.extend(inst.endowment(a).iter().copied().filter(|_| rng.gen_bool(0.8)));
    let size = inst.endowment_size(a);
    let min_attractive = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(0..=size.min(1)) };
    let exact_attractive = rng.gen_bool(0.15).then(|| rng.gen_range(min_attractive..=size));
    AgentConstraint {
        attractive,
        allowed,
        min_attractive,
        exact_attractive,
    }
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut feasible = 0;
    for q in 0..1000 {
        let (inst, _) = small_instance(&mut rng, 4, 8, false);
        let agents = inst.agents().map(|a| random_constraint(&inst, a, &mut rng)).collect();
        let constraints = WelfareConstraints::new(&inst, agents).map_err(err)?;
        let target = AgentId(rng.gen_range(0..inst.num_agents()));
        let flow = max_attractive(&inst, &constraints, target);
        let brute = brute_force_max(&inst, &constraints, target);
        match (flow, brute) {
            (Ok(f), Ok(b)) => {
                ensure(f == b, || format!("query {q}: flow {:?} vs brute {:?}", f, b))?;
                feasible += 1;
            }
            (Err(Error::Infeasible), Err(Error::Infeasible)) => {}
            (f, b) => return Err(format!("query {q}: flow {f:?} vs brute {b:?}")),
        }
    }
    ensure(feasible >= 200, || format!("only {feasible} feasible queries"))?;
    Ok(format!("1000 queries, {feasible} feasible, same count and same matching"))
}

fn criterion_6() -> Verdict {
    let domain = DomainSpec::strongly_trichotomous();
    let mut profiles = 0;
    let list = shapes(3);
    for sizes in &list {
        let inst = shaped(sizes);
        let space = ProfileSpace::domain(&inst, &domain);
        profiles += space.len();
        if let Some(w) = sweep_strategy_proofness(&inst, &space, &|i: &Instance, p: &[TrichotomousPreference]| {
            run_ir_priority(i, p).map(|(mu, _)| mu)
        })
        .map_err(err)?
        {
            return Err(format!("shape {sizes:?}: {}", w.witness.to_json(&inst)));
        }
    }
    Ok(format!("{} shapes, {profiles} profiles, no manipulation", list.len()))
}

fn criterion_7() -> Verdict {
    let domain = DomainSpec::trichotomous();
    let mut witnesses = Vec::new();
    for name in ["competing-base", "competing-p2", "competing-p3", "competing-p3pp"] {
        let f = load_fixture(name).map_err(err)?;
        let t = f.trichotomous().ok_or_else(|| format!("{name} is not trichotomous"))?;
        if let Some(w) = check_strategy_proofness(&f.instance, &t, &domain).map_err(err)? {
            witnesses.push(format!("{name}: agent {}", f.instance.agent_name(w.agent)));
        }
    }
    ensure(!witnesses.is_empty(), || "no manipulation found on the four-agent family".into())?;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
        let (inst, prefs) = small_instance(&mut rng, 4, 8, false);
        if let Some(w) = check_truncation_proofness(&inst, &prefs).map_err(err)? {
            return Err(format!("seed {seed}: {}", w.to_json(&inst)));
        }
    }
    Ok(format!("witnesses [{}]; 500 instances truncation-proof", witnesses.join(", ")))
}

fn criterion_8() -> Verdict {
    let mut lines = Vec::new();
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).map_err(err)?;
        let report = verify_fixture(&f).map_err(err)?;
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.label.clone()).collect();
        ensure(report.ok(), || format!("{name}: {}", failed.join("; ")))?;
        lines.push(format!("{name} {}/{}", report.checks.len() - failed.len(), report.checks.len()));
    }
    Ok(lines.join(", "))
}

fn criterion_9() -> Verdict {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + seed);
        let (inst, prefs) = small_instance(&mut rng, 4, 8, false);
        let mu = find_efficient_core_matching(&inst, &prefs)
            .map_err(err)?
            .ok_or_else(|| format!("seed {seed}: no efficient weak-core matching"))?;
        ensure(cir_trichotomous(&inst, &mu, &prefs), || format!("seed {seed}: not individually rational"))?;
        let improvable = brute_force_improvement(&inst, &mu, &prefs, FIXTURE_BOUND).map_err(err)?;
        ensure(improvable.is_none(), || format!("seed {seed}: improvable"))?;
        let block = unambiguously_in_weak_core(&inst, &mu, &prefs, true).map_err(err)?;
        ensure(block.is_none(), || format!("seed {seed}: blocked"))?;
    }
    let domain = DomainSpec::strongly_trichotomous();
    let (mut profiles, mut matchings) = (0, 0);
    for sizes in shapes(3) {
        let inst = shaped(&sizes);
        let space = ProfileSpace::domain(&inst, &domain);
        for idx in 0..space.len() {
            let prefs = space.profile(idx);
            profiles += 1;
            for mu in efficient_ir_matchings(&inst, &prefs, FIXTURE_BOUND).map_err(err)? {
                matchings += 1;
                if let Some(b) = unambiguously_in_weak_core(&inst, &mu, &prefs, true).map_err(err)? {
                    return Err(format!("shape {sizes:?} profile {idx}: {}", b.to_json(&inst)));
                }
            }
        }
    }
    Ok(format!(
        "200 random instances; {matchings} efficient individually rational matchings over {profiles} strongly trichotomous profiles, none blocked"
    ))
}

fn criterion_10() -> Verdict {
    let mut lines = Vec::new();
    for (seed, attractive, bearable) in [(10, 0.05, 0.2), (11, 0.2, 0.5), (12, 0.5, 0.5)] {
        let config = GeneratorConfig {
            agents: 50,
            max_endowment: 8,
            objects: Some(200),
            attractive_probability: attractive,
            bearable_probability: bearable,
            strongly: false,
        };
        let g = generate(&config, seed).map_err(err)?;
        let start = Instant::now();
        let (mu, trace) = run_ir_priority(&g.instance, &g.preferences).map_err(err)?;
        let elapsed = start.elapsed();
        ensure(cir_trichotomous(&g.instance, &mu, &g.preferences), || "output not individually rational".into())?;
        ensure(elapsed < Duration::from_secs(10), || format!("seed {seed} took {elapsed:?}"))?;
        lines.push(format!(
            "p_A={attractive} p_B={bearable}: {:.2}s, {} rounds, {} flow queries",
            elapsed.as_secs_f64(),
            trace.last_round(),
            trace.flow_queries
        ));
    }
    Ok(format!("n=50, |O|=200; {}", lines.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("individual rationality equals survival of punishing extensions", 60, criterion_1),
        ("decomposition into object-disjoint cycles", 60, criterion_2),
        ("cycle and brute-force efficiency verdicts agree", 300, criterion_3),
        ("mechanism output is individually rational and efficient", 300, criterion_4),
        ("flow maximum equals brute-force maximum", 120, criterion_5),
        ("no manipulation on strongly trichotomous profiles", 600, criterion_6),
        ("four-agent family is manipulable, truncations never help", 600, criterion_7),
        ("fixture regression", 60, criterion_8),
        ("efficient weak-core matchings exist and efficient ones are in the core", 600, criterion_9),
        ("large market performance", 10, criterion_10),
    ];
    let mut failures = 0;
    for (k, (title, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let verdict = verdict.and_then(|d| {
            if secs <= *budget as f64 {
                Ok(d)
            } else {
                Err(format!("{d}; exceeded the {budget}s budget"))
            }
        });
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS: {title} ({detail}; {secs:.1}s)", k + 1),
            Err(reason) => {
                failures += 1;
                println!("criterion {:>2} FAIL: {title} ({reason}; {secs:.1}s)", k + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
