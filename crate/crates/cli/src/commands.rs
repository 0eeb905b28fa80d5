use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use exchange_core::audits::{
    brute_force_improvement, certificate_json, check_obvious_manipulability, check_strategy_proofness,
    check_truncation_proofness, efficiency_witness, load_fixture, unambiguously_in_weak_core_bounded, verify_fixture,
    EfficiencyMode, Improvement, OpponentUniverse, FIXTURE_NAMES,
};
use exchange_core::generate::{generate as generate_instance, GeneratorConfig};
use exchange_core::mechanism::{run_ir_priority, run_with_priority, MechanismTrace};
use exchange_core::model::io::{matching_from_json, matching_to_json, InstanceFile};
use exchange_core::model::{trichotomous_profile, DomainSpec, ObjectSet};
use exchange_core::optimize::{max_attractive, WelfareConstraints};
use exchange_core::responsive::{build_punishing_extension, cir_trichotomous, cir_violations};
use exchange_core::{Error, ExactExtension, Instance, MarginalPreference, Matching, TrichotomousPreference};
use serde_json::{json, Value};

use crate::{AuditArgs, BenchArgs, CliError, DomainArg, EfficiencyArg, FixtureArgs, Format, GenerateArgs, Opponents, RunArgs};

type CliResult<T = ()> = Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> CliResult {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("values serialize")
}

fn load(path: &Path) -> CliResult<(Instance, Vec<MarginalPreference>)> {
    let loaded = InstanceFile::from_json(&read(path)?)?.load()?;
    let prefs = loaded
        .preferences
        .ok_or_else(|| CliError::Input(format!("{}: the instance has no preferences", path.display())))?;
    Ok((loaded.instance, prefs))
}

fn names(instance: &Instance, set: &ObjectSet) -> String {
    let n = instance.set_names(set);
    if n.len() == 1 {
        n[0].clone()
    } else {
        format!("{{{}}}", n.join(","))
    }
}

fn mechanism_output(
    instance: &Instance,
    prefs: &[TrichotomousPreference],
    priority: Option<&[String]>,
) -> CliResult<(Instance, Matching, MechanismTrace)> {
    Ok(match priority {
        Some(order) => run_with_priority(instance, prefs, order)?,
        None => {
            let (mu, trace) = run_ir_priority(instance, prefs)?;
            (instance.clone(), mu, trace)
        }
    })
}

pub fn run(args: &RunArgs) -> CliResult {
    let (instance, prefs) = load(&args.input)?;
    let tri = trichotomous_profile(&instance, &prefs)?;
    let (inst, mu, trace) = mechanism_output(&instance, &tri, args.priority.as_deref())?;
    let text = match args.common.format {
        Format::Json => {
            let mut doc = json!({
                "priority": inst.agent_names(),
                "matching": matching_to_json(&inst, &mu),
                "rounds": trace.last_round(),
                "flow_queries": trace.flow_queries,
            });
            if args.trace {
                doc["trace"] = trace.to_json(&inst);
            }
            pretty(&doc)
        }
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "priority: {}", inst.agent_names().join(" > ")).unwrap();
            writeln!(out, "matching: {}", mu.display(&inst)).unwrap();
            for a in inst.agents() {
                writeln!(out, "  {}: {}", inst.agent_name(a), names(&inst, mu.bundle(a))).unwrap();
            }
            writeln!(out, "rounds: {}", trace.last_round()).unwrap();
            writeln!(out, "flow queries: {}", trace.flow_queries).unwrap();
            if args.trace {
                for r in trace.rounds.iter().skip(1) {
                    let promises: Vec<String> = inst
                        .agents()
                        .map(|a| format!("{}:{}", inst.agent_name(a), r.promises[a.0]))
                        .collect();
                    let settled: Vec<&str> = r.non_improvable.iter().map(|&a| inst.agent_name(a)).collect();
                    writeln!(
                        out,
                        "round {}: {} promises [{}] non-improvable {{{}}}",
                        r.round,
                        r.matching.display(&inst),
                        promises.join(" "),
                        settled.join(",")
                    )
                    .unwrap();
                }
            }
            out
        }
    };
    emit(&text, args.common.output.as_deref())
}

/// One audited property: its JSON section and a line of text.
struct Section {
    key: &'static str,
    passed: Option<bool>,
    json: Value,
    line: String,
}

fn verdict_word(passed: Option<bool>) -> &'static str {
    match passed {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "SKIPPED",
    }
}

fn cir_section(instance: &Instance, mu: &Matching, prefs: &[MarginalPreference]) -> Section {
    let violations = cir_violations(instance, mu, prefs);
    let json_violations: Vec<Value> = violations
        .iter()
        .map(|w| {
            let ext: ExactExtension = build_punishing_extension(
                &prefs[w.agent.0],
                w.pivot,
                instance.endowment_size(w.agent),
                instance.num_objects(),
            );
            json!({
                "agent": instance.agent_name(w.agent),
                "pivot": instance.object_name(w.pivot),
                "certificate": certificate_json(instance, &ext),
            })
        })
        .collect();
    let passed = violations.is_empty();
    let line = if passed {
        "component-wise individually rational".to_string()
    } else {
        let ws: Vec<String> = violations
            .iter()
            .map(|w| format!("witness agent {}, pivot {}", instance.agent_name(w.agent), instance.object_name(w.pivot)))
            .collect();
        format!("not CIR; {}", ws.join("; "))
    };
    Section {
        key: "individual_rationality",
        passed: Some(passed),
        json: json!({ "verdict": passed, "violations": json_violations }),
        line,
    }
}

fn efficiency_section(
    instance: &Instance,
    mu: &Matching,
    prefs: &[MarginalPreference],
    tri: Option<&[TrichotomousPreference]>,
    requested: EfficiencyArg,
    bound: usize,
) -> CliResult<Section> {
    let mode = match requested {
        EfficiencyArg::Cycle => EfficiencyMode::Cycle,
        EfficiencyArg::Brute => EfficiencyMode::Brute,
        EfficiencyArg::Auto => match tri {
            Some(t) if cir_trichotomous(instance, mu, t) => EfficiencyMode::Cycle,
            _ => EfficiencyMode::Brute,
        },
    };
    let witness = match (mode, tri) {
        (EfficiencyMode::Cycle, Some(t)) => efficiency_witness(instance, mu, t, EfficiencyMode::Cycle)?,
        (EfficiencyMode::Cycle, None) => {
            return Err(CliError::Input("cycle mode needs trichotomous preferences".into()));
        }
        (EfficiencyMode::Brute, _) => match brute_force_improvement(instance, mu, prefs, bound) {
            Ok(w) => w.map(Improvement::Matching),
            Err(e @ Error::TooLarge { .. }) => {
                return Ok(Section {
                    key: "efficiency",
                    passed: None,
                    json: json!({ "mode": mode, "verdict": null, "skipped": e.to_string() }),
                    line: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        },
    };
    let passed = witness.is_none();
    let line = match &witness {
        None => "unambiguously efficient".to_string(),
        Some(Improvement::Cycle(c)) => format!("improved by cycle {}", c.display(instance)),
        Some(Improvement::Matching(nu)) => format!("improved by {}", nu.display(instance)),
    };
    let mode_name = match mode {
        EfficiencyMode::Cycle => "cycle",
        EfficiencyMode::Brute => "brute",
    };
    Ok(Section {
        key: "efficiency",
        passed: Some(passed),
        json: json!({
            "mode": mode,
            "verdict": passed,
            "witness": witness.map(|w| w.to_json(instance)),
        }),
        line: format!("({mode_name}) {line}"),
    })
}

fn weak_core_section(
    instance: &Instance,
    mu: &Matching,
    tri: Option<&[TrichotomousPreference]>,
    strict_acceptability: bool,
    bound: usize,
) -> CliResult<Section> {
    let skipped = |reason: String| Section {
        key: "weak_core",
        passed: None,
        json: json!({ "strict_acceptability": strict_acceptability, "verdict": null, "skipped": reason }),
        line: reason,
    };
    let Some(t) = tri else {
        return Ok(skipped("preferences are not trichotomous".into()));
    };
    let block = match unambiguously_in_weak_core_bounded(instance, mu, t, strict_acceptability, bound) {
        Ok(b) => b,
        Err(e @ Error::TooLarge { .. }) => return Ok(skipped(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let passed = block.is_none();
    let line = match &block {
        None => "unambiguously in the weak core".to_string(),
        Some(b) => {
            let members: Vec<String> = b
                .coalition
                .iter()
                .zip(&b.reallocation)
                .map(|(&a, x)| format!("{} gets {}", instance.agent_name(a), names(instance, x)))
                .collect();
            format!("blocked: {}", members.join(", "))
        }
    };
    Ok(Section {
        key: "weak_core",
        passed: Some(passed),
        json: json!({
            "strict_acceptability": strict_acceptability,
            "verdict": passed,
            "witness": block.map(|b| b.to_json(instance)),
        }),
        line: format!("(strict acceptability {}) {line}", if strict_acceptability { "on" } else { "off" }),
    })
}

fn need_tri<'a>(tri: Option<&'a [TrichotomousPreference]>, what: &str) -> CliResult<&'a [TrichotomousPreference]> {
    tri.ok_or_else(|| CliError::Input(format!("{what} needs trichotomous preferences")))
}

fn manipulation_line(instance: &Instance, w: &exchange_core::audits::ManipulationWitness) -> String {
    format!(
        "manipulation found: agent {} reporting A={} B={} gets {} instead of {}",
        instance.agent_name(w.agent),
        names(instance, w.misreport.attractive()),
        names(instance, w.misreport.bearable()),
        names(instance, &w.misreport_bundle),
        names(instance, &w.truthful_bundle)
    )
}

pub fn audit(args: &AuditArgs) -> CliResult {
    let (instance, prefs) = load(&args.input)?;
    let tri_owned = trichotomous_profile(&instance, &prefs).ok();
    let tri = tri_owned.as_deref();
    let (mu, source) = if args.mechanism {
        let t = need_tri(tri, "--mechanism")?;
        let (reordered, mu, _) = mechanism_output(&instance, t, args.priority.as_deref())?;
        let mu = matching_from_json(&instance, &matching_to_json(&reordered, &mu))?;
        (mu, "mechanism")
    } else {
        let path = args
            .matching
            .as_deref()
            .ok_or_else(|| CliError::Input("either --matching or --mechanism is required".into()))?;
        let map = serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        (matching_from_json(&instance, &map)?, "file")
    };

    let mut sections = vec![
        cir_section(&instance, &mu, &prefs),
        efficiency_section(&instance, &mu, &prefs, tri, args.efficiency, args.bound)?,
        weak_core_section(&instance, &mu, tri, args.strict_acceptability, args.bound)?,
    ];
    if args.sp {
        let t = need_tri(tri, "--sp")?;
        let (domain, label) = match args.domain {
            DomainArg::Trichotomous => (DomainSpec::trichotomous(), "trichotomous"),
            DomainArg::StronglyTrichotomous => (DomainSpec::strongly_trichotomous(), "strongly-trichotomous"),
        };
        let w = check_strategy_proofness(&instance, t, &domain)?;
        sections.push(Section {
            key: "strategy_proofness",
            passed: Some(w.is_none()),
            line: format!(
                "({label}) {}",
                w.as_ref().map_or("no manipulation found".into(), |w| manipulation_line(&instance, w))
            ),
            json: json!({ "domain": label, "verdict": w.is_none(), "witness": w.map(|w| w.to_json(&instance)) }),
        });
    }
    if args.truncation {
        let t = need_tri(tri, "--truncation")?;
        let w = check_truncation_proofness(&instance, t)?;
        sections.push(Section {
            key: "truncation_proofness",
            passed: Some(w.is_none()),
            line: w.as_ref().map_or("no manipulation found".into(), |w| manipulation_line(&instance, w)),
            json: json!({ "verdict": w.is_none(), "witness": w.map(|w| w.to_json(&instance)) }),
        });
    }
    if args.om {
        let t = need_tri(tri, "--om")?;
        let universe = match args.opponents {
            Opponents::Sampled(count) => OpponentUniverse::Sampled { count, seed: args.seed },
            Opponents::Exhaustive => OpponentUniverse::Exhaustive,
        };
        let w = check_obvious_manipulability(&instance, t, &universe)?;
        let opponents = match universe {
            OpponentUniverse::Exhaustive => json!("exhaustive"),
            OpponentUniverse::Sampled { count, seed } => json!({ "sampled": count, "seed": seed }),
        };
        sections.push(Section {
            key: "obvious_manipulability",
            passed: Some(w.is_none()),
            line: w.as_ref().map_or("no obvious manipulation found".into(), |w| {
                format!(
                    "obvious manipulation found: agent {} ({} case, bundle {})",
                    instance.agent_name(w.agent),
                    serde_json::to_value(w.case).unwrap().as_str().unwrap_or_default(),
                    names(&instance, &w.bundle)
                )
            }),
            json: json!({ "opponents": opponents, "verdict": w.is_none(), "witness": w.map(|w| w.to_json(&instance)) }),
        });
    }

    let passed = sections.iter().all(|s| s.passed != Some(false));
    let text = match args.common.format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("source".into(), json!(source));
            doc.insert("matching".into(), json!(matching_to_json(&instance, &mu)));
            for s in &sections {
                doc.insert(s.key.into(), s.json.clone());
            }
            doc.insert("verdict".into(), json!(passed));
            pretty(&Value::Object(doc))
        }
        Format::Text => {
            let mut out = format!("matching ({source}): {}\n", mu.display(&instance));
            for s in &sections {
                let title = s.key.replace('_', " ");
                writeln!(out, "{title}: {} {}", verdict_word(s.passed), s.line).unwrap();
            }
            writeln!(out, "overall: {}", if passed { "PASS" } else { "FAIL" }).unwrap();
            out
        }
    };
    emit(&text, args.common.output.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::AuditFailed)
    }
}

pub fn generate(args: &GenerateArgs) -> CliResult {
    let config = GeneratorConfig {
        agents: args.agents,
        max_endowment: args.max_endowment,
        objects: args.objects,
        attractive_probability: args.attractive_probability,
        bearable_probability: args.bearable_probability,
        strongly: args.strongly,
    };
    let g = generate_instance(&config, args.seed)?;
    emit(&g.to_instance_file(&config, args.seed).to_json()?, args.output.as_deref())
}

fn parse_size(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Input(format!("size `{s}` is not of the form AGENTSxOBJECTS"));
    let (a, o) = s.trim().split_once('x').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, o.parse().map_err(|_| bad())?))
}

pub fn bench(args: &BenchArgs) -> CliResult {
    if args.repeats == 0 {
        return Err(CliError::Input("--repeats must be positive".into()));
    }
    let sizes = args.sizes.iter().map(|s| parse_size(s)).collect::<CliResult<Vec<_>>>()?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input(e.to_string());
    csv.write_record([
        "agents",
        "objects",
        "seed",
        "repeats",
        "rounds",
        "flow_queries",
        "query_bound",
        "mechanism_ms",
        "max_attractive_us",
    ])
    .map_err(io)?;
    for (n, m) in sizes {
        let config = GeneratorConfig {
            agents: n,
            max_endowment: (2 * m).div_ceil(n.max(1)).max(1),
            objects: Some(m),
            attractive_probability: args.attractive_probability,
            bearable_probability: args.bearable_probability,
            strongly: false,
        };
        let g = generate_instance(&config, args.seed)?;
        let (inst, prefs) = (&g.instance, &g.preferences);
        let start = Instant::now();
        let mut last = None;
        for _ in 0..args.repeats {
            last = Some(run_ir_priority(inst, prefs)?);
        }
        let mechanism_ms = start.elapsed().as_secs_f64() * 1e3 / args.repeats as f64;
        let (_, trace) = last.expect("at least one repeat");

        let bearable: Vec<ObjectSet> = prefs.iter().map(|p| p.bearable().clone()).collect();
        let constraints = WelfareConstraints::improving(inst, prefs, &bearable, &Matching::endowment(inst));
        let start = Instant::now();
        for a in inst.agents() {
            max_attractive(inst, &constraints, a)?;
        }
        let max_attractive_us = start.elapsed().as_secs_f64() * 1e6 / n as f64;

        let rounds = trace.last_round();
        csv.write_record([
            n.to_string(),
            m.to_string(),
            args.seed.to_string(),
            args.repeats.to_string(),
            rounds.to_string(),
            trace.flow_queries.to_string(),
            (2 * n * (rounds + 1)).to_string(),
            format!("{mechanism_ms:.3}"),
            format!("{max_attractive_us:.1}"),
        ])
        .map_err(io)?;
    }
    let bytes = csv.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    emit(&String::from_utf8(bytes).expect("CSV is UTF-8"), args.output.as_deref())
}

pub fn fixture(args: &FixtureArgs) -> CliResult {
    let output = args.common.output.as_deref();
    let Some(name) = &args.name else {
        let text = match args.common.format {
            Format::Json => pretty(&json!(FIXTURE_NAMES)),
            Format::Text => {
                let mut out = String::new();
                for name in FIXTURE_NAMES {
                    let f = load_fixture(name)?;
                    writeln!(out, "{name:<18} {}", f.description).unwrap();
                }
                out
            }
        };
        return emit(&text, output);
    };
    let f = load_fixture(name)?;
    if args.instance {
        return emit(&f.to_instance_file().to_json()?, output);
    }
    let report = verify_fixture(&f)?;
    let text = match args.common.format {
        Format::Json => pretty(&serde_json::to_value(&report).expect("reports serialize")),
        Format::Text => {
            let mut out = format!("{} ({})\n", f.name, if f.hard { "hard" } else { "soft" });
            for c in &report.checks {
                let detail = if c.detail.is_empty() {
                    String::new()
                } else {
                    format!(": {}", c.detail)
                };
                writeln!(out, "  {} {}{detail}", if c.passed { "PASS" } else { "FAIL" }, c.label).unwrap();
            }
            out
        }
    };
    emit(&text, output)?;
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::AuditFailed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use exchange_core::AgentId;

    #[test]
    fn sizes_parse() {
        assert_eq!(parse_size("50x200").unwrap(), (50, 200));
        assert!(parse_size("50").is_err());
        assert!(parse_size("ax3").is_err());
    }

    #[test]
    fn single_object_names_are_bare() {
        let inst = Instance::from_endowments(&[("1", &["o", "p"][..])]).unwrap();
        assert_eq!(names(&inst, inst.endowment(AgentId(0))), "{o,p}");
        let one: ObjectSet = [inst.object("o").unwrap()].into_iter().collect();
        assert_eq!(names(&inst, &one), "o");
    }
}
