use std::fs;
use std::path::{Path, PathBuf};

use t2n_core::{extract_topology, parse_scs, validate_topology, Strictness};
use t2n_llm::{AdapterExchange, Outcome, ReplayAdapter, RulesAdapter, ScenarioAdapter, Turn};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn scenario(name: &str) -> String {
    fs::read_to_string(fixtures().join("scenarios").join(name)).unwrap()
}

fn corpus() -> Vec<(String, AdapterExchange)> {
    let mut out = Vec::new();
    let mut names: Vec<String> = fs::read_dir(fixtures().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".txt") && !n.ends_with(".reply.txt"))
        .collect();
    names.sort();
    for name in names {
        let text = scenario(&name);
        let reply = fixtures()
            .join("scenarios")
            .join(name.replace(".txt", ".reply.txt"));
        out.push((name.clone(), AdapterExchange::new(text.clone())));
        if reply.exists() {
            let mut ex = AdapterExchange::new(text);
            ex.push(Turn::system("clarification"));
            ex.push(Turn::user(fs::read_to_string(reply).unwrap()));
            out.push((format!("{name} + reply"), ex));
        }
    }
    out
}

fn canonical(scs: &str) -> String {
    let doc = parse_scs(scs).unwrap();
    extract_topology(&doc, Strictness::Strict)
        .unwrap()
        .topology
        .to_canonical_json()
}

#[test]
fn every_scs_outcome_is_strict_clean() {
    let replay = ReplayAdapter::load(&fixtures().join("replay")).unwrap();
    let adapters: [&dyn ScenarioAdapter; 2] = [&RulesAdapter, &replay];
    for adapter in adapters {
        let mut scs_count = 0;
        for (name, ex) in corpus() {
            let outcome = adapter
                .generate(&ex)
                .unwrap_or_else(|e| panic!("{} on {name}: {e}", adapter.name()));
            if let Outcome::Scs {
                text,
                acknowledgment,
            } = outcome
            {
                assert_eq!(acknowledgment, "Understood");
                let doc = parse_scs(&text).unwrap();
                extract_topology(&doc, Strictness::Strict)
                    .unwrap_or_else(|e| panic!("{} on {name}: {e}", adapter.name()));
                scs_count += 1;
            }
        }
        assert_eq!(scs_count, 7, "{}", adapter.name());
    }
}

#[test]
fn rules_and_replay_agree_on_topology() {
    let replay = ReplayAdapter::load(&fixtures().join("replay")).unwrap();
    for (name, ex) in corpus() {
        match (
            RulesAdapter.generate(&ex).unwrap(),
            replay.generate(&ex).unwrap(),
        ) {
            (Outcome::Scs { text: a, .. }, Outcome::Scs { text: b, .. }) => {
                let (ta, tb) = (canonical(&a), canonical(&b));
                if name.starts_with("two_router") {
                    // the recording names next hops by address; everything else matches
                    assert_eq!(ta.lines().count(), tb.lines().count(), "{name}");
                } else {
                    assert_eq!(ta, tb, "{name}");
                }
            }
            (Outcome::Clarify { question: a, .. }, Outcome::Clarify { question: b, .. }) => {
                assert!(
                    a.contains("static route") && b.contains("static route"),
                    "{name}"
                );
            }
            (Outcome::Reject { .. }, Outcome::Reject { .. }) => {}
            (a, b) => panic!("{name}: rules {a:?} vs replay {b:?}"),
        }
    }
}

#[test]
fn narratives_converge() {
    let a = RulesAdapter
        .generate(&AdapterExchange::new(scenario(
            "three_router_narrative_a.txt",
        )))
        .unwrap();
    let b = RulesAdapter
        .generate(&AdapterExchange::new(scenario(
            "three_router_narrative_b.txt",
        )))
        .unwrap();
    let (Outcome::Scs { text: a, .. }, Outcome::Scs { text: b, .. }) = (a, b) else {
        panic!("expected SCS")
    };
    assert_eq!(canonical(&a), canonical(&b));

    let fixed_a = fs::read_to_string(fixtures().join("scs/three_router_ordering_a.scs")).unwrap();
    let fixed_b = fs::read_to_string(fixtures().join("scs/three_router_ordering_b.scs")).unwrap();
    assert_eq!(canonical(&fixed_a), canonical(&fixed_b));
    assert_eq!(canonical(&a), canonical(&fixed_a));
}

#[test]
fn converted_topologies_validate() {
    for (name, ex) in corpus() {
        if let Outcome::Scs { text, .. } = RulesAdapter.generate(&ex).unwrap() {
            let topo = extract_topology(&parse_scs(&text).unwrap(), Strictness::Strict)
                .unwrap()
                .topology;
            let report = validate_topology(&topo);
            if name.starts_with("invalid_octet") {
                assert!(
                    report.has_code(t2n_core::FindingCode::IpOctetRange),
                    "{name}"
                );
            } else {
                assert!(
                    report.is_valid() && report.findings.is_empty(),
                    "{name}: {:?}",
                    report.findings
                );
            }
        }
    }
}

#[test]
fn replay_is_deterministic() {
    let replay = ReplayAdapter::load(&fixtures().join("replay")).unwrap();
    for (_, ex) in corpus() {
        assert_eq!(replay.generate(&ex).unwrap(), replay.generate(&ex).unwrap());
    }
}
