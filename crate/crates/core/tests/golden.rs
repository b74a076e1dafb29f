use std::fs;
use std::path::{Path, PathBuf};

use t2n_core::netsim::{instantiate, ping, show_config, PingFailure, ProbeSource};
use t2n_core::{
    extract_topology, parse_scs, render_scs, validate_topology, Strictness, TopologyDocument,
};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(rel: &str) -> String {
    fs::read_to_string(fixtures().join(rel)).unwrap()
}

fn topo(rel: &str) -> TopologyDocument {
    extract_topology(&parse_scs(&read(rel)).unwrap(), Strictness::Strict)
        .unwrap()
        .topology
}

#[test]
fn three_router_topology_json() {
    assert_eq!(
        topo("scs/three_router_ordering_a.scs").to_canonical_json(),
        read("golden/topology_three_router.json")
    );
    assert_eq!(
        topo("scs/three_router_ordering_b.scs").to_canonical_json(),
        read("golden/topology_three_router.json")
    );
    let back = TopologyDocument::from_json(&read("golden/topology_three_router.json")).unwrap();
    assert_eq!(back, topo("scs/three_router_ordering_a.scs").canonical());
}

#[test]
fn rendered_scs() {
    let doc = parse_scs(&read("scs/three_router_ordering_b.scs")).unwrap();
    let rendered = render_scs(&doc);
    assert_eq!(
        rendered,
        read("golden/scs_three_router_ordering_b.rendered.scs")
    );
    assert_eq!(parse_scs(&rendered).unwrap(), doc);
}

#[test]
fn transit_router_show_config() {
    let net = instantiate(&topo("replay/three_router_transit.scs")).unwrap();
    assert_eq!(
        show_config(&net, "R2").unwrap(),
        read("golden/show_config_three_router_transit_r2.txt")
    );
}

/// Loopback-to-loopback ping in both directions; `None` when both succeed,
/// otherwise the first failure.
fn loopback_pings(t: &TopologyDocument, a: (&str, &str), b: (&str, &str)) -> Option<PingFailure> {
    let net = instantiate(t).unwrap();
    for ((src, _), (_, dst)) in [(a, b), (b, a)] {
        let r = ping(&net, src, dst.parse().unwrap(), &ProbeSource::Auto).unwrap();
        if !r.success {
            return r.failure_reason;
        }
    }
    None
}

#[test]
fn every_static_route_is_needed() {
    for (rel, a, b) in [
        (
            "replay/two_router_loopbacks.scs",
            ("R1", "192.168.1.1"),
            ("R2", "192.168.2.1"),
        ),
        (
            "replay/three_router_transit.scs",
            ("R1", "192.168.1.1"),
            ("R3", "192.168.2.1"),
        ),
    ] {
        let t = topo(rel);
        assert!(validate_topology(&t).is_valid());
        assert_eq!(loopback_pings(&t, a, b), None, "{rel}");
        let mut mutants = 0;
        for d in 0..t.devices.len() {
            for r in 0..t.devices[d].static_routes.len() {
                let mut m = t.clone();
                m.devices[d].static_routes.remove(r);
                assert!(
                    loopback_pings(&m, a, b).is_some(),
                    "{rel}: route {r} of {} is redundant",
                    t.devices[d].hostname
                );
                mutants += 1;
            }
        }
        assert!(mutants >= 2);
    }
}
