//! Random static-routing topologies and a forwarding model written
//! independently of `t2n_core::netsim`, for comparing ping results.
//! Shared by the core tests and the CLI acceptance target.

use std::collections::BTreeSet;
use std::net::Ipv4Addr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use t2n_core::netsim::{instantiate, ping, PingFailure, ProbeSource};
use t2n_core::topology::{RouteDestination, Via};
use t2n_core::{
    Connection, DeviceSpec, Endpoint, InterfaceSpec, NodeType, StaticRoute, TopologyDocument,
};

#[derive(Clone, Debug)]
struct Iface {
    name: String,
    addr: u32,
    plen: u8,
    peer: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
struct Router {
    ifaces: Vec<Iface>,
    routes: Vec<(u32, u8, u32)>,
}

fn mask(plen: u8) -> u32 {
    if plen == 0 {
        0
    } else {
        u32::MAX << (32 - plen)
    }
}

#[derive(Debug, PartialEq)]
enum Step {
    Deliver(usize),
    Forward(usize),
    NoRoute,
    Unknown,
}

/// Connected and static candidates scanned by hand; ties go to connected,
/// then to the lowest next hop.
fn step(rs: &[Router], at: usize, dst: u32) -> (Step, Option<usize>) {
    let r = &rs[at];
    if r.ifaces.iter().any(|i| i.addr == dst) {
        return (Step::Deliver(at), None);
    }
    // (plen, is_static, next_hop, egress)
    let mut best: Option<(u8, bool, u32, Option<usize>)> = None;
    let mut consider = |cand: (u8, bool, u32, Option<usize>)| {
        best = match best {
            None => Some(cand),
            Some(b) => {
                let better = cand.0 > b.0
                    || (cand.0 == b.0 && (!cand.1 && b.1 || (cand.1 == b.1 && cand.2 < b.2)));
                Some(if better { cand } else { b })
            }
        }
    };
    for (k, i) in r.ifaces.iter().enumerate() {
        if dst & mask(i.plen) == i.addr & mask(i.plen) {
            consider((i.plen, false, 0, Some(k)));
        }
    }
    for &(net, plen, nh) in &r.routes {
        if dst & mask(plen) == net {
            consider((plen, true, nh, None));
        }
    }
    let Some((_, is_static, nh, egress)) = best else {
        return (Step::NoRoute, None);
    };
    let (egress, target) = if is_static {
        let mut e: Option<(u8, usize)> = None;
        for (k, i) in r.ifaces.iter().enumerate() {
            if nh & mask(i.plen) == i.addr & mask(i.plen) && e.is_none_or(|(p, _)| i.plen > p) {
                e = Some((i.plen, k));
            }
        }
        match e {
            Some((_, k)) => (k, nh),
            None => return (Step::NoRoute, None),
        }
    } else {
        (egress.unwrap(), dst)
    };
    match r.ifaces[egress].peer {
        Some((pr, pi)) if rs[pr].ifaces[pi].addr == target => (Step::Forward(pr), Some(egress)),
        _ => (Step::Unknown, Some(egress)),
    }
}

#[derive(Debug, PartialEq)]
enum Fate {
    Delivered(usize, Vec<usize>),
    NoRoute(Vec<usize>),
    Unknown(Vec<usize>),
    Loop,
}

fn follow(rs: &[Router], from: usize, dst: u32) -> Fate {
    let mut path = vec![from];
    let mut seen = BTreeSet::from([from]);
    let mut at = from;
    loop {
        match step(rs, at, dst).0 {
            Step::Deliver(n) => return Fate::Delivered(n, path),
            Step::NoRoute => return Fate::NoRoute(path),
            Step::Unknown => return Fate::Unknown(path),
            Step::Forward(n) => {
                if !seen.insert(n) {
                    return Fate::Loop;
                }
                path.push(n);
                at = n;
            }
        }
    }
}

fn random_routers(rng: &mut ChaCha8Rng) -> Vec<Router> {
    let n = rng.gen_range(2..=6);
    let mut rs: Vec<Router> = (0..n)
        .map(|k| {
            let mut ifaces = Vec::new();
            if rng.gen_bool(0.8) {
                ifaces.push(Iface {
                    name: "Loopback0".into(),
                    addr: u32::from(Ipv4Addr::new(10, 0, k as u8, 1)),
                    plen: 24,
                    peer: None,
                });
            }
            Router {
                ifaces,
                routes: Vec::new(),
            }
        })
        .collect();
    let links = rng.gen_range(1..=10);
    for l in 0..links {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n);
        while b == a {
            b = rng.gen_range(0..n);
        }
        let base = u32::from(Ipv4Addr::new(172, 16, l as u8, 0));
        let ia = rs[a].ifaces.len();
        let ib = rs[b].ifaces.len();
        rs[a].ifaces.push(Iface {
            name: format!("GigabitEthernet0/{l}"),
            addr: base + 1,
            plen: 30,
            peer: Some((b, ib)),
        });
        rs[b].ifaces.push(Iface {
            name: format!("GigabitEthernet0/{l}"),
            addr: base + 2,
            plen: 30,
            peer: Some((a, ia)),
        });
    }
    let all_addrs: Vec<u32> = rs
        .iter()
        .flat_map(|r| r.ifaces.iter().map(|i| i.addr))
        .collect();
    let routes = rng.gen_range(0..=12);
    for _ in 0..routes {
        let owner = rng.gen_range(0..n);
        let peers: Vec<u32> = rs[owner]
            .ifaces
            .iter()
            .filter_map(|i| i.peer)
            .map(|(p, k)| rs[p].ifaces[k].addr)
            .collect();
        let Some(&nh) = peers.choose(rng) else {
            continue;
        };
        let (net, plen) = match rng.gen_range(0..3) {
            0 => (u32::from(Ipv4Addr::new(10, 0, rng.gen_range(0..6), 0)), 24),
            1 => (u32::from(Ipv4Addr::new(10, 0, 0, 0)), 16),
            _ => {
                let a = *all_addrs.choose(rng).unwrap();
                (a & mask(30), 30)
            }
        };
        rs[owner].routes.push((net, plen, nh));
    }
    rs
}

fn host(k: usize) -> String {
    format!("R{}", k + 1)
}

fn to_document(rs: &[Router]) -> TopologyDocument {
    let mut doc = TopologyDocument::default();
    for (k, r) in rs.iter().enumerate() {
        let mut d = DeviceSpec::new(host(k), NodeType::Router);
        for i in &r.ifaces {
            d.interfaces.push(InterfaceSpec {
                name: i.name.clone(),
                ipv4: Ipv4Addr::from(i.addr).to_string(),
                prefix_len: i.plen,
                network_id: i.peer.map(|_| ((i.addr >> 8) & 0xff) + 1),
                is_loopback: i.peer.is_none(),
            });
        }
        for &(net, plen, nh) in &r.routes {
            d.static_routes.push(StaticRoute {
                destination: Some(RouteDestination {
                    address: Ipv4Addr::from(net).to_string(),
                    prefix_len: plen,
                }),
                via: Some(Via::Address(Ipv4Addr::from(nh).to_string())),
                resolved_next_hop: Some(Ipv4Addr::from(nh)),
            });
        }
        doc.devices.push(d);
    }
    for (k, r) in rs.iter().enumerate() {
        for i in &r.ifaces {
            if let Some((p, pi)) = i.peer {
                if k < p {
                    doc.connections.push(Connection {
                        endpoint_a: Endpoint::new(host(k), i.name.clone()),
                        endpoint_b: Endpoint::new(host(p), rs[p].ifaces[pi].name.clone()),
                        network_id: ((i.addr >> 8) & 0xff) + 1,
                    });
                }
            }
        }
    }
    doc
}

fn names(path: &[usize]) -> Vec<String> {
    path.iter().map(|&k| host(k)).collect()
}

/// What one comparison run found.
#[derive(Debug, Default)]
pub struct Summary {
    pub cases: usize,
    pub probes: usize,
    pub delivered: usize,
    pub failed: usize,
    pub disagreements: Vec<String>,
}

macro_rules! agree {
    ($out:expr, $got:expr, $want:expr, $ctx:expr) => {
        if $got != $want {
            $out.disagreements
                .push(format!("{}: simulator {:?}, model {:?}", $ctx, $got, $want));
        }
    };
}

/// Every router pings every interface address plus one unknown address,
/// over `cases` random topologies.
pub fn compare(cases: usize, seed: u64) -> Summary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Summary {
        cases,
        ..Default::default()
    };
    for case in 0..cases {
        let rs = random_routers(&mut rng);
        let net = match instantiate(&to_document(&rs)) {
            Ok(n) => n,
            Err(e) => {
                out.disagreements
                    .push(format!("case {case}: does not instantiate: {e}"));
                continue;
            }
        };
        for src in 0..rs.len() {
            let mut targets: Vec<u32> = rs
                .iter()
                .flat_map(|r| r.ifaces.iter().map(|i| i.addr))
                .collect();
            targets.push(u32::from(Ipv4Addr::new(10, 0, 9, 9)));
            for dst in targets {
                out.probes += 1;
                let ctx = format!("case {case} R{} -> {}", src + 1, Ipv4Addr::from(dst));
                let got = match ping(&net, &host(src), Ipv4Addr::from(dst), &ProbeSource::Auto) {
                    Ok(p) => p,
                    Err(e) => {
                        out.disagreements.push(format!("{ctx}: {e}"));
                        continue;
                    }
                };
                if !got.success {
                    out.failed += 1;
                }

                let source = match rs[src].ifaces.iter().find(|i| i.name == "Loopback0") {
                    Some(lo) => Some(lo.addr),
                    None if rs[src].ifaces.iter().any(|i| i.addr == dst) => Some(dst),
                    None => step(&rs, src, dst).1.map(|e| rs[src].ifaces[e].addr),
                };
                agree!(out, got.source_address, source.map(Ipv4Addr::from), ctx);

                if rs[src].ifaces.iter().any(|i| i.addr == dst) {
                    agree!(out, got.success, true, ctx);
                    continue;
                }
                match follow(&rs, src, dst) {
                    Fate::Loop => {
                        agree!(out, got.failure_reason, Some(PingFailure::TtlExceeded), ctx)
                    }
                    Fate::NoRoute(p) => {
                        agree!(
                            out,
                            got.failure_reason,
                            Some(PingFailure::NoRouteForward),
                            ctx
                        );
                        agree!(out, got.forward_path, names(&p), ctx);
                    }
                    Fate::Unknown(p) => {
                        agree!(
                            out,
                            got.failure_reason,
                            Some(PingFailure::DestinationUnknown),
                            ctx
                        );
                        agree!(out, got.forward_path, names(&p), ctx);
                    }
                    Fate::Delivered(owner, p) => {
                        agree!(out, got.forward_path, names(&p), ctx);
                        let Some(back_to) = source else {
                            out.disagreements
                                .push(format!("{ctx}: delivered without a source"));
                            continue;
                        };
                        match follow(&rs, owner, back_to) {
                            Fate::Delivered(n, bp) if n == src => {
                                agree!(out, got.success, true, ctx);
                                agree!(out, got.reverse_path, names(&bp), ctx);
                                out.delivered += 1;
                            }
                            Fate::Loop => {
                                agree!(out, got.failure_reason, Some(PingFailure::TtlExceeded), ctx)
                            }
                            _ => {
                                agree!(out, got.success, false, ctx);
                                agree!(
                                    out,
                                    got.failure_reason,
                                    Some(PingFailure::NoRouteReverse),
                                    ctx
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    out
}
