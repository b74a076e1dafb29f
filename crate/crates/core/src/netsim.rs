//! Built-in Layer-3 simulator.
//!
//! A [`SimNetwork`] holds one node per device, point-to-point links keyed by
//! network id, and per-node routing tables with connected and static routes.
//! Forwarding is hop-by-hop longest-prefix match with a TTL of 64; [`ping`]
//! requires both the echo request and the echo reply to be delivered.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::Ipv4Addr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipv4::prefix_to_mask;
use crate::topology::{NodeType, TopologyDocument};

pub const DEFAULT_TTL: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("static route {index} on {device} has no resolved next hop")]
    UnresolvedRoute { device: String, index: usize },
    #[error(
        "network {network_id} has {members} endpoints; only point-to-point links are supported"
    )]
    MultiAccessLinkUnsupported { network_id: u32, members: usize },
    #[error("{device}: invalid address on {interface}")]
    InvalidAddress { device: String, interface: String },
    #[error("unknown device `{0}`")]
    UnknownDevice(String),
    #[error("{device} has no interface `{interface}`")]
    UnknownInterface { device: String, interface: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Connected,
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NextHop {
    Connected { interface: String },
    Address(Ipv4Addr),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RibEntry {
    pub destination: Ipv4Net,
    pub next_hop: NextHop,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimInterface {
    pub name: String,
    pub address: Ipv4Addr,
    pub prefix_len: u8,
    pub up: bool,
    pub network_id: Option<u32>,
}

impl SimInterface {
    pub fn subnet(&self) -> Ipv4Net {
        Ipv4Net::new(self.address, self.prefix_len)
            .expect("prefix checked at instantiation")
            .trunc()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimNode {
    pub hostname: String,
    pub node_type: NodeType,
    pub interfaces: Vec<SimInterface>,
    pub static_routes: Vec<(Ipv4Net, Ipv4Addr)>,
    pub rib: Vec<RibEntry>,
}

impl SimNode {
    fn rebuild_rib(&mut self) {
        let mut rib: Vec<RibEntry> = Vec::new();
        for i in self.interfaces.iter().filter(|i| i.up) {
            let entry = RibEntry {
                destination: i.subnet(),
                next_hop: NextHop::Connected {
                    interface: i.name.clone(),
                },
                origin: Origin::Connected,
            };
            if !rib.contains(&entry) {
                rib.push(entry);
            }
        }
        for (dest, nh) in &self.static_routes {
            let entry = RibEntry {
                destination: *dest,
                next_hop: NextHop::Address(*nh),
                origin: Origin::Static,
            };
            if !rib.contains(&entry) {
                rib.push(entry);
            }
        }
        self.rib = rib;
    }

    /// True when one of the node's up interfaces carries `addr`.
    pub fn owns(&self, addr: Ipv4Addr) -> bool {
        self.interfaces.iter().any(|i| i.up && i.address == addr)
    }

    pub fn interface(&self, name: &str) -> Option<&SimInterface> {
        self.interfaces.iter().find(|i| i.name == name)
    }

    /// Lowest-numbered loopback, if any.
    pub fn primary_loopback(&self) -> Option<&SimInterface> {
        self.interfaces
            .iter()
            .filter(|i| i.up && i.name.starts_with("Loopback"))
            .min_by_key(|i| {
                i.name["Loopback".len()..]
                    .parse::<u32>()
                    .unwrap_or(u32::MAX)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkMember {
    pub hostname: String,
    pub interface: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimNetwork {
    pub nodes: BTreeMap<String, SimNode>,
    pub links: BTreeMap<u32, Vec<LinkMember>>,
    epoch: u64,
}

/// Selects the route with the longest prefix covering `dst`; ties prefer
/// connected over static, then the lowest next-hop address.
pub fn longest_prefix_match(rib: &[RibEntry], dst: Ipv4Addr) -> Option<&RibEntry> {
    rib.iter()
        .filter(|r| r.destination.contains(&dst))
        .min_by(|a, b| {
            b.destination
                .prefix_len()
                .cmp(&a.destination.prefix_len())
                .then(a.origin.cmp(&b.origin))
                .then_with(|| match (&a.next_hop, &b.next_hop) {
                    (NextHop::Address(x), NextHop::Address(y)) => x.cmp(y),
                    _ => std::cmp::Ordering::Equal,
                })
        })
}

pub fn instantiate(topo: &TopologyDocument) -> Result<SimNetwork, SimError> {
    let mut net = SimNetwork::default();
    for d in &topo.devices {
        let mut node = SimNode {
            hostname: d.hostname.clone(),
            node_type: d.node_type,
            interfaces: Vec::new(),
            static_routes: Vec::new(),
            rib: Vec::new(),
        };
        for i in &d.interfaces {
            let invalid = || SimError::InvalidAddress {
                device: d.hostname.clone(),
                interface: i.name.clone(),
            };
            let address = i.ipv4().map_err(|_| invalid())?;
            if i.prefix_len > 32 {
                return Err(invalid());
            }
            node.interfaces.push(SimInterface {
                name: i.name.clone(),
                address,
                prefix_len: i.prefix_len,
                up: true,
                network_id: i.network_id,
            });
        }
        for (index, r) in d.static_routes.iter().enumerate() {
            let unresolved = || SimError::UnresolvedRoute {
                device: d.hostname.clone(),
                index,
            };
            let dest = r
                .destination
                .as_ref()
                .and_then(|d| d.network())
                .ok_or_else(unresolved)?;
            let nh = r.resolved_next_hop.ok_or_else(unresolved)?;
            node.static_routes.push((dest.trunc(), nh));
        }
        node.rebuild_rib();
        net.nodes.insert(d.hostname.clone(), node);
    }
    for c in &topo.connections {
        let members = net.links.entry(c.network_id).or_default();
        for ep in [&c.endpoint_a, &c.endpoint_b] {
            members.push(LinkMember {
                hostname: ep.device.clone(),
                interface: ep.interface.clone(),
            });
        }
    }
    if let Some((id, m)) = net.links.iter().find(|(_, m)| m.len() != 2) {
        return Err(SimError::MultiAccessLinkUnsupported {
            network_id: *id,
            members: m.len(),
        });
    }
    net.epoch = 1;
    Ok(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PingFailure {
    NoRouteForward,
    NoRouteReverse,
    TtlExceeded,
    DestinationUnknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PingResult {
    pub success: bool,
    pub source_address: Option<Ipv4Addr>,
    pub destination: Ipv4Addr,
    pub forward_path: Vec<String>,
    pub reverse_path: Vec<String>,
    pub failure_reason: Option<PingFailure>,
    pub epoch: u64,
}

/// Where a packet ended up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkOutcome {
    Delivered(String),
    NoRoute,
    DestinationUnknown,
    TtlExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub path: Vec<String>,
    pub outcome: WalkOutcome,
}

/// Source of the echo request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeSource {
    /// Lowest-numbered loopback, else the egress interface.
    Auto,
    Interface(String),
    Address(Ipv4Addr),
}

impl SimNetwork {
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn node(&self, hostname: &str) -> Result<&SimNode, SimError> {
        self.nodes
            .get(hostname)
            .ok_or_else(|| SimError::UnknownDevice(hostname.to_string()))
    }

    fn node_mut(&mut self, hostname: &str) -> Result<&mut SimNode, SimError> {
        self.nodes
            .get_mut(hostname)
            .ok_or_else(|| SimError::UnknownDevice(hostname.to_string()))
    }

    pub fn owner_of(&self, addr: Ipv4Addr) -> Option<&SimNode> {
        self.nodes.values().find(|n| n.owns(addr))
    }

    /// Removes and returns the static route at `index` on `hostname`.
    pub fn remove_static_route(
        &mut self,
        hostname: &str,
        index: usize,
    ) -> Result<(Ipv4Net, Ipv4Addr), SimError> {
        let node = self.node_mut(hostname)?;
        if index >= node.static_routes.len() {
            return Err(SimError::UnresolvedRoute {
                device: hostname.to_string(),
                index,
            });
        }
        let removed = node.static_routes.remove(index);
        node.rebuild_rib();
        self.epoch += 1;
        Ok(removed)
    }

    pub fn add_static_route(
        &mut self,
        hostname: &str,
        dest: Ipv4Net,
        next_hop: Ipv4Addr,
    ) -> Result<(), SimError> {
        let node = self.node_mut(hostname)?;
        node.static_routes.push((dest.trunc(), next_hop));
        node.rebuild_rib();
        self.epoch += 1;
        Ok(())
    }

    pub fn set_interface_state(
        &mut self,
        hostname: &str,
        interface: &str,
        up: bool,
    ) -> Result<(), SimError> {
        let node = self.node_mut(hostname)?;
        let iface = node
            .interfaces
            .iter_mut()
            .find(|i| i.name == interface)
            .ok_or_else(|| SimError::UnknownInterface {
                device: hostname.to_string(),
                interface: interface.to_string(),
            })?;
        iface.up = up;
        node.rebuild_rib();
        self.epoch += 1;
        Ok(())
    }

    fn peer_across(&self, hostname: &str, interface: &str) -> Option<&SimNode> {
        let node = self.nodes.get(hostname)?;
        let network_id = node.interface(interface)?.network_id?;
        let peer = self
            .links
            .get(&network_id)?
            .iter()
            .find(|m| m.hostname != hostname || m.interface != interface)?;
        let peer_node = self.nodes.get(&peer.hostname)?;
        peer_node
            .interface(&peer.interface)
            .filter(|i| i.up)
            .map(|_| peer_node)
    }

    /// Follows forwarding decisions from `start` toward `dst`.
    pub fn walk(&self, start: &str, dst: Ipv4Addr) -> Walk {
        let mut path = vec![start.to_string()];
        let mut current = start.to_string();
        let mut ttl = DEFAULT_TTL;
        loop {
            let Some(node) = self.nodes.get(&current) else {
                return Walk {
                    path,
                    outcome: WalkOutcome::NoRoute,
                };
            };
            if node.owns(dst) {
                return Walk {
                    path,
                    outcome: WalkOutcome::Delivered(current),
                };
            }
            let Some(route) = longest_prefix_match(&node.rib, dst) else {
                return Walk {
                    path,
                    outcome: WalkOutcome::NoRoute,
                };
            };
            let (egress, target) = match &route.next_hop {
                NextHop::Connected { interface } => (interface.clone(), dst),
                NextHop::Address(nh) => {
                    let connected: Vec<RibEntry> = node
                        .rib
                        .iter()
                        .filter(|r| r.origin == Origin::Connected)
                        .cloned()
                        .collect();
                    match longest_prefix_match(&connected, *nh) {
                        Some(RibEntry {
                            next_hop: NextHop::Connected { interface },
                            ..
                        }) => (interface.clone(), *nh),
                        _ => {
                            return Walk {
                                path,
                                outcome: WalkOutcome::NoRoute,
                            }
                        }
                    }
                }
            };
            let Some(peer) = self.peer_across(&current, &egress) else {
                return Walk {
                    path,
                    outcome: WalkOutcome::DestinationUnknown,
                };
            };
            if !peer.owns(target) {
                return Walk {
                    path,
                    outcome: WalkOutcome::DestinationUnknown,
                };
            }
            ttl -= 1;
            if ttl == 0 {
                return Walk {
                    path,
                    outcome: WalkOutcome::TtlExceeded,
                };
            }
            current = peer.hostname.clone();
            path.push(current.clone());
        }
    }

    fn source_address(
        &self,
        src: &SimNode,
        source: &ProbeSource,
        dst: Ipv4Addr,
    ) -> Result<Option<Ipv4Addr>, SimError> {
        Ok(match source {
            ProbeSource::Address(a) => Some(*a),
            ProbeSource::Interface(name) => Some(
                src.interface(name)
                    .ok_or_else(|| SimError::UnknownInterface {
                        device: src.hostname.clone(),
                        interface: name.clone(),
                    })?
                    .address,
            ),
            ProbeSource::Auto => match src.primary_loopback() {
                Some(lo) => Some(lo.address),
                None => longest_prefix_match(&src.rib, dst).and_then(|r| {
                    let egress = match &r.next_hop {
                        NextHop::Connected { interface } => Some(interface.clone()),
                        NextHop::Address(nh) => src
                            .interfaces
                            .iter()
                            .find(|i| i.up && i.subnet().contains(nh))
                            .map(|i| i.name.clone()),
                    };
                    egress.and_then(|e| src.interface(&e)).map(|i| i.address)
                }),
            },
        })
    }
}

pub fn ping(
    net: &SimNetwork,
    src: &str,
    dst: Ipv4Addr,
    source: &ProbeSource,
) -> Result<PingResult, SimError> {
    let src_node = net.node(src)?;
    let source_address = net.source_address(src_node, source, dst)?;
    let mut result = PingResult {
        success: false,
        source_address,
        destination: dst,
        forward_path: Vec::new(),
        reverse_path: Vec::new(),
        failure_reason: None,
        epoch: net.epoch,
    };
    if src_node.owns(dst) {
        result.success = true;
        result.forward_path = vec![src.to_string()];
        result.reverse_path = vec![src.to_string()];
        return Ok(result);
    }
    let forward = net.walk(src, dst);
    result.forward_path = forward.path;
    let owner = match forward.outcome {
        WalkOutcome::Delivered(owner) => owner,
        WalkOutcome::NoRoute => {
            result.failure_reason = Some(PingFailure::NoRouteForward);
            return Ok(result);
        }
        WalkOutcome::DestinationUnknown => {
            result.failure_reason = Some(PingFailure::DestinationUnknown);
            return Ok(result);
        }
        WalkOutcome::TtlExceeded => {
            result.failure_reason = Some(PingFailure::TtlExceeded);
            return Ok(result);
        }
    };
    let Some(reply_to) = source_address else {
        result.failure_reason = Some(PingFailure::NoRouteReverse);
        return Ok(result);
    };
    let reverse = net.walk(&owner, reply_to);
    result.reverse_path = reverse.path;
    match reverse.outcome {
        WalkOutcome::Delivered(ref back) if back == src => result.success = true,
        WalkOutcome::TtlExceeded => result.failure_reason = Some(PingFailure::TtlExceeded),
        _ => result.failure_reason = Some(PingFailure::NoRouteReverse),
    }
    Ok(result)
}

fn dotted_mask(prefix_len: u8) -> Ipv4Addr {
    prefix_to_mask(prefix_len)
}

/// Stable configuration view of one node.
///
/// ```text
/// hostname R1
/// interface FastEthernet0/1 192.168.0.1 255.255.255.0 up
/// ip route 192.168.2.0 255.255.255.0 192.168.0.2
/// ```
pub fn show_config(net: &SimNetwork, hostname: &str) -> Result<String, SimError> {
    let node = net.node(hostname)?;
    let mut out = format!("hostname {}\n", node.hostname);
    let mut ifaces: Vec<&SimInterface> = node.interfaces.iter().collect();
    ifaces.sort_by(|a, b| a.name.cmp(&b.name));
    for i in ifaces {
        let _ = writeln!(
            out,
            "interface {} {} {} {}",
            i.name,
            i.address,
            dotted_mask(i.prefix_len),
            if i.up { "up" } else { "down" }
        );
    }
    for (dest, nh) in &node.static_routes {
        let _ = writeln!(out, "ip route {} {} {}", dest.network(), dest.netmask(), nh);
    }
    Ok(out)
}

/// Device and link summary of the whole network.
pub fn show_topology(net: &SimNetwork) -> String {
    let mut out = format!("devices: {}\n", net.nodes.len());
    for n in net.nodes.values() {
        let _ = writeln!(
            out,
            "  {} ({}, {} interfaces, {} static routes)",
            n.hostname,
            n.node_type,
            n.interfaces.len(),
            n.static_routes.len()
        );
    }
    let _ = writeln!(out, "links: {}", net.links.len());
    for (id, members) in &net.links {
        let ends: Vec<String> = members
            .iter()
            .map(|m| {
                let addr = net
                    .nodes
                    .get(&m.hostname)
                    .and_then(|n| n.interface(&m.interface))
                    .map(|i| format!("{}/{}", i.address, i.prefix_len))
                    .unwrap_or_default();
                format!("{} {} {}", m.hostname, m.interface, addr)
            })
            .collect();
        let _ = writeln!(out, "  [{id}] {}", ends.join(" <-> "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{extract_topology, Strictness};
    use crate::scs::parse_scs;

    const EVAL2: &str = "\
R1: type router
R1: interface FastEthernet0/1 ip 192.168.0.1/24
R1: interface Loopback1 ip 192.168.1.1/24
R1: static_route 192.168.2.0/24 via R2
R2: type router
R2: interface FastEthernet0/1 ip 192.168.0.2/24
R2: interface Loopback1 ip 192.168.2.1/24
R2: static_route 192.168.1.0/24 via R1
R1,R2: R1.FastEthernet0/1 <-> R2.FastEthernet0/1
";

    fn net(text: &str) -> SimNetwork {
        instantiate(
            &extract_topology(&parse_scs(text).unwrap(), Strictness::Strict)
                .unwrap()
                .topology,
        )
        .unwrap()
    }

    fn ip(s: &str) -> Ipv4Addr {
        s.parse().unwrap()
    }

    #[test]
    fn scenario2_rib() {
        let n = net(EVAL2);
        assert_eq!(n.nodes.len(), 2);
        let r1 = &n.nodes["R1"];
        let summary: Vec<(String, Origin, Option<Ipv4Addr>)> = r1
            .rib
            .iter()
            .map(|r| {
                let nh = match r.next_hop {
                    NextHop::Address(a) => Some(a),
                    _ => None,
                };
                (r.destination.to_string(), r.origin, nh)
            })
            .collect();
        assert_eq!(
            summary,
            vec![
                ("192.168.0.0/24".to_string(), Origin::Connected, None),
                ("192.168.1.0/24".to_string(), Origin::Connected, None),
                (
                    "192.168.2.0/24".to_string(),
                    Origin::Static,
                    Some(ip("192.168.0.2"))
                ),
            ]
        );
    }

    #[test]
    fn empty_topology() {
        let n = instantiate(&TopologyDocument::default()).unwrap();
        assert!(n.nodes.is_empty() && n.links.is_empty());
    }

    #[test]
    fn lpm_examples() {
        let n = net(EVAL2);
        let r = longest_prefix_match(&n.nodes["R1"].rib, ip("192.168.2.1")).unwrap();
        assert_eq!(r.next_hop, NextHop::Address(ip("192.168.0.2")));
        assert!(longest_prefix_match(&n.nodes["R1"].rib, ip("10.0.0.1")).is_none());

        let rib = vec![
            RibEntry {
                destination: "10.1.0.0/16".parse().unwrap(),
                next_hop: NextHop::Address(ip("10.9.9.9")),
                origin: Origin::Static,
            },
            RibEntry {
                destination: "10.1.2.0/24".parse().unwrap(),
                next_hop: NextHop::Connected {
                    interface: "Gi0".into(),
                },
                origin: Origin::Connected,
            },
        ];
        assert_eq!(
            longest_prefix_match(&rib, ip("10.1.2.3")).unwrap().origin,
            Origin::Connected
        );
        assert_eq!(
            longest_prefix_match(&rib, ip("10.1.3.3")).unwrap().origin,
            Origin::Static
        );
    }

    /// Independent scan: every covering route, pick by the tie-break rules.
    #[test]
    fn lpm_agrees_with_exhaustive_scan() {
        let n = net(EVAL2);
        let rib = &n.nodes["R1"].rib;
        for last in 0..=255u8 {
            for third in [0u8, 1, 2, 3] {
                let dst = Ipv4Addr::new(192, 168, third, last);
                let mut best: Option<&RibEntry> = None;
                for r in rib {
                    let mask = u32::MAX
                        .checked_shl(32 - r.destination.prefix_len() as u32)
                        .unwrap_or(0);
                    if u32::from(dst) & mask != u32::from(r.destination.network()) {
                        continue;
                    }
                    best = match best {
                        None => Some(r),
                        Some(b) if r.destination.prefix_len() > b.destination.prefix_len() => {
                            Some(r)
                        }
                        Some(b) => Some(b),
                    };
                }
                assert_eq!(longest_prefix_match(rib, dst), best, "{dst}");
            }
        }
    }

    #[test]
    fn ping_scenario2_both_ways() {
        let n = net(EVAL2);
        let p = ping(&n, "R1", ip("192.168.2.1"), &ProbeSource::Auto).unwrap();
        assert!(p.success, "{p:?}");
        assert_eq!(p.source_address, Some(ip("192.168.1.1")));
        assert_eq!(p.forward_path, vec!["R1", "R2"]);
        assert_eq!(p.reverse_path, vec!["R2", "R1"]);
        assert!(
            ping(&n, "R2", ip("192.168.1.1"), &ProbeSource::Auto)
                .unwrap()
                .success
        );
    }

    #[test]
    fn self_ping() {
        let n = net(EVAL2);
        let p = ping(&n, "R1", ip("192.168.1.1"), &ProbeSource::Auto).unwrap();
        assert!(p.success);
        assert_eq!(p.forward_path, vec!["R1"]);
    }

    #[test]
    fn missing_reverse_route() {
        let mut n = net(EVAL2);
        n.remove_static_route("R2", 0).unwrap();
        let p = ping(&n, "R1", ip("192.168.2.1"), &ProbeSource::Auto).unwrap();
        assert!(!p.success);
        assert_eq!(p.failure_reason, Some(PingFailure::NoRouteReverse));
        assert_eq!(p.forward_path, vec!["R1", "R2"]);
    }

    #[test]
    fn unknown_host_on_connected_subnet() {
        let n = net(EVAL2);
        let p = ping(&n, "R1", ip("192.168.0.77"), &ProbeSource::Auto).unwrap();
        assert_eq!(p.failure_reason, Some(PingFailure::DestinationUnknown));
        let p = ping(&n, "R1", ip("10.0.0.1"), &ProbeSource::Auto).unwrap();
        assert_eq!(p.failure_reason, Some(PingFailure::NoRouteForward));
    }

    #[test]
    fn routing_loop_hits_ttl() {
        let mut n = net(EVAL2);
        let dest: Ipv4Net = "10.99.0.0/16".parse().unwrap();
        n.add_static_route("R1", dest, ip("192.168.0.2")).unwrap();
        n.add_static_route("R2", dest, ip("192.168.0.1")).unwrap();
        let p = ping(&n, "R1", ip("10.99.1.1"), &ProbeSource::Auto).unwrap();
        assert_eq!(p.failure_reason, Some(PingFailure::TtlExceeded));
        assert_eq!(p.forward_path.len(), DEFAULT_TTL as usize);
    }

    #[test]
    fn epoch_advances_on_mutation() {
        let mut n = net(EVAL2);
        let before = n.epoch();
        n.set_interface_state("R2", "Loopback1", false).unwrap();
        assert!(n.epoch() > before);
        let p = ping(&n, "R1", ip("192.168.2.1"), &ProbeSource::Auto).unwrap();
        assert!(!p.success);
        assert_eq!(p.epoch, n.epoch());
    }

    #[test]
    fn multi_access_rejected() {
        let mut t = extract_topology(&parse_scs(EVAL2).unwrap(), Strictness::Strict)
            .unwrap()
            .topology;
        let mut extra = t.connections[0].clone();
        extra.endpoint_a.interface = "Loopback1".into();
        t.connections.push(extra);
        assert!(matches!(
            instantiate(&t),
            Err(SimError::MultiAccessLinkUnsupported {
                network_id: 1,
                members: 4
            })
        ));
    }

    #[test]
    fn unresolved_route_rejected() {
        let mut t = extract_topology(&parse_scs(EVAL2).unwrap(), Strictness::Strict)
            .unwrap()
            .topology;
        t.devices[0].static_routes[0].resolved_next_hop = None;
        assert!(matches!(
            instantiate(&t),
            Err(SimError::UnresolvedRoute { .. })
        ));
    }

    #[test]
    fn show_config_format() {
        let n = net(EVAL2);
        let text = show_config(&n, "R1").unwrap();
        assert_eq!(
            text,
            "hostname R1\n\
             interface FastEthernet0/1 192.168.0.1 255.255.255.0 up\n\
             interface Loopback1 192.168.1.1 255.255.255.0 up\n\
             ip route 192.168.2.0 255.255.255.0 192.168.0.2\n"
        );
        assert_eq!(
            show_config(&n, "R9"),
            Err(SimError::UnknownDevice("R9".into()))
        );
    }
}
