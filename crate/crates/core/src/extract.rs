//! Extraction of a [`TopologyDocument`] from an [`ScsDocument`].
//!
//! Single-device keys become devices (type, hostname, interfaces, static
//! routes); pair keys become connections. Every connection gets a dense
//! network id from a [`NetworkIdAllocator`], and the interfaces on both ends
//! carry that id. Static routes whose next hop is given as a device name are
//! resolved against the connections; failures are left unresolved for the
//! validator to report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::ipv4::{looks_dotted, mask_to_prefix, validate_ipv4};
use crate::scs::{parse_statement, MaskForm, ScsDocument, Statement};
use crate::topology::{
    Connection, DeviceSpec, Endpoint, InterfaceSpec, NodeType, RouteDestination, StaticRoute,
    TopologyDocument, Via,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Strictness {
    /// Unknown statements become warnings.
    #[default]
    Lenient,
    /// Unknown statements are errors.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("connection endpoint {0} does not name a declared device interface")]
    DanglingConnection(String),
    #[error("hostname `{0}` is declared more than once")]
    DuplicateHostname(String),
    #[error("device `{device}` declares interface {interface} more than once")]
    DuplicateInterface { device: String, interface: String },
    #[error("`{key}`: unrecognized statement `{line}`")]
    UnknownLine { key: String, line: String },
    #[error("device `{device}`: {source}")]
    Interface {
        device: String,
        source: UnrecognizedInterfaceFamily,
    },
    #[error("device `{device}`: invalid prefix length `{prefix}`")]
    BadPrefix { device: String, prefix: String },
    #[error("device `{device}`: invalid netmask `{mask}`")]
    BadMask { device: String, mask: String },
    #[error("connection `{key}` links {a} and {b}, which do not match its key")]
    ConnectionKeyMismatch { key: String, a: String, b: String },
    #[error("connection {0} joins an interface to itself")]
    SelfConnection(String),
    #[error("loopback interface {0} cannot take part in a connection")]
    LoopbackConnection(String),
    #[error("interface {0} takes part in more than one connection")]
    InterfaceReused(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unrecognized interface family in `{0}`")]
pub struct UnrecognizedInterfaceFamily(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtractWarning {
    UnknownLine {
        key: String,
        line: String,
    },
    DefaultedType {
        device: String,
    },
    AmbiguousNextHop {
        device: String,
        via: String,
        chosen: std::net::Ipv4Addr,
    },
}

impl fmt::Display for ExtractWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractWarning::UnknownLine { key, line } => {
                write!(f, "{key}: ignored unrecognized statement `{line}`")
            }
            ExtractWarning::DefaultedType { device } => {
                write!(f, "{device}: no type given, assuming router")
            }
            ExtractWarning::AmbiguousNextHop {
                device,
                via,
                chosen,
            } => {
                write!(
                    f,
                    "{device}: {via} is reachable over several links, using {chosen}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub topology: TopologyDocument,
    pub warnings: Vec<ExtractWarning>,
}

/// Maps `raw` to a canonical interface name (`gi 0/0` -> `GigabitEthernet0/0`).
pub fn normalize_interface_name(raw: &str) -> Result<String, UnrecognizedInterfaceFamily> {
    let err = || UnrecognizedInterfaceFamily(raw.to_string());
    let trimmed = raw.trim();
    let split = trimmed.find(|c: char| c.is_ascii_digit()).ok_or_else(err)?;
    let (family, suffix) = trimmed.split_at(split);
    let family: String = family
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_ascii_lowercase();
    let canonical = match family.as_str() {
        "gi" | "gig" | "gigabitethernet" => "GigabitEthernet",
        "fa" | "fastethernet" => "FastEthernet",
        "e" | "eth" | "ethernet" => "Ethernet",
        "lo" | "loopback" => "Loopback",
        _ => return Err(err()),
    };
    let suffix: String = suffix.chars().filter(|c| !c.is_whitespace()).collect();
    if !suffix
        .chars()
        .all(|c| c.is_ascii_digit() || c == '/' || c == '.')
        || suffix.ends_with(['/', '.'])
    {
        return Err(err());
    }
    Ok(format!("{canonical}{suffix}"))
}

pub fn is_loopback_name(name: &str) -> bool {
    name.starts_with("Loopback")
}

/// Dense network ids for unordered endpoint pairs, starting at 1.
#[derive(Debug, Default)]
pub struct NetworkIdAllocator {
    assigned: BTreeMap<(Endpoint, Endpoint), u32>,
}

impl NetworkIdAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, a: &Endpoint, b: &Endpoint) -> u32 {
        let pair = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        let next = self.assigned.len() as u32 + 1;
        *self.assigned.entry(pair).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.assigned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assigned.is_empty()
    }
}

struct DeviceBuild {
    key: String,
    name: Option<String>,
    node_type: Option<NodeType>,
    interfaces: Vec<InterfaceSpec>,
    routes: Vec<StaticRoute>,
}

fn unknown(
    mode: Strictness,
    key: &str,
    line: &str,
    warnings: &mut Vec<ExtractWarning>,
) -> Result<(), ExtractError> {
    match mode {
        Strictness::Strict => Err(ExtractError::UnknownLine {
            key: key.into(),
            line: line.into(),
        }),
        Strictness::Lenient => {
            warnings.push(ExtractWarning::UnknownLine {
                key: key.into(),
                line: line.into(),
            });
            Ok(())
        }
    }
}

fn parse_prefix(device: &str, prefix: &str) -> Result<u8, ExtractError> {
    prefix.parse::<u8>().map_err(|_| ExtractError::BadPrefix {
        device: device.into(),
        prefix: prefix.into(),
    })
}

fn build_device(
    key: &str,
    lines: &[String],
    mode: Strictness,
    warnings: &mut Vec<ExtractWarning>,
) -> Result<DeviceBuild, ExtractError> {
    let mut dev = DeviceBuild {
        key: key.to_string(),
        name: None,
        node_type: None,
        interfaces: vec![],
        routes: vec![],
    };
    for line in lines {
        match parse_statement(line) {
            Statement::Type(t) => dev.node_type = Some(t),
            Statement::Name(n) => dev.name = Some(n),
            Statement::Interface {
                ifname,
                address,
                mask,
            } => {
                let name = normalize_interface_name(&ifname).map_err(|source| {
                    ExtractError::Interface {
                        device: key.into(),
                        source,
                    }
                })?;
                if dev.interfaces.iter().any(|i| i.name == name) {
                    return Err(ExtractError::DuplicateInterface {
                        device: key.into(),
                        interface: name,
                    });
                }
                let prefix_len = match mask {
                    MaskForm::Prefix(p) => parse_prefix(key, &p)?,
                    MaskForm::Mask(m) => validate_ipv4(&m)
                        .ok()
                        .and_then(|m| mask_to_prefix(m).ok())
                        .ok_or(ExtractError::BadMask {
                            device: key.into(),
                            mask: m,
                        })?,
                };
                dev.interfaces.push(InterfaceSpec {
                    is_loopback: is_loopback_name(&name),
                    name,
                    ipv4: address,
                    prefix_len,
                    network_id: None,
                });
            }
            Statement::StaticRoute { destination, via } => {
                let destination = match destination {
                    Some((address, prefix)) => Some(RouteDestination {
                        address,
                        prefix_len: parse_prefix(key, &prefix)?,
                    }),
                    None => None,
                };
                let via = via.map(|v| {
                    if looks_dotted(&v) {
                        Via::Address(v)
                    } else {
                        Via::Device(v)
                    }
                });
                dev.routes.push(StaticRoute {
                    destination,
                    via,
                    resolved_next_hop: None,
                });
            }
            Statement::Connection { .. } | Statement::Unknown(_) => {
                unknown(mode, key, line, warnings)?
            }
        }
    }
    Ok(dev)
}

/// Runs the extraction over `doc`.
pub fn extract_topology(doc: &ScsDocument, mode: Strictness) -> Result<Extraction, ExtractError> {
    let mut warnings = Vec::new();
    let mut builds = Vec::new();
    for entry in doc.entries.iter().filter(|e| !e.is_pair()) {
        builds.push(build_device(&entry.key, &entry.lines, mode, &mut warnings)?);
    }

    // key or hostname -> hostname
    let mut names: BTreeMap<String, String> = BTreeMap::new();
    let mut hostnames = BTreeSet::new();
    for b in &builds {
        let host = b.name.clone().unwrap_or_else(|| b.key.clone());
        if !hostnames.insert(host.clone()) {
            return Err(ExtractError::DuplicateHostname(host));
        }
        names.insert(b.key.clone(), host.clone());
        names.entry(host.clone()).or_insert(host);
    }

    let mut devices: Vec<DeviceSpec> = builds
        .into_iter()
        .map(|b| {
            let hostname = names[&b.key].clone();
            if b.node_type.is_none() {
                warnings.push(ExtractWarning::DefaultedType {
                    device: hostname.clone(),
                });
            }
            DeviceSpec {
                node_type: b.node_type.unwrap_or(NodeType::Router),
                node_type_defaulted: b.node_type.is_none(),
                hostname,
                interfaces: b.interfaces,
                static_routes: b.routes,
            }
        })
        .collect();

    let mut pairs: BTreeSet<(Endpoint, Endpoint)> = BTreeSet::new();
    for entry in doc.entries.iter().filter(|e| e.is_pair()) {
        let key_devices: BTreeSet<&str> = entry.devices().into_iter().collect();
        for line in &entry.lines {
            let Statement::Connection { a, b } = parse_statement(line) else {
                unknown(mode, &entry.key, line, &mut warnings)?;
                continue;
            };
            let line_devices: BTreeSet<&str> = [a.0.as_str(), b.0.as_str()].into_iter().collect();
            if line_devices != key_devices {
                return Err(ExtractError::ConnectionKeyMismatch {
                    key: entry.key.clone(),
                    a: a.0,
                    b: b.0,
                });
            }
            let ea = resolve_endpoint(&devices, &names, &a)?;
            let eb = resolve_endpoint(&devices, &names, &b)?;
            if ea == eb {
                return Err(ExtractError::SelfConnection(ea.to_string()));
            }
            pairs.insert(if ea <= eb { (ea, eb) } else { (eb, ea) });
        }
    }

    let mut used = BTreeSet::new();
    for (a, b) in &pairs {
        for ep in [a, b] {
            if !used.insert(ep.clone()) {
                return Err(ExtractError::InterfaceReused(ep.to_string()));
            }
        }
    }

    // Ids are handed out in canonical pair order so they do not depend on
    // statement order.
    let mut alloc = NetworkIdAllocator::new();
    let mut connections = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let network_id = alloc.assign(&a, &b);
        for ep in [&a, &b] {
            let dev = devices
                .iter_mut()
                .find(|d| d.hostname == ep.device)
                .expect("endpoint resolved");
            let iface = dev
                .interfaces
                .iter_mut()
                .find(|i| i.name == ep.interface)
                .expect("endpoint resolved");
            iface.network_id = Some(network_id);
        }
        connections.push(Connection {
            endpoint_a: a,
            endpoint_b: b,
            network_id,
        });
    }

    let mut topology = TopologyDocument {
        devices,
        connections,
    };
    resolve_all_routes(&mut topology, &mut warnings);
    topology.canonicalize();
    Ok(Extraction { topology, warnings })
}

fn resolve_endpoint(
    devices: &[DeviceSpec],
    names: &BTreeMap<String, String>,
    (dev, iface): &(String, String),
) -> Result<Endpoint, ExtractError> {
    let dangling = || ExtractError::DanglingConnection(format!("{dev}.{iface}"));
    let host = names.get(dev).ok_or_else(dangling)?;
    let name = normalize_interface_name(iface).map_err(|_| dangling())?;
    let device = devices
        .iter()
        .find(|d| &d.hostname == host)
        .ok_or_else(dangling)?;
    let spec = device.interface(&name).ok_or_else(dangling)?;
    if spec.is_loopback {
        return Err(ExtractError::LoopbackConnection(format!("{host}.{name}")));
    }
    Ok(Endpoint::new(host.clone(), name))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("static route on {owner} has no next hop")]
    MissingVia { owner: String },
    #[error("static route on {owner} names unknown device `{via}`")]
    UnknownDevice { owner: String, via: String },
    #[error("{owner} shares no link with {via}")]
    NoSharedSubnet { owner: String, via: String },
    #[error("next hop {next_hop} is not on a subnet directly connected to {owner}")]
    NextHopNotConnected { owner: String, next_hop: String },
    #[error("next hop `{0}` is not a valid address")]
    InvalidAddress(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub route: StaticRoute,
    /// Number of links that could have carried the next hop; more than one
    /// means the lowest network id was chosen.
    pub candidates: usize,
}

/// Fills `resolved_next_hop` for one route owned by `owner`.
pub fn resolve_static_route(
    route: &StaticRoute,
    owner: &DeviceSpec,
    topo: &TopologyDocument,
) -> Result<Resolution, ResolveError> {
    let owner_name = owner.hostname.clone();
    match &route.via {
        None => Err(ResolveError::MissingVia { owner: owner_name }),
        Some(Via::Device(via)) => {
            if topo.device(via).is_none() {
                return Err(ResolveError::UnknownDevice {
                    owner: owner_name,
                    via: via.clone(),
                });
            }
            let mut shared: Vec<&Connection> = topo
                .connections
                .iter()
                .filter(|c| {
                    c.peer_of(&owner.hostname).is_some_and(|p| &p.device == via)
                        && c.local_of(via).is_some()
                })
                .collect();
            shared.sort_by_key(|c| c.network_id);
            let Some(first) = shared.first() else {
                return Err(ResolveError::NoSharedSubnet {
                    owner: owner_name,
                    via: via.clone(),
                });
            };
            let ep = first.peer_of(&owner.hostname).expect("filtered");
            let iface = topo
                .endpoint_interface(ep)
                .expect("connections reference declared interfaces");
            let addr = iface
                .ipv4()
                .map_err(|_| ResolveError::InvalidAddress(iface.ipv4.clone()))?;
            Ok(Resolution {
                route: StaticRoute {
                    resolved_next_hop: Some(addr),
                    ..route.clone()
                },
                candidates: shared.len(),
            })
        }
        Some(Via::Address(text)) => {
            let addr =
                validate_ipv4(text).map_err(|_| ResolveError::InvalidAddress(text.clone()))?;
            let connected = owner.interfaces.iter().any(|i| {
                !i.is_loopback
                    && i.subnet().is_some_and(|n| n.contains(&addr))
                    && i.ipv4().ok() != Some(addr)
            });
            if !connected {
                return Err(ResolveError::NextHopNotConnected {
                    owner: owner_name,
                    next_hop: text.clone(),
                });
            }
            Ok(Resolution {
                route: StaticRoute {
                    resolved_next_hop: Some(addr),
                    ..route.clone()
                },
                candidates: 1,
            })
        }
    }
}

fn resolve_all_routes(topo: &mut TopologyDocument, warnings: &mut Vec<ExtractWarning>) {
    let snapshot = topo.clone();
    for (dev, snap) in topo.devices.iter_mut().zip(&snapshot.devices) {
        for route in &mut dev.static_routes {
            if let Ok(res) = resolve_static_route(route, snap, &snapshot) {
                if res.candidates > 1 {
                    warnings.push(ExtractWarning::AmbiguousNextHop {
                        device: dev.hostname.clone(),
                        via: route
                            .via
                            .as_ref()
                            .map(|v| v.to_string())
                            .unwrap_or_default(),
                        chosen: res.route.resolved_next_hop.expect("resolved"),
                    });
                }
                *route = res.route;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scs::parse_scs;
    use std::net::Ipv4Addr;

    const THREE_ROUTER: &str = "\
R-1: type router
R-1: interface gi 0/0 ip 192.168.0.1/24
R-1: static_route 192.168.100.0/24 via R-2
R-2: type router
R-2: interface Gi 0/0 ip 192.168.0.2/24
R-2: interface Gi 0/1 ip 192.168.100.1/24
R-3: type router
R-3: interface Gi 0/0 ip 192.168.100.2/24
R-3: static_route 192.168.0.0/24 via R-2
R-1,R-2: R-1.gi 0/0 <-> R-2.Gi 0/0
R-2,R-3: R-2.Gi 0/1 <-> R-3.Gi 0/0
";

    fn extract(text: &str) -> Extraction {
        extract_topology(&parse_scs(text).unwrap(), Strictness::Strict).unwrap()
    }

    #[test]
    fn interface_names() {
        assert_eq!(
            normalize_interface_name("gi 0/0").unwrap(),
            "GigabitEthernet0/0"
        );
        assert_eq!(
            normalize_interface_name("Gigabit Ethernet 0/0").unwrap(),
            "GigabitEthernet0/0"
        );
        assert_eq!(
            normalize_interface_name("Fast Ethernet 0/1").unwrap(),
            "FastEthernet0/1"
        );
        assert_eq!(normalize_interface_name("loopback 1").unwrap(), "Loopback1");
        assert_eq!(normalize_interface_name("Lo0").unwrap(), "Loopback0");
        assert_eq!(
            normalize_interface_name("GigabitEthernet0/1").unwrap(),
            "GigabitEthernet0/1"
        );
        assert!(normalize_interface_name("serial 0/0").is_err());
        assert!(normalize_interface_name("gi").is_err());
        assert!(normalize_interface_name("gi 0/").is_err());
    }

    #[test]
    fn three_router_topology() {
        let ex = extract(THREE_ROUTER);
        let t = &ex.topology;
        assert!(ex.warnings.is_empty());
        assert_eq!(t.devices.len(), 3);
        assert_eq!(t.connections.len(), 2);
        let ids: BTreeSet<u32> = t.connections.iter().map(|c| c.network_id).collect();
        assert_eq!(ids, BTreeSet::from([1, 2]));
        let r1 = t.device("R-1").unwrap();
        assert_eq!(
            r1.static_routes[0].resolved_next_hop,
            Some(Ipv4Addr::new(192, 168, 0, 2))
        );
        let r3 = t.device("R-3").unwrap();
        assert_eq!(
            r3.static_routes[0].resolved_next_hop,
            Some(Ipv4Addr::new(192, 168, 100, 1))
        );
        assert_eq!(r1.interfaces[0].network_id, Some(1));
    }

    #[test]
    fn single_device() {
        let ex = extract("PC1: type pc\nPC1: interface fa0 ip 10.0.0.5/24\n");
        assert_eq!(ex.topology.devices.len(), 1);
        assert!(ex.topology.connections.is_empty());
        assert_eq!(ex.topology.devices[0].node_type, NodeType::Pc);
    }

    #[test]
    fn scenario2_loopbacks_have_no_network_id() {
        let ex = extract(
            "R1: type router\n\
             R1: interface Fast Ethernet 0/1 ip 192.168.0.1 mask 255.255.255.0\n\
             R1: interface loopback 1 ip 192.168.1.1/24\n\
             R1: static_route 192.168.2.0/24 via R2\n\
             R2: type router\n\
             R2: interface Fa0/1 ip 192.168.0.2/24\n\
             R2: interface Lo1 ip 192.168.2.1/24\n\
             R2: static_route 192.168.1.0/24 via R1\n\
             R1,R2: R1.Fa0/1 <-> R2.Fa0/1\n",
        );
        let t = ex.topology;
        assert_eq!(t.devices.len(), 2);
        assert_eq!(t.connections.len(), 1);
        assert_eq!(t.connections[0].network_id, 1);
        for d in &t.devices {
            for i in &d.interfaces {
                assert_eq!(i.is_loopback, i.network_id.is_none(), "{}", i.name);
                assert_eq!(i.prefix_len, 24);
            }
        }
    }

    #[test]
    fn statement_order_does_not_change_output() {
        let mut lines: Vec<&str> = THREE_ROUTER.lines().collect();
        lines.reverse();
        let reversed = lines.join("\n");
        assert_eq!(
            extract(THREE_ROUTER).topology.to_canonical_json(),
            extract(&reversed).topology.to_canonical_json()
        );
    }

    #[test]
    fn defaulted_type_and_name_override() {
        let ex = extract("X: name core\nX: interface gi0/0 ip 10.0.0.1/30\n");
        let d = &ex.topology.devices[0];
        assert_eq!(d.hostname, "core");
        assert_eq!(d.node_type, NodeType::Router);
        assert!(d.node_type_defaulted);
        assert_eq!(
            ex.warnings,
            vec![ExtractWarning::DefaultedType {
                device: "core".into()
            }]
        );
    }

    #[test]
    fn errors() {
        let run = |t: &str, mode| extract_topology(&parse_scs(t).unwrap(), mode);
        assert!(matches!(
            run(
                "A: type router\nA,B: A.gi0/0 <-> B.gi0/0",
                Strictness::Lenient
            ),
            Err(ExtractError::DanglingConnection(_))
        ));
        assert!(matches!(
            run("A: name X\nB: name X", Strictness::Lenient),
            Err(ExtractError::DuplicateHostname(_))
        ));
        assert!(matches!(
            run(
                "A: interface gi0/0 ip 1.1.1.1/24\nA: interface Gi 0/0 ip 1.1.1.2/24",
                Strictness::Lenient
            ),
            Err(ExtractError::DuplicateInterface { .. })
        ));
        assert!(matches!(
            run("A: frobnicate", Strictness::Strict),
            Err(ExtractError::UnknownLine { .. })
        ));
        let lenient = run("A: frobnicate", Strictness::Lenient).unwrap();
        assert!(matches!(
            lenient.warnings[0],
            ExtractWarning::UnknownLine { .. }
        ));
        assert!(matches!(
            run(
                "A: interface gi0/0 ip 1.1.1.1 mask 255.0.255.0",
                Strictness::Lenient
            ),
            Err(ExtractError::BadMask { .. })
        ));
        assert!(matches!(
            run(
                "A: interface lo0 ip 1.1.1.1/32\nB: interface gi0/0 ip 1.1.1.2/24\nA,B: A.lo0 <-> B.gi0/0",
                Strictness::Lenient
            ),
            Err(ExtractError::LoopbackConnection(_))
        ));
    }

    #[test]
    fn allocator_is_symmetric_and_dense() {
        let a = Endpoint::new("A", "x");
        let b = Endpoint::new("B", "y");
        let c = Endpoint::new("C", "z");
        let mut alloc = NetworkIdAllocator::new();
        assert_eq!(alloc.assign(&a, &b), 1);
        assert_eq!(alloc.assign(&b, &a), 1);
        assert_eq!(alloc.assign(&c, &a), 2);
        assert_eq!(alloc.len(), 2);
    }

    #[test]
    fn route_resolution() {
        let t = extract(THREE_ROUTER).topology;
        let r1 = t.device("R-1").unwrap();
        let mut route = r1.static_routes[0].clone();
        route.resolved_next_hop = None;
        let res = resolve_static_route(&route, r1, &t).unwrap();
        assert_eq!(
            res.route.resolved_next_hop,
            Some(Ipv4Addr::new(192, 168, 0, 2))
        );

        let by_addr = StaticRoute {
            via: Some(Via::Address("192.168.0.2".into())),
            ..route.clone()
        };
        let res = resolve_static_route(&by_addr, r1, &t).unwrap();
        assert_eq!(res.route.via, by_addr.via);
        assert_eq!(
            res.route.resolved_next_hop,
            Some(Ipv4Addr::new(192, 168, 0, 2))
        );

        let far = StaticRoute {
            via: Some(Via::Device("R-3".into())),
            ..route.clone()
        };
        assert_eq!(
            resolve_static_route(&far, r1, &t),
            Err(ResolveError::NoSharedSubnet {
                owner: "R-1".into(),
                via: "R-3".into()
            })
        );
        let off_link = StaticRoute {
            via: Some(Via::Address("192.168.100.1".into())),
            ..route
        };
        assert!(matches!(
            resolve_static_route(&off_link, r1, &t),
            Err(ResolveError::NextHopNotConnected { .. })
        ));
    }

    #[test]
    fn ambiguous_next_hop_takes_lowest_network_id() {
        let ex = extract(
            "A: interface gi0/0 ip 10.0.0.1/30\nA: interface gi0/1 ip 10.0.1.1/30\nA: static_route 10.9.0.0/16 via B\n\
             B: interface gi0/0 ip 10.0.0.2/30\nB: interface gi0/1 ip 10.0.1.2/30\n\
             A,B: A.gi0/1 <-> B.gi0/1\nA,B: A.gi0/0 <-> B.gi0/0\n",
        );
        let a = ex.topology.device("A").unwrap();
        assert_eq!(
            a.static_routes[0].resolved_next_hop,
            Some(Ipv4Addr::new(10, 0, 0, 2))
        );
        assert!(ex
            .warnings
            .iter()
            .any(|w| matches!(w, ExtractWarning::AmbiguousNextHop { .. })));
    }
}
