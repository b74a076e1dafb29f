//! The topology document produced by extraction.
//!
//! Addresses are carried as written so the validator can report malformed or
//! out-of-range octets instead of extraction failing on them. Use the typed
//! accessors ([`InterfaceSpec::ipv4`], [`RouteDestination::network`]) once a
//! document has been validated.
//!
//! The JSON form ("t2n-topology/1") splits each device into a `basic` block
//! (hostname, interfaces) and an `L3` block (static routes). See
//! `docs/topology-schema.md`.

use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Serialize};

use crate::ipv4::{validate_ipv4, Ipv4Error};

pub const SCHEMA_VERSION: &str = "t2n-topology/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeType {
    Router,
    Switch,
    Pc,
}

impl NodeType {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeType::Router => "router",
            NodeType::Switch => "switch",
            NodeType::Pc => "pc",
        }
    }
}

impl fmt::Display for NodeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "router" => Ok(NodeType::Router),
            "switch" => Ok(NodeType::Switch),
            "pc" => Ok(NodeType::Pc),
            other => Err(format!("unknown node type `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    /// Canonical name, e.g. `GigabitEthernet0/0`.
    pub name: String,
    /// Dotted quad as written.
    pub ipv4: String,
    pub prefix_len: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_id: Option<u32>,
    pub is_loopback: bool,
}

impl InterfaceSpec {
    pub fn ipv4(&self) -> Result<Ipv4Addr, Ipv4Error> {
        validate_ipv4(&self.ipv4)
    }

    /// The connected subnet, when address and prefix are both valid.
    pub fn subnet(&self) -> Option<Ipv4Net> {
        let addr = self.ipv4().ok()?;
        Ipv4Net::new(addr, self.prefix_len).ok().map(|n| n.trunc())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RouteDestination {
    pub address: String,
    pub prefix_len: u8,
}

impl RouteDestination {
    /// The destination as a network, without truncating host bits.
    pub fn network(&self) -> Option<Ipv4Net> {
        let addr = validate_ipv4(&self.address).ok()?;
        Ipv4Net::new(addr, self.prefix_len).ok()
    }
}

impl fmt::Display for RouteDestination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.address, self.prefix_len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Via {
    Address(String),
    Device(String),
}

impl fmt::Display for Via {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Via::Address(a) => f.write_str(a),
            Via::Device(d) => f.write_str(d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticRoute {
    pub destination: Option<RouteDestination>,
    pub via: Option<Via>,
    pub resolved_next_hop: Option<Ipv4Addr>,
}

impl StaticRoute {
    pub fn is_complete(&self) -> bool {
        self.destination.is_some() && self.via.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub hostname: String,
    pub node_type: NodeType,
    /// Set when no `type` statement was present and `router` was assumed.
    pub node_type_defaulted: bool,
    pub interfaces: Vec<InterfaceSpec>,
    pub static_routes: Vec<StaticRoute>,
}

impl DeviceSpec {
    pub fn new(hostname: impl Into<String>, node_type: NodeType) -> Self {
        DeviceSpec {
            hostname: hostname.into(),
            node_type,
            node_type_defaulted: false,
            interfaces: Vec::new(),
            static_routes: Vec::new(),
        }
    }

    pub fn interface(&self, name: &str) -> Option<&InterfaceSpec> {
        self.interfaces.iter().find(|i| i.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Endpoint {
    pub device: String,
    pub interface: String,
}

impl Endpoint {
    pub fn new(device: impl Into<String>, interface: impl Into<String>) -> Self {
        Endpoint {
            device: device.into(),
            interface: interface.into(),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.device, self.interface)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub endpoint_a: Endpoint,
    pub endpoint_b: Endpoint,
    pub network_id: u32,
}

impl Connection {
    pub fn touches(&self, device: &str) -> bool {
        self.endpoint_a.device == device || self.endpoint_b.device == device
    }

    /// The endpoint on the other side from `device`, if the connection touches it.
    pub fn peer_of(&self, device: &str) -> Option<&Endpoint> {
        if self.endpoint_a.device == device {
            Some(&self.endpoint_b)
        } else if self.endpoint_b.device == device {
            Some(&self.endpoint_a)
        } else {
            None
        }
    }

    pub fn local_of(&self, device: &str) -> Option<&Endpoint> {
        if self.endpoint_a.device == device {
            Some(&self.endpoint_a)
        } else if self.endpoint_b.device == device {
            Some(&self.endpoint_b)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopologyDocument {
    pub devices: Vec<DeviceSpec>,
    pub connections: Vec<Connection>,
}

impl TopologyDocument {
    pub fn device(&self, hostname: &str) -> Option<&DeviceSpec> {
        self.devices.iter().find(|d| d.hostname == hostname)
    }

    pub fn device_mut(&mut self, hostname: &str) -> Option<&mut DeviceSpec> {
        self.devices.iter_mut().find(|d| d.hostname == hostname)
    }

    pub fn endpoint_interface(&self, ep: &Endpoint) -> Option<&InterfaceSpec> {
        self.device(&ep.device)?.interface(&ep.interface)
    }

    /// Sorts devices by hostname, interfaces by name, routes by (destination, via)
    /// and connections by their endpoints.
    pub fn canonicalize(&mut self) {
        self.devices.sort_by(|a, b| a.hostname.cmp(&b.hostname));
        for d in &mut self.devices {
            d.interfaces.sort_by(|a, b| a.name.cmp(&b.name));
            d.static_routes
                .sort_by(|a, b| (&a.destination, &a.via).cmp(&(&b.destination, &b.via)));
        }
        for c in &mut self.connections {
            if c.endpoint_b < c.endpoint_a {
                std::mem::swap(&mut c.endpoint_a, &mut c.endpoint_b);
            }
        }
        self.connections
            .sort_by(|a, b| (&a.endpoint_a, &a.endpoint_b).cmp(&(&b.endpoint_a, &b.endpoint_b)));
    }

    pub fn canonical(&self) -> TopologyDocument {
        let mut copy = self.clone();
        copy.canonicalize();
        copy
    }

    /// Canonical JSON: canonical ordering, sorted object keys, two-space
    /// indentation, trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let wire = wire::Document::from(&self.canonical());
        // serde_json's default map is a BTreeMap, so going through Value sorts keys.
        let value = serde_json::to_value(&wire).expect("topology serializes");
        let mut out = serde_json::to_string_pretty(&value).expect("value serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<TopologyDocument, serde_json::Error> {
        let wire: wire::Document = serde_json::from_str(text)?;
        Ok(wire.into())
    }
}

/// Serializes the canonical form in the "t2n-topology/1" layout.
impl Serialize for TopologyDocument {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        wire::Document::from(&self.canonical()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TopologyDocument {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        wire::Document::deserialize(d).map(Into::into)
    }
}

mod wire {
    use super::*;

    #[derive(Serialize, Deserialize)]
    pub struct Document {
        pub schema: String,
        pub devices: Vec<Device>,
        pub connections: Vec<Connection>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct Device {
        pub hostname: String,
        pub node_type: NodeType,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        pub node_type_defaulted: bool,
        pub node_configs: NodeConfigs,
    }

    #[derive(Serialize, Deserialize)]
    pub struct NodeConfigs {
        pub basic: Basic,
        #[serde(rename = "L3")]
        pub l3: L3,
    }

    #[derive(Serialize, Deserialize)]
    pub struct Basic {
        pub hostname: String,
        pub interfaces: Vec<InterfaceSpec>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct L3 {
        pub static_routes: Vec<Route>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct Route {
        pub destination: Option<String>,
        pub via: Option<Via>,
        pub resolved_next_hop: Option<Ipv4Addr>,
    }

    impl From<&TopologyDocument> for Document {
        fn from(t: &TopologyDocument) -> Self {
            Document {
                schema: SCHEMA_VERSION.to_string(),
                devices: t
                    .devices
                    .iter()
                    .map(|d| Device {
                        hostname: d.hostname.clone(),
                        node_type: d.node_type,
                        node_type_defaulted: d.node_type_defaulted,
                        node_configs: NodeConfigs {
                            basic: Basic {
                                hostname: d.hostname.clone(),
                                interfaces: d.interfaces.clone(),
                            },
                            l3: L3 {
                                static_routes: d
                                    .static_routes
                                    .iter()
                                    .map(|r| Route {
                                        destination: r.destination.as_ref().map(|d| d.to_string()),
                                        via: r.via.clone(),
                                        resolved_next_hop: r.resolved_next_hop,
                                    })
                                    .collect(),
                            },
                        },
                    })
                    .collect(),
                connections: t.connections.clone(),
            }
        }
    }

    impl From<Document> for TopologyDocument {
        fn from(d: Document) -> Self {
            TopologyDocument {
                devices: d
                    .devices
                    .into_iter()
                    .map(|dev| DeviceSpec {
                        hostname: dev.hostname,
                        node_type: dev.node_type,
                        node_type_defaulted: dev.node_type_defaulted,
                        interfaces: dev.node_configs.basic.interfaces,
                        static_routes: dev
                            .node_configs
                            .l3
                            .static_routes
                            .into_iter()
                            .map(|r| StaticRoute {
                                destination: r.destination.map(|s| {
                                    let (address, prefix) = s.split_once('/').unwrap_or((&s, "32"));
                                    RouteDestination {
                                        address: address.to_string(),
                                        prefix_len: prefix.parse().unwrap_or(u8::MAX),
                                    }
                                }),
                                via: r.via,
                                resolved_next_hop: r.resolved_next_hop,
                            })
                            .collect(),
                    })
                    .collect(),
                connections: d.connections,
            }
        }
    }
}
