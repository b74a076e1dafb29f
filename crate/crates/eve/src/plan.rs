//! Node templates and the ordered provisioning plan.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use t2n_core::{NodeType, TopologyDocument};

use crate::config::{render_device_config, ConfigError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTemplate {
    pub template: String,
    pub image: String,
    pub cpu: u32,
    pub ram_mb: u32,
    pub ethernet: u32,
    #[serde(default)]
    pub extra: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Templates(pub BTreeMap<NodeType, NodeTemplate>);

impl Default for Templates {
    /// Routers only: IOSv with 1 vCPU, 1024 MB and 4 ethernets.
    fn default() -> Self {
        let mut map = BTreeMap::new();
        map.insert(
            NodeType::Router,
            NodeTemplate {
                template: "vios".into(),
                image: "vios-adventerprisek9-m-15.6.2T".into(),
                cpu: 1,
                ram_mb: 1024,
                ethernet: 4,
                extra: BTreeMap::new(),
            },
        );
        Templates(map)
    }
}

impl Templates {
    pub fn get(&self, ty: NodeType) -> Option<&NodeTemplate> {
        self.0.get(&ty)
    }

    pub fn node_type_of(&self, template: &str) -> Option<NodeType> {
        self.0
            .iter()
            .find(|(_, t)| t.template == template)
            .map(|(ty, _)| *ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no node template for node type {0}")]
    MissingTemplate(NodeType),
    #[error("{device} needs {needed} ethernet ports but its template has {available}")]
    InterfaceCapacity {
        device: String,
        needed: usize,
        available: u32,
    },
    #[error("{device} has no interface {interface}")]
    UnknownInterface { device: String, interface: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "call", rename_all = "snake_case")]
pub enum PlannedCall {
    Login,
    CreateLab {
        name: String,
    },
    CreateNode {
        hostname: String,
        template: NodeTemplate,
    },
    CreateNetwork {
        network_id: u32,
        name: String,
    },
    Link {
        hostname: String,
        interface: String,
        port: u32,
        network_id: u32,
    },
    Start {
        hostname: String,
    },
    PushConfig {
        hostname: String,
        config: String,
    },
}

impl PlannedCall {
    pub fn kind(&self) -> &'static str {
        match self {
            PlannedCall::Login => "login",
            PlannedCall::CreateLab { .. } => "create_lab",
            PlannedCall::CreateNode { .. } => "create_node",
            PlannedCall::CreateNetwork { .. } => "create_network",
            PlannedCall::Link { .. } => "link",
            PlannedCall::Start { .. } => "start",
            PlannedCall::PushConfig { .. } => "push_config",
        }
    }

    /// Short human label, e.g. `create_node R-1`.
    pub fn label(&self) -> String {
        match self {
            PlannedCall::Login => "login".into(),
            PlannedCall::CreateLab { name } => format!("create_lab {name}"),
            PlannedCall::CreateNode { hostname, .. } => format!("create_node {hostname}"),
            PlannedCall::CreateNetwork { name, .. } => format!("create_network {name}"),
            PlannedCall::Link {
                hostname,
                interface,
                network_id,
                ..
            } => {
                format!(
                    "link {hostname}.{interface} -> {}",
                    network_name(*network_id)
                )
            }
            PlannedCall::Start { hostname } => format!("start {hostname}"),
            PlannedCall::PushConfig { hostname, .. } => format!("push_config {hostname}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvisionPlan {
    pub lab_name: String,
    pub calls: Vec<PlannedCall>,
}

impl ProvisionPlan {
    pub fn count(&self, kind: &str) -> usize {
        self.calls.iter().filter(|c| c.kind() == kind).count()
    }
}

pub fn network_name(network_id: u32) -> String {
    format!("link-{network_id}")
}

/// Ethernet port of `interface`: its position among the device's
/// non-loopback interfaces in name order.
pub fn port_index(device: &t2n_core::DeviceSpec, interface: &str) -> Option<u32> {
    let mut names: Vec<&str> = device
        .interfaces
        .iter()
        .filter(|i| !i.is_loopback)
        .map(|i| i.name.as_str())
        .collect();
    names.sort();
    names.iter().position(|n| *n == interface).map(|p| p as u32)
}

/// Builds the call sequence: login, lab, every node, every network, both
/// link ends of every connection, then start and config push per node.
pub fn plan(
    topo: &TopologyDocument,
    templates: &Templates,
    lab_name: &str,
) -> Result<ProvisionPlan, PlanError> {
    let topo = topo.canonical();
    let mut calls = vec![
        PlannedCall::Login,
        PlannedCall::CreateLab {
            name: lab_name.to_string(),
        },
    ];
    let mut configs = Vec::new();
    for d in &topo.devices {
        let template = templates
            .get(d.node_type)
            .ok_or(PlanError::MissingTemplate(d.node_type))?;
        let needed = d.interfaces.iter().filter(|i| !i.is_loopback).count();
        if needed > template.ethernet as usize {
            return Err(PlanError::InterfaceCapacity {
                device: d.hostname.clone(),
                needed,
                available: template.ethernet,
            });
        }
        calls.push(PlannedCall::CreateNode {
            hostname: d.hostname.clone(),
            template: template.clone(),
        });
        configs.push((d.hostname.clone(), render_device_config(d)?));
    }
    for c in &topo.connections {
        calls.push(PlannedCall::CreateNetwork {
            network_id: c.network_id,
            name: network_name(c.network_id),
        });
    }
    for c in &topo.connections {
        for ep in [&c.endpoint_a, &c.endpoint_b] {
            let unknown = || PlanError::UnknownInterface {
                device: ep.device.clone(),
                interface: ep.interface.clone(),
            };
            let dev = topo.device(&ep.device).ok_or_else(unknown)?;
            let port = port_index(dev, &ep.interface).ok_or_else(unknown)?;
            calls.push(PlannedCall::Link {
                hostname: ep.device.clone(),
                interface: ep.interface.clone(),
                port,
                network_id: c.network_id,
            });
        }
    }
    for d in &topo.devices {
        calls.push(PlannedCall::Start {
            hostname: d.hostname.clone(),
        });
    }
    for (hostname, config) in configs {
        calls.push(PlannedCall::PushConfig { hostname, config });
    }
    Ok(ProvisionPlan {
        lab_name: lab_name.to_string(),
        calls,
    })
}
