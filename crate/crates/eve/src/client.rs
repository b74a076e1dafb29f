//! Blocking EVE-NG client: executes a [`ProvisionPlan`] and reads a lab back.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::Method;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use t2n_core::{Connection, Endpoint, TopologyDocument};

use crate::config::parse_device_config;
use crate::plan::{PlannedCall, ProvisionPlan, Templates};
use crate::wire;

pub const PASSWORD_ENV: &str = "T2N_EVE_PASSWORD";
/// Extra attempts for a call that failed with a 5xx or a transport error.
pub const MAX_RETRIES: u32 = 2;

/// Emulator password; never printed.
#[derive(Clone)]
pub struct Password(String);

impl Password {
    pub fn new(p: impl Into<String>) -> Self {
        Password(p.into())
    }

    pub fn from_env() -> Result<Self, ProvisionError> {
        std::env::var(PASSWORD_ENV)
            .map(Password)
            .map_err(|_| ProvisionError::MissingPassword)
    }
}

impl fmt::Debug for Password {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Password(***)")
    }
}

#[derive(Clone, Default)]
pub struct EveSession {
    pub base_url: String,
    pub session_cookie: Option<String>,
    pub lab_path: Option<String>,
    pub node_id_map: BTreeMap<String, u32>,
    pub net_id_map: BTreeMap<u32, u32>,
}

impl EveSession {
    pub fn new(base_url: impl Into<String>) -> Self {
        EveSession {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            ..Default::default()
        }
    }
}

impl fmt::Debug for EveSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EveSession")
            .field("base_url", &self.base_url)
            .field("logged_in", &self.session_cookie.is_some())
            .field("lab_path", &self.lab_path)
            .field("node_id_map", &self.node_id_map)
            .field("net_id_map", &self.net_id_map)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallOutcome {
    pub kind: String,
    pub label: String,
    pub status: Option<u16>,
    pub attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvisionReport {
    pub lab_path: Option<String>,
    pub completed: Vec<CallOutcome>,
    pub failed: Option<CallOutcome>,
    pub skipped: Vec<String>,
    pub retries: u32,
    pub relogins: u32,
}

impl ProvisionReport {
    pub fn completed_count(&self, kind: &str) -> usize {
        self.completed.iter().filter(|c| c.kind == kind).count()
    }
}

#[derive(Debug, Error)]
pub enum ProvisionError {
    #[error("emulator password not set; export {PASSWORD_ENV}")]
    MissingPassword,
    #[error("emulator rejected the credentials (status {0})")]
    AuthFailure(u16),
    #[error("emulator returned {status} for {call}: {body}")]
    ApiError {
        call: String,
        status: u16,
        body: String,
    },
    #[error("emulator unreachable: {0}")]
    Unreachable(String),
    #[error("provisioning aborted at {}", .0.failed.as_ref().map(|f| f.label.as_str()).unwrap_or("?"))]
    PlanAborted(Box<ProvisionReport>),
    #[error("lab read-back: {0}")]
    ReadBack(String),
}

struct Failure {
    status: Option<u16>,
    message: String,
}

impl Failure {
    fn retriable(&self) -> bool {
        self.status.is_none_or(|s| s >= 500)
    }
}

pub struct EveClient {
    username: String,
    password: Password,
    http: Client,
    retry_delay: Duration,
}

impl EveClient {
    pub fn new(username: impl Into<String>, password: Password) -> Result<Self, ProvisionError> {
        let http = Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| ProvisionError::Unreachable(e.to_string()))?;
        Ok(EveClient {
            username: username.into(),
            password,
            http,
            retry_delay: Duration::from_millis(200),
        })
    }

    pub fn with_retry_delay(mut self, delay: Duration) -> Self {
        self.retry_delay = delay;
        self
    }

    fn send(
        &self,
        s: &EveSession,
        method: Method,
        path: &str,
        body: Option<&Value>,
    ) -> Result<(u16, wire::Envelope, Option<String>), Failure> {
        let mut req = self.http.request(method, format!("{}{}", s.base_url, path));
        if let Some(cookie) = &s.session_cookie {
            req = req.header("Cookie", format!("{}={}", wire::SESSION_COOKIE, cookie));
        }
        if let Some(b) = body {
            req = req.json(b);
        }
        let resp = req.send().map_err(|e| Failure {
            status: None,
            message: e.to_string(),
        })?;
        let status = resp.status().as_u16();
        let cookie = resp
            .headers()
            .get_all("set-cookie")
            .iter()
            .filter_map(|v| v.to_str().ok())
            .find_map(wire::session_from_set_cookie);
        let text = resp.text().unwrap_or_default();
        let env: wire::Envelope = serde_json::from_str(&text).unwrap_or_else(|_| {
            wire::Envelope::fail(status, text.chars().take(200).collect::<String>())
        });
        if (200..300).contains(&status) {
            Ok((status, env, cookie))
        } else {
            Err(Failure {
                status: Some(status),
                message: env.message,
            })
        }
    }

    fn login(&self, s: &mut EveSession) -> Result<u16, Failure> {
        let body = serde_json::to_value(wire::LoginRequest::new(&self.username, &self.password.0))
            .unwrap();
        let (status, _, cookie) = self.send(s, Method::POST, wire::LOGIN, Some(&body))?;
        s.session_cookie = Some(cookie.ok_or(Failure {
            status: Some(status),
            message: "no session cookie".into(),
        })?);
        Ok(status)
    }

    fn lab<'a>(&self, s: &'a EveSession) -> Result<&'a str, Failure> {
        s.lab_path.as_deref().ok_or(Failure {
            status: None,
            message: "lab not created".into(),
        })
    }

    fn perform(&self, call: &PlannedCall, s: &mut EveSession) -> Result<u16, Failure> {
        let local = |m: String| Failure {
            status: Some(0),
            message: m,
        };
        match call {
            PlannedCall::Login => self.login(s),
            PlannedCall::CreateLab { name } => {
                let (st, _, _) = self.send(
                    s,
                    Method::POST,
                    wire::LABS,
                    Some(&wire::create_lab_body(name)),
                )?;
                s.lab_path = Some(wire::lab_file(name));
                Ok(st)
            }
            PlannedCall::CreateNode { hostname, template } => {
                let lab = self.lab(s)?.to_string();
                let body = serde_json::to_value(wire::create_node_body(
                    hostname,
                    template,
                    s.node_id_map.len() as u32,
                ))
                .unwrap();
                let (st, env, _) = self.send(s, Method::POST, &wire::nodes(&lab), Some(&body))?;
                let id = wire::created_id(&env.data)
                    .ok_or_else(|| local("node id missing in response".into()))?;
                s.node_id_map.insert(hostname.clone(), id);
                Ok(st)
            }
            PlannedCall::CreateNetwork { network_id, name } => {
                let lab = self.lab(s)?.to_string();
                let body = serde_json::to_value(wire::create_network_body(
                    name,
                    s.net_id_map.len() as u32,
                ))
                .unwrap();
                let (st, env, _) =
                    self.send(s, Method::POST, &wire::networks(&lab), Some(&body))?;
                let id = wire::created_id(&env.data)
                    .ok_or_else(|| local("network id missing in response".into()))?;
                s.net_id_map.insert(*network_id, id);
                Ok(st)
            }
            PlannedCall::Link {
                hostname,
                port,
                network_id,
                ..
            } => {
                let lab = self.lab(s)?.to_string();
                let node = *s
                    .node_id_map
                    .get(hostname)
                    .ok_or_else(|| local(format!("node {hostname} not created")))?;
                let net = *s
                    .net_id_map
                    .get(network_id)
                    .ok_or_else(|| local(format!("network {network_id} not created")))?;
                let (st, _, _) = self.send(
                    s,
                    Method::PUT,
                    &wire::node_interfaces(&lab, node),
                    Some(&wire::link_body(*port, net)),
                )?;
                Ok(st)
            }
            PlannedCall::Start { hostname } => {
                let lab = self.lab(s)?.to_string();
                let node = *s
                    .node_id_map
                    .get(hostname)
                    .ok_or_else(|| local(format!("node {hostname} not created")))?;
                let (st, _, _) = self.send(s, Method::GET, &wire::node_start(&lab, node), None)?;
                Ok(st)
            }
            PlannedCall::PushConfig { hostname, config } => {
                let lab = self.lab(s)?.to_string();
                let node = *s
                    .node_id_map
                    .get(hostname)
                    .ok_or_else(|| local(format!("node {hostname} not created")))?;
                let body = serde_json::to_value(wire::ConfigBody {
                    id: node,
                    data: config.clone(),
                })
                .unwrap();
                let (st, _, _) =
                    self.send(s, Method::PUT, &wire::node_config(&lab, node), Some(&body))?;
                Ok(st)
            }
        }
    }

    /// Runs the plan in order. A 401 triggers one transparent re-login per
    /// call; 5xx and transport errors are retried up to [`MAX_RETRIES`] times.
    pub fn execute(
        &self,
        plan: &ProvisionPlan,
        s: &mut EveSession,
    ) -> Result<ProvisionReport, ProvisionError> {
        let mut report = ProvisionReport::default();
        for (index, call) in plan.calls.iter().enumerate() {
            let label = call.label();
            let mut attempts = 0;
            let mut relogged = false;
            loop {
                attempts += 1;
                match self.perform(call, s) {
                    Ok(status) => {
                        tracing::info!(call = %label, status, attempts, "eve call ok");
                        report.completed.push(CallOutcome {
                            kind: call.kind().into(),
                            label: label.clone(),
                            status: Some(status),
                            attempts,
                            error: None,
                        });
                        break;
                    }
                    Err(f) => {
                        tracing::warn!(call = %label, status = ?f.status, attempts, error = %f.message, "eve call failed");
                        if matches!(call, PlannedCall::Login) && matches!(f.status, Some(401 | 403))
                        {
                            return Err(ProvisionError::AuthFailure(f.status.unwrap()));
                        }
                        if f.status == Some(401) && !relogged {
                            relogged = true;
                            report.relogins += 1;
                            tracing::info!(call = %label, "session expired, logging in again");
                            if let Err(lf) = self.login(s) {
                                return Err(ProvisionError::AuthFailure(lf.status.unwrap_or(0)));
                            }
                            attempts -= 1;
                            continue;
                        }
                        if f.retriable() && attempts <= MAX_RETRIES {
                            report.retries += 1;
                            std::thread::sleep(self.retry_delay * attempts);
                            continue;
                        }
                        report.failed = Some(CallOutcome {
                            kind: call.kind().into(),
                            label: label.clone(),
                            status: f.status,
                            attempts,
                            error: Some(f.message),
                        });
                        report.skipped = plan.calls[index + 1..]
                            .iter()
                            .map(PlannedCall::label)
                            .collect();
                        report.lab_path = s.lab_path.clone();
                        return Err(ProvisionError::PlanAborted(Box::new(report)));
                    }
                }
            }
        }
        report.lab_path = s.lab_path.clone();
        Ok(report)
    }

    fn get(&self, s: &EveSession, path: &str) -> Result<Value, ProvisionError> {
        match self.send(s, Method::GET, path, None) {
            Ok((_, env, _)) => Ok(env.data),
            Err(f) => Err(match f.status {
                None => ProvisionError::Unreachable(f.message),
                Some(status) => ProvisionError::ApiError {
                    call: format!("GET {path}"),
                    status,
                    body: f.message,
                },
            }),
        }
    }

    /// Rebuilds a topology from the lab's nodes, port bindings and pushed
    /// configurations.
    pub fn read_back(
        &self,
        s: &EveSession,
        templates: &Templates,
    ) -> Result<TopologyDocument, ProvisionError> {
        let bad = |m: &str| ProvisionError::ReadBack(m.to_string());
        let lab = s.lab_path.clone().ok_or_else(|| bad("no lab"))?;
        let nodes: BTreeMap<String, wire::NodeView> =
            serde_json::from_value(self.get(s, &wire::nodes(&lab))?)
                .map_err(|e| bad(&e.to_string()))?;
        let networks: BTreeMap<String, wire::NetworkView> =
            serde_json::from_value(self.get(s, &wire::networks(&lab))?)
                .map_err(|e| bad(&e.to_string()))?;
        let net_names: BTreeMap<u32, u32> = networks
            .values()
            .filter_map(|n| {
                n.name
                    .strip_prefix("link-")
                    .and_then(|id| id.parse().ok())
                    .map(|id| (n.id, id))
            })
            .collect();

        let mut topo = TopologyDocument::default();
        let mut members: BTreeMap<u32, Vec<Endpoint>> = BTreeMap::new();
        for node in nodes.values() {
            let cfg = self.get(s, &wire::node_config(&lab, node.id))?;
            let text = cfg
                .get("data")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("config missing"))?;
            let mut device = parse_device_config(text).map_err(|e| bad(&e.to_string()))?;
            device.hostname = node.name.clone();
            device.node_type = templates
                .node_type_of(&node.template)
                .unwrap_or(t2n_core::NodeType::Router);
            let mut physical: Vec<String> = device
                .interfaces
                .iter()
                .filter(|i| !i.is_loopback)
                .map(|i| i.name.clone())
                .collect();
            physical.sort();

            let ports = self.get(s, &wire::node_interfaces(&lab, node.id))?;
            let ports: Vec<wire::PortView> =
                serde_json::from_value(ports.get("ethernet").cloned().unwrap_or(Value::Null))
                    .map_err(|e| bad(&e.to_string()))?;
            for (port, view) in ports.iter().enumerate() {
                if view.network_id == 0 {
                    continue;
                }
                let id = *net_names
                    .get(&view.network_id)
                    .ok_or_else(|| bad("port bound to an unknown network"))?;
                let name = physical
                    .get(port)
                    .ok_or_else(|| bad("port without a configured interface"))?;
                if let Some(i) = device.interfaces.iter_mut().find(|i| &i.name == name) {
                    i.network_id = Some(id);
                }
                members
                    .entry(id)
                    .or_default()
                    .push(Endpoint::new(node.name.clone(), name.clone()));
            }
            topo.devices.push(device);
        }
        for (id, eps) in members {
            let [a, b]: [Endpoint; 2] = eps
                .try_into()
                .map_err(|_| bad("network without exactly two members"))?;
            topo.connections.push(Connection {
                endpoint_a: a,
                endpoint_b: b,
                network_id: id,
            });
        }
        topo.canonicalize();
        Ok(topo)
    }

    pub fn delete_lab(&self, s: &EveSession) -> Result<(), ProvisionError> {
        let lab = s
            .lab_path
            .clone()
            .ok_or(ProvisionError::ReadBack("no lab".into()))?;
        self.send(s, Method::DELETE, &wire::lab(&lab), None)
            .map(|_| ())
            .map_err(|f| ProvisionError::ApiError {
                call: "delete_lab".into(),
                status: f.status.unwrap_or(0),
                body: f.message,
            })
    }
}
