//! EVE-NG REST paths and payload shapes. Everything that depends on the
//! emulator's API version lives here.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::plan::NodeTemplate;

pub const SESSION_COOKIE: &str = "unetlab_session";

pub const LOGIN: &str = "/api/auth/login";
pub const LABS: &str = "/api/labs";

pub fn lab_file(name: &str) -> String {
    format!("{name}.unl")
}

pub fn lab(lab: &str) -> String {
    format!("/api/labs/{lab}")
}

pub fn nodes(lab: &str) -> String {
    format!("/api/labs/{lab}/nodes")
}

pub fn networks(lab: &str) -> String {
    format!("/api/labs/{lab}/networks")
}

pub fn node_interfaces(lab: &str, node: u32) -> String {
    format!("/api/labs/{lab}/nodes/{node}/interfaces")
}

pub fn node_start(lab: &str, node: u32) -> String {
    format!("/api/labs/{lab}/nodes/{node}/start")
}

pub fn node_config(lab: &str, node: u32) -> String {
    format!("/api/labs/{lab}/configs/{node}")
}

/// Response wrapper used by every endpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope {
    pub code: u16,
    pub status: String,
    pub message: String,
    #[serde(default)]
    pub data: Value,
}

impl Envelope {
    pub fn ok(code: u16, data: Value) -> Self {
        Envelope {
            code,
            status: "success".into(),
            message: String::new(),
            data,
        }
    }

    pub fn fail(code: u16, message: impl Into<String>) -> Self {
        Envelope {
            code,
            status: "fail".into(),
            message: message.into(),
            data: Value::Null,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoginRequest {
    pub username: String,
    pub password: String,
    pub html5: String,
}

impl LoginRequest {
    pub fn new(username: &str, password: &str) -> Self {
        LoginRequest {
            username: username.into(),
            password: password.into(),
            html5: "-1".into(),
        }
    }
}

pub fn create_lab_body(name: &str) -> Value {
    json!({"path": "/", "name": name, "version": "1", "author": "t2n", "description": "provisioned by t2n"})
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeBody {
    #[serde(rename = "type")]
    pub kind: String,
    pub template: String,
    pub image: String,
    pub name: String,
    pub cpu: u32,
    pub ram: u32,
    pub ethernet: u32,
    pub left: u32,
    pub top: u32,
}

pub fn create_node_body(hostname: &str, t: &NodeTemplate, index: u32) -> NodeBody {
    NodeBody {
        kind: "qemu".into(),
        template: t.template.clone(),
        image: t.image.clone(),
        name: hostname.into(),
        cpu: t.cpu,
        ram: t.ram_mb,
        ethernet: t.ethernet,
        left: 100 + 150 * index,
        top: 200,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkBody {
    #[serde(rename = "type")]
    pub kind: String,
    pub name: String,
    pub left: u32,
    pub top: u32,
}

pub fn create_network_body(name: &str, index: u32) -> NetworkBody {
    NetworkBody {
        kind: "bridge".into(),
        name: name.into(),
        left: 175 + 150 * index,
        top: 100,
    }
}

/// `{"<port>": <network id>}`.
pub fn link_body(port: u32, network: u32) -> Value {
    json!({ port.to_string(): network })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigBody {
    pub id: u32,
    pub data: String,
}

/// `data` of a created node or network: `{"id": n}`.
pub fn created_id(data: &Value) -> Option<u32> {
    data.get("id").and_then(Value::as_u64).map(|v| v as u32)
}

/// One ethernet port in the node-interfaces listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PortView {
    pub name: String,
    pub network_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeView {
    pub id: u32,
    pub name: String,
    pub template: String,
    pub image: String,
    pub cpu: u32,
    pub ram: u32,
    pub ethernet: u32,
    pub status: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkView {
    pub id: u32,
    pub name: String,
}

/// `Set-Cookie` value for the session cookie, if present.
pub fn session_from_set_cookie(header: &str) -> Option<String> {
    header
        .split(';')
        .next()
        .and_then(|kv| kv.trim().strip_prefix(&format!("{SESSION_COOKIE}=")))
        .map(str::to_string)
}
