//! In-process stand-in for the EVE-NG REST API with fault injection.
//!
//! Serves on 127.0.0.1 from a background thread. Every request is recorded
//! in a call log; requests that reference objects which do not exist yet
//! are rejected with 404 and recorded as ordering violations.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, Method, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::{json, Value};
use tokio::sync::oneshot;

use crate::wire::{self, Envelope, NetworkView, NodeView, PortView};

#[derive(Debug, Clone)]
pub struct MockOptions {
    pub username: String,
    pub password: String,
    /// 1-based position (by distinct hostname) of a node whose creation
    /// always fails with 500.
    pub fail_node: Option<usize>,
    /// The session is invalidated once, on the n-th authenticated request,
    /// which then gets 401.
    pub expire_session_at: Option<usize>,
    /// Call kind to number of leading 503 responses.
    pub transient_failures: BTreeMap<String, u32>,
}

impl Default for MockOptions {
    fn default() -> Self {
        MockOptions {
            username: "admin".into(),
            password: "eve".into(),
            fail_node: None,
            expire_session_at: None,
            transient_failures: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoggedCall {
    pub kind: String,
    pub method: String,
    pub path: String,
    pub status: u16,
}

#[derive(Debug, Clone)]
struct MockNode {
    view: NodeView,
    ports: Vec<u32>,
    config: Option<String>,
}

#[derive(Debug, Clone, Default)]
struct MockLab {
    nodes: BTreeMap<u32, MockNode>,
    networks: BTreeMap<u32, NetworkView>,
}

#[derive(Debug, Default)]
struct MockState {
    opts: Option<MockOptions>,
    sessions: BTreeSet<String>,
    issued: u32,
    authed_calls: usize,
    labs: BTreeMap<String, MockLab>,
    node_names: Vec<String>,
    log: Vec<LoggedCall>,
    violations: Vec<String>,
}

type Shared = Arc<Mutex<MockState>>;

pub struct MockEve {
    addr: SocketAddr,
    state: Shared,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl MockEve {
    pub fn start(opts: MockOptions) -> MockEve {
        let state: Shared = Arc::new(Mutex::new(MockState {
            opts: Some(opts),
            ..Default::default()
        }));
        let app = Router::new().fallback(handle).with_state(state.clone());
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let (stop_tx, stop_rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread()
                .enable_all()
                .build()
                .expect("runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
                    .await
                    .expect("bind");
                addr_tx.send(listener.local_addr().expect("addr")).ok();
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        stop_rx.await.ok();
                    })
                    .await
                    .ok();
            });
        });
        let addr = addr_rx.recv().expect("mock emulator failed to start");
        MockEve {
            addr,
            state,
            shutdown: Some(stop_tx),
            thread: Some(thread),
        }
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn calls(&self) -> Vec<LoggedCall> {
        self.state.lock().unwrap().log.clone()
    }

    pub fn call_kinds(&self) -> Vec<String> {
        self.calls().into_iter().map(|c| c.kind).collect()
    }

    pub fn violations(&self) -> Vec<String> {
        self.state.lock().unwrap().violations.clone()
    }

    pub fn lab_names(&self) -> Vec<String> {
        self.state.lock().unwrap().labs.keys().cloned().collect()
    }

    pub fn node_count(&self, lab: &str) -> usize {
        self.state
            .lock()
            .unwrap()
            .labs
            .get(lab)
            .map_or(0, |l| l.nodes.len())
    }
}

impl Drop for MockEve {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            tx.send(()).ok();
        }
        if let Some(t) = self.thread.take() {
            t.join().ok();
        }
    }
}

fn reply(code: u16, data: Value) -> Response {
    let status = StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(Envelope::ok(code, data))).into_response()
}

fn fail(code: u16, msg: &str) -> Response {
    let status = StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (status, Json(Envelope::fail(code, msg))).into_response()
}

fn classify(method: &Method, segs: &[&str]) -> &'static str {
    match (method.as_str(), segs) {
        ("POST", ["auth", "login"]) => "login",
        ("POST", ["labs"]) => "create_lab",
        ("DELETE", ["labs", _]) => "delete_lab",
        ("GET", ["labs", _, "nodes"]) => "list_nodes",
        ("POST", ["labs", _, "nodes"]) => "create_node",
        ("GET", ["labs", _, "networks"]) => "list_networks",
        ("POST", ["labs", _, "networks"]) => "create_network",
        ("GET", ["labs", _, "nodes", _, "interfaces"]) => "get_interfaces",
        ("PUT", ["labs", _, "nodes", _, "interfaces"]) => "link",
        ("GET", ["labs", _, "nodes", _, "start"]) => "start",
        ("GET", ["labs", _, "configs", _]) => "get_config",
        ("PUT", ["labs", _, "configs", _]) => "push_config",
        _ => "unknown",
    }
}

fn session_of(headers: &HeaderMap) -> Option<String> {
    let cookies = headers.get(header::COOKIE)?.to_str().ok()?;
    cookies.split(';').find_map(|kv| {
        kv.trim()
            .strip_prefix(&format!("{}=", wire::SESSION_COOKIE))
            .map(str::to_string)
    })
}

async fn handle(
    State(state): State<Shared>,
    method: Method,
    uri: Uri,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let path = uri.path().to_string();
    let segs: Vec<&str> = path
        .trim_start_matches("/api/")
        .split('/')
        .filter(|s| !s.is_empty())
        .collect();
    let kind = classify(&method, &segs);
    let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let mut st = state.lock().unwrap();
    let resp = st.dispatch(kind, &segs, &headers, &body);
    let status = resp.status().as_u16();
    st.log.push(LoggedCall {
        kind: kind.to_string(),
        method: method.to_string(),
        path,
        status,
    });
    resp
}

impl MockState {
    fn opts(&self) -> &MockOptions {
        self.opts.as_ref().expect("options")
    }

    fn dispatch(
        &mut self,
        kind: &'static str,
        segs: &[&str],
        headers: &HeaderMap,
        body: &Value,
    ) -> Response {
        if kind == "login" {
            return self.login(body);
        }
        match session_of(headers) {
            Some(s) if self.sessions.contains(&s) => {}
            _ => return fail(401, "unauthorized"),
        }
        self.authed_calls += 1;
        if self.opts().expire_session_at == Some(self.authed_calls) {
            self.sessions.clear();
            return fail(401, "session expired");
        }
        if let Some(n) = self
            .opts
            .as_mut()
            .and_then(|o| o.transient_failures.get_mut(kind))
        {
            if *n > 0 {
                *n -= 1;
                return fail(503, "temporarily unavailable");
            }
        }
        match kind {
            "create_lab" => self.create_lab(body),
            "delete_lab" => match self.labs.remove(segs[1]) {
                Some(_) => reply(200, Value::Null),
                None => fail(404, "no such lab"),
            },
            "unknown" => fail(404, "no such endpoint"),
            _ => {
                let lab = segs[1].to_string();
                if !self.labs.contains_key(&lab) {
                    self.violations
                        .push(format!("{kind} before lab {lab} exists"));
                    return fail(404, "no such lab");
                }
                self.lab_call(kind, &lab, segs, body)
            }
        }
    }

    fn login(&mut self, body: &Value) -> Response {
        let o = self.opts();
        if body["username"] != o.username.as_str() || body["password"] != o.password.as_str() {
            return fail(401, "bad credentials");
        }
        self.issued += 1;
        let token = format!("mock-{:04}", self.issued);
        self.sessions.insert(token.clone());
        let mut resp = reply(200, Value::Null);
        let cookie = format!("{}={}; Path=/", wire::SESSION_COOKIE, token);
        resp.headers_mut()
            .insert(header::SET_COOKIE, cookie.parse().unwrap());
        resp
    }

    fn create_lab(&mut self, body: &Value) -> Response {
        let Some(name) = body["name"].as_str() else {
            return fail(400, "name missing");
        };
        let file = wire::lab_file(name);
        if self.labs.contains_key(&file) {
            return fail(409, "lab exists");
        }
        self.labs.insert(file, MockLab::default());
        reply(201, Value::Null)
    }

    fn lab_call(&mut self, kind: &str, lab_name: &str, segs: &[&str], body: &Value) -> Response {
        let node_id: Option<u32> = segs.get(3).and_then(|s| s.parse().ok());
        if kind == "create_node" {
            let name = body["name"].as_str().unwrap_or_default().to_string();
            if !self.node_names.contains(&name) {
                self.node_names.push(name.clone());
            }
            let ordinal = self.node_names.iter().position(|n| *n == name).unwrap() + 1;
            if self.opts().fail_node == Some(ordinal) {
                return fail(500, "node creation failed");
            }
        }
        let lab = self.labs.get_mut(lab_name).unwrap();
        let mut violation = None;
        let resp = match kind {
            "list_nodes" => {
                let map: BTreeMap<String, &NodeView> = lab
                    .nodes
                    .iter()
                    .map(|(id, n)| (id.to_string(), &n.view))
                    .collect();
                reply(200, json!(map))
            }
            "create_node" => {
                let id = lab.nodes.len() as u32 + 1;
                let u = |k: &str| body[k].as_u64().unwrap_or(0) as u32;
                let view = NodeView {
                    id,
                    name: body["name"].as_str().unwrap_or_default().into(),
                    template: body["template"].as_str().unwrap_or_default().into(),
                    image: body["image"].as_str().unwrap_or_default().into(),
                    cpu: u("cpu"),
                    ram: u("ram"),
                    ethernet: u("ethernet"),
                    status: 0,
                };
                let ports = vec![0; view.ethernet as usize];
                lab.nodes.insert(
                    id,
                    MockNode {
                        view,
                        ports,
                        config: None,
                    },
                );
                reply(201, json!({ "id": id }))
            }
            "list_networks" => {
                let map: BTreeMap<String, &NetworkView> = lab
                    .networks
                    .iter()
                    .map(|(id, n)| (id.to_string(), n))
                    .collect();
                reply(200, json!(map))
            }
            "create_network" => {
                let id = lab.networks.len() as u32 + 1;
                let name = body["name"].as_str().unwrap_or_default().to_string();
                lab.networks.insert(id, NetworkView { id, name });
                reply(201, json!({ "id": id }))
            }
            _ => match node_id.and_then(|id| lab.nodes.get_mut(&id)) {
                None => {
                    violation = Some(format!(
                        "{kind} for node {:?} which does not exist",
                        segs.get(3)
                    ));
                    fail(404, "no such node")
                }
                Some(node) => match kind {
                    "get_interfaces" => {
                        let ports: Vec<PortView> = node
                            .ports
                            .iter()
                            .enumerate()
                            .map(|(i, n)| PortView {
                                name: format!("Gi0/{i}"),
                                network_id: *n,
                            })
                            .collect();
                        reply(200, json!({ "ethernet": ports }))
                    }
                    "link" => {
                        let binding = body.as_object().and_then(|m| m.iter().next());
                        match binding
                            .and_then(|(p, n)| Some((p.parse::<usize>().ok()?, n.as_u64()? as u32)))
                        {
                            Some((port, net))
                                if port < node.ports.len() && lab.networks.contains_key(&net) =>
                            {
                                node.ports[port] = net;
                                reply(201, Value::Null)
                            }
                            Some((port, net)) if port < node.ports.len() => {
                                violation =
                                    Some(format!("link to network {net} which does not exist"));
                                fail(404, "no such network")
                            }
                            _ => fail(400, "bad port binding"),
                        }
                    }
                    "start" => {
                        node.view.status = 2;
                        reply(200, Value::Null)
                    }
                    "get_config" => match &node.config {
                        Some(c) => reply(200, json!({ "id": node.view.id, "data": c })),
                        None => fail(404, "no config"),
                    },
                    "push_config" => match body["data"].as_str() {
                        Some(text) => {
                            node.config = Some(text.to_string());
                            reply(201, Value::Null)
                        }
                        None => fail(400, "config data missing"),
                    },
                    _ => fail(404, "no such endpoint"),
                },
            },
        };
        if let Some(v) = violation {
            self.violations.push(v);
        }
        resp
    }
}
