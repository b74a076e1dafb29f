//! Conversational session: scenario in, clarification loop, provisioning,
//! then queries against the provisioned network.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use t2n_core::netsim::{instantiate, SimNetwork};
use t2n_core::validate::MissingField;
use t2n_core::{
    extract_topology, make_clarification, parse_scs, validate_topology, Finding, Strictness,
    TopologyDocument, ValidationReport,
};
use t2n_eve::{EveClient, EveSession, Password, ProvisionReport, Templates};
use t2n_llm::{AdapterExchange, Outcome, ScenarioAdapter, Turn};

pub mod query;
pub mod store;

pub use query::{run_query, Query, QueryError};
pub use store::{Advanced, SessionStore, StoreError};

/// Frozen welcome banner.
pub const WELCOME: &str = include_str!("../../../fixtures/prompts/welcome.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    AwaitingScenario,
    AwaitingClarification,
    Provisioned,
    Failed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Sim,
    Eve,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sim" => Ok(Backend::Sim),
            "eve" => Ok(Backend::Eve),
            other => Err(format!(
                "unknown provisioning backend `{other}` (expected sim or eve)"
            )),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Sim => "sim",
            Backend::Eve => "eve",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum UserEvent {
    SubmitScenario { text: String },
    Reply { text: String },
    Query { command: String },
    Reset,
}

impl UserEvent {
    pub fn name(&self) -> &'static str {
        match self {
            UserEvent::SubmitScenario { .. } => "SubmitScenario",
            UserEvent::Reply { .. } => "Reply",
            UserEvent::Query { .. } => "Query",
            UserEvent::Reset => "Reset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvisionSummary {
    pub acknowledgment: String,
    pub backend: Backend,
    pub devices: Vec<String>,
    pub connections: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lab: Option<String>,
}

impl fmt::Display for ProvisionSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let target = match self.backend {
            Backend::Sim => "the simulator".to_string(),
            Backend::Eve => format!("EVE-NG lab {}", self.lab.as_deref().unwrap_or("?")),
        };
        write!(
            f,
            "Provisioned {} device(s) ({}) and {} connection(s) on {target}.",
            self.devices.len(),
            self.devices.join(", "),
            self.connections
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum SystemEvent {
    Welcome {
        text: String,
    },
    AskClarification {
        prompt: String,
        missing_fields: Vec<MissingField>,
    },
    ProvisionDone {
        summary: ProvisionSummary,
    },
    QueryResult {
        command: String,
        output: String,
        #[serde(default, skip_serializing_if = "Option::is_none", flatten)]
        ping: Option<t2n_core::netsim::PingResult>,
    },
    Error {
        code: ErrorCode,
        message: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        findings: Vec<Finding>,
    },
}

impl SystemEvent {
    fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        SystemEvent::Error {
            code,
            message: message.into(),
            findings: Vec::new(),
        }
    }
}

/// Stable codes carried by [`SystemEvent::Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    AdapterReject,
    AdapterFailure,
    ScsParse,
    ExtractFailed,
    ValidationInvalid,
    ProvisionFailed,
    QuerySyntax,
    QueryFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "lowercase")]
pub enum TranscriptEntry {
    User(UserEvent),
    System(SystemEvent),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{event} is not allowed while the session is {phase:?}")]
pub struct IllegalEvent {
    pub phase: Phase,
    pub event: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub phase: Phase,
    pub history: Vec<TranscriptEntry>,
    pub scs: Option<String>,
    pub topology: Option<TopologyDocument>,
    pub report: Option<ValidationReport>,
    pub backend: Backend,
    #[serde(skip)]
    pub sim: Option<SimNetwork>,
    pub eve_report: Option<ProvisionReport>,
    pub step_count: u32,
}

impl SessionState {
    pub fn new(session_id: impl Into<String>, backend: Backend) -> Self {
        SessionState {
            session_id: session_id.into(),
            phase: Phase::AwaitingScenario,
            history: Vec::new(),
            scs: None,
            topology: None,
            report: None,
            backend,
            sim: None,
            eve_report: None,
            step_count: 0,
        }
    }

    fn clear_dialog(&mut self) {
        self.scs = None;
        self.topology = None;
        self.report = None;
        self.sim = None;
        self.eve_report = None;
    }

    /// Adapter input rebuilt from the transcript since the last submission.
    fn exchange(&self) -> Option<AdapterExchange> {
        let start = self
            .history
            .iter()
            .rposition(|e| matches!(e, TranscriptEntry::User(UserEvent::SubmitScenario { .. })))?;
        let mut ex = AdapterExchange::default();
        for entry in &self.history[start..] {
            match entry {
                TranscriptEntry::User(UserEvent::SubmitScenario { text }) => {
                    ex.scenario_text = text.clone()
                }
                TranscriptEntry::User(UserEvent::Reply { text }) => {
                    ex.push(Turn::user(text.clone()))
                }
                TranscriptEntry::System(SystemEvent::AskClarification { prompt, .. }) => {
                    ex.push(Turn::system(prompt.clone()))
                }
                _ => {}
            }
        }
        Some(ex)
    }
}

/// Where the EVE backend provisions.
#[derive(Debug, Clone)]
pub struct EveTarget {
    pub base_url: String,
    pub username: String,
    pub password: Password,
    pub templates: Templates,
}

/// Collaborators shared by every session.
#[derive(Clone)]
pub struct Context {
    pub adapter: Arc<dyn ScenarioAdapter>,
    pub strictness: Strictness,
    pub eve: Option<EveTarget>,
}

impl Context {
    pub fn new(adapter: Arc<dyn ScenarioAdapter>) -> Self {
        Context {
            adapter,
            strictness: Strictness::Strict,
            eve: None,
        }
    }
}

/// Number of user actions in a transcript, resets excluded.
pub fn count_steps(transcript: &[TranscriptEntry]) -> u32 {
    transcript
        .iter()
        .filter(|e| matches!(e, TranscriptEntry::User(u) if *u != UserEvent::Reset))
        .count() as u32
}

fn legal(phase: Phase, event: &UserEvent) -> bool {
    matches!(
        (phase, event),
        (_, UserEvent::Reset)
            | (Phase::AwaitingScenario, UserEvent::SubmitScenario { .. })
            | (Phase::AwaitingClarification, UserEvent::Reply { .. })
            | (Phase::Provisioned, UserEvent::Query { .. })
    )
}

/// Applies one user event. Illegal events leave the state untouched.
pub fn advance(
    mut state: SessionState,
    ctx: &Context,
    event: UserEvent,
) -> Result<(SessionState, SystemEvent), IllegalEvent> {
    if !legal(state.phase, &event) {
        return Err(IllegalEvent {
            phase: state.phase,
            event: event.name(),
        });
    }
    tracing::debug!(session = %state.session_id, phase = ?state.phase, event = event.name(), "advance");
    if event != UserEvent::Reset {
        state.step_count += 1;
    }
    state.history.push(TranscriptEntry::User(event.clone()));
    let reply = match event {
        UserEvent::Reset => {
            state.clear_dialog();
            state.phase = Phase::AwaitingScenario;
            SystemEvent::Welcome {
                text: WELCOME.to_string(),
            }
        }
        UserEvent::SubmitScenario { .. } => {
            state.clear_dialog();
            converse(&mut state, ctx)
        }
        UserEvent::Reply { .. } => converse(&mut state, ctx),
        UserEvent::Query { command } => match Query::parse(&command) {
            Err(e) => SystemEvent::error(ErrorCode::QuerySyntax, e.to_string()),
            Ok(q) => match run_query(
                state
                    .sim
                    .as_ref()
                    .expect("provisioned session has a network"),
                &q,
            ) {
                Ok((output, ping)) => SystemEvent::QueryResult {
                    command,
                    output,
                    ping,
                },
                Err(e) => SystemEvent::error(ErrorCode::QueryFailed, e.to_string()),
            },
        },
    };
    state.history.push(TranscriptEntry::System(reply.clone()));
    Ok((state, reply))
}

fn converse(state: &mut SessionState, ctx: &Context) -> SystemEvent {
    let exchange = state.exchange().expect("a scenario was submitted");
    let outcome = match ctx.adapter.generate(&exchange) {
        Ok(o) => o,
        Err(e) => {
            state.phase = Phase::Failed;
            return SystemEvent::error(ErrorCode::AdapterFailure, e.to_string());
        }
    };
    match outcome {
        Outcome::Reject { reason } => {
            state.phase = Phase::AwaitingScenario;
            SystemEvent::error(ErrorCode::AdapterReject, reason)
        }
        Outcome::Clarify {
            question,
            missing_fields,
        } => {
            state.phase = Phase::AwaitingClarification;
            SystemEvent::AskClarification {
                prompt: question,
                missing_fields,
            }
        }
        Outcome::Scs {
            text,
            acknowledgment,
        } => accept_scs(state, ctx, text, acknowledgment),
    }
}

fn accept_scs(
    state: &mut SessionState,
    ctx: &Context,
    text: String,
    acknowledgment: String,
) -> SystemEvent {
    state.phase = Phase::AwaitingScenario;
    let doc = match parse_scs(&text) {
        Ok(d) => d,
        Err(e) => return SystemEvent::error(ErrorCode::ScsParse, e.to_string()),
    };
    state.scs = Some(text);
    let extraction = match extract_topology(&doc, ctx.strictness) {
        Ok(x) => x,
        Err(e) => return SystemEvent::error(ErrorCode::ExtractFailed, e.to_string()),
    };
    let topo = extraction.topology;
    let report = validate_topology(&topo);
    state.topology = Some(topo.clone());
    state.report = Some(report.clone());
    if !report.is_valid() {
        if let Ok(req) = make_clarification(&report) {
            state.phase = Phase::AwaitingClarification;
            return SystemEvent::AskClarification {
                prompt: req.prompt,
                missing_fields: req.missing_fields,
            };
        }
        let codes: Vec<&str> = report.errors().map(|f| f.code.as_str()).collect();
        let message = format!("the topology is invalid ({})", codes.join(", "));
        return SystemEvent::Error {
            code: ErrorCode::ValidationInvalid,
            message,
            findings: report.findings,
        };
    }

    match provision(state, ctx, &topo, &report) {
        Ok(lab) => {
            state.phase = Phase::Provisioned;
            SystemEvent::ProvisionDone {
                summary: ProvisionSummary {
                    acknowledgment,
                    backend: state.backend,
                    devices: topo.devices.iter().map(|d| d.hostname.clone()).collect(),
                    connections: topo.connections.len(),
                    warnings: extraction
                        .warnings
                        .iter()
                        .map(ToString::to_string)
                        .collect(),
                    lab,
                },
            }
        }
        Err(message) => {
            state.phase = Phase::Failed;
            SystemEvent::error(ErrorCode::ProvisionFailed, message)
        }
    }
}

/// Builds the simulator network and, for the EVE backend, the emulator lab.
/// Queries always run against the simulator copy.
fn provision(
    state: &mut SessionState,
    ctx: &Context,
    topo: &TopologyDocument,
    report: &ValidationReport,
) -> Result<Option<String>, String> {
    assert!(report.is_valid(), "provisioning requires a valid topology");
    let sim = instantiate(topo).map_err(|e| e.to_string())?;
    let mut lab = None;
    if state.backend == Backend::Eve {
        let target = ctx
            .eve
            .as_ref()
            .ok_or("EVE backend selected but no emulator is configured")?;
        let lab_name = format!(
            "t2n-{}",
            state.session_id.chars().take(8).collect::<String>()
        );
        let plan = t2n_eve::plan(topo, &target.templates, &lab_name).map_err(|e| e.to_string())?;
        let client = EveClient::new(target.username.clone(), target.password.clone())
            .map_err(|e| e.to_string())?;
        let mut session = EveSession::new(target.base_url.clone());
        match client.execute(&plan, &mut session) {
            Ok(r) => {
                lab = r.lab_path.clone();
                state.eve_report = Some(r);
            }
            Err(t2n_eve::ProvisionError::PlanAborted(r)) => {
                let message = format!(
                    "provisioning aborted at {}",
                    r.failed.as_ref().map_or("?", |f| f.label.as_str())
                );
                state.eve_report = Some(*r);
                return Err(message);
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    state.sim = Some(sim);
    Ok(lab)
}

/// A session bound to its collaborators.
pub struct Session {
    pub state: SessionState,
    ctx: Context,
}

impl Session {
    pub fn new(session_id: impl Into<String>, backend: Backend, ctx: Context) -> Self {
        Session {
            state: SessionState::new(session_id, backend),
            ctx,
        }
    }

    pub fn welcome(&self) -> SystemEvent {
        SystemEvent::Welcome {
            text: WELCOME.to_string(),
        }
    }

    pub fn advance(&mut self, event: UserEvent) -> Result<SystemEvent, IllegalEvent> {
        let state = self.state.clone();
        let (next, reply) = advance(state, &self.ctx, event)?;
        self.state = next;
        Ok(reply)
    }

    pub fn phase(&self) -> Phase {
        self.state.phase
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use t2n_llm::RulesAdapter;

    fn session() -> Session {
        Session::new("test", Backend::Sim, Context::new(Arc::new(RulesAdapter)))
    }

    #[test]
    fn query_needs_provisioned() {
        let mut s = session();
        let err = s
            .advance(UserEvent::Query {
                command: "show topology".into(),
            })
            .unwrap_err();
        assert_eq!(err.phase, Phase::AwaitingScenario);
        assert_eq!(s.state.step_count, 0);
        assert!(s.state.history.is_empty());
    }

    #[test]
    fn reply_needs_clarification_phase() {
        assert!(session()
            .advance(UserEvent::Reply { text: "x".into() })
            .is_err());
    }

    #[test]
    fn reject_stays_awaiting_scenario() {
        let mut s = session();
        let ev = s
            .advance(UserEvent::SubmitScenario {
                text: "hello there".into(),
            })
            .unwrap();
        assert!(matches!(
            ev,
            SystemEvent::Error {
                code: ErrorCode::AdapterReject,
                ..
            }
        ));
        assert_eq!(s.phase(), Phase::AwaitingScenario);
        assert_eq!(s.state.step_count, 1);
    }

    #[test]
    fn reset_is_not_a_step() {
        let mut s = session();
        s.advance(UserEvent::SubmitScenario {
            text: "hello".into(),
        })
        .unwrap();
        let ev = s.advance(UserEvent::Reset).unwrap();
        assert_eq!(
            ev,
            SystemEvent::Welcome {
                text: WELCOME.into()
            }
        );
        assert_eq!(s.state.step_count, 1);
        assert_eq!(count_steps(&s.state.history), 1);
    }

    #[test]
    fn empty_transcript_has_no_steps() {
        assert_eq!(count_steps(&[]), 0);
    }

    #[test]
    fn events_serialize_with_tag() {
        let ev = SystemEvent::AskClarification {
            prompt: "p".into(),
            missing_fields: vec![],
        };
        let v = serde_json::to_value(&ev).unwrap();
        assert_eq!(v["event"], "AskClarification");
        assert_eq!(v["prompt"], "p");
        let u: UserEvent =
            serde_json::from_str(r#"{"event":"Query","command":"show topology"}"#).unwrap();
        assert_eq!(
            u,
            UserEvent::Query {
                command: "show topology".into()
            }
        );
    }
}
