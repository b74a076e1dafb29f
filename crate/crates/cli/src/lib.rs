//! `t2n` command line: interactive REPL, batch runs for CI, and the HTTP
//! service.

use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use t2n_core::{Strictness, ValidationStatus};
use t2n_eve::{Password, Templates};
use t2n_llm::{AdapterConfig, BackendKind};
use t2n_session::{
    Backend, Context, ErrorCode, EveTarget, Phase, Session, SystemEvent, UserEvent, WELCOME,
};

pub mod expect;

pub use expect::{ExpectError, Expectation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BACKEND: i32 = 2;
pub const EXIT_CLARIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "t2n",
    version,
    about = "Build and query networks described in plain English"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interactive session (default).
    Repl,
    /// Convert one scenario file, provision it and check expectations.
    Batch,
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Provisioning backend.
    #[arg(long, global = true, default_value = "sim")]
    pub backend: Backend,
    /// Scenario adapter.
    #[arg(long, global = true, default_value = "rules")]
    pub adapter: BackendKind,
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Where batch mode writes the topology JSON.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Reject unrecognized SCS statements instead of ignoring them.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Expectations file checked after provisioning.
    #[arg(long, global = true)]
    pub expect: Option<PathBuf>,
    /// Answer to a clarification question in batch mode; repeatable.
    #[arg(long, global = true)]
    pub reply: Vec<String>,
    /// Recorded adapter fixtures for `--adapter replay`.
    #[arg(long, global = true, default_value = "fixtures/replay")]
    pub fixtures: PathBuf,
    /// Chat completion endpoint for `--adapter http`.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Adapter timeout in seconds.
    #[arg(long, global = true, default_value_t = 60)]
    pub timeout: u64,
    /// EVE-NG base URL; the password is read from T2N_EVE_PASSWORD.
    #[arg(long, global = true)]
    pub eve_url: Option<String>,
    #[arg(long, global = true, default_value = "admin")]
    pub eve_user: String,
    /// More log output on stderr; repeatable.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Built web UI to serve at `/`.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Allowed CORS origin; repeatable. Any origin when omitted.
    #[arg(long)]
    pub cors_origin: Vec<String>,
    /// Seconds a message request waits before answering 202.
    #[arg(long, default_value_t = 30)]
    pub message_timeout: u64,
}

/// Adapter and provisioning collaborators from the command line.
pub fn build_context(args: &CommonArgs) -> Result<Context, String> {
    let mut cfg = AdapterConfig::new(args.adapter);
    cfg.endpoint_url = args.endpoint.clone();
    cfg.model_name = args.model.clone();
    cfg.timeout = Duration::from_secs(args.timeout);
    cfg.fixture_path = Some(args.fixtures.clone());
    let adapter = cfg.build().map_err(|e| e.to_string())?;
    let mut ctx = Context::new(Arc::from(adapter));
    ctx.strictness = if args.strict {
        Strictness::Strict
    } else {
        Strictness::Lenient
    };
    if let Some(url) = &args.eve_url {
        ctx.eve = Some(EveTarget {
            base_url: url.clone(),
            username: args.eve_user.clone(),
            password: Password::from_env().map_err(|e| e.to_string())?,
            templates: Templates::default(),
        });
    } else if args.backend == Backend::Eve {
        return Err("--backend eve needs --eve-url".into());
    }
    Ok(ctx)
}

/// Text shown for a system event in the REPL.
pub fn render_event(ev: &SystemEvent) -> String {
    match ev {
        SystemEvent::Welcome { text } => text.trim_end().to_string(),
        SystemEvent::AskClarification { prompt, .. } => prompt.clone(),
        SystemEvent::ProvisionDone { summary } => format!("{}\n{summary}", summary.acknowledgment),
        SystemEvent::QueryResult { output, .. } => output.trim_end().to_string(),
        SystemEvent::Error {
            code,
            message,
            findings,
        } => {
            let mut out = format!(
                "error [{}]: {message}",
                serde_json::to_value(code).unwrap().as_str().unwrap()
            );
            for f in findings {
                out.push_str(&format!(
                    "\n  {} {}: {}",
                    f.code.as_str(),
                    f.subject,
                    f.message
                ));
            }
            out
        }
    }
}

fn is_backend_failure(ev: &SystemEvent) -> bool {
    matches!(
        ev,
        SystemEvent::Error {
            code: ErrorCode::AdapterFailure | ErrorCode::ProvisionFailed,
            ..
        }
    )
}

/// Interactive loop. `quit`, `exit` or end of input leave with 0; `reset`
/// starts over. Other lines are read as whatever the session expects next.
pub fn run_repl(args: &CommonArgs, input: impl BufRead, mut output: impl Write) -> i32 {
    let ctx = match build_context(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(output, "error: {e}");
            return EXIT_BACKEND;
        }
    };
    let mut session = Session::new("repl", args.backend, ctx);
    let _ = write!(output, "{WELCOME}\n> ");
    let _ = output.flush();
    for line in input.lines() {
        let Ok(line) = line else { break };
        let text = line.trim();
        let event = match text {
            "" => {
                let _ = write!(output, "> ");
                let _ = output.flush();
                continue;
            }
            "quit" | "exit" => return EXIT_OK,
            "reset" => UserEvent::Reset,
            _ => match session.phase() {
                Phase::AwaitingScenario | Phase::Failed => {
                    UserEvent::SubmitScenario { text: text.into() }
                }
                Phase::AwaitingClarification => UserEvent::Reply { text: text.into() },
                Phase::Provisioned => UserEvent::Query {
                    command: text.into(),
                },
            },
        };
        match session.advance(event) {
            Ok(ev) => {
                let _ = writeln!(output, "{}", render_event(&ev));
                if is_backend_failure(&ev) {
                    return EXIT_BACKEND;
                }
            }
            Err(e) => {
                let _ = writeln!(output, "{e}; type reset to start over");
            }
        }
        let _ = write!(output, "> ");
        let _ = output.flush();
    }
    let _ = writeln!(output);
    EXIT_OK
}

/// What a batch run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl BatchOutcome {
    fn new(code: i32, stdout: impl Into<String>, stderr: impl Into<String>) -> Self {
        BatchOutcome {
            code,
            stdout: stdout.into(),
            stderr: stderr.into(),
        }
    }
}

/// Scenario file in, topology JSON out. Exit codes: 0 provisioned and every
/// expectation met, 1 invalid input or an unmet expectation, 2 backend or
/// configuration error, 3 clarification needed (JSON on stdout).
pub fn run_batch(args: &CommonArgs) -> BatchOutcome {
    let Some(path) = &args.scenario else {
        return BatchOutcome::new(EXIT_BACKEND, "", "batch mode needs --scenario FILE\n");
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return BatchOutcome::new(EXIT_BACKEND, "", format!("{}: {e}\n", path.display())),
    };
    let expectations = match &args.expect {
        None => Vec::new(),
        Some(p) => match fs::read_to_string(p)
            .map_err(|e| e.to_string())
            .and_then(|t| expect::parse(&t).map_err(|e| e.to_string()))
        {
            Ok(x) => x,
            Err(e) => {
                return BatchOutcome::new(EXIT_BACKEND, "", format!("{}: {e}\n", p.display()))
            }
        },
    };
    let ctx = match build_context(args) {
        Ok(c) => c,
        Err(e) => return BatchOutcome::new(EXIT_BACKEND, "", format!("{e}\n")),
    };

    let mut session = Session::new("batch", args.backend, ctx);
    let mut ev = session
        .advance(UserEvent::SubmitScenario { text })
        .expect("fresh session accepts a scenario");
    let mut replies = args.reply.iter();
    while let SystemEvent::AskClarification { .. } = ev {
        let Some(reply) = replies.next() else { break };
        ev = session
            .advance(UserEvent::Reply {
                text: reply.clone(),
            })
            .expect("clarification accepts a reply");
    }

    match &ev {
        SystemEvent::ProvisionDone { .. } => {}
        SystemEvent::AskClarification {
            prompt,
            missing_fields,
        } => {
            let body = json!({ "prompt": prompt, "missing_fields": missing_fields });
            return BatchOutcome::new(
                EXIT_CLARIFY,
                format!("{}\n", serde_json::to_string_pretty(&body).unwrap()),
                "",
            );
        }
        other if is_backend_failure(other) => {
            return BatchOutcome::new(EXIT_BACKEND, "", format!("{}\n", render_event(other)))
        }
        other => {
            let report = match &session.state.report {
                Some(r) if r.status == ValidationStatus::Invalid => {
                    serde_json::to_string_pretty(r).unwrap() + "\n"
                }
                _ => String::new(),
            };
            return BatchOutcome::new(EXIT_INVALID, report, format!("{}\n", render_event(other)));
        }
    }

    let topology = session
        .state
        .topology
        .as_ref()
        .expect("provisioned")
        .to_canonical_json();
    let mut stdout = String::new();
    match &args.out {
        Some(p) => {
            if let Err(e) = fs::write(p, &topology) {
                return BatchOutcome::new(EXIT_BACKEND, "", format!("{}: {e}\n", p.display()));
            }
        }
        None => stdout.push_str(&topology),
    }

    let mut failures = 0;
    for x in &expectations {
        let ev = session
            .advance(UserEvent::Query {
                command: x.query.clone(),
            })
            .expect("provisioned session accepts queries");
        let verdict = x.check(&ev);
        if verdict.is_err() {
            failures += 1;
        }
        stdout.push_str(&format!(
            "{} {}\n",
            if verdict.is_ok() { "ok  " } else { "FAIL" },
            verdict.unwrap_or_else(|e| e)
        ));
    }
    let code = if failures == 0 { EXIT_OK } else { EXIT_INVALID };
    BatchOutcome::new(code, stdout, "")
}
