//! In-memory session store. Events within one session are serialized by a
//! per-session lock; different sessions proceed independently.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::{Backend, Context, IllegalEvent, Phase, Session, SessionState, SystemEvent, UserEvent};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(3600);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("no session {0}")]
    NotFound(String),
    #[error(transparent)]
    Illegal(#[from] IllegalEvent),
}

/// Result of [`SessionStore::advance_with`]: the applied event, the reply and
/// the transcript position of the event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Advanced {
    pub index: usize,
    pub event: UserEvent,
    pub reply: SystemEvent,
    pub phase: Phase,
}

struct Entry {
    session: Mutex<Session>,
    last_used: Mutex<Instant>,
}

pub struct SessionStore {
    ctx: Context,
    idle_timeout: Duration,
    sessions: Mutex<HashMap<String, Arc<Entry>>>,
}

impl SessionStore {
    pub fn new(ctx: Context) -> Self {
        SessionStore {
            ctx,
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_idle_timeout(mut self, timeout: Duration) -> Self {
        self.idle_timeout = timeout;
        self
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }

    /// Creates a session in AwaitingScenario and returns its id.
    pub fn create(&self, backend: Backend) -> String {
        self.sweep();
        let id = uuid::Uuid::new_v4().to_string();
        let entry = Entry {
            session: Mutex::new(Session::new(id.clone(), backend, self.ctx.clone())),
            last_used: Mutex::new(Instant::now()),
        };
        self.sessions
            .lock()
            .unwrap()
            .insert(id.clone(), Arc::new(entry));
        id
    }

    fn entry(&self, id: &str) -> Result<Arc<Entry>, StoreError> {
        self.sweep();
        let entry = self
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        *entry.last_used.lock().unwrap() = Instant::now();
        Ok(entry)
    }

    pub fn advance(&self, id: &str, event: UserEvent) -> Result<SystemEvent, StoreError> {
        self.advance_with(id, |_| event).map(|a| a.reply)
    }

    /// Builds the event from the current state and applies it, under the
    /// session lock.
    pub fn advance_with(
        &self,
        id: &str,
        make: impl FnOnce(&SessionState) -> UserEvent,
    ) -> Result<Advanced, StoreError> {
        let entry = self.entry(id)?;
        let mut session = entry.session.lock().unwrap();
        let event = make(&session.state);
        let reply = session.advance(event.clone())?;
        Ok(Advanced {
            index: session.state.history.len() - 2,
            event,
            reply,
            phase: session.state.phase,
        })
    }

    pub fn snapshot(&self, id: &str) -> Result<SessionState, StoreError> {
        let entry = self.entry(id)?;
        let state = entry.session.lock().unwrap().state.clone();
        Ok(state)
    }

    pub fn remove(&self, id: &str) -> bool {
        self.sessions.lock().unwrap().remove(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drops sessions idle for longer than the timeout.
    pub fn sweep(&self) {
        let now = Instant::now();
        self.sessions
            .lock()
            .unwrap()
            .retain(|_, e| now.duration_since(*e.last_used.lock().unwrap()) <= self.idle_timeout);
    }
}
