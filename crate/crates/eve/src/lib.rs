//! EVE-NG provisioning: planning, a blocking REST client and a mock server.

pub mod client;
pub mod config;
pub mod mock;
pub mod plan;
pub mod wire;

pub use client::{
    CallOutcome, EveClient, EveSession, Password, ProvisionError, ProvisionReport, MAX_RETRIES,
    PASSWORD_ENV,
};
pub use config::{parse_device_config, render_device_config, ConfigError};
pub use mock::{LoggedCall, MockEve, MockOptions};
pub use plan::{
    network_name, plan, port_index, NodeTemplate, PlanError, PlannedCall, ProvisionPlan, Templates,
};
