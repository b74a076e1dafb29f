//! Core of the text-to-network engine.
//!
//! The pipeline is: structured command strings ([`scs`]) are turned into a
//! [`topology::TopologyDocument`] by [`extract`], checked by [`validate`], and
//! instantiated in the built-in Layer-3 simulator ([`netsim`]).

pub mod extract;
pub mod ipv4;
pub mod netsim;
pub mod scs;
pub mod topology;
pub mod validate;

pub use extract::{extract_topology, ExtractError, Extraction, Strictness};
pub use scs::{classify_line, parse_scs, render_scs, ScsDocument, ScsError, ScsLineKind};
pub use topology::{
    Connection, DeviceSpec, Endpoint, InterfaceSpec, NodeType, StaticRoute, TopologyDocument,
};

pub use validate::{
    make_clarification, validate_topology, ClarificationRequest, Finding, FindingCode, Severity,
    ValidationReport, ValidationStatus,
};
