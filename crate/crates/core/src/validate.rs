//! Semantic validation of topologies and the clarification prompts derived
//! from missing information.
//!
//! Finding codes form a closed registry ([`FindingCode`]), documented in
//! `docs/finding-codes.md`. Clarification wording is frozen per code in
//! `fixtures/prompts/clarifications.json`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::net::Ipv4Addr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{resolve_static_route, ResolveError};
use crate::ipv4::{network_of, validate_ipv4};
use crate::topology::{TopologyDocument, Via};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    MissingInfo,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FindingCode {
    IpMalformed,
    IpOctetRange,
    PrefixRange,
    DuplicateAddress,
    LinkSubnetMismatch,
    RouteIncomplete,
    RoutesUnspecified,
    RouteUnknownVia,
    RouteNoSharedSubnet,
    RouteNextHopNotConnected,
    RouteHostBits,
    RouteAmbiguousNextHop,
}

impl FindingCode {
    pub const ALL: [FindingCode; 12] = [
        FindingCode::IpMalformed,
        FindingCode::IpOctetRange,
        FindingCode::PrefixRange,
        FindingCode::DuplicateAddress,
        FindingCode::LinkSubnetMismatch,
        FindingCode::RouteIncomplete,
        FindingCode::RoutesUnspecified,
        FindingCode::RouteUnknownVia,
        FindingCode::RouteNoSharedSubnet,
        FindingCode::RouteNextHopNotConnected,
        FindingCode::RouteHostBits,
        FindingCode::RouteAmbiguousNextHop,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FindingCode::IpMalformed => "IP_MALFORMED",
            FindingCode::IpOctetRange => "IP_OCTET_RANGE",
            FindingCode::PrefixRange => "PREFIX_RANGE",
            FindingCode::DuplicateAddress => "DUPLICATE_ADDRESS",
            FindingCode::LinkSubnetMismatch => "LINK_SUBNET_MISMATCH",
            FindingCode::RouteIncomplete => "ROUTE_INCOMPLETE",
            FindingCode::RoutesUnspecified => "ROUTES_UNSPECIFIED",
            FindingCode::RouteUnknownVia => "ROUTE_UNKNOWN_VIA",
            FindingCode::RouteNoSharedSubnet => "ROUTE_NO_SHARED_SUBNET",
            FindingCode::RouteNextHopNotConnected => "ROUTE_NEXT_HOP_NOT_CONNECTED",
            FindingCode::RouteHostBits => "ROUTE_HOST_BITS",
            FindingCode::RouteAmbiguousNextHop => "ROUTE_AMBIGUOUS_NEXT_HOP",
        }
    }

    pub fn severity(&self) -> Severity {
        match self {
            FindingCode::LinkSubnetMismatch | FindingCode::RouteAmbiguousNextHop => {
                Severity::Warning
            }
            FindingCode::RouteIncomplete | FindingCode::RoutesUnspecified => Severity::MissingInfo,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    /// Path into the topology, e.g. `R-1/interfaces[GigabitEthernet0/0]`.
    pub subject: String,
    /// For missing information: which field is missing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

impl Finding {
    pub fn new(code: FindingCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            severity: code.severity(),
            code,
            subject: subject.into(),
            field: None,
            message: message.into(),
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationStatus {
    Valid,
    NeedsClarification,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub status: ValidationStatus,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    /// Derives the status: any error makes the report invalid, otherwise any
    /// missing information makes it need clarification.
    pub fn from_findings(findings: Vec<Finding>) -> Self {
        let status = if findings.iter().any(|f| f.severity == Severity::Error) {
            ValidationStatus::Invalid
        } else if findings.iter().any(|f| f.severity == Severity::MissingInfo) {
            ValidationStatus::NeedsClarification
        } else {
            ValidationStatus::Valid
        };
        ValidationReport { status, findings }
    }

    pub fn is_valid(&self) -> bool {
        self.status == ValidationStatus::Valid
    }

    pub fn has_code(&self, code: FindingCode) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingField {
    pub subject: String,
    pub field: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClarificationRequest {
    pub prompt: String,
    pub missing_fields: Vec<MissingField>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("report status {0:?} cannot be turned into a clarification request")]
pub struct NotClarifiable(pub ValidationStatus);

static PROMPTS: Lazy<HashMap<FindingCode, String>> = Lazy::new(|| {
    serde_json::from_str(include_str!(
        "../../../fixtures/prompts/clarifications.json"
    ))
    .expect("clarification registry is valid JSON keyed by finding code")
});

/// The frozen clarification wording for a missing-information code.
pub fn clarification_template(code: FindingCode) -> Option<&'static str> {
    PROMPTS.get(&code).map(String::as_str)
}

/// Aggregates every missing-information finding of `report` into one request.
///
/// Each distinct wording appears once in the prompt, in finding order.
pub fn make_clarification(
    report: &ValidationReport,
) -> Result<ClarificationRequest, NotClarifiable> {
    if report.status != ValidationStatus::NeedsClarification {
        return Err(NotClarifiable(report.status));
    }
    let mut parts: Vec<&str> = Vec::new();
    let mut missing_fields = Vec::new();
    for f in report
        .findings
        .iter()
        .filter(|f| f.severity == Severity::MissingInfo)
    {
        let text = clarification_template(f.code).unwrap_or(f.message.as_str());
        if !parts.contains(&text) {
            parts.push(text);
        }
        missing_fields.push(MissingField {
            subject: f.subject.clone(),
            field: f.field.clone().unwrap_or_else(|| "details".to_string()),
        });
    }
    Ok(ClarificationRequest {
        prompt: parts.join(" "),
        missing_fields,
    })
}

fn iface_subject(device: &str, iface: &str) -> String {
    format!("{device}/interfaces[{iface}]")
}

fn route_subject(device: &str, idx: usize) -> String {
    format!("{device}/static_routes[{idx}]")
}

/// Checks a topology and reports every problem as a finding.
///
/// Order: address syntax and octet ranges, prefix lengths, duplicate
/// addresses, link subnets, incomplete routes, route next-hop adjacency, host
/// bits in route destinations.
pub fn validate_topology(topo: &TopologyDocument) -> ValidationReport {
    let mut findings = Vec::new();

    // Addresses.
    for d in &topo.devices {
        for i in &d.interfaces {
            if let Err(e) = validate_ipv4(&i.ipv4) {
                let code = if e.code() == "IP_OCTET_RANGE" {
                    FindingCode::IpOctetRange
                } else {
                    FindingCode::IpMalformed
                };
                findings.push(Finding::new(
                    code,
                    iface_subject(&d.hostname, &i.name),
                    e.to_string(),
                ));
            }
        }
        for (idx, r) in d.static_routes.iter().enumerate() {
            let mut texts = Vec::new();
            if let Some(dest) = &r.destination {
                texts.push(dest.address.as_str());
            }
            if let Some(Via::Address(a)) = &r.via {
                texts.push(a.as_str());
            }
            for t in texts {
                if let Err(e) = validate_ipv4(t) {
                    let code = if e.code() == "IP_OCTET_RANGE" {
                        FindingCode::IpOctetRange
                    } else {
                        FindingCode::IpMalformed
                    };
                    findings.push(Finding::new(
                        code,
                        route_subject(&d.hostname, idx),
                        e.to_string(),
                    ));
                }
            }
        }
    }

    // Prefix lengths.
    for d in &topo.devices {
        for i in &d.interfaces {
            if i.prefix_len > 32 {
                findings.push(Finding::new(
                    FindingCode::PrefixRange,
                    iface_subject(&d.hostname, &i.name),
                    format!("prefix length /{} is above 32", i.prefix_len),
                ));
            }
        }
        for (idx, r) in d.static_routes.iter().enumerate() {
            if let Some(dest) = r.destination.as_ref().filter(|d| d.prefix_len > 32) {
                findings.push(Finding::new(
                    FindingCode::PrefixRange,
                    route_subject(&d.hostname, idx),
                    format!("prefix length /{} is above 32", dest.prefix_len),
                ));
            }
        }
    }

    // Duplicate addresses.
    let mut owners: BTreeMap<Ipv4Addr, Vec<String>> = BTreeMap::new();
    for d in &topo.devices {
        for i in &d.interfaces {
            if let (Ok(addr), true) = (i.ipv4(), i.prefix_len <= 32) {
                owners
                    .entry(addr)
                    .or_default()
                    .push(iface_subject(&d.hostname, &i.name));
            }
        }
    }
    for (addr, subjects) in owners.iter().filter(|(_, s)| s.len() > 1) {
        for s in subjects {
            findings.push(Finding::new(
                FindingCode::DuplicateAddress,
                s.clone(),
                format!(
                    "address {addr} is assigned to {} interfaces",
                    subjects.len()
                ),
            ));
        }
    }

    // Link subnets.
    for c in &topo.connections {
        let (Some(a), Some(b)) = (
            topo.endpoint_interface(&c.endpoint_a),
            topo.endpoint_interface(&c.endpoint_b),
        ) else {
            continue;
        };
        let (Ok(aa), Ok(ba)) = (a.ipv4(), b.ipv4()) else {
            continue;
        };
        if a.prefix_len > 32 || b.prefix_len > 32 {
            continue;
        }
        let p = a.prefix_len.min(b.prefix_len);
        if network_of(aa, p) != network_of(ba, p) {
            findings.push(Finding::new(
                FindingCode::LinkSubnetMismatch,
                format!("connections[{}]", c.network_id),
                format!(
                    "{} ({aa}/{}) and {} ({ba}/{}) are on different subnets",
                    c.endpoint_a, a.prefix_len, c.endpoint_b, b.prefix_len
                ),
            ));
        }
    }

    // Incomplete routes.
    for d in &topo.devices {
        for (idx, r) in d.static_routes.iter().enumerate() {
            let missing: Vec<&str> = [
                ("destination", r.destination.is_none()),
                ("via", r.via.is_none()),
            ]
            .into_iter()
            .filter_map(|(name, absent)| absent.then_some(name))
            .collect();
            if !missing.is_empty() {
                findings.push(
                    Finding::new(
                        FindingCode::RouteIncomplete,
                        route_subject(&d.hostname, idx),
                        format!(
                            "static route on {} is missing its {}",
                            d.hostname,
                            missing.join(" and ")
                        ),
                    )
                    .with_field(missing.join(",")),
                );
            }
        }
    }

    // Next-hop adjacency.
    for d in &topo.devices {
        for (idx, r) in d.static_routes.iter().enumerate() {
            if r.via.is_none() {
                continue;
            }
            let subject = route_subject(&d.hostname, idx);
            match resolve_static_route(r, d, topo) {
                Ok(res) if res.candidates > 1 => findings.push(Finding::new(
                    FindingCode::RouteAmbiguousNextHop,
                    subject,
                    format!(
                        "next hop shares {} links with {}; lowest network id used",
                        res.candidates, d.hostname
                    ),
                )),
                Ok(_)
                | Err(ResolveError::MissingVia { .. })
                | Err(ResolveError::InvalidAddress(_)) => {}
                Err(e @ ResolveError::UnknownDevice { .. }) => findings.push(Finding::new(
                    FindingCode::RouteUnknownVia,
                    subject,
                    e.to_string(),
                )),
                Err(e @ ResolveError::NoSharedSubnet { .. }) => findings.push(Finding::new(
                    FindingCode::RouteNoSharedSubnet,
                    subject,
                    e.to_string(),
                )),
                Err(e @ ResolveError::NextHopNotConnected { .. }) => findings.push(Finding::new(
                    FindingCode::RouteNextHopNotConnected,
                    subject,
                    e.to_string(),
                )),
            }
        }
    }

    // Host bits.
    for d in &topo.devices {
        for (idx, r) in d.static_routes.iter().enumerate() {
            let Some(dest) = &r.destination else { continue };
            let Some(net) = dest.network() else { continue };
            if net.addr() != net.network() {
                findings.push(Finding::new(
                    FindingCode::RouteHostBits,
                    route_subject(&d.hostname, idx),
                    format!(
                        "route destination {dest} has host bits set (network is {})",
                        net.trunc()
                    ),
                ));
            }
        }
    }

    ValidationReport::from_findings(findings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::{extract_topology, Strictness};
    use crate::scs::parse_scs;

    const THREE_ROUTER: &str = "\
R-1: type router
R-1: interface gi 0/0 ip 192.168.0.1/24
R-1: static_route 192.168.100.0/24 via R-2
R-2: type router
R-2: interface Gi 0/0 ip 192.168.0.2/24
R-2: interface Gi 0/1 ip 192.168.100.1/24
R-3: type router
R-3: interface Gi 0/0 ip 192.168.100.2/24
R-3: static_route 192.168.0.0/24 via R-2
R-1,R-2: R-1.gi 0/0 <-> R-2.Gi 0/0
R-2,R-3: R-2.Gi 0/1 <-> R-3.Gi 0/0
";

    fn topo(text: &str) -> TopologyDocument {
        extract_topology(&parse_scs(text).unwrap(), Strictness::Strict)
            .unwrap()
            .topology
    }

    fn codes(r: &ValidationReport) -> Vec<FindingCode> {
        r.findings.iter().map(|f| f.code).collect()
    }

    #[test]
    fn three_router_is_valid() {
        let r = validate_topology(&topo(THREE_ROUTER));
        assert_eq!(r.status, ValidationStatus::Valid);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
    }

    #[test]
    fn octet_range_is_invalid() {
        let r = validate_topology(&topo(
            &THREE_ROUTER.replace("192.168.0.1/24", "192.168.0.300/24"),
        ));
        assert_eq!(r.status, ValidationStatus::Invalid);
        assert!(r.has_code(FindingCode::IpOctetRange));
    }

    #[test]
    fn leading_zero_is_malformed() {
        let r = validate_topology(&topo(
            &THREE_ROUTER.replace("192.168.0.1/24", "192.168.0.010/24"),
        ));
        assert!(r.has_code(FindingCode::IpMalformed));
    }

    #[test]
    fn missing_route_details_need_clarification() {
        let stripped = THREE_ROUTER
            .replace("static_route 192.168.100.0/24 via R-2", "static_route")
            .replace("static_route 192.168.0.0/24 via R-2", "static_route");
        let r = validate_topology(&topo(&stripped));
        assert_eq!(r.status, ValidationStatus::NeedsClarification);
        let req = make_clarification(&r).unwrap();
        assert!(req.prompt.contains("static route"));
        assert_eq!(
            req.prompt,
            "Please provide additional details about the static route: specify the source, destination, and through devices."
        );
        assert_eq!(
            req.missing_fields,
            vec![
                MissingField {
                    subject: "R-1/static_routes[0]".into(),
                    field: "destination,via".into()
                },
                MissingField {
                    subject: "R-3/static_routes[0]".into(),
                    field: "destination,via".into()
                },
            ]
        );
    }

    #[test]
    fn not_clarifiable() {
        let r = validate_topology(&topo(THREE_ROUTER));
        assert_eq!(
            make_clarification(&r),
            Err(NotClarifiable(ValidationStatus::Valid))
        );
    }

    #[test]
    fn route_errors() {
        let t = topo(&THREE_ROUTER.replace("192.168.100.0/24 via R-2", "192.168.100.0/24 via R-3"));
        assert_eq!(
            codes(&validate_topology(&t)),
            vec![FindingCode::RouteNoSharedSubnet]
        );
        let t = topo(&THREE_ROUTER.replace("192.168.100.0/24 via R-2", "192.168.100.0/24 via R-9"));
        assert_eq!(
            codes(&validate_topology(&t)),
            vec![FindingCode::RouteUnknownVia]
        );
        let t = topo(&THREE_ROUTER.replace("192.168.100.0/24 via R-2", "192.168.100.7/24 via R-2"));
        assert_eq!(
            codes(&validate_topology(&t)),
            vec![FindingCode::RouteHostBits]
        );
        let t = topo(
            &THREE_ROUTER.replace("192.168.100.0/24 via R-2", "192.168.100.0/24 via 10.1.1.1"),
        );
        assert_eq!(
            codes(&validate_topology(&t)),
            vec![FindingCode::RouteNextHopNotConnected]
        );
    }

    #[test]
    fn link_mismatch_is_a_warning_and_duplicates_are_errors() {
        let t = topo(&THREE_ROUTER.replace("Gi 0/0 ip 192.168.0.2/24", "Gi 0/0 ip 192.168.7.2/24"));
        let r = validate_topology(&t);
        assert!(r.has_code(FindingCode::LinkSubnetMismatch));
        let t =
            topo(&THREE_ROUTER.replace("Gi 0/0 ip 192.168.100.2/24", "Gi 0/0 ip 192.168.100.1/24"));
        let r = validate_topology(&t);
        assert_eq!(r.status, ValidationStatus::Invalid);
        assert!(r.has_code(FindingCode::DuplicateAddress));
    }

    #[test]
    fn prefix_range() {
        let t = topo(&THREE_ROUTER.replace("192.168.0.1/24", "192.168.0.1/40"));
        assert!(validate_topology(&t).has_code(FindingCode::PrefixRange));
    }

    #[test]
    fn adding_a_clean_device_keeps_valid() {
        let mut t = topo(THREE_ROUTER);
        t.devices.push(crate::topology::DeviceSpec::new(
            "PC9",
            crate::topology::NodeType::Pc,
        ));
        assert!(validate_topology(&t).is_valid());
    }

    #[test]
    fn registry_covers_missing_info_codes() {
        for code in FindingCode::ALL {
            assert_eq!(
                clarification_template(code).is_some(),
                code.severity() == Severity::MissingInfo,
                "{code}"
            );
            let json = serde_json::to_string(&code).unwrap();
            assert_eq!(json, format!("\"{}\"", code.as_str()));
        }
    }
}
