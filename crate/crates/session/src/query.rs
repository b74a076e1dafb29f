//! Query language of a provisioned session:
//! `ping <host> <address> [source <interface|address>]`, `show config <host>`,
//! `show topology`.

use std::fmt::Write as _;
use std::net::Ipv4Addr;

use thiserror::Error;

use t2n_core::netsim::{
    ping, show_config, show_topology, PingResult, ProbeSource, SimError, SimNetwork,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Ping {
        host: String,
        destination: Ipv4Addr,
        source: ProbeSource,
    },
    ShowConfig {
        host: String,
    },
    ShowTopology,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown command `{0}`; try `ping <host> <address>`, `show config <host>` or `show topology`")]
    Unknown(String),
    #[error("`{0}` is not an IPv4 address")]
    BadAddress(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl Query {
    pub fn parse(command: &str) -> Result<Query, QueryError> {
        let words: Vec<&str> = command.split_whitespace().collect();
        let addr = |w: &str| {
            w.parse::<Ipv4Addr>()
                .map_err(|_| QueryError::BadAddress(w.to_string()))
        };
        match words.as_slice() {
            ["ping", host, dst] => Ok(Query::Ping {
                host: host.to_string(),
                destination: addr(dst)?,
                source: ProbeSource::Auto,
            }),
            ["ping", host, dst, "source", src] => {
                let source = match src.parse::<Ipv4Addr>() {
                    Ok(a) => ProbeSource::Address(a),
                    Err(_) => ProbeSource::Interface(src.to_string()),
                };
                Ok(Query::Ping {
                    host: host.to_string(),
                    destination: addr(dst)?,
                    source,
                })
            }
            ["show", "config", host] => Ok(Query::ShowConfig {
                host: host.to_string(),
            }),
            ["show", "topology"] => Ok(Query::ShowTopology),
            _ => Err(QueryError::Unknown(command.trim().to_string())),
        }
    }
}

/// One-line ping report, e.g.
/// `ping R1 -> 192.168.2.1 from 192.168.1.1: success (R1 R2, back R2 R1)`.
pub fn format_ping(host: &str, r: &PingResult) -> String {
    let mut out = format!("ping {host} -> {}", r.destination);
    if let Some(src) = r.source_address {
        let _ = write!(out, " from {src}");
    }
    match r.failure_reason {
        None => {
            let _ = write!(
                out,
                ": success ({}, back {})",
                r.forward_path.join(" "),
                r.reverse_path.join(" ")
            );
        }
        Some(reason) => {
            let _ = write!(
                out,
                ": failed, {reason:?} (path {})",
                r.forward_path.join(" ")
            );
        }
    }
    out
}

/// Runs a query; ping queries also return the structured result.
pub fn run_query(net: &SimNetwork, q: &Query) -> Result<(String, Option<PingResult>), QueryError> {
    match q {
        Query::Ping {
            host,
            destination,
            source,
        } => {
            let r = ping(net, host, *destination, source)?;
            Ok((format_ping(host, &r), Some(r)))
        }
        Query::ShowConfig { host } => Ok((show_config(net, host)?, None)),
        Query::ShowTopology => Ok((show_topology(net), None)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_commands() {
        assert_eq!(Query::parse("show topology").unwrap(), Query::ShowTopology);
        assert_eq!(
            Query::parse(" show  config R1 ").unwrap(),
            Query::ShowConfig { host: "R1".into() }
        );
        assert_eq!(
            Query::parse("ping R1 192.168.2.1 source Loopback1").unwrap(),
            Query::Ping {
                host: "R1".into(),
                destination: "192.168.2.1".parse().unwrap(),
                source: ProbeSource::Interface("Loopback1".into())
            }
        );
        assert_eq!(
            Query::parse("ping R1 192.168.2.300"),
            Err(QueryError::BadAddress("192.168.2.300".into()))
        );
        assert!(matches!(
            Query::parse("traceroute R1 1.1.1.1"),
            Err(QueryError::Unknown(_))
        ));
    }
}
