//! Vendor-style startup configuration rendering and parsing.

use std::fmt::Write as _;
use std::net::Ipv4Addr;

use thiserror::Error;

use t2n_core::ipv4::{mask_to_prefix, prefix_to_mask};
use t2n_core::topology::{RouteDestination, Via};
use t2n_core::{DeviceSpec, InterfaceSpec, StaticRoute};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{device}: static route {index} is not resolved")]
    UnresolvedRoute { device: String, index: usize },
    #[error("{device}: interface {interface} has an invalid prefix length")]
    BadPrefix { device: String, interface: String },
    #[error("config line {line_no} not understood: {line}")]
    Parse { line_no: usize, line: String },
}

/// Renders hostname, interfaces (address, mask, `no shutdown`) and one
/// `ip route` line per static route. A route whose next hop was given as a
/// device carries that device as the route name so it survives a read-back.
pub fn render_device_config(device: &DeviceSpec) -> Result<String, ConfigError> {
    let mut out = format!("hostname {}\n!\n", device.hostname);
    let mut ifaces: Vec<&InterfaceSpec> = device.interfaces.iter().collect();
    ifaces.sort_by(|a, b| a.name.cmp(&b.name));
    for i in ifaces {
        if i.prefix_len > 32 {
            return Err(ConfigError::BadPrefix {
                device: device.hostname.clone(),
                interface: i.name.clone(),
            });
        }
        let _ = write!(
            out,
            "interface {}\n ip address {} {}\n no shutdown\n!\n",
            i.name,
            i.ipv4,
            prefix_to_mask(i.prefix_len)
        );
    }
    for (index, r) in device.static_routes.iter().enumerate() {
        let unresolved = || ConfigError::UnresolvedRoute {
            device: device.hostname.clone(),
            index,
        };
        let dest = r
            .destination
            .as_ref()
            .and_then(|d| d.network())
            .ok_or_else(unresolved)?;
        let nh = r.resolved_next_hop.ok_or_else(unresolved)?;
        let _ = write!(out, "ip route {} {} {}", dest.network(), dest.netmask(), nh);
        if let Some(Via::Device(d)) = &r.via {
            let _ = write!(out, " name {d}");
        }
        out.push('\n');
    }
    out.push_str("end\n");
    Ok(out)
}

/// Inverse of [`render_device_config`]: hostname, interfaces and routes.
pub fn parse_device_config(text: &str) -> Result<DeviceSpec, ConfigError> {
    let mut device = DeviceSpec::new(String::new(), t2n_core::NodeType::Router);
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let err = || ConfigError::Parse {
            line_no: n + 1,
            line: raw.to_string(),
        };
        let words: Vec<&str> = raw.split_whitespace().collect();
        match words.as_slice() {
            [] | ["!"] | ["end"] | ["no", "shutdown"] => {}
            ["hostname", h] => device.hostname = h.to_string(),
            ["interface", name] => current = Some(name.to_string()),
            ["ip", "address", addr, mask] => {
                let name = current.clone().ok_or_else(err)?;
                let mask: Ipv4Addr = mask.parse().map_err(|_| err())?;
                let prefix_len = mask_to_prefix(mask).map_err(|_| err())?;
                device.interfaces.push(InterfaceSpec {
                    is_loopback: name.starts_with("Loopback"),
                    name,
                    ipv4: addr.to_string(),
                    prefix_len,
                    network_id: None,
                });
            }
            ["ip", "route", dest, mask, nh, rest @ ..] => {
                let mask: Ipv4Addr = mask.parse().map_err(|_| err())?;
                let nh_addr: Ipv4Addr = nh.parse().map_err(|_| err())?;
                let via = match rest {
                    ["name", d] => Via::Device(d.to_string()),
                    [] => Via::Address(nh.to_string()),
                    _ => return Err(err()),
                };
                device.static_routes.push(StaticRoute {
                    destination: Some(RouteDestination {
                        address: dest.to_string(),
                        prefix_len: mask_to_prefix(mask).map_err(|_| err())?,
                    }),
                    via: Some(via),
                    resolved_next_hop: Some(nh_addr),
                });
            }
            _ => return Err(err()),
        }
    }
    Ok(device)
}

#[cfg(test)]
mod tests {
    use super::*;
    use t2n_core::{extract_topology, parse_scs, Strictness};

    fn device(scs: &str, host: &str) -> DeviceSpec {
        let topo = extract_topology(&parse_scs(scs).unwrap(), Strictness::Strict)
            .unwrap()
            .topology;
        topo.device(host).unwrap().clone()
    }

    const THREE_ROUTER: &str = "\
R-1: interface GigabitEthernet0/0 ip 192.168.0.1/24
R-1: static_route 192.168.100.0/24 via R-2
R-2: interface GigabitEthernet0/0 ip 192.168.0.2/24
R-1,R-2: R-1.GigabitEthernet0/0 <-> R-2.GigabitEthernet0/0
";

    #[test]
    fn route_line_format() {
        let text = render_device_config(&device(THREE_ROUTER, "R-1")).unwrap();
        assert!(
            text.contains("ip route 192.168.100.0 255.255.255.0 192.168.0.2 name R-2\n"),
            "{text}"
        );
    }

    #[test]
    fn no_routes_means_hostname_and_interfaces_only() {
        let text = render_device_config(&device(THREE_ROUTER, "R-2")).unwrap();
        assert_eq!(
            text,
            "hostname R-2\n!\ninterface GigabitEthernet0/0\n ip address 192.168.0.2 255.255.255.0\n no shutdown\n!\nend\n"
        );
    }

    #[test]
    fn unresolved_route_is_an_error() {
        let mut d = device(THREE_ROUTER, "R-1");
        d.static_routes[0].resolved_next_hop = None;
        assert_eq!(
            render_device_config(&d),
            Err(ConfigError::UnresolvedRoute {
                device: "R-1".into(),
                index: 0
            })
        );
    }

    #[test]
    fn parse_inverts_render() {
        let d = device(THREE_ROUTER, "R-1");
        let back = parse_device_config(&render_device_config(&d).unwrap()).unwrap();
        assert_eq!(back.hostname, "R-1");
        assert_eq!(back.static_routes, d.static_routes);
        assert_eq!(back.interfaces[0].ipv4, "192.168.0.1");
        assert_eq!(back.interfaces[0].prefix_len, 24);
        assert!(parse_device_config("router ospf 1\n").is_err());
    }
}
