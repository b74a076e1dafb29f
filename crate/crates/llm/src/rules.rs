//! Deterministic converter from constrained English to SCS.
//!
//! Scope is deliberately narrow: declarative sentences naming devices
//! (`R1`, `R-2`), interfaces (`gi 0/0`, `Fast Ethernet 0/1`,
//! `loopback interface 1`), addresses in slash or mask form, links
//! ("connected to", "linked to", "interfaces with", "connection from A to B")
//! and static routes ("on A to reach B through C", "from A to B and vice
//! versa", "between A and B ... on both routers"). Anything outside that is
//! ignored unless it carries an address or interface that cannot be attached,
//! which is reported as [`AdapterError::UnparsableSentence`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use ipnet::Ipv4Net;
use once_cell::sync::Lazy;
use regex::Regex;

use t2n_core::extract::{is_loopback_name, normalize_interface_name};
use t2n_core::ipv4::{mask_to_prefix, validate_ipv4};
use t2n_core::validate::MissingField;
use t2n_core::{make_clarification, Finding, FindingCode, NodeType, ValidationReport};

use crate::{AdapterError, AdapterExchange, Outcome, ScenarioAdapter};

const DEV: &str = r"\b[A-Z]{1,3}-?\d+\b";
const IP: &str = r"\b\d+\.\d+\.\d+\.\d+\b";

static DEVICE: Lazy<Regex> = Lazy::new(|| Regex::new(DEV).unwrap());
static IFACE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\b(gigabit\s*ethernet|fast\s*ethernet|ethernet|gig|gi|fa|loopback|lo)\s*(?:interface\s*)?(\d+(?:\s*/\s*\d+)*)\b",
    )
    .unwrap()
});
static ADDRESS: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"({IP})(?:\s*/\s*(\d+))?")).unwrap());
static MASK_TAIL: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(r"(?i)^\s*,?\s*(?:and\s+)?(?:with\s+)?(?:an?\s+)?(?:the\s+)?(?:subnet\s+)?mask\s+(?:of\s+)?({IP})"))
        .unwrap()
});
static OWNER_BEFORE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"(?:({DEV})(?:'s)?|\b(?i:(its)))\s+(?i:corresponding\s+)?(?i:interface,?\s+)?$"
    ))
    .unwrap()
});
static POSSESSIVE_IP: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"({DEV})'s\s+(?i:IP)\b")).unwrap());
static STARTS_WITH_IT: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)^(it|its)\b").unwrap());
static ON_DEVICE_COMMA: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"^(?i:on)\s+({DEV})\s*,")).unwrap());
static TYPE_DECL: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"(?:({DEV})\s+(?i:is\s+an?)\s+(?i:(router|switch|pc))\b|\b(?i:(router|switch|pc))\s+(?i:as)\s+({DEV}))"
    ))
    .unwrap()
});
static LINK_KEYWORD: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(connect(?:s|ed|ing)?|connection|linked|interfaces\s+with)\b").unwrap()
});
static CONNECTION_FROM: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"(?i:connection\s+from)\s+({DEV})\s+(?i:to)\s+({DEV})"
    ))
    .unwrap()
});

static ROUTE_KEYWORD: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)\bstatic\s+rout(?:e|es|er|ing)\b").unwrap());
static ROUTE_BETWEEN: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"(?i:between)\s+({DEV})\s+(?i:and)\s+({DEV})")).unwrap());
static ON_BOTH: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bon\s+both\b").unwrap());
static ROUTE_FROM: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"(?i:from)\s+({DEV})\s+(?i:to)\s+({DEV})(\s+(?i:and\s+vice\s+versa))?"
    ))
    .unwrap()
});
static ON_SEGMENT: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"\b(?i:on)\s+({DEV})")).unwrap());
static TARGET_DEVICE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"(?i:to)\s+(?:(?i:reach)\s+)?(?:(?i:to)\s+)?({DEV})"
    ))
    .unwrap()
});
static TARGET_NET: Lazy<Regex> = Lazy::new(|| {
    Regex::new(&format!(
        r"(?i:to)\s+(?:(?i:reach)\s+)?(?:(?i:to)\s+)?({IP})(?:\s*/\s*(\d+)|\s+(?:(?i:mask)\s+)?({IP}))?"
    ))
    .unwrap()
});
static VIA: Lazy<Regex> =
    Lazy::new(|| Regex::new(&format!(r"(?i:through|via)\s+({DEV}|{IP})")).unwrap());

/// Deterministic offline backend built on [`rules_convert`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RulesAdapter;

impl ScenarioAdapter for RulesAdapter {
    fn name(&self) -> &'static str {
        "rules"
    }

    fn generate(&self, exchange: &AdapterExchange) -> Result<Outcome, AdapterError> {
        rules_convert(&exchange.user_texts().join("\n\n"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Address {
    text: String,
    prefix: Option<u8>,
    mask: Option<String>,
}

impl Address {
    fn prefix_len(&self) -> Option<u8> {
        match (&self.prefix, &self.mask) {
            (Some(p), _) => Some(*p),
            (None, Some(m)) => validate_ipv4(m).ok().and_then(|m| mask_to_prefix(m).ok()),
            _ => None,
        }
    }

    fn subnet(&self) -> Option<Ipv4Net> {
        let addr = validate_ipv4(&self.text).ok()?;
        Ipv4Net::new(addr, self.prefix_len()?)
            .ok()
            .map(|n| n.trunc())
    }

    fn scs(&self) -> String {
        match (&self.prefix, &self.mask) {
            (Some(p), _) => format!("{}/{}", self.text, p),
            (None, Some(m)) => format!("{} mask {}", self.text, m),
            _ => self.text.clone(),
        }
    }
}

#[derive(Debug, Clone)]
struct IfaceFact {
    device: String,
    name: String,
    address: Option<Address>,
}

type Side = (String, Option<String>);

#[derive(Debug, Clone)]
struct LinkFact {
    a: Side,
    b: Side,
}

impl LinkFact {
    fn pair(&self) -> BTreeSet<&str> {
        [self.a.0.as_str(), self.b.0.as_str()].into_iter().collect()
    }

    fn side(&self, device: &str) -> Option<&Option<String>> {
        if self.a.0 == device {
            Some(&self.a.1)
        } else if self.b.0 == device {
            Some(&self.b.1)
        } else {
            None
        }
    }

    fn side_mut(&mut self, device: &str) -> Option<&mut Option<String>> {
        if self.a.0 == device {
            Some(&mut self.a.1)
        } else if self.b.0 == device {
            Some(&mut self.b.1)
        } else {
            None
        }
    }

    fn is_complete(&self) -> bool {
        self.a.1.is_some() && self.b.1.is_some()
    }
}

#[derive(Debug, Clone)]
struct PendingAddress {
    device: String,
    peer: Option<String>,
    address: Address,
    sentence: usize,
    text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Target {
    Device(String),
    Net(Address),
}

#[derive(Debug, Clone)]
struct RouteFact {
    owner: String,
    target: Target,
    via: Option<String>,
}

#[derive(Default)]
struct Facts {
    devices: Vec<String>,
    types: BTreeMap<String, NodeType>,
    ifaces: Vec<IfaceFact>,
    links: Vec<LinkFact>,
    pending: Vec<PendingAddress>,
    routes: Vec<RouteFact>,
    vague_routes: bool,
    context: Option<String>,
}

struct Mention {
    name: String,
    start: usize,
}

struct IfaceMention {
    owner: String,
    name: String,
    start: usize,
    end: usize,
}

/// Splits prose into sentences: blank lines separate paragraphs, single
/// newlines are spaces, and `.`, `?` or `!` followed by whitespace ends a
/// sentence.
fn sentences(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .filter(|c| !matches!(c, '“' | '”' | '"'))
        .map(|c| if c == '’' { '\'' } else { c })
        .collect();
    let mut out = Vec::new();
    for para in cleaned.replace("\r\n", "\n").split("\n\n") {
        let para = para.split_whitespace().collect::<Vec<_>>().join(" ");
        let mut current = String::new();
        let mut chars = para.chars().peekable();
        while let Some(c) = chars.next() {
            current.push(c);
            if matches!(c, '.' | '?' | '!') && chars.peek().is_none_or(|n| n.is_whitespace()) {
                let s = current
                    .trim()
                    .trim_end_matches(['.', '?', '!'])
                    .trim()
                    .to_string();
                if !s.is_empty() {
                    out.push(s);
                }
                current.clear();
            }
        }
        let s = current.trim().to_string();
        if !s.is_empty() {
            out.push(s);
        }
    }
    out
}

fn device_mentions(s: &str) -> Vec<Mention> {
    DEVICE
        .find_iter(s)
        .filter(|m| !s[m.end()..].starts_with('/'))
        .map(|m| Mention {
            name: m.as_str().to_string(),
            start: m.start(),
        })
        .collect()
}

impl Facts {
    fn add_device(&mut self, name: &str) {
        if !self.devices.iter().any(|d| d == name) {
            self.devices.push(name.to_string());
        }
    }

    fn iface_mut(&mut self, device: &str, name: &str) -> &mut IfaceFact {
        let pos = match self
            .ifaces
            .iter()
            .position(|i| i.device == device && i.name == name)
        {
            Some(p) => p,
            None => {
                self.ifaces.push(IfaceFact {
                    device: device.to_string(),
                    name: name.to_string(),
                    address: None,
                });
                self.ifaces.len() - 1
            }
        };
        &mut self.ifaces[pos]
    }

    fn assign(&mut self, device: &str, name: &str, address: Address) {
        let fact = self.iface_mut(device, name);
        if fact.address.is_none() {
            fact.address = Some(address);
        }
    }

    fn sentence(&mut self, index: usize, s: &str) -> Result<(), AdapterError> {
        let unparsable = || AdapterError::UnparsableSentence {
            index,
            sentence: s.to_string(),
        };
        let devices = device_mentions(s);
        for d in &devices {
            self.add_device(&d.name);
        }
        if ROUTE_KEYWORD.is_match(s) {
            self.route_sentence(s);
            return Ok(());
        }

        let (subject, subject_pos) = if STARTS_WITH_IT.is_match(s) {
            (self.context.clone(), Some(0))
        } else if let Some(c) = ON_DEVICE_COMMA.captures(s) {
            (Some(c[1].to_string()), Some(c.get(1).unwrap().start()))
        } else if let Some(first) = devices.first() {
            (Some(first.name.clone()), Some(first.start))
        } else {
            (self.context.clone(), None)
        };
        if let Some(subj) = &subject {
            self.context = Some(subj.clone());
        }

        for c in TYPE_DECL.captures_iter(s) {
            let (dev, ty) = match (c.get(1), c.get(2), c.get(3), c.get(4)) {
                (Some(d), Some(t), _, _) | (_, _, Some(t), Some(d)) => (d.as_str(), t.as_str()),
                _ => continue,
            };
            if let Ok(ty) = ty.to_ascii_lowercase().parse::<NodeType>() {
                self.types.insert(dev.to_string(), ty);
            }
        }

        let mut ifaces: Vec<IfaceMention> = Vec::new();
        for c in IFACE.captures_iter(s) {
            let whole = c.get(0).unwrap();
            let name = normalize_interface_name(&format!("{} {}", &c[1], &c[2]))
                .map_err(|_| unparsable())?;
            let owner = match OWNER_BEFORE.captures(&s[..whole.start()]) {
                Some(o) if o.get(1).is_some() => Some(o[1].to_string()),
                _ => subject.clone(),
            };
            let owner = owner.ok_or_else(unparsable)?;
            self.iface_mut(&owner, &name);
            ifaces.push(IfaceMention {
                owner,
                name,
                start: whole.start(),
                end: whole.end(),
            });
        }

        let links = self.link_facts(s, subject.as_deref(), subject_pos, &devices, &ifaces);

        let mut consumed_until = 0;
        let mut last_end = 0;
        for c in ADDRESS.captures_iter(s) {
            let whole = c.get(0).unwrap();
            if whole.start() < consumed_until {
                continue;
            }
            let mut address = Address {
                text: c[1].to_string(),
                prefix: c.get(2).and_then(|p| p.as_str().parse().ok()),
                mask: None,
            };
            if address.prefix.is_none() {
                if let Some(m) = MASK_TAIL.captures(&s[whole.end()..]) {
                    address.mask = Some(m[1].to_string());
                    consumed_until = whole.end() + m.get(0).unwrap().end();
                }
            }
            if address.prefix.is_none() && address.mask.is_none() {
                return Err(unparsable());
            }

            let possessive = POSSESSIVE_IP
                .captures_iter(&s[last_end..whole.start()])
                .last()
                .map(|p| p[1].to_string());
            last_end = whole.end().max(consumed_until);
            if let Some(dev) = possessive {
                if let Some(m) = ifaces
                    .iter()
                    .rev()
                    .find(|m| m.owner == dev && m.start < whole.start())
                {
                    let name = m.name.clone();
                    self.assign(&dev, &name, address);
                } else if let Some(m) = ifaces.iter().find(|m| m.owner == dev) {
                    let name = m.name.clone();
                    self.assign(&dev, &name, address);
                } else {
                    let peer = links.iter().find_map(|l| {
                        if l.a.0 == dev {
                            Some(l.b.0.clone())
                        } else if l.b.0 == dev {
                            Some(l.a.0.clone())
                        } else {
                            None
                        }
                    });
                    self.pending.push(PendingAddress {
                        device: dev,
                        peer,
                        address,
                        sentence: index,
                        text: s.to_string(),
                    });
                }
                continue;
            }
            let target = ifaces
                .iter()
                .rev()
                .find(|m| m.end <= whole.start())
                .or(ifaces.last());
            match target {
                Some(m) => {
                    let (owner, name) = (m.owner.clone(), m.name.clone());
                    self.assign(&owner, &name, address);
                }
                None => return Err(unparsable()),
            }
        }
        self.links.extend(links);
        Ok(())
    }

    fn link_facts(
        &self,
        s: &str,
        subject: Option<&str>,
        subject_pos: Option<usize>,
        devices: &[Mention],
        ifaces: &[IfaceMention],
    ) -> Vec<LinkFact> {
        let iface_of = |dev: &str| {
            ifaces
                .iter()
                .find(|m| m.owner == dev && !is_loopback_name(&m.name))
        };
        if let Some(c) = CONNECTION_FROM.captures(s) {
            let (a, b) = (c[1].to_string(), c[2].to_string());
            if a == b {
                return Vec::new();
            }
            let ia = iface_of(&a).map(|m| m.name.clone());
            let ib = iface_of(&b).map(|m| m.name.clone());
            return vec![LinkFact {
                a: (a, ia),
                b: (b, ib),
            }];
        }
        let (Some(subject), Some(subject_pos)) = (subject, subject_pos) else {
            return Vec::new();
        };
        let Some(kw) = LINK_KEYWORD.find_iter(s).find(|k| k.start() > subject_pos) else {
            return Vec::new();
        };

        let mut peers: Vec<&Mention> = Vec::new();
        for d in devices
            .iter()
            .filter(|d| d.start > kw.start() && d.name != subject)
        {
            if !peers.iter().any(|p| p.name == d.name) {
                peers.push(d);
            }
        }
        if peers.is_empty() {
            return Vec::new();
        }
        let mut subject_iface: BTreeMap<&str, String> = BTreeMap::new();
        for m in ifaces
            .iter()
            .filter(|m| m.owner == subject && !is_loopback_name(&m.name))
        {
            let before = peers
                .iter()
                .filter(|p| p.start < m.start)
                .max_by_key(|p| p.start);
            let after = peers
                .iter()
                .filter(|p| p.start > m.start)
                .min_by_key(|p| p.start);
            if let Some(p) = before.or(after) {
                subject_iface
                    .entry(p.name.as_str())
                    .or_insert_with(|| m.name.clone());
            }
        }
        peers
            .iter()
            .map(|p| LinkFact {
                a: (
                    subject.to_string(),
                    subject_iface.get(p.name.as_str()).cloned(),
                ),
                b: (p.name.clone(), iface_of(&p.name).map(|m| m.name.clone())),
            })
            .collect()
    }

    fn route_sentence(&mut self, s: &str) {
        let mut found: Vec<RouteFact> = Vec::new();
        if let Some(c) = ROUTE_BETWEEN.captures(s) {
            if ON_BOTH.is_match(s) {
                let (a, b) = (c[1].to_string(), c[2].to_string());
                found.push(RouteFact {
                    owner: a.clone(),
                    target: Target::Device(b.clone()),
                    via: None,
                });
                found.push(RouteFact {
                    owner: b,
                    target: Target::Device(a),
                    via: None,
                });
            }
        }
        if found.is_empty() {
            if let Some(c) = ROUTE_FROM.captures(s) {
                let (a, b) = (c[1].to_string(), c[2].to_string());
                found.push(RouteFact {
                    owner: a.clone(),
                    target: Target::Device(b.clone()),
                    via: None,
                });
                if c.get(3).is_some() {
                    found.push(RouteFact {
                        owner: b,
                        target: Target::Device(a),
                        via: None,
                    });
                }
            }
        }
        if found.is_empty() {
            let starts: Vec<(usize, usize, String)> = ON_SEGMENT
                .captures_iter(s)
                .map(|c| {
                    (
                        c.get(0).unwrap().start(),
                        c.get(0).unwrap().end(),
                        c[1].to_string(),
                    )
                })
                .collect();
            for (k, (_, end, owner)) in starts.iter().enumerate() {
                let stop = starts.get(k + 1).map(|n| n.0).unwrap_or(s.len());
                let seg = &s[*end..stop];
                let target = if let Some(t) = TARGET_NET.captures(seg) {
                    Target::Net(Address {
                        text: t[1].to_string(),
                        prefix: t.get(2).and_then(|p| p.as_str().parse().ok()),
                        mask: t.get(3).map(|m| m.as_str().to_string()),
                    })
                } else if let Some(t) = TARGET_DEVICE.captures(seg) {
                    Target::Device(t[1].to_string())
                } else {
                    continue;
                };
                let via = VIA.captures(seg).map(|v| v[1].to_string());
                found.push(RouteFact {
                    owner: owner.clone(),
                    target,
                    via,
                });
            }
        }
        if found.is_empty() {
            self.vague_routes = true;
            return;
        }
        if let Some(trailing) = VIA.captures_iter(s).last().map(|v| v[1].to_string()) {
            for f in found.iter_mut().filter(|f| f.via.is_none()) {
                if f.owner != trailing && f.target != Target::Device(trailing.clone()) {
                    f.via = Some(trailing.clone());
                }
            }
        }
        self.routes.extend(found);
    }

    fn merge_links(&mut self) {
        let mut merged: Vec<LinkFact> = Vec::new();
        for fact in std::mem::take(&mut self.links) {
            let compatible = merged.iter_mut().find(|m| {
                m.pair() == fact.pair()
                    && [&fact.a, &fact.b].iter().all(|(dev, iface)| {
                        match (m.side(dev).unwrap(), iface) {
                            (Some(x), Some(y)) => x == y,
                            _ => true,
                        }
                    })
            });
            match compatible {
                Some(m) => {
                    for (dev, iface) in [fact.a, fact.b] {
                        let slot = m.side_mut(&dev).unwrap();
                        if slot.is_none() {
                            *slot = iface;
                        }
                    }
                }
                None => merged.push(fact),
            }
        }
        self.links = merged;
    }

    fn subnet_of(&self, device: &str, iface: &str) -> Option<Ipv4Net> {
        self.ifaces
            .iter()
            .find(|i| i.device == device && i.name == iface)
            .and_then(|i| i.address.as_ref())
            .and_then(Address::subnet)
    }

    /// Fills interface names missing from link facts by matching subnets.
    fn complete_links(&mut self) {
        let used: BTreeSet<(String, String)> = self
            .links
            .iter()
            .flat_map(|l| [&l.a, &l.b])
            .filter_map(|(d, i)| i.clone().map(|i| (d.clone(), i)))
            .collect();
        for k in 0..self.links.len() {
            let link = self.links[k].clone();
            if link.is_complete() {
                continue;
            }
            let candidates = |dev: &str| -> Vec<(String, Option<Ipv4Net>)> {
                self.ifaces
                    .iter()
                    .filter(|i| i.device == dev && !is_loopback_name(&i.name))
                    .filter(|i| !used.contains(&(dev.to_string(), i.name.clone())))
                    .map(|i| (i.name.clone(), i.address.as_ref().and_then(Address::subnet)))
                    .collect()
            };
            let side_subnet = |(d, i): &Side| i.as_ref().and_then(|i| self.subnet_of(d, i));
            let (a_net, b_net) = (side_subnet(&link.a), side_subnet(&link.b));
            let mut filled = link.clone();
            match (&link.a.1, &link.b.1) {
                (Some(_), None) => {
                    let c: Vec<_> = candidates(&link.b.0)
                        .into_iter()
                        .filter(|(_, n)| n.is_some() && *n == a_net)
                        .collect();
                    if c.len() == 1 {
                        filled.b.1 = Some(c[0].0.clone());
                    }
                }
                (None, Some(_)) => {
                    let c: Vec<_> = candidates(&link.a.0)
                        .into_iter()
                        .filter(|(_, n)| n.is_some() && *n == b_net)
                        .collect();
                    if c.len() == 1 {
                        filled.a.1 = Some(c[0].0.clone());
                    }
                }
                _ => {
                    let ca = candidates(&link.a.0);
                    let cb = candidates(&link.b.0);
                    let pairs: Vec<(String, String)> = ca
                        .iter()
                        .flat_map(|(ia, na)| {
                            cb.iter()
                                .filter(move |(_, nb)| na.is_some() && na == nb)
                                .map(move |(ib, _)| (ia.clone(), ib.clone()))
                        })
                        .collect();
                    if pairs.len() == 1 {
                        filled.a.1 = Some(pairs[0].0.clone());
                        filled.b.1 = Some(pairs[0].1.clone());
                    }
                }
            }
            self.links[k] = filled;
        }
        self.links.retain(LinkFact::is_complete);
        let mut seen = BTreeSet::new();
        self.links.retain(|l| {
            let mut key = [
                (l.a.0.clone(), l.a.1.clone()),
                (l.b.0.clone(), l.b.1.clone()),
            ];
            key.sort();
            seen.insert(key)
        });

        let linked: BTreeSet<(String, String)> = self
            .links
            .iter()
            .flat_map(|l| [&l.a, &l.b])
            .map(|(d, i)| (d.clone(), i.clone().unwrap()))
            .collect();
        let mut by_subnet: BTreeMap<Ipv4Net, Vec<(String, String)>> = BTreeMap::new();
        for i in &self.ifaces {
            if is_loopback_name(&i.name) || linked.contains(&(i.device.clone(), i.name.clone())) {
                continue;
            }
            if let Some(net) = i.address.as_ref().and_then(Address::subnet) {
                by_subnet
                    .entry(net)
                    .or_default()
                    .push((i.device.clone(), i.name.clone()));
            }
        }
        for members in by_subnet.values() {
            if members.len() == 2 && members[0].0 != members[1].0 {
                self.links.push(LinkFact {
                    a: (members[0].0.clone(), Some(members[0].1.clone())),
                    b: (members[1].0.clone(), Some(members[1].1.clone())),
                });
            }
        }
    }

    fn resolve_pending(&mut self) -> Result<(), AdapterError> {
        for p in std::mem::take(&mut self.pending) {
            let iface = self
                .links
                .iter()
                .filter(|l| p.peer.as_ref().is_none_or(|peer| l.side(peer).is_some()))
                .find_map(|l| l.side(&p.device).cloned().flatten());
            match iface {
                Some(name) => self.assign(&p.device, &name, p.address),
                None => {
                    return Err(AdapterError::UnparsableSentence {
                        index: p.sentence,
                        sentence: p.text,
                    })
                }
            }
        }
        Ok(())
    }

    fn neighbors(&self, device: &str) -> BTreeSet<String> {
        self.links
            .iter()
            .filter_map(|l| {
                if l.a.0 == device {
                    Some(l.b.0.clone())
                } else if l.b.0 == device {
                    Some(l.a.0.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    fn subnets(&self, device: &str, loopback: bool) -> Vec<Ipv4Net> {
        let mut out: Vec<Ipv4Net> = self
            .ifaces
            .iter()
            .filter(|i| i.device == device && is_loopback_name(&i.name) == loopback)
            .filter_map(|i| i.address.as_ref().and_then(Address::subnet))
            .collect();
        out.dedup();
        out
    }

    fn connected(&self, device: &str, net: &Ipv4Net) -> bool {
        self.subnets(device, false)
            .iter()
            .chain(self.subnets(device, true).iter())
            .any(|n| n.contains(net))
    }

    /// Shortest device path from `from` to `to` that avoids `avoid`.
    fn path(&self, from: &str, to: &str, avoid: &str) -> Option<Vec<String>> {
        let mut prev: BTreeMap<String, String> = BTreeMap::new();
        let mut queue = VecDeque::from([from.to_string()]);
        let mut seen = BTreeSet::from([from.to_string(), avoid.to_string()]);
        while let Some(cur) = queue.pop_front() {
            if cur == to {
                let mut path = vec![cur.clone()];
                let mut at = cur;
                while let Some(p) = prev.get(&at) {
                    path.push(p.clone());
                    at = p.clone();
                }
                path.reverse();
                return Some(path);
            }
            for n in self.neighbors(&cur) {
                if seen.insert(n.clone()) {
                    prev.insert(n.clone(), cur.clone());
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// Static route lines per device, including routes on transit devices
    /// that a multi-hop route depends on.
    fn route_lines(&self) -> BTreeMap<String, Vec<String>> {
        let mut lines: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut covered: BTreeSet<(String, Ipv4Net)> = BTreeSet::new();
        let mut transit: Vec<(Vec<String>, Vec<Ipv4Net>)> = Vec::new();
        let push = |lines: &mut BTreeMap<String, Vec<String>>, dev: &str, line: String| {
            let v = lines.entry(dev.to_string()).or_default();
            if !v.contains(&line) {
                v.push(line);
            }
        };
        for r in &self.routes {
            let via = r.via.clone().or_else(|| match &r.target {
                Target::Device(t) if self.neighbors(&r.owner).contains(t) => Some(t.clone()),
                Target::Device(t) => {
                    let common: Vec<String> = self
                        .neighbors(&r.owner)
                        .intersection(&self.neighbors(t))
                        .cloned()
                        .collect();
                    (common.len() == 1).then(|| common[0].clone())
                }
                Target::Net(_) => {
                    let n = self.neighbors(&r.owner);
                    (n.len() == 1).then(|| n.into_iter().next().unwrap())
                }
            });
            let destinations: Vec<String> = match &r.target {
                Target::Net(a) => vec![a.scs()],
                Target::Device(t) => {
                    let mut nets = self.subnets(t, true);
                    if nets.is_empty() {
                        nets = self
                            .subnets(t, false)
                            .into_iter()
                            .filter(|n| !self.connected(&r.owner, n))
                            .collect();
                    }
                    if let Some(v) = via.as_ref().filter(|v| *v != t && self.devices.contains(v)) {
                        if let Some(path) = self.path(v, t, &r.owner) {
                            transit.push((path, nets.clone()));
                        }
                    }
                    nets.iter().map(|n| n.to_string()).collect()
                }
            };
            let via_part = via.map(|v| format!(" via {v}")).unwrap_or_default();
            if destinations.is_empty() {
                push(&mut lines, &r.owner, format!("static_route{via_part}"));
            }
            for d in destinations {
                if let Ok(net) = d.parse::<Ipv4Net>() {
                    covered.insert((r.owner.clone(), net.trunc()));
                }
                push(&mut lines, &r.owner, format!("static_route {d}{via_part}"));
            }
        }
        for (path, nets) in transit {
            for hop in path.windows(2) {
                for net in &nets {
                    if self.connected(&hop[0], net) || !covered.insert((hop[0].clone(), *net)) {
                        continue;
                    }
                    push(
                        &mut lines,
                        &hop[0],
                        format!("static_route {net} via {}", hop[1]),
                    );
                }
            }
        }
        lines
    }

    fn render(&self) -> String {
        let routes = self.route_lines();
        let mut out = String::new();
        for d in &self.devices {
            let ty = self.types.get(d).copied().unwrap_or(NodeType::Router);
            let _ = writeln!(out, "{d}: type {ty}");
            for i in self.ifaces.iter().filter(|i| &i.device == d) {
                if let Some(a) = &i.address {
                    let _ = writeln!(out, "{d}: interface {} ip {}", i.name, a.scs());
                }
            }
            for line in routes.get(d).into_iter().flatten() {
                let _ = writeln!(out, "{d}: {line}");
            }
        }
        for l in &self.links {
            let (a, b) = (&l.a, &l.b);
            let _ = writeln!(
                out,
                "{},{}: {}.{} <-> {}.{}",
                a.0,
                b.0,
                a.0,
                a.1.as_ref().unwrap(),
                b.0,
                b.1.as_ref().unwrap()
            );
        }
        out
    }
}

/// Converts constrained-English scenario text to SCS, or to a clarification
/// when routes are mentioned without any usable detail.
pub fn rules_convert(text: &str) -> Result<Outcome, AdapterError> {
    let mut facts = Facts::default();
    for (index, s) in sentences(text).iter().enumerate() {
        facts.sentence(index, s)?;
    }
    if facts.devices.is_empty() {
        return Ok(Outcome::Reject {
            reason: "no network devices were found in the scenario".into(),
        });
    }
    facts.merge_links();
    facts.complete_links();
    facts.resolve_pending()?;
    facts.complete_links();

    let unaddressed: Vec<MissingField> = facts
        .ifaces
        .iter()
        .filter(|i| i.address.is_none())
        .map(|i| MissingField {
            subject: format!("{}/interfaces[{}]", i.device, i.name),
            field: "ipv4".into(),
        })
        .collect();
    if !unaddressed.is_empty() {
        let names: Vec<String> = unaddressed.iter().map(|m| m.subject.clone()).collect();
        return Ok(Outcome::Clarify {
            question: format!(
                "Which IP address should be configured on {}?",
                names.join(", ")
            ),
            missing_fields: unaddressed,
        });
    }
    if facts.vague_routes && facts.routes.is_empty() {
        let finding = Finding::new(
            FindingCode::RoutesUnspecified,
            "static_routes",
            "static routes are mentioned without source, destination or through device",
        )
        .with_field("source,destination,via");
        let request = make_clarification(&ValidationReport::from_findings(vec![finding]))
            .expect("a missing-information finding is always clarifiable");
        return Ok(Outcome::Clarify {
            question: request.prompt,
            missing_fields: request.missing_fields,
        });
    }
    Ok(Outcome::scs(facts.render()))
}
