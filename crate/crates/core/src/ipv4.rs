//! Strict dotted-quad parsing and netmask arithmetic.

use std::net::Ipv4Addr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Ipv4Error {
    /// Not four decimal octets (wrong part count, empty part, sign, hex, leading zero, ...).
    #[error("malformed IPv4 address `{0}`")]
    Malformed(String),
    /// Four decimal octets, but at least one is above 255.
    #[error("IPv4 address `{0}` has an octet outside 0-255")]
    OctetRange(String),
}

impl Ipv4Error {
    /// Finding code used by the validator for this error.
    pub fn code(&self) -> &'static str {
        match self {
            Ipv4Error::Malformed(_) => "IP_MALFORMED",
            Ipv4Error::OctetRange(_) => "IP_OCTET_RANGE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("netmask {0} is not a contiguous run of ones followed by zeros")]
pub struct NonContiguousMask(pub Ipv4Addr);

/// Parses a dotted-quad IPv4 address.
///
/// Exactly four parts of ASCII decimal digits are accepted. A part with a
/// leading zero (`010`) is rejected as malformed to avoid the octal reading;
/// a well-formed part above 255 is reported as an octet range error.
pub fn validate_ipv4(text: &str) -> Result<Ipv4Addr, Ipv4Error> {
    let parts: Vec<&str> = text.split('.').collect();
    if parts.len() != 4 {
        return Err(Ipv4Error::Malformed(text.to_string()));
    }
    let mut octets = [0u8; 4];
    let mut out_of_range = false;
    for (slot, part) in octets.iter_mut().zip(&parts) {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Ipv4Error::Malformed(text.to_string()));
        }
        if part.len() > 1 && part.starts_with('0') {
            return Err(Ipv4Error::Malformed(text.to_string()));
        }
        // Any run of more than three digits without a leading zero is > 255.
        match part.parse::<u16>() {
            Ok(v) if v <= 255 => *slot = v as u8,
            _ => out_of_range = true,
        }
    }
    if out_of_range {
        return Err(Ipv4Error::OctetRange(text.to_string()));
    }
    Ok(Ipv4Addr::from(octets))
}

pub fn mask_to_prefix(mask: Ipv4Addr) -> Result<u8, NonContiguousMask> {
    let bits = u32::from(mask);
    let ones = bits.leading_ones();
    if bits.checked_shl(ones).unwrap_or(0) != 0 {
        return Err(NonContiguousMask(mask));
    }
    Ok(ones as u8)
}

/// Netmask for a prefix length. Panics if `prefix_len > 32`.
pub fn prefix_to_mask(prefix_len: u8) -> Ipv4Addr {
    assert!(prefix_len <= 32, "prefix length {prefix_len} out of range");
    let bits = u32::MAX
        .checked_shl(32 - u32::from(prefix_len))
        .unwrap_or(0);
    Ipv4Addr::from(bits)
}

/// Network address of `addr` under `prefix_len`.
pub fn network_of(addr: Ipv4Addr, prefix_len: u8) -> Ipv4Addr {
    Ipv4Addr::from(u32::from(addr) & u32::from(prefix_to_mask(prefix_len)))
}

/// True when the text has the surface shape of a dotted address (digits and dots only).
pub fn looks_dotted(text: &str) -> bool {
    !text.is_empty() && text.contains('.') && text.bytes().all(|b| b.is_ascii_digit() || b == b'.')
}
