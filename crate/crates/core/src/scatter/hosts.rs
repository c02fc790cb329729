//! Worker host lists: one `host port_base` per line, `#` comments allowed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ScatterError;

/// A worker address. Control traffic uses `port_base`, data `port_base + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerDescriptor {
    pub host: String,
    pub port_base: u16,
}

impl WorkerDescriptor {
    pub fn new(host: impl Into<String>, port_base: u16) -> Result<Self, ScatterError> {
        if !(1024..=65534).contains(&port_base) {
            return Err(ScatterError::Config(format!(
                "port_base {port_base} outside 1024..=65534"
            )));
        }
        Ok(Self {
            host: host.into(),
            port_base,
        })
    }

    pub fn control_port(&self) -> u16 {
        self.port_base
    }

    pub fn data_port(&self) -> u16 {
        self.port_base + 1
    }

    pub fn control_addr(&self) -> String {
        format!("{}:{}", self.host, self.control_port())
    }

    pub fn data_addr(&self) -> String {
        format!("{}:{}", self.host, self.data_port())
    }
}

impl std::fmt::Display for WorkerDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.host, self.port_base)
    }
}

pub fn parse_hosts(text: &str) -> Result<Vec<WorkerDescriptor>, ScatterError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(host), Some(port), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(ScatterError::Config(format!(
                "hosts line {}: expected `host port_base`, got {raw:?}",
                i + 1
            )));
        };
        let port: u16 = port.parse().map_err(|_| {
            ScatterError::Config(format!("hosts line {}: bad port {port:?}", i + 1))
        })?;
        out.push(WorkerDescriptor::new(host, port)?);
    }
    if out.is_empty() {
        return Err(ScatterError::Config("hosts file lists no workers".into()));
    }
    Ok(out)
}

pub fn read_hosts_file(path: &Path) -> Result<Vec<WorkerDescriptor>, ScatterError> {
    parse_hosts(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let hosts = parse_hosts("# cluster\nnode1 5000\n\n  node2   5002 # second\n").unwrap();
        assert_eq!(hosts.len(), 2);
        assert_eq!(hosts[1].host, "node2");
        assert_eq!(hosts[1].control_port(), 5002);
        assert_eq!(hosts[1].data_port(), 5003);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_hosts("node1\n").is_err());
        assert!(parse_hosts("node1 80\n").is_err());
        assert!(parse_hosts("node1 65535\n").is_err());
        assert!(parse_hosts("node1 x\n").is_err());
        assert!(parse_hosts("node1 5000 extra\n").is_err());
        assert!(parse_hosts("# nothing\n").is_err());
    }
}
