//! Append-only event log: `layer,seq,event_kind,session_id,details...`.
//!
//! Every event carries `cells=N`, the number of cells it measured (and so the
//! logical operations it charged), as its first detail field.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::session::SessionId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub layer: u64,
    pub seq: u64,
    pub kind: &'static str,
    pub session: Option<SessionId>,
    pub cells: u128,
    pub details: Vec<(&'static str, String)>,
}

impl Event {
    pub fn line(&self) -> String {
        let mut s = format!("{},{},{},", self.layer, self.seq, self.kind);
        match self.session {
            Some(id) => {
                let _ = write!(s, "{id}");
            }
            None => s.push('-'),
        }
        let _ = write!(s, ",cells={}", self.cells);
        for (k, v) in &self.details {
            let _ = write!(s, ",{k}={v}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub(crate) fn push(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.line());
            out.push('\n');
        }
        out
    }

    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Sums the `cells=` field of every line of a serialized log.
pub fn cross_sum_cells(log_text: &str) -> Option<u128> {
    log_text
        .lines()
        .map(|line| {
            line.split(',')
                .find_map(|f| f.strip_prefix("cells="))
                .and_then(|v| v.parse::<u128>().ok())
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let e = Event {
            layer: 3,
            seq: 7,
            kind: "sever",
            session: Some(SessionId(2)),
            cells: 8,
            details: vec![("layers", "1".into())],
        };
        assert_eq!(e.line(), "3,7,sever,s2,cells=8,layers=1");
        let anon = Event {
            session: None,
            details: vec![],
            ..e
        };
        assert_eq!(anon.line(), "3,7,sever,-,cells=8");
    }

    #[test]
    fn cross_sum() {
        assert_eq!(cross_sum_cells("0,0,a,-,cells=4\n0,1,b,s0,cells=6,x=1\n"), Some(10));
        assert_eq!(cross_sum_cells(""), Some(0));
        assert_eq!(cross_sum_cells("0,0,a,-\n"), None);
    }
}
