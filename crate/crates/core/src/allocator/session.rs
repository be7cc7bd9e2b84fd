use std::fmt;

use crate::geometry::Region;

use super::ledger::SlotId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SessionId(pub u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PersistHandle(pub u64);

impl fmt::Display for PersistHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionMode {
    /// User streams measurement bases; the mainframe measures and returns
    /// outcomes.
    Trusted,
    /// The partition is routed to the user, who measures locally.
    SecureQuantum,
}

impl SessionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SessionMode::Trusted => "trusted",
            SessionMode::SecureQuantum => "secure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SessionState {
    Admitted,
    Allocated,
    Severed,
    Running,
    PersistedLogoff,
    Closed,
}

impl SessionState {
    pub const ALL: [SessionState; 6] = [
        SessionState::Admitted,
        SessionState::Allocated,
        SessionState::Severed,
        SessionState::Running,
        SessionState::PersistedLogoff,
        SessionState::Closed,
    ];

    /// Every transition the mainframe may perform.
    pub const LEGAL: [(SessionState, SessionState); 11] = {
        use SessionState::*;
        [
            (Admitted, Allocated),
            (Allocated, Allocated),
            (Allocated, Severed),
            (Severed, Running),
            (Severed, PersistedLogoff),
            (Severed, Closed),
            (Running, Running),
            (Running, PersistedLogoff),
            (Running, Closed),
            (PersistedLogoff, Allocated),
            (PersistedLogoff, Closed),
        ]
    };

    pub fn can_transition_to(self, next: SessionState) -> bool {
        Self::LEGAL.contains(&(self, next))
    }

    /// States in which the session holds a region.
    pub fn holds_region(self) -> bool {
        matches!(
            self,
            SessionState::Allocated
                | SessionState::Severed
                | SessionState::Running
                | SessionState::PersistedLogoff
        )
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SessionState::Admitted => "admitted",
            SessionState::Allocated => "allocated",
            SessionState::Severed => "severed",
            SessionState::Running => "running",
            SessionState::PersistedLogoff => "persisted",
            SessionState::Closed => "closed",
        }
    }
}

impl fmt::Display for SessionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Remaining distilled ancillae a session may consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AncillaBudget {
    pub a: u64,
    pub y: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserSession {
    pub id: SessionId,
    pub user_id: String,
    pub mode: SessionMode,
    pub state: SessionState,
    pub region: Option<Region>,
    pub slots: Vec<SlotId>,
    pub ancilla: AncillaBudget,
    pub ops_consumed: u128,
    pub requested_logical: u64,
    /// Logical qubits carried over from a persisted sub-lattice.
    pub stored_logical: Option<u64>,
    pub runs: u64,
}

/// A state change observed on a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub session: SessionId,
    pub from: SessionState,
    pub to: SessionState,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lifecycle_edges() {
        use SessionState::*;
        assert!(Admitted.can_transition_to(Allocated));
        assert!(Running.can_transition_to(Running));
        assert!(PersistedLogoff.can_transition_to(Allocated));
        assert!(!Admitted.can_transition_to(Running));
        assert!(!Closed.can_transition_to(Admitted));
        assert!(!Severed.can_transition_to(Allocated));
        for s in SessionState::ALL {
            assert!(!Closed.can_transition_to(s));
            assert!(!s.can_transition_to(Admitted));
        }
    }
}
