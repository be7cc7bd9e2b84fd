//! Declarative scenarios: a mainframe configuration plus an ordered event
//! script, written as TOML.
//!
//! ```toml
//! seed = 7
//!
//! [mainframe]
//! user_count = 2
//! user_region = [4, 4, 1]
//! scratch_width = 1
//! users_per_column = 1
//! footprint = [1, 1]
//!
//! [[events]]
//! op = "admit"
//! session = "alice"
//!
//! [[events]]
//! op = "allocate"
//! session = "alice"
//! ```

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::allocator::{AncillaDemand, MainframeConfig, SessionMode, DEFAULT_DISTILL_VOLUME};
use crate::geometry::{build_layout, LatticeDims, LogicalFootprint, PartitionLayout};
use crate::protocol::{decode_stream, CodecError, MeasurementInstruction};
use crate::resources::{ChipCostModel, DEFAULT_CHIPS_PER_LOGICAL, DEFAULT_TOTAL_OPS};
use crate::stabilizer::DEFAULT_SIMULATION_CAP;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario does not parse: {0}")]
    Parse(String),
    #[error("invalid mainframe configuration: {0}")]
    Config(String),
    #[error("event {index} ({op}): {message}")]
    Event {
        index: usize,
        op: &'static str,
        message: String,
    },
    #[error("event {index} ({op}): stream: {source}")]
    Stream {
        index: usize,
        op: &'static str,
        source: CodecError,
    },
    #[error("no seed: pass --seed, set `seed` in the scenario or set HPQC_SEED")]
    MissingSeed,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MainframeSpec {
    pub user_count: u64,
    /// `[width, depth]` or `[width, depth, layers]` in cells.
    pub user_region: Vec<u64>,
    #[serde(default = "one")]
    pub scratch_width: u64,
    pub users_per_column: u64,
    #[serde(default = "default_chips")]
    pub chips_per_logical: u64,
    /// `[width, depth]` of one logical qubit.
    #[serde(default = "default_footprint")]
    pub footprint: [u64; 2],
    pub total_ops: Option<u64>,
    #[serde(default = "default_cap")]
    pub simulation_cap: usize,
    #[serde(default = "yes")]
    pub random_eigenvalues: bool,
    #[serde(default)]
    pub ancilla_rate_a: u64,
    #[serde(default)]
    pub ancilla_rate_y: u64,
    #[serde(default = "default_volume")]
    pub distill_volume_a: u64,
    #[serde(default = "default_volume")]
    pub distill_volume_y: u64,
}

fn one() -> u64 {
    1
}
fn yes() -> bool {
    true
}
fn default_chips() -> u64 {
    DEFAULT_CHIPS_PER_LOGICAL
}
fn default_footprint() -> [u64; 2] {
    [20, 40]
}
fn default_cap() -> usize {
    DEFAULT_SIMULATION_CAP
}
fn default_volume() -> u64 {
    DEFAULT_DISTILL_VOLUME
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Trusted,
    Secure,
}

impl From<ModeSpec> for SessionMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Trusted => SessionMode::Trusted,
            ModeSpec::Secure => SessionMode::SecureQuantum,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EventKind {
    Admit {
        session: String,
        user: Option<String>,
        #[serde(default = "trusted")]
        mode: ModeSpec,
        #[serde(default)]
        logical: u64,
        #[serde(default)]
        ancilla_a: u64,
        #[serde(default)]
        ancilla_y: u64,
    },
    Allocate {
        session: String,
        logical: Option<u64>,
    },
    Sever {
        session: String,
    },
    Start {
        session: String,
    },
    /// A measurement stream, inline (`stream`) or from a file relative to the
    /// scenario (`file`). A severed session is started first.
    Stream {
        session: String,
        stream: Option<String>,
        file: Option<PathBuf>,
    },
    Grow {
        session: String,
        logical: u64,
    },
    Bell {
        a: String,
        b: String,
        min_cut: Option<usize>,
    },
    Logoff {
        session: String,
        #[serde(default)]
        persist: bool,
        /// Name under which a persisted state can be reattached.
        handle: Option<String>,
    },
    Reattach {
        handle: String,
        session: String,
    },
    AdvanceLayers {
        layers: u64,
    },
    /// Checks the entanglement between a session's region and the rest.
    Entropy {
        session: String,
        equals: Option<usize>,
        min: Option<usize>,
    },
}

fn trusted() -> ModeSpec {
    ModeSpec::Trusted
}

impl EventKind {
    pub fn op(&self) -> &'static str {
        match self {
            EventKind::Admit { .. } => "admit",
            EventKind::Allocate { .. } => "allocate",
            EventKind::Sever { .. } => "sever",
            EventKind::Start { .. } => "start",
            EventKind::Stream { .. } => "stream",
            EventKind::Grow { .. } => "grow",
            EventKind::Bell { .. } => "bell",
            EventKind::Logoff { .. } => "logoff",
            EventKind::Reattach { .. } => "reattach",
            EventKind::AdvanceLayers { .. } => "advance_layers",
            EventKind::Entropy { .. } => "entropy",
        }
    }

    fn sessions(&self) -> Vec<&str> {
        match self {
            EventKind::Admit { .. } | EventKind::AdvanceLayers { .. } => vec![],
            EventKind::Allocate { session, .. }
            | EventKind::Sever { session }
            | EventKind::Start { session }
            | EventKind::Stream { session, .. }
            | EventKind::Grow { session, .. }
            | EventKind::Logoff { session, .. }
            | EventKind::Reattach { session, .. }
            | EventKind::Entropy { session, .. } => vec![session],
            EventKind::Bell { a, b, .. } => vec![a, b],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct EventSpec {
    #[serde(flatten)]
    pub kind: EventKind,
    /// Name of the error this event must fail with, e.g. `CapacityExceeded`.
    pub expect_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub mainframe: MainframeSpec,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    /// Machine-report keys and the values they must take.
    #[serde(default)]
    pub expect: BTreeMap<String, toml::Value>,
}

/// An event with its stream decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedEvent {
    pub spec: EventSpec,
    pub instructions: Vec<MeasurementInstruction>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn layout(&self) -> Result<PartitionLayout, ScenarioError> {
        let m = &self.mainframe;
        let dims = match m.user_region.as_slice() {
            [w, d] => LatticeDims::planar(*w, *d),
            [w, d, l] => LatticeDims::new(*w, *d, *l),
            _ => {
                return Err(ScenarioError::Config(
                    "user_region must be [width, depth] or [width, depth, layers]".into(),
                ))
            }
        }
        .map_err(|e| ScenarioError::Config(e.to_string()))?;
        build_layout(m.user_count, dims, m.scratch_width, m.users_per_column)
            .map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn config(&self, seed: u64) -> Result<MainframeConfig, ScenarioError> {
        let m = &self.mainframe;
        let footprint = LogicalFootprint::new(m.footprint[0], m.footprint[1])
            .map_err(|e| ScenarioError::Config(e.to_string()))?;
        let cost_model = ChipCostModel::new(m.chips_per_logical, footprint)
            .map_err(|e| ScenarioError::Config(e.to_string()))?;
        if m.distill_volume_a == 0 || m.distill_volume_y == 0 {
            return Err(ScenarioError::Config("distillation volumes must be at least 1".into()));
        }
        Ok(MainframeConfig {
            cost_model,
            total_ops: m.total_ops.map_or(DEFAULT_TOTAL_OPS, u128::from),
            seed,
            simulation_cap: m.simulation_cap,
            demand: AncillaDemand {
                rate_a: m.ancilla_rate_a,
                rate_y: m.ancilla_rate_y,
                distill_volume_a: m.distill_volume_a,
                distill_volume_y: m.distill_volume_y,
            },
            random_eigenvalues: m.random_eigenvalues,
        })
    }

    /// Checks names and streams before anything runs: every session and
    /// handle must be introduced by an earlier event, streams must decode, and
    /// streams need a lattice small enough to simulate.
    pub fn prepare(&self, base_dir: Option<&Path>) -> Result<Vec<PreparedEvent>, ScenarioError> {
        let layout = self.layout()?;
        let cap = self.mainframe.simulation_cap as u128;
        let mut sessions: HashSet<&str> = HashSet::new();
        let mut handles: HashSet<&str> = HashSet::new();
        let mut out = Vec::with_capacity(self.events.len());
        for (index, spec) in self.events.iter().enumerate() {
            let op = spec.kind.op();
            let fail = |message: String| ScenarioError::Event { index, op, message };
            for name in spec.kind.sessions() {
                if !sessions.contains(name) {
                    return Err(fail(format!("session `{name}` is not admitted by an earlier event")));
                }
            }
            let mut instructions = Vec::new();
            match &spec.kind {
                EventKind::Admit { session, .. } => {
                    if !sessions.insert(session) {
                        return Err(fail(format!("session `{session}` is admitted twice")));
                    }
                }
                EventKind::Logoff {
                    persist, handle, ..
                } => {
                    if let Some(h) = handle {
                        if !persist {
                            return Err(fail(format!("handle `{h}` given for a wiping logoff")));
                        }
                        handles.insert(h);
                    }
                }
                EventKind::Reattach { handle, .. } => {
                    if !handles.contains(handle.as_str()) {
                        return Err(fail(format!("handle `{handle}` is not created by an earlier logoff")));
                    }
                }
                EventKind::Stream { stream, file, .. } => {
                    let bytes = match (stream, file) {
                        (Some(s), None) => s.clone().into_bytes(),
                        (None, Some(f)) => {
                            let path = base_dir.map_or_else(|| f.clone(), |d| d.join(f));
                            std::fs::read(&path)
                                .map_err(|e| fail(format!("{}: {e}", path.display())))?
                        }
                        _ => return Err(fail("exactly one of `stream` and `file` is required".into())),
                    };
                    instructions = decode_stream(&bytes)
                        .map_err(|source| ScenarioError::Stream { index, op, source })?;
                    let cells = layout.global.cell_count();
                    if cells > cap {
                        return Err(fail(format!(
                            "streams need a simulated lattice; {cells} cells exceed the desk-scale cap of {cap}"
                        )));
                    }
                }
                EventKind::Entropy { .. } if layout.global.cell_count() > cap => {
                    return Err(fail(format!(
                        "entropy needs a simulated lattice; {} cells exceed the desk-scale cap of {cap}",
                        layout.global.cell_count()
                    )));
                }
                _ => {}
            }
            out.push(PreparedEvent {
                spec: spec.clone(),
                instructions,
            });
        }
        Ok(out)
    }
}

/// `--seed`, then the scenario's own seed, then `HPQC_SEED`.
pub fn resolve_seed(
    flag: Option<u64>,
    scenario: Option<u64>,
    env: Option<&str>,
) -> Result<u64, ScenarioError> {
    if let Some(s) = flag.or(scenario) {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| ScenarioError::Parse(format!("HPQC_SEED `{v}` is not an unsigned integer"))),
        None => Err(ScenarioError::MissingSeed),
    }
}
