//! The multi-tenant mainframe: sessions, slot allocation, severing,
//! persistence across logoff, Bell brokering and operations accounting.
//!
//! Every mutation is validated in full before anything changes, so an
//! operation that returns an error leaves the mainframe untouched. When the
//! global lattice fits under the simulation cap the mainframe also carries a
//! stabilizer tableau of it (the desk lattice) and executes measurements on it.

mod corridor;
mod events;
mod ledger;
mod scratch;
mod session;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{
    boundary_ring, validate_layout, CellCoord, GeometryError, LayoutViolation, PartitionLayout,
    Region, RegionId,
};
use crate::protocol::{
    prepare_with_random_eigenvalues, run_secure_with_record, EigenvalueRecord,
    MeasurementInstruction, PhotonStreamDescriptor, RoutedPartition,
};
use crate::resources::{
    mainframe_report, ChipCostModel, OperationsBudget, ResourceReport, DEFAULT_TOTAL_OPS,
};
use crate::stabilizer::{
    graph_state_tableau, lattice_graph, qubits_for, region_boundary_cells, GraphAdjacency,
    Outcome, PauliBasis, StabilizerError, StabilizerTableau, DEFAULT_SIMULATION_CAP,
};

pub use corridor::{Corridor, CorridorId};
pub use events::{cross_sum_cells, Event, EventLog};
pub use ledger::{AllocationLedger, PersistenceRecord, SlotCounts, SlotId, SlotState};
pub use scratch::{scratch_feasibility, AncillaDemand, ScratchFeasibility, DEFAULT_DISTILL_VOLUME};
pub use session::{
    AncillaBudget, PersistHandle, SessionId, SessionMode, SessionState, Transition, UserSession,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MainframeError {
    #[error("mainframe has no layout yet")]
    NotReady,
    #[error("mainframe is already booted")]
    AlreadyBooted,
    #[error("invalid layout: {0:?}")]
    InvalidLayout(Vec<LayoutViolation>),
    #[error("unknown session {0}")]
    UnknownSession(SessionId),
    #[error("{op} is not allowed for session {session} in state {state}")]
    InvalidState {
        session: SessionId,
        state: SessionState,
        op: &'static str,
    },
    #[error("no free run of slots holds {requested} logical qubits")]
    CapacityExceeded { requested: u64 },
    #[error("unknown persistence handle {0}")]
    UnknownHandle(PersistHandle),
    #[error("no corridor available between {a} and {b}")]
    NoCorridorAvailable { a: SessionId, b: SessionId },
    #[error("operations budget exhausted: {requested} requested, {remaining} remaining")]
    BudgetExhausted { requested: u128, remaining: u128 },
    #[error("instruction {index} targets {cell}, outside the session region")]
    OutOfRegion { index: usize, cell: CellCoord },
    #[error("stream needs {need_a} A and {need_y} Y ancillae, session holds {have_a} and {have_y}")]
    AncillaBudgetExceeded {
        need_a: u64,
        need_y: u64,
        have_a: u64,
        have_y: u64,
    },
    #[error("lattice of {cells} cells exceeds the desk-scale cap of {cap}; no tableau is simulated")]
    DeskScaleRequired { cells: u128, cap: usize },
    #[error("region of session {session} still has entanglement {entropy} with the lattice")]
    NotSevered { session: SessionId, entropy: usize },
    #[error(transparent)]
    Stabilizer(#[from] StabilizerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, MainframeError>;

impl MainframeError {
    /// Variant name, as scripts refer to it.
    pub fn kind(&self) -> &'static str {
        match self {
            MainframeError::NotReady => "NotReady",
            MainframeError::AlreadyBooted => "AlreadyBooted",
            MainframeError::InvalidLayout(_) => "InvalidLayout",
            MainframeError::UnknownSession(_) => "UnknownSession",
            MainframeError::InvalidState { .. } => "InvalidState",
            MainframeError::CapacityExceeded { .. } => "CapacityExceeded",
            MainframeError::UnknownHandle(_) => "UnknownHandle",
            MainframeError::NoCorridorAvailable { .. } => "NoCorridorAvailable",
            MainframeError::BudgetExhausted { .. } => "BudgetExhausted",
            MainframeError::OutOfRegion { .. } => "OutOfRegion",
            MainframeError::AncillaBudgetExceeded { .. } => "AncillaBudgetExceeded",
            MainframeError::DeskScaleRequired { .. } => "DeskScaleRequired",
            MainframeError::NotSevered { .. } => "NotSevered",
            MainframeError::Stabilizer(_) => "Stabilizer",
            MainframeError::Geometry(_) => "Geometry",
        }
    }
}


#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MainframeConfig {
    pub cost_model: ChipCostModel,
    pub total_ops: u128,
    pub seed: u64,
    /// Largest global lattice, in cells, that gets a tableau.
    pub simulation_cap: usize,
    pub demand: AncillaDemand,
    /// Draw preparation eigenvalues uniformly; otherwise all `+1`.
    pub random_eigenvalues: bool,
}

impl MainframeConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            cost_model: ChipCostModel::default(),
            total_ops: DEFAULT_TOTAL_OPS,
            seed,
            simulation_cap: DEFAULT_SIMULATION_CAP,
            demand: AncillaDemand::default(),
            random_eigenvalues: true,
        }
    }
}

const STREAM_PREPARE: u64 = 1;
const STREAM_MAINFRAME: u64 = 2;
const STREAM_RUN: u64 = 3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent seed for sub-stream `(stream, index)` of `seed`.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(stream)) ^ index)
}

/// Seed of the `run`-th measurement run of `session`. Trusted and secure runs
/// share it.
pub fn run_seed(seed: u64, session: SessionId, run: u64) -> u64 {
    derive_seed(seed, STREAM_RUN, splitmix64(session.0) ^ run)
}

/// Tableau of the whole lattice, with a Pauli frame holding the preparation
/// eigenvalues: the physical state is `prod_{frame[v]} Z_v |G>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeskLattice {
    pub graph: GraphAdjacency,
    pub tableau: StabilizerTableau,
    frame: Vec<bool>,
    rng: ChaCha8Rng,
}

impl DeskLattice {
    fn prepare(layout: &PartitionLayout, config: &MainframeConfig) -> Result<Self> {
        let graph = lattice_graph(layout.global, config.simulation_cap)?;
        let (tableau, frame) = if config.random_eigenvalues {
            let (t, rec) = prepare_with_random_eigenvalues(
                &graph,
                derive_seed(config.seed, STREAM_PREPARE, 0),
            );
            let flags = rec.negative_flags(graph.vertex_count());
            (t, flags)
        } else {
            (graph_state_tableau(&graph, None), vec![false; graph.vertex_count()])
        };
        Ok(Self {
            graph,
            tableau,
            frame,
            rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_MAINFRAME, 0)),
        })
    }

    /// Current eigenvalue signs, one per lattice generator.
    pub fn eigenvalues(&self) -> EigenvalueRecord {
        EigenvalueRecord::from_signs(self.frame.iter().map(|&n| Outcome::from_negative(n)))
    }

    pub fn qubits(&self, cells: &[CellCoord]) -> Result<Vec<usize>> {
        Ok(qubits_for(&self.graph, cells)?)
    }

    fn region_qubits(&self, region: &Region) -> Result<Vec<usize>> {
        self.qubits(&region.cells().collect::<Vec<_>>())
    }

    pub fn region_entropy(&self, region: &Region) -> Result<usize> {
        Ok(self.tableau.entanglement_entropy(&self.region_qubits(region)?)?)
    }

    pub fn interior_entropy(&self, region: &Region) -> Result<usize> {
        Ok(self
            .tableau
            .entanglement_entropy(&self.qubits(&region.interior_cells())?)?)
    }

    fn measure_z(&mut self, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            self.tableau.measure(q, PauliBasis::Z, &mut self.rng)?;
        }
        Ok(())
    }

    fn reset(&mut self, q: usize) -> Result<()> {
        self.tableau.reset_plus(q, &mut self.rng)?;
        self.frame[q] = false;
        Ok(())
    }

    /// Resets every region qubit and links it back to the lattice: to its
    /// region neighbors and to unmeasured outside neighbors not in `exclude`.
    fn restore(&mut self, region: &Region, exclude: &HashSet<usize>) -> Result<()> {
        let qubits = self.region_qubits(region)?;
        for &q in &qubits {
            self.reset(q)?;
        }
        let inside: HashSet<usize> = qubits.iter().copied().collect();
        for &v in &qubits {
            let neighbors: Vec<usize> = self.graph.neighbors(v).collect();
            for w in neighbors {
                let link = if inside.contains(&w) {
                    w > v
                } else {
                    !self.tableau.is_measured(w) && !exclude.contains(&w)
                };
                if link {
                    self.tableau.cz(v, w)?;
                }
            }
        }
        Ok(())
    }
}

/// Boundary cells Z-measured to sever a region, with the resulting interior
/// entanglement when a tableau is simulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeverPlan {
    pub session: SessionId,
    pub cells: Vec<CellCoord>,
    pub interior_entropy: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellLink {
    pub corridor: CorridorId,
    pub retained: (CellCoord, CellCoord),
    pub path_len: usize,
    /// Entanglement across each user/corridor cut.
    pub cut_entropy: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogoffOutcome {
    Closed,
    Persisted(PersistenceRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mainframe {
    config: MainframeConfig,
    ledger: Option<AllocationLedger>,
    budget: OperationsBudget,
    sessions: BTreeMap<SessionId, UserSession>,
    corridors: BTreeMap<CorridorId, Corridor>,
    devices: BTreeMap<SessionId, RoutedPartition>,
    desk: Option<DeskLattice>,
    log: EventLog,
    transitions: Vec<Transition>,
    layer: u64,
    next_session: u64,
    next_handle: u64,
    next_corridor: u64,
    next_region: u32,
    desk_charged: u128,
}

impl Mainframe {
    /// A mainframe with no layout; every session operation fails until
    /// [`Mainframe::boot`].
    pub fn new(config: MainframeConfig) -> Self {
        Self {
            config,
            ledger: None,
            budget: OperationsBudget::new(config.total_ops),
            sessions: BTreeMap::new(),
            corridors: BTreeMap::new(),
            devices: BTreeMap::new(),
            desk: None,
            log: EventLog::default(),
            transitions: Vec::new(),
            layer: 0,
            next_session: 0,
            next_handle: 0,
            next_corridor: 0,
            next_region: 0,
            desk_charged: 0,
        }
    }

    pub fn boot(&mut self, layout: PartitionLayout) -> Result<()> {
        if self.ledger.is_some() {
            return Err(MainframeError::AlreadyBooted);
        }
        let violations = validate_layout(&layout);
        if !violations.is_empty() {
            return Err(MainframeError::InvalidLayout(violations));
        }
        let cells = layout.global.cell_count();
        let desk = if cells <= self.config.simulation_cap as u128 {
            Some(DeskLattice::prepare(&layout, &self.config)?)
        } else {
            None
        };
        self.next_region = layout.regions.iter().map(|r| r.id.0 + 1).max().unwrap_or(0);
        let details = vec![
            ("global", layout.global.to_string()),
            ("users", layout.user_count().to_string()),
            ("desk", desk.is_some().to_string()),
        ];
        self.ledger = Some(AllocationLedger::new(layout, &self.config.cost_model.footprint()));
        self.desk = desk;
        self.emit("boot", None, 0, details);
        Ok(())
    }

    pub fn booted(config: MainframeConfig, layout: PartitionLayout) -> Result<Self> {
        let mut m = Self::new(config);
        m.boot(layout)?;
        Ok(m)
    }

    pub fn config(&self) -> &MainframeConfig {
        &self.config
    }

    pub fn ledger(&self) -> Option<&AllocationLedger> {
        self.ledger.as_ref()
    }

    pub fn layout(&self) -> Option<&PartitionLayout> {
        self.ledger.as_ref().map(AllocationLedger::layout)
    }

    pub fn budget(&self) -> &OperationsBudget {
        &self.budget
    }

    pub fn sessions(&self) -> &BTreeMap<SessionId, UserSession> {
        &self.sessions
    }

    pub fn session(&self, id: SessionId) -> Result<&UserSession> {
        self.sessions.get(&id).ok_or(MainframeError::UnknownSession(id))
    }

    pub fn corridors(&self) -> &BTreeMap<CorridorId, Corridor> {
        &self.corridors
    }

    pub fn desk(&self) -> Option<&DeskLattice> {
        self.desk.as_ref()
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn layer(&self) -> u64 {
        self.layer
    }

    pub fn resource_report(&self) -> Option<ResourceReport> {
        self.layout()
            .map(|l| mainframe_report(l, &self.config.cost_model, &self.budget))
    }

    pub fn scratch_report(&self) -> Option<ScratchFeasibility> {
        self.layout().map(|l| scratch_feasibility(l, &self.config.demand))
    }

    fn ledger_ref(&self) -> Result<&AllocationLedger> {
        self.ledger.as_ref().ok_or(MainframeError::NotReady)
    }

    fn require(&self, id: SessionId, allowed: &[SessionState], op: &'static str) -> Result<&UserSession> {
        self.ledger_ref()?;
        let s = self.session(id)?;
        if allowed.contains(&s.state) {
            Ok(s)
        } else {
            Err(MainframeError::InvalidState {
                session: id,
                state: s.state,
                op,
            })
        }
    }

    fn ensure_budget(&self, cells: u128) -> Result<()> {
        if self.budget.can_consume(cells) {
            Ok(())
        } else {
            Err(MainframeError::BudgetExhausted {
                requested: cells,
                remaining: self.budget.remaining(),
            })
        }
    }

    fn charge(&mut self, cells: u128) {
        self.budget
            .consume(cells)
            .expect("budget checked before mutation");
    }

    fn emit(
        &mut self,
        kind: &'static str,
        session: Option<SessionId>,
        cells: u128,
        details: Vec<(&'static str, String)>,
    ) {
        let seq = self.log.len() as u64;
        self.log.push(Event {
            layer: self.layer,
            seq,
            kind,
            session,
            cells,
            details,
        });
    }

    fn transition(&mut self, id: SessionId, to: SessionState) {
        let s = self.sessions.get_mut(&id).expect("session exists");
        let from = s.state;
        debug_assert!(from.can_transition_to(to), "{from} -> {to}");
        s.state = to;
        self.transitions.push(Transition { session: id, from, to });
    }

    fn fresh_region_id(&mut self) -> RegionId {
        let id = RegionId(self.next_region);
        self.next_region += 1;
        id
    }

    fn desk_cap_error(&self) -> MainframeError {
        MainframeError::DeskScaleRequired {
            cells: self.layout().map_or(0, |l| l.global.cell_count()),
            cap: self.config.simulation_cap,
        }
    }

    pub fn admit(&mut self, user_id: &str, mode: SessionMode, requested_logical: u64) -> Result<SessionId> {
        self.admit_with_ancillae(user_id, mode, requested_logical, AncillaBudget::default())
    }

    pub fn admit_with_ancillae(
        &mut self,
        user_id: &str,
        mode: SessionMode,
        requested_logical: u64,
        ancilla: AncillaBudget,
    ) -> Result<SessionId> {
        self.ledger_ref()?;
        let id = SessionId(self.next_session);
        self.next_session += 1;
        self.sessions.insert(
            id,
            UserSession {
                id,
                user_id: user_id.to_string(),
                mode,
                state: SessionState::Admitted,
                region: None,
                slots: Vec::new(),
                ancilla,
                ops_consumed: 0,
                requested_logical,
                stored_logical: None,
                runs: 0,
            },
        );
        self.emit(
            "admit",
            Some(id),
            0,
            vec![
                ("user", user_id.to_string()),
                ("mode", mode.as_str().to_string()),
                ("logical", requested_logical.to_string()),
            ],
        );
        Ok(id)
    }

    /// Binds the fewest contiguous free slots of one column that hold
    /// `requested_logical` qubits, lowest column then lowest index first.
    pub fn allocate(&mut self, id: SessionId, requested_logical: u64) -> Result<Region> {
        self.require(id, &[SessionState::Admitted], "allocate")?;
        let ledger = self.ledger_ref()?;
        let run = ledger
            .slots_needed(requested_logical)
            .and_then(|len| ledger.find_free_run(len).map(|start| (start, len)))
            .ok_or(MainframeError::CapacityExceeded {
                requested: requested_logical,
            })?;
        let (start, len) = run;
        let region_id = self.fresh_region_id();
        let ledger = self.ledger.as_mut().expect("checked");
        let region = ledger.span_region(start, len, region_id);
        let slots: Vec<SlotId> = (0..len)
            .map(|i| SlotId {
                column: start.column,
                index: start.index + i,
            })
            .collect();
        for &slot in &slots {
            ledger.set(slot, SlotState::Occupied(id));
        }
        let s = self.sessions.get_mut(&id).expect("exists");
        s.region = Some(region);
        s.slots = slots;
        s.requested_logical = requested_logical;
        self.transition(id, SessionState::Allocated);
        self.emit("allocate", Some(id), 0, region_details(&region, start, len));
        Ok(region)
    }

    /// Measures every boundary qubit of `region` in Z and checks that the
    /// interior is left disentangled; restores the tableau on failure.
    fn sever_on_desk(&mut self, id: SessionId, region: &Region, cells: &[CellCoord]) -> Result<Option<usize>> {
        let Some(desk) = self.desk.as_mut() else {
            return Ok(None);
        };
        let snapshot = desk.clone();
        let qubits = desk.qubits(cells)?;
        desk.measure_z(&qubits)?;
        let entropy = desk.interior_entropy(region)?;
        if entropy != 0 {
            *desk = snapshot;
            return Err(MainframeError::NotSevered { session: id, entropy });
        }
        Ok(Some(entropy))
    }

    /// Z-measures the boundary ring of the session's region on every layer.
    pub fn sever(&mut self, id: SessionId) -> Result<SeverPlan> {
        let s = self.require(id, &[SessionState::Allocated], "sever")?;
        let region = s.region.expect("allocated sessions hold a region");
        let cells = region_boundary_cells(&region);
        let cost = cells.len() as u128;
        self.ensure_budget(cost)?;
        let entropy = self.sever_on_desk(id, &region, &cells)?;
        self.charge(cost);
        if self.desk.is_some() {
            self.desk_charged += cost;
        }
        self.sessions.get_mut(&id).expect("exists").ops_consumed += cost;
        self.transition(id, SessionState::Severed);
        self.emit("sever", Some(id), cost, vec![("ring", boundary_ring(&region).len().to_string())]);
        Ok(SeverPlan {
            session: id,
            cells,
            interior_entropy: entropy,
        })
    }

    pub fn start(&mut self, id: SessionId) -> Result<()> {
        self.require(id, &[SessionState::Severed], "start")?;
        self.transition(id, SessionState::Running);
        self.emit("start", Some(id), 0, vec![]);
        Ok(())
    }

    /// Extends the session's region by whole depth-adjacent slots, preferring
    /// the slots above it. A running session's new region is severed again.
    pub fn grow(&mut self, id: SessionId, extra_logical: u64) -> Result<Region> {
        let s = self.require(id, &[SessionState::Running, SessionState::Allocated], "grow")?;
        let state = s.state;
        let first = *s.slots.first().expect("allocated sessions hold slots");
        let held = s.slots.len();
        let ledger = self.ledger_ref()?;
        let extra = ledger
            .slots_needed(extra_logical)
            .ok_or(MainframeError::CapacityExceeded {
                requested: extra_logical,
            })?;
        let total = held + extra;
        let below = first.index.checked_sub(extra).filter(|&i| {
            ledger.run_is_free(first.column, i, extra) && ledger.contiguous(first.column, i, total)
        });
        let above_free = ledger.run_is_free(first.column, first.index + held, extra)
            && ledger.contiguous(first.column, first.index, total);
        let start = match below {
            Some(i) => i,
            None if above_free => first.index,
            None => {
                return Err(MainframeError::CapacityExceeded {
                    requested: extra_logical,
                })
            }
        };
        let start = SlotId {
            column: first.column,
            index: start,
        };
        let old_region = self.sessions[&id].region.expect("held");
        let region = ledger.span_region(start, total, old_region.id);
        let ring = if state == SessionState::Running {
            region_boundary_cells(&region)
        } else {
            Vec::new()
        };
        let released = self.corridor_release_cost(id);
        let cost = ring.len() as u128 + released;
        self.ensure_budget(cost)?;

        let snapshot = self.clone();
        let result = (|| -> Result<()> {
            self.release_corridors(id)?;
            if state == SessionState::Running {
                self.sever_on_desk(id, &region, &ring)?;
            }
            Ok(())
        })();
        if let Err(e) = result {
            *self = snapshot;
            return Err(e);
        }
        let new_slots: Vec<SlotId> = (0..total)
            .map(|i| SlotId {
                column: start.column,
                index: start.index + i,
            })
            .collect();
        let ledger = self.ledger.as_mut().expect("checked");
        for &slot in &new_slots {
            ledger.set(slot, SlotState::Occupied(id));
        }
        self.charge(ring.len() as u128);
        if self.desk.is_some() {
            self.desk_charged += ring.len() as u128;
        }
        let s = self.sessions.get_mut(&id).expect("exists");
        s.region = Some(region);
        s.slots = new_slots;
        s.requested_logical = s.requested_logical.saturating_add(extra_logical);
        s.ops_consumed += ring.len() as u128;
        self.devices.remove(&id);
        self.transition(id, state);
        let mut details = region_details(&region, start, total);
        details.push(("extra_slots", extra.to_string()));
        self.emit("grow", Some(id), ring.len() as u128, details);
        Ok(region)
    }

    fn corridor_release_cost(&self, id: SessionId) -> u128 {
        2 * self.corridors.values().filter(|c| c.involves(id)).count() as u128
    }

    /// Z-measures both retained cells of every corridor of `id` and frees the
    /// corridor.
    fn release_corridors(&mut self, id: SessionId) -> Result<()> {
        let ids: Vec<CorridorId> = self
            .corridors
            .values()
            .filter(|c| c.involves(id))
            .map(|c| c.id)
            .collect();
        for cid in ids {
            let c = self.corridors.remove(&cid).expect("listed");
            if let Some(desk) = self.desk.as_mut() {
                let q = desk.qubits(&[c.retained.0, c.retained.1])?;
                desk.measure_z(&q)?;
                self.desk_charged += 2;
            }
            self.charge(2);
            self.emit(
                "corridor_release",
                Some(id),
                2,
                vec![("corridor", cid.to_string()), ("path", c.path.len().to_string())],
            );
        }
        Ok(())
    }

    /// Ends a session. Wiping measures and restores every region cell;
    /// persisting keeps the severed region under maintenance.
    pub fn logoff(&mut self, id: SessionId, persist: bool) -> Result<LogoffOutcome> {
        let s = self.require(id, &[SessionState::Running, SessionState::Severed], "logoff")?;
        let region = s.region.expect("held");
        let slots = s.slots.clone();
        let stored = s.stored_logical.unwrap_or(s.requested_logical);
        let wipe_cost = if persist { 0 } else { region.dims.cell_count() };
        let cost = wipe_cost + self.corridor_release_cost(id);
        self.ensure_budget(cost)?;

        let snapshot = self.clone();
        let result = (|| -> Result<()> {
            self.release_corridors(id)?;
            if !persist {
                let exclude = self.corridor_qubits()?;
                if let Some(desk) = self.desk.as_mut() {
                    desk.restore(&region, &exclude)?;
                    self.desk_charged += wipe_cost;
                }
            }
            Ok(())
        })();
        if let Err(e) = result {
            *self = snapshot;
            return Err(e);
        }
        self.charge(wipe_cost);
        self.devices.remove(&id);
        let ledger = self.ledger.as_mut().expect("checked");
        let outcome = if persist {
            let handle = PersistHandle(self.next_handle);
            self.next_handle += 1;
            for &slot in &slots {
                ledger.set(slot, SlotState::Persisted(handle));
            }
            let record = PersistenceRecord {
                handle,
                owner: id,
                region,
                slots,
                stored_logical: stored,
                maintenance_cost_per_layer: region.dims.area(),
                created_at_layer: self.layer,
            };
            ledger.persisted.insert(handle, record.clone());
            self.sessions.get_mut(&id).expect("exists").stored_logical = Some(stored);
            self.transition(id, SessionState::PersistedLogoff);
            self.emit("logoff", Some(id), 0, vec![("persist", handle.to_string())]);
            LogoffOutcome::Persisted(record)
        } else {
            for &slot in &slots {
                ledger.set(slot, SlotState::Free);
            }
            let s = self.sessions.get_mut(&id).expect("exists");
            s.region = None;
            s.slots.clear();
            s.ops_consumed += wipe_cost;
            self.transition(id, SessionState::Closed);
            self.emit("logoff", Some(id), wipe_cost, vec![("persist", "none".into())]);
            LogoffOutcome::Closed
        };
        Ok(outcome)
    }

    /// Binds a persisted region to `id`: either a freshly admitted session or
    /// the record's own owner logging back on.
    pub fn reattach(&mut self, handle: PersistHandle, id: SessionId) -> Result<Region> {
        self.ledger_ref()?;
        let record = self
            .ledger_ref()?
            .persisted
            .get(&handle)
            .cloned()
            .ok_or(MainframeError::UnknownHandle(handle))?;
        let s = self.session(id)?;
        let own = id == record.owner && s.state == SessionState::PersistedLogoff;
        if !own && s.state != SessionState::Admitted {
            return Err(MainframeError::InvalidState {
                session: id,
                state: s.state,
                op: "reattach",
            });
        }
        let ledger = self.ledger.as_mut().expect("checked");
        ledger.persisted.remove(&handle);
        for &slot in &record.slots {
            ledger.set(slot, SlotState::Occupied(id));
        }
        if !own {
            let old = self.sessions.get_mut(&record.owner).expect("owner exists");
            old.region = None;
            old.slots.clear();
            self.transition(record.owner, SessionState::Closed);
        }
        let s = self.sessions.get_mut(&id).expect("exists");
        s.region = Some(record.region);
        s.slots = record.slots.clone();
        s.stored_logical = Some(record.stored_logical);
        s.requested_logical = record.stored_logical;
        self.transition(id, SessionState::Allocated);
        self.emit(
            "reattach",
            Some(id),
            0,
            vec![("handle", handle.to_string()), ("from", record.owner.to_string())],
        );
        Ok(record.region)
    }

    /// Charges `layers` layers of identity measurements on every persisted
    /// region.
    pub fn advance_layers(&mut self, layers: u64) -> Result<u128> {
        let ledger = self.ledger_ref()?;
        let per_layer: u128 = ledger
            .persisted
            .values()
            .map(|r| r.maintenance_cost_per_layer)
            .sum();
        let records = ledger.persisted.len();
        let cost = per_layer * layers as u128;
        self.ensure_budget(cost)?;
        self.charge(cost);
        self.emit(
            "advance",
            None,
            cost,
            vec![("layers", layers.to_string()), ("persisted", records.to_string())],
        );
        self.layer += layers;
        Ok(cost)
    }

    fn corridor_qubits(&self) -> Result<HashSet<usize>> {
        let Some(desk) = self.desk.as_ref() else {
            return Ok(HashSet::new());
        };
        let mut cells = Vec::new();
        for c in self.corridors.values() {
            cells.extend_from_slice(&c.path);
            cells.push(c.retained.0);
            cells.push(c.retained.1);
        }
        Ok(desk.qubits(&cells)?.into_iter().collect())
    }

    /// Routes a one-cell-wide corridor through scratch between two running
    /// sessions and links one boundary cell of each region to it.
    pub fn bell_broker(&mut self, a: SessionId, b: SessionId) -> Result<BellLink> {
        let sa = self.require(a, &[SessionState::Running], "bell")?;
        let ra = sa.region.expect("held");
        let sb = self.require(b, &[SessionState::Running], "bell")?;
        let rb = sb.region.expect("held");
        if a == b {
            return Err(MainframeError::InvalidState {
                session: b,
                state: SessionState::Running,
                op: "bell",
            });
        }
        let taken: HashSet<(u64, u64)> = self
            .corridors
            .values()
            .flat_map(|c| c.path.iter().map(|p| (p.x, p.y)))
            .collect();
        let plan = corridor::plan_path(self.ledger_ref()?.layout(), &ra, &rb, &taken)
            .ok_or(MainframeError::NoCorridorAvailable { a, b })?;
        let cost = plan.path.len() as u128 + 2;
        self.ensure_budget(cost)?;

        let snapshot = self.clone();
        let result = self.link_on_desk(&plan, &ra, &rb);
        let cut_entropy = match result {
            Ok(e) => e,
            Err(e) => {
                *self = snapshot;
                return Err(e);
            }
        };
        self.charge(cost);
        if self.desk.is_some() {
            self.desk_charged += cost;
        }
        let id = CorridorId(self.next_corridor);
        self.next_corridor += 1;
        let seg_id = self.next_region;
        let segments = corridor::segments(&plan.path, seg_id);
        self.next_region += segments.len() as u32;
        self.corridors.insert(
            id,
            Corridor {
                id,
                sessions: (a, b),
                retained: plan.retained,
                path: plan.path.clone(),
                segments,
            },
        );
        self.devices.remove(&a);
        self.devices.remove(&b);
        let mut details = vec![
            ("corridor", id.to_string()),
            ("peer", b.to_string()),
            ("path", plan.path.len().to_string()),
        ];
        if let Some((ea, eb)) = cut_entropy {
            details.push(("cut_a", ea.to_string()));
            details.push(("cut_b", eb.to_string()));
        }
        self.emit("bell", Some(a), cost, details);
        Ok(BellLink {
            corridor: id,
            retained: plan.retained,
            path_len: plan.path.len(),
            cut_entropy,
        })
    }

    fn link_on_desk(
        &mut self,
        plan: &corridor::PlannedPath,
        ra: &Region,
        rb: &Region,
    ) -> Result<Option<(usize, usize)>> {
        let Some(desk) = self.desk.as_mut() else {
            return Ok(None);
        };
        let mut chain = vec![plan.retained.0];
        chain.extend_from_slice(&plan.path);
        chain.push(plan.retained.1);
        let qubits = desk.qubits(&chain)?;
        for &q in &qubits {
            desk.reset(q)?;
        }
        for pair in qubits.windows(2) {
            desk.tableau.cz(pair[0], pair[1])?;
        }
        for (cell, region) in [(plan.retained.0, ra), (plan.retained.1, rb)] {
            let interior: BTreeSet<CellCoord> = region.interior_cells().into_iter().collect();
            let v = desk.qubits(&[cell])?[0];
            let inward: Vec<usize> = desk
                .graph
                .neighbors(v)
                .filter(|&w| desk.graph.coord(w).is_some_and(|c| interior.contains(&c)))
                .collect();
            for w in inward {
                desk.tableau.cz(v, w)?;
            }
        }
        Ok(Some((desk.region_entropy(ra)?, desk.region_entropy(rb)?)))
    }

    pub fn stream_descriptor(&self, id: SessionId) -> Result<PhotonStreamDescriptor> {
        let s = self.session(id)?;
        match (s.state.holds_region(), s.region) {
            (true, Some(region)) => Ok(PhotonStreamDescriptor::for_region(&region)),
            _ => Err(MainframeError::InvalidState {
                session: id,
                state: s.state,
                op: "descriptor",
            }),
        }
    }

    /// Entanglement between the session's whole region and the rest of the
    /// lattice, when a tableau is simulated.
    pub fn region_entropy(&self, id: SessionId) -> Result<Option<usize>> {
        let s = self.session(id)?;
        let region = s.region.ok_or(MainframeError::InvalidState {
            session: id,
            state: s.state,
            op: "entropy",
        })?;
        self.desk.as_ref().map(|d| d.region_entropy(&region)).transpose()
    }

    fn validate_stream(
        &self,
        id: SessionId,
        mode: SessionMode,
        instructions: &[MeasurementInstruction],
    ) -> Result<(Region, u64, u64)> {
        let s = self.require(id, &[SessionState::Running], "run")?;
        if s.mode != mode {
            return Err(MainframeError::InvalidState {
                session: id,
                state: s.state,
                op: if mode == SessionMode::Trusted { "trusted run" } else { "secure run" },
            });
        }
        if self.desk.is_none() {
            return Err(self.desk_cap_error());
        }
        let region = s.region.expect("held");
        if let Some((index, ins)) = instructions
            .iter()
            .enumerate()
            .find(|(_, i)| !region.contains(i.cell))
        {
            return Err(MainframeError::OutOfRegion { index, cell: ins.cell });
        }
        let need_a = instructions.iter().filter(|i| i.basis == PauliBasis::AncillaA).count() as u64;
        let need_y = instructions.iter().filter(|i| i.basis == PauliBasis::AncillaY).count() as u64;
        if need_a > s.ancilla.a || need_y > s.ancilla.y {
            return Err(MainframeError::AncillaBudgetExceeded {
                need_a,
                need_y,
                have_a: s.ancilla.a,
                have_y: s.ancilla.y,
            });
        }
        self.ensure_budget(instructions.len() as u128)?;
        Ok((region, need_a, need_y))
    }

    fn finish_run(&mut self, id: SessionId, kind: &'static str, n: usize, need_a: u64, need_y: u64) {
        self.charge(n as u128);
        let s = self.sessions.get_mut(&id).expect("exists");
        s.ancilla.a -= need_a;
        s.ancilla.y -= need_y;
        s.ops_consumed += n as u128;
        let run = s.runs;
        s.runs += 1;
        self.emit(
            kind,
            Some(id),
            n as u128,
            vec![
                ("run", run.to_string()),
                ("a", need_a.to_string()),
                ("y", need_y.to_string()),
            ],
        );
    }

    /// Measures a trusted user's stream on the mainframe's own lattice and
    /// returns only the outcomes, sign-corrected against the preparation
    /// eigenvalues.
    pub fn run_trusted(&mut self, id: SessionId, instructions: &[MeasurementInstruction]) -> Result<Vec<Outcome>> {
        let (_, need_a, need_y) = self.validate_stream(id, SessionMode::Trusted, instructions)?;
        let run = self.sessions[&id].runs;
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed(self.config.seed, id, run));
        let desk = self.desk.as_mut().expect("validated");
        let cells: Vec<CellCoord> = instructions.iter().map(|i| i.cell).collect();
        let qubits = desk.qubits(&cells)?;
        let mut outcomes = Vec::with_capacity(instructions.len());
        for (ins, q) in instructions.iter().zip(qubits) {
            let frame = desk.frame[q];
            let (_, corrected) = desk.tableau.measure_in_frame(q, ins.basis, frame, &mut rng)?;
            outcomes.push(corrected);
        }
        self.desk_charged += instructions.len() as u128;
        self.finish_run(id, "run", instructions.len(), need_a, need_y);
        Ok(outcomes)
    }

    /// The partition a secure session holds, routing it on first use. The
    /// region must be severed.
    pub fn route_partition(&mut self, id: SessionId) -> Result<&RoutedPartition> {
        let s = self.require(id, &[SessionState::Severed, SessionState::Running], "route")?;
        if s.mode != SessionMode::SecureQuantum {
            return Err(MainframeError::InvalidState {
                session: id,
                state: s.state,
                op: "route",
            });
        }
        let region = s.region.expect("held");
        if !self.devices.contains_key(&id) {
            let desk = self.desk.as_ref().ok_or_else(|| self.desk_cap_error())?;
            let entropy = desk.region_entropy(&region)?;
            if entropy != 0 {
                return Err(MainframeError::NotSevered { session: id, entropy });
            }
            let partition = RoutedPartition::new(region, desk.tableau.clone(), &desk.graph, &desk.frame)?;
            let descriptor = partition.descriptor.clone();
            self.devices.insert(id, partition);
            self.emit(
                "route",
                Some(id),
                0,
                vec![(
                    "descriptor",
                    format!(
                        "{},{},{},{},{}",
                        descriptor.origin_x,
                        descriptor.origin_y,
                        descriptor.width,
                        descriptor.depth,
                        descriptor.layers
                    ),
                )],
            );
        }
        Ok(&self.devices[&id])
    }

    /// Runs a secure user's stream on the routed partition they hold. The
    /// mainframe only debits the budgets.
    pub fn run_secure(&mut self, id: SessionId, instructions: &[MeasurementInstruction]) -> Result<Vec<Outcome>> {
        self.validate_stream(id, SessionMode::SecureQuantum, instructions)?;
        let snapshot = if self.devices.contains_key(&id) {
            None
        } else {
            Some(self.clone())
        };
        self.route_partition(id)?;
        let (_, need_a, need_y) = match self.validate_stream(id, SessionMode::SecureQuantum, instructions) {
            Ok(v) => v,
            Err(e) => {
                if let Some(s) = snapshot {
                    *self = s;
                }
                return Err(e);
            }
        };
        let run = self.sessions[&id].runs;
        let mut rng = ChaCha8Rng::seed_from_u64(run_seed(self.config.seed, id, run));
        let device = self.devices.get_mut(&id).expect("routed");
        let record = device.record.clone();
        let outcomes = run_secure_with_record(device, &record, instructions, &mut rng)?;
        self.finish_run(id, "secure_run", instructions.len(), need_a, need_y);
        Ok(outcomes)
    }

    /// Every ledger, lifecycle and accounting invariant that fails, as text.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let Some(ledger) = self.ledger.as_ref() else {
            if !self.sessions.is_empty() {
                bad.push("sessions exist without a layout".into());
            }
            return bad;
        };
        let c = ledger.counts();
        if c.free + c.occupied + c.persisted != ledger.total_slots() {
            bad.push(format!("slot counts {c:?} do not sum to {}", ledger.total_slots()));
        }
        for (slot, state) in ledger.slot_states() {
            match state {
                SlotState::Free => {}
                SlotState::Occupied(sid) => match self.sessions.get(&sid) {
                    Some(s) if s.slots.contains(&slot) && s.state.holds_region() && s.state != SessionState::PersistedLogoff => {}
                    _ => bad.push(format!("slot {slot} occupied by {sid} which does not hold it")),
                },
                SlotState::Persisted(h) => match ledger.persisted.get(&h) {
                    Some(r) if r.slots.contains(&slot) => {}
                    _ => bad.push(format!("slot {slot} persisted under unknown handle {h}")),
                },
            }
        }
        for r in ledger.persisted.values() {
            match self.sessions.get(&r.owner) {
                Some(s) if s.state == SessionState::PersistedLogoff => {}
                _ => bad.push(format!("handle {} owner {} is not persisted", r.handle, r.owner)),
            }
            for &slot in &r.slots {
                if ledger.state(slot) != Some(SlotState::Persisted(r.handle)) {
                    bad.push(format!("handle {} lost slot {slot}", r.handle));
                }
            }
        }
        for s in self.sessions.values() {
            if s.state.holds_region() != s.region.is_some() {
                bad.push(format!("session {} in state {} has region {:?}", s.id, s.state, s.region));
            }
            if s.state.holds_region() == s.slots.is_empty() {
                bad.push(format!("session {} in state {} holds {} slots", s.id, s.state, s.slots.len()));
            }
            let expected = match s.state {
                SessionState::PersistedLogoff => None,
                _ => Some(SlotState::Occupied(s.id)),
            };
            for &slot in &s.slots {
                let actual = ledger.state(slot);
                let ok = match expected {
                    Some(e) => actual == Some(e),
                    None => matches!(actual, Some(SlotState::Persisted(_))),
                };
                if !ok {
                    bad.push(format!("session {} slot {slot} is {actual:?}", s.id));
                }
            }
        }
        for t in &self.transitions {
            if !t.from.can_transition_to(t.to) {
                bad.push(format!("illegal transition {} -> {} on {}", t.from, t.to, t.session));
            }
        }
        for c in self.corridors.values() {
            for sid in [c.sessions.0, c.sessions.1] {
                if self.sessions.get(&sid).map(|s| s.state) != Some(SessionState::Running) {
                    bad.push(format!("corridor {} joins non-running {sid}", c.id));
                }
            }
        }
        let logged: u128 = self.log.events().iter().map(|e| e.cells).sum();
        if logged != self.budget.consumed() {
            bad.push(format!("budget consumed {} but log sums to {logged}", self.budget.consumed()));
        }
        if let Some(desk) = &self.desk {
            if desk.tableau.record().len() as u128 != self.desk_charged {
                bad.push(format!(
                    "tableau measured {} cells but {} were charged",
                    desk.tableau.record().len(),
                    self.desk_charged
                ));
            }
        }
        bad
    }
}

fn region_details(region: &Region, start: SlotId, len: usize) -> Vec<(&'static str, String)> {
    vec![
        ("x", region.origin.x.to_string()),
        ("y", region.origin.y.to_string()),
        ("w", region.dims.width().to_string()),
        ("d", region.dims.depth().to_string()),
        ("slots", format!("{start}+{len}")),
    ]
}

#[cfg(test)]
mod tests;
