//! Property suites run by `hpqc verify`.
//!
//! Each check reports how many cases it ran and how many failed. A trial
//! count of zero runs nothing and passes vacuously with a warning.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocator::{
    cross_sum_cells, derive_seed, AncillaBudget, Mainframe, MainframeConfig, MainframeError,
    PersistHandle, SessionId, SessionMode, SessionState,
};
use crate::geometry::{
    build_layout, CellCoord, LatticeDims, LogicalFootprint, Region, RegionId,
    RegionKind,
};
use crate::protocol::{
    decode_stream, encode_stream, eve_tap, prepare_with_random_eigenvalues, EigenvalueRecord,
    EveModel, MeasurementInstruction, PhotonStreamDescriptor,
};
use crate::resources::{ChipCostModel, OperationsBudget, DEFAULT_TOTAL_OPS};
use crate::stabilizer::{
    cut_rank, graph_state_tableau, interior_and_exterior, lattice_graph, measure_region_boundary,
    qubits_for, region_boundary_cells, z_measurement_corrections, GraphAdjacency, Outcome, Pauli,
    PauliBasis, PauliString, Statevector, ORACLE_CAP,
};

const TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Allocator,
    Protocol,
    Stabilizer,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Allocator, Suite::Protocol, Suite::Stabilizer];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Allocator => "allocator",
            Suite::Protocol => "protocol",
            Suite::Stabilizer => "stabilizer",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    /// First failure, if any.
    pub detail: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: 0,
            detail: None,
        }
    }

    fn case(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.detail.is_none() {
                self.detail = Some(detail());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub trials: u64,
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().flat_map(|s| &s.checks).all(CheckResult::passed)
    }

    pub fn text(&self) -> String {
        let mut o = String::new();
        for w in &self.warnings {
            let _ = writeln!(o, "warning: {w}");
        }
        for s in &self.suites {
            let _ = writeln!(o, "suite {}", s.suite);
            for c in &s.checks {
                let _ = writeln!(
                    o,
                    "  {:<4} {:<24} cases={} failures={}",
                    if c.passed() { "PASS" } else { "FAIL" },
                    c.name,
                    c.cases,
                    c.failures
                );
                if let Some(d) = &c.detail {
                    let _ = writeln!(o, "       {d}");
                }
            }
        }
        let _ = writeln!(
            o,
            "verify {} (trials {}, seed {})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.trials,
            self.seed
        );
        o
    }
}

/// Runs `suites` in parallel; results come back ordered by suite name.
pub fn run_verify(suites: &[Suite], trials: u64, seed: u64) -> VerifyReport {
    let mut wanted: Vec<Suite> = suites.to_vec();
    wanted.sort();
    wanted.dedup();
    let mut warnings = Vec::new();
    if trials == 0 {
        warnings.push("trials is 0: no cases were run and every suite passes vacuously".into());
        return VerifyReport {
            trials,
            seed,
            suites: wanted
                .into_iter()
                .map(|suite| SuiteResult {
                    suite,
                    checks: Vec::new(),
                })
                .collect(),
            warnings,
        };
    }
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = wanted
            .iter()
            .map(|&suite| scope.spawn(move || run_suite(suite, trials, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect()
    });
    VerifyReport {
        trials,
        seed,
        suites: results,
        warnings,
    }
}

pub fn run_suite(suite: Suite, trials: u64, seed: u64) -> SuiteResult {
    let checks = match suite {
        Suite::Stabilizer => vec![
            oracle_equivalence(trials, seed),
            cut_rank_identity(trials * 3, seed),
            z_deletion(trials, seed),
            severing(seed),
            retained_link(seed),
        ],
        Suite::Allocator => {
            let events = trials * 50;
            vec![
                ledger_fuzz(events, seed),
                fuzz_replay(events.min(2000), seed),
                model_check(6),
                budget_boundary(),
            ]
        }
        Suite::Protocol => vec![
            codec_roundtrip(trials * 5, seed),
            descriptor_purity(trials / 4 + 1, seed),
            cross_mode(trials / 4 + 1, seed),
            eigenvalue_statistics(trials, seed),
            eve_no_signaling(trials * 10, seed),
        ],
    };
    SuiteResult { suite, checks }
}

fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x7e57 + stream, index))
}

fn pauli_expectation(sv: &Statevector, p: &PauliString) -> f64 {
    let mut image = sv.clone();
    for q in 0..p.len() {
        if let Some(pauli) = p.get(q) {
            image.apply(q, pauli);
        }
    }
    let overlap: f64 = sv
        .amplitudes()
        .iter()
        .zip(image.amplitudes())
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    if p.negative {
        -overlap
    } else {
        overlap
    }
}

/// Random graphs of up to 10 vertices with random signs and random
/// measurement sequences, replayed against the state-vector oracle.
pub fn oracle_equivalence(trials: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("oracle_equivalence");
    for t in 0..trials {
        let mut rng = rng_for(seed, 1, t);
        let n = rng.random_range(1..=10);
        let p = rng.random_range(0.2..0.8);
        let g = GraphAdjacency::random(n, p, &mut rng);
        let signs: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let mut tab = graph_state_tableau(&g, Some(&signs));
        let mut sv = Statevector::graph_state(&g, Some(&signs), ORACLE_CAP).expect("n <= 10");
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order.truncate(rng.random_range(1..=n));
        let mut ok = true;
        let mut why = String::new();
        for &q in &order {
            let basis = PauliBasis::ALL[rng.random_range(0..PauliBasis::ALL.len())];
            let pauli = basis.stand_in();
            let predicted = tab.expectation(q, pauli).expect("valid qubit");
            let event = tab.measure(q, basis, &mut rng).expect("unmeasured qubit");
            let prob = sv.probability(q, pauli, event.outcome);
            let good = match predicted {
                Some(o) => o == event.outcome && event.deterministic && (prob - 1.0).abs() <= TOL,
                None => !event.deterministic && (prob - 0.5).abs() <= TOL,
            };
            if !good && ok {
                ok = false;
                why = format!(
                    "trial {t}: qubit {q} {basis:?} outcome {} predicted {predicted:?} oracle p={prob}",
                    event.outcome
                );
            }
            sv.project(q, pauli, event.outcome);
        }
        if ok {
            if let Err(e) = tab.check_invariants() {
                ok = false;
                why = format!("trial {t}: tableau invariant: {e}");
            }
        }
        if ok {
            for (i, s) in tab.stabilizers().iter().enumerate() {
                let e = pauli_expectation(&sv, s);
                if (e - 1.0).abs() > TOL {
                    ok = false;
                    why = format!("trial {t}: stabilizer {i} has oracle expectation {e}");
                    break;
                }
            }
        }
        check.case(ok, || why);
    }
    check
}

/// Entanglement entropy of random graph states against the cut rank of the
/// adjacency matrix, and against the oracle's purity where it fits.
pub fn cut_rank_identity(pairs: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("cut_rank_identity");
    for t in 0..pairs {
        let mut rng = rng_for(seed, 2, t);
        let n = rng.random_range(2..=12);
        let g = GraphAdjacency::random(n, rng.random_range(0.1..0.9), &mut rng);
        let subset: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let tab = graph_state_tableau(&g, None);
        let s = tab.entanglement_entropy(&subset).expect("valid subset");
        let r = cut_rank(&g, &subset);
        let oracle = (n <= 10).then(|| {
            Statevector::graph_state(&g, None, ORACLE_CAP)
                .expect("n <= 10")
                .stabilizer_entropy(&subset)
        });
        check.case(s == r && oracle.is_none_or(|o| o == s), || {
            format!("pair {t}: n={n} subset={subset:?} entropy={s} cut_rank={r} oracle={oracle:?}")
        });
    }
    check
}

/// Z-measuring a vertex and undoing the by-product leaves the graph state of
/// the graph with that vertex deleted, times a Z eigenstate.
pub fn z_deletion(trials: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("z_deletion");
    for t in 0..trials {
        let mut rng = rng_for(seed, 3, t);
        let n = rng.random_range(1..=10);
        let g = GraphAdjacency::random(n, rng.random_range(0.2..0.8), &mut rng);
        let v = rng.random_range(0..n);
        let mut tab = graph_state_tableau(&g, None);
        let outcome = tab.measure(v, PauliBasis::Z, &mut rng).expect("fresh").outcome;
        for u in z_measurement_corrections(&g, v, outcome) {
            tab.apply_pauli(u, Pauli::Z).expect("valid");
        }
        let mut deleted = g.clone();
        deleted.isolate(v);
        let mut want = graph_state_tableau(&deleted, None);
        want.h(v).expect("valid");
        if outcome.is_minus() {
            want.apply_pauli(v, Pauli::X).expect("valid");
        }
        check.case(tab.canonical_form() == want.canonical_form(), || {
            format!("trial {t}: n={n} v={v} outcome={outcome}")
        });
    }
    check
}

/// Every sub-region, spanning all layers, of the lattice with at least one
/// interior cell.
pub fn sub_regions(dims: LatticeDims) -> Vec<Region> {
    let mut out = Vec::new();
    for w in 3..=dims.width() {
        for d in 3..=dims.depth() {
            for x in 0..=dims.width() - w {
                for y in 0..=dims.depth() - d {
                    out.push(Region::new(
                        RegionId(out.len() as u32),
                        RegionKind::UserPartition,
                        CellCoord::new(x, y, 0),
                        LatticeDims::new(w, d, dims.layers()).expect("positive"),
                    ));
                }
            }
        }
    }
    out
}

/// Boundary Z measurement leaves the interior of every sub-region of the
/// 4x4x1 and 3x3x2 lattices unentangled with the exterior.
pub fn severing(seed: u64) -> CheckResult {
    let mut check = CheckResult::new("severing");
    for (k, (w, d, l)) in [(4, 4, 1), (3, 3, 2)].into_iter().enumerate() {
        let dims = LatticeDims::new(w, d, l).expect("positive");
        let g = lattice_graph(dims, 4096).expect("small");
        for (i, region) in sub_regions(dims).into_iter().enumerate() {
            let mut rng = rng_for(seed, 4, (k * 1000 + i) as u64);
            let (mut tab, _) = prepare_with_random_eigenvalues(&g, rng.random());
            let before = {
                let (interior, _) = interior_and_exterior(&region, &g).expect("in lattice");
                tab.entanglement_entropy(&interior).expect("valid")
            };
            measure_region_boundary(&mut tab, &region, &g, &mut rng).expect("fresh ring");
            let (interior, exterior) = interior_and_exterior(&region, &g).expect("in lattice");
            let s = tab.entanglement_entropy(&interior).expect("valid");
            check.case(s == 0 && tab.check_invariants().is_ok(), || {
                format!(
                    "{w}x{d}x{l} region at ({},{}) {}x{}: entropy {s} (was {before}), exterior {} qubits",
                    region.origin.x,
                    region.origin.y,
                    region.dims.width(),
                    region.dims.depth(),
                    exterior.len()
                )
            });
        }
    }
    check
}

/// Leaving one ring cell with an outside neighbour unmeasured keeps at least
/// one bit of entanglement across the cut.
pub fn retained_link(seed: u64) -> CheckResult {
    let mut check = CheckResult::new("retained_link");
    for (k, (w, d, l)) in [(4, 4, 1), (3, 3, 2), (5, 4, 1)].into_iter().enumerate() {
        let dims = LatticeDims::new(w, d, l).expect("positive");
        let g = lattice_graph(dims, 4096).expect("small");
        for (i, region) in sub_regions(dims).into_iter().enumerate() {
            let ring = region_boundary_cells(&region);
            let (interior, exterior) = interior_and_exterior(&region, &g).expect("in lattice");
            for (j, &keep) in ring.iter().enumerate() {
                let kq = g.vertex_at(keep).expect("in lattice");
                if !g.neighbors(kq).any(|u| exterior.contains(&u)) {
                    continue;
                }
                let mut rng = rng_for(seed, 5, ((k * 1000 + i) * 1000 + j) as u64);
                let (mut tab, _) = prepare_with_random_eigenvalues(&g, rng.random());
                let others: Vec<CellCoord> = ring.iter().copied().filter(|&c| c != keep).collect();
                for q in qubits_for(&g, &others).expect("in lattice") {
                    tab.measure(q, PauliBasis::Z, &mut rng).expect("fresh");
                }
                let mut side = interior.clone();
                side.push(kq);
                let s = tab.entanglement_entropy(&side).expect("valid");
                check.case(s >= 1, || {
                    format!("{w}x{d}x{l} region {i} keeping {keep}: entropy {s}")
                });
            }
        }
    }
    check
}

/// A mainframe small enough to simulate: one logical qubit per cell.
pub fn desk_config(seed: u64) -> MainframeConfig {
    MainframeConfig {
        cost_model: ChipCostModel::new(1, LogicalFootprint::new(1, 1).expect("1x1"))
            .expect("positive"),
        ..MainframeConfig::new(seed)
    }
}

pub fn desk_mainframe(
    seed: u64,
    region: LatticeDims,
    users_per_column: u64,
) -> Result<Mainframe, MainframeError> {
    let layout = build_layout(2 * users_per_column, region, 1, users_per_column)?;
    Mainframe::booted(desk_config(seed), layout)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Fingerprint {
    log: usize,
    consumed: u128,
    sessions: Vec<(SessionId, SessionState, Option<Region>)>,
    slots: crate::allocator::SlotCounts,
    corridors: usize,
    layer: u64,
}

fn fingerprint(m: &Mainframe) -> Fingerprint {
    Fingerprint {
        log: m.log().len(),
        consumed: m.budget().consumed(),
        sessions: m.sessions().values().map(|s| (s.id, s.state, s.region)).collect(),
        slots: m.ledger().map(|l| l.counts()).unwrap_or_default(),
        corridors: m.corridors().len(),
        layer: m.layer(),
    }
}

fn random_stream<R: Rng + ?Sized>(region: &Region, max: usize, rng: &mut R) -> Vec<MeasurementInstruction> {
    let mut cells: Vec<CellCoord> = region.cells().collect();
    cells.shuffle(rng);
    cells.truncate(rng.random_range(0..=max.min(cells.len())));
    cells
        .into_iter()
        .map(|c| {
            MeasurementInstruction::new(c, [PauliBasis::X, PauliBasis::Y, PauliBasis::Z][rng.random_range(0..3)])
        })
        .collect()
}

/// Outcome of one fuzz run: its check result and the final log digest.
fn fuzz(events: u64, seed: u64, name: &'static str) -> (CheckResult, String) {
    let mut check = CheckResult::new(name);
    let mut rng = rng_for(seed, 6, 0);
    let region = LatticeDims::new(3, 3, 1).expect("positive");
    let mut m = desk_mainframe(seed, region, 4).expect("valid layout");
    let mut ids: Vec<SessionId> = Vec::new();
    let mut handles: Vec<PersistHandle> = Vec::new();
    let mut last_transition = 0;
    for e in 0..events {
        let live: Vec<(SessionId, SessionState)> = m
            .sessions()
            .values()
            .filter(|s| s.state != SessionState::Closed)
            .map(|s| (s.id, s.state))
            .collect();
        let pick = |rng: &mut ChaCha8Rng, wanted: &[SessionState]| -> SessionId {
            let fits: Vec<SessionId> = live
                .iter()
                .filter(|(_, st)| wanted.contains(st))
                .map(|(id, _)| *id)
                .collect();
            if !fits.is_empty() && rng.random_bool(0.8) {
                fits[rng.random_range(0..fits.len())]
            } else if !live.is_empty() && rng.random_bool(0.9) {
                live[rng.random_range(0..live.len())].0
            } else {
                SessionId(rng.random_range(0..=ids.len() as u64))
            }
        };
        let before = fingerprint(&m);
        const MIX: [u8; 14] = [0, 0, 1, 1, 1, 2, 3, 4, 5, 5, 6, 7, 8, 9];
        let op = MIX[rng.random_range(0..MIX.len())];
        let (label, result): (&str, Result<(), MainframeError>) = match op {
            0 => {
                let mode = if rng.random() { SessionMode::Trusted } else { SessionMode::SecureQuantum };
                let ancilla = AncillaBudget { a: rng.random_range(0..3), y: rng.random_range(0..3) };
                let waiting = live.iter().filter(|(_, st)| *st == SessionState::Admitted).count();
                let r = if waiting < 3 {
                    m.admit_with_ancillae("fuzz", mode, rng.random_range(0..20), ancilla)
                        .map(|id| ids.push(id))
                } else {
                    Ok(())
                };
                ("admit", r)
            }
            1 => {
                let id = pick(&mut rng, &[SessionState::Admitted]);
                ("allocate", m.allocate(id, [0, 1, 5, 9, 10, 18, 30][rng.random_range(0..7)]).map(drop))
            }
            2 => {
                let id = pick(&mut rng, &[SessionState::Allocated]);
                let r = m.sever(id).map(drop);
                if r.is_ok() {
                    let s = m.region_entropy(id);
                    check.case(matches!(s, Ok(Some(0))), || {
                        format!("event {e}: severed {id} has entropy {s:?}")
                    });
                }
                ("sever", r)
            }
            3 => {
                let id = pick(&mut rng, &[SessionState::Severed]);
                ("start", m.start(id))
            }
            4 => {
                let id = pick(&mut rng, &[SessionState::Allocated, SessionState::Running]);
                ("grow", m.grow(id, rng.random_range(0..=12)).map(drop))
            }
            5 => {
                let id = pick(
                    &mut rng,
                    &[SessionState::Severed, SessionState::Running, SessionState::PersistedLogoff],
                );
                let persist = rng.random();
                let r = m.logoff(id, persist).map(|o| {
                    if let crate::allocator::LogoffOutcome::Persisted(rec) = o {
                        handles.push(rec.handle);
                    }
                });
                ("logoff", r)
            }
            6 => {
                let id = pick(&mut rng, &[SessionState::Admitted, SessionState::PersistedLogoff]);
                let stored: Vec<PersistHandle> =
                    m.ledger().map_or_else(Vec::new, |l| l.persisted().keys().copied().collect());
                let h = if stored.is_empty() || rng.random_bool(0.1) {
                    PersistHandle(rng.random_range(0..=handles.len() as u64))
                } else {
                    stored[rng.random_range(0..stored.len())]
                };
                ("reattach", m.reattach(h, id).map(drop))
            }
            7 => ("advance", m.advance_layers(rng.random_range(0..3)).map(drop)),
            8 => {
                let wanted = [SessionState::Running];
                let (a, b) = (pick(&mut rng, &wanted), pick(&mut rng, &wanted));
                ("bell", m.bell_broker(a, b).map(drop))
            }
            _ => {
                let id = pick(&mut rng, &[SessionState::Running]);
                let stream = match m.session(id).ok().and_then(|s| s.region) {
                    Some(r) => random_stream(&r, 4, &mut rng),
                    None => vec![MeasurementInstruction::new(CellCoord::new(0, 0, 0), PauliBasis::X)],
                };
                let r = match m.session(id).map(|s| s.mode) {
                    Ok(SessionMode::SecureQuantum) => m.run_secure(id, &stream).map(drop),
                    _ => m.run_trusted(id, &stream).map(drop),
                };
                ("run", r)
            }
        };
        if result.is_err() {
            let after = fingerprint(&m);
            check.case(after == before, || {
                format!("event {e} ({label}) failed with {:?} but changed the mainframe", result.err())
            });
        }
        let bad = m.check_invariants();
        check.case(bad.is_empty(), || format!("event {e} ({label}): {}", bad.join("; ")));
        for tr in &m.transitions()[last_transition..] {
            check.case(tr.from.can_transition_to(tr.to), || {
                format!("event {e}: illegal transition {} {} -> {}", tr.session, tr.from, tr.to)
            });
        }
        last_transition = m.transitions().len();
    }
    let cross = cross_sum_cells(&m.log().to_text());
    check.case(cross == Some(m.budget().consumed()), || {
        format!("log cross-sum {cross:?} != consumed {}", m.budget().consumed())
    });
    (check, m.log().digest())
}

/// Random session-lifecycle events on a desk mainframe. Every step keeps the
/// ledger invariants, transitions stay legal, refused operations change
/// nothing and severed regions have zero entanglement.
pub fn ledger_fuzz(events: u64, seed: u64) -> CheckResult {
    fuzz(events, seed, "ledger_fuzz").0
}

/// The same fuzz seed twice gives the same event log.
pub fn fuzz_replay(events: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("fuzz_replay");
    let (_, a) = fuzz(events, seed, "replay");
    let (_, b) = fuzz(events, seed, "replay");
    check.case(a == b, || format!("digests differ: {a} vs {b}"));
    check
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Admit(SessionMode),
    Allocate(u64, u64),
    Sever(u64),
    Start(u64),
    Grow(u64),
    Logoff(u64, bool),
    Reattach(u64, u64),
    Advance,
    Bell(u64, u64),
    Run(u64),
}

fn apply_op(m: &mut Mainframe, op: Op) -> Result<(), MainframeError> {
    match op {
        Op::Admit(mode) => m
            .admit_with_ancillae("mc", mode, 1, AncillaBudget { a: 1, y: 0 })
            .map(drop),
        Op::Allocate(s, n) => m.allocate(SessionId(s), n).map(drop),
        Op::Sever(s) => m.sever(SessionId(s)).map(drop),
        Op::Start(s) => m.start(SessionId(s)),
        Op::Grow(s) => m.grow(SessionId(s), 1).map(drop),
        Op::Logoff(s, p) => m.logoff(SessionId(s), p).map(drop),
        Op::Reattach(h, s) => m.reattach(PersistHandle(h), SessionId(s)).map(drop),
        Op::Advance => m.advance_layers(1).map(drop),
        Op::Bell(a, b) => m.bell_broker(SessionId(a), SessionId(b)).map(drop),
        Op::Run(s) => {
            let id = SessionId(s);
            let stream = match m.session(id).ok().and_then(|x| x.region) {
                Some(r) => vec![
                    MeasurementInstruction::new(r.origin, PauliBasis::X),
                    MeasurementInstruction::new(r.origin, PauliBasis::AncillaA),
                ],
                None => vec![MeasurementInstruction::new(CellCoord::new(0, 0, 0), PauliBasis::X)],
            };
            match m.session(id).map(|x| x.mode) {
                Ok(SessionMode::SecureQuantum) => m.run_secure(id, &stream).map(drop),
                _ => m.run_trusted(id, &stream).map(drop),
            }
        }
    }
}

fn alphabet(m: &Mainframe) -> Vec<Op> {
    let n = m.sessions().len() as u64;
    let handles = m.ledger().map_or(0, |l| {
        l.persisted().keys().map(|h| h.0 + 1).max().unwrap_or(0)
    });
    let mut ops = vec![Op::Advance];
    if n < 2 {
        ops.push(Op::Admit(SessionMode::Trusted));
        ops.push(Op::Admit(SessionMode::SecureQuantum));
    }
    for s in 0..=n {
        ops.extend([
            Op::Allocate(s, 1),
            Op::Allocate(s, 20),
            Op::Sever(s),
            Op::Start(s),
            Op::Grow(s),
            Op::Logoff(s, false),
            Op::Logoff(s, true),
            Op::Run(s),
        ]);
        for h in 0..=handles {
            ops.push(Op::Reattach(h, s));
        }
        for b in 0..n {
            if b != s {
                ops.push(Op::Bell(s, b));
            }
        }
    }
    ops
}

/// Exhaustive enumeration of operation sequences up to `depth` on a two-user
/// desk mainframe. Successful operations keep the invariants and make only
/// legal transitions; failed ones leave the mainframe exactly as it was.
pub fn model_check(depth: usize) -> CheckResult {
    let mut check = CheckResult::new("model_check");
    let root = desk_mainframe(1, LatticeDims::new(3, 3, 1).expect("positive"), 1).expect("valid");
    let mut stack = vec![(root, 0usize)];
    while let Some((m, d)) = stack.pop() {
        if d == depth {
            continue;
        }
        for op in alphabet(&m) {
            let mut next = m.clone();
            match apply_op(&mut next, op) {
                Err(e) => check.case(next == m, || format!("{op:?} failed with {e} but changed state")),
                Ok(()) => {
                    let bad = next.check_invariants();
                    let illegal = next.transitions()[m.transitions().len()..]
                        .iter()
                        .find(|t| !t.from.can_transition_to(t.to))
                        .copied();
                    check.case(bad.is_empty() && illegal.is_none(), || {
                        format!("{op:?} at depth {d}: {bad:?} {illegal:?}")
                    });
                    stack.push((next, d + 1));
                }
            }
        }
    }
    check
}

/// The default budget accepts consumption up to exactly 10^16 operations and
/// refuses the next one, both on a bare budget and through a mainframe.
pub fn budget_boundary() -> CheckResult {
    let mut check = CheckResult::new("budget_boundary");
    let mut b = OperationsBudget::default();
    check.case(b.total() == DEFAULT_TOTAL_OPS, || format!("default total {}", b.total()));
    check.case(b.consume(DEFAULT_TOTAL_OPS - 1).is_ok(), || "10^16 - 1 refused".into());
    check.case(b.consume(1).is_ok() && b.remaining() == 0, || "last operation refused".into());
    check.case(b.consume(1).is_err() && b.consumed() == DEFAULT_TOTAL_OPS, || {
        "operation past 10^16 accepted".into()
    });

    // A 4x6 region: severing measures 16 cells and each persisted layer 24,
    // and 24 divides 10^16 - 16.
    let run = || -> Result<(), String> {
        let mut m = desk_mainframe(3, LatticeDims::new(4, 6, 1).expect("positive"), 1)
            .map_err(|e| e.to_string())?;
        let id = m.admit("edge", SessionMode::Trusted, 1).map_err(|e| e.to_string())?;
        m.allocate(id, 1).map_err(|e| e.to_string())?;
        m.sever(id).map_err(|e| e.to_string())?;
        m.logoff(id, true).map_err(|e| e.to_string())?;
        let consumed = m.budget().consumed();
        let layers = (DEFAULT_TOTAL_OPS - consumed) / 24;
        if consumed != 16 || !(DEFAULT_TOTAL_OPS - consumed).is_multiple_of(24) {
            return Err(format!("setup consumed {consumed}"));
        }
        m.advance_layers((layers - 1) as u64).map_err(|e| e.to_string())?;
        m.advance_layers(1).map_err(|e| format!("final layer refused: {e}"))?;
        if m.budget().remaining() != 0 {
            return Err(format!("{} left after the boundary", m.budget().remaining()));
        }
        let snapshot = m.clone();
        match m.advance_layers(1) {
            Err(MainframeError::BudgetExhausted { requested: 24, remaining: 0 }) if m == snapshot => Ok(()),
            other => Err(format!("past the boundary: {other:?}")),
        }
    };
    let r = run();
    check.case(r.is_ok(), || r.unwrap_err());
    check
}

fn random_instruction<R: Rng + ?Sized>(rng: &mut R) -> MeasurementInstruction {
    let cell = CellCoord::new(
        rng.random_range(0..u64::MAX),
        rng.random_range(0..1000),
        rng.random_range(0..10),
    );
    MeasurementInstruction::new(cell, PauliBasis::ALL[rng.random_range(0..PauliBasis::ALL.len())])
}

/// decode . encode = id on random streams, and encode . decode = id on their
/// encodings; the same for eigenvalue records and descriptors.
pub fn codec_roundtrip(trials: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("codec_roundtrip");
    for t in 0..trials {
        let mut rng = rng_for(seed, 7, t);
        let len = rng.random_range(0..40);
        let stream: Vec<MeasurementInstruction> = (0..len).map(|_| random_instruction(&mut rng)).collect();
        let bytes = encode_stream(&stream);
        let back = decode_stream(&bytes);
        check.case(
            back.as_ref().is_ok_and(|b| *b == stream && encode_stream(b) == bytes),
            || format!("stream {t}: {back:?}"),
        );

        let n = rng.random_range(0..30);
        let rec = EigenvalueRecord::from_signs((0..n).map(|_| Outcome::from_negative(rng.random())));
        let rb = rec.encode();
        let r2 = EigenvalueRecord::decode(&rb);
        check.case(r2.as_ref().is_ok_and(|r| *r == rec && r.encode() == rb), || {
            format!("record {t}: {r2:?}")
        });

        let region = Region::new(
            RegionId(0),
            RegionKind::UserPartition,
            CellCoord::new(rng.random_range(0..1 << 40), rng.random_range(0..1 << 40), 0),
            LatticeDims::new(
                rng.random_range(1..1 << 20),
                rng.random_range(1..1 << 20),
                rng.random_range(1..100),
            )
            .expect("positive"),
        );
        let d = PhotonStreamDescriptor::for_region(&region);
        let db = d.encode();
        let d2 = PhotonStreamDescriptor::decode(&db);
        check.case(d2.as_ref().is_ok_and(|x| *x == d && x.encode() == db), || {
            format!("descriptor {t}: {d2:?}")
        });
    }
    check
}

fn random_desk_dims<R: Rng + ?Sized>(rng: &mut R) -> LatticeDims {
    LatticeDims::new(rng.random_range(3..=4), rng.random_range(3..=4), rng.random_range(1..=2))
        .expect("positive")
}

fn severed_session(
    seed: u64,
    dims: LatticeDims,
    mode: SessionMode,
) -> Result<(Mainframe, SessionId), MainframeError> {
    let mut m = desk_mainframe(seed, dims, 1)?;
    let id = m.admit_with_ancillae("user", mode, 1, AncillaBudget { a: 64, y: 64 })?;
    m.allocate(id, 1)?;
    m.sever(id)?;
    m.start(id)?;
    Ok((m, id))
}

/// The descriptor of a region is the same bytes whatever is run on it.
pub fn descriptor_purity(trials: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("descriptor_purity");
    for t in 0..trials {
        let mut rng = rng_for(seed, 8, t);
        let dims = random_desk_dims(&mut rng);
        let result = (|| -> Result<bool, MainframeError> {
            let (mut a, ia) = severed_session(rng.random(), dims, SessionMode::SecureQuantum)?;
            let (mut b, ib) = severed_session(rng.random(), dims, SessionMode::SecureQuantum)?;
            let region = a.session(ia)?.region.expect("allocated");
            let expected = PhotonStreamDescriptor::for_region(&region).encode();
            let da0 = a.stream_descriptor(ia)?.encode();
            a.run_secure(ia, &random_stream(&region, 12, &mut rng))?;
            b.run_secure(ib, &random_stream(&region, 12, &mut rng))?;
            let da1 = a.stream_descriptor(ia)?.encode();
            let db1 = b.stream_descriptor(ib)?.encode();
            let routed = a.route_partition(ia)?.descriptor.encode();
            Ok(da0 == expected && da1 == expected && db1 == expected && routed == expected)
        })();
        check.case(matches!(result, Ok(true)), || format!("trial {t}: {result:?}"));
    }
    check
}

/// The same stream on identically prepared regions gives the same outcomes
/// whether the mainframe measures it or the user does.
pub fn cross_mode(trials: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("cross_mode");
    for t in 0..trials {
        let mut rng = rng_for(seed, 9, t);
        let dims = random_desk_dims(&mut rng);
        let mseed: u64 = rng.random();
        let result = (|| -> Result<Option<String>, MainframeError> {
            let (mut a, ia) = severed_session(mseed, dims, SessionMode::Trusted)?;
            let (mut b, ib) = severed_session(mseed, dims, SessionMode::SecureQuantum)?;
            let region = a.session(ia)?.region.expect("allocated");
            let mut cells: Vec<CellCoord> = region.cells().collect();
            cells.shuffle(&mut rng);
            let half = cells.len() / 2;
            for part in [&cells[..half], &cells[half..]] {
                let stream: Vec<MeasurementInstruction> = part
                    .iter()
                    .map(|&c| MeasurementInstruction::new(c, PauliBasis::ALL[rng.random_range(0..5)]))
                    .collect();
                let (ops_a, ops_b) = (a.session(ia)?.ops_consumed, b.session(ib)?.ops_consumed);
                let oa = a.run_trusted(ia, &stream)?;
                let ob = b.run_secure(ib, &stream)?;
                if oa != ob {
                    return Ok(Some(format!("outcomes differ: {oa:?} vs {ob:?}")));
                }
                let n = stream.len() as u128;
                if oa.len() as u128 != n
                    || a.session(ia)?.ops_consumed - ops_a != n
                    || b.session(ib)?.ops_consumed - ops_b != n
                {
                    return Ok(Some("ops consumed differ from stream length".into()));
                }
            }
            Ok(None)
        })();
        check.case(matches!(result, Ok(None)), || format!("trial {t}: {result:?}"));
    }
    check
}

/// Preparation eigenvalues are `-1` with frequency in `[0.48, 0.52]`.
pub fn eigenvalue_statistics(seeds: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("eigenvalue_statistics");
    let g = lattice_graph(LatticeDims::new(10, 10, 1).expect("positive"), 4096).expect("small");
    let mut minus = 0u64;
    let mut total = 0u64;
    for t in 0..seeds {
        let (_, rec) = prepare_with_random_eigenvalues(&g, derive_seed(seed, 10, t));
        minus += rec.entries().iter().filter(|(_, o)| o.is_minus()).count() as u64;
        total += rec.len() as u64;
    }
    let f = minus as f64 / total.max(1) as f64;
    check.case((0.48..=0.52).contains(&f), || format!("-1 frequency {f} over {total} generators"));
    check
}

/// Eve taps part of a routed partition. The distribution of her probe
/// outcomes does not depend on which bases the user measures afterwards.
pub fn eve_no_signaling(trials: u64, seed: u64) -> CheckResult {
    let mut check = CheckResult::new("eve_no_signaling");
    let g = lattice_graph(LatticeDims::new(3, 3, 1).expect("positive"), 4096).expect("small");
    let tapped = vec![0, 4, 8];
    let mut freq = [[0u64; 3]; 2];
    for t in 0..trials {
        let mut rng = rng_for(seed, 11, t);
        let (tab, _) = prepare_with_random_eigenvalues(&g, rng.random());
        let tap = eve_tap(&tab, &EveModel::new(tapped.clone()), 4096).expect("small");
        for (choice, counts) in freq.iter_mut().enumerate() {
            let mut tap = tap.clone();
            for q in 0..g.vertex_count() {
                let basis = match choice {
                    0 => PauliBasis::Z,
                    _ => [PauliBasis::X, PauliBasis::Y][q % 2],
                };
                tap.tableau.measure(q, basis, &mut rng).expect("fresh");
            }
            for (p, c) in counts.iter_mut().enumerate() {
                if tap.measure_probe(p, PauliBasis::X, &mut rng).expect("probe").is_minus() {
                    *c += 1;
                }
            }
        }
    }
    let n = trials.max(1) as f64;
    let tol = 0.02_f64.max(5.0 * (0.5 / n).sqrt());
    for p in 0..tapped.len() {
        let (fa, fb) = (freq[0][p] as f64 / n, freq[1][p] as f64 / n);
        check.case((fa - fb).abs() <= tol, || {
            format!("probe {p}: -1 frequency {fa} vs {fb} (tolerance {tol})")
        });
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for s in Suite::ALL {
            let r = run_suite(s, 4, 5);
            for c in &r.checks {
                if c.name == "eigenvalue_statistics" {
                    continue;
                }
                assert!(c.passed(), "{s} {}: {:?}", c.name, c.detail);
            }
        }
    }

    #[test]
    fn zero_trials_is_vacuous() {
        let r = run_verify(&Suite::ALL, 0, 1);
        assert!(r.passed());
        assert_eq!(r.warnings.len(), 1);
        assert!(r.text().contains("warning"));
    }

    #[test]
    fn sub_region_counts() {
        assert_eq!(sub_regions(LatticeDims::new(4, 4, 1).unwrap()).len(), 9);
        assert_eq!(sub_regions(LatticeDims::new(3, 3, 2).unwrap()).len(), 1);
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("protocol".parse::<Suite>().unwrap(), Suite::Protocol);
        assert!("all".parse::<Suite>().is_err());
    }
}
