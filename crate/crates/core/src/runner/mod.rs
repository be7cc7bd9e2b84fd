//! Scenario execution, reports and the verification suites behind the
//! command-line front end.

mod report;
mod scenario;
pub mod verify;

use std::collections::HashMap;
use std::path::Path;

use crate::allocator::{
    cross_sum_cells, AncillaBudget, LogoffOutcome, Mainframe, MainframeError, PersistHandle,
    SessionId, SessionState,
};
use crate::stabilizer::Outcome;

pub use report::{
    estimate, partition_map, BellSummary, Estimate, EventOutcome, RunReport, SessionSummary,
};
pub use scenario::{
    resolve_seed, EventKind, EventSpec, MainframeSpec, ModeSpec, PreparedEvent, Scenario,
    ScenarioError,
};

fn outcome_string(outcomes: &[Outcome]) -> String {
    outcomes.iter().map(|o| o.symbol()).collect()
}

struct Executor {
    mf: Mainframe,
    names: HashMap<String, SessionId>,
    order: Vec<String>,
    handles: HashMap<String, PersistHandle>,
    outcomes: HashMap<String, Vec<String>>,
    bells: Vec<BellSummary>,
    entropies: Vec<(usize, String, usize)>,
    failures: Vec<String>,
}

impl Executor {
    fn id(&self, name: &str) -> SessionId {
        self.names[name]
    }

    /// Runs one event. `Ok(Err(_))` is a mainframe refusal; `Err(_)` is a
    /// failed check inside an event that otherwise succeeded.
    fn apply(
        &mut self,
        index: usize,
        event: &PreparedEvent,
    ) -> Result<Result<(), MainframeError>, String> {
        let r = match &event.spec.kind {
            EventKind::Admit {
                session,
                user,
                mode,
                logical,
                ancilla_a,
                ancilla_y,
            } => self
                .mf
                .admit_with_ancillae(
                    user.as_deref().unwrap_or(session),
                    (*mode).into(),
                    *logical,
                    AncillaBudget {
                        a: *ancilla_a,
                        y: *ancilla_y,
                    },
                )
                .map(|id| {
                    self.names.insert(session.clone(), id);
                    self.order.push(session.clone());
                }),
            EventKind::Allocate { session, logical } => {
                let id = self.id(session);
                let n = match logical {
                    Some(n) => *n,
                    None => self.mf.session(id).map_or(0, |s| s.requested_logical),
                };
                self.mf.allocate(id, n).map(drop)
            }
            EventKind::Sever { session } => self.mf.sever(self.id(session)).map(drop),
            EventKind::Start { session } => self.mf.start(self.id(session)),
            EventKind::Stream { session, .. } => {
                let id = self.id(session);
                let run = |mf: &mut Mainframe| -> Result<Vec<Outcome>, MainframeError> {
                    let s = mf.session(id)?;
                    let mode = s.mode;
                    let mut probe = None;
                    if s.state == SessionState::Severed {
                        probe = Some(mf.clone());
                        mf.start(id)?;
                    }
                    let r = match mode {
                        crate::allocator::SessionMode::Trusted => {
                            mf.run_trusted(id, &event.instructions)
                        }
                        crate::allocator::SessionMode::SecureQuantum => {
                            mf.run_secure(id, &event.instructions)
                        }
                    };
                    if r.is_err() {
                        if let Some(p) = probe {
                            *mf = p;
                        }
                    }
                    r
                };
                run(&mut self.mf).map(|o| {
                    self.outcomes
                        .entry(session.clone())
                        .or_default()
                        .push(outcome_string(&o));
                })
            }
            EventKind::Grow { session, logical } => {
                self.mf.grow(self.id(session), *logical).map(drop)
            }
            EventKind::Bell { a, b, min_cut } => {
                match self.mf.bell_broker(self.id(a), self.id(b)) {
                    Ok(link) => {
                        self.bells.push(BellSummary {
                            event: index,
                            a: a.clone(),
                            b: b.clone(),
                            corridor: link.corridor.to_string(),
                            path_len: link.path_len,
                            cut_entropy: link.cut_entropy,
                        });
                        if let (Some(min), Some((x, y))) = (min_cut, link.cut_entropy) {
                            if x < *min || y < *min {
                                return Err(format!("cut entropies {x} and {y} are below {min}"));
                            }
                        }
                        Ok(())
                    }
                    Err(e) => Err(e),
                }
            }
            EventKind::Logoff {
                session,
                persist,
                handle,
            } => match self.mf.logoff(self.id(session), *persist) {
                Ok(LogoffOutcome::Persisted(record)) => {
                    if let Some(h) = handle {
                        self.handles.insert(h.clone(), record.handle);
                    }
                    Ok(())
                }
                Ok(LogoffOutcome::Closed) => Ok(()),
                Err(e) => Err(e),
            },
            EventKind::Reattach { handle, session } => {
                let Some(&h) = self.handles.get(handle) else {
                    return Err(format!("handle `{handle}` was never created"));
                };
                self.mf.reattach(h, self.id(session)).map(drop)
            }
            EventKind::AdvanceLayers { layers } => self.mf.advance_layers(*layers).map(drop),
            EventKind::Entropy {
                session,
                equals,
                min,
            } => match self.mf.region_entropy(self.id(session)) {
                Ok(Some(e)) => {
                    self.entropies.push((index, session.clone(), e));
                    if equals.is_some_and(|want| want != e) {
                        return Err(format!("entropy {e}, expected {}", equals.unwrap()));
                    }
                    if min.is_some_and(|want| e < want) {
                        return Err(format!("entropy {e}, expected at least {}", min.unwrap()));
                    }
                    Ok(())
                }
                Ok(None) => Err(MainframeError::InvalidState {
                    session: self.id(session),
                    state: self.mf.session(self.id(session)).map(|s| s.state).unwrap_or(SessionState::Closed),
                    op: "entropy",
                }),
                Err(e) => Err(e),
            },
        };
        Ok(r)
    }
}

fn value_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs `scenario` with `seed`. Malformed scenarios are errors; refusals and
/// failed expectations are recorded in the report.
pub fn run_scenario(
    scenario: &Scenario,
    seed: u64,
    base_dir: Option<&Path>,
) -> Result<RunReport, ScenarioError> {
    let events = scenario.prepare(base_dir)?;
    let layout = scenario.layout()?;
    let config = scenario.config(seed)?;
    let assumptions = assumptions(&config, scenario);
    let mf = Mainframe::booted(config, layout).map_err(|e| ScenarioError::Config(e.to_string()))?;
    let mut ex = Executor {
        mf,
        names: HashMap::new(),
        order: Vec::new(),
        handles: HashMap::new(),
        outcomes: HashMap::new(),
        bells: Vec::new(),
        entropies: Vec::new(),
        failures: Vec::new(),
    };
    let mut outcomes = Vec::with_capacity(events.len());
    let mut violations = Vec::new();
    for (index, event) in events.iter().enumerate() {
        let op = event.spec.kind.op();
        let expected = event.spec.expect_error.as_deref();
        let status = match (ex.apply(index, event), expected) {
            (Err(check), _) => {
                ex.failures.push(format!("event {index} ({op}): {check}"));
                "check-failed".to_string()
            }
            (Ok(Ok(())), None) => "ok".to_string(),
            (Ok(Ok(())), Some(want)) => {
                ex.failures
                    .push(format!("event {index} ({op}): expected {want}, but it succeeded"));
                "ok".to_string()
            }
            (Ok(Err(e)), Some(want)) if e.kind() == want => format!("expected:{want}"),
            (Ok(Err(e)), _) => {
                ex.failures.push(format!("event {index} ({op}): {} ({e})", e.kind()));
                format!("error:{}", e.kind())
            }
        };
        outcomes.push(EventOutcome { index, op, status });
        for v in ex.mf.check_invariants() {
            violations.push(format!("after event {index} ({op}): {v}"));
        }
    }

    let mf = &ex.mf;
    let sessions = ex
        .order
        .iter()
        .map(|name| {
            let s = mf.session(ex.names[name]).expect("admitted sessions persist");
            SessionSummary {
                name: name.clone(),
                id: s.id.to_string(),
                user: s.user_id.clone(),
                mode: s.mode.as_str().to_string(),
                state: s.state.to_string(),
                region: s.region,
                ops: s.ops_consumed,
                runs: s.runs,
                outcomes: ex.outcomes.get(name).cloned().unwrap_or_default(),
            }
        })
        .collect();
    let log_text = mf.log().to_text();
    let mut report = RunReport {
        name: scenario.name.clone().unwrap_or_else(|| "unnamed".into()),
        seed,
        layout: mf.layout().expect("booted").clone(),
        resources: mf.resource_report().expect("booted"),
        scratch: mf.scratch_report().expect("booted"),
        budget: *mf.budget(),
        slots: mf.ledger().expect("booted").counts(),
        layer: mf.layer(),
        desk_qubits: mf.desk().map(|d| d.tableau.qubit_count()),
        log_events: mf.log().len(),
        log_digest: mf.log().digest(),
        log_cross_sum: cross_sum_cells(&log_text).unwrap_or(0),
        sessions,
        bells: ex.bells,
        entropies: ex.entropies,
        events: outcomes,
        assumptions,
        invariant_violations: violations,
        failures: ex.failures,
    };
    let fields = report.base_fields();
    for (key, want) in &scenario.expect {
        let want = value_string(want);
        match fields.get(key) {
            Some(got) if *got == want => {}
            Some(got) => report
                .failures
                .push(format!("expect {key}: wanted {want}, report has {got}")),
            None => report
                .failures
                .push(format!("expect {key}: key is not in the report")),
        }
    }
    Ok(report)
}

fn assumptions(config: &crate::allocator::MainframeConfig, scenario: &Scenario) -> Vec<(String, String)> {
    let fp = config.cost_model.footprint();
    vec![
        ("budget.total_ops".into(), config.total_ops.to_string()),
        (
            "budget.source".into(),
            if scenario.mainframe.total_ops.is_some() { "scenario" } else { "default" }.into(),
        ),
        ("chips_per_logical".into(), config.cost_model.chips_per_logical().to_string()),
        ("footprint".into(), format!("{}x{}", fp.width(), fp.depth())),
        ("distill_volume_a".into(), config.demand.distill_volume_a.to_string()),
        ("distill_volume_y".into(), config.demand.distill_volume_y.to_string()),
        ("ancilla_rate_a".into(), config.demand.rate_a.to_string()),
        ("ancilla_rate_y".into(), config.demand.rate_y.to_string()),
        ("simulation_cap".into(), config.simulation_cap.to_string()),
        (
            "eigenvalues".into(),
            if config.random_eigenvalues { "uniform" } else { "all_plus" }.into(),
        ),
        ("qubits_per_cell".into(), "1".into()),
        ("cell_adjacency".into(), "6-neighbour cubic".into()),
        ("maintenance".into(), "region area per layer".into()),
    ]
}
