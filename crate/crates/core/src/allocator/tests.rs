use super::*;
use crate::geometry::{build_layout, LatticeDims, LogicalFootprint};
use crate::protocol::MeasurementInstruction;

fn paper() -> Mainframe {
    let layout = build_layout(1000, LatticeDims::planar(1000, 1000).unwrap(), 2, 500).unwrap();
    Mainframe::booted(MainframeConfig::new(1), layout).unwrap()
}

/// Two columns of `upc` users of `w x d x layers` around a one-region-wide
/// scratch strip.
fn desk(w: u64, d: u64, layers: u64, upc: u64, seed: u64) -> Mainframe {
    let layout = build_layout(2 * upc, LatticeDims::new(w, d, layers).unwrap(), 1, upc).unwrap();
    Mainframe::booted(desk_config(seed), layout).unwrap()
}

/// One logical qubit per cell, so that tiny regions have capacity.
fn desk_config(seed: u64) -> MainframeConfig {
    let mut c = MainframeConfig::new(seed);
    c.cost_model = ChipCostModel::new(3000, LogicalFootprint::new(1, 1).unwrap()).unwrap();
    c
}

fn running(m: &mut Mainframe, user: &str, mode: SessionMode) -> SessionId {
    let s = m.admit(user, mode, 1).unwrap();
    m.allocate(s, 1).unwrap();
    m.sever(s).unwrap();
    m.start(s).unwrap();
    s
}

fn clean(m: &Mainframe) {
    assert_eq!(m.check_invariants(), Vec::<String>::new());
}

#[test]
fn uninitialized_rejects_admit() {
    let mut m = Mainframe::new(MainframeConfig::new(0));
    assert_eq!(m.admit("alice", SessionMode::Trusted, 1250), Err(MainframeError::NotReady));
}

#[test]
fn paper_allocation() {
    let mut m = paper();
    assert!(m.desk().is_none());
    let a = m.admit("alice", SessionMode::Trusted, 1250).unwrap();
    let a2 = m.admit("alice", SessionMode::Trusted, 1250).unwrap();
    assert_ne!(a, a2);
    let r = m.allocate(a, 1250).unwrap();
    assert_eq!((r.dims.width(), r.dims.depth()), (1000, 1000));
    let r2 = m.allocate(a2, 1251).unwrap();
    assert_eq!((r2.dims.width(), r2.dims.depth()), (1000, 2000));
    assert_eq!(r2.origin, CellCoord::planar(0, 1000));
    assert_eq!(m.session(a2).unwrap().slots.len(), 2);
    clean(&m);
}

#[test]
fn full_mainframe_is_out_of_capacity() {
    let mut m = desk(3, 3, 1, 2, 0);
    for i in 0..4 {
        let s = m.admit(&format!("u{i}"), SessionMode::Trusted, 1).unwrap();
        m.allocate(s, 1).unwrap();
    }
    let s = m.admit("late", SessionMode::Trusted, 1).unwrap();
    let before = m.clone();
    assert_eq!(m.allocate(s, 1), Err(MainframeError::CapacityExceeded { requested: 1 }));
    assert_eq!(m, before);
}

#[test]
fn sever_disentangles_and_refuses_repeat() {
    let mut m = desk(3, 3, 1, 1, 5);
    let s = m.admit("a", SessionMode::Trusted, 1).unwrap();
    m.allocate(s, 1).unwrap();
    let plan = m.sever(s).unwrap();
    assert_eq!(plan.cells.len(), 8);
    assert_eq!(plan.interior_entropy, Some(0));
    assert_eq!(m.region_entropy(s).unwrap(), Some(0));
    assert!(matches!(m.sever(s), Err(MainframeError::InvalidState { .. })));
    assert_eq!(m.budget().consumed(), 8);
    clean(&m);
}

#[test]
fn corner_plan_stays_in_lattice() {
    let mut m = desk(3, 3, 2, 1, 5);
    let s = m.admit("a", SessionMode::Trusted, 1).unwrap();
    let r = m.allocate(s, 1).unwrap();
    assert_eq!(r.origin, CellCoord::new(0, 0, 0));
    let plan = m.sever(s).unwrap();
    let global = m.layout().unwrap().global;
    assert!(plan.cells.iter().all(|c| global.contains(*c)));
    assert_eq!(plan.cells.len(), 16);
}

#[test]
fn grow_prefers_lower_index_then_higher() {
    let mut m = desk(3, 3, 1, 3, 2);
    let a = m.admit("a", SessionMode::Trusted, 1).unwrap();
    let b = m.admit("b", SessionMode::Trusted, 1).unwrap();
    m.allocate(a, 1).unwrap();
    m.allocate(b, 1).unwrap();
    // b sits at index 1; index 0 is taken so it grows downward.
    let r = m.grow(b, 1).unwrap();
    assert_eq!(r.origin, CellCoord::planar(0, 3));
    assert_eq!(r.dims.depth(), 6);
    assert!(matches!(m.grow(b, 1), Err(MainframeError::CapacityExceeded { .. })));
    assert!(matches!(m.grow(a, 1), Err(MainframeError::CapacityExceeded { .. })));
    clean(&m);
}

#[test]
fn grow_running_resevers() {
    let mut m = desk(3, 3, 1, 2, 2);
    let a = running(&mut m, "a", SessionMode::Trusted);
    let before = m.budget().consumed();
    let r = m.grow(a, 1).unwrap();
    assert_eq!(r.dims.depth(), 6);
    assert_eq!(m.session(a).unwrap().state, SessionState::Running);
    assert_eq!(m.budget().consumed() - before, 14);
    assert_eq!(m.region_entropy(a).unwrap(), Some(0));
    clean(&m);
}

#[test]
fn wipe_frees_slots() {
    let mut m = desk(3, 3, 1, 1, 3);
    let a = running(&mut m, "a", SessionMode::Trusted);
    assert_eq!(m.logoff(a, false).unwrap(), LogoffOutcome::Closed);
    assert_eq!(m.ledger().unwrap().counts().occupied, 0);
    assert!(matches!(m.logoff(a, false), Err(MainframeError::InvalidState { .. })));
    clean(&m);
    // The restored slot can be severed again.
    let b = running(&mut m, "b", SessionMode::Trusted);
    assert_eq!(m.region_entropy(b).unwrap(), Some(0));
    clean(&m);
}

#[test]
fn persistence_accrues_maintenance() {
    let mut m = paper();
    let a = m.admit("a", SessionMode::Trusted, 1250).unwrap();
    m.allocate(a, 1250).unwrap();
    m.sever(a).unwrap();
    m.start(a).unwrap();
    let LogoffOutcome::Persisted(rec) = m.logoff(a, true).unwrap() else {
        panic!("expected a persistence record");
    };
    assert_eq!(rec.maintenance_cost_per_layer, 1_000_000);
    let before = m.budget().consumed();
    m.advance_layers(10).unwrap();
    assert_eq!(m.budget().consumed() - before, 10_000_000);
    assert_eq!(m.layer(), 10);
    clean(&m);

    let b = m.admit("b", SessionMode::Trusted, 0).unwrap();
    let region = m.reattach(rec.handle, b).unwrap();
    assert_eq!(region, rec.region);
    assert_eq!(m.session(b).unwrap().stored_logical, Some(1250));
    assert_eq!(m.session(a).unwrap().state, SessionState::Closed);
    let c = m.admit("c", SessionMode::Trusted, 0).unwrap();
    assert_eq!(m.reattach(rec.handle, c), Err(MainframeError::UnknownHandle(rec.handle)));
    assert_eq!(m.reattach(PersistHandle(77), c), Err(MainframeError::UnknownHandle(PersistHandle(77))));
    clean(&m);
}

#[test]
fn owner_can_reattach() {
    let mut m = desk(3, 3, 1, 1, 4);
    let a = running(&mut m, "a", SessionMode::Trusted);
    let LogoffOutcome::Persisted(rec) = m.logoff(a, true).unwrap() else {
        panic!()
    };
    m.reattach(rec.handle, a).unwrap();
    assert_eq!(m.session(a).unwrap().state, SessionState::Allocated);
    m.sever(a).unwrap();
    assert_eq!(m.region_entropy(a).unwrap(), Some(0));
    clean(&m);
}

#[test]
fn bell_links_two_users() {
    let mut m = desk(4, 4, 1, 1, 9);
    let a = running(&mut m, "a", SessionMode::Trusted);
    let b = running(&mut m, "b", SessionMode::Trusted);
    assert_eq!(m.region_entropy(a).unwrap(), Some(0));
    let link = m.bell_broker(a, b).unwrap();
    let (ea, eb) = link.cut_entropy.unwrap();
    assert!(ea >= 1 && eb >= 1, "{ea} {eb}");
    assert_eq!(m.region_entropy(a).unwrap(), Some(ea));
    clean(&m);
    m.bell_broker(a, b).unwrap();
    assert_eq!(m.bell_broker(a, b), Err(MainframeError::NoCorridorAvailable { a, b }));
    clean(&m);
    m.logoff(a, false).unwrap();
    assert!(m.corridors().is_empty());
    assert_eq!(m.region_entropy(b).unwrap(), Some(0));
    assert!(matches!(m.bell_broker(a, b), Err(MainframeError::InvalidState { .. })));
    clean(&m);
}

#[test]
fn trusted_run_accounting() {
    let mut m = desk(2, 2, 1, 1, 6);
    let a = running(&mut m, "a", SessionMode::Trusted);
    let cells: Vec<_> = m.session(a).unwrap().region.unwrap().cells().collect();
    let before = m.budget().consumed();
    let stream: Vec<_> = cells.iter().map(|&c| MeasurementInstruction::new(c, PauliBasis::Z)).collect();
    let out = m.run_trusted(a, &stream).unwrap();
    assert_eq!(out.len(), 4);
    assert_eq!(m.budget().consumed() - before, 4);

    let snapshot = m.clone();
    let outside = vec![
        MeasurementInstruction::new(cells[0], PauliBasis::X),
        MeasurementInstruction::new(CellCoord::planar(5, 0), PauliBasis::X),
    ];
    assert_eq!(
        m.run_trusted(a, &outside),
        Err(MainframeError::OutOfRegion { index: 1, cell: CellCoord::planar(5, 0) })
    );
    assert_eq!(m, snapshot);
    assert_eq!(m.run_trusted(a, &[]), Ok(vec![]));
    clean(&m);
}

#[test]
fn ancilla_budget() {
    let mut m = desk(3, 3, 1, 1, 6);
    let a = m
        .admit_with_ancillae("a", SessionMode::Trusted, 1, AncillaBudget { a: 2, y: 0 })
        .unwrap();
    m.allocate(a, 1).unwrap();
    m.sever(a).unwrap();
    m.start(a).unwrap();
    let c = CellCoord::planar(1, 1);
    let three = vec![MeasurementInstruction::new(c, PauliBasis::AncillaA); 3];
    assert!(matches!(m.run_trusted(a, &three), Err(MainframeError::AncillaBudgetExceeded { need_a: 3, .. })));
    m.run_trusted(a, &three[..2]).unwrap();
    assert_eq!(m.session(a).unwrap().ancilla, AncillaBudget { a: 0, y: 0 });
}

#[test]
fn trusted_and_secure_agree() {
    let script = |mode| {
        let mut m = desk(4, 4, 1, 1, 21);
        let a = running(&mut m, "a", mode);
        let region = m.session(a).unwrap().region.unwrap();
        let stream: Vec<_> = region
            .interior_cells()
            .into_iter()
            .zip([PauliBasis::X, PauliBasis::Y, PauliBasis::Z, PauliBasis::X].into_iter().cycle())
            .map(|(c, b)| MeasurementInstruction::new(c, b))
            .collect();
        let out = match mode {
            SessionMode::Trusted => m.run_trusted(a, &stream).unwrap(),
            SessionMode::SecureQuantum => m.run_secure(a, &stream).unwrap(),
        };
        clean(&m);
        (out, m.budget().consumed())
    };
    assert_eq!(script(SessionMode::Trusted), script(SessionMode::SecureQuantum));
}

#[test]
fn descriptor_requires_region() {
    let mut m = desk(2, 2, 1, 1, 0);
    let a = m.admit("a", SessionMode::SecureQuantum, 1).unwrap();
    assert!(matches!(m.stream_descriptor(a), Err(MainframeError::InvalidState { .. })));
    m.allocate(a, 1).unwrap();
    let d = m.stream_descriptor(a).unwrap();
    assert_eq!(d.emission_order().count(), 4);
}

#[test]
fn budget_refusal_is_atomic() {
    let layout = build_layout(2, LatticeDims::planar(3, 3).unwrap(), 1, 1).unwrap();
    let mut config = desk_config(0);
    config.total_ops = 7;
    let mut m = Mainframe::booted(config, layout).unwrap();
    let a = m.admit("a", SessionMode::Trusted, 1).unwrap();
    m.allocate(a, 1).unwrap();
    let before = m.clone();
    assert_eq!(
        m.sever(a),
        Err(MainframeError::BudgetExhausted { requested: 8, remaining: 7 })
    );
    assert_eq!(m, before);
}

#[test]
fn log_cross_sum_matches_budget() {
    let mut m = desk(4, 4, 1, 1, 3);
    let a = running(&mut m, "a", SessionMode::Trusted);
    let b = running(&mut m, "b", SessionMode::SecureQuantum);
    m.bell_broker(a, b).unwrap();
    m.logoff(b, true).unwrap();
    m.advance_layers(3).unwrap();
    m.logoff(a, false).unwrap();
    assert_eq!(cross_sum_cells(&m.log().to_text()), Some(m.budget().consumed()));
    clean(&m);
}

#[test]
fn seeds_are_deterministic() {
    let run = || {
        let mut m = desk(3, 3, 1, 1, 42);
        let a = running(&mut m, "a", SessionMode::Trusted);
        m.run_trusted(a, &[MeasurementInstruction::new(CellCoord::planar(1, 1), PauliBasis::X)])
            .unwrap();
        m.log().digest()
    };
    assert_eq!(run(), run());
    assert_ne!(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
}
