use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::allocator::{ScratchFeasibility, SlotCounts};
use crate::geometry::{tile_count, LogicalFootprint, PartitionLayout, Region, RegionKind};
use crate::resources::{chips_for_region, ChipCostModel, OperationsBudget, ResourceReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSummary {
    pub name: String,
    pub id: String,
    pub user: String,
    pub mode: String,
    pub state: String,
    pub region: Option<Region>,
    pub ops: u128,
    pub runs: u64,
    /// One `+`/`-` string per run.
    pub outcomes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellSummary {
    pub event: usize,
    pub a: String,
    pub b: String,
    pub corridor: String,
    pub path_len: usize,
    pub cut_entropy: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventOutcome {
    pub index: usize,
    pub op: &'static str,
    /// `ok`, `expected:<Kind>` or `error:<Kind>`.
    pub status: String,
}

/// Everything a scenario run produced. Two runs of the same scenario and seed
/// render byte-identical reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub seed: u64,
    pub layout: PartitionLayout,
    pub resources: ResourceReport,
    pub scratch: ScratchFeasibility,
    pub budget: OperationsBudget,
    pub slots: SlotCounts,
    pub layer: u64,
    pub desk_qubits: Option<usize>,
    pub log_events: usize,
    pub log_digest: String,
    pub log_cross_sum: u128,
    pub sessions: Vec<SessionSummary>,
    pub bells: Vec<BellSummary>,
    pub entropies: Vec<(usize, String, usize)>,
    pub events: Vec<EventOutcome>,
    pub assumptions: Vec<(String, String)>,
    pub invariant_violations: Vec<String>,
    pub failures: Vec<String>,
}

fn dims3(r: &Region) -> String {
    format!("{},{},{}", r.dims.width(), r.dims.depth(), r.dims.layers())
}

fn origin3(r: &Region) -> String {
    format!("{},{},{}", r.origin.x, r.origin.y, r.origin.z)
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.invariant_violations.is_empty()
    }

    /// Flat keys for the machine format, without the `result.*` block.
    pub(crate) fn base_fields(&self) -> BTreeMap<String, String> {
        let mut f = BTreeMap::new();
        let mut put = |k: String, v: String| {
            f.insert(k, v);
        };
        let res = &self.resources;
        put("scenario.name".into(), self.name.clone());
        put("scenario.seed".into(), self.seed.to_string());

        put("global.width".into(), res.global.width().to_string());
        put("global.depth".into(), res.global.depth().to_string());
        put("global.layers".into(), res.global.layers().to_string());
        put("global.cells_per_layer".into(), res.global.area().to_string());
        for (i, r) in self.layout.regions.iter().enumerate() {
            put(format!("regions.{i}.id"), r.id.0.to_string());
            put(format!("regions.{i}.kind"), r.kind.as_str().into());
            put(format!("regions.{i}.origin"), origin3(r));
            put(format!("regions.{i}.dims"), dims3(r));
        }

        put("chips.total".into(), res.chips_total.to_string());
        put("chips.approximate".into(), res.chips_approximate.to_string());
        put("logical.total".into(), res.logical_total.to_string());
        put("users".into(), res.users.to_string());
        for (kind, t) in &res.per_kind {
            let k = kind.as_str();
            put(format!("kind.{k}.regions"), t.regions.to_string());
            put(format!("kind.{k}.cells_per_layer"), t.cells_per_layer.to_string());
            put(format!("kind.{k}.chips"), t.chips.to_string());
            put(format!("kind.{k}.logical"), t.logical.to_string());
        }
        if let Some(u) = res.per_region.iter().find(|r| r.kind == RegionKind::UserPartition) {
            put("user_region.cells_per_layer".into(), u.cells_per_layer.to_string());
            put("user_region.chips".into(), u.chips.chips.to_string());
            put("user_region.logical".into(), u.logical.to_string());
            let r = self.layout.region(u.id).expect("report regions come from the layout");
            let fp = res.model.footprint();
            put(
                "user_region.tiles".into(),
                format!("{}x{}", r.dims.width() / fp.width(), r.dims.depth() / fp.depth()),
            );
        }
        let fp = res.model.footprint();
        put("footprint.dims".into(), format!("{}x{}", fp.width(), fp.depth()));
        put(
            "footprint.chips".into(),
            chips_for_region(fp.width(), fp.depth(), &res.model).chips.to_string(),
        );

        put("scratch.cells_per_layer".into(), self.scratch.scratch_cells_per_layer.to_string());
        put("scratch.demand_cells_per_layer".into(), self.scratch.demand_cells_per_layer.to_string());
        put("scratch.feasible".into(), self.scratch.feasible.to_string());
        put("scratch.max_rate_a".into(), self.scratch.max_rate_a.to_string());
        put("scratch.max_rate_y".into(), self.scratch.max_rate_y.to_string());
        put("scratch.utilization".into(), format!("{:.6}", self.scratch.utilization()));

        put("budget.total".into(), self.budget.total().to_string());
        put("budget.consumed".into(), self.budget.consumed().to_string());
        put("budget.remaining".into(), self.budget.remaining().to_string());
        put("slots.free".into(), self.slots.free.to_string());
        put("slots.occupied".into(), self.slots.occupied.to_string());
        put("slots.persisted".into(), self.slots.persisted.to_string());
        put("layer".into(), self.layer.to_string());
        put(
            "desk.qubits".into(),
            self.desk_qubits.map_or_else(|| "none".into(), |q| q.to_string()),
        );
        put("log.events".into(), self.log_events.to_string());
        put("log.digest".into(), self.log_digest.clone());
        put("log.cross_sum".into(), self.log_cross_sum.to_string());

        for s in &self.sessions {
            let p = format!("session.{}", s.name);
            put(format!("{p}.id"), s.id.clone());
            put(format!("{p}.user"), s.user.clone());
            put(format!("{p}.mode"), s.mode.clone());
            put(format!("{p}.state"), s.state.clone());
            if let Some(r) = &s.region {
                put(format!("{p}.region.origin"), origin3(r));
                put(format!("{p}.region.dims"), dims3(r));
            }
            put(format!("{p}.ops"), s.ops.to_string());
            put(format!("{p}.runs"), s.runs.to_string());
            for (i, o) in s.outcomes.iter().enumerate() {
                put(format!("{p}.outcomes.{i}"), o.clone());
            }
        }
        for (i, b) in self.bells.iter().enumerate() {
            let p = format!("bell.{i}");
            put(format!("{p}.event"), b.event.to_string());
            put(format!("{p}.sessions"), format!("{},{}", b.a, b.b));
            put(format!("{p}.corridor"), b.corridor.clone());
            put(format!("{p}.path_len"), b.path_len.to_string());
            if let Some((x, y)) = b.cut_entropy {
                put(format!("{p}.cut_a"), x.to_string());
                put(format!("{p}.cut_b"), y.to_string());
            }
        }
        for (event, name, e) in &self.entropies {
            put(format!("entropy.{event}.session"), name.clone());
            put(format!("entropy.{event}.value"), e.to_string());
        }
        for e in &self.events {
            put(format!("event.{}.{}", e.index, e.op), e.status.clone());
        }
        for (k, v) in &self.assumptions {
            put(format!("assumption.{k}"), v.clone());
        }
        f
    }

    pub fn fields(&self) -> BTreeMap<String, String> {
        let mut f = self.base_fields();
        f.insert("result.passed".into(), self.passed().to_string());
        f.insert(
            "result.invariant_violations".into(),
            self.invariant_violations.len().to_string(),
        );
        f.insert("result.failures".into(), self.failures.len().to_string());
        for (i, m) in self.failures.iter().enumerate() {
            f.insert(format!("result.failure.{i}"), m.clone());
        }
        for (i, m) in self.invariant_violations.iter().enumerate() {
            f.insert(format!("result.violation.{i}"), m.clone());
        }
        f
    }

    /// `key=value` lines, keys sorted, LF endings.
    pub fn machine(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(out, "{k}={}", v.replace('\n', " "));
        }
        out
    }

    pub fn text(&self) -> String {
        let res = &self.resources;
        let mut o = String::new();
        let _ = writeln!(o, "scenario {} (seed {})", self.name, self.seed);
        let _ = writeln!(o);
        let _ = writeln!(o, "lattice");
        let _ = writeln!(
            o,
            "  global           {} x {} cells, {} layer(s)",
            res.global.width(),
            res.global.depth(),
            res.global.layers()
        );
        let _ = writeln!(
            o,
            "  chips            {}{}",
            res.chips_total,
            if res.chips_approximate { " (rounded up)" } else { "" }
        );
        let _ = writeln!(o, "  logical qubits   {}", res.logical_total);
        let _ = writeln!(o, "  user regions     {}", res.users);
        if let Some(u) = res.per_region.iter().find(|r| r.kind == RegionKind::UserPartition) {
            let _ = writeln!(
                o,
                "  per user region  {} chips, {} logical qubits",
                u.chips.chips, u.logical
            );
        }
        let fp = res.model.footprint();
        let _ = writeln!(
            o,
            "  footprint        {} x {} cells, {} chips",
            fp.width(),
            fp.depth(),
            res.model.chips_per_logical()
        );
        for (kind, t) in &res.per_kind {
            let _ = writeln!(
                o,
                "  {:<16} {} region(s), {} cells/layer, {} chips, {} logical",
                kind.as_str(),
                t.regions,
                t.cells_per_layer,
                t.chips,
                t.logical
            );
        }
        if let Some(map) = partition_map(&self.layout, 64, 24) {
            let _ = writeln!(o);
            let _ = writeln!(o, "partition map (U user, S scratch)");
            for line in map.lines() {
                let _ = writeln!(o, "  {line}");
            }
        }
        let _ = writeln!(o);
        let _ = writeln!(o, "scratch");
        let _ = writeln!(
            o,
            "  supply {} cells/layer, demand {}, feasible {}, max |A> rate {}, max |Y> rate {}",
            self.scratch.scratch_cells_per_layer,
            self.scratch.demand_cells_per_layer,
            self.scratch.feasible,
            self.scratch.max_rate_a,
            self.scratch.max_rate_y
        );
        let _ = writeln!(o);
        let _ = writeln!(o, "budget");
        let _ = writeln!(
            o,
            "  consumed {} of {} ({} remaining), log cross-sum {}",
            self.budget.consumed(),
            self.budget.total(),
            self.budget.remaining(),
            self.log_cross_sum
        );
        let _ = writeln!(
            o,
            "  slots free {}, occupied {}, persisted {}; layer {}",
            self.slots.free, self.slots.occupied, self.slots.persisted, self.layer
        );
        let _ = writeln!(o, "  log {} events, sha256 {}", self.log_events, self.log_digest);

        if !self.sessions.is_empty() {
            let _ = writeln!(o);
            let _ = writeln!(o, "sessions");
            for s in &self.sessions {
                let region = s
                    .region
                    .as_ref()
                    .map_or_else(|| "-".to_string(), |r| format!("{} at {}", dims3(r), origin3(r)));
                let _ = writeln!(
                    o,
                    "  {} ({}, {}, {}) {} region {} ops {} runs {}",
                    s.name, s.id, s.user, s.mode, s.state, region, s.ops, s.runs
                );
                for (i, out) in s.outcomes.iter().enumerate() {
                    let _ = writeln!(o, "    run {i}: {out}");
                }
            }
        }
        if !self.bells.is_empty() {
            let _ = writeln!(o);
            let _ = writeln!(o, "bell links");
            for b in &self.bells {
                let cuts = b
                    .cut_entropy
                    .map_or_else(|| "not simulated".to_string(), |(x, y)| format!("cuts {x} / {y}"));
                let _ = writeln!(
                    o,
                    "  event {}: {} <-> {} via {} ({} cells), {}",
                    b.event, b.a, b.b, b.corridor, b.path_len, cuts
                );
            }
        }
        if !self.entropies.is_empty() {
            let _ = writeln!(o);
            let _ = writeln!(o, "entropy checks");
            for (event, name, e) in &self.entropies {
                let _ = writeln!(o, "  event {event}: {name} = {e}");
            }
        }
        let _ = writeln!(o);
        let _ = writeln!(o, "events");
        for e in &self.events {
            let _ = writeln!(o, "  {:>3} {:<15} {}", e.index, e.op, e.status);
        }
        let _ = writeln!(o);
        let _ = writeln!(o, "assumptions");
        for (k, v) in &self.assumptions {
            let _ = writeln!(o, "  {k} = {v}");
        }
        let _ = writeln!(o);
        let _ = writeln!(
            o,
            "result {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for m in &self.invariant_violations {
            let _ = writeln!(o, "  invariant: {m}");
        }
        for m in &self.failures {
            let _ = writeln!(o, "  {m}");
        }
        o
    }
}

/// ASCII grid of region kinds, sampled down to at most `cols` x `rows`.
/// `None` for an empty lattice.
pub fn partition_map(layout: &PartitionLayout, cols: u64, rows: u64) -> Option<String> {
    let (w, d) = (layout.global.width(), layout.global.depth());
    if w == 0 || d == 0 || cols == 0 || rows == 0 {
        return None;
    }
    let (cw, ch) = (w.min(cols), d.min(rows));
    let mut out = String::new();
    for j in 0..ch {
        let y = (j as u128 * d as u128 / ch as u128) as u64;
        for i in 0..cw {
            let x = (i as u128 * w as u128 / cw as u128) as u64;
            out.push(match layout.kind_at(x, y) {
                Some(RegionKind::UserPartition) => 'U',
                Some(RegionKind::Scratch) => 'S',
                Some(RegionKind::Corridor) => 'C',
                _ => '.',
            });
        }
        out.push('\n');
    }
    Some(out)
}

/// Chip and logical-qubit counts for one `width x depth` region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimate {
    pub width: u64,
    pub depth: u64,
    pub model: ChipCostModel,
    pub chips: u128,
    pub approximate: bool,
    pub logical: u64,
}

pub fn estimate(width: u64, depth: u64, model: ChipCostModel) -> Result<Estimate, String> {
    if width == 0 || depth == 0 {
        return Err(format!("region {width} x {depth} must have positive width and depth"));
    }
    let c = chips_for_region(width, depth, &model);
    let logical = tile_count(width, depth, &model.footprint()).map_err(|e| e.to_string())?;
    Ok(Estimate {
        width,
        depth,
        model,
        chips: c.chips,
        approximate: c.approximate,
        logical,
    })
}

impl Estimate {
    pub fn machine(&self) -> String {
        let fp: LogicalFootprint = self.model.footprint();
        let mut f = BTreeMap::new();
        f.insert("approximate", self.approximate.to_string());
        f.insert("cells_per_layer", (self.width as u128 * self.depth as u128).to_string());
        f.insert("chips", self.chips.to_string());
        f.insert("chips_per_logical", self.model.chips_per_logical().to_string());
        f.insert("depth", self.depth.to_string());
        f.insert("footprint", format!("{}x{}", fp.width(), fp.depth()));
        f.insert("logical", self.logical.to_string());
        f.insert("tiles", format!("{}x{}", self.width / fp.width(), self.depth / fp.depth()));
        f.insert("width", self.width.to_string());
        let mut out = String::new();
        for (k, v) in f {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_layout, LatticeDims};

    #[test]
    fn estimates_match_paper() {
        let e = estimate(4000, 500_000, ChipCostModel::default()).unwrap();
        assert_eq!((e.chips, e.logical, e.approximate), (7_500_000_000, 2_500_000, false));
        let e = estimate(20, 40, ChipCostModel::default()).unwrap();
        assert_eq!((e.chips, e.logical), (3000, 1));
        assert!(e.machine().contains("chips=3000\n"));
        assert!(estimate(0, 5, ChipCostModel::default()).is_err());
    }

    #[test]
    fn map_shows_columns() {
        let layout = build_layout(2, LatticeDims::planar(2, 2).unwrap(), 1, 1).unwrap();
        assert_eq!(partition_map(&layout, 64, 24).unwrap(), "UUSSUU\nUUSSUU\n");
    }
}
