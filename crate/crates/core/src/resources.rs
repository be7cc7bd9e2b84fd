//! Photonic-chip counts, logical-qubit capacity and the operations budget.
//!
//! All arithmetic is exact integer arithmetic on `u128`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{
    tile_count, GeometryError, LatticeDims, LogicalFootprint, PartitionLayout, RegionId,
    RegionKind,
};

/// Logical operations the default mainframe is protected for.
pub const DEFAULT_TOTAL_OPS: u128 = 10_000_000_000_000_000;
pub const DEFAULT_CHIPS_PER_LOGICAL: u64 = 3000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResourceError {
    #[error("chips per logical qubit must be at least 1")]
    ZeroChips,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("operations budget exhausted: {requested} requested, {remaining} remaining")]
    BudgetExhausted { requested: u128, remaining: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChipCostModel {
    chips_per_logical: u64,
    footprint: LogicalFootprint,
}

impl ChipCostModel {
    pub fn new(chips_per_logical: u64, footprint: LogicalFootprint) -> Result<Self, ResourceError> {
        if chips_per_logical == 0 {
            return Err(ResourceError::ZeroChips);
        }
        Ok(Self {
            chips_per_logical,
            footprint,
        })
    }

    pub fn chips_per_logical(&self) -> u64 {
        self.chips_per_logical
    }

    pub fn footprint(&self) -> LogicalFootprint {
        self.footprint
    }
}

impl Default for ChipCostModel {
    fn default() -> Self {
        Self {
            chips_per_logical: DEFAULT_CHIPS_PER_LOGICAL,
            footprint: LogicalFootprint::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChipCount {
    pub chips: u128,
    /// Set when the cell count is not a whole number of footprints and the
    /// chip count was rounded up.
    pub approximate: bool,
}

/// `cells * chips_per_logical / footprint_area`, rounded up when inexact.
pub fn chips_for_region(width: u64, depth: u64, model: &ChipCostModel) -> ChipCount {
    let cells = width as u128 * depth as u128;
    let scaled = cells * model.chips_per_logical as u128;
    let area = model.footprint.area();
    ChipCount {
        chips: scaled.div_ceil(area),
        approximate: !scaled.is_multiple_of(area),
    }
}

pub fn logical_capacity(dims: &LatticeDims, model: &ChipCostModel) -> Result<u64, ResourceError> {
    Ok(tile_count(dims.width(), dims.depth(), &model.footprint)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperationsBudget {
    total_ops: u128,
    consumed_ops: u128,
}

impl OperationsBudget {
    pub fn new(total_ops: u128) -> Self {
        Self {
            total_ops,
            consumed_ops: 0,
        }
    }

    pub fn total(&self) -> u128 {
        self.total_ops
    }

    pub fn consumed(&self) -> u128 {
        self.consumed_ops
    }

    pub fn remaining(&self) -> u128 {
        self.total_ops - self.consumed_ops
    }

    pub fn can_consume(&self, cells: u128) -> bool {
        cells <= self.remaining()
    }

    /// One logical operation per measured cell. Refused outright when it
    /// would overrun the budget.
    pub fn consume(&mut self, cells_measured: u128) -> Result<(), ResourceError> {
        if !self.can_consume(cells_measured) {
            return Err(ResourceError::BudgetExhausted {
                requested: cells_measured,
                remaining: self.remaining(),
            });
        }
        self.consumed_ops += cells_measured;
        Ok(())
    }
}

impl Default for OperationsBudget {
    fn default() -> Self {
        Self::new(DEFAULT_TOTAL_OPS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionResources {
    pub id: RegionId,
    pub kind: RegionKind,
    pub cells_per_layer: u128,
    pub chips: ChipCount,
    /// Whole footprints that fit; zero when the footprint does not fit.
    pub logical: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KindTotals {
    pub regions: u64,
    pub cells_per_layer: u128,
    pub chips: u128,
    pub logical: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceReport {
    pub global: LatticeDims,
    pub model: ChipCostModel,
    pub chips_total: u128,
    pub chips_approximate: bool,
    pub logical_total: u64,
    pub users: u64,
    pub per_region: Vec<RegionResources>,
    pub per_kind: BTreeMap<RegionKind, KindTotals>,
    pub budget: OperationsBudget,
}

/// Totals are summed over the layout's regions, so a layout without regions
/// reports zeros.
pub fn mainframe_report(
    layout: &PartitionLayout,
    model: &ChipCostModel,
    budget: &OperationsBudget,
) -> ResourceReport {
    let per_region: Vec<RegionResources> = layout
        .regions
        .iter()
        .map(|r| RegionResources {
            id: r.id,
            kind: r.kind,
            cells_per_layer: r.dims.area(),
            chips: chips_for_region(r.dims.width(), r.dims.depth(), model),
            logical: logical_capacity(&r.dims, model).unwrap_or(0),
        })
        .collect();
    let mut per_kind: BTreeMap<RegionKind, KindTotals> = BTreeMap::new();
    for r in &per_region {
        let t = per_kind.entry(r.kind).or_default();
        t.regions += 1;
        t.cells_per_layer += r.cells_per_layer;
        t.chips += r.chips.chips;
        t.logical += r.logical;
    }
    ResourceReport {
        global: layout.global,
        model: *model,
        chips_total: per_region.iter().map(|r| r.chips.chips).sum(),
        chips_approximate: per_region.iter().any(|r| r.chips.approximate),
        logical_total: per_region.iter().map(|r| r.logical).sum(),
        users: layout.user_count() as u64,
        per_region,
        per_kind,
        budget: *budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_layout, CellCoord, Region};

    #[test]
    fn paper_chip_counts() {
        let m = ChipCostModel::default();
        assert_eq!(chips_for_region(1000, 1000, &m).chips, 3_750_000);
        assert_eq!(chips_for_region(20, 40, &m).chips, 3000);
        let fig2 = chips_for_region(4000, 500_000, &m);
        assert_eq!(fig2.chips, 7_500_000_000);
        assert!(!fig2.approximate);
    }

    #[test]
    fn inexact_counts_round_up() {
        let m = ChipCostModel::default();
        let c = chips_for_region(21, 40, &m);
        // 840 * 3000 / 800 = 3150 exactly
        assert_eq!(c, ChipCount { chips: 3150, approximate: false });
        let c = chips_for_region(1, 1, &m);
        assert_eq!(c, ChipCount { chips: 4, approximate: true });
    }

    #[test]
    fn capacities() {
        let m = ChipCostModel::default();
        let cap = |w, d| logical_capacity(&LatticeDims::planar(w, d).unwrap(), &m);
        assert_eq!(cap(4000, 500_000).unwrap(), 2_500_000);
        assert_eq!(cap(1000, 1000).unwrap(), 1250);
        assert_eq!(cap(20, 40).unwrap(), 1);
        assert!(matches!(cap(19, 40), Err(ResourceError::Geometry(_))));
    }

    #[test]
    fn budget_boundary() {
        let mut b = OperationsBudget::default();
        b.consume(0).unwrap();
        assert_eq!(b.consumed(), 0);
        b.consume(DEFAULT_TOTAL_OPS).unwrap();
        assert_eq!(b.consumed(), b.total());

        let mut b = OperationsBudget::default();
        assert!(matches!(
            b.consume(DEFAULT_TOTAL_OPS + 1),
            Err(ResourceError::BudgetExhausted { .. })
        ));
        assert_eq!(b.consumed(), 0);
    }

    #[test]
    fn paper_layout_report() {
        let layout =
            build_layout(1000, LatticeDims::planar(1000, 1000).unwrap(), 2, 500).unwrap();
        let r = mainframe_report(&layout, &ChipCostModel::default(), &OperationsBudget::default());
        assert_eq!(r.chips_total, 7_500_000_000);
        assert_eq!(r.logical_total, 2_500_000);
        assert_eq!(r.users, 1000);
        let users = r.per_kind[&RegionKind::UserPartition];
        assert_eq!(users.chips, 3_750_000_000);
        assert_eq!(users.logical, 1_250_000);
        assert_eq!(r.per_kind[&RegionKind::Scratch].chips, 3_750_000_000);
    }

    #[test]
    fn single_region_and_empty_reports() {
        let global = LatticeDims::planar(20, 40).unwrap();
        let mut layout = PartitionLayout::empty(global);
        let empty = mainframe_report(&layout, &ChipCostModel::default(), &OperationsBudget::default());
        assert_eq!((empty.chips_total, empty.logical_total, empty.users), (0, 0, 0));
        layout.regions.push(Region::new(
            RegionId(0),
            RegionKind::UserPartition,
            CellCoord::planar(0, 0),
            global,
        ));
        let r = mainframe_report(&layout, &ChipCostModel::default(), &OperationsBudget::default());
        assert_eq!((r.chips_total, r.logical_total), (3000, 1));
    }
}
