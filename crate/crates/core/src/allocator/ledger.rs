use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::{
    tile_count, CellCoord, LatticeDims, LogicalFootprint, PartitionLayout, Region, RegionId,
    RegionKind,
};

use super::session::{PersistHandle, SessionId};

/// A user-region slot: column of the layout, then position down the column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlotId {
    pub column: usize,
    pub index: usize,
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.column, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotState {
    Free,
    Occupied(SessionId),
    Persisted(PersistHandle),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceRecord {
    pub handle: PersistHandle,
    pub owner: SessionId,
    pub region: Region,
    pub slots: Vec<SlotId>,
    pub stored_logical: u64,
    /// Every cell is measured once per layer to enact identity operations.
    pub maintenance_cost_per_layer: u128,
    pub created_at_layer: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SlotCounts {
    pub free: usize,
    pub occupied: usize,
    pub persisted: usize,
}

/// Who owns which user-region slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationLedger {
    layout: PartitionLayout,
    columns: Vec<Vec<Region>>,
    slots: Vec<Vec<SlotState>>,
    slot_capacity: u64,
    pub(crate) persisted: BTreeMap<PersistHandle, PersistenceRecord>,
}

impl AllocationLedger {
    /// Slots are the layout's user regions grouped into columns by x origin
    /// and ordered by depth within each column.
    pub fn new(layout: PartitionLayout, footprint: &LogicalFootprint) -> Self {
        let mut by_x: BTreeMap<u64, Vec<Region>> = BTreeMap::new();
        for r in layout.regions_of(RegionKind::UserPartition) {
            by_x.entry(r.origin.x).or_default().push(*r);
        }
        let columns: Vec<Vec<Region>> = by_x
            .into_values()
            .map(|mut c| {
                c.sort_by_key(|r| r.origin.y);
                c
            })
            .collect();
        let slots = columns.iter().map(|c| vec![SlotState::Free; c.len()]).collect();
        let slot_capacity = columns
            .iter()
            .flatten()
            .map(|r| tile_count(r.dims.width(), r.dims.depth(), footprint).unwrap_or(0))
            .min()
            .unwrap_or(0);
        Self {
            layout,
            columns,
            slots,
            slot_capacity,
            persisted: BTreeMap::new(),
        }
    }

    pub fn layout(&self) -> &PartitionLayout {
        &self.layout
    }

    /// Logical qubits one slot holds.
    pub fn slot_capacity(&self) -> u64 {
        self.slot_capacity
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column_len(&self, column: usize) -> usize {
        self.columns.get(column).map_or(0, Vec::len)
    }

    pub fn total_slots(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn state(&self, slot: SlotId) -> Option<SlotState> {
        self.slots.get(slot.column)?.get(slot.index).copied()
    }

    pub(crate) fn set(&mut self, slot: SlotId, state: SlotState) {
        self.slots[slot.column][slot.index] = state;
    }

    pub fn slot_region(&self, slot: SlotId) -> Option<&Region> {
        self.columns.get(slot.column)?.get(slot.index)
    }

    pub fn slot_states(&self) -> impl Iterator<Item = (SlotId, SlotState)> + '_ {
        self.slots.iter().enumerate().flat_map(|(column, col)| {
            col.iter()
                .enumerate()
                .map(move |(index, &s)| (SlotId { column, index }, s))
        })
    }

    pub fn counts(&self) -> SlotCounts {
        let mut c = SlotCounts::default();
        for (_, s) in self.slot_states() {
            match s {
                SlotState::Free => c.free += 1,
                SlotState::Occupied(_) => c.occupied += 1,
                SlotState::Persisted(_) => c.persisted += 1,
            }
        }
        c
    }

    pub fn persisted(&self) -> &BTreeMap<PersistHandle, PersistenceRecord> {
        &self.persisted
    }

    /// Whole slots needed for `logical` qubits; at least one.
    pub fn slots_needed(&self, logical: u64) -> Option<usize> {
        match (logical, self.slot_capacity) {
            (0, _) => Some(1),
            (_, 0) => None,
            (n, cap) => Some(n.div_ceil(cap) as usize),
        }
    }

    fn adjacent(&self, column: usize, index: usize) -> bool {
        let (a, b) = (&self.columns[column][index], &self.columns[column][index + 1]);
        a.y_end() == b.origin.y && a.origin.x == b.origin.x && a.dims.width() == b.dims.width()
    }

    /// Are slots `index..index+len` of `column` depth-adjacent, whatever
    /// their state?
    pub fn contiguous(&self, column: usize, index: usize, len: usize) -> bool {
        len > 0
            && index + len <= self.column_len(column)
            && (index..index + len - 1).all(|i| self.adjacent(column, i))
    }

    /// Is `index..index+len` in `column` a run of free, depth-adjacent slots?
    pub fn run_is_free(&self, column: usize, index: usize, len: usize) -> bool {
        self.contiguous(column, index, len)
            && self.slots[column][index..index + len]
                .iter()
                .all(|s| *s == SlotState::Free)
    }

    /// Lowest column, then lowest index, with `len` free contiguous slots.
    pub fn find_free_run(&self, len: usize) -> Option<SlotId> {
        (0..self.columns.len()).find_map(|column| {
            (0..self.column_len(column))
                .find(|&index| self.run_is_free(column, index, len))
                .map(|index| SlotId { column, index })
        })
    }

    /// Bounding region of consecutive slots `start..start+len` in one column.
    pub fn span_region(&self, start: SlotId, len: usize, id: RegionId) -> Region {
        let first = &self.columns[start.column][start.index];
        let last = &self.columns[start.column][start.index + len - 1];
        let depth = last.y_end() - first.origin.y;
        Region::new(
            id,
            RegionKind::UserPartition,
            CellCoord::new(first.origin.x, first.origin.y, first.origin.z),
            LatticeDims::new(first.dims.width(), depth, first.dims.layers())
                .expect("slot spans are non-empty"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_layout;

    fn paper() -> AllocationLedger {
        let layout = build_layout(1000, LatticeDims::planar(1000, 1000).unwrap(), 2, 500).unwrap();
        AllocationLedger::new(layout, &LogicalFootprint::default())
    }

    #[test]
    fn paper_slots() {
        let l = paper();
        assert_eq!(l.column_count(), 2);
        assert_eq!(l.total_slots(), 1000);
        assert_eq!(l.slot_capacity(), 1250);
        assert_eq!(l.slots_needed(1250), Some(1));
        assert_eq!(l.slots_needed(1251), Some(2));
        assert_eq!(l.slots_needed(0), Some(1));
        assert_eq!(l.find_free_run(2), Some(SlotId { column: 0, index: 0 }));
    }

    #[test]
    fn span_covers_consecutive_slots() {
        let l = paper();
        let r = l.span_region(SlotId { column: 1, index: 3 }, 2, RegionId(99));
        assert_eq!(r.origin, CellCoord::planar(3000, 3000));
        assert_eq!((r.dims.width(), r.dims.depth()), (1000, 2000));
    }
}
