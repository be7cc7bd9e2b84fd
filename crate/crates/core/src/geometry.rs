//! Integer geometry of the global cluster lattice.
//!
//! Cells are addressed zero-based from the lattice corner; `x` runs along the
//! width, `y` along the depth and `z` is the simulated-time layer axis.
//! Partitions only ever cut the x–y cross-section, so every region spans the
//! full set of layers of the lattice it lives in.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("lattice dimensions must all be at least 1 (got {width}x{depth}x{layers})")]
    EmptyDims { width: u64, depth: u64, layers: u64 },
    #[error("footprint {footprint_w}x{footprint_d} does not fit in region {region_w}x{region_d}")]
    FootprintTooLarge {
        footprint_w: u64,
        footprint_d: u64,
        region_w: u64,
        region_d: u64,
    },
    #[error("layout infeasible: {0}")]
    LayoutInfeasible(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CellCoord {
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

impl CellCoord {
    pub const fn new(x: u64, y: u64, z: u64) -> Self {
        Self { x, y, z }
    }

    pub const fn planar(x: u64, y: u64) -> Self {
        Self { x, y, z: 0 }
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// Extent of a lattice or region in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeDims {
    width: u64,
    depth: u64,
    layers: u64,
}

impl LatticeDims {
    pub fn new(width: u64, depth: u64, layers: u64) -> Result<Self, GeometryError> {
        if width == 0 || depth == 0 || layers == 0 {
            return Err(GeometryError::EmptyDims {
                width,
                depth,
                layers,
            });
        }
        Ok(Self {
            width,
            depth,
            layers,
        })
    }

    /// Single-layer dims, the common case for partition geometry.
    pub fn planar(width: u64, depth: u64) -> Result<Self, GeometryError> {
        Self::new(width, depth, 1)
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn layers(&self) -> u64 {
        self.layers
    }

    pub fn with_layers(self, layers: u64) -> Result<Self, GeometryError> {
        Self::new(self.width, self.depth, layers)
    }

    /// Cells in one layer of the cross-section.
    pub fn area(&self) -> u128 {
        self.width as u128 * self.depth as u128
    }

    pub fn cell_count(&self) -> u128 {
        self.area() * self.layers as u128
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        c.x < self.width && c.y < self.depth && c.z < self.layers
    }

    /// Row-major linear index: x fastest, then y, then z.
    pub fn linear_index(&self, c: CellCoord) -> Option<u128> {
        self.contains(c).then(|| {
            (c.z as u128 * self.depth as u128 + c.y as u128) * self.width as u128 + c.x as u128
        })
    }
}

impl fmt::Display for LatticeDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.depth, self.layers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionKind {
    UserPartition,
    Scratch,
    Corridor,
    Unassigned,
}

impl RegionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionKind::UserPartition => "user",
            RegionKind::Scratch => "scratch",
            RegionKind::Corridor => "corridor",
            RegionKind::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId(pub u32);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Axis-aligned box of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub id: RegionId,
    pub kind: RegionKind,
    pub origin: CellCoord,
    pub dims: LatticeDims,
}

impl Region {
    pub fn new(id: RegionId, kind: RegionKind, origin: CellCoord, dims: LatticeDims) -> Self {
        Self {
            id,
            kind,
            origin,
            dims,
        }
    }

    /// One past the last column.
    pub fn x_end(&self) -> u64 {
        self.origin.x + self.dims.width()
    }

    pub fn y_end(&self) -> u64 {
        self.origin.y + self.dims.depth()
    }

    pub fn z_end(&self) -> u64 {
        self.origin.z + self.dims.layers()
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        (self.origin.x..self.x_end()).contains(&c.x)
            && (self.origin.y..self.y_end()).contains(&c.y)
            && (self.origin.z..self.z_end()).contains(&c.z)
    }

    pub fn contains_planar(&self, x: u64, y: u64) -> bool {
        (self.origin.x..self.x_end()).contains(&x) && (self.origin.y..self.y_end()).contains(&y)
    }

    pub fn fits_within(&self, global: &LatticeDims) -> bool {
        self.x_end() <= global.width()
            && self.y_end() <= global.depth()
            && self.z_end() <= global.layers()
    }

    /// True when the x–y footprints share at least one cell.
    pub fn overlaps_planar(&self, other: &Region) -> bool {
        self.origin.x < other.x_end()
            && other.origin.x < self.x_end()
            && self.origin.y < other.y_end()
            && other.origin.y < self.y_end()
    }

    /// True when one full side of `self` lies along a side of `other`.
    pub fn shares_full_edge_with(&self, other: &Region) -> bool {
        let spans_y = other.origin.y <= self.origin.y && self.y_end() <= other.y_end();
        let spans_x = other.origin.x <= self.origin.x && self.x_end() <= other.x_end();
        (spans_y && (other.origin.x == self.x_end() || other.x_end() == self.origin.x))
            || (spans_x && (other.origin.y == self.y_end() || other.y_end() == self.origin.y))
    }

    /// Cells of the region in emission order: layer by layer, each layer
    /// row-major.
    pub fn cells(&self) -> impl Iterator<Item = CellCoord> + '_ {
        (self.origin.z..self.z_end()).flat_map(move |z| {
            (self.origin.y..self.y_end()).flat_map(move |y| {
                (self.origin.x..self.x_end()).map(move |x| CellCoord::new(x, y, z))
            })
        })
    }

    /// Interior cells (every layer) — cells not on the boundary ring.
    pub fn interior_cells(&self) -> Vec<CellCoord> {
        self.cells()
            .filter(|c| {
                c.x > self.origin.x
                    && c.x + 1 < self.x_end()
                    && c.y > self.origin.y
                    && c.y + 1 < self.y_end()
            })
            .collect()
    }
}

/// Cells per layer of the region footprint.
pub fn region_cell_count(region: &Region) -> u128 {
    region.dims.area()
}

/// Cells of the region's first layer whose 4-neighborhood in the x–y plane
/// leaves the region, in row-major order.
pub fn boundary_ring(region: &Region) -> Vec<CellCoord> {
    let (x0, y0, z) = (region.origin.x, region.origin.y, region.origin.z);
    let (x1, y1) = (region.x_end() - 1, region.y_end() - 1);
    let mut ring = Vec::new();
    for y in y0..=y1 {
        if y == y0 || y == y1 {
            ring.extend((x0..=x1).map(|x| CellCoord::new(x, y, z)));
        } else {
            ring.push(CellCoord::new(x0, y, z));
            if x1 != x0 {
                ring.push(CellCoord::new(x1, y, z));
            }
        }
    }
    ring
}

/// Footprint of one logical qubit in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LogicalFootprint {
    width: u64,
    depth: u64,
}

impl LogicalFootprint {
    pub fn new(width: u64, depth: u64) -> Result<Self, GeometryError> {
        if width == 0 || depth == 0 {
            return Err(GeometryError::EmptyDims {
                width,
                depth,
                layers: 1,
            });
        }
        Ok(Self { width, depth })
    }

    pub fn width(&self) -> u64 {
        self.width
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn area(&self) -> u128 {
        self.width as u128 * self.depth as u128
    }
}

impl Default for LogicalFootprint {
    fn default() -> Self {
        Self {
            width: 20,
            depth: 40,
        }
    }
}

impl fmt::Display for LogicalFootprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.depth)
    }
}

/// Number of whole footprint tiles in a `width`×`depth` cross-section.
pub fn tile_count(
    width: u64,
    depth: u64,
    footprint: &LogicalFootprint,
) -> Result<u64, GeometryError> {
    if footprint.width > width || footprint.depth > depth {
        return Err(GeometryError::FootprintTooLarge {
            footprint_w: footprint.width,
            footprint_d: footprint.depth,
            region_w: width,
            region_d: depth,
        });
    }
    Ok((width / footprint.width) * (depth / footprint.depth))
}

/// Row-major grid tiling of the region by whole footprints.
///
/// Tile ids count up from zero in row-major order; tiles inherit the region's
/// layers and kind.
pub fn tile_logical_qubits(
    region: &Region,
    footprint: &LogicalFootprint,
) -> Result<(u64, Vec<Region>), GeometryError> {
    let count = tile_count(region.dims.width(), region.dims.depth(), footprint)?;
    let cols = region.dims.width() / footprint.width;
    let rows = region.dims.depth() / footprint.depth;
    let dims = LatticeDims::new(footprint.width, footprint.depth, region.dims.layers())?;
    let mut tiles = Vec::with_capacity(count as usize);
    for r in 0..rows {
        for c in 0..cols {
            let origin = CellCoord::new(
                region.origin.x + c * footprint.width,
                region.origin.y + r * footprint.depth,
                region.origin.z,
            );
            tiles.push(Region::new(
                RegionId((r * cols + c) as u32),
                region.kind,
                origin,
                dims,
            ));
        }
    }
    Ok((count, tiles))
}

/// The global partition map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLayout {
    pub global: LatticeDims,
    pub regions: Vec<Region>,
    pub user_columns: u64,
    pub users_per_column: u64,
}

impl PartitionLayout {
    /// A layout with no regions at all.
    pub fn empty(global: LatticeDims) -> Self {
        Self {
            global,
            regions: Vec::new(),
            user_columns: 0,
            users_per_column: 0,
        }
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn regions_of(&self, kind: RegionKind) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(move |r| r.kind == kind)
    }

    pub fn user_count(&self) -> usize {
        self.regions_of(RegionKind::UserPartition).count()
    }

    /// Kind of the region covering the planar cell, if any.
    pub fn kind_at(&self, x: u64, y: u64) -> Option<RegionKind> {
        self.regions
            .iter()
            .find(|r| r.contains_planar(x, y))
            .map(|r| r.kind)
    }
}

/// Two user columns flanking a central scratch block.
///
/// User regions get ids `0..user_count`, left column top to bottom first, then
/// the right column; the scratch region takes the next id.
pub fn build_layout(
    user_count: u64,
    user_region: LatticeDims,
    scratch_width_in_user_regions: u64,
    users_per_column: u64,
) -> Result<PartitionLayout, GeometryError> {
    if user_count == 0 || !user_count.is_multiple_of(2) {
        return Err(GeometryError::LayoutInfeasible(format!(
            "user count {user_count} must be even and positive"
        )));
    }
    if users_per_column == 0 || user_count != 2 * users_per_column {
        return Err(GeometryError::LayoutInfeasible(format!(
            "user count {user_count} must equal 2 x users per column ({users_per_column})"
        )));
    }
    if scratch_width_in_user_regions == 0 {
        return Err(GeometryError::LayoutInfeasible(
            "scratch must be at least one user region wide".into(),
        ));
    }
    let uw = user_region.width();
    let ud = user_region.depth();
    let layers = user_region.layers();
    let overflow = || GeometryError::LayoutInfeasible("lattice dimensions overflow".into());
    let width = scratch_width_in_user_regions
        .checked_add(2)
        .and_then(|n| n.checked_mul(uw))
        .ok_or_else(overflow)?;
    let depth = users_per_column.checked_mul(ud).ok_or_else(overflow)?;
    let global = LatticeDims::new(width, depth, layers)?;

    let right_x = (1 + scratch_width_in_user_regions) * uw;
    let mut regions = Vec::with_capacity(user_count as usize + 1);
    for (col, x) in [0, right_x].into_iter().enumerate() {
        for i in 0..users_per_column {
            regions.push(Region::new(
                RegionId((col as u64 * users_per_column + i) as u32),
                RegionKind::UserPartition,
                CellCoord::new(x, i * ud, 0),
                user_region,
            ));
        }
    }
    regions.push(Region::new(
        RegionId(user_count as u32),
        RegionKind::Scratch,
        CellCoord::new(uw, 0, 0),
        LatticeDims::new(scratch_width_in_user_regions * uw, depth, layers)?,
    ));
    Ok(PartitionLayout {
        global,
        regions,
        user_columns: 2,
        users_per_column,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayoutViolation {
    OutOfBounds(RegionId),
    DuplicateId(RegionId),
    Overlap(RegionId, RegionId),
    /// Cells of the cross-section not covered by any region.
    CoverageGap { uncovered_cells: u128 },
    NotAdjacentToScratch(RegionId),
}

impl fmt::Display for LayoutViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutViolation::OutOfBounds(id) => write!(f, "region {id} leaves the lattice"),
            LayoutViolation::DuplicateId(id) => write!(f, "region id {id} used more than once"),
            LayoutViolation::Overlap(a, b) => write!(f, "regions {a} and {b} overlap"),
            LayoutViolation::CoverageGap { uncovered_cells } => {
                write!(f, "{uncovered_cells} cells not covered by any region")
            }
            LayoutViolation::NotAdjacentToScratch(id) => {
                write!(f, "user region {id} shares no full edge with scratch")
            }
        }
    }
}

/// Every violated layout invariant; empty iff the layout is valid.
pub fn validate_layout(layout: &PartitionLayout) -> Vec<LayoutViolation> {
    let mut report = Vec::new();
    let regions = &layout.regions;

    let mut seen = BTreeSet::new();
    for r in regions {
        if !seen.insert(r.id) {
            report.push(LayoutViolation::DuplicateId(r.id));
        }
        if !r.fits_within(&layout.global) {
            report.push(LayoutViolation::OutOfBounds(r.id));
        }
    }

    // regions are planar boxes; sort by x so the scan can stop early
    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by_key(|&i| (regions[i].origin.x, regions[i].origin.y, regions[i].id));
    let mut overlapping = false;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if regions[j].origin.x >= regions[i].x_end() {
                break;
            }
            if regions[i].overlaps_planar(&regions[j]) {
                let (a, b) = if regions[i].id <= regions[j].id {
                    (regions[i].id, regions[j].id)
                } else {
                    (regions[j].id, regions[i].id)
                };
                report.push(LayoutViolation::Overlap(a, b));
                overlapping = true;
            }
        }
    }

    let covered = if overlapping {
        union_area(regions, &layout.global)
    } else {
        regions
            .iter()
            .map(|r| clipped_area(r, &layout.global))
            .sum()
    };
    let total = layout.global.area();
    if covered < total {
        report.push(LayoutViolation::CoverageGap {
            uncovered_cells: total - covered,
        });
    }

    let scratch: Vec<&Region> = layout.regions_of(RegionKind::Scratch).collect();
    for user in layout.regions_of(RegionKind::UserPartition) {
        if !scratch.iter().any(|s| user.shares_full_edge_with(s)) {
            report.push(LayoutViolation::NotAdjacentToScratch(user.id));
        }
    }
    report
}

fn clipped_area(r: &Region, global: &LatticeDims) -> u128 {
    let w = r.x_end().min(global.width()).saturating_sub(r.origin.x);
    let d = r.y_end().min(global.depth()).saturating_sub(r.origin.y);
    w as u128 * d as u128
}

/// Area of the union of planar footprints via coordinate compression.
fn union_area(regions: &[Region], global: &LatticeDims) -> u128 {
    let mut xs: Vec<u64> = vec![0, global.width()];
    let mut ys: Vec<u64> = vec![0, global.depth()];
    for r in regions {
        xs.push(r.origin.x.min(global.width()));
        xs.push(r.x_end().min(global.width()));
        ys.push(r.origin.y.min(global.depth()));
        ys.push(r.y_end().min(global.depth()));
    }
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0u128;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            if regions.iter().any(|r| r.contains_planar(xw[0], yw[0])) {
                area += (xw[1] - xw[0]) as u128 * (yw[1] - yw[0]) as u128;
            }
        }
    }
    area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar_region(x: u64, y: u64, w: u64, d: u64) -> Region {
        Region::new(
            RegionId(0),
            RegionKind::UserPartition,
            CellCoord::planar(x, y),
            LatticeDims::planar(w, d).unwrap(),
        )
    }

    #[test]
    fn cell_counts() {
        assert_eq!(region_cell_count(&planar_region(0, 0, 1000, 1000)), 1_000_000);
        assert_eq!(region_cell_count(&planar_region(0, 0, 20, 40)), 800);
        assert_eq!(region_cell_count(&planar_region(3, 3, 1, 1)), 1);
    }

    #[test]
    fn paper_lattice_cell_count_does_not_overflow() {
        let dims = LatticeDims::new(4000, 500_000, 1_000_000).unwrap();
        assert_eq!(dims.area(), 2_000_000_000);
        assert_eq!(dims.cell_count(), 2_000_000_000_000_000);
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(LatticeDims::new(0, 5, 1).is_err());
        assert!(LogicalFootprint::new(20, 0).is_err());
    }

    #[test]
    fn boundary_rings() {
        let ring = boundary_ring(&planar_region(0, 0, 3, 3));
        assert_eq!(ring.len(), 8);
        assert!(!ring.contains(&CellCoord::planar(1, 1)));
        assert_eq!(boundary_ring(&planar_region(5, 5, 10, 10)).len(), 36);
        assert_eq!(boundary_ring(&planar_region(0, 0, 1, 5)).len(), 5);
        assert_eq!(boundary_ring(&planar_region(0, 0, 5, 1)).len(), 5);
        assert_eq!(boundary_ring(&planar_region(2, 2, 1, 1)), vec![CellCoord::planar(2, 2)]);
    }

    #[test]
    fn boundary_ring_is_row_major() {
        let ring = boundary_ring(&planar_region(1, 1, 3, 3));
        let mut sorted = ring.clone();
        sorted.sort_by_key(|c| (c.y, c.x));
        assert_eq!(ring, sorted);
        assert_eq!(ring[0], CellCoord::planar(1, 1));
    }

    #[test]
    fn tiling() {
        let (n, tiles) =
            tile_logical_qubits(&planar_region(0, 0, 1000, 1000), &LogicalFootprint::default())
                .unwrap();
        assert_eq!(n, 1250);
        assert_eq!(tiles.len(), 1250);
        assert_eq!(tiles[1].origin, CellCoord::planar(20, 0));
        assert_eq!(tiles[50].origin, CellCoord::planar(0, 40));
        let (n, _) =
            tile_logical_qubits(&planar_region(0, 0, 20, 40), &LogicalFootprint::default())
                .unwrap();
        assert_eq!(n, 1);
        assert!(matches!(
            tile_logical_qubits(&planar_region(0, 0, 39, 19), &LogicalFootprint::default()),
            Err(GeometryError::FootprintTooLarge { .. })
        ));
    }

    #[test]
    fn paper_layout_dims() {
        let layout =
            build_layout(1000, LatticeDims::planar(1000, 1000).unwrap(), 2, 500).unwrap();
        assert_eq!(layout.global.width(), 4000);
        assert_eq!(layout.global.depth(), 500_000);
        assert_eq!(layout.user_count(), 1000);
        assert!(validate_layout(&layout).is_empty());
    }

    #[test]
    fn small_layout_and_infeasible_counts() {
        let layout = build_layout(2, LatticeDims::planar(10, 10).unwrap(), 2, 1).unwrap();
        assert_eq!((layout.global.width(), layout.global.depth()), (40, 10));
        assert!(validate_layout(&layout).is_empty());
        assert!(matches!(
            build_layout(3, LatticeDims::planar(10, 10).unwrap(), 2, 1),
            Err(GeometryError::LayoutInfeasible(_))
        ));
        assert!(build_layout(4, LatticeDims::planar(10, 10).unwrap(), 2, 1).is_err());
        assert!(build_layout(2, LatticeDims::planar(10, 10).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn overlap_is_reported_with_both_ids() {
        let global = LatticeDims::planar(10, 10).unwrap();
        let mut a = planar_region(0, 0, 10, 10);
        a.kind = RegionKind::Scratch;
        let mut b = a;
        b.id = RegionId(7);
        let layout = PartitionLayout {
            global,
            regions: vec![a, b],
            user_columns: 0,
            users_per_column: 0,
        };
        let report = validate_layout(&layout);
        assert_eq!(report, vec![LayoutViolation::Overlap(RegionId(0), RegionId(7))]);
    }

    #[test]
    fn unassigned_strip_breaks_adjacency() {
        let global = LatticeDims::planar(21, 10).unwrap();
        let user = Region::new(
            RegionId(0),
            RegionKind::UserPartition,
            CellCoord::planar(0, 0),
            LatticeDims::planar(10, 10).unwrap(),
        );
        let strip = Region::new(
            RegionId(1),
            RegionKind::Unassigned,
            CellCoord::planar(10, 0),
            LatticeDims::planar(1, 10).unwrap(),
        );
        let scratch = Region::new(
            RegionId(2),
            RegionKind::Scratch,
            CellCoord::planar(11, 0),
            LatticeDims::planar(10, 10).unwrap(),
        );
        let layout = PartitionLayout {
            global,
            regions: vec![user, strip, scratch],
            user_columns: 1,
            users_per_column: 1,
        };
        assert_eq!(
            validate_layout(&layout),
            vec![LayoutViolation::NotAdjacentToScratch(RegionId(0))]
        );
    }

    #[test]
    fn coverage_gap_counts_cells() {
        let global = LatticeDims::planar(10, 10).unwrap();
        let mut s = planar_region(0, 0, 10, 9);
        s.kind = RegionKind::Scratch;
        let layout = PartitionLayout {
            global,
            regions: vec![s],
            user_columns: 0,
            users_per_column: 0,
        };
        assert_eq!(
            validate_layout(&layout),
            vec![LayoutViolation::CoverageGap { uncovered_cells: 10 }]
        );
    }

    #[test]
    fn overlapping_regions_do_not_fake_coverage() {
        let global = LatticeDims::planar(4, 4).unwrap();
        let mut a = planar_region(0, 0, 4, 2);
        a.kind = RegionKind::Scratch;
        let mut b = a;
        b.id = RegionId(1);
        let layout = PartitionLayout {
            global,
            regions: vec![a, b],
            user_columns: 0,
            users_per_column: 0,
        };
        let report = validate_layout(&layout);
        assert!(report.contains(&LayoutViolation::CoverageGap { uncovered_cells: 8 }));
    }
}
