use std::collections::HashSet;
use std::fmt;

use crate::geometry::{CellCoord, LatticeDims, PartitionLayout, Region, RegionId, RegionKind};

use super::session::SessionId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorridorId(pub u64);

impl fmt::Display for CorridorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A one-cell-wide path through scratch joining two user regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corridor {
    pub id: CorridorId,
    pub sessions: (SessionId, SessionId),
    /// Boundary cell of each region left linked to the path.
    pub retained: (CellCoord, CellCoord),
    /// Scratch cells from the first session's side to the second's.
    pub path: Vec<CellCoord>,
    pub segments: Vec<Region>,
}

impl Corridor {
    pub fn involves(&self, session: SessionId) -> bool {
        self.sessions.0 == session || self.sessions.1 == session
    }

    pub fn partner_of(&self, session: SessionId) -> Option<SessionId> {
        if self.sessions.0 == session {
            Some(self.sessions.1)
        } else if self.sessions.1 == session {
            Some(self.sessions.0)
        } else {
            None
        }
    }
}

/// Column of `region` facing the scratch block, and the scratch column next
/// to it.
fn scratch_side(region: &Region, scratch: &Region) -> Option<(u64, u64)> {
    if region.x_end() == scratch.origin.x {
        Some((region.x_end() - 1, scratch.origin.x))
    } else if region.origin.x == scratch.x_end() {
        Some((region.origin.x, scratch.x_end() - 1))
    } else {
        None
    }
}

/// Rows of `region` whose scratch-side edge cell has an interior neighbor.
fn link_rows(region: &Region, scratch: &Region) -> std::ops::Range<u64> {
    if region.dims.width() < 3 || region.dims.depth() < 3 {
        return 0..0;
    }
    let lo = (region.origin.y + 1).max(scratch.origin.y);
    let hi = (region.y_end() - 1).min(scratch.y_end());
    lo..hi.max(lo)
}

fn span(a: u64, b: u64) -> Box<dyn Iterator<Item = u64>> {
    if a <= b {
        Box::new(a..=b)
    } else {
        Box::new((b..=a).rev())
    }
}

fn l_path(x0: u64, ya: u64, xc: u64, yb: u64, x1: u64, z: u64) -> Vec<CellCoord> {
    let mut cells: Vec<CellCoord> = span(x0, xc).map(|x| CellCoord::new(x, ya, z)).collect();
    cells.extend(span(ya, yb).skip(1).map(|y| CellCoord::new(xc, y, z)));
    cells.extend(span(xc, x1).skip(1).map(|x| CellCoord::new(x, yb, z)));
    cells
}

pub(crate) struct PlannedPath {
    pub retained: (CellCoord, CellCoord),
    pub path: Vec<CellCoord>,
}

/// First free path in the order: row on `a`, row on `b`, turning column,
/// each lowest first.
pub(crate) fn plan_path(
    layout: &PartitionLayout,
    a: &Region,
    b: &Region,
    taken: &HashSet<(u64, u64)>,
) -> Option<PlannedPath> {
    let scratch = layout.regions_of(RegionKind::Scratch).find(|s| {
        scratch_side(a, s).is_some() && scratch_side(b, s).is_some()
    })?;
    let (ea, sa) = scratch_side(a, scratch)?;
    let (eb, sb) = scratch_side(b, scratch)?;
    let z = a.origin.z;
    for ya in link_rows(a, scratch) {
        for yb in link_rows(b, scratch) {
            for xc in scratch.origin.x..scratch.x_end() {
                let path = l_path(sa, ya, xc, yb, sb, z);
                if path.iter().all(|c| !taken.contains(&(c.x, c.y))) {
                    return Some(PlannedPath {
                        retained: (CellCoord::new(ea, ya, z), CellCoord::new(eb, yb, z)),
                        path,
                    });
                }
            }
        }
    }
    None
}

/// Splits a path into maximal straight runs.
pub(crate) fn segments(path: &[CellCoord], first_id: u32) -> Vec<Region> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < path.len() {
        let mut end = start + 1;
        if end < path.len() {
            let horizontal = path[end].y == path[start].y;
            while end < path.len()
                && if horizontal {
                    path[end].y == path[start].y
                } else {
                    path[end].x == path[start].x
                }
            {
                end += 1;
            }
        }
        let run = &path[start..end];
        let x0 = run.iter().map(|c| c.x).min().unwrap_or(0);
        let x1 = run.iter().map(|c| c.x).max().unwrap_or(0);
        let y0 = run.iter().map(|c| c.y).min().unwrap_or(0);
        let y1 = run.iter().map(|c| c.y).max().unwrap_or(0);
        out.push(Region::new(
            RegionId(first_id + out.len() as u32),
            RegionKind::Corridor,
            CellCoord::new(x0, y0, path[start].z),
            LatticeDims::new(x1 - x0 + 1, y1 - y0 + 1, 1).expect("non-empty run"),
        ));
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_layout;

    fn desk() -> PartitionLayout {
        build_layout(4, LatticeDims::planar(4, 4).unwrap(), 1, 2).unwrap()
    }

    #[test]
    fn straight_across() {
        let l = desk();
        let a = l.regions[0];
        let b = l.regions[2];
        let p = plan_path(&l, &a, &b, &HashSet::new()).unwrap();
        assert_eq!(p.retained, (CellCoord::planar(3, 1), CellCoord::planar(8, 1)));
        assert_eq!(p.path, (4..8).map(|x| CellCoord::planar(x, 1)).collect::<Vec<_>>());
        assert_eq!(segments(&p.path, 0).len(), 1);
    }

    #[test]
    fn same_column_turns() {
        let l = desk();
        let p = plan_path(&l, &l.regions[0], &l.regions[1], &HashSet::new()).unwrap();
        assert_eq!(p.retained, (CellCoord::planar(3, 1), CellCoord::planar(3, 5)));
        assert_eq!(p.path.len(), 5);
        assert!(p.path.iter().all(|c| c.x == 4));
    }

    #[test]
    fn exhausts() {
        let l = desk();
        let (a, b) = (l.regions[0], l.regions[2]);
        let mut taken = HashSet::new();
        let mut n = 0;
        while let Some(p) = plan_path(&l, &a, &b, &taken) {
            taken.extend(p.path.iter().map(|c| (c.x, c.y)));
            n += 1;
        }
        assert_eq!(n, 2);
    }

    #[test]
    fn l_shaped_segments() {
        let path = l_path(4, 1, 6, 3, 7, 0);
        let segs = segments(&path, 10);
        assert_eq!(segs.len(), 3);
        let total: u128 = segs.iter().map(|r| r.dims.area()).sum();
        assert_eq!(total as usize, path.len());
    }
}
