use std::collections::HashMap;
use std::fmt::Write as _;

use rand::Rng;

use super::StabilizerError;
use crate::geometry::{CellCoord, LatticeDims};
use crate::gf2::{BitMatrix, BitVec};

/// Default cap on qubits routed to a tableau.
pub const DEFAULT_SIMULATION_CAP: usize = 4096;

/// Simple undirected graph stored as a symmetric GF(2) adjacency matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GraphAdjacency {
    adj: Vec<BitVec>,
    coords: Option<Vec<CellCoord>>,
    dims: Option<LatticeDims>,
}

impl GraphAdjacency {
    pub fn empty(vertex_count: usize) -> Self {
        Self {
            adj: vec![BitVec::zeros(vertex_count); vertex_count],
            coords: None,
            dims: None,
        }
    }

    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, StabilizerError> {
        let mut g = Self::empty(vertex_count);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), StabilizerError> {
        let n = self.vertex_count();
        if u >= n || v >= n || u == v {
            return Err(StabilizerError::InvalidEdge { u, v, n });
        }
        self.adj[u].set(v, true);
        self.adj[v].set(u, true);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u].set(v, false);
        self.adj[v].set(u, false);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].get(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter_ones()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones()
    }

    pub fn adjacency_row(&self, v: usize) -> &BitVec {
        &self.adj[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BitVec::count_ones).sum::<usize>() / 2
    }

    /// Edges with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|u| self.neighbors(u).filter(move |&v| v > u).map(move |v| (u, v)))
            .collect()
    }

    /// Drop every edge touching `v`; the vertex itself stays.
    pub fn isolate(&mut self, v: usize) {
        let nbrs: Vec<usize> = self.neighbors(v).collect();
        for u in nbrs {
            self.remove_edge(u, v);
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.vertex_count()).all(|u| {
            !self.adj[u].get(u) && self.neighbors(u).all(|v| self.adj[v].get(u))
        })
    }

    pub fn coord(&self, v: usize) -> Option<CellCoord> {
        self.coords.as_ref().map(|c| c[v])
    }

    pub fn lattice_dims(&self) -> Option<LatticeDims> {
        self.dims
    }

    /// Vertex sitting at `cell` for lattice-derived graphs.
    pub fn vertex_at(&self, cell: CellCoord) -> Option<usize> {
        let dims = self.dims?;
        dims.linear_index(cell).map(|i| i as usize)
    }

    /// Parses the plain-text fixture format: one `u v` edge per line,
    /// zero-based. Blank lines and `#` comments are ignored. The vertex count
    /// is `vertex_count` when given, otherwise one more than the largest
    /// index mentioned.
    pub fn from_edge_list(text: &str, vertex_count: Option<usize>) -> Result<Self, StabilizerError> {
        let mut edges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: &str| StabilizerError::EdgeListParse {
                line: i + 1,
                message: message.to_string(),
            };
            let mut parts = line.split_whitespace();
            let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad("expected `u v`"));
            };
            let u: usize = u.parse().map_err(|_| bad("vertex is not an unsigned integer"))?;
            let v: usize = v.parse().map_err(|_| bad("vertex is not an unsigned integer"))?;
            edges.push((u, v));
        }
        let n = vertex_count
            .unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
        Self::from_edges(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Erdos-Renyi graph with edge probability `p`.
    pub fn random<R: Rng + ?Sized>(vertex_count: usize, p: f64, rng: &mut R) -> Self {
        let mut g = Self::empty(vertex_count);
        for u in 0..vertex_count {
            for v in u + 1..vertex_count {
                if rng.random_bool(p) {
                    g.adj[u].set(v, true);
                    g.adj[v].set(u, true);
                }
            }
        }
        g
    }
}

/// Cubic lattice graph: one vertex per cell, edges between 6-connected
/// neighbors. Vertex `i` is the cell with row-major linear index `i`.
pub fn lattice_graph(dims: LatticeDims, cap: usize) -> Result<GraphAdjacency, StabilizerError> {
    let cells = dims.cell_count();
    if cells > cap as u128 {
        return Err(StabilizerError::SimulationCapExceeded { cells, cap });
    }
    let (w, d, l) = (dims.width(), dims.depth(), dims.layers());
    let mut g = GraphAdjacency::empty(cells as usize);
    let mut coords = Vec::with_capacity(cells as usize);
    let index = |x: u64, y: u64, z: u64| ((z * d + y) * w + x) as usize;
    for z in 0..l {
        for y in 0..d {
            for x in 0..w {
                coords.push(CellCoord::new(x, y, z));
                let v = index(x, y, z);
                if x + 1 < w {
                    g.add_edge(v, index(x + 1, y, z))?;
                }
                if y + 1 < d {
                    g.add_edge(v, index(x, y + 1, z))?;
                }
                if z + 1 < l {
                    g.add_edge(v, index(x, y, z + 1))?;
                }
            }
        }
    }
    g.coords = Some(coords);
    g.dims = Some(dims);
    Ok(g)
}

/// GF(2) rank of the adjacency block between `subset` and its complement.
pub fn cut_rank(graph: &GraphAdjacency, subset: &[usize]) -> usize {
    let n = graph.vertex_count();
    let mut inside = vec![false; n];
    for &v in subset {
        inside[v] = true;
    }
    let rows: Vec<usize> = (0..n).filter(|&v| inside[v]).collect();
    let cols: Vec<usize> = (0..n).filter(|&v| !inside[v]).collect();
    if rows.is_empty() || cols.is_empty() {
        return 0;
    }
    let block = BitMatrix::from_rows(n, rows.iter().map(|&v| graph.adj[v].clone()).collect());
    block.select(&(0..rows.len()).collect::<Vec<_>>(), &cols).rank()
}

/// Map from cell to vertex for graphs built by [`lattice_graph`].
pub fn cell_index(graph: &GraphAdjacency) -> HashMap<CellCoord, usize> {
    (0..graph.vertex_count())
        .filter_map(|v| graph.coord(v).map(|c| (c, v)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_graph_small_cases() {
        let sq = lattice_graph(LatticeDims::new(2, 2, 1).unwrap(), 4096).unwrap();
        assert_eq!((sq.vertex_count(), sq.edge_count()), (4, 4));
        let cube = lattice_graph(LatticeDims::new(2, 2, 2).unwrap(), 4096).unwrap();
        assert_eq!((cube.vertex_count(), cube.edge_count()), (8, 12));
        let dot = lattice_graph(LatticeDims::new(1, 1, 1).unwrap(), 4096).unwrap();
        assert_eq!((dot.vertex_count(), dot.edge_count()), (1, 0));
        assert!(cube.is_symmetric());
    }

    #[test]
    fn lattice_graph_mapping_is_row_major() {
        let g = lattice_graph(LatticeDims::new(3, 2, 2).unwrap(), 4096).unwrap();
        assert_eq!(g.coord(0), Some(CellCoord::new(0, 0, 0)));
        assert_eq!(g.coord(1), Some(CellCoord::new(1, 0, 0)));
        assert_eq!(g.coord(3), Some(CellCoord::new(0, 1, 0)));
        assert_eq!(g.coord(6), Some(CellCoord::new(0, 0, 1)));
        for v in 0..g.vertex_count() {
            assert_eq!(g.vertex_at(g.coord(v).unwrap()), Some(v));
        }
    }

    #[test]
    fn lattice_graph_respects_cap() {
        let dims = LatticeDims::new(65, 64, 1).unwrap();
        assert!(matches!(
            lattice_graph(dims, DEFAULT_SIMULATION_CAP),
            Err(StabilizerError::SimulationCapExceeded { cells: 4160, cap: 4096 })
        ));
        assert!(lattice_graph(LatticeDims::new(64, 64, 1).unwrap(), 4096).is_ok());
    }

    #[test]
    fn cut_rank_examples() {
        let edge = GraphAdjacency::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(cut_rank(&edge, &[0]), 1);
        let split = GraphAdjacency::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(cut_rank(&split, &[0, 1]), 0);
        // path 0-1-2-3, middle pair {1,2}: block rows 1:{0}, 2:{3} -> rank 2
        let path = GraphAdjacency::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(cut_rank(&path, &[1, 2]), 2);
        assert_eq!(cut_rank(&path, &[]), 0);
        assert_eq!(cut_rank(&path, &[0, 1, 2, 3]), 0);
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let g = GraphAdjacency::from_edge_list("# square\n0 1\n1 3\n\n3 2\n2 0\n", None).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        let again = GraphAdjacency::from_edge_list(&g.to_edge_list(), Some(4)).unwrap();
        assert_eq!(again, g);
        assert!(matches!(
            GraphAdjacency::from_edge_list("0 1\n1 x\n", None),
            Err(StabilizerError::EdgeListParse { line: 2, .. })
        ));
        assert!(GraphAdjacency::from_edge_list("2 2\n", None).is_err());
    }
}
