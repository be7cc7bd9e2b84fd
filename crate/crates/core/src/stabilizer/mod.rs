//! Desk-scale quantum verification engine.
//!
//! Each lattice cell is one qubit on a 6-connected cubic graph. The real
//! topological lattice carries several physical qubits per cell; the severing
//! and sharing properties checked here are generic to graph states, so the
//! simplification keeps instances small without changing what is verified.

mod graph;
pub mod oracle;
mod pauli;
mod tableau;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{boundary_ring, CellCoord, Region};

pub use graph::{cell_index, cut_rank, lattice_graph, GraphAdjacency, DEFAULT_SIMULATION_CAP};
pub use oracle::{oracle_state, Statevector, ORACLE_CAP};
pub use pauli::{Outcome, Pauli, PauliBasis, PauliString};
pub use tableau::{
    graph_state_tableau, CanonicalForm, MeasurementEvent, MeasurementRecord, StabilizerTableau,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabilizerError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    InvalidQubit { qubit: usize, n: usize },
    #[error("invalid edge ({u}, {v}) on {n} vertices")]
    InvalidEdge { u: usize, v: usize, n: usize },
    #[error("{cells} cells exceed the simulation cap of {cap}")]
    SimulationCapExceeded { cells: u128, cap: usize },
    #[error("{n} qubits exceed the oracle cap of {cap}")]
    OracleCapExceeded { n: usize, cap: usize },
    #[error("qubit {qubit} has already been measured")]
    AlreadyMeasured { qubit: usize },
    #[error("cell {0} is not part of the simulated lattice")]
    CellNotSimulated(CellCoord),
    #[error("edge list line {line}: {message}")]
    EdgeListParse { line: usize, message: String },
}

/// Boundary ring of `region` on every layer it spans, layer by layer.
pub fn region_boundary_cells(region: &Region) -> Vec<CellCoord> {
    let ring = boundary_ring(region);
    (region.origin.z..region.z_end())
        .flat_map(|z| ring.iter().map(move |c| CellCoord::new(c.x, c.y, z)))
        .collect()
}

/// Z-measures the boundary ring of `region` on every layer.
///
/// All ring qubits are checked before anything is measured, so an
/// `AlreadyMeasured` error leaves the tableau untouched.
pub fn measure_region_boundary<R: Rng + ?Sized>(
    tableau: &mut StabilizerTableau,
    region: &Region,
    mapping: &GraphAdjacency,
    rng: &mut R,
) -> Result<MeasurementRecord, StabilizerError> {
    let qubits = qubits_for(mapping, &region_boundary_cells(region))?;
    if let Some(&q) = qubits.iter().find(|&&q| tableau.is_measured(q)) {
        return Err(StabilizerError::AlreadyMeasured { qubit: q });
    }
    qubits
        .into_iter()
        .map(|q| tableau.measure(q, PauliBasis::Z, rng))
        .collect()
}

/// Resolves cells to vertex indices of a lattice-derived graph.
pub fn qubits_for(
    mapping: &GraphAdjacency,
    cells: &[CellCoord],
) -> Result<Vec<usize>, StabilizerError> {
    cells
        .iter()
        .map(|&c| mapping.vertex_at(c).ok_or(StabilizerError::CellNotSimulated(c)))
        .collect()
}

/// Qubits of the region's interior (all layers) and of everything outside
/// the region.
pub fn interior_and_exterior(
    region: &Region,
    mapping: &GraphAdjacency,
) -> Result<(Vec<usize>, Vec<usize>), StabilizerError> {
    let interior = qubits_for(mapping, &region.interior_cells())?;
    let exterior = (0..mapping.vertex_count())
        .filter(|&v| mapping.coord(v).is_some_and(|c| !region.contains(c)))
        .collect();
    Ok((interior, exterior))
}

/// Sign corrections that undo the by-product of a Z measurement on `v`:
/// a `-1` outcome flips the generators of `v`'s neighbors, which `Z` on
/// each neighbor restores.
pub fn z_measurement_corrections(graph: &GraphAdjacency, v: usize, outcome: Outcome) -> Vec<usize> {
    if outcome.is_minus() {
        graph.neighbors(v).collect()
    } else {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LatticeDims, RegionId, RegionKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn region(x: u64, y: u64, w: u64, d: u64, layers: u64) -> Region {
        Region::new(
            RegionId(0),
            RegionKind::UserPartition,
            CellCoord::new(x, y, 0),
            LatticeDims::new(w, d, layers).unwrap(),
        )
    }

    #[test]
    fn severing_3x3_inside_5x5() {
        let g = lattice_graph(LatticeDims::new(5, 5, 1).unwrap(), 4096).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = graph_state_tableau(&g, None);
        let r = region(1, 1, 3, 3, 1);
        let record = measure_region_boundary(&mut t, &r, &g, &mut rng).unwrap();
        assert_eq!(record.len(), 8);
        let (interior, exterior) = interior_and_exterior(&r, &g).unwrap();
        assert_eq!(interior.len(), 1);
        assert_eq!(exterior.len(), 16);
        assert_eq!(t.entanglement_entropy(&interior).unwrap(), 0);
        assert!(t.is_disentangled(interior[0]).unwrap());
        // graph-side view: remove the ring and the cut closes
        let mut cut = g.clone();
        for e in record.iter() {
            cut.isolate(e.qubit);
        }
        assert_eq!(cut_rank(&cut, &interior), 0);
    }

    #[test]
    fn severing_whole_lattice_and_repeat() {
        let g = lattice_graph(LatticeDims::new(3, 3, 1).unwrap(), 4096).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = graph_state_tableau(&g, None);
        let r = region(0, 0, 3, 3, 1);
        measure_region_boundary(&mut t, &r, &g, &mut rng).unwrap();
        let (interior, exterior) = interior_and_exterior(&r, &g).unwrap();
        assert!(exterior.is_empty());
        assert_eq!(t.entanglement_entropy(&interior).unwrap(), 0);
        let before = t.clone();
        assert!(matches!(
            measure_region_boundary(&mut t, &r, &g, &mut rng),
            Err(StabilizerError::AlreadyMeasured { .. })
        ));
        assert_eq!(t, before);
    }

    #[test]
    fn interior_vertex_entangled_before_severing() {
        let g = lattice_graph(LatticeDims::new(3, 3, 1).unwrap(), 4096).unwrap();
        let t = graph_state_tableau(&g, None);
        assert!(!t.is_disentangled(4).unwrap());
    }

    #[test]
    fn boundary_cells_cover_every_layer() {
        let cells = region_boundary_cells(&region(0, 0, 3, 3, 2));
        assert_eq!(cells.len(), 16);
        assert_eq!(cells[8].z, 1);
    }

    #[test]
    fn unsimulated_cell_is_rejected() {
        let g = lattice_graph(LatticeDims::new(3, 3, 1).unwrap(), 4096).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut t = graph_state_tableau(&g, None);
        assert!(matches!(
            measure_region_boundary(&mut t, &region(2, 2, 3, 3, 1), &g, &mut rng),
            Err(StabilizerError::CellNotSimulated(_))
        ));
    }
}
