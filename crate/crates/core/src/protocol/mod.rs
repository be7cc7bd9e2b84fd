//! The two ways a user drives the mainframe, and what crosses the wire.
//!
//! In the trusted model the user sends a classical measurement stream and the
//! mainframe measures. In the secure model the mainframe routes the photons of
//! a severed partition to the user together with the eigenvalue record of its
//! preparation, and the user measures locally.

mod codec;
mod eve;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocator::MainframeError;
use crate::geometry::{CellCoord, Region};
use crate::stabilizer::{
    graph_state_tableau, GraphAdjacency, Outcome, StabilizerTableau,
};

pub use codec::{
    basis_code, basis_from_code, decode_stream, encode_stream, CodecError, EigenvalueRecord,
    MeasurementInstruction, PhotonStreamDescriptor, DESCRIPTOR_HEADER, EIGENVALUE_HEADER,
    STREAM_HEADER,
};
pub use eve::{eve_tap, EveModel, EveTap};

/// Graph state whose generator signs are drawn uniformly from `{+1, -1}`.
pub fn prepare_with_random_eigenvalues(
    graph: &GraphAdjacency,
    seed: u64,
) -> (StabilizerTableau, EigenvalueRecord) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let negative: Vec<bool> = (0..graph.vertex_count()).map(|_| rng.random()).collect();
    let record = EigenvalueRecord::from_signs(negative.iter().map(|&n| Outcome::from_negative(n)));
    (graph_state_tableau(graph, Some(&negative)), record)
}

/// A severed partition as held by a secure user.
///
/// Only the partition's qubits are addressable. The eigenvalue record is
/// indexed by emission order within the partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutedPartition {
    pub descriptor: PhotonStreamDescriptor,
    pub record: EigenvalueRecord,
    region: Region,
    tableau: StabilizerTableau,
    qubits: Vec<usize>,
}

impl RoutedPartition {
    pub(crate) fn new(
        region: Region,
        tableau: StabilizerTableau,
        graph: &GraphAdjacency,
        frame: &[bool],
    ) -> Result<Self, MainframeError> {
        let qubits = crate::stabilizer::qubits_for(graph, &region.cells().collect::<Vec<_>>())?;
        let record =
            EigenvalueRecord::from_signs(qubits.iter().map(|&q| Outcome::from_negative(frame[q])));
        Ok(Self {
            descriptor: PhotonStreamDescriptor::for_region(&region),
            record,
            region,
            tableau,
            qubits,
        })
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.tableau
    }

    /// Position of `cell` in the emission order.
    pub fn local_index(&self, cell: CellCoord) -> Option<usize> {
        let r = &self.region;
        if !r.contains(cell) {
            return None;
        }
        let (w, d) = (r.dims.width(), r.dims.depth());
        let i = ((cell.z - r.origin.z) * d + (cell.y - r.origin.y)) * w + (cell.x - r.origin.x);
        Some(i as usize)
    }

    /// Tableau qubit holding `cell`.
    pub fn qubit_of(&self, cell: CellCoord) -> Option<usize> {
        self.local_index(cell).map(|i| self.qubits[i])
    }
}

/// Measures `instructions` on a routed partition, interpreting outcomes
/// against `record`. The whole stream is validated before any measurement.
pub fn run_secure_with_record<R: Rng + ?Sized>(
    partition: &mut RoutedPartition,
    record: &EigenvalueRecord,
    instructions: &[MeasurementInstruction],
    rng: &mut R,
) -> Result<Vec<Outcome>, MainframeError> {
    let mut targets = Vec::with_capacity(instructions.len());
    for (index, ins) in instructions.iter().enumerate() {
        let local = partition
            .local_index(ins.cell)
            .ok_or(MainframeError::OutOfRegion { index, cell: ins.cell })?;
        targets.push(local);
    }
    let frame = record.negative_flags(partition.qubits.len());
    let mut outcomes = Vec::with_capacity(instructions.len());
    for (ins, local) in instructions.iter().zip(targets) {
        let q = partition.qubits[local];
        let (_, corrected) = partition.tableau.measure_in_frame(q, ins.basis, frame[local], rng)?;
        outcomes.push(corrected);
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LatticeDims;
    use crate::stabilizer::lattice_graph;

    #[test]
    fn preparation_is_seeded() {
        let g = GraphAdjacency::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (t1, r1) = prepare_with_random_eigenvalues(&g, 11);
        let (t2, r2) = prepare_with_random_eigenvalues(&g, 11);
        assert_eq!(r1, r2);
        assert_eq!(t1, t2);
        assert_eq!(r1.len(), 4);
        let flags = r1.negative_flags(4);
        assert_eq!(t1, graph_state_tableau(&g, Some(&flags)));
    }

    #[test]
    fn all_plus_record_is_default_state() {
        let g = GraphAdjacency::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let rec = EigenvalueRecord::all_plus(3);
        assert_eq!(
            graph_state_tableau(&g, Some(&rec.negative_flags(3))),
            graph_state_tableau(&g, None)
        );
    }

    #[test]
    fn local_indices_follow_emission_order() {
        let dims = LatticeDims::new(4, 4, 2).unwrap();
        let g = lattice_graph(dims, 4096).unwrap();
        let region = Region::new(
            crate::geometry::RegionId(0),
            crate::geometry::RegionKind::UserPartition,
            CellCoord::new(1, 1, 0),
            LatticeDims::new(2, 2, 2).unwrap(),
        );
        let n = g.vertex_count();
        let p = RoutedPartition::new(region, graph_state_tableau(&g, None), &g, &vec![false; n])
            .unwrap();
        for (i, c) in p.descriptor.emission_order().enumerate() {
            assert_eq!(p.local_index(c), Some(i));
            assert_eq!(p.qubit_of(c), g.vertex_at(c));
        }
        assert_eq!(p.local_index(CellCoord::new(0, 0, 0)), None);
        assert_eq!(p.record.len(), 8);
    }
}
