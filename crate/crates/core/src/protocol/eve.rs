use rand::Rng;

use crate::geometry::CellCoord;
use crate::stabilizer::{
    qubits_for, GraphAdjacency, Outcome, PauliBasis, StabilizerError, StabilizerTableau,
};

/// An eavesdropper on the routing channel. Each tapped qubit gets one fresh
/// probe qubit attached by a controlled-phase link.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EveModel {
    pub tapped: Vec<usize>,
}

impl EveModel {
    pub fn new(tapped: Vec<usize>) -> Self {
        Self { tapped }
    }

    pub fn for_cells(graph: &GraphAdjacency, cells: &[CellCoord]) -> Result<Self, StabilizerError> {
        Ok(Self::new(qubits_for(graph, cells)?))
    }
}

/// The lattice with Eve's probes attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EveTap {
    pub tableau: StabilizerTableau,
    /// Probe qubit for each tapped qubit, in tap order.
    pub probes: Vec<usize>,
}

impl EveTap {
    pub fn measure_probe<R: Rng + ?Sized>(
        &mut self,
        probe: usize,
        basis: PauliBasis,
        rng: &mut R,
    ) -> Result<Outcome, StabilizerError> {
        let q = *self.probes.get(probe).ok_or(StabilizerError::InvalidQubit {
            qubit: probe,
            n: self.probes.len(),
        })?;
        Ok(self.tableau.measure(q, basis, rng)?.outcome)
    }

    /// Eve's probe outcome if it is already fixed.
    pub fn probe_expectation(&self, probe: usize, basis: PauliBasis) -> Result<Option<Outcome>, StabilizerError> {
        let q = *self.probes.get(probe).ok_or(StabilizerError::InvalidQubit {
            qubit: probe,
            n: self.probes.len(),
        })?;
        self.tableau.expectation(q, basis.stand_in())
    }
}

/// Attaches one probe per distinct tapped qubit.
pub fn eve_tap(
    tableau: &StabilizerTableau,
    eve: &EveModel,
    cap: usize,
) -> Result<EveTap, StabilizerError> {
    let n = tableau.qubit_count();
    let mut tapped: Vec<usize> = Vec::with_capacity(eve.tapped.len());
    for &q in &eve.tapped {
        if q >= n {
            return Err(StabilizerError::InvalidQubit { qubit: q, n });
        }
        if !tapped.contains(&q) {
            tapped.push(q);
        }
    }
    if n + tapped.len() > cap {
        return Err(StabilizerError::SimulationCapExceeded {
            cells: (n + tapped.len()) as u128,
            cap,
        });
    }
    let mut extended = tableau.clone();
    if tapped.is_empty() {
        return Ok(EveTap {
            tableau: extended,
            probes: Vec::new(),
        });
    }
    let probes: Vec<usize> = extended.append_plus_qubits(tapped.len()).collect();
    for (&q, &p) in tapped.iter().zip(&probes) {
        extended.cz(q, p)?;
    }
    Ok(EveTap {
        tableau: extended,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::graph_state_tableau;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell() -> StabilizerTableau {
        graph_state_tableau(&GraphAdjacency::from_edges(2, [(0, 1)]).unwrap(), None)
    }

    #[test]
    fn no_taps_no_change() {
        let t = bell();
        let tap = eve_tap(&t, &EveModel::default(), 4096).unwrap();
        assert_eq!(tap.tableau, t);
        assert!(tap.probes.is_empty());
    }

    #[test]
    fn cap_is_enforced() {
        let err = eve_tap(&bell(), &EveModel::new(vec![0, 1]), 3).unwrap_err();
        assert!(matches!(err, StabilizerError::SimulationCapExceeded { cells: 4, cap: 3 }));
    }

    #[test]
    fn probe_on_measured_cell_is_disentangled() {
        let mut t = bell();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        t.measure(0, PauliBasis::Z, &mut rng).unwrap();
        let tap = eve_tap(&t, &EveModel::new(vec![0]), 4096).unwrap();
        let p = tap.probes[0];
        assert_eq!(tap.tableau.entanglement_entropy(&[p]).unwrap(), 0);
        assert!(tap.probe_expectation(0, PauliBasis::X).unwrap().is_some());
    }

    #[test]
    fn probe_on_live_cell_is_entangled() {
        let tap = eve_tap(&bell(), &EveModel::new(vec![0, 0]), 4096).unwrap();
        assert_eq!(tap.probes, vec![2]);
        assert_eq!(tap.tableau.entanglement_entropy(&[2]).unwrap(), 1);
        assert_eq!(tap.probe_expectation(0, PauliBasis::X).unwrap(), None);
    }
}
