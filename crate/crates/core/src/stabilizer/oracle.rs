//! Brute-force statevector oracle for cross-checking the tableau.
//!
//! Nothing here touches the symplectic representation: states are built by
//! explicit Hadamard and controlled-phase action on a `2^n` amplitude vector
//! and measurements are explicit projectors. Basis index bit `n-1-q` holds
//! qubit `q`, so amplitudes are listed in lexicographic Z-basis order with
//! qubit 0 most significant.

use num_complex::Complex64;

use super::graph::GraphAdjacency;
use super::pauli::{Outcome, Pauli};
use super::tableau::MeasurementEvent;
use super::StabilizerError;

/// Qubit cap for [`oracle_state`].
pub const ORACLE_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Graph state built as `prod_edges CZ |+>^n`, then `Z_v` applied for
    /// every vertex whose generator sign is negative.
    pub fn graph_state(
        graph: &GraphAdjacency,
        negative_signs: Option<&[bool]>,
        cap: usize,
    ) -> Result<Self, StabilizerError> {
        let n = graph.vertex_count();
        if n > cap {
            return Err(StabilizerError::OracleCapExceeded { n, cap });
        }
        let dim = 1usize << n;
        let norm = (dim as f64).sqrt().recip();
        let mut sv = Statevector {
            n,
            amps: vec![Complex64::new(norm, 0.0); dim],
        };
        for (u, v) in graph.edges() {
            let (bu, bv) = (sv.bit(u), sv.bit(v));
            for (i, a) in sv.amps.iter_mut().enumerate() {
                if i & bu != 0 && i & bv != 0 {
                    *a = -*a;
                }
            }
        }
        if let Some(signs) = negative_signs {
            for (v, &neg) in signs.iter().enumerate() {
                if neg {
                    sv.apply(v, Pauli::Z);
                }
            }
        }
        Ok(sv)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    /// Applies a single-qubit Pauli.
    pub fn apply(&mut self, q: usize, pauli: Pauli) {
        let b = self.bit(q);
        match pauli {
            Pauli::Z => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & b != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::X | Pauli::Y => {
                // Y|0> = i|1>, Y|1> = -i|0>
                let (to_one, to_zero) = match pauli {
                    Pauli::X => (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)),
                    _ => (Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)),
                };
                for i in 0..self.amps.len() {
                    if i & b == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | b]);
                        self.amps[i | b] = to_one * a0;
                        self.amps[i] = to_zero * a1;
                    }
                }
            }
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn projected(&self, q: usize, pauli: Pauli, outcome: Outcome) -> Vec<Complex64> {
        let mut image = self.clone();
        image.apply(q, pauli);
        let m = outcome.value() as f64;
        self.amps
            .iter()
            .zip(&image.amps)
            .map(|(a, pa)| (a + pa * m) * 0.5)
            .collect()
    }

    /// Born probability of `outcome` for `pauli` on qubit `q`.
    pub fn probability(&self, q: usize, pauli: Pauli, outcome: Outcome) -> f64 {
        self.projected(q, pauli, outcome)
            .iter()
            .map(Complex64::norm_sqr)
            .sum::<f64>()
            / self.norm_sqr()
    }

    /// Projects onto the `outcome` eigenspace and renormalizes. Returns the
    /// probability of the outcome; the state is left untouched when it is 0.
    pub fn project(&mut self, q: usize, pauli: Pauli, outcome: Outcome) -> f64 {
        let before = self.norm_sqr();
        let proj = self.projected(q, pauli, outcome);
        let after: f64 = proj.iter().map(Complex64::norm_sqr).sum();
        let p = after / before;
        if after > 0.0 {
            let scale = after.sqrt().recip();
            self.amps = proj.into_iter().map(|a| a * scale).collect();
        }
        p
    }

    /// `Tr(rho_A^2)` for the reduced state on `subset`.
    pub fn purity(&self, subset: &[usize]) -> f64 {
        let k = subset.len();
        let rest: Vec<usize> = (0..self.n).filter(|q| !subset.contains(q)).collect();
        let split = |i: usize| {
            let a = subset
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &q)| acc | (((i & self.bit(q)) != 0) as usize) << j);
            let b = rest
                .iter()
                .enumerate()
                .fold(0, |acc, (j, &q)| acc | (((i & self.bit(q)) != 0) as usize) << j);
            (a, b)
        };
        let da = 1usize << k;
        let db = 1usize << rest.len();
        let mut m = vec![Complex64::new(0.0, 0.0); da * db];
        for (i, a) in self.amps.iter().enumerate() {
            let (ia, ib) = split(i);
            m[ia * db + ib] = *a;
        }
        let norm = self.norm_sqr();
        let mut purity = 0.0;
        for r in 0..da {
            for c in 0..da {
                let rho: Complex64 = (0..db).map(|j| m[r * db + j] * m[c * db + j].conj()).sum();
                purity += rho.norm_sqr();
            }
        }
        purity / (norm * norm)
    }

    /// Entropy in bits, assuming a stabilizer state (purity `2^-S`).
    pub fn stabilizer_entropy(&self, subset: &[usize]) -> usize {
        (-self.purity(subset).log2()).round() as usize
    }
}

/// Builds the graph state and replays the recorded measurements as
/// projectors with their recorded outcomes.
pub fn oracle_state(
    graph: &GraphAdjacency,
    measurements: &[MeasurementEvent],
) -> Result<Vec<Complex64>, StabilizerError> {
    let mut sv = Statevector::graph_state(graph, None, ORACLE_CAP)?;
    for e in measurements {
        sv.project(e.qubit, e.basis.stand_in(), e.outcome);
    }
    Ok(sv.amps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[Complex64], b: &[f64]) -> bool {
        a.len() == b.len()
            && a.iter().zip(b).all(|(x, &y)| (x.re - y).abs() < 1e-12 && x.im.abs() < 1e-12)
    }

    #[test]
    fn empty_pair_is_uniform() {
        let amps = oracle_state(&GraphAdjacency::empty(2), &[]).unwrap();
        assert!(close(&amps, &[0.5; 4]));
    }

    #[test]
    fn single_edge_amplitudes() {
        let g = GraphAdjacency::from_edges(2, [(0, 1)]).unwrap();
        let amps = oracle_state(&g, &[]).unwrap();
        assert!(close(&amps, &[0.5, 0.5, 0.5, -0.5]));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            oracle_state(&GraphAdjacency::empty(15), &[]),
            Err(StabilizerError::OracleCapExceeded { n: 15, cap: 14 })
        ));
    }

    #[test]
    fn pauli_action() {
        let mut sv = Statevector::graph_state(&GraphAdjacency::empty(1), None, 1).unwrap();
        assert!((sv.probability(0, Pauli::X, Outcome::Plus) - 1.0).abs() < 1e-12);
        assert!((sv.probability(0, Pauli::Z, Outcome::Minus) - 0.5).abs() < 1e-12);
        assert!((sv.probability(0, Pauli::Y, Outcome::Plus) - 0.5).abs() < 1e-12);
        let p = sv.project(0, Pauli::Z, Outcome::Minus);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((sv.probability(0, Pauli::Z, Outcome::Minus) - 1.0).abs() < 1e-12);
        sv.apply(0, Pauli::Y);
        assert!((sv.probability(0, Pauli::Z, Outcome::Plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purity_of_bell_half() {
        let g = GraphAdjacency::from_edges(3, [(0, 1)]).unwrap();
        let sv = Statevector::graph_state(&g, None, 3).unwrap();
        assert!((sv.purity(&[0]) - 0.5).abs() < 1e-12);
        assert_eq!(sv.stabilizer_entropy(&[0]), 1);
        assert_eq!(sv.stabilizer_entropy(&[2]), 0);
        assert_eq!(sv.stabilizer_entropy(&[0, 1]), 0);
    }
}
