//! Stabilizer tableau with destabilizers, after Aaronson and Gottesman.
//!
//! Rows `0..n` are destabilizers and rows `n..2n` the stabilizer generators.
//! Only stabilizer signs carry physical meaning; destabilizer signs are kept
//! up to date under gates but may be arbitrary after a measurement.

use std::ops::Range;

use rand::Rng;

use super::graph::GraphAdjacency;
use super::pauli::{Outcome, Pauli, PauliBasis, PauliString};
use super::StabilizerError;
use crate::gf2::{BitMatrix, BitVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementEvent {
    pub qubit: usize,
    pub basis: PauliBasis,
    /// Physical eigenvalue observed on the tableau state.
    pub outcome: Outcome,
    pub deterministic: bool,
    /// The basis stood in for a distilled non-Clifford ancilla.
    pub nonclifford_consumed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeasurementRecord {
    events: Vec<MeasurementEvent>,
}

impl MeasurementRecord {
    pub fn push(&mut self, event: MeasurementEvent) {
        self.events.push(event);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> &[MeasurementEvent] {
        &self.events
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MeasurementEvent> {
        self.events.iter()
    }

    pub fn outcomes(&self) -> Vec<Outcome> {
        self.events.iter().map(|e| e.outcome).collect()
    }
}

impl FromIterator<MeasurementEvent> for MeasurementRecord {
    fn from_iter<T: IntoIterator<Item = MeasurementEvent>>(iter: T) -> Self {
        Self {
            events: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a MeasurementRecord {
    type Item = &'a MeasurementEvent;
    type IntoIter = std::slice::Iter<'a, MeasurementEvent>;

    fn into_iter(self) -> Self::IntoIter {
        self.events.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    rows: Vec<PauliString>,
    measured: BitVec,
    record: MeasurementRecord,
}

/// Graph state with generators `K_v = X_v prod_{u in N(v)} Z_u`.
///
/// `negative_signs[v]` flips the sign of `K_v`; `None` means all `+1`.
pub fn graph_state_tableau(
    graph: &GraphAdjacency,
    negative_signs: Option<&[bool]>,
) -> StabilizerTableau {
    let n = graph.vertex_count();
    if let Some(signs) = negative_signs {
        assert_eq!(signs.len(), n, "one sign per vertex");
    }
    let mut rows = Vec::with_capacity(2 * n);
    for v in 0..n {
        rows.push(PauliString::single(n, v, Pauli::Z));
    }
    for v in 0..n {
        let mut k = PauliString::single(n, v, Pauli::X);
        k.z = graph.adjacency_row(v).clone();
        k.negative = negative_signs.is_some_and(|s| s[v]);
        rows.push(k);
    }
    StabilizerTableau {
        n,
        rows,
        measured: BitVec::zeros(n),
        record: MeasurementRecord::default(),
    }
}

impl StabilizerTableau {
    /// `|+>^n`.
    pub fn plus_state(n: usize) -> Self {
        graph_state_tableau(&GraphAdjacency::empty(n), None)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    pub fn record(&self) -> &MeasurementRecord {
        &self.record
    }

    pub fn is_measured(&self, qubit: usize) -> bool {
        qubit < self.n && self.measured.get(qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), StabilizerError> {
        if qubit >= self.n {
            Err(StabilizerError::InvalidQubit { qubit, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Measures `basis` on `qubit`, drawing random outcomes from `rng`.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        basis: PauliBasis,
        rng: &mut R,
    ) -> Result<MeasurementEvent, StabilizerError> {
        self.measure_with(qubit, basis, || rng.random::<bool>())
    }

    /// Measures against a Pauli frame carrying `Z` on `qubit` when `z_frame`
    /// is set, i.e. the tableau holds `Z_q |psi>` while the caller reasons
    /// about `|psi>`. Returns the raw event and the frame-corrected outcome.
    ///
    /// Random draws are aligned so that the corrected outcome equals the one
    /// the same `rng` would produce on `|psi>` directly.
    pub fn measure_in_frame<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        basis: PauliBasis,
        z_frame: bool,
        rng: &mut R,
    ) -> Result<(MeasurementEvent, Outcome), StabilizerError> {
        let flip = z_frame && basis.stand_in().anticommutes_with_z();
        let event = self.measure_with(qubit, basis, || rng.random::<bool>() ^ flip)?;
        Ok((event, event.outcome.flipped_if(flip)))
    }

    /// Measurement with a caller-supplied coin for the random branch; the
    /// coin returns `true` for a `-1` outcome and is only called when the
    /// outcome is random.
    pub fn measure_with(
        &mut self,
        qubit: usize,
        basis: PauliBasis,
        coin: impl FnOnce() -> bool,
    ) -> Result<MeasurementEvent, StabilizerError> {
        self.check_qubit(qubit)?;
        let pauli = basis.stand_in();
        let (outcome, deterministic) = self.measure_pauli(qubit, pauli, coin);
        self.measured.set(qubit, true);
        let event = MeasurementEvent {
            qubit,
            basis,
            outcome,
            deterministic,
            nonclifford_consumed: basis.is_nonclifford(),
        };
        self.record.push(event);
        Ok(event)
    }

    fn measure_pauli(
        &mut self,
        qubit: usize,
        pauli: Pauli,
        coin: impl FnOnce() -> bool,
    ) -> (Outcome, bool) {
        let n = self.n;
        let anti = (n..2 * n).find(|&i| self.rows[i].anticommutes_with_single(qubit, pauli));
        match anti {
            Some(p) => {
                let pivot = self.rows[p].clone();
                for i in 0..2 * n {
                    if i != p && self.rows[i].anticommutes_with_single(qubit, pauli) {
                        self.rows[i].left_mul(&pivot);
                    }
                }
                self.rows[p - n] = pivot;
                let negative = coin();
                let mut generator = PauliString::single(n, qubit, pauli);
                generator.negative = negative;
                self.rows[p] = generator;
                (Outcome::from_negative(negative), false)
            }
            None => (self.determined_value(qubit, pauli), true),
        }
    }

    fn determined_value(&self, qubit: usize, pauli: Pauli) -> Outcome {
        let n = self.n;
        let mut acc = PauliString::identity(n);
        for i in 0..n {
            if self.rows[i].anticommutes_with_single(qubit, pauli) {
                acc.left_mul(&self.rows[i + n]);
            }
        }
        debug_assert_eq!(
            acc.get(qubit),
            Some(pauli),
            "deterministic product must equal the measured Pauli"
        );
        Outcome::from_negative(acc.negative)
    }

    /// The outcome of measuring `pauli` on `qubit` if it is determined,
    /// without touching the state.
    pub fn expectation(&self, qubit: usize, pauli: Pauli) -> Result<Option<Outcome>, StabilizerError> {
        self.check_qubit(qubit)?;
        let random = self.stabilizers().iter().any(|s| s.anticommutes_with_single(qubit, pauli));
        Ok((!random).then(|| self.determined_value(qubit, pauli)))
    }

    fn for_each_row(&mut self, mut f: impl FnMut(&mut PauliString)) {
        for row in &mut self.rows {
            f(row);
        }
    }

    pub fn h(&mut self, a: usize) -> Result<(), StabilizerError> {
        self.check_qubit(a)?;
        self.for_each_row(|r| {
            let (x, z) = (r.x.get(a), r.z.get(a));
            r.negative ^= x & z;
            r.x.set(a, z);
            r.z.set(a, x);
        });
        Ok(())
    }

    pub fn s(&mut self, a: usize) -> Result<(), StabilizerError> {
        self.check_qubit(a)?;
        self.for_each_row(|r| {
            let (x, z) = (r.x.get(a), r.z.get(a));
            r.negative ^= x & z;
            r.z.set(a, z ^ x);
        });
        Ok(())
    }

    pub fn cx(&mut self, control: usize, target: usize) -> Result<(), StabilizerError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(StabilizerError::InvalidEdge {
                u: control,
                v: target,
                n: self.n,
            });
        }
        let (a, b) = (control, target);
        self.for_each_row(|r| {
            let (xa, za, xb, zb) = (r.x.get(a), r.z.get(a), r.x.get(b), r.z.get(b));
            r.negative ^= xa & zb & !(xb ^ za);
            r.x.set(b, xb ^ xa);
            r.z.set(a, za ^ zb);
        });
        Ok(())
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<(), StabilizerError> {
        self.h(b)?;
        self.cx(a, b)?;
        self.h(b)
    }

    pub fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) -> Result<(), StabilizerError> {
        self.check_qubit(qubit)?;
        self.for_each_row(|r| {
            r.negative ^= r.anticommutes_with_single(qubit, pauli);
        });
        Ok(())
    }

    /// Z-measures `qubit` and rotates it to `|+>`, cutting every link it had.
    pub fn reset_plus<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        rng: &mut R,
    ) -> Result<MeasurementEvent, StabilizerError> {
        let event = self.measure(qubit, PauliBasis::Z, rng)?;
        if event.outcome.is_minus() {
            self.apply_pauli(qubit, Pauli::X)?;
        }
        self.h(qubit)?;
        self.measured.set(qubit, false);
        Ok(event)
    }

    /// Appends `count` fresh qubits in `|+>` and returns their indices.
    pub fn append_plus_qubits(&mut self, count: usize) -> Range<usize> {
        let old = self.n;
        let n = old + count;
        let mut destab = Vec::with_capacity(n);
        let mut stab = Vec::with_capacity(n);
        for (i, mut row) in std::mem::take(&mut self.rows).into_iter().enumerate() {
            row.x.resize(n);
            row.z.resize(n);
            if i < old {
                destab.push(row);
            } else {
                stab.push(row);
            }
        }
        for q in old..n {
            destab.push(PauliString::single(n, q, Pauli::Z));
            stab.push(PauliString::single(n, q, Pauli::X));
        }
        destab.extend(stab);
        self.rows = destab;
        self.n = n;
        self.measured.resize(n);
        old..n
    }

    /// `|A| - dim(S_A)` in bits, computed as the GF(2) rank of the generators
    /// restricted to the columns of `subset` minus `|A|`.
    pub fn entanglement_entropy(&self, subset: &[usize]) -> Result<usize, StabilizerError> {
        let mut members: Vec<usize> = subset.to_vec();
        members.sort_unstable();
        members.dedup();
        if let Some(&q) = members.iter().find(|&&q| q >= self.n) {
            return Err(StabilizerError::InvalidQubit { qubit: q, n: self.n });
        }
        let k = members.len();
        if k == 0 || k == self.n {
            return Ok(0);
        }
        let rows = self
            .stabilizers()
            .iter()
            .map(|s| {
                let mut v = BitVec::zeros(2 * k);
                for (j, &q) in members.iter().enumerate() {
                    v.set(j, s.x.get(q));
                    v.set(k + j, s.z.get(q));
                }
                v
            })
            .collect();
        Ok(BitMatrix::from_rows(2 * k, rows).rank() - k)
    }

    pub fn is_disentangled(&self, qubit: usize) -> Result<bool, StabilizerError> {
        self.check_qubit(qubit)?;
        Ok(self.entanglement_entropy(&[qubit])? == 0)
    }

    pub fn canonical_form(&self) -> CanonicalForm {
        CanonicalForm::from_generators(self.stabilizers().to_vec())
    }

    /// Checks full rank, pairwise commutation of the generators and the
    /// destabilizer pairing.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.n;
        let stabs = self.stabilizers();
        let destabs = self.destabilizers();
        for i in 0..n {
            for j in i + 1..n {
                if !stabs[i].commutes_with(&stabs[j]) {
                    return Err(format!("generators {i} and {j} anticommute"));
                }
                if !destabs[i].commutes_with(&destabs[j]) {
                    return Err(format!("destabilizers {i} and {j} anticommute"));
                }
            }
            for j in 0..n {
                let pairs = !destabs[i].commutes_with(&stabs[j]);
                if pairs != (i == j) {
                    return Err(format!("destabilizer {i} pairs wrongly with generator {j}"));
                }
            }
        }
        let matrix = BitMatrix::from_rows(
            2 * n,
            stabs
                .iter()
                .map(|s| {
                    let mut v = s.x.clone();
                    v.resize(2 * n);
                    for q in s.z.iter_ones() {
                        v.set(n + q, true);
                    }
                    v
                })
                .collect(),
        );
        if matrix.rank() != n {
            return Err("generators are not independent".into());
        }
        Ok(())
    }
}

/// Stabilizer generators in reduced row-echelon form over the column order
/// `X_1..X_n, Z_1..Z_n`. Two states are equal iff their canonical forms are.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm(Vec<PauliString>);

impl CanonicalForm {
    pub fn from_generators(mut rows: Vec<PauliString>) -> Self {
        let n = rows.first().map_or(0, PauliString::len);
        let bit = |p: &PauliString, col: usize| {
            if col < n {
                p.x.get(col)
            } else {
                p.z.get(col - n)
            }
        };
        let mut next = 0;
        for col in 0..2 * n {
            if next == rows.len() {
                break;
            }
            let Some(p) = (next..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(next, p);
            let pivot = rows[next].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != next && bit(row, col) {
                    row.left_mul(&pivot);
                }
            }
            next += 1;
        }
        rows.retain(|r| !r.is_identity());
        CanonicalForm(rows)
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.0
    }
}
