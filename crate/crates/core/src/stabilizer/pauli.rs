use std::fmt;

use crate::gf2::BitVec;

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Does this Pauli anticommute with `Z` on the same qubit?
    pub fn anticommutes_with_z(self) -> bool {
        !matches!(self, Pauli::Z)
    }
}

/// Measurement basis requested by a user.
///
/// `AncillaA` and `AncillaY` stand for measurements that consume a distilled
/// `|A>` or `|Y>` ancilla. They are not Clifford operations, so the tableau
/// executes them as `Y` and `Z` respectively and the record flags them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliBasis {
    X,
    Y,
    Z,
    AncillaA,
    AncillaY,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 5] = [
        PauliBasis::X,
        PauliBasis::Y,
        PauliBasis::Z,
        PauliBasis::AncillaA,
        PauliBasis::AncillaY,
    ];

    pub fn stand_in(self) -> Pauli {
        match self {
            PauliBasis::X => Pauli::X,
            PauliBasis::Y | PauliBasis::AncillaA => Pauli::Y,
            PauliBasis::Z | PauliBasis::AncillaY => Pauli::Z,
        }
    }

    pub fn is_nonclifford(self) -> bool {
        matches!(self, PauliBasis::AncillaA | PauliBasis::AncillaY)
    }
}

impl From<Pauli> for PauliBasis {
    fn from(p: Pauli) -> Self {
        match p {
            Pauli::X => PauliBasis::X,
            Pauli::Y => PauliBasis::Y,
            Pauli::Z => PauliBasis::Z,
        }
    }
}

/// Eigenvalue of a single-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn from_negative(negative: bool) -> Self {
        if negative {
            Outcome::Minus
        } else {
            Outcome::Plus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Outcome::Minus
    }

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn flipped_if(self, flip: bool) -> Self {
        Self::from_negative(self.is_minus() ^ flip)
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Plus => '+',
            Outcome::Minus => '-',
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Hermitian Pauli string `(-1)^negative * prod_j P_j` in symplectic form.
///
/// A qubit with both `x` and `z` set carries `Y`, not `XZ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    pub x: BitVec,
    pub z: BitVec,
    pub negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
            negative: false,
        }
    }

    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Self {
        let mut p = Self::identity(n);
        p.set(qubit, Some(pauli));
        p
    }

    /// Parses strings like `+XZ_I`, `-YY`; `_` and `I` are identities.
    pub fn parse(s: &str) -> Option<Self> {
        let (negative, body) = match s.as_bytes().first()? {
            b'+' => (false, &s[1..]),
            b'-' => (true, &s[1..]),
            _ => (false, s),
        };
        let mut p = Self::identity(body.len());
        p.negative = negative;
        for (q, ch) in body.chars().enumerate() {
            let op = match ch {
                'I' | '_' => None,
                'X' => Some(Pauli::X),
                'Y' => Some(Pauli::Y),
                'Z' => Some(Pauli::Z),
                _ => return None,
            };
            p.set(q, op);
        }
        Some(p)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        match (self.x.get(qubit), self.z.get(qubit)) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    pub fn set(&mut self, qubit: usize, pauli: Option<Pauli>) {
        let (x, z) = match pauli {
            None => (false, false),
            Some(Pauli::X) => (true, false),
            Some(Pauli::Y) => (true, true),
            Some(Pauli::Z) => (false, true),
        };
        self.x.set(qubit, x);
        self.z.set(qubit, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Symplectic inner product is zero.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.x.dot(&other.z) == other.x.dot(&self.z)
    }

    /// Does this string anticommute with `pauli` acting on `qubit`?
    pub fn anticommutes_with_single(&self, qubit: usize, pauli: Pauli) -> bool {
        match pauli {
            Pauli::X => self.z.get(qubit),
            Pauli::Z => self.x.get(qubit),
            Pauli::Y => self.x.get(qubit) ^ self.z.get(qubit),
        }
    }

    /// `self <- other * self`, tracking the sign.
    ///
    /// Returns the power of `i` in the product's phase; it is even whenever
    /// the two strings commute. An odd power is folded into `negative` by
    /// dropping the imaginary unit, which callers only allow for rows they
    /// overwrite afterwards.
    pub fn left_mul(&mut self, other: &PauliString) -> u8 {
        debug_assert_eq!(self.len(), other.len());
        let mut exponent: i32 = 2 * (self.negative as i32 + other.negative as i32);
        let (ox, oz) = (other.x.words(), other.z.words());
        let (sx, sz) = (self.x.words(), self.z.words());
        for w in 0..ox.len() {
            let mut support = ox[w] | oz[w];
            while support != 0 {
                let b = support.trailing_zeros();
                support &= support - 1;
                let x1 = (ox[w] >> b) & 1;
                let z1 = (oz[w] >> b) & 1;
                let x2 = ((sx[w] >> b) & 1) as i32;
                let z2 = ((sz[w] >> b) & 1) as i32;
                exponent += match (x1, z1) {
                    (1, 1) => z2 - x2,
                    (1, 0) => z2 * (2 * x2 - 1),
                    (0, 1) => x2 * (1 - 2 * z2),
                    _ => 0,
                };
            }
        }
        let exponent = exponent.rem_euclid(4) as u8;
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
        self.negative = exponent & 2 != 0;
        exponent
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.len() {
            f.write_str(match self.get(q) {
                None => "_",
                Some(Pauli::X) => "X",
                Some(Pauli::Y) => "Y",
                Some(Pauli::Z) => "Z",
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        PauliString::parse(s).unwrap()
    }

    #[test]
    fn single_qubit_products() {
        // X * Z = -iY: odd exponent
        let mut a = p("Z");
        assert_eq!(a.left_mul(&p("X")), 3);
        assert_eq!(a.get(0), Some(Pauli::Y));
        // Z * X = iY
        let mut b = p("X");
        assert_eq!(b.left_mul(&p("Z")), 1);
        // Y * Y = I
        let mut c = p("Y");
        assert_eq!(c.left_mul(&p("Y")), 0);
        assert!(c.is_identity());
        assert!(!c.negative);
    }

    #[test]
    fn commuting_products_keep_real_signs() {
        // (XX)(ZZ) = -YY
        let mut a = p("ZZ");
        assert_eq!(a.left_mul(&p("XX")), 2);
        assert_eq!(a, p("-YY"));
        // (-XZ)(ZX) = -(XZ)(ZX) = -(-iY)(iY) = -YY
        let mut b = p("ZX");
        b.left_mul(&p("-XZ"));
        assert_eq!(b, p("-YY"));
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XZ").commutes_with(&p("ZX")));
        assert!(p("XZ_").anticommutes_with_single(1, Pauli::X));
        assert!(p("Y").anticommutes_with_single(0, Pauli::Z));
        assert!(!p("Y").anticommutes_with_single(0, Pauli::Y));
    }

    #[test]
    fn display_round_trip() {
        for s in ["+XYZ_", "-____", "+Y"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!(PauliString::parse("XQ").is_none());
    }

    #[test]
    fn stand_ins() {
        assert_eq!(PauliBasis::AncillaA.stand_in(), Pauli::Y);
        assert_eq!(PauliBasis::AncillaY.stand_in(), Pauli::Z);
        assert!(PauliBasis::AncillaA.is_nonclifford());
        assert!(!PauliBasis::X.is_nonclifford());
    }
}
