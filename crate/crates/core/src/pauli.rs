//! Phaseless Pauli operators over `n` qubits.
//!
//! A [`PauliString`] stores its X and Z components as packed bit vectors, so
//! products are a XOR and commutation is the parity of the symplectic inner
//! product. Global phases are never tracked.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PauliError {
    #[error("length mismatch: {0} vs {1} qubits")]
    LengthMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    OutOfRange { index: usize, n: usize },
    #[error("invalid Pauli character {0:?}")]
    InvalidChar(char),
}

/// Single-qubit Pauli, up to phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_TRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    /// `(x, z)` symplectic bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        (ax & bz) ^ (az & bx)
    }

    pub fn mul(self, other: Pauli) -> Pauli {
        let (ax, az) = self.bits();
        let (bx, bz) = other.bits();
        Pauli::from_bits(ax ^ bx, az ^ bz)
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl TryFrom<char> for Pauli {
    type Error = PauliError;

    fn try_from(c: char) -> Result<Self, Self::Error> {
        match c {
            'I' | '_' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(PauliError::InvalidChar(other)),
        }
    }
}

/// An `n`-qubit Pauli operator in symplectic form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let words = n.div_ceil(WORD);
        Self { n, x: vec![0; words], z: vec![0; words] }
    }

    /// Operator acting as `pauli` on each qubit of `support` and identity elsewhere.
    pub fn from_support(n: usize, support: &[usize], pauli: Pauli) -> Result<Self, PauliError> {
        let mut out = Self::identity(n);
        for &q in support {
            out.set(q, pauli)?;
        }
        Ok(out)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut out = Self::identity(paulis.len());
        for (q, &p) in paulis.iter().enumerate() {
            out.put(q, p);
        }
        out
    }

    /// Builds an operator from per-qubit symplectic bits.
    pub fn from_bit_slices(x_bits: &[bool], z_bits: &[bool]) -> Result<Self, PauliError> {
        if x_bits.len() != z_bits.len() {
            return Err(PauliError::LengthMismatch(x_bits.len(), z_bits.len()));
        }
        let mut out = Self::identity(x_bits.len());
        for (q, (&x, &z)) in x_bits.iter().zip(z_bits).enumerate() {
            out.put(q, Pauli::from_bits(x, z));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        let (w, b) = (qubit / WORD, qubit % WORD);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) -> Result<(), PauliError> {
        if qubit >= self.n {
            return Err(PauliError::OutOfRange { index: qubit, n: self.n });
        }
        self.put(qubit, pauli);
        Ok(())
    }

    fn put(&mut self, qubit: usize, pauli: Pauli) {
        let (w, b) = (qubit / WORD, qubit % WORD);
        let (x, z) = pauli.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((z as u64) << b);
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        self.get(qubit).bits().0
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        self.get(qubit).bits().1
    }

    fn check_len(&self, other: &Self) -> Result<(), PauliError> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(PauliError::LengthMismatch(self.n, other.n))
        }
    }

    /// Phaseless product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        self.check_len(other)?;
        let mut out = self.clone();
        out.x.iter_mut().zip(&other.x).for_each(|(a, b)| *a ^= b);
        out.z.iter_mut().zip(&other.z).for_each(|(a, b)| *a ^= b);
        Ok(out)
    }

    /// `true` when the two operators commute.
    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        self.check_len(other)?;
        let ones: u32 = self
            .x
            .iter()
            .zip(&other.z)
            .chain(self.z.iter().zip(&other.x))
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 0)
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(|q| self.get(q))
    }

    /// Non-identity sites as `(qubit, pauli)`.
    pub fn support(&self) -> Vec<(usize, Pauli)> {
        self.iter().enumerate().filter(|(_, p)| *p != Pauli::I).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.iter() {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let paulis = s.chars().map(Pauli::try_from).collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_paulis(&paulis))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn products() {
        assert_eq!(ps("XI").multiply(&ps("ZI")).unwrap(), ps("YI"));
        assert_eq!(ps("XZ").multiply(&ps("ZZ")).unwrap(), ps("YI"));
        let a = ps("XYZIY");
        assert!(a.multiply(&a).unwrap().is_identity());
    }

    #[test]
    fn commutation() {
        assert!(!ps("X").commutes(&ps("Z")).unwrap());
        assert!(ps("Y").commutes(&ps("Y")).unwrap());
        assert!(ps("XX").commutes(&ps("ZZ")).unwrap());
        assert!(!ps("XI").commutes(&ps("YZ")).unwrap());
    }

    #[test]
    fn weights() {
        assert_eq!(PauliString::identity(5).weight(), 0);
        assert_eq!(ps("Y").weight(), 1);
        assert_eq!(ps("XZY").weight(), 3);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(ps("XX").multiply(&ps("X")), Err(PauliError::LengthMismatch(2, 1)));
        assert!(ps("XX").commutes(&ps("XXX")).is_err());
        assert!(PauliString::identity(3).set(3, Pauli::X).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = "IXYZI";
        assert_eq!(ps(s).to_string(), s);
        assert!("IXQ".parse::<PauliString>().is_err());
        let long: String = "XYZI".repeat(40);
        assert_eq!(ps(&long).to_string(), long);
    }

    #[test]
    fn symmetric_commutation_over_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let n = rng.gen_range(1..80);
            let a: Vec<Pauli> = (0..n).map(|_| Pauli::from_bits(rng.gen(), rng.gen())).collect();
            let b: Vec<Pauli> = (0..n).map(|_| Pauli::from_bits(rng.gen(), rng.gen())).collect();
            let (a, b) = (PauliString::from_paulis(&a), PauliString::from_paulis(&b));
            assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
        }
    }

    fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0u8..4, n).prop_map(|v| {
            let ps: Vec<Pauli> = v.into_iter().map(|k| Pauli::from_bits(k & 1 == 1, k & 2 == 2)).collect();
            PauliString::from_paulis(&ps)
        })
    }

    proptest! {
        #[test]
        fn multiply_is_associative_and_self_inverse(
            (a, b, c) in (1usize..150).prop_flat_map(|n| (pauli_string(n), pauli_string(n), pauli_string(n)))
        ) {
            let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            prop_assert!(b.multiply(&b).unwrap().is_identity());
        }

        #[test]
        fn commutation_is_bilinear(
            (a, b, c) in (1usize..150).prop_flat_map(|n| (pauli_string(n), pauli_string(n), pauli_string(n)))
        ) {
            let with_product = !a.commutes(&b.multiply(&c).unwrap()).unwrap();
            let separately = !a.commutes(&b).unwrap() ^ !a.commutes(&c).unwrap();
            prop_assert_eq!(with_product, separately);
        }

        #[test]
        fn per_qubit_encoding_matches_bits(a in (1usize..100).prop_flat_map(pauli_string)) {
            for (q, p) in a.iter().enumerate() {
                prop_assert_eq!(p, Pauli::from_bits(a.x_bit(q), a.z_bit(q)));
            }
        }
    }
}
