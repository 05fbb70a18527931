//! Rotated planar surface code layouts.
//!
//! Data qubits sit on a `d × d` grid, indexed row-major as `row * d + col`.
//! Stabilizers live on the `(d + 1) × (d + 1)` grid of plaquette corners: the
//! plaquette at `(i, j)` touches the data qubits `(i-1, j-1)`, `(i-1, j)`,
//! `(i, j-1)` and `(i, j)` that exist. Plaquettes with `i + j` even carry the
//! X flavor and the rest carry the second flavor (Z or Y). Weight-2 X-flavor
//! checks sit on the top and bottom edges, weight-2 second-flavor checks on the
//! left and right edges.
//!
//! With that orientation the logical Z is a Z string along the top row and the
//! logical X is an X string down the left column. The XY variant keeps the same
//! supports; its second logical representative is a Y string along the top row.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Pauli, PauliError, PauliString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("distance must be odd and at least 3, got {0}")]
    InvalidDistance(usize),
    #[error("operator acts on {got} qubits but the code has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("residual has a non-trivial syndrome")]
    NonTrivialSyndrome,
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// The operator a measurement qubit applies to its neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckFlavor {
    XCheck,
    ZCheck,
    YCheck,
}

impl CheckFlavor {
    pub fn pauli(self) -> Pauli {
        match self {
            CheckFlavor::XCheck => Pauli::X,
            CheckFlavor::ZCheck => Pauli::Z,
            CheckFlavor::YCheck => Pauli::Y,
        }
    }

    /// Whether a single-qubit error `p` flips this check.
    pub fn detects(self, p: Pauli) -> bool {
        self.pauli().anticommutes(p)
    }
}

/// Which pair of check flavors the layout uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlavorPair {
    Xz,
    Xy,
}

impl FlavorPair {
    pub fn second(self) -> CheckFlavor {
        match self {
            FlavorPair::Xz => CheckFlavor::ZCheck,
            FlavorPair::Xy => CheckFlavor::YCheck,
        }
    }

    /// Check families, the X-detecting family first.
    pub fn families(self) -> [CheckFlavor; 2] {
        [self.second(), CheckFlavor::XCheck]
    }
}

impl fmt::Display for FlavorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlavorPair::Xz => "xz",
            FlavorPair::Xy => "xy",
        })
    }
}

impl std::str::FromStr for FlavorPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "xz" => Ok(FlavorPair::Xz),
            "xy" => Ok(FlavorPair::Xy),
            other => Err(format!("unknown code flavor {other:?} (expected xz or xy)")),
        }
    }
}

/// Lattice edges a family's defects may terminate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    TopBottom,
    LeftRight,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stabilizer {
    pub flavor: CheckFlavor,
    /// Plaquette-corner coordinate `(i, j)` with `0 ≤ i, j ≤ d`.
    pub position: (usize, usize),
    pub support: Vec<usize>,
}

/// Logical class of a syndrome-free residual.
pub type LogicalClass = Pauli;

#[derive(Debug, Clone)]
pub struct CodeLayout {
    d: usize,
    flavors: FlavorPair,
    data_coords: Vec<(usize, usize)>,
    stabilizers: Vec<Stabilizer>,
    operators: Vec<PauliString>,
    logical_x: PauliString,
    logical_z: PauliString,
    /// `qubit_checks[q]` lists the stabilizers touching data qubit `q`.
    qubit_checks: Vec<Vec<usize>>,
}

impl CodeLayout {
    pub fn rotated_planar(d: usize, flavors: FlavorPair) -> Result<Self, CodeError> {
        if d < 3 || d % 2 == 0 {
            return Err(CodeError::InvalidDistance(d));
        }
        let n = d * d;
        let data_coords = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).collect();

        let mut stabilizers = Vec::with_capacity(n - 1);
        for i in 0..=d {
            for j in 0..=d {
                let x_flavor = (i + j) % 2 == 0;
                let top_bottom = i == 0 || i == d;
                let left_right = j == 0 || j == d;
                let keep = match (top_bottom, left_right) {
                    (true, true) => false,
                    (true, false) => x_flavor,
                    (false, true) => !x_flavor,
                    (false, false) => true,
                };
                if !keep {
                    continue;
                }
                let mut support = Vec::with_capacity(4);
                for (r, c) in [(i.wrapping_sub(1), j.wrapping_sub(1)), (i.wrapping_sub(1), j), (i, j.wrapping_sub(1)), (i, j)] {
                    if r < d && c < d {
                        support.push(r * d + c);
                    }
                }
                let flavor = if x_flavor { CheckFlavor::XCheck } else { flavors.second() };
                stabilizers.push(Stabilizer { flavor, position: (i, j), support });
            }
        }

        let operators = stabilizers
            .iter()
            .map(|s| PauliString::from_support(n, &s.support, s.flavor.pauli()))
            .collect::<Result<Vec<_>, _>>()?;

        let mut qubit_checks = vec![Vec::new(); n];
        for (k, s) in stabilizers.iter().enumerate() {
            for &q in &s.support {
                qubit_checks[q].push(k);
            }
        }

        // In the XY code the Z string along the top row would anticommute with the
        // left-edge Y check, so the conjugate logical uses the second flavor's Pauli.
        let top_row: Vec<usize> = (0..d).collect();
        let left_col: Vec<usize> = (0..d).map(|r| r * d).collect();
        let logical_z = PauliString::from_support(n, &top_row, flavors.second().pauli())?;
        let logical_x = PauliString::from_support(n, &left_col, Pauli::X)?;

        Ok(Self { d, flavors, data_coords, stabilizers, operators, logical_x, logical_z, qubit_checks })
    }

    pub fn distance(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.d * self.d
    }

    pub fn flavors(&self) -> FlavorPair {
        self.flavors
    }

    pub fn data_coords(&self) -> &[(usize, usize)] {
        &self.data_coords
    }

    pub fn stabilizers(&self) -> &[Stabilizer] {
        &self.stabilizers
    }

    pub fn num_stabilizers(&self) -> usize {
        self.stabilizers.len()
    }

    /// Stabilizer `k` as an `n`-qubit operator.
    pub fn stabilizer_operator(&self, k: usize) -> &PauliString {
        &self.operators[k]
    }

    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }

    /// Logical operator conjugate to [`Self::logical_x`]; a Y string in the XY code.
    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }

    pub fn qubit_checks(&self, qubit: usize) -> &[usize] {
        &self.qubit_checks[qubit]
    }

    pub fn boundary_class(&self, flavor: CheckFlavor) -> Boundary {
        match flavor {
            CheckFlavor::XCheck => Boundary::LeftRight,
            CheckFlavor::ZCheck | CheckFlavor::YCheck => Boundary::TopBottom,
        }
    }

    /// Indices of the stabilizers of one flavor, in layout order.
    pub fn checks_of(&self, flavor: CheckFlavor) -> Vec<usize> {
        (0..self.stabilizers.len()).filter(|&k| self.stabilizers[k].flavor == flavor).collect()
    }

    fn check_size(&self, op: &PauliString) -> Result<(), CodeError> {
        if op.len() == self.n() {
            Ok(())
        } else {
            Err(CodeError::SizeMismatch { expected: self.n(), got: op.len() })
        }
    }

    /// One bit per stabilizer, set when the stabilizer anticommutes with `error`.
    pub fn syndrome(&self, error: &PauliString) -> Result<Vec<bool>, CodeError> {
        self.check_size(error)?;
        Ok(self
            .stabilizers
            .iter()
            .map(|s| {
                let check = s.flavor.pauli();
                s.support.iter().filter(|&&q| check.anticommutes(error.get(q))).count() % 2 == 1
            })
            .collect())
    }

    /// Logical class of a residual that commutes with every stabilizer.
    pub fn logical_class(&self, residual: &PauliString) -> Result<LogicalClass, CodeError> {
        if self.syndrome(residual)?.iter().any(|&b| b) {
            return Err(CodeError::NonTrivialSyndrome);
        }
        Ok(self.logical_class_unchecked(residual))
    }

    /// [`Self::logical_class`] without the syndrome check.
    pub fn logical_class_unchecked(&self, residual: &PauliString) -> LogicalClass {
        let flips_z = !residual.commutes(&self.logical_z).expect("sizes checked");
        let flips_x = !residual.commutes(&self.logical_x).expect("sizes checked");
        Pauli::from_bits(flips_z, flips_x)
    }

    /// Structured dump of the layout for golden-file comparisons.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "distance": self.d,
            "flavors": self.flavors,
            "n": self.n(),
            "stabilizers": self.stabilizers,
            "logical_x": self.logical_x,
            "logical_z": self.logical_z,
            "boundaries": {
                "xcheck": self.boundary_class(CheckFlavor::XCheck),
                self.flavors.second().name(): self.boundary_class(self.flavors.second()),
            },
        })
    }
}

impl CheckFlavor {
    pub fn name(self) -> &'static str {
        match self {
            CheckFlavor::XCheck => "xcheck",
            CheckFlavor::ZCheck => "zcheck",
            CheckFlavor::YCheck => "ycheck",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_error(n: usize, rng: &mut impl Rng) -> PauliString {
        let paulis: Vec<Pauli> = (0..n).map(|_| Pauli::from_bits(rng.gen(), rng.gen())).collect();
        PauliString::from_paulis(&paulis)
    }

    #[test]
    fn rejects_bad_distances() {
        for d in [0, 1, 2, 4, 10] {
            assert_eq!(CodeLayout::rotated_planar(d, FlavorPair::Xz).unwrap_err(), CodeError::InvalidDistance(d));
        }
    }

    #[test]
    fn counts_and_weights() {
        for d in [3, 5, 7, 9, 11] {
            for pair in [FlavorPair::Xz, FlavorPair::Xy] {
                let code = CodeLayout::rotated_planar(d, pair).unwrap();
                assert_eq!(code.n(), d * d);
                assert_eq!(code.num_stabilizers(), d * d - 1);
                for s in code.stabilizers() {
                    assert!(s.support.len() == 2 || s.support.len() == 4);
                }
                let xs = code.checks_of(CheckFlavor::XCheck).len();
                assert_eq!(xs, (d * d - 1) / 2);
                assert_eq!(code.checks_of(pair.second()).len(), (d * d - 1) / 2);
            }
        }
        let d7 = CodeLayout::rotated_planar(7, FlavorPair::Xz).unwrap();
        let w2 = d7.stabilizers().iter().filter(|s| s.support.len() == 2).count();
        assert_eq!(w2, 4 * 3);
        assert_eq!(d7.num_stabilizers() - w2, 36);
    }

    #[test]
    fn commutation_structure() {
        for d in [3, 5, 7] {
            for pair in [FlavorPair::Xz, FlavorPair::Xy] {
                let code = CodeLayout::rotated_planar(d, pair).unwrap();
                let m = code.num_stabilizers();
                for a in 0..m {
                    for b in 0..m {
                        assert!(code.stabilizer_operator(a).commutes(code.stabilizer_operator(b)).unwrap());
                    }
                    assert!(code.stabilizer_operator(a).commutes(code.logical_x()).unwrap());
                    assert!(code.stabilizer_operator(a).commutes(code.logical_z()).unwrap());
                }
                assert!(!code.logical_x().commutes(code.logical_z()).unwrap());
                assert_eq!(code.logical_x().weight(), d);
                assert_eq!(code.logical_z().weight(), d);
            }
        }
    }

    #[test]
    fn d3_supports_by_hand() {
        let code = CodeLayout::rotated_planar(3, FlavorPair::Xz).unwrap();
        let mut x: Vec<Vec<usize>> = code.checks_of(CheckFlavor::XCheck).iter().map(|&k| code.stabilizers()[k].support.clone()).collect();
        let mut z: Vec<Vec<usize>> = code.checks_of(CheckFlavor::ZCheck).iter().map(|&k| code.stabilizers()[k].support.clone()).collect();
        x.sort();
        z.sort();
        assert_eq!(x, vec![vec![0, 1, 3, 4], vec![1, 2], vec![4, 5, 7, 8], vec![6, 7]]);
        assert_eq!(z, vec![vec![0, 3], vec![1, 2, 4, 5], vec![3, 4, 6, 7], vec![5, 8]]);
    }

    #[test]
    fn xy_variant_shares_supports() {
        for d in [3, 5] {
            let xz = CodeLayout::rotated_planar(d, FlavorPair::Xz).unwrap();
            let xy = CodeLayout::rotated_planar(d, FlavorPair::Xy).unwrap();
            for (a, b) in xz.stabilizers().iter().zip(xy.stabilizers()) {
                assert_eq!(a.support, b.support);
                assert_eq!(a.position, b.position);
                match a.flavor {
                    CheckFlavor::ZCheck => assert_eq!(b.flavor, CheckFlavor::YCheck),
                    f => assert_eq!(b.flavor, f),
                }
            }
            assert_eq!(xy.stabilizer_operator(xy.checks_of(CheckFlavor::YCheck)[0]).iter().filter(|&p| p == Pauli::Y).count(), 2);
            // X errors are seen by the Z checks of one code and the Y checks of the other.
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(d as u64);
            for _ in 0..100 {
                let bits: Vec<bool> = (0..d * d).map(|_| rng.gen()).collect();
                let err = PauliString::from_bit_slices(&bits, &vec![false; d * d]).unwrap();
                assert_eq!(xz.syndrome(&err).unwrap(), xy.syndrome(&err).unwrap());
            }
        }
    }

    #[test]
    fn syndrome_examples() {
        let code = CodeLayout::rotated_planar(3, FlavorPair::Xz).unwrap();
        assert!(code.syndrome(&PauliString::identity(9)).unwrap().iter().all(|&b| !b));
        let err = PauliString::from_support(9, &[4], Pauli::X).unwrap();
        let syn = code.syndrome(&err).unwrap();
        let fired: Vec<&Stabilizer> = syn.iter().zip(code.stabilizers()).filter(|(b, _)| **b).map(|(_, s)| s).collect();
        assert_eq!(fired.len(), 2);
        assert!(fired.iter().all(|s| s.flavor == CheckFlavor::ZCheck && s.support.contains(&4)));
        for k in 0..code.num_stabilizers() {
            assert!(code.syndrome(code.stabilizer_operator(k)).unwrap().iter().all(|&b| !b));
        }
        assert!(code.syndrome(&PauliString::identity(8)).is_err());
    }

    #[test]
    fn every_single_error_is_detected_at_d3() {
        for pair in [FlavorPair::Xz, FlavorPair::Xy] {
            let code = CodeLayout::rotated_planar(3, pair).unwrap();
            for q in 0..9 {
                for p in Pauli::NON_TRIVIAL {
                    let err = PauliString::from_support(9, &[q], p).unwrap();
                    assert!(code.syndrome(&err).unwrap().iter().any(|&b| b), "{p} on {q}");
                }
            }
        }
    }

    #[test]
    fn syndrome_is_linear() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for d in [3, 5] {
            let code = CodeLayout::rotated_planar(d, FlavorPair::Xz).unwrap();
            for _ in 0..1000 {
                let a = random_error(d * d, &mut rng);
                let b = random_error(d * d, &mut rng);
                let lhs = code.syndrome(&a.multiply(&b).unwrap()).unwrap();
                let sa = code.syndrome(&a).unwrap();
                let sb = code.syndrome(&b).unwrap();
                let rhs: Vec<bool> = sa.iter().zip(&sb).map(|(x, y)| x ^ y).collect();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn logical_classes() {
        let code = CodeLayout::rotated_planar(5, FlavorPair::Xz).unwrap();
        assert_eq!(code.logical_class(&PauliString::identity(25)).unwrap(), Pauli::I);
        assert_eq!(code.logical_class(code.logical_x()).unwrap(), Pauli::X);
        assert_eq!(code.logical_class(code.logical_z()).unwrap(), Pauli::Z);
        let y = code.logical_x().multiply(code.logical_z()).unwrap();
        assert_eq!(code.logical_class(&y).unwrap(), Pauli::Y);
        let stab = code.stabilizer_operator(3);
        assert_eq!(code.logical_class(&stab.multiply(code.logical_x()).unwrap()).unwrap(), Pauli::X);
        let single = PauliString::from_support(25, &[12], Pauli::X).unwrap();
        assert_eq!(code.logical_class(&single), Err(CodeError::NonTrivialSyndrome));

        let xy = CodeLayout::rotated_planar(5, FlavorPair::Xy).unwrap();
        assert_eq!(xy.logical_class(xy.logical_x()).unwrap(), Pauli::X);
        assert_eq!(xy.logical_class(xy.logical_z()).unwrap(), Pauli::Z);
    }

    #[test]
    fn qubit_membership_per_family() {
        for d in [3, 5, 7] {
            let code = CodeLayout::rotated_planar(d, FlavorPair::Xz).unwrap();
            for q in 0..code.n() {
                for f in [CheckFlavor::XCheck, CheckFlavor::ZCheck] {
                    let k = code.qubit_checks(q).iter().filter(|&&c| code.stabilizers()[c].flavor == f).count();
                    assert!(k == 1 || k == 2);
                }
            }
        }
    }
}
