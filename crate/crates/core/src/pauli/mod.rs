//! Symbolic algebra over n-qubit Pauli strings.
//!
//! A string is stored as a pair of bitmasks `(x, z)`; bit `q` set in `x`
//! (resp. `z`) means an X (resp. Z) factor on qubit `q`, and both bits set
//! means the Hermitian `Y`. Qubit 0 is the leftmost letter of the axes word
//! and the most significant tensor factor of the dense realization.

mod fermion;

pub use fermion::{jordan_wigner, FermionFactor, FermionMonomial, FermionOp, Spin};

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped on canonicalization.
pub const TAU_ZERO: f64 = 1e-12;

/// Largest qubit count representable by the bitmask encoding.
pub const MAX_SYMBOLIC_QUBITS: usize = 64;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `i^k` for `k` taken mod 4.
#[inline]
pub fn i_pow(k: u32) -> Complex64 {
    I_POWERS[(k & 3) as usize]
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    I,
    X,
    Y,
    Z,
}

impl Axis {
    pub fn from_char(c: char) -> Option<Axis> {
        match c {
            'I' => Some(Axis::I),
            'X' => Some(Axis::X),
            'Y' => Some(Axis::Y),
            'Z' => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Axis::I => 'I',
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        }
    }
}

/// A Pauli string without coefficient, in symplectic (x, z) form.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn from_masks(x: u64, z: u64) -> Self {
        PauliString { x, z }
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Single-qubit Pauli `axis` on `qubit`.
    pub fn single(qubit: usize, axis: Axis) -> Self {
        Self::identity().with(qubit, axis)
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    /// Returns a copy with qubit `q` set to `axis`.
    pub fn with(mut self, q: usize, axis: Axis) -> Self {
        debug_assert!(q < MAX_SYMBOLIC_QUBITS);
        let bit = 1u64 << q;
        self.x &= !bit;
        self.z &= !bit;
        match axis {
            Axis::I => {}
            Axis::X => self.x |= bit,
            Axis::Z => self.z |= bit,
            Axis::Y => {
                self.x |= bit;
                self.z |= bit;
            }
        }
        self
    }

    pub fn axis(&self, q: usize) -> Axis {
        let bit = 1u64 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Axis::I,
            (true, false) => Axis::X,
            (true, true) => Axis::Y,
            (false, true) => Axis::Z,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Highest qubit index touched, if any.
    pub fn support_end(&self) -> usize {
        let m = self.x | self.z;
        (u64::BITS - m.leading_zeros()) as usize
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z) ^ (self.z & other.x)).count_ones().is_multiple_of(2)
    }

    /// Product `self · other = i^k · result`; returns `(k mod 4, result)`.
    #[inline]
    pub fn mul_phase(&self, other: &PauliString) -> (u32, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // P = i^{|x&z|} X^x Z^z and Z^z1 X^x2 = (-1)^{|z1&x2|} X^x2 Z^z1.
        let k = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * MAX_SYMBOLIC_QUBITS as u32
            - (x & z).count_ones();
        (k & 3, PauliString { x, z })
    }

    pub fn parse(word: &str) -> Result<Self> {
        if word.chars().count() > MAX_SYMBOLIC_QUBITS {
            return Err(Error::Parse {
                what: "Pauli word",
                detail: format!("more than {MAX_SYMBOLIC_QUBITS} qubits"),
            });
        }
        let mut s = Self::identity();
        for (q, c) in word.chars().enumerate() {
            let axis = Axis::from_char(c).ok_or_else(|| Error::Parse {
                what: "Pauli word",
                detail: format!("unexpected character {c:?} in {word:?}"),
            })?;
            s = s.with(q, axis);
        }
        Ok(s)
    }

    pub fn word(&self, n_qubits: usize) -> String {
        (0..n_qubits).map(|q| self.axis(q).as_char()).collect()
    }
}

/// A Pauli string with a complex coefficient on a fixed number of qubits.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub n_qubits: usize,
    pub string: PauliString,
    pub coeff: Complex64,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, string: PauliString, coeff: Complex64) -> Self {
        debug_assert!(string.support_end() <= n_qubits);
        PauliTerm {
            n_qubits,
            string,
            coeff,
        }
    }

    pub fn parse(word: &str, coeff: Complex64) -> Result<Self> {
        Ok(Self::new(word.chars().count(), PauliString::parse(word)?, coeff))
    }

    pub fn is_hermitian(&self) -> bool {
        self.coeff.im.abs() < TAU_ZERO
    }
}

/// Pauli-group multiplication with coefficients.
pub fn pauli_mul(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::DimensionMismatch(a.n_qubits, b.n_qubits));
    }
    let (k, string) = a.string.mul_phase(&b.string);
    Ok(PauliTerm::new(a.n_qubits, string, a.coeff * b.coeff * i_pow(k)))
}

/// A canonical weighted sum of Pauli strings: unique strings, no
/// coefficient below [`TAU_ZERO`], deterministic (sorted) iteration order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        assert!(
            n_qubits <= MAX_SYMBOLIC_QUBITS,
            "at most {MAX_SYMBOLIC_QUBITS} qubits are supported"
        );
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::from_term(n_qubits, PauliString::IDENTITY, Complex64::new(1.0, 0.0))
    }

    pub fn from_term(n_qubits: usize, string: PauliString, coeff: Complex64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(string, coeff);
        s
    }

    /// Real-coefficient term from an axes word, e.g. `PauliSum::real_term("XZ", 2.0)`.
    pub fn real_term(word: &str, coeff: f64) -> Result<Self> {
        let string = PauliString::parse(word)?;
        Ok(Self::from_term(
            word.chars().count(),
            string,
            Complex64::new(coeff, 0.0),
        ))
    }

    pub fn from_terms(n_qubits: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut s = Self::zero(n_qubits);
        for (p, c) in terms {
            s.accumulate(p, c);
        }
        s.prune();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> + '_ {
        self.terms.iter()
    }

    pub fn terms(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms.iter().map(|(p, c)| PauliTerm::new(self.n_qubits, *p, *c))
    }

    pub fn coeff(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    /// Adds `coeff · string`, merging and dropping a vanishing coefficient.
    pub fn add_term(&mut self, string: PauliString, coeff: Complex64) {
        assert!(
            string.support_end() <= self.n_qubits,
            "Pauli string exceeds {} qubits",
            self.n_qubits
        );
        let c = self.terms.entry(string).or_default();
        *c += coeff;
        if c.norm() < TAU_ZERO {
            self.terms.remove(&string);
        }
    }

    fn accumulate(&mut self, string: PauliString, coeff: Complex64) {
        *self.terms.entry(string).or_default() += coeff;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= TAU_ZERO);
    }

    pub fn check_same_size(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(())
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        PauliSum::from_terms(self.n_qubits, self.terms.iter().map(|(p, c)| (*p, c * factor)))
    }

    pub fn scale_real(&self, factor: f64) -> PauliSum {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn try_add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same_size(other)?;
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.accumulate(*p, *c);
        }
        out.prune();
        Ok(out)
    }

    pub fn try_sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.try_add(&other.scale_real(-1.0))
    }

    /// Operator product `self · other`.
    pub fn try_mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same_size(other)?;
        let mut out = PauliSum::zero(self.n_qubits);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (k, s) = p.mul_phase(q);
                out.accumulate(s, a * b * i_pow(k));
            }
        }
        out.prune();
        Ok(out)
    }

    /// Sum of |coefficient|; an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imag() < TAU_ZERO
    }

    /// Sum of the Hermitian-conjugated terms.
    pub fn adjoint(&self) -> PauliSum {
        PauliSum::from_terms(self.n_qubits, self.terms.iter().map(|(p, c)| (*p, c.conj())))
    }

    /// True when every pair of strings in the sum commutes.
    pub fn terms_commute(&self) -> bool {
        let strings: Vec<_> = self.terms.keys().collect();
        strings
            .iter()
            .enumerate()
            .all(|(i, a)| strings[i + 1..].iter().all(|b| a.commutes_with(b)))
    }

    /// Normalized trace, i.e. the identity coefficient.
    pub fn normalized_trace(&self) -> Complex64 {
        self.coeff(&PauliString::IDENTITY)
    }

    /// Max coefficient-wise difference, for approximate comparisons.
    pub fn distance(&self, other: &PauliSum) -> f64 {
        let mut keys: Vec<&PauliString> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|p| (self.coeff(p) - other.coeff(p)).norm())
            .fold(0.0, f64::max)
    }

    /// One term per line: `<re> <im> <word>`. Floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            out.push_str(&format!("{:?} {:?} {}\n", c.re, c.im, p.word(self.n_qubits)));
        }
        out
    }

    pub fn from_text(text: &str, n_qubits: usize) -> Result<PauliSum> {
        let mut s = PauliSum::zero(n_qubits);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |detail: String| Error::Parse {
                what: "Pauli sum",
                detail: format!("line {}: {detail}", lineno + 1),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [re, im, word] = fields[..] else {
                return Err(bad(format!("expected 3 fields, got {}", fields.len())));
            };
            let re: f64 = re.parse().map_err(|e| bad(format!("{e}")))?;
            let im: f64 = im.parse().map_err(|e| bad(format!("{e}")))?;
            if word.chars().count() != n_qubits {
                return Err(bad(format!("word {word:?} is not {n_qubits} qubits long")));
            }
            s.accumulate(PauliString::parse(word)?, Complex64::new(re, im));
        }
        s.prune();
        Ok(s)
    }
}

/// `[a, b] = ab − ba`. Only anticommuting string pairs contribute, each as `2·ab`.
pub fn commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    a.check_same_size(b)?;
    let mut out = PauliSum::zero(a.n_qubits);
    for (p, ca) in &a.terms {
        for (q, cb) in &b.terms {
            if p.commutes_with(q) {
                continue;
            }
            let (k, s) = p.mul_phase(q);
            out.accumulate(s, 2.0 * ca * cb * i_pow(k));
        }
    }
    out.prune();
    Ok(out)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}·{}", c.re, p.word(self.n_qubits))?;
            } else {
                write!(f, "({})·{}", c, p.word(self.n_qubits))?;
            }
        }
        Ok(())
    }
}

// Operator sugar. These panic on a qubit-count mismatch; use the `try_*`
// methods where the sizes are not known to agree.

impl Add for &PauliSum {
    type Output = PauliSum;
    fn add(self, rhs: &PauliSum) -> PauliSum {
        self.try_add(rhs).expect("qubit count mismatch in PauliSum addition")
    }
}

impl Sub for &PauliSum {
    type Output = PauliSum;
    fn sub(self, rhs: &PauliSum) -> PauliSum {
        self.try_sub(rhs).expect("qubit count mismatch in PauliSum subtraction")
    }
}

impl Mul for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: &PauliSum) -> PauliSum {
        self.try_mul(rhs).expect("qubit count mismatch in PauliSum product")
    }
}

impl Mul<f64> for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: f64) -> PauliSum {
        self.scale_real(rhs)
    }
}

impl Mul<Complex64> for &PauliSum {
    type Output = PauliSum;
    fn mul(self, rhs: Complex64) -> PauliSum {
        self.scale(rhs)
    }
}

impl Neg for &PauliSum {
    type Output = PauliSum;
    fn neg(self) -> PauliSum {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&PauliSum> for PauliSum {
    fn add_assign(&mut self, rhs: &PauliSum) {
        assert_eq!(self.n_qubits, rhs.n_qubits, "qubit count mismatch");
        for (p, c) in &rhs.terms {
            self.accumulate(*p, *c);
        }
        self.prune();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_qubit_products() {
        let x = PauliTerm::parse("X", c(1.0, 0.0)).unwrap();
        let y = PauliTerm::parse("Y", c(1.0, 0.0)).unwrap();
        let z = PauliTerm::parse("Z", c(1.0, 0.0)).unwrap();
        let xy = pauli_mul(&x, &y).unwrap();
        assert_eq!(xy.string, PauliString::parse("Z").unwrap());
        assert_eq!(xy.coeff, c(0.0, 1.0));
        let zz = pauli_mul(&z, &z).unwrap();
        assert!(zz.string.is_identity());
        assert_eq!(zz.coeff, c(1.0, 0.0));
        let yx = pauli_mul(&y, &x).unwrap();
        assert_eq!(yx.coeff, c(0.0, -1.0));
    }

    #[test]
    fn tensor_product_phase() {
        let a = PauliTerm::parse("XZ", c(2.0, 0.0)).unwrap();
        let b = PauliTerm::parse("YZ", c(3.0, 0.0)).unwrap();
        let p = pauli_mul(&a, &b).unwrap();
        assert_eq!(p.string.word(2), "ZI");
        assert_eq!(p.coeff, c(0.0, 6.0));
    }

    #[test]
    fn mul_rejects_size_mismatch() {
        let a = PauliTerm::parse("X", c(1.0, 0.0)).unwrap();
        let b = PauliTerm::parse("XX", c(1.0, 0.0)).unwrap();
        assert!(matches!(pauli_mul(&a, &b), Err(Error::DimensionMismatch(1, 2))));
    }

    #[test]
    fn commutator_z_x() {
        let z = PauliSum::real_term("Z", 1.0).unwrap();
        let x = PauliSum::real_term("X", 1.0).unwrap();
        let k = commutator(&z, &x).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.coeff(&PauliString::parse("Y").unwrap()), c(0.0, 2.0));
        assert!(commutator(&k, &k).unwrap().is_empty());
    }

    #[test]
    fn canonical_form_merges_and_drops() {
        let mut s = PauliSum::real_term("XX", 1.0).unwrap();
        s += &PauliSum::real_term("XX", -1.0 + 1e-14).unwrap();
        assert!(s.is_empty());
        let t = PauliSum::from_terms(
            2,
            [
                (PauliString::parse("ZI").unwrap(), c(0.5, 0.0)),
                (PauliString::parse("ZI").unwrap(), c(0.5, 0.0)),
            ],
        );
        assert_eq!(t.len(), 1);
        assert_eq!(t.one_norm(), 1.0);
    }

    #[test]
    fn hermiticity_follows_real_coefficients() {
        let s = PauliSum::real_term("XY", 2.0).unwrap();
        assert!(s.is_hermitian());
        assert!(!s.scale(c(0.0, 1.0)).is_hermitian());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let s = PauliSum::from_terms(
            3,
            [
                (PauliString::parse("XXI").unwrap(), c(2.0, 0.0)),
                (PauliString::parse("IZY").unwrap(), c(0.1, -1.0 / 3.0)),
            ],
        );
        let text = s.to_text();
        assert!(text.contains("2.0 0.0 XXI"));
        assert_eq!(PauliSum::from_text(&text, 3).unwrap(), s);
        assert!(PauliSum::from_text("1.0 0.0 XQ", 2).is_err());
        assert!(PauliSum::from_text("1.0 XX", 2).is_err());
    }

    #[test]
    fn terms_commute_detects_conflicts() {
        let ok = &PauliSum::real_term("XXI", 1.0).unwrap() + &PauliSum::real_term("IXX", 1.0).unwrap();
        assert!(ok.terms_commute());
        let bad = &PauliSum::real_term("XXI", 1.0).unwrap() + &PauliSum::real_term("IYY", 1.0).unwrap();
        assert!(!bad.terms_commute());
    }
}
