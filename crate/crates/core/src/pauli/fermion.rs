//! Fermionic operators and their Jordan-Wigner image.

use num_complex::Complex64;

use super::{PauliString, PauliSum};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Mode index under site-major ordering with up before down.
    pub fn mode(self, site: usize) -> usize {
        2 * site
            + match self {
                Spin::Up => 0,
                Spin::Down => 1,
            }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum FermionFactor {
    Create(usize),
    Annihilate(usize),
    Number(usize),
}

impl FermionFactor {
    pub fn mode(self) -> usize {
        match self {
            FermionFactor::Create(m) | FermionFactor::Annihilate(m) | FermionFactor::Number(m) => m,
        }
    }
}

/// `coeff · f_1 f_2 ⋯ f_k`, factors applied right to left as operators.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionMonomial {
    pub coeff: f64,
    pub factors: Vec<FermionFactor>,
}

impl FermionMonomial {
    /// True when no annihilator stands left of a creator. Number operators
    /// are already normal-ordered and may sit anywhere.
    pub fn is_normal_ordered(&self) -> bool {
        let mut seen_annihilator = false;
        for f in &self.factors {
            match f {
                FermionFactor::Annihilate(_) => seen_annihilator = true,
                FermionFactor::Create(_) if seen_annihilator => return false,
                _ => {}
            }
        }
        true
    }
}

/// Real-coefficient sum of fermionic monomials on `n_modes` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOp {
    n_modes: usize,
    terms: Vec<FermionMonomial>,
}

impl FermionOp {
    pub fn zero(n_modes: usize) -> Self {
        FermionOp {
            n_modes,
            terms: Vec::new(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn terms(&self) -> &[FermionMonomial] {
        &self.terms
    }

    pub fn push(&mut self, coeff: f64, factors: Vec<FermionFactor>) -> Result<()> {
        if let Some(f) = factors.iter().find(|f| f.mode() >= self.n_modes) {
            return Err(Error::ModeOutOfRange {
                index: f.mode(),
                n_modes: self.n_modes,
            });
        }
        self.terms.push(FermionMonomial { coeff, factors });
        Ok(())
    }

    pub fn monomial(n_modes: usize, coeff: f64, factors: Vec<FermionFactor>) -> Result<Self> {
        let mut op = Self::zero(n_modes);
        op.push(coeff, factors)?;
        Ok(op)
    }

    /// `a†_i a_j + a†_j a_i`.
    pub fn hopping(n_modes: usize, i: usize, j: usize) -> Result<Self> {
        use FermionFactor::*;
        let mut op = Self::zero(n_modes);
        op.push(1.0, vec![Create(i), Annihilate(j)])?;
        op.push(1.0, vec![Create(j), Annihilate(i)])?;
        Ok(op)
    }

    pub fn number(n_modes: usize, mode: usize) -> Result<Self> {
        Self::monomial(n_modes, 1.0, vec![FermionFactor::Number(mode)])
    }

    pub fn extend(&mut self, other: FermionOp) {
        assert_eq!(self.n_modes, other.n_modes, "mode count mismatch");
        self.terms.extend(other.terms);
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.iter().all(FermionMonomial::is_normal_ordered)
    }
}

fn factor_image(n: usize, f: FermionFactor) -> PauliSum {
    let half = Complex64::new(0.5, 0.0);
    match f {
        FermionFactor::Number(m) => PauliSum::from_terms(
            n,
            [
                (PauliString::IDENTITY, half),
                (PauliString::from_masks(0, 1 << m), -half),
            ],
        ),
        FermionFactor::Create(m) | FermionFactor::Annihilate(m) => {
            let string = (1u64 << m) - 1;
            let x = PauliString::from_masks(1 << m, string);
            let y = PauliString::from_masks(1 << m, string | (1 << m));
            // a† = (X − iY)/2, a = (X + iY)/2 behind the parity string.
            let sign = if matches!(f, FermionFactor::Create(_)) {
                -1.0
            } else {
                1.0
            };
            PauliSum::from_terms(n, [(x, half), (y, Complex64::new(0.0, 0.5 * sign))])
        }
    }
}

/// Jordan-Wigner image with mode `m` on qubit `m` and parity strings on
/// the lower modes.
pub fn jordan_wigner(f: &FermionOp) -> Result<PauliSum> {
    let n = f.n_modes;
    if n > super::MAX_SYMBOLIC_QUBITS {
        return Err(Error::invalid(format!("{n} modes exceed the symbolic qubit limit")));
    }
    let mut out = PauliSum::zero(n);
    for term in &f.terms {
        let mut prod = PauliSum::identity(n).scale_real(term.coeff);
        for &factor in &term.factors {
            if factor.mode() >= n {
                return Err(Error::ModeOutOfRange {
                    index: factor.mode(),
                    n_modes: n,
                });
            }
            prod = &prod * &factor_image(n, factor);
        }
        out += &prod;
    }
    Ok(out)
}
