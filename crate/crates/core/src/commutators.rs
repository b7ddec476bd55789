//! Commutator norms and nested-commutator constants of grouped Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::dense::{self, spectral_norm};
use crate::error::Result;
use crate::pauli::{commutator, PauliSum};

/// How an operator norm is evaluated.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// Exact spectral norm of the dense realization.
    Spectral,
    /// Sum of |coefficients|, an upper bound on the spectral norm.
    OneNorm,
}

impl NormKind {
    /// Spectral where the dense realization fits, one-norm otherwise.
    pub fn auto(n_qubits: usize) -> NormKind {
        if n_qubits <= dense::n_max() {
            NormKind::Spectral
        } else {
            NormKind::OneNorm
        }
    }
}

pub fn operator_norm(s: &PauliSum, kind: NormKind) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    match kind {
        NormKind::OneNorm => Ok(s.one_norm()),
        NormKind::Spectral => Ok(spectral_norm(&dense::to_dense(s)?.view())),
    }
}

/// `Σ_{l1 ≠ l2} ‖[H_{l2}, H_{l1}]‖`, both orderings counted.
pub fn alpha_comm(groups: &[PauliSum], norm: NormKind) -> Result<f64> {
    let mut acc = 0.0;
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            acc += 2.0 * operator_norm(&commutator(b, a)?, norm)?;
        }
    }
    Ok(acc)
}

/// The two nested-commutator constants of the PF1 remainder:
///
/// `C1 = ½ Σ_i ‖Σ_{i<l<k} [H_i,[H_l,H_k]]‖ + (1/6) Σ_i ‖Σ_{l>i} [H_i,[H_i,H_l]]‖`,
/// `C2 = (1/12) Σ_i ‖Σ_{i<l<k} [H_i,[H_i,[H_l,H_k]]]‖`.
///
/// Inner sums are formed symbolically first, so each norm is of a sum.
pub fn pf1_nested_constants(groups: &[PauliSum], norm: NormKind) -> Result<(f64, f64)> {
    let l = groups.len();
    let n = groups.first().map(|g| g.n_qubits()).unwrap_or(0);
    let (mut c1, mut c2) = (0.0, 0.0);
    for i in 0..l {
        // Σ_{i<l<k} [H_l, H_k] and Σ_{l>i} H_l.
        let mut pair_sum = PauliSum::zero(n);
        let mut tail = PauliSum::zero(n);
        for j in i + 1..l {
            tail += &groups[j];
            for k in j + 1..l {
                pair_sum += &commutator(&groups[j], &groups[k])?;
            }
        }
        let hi = &groups[i];
        let triple = commutator(hi, &pair_sum)?;
        let double = commutator(hi, &commutator(hi, &tail)?)?;
        let quad = commutator(hi, &triple)?;
        c1 += 0.5 * operator_norm(&triple, norm)? + operator_norm(&double, norm)? / 6.0;
        c2 += operator_norm(&quad, norm)? / 12.0;
    }
    Ok((c1, c2))
}

/// Second-order two-group constants.
#[derive(Clone, Debug)]
pub struct Pf2Constants {
    /// `(1/24)[H, [H_1, H_2]]`, off-diagonal in the eigenbasis of `H`.
    pub orthogonal_piece: PauliSum,
    /// `(1/24)[H_2, [H_1, H_2]]`.
    pub residual_piece: PauliSum,
    /// `‖[H_1,[H_2,[H_1,H_2]]]‖ + ‖[H_2,[H_1,[H_1,H_2]]]‖`.
    pub c_ml: f64,
}

/// Splits the PF2 leading error `R = (1/24)[H_1,[H_1,H_2]] + (1/12)[H_2,[H_1,H_2]]`
/// of `e^{−iH_1δt/2} e^{−iH_2δt} e^{−iH_1δt/2}` into its two pieces.
pub fn pf2_nested_constants(h1: &PauliSum, h2: &PauliSum, norm: NormKind) -> Result<Pf2Constants> {
    let k = commutator(h1, h2)?;
    let h = h1.try_add(h2)?;
    let orthogonal_piece = commutator(&h, &k)?.scale_real(1.0 / 24.0);
    let residual_piece = commutator(h2, &k)?.scale_real(1.0 / 24.0);
    let c_ml = operator_norm(&commutator(h1, &commutator(h2, &k)?)?, norm)?
        + operator_norm(&commutator(h2, &commutator(h1, &k)?)?, norm)?;
    Ok(Pf2Constants {
        orthogonal_piece,
        residual_piece,
        c_ml,
    })
}
