//! Interference diagnostics and interference-aware error bounds.
//!
//! Everything here works in the eigenbasis `P` of `H`. For a perturbation
//! `H + hR` with eigenbasis `P'`, the matrix `b = P†RP'` carries all the
//! information needed by the bounds: spectral norms of masked copies of `b`
//! equal the norms of the corresponding operators because `P`, `P'` are
//! unitary.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::commutators::{operator_norm, pf1_nested_constants, pf2_nested_constants, NormKind};
use crate::dense::{
    self, adjoint, eig_hermitian, eig_hermitian_with, spectral_norm, spectral_norm_warm, DenseOperator,
    EigenDecomposition, NormState, StateVector,
};
use crate::error::{Error, Result};
use crate::pauli::{commutator, PauliSum};
use crate::product_formula::{pf1_leading, GroupedHamiltonian, ProductFormula};

/// Default relative orthogonality tolerance, `τ_orth = 1e-8·‖R‖`.
pub const TAU_ORTH_REL: f64 = 1e-8;
/// Default number of trace moments `Tr(R H^k)/2^n`.
pub const TRACE_K_MAX: usize = 4;
/// Upper limit on ε candidates evaluated when minimizing over ε.
pub const EPSILON_CANDIDATES: usize = 24;

fn require_hermitian(s: &PauliSum) -> Result<()> {
    if !s.is_hermitian() {
        return Err(Error::NonHermitian(s.max_imag()));
    }
    Ok(())
}

/// `P† A P` for the eigenvectors `P` of `eig`.
pub fn in_eigenbasis(eig: &EigenDecomposition, a: &DenseOperator) -> DenseOperator {
    let p = &eig.eigenvectors;
    adjoint(&p.view()).dot(&a.dot(p))
}

/// Spectral norm of a Hermitian matrix; exact for tiny blocks.
fn hermitian_norm(a: &DenseOperator) -> f64 {
    match a.nrows() {
        0 => 0.0,
        1 => a[[0, 0]].norm(),
        _ => spectral_norm(&a.view()),
    }
}

// ---------------------------------------------------------------------------
// Orthogonality and trace criteria

#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityReport {
    /// `max_b ‖Π_b R Π_b‖` over degeneracy blocks of `H`.
    pub max_diag: f64,
    /// `|⟨ψ_i|R|ψ_i⟩|` in the computed eigenbasis.
    pub per_state_diag: Vec<f64>,
    pub satisfied: bool,
    /// `Tr(R H^k)/2^n` for `k = 1..=k_max`.
    pub trace_values: Vec<f64>,
    pub tau_orth: f64,
    pub r_norm: f64,
    pub h_norm: f64,
}

impl OrthogonalityReport {
    /// The necessary trace criterion `|Tr(RH^k)|/2^n < τ·‖H‖^k` for all `k`.
    pub fn traces_vanish(&self, tau_rel: f64) -> bool {
        self.trace_values
            .iter()
            .enumerate()
            .all(|(k, v)| v.abs() < tau_rel * self.h_norm.powi(k as i32 + 1).max(f64::MIN_POSITIVE))
    }
}

/// Orthogonality diagnosis with `τ_orth = 1e-8·‖R‖` and `k_max = 4`.
pub fn diagnose_orthogonality_default(h: &PauliSum, r: &PauliSum) -> Result<OrthogonalityReport> {
    diagnose_orthogonality(h, r, TRACE_K_MAX, None)
}

/// `tau_orth = None` uses `1e-8·‖R‖`.
pub fn diagnose_orthogonality(
    h: &PauliSum,
    r: &PauliSum,
    k_max: usize,
    tau_orth: Option<f64>,
) -> Result<OrthogonalityReport> {
    h.check_same_size(r)?;
    require_hermitian(h)?;
    require_hermitian(r)?;
    let eig = eig_hermitian(&dense::to_dense(h)?)?;
    let rd = dense::to_dense(r)?;
    Ok(diagnose_orthogonality_in(&eig, &rd, k_max, tau_orth))
}

/// As [`diagnose_orthogonality`] with a precomputed eigendecomposition of `H`.
pub fn diagnose_orthogonality_in(
    eig: &EigenDecomposition,
    r: &DenseOperator,
    k_max: usize,
    tau_orth: Option<f64>,
) -> OrthogonalityReport {
    let b = in_eigenbasis(eig, r);
    let r_norm = hermitian_norm(r);
    let tau = tau_orth.unwrap_or(TAU_ORTH_REL * r_norm);
    let max_diag = eig
        .blocks
        .iter()
        .map(|blk| hermitian_norm(&b.slice(ndarray::s![blk.clone(), blk.clone()]).to_owned()))
        .fold(0.0, f64::max);
    let d = eig.dim();
    let per_state_diag = (0..d).map(|i| b[[i, i]].norm()).collect();
    // Tr(R H^k) = Σ_i ⟨ψ_i|R|ψ_i⟩ λ_i^k.
    let trace_values = (1..=k_max)
        .map(|k| {
            (0..d)
                .map(|i| b[[i, i]].re * eig.eigenvalues[i].powi(k as i32))
                .sum::<f64>()
                / d as f64
        })
        .collect();
    OrthogonalityReport {
        max_diag,
        per_state_diag,
        satisfied: max_diag < tau || (r_norm == 0.0 && max_diag == 0.0),
        trace_values,
        tau_orth: tau,
        r_norm,
        h_norm: eig.norm(),
    }
}

/// Long-time averages `Σ_λ λ^n ⟨ψ|Π_λ R Π_λ|ψ⟩`, `n = 0..=n_max`.
#[derive(Clone, Debug, Serialize)]
pub struct TimeAverage {
    pub moments: Vec<f64>,
    /// Contribution of degeneracy blocks with more than one state.
    pub degenerate_part: Vec<f64>,
}

impl TimeAverage {
    /// Moments with the degenerate-block contributions removed.
    pub fn nondegenerate_part(&self) -> Vec<f64> {
        self.moments
            .iter()
            .zip(&self.degenerate_part)
            .map(|(a, b)| a - b)
            .collect()
    }
}

pub fn time_average_criterion(psi: &StateVector, h: &PauliSum, r: &PauliSum, n_max: usize) -> Result<TimeAverage> {
    h.check_same_size(r)?;
    require_hermitian(h)?;
    require_hermitian(r)?;
    let eig = eig_hermitian(&dense::to_dense(h)?)?;
    time_average_in(psi, &eig, &dense::to_dense(r)?, n_max)
}

pub fn time_average_in(
    psi: &StateVector,
    eig: &EigenDecomposition,
    r: &DenseOperator,
    n_max: usize,
) -> Result<TimeAverage> {
    if psi.len() != eig.dim() {
        return Err(Error::DimensionMismatch(psi.len(), eig.dim()));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::invalid(format!("state is not normalized (norm {norm})")));
    }
    let p = &eig.eigenvectors;
    let a = adjoint(&p.view()).dot(psi);
    let b = in_eigenbasis(eig, r);
    let mut moments = vec![0.0; n_max + 1];
    let mut degenerate_part = vec![0.0; n_max + 1];
    for blk in &eig.blocks {
        let mut val = Complex64::new(0.0, 0.0);
        for i in blk.clone() {
            for j in blk.clone() {
                val += a[i].conj() * b[[i, j]] * a[j];
            }
        }
        let lambda = blk.clone().map(|i| eig.eigenvalues[i]).sum::<f64>() / blk.len() as f64;
        for n in 0..=n_max {
            let v = val.re * lambda.powi(n as i32);
            moments[n] += v;
            if blk.len() > 1 {
                degenerate_part[n] += v;
            }
        }
    }
    Ok(TimeAverage {
        moments,
        degenerate_part,
    })
}

// ---------------------------------------------------------------------------
// Perturbed spectra and the Δ / 𝓡 norms

/// Eigendata of `H` and `H + hR` together with `b = P†RP'`.
#[derive(Clone, Debug)]
pub struct PerturbedSpectrum {
    pub h: f64,
    pub lambda: Array1<f64>,
    pub lambda_prime: Array1<f64>,
    /// Eigenvectors of `H + hR` (columns).
    pub p_prime: DenseOperator,
    /// `⟨ψ_j|R|ψ'_k⟩`.
    pub b: DenseOperator,
    /// Gaps at or below this are treated as exact zeros.
    pub tau_gap: f64,
    breakpoints: Vec<f64>,
}

impl PerturbedSpectrum {
    /// `r_in_basis` is `P†RP` for the eigenbasis `P` of `eig`.
    pub fn new(eig: &EigenDecomposition, r_in_basis: &DenseOperator, h: f64) -> Result<Self> {
        let d = eig.dim();
        // Diagonalize Λ + h·P†RP, which is close to diagonal for small h.
        let mut m = r_in_basis.mapv(|z| z * h);
        for i in 0..d {
            m[[i, i]] += eig.eigenvalues[i];
        }
        let inner = eig_hermitian_with(&m, Some(eig.tau_degen))?;
        let p_prime = eig.eigenvectors.dot(&inner.eigenvectors);
        let b = r_in_basis.dot(&inner.eigenvectors);
        let tau_gap = eig.tau_degen.max(1e-14 * eig.norm().max(1.0));
        let mut breakpoints: Vec<f64> = eig
            .eigenvalues
            .iter()
            .flat_map(|l| inner.eigenvalues.iter().map(move |lp| (l - lp).abs()))
            .filter(|g| *g > tau_gap)
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        Ok(PerturbedSpectrum {
            h,
            lambda: eig.eigenvalues.clone(),
            lambda_prime: inner.eigenvalues,
            p_prime,
            b,
            tau_gap,
            breakpoints,
        })
    }

    /// Sorted distinct gaps `|λ_j − λ'_k|` above the zero tolerance.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `e^{−i(H + hR)s}`.
    pub fn evolve(&self, s: f64) -> DenseOperator {
        let mut scaled = self.p_prime.clone();
        for (mut col, &l) in scaled.columns_mut().into_iter().zip(self.lambda_prime.iter()) {
            let w = Complex64::from_polar(1.0, -l * s);
            col.mapv_inplace(|z| z * w);
        }
        scaled.dot(&adjoint(&self.p_prime.view()))
    }

    fn masked(&self, eps: f64) -> (DenseOperator, DenseOperator, DenseOperator) {
        let d = self.lambda.len();
        let mut near = Array2::<Complex64>::zeros((d, d));
        let mut signed = Array2::<Complex64>::zeros((d, d));
        let mut far = Array2::<Complex64>::zeros((d, d));
        for j in 0..d {
            for k in 0..d {
                let g = self.lambda[j] - self.lambda_prime[k];
                let bjk = self.b[[j, k]];
                if g.abs() <= self.tau_gap {
                    near[[j, k]] = bjk;
                } else if g.abs() < eps {
                    near[[j, k]] = bjk;
                    signed[[j, k]] = bjk * g.signum();
                } else {
                    far[[j, k]] = bjk / g;
                }
            }
        }
        (near, signed, far)
    }

    /// Δ and 𝓡 at one ε, optionally warm-starting the power iterations.
    fn evaluate(&self, eps: f64, warm: &mut Option<[NormState; 3]>) -> DeltaCalR {
        let (near, signed, far) = self.masked(eps);
        let starts: [Option<&Array1<Complex64>>; 3] = match warm {
            Some(w) => [Some(&w[0].vector), Some(&w[1].vector), Some(&w[2].vector)],
            None => [None, None, None],
        };
        let sn = spectral_norm_warm(&near.view(), starts[0]);
        let ss = spectral_norm_warm(&signed.view(), starts[1]);
        let sf = spectral_norm_warm(&far.view(), starts[2]);
        let out = DeltaCalR {
            epsilon: eps,
            h: self.h,
            near_norm: sn.norm,
            signed_norm: ss.norm,
            delta_norm: sn.norm.max(ss.norm),
            calr_norm: sf.norm,
        };
        *warm = Some([sn, ss, sf]);
        out
    }

    /// ε candidates: 0, up to `k − 2` log-spaced breakpoints, and a value
    /// just above the largest gap (where 𝓡 vanishes).
    fn candidates(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0];
        let bp = &self.breakpoints;
        if bp.is_empty() {
            return out;
        }
        let (lo, hi) = (bp[0], bp[bp.len() - 1]);
        let inner = k.saturating_sub(2).max(1);
        let mut last = None;
        for i in 0..inner {
            let target = if inner == 1 {
                lo
            } else {
                lo * (hi / lo).powf(i as f64 / (inner - 1) as f64)
            };
            // Smallest breakpoint at or above the log-spaced target.
            let idx = bp.partition_point(|&x| x < target * (1.0 - 1e-12)).min(bp.len() - 1);
            if last != Some(idx) {
                out.push(bp[idx]);
                last = Some(idx);
            }
        }
        out.push(hi * (1.0 + 1e-9));
        out
    }

    /// Δ / 𝓡 along an increasing ε grid, with Δ replaced by its running max.
    pub fn profile(&self, max_candidates: usize, eps_cap: Option<f64>) -> Vec<DeltaProfilePoint> {
        let mut grid = self.candidates(max_candidates);
        if let Some(cap) = eps_cap {
            grid.retain(|&e| e <= cap);
            if grid.last().copied() != Some(cap) {
                grid.push(cap);
            }
        }
        let mut warm = None;
        let mut running = 0.0f64;
        grid.into_iter()
            .map(|eps| {
                let dc = self.evaluate(eps, &mut warm);
                running = running.max(dc.delta_norm);
                DeltaProfilePoint {
                    at: dc,
                    max_delta: running,
                }
            })
            .collect()
    }
}

/// Values of Δ_H^ε(R) and ‖𝓡_H^ε(R)‖ at one ε.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaCalR {
    pub epsilon: f64,
    pub h: f64,
    /// `‖Σ_{|λ_j−λ'_k|<ε} b_jk |ψ_j⟩⟨ψ'_k|‖`.
    pub near_norm: f64,
    /// The same sum weighted by `sgn(λ_j − λ'_k)`.
    pub signed_norm: f64,
    pub delta_norm: f64,
    /// `‖Σ_{|λ_j−λ'_k|≥ε} b_jk/(λ_j−λ'_k) |ψ_j⟩⟨ψ'_k|‖`.
    pub calr_norm: f64,
}

#[derive(Clone, Debug)]
pub struct DeltaProfilePoint {
    pub at: DeltaCalR,
    /// Max of Δ over the evaluated ε' ≤ this ε.
    pub max_delta: f64,
}

/// How ε is chosen for the interference bounds.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonPolicy {
    /// Minimize each bound over the ε candidate grid.
    #[default]
    AutoMin,
    Fixed(f64),
}

/// Δ_H^ε(R) and 𝓡_H^ε(R) with eigenvectors of `H + hR` on the primed side.
pub fn delta_calr(h_op: &PauliSum, r: &PauliSum, h: f64, eps: f64) -> Result<DeltaCalR> {
    if eps < 0.0 || eps.is_nan() {
        return Err(Error::invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    let ps = perturbed(h_op, r, h)?;
    Ok(ps.evaluate(eps, &mut None))
}

fn perturbed(h_op: &PauliSum, r: &PauliSum, h: f64) -> Result<PerturbedSpectrum> {
    h_op.check_same_size(r)?;
    require_hermitian(h_op)?;
    require_hermitian(r)?;
    let eig = eig_hermitian(&dense::to_dense(h_op)?)?;
    let b0 = in_eigenbasis(&eig, &dense::to_dense(r)?);
    PerturbedSpectrum::new(&eig, &b0, h)
}

/// Right-hand side `(1+tε)·h·max_{ε'≤ε} Δ^{ε'}·t + 2h‖𝓡^ε‖` of the general
/// interference bound on `‖e^{−i(H+hR)t} − e^{−iHt}‖`.
fn general_rhs(p: &DeltaProfilePoint, h: f64, t: f64) -> f64 {
    (1.0 + t * p.at.epsilon) * h * p.max_delta * t + 2.0 * h * p.at.calr_norm
}

/// Evaluates `f` along the ε profile and returns its minimum (AutoMin) or
/// its value at the fixed ε, together with the ε used.
fn minimize_over_eps(
    ps: &PerturbedSpectrum,
    policy: EpsilonPolicy,
    f: impl Fn(&DeltaProfilePoint) -> f64,
) -> (f64, f64) {
    let profile = match policy {
        EpsilonPolicy::AutoMin => ps.profile(EPSILON_CANDIDATES, None),
        EpsilonPolicy::Fixed(e) => ps.profile(EPSILON_CANDIDATES, Some(e)),
    };
    match policy {
        EpsilonPolicy::AutoMin => profile
            .iter()
            .map(|p| (f(p), p.at.epsilon))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a }),
        EpsilonPolicy::Fixed(e) => {
            let last = profile.last().expect("profile is nonempty");
            (f(last), e)
        }
    }
}

/// Upper bound on `‖e^{−i(H+hR)t} − e^{−iHt}‖`.
pub fn bound_general(h_op: &PauliSum, r: &PauliSum, h: f64, t: f64, eps: f64) -> Result<f64> {
    if eps < 0.0 || eps.is_nan() {
        return Err(Error::invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let ps = perturbed(h_op, r, h)?;
    Ok(minimize_over_eps(&ps, EpsilonPolicy::Fixed(eps), |p| general_rhs(p, h, t)).0)
}

/// [`bound_general`] minimized over the ε candidate grid; returns `(bound, ε)`.
pub fn bound_general_auto(h_op: &PauliSum, r: &PauliSum, h: f64, t: f64) -> Result<(f64, f64)> {
    if h == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ps = perturbed(h_op, r, h)?;
    Ok(minimize_over_eps(&ps, EpsilonPolicy::AutoMin, |p| general_rhs(p, h, t)))
}

/// `bound_general(H, R1, h, t, ε) + t·h·‖R2‖` on `‖e^{−i(H+hR)t} − e^{−iHt}‖`
/// with `R = R1 + R2`.
pub fn bound_approx_split(h_op: &PauliSum, r1: &PauliSum, r2: &PauliSum, h: f64, t: f64, eps: f64) -> Result<f64> {
    let r2_norm = spectral_norm(&dense::to_dense(r2)?.view());
    Ok(bound_general(h_op, r1, h, t, eps)? + t * h * r2_norm)
}

/// Checks that `r1 + r2` equals `r` up to the canonical-form tolerance.
pub fn check_split(r: &PauliSum, r1: &PauliSum, r2: &PauliSum) -> Result<()> {
    let sum = r1.try_add(r2)?;
    let dev = sum.distance(r);
    if dev > 1e-10 * r.one_norm().max(1.0) {
        return Err(Error::invalid(format!("split does not sum to R (deviation {dev:.3e})")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bound reports

/// Names of bound columns in canonical order.
pub const BOUND_NAMES: [&str; 5] = ["interference_pf1", "general", "approx_split", "pf2_biased", "triangle"];

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    InterferencePf1,
    General,
    ApproxSplit,
    Pf2Biased,
    Triangle,
}

impl BoundKind {
    pub const ALL: [BoundKind; 5] = [
        BoundKind::InterferencePf1,
        BoundKind::General,
        BoundKind::ApproxSplit,
        BoundKind::Pf2Biased,
        BoundKind::Triangle,
    ];

    pub fn name(self) -> &'static str {
        BOUND_NAMES[self as usize]
    }
}

/// One named additive piece of a bound.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub bound: BoundKind,
    pub name: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub t: f64,
    pub r: u64,
    pub empirical: f64,
    /// `(bound, value, ε used)`; ε is 0 for bounds that do not use it.
    pub bounds: Vec<(BoundKind, f64, f64)>,
    pub components: Vec<Component>,
}

impl BoundReport {
    pub fn get(&self, kind: BoundKind) -> Option<f64> {
        self.bounds.iter().find(|b| b.0 == kind).map(|b| b.1)
    }

    pub fn epsilon(&self, kind: BoundKind) -> Option<f64> {
        self.bounds.iter().find(|b| b.0 == kind).map(|b| b.2)
    }
}

struct SplitData {
    r1_basis: DenseOperator,
    r2_norm: f64,
}

struct Pf2Data {
    orth_basis: DenseOperator,
    residual_norm: f64,
    c_ml: f64,
}

/// Evaluates empirical errors and all applicable bounds for one product
/// formula, caching everything that does not depend on `(t, r)`.
pub struct BoundEngine {
    pf: ProductFormula,
    r_basis: Option<DenseOperator>,
    pf1: Option<(f64, f64)>,
    split: Option<SplitData>,
    pf2: Option<Pf2Data>,
    norm: NormKind,
}

impl BoundEngine {
    /// `split` is an optional `(H_a, H_b)` partition of `H` (for instance
    /// nearest-neighbour and long-range parts); its groupwise restriction
    /// defines the orthogonal part `R1` of the PF1 leading error.
    pub fn new(pf: ProductFormula, split: Option<&(PauliSum, PauliSum)>, requested: &[BoundKind]) -> Result<Self> {
        let ham = pf.hamiltonian().clone();
        let norm = NormKind::auto(ham.n_qubits());
        let wants = |k: BoundKind| requested.contains(&k);
        let eig = pf.exact_eig()?;
        let needs_r = wants(BoundKind::InterferencePf1) || wants(BoundKind::General) || wants(BoundKind::ApproxSplit);
        let leading = if needs_r { Some(pf.leading_error(true)?) } else { None };
        let r_basis = match &leading {
            Some(le) => Some(in_eigenbasis(eig, &dense::to_dense(&le.r)?)),
            None => None,
        };
        let pf1 = if pf.order() == 1 && wants(BoundKind::InterferencePf1) {
            Some(pf1_nested_constants(ham.groups(), norm)?)
        } else {
            None
        };
        let split = match (pf.order(), split, &leading) {
            (1, Some((nn, _)), Some(le)) if wants(BoundKind::ApproxSplit) => {
                let r1 = restricted_pf1_leading(&ham, nn)?;
                let r2 = le.r.try_sub(&r1)?;
                Some(SplitData {
                    r1_basis: in_eigenbasis(eig, &dense::to_dense(&r1)?),
                    r2_norm: operator_norm(&r2, norm)?,
                })
            }
            _ => None,
        };
        let pf2 = if pf.order() == 2 && ham.len() == 2 && wants(BoundKind::Pf2Biased) {
            let g = ham.groups();
            let consts = pf2_nested_constants(&g[0], &g[1], norm)?;
            let k = commutator(&g[0], &g[1])?;
            Some(Pf2Data {
                orth_basis: in_eigenbasis(eig, &dense::to_dense(&consts.orthogonal_piece)?),
                residual_norm: operator_norm(&commutator(&g[1], &k)?, norm)? / 12.0,
                c_ml: consts.c_ml,
            })
        } else {
            None
        };
        Ok(BoundEngine {
            pf,
            r_basis,
            pf1,
            split,
            pf2,
            norm,
        })
    }

    pub fn product_formula(&self) -> &ProductFormula {
        &self.pf
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm
    }

    /// Bounds this engine was prepared for.
    pub fn available(&self) -> Vec<BoundKind> {
        let mut out = Vec::new();
        if self.pf1.is_some() {
            out.push(BoundKind::InterferencePf1);
        }
        if self.r_basis.is_some() {
            out.push(BoundKind::General);
        }
        if self.split.is_some() {
            out.push(BoundKind::ApproxSplit);
        }
        if self.pf2.is_some() {
            out.push(BoundKind::Pf2Biased);
        }
        out.push(BoundKind::Triangle);
        out
    }

    /// Empirical error plus the requested bounds at `(t, r)`.
    pub fn report(&self, t: f64, r: u64, requested: &[BoundKind], policy: EpsilonPolicy) -> Result<BoundReport> {
        self.evaluate(t, r, requested, policy, true)
    }

    /// As [`BoundEngine::report`] without the empirical error, which is left NaN.
    pub fn bounds_only(&self, t: f64, r: u64, requested: &[BoundKind], policy: EpsilonPolicy) -> Result<BoundReport> {
        self.evaluate(t, r, requested, policy, false)
    }

    fn evaluate(
        &self,
        t: f64,
        r: u64,
        requested: &[BoundKind],
        policy: EpsilonPolicy,
        with_empirical: bool,
    ) -> Result<BoundReport> {
        if r == 0 {
            return Err(Error::invalid("the number of steps r must be at least 1"));
        }
        let eig = self.pf.exact_eig()?;
        let dt = t / r as f64;
        let p = self.pf.order() as i32;
        let seg = self.pf.unitary(dt)?;
        let empirical = if with_empirical {
            let exact_t = self.pf.exact_unitary(t)?;
            spectral_norm(&(dense::matrix_power(&seg, r) - &exact_t).view())
        } else {
            f64::NAN
        };

        let mut bounds = Vec::new();
        let mut components = Vec::new();
        let mut push = |kind: BoundKind, parts: Vec<(&'static str, f64)>, eps: f64| {
            let total: f64 = parts.iter().map(|p| p.1).sum();
            for (name, value) in parts {
                components.push(Component {
                    bound: kind,
                    name,
                    value,
                });
            }
            bounds.push((kind, total, eps));
        };

        let wants = |k: BoundKind| requested.contains(&k);
        let needs_main =
            wants(BoundKind::InterferencePf1) || wants(BoundKind::General) || wants(BoundKind::ApproxSplit);
        // Perturbation H + δt^p R shared by the PF1, general and split bounds.
        let main = match (&self.r_basis, needs_main) {
            (Some(rb), true) => Some(PerturbedSpectrum::new(eig, rb, dt.powi(p))?),
            _ => None,
        };
        let main_profile = main.as_ref().map(|ps| match policy {
            EpsilonPolicy::AutoMin => ps.profile(EPSILON_CANDIDATES, None),
            EpsilonPolicy::Fixed(e) => ps.profile(EPSILON_CANDIDATES, Some(e)),
        });
        let pick = |profile: &[DeltaProfilePoint], f: &dyn Fn(&DeltaProfilePoint) -> f64| -> (f64, usize) {
            match policy {
                EpsilonPolicy::AutoMin => profile
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (f(p), i))
                    .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a }),
                EpsilonPolicy::Fixed(_) => (f(&profile[profile.len() - 1]), profile.len() - 1),
            }
        };
        // Exact one-segment distance to the perturbed evolution.
        let remainder = main
            .as_ref()
            .map(|ps| r as f64 * spectral_norm(&(&seg - &ps.evolve(dt)).view()));

        if wants(BoundKind::InterferencePf1) {
            if let (Some((c1, c2)), Some(profile)) = (self.pf1, main_profile.as_ref()) {
                // R' = Σ[H_j,H_k]/i = 2R and h' = δt/2, so Δ(R') = 2Δ(R).
                let f = |q: &DeltaProfilePoint| {
                    (1.0 + t * q.at.epsilon) * 2.0 * q.max_delta * t * dt + 4.0 * q.at.calr_norm * dt
                };
                let (_, i) = pick(profile, &f);
                let q = &profile[i];
                push(
                    BoundKind::InterferencePf1,
                    vec![
                        ("c1_term", c1 * t * dt * dt),
                        ("delta_term", (1.0 + t * q.at.epsilon) * 2.0 * q.max_delta * t * dt),
                        ("calr_term", 4.0 * q.at.calr_norm * dt),
                        ("c2_term", c2 * t * dt * dt * dt),
                    ],
                    q.at.epsilon,
                );
            }
        }
        if wants(BoundKind::General) {
            if let (Some(profile), Some(rem)) = (main_profile.as_ref(), remainder) {
                let h = dt.powi(p);
                let (val, i) = pick(profile, &|q| general_rhs(q, h, t));
                push(
                    BoundKind::General,
                    vec![("segment_remainder", rem), ("interference", val)],
                    profile[i].at.epsilon,
                );
            }
        }
        if wants(BoundKind::ApproxSplit) {
            if let (Some(split), Some(rem)) = (self.split.as_ref(), remainder) {
                let h = dt.powi(p);
                let ps = PerturbedSpectrum::new(eig, &split.r1_basis, h)?;
                let (val, eps) = minimize_over_eps(&ps, policy, |q| general_rhs(q, h, t));
                push(
                    BoundKind::ApproxSplit,
                    vec![
                        ("segment_remainder", rem),
                        ("interference_r1", val),
                        ("r2_accumulation", t * h * split.r2_norm),
                    ],
                    eps,
                );
            }
        }
        if wants(BoundKind::Pf2Biased) {
            if let Some(pf2) = self.pf2.as_ref() {
                let h = dt * dt;
                let (val, eps) = if h == 0.0 {
                    (0.0, 0.0)
                } else {
                    let ps = PerturbedSpectrum::new(eig, &pf2.orth_basis, h)?;
                    minimize_over_eps(&ps, policy, |q| general_rhs(q, h, t))
                };
                push(
                    BoundKind::Pf2Biased,
                    vec![
                        ("residual_term", pf2.residual_norm * t * dt * dt),
                        ("interference", val),
                        ("c_ml_term", pf2.c_ml * t * dt * dt * dt),
                    ],
                    eps,
                );
            }
        }
        if wants(BoundKind::Triangle) {
            let one = spectral_norm(&(&seg - &self.pf.exact_unitary(dt)?).view());
            push(BoundKind::Triangle, vec![("segments", r as f64 * one)], 0.0);
        }
        bounds.sort_by_key(|b| b.0);
        Ok(BoundReport {
            t,
            r,
            empirical,
            bounds,
            components,
        })
    }
}

/// PF1 leading error of the grouping restricted to the terms of `part`.
fn restricted_pf1_leading(ham: &GroupedHamiltonian, part: &PauliSum) -> Result<PauliSum> {
    let restricted: Vec<PauliSum> = ham
        .groups()
        .iter()
        .map(|g| {
            PauliSum::from_terms(
                g.n_qubits(),
                g.iter()
                    .filter(|(p, _)| part.coeff(p).norm() > 0.0)
                    .map(|(p, c)| (*p, *c)),
            )
        })
        .collect();
    pf1_leading(&restricted)
}

/// PF1 bound at `(t, r)` with its four components, for a first-order formula.
pub fn bound_pf1(pf: &ProductFormula, t: f64, r: u64, policy: EpsilonPolicy) -> Result<BoundReport> {
    if pf.order() != 1 {
        return Err(Error::InvalidOrder(pf.order()));
    }
    let wanted = [BoundKind::InterferencePf1];
    let engine = BoundEngine::new(pf.clone(), None, &wanted)?;
    engine.report(t, r, &wanted, policy)
}

/// Biased two-group PF2 bound at `(t, r)`.
pub fn bound_pf2_biased(h1: &PauliSum, h2: &PauliSum, t: f64, r: u64, policy: EpsilonPolicy) -> Result<f64> {
    let ham = GroupedHamiltonian::new(vec![h1.clone(), h2.clone()], "pf2")?;
    let wanted = [BoundKind::Pf2Biased];
    let engine = BoundEngine::new(ProductFormula::new(ham, 2)?, None, &wanted)?;
    let rep = engine.report(t, r, &wanted, policy)?;
    Ok(rep.get(BoundKind::Pf2Biased).unwrap_or(0.0))
}
