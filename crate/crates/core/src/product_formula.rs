//! Product-formula propagators, their exact error, and leading error terms.

use std::sync::OnceLock;

use ndarray::Array2;
use num_complex::Complex64;

use crate::commutators::{pf1_nested_constants, pf2_nested_constants, NormKind};
use crate::dense::{
    self, check_dense_size, eig_hermitian, evolve_exact, matrix_power, rotate_rows, rotate_vector, spectral_norm,
    unitary_log, DenseOperator, EigenDecomposition, IndexedPauli, StateVector,
};
use crate::error::{Error, Result};
use crate::pauli::{commutator, PauliString, PauliSum};

/// Ordered partition `H = Σ_l H_l` into internally commuting Hermitian groups.
#[derive(Clone, Debug)]
pub struct GroupedHamiltonian {
    n_qubits: usize,
    groups: Vec<PauliSum>,
    total: PauliSum,
    label: String,
}

impl GroupedHamiltonian {
    pub fn new(groups: Vec<PauliSum>, label: impl Into<String>) -> Result<Self> {
        let first = groups
            .first()
            .ok_or_else(|| Error::invalid("a Hamiltonian needs at least one group"))?;
        let n_qubits = first.n_qubits();
        let mut total = PauliSum::zero(n_qubits);
        for (i, g) in groups.iter().enumerate() {
            first.check_same_size(g)?;
            if !g.is_hermitian() {
                return Err(Error::NonHermitian(g.max_imag()));
            }
            if !g.terms_commute() {
                return Err(Error::NonCommutingGroup(i));
            }
            total += g;
        }
        Ok(GroupedHamiltonian {
            n_qubits,
            groups,
            total,
            label: label.into(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn groups(&self) -> &[PauliSum] {
        &self.groups
    }

    pub fn total(&self) -> &PauliSum {
        &self.total
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// True when every pair of groups commutes.
    pub fn groups_commute(&self) -> bool {
        self.groups.iter().enumerate().all(|(i, a)| {
            self.groups[i + 1..]
                .iter()
                .all(|b| commutator(a, b).map(|c| c.is_empty()).unwrap_or(false))
        })
    }
}

/// Suzuki coefficient `u_k = (4 − 4^{1/(2k−1)})^{-1}`.
pub fn suzuki_u(k: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)))
}

/// Factor sequence of `PF_p(δt)` as `(group, weight)` pairs read left to
/// right as an operator product; each factor is `e^{−i H_group · weight · δt}`.
pub fn schedule(order: u32, n_groups: usize) -> Result<Vec<(usize, f64)>> {
    let raw = match order {
        1 => (0..n_groups).map(|g| (g, 1.0)).collect(),
        p if p >= 2 && p % 2 == 0 => suzuki(p / 2, n_groups),
        p => return Err(Error::InvalidOrder(p)),
    };
    Ok(merge_adjacent(raw))
}

fn suzuki(k: u32, n_groups: usize) -> Vec<(usize, f64)> {
    if k == 1 {
        let fwd = (0..n_groups).map(|g| (g, 0.5));
        let back = (0..n_groups).rev().map(|g| (g, 0.5));
        return fwd.chain(back).collect();
    }
    let inner = suzuki(k - 1, n_groups);
    let u = suzuki_u(k);
    let scaled = |w: f64| inner.iter().map(move |&(g, x)| (g, x * w));
    scaled(u)
        .chain(scaled(u))
        .chain(scaled(1.0 - 4.0 * u))
        .chain(scaled(u))
        .chain(scaled(u))
        .collect()
}

fn merge_adjacent(raw: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
    for (g, w) in raw {
        match out.last_mut() {
            Some((last, acc)) if *last == g => *acc += w,
            _ => out.push((g, w)),
        }
    }
    out
}

/// One Pauli rotation `e^{−i·coeff·weight·δt·P}` in application order.
#[derive(Clone, Debug)]
struct Rotation {
    pauli: IndexedPauli,
    angle_per_dt: f64,
}

/// A product formula of fixed order over a grouped Hamiltonian, with the
/// dense data it needs built once.
#[derive(Debug)]
pub struct ProductFormula {
    ham: GroupedHamiltonian,
    order: u32,
    schedule: Vec<(usize, f64)>,
    /// Rightmost factor first.
    rotations: Vec<Rotation>,
    exact: OnceLock<Result<EigenDecomposition, String>>,
}

impl Clone for ProductFormula {
    fn clone(&self) -> Self {
        ProductFormula::new(self.ham.clone(), self.order).expect("already validated")
    }
}

impl ProductFormula {
    pub fn new(ham: GroupedHamiltonian, order: u32) -> Result<Self> {
        let schedule = schedule(order, ham.len())?;
        let n = ham.n_qubits();
        let mut rotations = Vec::new();
        // Group exponentials are exact products of their commuting Pauli rotations.
        for &(g, w) in schedule.iter().rev() {
            for (p, c) in ham.groups()[g].iter() {
                // The identity term rotates by a global phase, kept so PF stays
                // comparable with e^{−iHt}.
                rotations.push(Rotation {
                    pauli: IndexedPauli::new(p, n),
                    angle_per_dt: c.re * w,
                });
            }
        }
        Ok(ProductFormula {
            ham,
            order,
            schedule,
            rotations,
            exact: OnceLock::new(),
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn hamiltonian(&self) -> &GroupedHamiltonian {
        &self.ham
    }

    pub fn schedule(&self) -> &[(usize, f64)] {
        &self.schedule
    }

    pub fn dim(&self) -> usize {
        1 << self.ham.n_qubits()
    }

    /// Eigendecomposition of the full Hamiltonian, computed on first use.
    pub fn exact_eig(&self) -> Result<&EigenDecomposition> {
        check_dense_size(self.ham.n_qubits())?;
        self.exact
            .get_or_init(|| {
                dense::to_dense(self.ham.total())
                    .and_then(|h| eig_hermitian(&h))
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::invalid(e.clone()))
    }

    /// `PF_p(δt)` as a dense unitary.
    pub fn unitary(&self, dt: f64) -> Result<DenseOperator> {
        check_dense_size(self.ham.n_qubits())?;
        let mut m = dense::identity(self.dim());
        self.apply_left(&mut m, dt);
        Ok(m)
    }

    /// `m ← PF_p(δt) · m`.
    pub fn apply_left(&self, m: &mut DenseOperator, dt: f64) {
        for r in &self.rotations {
            rotate_rows(m, &r.pauli, r.angle_per_dt * dt);
        }
    }

    /// `v ← PF_p(δt) · v`.
    pub fn apply_vector(&self, v: &mut StateVector, dt: f64) {
        for r in &self.rotations {
            rotate_vector(v, &r.pauli, r.angle_per_dt * dt);
        }
    }

    /// `e^{−iHt}` from the cached eigendecomposition.
    pub fn exact_unitary(&self, t: f64) -> Result<DenseOperator> {
        Ok(evolve_exact(self.exact_eig()?, t))
    }

    /// `PF_p(t/r)^r` by binary powering.
    pub fn evolution(&self, t: f64, r: u64) -> Result<DenseOperator> {
        check_steps(r)?;
        Ok(matrix_power(&self.unitary(t / r as f64)?, r))
    }

    /// `‖PF_p(t/r)^r − e^{−iHt}‖`.
    pub fn empirical_error(&self, t: f64, r: u64) -> Result<f64> {
        let diff = self.evolution(t, r)? - self.exact_unitary(t)?;
        Ok(spectral_norm(&diff.view()))
    }

    /// `r·‖PF_p(t/r) − e^{−iHt/r}‖`.
    pub fn triangle_bound_numeric(&self, t: f64, r: u64) -> Result<f64> {
        check_steps(r)?;
        let dt = t / r as f64;
        let diff = self.unitary(dt)? - self.exact_unitary(dt)?;
        Ok(r as f64 * spectral_norm(&diff.view()))
    }

    /// `‖(PF_p(t/r)^r − e^{−iHt})ψ_i‖` for the `i`-th eigenvector of `H`,
    /// applying the `r` segments to the vector one at a time.
    pub fn eigenstate_error(&self, state_index: usize, t: f64, r: u64) -> Result<f64> {
        check_steps(r)?;
        let eig = self.exact_eig()?;
        if state_index >= eig.dim() {
            return Err(Error::invalid(format!(
                "eigenstate index {state_index} out of range for dimension {}",
                eig.dim()
            )));
        }
        let psi = eig.eigenvector(state_index);
        let mut v = psi.clone();
        let dt = t / r as f64;
        for _ in 0..r {
            self.apply_vector(&mut v, dt);
        }
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[state_index] * t);
        Ok(v.iter()
            .zip(psi.iter())
            .map(|(a, b)| (a - b * phase).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Effective Hamiltonian of one segment, `i·log(PF_p(δt))/δt`.
    pub fn effective_hamiltonian(&self, dt: f64) -> Result<DenseOperator> {
        unitary_log(&self.unitary(dt)?, dt)
    }

    /// Leading coefficient `R` of `H_eff − H = R δt^p + O(δt^{p+1})`.
    ///
    /// Symbolic for `p = 1` and for `p = 2` with two groups; otherwise
    /// extracted numerically when `allow_numeric` is set.
    pub fn leading_error(&self, allow_numeric: bool) -> Result<LeadingError> {
        let groups = self.ham.groups();
        match (self.order, groups.len()) {
            (1, _) => {
                let r = pf1_leading(groups)?;
                let (c1, _) = pf1_nested_constants(groups, NormKind::OneNorm)?;
                Ok(LeadingError {
                    r,
                    order: 1,
                    remainder_scale: c1,
                    symbolic: true,
                })
            }
            (2, 2) => {
                let c = pf2_nested_constants(&groups[0], &groups[1], NormKind::OneNorm)?;
                Ok(LeadingError {
                    r: &c.orthogonal_piece + &c.residual_piece,
                    order: 2,
                    remainder_scale: c.c_ml,
                    symbolic: true,
                })
            }
            (p, l) if !allow_numeric => Err(Error::UnsupportedSymbolic { order: p, groups: l }),
            _ => self.leading_error_numeric(None),
        }
    }

    /// Richardson extrapolation of `(H_eff(δt) − H)/δt^p` from `δt` and `δt/2`.
    pub fn leading_error_numeric(&self, dt: Option<f64>) -> Result<LeadingError> {
        let p = self.order as i32;
        let h = dense::to_dense(self.ham.total())?;
        let scale = self.ham.total().one_norm().max(1e-12);
        let dt = dt.unwrap_or(0.2 / scale);
        let d = |step: f64| -> Result<DenseOperator> {
            let heff = self.effective_hamiltonian(step)?;
            Ok((heff - &h).mapv(|z| z / step.powi(p)))
        };
        let d1 = d(dt)?;
        let d2 = d(dt / 2.0)?;
        // Odd orders carry a δt^{p+1} correction, symmetric (even) ones δt^{p+2}.
        let (a, b) = if p % 2 == 1 { (2.0, 1.0) } else { (4.0 / 3.0, 1.0 / 3.0) };
        let r_dense = d2.mapv(|z| z * a) - d1.mapv(|z| z * b);
        let spread = spectral_norm(&(&d2 - &d1).view());
        let mut r = dense_to_pauli(&r_dense, self.ham.n_qubits(), 1e-9 * spectral_norm(&r_dense.view()))?;
        r = hermitian_part(&r);
        Ok(LeadingError {
            r,
            order: self.order,
            remainder_scale: spread / dt,
            symbolic: false,
        })
    }
}

fn check_steps(r: u64) -> Result<()> {
    if r == 0 {
        return Err(Error::invalid("the number of steps r must be at least 1"));
    }
    Ok(())
}

/// `(1/(2i)) Σ_{j<k} [H_j, H_k]`.
pub fn pf1_leading(groups: &[PauliSum]) -> Result<PauliSum> {
    let n = groups.first().map(|g| g.n_qubits()).unwrap_or(0);
    let mut acc = PauliSum::zero(n);
    for (j, a) in groups.iter().enumerate() {
        for b in &groups[j + 1..] {
            acc += &commutator(a, b)?;
        }
    }
    Ok(acc.scale(Complex64::new(0.0, -0.5)))
}

fn hermitian_part(s: &PauliSum) -> PauliSum {
    PauliSum::from_terms(s.n_qubits(), s.iter().map(|(p, c)| (*p, Complex64::new(c.re, 0.0))))
}

/// Pauli expansion `Σ_P Tr(P M)/2^n · P`, dropping coefficients below `tol`.
pub fn dense_to_pauli(m: &DenseOperator, n_qubits: usize, tol: f64) -> Result<PauliSum> {
    let d = 1usize << n_qubits;
    if m.nrows() != d {
        return Err(Error::DimensionMismatch(m.nrows(), d));
    }
    let mut out = PauliSum::zero(n_qubits);
    for xm in 0..(1u64 << n_qubits) {
        for zm in 0..(1u64 << n_qubits) {
            let p = PauliString::from_masks(xm, zm);
            let ip = IndexedPauli::new(&p, n_qubits);
            // Tr(P M) = Σ_b P[b, b^x] M[b^x, b]; P[b, b^x] is the phase of column b^x.
            let mut tr = Complex64::new(0.0, 0.0);
            for b in 0..d {
                tr += ip.column_phase(b ^ ip.x) * m[[b ^ ip.x, b]];
            }
            let c = tr / d as f64;
            if c.norm() > tol {
                out.add_term(p, c);
            }
        }
    }
    Ok(out)
}

/// Leading error coefficient with a size proxy for the next order.
#[derive(Clone, Debug)]
pub struct LeadingError {
    /// Hermitian, so that `PF_p(δt) = e^{−i(H + R δt^p + …)δt}`.
    pub r: PauliSum,
    pub order: u32,
    pub remainder_scale: f64,
    pub symbolic: bool,
}

/// Direct product of dense group exponentials in schedule order. Slow; an
/// oracle for [`ProductFormula::unitary`].
pub fn pf_unitary_by_groups(ham: &GroupedHamiltonian, order: u32, dt: f64) -> Result<DenseOperator> {
    let sched = schedule(order, ham.len())?;
    let eigs: Vec<EigenDecomposition> = ham
        .groups()
        .iter()
        .map(|g| dense::to_dense(g).and_then(|m| eig_hermitian(&m)))
        .collect::<Result<_>>()?;
    let d = 1usize << ham.n_qubits();
    let mut acc: DenseOperator = Array2::eye(d);
    for (g, w) in sched {
        acc = acc.dot(&evolve_exact(&eigs[g], w * dt));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::max_abs;

    fn tfi2() -> GroupedHamiltonian {
        GroupedHamiltonian::new(
            vec![
                PauliSum::real_term("XX", 1.0).unwrap(),
                &PauliSum::real_term("ZI", 1.0).unwrap() + &PauliSum::real_term("IZ", 1.0).unwrap(),
            ],
            "tfi2",
        )
        .unwrap()
    }

    #[test]
    fn suzuki_coefficient() {
        assert!((suzuki_u(2) - 1.0 / (4.0 - 4f64.powf(1.0 / 3.0))).abs() < 1e-15);
    }

    #[test]
    fn schedules() {
        assert_eq!(schedule(1, 3).unwrap(), vec![(0, 1.0), (1, 1.0), (2, 1.0)]);
        assert_eq!(schedule(2, 2).unwrap(), vec![(0, 0.5), (1, 1.0), (0, 0.5)]);
        assert!(matches!(schedule(3, 2), Err(Error::InvalidOrder(3))));
        assert!(matches!(schedule(0, 2), Err(Error::InvalidOrder(0))));
        let s4 = schedule(4, 2).unwrap();
        let total: f64 = s4.iter().filter(|(g, _)| *g == 1).map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_noncommuting_group() {
        let bad = &PauliSum::real_term("X", 1.0).unwrap() + &PauliSum::real_term("Z", 1.0).unwrap();
        assert!(matches!(
            GroupedHamiltonian::new(vec![bad], "bad"),
            Err(Error::NonCommutingGroup(0))
        ));
    }

    #[test]
    fn pf1_is_two_factor_product() {
        let ham = tfi2();
        let pf = ProductFormula::new(ham.clone(), 1).unwrap();
        let direct = pf_unitary_by_groups(&ham, 1, 0.1).unwrap();
        assert!(max_abs(&(pf.unitary(0.1).unwrap() - direct).view()) < 1e-12);
    }

    #[test]
    fn single_group_is_exact() {
        let g = &PauliSum::real_term("ZZ", 0.3).unwrap() + &PauliSum::real_term("XX", 0.8).unwrap();
        let pf = ProductFormula::new(GroupedHamiltonian::new(vec![g], "one").unwrap(), 1).unwrap();
        assert!(max_abs(&(pf.unitary(0.7).unwrap() - pf.exact_unitary(0.7).unwrap()).view()) < 1e-12);
        assert!(pf.empirical_error(3.0, 5).unwrap() < 1e-10);
    }

    #[test]
    fn pf2_is_symmetric() {
        let pf = ProductFormula::new(tfi2(), 2).unwrap();
        let prod = pf.unitary(0.3).unwrap().dot(&pf.unitary(-0.3).unwrap());
        assert!(max_abs(&(prod - dense::identity(4)).view()) < 1e-12);
    }

    #[test]
    fn triangle_at_one_step_equals_empirical() {
        let pf = ProductFormula::new(tfi2(), 1).unwrap();
        let e = pf.empirical_error(0.5, 1).unwrap();
        let tri = pf.triangle_bound_numeric(0.5, 1).unwrap();
        assert!((e - tri).abs() < 1e-12);
        assert!(pf.empirical_error(0.0, 3).unwrap() < 1e-14);
        assert!(pf.triangle_bound_numeric(2.0, 10).unwrap() >= pf.empirical_error(2.0, 10).unwrap());
    }

    #[test]
    fn eigenstate_error_vanishes_at_zero_time() {
        let pf = ProductFormula::new(tfi2(), 1).unwrap();
        assert!(pf.eigenstate_error(0, 0.0, 4).unwrap() < 1e-14);
        assert!(pf.eigenstate_error(4, 1.0, 4).is_err());
    }

    #[test]
    fn pf1_leading_of_two_groups() {
        let ham = tfi2();
        let le = ProductFormula::new(ham.clone(), 1)
            .unwrap()
            .leading_error(false)
            .unwrap();
        let expect = commutator(&ham.groups()[0], &ham.groups()[1])
            .unwrap()
            .scale(Complex64::new(0.0, -0.5));
        assert!(le.r.distance(&expect) < 1e-15);
        assert!(le.r.is_hermitian());
    }

    #[test]
    fn unsupported_symbolic_without_fallback() {
        let pf = ProductFormula::new(tfi2(), 4).unwrap();
        assert!(matches!(
            pf.leading_error(false),
            Err(Error::UnsupportedSymbolic { order: 4, groups: 2 })
        ));
    }

    #[test]
    fn pauli_expansion_round_trip() {
        let s = &PauliSum::real_term("XYZ", 0.25).unwrap() + &PauliSum::real_term("IIZ", -1.5).unwrap();
        let back = dense_to_pauli(&dense::to_dense(&s).unwrap(), 3, 1e-12).unwrap();
        assert!(back.distance(&s) < 1e-14);
    }
}
