//! Dense complex matrices: realization of Pauli sums, Hermitian
//! eigendecomposition, exact propagators, norms and unitary logarithms.

mod eig;
mod norm;

pub use eig::{eig_hermitian, eig_hermitian_with, EigenDecomposition};
pub use norm::{spectral_norm, spectral_norm_warm, NormState};

use ndarray::{Array1, Array2, ArrayView2, Axis as NdAxis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliString, PauliSum};

/// Square complex matrix of dimension `2^n`, row-major.
pub type DenseOperator = Array2<Complex64>;

/// Complex state vector.
pub type StateVector = Array1<Complex64>;

pub const DEFAULT_N_MAX: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Qubit cap for dense realization; `TROTTERLENS_NMAX` overrides the default.
pub fn n_max() -> usize {
    std::env::var("TROTTERLENS_NMAX")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_N_MAX)
}

pub fn check_dense_size(n_qubits: usize) -> Result<()> {
    let cap = n_max();
    if n_qubits > cap {
        return Err(Error::Resource { n_qubits, n_max: cap });
    }
    Ok(())
}

/// A Pauli string in basis-index coordinates: qubit `q` lives at bit `n-1-q`
/// of the basis index so that qubit 0 is the most significant tensor factor.
#[derive(Copy, Clone, Debug)]
pub struct IndexedPauli {
    pub x: usize,
    pub z: usize,
    base: Complex64,
}

impl IndexedPauli {
    pub fn new(p: &PauliString, n_qubits: usize) -> Self {
        let reverse = |m: u64| -> usize {
            (0..n_qubits)
                .filter(|q| m >> q & 1 == 1)
                .map(|q| 1usize << (n_qubits - 1 - q))
                .sum()
        };
        IndexedPauli {
            x: reverse(p.x_mask()),
            z: reverse(p.z_mask()),
            base: i_pow((p.x_mask() & p.z_mask()).count_ones()),
        }
    }

    /// The single nonzero entry of column `b` is at row `b ^ x` with this value.
    #[inline]
    pub fn column_phase(&self, b: usize) -> Complex64 {
        if (self.z & b).count_ones() % 2 == 1 {
            -self.base
        } else {
            self.base
        }
    }
}

/// Exact dense realization of `s`.
pub fn to_dense(s: &PauliSum) -> Result<DenseOperator> {
    let n = s.n_qubits();
    check_dense_size(n)?;
    let d = 1usize << n;
    let mut m = Array2::<Complex64>::zeros((d, d));
    for (p, c) in s.iter() {
        let ip = IndexedPauli::new(p, n);
        for b in 0..d {
            m[[b ^ ip.x, b]] += c * ip.column_phase(b);
        }
    }
    Ok(m)
}

/// `s · v` without forming the matrix.
pub fn apply_pauli_sum(s: &PauliSum, v: &StateVector) -> StateVector {
    let n = s.n_qubits();
    assert_eq!(v.len(), 1 << n, "state dimension does not match qubit count");
    let mut out = Array1::<Complex64>::zeros(v.len());
    for (p, c) in s.iter() {
        let ip = IndexedPauli::new(p, n);
        for b in 0..v.len() {
            out[b ^ ip.x] += c * ip.column_phase(b) * v[b];
        }
    }
    out
}

pub fn identity(d: usize) -> DenseOperator {
    Array2::eye(d)
}

pub fn adjoint(a: &ArrayView2<Complex64>) -> DenseOperator {
    a.t().mapv(|z| z.conj())
}

pub fn frobenius(a: &ArrayView2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(a: &ArrayView2<Complex64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of `a − a†`.
pub fn hermiticity_defect(a: &ArrayView2<Complex64>) -> f64 {
    let d = a.nrows();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += (a[[i, j]] - a[[j, i]].conj()).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `P · diag(f(λ)) · P†`.
pub fn spectral_function(eig: &EigenDecomposition, f: impl Fn(f64) -> Complex64) -> DenseOperator {
    let p = &eig.eigenvectors;
    let mut scaled = p.clone();
    for (mut col, &l) in scaled.axis_iter_mut(NdAxis(1)).zip(eig.eigenvalues.iter()) {
        let w = f(l);
        col.mapv_inplace(|z| z * w);
    }
    scaled.dot(&adjoint(&p.view()))
}

/// `e^{−iHt}` from the eigendecomposition of `H`.
pub fn evolve_exact(eig: &EigenDecomposition, t: f64) -> DenseOperator {
    spectral_function(eig, |l| Complex64::from_polar(1.0, -l * t))
}

/// `a^k` by binary powering.
pub fn matrix_power(a: &DenseOperator, mut k: u64) -> DenseOperator {
    let mut result: Option<DenseOperator> = None;
    let mut base = a.clone();
    loop {
        if k & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.dot(&base),
            });
        }
        k >>= 1;
        if k == 0 {
            break;
        }
        base = base.dot(&base);
    }
    result.unwrap_or_else(|| identity(a.nrows()))
}

/// Eigenphases closer than this to ±π are rejected by [`unitary_log`].
pub const BRANCH_CUT_MARGIN: f64 = 1e-6;

/// Hermitian `H_eff` with `e^{−i H_eff δt} = U`, eigenphases in (−π, π).
///
/// Works through the Cayley transform `A = −i(I − U)(I + U)^{-1}`, which is
/// Hermitian with eigenvalues `tan(θ/2)` for eigenphases `e^{−iθ}` of `U`.
/// This keeps full relative precision for small phases.
pub fn unitary_log(u: &DenseOperator, dt: f64) -> Result<DenseOperator> {
    let d = u.nrows();
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::invalid(format!(
            "time step must be finite and nonzero, got {dt}"
        )));
    }
    let id = identity(d);
    let plus = &id + u;
    let minus = &id - u;
    let x = lu_solve(plus, minus).ok_or(Error::BranchCut(BRANCH_CUT_MARGIN))?;
    let a = x.mapv(|z| z * Complex64::new(0.0, -1.0));
    let a = (&a + &adjoint(&a.view())).mapv(|z| z * 0.5);
    let eig = eig_hermitian(&a)?;
    let limit = (0.5 * (std::f64::consts::PI - BRANCH_CUT_MARGIN)).tan();
    if eig.eigenvalues.iter().any(|mu| mu.abs() >= limit) {
        return Err(Error::BranchCut(BRANCH_CUT_MARGIN));
    }
    Ok(spectral_function(&eig, |mu| Complex64::new(2.0 * mu.atan() / dt, 0.0)))
}

/// Solves `a · x = b` by LU with partial pivoting. `None` if `a` is singular
/// to working precision.
fn lu_solve(mut a: DenseOperator, mut b: DenseOperator) -> Option<DenseOperator> {
    let d = a.nrows();
    let scale = max_abs(&a.view()).max(f64::MIN_POSITIVE);
    for k in 0..d {
        let (piv, pmax) = (k..d)
            .map(|i| (i, a[[i, k]].norm()))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= 1e-14 * scale {
            return None;
        }
        if piv != k {
            for j in 0..d {
                a.swap([k, j], [piv, j]);
                b.swap([k, j], [piv, j]);
            }
        }
        let inv = ONE / a[[k, k]];
        for i in k + 1..d {
            let f = a[[i, k]] * inv;
            if f == ZERO {
                continue;
            }
            a[[i, k]] = f;
            for j in k + 1..d {
                let akj = a[[k, j]];
                a[[i, j]] -= f * akj;
            }
            for j in 0..d {
                let bkj = b[[k, j]];
                b[[i, j]] -= f * bkj;
            }
        }
    }
    for k in (0..d).rev() {
        let inv = ONE / a[[k, k]];
        for j in 0..d {
            let mut acc = b[[k, j]];
            for i in k + 1..d {
                acc -= a[[k, i]] * b[[i, j]];
            }
            b[[k, j]] = acc * inv;
        }
    }
    Some(b)
}

/// In place `M ← e^{−iθP} M` for a Pauli string `P`.
pub fn rotate_rows(m: &mut DenseOperator, p: &IndexedPauli, theta: f64) {
    let (s, c) = theta.sin_cos();
    let d = m.nrows();
    if p.x == 0 {
        for a in 0..d {
            let w = Complex64::new(c, 0.0) - Complex64::new(0.0, s) * p.column_phase(a);
            m.row_mut(a).mapv_inplace(|z| z * w);
        }
        return;
    }
    let cc = Complex64::new(c, 0.0);
    for a in 0..d {
        let b = a ^ p.x;
        if b < a {
            continue;
        }
        // (P M)[a] = phase(b) M[b], (P M)[b] = phase(a) M[a].
        let wa = Complex64::new(0.0, -s) * p.column_phase(b);
        let wb = Complex64::new(0.0, -s) * p.column_phase(a);
        let (mut ra, mut rb) = m.multi_slice_mut((ndarray::s![a, ..], ndarray::s![b, ..]));
        ndarray::Zip::from(&mut ra).and(&mut rb).for_each(|x, y| {
            let (xa, yb) = (*x, *y);
            *x = cc * xa + wa * yb;
            *y = cc * yb + wb * xa;
        });
    }
}

/// In place `v ← e^{−iθP} v`.
pub fn rotate_vector(v: &mut StateVector, p: &IndexedPauli, theta: f64) {
    let (s, c) = theta.sin_cos();
    let cc = Complex64::new(c, 0.0);
    let d = v.len();
    if p.x == 0 {
        for a in 0..d {
            v[a] *= cc - Complex64::new(0.0, s) * p.column_phase(a);
        }
        return;
    }
    for a in 0..d {
        let b = a ^ p.x;
        if b < a {
            continue;
        }
        let (xa, yb) = (v[a], v[b]);
        v[a] = cc * xa + Complex64::new(0.0, -s) * p.column_phase(b) * yb;
        v[b] = cc * yb + Complex64::new(0.0, -s) * p.column_phase(a) * xa;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliSum;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn z_is_diagonal() {
        let m = to_dense(&PauliSum::real_term("Z", 1.0).unwrap()).unwrap();
        assert_eq!(
            m,
            ndarray::array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]
        );
    }

    #[test]
    fn empty_sum_is_zero() {
        let m = to_dense(&PauliSum::zero(2)).unwrap();
        assert!(m.iter().all(|z| *z == ZERO));
        assert_eq!(m.nrows(), 4);
    }

    #[test]
    fn xx_is_antidiagonal() {
        let m = to_dense(&PauliSum::real_term("XX", 1.0).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i + j == 3 { 1.0 } else { 0.0 };
                assert_eq!(m[[i, j]], c(expect, 0.0));
            }
        }
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // Z on qubit 0 of two: diag(1, 1, -1, -1).
        let m = to_dense(&PauliSum::real_term("ZI", 1.0).unwrap()).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m[[i, i]].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        let y = to_dense(&PauliSum::real_term("Y", 1.0).unwrap()).unwrap();
        assert_eq!(y[[0, 1]], c(0.0, -1.0));
        assert_eq!(y[[1, 0]], c(0.0, 1.0));
    }

    #[test]
    fn resource_cap() {
        assert!(matches!(
            to_dense(&PauliSum::zero(40)),
            Err(Error::Resource { n_qubits: 40, .. })
        ));
    }

    #[test]
    fn evolve_z_by_pi_is_minus_identity() {
        let eig = eig_hermitian(&to_dense(&PauliSum::real_term("Z", 1.0).unwrap()).unwrap()).unwrap();
        let u = evolve_exact(&eig, std::f64::consts::PI);
        assert!(max_abs(&(&u + &identity(2)).view()) < 1e-15);
        assert!(max_abs(&(&evolve_exact(&eig, 0.0) - &identity(2)).view()) < 1e-15);
    }

    #[test]
    fn log_of_identity_is_zero() {
        let h = unitary_log(&identity(4), 0.3).unwrap();
        assert!(max_abs(&h.view()) < 1e-15);
    }

    #[test]
    fn log_of_z_rotation() {
        let z = to_dense(&PauliSum::real_term("Z", 1.0).unwrap()).unwrap();
        let u = evolve_exact(&eig_hermitian(&z).unwrap(), 0.1);
        let h = unitary_log(&u, 0.1).unwrap();
        assert!(max_abs(&(&h - &z).view()) < 1e-9);
    }

    #[test]
    fn log_rejects_branch_cut() {
        let u = identity(2).mapv(|z| -z);
        assert!(matches!(unitary_log(&u, 1.0), Err(Error::BranchCut(_))));
    }

    #[test]
    fn power_matches_repeated_product() {
        let x = to_dense(&PauliSum::real_term("XY", 0.3).unwrap()).unwrap();
        let u = evolve_exact(&eig_hermitian(&x).unwrap(), 0.7);
        let mut seq = identity(4);
        for _ in 0..13 {
            seq = seq.dot(&u);
        }
        assert!(max_abs(&(&seq - &matrix_power(&u, 13)).view()) < 1e-13);
        assert_eq!(matrix_power(&u, 0), identity(4));
    }

    #[test]
    fn rotation_matches_exponential() {
        for word in ["XZ", "YY", "ZI", "IY"] {
            let p = PauliSum::real_term(word, 1.0).unwrap();
            let exact = evolve_exact(&eig_hermitian(&to_dense(&p).unwrap()).unwrap(), 0.37);
            let mut m = identity(4);
            let ip = IndexedPauli::new(&PauliString::parse(word).unwrap(), 2);
            rotate_rows(&mut m, &ip, 0.37);
            assert!(max_abs(&(&m - &exact).view()) < 1e-15, "{word}");
            let mut v = StateVector::from_elem(4, c(0.5, 0.0));
            rotate_vector(&mut v, &ip, 0.37);
            let expect = exact.dot(&StateVector::from_elem(4, c(0.5, 0.0)));
            assert!(v.iter().zip(expect.iter()).all(|(a, b)| (a - b).norm() < 1e-15));
        }
    }

    #[test]
    fn apply_matches_dense() {
        let s = &PauliSum::real_term("XYZ", 0.7).unwrap() + &PauliSum::real_term("ZZI", -1.1).unwrap();
        let v = StateVector::from_iter((0..8).map(|k| c(k as f64, 1.0 - k as f64)));
        let a = apply_pauli_sum(&s, &v);
        let b = to_dense(&s).unwrap().dot(&v);
        assert!(a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() < 1e-13));
    }
}
