//! Spectral norm as the square root of the top eigenvalue of `A†A`.
//!
//! The eigenvalue is found by Lanczos iteration with full
//! reorthogonalization from a deterministic (or caller-supplied) start
//! vector. Plain power iteration stalls when the top singular values are
//! close, which is the common case for the masked matrices of the
//! interference bounds.

use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use super::eig::eig_hermitian_with;

const SEED: u64 = 0x7e57_5eed;
/// Relative residual `‖A†A y − θ y‖ / θ` at which the Ritz value is accepted.
const REL_TOL: f64 = 1e-11;

/// Converged singular value and its right singular vector, reusable as a
/// warm start for a nearby matrix.
#[derive(Clone, Debug)]
pub struct NormState {
    pub norm: f64,
    pub vector: Array1<Complex64>,
}

fn start_vector(d: usize) -> Array1<Complex64> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEED);
    Array1::from_iter((0..d).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

/// Largest singular value of `a`.
pub fn spectral_norm(a: &ArrayView2<Complex64>) -> f64 {
    spectral_norm_warm(a, None).norm
}

fn dotc(x: &Array1<Complex64>, y: &Array1<Complex64>) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(x: &Array1<Complex64>) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Top eigenpair of the real symmetric tridiagonal matrix `(alpha, beta)`.
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = Array2::<Complex64>::zeros((k, k));
    for i in 0..k {
        t[[i, i]] = Complex64::new(alpha[i], 0.0);
        if i + 1 < k {
            t[[i, i + 1]] = Complex64::new(beta[i], 0.0);
            t[[i + 1, i]] = Complex64::new(beta[i], 0.0);
        }
    }
    let e = eig_hermitian_with(&t, Some(0.0)).expect("tridiagonal matrix is symmetric");
    let top = k - 1;
    (
        e.eigenvalues[top],
        (0..k).map(|i| e.eigenvectors[[i, top]].re).collect(),
    )
}

/// Lanczos on `A†A`, optionally started from a previous right singular vector.
pub fn spectral_norm_warm(a: &ArrayView2<Complex64>, start: Option<&Array1<Complex64>>) -> NormState {
    let d = a.ncols();
    if d == 0 || a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return NormState {
            norm: 0.0,
            vector: Array1::zeros(d),
        };
    }
    let ah = a.t().mapv(|z| z.conj());
    let apply = |v: &Array1<Complex64>| ah.dot(&a.dot(v));
    let mut q = match start {
        Some(s) if s.len() == d && norm2(s) > 0.0 => {
            // A little of the fixed start keeps every direction represented.
            s + &(start_vector(d) * Complex64::new(1e-4, 0.0))
        }
        _ => start_vector(d),
    };
    let n0 = norm2(&q);
    q.mapv_inplace(|z| z / n0);

    let mut basis: Vec<Array1<Complex64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
    let mut next_check = 8usize;
    loop {
        let mut w = apply(&q);
        let a_j = dotc(&q, &w).re;
        w = w - &q * Complex64::new(a_j, 0.0);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            w = w - prev * Complex64::new(b, 0.0);
        }
        basis.push(q);
        alpha.push(a_j);
        // Full reorthogonalization, twice is enough.
        for _ in 0..2 {
            for v in &basis {
                let c = dotc(v, &w);
                w.zip_mut_with(v, |x, y| *x -= c * y);
            }
        }
        let b_j = norm2(&w);
        let k = alpha.len();
        let exhausted = k >= d || b_j <= 1e-14 * alpha.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if k >= next_check || exhausted {
            let (theta, s) = tridiagonal_top(&alpha, &beta);
            let residual = b_j * s[k - 1].abs();
            if exhausted || residual <= REL_TOL * theta.abs() {
                let mut y = Array1::<Complex64>::zeros(d);
                for (v, &si) in basis.iter().zip(&s) {
                    y.zip_mut_with(v, |acc, x| *acc += x * si);
                }
                let ny = norm2(&y);
                if ny > 0.0 {
                    y.mapv_inplace(|z| z / ny);
                }
                // Both the Ritz value and the Rayleigh quotient of the Ritz
                // vector are lower bounds on the top eigenvalue.
                let rho = norm2(&a.dot(&y)).powi(2);
                return NormState {
                    norm: rho.max(theta).sqrt(),
                    vector: y,
                };
            }
            next_check = (next_check * 2).min(d);
        }
        beta.push(b_j);
        q = w.mapv(|z| z / b_j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{eig_hermitian, identity, to_dense};
    use crate::pauli::PauliSum;
    use ndarray::array;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_has_unit_norm() {
        assert!((spectral_norm(&identity(8).view()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal() {
        let a = array![[c(2.0), c(0.0)], [c(0.0), c(-5.0)]];
        assert!((spectral_norm(&a.view()) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_pauli() {
        let a = to_dense(&PauliSum::real_term("XY", 2.0).unwrap()).unwrap();
        assert!((spectral_norm(&a.view()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(spectral_norm(&ndarray::Array2::<Complex64>::zeros((4, 4)).view()), 0.0);
    }

    #[test]
    fn agrees_with_eigenvalues() {
        let h = &(&PauliSum::real_term("XXI", 1.0).unwrap() + &PauliSum::real_term("IZZ", 0.7).unwrap())
            + &PauliSum::real_term("YIY", -0.4).unwrap();
        let m = to_dense(&h).unwrap();
        let e = eig_hermitian(&m).unwrap();
        assert!((spectral_norm(&m.view()) - e.norm()).abs() < 1e-9 * e.norm());
    }

    #[test]
    fn non_normal() {
        // Singular values of [[0, 3], [0, 0]] are 3 and 0.
        let a = array![[c(0.0), c(3.0)], [c(0.0), c(0.0)]];
        assert!((spectral_norm(&a.view()) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn close_singular_values() {
        // diag(1, 1 − 1e-7, …) defeats plain power iteration.
        let d = 64;
        let mut a = ndarray::Array2::<Complex64>::zeros((d, d));
        for i in 0..d {
            a[[i, i]] = c(1.0 - 1e-7 * i as f64);
        }
        assert!((spectral_norm(&a.view()) - 1.0).abs() < 1e-12);
    }
}
