//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use super::{frobenius, hermiticity_defect, DenseOperator};
use crate::error::{Error, Result};

/// Relative off-diagonal Frobenius threshold for convergence.
const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 60;
/// Relative degeneracy tolerance used by [`eig_hermitian`].
pub const TAU_DEGEN_REL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    /// Column `i` is the eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DenseOperator,
    /// Maximal runs of indices whose consecutive eigenvalue gaps are below `tau_degen`.
    pub blocks: Vec<std::ops::Range<usize>>,
    pub tau_degen: f64,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Largest |λ|, i.e. the spectral norm of the source matrix.
    pub fn norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    pub fn eigenvector(&self, i: usize) -> Array1<Complex64> {
        self.eigenvectors.column(i).to_owned()
    }

    /// Index of the block containing eigenvalue `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.blocks
            .iter()
            .position(|b| b.contains(&i))
            .expect("blocks partition the spectrum")
    }
}

/// Eigendecomposition with `τ_degen = 1e-8·‖A‖`.
pub fn eig_hermitian(a: &DenseOperator) -> Result<EigenDecomposition> {
    eig_hermitian_with(a, None)
}

/// Eigendecomposition with an explicit absolute degeneracy tolerance.
pub fn eig_hermitian_with(a: &DenseOperator, tau_degen: Option<f64>) -> Result<EigenDecomposition> {
    let d = a.nrows();
    assert_eq!(d, a.ncols(), "matrix must be square");
    let fro = frobenius(&a.view());
    let defect = hermiticity_defect(&a.view());
    if defect > 1e-9 * fro.max(f64::MIN_POSITIVE) {
        return Err(Error::NonHermitian(defect));
    }
    let (values, vectors_t) = jacobi(a, fro);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    let eigenvalues = Array1::from_iter(order.iter().map(|&i| values[i]));
    let mut eigenvectors = Array2::<Complex64>::zeros((d, d));
    for (col, &i) in order.iter().enumerate() {
        let v = &vectors_t[i * d..(i + 1) * d];
        let phase = v
            .iter()
            .find(|z| z.norm() > 1e-10)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        for (k, z) in v.iter().enumerate() {
            eigenvectors[[k, col]] = z * phase;
        }
    }

    let norm = eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let tau = tau_degen.unwrap_or(TAU_DEGEN_REL * norm);
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=d {
        if i == d || (eigenvalues[i] - eigenvalues[i - 1] >= tau && eigenvalues[i] > eigenvalues[i - 1]) {
            blocks.push(start..i);
            start = i;
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        blocks,
        tau_degen: tau,
    })
}

/// Returns unsorted eigenvalues and the eigenvectors as rows of a flat
/// row-major buffer.
fn jacobi(a: &DenseOperator, fro: f64) -> (Vec<f64>, Vec<Complex64>) {
    let d = a.nrows();
    let mut m: Vec<Complex64> = a.iter().copied().collect();
    // Work on the exactly Hermitian part.
    for i in 0..d {
        m[i * d + i] = Complex64::new(m[i * d + i].re, 0.0);
        for j in i + 1..d {
            let h = 0.5 * (m[i * d + j] + m[j * d + i].conj());
            m[i * d + j] = h;
            m[j * d + i] = h.conj();
        }
    }
    let mut vt = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        vt[i * d + i] = Complex64::new(1.0, 0.0);
    }
    let target = (JACOBI_TOL * fro).powi(2);

    // One sweep past the threshold is nearly free under quadratic
    // convergence and brings the residual down to roundoff.
    let mut polish = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * m[i * d + j].norm_sqr())
            .sum();
        if off <= target {
            if polish || off == 0.0 {
                break;
            }
            polish = true;
        }
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut m, &mut vt, d, p, q, fro);
            }
        }
    }
    let values = (0..d).map(|i| m[i * d + i].re).collect();
    (values, vt)
}

/// Annihilates `m[p][q]` with the unitary `G = D·J`, `D = diag(1, e^{−iφ})`
/// on (p, q) and `J` the real Jacobi rotation, updating `m ← G†mG`.
fn rotate(m: &mut [Complex64], vt: &mut [Complex64], d: usize, p: usize, q: usize, fro: f64) {
    let apq = m[p * d + q];
    let g = apq.norm();
    if g <= 1e-300 || g < f64::EPSILON * 1e-3 * fro {
        return;
    }
    let app = m[p * d + p].re;
    let aqq = m[q * d + q].re;
    let e = apq.conj() / g; // e^{−iφ}
    let theta = (aqq - app) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..d {
        if k == p || k == q {
            continue;
        }
        let akp = m[k * d + p];
        let akq = m[k * d + q];
        let nkp = akp * c - akq * e * s;
        let nkq = akp * s + akq * e * c;
        m[k * d + p] = nkp;
        m[k * d + q] = nkq;
        m[p * d + k] = nkp.conj();
        m[q * d + k] = nkq.conj();
    }
    m[p * d + p] = Complex64::new(app - t * g, 0.0);
    m[q * d + q] = Complex64::new(aqq + t * g, 0.0);
    m[p * d + q] = Complex64::new(0.0, 0.0);
    m[q * d + p] = Complex64::new(0.0, 0.0);

    let (head, tail) = vt.split_at_mut(q * d);
    let vp = &mut head[p * d..(p + 1) * d];
    let vq = &mut tail[..d];
    for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a * c - b * e * s;
        *y = a * s + b * e * c;
    }
}
