//! Exact dense diagonalization for small registers.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::PauliHamiltonian;
use crate::error::{QaaeError, Result};
use crate::simulator::StateVector;

/// Largest register diagonalized densely.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Gap below which the ground state is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Spectrum {
    num_qubits: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector of `eigenvalues[j]`.
    pub eigenvectors: DMatrix<C64>,
    pub gap: f64,
    pub degenerate: bool,
}

impl Spectrum {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn eigenstate(&self, j: usize) -> StateVector {
        let amps = self.eigenvectors.column(j).iter().copied().collect();
        StateVector::from_amplitudes_unchecked(self.num_qubits, amps)
    }

    pub fn ground_state(&self) -> StateVector {
        self.eigenstate(0)
    }

    /// Eigenbasis coefficients `gamma_j = <lambda_j|psi>`.
    pub fn coefficients(&self, amps: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (j, o) in out.iter_mut().enumerate() {
            let col = self.eigenvectors.column(j);
            *o = col.iter().zip(amps).map(|(v, a)| v.conj() * a).sum();
        }
        out
    }

    /// `sum_j coeffs[j] |lambda_j>` written into `out`.
    pub fn synthesize(&self, coeffs: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for (j, c) in coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.eigenvectors.column(j).iter()) {
                *o += v * c;
            }
        }
    }

    /// Applies `f(lambda_j)` as a diagonal in the eigenbasis.
    pub fn apply_function(&self, amps: &mut [C64], f: impl Fn(f64) -> C64) {
        let mut coeffs = self.coefficients(amps);
        for (c, &l) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= f(l);
        }
        self.synthesize(&coeffs, amps);
    }
}

/// Diagonalizes `h` densely. Real-symmetric matrices take the real solver.
pub fn spectrum(h: &PauliHamiltonian) -> Result<Spectrum> {
    let q = h.num_qubits();
    if q > MAX_DENSE_QUBITS {
        return Err(QaaeError::Capability(format!(
            "exact spectrum needs q <= {MAX_DENSE_QUBITS} (got {q}); run without the spectral oracle"
        )));
    }
    let dense = h.dense_matrix()?;
    let d = dense.nrows();
    let (values, vectors): (Vec<f64>, DMatrix<C64>) = if h.is_real() {
        let real = dense.map(|c| c.re);
        let eig = real.symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = dense.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = DMatrix::<C64>::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }
    let gap = if d > 1 { eigenvalues[1] - eigenvalues[0] } else { f64::INFINITY };
    Ok(Spectrum {
        num_qubits: q,
        eigenvalues,
        eigenvectors,
        gap,
        degenerate: gap < DEGENERACY_TOL,
    })
}
