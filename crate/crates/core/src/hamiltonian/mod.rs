//! Pauli-string Hamiltonians.
//!
//! A Hamiltonian is stored as a deduplicated list of weighted Pauli strings
//! over `q` qubits, together with an optional affine record `(a, b)` that
//! remembers how it was rescaled from the physical model: the stored operator
//! is `a·H_phys + b·I`, so physical energies come back as `(E - b) / a`.

mod io;
mod models;
mod pauli;
mod spectrum;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QaaeError, Result};
use crate::simulator::StateVector;

pub use io::{parse_pauli_file, serialize_pauli_file};
pub use models::{build_ltfim, build_two_level, random_pauli_hamiltonian};
pub use pauli::{PauliTerm, MAX_QUBITS};
pub use spectrum::{spectrum, Spectrum, DEGENERACY_TOL, MAX_DENSE_QUBITS};

/// Default normalization window. Keeps the normalized spectrum away from 0.
pub const DEFAULT_WINDOW: (f64, f64) = (0.05, 0.95);

/// Affine map `H_norm = scale·H_phys + shift·I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub scale: f64,
    pub shift: f64,
}

impl NormRecord {
    pub fn to_physical(&self, e_norm: f64) -> f64 {
        (e_norm - self.shift) / self.scale
    }

    pub fn to_normalized(&self, e_phys: f64) -> f64 {
        self.scale * e_phys + self.shift
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
    norm_record: Option<NormRecord>,
}

impl PauliHamiltonian {
    /// Merges duplicate strings (first occurrence keeps its position) and
    /// drops terms whose summed coefficient is zero.
    pub fn new(num_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QaaeError::Size(format!(
                "qubit count {num_qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        let range = (1u64 << num_qubits) - 1;
        let mut merged: Vec<PauliTerm> = Vec::new();
        for t in terms {
            if !t.coeff.is_finite() {
                return Err(QaaeError::Numeric(format!("non-finite coefficient {}", t.coeff)));
            }
            if t.support() & !range != 0 {
                return Err(QaaeError::Dimension {
                    expected: num_qubits,
                    found: 64 - t.support().leading_zeros() as usize,
                });
            }
            match merged
                .iter_mut()
                .find(|m| m.x_mask == t.x_mask && m.z_mask == t.z_mask)
            {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        Ok(Self {
            num_qubits,
            terms: merged,
            norm_record: None,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_record(&self) -> Option<NormRecord> {
        self.norm_record
    }

    /// Energy on the physical scale. Identity when no record is attached.
    pub fn to_physical(&self, e: f64) -> f64 {
        self.norm_record.map_or(e, |r| r.to_physical(e))
    }

    /// Coefficient of the identity string (0 when absent).
    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.is_identity())
            .map_or(0.0, |t| t.coeff)
    }

    /// True when the dense matrix is real (every string has an even Y count).
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.y_count() % 2 == 0)
    }

    /// Returns `scale·H + shift·I`, composing with any existing record.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !shift.is_finite() {
            return Err(QaaeError::Normalization(format!(
                "affine map needs a finite positive scale, got ({scale}, {shift})"
            )));
        }
        let mut terms: Vec<PauliTerm> = self
            .terms
            .iter()
            .map(|t| PauliTerm::new(t.coeff * scale, t.x_mask, t.z_mask))
            .collect();
        terms.push(PauliTerm::new(shift, 0, 0));
        let mut out = Self::new(self.num_qubits, terms)?;
        let prev = self.norm_record.unwrap_or(NormRecord { scale: 1.0, shift: 0.0 });
        out.norm_record = Some(NormRecord {
            scale: scale * prev.scale,
            shift: scale * prev.shift + shift,
        });
        Ok(out)
    }

    /// Affine rescale placing the spectrum exactly on `[lo, hi]`.
    pub fn normalize_affine(&self, lo: f64, hi: f64) -> Result<Self> {
        let spec = spectrum(self)?;
        let n = spec.eigenvalues.len();
        self.normalize_with_bounds(lo, hi, spec.eigenvalues[0], spec.eigenvalues[n - 1])
    }

    /// As [`normalize_affine`](Self::normalize_affine) with caller-supplied
    /// spectral bounds, for registers too large to diagonalize.
    pub fn normalize_with_bounds(&self, lo: f64, hi: f64, min: f64, max: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return Err(QaaeError::Normalization(format!(
                "window ({lo}, {hi}) must satisfy 0 < lo < hi <= 1"
            )));
        }
        if !(max > min) {
            return Err(QaaeError::Normalization(format!(
                "spectral width is zero (min = max = {min})"
            )));
        }
        let scale = (hi - lo) / (max - min);
        let shift = lo - scale * min;
        self.affine(scale, shift)
    }

    /// `sum_l w_l <s|P_l|s>` with norm and imaginary-residue checks.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        if s.dim() != self.dim() {
            return Err(QaaeError::Dimension {
                expected: self.dim(),
                found: s.dim(),
            });
        }
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QaaeError::Numeric(format!("state norm {norm} is not 1")));
        }
        let e = self.expectation_unchecked(s.amps());
        if e.im.abs() > 1e-8 {
            return Err(QaaeError::Numeric(format!(
                "expectation has imaginary residue {:e}",
                e.im
            )));
        }
        Ok(e.re)
    }

    pub(crate) fn expectation_unchecked(&self, amps: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|t| t.expectation_raw(amps) * t.coeff)
            .sum()
    }

    /// `H|psi>` written into `out`.
    pub fn apply(&self, amps: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for t in &self.terms {
            t.apply_add(amps, out, 1.0);
        }
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<C64>> {
        if self.num_qubits > MAX_DENSE_QUBITS {
            return Err(QaaeError::Capability(format!(
                "dense matrix needs q <= {MAX_DENSE_QUBITS}, got {}",
                self.num_qubits
            )));
        }
        let d = self.dim();
        let mut m = DMatrix::<C64>::zeros(d, d);
        for t in &self.terms {
            let x = t.x_mask as usize;
            for b in 0..d {
                m[(b ^ x, b)] += t.phase(b) * t.coeff;
            }
        }
        Ok(m)
    }
}
