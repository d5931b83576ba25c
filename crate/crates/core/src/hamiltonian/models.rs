use rand::Rng;

use super::{PauliHamiltonian, PauliTerm};
use crate::error::{QaaeError, Result};

/// `alpha·I + r·sigma` on one qubit; eigenvalues `alpha ∓ |r|`.
pub fn build_two_level(alpha: f64, r: [f64; 3]) -> Result<PauliHamiltonian> {
    let norm = r.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(QaaeError::Degenerate(
            "two-level field |r| = 0 gives a degenerate spectrum".into(),
        ));
    }
    PauliHamiltonian::new(
        1,
        [
            PauliTerm::new(alpha, 0, 0),
            PauliTerm::new(r[0], 1, 0),
            PauliTerm::new(r[1], 1, 1),
            PauliTerm::new(r[2], 0, 1),
        ],
    )
}

/// Open-chain Ising model with transverse field `g` and longitudinal
/// field `h`: `sum Z_j Z_{j+1} + sum (g X_j + h Z_j)`.
pub fn build_ltfim(n: usize, g: f64, h: f64) -> Result<PauliHamiltonian> {
    if n < 2 {
        return Err(QaaeError::Size(format!("Ising chain needs N >= 2, got {n}")));
    }
    let bonds = (0..n - 1).map(|j| PauliTerm::new(1.0, 0, 0b11 << j));
    let transverse = (0..n).map(|j| PauliTerm::new(g, 1 << j, 0));
    let longitudinal = (0..n).map(|j| PauliTerm::new(h, 0, 1 << j));
    PauliHamiltonian::new(n, bonds.chain(transverse).chain(longitudinal))
}

/// `terms` Pauli strings drawn uniformly over all `4^q` labels (repeats
/// merge) with coefficients uniform in `[-1, 1]`.
pub fn random_pauli_hamiltonian<R: Rng>(q: usize, terms: usize, rng: &mut R) -> Result<PauliHamiltonian> {
    if q == 0 || q > 20 {
        return Err(QaaeError::Size(format!("random Hamiltonian needs 1 <= q <= 20, got {q}")));
    }
    let mask = (1u64 << q) - 1;
    let drawn: Vec<PauliTerm> = (0..terms)
        .map(|_| PauliTerm::new(rng.random_range(-1.0..=1.0), rng.random::<u64>() & mask, rng.random::<u64>() & mask))
        .collect();
    PauliHamiltonian::new(q, drawn)
}
