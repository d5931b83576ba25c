use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::StateVector;
use crate::error::{QaaeError, Result};
use crate::hamiltonian::PauliTerm;

/// Branch probability below which a deterministic post-selection fails.
pub const ZERO_BRANCH_TOL: f64 = 1e-14;

/// How the ancilla outcome is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurePolicy {
    /// Post-select outcome 0.
    K0,
    /// Post-select outcome 1.
    K1,
    /// Draw the outcome with its Born probability.
    Sample(u64),
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub k: u8,
    pub p_k: f64,
    /// Renormalized post-measurement state of the remaining qubits.
    pub system: StateVector,
}

/// Projective measurement of one qubit of `joint`.
pub fn measure_ancilla(
    joint: &StateVector,
    ancilla_index: usize,
    policy: MeasurePolicy,
) -> Result<Measurement> {
    let n = joint.num_qubits();
    if ancilla_index >= n || n < 2 {
        return Err(QaaeError::Config(format!(
            "ancilla index {ancilla_index} invalid for {n}-qubit register"
        )));
    }
    let bit = 1usize << ancilla_index;
    let low_mask = bit - 1;
    let mut branches = [Vec::with_capacity(joint.dim() / 2), Vec::with_capacity(joint.dim() / 2)];
    for (i, a) in joint.amps().iter().enumerate() {
        let k = usize::from(i & bit != 0);
        debug_assert_eq!(branches[k].len(), (i & low_mask) | ((i >> 1) & !low_mask));
        branches[k].push(*a);
    }
    let probs = branches
        .clone()
        .map(|b| b.iter().map(|a| a.norm_sqr()).sum::<f64>());
    let total = probs[0] + probs[1];
    let k = match policy {
        MeasurePolicy::K0 => 0,
        MeasurePolicy::K1 => 1,
        MeasurePolicy::Sample(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            usize::from(rng.random::<f64>() * total >= probs[0])
        }
    };
    let p_k = probs[k] / total;
    if p_k < ZERO_BRANCH_TOL {
        return Err(QaaeError::ZeroBranch { k: k as u8, p: p_k });
    }
    let norm = probs[k].sqrt();
    let amps: Vec<C64> = std::mem::take(&mut branches[k]).into_iter().map(|a| a / norm).collect();
    Ok(Measurement {
        k: k as u8,
        p_k,
        system: StateVector::from_amplitudes_unchecked(n - 1, amps),
    })
}

/// `<s|P|s>` of a Pauli string (coefficient ignored). With `shots`, returns
/// the empirical mean of that many ±1 outcomes drawn from the exact
/// eigenvalue distribution.
pub fn pauli_expectation(
    s: &StateVector,
    p: &PauliTerm,
    shots: Option<u32>,
    rng_seed: u64,
) -> Result<f64> {
    let width = 64 - p.support().leading_zeros() as usize;
    if width > s.num_qubits() {
        return Err(QaaeError::Dimension {
            expected: s.num_qubits(),
            found: width,
        });
    }
    let exact = p.expectation_raw(s.amps()).re.clamp(-1.0, 1.0);
    match shots {
        None => Ok(exact),
        Some(0) => Err(QaaeError::Config("shot count must be >= 1".into())),
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let p_plus = 0.5 * (1.0 + exact);
            let plus = (0..n).filter(|_| rng.random::<f64>() < p_plus).count() as f64;
            Ok((2.0 * plus - f64::from(n)) / f64::from(n))
        }
    }
}
