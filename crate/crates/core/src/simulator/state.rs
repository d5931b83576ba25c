use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{QaaeError, Result};

/// Tolerance on the unit-norm invariant.
pub const NORM_TOL: f64 = 1e-9;

/// Dense amplitude vector over `n` qubits; qubit `j` is bit `j` of the index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = C64::new(1.0, 0.0);
        Self { num_qubits, amps }
    }

    /// Single-qubit `|+>`.
    pub fn plus() -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            num_qubits: 1,
            amps: vec![C64::new(r, 0.0), C64::new(r, 0.0)],
        }
    }

    /// Rejects vectors whose length is not `2^n` or whose norm is off by more
    /// than [`NORM_TOL`].
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        let s = Self::checked_len(num_qubits, amps)?;
        let n = s.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QaaeError::Numeric(format!("amplitude norm {n} is not 1")));
        }
        Ok(s)
    }

    /// Rescales to unit norm.
    pub fn from_amplitudes_normalized(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        let mut s = Self::checked_len(num_qubits, amps)?;
        let n = s.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(QaaeError::Numeric(format!("cannot normalize vector of norm {n}")));
        }
        s.amps.iter_mut().for_each(|a| *a /= n);
        Ok(s)
    }

    pub(crate) fn from_amplitudes_unchecked(num_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        Self { num_qubits, amps }
    }

    fn checked_len(num_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << num_qubits {
            return Err(QaaeError::Dimension {
                expected: 1 << num_qubits,
                found: amps.len(),
            });
        }
        Ok(Self { num_qubits, amps })
    }

    /// Haar-random pure state from a seeded Gaussian draw.
    pub fn haar_random(num_qubits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random_with(num_qubits, &mut rng)
    }

    pub fn haar_random_with<R: Rng>(num_qubits: usize, rng: &mut R) -> Self {
        let amps: Vec<C64> = (0..1usize << num_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_amplitudes_normalized(num_qubits, amps).expect("gaussian draw has nonzero norm")
    }

    /// `high ⊗ low`: `low` occupies qubits `0..low.n`, `high` the rest.
    pub fn tensor(high: &StateVector, low: &StateVector) -> Self {
        let mut amps = Vec::with_capacity(high.dim() * low.dim());
        for h in &high.amps {
            amps.extend(low.amps.iter().map(|l| h * l));
        }
        Self {
            num_qubits: high.num_qubits + low.num_qubits,
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_dim(other)?;
        Ok(inner(&self.amps, &other.amps))
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub(crate) fn check_dim(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QaaeError::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
