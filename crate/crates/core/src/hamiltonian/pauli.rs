use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{QaaeError, Result};

/// Largest register the bitmask encoding supports.
pub const MAX_QUBITS: usize = 63;

/// A weighted Pauli string `coeff · P`.
///
/// Qubit `j` is acted on by X when only bit `j` of `x_mask` is set, by Z when
/// only bit `j` of `z_mask` is set, and by Y when both are set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub x_mask: u64,
    pub z_mask: u64,
}

impl PauliTerm {
    pub fn new(coeff: f64, x_mask: u64, z_mask: u64) -> Self {
        Self {
            coeff,
            x_mask,
            z_mask,
        }
    }

    /// Builds a term from a letter string, leftmost letter acting on qubit 0.
    pub fn from_letters(coeff: f64, letters: &str) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        for (j, ch) in letters.chars().enumerate() {
            if j >= MAX_QUBITS {
                return Err(QaaeError::Size(format!(
                    "Pauli string longer than {MAX_QUBITS} qubits"
                )));
            }
            match ch {
                'I' => {}
                'X' => x |= 1 << j,
                'Z' => z |= 1 << j,
                'Y' => {
                    x |= 1 << j;
                    z |= 1 << j;
                }
                other => {
                    return Err(QaaeError::Parse {
                        line: 0,
                        msg: format!("invalid Pauli letter '{other}'"),
                    })
                }
            }
        }
        Ok(Self::new(coeff, x, z))
    }

    pub fn letters(&self, num_qubits: usize) -> String {
        (0..num_qubits)
            .map(|j| {
                let bit = 1u64 << j;
                match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (false, true) => 'Z',
                    (true, true) => 'Y',
                }
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    pub fn support(&self) -> u64 {
        self.x_mask | self.z_mask
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Phase picked up by basis state `b`: `P|b> = phase(b) |b ^ x_mask>`.
    #[inline]
    pub fn phase(&self, b: usize) -> C64 {
        let base = match self.y_count() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        if ((b as u64) & self.z_mask).count_ones() % 2 == 1 {
            -base
        } else {
            base
        }
    }

    /// `<psi|P|psi>` without the coefficient. Callers check dimensions.
    pub fn expectation_raw(&self, amps: &[C64]) -> C64 {
        let x = self.x_mask as usize;
        let mut acc = C64::new(0.0, 0.0);
        for (b, a) in amps.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            acc += amps[b ^ x].conj() * self.phase(b) * a;
        }
        acc
    }

    /// Accumulates `scale · coeff · P |psi>` into `out`.
    pub fn apply_add(&self, amps: &[C64], out: &mut [C64], scale: f64) {
        let x = self.x_mask as usize;
        let w = self.coeff * scale;
        for (b, a) in amps.iter().enumerate() {
            out[b ^ x] += self.phase(b) * a * w;
        }
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let anti = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = 64 - (self.support().leading_zeros() as usize);
        write!(f, "{} {}", self.coeff, self.letters(width.max(1)))
    }
}
