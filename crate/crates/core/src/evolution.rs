//! Controlled short-time evolution
//! `U = |0><0| (x) e^{i w H} + i |1><1| (x) e^{-i w H}`.
//!
//! Two backends produce the same object, a [`Circuit`] on `q + 1` qubits with
//! the control as the highest qubit: an exact spectral block, and a
//! Trotter-Suzuki product formula built from Pauli rotations.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{QaaeError, Result};
use crate::hamiltonian::{PauliHamiltonian, PauliTerm, Spectrum};
use crate::simulator::{BlockOp, Circuit, GateKind, OpaqueBlock};

/// Largest register for which [`trotter_error`] builds dense operators.
pub const MAX_TROTTER_ERROR_QUBITS: usize = 10;
/// Ceiling of the step-count doubling search.
pub const MAX_STEPS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub omega: f64,
    /// Product-formula order, 1 or 2.
    pub order: u8,
    pub steps: usize,
    pub controlled: bool,
    /// When set, `steps` is chosen by [`select_steps`].
    pub target_eps: Option<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            omega: FRAC_PI_4,
            order: 2,
            steps: 1,
            controlled: true,
            target_eps: None,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(QaaeError::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if self.steps < 1 {
            return Err(QaaeError::Config("Trotter steps must be >= 1".into()));
        }
        if !matches!(self.order, 1 | 2) {
            return Err(QaaeError::Config(format!("order must be 1 or 2, got {}", self.order)));
        }
        if let Some(e) = self.target_eps {
            if !(e > 0.0) {
                return Err(QaaeError::Config(format!("target accuracy must be positive, got {e}")));
            }
        }
        Ok(())
    }
}

/// The exact controlled evolution as a dense block over `q + 1` qubits.
struct ExactControlled {
    spectrum: Arc<Spectrum>,
    omega: f64,
    adjoint: bool,
}

impl BlockOp for ExactControlled {
    fn arity(&self) -> usize {
        self.spectrum.num_qubits() + 1
    }

    fn apply_local(&self, buf: &mut [C64]) {
        let half = buf.len() / 2;
        let (lo, hi) = buf.split_at_mut(half);
        let (w, s) = (self.omega, if self.adjoint { -1.0 } else { 1.0 });
        let i = C64::new(0.0, s);
        self.spectrum.apply_function(lo, |l| C64::from_polar(1.0, s * w * l));
        self.spectrum.apply_function(hi, |l| i * C64::from_polar(1.0, -s * w * l));
    }

    fn adjoint(&self) -> Arc<dyn BlockOp> {
        Arc::new(ExactControlled {
            spectrum: Arc::clone(&self.spectrum),
            omega: self.omega,
            adjoint: !self.adjoint,
        })
    }

    fn label(&self) -> &str {
        if self.adjoint {
            "exact-controlled-evolution-dagger"
        } else {
            "exact-controlled-evolution"
        }
    }
}

/// Exact `U` as a one-gate circuit on `q + 1` qubits. Its adjoint is
/// available through [`Circuit::apply_adjoint`] or [`Circuit::inverse`].
pub fn controlled_evolution_exact(spec: Arc<Spectrum>, omega: f64) -> Result<Circuit> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(QaaeError::Config(format!("omega must be positive, got {omega}")));
    }
    let n = spec.num_qubits() + 1;
    let block = OpaqueBlock::new(
        1,
        Arc::new(ExactControlled {
            spectrum: spec,
            omega,
            adjoint: false,
        }),
    );
    let mut c = Circuit::new(n, 0);
    c.opaque(block, (0..n).collect())?;
    Ok(c)
}

/// Dense matrix of the exact controlled evolution, block diagonal in the
/// control qubit.
pub fn exact_controlled_matrix(spec: &Spectrum, omega: f64) -> DMatrix<C64> {
    let d = spec.dim();
    let mut m = DMatrix::<C64>::zeros(2 * d, 2 * d);
    let v = &spec.eigenvectors;
    let plus = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        spec.eigenvalues.iter().map(|&l| C64::from_polar(1.0, omega * l)),
    ));
    let minus = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        spec.eigenvalues.iter().map(|&l| C64::new(0.0, 1.0) * C64::from_polar(1.0, -omega * l)),
    ));
    m.view_mut((0, 0), (d, d)).copy_from(&(v * plus * v.adjoint()));
    m.view_mut((d, d), (d, d)).copy_from(&(v * minus * v.adjoint()));
    m
}

/// Appends `exp(i phi P (x) Z_a)` (controlled) or `exp(-i phi P)`.
fn push_pauli_rotation(
    c: &mut Circuit,
    term: &PauliTerm,
    phi: f64,
    ancilla: Option<usize>,
) -> Result<()> {
    let support: Vec<usize> = (0..64).filter(|&j| term.support() >> j & 1 == 1).collect();
    let (pivot, angle) = match ancilla {
        Some(a) => (a, -2.0 * phi),
        None => match support.last() {
            Some(&p) => (p, 2.0 * phi),
            // global phase
            None => return Ok(()),
        },
    };
    let basis = |c: &mut Circuit, undo: bool| -> Result<()> {
        for &j in &support {
            let x = term.x_mask >> j & 1 == 1;
            let z = term.z_mask >> j & 1 == 1;
            match (x, z) {
                (true, false) => {
                    c.h(j)?;
                }
                (true, true) => {
                    let a = if undo { -std::f64::consts::FRAC_PI_2 } else { std::f64::consts::FRAC_PI_2 };
                    c.rotation(GateKind::Rx, j, a)?;
                }
                _ => {}
            }
        }
        Ok(())
    };
    let ladder: Vec<usize> = support.iter().copied().filter(|&j| j != pivot).collect();
    basis(c, false)?;
    for &j in &ladder {
        c.cnot(j, pivot)?;
    }
    c.rotation(GateKind::Rz, pivot, angle)?;
    for &j in ladder.iter().rev() {
        c.cnot(j, pivot)?;
    }
    basis(c, true)?;
    Ok(())
}

/// Product-formula circuit for `U` (controlled) or `e^{-i w H}`
/// (uncontrolled, global phase of the identity term dropped). Terms follow
/// the Hamiltonian's list order.
pub fn build_controlled_trotter(h: &PauliHamiltonian, cfg: &EvolutionConfig) -> Result<Circuit> {
    cfg.validate()?;
    let q = h.num_qubits();
    let (n, ancilla) = if cfg.controlled { (q + 1, Some(q)) } else { (q, None) };
    let tau = cfg.omega / cfg.steps as f64;
    // controlled mode realizes exp(+i w H Z_a); uncontrolled exp(-i w H)
    let mut c = Circuit::new(n, 0);
    for _ in 0..cfg.steps {
        match cfg.order {
            1 => {
                for t in h.terms() {
                    push_pauli_rotation(&mut c, t, tau * t.coeff, ancilla)?;
                }
            }
            _ => {
                for t in h.terms() {
                    push_pauli_rotation(&mut c, t, 0.5 * tau * t.coeff, ancilla)?;
                }
                for t in h.terms().iter().rev() {
                    push_pauli_rotation(&mut c, t, 0.5 * tau * t.coeff, ancilla)?;
                }
            }
        }
    }
    if let Some(a) = ancilla {
        c.rotation(GateKind::Phase, a, std::f64::consts::FRAC_PI_2)?;
    }
    Ok(c)
}

/// Spectral-norm distance between the product-formula circuit and the exact
/// operator it approximates.
pub fn trotter_error(h: &PauliHamiltonian, cfg: &EvolutionConfig) -> Result<f64> {
    let q = h.num_qubits();
    if q > MAX_TROTTER_ERROR_QUBITS {
        return Err(QaaeError::Capability(format!(
            "Trotter error needs q <= {MAX_TROTTER_ERROR_QUBITS}, got {q}"
        )));
    }
    let spec = crate::hamiltonian::spectrum(h)?;
    let approx = build_controlled_trotter(h, cfg)?.dense_matrix(&[])?;
    let exact = if cfg.controlled {
        exact_controlled_matrix(&spec, cfg.omega)
    } else {
        let v = &spec.eigenvectors;
        let b = h.identity_coeff();
        let diag = nalgebra::DVector::from_iterator(
            spec.dim(),
            spec.eigenvalues
                .iter()
                .map(|&l| C64::from_polar(1.0, -cfg.omega * (l - b))),
        );
        v * DMatrix::from_diagonal(&diag) * v.adjoint()
    };
    let diff = approx - exact;
    Ok(diff.singular_values().iter().copied().fold(0.0, f64::max))
}

/// Smallest power-of-two step count (from 1, at most [`MAX_STEPS`]) whose
/// measured error is within `eps`.
pub fn select_steps(h: &PauliHamiltonian, cfg: &EvolutionConfig, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(QaaeError::Config(format!("target accuracy must be positive, got {eps}")));
    }
    let mut c = *cfg;
    c.steps = 1;
    loop {
        if trotter_error(h, &c)? <= eps {
            return Ok(c.steps);
        }
        if c.steps >= MAX_STEPS {
            return Err(QaaeError::Numeric(format!(
                "Trotter error above {eps} at the step cap {MAX_STEPS}"
            )));
        }
        c.steps *= 2;
    }
}

/// Builds the controlled evolution for `cfg`, resolving `target_eps`
/// through the budget rule first.
pub fn build_evolution(h: &PauliHamiltonian, cfg: &EvolutionConfig) -> Result<(Circuit, usize)> {
    let mut c = *cfg;
    c.controlled = true;
    if let Some(eps) = cfg.target_eps {
        c.steps = select_steps(h, &c, eps)?;
    }
    Ok((build_controlled_trotter(h, &c)?, c.steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_ltfim, spectrum};
    use crate::simulator::StateVector;
    use approx::assert_abs_diff_eq;

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn ltfim2() -> PauliHamiltonian {
        build_ltfim(2, 1.0, 0.0).unwrap().normalize_affine(0.05, 0.95).unwrap()
    }

    #[test]
    fn exact_block_matches_dense_form() {
        let h = ltfim2();
        let spec = Arc::new(spectrum(&h).unwrap());
        let c = controlled_evolution_exact(Arc::clone(&spec), FRAC_PI_4).unwrap();
        let m = c.dense_matrix(&[]).unwrap();
        assert!(max_abs(&(m - exact_controlled_matrix(&spec, FRAC_PI_4))) < 1e-12);
    }

    #[test]
    fn exact_block_is_unitary() {
        let h = ltfim2();
        let spec = Arc::new(spectrum(&h).unwrap());
        let c = controlled_evolution_exact(spec, FRAC_PI_4).unwrap();
        let s0 = StateVector::haar_random(3, 4);
        let mut s = s0.clone();
        c.apply(&mut s, &[]).unwrap();
        c.apply_adjoint(&mut s, &[]).unwrap();
        assert_abs_diff_eq!(s.inner(&s0).unwrap().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_z_term_is_exact() {
        let h = PauliHamiltonian::new(1, [PauliTerm::new(0.3, 0, 1)]).unwrap();
        for order in [1, 2] {
            for steps in [1, 3] {
                let cfg = EvolutionConfig { order, steps, ..Default::default() };
                assert!(trotter_error(&h, &cfg).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn y_and_identity_terms_are_exact_alone() {
        for letters in ["Y", "X", "I"] {
            let mut terms = vec![PauliTerm::from_letters(0.7, letters).unwrap()];
            if letters != "I" {
                terms.push(PauliTerm::new(0.2, 0, 0));
            }
            let h = PauliHamiltonian::new(1, terms).unwrap();
            let cfg = EvolutionConfig::default();
            assert!(trotter_error(&h, &cfg).unwrap() < 1e-10, "{letters}");
            let un = EvolutionConfig { controlled: false, ..cfg };
            assert!(trotter_error(&h, &un).unwrap() < 1e-10, "{letters}");
        }
    }

    #[test]
    fn multi_qubit_strings_compile_exactly() {
        let h = PauliHamiltonian::new(3, [PauliTerm::from_letters(0.4, "XYZ").unwrap()]).unwrap();
        let cfg = EvolutionConfig { steps: 1, ..Default::default() };
        assert!(trotter_error(&h, &cfg).unwrap() < 1e-10);
        let un = EvolutionConfig { controlled: false, ..cfg };
        assert!(trotter_error(&h, &un).unwrap() < 1e-10);
    }

    #[test]
    fn uncontrolled_z_is_rz() {
        let w = 0.8;
        let h = PauliHamiltonian::new(1, [PauliTerm::new(w, 0, 1)]).unwrap();
        let cfg = EvolutionConfig { controlled: false, ..Default::default() };
        let c = build_controlled_trotter(&h, &cfg).unwrap();
        let mut r = Circuit::new(1, 0);
        r.rotation(GateKind::Rz, 0, 2.0 * FRAC_PI_4 * w).unwrap();
        let s = StateVector::haar_random(1, 9);
        let mut a = s.clone();
        let mut b = s;
        c.apply(&mut a, &[]).unwrap();
        r.apply(&mut b, &[]).unwrap();
        assert_abs_diff_eq!(a.fidelity(&b).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn second_order_improves_with_steps() {
        let h = ltfim2();
        let e = |steps| {
            trotter_error(&h, &EvolutionConfig { order: 2, steps, ..Default::default() }).unwrap()
        };
        assert!(e(2) / e(5) >= 4.0);
    }

    #[test]
    fn budget_rule_meets_target() {
        let h = ltfim2();
        let cfg = EvolutionConfig::default();
        let nu = select_steps(&h, &cfg, 1e-3).unwrap();
        let err = trotter_error(&h, &EvolutionConfig { steps: nu, ..cfg }).unwrap();
        assert!(err <= 1e-3);
        assert!(nu == 1 || trotter_error(&h, &EvolutionConfig { steps: nu / 2, ..cfg }).unwrap() > 1e-3);
    }

    #[test]
    fn config_validation() {
        let h = ltfim2();
        let bad = EvolutionConfig { steps: 0, ..Default::default() };
        assert!(matches!(build_controlled_trotter(&h, &bad), Err(QaaeError::Config(_))));
        let bad = EvolutionConfig { order: 3, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
