//! One amplification round `T = R U R U^dagger` and its closed-form
//! diagnostics.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::ansatz::{AnsatzSpec, Params, Reflection};
use crate::error::{QaaeError, Result};
use crate::hamiltonian::Spectrum;
use crate::simulator::{measure_ancilla, Circuit, MeasurePolicy, Measurement, StateVector};

/// Shifted phase `pi/4 - omega lambda`; equals `(pi/4)(1 - lambda)` at the
/// default `omega = pi/4`.
pub fn shifted_phase(lambda: f64, omega: f64) -> f64 {
    FRAC_PI_4 - omega * lambda
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundDiagnostics {
    pub w_mod: f64,
    pub w_arg: f64,
    pub chi: f64,
    pub xi: Vec<f64>,
    pub c_star: f64,
    pub gamma_sq_before: Vec<f64>,
    pub gamma_sq_after_predicted: Vec<f64>,
    pub delta_predicted: f64,
    /// False when the ground state is degenerate.
    pub valid: bool,
}

impl RoundDiagnostics {
    pub fn gamma(&self) -> f64 {
        self.gamma_sq_before[0]
    }

    /// Lower bound `c* Gamma (1 - Gamma)` on the gain.
    pub fn gain_floor(&self) -> f64 {
        let g = self.gamma();
        self.c_star * g * (1.0 - g)
    }
}

/// `4 cos l0 (4 cos^2 l0 - 1)(cos l1 - cos l0)` in shifted phases.
pub fn c_star(spec: &Spectrum, omega: f64) -> f64 {
    if spec.dim() < 2 {
        return 0.0;
    }
    let c0 = shifted_phase(spec.eigenvalues[0], omega).cos();
    let c1 = shifted_phase(spec.eigenvalues[1], omega).cos();
    4.0 * c0 * (4.0 * c0 * c0 - 1.0) * (c1 - c0)
}

pub fn round_diagnostics(trial: &StateVector, spec: &Spectrum, omega: f64) -> Result<RoundDiagnostics> {
    if trial.dim() != spec.dim() {
        return Err(QaaeError::Dimension {
            expected: spec.dim(),
            found: trial.dim(),
        });
    }
    let gsq: Vec<f64> = spec.coefficients(trial.amps()).iter().map(|g| g.norm_sqr()).collect();
    let i = C64::new(0.0, 1.0);
    let w: C64 = gsq
        .iter()
        .zip(&spec.eigenvalues)
        .map(|(g, &l)| 0.5 * g * (C64::from_polar(1.0, omega * l) + i * C64::from_polar(1.0, -omega * l)))
        .sum();
    let w_mod = w.norm();
    let chi = 4.0 * w_mod * w_mod - 1.0;
    let xi: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| w_mod - shifted_phase(l, omega).cos())
        .collect();
    let after: Vec<f64> = gsq
        .iter()
        .zip(&xi)
        .map(|(g, x)| (1.0 + 4.0 * w_mod * chi * x) * g)
        .collect();
    Ok(RoundDiagnostics {
        w_mod,
        w_arg: w.arg(),
        chi,
        c_star: c_star(spec, omega),
        delta_predicted: 4.0 * w_mod * chi * xi[0] * gsq[0],
        xi,
        gamma_sq_before: gsq,
        gamma_sq_after_predicted: after,
        valid: !spec.degenerate,
    })
}

/// `|<lambda_0|s>|^2`.
pub fn ground_overlap(s: &StateVector, spec: &Spectrum) -> Result<f64> {
    if s.dim() != spec.dim() {
        return Err(QaaeError::Dimension {
            expected: spec.dim(),
            found: s.dim(),
        });
    }
    let v = spec.eigenvectors.column(0);
    let c: C64 = v.iter().zip(s.amps()).map(|(a, b)| a.conj() * b).sum();
    Ok(c.norm_sqr().min(1.0))
}

/// `T |+>|trial>` on the joint register, with `u` the controlled evolution.
pub fn apply_round_operator(trial: &StateVector, u: &Circuit) -> Result<StateVector> {
    if u.num_qubits() != trial.num_qubits() + 1 {
        return Err(QaaeError::Dimension {
            expected: trial.num_qubits() + 1,
            found: u.num_qubits(),
        });
    }
    let r = Reflection::about(trial);
    let mut joint = r.state().clone();
    u.apply_adjoint(&mut joint, &[])?;
    r.apply(&mut joint)?;
    u.apply(&mut joint, &[])?;
    r.apply(&mut joint)?;
    Ok(joint)
}

/// Applies one round to an explicit trial state and measures the ancilla.
pub fn amplify_state(trial: &StateVector, u: &Circuit, policy: MeasurePolicy) -> Result<Measurement> {
    let joint = apply_round_operator(trial, u)?;
    measure_ancilla(&joint, trial.num_qubits(), policy)
}

pub fn amplify_round(
    a: &AnsatzSpec,
    p: &Params,
    u: &Circuit,
    policy: MeasurePolicy,
) -> Result<Measurement> {
    amplify_state(&a.prepare_trial(p)?, u, policy)
}
