//! Energy-gradient baseline on the same ansatz, optimizer and stopping rule.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, Family, Params};
use crate::error::{QaaeError, Result};
use crate::hamiltonian::PauliHamiltonian;
use crate::learner::GradMethod;
use crate::simulator::{overlap_1q, Circuit, GateKind, Mat2, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub learning_rate: f64,
    pub eps_h: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub grad_method: GradMethod,
    pub fd_step: f64,
    /// Stop before a step would exceed this many trial preparations.
    pub max_preparations: Option<u64>,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            eps_h: 1e-6,
            max_iters: 10_000,
            seed: 0,
            grad_method: GradMethod::ParameterShift,
            fd_step: 1e-4,
            max_preparations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VqeRecord {
    pub iter: usize,
    pub energy_norm: f64,
    pub energy_phys: f64,
    pub grad_norm: f64,
    pub halted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub records: Vec<VqeRecord>,
    pub theta: Params,
    pub preparations: u64,
    pub halted: bool,
}

impl VqeResult {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy_norm)
    }
}

pub fn vqe_energy(a: &AnsatzSpec, p: &Params, h: &PauliHamiltonian) -> Result<f64> {
    h.expectation(&a.prepare_trial(p)?)
}

/// `d/dangle` of a rotation-family single-qubit matrix.
fn derivative_1q(kind: &GateKind, angle: f64) -> Option<Mat2> {
    let z = C64::new(0.0, 0.0);
    match kind {
        GateKind::Rx | GateKind::Ry | GateKind::Rz => {
            let g = crate::simulator::Gate::rotation(kind.clone(), 0, 0.0);
            let m = g.matrix_1q(angle + std::f64::consts::PI)?;
            Some(m.map(|row| row.map(|x| 0.5 * x)))
        }
        GateKind::Phase => Some([[z, z], [z, C64::new(0.0, 1.0) * C64::from_polar(1.0, angle)]]),
        _ => None,
    }
}

/// Energy and gradient by reverse-mode sweep: `dE/dtheta = 2 Re <lambda|dG psi>`
/// with `lambda` the pulled-back `H|psi>`.
fn adjoint_energy_gradient(c: &Circuit, theta: &[f64], h: &PauliHamiltonian) -> (f64, Vec<f64>) {
    let mut psi = StateVector::zero(c.num_qubits()).into_amps();
    c.apply_raw(&mut psi, theta);
    let mut lam = vec![C64::new(0.0, 0.0); psi.len()];
    h.apply(&psi, &mut lam);
    let e = crate::simulator::inner(&psi, &lam).re;
    let mut grad = vec![0.0; c.num_params()];
    for g in c.gates().iter().rev() {
        let angle = g.angle(theta);
        g.apply_with(&mut psi, angle, true);
        if let Some(slot) = g.param_slot {
            let d = derivative_1q(&g.kind, angle).expect("differentiable gate");
            grad[slot] += 2.0 * overlap_1q(&lam, &psi, g.qubits[0], &d).re;
        }
        g.apply_with(&mut lam, angle, true);
    }
    (e, grad)
}

pub fn energy_gradient(
    a: &AnsatzSpec,
    p: &Params,
    h: &PauliHamiltonian,
    cfg: &VqeConfig,
) -> Result<(f64, Vec<f64>)> {
    a.validate(p)?;
    if h.num_qubits() != a.num_qubits() {
        return Err(QaaeError::Dimension {
            expected: h.num_qubits(),
            found: a.num_qubits(),
        });
    }
    let differentiable = |c: &Circuit| {
        c.gates()
            .iter()
            .all(|g| g.param_slot.is_none() || g.kind.is_shiftable())
    };
    match (cfg.grad_method, a.circuit()) {
        (GradMethod::ParameterShift, Some(c)) if differentiable(c) => {
            Ok(adjoint_energy_gradient(c, &p.theta, h))
        }
        _ => {
            let e = vqe_energy(a, p, h)?;
            let mut q = p.clone();
            let mut grad = Vec::with_capacity(p.len());
            for i in 0..p.len() {
                let t = p.theta[i];
                q.theta[i] = t + cfg.fd_step;
                let ep = vqe_energy(a, &q, h)?;
                q.theta[i] = t - cfg.fd_step;
                let em = vqe_energy(a, &q, h)?;
                q.theta[i] = t;
                grad.push((ep - em) / (2.0 * cfg.fd_step));
            }
            Ok((e, grad))
        }
    }
}

/// Gradient descent from a random start drawn with `cfg.seed`.
pub fn run_vqe(cfg: &VqeConfig, a: &AnsatzSpec, h: &PauliHamiltonian) -> Result<VqeResult> {
    run_vqe_from(cfg, a, &a.random_init(cfg.seed), h)
}

/// Gradient descent on `E(theta)`. Iteration 0 records the starting energy;
/// the run halts once successive energies differ by at most `eps_h`.
/// Each energy-plus-gradient evaluation is charged `2K + 1` preparations,
/// the cost of the shift rule on hardware.
pub fn run_vqe_from(
    cfg: &VqeConfig,
    a: &AnsatzSpec,
    init: &Params,
    h: &PauliHamiltonian,
) -> Result<VqeResult> {
    if !(cfg.learning_rate > 0.0) || !(cfg.eps_h > 0.0) {
        return Err(QaaeError::Config("learning rate and eps_h must be positive".into()));
    }
    if *a.family() == Family::Oracle {
        return Err(QaaeError::Config("the oracle family has no parameters to optimize".into()));
    }
    let per_eval = 2 * a.num_params() as u64 + 1;
    let mut p = init.clone();
    let mut records: Vec<VqeRecord> = Vec::new();
    let mut preparations = 0;
    let mut halted = false;
    let mut iter = 0;
    loop {
        let (e, grad) = energy_gradient(a, &p, h, cfg)?;
        preparations += per_eval;
        if !e.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(QaaeError::NanObjective { theta: p.theta });
        }
        if let Some(prev) = records.last() {
            halted = (e - prev.energy_norm).abs() <= cfg.eps_h;
        }
        records.push(VqeRecord {
            iter,
            energy_norm: e,
            energy_phys: h.to_physical(e),
            grad_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
            halted,
        });
        let over_budget = cfg
            .max_preparations
            .is_some_and(|m| preparations + per_eval > m);
        if halted || iter >= cfg.max_iters || over_budget {
            break;
        }
        for (t, g) in p.theta.iter_mut().zip(&grad) {
            *t -= cfg.learning_rate * g;
        }
        iter += 1;
    }
    Ok(VqeResult {
        records,
        theta: p,
        preparations,
        halted,
    })
}
