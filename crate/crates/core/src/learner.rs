//! Re-encoding an amplified state into the ansatz.
//!
//! The program minimizes `F(D) = D^2 - ln(1 - D^2)` where `D` is the pure
//! state trace distance, by plain gradient descent. In terms of the fidelity
//! `f = 1 - D^2` this is `F = (1 - f) - ln f`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::amplifier::ground_overlap;
use crate::ansatz::{AnsatzSpec, Family, Params};
use crate::error::{QaaeError, Result};
use crate::hamiltonian::Spectrum;
use crate::simulator::{overlap_1q, Circuit, StateVector};

/// Distances are clamped to this before the objective is evaluated.
pub const MAX_DISTANCE: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GradMethod {
    /// Two-term shift rule on rotation slots; dense families fall back to
    /// central differences with `LearnConfig::fd_step`.
    ParameterShift,
    CentralFd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub n_max: usize,
    pub learning_rate: f64,
    pub grad_method: GradMethod,
    pub fd_step: f64,
    pub target_fidelity: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            n_max: 100,
            learning_rate: 0.05,
            grad_method: GradMethod::ParameterShift,
            fd_step: 1e-4,
            target_fidelity: 1.0 - 1e-10,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(QaaeError::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.fd_step > 0.0) {
            return Err(QaaeError::Config(format!("fd step must be positive, got {}", self.fd_step)));
        }
        if !(self.target_fidelity > 0.0 && self.target_fidelity <= 1.0) {
            return Err(QaaeError::Config(format!(
                "target fidelity must lie in (0, 1], got {}",
                self.target_fidelity
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnResult {
    pub theta_next: Params,
    pub eps_r: f64,
    pub steps_used: usize,
    pub converged: bool,
    /// Trial-state preparations consumed.
    pub preparations: u64,
}

/// `sqrt(1 - |<a|b>|^2)`.
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok((1.0 - a.fidelity(b)?).max(0.0).sqrt())
}

pub fn objective_value(d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(QaaeError::Domain(format!("distance {d} outside [0, 1]")));
    }
    let d2 = d.min(MAX_DISTANCE).powi(2);
    Ok(d2 - (1.0 - d2).ln())
}

fn fidelity_floor() -> f64 {
    1.0 - MAX_DISTANCE * MAX_DISTANCE
}

/// `F` as a function of the fidelity, with the distance clamp applied.
fn objective_from_fidelity(f: f64) -> f64 {
    let f = f.clamp(fidelity_floor(), 1.0);
    (1.0 - f) - f.ln()
}

/// `dF/df` at the clamped fidelity.
fn objective_slope(f: f64) -> f64 {
    -(1.0 + 1.0 / f.clamp(fidelity_floor(), 1.0))
}

/// True when every parametrized gate admits the two-term shift rule.
fn shift_rule_applies(c: &Circuit) -> bool {
    c.gates()
        .iter()
        .all(|g| g.param_slot.is_none() || g.kind.is_shiftable())
}

/// Fidelity and its shift-rule gradient in one backward sweep.
///
/// Walking the gates from last to first, `psi` is un-applied gate by gate
/// and `chi` carries the target pulled back through the gates already
/// passed, so each shifted amplitude `<chi|G(angle +- pi/2)|psi>` costs one
/// local overlap.
pub(crate) fn shift_rule_fidelity_gradient(
    c: &Circuit,
    theta: &[f64],
    target: &StateVector,
) -> (f64, Vec<f64>) {
    let mut psi = StateVector::zero(c.num_qubits());
    c.apply_raw(psi.amps_mut(), theta);
    let f = crate::simulator::inner(target.amps(), psi.amps()).norm_sqr();
    let mut chi = target.amps().to_vec();
    let mut psi = psi.into_amps();
    let mut grad = vec![0.0; c.num_params()];
    for g in c.gates().iter().rev() {
        let angle = g.angle(theta);
        g.apply_with(&mut psi, angle, true);
        if let Some(slot) = g.param_slot {
            let q = g.qubits[0];
            let plus = g.matrix_1q(angle + FRAC_PI_2).expect("shiftable gate");
            let minus = g.matrix_1q(angle - FRAC_PI_2).expect("shiftable gate");
            let fp = overlap_1q(&chi, &psi, q, &plus).norm_sqr();
            let fm = overlap_1q(&chi, &psi, q, &minus).norm_sqr();
            grad[slot] += 0.5 * (fp - fm);
        }
        g.apply_with(&mut chi, angle, true);
    }
    (f, grad)
}

fn fd_fidelity_gradient(
    a: &AnsatzSpec,
    p: &Params,
    target: &StateVector,
    h: f64,
) -> Result<(f64, Vec<f64>)> {
    let f = a.prepare_trial(p)?.fidelity(target)?;
    let mut q = p.clone();
    let mut grad = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let t = p.theta[i];
        q.theta[i] = t + h;
        let fp = a.prepare_trial(&q)?.fidelity(target)?;
        q.theta[i] = t - h;
        let fm = a.prepare_trial(&q)?.fidelity(target)?;
        q.theta[i] = t;
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok((f, grad))
}

/// Fidelity `|<target|alpha(theta)>|^2` and its gradient.
pub fn fidelity_gradient(
    a: &AnsatzSpec,
    p: &Params,
    target: &StateVector,
    cfg: &LearnConfig,
) -> Result<(f64, Vec<f64>)> {
    a.validate(p)?;
    target.check_dim(&StateVector::zero(a.num_qubits()))?;
    match (cfg.grad_method, a.circuit()) {
        (GradMethod::ParameterShift, Some(c)) if shift_rule_applies(c) => {
            Ok(shift_rule_fidelity_gradient(c, &p.theta, target))
        }
        _ => fd_fidelity_gradient(a, p, target, cfg.fd_step),
    }
}

/// Gradient of the objective `F` with respect to `theta`.
pub fn objective_gradient(
    a: &AnsatzSpec,
    p: &Params,
    target: &StateVector,
    cfg: &LearnConfig,
) -> Result<(f64, Vec<f64>)> {
    let (f, mut g) = fidelity_gradient(a, p, target, cfg)?;
    let s = objective_slope(f);
    g.iter_mut().for_each(|x| *x *= s);
    Ok((objective_from_fidelity(f), g))
}

/// Gradient descent on `F`, warm-started from `theta_init`.
pub fn learn_state(
    target: &StateVector,
    a: &AnsatzSpec,
    theta_init: &Params,
    cfg: &LearnConfig,
) -> Result<LearnResult> {
    cfg.validate()?;
    a.validate(theta_init)?;
    if target.num_qubits() != a.num_qubits() {
        return Err(QaaeError::Dimension {
            expected: 1 << a.num_qubits(),
            found: target.dim(),
        });
    }
    if *a.family() == Family::Oracle {
        return Ok(LearnResult {
            theta_next: Params::oracle(target.clone()),
            eps_r: 0.0,
            steps_used: 0,
            converged: true,
            preparations: 0,
        });
    }
    let per_step = 2 * a.num_params() as u64 + 1;
    let mut p = theta_init.clone();
    let mut preparations = 0;
    let mut steps = 0;
    let mut converged = false;
    loop {
        let (f, grad) = fidelity_gradient(a, &p, target, cfg)?;
        preparations += per_step;
        let value = objective_from_fidelity(f);
        if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(QaaeError::NanObjective { theta: p.theta });
        }
        if f >= cfg.target_fidelity {
            converged = true;
            break;
        }
        if steps == cfg.n_max {
            break;
        }
        let s = objective_slope(f) * cfg.learning_rate;
        for (t, g) in p.theta.iter_mut().zip(&grad) {
            *t -= s * g;
        }
        steps += 1;
    }
    let eps_r = trace_distance_pure(&a.prepare_trial(&p)?, target)?;
    Ok(LearnResult {
        theta_next: p,
        eps_r,
        steps_used: steps,
        converged,
        preparations,
    })
}

/// Largest deviation between the gradient used for learning and a central
/// difference of `F` with step `1e-5`.
pub fn gradient_check(a: &AnsatzSpec, p: &Params, target: &StateVector) -> Result<f64> {
    let cfg = LearnConfig::default();
    let (_, g) = objective_gradient(a, p, target, &cfg)?;
    let h = 1e-5;
    let value = |q: &Params| -> Result<f64> {
        Ok(objective_from_fidelity(a.prepare_trial(q)?.fidelity(target)?))
    };
    let mut q = p.clone();
    let mut worst: f64 = 0.0;
    for (i, gi) in g.iter().enumerate() {
        let t = p.theta[i];
        q.theta[i] = t + h;
        let fp = value(&q)?;
        q.theta[i] = t - h;
        let fm = value(&q)?;
        q.theta[i] = t;
        worst = worst.max((gi - (fp - fm) / (2.0 * h)).abs());
    }
    Ok(worst)
}

/// Meridian angle whose Bloch vector points along `(cx, cz)`.
pub fn bloch_reencode(cx: f64, cz: f64) -> Result<Params> {
    let n = cx.hypot(cz);
    if !(n > 0.0) || !n.is_finite() {
        return Err(QaaeError::Domain(format!("Bloch vector ({cx}, {cz}) has no direction")));
    }
    Ok(Params::new(vec![(cx / n).atan2(cz / n)]))
}

/// `|Gamma(phi_out) - Gamma(trial_next)|` and the trace distance bounding it.
pub fn learn_deviation(
    phi_out: &StateVector,
    trial_next: &StateVector,
    spec: &Spectrum,
) -> Result<(f64, f64)> {
    let dev = (ground_overlap(phi_out, spec)? - ground_overlap(trial_next, spec)?).abs();
    let bound = trace_distance_pure(phi_out, trial_next)?;
    if dev > bound + 1e-12 {
        return Err(QaaeError::Numeric(format!(
            "overlap deviation {dev:e} exceeds trace distance {bound:e}"
        )));
    }
    Ok((dev, bound))
}
