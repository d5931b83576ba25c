use serde::Serialize;

use super::{Backend, RoundRecord, RunConfig, Setup};
use crate::ansatz::{reflection_circuit, AnsatzSpec, Params};
use crate::error::{QaaeError, Result};
use crate::simulator::Circuit;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionReport {
    /// Rounds where `g_{r+1} < g_r + c* g_r (1 - g_r) - eps_r - 1e-9`.
    pub violations: Vec<usize>,
    /// Rounds where `eps_r >= c* g_r (1 - g_r)`, so a rise is not guaranteed.
    pub flagged: Vec<usize>,
    /// Whether `g_r` increased strictly in every round.
    pub strictly_increasing: bool,
}

/// Audits the overlap recursion `g_{r+1} >= g_r + c* g_r (1 - g_r) - eps_r`.
pub fn check_recursion(records: &[RoundRecord], c_star: Option<f64>) -> Result<RecursionReport> {
    let c = c_star.ok_or_else(|| QaaeError::Capability("recursion audit needs the exact spectrum".into()))?;
    let mut report = RecursionReport {
        violations: Vec::new(),
        flagged: Vec::new(),
        strictly_increasing: true,
    };
    for r in records {
        let g = r.gamma_before;
        if !g.is_finite() || !r.gamma_next.is_finite() {
            return Err(QaaeError::Capability(format!("round {} has no overlap data", r.round)));
        }
        let gain = c * g * (1.0 - g);
        if r.gamma_next < g + gain - r.eps_r - 1e-9 {
            report.violations.push(r.round);
        }
        if r.eps_r >= gain {
            report.flagged.push(r.round);
        }
        if r.gamma_next <= g {
            report.strictly_increasing = false;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DepthReport {
    pub d_a: usize,
    /// Depth of preparing `|+>|alpha>`, the ancilla Hadamard alongside the
    /// ansatz; `max(d_a, 1)`.
    pub d_prep: usize,
    pub d_r: usize,
    pub d_u: usize,
    pub d_round: usize,
    pub bound_ok: bool,
}

/// Compiles one full round (state preparation, `U^dagger`, `R`, `U`, `R`)
/// for ansatz `a` at `p` around the controlled evolution `u`, and compares
/// its depth with the per-block bounds.
pub fn depth_for(a: &AnsatzSpec, p: &Params, u: &Circuit) -> Result<DepthReport> {
    let q = a.num_qubits();
    let prep = a.unitary_circuit(p)?;
    let refl = reflection_circuit(a, p)?;
    let system: Vec<usize> = (0..q).collect();

    let mut psi = Circuit::new(q + 1, 0);
    psi.h(q)?;
    psi.append_mapped(&prep, &system)?;
    let mut round = psi.clone();
    round.append(&u.inverse(&[])?)?;
    round.append(&refl)?;
    round.append(u)?;
    round.append(&refl)?;

    let (d_a, d_prep, d_r, d_u, d_round) = (prep.depth(), psi.depth(), refl.depth(), u.depth(), round.depth());
    let mc_cost = (2 * (q + 1)).saturating_sub(3).max(1);
    Ok(DepthReport {
        d_a,
        d_prep,
        d_r,
        d_u,
        d_round,
        bound_ok: d_round <= d_prep + 2 * (d_r + d_u) && d_r <= 2 * d_a + mc_cost + 2,
    })
}

pub(super) fn depth_of(setup: &Setup, p: &Params) -> Result<DepthReport> {
    depth_for(&setup.ansatz, p, &setup.evolution)
}

/// Depth accounting for the Trotter backend, at the run's initial
/// parameters.
pub fn depth_report(cfg: &RunConfig) -> Result<DepthReport> {
    if cfg.backend != Backend::Trotter {
        return Err(QaaeError::Capability(
            "depths are only defined for the Trotter backend".into(),
        ));
    }
    let setup = Setup::new(cfg)?;
    depth_of(&setup, &setup.initial_params(cfg.seed)?)
}
