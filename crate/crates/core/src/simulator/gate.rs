//! Gate set and in-place application kernels.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{QaaeError, Result};

pub type Mat2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// A unitary acting on a block of qubits whose action is supplied directly
/// rather than as a gate list. Local bit `i` of the buffer handed to
/// [`apply_local`](BlockOp::apply_local) is the block's `i`-th qubit.
pub trait BlockOp: Send + Sync {
    fn arity(&self) -> usize;
    fn apply_local(&self, buf: &mut [C64]);
    fn adjoint(&self) -> Arc<dyn BlockOp>;
    fn label(&self) -> &str {
        "block"
    }
}

/// Opaque unitary with a declared depth for the layering metric.
#[derive(Clone)]
pub struct OpaqueBlock {
    pub depth: usize,
    pub op: Arc<dyn BlockOp>,
}

impl OpaqueBlock {
    pub fn new(depth: usize, op: Arc<dyn BlockOp>) -> Self {
        Self { depth, op }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            depth: self.depth,
            op: self.op.adjoint(),
        }
    }
}

impl fmt::Debug for OpaqueBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpaqueBlock")
            .field("label", &self.op.label())
            .field("arity", &self.op.arity())
            .field("depth", &self.depth)
            .finish()
    }
}

/// Which basis pattern of the listed qubits a multi-controlled phase fires on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlState {
    Ones,
    Zeros,
}

#[derive(Debug, Clone)]
pub enum GateKind {
    H,
    X,
    Z,
    /// `diag(1, e^{i phi})`
    Phase,
    Rx,
    Ry,
    Rz,
    Cz,
    /// qubits = [control, target]
    Cnot,
    /// Phase `e^{i phi}` on the single basis state where every listed qubit
    /// matches `ControlState`.
    McPhase(ControlState),
    Opaque(OpaqueBlock),
}

impl GateKind {
    pub fn is_parametric(&self) -> bool {
        matches!(
            self,
            GateKind::Phase | GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::McPhase(_)
        )
    }

    /// Kinds whose generator has eigenvalues ±1/2 (up to a constant), so the
    /// two-term ±π/2 shift rule is exact.
    pub fn is_shiftable(&self) -> bool {
        matches!(self, GateKind::Phase | GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    fn arity(&self) -> Option<usize> {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Z
            | GateKind::Phase
            | GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz => Some(1),
            GateKind::Cz | GateKind::Cnot => Some(2),
            GateKind::McPhase(_) => None,
            GateKind::Opaque(b) => Some(b.op.arity()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub param_slot: Option<usize>,
    pub fixed_angle: Option<f64>,
}

impl Gate {
    pub fn fixed(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self {
            kind,
            qubits,
            param_slot: None,
            fixed_angle: None,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, angle: f64) -> Self {
        Self {
            kind,
            qubits: vec![qubit],
            param_slot: None,
            fixed_angle: Some(angle),
        }
    }

    pub fn slotted(kind: GateKind, qubit: usize, slot: usize) -> Self {
        Self {
            kind,
            qubits: vec![qubit],
            param_slot: Some(slot),
            fixed_angle: None,
        }
    }

    pub fn mc_phase(qubits: Vec<usize>, phase: f64, state: ControlState) -> Self {
        Self {
            kind: GateKind::McPhase(state),
            qubits,
            param_slot: None,
            fixed_angle: Some(phase),
        }
    }

    pub fn opaque(block: OpaqueBlock, qubits: Vec<usize>) -> Self {
        Self::fixed(GateKind::Opaque(block), qubits)
    }

    /// Layers this gate occupies. A phase controlled on `m` qubits uses the
    /// linear-depth decomposition count `max(1, 2m - 3)`.
    pub fn depth_cost(&self) -> usize {
        match &self.kind {
            GateKind::McPhase(_) => {
                let m = self.qubits.len();
                (2 * m).saturating_sub(3).max(1)
            }
            GateKind::Opaque(b) => b.depth,
            _ => 1,
        }
    }

    pub(crate) fn validate(&self, num_qubits: usize, num_params: usize) -> Result<()> {
        if let Some(a) = self.kind.arity() {
            if self.qubits.len() != a {
                return Err(QaaeError::Config(format!(
                    "{:?} acts on {a} qubits, got {:?}",
                    self.kind, self.qubits
                )));
            }
        } else if self.qubits.is_empty() {
            return Err(QaaeError::Config("multi-controlled phase on no qubits".into()));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(QaaeError::Config(format!(
                    "qubit {q} out of range for {num_qubits}-qubit circuit"
                )));
            }
            if self.qubits[..i].contains(&q) {
                return Err(QaaeError::Config(format!("repeated qubit {q} in {:?}", self.kind)));
            }
        }
        if self.kind.is_parametric() {
            match (self.param_slot, self.fixed_angle) {
                (Some(slot), None) if slot < num_params => {}
                (Some(slot), None) => {
                    return Err(QaaeError::Config(format!(
                        "parameter slot {slot} >= parameter count {num_params}"
                    )))
                }
                (None, Some(a)) if a.is_finite() => {}
                _ => {
                    return Err(QaaeError::Config(format!(
                        "{:?} needs exactly one of a finite fixed angle or a slot",
                        self.kind
                    )))
                }
            }
        } else if self.param_slot.is_some() || self.fixed_angle.is_some() {
            return Err(QaaeError::Config(format!("{:?} takes no angle", self.kind)));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn angle(&self, theta: &[f64]) -> f64 {
        match (self.param_slot, self.fixed_angle) {
            (Some(s), _) => theta[s],
            (None, Some(a)) => a,
            _ => 0.0,
        }
    }

    /// Applies the gate (or its adjoint) with rotation angle `angle`.
    pub(crate) fn apply_with(&self, amps: &mut [C64], angle: f64, adjoint: bool) {
        let q = &self.qubits;
        let sign = if adjoint { -1.0 } else { 1.0 };
        match &self.kind {
            GateKind::H => apply_1q(amps, q[0], &hadamard()),
            GateKind::X => apply_x(amps, q[0]),
            GateKind::Z => apply_diag_1q(amps, q[0], ONE, -ONE),
            GateKind::Phase => apply_diag_1q(amps, q[0], ONE, C64::from_polar(1.0, sign * angle)),
            GateKind::Rx => apply_1q(amps, q[0], &rx(sign * angle)),
            GateKind::Ry => apply_1q(amps, q[0], &ry(sign * angle)),
            GateKind::Rz => apply_diag_1q(
                amps,
                q[0],
                C64::from_polar(1.0, -sign * angle / 2.0),
                C64::from_polar(1.0, sign * angle / 2.0),
            ),
            GateKind::Cz => apply_cz(amps, q[0], q[1]),
            GateKind::Cnot => apply_cnot(amps, q[0], q[1]),
            GateKind::McPhase(state) => {
                apply_mc_phase(amps, q, *state, C64::from_polar(1.0, sign * angle))
            }
            GateKind::Opaque(b) => {
                if adjoint {
                    apply_block(amps, q, b.op.adjoint().as_ref())
                } else {
                    apply_block(amps, q, b.op.as_ref())
                }
            }
        }
    }

    /// Single-qubit matrix at `angle`, for kinds that have one.
    pub(crate) fn matrix_1q(&self, angle: f64) -> Option<Mat2> {
        Some(match self.kind {
            GateKind::H => hadamard(),
            GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
            GateKind::Phase => [[ONE, ZERO], [ZERO, C64::from_polar(1.0, angle)]],
            GateKind::Rx => rx(angle),
            GateKind::Ry => ry(angle),
            GateKind::Rz => [
                [C64::from_polar(1.0, -angle / 2.0), ZERO],
                [ZERO, C64::from_polar(1.0, angle / 2.0)],
            ],
            _ => return None,
        })
    }

    /// The adjoint gate with its angle frozen at `angle`.
    pub(crate) fn adjoint_fixed(&self, angle: f64) -> Gate {
        let mut g = self.clone();
        g.param_slot = None;
        match &self.kind {
            GateKind::Opaque(b) => {
                g.kind = GateKind::Opaque(b.adjoint());
                g.fixed_angle = None;
            }
            k if k.is_parametric() => g.fixed_angle = Some(-angle),
            _ => g.fixed_angle = None,
        }
        g
    }
}

pub fn hadamard() -> Mat2 {
    let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[r, r], [r, -r]]
}

/// `exp(-i theta X / 2)`
pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

/// `exp(-i theta Y / 2)`
pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

#[inline]
pub(crate) fn apply_1q(amps: &mut [C64], q: usize, m: &Mat2) {
    let step = 1usize << q;
    for base in (0..amps.len()).step_by(step << 1) {
        for i in base..base + step {
            let a0 = amps[i];
            let a1 = amps[i + step];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i + step] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// `<chi| M_q |psi>` without materializing `M_q |psi>`.
#[inline]
pub(crate) fn overlap_1q(chi: &[C64], psi: &[C64], q: usize, m: &Mat2) -> C64 {
    let step = 1usize << q;
    let mut acc = ZERO;
    for base in (0..psi.len()).step_by(step << 1) {
        for i in base..base + step {
            let a0 = psi[i];
            let a1 = psi[i + step];
            acc += chi[i].conj() * (m[0][0] * a0 + m[0][1] * a1)
                + chi[i + step].conj() * (m[1][0] * a0 + m[1][1] * a1);
        }
    }
    acc
}

fn apply_x(amps: &mut [C64], q: usize) {
    let step = 1usize << q;
    for base in (0..amps.len()).step_by(step << 1) {
        for i in base..base + step {
            amps.swap(i, i + step);
        }
    }
}

fn apply_diag_1q(amps: &mut [C64], q: usize, d0: C64, d1: C64) {
    let bit = 1usize << q;
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= if i & bit == 0 { d0 } else { d1 };
    }
}

fn apply_cz(amps: &mut [C64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (i, x) in amps.iter_mut().enumerate() {
        if i & mask == mask {
            *x = -*x;
        }
    }
}

fn apply_cnot(amps: &mut [C64], control: usize, target: usize) {
    let c = 1usize << control;
    let t = 1usize << target;
    for i in 0..amps.len() {
        if i & c != 0 && i & t == 0 {
            amps.swap(i, i | t);
        }
    }
}

fn apply_mc_phase(amps: &mut [C64], qubits: &[usize], state: ControlState, phase: C64) {
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let want = match state {
        ControlState::Ones => mask,
        ControlState::Zeros => 0,
    };
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == want {
            *a *= phase;
        }
    }
}

/// Gathers each block-local subvector, hands it to `op`, scatters it back.
pub(crate) fn apply_block(amps: &mut [C64], qubits: &[usize], op: &dyn BlockOp) {
    let k = qubits.len();
    let local = 1usize << k;
    let offsets: Vec<usize> = (0..local)
        .map(|l| {
            qubits
                .iter()
                .enumerate()
                .filter(|(i, _)| l >> i & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect();
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let mut buf = vec![ZERO; local];
    for rest in 0..amps.len() {
        if rest & mask != 0 {
            continue;
        }
        for (b, &o) in buf.iter_mut().zip(&offsets) {
            *b = amps[rest | o];
        }
        op.apply_local(&mut buf);
        for (b, &o) in buf.iter().zip(&offsets) {
            amps[rest | o] = *b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_costs() {
        assert_eq!(Gate::fixed(GateKind::H, vec![0]).depth_cost(), 1);
        assert_eq!(Gate::mc_phase(vec![0], 1.0, ControlState::Ones).depth_cost(), 1);
        assert_eq!(Gate::mc_phase(vec![0, 1], 1.0, ControlState::Ones).depth_cost(), 1);
        assert_eq!(Gate::mc_phase((0..5).collect(), 1.0, ControlState::Ones).depth_cost(), 7);
    }

    #[test]
    fn validation_rules() {
        assert!(Gate::fixed(GateKind::Cnot, vec![0, 0]).validate(2, 0).is_err());
        assert!(Gate::fixed(GateKind::H, vec![2]).validate(2, 0).is_err());
        assert!(Gate::slotted(GateKind::Ry, 0, 3).validate(1, 3).is_err());
        assert!(Gate::fixed(GateKind::Ry, vec![0]).validate(1, 0).is_err());
        let mut both = Gate::slotted(GateKind::Ry, 0, 0);
        both.fixed_angle = Some(1.0);
        assert!(both.validate(1, 1).is_err());
        assert!(Gate::rotation(GateKind::Rz, 0, f64::NAN).validate(1, 0).is_err());
        assert!(Gate::rotation(GateKind::Rz, 0, 0.3).validate(1, 0).is_ok());
    }

    #[test]
    fn cnot_flips_target_only_when_control_set() {
        let mut a = vec![ZERO; 4];
        a[0b01] = ONE; // control (qubit 0) set
        apply_cnot(&mut a, 0, 1);
        assert_eq!(a[0b11], ONE);
    }
}
