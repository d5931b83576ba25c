use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::gate::{ControlState, Gate, GateKind, OpaqueBlock};
use super::state::StateVector;
use crate::error::{QaaeError, Result};

/// Ordered gate list over `num_qubits` with `num_params` parameter slots.
#[derive(Debug, Clone)]
pub struct Circuit {
    num_qubits: usize,
    num_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_params: usize) -> Self {
        Self {
            num_qubits,
            num_params,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.num_qubits, self.num_params)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn h(&mut self, q: usize) -> Result<&mut Self> {
        self.push(Gate::fixed(GateKind::H, vec![q]))
    }

    pub fn x(&mut self, q: usize) -> Result<&mut Self> {
        self.push(Gate::fixed(GateKind::X, vec![q]))
    }

    pub fn z(&mut self, q: usize) -> Result<&mut Self> {
        self.push(Gate::fixed(GateKind::Z, vec![q]))
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<&mut Self> {
        self.push(Gate::fixed(GateKind::Cz, vec![a, b]))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.push(Gate::fixed(GateKind::Cnot, vec![control, target]))
    }

    pub fn rotation(&mut self, kind: GateKind, q: usize, angle: f64) -> Result<&mut Self> {
        self.push(Gate::rotation(kind, q, angle))
    }

    pub fn slotted(&mut self, kind: GateKind, q: usize, slot: usize) -> Result<&mut Self> {
        self.push(Gate::slotted(kind, q, slot))
    }

    pub fn mc_phase(&mut self, qubits: Vec<usize>, phase: f64, state: ControlState) -> Result<&mut Self> {
        self.push(Gate::mc_phase(qubits, phase, state))
    }

    pub fn opaque(&mut self, block: OpaqueBlock, qubits: Vec<usize>) -> Result<&mut Self> {
        self.push(Gate::opaque(block, qubits))
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.num_params {
            return Err(QaaeError::Params(format!(
                "circuit takes {} parameters, got {}",
                self.num_params,
                theta.len()
            )));
        }
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return Err(QaaeError::Params(format!("theta[{i}] = {} is not finite", theta[i])));
        }
        Ok(())
    }

    /// Applies the gates in order, in place.
    pub fn apply(&self, state: &mut StateVector, theta: &[f64]) -> Result<()> {
        self.check_theta(theta)?;
        if state.num_qubits() != self.num_qubits {
            return Err(QaaeError::Dimension {
                expected: 1 << self.num_qubits,
                found: state.dim(),
            });
        }
        self.apply_raw(state.amps_mut(), theta);
        Ok(())
    }

    pub(crate) fn apply_raw(&self, amps: &mut [C64], theta: &[f64]) {
        for g in &self.gates {
            g.apply_with(amps, g.angle(theta), false);
        }
    }

    /// Applies the inverse circuit, in place.
    pub fn apply_adjoint(&self, state: &mut StateVector, theta: &[f64]) -> Result<()> {
        self.check_theta(theta)?;
        if state.num_qubits() != self.num_qubits {
            return Err(QaaeError::Dimension {
                expected: 1 << self.num_qubits,
                found: state.dim(),
            });
        }
        for g in self.gates.iter().rev() {
            g.apply_with(state.amps_mut(), g.angle(theta), true);
        }
        Ok(())
    }

    /// Greedy as-soon-as-possible layering: a gate starts in the first layer
    /// where all its qubits are free and occupies
    /// [`Gate::depth_cost`] layers.
    pub fn depth(&self) -> usize {
        let mut free = vec![0usize; self.num_qubits];
        for g in &self.gates {
            let start = g.qubits.iter().map(|&q| free[q]).max().unwrap_or(0);
            let end = start + g.depth_cost();
            for &q in &g.qubits {
                free[q] = end;
            }
        }
        free.into_iter().max().unwrap_or(0)
    }

    /// Freezes every slot at `theta`; the result takes no parameters.
    pub fn bind(&self, theta: &[f64]) -> Result<Circuit> {
        self.check_theta(theta)?;
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let mut g = g.clone();
                if let Some(s) = g.param_slot.take() {
                    g.fixed_angle = Some(theta[s]);
                }
                g
            })
            .collect();
        Ok(Circuit {
            num_qubits: self.num_qubits,
            num_params: 0,
            gates,
        })
    }

    /// Adjoint circuit at `theta`, returned with every angle frozen.
    pub fn inverse(&self, theta: &[f64]) -> Result<Circuit> {
        self.check_theta(theta)?;
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| g.adjoint_fixed(g.angle(theta)))
            .collect();
        Ok(Circuit {
            num_qubits: self.num_qubits,
            num_params: 0,
            gates,
        })
    }

    /// Appends a parameter-free circuit, relabelling its qubit `i` as
    /// `qubit_map[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, qubit_map: &[usize]) -> Result<&mut Self> {
        if other.num_params != 0 {
            return Err(QaaeError::Config("bind parameters before appending".into()));
        }
        if qubit_map.len() != other.num_qubits {
            return Err(QaaeError::Dimension {
                expected: other.num_qubits,
                found: qubit_map.len(),
            });
        }
        for g in &other.gates {
            let mut g = g.clone();
            g.qubits = g.qubits.iter().map(|&q| qubit_map[q]).collect();
            self.push(g)?;
        }
        Ok(self)
    }

    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        let map: Vec<usize> = (0..other.num_qubits).collect();
        self.append_mapped(other, &map)
    }

    /// Column-by-column dense unitary at `theta`.
    pub fn dense_matrix(&self, theta: &[f64]) -> Result<DMatrix<C64>> {
        self.check_theta(theta)?;
        let d = 1usize << self.num_qubits;
        let mut m = DMatrix::<C64>::zeros(d, d);
        for col in 0..d {
            let mut s = StateVector::basis(self.num_qubits, col);
            self.apply_raw(s.amps_mut(), theta);
            for (row, a) in s.amps().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }
}

/// Out-of-place convenience wrapper around [`Circuit::apply`].
pub fn apply_circuit(s: &StateVector, c: &Circuit, theta: &[f64]) -> Result<StateVector> {
    let mut out = s.clone();
    c.apply(&mut out, theta)?;
    Ok(out)
}

pub fn circuit_depth(c: &Circuit) -> usize {
    c.depth()
}
