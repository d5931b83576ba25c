//! Dense statevector engine.
//!
//! Qubit `j` is bit `j` of the amplitude index. In joint ancilla+system
//! registers the ancilla is the highest-index qubit, so the two ancilla
//! branches are the lower and upper halves of the amplitude vector.

mod circuit;
mod gate;
mod measure;
mod state;

pub use circuit::{apply_circuit, circuit_depth, Circuit};
pub use gate::{hadamard, rx, ry, BlockOp, ControlState, Gate, GateKind, Mat2, OpaqueBlock};
pub use measure::{measure_ancilla, pauli_expectation, MeasurePolicy, Measurement, ZERO_BRANCH_TOL};
pub use state::{StateVector, NORM_TOL};

pub(crate) use gate::overlap_1q;
pub(crate) use state::inner;
