//! Trial-state families and the reflection about a trial state.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QaaeError, Result};
use crate::simulator::{BlockOp, Circuit, ControlState, GateKind, OpaqueBlock, StateVector};

/// Largest register for the full SU(2^q) family (K = 4^q - 1).
pub const MAX_SUD_QUBITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RotAxis {
    X,
    Y,
    Z,
}

impl RotAxis {
    fn kind(self) -> GateKind {
        match self {
            RotAxis::X => GateKind::Rx,
            RotAxis::Y => GateKind::Ry,
            RotAxis::Z => GateKind::Rz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Entangler {
    Cz,
    Cnot,
}

/// Layered hardware-efficient layout: each rank applies one rotation per
/// axis per qubit, ranks are separated by a nearest-neighbour entangling
/// chain, and a final rank closes the circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeLayout {
    pub layers: usize,
    pub axes: Vec<RotAxis>,
    pub entangler: Entangler,
}

impl HeLayout {
    pub fn new(layers: usize) -> Self {
        Self {
            layers,
            axes: vec![RotAxis::Y],
            entangler: Entangler::Cz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// `Ry(theta)|0>` on one qubit: the x-z meridian of the Bloch sphere.
    SingleQubit,
    HardwareEfficient(HeLayout),
    /// `exp(-i sum_a theta_a G_a)` over the generalized Gell-Mann basis.
    SuD,
    /// Stores the trial state itself; learning is exact.
    Oracle,
    /// A caller-supplied parametric circuit.
    Custom,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::SingleQubit => "single",
            Family::HardwareEfficient(_) => "he",
            Family::SuD => "sud",
            Family::Oracle => "oracle",
            Family::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    family: Family,
    num_qubits: usize,
    num_params: usize,
    circuit: Option<Circuit>,
}

/// Parameter vector, plus the stored state for the oracle family.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub theta: Vec<f64>,
    pub state: Option<StateVector>,
}

impl Params {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta, state: None }
    }

    pub fn oracle(state: StateVector) -> Self {
        Self {
            theta: Vec::new(),
            state: Some(state),
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

impl AnsatzSpec {
    pub fn single_qubit() -> Self {
        let mut c = Circuit::new(1, 1);
        c.slotted(GateKind::Ry, 0, 0).expect("valid gate");
        Self {
            family: Family::SingleQubit,
            num_qubits: 1,
            num_params: 1,
            circuit: Some(c),
        }
    }

    /// Ry ranks with a CZ chain, `K = q (layers + 1)`.
    pub fn hardware_efficient(num_qubits: usize, layers: usize) -> Result<Self> {
        Self::hardware_efficient_with(num_qubits, HeLayout::new(layers))
    }

    pub fn hardware_efficient_with(num_qubits: usize, layout: HeLayout) -> Result<Self> {
        if num_qubits == 0 {
            return Err(QaaeError::Size("ansatz needs at least one qubit".into()));
        }
        if layout.axes.is_empty() {
            return Err(QaaeError::Config("rotation rank needs at least one axis".into()));
        }
        let k = num_qubits * (layout.layers + 1) * layout.axes.len();
        let mut c = Circuit::new(num_qubits, k);
        let mut slot = 0;
        let mut rank = |c: &mut Circuit| -> Result<()> {
            for &axis in &layout.axes {
                for j in 0..num_qubits {
                    c.slotted(axis.kind(), j, slot)?;
                    slot += 1;
                }
            }
            Ok(())
        };
        for _ in 0..layout.layers {
            rank(&mut c)?;
            for j in 0..num_qubits.saturating_sub(1) {
                match layout.entangler {
                    Entangler::Cz => c.cz(j, j + 1)?,
                    Entangler::Cnot => c.cnot(j, j + 1)?,
                };
            }
        }
        rank(&mut c)?;
        Ok(Self {
            family: Family::HardwareEfficient(layout),
            num_qubits,
            num_params: k,
            circuit: Some(c),
        })
    }

    pub fn su_d(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_SUD_QUBITS {
            return Err(QaaeError::Size(format!(
                "su-d family supports 1..={MAX_SUD_QUBITS} qubits, got {num_qubits}"
            )));
        }
        Ok(Self {
            family: Family::SuD,
            num_qubits,
            num_params: (1usize << (2 * num_qubits)) - 1,
            circuit: None,
        })
    }

    pub fn oracle(num_qubits: usize) -> Self {
        Self {
            family: Family::Oracle,
            num_qubits,
            num_params: 0,
            circuit: None,
        }
    }

    pub fn from_circuit(circuit: Circuit) -> Self {
        Self {
            family: Family::Custom,
            num_qubits: circuit.num_qubits(),
            num_params: circuit.num_params(),
            circuit: Some(circuit),
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    /// The parametric circuit for gate-based families.
    pub fn circuit(&self) -> Option<&Circuit> {
        self.circuit.as_ref()
    }

    pub fn validate(&self, p: &Params) -> Result<()> {
        if p.theta.len() != self.num_params {
            return Err(QaaeError::Params(format!(
                "{} ansatz takes {} parameters, got {}",
                self.family.name(),
                self.num_params,
                p.theta.len()
            )));
        }
        if let Some(i) = p.theta.iter().position(|t| !t.is_finite()) {
            return Err(QaaeError::Params(format!("theta[{i}] = {} is not finite", p.theta[i])));
        }
        if self.family == Family::Oracle {
            match &p.state {
                Some(s) if s.num_qubits() == self.num_qubits => {}
                Some(s) => {
                    return Err(QaaeError::Dimension {
                        expected: 1 << self.num_qubits,
                        found: s.dim(),
                    })
                }
                None => return Err(QaaeError::Params("oracle ansatz needs a stored state".into())),
            }
        }
        Ok(())
    }

    /// `|alpha(theta)> = A(theta)|0...0>`.
    pub fn prepare_trial(&self, p: &Params) -> Result<StateVector> {
        self.validate(p)?;
        match &self.family {
            Family::Oracle => Ok(p.state.clone().expect("validated")),
            Family::SuD => {
                let (vals, vecs) = sud_eigen(self.num_qubits, &p.theta);
                let d = vals.len();
                let amps = (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|j| vecs[(r, j)] * C64::from_polar(1.0, -vals[j]) * vecs[(0, j)].conj())
                            .sum()
                    })
                    .collect();
                Ok(StateVector::from_amplitudes_unchecked(self.num_qubits, amps))
            }
            _ => {
                let mut s = StateVector::zero(self.num_qubits);
                self.circuit
                    .as_ref()
                    .expect("gate family")
                    .apply_raw(s.amps_mut(), &p.theta);
                Ok(s)
            }
        }
    }

    /// `A(theta)` as a parameter-free circuit. Dense families become a
    /// single opaque block.
    pub fn unitary_circuit(&self, p: &Params) -> Result<Circuit> {
        self.validate(p)?;
        let q = self.num_qubits;
        let block = match &self.family {
            Family::SuD => {
                let (vals, vecs) = sud_eigen(q, &p.theta);
                let diag = nalgebra::DVector::from_iterator(
                    vals.len(),
                    vals.iter().map(|&l| C64::from_polar(1.0, -l)),
                );
                let u = &vecs * DMatrix::from_diagonal(&diag) * vecs.adjoint();
                // one generator exponential per layer
                OpaqueBlock::new(self.num_params, Arc::new(DenseBlock { m: u, label: "su-d" }))
            }
            Family::Oracle => OpaqueBlock::new(
                1,
                Arc::new(Householder::mapping_zero_to(p.state.as_ref().expect("validated"))),
            ),
            _ => return self.circuit.as_ref().expect("gate family").bind(&p.theta),
        };
        let mut c = Circuit::new(q, 0);
        c.opaque(block, (0..q).collect())?;
        Ok(c)
    }

    /// Uniform `[0, 2 pi)` per slot; the oracle family draws a Haar state.
    pub fn random_init(&self, seed: u64) -> Params {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.family {
            Family::Oracle => Params::oracle(StateVector::haar_random_with(self.num_qubits, &mut rng)),
            _ => Params::new((0..self.num_params).map(|_| rng.random::<f64>() * TAU).collect()),
        }
    }
}

/// Eigenpairs of `sum_a theta_a G_a` in the generalized Gell-Mann basis:
/// symmetric pairs, then antisymmetric pairs, then the diagonal ones.
fn sud_eigen(num_qubits: usize, theta: &[f64]) -> (Vec<f64>, DMatrix<C64>) {
    let m = gell_mann_combination(1 << num_qubits, theta);
    let eig = m.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub(crate) fn gell_mann_combination(d: usize, theta: &[f64]) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(d, d);
    let npairs = d * (d - 1) / 2;
    let mut a = 0;
    for j in 0..d {
        for k in j + 1..d {
            m[(j, k)] += theta[a];
            m[(k, j)] += theta[a];
            m[(j, k)] += C64::new(0.0, -theta[a + npairs]);
            m[(k, j)] += C64::new(0.0, theta[a + npairs]);
            a += 1;
        }
    }
    for l in 1..d {
        let t = theta[2 * npairs + l - 1] * (2.0 / (l * (l + 1)) as f64).sqrt();
        for j in 0..l {
            m[(j, j)] += t;
        }
        m[(l, l)] -= t * l as f64;
    }
    m
}

/// The `a`-th generalized Gell-Mann matrix of dimension `d`.
pub fn gell_mann(d: usize, a: usize) -> DMatrix<C64> {
    let mut e = vec![0.0; d * d - 1];
    e[a] = 1.0;
    gell_mann_combination(d, &e)
}

struct DenseBlock {
    m: DMatrix<C64>,
    label: &'static str,
}

impl BlockOp for DenseBlock {
    fn arity(&self) -> usize {
        self.m.nrows().trailing_zeros() as usize
    }

    fn apply_local(&self, buf: &mut [C64]) {
        let v = nalgebra::DVector::from_column_slice(buf);
        let out = &self.m * v;
        buf.copy_from_slice(out.as_slice());
    }

    fn adjoint(&self) -> Arc<dyn BlockOp> {
        Arc::new(DenseBlock {
            m: self.m.adjoint(),
            label: self.label,
        })
    }

    fn label(&self) -> &str {
        self.label
    }
}

/// `I - 2|v><v|/<v|v>` sending `|0>` to a phase times a target state.
struct Householder {
    v: Vec<C64>,
    arity: usize,
}

impl Householder {
    fn mapping_zero_to(target: &StateVector) -> Self {
        let a0 = target.amps()[0];
        let phase = if a0.norm() > 0.0 { a0.conj() / a0.norm() } else { C64::new(1.0, 0.0) };
        let mut v: Vec<C64> = target.amps().iter().map(|a| -a * phase).collect();
        v[0] += 1.0;
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-300 {
            v.iter_mut().for_each(|x| *x /= n);
        } else {
            v.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        }
        Self {
            v,
            arity: target.num_qubits(),
        }
    }
}

impl BlockOp for Householder {
    fn arity(&self) -> usize {
        self.arity
    }

    fn apply_local(&self, buf: &mut [C64]) {
        let dot: C64 = self.v.iter().zip(buf.iter()).map(|(v, b)| v.conj() * b).sum();
        for (b, v) in buf.iter_mut().zip(&self.v) {
            *b -= 2.0 * dot * v;
        }
    }

    fn adjoint(&self) -> Arc<dyn BlockOp> {
        Arc::new(Householder {
            v: self.v.clone(),
            arity: self.arity,
        })
    }

    fn label(&self) -> &str {
        "householder"
    }
}

/// `I - 2|Psi><Psi|` on ancilla + system with `|Psi> = |+> (x) |alpha>`.
#[derive(Debug, Clone)]
pub struct Reflection {
    psi: StateVector,
}

impl Reflection {
    pub fn about(trial: &StateVector) -> Self {
        Self {
            psi: StateVector::tensor(&StateVector::plus(), trial),
        }
    }

    /// The joint state `|Psi>` reflected about.
    pub fn state(&self) -> &StateVector {
        &self.psi
    }

    pub fn apply(&self, s: &mut StateVector) -> Result<()> {
        self.psi.check_dim(s)?;
        self.apply_raw(s.amps_mut());
        Ok(())
    }

    pub(crate) fn apply_raw(&self, amps: &mut [C64]) {
        let dot = crate::simulator::inner(self.psi.amps(), amps);
        for (a, p) in amps.iter_mut().zip(self.psi.amps()) {
            *a -= 2.0 * dot * p;
        }
    }
}

pub fn build_reflection(a: &AnsatzSpec, p: &Params) -> Result<Reflection> {
    Ok(Reflection::about(&a.prepare_trial(p)?))
}

/// Gate-level reflection `(H (x) A) R_0 (H (x) A)^dagger` with `R_0` a
/// zero-controlled pi phase on all `q + 1` qubits.
pub fn reflection_circuit(a: &AnsatzSpec, p: &Params) -> Result<Circuit> {
    let q = a.num_qubits();
    let u = a.unitary_circuit(p)?;
    let map: Vec<usize> = (0..q).collect();
    let mut c = Circuit::new(q + 1, 0);
    c.h(q)?;
    c.append_mapped(&u.inverse(&[])?, &map)?;
    c.mc_phase((0..=q).collect(), PI, ControlState::Zeros)?;
    c.h(q)?;
    c.append_mapped(&u, &map)?;
    Ok(c)
}
