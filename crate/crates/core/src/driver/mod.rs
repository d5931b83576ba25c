//! The amplify-learn loop end to end: configuration, per-round telemetry,
//! seeded sweeps and result files.

mod audit;
mod output;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplifier::{amplify_state, ground_overlap, round_diagnostics};
use crate::ansatz::{AnsatzSpec, Family, HeLayout, Params};
use crate::error::{QaaeError, Result};
use crate::evolution::{build_evolution, controlled_evolution_exact, EvolutionConfig};
use crate::hamiltonian::{
    build_ltfim, build_two_level, parse_pauli_file, spectrum, PauliHamiltonian, PauliTerm,
    Spectrum, DEFAULT_WINDOW, MAX_DENSE_QUBITS,
};
use crate::learner::{bloch_reencode, learn_deviation, learn_state, trace_distance_pure, LearnConfig};
use crate::simulator::{pauli_expectation, Circuit, MeasurePolicy, StateVector};

pub use verify::{loglog_slope, random_instance, verify_all, Check};
pub use audit::{check_recursion, depth_for, depth_report, DepthReport, RecursionReport};
pub use output::{fmt_real, write_json, write_run_csv, write_summary_json, write_vqe_csv, CSV_HEADER, VQE_CSV_HEADER};
pub use sweep::{
    compare_with_vqe, mean_sd, run_sweep, run_sweep_sequential, Aggregate, Comparison, RoundStat, SeedComparison,
    SweepResult, SUCCESS_FIDELITY,
};

const STREAM_MEASURE: u64 = 1;
const STREAM_SHOTS: u64 = 2;
const STREAM_RESTART: u64 = 3;
const STREAM_INIT: u64 = 4;

/// Tolerance on the normalized spectrum lying in `(0, 1]`.
const SPECTRUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    TwoLevel { alpha: f64, r: [f64; 3] },
    Ltfim { n: usize, g: f64, h: f64 },
    File { path: PathBuf },
}

impl ModelSpec {
    pub fn build(&self) -> Result<PauliHamiltonian> {
        match self {
            ModelSpec::TwoLevel { alpha, r } => build_two_level(*alpha, *r),
            ModelSpec::Ltfim { n, g, h } => build_ltfim(*n, *g, *h),
            ModelSpec::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| QaaeError::Io(format!("{}: {e}", path.display())))?;
                parse_pauli_file(&text)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Normalization {
    /// Affine map of the exact spectrum onto `[lo, hi]`.
    Window { lo: f64, hi: f64 },
    /// `H / 40 + 1/2`.
    LtfimFixed,
    /// Use the Hamiltonian unchanged; its spectrum must already lie in
    /// `(0, 1]`.
    AsIs,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization::Window {
            lo: DEFAULT_WINDOW.0,
            hi: DEFAULT_WINDOW.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnsatzChoice {
    Single,
    He { layout: HeLayout },
    Sud,
    Oracle,
}

impl AnsatzChoice {
    pub fn he(layers: usize) -> Self {
        AnsatzChoice::He {
            layout: HeLayout::new(layers),
        }
    }

    pub fn build(&self, num_qubits: usize) -> Result<AnsatzSpec> {
        match self {
            AnsatzChoice::Single if num_qubits == 1 => Ok(AnsatzSpec::single_qubit()),
            AnsatzChoice::Single => Err(QaaeError::Config(format!(
                "single-qubit ansatz on a {num_qubits}-qubit Hamiltonian"
            ))),
            AnsatzChoice::He { layout } => AnsatzSpec::hardware_efficient_with(num_qubits, layout.clone()),
            AnsatzChoice::Sud => AnsatzSpec::su_d(num_qubits),
            AnsatzChoice::Oracle => Ok(AnsatzSpec::oracle(num_qubits)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Exact,
    Trotter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KPolicy {
    K0,
    K1,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LearnerMode {
    /// Gradient descent on the distance objective.
    Gradient,
    /// Single-qubit shortcut: measure `<X>`, `<Z>` of the output and point
    /// the next trial along the normalized Bloch vector.
    Bloch { shots: Option<u32> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Halting {
    /// `|E_r - E_{r-1}| <= eps_h`.
    Energy,
    /// `1 - |<phi_r|phi_{r-1}>|^2 <= threshold` on successive outputs.
    Overlap { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitSpec {
    /// `random_init` with the run seed.
    Random,
    Theta { theta: Vec<f64> },
    /// A trial with the given ground overlap (single-qubit and oracle
    /// families only).
    GroundOverlap { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub normalization: Normalization,
    pub ansatz: AnsatzChoice,
    pub learn: LearnConfig,
    pub learner: LearnerMode,
    /// Optional `(rounds, n_max)` budget for the first rounds.
    pub early_n_max: Option<(usize, usize)>,
    /// Learning starts from the previous round's parameters when set,
    /// otherwise from a fresh random draw.
    pub warm_start: bool,
    pub eps_h: f64,
    pub halting: Halting,
    pub max_rounds: usize,
    pub seed: u64,
    pub k_policy: KPolicy,
    pub backend: Backend,
    pub evolution: EvolutionConfig,
    pub init: InitSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Ltfim { n: 4, g: 1.0, h: 1.0 },
            normalization: Normalization::default(),
            ansatz: AnsatzChoice::he(3),
            learn: LearnConfig::default(),
            learner: LearnerMode::Gradient,
            early_n_max: None,
            warm_start: true,
            eps_h: 1e-6,
            halting: Halting::Energy,
            max_rounds: 10_000,
            seed: 0,
            k_policy: KPolicy::K0,
            backend: Backend::Exact,
            evolution: EvolutionConfig::default(),
            init: InitSpec::Random,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_h > 0.0) {
            return Err(QaaeError::Config(format!("eps_h must be positive, got {}", self.eps_h)));
        }
        if self.max_rounds < 1 {
            return Err(QaaeError::Config("max_rounds must be >= 1".into()));
        }
        if let Halting::Overlap { threshold } = self.halting {
            if !(threshold > 0.0) {
                return Err(QaaeError::Config("overlap threshold must be positive".into()));
            }
        }
        self.learn.validate()?;
        self.evolution.validate()
    }
}

/// Telemetry for one round.
///
/// Round `r` (from 1) starts from the trial `|alpha(theta_r)>`, amplifies it
/// and learns `theta_{r+1}`; `energy_norm` is the energy of the learned
/// trial, so successive records give the halting difference directly. The
/// initial trial's energy is kept in [`RunOutput::initial_energy`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub k: u8,
    pub p_k: f64,
    pub gamma_before: f64,
    pub gamma_after: f64,
    pub delta: f64,
    pub delta_predicted: f64,
    pub eps_r: f64,
    pub energy_norm: f64,
    pub energy_phys: f64,
    pub learn_steps: usize,
    pub depth_round: Option<usize>,
    pub halted: bool,
    /// Ground overlap of the learned trial.
    pub gamma_next: f64,
    pub lemma_dev: f64,
    pub lemma_bound: f64,
    pub preparations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub run_id: usize,
    pub seed: u64,
    pub initial_energy: f64,
    pub initial_gamma: f64,
    pub records: Vec<RoundRecord>,
    pub halted: bool,
    pub preparations: u64,
    pub final_theta: Vec<f64>,
    /// Present when the run aborted; `records` holds the rounds completed.
    pub error: Option<String>,
}

impl RunOutput {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(self.initial_energy, |r| r.energy_norm)
    }

    pub fn final_gamma(&self) -> f64 {
        self.records.last().map_or(self.initial_gamma, |r| r.gamma_next)
    }

    /// Ground overlaps `g_1, g_2, ...` of the successive trials.
    pub fn gamma_trajectory(&self) -> Vec<f64> {
        std::iter::once(self.initial_gamma)
            .chain(self.records.iter().map(|r| r.gamma_next))
            .collect()
    }
}

/// Everything about a run that does not depend on the seed: the normalized
/// Hamiltonian, its spectrum, the ansatz and the compiled evolution.
pub struct Setup {
    pub cfg: RunConfig,
    pub raw: PauliHamiltonian,
    pub hamiltonian: PauliHamiltonian,
    pub spectrum: Option<Arc<Spectrum>>,
    pub ansatz: AnsatzSpec,
    pub evolution: Circuit,
    pub trotter_steps: Option<usize>,
    pub depth_round: Option<usize>,
}

fn check_unit_window(spec: &Spectrum) -> Result<()> {
    let lo = spec.eigenvalues[0];
    let hi = spec.eigenvalues[spec.dim() - 1];
    if lo <= 0.0 || hi > 1.0 + SPECTRUM_TOL {
        return Err(QaaeError::Normalization(format!(
            "normalized spectrum [{lo}, {hi}] is not inside (0, 1]"
        )));
    }
    Ok(())
}

/// Sum of absolute coefficients, a bound on the spectral radius.
fn coefficient_bound(h: &PauliHamiltonian) -> f64 {
    h.terms().iter().map(|t: &PauliTerm| t.coeff.abs()).sum()
}

pub fn normalize(raw: &PauliHamiltonian, n: Normalization) -> Result<(PauliHamiltonian, Option<Spectrum>)> {
    let dense = raw.num_qubits() <= MAX_DENSE_QUBITS;
    let h = match n {
        Normalization::Window { lo, hi } if dense => raw.normalize_affine(lo, hi)?,
        Normalization::Window { lo, hi } => {
            let b = coefficient_bound(raw);
            raw.normalize_with_bounds(lo, hi, -b, b)?
        }
        Normalization::LtfimFixed => raw.affine(1.0 / 40.0, 0.5)?,
        Normalization::AsIs => raw.clone(),
    };
    if !dense {
        return Ok((h, None));
    }
    let spec = spectrum(&h)?;
    check_unit_window(&spec)?;
    Ok((h, Some(spec)))
}

impl Setup {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let raw = cfg.model.build()?;
        let (hamiltonian, spec) = normalize(&raw, cfg.normalization)?;
        let spectrum = spec.map(Arc::new);
        let ansatz = cfg.ansatz.build(hamiltonian.num_qubits())?;
        if matches!(cfg.learner, LearnerMode::Bloch { .. }) && *ansatz.family() != Family::SingleQubit {
            return Err(QaaeError::Config("Bloch re-encoding needs the single-qubit ansatz".into()));
        }
        if let LearnerMode::Bloch { shots: Some(0) } = cfg.learner {
            return Err(QaaeError::Config("shot count must be >= 1".into()));
        }
        let (evolution, trotter_steps) = match cfg.backend {
            Backend::Exact => {
                let spec = spectrum.clone().ok_or_else(|| {
                    QaaeError::Capability(format!(
                        "exact evolution needs q <= {MAX_DENSE_QUBITS}; use the Trotter backend"
                    ))
                })?;
                (controlled_evolution_exact(spec, cfg.evolution.omega)?, None)
            }
            Backend::Trotter => {
                let (c, steps) = build_evolution(&hamiltonian, &cfg.evolution)?;
                (c, Some(steps))
            }
        };
        let mut setup = Self {
            cfg: cfg.clone(),
            raw,
            hamiltonian,
            spectrum,
            ansatz,
            evolution,
            trotter_steps,
            depth_round: None,
        };
        if cfg.backend == Backend::Trotter {
            let init = setup.initial_params(cfg.seed)?;
            setup.depth_round = Some(audit::depth_of(&setup, &init)?.d_round);
        }
        Ok(setup)
    }

    pub fn lambda0(&self) -> Option<f64> {
        self.spectrum.as_ref().map(|s| s.ground_energy())
    }

    pub fn c_star(&self) -> Option<f64> {
        self.spectrum
            .as_ref()
            .map(|s| crate::amplifier::c_star(s, self.cfg.evolution.omega))
    }

    fn gamma(&self, s: &StateVector) -> f64 {
        self.spectrum
            .as_ref()
            .map_or(f64::NAN, |spec| ground_overlap(s, spec).unwrap_or(f64::NAN))
    }

    pub fn initial_params(&self, seed: u64) -> Result<Params> {
        let a = &self.ansatz;
        match &self.cfg.init {
            InitSpec::Random => Ok(a.random_init(seed)),
            InitSpec::Theta { theta } => {
                let p = Params::new(theta.clone());
                a.validate(&p)?;
                Ok(p)
            }
            InitSpec::GroundOverlap { gamma } => self.ground_overlap_init(*gamma, seed),
        }
    }

    fn ground_overlap_init(&self, gamma: f64, seed: u64) -> Result<Params> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(QaaeError::Config(format!("initial overlap {gamma} outside [0, 1]")));
        }
        let spec = self.spectrum.as_ref().ok_or_else(|| {
            QaaeError::Capability("a prescribed initial overlap needs the exact spectrum".into())
        })?;
        match self.ansatz.family() {
            Family::SingleQubit => {
                // meridian trial at angle arccos(2 gamma - 1) from the ground Bloch vector
                let g = spec.ground_state();
                let x = crate::simulator::pauli_expectation(&g, &PauliTerm::new(1.0, 1, 0), None, 0)?;
                let z = crate::simulator::pauli_expectation(&g, &PauliTerm::new(1.0, 0, 1), None, 0)?;
                let y = crate::simulator::pauli_expectation(&g, &PauliTerm::new(1.0, 1, 1), None, 0)?;
                if y.abs() > 1e-9 {
                    return Err(QaaeError::Config(
                        "ground state is off the x-z meridian; no meridian trial has that overlap".into(),
                    ));
                }
                let base = x.atan2(z);
                Ok(Params::new(vec![base + (2.0 * gamma - 1.0).clamp(-1.0, 1.0).acos()]))
            }
            Family::Oracle => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(STREAM_INIT);
                let g0 = spec.ground_state();
                let mut rest = StateVector::haar_random_with(g0.num_qubits(), &mut rng).into_amps();
                let c = crate::simulator::inner(g0.amps(), &rest);
                for (r, g) in rest.iter_mut().zip(g0.amps()) {
                    *r -= c * g;
                }
                let n = rest.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                let amps = rest
                    .iter()
                    .zip(g0.amps())
                    .map(|(r, g)| g * gamma.sqrt() + r / n * (1.0 - gamma).sqrt())
                    .collect();
                Ok(Params::oracle(StateVector::from_amplitudes_normalized(g0.num_qubits(), amps)?))
            }
            _ => Err(QaaeError::Config(
                "a prescribed initial overlap is supported for the single and oracle families".into(),
            )),
        }
    }

    /// Runs the loop for one seed. Failures after round 0 are reported in
    /// [`RunOutput::error`] with the completed rounds kept.
    pub fn run(&self, run_id: usize, seed: u64) -> Result<RunOutput> {
        let init = self.initial_params(seed)?;
        let trial = self.ansatz.prepare_trial(&init)?;
        let mut out = RunOutput {
            run_id,
            seed,
            initial_energy: self.hamiltonian.expectation(&trial)?,
            initial_gamma: self.gamma(&trial),
            records: Vec::new(),
            halted: false,
            preparations: 1,
            final_theta: init.theta.clone(),
            error: None,
        };
        let mut streams = [STREAM_MEASURE, STREAM_SHOTS, STREAM_RESTART].map(|s| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(s);
            r
        });
        let mut state = RoundState {
            params: init,
            trial,
            energy: out.initial_energy,
            prev_output: None,
        };
        for round in 1..=self.cfg.max_rounds {
            match self.round(round, &mut state, &mut streams) {
                Ok(rec) => {
                    out.preparations += rec.preparations;
                    out.halted = rec.halted;
                    out.records.push(rec);
                    out.final_theta = state.params.theta.clone();
                    if out.halted {
                        break;
                    }
                }
                Err(e) => {
                    out.error = Some(e.to_string());
                    break;
                }
            }
        }
        Ok(out)
    }

    fn round(&self, round: usize, st: &mut RoundState, streams: &mut [ChaCha8Rng; 3]) -> Result<RoundRecord> {
        let cfg = &self.cfg;
        let omega = cfg.evolution.omega;
        let policy = match cfg.k_policy {
            KPolicy::K0 => MeasurePolicy::K0,
            KPolicy::K1 => MeasurePolicy::K1,
            KPolicy::Sample => MeasurePolicy::Sample(streams[0].next_u64()),
        };
        let gamma_before = self.gamma(&st.trial);
        let delta_predicted = match &self.spectrum {
            Some(spec) => round_diagnostics(&st.trial, spec, omega)?.delta_predicted,
            None => f64::NAN,
        };
        let m = amplify_state(&st.trial, &self.evolution, policy)?;
        let phi = m.system;
        let gamma_after = self.gamma(&phi);

        let (next, learn_steps, learn_preps) = match cfg.learner {
            LearnerMode::Gradient => {
                let mut learn = cfg.learn;
                if let Some((rounds, n)) = cfg.early_n_max {
                    if round <= rounds {
                        learn.n_max = n;
                    }
                }
                let start = if cfg.warm_start {
                    st.params.clone()
                } else {
                    self.ansatz.random_init(streams[2].next_u64())
                };
                let r = learn_state(&phi, &self.ansatz, &start, &learn)?;
                (r.theta_next, r.steps_used, r.preparations)
            }
            LearnerMode::Bloch { shots } => {
                let seed = streams[1].next_u64();
                let cx = pauli_expectation(&phi, &PauliTerm::new(1.0, 1, 0), shots, seed)?;
                let cz = pauli_expectation(&phi, &PauliTerm::new(1.0, 0, 1), shots, seed ^ 0x9e37_79b9_7f4a_7c15)?;
                let preps = 2 * u64::from(shots.unwrap_or(1));
                (bloch_reencode(cx, cz)?, 0, preps)
            }
        };
        let trial_next = self.ansatz.prepare_trial(&next)?;
        let eps_r = trace_distance_pure(&trial_next, &phi)?;
        let (lemma_dev, lemma_bound) = match &self.spectrum {
            Some(spec) => learn_deviation(&phi, &trial_next, spec)?,
            None => (f64::NAN, eps_r),
        };
        let energy = self.hamiltonian.expectation(&trial_next)?;
        let halted = match cfg.halting {
            Halting::Energy => (energy - st.energy).abs() <= cfg.eps_h,
            Halting::Overlap { threshold } => match &st.prev_output {
                Some(prev) => 1.0 - phi.fidelity(prev)? <= threshold,
                None => false,
            },
        };
        let rec = RoundRecord {
            round,
            k: m.k,
            p_k: m.p_k,
            gamma_before,
            gamma_after,
            delta: gamma_after - gamma_before,
            delta_predicted,
            eps_r,
            energy_norm: energy,
            energy_phys: self.hamiltonian.to_physical(energy),
            learn_steps,
            depth_round: self.depth_round,
            halted,
            gamma_next: self.gamma(&trial_next),
            lemma_dev,
            lemma_bound,
            preparations: 1 + learn_preps,
        };
        st.params = next;
        st.trial = trial_next;
        st.energy = energy;
        st.prev_output = Some(phi);
        Ok(rec)
    }
}

struct RoundState {
    params: Params,
    trial: StateVector,
    energy: f64,
    prev_output: Option<StateVector>,
}

/// Builds the setup for `cfg` and runs its seed.
pub fn run_qaae(cfg: &RunConfig) -> Result<RunOutput> {
    Setup::new(cfg)?.run(0, cfg.seed)
}
