//! Acceptance criteria 1 to 13. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! Reference values come from dense oracles built here: Kronecker-product
//! Hamiltonians, their own eigendecomposition, and the round operator as an
//! explicit matrix.

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qaae::amplifier::{amplify_round, round_diagnostics};
use qaae::ansatz::{AnsatzSpec, Params};
use qaae::driver::{
    check_recursion, compare_with_vqe, depth_for, run_sweep, run_sweep_sequential, write_run_csv, AnsatzChoice,
    InitSpec, KPolicy, LearnerMode, ModelSpec, Normalization, RunConfig, RunOutput, Setup,
};
use qaae::evolution::{build_controlled_trotter, controlled_evolution_exact, EvolutionConfig};
use qaae::hamiltonian::{build_ltfim, spectrum, PauliHamiltonian, PauliTerm};
use qaae::learner::{gradient_check, learn_deviation, objective_gradient, LearnConfig};
use qaae::simulator::{MeasurePolicy, StateVector};

const OMEGA: f64 = FRAC_PI_4;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// ---------------------------------------------------------------- oracles

fn pauli(letter: char) -> DMatrix<C64> {
    let (o, l, i) = (c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0));
    match letter {
        'I' => DMatrix::from_row_slice(2, 2, &[l, o, o, l]),
        'X' => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
        'Y' => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        'Z' => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        _ => unreachable!(),
    }
}

/// Dense matrix with qubit `j` as bit `j` of the index, so the leftmost
/// letter (qubit 0) is the rightmost Kronecker factor.
fn dense(h: &PauliHamiltonian) -> DMatrix<C64> {
    let q = h.num_qubits();
    let d = 1 << q;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for t in h.terms() {
        let letters: Vec<char> = t.letters(q).chars().collect();
        let mut k = DMatrix::from_element(1, 1, c(1.0, 0.0));
        for &ch in letters.iter().rev() {
            k = k.kronecker(&pauli(ch));
        }
        m += k * c(t.coeff, 0.0);
    }
    m
}

struct Eig {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

fn eig(h: &PauliHamiltonian) -> Eig {
    let e = dense(h).symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let d = idx.len();
    let mut vectors = DMatrix::<C64>::zeros(d, d);
    for (j, &i) in idx.iter().enumerate() {
        vectors.set_column(j, &e.eigenvectors.column(i));
    }
    Eig {
        values: idx.iter().map(|&i| e.eigenvalues[i]).collect(),
        vectors,
    }
}

impl Eig {
    fn coeffs(&self, amps: &[C64]) -> Vec<C64> {
        (0..self.values.len())
            .map(|j| self.vectors.column(j).iter().zip(amps).map(|(v, a)| v.conj() * a).sum())
            .collect()
    }

    fn gamma(&self, amps: &[C64]) -> f64 {
        self.coeffs(amps)[0].norm_sqr()
    }

    fn func(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let d = self.values.len();
        let diag = DMatrix::from_fn(d, d, |i, j| if i == j { f(self.values[i]) } else { c(0.0, 0.0) });
        &self.vectors * diag * self.vectors.adjoint()
    }

    /// `|0><0| (x) e^{i w H} + i |1><1| (x) e^{-i w H}` with the ancilla on
    /// the high bit.
    fn controlled_u(&self, omega: f64) -> DMatrix<C64> {
        let d = self.values.len();
        let a = self.func(|l| C64::from_polar(1.0, omega * l));
        let b = self.func(|l| c(0.0, 1.0) * C64::from_polar(1.0, -omega * l));
        let mut u = DMatrix::<C64>::zeros(2 * d, 2 * d);
        u.view_mut((0, 0), (d, d)).copy_from(&a);
        u.view_mut((d, d), (d, d)).copy_from(&b);
        u
    }
}

struct Closed {
    w: C64,
    chi: f64,
    xi: Vec<f64>,
    gsq: Vec<f64>,
    c_star: f64,
}

fn closed_forms(e: &Eig, amps: &[C64], omega: f64) -> Closed {
    let gsq: Vec<f64> = e.coeffs(amps).iter().map(|g| g.norm_sqr()).collect();
    let w: C64 = gsq
        .iter()
        .zip(&e.values)
        .map(|(g, &l)| 0.5 * g * (C64::from_polar(1.0, omega * l) + c(0.0, 1.0) * C64::from_polar(1.0, -omega * l)))
        .sum();
    let m = w.norm();
    let xi = e.values.iter().map(|&l| m - (FRAC_PI_4 - omega * l).cos()).collect();
    let (c0, c1) = ((FRAC_PI_4 - omega * e.values[0]).cos(), (FRAC_PI_4 - omega * e.values[1]).cos());
    Closed {
        w,
        chi: 4.0 * m * m - 1.0,
        xi,
        gsq,
        c_star: 4.0 * c0 * (4.0 * c0 * c0 - 1.0) * (c1 - c0),
    }
}

/// `R U R U^dagger |+>|trial>` by explicit matrices; returns the branch
/// probabilities and normalized branch states.
fn dense_round(e: &Eig, trial: &[C64], omega: f64) -> ([f64; 2], [Vec<C64>; 2]) {
    let d = trial.len();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = nalgebra::DVector::from_iterator(2 * d, trial.iter().chain(trial).map(|a| a * s));
    let refl = DMatrix::<C64>::identity(2 * d, 2 * d) - (&psi * psi.adjoint()) * c(2.0, 0.0);
    let u = e.controlled_u(omega);
    let out = &refl * &u * &refl * u.adjoint() * &psi;
    let branch = |k: usize| -> (f64, Vec<C64>) {
        let v: Vec<C64> = out.iter().skip(k * d).take(d).copied().collect();
        let p: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        (p, v.iter().map(|a| a / p.sqrt()).collect())
    };
    let (b0, b1) = (branch(0), branch(1));
    ([b0.0, b1.0], [b0.1, b1.1])
}

fn random_letters<R: Rng>(q: usize, rng: &mut R) -> String {
    (0..q).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect()
}

/// Random Pauli Hamiltonian mapped onto `[0.05, 0.95]` using the oracle's
/// own eigenvalues, rejecting near-degenerate ground states.
fn random_normalized<R: Rng>(q: usize, rng: &mut R) -> (PauliHamiltonian, Eig) {
    loop {
        let terms: Vec<PauliTerm> = (0..2 * q + 2)
            .map(|_| PauliTerm::from_letters(rng.random_range(-1.0..1.0), &random_letters(q, rng)).unwrap())
            .collect();
        let raw = PauliHamiltonian::new(q, terms).unwrap();
        let e = eig(&raw);
        let (lo, hi) = (e.values[0], e.values[e.values.len() - 1]);
        if hi - lo < 1e-3 || e.values[1] - lo < 1e-4 {
            continue;
        }
        let scale = 0.9 / (hi - lo);
        let shift = 0.05 - scale * lo;
        let scaled = raw
            .terms()
            .iter()
            .map(|t| PauliTerm::new(t.coeff * scale, t.x_mask, t.z_mask))
            .chain(std::iter::once(PauliTerm::new(shift, 0, 0)));
        let h = PauliHamiltonian::new(q, scaled).unwrap();
        let e = eig(&h);
        return (h, e);
    }
}

fn trial_ansatz(q: usize) -> AnsatzSpec {
    if q == 1 {
        AnsatzSpec::single_qubit()
    } else {
        AnsatzSpec::hardware_efficient(q, 2).unwrap()
    }
}

fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

// ------------------------------------------------------------ instances

struct Instance {
    h: PauliHamiltonian,
    e: Eig,
    a: AnsatzSpec,
    p: Params,
}

fn instances(n: usize, seed: u64, qs: &[usize]) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let q = qs[i % qs.len()];
            let (h, e) = random_normalized(q, &mut rng);
            let a = trial_ansatz(q);
            let p = a.random_init(rng.random());
            Instance { h, e, a, p }
        })
        .collect()
}

/// Library round on one instance and branch.
fn library_round(inst: &Instance, k: MeasurePolicy) -> qaae::simulator::Measurement {
    let spec = Arc::new(spectrum(&inst.h).unwrap());
    let u = controlled_evolution_exact(spec, OMEGA).unwrap();
    amplify_round(&inst.a, &inst.p, &u, k).unwrap()
}

// ------------------------------------------------------------ criteria

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(t: Duration, secs: u64) -> bool {
    t <= Duration::from_secs(secs)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let set = instances(200, 1, &[1, 2, 3, 4]);
    let (mut lib, mut orc) = (0f64, 0f64);
    for inst in &set {
        let trial = inst.a.prepare_trial(&inst.p).unwrap();
        let (p, _) = dense_round(&inst.e, trial.amps(), OMEGA);
        for (k, policy) in [MeasurePolicy::K0, MeasurePolicy::K1].into_iter().enumerate() {
            lib = lib.max((library_round(inst, policy).p_k - 0.5).abs());
            orc = orc.max((p[k] - 0.5).abs());
        }
    }
    let el = t.elapsed();
    outcome(
        lib <= 1e-10 && orc <= 1e-10 && within(el, 5),
        format!("200 instances q=1..4: max |p_k - 1/2| = {lib:.2e} (dense oracle {orc:.2e}), {el:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let set = instances(100, 2, &[1, 2, 3, 4]);
    let (mut eq, mut floor, mut nonpos, mut orc) = (0f64, f64::INFINITY, 0usize, 0f64);
    for inst in &set {
        let trial = inst.a.prepare_trial(&inst.p).unwrap();
        let cf = closed_forms(&inst.e, trial.amps(), OMEGA);
        let g = cf.gsq[0];
        let predicted = 4.0 * cf.w.norm() * cf.chi * cf.xi[0] * g;
        let (_, states) = dense_round(&inst.e, trial.amps(), OMEGA);
        for (k, policy) in [MeasurePolicy::K0, MeasurePolicy::K1].into_iter().enumerate() {
            let m = library_round(inst, policy);
            let delta = inst.e.gamma(m.system.amps()) - g;
            eq = eq.max((delta - predicted).abs());
            orc = orc.max((inst.e.gamma(&states[k]) - g - predicted).abs());
            floor = floor.min(delta - cf.c_star * g * (1.0 - g));
            if g > 1e-6 && g < 1.0 - 1e-6 && delta <= 0.0 {
                nonpos += 1;
            }
        }
    }
    let el = t.elapsed();
    outcome(
        eq <= 1e-9 && floor >= -1e-12 && nonpos == 0 && within(el, 30),
        format!(
            "100 instances, both branches: max |delta - 4|W|chi xi0 g0| = {eq:.2e} (dense oracle {orc:.2e}), \
             min(delta - c* G(1-G)) = {floor:.2e}, nonpositive gains {nonpos}, {el:.2?}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let set = instances(100, 2, &[1, 2, 3, 4]);
    let mut worst = 0f64;
    let mut compared = 0usize;
    for inst in &set {
        let trial = inst.a.prepare_trial(&inst.p).unwrap();
        let cf = closed_forms(&inst.e, trial.amps(), OMEGA);
        for policy in [MeasurePolicy::K0, MeasurePolicy::K1] {
            let out = library_round(inst, policy);
            let after: Vec<f64> = inst.e.coeffs(out.system.amps()).iter().map(|g| g.norm_sqr()).collect();
            for j in 0..cf.gsq.len() {
                let law = 1.0 + 4.0 * cf.w.norm() * cf.chi * cf.xi[j];
                let err = if cf.gsq[j] >= 1e-6 {
                    compared += 1;
                    (after[j] / cf.gsq[j] - law).abs()
                } else {
                    // ratio is ill-conditioned; compare the products instead
                    (after[j] - law * cf.gsq[j]).abs()
                };
                worst = worst.max(err);
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{compared} eigencomponents: max |ratio - (1 + 4|W|chi xi_j)| = {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let set = instances(100, 4, &[1, 2, 3, 4]);
    let (mut arg, mut modulus, mut zero) = (0f64, 0f64, 0f64);
    for inst in &set {
        let trial = inst.a.prepare_trial(&inst.p).unwrap();
        let spec = spectrum(&inst.h).unwrap();
        let d = round_diagnostics(&trial, &spec, OMEGA).unwrap();
        let cf = closed_forms(&inst.e, trial.amps(), OMEGA);
        let cos_sum: f64 = cf
            .gsq
            .iter()
            .zip(&inst.e.values)
            .map(|(g, &l)| g * (FRAC_PI_4 - OMEGA * l).cos())
            .sum();
        arg = arg.max((d.w_arg - FRAC_PI_4).abs()).max((cf.w.arg() - FRAC_PI_4).abs());
        modulus = modulus.max((d.w_mod - cos_sum).abs());
        let s: f64 = d.xi.iter().zip(&cf.gsq).map(|(x, g)| x * g).sum();
        zero = zero.max(s.abs());
    }
    outcome(
        arg <= 1e-9 && modulus <= 1e-9 && zero <= 1e-9,
        format!("max |arg W - pi/4| = {arg:.2e}, max ||W| - sum g cos| = {modulus:.2e}, max |sum xi_j g_j| = {zero:.2e}"),
    )
}

fn lemma_on_records(runs: &[RunOutput]) -> (usize, f64) {
    let mut n = 0;
    let mut worst = f64::NEG_INFINITY;
    for r in runs.iter().flat_map(|r| &r.records) {
        n += 1;
        worst = worst.max(r.lemma_dev - r.lemma_bound);
    }
    (n, worst)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_pair = f64::NEG_INFINITY;
    let mut agree = 0f64;
    for i in 0..1000 {
        let q = 1 + i % 4;
        let (h, e) = random_normalized(q, &mut rng);
        let a = StateVector::haar_random_with(q, &mut rng);
        let b = StateVector::haar_random_with(q, &mut rng);
        let dev = (e.gamma(a.amps()) - e.gamma(b.amps())).abs();
        let dist = (1.0 - fidelity(a.amps(), b.amps())).max(0.0).sqrt();
        worst_pair = worst_pair.max(dev - dist);
        let (ld, lb) = learn_deviation(&a, &b, &spectrum(&h).unwrap()).unwrap();
        agree = agree.max((ld - dev).abs()).max((lb - dist).abs());
    }
    let runs = [
        RunConfig {
            model: ModelSpec::Ltfim { n: 4, g: 1.0, h: 1.0 },
            ansatz: AnsatzChoice::he(2),
            learn: LearnConfig { n_max: 20, ..LearnConfig::default() },
            max_rounds: 40,
            ..RunConfig::default()
        },
        RunConfig {
            model: ModelSpec::Ltfim { n: 3, g: 1.0, h: 0.5 },
            ansatz: AnsatzChoice::Sud,
            learn: LearnConfig { n_max: 10, ..LearnConfig::default() },
            max_rounds: 20,
            k_policy: KPolicy::Sample,
            ..RunConfig::default()
        },
        RunConfig {
            model: ModelSpec::TwoLevel { alpha: 0.5, r: [0.2, 0.0, 0.3] },
            ansatz: AnsatzChoice::Single,
            learner: LearnerMode::Bloch { shots: Some(256) },
            max_rounds: 30,
            ..RunConfig::default()
        },
    ];
    let mut logged = Vec::new();
    for cfg in &runs {
        logged.extend(run_sweep(cfg, &[0, 1, 2]).unwrap().runs);
    }
    let (n, worst_log) = lemma_on_records(&logged);
    outcome(
        worst_pair <= 1e-12 && worst_log <= 1e-12 && agree <= 1e-12,
        format!(
            "1000 pairs: max(dev - D) = {worst_pair:.2e}, library vs oracle {agree:.2e}; \
             {n} logged learning steps: max(dev - D) = {worst_log:.2e}"
        ),
    )
}

fn monotone_until_converged(g: &[f64]) -> bool {
    g.windows(2).all(|w| w[0] > 1.0 - 1e-9 || w[1] > w[0])
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let models = [
        (ModelSpec::TwoLevel { alpha: 0.5, r: [0.25, 0.0, 0.0] }, Normalization::AsIs),
        (ModelSpec::TwoLevel { alpha: 0.5, r: [0.1, 0.2, 0.3] }, Normalization::default()),
        (ModelSpec::Ltfim { n: 4, g: 1.0, h: 1.0 }, Normalization::default()),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (model, norm) in models {
        let cfg = RunConfig {
            model: model.clone(),
            normalization: norm,
            ansatz: AnsatzChoice::Oracle,
            eps_h: 1e-13,
            max_rounds: 2000,
            ..RunConfig::default()
        };
        let s = run_sweep(&cfg, &(0..5).collect::<Vec<_>>()).unwrap();
        let e = eig(&Setup::new(&cfg).unwrap().hamiltonian);
        let c_star = closed_forms(&e, e.vectors.column(0).as_slice(), OMEGA).c_star;
        let (mut min_final, mut violations, mut mono, mut rounds) = (1f64, 0, true, 0);
        for r in &s.runs {
            let g = r.gamma_trajectory();
            min_final = min_final.min(g.iter().copied().fold(0.0, f64::max));
            mono &= monotone_until_converged(&g);
            let audit = check_recursion(&r.records, Some(c_star)).unwrap();
            violations += audit.violations.len();
            rounds = rounds.max(r.records.len());
        }
        pass &= min_final >= 1.0 - 1e-6 && mono && violations == 0;
        lines.push(format!(
            "{}: min final g {min_final:.9}, monotone {mono}, violations {violations}, <= {rounds} rounds",
            match model {
                ModelSpec::TwoLevel { .. } => "two-level".to_string(),
                ModelSpec::Ltfim { n, .. } => format!("LTFIM({n},1,1)"),
                ModelSpec::File { .. } => unreachable!(),
            }
        ));
    }
    let el = t.elapsed();
    outcome(pass && within(el, 10), format!("{}; {el:.2?}", lines.join("; ")))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let hams = [
        (0.5, [0.25, 0.0, 0.0], Normalization::AsIs),
        (0.5, [0.2, 0.0, 0.3], Normalization::default()),
        (0.4, [-0.1, 0.0, 0.15], Normalization::AsIs),
    ];
    let mut exact_ok = true;
    let mut worst_round = 0;
    for (alpha, r, norm) in hams {
        let cfg = RunConfig {
            model: ModelSpec::TwoLevel { alpha, r },
            normalization: norm,
            ansatz: AnsatzChoice::Single,
            learner: LearnerMode::Bloch { shots: None },
            init: InitSpec::GroundOverlap { gamma: 0.02 },
            max_rounds: 30,
            ..RunConfig::default()
        };
        let run = &run_sweep(&cfg, &[0]).unwrap().runs[0];
        let hit = run.gamma_trajectory().iter().position(|&g| g >= 0.99);
        exact_ok &= run.initial_gamma <= 0.024 && hit.is_some_and(|r| r <= 30);
        worst_round = worst_round.max(hit.unwrap_or(usize::MAX));
    }
    let cfg = RunConfig {
        model: ModelSpec::TwoLevel { alpha: 0.5, r: [0.2, 0.0, 0.3] },
        ansatz: AnsatzChoice::Single,
        learner: LearnerMode::Bloch { shots: Some(4096) },
        init: InitSpec::GroundOverlap { gamma: 0.02 },
        max_rounds: 30,
        ..RunConfig::default()
    };
    let s = run_sweep(&cfg, &(0..20).collect::<Vec<_>>()).unwrap();
    let mut finals: Vec<f64> = s.runs.iter().map(|r| r.final_gamma()).collect();
    finals.sort_by(f64::total_cmp);
    let median = 0.5 * (finals[9] + finals[10]);
    let el = t.elapsed();
    outcome(
        exact_ok && median >= 0.95 && within(el, 30),
        format!(
            "exact Bloch runs from G0 = 0.02 reach 0.99 by round {worst_round}; \
             4096 shots x 20 seeds: median final fidelity {median:.4}; {el:.2?}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let seeds: Vec<u64> = (0..20).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [4usize, 10] {
        let t = Instant::now();
        let cfg = RunConfig {
            model: ModelSpec::Ltfim { n, g: 1.0, h: 1.0 },
            ansatz: AnsatzChoice::he(3),
            learn: LearnConfig { n_max: 100, ..LearnConfig::default() },
            ..RunConfig::default()
        };
        let (cmp, runs, vqes) = compare_with_vqe(&cfg, &seeds).unwrap();
        let el = t.elapsed();
        let l0 = eig(&Setup::new(&cfg).unwrap().hamiltonian).values[0];
        let budget_ok = runs.iter().zip(&vqes).all(|(q, v)| v.preparations <= q.preparations);
        let ok = cmp.qaae_mean <= cmp.vqe_mean
            && cmp.qaae_sd <= cmp.vqe_sd
            && (cmp.lambda0 - l0).abs() <= 1e-9
            && budget_ok
            && runs.iter().all(|r| r.error.is_none())
            && (n != 10 || within(el, 30 * 60));
        pass &= ok;
        parts.push(format!(
            "N={n}: QAAE {:.3e} +- {:.2e} vs VQE {:.3e} +- {:.2e} ({el:.1?})",
            cmp.qaae_mean, cmp.qaae_sd, cmp.vqe_mean, cmp.vqe_sd
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let mut cases = 0;
    let mut failures = Vec::new();
    for q in 2..=6 {
        let h = Setup::new(&RunConfig {
            model: ModelSpec::Ltfim { n: q, g: 1.0, h: 1.0 },
            ..RunConfig::default()
        })
        .unwrap()
        .hamiltonian;
        for layers in 1..=4 {
            let a = AnsatzSpec::hardware_efficient(q, layers).unwrap();
            let p = a.random_init(layers as u64);
            for steps in 1..=8 {
                for order in [1u8, 2] {
                    let u = build_controlled_trotter(&h, &EvolutionConfig { order, steps, ..EvolutionConfig::default() })
                        .unwrap();
                    let d = depth_for(&a, &p, &u).unwrap();
                    cases += 1;
                    if !d.bound_ok {
                        failures.push((q, layers, steps, order));
                    }
                }
            }
        }
    }
    let el = t.elapsed();
    outcome(
        failures.is_empty() && within(el, 60),
        format!("{cases} compiled rounds, failures {failures:?}, {el:.2?}"),
    )
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    num / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, g, hz) in [(2usize, 1.0, 0.0), (3, 1.0, 1.0)] {
        let h = Setup::new(&RunConfig {
            model: ModelSpec::Ltfim { n, g, h: hz },
            ..RunConfig::default()
        })
        .unwrap()
        .hamiltonian;
        let exact = eig(&h).controlled_u(OMEGA);
        for (order, target) in [(1u8, -1.0), (2, -2.0)] {
            let pts: Vec<(f64, f64)> = [4usize, 8, 16, 32, 64]
                .iter()
                .map(|&steps| {
                    let u = build_controlled_trotter(&h, &EvolutionConfig { order, steps, ..EvolutionConfig::default() })
                        .unwrap()
                        .dense_matrix(&[])
                        .unwrap();
                    let err = (u - &exact).singular_values().iter().copied().fold(0.0, f64::max);
                    (steps as f64, err)
                })
                .collect();
            let s = slope(&pts);
            pass &= (s - target).abs() <= 0.25;
            parts.push(format!("LTFIM({n},{g},{hz}) order {order}: slope {s:.3}"));
        }
    }
    outcome(pass, parts.join("; "))
}

fn objective(f: f64) -> f64 {
    (1.0 - f) - f.ln()
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let families = [
        ("single", AnsatzSpec::single_qubit()),
        ("he(3,3)", AnsatzSpec::hardware_efficient(3, 3).unwrap()),
        ("he(4,2)", AnsatzSpec::hardware_efficient(4, 2).unwrap()),
        ("su-d(2)", AnsatzSpec::su_d(2).unwrap()),
        ("su-d(3)", AnsatzSpec::su_d(3).unwrap()),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, a) in &families {
        let (mut lib, mut own) = (0f64, 0f64);
        for _ in 0..20 {
            let p = a.random_init(rng.random());
            let target = StateVector::haar_random_with(a.num_qubits(), &mut rng);
            lib = lib.max(gradient_check(a, &p, &target).unwrap());
            let (_, g) = objective_gradient(a, &p, &target, &LearnConfig::default()).unwrap();
            let hstep = 1e-5;
            for i in 0..p.len() {
                let mut q = p.clone();
                q.theta[i] += hstep;
                let fp = objective(fidelity(a.prepare_trial(&q).unwrap().amps(), target.amps()));
                q.theta[i] -= 2.0 * hstep;
                let fm = objective(fidelity(a.prepare_trial(&q).unwrap().amps(), target.amps()));
                own = own.max((g[i] - (fp - fm) / (2.0 * hstep)).abs());
            }
        }
        pass &= lib <= 1e-6 && own <= 1e-6;
        parts.push(format!("{name} {lib:.1e}/{own:.1e}"));
    }
    outcome(
        pass,
        format!("gradient_check / own difference over 20 points: {} (oracle family has no parameters)", parts.join(", ")),
    )
}

/// Two-qubit reduced molecular Hamiltonian in the file format, and a
/// random four-qubit one with complex terms.
fn pauli_files(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let h2 = "# two-qubit reduced hydrogen-molecule Hamiltonian (Hartree)\n# qubits: 2\n\
              -1.052373245772859 II\n0.39793742484318045 ZI\n-0.39793742484318045 IZ\n\
              -0.01128010425623538 ZZ\n0.18093119978423156 XX\n";
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut big = String::from("# qubits: 4\n");
    for _ in 0..14 {
        big.push_str(&format!("{:.17e} {}\n", rng.random_range(-1.0..1.0), random_letters(4, &mut rng)));
    }
    let paths = vec![dir.join("h2.txt"), dir.join("random4.txt")];
    std::fs::write(&paths[0], h2).unwrap();
    std::fs::write(&paths[1], big).unwrap();
    paths
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for path in pauli_files(dir.path()) {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let model = ModelSpec::File { path: path.clone() };
        let setup = Setup::new(&RunConfig { model: model.clone(), ..RunConfig::default() }).unwrap();
        let h = setup.hamiltonian.clone();
        let e = eig(&h);
        let q = h.num_qubits();
        let a = trial_ansatz(q);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (mut p_err, mut d_err, mut ratio_err, mut arg_err, mut floor) = (0f64, 0f64, 0f64, 0f64, f64::INFINITY);
        for _ in 0..30 {
            let inst = Instance {
                h: h.clone(),
                e: eig(&h),
                a: a.clone(),
                p: a.random_init(rng.random()),
            };
            let trial = a.prepare_trial(&inst.p).unwrap();
            let cf = closed_forms(&e, trial.amps(), OMEGA);
            let diag = round_diagnostics(&trial, &spectrum(&h).unwrap(), OMEGA).unwrap();
            arg_err = arg_err.max((diag.w_arg - FRAC_PI_4).abs());
            for policy in [MeasurePolicy::K0, MeasurePolicy::K1] {
                let m = library_round(&inst, policy);
                p_err = p_err.max((m.p_k - 0.5).abs());
                let after: Vec<f64> = e.coeffs(m.system.amps()).iter().map(|g| g.norm_sqr()).collect();
                let delta = after[0] - cf.gsq[0];
                d_err = d_err.max((delta - 4.0 * cf.w.norm() * cf.chi * cf.xi[0] * cf.gsq[0]).abs());
                floor = floor.min(delta - cf.c_star * cf.gsq[0] * (1.0 - cf.gsq[0]));
                for j in 0..after.len() {
                    let law = 1.0 + 4.0 * cf.w.norm() * cf.chi * cf.xi[j];
                    ratio_err = ratio_err.max((after[j] - law * cf.gsq[j]).abs());
                }
            }
        }
        let learned = run_sweep(
            &RunConfig {
                model: model.clone(),
                ansatz: AnsatzChoice::he(2),
                learn: LearnConfig { n_max: 30, ..LearnConfig::default() },
                max_rounds: 30,
                ..RunConfig::default()
            },
            &[0, 1],
        )
        .unwrap();
        let (steps, lemma) = lemma_on_records(&learned.runs);
        let oracle = run_sweep(
            &RunConfig {
                model,
                ansatz: AnsatzChoice::Oracle,
                eps_h: 1e-13,
                max_rounds: 2000,
                ..RunConfig::default()
            },
            &[0, 1, 2],
        )
        .unwrap();
        let conv = oracle.runs.iter().all(|r| {
            let g = r.gamma_trajectory();
            g.iter().any(|&x| x >= 1.0 - 1e-6)
                && monotone_until_converged(&g)
                && check_recursion(&r.records, oracle.c_star).unwrap().violations.is_empty()
        });
        let ok = p_err <= 1e-10
            && d_err <= 1e-9
            && ratio_err <= 1e-9
            && arg_err <= 1e-9
            && floor >= -1e-12
            && lemma <= 1e-12
            && conv
            && learned.runs.iter().all(|r| r.error.is_none());
        pass &= ok;
        parts.push(format!(
            "{name}: p_k {p_err:.1e}, delta {d_err:.1e}, update law {ratio_err:.1e}, arg W {arg_err:.1e}, \
             lemma over {steps} steps {lemma:.1e}, oracle convergence {conv}"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn csv_bytes(runs: &[RunOutput]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_run_csv(&mut buf, runs).unwrap();
    buf
}

fn criterion_13() -> Outcome {
    let cfgs = [
        RunConfig {
            model: ModelSpec::Ltfim { n: 3, g: 1.0, h: 1.0 },
            ansatz: AnsatzChoice::he(2),
            learn: LearnConfig { n_max: 20, ..LearnConfig::default() },
            k_policy: KPolicy::Sample,
            max_rounds: 10,
            ..RunConfig::default()
        },
        RunConfig {
            model: ModelSpec::TwoLevel { alpha: 0.5, r: [0.2, 0.0, 0.3] },
            ansatz: AnsatzChoice::Single,
            learner: LearnerMode::Bloch { shots: Some(512) },
            k_policy: KPolicy::Sample,
            max_rounds: 15,
            ..RunConfig::default()
        },
        RunConfig {
            model: ModelSpec::Ltfim { n: 2, g: 1.0, h: 0.0 },
            ansatz: AnsatzChoice::he(1),
            warm_start: false,
            backend: qaae::driver::Backend::Trotter,
            max_rounds: 8,
            ..RunConfig::default()
        },
    ];
    let seeds = [3u64, 4, 5, 6];
    let mut pass = true;
    let mut bytes = 0;
    for cfg in &cfgs {
        let a = csv_bytes(&run_sweep(cfg, &seeds).unwrap().runs);
        let b = csv_bytes(&run_sweep(cfg, &seeds).unwrap().runs);
        let c = csv_bytes(&run_sweep_sequential(cfg, &seeds).unwrap().runs);
        pass &= a == b && a == c;
        bytes += a.len();
    }
    outcome(
        pass,
        format!("3 configurations x 4 seeds, repeated and sequential executions byte-identical ({bytes} bytes)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("ancilla probability", criterion_1),
        ("gain equality and floor", criterion_2),
        ("coefficient update law", criterion_3),
        ("W phase and zero sum", criterion_4),
        ("learning deviation bound", criterion_5),
        ("exact-learning convergence", criterion_6),
        ("two-level Bloch demo", criterion_7),
        ("LTFIM versus VQE", criterion_8),
        ("round depth bound", criterion_9),
        ("Trotter order scaling", criterion_10),
        ("gradient integrity", criterion_11),
        ("Pauli-file ingestion", criterion_12),
        ("CSV reproducibility", criterion_13),
    ];
    let only: Option<usize> = std::env::var("QAAE_CRITERION").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
