//! Quick self-check of the core invariants, sized to finish in seconds.

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{check_recursion, depth_for, run_sweep, write_run_csv, AnsatzChoice, InitSpec, ModelSpec, Normalization, RunConfig};
use crate::amplifier::{amplify_state, ground_overlap, round_diagnostics};
use crate::ansatz::AnsatzSpec;
use crate::error::Result;
use crate::evolution::{build_controlled_trotter, controlled_evolution_exact, trotter_error, EvolutionConfig};
use crate::hamiltonian::{build_ltfim, random_pauli_hamiltonian, spectrum, PauliHamiltonian, Spectrum};
use crate::learner::{gradient_check, learn_deviation};
use crate::simulator::{MeasurePolicy, StateVector};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// A random nondegenerate Hamiltonian on `q` qubits mapped into the default
/// window.
pub fn random_instance<R: Rng>(q: usize, rng: &mut R) -> Result<(PauliHamiltonian, Arc<Spectrum>)> {
    loop {
        let h = random_pauli_hamiltonian(q, 2 * q + 2, rng)?;
        if h.terms().iter().all(|t| t.is_identity()) {
            continue;
        }
        let h = h.normalize_affine(0.05, 0.95)?;
        let spec = spectrum(&h)?;
        if !spec.degenerate && spec.eigenvalues[1] - spec.eigenvalues[0] > 1e-6 {
            return Ok((h, Arc::new(spec)));
        }
    }
}

fn round_laws(instances: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut p_err, mut d_err, mut arg_err, mut floor_gap) = (0f64, 0f64, 0f64, f64::INFINITY);
    for i in 0..instances {
        let q = 1 + i % 4;
        let (_, spec) = random_instance(q, &mut rng)?;
        let u = controlled_evolution_exact(Arc::clone(&spec), FRAC_PI_4)?;
        let trial = StateVector::haar_random_with(q, &mut rng);
        let d = round_diagnostics(&trial, &spec, FRAC_PI_4)?;
        arg_err = arg_err.max((d.w_arg - FRAC_PI_4).abs());
        for policy in [MeasurePolicy::K0, MeasurePolicy::K1] {
            let m = amplify_state(&trial, &u, policy)?;
            p_err = p_err.max((m.p_k - 0.5).abs());
            let delta = ground_overlap(&m.system, &spec)? - d.gamma();
            d_err = d_err.max((delta - d.delta_predicted).abs());
            floor_gap = floor_gap.min(delta - d.gain_floor());
        }
    }
    Ok((
        p_err <= 1e-10 && d_err <= 1e-9 && arg_err <= 1e-9 && floor_gap >= -1e-12,
        format!("max |p_k - 1/2| = {p_err:.2e}, max |delta - predicted| = {d_err:.2e}, max |arg W - pi/4| = {arg_err:.2e}, min(delta - floor) = {floor_gap:.2e}"),
    ))
}

fn learning_lemma(pairs: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..pairs {
        let q = 1 + i % 3;
        let (_, spec) = random_instance(q, &mut rng)?;
        let a = StateVector::haar_random_with(q, &mut rng);
        let b = StateVector::haar_random_with(q, &mut rng);
        learn_deviation(&a, &b, &spec)?;
    }
    Ok((true, format!("{pairs} random pairs within the trace-distance bound")))
}

fn oracle_convergence() -> Result<(bool, String)> {
    let cfg = RunConfig {
        model: ModelSpec::TwoLevel { alpha: 0.5, r: [0.25, 0.0, 0.0] },
        normalization: Normalization::AsIs,
        ansatz: AnsatzChoice::Oracle,
        init: InitSpec::GroundOverlap { gamma: 0.05 },
        ..Default::default()
    };
    let s = run_sweep(&cfg, &[0])?;
    let run = &s.runs[0];
    let audit = check_recursion(&run.records, s.c_star)?;
    let g = run.final_gamma();
    Ok((
        g >= 1.0 - 1e-6 && audit.violations.is_empty() && audit.strictly_increasing,
        format!("final overlap {g:.9} after {} rounds, {} recursion violations", run.records.len(), audit.violations.len()),
    ))
}

fn gradients() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let families = [
        AnsatzSpec::single_qubit(),
        AnsatzSpec::hardware_efficient(3, 2)?,
        AnsatzSpec::su_d(2)?,
    ];
    let mut worst: f64 = 0.0;
    for a in &families {
        for _ in 0..5 {
            let p = a.random_init(rng.random());
            let target = StateVector::haar_random_with(a.num_qubits(), &mut rng);
            worst = worst.max(gradient_check(a, &p, &target)?);
        }
    }
    Ok((worst <= 1e-6, format!("largest gradient discrepancy {worst:.2e}")))
}

fn depth_bounds() -> Result<(bool, String)> {
    let mut cases = 0;
    let mut failed = Vec::new();
    for q in 2..=4 {
        let h = build_ltfim(q, 1.0, 1.0)?.normalize_affine(0.05, 0.95)?;
        for layers in 1..=2 {
            let a = AnsatzSpec::hardware_efficient(q, layers)?;
            let p = a.random_init(0);
            for steps in [1, 3] {
                for order in [1, 2] {
                    let cfg = EvolutionConfig { order, steps, ..Default::default() };
                    let u = build_controlled_trotter(&h, &cfg)?;
                    cases += 1;
                    if !depth_for(&a, &p, &u)?.bound_ok {
                        failed.push((q, layers, steps, order));
                    }
                }
            }
        }
    }
    Ok((failed.is_empty(), format!("{cases} compiled rounds, failures {failed:?}")))
}

/// Least-squares slope of `log err` against `log steps`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn trotter_orders() -> Result<(bool, String)> {
    let h = build_ltfim(2, 1.0, 0.0)?.normalize_affine(0.05, 0.95)?;
    let mut slopes = [0.0; 2];
    for (i, order) in [1u8, 2].into_iter().enumerate() {
        let pts = [4usize, 8, 16, 32]
            .iter()
            .map(|&steps| {
                let cfg = EvolutionConfig { order, steps, ..Default::default() };
                trotter_error(&h, &cfg).map(|e| (steps as f64, e))
            })
            .collect::<Result<Vec<_>>>()?;
        slopes[i] = loglog_slope(&pts);
    }
    Ok((
        (slopes[0] + 1.0).abs() <= 0.25 && (slopes[1] + 2.0).abs() <= 0.25,
        format!("slopes {:.3} (order 1), {:.3} (order 2)", slopes[0], slopes[1]),
    ))
}

fn reproducibility() -> Result<(bool, String)> {
    let cfg = RunConfig {
        model: ModelSpec::Ltfim { n: 2, g: 1.0, h: 0.5 },
        ansatz: AnsatzChoice::he(1),
        k_policy: super::KPolicy::Sample,
        max_rounds: 5,
        ..Default::default()
    };
    let csv = || -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        write_run_csv(&mut buf, &run_sweep(&cfg, &[3, 4])?.runs)?;
        Ok(buf)
    };
    let (a, b) = (csv()?, csv()?);
    Ok((a == b, format!("{} bytes, identical = {}", a.len(), a == b)))
}

/// Runs every check and returns them in a fixed order.
pub fn verify_all() -> Vec<Check> {
    vec![
        check("ancilla probability, gain law, W phase", round_laws(40)),
        check("learning lemma", learning_lemma(200)),
        check("oracle convergence and recursion audit", oracle_convergence()),
        check("gradient integrity", gradients()),
        check("round depth bound", depth_bounds()),
        check("Trotter order scaling", trotter_orders()),
        check("CSV reproducibility", reproducibility()),
    ]
}
