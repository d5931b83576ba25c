use serde::Serialize;

use super::{RunConfig, RunOutput, Setup};
use crate::error::{QaaeError, Result};
use crate::hamiltonian::NormRecord;
use crate::parallel::ordered_map;
use crate::vqe::{run_vqe_from, VqeConfig, VqeResult};

/// Final fidelity counted as a success in [`Aggregate::success_fraction`].
pub const SUCCESS_FIDELITY: f64 = 0.99;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundStat {
    pub round: usize,
    pub energy_error_mean: f64,
    pub energy_error_sd: f64,
    pub gamma_mean: f64,
    pub gamma_sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    /// Per-round statistics; runs that halted early contribute their final
    /// values to later rounds.
    pub rounds: Vec<RoundStat>,
    pub final_error_mean: f64,
    pub final_error_sd: f64,
    pub final_fidelity_mean: f64,
    pub success_fraction: f64,
    pub aborted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub runs: Vec<RunOutput>,
    pub aggregate: Aggregate,
    pub lambda0: Option<f64>,
    pub norm_record: Option<NormRecord>,
    pub c_star: Option<f64>,
    pub trotter_steps: Option<usize>,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn aborted_run(run_id: usize, seed: u64, e: QaaeError) -> RunOutput {
    RunOutput {
        run_id,
        seed,
        initial_energy: f64::NAN,
        initial_gamma: f64::NAN,
        records: Vec::new(),
        halted: false,
        preparations: 0,
        final_theta: Vec::new(),
        error: Some(e.to_string()),
    }
}

fn aggregate(runs: &[RunOutput], lambda0: Option<f64>) -> Aggregate {
    let l0 = lambda0.unwrap_or(f64::NAN);
    let ok: Vec<&RunOutput> = runs.iter().filter(|r| !r.initial_energy.is_nan()).collect();
    let len = ok.iter().map(|r| r.records.len()).max().unwrap_or(0);
    let at = |r: &RunOutput, i: usize| -> (f64, f64) {
        if i == 0 {
            return (r.initial_energy, r.initial_gamma);
        }
        let rec = &r.records[(i - 1).min(r.records.len().saturating_sub(1))];
        if r.records.is_empty() {
            (r.initial_energy, r.initial_gamma)
        } else {
            (rec.energy_norm, rec.gamma_next)
        }
    };
    let rounds = (0..=len)
        .map(|i| {
            let errs: Vec<f64> = ok.iter().map(|r| (at(r, i).0 - l0).abs()).collect();
            let gams: Vec<f64> = ok.iter().map(|r| at(r, i).1).collect();
            let (em, es) = mean_sd(&errs);
            let (gm, gs) = mean_sd(&gams);
            RoundStat {
                round: i,
                energy_error_mean: em,
                energy_error_sd: es,
                gamma_mean: gm,
                gamma_sd: gs,
            }
        })
        .collect();
    let finals: Vec<f64> = ok.iter().map(|r| (r.final_energy() - l0).abs()).collect();
    let fids: Vec<f64> = ok.iter().map(|r| r.final_gamma()).collect();
    let (fm, fs) = mean_sd(&finals);
    Aggregate {
        rounds,
        final_error_mean: fm,
        final_error_sd: fs,
        final_fidelity_mean: mean_sd(&fids).0,
        success_fraction: if ok.is_empty() {
            0.0
        } else {
            fids.iter().filter(|&&f| f >= SUCCESS_FIDELITY).count() as f64 / ok.len() as f64
        },
        aborted: runs.iter().filter(|r| r.error.is_some()).count(),
    }
}

/// One independent run per seed (concurrently under the `parallel`
/// feature), folded in seed order.
pub fn run_sweep(cfg: &RunConfig, seeds: &[u64]) -> Result<SweepResult> {
    if seeds.is_empty() {
        return Err(QaaeError::Config("seed list is empty".into()));
    }
    let setup = Setup::new(cfg)?;
    let indexed: Vec<(usize, u64)> = seeds.iter().copied().enumerate().collect();
    let runs = ordered_map(&indexed, |&(i, s)| setup.run(i, s).unwrap_or_else(|e| aborted_run(i, s, e)));
    Ok(sweep_result(&setup, runs))
}

/// As [`run_sweep`] with the loop forced onto the calling thread.
pub fn run_sweep_sequential(cfg: &RunConfig, seeds: &[u64]) -> Result<SweepResult> {
    if seeds.is_empty() {
        return Err(QaaeError::Config("seed list is empty".into()));
    }
    let setup = Setup::new(cfg)?;
    let runs = seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| setup.run(i, s).unwrap_or_else(|e| aborted_run(i, s, e)))
        .collect();
    Ok(sweep_result(&setup, runs))
}

fn sweep_result(setup: &Setup, runs: Vec<RunOutput>) -> SweepResult {
    SweepResult {
        aggregate: aggregate(&runs, setup.lambda0()),
        runs,
        lambda0: setup.lambda0(),
        norm_record: setup.hamiltonian.norm_record(),
        c_star: setup.c_star(),
        trotter_steps: setup.trotter_steps,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedComparison {
    pub seed: u64,
    pub qaae_error: f64,
    pub vqe_error: f64,
    pub qaae_preparations: u64,
    pub vqe_preparations: u64,
    pub qaae_rounds: usize,
    pub vqe_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub seeds: Vec<SeedComparison>,
    pub qaae_mean: f64,
    pub qaae_sd: f64,
    pub vqe_mean: f64,
    pub vqe_sd: f64,
    pub lambda0: f64,
}

/// Paired QAAE and VQE runs per seed from the same initial parameters. The
/// VQE run uses the same learning rate and halting threshold and is capped
/// at the number of trial preparations its QAAE partner consumed.
pub fn compare_with_vqe(cfg: &RunConfig, seeds: &[u64]) -> Result<(Comparison, Vec<RunOutput>, Vec<VqeResult>)> {
    if seeds.is_empty() {
        return Err(QaaeError::Config("seed list is empty".into()));
    }
    let setup = Setup::new(cfg)?;
    let l0 = setup
        .lambda0()
        .ok_or_else(|| QaaeError::Capability("comparison needs the exact ground energy".into()))?;
    let indexed: Vec<(usize, u64)> = seeds.iter().copied().enumerate().collect();
    let pairs = ordered_map(&indexed, |&(i, s)| -> Result<(RunOutput, VqeResult)> {
        let q = setup.run(i, s)?;
        let v = VqeConfig {
            learning_rate: cfg.learn.learning_rate,
            eps_h: cfg.eps_h,
            max_iters: usize::MAX,
            seed: s,
            grad_method: cfg.learn.grad_method,
            fd_step: cfg.learn.fd_step,
            max_preparations: Some(q.preparations),
        };
        let init = setup.initial_params(s)?;
        let r = run_vqe_from(&v, &setup.ansatz, &init, &setup.hamiltonian)?;
        Ok((q, r))
    });
    let mut runs = Vec::with_capacity(pairs.len());
    let mut vqes = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (q, v) = p?;
        runs.push(q);
        vqes.push(v);
    }
    let per_seed: Vec<SeedComparison> = runs
        .iter()
        .zip(&vqes)
        .map(|(q, v)| SeedComparison {
            seed: q.seed,
            qaae_error: (q.final_energy() - l0).abs(),
            vqe_error: (v.final_energy() - l0).abs(),
            qaae_preparations: q.preparations,
            vqe_preparations: v.preparations,
            qaae_rounds: q.records.len(),
            vqe_iters: v.records.len().saturating_sub(1),
        })
        .collect();
    let (qaae_mean, qaae_sd) = mean_sd(&per_seed.iter().map(|s| s.qaae_error).collect::<Vec<_>>());
    let (vqe_mean, vqe_sd) = mean_sd(&per_seed.iter().map(|s| s.vqe_error).collect::<Vec<_>>());
    Ok((
        Comparison {
            seeds: per_seed,
            qaae_mean,
            qaae_sd,
            vqe_mean,
            vqe_sd,
            lambda0: l0,
        },
        runs,
        vqes,
    ))
}
