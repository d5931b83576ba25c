use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qaae::ansatz::HeLayout;
use qaae::driver::{
    compare_with_vqe, depth_report, run_sweep, verify_all, write_json, write_run_csv, write_summary_json,
    write_vqe_csv, AnsatzChoice, Backend, Halting, InitSpec, KPolicy, LearnerMode, ModelSpec, Normalization,
    RunConfig, Setup,
};
use qaae::evolution::EvolutionConfig;
use qaae::learner::{GradMethod, LearnConfig};
use qaae::vqe::{run_vqe_from, VqeConfig};

#[derive(Parser)]
#[command(name = "qaae", version, about = "Amplitude-amplification ground-state eigensolver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run for a single seed.
    Run {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "PREFIX")]
        out: PathBuf,
    },
    /// Independent runs over a seed range.
    Sweep {
        /// Inclusive range `S0..S1`.
        #[arg(long, value_parser = parse_seeds)]
        seeds: SeedRange,
        #[command(flatten)]
        run: RunArgs,
        /// Also run the matched-budget VQE baseline per seed.
        #[arg(long)]
        compare_vqe: bool,
        #[arg(long, value_name = "PREFIX")]
        out: PathBuf,
    },
    /// Energy-gradient baseline on the same ansatz and halting rule.
    Vqe {
        #[arg(long, value_parser = parse_seeds)]
        seeds: Option<SeedRange>,
        #[command(flatten)]
        run: RunArgs,
        /// Cap on trial-state preparations per run.
        #[arg(long)]
        max_preps: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, value_name = "PREFIX")]
        out: PathBuf,
    },
    /// Runs the built-in invariant suite.
    Verify,
    /// Circuit depths of one compiled round (Trotter backend).
    Depth {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    TwoLevel,
    Ltfim,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnsatzKind {
    Single,
    He,
    Sud,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Window,
    LtfimFixed,
    AsIs,
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerKind {
    Gradient,
    Bloch,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradKind {
    Shift,
    Fd,
}

#[derive(Clone, Copy, ValueEnum)]
enum HaltKind {
    Energy,
    Overlap,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "ltfim")]
    model: ModelKind,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.25)]
    rx: f64,
    #[arg(long, default_value_t = 0.0)]
    ry: f64,
    #[arg(long, default_value_t = 0.0)]
    rz: f64,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    g: f64,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, required_if_eq("model", "file"))]
    path: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "window")]
    norm: NormKind,
    #[arg(long, value_enum, default_value = "he")]
    ansatz: AnsatzKind,
    #[arg(long, default_value_t = 3)]
    layers: usize,
    #[arg(long, default_value_t = 100)]
    nmax: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, value_enum, default_value = "shift")]
    grad: GradKind,
    #[arg(long, value_enum, default_value = "gradient")]
    learner: LearnerKind,
    /// Shots per Bloch component; exact expectations when omitted.
    #[arg(long)]
    shots: Option<u32>,
    /// Start each round's learning from a fresh random point.
    #[arg(long)]
    cold_start: bool,
    #[arg(long, default_value_t = 1e-6)]
    eps_h: f64,
    #[arg(long, value_enum, default_value = "energy")]
    halting: HaltKind,
    /// Threshold for `--halting overlap`.
    #[arg(long, default_value_t = 1e-8)]
    overlap_eps: f64,
    #[arg(long, default_value_t = 10_000)]
    max_rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "k0")]
    k_policy: KPolicyArg,
    #[arg(long, value_enum, default_value = "exact")]
    backend: BackendArg,
    #[arg(long, default_value_t = 2)]
    order: u8,
    #[arg(long, default_value_t = 1)]
    steps: usize,
    /// Choose the Trotter step count from this target accuracy instead.
    #[arg(long)]
    trotter_eps: Option<f64>,
    /// Start from a trial with this ground overlap (single and oracle
    /// families).
    #[arg(long)]
    init_overlap: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KPolicyArg {
    K0,
    K1,
    Sample,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Trotter,
}

#[derive(Clone, Copy)]
struct SeedRange(u64, u64);

impl SeedRange {
    fn seeds(self) -> Vec<u64> {
        (self.0..=self.1).collect()
    }
}

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected S0..S1, got {s:?}"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("{b:?}: {e}"))?;
    if b < a {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(SeedRange(a, b))
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let model = match self.model {
            ModelKind::TwoLevel => ModelSpec::TwoLevel {
                alpha: self.alpha,
                r: [self.rx, self.ry, self.rz],
            },
            ModelKind::Ltfim => ModelSpec::Ltfim { n: self.n, g: self.g, h: self.h },
            ModelKind::File => ModelSpec::File {
                path: self.path.clone().context("--model file needs --path")?,
            },
        };
        let normalization = match self.norm {
            NormKind::Window => Normalization::default(),
            NormKind::LtfimFixed => Normalization::LtfimFixed,
            NormKind::AsIs => Normalization::AsIs,
        };
        let ansatz = match self.ansatz {
            AnsatzKind::Single => AnsatzChoice::Single,
            AnsatzKind::He => AnsatzChoice::He {
                layout: HeLayout::new(self.layers),
            },
            AnsatzKind::Sud => AnsatzChoice::Sud,
            AnsatzKind::Oracle => AnsatzChoice::Oracle,
        };
        Ok(RunConfig {
            model,
            normalization,
            ansatz,
            learn: LearnConfig {
                n_max: self.nmax,
                learning_rate: self.lr,
                grad_method: match self.grad {
                    GradKind::Shift => GradMethod::ParameterShift,
                    GradKind::Fd => GradMethod::CentralFd,
                },
                ..LearnConfig::default()
            },
            learner: match self.learner {
                LearnerKind::Gradient => LearnerMode::Gradient,
                LearnerKind::Bloch => LearnerMode::Bloch { shots: self.shots },
            },
            early_n_max: None,
            warm_start: !self.cold_start,
            eps_h: self.eps_h,
            halting: match self.halting {
                HaltKind::Energy => Halting::Energy,
                HaltKind::Overlap => Halting::Overlap {
                    threshold: self.overlap_eps,
                },
            },
            max_rounds: self.max_rounds,
            seed: self.seed,
            k_policy: match self.k_policy {
                KPolicyArg::K0 => KPolicy::K0,
                KPolicyArg::K1 => KPolicy::K1,
                KPolicyArg::Sample => KPolicy::Sample,
            },
            backend: match self.backend {
                BackendArg::Exact => Backend::Exact,
                BackendArg::Trotter => Backend::Trotter,
            },
            evolution: EvolutionConfig {
                order: self.order,
                steps: self.steps,
                target_eps: self.trotter_eps,
                ..EvolutionConfig::default()
            },
            init: match self.init_overlap {
                Some(gamma) => InitSpec::GroundOverlap { gamma },
                None => InitSpec::Random,
            },
        })
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn sweep(cfg: &RunConfig, seeds: &[u64], compare: bool, out: &Path) -> Result<()> {
    let result = run_sweep(cfg, seeds)?;
    let comparison = if compare {
        let (c, _, vqes) = compare_with_vqe(cfg, seeds)?;
        let rows: Vec<_> = seeds.iter().zip(&vqes).enumerate().map(|(i, (&s, v))| (i, s, v)).collect();
        write_vqe_csv(create(&with_ext(out, "_vqe.csv"))?, &rows)?;
        Some(c)
    } else {
        None
    };
    write_run_csv(create(&with_ext(out, ".csv"))?, &result.runs)?;
    write_summary_json(create(&with_ext(out, ".json"))?, cfg, &result, comparison.as_ref())?;
    let agg = &result.aggregate;
    eprintln!(
        "{} run(s): final energy error {:.3e} (sd {:.3e}), success fraction {:.3}, {} aborted",
        result.runs.len(),
        agg.final_error_mean,
        agg.final_error_sd,
        agg.success_fraction,
        agg.aborted
    );
    for r in result.runs.iter().filter(|r| r.error.is_some()) {
        eprintln!("seed {}: {}", r.seed, r.error.as_deref().unwrap_or_default());
    }
    if let Some(c) = comparison {
        eprintln!(
            "VQE at matched budget: final energy error {:.3e} (sd {:.3e})",
            c.vqe_mean, c.vqe_sd
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct VqeRunSummary {
    run_id: usize,
    seed: u64,
    iters: usize,
    halted: bool,
    preparations: u64,
    final_energy: f64,
    final_energy_error: Option<f64>,
}

#[derive(Serialize)]
struct VqeSummary<'a> {
    config: &'a RunConfig,
    vqe: VqeConfig,
    lambda0_norm: Option<f64>,
    runs: Vec<VqeRunSummary>,
}

fn vqe(cfg: &RunConfig, seeds: &[u64], max_preps: Option<u64>, max_iters: usize, out: &Path) -> Result<()> {
    let setup = Setup::new(cfg)?;
    let base = VqeConfig {
        learning_rate: cfg.learn.learning_rate,
        eps_h: cfg.eps_h,
        max_iters,
        seed: cfg.seed,
        grad_method: cfg.learn.grad_method,
        fd_step: cfg.learn.fd_step,
        max_preparations: max_preps,
    };
    let results = seeds
        .iter()
        .map(|&s| {
            let v = VqeConfig { seed: s, ..base };
            run_vqe_from(&v, &setup.ansatz, &setup.initial_params(s)?, &setup.hamiltonian)
        })
        .collect::<qaae::Result<Vec<_>>>()?;
    let rows: Vec<_> = seeds.iter().zip(&results).enumerate().map(|(i, (&s, r))| (i, s, r)).collect();
    write_vqe_csv(create(&with_ext(out, ".csv"))?, &rows)?;
    let l0 = setup.lambda0();
    let summary = VqeSummary {
        config: cfg,
        vqe: base,
        lambda0_norm: l0,
        runs: rows
            .iter()
            .map(|(i, s, r)| VqeRunSummary {
                run_id: *i,
                seed: *s,
                iters: r.records.len().saturating_sub(1),
                halted: r.halted,
                preparations: r.preparations,
                final_energy: r.final_energy(),
                final_energy_error: l0.map(|l| (r.final_energy() - l).abs()),
            })
            .collect(),
    };
    write_json(create(&with_ext(out, ".json"))?, &summary)?;
    Ok(())
}

fn verify() -> Result<bool> {
    let checks = verify_all();
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { run, out } => run.config().and_then(|cfg| sweep(&cfg, &[cfg.seed], false, &out)).map(|_| true),
        Command::Sweep { seeds, run, compare_vqe, out } => run
            .config()
            .and_then(|cfg| sweep(&cfg, &seeds.seeds(), compare_vqe, &out))
            .map(|_| true),
        Command::Vqe { seeds, run, max_preps, max_iters, out } => run
            .config()
            .and_then(|cfg| {
                let seeds = seeds.map_or_else(|| vec![cfg.seed], SeedRange::seeds);
                vqe(&cfg, &seeds, max_preps, max_iters, &out)
            })
            .map(|_| true),
        Command::Verify => verify(),
        Command::Depth { run } => run.config().and_then(|cfg| {
            let d = depth_report(&cfg)?;
            println!("D_A = {}", d.d_a);
            println!("D_prep = {}", d.d_prep);
            println!("D_R = {}", d.d_r);
            println!("D_U = {}", d.d_u);
            println!("D_round = {}", d.d_round);
            println!("bound_ok = {}", d.bound_ok);
            if !d.bound_ok {
                bail!("depth bound violated");
            }
            Ok(true)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
