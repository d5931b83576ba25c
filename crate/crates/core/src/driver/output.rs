use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::sweep::{Aggregate, Comparison};
use super::{RunConfig, RunOutput, SweepResult};
use crate::error::{QaaeError, Result};
use crate::hamiltonian::NormRecord;
use crate::vqe::VqeResult;

pub const CSV_HEADER: [&str; 14] = [
    "run_id",
    "seed",
    "round",
    "k",
    "p_k",
    "gamma_before",
    "gamma_after",
    "delta",
    "delta_predicted",
    "eps_r",
    "energy_norm",
    "energy_phys",
    "learn_steps",
    "halted",
];

pub const VQE_CSV_HEADER: [&str; 7] = ["run_id", "seed", "iter", "energy_norm", "energy_phys", "grad_norm", "halted"];

/// Scientific notation with 17 significant digits, enough to round-trip
/// any `f64`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn csv_err(e: csv::Error) -> QaaeError {
    QaaeError::Io(e.to_string())
}

pub fn write_run_csv<W: Write>(w: W, runs: &[RunOutput]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for run in runs {
        for r in &run.records {
            out.write_record([
                run.run_id.to_string(),
                run.seed.to_string(),
                r.round.to_string(),
                r.k.to_string(),
                fmt_real(r.p_k),
                fmt_real(r.gamma_before),
                fmt_real(r.gamma_after),
                fmt_real(r.delta),
                fmt_real(r.delta_predicted),
                fmt_real(r.eps_r),
                fmt_real(r.energy_norm),
                fmt_real(r.energy_phys),
                r.learn_steps.to_string(),
                r.halted.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One VQE run per `(run_id, seed, result)`.
pub fn write_vqe_csv<W: Write>(w: W, runs: &[(usize, u64, &VqeResult)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(VQE_CSV_HEADER).map_err(csv_err)?;
    for (id, seed, res) in runs {
        for r in &res.records {
            out.write_record([
                id.to_string(),
                seed.to_string(),
                r.iter.to_string(),
                fmt_real(r.energy_norm),
                fmt_real(r.energy_phys),
                fmt_real(r.grad_norm),
                r.halted.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON with every float written through [`fmt_real`].
struct RealFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident $(($arg:ident: $ty:ty))?),* $(,)?) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)?) -> io::Result<()> {
            self.0.$name(w $(, $arg)?)
        })*
    };
}

impl Formatter for RealFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_real(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    delegate!(
        begin_array,
        end_array,
        begin_array_value(first: bool),
        end_array_value,
        begin_object,
        end_object,
        begin_object_key(first: bool),
        begin_object_value,
        end_object_value,
    );
}

pub fn write_json<W: Write, T: Serialize>(w: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(w, RealFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| QaaeError::Io(e.to_string()))?;
    let mut w = ser.into_inner();
    w.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct RunSummary<'a> {
    run_id: usize,
    seed: u64,
    rounds: usize,
    halted: bool,
    preparations: u64,
    initial_energy: f64,
    final_energy: f64,
    final_energy_error: Option<f64>,
    initial_gamma: f64,
    final_gamma: f64,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a RunConfig,
    seeds: Vec<u64>,
    norm_record: Option<NormRecord>,
    lambda0_norm: Option<f64>,
    lambda0_phys: Option<f64>,
    c_star: Option<f64>,
    trotter_steps: Option<usize>,
    runs: Vec<RunSummary<'a>>,
    aggregate: &'a Aggregate,
    #[serde(skip_serializing_if = "Option::is_none")]
    vqe_comparison: Option<&'a Comparison>,
}

pub fn write_summary_json<W: Write>(
    w: W,
    cfg: &RunConfig,
    sweep: &SweepResult,
    comparison: Option<&Comparison>,
) -> Result<()> {
    let l0 = sweep.lambda0;
    let runs = sweep
        .runs
        .iter()
        .map(|r| RunSummary {
            run_id: r.run_id,
            seed: r.seed,
            rounds: r.records.len(),
            halted: r.halted,
            preparations: r.preparations,
            initial_energy: r.initial_energy,
            final_energy: r.final_energy(),
            final_energy_error: l0.map(|l| (r.final_energy() - l).abs()),
            initial_gamma: r.initial_gamma,
            final_gamma: r.final_gamma(),
            error: r.error.as_deref(),
        })
        .collect();
    let summary = Summary {
        config: cfg,
        seeds: sweep.runs.iter().map(|r| r.seed).collect(),
        norm_record: sweep.norm_record,
        lambda0_norm: l0,
        lambda0_phys: l0.map(|l| sweep.norm_record.map_or(l, |n| n.to_physical(l))),
        c_star: sweep.c_star,
        trotter_steps: sweep.trotter_steps,
        runs,
        aggregate: &sweep.aggregate,
        vqe_comparison: comparison,
    };
    write_json(w, &summary)
}
