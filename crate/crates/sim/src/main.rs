use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use nbldpc::config::{parse_spec_unchecked, ConfigError, EmulationSpec, SEED_ENV};
use nbldpc::formats;
use nbldpc::harness::{self, CellRecord, HarnessError};
use nbldpc_core::cycles::frame_report;
use nbldpc_core::{build_regular_2dc, expand_qc, Field, ParityCheckMatrix};
use serde_json::json;

#[derive(Parser)]
#[command(name = "nbldpc", version, about = "Nonbinary LDPC decoder emulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Flat `key = value` run specification.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set snr_db=3.0,4.4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every SNR point of a single configuration.
    Simulate(SpecArgs),
    /// Run the full parameter grid, resuming from `checkpoint` if set.
    Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        /// Also report coding gain at `target_ber`; exits 3 if a curve does
        /// not cross it.
        #[arg(long)]
        gain: bool,
    },
    /// Cycle-model report for every configuration, without decoding.
    Cycles(SpecArgs),
    /// Parse a code and report its degrees and rate.
    ValidateCode {
        #[arg(long, conflicts_with_all = ["qc", "config"])]
        alist: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        qc: Option<PathBuf>,
        /// Base rows kept from a QC base matrix.
        #[arg(long, requires = "qc")]
        rows: Option<usize>,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Write a generated or QC-expanded code as an alist file.
    GenCode {
        #[arg(long)]
        out: PathBuf,
        /// Columns of a generated (2, d_c)-regular code.
        #[arg(long, conflicts_with = "qc", required_unless_present = "qc")]
        n: Option<usize>,
        #[arg(long, default_value_t = 4)]
        d_c: usize,
        #[arg(long, default_value_t = 32)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        gf_poly: Option<u32>,
        #[arg(long)]
        qc: Option<PathBuf>,
        #[arg(long, requires = "qc")]
        rows: Option<usize>,
    },
}

/// Exit status classes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
    Bracket(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Bracket(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) | Failure::Bracket(e) => e,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_)
            | HarnessError::Format(_)
            | HarnessError::FieldMismatch { .. }
            | HarnessError::Grid(_) => Failure::Config(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.into())
    }
}

fn load_spec(args: &SpecArgs) -> Result<EmulationSpec, Failure> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Config)?;
            parse_spec_unchecked(&text)?
        }
        None => EmulationSpec::default(),
    };
    spec.apply_env_seed(std::env::var(SEED_ENV).ok().as_deref())?;
    spec.apply_overrides(&args.overrides)?;
    spec.validate()?;
    Ok(spec)
}

fn single_valued(spec: &EmulationSpec) -> Result<(), ConfigError> {
    let axes = [
        ("q", spec.q.len()),
        ("algorithm", spec.algorithm.len()),
        ("n_m", spec.n_m.len()),
        ("quant_bits", spec.quant_bits.len()),
        ("qc_rows", spec.qc_rows.len()),
    ];
    for (key, len) in axes {
        if len > 1 {
            return Err(ConfigError::Constraint {
                key,
                constraint: "simulate takes one value; use `sweep` for grids".into(),
            });
        }
    }
    Ok(())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn write_outputs(spec: &EmulationSpec, records: &[CellRecord]) -> Result<(), Failure> {
    let rows: Vec<_> = records.iter().map(|r| r.row.clone()).collect();
    if let Some(path) = &spec.out_csv {
        let f = File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(Failure::Runtime)?;
        harness::write_csv(rows.iter().cloned(), BufWriter::new(f))?;
    }
    if let Some(dir) = &spec.plot_dir {
        harness::write_plots(&rows, dir)?;
    }
    Ok(())
}

fn progress(rec: &CellRecord) {
    let r = &rec.row;
    eprintln!(
        "{} {} q={} n_m={} Q={} snr={} dB: frames={} ber={:.3e} fer={:.3e}",
        r.code_id,
        r.algorithm,
        r.q,
        r.n_m,
        r.quant_bits,
        r.snr_db,
        r.frames,
        r.ber,
        r.fer
    );
}

fn print_json(value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(runtime)?;
    writeln!(out).map_err(runtime)
}

fn simulate(args: &SpecArgs) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    single_valued(&spec)?;
    let records = harness::sweep(&spec, None, progress)?;
    write_outputs(&spec, &records)?;
    print_json(&json!({ "cells": records }))
}

fn sweep(args: &SpecArgs, gain: bool) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let records = harness::sweep(&spec, spec.checkpoint.as_deref(), progress)?;
    write_outputs(&spec, &records)?;
    if !gain {
        return print_json(&json!({ "cells": records }));
    }
    let rows: Vec<_> = records.iter().map(|r| r.row.clone()).collect();
    let gains = harness::coding_gain(&rows, spec.target_ber);
    print_json(&json!({ "cells": records, "coding_gain": gains }))?;
    match gains.iter().find(|g| g.gain_db.is_none()) {
        Some(g) => Err(Failure::Bracket(anyhow!(
            "{}: {}",
            g.curve,
            g.error.as_deref().unwrap_or("not bracketed")
        ))),
        None => Ok(()),
    }
}

fn cycles(args: &SpecArgs) -> Result<(), Failure> {
    let spec = load_spec(args)?;
    let codes = harness::load_codes(&spec)?;
    let cfg = harness::cycle_config(&spec);
    let mut reports = Vec::new();
    eprintln!(
        "{:<20} {:>4} {:>4} {:>3} {:>5} {:>5} {:>7} {:>7} {:>10} {:>12}",
        "code", "alg", "q", "Q", "n_m", "prior", "row", "iter", "frame", "Mb/s"
    );
    for code in &codes {
        for &alg in &spec.algorithm {
            for &n_m in &spec.n_m {
                for &qb in &spec.quant_bits {
                    let dec = harness::decoder_config(&spec, alg, n_m, qb);
                    let params = harness::cycle_params(code, &dec);
                    let r = frame_report(&params, &cfg);
                    eprintln!(
                        "{:<20} {:>4} {:>4} {:>3} {:>5} {:>5} {:>7} {:>7} {:>10} {:>12.4}",
                        code.id,
                        alg.name(),
                        params.q,
                        qb,
                        n_m,
                        r.prior_cycles,
                        r.row_cycles,
                        r.iter_cycles,
                        r.frame_cycles,
                        r.throughput_mbps
                    );
                    reports.push(json!({
                        "code_id": code.id,
                        "algorithm": alg,
                        "q": params.q,
                        "n": params.n,
                        "m": params.m,
                        "d_c": params.d_c,
                        "n_m": n_m,
                        "Q": qb,
                        "ls_vn": params.ls_vn,
                        "ls_cn": params.ls_cn,
                        "L": params.max_iter,
                        "info_bits": params.info_bits,
                        "report": r,
                    }));
                }
            }
        }
    }
    print_json(&json!({ "cycle_config": cfg, "reports": reports }))
}

fn format_err(e: formats::FormatError) -> Failure {
    Failure::Config(e.into())
}

fn load_qc_code(path: &Path, rows: Option<usize>) -> Result<ParityCheckMatrix, Failure> {
    let base = formats::load_qc(path).map_err(format_err)?;
    let base = match rows {
        Some(r) if r == 0 || r > base.rows_b() => {
            return Err(Failure::Config(anyhow!("--rows must be in 1..={}", base.rows_b())))
        }
        Some(r) => base.truncate_rows(r),
        None => base,
    };
    let field = Field::with_order(base.q()).map_err(|e| Failure::Config(e.into()))?;
    expand_qc(&base, &field).map_err(|e| Failure::Config(e.into()))
}

/// One-line structural summary, e.g. `regular (2,4), rate 1/2`.
fn describe(h: &ParityCheckMatrix) -> String {
    match h.regularity() {
        Some((dv, dc)) => format!("regular ({dv},{dc}), rate {}", h.rate()),
        None => {
            let (dv, dc) = h.degrees();
            let span = |v: &[usize]| {
                let lo = v.iter().min().copied().unwrap_or(0);
                let hi = v.iter().max().copied().unwrap_or(0);
                format!("{lo}..{hi}")
            };
            format!(
                "irregular (column degrees {}, row degrees {}), rate {}",
                span(&dv),
                span(&dc),
                h.rate()
            )
        }
    }
}

fn validate_code(
    alist: Option<&Path>,
    qc: Option<&Path>,
    rows: Option<usize>,
    config: Option<&Path>,
    as_json: bool,
) -> Result<(), Failure> {
    let codes: Vec<(String, ParityCheckMatrix)> = match (alist, qc, config) {
        (Some(p), _, _) => vec![(
            p.display().to_string(),
            formats::load_alist(p).map_err(format_err)?,
        )],
        (_, Some(p), _) => vec![(p.display().to_string(), load_qc_code(p, rows)?)],
        (_, _, config) => {
            let spec = load_spec(&SpecArgs {
                config: config.map(Path::to_path_buf),
                overrides: Vec::new(),
            })?;
            harness::load_codes(&spec)?
                .into_iter()
                .map(|c| (c.id, c.h))
                .collect()
        }
    };
    let mut out = io::stdout().lock();
    for (name, h) in codes {
        let summary = describe(&h);
        if as_json {
            let (dv, dc) = h.degrees();
            let v = json!({
                "code": name,
                "n": h.n(),
                "m": h.m(),
                "q": h.q(),
                "regularity": h.regularity(),
                "column_degrees": dv,
                "row_degrees": dc,
                "rate": h.rate().to_string(),
                "summary": summary,
            });
            writeln!(out, "{v}").map_err(runtime)?;
        } else {
            writeln!(out, "{summary}").map_err(runtime)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn gen_code(
    out: &Path,
    n: Option<usize>,
    d_c: usize,
    q: usize,
    seed: u64,
    gf_poly: Option<u32>,
    qc: Option<&Path>,
    rows: Option<usize>,
) -> Result<(), Failure> {
    let h = match (qc, n) {
        (Some(path), _) => load_qc_code(path, rows)?,
        (None, Some(n)) => {
            if !q.is_power_of_two() {
                return Err(Failure::Config(anyhow!("q = {q} is not a power of two")));
            }
            let field = Field::new(q.trailing_zeros(), gf_poly).map_err(|e| Failure::Config(e.into()))?;
            build_regular_2dc(n, d_c, &field, seed).map_err(|e| Failure::Config(e.into()))?
        }
        (None, None) => return Err(Failure::Config(anyhow!("give --n or --qc"))),
    };
    fs::write(out, formats::write_alist(&h))
        .with_context(|| format!("writing {}", out.display()))
        .map_err(Failure::Runtime)?;
    eprintln!("{}: {}", out.display(), describe(&h));
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Sweep { spec, gain } => sweep(&spec, gain),
        Command::Cycles(args) => cycles(&args),
        Command::ValidateCode {
            alist,
            qc,
            rows,
            config,
            json,
        } => validate_code(alist.as_deref(), qc.as_deref(), rows, config.as_deref(), json),
        Command::GenCode {
            out,
            n,
            d_c,
            q,
            seed,
            gf_poly,
            qc,
            rows,
        } => gen_code(&out, n, d_c, q, seed, gf_poly, qc.as_deref(), rows),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
