//! Monte-Carlo frame loop, operating points and parameter sweeps.
//!
//! Every frame draws its noise from a stream seeded by
//! `(master_seed, frame_index)` alone. Frames run in fixed-size batches on a
//! worker pool and are folded in index order, so results, including where
//! early stopping cuts the run, do not depend on the number of workers.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nbldpc_core::cycles::frame_report;
use nbldpc_core::seed::frame_rng;
use nbldpc_core::stats::{coding_gain as gain_from_curve, wilson_interval, Z95};
use nbldpc_core::{
    build_regular_2dc, expand_qc, generate_priors, Algorithm, ChannelConfig, CycleConfig, CycleParams,
    CycleReport, Decoder, DecoderConfig, Error as CoreError, Field, ParityCheckMatrix, Symbol,
};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CodeSource, ConfigError, EmulationSpec};
use crate::formats::{self, FormatError};

/// Frames dispatched to the pool at a time.
pub const BATCH: u64 = 256;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("code file has q = {file}, run asks for q = {requested}")]
    FieldMismatch { file: usize, requested: usize },
    #[error("incompatible grid: {0}")]
    Grid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("checkpoint {path}, line {line}: {source}")]
    Checkpoint {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// A parity-check matrix with its field and a label for result tables.
#[derive(Debug, Clone)]
pub struct Code {
    pub id: String,
    pub field: Field,
    pub h: ParityCheckMatrix,
}

impl Code {
    /// Information bits per frame under the full-rank assumption.
    pub fn info_bits(&self) -> u64 {
        ((self.h.n() - self.h.m().min(self.h.n())) * self.field.bits() as usize) as u64
    }

    pub fn coded_bits(&self) -> u64 {
        (self.h.n() * self.field.bits() as usize) as u64
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "code".into(), |s| s.to_string_lossy().into_owned())
}

fn field_for(spec: &EmulationSpec, q: usize) -> Result<Field, HarnessError> {
    if !q.is_power_of_two() {
        return Err(CoreError::OrderNotPowerOfTwo(q).into());
    }
    Ok(Field::new(q.trailing_zeros(), spec.gf_poly)?)
}

/// Every code of the grid: one per `q`, and per `qc_rows` value for QC
/// sources. Generated codes share their edge positions across `q`.
pub fn load_codes(spec: &EmulationSpec) -> Result<Vec<Code>, HarnessError> {
    let source = spec.code_source()?;
    let mut codes = Vec::new();
    for &q in &spec.q {
        let field = field_for(spec, q)?;
        match &source {
            CodeSource::Alist(path) => {
                let h = formats::load_alist(path)?;
                if h.q() != q {
                    return Err(HarnessError::FieldMismatch { file: h.q(), requested: q });
                }
                codes.push(Code {
                    id: stem(path),
                    field,
                    h,
                });
            }
            CodeSource::Qc { path, rows } => {
                let base = formats::load_qc(path)?;
                if base.q() != q {
                    return Err(HarnessError::FieldMismatch {
                        file: base.q(),
                        requested: q,
                    });
                }
                let all = [base.rows_b()];
                let choices = if rows.is_empty() { &all[..] } else { &rows[..] };
                for &r in choices {
                    if r == 0 || r > base.rows_b() {
                        return Err(ConfigError::Constraint {
                            key: "qc_rows",
                            constraint: format!("1 ≤ qc_rows ≤ {}", base.rows_b()),
                        }
                        .into());
                    }
                    let h = expand_qc(&base.truncate_rows(r), &field)?;
                    codes.push(Code {
                        id: format!("{}-r{r}", stem(path)),
                        field: field.clone(),
                        h,
                    });
                }
            }
            CodeSource::Regular { n, d_c, seed } => {
                let h = build_regular_2dc(*n, *d_c, &field, *seed)?;
                codes.push(Code {
                    id: format!("reg2-{d_c}-n{n}-s{seed}"),
                    field,
                    h,
                });
            }
        }
        check_declared_shape(spec, &codes[codes.len() - 1])?;
    }
    Ok(codes)
}

fn check_declared_shape(spec: &EmulationSpec, code: &Code) -> Result<(), ConfigError> {
    let (dv, dc) = code.h.degrees();
    let fail = |key, constraint| Err(ConfigError::Constraint { key, constraint });
    if let Some(m) = spec.m {
        if m != code.h.m() {
            return fail("m", format!("m = {m}, code has {}", code.h.m()));
        }
    }
    if let Some(n) = spec.n {
        if n != code.h.n() {
            return fail("n", format!("n = {n}, code has {}", code.h.n()));
        }
    }
    if let Some(d_v) = spec.d_v {
        if dv.iter().any(|&d| d != d_v) {
            return fail("d_v", format!("every column has degree {d_v}"));
        }
    }
    if spec.provenance("d_c") != crate::config::Provenance::Default && dc.iter().any(|&d| d != spec.d_c) {
        return fail("d_c", format!("every row has degree {}", spec.d_c));
    }
    Ok(())
}

/// Outcome of one frame against the all-zero codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameResult {
    pub symbol_errors: u64,
    pub bit_errors: u64,
    pub frame_error: bool,
    pub iterations: u64,
}

/// Symbol and bit errors of a decision vector against all zeros; a bit
/// error is a set bit of a decided symbol's binary image.
pub fn count_errors(decisions: &[Symbol]) -> (u64, u64) {
    decisions.iter().fold((0, 0), |(s, b), &d| {
        (s + u64::from(d != 0), b + u64::from(d.count_ones()))
    })
}

/// Everything needed to simulate one operating point.
pub struct Point<'a> {
    pub code: &'a Code,
    pub channel: ChannelConfig,
    pub decoder: Decoder<'a>,
}

impl<'a> Point<'a> {
    pub fn new(code: &'a Code, snr_db: f64, quant_step: Option<f64>, cfg: DecoderConfig) -> Result<Self, HarnessError> {
        let channel = ChannelConfig::new(snr_db, code.h.rate().as_f64())?.with_quant_step(quant_step);
        let decoder = Decoder::new(&code.h, &code.field, cfg)?;
        Ok(Point { code, channel, decoder })
    }

    pub fn run_frame(&self, master_seed: u64, index: u64) -> Result<FrameResult, CoreError> {
        let mut rng = frame_rng(master_seed, index);
        let priors = generate_priors(
            &self.code.h,
            &self.channel,
            self.decoder.config(),
            &self.code.field,
            &mut rng,
        )?;
        let out = self.decoder.decode(&priors)?;
        let (symbol_errors, bit_errors) = count_errors(&out.decisions);
        Ok(FrameResult {
            symbol_errors,
            bit_errors,
            frame_error: symbol_errors > 0,
            iterations: out.iterations as u64,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub frame_limit: u64,
    /// Stop once this many frames failed; 0 disables the rule.
    pub target_error_frames: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub frames: u64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub frame_errors: u64,
    /// Coded bits per frame, the BER denominator.
    pub bits_per_frame: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iterations: f64,
    pub ber_ci: (f64, f64),
    pub fer_ci: (f64, f64),
    pub wall_time: f64,
    pub cycle_report: Option<CycleReport>,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    symbol_errors: u64,
    frame_errors: u64,
    iterations: u64,
}

impl Tally {
    fn add(&mut self, r: &FrameResult) {
        self.frames += 1;
        self.bit_errors += r.bit_errors;
        self.symbol_errors += r.symbol_errors;
        self.frame_errors += u64::from(r.frame_error);
        self.iterations += r.iterations;
    }
}

/// Runs frames `0..` until `frame_limit`, or until `target_error_frames`
/// frames have failed.
pub fn run_point(point: &Point<'_>, run: &RunConfig, pool: &ThreadPool) -> Result<PointStats, HarnessError> {
    let start = Instant::now();
    let mut tally = Tally::default();
    let mut next = 0;
    'outer: while next < run.frame_limit {
        let end = (next + BATCH).min(run.frame_limit);
        let results: Vec<FrameResult> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| point.run_frame(run.master_seed, i))
                .collect::<Result<_, _>>()
        })?;
        for r in &results {
            tally.add(r);
            if run.target_error_frames > 0 && tally.frame_errors >= run.target_error_frames {
                break 'outer;
            }
        }
        next = end;
    }
    let bits_per_frame = point.code.coded_bits();
    let total_bits = tally.frames * bits_per_frame;
    Ok(PointStats {
        frames: tally.frames,
        bit_errors: tally.bit_errors,
        symbol_errors: tally.symbol_errors,
        frame_errors: tally.frame_errors,
        bits_per_frame,
        ber: tally.bit_errors as f64 / total_bits as f64,
        fer: tally.frame_errors as f64 / tally.frames as f64,
        avg_iterations: tally.iterations as f64 / tally.frames as f64,
        ber_ci: wilson_interval(tally.bit_errors, total_bits, Z95),
        fer_ci: wilson_interval(tally.frame_errors, tally.frames, Z95),
        wall_time: start.elapsed().as_secs_f64(),
        cycle_report: None,
    })
}

pub fn cycle_params(code: &Code, cfg: &DecoderConfig) -> CycleParams {
    let (_, dc) = code.h.degrees();
    CycleParams {
        n: code.h.n() as u64,
        m: code.h.m() as u64,
        q: code.field.order() as u64,
        d_c: dc.iter().copied().max().unwrap_or(0) as u64,
        n_m: cfg.n_m as u64,
        ls_cn: cfg.ls_cn as u64,
        ls_vn: cfg.ls_vn as u64,
        max_iter: cfg.max_iter as u64,
        quant_bits: u64::from(cfg.quant_bits),
        info_bits: code.info_bits(),
    }
}

pub fn cycle_config(spec: &EmulationSpec) -> CycleConfig {
    CycleConfig {
        t_overhead: spec.t_overhead,
        clock_mhz: spec.clock_mhz,
        n_decoders: spec.n_decoders,
    }
}

/// One results-table row; field names are the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub code_id: String,
    pub algorithm: Algorithm,
    pub q: usize,
    pub n_m: usize,
    #[serde(rename = "Q")]
    pub quant_bits: u32,
    pub ls_vn: usize,
    pub ls_cn: usize,
    #[serde(rename = "L")]
    pub max_iter: usize,
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub avg_iter: f64,
    pub est_throughput_mbps: f64,
}

/// Checkpoint and JSON output record of one completed grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub row: ResultRow,
    pub run: RunConfig,
    pub stats: PointStats,
}

/// Grid position of a cell, before it runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub code: usize,
    pub algorithm: Algorithm,
    pub decoder: DecoderConfig,
    pub snr_db: f64,
}

impl Cell {
    fn key(&self, codes: &[Code]) -> CellKey {
        let c = &self.decoder;
        (
            codes[self.code].id.clone(),
            codes[self.code].field.order(),
            self.algorithm.name(),
            c.n_m,
            c.quant_bits,
            c.ls_vn,
            c.ls_cn,
            c.max_iter,
            self.snr_db.to_bits(),
        )
    }
}

type CellKey = (String, usize, &'static str, usize, u32, usize, usize, usize, u64);

fn record_key(r: &ResultRow) -> CellKey {
    (
        r.code_id.clone(),
        r.q,
        r.algorithm.name(),
        r.n_m,
        r.quant_bits,
        r.ls_vn,
        r.ls_cn,
        r.max_iter,
        r.snr_db.to_bits(),
    )
}

pub fn decoder_config(spec: &EmulationSpec, algorithm: Algorithm, n_m: usize, quant_bits: u32) -> DecoderConfig {
    DecoderConfig::new(algorithm, n_m)
        .with_sorters(spec.ls_vn_for(n_m), spec.ls_cn_for(n_m))
        .with_quant_bits(quant_bits)
        .with_max_iter(spec.max_iter)
        .with_compensation_offset(spec.compensation_offset)
        .with_early_stop(spec.early_stop)
}

/// Cells in table order: code, algorithm, n_m, Q, then SNR.
pub fn grid(spec: &EmulationSpec, codes: &[Code]) -> Result<Vec<Cell>, HarnessError> {
    let mut cells = Vec::new();
    for (ci, code) in codes.iter().enumerate() {
        for &algorithm in &spec.algorithm {
            for &n_m in &spec.n_m {
                if n_m > code.field.order() {
                    return Err(HarnessError::Grid(format!(
                        "n_m = {n_m} exceeds q = {} for {}",
                        code.field.order(),
                        code.id
                    )));
                }
                for &quant_bits in &spec.quant_bits {
                    let decoder = decoder_config(spec, algorithm, n_m, quant_bits);
                    decoder.validate(code.field.order())?;
                    for &snr_db in &spec.snr_db {
                        cells.push(Cell {
                            code: ci,
                            algorithm,
                            decoder,
                            snr_db,
                        });
                    }
                }
            }
        }
    }
    Ok(cells)
}

pub fn run_config(spec: &EmulationSpec) -> RunConfig {
    RunConfig {
        frame_limit: spec.frame_limit,
        target_error_frames: spec.target_error_frames,
        master_seed: spec.seed,
    }
}

fn run_cell(
    spec: &EmulationSpec,
    codes: &[Code],
    cell: &Cell,
    pool: &ThreadPool,
) -> Result<CellRecord, HarnessError> {
    let code = &codes[cell.code];
    let point = Point::new(code, cell.snr_db, spec.quant_step, cell.decoder)?;
    let run = run_config(spec);
    let mut stats = run_point(&point, &run, pool)?;
    let report = frame_report(&cycle_params(code, &cell.decoder), &cycle_config(spec));
    stats.cycle_report = Some(report);
    let c = &cell.decoder;
    let row = ResultRow {
        code_id: code.id.clone(),
        algorithm: cell.algorithm,
        q: code.field.order(),
        n_m: c.n_m,
        quant_bits: c.quant_bits,
        ls_vn: c.ls_vn,
        ls_cn: c.ls_cn,
        max_iter: c.max_iter,
        snr_db: cell.snr_db,
        frames: stats.frames,
        bit_errors: stats.bit_errors,
        symbol_errors: stats.symbol_errors,
        frame_errors: stats.frame_errors,
        ber: stats.ber,
        fer: stats.fer,
        avg_iter: stats.avg_iterations,
        est_throughput_mbps: report.throughput_mbps,
    };
    Ok(CellRecord { row, run, stats })
}

/// Reads completed cells from a checkpoint; a missing file is empty.
pub fn read_checkpoint(path: &Path) -> Result<Vec<CellRecord>, HarnessError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| HarnessError::Checkpoint {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn worker_pool(workers: usize) -> Result<ThreadPool, HarnessError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?)
}

/// Runs every grid cell in order. With a checkpoint, cells already recorded
/// under the same run settings are reused and each new cell is appended as
/// one JSON line once it completes.
pub fn sweep(
    spec: &EmulationSpec,
    checkpoint: Option<&Path>,
    mut on_cell: impl FnMut(&CellRecord),
) -> Result<Vec<CellRecord>, HarnessError> {
    let codes = load_codes(spec)?;
    let cells = grid(spec, &codes)?;
    let run = run_config(spec);
    let mut done: HashMap<CellKey, CellRecord> = HashMap::new();
    let mut sink = None;
    if let Some(path) = checkpoint {
        for rec in read_checkpoint(path)? {
            if rec.run == run {
                done.insert(record_key(&rec.row), rec);
            }
        }
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io_err(path))?;
        sink = Some((path, f));
    }
    let pool = worker_pool(spec.workers)?;
    let mut out = Vec::with_capacity(cells.len());
    for cell in &cells {
        let rec = match done.remove(&cell.key(&codes)) {
            Some(rec) => rec,
            None => {
                let rec = run_cell(spec, &codes, cell, &pool)?;
                if let Some((path, f)) = sink.as_mut() {
                    let line = serde_json::to_string(&rec).expect("records serialize");
                    writeln!(f, "{line}").and_then(|_| f.flush()).map_err(io_err(path))?;
                }
                rec
            }
        };
        on_cell(&rec);
        out.push(rec);
    }
    Ok(out)
}

pub fn write_csv<W: Write>(rows: impl IntoIterator<Item = ResultRow>, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::Csv(e.into()))?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Rows sharing everything but the SNR.
pub fn curves(rows: &[ResultRow]) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for r in rows {
        let label = format!(
            "{}_{}_q{}_nm{}_Q{}_lv{}_lc{}_L{}",
            r.code_id,
            r.algorithm.name(),
            r.q,
            r.n_m,
            r.quant_bits,
            r.ls_vn,
            r.ls_cn,
            r.max_iter
        );
        match out.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push((r.snr_db, r.ber)),
            None => out.push((label, vec![(r.snr_db, r.ber)])),
        }
    }
    out
}

/// Writes one two-column `snr ber` file per curve into `dir`.
pub fn write_plots(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut paths = Vec::new();
    for (label, pts) in curves(rows) {
        let path = dir.join(format!("{label}.dat"));
        let body: String = pts.iter().map(|(s, b)| format!("{s} {b}\n")).collect();
        fs::write(&path, body).map_err(io_err(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gain {
    pub curve: String,
    pub gain_db: Option<f64>,
    pub error: Option<String>,
}

/// Coding gain of every curve at `target_ber`.
pub fn coding_gain(rows: &[ResultRow], target_ber: f64) -> Vec<Gain> {
    curves(rows)
        .into_iter()
        .map(|(curve, pts)| match gain_from_curve(&pts, target_ber) {
            Ok(g) => Gain {
                curve,
                gain_db: Some(g),
                error: None,
            },
            Err(e) => Gain {
                curve,
                gain_db: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}
