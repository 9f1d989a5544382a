//! Flat `key = value` run specification.
//!
//! One key per line, `#` starts a comment, list values are comma separated.
//! Later assignments win. Every key has a default; see [`KEYS`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nbldpc_core::Algorithm;
use serde::Serialize;
use thiserror::Error;

pub const SEED_ENV: &str = "NBLDPC_SEED";

/// Every accepted key with its default, as written in a config file.
pub const KEYS: &[(&str, &str)] = &[
    ("q", "32"),
    ("gf_poly", "(per-field default)"),
    ("code_file", "(none)"),
    ("qc_file", "(none)"),
    ("qc_rows", "(all base rows)"),
    ("n", "(none)"),
    ("d_c", "4"),
    ("code_seed", "1"),
    ("m", "(unchecked)"),
    ("d_v", "(unchecked)"),
    ("algorithm", "ems"),
    ("n_m", "8"),
    ("quant_bits", "0"),
    ("quant_step", "0.5 * sigma"),
    ("ls_vn", "n_m"),
    ("ls_cn", "n_m"),
    ("max_iter", "10"),
    ("compensation_offset", "1.0"),
    ("early_stop", "false"),
    ("frame_limit", "1000"),
    ("target_error_frames", "0"),
    ("snr_db", "4.4"),
    ("seed", "0"),
    ("workers", "(available parallelism)"),
    ("clock_mhz", "120"),
    ("t_overhead", "10"),
    ("n_decoders", "1"),
    ("out_csv", "(none)"),
    ("plot_dir", "(none)"),
    ("checkpoint", "(none)"),
    ("target_ber", "1e-5"),
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected \"key = value\"")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}`: cannot parse {value:?} as {expected}")]
    Type {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{key}`: constraint violated: {constraint}")]
    Constraint { key: &'static str, constraint: String },
    #[error("no code source: set `code_file`, `qc_file`, or `n` (with `d_c`)")]
    MissingCodeSource,
    #[error("`{0}`: only one code source may be given")]
    ConflictingCodeSource(&'static str),
}

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Default,
    File,
    Env,
    Override,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Default => "default",
            Provenance::File => "file",
            Provenance::Env => "env",
            Provenance::Override => "override",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CodeSource {
    Alist(PathBuf),
    Qc { path: PathBuf, rows: Vec<usize> },
    Regular { n: usize, d_c: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmulationSpec {
    pub q: Vec<usize>,
    pub gf_poly: Option<u32>,
    pub code_file: Option<PathBuf>,
    pub qc_file: Option<PathBuf>,
    pub qc_rows: Vec<usize>,
    pub n: Option<usize>,
    pub d_c: usize,
    pub code_seed: u64,
    pub m: Option<usize>,
    pub d_v: Option<usize>,
    pub algorithm: Vec<Algorithm>,
    pub n_m: Vec<usize>,
    pub quant_bits: Vec<u32>,
    pub quant_step: Option<f64>,
    pub ls_vn: Option<usize>,
    pub ls_cn: Option<usize>,
    pub max_iter: usize,
    pub compensation_offset: f64,
    pub early_stop: bool,
    pub frame_limit: u64,
    pub target_error_frames: u64,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    pub clock_mhz: f64,
    pub t_overhead: u64,
    pub n_decoders: u32,
    pub out_csv: Option<PathBuf>,
    pub plot_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub target_ber: f64,
    #[serde(skip)]
    provenance: BTreeMap<&'static str, Provenance>,
}

impl Default for EmulationSpec {
    fn default() -> Self {
        EmulationSpec {
            q: vec![32],
            gf_poly: None,
            code_file: None,
            qc_file: None,
            qc_rows: Vec::new(),
            n: None,
            d_c: 4,
            code_seed: 1,
            m: None,
            d_v: None,
            algorithm: vec![Algorithm::Ems],
            n_m: vec![8],
            quant_bits: vec![0],
            quant_step: None,
            ls_vn: None,
            ls_cn: None,
            max_iter: 10,
            compensation_offset: 1.0,
            early_stop: false,
            frame_limit: 1000,
            target_error_frames: 0,
            snr_db: vec![4.4],
            seed: 0,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            clock_mhz: 120.0,
            t_overhead: 10,
            n_decoders: 1,
            out_csv: None,
            plot_dir: None,
            checkpoint: None,
            target_ber: 1e-5,
            provenance: BTreeMap::new(),
        }
    }
}

fn scalar<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Type {
        key: key.to_string(),
        value: value.to_string(),
        expected,
    })
}

fn list<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> = value
        .split(',')
        .map(|v| scalar(key, v, expected))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::Type {
            key: key.to_string(),
            value: value.to_string(),
            expected,
        });
    }
    Ok(items)
}

fn optional<T: FromStr>(key: &str, value: &str, expected: &'static str) -> Result<Option<T>, ConfigError> {
    match value.trim() {
        "" | "none" | "auto" => Ok(None),
        v => scalar(key, v, expected).map(Some),
    }
}

fn path(value: &str) -> Option<PathBuf> {
    match value.trim() {
        "" | "none" => None,
        v => Some(PathBuf::from(v)),
    }
}

fn boolean(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::Type {
            key: key.to_string(),
            value: value.to_string(),
            expected: "a boolean",
        }),
    }
}

fn integer_mask(key: &str, value: &str) -> Result<Option<u32>, ConfigError> {
    let v = value.trim();
    if v.is_empty() || v == "none" || v == "default" {
        return Ok(None);
    }
    let parsed = if let Some(b) = v.strip_prefix("0b") {
        u32::from_str_radix(b, 2)
    } else if let Some(h) = v.strip_prefix("0x") {
        u32::from_str_radix(h, 16)
    } else {
        v.parse()
    };
    parsed.map(Some).map_err(|_| ConfigError::Type {
        key: key.to_string(),
        value: value.to_string(),
        expected: "an integer bitmask",
    })
}

impl EmulationSpec {
    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str, from: Provenance) -> Result<(), ConfigError> {
        let key = key.trim();
        let Some(&(name, _)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(ConfigError::UnknownKey(key.to_string()));
        };
        const UINT: &str = "a non-negative integer";
        const REAL: &str = "a number";
        match name {
            "q" => self.q = list(key, value, UINT)?,
            "gf_poly" => self.gf_poly = integer_mask(key, value)?,
            "code_file" => self.code_file = path(value),
            "qc_file" => self.qc_file = path(value),
            "qc_rows" => {
                self.qc_rows = match value.trim() {
                    "" | "all" => Vec::new(),
                    v => list(key, v, UINT)?,
                }
            }
            "n" => self.n = optional(key, value, UINT)?,
            "d_c" => self.d_c = scalar(key, value, UINT)?,
            "code_seed" => self.code_seed = scalar(key, value, UINT)?,
            "m" => self.m = optional(key, value, UINT)?,
            "d_v" => self.d_v = optional(key, value, UINT)?,
            "algorithm" => self.algorithm = list(key, value, "ems or mm")?,
            "n_m" => self.n_m = list(key, value, UINT)?,
            "quant_bits" => self.quant_bits = list(key, value, UINT)?,
            "quant_step" => self.quant_step = optional(key, value, REAL)?,
            "ls_vn" => self.ls_vn = optional(key, value, UINT)?,
            "ls_cn" => self.ls_cn = optional(key, value, UINT)?,
            "max_iter" => self.max_iter = scalar(key, value, UINT)?,
            "compensation_offset" => self.compensation_offset = scalar(key, value, REAL)?,
            "early_stop" => self.early_stop = boolean(key, value)?,
            "frame_limit" => self.frame_limit = scalar(key, value, UINT)?,
            "target_error_frames" => self.target_error_frames = scalar(key, value, UINT)?,
            "snr_db" => self.snr_db = list(key, value, REAL)?,
            "seed" => self.seed = scalar(key, value, UINT)?,
            "workers" => {
                self.workers = match value.trim() {
                    "" | "auto" => std::thread::available_parallelism().map_or(1, |n| n.get()),
                    v => scalar(key, v, UINT)?,
                }
            }
            "clock_mhz" => self.clock_mhz = scalar(key, value, REAL)?,
            "t_overhead" => self.t_overhead = scalar(key, value, UINT)?,
            "n_decoders" => self.n_decoders = scalar(key, value, UINT)?,
            "out_csv" => self.out_csv = path(value),
            "plot_dir" => self.plot_dir = path(value),
            "checkpoint" => self.checkpoint = path(value),
            "target_ber" => self.target_ber = scalar(key, value, REAL)?,
            _ => unreachable!("key table and setter disagree on {name}"),
        }
        self.provenance.insert(name, from);
        Ok(())
    }

    /// Applies `key=value` overrides from the command line.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for (i, o) in overrides.iter().enumerate() {
            let (k, v) = o
                .as_ref()
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v, Provenance::Override)?;
        }
        Ok(())
    }

    /// Applies the seed environment override if `value` is present.
    pub fn apply_env_seed(&mut self, value: Option<&str>) -> Result<(), ConfigError> {
        match value {
            Some(v) => self.set("seed", v, Provenance::Env),
            None => Ok(()),
        }
    }

    pub fn provenance(&self, key: &str) -> Provenance {
        self.provenance.get(key).copied().unwrap_or(Provenance::Default)
    }

    /// `(key, provenance)` for every key.
    pub fn provenance_table(&self) -> Vec<(&'static str, Provenance)> {
        KEYS.iter().map(|&(k, _)| (k, self.provenance(k))).collect()
    }

    pub fn code_source(&self) -> Result<CodeSource, ConfigError> {
        match (&self.code_file, &self.qc_file, self.n) {
            (Some(p), None, None) => Ok(CodeSource::Alist(p.clone())),
            (None, Some(p), None) => Ok(CodeSource::Qc {
                path: p.clone(),
                rows: self.qc_rows.clone(),
            }),
            (None, None, Some(n)) => Ok(CodeSource::Regular {
                n,
                d_c: self.d_c,
                seed: self.code_seed,
            }),
            (None, None, None) => Err(ConfigError::MissingCodeSource),
            (Some(_), Some(_), _) => Err(ConfigError::ConflictingCodeSource("qc_file")),
            (Some(_), None, Some(_)) | (None, Some(_), Some(_)) => Err(ConfigError::ConflictingCodeSource("n")),
        }
    }

    /// Cross-field checks that do not need the code itself.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |key: &'static str, constraint: String| Err(ConfigError::Constraint { key, constraint });
        for &q in &self.q {
            if !q.is_power_of_two() || !(4..=256).contains(&q) {
                return fail("q", format!("q = {q} must be a power of two in 4..=256"));
            }
        }
        let q_min = *self.q.iter().min().expect("list keys are never empty");
        for &n_m in &self.n_m {
            if n_m == 0 {
                return fail("n_m", "n_m ≥ 1".into());
            }
            if n_m > q_min {
                return fail("n_m", format!("n_m ≤ q ({n_m} > {q_min})"));
            }
        }
        let n_m_min = *self.n_m.iter().min().expect("list keys are never empty");
        for (key, ls) in [("ls_vn", self.ls_vn), ("ls_cn", self.ls_cn)] {
            if let Some(ls) = ls {
                if ls == 0 || ls > n_m_min {
                    return fail(key, format!("1 ≤ {key} ≤ n_m ({ls} vs {n_m_min})"));
                }
            }
        }
        for &b in &self.quant_bits {
            if b == 1 || b > 24 {
                return fail("quant_bits", format!("quant_bits is 0 or in 2..=24, got {b}"));
            }
        }
        if let Some(s) = self.quant_step {
            if !(s > 0.0 && s.is_finite()) {
                return fail("quant_step", "quant_step > 0".into());
            }
        }
        if self.max_iter == 0 {
            return fail("max_iter", "max_iter ≥ 1".into());
        }
        if !(self.compensation_offset >= 0.0 && self.compensation_offset.is_finite()) {
            return fail("compensation_offset", "compensation_offset ≥ 0".into());
        }
        if self.frame_limit == 0 {
            return fail("frame_limit", "frame_limit ≥ 1".into());
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return fail("snr_db", "snr_db values are numbers".into());
        }
        if self.workers == 0 {
            return fail("workers", "workers ≥ 1".into());
        }
        if self.clock_mhz.is_nan() || self.clock_mhz <= 0.0 {
            return fail("clock_mhz", "clock_mhz > 0".into());
        }
        if self.n_decoders == 0 {
            return fail("n_decoders", "n_decoders ≥ 1".into());
        }
        if !(self.target_ber > 0.0 && self.target_ber < 0.5) {
            return fail("target_ber", "0 < target_ber < 0.5".into());
        }
        if let Some(p) = self.gf_poly {
            if self.q.len() > 1 {
                return fail("gf_poly", "a custom polynomial needs a single q".into());
            }
            let bits = self.q[0].trailing_zeros();
            if p >> bits != 1 {
                return fail("gf_poly", format!("gf_poly must have degree {bits}"));
            }
        }
        if self.code_file.is_some() && self.q.len() > 1 {
            return fail("q", "an alist code fixes q; give a single value".into());
        }
        if let CodeSource::Regular { n, d_c, .. } = self.code_source()? {
            if d_c == 0 || (2 * n) % d_c != 0 {
                return fail("d_c", format!("d_c divides 2n ({d_c} vs n = {n})"));
            }
            if let Some(d_v) = self.d_v {
                if d_v != 2 {
                    return fail("d_v", "generated codes have d_v = 2".into());
                }
            }
            if let Some(m) = self.m {
                if m != 2 * n / d_c {
                    return fail("m", format!("m = 2n / d_c = {}", 2 * n / d_c));
                }
            }
        }
        Ok(())
    }

    pub fn ls_vn_for(&self, n_m: usize) -> usize {
        self.ls_vn.unwrap_or(n_m)
    }

    pub fn ls_cn_for(&self, n_m: usize) -> usize {
        self.ls_cn.unwrap_or(n_m)
    }
}

/// Reads a spec from text without validating it.
pub fn parse_spec_unchecked(text: &str) -> Result<EmulationSpec, ConfigError> {
    let mut spec = EmulationSpec::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        spec.set(k, v, Provenance::File)?;
    }
    Ok(spec)
}

/// Reads and validates a spec.
pub fn parse_spec(text: &str) -> Result<EmulationSpec, ConfigError> {
    let spec = parse_spec_unchecked(text)?;
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_one_is_valid() {
        let spec = parse_spec("n = 192\nq = 32\nn_m = 8\nmax_iter = 10\nsnr_db = 4.4\n").unwrap();
        assert_eq!(spec.q, vec![32]);
        assert_eq!(spec.provenance("n_m"), Provenance::File);
        assert_eq!(spec.provenance("quant_bits"), Provenance::Default);
    }

    #[test]
    fn n_m_above_q_names_the_key() {
        let err = parse_spec("n = 192\nq = 32\nn_m = 64\n").unwrap_err();
        assert!(matches!(err, ConfigError::Constraint { key: "n_m", .. }));
        assert!(err.to_string().contains("n_m ≤ q"));
    }

    #[test]
    fn empty_file_only_lacks_code() {
        assert_eq!(parse_spec(""), Err(ConfigError::MissingCodeSource));
        let mut spec = parse_spec_unchecked("# nothing\n\n").unwrap();
        spec.set("n", "192", Provenance::Override).unwrap();
        spec.validate().unwrap();
    }

    #[test]
    fn lists_comments_and_errors() {
        let spec = parse_spec("n = 12 # generated\nsnr_db = 1, 2.5 ,3\nalgorithm = ems, mm\n").unwrap();
        assert_eq!(spec.snr_db, vec![1.0, 2.5, 3.0]);
        assert_eq!(spec.algorithm, vec![Algorithm::Ems, Algorithm::MinMax]);
        assert_eq!(parse_spec("bogus = 1"), Err(ConfigError::UnknownKey("bogus".into())));
        assert!(matches!(parse_spec("n = x"), Err(ConfigError::Type { .. })));
        assert_eq!(parse_spec("n 12"), Err(ConfigError::Syntax { line: 1 }));
    }

    #[test]
    fn overrides_and_env() {
        let mut spec = parse_spec_unchecked("n = 12\nseed = 3\n").unwrap();
        spec.apply_env_seed(Some("9")).unwrap();
        assert_eq!((spec.seed, spec.provenance("seed")), (9, Provenance::Env));
        spec.apply_overrides(&["seed=11", "n_m = 4"]).unwrap();
        assert_eq!((spec.seed, spec.n_m.clone()), (11, vec![4]));
        assert_eq!(spec.provenance("n_m"), Provenance::Override);
        assert!(spec.apply_overrides(&["seed"]).is_err());
    }

    #[test]
    fn consistency_checks() {
        assert!(matches!(
            parse_spec("n = 192\nn_m = 8\nls_cn = 9"),
            Err(ConfigError::Constraint { key: "ls_cn", .. })
        ));
        assert!(matches!(
            parse_spec("n = 192\nm = 95"),
            Err(ConfigError::Constraint { key: "m", .. })
        ));
        assert!(matches!(
            parse_spec("n = 10\nd_c = 3"),
            Err(ConfigError::Constraint { key: "d_c", .. })
        ));
        assert!(matches!(
            parse_spec("n = 10\ncode_file = a.alist"),
            Err(ConfigError::ConflictingCodeSource("n"))
        ));
        assert!(matches!(
            parse_spec("n = 10\nq = 6"),
            Err(ConfigError::Constraint { key: "q", .. })
        ));
    }

    #[test]
    fn every_key_is_settable() {
        let mut spec = EmulationSpec::default();
        for (k, _) in KEYS {
            let v = match *k {
                "algorithm" => "mm",
                "early_stop" => "true",
                "gf_poly" => "0b100101",
                "code_file" | "qc_file" | "out_csv" | "plot_dir" | "checkpoint" => "x",
                "target_ber" | "quant_step" | "compensation_offset" | "clock_mhz" | "snr_db" => "0.25",
                _ => "4",
            };
            spec.set(k, v, Provenance::File).unwrap();
        }
    }
}
