//! Text formats for parity-check matrices.
//!
//! Nonbinary alist:
//!
//! ```text
//! n m q
//! max_dv max_dc
//! <n column degrees>
//! <m row degrees>
//! <n lines of "row coeff" pairs, 1-based rows>
//! <m lines of "col coeff" pairs, 1-based columns>
//! ```
//!
//! A `0 0` pair is padding and is skipped; a node of degree 0 is written
//! as a lone `0 0`. QC base matrices use a header
//! `rows_b cols_b circulant_size q` followed by one `shift coeff` pair per
//! cell in row-major order, `-1 0` marking an absent cell.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use nbldpc_core::{Error as CodeError, ParityCheckMatrix, QcBaseMatrix, QcCell};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("header declares {what} {declared}, body has {found}")]
    HeaderMismatch {
        what: &'static str,
        declared: usize,
        found: usize,
    },
    #[error("column and row sections disagree at row {row}, column {col}")]
    SectionMismatch { row: usize, col: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Non-empty lines, each split into integer tokens, with 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<i64>), FormatError> {
        for (i, raw) in self.inner.by_ref() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let vals = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|_| FormatError::Syntax {
                        line: i + 1,
                        msg: format!("expected an integer in {what}, found {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok((i + 1, vals));
        }
        Err(FormatError::Syntax {
            line: 0,
            msg: format!("unexpected end of input while reading {what}"),
        })
    }

    fn expect(&mut self, what: &str, count: usize) -> Result<(usize, Vec<usize>), FormatError> {
        let (line, vals) = self.next_ints(what)?;
        if vals.len() != count {
            return Err(FormatError::Syntax {
                line,
                msg: format!("{what} needs {count} values, found {}", vals.len()),
            });
        }
        let vals = vals
            .into_iter()
            .map(|v| {
                usize::try_from(v).map_err(|_| FormatError::Syntax {
                    line,
                    msg: format!("negative value {v} in {what}"),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok((line, vals))
    }

    fn rest_is_blank(&mut self) -> Option<usize> {
        self.inner
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .map(|(i, _)| i + 1)
    }
}

/// `(index, coeff)` pairs of one alist body line, 1-based indices converted
/// to 0-based, padding dropped.
fn pairs(line: usize, vals: &[i64], bound: usize, what: &str) -> Result<Vec<(usize, usize)>, FormatError> {
    if !vals.len().is_multiple_of(2) {
        return Err(FormatError::Syntax {
            line,
            msg: format!("{what} line has an odd number of values"),
        });
    }
    let mut out = Vec::with_capacity(vals.len() / 2);
    for pair in vals.chunks_exact(2) {
        let (idx, coeff) = (pair[0], pair[1]);
        if idx == 0 && coeff == 0 {
            continue;
        }
        if idx < 1 || idx as usize > bound {
            return Err(FormatError::Syntax {
                line,
                msg: format!("{what} index {idx} outside 1..={bound}"),
            });
        }
        if coeff < 0 {
            return Err(FormatError::Syntax {
                line,
                msg: format!("negative coefficient {coeff}"),
            });
        }
        out.push((idx as usize - 1, coeff as usize));
    }
    Ok(out)
}

/// Parses a nonbinary alist.
pub fn parse_alist(text: &str) -> Result<ParityCheckMatrix, FormatError> {
    let mut lines = Lines::new(text);
    let (_, head) = lines.expect("header \"n m q\"", 3)?;
    let (n, m, q) = (head[0], head[1], head[2]);
    let (_, max) = lines.expect("header \"max_dv max_dc\"", 2)?;
    let (_, col_deg) = lines.expect("column degrees", n)?;
    let (_, row_deg) = lines.expect("row degrees", m)?;

    let mut from_cols = BTreeSet::new();
    for (j, &deg) in col_deg.iter().enumerate() {
        let (line, vals) = lines.next_ints("column section")?;
        let entries = pairs(line, &vals, m, "row")?;
        if entries.len() != deg {
            return Err(FormatError::HeaderMismatch {
                what: "column degree",
                declared: deg,
                found: entries.len(),
            });
        }
        for (row, coeff) in entries {
            from_cols.insert((row, j, coeff));
        }
    }
    let mut rows = Vec::with_capacity(m);
    let mut from_rows = BTreeSet::new();
    for (i, &deg) in row_deg.iter().enumerate() {
        let (line, vals) = lines.next_ints("row section")?;
        let entries = pairs(line, &vals, n, "column")?;
        if entries.len() != deg {
            return Err(FormatError::HeaderMismatch {
                what: "row degree",
                declared: deg,
                found: entries.len(),
            });
        }
        for &(col, coeff) in &entries {
            from_rows.insert((i, col, coeff));
        }
        rows.push(entries);
    }
    if let Some(line) = lines.rest_is_blank() {
        return Err(FormatError::Syntax {
            line,
            msg: "trailing content after the row section".into(),
        });
    }
    let h = ParityCheckMatrix::from_rows(q, n, rows)?;
    if let Some(&(row, col, _)) = from_cols.symmetric_difference(&from_rows).next() {
        return Err(FormatError::SectionMismatch { row, col });
    }
    let (dv, dc) = h.degrees();
    let found_max = (
        dv.iter().copied().max().unwrap_or(0),
        dc.iter().copied().max().unwrap_or(0),
    );
    if found_max.0 != max[0] {
        return Err(FormatError::HeaderMismatch {
            what: "max_dv",
            declared: max[0],
            found: found_max.0,
        });
    }
    if found_max.1 != max[1] {
        return Err(FormatError::HeaderMismatch {
            what: "max_dc",
            declared: max[1],
            found: found_max.1,
        });
    }
    Ok(h)
}

/// Serializes `h` as a nonbinary alist, padding short lines with `0 0`.
pub fn write_alist(h: &ParityCheckMatrix) -> String {
    let (dv, dc) = h.degrees();
    let max_dv = dv.iter().copied().max().unwrap_or(0);
    let max_dc = dc.iter().copied().max().unwrap_or(0);
    let mut s = String::new();
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "{} {} {}", h.n(), h.m(), h.q());
    let _ = writeln!(s, "{max_dv} {max_dc}");
    let _ = writeln!(s, "{}", join(&dv));
    let _ = writeln!(s, "{}", join(&dc));
    let body = |s: &mut String, items: &mut dyn Iterator<Item = (usize, u8)>, width: usize| {
        let mut parts = Vec::with_capacity(width);
        for (idx, coeff) in items {
            parts.push(format!("{} {}", idx + 1, coeff));
        }
        // an empty line would be skipped on read, so keep one padding pair
        parts.resize(width.max(parts.len()).max(1), "0 0".to_string());
        let _ = writeln!(s, "{}", parts.join(" "));
    };
    for col in h.columns() {
        body(&mut s, &mut col.into_iter(), max_dv);
    }
    for row in h.rows() {
        body(&mut s, &mut row.iter().map(|e| (e.col, e.coeff)), max_dc);
    }
    s
}

/// Parses a QC base matrix.
pub fn parse_qc(text: &str) -> Result<QcBaseMatrix, FormatError> {
    let mut lines = Lines::new(text);
    let (_, head) = lines.expect("header \"rows_b cols_b circulant_size q\"", 4)?;
    let (rows_b, cols_b, z, q) = (head[0], head[1], head[2], head[3]);
    let mut cells = Vec::with_capacity(rows_b * cols_b);
    for _ in 0..rows_b {
        let (line, vals) = lines.next_ints("base row")?;
        if vals.len() != 2 * cols_b {
            return Err(FormatError::Syntax {
                line,
                msg: format!("base row needs {cols_b} \"shift coeff\" pairs"),
            });
        }
        for pair in vals.chunks_exact(2) {
            cells.push(match (pair[0], pair[1]) {
                (-1, _) => None,
                (s, c) if s >= 0 && (0..=255).contains(&c) => Some(QcCell {
                    shift: s as usize,
                    coeff: c as u8,
                }),
                (s, c) => {
                    return Err(FormatError::Syntax {
                        line,
                        msg: format!("invalid cell \"{s} {c}\""),
                    })
                }
            });
        }
    }
    if let Some(line) = lines.rest_is_blank() {
        return Err(FormatError::Syntax {
            line,
            msg: "trailing content after the base rows".into(),
        });
    }
    Ok(QcBaseMatrix::new(rows_b, cols_b, z, q, cells)?)
}

pub fn write_qc(base: &QcBaseMatrix) -> String {
    let mut s = format!(
        "{} {} {} {}\n",
        base.rows_b(),
        base.cols_b(),
        base.circulant_size(),
        base.q()
    );
    for i in 0..base.rows_b() {
        let row: Vec<String> = (0..base.cols_b())
            .map(|j| match base.cell(i, j) {
                Some(c) => format!("{} {}", c.shift, c.coeff),
                None => "-1 0".to_string(),
            })
            .collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn read(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_alist(path: &Path) -> Result<ParityCheckMatrix, FormatError> {
    parse_alist(&read(path)?)
}

pub fn load_qc(path: &Path) -> Result<QcBaseMatrix, FormatError> {
    parse_qc(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nbldpc_core::{build_regular_2dc, Field};

    const IDENTITY: &str = "2 2 4\n1 1\n1 1\n1 1\n1 1\n2 1\n1 1\n2 1\n";

    #[test]
    fn minimal_identity() {
        let h = parse_alist(IDENTITY).unwrap();
        assert_eq!((h.n(), h.m(), h.q()), (2, 2, 4));
        assert_eq!(h.row(0)[0].col, 0);
        assert_eq!(h.row(1)[0].col, 1);
        assert_eq!(write_alist(&h), IDENTITY);
    }

    #[test]
    fn zero_coefficient_rejected() {
        let text = "2 2 4\n1 1\n1 1\n1 1\n1 0\n2 1\n1 0\n2 1\n";
        assert!(matches!(
            parse_alist(text),
            Err(FormatError::Code(CodeError::ZeroCoefficient { .. }))
        ));
    }

    #[test]
    fn coefficient_outside_field_rejected() {
        let text = "2 2 4\n1 1\n1 1\n1 1\n1 4\n2 1\n1 4\n2 1\n";
        assert!(matches!(
            parse_alist(text),
            Err(FormatError::Code(CodeError::CoefficientOutOfField { .. }))
        ));
    }

    #[test]
    fn sections_cross_checked() {
        let text = "2 2 4\n1 1\n1 1\n1 1\n1 1\n2 2\n1 1\n2 1\n";
        assert!(matches!(parse_alist(text), Err(FormatError::SectionMismatch { .. })));
    }

    #[test]
    fn degree_mismatch_and_range() {
        let bad_degree = "2 2 4\n1 1\n1 1\n1 1\n1 1 2 1\n2 1\n1 1\n2 1\n";
        assert!(matches!(parse_alist(bad_degree), Err(FormatError::HeaderMismatch { .. })));
        let out_of_range = "2 2 4\n1 1\n1 1\n1 1\n3 1\n2 1\n1 1\n2 1\n";
        assert!(matches!(parse_alist(out_of_range), Err(FormatError::Syntax { line: 5, .. })));
        assert!(parse_alist("2 2\n").is_err());
    }

    #[test]
    fn duplicate_position_rejected() {
        let text = "2 1 4\n2 2\n2 0\n2\n1 1 1 2\n0 0 0 0\n1 1 1 2\n";
        assert!(parse_alist(text).is_err());
    }

    #[test]
    fn generated_code_round_trip() {
        let f = Field::with_order(32).unwrap();
        let h = build_regular_2dc(192, 4, &f, 1).unwrap();
        let back = parse_alist(&write_alist(&h)).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.regularity(), Some((2, 4)));
    }

    #[test]
    fn qc_round_trip_and_absent_cell() {
        let text = "1 2 3 4\n1 2 -1 0\n";
        let base = parse_qc(text).unwrap();
        assert_eq!(base.cell(0, 0), Some(QcCell { shift: 1, coeff: 2 }));
        assert_eq!(base.cell(0, 1), None);
        assert_eq!(write_qc(&base), text);
        assert!(parse_qc("1 1 3 4\n3 1\n").is_err());
        assert!(parse_qc("1 1 3 4\n1 0\n").is_err());
    }
}
