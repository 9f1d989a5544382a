//! Sparse nonbinary parity-check matrices.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gf::{Field, Symbol};
use crate::Error;

/// One nonzero entry of a row: column index and GF coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RowEntry {
    pub col: usize,
    pub coeff: Symbol,
}

/// Sparse m x n parity-check matrix over GF(q), stored by rows.
///
/// Coefficients are nonzero and column indices within each row are strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    q: usize,
    n: usize,
    rows: Vec<Vec<RowEntry>>,
}

/// Design rate `(n - m) / n`, kept as a reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: usize,
    pub den: usize,
}

impl Rate {
    pub fn new(num: usize, den: usize) -> Rate {
        let g = gcd(num, den).max(1);
        Rate {
            num: num / g,
            den: den / g,
        }
    }

    pub fn as_f64(&self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

impl core::fmt::Display for Rate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl ParityCheckMatrix {
    /// Validates and builds a matrix from per-row `(column, coefficient)`
    /// lists. Rows are sorted by column; duplicates are rejected.
    pub fn from_rows(q: usize, n: usize, rows: Vec<Vec<(usize, usize)>>) -> Result<Self, Error> {
        if !q.is_power_of_two() || !(4..=256).contains(&q) {
            return Err(Error::OrderNotPowerOfTwo(q));
        }
        let mut out = Vec::with_capacity(rows.len());
        for (row, mut entries) in rows.into_iter().enumerate() {
            entries.sort_unstable_by_key(|&(c, _)| c);
            let mut checked = Vec::with_capacity(entries.len());
            for (k, &(col, coeff)) in entries.iter().enumerate() {
                if col >= n {
                    return Err(Error::ColumnOutOfRange { row, col, n });
                }
                if k > 0 && entries[k - 1].0 == col {
                    return Err(Error::DuplicateColumn { row, col });
                }
                if coeff == 0 {
                    return Err(Error::ZeroCoefficient { row, col });
                }
                if coeff >= q {
                    return Err(Error::CoefficientOutOfField {
                        row,
                        col,
                        value: coeff,
                        q,
                    });
                }
                checked.push(RowEntry {
                    col,
                    coeff: coeff as Symbol,
                });
            }
            out.push(checked);
        }
        Ok(ParityCheckMatrix { q, n, rows: out })
    }

    /// Field order q.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Number of columns (variable nodes).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows (check nodes).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<RowEntry>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[RowEntry] {
        &self.rows[i]
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Column view: for each column, the `(row, coefficient)` pairs in
    /// increasing row order.
    pub fn columns(&self) -> Vec<Vec<(usize, Symbol)>> {
        let mut cols = vec![Vec::new(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for e in row {
                cols[e.col].push((i, e.coeff));
            }
        }
        cols
    }

    /// Column degrees and row degrees.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut col_deg = vec![0usize; self.n];
        for row in &self.rows {
            for e in row {
                col_deg[e.col] += 1;
            }
        }
        let row_deg = self.rows.iter().map(Vec::len).collect();
        (col_deg, row_deg)
    }

    /// `Some((d_v, d_c))` when every column has degree `d_v` and every row
    /// degree `d_c`.
    pub fn regularity(&self) -> Option<(usize, usize)> {
        let (cols, rows) = self.degrees();
        let dv = *cols.first()?;
        let dc = *rows.first()?;
        if cols.iter().all(|&d| d == dv) && rows.iter().all(|&d| d == dc) {
            Some((dv, dc))
        } else {
            None
        }
    }

    /// Design rate `(n - m) / n`, assuming H has full rank.
    pub fn rate(&self) -> Rate {
        Rate::new(self.n.saturating_sub(self.m()), self.n)
    }

    /// `H x` over GF(q).
    pub fn syndrome(&self, x: &[Symbol], field: &Field) -> Result<Vec<Symbol>, Error> {
        self.check_field(field)?;
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        if let Some(&bad) = x.iter().find(|&&s| !field.contains(s)) {
            return Err(Error::SymbolOutOfField {
                value: bad as usize,
                q: self.q,
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(0, |acc, e| Field::add(acc, field.mul(e.coeff, x[e.col])))
            })
            .collect())
    }

    pub fn is_codeword(&self, x: &[Symbol], field: &Field) -> Result<bool, Error> {
        Ok(self.syndrome(x, field)?.iter().all(|&s| s == 0))
    }

    pub fn check_field(&self, field: &Field) -> Result<(), Error> {
        if field.order() != self.q {
            return Err(Error::FieldMismatch {
                code: self.q,
                field: field.order(),
            });
        }
        Ok(())
    }

    /// Same positions, coefficients redrawn uniformly from the nonzero
    /// elements of `field`. Deterministic in `seed`; the draw order is row
    /// major.
    pub fn with_random_coefficients(&self, field: &Field, seed: u64) -> ParityCheckMatrix {
        let mut rng = coefficient_rng(seed);
        let q = field.order();
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| RowEntry {
                        col: e.col,
                        coeff: rng.random_range(1..q) as Symbol,
                    })
                    .collect()
            })
            .collect();
        ParityCheckMatrix {
            q,
            n: self.n,
            rows,
        }
    }
}

fn coefficient_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Attempts per column before a restart of the whole placement.
pub const COLUMN_RETRIES: usize = 100;
/// Full restarts before giving up.
pub const CONSTRUCTION_RESTARTS: usize = 100;

/// Random regular (2, d_c) code with `n` columns and `m = 2n / d_c` rows.
///
/// Each column is an edge between two rows; placement favours rows with the
/// most free slots and never places two columns on the same row pair. The
/// edge positions depend only on `(n, d_c, seed)`, never on q, so the same
/// seed over different fields yields the same position structure.
pub fn build_regular_2dc(
    n: usize,
    d_c: usize,
    field: &Field,
    seed: u64,
) -> Result<ParityCheckMatrix, Error> {
    if d_c == 0 || !(2 * n).is_multiple_of(d_c) {
        return Err(Error::DegreeDivisibility { n, d_c });
    }
    let m = 2 * n / d_c;
    if m > n || m < 2 {
        return Err(Error::TooManyRows { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err = None;
    for _ in 0..CONSTRUCTION_RESTARTS {
        match place_columns(n, m, d_c, &mut rng) {
            Ok(pairs) => {
                let mut rows = vec![Vec::with_capacity(d_c); m];
                for (col, &(a, b)) in pairs.iter().enumerate() {
                    rows[a].push(RowEntry { col, coeff: 1 });
                    rows[b].push(RowEntry { col, coeff: 1 });
                }
                let positions = ParityCheckMatrix {
                    q: field.order(),
                    n,
                    rows,
                };
                return Ok(positions.with_random_coefficients(field, seed));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

fn place_columns(
    n: usize,
    m: usize,
    d_c: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>, Error> {
    let mut free = vec![d_c; m];
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d_c); m];
    let mut pairs = Vec::with_capacity(n);
    let mut cand = Vec::with_capacity(m);
    for column in 0..n {
        let mut placed = None;
        for attempt in 0..COLUMN_RETRIES {
            cand.clear();
            if attempt == 0 {
                let most = *free.iter().max().unwrap_or(&0);
                cand.extend((0..m).filter(|&r| free[r] == most && most > 0));
            } else {
                cand.extend((0..m).filter(|&r| free[r] > 0));
            }
            let Some(&r1) = cand.choose(rng) else { break };
            cand.clear();
            let ok = |r: usize| r != r1 && free[r] > 0 && !adj[r1].contains(&r);
            let most = (0..m).filter(|&r| ok(r)).map(|r| free[r]).max();
            if let Some(most) = most {
                cand.extend((0..m).filter(|&r| ok(r) && free[r] == most));
            }
            if let Some(&r2) = cand.choose(rng) {
                placed = Some((r1.min(r2), r1.max(r2)));
                break;
            }
        }
        let Some((a, b)) = placed else {
            return Err(Error::ConstructionFailed {
                column,
                attempts: COLUMN_RETRIES,
            });
        };
        free[a] -= 1;
        free[b] -= 1;
        adj[a].push(b);
        adj[b].push(a);
        pairs.push((a, b));
    }
    Ok(pairs)
}

/// One nonzero cell of a QC base matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QcCell {
    pub shift: usize,
    pub coeff: Symbol,
}

/// Base matrix of circulant blocks; `None` cells expand to zero blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QcBaseMatrix {
    rows_b: usize,
    cols_b: usize,
    circulant_size: usize,
    q: usize,
    cells: Vec<Option<QcCell>>,
}

impl QcBaseMatrix {
    /// `cells` is row major with `rows_b * cols_b` entries.
    pub fn new(
        rows_b: usize,
        cols_b: usize,
        circulant_size: usize,
        q: usize,
        cells: Vec<Option<QcCell>>,
    ) -> Result<Self, Error> {
        if cells.len() != rows_b * cols_b {
            return Err(Error::LengthMismatch {
                expected: rows_b * cols_b,
                got: cells.len(),
            });
        }
        if !q.is_power_of_two() || !(4..=256).contains(&q) {
            return Err(Error::OrderNotPowerOfTwo(q));
        }
        for (idx, cell) in cells.iter().enumerate() {
            if let Some(c) = cell {
                let (row, col) = (idx / cols_b, idx % cols_b);
                if c.shift >= circulant_size {
                    return Err(Error::ShiftOutOfRange {
                        shift: c.shift,
                        size: circulant_size,
                    });
                }
                if c.coeff == 0 {
                    return Err(Error::ZeroCoefficient { row, col });
                }
                if c.coeff as usize >= q {
                    return Err(Error::CoefficientOutOfField {
                        row,
                        col,
                        value: c.coeff as usize,
                        q,
                    });
                }
            }
        }
        Ok(QcBaseMatrix {
            rows_b,
            cols_b,
            circulant_size,
            q,
            cells,
        })
    }

    pub fn rows_b(&self) -> usize {
        self.rows_b
    }

    pub fn cols_b(&self) -> usize {
        self.cols_b
    }

    pub fn circulant_size(&self) -> usize {
        self.circulant_size
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<QcCell> {
        self.cells[row * self.cols_b + col]
    }

    /// Keeps only the first `rows` block rows (raises the rate while
    /// keeping column regularity when every cell is present).
    pub fn truncate_rows(&self, rows: usize) -> QcBaseMatrix {
        let rows = rows.min(self.rows_b);
        QcBaseMatrix {
            rows_b: rows,
            cols_b: self.cols_b,
            circulant_size: self.circulant_size,
            q: self.q,
            cells: self.cells[..rows * self.cols_b].to_vec(),
        }
    }

    /// Expands every cell `(s, c)` into a block with `c` at `(r, (r + s) mod Z)`.
    pub fn expand(&self) -> ParityCheckMatrix {
        let z = self.circulant_size;
        let mut rows = Vec::with_capacity(self.rows_b * z);
        for bi in 0..self.rows_b {
            for r in 0..z {
                let mut row = Vec::new();
                for bj in 0..self.cols_b {
                    if let Some(cell) = self.cell(bi, bj) {
                        row.push(RowEntry {
                            col: bj * z + (r + cell.shift) % z,
                            coeff: cell.coeff,
                        });
                    }
                }
                rows.push(row);
            }
        }
        ParityCheckMatrix {
            q: self.q,
            n: self.cols_b * z,
            rows,
        }
    }
}

/// Expands `base` into its full parity-check matrix over `field`.
pub fn expand_qc(base: &QcBaseMatrix, field: &Field) -> Result<ParityCheckMatrix, Error> {
    if base.q != field.order() {
        return Err(Error::FieldMismatch {
            code: base.q,
            field: field.order(),
        });
    }
    Ok(base.expand())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: usize) -> Field {
        Field::with_order(q).unwrap()
    }

    #[test]
    fn regular_192_gf32() {
        let f = gf(32);
        let h = build_regular_2dc(192, 4, &f, 1).unwrap();
        assert_eq!(h.m(), 96);
        assert_eq!(h.regularity(), Some((2, 4)));
        assert_eq!(h.rate(), Rate::new(1, 2));
        assert_no_repeated_row_pairs(&h);
    }

    #[test]
    fn regular_too_small_fails() {
        let err = build_regular_2dc(4, 4, &gf(4), 1).unwrap_err();
        assert!(matches!(err, Error::ConstructionFailed { .. }), "{err:?}");
    }

    #[test]
    fn regular_six_columns() {
        let h = build_regular_2dc(6, 3, &gf(4), 7).unwrap();
        assert_eq!(h.m(), 4);
        let (cols, rows) = h.degrees();
        assert_eq!(cols, vec![2; 6]);
        assert_eq!(rows, vec![3; 4]);
        assert_no_repeated_row_pairs(&h);
    }

    #[test]
    fn regular_divisibility() {
        assert_eq!(
            build_regular_2dc(5, 4, &gf(4), 1),
            Err(Error::DegreeDivisibility { n: 5, d_c: 4 })
        );
    }

    #[test]
    fn positions_independent_of_q() {
        let a = build_regular_2dc(96, 4, &gf(16), 3).unwrap();
        let b = build_regular_2dc(96, 4, &gf(64), 3).unwrap();
        for (ra, rb) in a.rows().iter().zip(b.rows()) {
            let ca: Vec<_> = ra.iter().map(|e| e.col).collect();
            let cb: Vec<_> = rb.iter().map(|e| e.col).collect();
            assert_eq!(ca, cb);
        }
    }

    fn assert_no_repeated_row_pairs(h: &ParityCheckMatrix) {
        let cols = h.columns();
        let mut pairs: Vec<_> = cols.iter().map(|c| (c[0].0, c[1].0)).collect();
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        assert_eq!(before, pairs.len());
    }

    #[test]
    fn qc_single_cell() {
        let base = QcBaseMatrix::new(1, 1, 3, 4, vec![Some(QcCell { shift: 1, coeff: 2 })]).unwrap();
        let h = expand_qc(&base, &gf(4)).unwrap();
        assert_eq!(h.m(), 3);
        assert_eq!(h.n(), 3);
        let expect = [(0, 1), (1, 2), (2, 0)];
        for (r, c) in expect {
            assert_eq!(h.row(r), &[RowEntry { col: c, coeff: 2 }]);
        }
    }

    #[test]
    fn qc_absent_cell() {
        let base = QcBaseMatrix::new(1, 2, 2, 4, vec![None, Some(QcCell { shift: 0, coeff: 1 })]).unwrap();
        let h = base.expand();
        let (cols, _) = h.degrees();
        assert_eq!(cols, vec![0, 0, 1, 1]);
    }

    #[test]
    fn qc_2x4() {
        let cells = (0..8)
            .map(|i| Some(QcCell { shift: i % 4, coeff: 1 + (i % 3) as u8 }))
            .collect();
        let base = QcBaseMatrix::new(2, 4, 4, 4, cells).unwrap();
        let h = base.expand();
        assert_eq!((h.m(), h.n()), (8, 16));
        assert_eq!(h.regularity(), Some((2, 4)));
    }

    #[test]
    fn qc_bad_shift() {
        let err = QcBaseMatrix::new(1, 1, 3, 4, vec![Some(QcCell { shift: 3, coeff: 1 })]);
        assert_eq!(err, Err(Error::ShiftOutOfRange { shift: 3, size: 3 }));
    }

    #[test]
    fn rates() {
        let h = ParityCheckMatrix::from_rows(4, 16, vec![vec![(0, 1)], vec![(1, 1)]]).unwrap();
        assert_eq!(h.rate(), Rate::new(7, 8));
        let sq = ParityCheckMatrix::from_rows(4, 2, vec![vec![(0, 1)], vec![(1, 1)]]).unwrap();
        assert_eq!(sq.rate().num, 0);
        assert_eq!(sq.rate().as_f64(), 0.0);
    }

    #[test]
    fn syndrome_examples() {
        let f = gf(4);
        let h = ParityCheckMatrix::from_rows(4, 2, vec![vec![(0, 1), (1, 2)]]).unwrap();
        assert_eq!(h.syndrome(&[0, 0], &f).unwrap(), vec![0]);
        assert_eq!(h.syndrome(&[3, 2], &f).unwrap(), vec![0]);
        assert_eq!(h.syndrome(&[1, 0], &f).unwrap(), vec![1]);
        assert_eq!(
            h.syndrome(&[1], &f),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn from_rows_validation() {
        assert_eq!(
            ParityCheckMatrix::from_rows(4, 2, vec![vec![(0, 0)]]),
            Err(Error::ZeroCoefficient { row: 0, col: 0 })
        );
        assert!(matches!(
            ParityCheckMatrix::from_rows(4, 2, vec![vec![(0, 4)]]),
            Err(Error::CoefficientOutOfField { .. })
        ));
        assert!(matches!(
            ParityCheckMatrix::from_rows(4, 2, vec![vec![(2, 1)]]),
            Err(Error::ColumnOutOfRange { .. })
        ));
        assert!(matches!(
            ParityCheckMatrix::from_rows(4, 2, vec![vec![(1, 1), (1, 2)]]),
            Err(Error::DuplicateColumn { .. })
        ));
    }
}
