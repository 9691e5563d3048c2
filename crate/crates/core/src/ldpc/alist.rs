//! MacKay `alist` reader and writer.
//!
//! Layout: `N M`, the maximum column and row degrees, the `N` column degrees,
//! the `M` row degrees, then one line per column and one line per row with
//! 1-based indices. Zero entries are padding and are ignored.

use std::fmt::Write as _;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, integers).
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (idx, line) in self.inner.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let ints = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::parse(idx + 1, format!("{what}: {t:?} is not a non-negative integer")))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((idx + 1, ints));
        }
        Err(Error::parse(0, format!("unexpected end of file while reading {what}")))
    }
}

fn read_lists(
    lines: &mut Lines<'_>,
    count: usize,
    degrees: &[usize],
    bound: usize,
    what: &str,
) -> Result<Vec<(usize, Vec<usize>)>> {
    (0..count)
        .map(|k| {
            let (line, ints) = lines.next_ints(what)?;
            let entries: Vec<usize> = ints.into_iter().filter(|&x| x != 0).collect();
            if entries.len() != degrees[k] {
                return Err(Error::parse(
                    line,
                    format!(
                        "{what} {k} lists {} entries but its degree is {}",
                        entries.len(),
                        degrees[k]
                    ),
                ));
            }
            if let Some(&bad) = entries.iter().find(|&&x| x > bound) {
                return Err(Error::parse(
                    line,
                    format!("{what} {k}: index {bad} out of range 1..={bound}"),
                ));
            }
            Ok((line, entries.into_iter().map(|x| x - 1).collect()))
        })
        .collect()
}

impl ParityCheckMatrix {
    /// Parses an alist document. Row and column lists must describe the same
    /// edge set.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = Lines {
            inner: text.lines().enumerate(),
        };
        let (line, header) = lines.next_ints("header")?;
        let [n, m] = header[..] else {
            return Err(Error::parse(line, "header must be `N M`"));
        };
        if n == 0 || m == 0 {
            return Err(Error::parse(line, "matrix dimensions must be positive"));
        }
        let (line, maxes) = lines.next_ints("maximum degrees")?;
        let [max_col, max_row] = maxes[..] else {
            return Err(Error::parse(line, "expected two maximum degrees"));
        };
        let (line, col_deg) = lines.next_ints("column degrees")?;
        if col_deg.len() != n {
            return Err(Error::parse(
                line,
                format!("expected {n} column degrees, got {}", col_deg.len()),
            ));
        }
        if col_deg.iter().any(|&d| d > max_col) {
            return Err(Error::parse(
                line,
                format!("a column degree exceeds the maximum {max_col}"),
            ));
        }
        let (line, row_deg) = lines.next_ints("row degrees")?;
        if row_deg.len() != m {
            return Err(Error::parse(
                line,
                format!("expected {m} row degrees, got {}", row_deg.len()),
            ));
        }
        if row_deg.iter().any(|&d| d > max_row) {
            return Err(Error::parse(
                line,
                format!("a row degree exceeds the maximum {max_row}"),
            ));
        }

        let col_lists = read_lists(&mut lines, n, &col_deg, m, "column")?;
        let row_lists = read_lists(&mut lines, m, &row_deg, n, "row")?;

        let mut from_cols = vec![Vec::new(); m];
        for (v, (_, checks)) in col_lists.iter().enumerate() {
            for &c in checks {
                from_cols[c].push(v);
            }
        }
        for (c, ((line, vars), mut expected)) in row_lists.into_iter().zip(from_cols).enumerate() {
            let mut vars = vars;
            vars.sort_unstable();
            expected.sort_unstable();
            if vars != expected {
                return Err(Error::parse(line, format!("row {c} disagrees with the column lists")));
            }
        }
        let mut rows = vec![Vec::new(); m];
        for (v, (_, checks)) in col_lists.into_iter().enumerate() {
            for c in checks {
                rows[c].push(v);
            }
        }
        ParityCheckMatrix::from_rows(n, rows).map_err(|e| Error::parse(0, e.to_string()))
    }

    /// Writes the matrix as an alist document with zero padding.
    pub fn to_alist(&self) -> String {
        let max_col = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n(), self.m());
        let _ = writeln!(out, "{max_col} {max_row}");
        let _ = writeln!(out, "{}", join(self.cols.iter().map(Vec::len)));
        let _ = writeln!(out, "{}", join(self.rows.iter().map(Vec::len)));
        for col in &self.cols {
            let _ = writeln!(out, "{}", join(padded(col, max_col)));
        }
        for row in &self.rows {
            let _ = writeln!(out, "{}", join(padded(row, max_row)));
        }
        out
    }
}

fn join(xs: impl Iterator<Item = usize>) -> String {
    xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// 1-based indices followed by zero padding up to `width`.
fn padded(list: &[usize], width: usize) -> impl Iterator<Item = usize> + '_ {
    list.iter().map(|x| x + 1).chain(std::iter::repeat(0)).take(width)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n";

    #[test]
    fn toy_matrix() {
        let h = ParityCheckMatrix::from_alist(TOY).unwrap();
        assert_eq!((h.m(), h.n(), h.num_edges()), (2, 3, 4));
        assert_eq!(h.row(0), &[0, 1]);
        assert_eq!(h.row(1), &[1, 2]);
    }

    #[test]
    fn round_trip() {
        let h = ParityCheckMatrix::from_alist(TOY).unwrap();
        assert_eq!(ParityCheckMatrix::from_alist(&h.to_alist()).unwrap(), h);
    }

    #[test]
    fn inconsistent_rows_name_the_line() {
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 3\n2 3\n";
        match ParityCheckMatrix::from_alist(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(
            ParityCheckMatrix::from_alist("3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            ParityCheckMatrix::from_alist("3 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        // index out of range in column 0
        let bad = "3 2\n2 2\n1 2 1\n2 2\n3 0\n1 2\n2 0\n1 2\n2 3\n";
        assert!(matches!(
            ParityCheckMatrix::from_alist(bad),
            Err(Error::Parse { line: 5, .. })
        ));
        // degree mismatch
        let bad = "3 2\n2 2\n1 2 1\n2 2\n1 2\n1 2\n2 0\n1 2\n2 3\n";
        assert!(matches!(
            ParityCheckMatrix::from_alist(bad),
            Err(Error::Parse { line: 5, .. })
        ));
        // truncated
        assert!(ParityCheckMatrix::from_alist("3 2\n2 2\n1 2 1\n2 2\n1 0\n").is_err());
    }
}
