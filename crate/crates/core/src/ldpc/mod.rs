//! Binary LDPC codes: sparse parity-check matrices, systematic encoding over
//! GF(2) and belief-propagation decoding.

mod alist;
mod decoder;
mod encoder;

pub use decoder::{
    boxplus, check_node_update, decode, decode_min_sum, decode_spa, CheckRule, DecodeOutcome, DEFAULT_MAX_ITERATIONS,
    DEFAULT_MIN_SUM_SCALE, TANH_CLAMP,
};
pub use encoder::LdpcCode;

use crate::error::{Error, Result};

/// Sparse binary `M x N` parity-check matrix.
///
/// Both adjacency views are kept, together with a flattened edge layout
/// (edges ordered by check node) used by the decoders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    /// Variable index of each edge; edges are grouped by check.
    edge_var: Vec<u32>,
    /// `edge_var[check_start[c]..check_start[c + 1]]` are the edges of check `c`.
    check_start: Vec<u32>,
    /// Edge indices grouped by variable.
    var_edges: Vec<u32>,
    var_start: Vec<u32>,
}

impl ParityCheckMatrix {
    /// Builds a matrix with `n` columns from per-check variable lists.
    ///
    /// Every check and every variable must take part in at least one edge,
    /// and no edge may be listed twice.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut rows = rows;
        let mut cols = vec![Vec::new(); n];
        for (c, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::invalid(format!("check {c} has no variables")));
            }
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::invalid(format!("duplicate edge ({c}, {})", w[0])));
                }
            }
            for &v in row.iter() {
                if v >= n {
                    return Err(Error::invalid(format!("check {c} references variable {v} >= N = {n}")));
                }
                cols[v].push(c);
            }
        }
        if let Some(v) = cols.iter().position(Vec::is_empty) {
            return Err(Error::invalid(format!("variable {v} takes part in no check")));
        }

        let mut edge_var = Vec::new();
        let mut check_start = vec![0u32];
        let mut edges_of_var: Vec<Vec<u32>> = vec![Vec::new(); n];
        for row in &rows {
            for &v in row {
                edges_of_var[v].push(edge_var.len() as u32);
                edge_var.push(v as u32);
            }
            check_start.push(edge_var.len() as u32);
        }
        let mut var_edges = Vec::with_capacity(edge_var.len());
        let mut var_start = vec![0u32];
        for edges in edges_of_var {
            var_edges.extend(edges);
            var_start.push(var_edges.len() as u32);
        }

        Ok(Self {
            n,
            rows,
            cols,
            edge_var,
            check_start,
            var_edges,
            var_start,
        })
    }

    /// Builds a matrix from a dense 0/1 row-major description.
    pub fn from_dense(dense: &[Vec<u8>]) -> Result<Self> {
        let n = dense.first().map_or(0, Vec::len);
        if dense.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("ragged dense matrix"));
        }
        let rows = dense
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(j, _)| j).collect())
            .collect();
        Self::from_rows(n, rows)
    }

    /// Number of columns (code length).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows (checks).
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Variables participating in check `c`, ascending.
    pub fn row(&self, c: usize) -> &[usize] {
        &self.rows[c]
    }

    /// Checks that variable `v` participates in, ascending.
    pub fn col(&self, v: usize) -> &[usize] {
        &self.cols[v]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn contains(&self, c: usize, v: usize) -> bool {
        self.rows[c].binary_search(&v).is_ok()
    }

    #[inline]
    pub(crate) fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c] as usize..self.check_start[c + 1] as usize
    }

    #[inline]
    pub(crate) fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    #[inline]
    pub(crate) fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_start[v] as usize..self.var_start[v + 1] as usize]
    }

    /// Parity of `word` restricted to each check.
    pub fn syndrome(&self, word: &[u8]) -> Result<Vec<u8>> {
        self.check_len(word.len())?;
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &v| acc ^ (word[v] & 1)))
            .collect())
    }

    /// True when every check is satisfied.
    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n
            && self
                .rows
                .iter()
                .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ (word[v] & 1)) == 0)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::invalid(format!(
                "expected a word of length {}, got {len}",
                self.n
            )));
        }
        Ok(())
    }
}
