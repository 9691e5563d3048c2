//! Systematic encoding derived from the parity-check matrix by Gaussian
//! elimination over GF(2).

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

type Word = u64;
const WORD_BITS: usize = Word::BITS as usize;

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitRow(Vec<Word>);

impl BitRow {
    fn zeros(len: usize) -> Self {
        Self(vec![0; len.div_ceil(WORD_BITS)])
    }

    #[inline]
    fn get(&self, i: usize) -> bool {
        (self.0[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i / WORD_BITS] |= 1 << (i % WORD_BITS);
    }

    fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }

    #[inline]
    fn dot(&self, other: &BitRow) -> u8 {
        let ones: u32 = self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum();
        (ones & 1) as u8
    }
}

/// An LDPC code with a systematic encoder.
///
/// Elimination reduces `H` to `[A | I]` after the column permutation
/// `column_permutation` (information columns first, then the pivot columns).
/// In permuted coordinates the generator is `[I | A^T]`.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    h: ParityCheckMatrix,
    rank: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// `parity_rows[i]` selects the message bits summed into `parity_positions[i]`.
    parity_rows: Vec<BitRow>,
}

impl LdpcCode {
    /// Derives the encoder. Rank deficiency of `H` is allowed and simply
    /// enlarges `K = N - rank(H)`.
    ///
    /// Pivots are searched from the last column backwards so that codes with a
    /// parity part on the right keep their information bits in place.
    pub fn new(h: ParityCheckMatrix) -> Self {
        let n = h.n();
        let mut rows: Vec<BitRow> = h
            .rows()
            .iter()
            .map(|r| {
                let mut b = BitRow::zeros(n);
                r.iter().for_each(|&v| b.set(v));
                b
            })
            .collect();

        let mut pivot_cols = Vec::new();
        let mut is_pivot = vec![false; n];
        let mut rank = 0;
        for col in (0..n).rev() {
            if rank == rows.len() {
                break;
            }
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.get(col) {
                    row.xor_assign(&pivot);
                }
            }
            pivot_cols.push(col);
            is_pivot[col] = true;
            rank += 1;
        }
        rows.truncate(rank);

        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let parity_rows = rows
            .iter()
            .map(|row| {
                let mut sel = BitRow::zeros(info_positions.len());
                for (j, &c) in info_positions.iter().enumerate() {
                    if row.get(c) {
                        sel.set(j);
                    }
                }
                sel
            })
            .collect();

        Self {
            h,
            rank,
            info_positions,
            parity_positions: pivot_cols,
            parity_rows,
        }
    }

    pub fn parity_check(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    /// Message length `N - rank(H)`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    /// GF(2) rank of `H`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Codeword positions that carry the message bits, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Permutation taking `H` to `[A | I]`: information columns, then pivots.
    pub fn column_permutation(&self) -> Vec<usize> {
        self.info_positions
            .iter()
            .chain(&self.parity_positions)
            .copied()
            .collect()
    }

    /// Encodes a `K`-bit message into an `N`-bit codeword.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k() {
            return Err(Error::invalid(format!(
                "expected a message of {} bits, got {}",
                self.k(),
                message.len()
            )));
        }
        let mut packed = BitRow::zeros(self.k());
        for (j, &b) in message.iter().enumerate() {
            match b {
                0 => {}
                1 => packed.set(j),
                _ => return Err(Error::invalid(format!("bit values must be 0 or 1, got {b}"))),
            }
        }
        let mut word = vec![0u8; self.n()];
        for (&pos, &b) in self.info_positions.iter().zip(message) {
            word[pos] = b;
        }
        for (&pos, sel) in self.parity_positions.iter().zip(&self.parity_rows) {
            word[pos] = sel.dot(&packed);
        }
        Ok(word)
    }

    /// Reads the message back from the systematic positions of a word.
    pub fn extract_message(&self, word: &[u8]) -> Result<Vec<u8>> {
        if word.len() != self.n() {
            return Err(Error::invalid(format!(
                "expected a word of length {}, got {}",
                self.n(),
                word.len()
            )));
        }
        Ok(self.info_positions.iter().map(|&p| word[p]).collect())
    }

    /// Dense `K x N` generator matrix in the original column order.
    pub fn generator_matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k())
            .map(|j| {
                let mut unit = vec![0u8; self.k()];
                unit[j] = 1;
                self.encode(&unit).expect("unit message has length K")
            })
            .collect()
    }
}
