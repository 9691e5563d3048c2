//! Constellation points on the probability simplex.
//!
//! A composite letter is a mixture of the four nucleotides, described by a
//! [`ProbabilityQuartet`] in the order A, C, T, G. A [`MappingTable`] assigns
//! each `L`-bit pattern to one such point; the table index of a point *is* its
//! bit pattern read as a big-endian integer, so the entries are always kept in
//! natural binary order.
//!
//! Channel impairments move the points the receiver should expect. The
//! substitution and insertion/deletion adjustments below produce the
//! "effective" points used by the demapper in place of the designed ones.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{no_shift_probability, ChannelSpec};
use crate::error::{Error, Result};

/// Tolerance on the simplex sum of a quartet.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Per-nucleotide probabilities (A, C, T, G).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbabilityQuartet([f64; 4]);

impl ProbabilityQuartet {
    /// Validates and wraps four probabilities.
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0) {
            return Err(Error::invalid(format!(
                "quartet components must lie in [0, 1], got {p:?}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("quartet must sum to 1, got {p:?} (sum {sum})")));
        }
        Ok(Self(p))
    }

    /// The point that puts all its mass on nucleotide `index`.
    pub fn pure(index: usize) -> Self {
        let mut p = [0.0; 4];
        p[index] = 1.0;
        Self(p)
    }

    pub fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn get(&self, nucleotide: usize) -> f64 {
        self.0[nucleotide]
    }

    /// Empirical frequencies `k_j / n` of a count vector. `None` when `n = 0`.
    pub fn from_counts(counts: [u32; 4]) -> Option<Self> {
        let n: u32 = counts.iter().sum();
        if n == 0 {
            return None;
        }
        let n = f64::from(n);
        Some(Self(counts.map(|k| f64::from(k) / n)))
    }

    /// Component-wise substitution update
    /// `(1 - eps) * p_j + (eps / 3) * (1 - p_j)`.
    pub fn substitution_adjust(&self, epsilon: f64) -> Result<Self> {
        check_probability("epsilon", epsilon)?;
        let p = self.0.map(|p| (1.0 - epsilon) * p + epsilon / 3.0 * (1.0 - p));
        Self::new(p)
    }
}

impl fmt::Display for ProbabilityQuartet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, c, t, g] = self.0;
        write!(f, "({a}, {c}, {t}, {g})")
    }
}

pub(crate) fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::invalid(format!("{name} must lie in [0, 1], got {value}")));
    }
    Ok(())
}

/// Insertion/deletion update of a single point.
///
/// Mixes the point with the uniform quartet according to how many of the
/// `n_hat` retained strands are shifted at this position: with `t` shifted
/// strands (binomially distributed with success probability `1 - p_ns`) the
/// expected observation is `t/n_hat * uniform + (n_hat - t)/n_hat * point`.
/// The sum over `t` is evaluated term by term.
pub fn id_adjust(point: &ProbabilityQuartet, p_ns: f64, n_hat: usize) -> Result<ProbabilityQuartet> {
    check_probability("p_ns", p_ns)?;
    if n_hat == 0 {
        return Err(Error::invalid("n_hat must be at least 1"));
    }
    let n = n_hat as i32;
    let nf = n_hat as f64;
    let mut acc = [0.0f64; 4];
    let mut binom = 1.0f64;
    for t in 0..=n {
        if t > 0 {
            binom = binom * f64::from(n - t + 1) / f64::from(t);
        }
        let weight = binom * p_ns.powi(n - t) * (1.0 - p_ns).powi(t);
        let shifted = f64::from(t) / nf;
        let kept = f64::from(n - t) / nf;
        for (a, p) in acc.iter_mut().zip(point.as_array()) {
            *a += weight * (0.25 * shifted + kept * p);
        }
    }
    ProbabilityQuartet::new(acc.map(|x| x.clamp(0.0, 1.0)))
}

/// Bijection between `L`-bit patterns and constellation points.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingTable {
    bits_per_symbol: usize,
    points: Vec<ProbabilityQuartet>,
}

impl MappingTable {
    /// Largest supported `L`; keeps label arithmetic in a `u32`.
    pub const MAX_BITS_PER_SYMBOL: usize = 16;

    /// Builds a table whose entry `s` is the point for bit pattern `s`.
    pub fn new(bits_per_symbol: usize, points: Vec<ProbabilityQuartet>) -> Result<Self> {
        if bits_per_symbol == 0 || bits_per_symbol > Self::MAX_BITS_PER_SYMBOL {
            return Err(Error::invalid(format!(
                "bits per symbol must be in 1..={}, got {bits_per_symbol}",
                Self::MAX_BITS_PER_SYMBOL
            )));
        }
        if points.len() != 1 << bits_per_symbol {
            return Err(Error::invalid(format!(
                "a table with L = {bits_per_symbol} needs {} points, got {}",
                1usize << bits_per_symbol,
                points.len()
            )));
        }
        Ok(Self {
            bits_per_symbol,
            points,
        })
    }

    /// The eight-point `L = 3` mapping: pure bases for `000..011`, then the
    /// half/half mixtures AC, TG, AT, CG for `100..111`.
    pub fn table_l3() -> Self {
        let h = 0.5;
        let points = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [h, h, 0.0, 0.0],
            [0.0, 0.0, h, h],
            [h, 0.0, h, 0.0],
            [0.0, h, 0.0, h],
        ];
        Self::new(3, points.into_iter().map(ProbabilityQuartet).collect()).expect("static table")
    }

    /// The sixteen-point `L = 4` mapping.
    ///
    /// Classes in order: the 4 pure bases, the 6 half/half pairs, the
    /// uniform point, the 4 one-third triples, and `(2/3, 1/3, 0, 0)`.
    /// Within a class the supports are enumerated lexicographically over
    /// (A, C, T, G); labels `0000..1111` follow that order.
    pub fn table_l4() -> Self {
        let mut points = Vec::with_capacity(16);
        for i in 0..4 {
            points.push(ProbabilityQuartet::pure(i));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                let mut p = [0.0; 4];
                p[i] = 0.5;
                p[j] = 0.5;
                points.push(ProbabilityQuartet(p));
            }
        }
        points.push(ProbabilityQuartet::uniform());
        for skip in (0..4).rev() {
            let mut p = [1.0 / 3.0; 4];
            p[skip] = 0.0;
            points.push(ProbabilityQuartet(p));
        }
        points.push(ProbabilityQuartet([2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0]));
        Self::new(4, points).expect("static table")
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Number of points, `2^L`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ProbabilityQuartet] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &ProbabilityQuartet {
        &self.points[index]
    }

    /// Bit `l` (0-based, most significant first) of the label of entry `index`.
    #[inline]
    pub fn label_bit(&self, index: usize, l: usize) -> u8 {
        ((index >> (self.bits_per_symbol - 1 - l)) & 1) as u8
    }

    pub fn label(&self, index: usize) -> Vec<u8> {
        (0..self.bits_per_symbol).map(|l| self.label_bit(index, l)).collect()
    }

    /// Table index of a bit pattern.
    pub fn index_of(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits_per_symbol {
            return Err(Error::invalid(format!(
                "expected {} bits, got {}",
                self.bits_per_symbol,
                bits.len()
            )));
        }
        bits.iter().try_fold(0usize, |acc, &b| match b {
            0 | 1 => Ok((acc << 1) | usize::from(b)),
            _ => Err(Error::invalid(format!("bit values must be 0 or 1, got {b}"))),
        })
    }

    pub fn map_bits(&self, bits: &[u8]) -> Result<&ProbabilityQuartet> {
        Ok(&self.points[self.index_of(bits)?])
    }

    /// Applies the substitution update to every point; labels are unchanged.
    pub fn substitution_adjust(&self, epsilon: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| p.substitution_adjust(epsilon))
            .collect::<Result<_>>()?;
        Ok(Self {
            bits_per_symbol: self.bits_per_symbol,
            points,
        })
    }

    /// Applies the insertion/deletion update to every point.
    pub fn id_adjust(&self, p_ns: f64, n_hat: usize) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| id_adjust(p, p_ns, n_hat))
            .collect::<Result<_>>()?;
        Ok(Self {
            bits_per_symbol: self.bits_per_symbol,
            points,
        })
    }

    /// Serializes the table as `{ "L": .., "entries": [{ "bits": "010", "p": [..] }] }`.
    ///
    /// Probabilities that are small-denominator rationals are written as
    /// `"p/q"` strings, anything else as the shortest round-tripping decimal.
    pub fn to_json(&self) -> String {
        let doc = TableDoc {
            bits_per_symbol: self.bits_per_symbol,
            entries: self
                .points
                .iter()
                .enumerate()
                .map(|(s, p)| EntryDoc {
                    bits: self.label(s).iter().map(|b| char::from(b'0' + b)).collect(),
                    p: p.0.map(|x| ProbText::Text(format_probability(x))),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }

    /// Parses the document written by [`MappingTable::to_json`]. Entries may
    /// appear in any order; probabilities may be numbers, decimal strings or
    /// `"p/q"` rationals.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(text)?;
        let l = doc.bits_per_symbol;
        if l == 0 || l > Self::MAX_BITS_PER_SYMBOL {
            return Err(Error::invalid(format!("unsupported L = {l}")));
        }
        let mut slots: Vec<Option<ProbabilityQuartet>> = vec![None; 1 << l];
        for entry in &doc.entries {
            if entry.bits.len() != l || !entry.bits.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::invalid(format!(
                    "bit pattern {:?} is not an {l}-bit string",
                    entry.bits
                )));
            }
            let index = usize::from_str_radix(&entry.bits, 2).expect("checked binary");
            if slots[index].is_some() {
                return Err(Error::invalid(format!("duplicate bit pattern {}", entry.bits)));
            }
            let mut p = [0.0; 4];
            for (dst, src) in p.iter_mut().zip(&entry.p) {
                *dst = src.value()?;
            }
            slots[index] = Some(ProbabilityQuartet::new(p)?);
        }
        let points = slots
            .into_iter()
            .enumerate()
            .map(|(s, p)| p.ok_or_else(|| Error::invalid(format!("missing entry for pattern {s:0l$b}"))))
            .collect::<Result<_>>()?;
        Self::new(l, points)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    #[serde(rename = "L")]
    bits_per_symbol: usize,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    bits: String,
    p: [ProbText; 4],
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProbText {
    Number(f64),
    Text(String),
}

impl ProbText {
    fn value(&self) -> Result<f64> {
        match self {
            ProbText::Number(x) => Ok(*x),
            ProbText::Text(s) => parse_probability(s),
        }
    }
}

/// Parses `"0.25"`, `"1"` or `"1/3"`.
pub fn parse_probability(text: &str) -> Result<f64> {
    let bad = || Error::invalid(format!("cannot parse probability {text:?}"));
    match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            Ok(num / den)
        }
        None => text.trim().parse().map_err(|_| bad()),
    }
}

fn format_probability(x: f64) -> String {
    for den in 1u32..=64 {
        let num = (x * f64::from(den)).round();
        if num / f64::from(den) == x {
            return if den == 1 {
                format!("{num}")
            } else {
                format!("{num}/{den}")
            };
        }
    }
    format!("{x}")
}

/// Splits a codeword into consecutive `L`-bit segments.
pub fn segment_codeword(codeword: &[u8], bits_per_symbol: usize) -> Result<Vec<&[u8]>> {
    if bits_per_symbol == 0 || !codeword.len().is_multiple_of(bits_per_symbol) {
        return Err(Error::invalid(format!(
            "codeword length {} is not a multiple of L = {bits_per_symbol}",
            codeword.len()
        )));
    }
    Ok(codeword.chunks_exact(bits_per_symbol).collect())
}

/// Maps every `L`-bit segment of a codeword to its point.
pub fn map_codeword(table: &MappingTable, codeword: &[u8]) -> Result<Vec<ProbabilityQuartet>> {
    segment_codeword(codeword, table.bits_per_symbol())?
        .into_iter()
        .map(|seg| table.map_bits(seg).copied())
        .collect()
}

/// One mapping table per composite position.
///
/// Position-independent channels share a single table across all positions.
#[derive(Clone, Debug)]
pub struct EffectiveConstellation {
    per_position: Vec<Arc<MappingTable>>,
}

impl EffectiveConstellation {
    pub fn uniform(table: Arc<MappingTable>, positions: usize) -> Self {
        Self {
            per_position: vec![table; positions],
        }
    }

    pub fn from_tables(tables: Vec<Arc<MappingTable>>) -> Self {
        Self { per_position: tables }
    }

    /// Position-dependent insertion/deletion tables from precomputed no-shift
    /// probabilities (one per position).
    pub fn insertion_deletion(table: &MappingTable, no_shift: &[f64], n_hat: usize) -> Result<Self> {
        let tables = no_shift
            .iter()
            .map(|&p_ns| table.id_adjust(p_ns, n_hat).map(Arc::new))
            .collect::<Result<_>>()?;
        Ok(Self { per_position: tables })
    }

    pub fn len(&self) -> usize {
        self.per_position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_position.is_empty()
    }

    pub fn table(&self, position: usize) -> &MappingTable {
        &self.per_position[position]
    }

    pub fn tables(&self) -> &[Arc<MappingTable>] {
        &self.per_position
    }
}

/// Channel-adjusted constellation for `positions` composite positions.
///
/// `n_hat` is the number of retained strands and only matters for the
/// insertion/deletion channel.
pub fn build_effective(
    table: &MappingTable,
    channel: &ChannelSpec,
    positions: usize,
    n_hat: usize,
) -> Result<EffectiveConstellation> {
    channel.validate()?;
    match *channel {
        ChannelSpec::Sampling => Ok(EffectiveConstellation::uniform(Arc::new(table.clone()), positions)),
        ChannelSpec::Substitution { epsilon } => Ok(EffectiveConstellation::uniform(
            Arc::new(table.substitution_adjust(epsilon)?),
            positions,
        )),
        ChannelSpec::InsertionDeletion { p_i, p_d } => {
            let no_shift = (1..=positions)
                .map(|i| no_shift_probability(positions, i, p_i, p_d))
                .collect::<Result<Vec<_>>>()?;
            EffectiveConstellation::insertion_deletion(table, &no_shift, n_hat)
        }
    }
}
