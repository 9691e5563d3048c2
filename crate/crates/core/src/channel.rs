//! Strand synthesis, corruption and sequencing.
//!
//! The physical pipeline is: synthesize `n` strands whose base at position
//! `i` is drawn from the `i`-th composite letter, optionally pass each base
//! through a substitution or insertion/deletion channel, keep only strands of
//! the nominal length, and tally the nucleotides seen at every position.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::{check_probability, ProbabilityQuartet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Nucleotide {
    A = 0,
    C = 1,
    T = 2,
    G = 3,
}

impl Nucleotide {
    pub const ALL: [Nucleotide; 4] = [Nucleotide::A, Nucleotide::C, Nucleotide::T, Nucleotide::G];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'A' => Some(Nucleotide::A),
            'C' => Some(Nucleotide::C),
            'T' => Some(Nucleotide::T),
            'G' => Some(Nucleotide::G),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Nucleotide::A => 'A',
            Nucleotide::C => 'C',
            Nucleotide::T => 'T',
            Nucleotide::G => 'G',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Strand(pub Vec<Nucleotide>);

impl Strand {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bases(&self) -> &[Nucleotide] {
        &self.0
    }
}

impl std::str::FromStr for Strand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| Nucleotide::from_char(c).ok_or_else(|| Error::invalid(format!("not a nucleotide: {c:?}"))))
            .collect::<Result<Vec<_>>>()
            .map(Strand)
    }
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{}", b.as_char()))
    }
}

/// Strands of a common nominal length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrandPool {
    strands: Vec<Strand>,
    nominal_length: usize,
}

impl StrandPool {
    /// Wraps strands that must all have length `nominal_length`.
    pub fn new(strands: Vec<Strand>, nominal_length: usize) -> Result<Self> {
        if let Some(bad) = strands.iter().find(|s| s.len() != nominal_length) {
            return Err(Error::invalid(format!(
                "strand of length {} in a pool of nominal length {nominal_length}",
                bad.len()
            )));
        }
        Ok(Self {
            strands,
            nominal_length,
        })
    }

    pub fn strands(&self) -> &[Strand] {
        &self.strands
    }

    pub fn into_strands(self) -> Vec<Strand> {
        self.strands
    }

    pub fn nominal_length(&self) -> usize {
        self.nominal_length
    }

    /// Number of strands, `n` after synthesis and `n_hat` after filtering.
    pub fn len(&self) -> usize {
        self.strands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strands.is_empty()
    }
}

/// Per-position nucleotide tallies `(k_A, k_C, k_T, k_G)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadCounts {
    counts: Vec<[u32; 4]>,
    reads: usize,
}

impl ReadCounts {
    /// Builds counts directly; every position must sum to the same `reads`.
    pub fn new(counts: Vec<[u32; 4]>) -> Result<Self> {
        let reads = counts.first().map_or(0, |c| c.iter().sum::<u32>() as usize);
        if let Some((i, c)) = counts
            .iter()
            .enumerate()
            .find(|(_, c)| c.iter().sum::<u32>() as usize != reads)
        {
            return Err(Error::invalid(format!(
                "position {i} has {} reads, expected {reads}",
                c.iter().sum::<u32>()
            )));
        }
        Ok(Self { counts, reads })
    }

    /// An empty observation (no retained strands) over `positions` positions.
    pub fn empty(positions: usize) -> Self {
        Self {
            counts: vec![[0; 4]; positions],
            reads: 0,
        }
    }

    pub fn positions(&self) -> usize {
        self.counts.len()
    }

    /// Number of strands contributing to every position.
    pub fn reads(&self) -> usize {
        self.reads
    }

    pub fn at(&self, position: usize) -> [u32; 4] {
        self.counts[position]
    }

    pub fn counts(&self) -> &[[u32; 4]] {
        &self.counts
    }
}

/// Corruption applied between synthesis and sequencing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Sampling randomness only.
    Sampling,
    /// Each base is replaced by one of the other three with total probability `epsilon`.
    Substitution { epsilon: f64 },
    /// After each base, insert a random base with probability `p_i` or delete
    /// the base with probability `p_d`.
    InsertionDeletion { p_i: f64, p_d: f64 },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Sampling => Ok(()),
            ChannelSpec::Substitution { epsilon } => check_probability("epsilon", epsilon),
            ChannelSpec::InsertionDeletion { p_i, p_d } => check_id_probabilities(p_i, p_d),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::Sampling => "sampling",
            ChannelSpec::Substitution { .. } => "substitution",
            ChannelSpec::InsertionDeletion { .. } => "insertion_deletion",
        }
    }
}

fn check_id_probabilities(p_i: f64, p_d: f64) -> Result<()> {
    check_probability("p_i", p_i)?;
    check_probability("p_d", p_d)?;
    if p_i + p_d > 1.0 {
        return Err(Error::invalid(format!(
            "p_i + p_d must not exceed 1, got {}",
            p_i + p_d
        )));
    }
    Ok(())
}

#[inline]
fn draw_nucleotide<R: Rng + ?Sized>(point: &ProbabilityQuartet, rng: &mut R) -> Nucleotide {
    let u: f64 = rng.random();
    let p = point.as_array();
    let mut cumulative = 0.0;
    let mut last = 0;
    for (j, &pj) in p.iter().enumerate() {
        if pj > 0.0 {
            cumulative += pj;
            last = j;
            if u < cumulative {
                return Nucleotide::from_index(j);
            }
        }
    }
    // rounding left u above the final cumulative sum
    Nucleotide::from_index(last)
}

#[inline]
fn random_nucleotide<R: Rng + ?Sized>(rng: &mut R) -> Nucleotide {
    Nucleotide::from_index(rng.random_range(0..4))
}

/// Draws `n` strands; the base at position `i` of every strand is drawn
/// independently from `points[i]`.
pub fn synthesize<R: Rng + ?Sized>(points: &[ProbabilityQuartet], n: usize, rng: &mut R) -> Result<StrandPool> {
    if n < 1 {
        return Err(Error::invalid("at least one strand must be synthesized"));
    }
    let strands = (0..n)
        .map(|_| Strand(points.iter().map(|p| draw_nucleotide(p, rng)).collect()))
        .collect();
    Ok(StrandPool {
        strands,
        nominal_length: points.len(),
    })
}

/// Keeps each base with probability `1 - epsilon`, otherwise replaces it by
/// one of the other three bases chosen uniformly.
pub fn apply_substitution<R: Rng + ?Sized>(mut pool: StrandPool, epsilon: f64, rng: &mut R) -> Result<StrandPool> {
    check_probability("epsilon", epsilon)?;
    if epsilon == 0.0 {
        return Ok(pool);
    }
    for strand in &mut pool.strands {
        for base in &mut strand.0 {
            if rng.random::<f64>() < epsilon {
                let offset = rng.random_range(1..4);
                *base = Nucleotide::from_index((base.index() + offset) % 4);
            }
        }
    }
    Ok(pool)
}

/// Passes every strand through the insertion/deletion channel.
///
/// For each original base exactly one event is drawn: with probability `p_i`
/// the base is kept and a uniformly random base is inserted after it, with
/// probability `p_d` it is deleted, otherwise it passes unchanged.
pub fn apply_insertion_deletion<R: Rng + ?Sized>(
    pool: StrandPool,
    p_i: f64,
    p_d: f64,
    rng: &mut R,
) -> Result<Vec<Strand>> {
    check_id_probabilities(p_i, p_d)?;
    let strands = pool
        .strands
        .into_iter()
        .map(|strand| {
            let mut out = Vec::with_capacity(strand.len() + 4);
            for base in strand.0 {
                let u: f64 = rng.random();
                if u < p_i {
                    out.push(base);
                    out.push(random_nucleotide(rng));
                } else if u >= p_i + p_d {
                    out.push(base);
                }
            }
            Strand(out)
        })
        .collect();
    Ok(strands)
}

/// Retains exactly the strands of length `nominal_length`.
pub fn filter_to_length(strands: Vec<Strand>, nominal_length: usize) -> StrandPool {
    StrandPool {
        strands: strands.into_iter().filter(|s| s.len() == nominal_length).collect(),
        nominal_length,
    }
}

/// Position-wise nucleotide counts over equal-length strands.
pub fn tally_strands(strands: &[Strand], positions: usize) -> Result<ReadCounts> {
    let mut counts = vec![[0u32; 4]; positions];
    for strand in strands {
        if strand.len() != positions {
            return Err(Error::invalid(format!(
                "cannot tally a strand of length {} over {positions} positions",
                strand.len()
            )));
        }
        for (c, b) in counts.iter_mut().zip(strand.bases()) {
            c[b.index()] += 1;
        }
    }
    Ok(ReadCounts {
        counts,
        reads: strands.len(),
    })
}

pub fn tally(pool: &StrandPool) -> Result<ReadCounts> {
    tally_strands(&pool.strands, pool.nominal_length)
}

fn choose2(a: usize) -> f64 {
    if a < 2 {
        0.0
    } else {
        (a as f64) * ((a - 1) as f64) / 2.0
    }
}

/// Probability that position `i` (1-based) of a strand that came out with
/// its nominal length `e` is unshifted, assuming such a strand carries either
/// no insertion/deletion or exactly one of each.
pub fn no_shift_probability(e: usize, i: usize, p_i: f64, p_d: f64) -> Result<f64> {
    check_id_probabilities(p_i, p_d)?;
    if i < 1 || i > e {
        return Err(Error::invalid(format!("position {i} outside 1..={e}")));
    }
    let pass = (1.0 - p_i - p_d).powi(2);
    let pair = p_i * p_d;
    let num = pass + pair * (2.0 * choose2(e - i) + 2.0 * choose2(i - 1) + (e - i) as f64);
    let den = pass + 2.0 * pair * choose2(e);
    if den == 0.0 {
        // p_i + p_d = 1 with one of them zero: no strand keeps length e
        return Ok(1.0);
    }
    Ok(num / den)
}

/// Approximate probability that a strand keeps its nominal length `e`,
/// truncated at one insertion plus one deletion.
pub fn length_preserved_probability(e: usize, p_i: f64, p_d: f64) -> Result<f64> {
    check_id_probabilities(p_i, p_d)?;
    let pass = 1.0 - p_i - p_d;
    let head = if e >= 2 { pass.powi(e as i32 - 2) } else { 1.0 };
    Ok(head * (pass * pass + 2.0 * p_i * p_d * choose2(e)))
}
