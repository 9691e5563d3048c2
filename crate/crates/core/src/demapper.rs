//! Soft demapping of read counts into bit LLRs.
//!
//! With a uniform prior over constellation points, the posterior of a point
//! is proportional to the multinomial probability of the observed counts.
//! Bit LLRs are `log(sum over points with bit 0) - log(sum over points with
//! bit 1)`, evaluated with log-sum-exp.

use statrs::function::gamma::ln_gamma;

use crate::channel::ReadCounts;
use crate::constellation::{EffectiveConstellation, MappingTable, ProbabilityQuartet};
use crate::error::{Error, Result};

pub const DEFAULT_LLR_MAX: f64 = 50.0;

#[inline]
fn ln_factorial(k: u32) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(f64::from(k) + 1.0)
    }
}

/// `log(n! / prod k_j!)`.
fn log_multinomial_coefficient(counts: [u32; 4]) -> f64 {
    let n: u32 = counts.iter().sum();
    ln_factorial(n) - counts.iter().map(|&k| ln_factorial(k)).sum::<f64>()
}

/// `sum_j k_j log p_j` with `0 log 0 = 0`; `-inf` when a counted base has
/// probability zero.
#[inline]
fn log_kernel(counts: [u32; 4], point: &ProbabilityQuartet) -> f64 {
    let mut acc = 0.0;
    for (&k, &p) in counts.iter().zip(point.as_array()) {
        if k > 0 {
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += f64::from(k) * p.ln();
        }
    }
    acc
}

/// Natural-log multinomial probability of `counts` under `point`.
pub fn multinomial_log_pmf(counts: [u32; 4], point: &ProbabilityQuartet) -> Result<f64> {
    if counts.iter().all(|&k| k == 0) {
        return Err(Error::invalid("counts must sum to at least 1"));
    }
    let kernel = log_kernel(counts, point);
    if kernel == f64::NEG_INFINITY {
        return Ok(kernel);
    }
    Ok(log_multinomial_coefficient(counts) + kernel)
}

/// Log-likelihood of one position's counts under every point of a table, in
/// table order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolLikelihoods {
    pub log_lik: Vec<f64>,
}

impl SymbolLikelihoods {
    pub fn len(&self) -> usize {
        self.log_lik.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_lik.is_empty()
    }
}

pub fn symbol_log_likelihoods(counts: [u32; 4], table: &MappingTable) -> Result<SymbolLikelihoods> {
    if counts.iter().all(|&k| k == 0) {
        return Err(Error::invalid("counts must sum to at least 1"));
    }
    let coefficient = log_multinomial_coefficient(counts);
    let log_lik = table
        .points()
        .iter()
        .map(|p| coefficient + log_kernel(counts, p))
        .collect();
    Ok(SymbolLikelihoods { log_lik })
}

fn check_llr_max(llr_max: f64) -> Result<()> {
    if !(llr_max > 0.0 && llr_max.is_finite()) {
        return Err(Error::invalid(format!(
            "llr_max must be positive and finite, got {llr_max}"
        )));
    }
    Ok(())
}

/// Numerically stable `log(sum exp(x))` over an iterator; `-inf` when empty or
/// when every term is `-inf`.
fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|x| (x - max).exp()).sum::<f64>().ln()
}

fn write_bit_llrs(lik: &[f64], table: &MappingTable, llr_max: f64, out: &mut [f64]) {
    let bits = table.bits_per_symbol();
    for (l, slot) in out.iter_mut().enumerate().take(bits) {
        let zero = log_sum_exp((0..lik.len()).filter(|&s| table.label_bit(s, l) == 0).map(|s| lik[s]));
        let one = log_sum_exp((0..lik.len()).filter(|&s| table.label_bit(s, l) == 1).map(|s| lik[s]));
        *slot = match (zero == f64::NEG_INFINITY, one == f64::NEG_INFINITY) {
            (true, true) => 0.0,
            (false, true) => llr_max,
            (true, false) => -llr_max,
            (false, false) => (zero - one).clamp(-llr_max, llr_max),
        };
    }
}

/// Per-bit LLRs (first label bit first), clamped to `[-llr_max, llr_max]`.
/// Positive values favour bit 0; a position impossible under every point
/// yields 0.
pub fn bit_llrs(lik: &SymbolLikelihoods, table: &MappingTable, llr_max: f64) -> Result<Vec<f64>> {
    check_llr_max(llr_max)?;
    if lik.len() != table.len() {
        return Err(Error::invalid(format!(
            "{} likelihoods for a table of {} points",
            lik.len(),
            table.len()
        )));
    }
    if lik.log_lik.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("likelihoods must not be NaN"));
    }
    let mut out = vec![0.0; table.bits_per_symbol()];
    write_bit_llrs(&lik.log_lik, table, llr_max, &mut out);
    Ok(out)
}

/// Decoder input for one block.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrVector {
    /// `E * L` values, symbol-major then bit-minor.
    pub values: Vec<f64>,
    /// No strand was retained, so every value is 0.
    pub erased: bool,
}

/// Demaps every position against its own effective table.
pub fn demap_block(reads: &ReadCounts, eff: &EffectiveConstellation, llr_max: f64) -> Result<LlrVector> {
    check_llr_max(llr_max)?;
    if reads.positions() != eff.len() {
        return Err(Error::invalid(format!(
            "{} observed positions but {} constellation tables",
            reads.positions(),
            eff.len()
        )));
    }
    let bits = eff.tables().first().map_or(0, |t| t.bits_per_symbol());
    if eff.tables().iter().any(|t| t.bits_per_symbol() != bits) {
        return Err(Error::invalid("constellation tables differ in bits per symbol"));
    }
    let mut values = vec![0.0; reads.positions() * bits];
    if reads.reads() == 0 {
        return Ok(LlrVector { values, erased: true });
    }

    let mut lik = Vec::with_capacity(1 << bits);
    for (i, (&counts, out)) in reads.counts().iter().zip(values.chunks_exact_mut(bits)).enumerate() {
        let table = eff.table(i);
        let coefficient = log_multinomial_coefficient(counts);
        lik.clear();
        lik.extend(table.points().iter().map(|p| coefficient + log_kernel(counts, p)));
        write_bit_llrs(&lik, table, llr_max, out);
    }
    Ok(LlrVector { values, erased: false })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn q(p: [f64; 4]) -> ProbabilityQuartet {
        ProbabilityQuartet::new(p).unwrap()
    }

    #[test]
    fn pmf_examples() {
        assert_eq!(
            multinomial_log_pmf([5, 0, 0, 0], &q([1.0, 0.0, 0.0, 0.0])).unwrap(),
            0.0
        );
        let v = multinomial_log_pmf([1, 1, 0, 0], &q([0.5, 0.5, 0.0, 0.0])).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-12);
        assert_eq!(
            multinomial_log_pmf([0, 0, 1, 0], &q([0.5, 0.5, 0.0, 0.0])).unwrap(),
            f64::NEG_INFINITY
        );
        assert!(multinomial_log_pmf([0, 0, 0, 0], &q([0.25; 4])).is_err());
    }

    #[test]
    fn symbol_likelihoods_table_l3() {
        let t = MappingTable::table_l3();
        let lik = symbol_log_likelihoods([3, 0, 0, 0], &t).unwrap();
        assert_eq!(lik.log_lik[0], 0.0);
        for s in [1, 2, 3, 5, 7] {
            assert_eq!(lik.log_lik[s], f64::NEG_INFINITY);
        }
        let lik = symbol_log_likelihoods([2, 2, 0, 0], &t).unwrap();
        assert_eq!(lik.log_lik[0], f64::NEG_INFINITY);
        assert!((lik.log_lik[4] - (3.0f64 / 8.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn single_survivor_saturates() {
        let t = MappingTable::table_l3();
        let mut log_lik = vec![f64::NEG_INFINITY; 8];
        log_lik[0b101] = -3.0;
        let llr = bit_llrs(&SymbolLikelihoods { log_lik }, &t, 50.0).unwrap();
        assert_eq!(llr, vec![-50.0, 50.0, -50.0]);
    }

    #[test]
    fn equal_likelihoods_are_neutral() {
        let t = MappingTable::table_l3();
        let llr = bit_llrs(&SymbolLikelihoods { log_lik: vec![-1.5; 8] }, &t, 50.0).unwrap();
        assert!(llr.iter().all(|&x| x.abs() < 1e-12));
        let llr = bit_llrs(
            &SymbolLikelihoods {
                log_lik: vec![f64::NEG_INFINITY; 8],
            },
            &t,
            50.0,
        )
        .unwrap();
        assert_eq!(llr, vec![0.0; 3]);
    }

    #[test]
    fn size_mismatch_rejected() {
        let t = MappingTable::table_l3();
        assert!(bit_llrs(&SymbolLikelihoods { log_lik: vec![0.0; 4] }, &t, 50.0).is_err());
        assert!(bit_llrs(&SymbolLikelihoods { log_lik: vec![0.0; 8] }, &t, 0.0).is_err());
    }

    #[test]
    fn block_ordering_and_erasure() {
        let t = Arc::new(MappingTable::table_l3());
        let eff = EffectiveConstellation::uniform(t.clone(), 2);
        let reads = ReadCounts::new(vec![[0, 0, 4, 0], [2, 2, 0, 0]]).unwrap();
        let block = demap_block(&reads, &eff, 50.0).unwrap();
        assert!(!block.erased);
        assert_eq!(block.values.len(), 6);
        for (i, counts) in reads.counts().iter().enumerate() {
            let lik = symbol_log_likelihoods(*counts, &t).unwrap();
            assert_eq!(&block.values[3 * i..3 * i + 3], &bit_llrs(&lik, &t, 50.0).unwrap()[..]);
        }

        let empty = demap_block(&ReadCounts::empty(2), &eff, 50.0).unwrap();
        assert!(empty.erased);
        assert_eq!(empty.values, vec![0.0; 6]);

        assert!(demap_block(&ReadCounts::empty(3), &eff, 50.0).is_err());
    }
}
