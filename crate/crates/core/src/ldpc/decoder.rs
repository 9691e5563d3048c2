//! Flooding belief-propagation decoders.
//!
//! LLRs follow the convention `log P(bit = 0) / P(bit = 1)`: positive values
//! favour 0. Every iteration updates all check nodes, then all variable
//! nodes, then takes hard decisions; decoding stops as soon as the hard
//! decision satisfies every check.

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITERATIONS: usize = 20;
pub const DEFAULT_MIN_SUM_SCALE: f64 = 0.75;

/// Bound on `|tanh(x / 2)|` inside the check-node update, so that the
/// inverse hyperbolic tangent stays finite.
pub const TANH_CLAMP: f64 = 1.0 - 1e-12;

/// Check-node update rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CheckRule {
    /// Log-domain sum-product (tanh rule).
    SumProduct,
    /// Min-sum with the outgoing magnitude multiplied by `scale`.
    MinSum { scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Hard decision on the final posterior LLRs (0 iff LLR >= 0).
    pub bits: Vec<u8>,
    pub iterations: usize,
    /// The hard decision satisfies every check and no posterior LLR is
    /// exactly zero.
    pub converged: bool,
}

#[inline]
fn clamped_tanh_half(x: f64) -> f64 {
    (x * 0.5).tanh().clamp(-TANH_CLAMP, TANH_CLAMP)
}

#[inline]
fn atanh_twice(t: f64) -> f64 {
    2.0 * t.clamp(-TANH_CLAMP, TANH_CLAMP).atanh()
}

/// Pairwise tanh-rule combination of two LLRs.
pub fn boxplus(a: f64, b: f64) -> f64 {
    atanh_twice(clamped_tanh_half(a) * clamped_tanh_half(b))
}

/// Extrinsic check-node messages: `outputs[k]` combines every input except
/// `inputs[k]`.
pub fn check_node_update(rule: CheckRule, inputs: &[f64], outputs: &mut [f64]) {
    assert_eq!(inputs.len(), outputs.len());
    let mut scratch = Vec::with_capacity(inputs.len());
    match rule {
        CheckRule::SumProduct => sum_product_check(inputs, outputs, &mut scratch),
        CheckRule::MinSum { scale } => min_sum_check(inputs, outputs, scale),
    }
}

fn sum_product_check(inputs: &[f64], outputs: &mut [f64], scratch: &mut Vec<f64>) {
    let d = inputs.len();
    scratch.clear();
    scratch.extend(inputs.iter().map(|&x| clamped_tanh_half(x)));
    // prefix products in `outputs`, then sweep suffix products backwards
    let mut acc = 1.0;
    for k in 0..d {
        outputs[k] = acc;
        acc *= scratch[k];
    }
    let mut suffix = 1.0;
    for k in (0..d).rev() {
        outputs[k] = atanh_twice(outputs[k] * suffix);
        suffix *= scratch[k];
    }
}

fn min_sum_check(inputs: &[f64], outputs: &mut [f64], scale: f64) {
    let mut min1 = f64::INFINITY;
    let mut min2 = f64::INFINITY;
    let mut argmin = usize::MAX;
    let mut negative = false;
    for (k, &x) in inputs.iter().enumerate() {
        let a = x.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            argmin = k;
        } else if a < min2 {
            min2 = a;
        }
        negative ^= x < 0.0;
    }
    for (k, (out, &x)) in outputs.iter_mut().zip(inputs).enumerate() {
        let mag = if k == argmin { min2 } else { min1 };
        let sign_negative = negative ^ (x < 0.0);
        let m = if mag.is_finite() { scale * mag } else { 0.0 };
        *out = if sign_negative { -m } else { m };
    }
}

/// Log-domain sum-product decoding.
pub fn decode_spa(h: &ParityCheckMatrix, llr: &[f64], max_iter: usize) -> Result<DecodeOutcome> {
    decode(h, llr, max_iter, CheckRule::SumProduct)
}

/// Scaled min-sum decoding.
pub fn decode_min_sum(h: &ParityCheckMatrix, llr: &[f64], max_iter: usize, scale: f64) -> Result<DecodeOutcome> {
    decode(h, llr, max_iter, CheckRule::MinSum { scale })
}

/// Flooding decoder with the given check-node rule.
pub fn decode(h: &ParityCheckMatrix, llr: &[f64], max_iter: usize, rule: CheckRule) -> Result<DecodeOutcome> {
    if llr.len() != h.n() {
        return Err(Error::invalid(format!("expected {} LLRs, got {}", h.n(), llr.len())));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if llr.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("LLRs must not be NaN"));
    }

    let edges = h.num_edges();
    let mut v2c = vec![0.0f64; edges];
    let mut c2v = vec![0.0f64; edges];
    for (e, m) in v2c.iter_mut().enumerate() {
        *m = llr[h.edge_var(e)];
    }
    let mut posterior = llr.to_vec();
    let mut bits = vec![0u8; h.n()];
    let mut scratch = Vec::new();

    for iteration in 1..=max_iter {
        for c in 0..h.m() {
            let range = h.check_edges(c);
            let (inputs, outputs) = (&v2c[range.clone()], &mut c2v[range]);
            match rule {
                CheckRule::SumProduct => sum_product_check(inputs, outputs, &mut scratch),
                CheckRule::MinSum { scale } => min_sum_check(inputs, outputs, scale),
            }
        }

        let mut erased = false;
        for v in 0..h.n() {
            let total = llr[v] + h.var_edges(v).iter().map(|&e| c2v[e as usize]).sum::<f64>();
            posterior[v] = total;
            bits[v] = u8::from(total < 0.0);
            erased |= total == 0.0;
        }

        if !erased && h.is_codeword(&bits) {
            return Ok(DecodeOutcome {
                bits,
                iterations: iteration,
                converged: true,
            });
        }

        for (v, &total) in posterior.iter().enumerate() {
            for &e in h.var_edges(v) {
                v2c[e as usize] = total - c2v[e as usize];
            }
        }
    }

    Ok(DecodeOutcome {
        bits,
        iterations: max_iter,
        converged: false,
    })
}
