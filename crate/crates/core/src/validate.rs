//! Fast self-checks run by the `validate` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::CodeRegistry;
use crate::constellation::{id_adjust, MappingTable, ProbabilityQuartet, SIMPLEX_TOLERANCE};
use crate::demapper::{bit_llrs, multinomial_log_pmf, symbol_log_likelihoods};
use crate::error::Result;
use crate::ldpc::{decode_spa, LdpcCode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn report(name: &'static str, outcome: std::result::Result<String, String>) -> SuiteReport {
    match outcome {
        Ok(detail) => SuiteReport {
            name,
            passed: true,
            detail,
        },
        Err(detail) => SuiteReport {
            name,
            passed: false,
            detail,
        },
    }
}

/// All count vectors `(k_A, k_C, k_T, k_G)` summing to `n`.
pub fn compositions(n: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for a in 0..=n {
        for c in 0..=n - a {
            for t in 0..=n - a - c {
                out.push([a, c, t, n - a - c - t]);
            }
        }
    }
    out
}

fn pmf_normalization() -> std::result::Result<String, String> {
    let mut checked = 0;
    for table in [MappingTable::table_l3(), MappingTable::table_l4()] {
        for (s, point) in table.points().iter().enumerate() {
            for n in 1..=6 {
                let total: f64 = compositions(n)
                    .into_iter()
                    .map(|k| multinomial_log_pmf(k, point).map(f64::exp))
                    .sum::<Result<f64>>()
                    .map_err(|e| e.to_string())?;
                if (total - 1.0).abs() > 1e-9 {
                    return Err(format!("L={} point {s} n={n}: total {total}", table.bits_per_symbol()));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (point, n) pairs sum to 1"))
}

fn substitution_update() -> std::result::Result<String, String> {
    let mut checked = 0;
    for point in MappingTable::table_l3()
        .points()
        .iter()
        .chain(MappingTable::table_l4().points())
    {
        for step in 0..=20 {
            let eps = f64::from(step) / 20.0;
            let p = point.as_array();
            let adjusted = point.substitution_adjust(eps).map_err(|e| e.to_string())?;
            for j in 0..4 {
                let others: f64 = (0..4).filter(|&k| k != j).map(|k| p[k]).sum();
                let componentwise = (1.0 - eps) * p[j] + eps / 3.0 * others;
                if (componentwise - adjusted.get(j)).abs() > 1e-12 {
                    return Err(format!("{point} eps={eps}: component {j} differs"));
                }
            }
            let sum: f64 = adjusted.as_array().iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE || adjusted.as_array().iter().any(|&x| x < 0.0) {
                return Err(format!("{point} eps={eps}: left the simplex"));
            }
            if eps == 0.0 && adjusted != *point {
                return Err(format!("{point}: eps = 0 is not the identity"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (point, epsilon) pairs agree"))
}

fn id_update() -> std::result::Result<String, String> {
    let mut checked = 0;
    for point in MappingTable::table_l3().points() {
        for step in 0..=10 {
            let p_ns = f64::from(step) / 10.0;
            let closed = point.as_array().map(|x| p_ns * x + (1.0 - p_ns) * 0.25);
            for n_hat in 1..=50 {
                let sum = id_adjust(point, p_ns, n_hat).map_err(|e| e.to_string())?;
                for (j, want) in closed.iter().enumerate() {
                    if (sum.get(j) - want).abs() > 1e-12 {
                        return Err(format!("{point} p_ns={p_ns} n_hat={n_hat}: component {j} differs"));
                    }
                }
                checked += 1;
            }
        }
        let uniform = id_adjust(point, 0.0, 7).map_err(|e| e.to_string())?;
        if uniform.as_array().iter().any(|&x| (x - 0.25).abs() > 1e-12) {
            return Err(format!("{point}: p_ns = 0 does not give the uniform point"));
        }
    }
    Ok(format!("{checked} (point, p_ns, n_hat) triples match the closed form"))
}

fn code_check(registry: &CodeRegistry, name: &str) -> std::result::Result<String, String> {
    let code: LdpcCode = registry.load(name).map_err(|e| e.to_string())?;
    let h = code.parity_check();
    for (j, row) in code.generator_matrix().iter().enumerate() {
        if !h.is_codeword(row) {
            return Err(format!("{name}: generator row {j} violates a check"));
        }
    }
    let zeros = vec![20.0; code.n()];
    let out = decode_spa(h, &zeros, 20).map_err(|e| e.to_string())?;
    if !out.converged || out.iterations > 1 || out.bits.iter().any(|&b| b != 0) {
        return Err(format!("{name}: noiseless all-zero word not decoded in one iteration"));
    }
    Ok(format!("{name}: K = {}, N = {}, G H^T = 0", code.k(), code.n()))
}

fn codes(registry: &CodeRegistry) -> std::result::Result<String, String> {
    if registry.entries().is_empty() {
        return Err("manifest lists no codes".into());
    }
    let details = registry
        .entries()
        .iter()
        .map(|e| code_check(registry, &e.name))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(details.join("; "))
}

/// Bit LLRs computed directly in probability space from explicit factorials.
fn direct_space_llrs(counts: [u32; 4], table: &MappingTable) -> Vec<f64> {
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    let n: u32 = counts.iter().sum();
    let coeff = fact(n) / counts.iter().map(|&k| fact(k)).product::<f64>();
    let probs: Vec<f64> = table
        .points()
        .iter()
        .map(|p| {
            coeff
                * counts
                    .iter()
                    .zip(p.as_array())
                    .map(|(&k, &q)| q.powi(k as i32))
                    .product::<f64>()
        })
        .collect();
    (0..table.bits_per_symbol())
        .map(|l| {
            let (mut zero, mut one) = (0.0, 0.0);
            for (s, &pr) in probs.iter().enumerate() {
                if table.label_bit(s, l) == 0 {
                    zero += pr;
                } else {
                    one += pr;
                }
            }
            (zero / one).ln()
        })
        .collect()
}

fn random_point<R: Rng>(rng: &mut R) -> ProbabilityQuartet {
    let raw: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.05..1.0));
    let total: f64 = raw.iter().sum();
    let mut p = raw.map(|x| x / total);
    p[3] = 1.0 - p[0] - p[1] - p[2];
    ProbabilityQuartet::new(p).expect("normalized")
}

fn demapper_oracle() -> std::result::Result<String, String> {
    const LLR_MAX: f64 = 50.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut compared = 0;
    for instance in 0..100 {
        // the raw table half the time, a strictly positive random table otherwise
        let table = if instance % 2 == 0 {
            MappingTable::table_l3()
        } else {
            MappingTable::new(3, (0..8).map(|_| random_point(&mut rng)).collect()).expect("valid table")
        };
        let n = rng.random_range(1..=8u32);
        let counts = loop {
            let mut k = [0u32; 4];
            for _ in 0..n {
                k[rng.random_range(0..4)] += 1;
            }
            // keep only observations possible under some point of the raw table
            if instance % 2 == 1 || k.iter().filter(|&&x| x > 0).count() <= 2 {
                break k;
            }
        };
        let lik = symbol_log_likelihoods(counts, &table).map_err(|e| e.to_string())?;
        let got = bit_llrs(&lik, &table, LLR_MAX).map_err(|e| e.to_string())?;
        let want = direct_space_llrs(counts, &table);
        for (l, (&g, &w)) in got.iter().zip(&want).enumerate() {
            if w.is_finite() && w.abs() < LLR_MAX - 1e-9 {
                if (g - w).abs() > 1e-9 {
                    return Err(format!("instance {instance} counts {counts:?} bit {l}: {g} vs {w}"));
                }
                compared += 1;
            } else if (w.is_infinite() && g != LLR_MAX.copysign(w)) || (w.is_nan() && g != 0.0) {
                return Err(format!("instance {instance} counts {counts:?} bit {l}: {g} vs {w}"));
            }
        }
    }
    Ok(format!("100 instances, {compared} unclamped LLRs agree"))
}

/// Runs every suite against the given code registry.
pub fn run_all(registry: &CodeRegistry) -> Vec<SuiteReport> {
    vec![
        report("pmf_normalization", pmf_normalization()),
        report("substitution_update", substitution_update()),
        report("insertion_deletion_update", id_update()),
        report("codes_generator_parity", codes(registry)),
        report("demapper_posterior_oracle", demapper_oracle()),
    ]
}
