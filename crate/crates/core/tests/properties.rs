use compdna::channel::{no_shift_probability, ReadCounts};
use compdna::constellation::id_adjust;
use compdna::ldpc::{decode, decode_spa, CheckRule};
use compdna::rng::{stage_rng, Stage};
use compdna::{
    bit_llrs, demap_block, estimate_confidence, multinomial_log_pmf, symbol_log_likelihoods, CodeRegistry,
    EffectiveConstellation, MappingTable, ParityCheckMatrix, ProbabilityQuartet,
};
use proptest::prelude::*;
use rand::Rng;
use std::sync::{Arc, OnceLock};

fn quartet() -> impl Strategy<Value = ProbabilityQuartet> {
    prop::array::uniform4(0u32..20)
        .prop_filter("non-zero", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| {
            let total: u32 = w.iter().sum();
            let mut p = w.map(|x| f64::from(x) / f64::from(total));
            p[3] = (1.0 - p[0] - p[1] - p[2]).max(0.0);
            ProbabilityQuartet::new(p).unwrap()
        })
}

fn table_l3() -> impl Strategy<Value = MappingTable> {
    prop::collection::vec(quartet(), 8).prop_map(|pts| MappingTable::new(3, pts).unwrap())
}

fn counts(max_n: u32) -> impl Strategy<Value = [u32; 4]> {
    prop::array::uniform4(0..=max_n).prop_filter("at least one read", |k| k.iter().any(|&x| x > 0))
}

fn wran() -> &'static compdna::LdpcCode {
    static CODE: OnceLock<compdna::LdpcCode> = OnceLock::new();
    CODE.get_or_init(|| CodeRegistry::builtin().load("wran_r05").unwrap())
}

fn compositions(n: u32) -> Vec<[u32; 4]> {
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

proptest! {
    #[test]
    fn pmf_sums_to_one(point in quartet(), n in 1u32..=6) {
        let total: f64 = compositions(n).into_iter().map(|k| multinomial_log_pmf(k, &point).unwrap().exp()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_point_depends_only_on_composition_class(a in counts(6), perm in Just([2usize, 0, 3, 1])) {
        let u = ProbabilityQuartet::uniform();
        let permuted = [a[perm[0]], a[perm[1]], a[perm[2]], a[perm[3]]];
        let x = multinomial_log_pmf(a, &u).unwrap();
        let y = multinomial_log_pmf(permuted, &u).unwrap();
        prop_assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn llrs_respect_clamp(table in table_l3(), k in counts(12), llr_max in 0.5f64..80.0) {
        let lik = symbol_log_likelihoods(k, &table).unwrap();
        for v in bit_llrs(&lik, &table, llr_max).unwrap() {
            prop_assert!(v.is_finite() && v.abs() <= llr_max);
        }
    }

    #[test]
    fn raw_table_llrs_respect_clamp(k in counts(12)) {
        let t = MappingTable::table_l3();
        let lik = symbol_log_likelihoods(k, &t).unwrap();
        for v in bit_llrs(&lik, &t, 50.0).unwrap() {
            prop_assert!(v.is_finite() && v.abs() <= 50.0);
        }
    }

    #[test]
    fn nucleotide_relabeling_leaves_llrs_unchanged(
        table in table_l3(),
        k in counts(8),
        perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let permute = |x: [f64; 4]| std::array::from_fn::<f64, 4, _>(|j| x[perm[j]]);
        let moved = MappingTable::new(
            3,
            table.points().iter().map(|p| ProbabilityQuartet::new(permute(*p.as_array())).unwrap()).collect(),
        ).unwrap();
        let k2: [u32; 4] = std::array::from_fn(|j| k[perm[j]]);
        let a = bit_llrs(&symbol_log_likelihoods(k, &table).unwrap(), &table, 50.0).unwrap();
        let b = bit_llrs(&symbol_log_likelihoods(k2, &moved).unwrap(), &moved, 50.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn demap_block_is_per_position(table in table_l3(), rows in prop::collection::vec(prop::array::uniform4(0u32..4), 1..6)) {
        // force a common read count by topping up the G count
        let n = rows.iter().map(|r| r.iter().sum::<u32>()).max().unwrap().max(1);
        let rows: Vec<[u32; 4]> = rows.into_iter().map(|mut r| { r[3] += n - r.iter().sum::<u32>(); r }).collect();
        let t = Arc::new(table);
        let eff = EffectiveConstellation::uniform(t.clone(), rows.len());
        let block = demap_block(&ReadCounts::new(rows.clone()).unwrap(), &eff, 50.0).unwrap();
        prop_assert_eq!(block.values.len(), 3 * rows.len());
        for (i, k) in rows.iter().enumerate() {
            let one = bit_llrs(&symbol_log_likelihoods(*k, &t).unwrap(), &t, 50.0).unwrap();
            prop_assert_eq!(&block.values[3 * i..3 * i + 3], &one[..]);
        }
    }

    #[test]
    fn substitution_stays_on_simplex(point in quartet(), eps in 0.0f64..=1.0) {
        let adj = point.substitution_adjust(eps).unwrap();
        let p = point.as_array();
        let sum: f64 = adj.as_array().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        for j in 0..4 {
            let others: f64 = (0..4).filter(|&m| m != j).map(|m| p[m]).sum();
            prop_assert!(((1.0 - eps) * p[j] + eps / 3.0 * others - adj.get(j)).abs() < 1e-12);
            prop_assert!(adj.get(j) >= 0.0);
        }
    }

    #[test]
    fn id_update_is_closed_form_and_read_independent(point in quartet(), p_ns in 0.0f64..=1.0, n_hat in 1usize..=50) {
        let got = id_adjust(&point, p_ns, n_hat).unwrap();
        for j in 0..4 {
            prop_assert!((got.get(j) - (p_ns * point.get(j) + (1.0 - p_ns) * 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn no_shift_is_a_probability(e in 1usize..200, frac in 0.0f64..=1.0, p_i in 0.0f64..0.05, p_d in 0.0f64..0.05) {
        let i = 1 + ((e - 1) as f64 * frac) as usize;
        let v = no_shift_probability(e, i, p_i, p_d).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(no_shift_probability(e, i, 0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn wilson_brackets_the_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let errors = (trials as f64 * frac) as u64;
        let (lo, hi) = estimate_confidence(errors, trials).unwrap();
        let p = errors as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }

    #[test]
    fn table_json_round_trips(table in table_l3()) {
        let back = MappingTable::from_json(&table.to_json()).unwrap();
        prop_assert_eq!(back, table);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn encoded_messages_are_codewords(seed in any::<u64>()) {
        let code = wran();
        let mut rng = stage_rng(seed, 1, 0, Stage::Message);
        let m: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let c = code.encode(&m).unwrap();
        prop_assert!(code.parity_check().is_codeword(&c));
        prop_assert_eq!(code.extract_message(&c).unwrap(), m);
    }

    #[test]
    fn converged_decodes_satisfy_every_check(seed in any::<u64>(), sigma in 0.3f64..1.5, min_sum in any::<bool>()) {
        let code = wran();
        let mut rng = stage_rng(seed, 2, 0, Stage::Synthesis);
        let m: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2)).collect();
        let c = code.encode(&m).unwrap();
        let llr: Vec<f64> = c.iter().map(|&b| {
            let noise: f64 = (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
            let x = if b == 0 { 1.0 } else { -1.0 };
            2.0 * (x + sigma * noise) / (sigma * sigma)
        }).collect();
        let rule = if min_sum { CheckRule::MinSum { scale: 0.75 } } else { CheckRule::SumProduct };
        let out = decode(code.parity_check(), &llr, 20, rule).unwrap();
        prop_assert!(out.iterations >= 1 && out.iterations <= 20);
        if out.converged {
            prop_assert!(code.parity_check().is_codeword(&out.bits));
        }
    }

    #[test]
    fn alist_round_trips(rows in prop::collection::vec(prop::collection::btree_set(0usize..12, 1..5), 1..8)) {
        let rows: Vec<Vec<usize>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
        let used: std::collections::BTreeSet<usize> = rows.iter().flatten().copied().collect();
        // relabel so that every column is used
        let map: Vec<usize> = (0..12).map(|v| used.iter().position(|&u| u == v).unwrap_or(0)).collect();
        let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|&v| map[v]).collect()).collect();
        let h = ParityCheckMatrix::from_rows(used.len(), rows).unwrap();
        prop_assert_eq!(ParityCheckMatrix::from_alist(&h.to_alist()).unwrap(), h);
    }
}

#[test]
fn proportional_counts_decide_the_label() {
    let t = MappingTable::table_l3();
    for n in [2u32, 4, 6, 10] {
        for (s, point) in t.points().iter().enumerate() {
            let k = point.as_array().map(|p| (p * f64::from(n)).round() as u32);
            let llr = bit_llrs(&symbol_log_likelihoods(k, &t).unwrap(), &t, 50.0).unwrap();
            let decided: Vec<u8> = llr.iter().map(|&v| u8::from(v < 0.0)).collect();
            assert_eq!(decided, t.label(s), "point {s}, n = {n}, LLRs {llr:?}");
        }
    }
}

#[test]
fn all_zero_llrs_do_not_converge() {
    let out = decode_spa(wran().parity_check(), &vec![0.0; 480], 20).unwrap();
    assert!(!out.converged);
    assert_eq!(out.iterations, 20);
}
