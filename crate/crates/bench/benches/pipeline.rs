use std::hint::black_box;
use std::sync::Arc;

use compdna::channel::{synthesize, tally};
use compdna::constellation::map_codeword;
use compdna::ldpc::{decode, CheckRule};
use compdna::rng::{stage_rng, Stage};
use compdna::{demap_block, ChannelSpec, EffectiveConstellation, MappingTable};
use compdna_bench::wran_simulation;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn decoding(c: &mut Criterion) {
    let sim = wran_simulation(ChannelSpec::Sampling, 3);
    let llr = sim.trial_llrs(3, 0).unwrap().values;
    let h = sim.config().code.parity_check().clone();
    let mut group = c.benchmark_group("decode_wran_n3");
    for (name, rule) in [
        ("spa", CheckRule::SumProduct),
        ("min_sum", CheckRule::MinSum { scale: 0.75 }),
    ] {
        group.bench_function(name, |b| b.iter(|| decode(&h, black_box(&llr), 20, rule).unwrap()));
    }
    group.finish();
}

fn demapping(c: &mut Criterion) {
    let sim = wran_simulation(ChannelSpec::Sampling, 5);
    let cfg = sim.config();
    let word = cfg.code.encode(&vec![0; cfg.code.k()]).unwrap();
    let points = map_codeword(&cfg.table, &word).unwrap();
    let mut group = c.benchmark_group("demap_block");
    for n in [3usize, 10, 30] {
        let reads = tally(&synthesize(&points, n, &mut stage_rng(1, n, 0, Stage::Synthesis)).unwrap()).unwrap();
        let eff = EffectiveConstellation::uniform(Arc::new(MappingTable::table_l3()), reads.positions());
        group.bench_with_input(BenchmarkId::from_parameter(n), &reads, |b, reads| {
            b.iter(|| demap_block(black_box(reads), &eff, 50.0).unwrap())
        });
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("trial");
    let channels = [
        ("sampling", ChannelSpec::Sampling),
        ("substitution", ChannelSpec::Substitution { epsilon: 0.05 }),
        (
            "insertion_deletion",
            ChannelSpec::InsertionDeletion { p_i: 0.001, p_d: 0.001 },
        ),
    ];
    for (name, channel) in channels {
        let sim = wran_simulation(channel, 5);
        let mut t = 0u64;
        group.bench_function(name, |b| {
            b.iter(|| {
                t += 1;
                sim.run_trial(5, t).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, decoding, demapping, trials);
criterion_main!(benches);
