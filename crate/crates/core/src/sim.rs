//! Monte-Carlo block error rate estimation.
//!
//! A trial encodes a random message, maps it to composite letters,
//! synthesizes `n` strands, corrupts them, tallies the reads, demaps and
//! decodes. Each trial is a pure function of `(seed, n, trial index)`, so a
//! sweep gives the same answer for any number of workers: outcomes are
//! scanned in index order and the point stops at exactly the trial that
//! reaches the error target.

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{apply_insertion_deletion, apply_substitution, filter_to_length, synthesize, tally, ChannelSpec};
use crate::config::ExperimentConfig;
use crate::constellation::{map_codeword, EffectiveConstellation};
use crate::demapper::{demap_block, LlrVector};
use crate::error::{Error, Result};
use crate::ldpc::decode;
use crate::rng::{stage_rng, Stage};

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub block_error: bool,
    /// Wrong message bits.
    pub bit_errors: usize,
    /// Strands that survived the length filter.
    pub n_hat: usize,
    pub decoder_iterations: usize,
    pub converged: bool,
}

impl TrialOutcome {
    pub fn erased(&self) -> bool {
        self.n_hat == 0
    }
}

/// Aggregate for one value of `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: usize,
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub erasures: u64,
    /// `None` when no trial ran.
    pub bler: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub ber: Option<f64>,
    pub mean_iters: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, n: usize) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.n == n)
    }

    /// Writes the CSV report: one header row, then one row per `n`.
    /// Undefined ratios are written as `nan`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "n",
            "trials",
            "block_errors",
            "bler",
            "ci_low",
            "ci_high",
            "ber",
            "erasures",
            "mean_iters",
        ])
        .map_err(csv_error)?;
        let ratio = |x: Option<f64>| x.map_or_else(|| "nan".to_owned(), |v| v.to_string());
        for p in &self.points {
            w.write_record([
                p.n.to_string(),
                p.trials.to_string(),
                p.block_errors.to_string(),
                ratio(p.bler),
                ratio(p.ci_low),
                ratio(p.ci_high),
                ratio(p.ber),
                p.erasures.to_string(),
                ratio(p.mean_iters),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::invalid(format!("CSV: {other:?}")),
    }
}

/// Wilson score interval at 95% confidence.
pub fn estimate_confidence(errors: u64, trials: u64) -> Result<(f64, f64)> {
    if trials == 0 || errors > trials {
        return Err(Error::invalid(format!(
            "need 0 <= errors <= trials and trials >= 1, got {errors} / {trials}"
        )));
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z_95 * Z_95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z_95 / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if errors == 0 {
        0.0
    } else {
        (centre - half).clamp(0.0, p)
    };
    let high = if errors == trials {
        1.0
    } else {
        (centre + half).clamp(p, 1.0)
    };
    Ok((low, high))
}

/// Per-experiment state shared by every trial.
pub struct Simulation {
    config: ExperimentConfig,
    /// Constellation for channels whose adjustment does not depend on `n_hat`.
    fixed: Option<EffectiveConstellation>,
    no_shift: Vec<f64>,
}

impl Simulation {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let e = config.positions();
        let (fixed, no_shift) = match config.channel {
            ChannelSpec::Sampling => (
                Some(EffectiveConstellation::uniform(config.table.clone(), e)),
                Vec::new(),
            ),
            ChannelSpec::Substitution { epsilon } => (
                Some(EffectiveConstellation::uniform(
                    Arc::new(config.table.substitution_adjust(epsilon)?),
                    e,
                )),
                Vec::new(),
            ),
            ChannelSpec::InsertionDeletion { p_i, p_d } => (
                None,
                (1..=e)
                    .map(|i| crate::channel::no_shift_probability(e, i, p_i, p_d))
                    .collect::<Result<_>>()?,
            ),
        };
        Ok(Self {
            config,
            fixed,
            no_shift,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    fn message(&self, n: usize, trial: u64) -> Vec<u8> {
        let mut rng = stage_rng(self.config.master_seed, n, trial, Stage::Message);
        (0..self.config.code.k())
            .map(|_| u8::from(rng.random::<bool>()))
            .collect()
    }

    /// Channel output for one trial: the message and its decoder input.
    fn observe(&self, n: usize, trial: u64) -> Result<(Vec<u8>, LlrVector, usize)> {
        let cfg = &self.config;
        let seed = cfg.master_seed;
        let message = self.message(n, trial);
        let codeword = cfg.code.encode(&message)?;
        let points = map_codeword(&cfg.table, &codeword)?;
        let pool = synthesize(&points, n, &mut stage_rng(seed, n, trial, Stage::Synthesis))?;
        let pool = match cfg.channel {
            ChannelSpec::Sampling => pool,
            ChannelSpec::Substitution { epsilon } => {
                apply_substitution(pool, epsilon, &mut stage_rng(seed, n, trial, Stage::Substitution))?
            }
            ChannelSpec::InsertionDeletion { p_i, p_d } => {
                let e = pool.nominal_length();
                let strands =
                    apply_insertion_deletion(pool, p_i, p_d, &mut stage_rng(seed, n, trial, Stage::InsertionDeletion))?;
                filter_to_length(strands, e)
            }
        };
        let reads = tally(&pool)?;
        let n_hat = reads.reads();
        let llr = match &self.fixed {
            Some(eff) => demap_block(&reads, eff, cfg.llr_max)?,
            None if n_hat == 0 => LlrVector {
                values: vec![0.0; cfg.code.n()],
                erased: true,
            },
            None => {
                let eff = EffectiveConstellation::insertion_deletion(&cfg.table, &self.no_shift, n_hat)?;
                demap_block(&reads, &eff, cfg.llr_max)?
            }
        };
        Ok((message, llr, n_hat))
    }

    /// Decoder input of one trial, for inspection.
    pub fn trial_llrs(&self, n: usize, trial: u64) -> Result<LlrVector> {
        Ok(self.observe(n, trial)?.1)
    }

    pub fn run_trial(&self, n: usize, trial: u64) -> Result<TrialOutcome> {
        if n < 1 {
            return Err(Error::invalid("n must be at least 1"));
        }
        let cfg = &self.config;
        let (message, llr, n_hat) = self.observe(n, trial)?;
        let decoded = decode(cfg.code.parity_check(), &llr.values, cfg.max_iter, cfg.rule)?;
        let estimate = cfg.code.extract_message(&decoded.bits)?;
        let bit_errors = message.iter().zip(&estimate).filter(|(a, b)| a != b).count();
        Ok(TrialOutcome {
            block_error: bit_errors > 0,
            bit_errors,
            n_hat,
            decoder_iterations: decoded.iterations,
            converged: decoded.converged,
        })
    }

    /// Runs trials for one `n` on the current rayon pool.
    pub fn run_point(&self, n: usize) -> Result<SweepPoint> {
        let cfg = &self.config;
        let mut acc = Accumulator::default();
        let mut next = 0u64;
        const MIN_BATCH: u64 = 256;
        const MAX_BATCH: u64 = 1 << 14;
        'outer: while next < cfg.max_trials && !acc.done(cfg.target_error_events) {
            let batch = next.clamp(MIN_BATCH, MAX_BATCH).min(cfg.max_trials - next);
            let outcomes = (next..next + batch)
                .into_par_iter()
                .map(|t| self.run_trial(n, t))
                .collect::<Result<Vec<_>>>()?;
            next += batch;
            for o in outcomes {
                acc.add(&o);
                if acc.done(cfg.target_error_events) {
                    break 'outer;
                }
            }
        }
        acc.finish(n, cfg.code.k())
    }

    /// Full sweep over `n_values`. `workers = 0` uses the rayon default.
    pub fn run_sweep(&self, workers: usize) -> Result<SweepResult> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            let points = self
                .config
                .n_values
                .iter()
                .map(|&n| self.run_point(n))
                .collect::<Result<_>>()?;
            Ok(SweepResult { points })
        })
    }
}

#[derive(Default)]
struct Accumulator {
    trials: u64,
    block_errors: u64,
    bit_errors: u64,
    erasures: u64,
    iterations: u64,
}

impl Accumulator {
    fn add(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        self.block_errors += u64::from(o.block_error);
        self.bit_errors += o.bit_errors as u64;
        self.erasures += u64::from(o.erased());
        self.iterations += o.decoder_iterations as u64;
    }

    fn done(&self, target: u64) -> bool {
        target > 0 && self.block_errors >= target
    }

    fn finish(self, n: usize, k: usize) -> Result<SweepPoint> {
        let (bler, ci, ber, mean_iters) = if self.trials == 0 {
            (None, None, None, None)
        } else {
            let t = self.trials as f64;
            let ber = if k == 0 {
                0.0
            } else {
                self.bit_errors as f64 / (t * k as f64)
            };
            (
                Some(self.block_errors as f64 / t),
                Some(estimate_confidence(self.block_errors, self.trials)?),
                Some(ber),
                Some(self.iterations as f64 / t),
            )
        };
        Ok(SweepPoint {
            n,
            trials: self.trials,
            block_errors: self.block_errors,
            bit_errors: self.bit_errors,
            erasures: self.erasures,
            bler,
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
            ber,
            mean_iters,
        })
    }
}

/// One trial of an experiment.
pub fn run_trial(config: &ExperimentConfig, n: usize, trial: u64) -> Result<TrialOutcome> {
    Simulation::new(config.clone())?.run_trial(n, trial)
}

/// Sweeps every `n` of the experiment with the default worker count.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    Simulation::new(config.clone())?.run_sweep(0)
}
