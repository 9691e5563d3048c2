//! Composite-DNA storage simulated as a coded multinomial channel.
//!
//! Bits are LDPC-encoded, grouped into `L`-bit symbols and mapped to
//! composite letters (mixtures of A, C, T, G). Many strand copies are
//! synthesized, corrupted and read; per-position nucleotide counts are turned
//! into bit LLRs by a multinomial soft demapper and decoded with belief
//! propagation.

pub mod channel;
pub mod codes;
pub mod config;
pub mod constellation;
pub mod demapper;
pub mod error;
pub mod ldpc;
pub mod rng;
pub mod sim;
pub mod validate;

pub use channel::{ChannelSpec, Nucleotide, ReadCounts, Strand, StrandPool};
pub use codes::{CodeEntry, CodeRegistry};
pub use config::{parse_config, ExperimentConfig};
pub use constellation::{EffectiveConstellation, MappingTable, ProbabilityQuartet};
pub use demapper::{bit_llrs, demap_block, multinomial_log_pmf, symbol_log_likelihoods, LlrVector, SymbolLikelihoods};
pub use error::{Error, Result};
pub use ldpc::{CheckRule, DecodeOutcome, LdpcCode, ParityCheckMatrix};
pub use sim::{estimate_confidence, run_sweep, run_trial, Simulation, SweepPoint, SweepResult, TrialOutcome};
