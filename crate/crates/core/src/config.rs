//! Experiment configuration.
//!
//! JSON schema (keys other than these are rejected):
//!
//! | key | type | default |
//! |-----|------|---------|
//! | `code` | manifest name | required |
//! | `L` | bits per symbol | required |
//! | `constellation` | `"table_l3"`, `"table_l4"` or an inline table | by `L` |
//! | `channel` | `{"kind": "sampling" \| "substitution" \| "insertion_deletion", ..}` | required |
//! | `n_values` | list of read counts | required |
//! | `max_trials` | trials per `n` | 100000 |
//! | `target_error_events` | stop after this many block errors (0 = never) | 100 |
//! | `seed` | master seed | 0 |
//! | `llr_max` | LLR clamp | 50 |
//! | `max_iter` | decoder iterations | 20 |
//! | `decoder` | `"spa"` or `"min_sum"` | `"spa"` |
//! | `min_sum_scale` | min-sum scaling | 0.75 |

use std::sync::Arc;

use serde::Deserialize;

use crate::channel::ChannelSpec;
use crate::codes::CodeRegistry;
use crate::constellation::MappingTable;
use crate::demapper::DEFAULT_LLR_MAX;
use crate::error::{Error, Result};
use crate::ldpc::{CheckRule, LdpcCode, DEFAULT_MAX_ITERATIONS, DEFAULT_MIN_SUM_SCALE};

pub const DEFAULT_MAX_TRIALS: u64 = 100_000;
pub const DEFAULT_TARGET_ERROR_EVENTS: u64 = 100;

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub code_id: String,
    pub code: Arc<LdpcCode>,
    pub constellation_id: String,
    pub table: Arc<MappingTable>,
    pub channel: ChannelSpec,
    pub n_values: Vec<usize>,
    pub max_trials: u64,
    /// Block errors after which a sweep point stops; 0 disables early stopping.
    pub target_error_events: u64,
    pub master_seed: u64,
    pub llr_max: f64,
    pub max_iter: usize,
    pub rule: CheckRule,
}

impl ExperimentConfig {
    /// A configuration with default trial counts, seed 0 and the
    /// sum-product decoder.
    pub fn new(
        code_id: impl Into<String>,
        code: Arc<LdpcCode>,
        table: Arc<MappingTable>,
        channel: ChannelSpec,
        n_values: Vec<usize>,
    ) -> Self {
        Self {
            code_id: code_id.into(),
            code,
            constellation_id: "custom".into(),
            table,
            channel,
            n_values,
            max_trials: DEFAULT_MAX_TRIALS,
            target_error_events: DEFAULT_TARGET_ERROR_EVENTS,
            master_seed: 0,
            llr_max: DEFAULT_LLR_MAX,
            max_iter: DEFAULT_MAX_ITERATIONS,
            rule: CheckRule::SumProduct,
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.table.bits_per_symbol()
    }

    /// Number of composite positions `E = N / L`.
    pub fn positions(&self) -> usize {
        self.code.n() / self.bits_per_symbol()
    }

    pub fn validate(&self) -> Result<()> {
        let (n, l) = (self.code.n(), self.bits_per_symbol());
        if n % l != 0 {
            return Err(Error::Config(format!(
                "code length N = {n} is not divisible by L = {l}"
            )));
        }
        self.channel
            .validate()
            .map_err(|e| Error::Config(format!("channel: {e}")))?;
        if self.n_values.is_empty() {
            return Err(Error::Config("n_values must not be empty".into()));
        }
        if let Some(&bad) = self.n_values.iter().find(|&&v| v < 1) {
            return Err(Error::Config(format!("n_values must all be at least 1, got {bad}")));
        }
        if !(self.llr_max > 0.0 && self.llr_max.is_finite()) {
            return Err(Error::Config(format!(
                "llr_max must be positive and finite, got {}",
                self.llr_max
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if let CheckRule::MinSum { scale } = self.rule {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Config(format!("min_sum_scale must be positive, got {scale}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DecoderChoice {
    #[default]
    Spa,
    MinSum,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    code: String,
    #[serde(rename = "L")]
    bits_per_symbol: usize,
    #[serde(default)]
    constellation: Option<serde_json::Value>,
    channel: ChannelSpec,
    n_values: Vec<usize>,
    #[serde(default = "default_max_trials")]
    max_trials: u64,
    #[serde(default = "default_target")]
    target_error_events: u64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_llr_max")]
    llr_max: f64,
    #[serde(default = "default_max_iter")]
    max_iter: usize,
    #[serde(default)]
    decoder: DecoderChoice,
    #[serde(default)]
    min_sum_scale: Option<f64>,
}

fn default_max_trials() -> u64 {
    DEFAULT_MAX_TRIALS
}

fn default_target() -> u64 {
    DEFAULT_TARGET_ERROR_EVENTS
}

fn default_llr_max() -> f64 {
    DEFAULT_LLR_MAX
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITERATIONS
}

/// Built-in constellation for an id.
pub fn builtin_table(id: &str) -> Option<MappingTable> {
    match id {
        "table_l3" => Some(MappingTable::table_l3()),
        "table_l4" => Some(MappingTable::table_l4()),
        _ => None,
    }
}

fn resolve_table(raw: Option<&serde_json::Value>, l: usize) -> Result<(String, MappingTable)> {
    let (id, table) = match raw {
        None => {
            let id = format!("table_l{l}");
            let table = builtin_table(&id).ok_or_else(|| {
                Error::Config(format!(
                    "no built-in constellation for L = {l}; give `constellation` explicitly"
                ))
            })?;
            (id, table)
        }
        Some(serde_json::Value::String(id)) => {
            let table = builtin_table(id).ok_or_else(|| {
                Error::Config(format!(
                    "constellation: unknown id {id:?} (expected table_l3 or table_l4)"
                ))
            })?;
            (id.clone(), table)
        }
        Some(value @ serde_json::Value::Object(_)) => {
            let table = MappingTable::from_json(&value.to_string())
                .map_err(|e| Error::Config(format!("constellation: {e}")))?;
            ("inline".to_owned(), table)
        }
        Some(_) => {
            return Err(Error::Config(
                "constellation: expected an id string or a table object".into(),
            ))
        }
    };
    if table.bits_per_symbol() != l {
        return Err(Error::Config(format!(
            "constellation {id} has L = {} but the config says L = {l}",
            table.bits_per_symbol()
        )));
    }
    Ok((id, table))
}

/// Parses and validates a JSON experiment description.
pub fn parse_config(text: &str, registry: &CodeRegistry) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            Error::Config(e.inner().to_string())
        } else {
            Error::Config(format!("key `{path}`: {}", e.inner()))
        }
    })?;

    let entry = registry
        .get(&raw.code)
        .ok_or_else(|| Error::Config(format!("code: {:?} is not in the codes manifest", raw.code)))?;
    if raw.bits_per_symbol == 0 || entry.n % raw.bits_per_symbol != 0 {
        return Err(Error::Config(format!(
            "code {} has N = {}, which is not divisible by L = {}",
            raw.code, entry.n, raw.bits_per_symbol
        )));
    }
    let (constellation_id, table) = resolve_table(raw.constellation.as_ref(), raw.bits_per_symbol)?;
    let code = registry.load(&raw.code)?;

    let rule = match raw.decoder {
        DecoderChoice::Spa => {
            if raw.min_sum_scale.is_some() {
                return Err(Error::Config(
                    "min_sum_scale only applies to decoder \"min_sum\"".into(),
                ));
            }
            CheckRule::SumProduct
        }
        DecoderChoice::MinSum => CheckRule::MinSum {
            scale: raw.min_sum_scale.unwrap_or(DEFAULT_MIN_SUM_SCALE),
        },
    };

    let config = ExperimentConfig {
        code_id: raw.code,
        code: Arc::new(code),
        constellation_id,
        table: Arc::new(table),
        channel: raw.channel,
        n_values: raw.n_values,
        max_trials: raw.max_trials,
        target_error_events: raw.target_error_events,
        master_seed: raw.seed,
        llr_max: raw.llr_max,
        max_iter: raw.max_iter,
        rule,
    };
    config.validate()?;
    Ok(config)
}
