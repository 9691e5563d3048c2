//! Manifest of shipped LDPC codes.
//!
//! The built-in registry embeds the manifest and alist files from
//! `data/codes`. A registry can also be loaded from a manifest on disk, in
//! which case `path` entries are resolved relative to the manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ldpc::{LdpcCode, ParityCheckMatrix};

const BUILTIN_MANIFEST: &str = include_str!("../data/codes/manifest.json");
const BUILTIN_FILES: &[(&str, &str)] = &[
    ("nr5g_bg1_z12.alist", include_str!("../data/codes/nr5g_bg1_z12.alist")),
    (
        "wran_802_22_r12_n480.alist",
        include_str!("../data/codes/wran_802_22_r12_n480.alist"),
    ),
    (
        "ieee80211n_r34_n648.alist",
        include_str!("../data/codes/ieee80211n_r34_n648.alist"),
    ),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeEntry {
    pub name: String,
    pub path: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub rate: f64,
    #[serde(default)]
    pub provenance: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    codes: Vec<CodeEntry>,
}

#[derive(Clone, Debug)]
enum Source {
    Builtin,
    Directory(PathBuf),
}

#[derive(Clone, Debug)]
pub struct CodeRegistry {
    entries: Vec<CodeEntry>,
    source: Source,
}

impl CodeRegistry {
    pub fn builtin() -> Self {
        let manifest: Manifest = serde_json::from_str(BUILTIN_MANIFEST).expect("embedded manifest is valid");
        Self {
            entries: manifest.codes,
            source: Source::Builtin,
        }
    }

    pub fn from_manifest_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_manifest_str(&text, dir)
    }

    /// Parses a manifest whose alist paths are relative to `dir`.
    pub fn from_manifest_str(text: &str, dir: impl Into<PathBuf>) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(text)?;
        let mut names: Vec<&str> = manifest.codes.iter().map(|c| c.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate code name {:?} in manifest", w[0])));
        }
        Ok(Self {
            entries: manifest.codes,
            source: Source::Directory(dir.into()),
        })
    }

    pub fn entries(&self) -> &[CodeEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&CodeEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    fn entry(&self, name: &str) -> Result<&CodeEntry> {
        self.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.entries.iter().map(|e| e.name.as_str()).collect();
            Error::Config(format!("unknown code {name:?}; known codes: {}", known.join(", ")))
        })
    }

    /// Raw alist text of a code.
    pub fn alist_text(&self, name: &str) -> Result<String> {
        let entry = self.entry(name)?;
        match &self.source {
            Source::Builtin => BUILTIN_FILES
                .iter()
                .find(|(file, _)| *file == entry.path)
                .map(|(_, text)| (*text).to_owned())
                .ok_or_else(|| Error::Config(format!("no embedded file {:?}", entry.path))),
            Source::Directory(dir) => Ok(std::fs::read_to_string(dir.join(&entry.path))?),
        }
    }

    pub fn parity_check(&self, name: &str) -> Result<ParityCheckMatrix> {
        ParityCheckMatrix::from_alist(&self.alist_text(name)?)
    }

    /// Loads a code and checks its dimensions against the manifest.
    pub fn load(&self, name: &str) -> Result<LdpcCode> {
        let entry = self.entry(name)?;
        let code = LdpcCode::new(self.parity_check(name)?);
        if code.n() != entry.n || code.k() != entry.k {
            return Err(Error::Config(format!(
                "code {name:?}: manifest says K = {}, N = {} but the matrix gives K = {}, N = {}",
                entry.k,
                entry.n,
                code.k(),
                code.n()
            )));
        }
        Ok(code)
    }
}

impl Default for CodeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
