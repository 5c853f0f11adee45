use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codebook::{CodebookParams, DEFAULT_SIZE_CAP};
use crate::detector::{EdgeMode, SearchMethod, DEFAULT_CLAMP, DEFAULT_N_L};
use crate::pulse::{sample_taps, RrcParams, TapSet, DEFAULT_SPAN};
use crate::{Error, Result};

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Acceleration factor.
    pub tau: f64,
    /// Roll-off of the transmit pulse `h(t)`.
    pub rolloff_h: f64,
    /// Roll-off of the basis pulse `v(t)`. Recorded only; the discrete model
    /// does not depend on it.
    pub rolloff_v: f64,
    /// One-sided number of generated channel taps.
    pub span: usize,
    /// Explicit channel taps (odd length, centered). Overrides the RRC taps.
    pub custom_taps: Option<Vec<f64>>,
    /// Symbols per block.
    pub block_len: usize,
    pub np: usize,
    pub nt: usize,
    pub n_l: usize,
    pub ebn0_db_list: Vec<f64>,
    pub coded: bool,
    pub master_seed: u64,
    pub max_blocks: u64,
    pub min_bit_errors: u64,
    /// Leave `(np-1)/2` symbols at each block edge out of uncoded BER counts.
    pub edge_exclusion: bool,
    pub llr_clamp: f64,
    /// Restrict edge windows to in-block symbols instead of zero-filling.
    pub block_aware_edges: bool,
    /// Use the pruned tree search instead of the linear scan.
    pub tree_search: bool,
    /// Cap on `np + nt - 1`.
    pub size_cap: usize,
    /// Worker threads per sweep point.
    pub workers: usize,
    /// Directory for cached codebooks; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl SimConfig {
    /// Small profile for quick runs and CI: `np = 7`, `nt = 3`, `N = 200`.
    pub fn desk() -> Self {
        SimConfig {
            tau: 0.6,
            rolloff_h: 0.35,
            rolloff_v: 0.12,
            span: DEFAULT_SPAN,
            custom_taps: None,
            block_len: 200,
            np: 7,
            nt: 3,
            n_l: DEFAULT_N_L,
            ebn0_db_list: vec![0.0, 2.0, 4.0, 6.0],
            coded: false,
            master_seed: 1,
            max_blocks: 200,
            min_bit_errors: 100,
            edge_exclusion: false,
            llr_clamp: DEFAULT_CLAMP,
            block_aware_edges: false,
            tree_search: false,
            size_cap: DEFAULT_SIZE_CAP,
            workers: 1,
            cache_dir: None,
        }
    }

    /// Full-size profile: `np = 13`, `nt = 5`, `N = 1000`.
    pub fn full() -> Self {
        SimConfig {
            block_len: 1000,
            np: 13,
            nt: 5,
            ebn0_db_list: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            max_blocks: 10_000,
            ..Self::desk()
        }
    }

    /// Parses a TOML key/value file. Missing keys keep their desk defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn code_rate(&self) -> f64 {
        if self.coded {
            0.5
        } else {
            1.0
        }
    }

    pub fn search_method(&self) -> SearchMethod {
        if self.tree_search {
            SearchMethod::Tree
        } else {
            SearchMethod::Exhaustive
        }
    }

    pub fn edge_mode(&self) -> EdgeMode {
        if self.block_aware_edges {
            EdgeMode::BlockAware
        } else {
            EdgeMode::ZeroFill
        }
    }

    /// Full channel taps used by the transmitter.
    pub fn channel_taps(&self) -> Result<TapSet> {
        match &self.custom_taps {
            Some(taps) => TapSet::from_taps(taps.clone()),
            None => {
                let params = RrcParams::new(self.rolloff_h, 1.0, self.span)?;
                sample_taps(&params, self.tau)
            }
        }
    }

    pub fn codebook_params(&self) -> Result<CodebookParams> {
        CodebookParams::with_cap(self.np, self.nt, &self.channel_taps()?, self.size_cap)
    }

    pub fn validate(&self) -> Result<()> {
        if self.custom_taps.is_none() {
            let limit = 1.0 / (1.0 + self.rolloff_h);
            if !(self.tau > 0.0 && self.tau < limit) {
                return Err(Error::ModelValidity {
                    tau: self.tau,
                    rolloff: self.rolloff_h,
                    limit,
                });
            }
        }
        if !(0.0..=1.0).contains(&self.rolloff_v) {
            return Err(Error::Config(format!("rolloff_v {} outside [0, 1]", self.rolloff_v)));
        }
        for (what, value) in [("np", self.np), ("nt", self.nt)] {
            if value % 2 == 0 {
                return Err(Error::NotOdd { what, value });
            }
        }
        if self.block_len == 0 {
            return Err(Error::Config("block_len must be positive".into()));
        }
        if self.n_l == 0 {
            return Err(Error::Config("n_l must be positive".into()));
        }
        if self.max_blocks == 0 || self.min_bit_errors == 0 {
            return Err(Error::Config("stop rules must be positive".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        if !(self.llr_clamp > 0.0) {
            return Err(Error::Config("llr_clamp must be positive".into()));
        }
        if self.ebn0_db_list.iter().any(|v| v.is_nan()) {
            return Err(Error::Config("Eb/N0 values must be numbers".into()));
        }
        if self.coded {
            let info = (self.block_len / 2).checked_sub(6).unwrap_or(0);
            if self.block_len % 2 != 0 || info == 0 {
                return Err(Error::Config(format!(
                    "coded runs need an even block length above 12, got {}",
                    self.block_len
                )));
            }
        }
        let params = self.codebook_params()?;
        if self.n_l as u64 > params.size() {
            return Err(Error::Config(format!(
                "n_l = {} exceeds the {} codebook rows",
                self.n_l,
                params.size()
            )));
        }
        Ok(())
    }
}
