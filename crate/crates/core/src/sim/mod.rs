//! Monte Carlo experiment driver.
//!
//! Every block draws its randomness from its own stream, derived from the
//! master seed, the sweep point index and the block index. Blocks may be
//! simulated by several workers; tallies are reduced in block order and the
//! stop rules are checked after each block, so results do not depend on the
//! worker count.

mod cache;
mod config;
mod output;

use std::sync::Arc;
use std::time::Instant;

pub use cache::{cache_key, cache_path, load_or_build, save as save_codebook};
pub use config::SimConfig;
pub use output::{distance_csv, sweep_csv, BER_HEADER};

use crate::channel::{add_awgn, block_rng, sigma_from_ebn0, transmit_noiseless, SymbolBlock};
use crate::codebook::{Codebook, CodebookParams};
use crate::detector::{detect_hard, detect_soft, DetectorConfig};
use crate::fec::{conv_encode, viterbi_decode, ConvCode};
use crate::pulse::TapSet;
use crate::Result;
use rand::Rng;

/// One row of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub bit_errors: u64,
    pub bits_counted: u64,
    pub block_errors: u64,
    pub blocks: u64,
    pub ber: f64,
    pub fer: f64,
    /// Codebook rows covered by the detector searches, counting pruned rows.
    pub distance_scans: u64,
    /// Seconds spent on this point.
    pub wall_time: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockTally {
    bit_errors: u64,
    bits: u64,
    rows_scanned: u64,
}

struct Link {
    cfg: SimConfig,
    channel: TapSet,
    detector: DetectorConfig,
    code: ConvCode,
}

impl Link {
    fn new(cfg: &SimConfig, codebook: Arc<Codebook>) -> Result<Self> {
        cfg.validate()?;
        let detector = DetectorConfig::new(codebook)
            .with_n_l(cfg.n_l)
            .with_clamp(cfg.llr_clamp)
            .with_edge_mode(cfg.edge_mode())
            .with_search(cfg.search_method());
        detector.validate()?;
        Ok(Link {
            cfg: cfg.clone(),
            channel: cfg.channel_taps()?,
            detector,
            code: ConvCode::standard(),
        })
    }

    fn uncoded_block(&self, point: u32, block: u64, sigma: f64) -> Result<BlockTally> {
        let n = self.cfg.block_len;
        let mut rng = block_rng(self.cfg.master_seed, point, block);
        let a = SymbolBlock::random(n, &mut rng)?;
        let y = add_awgn(&transmit_noiseless(&a, &self.channel), sigma, &mut rng);
        let out = detect_hard(&y, &self.detector)?;
        let skip = if self.cfg.edge_exclusion {
            ((self.cfg.np - 1) / 2).min(n / 2)
        } else {
            0
        };
        let range = skip..n - skip;
        let bit_errors = a.as_slice()[range.clone()]
            .iter()
            .zip(&out.symbols.as_slice()[range.clone()])
            .filter(|(x, y)| x != y)
            .count() as u64;
        Ok(BlockTally {
            bit_errors,
            bits: range.len() as u64,
            rows_scanned: out.rows_scanned,
        })
    }

    fn coded_block(&self, point: u32, block: u64, sigma: f64) -> Result<BlockTally> {
        let n = self.cfg.block_len;
        let info_len = n / 2 - self.code.memory();
        let mut rng = block_rng(self.cfg.master_seed, point, block);
        let info: Vec<u8> = (0..info_len).map(|_| u8::from(rng.random::<bool>())).collect();
        let coded = conv_encode(&info, &self.code);
        debug_assert_eq!(coded.len(), n);
        let a = SymbolBlock::from_bits(&coded)?;
        let y = add_awgn(&transmit_noiseless(&a, &self.channel), sigma, &mut rng);
        // a noiseless run still needs a finite LLR scale; the clamp bounds it
        let soft = detect_soft(&y, &self.detector, sigma.max(1e-9))?;
        let decoded = viterbi_decode(&soft.llrs.llrs, &self.code)?;
        let bit_errors = decoded.iter().zip(&info).filter(|(x, y)| x != y).count() as u64;
        Ok(BlockTally {
            bit_errors,
            bits: info_len as u64,
            rows_scanned: soft.rows_scanned,
        })
    }

    fn run_block(&self, point: u32, block: u64, sigma: f64) -> Result<BlockTally> {
        if self.cfg.coded {
            self.coded_block(point, block, sigma)
        } else {
            self.uncoded_block(point, block, sigma)
        }
    }

    fn run_point(&self, point: u32, ebn0_db: f64) -> Result<BerPoint> {
        let start = Instant::now();
        let sigma = sigma_from_ebn0(ebn0_db, self.cfg.code_rate())?;
        let mut p = BerPoint {
            ebn0_db,
            bit_errors: 0,
            bits_counted: 0,
            block_errors: 0,
            blocks: 0,
            ber: 0.0,
            fer: 0.0,
            distance_scans: 0,
            wall_time: 0.0,
        };
        let workers = self.cfg.workers.max(1) as u64;
        'outer: while p.blocks < self.cfg.max_blocks {
            let first = p.blocks;
            let batch = workers.min(self.cfg.max_blocks - first);
            let tallies = if batch == 1 {
                vec![self.run_block(point, first, sigma)]
            } else {
                std::thread::scope(|s| {
                    let handles: Vec<_> = (first..first + batch)
                        .map(|b| s.spawn(move || self.run_block(point, b, sigma)))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("worker panicked"))
                        .collect::<Vec<_>>()
                })
            };
            for t in tallies {
                let t = t?;
                p.blocks += 1;
                p.bit_errors += t.bit_errors;
                p.bits_counted += t.bits;
                p.block_errors += u64::from(t.bit_errors > 0);
                p.distance_scans += t.rows_scanned;
                if p.bit_errors >= self.cfg.min_bit_errors {
                    break 'outer;
                }
            }
        }
        p.ber = if p.bits_counted > 0 {
            p.bit_errors as f64 / p.bits_counted as f64
        } else {
            0.0
        };
        p.fer = p.block_errors as f64 / p.blocks as f64;
        p.wall_time = start.elapsed().as_secs_f64();
        Ok(p)
    }

    fn sweep(&self) -> Result<Vec<BerPoint>> {
        self.cfg
            .ebn0_db_list
            .iter()
            .enumerate()
            .map(|(i, &e)| self.run_point(i as u32, e))
            .collect()
    }
}

/// Uncoded BER sweep with hard LCC decisions.
pub fn run_uncoded_sweep(cfg: &SimConfig) -> Result<Vec<BerPoint>> {
    let cfg = SimConfig {
        coded: false,
        ..cfg.clone()
    };
    run_sweep_with(&cfg, load_or_build(&cfg)?)
}

/// Coded BER sweep: convolutional code, soft LCC output, Viterbi decoding.
pub fn run_coded_sweep(cfg: &SimConfig) -> Result<Vec<BerPoint>> {
    let cfg = SimConfig {
        coded: true,
        ..cfg.clone()
    };
    run_sweep_with(&cfg, load_or_build(&cfg)?)
}

/// Sweep with a prebuilt codebook, honoring `cfg.coded`.
pub fn run_sweep_with(cfg: &SimConfig, codebook: Arc<Codebook>) -> Result<Vec<BerPoint>> {
    Link::new(cfg, codebook)?.sweep()
}

/// Minimum inter-class distance for each window length, at fixed `nt` and taps.
pub fn distance_profile(cfg: &SimConfig, np_range: &[usize]) -> Result<Vec<(usize, f64)>> {
    let taps = cfg.channel_taps()?;
    np_range
        .iter()
        .map(|&np| {
            let params = CodebookParams::with_cap(np, cfg.nt, &taps, cfg.size_cap)?;
            Ok((np, params.min_interclass_distance()?))
        })
        .collect()
}
