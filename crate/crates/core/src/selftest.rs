//! Quick consistency checks against the brute-force references, run by the
//! `selftest` CLI subcommand.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn, transmit_noiseless, ReceivedBlock, SymbolBlock};
use crate::codebook::{Codebook, CodebookParams};
use crate::detector::{detect_hard, detect_soft, DetectorConfig, EdgeMode};
use crate::fec::{conv_encode, viterbi_decode, ConvCode};
use crate::oracle::{exact_llr, exact_ml_sequence};
use crate::pulse::TapSet;
use crate::sim::{run_uncoded_sweep, SimConfig};
use crate::Result;

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn toy() -> TapSet {
    TapSet::from_taps(vec![0.3, 0.8, 0.3]).expect("valid taps")
}

fn class_distances() -> Result<Check> {
    let expected = [0.4, 0.32f64.sqrt(), 0.48f64.sqrt()];
    let mut got = Vec::new();
    for np in 1..=3 {
        got.push(CodebookParams::new(np, 3, &toy())?.min_interclass_distance()?);
    }
    let passed = got.iter().zip(expected).all(|(g, e)| (g - e).abs() < 5e-4);
    Ok(Check {
        name: "toy class distances",
        passed,
        detail: format!("{got:.4?}"),
    })
}

fn oracle_equivalence() -> Result<Check> {
    let n = 8;
    let taps = toy();
    let cb = Codebook::build(CodebookParams::new(2 * n - 1, 3, &taps)?)?;
    let full = cb.len() as usize;
    let cfg = DetectorConfig::new(Arc::new(cb))
        .with_n_l(full)
        .with_clamp(1e6)
        .with_edge_mode(EdgeMode::BlockAware);
    let sigma = 0.4;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut hard_ok = true;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a = SymbolBlock::random(n, &mut rng)?;
        let y = add_awgn(&transmit_noiseless(&a, &taps), sigma, &mut rng);
        hard_ok &= detect_hard(&y, &cfg)?.symbols == exact_ml_sequence(&y, &taps)?;
        let soft = detect_soft(&y, &cfg, sigma)?.llrs.llrs;
        let exact = exact_llr(&y, &taps, sigma, None)?.llrs;
        for (s, e) in soft.iter().zip(&exact) {
            worst = worst.max((s - e).abs());
        }
    }
    Ok(Check {
        name: "full-window LCC vs exact ML/MAP",
        passed: hard_ok && worst < 1e-6,
        detail: format!("hard identical: {hard_ok}, max |LLR gap| = {worst:.2e}"),
    })
}

fn fec_round_trip() -> Result<Check> {
    let code = ConvCode::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut ok = true;
    for _ in 0..50 {
        let info: Vec<u8> = (0..100).map(|_| u8::from(rng.random::<bool>())).collect();
        let coded = conv_encode(&info, &code);
        let mut llrs: Vec<f64> = coded.iter().map(|&c| if c == 1 { 5.0 } else { -5.0 }).collect();
        ok &= viterbi_decode(&llrs, &code)? == info;
        let pos = rng.random_range(0..llrs.len());
        llrs[pos] = -llrs[pos];
        ok &= viterbi_decode(&llrs, &code)? == info;
    }
    Ok(Check {
        name: "Viterbi round trip with single flips",
        passed: ok,
        detail: "50 blocks of 100 bits".into(),
    })
}

fn noiseless_rrc() -> Result<Check> {
    let cfg = SimConfig {
        np: 7,
        nt: 5,
        block_len: 200,
        ebn0_db_list: vec![f64::INFINITY],
        max_blocks: 5,
        edge_exclusion: true,
        ..SimConfig::desk()
    };
    let p = &run_uncoded_sweep(&cfg)?[0];
    Ok(Check {
        name: "noiseless RRC tau=0.6 detection",
        passed: p.bit_errors == 0,
        detail: format!("{} errors in {} bits", p.bit_errors, p.bits_counted),
    })
}

fn received_zero_is_neutral() -> Result<Check> {
    let y = ReceivedBlock::new(vec![0.0; 6], 0.5);
    let r = exact_llr(&y, &toy(), 0.5, None)?;
    Ok(Check {
        name: "zero observation gives zero LLRs",
        passed: r.llrs.iter().all(|l| l.abs() < 1e-12),
        detail: format!("{:?}", r.llrs),
    })
}

/// Runs every check.
pub fn run_all() -> Result<Vec<Check>> {
    Ok(vec![
        class_distances()?,
        received_zero_is_neutral()?,
        oracle_equivalence()?,
        fec_round_trip()?,
        noiseless_rrc()?,
    ])
}
