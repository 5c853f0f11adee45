//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! failure status if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use ftn_lcc::channel::{add_awgn, transmit_noiseless, SymbolBlock};
use ftn_lcc::codebook::{Codebook, CodebookParams};
use ftn_lcc::detector::{detect_hard, detect_soft, DetectorConfig, EdgeMode};
use ftn_lcc::fec::{conv_encode, viterbi_decode, ConvCode};
use ftn_lcc::oracle::{exact_llr, exact_ml_sequence};
use ftn_lcc::pulse::TapSet;
use ftn_lcc::sim::{distance_profile, run_coded_sweep, run_uncoded_sweep, sweep_csv, SimConfig};

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn toy() -> TapSet {
    TapSet::from_taps(vec![0.3, 0.8, 0.3]).unwrap()
}

fn toy_distances() -> Outcome {
    let expected = [0.4, 0.5657, 0.6928];
    let mut got = Vec::new();
    for np in 1..=3 {
        got.push(CodebookParams::new(np, 3, &toy())?.min_interclass_distance()?);
    }
    let ok = got.iter().zip(expected).all(|(g, e)| (g - e).abs() <= 5e-4);
    Ok((ok, format!("d(np=1,2,3) = {got:.4?}")))
}

fn example_sample_set() -> Outcome {
    let cb = Codebook::build(CodebookParams::new(1, 3, &toy())?)?;
    let mut got: Vec<f64> = cb.samples().map(|s| s[0]).collect();
    got.sort_by(f64::total_cmp);
    got.dedup();
    // exact sums of the taps with signs
    let expected = [-0.3 - 0.8 - 0.3, -0.3 - 0.8 + 0.3, 0.3 - 0.8 - 0.3, 0.3 - 0.8 + 0.3];
    let mut expected: Vec<f64> = expected.iter().flat_map(|&v: &f64| [v, -v]).collect();
    expected.sort_by(f64::total_cmp);
    expected.dedup();
    let rounded: Vec<f64> = got.iter().map(|v| (v * 10.0).round() / 10.0).collect();
    let ok = got == expected && rounded == [-1.4, -0.8, -0.2, 0.2, 0.8, 1.4];
    Ok((ok, format!("samples {got:.4?}")))
}

fn distance_shape() -> Outcome {
    let cfg = SimConfig {
        tau: 0.6,
        nt: 5,
        ..SimConfig::full()
    };
    let nps: Vec<usize> = (1..=15).step_by(2).collect();
    let d: Vec<f64> = distance_profile(&cfg, &nps)?.into_iter().map(|(_, d)| d).collect();
    let monotone = d.windows(2).all(|w| w[1] >= w[0]);
    let top = d[7] - d[6];
    let bottom = d[1] - d[0];
    Ok((
        monotone && top < bottom,
        format!("d = {d:.4?}; d(15)-d(13) = {top:.4} < d(3)-d(1) = {bottom:.4}"),
    ))
}

/// Detector whose window spans the whole block of length `n`.
fn full_window(n: usize, n_l: Option<usize>) -> Result<DetectorConfig, Box<dyn std::error::Error>> {
    let cb = Codebook::build(CodebookParams::new(2 * n - 1, 3, &toy())?)?;
    let full = cb.len() as usize;
    Ok(DetectorConfig::new(Arc::new(cb))
        .with_n_l(n_l.unwrap_or(full))
        .with_clamp(1e9)
        .with_edge_mode(EdgeMode::BlockAware))
}

fn oracle_hard() -> Outcome {
    let n = 8;
    let sigma = 0.4;
    let cfg = full_window(n, Some(1))?;
    // np = N: only the symbol whose window is the whole block is comparable
    let cb8 = Codebook::build(CodebookParams::new(n, 3, &toy())?)?;
    let cfg8 = DetectorConfig::new(Arc::new(cb8)).with_edge_mode(EdgeMode::BlockAware);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut mismatched, mut mismatched_8) = (0, 0);
    for _ in 0..100 {
        let a = SymbolBlock::random(n, &mut rng)?;
        let y = add_awgn(&transmit_noiseless(&a, &toy()), sigma, &mut rng);
        let ml = exact_ml_sequence(&y, &toy())?;
        let lcc = detect_hard(&y, &cfg)?.symbols;
        mismatched += lcc.as_slice().iter().zip(ml.as_slice()).filter(|(x, y)| x != y).count();
        let lcc8 = detect_hard(&y, &cfg8)?.symbols;
        mismatched_8 += usize::from(lcc8.as_slice()[3] != ml.as_slice()[3]);
    }
    Ok((
        mismatched == 0 && mismatched_8 == 0,
        format!(
            "100 blocks, N=8, sigma=0.4: {mismatched} mismatches over all symbols (np=15), \
             {mismatched_8} on the fully observed symbol (np=8)"
        ),
    ))
}

fn oracle_soft() -> Outcome {
    let n = 8;
    let sigma = 0.4;
    let cfg = full_window(n, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = SymbolBlock::random(n, &mut rng)?;
        let y = add_awgn(&transmit_noiseless(&a, &toy()), sigma, &mut rng);
        let soft = detect_soft(&y, &cfg, sigma)?.llrs.llrs;
        let exact = exact_llr(&y, &toy(), sigma, None)?.llrs;
        for (s, e) in soft.iter().zip(&exact) {
            worst = worst.max((s - e).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max |LLR - exact| = {worst:.3e} over 100 blocks")))
}

fn awgn_sanity() -> Outcome {
    let cfg = SimConfig {
        custom_taps: Some(vec![1.0]),
        np: 1,
        nt: 1,
        n_l: 2,
        block_len: 1000,
        ebn0_db_list: vec![4.0],
        max_blocks: 1000,
        min_bit_errors: u64::MAX,
        master_seed: 6,
        ..SimConfig::desk()
    };
    let p = &run_uncoded_sweep(&cfg)?[0];
    let ebn0 = 10f64.powf(0.4);
    let q = 0.5 * erfc(ebn0.sqrt());
    let sd = (q * (1.0 - q) / p.bits_counted as f64).sqrt();
    let z = (p.ber - q) / sd;
    Ok((
        p.bits_counted >= 1_000_000 && z.abs() <= 3.0,
        format!("BER {:.4e} vs Q = {q:.4e} over {} bits, z = {z:.2}", p.ber, p.bits_counted),
    ))
}

fn ordering_cfg(np: usize, nt: usize, blocks: u64) -> SimConfig {
    SimConfig {
        tau: 0.6,
        np,
        nt,
        ebn0_db_list: vec![8.0],
        max_blocks: blocks,
        min_bit_errors: u64::MAX,
        edge_exclusion: true,
        tree_search: true,
        master_seed: 7,
        ..SimConfig::full()
    }
}

fn nt_ordering() -> Outcome {
    let p3 = &run_uncoded_sweep(&ordering_cfg(13, 3, 200))?[0];
    let p5 = &run_uncoded_sweep(&ordering_cfg(13, 5, 200))?[0];
    Ok((
        p3.ber > 2.0 * p5.ber,
        format!(
            "8 dB, np=13, {} blocks: BER(nt=3) = {:.3e}, BER(nt=5) = {:.3e}, ratio {:.2}",
            p5.blocks,
            p3.ber,
            p5.ber,
            p3.ber / p5.ber
        ),
    ))
}

fn np_ordering() -> Outcome {
    let p13 = &run_uncoded_sweep(&ordering_cfg(13, 5, 300))?[0];
    let p15 = &run_uncoded_sweep(&ordering_cfg(15, 5, 300))?[0];
    Ok((
        p15.ber <= p13.ber && p13.bit_errors >= 100 && p15.bit_errors >= 100,
        format!(
            "8 dB, nt=5: BER(np=15) = {:.3e} ({} errors), BER(np=13) = {:.3e} ({} errors)",
            p15.ber, p15.bit_errors, p13.ber, p13.bit_errors
        ),
    ))
}

fn fec_round_trip() -> Outcome {
    let code = ConvCode::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut failures, mut flips) = (0, 0);
    for _ in 0..1000 {
        let len = rng.random_range(1..=200);
        let info: Vec<u8> = (0..len).map(|_| u8::from(rng.random::<bool>())).collect();
        let symbols = SymbolBlock::from_bits(&conv_encode(&info, &code))?;
        let mut llrs: Vec<f64> = symbols.as_slice().iter().map(|&s| 4.0 * f64::from(s)).collect();
        failures += usize::from(viterbi_decode(&llrs, &code)? != info);
        let pos = rng.random_range(0..llrs.len());
        llrs[pos] = -llrs[pos];
        failures += usize::from(viterbi_decode(&llrs, &code)? != info);
        flips += 1;
    }
    Ok((failures == 0, format!("1000 blocks, {flips} single flips, {failures} failures")))
}

fn strip_wall_time(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| match l.rfind(',') {
            Some(i) if !l.starts_with('#') => l[..i].to_string(),
            _ => l.to_string(),
        })
        .collect()
}

fn determinism() -> Outcome {
    let mut cfg = SimConfig {
        ebn0_db_list: vec![2.0, 5.0],
        max_blocks: 20,
        master_seed: 10,
        ..SimConfig::desk()
    };
    let a = sweep_csv(&cfg, &run_uncoded_sweep(&cfg)?);
    let b = sweep_csv(&cfg, &run_uncoded_sweep(&cfg)?);
    cfg.coded = true;
    let c = sweep_csv(&cfg, &run_coded_sweep(&cfg)?);
    let d = sweep_csv(&cfg, &run_coded_sweep(&cfg)?);
    let ok = strip_wall_time(&a) == strip_wall_time(&b) && strip_wall_time(&c) == strip_wall_time(&d);
    Ok((ok, "uncoded and coded sweeps rerun with the same seed".into()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("class distances, toy taps", toy_distances),
        ("sample set, np=1 nt=3", example_sample_set),
        ("distance profile shape, tau=0.6 nt=5", distance_shape),
        ("hard output equals exact ML", oracle_hard),
        ("soft output equals exact LLR", oracle_soft),
        ("single-tap AWGN BER at 4 dB", awgn_sanity),
        ("nt=3 worse than nt=5", nt_ordering),
        ("np=15 no worse than np=13", np_ordering),
        ("FEC round trip", fec_round_trip),
        ("determinism", determinism),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1}s]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
