//! Brute-force reference detectors for short blocks.
//!
//! Every one of the `2^N` symbol vectors is enumerated against the full tap
//! matrix. Candidate `k` is the block whose symbol `p` is bit `N-1-p` of `k`
//! (`1 -> +1`), matching the codebook row ordering.

use crate::channel::{convolve_symbols, ReceivedBlock, SymbolBlock};
use crate::math::{log_bit_probs, log_sum_exp};
use crate::pulse::TapSet;
use crate::{Error, Result};

/// Largest block length accepted by the oracles.
pub const MAX_ORACLE_LEN: usize = 20;

/// Exact a-posteriori LLRs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLlrResult {
    pub llrs: Vec<f64>,
    /// `ln p(y)`, the log evidence including the Gaussian normaliser.
    pub posterior_normalizer: f64,
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange("empty block".into()));
    }
    if n > MAX_ORACLE_LEN {
        return Err(Error::TooLarge {
            bits: n,
            cap: MAX_ORACLE_LEN,
        });
    }
    Ok(())
}

fn candidate(k: u64, n: usize, out: &mut [i8]) {
    for (p, s) in out.iter_mut().enumerate() {
        *s = if (k >> (n - 1 - p)) & 1 == 1 { 1 } else { -1 };
    }
}

fn squared_error(y: &[f64], a: &[i8], taps: &TapSet) -> f64 {
    convolve_symbols(a, taps)
        .iter()
        .zip(y)
        .map(|(b, y)| (y - b).powi(2))
        .sum()
}

/// `L_D(x_k | y)` for every symbol by full enumeration.
pub fn exact_llr(
    y: &ReceivedBlock,
    taps: &TapSet,
    sigma: f64,
    priors: Option<&[f64]>,
) -> Result<ExactLlrResult> {
    let n = y.len();
    check_len(n)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::OutOfRange(format!("sigma {sigma} must be positive")));
    }
    if let Some(p) = priors {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
    }
    let log_priors: Vec<(f64, f64)> = (0..n)
        .map(|j| log_bit_probs(priors.map_or(0.0, |p| p[j])))
        .collect();
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let count = 1u64 << n;
    let mut a = vec![0i8; n];
    let mut log_joint = Vec::with_capacity(count as usize);
    for k in 0..count {
        candidate(k, n, &mut a);
        let prior: f64 = a
            .iter()
            .zip(&log_priors)
            .map(|(&s, &(p1, p0))| if s > 0 { p1 } else { p0 })
            .sum();
        log_joint.push(-squared_error(&y.samples, &a, taps) * inv_two_var + prior);
    }
    let llrs = (0..n)
        .map(|p| {
            let shift = n - 1 - p;
            let ones = log_joint
                .iter()
                .enumerate()
                .filter(|(k, _)| (k >> shift) & 1 == 1)
                .map(|(_, &v)| v);
            let zeros = log_joint
                .iter()
                .enumerate()
                .filter(|(k, _)| (k >> shift) & 1 == 0)
                .map(|(_, &v)| v);
            log_sum_exp(ones) - log_sum_exp(zeros)
        })
        .collect();
    let log_norm = -0.5 * n as f64 * (2.0 * std::f64::consts::PI * sigma * sigma).ln();
    Ok(ExactLlrResult {
        llrs,
        posterior_normalizer: log_sum_exp(log_joint.iter().copied()) + log_norm,
    })
}

/// `argmin_a ||y - H a||^2`; ties go to the lowest candidate index.
pub fn exact_ml_sequence(y: &ReceivedBlock, taps: &TapSet) -> Result<SymbolBlock> {
    let n = y.len();
    check_len(n)?;
    let mut a = vec![0i8; n];
    let mut best = (f64::INFINITY, 0u64);
    for k in 0..(1u64 << n) {
        candidate(k, n, &mut a);
        let d = squared_error(&y.samples, &a, taps);
        if d < best.0 {
            best = (d, k);
        }
    }
    candidate(best.1, n, &mut a);
    SymbolBlock::new(a)
}
