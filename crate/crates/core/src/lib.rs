//! Faster-than-Nyquist (FTN) link simulation with a low-complexity classifier
//! (LCC) detector.
//!
//! The crate is organised bottom-up:
//!
//! - [`pulse`]: root-raised-cosine pulses and the discrete ISI taps of the
//!   equivalent orthonormal-basis FTN model.
//! - [`channel`]: BPSK symbol blocks, the discrete FTN convolution and AWGN.
//! - [`codebook`]: offline enumeration of labeled class samples and exact
//!   nearest-neighbor search over them.
//! - [`detector`]: online sliding-window classification and approximate LLRs.
//! - [`fec`]: the rate-1/2, K = 7 (171, 133) convolutional code and a
//!   soft-decision Viterbi decoder.
//! - [`oracle`]: brute-force exact LLRs and ML sequence detection for small
//!   blocks.
//! - [`sim`]: Monte Carlo BER sweeps, distance profiles, CSV output and the
//!   codebook cache.
//!
//! Bits map to symbols as `1 <-> +1`, `0 <-> -1` everywhere.

pub mod channel;
pub mod codebook;
pub mod detector;
mod error;
pub mod fec;
pub mod oracle;
pub mod pulse;
pub mod selftest;
pub mod sim;

pub use error::{Error, Result};

pub(crate) mod math {
    /// `ln(sum(exp(x)))` with max subtraction. Returns `-inf` for an empty input.
    pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
        let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        let sum: f64 = xs.into_iter().map(|x| (x - max).exp()).sum();
        max + sum.ln()
    }

    /// `ln P(x = 1)` and `ln P(x = 0)` for a bit with a-priori LLR `l`.
    pub fn log_bit_probs(l: f64) -> (f64, f64) {
        // ln(1 + e^x) evaluated without overflow
        let softplus = |x: f64| {
            if x > 0.0 {
                x + (-x).exp().ln_1p()
            } else {
                x.exp().ln_1p()
            }
        };
        (-softplus(-l), -softplus(l))
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn lse_is_stable() {
            let v = [-1000.0, -1000.0];
            assert!((log_sum_exp(v) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
            assert_eq!(log_sum_exp(std::iter::empty::<f64>()), f64::NEG_INFINITY);
        }

        #[test]
        fn bit_probs_sum_to_one() {
            for l in [-50.0, -2.0, 0.0, 0.3, 40.0] {
                let (p1, p0) = log_bit_probs(l);
                assert!((p1.exp() + p0.exp() - 1.0).abs() < 1e-12);
                assert!((p1 - p0 - l).abs() < 1e-9);
            }
        }
    }
}
