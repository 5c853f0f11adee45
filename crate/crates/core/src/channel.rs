//! Discrete FTN channel: `y = H a + w`.
//!
//! Symbols outside the block are zero and `H[j][k] = h_{j-k}`. For the
//! even-symmetric taps of an RRC pulse row `j` of `H` reads
//! `[h_{-j}, ..., h_0, ..., h_{N-j-1}]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::pulse::TapSet;
use crate::{Error, Result};

/// A block of BPSK symbols, each exactly `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolBlock(Vec<i8>);

impl SymbolBlock {
    pub fn new(symbols: Vec<i8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::OutOfRange("symbol block must not be empty".into()));
        }
        if let Some(i) = symbols.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSymbol(i));
        }
        Ok(SymbolBlock(symbols))
    }

    /// Maps bits to symbols with `1 -> +1`, `0 -> -1`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        Self::new(bits.iter().map(|&b| if b != 0 { 1 } else { -1 }).collect())
    }

    /// Uniform i.i.d. symbols.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new(
            (0..len)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse of [`SymbolBlock::from_bits`].
    pub fn to_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&s| u8::from(s > 0)).collect()
    }

    pub fn negated(&self) -> SymbolBlock {
        SymbolBlock(self.0.iter().map(|&s| -s).collect())
    }
}

/// Matched-filter output of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub samples: Vec<f64>,
    /// Per-sample noise standard deviation used to generate the block.
    pub noise_sigma: f64,
}

impl ReceivedBlock {
    /// Wraps noiseless or externally generated samples.
    pub fn new(samples: Vec<f64>, noise_sigma: f64) -> Self {
        ReceivedBlock {
            samples,
            noise_sigma,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn negated(&self) -> ReceivedBlock {
        ReceivedBlock::new(self.samples.iter().map(|y| -y).collect(), self.noise_sigma)
    }
}

/// `b_n = sum_l a_{n-l} h_l` with zero symbols outside the block.
pub fn transmit_noiseless(symbols: &SymbolBlock, taps: &TapSet) -> Vec<f64> {
    convolve_symbols(symbols.as_slice(), taps)
}

pub(crate) fn convolve_symbols(a: &[i8], taps: &TapSet) -> Vec<f64> {
    let n = a.len() as isize;
    let half = taps.half_len() as isize;
    let h = taps.as_slice();
    (0..n)
        .map(|i| {
            let lo = (-half).max(i - n + 1);
            let hi = half.min(i);
            (lo..=hi)
                .map(|l| f64::from(a[(i - l) as usize]) * h[(l + half) as usize])
                .sum()
        })
        .collect()
}

/// Adds i.i.d. `N(0, sigma^2)` noise drawn from `rng`.
pub fn add_awgn<R: Rng + ?Sized>(clean: &[f64], sigma: f64, rng: &mut R) -> ReceivedBlock {
    assert!(sigma >= 0.0, "noise sigma must be non-negative");
    let samples = if sigma == 0.0 {
        clean.to_vec()
    } else {
        clean
            .iter()
            .map(|&b| {
                let g: f64 = rng.sample(StandardNormal);
                b + sigma * g
            })
            .collect()
    };
    ReceivedBlock::new(samples, sigma)
}

/// Noise standard deviation for a given `Eb/N0` with unit symbol energy and
/// `Eb = Es / code_rate`.
pub fn sigma_from_ebn0(ebn0_db: f64, code_rate: f64) -> Result<f64> {
    if !(code_rate > 0.0 && code_rate <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "code rate {code_rate} outside (0, 1]"
        )));
    }
    Ok((1.0 / (2.0 * code_rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Independent random stream for block `block` of sweep point `point`.
///
/// All randomness of a run is derived from `master_seed`, so results do not
/// depend on how blocks are scheduled.
pub fn block_rng(master_seed: u64, point: u32, block: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream((u64::from(point) << 40) ^ block);
    rng
}

/// Implied channel matrix of a block.
#[derive(Debug, Clone)]
pub struct ChannelMatrixView<'a> {
    pub taps: &'a TapSet,
    pub block_len: usize,
}

impl ChannelMatrixView<'_> {
    /// Entry `(row, col)` of `H`, i.e. `h_{row - col}`.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.taps.get(row as isize - col as isize)
    }

    /// Dense row-major `N x N` matrix.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        (0..self.block_len)
            .map(|r| (0..self.block_len).map(|c| self.entry(r, c)).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TapSet {
        TapSet::from_taps(vec![0.3, 0.8, 0.3]).unwrap()
    }

    #[test]
    fn all_ones_interior_is_1_4() {
        let a = SymbolBlock::new(vec![1; 10]).unwrap();
        let y = transmit_noiseless(&a, &toy());
        for v in &y[1..9] {
            assert!((v - 1.4).abs() < 1e-12);
        }
        assert!((y[0] - 1.1).abs() < 1e-12);
    }

    #[test]
    fn identity_channel() {
        let a = SymbolBlock::new(vec![1, -1, -1, 1]).unwrap();
        let one = TapSet::from_taps(vec![1.0]).unwrap();
        assert_eq!(transmit_noiseless(&a, &one), vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn hand_convolution() {
        let a = SymbolBlock::new(vec![1, -1, 1]).unwrap();
        let y = transmit_noiseless(&a, &toy());
        let expected = [0.5, -0.2, 0.5];
        for (v, e) in y.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn awgn_zero_sigma_is_identity() {
        let mut rng = block_rng(1, 0, 0);
        let clean = vec![0.5, -1.25, 3.0];
        assert_eq!(add_awgn(&clean, 0.0, &mut rng).samples, clean);
    }

    #[test]
    fn awgn_unit_variance() {
        let mut rng = block_rng(7, 0, 0);
        let n = 1_000_000;
        let y = add_awgn(&vec![0.0; n], 1.0, &mut rng);
        let mean = y.samples.iter().sum::<f64>() / n as f64;
        let var = y.samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn awgn_is_deterministic() {
        let clean = vec![0.0; 64];
        let a = add_awgn(&clean, 0.3, &mut block_rng(42, 3, 9));
        let b = add_awgn(&clean, 0.3, &mut block_rng(42, 3, 9));
        let c = add_awgn(&clean, 0.3, &mut block_rng(42, 3, 10));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sigma_mapping() {
        assert!((sigma_from_ebn0(0.0, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((sigma_from_ebn0(10.0, 1.0).unwrap() - (1.0f64 / 20.0).sqrt()).abs() < 1e-15);
        assert!((sigma_from_ebn0(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(sigma_from_ebn0(0.0, 0.0).is_err());
        assert!(sigma_from_ebn0(0.0, -1.0).is_err());
    }

    #[test]
    fn symbol_validation() {
        assert!(matches!(
            SymbolBlock::new(vec![1, 0, -1]),
            Err(Error::InvalidSymbol(1))
        ));
        assert!(SymbolBlock::new(vec![]).is_err());
        let s = SymbolBlock::from_bits(&[1, 0, 0, 1]).unwrap();
        assert_eq!(s.as_slice(), &[1, -1, -1, 1]);
        assert_eq!(s.to_bits(), vec![1, 0, 0, 1]);
    }

    #[test]
    fn matrix_rows_follow_definition() {
        let taps = toy();
        let view = ChannelMatrixView {
            taps: &taps,
            block_len: 4,
        };
        let h = view.dense();
        assert_eq!(h[0], vec![0.8, 0.3, 0.0, 0.0]);
        assert_eq!(h[2], vec![0.0, 0.3, 0.8, 0.3]);
    }
}
