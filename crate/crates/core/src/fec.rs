//! Rate-1/2 convolutional code and soft-decision Viterbi decoder.
//!
//! Generators are given in octal and read most significant bit first as
//! `[current, delayed by 1, ..., delayed by K-1]`, so `171 -> 1111001` and
//! `133 -> 1011011`. The trellis starts in state 0 and is terminated with
//! `K - 1` zero tail bits.

use crate::{Error, Result};

/// Convolutional code description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvCode {
    pub constraint_length: usize,
    /// Generator masks, bit `K-1` is the current input.
    pub generators: [u32; 2],
}

impl ConvCode {
    /// The `(7, [171 133])` code.
    pub const fn standard() -> Self {
        ConvCode {
            constraint_length: 7,
            generators: [0o171, 0o133],
        }
    }

    pub fn new(constraint_length: usize, generators: [u32; 2]) -> Result<Self> {
        if !(2..=16).contains(&constraint_length) {
            return Err(Error::OutOfRange(format!(
                "constraint length {constraint_length} outside 2..=16"
            )));
        }
        if generators.iter().any(|&g| g == 0 || g >> constraint_length != 0) {
            return Err(Error::OutOfRange(
                "generator masks must be non-zero and fit the constraint length".into(),
            ));
        }
        Ok(ConvCode {
            constraint_length,
            generators,
        })
    }

    pub fn memory(&self) -> usize {
        self.constraint_length - 1
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory()
    }

    pub fn rate(&self) -> f64 {
        0.5
    }

    /// Coded length for `info_len` information bits, tail included.
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + self.memory())
    }

    /// Output pair for input `bit` leaving `state`, and the next state.
    /// The state holds the previous `K-1` inputs, most recent in the top bit.
    #[inline]
    fn step(&self, state: usize, bit: u8) -> ([u8; 2], usize) {
        let m = self.memory();
        let reg = (u32::from(bit) << m) | state as u32;
        let out = self.generators.map(|g| ((reg & g).count_ones() & 1) as u8);
        (out, (reg >> 1) as usize)
    }
}

impl Default for ConvCode {
    fn default() -> Self {
        Self::standard()
    }
}

/// Encodes `info` followed by `K-1` zeros. Output bits alternate first
/// generator, second generator.
pub fn conv_encode(info: &[u8], code: &ConvCode) -> Vec<u8> {
    let mut state = 0;
    let mut out = Vec::with_capacity(code.coded_len(info.len()));
    let tail = std::iter::repeat_n(0u8, code.memory());
    for bit in info.iter().map(|&b| u8::from(b != 0)).chain(tail) {
        let (pair, next) = code.step(state, bit);
        out.extend_from_slice(&pair);
        state = next;
    }
    out
}

/// Maximum-likelihood information bits for the coded-bit LLRs
/// (`ln P(c=1)/P(c=0)`). The branch metric adds `+llr/2` for a hypothesised
/// 1 and `-llr/2` for a 0. On equal metrics the predecessor with the lower
/// state index wins.
pub fn viterbi_decode(llrs: &[f64], code: &ConvCode) -> Result<Vec<u8>> {
    if llrs.len() % 2 != 0 {
        return Err(Error::OutOfRange(format!(
            "LLR count {} is not even",
            llrs.len()
        )));
    }
    let steps = llrs.len() / 2;
    let m = code.memory();
    if steps < m {
        return Err(Error::OutOfRange(format!(
            "{steps} trellis steps cannot hold the {m} tail bits"
        )));
    }
    if let Some(i) = llrs.iter().position(|l| !l.is_finite()) {
        return Err(Error::OutOfRange(format!("LLR {i} is not finite")));
    }
    let ns = code.num_states();
    let half_mask = (ns >> 1) - 1;

    // branch outputs for (state, input), as signs
    let mut outputs = vec![[0.0f64; 2]; ns * 2];
    for s in 0..ns {
        for b in 0..2u8 {
            let (pair, _) = code.step(s, b);
            outputs[s * 2 + b as usize] = pair.map(|c| if c == 1 { 0.5 } else { -0.5 });
        }
    }

    let mut metric = vec![f64::NEG_INFINITY; ns];
    metric[0] = 0.0;
    let mut next = vec![f64::NEG_INFINITY; ns];
    // decisions[t * ns + s]: true when the odd predecessor won
    let mut decisions = vec![false; steps * ns];
    for t in 0..steps {
        let (l0, l1) = (llrs[2 * t], llrs[2 * t + 1]);
        let dec = &mut decisions[t * ns..(t + 1) * ns];
        for (s_next, slot) in next.iter_mut().enumerate() {
            let bit = s_next >> (m - 1);
            let p0 = (s_next & half_mask) << 1;
            let p1 = p0 | 1;
            let branch = |p: usize| {
                let o = outputs[p * 2 + bit];
                metric[p] + o[0] * l0 + o[1] * l1
            };
            let (m0, m1) = (branch(p0), branch(p1));
            if m1 > m0 {
                *slot = m1;
                dec[s_next] = true;
            } else {
                *slot = m0;
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }

    let mut state = 0usize;
    let mut bits = vec![0u8; steps];
    for t in (0..steps).rev() {
        bits[t] = (state >> (m - 1)) as u8;
        let odd = decisions[t * ns + state];
        state = ((state & half_mask) << 1) | usize::from(odd);
    }
    bits.truncate(steps - m);
    Ok(bits)
}
