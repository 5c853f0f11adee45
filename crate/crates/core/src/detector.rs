//! Online classification and approximate soft output.
//!
//! Symbol `a_i` is detected from the observation `o^(i)`, the `np` received
//! samples around `y_i`, by nearest-neighbor search over the codebook. Soft
//! output restricts the log-likelihood ratio sums to the `n_l` codebook rows
//! closest to `o^(i)`.

use std::sync::Arc;

use crate::channel::{ReceivedBlock, SymbolBlock};
use crate::codebook::{ClassAwareKNearest, Codebook, Entry, KNearest};
use crate::math::log_sum_exp;
use crate::pulse::TapSet;
use crate::{Error, Result};

/// Default LLR saturation magnitude.
pub const DEFAULT_CLAMP: f64 = 30.0;

/// Default number of lattice points kept for soft output.
pub const DEFAULT_N_L: usize = 8;

/// How windows that reach past the block edges are classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMode {
    /// Missing samples are zero and the full codebook is searched.
    #[default]
    ZeroFill,
    /// Only windows whose out-of-block symbols are zero are candidates, and
    /// out-of-block samples are left out of the distance. With a window that
    /// covers the whole block this is exact ML / MAP detection.
    BlockAware,
}

/// How the nearest rows are found. Both return the same rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMethod {
    /// Linear scan over the stored half of the codebook.
    #[default]
    Exhaustive,
    /// Depth-first search over window symbols with subtree pruning.
    Tree,
}

/// Observation `o^(i)` centered on received index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    pub values: Vec<f64>,
    pub center_index: usize,
}

/// Samples `y[i - (np-1)/2 ..]`, `np` of them, zero outside the block.
pub fn extract_window(y: &ReceivedBlock, i: usize, np: usize) -> Result<ObservationWindow> {
    if i >= y.len() {
        return Err(Error::OutOfRange(format!(
            "index {i} outside block of length {}",
            y.len()
        )));
    }
    let mut values = vec![0.0; np];
    fill_observation(&y.samples, i, np, &mut values);
    Ok(ObservationWindow {
        values,
        center_index: i,
    })
}

fn fill_observation(y: &[f64], i: usize, np: usize, out: &mut [f64]) {
    let lead = (np - 1) / 2;
    for (j, v) in out.iter_mut().enumerate() {
        let idx = (i + j).checked_sub(lead);
        *v = idx.and_then(|k| y.get(k)).copied().unwrap_or(0.0);
    }
}

/// Per-symbol approximate LLRs, `ln P(x=1)/P(x=0)` with `x = 1 <-> a = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrBlock {
    pub llrs: Vec<f64>,
    pub clamp: f64,
}

impl LlrBlock {
    /// Sign decisions, `+1` for non-negative LLRs.
    pub fn hard_decisions(&self) -> SymbolBlock {
        SymbolBlock::new(
            self.llrs
                .iter()
                .map(|&l| if l >= 0.0 { 1 } else { -1 })
                .collect(),
        )
        .expect("non-empty block")
    }
}

/// Detector configuration. The codebook is shared read-only.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub codebook: Arc<Codebook>,
    /// Number of nearest lattice points used for soft output.
    pub n_l: usize,
    pub clamp: f64,
    /// A-priori LLRs `L_A`, one per symbol. `None` means all zero.
    pub priors: Option<Vec<f64>>,
    pub edge_mode: EdgeMode,
    pub search: SearchMethod,
}

impl DetectorConfig {
    pub fn new(codebook: Arc<Codebook>) -> Self {
        DetectorConfig {
            codebook,
            n_l: DEFAULT_N_L,
            clamp: DEFAULT_CLAMP,
            priors: None,
            edge_mode: EdgeMode::default(),
            search: SearchMethod::default(),
        }
    }

    pub fn with_n_l(mut self, n_l: usize) -> Self {
        self.n_l = n_l;
        self
    }

    pub fn with_clamp(mut self, clamp: f64) -> Self {
        self.clamp = clamp;
        self
    }

    pub fn with_priors(mut self, priors: Vec<f64>) -> Self {
        self.priors = Some(priors);
        self
    }

    pub fn with_edge_mode(mut self, mode: EdgeMode) -> Self {
        self.edge_mode = mode;
        self
    }

    pub fn with_search(mut self, search: SearchMethod) -> Self {
        self.search = search;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_l == 0 || self.n_l as u64 > self.codebook.len() {
            return Err(Error::OutOfRange(format!(
                "n_l = {} outside 1..={}",
                self.n_l,
                self.codebook.len()
            )));
        }
        if !(self.clamp > 0.0) {
            return Err(Error::OutOfRange(format!(
                "clamp {} must be positive",
                self.clamp
            )));
        }
        Ok(())
    }
}

/// Hard decisions and the number of codebook rows examined.
#[derive(Debug, Clone, PartialEq)]
pub struct HardOutput {
    pub symbols: SymbolBlock,
    pub rows_scanned: u64,
}

/// Soft decisions and the number of codebook rows examined.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftOutput {
    pub llrs: LlrBlock,
    pub rows_scanned: u64,
}

struct Geometry {
    np: usize,
    w: usize,
    center: usize,
    lead: usize,
}

impl Geometry {
    fn of(cb: &Codebook) -> Self {
        let p = cb.params();
        Geometry {
            np: p.np(),
            w: p.window_len(),
            center: p.center(),
            lead: p.lead(),
        }
    }
}

/// Runs a scan for symbol `i`, honoring the edge mode.
fn scan_symbol<C: crate::codebook::Collector>(
    cfg: &DetectorConfig,
    g: &Geometry,
    y: &[f64],
    i: usize,
    query: &mut [f64],
    collector: &mut C,
) -> u64 {
    let cb = &cfg.codebook;
    let n = y.len();
    fill_observation(y, i, g.np, query);
    let (mut positions, mut coords) = (0..=g.w - 1, 0..=g.np - 1);
    if cfg.edge_mode == EdgeMode::BlockAware {
        positions = g.center.saturating_sub(i)..=(g.w - 1).min(g.center + (n - 1 - i));
        coords = g.lead.saturating_sub(i)..=(g.np - 1).min(g.lead + (n - 1 - i));
    }
    let clipped = positions != (0..=g.w - 1) || coords != (0..=g.np - 1);
    match cfg.search {
        SearchMethod::Tree => cb.tree_search(query, positions, coords, collector),
        SearchMethod::Exhaustive if clipped => cb.scan_clipped(query, positions, coords, collector),
        SearchMethod::Exhaustive => cb.scan(query, collector),
    }
}

fn check_block(y: &ReceivedBlock, cfg: &DetectorConfig) -> Result<()> {
    cfg.validate()?;
    if y.is_empty() {
        return Err(Error::OutOfRange("received block is empty".into()));
    }
    if let Some(i) = y.samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::OutOfRange(format!("sample {i} is not finite")));
    }
    Ok(())
}

/// Nearest-neighbor label of every observation window.
pub fn detect_hard(y: &ReceivedBlock, cfg: &DetectorConfig) -> Result<HardOutput> {
    check_block(y, cfg)?;
    let g = Geometry::of(&cfg.codebook);
    let mut query = vec![0.0; g.np];
    let mut rows_scanned = 0;
    let mut symbols = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let mut best = KNearest::new(1);
        rows_scanned += scan_symbol(cfg, &g, &y.samples, i, &mut query, &mut best);
        symbols.push(best.into_entries()[0].label);
    }
    Ok(HardOutput {
        symbols: SymbolBlock::new(symbols)?,
        rows_scanned,
    })
}

/// Approximate LLRs over the `n_l` nearest lattice points.
///
/// If all `n_l` points share one label, the nearest point of the other class
/// is added so that both sums are non-empty.
pub fn detect_soft(y: &ReceivedBlock, cfg: &DetectorConfig, sigma: f64) -> Result<SoftOutput> {
    check_block(y, cfg)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::OutOfRange(format!("sigma {sigma} must be positive")));
    }
    if let Some(p) = &cfg.priors {
        if p.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                got: p.len(),
            });
        }
    }
    let g = Geometry::of(&cfg.codebook);
    let inv_two_var = 1.0 / (2.0 * sigma * sigma);
    let mut query = vec![0.0; g.np];
    let mut rows_scanned = 0;
    let mut llrs = Vec::with_capacity(y.len());
    let mut candidates: Vec<Entry> = Vec::with_capacity(cfg.n_l + 1);
    for i in 0..y.len() {
        let mut col = ClassAwareKNearest::new(cfg.n_l);
        rows_scanned += scan_symbol(cfg, &g, &y.samples, i, &mut query, &mut col);
        let ClassAwareKNearest {
            knn,
            best_plus,
            best_minus,
        } = col;
        candidates.clear();
        candidates.extend(knn.into_entries());
        for extra in [best_plus, best_minus].into_iter().flatten() {
            if !candidates.iter().any(|c| c.label == extra.label) {
                candidates.push(extra);
            }
        }
        let metric = |e: &Entry| -e.dist_sq * inv_two_var + prior_term(cfg, &g, i, e.index);
        let num = log_sum_exp(candidates.iter().filter(|e| e.label > 0).map(metric));
        let den = log_sum_exp(candidates.iter().filter(|e| e.label < 0).map(metric));
        let own = cfg.priors.as_ref().map_or(0.0, |p| p[i]);
        let llr = own + num - den;
        llrs.push(llr.clamp(-cfg.clamp, cfg.clamp));
    }
    Ok(SoftOutput {
        llrs: LlrBlock {
            llrs,
            clamp: cfg.clamp,
        },
        rows_scanned,
    })
}

/// Sum of `L_A` over the other in-block window positions holding bit 1.
fn prior_term(cfg: &DetectorConfig, g: &Geometry, i: usize, index: u64) -> f64 {
    let Some(priors) = &cfg.priors else {
        return 0.0;
    };
    let mut acc = 0.0;
    for p in 0..g.w {
        if p == g.center || (index >> (g.w - 1 - p)) & 1 == 0 {
            continue;
        }
        if let Some(l) = (i + p).checked_sub(g.center).and_then(|k| priors.get(k)) {
            acc += l;
        }
    }
    acc
}

/// Part of the noiseless `y_i` produced by taps outside the `np`-sample window,
/// `sum_{l < -lead} a_{i-l} h_l + sum_{l > np-1-lead} a_{i-l} h_l`.
pub fn window_truncation_error(a: &SymbolBlock, full_taps: &TapSet, np: usize, i: usize) -> f64 {
    let lead = ((np.max(1) - 1) / 2) as isize;
    let trail = np.max(1) as isize - 1 - lead;
    let half = full_taps.half_len() as isize;
    let sym = a.as_slice();
    let i = i as isize;
    (-half..=half)
        .filter(|&l| l < -lead || l > trail)
        .filter_map(|l| {
            let k = i - l;
            (k >= 0 && (k as usize) < sym.len())
                .then(|| f64::from(sym[k as usize]) * full_taps.get(l))
        })
        .sum()
}
