//! Offline pre-classification: labeled class samples and nearest-neighbor
//! search.
//!
//! A codebook enumerates every window of `W = np + nt - 1` consecutive
//! symbols. Window `k` is read as a `W`-bit binary number, most significant
//! bit first, with `-1 -> 0` and `+1 -> 1`. Its class sample is the noiseless
//! `np`-sample observation produced by the `nt` dominant taps, and its label is
//! the symbol the observation is centered on.
//!
//! Coordinate `j` (`0..np`) of a sample corresponds to received index
//! `i + j - (np - 1) / 2` when the labeled symbol is `a_i`; an even `np` puts
//! the extra coordinate after the center.
//!
//! Window `2^W - 1 - k` is the negation of window `k`, so only the first half
//! of the rows is stored and the other half is produced by sign flips.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};

use crate::pulse::TapSet;
use crate::{Error, Result};

/// Default cap on `np + nt - 1`.
pub const DEFAULT_SIZE_CAP: usize = 26;

const CACHE_MAGIC: &[u8; 6] = b"FTNLCC";
const CACHE_VERSION: u16 = 1;

/// Window geometry and the dominant taps.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookParams {
    np: usize,
    nt: usize,
    taps: TapSet,
    cap: usize,
}

impl CodebookParams {
    /// `taps` may be longer than `nt`; it is truncated to the `nt` centered taps.
    pub fn new(np: usize, nt: usize, taps: &TapSet) -> Result<Self> {
        Self::with_cap(np, nt, taps, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(np: usize, nt: usize, taps: &TapSet, cap: usize) -> Result<Self> {
        if np == 0 {
            return Err(Error::OutOfRange("np must be at least 1".into()));
        }
        if nt % 2 == 0 {
            return Err(Error::NotOdd {
                what: "nt",
                value: nt,
            });
        }
        let taps = taps.truncate(nt)?;
        let bits = np + nt - 1;
        // the row index must fit a u64 and the half table an addressable Vec
        let cap = cap.min(62);
        if bits > cap {
            return Err(Error::TooLarge { bits, cap });
        }
        Ok(CodebookParams { np, nt, taps, cap })
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Upper bound on `np + nt - 1` this configuration was validated against.
    pub fn cap(&self) -> usize {
        self.cap
    }

    /// The `nt` dominant taps.
    pub fn taps(&self) -> &TapSet {
        &self.taps
    }

    /// `np + nt - 1`.
    pub fn window_len(&self) -> usize {
        self.np + self.nt - 1
    }

    /// Position of the labeled symbol inside a window.
    pub fn center(&self) -> usize {
        self.lead() + self.nt / 2
    }

    /// Number of sample coordinates before the center coordinate.
    pub fn lead(&self) -> usize {
        (self.np - 1) / 2
    }

    /// `2^(np + nt - 1)`.
    pub fn size(&self) -> u64 {
        1u64 << self.window_len()
    }

    /// Smallest Euclidean distance between two class samples with different
    /// labels, computed without enumerating the rows.
    ///
    /// Two windows with different center symbols differ by `2e` with
    /// `e in {-1, 0, 1}^W` and `e_center != 0`, and every such `e` is realised
    /// by some pair. The minimum of `||G e||` is found by a min-sum trellis
    /// search whose state is the last `nt - 1` entries of `e`.
    pub fn min_interclass_distance(&self) -> Result<f64> {
        if self.size() < 2 {
            return Err(Error::SingleClass);
        }
        let p = self;
        let w = p.window_len();
        let c = p.center();
        let mem = p.nt - 1;
        let rev = p.reversed_taps();
        let n_states = 3usize.pow(mem as u32);
        let digit = |d: usize| d as f64 - 1.0;
        let allowed = |pos: usize, d: usize| pos != c || d != 1;

        // state digit q (0..mem) holds e[pos - mem + q]; digit 0 is the oldest
        let decode = |s: usize, out: &mut [usize]| {
            let mut s = s;
            for q in (0..mem).rev() {
                out[q] = s % 3;
                s /= 3;
            }
        };
        let mut cost = vec![f64::INFINITY; n_states];
        let mut digits = vec![0usize; mem];
        for (s, slot) in cost.iter_mut().enumerate() {
            decode(s, &mut digits);
            if digits.iter().enumerate().all(|(pos, &d)| allowed(pos, d)) {
                *slot = 0.0;
            }
        }
        let mut next = vec![f64::INFINITY; n_states];
        for pos in mem..w {
            next.fill(f64::INFINITY);
            for (s, &acc) in cost.iter().enumerate() {
                if acc == f64::INFINITY {
                    continue;
                }
                decode(s, &mut digits);
                let partial: f64 = digits
                    .iter()
                    .zip(&rev)
                    .map(|(&d, &h)| digit(d) * h)
                    .sum();
                for d in 0..3 {
                    if !allowed(pos, d) {
                        continue;
                    }
                    let v = partial + digit(d) * rev[mem];
                    let ns = if mem == 0 { 0 } else { (s * 3) % n_states + d };
                    let total = acc + v * v;
                    if total < next[ns] {
                        next[ns] = total;
                    }
                }
            }
            std::mem::swap(&mut cost, &mut next);
        }
        let best = cost.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(2.0 * best.sqrt())
    }

    /// Taps reversed so that coordinate `j` is `sum_t window[j + t] * rev[t]`.
    fn reversed_taps(&self) -> Vec<f64> {
        self.taps.as_slice().iter().rev().copied().collect()
    }
}

/// One search result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Codebook row index.
    pub index: u64,
    /// Center symbol of the row, `+1` or `-1`.
    pub label: i8,
    /// Euclidean distance to the query.
    pub distance: f64,
}

/// Labeled class samples for one `(np, nt, taps)` configuration. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct Codebook {
    params: CodebookParams,
    /// Rows `0..size/2`, row-major.
    half: Vec<f64>,
}

/// Enumerates every window and its class sample.
pub fn build_codebook(params: &CodebookParams) -> Result<Codebook> {
    Codebook::build(params.clone())
}

impl Codebook {
    pub fn build(params: CodebookParams) -> Result<Codebook> {
        let w = params.window_len();
        let np = params.np;
        let rev = params.reversed_taps();
        let rows = (params.size() / 2) as usize;
        let mut half = vec![0.0; rows * np];
        let mut window = vec![0i8; w];
        for (k, row) in half.chunks_exact_mut(np).enumerate() {
            fill_window(k as u64, &mut window);
            for (j, out) in row.iter_mut().enumerate() {
                *out = window[j..j + rev.len()]
                    .iter()
                    .zip(&rev)
                    .map(|(&a, &h)| f64::from(a) * h)
                    .sum();
            }
        }
        Ok(Codebook { params, half })
    }

    pub fn params(&self) -> &CodebookParams {
        &self.params
    }

    pub fn np(&self) -> usize {
        self.params.np
    }

    /// Number of rows, `2^(np + nt - 1)`.
    pub fn len(&self) -> u64 {
        self.params.size()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_index(&self, k: u64) {
        assert!(k < self.len(), "row {k} out of range");
    }

    /// Generating symbol window of row `k`.
    pub fn window(&self, k: u64) -> Vec<i8> {
        self.check_index(k);
        let mut w = vec![0; self.params.window_len()];
        fill_window(k, &mut w);
        w
    }

    /// Center symbol of row `k`.
    pub fn label(&self, k: u64) -> i8 {
        self.check_index(k);
        bit_symbol(k, self.params.window_len() - 1 - self.params.center())
    }

    /// Class sample of row `k`.
    pub fn sample(&self, k: u64) -> Vec<f64> {
        self.check_index(k);
        let half = self.len() / 2;
        if k < half {
            self.half_row(k as usize).to_vec()
        } else {
            let m = (self.len() - 1 - k) as usize;
            self.half_row(m).iter().map(|v| -v).collect()
        }
    }

    fn half_row(&self, k: usize) -> &[f64] {
        let np = self.np();
        &self.half[k * np..(k + 1) * np]
    }

    /// All rows in index order.
    pub fn samples(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.sample(k))
    }

    fn check_query(&self, query: &[f64]) -> Result<()> {
        if query.len() != self.np() {
            return Err(Error::DimensionMismatch {
                expected: self.np(),
                got: query.len(),
            });
        }
        if let Some(i) = query.iter().position(|v| !v.is_finite()) {
            return Err(Error::OutOfRange(format!("query entry {i} is not finite")));
        }
        Ok(())
    }

    /// Closest row; ties go to the lowest index.
    pub fn nearest_neighbor(&self, query: &[f64]) -> Result<Neighbor> {
        self.check_query(query)?;
        let mut best = KNearest::new(1);
        self.scan(query, &mut best);
        Ok(best.into_sorted()[0])
    }

    /// The `k` closest rows in non-decreasing distance, ties by index.
    pub fn k_nearest(&self, query: &[f64], k: usize) -> Result<Vec<Neighbor>> {
        self.check_query(query)?;
        if k == 0 || k as u64 > self.len() {
            return Err(Error::OutOfRange(format!(
                "k = {k} outside 1..={}",
                self.len()
            )));
        }
        let mut knn = KNearest::new(k);
        self.scan(query, &mut knn);
        Ok(knn.into_sorted())
    }

    /// Exhaustive scan of every row. Rows whose partial squared distance
    /// already exceeds the collector's bound are abandoned, which never
    /// changes the result. Returns the number of rows examined.
    pub(crate) fn scan<C: Collector>(&self, query: &[f64], collector: &mut C) -> u64 {
        let w = self.params.window_len();
        let label_shift = w - 1 - self.params.center();
        let last = self.len() - 1;
        for (k, row) in self.half.chunks_exact(self.np()).enumerate() {
            let k = k as u64;
            let label = bit_symbol(k, label_shift);
            let mirror = last - k;
            let bound_p = collector.bound(label);
            let bound_m = collector.bound(-label);
            let mut dp = 0.0;
            let mut dm = 0.0;
            let mut abandoned = false;
            for (&q, &r) in query.iter().zip(row) {
                let a = q - r;
                let b = q + r;
                dp += a * a;
                dm += b * b;
                if dp > bound_p && dm > bound_m {
                    abandoned = true;
                    break;
                }
            }
            if abandoned {
                continue;
            }
            if dp <= bound_p {
                collector.offer(k, label, dp);
            }
            if dm <= collector.bound(-label) {
                collector.offer(mirror, -label, dm);
            }
        }
        self.len()
    }

    /// Scan of the windows compatible with a block boundary: window positions
    /// outside `positions` hold zero symbols and sample coordinates outside
    /// `coords` are ignored. Candidates are reported under the row index whose
    /// out-of-range positions are `-1`. Returns the number of candidates.
    pub(crate) fn scan_clipped<C: Collector>(
        &self,
        query: &[f64],
        positions: std::ops::RangeInclusive<usize>,
        coords: std::ops::RangeInclusive<usize>,
        collector: &mut C,
    ) -> u64 {
        let w = self.params.window_len();
        let (p_lo, p_hi) = (*positions.start(), *positions.end());
        debug_assert!(p_lo <= self.params.center() && self.params.center() <= p_hi && p_hi < w);
        let free = p_hi - p_lo + 1;
        let shift = w - 1 - p_hi;
        let center_bit = p_hi - self.params.center();
        let rev = self.params.reversed_taps();
        let mut window = vec![0i8; w];
        let count = 1u64 << free;
        for f in 0..count {
            for (q, slot) in window[p_lo..=p_hi].iter_mut().enumerate() {
                *slot = bit_symbol(f, free - 1 - q);
            }
            let label = bit_symbol(f, center_bit);
            let bound = collector.bound(label);
            let mut d = 0.0;
            for j in coords.clone() {
                let v: f64 = window[j..j + rev.len()]
                    .iter()
                    .zip(&rev)
                    .map(|(&a, &h)| f64::from(a) * h)
                    .sum();
                let e = query[j] - v;
                d += e * e;
                if d > bound {
                    break;
                }
            }
            if d <= bound {
                collector.offer(f << shift, label, d);
            }
        }
        count
    }

    /// Depth-first search over the window symbols. A sample coordinate is
    /// fixed once the last symbol it depends on is chosen, so whole subtrees
    /// are cut as soon as their partial distance exceeds the bound. Distances
    /// are summed in the same order as [`Codebook::scan`] and the result is
    /// identical. `positions` and `coords` restrict the search as in
    /// [`Codebook::scan_clipped`]. Returns the number of candidates covered.
    pub(crate) fn tree_search<C: Collector>(
        &self,
        query: &[f64],
        positions: std::ops::RangeInclusive<usize>,
        coords: std::ops::RangeInclusive<usize>,
        collector: &mut C,
    ) -> u64 {
        let w = self.params.window_len();
        let mut t = Tree {
            query,
            rev: self.params.reversed_taps(),
            window: vec![0; w],
            positions: positions.clone(),
            coords,
            center: self.params.center(),
        };
        t.descend(0, 0, 0.0, 0, collector);
        1 << (positions.end() - positions.start() + 1)
    }

    /// Smallest Euclidean distance between two rows with different labels.
    pub fn min_interclass_distance(&self) -> Result<f64> {
        self.params.min_interclass_distance()
    }

    /// Writes the cache file: magic, version, `np`, `nt`, tap count, taps, then
    /// every row. All numbers little-endian, integers after the version as `u32`.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let p = &self.params;
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&CACHE_VERSION.to_le_bytes())?;
        for v in [p.np, p.nt, p.taps.len()] {
            out.write_all(&(v as u32).to_le_bytes())?;
        }
        for h in p.taps.as_slice() {
            out.write_all(&h.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.half.len() * 8);
        for v in &self.half {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        buf.clear();
        let np = self.np();
        for row in self.half.chunks_exact(np).rev() {
            for v in row {
                buf.extend_from_slice(&(-v).to_le_bytes());
            }
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Reads a cache file written by [`Codebook::write_to`]. The tap set is
    /// restored with `tau` and the size cap supplied by the caller.
    pub fn read_from<R: Read>(mut input: R, tau: f64, cap: usize) -> Result<Codebook> {
        let mut magic = [0u8; 6];
        input.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let mut v16 = [0u8; 2];
        input.read_exact(&mut v16)?;
        let version = u16::from_le_bytes(v16);
        if version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let mut read_u32 = || -> Result<usize> {
            let mut b = [0u8; 4];
            input.read_exact(&mut b)?;
            Ok(u32::from_le_bytes(b) as usize)
        };
        let np = read_u32()?;
        let nt = read_u32()?;
        let ntaps = read_u32()?;
        if ntaps != nt {
            return Err(Error::Cache(format!("tap count {ntaps} differs from nt {nt}")));
        }
        let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
            let mut raw = vec![0u8; n * 8];
            input.read_exact(&mut raw)?;
            Ok(raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect())
        };
        let taps = TapSet::new(read_f64s(ntaps)?, tau)?;
        let params = CodebookParams::with_cap(np, nt, &taps, cap)?;
        let rows = (params.size() / 2) as usize;
        let half = read_f64s(rows * np)?;
        let upper = read_f64s(rows * np)?;
        let mirrored = upper
            .chunks_exact(np)
            .rev()
            .flatten()
            .zip(&half)
            .all(|(u, l)| *u == -*l);
        if !mirrored {
            return Err(Error::Cache("rows are not antipodal".into()));
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            return Err(Error::Cache("trailing bytes".into()));
        }
        Ok(Codebook { params, half })
    }
}

/// Symbol encoded by bit `shift` of `k`.
#[inline]
fn bit_symbol(k: u64, shift: usize) -> i8 {
    if (k >> shift) & 1 == 1 {
        1
    } else {
        -1
    }
}

fn fill_window(k: u64, window: &mut [i8]) {
    let w = window.len();
    for (p, slot) in window.iter_mut().enumerate() {
        *slot = bit_symbol(k, w - 1 - p);
    }
}

struct Tree<'a> {
    query: &'a [f64],
    rev: Vec<f64>,
    window: Vec<i8>,
    positions: std::ops::RangeInclusive<usize>,
    coords: std::ops::RangeInclusive<usize>,
    center: usize,
}

impl Tree<'_> {
    /// Squared error of the coordinate completed by position `p`, if any.
    fn completed(&self, p: usize) -> Option<f64> {
        let j = (p + 1).checked_sub(self.rev.len())?;
        if !self.coords.contains(&j) {
            return None;
        }
        let v: f64 = self.window[j..j + self.rev.len()]
            .iter()
            .zip(&self.rev)
            .map(|(&a, &h)| f64::from(a) * h)
            .sum();
        let e = self.query[j] - v;
        Some(e * e)
    }

    fn descend<C: Collector>(&mut self, p: usize, index: u64, partial: f64, label: i8, col: &mut C) {
        let last = p + 1 == self.window.len();
        if !self.positions.contains(&p) {
            self.window[p] = 0;
            let d = self.completed(p).map_or(partial, |e| partial + e);
            self.visit(p, index << 1, d, label, last, col);
            return;
        }
        let mut child = [(0.0, -1i8), (0.0, 1i8)];
        for c in &mut child {
            self.window[p] = c.1;
            c.0 = self.completed(p).map_or(partial, |e| partial + e);
        }
        if child[1].0 < child[0].0 {
            child.swap(0, 1);
        }
        for (d, s) in child {
            self.window[p] = s;
            let label = if p == self.center { s } else { label };
            self.visit(p, (index << 1) | u64::from(s > 0), d, label, last, col);
        }
    }

    fn visit<C: Collector>(&mut self, p: usize, index: u64, d: f64, label: i8, last: bool, col: &mut C) {
        let bound = if p >= self.center {
            col.bound(label)
        } else {
            col.bound(1).max(col.bound(-1))
        };
        if d > bound {
            return;
        }
        if last {
            col.offer(index, label, d);
        } else {
            self.descend(p + 1, index, d, label, col);
        }
    }
}

/// Receives candidate rows during a scan.
pub(crate) trait Collector {
    /// Rows of class `label` with squared distance above this cannot change
    /// the result.
    fn bound(&self, label: i8) -> f64;
    fn offer(&mut self, index: u64, label: i8, dist_sq: f64);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    pub dist_sq: f64,
    pub index: u64,
    pub label: i8,
}

impl Entry {
    fn key_cmp(&self, other: &Entry) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }

    pub fn neighbor(&self) -> Neighbor {
        Neighbor {
            index: self.index,
            label: self.label,
            distance: self.dist_sq.sqrt(),
        }
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

/// Keeps the `k` smallest `(distance, index)` pairs.
#[derive(Debug)]
pub(crate) struct KNearest {
    k: usize,
    heap: BinaryHeap<Entry>,
}

impl KNearest {
    pub fn new(k: usize) -> Self {
        KNearest {
            k,
            heap: BinaryHeap::with_capacity(k.min(1 << 16) + 1),
        }
    }

    pub fn into_sorted(self) -> Vec<Neighbor> {
        self.into_entries().iter().map(Entry::neighbor).collect()
    }

    pub fn into_entries(self) -> Vec<Entry> {
        self.heap.into_sorted_vec()
    }

    fn kth(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap.peek().map_or(f64::INFINITY, |e| e.dist_sq)
        }
    }
}

impl Collector for KNearest {
    fn bound(&self, _label: i8) -> f64 {
        self.kth()
    }

    fn offer(&mut self, index: u64, label: i8, dist_sq: f64) {
        let e = Entry {
            dist_sq,
            index,
            label,
        };
        if self.heap.len() < self.k {
            self.heap.push(e);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if e < *top {
                *top = e;
            }
        }
    }
}

/// `k` nearest rows plus the nearest row of each class.
#[derive(Debug)]
pub(crate) struct ClassAwareKNearest {
    pub knn: KNearest,
    pub best_plus: Option<Entry>,
    pub best_minus: Option<Entry>,
}

impl ClassAwareKNearest {
    pub fn new(k: usize) -> Self {
        ClassAwareKNearest {
            knn: KNearest::new(k),
            best_plus: None,
            best_minus: None,
        }
    }

    fn slot(&self, label: i8) -> &Option<Entry> {
        if label > 0 {
            &self.best_plus
        } else {
            &self.best_minus
        }
    }
}

impl Collector for ClassAwareKNearest {
    fn bound(&self, label: i8) -> f64 {
        let class = self.slot(label).map_or(f64::INFINITY, |e| e.dist_sq);
        self.knn.kth().max(class)
    }

    fn offer(&mut self, index: u64, label: i8, dist_sq: f64) {
        let e = Entry {
            dist_sq,
            index,
            label,
        };
        let slot = if label > 0 {
            &mut self.best_plus
        } else {
            &mut self.best_minus
        };
        if slot.is_none_or(|b| e < b) {
            *slot = Some(e);
        }
        self.knn.offer(index, label, dist_sq);
    }
}
