//! Successive cancellation decoding, successive list decoding, the
//! repetition-aware variants of both, and a brute-force ML oracle.
//!
//! All four successive decoders run on one path-based engine over the
//! butterfly recursion. Decision LLRs use the exact pairwise combining
//! `a ⊞ b = 2·atanh(tanh(a/2)·tanh(b/2))` in a numerically stable form
//! (a min-sum approximation is available on the workspace but excluded from
//! all oracle comparisons). Appending decision `u` with decision LLR `λ`
//! adds the exact log-domain penalty `ln(1 + exp(−(1−2u)·λ))`, so comparing
//! accumulated penalties compares sequence likelihoods exactly.
//!
//! Repetition blocks: the block's first index forks every surviving path
//! into a branch for each block value; later block indices are forced to
//! the branch value; list pruning is applied per branch so both block
//! hypotheses stay alive until the block's last index, where the paths
//! compete on their accumulated penalty. With list size 1 this reduces to
//! the two-branch repetition-aware SC decoder, and with no blocks to plain
//! SC(L) decoding.

use crate::design::{CodeSpec, ConcatenatedCodeSpec};
use crate::error::{Error, Result};
use crate::xform::{transform, BitVector};

/// Channel observations in log-likelihood-ratio form,
/// `llr[i] = ln(P(y_i|x_i=0) / P(y_i|x_i=1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite LLR value {bad}")));
        }
        Ok(LlrVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Deref for LlrVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Decoder output: recovered info word, the re-encoded codeword and the
/// accumulated path penalty (non-negative, smaller is more likely).
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub info_bits: BitVector,
    pub codeword: BitVector,
    pub metric: f64,
}

/// Per-index decoding constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NodeKind {
    /// Frozen position, forced to zero.
    Frozen,
    /// Free decision carrying one info bit. `head_of` marks the first index
    /// of a repetition block; the decision becomes the block's value.
    Fork { head_of: Option<usize> },
    /// Later position of repetition block `block`, forced to that block's
    /// branch value. `last` marks the block's final index where the branches
    /// compete.
    Forced { block: usize, last: bool },
}

/// Precompiled per-index constraint table for one code.
#[derive(Debug, Clone)]
pub struct Layout {
    block_len: usize,
    stages: u32,
    kinds: Vec<NodeKind>,
    k: usize,
}

impl Layout {
    pub fn plain(spec: &CodeSpec) -> Layout {
        let n = spec.params().block_len();
        let mut kinds = vec![NodeKind::Frozen; n];
        for &i in spec.info_set() {
            kinds[i] = NodeKind::Fork { head_of: None };
        }
        Layout {
            block_len: n,
            stages: spec.params().stages(),
            kinds,
            k: spec.dimension(),
        }
    }

    /// Block index spans may interleave (each open block doubles the number
    /// of simultaneously pursued paths); pending branch values are tracked
    /// in a 64-bit word, so at most 64 blocks are supported.
    pub fn concatenated(spec: &ConcatenatedCodeSpec) -> Result<Layout> {
        if spec.blocks().len() > 64 {
            return Err(Error::invalid(format!(
                "at most 64 repetition blocks are supported, got {}",
                spec.blocks().len()
            )));
        }
        let n = spec.params().block_len();
        let mut kinds = vec![NodeKind::Frozen; n];
        for &i in spec.enlarged_set() {
            kinds[i] = NodeKind::Fork { head_of: None };
        }
        for (b, block) in spec.blocks().iter().enumerate() {
            kinds[block.head()] = NodeKind::Fork { head_of: Some(b) };
            for &i in &block.indices()[1..] {
                kinds[i] = NodeKind::Forced {
                    block: b,
                    last: i == block.tail(),
                };
            }
        }
        Ok(Layout {
            block_len: n,
            stages: spec.params().stages(),
            kinds,
            k: spec.dimension(),
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    /// Extract the info word from a decided source word.
    fn extract_info(&self, u: &[u8]) -> BitVector {
        self.kinds
            .iter()
            .zip(u)
            .filter(|(kind, _)| matches!(kind, NodeKind::Fork { .. }))
            .map(|(_, &bit)| bit)
            .collect()
    }
}

// Stable exact boxplus, from ln((1+e^{a+b})/(e^a+e^b)):
// sgn(a)sgn(b)·min(|a|,|b|) + ln(1+e^{−|a+b|}) − ln(1+e^{−|a−b|}).
#[inline]
fn boxplus_exact(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) ^ (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs()) + ln1p_exp_neg((a + b).abs()) - ln1p_exp_neg((a - b).abs())
}

#[inline]
fn boxplus_min_sum(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) ^ (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

// ln(1 + e^{−x}) for x ≥ 0.
#[inline]
fn ln1p_exp_neg(x: f64) -> f64 {
    if x > 36.0 {
        0.0
    } else {
        (-x).exp().ln_1p()
    }
}

/// Penalty for deciding `u` against decision LLR `lambda`:
/// `ln(1 + exp(−(1−2u)·λ))`.
#[inline]
pub fn decision_penalty(lambda: f64, u: u8) -> f64 {
    let x = if u == 0 { lambda } else { -lambda };
    if x >= 0.0 {
        ln1p_exp_neg(x)
    } else {
        -x + ln1p_exp_neg(-x)
    }
}

#[derive(Debug, Clone)]
struct PathState {
    // levels 0..=stages, level d at offset d·N
    llr: Vec<f64>,
    bits: Vec<u8>,
    metric: f64,
    // bit b set: repetition block b is open (head passed, tail not reached)
    open: u64,
    // bit b: branch value of open block b
    branch_bits: u64,
    // decision LLR at the current index
    lambda: f64,
}

impl PathState {
    /// Branch value of open block `b`.
    fn branch(&self, b: usize) -> u8 {
        debug_assert!(self.open & (1 << b) != 0, "block {b} is not open");
        ((self.branch_bits >> b) & 1) as u8
    }

    /// The pending branch values of all open blocks, as a grouping key.
    fn pending(&self) -> u64 {
        self.branch_bits & self.open
    }
}

/// One repetition-block resolution: the competing decision prefixes
/// `û_0..û_tail` per branch with their penalties, and the surviving branch.
/// When other blocks are open at the tail, one trace is recorded per
/// combination of their pending branch values (ascending key order).
/// Recorded when tracing is enabled; diagnostic oracle hook.
#[derive(Debug, Clone)]
pub struct BlockTrace {
    pub tail: usize,
    /// (branch bit, decision prefix up to and including `tail`, penalty)
    pub candidates: Vec<(u8, Vec<u8>, f64)>,
    pub chosen_branch: u8,
}

/// Reusable decoder scratch space. A workspace is single-threaded; distinct
/// calls on distinct workspaces may run concurrently.
#[derive(Debug, Default)]
pub struct DecoderWorkspace {
    paths: Vec<PathState>,
    spare: Vec<PathState>,
    min_sum: bool,
    trace_blocks: bool,
    block_traces: Vec<BlockTrace>,
}

impl DecoderWorkspace {
    pub fn new() -> Self {
        DecoderWorkspace::default()
    }

    /// Switch check-direction combining to the min-sum approximation.
    /// Excluded from all oracle comparisons.
    pub fn use_min_sum(&mut self, on: bool) {
        self.min_sum = on;
    }

    /// Record a [`BlockTrace`] for every repetition-block resolution.
    pub fn trace_blocks(&mut self, on: bool) {
        self.trace_blocks = on;
    }

    /// Traces collected during the most recent decode.
    pub fn block_traces(&self) -> &[BlockTrace] {
        &self.block_traces
    }

    fn fresh_path(&mut self, levels: usize, n: usize) -> PathState {
        match self.spare.pop() {
            Some(mut p) if p.llr.len() == levels * n => {
                p.metric = 0.0;
                p.open = 0;
                p.branch_bits = 0;
                p.lambda = 0.0;
                p
            }
            _ => PathState {
                llr: vec![0.0; levels * n],
                bits: vec![0; levels * n],
                metric: 0.0,
                open: 0,
                branch_bits: 0,
                lambda: 0.0,
            },
        }
    }

    fn update_llrs(&mut self, path_idx: usize, i: usize, stages: u32, n: usize) {
        let path = &mut self.paths[path_idx];
        let start_depth;
        if i == 0 {
            start_depth = 1;
        } else {
            let p = i.trailing_zeros();
            let d0 = stages - p;
            // g-update at the right child entered at depth d0
            let s = n >> d0;
            let m = i >> p;
            let child = d0 as usize * n + m * s;
            let parent = (d0 as usize - 1) * n + (m & !1) * s;
            let sibling = d0 as usize * n + (m - 1) * s;
            for j in 0..s {
                let a = path.llr[parent + j];
                let b = path.llr[parent + s + j];
                let u = path.bits[sibling + j];
                path.llr[child + j] = if u == 0 { a + b } else { b - a };
            }
            start_depth = d0 + 1;
        }
        // f-updates down the left spine
        for d in start_depth..=stages {
            let s = n >> d;
            let m = i >> (stages - d);
            debug_assert_eq!(m & 1, 0);
            let child = d as usize * n + m * s;
            let parent = (d as usize - 1) * n + m * s;
            for j in 0..s {
                let a = path.llr[parent + j];
                let b = path.llr[parent + s + j];
                path.llr[child + j] = self_combine(self.min_sum, a, b);
            }
        }
        let path = &mut self.paths[path_idx];
        path.lambda = path.llr[stages as usize * n + i];
    }

    fn apply_decision(&mut self, path_idx: usize, i: usize, u: u8, stages: u32, n: usize) {
        let path = &mut self.paths[path_idx];
        path.metric += decision_penalty(path.lambda, u);
        let leaf = stages as usize * n + i;
        path.bits[leaf] = u;
        // propagate partial sums while the node is a right child
        let mut d = stages as usize;
        let mut m = i;
        while d > 0 && (m & 1) == 1 {
            let s = n >> d;
            let left = d * n + (m - 1) * s;
            let right = d * n + m * s;
            let parent = (d - 1) * n + (m - 1) * s;
            for j in 0..s {
                path.bits[parent + j] = path.bits[left + j] ^ path.bits[right + j];
                path.bits[parent + s + j] = path.bits[right + j];
            }
            m >>= 1;
            d -= 1;
        }
    }

    fn decode(&mut self, llr: &LlrVector, layout: &Layout, list_size: usize) -> Result<DecodeResult> {
        let n = layout.block_len;
        if llr.len() != n {
            return Err(Error::invalid(format!(
                "LLR length {} does not match block length {n}",
                llr.len()
            )));
        }
        if list_size == 0 {
            return Err(Error::invalid("list size must be ≥ 1"));
        }
        let stages = layout.stages;
        let levels = stages as usize + 1;

        self.spare.append(&mut self.paths);
        self.block_traces.clear();
        let mut first = self.fresh_path(levels, n);
        first.llr[..n].copy_from_slice(llr.values());
        self.paths.push(first);

        for i in 0..n {
            for p in 0..self.paths.len() {
                self.update_llrs(p, i, stages, n);
            }
            match layout.kinds[i] {
                NodeKind::Frozen => {
                    for p in 0..self.paths.len() {
                        self.apply_decision(p, i, 0, stages, n);
                    }
                }
                NodeKind::Forced { block, last } => {
                    for p in 0..self.paths.len() {
                        let u = self.paths[p].branch(block);
                        self.apply_decision(p, i, u, stages, n);
                    }
                    if last {
                        self.resolve_block(i, block, list_size, stages, n);
                    }
                }
                NodeKind::Fork { head_of } => {
                    self.fork(i, head_of, list_size, stages, n);
                }
            }
        }

        // best final path: minimum penalty, ties toward the lower path index
        let best = self
            .paths
            .iter()
            .enumerate()
            .min_by(|(ia, a), (ib, b)| a.metric.total_cmp(&b.metric).then(ia.cmp(ib)))
            .map(|(idx, _)| idx)
            .expect("at least one path");
        let path = &self.paths[best];
        let leaf = stages as usize * n;
        let u: BitVector = path.bits[leaf..leaf + n].iter().copied().collect();
        let info = layout.extract_info(&u);
        let params = crate::xform::PolarParams::from_block_len(n)?;
        let codeword = transform(&u, &params)?;
        Ok(DecodeResult {
            info_bits: info,
            codeword,
            metric: path.metric,
        })
    }

    fn fork(&mut self, i: usize, head_of: Option<usize>, list_size: usize, stages: u32, n: usize) {
        // candidate children grouped by the pending branch values of all
        // open blocks (plus the new bit when this index opens a block); each
        // group is capped at `list_size` so no branch combination is starved
        // before its block resolves
        let mut cands: Vec<(u64, f64, usize, u8)> = Vec::with_capacity(self.paths.len() * 2);
        for (p, path) in self.paths.iter().enumerate() {
            for bit in [0u8, 1] {
                let group = if head_of.is_some() {
                    path.pending() << 1 | u64::from(bit)
                } else {
                    path.pending()
                };
                let metric = path.metric + decision_penalty(path.lambda, bit);
                cands.push((group, metric, p, bit));
            }
        }
        cands.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
        let mut group_counts: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
        let mut survive = vec![[false; 2]; self.paths.len()];
        for &(group, _, p, bit) in &cands {
            let count = group_counts.entry(group).or_insert(0);
            if *count < list_size {
                *count += 1;
                survive[p][bit as usize] = true;
            }
        }

        let old: Vec<PathState> = std::mem::take(&mut self.paths);
        let levels = stages as usize + 1;
        for (p, path) in old.into_iter().enumerate() {
            let s = survive[p];
            if s[0] && s[1] {
                let mut twin = self.fresh_path(levels, n);
                twin.llr.copy_from_slice(&path.llr);
                twin.bits.copy_from_slice(&path.bits);
                twin.metric = path.metric;
                twin.lambda = path.lambda;
                twin.open = path.open;
                twin.branch_bits = path.branch_bits;
                self.finish_fork(path, i, 0, head_of, stages, n);
                self.finish_fork(twin, i, 1, head_of, stages, n);
            } else if s[0] || s[1] {
                let bit = u8::from(s[1]);
                self.finish_fork(path, i, bit, head_of, stages, n);
            } else {
                self.spare.push(path);
            }
        }
    }

    fn finish_fork(
        &mut self,
        mut path: PathState,
        i: usize,
        bit: u8,
        head_of: Option<usize>,
        stages: u32,
        n: usize,
    ) {
        if let Some(b) = head_of {
            debug_assert!(path.open & (1 << b) == 0, "block {b} opened twice");
            path.open |= 1 << b;
            path.branch_bits = (path.branch_bits & !(1 << b)) | (u64::from(bit) << b);
        }
        self.paths.push(path);
        let idx = self.paths.len() - 1;
        self.apply_decision(idx, i, bit, stages, n);
    }

    /// End of repetition block `block`: within every combination of the
    /// other open blocks' pending branch values, the two branches compete
    /// on accumulated penalty and the best `list_size` paths of the merged
    /// candidate set survive, with this block's tag cleared.
    fn resolve_block(&mut self, tail: usize, block: usize, list_size: usize, stages: u32, n: usize) {
        let old: Vec<PathState> = std::mem::take(&mut self.paths);
        let ctx_of = |p: &PathState| p.pending() & !(1u64 << block);
        let mut order: Vec<usize> = (0..old.len()).collect();
        order.sort_by(|&a, &b| old[a].metric.total_cmp(&old[b].metric).then(a.cmp(&b)));

        let mut contexts: Vec<u64> = old.iter().map(&ctx_of).collect();
        contexts.sort_unstable();
        contexts.dedup();

        if self.trace_blocks {
            let leaf = stages as usize * n;
            for &ctx in &contexts {
                let candidates: Vec<(u8, Vec<u8>, f64)> = old
                    .iter()
                    .filter(|p| ctx_of(p) == ctx)
                    .map(|p| {
                        (
                            p.branch(block),
                            p.bits[leaf..=leaf + tail].to_vec(),
                            p.metric,
                        )
                    })
                    .collect();
                let chosen_branch = order
                    .iter()
                    .map(|&idx| &old[idx])
                    .find(|p| ctx_of(p) == ctx)
                    .map(|p| p.branch(block))
                    .expect("context has at least one path");
                self.block_traces.push(BlockTrace {
                    tail,
                    candidates,
                    chosen_branch,
                });
            }
        }

        // per context: the `list_size` best paths of the merged set survive
        let mut kept: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
        let mut keep = vec![false; old.len()];
        for &idx in &order {
            let count = kept.entry(ctx_of(&old[idx])).or_insert(0);
            if *count < list_size {
                *count += 1;
                keep[idx] = true;
            }
        }
        // preserve original path order among survivors
        for (p, mut path) in old.into_iter().enumerate() {
            path.open &= !(1u64 << block);
            path.branch_bits &= !(1u64 << block);
            if keep[p] {
                self.paths.push(path);
            } else {
                self.spare.push(path);
            }
        }
    }
}

#[inline]
fn self_combine(min_sum: bool, a: f64, b: f64) -> f64 {
    if min_sum {
        boxplus_min_sum(a, b)
    } else {
        boxplus_exact(a, b)
    }
}

/// Successive cancellation decoding.
pub fn sc_decode(llr: &LlrVector, spec: &CodeSpec) -> Result<DecodeResult> {
    sc_decode_with(&mut DecoderWorkspace::new(), llr, spec)
}

pub fn sc_decode_with(
    ws: &mut DecoderWorkspace,
    llr: &LlrVector,
    spec: &CodeSpec,
) -> Result<DecodeResult> {
    ws.decode(llr, &Layout::plain(spec), 1)
}

/// Successive list decoding with list size `l`.
pub fn sc_list_decode(llr: &LlrVector, spec: &CodeSpec, l: usize) -> Result<DecodeResult> {
    sc_list_decode_with(&mut DecoderWorkspace::new(), llr, spec, l)
}

pub fn sc_list_decode_with(
    ws: &mut DecoderWorkspace,
    llr: &LlrVector,
    spec: &CodeSpec,
    l: usize,
) -> Result<DecodeResult> {
    ws.decode(llr, &Layout::plain(spec), l)
}

/// Repetition-aware SC decoding of the concatenated code.
pub fn rep_sc_decode(llr: &LlrVector, spec: &ConcatenatedCodeSpec) -> Result<DecodeResult> {
    rep_sc_decode_with(&mut DecoderWorkspace::new(), llr, spec)
}

pub fn rep_sc_decode_with(
    ws: &mut DecoderWorkspace,
    llr: &LlrVector,
    spec: &ConcatenatedCodeSpec,
) -> Result<DecodeResult> {
    ws.decode(llr, &Layout::concatenated(spec)?, 1)
}

/// Repetition-aware successive list decoding.
pub fn rep_list_decode(
    llr: &LlrVector,
    spec: &ConcatenatedCodeSpec,
    l: usize,
) -> Result<DecodeResult> {
    rep_list_decode_with(&mut DecoderWorkspace::new(), llr, spec, l)
}

pub fn rep_list_decode_with(
    ws: &mut DecoderWorkspace,
    llr: &LlrVector,
    spec: &ConcatenatedCodeSpec,
    l: usize,
) -> Result<DecodeResult> {
    ws.decode(llr, &Layout::concatenated(spec)?, l)
}

/// Decode with a precompiled layout; used by the simulation loop.
pub fn decode_with_layout(
    ws: &mut DecoderWorkspace,
    llr: &LlrVector,
    layout: &Layout,
    l: usize,
) -> Result<DecodeResult> {
    ws.decode(llr, layout, l)
}

/// Either kind of code, for operations generic over both.
#[derive(Debug, Clone, Copy)]
pub enum CodeRef<'a> {
    Plain(&'a CodeSpec),
    Concatenated(&'a ConcatenatedCodeSpec),
}

impl<'a> CodeRef<'a> {
    pub fn dimension(&self) -> usize {
        match self {
            CodeRef::Plain(s) => s.dimension(),
            CodeRef::Concatenated(s) => s.dimension(),
        }
    }

    pub fn block_len(&self) -> usize {
        match self {
            CodeRef::Plain(s) => s.params().block_len(),
            CodeRef::Concatenated(s) => s.params().block_len(),
        }
    }

    pub fn source_word(&self, info: &BitVector) -> Result<BitVector> {
        match self {
            CodeRef::Plain(s) => s.source_word(info),
            CodeRef::Concatenated(s) => s.source_word(info),
        }
    }

    pub fn layout(&self) -> Result<Layout> {
        match self {
            CodeRef::Plain(s) => Ok(Layout::plain(s)),
            CodeRef::Concatenated(s) => Layout::concatenated(s),
        }
    }
}

/// Largest dimension accepted by the brute-force ML decoder.
pub const ML_DIMENSION_LIMIT: usize = 20;

/// Brute-force maximum-likelihood decoding: the codeword maximizing the
/// correlation `Σ (1−2c_i)·llr_i / 2` over the whole codebook; ties go to
/// the lexicographically smallest info word. The reported metric is the
/// path penalty of the chosen word, so it is directly comparable to the
/// successive decoders' metrics.
pub fn ml_decode_bruteforce(llr: &LlrVector, code: CodeRef<'_>) -> Result<DecodeResult> {
    let k = code.dimension();
    if k > ML_DIMENSION_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "ML brute force limited to dimension {ML_DIMENSION_LIMIT}, got {k}"
        )));
    }
    let n = code.block_len();
    if llr.len() != n {
        return Err(Error::invalid(format!(
            "LLR length {} does not match block length {n}",
            llr.len()
        )));
    }
    let mut best: Option<(f64, BitVector, BitVector)> = None;
    for word in 0..(1u64 << k) {
        let info: BitVector = (0..k)
            .map(|j| ((word >> (k - 1 - j)) & 1) as u8)
            .collect();
        let u = code.source_word(&info)?;
        let mut x = u.bits().to_vec();
        crate::xform::transform_in_place(&mut x);
        let corr: f64 = x
            .iter()
            .zip(llr.values())
            .map(|(&c, &l)| (1.0 - 2.0 * f64::from(c)) * l / 2.0)
            .sum();
        if best.as_ref().is_none_or(|(b, _, _)| corr > *b) {
            best = Some((corr, info, u));
        }
    }
    let (_, info, u) = best.expect("at least one codeword");
    let layout = code.layout()?;
    let metric = path_penalty(llr, &u, &layout)?;
    let params = crate::xform::PolarParams::from_block_len(n)?;
    let codeword = transform(&u, &params)?;
    Ok(DecodeResult {
        info_bits: info,
        codeword,
        metric,
    })
}

/// Recompute the accumulated penalty of a given source word against the
/// input LLRs by running the recursion with every decision forced.
/// Independent recomputation oracle for the decoders' reported metrics.
pub fn path_penalty(llr: &LlrVector, source: &BitVector, layout: &Layout) -> Result<f64> {
    let n = layout.block_len;
    if llr.len() != n || source.len() != n {
        return Err(Error::invalid("length mismatch"));
    }
    let stages = layout.stages;
    let mut ws = DecoderWorkspace::new();
    let mut path = ws.fresh_path(stages as usize + 1, n);
    path.llr[..n].copy_from_slice(llr.values());
    ws.paths.push(path);
    for i in 0..n {
        ws.update_llrs(0, i, stages, n);
        ws.apply_decision(0, i, source[i], stages, n);
    }
    Ok(ws.paths[0].metric)
}

/// Genie-aided decision LLRs for the all-zero source word: the decision LLR
/// at every index assuming all previous decisions were correct (zero).
/// O(N log N) because all prior partial sums vanish.
pub fn genie_decision_llrs(channel_llrs: &[f64]) -> Vec<f64> {
    fn rec(llrs: &[f64], out: &mut Vec<f64>) {
        let m = llrs.len();
        if m == 1 {
            out.push(llrs[0]);
            return;
        }
        let half = m / 2;
        let minus: Vec<f64> = (0..half)
            .map(|j| boxplus_exact(llrs[j], llrs[j + half]))
            .collect();
        rec(&minus, out);
        // all-zero left half: the g-direction is plain addition
        let plus: Vec<f64> = (0..half).map(|j| llrs[j] + llrs[j + half]).collect();
        rec(&plus, out);
    }
    debug_assert!(channel_llrs.len().is_power_of_two());
    let mut out = Vec::with_capacity(channel_llrs.len());
    rec(channel_llrs, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{awgn_apply, bpsk_modulate, llr_bi_awgn, ChannelParams, RngStream};
    use crate::design::{RepetitionBlock, SearchParams};
    use crate::reliability::awgn_reliability_ga;
    use crate::xform::{encode_concatenated, encode_polar, PolarParams};
    use rand::Rng;

    fn plain_spec(n_stages: u32, k: usize, es_n0_db: f64) -> CodeSpec {
        let params = PolarParams::from_stages(n_stages);
        let profile = awgn_reliability_ga(&params, es_n0_db);
        crate::design::select_information_set(&profile, k).unwrap()
    }

    fn noisy_llrs(
        spec_codeword: &BitVector,
        es_n0_db: f64,
        seed: u64,
        stream: u64,
    ) -> LlrVector {
        let params = ChannelParams::from_es_n0_db(es_n0_db);
        let mut rng = RngStream::new(seed, stream).rng();
        let symbols = bpsk_modulate(spec_codeword);
        let received = awgn_apply(&symbols, &params, &mut rng);
        llr_bi_awgn(&received, &params)
    }

    fn hard_llrs(codeword: &BitVector) -> LlrVector {
        LlrVector::new(
            codeword
                .iter()
                .map(|&b| if b == 0 { 1e3 } else { -1e3 })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn sc_recovers_noiseless() {
        let spec = plain_spec(4, 8, 0.0);
        let mut rng = RngStream::new(3, 0).rng();
        for _ in 0..50 {
            let info: BitVector = (0..8).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &spec).unwrap();
            let result = sc_decode(&hard_llrs(&cw), &spec).unwrap();
            assert_eq!(result.info_bits, info);
            assert_eq!(result.codeword, cw);
        }
    }

    #[test]
    fn sc_all_frozen() {
        let params = PolarParams::from_stages(3);
        let spec = CodeSpec::new(
            params,
            vec![],
            crate::reliability::DesignChannel::BiAwgn { es_n0_db: 0.0 },
            crate::reliability::ReliabilityMethod::GaussianApprox,
        )
        .unwrap();
        let llr = LlrVector::new(vec![-2.0, 1.0, 0.5, -0.25, 3.0, -1.0, 0.0, 2.0]).unwrap();
        let result = sc_decode(&llr, &spec).unwrap();
        assert!(result.info_bits.is_empty());
        assert_eq!(result.codeword, BitVector::zeros(8));
    }

    #[test]
    fn sc_length_mismatch() {
        let spec = plain_spec(3, 4, 0.0);
        let llr = LlrVector::new(vec![0.0; 4]).unwrap();
        assert!(sc_decode(&llr, &spec).is_err());
    }

    // Exhaustive posterior Pr(U_i = b | y, prefix), marginalizing uniformly
    // over all later source bits.
    fn brute_posterior_log(llr: &LlrVector, prefix: &[u8], bit: u8) -> f64 {
        let n = llr.len();
        let t = prefix.len();
        let suffix_len = n - t - 1;
        let mut terms = Vec::new();
        for suffix in 0..(1u64 << suffix_len) {
            let mut u: Vec<u8> = prefix.to_vec();
            u.push(bit);
            for j in 0..suffix_len {
                u.push(((suffix >> j) & 1) as u8);
            }
            crate::xform::transform_in_place(&mut u);
            let logp: f64 = u
                .iter()
                .zip(llr.values())
                .map(|(&c, &l)| (1.0 - 2.0 * f64::from(c)) * l / 2.0)
                .sum();
            terms.push(logp);
        }
        log_sum_exp(&terms)
    }

    fn log_sum_exp(v: &[f64]) -> f64 {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    }

    #[test]
    fn sc_decisions_match_brute_force_posterior() {
        let spec = plain_spec(2, 2, 1.0);
        for trial in 0..1000u64 {
            let mut rng = RngStream::new(21, trial).rng();
            let info: BitVector = (0..2).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, 1.0, 22, trial);
            let result = sc_decode(&llr, &spec).unwrap();
            let u = spec.source_word(&result.info_bits).unwrap();
            for i in 0..4 {
                if !spec.info_set().contains(&i) {
                    continue;
                }
                let l0 = brute_posterior_log(&llr, &u[..i], 0);
                let l1 = brute_posterior_log(&llr, &u[..i], 1);
                if (l0 - l1).abs() < 1e-9 {
                    continue; // numerical tie
                }
                let expect = if l1 > l0 { 1 } else { 0 };
                assert_eq!(u[i], expect, "trial {trial} index {i}: {l0} vs {l1}");
            }
        }
    }

    #[test]
    fn list_size_one_equals_sc() {
        let spec = plain_spec(4, 8, 0.0);
        for trial in 0..200u64 {
            let mut rng = RngStream::new(31, trial).rng();
            let info: BitVector = (0..8).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, -1.0, 32, trial);
            let a = sc_decode(&llr, &spec).unwrap();
            let b = sc_list_decode(&llr, &spec, 1).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn full_list_matches_ml_metric() {
        let spec = plain_spec(3, 4, 0.0);
        for trial in 0..200u64 {
            let mut rng = RngStream::new(41, trial).rng();
            let info: BitVector = (0..4).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, -2.0, 42, trial);
            let scl = sc_list_decode(&llr, &spec, 16).unwrap();
            let ml = ml_decode_bruteforce(&llr, CodeRef::Plain(&spec)).unwrap();
            assert!(
                (scl.metric - ml.metric).abs() <= 1e-9 * ml.metric.max(1.0),
                "trial {trial}: scl {} ml {}",
                scl.metric,
                ml.metric
            );
        }
    }

    fn fig3_spec() -> ConcatenatedCodeSpec {
        // one outer repetition code on u0 and u3 of an N=4 transform
        ConcatenatedCodeSpec::new(
            PolarParams::from_stages(2),
            vec![0, 2, 3],
            vec![RepetitionBlock::new(vec![0, 3]).unwrap()],
            crate::reliability::DesignChannel::BiAwgn { es_n0_db: 0.0 },
            crate::reliability::ReliabilityMethod::GaussianApprox,
        )
        .unwrap()
    }

    #[test]
    fn rep_sc_recovers_noiseless_fig3_layout() {
        let spec = fig3_spec();
        for word in 0..4u8 {
            let info = BitVector::from_bits(vec![word >> 1, word & 1]).unwrap();
            let cw = encode_concatenated(&info, &spec).unwrap();
            let result = rep_sc_decode(&hard_llrs(&cw), &spec).unwrap();
            assert_eq!(result.info_bits, info);
        }
    }

    #[test]
    fn rep_decoders_with_zero_blocks_equal_plain_decoders() {
        let params = PolarParams::from_stages(4);
        let profile = awgn_reliability_ga(&params, 0.0);
        let plain = crate::design::select_information_set(&profile, 8).unwrap();
        let conc = crate::design::design_concatenated(
            &profile,
            8,
            &SearchParams {
                delta_max: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(conc.blocks().is_empty());
        for trial in 0..1000u64 {
            let mut rng = RngStream::new(51, trial).rng();
            let info: BitVector = (0..8).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &plain).unwrap();
            let llr = noisy_llrs(&cw, -1.0, 52, trial);
            let a = sc_decode(&llr, &plain).unwrap();
            let b = rep_sc_decode(&llr, &conc).unwrap();
            let c = sc_list_decode(&llr, &plain, 1).unwrap();
            let d = rep_list_decode(&llr, &conc, 1).unwrap();
            assert_eq!(a, b);
            assert_eq!(a, c);
            assert_eq!(a, d);
        }
    }

    #[test]
    fn rep_list_size_one_equals_rep_sc() {
        let spec = fig3_spec();
        for trial in 0..1000u64 {
            let mut rng = RngStream::new(61, trial).rng();
            let info: BitVector = (0..2).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_concatenated(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, -2.0, 62, trial);
            let a = rep_sc_decode(&llr, &spec).unwrap();
            let b = rep_list_decode(&llr, &spec, 1).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rep_full_list_matches_ml_on_concatenated_code() {
        // N=8 concatenated spec with one pair block
        let spec = ConcatenatedCodeSpec::new(
            PolarParams::from_stages(3),
            vec![3, 5, 6, 7],
            vec![RepetitionBlock::new(vec![3, 5]).unwrap()],
            crate::reliability::DesignChannel::BiAwgn { es_n0_db: 0.0 },
            crate::reliability::ReliabilityMethod::GaussianApprox,
        )
        .unwrap();
        let k = spec.dimension();
        let l = 1usize << k;
        for trial in 0..1000u64 {
            let mut rng = RngStream::new(71, trial).rng();
            let info: BitVector = (0..k).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_concatenated(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, -2.0, 72, trial);
            let scl = rep_list_decode(&llr, &spec, l).unwrap();
            let ml = ml_decode_bruteforce(&llr, CodeRef::Concatenated(&spec)).unwrap();
            assert!(
                (scl.metric - ml.metric).abs() <= 1e-9 * ml.metric.max(1.0),
                "trial {trial}: scl {} ml {}",
                scl.metric,
                ml.metric
            );
        }
    }

    fn interleaved_spec(blocks: Vec<Vec<usize>>) -> ConcatenatedCodeSpec {
        ConcatenatedCodeSpec::new(
            PolarParams::from_stages(4),
            vec![7, 9, 10, 11, 12, 13, 14, 15],
            blocks
                .into_iter()
                .map(|b| RepetitionBlock::new(b).unwrap())
                .collect(),
            crate::reliability::DesignChannel::BiAwgn { es_n0_db: 0.0 },
            crate::reliability::ReliabilityMethod::GaussianApprox,
        )
        .unwrap()
    }

    #[test]
    fn rep_decoders_handle_interleaved_block_spans() {
        // two blocks whose index spans overlap (partially and nested): the
        // decoder keeps one branch combination open per block
        for blocks in [
            vec![vec![9, 12], vec![10, 13]], // partial overlap
            vec![vec![9, 13], vec![10, 12]], // nested
        ] {
            let spec = interleaved_spec(blocks);
            let k = spec.dimension();
            assert_eq!(k, 6);

            // noiseless recovery
            let mut rng = RngStream::new(101, 0).rng();
            for _ in 0..50 {
                let info: BitVector = (0..k).map(|_| rng.gen_range(0..=1u8)).collect();
                let cw = encode_concatenated(&info, &spec).unwrap();
                let result = rep_sc_decode(&hard_llrs(&cw), &spec).unwrap();
                assert_eq!(result.info_bits, info);
            }

            // full list against brute-force ML, metric and word
            for trial in 0..300u64 {
                let mut rng = RngStream::new(103, trial).rng();
                let info: BitVector = (0..k).map(|_| rng.gen_range(0..=1u8)).collect();
                let cw = encode_concatenated(&info, &spec).unwrap();
                let llr = noisy_llrs(&cw, -2.0, 104, trial);
                let scl = rep_list_decode(&llr, &spec, 1 << k).unwrap();
                let ml = ml_decode_bruteforce(&llr, CodeRef::Concatenated(&spec)).unwrap();
                assert!(
                    (scl.metric - ml.metric).abs() <= 1e-9 * ml.metric.max(1.0),
                    "trial {trial}: scl {} ml {}",
                    scl.metric,
                    ml.metric
                );
            }
        }
    }

    #[test]
    fn rep_sc_path_count_is_bounded_by_open_blocks() {
        // with L=1, the number of live paths equals 2^(number of open
        // blocks); both blocks open on [10, 12] of the partial overlap
        let spec = interleaved_spec(vec![vec![9, 12], vec![10, 13]]);
        let mut ws = DecoderWorkspace::new();
        ws.trace_blocks(true);
        let layout = Layout::concatenated(&spec).unwrap();
        let cw = encode_concatenated(&BitVector::zeros(6), &spec).unwrap();
        let llr = noisy_llrs(&cw, -2.0, 105, 0);
        decode_with_layout(&mut ws, &llr, &layout, 1).unwrap();
        // first block resolves at 12 under two pending values of the
        // second, then the second resolves alone at 13
        let tails: Vec<usize> = ws.block_traces().iter().map(|t| t.tail).collect();
        assert_eq!(tails, vec![12, 12, 13]);
    }

    #[test]
    fn rep_source_word_constant_within_blocks() {
        let spec = fig3_spec();
        for trial in 0..200u64 {
            let mut rng = RngStream::new(81, trial).rng();
            let info: BitVector = (0..2).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_concatenated(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, -3.0, 82, trial);
            let result = rep_sc_decode(&llr, &spec).unwrap();
            let u = spec.source_word(&result.info_bits).unwrap();
            let re = transform(&u, spec.params()).unwrap();
            assert_eq!(re, result.codeword);
        }
    }

    #[test]
    fn reported_metric_matches_recomputation() {
        let spec = plain_spec(4, 8, 0.0);
        let layout = Layout::plain(&spec);
        for trial in 0..200u64 {
            let mut rng = RngStream::new(91, trial).rng();
            let info: BitVector = (0..8).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, -1.0, 92, trial);
            for result in [
                sc_decode(&llr, &spec).unwrap(),
                sc_list_decode(&llr, &spec, 4).unwrap(),
            ] {
                let u = spec.source_word(&result.info_bits).unwrap();
                let recomputed = path_penalty(&llr, &u, &layout).unwrap();
                assert!(
                    (result.metric - recomputed).abs() <= 1e-9 * recomputed.max(1.0),
                    "metric {} vs recomputed {recomputed}",
                    result.metric
                );
            }
        }
    }

    #[test]
    fn ml_dimension_limit() {
        let spec = plain_spec(5, 25, 0.0);
        let llr = LlrVector::new(vec![0.1; 32]).unwrap();
        assert!(matches!(
            ml_decode_bruteforce(&llr, CodeRef::Plain(&spec)),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn ml_k1_picks_by_correlation_sign() {
        let params = PolarParams::from_stages(2);
        let spec = CodeSpec::new(
            params,
            vec![3],
            crate::reliability::DesignChannel::BiAwgn { es_n0_db: 0.0 },
            crate::reliability::ReliabilityMethod::GaussianApprox,
        )
        .unwrap();
        // codewords: 0000 and 1111; positive total LLR favors all-zero
        let llr = LlrVector::new(vec![2.0, -1.0, 0.5, 0.25]).unwrap();
        let r = ml_decode_bruteforce(&llr, CodeRef::Plain(&spec)).unwrap();
        assert_eq!(r.info_bits.bits(), &[0]);
        let llr = LlrVector::new(vec![-2.0, 1.0, -0.5, -0.25]).unwrap();
        let r = ml_decode_bruteforce(&llr, CodeRef::Plain(&spec)).unwrap();
        assert_eq!(r.info_bits.bits(), &[1]);
    }

    #[test]
    fn sc_approaches_ml_at_high_snr() {
        let spec = plain_spec(4, 8, 3.0);
        let eb_n0_db = 6.0;
        let es = crate::channel::ebn0_to_esn0(eb_n0_db, 0.5).unwrap();
        let trials = 10_000u64;
        let (mut sc_err, mut ml_err) = (0u64, 0u64);
        let mut ws = DecoderWorkspace::new();
        for trial in 0..trials {
            let mut rng = RngStream::new(101, trial).rng();
            let info: BitVector = (0..8).map(|_| rng.gen_range(0..=1u8)).collect();
            let cw = encode_polar(&info, &spec).unwrap();
            let llr = noisy_llrs(&cw, es, 102, trial);
            if sc_decode_with(&mut ws, &llr, &spec).unwrap().info_bits != info {
                sc_err += 1;
            }
            if ml_decode_bruteforce(&llr, CodeRef::Plain(&spec))
                .unwrap()
                .info_bits
                != info
            {
                ml_err += 1;
            }
        }
        assert!(ml_err > 0, "no ML errors observed; raise the noise");
        let ratio = sc_err as f64 / ml_err as f64;
        assert!(
            (0.8..=1.2).contains(&ratio),
            "SC/ML WER ratio {ratio} ({sc_err}/{ml_err})"
        );
    }

    #[test]
    fn genie_llrs_match_forced_engine() {
        // the genie recursion must agree with the engine when every
        // decision is forced to zero
        let n = 16usize;
        let mut rng = RngStream::new(111, 0).rng();
        for _ in 0..50 {
            let llrs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let genie = genie_decision_llrs(&llrs);
            let mut ws = DecoderWorkspace::new();
            let mut path = ws.fresh_path(5, n);
            path.llr[..n].copy_from_slice(&llrs);
            ws.paths.push(path);
            for i in 0..n {
                ws.update_llrs(0, i, 4, n);
                let lam = ws.paths[0].lambda;
                assert!(
                    (lam - genie[i]).abs() <= 1e-9 * genie[i].abs().max(1.0),
                    "index {i}: engine {lam} genie {}",
                    genie[i]
                );
                ws.apply_decision(0, i, 0, 4, n);
            }
        }
    }
}
