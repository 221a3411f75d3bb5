//! Information-set selection, the rate- and length-preserving enlargement
//! for the concatenated construction, and the constrained search for an
//! optimal layout of non-overlapping outer repetition blocks.

use crate::error::{Error, Result};
use crate::reliability::{
    equivalent_block_reliability, predicted_wer, DesignChannel, ReliabilityMethod,
    ReliabilityProfile,
};
use crate::xform::{BitVector, PolarParams};

/// A plain polar code: information set, dimension and rate.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpec {
    params: PolarParams,
    info_set: Vec<usize>,
    k: usize,
    rate: f64,
    channel: DesignChannel,
    method: ReliabilityMethod,
}

impl CodeSpec {
    pub fn new(
        params: PolarParams,
        info_set: Vec<usize>,
        channel: DesignChannel,
        method: ReliabilityMethod,
    ) -> Result<Self> {
        // an empty information set (K = 0, everything frozen) is a legal
        // degenerate code
        check_index_set(&info_set, params.block_len(), "information set")?;
        let k = info_set.len();
        Ok(CodeSpec {
            params,
            rate: k as f64 / params.block_len() as f64,
            info_set,
            k,
            channel,
            method,
        })
    }

    pub fn params(&self) -> &PolarParams {
        &self.params
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        let mut frozen = Vec::with_capacity(self.params.block_len() - self.k);
        let mut it = self.info_set.iter().peekable();
        for i in 0..self.params.block_len() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                frozen.push(i);
            }
        }
        frozen
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn design_channel(&self) -> DesignChannel {
        self.channel
    }

    pub fn design_method(&self) -> ReliabilityMethod {
        self.method
    }

    /// Source word with info bits scattered into the information set and
    /// zeros on frozen positions.
    pub fn source_word(&self, info: &BitVector) -> Result<BitVector> {
        if info.len() != self.k {
            return Err(Error::invalid(format!(
                "info length {} does not match dimension {}",
                info.len(),
                self.k
            )));
        }
        let mut u = vec![0u8; self.params.block_len()];
        for (&pos, &bit) in self.info_set.iter().zip(info.iter()) {
            u[pos] = bit;
        }
        BitVector::from_bits(u)
    }

    /// Analytic SC word error rate over the information set.
    pub fn predicted_wer(&self, profile: &ReliabilityProfile) -> Result<f64> {
        let pe: Vec<f64> = self.info_set.iter().map(|&i| profile.pe()[i]).collect();
        predicted_wer(&pe)
    }
}

/// A set of bit-channel indices constrained to carry the same source bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepetitionBlock {
    indices: Vec<usize>,
}

impl RepetitionBlock {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 2 {
            return Err(Error::invalid("repetition block must have size ≥ 2"));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid(
                "repetition block indices must be strictly increasing",
            ));
        }
        Ok(RepetitionBlock { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn head(&self) -> usize {
        self.indices[0]
    }

    pub fn tail(&self) -> usize {
        *self.indices.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// What a position of the enlarged set carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    /// An unblocked channel carrying one info bit.
    Single(usize),
    /// A repetition block (by index into `blocks()`), carrying one info bit
    /// copied to every member.
    Block(usize),
}

/// The concatenated code: enlarged channel set, repetition blocks and the
/// preserved dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcatenatedCodeSpec {
    params: PolarParams,
    enlarged_set: Vec<usize>,
    blocks: Vec<RepetitionBlock>,
    k: usize,
    rate: f64,
    channel: DesignChannel,
    method: ReliabilityMethod,
}

impl ConcatenatedCodeSpec {
    pub fn new(
        params: PolarParams,
        enlarged_set: Vec<usize>,
        blocks: Vec<RepetitionBlock>,
        channel: DesignChannel,
        method: ReliabilityMethod,
    ) -> Result<Self> {
        check_index_set(&enlarged_set, params.block_len(), "enlarged set")?;
        let extra: usize = blocks.iter().map(|b| b.len() - 1).sum();
        if enlarged_set.len() <= extra {
            return Err(Error::invalid("enlarged set smaller than block overhead"));
        }
        let k = enlarged_set.len() - extra;
        let mut seen = vec![false; params.block_len()];
        for &i in &enlarged_set {
            seen[i] = true;
        }
        let mut used = vec![false; params.block_len()];
        for b in &blocks {
            for &i in b.indices() {
                if !seen[i] {
                    return Err(Error::invalid(format!(
                        "block index {i} not in enlarged set"
                    )));
                }
                if used[i] {
                    return Err(Error::invalid(format!("blocks overlap at index {i}")));
                }
                used[i] = true;
            }
        }
        Ok(ConcatenatedCodeSpec {
            rate: k as f64 / params.block_len() as f64,
            params,
            enlarged_set,
            blocks,
            k,
            channel,
            method,
        })
    }

    pub fn params(&self) -> &PolarParams {
        &self.params
    }

    pub fn enlarged_set(&self) -> &[usize] {
        &self.enlarged_set
    }

    pub fn blocks(&self) -> &[RepetitionBlock] {
        &self.blocks
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Inner-code rate `R_i = |𝒜*| / N`.
    pub fn inner_rate(&self) -> f64 {
        self.enlarged_set.len() as f64 / self.params.block_len() as f64
    }

    /// Outer-code rate `R_o = K / |𝒜*|`.
    pub fn outer_rate(&self) -> f64 {
        self.k as f64 / self.enlarged_set.len() as f64
    }

    pub fn design_channel(&self) -> DesignChannel {
        self.channel
    }

    pub fn design_method(&self) -> ReliabilityMethod {
        self.method
    }

    /// The frozen positions (complement of the enlarged set).
    pub fn frozen_set(&self) -> Vec<usize> {
        let mut member = vec![false; self.params.block_len()];
        for &i in &self.enlarged_set {
            member[i] = true;
        }
        (0..self.params.block_len())
            .filter(|&i| !member[i])
            .collect()
    }

    /// The information carriers in decoding order: one entry per info bit.
    pub fn carriers(&self) -> Vec<Carrier> {
        let mut role = vec![None; self.params.block_len()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &i in block.indices() {
                role[i] = Some((b, i == block.head()));
            }
        }
        let mut carriers = Vec::with_capacity(self.k);
        for &pos in &self.enlarged_set {
            match role[pos] {
                None => carriers.push(Carrier::Single(pos)),
                Some((b, true)) => carriers.push(Carrier::Block(b)),
                Some((_, false)) => {}
            }
        }
        carriers
    }

    /// Source word: each block's source bit copied to all block positions,
    /// unblocked positions carry one info bit each, frozen positions zero.
    pub fn source_word(&self, info: &BitVector) -> Result<BitVector> {
        if info.len() != self.k {
            return Err(Error::invalid(format!(
                "info length {} does not match dimension {}",
                info.len(),
                self.k
            )));
        }
        let mut u = vec![0u8; self.params.block_len()];
        for (carrier, &bit) in self.carriers().iter().zip(info.iter()) {
            match carrier {
                Carrier::Single(pos) => u[*pos] = bit,
                Carrier::Block(b) => {
                    for &pos in self.blocks[*b].indices() {
                        u[pos] = bit;
                    }
                }
            }
        }
        BitVector::from_bits(u)
    }

    /// Analytic SC word error rate using equivalent-block reliabilities for
    /// blocks and raw failure probabilities for unblocked carriers.
    pub fn predicted_wer(&self, profile: &ReliabilityProfile) -> Result<f64> {
        let mut pe = Vec::with_capacity(self.k);
        for carrier in self.carriers() {
            match carrier {
                Carrier::Single(pos) => pe.push(profile.pe()[pos]),
                Carrier::Block(b) => pe.push(
                    equivalent_block_reliability(profile, self.blocks[b].indices())?.pe_equiv,
                ),
            }
        }
        predicted_wer(&pe)
    }
}

fn check_index_set(set: &[usize], block_len: usize, what: &str) -> Result<()> {
    if !set.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid(format!(
            "{what} must be strictly increasing"
        )));
    }
    if set.last().is_some_and(|&i| i >= block_len) {
        return Err(Error::invalid(format!("{what} index out of range")));
    }
    Ok(())
}

/// Pick the K bit channels with the lowest failure probabilities; ties break
/// toward the lower index.
pub fn select_information_set(profile: &ReliabilityProfile, k: usize) -> Result<CodeSpec> {
    let n = profile.params().block_len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K = {k} out of range 1..={n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| profile.pe()[a].total_cmp(&profile.pe()[b]).then(a.cmp(&b)));
    let mut info: Vec<usize> = idx[..k].to_vec();
    info.sort_unstable();
    CodeSpec::new(*profile.params(), info, profile.channel(), profile.method())
}

/// Bounds on the repetition-block search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    /// Maximum number of extra channels, `|𝒜*| − K`.
    pub delta_max: usize,
    /// Maximum repetition block length.
    pub block_len_max: usize,
    /// Number of channels nearest the rate-K threshold (by failure
    /// probability rank) that are eligible for blocking.
    pub candidate_window: usize,
    /// Maximum number of block spans that may cover any single channel
    /// index. The block decoder keeps one path per combination of
    /// unresolved block branches, so its cost grows as 2^(open blocks);
    /// this bound keeps decoding tractable.
    pub max_open_blocks: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            delta_max: 16,
            block_len_max: 4,
            candidate_window: 96,
            max_open_blocks: 6,
        }
    }
}

/// Search for the repetition-block layout minimizing the predicted word
/// error rate at preserved rate and block length.
///
/// The search adds blocks one at a time: each round evaluates every
/// admissible block over the candidate window (all sizes up to
/// `block_len_max`, head holding the block's minimum failure probability,
/// members disjoint from already chosen blocks) against the exact analytic
/// WER of the resulting configuration and keeps the best, stopping when no
/// block improves. The empty configuration is the starting point, so the
/// result never predicts worse than the plain code.
pub fn design_concatenated(
    profile: &ReliabilityProfile,
    k: usize,
    search: &SearchParams,
) -> Result<ConcatenatedCodeSpec> {
    let n = profile.params().block_len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K = {k} out of range 1..={n}")));
    }
    if search.block_len_max < 2 {
        return Err(Error::invalid("block_len_max must be ≥ 2"));
    }
    let means = profile.llr_mean().ok_or_else(|| {
        Error::UnsupportedMethod(
            "concatenated design requires a Gaussian-approximation profile".into(),
        )
    })?;
    let pe = profile.pe();

    // Channels ranked by failure probability, best first.
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| pe[a].total_cmp(&pe[b]).then(a.cmp(&b)));

    // Window of block-eligible channels around the rate-K threshold.
    let w = search.candidate_window.min(n);
    let lo = k.saturating_sub(w / 2).min(n - w);
    let window: Vec<usize> = ranked[lo..lo + w].to_vec();

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut delta_used = 0usize;

    loop {
        let remaining = search.delta_max.saturating_sub(delta_used);
        if remaining == 0 || blocks.len() + 1 > k {
            break;
        }
        let state = SearchState::new(&ranked, pe, means, &blocks, k);
        let current = state.wer();

        let max_len = search.block_len_max.min(remaining + 1);
        let mut best: Option<(f64, Vec<usize>)> = None;
        let free: Vec<usize> = window
            .iter()
            .copied()
            .filter(|&c| !state.used[c])
            .collect();
        for_each_combination(&free, max_len, &mut |cand| {
            if !head_rule_holds(cand, pe) {
                return;
            }
            if !within_open_limit(&blocks, cand, search.max_open_blocks) {
                return;
            }
            let wer = state.wer_with_block(cand);
            let better = match &best {
                None => true,
                Some((bw, bc)) => {
                    wer.total_cmp(bw)
                        .then(cand.len().cmp(&bc.len()))
                        .then(cand.cmp(&bc[..]))
                        .is_lt()
                }
            };
            if better {
                best = Some((wer, cand.to_vec()));
            }
        });
        match best {
            Some((wer, cand)) if wer < current => {
                delta_used += cand.len() - 1;
                blocks.push(cand);
            }
            _ => break,
        }
    }

    // Assemble the spec: carriers are the blocks plus the best unblocked
    // channels; the enlarged set is their union.
    let state = SearchState::new(&ranked, pe, means, &blocks, k);
    let mut enlarged: Vec<usize> = state.unblocked_carriers().to_vec();
    for b in &blocks {
        enlarged.extend_from_slice(b);
    }
    enlarged.sort_unstable();
    blocks.sort_by_key(|b| b[0]);
    let blocks = blocks
        .into_iter()
        .map(RepetitionBlock::new)
        .collect::<Result<Vec<_>>>()?;
    ConcatenatedCodeSpec::new(
        *profile.params(),
        enlarged,
        blocks,
        profile.channel(),
        profile.method(),
    )
}

/// True when adding `cand` keeps the number of block spans covering any
/// channel index at or below `limit`.
fn within_open_limit(blocks: &[Vec<usize>], cand: &[usize], limit: usize) -> bool {
    let span = |b: &[usize]| {
        let lo = *b.iter().min().unwrap();
        let hi = *b.iter().max().unwrap();
        (lo, hi)
    };
    let mut events: Vec<(usize, i32)> = Vec::with_capacity(2 * (blocks.len() + 1));
    for b in blocks.iter().map(|b| b.as_slice()).chain([cand]) {
        let (lo, hi) = span(b);
        events.push((lo, 1));
        events.push((hi + 1, -1));
    }
    // closes before opens at the same index
    events.sort_by_key(|&(i, d)| (i, d));
    let mut open = 0i32;
    for (_, d) in events {
        open += d;
        if open as usize > limit {
            return false;
        }
    }
    true
}

fn head_rule_holds(block: &[usize], pe: &[f64]) -> bool {
    // block is sorted; the smallest index must carry the smallest pe
    let head = block[0];
    block.iter().all(|&i| pe[head] <= pe[i])
}

struct SearchState<'a> {
    pe: &'a [f64],
    means: &'a [f64],
    used: Vec<bool>,
    // unblocked channels in pe-rank order, blocked ones removed
    pool: Vec<usize>,
    // position of each channel in the pool (usize::MAX when blocked)
    pool_pos: Vec<usize>,
    // prefix sums of ln(1 − pe) over the pool
    log_prefix: Vec<f64>,
    // Σ ln(1 − pe_equiv) over chosen blocks
    log_blocks: f64,
    n_blocks: usize,
    k: usize,
}

impl<'a> SearchState<'a> {
    fn new(
        ranked: &[usize],
        pe: &'a [f64],
        means: &'a [f64],
        blocks: &[Vec<usize>],
        k: usize,
    ) -> Self {
        let n = pe.len();
        let mut used = vec![false; n];
        let mut log_blocks = 0.0;
        for b in blocks {
            for &i in b {
                used[i] = true;
            }
            log_blocks += (1.0 - block_pe(b, means)).ln();
        }
        let pool: Vec<usize> = ranked.iter().copied().filter(|&c| !used[c]).collect();
        let mut pool_pos = vec![usize::MAX; n];
        let mut log_prefix = Vec::with_capacity(pool.len() + 1);
        log_prefix.push(0.0);
        for (p, &c) in pool.iter().enumerate() {
            pool_pos[c] = p;
            log_prefix.push(log_prefix.last().unwrap() + (1.0 - pe[c]).ln());
        }
        SearchState {
            pe,
            means,
            used,
            pool,
            pool_pos,
            log_prefix,
            log_blocks,
            n_blocks: blocks.len(),
            k,
        }
    }

    /// The unblocked carriers of the current configuration.
    fn unblocked_carriers(&self) -> &[usize] {
        &self.pool[..self.k - self.n_blocks]
    }

    fn wer(&self) -> f64 {
        let singles = self.k - self.n_blocks;
        1.0 - (self.log_blocks + self.log_prefix[singles]).exp()
    }

    /// WER of the configuration extended by one more block.
    fn wer_with_block(&self, block: &[usize]) -> f64 {
        let singles = self.k - self.n_blocks - 1;
        // first `singles` pool entries, skipping any that joined the block
        let positions: Vec<usize> = block.iter().map(|&c| self.pool_pos[c]).collect();
        let mut take = singles;
        loop {
            let inside = positions.iter().filter(|&&p| p < take).count();
            if take == singles + inside {
                break;
            }
            take = singles + inside;
        }
        let mut log_singles = self.log_prefix[take];
        for &p in &positions {
            if p < take {
                log_singles -= (1.0 - self.pe[self.pool[p]]).ln();
            }
        }
        let log_new = (1.0 - block_pe(block, self.means)).ln();
        1.0 - (self.log_blocks + log_new + log_singles).exp()
    }
}

fn block_pe(block: &[usize], means: &[f64]) -> f64 {
    let m: f64 = block.iter().map(|&i| means[i]).sum();
    crate::reliability::q_func((m / 2.0).sqrt())
}

/// Visit every sorted combination of `items` with size 2..=max_len without
/// materializing the whole family.
fn for_each_combination(items: &[usize], max_len: usize, visit: &mut impl FnMut(&[usize])) {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    fn rec(
        sorted: &[usize],
        start: usize,
        max_len: usize,
        current: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if current.len() >= 2 {
            visit(current);
        }
        if current.len() == max_len {
            return;
        }
        for i in start..sorted.len() {
            current.push(sorted[i]);
            rec(sorted, i + 1, max_len, current, visit);
            current.pop();
        }
    }
    rec(&sorted, 0, max_len, &mut Vec::new(), visit);
}

/// A violated invariant of a [`ConcatenatedCodeSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BlocksOverlap { index: usize },
    BlockOutsideEnlargedSet { index: usize },
    BlockTooSmall { head: usize },
    HeadNotMostReliable { head: usize, better: usize },
    RateNotPreserved { expected_k: usize, actual_k: usize },
    EnlargedSetNotSorted,
    IndexOutOfRange { index: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::BlocksOverlap { index } => {
                write!(f, "non-overlap violated: blocks share index {index}")
            }
            Violation::BlockOutsideEnlargedSet { index } => {
                write!(f, "block index {index} is not in the enlarged set")
            }
            Violation::BlockTooSmall { head } => {
                write!(f, "block at head {head} has fewer than 2 members")
            }
            Violation::HeadNotMostReliable { head, better } => write!(
                f,
                "head-reliability violated: head {head} less reliable than member {better}"
            ),
            Violation::RateNotPreserved {
                expected_k,
                actual_k,
            } => write!(
                f,
                "rate preservation violated: K = {actual_k}, expected {expected_k}"
            ),
            Violation::EnlargedSetNotSorted => {
                write!(f, "enlarged set is not strictly increasing")
            }
            Violation::IndexOutOfRange { index } => {
                write!(f, "index {index} out of range")
            }
        }
    }
}

/// Check every structural invariant of a concatenated spec against a
/// reliability profile; violations are data, not errors.
pub fn validate_scheme(
    spec: &ConcatenatedCodeSpec,
    profile: &ReliabilityProfile,
) -> Vec<Violation> {
    let n = spec.params().block_len();
    let pe = profile.pe();
    let mut violations = Vec::new();

    if !spec.enlarged_set().windows(2).all(|w| w[0] < w[1]) {
        violations.push(Violation::EnlargedSetNotSorted);
    }
    for &i in spec.enlarged_set() {
        if i >= n {
            violations.push(Violation::IndexOutOfRange { index: i });
        }
    }

    let mut member = vec![false; n];
    for &i in spec.enlarged_set() {
        if i < n {
            member[i] = true;
        }
    }
    let mut used = vec![false; n];
    for block in spec.blocks() {
        if block.len() < 2 {
            violations.push(Violation::BlockTooSmall { head: block.head() });
        }
        for &i in block.indices() {
            if i >= n {
                violations.push(Violation::IndexOutOfRange { index: i });
                continue;
            }
            if !member[i] {
                violations.push(Violation::BlockOutsideEnlargedSet { index: i });
            }
            if used[i] {
                violations.push(Violation::BlocksOverlap { index: i });
            }
            used[i] = true;
        }
        let head = block.head();
        if head < n {
            for &i in block.indices() {
                if i < n && pe[i] < pe[head] {
                    violations.push(Violation::HeadNotMostReliable { head, better: i });
                }
            }
        }
    }

    let extra: usize = spec.blocks().iter().map(|b| b.len().saturating_sub(1)).sum();
    let expected_k = spec.enlarged_set().len() - extra.min(spec.enlarged_set().len());
    if expected_k != spec.dimension() {
        violations.push(Violation::RateNotPreserved {
            expected_k,
            actual_k: spec.dimension(),
        });
    }

    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::{awgn_reliability_ga, q_inv, ReliabilityMethod};

    fn synthetic_profile(pe: Vec<f64>) -> ReliabilityProfile {
        let params = PolarParams::from_block_len(pe.len()).unwrap();
        let means: Vec<f64> = pe.iter().map(|&p| 2.0 * q_inv(p) * q_inv(p)).collect();
        ReliabilityProfile::from_parts(
            params,
            DesignChannel::BiAwgn { es_n0_db: 0.0 },
            ReliabilityMethod::GaussianApprox,
            pe,
            Some(means),
        )
        .unwrap()
    }

    #[test]
    fn select_two_smallest() {
        let profile = synthetic_profile(vec![0.4, 0.1, 0.2, 0.01]);
        let spec = select_information_set(&profile, 2).unwrap();
        assert_eq!(spec.info_set(), &[1, 3]);
        assert_eq!(spec.frozen_set(), vec![0, 2]);
        assert_eq!(spec.rate(), 0.5);
    }

    #[test]
    fn select_all_channels() {
        let profile = synthetic_profile(vec![0.4, 0.1, 0.2, 0.01]);
        let spec = select_information_set(&profile, 4).unwrap();
        assert_eq!(spec.info_set(), &[0, 1, 2, 3]);
        assert!(select_information_set(&profile, 5).is_err());
        assert!(select_information_set(&profile, 0).is_err());
    }

    #[test]
    fn select_is_a_sorted_prefix() {
        let params = PolarParams::from_block_len(256).unwrap();
        let profile = awgn_reliability_ga(&params, -0.5);
        let spec = select_information_set(&profile, 128).unwrap();
        let max_selected = spec
            .info_set()
            .iter()
            .map(|&i| profile.pe()[i])
            .fold(0.0f64, f64::max);
        for i in spec.frozen_set() {
            assert!(profile.pe()[i] >= max_selected);
        }
    }

    #[test]
    fn design_with_zero_delta_is_plain() {
        let profile = synthetic_profile(vec![0.001, 0.3, 0.25, 0.4]);
        let search = SearchParams {
            delta_max: 0,
            ..Default::default()
        };
        let spec = design_concatenated(&profile, 2, &search).unwrap();
        assert!(spec.blocks().is_empty());
        assert_eq!(spec.enlarged_set(), &[0, 2]);
        assert_eq!(spec.dimension(), 2);
    }

    #[test]
    fn design_four_channel_example_matches_hand_enumeration() {
        // With delta_max = 1 and pair blocks only, the admissible layouts are
        // the single blocks {0,1}, {0,2}, {0,3}, {2,3}, {1,3} (the pair {1,2}
        // violates the head rule) and the empty layout. Enumerate them all
        // via the public predicted-WER path and check the search picks the
        // arg-min.
        let profile = synthetic_profile(vec![0.001, 0.3, 0.25, 0.4]);
        let k = 2;
        let search = SearchParams {
            delta_max: 1,
            block_len_max: 2,
            candidate_window: 4,
            ..Default::default()
        };
        let chosen = design_concatenated(&profile, k, &search).unwrap();

        let params = *profile.params();
        let mut best: Option<(f64, Option<Vec<usize>>)> = None;
        let mut consider = |wer: f64, layout: Option<Vec<usize>>| {
            if best.as_ref().is_none_or(|(b, _)| wer < *b) {
                best = Some((wer, layout));
            }
        };
        let plain = select_information_set(&profile, k).unwrap();
        consider(plain.predicted_wer(&profile).unwrap(), None);
        for pair in [[0usize, 1], [0, 2], [0, 3], [2, 3], [1, 3]] {
            // carriers: the block plus the best remaining channel
            let mut rest: Vec<usize> = (0..4).filter(|i| !pair.contains(i)).collect();
            rest.sort_by(|&a, &b| profile.pe()[a].total_cmp(&profile.pe()[b]));
            let mut enlarged = vec![pair[0], pair[1], rest[0]];
            enlarged.sort_unstable();
            let spec = ConcatenatedCodeSpec::new(
                params,
                enlarged,
                vec![RepetitionBlock::new(pair.to_vec()).unwrap()],
                profile.channel(),
                profile.method(),
            )
            .unwrap();
            consider(spec.predicted_wer(&profile).unwrap(), Some(pair.to_vec()));
        }

        let (best_wer, best_layout) = best.unwrap();
        assert_eq!(best_layout.as_deref(), Some(&[2usize, 3][..]));
        assert_eq!(
            chosen
                .blocks()
                .iter()
                .map(|b| b.indices().to_vec())
                .collect::<Vec<_>>(),
            vec![vec![2, 3]]
        );
        let chosen_wer = chosen.predicted_wer(&profile).unwrap();
        assert!((chosen_wer - best_wer).abs() < 1e-15);
    }

    #[test]
    fn design_dominates_plain_code() {
        let params = PolarParams::from_block_len(256).unwrap();
        let profile = awgn_reliability_ga(&params, -0.5);
        let k = 128;
        let plain = select_information_set(&profile, k).unwrap();
        let conc = design_concatenated(&profile, k, &SearchParams::default()).unwrap();
        assert_eq!(conc.dimension(), k);
        assert_eq!(conc.rate(), plain.rate());
        let wer_plain = plain.predicted_wer(&profile).unwrap();
        let wer_conc = conc.predicted_wer(&profile).unwrap();
        assert!(
            wer_conc <= wer_plain,
            "concatenated {wer_conc} vs plain {wer_plain}"
        );
        assert!(validate_scheme(&conc, &profile).is_empty());
        assert!((conc.rate() - conc.inner_rate() * conc.outer_rate()).abs() < 1e-12);
    }

    #[test]
    fn design_is_deterministic() {
        let params = PolarParams::from_block_len(128).unwrap();
        let profile = awgn_reliability_ga(&params, 0.0);
        let a = design_concatenated(&profile, 64, &SearchParams::default()).unwrap();
        let b = design_concatenated(&profile, 64, &SearchParams::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn design_requires_llr_means() {
        let params = PolarParams::from_stages(4);
        let profile = crate::reliability::bec_reliability(&params, 0.4).unwrap();
        assert!(matches!(
            design_concatenated(&profile, 8, &SearchParams::default()),
            Err(Error::UnsupportedMethod(_))
        ));
    }

    #[test]
    fn validate_reports_overlap_and_head_violations() {
        let profile = synthetic_profile(vec![0.001, 0.3, 0.25, 0.4, 0.2, 0.35, 0.15, 0.45]);
        let params = *profile.params();

        let valid = ConcatenatedCodeSpec::new(
            params,
            vec![0, 2, 3, 6],
            vec![RepetitionBlock::new(vec![2, 3]).unwrap()],
            profile.channel(),
            profile.method(),
        )
        .unwrap();
        assert!(validate_scheme(&valid, &profile).is_empty());

        // shared index: construct via new() is rejected, so build the raw
        // struct through a bypass spec and validate it
        let overlapping = ConcatenatedCodeSpec {
            params,
            enlarged_set: vec![0, 2, 3, 5, 6],
            blocks: vec![
                RepetitionBlock::new(vec![2, 3]).unwrap(),
                RepetitionBlock::new(vec![3, 5]).unwrap(),
            ],
            k: 3,
            rate: 3.0 / 8.0,
            channel: profile.channel(),
            method: profile.method(),
        };
        let report = validate_scheme(&overlapping, &profile);
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::BlocksOverlap { index: 3 })));

        // head pe exceeds a member's pe: block (1, 4) has pe 0.3 at the head
        // but 0.2 at index 4
        let bad_head = ConcatenatedCodeSpec {
            params,
            enlarged_set: vec![0, 1, 4, 6],
            blocks: vec![RepetitionBlock::new(vec![1, 4]).unwrap()],
            k: 3,
            rate: 3.0 / 8.0,
            channel: profile.channel(),
            method: profile.method(),
        };
        let report = validate_scheme(&bad_head, &profile);
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::HeadNotMostReliable { head: 1, better: 4 })));
    }

    #[test]
    fn source_word_copies_block_bits() {
        // Fig.-3-style layout: one block {0, 3} on N = 4.
        let params = PolarParams::from_stages(2);
        let spec = ConcatenatedCodeSpec::new(
            params,
            vec![0, 3],
            vec![RepetitionBlock::new(vec![0, 3]).unwrap()],
            DesignChannel::BiAwgn { es_n0_db: 0.0 },
            ReliabilityMethod::GaussianApprox,
        )
        .unwrap();
        assert_eq!(spec.dimension(), 1);
        let u = spec
            .source_word(&BitVector::from_bits(vec![1]).unwrap())
            .unwrap();
        assert_eq!(u.bits(), &[1, 0, 0, 1]);
    }
}
