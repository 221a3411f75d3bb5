//! Chunked map-reduce over trial index ranges.
//!
//! Runs on rayon when the `parallel` feature is enabled, sequentially
//! otherwise. Chunk boundaries are fixed by `chunk`, and the reduction must
//! be associative and commutative, so the result is identical for any
//! worker count.

use std::ops::Range;

/// Split `range` into fixed-size chunks, map each chunk and reduce.
pub fn map_reduce_trials<T, M, I, R>(
    range: Range<u64>,
    chunk: u64,
    map: M,
    identity: I,
    reduce: R,
) -> T
where
    T: Send,
    M: Fn(Range<u64>) -> T + Sync + Send,
    I: Fn() -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    assert!(chunk > 0);
    let chunks: Vec<Range<u64>> = {
        let mut v = Vec::new();
        let mut start = range.start;
        while start < range.end {
            let end = (start + chunk).min(range.end);
            v.push(start..end);
            start = end;
        }
        v
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        chunks.into_par_iter().map(map).reduce(identity, reduce)
    }

    #[cfg(not(feature = "parallel"))]
    {
        chunks.into_iter().map(map).fold(identity(), reduce)
    }
}

/// Elementwise sum of two equal-length count vectors.
pub fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}
