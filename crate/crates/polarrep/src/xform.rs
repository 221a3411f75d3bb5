//! The Arikan transform `x = u·G_N` with `G_N = F^{⊗n}`, `F = [[1,0],[1,1]]`,
//! in natural (non-bit-reversed) row order, together with naive matrix
//! reference constructions used as test oracles and the encoders for plain
//! and concatenated codes.
//!
//! Convention: butterfly stage `s` combines positions differing in bit `s`
//! of the index, matching the recursive Kronecker structure. Encoders and
//! decoders share this convention.

use crate::design::{CodeSpec, ConcatenatedCodeSpec};
use crate::error::{Error, Result};

/// Block length `N = 2^n` and the number of polarization stages `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarParams {
    n: u32,
    block_len: usize,
}

impl PolarParams {
    /// Construct from the number of polarization stages.
    pub fn from_stages(n: u32) -> Self {
        assert!(n < usize::BITS, "2^n must fit in usize");
        PolarParams {
            n,
            block_len: 1usize << n,
        }
    }

    /// Construct from the block length, which must be a power of two.
    pub fn from_block_len(block_len: usize) -> Result<Self> {
        if block_len == 0 || !block_len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "block length {block_len} is not a power of two"
            )));
        }
        Ok(PolarParams {
            n: block_len.trailing_zeros(),
            block_len,
        })
    }

    /// Number of polarization stages `n = log2 N`.
    pub fn stages(&self) -> u32 {
        self.n
    }

    /// Block length `N`.
    pub fn block_len(&self) -> usize {
        self.block_len
    }
}

/// An ordered sequence of binary symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    /// Wrap a bit sequence, checking every element is 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::invalid(format!("bit value {bad} not in {{0,1}}")));
        }
        Ok(BitVector(bits))
    }

    pub fn zeros(len: usize) -> Self {
        BitVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    /// Elementwise XOR; both operands must have equal length.
    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.len() != other.len() {
            return Err(Error::invalid("xor of unequal-length bit vectors"));
        }
        Ok(BitVector(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }
}

impl std::ops::Deref for BitVector {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.0
    }
}

impl FromIterator<u8> for BitVector {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        BitVector(iter.into_iter().map(|b| b & 1).collect())
    }
}

/// Full `N×N` binary matrix equal to `F^{⊗n}` in natural row order.
///
/// Oracle-only representation; intended for `N ≤ 1024`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrixNaive {
    size: usize,
    // row-major, entries in {0,1}
    entries: Vec<u8>,
}

impl GeneratorMatrixNaive {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.size + col]
    }

    /// Multiply a row vector by this matrix over GF(2).
    pub fn mul(&self, u: &BitVector) -> Result<BitVector> {
        if u.len() != self.size {
            return Err(Error::invalid(format!(
                "vector length {} does not match matrix size {}",
                u.len(),
                self.size
            )));
        }
        let mut out = vec![0u8; self.size];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 1 {
                let row = &self.entries[i * self.size..(i + 1) * self.size];
                for (o, &r) in out.iter_mut().zip(row) {
                    *o ^= r;
                }
            }
        }
        Ok(BitVector(out))
    }
}

/// Explicit Kronecker-power construction of `G_N = F^{⊗n}`.
pub fn naive_generator(params: &PolarParams) -> GeneratorMatrixNaive {
    let mut size = 1usize;
    let mut entries = vec![1u8];
    for _ in 0..params.stages() {
        // F ⊗ G: block matrix [[G, 0], [G, G]]
        let new_size = size * 2;
        let mut next = vec![0u8; new_size * new_size];
        for i in 0..size {
            for j in 0..size {
                let e = entries[i * size + j];
                next[i * new_size + j] = e;
                next[(i + size) * new_size + j] = e;
                next[(i + size) * new_size + (j + size)] = e;
            }
        }
        size = new_size;
        entries = next;
    }
    GeneratorMatrixNaive { size, entries }
}

/// In-place butterfly computation of `x = u·G_N` over GF(2), O(N log N).
///
/// `x.len()` must be a power of two.
pub fn transform_in_place(x: &mut [u8]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let stages = n.trailing_zeros();
    for s in 0..stages {
        let half = 1usize << s;
        let step = half << 1;
        let mut base = 0;
        while base < n {
            for j in base..base + half {
                x[j] ^= x[j + half];
            }
            base += step;
        }
    }
}

/// `x = u·G_N` over GF(2).
pub fn transform(u: &BitVector, params: &PolarParams) -> Result<BitVector> {
    if u.len() != params.block_len() {
        return Err(Error::invalid(format!(
            "input length {} does not match block length {}",
            u.len(),
            params.block_len()
        )));
    }
    let mut x = u.0.clone();
    transform_in_place(&mut x);
    Ok(BitVector(x))
}

/// Encode a plain polar code: scatter info bits into the positions of the
/// information set, zeros elsewhere, then transform.
pub fn encode_polar(info: &BitVector, spec: &CodeSpec) -> Result<BitVector> {
    let u = spec.source_word(info)?;
    transform(&u, spec.params())
}

/// Encode the concatenated code: each repetition block's source bit is
/// copied to all block positions; unblocked positions of the enlarged set
/// carry one info bit each.
pub fn encode_concatenated(info: &BitVector, spec: &ConcatenatedCodeSpec) -> Result<BitVector> {
    let u = spec.source_word(info)?;
    transform(&u, spec.params())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_bits(rng: &mut impl Rng, len: usize) -> BitVector {
        (0..len).map(|_| rng.gen_range(0..=1u8)).collect()
    }

    #[test]
    fn naive_generator_small() {
        let g0 = naive_generator(&PolarParams::from_stages(0));
        assert_eq!(g0.size(), 1);
        assert_eq!(g0.entry(0, 0), 1);

        let g1 = naive_generator(&PolarParams::from_stages(1));
        let f: Vec<Vec<u8>> = vec![vec![1, 0], vec![1, 1]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g1.entry(i, j), f[i][j]);
            }
        }

        let g2 = naive_generator(&PolarParams::from_stages(2));
        let expect = [[1, 0, 0, 0], [1, 1, 0, 0], [1, 0, 1, 0], [1, 1, 1, 1]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g2.entry(i, j), expect[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn naive_generator_is_lower_triangular_unit_diagonal() {
        let params = PolarParams::from_stages(5);
        let g = naive_generator(&params);
        for i in 0..g.size() {
            assert_eq!(g.entry(i, i), 1);
            for j in i + 1..g.size() {
                assert_eq!(g.entry(i, j), 0);
            }
        }
    }

    #[test]
    fn transform_n2_by_hand() {
        let params = PolarParams::from_stages(1);
        let x = transform(&BitVector::from_bits(vec![0, 1]).unwrap(), &params).unwrap();
        assert_eq!(x.bits(), &[1, 1]);
        let x = transform(&BitVector::from_bits(vec![1, 1]).unwrap(), &params).unwrap();
        assert_eq!(x.bits(), &[0, 1]);
    }

    #[test]
    fn transform_zero_is_zero() {
        let params = PolarParams::from_stages(3);
        let x = transform(&BitVector::zeros(8), &params).unwrap();
        assert_eq!(x.bits(), &[0u8; 8]);
    }

    #[test]
    fn transform_length_mismatch_is_error() {
        let params = PolarParams::from_stages(3);
        assert!(transform(&BitVector::zeros(4), &params).is_err());
    }

    #[test]
    fn transform_matches_naive_random_n32() {
        let params = PolarParams::from_stages(5);
        let g = naive_generator(&params);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u = random_bits(&mut rng, 32);
            assert_eq!(transform(&u, &params).unwrap(), g.mul(&u).unwrap());
        }
    }

    #[test]
    fn transform_matches_naive_exhaustive_n16() {
        for n in 0..=4u32 {
            let params = PolarParams::from_stages(n);
            let g = naive_generator(&params);
            let len = params.block_len();
            for word in 0..(1usize << len) {
                let u: BitVector = (0..len).map(|b| ((word >> b) & 1) as u8).collect();
                assert_eq!(transform(&u, &params).unwrap(), g.mul(&u).unwrap());
            }
        }
    }

    #[test]
    fn transform_self_inverse_exhaustive_n8() {
        let params = PolarParams::from_stages(3);
        for word in 0..256usize {
            let u: BitVector = (0..8).map(|b| ((word >> b) & 1) as u8).collect();
            let x = transform(&u, &params).unwrap();
            assert_eq!(transform(&x, &params).unwrap(), u);
        }
    }

    #[test]
    fn transform_self_inverse_random_n1024() {
        let params = PolarParams::from_stages(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u = random_bits(&mut rng, 1024);
            let x = transform(&u, &params).unwrap();
            assert_eq!(transform(&x, &params).unwrap(), u);
        }
    }

    proptest! {
        #[test]
        fn transform_is_linear(a in proptest::collection::vec(0u8..=1, 64),
                               b in proptest::collection::vec(0u8..=1, 64)) {
            let params = PolarParams::from_stages(6);
            let a = BitVector::from_bits(a).unwrap();
            let b = BitVector::from_bits(b).unwrap();
            let lhs = transform(&a.xor(&b).unwrap(), &params).unwrap();
            let rhs = transform(&a, &params).unwrap()
                .xor(&transform(&b, &params).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
