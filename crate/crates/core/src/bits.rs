//! Bit-packed 0/1 vectors and permutations of `{0..n}`.
//!
//! Permutation convention: a [`Permutation`] stores `map[s]`, the slot in the
//! tidied frame that position `s` is moved to. [`Permutation::pullback`]
//! therefore computes `out[map[s]] = v[s]`, i.e. the inverse action
//! `σ⁻¹(v)` when `σ(v)` denotes `(v[σ(0)], …, v[σ(n-1)])`, and
//! [`Permutation::apply`] computes that forward action.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A fixed-length vector over `{0, 1}` stored 64 bits per word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.clear_tail();
        v
    }

    /// Builds a vector from `0`/`1` bytes; any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (r, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(r, true);
            }
        }
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let bits: Vec<u8> = iter.into_iter().map(u8::from).collect();
        Self::from_bits(&bits)
    }

    /// Indicator vector of `indices` within `{0..len}`.
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for r in indices {
            v.set(r, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, r: usize) -> bool {
        debug_assert!(r < self.len);
        (self.words[r / WORD] >> (r % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, value: bool) {
        assert!(r < self.len, "bit index {r} out of range {}", self.len);
        let mask = 1u64 << (r % WORD);
        if value {
            self.words[r / WORD] |= mask;
        } else {
            self.words[r / WORD] &= !mask;
        }
    }

    /// Hamming weight `|v|`.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Scalar product of two 0/1 vectors.
    pub fn dot(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len, "length mismatch in dot product");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Number of ones of `self` inside the support of `mask`.
    pub fn weight_within(&self, mask: &BitVector) -> usize {
        self.dot(mask)
    }

    pub fn complement(&self) -> BitVector {
        let mut out = BitVector {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        assert_eq!(self.len, other.len);
        BitVector {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |r| self.get(r))
    }

    /// Indices of the ones, ascending.
    pub fn ones_indices(&self) -> Vec<usize> {
        (0..self.len).filter(|&r| self.get(r)).collect()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Packs bits little-endian: bit `r` lands in byte `r / 8`, bit `r % 8`.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(nbytes);
        for b in 0..nbytes {
            let word = self.words[b / 8];
            out.push((word >> ((b % 8) * 8)) as u8);
        }
        out
    }

    pub fn from_packed_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Transmission(format!(
                "expected {} packed bytes for {len} bits, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut v = Self::zeros(len);
        for (b, &byte) in bytes.iter().enumerate() {
            v.words[b / 8] |= (byte as u64) << ((b % 8) * 8);
        }
        if v.tail_dirty() {
            return Err(Error::Transmission("nonzero padding bits".into()));
        }
        Ok(v)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn tail_mask(&self) -> u64 {
        match self.len % WORD {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    fn clear_tail(&mut self) {
        let mask = self.tail_mask();
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    fn tail_dirty(&self) -> bool {
        self.words
            .last()
            .is_some_and(|last| last & !self.tail_mask() != 0)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, ")")
    }
}

/// A bijection on `{0..n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n as u32).collect(),
        }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &t in &map {
            if t >= n || std::mem::replace(&mut seen[t], true) {
                return Err(Error::param(format!("not a permutation of 0..{n}: {map:?}")));
            }
        }
        Ok(Self {
            map: map.into_iter().map(|t| t as u32).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn image(&self, s: usize) -> usize {
        self.map[s] as usize
    }

    pub fn as_map(&self) -> Vec<usize> {
        self.map.iter().map(|&t| t as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(s, &t)| s == t as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.map.len()];
        for (s, &t) in self.map.iter().enumerate() {
            inv[t as usize] = s as u32;
        }
        Self { map: inv }
    }

    /// `(self ∘ other)(s) = self(other(s))`.
    pub fn compose(&self, other: &Permutation) -> Self {
        assert_eq!(self.len(), other.len());
        Self {
            map: other.map.iter().map(|&t| self.map[t as usize]).collect(),
        }
    }

    /// Forward action `σ(v) = (v[σ(0)], …, v[σ(n-1)])`.
    pub fn apply(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.len(), v.len());
        BitVector::from_bools(self.map.iter().map(|&t| v.get(t as usize)))
    }

    /// Inverse action `σ⁻¹(v)`: entry `s` of `v` moves to slot `σ(s)`.
    pub fn pullback(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.len(), v.len());
        let mut out = BitVector::zeros(v.len());
        for (s, &t) in self.map.iter().enumerate() {
            if v.get(s) {
                out.set(t as usize, true);
            }
        }
        out
    }

    /// Indicator of the positions sent into the first half `{0..n/2}` of the
    /// tidied frame. This is the n-bit form in which a permutation is
    /// published.
    pub fn half_set(&self) -> BitVector {
        let half = self.map.len() / 2;
        BitVector::from_bools(self.map.iter().map(|&t| (t as usize) < half))
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Permutation").field(&self.map).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weight_dot_and_complement() {
        let a = BitVector::from_bits(&[1, 0, 1, 1, 0]);
        let b = BitVector::from_bits(&[1, 1, 0, 1, 0]);
        assert_eq!(a.weight(), 3);
        assert_eq!(a.dot(&b), 2);
        assert_eq!(a.complement().to_bits(), vec![0, 1, 0, 0, 1]);
        assert_eq!(BitVector::ones(70).weight(), 70);
        assert_eq!(BitVector::ones(70).complement().weight(), 0);
    }

    #[test]
    fn packed_bytes_reject_dirty_padding() {
        assert!(BitVector::from_packed_bytes(3, &[0b0000_1000]).is_err());
        let v = BitVector::from_packed_bytes(3, &[0b0000_0101]).unwrap();
        assert_eq!(v.to_bits(), vec![1, 0, 1]);
    }

    #[test]
    fn from_map_rejects_non_bijection() {
        assert!(Permutation::from_map(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_map(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_map(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn half_set_of_identity_is_first_half() {
        let h = Permutation::identity(6).half_set();
        assert_eq!(h.to_bits(), vec![1, 1, 1, 0, 0, 0]);
    }

    fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|m| Permutation::from_map(m).unwrap())
    }

    proptest! {
        #[test]
        fn pullback_inverts_apply(
            (p, bits) in (1usize..80).prop_flat_map(|n| (perm_strategy(n), proptest::collection::vec(0u8..2, n)))
        ) {
            let v = BitVector::from_bits(&bits);
            prop_assert_eq!(p.pullback(&p.apply(&v)), v.clone());
            prop_assert_eq!(p.inverse().apply(&v), p.pullback(&v));
            prop_assert_eq!(p.compose(&p.inverse()), Permutation::identity(p.len()));
        }

        #[test]
        fn packing_roundtrip(bits in proptest::collection::vec(0u8..2, 0..200)) {
            let v = BitVector::from_bits(&bits);
            let back = BitVector::from_packed_bytes(v.len(), &v.to_packed_bytes()).unwrap();
            prop_assert_eq!(back, v);
        }
    }
}
