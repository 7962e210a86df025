//! Bit-indexing conventions and the fast Walsh–Hadamard transform.
//!
//! One convention is fixed here and reused by every other module: the bit
//! vector of an index `i` in dimension `d` is the `d`-digit binary expansion
//! of `i` with **bit 0 as the most significant digit**. Enumerating indices
//! `0..2^d` therefore walks the bit vectors in lexicographic order, and the
//! inner product of two bit vectors is `popcount(i & j)` no matter which end
//! the digits are read from.
//!
//! The transform computed by [`fwht`] is the unnormalized product with the
//! Sylvester-ordered Hadamard matrix `H(i, j) = (-1)^{<B(i), B(j)>}`.
//! Applying it twice multiplies the input by `2^d`; callers divide by `2^d`
//! or `4^d` themselves where a normalization is required.

use crate::error::{Error, Result};

/// Largest supported dimension for bit vectors. Keeps `2^d` sized buffers
/// within memory limits everywhere downstream.
pub const MAX_DIM: usize = 20;

/// A point of `{0,1}^d` addressed by its index in lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitVector {
    d: usize,
    index: usize,
}

impl BitVector {
    /// Bit vector of `index` in dimension `d`, digits most-significant first.
    pub fn new(index: usize, d: usize) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::Capability(format!(
                "bit-vector dimension {d} outside 1..={MAX_DIM}"
            )));
        }
        if index >= (1 << d) {
            return Err(Error::RejectedInput(format!(
                "index {index} out of range for dimension {d}"
            )));
        }
        Ok(Self { d, index })
    }

    /// All-ones vector in dimension `d`.
    pub fn ones(d: usize) -> Result<Self> {
        Self::new((1usize << d) - 1, d)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Integer encoding; inverse of [`bits`].
    pub fn index(&self) -> usize {
        self.index
    }

    /// Digit `j`, with `j = 0` the most significant.
    pub fn bit(&self, j: usize) -> u8 {
        debug_assert!(j < self.d);
        ((self.index >> (self.d - 1 - j)) & 1) as u8
    }

    /// Digits as a vector, most significant first.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.d).map(|j| self.bit(j)).collect()
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.index.count_ones() as usize
    }

    /// Coordinate-wise XOR; both operands must share a dimension.
    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        if self.d != other.d {
            return Err(Error::RejectedInput(format!(
                "XOR of bit vectors with different dimensions {} and {}",
                self.d, other.d
            )));
        }
        BitVector::new(self.index ^ other.index, self.d)
    }

    /// Inner product with another bit vector over the integers.
    pub fn dot(&self, other: &BitVector) -> usize {
        (self.index & other.index).count_ones() as usize
    }

    /// `<B(i), a>`: the sum of `a[j]` over the set digits.
    pub fn weighted_sum(&self, a: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.d);
        let mut acc = 0.0;
        for (j, &aj) in a.iter().enumerate() {
            if self.bit(j) == 1 {
                acc += aj;
            }
        }
        acc
    }
}

/// Binary representation of `i` as a `d`-digit vector, bit 0 most significant.
pub fn bits(i: usize, d: usize) -> Result<BitVector> {
    BitVector::new(i, d)
}

/// `<B(i), a>` for a raw index; shared by the spectrum routines.
pub(crate) fn subset_weight(mask: usize, a: &[f64]) -> f64 {
    let d = a.len();
    let mut acc = 0.0;
    for (j, &aj) in a.iter().enumerate() {
        if (mask >> (d - 1 - j)) & 1 == 1 {
            acc += aj;
        }
    }
    acc
}

/// Sign `(-1)^{<B(i), B(j)>}` as a float.
#[inline]
pub(crate) fn hadamard_sign(i: usize, j: usize) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// In-place unnormalized Walsh–Hadamard transform.
///
/// Butterfly over `log2(n)` levels, `O(n log n)` additions. The length must
/// be a power of two (1 is allowed and is the identity).
pub fn fwht_in_place(v: &mut [f64]) -> Result<()> {
    let n = v.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::RejectedInput(format!(
            "transform length {n} is not a power of two"
        )));
    }
    let mut h = 1;
    while h < n {
        let mut base = 0;
        while base < n {
            for i in base..base + h {
                let x = v[i];
                let y = v[i + h];
                v[i] = x + y;
                v[i + h] = x - y;
            }
            base += 2 * h;
        }
        h *= 2;
    }
    Ok(())
}

/// `H_d · v` without normalization; see [`fwht_in_place`].
pub fn fwht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    fwht_in_place(&mut out)?;
    Ok(out)
}

/// Column `k` of the `2^d × 2^d` Hadamard matrix: entry `i` is
/// `(-1)^{<B(i), B(k)>}`. Column 0 is all ones.
pub fn hadamard_column(k: usize, d: usize) -> Result<Vec<f64>> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::Capability(format!(
            "dimension {d} outside 1..={MAX_DIM}"
        )));
    }
    let n = 1usize << d;
    if k >= n {
        return Err(Error::RejectedInput(format!(
            "column {k} out of range for dimension {d}"
        )));
    }
    Ok((0..n).map(|i| hadamard_sign(i, k)).collect())
}
