//! Ordered index tuples over `{1..N}` and the Grassmann sign conventions built on them.
//!
//! A tuple is stored as a bitmask together with its ambient `N`, so elements are always
//! ascending and set operations are word operations. Signs follow the rule
//! `θ^I θ^J = σ(I,J) θ^{I∪J}` for anticommuting `θ^i`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest ambient dimension supported by the bitmask representation.
pub const MAX_N: u8 = 15;

/// A sign in `{-1, 0, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sign(i8);

impl Sign {
    pub const PLUS: Sign = Sign(1);
    pub const MINUS: Sign = Sign(-1);
    pub const ZERO: Sign = Sign(0);

    /// `(-1)^k`.
    pub fn parity(k: usize) -> Sign {
        if k.is_multiple_of(2) {
            Sign::PLUS
        } else {
            Sign::MINUS
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign(self.0 * rhs.0)
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        Sign(-self.0)
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            1 => write!(f, "+1"),
            -1 => write!(f, "-1"),
            _ => write!(f, "0"),
        }
    }
}

/// Number of pairs `(i, j)` with `i ∈ a`, `j ∈ b` and `i > j`.
///
/// This is the transposition count of moving the letters of `b` in front of those of `a`.
pub fn inversions(a: u16, b: u16) -> u32 {
    let mut count = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        // elements of a strictly above j
        let above = if j >= 15 { 0 } else { a & !((1u16 << (j + 1)) - 1) };
        count += above.count_ones();
    }
    count
}

/// `σ` on raw masks: zero on overlap, otherwise the parity of [`inversions`].
pub fn sigma_mask(a: u16, b: u16) -> Sign {
    if a & b != 0 {
        Sign::ZERO
    } else {
        Sign::parity(inversions(a, b) as usize)
    }
}

/// An ordered subset of `{1..N}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTuple {
    mask: u16,
    ambient: u8,
}

impl IndexTuple {
    /// The empty tuple in ambient dimension `n`.
    pub fn empty(n: u8) -> IndexTuple {
        assert!(n <= MAX_N, "ambient dimension {n} exceeds {MAX_N}");
        IndexTuple { mask: 0, ambient: n }
    }

    /// The full tuple `(1, …, N)`.
    pub fn full(n: u8) -> IndexTuple {
        IndexTuple { mask: full_mask(n), ambient: n }
    }

    /// The singleton `e_i`.
    pub fn single(n: u8, i: u8) -> Result<IndexTuple> {
        IndexTuple::from_sorted(n, &[i])
    }

    /// Builds a tuple from a strictly increasing list of indices.
    pub fn from_sorted(n: u8, elems: &[u8]) -> Result<IndexTuple> {
        if n > MAX_N {
            return Err(Error::invalid(format!("ambient dimension {n} exceeds {MAX_N}")));
        }
        let mut mask = 0u16;
        let mut prev = 0u8;
        for &e in elems {
            if e == 0 || e > n {
                return Err(Error::invalid(format!("index {e} outside 1..{n}")));
            }
            if e <= prev {
                return Err(Error::invalid(format!(
                    "indices must be strictly increasing, got {elems:?}"
                )));
            }
            prev = e;
            mask |= bit(e);
        }
        Ok(IndexTuple { mask, ambient: n })
    }

    /// Builds a tuple from an arbitrary list, returning the sign of the sorting permutation.
    ///
    /// Repeated indices give sign zero, matching `θ^iθ^i = 0`.
    pub fn from_unsorted(n: u8, elems: &[u8]) -> Result<(IndexTuple, Sign)> {
        let mut mask = 0u16;
        let mut sign = Sign::PLUS;
        for &e in elems {
            if e == 0 || e > n {
                return Err(Error::invalid(format!("index {e} outside 1..{n}")));
            }
            sign = sign * sigma_mask(mask, bit(e));
            mask |= bit(e);
        }
        Ok((IndexTuple { mask, ambient: n }, sign))
    }

    /// Wraps a raw mask, checking it fits in the ambient dimension.
    pub fn from_mask(n: u8, mask: u16) -> Result<IndexTuple> {
        if n > MAX_N || mask & !full_mask(n) != 0 {
            return Err(Error::invalid(format!("mask {mask:#b} does not fit in N={n}")));
        }
        Ok(IndexTuple { mask, ambient: n })
    }

    pub fn mask(self) -> u16 {
        self.mask
    }

    pub fn ambient(self) -> u8 {
        self.ambient
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, i: u8) -> bool {
        i >= 1 && i <= self.ambient && self.mask & bit(i) != 0
    }

    /// Elements in ascending order.
    pub fn elems(self) -> Vec<u8> {
        mask_elems(self.mask)
    }

    /// `(-1)^{|I|}`.
    pub fn parity_sign(self) -> Sign {
        Sign::parity(self.len())
    }

    fn check(self, other: IndexTuple) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::invalid(format!(
                "ambient mismatch: N={} vs N={}",
                self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    /// Ordered complement `N∖I`.
    pub fn complement(self) -> IndexTuple {
        IndexTuple { mask: full_mask(self.ambient) & !self.mask, ambient: self.ambient }
    }

    pub fn symmetric_difference(self, other: IndexTuple) -> Result<IndexTuple> {
        self.check(other)?;
        Ok(IndexTuple { mask: self.mask ^ other.mask, ambient: self.ambient })
    }

    pub fn union(self, other: IndexTuple) -> Result<IndexTuple> {
        self.check(other)?;
        Ok(IndexTuple { mask: self.mask | other.mask, ambient: self.ambient })
    }

    pub fn intersection(self, other: IndexTuple) -> Result<IndexTuple> {
        self.check(other)?;
        Ok(IndexTuple { mask: self.mask & other.mask, ambient: self.ambient })
    }

    pub fn difference(self, other: IndexTuple) -> Result<IndexTuple> {
        self.check(other)?;
        Ok(IndexTuple { mask: self.mask & !other.mask, ambient: self.ambient })
    }

    /// Removes `i`, failing with [`Error::NotPresent`] if it is absent.
    pub fn remove(self, i: u8) -> Result<IndexTuple> {
        if i == 0 || i > self.ambient {
            return Err(Error::invalid(format!("index {i} outside 1..{}", self.ambient)));
        }
        if !self.contains(i) {
            return Err(Error::NotPresent(i));
        }
        Ok(IndexTuple { mask: self.mask & !bit(i), ambient: self.ambient })
    }

    /// Inserts `i`, failing with [`Error::AlreadyPresent`] if it is present.
    pub fn insert(self, i: u8) -> Result<IndexTuple> {
        if i == 0 || i > self.ambient {
            return Err(Error::invalid(format!("index {i} outside 1..{}", self.ambient)));
        }
        if self.contains(i) {
            return Err(Error::AlreadyPresent(i));
        }
        Ok(IndexTuple { mask: self.mask | bit(i), ambient: self.ambient })
    }

    /// All subsets of `{1..n}` in mask order.
    pub fn all(n: u8) -> impl Iterator<Item = IndexTuple> {
        (0..=full_mask(n)).map(move |mask| IndexTuple { mask, ambient: n })
    }
}

impl fmt::Debug for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elems().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `σ(I,J)`: the sign with `θ^I θ^J = σ(I,J) θ^{I∪J}`.
pub fn sigma(i: IndexTuple, j: IndexTuple) -> Result<Sign> {
    i.check(j)?;
    Ok(sigma_mask(i.mask, j.mask))
}

/// `σ(I) := σ(I, N∖I)`.
pub fn sigma_complement(i: IndexTuple) -> Sign {
    sigma_mask(i.mask, i.complement().mask)
}

/// Mask of `{1..n}`.
pub fn full_mask(n: u8) -> u16 {
    if n == 0 {
        0
    } else {
        (((1u32 << n) - 1) as u16) << 1
    }
}

/// Bit of index `i` (indices start at 1).
pub fn bit(i: u8) -> u16 {
    1u16 << i
}

/// Ascending elements of a mask.
pub fn mask_elems(mask: u16) -> Vec<u8> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut rest = mask;
    while rest != 0 {
        let j = rest.trailing_zeros() as u8;
        rest &= rest - 1;
        out.push(j);
    }
    out
}

/// Signed left derivative `∂_{θ^i}` of the monomial `θ^mask`: `None` if `i` is absent.
pub fn left_derivative(mask: u16, i: u8) -> Option<(Sign, u16)> {
    if mask & bit(i) == 0 {
        return None;
    }
    let below = mask & (bit(i) - 1);
    Some((Sign::parity(below.count_ones() as usize), mask & !bit(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_count_matches_definition() {
        for a in 0..64u16 {
            for b in 0..64u16 {
                let (a, b) = (a << 1, b << 1);
                let mut naive = 0;
                for i in mask_elems(a) {
                    for j in mask_elems(b) {
                        if i > j {
                            naive += 1;
                        }
                    }
                }
                assert_eq!(inversions(a, b), naive);
            }
        }
    }

    #[test]
    fn left_derivative_signs() {
        // ∂_2 (θ1 θ2 θ3) = -θ1 θ3
        let m = bit(1) | bit(2) | bit(3);
        assert_eq!(left_derivative(m, 2), Some((Sign::MINUS, bit(1) | bit(3))));
        assert_eq!(left_derivative(m, 1), Some((Sign::PLUS, bit(2) | bit(3))));
        assert_eq!(left_derivative(bit(1), 2), None);
    }
}
