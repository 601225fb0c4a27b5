//! Bijections on `{1..n}`.
//!
//! Storage is zero-based; the one-based view used by files and reports is
//! available through [`Permutation::from_one_based`] and
//! [`Permutation::to_one_based`].

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn from_zero_based(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for (i, &m) in map.iter().enumerate() {
            if m >= n {
                return Err(Error::InvalidPermutation(format!(
                    "entry {} at position {} exceeds {}",
                    m + 1,
                    i + 1,
                    n
                )));
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPermutation(format!(
                    "entry {} repeated",
                    m + 1
                )));
            }
        }
        Ok(Permutation { map })
    }

    pub fn from_one_based(map: &[usize]) -> Result<Self> {
        let mut zero = Vec::with_capacity(map.len());
        for (i, &m) in map.iter().enumerate() {
            if m == 0 {
                return Err(Error::InvalidPermutation(format!(
                    "entry 0 at position {} (entries are 1-based)",
                    i + 1
                )));
            }
            zero.push(m - 1);
        }
        Self::from_zero_based(zero)
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Zero-based image of zero-based `i`.
    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|&m| m + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Permutation { map: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Permutation {
            map: other.map.iter().map(|&j| self.map[j]).collect(),
        })
    }

    /// Same sequence read back to front: `reversed(i) = self(n - 1 - i)`.
    pub fn reversed(&self) -> Self {
        let mut map = self.map.clone();
        map.reverse();
        Permutation { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, ")")
    }
}
