//! Permutations of `{1..n}` and their cycle structure.
//!
//! Indices are one-based on every public method, so `Permutation::apply(1)`
//! is the image of the first basis vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A bijection of `{1..n}` with `n >= 2`, stored together with its
/// canonical cycle decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    // zero-based images
    image: Vec<usize>,
    cycles: CycleDecomposition,
}

/// Disjoint cycles of a permutation in canonical order: decreasing length,
/// ties broken by the smallest element. Every cycle starts at its smallest
/// element and then follows the permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleDecomposition {
    cycles: Vec<Vec<usize>>,
    lengths: Vec<usize>,
    length: usize,
    nontrivial_count: usize,
    involution: bool,
}

impl CycleDecomposition {
    /// Cycles as one-based index lists.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// `l(π)`, the largest cycle length.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }

    /// Number of cycles of length at least two. These come first in
    /// canonical order.
    pub fn nontrivial_count(&self) -> usize {
        self.nontrivial_count
    }

    pub fn is_involution(&self) -> bool {
        self.involution
    }

    /// Nontrivial cycles only, in canonical order.
    pub fn nontrivial(&self) -> &[Vec<usize>] {
        &self.cycles[..self.nontrivial_count]
    }

    /// Fixed points (one-based), ascending.
    pub fn fixed_points(&self) -> Vec<usize> {
        self.cycles[self.nontrivial_count..]
            .iter()
            .map(|c| c[0])
            .collect()
    }

    /// `Σ_s l_s (n - l_s) = n² - Σ_s l_s²`, the number of ordered index
    /// pairs that straddle two different cycles.
    pub fn cross_pair_count(&self) -> usize {
        let n: usize = self.lengths.iter().sum();
        n * n - self.lengths.iter().map(|l| l * l).sum::<usize>()
    }
}

impl Permutation {
    /// Builds a permutation from one-based images `π(1), …, π(n)`.
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n < 2 {
            return Err(Error::TooShort(n));
        }
        let mut seen = vec![false; n];
        let mut zero_based = Vec::with_capacity(n);
        for (pos, &v) in image.iter().enumerate() {
            if v < 1 || v > n {
                return Err(Error::OutOfRange {
                    position: pos + 1,
                    value: v as i64,
                    n,
                });
            }
            if seen[v - 1] {
                return Err(Error::Duplicate {
                    position: pos + 1,
                    value: v,
                });
            }
            seen[v - 1] = true;
            zero_based.push(v - 1);
        }
        let cycles = cycle_decomposition(&zero_based);
        Ok(Self {
            image: zero_based,
            cycles,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new((1..=n).collect())
    }

    /// The n-cycle `1 → 2 → … → n → 1`.
    pub fn cyclic_shift(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| i % n + 1).collect())
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    /// One-based image list.
    pub fn images(&self) -> Vec<usize> {
        self.image.iter().map(|v| v + 1).collect()
    }

    /// `π(i)` for one-based `i`.
    ///
    /// Panics if `i` is outside `1..=n`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] + 1
    }

    pub(crate) fn apply0(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i + 1;
        }
        Permutation::new(inv).expect("inverse of a bijection is a bijection")
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn cycles(&self) -> &CycleDecomposition {
        &self.cycles
    }

    /// `π^j(i)` for one-based `i`, walking only inside the cycle of `i`.
    pub fn power_image(&self, j: usize, i: usize) -> Result<usize> {
        let n = self.n();
        if i < 1 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        let cycle = self
            .cycles
            .cycles
            .iter()
            .find(|c| c.contains(&i))
            .expect("cycles partition 1..=n");
        let pos = cycle.iter().position(|&v| v == i).unwrap();
        Ok(cycle[(pos + j) % cycle.len()])
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images().iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_permutation(s)
    }
}

/// Parses a comma-separated one-based image list such as `"2,3,1,4"`.
/// Whitespace around tokens is ignored.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
    let n = tokens.len();
    let mut image = Vec::with_capacity(n);
    for (pos, tok) in tokens.iter().enumerate() {
        let value: i64 = tok.parse().map_err(|_| Error::NotAnInteger {
            position: pos + 1,
            token: tok.to_string(),
        })?;
        if value < 1 || value as usize > n {
            return Err(Error::OutOfRange {
                position: pos + 1,
                value,
                n,
            });
        }
        image.push(value as usize);
    }
    Permutation::new(image)
}

/// Canonical cycle decomposition of a permutation.
pub fn decompose(p: &Permutation) -> CycleDecomposition {
    p.cycles.clone()
}

fn cycle_decomposition(image: &[usize]) -> CycleDecomposition {
    let n = image.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            cycle.push(cur + 1);
            cur = image[cur];
        }
        cycles.push(cycle);
    }
    // starts are visited in increasing order, so each cycle already begins
    // at its minimum; a stable sort by length keeps the min-element tiebreak
    cycles.sort_by_key(|c| std::cmp::Reverse(c.len()));
    let lengths: Vec<usize> = cycles.iter().map(Vec::len).collect();
    let length = lengths[0];
    let nontrivial_count = lengths.iter().filter(|&&l| l >= 2).count();
    CycleDecomposition {
        cycles,
        lengths,
        length,
        nontrivial_count,
        involution: length <= 2,
    }
}
