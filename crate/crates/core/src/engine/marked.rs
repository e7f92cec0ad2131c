use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::math::raw;

/// The multiset of marked medium item sizes, kept sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedSet {
    n: usize,
    sizes: Vec<f64>,
}

impl MarkedSet {
    pub fn new(n: usize) -> Self {
        MarkedSet {
            n,
            sizes: Vec::new(),
        }
    }

    /// Builds a set from arbitrary medium sizes.
    pub fn from_sizes(n: usize, sizes: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut set = MarkedSet::new(n);
        for s in sizes {
            if !raw::is_medium(s) {
                return Err(domain("MarkedSet", s, "[phi, 1/2]"));
            }
            set.insert(s);
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Sizes in descending order.
    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub(crate) fn insert(&mut self, size: f64) {
        let at = self.sizes.partition_point(|&s| s >= size);
        self.sizes.insert(at, size);
    }

    /// `(x, |{y : y >= x}|)` for every distinct member `x`, largest first.
    fn ranks(sizes: &[f64]) -> impl Iterator<Item = (f64, usize)> + '_ {
        sizes
            .iter()
            .enumerate()
            .filter(|&(i, &x)| sizes.get(i + 1).is_none_or(|&next| next < x))
            .map(|(i, &x)| (x, i + 1))
    }

    fn dominated(n: usize, sizes: &[f64]) -> bool {
        let n = n as f64;
        Self::ranks(sizes).all(|(x, count)| count as f64 / n <= raw::marking_budget(x))
    }

    /// Whether the set, with `candidate` added if given, stays within the
    /// marking budget. Re-checks every member.
    pub fn is_dominated_with(&self, candidate: Option<f64>) -> bool {
        match candidate {
            None => Self::dominated(self.n, &self.sizes),
            Some(c) => {
                let mut sizes = self.sizes.clone();
                let at = sizes.partition_point(|&s| s >= c);
                sizes.insert(at, c);
                Self::dominated(self.n, &sizes)
            }
        }
    }

    /// Smallest member `x` on the verge of violating the budget:
    /// `|{y >= x}| / n > budget(x) - 1/n`.
    pub fn min_tight(&self) -> Option<f64> {
        let n = self.n as f64;
        Self::ranks(&self.sizes)
            .filter(|&(x, count)| count as f64 / n > raw::marking_budget(x) - 1.0 / n)
            .map(|(x, _)| x)
            .last()
    }

    /// Fraction of bins holding members of size at least `x`.
    pub fn fraction_at_least(&self, x: f64) -> f64 {
        self.sizes.partition_point(|&s| s >= x) as f64 / self.n as f64
    }
}

/// Checked form of [`MarkedSet::is_dominated_with`].
pub fn xi_dominated(marked: &MarkedSet, candidate: Option<f64>) -> Result<bool> {
    if let Some(c) = candidate {
        if !raw::is_medium(c) {
            return Err(domain("xi_dominated", c, "[phi, 1/2]"));
        }
    }
    Ok(marked.is_dominated_with(candidate))
}
