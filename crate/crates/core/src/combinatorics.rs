//! Binomial coefficients and colexicographic ranking of fixed-size subsets.
//!
//! Colex order compares subsets by their largest differing element, so the
//! rank of `{c_0 < c_1 < ... < c_{m-1}}` is `sum_i C(c_i, i + 1)` and does not
//! depend on the universe size.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact binomial coefficient; zero when `k < 0` or `k > n`.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Machine-width binomial for sizes already validated to fit.
///
/// Panics on overflow; parameter validation guarantees callers never hit it.
pub fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

pub(crate) fn binomial_usize(n: usize, k: i64) -> Option<usize> {
    binomial(n as u64, k).to_usize()
}

/// A strictly increasing set of positions drawn from `[0, universe_size)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetIndex {
    members: Vec<usize>,
    universe_size: usize,
}

impl SubsetIndex {
    pub fn new(members: Vec<usize>, universe_size: usize) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::InvalidSubset(
                "universe size must be positive".into(),
            ));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!(
                "members {members:?} are not strictly increasing"
            )));
        }
        if let Some(&last) = members.last() {
            if last >= universe_size {
                return Err(Error::InvalidSubset(format!(
                    "member {last} outside universe of size {universe_size}"
                )));
            }
        }
        Ok(Self {
            members,
            universe_size,
        })
    }

    /// Sorts `members` first; duplicates are rejected.
    pub fn from_unsorted<I: IntoIterator<Item = usize>>(
        members: I,
        universe_size: usize,
    ) -> Result<Self> {
        let mut m: Vec<usize> = members.into_iter().collect();
        m.sort_unstable();
        Self::new(m, universe_size)
    }

    pub fn empty(universe_size: usize) -> Self {
        Self {
            members: Vec::new(),
            universe_size,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    /// `self ∪ {x}`; `x` must not already be a member.
    pub fn with(&self, x: usize) -> Self {
        debug_assert!(x < self.universe_size);
        let pos = self
            .members
            .binary_search(&x)
            .expect_err("element already present");
        let mut members = self.members.clone();
        members.insert(pos, x);
        Self {
            members,
            universe_size: self.universe_size,
        }
    }

    /// `self ∖ {x}`; `x` must be a member.
    pub fn without(&self, x: usize) -> Self {
        let pos = self.members.binary_search(&x).expect("element not present");
        let mut members = self.members.clone();
        members.remove(pos);
        Self {
            members,
            universe_size: self.universe_size,
        }
    }

    pub fn rank(&self) -> usize {
        subset_rank(self)
    }
}

impl fmt::Debug for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

pub fn subset_rank(s: &SubsetIndex) -> usize {
    s.members
        .iter()
        .enumerate()
        .map(|(i, &c)| choose(c, i + 1))
        .sum()
}

pub fn subset_unrank(rank: usize, size: usize, universe_size: usize) -> Result<SubsetIndex> {
    let out_of_range = Error::RankOutOfRange {
        rank,
        size,
        universe: universe_size,
    };
    if universe_size == 0 {
        return Err(Error::InvalidSubset(
            "universe size must be positive".into(),
        ));
    }
    match binomial_usize(universe_size, size as i64) {
        Some(total) if rank < total => {}
        _ => return Err(out_of_range),
    }
    let mut members = vec![0; size];
    let mut rest = rank;
    let mut c = universe_size;
    for i in (1..=size).rev() {
        // largest c with C(c, i) <= rest
        c -= 1;
        while choose(c, i) > rest {
            c -= 1;
        }
        members[i - 1] = c;
        rest -= choose(c, i);
    }
    Ok(SubsetIndex {
        members,
        universe_size,
    })
}

/// All `r`-subsets of `[0, universe_size)` in colex order.
pub fn enumerate_r_subsets(universe_size: usize, r: usize) -> Vec<SubsetIndex> {
    if r > universe_size {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(choose(universe_size, r));
    let mut current: Vec<usize> = (0..r).collect();
    loop {
        out.push(SubsetIndex {
            members: current.clone(),
            universe_size,
        });
        // colex successor: bump the first element that can move up
        let mut i = 0;
        while i < r {
            let limit = if i + 1 < r {
                current[i + 1]
            } else {
                universe_size
            };
            if current[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == r {
            break;
        }
        current[i] += 1;
        for (j, slot) in current.iter_mut().enumerate().take(i) {
            *slot = j;
        }
    }
    out
}
