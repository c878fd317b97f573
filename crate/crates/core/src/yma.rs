//! Virtual-user demand vectors and the YMA delivery signals that make up each
//! cache.
//!
//! For user `k` holding key `s`, the demand vector `u^(k,s)` assigns a file to
//! each of the `K' = NK - K + 1` virtual positions. The cache stores the YMA
//! signals `Y_B = XOR_{i in B} W_{u_i, B \ {i}}` for every `(r+1)`-set `B` that
//! meets the leader positions `[0, N)`. Every other `Y_B` is a fixed XOR of
//! stored ones (see [`reconstruct_y`]).

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::combinatorics::{enumerate_r_subsets, SubsetIndex};
use crate::error::{Error, Result};
use crate::library::FileLibrary;

/// Stored Y-signal payloads keyed by the colex rank of their index set.
pub type SignalMap = BTreeMap<usize, BitString>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UVector {
    entries: Vec<usize>,
    n_files: usize,
}

impl UVector {
    /// Wraps raw entries; the first `n_files` entries must be a permutation
    /// of the file indices (one leader per file).
    pub fn from_entries(entries: Vec<usize>, n_files: usize) -> Result<Self> {
        if entries.len() < n_files {
            return Err(Error::InvalidDemand(format!(
                "u-vector {entries:?} shorter than the {n_files} leader positions"
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e >= n_files) {
            return Err(Error::InvalidDemand(format!(
                "entry {bad} is not a file index"
            )));
        }
        let mut seen = vec![false; n_files];
        for &e in &entries[..n_files] {
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::InvalidDemand(format!(
                    "leader positions of {entries:?} repeat file {e}"
                )));
            }
        }
        Ok(Self { entries, n_files })
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn get(&self, i: usize) -> usize {
        self.entries[i]
    }

    /// The leader position demanding file `value`.
    pub fn leader_of(&self, value: usize) -> usize {
        self.entries[..self.n_files]
            .iter()
            .position(|&e| e == value)
            .expect("leaders cover every file")
    }
}

fn check_user_key(n_files: usize, n_users: usize, user: usize, key: usize) -> Result<()> {
    if n_files < 2 || n_users == 0 {
        return Err(Error::InvalidParams(format!(
            "need N >= 2 and K >= 1, got N={n_files}, K={n_users}"
        )));
    }
    if user >= n_users {
        return Err(Error::InvalidParams(format!("user {user} >= K={n_users}")));
    }
    if key >= n_files {
        return Err(Error::InvalidParams(format!("key {key} >= N={n_files}")));
    }
    Ok(())
}

/// Closed-form demand vector of virtual users for `(user, key)`.
pub fn build_u_vector(n_files: usize, n_users: usize, user: usize, key: usize) -> Result<UVector> {
    check_user_key(n_files, n_users, user, key)?;
    let n = n_files;
    let universe = n * n_users - n_users + 1;
    let boundary = (n_users - user) * (n - 1);
    let entries = (0..universe)
        .map(|i| {
            let offset = if i < n {
                i
            } else if i <= boundary {
                (i - 1) % (n - 1)
            } else {
                (i - 1) % (n - 1) + 1
            };
            (key + offset) % n
        })
        .collect();
    Ok(UVector {
        entries,
        n_files: n,
    })
}

/// Two-step construction: expand the per-user vector
/// `(s * 1_{K-k}, (s+1) * 1_k)` block by block, the first block into all `N`
/// shifts and the others into `N - 1` shifts.
pub fn build_u_vector_two_step(
    n_files: usize,
    n_users: usize,
    user: usize,
    key: usize,
) -> Result<UVector> {
    check_user_key(n_files, n_users, user, key)?;
    let n = n_files;
    let intermediate: Vec<usize> = (0..n_users)
        .map(|j| {
            if j < n_users - user {
                key
            } else {
                (key + 1) % n
            }
        })
        .collect();
    let mut entries = Vec::with_capacity(n * n_users - n_users + 1);
    for (j, &base) in intermediate.iter().enumerate() {
        let width = if j == 0 { n } else { n - 1 };
        entries.extend((0..width).map(|o| (base + o) % n));
    }
    Ok(UVector {
        entries,
        n_files: n,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YSignal {
    pub index: SubsetIndex,
    pub payload: BitString,
}

/// `Y_B = XOR_{i in B} W_{u_i, B \ {i}}`.
pub fn compute_y(files: &FileLibrary, u: &UVector, r_plus: &SubsetIndex) -> Result<BitString> {
    let params = files.params();
    if r_plus.len() != params.r() + 1 {
        return Err(Error::LengthMismatch {
            expected: params.r() + 1,
            actual: r_plus.len(),
        });
    }
    if u.len() != params.universe() || r_plus.universe_size() != params.universe() {
        return Err(Error::LengthMismatch {
            expected: params.universe(),
            actual: u.len(),
        });
    }
    let mut acc = BitString::zeros(params.subfile_len());
    for &i in r_plus.members() {
        acc ^= &files.subfile(u.get(i), &r_plus.without(i));
    }
    Ok(acc)
}

/// Whether `set` meets the leader positions `[0, n_files)`.
pub fn meets_leaders(set: &SubsetIndex, n_files: usize) -> bool {
    set.members().first().is_some_and(|&m| m < n_files)
}

/// The YMA delivery under demand `u`, restricted to leader-meeting index sets,
/// in colex order of the index set.
pub fn yma_delivery(files: &FileLibrary, u: &UVector) -> Result<Vec<YSignal>> {
    let params = files.params();
    enumerate_r_subsets(params.universe(), params.r() + 1)
        .into_iter()
        .filter(|b| meets_leaders(b, params.n_files()))
        .map(|index| {
            let payload = compute_y(files, u, &index)?;
            Ok(YSignal { index, payload })
        })
        .collect()
}

/// Recovers `Y_B` from the stored leader-meeting signals.
///
/// For `B` disjoint from the leaders,
/// `Y_B = XOR_F Y_{(B \ F) ∪ leaders(F)}` over nonempty `F ⊆ B` whose members
/// demand pairwise distinct files, `leaders(F)` being the leader positions of
/// those files. Every right-hand index set meets the leaders.
pub fn reconstruct_y(stored: &SignalMap, u: &UVector, r_plus: &SubsetIndex) -> Result<BitString> {
    let lookup = |set: &SubsetIndex| {
        stored
            .get(&set.rank())
            .cloned()
            .ok_or_else(|| Error::MissingSignal(format!("Y{set} is not stored")))
    };
    let n = u.n_files();
    if meets_leaders(r_plus, n) {
        return lookup(r_plus);
    }
    if r_plus.members().iter().any(|&i| i >= u.len()) {
        return Err(Error::InvalidSubset(format!(
            "{r_plus} outside the u-vector"
        )));
    }
    let mut leaders = vec![None; n];
    for (pos, &v) in u.entries()[..n].iter().enumerate() {
        leaders[v] = Some(pos);
    }
    // positions of B grouped by the file they demand
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &i in r_plus.members() {
        let v = u.get(i);
        let leader = leaders[v]
            .ok_or_else(|| Error::InvalidDemand(format!("no leader demands file {v}")))?;
        match groups.iter_mut().find(|(l, _)| *l == leader) {
            Some((_, members)) => members.push(i),
            None => groups.push((leader, vec![i])),
        }
    }

    let mut acc: Option<BitString> = None;
    // choice[g] = 0 means group g contributes nothing, c > 0 picks members[c-1]
    let mut choice = vec![0usize; groups.len()];
    loop {
        let mut g = 0;
        while g < groups.len() {
            choice[g] += 1;
            if choice[g] <= groups[g].1.len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
        if g == groups.len() {
            break;
        }
        let mut set = r_plus.clone();
        for (c, (leader, members)) in choice.iter().zip(&groups) {
            if *c > 0 {
                set = set.without(members[c - 1]).with(*leader);
            }
        }
        let y = lookup(&set)?;
        match acc.as_mut() {
            Some(a) => *a ^= &y,
            None => acc = Some(y),
        }
    }
    acc.ok_or_else(|| Error::MissingSignal(format!("no terms for Y{r_plus}")))
}
