//! Auxiliary demands, their three-way classification, the label maps `f`/`g`
//! on the base class, and the V-sets that drive delivery and decoding.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum DemandClass {
    /// `(N-1) 1_K` or `(a 1_{K-k}, (a+1) 1_k)` with `a <= N-2`.
    D0,
    /// `a e_k` with `a >= 1`, not already in `D0`.
    D1,
    D2,
}

/// Key-masked demand `d_k = D_k - S_k (mod N)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AuxDemand {
    digits: Vec<usize>,
    n_files: usize,
    class: DemandClass,
}

impl AuxDemand {
    pub fn new(digits: Vec<usize>, n_files: usize) -> Result<Self> {
        if n_files < 2 {
            return Err(Error::InvalidParams(format!(
                "N={n_files} must be at least 2"
            )));
        }
        if digits.is_empty() {
            return Err(Error::InvalidDemand("demand vector is empty".into()));
        }
        if let Some(bad) = digits.iter().find(|&&d| d >= n_files) {
            return Err(Error::InvalidDemand(format!(
                "digit {bad} out of range for N={n_files}"
            )));
        }
        let class = classify(&digits, n_files);
        Ok(Self {
            digits,
            n_files,
            class,
        })
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn n_users(&self) -> usize {
        self.digits.len()
    }

    pub fn class(&self) -> DemandClass {
        self.class
    }

    pub fn universe(&self) -> usize {
        self.n_files * self.n_users() - self.n_users() + 1
    }
}

impl fmt::Debug for AuxDemand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}:{:?}", self.class)
    }
}

impl fmt::Display for AuxDemand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_digits(&self.digits, f)
    }
}

pub(crate) fn fmt_digits(digits: &[usize], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("(")?;
    for (i, d) in digits.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{d}")?;
    }
    f.write_str(")")
}

pub(crate) fn digits_label(digits: &[usize]) -> String {
    struct D<'a>(&'a [usize]);
    impl fmt::Display for D<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_digits(self.0, f)
        }
    }
    D(digits).to_string()
}

/// `(a, k)` when `digits = (a 1_{K-k}, (a+1) 1_k)` with `k < K`, `a <= N-2`,
/// or `(N-1, 0)` for the all-`(N-1)` vector.
fn base_form(digits: &[usize], n_files: usize) -> Option<(usize, usize)> {
    let a = digits[0];
    if a == n_files - 1 {
        return digits.iter().all(|&d| d == a).then_some((a, 0));
    }
    let prefix = digits.iter().take_while(|&&d| d == a).count();
    digits[prefix..]
        .iter()
        .all(|&d| d == a + 1)
        .then_some((a, digits.len() - prefix))
}

fn classify(digits: &[usize], n_files: usize) -> DemandClass {
    if base_form(digits, n_files).is_some() {
        DemandClass::D0
    } else if digits.iter().filter(|&&d| d != 0).count() == 1 {
        DemandClass::D1
    } else {
        DemandClass::D2
    }
}

/// `d_k = D_k - S_k (mod N)`, classified.
pub fn aux_demand(demands: &[usize], keys: &[usize], n_files: usize) -> Result<AuxDemand> {
    if demands.len() != keys.len() {
        return Err(Error::LengthMismatch {
            expected: demands.len(),
            actual: keys.len(),
        });
    }
    if let Some(bad) = demands.iter().chain(keys).find(|&&x| x >= n_files) {
        return Err(Error::InvalidDemand(format!(
            "value {bad} out of range for N={n_files}"
        )));
    }
    let digits = demands
        .iter()
        .zip(keys)
        .map(|(&dk, &sk)| (dk + n_files - sk) % n_files)
        .collect();
    AuxDemand::new(digits, n_files)
}

/// Label of a base-class demand: `f(a 1_K) = a`,
/// `f((a 1_{K-k}, (a+1) 1_k)) = (N-1) k + a + 1`.
pub fn f_map(d: &AuxDemand) -> Result<usize> {
    let (a, k) = base_form(&d.digits, d.n_files)
        .ok_or_else(|| Error::InvalidDemand(format!("{d} is not in the base class")))?;
    Ok(if k == 0 {
        a
    } else {
        (d.n_files - 1) * k + a + 1
    })
}

/// Inverse of [`f_map`] for `K` users.
pub fn g_map(label: usize, n_files: usize, n_users: usize) -> Result<AuxDemand> {
    let universe = n_files * n_users - n_users + 1;
    if label >= universe {
        return Err(Error::LabelOutOfRange { label, universe });
    }
    let digits = if label < n_files {
        vec![label; n_users]
    } else {
        let k = (label - 1) / (n_files - 1);
        let a = (label - 1) % (n_files - 1);
        let mut v = vec![a; n_users - k];
        v.extend(std::iter::repeat_n(a + 1, k));
        v
    };
    AuxDemand::new(digits, n_files)
}

/// `g(t)` for every label, as plain digit vectors.
pub fn g_table(n_files: usize, n_users: usize) -> Vec<Vec<usize>> {
    let universe = n_files * n_users - n_users + 1;
    (0..universe)
        .map(|t| g_map(t, n_files, n_users).expect("label in range").digits)
        .collect()
}

/// Indicator vector over the `K'` positions, with its set form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VVector {
    bits: Vec<bool>,
}

impl VVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn unit(len: usize, j: usize) -> Self {
        let mut bits = vec![false; len];
        bits[j] = true;
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.bits.get(j).copied().unwrap_or(false)
    }

    /// `{ j : bit j = 1 }` in increasing order.
    pub fn set_form(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&j| self.bits[j]).collect()
    }

    pub fn size(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    fn flip(&mut self, j: usize) {
        self.bits[j] ^= true;
    }
}

impl fmt::Debug for VVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{:?}", self.set_form())
    }
}

/// V-vector of the single-user demand `a e_k` (with `a = 0` giving `e_0`).
fn single_user_v(n_files: usize, n_users: usize, user: usize, a: usize) -> VVector {
    let n = n_files;
    let k_users = n_users;
    let mut v = VVector::unit(n * k_users - k_users + 1, 0);
    for b in 1..=a {
        let (x, y) = if user == 0 {
            (b, (n - 1) * (k_users - 1) + b)
        } else if user + 1 < k_users {
            (
                (n - 1) * (k_users - user) + b,
                (n - 1) * (k_users - user - 1) + b,
            )
        } else {
            ((n - 1) + b, b - 1)
        };
        v.flip(x);
        v.flip(y);
    }
    v
}

/// V-vector of an auxiliary demand.
///
/// Single-user demands use the three-branch closed form; everything else is
/// `e_0 XOR (XOR_i (V_{d_i e_i} XOR e_0))`. With one user every demand is in
/// the base class and the vector is `e_{f(d)}` directly.
pub fn build_v(d: &AuxDemand) -> VVector {
    let (n, k_users) = (d.n_files, d.n_users());
    if k_users == 1 {
        return VVector::unit(n, d.digits[0]);
    }
    let mut v = VVector::unit(d.universe(), 0);
    for (i, &di) in d.digits.iter().enumerate() {
        let single = single_user_v(n, k_users, i, di);
        for (j, &bit) in single.bits.iter().enumerate() {
            if bit != (j == 0) {
                v.flip(j);
            }
        }
    }
    v
}

/// Every demand vector in `[0, N)^K`, in base-`N` counting order with the
/// first digit most significant.
pub fn all_demand_vectors(n_files: usize, n_users: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n_files.pow(n_users as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0; n_users];
        for slot in v.iter_mut().rev() {
            *slot = idx % n_files;
            idx /= n_files;
        }
        v
    })
}
