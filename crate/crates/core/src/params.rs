use serde::Serialize;

use crate::combinatorics::{binomial_usize, choose};
use crate::error::{Error, Result};
use crate::tradeoff::{thm1_point, RatePoint};

/// Digits are serialized one byte each.
pub const MAX_FILES: usize = 256;

/// Parameters `(N, K, r, F)` of one scheme instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SchemeParams {
    n_files: usize,
    n_users: usize,
    r: usize,
    file_len: usize,
}

impl SchemeParams {
    pub fn new(n_files: usize, n_users: usize, r: usize, file_len: usize) -> Result<Self> {
        if !(2..=MAX_FILES).contains(&n_files) {
            return Err(Error::InvalidParams(format!(
                "file count N={n_files} must lie in [2, {MAX_FILES}]"
            )));
        }
        if n_users == 0 {
            return Err(Error::InvalidParams(
                "user count K must be at least 1".into(),
            ));
        }
        let universe = n_files
            .checked_mul(n_users)
            .map(|nk| nk - n_users + 1)
            .ok_or_else(|| Error::InvalidParams("N*K overflows".into()))?;
        if r > universe {
            return Err(Error::InvalidParams(format!(
                "r={r} exceeds NK-K+1={universe}"
            )));
        }
        // every count used downstream must fit a machine word
        let counts = [
            binomial_usize(universe, r as i64),
            binomial_usize(universe, r as i64 + 1),
            binomial_usize(universe, r as i64 - 1),
        ];
        let subfiles = match counts {
            [Some(s), Some(_), Some(_)] => s,
            _ => {
                return Err(Error::InvalidParams(format!(
                    "subfile counts for NK-K+1={universe}, r={r} are too large"
                )))
            }
        };
        if file_len == 0 || !file_len.is_multiple_of(subfiles) {
            return Err(Error::InvalidParams(format!(
                "file length F={file_len} must be a positive multiple of C({universe},{r})={subfiles}"
            )));
        }
        Ok(Self {
            n_files,
            n_users,
            r,
            file_len,
        })
    }

    /// Parameters with `bits` bits per subfile.
    pub fn with_subfile_bits(
        n_files: usize,
        n_users: usize,
        r: usize,
        bits: usize,
    ) -> Result<Self> {
        if !(2..=MAX_FILES).contains(&n_files) || n_users == 0 {
            return Self::new(n_files, n_users, r, 0);
        }
        let universe = n_files * n_users - n_users + 1;
        let subfiles = binomial_usize(universe, r as i64)
            .filter(|&s| s > 0)
            .ok_or_else(|| Error::InvalidParams(format!("invalid r={r} for NK-K+1={universe}")))?;
        let f = subfiles
            .checked_mul(bits)
            .ok_or_else(|| Error::InvalidParams("file length overflows".into()))?;
        Self::new(n_files, n_users, r, f)
    }

    /// One bit per subfile.
    pub fn minimal(n_files: usize, n_users: usize, r: usize) -> Result<Self> {
        Self::with_subfile_bits(n_files, n_users, r, 1)
    }

    pub fn n_files(&self) -> usize {
        self.n_files
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn file_len(&self) -> usize {
        self.file_len
    }

    /// `K' = NK - K + 1`, the number of virtual positions.
    pub fn universe(&self) -> usize {
        self.n_files * self.n_users - self.n_users + 1
    }

    pub fn subfile_count(&self) -> usize {
        choose(self.universe(), self.r)
    }

    pub fn subfile_len(&self) -> usize {
        self.file_len / self.subfile_count()
    }

    /// Stored Y-signals per cache: `C(K', r+1) - C(K'-N, r+1)`.
    pub fn cache_signal_count(&self) -> usize {
        let u = self.universe();
        choose(u, self.r + 1) - choose(u - self.n_files, self.r + 1)
    }

    /// Segments per delivery: `N * C(K'-1, r-1)`, zero when `r = 0`.
    pub fn segment_count(&self) -> usize {
        if self.r == 0 {
            0
        } else {
            self.n_files * choose(self.universe() - 1, self.r - 1)
        }
    }

    pub fn memory_rate(&self) -> RatePoint {
        memory_rate_of(self)
    }
}

/// Exact `(M, R)` achieved by the scheme at these parameters.
pub fn memory_rate_of(params: &SchemeParams) -> RatePoint {
    thm1_point(params.n_files, params.n_users, params.r)
}
