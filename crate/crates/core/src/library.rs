//! The server's file library and its subfile layout.
//!
//! Subfile `W_{n,R}` is the `rank(R)`-th block of `F / C(K', r)` bits of file
//! `n`, with `rank` the colex rank of the `r`-subset `R`.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::combinatorics::{subset_unrank, SubsetIndex};
use crate::error::{Error, Result};
use crate::params::SchemeParams;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileLibrary {
    params: SchemeParams,
    files: Vec<BitString>,
}

/// Sidecar metadata for a raw library file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryMeta {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "F")]
    pub f: usize,
}

impl FileLibrary {
    pub fn new(params: SchemeParams, files: Vec<BitString>) -> Result<Self> {
        if files.len() != params.n_files() {
            return Err(Error::LengthMismatch {
                expected: params.n_files(),
                actual: files.len(),
            });
        }
        if let Some(bad) = files.iter().find(|f| f.len() != params.file_len()) {
            return Err(Error::LengthMismatch {
                expected: params.file_len(),
                actual: bad.len(),
            });
        }
        Ok(Self { params, files })
    }

    pub fn zeros(params: SchemeParams) -> Self {
        Self {
            params,
            files: vec![BitString::zeros(params.file_len()); params.n_files()],
        }
    }

    pub fn random<R: Rng + ?Sized>(params: SchemeParams, rng: &mut R) -> Self {
        Self {
            params,
            files: (0..params.n_files())
                .map(|_| BitString::random(params.file_len(), rng))
                .collect(),
        }
    }

    /// Library in which every subfile is a distinct unit vector, so any XOR of
    /// subfiles can be read back as the set of its terms with [`Self::terms`].
    ///
    /// Requires `N * C(K', r)` bits per subfile.
    pub fn indicator(params: SchemeParams) -> Result<Self> {
        let count = params.subfile_count();
        let width = params.n_files() * count;
        if params.subfile_len() != width {
            return Err(Error::InvalidParams(format!(
                "indicator library needs {width} bits per subfile, got {}",
                params.subfile_len()
            )));
        }
        let files = (0..params.n_files())
            .map(|n| {
                let mut f = BitString::zeros(params.file_len());
                for rank in 0..count {
                    f.set(rank * width + n * count + rank, true);
                }
                f
            })
            .collect();
        Ok(Self { params, files })
    }

    /// Parameters with the subfile width [`Self::indicator`] needs.
    pub fn indicator_params(n_files: usize, n_users: usize, r: usize) -> Result<SchemeParams> {
        let probe = SchemeParams::minimal(n_files, n_users, r)?;
        SchemeParams::with_subfile_bits(n_files, n_users, r, n_files * probe.subfile_count())
    }

    /// Reads an XOR of indicator-library subfiles back into `(n, R)` terms.
    pub fn terms(&self, payload: &BitString) -> Vec<(usize, SubsetIndex)> {
        let count = self.params.subfile_count();
        payload
            .ones()
            .into_iter()
            .map(|bit| {
                let rank = bit % count;
                let n = bit / count;
                let set = subset_unrank(rank, self.params.r(), self.params.universe())
                    .expect("rank within subfile count");
                (n, set)
            })
            .collect()
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn file(&self, n: usize) -> &BitString {
        &self.files[n]
    }

    pub fn files(&self) -> &[BitString] {
        &self.files
    }

    pub fn subfile_by_rank(&self, n: usize, rank: usize) -> BitString {
        let len = self.params.subfile_len();
        self.files[n].slice(rank * len, len)
    }

    pub fn subfile(&self, n: usize, set: &SubsetIndex) -> BitString {
        debug_assert_eq!(set.len(), self.params.r());
        self.subfile_by_rank(n, set.rank())
    }

    /// Concatenated files, packed LSB-first and zero padded to a byte.
    pub fn to_raw_bytes(&self) -> Vec<u8> {
        BitString::concat(&self.files).to_bytes()
    }

    pub fn from_raw_bytes(params: SchemeParams, bytes: &[u8]) -> Result<Self> {
        let total = params.n_files() * params.file_len();
        let all = BitString::from_bytes(bytes, total)?;
        let files = (0..params.n_files())
            .map(|n| all.slice(n * params.file_len(), params.file_len()))
            .collect();
        Self::new(params, files)
    }

    /// Writes `path` and its `<path>.json` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_raw_bytes())?;
        let meta = LibraryMeta {
            n: self.params.n_files(),
            f: self.params.file_len(),
        };
        let json = serde_json::to_string(&meta).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(sidecar_path(path), json)?;
        Ok(())
    }

    /// Loads a raw library; its sidecar must agree with `params`.
    pub fn load(params: SchemeParams, path: &Path) -> Result<Self> {
        let meta_text = std::fs::read_to_string(sidecar_path(path))?;
        let meta: LibraryMeta =
            serde_json::from_str(&meta_text).map_err(|e| Error::Parse(e.to_string()))?;
        if meta.n != params.n_files() || meta.f != params.file_len() {
            return Err(Error::InvalidParams(format!(
                "library sidecar has N={}, F={} but the run uses N={}, F={}",
                meta.n,
                meta.f,
                params.n_files(),
                params.file_len()
            )));
        }
        Self::from_raw_bytes(params, &std::fs::read(path)?)
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}
