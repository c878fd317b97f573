use crate::bits::BitString;
use crate::combinatorics::{enumerate_r_subsets, SubsetIndex};
use crate::error::{Error, Result};
use crate::library::FileLibrary;
use crate::params::SchemeParams;
use crate::scheme::SessionRandomness;
use crate::yma::{build_u_vector, meets_leaders, reconstruct_y, yma_delivery, SignalMap, UVector};

/// What user `k` stores: its key digit and the leader-meeting Y-signals of
/// its virtual demand vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheContent {
    params: SchemeParams,
    user: usize,
    key: usize,
    signals: SignalMap,
}

impl CacheContent {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn key(&self) -> usize {
        self.key
    }

    pub fn signals(&self) -> &SignalMap {
        &self.signals
    }

    pub fn u_vector(&self) -> UVector {
        build_u_vector(
            self.params.n_files(),
            self.params.n_users(),
            self.user,
            self.key,
        )
        .expect("validated at placement")
    }

    /// `Y_B`, read from the cache or reconstructed when `B` avoids the leaders.
    pub fn y(&self, u: &UVector, b: &SubsetIndex) -> Result<BitString> {
        reconstruct_y(&self.signals, u, b)
    }

    /// Stored Y-signals concatenated in colex order of their index sets.
    pub fn payload_bits(&self) -> BitString {
        BitString::concat(self.signals.values())
    }

    /// `[key: u8][payload bit length: u64 LE][payload, LSB-first, zero padded]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload_bits();
        let mut out = Vec::with_capacity(9 + payload.len().div_ceil(8));
        out.push(self.key as u8);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload.to_bytes());
        out
    }

    pub fn from_bytes(params: SchemeParams, user: usize, bytes: &[u8]) -> Result<Self> {
        if user >= params.n_users() {
            return Err(Error::InvalidParams(format!("user {user} out of range")));
        }
        if bytes.len() < 9 {
            return Err(Error::Parse("cache record shorter than its header".into()));
        }
        let key = bytes[0] as usize;
        if key >= params.n_files() {
            return Err(Error::Parse(format!("cache key {key} out of range")));
        }
        let bit_len = u64::from_le_bytes(bytes[1..9].try_into().expect("8 bytes")) as usize;
        let width = params.subfile_len();
        let indices: Vec<SubsetIndex> = enumerate_r_subsets(params.universe(), params.r() + 1)
            .into_iter()
            .filter(|b| meets_leaders(b, params.n_files()))
            .collect();
        if bit_len != indices.len() * width {
            return Err(Error::LengthMismatch {
                expected: indices.len() * width,
                actual: bit_len,
            });
        }
        let payload = BitString::from_bytes(&bytes[9..], bit_len)?;
        let signals = indices
            .iter()
            .enumerate()
            .map(|(i, b)| (b.rank(), payload.slice(i * width, width)))
            .collect();
        Ok(Self {
            params,
            user,
            key,
            signals,
        })
    }
}

/// Cache of one user holding key `key`.
pub fn place_user(files: &FileLibrary, user: usize, key: usize) -> Result<CacheContent> {
    let params = *files.params();
    let u = build_u_vector(params.n_files(), params.n_users(), user, key)?;
    let signals = yma_delivery(files, &u)?
        .into_iter()
        .map(|y| (y.index.rank(), y.payload))
        .collect();
    Ok(CacheContent {
        params,
        user,
        key,
        signals,
    })
}

/// Caches for all users under the session keys.
pub fn place(files: &FileLibrary, rand: &SessionRandomness) -> Result<Vec<CacheContent>> {
    let params = files.params();
    if rand.keys().len() != params.n_users() {
        return Err(Error::LengthMismatch {
            expected: params.n_users(),
            actual: rand.keys().len(),
        });
    }
    (0..params.n_users())
        .map(|k| place_user(files, k, rand.key(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tradeoff::rational;
    use crate::yma::compute_y;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(m: &[usize], n: usize) -> SubsetIndex {
        SubsetIndex::new(m.to_vec(), n).unwrap()
    }

    #[test]
    fn worked_example_cache() {
        let p = FileLibrary::indicator_params(2, 3, 2).unwrap();
        let lib = FileLibrary::indicator(p).unwrap();
        let rand = SessionRandomness::with_keys(&p, vec![1, 0, 0], 0).unwrap();
        let caches = place(&lib, &rand).unwrap();
        let z = &caches[1];
        assert_eq!(z.key(), 0);
        let u = build_u_vector(2, 3, 1, 0).unwrap();
        let want: Vec<usize> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
            .iter()
            .map(|m| set(m, 4).rank())
            .collect();
        assert_eq!(z.signals().keys().copied().collect::<Vec<_>>(), want);
        for (&rank, payload) in z.signals() {
            let b = crate::combinatorics::subset_unrank(rank, 3, 4).unwrap();
            assert_eq!(payload, &compute_y(&lib, &u, &b).unwrap());
        }
        // Y_{0,1,3} = W_{0,{1,3}} + W_{1,{0,3}} + W_{1,{0,1}}
        let y013 = &z.signals()[&set(&[0, 1, 3], 4).rank()];
        let mut terms = lib.terms(y013);
        terms.sort_by_key(|(n, s)| (*n, s.rank()));
        assert_eq!(
            terms,
            vec![
                (0, set(&[1, 3], 4)),
                (1, set(&[0, 1], 4)),
                (1, set(&[0, 3], 4))
            ]
        );
    }

    #[test]
    fn r_zero_stores_every_file() {
        let p = SchemeParams::with_subfile_bits(3, 2, 0, 5).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(2));
        let z = place_user(&lib, 1, 2).unwrap();
        assert_eq!(z.signals().len(), 3);
        let mut stored: Vec<_> = z.signals().values().cloned().collect();
        stored.sort_by_key(|b| b.to_string());
        let mut files = lib.files().to_vec();
        files.sort_by_key(|b| b.to_string());
        assert_eq!(stored, files);
    }

    #[test]
    fn r_full_stores_only_the_key() {
        let p = SchemeParams::with_subfile_bits(2, 3, 4, 3).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(2));
        let z = place_user(&lib, 0, 1).unwrap();
        assert!(z.signals().is_empty());
        assert_eq!(z.payload_bits().len(), 0);
        assert_eq!(z.to_bytes().len(), 9);
    }

    #[test]
    fn payload_size_is_m_times_f() {
        for (n, k) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            let universe = n * k - k + 1;
            for r in 0..=universe {
                let p = SchemeParams::with_subfile_bits(n, k, r, 2).unwrap();
                let z = place_user(&FileLibrary::zeros(p), 0, 0).unwrap();
                assert_eq!(z.signals().len(), p.cache_signal_count());
                let bits = rational(z.payload_bits().len() as i64, 1);
                let f = rational(p.file_len() as i64, 1);
                assert_eq!(bits, p.memory_rate().m * f, "N={n} K={k} r={r}");
            }
        }
    }

    #[test]
    fn bytes_round_trip() {
        let p = SchemeParams::with_subfile_bits(3, 2, 2, 3).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(8));
        let z = place_user(&lib, 1, 2).unwrap();
        let back = CacheContent::from_bytes(p, 1, &z.to_bytes()).unwrap();
        assert_eq!(back, z);
        let mut bad = z.to_bytes();
        bad[0] = 7;
        assert!(CacheContent::from_bytes(p, 1, &bad).is_err());
        assert!(CacheContent::from_bytes(p, 1, &z.to_bytes()[..5]).is_err());
    }
}
