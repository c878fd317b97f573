use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::combinatorics::{enumerate_r_subsets, SubsetIndex};
use crate::demand::{aux_demand, build_v, AuxDemand, VVector};
use crate::error::{Error, Result};
use crate::library::FileLibrary;
use crate::params::SchemeParams;
use crate::scheme::SessionRandomness;

/// The broadcast: auxiliary demand, chosen index `t_d`, and the segments
/// `X^n_{d,S}` for every `(r-1)`-set `S` avoiding `t_d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeliverySignal {
    params: SchemeParams,
    aux: AuxDemand,
    t_d: usize,
    /// keyed by `(n, colex rank of S)`
    segments: BTreeMap<(usize, usize), BitString>,
}

impl DeliverySignal {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn aux(&self) -> &AuxDemand {
        &self.aux
    }

    pub fn t_d(&self) -> usize {
        self.t_d
    }

    pub fn segments(&self) -> &BTreeMap<(usize, usize), BitString> {
        &self.segments
    }

    pub fn segments_mut(&mut self) -> &mut BTreeMap<(usize, usize), BitString> {
        &mut self.segments
    }

    pub fn segment(&self, n: usize, s: &SubsetIndex) -> Option<&BitString> {
        self.segments.get(&(n, s.rank()))
    }

    /// Segments ordered by file, then colex order of `S`.
    pub fn payload_bits(&self) -> BitString {
        BitString::concat(self.segments.values())
    }

    /// `[d: K bytes][t_d: u32 LE][payload bit length: u64 LE][payload]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload_bits();
        let mut out = Vec::with_capacity(self.aux.n_users() + 12 + payload.len().div_ceil(8));
        out.extend(self.aux.digits().iter().map(|&d| d as u8));
        out.extend_from_slice(&(self.t_d as u32).to_le_bytes());
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload.to_bytes());
        out
    }

    pub fn from_bytes(params: SchemeParams, bytes: &[u8]) -> Result<Self> {
        let k = params.n_users();
        if bytes.len() < k + 12 {
            return Err(Error::Parse(
                "delivery record shorter than its header".into(),
            ));
        }
        let digits = bytes[..k].iter().map(|&b| b as usize).collect();
        let aux =
            AuxDemand::new(digits, params.n_files()).map_err(|e| Error::Parse(e.to_string()))?;
        let t_d = u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes")) as usize;
        let v = build_v(&aux);
        if !v.contains(t_d) {
            return Err(Error::ChoiceNotInV {
                t: t_d,
                v: v.set_form(),
            });
        }
        let bit_len =
            u64::from_le_bytes(bytes[k + 4..k + 12].try_into().expect("8 bytes")) as usize;
        let keys = segment_keys(&params, t_d);
        let width = params.subfile_len();
        if bit_len != keys.len() * width {
            return Err(Error::LengthMismatch {
                expected: keys.len() * width,
                actual: bit_len,
            });
        }
        let payload = BitString::from_bytes(&bytes[k + 12..], bit_len)?;
        let segments = keys
            .into_iter()
            .enumerate()
            .map(|(i, key)| (key, payload.slice(i * width, width)))
            .collect();
        Ok(Self {
            params,
            aux,
            t_d,
            segments,
        })
    }
}

/// `(n, rank S)` for every delivered segment, in canonical order.
fn segment_keys(params: &SchemeParams, t_d: usize) -> Vec<(usize, usize)> {
    if params.r() == 0 {
        return Vec::new();
    }
    let sets: Vec<usize> = enumerate_r_subsets(params.universe(), params.r() - 1)
        .into_iter()
        .filter(|s| !s.contains(t_d))
        .map(|s| s.rank())
        .collect();
    (0..params.n_files())
        .flat_map(|n| sets.iter().map(move |&rank| (n, rank)))
        .collect()
}

/// `X^n_{d,S} = XOR_{v in V \ S} W_{n, S ∪ {v}}`; zero when `V ⊆ S`.
pub fn x_segment(files: &FileLibrary, v: &VVector, s: &SubsetIndex, n: usize) -> BitString {
    let mut acc = BitString::zeros(files.params().subfile_len());
    for j in v.set_form() {
        if !s.contains(j) {
            acc ^= &files.subfile(n, &s.with(j));
        }
    }
    acc
}

/// Broadcast for auxiliary demand `d` with index `t_d` taken from its V-set.
pub fn assemble_delivery(files: &FileLibrary, d: &AuxDemand, t_d: usize) -> Result<DeliverySignal> {
    let params = *files.params();
    if d.n_users() != params.n_users() || d.n_files() != params.n_files() {
        return Err(Error::InvalidDemand(format!(
            "{d} does not match the library parameters"
        )));
    }
    let v = build_v(d);
    if !v.contains(t_d) {
        return Err(Error::ChoiceNotInV {
            t: t_d,
            v: v.set_form(),
        });
    }
    let mut segments = BTreeMap::new();
    if params.r() > 0 {
        let sets: Vec<SubsetIndex> = enumerate_r_subsets(params.universe(), params.r() - 1)
            .into_iter()
            .filter(|s| !s.contains(t_d))
            .collect();
        for n in 0..params.n_files() {
            for s in &sets {
                segments.insert((n, s.rank()), x_segment(files, &v, s, n));
            }
        }
    }
    Ok(DeliverySignal {
        params,
        aux: d.clone(),
        t_d,
        segments,
    })
}

/// Like [`assemble_delivery`] with `t_d` read from the session's choices.
pub fn assemble_with(
    files: &FileLibrary,
    d: &AuxDemand,
    rand: &SessionRandomness,
) -> Result<DeliverySignal> {
    let t_d = rand
        .t_for(d)
        .ok_or_else(|| Error::MissingChoice(d.digits().to_vec()))?;
    assemble_delivery(files, d, t_d)
}

/// Masks `demands` with the session keys, draws `t_d`, and builds the broadcast.
pub fn deliver(
    files: &FileLibrary,
    demands: &[usize],
    rand: &mut SessionRandomness,
) -> Result<DeliverySignal> {
    let params = files.params();
    if demands.len() != params.n_users() {
        return Err(Error::LengthMismatch {
            expected: params.n_users(),
            actual: demands.len(),
        });
    }
    let d = aux_demand(demands, rand.keys(), params.n_files())?;
    let v = build_v(&d);
    rand.draw_t(&d, &v);
    assemble_with(files, &d, rand)
}

/// `X^n_{d,S}` from the broadcast alone.
///
/// Delivered segments are returned as-is. For `S ∋ t_d`, with
/// `A = S \ {t_d}`, `X^n_{d,S} = XOR_{t in V \ S} X^n_{d, A ∪ {t}}`, and every
/// right-hand segment avoids `t_d`.
pub fn recover_segment(
    x: &DeliverySignal,
    v: &VVector,
    s: &SubsetIndex,
    n: usize,
) -> Result<BitString> {
    let missing =
        |set: &SubsetIndex| Error::MissingSignal(format!("segment X^{n}{set} not delivered"));
    if !s.contains(x.t_d) {
        return x.segment(n, s).cloned().ok_or_else(|| missing(s));
    }
    let base = s.without(x.t_d);
    let mut acc = BitString::zeros(x.params.subfile_len());
    for t in v.set_form() {
        if !s.contains(t) {
            let key = base.with(t);
            acc ^= x.segment(n, &key).ok_or_else(|| missing(&key))?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{all_demand_vectors, f_map, DemandClass};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(m: &[usize], n: usize) -> SubsetIndex {
        SubsetIndex::new(m.to_vec(), n).unwrap()
    }

    fn aux(digits: &[usize]) -> AuxDemand {
        AuxDemand::new(digits.to_vec(), 2).unwrap()
    }

    fn symbolic() -> FileLibrary {
        FileLibrary::indicator(FileLibrary::indicator_params(2, 3, 2).unwrap()).unwrap()
    }

    /// XOR of `W_{n,R}` over the listed `R`.
    fn xor_of(lib: &FileLibrary, n: usize, sets: &[&[usize]]) -> BitString {
        let mut acc = BitString::zeros(lib.params().subfile_len());
        for m in sets {
            acc ^= &lib.subfile(n, &set(m, 4));
        }
        acc
    }

    #[test]
    fn segment_examples() {
        let lib = symbolic();
        for n in 0..2 {
            let v = build_v(&aux(&[1, 1, 0]));
            assert_eq!(
                x_segment(&lib, &v, &set(&[2], 4), n),
                xor_of(&lib, n, &[&[0, 2], &[1, 2]])
            );
            let v0 = build_v(&aux(&[0, 0, 0]));
            assert_eq!(
                x_segment(&lib, &v0, &set(&[1], 4), n),
                xor_of(&lib, n, &[&[0, 1]])
            );
            assert!(x_segment(&lib, &v0, &set(&[0], 4), n).is_zero());
        }
    }

    #[test]
    fn delivery_row_one_one_zero() {
        let lib = symbolic();
        let x = assemble_delivery(&lib, &aux(&[1, 1, 0]), 0).unwrap();
        assert_eq!(x.segments().len(), 6);
        for n in 0..2 {
            assert!(x.segment(n, &set(&[0], 4)).is_none());
            assert_eq!(
                x.segment(n, &set(&[1], 4)).unwrap(),
                &xor_of(&lib, n, &[&[0, 1], &[1, 2]])
            );
            assert_eq!(
                x.segment(n, &set(&[2], 4)).unwrap(),
                &xor_of(&lib, n, &[&[0, 2], &[1, 2]])
            );
            assert_eq!(
                x.segment(n, &set(&[3], 4)).unwrap(),
                &xor_of(&lib, n, &[&[0, 3], &[1, 3], &[2, 3]])
            );
        }
        assert!(assemble_delivery(&lib, &aux(&[1, 1, 0]), 3).is_err());
    }

    #[test]
    fn base_class_delivery_lists_subfiles_containing_the_label() {
        // every payload is exactly one subfile W_{n,R} with f(d) in R
        for (n_files, k) in [(2, 3), (3, 2), (2, 4)] {
            for r in 1..=(n_files * k - k + 1) {
                let p = SchemeParams::with_subfile_bits(n_files, k, r, 4).unwrap();
                let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(r as u64));
                for digits in all_demand_vectors(n_files, k) {
                    let d = AuxDemand::new(digits, n_files).unwrap();
                    if d.class() != DemandClass::D0 {
                        continue;
                    }
                    let label = f_map(&d).unwrap();
                    let x = assemble_delivery(&lib, &d, label).unwrap();
                    let mut got: Vec<BitString> = x.segments().values().cloned().collect();
                    let mut want: Vec<BitString> = (0..n_files)
                        .flat_map(|n| {
                            enumerate_r_subsets(p.universe(), r)
                                .into_iter()
                                .filter(|s| s.contains(label))
                                .map(|s| lib.subfile(n, &s))
                                .collect::<Vec<_>>()
                        })
                        .collect();
                    got.sort_by_key(|b| b.to_string());
                    want.sort_by_key(|b| b.to_string());
                    assert_eq!(got, want);
                }
            }
        }
    }

    #[test]
    fn recovery_examples() {
        let lib = symbolic();
        for n in 0..2 {
            let d = aux(&[1, 1, 0]);
            let x = assemble_delivery(&lib, &d, 0).unwrap();
            let got = recover_segment(&x, &build_v(&d), &set(&[0], 4), n).unwrap();
            assert_eq!(got, xor_of(&lib, n, &[&[0, 1], &[0, 2]]));

            let d = aux(&[1, 0, 1]);
            let x = assemble_delivery(&lib, &d, 1).unwrap();
            let got = recover_segment(&x, &build_v(&d), &set(&[1], 4), n).unwrap();
            assert_eq!(got, xor_of(&lib, n, &[&[1, 2], &[1, 3]]));

            let d = aux(&[0, 1, 1]);
            let x = assemble_delivery(&lib, &d, 3).unwrap();
            assert!(recover_segment(&x, &build_v(&d), &set(&[3], 4), n)
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn recovery_matches_direct_segments() {
        for (n_files, k, r) in [(2, 3, 2), (2, 3, 3), (3, 2, 2), (2, 4, 3), (3, 3, 2)] {
            let p = SchemeParams::with_subfile_bits(n_files, k, r, 5).unwrap();
            let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(17));
            for digits in all_demand_vectors(n_files, k) {
                let d = AuxDemand::new(digits, n_files).unwrap();
                let v = build_v(&d);
                for t in v.set_form() {
                    let x = assemble_delivery(&lib, &d, t).unwrap();
                    for s in enumerate_r_subsets(p.universe(), r - 1) {
                        for n in 0..n_files {
                            assert_eq!(
                                recover_segment(&x, &v, &s, n).unwrap(),
                                x_segment(&lib, &v, &s, n)
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn segment_count_and_bytes() {
        let p = SchemeParams::with_subfile_bits(2, 3, 2, 3).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(4));
        let mut rand = SessionRandomness::with_keys(&p, vec![0, 0, 1], 9).unwrap();
        let x = deliver(&lib, &[0, 1, 1], &mut rand).unwrap();
        assert_eq!(x.aux().digits(), &[0, 1, 0]);
        assert_eq!(x.segments().len(), p.segment_count());
        assert_eq!(x.payload_bits().len(), p.file_len());
        let bytes = x.to_bytes();
        assert_eq!(&bytes[..3], &[0, 1, 0]);
        assert_eq!(DeliverySignal::from_bytes(p, &bytes).unwrap(), x);

        let mut bad = bytes.clone();
        bad[3] = 1; // t_d = 1 is not in V_(0,1,0) = {0,2,3}
        assert!(DeliverySignal::from_bytes(p, &bad).is_err());
        assert!(DeliverySignal::from_bytes(p, &bytes[..bytes.len() - 1]).is_err());
        assert!(deliver(&lib, &[0, 1], &mut rand).is_err());
    }

    #[test]
    fn r_zero_sends_nothing() {
        let p = SchemeParams::with_subfile_bits(2, 2, 0, 4).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(4));
        let x = assemble_delivery(&lib, &AuxDemand::new(vec![1, 0], 2).unwrap(), 0).unwrap();
        assert!(x.segments().is_empty());
    }

    #[test]
    fn missing_choice_is_an_error() {
        let p = SchemeParams::minimal(2, 3, 2).unwrap();
        let lib = FileLibrary::zeros(p);
        let rand = SessionRandomness::with_keys(&p, vec![0, 0, 0], 0).unwrap();
        assert!(matches!(
            assemble_with(&lib, &aux(&[1, 0, 0]), &rand),
            Err(Error::MissingChoice(_))
        ));
    }
}
