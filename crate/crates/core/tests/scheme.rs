use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use private_caching::combinatorics::enumerate_r_subsets;
use private_caching::demand::{aux_demand, build_v, DemandClass};
use private_caching::library::FileLibrary;
use private_caching::params::SchemeParams;
use private_caching::scheme::{
    assemble_delivery, decode, deliver, place, recover_segment, x_segment, CacheContent,
    DeliverySignal, SessionRandomness,
};

/// (N, K, r) with small enough universes to keep each case fast.
fn small_params() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=4, 1usize..=4)
        .prop_filter("universe <= 10", |(n, k)| n * k - k < 10)
        .prop_flat_map(|(n, k)| (Just(n), Just(k), 0..=(n * k - k + 1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_user_recovers_its_file(
        (n, k, r) in small_params(),
        seed in any::<u64>(),
        bits in 1usize..=3,
    ) {
        let p = SchemeParams::with_subfile_bits(n, k, r, bits).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let demands: Vec<usize> = (0..k).map(|_| rand::Rng::random_range(&mut rng, 0..n)).collect();
        let mut rand = SessionRandomness::from_seed(&p, seed);
        let caches = place(&lib, &rand).unwrap();
        let x = deliver(&lib, &demands, &mut rand).unwrap();
        prop_assert!(build_v(x.aux()).contains(x.t_d()));
        for (user, cache) in caches.iter().enumerate() {
            prop_assert_eq!(&decode(cache, &x, user, demands[user]).unwrap(), lib.file(demands[user]));
        }
    }

    #[test]
    fn serialized_forms_round_trip((n, k, r) in small_params(), seed in any::<u64>()) {
        let p = SchemeParams::with_subfile_bits(n, k, r, 2).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut rand = SessionRandomness::from_seed(&p, seed);
        let caches = place(&lib, &rand).unwrap();
        for c in &caches {
            prop_assert_eq!(&CacheContent::from_bytes(p, c.user(), &c.to_bytes()).unwrap(), c);
        }
        let demands = vec![n - 1; k];
        let x = deliver(&lib, &demands, &mut rand).unwrap();
        prop_assert_eq!(DeliverySignal::from_bytes(p, &x.to_bytes()).unwrap(), x);
    }

    #[test]
    fn recovered_segments_match_direct((n, k, r) in small_params(), seed in any::<u64>()) {
        prop_assume!(r >= 1);
        let p = SchemeParams::with_subfile_bits(n, k, r, 4).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let demands: Vec<usize> = (0..k).map(|_| rand::Rng::random_range(&mut rng, 0..n)).collect();
        let keys: Vec<usize> = (0..k).map(|_| rand::Rng::random_range(&mut rng, 0..n)).collect();
        let d = aux_demand(&demands, &keys, n).unwrap();
        let v = build_v(&d);
        for t in v.set_form() {
            let x = assemble_delivery(&lib, &d, t).unwrap();
            for s in enumerate_r_subsets(p.universe(), r - 1).into_iter().filter(|s| s.contains(t)) {
                for file in 0..n {
                    prop_assert_eq!(recover_segment(&x, &v, &s, file).unwrap(), x_segment(&lib, &v, &s, file));
                }
            }
        }
    }
}

#[test]
fn base_class_sends_subfiles_containing_its_label() {
    let p = SchemeParams::with_subfile_bits(2, 3, 2, 8).unwrap();
    let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(1));
    // d = (0,0,0) with t = 0: every W_{n,R} with 0 in R
    let d = aux_demand(&[0, 0, 0], &[0, 0, 0], 2).unwrap();
    assert_eq!(d.class(), DemandClass::D0);
    let x = assemble_delivery(&lib, &d, 0).unwrap();
    let mut got: Vec<_> = x.segments().values().cloned().collect();
    let mut want: Vec<_> = (0..2)
        .flat_map(|n| {
            enumerate_r_subsets(4, 2)
                .into_iter()
                .filter(|s| s.contains(0))
                .map(|s| lib.subfile(n, &s))
                .collect::<Vec<_>>()
        })
        .collect();
    got.sort_by_key(|b| b.to_string());
    want.sort_by_key(|b| b.to_string());
    assert_eq!(got, want);
}

#[test]
fn degenerate_endpoints_decode() {
    for r in [0, 4] {
        let p = SchemeParams::with_subfile_bits(2, 3, r, 5).unwrap();
        let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(r as u64));
        let mut rand = SessionRandomness::from_seed(&p, 2);
        let caches = place(&lib, &rand).unwrap();
        let x = deliver(&lib, &[1, 0, 1], &mut rand).unwrap();
        if r == 0 {
            assert!(x.segments().is_empty());
        } else {
            assert!(caches.iter().all(|c| c.signals().is_empty()));
        }
        for (k, c) in caches.iter().enumerate() {
            assert_eq!(
                &decode(c, &x, k, [1, 0, 1][k]).unwrap(),
                lib.file([1, 0, 1][k])
            );
        }
    }
}

#[test]
fn library_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lib.bin");
    let p = SchemeParams::with_subfile_bits(3, 2, 2, 3).unwrap();
    let lib = FileLibrary::random(p, &mut ChaCha8Rng::seed_from_u64(9));
    lib.save(&path).unwrap();
    assert_eq!(FileLibrary::load(p, &path).unwrap().files(), lib.files());
    let other = SchemeParams::with_subfile_bits(3, 2, 2, 4).unwrap();
    assert!(FileLibrary::load(other, &path).is_err());
}
