use crate::bits::BitString;
use crate::combinatorics::{enumerate_r_subsets, SubsetIndex};
use crate::demand::{build_v, g_table, VVector};
use crate::error::{Error, Result};
use crate::scheme::{recover_segment, CacheContent, DeliverySignal};
use crate::yma::UVector;

/// Recovers file `D_k` for user `k` from its cache and the broadcast.
///
/// Each subfile is
/// `W_{D_k,R} = XOR_{t in V \ R} Y_{{t} ∪ R} XOR XOR_{t in R} X^{g(t)_k + S_k}_{d, R \ {t}}`.
pub fn decode(
    cache: &CacheContent,
    x: &DeliverySignal,
    k: usize,
    demand: usize,
) -> Result<BitString> {
    let params = *cache.params();
    if *x.params() != params {
        return Err(Error::Inconsistent(
            "cache and delivery use different parameters".into(),
        ));
    }
    if k != cache.user() {
        return Err(Error::Inconsistent(format!(
            "cache belongs to user {}, not {k}",
            cache.user()
        )));
    }
    let n = params.n_files();
    let d = x.aux();
    if (d.digits()[k] + cache.key()) % n != demand {
        return Err(Error::Inconsistent(format!(
            "d_{k}={} with key {} does not give file {demand}",
            d.digits()[k],
            cache.key()
        )));
    }
    let v = build_v(d);
    let g = g_table(n, params.n_users());
    let u = cache.u_vector();
    let mut out = BitString::zeros(0);
    for set in enumerate_r_subsets(params.universe(), params.r()) {
        out.append(&decode_subfile(cache, x, &v, &g, &u, &set)?);
    }
    Ok(out)
}

fn decode_subfile(
    cache: &CacheContent,
    x: &DeliverySignal,
    v: &VVector,
    g: &[Vec<usize>],
    u: &UVector,
    set: &SubsetIndex,
) -> Result<BitString> {
    let n = cache.params().n_files();
    let k = cache.user();
    let mut acc = BitString::zeros(cache.params().subfile_len());
    for t in v.set_form() {
        if !set.contains(t) {
            acc ^= &cache.y(u, &set.with(t))?;
        }
    }
    for &t in set.members() {
        let file = (g[t][k] + cache.key()) % n;
        acc ^= &recover_segment(x, v, &set.without(t), file)?;
    }
    Ok(acc)
}
