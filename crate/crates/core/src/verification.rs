//! Exhaustive and oracle-based checks of the scheme: decoding correctness,
//! exact privacy distributions, the converse's distribution lemma, and the
//! identities the decoder relies on.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::combinatorics::{enumerate_r_subsets, SubsetIndex};
use crate::demand::{
    all_demand_vectors, aux_demand, build_v, digits_label, f_map, g_table, AuxDemand, DemandClass,
};
use crate::error::{Error, Result};
use crate::library::FileLibrary;
use crate::params::SchemeParams;
use crate::scheme::{
    assemble_delivery, decode, place_user, recover_segment, x_segment, CacheContent, DeliverySignal,
};
use crate::tradeoff::Rational;
use crate::yma::{build_u_vector, compute_y, meets_leaders, reconstruct_y, yma_delivery};

/// Largest number of elementary checks any single enumeration may perform.
pub const MAX_CASES: u64 = 50_000_000;

/// Largest library size, in bits, for the full-marginal privacy mode.
pub const MAX_MARGINAL_BITS: usize = 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub configuration: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub scope: String,
    pub cases_run: u64,
    pub failures: Vec<Failure>,
    #[serde(rename = "elapsed_ms", serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl VerificationReport {
    fn new(
        scope: impl Into<String>,
        cases_run: u64,
        failures: Vec<Failure>,
        started: Instant,
    ) -> Self {
        Self {
            scope: scope.into(),
            cases_run,
            failures,
            elapsed: started.elapsed(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report is serializable");
        v["passed"] = serde_json::Value::Bool(self.passed());
        v
    }

    /// Human-readable form; lists at most `max_failures` failures.
    pub fn render_text(&self, max_failures: usize) -> String {
        let mut out = format!(
            "{}: {} ({} cases, {} failures, {:.1} ms)\n",
            self.scope,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases_run,
            self.failures.len(),
            self.elapsed.as_secs_f64() * 1e3
        );
        for f in self.failures.iter().take(max_failures) {
            out += &format!(
                "  {}: expected {}, got {}\n",
                f.configuration, f.expected, f.actual
            );
        }
        if self.failures.len() > max_failures {
            out += &format!("  ... {} more\n", self.failures.len() - max_failures);
        }
        out
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_text(10))
    }
}

/// Distribution over serialized observables, as integer weights over a
/// common denominator.
#[derive(Clone, Debug, Default)]
pub struct OutcomeHistogram {
    weights: BTreeMap<Vec<u8>, u64>,
    denominator: u64,
}

impl OutcomeHistogram {
    pub fn from_weights(
        weights: impl IntoIterator<Item = (Vec<u8>, u64)>,
        denominator: u64,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (k, w) in weights {
            *map.entry(k).or_insert(0) += w;
        }
        Self {
            weights: map,
            denominator,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn probability(&self, outcome: &[u8]) -> Rational {
        let w = self.weights.get(outcome).copied().unwrap_or(0);
        Rational::new(BigInt::from(w), BigInt::from(self.denominator))
    }

    pub fn probabilities(&self) -> BTreeMap<Vec<u8>, Rational> {
        self.weights
            .iter()
            .map(|(k, &w)| {
                (
                    k.clone(),
                    Rational::new(BigInt::from(w), BigInt::from(self.denominator)),
                )
            })
            .collect()
    }

    pub fn total(&self) -> Rational {
        self.probabilities()
            .into_values()
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// First outcome on which the two distributions differ, if any.
    pub fn first_difference(&self, other: &Self) -> Option<(Vec<u8>, Rational, Rational)> {
        let (a, b) = (self.probabilities(), other.probabilities());
        a.keys()
            .chain(b.keys())
            .find(|k| a.get(*k) != b.get(*k))
            .map(|k| {
                let pa = a.get(k).cloned().unwrap_or_else(Rational::zero);
                let pb = b.get(k).cloned().unwrap_or_else(Rational::zero);
                (k.clone(), pa, pb)
            })
    }
}

impl PartialEq for OutcomeHistogram {
    fn eq(&self, other: &Self) -> bool {
        if self.denominator == other.denominator {
            self.weights == other.weights
        } else {
            self.probabilities() == other.probabilities()
        }
    }
}

/// `D=(..) S=(..) t=.. k=..`, the label used for correctness failures.
pub fn case_label(demands: &[usize], keys: &[usize], t: usize, k: usize) -> String {
    format!(
        "D={} S={} t={t} k={k}",
        digits_label(demands),
        digits_label(keys)
    )
}

fn short(bits: &BitString) -> String {
    let s = bits.to_string();
    if s.len() > 64 {
        format!("{}...({} bits)", &s[..64], bits.len())
    } else {
        s
    }
}

fn guard(what: &str, cases: u128) -> Result<()> {
    if cases > MAX_CASES as u128 {
        return Err(Error::ScaleGuard(format!(
            "{what} needs {cases} checks, limit {MAX_CASES}"
        )));
    }
    Ok(())
}

fn check_params(params: &SchemeParams, files: &FileLibrary) -> Result<()> {
    if params != files.params() {
        return Err(Error::InvalidParams(
            "library was built for different parameters".into(),
        ));
    }
    Ok(())
}

fn pow(base: usize, exp: usize) -> u128 {
    (base as u128).pow(exp as u32)
}

/// `cache[k][s]`: the cache of user `k` under key `s`.
fn all_caches(files: &FileLibrary) -> Result<Vec<Vec<CacheContent>>> {
    let p = files.params();
    (0..p.n_users())
        .map(|k| (0..p.n_files()).map(|s| place_user(files, k, s)).collect())
        .collect()
}

/// Every auxiliary demand with its broadcast for each admissible `t_d`.
fn all_deliveries(files: &FileLibrary) -> Result<HashMap<Vec<usize>, Vec<DeliverySignal>>> {
    let p = files.params();
    all_demand_vectors(p.n_files(), p.n_users())
        .map(|digits| {
            let d = AuxDemand::new(digits.clone(), p.n_files())?;
            let xs = build_v(&d)
                .set_form()
                .into_iter()
                .map(|t| assemble_delivery(files, &d, t))
                .collect::<Result<Vec<_>>>()?;
            Ok((digits, xs))
        })
        .collect()
}

/// Every `(D, S, t_d, k)`: user `k` must decode `W_{D_k}` bit-exactly.
pub fn verify_correctness_exhaustive(
    params: &SchemeParams,
    files: &FileLibrary,
) -> Result<VerificationReport> {
    verify_correctness_with(params, files, &|_, _| {})
}

/// As [`verify_correctness_exhaustive`], with `tamper` applied to every
/// broadcast before decoding.
pub fn verify_correctness_with(
    params: &SchemeParams,
    files: &FileLibrary,
    tamper: &(dyn Fn(&AuxDemand, &mut DeliverySignal) + Sync),
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_params(params, files)?;
    let (n, k_users) = (params.n_files(), params.n_users());
    guard(
        "correctness sweep",
        pow(n, 2 * k_users) * params.universe() as u128 * k_users as u128,
    )?;
    let caches = all_caches(files)?;
    let mut deliveries = all_deliveries(files)?;
    for (digits, xs) in deliveries.iter_mut() {
        let d = AuxDemand::new(digits.clone(), n)?;
        for x in xs.iter_mut() {
            tamper(&d, x);
        }
    }
    let vectors: Vec<Vec<usize>> = all_demand_vectors(n, k_users).collect();
    let pairs: Vec<(&Vec<usize>, &Vec<usize>)> = vectors
        .iter()
        .flat_map(|dem| vectors.iter().map(move |keys| (dem, keys)))
        .collect();
    let (cases, mut failures) = pairs
        .par_iter()
        .map(|&(demands, keys)| {
            let mut cases = 0u64;
            let mut failures = Vec::new();
            let d = aux_demand(demands, keys, n).expect("digits in range");
            for x in &deliveries[d.digits()] {
                for k in 0..k_users {
                    cases += 1;
                    let want = files.file(demands[k]);
                    let got = decode(&caches[k][keys[k]], x, k, demands[k]);
                    let actual = match got {
                        Ok(ref bits) if bits == want => continue,
                        Ok(bits) => short(&bits),
                        Err(e) => format!("error: {e}"),
                    };
                    failures.push(Failure {
                        configuration: case_label(demands, keys, x.t_d(), k),
                        expected: short(want),
                        actual,
                    });
                }
            }
            (cases, failures)
        })
        .reduce(
            || (0, Vec::new()),
            |(c1, mut f1), (c2, f2)| {
                f1.extend(f2);
                (c1 + c2, f1)
            },
        );
    failures.sort_by(|a, b| a.configuration.cmp(&b.configuration));
    Ok(VerificationReport::new(
        format!("correctness N={n} K={k_users} r={}", params.r()),
        cases,
        failures,
        started,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrivacyMode {
    /// Fixed library; randomness over keys and index choices.
    ConditionalOnFiles,
    /// Also uniform over every library with one-bit subfiles.
    FullMarginal,
}

/// Whether the server masks demands with the user keys. `Unmasked` sends
/// `d = D` and exists as a negative control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Masking {
    Keyed,
    Unmasked,
}

/// Library enumeration for the histogram engine.
enum Libraries<'a> {
    Fixed(&'a FileLibrary),
    AllOneBit(SchemeParams),
}

impl Libraries<'_> {
    fn count(&self) -> u64 {
        match self {
            Libraries::Fixed(_) => 1,
            Libraries::AllOneBit(p) => 1u64 << (p.n_files() * p.file_len()),
        }
    }

    fn get(&self, i: u64) -> FileLibrary {
        match self {
            Libraries::Fixed(lib) => (*lib).clone(),
            Libraries::AllOneBit(p) => {
                let f = p.file_len();
                let files = (0..p.n_files())
                    .map(|n| BitString::from_bits((0..f).map(|j| (i >> (n * f + j)) & 1 == 1)))
                    .collect();
                FileLibrary::new(*p, files).expect("sizes match")
            }
        }
    }
}

fn lcm_up_to(n: usize) -> u64 {
    (1..=n as u64).fold(1, num_integer::lcm)
}

/// For demand vector `demands`, the distribution of each user's observation
/// `(X, Z_k[, W_{D_k}])` over keys, index choices and libraries.
fn observation_histograms(
    libs: &Libraries<'_>,
    params: &SchemeParams,
    demands: &[usize],
    masking: Masking,
    with_file: bool,
) -> Result<Vec<OutcomeHistogram>> {
    let (n, k_users) = (params.n_files(), params.n_users());
    let scale = lcm_up_to(params.universe());
    let key_vectors: Vec<Vec<usize>> = all_demand_vectors(n, k_users).collect();
    let denominator = libs.count() * key_vectors.len() as u64 * scale;
    let per_lib = |i: u64| -> Result<Vec<HashMap<Vec<u8>, u64>>> {
        let files = libs.get(i);
        let caches: Vec<Vec<Vec<u8>>> = (0..k_users)
            .map(|k| {
                (0..n)
                    .map(|s| Ok(place_user(&files, k, s)?.to_bytes()))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut out = vec![HashMap::new(); k_users];
        let mut memo: HashMap<Vec<usize>, Vec<Vec<u8>>> = HashMap::new();
        for keys in &key_vectors {
            let d = match masking {
                Masking::Keyed => aux_demand(demands, keys, n)?,
                Masking::Unmasked => AuxDemand::new(demands.to_vec(), n)?,
            };
            if !memo.contains_key(d.digits()) {
                let xs = build_v(&d)
                    .set_form()
                    .into_iter()
                    .map(|t| Ok(assemble_delivery(&files, &d, t)?.to_bytes()))
                    .collect::<Result<Vec<_>>>()?;
                memo.insert(d.digits().to_vec(), xs);
            }
            let xs = &memo[d.digits()];
            let weight = scale / xs.len() as u64;
            for x in xs {
                for (k, hist) in out.iter_mut().enumerate() {
                    let mut obs = x.clone();
                    obs.extend_from_slice(&caches[k][keys[k]]);
                    if with_file {
                        obs.extend_from_slice(&files.file(demands[k]).to_bytes());
                    }
                    *hist.entry(obs).or_insert(0) += weight;
                }
            }
        }
        Ok(out)
    };
    let merged = (0..libs.count())
        .into_par_iter()
        .map(per_lib)
        .try_fold(
            || vec![HashMap::new(); k_users],
            |mut acc: Vec<HashMap<Vec<u8>, u64>>, part| {
                for (a, p) in acc.iter_mut().zip(part?) {
                    for (obs, w) in p {
                        *a.entry(obs).or_insert(0) += w;
                    }
                }
                Ok::<_, Error>(acc)
            },
        )
        .try_reduce(
            || vec![HashMap::new(); k_users],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for (obs, w) in y {
                        *x.entry(obs).or_insert(0) += w;
                    }
                }
                Ok(a)
            },
        )?;
    Ok(merged
        .into_iter()
        .map(|m| OutcomeHistogram::from_weights(m, denominator))
        .collect())
}

/// Compares, for every user `k` and requested file `D_k`, the observation
/// histograms across all completions `D_{-k}`.
fn compare_across_completions(
    scope: String,
    libs: Libraries<'_>,
    params: &SchemeParams,
    masking: Masking,
    with_file: bool,
    started: Instant,
) -> Result<VerificationReport> {
    let (n, k_users) = (params.n_files(), params.n_users());
    let max_v = params.universe() as u128;
    guard(
        &scope,
        libs.count() as u128 * pow(n, 2 * k_users) * max_v * k_users as u128,
    )?;
    // reference[k][D_k]: the first completion's histogram and its demand vector
    type Reference = Option<(Vec<usize>, OutcomeHistogram)>;
    let mut reference: Vec<Vec<Reference>> = vec![vec![None; n]; k_users];
    let mut failures = Vec::new();
    let mut cases = 0u64;
    for demands in all_demand_vectors(n, k_users) {
        let hists = observation_histograms(&libs, params, &demands, masking, with_file)?;
        for (k, hist) in hists.into_iter().enumerate() {
            if hist.total() != Rational::one() {
                return Err(Error::Inconsistent(format!(
                    "histogram for D={} k={k} does not sum to 1",
                    digits_label(&demands)
                )));
            }
            cases += 1;
            match &reference[k][demands[k]] {
                None => reference[k][demands[k]] = Some((demands.clone(), hist)),
                Some((ref_demands, ref_hist)) => {
                    if let Some((_, p_ref, p)) = ref_hist.first_difference(&hist) {
                        failures.push(Failure {
                            configuration: format!(
                                "k={k} D={} vs D={}",
                                digits_label(&demands),
                                digits_label(ref_demands)
                            ),
                            expected: format!(
                                "{} outcomes, first differing probability {p_ref}",
                                ref_hist.len()
                            ),
                            actual: format!("{} outcomes, probability {p}", hist.len()),
                        });
                    }
                }
            }
        }
    }
    Ok(VerificationReport::new(scope, cases, failures, started))
}

/// Privacy: the serialized `(X_D, Z_k)` seen by user `k` has the same exact
/// distribution for every completion of the other users' demands.
pub fn verify_privacy(
    params: &SchemeParams,
    mode: PrivacyMode,
    files: Option<&FileLibrary>,
) -> Result<VerificationReport> {
    verify_privacy_masked(params, mode, files, Masking::Keyed)
}

pub fn verify_privacy_masked(
    params: &SchemeParams,
    mode: PrivacyMode,
    files: Option<&FileLibrary>,
    masking: Masking,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let libs = match mode {
        PrivacyMode::ConditionalOnFiles => {
            let files = files.ok_or_else(|| {
                Error::InvalidParams("conditional privacy needs a library".into())
            })?;
            check_params(params, files)?;
            Libraries::Fixed(files)
        }
        PrivacyMode::FullMarginal => {
            if params.subfile_len() != 1 {
                return Err(Error::InvalidParams(
                    "full-marginal privacy needs one-bit subfiles".into(),
                ));
            }
            let bits = params.n_files() * params.file_len();
            if bits > MAX_MARGINAL_BITS {
                return Err(Error::ScaleGuard(format!(
                    "{bits}-bit libraries exceed the {MAX_MARGINAL_BITS}-bit enumeration limit"
                )));
            }
            Libraries::AllOneBit(*params)
        }
    };
    let scope = format!(
        "privacy{} {:?} N={} K={} r={}",
        if masking == Masking::Unmasked {
            " (unmasked)"
        } else {
            ""
        },
        mode,
        params.n_files(),
        params.n_users(),
        params.r()
    );
    compare_across_completions(scope, libs, params, masking, false, started)
}

/// The joint distribution of `(X_D, Z_k, W_{D_k})` does not depend on `D_{-k}`.
pub fn verify_distribution_lemma(
    params: &SchemeParams,
    files: &FileLibrary,
) -> Result<VerificationReport> {
    verify_distribution_lemma_masked(params, files, Masking::Keyed)
}

pub fn verify_distribution_lemma_masked(
    params: &SchemeParams,
    files: &FileLibrary,
    masking: Masking,
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_params(params, files)?;
    let scope = format!(
        "distribution lemma{} N={} K={} r={}",
        if masking == Masking::Unmasked {
            " (unmasked)"
        } else {
            ""
        },
        params.n_files(),
        params.n_users(),
        params.r()
    );
    compare_across_completions(
        scope,
        Libraries::Fixed(files),
        params,
        masking,
        true,
        started,
    )
}

/// For every `d`, `R`, `k` and shift `s`:
/// `XOR_{t in V_d} W_{g(t)_k + s, R} = W_{d_k + s, R}`. Shift 0 is the
/// unshifted identity.
pub fn oracle_demand_identity(
    params: &SchemeParams,
    files: &FileLibrary,
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_params(params, files)?;
    let (n, k_users) = (params.n_files(), params.n_users());
    guard(
        "demand identity",
        pow(n, k_users) * params.subfile_count() as u128 * (k_users * n) as u128,
    )?;
    let g = g_table(n, k_users);
    let sets = enumerate_r_subsets(params.universe(), params.r());
    let mut cases = 0;
    let mut failures = Vec::new();
    for digits in all_demand_vectors(n, k_users) {
        let d = AuxDemand::new(digits, n)?;
        let v = build_v(&d).set_form();
        for set in &sets {
            for (k, &dk) in d.digits().iter().enumerate() {
                for s in 0..n {
                    cases += 1;
                    let mut lhs = BitString::zeros(params.subfile_len());
                    for &t in &v {
                        lhs ^= &files.subfile((g[t][k] + s) % n, set);
                    }
                    let want = files.subfile((dk + s) % n, set);
                    if lhs != want {
                        failures.push(Failure {
                            configuration: format!("d={d} R={set} k={k} shift={s}"),
                            expected: short(&want),
                            actual: short(&lhs),
                        });
                    }
                }
            }
        }
    }
    Ok(VerificationReport::new(
        format!("demand identity N={n} K={k_users} r={}", params.r()),
        cases,
        failures,
        started,
    ))
}

/// Segments containing `t_d` recovered from the broadcast equal the directly
/// computed ones, for every `d`, `t_d`, `S ∋ t_d` and `n`.
pub fn oracle_segment_recovery(
    params: &SchemeParams,
    files: &FileLibrary,
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_params(params, files)?;
    let (n, k_users) = (params.n_files(), params.n_users());
    guard(
        "segment recovery",
        pow(n, k_users) * params.universe() as u128 * params.segment_count() as u128,
    )?;
    let sets = if params.r() == 0 {
        Vec::new()
    } else {
        enumerate_r_subsets(params.universe(), params.r() - 1)
    };
    let mut cases = 0;
    let mut failures = Vec::new();
    for digits in all_demand_vectors(n, k_users) {
        let d = AuxDemand::new(digits, n)?;
        let v = build_v(&d);
        for t in v.set_form() {
            let x = assemble_delivery(files, &d, t)?;
            for set in sets.iter().filter(|s| s.contains(t)) {
                for file in 0..n {
                    cases += 1;
                    let want = x_segment(files, &v, set, file);
                    match recover_segment(&x, &v, set, file) {
                        Ok(got) if got == want => {}
                        got => failures.push(Failure {
                            configuration: format!("d={d} t={t} S={set} n={file}"),
                            expected: short(&want),
                            actual: got
                                .map(|b| short(&b))
                                .unwrap_or_else(|e| format!("error: {e}")),
                        }),
                    }
                }
            }
        }
    }
    Ok(VerificationReport::new(
        format!("segment recovery N={n} K={k_users} r={}", params.r()),
        cases,
        failures,
        started,
    ))
}

/// Non-leader Y-signals rebuilt from the cache equal their direct XOR, for
/// every user and key. Passes vacuously when every `(r+1)`-set meets the
/// leaders.
pub fn oracle_y_reconstruction(
    params: &SchemeParams,
    files: &FileLibrary,
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_params(params, files)?;
    let (n, k_users) = (params.n_files(), params.n_users());
    let sets: Vec<SubsetIndex> = if params.r() < params.universe() {
        enumerate_r_subsets(params.universe(), params.r() + 1)
            .into_iter()
            .filter(|b| !meets_leaders(b, n))
            .collect()
    } else {
        Vec::new()
    };
    guard("Y reconstruction", (sets.len() * k_users * n) as u128)?;
    let mut cases = 0;
    let mut failures = Vec::new();
    for k in 0..k_users {
        for s in 0..n {
            let u = build_u_vector(n, k_users, k, s)?;
            let stored = yma_delivery(files, &u)?
                .into_iter()
                .map(|y| (y.index.rank(), y.payload))
                .collect();
            for b in &sets {
                cases += 1;
                let want = compute_y(files, &u, b)?;
                match reconstruct_y(&stored, &u, b) {
                    Ok(got) if got == want => {}
                    got => failures.push(Failure {
                        configuration: format!("k={k} s={s} B={b}"),
                        expected: short(&want),
                        actual: got
                            .map(|b| short(&b))
                            .unwrap_or_else(|e| format!("error: {e}")),
                    }),
                }
            }
        }
    }
    Ok(VerificationReport::new(
        format!("Y reconstruction N={n} K={k_users} r={}", params.r()),
        cases,
        failures,
        started,
    ))
}

/// For base-class demands with `t_d = f(d)`, the broadcast is exactly the
/// multiset of subfiles whose index contains `f(d)`.
pub fn oracle_base_class_delivery(
    params: &SchemeParams,
    files: &FileLibrary,
) -> Result<VerificationReport> {
    let started = Instant::now();
    check_params(params, files)?;
    let (n, k_users) = (params.n_files(), params.n_users());
    guard(
        "base-class delivery",
        params.universe() as u128 * params.subfile_count() as u128 * n as u128,
    )?;
    let sets = enumerate_r_subsets(params.universe(), params.r());
    let mut cases = 0;
    let mut failures = Vec::new();
    for digits in all_demand_vectors(n, k_users) {
        let d = AuxDemand::new(digits, n)?;
        if d.class() != DemandClass::D0 {
            continue;
        }
        cases += 1;
        let label = f_map(&d)?;
        let x = assemble_delivery(files, &d, label)?;
        let mut got: Vec<Vec<u8>> = x.segments().values().map(|b| b.to_bytes()).collect();
        let mut want: Vec<Vec<u8>> = (0..n)
            .flat_map(|file| {
                sets.iter()
                    .filter(|s| s.contains(label))
                    .map(move |s| files.subfile(file, s).to_bytes())
            })
            .collect();
        got.sort();
        want.sort();
        if got != want {
            failures.push(Failure {
                configuration: format!("d={d} f(d)={label}"),
                expected: format!("{} subfiles", want.len()),
                actual: format!("{} segments, differing multiset", got.len()),
            });
        }
    }
    Ok(VerificationReport::new(
        format!("base-class delivery N={n} K={k_users} r={}", params.r()),
        cases,
        failures,
        started,
    ))
}
