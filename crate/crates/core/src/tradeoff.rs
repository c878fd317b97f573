//! Exact memory-rate points, lower convex envelopes and converse bounds.
//!
//! Everything here is exact rational arithmetic; floats only appear through
//! [`to_f64`] for rendering.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Always `p/q`, including integers (`2/1`).
pub fn fmt_rational(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Accepts `p/q` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatePoint {
    pub m: Rational,
    pub r: Rational,
}

impl RatePoint {
    pub fn new(m: Rational, r: Rational) -> Self {
        Self { m, r }
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.r.clone(), self.m.clone())
    }
}

impl fmt::Display for RatePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.r)
    }
}

/// `(M, R)` of the scheme with `N` files, `K` users and parameter `r`.
pub fn thm1_point(n_files: usize, n_users: usize, r: usize) -> RatePoint {
    let universe = (n_files * n_users - n_users + 1) as u64;
    let r_i = r as i64;
    let stored = binomial(universe, r_i + 1) - binomial(universe - n_files as u64, r_i + 1);
    let subfiles = binomial(universe, r_i);
    let m = Rational::new(BigInt::from(stored), BigInt::from(subfiles));
    let rate = Rational::new(BigInt::from(n_files * r), BigInt::from(universe));
    RatePoint::new(m, rate)
}

/// One point per `r` in `[0, NK - K + 1]`.
pub fn thm1_points(n_files: usize, n_users: usize) -> Vec<RatePoint> {
    let universe = n_files * n_users - n_users + 1;
    (0..=universe)
        .map(|r| thm1_point(n_files, n_users, r))
        .collect()
}

/// The two-file companion family: the swapped images of [`thm1_points`].
pub fn companion_points(n_users: usize) -> Vec<RatePoint> {
    swap_points(&thm1_points(2, n_users))
}

pub fn swap_points(points: &[RatePoint]) -> Vec<RatePoint> {
    points.iter().map(RatePoint::swapped).collect()
}

/// Convex, non-increasing piecewise-linear `M -> R` through its corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffCurve {
    corners: Vec<RatePoint>,
}

impl TradeoffCurve {
    pub fn corners(&self) -> &[RatePoint] {
        &self.corners
    }

    /// Linear interpolation between corners; constant past the last corner,
    /// `None` below the first.
    pub fn eval(&self, m: &Rational) -> Option<Rational> {
        let first = self.corners.first()?;
        if m < &first.m {
            return None;
        }
        for w in self.corners.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if m <= &b.m {
                let slope = (&b.r - &a.r) / (&b.m - &a.m);
                return Some(&a.r + slope * (m - &a.m));
            }
        }
        Some(self.corners.last()?.r.clone())
    }
}

fn cross(o: &RatePoint, a: &RatePoint, b: &RatePoint) -> Rational {
    (&a.m - &o.m) * (&b.r - &o.r) - (&a.r - &o.r) * (&b.m - &o.m)
}

/// Lower boundary of the region reachable by memory sharing between `points`
/// and by leaving memory unused.
pub fn lower_convex_envelope(points: &[RatePoint]) -> Result<TradeoffCurve> {
    if points.is_empty() {
        return Err(Error::InvalidParams(
            "envelope of an empty point set".into(),
        ));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.m.cmp(&b.m).then(a.r.cmp(&b.r)));
    sorted.dedup_by(|b, a| a.m == b.m);

    // monotone chain, lower hull
    let mut hull: Vec<RatePoint> = Vec::new();
    for p in sorted {
        while hull.len() >= 2
            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p).is_positive()
        {
            hull.pop();
        }
        hull.push(p);
    }
    // past the minimum rate, extra memory can simply go unused
    let best = hull
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.r.cmp(&b.r))
        .map(|(i, _)| i)
        .unwrap_or(0);
    hull.truncate(best + 1);
    Ok(TradeoffCurve { corners: hull })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundSource {
    /// Private-caching converse for a given `k`, in its two mirrored forms.
    Converse { k: usize, mirrored: bool },
    /// Non-private cut-set bound with `s` users.
    CutSet { s: usize },
}

/// `alpha * M + beta * R >= gamma`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearBound {
    pub alpha: Rational,
    pub beta: Rational,
    pub gamma: Rational,
    pub source: BoundSource,
}

impl LinearBound {
    pub fn new(alpha: Rational, beta: Rational, gamma: Rational, source: BoundSource) -> Self {
        assert!(!(alpha.is_zero() && beta.is_zero()), "degenerate bound");
        assert!(!beta.is_negative(), "bound with negative rate coefficient");
        Self {
            alpha,
            beta,
            gamma,
            source,
        }
    }

    /// Smallest `R` allowed at `m`, or `None` for a pure memory bound.
    pub fn rate_at(&self, m: &Rational) -> Option<Rational> {
        if self.beta.is_zero() {
            return None;
        }
        Some((&self.gamma - &self.alpha * m) / &self.beta)
    }

    pub fn holds(&self, p: &RatePoint) -> bool {
        &self.alpha * &p.m + &self.beta * &p.r >= self.gamma
    }
}

impl fmt::Display for LinearBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} M + {} R >= {}", self.alpha, self.beta, self.gamma)
    }
}

fn int(x: usize) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Converse lines for two files and `K >= 2` users: both mirrored forms for
/// every `k` in `[2, K]`, then the cut-set lines `2M + R >= 2`, `M + 2R >= 2`.
pub fn converse_bounds(n_users: usize) -> Result<Vec<LinearBound>> {
    if n_users < 2 {
        return Err(Error::InvalidParams(format!(
            "converse bounds need K >= 2, got {n_users}"
        )));
    }
    let mut out = Vec::with_capacity(2 * n_users);
    for k in 2..=n_users {
        let a = int((k + 1) * (k + 2));
        let b = int(2 * k * (k + 1));
        let g = int(2 * k * (k + 3));
        out.push(LinearBound::new(
            a.clone(),
            b.clone(),
            g.clone(),
            BoundSource::Converse { k, mirrored: false },
        ));
        out.push(LinearBound::new(
            b,
            a,
            g,
            BoundSource::Converse { k, mirrored: true },
        ));
    }
    out.push(LinearBound::new(
        int(2),
        int(1),
        int(2),
        BoundSource::CutSet { s: 1 },
    ));
    out.push(LinearBound::new(
        int(1),
        int(2),
        int(2),
        BoundSource::CutSet { s: 2 },
    ));
    Ok(out)
}

/// Largest rate lower bound at `m` over all converse lines (and `R >= 0`).
pub fn converse_eval(n_users: usize, m: &Rational) -> Result<Rational> {
    let bounds = converse_bounds(n_users)?;
    Ok(max_rate(&bounds, m))
}

fn max_rate(bounds: &[LinearBound], m: &Rational) -> Rational {
    bounds
        .iter()
        .filter_map(|b| b.rate_at(m))
        .fold(Rational::zero(), |acc, r| if r > acc { r } else { acc })
}

/// Achievable curve: scheme points plus, for two files, the companion family.
pub fn achievable_curve(n_files: usize, n_users: usize) -> Result<TradeoffCurve> {
    let mut points = thm1_points(n_files, n_users);
    if n_files == 2 {
        points.extend(companion_points(n_users));
    }
    lower_convex_envelope(&points)
}

pub fn achievable_label(n_files: usize) -> &'static str {
    if n_files == 2 {
        "achievable (scheme and companion points)"
    } else {
        "achievable (scheme points only)"
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TightnessRow {
    pub m: Rational,
    pub r_ach: Rational,
    pub r_conv: Rational,
    pub tight: bool,
}

/// Achievable vs converse rate on the grid `0, step, 2*step, ... <= 2`.
pub fn tightness_report(n_users: usize, grid_step: &Rational) -> Result<Vec<TightnessRow>> {
    if !grid_step.is_positive() {
        return Err(Error::InvalidParams("grid step must be positive".into()));
    }
    let bounds = converse_bounds(n_users)?;
    let curve = achievable_curve(2, n_users)?;
    let two = int(2);
    let mut rows = Vec::new();
    let mut m = Rational::zero();
    while m <= two {
        let r_ach = curve.eval(&m).expect("curve starts at M = 0");
        let r_conv = max_rate(&bounds, &m);
        rows.push(TightnessRow {
            tight: r_ach == r_conv,
            m: m.clone(),
            r_ach,
            r_conv,
        });
        m += grid_step;
    }
    Ok(rows)
}

/// The closed-form optimum for `(N, K) = (2, 3)`.
pub fn exact_tradeoff_2_3(m: &Rational) -> Rational {
    let candidates = [
        int(2) - int(2) * m,
        (int(9) - int(6) * m) / int(5),
        (int(5) - int(3) * m) / int(3),
        (int(9) - int(5) * m) / int(6),
        (int(2) - m) / int(2),
    ];
    candidates.into_iter().max().expect("nonempty")
}

/// The two-part closed form on `[0, 2/K]` and `[2(K-1)/(K+1), 2]`; `None`
/// in between.
pub fn corollary_curve(n_users: usize, m: &Rational) -> Option<Rational> {
    let k = n_users;
    if m <= &rational(2, k as i64) {
        let a = int(2) - int(2) * m;
        let b = Rational::new(
            BigInt::from(2 * k * (k + 3)),
            BigInt::from((k + 1) * (k + 2)),
        ) - Rational::new(BigInt::from(2 * k), BigInt::from(k + 2)) * m;
        Some(a.max(b))
    } else if m >= &rational(2 * (k as i64 - 1), k as i64 + 1) {
        let a = int(1) - m / int(2);
        let b = Rational::new(BigInt::from(k + 3), BigInt::from(k + 1))
            - Rational::new(BigInt::from(k + 2), BigInt::from(2 * k)) * m;
        Some(a.max(b))
    } else {
        None
    }
}
