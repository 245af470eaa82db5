//! Monte Carlo and exact probes of three anti-concentration bounds: linear
//! forms in sparse Bernoulli vectors, quadratic forms, and linear forms in
//! uniform weight-`d` 0/1 vectors.
//!
//! Inputs are rational and every sum is compared in exact integer arithmetic
//! after scaling by the common denominator, so a target off the scaled
//! lattice is hit with probability zero.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::{binomial, Integer};
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{bernoulli_indices, check_probability, Seed};
use crate::error::{Error, Result};

/// Samples per deterministic batch; batch `b` draws from `seed.child(b)`.
pub const BATCH: usize = 4096;
/// Largest `N` for which the weight-`d` probe is computed exactly.
pub const EXACT_MAX_N: usize = 200;
pub const REGULAR_MC_SAMPLES: usize = 100_000;
/// Cap on the span of scaled sums tracked by the exact distributions.
pub const DP_MAX_SPAN: i128 = 4_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub empirical_prob: f64,
    pub bound: f64,
    /// Zero for the exact path.
    pub samples: usize,
    pub hits: usize,
    /// `3 sqrt(e (1 - e) / samples)`, zero for the exact path.
    pub three_sigma: f64,
    /// `None` when the bound carries an unspecified constant.
    pub pass: Option<bool>,
    /// `empirical_prob / bound`, reported by the quadratic probe.
    pub constant_estimate: Option<f64>,
    /// The exact probability as a reduced fraction, when computed exactly.
    pub exact: Option<String>,
}

impl ProbeReport {
    fn sampled(hits: usize, samples: usize, bound: f64) -> Self {
        let e = if samples == 0 { 0.0 } else { hits as f64 / samples as f64 };
        let three_sigma = if samples == 0 {
            0.0
        } else {
            3.0 * (e * (1.0 - e) / samples as f64).sqrt()
        };
        Self {
            empirical_prob: e,
            bound,
            samples,
            hits,
            three_sigma,
            pass: Some(e <= bound + three_sigma),
            constant_estimate: None,
            exact: None,
        }
    }
}

/// Common denominator of `values`.
fn common_denominator(values: &[Rational64]) -> Result<i64> {
    values.iter().try_fold(1i64, |l, v| {
        let d = *v.denom();
        let g = l.gcd(&d);
        (l / g)
            .checked_mul(d)
            .ok_or_else(|| Error::InvalidParameter("common denominator overflows i64".into()))
    })
}

fn scale_by(v: Rational64, l: i64) -> i128 {
    *v.numer() as i128 * (l / *v.denom()) as i128
}

/// `t * l` if it is an integer.
fn scale_target(t: Rational64, l: i64) -> Option<i128> {
    let num = *t.numer() as i128 * l as i128;
    let den = *t.denom() as i128;
    (num % den == 0).then_some(num / den)
}

fn batched_hits(samples: usize, seed: Seed, one: impl Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync) -> usize {
    let batches = samples.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed.child(b as u64).rng();
            let len = BATCH.min(samples - b * BATCH);
            (0..len).filter(|_| one(&mut rng)).count()
        })
        .sum()
}

/// Probes `Pr[v^T z = c] <= 1/sqrt(mp)` for `z` i.i.d. Bernoulli(p), where
/// `m` is the support size of `v`. Requires `mp >= 9`.
pub fn probe_lo_sparse(v: &[Rational64], p: f64, c: Rational64, samples: usize, seed: Seed) -> Result<ProbeReport> {
    check_probability("sparse probe p", p)?;
    let support: Vec<Rational64> = v.iter().copied().filter(|x| !x.is_zero()).collect();
    let mp = support.len() as f64 * p;
    if mp < 9.0 {
        return Err(Error::HypothesisViolated(format!("mp = {mp} < 9")));
    }
    let bound = 1.0 / mp.sqrt();
    let l = common_denominator(&support)?;
    let Some(target) = scale_target(c, l) else {
        return Ok(ProbeReport::sampled(0, samples, bound));
    };
    let w: Vec<i128> = support.iter().map(|&x| scale_by(x, l)).collect();
    let hits = batched_hits(samples, seed, |rng| {
        let mut sum = 0i128;
        bernoulli_indices(w.len() as u64, p, rng, |k| sum += w[k as usize]);
        sum == target
    });
    Ok(ProbeReport::sampled(hits, samples, bound))
}

/// Exact distribution of `v^T z` for `z` i.i.d. Bernoulli(p), in floating
/// point, as `(value, probability)` pairs. Used to pick worst-case targets.
pub fn lo_sparse_distribution(v: &[Rational64], p: f64) -> Result<Vec<(Rational64, f64)>> {
    check_probability("sparse probe p", p)?;
    let l = common_denominator(v)?;
    let w: Vec<i128> = v.iter().map(|&x| scale_by(x, l)).collect();
    let lo: i128 = w.iter().filter(|&&x| x < 0).sum();
    let hi: i128 = w.iter().filter(|&&x| x > 0).sum();
    if hi - lo > DP_MAX_SPAN {
        return Err(Error::InvalidParameter(format!("sum span {} exceeds {DP_MAX_SPAN}", hi - lo)));
    }
    let mut pmf = vec![0.0f64; (hi - lo + 1) as usize];
    pmf[(-lo) as usize] = 1.0;
    for &x in &w {
        if x == 0 {
            continue;
        }
        let mut next: Vec<f64> = pmf.iter().map(|q| q * (1.0 - p)).collect();
        for (i, &q) in pmf.iter().enumerate() {
            if q > 0.0 {
                next[(i as i128 + x) as usize] += q * p;
            }
        }
        pmf = next;
    }
    Ok(pmf
        .into_iter()
        .enumerate()
        .filter(|&(_, q)| q > 0.0)
        .map(|(i, q)| {
            let value = i as i128 + lo;
            (Rational64::new(value as i64, l), q)
        })
        .collect())
}

/// Most likely value of `v^T z` and its probability.
pub fn lo_sparse_mode(v: &[Rational64], p: f64) -> Result<(Rational64, f64)> {
    lo_sparse_distribution(v, p)?
        .into_iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::EmptyResult)
}

/// Largest `m` such that at least `m` columns of `matrix` each have at least
/// `m` nonzeros.
fn dense_column_index(matrix: &[Vec<Rational64>]) -> usize {
    let n = matrix.len();
    let mut counts: Vec<usize> = (0..n)
        .map(|j| matrix.iter().filter(|row| !row[j].is_zero()).count())
        .collect();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.iter().enumerate().take_while(|&(i, &c)| c > i).count()
}

/// Reports the frequency of `z^T M z = c` for `z` i.i.d. Bernoulli(p) against
/// `(mp)^{-1/4}`, where `m` is the largest count such that `m` columns of `M`
/// have at least `m` nonzeros. The bound holds only up to an unspecified
/// constant, so the report carries `empirical / bound` instead of a verdict.
pub fn probe_lo_quadratic(
    matrix: &[Vec<Rational64>],
    p: f64,
    c: Rational64,
    samples: usize,
    seed: Seed,
) -> Result<ProbeReport> {
    check_probability("quadratic probe p", p)?;
    let n = matrix.len();
    if let Some(row) = matrix.iter().find(|row| row.len() != n) {
        return Err(Error::InvalidParameter(format!(
            "quadratic form needs a square matrix (row of length {} in {n} rows)",
            row.len()
        )));
    }
    let mp = dense_column_index(matrix) as f64 * p;
    let bound = if mp >= 1.0 { mp.powf(-0.25) } else { 1.0 };
    let flat: Vec<Rational64> = matrix.iter().flatten().copied().collect();
    let l = common_denominator(&flat)?;
    let hits = match scale_target(c, l) {
        None => 0,
        Some(target) => {
            let m: Vec<i128> = flat.iter().map(|&x| scale_by(x, l)).collect();
            batched_hits(samples, seed, |rng| {
                let mut on = Vec::new();
                bernoulli_indices(n as u64, p, rng, |k| on.push(k as usize));
                let q: i128 = on.iter().map(|&i| on.iter().map(|&j| m[i * n + j]).sum::<i128>()).sum();
                q == target
            })
        }
    };
    let mut report = ProbeReport::sampled(hits, samples, bound);
    report.pass = None;
    report.constant_estimate = Some(report.empirical_prob / bound);
    Ok(report)
}

fn check_regular(v: &[Rational64], d: usize, w: Rational64) -> Result<()> {
    let n = v.len();
    if d == 0 || 2 * d * d > n {
        return Err(Error::HypothesisViolated(format!("need 1 <= d <= sqrt(N/2) (d = {d}, N = {n})")));
    }
    let mut counts: BTreeMap<Rational64, usize> = BTreeMap::new();
    for &x in v {
        *counts.entry(x).or_default() += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    let scale = Rational64::from_integer(d as i64);
    if counts.iter().any(|(&a, &c)| c == top && a * scale == w) {
        return Err(Error::ForbiddenTarget { target: w.to_string() });
    }
    Ok(())
}

/// Number of weight-`d` 0/1 vectors `x` with each value of `x . v`, keyed by
/// the scaled sum, and the common denominator. Entries are grouped by value
/// and counted with binomial weights, so no sampling is involved.
fn regular_counts(v: &[Rational64], d: usize) -> Result<(HashMap<i128, BigUint>, i64)> {
    let l = common_denominator(v)?;
    let mut groups: BTreeMap<i128, usize> = BTreeMap::new();
    for &x in v {
        *groups.entry(scale_by(x, l)).or_default() += 1;
    }
    // dp[t]: sums reachable by choosing t entries so far
    let mut dp: Vec<HashMap<i128, BigUint>> = vec![HashMap::new(); d + 1];
    dp[0].insert(0, BigUint::from(1u32));
    for (&u, &count) in &groups {
        let ways: Vec<BigUint> = (0..=count.min(d)).map(|k| binomial(BigUint::from(count), BigUint::from(k))).collect();
        let mut next: Vec<HashMap<i128, BigUint>> = vec![HashMap::new(); d + 1];
        for (t, sums) in dp.iter().enumerate() {
            for (&s, c) in sums {
                for (k, w) in ways.iter().enumerate().take(d - t + 1) {
                    *next[t + k].entry(s + k as i128 * u).or_default() += c * w;
                }
            }
        }
        dp = next;
    }
    Ok((dp.swap_remove(d), l))
}

/// Exact `Pr[x . v = w]` for `x` uniform over weight-`d` 0/1 vectors.
pub fn regular_exact_probability(v: &[Rational64], d: usize, w: Rational64) -> Result<BigRational> {
    let (counts, l) = regular_counts(v, d)?;
    let hits = scale_target(w, l)
        .and_then(|t| counts.get(&t).cloned())
        .unwrap_or_default();
    let total = binomial(BigUint::from(v.len()), BigUint::from(d));
    Ok(BigRational::new(BigInt::from(hits), BigInt::from(total)))
}

/// The non-forbidden target with the largest exact probability, if any value
/// other than `d` times a most common entry is reachable.
pub fn regular_worst_target(v: &[Rational64], d: usize) -> Result<Option<Rational64>> {
    let (counts, l) = regular_counts(v, d)?;
    let mut ranked: Vec<(&i128, &BigUint)> = counts.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    Ok(ranked
        .into_iter()
        .map(|(&s, _)| Rational64::new(s as i64, l))
        .find(|&w| check_regular(v, d, w).is_ok()))
}

fn regular_bound(n: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(2)) + BigRational::new(BigInt::from(d * d), BigInt::from(n))
}

/// Monte Carlo version of [`probe_lo_regular`] regardless of `N`.
pub fn probe_lo_regular_mc(v: &[Rational64], d: usize, w: Rational64, samples: usize, seed: Seed) -> Result<ProbeReport> {
    check_regular(v, d, w)?;
    let n = v.len();
    let bound = regular_bound(n, d).to_f64().unwrap_or(f64::INFINITY);
    let l = common_denominator(v)?;
    let Some(target) = scale_target(w, l) else {
        return Ok(ProbeReport::sampled(0, samples, bound));
    };
    let scaled: Vec<i128> = v.iter().map(|&x| scale_by(x, l)).collect();
    let hits = batched_hits(samples, seed, |rng| {
        index::sample(rng, n, d).into_iter().map(|i| scaled[i]).sum::<i128>() == target
    });
    Ok(ProbeReport::sampled(hits, samples, bound))
}

/// Probes `Pr[x . v = w] <= 1/2 + d^2/N` for `x` uniform over weight-`d` 0/1
/// vectors, under `d <= sqrt(N/2)` and `w != d a` for a most common entry
/// `a`. Exact when `N <= EXACT_MAX_N`, otherwise [`REGULAR_MC_SAMPLES`]
/// samples.
pub fn probe_lo_regular(v: &[Rational64], d: usize, w: Rational64, seed: Seed) -> Result<ProbeReport> {
    check_regular(v, d, w)?;
    let n = v.len();
    if n > EXACT_MAX_N {
        return probe_lo_regular_mc(v, d, w, REGULAR_MC_SAMPLES, seed);
    }
    let exact = regular_exact_probability(v, d, w)?;
    let bound = regular_bound(n, d);
    Ok(ProbeReport {
        empirical_prob: exact.to_f64().unwrap_or(f64::NAN),
        bound: bound.to_f64().unwrap_or(f64::INFINITY),
        samples: 0,
        hits: 0,
        three_sigma: 0.0,
        pass: Some(exact <= bound),
        constant_estimate: None,
        exact: Some(exact.to_string()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseProbeCase {
    pub family: String,
    pub p: f64,
    pub v: Vec<Rational64>,
    /// Most likely value of `v^T z`.
    pub target: Rational64,
}

/// The sparse probe grid: `{all ones, alternating +-1, random +-{1,2}}` at
/// each `m` in `sizes` and `p` in `{0.1, 0.3, 0.5}`, keeping `mp >= 9`, each
/// aimed at its most likely value.
pub fn sparse_probe_grid(sizes: &[usize], seed: Seed) -> Result<Vec<SparseProbeCase>> {
    let mut rng = seed.rng();
    let mut cases = Vec::new();
    for &m in sizes {
        let random: Vec<Rational64> = (0..m)
            .map(|_| {
                let mag = rng.random_range(1..=2i64);
                Rational64::from_integer(if rng.random::<bool>() { mag } else { -mag })
            })
            .collect();
        let families = [
            ("ones", vec![Rational64::from_integer(1); m]),
            (
                "alternating",
                (0..m).map(|i| Rational64::from_integer(if i % 2 == 0 { 1 } else { -1 })).collect(),
            ),
            ("random_pm12", random),
        ];
        for (family, v) in families {
            for p in [0.1, 0.3, 0.5] {
                if m as f64 * p < 9.0 {
                    continue;
                }
                let (target, _) = lo_sparse_mode(&v, p)?;
                cases.push(SparseProbeCase {
                    family: format!("{family}_m{m}"),
                    p,
                    v: v.clone(),
                    target,
                });
            }
        }
    }
    Ok(cases)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularProbeCase {
    pub v: Vec<Rational64>,
    pub d: usize,
    /// Most likely allowed target.
    pub w: Rational64,
}

/// Random weight-`d` probe cases with `N` in `[20, EXACT_MAX_N]`, a dominant
/// value, a second value and some halves mixed in, each aimed at its most
/// likely allowed target.
pub fn regular_probe_family(count: usize, seed: Seed) -> Result<Vec<RegularProbeCase>> {
    let mut rng = seed.rng();
    let mut cases = Vec::with_capacity(count);
    while cases.len() < count {
        let n = rng.random_range(20..=EXACT_MAX_N);
        let d_max = ((n / 2) as f64).sqrt().floor() as usize;
        let d = rng.random_range(1..=d_max.max(1));
        let a = Rational64::new(rng.random_range(-4..=4), rng.random_range(1..=2));
        let b = Rational64::new(rng.random_range(-4..=4), rng.random_range(1..=2));
        let share = rng.random_range(0.3..0.7);
        let v: Vec<Rational64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                if u < share {
                    a
                } else if u < 0.95 {
                    b
                } else {
                    Rational64::new(rng.random_range(-6..=6), 2)
                }
            })
            .collect();
        if let Some(w) = regular_worst_target(&v, d)? {
            cases.push(RegularProbeCase { v, d, w });
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(values: &[i64]) -> Vec<Rational64> {
        values.iter().map(|&x| Rational64::from_integer(x)).collect()
    }

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    /// `C(n, k) p^k (1-p)^(n-k)` in logs.
    fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
        let ln_choose: f64 = (0..k).map(|i| ((n - i) as f64 / (k - i) as f64).ln()).sum();
        (ln_choose + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()
    }

    #[test]
    fn sparse_ones_matches_binomial_mode() {
        let v = ints(&[1; 100]);
        let rep = probe_lo_sparse(&v, 0.2, r(20), 100_000, Seed::new(1)).unwrap();
        let oracle = binomial_pmf(100, 20, 0.2);
        assert!((oracle - 0.0993).abs() < 1e-3);
        assert!((rep.empirical_prob - oracle).abs() <= rep.three_sigma);
        assert!((rep.bound - 1.0 / 20f64.sqrt()).abs() < 1e-12);
        assert_eq!(rep.pass, Some(true));
    }

    #[test]
    fn sparse_distribution_matches_binomial() {
        let dist = lo_sparse_distribution(&ints(&[1; 30]), 0.3).unwrap();
        for (value, q) in dist {
            let k = value.to_integer() as u64;
            assert!((q - binomial_pmf(30, k, 0.3)).abs() < 1e-12);
        }
        assert_eq!(lo_sparse_mode(&ints(&[1; 100]), 0.2).unwrap().0, r(20));
    }

    #[test]
    fn sparse_guards_and_off_lattice() {
        let v = ints(&[1; 20]);
        assert!(matches!(
            probe_lo_sparse(&v, 0.2, r(4), 10, Seed::new(1)),
            Err(Error::HypothesisViolated(_))
        ));
        let v = ints(&[1; 100]);
        let rep = probe_lo_sparse(&v, 0.5, Rational64::new(1, 3), 1000, Seed::new(1)).unwrap();
        assert_eq!(rep.hits, 0);
        assert_eq!(rep.empirical_prob, 0.0);
    }

    #[test]
    fn sparse_is_reproducible() {
        let v = ints(&[1, -1, 2, 2, -1].repeat(20));
        let a = probe_lo_sparse(&v, 0.3, r(3), 10_000, Seed::new(9)).unwrap();
        let b = probe_lo_sparse(&v, 0.3, r(3), 10_000, Seed::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quadratic_examples() {
        let zero = vec![vec![r(0); 10]; 10];
        let rep = probe_lo_quadratic(&zero, 0.3, r(0), 1000, Seed::new(1)).unwrap();
        assert_eq!(rep.empirical_prob, 1.0);
        assert_eq!(rep.pass, None);

        let id: Vec<Vec<Rational64>> = (0..100).map(|i| (0..100).map(|j| r((i == j) as i64)).collect()).collect();
        let rep = probe_lo_quadratic(&id, 0.3, r(0), 2000, Seed::new(2)).unwrap();
        assert_eq!(rep.hits, 0);

        let ones = vec![vec![r(1); 100]; 100];
        let rep = probe_lo_quadratic(&ones, 0.3, r(900), 50_000, Seed::new(3)).unwrap();
        let oracle = binomial_pmf(100, 30, 0.3);
        assert!((rep.empirical_prob - oracle).abs() <= rep.three_sigma);
        assert!((rep.bound - 30f64.powf(-0.25)).abs() < 1e-12);
        assert!(rep.constant_estimate.is_some());
    }

    #[test]
    fn regular_worked_examples() {
        let mut v = ints(&[1; 51]);
        v.extend(ints(&[2; 49]));
        let exact = regular_exact_probability(&v, 2, r(3)).unwrap();
        assert_eq!(exact, BigRational::new(BigInt::from(2499), BigInt::from(4950)));
        let rep = probe_lo_regular(&v, 2, r(3), Seed::new(1)).unwrap();
        assert_eq!(rep.pass, Some(true));
        assert!((rep.bound - 0.54).abs() < 1e-12);

        let mut v = ints(&[1; 50]);
        v.extend(ints(&[-1; 50]));
        let exact = regular_exact_probability(&v, 2, r(0)).unwrap();
        assert_eq!(exact, BigRational::new(BigInt::from(2500), BigInt::from(4950)));
    }

    #[test]
    fn regular_guards() {
        let v = ints(&[1; 50]);
        assert!(matches!(
            probe_lo_regular(&v, 3, r(3), Seed::new(1)),
            Err(Error::ForbiddenTarget { .. })
        ));
        assert!(matches!(
            probe_lo_regular(&v, 6, r(1), Seed::new(1)),
            Err(Error::HypothesisViolated(_))
        ));
        let mut tie = ints(&[1; 50]);
        tie.extend(ints(&[-1; 50]));
        assert!(probe_lo_regular(&tie, 2, r(-2), Seed::new(1)).is_err());
    }

    #[test]
    fn regular_exact_agrees_with_monte_carlo() {
        let mut v = ints(&[1; 30]);
        v.extend(ints(&[3; 25]));
        v.push(Rational64::new(1, 2));
        let exact = probe_lo_regular(&v, 3, r(5), Seed::new(1)).unwrap();
        let mc = probe_lo_regular_mc(&v, 3, r(5), 50_000, Seed::new(2)).unwrap();
        assert!((exact.empirical_prob - mc.empirical_prob).abs() <= mc.three_sigma);
    }

    #[test]
    fn regular_exact_matches_enumeration() {
        let v = vec![r(1), r(1), r(2), Rational64::new(1, 2), r(-1), r(1), r(0), r(2), r(1)];
        for w in [r(2), r(3), Rational64::new(5, 2)] {
            let mut hit = 0;
            let mut total = 0;
            for mask in 0u32..(1 << v.len()) {
                if mask.count_ones() == 2 {
                    total += 1;
                    let s: Rational64 = (0..v.len()).filter(|&i| mask >> i & 1 == 1).map(|i| v[i]).sum();
                    hit += (s == w) as i64;
                }
            }
            let exact = regular_exact_probability(&v, 2, w).unwrap();
            assert_eq!(exact, BigRational::new(BigInt::from(hit), BigInt::from(total)));
        }
    }

    #[test]
    fn grid_shapes() {
        let grid = sparse_probe_grid(&[40, 100], Seed::new(1)).unwrap();
        // m = 40 keeps only p in {0.3, 0.5}
        assert_eq!(grid.len(), 3 * 2 + 3 * 3);
        let family = regular_probe_family(5, Seed::new(1)).unwrap();
        assert_eq!(family.len(), 5);
        for case in &family {
            assert!(2 * case.d * case.d <= case.v.len());
        }
    }
}
