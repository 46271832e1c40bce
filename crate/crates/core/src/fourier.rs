//! Boolean Fourier analysis of signed-delta functions of bitstring tuples.
//!
//! For a pair of t-tuples (x_1..x_t), (x'_1..x'_t) the signed-delta function
//! f = sum_l (delta_{x_l} - delta_{x'_l}) has Fourier coefficients
//! f_hat(y) = E_x p_y(x) f(x) with p_y(x) = (-1)^{y.x}. The size of the
//! Fourier support governs the probability that a random Z-string
//! distinguishes the two tuples, which in turn controls the eigenvalues of
//! the ideal auxiliary walk's moment operator.
//!
//! All coefficients are kept as the exact integers 2^n * f_hat(y), so support
//! counting never depends on floating-point ties.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::stats::{self, wilson_ci};
use crate::{par, rng};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

/// Largest n for which support counting uses a dense fast transform.
const FWHT_MAX_N: usize = 24;
/// Stream id for sampled Fourier experiments.
const STREAM_FOURIER: u64 = 1;

/// A pair of t-tuples of n-bit strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TuplePair {
    n: usize,
    first: Vec<BitString>,
    second: Vec<BitString>,
}

impl TuplePair {
    pub fn new(first: Vec<BitString>, second: Vec<BitString>) -> Result<Self> {
        if first.is_empty() || first.len() != second.len() {
            return Err(Error::Input(format!(
                "tuple lengths must match and be >= 1, got {} and {}",
                first.len(),
                second.len()
            )));
        }
        let n = first[0].len();
        if first.iter().chain(&second).any(|b| b.len() != n) {
            return Err(Error::Input("all bitstrings must share one length".into()));
        }
        Ok(Self { n, first, second })
    }

    /// Build a pair from raw packed labels.
    pub fn from_raw(n: usize, first: &[u32], second: &[u32]) -> Result<Self> {
        let conv = |v: &[u32]| -> Result<Vec<BitString>> {
            v.iter().map(|&b| BitString::new(b, n)).collect()
        };
        Self::new(conv(first)?, conv(second)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.first.len()
    }

    pub fn first(&self) -> &[BitString] {
        &self.first
    }

    pub fn second(&self) -> &[BitString] {
        &self.second
    }

    /// Remove the multiset intersection from both tuples.
    ///
    /// The result has no common strings; `build_f` is unchanged. A fully
    /// cancelled pair is returned with empty tuples (r = 0).
    pub fn reduce(&self) -> ReducedPair {
        let mut counts: BTreeMap<BitString, i64> = BTreeMap::new();
        for b in &self.first {
            *counts.entry(*b).or_insert(0) += 1;
        }
        let mut first = Vec::new();
        let mut second = Vec::new();
        for b in &self.second {
            let c = counts.entry(*b).or_insert(0);
            if *c > 0 {
                *c -= 1;
            } else {
                second.push(*b);
            }
        }
        for (b, c) in counts {
            for _ in 0..c {
                first.push(b);
            }
        }
        ReducedPair {
            n: self.n,
            t: self.t(),
            first,
            second,
        }
    }

    /// Reduced length r: t minus the multiset intersection size.
    pub fn reduced_len(&self) -> usize {
        self.reduce().r()
    }
}

/// A pair after common-string removal: tuples of length r with empty
/// multiset intersection. r = 0 iff the original tuples were
/// permutation-related.
#[derive(Clone, Debug)]
pub struct ReducedPair {
    n: usize,
    t: usize,
    first: Vec<BitString>,
    second: Vec<BitString>,
}

impl ReducedPair {
    pub fn r(&self) -> usize {
        self.first.len()
    }

    pub fn original_t(&self) -> usize {
        self.t
    }

    pub fn build_f(&self) -> SignedCounter {
        build_f_from(self.n, &self.first, &self.second)
    }
}

/// Sparse signed integer function f on {0,1}^n; zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedCounter {
    n: usize,
    entries: BTreeMap<u32, i64>,
}

impl SignedCounter {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &BTreeMap<u32, i64> {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// sum_x f(x)^2.
    pub fn norm2sq(&self) -> i64 {
        self.entries.values().map(|v| v * v).sum()
    }

    /// sum_x f(x); zero for any tuple-pair function.
    pub fn total(&self) -> i64 {
        self.entries.values().sum()
    }
}

/// p_y(x) = (-1)^{<y,x> over GF(2)}.
pub fn monomial_eval(y: &BitString, x: &BitString) -> Result<i32> {
    Ok(if y.dot(x)? == 1 { -1 } else { 1 })
}

fn build_f_from(n: usize, first: &[BitString], second: &[BitString]) -> SignedCounter {
    let mut entries: BTreeMap<u32, i64> = BTreeMap::new();
    for b in first {
        *entries.entry(b.bits()).or_insert(0) += 1;
    }
    for b in second {
        *entries.entry(b.bits()).or_insert(0) -= 1;
    }
    entries.retain(|_, v| *v != 0);
    SignedCounter { n, entries }
}

/// f = sum_l (delta_{x_l} - delta_{x'_l}).
pub fn build_f(pair: &TuplePair) -> SignedCounter {
    build_f_from(pair.n, &pair.first, &pair.second)
}

/// Exact integer 2^n * f_hat(y) = sum_{x in supp f} f(x) p_y(x).
pub fn fourier_coefficient(f: &SignedCounter, y: &BitString) -> Result<i64> {
    if y.len() != f.n {
        return Err(Error::Input("dimension mismatch".into()));
    }
    let yb = y.bits();
    Ok(f.entries
        .iter()
        .map(|(&x, &v)| if (x & yb).count_ones() & 1 == 1 { -v } else { v })
        .sum())
}

/// In-place Walsh-Hadamard transform: data[y] <- sum_x (-1)^{y.x} data[x].
pub fn fwht_i64(data: &mut [i64]) {
    debug_assert!(data.len().is_power_of_two());
    let mut h = 1;
    while h < data.len() {
        for chunk in data.chunks_exact_mut(2 * h) {
            let (a, b) = chunk.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
}

/// Exact Fourier support data for a signed-delta function.
#[derive(Clone, Debug, Serialize)]
pub struct FourierReport {
    pub n: usize,
    /// |{y : f_hat(y) != 0}|.
    pub support_size: u64,
    /// support_size / 2^n.
    pub distinguishing_prob: f64,
    /// 1 - distinguishing_prob = Pr_y[f_hat(y) = 0].
    pub zero_prob: f64,
    /// Histogram over the exact integers 2^n * f_hat(y).
    pub coeff_histogram: BTreeMap<i64, u64>,
}

impl FourierReport {
    fn from_histogram(n: usize, coeff_histogram: BTreeMap<i64, u64>) -> Self {
        let total = 1u64 << n;
        let zeros = coeff_histogram.get(&0).copied().unwrap_or(0);
        let support_size = total - zeros;
        FourierReport {
            n,
            support_size,
            distinguishing_prob: support_size as f64 / total as f64,
            zero_prob: zeros as f64 / total as f64,
            coeff_histogram,
        }
    }
}

fn check_report_capacity(n: usize) -> Result<()> {
    if n > 30 {
        return Err(Error::Capacity(format!(
            "support enumeration requires n <= 30, got {n}"
        )));
    }
    Ok(())
}

/// Support count by direct evaluation at every y from the sparse support.
pub fn support_report_sparse(f: &SignedCounter) -> Result<FourierReport> {
    check_report_capacity(f.n)?;
    let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
    for y in 0u64..(1u64 << f.n) {
        let yb = y as u32;
        let c: i64 = f
            .entries
            .iter()
            .map(|(&x, &v)| if (x & yb).count_ones() & 1 == 1 { -v } else { v })
            .sum();
        *hist.entry(c).or_insert(0) += 1;
    }
    Ok(FourierReport::from_histogram(f.n, hist))
}

/// Support count via a dense fast Walsh-Hadamard transform.
pub fn support_report_fwht(f: &SignedCounter) -> Result<FourierReport> {
    if f.n > FWHT_MAX_N {
        return Err(Error::Capacity(format!(
            "dense transform requires n <= {FWHT_MAX_N}, got {}",
            f.n
        )));
    }
    let mut data = vec![0i64; 1 << f.n];
    for (&x, &v) in &f.entries {
        data[x as usize] = v;
    }
    fwht_i64(&mut data);
    let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
    for c in data {
        *hist.entry(c).or_insert(0) += 1;
    }
    Ok(FourierReport::from_histogram(f.n, hist))
}

/// Exact support size and coefficient histogram.
///
/// Uses the dense transform where it fits and the sparse route beyond.
pub fn support_report(f: &SignedCounter) -> Result<FourierReport> {
    check_report_capacity(f.n)?;
    if f.n <= FWHT_MAX_N {
        support_report_fwht(f)
    } else {
        support_report_sparse(f)
    }
}

/// Fast path used by enumerations: support size only, straight from raw labels.
pub(crate) fn support_size_raw(n: usize, first: &[u32], second: &[u32]) -> u64 {
    let size = 1usize << n;
    // dense FWHT costs size*n; the direct scan costs size*(2t). FWHT wins
    // whenever the tuples hold more strings than n.
    if size <= 1 << FWHT_MAX_N && first.len() + second.len() >= n {
        let mut data = vec![0i64; size];
        for &x in first {
            data[x as usize] += 1;
        }
        for &x in second {
            data[x as usize] -= 1;
        }
        fwht_i64(&mut data);
        return data.iter().filter(|&&c| c != 0).count() as u64;
    }
    let mut support = 0u64;
    for y in 0..size as u64 {
        let yb = y as u32;
        let mut c = 0i64;
        for &x in first {
            c += if (x & yb).count_ones() & 1 == 1 { -1 } else { 1 };
        }
        for &x in second {
            c -= if (x & yb).count_ones() & 1 == 1 { -1 } else { 1 };
        }
        if c != 0 {
            support += 1;
        }
    }
    support
}

/// Result of checking the Parseval lower bound on one pair.
#[derive(Clone, Debug, Serialize)]
pub struct ParsevalCheck {
    pub r: usize,
    pub support_size: u64,
    /// Distinguishing probability support/2^n.
    pub prob: f64,
    /// The lower bound 1/(2r).
    pub bound: f64,
    pub holds: bool,
}

/// Distinguishing probability vs the 1/(2r) Parseval bound.
pub fn parseval_check(pair: &TuplePair) -> Result<ParsevalCheck> {
    let reduced = pair.reduce();
    let r = reduced.r();
    if r == 0 {
        return Err(Error::Input(
            "degenerate pair: tuples are permutation-related, f = 0".into(),
        ));
    }
    let report = support_report(&reduced.build_f())?;
    // exact comparison: support * 2r >= 2^n
    let holds = report.support_size as u128 * (2 * r as u128) >= 1u128 << pair.n;
    Ok(ParsevalCheck {
        r,
        support_size: report.support_size,
        prob: report.distinguishing_prob,
        bound: 1.0 / (2.0 * r as f64),
        holds,
    })
}

/// Visit every nondecreasing t-tuple over {0..base-1} together with its
/// orbit size under permutations (the multinomial weight t!/prod(mult!)).
pub fn for_each_sorted_tuple<F>(base: u32, t: usize, mut visit: F)
where
    F: FnMut(&[u32], u128),
{
    fn factorial(k: u64) -> u128 {
        (2..=k as u128).product::<u128>().max(1)
    }
    fn rec<F: FnMut(&[u32], u128)>(
        base: u32,
        t: usize,
        start: u32,
        buf: &mut Vec<u32>,
        visit: &mut F,
    ) {
        if buf.len() == t {
            // weight = t! / prod over runs of (run length)!
            let mut w = factorial(t as u64);
            let mut i = 0;
            while i < buf.len() {
                let mut j = i;
                while j < buf.len() && buf[j] == buf[i] {
                    j += 1;
                }
                w /= factorial((j - i) as u64);
                i = j;
            }
            visit(buf, w);
            return;
        }
        for v in start..base {
            buf.push(v);
            rec(base, t, v, buf, visit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(t);
    rec(base, t, 0, &mut buf, &mut visit);
}

fn check_exhaustive_capacity(n: usize, t: usize) -> Result<()> {
    if 2 * n * t > 24 {
        return Err(Error::Capacity(format!(
            "exhaustive pair enumeration requires 2^(2nt) <= 2^24, got n={n}, t={t}"
        )));
    }
    Ok(())
}

/// How tuple pairs are drawn for support-fraction experiments.
#[derive(Clone, Copy, Debug)]
pub enum SampleMode {
    /// Enumerate all 2^(2nt) pairs via canonical sorted tuples with weights.
    Exhaustive,
    /// Uniform sampling with the given trial count and master seed.
    Sampled { trials: u64, seed: u64 },
}

/// Fraction of pairs whose f has Fourier support < A, with the paper-style
/// counting bound t! 2^((n+1)A) 2^(-nt).
#[derive(Clone, Debug, Serialize)]
pub struct LowSupportReport {
    pub n: usize,
    pub t: usize,
    pub threshold: u64,
    pub fraction: f64,
    /// Wilson interval in sampled mode; (fraction, fraction) when exhaustive.
    pub ci_low: f64,
    pub ci_high: f64,
    pub exact: bool,
    pub trials: u64,
    pub seed: u64,
    /// t! 2^((n+1)A) 2^(-nt), reported even when it exceeds 1.
    pub paper_bound: f64,
    pub paper_bound_vacuous: bool,
}

/// Fraction of tuple pairs with Fourier support smaller than `threshold`.
pub fn low_support_fraction(
    n: usize,
    t: usize,
    threshold: u64,
    mode: SampleMode,
) -> Result<LowSupportReport> {
    if n == 0 || n > 30 || t == 0 {
        return Err(Error::Input(format!("bad parameters n={n}, t={t}")));
    }
    let ln_bound = stats::ln_factorial(t as u64)
        + ((n as f64 + 1.0) * threshold as f64 - (n * t) as f64) * std::f64::consts::LN_2;
    let paper_bound = ln_bound.exp();
    let (fraction, ci, trials, seed, exact) = match mode {
        SampleMode::Exhaustive => {
            check_exhaustive_capacity(n, t)?;
            let base = 1u32 << n;
            let mut tuples: Vec<(Vec<u32>, u128)> = Vec::new();
            for_each_sorted_tuple(base, t, |tup, w| tuples.push((tup.to_vec(), w)));
            let mut low: u128 = 0;
            for (a, wa) in &tuples {
                for (b, wb) in &tuples {
                    if support_size_raw(n, a, b) < threshold {
                        low += wa * wb;
                    }
                }
            }
            let total = (1u128 << (n * t)) * (1u128 << (n * t));
            let frac = low as f64 / total as f64;
            (frac, (frac, frac), 0, 0, true)
        }
        SampleMode::Sampled { trials, seed } => {
            if trials == 0 {
                return Err(Error::Input("trials must be >= 1".into()));
            }
            let hits: u64 = par::run_trials(trials, |trial| {
                let mut rng = rng::stream(seed, trial, STREAM_FOURIER);
                let (first, second) = sample_pair(n, t, &mut rng);
                u64::from(support_size_raw(n, &first, &second) < threshold)
            })
            .iter()
            .sum();
            let frac = hits as f64 / trials as f64;
            (frac, wilson_ci(hits, trials, 1.96), trials, seed, false)
        }
    };
    Ok(LowSupportReport {
        n,
        t,
        threshold,
        fraction,
        ci_low: ci.0,
        ci_high: ci.1,
        exact,
        trials,
        seed,
        paper_bound,
        paper_bound_vacuous: paper_bound >= 1.0,
    })
}

fn sample_pair<R: Rng>(n: usize, t: usize, rng: &mut R) -> (Vec<u32>, Vec<u32>) {
    let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let draw = |rng: &mut R| (0..t).map(|_| rng.gen::<u32>() & mask).collect::<Vec<_>>();
    (draw(rng), draw(rng))
}

/// Monte Carlo tail estimate for the open low-support conjecture.
#[derive(Clone, Debug, Serialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub t: usize,
    pub poly_exponent: f64,
    /// 2^n / n^c.
    pub threshold: f64,
    pub tail_prob_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub support_min: u64,
    pub support_median: u64,
    pub support_max: u64,
    pub trials: u64,
    pub seed: u64,
}

/// Estimate Pr[support(f_hat) < 2^n / n^c] over uniform tuple draws.
pub fn conjecture1_estimate(
    n: usize,
    t: usize,
    poly_exponent: f64,
    trials: u64,
    seed: u64,
) -> Result<ConjectureReport> {
    if n == 0 || n > 30 || t == 0 || trials == 0 {
        return Err(Error::Input(format!(
            "bad parameters n={n}, t={t}, trials={trials}"
        )));
    }
    let threshold = (1u64 << n) as f64 / (n as f64).powf(poly_exponent);
    let mut supports: Vec<u64> = par::run_trials(trials, |trial| {
        let mut rng = rng::stream(seed, trial, STREAM_FOURIER);
        let (first, second) = sample_pair(n, t, &mut rng);
        support_size_raw(n, &first, &second)
    });
    let hits = supports.iter().filter(|&&s| (s as f64) < threshold).count() as u64;
    supports.sort_unstable();
    let (ci_low, ci_high) = wilson_ci(hits, trials, 1.96);
    Ok(ConjectureReport {
        n,
        t,
        poly_exponent,
        threshold,
        tail_prob_estimate: hits as f64 / trials as f64,
        ci_low,
        ci_high,
        support_min: supports[0],
        support_median: supports[supports.len() / 2],
        support_max: supports[supports.len() - 1],
        trials,
        seed,
    })
}
