//! One-shot verification suite: eleven numbered checks that exercise every
//! module against its oracles. Used both by the `verify` CLI subcommand and
//! by the `acceptance` integration test target.

use serde::Serialize;

use crate::bounds::{
    binomial_mixing_exponential, deep_splitting_bound, theorem3_rhs, thm1_delta_threshold,
    unitary_bracket, BoundParams, MomentVariant,
};
use crate::dense_sim::{
    haar_exact_moment, mc_moment_rqc, psd_domination_check, untouched_qubit_probability,
    StateVector,
};
use crate::f2::{enumerate_group, lemma1_bound, walk_spectral_gap, F2Matrix, GroupTable};
use crate::fourier::{
    conjecture1_estimate, for_each_sorted_tuple, parseval_check, TuplePair,
};
use crate::phase_walk::{exact_moment_ideal, ideal_spectrum, mc_moment_ideal};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:28} {}  [{}]",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.details
        )
    }
}

/// 1. Depth-50 two-qubit circuits reproduce the exact Haar moments
/// 1/binom(3+t, t) within 3 standard errors for t in {1,2,3}.
pub fn criterion_1(seed: u64) -> CriterionOutcome {
    let psi = StateVector::zero_state(2).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for t in 1..=3u32 {
        let est = mc_moment_rqc(2, 50, t, &psi, 5000, seed).unwrap();
        let exact = haar_exact_moment(4, t).unwrap();
        let dev = (est.estimate - exact).abs();
        let ok = dev <= 3.0 * est.stderr;
        passed &= ok;
        parts.push(format!(
            "t={t}: {:.5} vs {:.5} ({:+.2}σ)",
            est.estimate,
            exact,
            (est.estimate - exact) / est.stderr
        ));
    }
    CriterionOutcome {
        id: 1,
        name: "haar moment recovery",
        passed,
        details: parts.join("; "),
    }
}

/// 2. Exhaustive Parseval bound: for every canonical tuple pair at
/// n <= 3, t <= 3, distinguishing probability >= 1/(2r). Zero violations.
pub fn criterion_2() -> CriterionOutcome {
    let mut checked: u64 = 0;
    let mut violations: u64 = 0;
    let mut min_margin = f64::MAX;
    for n in 1..=3usize {
        for t in 1..=3usize {
            let base = 1u32 << n;
            let mut tuples: Vec<Vec<u32>> = Vec::new();
            for_each_sorted_tuple(base, t, |tup, _| tuples.push(tup.to_vec()));
            for a in &tuples {
                for b in &tuples {
                    let pair = TuplePair::from_raw(n, a, b).unwrap();
                    if pair.reduced_len() == 0 {
                        continue; // permutation-related, f = 0
                    }
                    let chk = parseval_check(&pair).unwrap();
                    checked += 1;
                    if !chk.holds {
                        violations += 1;
                    }
                    min_margin = min_margin.min(chk.prob - chk.bound);
                }
            }
        }
    }
    CriterionOutcome {
        id: 2,
        name: "parseval bound exhaustive",
        passed: violations == 0,
        details: format!(
            "{checked} pairs, {violations} violations, min margin {min_margin:.4}"
        ),
    }
}

/// 3. Ideal-walk oracle agreement: the n=1, t=1 closed form
/// 1/2 + 2^-(m+1) holds exactly for m <= 20, and Monte Carlo matches the
/// exact moment within 3σ on a small (n,t,m) grid.
pub fn criterion_3(seed: u64) -> CriterionOutcome {
    let mut passed = true;
    let mut worst_exact: f64 = 0.0;
    for m in 0..=20u64 {
        let exact = exact_moment_ideal(1, m, 1).unwrap();
        let closed = 0.5 + 0.5f64.powi(m as i32 + 1);
        let dev = (exact - closed).abs();
        worst_exact = worst_exact.max(dev);
        passed &= dev < 1e-15;
    }
    let mut worst_sigma: f64 = 0.0;
    for n in 1..=2usize {
        for t in 1..=2u32 {
            for m in 0..=10u64 {
                let exact = exact_moment_ideal(n, m, t).unwrap();
                let mc = mc_moment_ideal(n, m, t, 20000, seed).unwrap();
                let sig = if mc.stderr > 0.0 {
                    (mc.estimate - exact).abs() / mc.stderr
                } else {
                    if (mc.estimate - exact).abs() > 1e-12 { f64::MAX } else { 0.0 }
                };
                worst_sigma = worst_sigma.max(sig);
                passed &= sig <= 3.0;
            }
        }
    }
    CriterionOutcome {
        id: 3,
        name: "ideal-walk oracle agreement",
        passed,
        details: format!(
            "closed-form dev {worst_exact:.1e}, worst MC deviation {worst_sigma:.2}σ"
        ),
    }
}

/// 4. Spectral gap of the ideal walk: second-highest eigenvalue is exactly
/// 1 - 2^-n for (n,t) in {(2,2), (3,4)}, realized by a support-1 (parity)
/// pair.
pub fn criterion_4() -> CriterionOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (n, t) in [(2usize, 2u32), (3, 4)] {
        let spec = ideal_spectrum(n, t).unwrap();
        let expect = 1.0 - 0.5f64.powi(n as i32);
        let second = spec.second.unwrap_or(f64::NAN);
        let ok = second == expect && spec.min_nonzero_support == Some(1);
        passed &= ok;
        parts.push(format!(
            "(n={n},t={t}): second {second} vs {expect}, min support {:?}",
            spec.min_nonzero_support
        ));
    }
    CriterionOutcome {
        id: 4,
        name: "ideal spectrum gap",
        passed,
        details: parts.join("; "),
    }
}

fn matrix_power_distribution(table: &GroupTable, k: u64) -> Vec<f64> {
    let size = table.len();
    // one-step kernel as a dense column-stochastic matrix
    let mut p = vec![0.0f64; size * size];
    for &(gi, w) in table.step_kernel() {
        let g = &table.elements()[gi];
        for (from, m) in table.elements().iter().enumerate() {
            let to = table.index_of(&g.mul(m)).unwrap();
            p[to * size + from] += w;
        }
    }
    let matmul = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0f64; size * size];
        for i in 0..size {
            for l in 0..size {
                let a_il = a[i * size + l];
                if a_il == 0.0 {
                    continue;
                }
                for j in 0..size {
                    c[i * size + j] += a_il * b[l * size + j];
                }
            }
        }
        c
    };
    // binary exponentiation of the kernel
    let mut result: Option<Vec<f64>> = None;
    let mut base = p;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => matmul(&r, &base),
            });
        }
        e >>= 1;
        if e > 0 {
            base = matmul(&base, &base);
        }
    }
    let power = result.unwrap_or_else(|| {
        let mut id = vec![0.0; size * size];
        for i in 0..size {
            id[i * size + i] = 1.0;
        }
        id
    });
    let start = table.index_of(&F2Matrix::identity(table.n())).unwrap();
    (0..size).map(|i| power[i * size + start]).collect()
}

fn tv_uniform(probs: &[f64]) -> f64 {
    let u = 1.0 / probs.len() as f64;
    0.5 * probs.iter().map(|p| (p - u).abs()).sum::<f64>()
}

/// 5. Mixing bound at n=3: exact walk distribution satisfies
/// tv(k) <= 2^12 (1 - 1/(500·3^5))^k at every k where the bound is <= 1
/// (the first such k is ~10^6; tv is checked there via kernel powers and
/// monotonicity on the convolution prefix), and the measured spectral gap
/// clears 1/(500·3^5).
pub fn criterion_5() -> CriterionOutcome {
    let table = enumerate_group(3).unwrap();
    // prefix: tv is non-increasing, and the bound exceeds 1 throughout
    // (so there is nothing to check against it yet)
    let mut prefix_ok = true;
    let mut prev_tv = crate::f2::exact_walk_distribution(&table, 0).tv_to_uniform();
    for k in 1..=64u64 {
        let tv = crate::f2::exact_walk_distribution(&table, k).tv_to_uniform();
        prefix_ok &= tv <= prev_tv + 1e-12;
        prev_tv = tv;
        if lemma1_bound(3, k) <= 1.0 {
            prefix_ok &= tv <= lemma1_bound(3, k);
        }
    }
    let eps = 1.0 / (500.0 * 3f64.powi(5));
    let k0 = ((12.0 * std::f64::consts::LN_2) / -(1.0 - eps).ln()).ceil() as u64;
    let mut tail_ok = lemma1_bound(3, k0) <= 1.0 && lemma1_bound(3, k0 - 1) > 1.0;
    let mut tv_at_k0 = f64::NAN;
    for k in [k0, 2 * k0] {
        let probs = matrix_power_distribution(&table, k);
        let tv = tv_uniform(&probs);
        if k == k0 {
            tv_at_k0 = tv;
        }
        tail_ok &= tv <= lemma1_bound(3, k);
    }
    let (second, gap) = walk_spectral_gap(&table).unwrap();
    let gap_ok = gap >= eps;
    CriterionOutcome {
        id: 5,
        name: "lemma 1 mixing bound",
        passed: prefix_ok && tail_ok && gap_ok,
        details: format!(
            "k0={k0}, tv(k0)={tv_at_k0:.2e} <= 1, gap {gap:.4} (>= {eps:.2e}), second {second:.4}"
        ),
    }
}

/// 6. PSD domination M(ζ,t) - M(μ_H,t) >= -1e-8 for t in {1,2,3}; the Haar
/// operator is a projector of rank t!.
pub fn criterion_6() -> CriterionOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (t, rank) in [(1u32, 1usize), (2, 2), (3, 6)] {
        let rep = psd_domination_check(t).unwrap();
        let ok = rep.holds
            && rep.haar_projector_residual < 1e-9
            && rep.haar_rank == rank
            && rep.invariance_residual < 1e-8;
        passed &= ok;
        parts.push(format!(
            "t={t}: min eig {:.1e}, rank {} (want {rank}), proj res {:.1e}",
            rep.min_eig, rep.haar_rank, rep.haar_projector_residual
        ));
    }
    CriterionOutcome {
        id: 6,
        name: "psd domination",
        passed,
        details: parts.join("; "),
    }
}

/// 7. Moment-bound consistency: every MC moment at n in {4,5,6},
/// t in {1,2}, d up to 500 sits below the eq8 bound plus 3σ; vacuous rows
/// (bound >= 1, the norm for these small n) are counted and reported.
pub fn criterion_7(seed: u64) -> CriterionOutcome {
    let mut passed = true;
    let mut rows = 0u32;
    let mut vacuous = 0u32;
    let mut worst_margin = f64::MAX;
    for n in 4..=6usize {
        let psi = StateVector::zero_state(n).unwrap();
        for t in 1..=2u32 {
            for d in (0..=500u64).step_by(100) {
                let est = mc_moment_rqc(n, d, t, &psi, 800, seed).unwrap();
                let rhs = theorem3_rhs(n as u32, d as f64, t as f64, MomentVariant::Eq8)
                    .unwrap();
                rows += 1;
                if rhs.vacuous {
                    vacuous += 1;
                }
                let margin = rhs.value.min(1.0) + 3.0 * est.stderr - est.estimate;
                worst_margin = worst_margin.min(margin);
                passed &= est.estimate <= rhs.value + 3.0 * est.stderr;
            }
        }
    }
    CriterionOutcome {
        id: 7,
        name: "theorem3 bound consistency",
        passed,
        details: format!(
            "{rows} rows, {vacuous} vacuous (expected at these n), min slack {worst_margin:.3}"
        ),
    }
}

/// 8. Binomial mixing composition: exact sum equals the closed form within
/// 1e-12 relative and sits below the convexity weakening across the grid.
pub fn criterion_8() -> CriterionOutcome {
    let mut passed = true;
    let mut worst_rel: f64 = 0.0;
    for &lambda in &[0.1, 0.5, 1.0] {
        for &d in &[10u64, 100, 1000] {
            for &c in &[10.0, 1000.0] {
                let rep = binomial_mixing_exponential(d, lambda, c).unwrap();
                let closed = rep.closed_form.unwrap();
                let rel = (rep.exact_sum - closed).abs() / closed;
                worst_rel = worst_rel.max(rel);
                passed &= rel <= 1e-12;
                passed &= rep.exact_sum <= rep.simplified.unwrap() * (1.0 + 1e-12);
            }
        }
    }
    CriterionOutcome {
        id: 8,
        name: "binomial mixing composition",
        passed,
        details: format!("18 grid points, worst relative error {worst_rel:.1e}"),
    }
}

/// 9. Coupon collector: empirical untouched-qubit probability at n=4 stays
/// below the exact union bound (+3σ), which stays below the n(1-1/n)^d
/// form.
pub fn criterion_9(seed: u64) -> CriterionOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for d in [4u64, 8, 16] {
        let rep = untouched_qubit_probability(4, d, 20000, seed).unwrap();
        let ok = rep.empirical <= rep.exact_union_bound + 3.0 * rep.stderr
            && rep.exact_union_bound <= rep.paper_bound;
        passed &= ok;
        parts.push(format!(
            "d={d}: {:.4} <= {:.4} <= {:.4}",
            rep.empirical, rep.exact_union_bound, rep.paper_bound
        ));
    }
    CriterionOutcome {
        id: 9,
        name: "coupon collector",
        passed,
        details: parts.join("; "),
    }
}

/// 10. Formula evaluators: bracket limits at both endpoints and the deep
/// splitting chain on a 100-point (n, d, δ) grid. The headline complexity
/// growth itself is not measurable at desk scale; this criterion certifies
/// the formula layer only.
pub fn criterion_10() -> CriterionOutcome {
    let mut passed = (unitary_bracket(0.0) - 1.0).abs() < 1e-12
        && unitary_bracket(thm1_delta_threshold()).abs() < 1e-12;
    let mut grid = 0u32;
    let mut vacuous = 0u32;
    for n in [8u32, 10, 12, 14, 16] {
        for dm in [1.0, 2.0, 4.0, 8.0] {
            for delta in [0.05, 0.1, 0.2, 0.3, 0.4] {
                grid += 1;
                let mut p = BoundParams::new(n, dm * n as f64, 1.0, delta).unwrap();
                p.k_mix = 2000.0 * (n as f64).powi(7);
                // deep_splitting_bound validates line1 >= line2 internally
                // (up to block-count rounding slack)
                match deep_splitting_bound(&p) {
                    Ok(chain) => {
                        passed &= chain.line2 + 1e-12 >= chain.line3;
                        if chain.vacuous {
                            vacuous += 1;
                        }
                    }
                    Err(_) => passed = false,
                }
            }
        }
    }
    CriterionOutcome {
        id: 10,
        name: "formula limiting behavior",
        passed,
        details: format!("bracket endpoints ok, {grid}-point chain grid, {vacuous} vacuous"),
    }
}

/// 11. Exploratory tail estimates for the open low-support conjecture at
/// n up to 14, t up to 128, 10^4 trials. No pass/fail threshold on the
/// tail itself (the conjecture is open); the criterion checks that the
/// estimates and intervals are produced and internally consistent.
pub fn criterion_11(seed: u64) -> CriterionOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (n, t) in [(12usize, 64usize), (14, 128)] {
        let rep = conjecture1_estimate(n, t, 2.0, 10_000, seed).unwrap();
        let ok = rep.ci_low <= rep.tail_prob_estimate
            && rep.tail_prob_estimate <= rep.ci_high
            && rep.support_min <= rep.support_median
            && rep.support_median <= rep.support_max
            && rep.support_max <= 1 << n;
        passed &= ok;
        parts.push(format!(
            "(n={n},t={t}): tail {:.4} [{:.4},{:.4}], support {}..{}..{}",
            rep.tail_prob_estimate,
            rep.ci_low,
            rep.ci_high,
            rep.support_min,
            rep.support_median,
            rep.support_max
        ));
    }
    CriterionOutcome {
        id: 11,
        name: "conjecture exploratory",
        passed,
        details: parts.join("; "),
    }
}

/// Run the full suite with a master seed.
pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    vec![
        criterion_1(seed),
        criterion_2(),
        criterion_3(seed),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(seed),
        criterion_8(),
        criterion_9(seed),
        criterion_10(),
        criterion_11(seed),
    ]
}
