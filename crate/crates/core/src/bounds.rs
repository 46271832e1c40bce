//! Closed-form complexity lower bounds and the supporting counting
//! arithmetic: linear and square-root growth bounds, the moment-tail
//! Markov/union estimate, epsilon-net sizes, the deep-circuit splitting
//! chain, binomial mixing composition, and a couple of small identities
//! that the simulation modules cross-check numerically.
//!
//! All probability/bound arithmetic is done in natural-log space and
//! converted at the edges; this keeps things finite for n up to 64 and
//! d up to 2^32.
//!
//! One source formula contains an additive term written `n e^{d/n}` with a
//! positive exponent where every other occurrence of the same term reads
//! `n e^{-d/n}`. We implement the negative exponent throughout
//! ([`theorem3_rhs`], [`markov_union_bound`]); the positive variant grows
//! without bound and would make the estimate useless.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::ln_factorial;

/// Which base to use for the logarithms that appear without an explicit
/// base in the source formulas (`log(n)`, `log(1/ε)`, `log(d/δ²)`).
/// Logs written with an explicit base 2 always use base 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogBase {
    Two,
    Natural,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::Two
    }
}

/// Inputs shared by the bound formulas. Constants that the source material
/// leaves unspecified (`K`, `B`, `λ_G`, the `C_i`) get documented defaults
/// below; these defaults are placeholders for exploration, not derived
/// values.
#[derive(Debug, Clone, Serialize)]
pub struct BoundParams {
    pub n: u32,
    pub d: f64,
    pub t: f64,
    pub delta: f64,
    /// Theorem-1-style absolute constant. Default 1.0 (placeholder).
    pub k_const: f64,
    /// Epsilon-net base constant. Default 2.0 (placeholder).
    pub b_const: f64,
    /// Spectral gap of the discrete gate set, in (0, 1]. Default 0.1
    /// (placeholder).
    pub lambda_g: f64,
    /// Corollary constants C1..C4; default to the explicit values from the
    /// continuous-gate case (40000, 16000, 40000, 16000).
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    /// Theorem-2 constants C(G), C'(G). Defaults 40000 and 200 reproduce the
    /// continuous-gate theorem. C(G) appears both in the denominator and in
    /// tilde-delta; we treat those as the same parameter.
    pub c_g: f64,
    pub cprime_g: f64,
    /// Mixing step count k; default 2000·n^7.
    pub k_mix: f64,
    /// |K|, the candidate gate set size for the union bound.
    pub gateset_size: f64,
    pub log_base: LogBase,
}

impl BoundParams {
    pub fn new(n: u32, d: f64, t: f64, delta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("n must be positive".into()));
        }
        if d < 0.0 || t <= 0.0 {
            return Err(Error::Input("d must be >= 0 and t > 0".into()));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Input("delta must lie in [0, 1)".into()));
        }
        let nf = n as f64;
        Ok(Self {
            n,
            d,
            t,
            delta,
            k_const: 1.0,
            b_const: 2.0,
            lambda_g: 0.1,
            c1: 40000.0,
            c2: 16000.0,
            c3: 40000.0,
            c4: 16000.0,
            c_g: 40000.0,
            cprime_g: 200.0,
            k_mix: 2000.0 * nf.powi(7),
            gateset_size: 2.0,
            log_base: LogBase::default(),
        })
    }

    fn validate_constants(&self) -> Result<()> {
        for (name, v) in [
            ("K", self.k_const),
            ("B", self.b_const),
            ("lambda_G", self.lambda_g),
            ("C1", self.c1),
            ("C2", self.c2),
            ("C3", self.c3),
            ("C4", self.c4),
            ("C(G)", self.c_g),
            ("C'(G)", self.cprime_g),
            ("k_mix", self.k_mix),
            ("gateset_size", self.gateset_size),
        ] {
            if !(v > 0.0) {
                return Err(Error::Input(format!("{name} must be strictly positive")));
            }
        }
        if self.lambda_g > 1.0 {
            return Err(Error::Input("lambda_G must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// A single evaluated formula. `vacuous` means the value carries no
/// information: <= 0 for a lower bound, >= 1 for a probability or a
/// moment that is trivially at most 1.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub formula: &'static str,
    pub value: f64,
    pub vacuous: bool,
}

impl BoundReport {
    fn lower_bound(formula: &'static str, value: f64) -> Self {
        Self { formula, value, vacuous: !(value > 0.0) }
    }

    fn probability(formula: &'static str, value: f64) -> Self {
        Self { formula, value, vacuous: !(value < 1.0) }
    }
}

/// Threshold below which the linear-growth bound is non-trivial:
/// δ < sqrt(1 − 2^{−1/2}).
pub fn thm1_delta_threshold() -> f64 {
    (1.0 - 0.5f64.sqrt()).sqrt()
}

/// tilde-δ = (1 − sqrt(1 − δ²)) d / (c n^8 2^n).
fn tilde_delta(d: f64, delta: f64, n: u32, c: f64) -> f64 {
    let nf = n as f64;
    (1.0 - (1.0 - delta * delta).sqrt()) * d / (c * nf.powi(8) * two_pow(nf))
}

fn two_pow(x: f64) -> f64 {
    (x * std::f64::consts::LN_2).exp()
}

/// Shared bracket factor 1 − 2 log₂(1/(1−δ²)).
pub fn unitary_bracket(delta: f64) -> f64 {
    1.0 - 2.0 * (1.0 / (1.0 - delta * delta)).log2()
}

fn thm1_unitary_with(p: &BoundParams, c_denom: f64, c_tilde: f64) -> Result<(BoundReport, f64)> {
    p.validate_constants()?;
    if p.delta >= thm1_delta_threshold() {
        return Err(Error::Domain(format!(
            "delta must be < sqrt(1 - 2^(-1/2)) = {:.6}",
            thm1_delta_threshold()
        )));
    }
    let nf = p.n as f64;
    if p.d > two_pow(nf / 2.0) {
        return Err(Error::Domain("requires d <= 2^(n/2)".into()));
    }
    let bracket = unitary_bracket(p.delta);
    let value = if p.delta == 0.0 {
        // log(1/δ) diverges; the prefactor vanishes in the limit.
        0.0
    } else {
        p.d / (c_denom * nf.powi(9) * p.log_base.log(nf) * (1.0 / p.delta).log2()) * bracket
    };
    let td = tilde_delta(p.d, p.delta, p.n, c_tilde);
    Ok((BoundReport::lower_bound("thm1_unitary", value), td))
}

/// Linear-growth lower bound on C_{tilde-δ}(U) together with tilde-δ.
///
/// Value: d / (K n⁹ log(n) log₂(1/δ)) · (1 − 2 log₂(1/(1−δ²))),
/// tilde-δ = (1 − sqrt(1−δ²)) d / (40000 n⁸ 2ⁿ).
pub fn thm1_unitary_bound(p: &BoundParams) -> Result<(BoundReport, f64)> {
    thm1_unitary_with(p, p.k_const, 40000.0)
}

fn thm1_state_with(p: &BoundParams, c_denom: f64, c_inner: f64) -> Result<BoundReport> {
    p.validate_constants()?;
    if !(p.delta > 0.0 && p.delta < 1.0 / 2f64.sqrt()) {
        return Err(Error::Domain("delta must lie in (0, 1/sqrt(2))".into()));
    }
    let nf = p.n as f64;
    if p.d > two_pow(nf / 2.0) {
        return Err(Error::Domain("requires d <= 2^(n/2)".into()));
    }
    let bracket = nf - (p.d.sqrt() / (c_inner * nf.powi(4))).log2()
        - 2.0 * (1.0 / (1.0 - 2.0 * p.delta * p.delta)).log2();
    let value =
        p.d.sqrt() / (c_denom * nf.powi(4) * (p.d / (p.delta * p.delta)).log2()) * bracket;
    Ok(BoundReport::lower_bound("thm1_state", value))
}

/// Square-root-growth lower bound on C_δ(U|0ⁿ⟩):
/// sqrt(d) / (K n⁴ log₂(d/δ²)) · (n − log₂(sqrt(d)/(200 n⁴)) − 2 log₂(1/(1−2δ²))).
pub fn thm1_state_bound(p: &BoundParams) -> Result<BoundReport> {
    thm1_state_with(p, p.k_const, 200.0)
}

/// Discrete-gate-set version: the same two bounds with C(G) in place of K
/// (in both the denominator and tilde-δ) and C'(G) in place of 200.
pub fn thm2_bounds(p: &BoundParams) -> Result<(BoundReport, f64, BoundReport)> {
    let (ub, td) = thm1_unitary_with(p, p.c_g, p.c_g)?;
    let sb = thm1_state_with(p, p.c_g, p.cprime_g)?;
    Ok((
        BoundReport { formula: "thm2_unitary", ..ub },
        td,
        BoundReport { formula: "thm2_state", ..sb },
    ))
}

/// Union-over-candidates Markov bound on the probability that some circuit
/// of R gates from a size-|K| gate set reaches overlap-squared >= 1 − δ²:
/// |K|^R · moment / (1−δ²)^t, clipped to 1.
pub fn markov_union_bound(
    n: u32,
    t: f64,
    r: f64,
    gateset_size: f64,
    delta: f64,
    moment_value: f64,
) -> Result<BoundReport> {
    let _ = n;
    if !(0.0..=1.0).contains(&moment_value) {
        return Err(Error::Input("moment_value must lie in [0, 1]".into()));
    }
    if gateset_size < 1.0 || r < 0.0 || t <= 0.0 || !(0.0..1.0).contains(&delta) {
        return Err(Error::Input("invalid markov_union_bound parameters".into()));
    }
    let ln_bound =
        r * gateset_size.ln() + moment_value.ln() - t * (1.0 - delta * delta).ln();
    let value = ln_bound.exp().min(1.0);
    Ok(BoundReport::probability("markov_union", value))
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsNetReport {
    pub epsilon: f64,
    pub log2_net_size: f64,
    pub net_size: f64,
    pub effective_delta: f64,
}

/// Net spacing ε = δ²/(2d), net size B^{log(1/ε)}, and the effective
/// robustness sqrt(2)·δ after linear error accumulation over d gates.
pub fn epsnet_and_accumulation(
    delta: f64,
    d: f64,
    b: f64,
    log_base: LogBase,
) -> Result<EpsNetReport> {
    if !(delta > 0.0 && delta < 1.0 / 2f64.sqrt()) {
        return Err(Error::Domain("delta must lie in (0, 1/sqrt(2))".into()));
    }
    if d <= 0.0 || b <= 0.0 {
        return Err(Error::Input("d and B must be positive".into()));
    }
    let epsilon = delta * delta / (2.0 * d);
    let log2_net_size = log_base.log(1.0 / epsilon) * b.log2();
    Ok(EpsNetReport {
        epsilon,
        log2_net_size,
        net_size: two_pow(log2_net_size),
        effective_delta: 2f64.sqrt() * delta,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplittingChain {
    pub line1: f64,
    pub line2: f64,
    pub line3: f64,
    pub vacuous: bool,
}

/// Per-block complexity chain for a depth-20kn2ⁿ circuit split into blocks
/// of d gates, with log₂|K_δ| supplied by the epsilon-net count:
///
///   line1 = floor(20kn2ⁿ/d)^{-1} ( 2ⁿ/(8 log₂|K|) · bracket − d )
///   line2 = d/(160 k n log₂|K|) · bracket − d²/(20kn2ⁿ)
///   line3 = d/(160 k n log₂|K|) · bracket − 1
///
/// Each successive line is a weakening; we assert line1 >= line2 >= line3 up
/// to rounding slack and return line3. Requires d <= sqrt(20kn)·2^{n/2}.
pub fn deep_splitting_bound(p: &BoundParams) -> Result<SplittingChain> {
    p.validate_constants()?;
    if p.delta >= thm1_delta_threshold() || p.delta <= 0.0 {
        return Err(Error::Domain(
            "delta must lie in (0, sqrt(1 - 2^(-1/2)))".into(),
        ));
    }
    let nf = p.n as f64;
    let k = p.k_mix;
    if p.d > (20.0 * k * nf).sqrt() * two_pow(nf / 2.0) {
        return Err(Error::Domain("requires d <= sqrt(20 k n) 2^(n/2)".into()));
    }
    if p.d <= 0.0 {
        return Err(Error::Input("d must be positive".into()));
    }
    let net = epsnet_and_accumulation(p.delta, p.d, p.b_const, p.log_base)?;
    let log2_k = net.log2_net_size.max(1.0);
    let bracket = unitary_bracket(p.delta);
    let deep = 20.0 * k * nf * two_pow(nf);
    let blocks = (deep / p.d).floor().max(1.0);
    let line1 = (two_pow(nf) / (8.0 * log2_k) * bracket - p.d) / blocks;
    let line2 = p.d / (160.0 * k * nf * log2_k) * bracket - p.d * p.d / deep;
    let line3 = p.d / (160.0 * k * nf * log2_k) * bracket - 1.0;
    // floor() on the block count makes line1 ≥ line2 only up to one part in
    // the block count; allow that slack.
    let slack = (line1.abs() + 1.0) / blocks;
    if line1 + slack < line2 || line2 < line3 {
        return Err(Error::Domain(format!(
            "splitting chain violated: {line1} < {line2} or {line2} < {line3}"
        )));
    }
    Ok(SplittingChain { line1, line2, line3, vacuous: !(line3 > 0.0) })
}

#[derive(Debug, Clone, Serialize)]
pub struct BinomialMixingReport {
    pub exact_sum: f64,
    /// Closed form (1−λ+e^{−1/c}λ)^d, only populated for the exponential
    /// base case.
    pub closed_form: Option<f64>,
    /// Convexity weakening (1−λ/(2c))^d.
    pub simplified: Option<f64>,
}

/// Composes a depth-indexed bound through a binomial distribution:
/// Σ_j C(d,j) (1−λ)^{d−j} λ^j · base(j), evaluated stably in log space
/// (all base values must be nonnegative).
pub fn binomial_mixing<F: Fn(u64) -> f64>(
    d: u64,
    lambda: f64,
    base: F,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Input("lambda must lie in [0, 1]".into()));
    }
    if lambda == 0.0 {
        return Ok(base(0));
    }
    if lambda == 1.0 {
        return Ok(base(d));
    }
    // Linear-space recurrence w_{j+1} = w_j (d-j)/(j+1) λ/(1-λ): each term
    // carries only O(d·eps) relative error, with no ln-binomial
    // cancellation. Valid whenever the starting weight (1-λ)^d does not
    // underflow (the weights are unimodal in j, so nothing vanishes before
    // the mode).
    if d <= 1_000_000 && d as f64 * (1.0 - lambda).ln() > -700.0 {
        let mut w = (1.0 - lambda).powi(d as i32);
        let ratio = lambda / (1.0 - lambda);
        let mut sum = 0.0f64;
        for j in 0..=d {
            let b = base(j);
            if b < 0.0 {
                return Err(Error::Input("base(j) must be nonnegative".into()));
            }
            sum += w * b;
            if j < d {
                w *= (d - j) as f64 / (j + 1) as f64 * ratio;
            }
        }
        return Ok(sum);
    }
    let ln_l = lambda.ln();
    let ln_1ml = (1.0 - lambda).ln();
    let ln_cd = ln_factorial(d);
    let mut terms = Vec::with_capacity(d as usize + 1);
    for j in 0..=d {
        let b = base(j);
        if b < 0.0 {
            return Err(Error::Input("base(j) must be nonnegative".into()));
        }
        if b == 0.0 {
            continue;
        }
        let ln_binom = ln_cd - ln_factorial(j) - ln_factorial(d - j);
        terms.push(ln_binom + (d - j) as f64 * ln_1ml + j as f64 * ln_l + b.ln());
    }
    Ok(crate::stats::log_sum_exp(&terms).exp())
}

/// Specialization to base(j) = e^{−j/c}: the sum collapses to
/// (1 − λ + e^{−1/c} λ)^d, which convexity weakens to (1 − λ/(2c))^d for
/// c >= 1. The exact sum is asserted to stay below the weakening.
pub fn binomial_mixing_exponential(
    d: u64,
    lambda: f64,
    c: f64,
) -> Result<BinomialMixingReport> {
    if c <= 0.0 {
        return Err(Error::Input("c must be positive".into()));
    }
    let exact_sum = binomial_mixing(d, lambda, |j| (-(j as f64) / c).exp())?;
    let closed = (1.0 - lambda + (-1.0 / c).exp() * lambda).powi(
        i32::try_from(d).map_err(|_| Error::Capacity("d too large for powi".into()))?,
    );
    let simplified = if c >= 1.0 {
        Some((1.0 - lambda / (2.0 * c)).powi(d as i32))
    } else {
        None
    };
    if let Some(s) = simplified {
        if exact_sum > s * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::Domain(
                "convexity weakening violated (c < 1?)".into(),
            ));
        }
    }
    Ok(BinomialMixingReport {
        exact_sum,
        closed_form: Some(closed),
        simplified,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CouponReport {
    /// n (1 − 1/n)^d, the single-qubit miss bound.
    pub paper_bound: f64,
    /// n (1 − 2/n)^d: each qubit lies in exactly 2 of the n candidate
    /// nearest-neighbour pairs, so per-gate miss probability is 1 − 2/n.
    pub exact_union_bound: f64,
}

/// Probability bound that some qubit is untouched after d random
/// nearest-neighbour gates.
pub fn coupon_collector(n: u32, d: u64) -> Result<CouponReport> {
    if n < 2 {
        return Err(Error::Input("n must be at least 2".into()));
    }
    let nf = n as f64;
    let df = d as f64;
    Ok(CouponReport {
        paper_bound: nf * (df * (1.0 - 1.0 / nf).ln()).exp(),
        exact_union_bound: nf * (df * (1.0 - 2.0 / nf).ln_1p_safe()).exp(),
    })
}

trait Ln1pSafe {
    fn ln_1p_safe(self) -> f64;
}

impl Ln1pSafe for f64 {
    fn ln_1p_safe(self) -> f64 {
        if self <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.ln()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentVariant {
    Eq8,
    Eq9,
}

/// Moment upper bound for depth-d random circuits.
///
/// Eq8: sqrt(t!/2^{nt} + e^{−d/40000n⁷} + (1 − 1/(2t) + 3·2^{−n})^{d/16000n⁷}) + n e^{−d/n}
/// Eq9: sqrt(t!·2^{2ⁿ/2}·2^{−nt} + e^{−d/40000n⁷} + (1 − 1/(2(n+1)) + 3·2^{−n})^{d/16000n⁷}) + n e^{−d/n}
///
/// The generalized-constant version used by [`cor1_rhs`] substitutes
/// C1..C4 for the two 40000s and 16000s.
pub fn theorem3_rhs(n: u32, d: f64, t: f64, variant: MomentVariant) -> Result<BoundReport> {
    theorem3_rhs_with(n, d, t, variant, 40000.0, 16000.0)
}

fn theorem3_rhs_with(
    n: u32,
    d: f64,
    t: f64,
    variant: MomentVariant,
    c_exp: f64,
    c_rate: f64,
) -> Result<BoundReport> {
    if n == 0 || d < 0.0 || t <= 0.0 || c_exp <= 0.0 || c_rate <= 0.0 {
        return Err(Error::Input("invalid theorem3_rhs parameters".into()));
    }
    let nf = n as f64;
    let n7 = nf.powi(7);
    // ln of the leading summand under the square root.
    let ln_first = match variant {
        MomentVariant::Eq8 => ln_factorial_f(t) - t * nf * 2f64.ln(),
        MomentVariant::Eq9 => {
            ln_factorial_f(t) + two_pow(nf) / 2.0 * 2f64.ln() - t * nf * 2f64.ln()
        }
    };
    let ln_second = -d / (c_exp * n7);
    let rate = match variant {
        MomentVariant::Eq8 => 1.0 - 1.0 / (2.0 * t) + 3.0 * two_pow(-nf),
        MomentVariant::Eq9 => 1.0 - 1.0 / (2.0 * (nf + 1.0)) + 3.0 * two_pow(-nf),
    };
    let ln_third = if rate <= 0.0 {
        f64::NEG_INFINITY
    } else {
        d / (c_rate * n7) * rate.ln()
    };
    let ln_root = crate::stats::log_sum_exp(&[ln_first, ln_second, ln_third]) / 2.0;
    let ln_tail = nf.ln() - d / nf;
    let ln_total = crate::stats::log_sum_exp(&[ln_root, ln_tail]);
    // A moment bound above 1 is vacuous anyway; cap astronomically large
    // eq9 values (the 2^{2^n/2} term) instead of overflowing to infinity.
    let value = if ln_total > 700.0 { f64::MAX } else { ln_total.exp() };
    let formula = match variant {
        MomentVariant::Eq8 => "theorem3_eq8",
        MomentVariant::Eq9 => "theorem3_eq9",
    };
    Ok(BoundReport::probability(formula, value))
}

/// ln Γ(t+1) for real t ≥ 0 (Stirling with correction; exact enough for the
/// integer arguments used in practice, cross-checked against ln_factorial).
fn ln_factorial_f(t: f64) -> f64 {
    if t.fract() == 0.0 && t >= 0.0 && t <= 1e6 {
        return ln_factorial(t as u64);
    }
    ln_gamma(t + 1.0)
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Corollary variant of [`theorem3_rhs`] with user-supplied constants:
/// Eq8 uses (C1, C2), Eq9 uses (C3, C4).
pub fn cor1_rhs(p: &BoundParams, variant: MomentVariant) -> Result<BoundReport> {
    p.validate_constants()?;
    let (c_exp, c_rate) = match variant {
        MomentVariant::Eq8 => (p.c1, p.c2),
        MomentVariant::Eq9 => (p.c3, p.c4),
    };
    let r = theorem3_rhs_with(p.n, p.d, p.t, variant, c_exp, c_rate)?;
    let formula = match variant {
        MomentVariant::Eq8 => "cor1_eq8",
        MomentVariant::Eq9 => "cor1_eq9",
    };
    Ok(BoundReport { formula, ..r })
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityReport {
    /// Overlap-squared threshold 1 − δ².
    pub overlap_sq: f64,
    /// δ' := 2 (1 − sqrt(1 − δ²)), the operator-norm robustness.
    pub delta_prime: f64,
}

/// Trace-norm / fidelity bookkeeping: ½||ψ−φ||₁ = sqrt(1 − |⟨φ|ψ⟩|²), so a
/// trace-norm error of δ corresponds to overlap-squared 1 − δ², and
/// ||U−U'||²_∞ ≥ 2(1 − |⟨ψ|U†U'|ψ⟩|) motivates δ' = 2(1 − sqrt(1−δ²)).
pub fn fidelity_tracenorm(delta: f64) -> Result<FidelityReport> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Input("delta must lie in [0, 1)".into()));
    }
    Ok(FidelityReport {
        overlap_sq: 1.0 - delta * delta,
        delta_prime: 2.0 * (1.0 - (1.0 - delta * delta).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thm1_bracket_limits() {
        assert_relative_eq!(unitary_bracket(0.0), 1.0);
        let thr = thm1_delta_threshold();
        assert!(unitary_bracket(thr).abs() < 1e-12);
    }

    #[test]
    fn thm1_unitary_basics() {
        let mut p = BoundParams::new(16, 200.0, 2.0, 0.1).unwrap();
        let (b, td) = thm1_unitary_bound(&p).unwrap();
        assert!(b.value > 0.0 && !b.vacuous);
        let expect_td = (1.0 - (1.0 - 0.01f64).sqrt()) * 200.0
            / (40000.0 * 16f64.powi(8) * 2f64.powi(16));
        assert_relative_eq!(td, expect_td, max_relative = 1e-12);
        // vacuous near the threshold
        p.delta = thm1_delta_threshold() * 0.99999;
        let (b2, _) = thm1_unitary_bound(&p).unwrap();
        assert!(b2.value.abs() < b.value);
        p.delta = thm1_delta_threshold() + 1e-6;
        assert!(thm1_unitary_bound(&p).is_err());
    }

    #[test]
    fn thm1_state_bracket_and_scan() {
        let p = BoundParams::new(20, 1024.0, 1.0, 0.1).unwrap();
        let b = thm1_state_bound(&p).unwrap();
        let nf = 20f64;
        let bracket = nf - (1024f64.sqrt() / (200.0 * nf.powi(4))).log2()
            - 2.0 * (1.0f64 / (1.0 - 0.02)).log2();
        let expect = 1024f64.sqrt() / (1.0 * nf.powi(4) * (1024.0 / 0.01f64).log2()) * bracket;
        assert_relative_eq!(b.value, expect, max_relative = 1e-12);
        // d=1: find the smallest n with a positive bound
        let n0 = (2..64)
            .find(|&n| {
                let p = BoundParams::new(n, 1.0, 1.0, 0.1).unwrap();
                thm1_state_bound(&p).map(|b| !b.vacuous).unwrap_or(false)
            })
            .unwrap();
        assert!(n0 <= 4, "n0 = {n0}");
    }

    #[test]
    fn thm2_reduces_to_thm1() {
        let mut p = BoundParams::new(12, 60.0, 2.0, 0.2).unwrap();
        p.k_const = 40000.0;
        p.c_g = 40000.0;
        p.cprime_g = 200.0;
        let (u1, td1) = thm1_unitary_bound(&p).unwrap();
        let s1 = thm1_state_bound(&p).unwrap();
        let (u2, td2, s2) = thm2_bounds(&p).unwrap();
        assert_relative_eq!(u1.value, u2.value, max_relative = 1e-12);
        assert_relative_eq!(td1, td2, max_relative = 1e-12);
        assert_relative_eq!(s1.value, s2.value, max_relative = 1e-12);
        // monotone decreasing in C(G)
        p.c_g = 80000.0;
        let (u3, _, _) = thm2_bounds(&p).unwrap();
        assert!(u3.value < u2.value);
    }

    #[test]
    fn markov_single_candidate() {
        use crate::dense_sim::haar_exact_moment;
        let m = haar_exact_moment(4, 2).unwrap();
        let b = markov_union_bound(2, 2.0, 0.0, 1.0, 0.0, m).unwrap();
        assert_relative_eq!(b.value, m, max_relative = 1e-12);
        // doubling R multiplies by |K|^R
        let b1 = markov_union_bound(2, 2.0, 3.0, 2.0, 0.1, m).unwrap();
        let b2 = markov_union_bound(2, 2.0, 6.0, 2.0, 0.1, m).unwrap();
        if !b2.vacuous {
            assert_relative_eq!(b2.value / b1.value, 8.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn markov_matches_proof_shape() {
        // At d = 20 k n t^2 the composed bound reproduces the shape
        // 2^{-t(n - log2 t + log2(1/(1-δ))) + R log2|K|} up to the
        // discarded small additive terms.
        let (n, t, delta, r, ks) = (24u32, 8.0f64, 0.2f64, 10.0, 4.0);
        let nf = n as f64;
        let k = 2000.0 * nf.powi(7);
        let d = 20.0 * k * nf * t * t;
        let moment = theorem3_rhs(n, d, t, MomentVariant::Eq8).unwrap().value;
        let b = markov_union_bound(n, t, r, ks, delta, moment).unwrap();
        // shape: 2^{-t(n - log2 t)/2 + t log2(1/(1-δ²)) + R log2|K|}
        let shape_log2 = -0.5 * t * (nf - t.log2())
            + t * (1.0f64 / (1.0 - delta * delta)).log2()
            + r * ks.log2();
        assert!(!b.vacuous);
        assert!((b.value.log2() - shape_log2).abs() < 6.0);
    }

    #[test]
    fn epsnet_arithmetic() {
        let r = epsnet_and_accumulation(0.5, 100.0, 2.0, LogBase::Two).unwrap();
        assert_relative_eq!(r.epsilon, 1.0 / 800.0, max_relative = 1e-12);
        assert_relative_eq!(r.log2_net_size, (800f64).log2(), max_relative = 1e-12);
        assert_relative_eq!(r.effective_delta, 2f64.sqrt() * 0.5, max_relative = 1e-12);
        // accumulation inequality sqrt(1-δ²) − εR ≥ sqrt(1−2δ²) for R ≤ d
        for &delta in &[0.1, 0.3, 0.5, 0.7] {
            for &d in &[10.0, 100.0, 1000.0] {
                let eps = delta * delta / (2.0 * d);
                for &r in &[0.0, d / 2.0, d] {
                    let lhs = (1.0 - delta * delta as f64).sqrt() - eps * r;
                    let rhs = (1.0 - 2.0 * delta * delta as f64).max(0.0).sqrt();
                    assert!(lhs >= rhs - 1e-12, "delta={delta} d={d} r={r}");
                }
            }
        }
    }

    #[test]
    fn splitting_chain_monotone() {
        for &n in &[8u32, 12, 16] {
            for &dmul in &[1.0, 4.0, 16.0] {
                let mut p = BoundParams::new(n, dmul * n as f64, 1.0, 0.2).unwrap();
                p.k_mix = 2000.0 * (n as f64).powi(7);
                let chain = deep_splitting_bound(&p).unwrap();
                assert!(chain.line2 >= chain.line3);
            }
        }
        // small d: the trailing −1 dominates
        let p = BoundParams::new(8, 4.0, 1.0, 0.2).unwrap();
        let chain = deep_splitting_bound(&p).unwrap();
        assert!(chain.vacuous);
    }

    #[test]
    fn binomial_mixing_degenerate() {
        let base = |j: u64| (-(j as f64) / 3.0).exp();
        assert_relative_eq!(binomial_mixing(7, 1.0, base).unwrap(), base(7));
        assert_relative_eq!(binomial_mixing(7, 0.0, base).unwrap(), base(0));
    }

    #[test]
    fn binomial_mixing_closed_form() {
        for &(d, lambda, c) in &[(50u64, 0.3, 2.0), (200, 0.05, 10.0), (1000, 0.5, 1.0)] {
            let r = binomial_mixing_exponential(d, lambda, c).unwrap();
            assert_relative_eq!(
                r.exact_sum,
                r.closed_form.unwrap(),
                max_relative = 1e-12
            );
            assert!(r.exact_sum <= r.simplified.unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn coupon_examples() {
        let r = coupon_collector(2, 5).unwrap();
        assert_eq!(r.exact_union_bound, 0.0);
        let r = coupon_collector(4, 8).unwrap();
        assert_relative_eq!(r.exact_union_bound, 4.0 * 0.5f64.powi(8), max_relative = 1e-12);
        assert_relative_eq!(r.paper_bound, 4.0 * 0.75f64.powi(8), max_relative = 1e-12);
        assert!(r.exact_union_bound <= r.paper_bound);
    }

    #[test]
    fn theorem3_limits() {
        // first summand under the root at n=4, t=2: 2/256
        let nf = 4f64;
        let first = (ln_factorial(2) - 2.0 * nf * 2f64.ln()).exp();
        assert_relative_eq!(first, 2.0 / 256.0, max_relative = 1e-12);
        // d -> infinity limit of eq8 is sqrt(t!/2^{nt})
        let b = theorem3_rhs(4, 1e12, 2.0, MomentVariant::Eq8).unwrap();
        assert_relative_eq!(b.value, (2.0f64 / 256.0).sqrt(), max_relative = 1e-6);
        // d = 0: the root term is >= 1, vacuous
        let b0 = theorem3_rhs(4, 0.0, 2.0, MomentVariant::Eq8).unwrap();
        assert!(b0.vacuous);
    }

    #[test]
    fn theorem3_stable_at_large_args() {
        let b = theorem3_rhs(64, 4.0e9, 32.0, MomentVariant::Eq8).unwrap();
        assert!(b.value.is_finite() && b.value > 0.0);
        let b9 = theorem3_rhs(64, 4.0e9, 1e9, MomentVariant::Eq9).unwrap();
        assert!(b9.value.is_finite());
    }

    #[test]
    fn cor1_reduces_and_monotone() {
        let p = BoundParams::new(6, 5000.0, 2.0, 0.1).unwrap();
        let a = cor1_rhs(&p, MomentVariant::Eq8).unwrap();
        let b = theorem3_rhs(6, 5000.0, 2.0, MomentVariant::Eq8).unwrap();
        assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
        let mut p2 = p.clone();
        p2.c1 = 80000.0;
        let c = cor1_rhs(&p2, MomentVariant::Eq8).unwrap();
        assert!(c.value >= a.value);
    }

    #[test]
    fn fidelity_values() {
        let r = fidelity_tracenorm(0.0).unwrap();
        assert_relative_eq!(r.overlap_sq, 1.0);
        assert_relative_eq!(r.delta_prime, 0.0);
        let r = fidelity_tracenorm(0.5).unwrap();
        assert_relative_eq!(r.overlap_sq, 0.75, max_relative = 1e-12);
        assert_relative_eq!(r.delta_prime, 2.0 * (1.0 - 0.75f64.sqrt()), max_relative = 1e-12);
    }

    #[test]
    fn monotonicities() {
        // thm1 unitary bound non-decreasing in d, non-increasing in K
        let base = BoundParams::new(16, 100.0, 2.0, 0.1).unwrap();
        let (b1, _) = thm1_unitary_bound(&base).unwrap();
        let mut p = base.clone();
        p.d = 200.0;
        let (b2, _) = thm1_unitary_bound(&p).unwrap();
        assert!(b2.value >= b1.value);
        let mut p = base.clone();
        p.k_const = 2.0;
        let (b3, _) = thm1_unitary_bound(&p).unwrap();
        assert!(b3.value <= b1.value);
        // The bound is NOT monotone in delta: log2(1/δ) in the denominator
        // sends it to 0 as δ→0 and the bracket sends it to 0 at the
        // threshold, so it peaks in between. Pin both endpoints instead.
        let mut p = base.clone();
        p.delta = 1e-9;
        let (b4, _) = thm1_unitary_bound(&p).unwrap();
        assert!(b4.value < b1.value);
        p.delta = thm1_delta_threshold() - 1e-9;
        let (b5, _) = thm1_unitary_bound(&p).unwrap();
        assert!(b5.value < b1.value);
    }

    #[test]
    fn ln_gamma_matches_factorial() {
        for k in 1..30u64 {
            assert_relative_eq!(
                ln_gamma(k as f64 + 1.0),
                ln_factorial(k),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn log_base_switch() {
        assert_relative_eq!(LogBase::Two.log(8.0), 3.0);
        assert_relative_eq!(LogBase::Natural.log(std::f64::consts::E), 1.0);
    }
}
