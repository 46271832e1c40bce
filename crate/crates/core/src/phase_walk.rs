//! Random walks on phase states 2^{-n/2} sum_x e^{i theta_x} |x>.
//!
//! Two walks act here: the auxiliary walk (at a random adjacent pair, a
//! uniform element of the 6-element CNOT group or a single-qubit Z rotation
//! with uniform angle, each with probability 1/2) and the ideal auxiliary
//! walk (m rotations e^{i phi Z^y} with y uniform over all n-bit strings).
//! Exact enumeration over canonical tuple pairs provides the brute-force
//! oracle for every Monte Carlo estimate.
//!
//! Phases are stored as raw radians; no mod-2pi reduction happens during a
//! walk, only on serialization.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::f2::{embed_local, local_group, F2Matrix};
use crate::fourier::{for_each_sorted_tuple, support_size_raw};
use crate::stats::mean_stderr;
use crate::{par, rng};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

const STREAM_PHASE: u64 = 3;

/// Phase representation of the state 2^{-n/2} sum_x e^{i theta_x} |x>.
#[derive(Clone, Debug)]
pub struct PhaseVector {
    n: usize,
    phases: Vec<f64>,
}

impl PhaseVector {
    /// |+^n>: all phases zero.
    pub fn plus_state(n: usize) -> Result<Self> {
        if n == 0 || n > 26 {
            return Err(Error::Capacity(format!("phase vector needs 1 <= n <= 26, got {n}")));
        }
        Ok(Self {
            n,
            phases: vec![0.0; 1 << n],
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Phases reduced mod 2pi, for output.
    pub fn reduced_phases(&self) -> Vec<f64> {
        self.phases.iter().map(|t| t.rem_euclid(TAU)).collect()
    }

    /// theta_x += phi * p_y(x).
    pub fn apply_rotation(&mut self, rot: &DiagonalRotation) -> Result<()> {
        if rot.y.len() != self.n {
            return Err(Error::Input("rotation dimension mismatch".into()));
        }
        let yb = rot.y.bits();
        for (x, theta) in self.phases.iter_mut().enumerate() {
            if (x as u32 & yb).count_ones() & 1 == 1 {
                *theta -= rot.phi;
            } else {
                *theta += rot.phi;
            }
        }
        Ok(())
    }

    /// Relabel basis states: theta'_{Mx} = theta_x.
    pub fn apply_f2_perm(&mut self, m: &F2Matrix) -> Result<()> {
        if m.n() != self.n {
            return Err(Error::Input("permutation dimension mismatch".into()));
        }
        let mut out = vec![0.0; self.phases.len()];
        for (x, &theta) in self.phases.iter().enumerate() {
            out[m.mul_vec(x as u32) as usize] = theta;
        }
        self.phases = out;
        Ok(())
    }

    /// <+^n| U |+^n> = 2^{-n} sum_x e^{i theta_x}.
    pub fn plus_overlap(&self) -> Complex64 {
        let sum: Complex64 = self
            .phases
            .iter()
            .map(|&t| Complex64::new(t.cos(), t.sin()))
            .sum();
        sum / self.phases.len() as f64
    }
}

/// e^{i phi Z^y}; an all-zero y is a global phase with no observable effect.
#[derive(Clone, Debug, Serialize)]
pub struct DiagonalRotation {
    pub y: BitString,
    pub phi: f64,
}

/// One draw from the measure zeta, embedded at a periodic site pair.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuxStep {
    /// One of the 6 local reversible elements at (site, site+1).
    GroupGate { site: usize, element: usize },
    /// e^{i phi Z} on `site` (tensor identity on site+1).
    LocalRotation { site: usize, phi: f64 },
}

/// Sample a step of the auxiliary walk theta.
pub fn sample_aux_step<R: Rng>(n: usize, rng: &mut R) -> AuxStep {
    let site = rng.gen_range(0..n);
    if rng.gen_bool(0.5) {
        AuxStep::GroupGate {
            site,
            element: rng.gen_range(0..6),
        }
    } else {
        AuxStep::LocalRotation {
            site,
            phi: rng.gen_range(0.0..TAU),
        }
    }
}

/// Apply an auxiliary step to a phase state.
pub fn apply_aux_step(state: &mut PhaseVector, step: &AuxStep, locals: &[F2Matrix]) -> Result<()> {
    match step {
        AuxStep::GroupGate { site, element } => {
            let m = embed_local(&locals[*element], state.n(), *site)?;
            state.apply_f2_perm(&m)
        }
        AuxStep::LocalRotation { site, phi } => {
            let y = BitString::new(1u32 << site, state.n())?;
            state.apply_rotation(&DiagonalRotation { y, phi: *phi })
        }
    }
}

/// Monte Carlo estimate with standard error.
#[derive(Clone, Debug, Serialize)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

/// E |<+^n|U|+^n>|^{2t} over trials of the d-step auxiliary walk.
pub fn mc_moment_aux(n: usize, d: u64, t: u32, trials: u64, seed: u64) -> Result<MomentEstimate> {
    if n < 2 {
        return Err(Error::Input("auxiliary walk needs n >= 2 (site pairs)".into()));
    }
    if t == 0 || trials == 0 {
        return Err(Error::Input("t and trials must be >= 1".into()));
    }
    PhaseVector::plus_state(n)?;
    let locals = local_group();
    let samples = par::run_trials(trials, |trial| {
        let mut rng = rng::stream(seed, trial, STREAM_PHASE);
        let mut state = PhaseVector::plus_state(n).unwrap();
        for _ in 0..d {
            let step = sample_aux_step(n, &mut rng);
            apply_aux_step(&mut state, &step, &locals).unwrap();
        }
        state.plus_overlap().norm().powi(2 * t as i32)
    });
    let (estimate, stderr) = mean_stderr(&samples);
    Ok(MomentEstimate {
        estimate,
        stderr,
        trials,
        seed,
    })
}

/// E |<+^n|U|+^n>|^{2t} for the ideal walk: m rotations with uniform i.i.d. y.
pub fn mc_moment_ideal(n: usize, m: u64, t: u32, trials: u64, seed: u64) -> Result<MomentEstimate> {
    if t == 0 || trials == 0 {
        return Err(Error::Input("t and trials must be >= 1".into()));
    }
    PhaseVector::plus_state(n)?;
    let samples = par::run_trials(trials, |trial| {
        let mut rng = rng::stream(seed, trial, STREAM_PHASE + 1);
        let mut state = PhaseVector::plus_state(n).unwrap();
        for _ in 0..m {
            let y = BitString::new(rng.gen_range(0..(1u32 << n)), n).unwrap();
            let phi = rng.gen_range(0.0..TAU);
            state.apply_rotation(&DiagonalRotation { y, phi }).unwrap();
        }
        state.plus_overlap().norm().powi(2 * t as i32)
    });
    let (estimate, stderr) = mean_stderr(&samples);
    Ok(MomentEstimate {
        estimate,
        stderr,
        trials,
        seed,
    })
}

fn check_pair_capacity(n: usize, t: u32) -> Result<()> {
    if 2 * n * t as usize > 24 {
        return Err(Error::Capacity(format!(
            "pair enumeration requires 2^(2nt) <= 2^24, got n={n}, t={t}"
        )));
    }
    Ok(())
}

/// Support-size census over all canonical tuple pairs: support -> weighted
/// count. The eigenvalue attached to support s is q = 1 - s/2^n.
fn support_census(n: usize, t: u32) -> Result<BTreeMap<u64, u128>> {
    check_pair_capacity(n, t)?;
    let base = 1u32 << n;
    let mut tuples: Vec<(Vec<u32>, u128)> = Vec::new();
    for_each_sorted_tuple(base, t as usize, |tup, w| tuples.push((tup.to_vec(), w)));
    let rows: Vec<BTreeMap<u64, u128>> = par::run_trials(tuples.len() as u64, |i| {
        let (a, wa) = &tuples[i as usize];
        let mut local: BTreeMap<u64, u128> = BTreeMap::new();
        for (b, wb) in &tuples {
            let s = support_size_raw(n, a, b);
            *local.entry(s).or_insert(0) += wa * wb;
        }
        local
    });
    let mut census: BTreeMap<u64, u128> = BTreeMap::new();
    for row in rows {
        for (s, w) in row {
            *census.entry(s).or_insert(0) += w;
        }
    }
    Ok(census)
}

/// Exact moment of the ideal auxiliary walk after m rotations:
/// 2^{-2nt} sum_{pairs} q(pair)^m with q = Pr_y[f_hat(y) = 0].
pub fn exact_moment_ideal(n: usize, m: u64, t: u32) -> Result<f64> {
    let census = support_census(n, t)?;
    let total = 2f64.powi((2 * n as i32) * t as i32);
    let dim = (1u64 << n) as f64;
    let mut acc = 0.0;
    for (&s, &w) in &census {
        let q = (dim - s as f64) / dim;
        // q = 0 contributes only at m = 0 (q^0 = 1)
        let qm = if m == 0 { 1.0 } else { q.powf(m as f64) };
        acc += w as f64 * qm;
    }
    Ok(acc / total)
}

/// The m -> infinity limit: the permutation floor 2^{-2nt} #{r = 0 pairs}.
pub fn permutation_floor(n: usize, t: u32) -> Result<f64> {
    let census = support_census(n, t)?;
    let total = 2f64.powi((2 * n as i32) * t as i32);
    Ok(census.get(&0).copied().unwrap_or(0) as f64 / total)
}

/// Eigenvalue census of the ideal walk's t-fold moment operator on the
/// diagonals: the values q(pair) with weighted multiplicities.
#[derive(Clone, Debug, Serialize)]
pub struct IdealSpectrum {
    pub n: usize,
    pub t: u32,
    /// (eigenvalue, multiplicity), sorted descending by eigenvalue.
    pub eigenvalues: Vec<(f64, u128)>,
    /// Largest eigenvalue (always 1, from permutation-related pairs).
    pub top: f64,
    /// Second-highest distinct eigenvalue, if any.
    pub second: Option<f64>,
    /// Smallest nonzero Fourier support across pairs; second = 1 - min/2^n.
    pub min_nonzero_support: Option<u64>,
}

pub fn ideal_spectrum(n: usize, t: u32) -> Result<IdealSpectrum> {
    let census = support_census(n, t)?;
    let dim = (1u64 << n) as f64;
    let mut eigenvalues: Vec<(f64, u128)> = census
        .iter()
        .map(|(&s, &w)| (1.0 - s as f64 / dim, w))
        .collect();
    eigenvalues.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let top = eigenvalues.first().map(|&(q, _)| q).unwrap_or(0.0);
    let second = eigenvalues.get(1).map(|&(q, _)| q);
    let min_nonzero_support = census.keys().copied().find(|&s| s > 0);
    Ok(IdealSpectrum {
        n,
        t,
        eigenvalues,
        top,
        second,
        min_nonzero_support,
    })
}

/// Exact and bound probabilities for the block decomposition of the walk.
#[derive(Clone, Debug, Serialize)]
pub struct BlockStatistics {
    pub n: usize,
    pub k: u64,
    pub d: u64,
    /// Exact P(a block of 4k zeta-draws has >= 1 rotation and >= k group gates).
    pub p_block: f64,
    /// Exact P(>= 1 rotation in 4k draws) = 1 - 2^{-4k}.
    pub p_any_rotation: f64,
    /// The Hoeffding-style bound 1 - e^{-d/20k} for half the block pairs.
    pub p_half_blocks_bound: f64,
    /// Whether 1 - p_block <= 2^{-n-1} (the failure bound used in the proof).
    pub claim_holds: bool,
}

/// Exact binomial probability that a block of 4k fair draws contains at
/// least one rotation and at least k group gates.
pub fn block_statistics(d: u64, k: u64, n: usize) -> Result<BlockStatistics> {
    if k == 0 || d < 4 * k {
        return Err(Error::Input("need k >= 1 and d >= 4k".into()));
    }
    let draws = 4 * k;
    // rotations r ~ Bin(4k, 1/2); success iff 1 <= r <= 3k
    let mut p_block = 0.0;
    let mut log_c = 0.0f64; // ln C(4k, 0)
    let ln_half = 0.5f64.ln();
    for r in 0..=draws {
        if r >= 1 && r <= 3 * k {
            p_block += (log_c + draws as f64 * ln_half).exp();
        }
        if r < draws {
            log_c += ((draws - r) as f64).ln() - ((r + 1) as f64).ln();
        }
    }
    let p_any_rotation = 1.0 - 0.5f64.powi(draws.min(1023) as i32);
    let p_half_blocks_bound = 1.0 - (-(d as f64) / (20.0 * k as f64)).exp();
    let failure = 1.0 - p_block;
    Ok(BlockStatistics {
        n,
        k,
        d,
        p_block,
        p_any_rotation,
        p_half_blocks_bound,
        claim_holds: failure <= 2f64.powi(-(n as i32) - 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotation_examples() {
        // n=1, y=1: theta_0 += phi, theta_1 -= phi
        let mut s = PhaseVector::plus_state(1).unwrap();
        let rot = DiagonalRotation {
            y: BitString::new(1, 1).unwrap(),
            phi: 0.3,
        };
        s.apply_rotation(&rot).unwrap();
        assert_eq!(s.phases(), &[0.3, -0.3]);
        // overlap = cos(phi)
        assert_relative_eq!(s.plus_overlap().re, 0.3f64.cos(), epsilon = 1e-15);
        assert_relative_eq!(s.plus_overlap().im, 0.0, epsilon = 1e-15);

        // inverse rotation restores phases
        let inv = DiagonalRotation {
            y: rot.y,
            phi: -0.3,
        };
        s.apply_rotation(&inv).unwrap();
        assert_eq!(s.phases(), &[0.0, 0.0]);
    }

    #[test]
    fn global_phase_rotation_keeps_overlap_magnitude() {
        let mut s = PhaseVector::plus_state(2).unwrap();
        let before = s.plus_overlap().norm();
        s.apply_rotation(&DiagonalRotation {
            y: BitString::zero(2).unwrap(),
            phi: 1.1,
        })
        .unwrap();
        assert_relative_eq!(s.plus_overlap().norm(), before, epsilon = 1e-15);
    }

    #[test]
    fn f2_perm_examples() {
        let mut s = PhaseVector::plus_state(2).unwrap();
        s.phases = vec![0.1, 0.2, 0.3, 0.4]; // indexed 00,01,10,11 (bit0 = qubit 0)
        let before = s.clone();
        s.apply_f2_perm(&F2Matrix::identity(2)).unwrap();
        assert_eq!(s.phases(), before.phases());

        // CNOT control 0 -> target 1 maps 01 <-> 11 in packed labels
        let cnot = F2Matrix::cnot(2, 0, 1).unwrap();
        s.apply_f2_perm(&cnot).unwrap();
        assert_eq!(s.phases(), &[0.1, 0.4, 0.3, 0.2]);

        // uniform phases are invariant up to relabeling
        let mut plus = PhaseVector::plus_state(2).unwrap();
        plus.apply_f2_perm(&cnot).unwrap();
        assert_relative_eq!(plus.plus_overlap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn overlap_bounds() {
        let mut rng = rng::stream(5, 0, 0);
        for _ in 0..20 {
            let mut s = PhaseVector::plus_state(3).unwrap();
            for theta in &mut s.phases {
                *theta = rng.gen_range(0.0..TAU);
            }
            assert!(s.plus_overlap().norm() <= 1.0 + 1e-12);
        }
        let s = PhaseVector::plus_state(3).unwrap();
        assert_relative_eq!(s.plus_overlap().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_moment_ideal_closed_form_n1() {
        // 1/2 + 2^{-(m+1)}
        for m in 0..=20u64 {
            let v = exact_moment_ideal(1, m, 1).unwrap();
            assert_eq!(v, 0.5 + 2f64.powi(-(m as i32) - 1), "m = {m}");
        }
    }

    #[test]
    fn exact_moment_m0_is_one() {
        for (n, t) in [(1usize, 1u32), (2, 1), (2, 2), (3, 1)] {
            assert_relative_eq!(exact_moment_ideal(n, 0, t).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_moment_monotone_and_floored() {
        let floor = permutation_floor(2, 2).unwrap();
        assert!(floor <= 2.0 / 16.0); // t!/2^{nt}
        let mut prev = f64::INFINITY;
        for m in 0..30u64 {
            let v = exact_moment_ideal(2, m, 2).unwrap();
            assert!(v <= prev + 1e-15);
            assert!(v >= floor - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn mc_ideal_matches_exact() {
        // n=1, t=1, m=1 -> 3/4 within 3 sigma
        let est = mc_moment_ideal(1, 1, 1, 4000, 9).unwrap();
        assert!((est.estimate - 0.75).abs() <= 3.0 * est.stderr);
        // m = 0 exactly 1
        let est = mc_moment_ideal(2, 0, 1, 10, 9).unwrap();
        assert_eq!(est.estimate, 1.0);
    }

    #[test]
    fn mc_aux_d0_is_one() {
        let est = mc_moment_aux(2, 0, 1, 10, 1).unwrap();
        assert_eq!(est.estimate, 1.0);
        assert!(mc_moment_aux(1, 5, 1, 10, 1).is_err());
    }

    #[test]
    fn ideal_spectrum_examples() {
        // n=2, t=1: nontrivial spectrum = {1/2}
        let s = ideal_spectrum(2, 1).unwrap();
        assert_eq!(s.top, 1.0);
        assert_eq!(s.second, Some(0.5));

        // n=2, t=2: second-highest = 3/4 = 1 - 2^{-2} (parity pair)
        let s = ideal_spectrum(2, 2).unwrap();
        assert_eq!(s.second, Some(0.75));
        assert_eq!(s.min_nonzero_support, Some(1));
    }

    #[test]
    fn capacity_guard() {
        assert!(exact_moment_ideal(4, 1, 4).is_err());
        assert!(ideal_spectrum(5, 3).is_err());
    }

    #[test]
    fn block_statistics_examples() {
        // k=1: P = 1 - 2*(1/2)^4 = 7/8
        let b = block_statistics(4, 1, 4).unwrap();
        assert_relative_eq!(b.p_block, 7.0 / 8.0, epsilon = 1e-12);
        assert_relative_eq!(b.p_any_rotation, 1.0 - 1.0 / 16.0, epsilon = 1e-12);
        assert!(block_statistics(3, 1, 4).is_err());

        // failure 1/8 vs 2^{-5}: the claim does not hold at n=4, k=1
        assert!(!b.claim_holds);
        // but does for large enough k
        let b = block_statistics(40, 3, 4).unwrap();
        assert!(b.claim_holds);
    }

    #[test]
    fn reduced_phases_are_wrapped() {
        let mut s = PhaseVector::plus_state(1).unwrap();
        s.phases = vec![7.0, -1.0];
        let red = s.reduced_phases();
        assert!(red.iter().all(|&t| (0.0..TAU).contains(&t)));
        assert_relative_eq!(red[0], 7.0 - TAU, epsilon = 1e-12);
    }
}
