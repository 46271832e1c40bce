//! The CNOT-generated reversible-circuit group over GF(2) and its random walk.
//!
//! Reversible circuits built from CNOTs act on basis labels as invertible
//! matrices over GF(2): U|x> = |Mx>. The walk sigma applies a uniformly
//! random element of the 6-element two-qubit group at a uniformly random
//! adjacent pair (periodic boundary). This module enumerates the group at
//! small n, convolves the walk exactly, and measures mixing in total
//! variation against the comparison-method bound.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::{par, rng};
use faer::Mat;
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;

const STREAM_F2: u64 = 2;

/// Invertible n x n matrix over GF(2); row i is a bitmask, (Mx)_i = <row_i, x>.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct F2Matrix {
    n: usize,
    rows: Vec<u32>,
}

impl F2Matrix {
    /// Build from rows, rejecting non-invertible matrices.
    pub fn new(n: usize, rows: Vec<u32>) -> Result<Self> {
        if n == 0 || n > 30 || rows.len() != n {
            return Err(Error::Input(format!("bad matrix shape n={n}")));
        }
        let m = Self { n, rows };
        if !m.is_invertible() {
            return Err(Error::Input("matrix is singular over GF(2)".into()));
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rows: (0..n).map(|i| 1u32 << i).collect(),
        }
    }

    /// CNOT with the given control and target: x_target ^= x_control.
    pub fn cnot(n: usize, control: usize, target: usize) -> Result<Self> {
        if control == target || control >= n || target >= n {
            return Err(Error::Input("bad cnot wires".into()));
        }
        let mut m = Self::identity(n);
        m.rows[target] |= 1 << control;
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn is_invertible(&self) -> bool {
        self.clone().eliminate().is_some()
    }

    // Gauss-Jordan; returns the inverse rows if invertible.
    fn eliminate(self) -> Option<Vec<u32>> {
        let n = self.n;
        let mut a = self.rows;
        let mut inv: Vec<u32> = (0..n).map(|i| 1u32 << i).collect();
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r] >> col & 1 == 1)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && a[r] >> col & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Some(inv)
    }

    pub fn inverse(&self) -> F2Matrix {
        let rows = self
            .clone()
            .eliminate()
            .expect("constructed matrices are invertible");
        F2Matrix { n: self.n, rows }
    }

    pub fn transpose(&self) -> F2Matrix {
        let rows = (0..self.n)
            .map(|j| {
                let mut row = 0u32;
                for (i, &r) in self.rows.iter().enumerate() {
                    row |= (r >> j & 1) << i;
                }
                row
            })
            .collect();
        F2Matrix { n: self.n, rows }
    }

    /// Matrix product self * other (apply other first).
    pub fn mul(&self, other: &F2Matrix) -> F2Matrix {
        debug_assert_eq!(self.n, other.n);
        let ot = other.transpose();
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut out = 0u32;
                for (j, &col) in ot.rows.iter().enumerate() {
                    out |= (((r & col).count_ones() & 1) as u32) << j;
                }
                out
            })
            .collect();
        F2Matrix { n: self.n, rows }
    }

    /// Apply to a packed basis label: x -> Mx.
    pub fn mul_vec(&self, x: u32) -> u32 {
        let mut out = 0u32;
        for (i, &r) in self.rows.iter().enumerate() {
            out |= (((r & x).count_ones() & 1) as u32) << i;
        }
        out
    }

    /// Compact key for hashing (n <= 4 fits comfortably).
    pub fn key(&self) -> u128 {
        let mut k = 0u128;
        for (i, &r) in self.rows.iter().enumerate() {
            k |= (r as u128) << (32 * (i % 4)) << if i >= 4 { 1 } else { 0 };
        }
        // for n > 4 fall back to a fold that stays injective for n <= 5
        if self.n > 4 {
            k = self
                .rows
                .iter()
                .fold(0u128, |acc, &r| (acc << self.n) | r as u128);
        }
        k
    }
}

/// The 6-element group GL(2,2) generated by the two CNOTs on 2 qubits.
pub fn local_group() -> Vec<F2Matrix> {
    let gens = [
        F2Matrix::cnot(2, 0, 1).unwrap(),
        F2Matrix::cnot(2, 1, 0).unwrap(),
    ];
    bfs_closure(F2Matrix::identity(2), &gens)
}

fn bfs_closure(start: F2Matrix, gens: &[F2Matrix]) -> Vec<F2Matrix> {
    let mut seen: HashMap<u128, usize> = HashMap::new();
    let mut out = vec![start.clone()];
    seen.insert(start.key(), 0);
    let mut frontier = vec![start];
    while let Some(m) = frontier.pop() {
        for g in gens {
            let next = g.mul(&m);
            if !seen.contains_key(&next.key()) {
                seen.insert(next.key(), out.len());
                out.push(next.clone());
                frontier.push(next);
            }
        }
    }
    out.sort_by(|a, b| a.rows.cmp(&b.rows));
    out
}

/// Embed a 2x2 local element at the adjacent pair (site, site+1 mod n).
pub fn embed_local(local: &F2Matrix, n: usize, site: usize) -> Result<F2Matrix> {
    if local.n != 2 || n < 2 || site >= n {
        return Err(Error::Input("bad embedding".into()));
    }
    let a = site;
    let b = (site + 1) % n;
    let mut rows: Vec<u32> = (0..n).map(|i| 1u32 << i).collect();
    let lrow = |i: usize, j: usize| local.rows[i] >> j & 1;
    rows[a] = (lrow(0, 0) << a) | (lrow(0, 1) << b);
    rows[b] = (lrow(1, 0) << a) | (lrow(1, 1) << b);
    if a == b {
        return Err(Error::Input("degenerate pair".into()));
    }
    F2Matrix::new(n, rows)
}

/// One step of the walk sigma: uniform site, uniform local group element.
pub fn sample_sigma_step<R: Rng>(n: usize, rng: &mut R) -> F2Matrix {
    let locals = local_group();
    let site = rng.gen_range(0..n);
    let g = &locals[rng.gen_range(0..locals.len())];
    embed_local(g, n, site).expect("embedding of group element is invertible")
}

/// Z-string conjugation: with U|x> = |Mx>, U Z^y U^dag = Z^{M^{-T} y}.
pub fn conjugate_zstring(m: &F2Matrix, y: &BitString) -> Result<BitString> {
    if y.len() != m.n {
        return Err(Error::Input("dimension mismatch".into()));
    }
    let mt_inv = m.inverse().transpose();
    BitString::new(mt_inv.mul_vec(y.bits()), y.len())
}

/// Complete enumeration of the group generated by embedded local gates.
pub struct GroupTable {
    n: usize,
    elements: Vec<F2Matrix>,
    index: HashMap<u128, usize>,
    /// aggregated one-step kernel: (element index, probability)
    step_kernel: Vec<(usize, f64)>,
}

impl GroupTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[F2Matrix] {
        &self.elements
    }

    pub fn index_of(&self, m: &F2Matrix) -> Option<usize> {
        self.index.get(&m.key()).copied()
    }

    pub fn step_kernel(&self) -> &[(usize, f64)] {
        &self.step_kernel
    }
}

/// Enumerate the full CNOT-generated group at n <= 4 (|GL(4,2)| = 20160).
pub fn enumerate_group(n: usize) -> Result<GroupTable> {
    if !(2..=4).contains(&n) {
        return Err(Error::Capacity(format!(
            "group enumeration limited to 2 <= n <= 4, got {n}"
        )));
    }
    let locals = local_group();
    let mut gens = Vec::new();
    for site in 0..n {
        for g in &locals {
            gens.push(embed_local(g, n, site)?);
        }
    }
    let elements = bfs_closure(F2Matrix::identity(n), &gens);
    let index: HashMap<u128, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, m)| (m.key(), i))
        .collect();
    // aggregate the one-step measure over duplicated generators
    let p = 1.0 / gens.len() as f64;
    let mut agg: HashMap<usize, f64> = HashMap::new();
    for g in &gens {
        *agg.entry(index[&g.key()]).or_insert(0.0) += p;
    }
    let mut step_kernel: Vec<(usize, f64)> = agg.into_iter().collect();
    step_kernel.sort_unstable_by_key(|&(i, _)| i);
    Ok(GroupTable {
        n,
        elements,
        index,
        step_kernel,
    })
}

/// Exact distribution of sigma^{*k} over the group table.
#[derive(Clone, Debug)]
pub struct WalkDistribution {
    pub steps: u64,
    pub probs: Vec<f64>,
}

impl WalkDistribution {
    fn check_normalized(&self) {
        let s: f64 = self.probs.iter().sum();
        debug_assert!((s - 1.0).abs() < 1e-12, "distribution drifted: {s}");
    }

    /// Total variation distance to uniform on the table.
    pub fn tv_to_uniform(&self) -> f64 {
        let u = 1.0 / self.probs.len() as f64;
        0.5 * self.probs.iter().map(|p| (p - u).abs()).sum::<f64>()
    }
}

/// Convolve the one-step kernel k times starting from the identity.
pub fn exact_walk_distribution(table: &GroupTable, k: u64) -> WalkDistribution {
    let mut probs = vec![0.0; table.len()];
    probs[table.index_of(&F2Matrix::identity(table.n)).unwrap()] = 1.0;
    let maps: Vec<(Vec<usize>, f64)> = table
        .step_kernel
        .iter()
        .map(|&(gi, p)| {
            let g = &table.elements[gi];
            let map = table
                .elements
                .iter()
                .map(|m| table.index_of(&g.mul(m)).unwrap())
                .collect();
            (map, p)
        })
        .collect();
    let mut next = vec![0.0; table.len()];
    for _ in 0..k {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (map, p) in &maps {
            for (from, &to) in map.iter().enumerate() {
                next[to] += p * probs[from];
            }
        }
        std::mem::swap(&mut probs, &mut next);
    }
    let d = WalkDistribution { steps: k, probs };
    d.check_normalized();
    d
}

/// The comparison-method mixing bound 2^(n^2+n) (1 - 1/(500 n^5))^k.
pub fn lemma1_bound(n: usize, k: u64) -> f64 {
    let rate = 1.0 - 1.0 / (500.0 * (n as f64).powi(5));
    let ln = ((n * n + n) as f64) * std::f64::consts::LN_2 + k as f64 * rate.ln();
    ln.exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct TvReport {
    pub n: usize,
    pub k: u64,
    pub tv: f64,
    pub bound: f64,
    pub bound_vacuous: bool,
}

/// TV to uniform together with the closed-form bound.
pub fn tv_distance(table: &GroupTable, dist: &WalkDistribution) -> TvReport {
    let bound = lemma1_bound(table.n, dist.steps);
    TvReport {
        n: table.n,
        k: dist.steps,
        tv: dist.tv_to_uniform(),
        bound,
        bound_vacuous: bound > 1.0,
    }
}

/// Second-largest singular value and spectral gap of the one-step
/// transition operator on the group.
pub fn walk_spectral_gap(table: &GroupTable) -> Result<(f64, f64)> {
    let size = table.len();
    if size > 1024 {
        return Err(Error::Capacity(format!(
            "dense eigensolve limited to 1024 elements, got {size}"
        )));
    }
    let mut p = Mat::<f64>::zeros(size, size);
    for &(gi, prob) in &table.step_kernel {
        let g = &table.elements[gi];
        for (from, m) in table.elements.iter().enumerate() {
            let to = table.index_of(&g.mul(m)).unwrap();
            p.write(to, from, p.read(to, from) + prob);
        }
    }
    // sigma is symmetric (inverse-closed, uniform), so P is symmetric
    for i in 0..size {
        for j in 0..i {
            if (p.read(i, j) - p.read(j, i)).abs() > 1e-12 {
                return Err(Error::Input("transition matrix not symmetric".into()));
            }
        }
    }
    let evd = p.selfadjoint_eigendecomposition(faer::Side::Lower);
    let mut evs: Vec<f64> = (0..size).map(|i| evd.s().column_vector().read(i)).collect();
    evs.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    let second = if size > 1 { evs[1].abs() } else { 0.0 };
    Ok((second, 1.0 - second))
}

#[derive(Clone, Debug, Serialize)]
pub struct ZStringUniformity {
    pub n: usize,
    pub k: u64,
    /// TV between the conjugated-string distribution and uniform on nonzero strings.
    pub tv_nonzero: f64,
    /// TV between uniform-on-nonzero and uniform-on-all: exactly 2^{-n}.
    pub nonzero_vs_all: f64,
    pub exact: bool,
}

/// Distribution of M^{-T} e_1 under sigma^{*k}, measured against uniform on
/// the nonzero strings. Exact mode pushes the distribution through the
/// generator action; sampled mode runs walk trials.
pub fn zstring_uniformity(
    n: usize,
    k: u64,
    trials: Option<(u64, u64)>,
) -> Result<ZStringUniformity> {
    if n < 2 || n > 30 {
        return Err(Error::Input(format!("n={n} out of range")));
    }
    let nonzero = (1u64 << n) - 1;
    let nonzero_vs_all = 1.0 / (1u64 << n) as f64;
    let uniform = 1.0 / nonzero as f64;
    let tv = match trials {
        None => {
            if n > 4 {
                return Err(Error::Capacity(
                    "exact z-string mixing requires n <= 4; pass trials for sampling".into(),
                ));
            }
            let locals = local_group();
            let mut gens = Vec::new();
            for site in 0..n {
                for g in &locals {
                    gens.push(embed_local(g, n, site)?);
                }
            }
            // push-forward on y-space: y -> g^{-T} y per step
            let maps: Vec<Vec<u32>> = gens
                .iter()
                .map(|g| {
                    let gti = g.inverse().transpose();
                    (0..1u32 << n).map(|y| gti.mul_vec(y)).collect()
                })
                .collect();
            let p = 1.0 / gens.len() as f64;
            let mut dist = vec![0.0f64; 1 << n];
            dist[1] = 1.0; // e_1
            let mut next = vec![0.0f64; 1 << n];
            for _ in 0..k {
                next.iter_mut().for_each(|x| *x = 0.0);
                for map in &maps {
                    for (from, &to) in map.iter().enumerate() {
                        next[to as usize] += p * dist[from];
                    }
                }
                std::mem::swap(&mut dist, &mut next);
            }
            debug_assert!(dist[0] < 1e-15, "zero string is unreachable from e_1");
            0.5 * dist[1..]
                .iter()
                .map(|q| (q - uniform).abs())
                .sum::<f64>()
        }
        Some((trials, seed)) => {
            if trials == 0 {
                return Err(Error::Input("trials must be >= 1".into()));
            }
            let hits: Vec<u32> = par::run_trials(trials, |trial| {
                let mut rng = rng::stream(seed, trial, STREAM_F2);
                let mut m = F2Matrix::identity(n);
                for _ in 0..k {
                    m = sample_sigma_step(n, &mut rng).mul(&m);
                }
                m.inverse().transpose().mul_vec(1)
            });
            let mut counts: HashMap<u32, u64> = HashMap::new();
            for h in hits {
                *counts.entry(h).or_insert(0) += 1;
            }
            // empirical TV against uniform on nonzero strings
            let t = trials as f64;
            let mut tv = 0.0;
            for y in 1..=nonzero as u32 {
                let emp = counts.get(&y).copied().unwrap_or(0) as f64 / t;
                tv += (emp - uniform).abs();
            }
            0.5 * tv
        }
    };
    Ok(ZStringUniformity {
        n,
        k,
        tv_nonzero: tv,
        nonzero_vs_all,
        exact: trials.is_none(),
    })
}

/// Multinomial check that sampled sites are uniform within `z_sigma` sigmas.
pub fn site_histogram_uniform(n: usize, trials: u64, seed: u64, z_sigma: f64) -> bool {
    let mut counts = vec![0u64; n];
    for trial in 0..trials {
        let mut rng = rng::stream(seed, trial, STREAM_F2 + 100);
        counts[rng.gen_range(0..n)] += 1;
    }
    let p = 1.0 / n as f64;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    counts
        .iter()
        .all(|&c| (c as f64 - trials as f64 * p).abs() <= z_sigma * sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_group_is_gl22() {
        let g = local_group();
        assert_eq!(g.len(), 6);
        assert!(g.contains(&F2Matrix::identity(2)));
        for m in &g {
            assert!(g.contains(&m.inverse()));
            for m2 in &g {
                assert!(g.contains(&m.mul(m2)));
            }
        }
    }

    #[test]
    fn group_sizes_match_gl_n_2() {
        assert_eq!(enumerate_group(2).unwrap().len(), 6);
        let t3 = enumerate_group(3).unwrap();
        assert_eq!(t3.len(), 168);
        // appendix size bound: 168 <= 2^(2*9+6)
        assert!((t3.len() as f64) <= 2f64.powi(24));
        assert!(enumerate_group(5).is_err());
    }

    #[test]
    #[ignore] // ~20k elements; covered by `cargo test -- --ignored`
    fn group_size_n4() {
        assert_eq!(enumerate_group(4).unwrap().len(), 20160);
    }

    #[test]
    fn closure_under_product_and_inverse() {
        let t = enumerate_group(3).unwrap();
        for m in t.elements().iter().take(20) {
            assert!(t.index_of(&m.inverse()).is_some());
            for m2 in t.elements().iter().take(20) {
                assert!(t.index_of(&m.mul(m2)).is_some());
            }
        }
    }

    #[test]
    fn cnot_conjugation_table() {
        // CNOT control 0, target 1: Z on the control is fixed, Z on the
        // target picks up the control: Z_t -> Z_c Z_t
        let m = F2Matrix::cnot(2, 0, 1).unwrap();
        let z_control = BitString::new(0b01, 2).unwrap();
        let z_target = BitString::new(0b10, 2).unwrap();
        assert_eq!(conjugate_zstring(&m, &z_control).unwrap().bits(), 0b01);
        assert_eq!(conjugate_zstring(&m, &z_target).unwrap().bits(), 0b11);
        let id = F2Matrix::identity(2);
        assert_eq!(conjugate_zstring(&id, &z_control).unwrap(), z_control);
        let zero = BitString::zero(2).unwrap();
        assert_eq!(conjugate_zstring(&m, &zero).unwrap(), zero);
    }

    #[test]
    fn conjugation_is_a_homomorphism() {
        // conj(M1 * M2, y) = conj(M1, conj(M2, y)) since (AB)^{-T} = A^{-T} B^{-T}
        let t = enumerate_group(3).unwrap();
        let y = BitString::new(0b101, 3).unwrap();
        for m1 in t.elements().iter().take(15) {
            for m2 in t.elements().iter().take(15) {
                let lhs = conjugate_zstring(&m1.mul(m2), &y).unwrap();
                let rhs = conjugate_zstring(m1, &conjugate_zstring(m2, &y).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn zstring_orbit_is_all_nonzero() {
        for n in 2..=4usize {
            let locals = local_group();
            let mut maps = Vec::new();
            for site in 0..n {
                for g in &locals {
                    maps.push(embed_local(g, n, site).unwrap().inverse().transpose());
                }
            }
            let mut seen = vec![false; 1 << n];
            let mut frontier = vec![1u32];
            seen[1] = true;
            while let Some(y) = frontier.pop() {
                for m in &maps {
                    let y2 = m.mul_vec(y);
                    if !seen[y2 as usize] {
                        seen[y2 as usize] = true;
                        frontier.push(y2);
                    }
                }
            }
            assert!(!seen[0]);
            assert!(seen[1..].iter().all(|&s| s));
        }
    }

    #[test]
    fn walk_distribution_basics() {
        let t = enumerate_group(2).unwrap();
        let d0 = exact_walk_distribution(&t, 0);
        assert!((d0.tv_to_uniform() - (1.0 - 1.0 / 6.0)).abs() < 1e-15);
        // one step at n=2 is already uniform on the 6 elements
        let d1 = exact_walk_distribution(&t, 1);
        assert!(d1.tv_to_uniform() < 1e-15);
    }

    #[test]
    fn tv_monotone_and_bounded_n3() {
        let t = enumerate_group(3).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..200u64 {
            let d = exact_walk_distribution(&t, k);
            let rep = tv_distance(&t, &d);
            assert!(rep.tv <= prev + 1e-12);
            prev = rep.tv;
            if !rep.bound_vacuous {
                assert!(rep.tv <= rep.bound);
            }
        }
    }

    #[test]
    fn spectral_gap_values() {
        let t2 = enumerate_group(2).unwrap();
        let (second, gap) = walk_spectral_gap(&t2).unwrap();
        assert!(second.abs() < 1e-12);
        assert!((gap - 1.0).abs() < 1e-12);

        let t3 = enumerate_group(3).unwrap();
        let (second, gap) = walk_spectral_gap(&t3).unwrap();
        assert!(second < 1.0);
        assert!(gap >= 1.0 / (500.0 * 243.0));
    }

    #[test]
    fn zstring_uniformity_exact() {
        let r = zstring_uniformity(3, 0, None).unwrap();
        // point mass at e_1
        assert!((r.tv_nonzero - (1.0 - 1.0 / 7.0)).abs() < 1e-12);
        let r = zstring_uniformity(3, 200, None).unwrap();
        assert!(r.tv_nonzero < 0.01);
        assert_eq!(r.nonzero_vs_all, 0.125);
        assert!(r.nonzero_vs_all <= 2.0 * 0.125);
    }

    #[test]
    fn zstring_uniformity_sampled_converges() {
        let r = zstring_uniformity(3, 60, Some((4000, 5))).unwrap();
        // sampling noise floor for 7 outcomes at 4000 trials is ~0.02
        assert!(r.tv_nonzero < 0.05, "tv = {}", r.tv_nonzero);
    }

    #[test]
    fn sampled_steps_are_invertible_and_sites_uniform() {
        let mut rng = rng::stream(1, 0, STREAM_F2);
        for _ in 0..100 {
            let m = sample_sigma_step(4, &mut rng);
            assert!(m.is_invertible());
        }
        assert!(site_histogram_uniform(5, 20000, 7, 4.0));
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(F2Matrix::new(2, vec![0b01, 0b01]).is_err());
        assert!(F2Matrix::new(2, vec![0b01, 0b10]).is_ok());
    }

    #[test]
    fn inverse_and_transpose_roundtrip() {
        let t = enumerate_group(3).unwrap();
        for m in t.elements().iter().take(30) {
            let id = m.mul(&m.inverse());
            assert_eq!(id, F2Matrix::identity(3));
            assert_eq!(m.transpose().transpose(), *m);
        }
    }
}
