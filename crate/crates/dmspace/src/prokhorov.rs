//! Lévy-Prokhorov distance between finite measures on a common finite distance space.
//!
//! [`levy_prokhorov`] is exact: it enumerates subsets of the support and, for
//! each one, computes the smallest feasible ε from the sorted distances to the
//! subset. [`dpi_bisection_oracle`] is an independent check that bisects on ε
//! and tests both constraint families directly. For supports above the
//! enumeration cap, [`flow_upper_bound`] gives a certified upper bound from
//! partial couplings.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::space::{DistanceMatrix, ExtendedDistance, Finite, Scalar};

/// Largest support size enumerated exactly.
pub const ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProkhorovError {
    #[error("support of size {support} exceeds the enumeration cap {cap}; use flow_upper_bound for a certified bound")]
    TooLarge { support: usize, cap: usize },
    #[error("measure lengths {mu} and {nu} do not match {points} points")]
    LengthMismatch { mu: usize, nu: usize, points: usize },
    #[error("negative mass at point {0}")]
    NegativeMass(usize),
}

/// How a Prokhorov value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProkhorovMethod {
    Exact,
    FlowBound,
}

/// `(f_* μ)(z) = Σ_{f(x) = z} μ(x)`.
pub fn pushforward<T: Scalar>(map: &[usize], measure: &[T], target_len: usize) -> Vec<T> {
    assert_eq!(map.len(), measure.len(), "map must be total on the measure's points");
    let mut out = vec![T::zero(); target_len];
    for (&z, &m) in map.iter().zip(measure) {
        out[z] = out[z] + m;
    }
    out
}

fn check_inputs<T: Scalar>(dist: &DistanceMatrix<T>, mu: &[T], nu: &[T]) -> Result<(), ProkhorovError> {
    let n = dist.len();
    if mu.len() != n || nu.len() != n {
        return Err(ProkhorovError::LengthMismatch { mu: mu.len(), nu: nu.len(), points: n });
    }
    for (i, (a, b)) in mu.iter().zip(nu).enumerate() {
        if *a < T::zero() || *b < T::zero() {
            return Err(ProkhorovError::NegativeMass(i));
        }
    }
    Ok(())
}

fn support<T: Scalar>(m: &[T]) -> Vec<usize> {
    (0..m.len()).filter(|&i| m[i] > T::zero()).collect()
}

/// Exact `inf{ε > 0 : μ(A) ≤ ν(A^ε) + ε and ν(A) ≤ μ(A^ε) + ε for all A}`.
///
/// The infimum is returned even where it is not attained.
pub fn levy_prokhorov<T: Scalar>(dist: &DistanceMatrix<T>, mu: &[T], nu: &[T]) -> Result<T, ProkhorovError> {
    check_inputs(dist, mu, nu)?;
    for m in [mu, nu] {
        let s = support(m).len();
        if s > ENUMERATION_CAP {
            return Err(ProkhorovError::TooLarge { support: s, cap: ENUMERATION_CAP });
        }
    }
    let forward = one_sided(dist, mu, nu, T::zero());
    let both = one_sided(dist, nu, mu, forward);
    Ok(both.max_of(T::zero()))
}

/// Smallest ε for the constraint `μ(A) ≤ ν(A^ε) + ε`, given `dist(j, A)` for the ν-support.
fn constraint_value<T: Scalar>(mass_a: T, thresholds: &mut [(ExtendedDistance<T>, T)]) -> T {
    thresholds.sort_by(|a, b| a.0.cmp(&b.0));
    let mut prev = T::zero();
    let mut covered = T::zero();
    let mut best: Option<T> = None;
    for &(t, m) in thresholds.iter() {
        let Finite(t) = t else { break };
        if t > prev {
            let cand = prev.max_of(mass_a - covered);
            best = Some(best.map_or(cand, |b| b.min_of(cand)));
            prev = t;
        }
        covered = covered + m;
    }
    let cand = prev.max_of(mass_a - covered);
    best.map_or(cand, |b| b.min_of(cand))
}

/// Max over subsets `A ⊆ supp μ` of the constraint value, starting from `floor`.
///
/// Depth-first over the support sorted by decreasing mass. A branch is cut when
/// the mass still reachable cannot beat the best value, since every
/// constraint value is at most `μ(A)`.
fn one_sided<T: Scalar>(dist: &DistanceMatrix<T>, mu: &[T], nu: &[T], floor: T) -> T {
    let mut order = support(mu);
    order.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]).then(a.cmp(&b)));
    let targets = support(nu);
    let k = order.len();
    let mut suffix = vec![T::zero(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] + mu[order[i]];
    }

    struct Search<'a, T> {
        dist: &'a DistanceMatrix<T>,
        mu: &'a [T],
        nu: &'a [T],
        order: Vec<usize>,
        targets: Vec<usize>,
        suffix: Vec<T>,
        levels: Vec<Vec<ExtendedDistance<T>>>,
        scratch: Vec<(ExtendedDistance<T>, T)>,
        best: T,
    }

    impl<T: Scalar> Search<'_, T> {
        fn run(&mut self, start: usize, depth: usize, mass_a: T) {
            for idx in start..self.order.len() {
                if mass_a + self.suffix[idx] <= self.best {
                    return;
                }
                let p = self.order[idx];
                let new_mass = mass_a + self.mu[p];
                let (head, tail) = self.levels.split_at_mut(depth + 1);
                let prev = &head[depth];
                let cur = &mut tail[0];
                self.scratch.clear();
                for (slot, &j) in self.targets.iter().enumerate() {
                    let d = prev[slot].min(self.dist.get(j, p));
                    cur[slot] = d;
                    self.scratch.push((d, self.nu[j]));
                }
                let v = constraint_value(new_mass, &mut self.scratch);
                if v > self.best {
                    self.best = v;
                }
                self.run(idx + 1, depth + 1, new_mass);
            }
        }
    }

    let t = targets.len();
    let mut search = Search {
        dist,
        mu,
        nu,
        order,
        targets,
        suffix,
        levels: vec![vec![ExtendedDistance::Infinite; t]; k + 1],
        scratch: Vec::with_capacity(t),
        best: floor,
    };
    search.run(0, 0, T::zero());
    search.best
}

/// Bisection interval `[lo, hi]` with `hi − lo ≤ tol` containing `d_π(μ, ν)`.
///
/// Each probe checks both constraint families over all `2^n` subsets with
/// strict neighborhoods. `hi` is always a feasible ε.
pub fn dpi_bisection_oracle(
    dist: &DistanceMatrix<f64>,
    mu: &[f64],
    nu: &[f64],
    tol: f64,
) -> Result<(f64, f64), ProkhorovError> {
    check_inputs(dist, mu, nu)?;
    let n = dist.len();
    if n > ENUMERATION_CAP {
        return Err(ProkhorovError::TooLarge { support: n, cap: ENUMERATION_CAP });
    }
    assert!(tol > 0.0, "tolerance must be positive");
    let total = |m: &[f64]| m.iter().sum::<f64>();
    let mut lo = 0.0;
    let mut hi = total(mu).max(total(nu)) + 1.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(dist, mu, nu, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

fn feasible(dist: &DistanceMatrix<f64>, mu: &[f64], nu: &[f64], eps: f64) -> bool {
    let n = dist.len();
    let nbr: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| dist.get(i, j).lt_value(eps))
                .fold(0u32, |acc, j| acc | (1 << j))
        })
        .collect();
    let mass = |m: &[f64], set: u32| -> f64 { (0..n).filter(|&j| set >> j & 1 == 1).map(|j| m[j]).sum() };
    for a in 1u32..(1u32 << n) {
        let grown = (0..n).filter(|&i| a >> i & 1 == 1).fold(0u32, |acc, i| acc | nbr[i]);
        if mass(mu, a) > mass(nu, grown) + eps || mass(nu, a) > mass(mu, grown) + eps {
            return false;
        }
    }
    true
}

/// Upper bound `min_r max(r, μ(X) − F(r), ν(X) − F(r))` where `F(r)` is the
/// largest partial coupling moving mass only along distances `≤ r`.
///
/// Valid for unequal total masses; the value is at least the exact distance.
pub fn flow_upper_bound<T: Scalar>(dist: &DistanceMatrix<T>, mu: &[T], nu: &[T]) -> Result<T, ProkhorovError> {
    check_inputs(dist, mu, nu)?;
    let src = support(mu);
    let dst = support(nu);
    let total_mu: T = mu.iter().copied().sum();
    let total_nu: T = nu.iter().copied().sum();
    let mut radii: Vec<T> = vec![T::zero()];
    for &i in &src {
        for &j in &dst {
            if let Finite(d) = dist.get(i, j) {
                radii.push(d);
            }
        }
    }
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);

    let eval = |r: T| -> (T, T) {
        let f = coupling_mass(dist, mu, nu, &src, &dst, r);
        let deficit = (total_mu - f).max_of(total_nu - f);
        (r.max_of(deficit), deficit)
    };
    // deficit is nonincreasing in r: find the first radius with r >= deficit.
    let (mut lo, mut hi) = (0usize, radii.len() - 1);
    let (last_val, last_def) = eval(radii[hi]);
    if last_def > radii[hi] {
        return Ok(last_val.max_of(T::zero()));
    }
    let mut best = last_val;
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (v, def) = eval(radii[mid]);
        best = best.min_of(v);
        if def <= radii[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    best = best.min_of(eval(radii[lo]).0);
    if lo > 0 {
        best = best.min_of(eval(radii[lo - 1]).0);
    }
    Ok(best.max_of(T::zero()))
}

/// Exact distance when both supports fit the cap, flow bound otherwise.
pub fn prokhorov_auto<T: Scalar>(
    dist: &DistanceMatrix<T>,
    mu: &[T],
    nu: &[T],
) -> Result<(T, ProkhorovMethod), ProkhorovError> {
    match levy_prokhorov(dist, mu, nu) {
        Ok(v) => Ok((v, ProkhorovMethod::Exact)),
        Err(ProkhorovError::TooLarge { .. }) => Ok((flow_upper_bound(dist, mu, nu)?, ProkhorovMethod::FlowBound)),
        Err(e) => Err(e),
    }
}

fn coupling_mass<T: Scalar>(
    dist: &DistanceMatrix<T>,
    mu: &[T],
    nu: &[T],
    src: &[usize],
    dst: &[usize],
    r: T,
) -> T {
    let (a, b) = (src.len(), dst.len());
    let s = a + b;
    let t = s + 1;
    let mut net = Dinic::new(a + b + 2);
    let big: T = mu.iter().copied().sum::<T>() + nu.iter().copied().sum::<T>() + T::one();
    for (k, &i) in src.iter().enumerate() {
        net.add_edge(s, k, mu[i]);
        for (l, &j) in dst.iter().enumerate() {
            if dist.get(i, j) <= Finite(r) {
                net.add_edge(k, a + l, big);
            }
        }
    }
    for (l, &j) in dst.iter().enumerate() {
        net.add_edge(a + l, t, nu[j]);
    }
    net.max_flow(s, t)
}

struct Edge<T> {
    to: usize,
    cap: T,
}

/// Dinic's max-flow over a generic scalar.
struct Dinic<T> {
    adj: Vec<Vec<usize>>,
    edges: Vec<Edge<T>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl<T: Scalar> Dinic<T> {
    fn new(n: usize) -> Self {
        Dinic { adj: vec![Vec::new(); n], edges: Vec::new(), level: vec![0; n], iter: vec![0; n] }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: T) {
        self.adj[u].push(self.edges.len());
        self.edges.push(Edge { to: v, cap });
        self.adj[v].push(self.edges.len());
        self.edges.push(Edge { to: u, cap: T::zero() });
    }

    fn positive(c: T) -> bool {
        if T::EXACT {
            c > T::zero()
        } else {
            c.to_f64() > 1e-15
        }
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.level[v] < 0 && Self::positive(self.edges[e].cap) {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: T) -> T {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.edges[e].to;
            if self.level[v] == self.level[u] + 1 && Self::positive(self.edges[e].cap) {
                let got = self.dfs(v, t, pushed.min_of(self.edges[e].cap));
                if Self::positive(got) {
                    self.edges[e].cap = self.edges[e].cap - got;
                    self.edges[e ^ 1].cap = self.edges[e ^ 1].cap + got;
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        T::zero()
    }

    fn max_flow(&mut self, s: usize, t: usize) -> T {
        let mut flow = T::zero();
        let inf = self.edges.iter().map(|e| e.cap).sum::<T>() + T::one();
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, inf);
                if !Self::positive(f) {
                    break;
                }
                flow = flow + f;
            }
        }
        flow
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Infinite, Q};

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn equal_measures_are_at_zero() {
        let d = DistanceMatrix::from_finite_rows(&[vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let mu = [q(1, 3), q(2, 3)];
        assert_eq!(levy_prokhorov(&d, &mu, &mu).unwrap(), q(0, 1));
    }

    #[test]
    fn infinite_pair_example() {
        let d = DistanceMatrix::<Q>::disconnected(2);
        let v = levy_prokhorov(&d, &[q(1, 1), q(0, 1)], &[q(1, 1), q(3, 10)]).unwrap();
        assert_eq!(v, q(3, 10));
        let (lo, hi) = dpi_bisection_oracle(&DistanceMatrix::<f64>::disconnected(2), &[1.0, 0.0], &[1.0, 0.3], 1e-6)
            .unwrap();
        assert!(lo <= 0.3 && 0.3 <= hi && hi - lo <= 1e-6);
    }

    #[test]
    fn total_mass_gap_is_a_lower_bound() {
        let d = DistanceMatrix::from_finite_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (lo, _) = dpi_bisection_oracle(&d, &[0.5, 0.5], &[1.0, 1.0], 1e-6).unwrap();
        assert!(lo >= 1.0 - 1e-6);
        assert!(levy_prokhorov(&d, &[0.5, 0.5], &[1.0, 1.0]).unwrap() >= 1.0);
    }

    #[test]
    fn not_attained_infimum_is_returned() {
        // Moving unit mass across distance 1/2: any ε > 1/2 works, ε = 1/2 does not.
        let d = DistanceMatrix::from_finite_rows(&[vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]).unwrap();
        assert_eq!(levy_prokhorov(&d, &[q(1, 1), q(0, 1)], &[q(0, 1), q(1, 1)]).unwrap(), q(1, 2));
    }

    #[test]
    fn pushforward_examples() {
        assert_eq!(pushforward(&[0, 1], &[0.3, 0.7], 2), vec![0.3, 0.7]);
        assert_eq!(pushforward(&[0, 0], &[0.3, 0.7], 1), vec![1.0]);
        assert_eq!(pushforward(&[2, 0], &[0.3, 0.7], 4), vec![0.7, 0.0, 0.3, 0.0]);
    }

    #[test]
    fn cap_is_enforced() {
        let d = DistanceMatrix::from_fn(21, |_, _| Finite(1.0));
        let mu = vec![1.0; 21];
        assert!(matches!(levy_prokhorov(&d, &mu, &mu), Err(ProkhorovError::TooLarge { .. })));
        assert_eq!(prokhorov_auto(&d, &mu, &mu).unwrap(), (0.0, ProkhorovMethod::FlowBound));
    }

    #[test]
    fn flow_bound_dominates_exact() {
        let d = DistanceMatrix::from_finite_rows(&[
            vec![q(0, 1), q(1, 4), q(1, 1)],
            vec![q(1, 4), q(0, 1), q(3, 4)],
            vec![q(1, 1), q(3, 4), q(0, 1)],
        ])
        .unwrap();
        let mu = [q(1, 2), q(0, 1), q(1, 2)];
        let nu = [q(0, 1), q(1, 2), q(1, 4)];
        let exact = levy_prokhorov(&d, &mu, &nu).unwrap();
        let bound = flow_upper_bound(&d, &mu, &nu).unwrap();
        assert!(exact <= bound, "{exact} > {bound}");
    }

    #[test]
    fn infinite_cross_distances_freeze_neighborhoods() {
        let mut d = DistanceMatrix::<Q>::disconnected(3);
        d.set(0, 1, Finite(q(1, 1)));
        assert_eq!(d.get(0, 2), Infinite);
        let v = levy_prokhorov(&d, &[q(1, 1), q(0, 1), q(0, 1)], &[q(0, 1), q(0, 1), q(1, 1)]).unwrap();
        assert_eq!(v, q(1, 1));
    }
}
