//! Witness-based bounds on the distance `d_ρ` between finite distance measure spaces.
//!
//! A witness is a common ambient semi-distance space with embeddings of `X`
//! and `Y`, a level `L` and a removal budget ε. Its objective
//! `d_π(push μ, push ν) + 1/L + ε` is an upper bound on `d_ρ(X, Y)`; the
//! total-mass gap is a lower bound.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gluing::{self, glued_distance, GluingError, GluingSpec};
use crate::prokhorov::{prokhorov_auto, ProkhorovError, ProkhorovMethod, ENUMERATION_CAP};
use crate::space::{
    DistanceMatrix, ExtendedDistance, Finite, FiniteSpace, Infinite, Scalar, SpaceError, UnionFind, Violation,
};

/// How a witness ambient was built.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance<T> {
    /// `X ⊔ Y` glued along `pairs` with slack `delta`; this is a distance space when
    /// some cross distances stay infinite.
    Glued { pairs: Vec<(usize, usize)>, delta: T },
    /// Two witnesses glued along their common middle space.
    Composed,
    /// Built by the caller.
    Supplied,
}

/// Certificate for an upper bound on `d_ρ(X, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoWitness<T> {
    /// Semi-distance on the common space.
    pub ambient: DistanceMatrix<T>,
    pub embed_x: Vec<usize>,
    pub embed_y: Vec<usize>,
    pub level: ExtendedDistance<T>,
    pub eps: T,
    pub removed_x: Vec<usize>,
    pub removed_y: Vec<usize>,
    pub provenance: Provenance<T>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("witness shape: {0}")]
    Shape(String),
    #[error("removed mass on side {side} exceeds eps")]
    RemovedMass { side: char },
    #[error("embedding of side {side} is not L-isometric at pair {pair:?}")]
    NotLIsometric { side: char, pair: (usize, usize) },
    #[error("ambient is not a semi-distance: {0:?}")]
    Ambient(Violation),
    #[error("level L must be positive")]
    NonpositiveLevel,
    #[error("middle spaces differ")]
    MiddleMismatch,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Prokhorov(#[from] ProkhorovError),
    #[error(transparent)]
    Gluing(#[from] GluingError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Objective of a witness and its Prokhorov term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessValue<T> {
    pub objective: T,
    pub prokhorov: T,
    pub method: ProkhorovMethod,
}

fn sorted_unique(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

impl<T: Scalar> RhoWitness<T> {
    /// Glues `X` to `Y` along `spec`, then takes the largest valid level and the
    /// smallest ε covering the removed sets.
    pub fn from_gluing(
        x: &FiniteSpace<T>,
        y: &FiniteSpace<T>,
        spec: GluingSpec<T>,
        removed_x: Vec<usize>,
        removed_y: Vec<usize>,
        tol: T,
    ) -> Result<Self, WitnessError> {
        let pairs = spec.pairs.clone();
        let delta = spec.delta;
        let g = glued_distance(x.dist(), y.dist(), spec)?;
        let embed_x = g.x_embedding();
        let embed_y = g.y_embedding();
        let lx = gluing::max_isometric_level(x.dist(), &g.dist, &embed_x, &removed_x, tol);
        let ly = gluing::max_isometric_level(y.dist(), &g.dist, &embed_y, &removed_y, tol);
        let eps = x.mass_of(&removed_x).max_of(y.mass_of(&removed_y));
        Ok(RhoWitness {
            ambient: g.dist,
            embed_x,
            embed_y,
            level: lx.min(ly),
            eps,
            removed_x,
            removed_y,
            provenance: Provenance::Glued { pairs, delta },
        })
    }

    /// `X` glued to itself by the identity with δ = 0.
    pub fn identity(x: &FiniteSpace<T>) -> Self {
        let pairs = (0..x.len()).map(|i| (i, i)).collect();
        Self::from_gluing(x, x, GluingSpec::new(pairs, T::zero()), Vec::new(), Vec::new(), T::default_tol())
            .expect("identity gluing is admissible")
    }

    /// Exchanges the roles of the two spaces.
    pub fn transposed(&self) -> Self {
        let provenance = match &self.provenance {
            Provenance::Glued { pairs, delta } => Provenance::Glued {
                pairs: pairs.iter().map(|&(a, b)| (b, a)).collect(),
                delta: *delta,
            },
            p => p.clone(),
        };
        RhoWitness {
            ambient: self.ambient.clone(),
            embed_x: self.embed_y.clone(),
            embed_y: self.embed_x.clone(),
            level: self.level,
            eps: self.eps,
            removed_x: self.removed_y.clone(),
            removed_y: self.removed_x.clone(),
            provenance,
        }
    }

    /// Full measures pushed into the ambient, removed points included.
    pub fn pushforwards(&self, x: &FiniteSpace<T>, y: &FiniteSpace<T>) -> (Vec<T>, Vec<T>) {
        let n = self.ambient.len();
        (
            crate::prokhorov::pushforward(&self.embed_x, x.mass(), n),
            crate::prokhorov::pushforward(&self.embed_y, y.mass(), n),
        )
    }

    /// Checks every witness clause against the two spaces.
    pub fn validate(&self, x: &FiniteSpace<T>, y: &FiniteSpace<T>, tol: T) -> Result<(), WitnessError> {
        let n = self.ambient.len();
        if self.embed_x.len() != x.len() || self.embed_y.len() != y.len() {
            return Err(WitnessError::Shape("embedding lengths do not match the spaces".into()));
        }
        if self.embed_x.iter().chain(&self.embed_y).any(|&i| i >= n) {
            return Err(WitnessError::Shape("embedding index outside the ambient".into()));
        }
        if self.removed_x.iter().any(|&i| i >= x.len()) || self.removed_y.iter().any(|&i| i >= y.len()) {
            return Err(WitnessError::Shape("removed index out of range".into()));
        }
        if sorted_unique(&self.removed_x).len() != self.removed_x.len()
            || sorted_unique(&self.removed_y).len() != self.removed_y.len()
        {
            return Err(WitnessError::Shape("removed sets contain duplicates".into()));
        }
        if self.level <= ExtendedDistance::zero() {
            return Err(WitnessError::NonpositiveLevel);
        }
        if let Some(v) = self.ambient.semimetric_violations(tol).into_iter().next() {
            return Err(WitnessError::Ambient(v));
        }
        if !x.mass_of(&self.removed_x).le_tol(self.eps, tol) {
            return Err(WitnessError::RemovedMass { side: 'X' });
        }
        if !y.mass_of(&self.removed_y).le_tol(self.eps, tol) {
            return Err(WitnessError::RemovedMass { side: 'Y' });
        }
        for (side, space, embed, removed) in [
            ('X', x, &self.embed_x, &self.removed_x),
            ('Y', y, &self.embed_y, &self.removed_y),
        ] {
            let r = gluing::check_l_isometric(space.dist(), &self.ambient, embed, self.level, removed, tol);
            if let Some(pair) = r.first_violation {
                return Err(WitnessError::NotLIsometric { side, pair });
            }
        }
        Ok(())
    }
}

/// `d_π(push μ, push ν) + 1/L + ε` after validating the witness.
pub fn rho_upper_from_witness<T: Scalar>(
    x: &FiniteSpace<T>,
    y: &FiniteSpace<T>,
    w: &RhoWitness<T>,
    tol: T,
) -> Result<WitnessValue<T>, WitnessError> {
    w.validate(x, y, tol)?;
    let (mu, nu) = w.pushforwards(x, y);
    let (dpi, method) = prokhorov_auto(&w.ambient, &mu, &nu)?;
    let inv = w.level.recip().ok_or(WitnessError::NonpositiveLevel)?;
    Ok(WitnessValue { objective: dpi + inv + w.eps, prokhorov: dpi, method })
}

/// `|μ(X) − ν(Y)|`.
pub fn rho_lower<T: Scalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>) -> T {
    (x.total_mass() - y.total_mass()).abs()
}

/// Interval answer for `d_ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoEstimate<T> {
    pub lower: T,
    pub upper: T,
    pub witness: Option<RhoWitness<T>>,
    pub method: Option<ProkhorovMethod>,
    /// Candidate (matching, δ) pairs evaluated.
    pub evaluated: usize,
}

/// Search limits for [`rho_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct Budget<T> {
    /// Exhaustive enumeration is used when `|X|·|Y| ≤ 36` and the matching count is at most this.
    pub max_matchings: usize,
    /// Extra slack values tried besides the matched-pair distortions.
    pub delta_grid: Vec<T>,
    /// Removal mass caps tried besides the automatic prefixes.
    pub eps_grid: Vec<T>,
    /// Most slack values tried per matching (quantiles of the distortions).
    pub max_deltas: usize,
    /// Most points removed per side.
    pub max_removed: usize,
    pub local_search_iters: usize,
    /// Wall-clock cap. Results are only reproducible without one.
    pub time_cap: Option<Duration>,
}

impl<T: Scalar> Default for Budget<T> {
    fn default() -> Self {
        Budget {
            max_matchings: 20_000,
            delta_grid: Vec::new(),
            eps_grid: Vec::new(),
            max_deltas: 16,
            max_removed: 32,
            local_search_iters: 200,
            time_cap: None,
        }
    }
}

impl<T: Scalar> Budget<T> {
    pub fn quick() -> Self {
        Budget { max_matchings: 2_000, max_deltas: 8, max_removed: 8, local_search_iters: 40, ..Self::default() }
    }

    pub fn thorough() -> Self {
        Budget { max_matchings: 200_000, max_deltas: 64, max_removed: 128, local_search_iters: 2_000, ..Self::default() }
    }
}

/// Searches witnesses for `d_ρ(X, Y)`; deterministic for a given seed.
pub fn rho_search<T: Scalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>, budget: &Budget<T>, seed: u64) -> RhoEstimate<T> {
    rho_search_from(x, y, budget, seed, None)
}

/// As [`rho_search`], seeding the local search with `hint` pairs `(x, y)`.
pub fn rho_search_from<T: Scalar>(
    x: &FiniteSpace<T>,
    y: &FiniteSpace<T>,
    budget: &Budget<T>,
    seed: u64,
    hint: Option<&[(usize, usize)]>,
) -> RhoEstimate<T> {
    if x.canonical_cmp(y) == Ordering::Greater {
        let flipped: Option<Vec<(usize, usize)>> = hint.map(|h| h.iter().map(|&(a, b)| (b, a)).collect());
        let mut est = search_oriented(y, x, budget, seed, flipped.as_deref());
        est.witness = est.witness.map(|w| w.transposed());
        return est;
    }
    search_oriented(x, y, budget, seed, hint)
}

struct Best<T> {
    objective: Option<T>,
    witness: Option<RhoWitness<T>>,
    method: Option<ProkhorovMethod>,
    evaluated: usize,
}

impl<T: Scalar> Best<T> {
    fn beats(&self, v: T) -> bool {
        self.objective.is_none_or(|b| v < b)
    }
}

struct Searcher<'a, T> {
    x: &'a FiniteSpace<T>,
    y: &'a FiniteSpace<T>,
    budget: &'a Budget<T>,
    tol: T,
    started: Instant,
    best: Best<T>,
}

fn search_oriented<T: Scalar>(
    x: &FiniteSpace<T>,
    y: &FiniteSpace<T>,
    budget: &Budget<T>,
    seed: u64,
    hint: Option<&[(usize, usize)]>,
) -> RhoEstimate<T> {
    let lower = rho_lower(x, y);
    let tol = T::default_tol();
    if let Some(bij) = is_equivalent_zero_distance(x, y) {
        let removed_x = (0..x.len()).filter(|&i| x.mass()[i] == T::zero()).collect();
        let removed_y = (0..y.len()).filter(|&i| y.mass()[i] == T::zero()).collect();
        if let Ok(w) = RhoWitness::from_gluing(x, y, GluingSpec::new(bij, T::zero()), removed_x, removed_y, tol) {
            if let Ok(v) = rho_upper_from_witness(x, y, &w, tol) {
                if v.objective <= lower + tol {
                    return RhoEstimate {
                        lower,
                        upper: v.objective.max_of(lower),
                        witness: Some(w),
                        method: Some(v.method),
                        evaluated: 1,
                    };
                }
            }
        }
    }

    let mut s = Searcher {
        x,
        y,
        budget,
        tol,
        started: Instant::now(),
        best: Best { objective: None, witness: None, method: None, evaluated: 0 },
    };
    let (n, m) = (x.len(), y.len());
    let exhaustive = n * m <= 36 && matching_count(n, m) <= budget.max_matchings as u128;
    if exhaustive {
        let mut used = vec![false; m];
        let mut cur = Vec::new();
        s.enumerate(0, &mut used, &mut cur);
    } else {
        let start = match hint {
            Some(h) => h.to_vec(),
            None => greedy_matching(x, y),
        };
        s.evaluate(&start);
        s.evaluate(&[]);
        s.local_search(start, seed);
    }
    let upper = s.best.objective.map(|v| v.max_of(lower));
    RhoEstimate {
        lower,
        upper: upper.unwrap_or(lower),
        witness: s.best.witness,
        method: s.best.method,
        evaluated: s.best.evaluated,
    }
}

fn matching_count(n: usize, m: usize) -> u128 {
    // Σ_k C(n,k) C(m,k) k!
    let mut total: u128 = 0;
    for k in 0..=n.min(m) {
        let mut t: u128 = 1;
        for i in 0..k {
            t = t.saturating_mul((n - i) as u128).saturating_mul((m - i) as u128);
        }
        let mut fact: u128 = 1;
        for i in 1..=k {
            fact = fact.saturating_mul(i as u128);
        }
        total = total.saturating_add(t / fact);
    }
    total
}

impl<T: Scalar> Searcher<'_, T> {
    fn out_of_time(&self) -> bool {
        self.budget.time_cap.is_some_and(|cap| self.started.elapsed() > cap)
    }

    fn enumerate(&mut self, i: usize, used: &mut [bool], cur: &mut Vec<(usize, usize)>) {
        if self.out_of_time() {
            return;
        }
        if i == self.x.len() {
            let pairs = cur.clone();
            self.evaluate(&pairs);
            return;
        }
        self.enumerate(i + 1, used, cur);
        for j in 0..self.y.len() {
            if !used[j] {
                used[j] = true;
                cur.push((i, j));
                self.enumerate(i + 1, used, cur);
                cur.pop();
                used[j] = false;
            }
        }
    }

    fn local_search(&mut self, start: Vec<(usize, usize)>, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut current = start;
        let mut current_val = self.evaluate(&current);
        let (n, m) = (self.x.len(), self.y.len());
        if n == 0 || m == 0 {
            return;
        }
        for _ in 0..self.budget.local_search_iters {
            if self.out_of_time() {
                break;
            }
            let mut cand = current.clone();
            let free_x: Vec<usize> = (0..n).filter(|i| !cand.iter().any(|p| p.0 == *i)).collect();
            let free_y: Vec<usize> = (0..m).filter(|j| !cand.iter().any(|p| p.1 == *j)).collect();
            match rng.gen_range(0..4) {
                0 if cand.len() >= 2 => {
                    let a = rng.gen_range(0..cand.len());
                    let b = rng.gen_range(0..cand.len());
                    let (ya, yb) = (cand[a].1, cand[b].1);
                    cand[a].1 = yb;
                    cand[b].1 = ya;
                }
                1 if !cand.is_empty() && !free_y.is_empty() => {
                    let a = rng.gen_range(0..cand.len());
                    cand[a].1 = *free_y.choose(&mut rng).expect("nonempty");
                }
                2 if !free_x.is_empty() && !free_y.is_empty() => {
                    cand.push((*free_x.choose(&mut rng).expect("nonempty"), *free_y.choose(&mut rng).expect("nonempty")));
                }
                3 if !cand.is_empty() => {
                    let a = rng.gen_range(0..cand.len());
                    cand.remove(a);
                }
                _ => continue,
            }
            cand.sort_unstable();
            let v = self.evaluate(&cand);
            if let Some(v) = v {
                if current_val.is_none_or(|c| v < c) {
                    current = cand;
                    current_val = Some(v);
                }
            }
        }
    }

    /// Best objective for an injective matching, over slack values and removal sets.
    fn evaluate(&mut self, pairs: &[(usize, usize)]) -> Option<T> {
        let (x, y) = (self.x, self.y);
        let mut best_here: Option<T> = None;
        for delta in self.delta_candidates(pairs) {
            if self.out_of_time() {
                break;
            }
            self.best.evaluated += 1;
            let Ok(g) = glued_distance(x.dist(), y.dist(), GluingSpec::new(pairs.to_vec(), delta)) else {
                continue;
            };
            let embed_x = g.x_embedding();
            let embed_y = g.y_embedding();
            let n = g.dist.len();
            let mu = crate::prokhorov::pushforward(&embed_x, x.mass(), n);
            let nu = crate::prokhorov::pushforward(&embed_y, y.mass(), n);
            let Ok((dpi, method)) = prokhorov_auto(&g.dist, &mu, &nu) else {
                continue;
            };
            if !self.best.beats(dpi) && best_here.is_some_and(|b| b <= dpi) {
                continue;
            }
            for (rx, ry) in self.removal_candidates(&g.dist, &embed_x, &embed_y) {
                let lx = gluing::max_isometric_level(x.dist(), &g.dist, &embed_x, &rx, self.tol);
                let ly = gluing::max_isometric_level(y.dist(), &g.dist, &embed_y, &ry, self.tol);
                let Some(inv) = lx.min(ly).recip() else { continue };
                let eps = x.mass_of(&rx).max_of(y.mass_of(&ry));
                let obj = dpi + inv + eps;
                if best_here.is_none_or(|b| obj < b) {
                    best_here = Some(obj);
                }
                if self.best.beats(obj) {
                    self.best.objective = Some(obj);
                    self.best.method = Some(method);
                    self.best.witness = Some(RhoWitness {
                        ambient: g.dist.clone(),
                        embed_x: embed_x.clone(),
                        embed_y: embed_y.clone(),
                        level: lx.min(ly),
                        eps,
                        removed_x: rx,
                        removed_y: ry,
                        provenance: Provenance::Glued { pairs: pairs.to_vec(), delta },
                    });
                }
            }
        }
        best_here
    }

    fn delta_candidates(&self, pairs: &[(usize, usize)]) -> Vec<T> {
        let mut ds = vec![T::zero()];
        for (k, &(a, b)) in pairs.iter().enumerate() {
            for &(a2, b2) in &pairs[k + 1..] {
                if let (Finite(u), Finite(v)) = (self.x.d(a, a2), self.y.d(b, b2)) {
                    ds.push((u - v).abs());
                }
            }
        }
        ds.sort_by(|a, b| a.total_cmp(b));
        ds.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);
        let cap = self.budget.max_deltas.max(2);
        if ds.len() > cap {
            let last = ds.len() - 1;
            ds = (0..cap).map(|k| ds[k * last / (cap - 1)]).collect();
        }
        ds.extend(self.budget.delta_grid.iter().copied());
        ds.sort_by(|a, b| a.total_cmp(b));
        ds.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);
        ds
    }

    /// Removal sets to try: zero-mass points always, then greedy removal of the
    /// lighter endpoint of the pair that limits `L`, then mass-sorted prefixes of
    /// the points involved in mismatches, then mass caps from the budget.
    fn removal_candidates(
        &self,
        ambient: &DistanceMatrix<T>,
        embed_x: &[usize],
        embed_y: &[usize],
    ) -> Vec<(Vec<usize>, Vec<usize>)> {
        let (x, y) = (self.x, self.y);
        let zeros = |s: &FiniteSpace<T>| -> Vec<usize> { (0..s.len()).filter(|&i| s.mass()[i] == T::zero()).collect() };
        let base = (zeros(x), zeros(y));
        let mut out = vec![base.clone()];
        let cap_mass = self.best.objective;

        let (mut rx, mut ry) = base.clone();
        for _ in 0..self.budget.max_removed {
            let mx = gluing::mismatched_pairs(x.dist(), ambient, embed_x, &rx, self.tol);
            let my = gluing::mismatched_pairs(y.dist(), ambient, embed_y, &ry, self.tol);
            let pick = match (mx.first(), my.first()) {
                (None, None) => break,
                (Some(a), None) => ('X', a.0, a.1),
                (None, Some(b)) => ('Y', b.0, b.1),
                (Some(a), Some(b)) => {
                    if a.2 <= b.2 {
                        ('X', a.0, a.1)
                    } else {
                        ('Y', b.0, b.1)
                    }
                }
            };
            let (space, set) = if pick.0 == 'X' { (x, &mut rx) } else { (y, &mut ry) };
            let victim = if space.mass()[pick.2] < space.mass()[pick.1] { pick.2 } else { pick.1 };
            set.push(victim);
            set.sort_unstable();
            let eps = x.mass_of(&rx).max_of(y.mass_of(&ry));
            if cap_mass.is_some_and(|c| eps >= c) {
                break;
            }
            out.push((rx.clone(), ry.clone()));
        }

        let involved = |s: &FiniteSpace<T>, embed: &[usize], base: &[usize]| -> Vec<usize> {
            let mut pts: Vec<usize> = gluing::mismatched_pairs(s.dist(), ambient, embed, base, self.tol)
                .iter()
                .flat_map(|p| [p.0, p.1])
                .collect();
            pts.sort_unstable();
            pts.dedup();
            pts.sort_by(|&a, &b| s.mass()[a].total_cmp(&s.mass()[b]).then(a.cmp(&b)));
            pts
        };
        let px = involved(x, embed_x, &base.0);
        let py = involved(y, embed_y, &base.1);
        let steps = px.len().max(py.len()).min(self.budget.max_removed);
        for k in 1..=steps {
            let mut ax = base.0.clone();
            ax.extend(px.iter().take(k));
            ax.sort_unstable();
            let mut ay = base.1.clone();
            ay.extend(py.iter().take(k));
            ay.sort_unstable();
            if cap_mass.is_some_and(|c| x.mass_of(&ax).max_of(y.mass_of(&ay)) >= c) {
                break;
            }
            out.push((ax, ay));
        }

        for &cap in &self.budget.eps_grid {
            let take = |pts: &[usize], s: &FiniteSpace<T>, base: &[usize]| -> Vec<usize> {
                let mut set = base.to_vec();
                let mut m = s.mass_of(base);
                for &p in pts {
                    if m + s.mass()[p] > cap {
                        break;
                    }
                    m = m + s.mass()[p];
                    set.push(p);
                }
                set.sort_unstable();
                set
            };
            out.push((take(&px, x, &base.0), take(&py, y, &base.1)));
        }
        out.dedup();
        out
    }
}

/// Greedy matching by similarity of mass and sorted distance profile.
fn greedy_matching<T: Scalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>) -> Vec<(usize, usize)> {
    let profile = |s: &FiniteSpace<T>, i: usize| -> Vec<f64> {
        let mut p: Vec<f64> = s.dist().row(i).iter().filter(|d| d.is_finite()).map(|d| d.to_f64()).collect();
        p.sort_by(f64::total_cmp);
        p
    };
    let px: Vec<Vec<f64>> = (0..x.len()).map(|i| profile(x, i)).collect();
    let py: Vec<Vec<f64>> = (0..y.len()).map(|j| profile(y, j)).collect();
    let mut scored = Vec::with_capacity(x.len() * y.len());
    for i in 0..x.len() {
        for j in 0..y.len() {
            let k = px[i].len().min(py[j].len());
            let shape: f64 = (0..k).map(|t| (px[i][t] - py[j][t]).abs()).sum::<f64>() / k.max(1) as f64;
            let mass = (x.mass()[i].to_f64() - y.mass()[j].to_f64()).abs();
            scored.push((shape + mass, i, j));
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let (mut ux, mut uy) = (vec![false; x.len()], vec![false; y.len()]);
    let mut out = Vec::new();
    for (_, i, j) in scored {
        if !ux[i] && !uy[j] {
            ux[i] = true;
            uy[j] = true;
            out.push((i, j));
        }
    }
    out.sort_unstable();
    out
}

/// Glues the two witnesses along the common middle space with δ = 0.
///
/// Only middle points kept by both witnesses are identified. The result has
/// `L = min(L1, L2)` (lowered further only if a check fails numerically) and
/// `ε = max(ε1, ε2)`.
pub fn compose_witnesses<T: Scalar>(
    first: (&FiniteSpace<T>, &FiniteSpace<T>, &RhoWitness<T>),
    second: (&FiniteSpace<T>, &FiniteSpace<T>, &RhoWitness<T>),
    tol: T,
) -> Result<RhoWitness<T>, WitnessError> {
    let (x, y, w1) = first;
    let (y2, z, w2) = second;
    if y.labels() != y2.labels() || y.dist() != y2.dist() || y.mass() != y2.mass() {
        return Err(WitnessError::MiddleMismatch);
    }
    w1.validate(x, y, tol)?;
    w2.validate(y, z, tol)?;
    let mut dropped = vec![false; y.len()];
    for &i in w1.removed_y.iter().chain(&w2.removed_x) {
        dropped[i] = true;
    }
    let pairs: Vec<(usize, usize)> = (0..y.len())
        .filter(|&i| !dropped[i])
        .map(|i| (w1.embed_y[i], w2.embed_x[i]))
        .collect();
    let g = glued_distance(&w1.ambient, &w2.ambient, GluingSpec::new(pairs, T::zero()))?;
    let n1 = w1.ambient.len();
    let raw_x = w1.embed_x.clone();
    let raw_z: Vec<usize> = w2.embed_y.iter().map(|&k| n1 + k).collect();
    let keep = sorted_unique(&[raw_x.as_slice(), raw_z.as_slice()].concat());
    let pos = |k: usize| keep.binary_search(&k).expect("kept index");
    let ambient = g.dist.restrict(&keep);
    let embed_x: Vec<usize> = raw_x.iter().map(|&k| pos(k)).collect();
    let embed_y: Vec<usize> = raw_z.iter().map(|&k| pos(k)).collect();
    let removed_x = w1.removed_x.clone();
    let removed_y = w2.removed_y.clone();
    let lx = gluing::max_isometric_level(x.dist(), &ambient, &embed_x, &removed_x, tol);
    let lz = gluing::max_isometric_level(z.dist(), &ambient, &embed_y, &removed_y, tol);
    let level = w1.level.min(w2.level).min(lx).min(lz);
    let w = RhoWitness {
        ambient,
        embed_x,
        embed_y,
        level,
        eps: w1.eps.max_of(w2.eps),
        removed_x,
        removed_y,
        provenance: Provenance::Composed,
    };
    w.validate(x, z, tol)?;
    Ok(w)
}

/// Distance- and mass-preserving bijection between the positive-mass parts, if one exists.
///
/// Returns pairs `(x, y)` of original indices.
pub fn is_equivalent_zero_distance<T: Scalar>(x: &FiniteSpace<T>, y: &FiniteSpace<T>) -> Option<Vec<(usize, usize)>> {
    let tol = T::default_tol();
    let px: Vec<usize> = (0..x.len()).filter(|&i| x.mass()[i] > T::zero()).collect();
    let py: Vec<usize> = (0..y.len()).filter(|&j| y.mass()[j] > T::zero()).collect();
    if px.len() != py.len() || !x.total_mass().eq_tol(y.total_mass(), tol) {
        return None;
    }
    let signature = |s: &FiniteSpace<T>, pts: &[usize], i: usize| -> Vec<ExtendedDistance<T>> {
        let mut row: Vec<ExtendedDistance<T>> = pts.iter().map(|&j| s.d(i, j)).collect();
        row.sort();
        row
    };
    let sx: Vec<_> = px.iter().map(|&i| signature(x, &px, i)).collect();
    let sy: Vec<_> = py.iter().map(|&j| signature(y, &py, j)).collect();
    let same_row = |a: &[ExtendedDistance<T>], b: &[ExtendedDistance<T>]| a.iter().zip(b).all(|(u, v)| u.eq_tol(v, tol));
    let candidates: Vec<Vec<usize>> = (0..px.len())
        .map(|a| {
            (0..py.len())
                .filter(|&b| x.mass()[px[a]].eq_tol(y.mass()[py[b]], tol) && same_row(&sx[a], &sy[b]))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..px.len()).collect();
    order.sort_by_key(|&a| (candidates[a].len(), a));

    fn backtrack<T: Scalar>(
        k: usize,
        order: &[usize],
        candidates: &[Vec<usize>],
        assign: &mut Vec<Option<usize>>,
        used: &mut [bool],
        ok: &dyn Fn(usize, usize, usize, usize) -> bool,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let a = order[k];
        for &b in &candidates[a] {
            if used[b] {
                continue;
            }
            if order[..k].iter().all(|&a2| ok(a, b, a2, assign[a2].expect("assigned"))) {
                used[b] = true;
                assign[a] = Some(b);
                if backtrack::<T>(k + 1, order, candidates, assign, used, ok) {
                    return true;
                }
                assign[a] = None;
                used[b] = false;
            }
        }
        false
    }

    let ok = |a: usize, b: usize, a2: usize, b2: usize| x.d(px[a], px[a2]).eq_tol(&y.d(py[b], py[b2]), tol);
    let mut assign = vec![None; px.len()];
    let mut used = vec![false; py.len()];
    if !backtrack::<T>(0, &order, &candidates, &mut assign, &mut used, &ok) {
        return None;
    }
    Some((0..px.len()).map(|a| (px[a], py[assign[a].expect("complete")])).collect())
}

/// Which clauses of the quasi-isometry statement hold for the extracted map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuasiIsometryClauses {
    pub excluded_mass_below_delta: bool,
    pub distance_bounds: bool,
    pub measure_forward: bool,
    pub measure_backward: bool,
    pub surjectivity: bool,
    pub preimage_neighborhoods: bool,
    pub measure_backward_strong: bool,
}

impl QuasiIsometryClauses {
    pub fn all(&self) -> bool {
        self.excluded_mass_below_delta
            && self.distance_bounds
            && self.measure_forward
            && self.measure_backward
            && self.surjectivity
            && self.preimage_neighborhoods
            && self.measure_backward_strong
    }
}

/// Map extracted from a witness, defined off the excluded set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiIsometry<T> {
    pub map: Vec<Option<usize>>,
    pub excluded: Vec<usize>,
    pub excluded_mass: T,
    pub clauses: QuasiIsometryClauses,
}

/// Nearest-point map from a witness whose objective is below `delta < 1/√2`,
/// with every clause of the quasi-isometry statement checked.
pub fn extract_quasi_isometry<T: Scalar>(
    x: &FiniteSpace<T>,
    y: &FiniteSpace<T>,
    w: &RhoWitness<T>,
    delta: T,
    tol: T,
) -> Result<QuasiIsometry<T>, WitnessError> {
    let value = rho_upper_from_witness(x, y, w, tol)?;
    let two = T::one() + T::one();
    if !(value.objective < delta) {
        return Err(WitnessError::Precondition(format!("objective {} is not below delta {delta}", value.objective)));
    }
    if !(delta > T::zero() && delta * delta * two < T::one()) {
        return Err(WitnessError::Precondition("delta must lie in (0, 1/sqrt(2))".into()));
    }
    if y.len() > ENUMERATION_CAP {
        return Err(ProkhorovError::TooLarge { support: y.len(), cap: ENUMERATION_CAP }.into());
    }
    let amb = &w.ambient;
    let mut map = vec![None; x.len()];
    let mut excluded = w.removed_x.clone();
    for i in 0..x.len() {
        if w.removed_x.contains(&i) {
            continue;
        }
        let best = (0..y.len()).min_by(|&a, &b| {
            amb.get(w.embed_x[i], w.embed_y[a]).cmp(&amb.get(w.embed_x[i], w.embed_y[b])).then(a.cmp(&b))
        });
        match best {
            Some(j) if amb.get(w.embed_x[i], w.embed_y[j]) <= Finite(delta) => map[i] = Some(j),
            _ => excluded.push(i),
        }
    }
    excluded.sort_unstable();
    let excluded_mass = x.mass_of(&excluded);
    let domain: Vec<usize> = (0..x.len()).filter(|&i| map[i].is_some()).collect();
    let f = |i: usize| map[i].expect("in domain");
    let two_delta = two * delta;
    let scale = T::one() / delta - two_delta;

    let mut distance_bounds = true;
    for (a, &i) in domain.iter().enumerate() {
        for &k in &domain[a..] {
            let dx = x.d(i, k);
            let dy = y.d(f(i), f(k));
            if dx.lt_value(scale) || dy.lt_value(scale) {
                let strict_lt = |p: ExtendedDistance<T>, q: ExtendedDistance<T>| match (p, q) {
                    (Finite(p), Finite(q)) => p < q + two_delta + tol,
                    (Finite(_), Infinite) => true,
                    _ => false,
                };
                if !strict_lt(dy, dx) || !strict_lt(dx, dy) {
                    distance_bounds = false;
                }
            }
        }
    }

    let m = y.len();
    let (mu, nu) = (x.mass(), y.mass());
    let ball = |dist: &DistanceMatrix<T>, set: &[usize], within: &[usize]| -> Vec<usize> {
        within.iter().copied().filter(|&p| set.iter().any(|&s| dist.get(p, s).lt_value(two_delta))).collect()
    };
    let all_x: Vec<usize> = (0..x.len()).collect();
    let all_y: Vec<usize> = (0..m).collect();
    let mass = |v: &[T], set: &[usize]| -> T { set.iter().map(|&i| v[i]).sum() };
    let (mut fwd, mut bwd, mut incl, mut strong) = (true, true, true, true);
    for bits in 0u32..(1u32 << m) {
        let e: Vec<usize> = (0..m).filter(|&j| bits >> j & 1 == 1).collect();
        let pre: Vec<usize> = domain.iter().copied().filter(|&i| e.contains(&f(i))).collect();
        let e_grown = ball(y.dist(), &e, &all_y);
        let pre_grown = ball(x.dist(), &pre, &all_x);
        if !mass(mu, &pre).le_tol(mass(nu, &e_grown) + two_delta, tol) {
            fwd = false;
        }
        if !mass(nu, &e).le_tol(mass(mu, &pre_grown) + two_delta, tol) {
            bwd = false;
        }
        let pre_of_grown: Vec<usize> = domain.iter().copied().filter(|&i| e_grown.contains(&f(i))).collect();
        let pre_grown_dom = ball(x.dist(), &pre, &domain);
        if pre_grown_dom.iter().any(|i| !pre_of_grown.contains(i)) {
            incl = false;
        }
        if delta * two < T::one() && !mass(nu, &e).le_tol(mass(mu, &pre_of_grown) + two_delta, tol) {
            strong = false;
        }
    }
    let image: Vec<usize> = sorted_unique(&domain.iter().map(|&i| f(i)).collect::<Vec<_>>());
    let surjectivity = y.total_mass().le_tol(mass(nu, &ball(y.dist(), &image, &all_y)) + two_delta, tol);

    Ok(QuasiIsometry {
        map,
        excluded,
        excluded_mass,
        clauses: QuasiIsometryClauses {
            excluded_mass_below_delta: excluded_mass < delta,
            distance_bounds,
            measure_forward: fwd,
            measure_backward: bwd,
            surjectivity,
            preimage_neighborhoods: incl,
            measure_backward_strong: strong,
        },
    })
}

/// Stabilization rules for [`limit_of_finite_sequence`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConfig<T> {
    /// Spread allowed within the tail, and the identification threshold.
    pub tol: T,
    /// Number of trailing terms inspected.
    pub tail_len: usize,
    /// A strictly increasing tail ending above this diverges to infinity.
    pub divergence_threshold: T,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("empty sequence")]
    Empty,
    #[error("space {0} has different labels from the first")]
    LabelMismatch(usize),
    #[error("distance between {0} and {1} does not stabilize")]
    DistanceUnstable(String, String),
    #[error("mass of {0} does not stabilize")]
    MassUnstable(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

enum Tail<T> {
    Limit(T),
    Diverges,
    Unstable,
}

fn tail_limit<T: Scalar>(values: &[ExtendedDistance<T>], cfg: &LimitConfig<T>) -> Tail<T> {
    let tail = &values[values.len().saturating_sub(cfg.tail_len.max(1))..];
    if tail.iter().all(|v| !v.is_finite()) {
        return Tail::Diverges;
    }
    let finite: Vec<T> = tail.iter().filter_map(|v| v.value()).collect();
    if finite.len() == tail.len() {
        let lo = finite.iter().copied().reduce(|a, b| a.min_of(b)).expect("nonempty");
        let hi = finite.iter().copied().reduce(|a, b| a.max_of(b)).expect("nonempty");
        if hi - lo <= cfg.tol {
            return Tail::Limit(*finite.last().expect("nonempty"));
        }
        let increasing = finite.windows(2).all(|w| w[0] < w[1]);
        if increasing && hi > cfg.divergence_threshold {
            return Tail::Diverges;
        }
    }
    Tail::Unstable
}

/// Entrywise limit of a sequence of spaces on common labels, with points at
/// limit distance below `tol` identified and their masses summed.
pub fn limit_of_finite_sequence<T: Scalar>(
    seq: &[FiniteSpace<T>],
    cfg: &LimitConfig<T>,
) -> Result<FiniteSpace<T>, LimitError> {
    let first = seq.first().ok_or(LimitError::Empty)?;
    for (k, s) in seq.iter().enumerate() {
        if s.labels() != first.labels() {
            return Err(LimitError::LabelMismatch(k));
        }
    }
    let n = first.len();
    let labels = first.labels();
    let mut lim = DistanceMatrix::disconnected(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let vals: Vec<ExtendedDistance<T>> = seq.iter().map(|s| s.d(i, j)).collect();
            match tail_limit(&vals, cfg) {
                Tail::Limit(v) => lim.set(i, j, Finite(v)),
                Tail::Diverges => lim.set(i, j, Infinite),
                Tail::Unstable => return Err(LimitError::DistanceUnstable(labels[i].clone(), labels[j].clone())),
            }
        }
    }
    let mut mass = Vec::with_capacity(n);
    for i in 0..n {
        let vals: Vec<ExtendedDistance<T>> = seq.iter().map(|s| Finite(s.mass()[i])).collect();
        match tail_limit(&vals, cfg) {
            Tail::Limit(v) => mass.push(v),
            _ => return Err(LimitError::MassUnstable(labels[i].clone())),
        }
    }
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if lim.get(i, j).lt_value(cfg.tol) {
                uf.union(i, j);
            }
        }
    }
    let classes = uf.classes();
    let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
    let class_labels = classes
        .iter()
        .map(|c| c.iter().map(|&i| labels[i].as_str()).collect::<Vec<_>>().join("~"))
        .collect();
    let class_mass = classes.iter().map(|c| c.iter().map(|&i| mass[i]).sum()).collect();
    let tol = cfg.tol.max_of(T::default_tol());
    Ok(FiniteSpace::with_tol(class_labels, lim.restrict(&reps), class_mass, tol)?)
}

/// Uniformly random helper for tests and experiments: injective matching of size `k`.
pub fn random_matching(n: usize, m: usize, k: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut xs: Vec<usize> = (0..n).collect();
    let mut ys: Vec<usize> = (0..m).collect();
    xs.shuffle(rng);
    ys.shuffle(rng);
    let mut out: Vec<(usize, usize)> = xs.into_iter().zip(ys).take(k).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Q;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    fn pair_at_infinity(m: [Q; 2]) -> FiniteSpace<Q> {
        FiniteSpace::from_matrix(DistanceMatrix::disconnected(2), m.to_vec()).unwrap()
    }

    fn pair_at(d: Q) -> FiniteSpace<Q> {
        FiniteSpace::from_rows(&[vec![q(0, 1), d], vec![d, q(0, 1)]], vec![q(1, 1), q(1, 1)]).unwrap()
    }

    #[test]
    fn identity_witness_is_zero() {
        let x = pair_at(q(3, 1));
        let w = RhoWitness::identity(&x);
        let v = rho_upper_from_witness(&x, &x, &w, q(0, 1)).unwrap();
        assert_eq!(v.objective, q(0, 1));
    }

    #[test]
    fn hand_witness_mass_defect() {
        let eps0 = q(1, 20);
        let x = pair_at_infinity([q(1, 1), q(0, 1)]);
        let y = pair_at_infinity([q(1, 1), eps0]);
        let w = RhoWitness::from_gluing(&x, &y, GluingSpec::new(vec![(0, 0), (1, 1)], q(0, 1)), vec![], vec![], q(0, 1))
            .unwrap();
        assert_eq!(w.level, Infinite);
        assert_eq!(rho_upper_from_witness(&x, &y, &w, q(0, 1)).unwrap().objective, eps0);
        let est = rho_search(&x, &y, &Budget::default(), 7);
        assert!(est.upper <= eps0);
        assert_eq!(est.lower, eps0);
    }

    #[test]
    fn hand_witness_large_level() {
        let x = pair_at(q(10, 1));
        let y = pair_at_infinity([q(1, 1), q(1, 1)]);
        let w = RhoWitness::from_gluing(&x, &y, GluingSpec::new(vec![(0, 0), (1, 1)], q(0, 1)), vec![], vec![], q(0, 1))
            .unwrap();
        assert_eq!(w.level, Finite(q(10, 1)));
        assert_eq!(rho_upper_from_witness(&x, &y, &w, q(0, 1)).unwrap().objective, q(1, 10));
        assert!(rho_search(&x, &y, &Budget::default(), 7).upper <= q(1, 10));
    }

    #[test]
    fn lower_is_mass_gap() {
        let x = FiniteSpace::from_rows(&[vec![q(0, 1)]], vec![q(1, 4)]).unwrap();
        let y = FiniteSpace::from_rows(&[vec![q(0, 1)]], vec![q(3, 4)]).unwrap();
        assert_eq!(rho_lower(&x, &y), q(1, 2));
        let z = FiniteSpace::from_rows(&[vec![q(0, 1)]], vec![q(2, 1)]).unwrap();
        let one = FiniteSpace::from_rows(&[vec![q(0, 1)]], vec![q(1, 1)]).unwrap();
        let est = rho_search(&one, &z, &Budget::default(), 1);
        assert!(est.lower >= q(1, 1) && est.lower <= est.upper);
    }

    #[test]
    fn equivalence_examples() {
        let x = FiniteSpace::from_rows(
            &[vec![q(0, 1), q(1, 1), q(2, 1)], vec![q(1, 1), q(0, 1), q(3, 2)], vec![q(2, 1), q(3, 2), q(0, 1)]],
            vec![q(1, 2), q(1, 4), q(1, 4)],
        )
        .unwrap();
        let perm = x.permute(&[2, 0, 1]);
        assert!(is_equivalent_zero_distance(&x, &perm).is_some());

        let mut rows = x.dist().rows();
        for r in rows.iter_mut() {
            r.push(Infinite);
        }
        rows.push(vec![Infinite, Infinite, Infinite, ExtendedDistance::zero()]);
        let mut mass = x.mass().to_vec();
        mass.push(q(0, 1));
        let aug = FiniteSpace::from_matrix(DistanceMatrix::from_rows(rows).unwrap(), mass).unwrap();
        assert!(is_equivalent_zero_distance(&x, &aug).is_some());
        assert_eq!(rho_search(&x, &aug, &Budget::default(), 3).upper, q(0, 1));

        let heavier = x.scale_measure(q(2, 1));
        assert!(is_equivalent_zero_distance(&x, &heavier).is_none());
    }

    #[test]
    fn compose_with_identity() {
        let x = pair_at(q(10, 1));
        let y = pair_at_infinity([q(1, 1), q(1, 1)]);
        let w1 = rho_search(&x, &y, &Budget::default(), 1).witness.unwrap();
        let u1 = rho_upper_from_witness(&x, &y, &w1, q(0, 1)).unwrap().objective;
        let w2 = RhoWitness::identity(&y);
        let c = compose_witnesses((&x, &y, &w1), (&y, &y, &w2), q(0, 1)).unwrap();
        let v = rho_upper_from_witness(&x, &y, &c, q(0, 1)).unwrap().objective;
        assert!(v <= u1, "{v} > {u1}");
    }

    #[test]
    fn compose_rejects_different_middles() {
        let x = pair_at(q(1, 1));
        let y = pair_at(q(2, 1));
        let w = RhoWitness::identity(&x);
        let err = compose_witnesses((&x, &x, &w), (&y, &y, &RhoWitness::identity(&y)), q(0, 1)).unwrap_err();
        assert_eq!(err, WitnessError::MiddleMismatch);
    }

    #[test]
    fn compose_degenerate_levels() {
        let x = pair_at(q(1, 1));
        let w = RhoWitness::identity(&x);
        let c = compose_witnesses((&x, &x, &w), (&x, &x, &w), q(0, 1)).unwrap();
        assert_eq!(c.level, Infinite);
        assert_eq!(c.eps, q(0, 1));
    }

    #[test]
    fn quasi_isometry_identity() {
        let x = pair_at(q(1, 1));
        let w = RhoWitness::identity(&x);
        let qi = extract_quasi_isometry(&x, &x, &w, q(1, 2), q(0, 1)).unwrap();
        assert_eq!(qi.map, vec![Some(0), Some(1)]);
        assert!(qi.clauses.all());
    }

    #[test]
    fn quasi_isometry_mass_defect() {
        let eps0 = q(1, 20);
        let x = pair_at_infinity([q(1, 1), q(0, 1)]);
        let y = pair_at_infinity([q(1, 1), eps0]);
        let w = RhoWitness::from_gluing(&x, &y, GluingSpec::new(vec![(0, 0), (1, 1)], q(0, 1)), vec![], vec![], q(0, 1))
            .unwrap();
        let qi = extract_quasi_isometry(&x, &y, &w, q(1, 10), q(0, 1)).unwrap();
        assert!(qi.excluded.iter().all(|&i| i == 1));
        assert!(qi.clauses.all(), "{:?}", qi.clauses);
        let err = extract_quasi_isometry(&x, &y, &w, eps0, q(0, 1)).unwrap_err();
        assert!(matches!(err, WitnessError::Precondition(_)));
    }

    #[test]
    fn limit_examples() {
        let cfg = LimitConfig { tol: 1e-3, tail_len: 5, divergence_threshold: 100.0 };
        let shrinking: Vec<FiniteSpace<f64>> = (1..=2000)
            .map(|k| FiniteSpace::from_rows(&[vec![0.0, 1.0 / k as f64], vec![1.0 / k as f64, 0.0]], vec![0.5, 0.5]).unwrap())
            .collect();
        let lim = limit_of_finite_sequence(&shrinking, &cfg).unwrap();
        assert_eq!(lim.len(), 1);
        assert_eq!(lim.mass(), &[1.0]);

        let growing: Vec<FiniteSpace<f64>> = (1..=200)
            .map(|k| FiniteSpace::from_rows(&[vec![0.0, k as f64], vec![k as f64, 0.0]], vec![0.5, 0.5]).unwrap())
            .collect();
        let lim = limit_of_finite_sequence(&growing, &cfg).unwrap();
        assert_eq!(lim.d(0, 1), Infinite);

        let constant = vec![shrinking[3].clone(); 6];
        assert_eq!(limit_of_finite_sequence(&constant, &cfg).unwrap(), shrinking[3]);

        let wobbly: Vec<FiniteSpace<f64>> = (1..=20)
            .map(|k| {
                let d = if k % 2 == 0 { 1.0 } else { 2.0 };
                FiniteSpace::from_rows(&[vec![0.0, d], vec![d, 0.0]], vec![0.5, 0.5]).unwrap()
            })
            .collect();
        assert!(matches!(limit_of_finite_sequence(&wobbly, &cfg), Err(LimitError::DistanceUnstable(..))));
    }

    #[test]
    fn matching_counts() {
        assert_eq!(matching_count(2, 2), 7);
        assert_eq!(matching_count(6, 6), 13327);
    }
}
