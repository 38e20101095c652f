//! Cover towers and their ultrametric transversals, level-to-level `d_ρ` bounds,
//! ball masses, finite covers and the sheet-collapse experiment.
//!
//! Leaves of level `n` are digit strings `a_1 … a_n` with `a_k < d_k`, stored in
//! lexicographic (mixed radix) order. Two leaves with common prefix of length `p` are at
//! distance `1/(d_1 ⋯ d_p)`, which is `2^{−(x|y)}` for the Gromov product.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::ghlp::{self, RhoWitness, WitnessError};
use crate::gluing::GluingSpec;
use crate::prokhorov::ProkhorovMethod;
use crate::space::{DistanceMatrix, ExtendedDistance, Finite, FiniteSpace, Infinite, Scalar, SpaceError, Q};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolenoidError {
    #[error("degree 0 at level {0}")]
    ZeroDegree(usize),
    #[error("level {level} exceeds tower depth {depth}")]
    Level { level: usize, depth: usize },
    #[error("invalid address {0:?}")]
    Address(Vec<usize>),
    #[error("epsilon must be positive")]
    Epsilon,
    #[error("bad collapse spec: {0}")]
    Spec(String),
    #[error("gluing inclusion is not isometric")]
    NotIsometric,
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Degrees `d_1, …, d_n` of a tower of regular covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverTower {
    degrees: Vec<usize>,
}

impl CoverTower {
    /// Degree-1 levels are dropped; degree 0 is rejected.
    pub fn new(degrees: Vec<usize>) -> Result<Self, SolenoidError> {
        if let Some(k) = degrees.iter().position(|&d| d == 0) {
            return Err(SolenoidError::ZeroDegree(k + 1));
        }
        Ok(CoverTower { degrees: degrees.into_iter().filter(|&d| d > 1).collect() })
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn depth(&self) -> usize {
        self.degrees.len()
    }

    /// Number of leaves at `level`.
    pub fn leaves(&self, level: usize) -> usize {
        self.degrees[..level].iter().product()
    }

    fn check_level(&self, level: usize) -> Result<(), SolenoidError> {
        if level > self.depth() {
            return Err(SolenoidError::Level { level, depth: self.depth() });
        }
        Ok(())
    }

    fn check_address(&self, a: &[usize]) -> Result<(), SolenoidError> {
        if a.len() > self.depth() || a.iter().zip(&self.degrees).any(|(&x, &d)| x >= d) {
            return Err(SolenoidError::Address(a.to_vec()));
        }
        Ok(())
    }

    /// Address of leaf `index` at `level`.
    pub fn address(&self, level: usize, mut index: usize) -> Vec<usize> {
        let mut a = vec![0; level];
        for k in (0..level).rev() {
            a[k] = index % self.degrees[k];
            index /= self.degrees[k];
        }
        a
    }

    /// Image of leaf `index` of level `from` under the bonding map to level `to ≤ from`.
    pub fn truncate(&self, from: usize, to: usize, index: usize) -> usize {
        index / self.degrees[to..from].iter().product::<usize>()
    }
}

/// Length of the common prefix of two addresses.
pub fn common_prefix(x: &[usize], y: &[usize]) -> usize {
    x.iter().zip(y).take_while(|(a, b)| a == b).count()
}

/// `(x|y) = Σ log₂ d_k` over the common prefix.
pub fn gromov_product(tower: &CoverTower, x: &[usize], y: &[usize]) -> Result<f64, SolenoidError> {
    tower.check_address(x)?;
    tower.check_address(y)?;
    let p = common_prefix(x, y);
    Ok(tower.degrees[..p].iter().map(|&d| (d as f64).log2()).sum())
}

/// `2^{−(x|y)}` as an exact rational; 0 for equal addresses.
pub fn transversal_distance(tower: &CoverTower, x: &[usize], y: &[usize]) -> Result<Q, SolenoidError> {
    tower.check_address(x)?;
    tower.check_address(y)?;
    if x == y {
        return Ok(Q::zero());
    }
    Ok(delta_bound(tower, common_prefix(x, y)))
}

/// `δ_n = 1/(d_1 ⋯ d_n)`.
pub fn delta_bound(tower: &CoverTower, n: usize) -> Q {
    tower.degrees[..n.min(tower.depth())].iter().fold(Q::one(), |acc, &d| acc / Q::from_integer(d as i64))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransversalSpace {
    pub level: usize,
    pub addresses: Vec<Vec<usize>>,
    pub space: FiniteSpace<Q>,
}

fn address_label(a: &[usize], wide: bool) -> String {
    if a.is_empty() {
        return "root".into();
    }
    let parts: Vec<String> = a.iter().map(usize::to_string).collect();
    parts.join(if wide { "." } else { "" })
}

/// All leaves of `level` with ultrametric distances and masses `1/(d_1 ⋯ d_level)`.
pub fn build_transversal(tower: &CoverTower, level: usize) -> Result<TransversalSpace, SolenoidError> {
    tower.check_level(level)?;
    let n = tower.leaves(level);
    let addresses: Vec<Vec<usize>> = (0..n).map(|i| tower.address(level, i)).collect();
    let wide = tower.degrees.iter().any(|&d| d > 10);
    let labels = addresses.iter().map(|a| address_label(a, wide)).collect();
    let deltas: Vec<Q> = (0..=level).map(|p| delta_bound(tower, p)).collect();
    let dist = DistanceMatrix::from_fn(n, |i, j| {
        if i == j {
            ExtendedDistance::zero()
        } else {
            Finite(deltas[common_prefix(&addresses[i], &addresses[j])])
        }
    });
    let mass = vec![deltas[level]; n];
    let space = FiniteSpace::new(labels, dist, mass)?;
    Ok(TransversalSpace { level, addresses, space })
}

/// `N` points pairwise at `1/N`, each of mass `1/N`.
pub fn finite_cover_space(n: usize) -> Result<TransversalSpace, SolenoidError> {
    if n == 0 {
        return Err(SolenoidError::ZeroDegree(1));
    }
    let w = Q::new(1, n as i64);
    let dist = DistanceMatrix::from_fn(n, |i, j| if i == j { ExtendedDistance::zero() } else { Finite(w) });
    let labels = (0..n).map(|i| i.to_string()).collect();
    let space = FiniteSpace::new(labels, dist, vec![w; n])?;
    let addresses = if n == 1 { vec![vec![]] } else { (0..n).map(|i| vec![i]).collect() };
    Ok(TransversalSpace { level: usize::from(n > 1), addresses, space })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelBound {
    pub n: usize,
    pub m: usize,
    pub delta: Q,
    pub objective: Q,
    pub prokhorov: Q,
    pub method: ProkhorovMethod,
    pub witness: RhoWitness<Q>,
}

impl LevelBound {
    pub fn within_twice_delta(&self) -> bool {
        self.objective <= self.delta + self.delta
    }
}

/// Witness for `d_ρ(T_n, T_m)`: `T_m` glued onto `T_n` along the bonding map with slack
/// `δ_n`. Both inclusions must come out isometric, so the objective is the Prokhorov term.
pub fn rho_bound_levels(tower: &CoverTower, n: usize, m: usize) -> Result<LevelBound, SolenoidError> {
    tower.check_level(m)?;
    if n > m {
        return Err(SolenoidError::Level { level: n, depth: m });
    }
    let tn = build_transversal(tower, n)?;
    let tm = build_transversal(tower, m)?;
    let delta = if n == m { Q::zero() } else { delta_bound(tower, n) };
    let pairs = (0..tm.space.len()).map(|j| (j, tower.truncate(m, n, j))).collect();
    let witness = RhoWitness::from_gluing(&tm.space, &tn.space, GluingSpec::new(pairs, delta), vec![], vec![], Q::zero())?
        .transposed();
    if witness.level != Infinite {
        return Err(SolenoidError::NotIsometric);
    }
    let v = ghlp::rho_upper_from_witness(&tn.space, &tm.space, &witness, Q::zero())?;
    Ok(LevelBound { n, m, delta, objective: v.objective, prokhorov: v.prokhorov, method: v.method, witness })
}

/// Outcome of the ball-mass check at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct BallMassCheck {
    pub level: usize,
    pub eps: Q,
    /// Smallest `n` with `δ_n < ε`; `None` when the tower is too shallow.
    pub n_eps: Option<usize>,
    /// `ε / d_{n(ε)}`, or `ε` when `n(ε)` lies past the depth (every ball is then a single
    /// leaf of mass `δ_level ≥ ε`). `None` in the full-space case.
    pub bound: Option<Q>,
    /// `ε ≥ 1/d_1`: the claim checked is that every ball is the whole level.
    pub full_space_case: bool,
    pub min_ball_mass: Q,
    pub verified: bool,
}

/// Smallest open-ball mass `ν(B(t, ε))` over the leaves of `level`, with the lower bound
/// it is checked against.
pub fn ball_mass_lower(tower: &CoverTower, level: usize, eps: Q) -> Result<BallMassCheck, SolenoidError> {
    tower.check_level(level)?;
    if eps <= Q::zero() {
        return Err(SolenoidError::Epsilon);
    }
    let t = build_transversal(tower, level)?;
    let min_ball_mass = (0..t.space.len())
        .map(|i| t.space.mass_of(&t.space.neighborhood(&[i], eps)))
        .min()
        .expect("a level has at least one leaf");
    let full_space_case = tower.depth() == 0 || eps >= delta_bound(tower, 1);
    if full_space_case {
        let verified = min_ball_mass == t.space.total_mass();
        return Ok(BallMassCheck { level, eps, n_eps: None, bound: None, full_space_case, min_ball_mass, verified });
    }
    let n_eps = (1..=tower.depth()).find(|&n| delta_bound(tower, n) < eps);
    let bound = match n_eps {
        Some(n) => eps / Q::from_integer(tower.degrees[n - 1] as i64),
        None => eps,
    };
    Ok(BallMassCheck {
        level,
        eps,
        n_eps,
        bound: Some(bound),
        full_space_case,
        min_ball_mass,
        verified: min_ball_mass >= bound,
    })
}

/// Sheets over an interval `[−l, l]`: `n` copies of an interval sample, sheets pairwise
/// `C_m/n` apart, collapsing onto the interval as `n` grows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseSpec {
    pub c_m: f64,
    pub sheets: Vec<usize>,
    pub half_length: f64,
    /// Midpoint samples of the interval.
    pub samples: usize,
}

impl Default for CollapseSpec {
    fn default() -> Self {
        CollapseSpec { c_m: 1.0, sheets: vec![2, 4, 8, 16], half_length: 1.0, samples: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseRow {
    pub n: usize,
    /// Largest distortion of the projection, `C_m/n` for `n ≥ 2`.
    pub delta: f64,
    pub prokhorov: f64,
    pub objective: f64,
    /// `objective + discretization`.
    pub bound: f64,
    #[serde(skip)]
    pub method: ProkhorovMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseReport {
    pub rows: Vec<CollapseRow>,
    /// Sample spacing `h`; each sample is within `h/2` of the measure it replaces.
    pub discretization: f64,
    /// `log(m(r₂)/m(r₁)) / log(r₂/r₁)` for centered balls on the interval sample.
    pub ball_growth_exponent: f64,
}

/// Interval sample with masses `∫ density` over each cell, normalized to total 1.
fn interval_sample(spec: &CollapseSpec, density: &dyn Fn(f64) -> f64) -> Result<(Vec<f64>, Vec<f64>), SolenoidError> {
    let h = 2.0 * spec.half_length / spec.samples as f64;
    let pts: Vec<f64> = (0..spec.samples).map(|j| -spec.half_length + (j as f64 + 0.5) * h).collect();
    let raw: Vec<f64> = pts.iter().map(|&s| density(s) * h).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || raw.iter().any(|&m| !(m >= 0.0)) {
        return Err(SolenoidError::Spec("density must be nonnegative with positive integral".into()));
    }
    Ok((pts, raw.iter().map(|m| m / total).collect()))
}

fn sheet_space(pts: &[f64], masses: &[f64], n: usize, gap: f64) -> Result<FiniteSpace<f64>, SolenoidError> {
    let k = pts.len();
    let dist = DistanceMatrix::from_fn(n * k, |a, b| {
        let (i, j) = (a / k, b / k);
        let leaf = (pts[a % k] - pts[b % k]).abs();
        Finite(if i == j { leaf } else { leaf + gap })
    });
    let labels = (0..n * k).map(|a| format!("s{}/{}", a / k, a % k)).collect();
    let mass = (0..n * k).map(|a| masses[a % k] / n as f64).collect();
    Ok(FiniteSpace::new(labels, dist, mass)?)
}

/// For each sheet count, glues the sheets onto the interval sample along the projection
/// and evaluates the witness.
pub fn collapse_experiment(spec: &CollapseSpec, density: &dyn Fn(f64) -> f64) -> Result<CollapseReport, SolenoidError> {
    if !(spec.c_m > 0.0 && spec.half_length > 0.0) || spec.samples < 2 || spec.sheets.iter().any(|&n| n == 0) {
        return Err(SolenoidError::Spec(format!("{spec:?}")));
    }
    let (pts, masses) = interval_sample(spec, density)?;
    let k = pts.len();
    let h = 2.0 * spec.half_length / k as f64;
    let target = FiniteSpace::new(
        (0..k).map(|j| format!("t{j}")).collect(),
        DistanceMatrix::from_fn(k, |a, b| Finite((pts[a] - pts[b]).abs())),
        masses.clone(),
    )?;
    let tol = f64::default_tol();
    let mut rows = Vec::new();
    for &n in &spec.sheets {
        let gap = spec.c_m / n as f64;
        let sheets = sheet_space(&pts, &masses, n, gap)?;
        let delta = if n > 1 { gap } else { 0.0 };
        let pairs = (0..n * k).map(|a| (a, a % k)).collect();
        let w = RhoWitness::from_gluing(&sheets, &target, GluingSpec::new(pairs, delta), vec![], vec![], tol)?;
        let v = ghlp::rho_upper_from_witness(&sheets, &target, &w, tol)?;
        rows.push(CollapseRow {
            n,
            delta,
            prokhorov: v.prokhorov,
            objective: v.objective,
            bound: v.objective + h,
            method: v.method,
        });
    }
    let center = k / 2;
    let ball = |r: f64| target.mass_of(&target.neighborhood(&[center], r));
    let (r1, r2) = (1.5 * h, ((k / 4).max(2) as f64 + 0.5) * h);
    let ball_growth_exponent = (ball(r2) / ball(r1)).ln() / (r2 / r1).ln();
    Ok(CollapseReport { rows, discretization: h, ball_growth_exponent })
}

/// Uniform density.
pub fn uniform_density(_: f64) -> f64 {
    1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tower(d: &[usize]) -> CoverTower {
        CoverTower::new(d.to_vec()).unwrap()
    }

    #[test]
    fn products_and_distances() {
        let t = tower(&[2, 2]);
        assert_eq!(gromov_product(&t, &[0, 0], &[1, 0]).unwrap(), 0.0);
        assert_eq!(gromov_product(&t, &[0, 0], &[0, 1]).unwrap(), 1.0);
        assert_eq!(gromov_product(&t, &[0, 1], &[0, 1]).unwrap(), 2.0);
        assert_eq!(transversal_distance(&t, &[0, 0], &[1, 0]).unwrap(), Q::one());
        assert_eq!(transversal_distance(&t, &[0, 0], &[0, 1]).unwrap(), Q::new(1, 2));
        assert!(gromov_product(&t, &[0, 2], &[0, 1]).is_err());
        assert_eq!(tower(&[2, 1, 3]).degrees(), &[2, 3]);
    }

    #[test]
    fn transversal_levels() {
        let t = tower(&[2, 2]);
        let root = build_transversal(&t, 0).unwrap();
        assert_eq!((root.space.len(), root.space.mass()[0]), (1, Q::one()));
        let l2 = build_transversal(&t, 2).unwrap();
        assert_eq!(l2.space.mass(), &[Q::new(1, 4); 4]);
        assert_eq!(l2.space.labels()[2], "10");
        assert!(build_transversal(&t, 3).is_err());
        assert_eq!(t.truncate(2, 1, 3), 1);
    }

    #[test]
    fn deltas() {
        assert_eq!(delta_bound(&tower(&[2, 2]), 2), Q::new(1, 4));
        assert_eq!(delta_bound(&tower(&[2, 2]), 0), Q::one());
        assert_eq!(delta_bound(&tower(&[3]), 1), Q::new(1, 3));
    }

    #[test]
    fn level_bound_example() {
        let t = tower(&[2, 2, 2]);
        let b = rho_bound_levels(&t, 2, 3).unwrap();
        assert!(b.within_twice_delta());
        assert!(b.objective <= Q::new(1, 4));
        assert_eq!(rho_bound_levels(&t, 2, 2).unwrap().objective, Q::zero());
    }

    #[test]
    fn ball_mass_example() {
        let t = tower(&[2, 2, 2]);
        let c = ball_mass_lower(&t, 3, Q::new(3, 10)).unwrap();
        assert_eq!((c.n_eps, c.bound), (Some(2), Some(Q::new(3, 20))));
        assert!(c.verified);
        let full = ball_mass_lower(&t, 0, Q::new(1, 2)).unwrap();
        assert!(full.full_space_case && full.verified);
    }

    #[test]
    fn finite_covers() {
        let one = finite_cover_space(1).unwrap();
        assert_eq!(one.space.mass(), &[Q::one()]);
        let four = finite_cover_space(4).unwrap();
        assert_eq!(four.space.d(0, 3), Finite(Q::new(1, 4)));
        assert_eq!(four.space.total_mass(), Q::one());
    }

    #[test]
    fn collapse_rows() {
        let spec = CollapseSpec { sheets: vec![1, 2, 4, 8], samples: 8, ..CollapseSpec::default() };
        let r = collapse_experiment(&spec, &uniform_density).unwrap();
        assert_eq!((r.rows[0].objective, r.rows[0].bound), (0.0, r.discretization));
        assert!(r.rows[1..].windows(2).all(|w| w[1].bound <= w[0].bound));
        for row in &r.rows[1..] {
            assert!(row.bound <= spec.c_m / row.n as f64 + r.discretization + 1e-12);
        }
        assert!((r.ball_growth_exponent - 1.0).abs() < 1e-9);
    }
}
