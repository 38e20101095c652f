//! Extended distances, scalar arithmetic and finite distance measure spaces.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational scalar used for combinatorial computations.
pub type Q = Rational64;

/// Numeric type for distances and masses.
///
/// `f64` compares with a tolerance (default `1e-9`), `Q` compares exactly.
pub trait Scalar:
    Copy
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Sum
{
    const EXACT: bool;

    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(self) -> f64;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn total_cmp(&self, other: &Self) -> Ordering;
    /// Tolerance used by validation and equality checks when none is supplied.
    fn default_tol() -> Self;
    /// Smallest integer `k` with `k >= self`, or `None` when negative or too large.
    fn ceil_usize(self) -> Option<usize>;
    fn is_valid(self) -> bool;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn max_of(self, other: Self) -> Self {
        if self.total_cmp(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other.total_cmp(&self) == Ordering::Less {
            other
        } else {
            self
        }
    }

    /// `self <= other + tol`.
    fn le_tol(self, other: Self, tol: Self) -> bool {
        self <= other + tol
    }

    fn eq_tol(self, other: Self, tol: Self) -> bool {
        (self - other).abs() <= tol
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other)
            .unwrap_or_else(|| f64::total_cmp(self, other))
    }
    fn default_tol() -> Self {
        1e-9
    }
    fn ceil_usize(self) -> Option<usize> {
        if self < 0.0 || !self.is_finite() || self > usize::MAX as f64 {
            None
        } else {
            Some(self.ceil() as usize)
        }
    }
    fn is_valid(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        Rational64::approximate_float(x)
    }
    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
    fn default_tol() -> Self {
        Rational64::zero()
    }
    fn ceil_usize(self) -> Option<usize> {
        if self < Rational64::zero() {
            None
        } else {
            usize::try_from(self.ceil().to_integer()).ok()
        }
    }
    fn is_valid(self) -> bool {
        true
    }
}

/// A nonnegative distance or infinity. Addition saturates at infinity.
#[derive(Clone, Copy, Debug)]
pub enum ExtendedDistance<T> {
    Finite(T),
    Infinite,
}

pub use ExtendedDistance::{Finite, Infinite};

impl<T: Scalar> ExtendedDistance<T> {
    pub fn zero() -> Self {
        Finite(T::zero())
    }

    /// Wraps a value, rejecting negatives and non-finite floats.
    pub fn new(value: T) -> Option<Self> {
        (value.is_valid() && value >= T::zero()).then_some(Finite(value))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn value(&self) -> Option<T> {
        match self {
            Finite(v) => Some(*v),
            Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Finite(v) => v.to_f64(),
            Infinite => f64::INFINITY,
        }
    }

    /// `self <= other + tol`, with infinity only below infinity.
    pub fn le_tol(&self, other: &Self, tol: T) -> bool {
        match (self, other) {
            (_, Infinite) => true,
            (Infinite, Finite(_)) => false,
            (Finite(a), Finite(b)) => a.le_tol(*b, tol),
        }
    }

    pub fn eq_tol(&self, other: &Self, tol: T) -> bool {
        match (self, other) {
            (Infinite, Infinite) => true,
            (Finite(a), Finite(b)) => a.eq_tol(*b, tol),
            _ => false,
        }
    }

    /// Reciprocal with `1/∞ = 0`; `None` for zero.
    pub fn recip(&self) -> Option<T> {
        match self {
            Infinite => Some(T::zero()),
            Finite(v) if *v == T::zero() => None,
            Finite(v) => Some(T::one() / *v),
        }
    }

    /// True when the distance is strictly below the finite radius `eps`.
    pub fn lt_value(&self, eps: T) -> bool {
        matches!(self, Finite(v) if *v < eps)
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl<T: Scalar> Add for ExtendedDistance<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Finite(a), Finite(b)) => Finite(a + b),
            _ => Infinite,
        }
    }
}

impl<T: PartialEq> PartialEq for ExtendedDistance<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Infinite, Infinite) => true,
            (Finite(a), Finite(b)) => a == b,
            _ => false,
        }
    }
}

impl<T: Scalar> Eq for ExtendedDistance<T> {}

impl<T: Scalar> PartialOrd for ExtendedDistance<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for ExtendedDistance<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Infinite, Infinite) => Ordering::Equal,
            (Infinite, Finite(_)) => Ordering::Greater,
            (Finite(_), Infinite) => Ordering::Less,
            (Finite(a), Finite(b)) => a.total_cmp(b),
        }
    }
}

impl<T: Scalar> fmt::Display for ExtendedDistance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(v) => write!(f, "{v}"),
            Infinite => write!(f, "inf"),
        }
    }
}

impl<T: Scalar> From<T> for ExtendedDistance<T> {
    fn from(v: T) -> Self {
        Finite(v)
    }
}

/// Errors about the shape of the input rather than its metric content.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("distance matrix has {rows} rows but {labels} labels")]
    RowCount { rows: usize, labels: usize },
    #[error("row {row} has {len} entries, expected {expected}")]
    RowLength { row: usize, len: usize, expected: usize },
    #[error("{masses} masses given for {labels} labels")]
    MassCount { masses: usize, labels: usize },
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
}

/// A single failed invariant, by point index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonzeroDiagonal { i: usize },
    NegativeDistance { i: usize, j: usize },
    Asymmetric { i: usize, j: usize },
    ZeroDistance { i: usize, j: usize },
    /// `d(i,j) > d(i,k) + d(k,j)`.
    Triangle { i: usize, j: usize, k: usize },
    InvalidMass { i: usize },
}

impl Violation {
    /// Short invariant name, stable across versions.
    pub fn name(&self) -> &'static str {
        match self {
            Violation::NonzeroDiagonal { .. } => "zero_diagonal",
            Violation::NegativeDistance { .. } => "nonnegative_distance",
            Violation::Asymmetric { .. } => "symmetry",
            Violation::ZeroDistance { .. } => "positive_separation",
            Violation::Triangle { .. } => "triangle_inequality",
            Violation::InvalidMass { .. } => "nonnegative_mass",
        }
    }

    pub fn describe(&self, labels: &[String]) -> String {
        let l = |i: &usize| labels.get(*i).cloned().unwrap_or_else(|| i.to_string());
        match self {
            Violation::NonzeroDiagonal { i } => format!("d({0},{0}) != 0", l(i)),
            Violation::NegativeDistance { i, j } => format!("d({},{}) < 0", l(i), l(j)),
            Violation::Asymmetric { i, j } => format!("d({0},{1}) != d({1},{0})", l(i), l(j)),
            Violation::ZeroDistance { i, j } => {
                format!("distinct points {} and {} at distance 0", l(i), l(j))
            }
            Violation::Triangle { i, j, k } => format!(
                "triangle ({},{},{}): d({0},{1}) > d({0},{2}) + d({2},{1})",
                l(i),
                l(j),
                l(k)
            ),
            Violation::InvalidMass { i } => format!("mass of {} is negative or not finite", l(i)),
        }
    }
}

/// Outcome of [`validate_space`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

const MAX_REPORTED: usize = 64;

/// Symmetric matrix of extended distances with zero diagonal.
///
/// Zero off-diagonal entries are allowed here; [`FiniteSpace`] forbids them.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    data: Vec<ExtendedDistance<T>>,
}

impl<T: Scalar> DistanceMatrix<T> {
    /// All points mutually at infinity.
    pub fn disconnected(n: usize) -> Self {
        let mut data = vec![Infinite; n * n];
        for i in 0..n {
            data[i * n + i] = ExtendedDistance::zero();
        }
        DistanceMatrix { n, data }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> ExtendedDistance<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(if i == j { ExtendedDistance::zero() } else { f(i, j) });
            }
        }
        DistanceMatrix { n, data }
    }

    /// Takes rows verbatim; only the shape is checked.
    pub fn from_rows(rows: Vec<Vec<ExtendedDistance<T>>>) -> Result<Self, StructuralError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != n {
                return Err(StructuralError::RowLength { row, len: r.len(), expected: n });
            }
            data.extend(r);
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn from_finite_rows(rows: &[Vec<T>]) -> Result<Self, StructuralError> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Finite(v)).collect()).collect())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> ExtendedDistance<T> {
        self.data[i * self.n + j]
    }

    /// Sets both `(i,j)` and `(j,i)`.
    pub fn set(&mut self, i: usize, j: usize, d: ExtendedDistance<T>) {
        self.data[i * self.n + j] = d;
        self.data[j * self.n + i] = d;
    }

    pub fn row(&self, i: usize) -> &[ExtendedDistance<T>] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<ExtendedDistance<T>>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Submatrix on `idx`, in the given order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let m = idx.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        DistanceMatrix { n: m, data }
    }

    /// Block-diagonal union, cross distances infinite.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let (n, m) = (self.n, other.n);
        DistanceMatrix::from_fn(n + m, |i, j| match (i < n, j < n) {
            (true, true) => self.get(i, j),
            (false, false) => other.get(i - n, j - n),
            _ => Infinite,
        })
    }

    /// Largest finite entry, `None` when all off-diagonal entries are infinite.
    pub fn finite_diameter(&self) -> Option<T> {
        self.data
            .iter()
            .filter_map(|d| d.value())
            .reduce(|a, b| a.max_of(b))
    }

    pub fn diameter(&self) -> ExtendedDistance<T> {
        self.data.iter().copied().max().unwrap_or_else(ExtendedDistance::zero)
    }

    /// `{x : ∃ s ∈ a, d(x,s) < eps}`, sorted.
    pub fn neighborhood(&self, a: &[usize], eps: T) -> Vec<usize> {
        (0..self.n)
            .filter(|&x| a.iter().any(|&s| self.get(x, s).lt_value(eps)))
            .collect()
    }

    /// Distance from `x` to the set `a`, infinite for the empty set.
    pub fn dist_to_set(&self, x: usize, a: &[usize]) -> ExtendedDistance<T> {
        a.iter().map(|&s| self.get(x, s)).min().unwrap_or(Infinite)
    }

    /// Semi-metric axioms: zero diagonal, symmetry, nonnegativity, triangle inequality.
    pub fn semimetric_violations(&self, tol: T) -> Vec<Violation> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            if self.get(i, i) != ExtendedDistance::zero() {
                out.push(Violation::NonzeroDiagonal { i });
            }
            for j in 0..n {
                if let Finite(v) = self.get(i, j) {
                    if !v.is_valid() || v < T::zero() {
                        out.push(Violation::NegativeDistance { i, j });
                    }
                }
                if j > i && !self.get(i, j).eq_tol(&self.get(j, i), tol) {
                    out.push(Violation::Asymmetric { i, j });
                }
            }
        }
        if !out.is_empty() {
            return out;
        }
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if !dij.le_tol(&(self.get(i, k) + self.get(k, j)), tol) {
                        out.push(Violation::Triangle { i, j, k });
                        if out.len() >= MAX_REPORTED {
                            break 'outer;
                        }
                    }
                }
            }
        }
        out
    }

    /// In-place Floyd-Warshall closure with saturating addition.
    pub fn metric_closure(&mut self) {
        let n = self.n;
        for k in 0..n {
            for i in 0..n {
                let dik = self.data[i * n + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..n {
                    let via = dik + self.data[k * n + j];
                    if via < self.data[i * n + j] {
                        self.data[i * n + j] = via;
                    }
                }
            }
        }
    }

    pub fn map_values<U: Scalar>(&self, f: impl Fn(T) -> U) -> DistanceMatrix<U> {
        DistanceMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .map(|d| match d {
                    Finite(v) => Finite(f(*v)),
                    Infinite => Infinite,
                })
                .collect(),
        }
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.data.iter().cmp(other.data.iter()))
    }
}

/// Checks every invariant of a finite distance measure space.
pub fn validate_space<T: Scalar>(
    labels: &[String],
    dist: &DistanceMatrix<T>,
    mass: &[T],
    tol: T,
) -> Result<ValidationReport, StructuralError> {
    let n = labels.len();
    if dist.len() != n {
        return Err(StructuralError::RowCount { rows: dist.len(), labels: n });
    }
    if mass.len() != n {
        return Err(StructuralError::MassCount { masses: mass.len(), labels: n });
    }
    let mut violations = Vec::new();
    for (i, m) in mass.iter().enumerate() {
        if !m.is_valid() || *m < T::zero() {
            violations.push(Violation::InvalidMass { i });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist.get(i, j) == ExtendedDistance::zero() {
                violations.push(Violation::ZeroDistance { i, j });
            }
        }
    }
    violations.extend(dist.semimetric_violations(tol));
    Ok(ValidationReport { ok: violations.is_empty(), violations })
}

/// Failure to build a [`FiniteSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error("invalid space: {}", .0.first().map(|v| v.name()).unwrap_or("unknown"))]
    Invalid(Vec<Violation>),
    #[error("duplicate sample value {0}")]
    Duplicate(String),
}

/// Labeled finite distance space with a finite measure.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace<T> {
    labels: Vec<String>,
    dist: DistanceMatrix<T>,
    mass: Vec<T>,
}

impl<T: Scalar> FiniteSpace<T> {
    /// Validates with the scalar's default tolerance.
    pub fn new(labels: Vec<String>, dist: DistanceMatrix<T>, mass: Vec<T>) -> Result<Self, SpaceError> {
        Self::with_tol(labels, dist, mass, T::default_tol())
    }

    pub fn with_tol(
        labels: Vec<String>,
        dist: DistanceMatrix<T>,
        mass: Vec<T>,
        tol: T,
    ) -> Result<Self, SpaceError> {
        let report = validate_space(&labels, &dist, &mass, tol)?;
        if !report.ok {
            return Err(SpaceError::Invalid(report.violations));
        }
        Ok(FiniteSpace { labels, dist, mass })
    }

    /// Labels `p0, p1, ...` and finite distances.
    pub fn from_rows(rows: &[Vec<T>], mass: Vec<T>) -> Result<Self, SpaceError> {
        let labels = (0..rows.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, DistanceMatrix::from_finite_rows(rows)?, mass)
    }

    pub fn from_matrix(dist: DistanceMatrix<T>, mass: Vec<T>) -> Result<Self, SpaceError> {
        let labels = (0..dist.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, dist, mass)
    }

    /// `n` points at mutual distance `d`, each with mass `m`.
    pub fn uniform(n: usize, d: T, m: T) -> Result<Self, SpaceError> {
        Self::from_matrix(DistanceMatrix::from_fn(n, |_, _| Finite(d)), vec![m; n])
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dist(&self) -> &DistanceMatrix<T> {
        &self.dist
    }

    pub fn d(&self, i: usize, j: usize) -> ExtendedDistance<T> {
        self.dist.get(i, j)
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn total_mass(&self) -> T {
        self.mass.iter().copied().sum()
    }

    pub fn mass_of(&self, set: &[usize]) -> T {
        set.iter().map(|&i| self.mass[i]).sum()
    }

    /// Subspace on `idx` (order kept). Distinct points stay distinct, so no revalidation.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        FiniteSpace {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            dist: self.dist.restrict(idx),
            mass: idx.iter().map(|&i| self.mass[i]).collect(),
        }
    }

    /// Point `perm[k]` of `self` becomes point `k` of the result.
    pub fn permute(&self, perm: &[usize]) -> Self {
        self.restrict(perm)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.labels.len());
        self.labels = labels;
        self
    }

    /// `ε`-neighborhood with strict inequality.
    pub fn neighborhood(&self, a: &[usize], eps: T) -> Vec<usize> {
        self.dist.neighborhood(a, eps)
    }

    pub fn components(&self) -> ComponentPartition {
        components(&self.dist)
    }

    /// Masses multiplied by `c`.
    pub fn scale_measure(&self, c: T) -> Self {
        assert!(c >= T::zero(), "scale factor must be nonnegative");
        FiniteSpace {
            labels: self.labels.clone(),
            dist: self.dist.clone(),
            mass: self.mass.iter().map(|&m| m * c).collect(),
        }
    }

    pub fn with_mass(&self, mass: Vec<T>) -> Result<Self, SpaceError> {
        Self::new(self.labels.clone(), self.dist.clone(), mass)
    }

    /// Converts scalars, revalidating with the target's default tolerance.
    pub fn convert<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<FiniteSpace<U>, SpaceError> {
        FiniteSpace::new(
            self.labels.clone(),
            self.dist.map_values(&f),
            self.mass.iter().map(|&m| f(m)).collect(),
        )
    }

    /// Deterministic total order on spaces (size, masses, distances, labels).
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                self.mass
                    .iter()
                    .zip(&other.mass)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| self.dist.lex_cmp(&other.dist))
            .then_with(|| self.labels.cmp(&other.labels))
    }
}

impl FiniteSpace<Q> {
    pub fn to_f64(&self) -> FiniteSpace<f64> {
        FiniteSpace {
            labels: self.labels.clone(),
            dist: self.dist.map_values(|v| Scalar::to_f64(v)),
            mass: self.mass.iter().map(|&m| Scalar::to_f64(m)).collect(),
        }
    }
}

/// Partition of point indices into finite-distance classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Blocks sorted by smallest member; members ascending.
    pub blocks: Vec<Vec<usize>>,
    pub block_of: Vec<usize>,
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller root so representatives are lowest indices.
    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Classes sorted by smallest member.
    pub fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

pub fn components<T: Scalar>(dist: &DistanceMatrix<T>) -> ComponentPartition {
    let n = dist.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if dist.get(i, j).is_finite() {
                uf.union(i, j);
            }
        }
    }
    let blocks = uf.classes();
    let mut block_of = vec![0; n];
    for (b, block) in blocks.iter().enumerate() {
        for &i in block {
            block_of[i] = b;
        }
    }
    ComponentPartition { blocks, block_of }
}

/// Sample of the half-line `[0, ∞)` with `d(x,y) = |log x − log y|` and `d(x,0) = ∞`.
pub fn make_log_halfline(points: &[f64], masses: &[f64]) -> Result<FiniteSpace<f64>, SpaceError> {
    if points.len() != masses.len() {
        return Err(StructuralError::MassCount { masses: masses.len(), labels: points.len() }.into());
    }
    for (i, &p) in points.iter().enumerate() {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(SpaceError::Invalid(vec![Violation::NegativeDistance { i, j: i }]));
        }
        if points[..i].contains(&p) {
            return Err(SpaceError::Duplicate(p.to_string()));
        }
    }
    let dist = DistanceMatrix::from_fn(points.len(), |i, j| {
        let (a, b) = (points[i], points[j]);
        if a == 0.0 || b == 0.0 {
            Infinite
        } else {
            Finite((a.ln() - b.ln()).abs())
        }
    });
    let labels = points.iter().map(|p| format!("{p}")).collect();
    FiniteSpace::new(labels, dist, masses.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn saturating_addition() {
        let a: ExtendedDistance<f64> = Finite(1.0);
        assert_eq!(a + Infinite, Infinite);
        assert_eq!(a + Finite(2.0), Finite(3.0));
        assert!(Finite(1e300) < Infinite::<f64>);
    }

    #[test]
    fn single_point_is_valid() {
        let s = FiniteSpace::from_rows(&[vec![0.0]], vec![1.0]).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let rows = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let dist = DistanceMatrix::from_finite_rows(&rows).unwrap();
        let report = validate_space(&labels, &dist, &[1.0; 3], 1e-9).unwrap();
        assert!(!report.ok);
        assert_eq!(report.violations, vec![Violation::Triangle { i: 0, j: 2, k: 1 }]);
    }

    #[test]
    fn infinite_pair_is_valid_and_splits() {
        let dist = DistanceMatrix::<Q>::disconnected(2);
        let s = FiniteSpace::from_matrix(dist, vec![q(1, 1), q(0, 1)]).unwrap();
        assert_eq!(s.components().blocks, vec![vec![0], vec![1]]);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let dist = DistanceMatrix::<f64>::disconnected(2);
        let err = validate_space(&["a".to_string()], &dist, &[1.0], 0.0).unwrap_err();
        assert_eq!(err, StructuralError::RowCount { rows: 2, labels: 1 });
    }

    #[test]
    fn zero_distance_between_labels_rejected() {
        let err = FiniteSpace::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, SpaceError::Invalid(v) if v[0] == Violation::ZeroDistance { i: 0, j: 1 }));
    }

    #[test]
    fn two_blocks_of_two() {
        let mut dist = DistanceMatrix::<Q>::disconnected(4);
        dist.set(0, 1, Finite(q(1, 1)));
        dist.set(2, 3, Finite(q(2, 1)));
        let s = FiniteSpace::from_matrix(dist, vec![q(1, 4); 4]).unwrap();
        assert_eq!(s.components().blocks, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn scaling_examples() {
        let s = FiniteSpace::from_rows(&[vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]], vec![q(1, 1), q(1, 2)])
            .unwrap();
        assert_eq!(s.scale_measure(q(1, 1)), s);
        assert_eq!(s.scale_measure(q(0, 1)).mass(), &[q(0, 1), q(0, 1)]);
        assert_eq!(s.scale_measure(q(2, 1)).mass(), &[q(2, 1), q(1, 1)]);
    }

    #[test]
    fn neighborhood_examples() {
        let rows = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let s = FiniteSpace::from_rows(&rows, vec![1.0; 3]).unwrap();
        assert_eq!(s.neighborhood(&[0], 1.5), vec![0, 1]);
        assert_eq!(s.neighborhood(&[0, 1, 2], 0.1), vec![0, 1, 2]);
        // strict: the point at exactly 1 is excluded
        assert_eq!(s.neighborhood(&[0], 1.0), vec![0]);

        let inf = FiniteSpace::from_matrix(DistanceMatrix::<f64>::disconnected(2), vec![1.0, 1.0]).unwrap();
        assert_eq!(inf.neighborhood(&[0], 1e12), vec![0]);
    }

    #[test]
    fn log_halfline() {
        let s = make_log_halfline(&[1.0, std::f64::consts::E], &[1.0, 1.0]).unwrap();
        assert!((s.d(0, 1).to_f64() - 1.0).abs() < 1e-15);
        let z = make_log_halfline(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(z.d(0, 1), Infinite);
        assert!(matches!(make_log_halfline(&[2.0, 2.0], &[1.0, 1.0]), Err(SpaceError::Duplicate(_))));
    }

    #[test]
    fn ceil_usize_exact() {
        assert_eq!(q(7, 2).ceil_usize(), Some(4));
        assert_eq!(q(4, 1).ceil_usize(), Some(4));
        assert_eq!(q(-1, 2).ceil_usize(), None);
        assert_eq!(2.0f64.ceil_usize(), Some(2));
    }

    #[test]
    fn closure_gives_shortest_paths() {
        let mut m = DistanceMatrix::<Q>::disconnected(3);
        m.set(0, 1, Finite(q(1, 1)));
        m.set(1, 2, Finite(q(1, 2)));
        m.metric_closure();
        assert_eq!(m.get(0, 2), Finite(q(3, 2)));
        assert!(m.semimetric_violations(Q::zero()).is_empty());
    }
}
