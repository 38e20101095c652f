//! Disjoint unions and the slack-δ glued distance.
//!
//! Gluing `X` to `Y` along pairs `(x, I(x))` with slack δ gives the largest
//! semi-distance on `X ⊔ Y` that keeps the source distances as upper bounds and
//! puts related points within δ. It is computed as all-pairs shortest paths,
//! which agrees with the chain infimum.

use thiserror::Error;

use crate::space::{DistanceMatrix, ExtendedDistance, Finite, Infinite, Scalar, UnionFind};

/// Identification pairs `(x, I(x))` and slack.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingSpec<T> {
    pub pairs: Vec<(usize, usize)>,
    pub delta: T,
}

impl<T: Scalar> GluingSpec<T> {
    pub fn new(pairs: Vec<(usize, usize)>, delta: T) -> Self {
        GluingSpec { pairs, delta }
    }

    /// Empty identification: the glued space is the disjoint union.
    pub fn none() -> Self {
        GluingSpec { pairs: Vec::new(), delta: T::zero() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GluingError {
    #[error("points {x1} and {x2} share target {y} but are farther apart than delta")]
    Inadmissible { x1: usize, x2: usize, y: usize },
    #[error("point {0} of the first space appears in more than one pair")]
    DuplicateSource(usize),
    #[error("pair ({x}, {y}) is out of range")]
    OutOfRange { x: usize, y: usize },
    #[error("delta must be nonnegative")]
    NegativeDelta,
}

/// `X ⊔ Y` with the glued distance; `X` occupies indices `0..n_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedSpace<T> {
    pub n_x: usize,
    pub n_y: usize,
    pub spec: GluingSpec<T>,
    pub dist: DistanceMatrix<T>,
}

impl<T: Scalar> GluedSpace<T> {
    pub fn y_index(&self, j: usize) -> usize {
        self.n_x + j
    }

    pub fn x_embedding(&self) -> Vec<usize> {
        (0..self.n_x).collect()
    }

    pub fn y_embedding(&self) -> Vec<usize> {
        (self.n_x..self.n_x + self.n_y).collect()
    }

    /// Classes of points at distance zero, and the quotient distance on them.
    pub fn quotient(&self) -> (Vec<Vec<usize>>, DistanceMatrix<T>) {
        let n = self.dist.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if self.dist.get(i, j) == ExtendedDistance::zero() {
                    uf.union(i, j);
                }
            }
        }
        let classes = uf.classes();
        let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
        (classes, self.dist.restrict(&reps))
    }
}

pub fn disjoint_union_distance<T: Scalar>(x: &DistanceMatrix<T>, y: &DistanceMatrix<T>) -> DistanceMatrix<T> {
    x.disjoint_union(y)
}

/// Checks the spec against `X`: sources unique, shared targets within δ.
pub fn check_admissible<T: Scalar>(
    x: &DistanceMatrix<T>,
    n_y: usize,
    spec: &GluingSpec<T>,
) -> Result<(), GluingError> {
    if spec.delta < T::zero() {
        return Err(GluingError::NegativeDelta);
    }
    let mut seen = vec![false; x.len()];
    for &(a, b) in &spec.pairs {
        if a >= x.len() || b >= n_y {
            return Err(GluingError::OutOfRange { x: a, y: b });
        }
        if std::mem::replace(&mut seen[a], true) {
            return Err(GluingError::DuplicateSource(a));
        }
    }
    for (k, &(a, b)) in spec.pairs.iter().enumerate() {
        for &(a2, b2) in &spec.pairs[k + 1..] {
            if b == b2 && !x.get(a, a2).le_tol(&Finite(spec.delta), T::default_tol()) {
                return Err(GluingError::Inadmissible { x1: a.min(a2), x2: a.max(a2), y: b });
            }
        }
    }
    Ok(())
}

/// Glued distance `d_I^δ` on `X ⊔ Y`.
///
/// Edges: source distances within each part, δ between `x` and `I(x)`, and δ
/// between `x, x'` with `I(x) = I(x')`. Inputs may be semi-distances.
pub fn glued_distance<T: Scalar>(
    x: &DistanceMatrix<T>,
    y: &DistanceMatrix<T>,
    spec: GluingSpec<T>,
) -> Result<GluedSpace<T>, GluingError> {
    check_admissible(x, y.len(), &spec)?;
    let n_x = x.len();
    let mut dist = x.disjoint_union(y);
    let hop = Finite(spec.delta);
    let relax = |d: &mut DistanceMatrix<T>, i: usize, j: usize| {
        if hop < d.get(i, j) {
            d.set(i, j, hop);
        }
    };
    for (k, &(a, b)) in spec.pairs.iter().enumerate() {
        relax(&mut dist, a, n_x + b);
        for &(a2, b2) in &spec.pairs[k + 1..] {
            if b == b2 {
                relax(&mut dist, a, a2);
            }
        }
    }
    dist.metric_closure();
    Ok(GluedSpace { n_x, n_y: y.len(), spec, dist })
}

/// Result of comparing the glued distance on each part with the source.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport<T> {
    pub x_ok: bool,
    pub y_ok: bool,
    /// Largest `|d_glued − d_source|`, infinite when a finite distance became infinite or vice versa.
    pub max_distortion: ExtendedDistance<T>,
}

fn distortion<T: Scalar>(a: ExtendedDistance<T>, b: ExtendedDistance<T>) -> ExtendedDistance<T> {
    match (a, b) {
        (Finite(u), Finite(v)) => Finite((u - v).abs()),
        (Infinite, Infinite) => ExtendedDistance::zero(),
        _ => Infinite,
    }
}

pub fn check_isometric_inclusions<T: Scalar>(
    g: &GluedSpace<T>,
    x: &DistanceMatrix<T>,
    y: &DistanceMatrix<T>,
    tol: T,
) -> InclusionReport<T> {
    let mut worst = ExtendedDistance::zero();
    let mut part = |src: &DistanceMatrix<T>, offset: usize| {
        let mut ok = true;
        for i in 0..src.len() {
            for j in (i + 1)..src.len() {
                let d = distortion(g.dist.get(offset + i, offset + j), src.get(i, j));
                if !d.le_tol(&ExtendedDistance::zero(), tol) {
                    ok = false;
                }
                worst = worst.max(d);
            }
        }
        ok
    };
    let x_ok = part(x, 0);
    let y_ok = part(y, g.n_x);
    InclusionReport { x_ok, y_ok, max_distortion: worst }
}

/// Outcome of [`check_l_isometric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LIsometryReport {
    pub ok: bool,
    pub first_violation: Option<(usize, usize)>,
}

fn kept(n: usize, removed: &[usize]) -> Vec<usize> {
    let mut out = vec![true; n];
    for &r in removed {
        out[r] = false;
    }
    (0..n).filter(|&i| out[i]).collect()
}

/// For kept `x, y` with `min(d(x,y), d'(fx,fy)) < L`, requires `d'(fx,fy) = d(x,y)`.
pub fn check_l_isometric<T: Scalar>(
    source: &DistanceMatrix<T>,
    target: &DistanceMatrix<T>,
    map: &[usize],
    level: ExtendedDistance<T>,
    removed: &[usize],
    tol: T,
) -> LIsometryReport {
    let idx = kept(source.len(), removed);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = source.get(i, j);
            let e = target.get(map[i], map[j]);
            if d.min(e) < level && !d.eq_tol(&e, tol) {
                return LIsometryReport { ok: false, first_violation: Some((i, j)) };
            }
        }
    }
    LIsometryReport { ok: true, first_violation: None }
}

/// Largest `L` for which [`check_l_isometric`] passes: the smallest
/// `min(d, d')` over mismatched kept pairs, or infinity.
pub fn max_isometric_level<T: Scalar>(
    source: &DistanceMatrix<T>,
    target: &DistanceMatrix<T>,
    map: &[usize],
    removed: &[usize],
    tol: T,
) -> ExtendedDistance<T> {
    let idx = kept(source.len(), removed);
    let mut level = Infinite;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = source.get(i, j);
            let e = target.get(map[i], map[j]);
            if !d.eq_tol(&e, tol) {
                level = level.min(d.min(e));
            }
        }
    }
    level
}

/// Mismatched kept pairs `(i, j, min(d, d'))`, sorted by scale.
pub fn mismatched_pairs<T: Scalar>(
    source: &DistanceMatrix<T>,
    target: &DistanceMatrix<T>,
    map: &[usize],
    removed: &[usize],
    tol: T,
) -> Vec<(usize, usize, ExtendedDistance<T>)> {
    let idx = kept(source.len(), removed);
    let mut out = Vec::new();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            let d = source.get(i, j);
            let e = target.get(map[i], map[j]);
            if !d.eq_tol(&e, tol) {
                out.push((i, j, d.min(e)));
            }
        }
    }
    out.sort_by(|a, b| a.2.cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    out
}
