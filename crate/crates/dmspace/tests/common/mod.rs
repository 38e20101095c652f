//! Seeded random spaces shared by the integration tests.
#![allow(dead_code)]

use dmspace::space::{DistanceMatrix, ExtendedDistance, Finite, FiniteSpace, Infinite, Q};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random metric on `n` points: quarter-integer edge weights closed under shortest
/// paths, with each point starting a new component with probability `p_split`.
pub fn random_matrix(rng: &mut impl Rng, n: usize, p_split: f64) -> DistanceMatrix<Q> {
    let mut comp = vec![0usize; n];
    for i in 1..n {
        comp[i] = if rng.gen_bool(p_split) { i } else { comp[rng.gen_range(0..i)] };
    }
    let mut d = DistanceMatrix::from_fn(n, |i, j| {
        if i == j {
            ExtendedDistance::zero()
        } else if comp[i] == comp[j] {
            Finite(Q::new(1, 4))
        } else {
            Infinite
        }
    });
    for i in 0..n {
        for j in (i + 1)..n {
            if comp[i] == comp[j] {
                let w = Finite(Q::new(rng.gen_range(1..=12), 4));
                d.set(i, j, w);
                d.set(j, i, w);
            }
        }
    }
    d.metric_closure();
    d
}

/// Masses `k/6` with `k ∈ 0..=6`; zero masses with probability `p_zero`.
pub fn random_masses(rng: &mut impl Rng, n: usize, p_zero: f64) -> Vec<Q> {
    (0..n)
        .map(|_| if rng.gen_bool(p_zero) { Q::from_integer(0) } else { Q::new(rng.gen_range(1..=6), 6) })
        .collect()
}

pub fn random_space(rng: &mut impl Rng, n: usize) -> FiniteSpace<Q> {
    let d = random_matrix(rng, n, 0.2);
    let m = random_masses(rng, n, 0.15);
    FiniteSpace::from_matrix(d, m).expect("random space is valid")
}

/// Shuffled copy of `x`, with a zero-mass point at infinite distance appended when `extra`.
pub fn permuted_copy(rng: &mut impl Rng, x: &FiniteSpace<Q>, extra: bool) -> FiniteSpace<Q> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.shuffle(rng);
    let y = x.restrict(&perm);
    if !extra {
        return y;
    }
    let n = y.len();
    let d = DistanceMatrix::from_fn(n + 1, |i, j| {
        if i == j {
            ExtendedDistance::zero()
        } else if i == n || j == n {
            Infinite
        } else {
            y.d(i, j)
        }
    });
    let mut m = y.mass().to_vec();
    m.push(Q::from_integer(0));
    FiniteSpace::from_matrix(d, m).expect("augmented copy is valid")
}
