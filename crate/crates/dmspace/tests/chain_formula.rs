//! Glued distance against explicit chain minimization on small instances.

mod common;

use dmspace::gluing::{glued_distance, GluingSpec};
use dmspace::space::{DistanceMatrix, ExtendedDistance, Finite, Infinite, Q};
use rand::Rng;

/// `min Σ d(p_i, q_i) + (k − 1)δ` over chains with at most `max_k` segments, where
/// consecutive segments are joined by a related pair.
fn chain_distance(
    union: &DistanceMatrix<Q>,
    related: &[(usize, usize)],
    delta: Q,
    p: usize,
    q: usize,
    max_k: usize,
) -> ExtendedDistance<Q> {
    fn go(
        union: &DistanceMatrix<Q>,
        related: &[(usize, usize)],
        delta: Q,
        at: usize,
        q: usize,
        left: usize,
        acc: ExtendedDistance<Q>,
        best: &mut ExtendedDistance<Q>,
    ) {
        let direct = acc + union.get(at, q);
        if direct < *best {
            *best = direct;
        }
        if left == 0 {
            return;
        }
        for &(a, b) in related {
            let cost = acc + union.get(at, a) + Finite(delta);
            if cost < *best {
                go(union, related, delta, b, q, left - 1, cost, best);
            }
        }
    }
    let mut best = Infinite;
    go(union, related, delta, p, q, max_k - 1, ExtendedDistance::zero(), &mut best);
    best
}

#[test]
fn glued_distance_matches_chains() {
    let mut rng = common::rng(11);
    let mut checked = 0;
    while checked < 300 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=(7 - n).min(5));
        let x = common::random_matrix(&mut rng, n, 0.25);
        let y = common::random_matrix(&mut rng, m, 0.25);
        let delta = Q::new(rng.gen_range(0..=8), 4);
        // Random map on a random domain; skip inadmissible draws.
        let mut pairs = Vec::new();
        for i in 0..n {
            if rng.gen_bool(0.6) {
                pairs.push((i, rng.gen_range(0..m)));
            }
        }
        let Ok(g) = glued_distance(&x, &y, GluingSpec::new(pairs.clone(), delta)) else {
            continue;
        };
        let union = x.disjoint_union(&y);
        let mut related = Vec::new();
        for &(a, b) in &pairs {
            related.push((a, n + b));
            related.push((n + b, a));
            for &(a2, b2) in &pairs {
                if b == b2 && a != a2 {
                    related.push((a, a2));
                }
            }
        }
        for p in 0..n + m {
            for q in 0..n + m {
                let want = if p == q { ExtendedDistance::zero() } else { chain_distance(&union, &related, delta, p, q, 4) };
                assert_eq!(g.dist.get(p, q), want, "n={n} m={m} pairs={pairs:?} delta={delta} ({p},{q})");
            }
        }
        checked += 1;
    }
}

#[test]
fn worked_example() {
    let x = DistanceMatrix::from_finite_rows(&[vec![Q::from(0), Q::from(2)], vec![Q::from(2), Q::from(0)]]).unwrap();
    let y = DistanceMatrix::from_finite_rows(&[vec![Q::from(0), Q::new(5, 2)], vec![Q::new(5, 2), Q::from(0)]]).unwrap();
    let g = glued_distance(&x, &y, GluingSpec::new(vec![(0, 0), (1, 1)], Q::new(1, 2))).unwrap();
    assert_eq!(g.dist.get(0, 3), Finite(Q::new(5, 2)));
}
