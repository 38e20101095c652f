//! Randomized invariants. Spaces are drawn from a seed so failures replay through
//! the seed printed by proptest.

mod common;

use dmspace::approx::approximate;
use dmspace::ghlp::{rho_lower, rho_search, rho_upper_from_witness, Budget, RhoWitness};
use dmspace::gluing::{check_isometric_inclusions, check_l_isometric, glued_distance, GluingSpec};
use dmspace::hyperbolic::{build_hexagon, measure_alternate_sides, HexagonSpec};
use dmspace::prokhorov::{levy_prokhorov, pushforward};
use dmspace::solenoid::{build_transversal, delta_bound, finite_cover_space, CoverTower};
use dmspace::space::{DistanceMatrix, ExtendedDistance, Finite, FiniteSpace, Infinite, Scalar, Q};
use proptest::prelude::*;
use rand::Rng;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Random partial map `0..n → 0..m`; admissibility is left to the caller.
fn random_pairs(rng: &mut impl Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        if rng.gen_bool(0.6) {
            out.push((i, rng.gen_range(0..m)));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prokhorov_is_symmetric(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let d = common::random_matrix(&mut rng, n, 0.2);
        let mu = common::random_masses(&mut rng, n, 0.2);
        let nu = common::random_masses(&mut rng, n, 0.2);
        prop_assert_eq!(levy_prokhorov(&d, &mu, &nu).unwrap(), levy_prokhorov(&d, &nu, &mu).unwrap());
        prop_assert_eq!(levy_prokhorov(&d, &mu, &mu).unwrap(), Q::from(0));
    }

    #[test]
    fn prokhorov_triangle_inequality(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = common::rng(seed);
        let d = common::random_matrix(&mut rng, n, 0.2);
        let a = common::random_masses(&mut rng, n, 0.2);
        let b = common::random_masses(&mut rng, n, 0.2);
        let c = common::random_masses(&mut rng, n, 0.2);
        let ab = levy_prokhorov(&d, &a, &b).unwrap();
        let bc = levy_prokhorov(&d, &b, &c).unwrap();
        let ac = levy_prokhorov(&d, &a, &c).unwrap();
        prop_assert!(ac <= ab + bc, "{} > {} + {}", ac, ab, bc);
    }

    #[test]
    fn prokhorov_bounded_by_mass(seed in any::<u64>(), n in 1usize..=7) {
        let mut rng = common::rng(seed);
        let d = common::random_matrix(&mut rng, n, 0.3);
        let mu = common::random_masses(&mut rng, n, 0.2);
        let nu = common::random_masses(&mut rng, n, 0.2);
        let v = levy_prokhorov(&d, &mu, &nu).unwrap();
        let (tm, tn): (Q, Q) = (mu.iter().sum(), nu.iter().sum());
        prop_assert!(v >= (tm - tn).abs());
        prop_assert!(v <= tm.max(tn));
    }

    #[test]
    fn prokhorov_invariant_under_embedding(seed in any::<u64>(), n in 1usize..=5, extra in 1usize..=3) {
        let mut rng = common::rng(seed);
        let big = common::random_matrix(&mut rng, n + extra, 0.2);
        let idx: Vec<usize> = (0..n).collect();
        let small = big.restrict(&idx);
        let mu = common::random_masses(&mut rng, n, 0.2);
        let nu = common::random_masses(&mut rng, n, 0.2);
        let pm = pushforward(&idx, &mu, n + extra);
        let pn = pushforward(&idx, &nu, n + extra);
        prop_assert_eq!(levy_prokhorov(&small, &mu, &nu).unwrap(), levy_prokhorov(&big, &pm, &pn).unwrap());
    }

    #[test]
    fn prokhorov_scaling(seed in any::<u64>(), n in 1usize..=6, num in 1i64..=8, den in 1i64..=8) {
        let mut rng = common::rng(seed);
        let d = common::random_matrix(&mut rng, n, 0.2);
        let mu = common::random_masses(&mut rng, n, 0.2);
        let nu = common::random_masses(&mut rng, n, 0.2);
        let c = q(num, den);
        let scale = |m: &[Q]| m.iter().map(|&v| v * c).collect::<Vec<_>>();
        let base = levy_prokhorov(&d, &mu, &nu).unwrap();
        let scaled = levy_prokhorov(&d, &scale(&mu), &scale(&nu)).unwrap();
        if c <= Q::from(1) {
            prop_assert!(scaled <= base, "c={} scaled={} base={}", c, scaled, base);
        } else {
            prop_assert!(scaled <= c * base, "c={} scaled={} base={}", c, scaled, base);
        }
    }

    #[test]
    fn glued_distance_is_a_semimetric(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6, dn in 0i64..=8) {
        let mut rng = common::rng(seed);
        let x = common::random_matrix(&mut rng, n, 0.25);
        let y = common::random_matrix(&mut rng, m, 0.25);
        let pairs = random_pairs(&mut rng, n, m);
        if let Ok(g) = glued_distance(&x, &y, GluingSpec::new(pairs, q(dn, 4))) {
            prop_assert!(g.dist.semimetric_violations(Q::from(0)).is_empty());
        }
    }

    #[test]
    fn glued_distance_is_maximal(seed in any::<u64>(), n in 1usize..=5, m in 1usize..=5, dn in 0i64..=8) {
        let mut rng = common::rng(seed);
        let x = common::random_matrix(&mut rng, n, 0.25);
        let y = common::random_matrix(&mut rng, m, 0.25);
        let pairs = random_pairs(&mut rng, n, m);
        let delta = q(dn, 4);
        let Ok(g) = glued_distance(&x, &y, GluingSpec::new(pairs.clone(), delta)) else { return Ok(()); };
        // Any semi-distance respecting the same upper bounds is dominated.
        let mut other = common::random_matrix(&mut rng, n + m, 0.0);
        let cap = |o: &mut DistanceMatrix<Q>, i: usize, j: usize, v: ExtendedDistance<Q>| {
            let w = o.get(i, j).min(v);
            o.set(i, j, w);
            o.set(j, i, w);
        };
        for i in 0..n {
            for j in 0..n {
                cap(&mut other, i, j, x.get(i, j));
            }
        }
        for i in 0..m {
            for j in 0..m {
                cap(&mut other, n + i, n + j, y.get(i, j));
            }
        }
        for &(a, b) in &pairs {
            cap(&mut other, a, n + b, Finite(delta));
        }
        other.metric_closure();
        for i in 0..n + m {
            for j in 0..n + m {
                prop_assert!(other.get(i, j) <= g.dist.get(i, j));
            }
        }
    }

    #[test]
    fn small_distortion_gives_isometric_inclusions(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6) {
        let mut rng = common::rng(seed);
        let x = common::random_matrix(&mut rng, n, 0.25);
        let y = common::random_matrix(&mut rng, m, 0.25);
        let pairs = random_pairs(&mut rng, n, m);
        let mut worst = ExtendedDistance::zero();
        for &(a, b) in &pairs {
            for &(a2, b2) in &pairs {
                let gap = match (x.get(a, a2), y.get(b, b2)) {
                    (Finite(u), Finite(v)) => Finite((u - v).abs()),
                    (Infinite, Infinite) => ExtendedDistance::zero(),
                    _ => Infinite,
                };
                worst = worst.max(gap);
            }
        }
        let Finite(delta) = worst else { return Ok(()); };
        let g = glued_distance(&x, &y, GluingSpec::new(pairs, delta)).unwrap();
        let r = check_isometric_inclusions(&g, &x, &y, Q::from(0));
        prop_assert!(r.x_ok && r.y_ok, "{:?}", r);
    }

    #[test]
    fn l_isometric_map_gives_l_isometric_inclusions(seed in any::<u64>(), n in 1usize..=6, m in 1usize..=6, dn in 0i64..=8) {
        let mut rng = common::rng(seed);
        let x = common::random_matrix(&mut rng, n, 0.25);
        let y = common::random_matrix(&mut rng, m, 0.25);
        // A total map, so that the L-isometric check on I applies to every point.
        let map: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let level = Finite(q(rng.gen_range(1..=12), 4));
        if !check_l_isometric(&x, &y, &map, level, &[], Q::from(0)).ok {
            return Ok(());
        }
        let pairs = map.iter().enumerate().map(|(i, &j)| (i, j)).collect();
        let Ok(g) = glued_distance(&x, &y, GluingSpec::new(pairs, q(dn, 4))) else { return Ok(()); };
        prop_assert!(check_l_isometric(&x, &g.dist, &g.x_embedding(), level, &[], Q::from(0)).ok);
        prop_assert!(check_l_isometric(&y, &g.dist, &g.y_embedding(), level, &[], Q::from(0)).ok);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rho_bounds_are_ordered_and_symmetric(seed in any::<u64>(), n in 1usize..=4, m in 1usize..=4) {
        let mut rng = common::rng(seed);
        let x = common::random_space(&mut rng, n);
        let y = common::random_space(&mut rng, m);
        let budget = Budget::quick();
        let a = rho_search(&x, &y, &budget, 3);
        let b = rho_search(&y, &x, &budget, 3);
        prop_assert_eq!(a.lower, rho_lower(&x, &y));
        prop_assert!(a.lower <= a.upper);
        prop_assert_eq!(a.upper, b.upper);
        prop_assert_eq!(a.lower, b.lower);
        if let Some(w) = &a.witness {
            prop_assert_eq!(rho_upper_from_witness(&x, &y, w, Q::from(0)).unwrap().objective, a.upper);
        }
    }

    #[test]
    fn net_approximation_is_close_in_rho(seed in any::<u64>(), n in 1usize..=5, en in 1i64..=8) {
        let mut rng = common::rng(seed);
        let x = common::random_space(&mut rng, n);
        let eps = q(en, 4);
        let net = approximate(&x, eps).unwrap();
        let pairs = net.centers.iter().enumerate().map(|(k, &c)| (c, k)).collect();
        let w = RhoWitness::from_gluing(&x, &net.approx, GluingSpec::new(pairs, Q::from(0)), vec![], vec![], Q::from(0)).unwrap();
        prop_assert_eq!(w.level, Infinite);
        let v = rho_upper_from_witness(&x, &net.approx, &w, Q::from(0)).unwrap();
        prop_assert!(v.objective <= eps);
        let est = rho_search(&x, &net.approx, &Budget::quick(), 0);
        prop_assert!(est.upper <= v.objective, "search {} vs net witness {}", est.upper, v.objective);
    }
}

fn random_tower(rng: &mut impl Rng) -> CoverTower {
    let depth = rng.gen_range(0..=4);
    let mut degrees = Vec::new();
    let mut leaves = 1;
    for _ in 0..depth {
        let d = rng.gen_range(2..=4);
        if leaves * d > 64 {
            break;
        }
        leaves *= d;
        degrees.push(d);
    }
    CoverTower::new(degrees).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transversals_are_ultrametric(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let tower = random_tower(&mut rng);
        let level = rng.gen_range(0..=tower.depth());
        let t = build_transversal(&tower, level).unwrap();
        let s = &t.space;
        for i in 0..s.len() {
            for j in 0..s.len() {
                for k in 0..s.len() {
                    prop_assert!(s.d(i, k) <= s.d(i, j).max(s.d(j, k)));
                }
            }
        }
        prop_assert_eq!(s.total_mass(), Q::from(1));
    }

    #[test]
    fn bonding_maps_shrink_distances_by_at_most_delta(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let tower = random_tower(&mut rng);
        let m = rng.gen_range(0..=tower.depth());
        let n = rng.gen_range(0..=m);
        let tm = build_transversal(&tower, m).unwrap();
        let tn = build_transversal(&tower, n).unwrap();
        let map: Vec<usize> = (0..tm.space.len()).map(|j| tower.truncate(m, n, j)).collect();
        let dn = Finite(delta_bound(&tower, n));
        for a in 0..map.len() {
            for b in 0..map.len() {
                let before = tm.space.d(a, b);
                let after = tn.space.d(map[a], map[b]);
                prop_assert!(after <= before);
                prop_assert!(before <= after + dn);
            }
        }
        prop_assert_eq!(pushforward(&map, tm.space.mass(), tn.space.len()), tn.space.mass().to_vec());
    }

    #[test]
    fn finite_cover_balls_are_heavy(n in 1usize..=40, en in 1i64..=40) {
        let t = finite_cover_space(n).unwrap();
        let eps = q(en, 20);
        let s: &FiniteSpace<Q> = &t.space;
        for i in 0..s.len() {
            prop_assert!(s.mass_of(&s.neighborhood(&[i], eps)) >= eps.min(Q::from(1)));
        }
    }

    #[test]
    fn hexagons_have_area_pi(b1 in 0.05f64..3.0, b2 in 0.05f64..3.0, b3 in 0.05f64..3.0) {
        let spec = HexagonSpec::new(b1, b2, b3);
        let area = build_hexagon(spec).unwrap().area().unwrap();
        prop_assert!((area - std::f64::consts::PI).abs() <= 1e-9, "area {}", area);
        let sides = measure_alternate_sides(spec).unwrap();
        for (got, want) in sides.iter().zip([b1, b2, b3]) {
            prop_assert!((got - want).abs() <= 1e-9, "{:?}", sides);
        }
    }
}
