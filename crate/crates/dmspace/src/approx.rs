//! Greedy ε-nets, atomic approximation measures and precompactness certificates.

use serde::Serialize;

use crate::space::{FiniteSpace, Scalar, SpaceError};

/// Net centers with the atomic approximation measure supported on them.
#[derive(Debug, Clone, PartialEq)]
pub struct NetResult<T> {
    pub centers: Vec<usize>,
    pub epsilon: T,
    pub approx: FiniteSpace<T>,
}

/// Scans points by index and keeps every point not yet within `eps` of a center.
///
/// Centers end up pairwise at distance `≥ eps` and their open `eps`-balls cover the space.
pub fn greedy_epsilon_net<T: Scalar>(space: &FiniteSpace<T>, eps: T) -> Vec<usize> {
    assert!(eps > T::zero(), "epsilon must be positive");
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..space.len() {
        if !centers.iter().any(|&c| space.d(i, c).lt_value(eps)) {
            centers.push(i);
        }
    }
    centers
}

/// Restricts the space to `centers` and gives the k-th center the mass of its
/// `eps`-ball minus the balls of the earlier centers.
pub fn net_measure<T: Scalar>(space: &FiniteSpace<T>, centers: &[usize], eps: T) -> Result<FiniteSpace<T>, SpaceError> {
    let mut taken = vec![false; space.len()];
    let mut masses = Vec::with_capacity(centers.len());
    for &c in centers {
        let mut m = T::zero();
        for (i, t) in taken.iter_mut().enumerate() {
            if !*t && space.d(i, c).lt_value(eps) {
                *t = true;
                m = m + space.mass()[i];
            }
        }
        masses.push(m);
    }
    space.restrict(centers).with_mass(masses)
}

/// Greedy net plus its approximation measure.
pub fn approximate<T: Scalar>(space: &FiniteSpace<T>, eps: T) -> Result<NetResult<T>, SpaceError> {
    let centers = greedy_epsilon_net(space, eps);
    let approx = net_measure(space, &centers, eps)?;
    Ok(NetResult { centers, epsilon: eps, approx })
}

/// Why a space was left without a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HypothesisFailure<T> {
    /// Total mass above the cap `A`.
    MassCap { total: T, cap: T },
    /// Some ball lighter than the lower-bound function allows.
    BallMass { point: usize, radius: T, mass: T, required: T },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate<T> {
    pub centers: Vec<usize>,
    pub size: usize,
    /// `μ` of the complement of the open ε-neighborhood of the centers.
    pub uncovered_mass: T,
    /// `ceil(A / B(ε/2))`.
    pub size_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertificateOutcome<T> {
    Certified(Certificate<T>),
    Flagged(HypothesisFailure<T>),
}

impl<T> CertificateOutcome<T> {
    pub fn certificate(&self) -> Option<&Certificate<T>> {
        match self {
            CertificateOutcome::Certified(c) => Some(c),
            CertificateOutcome::Flagged(_) => None,
        }
    }
}

/// Per-space finite net certificates for a family with mass cap `a_cap` and ball
/// masses `μ(B(x, r)) ≥ ball_lower(r)`.
///
/// The ball hypothesis is checked at `ε/2` and at every radius in `radii`.
pub fn precompact_certificate<T: Scalar>(
    family: &[FiniteSpace<T>],
    eps: T,
    a_cap: T,
    ball_lower: impl Fn(T) -> T,
    radii: &[T],
) -> Vec<CertificateOutcome<T>> {
    let half = eps / (T::one() + T::one());
    let b_half = ball_lower(half);
    let size_bound = if b_half > T::zero() { (a_cap / b_half).ceil_usize() } else { None };
    let mut checked = vec![half];
    checked.extend_from_slice(radii);
    family
        .iter()
        .map(|s| {
            let total = s.total_mass();
            if total > a_cap {
                return CertificateOutcome::Flagged(HypothesisFailure::MassCap { total, cap: a_cap });
            }
            for &r in &checked {
                let required = ball_lower(r);
                for x in 0..s.len() {
                    let mass = s.mass_of(&s.neighborhood(&[x], r));
                    if mass < required {
                        return CertificateOutcome::Flagged(HypothesisFailure::BallMass { point: x, radius: r, mass, required });
                    }
                }
            }
            let centers = greedy_epsilon_net(s, eps);
            let covered = s.neighborhood(&centers, eps);
            let uncovered_mass = total - s.mass_of(&covered);
            CertificateOutcome::Certified(Certificate {
                size: centers.len(),
                centers,
                uncovered_mass,
                size_bound: size_bound.unwrap_or(usize::MAX),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prokhorov::levy_prokhorov;
    use crate::space::{DistanceMatrix, Q};

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn net_examples() {
        let s = FiniteSpace::uniform(3, q(1, 1), q(1, 1)).unwrap();
        assert_eq!(greedy_epsilon_net(&s, q(1, 2)), vec![0, 1, 2]);
        assert_eq!(greedy_epsilon_net(&s, q(2, 1)), vec![0]);
        let apart = FiniteSpace::from_matrix(DistanceMatrix::disconnected(2), vec![q(1, 1), q(1, 1)]).unwrap();
        assert_eq!(greedy_epsilon_net(&apart, q(1000, 1)), vec![0, 1]);
    }

    #[test]
    fn line_of_three() {
        let s = FiniteSpace::from_rows(
            &[vec![q(0, 1), q(1, 1), q(2, 1)], vec![q(1, 1), q(0, 1), q(1, 1)], vec![q(2, 1), q(1, 1), q(0, 1)]],
            vec![q(1, 1); 3],
        )
        .unwrap();
        let a = net_measure(&s, &[0, 2], q(3, 2)).unwrap();
        assert_eq!(a.mass(), &[q(2, 1), q(1, 1)]);
        let r = approximate(&s, q(3, 2)).unwrap();
        assert_eq!(r.approx.total_mass(), s.total_mass());
        let mu = s.mass().to_vec();
        let mut nu = vec![q(0, 1); 3];
        for (k, &c) in r.centers.iter().enumerate() {
            nu[c] = r.approx.mass()[k];
        }
        assert!(levy_prokhorov(s.dist(), &mu, &nu).unwrap() <= q(3, 2));
    }

    #[test]
    fn fine_net_keeps_masses() {
        let s = FiniteSpace::from_rows(&[vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]], vec![q(1, 3), q(2, 3)]).unwrap();
        let r = approximate(&s, q(1, 2)).unwrap();
        assert_eq!(r.approx, s);
    }

    #[test]
    fn certificate_examples() {
        let one = |m: i64| FiniteSpace::from_rows(&[vec![q(0, 1)]], vec![q(m, 1)]).unwrap();
        let fam: Vec<_> = (1..=20).map(one).collect();
        let out = precompact_certificate(&fam, q(1, 2), q(10, 1), |_| q(1, 1), &[]);
        for (k, o) in out.iter().enumerate() {
            if k < 10 {
                let c = o.certificate().unwrap();
                assert_eq!((c.size, c.uncovered_mass), (1, q(0, 1)));
            } else {
                assert!(matches!(o, CertificateOutcome::Flagged(HypothesisFailure::MassCap { .. })));
            }
        }

        let n = 6;
        let u = FiniteSpace::uniform(n, q(1, 1), q(1, n as i64)).unwrap();
        let out = precompact_certificate(&[u], q(1, 2), q(1, 1), |_| q(1, n as i64), &[q(1, 4)]);
        let c = out[0].certificate().unwrap();
        assert_eq!((c.size, c.size_bound), (n, n));
    }
}
