//! Points of the multinomial simplex and distances between them.
//!
//! The Fisher geodesic distance is `arccos(Σ √(p_i q_i))`, taking values in
//! `[0, π/2]`. Near the diagonal it agrees with `√(2·KL(p‖q))`.

use crate::error::{Error, Result};

/// Tolerance on the coordinate sum accepted by [`SimplexPoint::new`].
pub const SIMPLEX_TOL: f64 = 1e-10;

/// A probability vector: nonnegative coordinates summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("empty simplex point".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !(**c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("coordinate {bad} is not a probability")));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter(format!("coordinates sum to {sum}")));
        }
        Ok(Self { coords })
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::InvalidParameter("weights must have positive sum".into()));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// Uniform distribution over `dim` outcomes.
    pub fn uniform(dim: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.coords
    }

    pub fn fisher_distance(&self, other: &SimplexPoint) -> Result<f64> {
        fisher_distance(&self.coords, &other.coords)
    }

    pub fn kl_divergence(&self, other: &SimplexPoint) -> Result<Divergence> {
        kl_divergence(&self.coords, &other.coords)
    }
}

fn check_dims(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    Ok(())
}

/// `arccos` of a Bhattacharyya affinity, with the argument clamped to `[0, 1]`.
pub fn affinity_to_distance(affinity: f64) -> f64 {
    affinity.clamp(0.0, 1.0).acos()
}

/// `arccos(Σ √(p_i q_i))`, evaluated as `2·asin(‖√p − √q‖ / 2)`.
///
/// The two agree on the simplex; the second keeps full relative precision
/// as `q → p`, where `1 − Σ √(p_i q_i)` cancels.
pub fn fisher_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_dims(p, q)?;
    let h2: f64 = p.iter().zip(q).map(|(&a, &b)| sqrt_diff(a, b).powi(2)).sum();
    Ok(hellinger_to_distance(h2))
}

/// `√a − √b` without cancellation when `a ≈ b`.
fn sqrt_diff(a: f64, b: f64) -> f64 {
    let s = a.sqrt() + b.sqrt();
    if s == 0.0 {
        0.0
    } else {
        (a - b) / s
    }
}

/// `2·asin(h / 2)` for `h² = ‖√p − √q‖²`, with `h²` clamped to `[0, 2]`
/// (affinity in `[0, 1]`).
fn hellinger_to_distance(h2: f64) -> f64 {
    2.0 * (0.5 * h2.clamp(0.0, 2.0).sqrt()).asin()
}

/// Bhattacharyya affinity `Σ √(p_i q_i)` of two sparse rows sorted by index.
///
/// Only the intersection of the supports contributes.
pub fn sparse_affinity(p: &[(usize, f64)], q: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < p.len() && j < q.len() {
        match p[i].0.cmp(&q[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += (p[i].1 * q[j].1).sqrt();
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Fisher distance between sparse rows sorted by index.
pub fn sparse_fisher_distance(p: &[(usize, f64)], q: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut h2 = 0.0;
    while i < p.len() || j < q.len() {
        let next = match (p.get(i), q.get(j)) {
            (Some(a), Some(b)) if a.0 == b.0 => {
                i += 1;
                j += 1;
                sqrt_diff(a.1, b.1)
            }
            (Some(a), Some(b)) if a.0 < b.0 => {
                i += 1;
                a.1.sqrt()
            }
            (Some(a), None) => {
                i += 1;
                a.1.sqrt()
            }
            (_, Some(b)) => {
                j += 1;
                b.1.sqrt()
            }
            (None, None) => unreachable!(),
        };
        h2 += next * next;
    }
    hellinger_to_distance(h2)
}

/// KL divergence in nats; infinite when `p` puts mass where `q` has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn value(self) -> f64 {
        match self {
            Divergence::Finite(v) => v,
            Divergence::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Divergence::Finite(_))
    }
}

pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<Divergence> {
    check_dims(p, q)?;
    // Σ p ln(p/q) = Σ [p ln(p/q) + q − p] − Σ (q − p). Each bracket is
    // nonnegative and computed without cancellation; the last sum only
    // carries the normalization residual.
    let mut acc = 0.0;
    let mut residual = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        residual += b - a;
        if a == 0.0 {
            acc += b;
            continue;
        }
        if b == 0.0 {
            return Ok(Divergence::Infinite);
        }
        acc += a * u_minus_ln1p((b - a) / a);
    }
    Ok(Divergence::Finite((acc - residual).max(0.0)))
}

/// `u − ln(1 + u)` for `u > −1`, by series near zero.
fn u_minus_ln1p(u: f64) -> f64 {
    if u.abs() < 1e-3 {
        let u2 = u * u;
        u2 * (0.5 - u / 3.0 + u2 / 4.0 - u2 * u / 5.0)
    } else {
        u - u.ln_1p()
    }
}

pub fn euclidean_sq(p: &[f64], q: &[f64]) -> Result<f64> {
    check_dims(p, q)?;
    Ok(p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Squared Euclidean distance between sparse rows sorted by index.
pub fn sparse_euclidean_sq(p: &[(usize, f64)], q: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < p.len() || j < q.len() {
        let pi = p.get(i).map_or(usize::MAX, |e| e.0);
        let qj = q.get(j).map_or(usize::MAX, |e| e.0);
        let d = if pi < qj {
            i += 1;
            p[i - 1].1
        } else if qj < pi {
            j += 1;
            q[j - 1].1
        } else {
            i += 1;
            j += 1;
            p[i - 1].1 - q[j - 1].1
        };
        acc += d * d;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn tiny_distances_keep_precision() {
        // On the 1-simplex d(p, q) = |asin √q₁ − asin √p₁|, slope 1 at p₁ = ½.
        for delta in [1e-3, 1e-6, 1e-9] {
            let d = fisher_distance(&[0.5, 0.5], &[0.5 + delta, 0.5 - delta]).unwrap();
            assert!((d / delta - 1.0).abs() < 1e-6, "{delta}: {d}");
            let s = sparse_fisher_distance(&[(0, 0.5), (1, 0.5)], &[(0, 0.5 + delta), (1, 0.5 - delta)]);
            assert_eq!(s, d);
        }
    }

    #[test]
    fn sparse_matches_dense_on_disjoint_supports() {
        let d = fisher_distance(&[0.2, 0.8, 0.0, 0.0], &[0.0, 0.5, 0.25, 0.25]).unwrap();
        let s = sparse_fisher_distance(&[(0, 0.2), (1, 0.8)], &[(1, 0.5), (2, 0.25), (3, 0.25)]);
        assert!((d - s).abs() < 1e-15);
        assert!((d - (0.4f64).sqrt().acos()).abs() < 1e-15);
        assert!((sparse_fisher_distance(&[(0, 1.0)], &[(1, 1.0)]) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn fisher_closed_forms() {
        assert_eq!(fisher_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert!((fisher_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert!((fisher_distance(&[1.0, 0.0], &[0.5, 0.5]).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(matches!(
            fisher_distance(&[1.0], &[0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kl_cases() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), Divergence::Finite(0.0));
        // ½ ln 2 + ½ ln(2/3), evaluated term by term.
        let d = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]).unwrap().value();
        assert!((d - 0.143_841_036_225_890_2).abs() < 1e-12, "{d}");
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), Divergence::Infinite);
        // Zero mass in p never contributes.
        assert!(kl_divergence(&[0.0, 1.0], &[0.5, 0.5]).unwrap().is_finite());
    }

    #[test]
    fn euclidean_cases() {
        assert_eq!(euclidean_sq(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(euclidean_sq(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(euclidean_sq(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), 0.5);
        assert_eq!(sparse_euclidean_sq(&[(0, 0.5), (1, 0.5)], &[(0, 1.0)]), 0.5);
        assert_eq!(sparse_euclidean_sq(&[(3, 1.0)], &[(1, 1.0)]), 2.0);
    }

    #[test]
    fn simplex_validation() {
        assert!(SimplexPoint::new(vec![0.5, 0.5]).is_ok());
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.5, -0.5]).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0]).is_err());
        assert_eq!(SimplexPoint::from_weights(&[1.0, 3.0]).unwrap().coords(), [0.25, 0.75]);
    }

    #[test]
    fn sparse_matches_dense() {
        let p = [(0, 0.2), (2, 0.8)];
        let q = [(1, 0.5), (2, 0.5)];
        let dense = fisher_distance(&[0.2, 0.0, 0.8], &[0.0, 0.5, 0.5]).unwrap();
        assert!((sparse_fisher_distance(&p, &q) - dense).abs() < 1e-15);
    }

    fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.0f64..1.0, dim).prop_filter_map("zero mass", |w| {
            SimplexPoint::from_weights(&w).ok().map(SimplexPoint::into_inner)
        })
    }

    proptest! {
        #[test]
        fn fisher_symmetric_bounded(p in point(6), q in point(6)) {
            let a = fisher_distance(&p, &q).unwrap();
            let b = fisher_distance(&q, &p).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..=FRAC_PI_2).contains(&a));
            prop_assert!(fisher_distance(&p, &p).unwrap() < 1e-7);
            prop_assert_eq!(euclidean_sq(&p, &q).unwrap(), euclidean_sq(&q, &p).unwrap());
        }
    }
}
