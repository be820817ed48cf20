//! Closed-form limit spectra of the built-in groups and real Julia sets of
//! `z ↦ z² − λ` approximated by backward iteration.

use serde::Serialize;

use crate::eigen::{distance_to_sorted, hausdorff_distance};
use crate::error::{Error, Result};

/// Points closer than this are merged while iterating backwards.
pub const JULIA_MERGE_THRESHOLD: f64 = 1e-13;

/// Radicands in `(-RADICAND_SLACK, 0)` are treated as rounding noise and
/// clamped to zero rather than discarded.
const RADICAND_SLACK: f64 = 1e-12;

/// One backward-iteration layer of the Julia set of `z² − λ`.
#[derive(Debug, Clone, Serialize)]
pub struct JuliaApprox {
    pub lambda: f64,
    pub depth: usize,
    pub seed: f64,
    /// Ascending, pairwise further apart than [`JULIA_MERGE_THRESHOLD`].
    pub points: Vec<f64>,
}

/// Repelling fixed point `(1 + √(1 + 4λ)) / 2`; every real Julia point lies
/// in `[-β, β]`.
pub fn fixed_point(lambda: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * lambda).sqrt()) / 2.0
}

/// Depth-`depth` backward orbit of the fixed point β.
pub fn julia_backward(lambda: f64, depth: usize) -> Result<JuliaApprox> {
    julia_backward_from(lambda, depth, fixed_point(lambda))
}

/// Depth-`depth` backward orbit of an arbitrary seed: each layer is
/// `{±√(λ ± q)}` over the previous layer, keeping only real roots. From the
/// first layer on the sets are symmetric, so only the seed layer is affected
/// by the inner sign.
pub fn julia_backward_from(lambda: f64, depth: usize, seed: f64) -> Result<JuliaApprox> {
    if !(lambda >= 2.0) {
        return Err(Error::ComplexJulia(lambda));
    }
    let mut points = vec![seed];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(2 * points.len());
        for &q in &points {
            for r in [lambda + q, lambda - q] {
                if r >= 0.0 {
                    let s = r.sqrt();
                    next.push(-s);
                    next.push(s);
                }
            }
        }
        next.sort_by(f64::total_cmp);
        next.dedup_by(|b, a| (*b - *a).abs() <= JULIA_MERGE_THRESHOLD);
        points = next;
    }
    Ok(JuliaApprox {
        lambda,
        depth,
        seed,
        points,
    })
}

impl JuliaApprox {
    /// Largest distance between consecutive points (0 for fewer than two).
    pub fn max_gap(&self) -> f64 {
        self.points.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Hausdorff distance to another approximation, used to measure how much
    /// one more level of backward iteration still moves the set.
    pub fn refinement_distance(&self, other: &JuliaApprox) -> Result<f64> {
        hausdorff_distance(&self.points, &other.points)
    }
}

/// Map applied to Julia points to obtain spectral values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum JuliaTransform {
    /// `x ↦ (1 + sign·x) / 4`
    Affine { sign: f64 },
    /// `x ↦ (1 + outer·√(9/2 + inner·2x)) / 4`, dropping negative radicands.
    Radical { outer: f64, inner: f64 },
}

impl JuliaTransform {
    pub fn apply(&self, x: f64) -> Option<f64> {
        match *self {
            JuliaTransform::Affine { sign } => Some((1.0 + sign * x) / 4.0),
            JuliaTransform::Radical { outer, inner } => {
                let mut r = 4.5 + inner * 2.0 * x;
                if r < 0.0 {
                    if r <= -RADICAND_SLACK {
                        return None;
                    }
                    r = 0.0;
                }
                Some((1.0 + outer * r.sqrt()) / 4.0)
            }
        }
    }

    /// Largest `|f'|` over the given points (infinite where a radicand
    /// reaches zero).
    pub fn max_slope(&self, points: &[f64]) -> f64 {
        match *self {
            JuliaTransform::Affine { .. } => 0.25,
            JuliaTransform::Radical { inner, .. } => points
                .iter()
                .map(|&x| 4.5 + inner * 2.0 * x)
                .filter(|&r| r >= 0.0)
                .map(|r| 0.25 / r.sqrt())
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JuliaPart {
    pub julia: JuliaApprox,
    pub transform: JuliaTransform,
}

/// Union of closed intervals, isolated points and transformed Julia sets.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSet {
    pub intervals: Vec<(f64, f64)>,
    pub points: Vec<f64>,
    pub julia_parts: Vec<JuliaPart>,
    #[serde(skip)]
    julia_values: Vec<f64>,
}

impl SpectralSet {
    pub fn new(mut intervals: Vec<(f64, f64)>, points: Vec<f64>, julia_parts: Vec<JuliaPart>) -> Self {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut julia_values: Vec<f64> = julia_parts
            .iter()
            .flat_map(|part| part.julia.points.iter().filter_map(|&x| part.transform.apply(x)))
            .collect();
        julia_values.sort_by(f64::total_cmp);
        julia_values.dedup();
        Self {
            intervals,
            points,
            julia_parts,
            julia_values,
        }
    }

    /// All transformed Julia values, ascending.
    pub fn julia_values(&self) -> &[f64] {
        &self.julia_values
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty() && self.julia_values.is_empty()
    }

    /// A finite sample of the set: interval endpoints and `per_interval`
    /// evenly spaced points inside each interval, the isolated points and all
    /// Julia values. Used for Hausdorff comparisons.
    pub fn sample(&self, per_interval: usize) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &(lo, hi) in &self.intervals {
            let k = per_interval.max(2);
            out.extend((0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64));
        }
        out.extend(&self.points);
        out.extend(&self.julia_values);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Distance from `x` to the set.
pub fn set_distance(set: &SpectralSet, x: f64) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best = f64::INFINITY;
    for &(lo, hi) in &set.intervals {
        let d = if x < lo {
            lo - x
        } else if x > hi {
            x - hi
        } else {
            0.0
        };
        best = best.min(d);
    }
    for &p in &set.points {
        best = best.min((p - x).abs());
    }
    if !set.julia_values.is_empty() {
        best = best.min(distance_to_sorted(&set.julia_values, x));
    }
    Ok(best)
}

/// Julia parameter of the Γ row.
pub const GAMMA_LAMBDA: f64 = 6.0;
/// Julia parameter of the Γ̄ and Γ̄̄ rows.
pub const GAMMA_BAR_LAMBDA: f64 = 45.0 / 16.0;

/// Limit spectrum of a built-in group, with Julia parts at the given depth.
///
/// The Γ row uses both the backward orbit of β and the finite nested
/// radicals `±√(6 ± √(6 ± … √6))` (backward layers of 0). Finite levels
/// have eigenvalues at the latter, which converge to the Julia set but do
/// not lie on it.
pub fn predicted_spectrum(name: &str, depth: usize) -> Result<SpectralSet> {
    let affine = |julia: &JuliaApprox| {
        [1.0, -1.0].map(|sign| JuliaPart {
            julia: julia.clone(),
            transform: JuliaTransform::Affine { sign },
        })
    };
    match name {
        "grigorchuk" => Ok(SpectralSet::new(vec![(-0.5, 0.0), (0.5, 1.0)], vec![], vec![])),
        "grigorchuk-tilde" => Ok(SpectralSet::new(vec![(0.0, 1.0)], vec![], vec![])),
        "gamma" => {
            let mut parts: Vec<JuliaPart> = affine(&julia_backward(GAMMA_LAMBDA, depth)?).into();
            for k in 1..=depth {
                parts.extend(affine(&julia_backward_from(GAMMA_LAMBDA, k, 0.0)?));
            }
            Ok(SpectralSet::new(vec![], vec![1.0, 0.25], parts))
        }
        "gamma-bar" | "gamma-barbar" => {
            let julia = julia_backward(GAMMA_BAR_LAMBDA, depth)?;
            let mut parts = Vec::new();
            for outer in [1.0, -1.0] {
                for inner in [1.0, -1.0] {
                    parts.push(JuliaPart {
                        julia: julia.clone(),
                        transform: JuliaTransform::Radical { outer, inner },
                    });
                }
            }
            Ok(SpectralSet::new(vec![], vec![1.0, -0.5, 0.25], parts))
        }
        other => Err(Error::UnknownGroup(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn julia_examples() {
        let j0 = julia_backward(6.0, 0).unwrap();
        assert_eq!(j0.points, vec![3.0]);
        let j1 = julia_backward(6.0, 1).unwrap();
        let s3 = 3f64.sqrt();
        let expected = [-3.0, -s3, s3, 3.0];
        assert_eq!(j1.points.len(), 4);
        for (x, y) in j1.points.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        for depth in [0, 1, 5, 12] {
            let j = julia_backward(2.0, depth).unwrap();
            assert!(j.points.iter().all(|p| p.abs() <= 2.0));
        }
        assert_eq!(julia_backward(45.0 / 16.0, 0).unwrap().points, vec![2.25]);
    }

    #[test]
    fn rejects_complex_regime() {
        assert!(matches!(julia_backward(1.5, 3), Err(Error::ComplexJulia(_))));
        assert!(julia_backward(f64::NAN, 3).is_err());
    }

    #[test]
    fn backward_layers_map_forward() {
        for lambda in [6.0, 45.0 / 16.0, 2.0] {
            let beta = fixed_point(lambda);
            let mut prev = julia_backward(lambda, 0).unwrap();
            for k in 1..=10 {
                let cur = julia_backward(lambda, k).unwrap();
                for &p in &cur.points {
                    assert!(p.abs() <= beta * (1.0 + 1e-15));
                    let q = p * p - lambda;
                    let d = distance_to_sorted(&prev.points, q).min(distance_to_sorted(&prev.points, -q));
                    assert!(d <= 1e-12 * q.abs().max(1.0), "λ={lambda} k={k} p={p}");
                }
                // the previous layer is contained in the forward image
                let mut image: Vec<f64> = cur.points.iter().map(|p| p * p - lambda).collect();
                image.sort_by(f64::total_cmp);
                for &q in &prev.points {
                    assert!(distance_to_sorted(&image, q) <= 1e-12 * q.abs().max(1.0));
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn gaps_do_not_grow() {
        for lambda in [6.0, 45.0 / 16.0] {
            let gaps: Vec<f64> = (4..=12).map(|k| julia_backward(lambda, k).unwrap().max_gap()).collect();
            assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        }
    }

    #[test]
    fn predicted_set_examples() {
        let g = predicted_spectrum("grigorchuk", 14).unwrap();
        assert_eq!(g.intervals, vec![(-0.5, 0.0), (0.5, 1.0)]);
        assert!(g.points.is_empty() && g.julia_parts.is_empty());
        assert_eq!(set_distance(&g, 0.75).unwrap(), 0.0);
        assert!((set_distance(&g, 0.25).unwrap() - 0.25).abs() < 1e-15);

        let gamma0 = predicted_spectrum("gamma", 0).unwrap();
        assert_eq!(gamma0.julia_values(), &[-0.5, 1.0]);
        let gamma1 = predicted_spectrum("gamma", 1).unwrap();
        assert!(set_distance(&gamma1, (1.0 + 3f64.sqrt()) / 4.0).unwrap() <= 1e-12);

        for depth in [0, 3, 8] {
            let bar = predicted_spectrum("gamma-bar", depth).unwrap();
            assert!(bar.julia_values().iter().all(|&v| (-0.5 - 1e-12..=1.0 + 1e-12).contains(&v)));
        }
        assert!(matches!(predicted_spectrum("nope", 1), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn bar_rows_coincide() {
        let a = predicted_spectrum("gamma-bar", 9).unwrap();
        let b = predicted_spectrum("gamma-barbar", 9).unwrap();
        assert_eq!(a.julia_values(), b.julia_values());
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn radicand_filtering() {
        let t = JuliaTransform::Radical { outer: 1.0, inner: -1.0 };
        assert_eq!(t.apply(2.25), Some(0.25));
        assert_eq!(t.apply(3.0), None);
        assert_eq!(t.apply(2.25 + 1e-14), Some(0.25));
        assert!(t.max_slope(&[2.25]).is_infinite());
        assert_eq!(JuliaTransform::Affine { sign: -1.0 }.max_slope(&[]), 0.25);
    }

    #[test]
    fn empty_set_distance_errors() {
        let s = SpectralSet::new(vec![], vec![], vec![]);
        assert!(matches!(set_distance(&s, 0.0), Err(Error::EmptySet)));
    }
}
