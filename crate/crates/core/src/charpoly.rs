//! Characteristic determinants `Q_n = det(Σ X_s π_n(s) − λ)`, the factored
//! closed form for the first Grigorchuk group and the two-parameter pencil
//! of the degree-3 groups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::automata::SelfSimilarGroup;
use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::levelrep::{hecke_operator, LevelRep, Weights};

/// Largest dimension for dense determinants.
pub const MAX_DETERMINANT_DIMENSION: usize = 4096;

/// Sample points with an elimination pivot below this are rejected.
pub const PIVOT_REJECTION: f64 = 1e-10;

/// Determinant as sign and natural log of the magnitude, plus the smallest
/// pivot magnitude met during elimination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDet {
    pub sign: f64,
    pub log_abs: f64,
    pub min_pivot: f64,
}

impl LogDet {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// Gaussian elimination with partial pivoting on a row-major `n × n` matrix.
pub fn log_determinant(n: usize, mut a: Vec<f64>) -> LogDet {
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return LogDet {
                sign: 0.0,
                log_abs: f64::NEG_INFINITY,
                min_pivot: 0.0,
            };
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        min_pivot = min_pivot.min(pivot.abs());
        if pivot < 0.0 {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();
        let (upper, lower) = a.split_at_mut((k + 1) * n);
        let prow = &upper[k * n..(k + 1) * n];
        for row in lower.chunks_exact_mut(n) {
            let f = row[k] / pivot;
            if f != 0.0 {
                for j in k + 1..n {
                    row[j] -= f * prow[j];
                }
            }
        }
    }
    LogDet {
        sign,
        log_abs,
        min_pivot: if n == 0 { f64::INFINITY } else { min_pivot },
    }
}

/// `det(Σ w(s) π_n(s) − λ)` in sign/log form.
pub fn q_log(group: &SelfSimilarGroup, level: usize, weights: &Weights, lambda: f64) -> Result<LogDet> {
    let dim = group.degree().pow(level as u32);
    if dim > MAX_DETERMINANT_DIMENSION {
        return Err(Error::DimensionOverflow {
            dim,
            max: MAX_DETERMINANT_DIMENSION,
        });
    }
    let op = hecke_operator(&LevelRep::new(group, level), weights)?;
    let mut dense = op.to_dense();
    for i in 0..dim {
        dense[i * dim + i] -= lambda;
    }
    Ok(log_determinant(dim, dense))
}

/// `det(Σ w(s) π_n(s) − λ)`. The relative accuracy is roughly the condition
/// number of the matrix times machine precision.
pub fn q_value(group: &SelfSimilarGroup, level: usize, weights: &Weights, lambda: f64) -> Result<f64> {
    Ok(q_log(group, level, weights, lambda)?.value())
}

/// Weight `alpha` on the first generator and its inverse, `beta` on every
/// other element of the generating set.
pub fn two_parameter_weights(group: &SelfSimilarGroup, alpha: f64, beta: f64) -> Weights {
    group
        .symmetric_set()
        .iter()
        .map(|&l| (group.letter_symbol(l), if l.generator == 0 { alpha } else { beta }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub n: usize,
}

/// Which recursion term to use for `Φ_n`, `n ≥ 3`, and an optional
/// perturbation of the `3β` coefficient in `Φ₀` (for mutation checks).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiFormula {
    pub printed_term: bool,
    pub phi0_perturbation: f64,
}

impl Default for PhiFormula {
    /// The homogeneous term `2(2αβ)^{2^{n−2}}`, unperturbed.
    fn default() -> Self {
        Self {
            printed_term: false,
            phi0_perturbation: 0.0,
        }
    }
}

impl PhiFormula {
    /// The term `2(2α)^{2^{n−2}}`, which agrees with the homogeneous one only
    /// at `β = 1`.
    pub fn printed() -> Self {
        Self {
            printed_term: true,
            phi0_perturbation: 0.0,
        }
    }

    pub fn perturbed(delta: f64) -> Self {
        Self {
            printed_term: false,
            phi0_perturbation: delta,
        }
    }

    fn term(&self, p: &PhiParams, k: usize) -> f64 {
        let base = if self.printed_term {
            2.0 * p.alpha
        } else {
            2.0 * p.alpha * p.beta
        };
        2.0 * base.powi(1 << (k - 2))
    }
}

/// `Φ₀, …, Φ_n`:
/// `Φ₀ = α + 3β − λ`, `Φ₁ = −α + 3β − λ`, `Φ₂ = λ² − 2βλ − α² − 3β²` and
/// `Φ_k = Φ_{k−1}² − 2(2αβ)^{2^{k−2}}`.
pub fn phi_factors(p: &PhiParams, formula: &PhiFormula) -> Vec<f64> {
    let (a, b, l) = (p.alpha, p.beta, p.lambda);
    let mut out = Vec::with_capacity(p.n + 1);
    out.push(a + (3.0 + formula.phi0_perturbation) * b - l);
    if p.n >= 1 {
        out.push(-a + 3.0 * b - l);
    }
    if p.n >= 2 {
        out.push(-a * a - 3.0 * b * b - 2.0 * b * l + l * l);
    }
    for k in 3..=p.n {
        let prev = out[k - 1];
        out.push(prev * prev - formula.term(p, k));
    }
    out
}

pub fn phi_product_with(p: &PhiParams, formula: &PhiFormula) -> f64 {
    phi_factors(p, formula).iter().product()
}

/// `Φ₀Φ₁⋯Φ_n`.
pub fn phi_product(p: &PhiParams) -> f64 {
    phi_product_with(p, &PhiFormula::default())
}

/// `Φ₀Φ₁⋯Φ_n` as sign and log magnitude.
pub fn phi_log_product(p: &PhiParams, formula: &PhiFormula) -> (f64, f64) {
    phi_factors(p, formula).iter().fold((1.0, 0.0), |(s, l), &f| {
        let sign = if f == 0.0 { 0.0 } else { f.signum() };
        (s * sign, l + f.abs().ln())
    })
}

/// Roots in `λ` of `Φ₀⋯Φ_n` at fixed `α, β`, found by inverting the
/// recursion: `Φ_k = 0` forces `Φ_{k−1} = ±√(c_k)`, and so on down to the
/// quadratic `Φ₂`. Complex branches are dropped, so fewer than `2ⁿ` roots
/// means some are not real.
pub fn phi_roots(alpha: f64, beta: f64, n: usize, formula: &PhiFormula) -> Vec<f64> {
    let p = PhiParams {
        alpha,
        beta,
        lambda: 0.0,
        n,
    };
    let mut roots = vec![alpha + (3.0 + formula.phi0_perturbation) * beta];
    if n >= 1 {
        roots.push(3.0 * beta - alpha);
    }
    for k in 2..=n {
        // values Φ_2 must take for Φ_k to vanish
        let mut targets = vec![0.0];
        for j in (3..=k).rev() {
            let c = formula.term(&p, j);
            targets = targets
                .iter()
                .filter(|&&t| c + t >= 0.0)
                .flat_map(|&t| {
                    let s = (c + t).sqrt();
                    [s, -s]
                })
                .collect();
        }
        // Φ₂ = v  ⇔  λ = β ± √(4β² + α² + v)
        for v in targets {
            let r = 4.0 * beta * beta + alpha * alpha + v;
            if r >= 0.0 {
                roots.push(beta + r.sqrt());
                roots.push(beta - r.sqrt());
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductFormulaReport {
    pub n: usize,
    pub samples: usize,
    pub rejected: usize,
    /// `relative` for `n ≤ 6`, `log` (difference of log magnitudes, sign
    /// mismatch counted as infinite) for `n ≥ 7`.
    pub mode: &'static str,
    pub max_error: f64,
}

/// Compares direct determinants of the first Grigorchuk group with the
/// factored form at seeded random points of `[−2, 2]³`.
pub fn verify_product_formula(
    group: &SelfSimilarGroup,
    n: usize,
    samples: usize,
    seed: u64,
    formula: &PhiFormula,
) -> Result<ProductFormulaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let log_mode = n >= 7;
    let mut accepted = 0;
    let mut rejected = 0;
    let mut max_error: f64 = 0.0;
    while accepted < samples {
        if rejected > 100 * samples.max(1) {
            return Err(Error::NoConvergence);
        }
        let (alpha, beta, lambda): (f64, f64, f64) = (
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
        );
        let det = q_log(group, n, &two_parameter_weights(group, alpha, beta), lambda)?;
        if det.min_pivot < PIVOT_REJECTION {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let p = PhiParams {
            alpha,
            beta,
            lambda,
            n,
        };
        let err = if log_mode {
            let (sign, log_abs) = phi_log_product(&p, formula);
            if sign != det.sign {
                f64::INFINITY
            } else {
                (log_abs - det.log_abs).abs()
            }
        } else {
            let phi = phi_product_with(&p, formula);
            (det.value() - phi).abs() / phi.abs().max(1.0)
        };
        max_error = max_error.max(err);
    }
    Ok(ProductFormulaReport {
        n,
        samples,
        rejected,
        mode: if log_mode { "log" } else { "relative" },
        max_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecursionPoint {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub printed_deviation: f64,
    pub derived_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecursionReport {
    pub n: usize,
    pub skipped: usize,
    pub points: Vec<RecursionPoint>,
    pub max_printed_deviation: f64,
    pub max_derived_deviation: f64,
}

/// Compares `Q_n` with two one-step reductions to `Q_{n−1}`. With
/// `D = 3β² + 2βλ − λ²`:
///
/// * printed: `D^{2^{n−2}} Q_{n−1}(α' = 2α²/(2β²λ − λ²), β, λ' = λ − β + (λ − β)α²/D)`
/// * derived (block elimination): `(−D)^{2^{n−2}} Q_{n−1}(−2α²β/D, β, λ + (λ − β)α²/D)`
///
/// Deviations are `|lhs − rhs| / max(1, |lhs|)`. Points near a pole of
/// either formula are skipped. Diagnostic only.
pub fn verify_q_recursion(group: &SelfSimilarGroup, n: usize, samples: usize, seed: u64) -> Result<RecursionReport> {
    if n < 2 {
        return Err(Error::InvalidGroup("the recursion starts at level 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
    let mut points = Vec::with_capacity(samples);
    let mut skipped = 0;
    let q = |alpha: f64, beta: f64, lambda: f64, level: usize| {
        q_value(group, level, &two_parameter_weights(group, alpha, beta), lambda)
    };
    let power = 1i32 << (n - 2);
    while points.len() < samples {
        if skipped > 100 * samples.max(1) {
            break;
        }
        let (alpha, beta, lambda): (f64, f64, f64) = (
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
            rng.random_range(-2.0..=2.0),
        );
        let d = 3.0 * beta * beta + 2.0 * beta * lambda - lambda * lambda;
        let printed_den = 2.0 * beta * beta * lambda - lambda * lambda;
        if d.abs() < 1e-6 || printed_den.abs() < 1e-6 {
            skipped += 1;
            continue;
        }
        let lhs = q(alpha, beta, lambda, n)?;
        let printed = d.powi(power)
            * q(
                2.0 * alpha * alpha / printed_den,
                beta,
                lambda - beta + (lambda - beta) * alpha * alpha / d,
                n - 1,
            )?;
        let derived = (-d).powi(power)
            * q(
                -2.0 * alpha * alpha * beta / d,
                beta,
                lambda + (lambda - beta) * alpha * alpha / d,
                n - 1,
            )?;
        let scale = lhs.abs().max(1.0);
        points.push(RecursionPoint {
            alpha,
            beta,
            lambda,
            printed_deviation: (lhs - printed).abs() / scale,
            derived_deviation: (lhs - derived).abs() / scale,
        });
    }
    let max = |f: fn(&RecursionPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    Ok(RecursionReport {
        n,
        skipped,
        max_printed_deviation: max(|p| p.printed_deviation),
        max_derived_deviation: max(|p| p.derived_deviation),
        points,
    })
}

/// One column of the pencil: all eigenvalues of
/// `α(A + A⁻¹) + (X + X⁻¹)` at a fixed `α`, ascending.
#[derive(Debug, Clone, Serialize)]
pub struct CorrespondenceColumn {
    pub alpha: f64,
    pub lambdas: Vec<f64>,
}

/// For each `α`, the eigenvalues `λ` with `Q_n(α, 1, λ) = 0`, i.e. of
/// `α(A + A⁻¹) + (X + X⁻¹)` with `A` the first generator and `X` the rest.
/// Columns are computed in parallel and returned in input order.
pub fn spectral_correspondence(
    group: &SelfSimilarGroup,
    level: usize,
    alphas: &[f64],
) -> Result<Vec<CorrespondenceColumn>> {
    let rep = LevelRep::new(group, level);
    alphas
        .par_iter()
        .map(|&alpha| {
            let op = hecke_operator(&rep, &two_parameter_weights(group, alpha, 1.0))?;
            Ok(CorrespondenceColumn {
                alpha,
                lambdas: eigenvalues(&op)?,
            })
        })
        .collect()
}

/// Values `min, min + step, …` up to `max` inclusive, computed by index to
/// avoid drift.
pub fn alpha_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || max < min {
        return Vec::new();
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| min + i as f64 * step).collect()
}
