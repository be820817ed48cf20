//! The verification suite behind `verify`: each check recomputes a property
//! from scratch and compares it with a pinned tolerance.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::automata::{builtin_group, SelfSimilarGroup, BUILTIN_GROUPS};
use crate::charpoly::{phi_product_with, phi_roots, q_value, two_parameter_weights, verify_product_formula, verify_q_recursion, PhiFormula, PhiParams};
use crate::eigen::{eigenvalues, hausdorff_distance, multiset_contained, SpectrumApprox, DEFAULT_CLUSTER_THRESHOLD};
use crate::error::Result;
use crate::levelrep::{uniform_hecke, verify_block_identities};
use crate::schreier::{action_graph, ball_growth, growth_exponent, markov_operator, rooted_labeled_isomorphic};
use crate::spectra::{fixed_point, julia_backward, predicted_spectrum, set_distance, JuliaPart, JuliaTransform, SpectralSet, GAMMA_BAR_LAMBDA, GAMMA_LAMBDA};
use crate::substitution::{ball_agreement_radius, expand, find_offset, gamma_substitution_system};

/// Thresholds of the suite.
pub mod tolerances {
    pub const INTERVAL_MEMBERSHIP: f64 = 1e-9;
    pub const JULIA_MEMBERSHIP: f64 = 1e-5;
    pub const EXACT_POINT: f64 = 1e-9;
    pub const NESTING: f64 = 1e-8;
    pub const TOP_EIGENVALUE: f64 = 1e-10;
    pub const PRODUCT_FORMULA: f64 = 1e-6;
    pub const PRODUCT_FORMULA_ANCHOR: f64 = 1e-12;
    pub const SCALED_SPECTRUM: f64 = 1e-7;
    pub const GRIGORCHUK_GROWTH: (f64, f64) = (0.85, 1.15);
    pub const GAMMA_GROWTH: (f64, f64) = (1.45, 1.75);
    pub const JULIA_INVARIANCE: f64 = 1e-12;
    pub const BAR_HAUSDORFF_SOFT: f64 = 0.1;
    pub const MEMBERSHIP_SECONDS: f64 = 60.0;
    pub const SUITE_SECONDS: f64 = 900.0;
    pub const MIN_JULIA_DEPTH: usize = 14;
}

use tolerances as tol;

/// Names accepted by `--only`, indexed by check number minus one.
pub const CHECK_NAMES: [&str; 13] = [
    "membership-grigorchuk",
    "membership-grigorchuk-tilde",
    "membership-gamma",
    "membership-gamma-bar",
    "nesting",
    "markov-hecke",
    "top-eigenvalue",
    "block-identities",
    "product-formula",
    "scaled-spectrum",
    "growth",
    "substitution",
    "julia",
];

#[derive(Debug, Clone, Serialize)]
pub struct VerifyConfig {
    /// Check numbers to run (all when `None`).
    pub only: Option<Vec<usize>>,
    /// Highest level for the nesting, operator, top-eigenvalue, block and
    /// scaled-spectrum checks.
    pub max_level: usize,
    pub julia_depth: usize,
    pub seed: u64,
    pub formula_samples: usize,
    pub cluster_threshold: f64,
    /// Added to the `3β` coefficient of `Φ₀` (mutation testing).
    pub phi_perturbation: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            only: None,
            max_level: 8,
            julia_depth: 14,
            seed: 1,
            formula_samples: 100,
            cluster_threshold: DEFAULT_CLUSTER_THRESHOLD,
            phi_perturbation: 0.0,
        }
    }
}

/// Parses `--only` items: check numbers or names, comma separated.
pub fn parse_only(text: &str) -> std::result::Result<Vec<usize>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            if let Ok(n) = item.parse::<usize>() {
                if (1..=CHECK_NAMES.len()).contains(&n) {
                    return Ok(n);
                }
            }
            CHECK_NAMES
                .iter()
                .position(|&c| c == item)
                .map(|i| i + 1)
                .ok_or_else(|| format!("unknown check `{item}` (expected 1-13 or one of {})", CHECK_NAMES.join(", ")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// The quantity compared against `threshold`.
    pub metric: f64,
    pub threshold: f64,
    pub details: Value,
    pub seconds: f64,
    /// Set when the computation itself failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn internal_error(&self) -> bool {
        self.checks.iter().any(|c| c.error.is_some())
    }

    pub fn check(&self, id: usize) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Spectra of uniform Hecke operators, computed once per group and level.
struct SpectrumCache {
    groups: HashMap<&'static str, SelfSimilarGroup>,
    spectra: HashMap<(&'static str, usize), Arc<Vec<f64>>>,
}

impl SpectrumCache {
    fn new() -> Self {
        Self {
            groups: BUILTIN_GROUPS
                .iter()
                .map(|&n| (n, builtin_group(n).expect("built-in")))
                .collect(),
            spectra: HashMap::new(),
        }
    }

    fn group(&self, name: &str) -> &SelfSimilarGroup {
        &self.groups[name]
    }

    fn get(&mut self, name: &'static str, level: usize) -> Result<Arc<Vec<f64>>> {
        if let Some(s) = self.spectra.get(&(name, level)) {
            return Ok(s.clone());
        }
        let ev = Arc::new(eigenvalues(&uniform_hecke(self.group(name), level))?);
        self.spectra.insert((name, level), ev.clone());
        Ok(ev)
    }
}

struct Outcome {
    passed: bool,
    metric: f64,
    threshold: f64,
    details: Value,
}

/// Runs the selected checks in order.
pub fn run_verify(config: &VerifyConfig) -> VerifyReport {
    let start = Instant::now();
    let mut cache = SpectrumCache::new();
    let mut checks = Vec::new();
    for id in 1..=CHECK_NAMES.len() {
        if config.only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let outcome = match id {
            1 => check_interval_membership(&mut cache, "grigorchuk", Some(tol::MEMBERSHIP_SECONDS), t),
            2 => check_interval_membership(&mut cache, "grigorchuk-tilde", None, t),
            3 => check_gamma_membership(&mut cache, config),
            4 => check_bar_membership(&mut cache, config),
            5 => check_nesting(&mut cache, config),
            6 => check_markov_hecke(&cache, config),
            7 => check_top_eigenvalue(&mut cache, config),
            8 => check_block_identities(&cache, config),
            9 => check_product_formula(&cache, config),
            10 => check_scaled_spectrum(&mut cache, config),
            11 => check_growth(&cache),
            12 => check_substitution(&cache),
            13 => check_julia(config),
            _ => unreachable!(),
        };
        let seconds = t.elapsed().as_secs_f64();
        checks.push(match outcome {
            Ok(o) => CheckResult {
                id,
                name: CHECK_NAMES[id - 1],
                passed: o.passed,
                metric: o.metric,
                threshold: o.threshold,
                details: o.details,
                seconds,
                error: None,
            },
            Err(e) => CheckResult {
                id,
                name: CHECK_NAMES[id - 1],
                passed: false,
                metric: f64::NAN,
                threshold: f64::NAN,
                details: Value::Null,
                seconds,
                error: Some(e.to_string()),
            },
        });
    }
    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        config: config.clone(),
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn max_distance(set: &SpectralSet, values: &[f64]) -> Result<f64> {
    values
        .iter()
        .try_fold(0.0f64, |m, &x| Ok(m.max(set_distance(set, x)?)))
}

fn check_interval_membership(
    cache: &mut SpectrumCache,
    name: &'static str,
    time_limit: Option<f64>,
    started: Instant,
) -> Result<Outcome> {
    let set = predicted_spectrum(name, 0)?;
    let mut per_level = Vec::new();
    let mut worst = 0.0f64;
    for n in 1..=10 {
        let d = max_distance(&set, &cache.get(name, n)?)?;
        worst = worst.max(d);
        per_level.push(json!({"level": n, "max_distance": d}));
    }
    let seconds = started.elapsed().as_secs_f64();
    let in_time = time_limit.is_none_or(|limit| seconds <= limit);
    Ok(Outcome {
        passed: worst <= tol::INTERVAL_MEMBERSHIP && in_time,
        metric: worst,
        threshold: tol::INTERVAL_MEMBERSHIP,
        details: json!({
            "levels": per_level,
            "seconds": seconds,
            "time_limit_seconds": time_limit,
        }),
    })
}

fn nearest(values: &[f64], x: f64) -> f64 {
    values.iter().map(|v| (v - x).abs()).fold(f64::INFINITY, f64::min)
}

fn check_gamma_membership(cache: &mut SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let depth = config.julia_depth.max(tol::MIN_JULIA_DEPTH);
    let set = predicted_spectrum("gamma", depth)?;
    // the backward orbit of β alone, for comparison
    let orbit = julia_backward(GAMMA_LAMBDA, depth)?;
    let orbit_only = SpectralSet::new(
        vec![],
        vec![1.0, 0.25],
        [1.0, -1.0]
            .map(|sign| JuliaPart {
                julia: orbit.clone(),
                transform: JuliaTransform::Affine { sign },
            })
            .into(),
    );
    let mut worst = 0.0f64;
    let mut worst_point = 0.0f64;
    let mut per_level = Vec::new();
    for n in 1..=7 {
        let ev = cache.get("gamma", n)?;
        let d = max_distance(&set, &ev)?;
        let d_orbit = max_distance(&orbit_only, &ev)?;
        let points = nearest(&ev, 1.0).max(nearest(&ev, 0.25));
        worst = worst.max(d);
        worst_point = worst_point.max(points);
        per_level.push(json!({
            "level": n,
            "max_distance": d,
            "max_distance_beta_orbit_only": d_orbit,
            "distance_of_1_and_quarter": points,
        }));
    }
    Ok(Outcome {
        passed: worst <= tol::JULIA_MEMBERSHIP && worst_point <= tol::EXACT_POINT,
        metric: worst,
        threshold: tol::JULIA_MEMBERSHIP,
        details: json!({
            "julia_depth": depth,
            "points_threshold": tol::EXACT_POINT,
            "max_point_distance": worst_point,
            "levels": per_level,
        }),
    })
}

fn check_bar_membership(cache: &mut SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let depth = config.julia_depth.max(tol::MIN_JULIA_DEPTH);
    let mut worst = 0.0f64;
    let mut per_group = Vec::new();
    for name in ["gamma-bar", "gamma-barbar"] {
        let set = predicted_spectrum(name, depth)?;
        let mut levels = Vec::new();
        for n in 1..=7 {
            let d = max_distance(&set, &cache.get(name, n)?)?;
            worst = worst.max(d);
            levels.push(json!({"level": n, "max_distance": d}));
        }
        per_group.push(json!({"group": name, "levels": levels}));
    }
    let hausdorff = hausdorff_distance(&cache.get("gamma-bar", 7)?, &cache.get("gamma-barbar", 7)?)?;
    Ok(Outcome {
        passed: worst <= tol::JULIA_MEMBERSHIP,
        metric: worst,
        threshold: tol::JULIA_MEMBERSHIP,
        details: json!({
            "julia_depth": depth,
            "groups": per_group,
            "level7_hausdorff_bar_vs_barbar": hausdorff,
            "hausdorff_soft_threshold": tol::BAR_HAUSDORFF_SOFT,
            "hausdorff_within_soft_threshold": hausdorff <= tol::BAR_HAUSDORFF_SOFT,
        }),
    })
}

fn check_nesting(cache: &mut SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for name in BUILTIN_GROUPS {
        let mut prev = SpectrumApprox::from_sorted(&cache.get(name, 0)?, config.cluster_threshold);
        for n in 1..=config.max_level {
            let cur = SpectrumApprox::from_sorted(&cache.get(name, n)?, config.cluster_threshold);
            pairs += 1;
            if !multiset_contained(&prev, &cur, tol::NESTING) {
                failures.push(json!({"group": name, "level": n}));
            }
            prev = cur;
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        metric: failures.len() as f64,
        threshold: 0.0,
        details: json!({"tolerance": tol::NESTING, "pairs_checked": pairs, "failures": failures}),
    })
}

fn check_markov_hecke(cache: &SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    for name in BUILTIN_GROUPS {
        let g = cache.group(name);
        for n in 0..=config.max_level {
            let graph = action_graph(g, n);
            let transitive = graph.vertex_count() == g.degree().pow(n as u32);
            let regular = graph.degree() == Some(g.symmetric_set().len());
            let equal = markov_operator(&graph) == uniform_hecke(g, n);
            if !(transitive && regular && equal) {
                failures.push(json!({
                    "group": name, "level": n,
                    "level_transitive": transitive, "regular": regular, "entrywise_equal": equal,
                }));
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        metric: failures.len() as f64,
        threshold: 0.0,
        details: json!({"failures": failures}),
    })
}

fn check_top_eigenvalue(cache: &mut SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for name in BUILTIN_GROUPS {
        for n in 1..=config.max_level {
            let s = SpectrumApprox::from_sorted(&cache.get(name, n)?, config.cluster_threshold);
            let (top, mult) = s.max().expect("nonempty spectrum");
            let d = (top - 1.0).abs();
            worst = worst.max(d);
            if d > tol::TOP_EIGENVALUE || mult != 1 {
                failures.push(json!({"group": name, "level": n, "top": top, "multiplicity": mult}));
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        metric: worst,
        threshold: tol::TOP_EIGENVALUE,
        details: json!({"failures": failures}),
    })
}

fn check_block_identities(cache: &SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let mut failures = Vec::new();
    for name in BUILTIN_GROUPS {
        for n in 1..=config.max_level {
            if !verify_block_identities(cache.group(name), n) {
                failures.push(json!({"group": name, "level": n}));
            }
        }
    }
    Ok(Outcome {
        passed: failures.is_empty(),
        metric: failures.len() as f64,
        threshold: 0.0,
        details: json!({"failures": failures}),
    })
}

fn check_product_formula(cache: &SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let g = cache.group("grigorchuk");
    let formula = PhiFormula::perturbed(config.phi_perturbation);
    let mut worst = 0.0f64;
    let mut reports = Vec::new();
    for n in 0..=8 {
        let r = verify_product_formula(g, n, config.formula_samples, config.seed, &formula)?;
        worst = worst.max(r.max_error);
        reports.push(r);
    }
    let unit = two_parameter_weights(g, 1.0, 1.0);
    let mut anchor_error = 0.0f64;
    let mut anchors = Vec::new();
    for (n, expected) in [(0, 4.0), (1, 8.0)] {
        let q = q_value(g, n, &unit, 0.0)?;
        let phi = phi_product_with(&PhiParams { alpha: 1.0, beta: 1.0, lambda: 0.0, n }, &formula);
        anchor_error = anchor_error.max((q - expected).abs()).max((phi - expected).abs());
        anchors.push(json!({"n": n, "expected": expected, "determinant": q, "phi_product": phi}));
    }
    // reported only: the recursion term exactly as printed, and the Q recursion
    let printed: Vec<Value> = (3..=6)
        .map(|n| {
            verify_product_formula(g, n, 20, config.seed, &PhiFormula::printed())
                .map(|r| json!({"n": n, "max_error": r.max_error}))
        })
        .collect::<Result<_>>()?;
    let recursion: Vec<Value> = (2..=4)
        .map(|n| {
            verify_q_recursion(g, n, 20, config.seed).map(|r| {
                json!({
                    "n": n,
                    "max_printed_deviation": r.max_printed_deviation,
                    "max_derived_deviation": r.max_derived_deviation,
                    "skipped": r.skipped,
                })
            })
        })
        .collect::<Result<_>>()?;
    Ok(Outcome {
        passed: worst <= tol::PRODUCT_FORMULA && anchor_error <= tol::PRODUCT_FORMULA_ANCHOR,
        metric: worst,
        threshold: tol::PRODUCT_FORMULA,
        details: json!({
            "per_level": reports,
            "anchors": anchors,
            "anchor_error": anchor_error,
            "phi0_perturbation": config.phi_perturbation,
            "diagnostic_printed_recursion_term": printed,
            "diagnostic_q_recursion": recursion,
        }),
    })
}

fn check_scaled_spectrum(cache: &mut SpectrumCache, config: &VerifyConfig) -> Result<Outcome> {
    let formula = PhiFormula::perturbed(config.phi_perturbation);
    let mut worst = 0.0f64;
    let mut per_level = Vec::new();
    for n in 0..=config.max_level {
        let ev = cache.get("grigorchuk", n)?;
        let roots: Vec<f64> = phi_roots(1.0, 1.0, n, &formula).iter().map(|r| r / 4.0).collect();
        let d = if roots.len() == ev.len() {
            roots.iter().zip(ev.iter()).map(|(r, e)| (r - e).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        worst = worst.max(d);
        per_level.push(json!({"level": n, "roots": roots.len(), "max_difference": d}));
    }
    Ok(Outcome {
        passed: worst <= tol::SCALED_SPECTRUM,
        metric: worst,
        threshold: tol::SCALED_SPECTRUM,
        details: json!({"levels": per_level}),
    })
}

/// Window `[8, r]` with `r` the last radius before the ball holds half the
/// graph.
pub fn default_growth_window(series: &crate::schreier::GrowthSeries) -> (usize, usize) {
    (8, series.saturation_radius())
}

fn check_growth(cache: &SpectrumCache) -> Result<Outcome> {
    let grig = action_graph(cache.group("grigorchuk"), 12);
    let gs = ball_growth(&grig, grig.vertex_count());
    let (lo, hi) = default_growth_window(&gs);
    let eg = growth_exponent(&gs, lo, hi)?;
    let gamma = action_graph(cache.group("gamma"), 9);
    let gm = ball_growth(&gamma, gamma.vertex_count());
    let eq = growth_exponent(&gm, 8, 200)?;
    let in_range = |x: f64, (a, b): (f64, f64)| (a..=b).contains(&x);
    let ok_g = in_range(eg, tol::GRIGORCHUK_GROWTH);
    let ok_q = in_range(eq, tol::GAMMA_GROWTH);
    Ok(Outcome {
        passed: ok_g && ok_q,
        metric: eq,
        threshold: tol::GAMMA_GROWTH.0,
        details: json!({
            "grigorchuk": {"level": 12, "window": [lo, hi], "exponent": eg, "range": tol::GRIGORCHUK_GROWTH, "passed": ok_g},
            "gamma": {"level": 9, "window": [8, 200], "exponent": eq, "range": tol::GAMMA_GROWTH, "passed": ok_q,
                      "target": 3f64.log2()},
        }),
    })
}

fn check_substitution(cache: &SpectrumCache) -> Result<Outcome> {
    let system = gamma_substitution_system();
    let gamma = cache.group("gamma");
    let offset = find_offset(&system, 1, |n| action_graph(gamma, n))?;
    let mut steps = Vec::new();
    let mut all = offset.is_some();
    if let Some(off) = offset {
        for k in 0..=5 {
            let ok = rooted_labeled_isomorphic(&expand(&system, k)?, &action_graph(gamma, k + off))?;
            all &= ok;
            steps.push(json!({"steps": k, "level": k + off, "isomorphic": ok}));
        }
    }
    let radii: Vec<usize> = (1..=4)
        .map(|k| ball_agreement_radius(&system, k))
        .collect::<Result<_>>()?;
    Ok(Outcome {
        passed: all,
        metric: if all { 0.0 } else { 1.0 },
        threshold: 0.0,
        details: json!({"offset": offset, "steps": steps, "ball_agreement_radii": radii}),
    })
}

fn check_julia(config: &VerifyConfig) -> Result<Outcome> {
    let depth = config.julia_depth.max(1);
    let mut worst = 0.0f64;
    let mut outside_bound = 0usize;
    let mut per_lambda = Vec::new();
    for lambda in [GAMMA_LAMBDA, GAMMA_BAR_LAMBDA, 2.0] {
        let beta = fixed_point(lambda);
        let mut prev = julia_backward(lambda, 0)?;
        let mut lambda_worst = 0.0f64;
        for k in 1..=depth {
            let cur = julia_backward(lambda, k)?;
            for &p in &cur.points {
                if p.abs() > beta * (1.0 + f64::EPSILON) {
                    outside_bound += 1;
                }
                let q = p * p - lambda;
                // layers from depth 1 on are symmetric; the seed layer is
                // matched up to sign
                let d = crate::eigen::distance_to_sorted(&prev.points, q)
                    .min(crate::eigen::distance_to_sorted(&prev.points, -q));
                lambda_worst = lambda_worst.max(d / q.abs().max(1.0));
            }
            prev = cur;
        }
        worst = worst.max(lambda_worst);
        let mut resolution = Vec::new();
        if lambda != 2.0 {
            let mut last = julia_backward(lambda, 3)?;
            for k in 4..=16 {
                let cur = julia_backward(lambda, k)?;
                resolution.push(json!({
                    "depth": k,
                    "max_gap": cur.max_gap(),
                    "refinement_distance": cur.refinement_distance(&last)?,
                }));
                last = cur;
            }
        }
        let gaps: Vec<f64> = resolution.iter().map(|r| r["max_gap"].as_f64().unwrap()).collect();
        per_lambda.push(json!({
            "lambda": lambda,
            "beta": beta,
            "max_relative_error": lambda_worst,
            "points_at_depth": prev.points.len(),
            "gap_non_increasing": gaps.windows(2).all(|w| w[1] <= w[0]),
            "resolution": resolution,
        }));
    }
    Ok(Outcome {
        passed: worst <= tol::JULIA_INVARIANCE && outside_bound == 0,
        metric: worst,
        threshold: tol::JULIA_INVARIANCE,
        details: json!({"depth": depth, "points_beyond_beta": outside_bound, "lambdas": per_lambda}),
    })
}

/// One line per check: `PASS|FAIL  <id> <name>  metric=… threshold=…`.
pub fn summary_lines(report: &VerifyReport) -> Vec<String> {
    report
        .checks
        .iter()
        .map(|c| {
            let status = if c.passed { "PASS" } else { "FAIL" };
            match &c.error {
                Some(e) => format!("{status} {:>2} {:<28} error: {e}", c.id, c.name),
                None => format!(
                    "{status} {:>2} {:<28} metric={:.3e} threshold={:.3e} ({:.1}s)",
                    c.id, c.name, c.metric, c.threshold, c.seconds
                ),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_parsing() {
        assert_eq!(parse_only("nesting").unwrap(), vec![5]);
        assert_eq!(parse_only("1, product-formula,13").unwrap(), vec![1, 9, 13]);
        assert!(parse_only("14").is_err());
        assert!(parse_only("bogus").is_err());
    }

    #[test]
    fn small_subset_runs() {
        let config = VerifyConfig {
            only: Some(vec![5, 6, 7, 8]),
            max_level: 3,
            ..Default::default()
        };
        let report = run_verify(&config);
        assert_eq!(report.checks.len(), 4);
        assert!(report.passed, "{:#?}", report.checks);
    }

    #[test]
    fn perturbed_phi_fails_product_formula() {
        let config = VerifyConfig {
            only: Some(vec![9, 10]),
            max_level: 4,
            formula_samples: 10,
            phi_perturbation: 1e-3,
            ..Default::default()
        };
        let report = run_verify(&config);
        assert!(!report.passed);
        assert!(report.checks.iter().all(|c| !c.passed));
    }
}
