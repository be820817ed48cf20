//! Python bindings: groups, level spectra, Schreier graphs, Julia sets,
//! substitution systems and the verification suite.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use fractal_spectra::automata::{builtin_group, ggs_group, SelfSimilarGroup, Vertex, BUILTIN_GROUPS};
use fractal_spectra::charpoly::{phi_product, q_value, spectral_correspondence, two_parameter_weights, PhiParams};
use fractal_spectra::cli::verify::{parse_only, run_verify, VerifyConfig};
use fractal_spectra::eigen::{eigenvalues, symmetric_eigenvalues, DEFAULT_CLUSTER_THRESHOLD};
use fractal_spectra::levelrep::{hecke_operator, uniform_hecke, LevelRep, Weights};
use fractal_spectra::schreier::dot::{parse_graph, to_dot_string};
use fractal_spectra::schreier::{action_graph, ball_growth, growth_exponent, rooted_labeled_isomorphic, LabeledGraph};
use fractal_spectra::spectra::{julia_backward, predicted_spectrum, set_distance};
use fractal_spectra::substitution::{expand, gamma_substitution_system, parse_system};
use fractal_spectra::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence | Error::NotSymmetric { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A self-similar group acting on the rooted d-ary tree.
#[pyclass(name = "Group", module = "fractal_spectra_py", frozen)]
struct PyGroup {
    inner: SelfSimilarGroup,
}

#[pymethods]
impl PyGroup {
    /// Built-in group by name.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Self { inner: builtin_group(name).map_err(err)? })
    }

    /// Group from the text of a definition file.
    #[staticmethod]
    fn from_definition(text: &str) -> PyResult<Self> {
        Ok(Self { inner: SelfSimilarGroup::from_definition(text).map_err(err)? })
    }

    /// GGS group on the d-ary tree with defining vector `epsilon`.
    #[staticmethod]
    fn ggs(d: usize, epsilon: Vec<i64>) -> PyResult<Self> {
        Ok(Self { inner: ggs_group(d, &epsilon).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    /// Symbols of the symmetric generating set, in operator order.
    #[getter]
    fn symmetric_set(&self) -> Vec<String> {
        self.inner.symmetric_set().iter().map(|&l| self.inner.letter_symbol(l)).collect()
    }

    /// Image of a vertex (digit string) under a word.
    fn act(&self, word: &str, vertex: &str) -> PyResult<String> {
        let w = self.inner.parse_word(word).map_err(err)?;
        let v: Vertex = vertex.parse().map_err(err)?;
        Ok(self.inner.act_vertex(&w, &v).map_err(err)?.to_string())
    }

    fn basepoint(&self, level: usize) -> String {
        self.inner.basepoint(level).to_string()
    }

    /// Dense row-major Markov (uniform Hecke) matrix at a level.
    fn markov_matrix(&self, level: usize) -> PyResult<Vec<Vec<f64>>> {
        check_dense(&self.inner, level)?;
        let op = uniform_hecke(&self.inner, level);
        let n = op.dimension();
        Ok(op.to_dense().chunks(n.max(1)).map(<[f64]>::to_vec).collect())
    }

    /// Ascending eigenvalues of the Hecke operator, uniform unless
    /// `weights` maps generator symbols to coefficients.
    #[pyo3(signature = (level, weights=None))]
    fn eigenvalues(&self, py: Python<'_>, level: usize, weights: Option<Weights>) -> PyResult<Vec<f64>> {
        check_dense(&self.inner, level)?;
        let group = &self.inner;
        py.detach(|| {
            let op = match weights {
                Some(w) => hecke_operator(&LevelRep::new(group, level), &w)?,
                None => uniform_hecke(group, level),
            };
            eigenvalues(&op)
        })
        .map_err(err)
    }

    /// Distinct eigenvalues with multiplicities.
    fn spectrum(&self, py: Python<'_>, level: usize) -> PyResult<Vec<(f64, usize)>> {
        check_dense(&self.inner, level)?;
        let group = &self.inner;
        py.detach(|| symmetric_eigenvalues(&uniform_hecke(group, level), DEFAULT_CLUSTER_THRESHOLD))
            .map(|s| s.entries().to_vec())
            .map_err(err)
    }

    /// `det(λI − α(A + A⁻¹) − β(X + X⁻¹))` at a level.
    fn q_value(&self, level: usize, alpha: f64, beta: f64, lam: f64) -> PyResult<f64> {
        check_dense(&self.inner, level)?;
        q_value(&self.inner, level, &two_parameter_weights(&self.inner, alpha, beta), lam).map_err(err)
    }

    /// `(alpha, eigenvalues)` columns of the pencil `α(A + A⁻¹) + (X + X⁻¹)`.
    fn correspondence(&self, py: Python<'_>, level: usize, alphas: Vec<f64>) -> PyResult<Vec<(f64, Vec<f64>)>> {
        check_dense(&self.inner, level)?;
        let group = &self.inner;
        py.detach(|| spectral_correspondence(group, level, &alphas))
            .map(|cols| cols.into_iter().map(|c| (c.alpha, c.lambdas)).collect())
            .map_err(err)
    }

    /// The level-n Schreier graph.
    fn schreier_graph(&self, level: usize) -> PyResult<PyGraph> {
        if self.inner.degree().checked_pow(level as u32).is_none_or(|n| n > 1 << 21) {
            return Err(PyValueError::new_err("level too large for an explicit graph"));
        }
        Ok(PyGraph { inner: action_graph(&self.inner, level) })
    }

    fn __repr__(&self) -> String {
        format!("Group('{}', degree={})", self.inner.name(), self.inner.degree())
    }
}

fn check_dense(group: &SelfSimilarGroup, level: usize) -> PyResult<()> {
    let max = fractal_spectra::eigen::MAX_DENSE_DIMENSION;
    match group.degree().checked_pow(level as u32) {
        Some(n) if n <= max => Ok(()),
        _ => Err(PyValueError::new_err(format!("level {level} exceeds the dense bound of {max}"))),
    }
}

/// A rooted graph with labeled, paired edges.
#[pyclass(name = "Graph", module = "fractal_spectra_py", frozen)]
struct PyGraph {
    inner: LabeledGraph,
}

#[pymethods]
impl PyGraph {
    /// Parse a single DOT graph block.
    #[staticmethod]
    fn from_dot(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_graph(text).map_err(err)? })
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    #[getter]
    fn basepoint(&self) -> String {
        self.inner.name(self.inner.basepoint()).to_string()
    }

    /// `(source, target, label)` for every directed edge.
    fn edges(&self) -> Vec<(String, String, String)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (self.inner.name(e.source).to_string(), self.inner.name(e.target).to_string(), e.label.clone()))
            .collect()
    }

    #[pyo3(signature = (name="graph"))]
    fn to_dot(&self, name: &str) -> String {
        to_dot_string(&self.inner, name)
    }

    /// Ball sizes around the basepoint for radii 0..=rmax.
    #[pyo3(signature = (rmax=None))]
    fn growth(&self, rmax: Option<usize>) -> Vec<usize> {
        ball_growth(&self.inner, rmax.unwrap_or(self.inner.vertex_count())).values
    }

    /// Fitted polynomial growth exponent over radii `lo..=hi`.
    fn growth_exponent(&self, lo: usize, hi: usize) -> PyResult<f64> {
        growth_exponent(&ball_growth(&self.inner, self.inner.vertex_count()), lo, hi).map_err(err)
    }

    /// Whether a label- and root-preserving isomorphism exists.
    fn isomorphic(&self, other: &PyGraph) -> PyResult<bool> {
        rooted_labeled_isomorphic(&self.inner, &other.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.inner.vertex_count(), self.inner.edges().len())
    }
}

/// Backward-iteration approximation of the Julia set of `z² − λ`.
#[pyfunction]
fn julia_set(lam: f64, depth: usize) -> PyResult<Vec<f64>> {
    if depth > 24 {
        return Err(PyValueError::new_err("depth must be at most 24"));
    }
    Ok(julia_backward(lam, depth).map_err(err)?.points)
}

/// Distance of each value to the limit spectrum of a built-in group.
#[pyfunction]
#[pyo3(signature = (group, values, depth=14))]
fn limit_distances(group: &str, values: Vec<f64>, depth: usize) -> PyResult<Vec<f64>> {
    let set = predicted_spectrum(group, depth).map_err(err)?;
    values.iter().map(|&x| set_distance(&set, x).map_err(err)).collect()
}

/// The product `Φ₀Φ₁⋯Φ_n` at `(α, β, λ)`.
#[pyfunction]
fn product_formula(alpha: f64, beta: f64, lam: f64, n: usize) -> f64 {
    phi_product(&PhiParams { alpha, beta, lambda: lam, n })
}

/// Expand a substitution system (the built-in 3-ary one when `system` is None).
#[pyfunction]
#[pyo3(signature = (steps, system=None))]
fn substitute(steps: usize, system: Option<&str>) -> PyResult<PyGraph> {
    if steps > 8 {
        return Err(PyValueError::new_err("steps must be at most 8"));
    }
    let system = match system {
        Some(text) => parse_system(text).map_err(err)?,
        None => gamma_substitution_system(),
    };
    Ok(PyGraph { inner: expand(&system, steps).map_err(err)? })
}

/// Run verification checks; returns the JSON report.
#[pyfunction]
#[pyo3(signature = (only=None, max_level=8))]
fn verify(py: Python<'_>, only: Option<&str>, max_level: usize) -> PyResult<String> {
    let only = only.map(parse_only).transpose().map_err(PyValueError::new_err)?;
    if !(1..=8).contains(&max_level) {
        return Err(PyValueError::new_err("max_level must be between 1 and 8"));
    }
    let config = VerifyConfig { only, max_level, ..Default::default() };
    let report = py.detach(|| run_verify(&config));
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn fractal_spectra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(julia_set, m)?)?;
    m.add_function(wrap_pyfunction!(limit_distances, m)?)?;
    m.add_function(wrap_pyfunction!(product_formula, m)?)?;
    m.add_function(wrap_pyfunction!(substitute, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("BUILTIN_GROUPS", BUILTIN_GROUPS.to_vec())?;
    Ok(())
}
