//! Labeled action (Schreier) graphs of a level of the tree, their random-walk
//! operators, ball growth and rooted isomorphism.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::automata::SelfSimilarGroup;
use crate::error::{Error, Result};
use crate::levelrep::{index_vertex, vertex_index, LevelRep, WeightedOperator};

pub mod dot;

/// A directed labeled edge. `pair` is the index of the reverse edge, which
/// carries the inverse label; a loop labeled by an involution is its own pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub label: String,
    pub pair: usize,
}

/// A graph with an orientation-reversing involution on its edges and a
/// marked basepoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledGraph {
    names: Vec<String>,
    edges: Vec<Edge>,
    basepoint: usize,
}

impl LabeledGraph {
    /// Validates endpoints, the basepoint and the involution.
    pub fn new(names: Vec<String>, edges: Vec<Edge>, basepoint: usize) -> Result<Self> {
        let bad = |message: String| Error::InvalidGraph(message);
        if basepoint >= names.len() {
            return Err(bad(format!("basepoint {basepoint} out of range")));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.source >= names.len() || e.target >= names.len() || e.pair >= edges.len() {
                return Err(bad(format!("edge {i} refers to a missing vertex or edge")));
            }
            let p = &edges[e.pair];
            if p.pair != i || p.source != e.target || p.target != e.source {
                return Err(bad(format!("edge {i} is not paired with its reverse")));
            }
        }
        Ok(Self {
            names,
            edges,
            basepoint,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    /// Labels appearing on edges, sorted.
    pub fn labels(&self) -> Vec<&str> {
        let mut labels: Vec<&str> = self.edges.iter().map(|e| e.label.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.names.len()];
        for e in &self.edges {
            deg[e.source] += 1;
        }
        deg
    }

    /// The common out-degree, if the graph is regular.
    pub fn degree(&self) -> Option<usize> {
        let deg = self.out_degrees();
        let first = *deg.first()?;
        deg.iter().all(|&d| d == first).then_some(first)
    }

    /// Outgoing edge indices per vertex, in edge order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.names.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.source].push(i);
        }
        adj
    }

    /// Label to target maps, failing if a label repeats at a vertex.
    pub fn label_maps(&self) -> Result<Vec<BTreeMap<&str, usize>>> {
        let mut maps: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); self.names.len()];
        for e in &self.edges {
            if maps[e.source].insert(e.label.as_str(), e.target).is_some() {
                return Err(Error::NonDeterministic {
                    vertex: self.names[e.source].clone(),
                    label: e.label.clone(),
                });
            }
        }
        Ok(maps)
    }

    /// Breadth-first distances from the basepoint (`None` if unreachable).
    pub fn distances(&self) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut dist = vec![None; self.names.len()];
        dist[self.basepoint] = Some(0);
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &ei in &adj[u] {
                let t = self.edges[ei].target;
                if dist[t].is_none() {
                    dist[t] = Some(du + 1);
                    queue.push_back(t);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances().iter().all(Option::is_some)
    }

    /// The induced subgraph on vertices within `radius` of the basepoint.
    pub fn ball(&self, radius: usize) -> LabeledGraph {
        let dist = self.distances();
        let keep: Vec<usize> = (0..self.names.len())
            .filter(|&v| dist[v].is_some_and(|d| d <= radius))
            .collect();
        let mut position = vec![usize::MAX; self.names.len()];
        for (i, &v) in keep.iter().enumerate() {
            position[v] = i;
        }
        let mut edge_position = vec![usize::MAX; self.edges.len()];
        let mut kept_edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if position[e.source] != usize::MAX && position[e.target] != usize::MAX {
                edge_position[i] = kept_edges.len();
                kept_edges.push(i);
            }
        }
        let edges = kept_edges
            .iter()
            .map(|&i| {
                let e = &self.edges[i];
                Edge {
                    source: position[e.source],
                    target: position[e.target],
                    label: e.label.clone(),
                    pair: edge_position[e.pair],
                }
            })
            .collect();
        LabeledGraph {
            names: keep.iter().map(|&v| self.names[v].clone()).collect(),
            edges,
            basepoint: position[self.basepoint],
        }
    }
}

/// Incremental construction of a [`LabeledGraph`] from named vertices and
/// edge pairs.
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    basepoint: Option<usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of the vertex, adding it if new.
    pub fn vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    pub fn set_basepoint(&mut self, name: &str) {
        let v = self.vertex(name);
        self.basepoint = Some(v);
    }

    /// Adds `u -label-> v` and its reverse `v -inverse-> u`. A loop whose
    /// label is its own inverse is a single self-paired edge.
    pub fn edge_pair(&mut self, u: &str, v: &str, label: &str, inverse: &str) {
        let (u, v) = (self.vertex(u), self.vertex(v));
        let i = self.edges.len();
        if u == v && label == inverse {
            self.edges.push(Edge {
                source: u,
                target: u,
                label: label.to_string(),
                pair: i,
            });
        } else {
            self.edges.push(Edge {
                source: u,
                target: v,
                label: label.to_string(),
                pair: i + 1,
            });
            self.edges.push(Edge {
                source: v,
                target: u,
                label: inverse.to_string(),
                pair: i,
            });
        }
    }

    /// Builds the graph; without an explicit basepoint the first vertex is
    /// used.
    pub fn build(self) -> Result<LabeledGraph> {
        if self.names.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        LabeledGraph::new(self.names, self.edges, self.basepoint.unwrap_or(0))
    }
}

/// The action graph on the orbit of the basepoint `dd…d` at `level`: one
/// edge `(v, s·v, s)` per vertex and element `s` of the generating set.
/// Vertices are ordered by their index in the level enumeration.
pub fn action_graph(group: &SelfSimilarGroup, level: usize) -> LabeledGraph {
    let rep = LevelRep::new(group, level);
    let d = group.degree();
    let set = group.symmetric_set();
    let perms: Vec<_> = set.iter().map(|&l| rep.letter(l)).collect();
    let inverse_slot: Vec<usize> = set
        .iter()
        .map(|&l| {
            let inv = group.inverse_letter(l);
            set.iter().position(|&m| m == inv).expect("generating set is symmetric")
        })
        .collect();
    let labels: Vec<String> = set.iter().map(|&l| group.letter_symbol(l)).collect();

    let base = vertex_index(d, level, &group.basepoint(level)).expect("basepoint is valid");
    let mut seen = vec![false; rep.dimension()];
    seen[base] = true;
    let mut orbit = vec![base];
    let mut head = 0;
    while head < orbit.len() {
        let u = orbit[head];
        head += 1;
        for p in &perms {
            let v = p.apply(u);
            if !seen[v] {
                seen[v] = true;
                orbit.push(v);
            }
        }
    }
    orbit.sort_unstable();
    let mut position = vec![usize::MAX; rep.dimension()];
    for (i, &v) in orbit.iter().enumerate() {
        position[v] = i;
    }
    let k = set.len();
    let mut edges = Vec::with_capacity(orbit.len() * k);
    for (i, &u) in orbit.iter().enumerate() {
        for (j, p) in perms.iter().enumerate() {
            let t = position[p.apply(u)];
            edges.push(Edge {
                source: i,
                target: t,
                label: labels[j].clone(),
                pair: t * k + inverse_slot[j],
            });
        }
    }
    LabeledGraph {
        names: orbit.iter().map(|&v| index_vertex(d, level, v).to_string()).collect(),
        edges,
        basepoint: position[base],
    }
}

/// Whether the group acts transitively on level `level` (checked by orbit
/// size).
pub fn is_level_transitive(group: &SelfSimilarGroup, level: usize) -> bool {
    action_graph(group, level).vertex_count() == group.degree().pow(level as u32)
}

/// Transition matrix of the simple random walk: `(u, v)` is the number of
/// edges from `u` to `v` divided by the out-degree of `u`.
pub fn markov_operator(graph: &LabeledGraph) -> WeightedOperator {
    let deg = graph.out_degrees();
    let triplets = graph
        .edges
        .iter()
        .map(|e| (e.source, e.target, 1.0 / deg[e.source] as f64))
        .collect();
    WeightedOperator::from_triplets(graph.vertex_count(), triplets)
}

/// Ball sizes `γ(0), …, γ(rmax)` around the basepoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSeries {
    pub values: Vec<usize>,
    pub vertex_count: usize,
}

pub fn ball_growth(graph: &LabeledGraph, rmax: usize) -> GrowthSeries {
    let mut counts = vec![0usize; rmax + 1];
    for d in graph.distances().into_iter().flatten() {
        if d <= rmax {
            counts[d] += 1;
        }
    }
    let mut total = 0;
    let values = counts
        .into_iter()
        .map(|c| {
            total += c;
            total
        })
        .collect();
    GrowthSeries {
        values,
        vertex_count: graph.vertex_count(),
    }
}

impl GrowthSeries {
    /// Largest radius whose ball holds fewer than half of all vertices.
    pub fn saturation_radius(&self) -> usize {
        self.values
            .iter()
            .rposition(|&g| 2 * g < self.vertex_count)
            .unwrap_or(0)
    }
}

/// Least-squares slope of `ln γ(r)` against `ln(r + 1)` over `lo..=hi`.
/// The shifted abscissa makes `γ(r) = (r + 1)^D` fit with slope exactly `D`.
pub fn growth_exponent(series: &GrowthSeries, lo: usize, hi: usize) -> Result<f64> {
    let window = |message: &str| Error::GrowthWindow {
        lo,
        hi,
        message: message.to_string(),
    };
    if lo == 0 || hi <= lo {
        return Err(window("need 1 <= lo < hi"));
    }
    if hi >= series.values.len() {
        return Err(window("upper end beyond the computed series"));
    }
    if 2 * series.values[hi] >= series.vertex_count {
        return Err(window("upper end is in the saturated regime"));
    }
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .map(|r| (((r + 1) as f64).ln(), (series.values[r] as f64).ln()))
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Whether the parallel breadth-first traversal from both basepoints,
/// matching edges by label, yields a total bijection. Graphs must be
/// deterministic (at most one out-edge per label at each vertex).
pub fn rooted_labeled_isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> Result<bool> {
    let ma = a.label_maps()?;
    let mb = b.label_maps()?;
    if a.vertex_count() != b.vertex_count() || a.edges.len() != b.edges.len() {
        return Ok(false);
    }
    let n = a.vertex_count();
    let mut ab = vec![usize::MAX; n];
    let mut ba = vec![usize::MAX; n];
    ab[a.basepoint] = b.basepoint;
    ba[b.basepoint] = a.basepoint;
    let mut queue = VecDeque::from([a.basepoint]);
    let mut mapped = 1;
    while let Some(u) = queue.pop_front() {
        let v = ab[u];
        if ma[u].len() != mb[v].len() {
            return Ok(false);
        }
        for ((la, &ta), (lb, &tb)) in ma[u].iter().zip(&mb[v]) {
            if la != lb {
                return Ok(false);
            }
            match (ab[ta], ba[tb]) {
                (x, y) if x == usize::MAX && y == usize::MAX => {
                    ab[ta] = tb;
                    ba[tb] = ta;
                    mapped += 1;
                    queue.push_back(ta);
                }
                (x, _) if x == tb => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(mapped == n)
}
