//! Substitutional graphs: an axiom graph rewritten step by step by replacing
//! every embedded copy of a pattern with a larger replacement graph.
//!
//! Replacement vertex names are templates: `{x}` stands for the name of the
//! graph vertex that pattern vertex `x` is embedded at. For the built-in Γ
//! rule this reproduces the digit names of the level graphs exactly.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::schreier::dot::{graph_from_block, parse_blocks, DotBlock};
use crate::schreier::{rooted_labeled_isomorphic, GraphBuilder, LabeledGraph};

/// One rewriting rule `(X, Y, ι)`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub pattern: LabeledGraph,
    pub replacement: LabeledGraph,
    /// `inclusion[x]` is the replacement vertex that pattern vertex `x`
    /// becomes; edges outside the pattern stay attached there.
    pub inclusion: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SubstitutionSystem {
    axiom: LabeledGraph,
    rules: Vec<Rule>,
    degree: usize,
}

fn sub_err(message: impl Into<String>) -> Error {
    Error::Substitution(message.into())
}

/// Splits a name template into literal text and placeholder names.
fn template_parts(template: &str) -> Result<Vec<(bool, &str)>> {
    let mut parts = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            parts.push((false, &rest[..open]));
        }
        let close = rest[open..]
            .find('}')
            .ok_or_else(|| sub_err(format!("unclosed `{{` in `{template}`")))?;
        parts.push((true, &rest[open + 1..open + close]));
        rest = &rest[open + close + 1..];
    }
    if !rest.is_empty() {
        parts.push((false, rest));
    }
    Ok(parts)
}

impl SubstitutionSystem {
    /// Checks the structural requirements: a regular axiom, pairwise disjoint
    /// pattern label sets, degree-preserving injective inclusions, full degree
    /// away from the inclusion, and templates naming pattern vertices.
    pub fn new(axiom: LabeledGraph, rules: Vec<Rule>) -> Result<Self> {
        let degree = axiom
            .degree()
            .ok_or_else(|| sub_err("axiom is not a regular graph"))?;
        let mut seen_labels: HashSet<String> = HashSet::new();
        for (i, rule) in rules.iter().enumerate() {
            let labels: HashSet<String> = rule.pattern.labels().into_iter().map(String::from).collect();
            if let Some(l) = labels.iter().find(|l| seen_labels.contains(*l)) {
                return Err(sub_err(format!("label `{l}` appears in more than one pattern")));
            }
            seen_labels.extend(labels);
            if !rule.pattern.is_connected() {
                return Err(sub_err(format!("pattern {i} is not connected")));
            }
            let np = rule.pattern.vertex_count();
            if rule.inclusion.len() != np {
                return Err(sub_err(format!("inclusion {i} does not cover the pattern")));
            }
            let image: BTreeSet<usize> = rule.inclusion.iter().copied().collect();
            if image.len() != np || image.iter().any(|&y| y >= rule.replacement.vertex_count()) {
                return Err(sub_err(format!("inclusion {i} is not an injective vertex map")));
            }
            let dx = rule.pattern.out_degrees();
            let dy = rule.replacement.out_degrees();
            for (x, &y) in rule.inclusion.iter().enumerate() {
                if dx[x] != dy[y] {
                    return Err(sub_err(format!(
                        "rule {i}: `{}` has degree {} but its image has degree {}",
                        rule.pattern.name(x),
                        dx[x],
                        dy[y]
                    )));
                }
            }
            for y in 0..rule.replacement.vertex_count() {
                if !image.contains(&y) && dy[y] != degree {
                    return Err(sub_err(format!(
                        "rule {i}: replacement vertex `{}` has degree {} instead of {degree}",
                        rule.replacement.name(y),
                        dy[y]
                    )));
                }
            }
            for name in rule.replacement.names() {
                let parts = template_parts(name)?;
                if !parts.iter().any(|p| p.0) {
                    return Err(sub_err(format!("replacement vertex `{name}` has no `{{…}}` placeholder")));
                }
                for (_, key) in parts.iter().filter(|p| p.0) {
                    if rule.pattern.vertex_by_name(key).is_none() {
                        return Err(sub_err(format!("placeholder `{{{key}}}` is not a pattern vertex")));
                    }
                }
            }
        }
        Ok(Self { axiom, rules, degree })
    }

    pub fn axiom(&self) -> &LabeledGraph {
        &self.axiom
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Label-preserving injective maps of `pattern` into `graph`, one per image
/// (maps differing by a pattern automorphism are reported once). Each
/// embedding lists the graph vertex of every pattern vertex.
pub fn find_embeddings(graph: &LabeledGraph, pattern: &LabeledGraph) -> Result<Vec<Vec<usize>>> {
    const MAX_PATTERN: usize = 16;
    if pattern.vertex_count() > MAX_PATTERN {
        return Err(sub_err(format!("pattern exceeds {MAX_PATTERN} vertices")));
    }
    if !pattern.is_connected() {
        return Err(sub_err("pattern is not connected"));
    }
    // Pattern vertices in BFS order, each after 0 reached by a known edge.
    let np = pattern.vertex_count();
    let p_adj = pattern.adjacency();
    let mut order = vec![pattern.basepoint()];
    let mut via: Vec<Option<usize>> = vec![None; np];
    let mut placed = vec![false; np];
    placed[pattern.basepoint()] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &ei in &p_adj[u] {
            let t = pattern.edges()[ei].target;
            if !placed[t] {
                placed[t] = true;
                via[t] = Some(ei);
                order.push(t);
            }
        }
    }

    let mut need: HashMap<(usize, usize, &str), usize> = HashMap::new();
    for e in pattern.edges() {
        *need.entry((e.source, e.target, e.label.as_str())).or_default() += 1;
    }
    let mut have: HashMap<(usize, usize, &str), usize> = HashMap::new();
    for e in graph.edges() {
        *have.entry((e.source, e.target, e.label.as_str())).or_default() += 1;
    }
    let g_adj = graph.adjacency();

    let mut found = Vec::new();
    let mut images: HashSet<(Vec<usize>, Vec<(usize, usize, String)>)> = HashSet::new();
    let mut map = vec![usize::MAX; np];
    let mut used = vec![false; graph.vertex_count()];

    struct Ctx<'a> {
        graph: &'a LabeledGraph,
        pattern: &'a LabeledGraph,
        order: &'a [usize],
        via: &'a [Option<usize>],
        g_adj: &'a [Vec<usize>],
    }

    fn candidates(ctx: &Ctx<'_>, map: &[usize], x: usize) -> Vec<usize> {
        match ctx.via[x] {
            None => (0..ctx.graph.vertex_count()).collect(),
            Some(ei) => {
                let e = &ctx.pattern.edges()[ei];
                let mut c: Vec<usize> = ctx.g_adj[map[e.source]]
                    .iter()
                    .map(|&gi| &ctx.graph.edges()[gi])
                    .filter(|ge| ge.label == e.label)
                    .map(|ge| ge.target)
                    .collect();
                c.sort_unstable();
                c.dedup();
                c
            }
        }
    }

    fn search(
        ctx: &Ctx<'_>,
        depth: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == ctx.order.len() {
            out.push(map.clone());
            return;
        }
        let x = ctx.order[depth];
        for v in candidates(ctx, map, x) {
            if used[v] {
                continue;
            }
            map[x] = v;
            used[v] = true;
            search(ctx, depth + 1, map, used, out);
            used[v] = false;
            map[x] = usize::MAX;
        }
    }

    let ctx = Ctx {
        graph,
        pattern,
        order: &order,
        via: &via,
        g_adj: &g_adj,
    };
    let mut raw = Vec::new();
    search(&ctx, 0, &mut map, &mut used, &mut raw);

    for m in raw {
        let complete = need.iter().all(|(&(s, t, l), &count)| {
            have.get(&(m[s], m[t], l)).copied().unwrap_or(0) >= count
        });
        if !complete {
            continue;
        }
        let mut verts = m.clone();
        verts.sort_unstable();
        let mut edges: Vec<(usize, usize, String)> = pattern
            .edges()
            .iter()
            .map(|e| (m[e.source], m[e.target], e.label.clone()))
            .collect();
        edges.sort();
        if images.insert((verts, edges)) {
            found.push(m);
        }
    }
    Ok(found)
}

/// One rewriting step.
pub fn expand_once(system: &SubstitutionSystem, graph: &LabeledGraph) -> Result<LabeledGraph> {
    let mut owner = vec![None; graph.vertex_count()];
    let mut all = Vec::new();
    for (ri, rule) in system.rules.iter().enumerate() {
        for emb in find_embeddings(graph, &rule.pattern)? {
            for &v in &emb {
                if owner[v].is_some() {
                    return Err(Error::OverlappingEmbeddings(graph.name(v).to_string()));
                }
                owner[v] = Some(all.len());
            }
            all.push((ri, emb));
        }
    }

    // Instantiated replacement names per embedding.
    let mut instance_names: Vec<Vec<String>> = Vec::with_capacity(all.len());
    for (ri, emb) in &all {
        let rule = &system.rules[*ri];
        let names = rule
            .replacement
            .names()
            .iter()
            .map(|t| {
                let mut s = String::new();
                for (is_key, text) in template_parts(t)? {
                    if is_key {
                        let x = rule.pattern.vertex_by_name(text).expect("validated placeholder");
                        s.push_str(graph.name(emb[x]));
                    } else {
                        s.push_str(text);
                    }
                }
                Ok(s)
            })
            .collect::<Result<Vec<String>>>()?;
        instance_names.push(names);
    }

    let new_name = |v: usize| -> String {
        match owner[v] {
            None => graph.name(v).to_string(),
            Some(k) => {
                let (ri, emb) = &all[k];
                let x = emb.iter().position(|&w| w == v).expect("owned vertex");
                instance_names[k][system.rules[*ri].inclusion[x]].clone()
            }
        }
    };

    // Graph edges used by some embedding are replaced.
    let mut removed = vec![false; graph.edges().len()];
    let g_adj = graph.adjacency();
    for (ri, emb) in &all {
        for e in system.rules[*ri].pattern.edges() {
            let hit = g_adj[emb[e.source]].iter().copied().find(|&gi| {
                let ge = &graph.edges()[gi];
                !removed[gi] && ge.target == emb[e.target] && ge.label == e.label
            });
            if let Some(gi) = hit {
                removed[gi] = true;
            }
        }
    }

    let mut b = GraphBuilder::new();
    let mut names_seen: HashSet<String> = HashSet::new();
    for v in 0..graph.vertex_count() {
        if owner[v].is_none() {
            let name = new_name(v);
            names_seen.insert(name.clone());
            b.vertex(&name);
        }
    }
    for (k, (ri, _)) in all.iter().enumerate() {
        let rule = &system.rules[*ri];
        for name in &instance_names[k] {
            if !names_seen.insert(name.clone()) {
                return Err(sub_err(format!("vertex name `{name}` produced twice")));
            }
            b.vertex(name);
        }
        let edges = rule.replacement.edges();
        for (i, e) in edges.iter().enumerate() {
            if e.pair < i {
                continue;
            }
            b.edge_pair(
                &instance_names[k][e.source],
                &instance_names[k][e.target],
                &e.label,
                &edges[e.pair].label,
            );
        }
    }
    let edges = graph.edges();
    for (i, e) in edges.iter().enumerate() {
        if removed[i] || e.pair < i {
            continue;
        }
        if removed[e.pair] {
            return Err(sub_err("a pattern edge is paired with an edge outside the pattern"));
        }
        b.edge_pair(&new_name(e.source), &new_name(e.target), &e.label, &edges[e.pair].label);
    }
    b.set_basepoint(&new_name(graph.basepoint()));
    let next = b.build()?;
    if next.degree() != Some(system.degree) {
        return Err(sub_err(format!("expansion is not {}-regular", system.degree)));
    }
    Ok(next)
}

/// `steps` rewriting steps from the axiom.
pub fn expand(system: &SubstitutionSystem, steps: usize) -> Result<LabeledGraph> {
    let mut g = system.axiom.clone();
    for _ in 0..steps {
        g = expand_once(system, &g)?;
    }
    Ok(g)
}

/// The built-in rule for Γ: an `a`-triangle `ρ → σ → τ` becomes three
/// `a`-triangles, the first corners joined in an `r`-cycle and the middle
/// corners carrying `r`-loops; outside edges stay at the third corners.
pub fn gamma_substitution_system() -> SubstitutionSystem {
    let corners = ["rho", "sigma", "tau"];
    let mut axiom = GraphBuilder::new();
    for i in 0..3 {
        let (u, v) = ((i + 1).to_string(), ((i + 1) % 3 + 1).to_string());
        axiom.edge_pair(&u, &v, "a", "a^-1");
    }
    for v in ["1", "2", "3"] {
        axiom.edge_pair(v, v, "r", "r^-1");
    }
    axiom.set_basepoint("3");

    let mut pattern = GraphBuilder::new();
    for i in 0..3 {
        pattern.edge_pair(corners[i], corners[(i + 1) % 3], "a", "a^-1");
    }

    let mut replacement = GraphBuilder::new();
    for x in corners {
        for j in 1..=3 {
            let next = j % 3 + 1;
            replacement.edge_pair(&format!("{j}{{{x}}}"), &format!("{next}{{{x}}}"), "a", "a^-1");
        }
    }
    for i in 0..3 {
        replacement.edge_pair(
            &format!("1{{{}}}", corners[i]),
            &format!("1{{{}}}", corners[(i + 1) % 3]),
            "r",
            "r^-1",
        );
    }
    for x in corners {
        let v = format!("2{{{x}}}");
        replacement.edge_pair(&v, &v, "r", "r^-1");
    }
    let pattern = pattern.build().expect("pattern is well formed");
    let replacement = replacement.build().expect("replacement is well formed");
    let inclusion = corners
        .iter()
        .map(|x| replacement.vertex_by_name(&format!("3{{{x}}}")).expect("corner image"))
        .collect();
    SubstitutionSystem::new(
        axiom.build().expect("axiom is well formed"),
        vec![Rule {
            pattern,
            replacement,
            inclusion,
        }],
    )
    .expect("built-in system is valid")
}

/// The first `n` in `{k, k+1, k+2}` with `expand(k) ≅ level(n)`, where
/// `level(n)` supplies the level-`n` graph.
pub fn find_offset<F>(system: &SubstitutionSystem, k: usize, mut level: F) -> Result<Option<usize>>
where
    F: FnMut(usize) -> LabeledGraph,
{
    let g = expand(system, k)?;
    for n in k..=k + 2 {
        if rooted_labeled_isomorphic(&g, &level(n))? {
            return Ok(Some(n - k));
        }
    }
    Ok(None)
}

/// Largest radius `r` for which the balls of radius `r` around the
/// basepoints of `expand(k)` and `expand(k+1)` coincide, capped at the radius
/// where the smaller graph is exhausted.
pub fn ball_agreement_radius(system: &SubstitutionSystem, k: usize) -> Result<usize> {
    let small = expand(system, k)?;
    let large = expand_once(system, &small)?;
    let eccentricity = small.distances().into_iter().flatten().max().unwrap_or(0);
    let mut radius = 0;
    for r in 0..=eccentricity {
        if rooted_labeled_isomorphic(&small.ball(r), &large.ball(r))? {
            radius = r;
        } else {
            break;
        }
    }
    Ok(radius)
}

fn block_graph(block: &DotBlock) -> Result<LabeledGraph> {
    graph_from_block(block)
}

/// Parses a system from `digraph` blocks named `axiom`, `pattern<i>`,
/// `replacement<i>` and `inclusion<i>`; inclusion blocks list `x -> y`
/// pairs of pattern and replacement vertex names.
pub fn parse_system(text: &str) -> Result<SubstitutionSystem> {
    let blocks = parse_blocks(text)?;
    let mut axiom = None;
    let mut parts: std::collections::BTreeMap<usize, [Option<&DotBlock>; 3]> = Default::default();
    for block in &blocks {
        if block.name == "axiom" {
            axiom = Some(block_graph(block)?);
            continue;
        }
        let (slot, rest) = if let Some(r) = block.name.strip_prefix("pattern") {
            (0, r)
        } else if let Some(r) = block.name.strip_prefix("replacement") {
            (1, r)
        } else if let Some(r) = block.name.strip_prefix("inclusion") {
            (2, r)
        } else {
            return Err(Error::GraphFormat {
                line: block.line,
                message: format!("unexpected block `{}`", block.name),
            });
        };
        let index: usize = rest.parse().map_err(|_| Error::GraphFormat {
            line: block.line,
            message: format!("block `{}` needs a numeric suffix", block.name),
        })?;
        parts.entry(index).or_default()[slot] = Some(block);
    }
    let axiom = axiom.ok_or_else(|| sub_err("missing `axiom` block"))?;
    let mut rules = Vec::new();
    for (index, [p, r, i]) in parts {
        let (Some(p), Some(r), Some(i)) = (p, r, i) else {
            return Err(sub_err(format!("rule {index} needs pattern, replacement and inclusion blocks")));
        };
        let pattern = block_graph(p)?;
        let replacement = block_graph(r)?;
        let mut inclusion = vec![usize::MAX; pattern.vertex_count()];
        for e in &i.edges {
            let x = pattern.vertex_by_name(&e.source).ok_or_else(|| Error::GraphFormat {
                line: e.line,
                message: format!("`{}` is not a pattern vertex", e.source),
            })?;
            let y = replacement.vertex_by_name(&e.target).ok_or_else(|| Error::GraphFormat {
                line: e.line,
                message: format!("`{}` is not a replacement vertex", e.target),
            })?;
            inclusion[x] = y;
        }
        if inclusion.contains(&usize::MAX) {
            return Err(sub_err(format!("inclusion {index} does not cover every pattern vertex")));
        }
        rules.push(Rule {
            pattern,
            replacement,
            inclusion,
        });
    }
    SubstitutionSystem::new(axiom, rules)
}

/// Writes a system in the format read by [`parse_system`].
pub fn system_to_text(system: &SubstitutionSystem) -> String {
    use crate::schreier::dot::to_dot_string;
    let mut out = to_dot_string(&system.axiom, "axiom");
    for (i, rule) in system.rules.iter().enumerate() {
        out.push_str(&to_dot_string(&rule.pattern, &format!("pattern{i}")));
        out.push_str(&to_dot_string(&rule.replacement, &format!("replacement{i}")));
        let _ = writeln!(out, "digraph \"inclusion{i}\" {{");
        for (x, &y) in rule.inclusion.iter().enumerate() {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\";",
                rule.pattern.name(x),
                rule.replacement.name(y)
            );
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::builtin_group;
    use crate::schreier::action_graph;

    fn loop_pattern() -> LabeledGraph {
        let mut b = GraphBuilder::new();
        b.edge_pair("x", "x", "r", "r^-1");
        b.build().unwrap()
    }

    #[test]
    fn system_shape() {
        let s = gamma_substitution_system();
        assert_eq!(s.axiom().vertex_count(), 3);
        assert_eq!(s.rules()[0].replacement.vertex_count(), 9);
        assert_eq!(s.degree(), 4);
    }

    #[test]
    fn embedding_examples() {
        let s = gamma_substitution_system();
        assert_eq!(find_embeddings(s.axiom(), &loop_pattern()).unwrap().len(), 3);
        let mut b = GraphBuilder::new();
        b.edge_pair("x", "x", "z", "z");
        assert!(find_embeddings(s.axiom(), &b.build().unwrap()).unwrap().is_empty());
        let pattern = &s.rules()[0].pattern;
        let self_embeddings = find_embeddings(pattern, pattern).unwrap();
        assert_eq!(self_embeddings, vec![vec![0, 1, 2]]);
        assert_eq!(find_embeddings(s.axiom(), pattern).unwrap().len(), 1);
    }

    #[test]
    fn expansion_counts_and_names() {
        let s = gamma_substitution_system();
        assert!(rooted_labeled_isomorphic(&expand(&s, 0).unwrap(), s.axiom()).unwrap());
        for k in 0..=4 {
            let g = expand(&s, k).unwrap();
            assert_eq!(g.vertex_count(), 3usize.pow(k as u32 + 1));
            assert_eq!(g.degree(), Some(4));
            assert_eq!(g.name(g.basepoint()), "3".repeat(k + 1));
        }
    }

    #[test]
    fn matches_level_graphs() {
        let s = gamma_substitution_system();
        let gamma = builtin_group("gamma").unwrap();
        assert_eq!(find_offset(&s, 1, |n| action_graph(&gamma, n)).unwrap(), Some(1));
        for k in 0..=4 {
            let e = expand(&s, k).unwrap();
            let a = action_graph(&gamma, k + 1);
            assert!(rooted_labeled_isomorphic(&e, &a).unwrap(), "k={k}");
            // names coincide as well
            let mut en = e.names().to_vec();
            en.sort();
            assert_eq!(en, a.names());
        }
    }

    #[test]
    fn balls_stabilize() {
        let s = gamma_substitution_system();
        let radii: Vec<usize> = (1..=4).map(|k| ball_agreement_radius(&s, k).unwrap()).collect();
        assert!(radii.windows(2).all(|w| w[0] < w[1]), "{radii:?}");
    }

    #[test]
    fn overlapping_embeddings_are_reported() {
        // a path x - y - z with the pattern "one a-edge" embeds twice at y
        let mut g = GraphBuilder::new();
        g.edge_pair("x", "y", "a", "a");
        g.edge_pair("y", "z", "a", "a");
        g.edge_pair("x", "x", "b", "b");
        g.edge_pair("z", "z", "b", "b");
        let axiom = g.build().unwrap();
        let mut p = GraphBuilder::new();
        p.edge_pair("u", "v", "a", "a");
        let pattern = p.build().unwrap();
        let mut y = GraphBuilder::new();
        y.edge_pair("1{u}", "1{v}", "a", "a");
        let replacement = y.build().unwrap();
        let system = SubstitutionSystem::new(
            axiom,
            vec![Rule {
                pattern,
                replacement,
                inclusion: vec![0, 1],
            }],
        )
        .unwrap();
        assert!(matches!(expand(&system, 1), Err(Error::OverlappingEmbeddings(_))));
    }

    #[test]
    fn validation_errors() {
        let s = gamma_substitution_system();
        let rule = s.rules()[0].clone();
        let mut bad = rule.clone();
        bad.inclusion = vec![0, 0, 1];
        assert!(SubstitutionSystem::new(s.axiom().clone(), vec![bad]).is_err());
        // two rules sharing the label `a`
        assert!(SubstitutionSystem::new(s.axiom().clone(), vec![rule.clone(), rule]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = gamma_substitution_system();
        let text = system_to_text(&s);
        let back = parse_system(&text).unwrap();
        for k in 0..=3 {
            let a = expand(&s, k).unwrap();
            let b = expand(&back, k).unwrap();
            assert!(rooted_labeled_isomorphic(&a, &b).unwrap());
        }
        assert!(parse_system("digraph pattern0 { }").is_err());
    }
}
