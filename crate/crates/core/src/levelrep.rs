//! Finite-level permutation representations `π_n` and the weighted
//! Hecke-type operators `Σ_s w(s) π_n(s)` built from them.
//!
//! Vertices of level `n` are enumerated most-significant-digit first:
//! the index of `x_1 x_2 … x_n` is `Σ (x_i - 1) d^{n-i}`, so the first
//! letter selects one of `d` consecutive blocks of size `d^{n-1}`.

use std::collections::BTreeMap;

use crate::automata::{decode_index, encode_digits, GroupWord, Letter, SelfSimilarGroup, Vertex};
use crate::error::{Error, Result};

/// Index of a level-`level` vertex in the fixed enumeration.
pub fn vertex_index(d: usize, level: usize, v: &Vertex) -> Result<usize> {
    if v.level() != level {
        return Err(Error::LevelMismatch {
            expected: level,
            found: v.level(),
        });
    }
    if let Some(&bad) = v.digits().iter().find(|&&x| x == 0 || x > d) {
        return Err(Error::Vertex {
            vertex: v.to_string(),
            message: format!("digit {bad} outside 1..={d}"),
        });
    }
    Ok(v.digits().iter().fold(0, |acc, &x| acc * d + (x - 1)))
}

/// Inverse of [`vertex_index`].
pub fn index_vertex(d: usize, level: usize, index: usize) -> Vertex {
    let mut digits = vec![0; level];
    decode_index(index, d, &mut digits);
    Vertex::new(digits.into_iter().map(|x| x + 1).collect())
}

/// A permutation of `0..len`, stored as the array of images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self {
            images: (0..len).collect(),
        }
    }

    /// Checks that `images` is a bijection.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Self { images })
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        Self {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }
}

/// Permutation induced by one generator on level `n`, computed vertex by
/// vertex through [`SelfSimilarGroup::act_vertex`]'s recursion.
pub fn level_permutation(group: &SelfSimilarGroup, letter: Letter, level: usize) -> Permutation {
    let d = group.degree();
    let total = d.pow(level as u32);
    let mut digits = vec![0; level];
    let images = (0..total)
        .map(|i| {
            decode_index(i, d, &mut digits);
            group.apply_letter(letter, &mut digits);
            encode_digits(&digits, d)
        })
        .collect();
    Permutation { images }
}

/// The representation `π_n`: one permutation per generator.
#[derive(Debug, Clone)]
pub struct LevelRep<'g> {
    group: &'g SelfSimilarGroup,
    level: usize,
    generators: Vec<Permutation>,
}

impl<'g> LevelRep<'g> {
    pub fn new(group: &'g SelfSimilarGroup, level: usize) -> Self {
        let generators = (0..group.generators().len())
            .map(|g| level_permutation(group, Letter::new(g, false), level))
            .collect();
        Self {
            group,
            level,
            generators,
        }
    }

    pub fn group(&self) -> &'g SelfSimilarGroup {
        self.group
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dimension(&self) -> usize {
        self.group.degree().pow(self.level as u32)
    }

    pub fn generator(&self, index: usize) -> &Permutation {
        &self.generators[index]
    }

    pub fn letter(&self, letter: Letter) -> Permutation {
        let p = &self.generators[letter.generator];
        if letter.inverse {
            p.inverse()
        } else {
            p.clone()
        }
    }

    /// `π_n(w)` for a word acting right to left.
    pub fn word(&self, word: &GroupWord) -> Permutation {
        word.letters()
            .iter()
            .fold(Permutation::identity(self.dimension()), |acc, &l| acc.compose(&self.letter(l)))
    }
}

/// The level-`n` permutation of generator `gi` assembled from blocks: the
/// root permutation moves block `i` (of size `d^{n-1}`) to block `σ(i)`,
/// carrying `π_{n-1}(s_i)` along.
pub fn block_assembly(group: &SelfSimilarGroup, lower: &LevelRep<'_>, gi: usize) -> Permutation {
    let g = &group.generators()[gi];
    let block = lower.dimension();
    let mut images = vec![0; block * group.degree()];
    for (i, section) in g.sections().iter().enumerate() {
        let inner = lower.word(section);
        let target = g.root_permutation()[i] * block;
        for j in 0..block {
            images[i * block + j] = target + inner.apply(j);
        }
    }
    Permutation { images }
}

/// Compares every generator's level-`n` permutation (computed vertex by
/// vertex) with its [`block_assembly`] from level `n - 1`.
pub fn verify_block_identities(group: &SelfSimilarGroup, level: usize) -> bool {
    if level == 0 {
        return true;
    }
    let upper = LevelRep::new(group, level);
    let lower = LevelRep::new(group, level - 1);
    (0..group.generators().len()).all(|gi| block_assembly(group, &lower, gi) == *upper.generator(gi))
}

/// Weights `X_s` keyed by the display symbol of each letter of `S`
/// (`"a"`, `"a^-1"`, …).
pub type Weights = BTreeMap<String, f64>;

/// `1/|S|` on every element of `S`.
pub fn uniform_weights(group: &SelfSimilarGroup) -> Weights {
    let w = 1.0 / group.symmetric_set().len() as f64;
    group
        .symmetric_set()
        .iter()
        .map(|&l| (group.letter_symbol(l), w))
        .collect()
}

/// A real matrix stored as aggregated `(row, col, value)` triplets in
/// row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator {
    dimension: usize,
    entries: Vec<(usize, usize, f64)>,
    symmetric: bool,
}

impl WeightedOperator {
    /// Sums duplicate positions. Contributions to one entry are added in
    /// increasing order, so `(u, v)` and `(v, u)` come out bit-identical
    /// whenever they receive the same multiset of weights.
    pub fn from_triplets(dimension: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, w) in triplets {
            match entries.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += w,
                _ => entries.push((r, c, w)),
            }
        }
        entries.retain(|e| e.2 != 0.0);
        let mut op = Self {
            dimension,
            entries,
            symmetric: false,
        };
        op.symmetric = op.check_symmetric().is_none();
        op
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// First `(row, col)` whose mirror entry differs, if any.
    pub fn check_symmetric(&self) -> Option<(usize, usize)> {
        let mut transposed: Vec<(usize, usize, f64)> =
            self.entries.iter().map(|&(r, c, w)| (c, r, w)).collect();
        transposed.sort_by_key(|t| (t.0, t.1));
        for (e, t) in self.entries.iter().zip(&transposed) {
            if e != t {
                return Some((e.0.min(t.0), e.1.min(t.1)));
            }
        }
        None
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(row, col)))
            .map(|i| self.entries[i].2)
            .unwrap_or(0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dimension];
        for &(r, _, w) in &self.entries {
            sums[r] += w;
        }
        sums
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dimension];
        for &(r, c, w) in &self.entries {
            y[r] += w * x[c];
        }
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dimension;
        let mut dense = vec![0.0; n * n];
        for &(r, c, w) in &self.entries {
            dense[r * n + c] = w;
        }
        dense
    }

    /// `A - shift·I`.
    pub fn shifted(&self, shift: f64) -> WeightedOperator {
        let mut triplets = self.entries.clone();
        triplets.extend((0..self.dimension).map(|i| (i, i, -shift)));
        WeightedOperator::from_triplets(self.dimension, triplets)
    }
}

/// `Σ_{s ∈ S} w(s) π_n(s)`, where `π_n(s)` sends basis vector `e_v` to
/// `e_{s·v}`.
pub fn hecke_operator(rep: &LevelRep<'_>, weights: &Weights) -> Result<WeightedOperator> {
    let group = rep.group();
    let n = rep.dimension();
    let mut triplets = Vec::with_capacity(n * group.symmetric_set().len());
    for &letter in group.symmetric_set() {
        let symbol = group.letter_symbol(letter);
        let &w = weights.get(&symbol).ok_or(Error::MissingWeight(symbol))?;
        let perm = rep.letter(letter);
        triplets.extend(perm.images().iter().enumerate().map(|(v, &sv)| (sv, v, w)));
    }
    Ok(WeightedOperator::from_triplets(n, triplets))
}

/// The Hecke operator with weights `1/|S|`.
pub fn uniform_hecke(group: &SelfSimilarGroup, level: usize) -> WeightedOperator {
    let rep = LevelRep::new(group, level);
    hecke_operator(&rep, &uniform_weights(group)).expect("uniform weights cover S")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{builtin_group, BUILTIN_GROUPS};

    fn dense(op: &WeightedOperator) -> Vec<Vec<f64>> {
        let n = op.dimension();
        op.to_dense().chunks(n).map(|r| r.to_vec()).collect()
    }

    #[test]
    fn vertex_index_convention() {
        assert_eq!(vertex_index(2, 2, &"11".parse().unwrap()).unwrap(), 0);
        assert_eq!(vertex_index(2, 2, &"22".parse().unwrap()).unwrap(), 3);
        assert_eq!(vertex_index(3, 2, &"13".parse().unwrap()).unwrap(), 2);
        assert_eq!(vertex_index(3, 4, &"3333".parse().unwrap()).unwrap(), 80);
        assert!(matches!(
            vertex_index(2, 3, &"11".parse().unwrap()),
            Err(Error::LevelMismatch { expected: 3, found: 2 })
        ));
        for i in 0..27 {
            assert_eq!(vertex_index(3, 3, &index_vertex(3, 3, i)).unwrap(), i);
        }
    }

    #[test]
    fn level_one_permutations() {
        let g = builtin_group("grigorchuk").unwrap();
        let a = level_permutation(&g, Letter::new(0, false), 1);
        assert_eq!(a.images(), &[1, 0]);
        let d = level_permutation(&g, Letter::new(3, false), 1);
        assert!(d.is_identity());
    }

    #[test]
    fn gamma_r_on_level_two() {
        let g = builtin_group("gamma").unwrap();
        let r = level_permutation(&g, Letter::new(1, false), 2);
        let idx = |s: &str| vertex_index(3, 2, &s.parse().unwrap()).unwrap();
        assert_eq!(r.apply(idx("13")), idx("11"));
        assert_eq!(r.apply(idx("11")), idx("12"));
        for s in ["21", "22", "23", "31", "32", "33"] {
            assert_eq!(r.apply(idx(s)), idx(s), "{s}");
        }
    }

    #[test]
    fn permutations_agree_with_act_vertex() {
        for name in BUILTIN_GROUPS {
            let g = builtin_group(name).unwrap();
            let d = g.degree();
            let level = if d == 2 { 6 } else { 4 };
            let rep = LevelRep::new(&g, level);
            for &l in g.symmetric_set() {
                let p = rep.letter(l);
                let w = GroupWord::from_letters(vec![l]);
                for i in 0..rep.dimension() {
                    let image = g.act_vertex(&w, &index_vertex(d, level, i)).unwrap();
                    assert_eq!(p.apply(i), vertex_index(d, level, &image).unwrap());
                }
            }
        }
    }

    #[test]
    fn block_identities_hold() {
        for name in BUILTIN_GROUPS {
            let g = builtin_group(name).unwrap();
            for n in 0..=6 {
                assert!(verify_block_identities(&g, n), "{name} level {n}");
            }
        }
    }

    #[test]
    fn block_assembly_detects_foreign_blocks() {
        // c = (a, d) misread as c = (1, d)
        let wrong = "alphabet = 2\ngen a = 2 1 | 1, 1\ngen b = id | a, c\ngen c = id | 1, d\ngen d = id | 1, b\ninvolutions = a, b, c, d";
        let bad = SelfSimilarGroup::from_definition(wrong).unwrap();
        let good = builtin_group("grigorchuk").unwrap();
        let upper = LevelRep::new(&good, 3);
        let lower_bad = LevelRep::new(&bad, 2);
        assert_ne!(block_assembly(&bad, &lower_bad, 2), *upper.generator(2));
        // a alone is the antidiagonal block form
        let lower = LevelRep::new(&good, 2);
        let a = block_assembly(&good, &lower, 0);
        assert_eq!(a.images(), &[4, 5, 6, 7, 0, 1, 2, 3]);
    }

    #[test]
    fn hecke_examples() {
        let g = builtin_group("grigorchuk").unwrap();
        assert_eq!(dense(&uniform_hecke(&g, 1)), vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
        for name in BUILTIN_GROUPS {
            let g = builtin_group(name).unwrap();
            assert_eq!(dense(&uniform_hecke(&g, 0)), vec![vec![1.0]]);
        }
        // (C + C^2 + 2I)/4 with C the 3-cycle
        let gamma = builtin_group("gamma").unwrap();
        let h = dense(&uniform_hecke(&gamma, 1));
        for (i, row) in h.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                assert_eq!(x, if i == j { 0.5 } else { 0.25 });
            }
        }
    }

    #[test]
    fn missing_weight_is_reported() {
        let g = builtin_group("gamma").unwrap();
        let rep = LevelRep::new(&g, 2);
        let mut w = uniform_weights(&g);
        w.remove("r^-1");
        assert!(matches!(hecke_operator(&rep, &w), Err(Error::MissingWeight(s)) if s == "r^-1"));
    }

    #[test]
    fn hecke_structure() {
        for name in BUILTIN_GROUPS {
            let g = builtin_group(name).unwrap();
            let max = if g.degree() == 2 { 8 } else { 5 };
            for n in 0..=max {
                let h = uniform_hecke(&g, n);
                assert!(h.is_symmetric(), "{name} {n}");
                for s in h.row_sums() {
                    assert_eq!(s, 1.0);
                }
                let ones = vec![1.0; h.dimension()];
                assert_eq!(h.apply(&ones), ones);
            }
        }
    }

    #[test]
    fn symmetric_weights_give_bit_exact_symmetry() {
        let g = builtin_group("gamma-bar").unwrap();
        let rep = LevelRep::new(&g, 4);
        let weights: Weights = [("a", 0.1), ("a^-1", 0.1), ("s", 1.0 / 3.0), ("s^-1", 1.0 / 3.0)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let h = hecke_operator(&rep, &weights).unwrap();
        assert!(h.is_symmetric());
        let expected = 2.0 * 0.1 + 2.0 / 3.0;
        for s in h.row_sums() {
            assert!((s - expected).abs() < 1e-15);
        }
        // skewing a weight breaks symmetry
        let mut skew = weights.clone();
        skew.insert("a".into(), 0.2);
        assert!(!hecke_operator(&rep, &skew).unwrap().is_symmetric());
    }

    #[test]
    fn permutation_algebra() {
        let p = Permutation::from_images(vec![2, 0, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert_eq!(p.compose(&p).images(), &[1, 2, 0]);
        assert!(Permutation::from_images(vec![0, 0, 1]).is_none());
    }
}
