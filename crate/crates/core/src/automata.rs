//! Self-similar groups given by wreath recursions, and their action on the
//! vertices of the rooted `d`-ary tree.
//!
//! A generator `g` is written `g = σ | s_1, …, s_d`: it permutes the first
//! letter of a vertex by the root permutation `σ` and acts on the rest of the
//! vertex by the section attached to the *original* first letter:
//!
//! ```text
//! g(x w) = σ(x) s_x(w)
//! ```
//!
//! Digits are `1..=d` at the API boundary. The cyclic generator `a` of the
//! built-in groups maps `i` to `i + 1` (wrapping `d` to `1`), and words act
//! right to left: `s_1 s_2 … s_k` applied to `v` is `s_1(s_2(…s_k(v)))`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const GRIGORCHUK: &str = include_str!("../data/grigorchuk.group");
const GRIGORCHUK_TILDE: &str = include_str!("../data/grigorchuk-tilde.group");
const GAMMA: &str = include_str!("../data/gamma.group");
const GAMMA_BAR: &str = include_str!("../data/gamma-bar.group");
const GAMMA_BARBAR: &str = include_str!("../data/gamma-barbar.group");

/// Names accepted by [`builtin_group`].
pub const BUILTIN_GROUPS: [&str; 5] = [
    "grigorchuk",
    "grigorchuk-tilde",
    "gamma",
    "gamma-bar",
    "gamma-barbar",
];

/// Involutions are checked on every level up to this one (`d^n` vertices
/// are enumerated, so the level is capped further for large alphabets).
const INVOLUTION_CHECK_LEVEL: usize = 8;
const INVOLUTION_CHECK_VERTICES: usize = 1 << 14;

/// A generator or its formal inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Self { generator, inverse }
    }

    pub fn inverted(self) -> Self {
        Self {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

/// A word over the generators and their inverses.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    letters: Vec<Letter>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

/// A vertex of the rooted tree, as a sequence of digits in `1..=d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    digits: Vec<usize>,
}

impl Vertex {
    pub fn new(digits: Vec<usize>) -> Self {
        Self { digits }
    }

    pub fn root() -> Self {
        Self { digits: Vec::new() }
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    pub fn level(&self) -> usize {
        self.digits.len()
    }

    pub fn truncate(&self, level: usize) -> Vertex {
        Vertex::new(self.digits[..level.min(self.digits.len())].to_vec())
    }
}

impl FromStr for Vertex {
    type Err = Error;

    /// Parses `"1213"`, or `"1.12.3"` when digits exceed 9.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |message: &str| Error::Vertex {
            vertex: s.to_string(),
            message: message.to_string(),
        };
        let s = s.trim();
        if s.is_empty() {
            return Ok(Vertex::root());
        }
        let digits = if s.contains('.') {
            s.split('.')
                .map(|t| t.parse::<usize>().map_err(|_| bad("not a number")))
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| bad("not a digit")))
                .collect::<Result<Vec<_>>>()?
        };
        if digits.contains(&0) {
            return Err(bad("digits start at 1"));
        }
        Ok(Vertex::new(digits))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.digits.iter().all(|&d| d <= 9) {
            for d in &self.digits {
                write!(f, "{d}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    symbol: String,
    /// Zero-based images of the root permutation.
    root: Vec<usize>,
    root_inverse: Vec<usize>,
    sections: Vec<GroupWord>,
    involutive: bool,
}

impl Generator {
    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    /// Root permutation as zero-based images.
    pub fn root_permutation(&self) -> &[usize] {
        &self.root
    }

    pub fn sections(&self) -> &[GroupWord] {
        &self.sections
    }

    pub fn is_involutive(&self) -> bool {
        self.involutive
    }
}

/// A group of tree automorphisms generated by finitely many wreath
/// recursions, together with a symmetric generating set `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelfSimilarGroup {
    name: String,
    degree: usize,
    generators: Vec<Generator>,
    symmetric_set: Vec<Letter>,
}

/// Look up one of the five groups shipped with the crate.
pub fn builtin_group(name: &str) -> Result<SelfSimilarGroup> {
    let text = match name {
        "grigorchuk" => GRIGORCHUK,
        "grigorchuk-tilde" => GRIGORCHUK_TILDE,
        "gamma" => GAMMA,
        "gamma-bar" => GAMMA_BAR,
        "gamma-barbar" => GAMMA_BARBAR,
        other => return Err(Error::UnknownGroup(other.to_string())),
    };
    SelfSimilarGroup::from_definition(text)
}

fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|k| k * k <= d).all(|k| !d.is_multiple_of(k))
}

/// The GGS group `⟨a, t⟩` on the `d`-ary tree, `d` prime, where `a`
/// rotates the top branches and `t = (a^{ε_1}, …, a^{ε_{d-1}}, t)`.
pub fn ggs_group(d: usize, epsilon: &[i64]) -> Result<SelfSimilarGroup> {
    if !is_prime(d) {
        return Err(Error::InvalidGroup(format!("GGS alphabet size {d} is not prime")));
    }
    if epsilon.len() != d - 1 {
        return Err(Error::InvalidGroup(format!(
            "GGS vector needs {} entries, got {}",
            d - 1,
            epsilon.len()
        )));
    }
    let residues: Vec<usize> = epsilon
        .iter()
        .map(|e| e.rem_euclid(d as i64) as usize)
        .collect();
    let a = Letter::new(0, false);
    let t = Letter::new(1, false);
    let rotation: Vec<usize> = (0..d).map(|i| (i + 1) % d).collect();
    let mut sections: Vec<GroupWord> = residues
        .iter()
        .map(|&e| GroupWord::from_letters(vec![a; e]))
        .collect();
    sections.push(GroupWord::from_letters(vec![t]));
    let involutive = d == 2;
    let generators = vec![
        Generator::new("a", rotation, vec![GroupWord::identity(); d], involutive)?,
        Generator::new("t", (0..d).collect(), sections, involutive)?,
    ];
    let symmetric_set = default_symmetric_set(&generators);
    let eps: Vec<String> = residues.iter().map(|e| e.to_string()).collect();
    SelfSimilarGroup::new(format!("ggs-{d}-{}", eps.join(",")), d, generators, symmetric_set)
}

fn default_symmetric_set(generators: &[Generator]) -> Vec<Letter> {
    let mut set = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        set.push(Letter::new(i, false));
        if !g.involutive {
            set.push(Letter::new(i, true));
        }
    }
    set
}

impl Generator {
    fn new(symbol: &str, root: Vec<usize>, sections: Vec<GroupWord>, involutive: bool) -> Result<Self> {
        let d = root.len();
        let mut root_inverse = vec![usize::MAX; d];
        for (i, &j) in root.iter().enumerate() {
            if j >= d || root_inverse[j] != usize::MAX {
                return Err(Error::InvalidGroup(format!(
                    "root permutation of `{symbol}` is not a bijection"
                )));
            }
            root_inverse[j] = i;
        }
        if sections.len() != d {
            return Err(Error::InvalidGroup(format!(
                "generator `{symbol}` has {} sections, expected {d}",
                sections.len()
            )));
        }
        Ok(Self {
            symbol: symbol.to_string(),
            root,
            root_inverse,
            sections,
            involutive,
        })
    }
}

impl SelfSimilarGroup {
    pub fn new(
        name: String,
        degree: usize,
        generators: Vec<Generator>,
        symmetric_set: Vec<Letter>,
    ) -> Result<Self> {
        if degree < 2 {
            return Err(Error::InvalidGroup("alphabet size must be at least 2".into()));
        }
        for g in &generators {
            if g.root.len() != degree {
                return Err(Error::InvalidGroup(format!(
                    "generator `{}` acts on {} letters, alphabet has {degree}",
                    g.symbol,
                    g.root.len()
                )));
            }
            for w in &g.sections {
                if w.letters.iter().any(|l| l.generator >= generators.len()) {
                    return Err(Error::InvalidGroup(format!(
                        "a section of `{}` references an undeclared generator",
                        g.symbol
                    )));
                }
            }
        }
        let mut symmetric_set: Vec<Letter> = symmetric_set
            .into_iter()
            .map(|l| normalize(&generators, l))
            .collect();
        symmetric_set.dedup();
        if symmetric_set.is_empty() {
            return Err(Error::InvalidGroup("generating set is empty".into()));
        }
        for l in &symmetric_set {
            if l.generator >= generators.len() {
                return Err(Error::InvalidGroup("generating set references an undeclared generator".into()));
            }
            let inv = normalize(&generators, l.inverted());
            if !symmetric_set.contains(&inv) {
                return Err(Error::InvalidGroup(format!(
                    "generating set is not closed under inversion (missing `{}`)",
                    letter_symbol(&generators, inv)
                )));
            }
        }
        let group = Self {
            name,
            degree,
            generators,
            symmetric_set,
        };
        group.check_involutions()?;
        Ok(group)
    }

    /// Parses the line-oriented group definition format:
    ///
    /// ```text
    /// name = gamma
    /// alphabet = 3
    /// gen a = 2 3 1 | 1, 1, 1
    /// gen r = id | a, 1, r
    /// involutions = a          # optional
    /// symmetric = a, a^-1, r, r^-1   # optional
    /// ```
    pub fn from_definition(text: &str) -> Result<Self> {
        let mut name = String::from("custom");
        let mut degree: Option<usize> = None;
        // (line, symbol, perm text, sections text)
        let mut raw_gens: Vec<(usize, String, String, String)> = Vec::new();
        let mut involutions: Option<(usize, String)> = None;
        let mut symmetric: Option<(usize, String)> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Definition { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = key.trim();
            let value = value.trim();
            if let Some(symbol) = key.strip_prefix("gen ").map(str::trim) {
                if !valid_symbol(symbol) {
                    return Err(err(format!("invalid generator name `{symbol}`")));
                }
                if raw_gens.iter().any(|g| g.1 == symbol) {
                    return Err(err(format!("generator `{symbol}` declared twice")));
                }
                let (perm, sections) = value
                    .split_once('|')
                    .ok_or_else(|| err("expected `PERM | W1, ..., Wd`".into()))?;
                raw_gens.push((line_no, symbol.to_string(), perm.trim().into(), sections.trim().into()));
                continue;
            }
            match key {
                "name" => name = value.to_string(),
                "alphabet" => {
                    let d: usize = value
                        .parse()
                        .map_err(|_| err(format!("alphabet size `{value}` is not an integer")))?;
                    if d < 2 {
                        return Err(err("alphabet size must be at least 2".into()));
                    }
                    degree = Some(d);
                }
                "involutions" => involutions = Some((line_no, value.to_string())),
                "symmetric" => symmetric = Some((line_no, value.to_string())),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }

        let degree = degree.ok_or(Error::Definition {
            line: 0,
            message: "missing `alphabet = d`".into(),
        })?;
        if raw_gens.is_empty() {
            return Err(Error::Definition {
                line: 0,
                message: "no generators declared".into(),
            });
        }
        let symbols: Vec<String> = raw_gens.iter().map(|g| g.1.clone()).collect();
        let index: HashMap<&str, usize> = symbols.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

        let involutive: BTreeSet<usize> = match &involutions {
            Some((line, list)) => split_list(list)
                .map(|s| {
                    index.get(s).copied().ok_or(Error::Definition {
                        line: *line,
                        message: format!("unknown generator `{s}`"),
                    })
                })
                .collect::<Result<_>>()?,
            None => BTreeSet::new(),
        };

        let mut generators = Vec::with_capacity(raw_gens.len());
        for (i, (line, symbol, perm, sections)) in raw_gens.iter().enumerate() {
            let err = |message: String| Error::Definition { line: *line, message };
            let root = parse_permutation(perm, degree).map_err(err)?;
            let words: Vec<GroupWord> = sections
                .split(',')
                .map(|w| parse_word_with(&index, w))
                .collect::<Result<_>>()
                .map_err(|e| err(e.to_string()))?;
            if words.len() != degree {
                return Err(err(format!("expected {degree} sections, found {}", words.len())));
            }
            let g = Generator::new(symbol, root, words, involutive.contains(&i)).map_err(|e| err(e.to_string()))?;
            generators.push(g);
        }

        let symmetric_set = match &symmetric {
            Some((line, list)) => split_list(list)
                .map(|token| {
                    let w = parse_word_with(&index, token)?;
                    match w.letters() {
                        [l] => Ok(*l),
                        _ => Err(Error::Definition {
                            line: *line,
                            message: format!("`{token}` is not a single generator"),
                        }),
                    }
                })
                .collect::<Result<Vec<_>>>()?,
            None => default_symmetric_set(&generators),
        };
        Self::new(name, degree, generators, symmetric_set)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Alphabet size `d`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_index(&self, symbol: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.symbol == symbol)
    }

    /// The symmetric generating set `S`, in declaration order.
    pub fn symmetric_set(&self) -> &[Letter] {
        &self.symmetric_set
    }

    /// Display form of a letter: `a`, or `a^-1` for a non-involutive inverse.
    pub fn letter_symbol(&self, letter: Letter) -> String {
        letter_symbol(&self.generators, normalize(&self.generators, letter))
    }

    /// `s^-1` for `s` in `S`, with involutions mapped to themselves.
    pub fn inverse_letter(&self, letter: Letter) -> Letter {
        normalize(&self.generators, letter.inverted())
    }

    pub fn parse_word(&self, text: &str) -> Result<GroupWord> {
        let index: HashMap<&str, usize> = self
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| (g.symbol.as_str(), i))
            .collect();
        let w = parse_word_with(&index, text)?;
        Ok(GroupWord::from_letters(
            w.letters.into_iter().map(|l| normalize(&self.generators, l)).collect(),
        ))
    }

    pub fn format_word(&self, word: &GroupWord) -> String {
        if word.is_identity() {
            return "1".into();
        }
        word.letters
            .iter()
            .map(|&l| self.letter_symbol(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// The basepoint `dd…d` of level `n`.
    pub fn basepoint(&self, level: usize) -> Vertex {
        Vertex::new(vec![self.degree; level])
    }

    /// Image of `v` under the word `w` (right-to-left action).
    pub fn act_vertex(&self, word: &GroupWord, v: &Vertex) -> Result<Vertex> {
        if let Some(l) = word.letters.iter().find(|l| l.generator >= self.generators.len()) {
            return Err(Error::Word {
                word: format!("{word:?}"),
                message: format!("generator index {} is not declared", l.generator),
            });
        }
        let mut digits = Vec::with_capacity(v.level());
        for &d in v.digits() {
            if d == 0 || d > self.degree {
                return Err(Error::Vertex {
                    vertex: v.to_string(),
                    message: format!("digit {d} outside 1..={}", self.degree),
                });
            }
            digits.push(d - 1);
        }
        self.apply_word(word.letters(), &mut digits);
        Ok(Vertex::new(digits.into_iter().map(|d| d + 1).collect()))
    }

    /// Acts in place on zero-based digits. Letters must be valid.
    pub(crate) fn apply_word(&self, word: &[Letter], digits: &mut [usize]) {
        for &l in word.iter().rev() {
            self.apply_letter(l, digits);
        }
    }

    fn apply_word_inverse(&self, word: &[Letter], digits: &mut [usize]) {
        for &l in word {
            self.apply_letter(l.inverted(), digits);
        }
    }

    pub(crate) fn apply_letter(&self, letter: Letter, digits: &mut [usize]) {
        let Some((first, rest)) = digits.split_first_mut() else {
            return;
        };
        let g = &self.generators[letter.generator];
        if letter.inverse {
            let x = g.root_inverse[*first];
            *first = x;
            self.apply_word_inverse(g.sections[x].letters(), rest);
        } else {
            let x = *first;
            *first = g.root[x];
            self.apply_word(g.sections[x].letters(), rest);
        }
    }

    fn check_involutions(&self) -> Result<()> {
        let mut level = 0;
        while level < INVOLUTION_CHECK_LEVEL && self.degree.pow(level as u32 + 1) <= INVOLUTION_CHECK_VERTICES {
            level += 1;
        }
        let total = self.degree.pow(level as u32);
        let mut digits = vec![0usize; level];
        for (i, g) in self.generators.iter().enumerate() {
            if !g.involutive {
                continue;
            }
            let l = Letter::new(i, false);
            for idx in 0..total {
                decode_index(idx, self.degree, &mut digits);
                let before = digits.clone();
                self.apply_letter(l, &mut digits);
                self.apply_letter(l, &mut digits);
                if digits != before {
                    return Err(Error::InvalidGroup(format!(
                        "generator `{}` is declared involutive but g^2 moves a vertex of level {level}",
                        g.symbol
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Writes the most-significant-first base-`d` expansion of `index` into
/// `digits` (zero-based).
pub(crate) fn decode_index(mut index: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
}

pub(crate) fn encode_digits(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

fn normalize(generators: &[Generator], l: Letter) -> Letter {
    match generators.get(l.generator) {
        Some(g) if g.involutive => Letter::new(l.generator, false),
        _ => l,
    }
}

fn letter_symbol(generators: &[Generator], l: Letter) -> String {
    let sym = generators
        .get(l.generator)
        .map(|g| g.symbol.as_str())
        .unwrap_or("?");
    if l.inverse {
        format!("{sym}^-1")
    } else {
        sym.to_string()
    }
}

fn valid_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '~' || c == '\'')
}

fn split_list(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_permutation(text: &str, d: usize) -> std::result::Result<Vec<usize>, String> {
    if text == "id" {
        return Ok((0..d).collect());
    }
    let images: Vec<usize> = text
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| format!("`{t}` is not a letter index")))
        .collect::<std::result::Result<_, _>>()?;
    if images.len() != d {
        return Err(format!("permutation has {} entries, expected {d}", images.len()));
    }
    let mut seen = vec![false; d];
    for &i in &images {
        if i == 0 || i > d || seen[i - 1] {
            return Err(format!("`{text}` is not a permutation of 1..={d}"));
        }
        seen[i - 1] = true;
    }
    Ok(images.into_iter().map(|i| i - 1).collect())
}

/// Tokens are separated by whitespace or `*`; each is `1`, `NAME` or
/// `NAME^k` with a nonzero integer `k`.
fn parse_word_with(index: &HashMap<&str, usize>, text: &str) -> Result<GroupWord> {
    let bad = |message: String| Error::Word {
        word: text.trim().to_string(),
        message,
    };
    let mut letters = Vec::new();
    for token in text.split(|c: char| c.is_whitespace() || c == '*').filter(|t| !t.is_empty()) {
        if token == "1" {
            continue;
        }
        let (sym, exp) = match token.split_once('^') {
            Some((s, e)) => (
                s,
                e.parse::<i64>()
                    .map_err(|_| bad(format!("bad exponent in `{token}`")))?,
            ),
            None => (token, 1),
        };
        let &g = index
            .get(sym)
            .ok_or_else(|| bad(format!("unknown generator `{sym}`")))?;
        if exp == 0 {
            return Err(bad(format!("zero exponent in `{token}`")));
        }
        let letter = Letter::new(g, exp < 0);
        letters.extend(std::iter::repeat_n(letter, exp.unsigned_abs() as usize));
    }
    Ok(GroupWord::from_letters(letters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn v(s: &str) -> Vertex {
        s.parse().unwrap()
    }

    fn act(g: &SelfSimilarGroup, word: &str, vertex: &str) -> String {
        let w = g.parse_word(word).unwrap();
        g.act_vertex(&w, &v(vertex)).unwrap().to_string()
    }

    fn all_vertices(d: usize, n: usize) -> Vec<Vertex> {
        let mut digits = vec![0; n];
        (0..d.pow(n as u32))
            .map(|i| {
                decode_index(i, d, &mut digits);
                Vertex::new(digits.iter().map(|x| x + 1).collect())
            })
            .collect()
    }

    #[test]
    fn grigorchuk_recursions() {
        let g = builtin_group("grigorchuk").unwrap();
        assert_eq!(g.degree(), 2);
        assert_eq!(g.symmetric_set().len(), 4);
        assert_eq!(act(&g, "a", "12"), "22");
        assert_eq!(act(&g, "b", "21"), "21");
        assert_eq!(act(&g, "b", "12"), "11");
        // b = (a, c), c = (a, d), d = (1, b): on 22x the three sit one level down
        assert_eq!(act(&g, "b", "221"), "221");
        assert_eq!(act(&g, "d", "2212"), "2211");
        assert_eq!(act(&g, "c", "211"), "211");
        assert_eq!(act(&g, "d", "12"), "12");
        for s in ["a", "b", "c", "d"] {
            assert!(g.generators()[g.generator_index(s).unwrap()].is_involutive());
        }
    }

    #[test]
    fn grigorchuk_tilde_recursions() {
        let g = builtin_group("grigorchuk-tilde").unwrap();
        assert_eq!(g.degree(), 2);
        // c~ = (1, d~) fixes everything beginning with 1
        assert_eq!(act(&g, "c~", "12"), "12");
        assert_eq!(act(&g, "b~", "12"), "11");
        assert_eq!(act(&g, "d~", "2112"), "2122");
    }

    #[test]
    fn gamma_recursions() {
        let g = builtin_group("gamma").unwrap();
        assert_eq!(g.degree(), 3);
        assert_eq!(act(&g, "a", "1"), "2");
        assert_eq!(act(&g, "a", "3"), "1");
        assert_eq!(act(&g, "r", "13"), "11");
        assert_eq!(act(&g, "r", "23"), "23");
        assert_eq!(act(&g, "r", "313"), "311");
        assert_eq!(act(&g, "r^-1", "11"), "13");
        assert_eq!(g.symmetric_set().len(), 4);
        let symbols: Vec<String> = g.symmetric_set().iter().map(|&l| g.letter_symbol(l)).collect();
        assert_eq!(symbols, ["a", "a^-1", "r", "r^-1"]);
    }

    #[test]
    fn words_act_right_to_left() {
        let g = builtin_group("gamma").unwrap();
        // r a on "33": a first gives 13, then r gives 11
        assert_eq!(act(&g, "r a", "33"), "11");
        assert_eq!(act(&g, "a r", "33"), "13");
        assert_eq!(act(&g, "", "123"), "123");
        assert_eq!(act(&g, "1", "123"), "123");
        assert_eq!(act(&g, "a^3", "231"), "231");
    }

    #[test]
    fn ggs_matches_builtins() {
        for (eps, name) in [([1, 0], "gamma"), ([1, 1], "gamma-bar"), ([1, -1], "gamma-barbar")] {
            let ggs = ggs_group(3, &eps).unwrap();
            let builtin = builtin_group(name).unwrap();
            for n in 0..=5 {
                for vert in all_vertices(3, n) {
                    for (l1, l2) in ggs.symmetric_set().iter().zip(builtin.symmetric_set()) {
                        let w1 = GroupWord::from_letters(vec![*l1]);
                        let w2 = GroupWord::from_letters(vec![*l2]);
                        assert_eq!(ggs.act_vertex(&w1, &vert).unwrap(), builtin.act_vertex(&w2, &vert).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn ggs_errors_and_degenerate_case() {
        assert!(ggs_group(4, &[1, 0, 0]).is_err());
        assert!(ggs_group(3, &[1]).is_err());
        let g = ggs_group(3, &[0, 0]).unwrap();
        let t = g.parse_word("t").unwrap();
        for n in 0..=6 {
            for vert in all_vertices(3, n) {
                assert_eq!(g.act_vertex(&t, &vert).unwrap(), vert);
            }
        }
        let g5 = ggs_group(5, &[1, 2, 0, 4]).unwrap();
        let a = g5.parse_word("a").unwrap();
        let mut x = v("1234");
        for _ in 0..5 {
            x = g5.act_vertex(&a, &x).unwrap();
        }
        assert_eq!(x, v("1234"));
    }

    #[test]
    fn unknown_group_is_an_error() {
        let err = builtin_group("lamplighter").unwrap_err();
        assert!(err.to_string().contains("lamplighter"));
    }

    #[test]
    fn malformed_inputs() {
        let g = builtin_group("gamma").unwrap();
        assert!(g.parse_word("q").is_err());
        assert!(g.parse_word("a^x").is_err());
        assert!(g.parse_word("a^0").is_err());
        let w = g.parse_word("a").unwrap();
        assert!(g.act_vertex(&w, &Vertex::new(vec![4])).is_err());
        assert!("1x".parse::<Vertex>().is_err());
        assert!("10".parse::<Vertex>().is_err());
        assert_eq!("1.12.3".parse::<Vertex>().unwrap().digits(), &[1, 12, 3]);
    }

    #[test]
    fn definition_errors() {
        let no_alphabet = "gen a = id | 1, 1";
        assert!(SelfSimilarGroup::from_definition(no_alphabet).is_err());
        let bad_perm = "alphabet = 2\ngen a = 1 1 | 1, 1";
        assert!(matches!(
            SelfSimilarGroup::from_definition(bad_perm),
            Err(Error::Definition { line: 2, .. })
        ));
        let bad_section = "alphabet = 2\ngen a = 2 1 | 1, z";
        assert!(SelfSimilarGroup::from_definition(bad_section).is_err());
        let not_closed = "alphabet = 3\ngen a = 2 3 1 | 1, 1, 1\nsymmetric = a";
        assert!(SelfSimilarGroup::from_definition(not_closed).is_err());
        // a 3-cycle is not an involution
        let fake_involution = "alphabet = 3\ngen a = 2 3 1 | 1, 1, 1\ninvolutions = a";
        assert!(SelfSimilarGroup::from_definition(fake_involution).is_err());
        let wrong_arity = "alphabet = 3\ngen a = 2 3 1 | 1, 1";
        assert!(SelfSimilarGroup::from_definition(wrong_arity).is_err());
    }

    #[test]
    fn generators_are_bijections_on_levels() {
        for name in BUILTIN_GROUPS {
            let g = builtin_group(name).unwrap();
            let d = g.degree();
            let max_level = if d == 2 { 8 } else { 6 };
            for n in 0..=max_level {
                let verts = all_vertices(d, n);
                for &l in g.symmetric_set() {
                    let w = GroupWord::from_letters(vec![l]);
                    let images: HashSet<Vertex> =
                        verts.iter().map(|x| g.act_vertex(&w, x).unwrap()).collect();
                    assert_eq!(images.len(), verts.len(), "{name} {} level {n}", g.letter_symbol(l));
                }
            }
        }
    }

    #[test]
    fn involutions_square_to_identity() {
        for name in ["grigorchuk", "grigorchuk-tilde"] {
            let g = builtin_group(name).unwrap();
            for &l in g.symmetric_set() {
                let w = GroupWord::from_letters(vec![l, l]);
                for n in 0..=8 {
                    for x in all_vertices(2, n) {
                        assert_eq!(g.act_vertex(&w, &x).unwrap(), x);
                    }
                }
            }
        }
    }

    #[test]
    fn ggs_rotation_has_order_d() {
        for name in ["gamma", "gamma-bar", "gamma-barbar"] {
            let g = builtin_group(name).unwrap();
            let a = g.parse_word("a").unwrap();
            let a3 = g.parse_word("a^3").unwrap();
            for n in 1..=5 {
                for x in all_vertices(3, n) {
                    assert_ne!(g.act_vertex(&a, &x).unwrap(), x);
                    assert_eq!(g.act_vertex(&a3, &x).unwrap(), x);
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn group_and_inputs() -> impl Strategy<Value = (String, Vec<(usize, bool)>, Vec<usize>)> {
            (0usize..5).prop_flat_map(|gi| {
                let d: usize = if gi < 2 { 2 } else { 3 };
                (
                    Just(BUILTIN_GROUPS[gi].to_string()),
                    prop::collection::vec((0usize..4, any::<bool>()), 0..12),
                    prop::collection::vec(1..=d, 0..9),
                )
            })
        }

        proptest! {
            #[test]
            fn action_is_prefix_compatible((name, raw, digits) in group_and_inputs()) {
                let g = builtin_group(&name).unwrap();
                let ngen = g.generators().len();
                let w = GroupWord::from_letters(raw.iter().map(|&(i, inv)| Letter::new(i % ngen, inv)).collect());
                let x = Vertex::new(digits);
                let image = g.act_vertex(&w, &x).unwrap();
                prop_assert_eq!(image.level(), x.level());
                for k in 0..=x.level() {
                    prop_assert_eq!(g.act_vertex(&w, &x.truncate(k)).unwrap(), image.truncate(k));
                }
                prop_assert_eq!(g.act_vertex(&w.inverse(), &image).unwrap(), x);
            }
        }
    }
}
