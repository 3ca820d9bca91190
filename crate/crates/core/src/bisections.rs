//! Compact open bisections as prefix exchanges.
//!
//! A [`PrefixExchange`] is a finite list of pairs `(u, v)` and denotes the
//! partial homeomorphism `u·y ↦ v·y`. Sources and targets must each form a
//! prefix code and the continuations allowed after `u` and after `v` must
//! agree, which makes the map a bijection between the clopens `⋃ N_u` and
//! `⋃ N_v`. Composition, inversion and restriction stay inside this class, so
//! the exchanges form an inverse semigroup that carries both group actions and
//! Deaconu–Renault bisections.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::symbolic::{Clopen, Subshift, SymbolicError, Word};

/// Default cap on the length of any word inside a composed exchange.
pub const DEFAULT_MAX_PAIR_LEN: usize = 32;

/// The first invariant a candidate exchange violates.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("inadmissible word: {0}")]
    Inadmissible(SymbolicError),
    #[error("source not a prefix code ({0:?} vs {1:?})")]
    SourceNotPrefixCode(String, String),
    #[error("target not a prefix code ({0:?} vs {1:?})")]
    TargetNotPrefixCode(String, String),
    #[error("follower mismatch between {0:?} and {1:?}")]
    FollowerMismatch(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisectionError {
    #[error("invalid prefix exchange: {0}")]
    Invalid(#[from] Violation),
    #[error("operands live on different subshifts")]
    ShiftMismatch,
    #[error("composition produced a word of length {len}, above the cap {cap}")]
    ResourceLimit { len: usize, cap: usize },
    #[error("generator {0:?} is not a total bijection of the space")]
    NotTotal(String),
    #[error("duplicate generator name {0:?}")]
    DuplicateGenerator(String),
}

/// A finite bijection between two prefix codes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PrefixExchange {
    shift: Subshift,
    pairs: Vec<(Word, Word)>,
}

impl fmt::Debug for PrefixExchange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |w: &Word| {
            if w.is_empty() {
                "ε".to_string()
            } else {
                self.shift.format_word(w)
            }
        };
        let parts: Vec<String> = self
            .pairs
            .iter()
            .map(|(u, v)| format!("{}→{}", show(u), show(v)))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Checks every exchange invariant and reports the first failure.
pub fn validate(shift: &Subshift, pairs: &[(Word, Word)]) -> Result<(), Violation> {
    for (u, v) in pairs {
        shift.check_word(u).map_err(Violation::Inadmissible)?;
        shift.check_word(v).map_err(Violation::Inadmissible)?;
    }
    for (i, (u1, v1)) in pairs.iter().enumerate() {
        for (u2, v2) in &pairs[i + 1..] {
            if u1.comparable(u2) {
                return Err(Violation::SourceNotPrefixCode(
                    shift.format_word(u1),
                    shift.format_word(u2),
                ));
            }
            if v1.comparable(v2) {
                return Err(Violation::TargetNotPrefixCode(
                    shift.format_word(v1),
                    shift.format_word(v2),
                ));
            }
        }
    }
    for (u, v) in pairs {
        if shift.followers(u) != shift.followers(v) {
            return Err(Violation::FollowerMismatch(
                shift.format_word(u),
                shift.format_word(v),
            ));
        }
    }
    Ok(())
}

impl PrefixExchange {
    /// Validates and stores the pairs sorted by source word, without merging.
    pub fn new(shift: &Subshift, pairs: Vec<(Word, Word)>) -> Result<Self, BisectionError> {
        validate(shift, &pairs)?;
        Ok(Self::from_valid(shift, pairs))
    }

    /// Parses `u->v` pairs written over symbol names.
    pub fn parse(shift: &Subshift, pairs: &[(&str, &str)]) -> Result<Self, BisectionError> {
        let mut out = Vec::with_capacity(pairs.len());
        for (u, v) in pairs {
            let u = shift
                .parse_word(u)
                .map_err(|e| BisectionError::Invalid(Violation::Inadmissible(e)))?;
            let v = shift
                .parse_word(v)
                .map_err(|e| BisectionError::Invalid(Violation::Inadmissible(e)))?;
            out.push((u, v));
        }
        Self::new(shift, out)
    }

    pub(crate) fn from_valid(shift: &Subshift, mut pairs: Vec<(Word, Word)>) -> Self {
        pairs.sort();
        PrefixExchange {
            shift: shift.clone(),
            pairs,
        }
    }

    pub(crate) fn canonical_from(shift: &Subshift, pairs: Vec<(Word, Word)>) -> Self {
        Self::from_valid(shift, merge_pairs(shift, pairs))
    }

    pub fn empty(shift: &Subshift) -> Self {
        PrefixExchange {
            shift: shift.clone(),
            pairs: Vec::new(),
        }
    }

    /// The identity map of a clopen.
    pub fn identity(on: &Clopen) -> Self {
        PrefixExchange {
            shift: on.shift().clone(),
            pairs: on.words().iter().map(|w| (w.clone(), w.clone())).collect(),
        }
    }

    pub fn shift(&self) -> &Subshift {
        &self.shift
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn display_pairs(&self) -> Vec<(String, String)> {
        self.pairs
            .iter()
            .map(|(u, v)| (self.shift.format_word(u), self.shift.format_word(v)))
            .collect()
    }

    /// Sibling pairs merged to fixpoint, sorted by source.
    pub fn canonical(&self) -> PrefixExchange {
        Self::canonical_from(&self.shift, self.pairs.clone())
    }

    /// Whether both exchanges denote the same partial map.
    pub fn same_map(&self, other: &PrefixExchange) -> bool {
        self.shift == other.shift && self.canonical().pairs == other.canonical().pairs
    }

    pub fn is_identity(&self) -> bool {
        self.canonical().pairs.iter().all(|(u, v)| u == v)
    }

    pub fn source(&self) -> Clopen {
        Clopen::from_admissible(&self.shift, self.pairs.iter().map(|(u, _)| u.clone()))
    }

    pub fn range(&self) -> Clopen {
        Clopen::from_admissible(&self.shift, self.pairs.iter().map(|(_, v)| v.clone()))
    }

    pub fn max_word_len(&self) -> usize {
        self.pairs
            .iter()
            .map(|(u, v)| u.len().max(v.len()))
            .max()
            .unwrap_or(0)
    }

    pub fn max_source_len(&self) -> usize {
        self.pairs.iter().map(|(u, _)| u.len()).max().unwrap_or(0)
    }

    /// Largest growth `|v| - |u|` over the pairs, clamped at zero.
    pub fn stretch(&self) -> usize {
        self.pairs
            .iter()
            .map(|(u, v)| v.len().saturating_sub(u.len()))
            .max()
            .unwrap_or(0)
    }

    /// Image of the cylinder `N_w` when it lies inside one source cylinder.
    pub fn image_of_cylinder(&self, w: &Word) -> Option<Word> {
        self.pairs
            .iter()
            .find(|(u, _)| u.is_prefix_of(w))
            .map(|(u, v)| v.concat(w.strip_prefix(u).expect("prefix")))
    }

    /// Image of the point set `c ∩ source`.
    pub fn apply(&self, c: &Clopen) -> Clopen {
        let mut out = Vec::new();
        for (u, v) in &self.pairs {
            for w in c.words() {
                if let Some(tail) = w.strip_prefix(u) {
                    out.push(v.concat(tail));
                } else if w.is_prefix_of(u) {
                    out.push(v.clone());
                }
            }
        }
        Clopen::from_admissible(&self.shift, out)
    }

    /// `outer ∘ inner`: apply `inner` first.
    pub fn compose(outer: &PrefixExchange, inner: &PrefixExchange) -> Result<PrefixExchange, BisectionError> {
        Self::compose_capped(outer, inner, DEFAULT_MAX_PAIR_LEN)
    }

    pub fn compose_capped(
        outer: &PrefixExchange,
        inner: &PrefixExchange,
        cap: usize,
    ) -> Result<PrefixExchange, BisectionError> {
        if outer.shift != inner.shift {
            return Err(BisectionError::ShiftMismatch);
        }
        let mut out = Vec::new();
        for (u, v) in &inner.pairs {
            for (s, t) in &outer.pairs {
                let pair = if let Some(r) = v.strip_prefix(s) {
                    (u.clone(), t.concat(r))
                } else if let Some(r) = s.strip_prefix(v) {
                    (u.concat(r), t.clone())
                } else {
                    continue;
                };
                let len = pair.0.len().max(pair.1.len());
                if len > cap {
                    return Err(BisectionError::ResourceLimit { len, cap });
                }
                out.push(pair);
            }
        }
        Ok(Self::canonical_from(&inner.shift, out))
    }

    pub fn invert(&self) -> PrefixExchange {
        Self::from_valid(
            &self.shift,
            self.pairs.iter().map(|(u, v)| (v.clone(), u.clone())).collect(),
        )
    }

    /// The exchange restricted to `c ∩ source`.
    pub fn restrict(&self, c: &Clopen) -> PrefixExchange {
        let mut out = Vec::new();
        for (u, v) in &self.pairs {
            for w in c.words() {
                if let Some(tail) = w.strip_prefix(u) {
                    out.push((w.clone(), v.concat(tail)));
                } else if w.is_prefix_of(u) {
                    out.push((u.clone(), v.clone()));
                }
            }
        }
        Self::canonical_from(&self.shift, out)
    }

    /// Splits pairs until the longer word of each pair reaches `depth`.
    pub fn refine(&self, depth: usize) -> PrefixExchange {
        let mut out = Vec::new();
        let mut stack: Vec<(Word, Word)> = self.pairs.iter().rev().cloned().collect();
        while let Some((u, v)) = stack.pop() {
            if u.len().max(v.len()) >= depth {
                out.push((u, v));
                continue;
            }
            let kids: Vec<_> = self.shift.follower_symbols(&u).collect();
            for &s in kids.iter().rev() {
                stack.push((u.child(s), v.child(s)));
            }
        }
        Self::from_valid(&self.shift, out)
    }

    /// Disjoint union of exchanges whose sources and ranges are disjoint.
    pub(crate) fn disjoint_union(shift: &Subshift, parts: impl IntoIterator<Item = PrefixExchange>) -> PrefixExchange {
        let pairs = parts.into_iter().flat_map(|p| p.pairs).collect();
        Self::canonical_from(shift, pairs)
    }
}

/// Merges `(uα, vα)` for every admissible `α` into `(u, v)`, to fixpoint.
fn merge_pairs(shift: &Subshift, mut pairs: Vec<(Word, Word)>) -> Vec<(Word, Word)> {
    loop {
        let mut groups: BTreeMap<(Word, Word), u64> = BTreeMap::new();
        for (u, v) in &pairs {
            if let (Some(a), Some(b)) = (u.last(), v.last()) {
                if a == b {
                    let key = (u.parent().expect("non-empty"), v.parent().expect("non-empty"));
                    *groups.entry(key).or_insert(0) |= 1 << a;
                }
            }
        }
        let mergeable: Vec<(Word, Word)> = groups
            .into_iter()
            .filter(|((pu, pv), mask)| {
                let f = shift.followers(pu);
                *mask == f && shift.followers(pv) == f
            })
            .map(|(k, _)| k)
            .collect();
        if mergeable.is_empty() {
            return pairs;
        }
        let parents: HashSet<(Word, Word)> = mergeable.iter().cloned().collect();
        pairs.retain(|(u, v)| match (u.parent(), v.parent()) {
            (Some(pu), Some(pv)) if u.last() == v.last() => !parents.contains(&(pu, pv)),
            _ => true,
        });
        pairs.extend(mergeable);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresentationKind {
    /// Every generator is a total bijection of the space.
    GroupAction,
    /// Arbitrary compact open bisections.
    Etale,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub exchange: PrefixExchange,
}

/// An ample groupoid given by a subshift and generating bisections.
#[derive(Debug, Clone)]
pub struct GroupoidPresentation {
    shift: Subshift,
    generators: Vec<Generator>,
    kind: PresentationKind,
    max_pair_len: usize,
}

/// A generator or the inverse of one.
#[derive(Debug, Clone)]
pub struct Letter {
    pub label: String,
    pub exchange: PrefixExchange,
}

impl GroupoidPresentation {
    pub fn new(
        shift: Subshift,
        generators: Vec<Generator>,
        kind: PresentationKind,
    ) -> Result<Self, BisectionError> {
        let mut seen = HashSet::new();
        for g in &generators {
            if !seen.insert(g.name.clone()) {
                return Err(BisectionError::DuplicateGenerator(g.name.clone()));
            }
            if g.exchange.shift() != &shift {
                return Err(BisectionError::ShiftMismatch);
            }
            validate(&shift, g.exchange.pairs())?;
            if kind == PresentationKind::GroupAction
                && !(g.exchange.source().is_whole() && g.exchange.range().is_whole())
            {
                return Err(BisectionError::NotTotal(g.name.clone()));
            }
        }
        Ok(GroupoidPresentation {
            shift,
            generators,
            kind,
            max_pair_len: DEFAULT_MAX_PAIR_LEN,
        })
    }

    pub fn with_max_pair_len(mut self, cap: usize) -> Self {
        self.max_pair_len = cap;
        self
    }

    pub fn shift(&self) -> &Subshift {
        &self.shift
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Option<&PrefixExchange> {
        self.generators
            .iter()
            .find(|g| g.name == name)
            .map(|g| &g.exchange)
    }

    pub fn kind(&self) -> PresentationKind {
        self.kind
    }

    pub fn max_pair_len(&self) -> usize {
        self.max_pair_len
    }

    /// Generators and their inverses, ordered by name with the generator
    /// before its inverse.
    pub fn letters(&self) -> Vec<Letter> {
        let mut gens: Vec<&Generator> = self.generators.iter().collect();
        gens.sort_by(|a, b| a.name.cmp(&b.name));
        let mut out = Vec::with_capacity(2 * gens.len());
        for g in gens {
            out.push(Letter {
                label: g.name.clone(),
                exchange: g.exchange.clone(),
            });
            out.push(Letter {
                label: format!("{}^-1", g.name),
                exchange: g.exchange.invert(),
            });
        }
        out
    }

    /// Largest generator stretch.
    pub fn max_stretch(&self) -> usize {
        self.generators
            .iter()
            .map(|g| g.exchange.stretch())
            .max()
            .unwrap_or(0)
    }

    pub fn identity(&self) -> PrefixExchange {
        PrefixExchange::identity(&Clopen::whole(&self.shift))
    }
}

/// An enumerated groupoid element with its shortest generator word.
#[derive(Debug, Clone)]
pub struct Element {
    /// Letters joined by `*`, read as composition (`x*y` applies `y` first);
    /// the identity is `id`.
    pub label: String,
    pub length: usize,
    pub exchange: PrefixExchange,
}

/// Breadth-first enumeration of the inverse semigroup generated by a
/// presentation.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub elements: Vec<Element>,
    pub bound: usize,
    /// No new element appeared at the last level, so the generated inverse
    /// semigroup is finite and completely listed.
    pub stabilized: bool,
    /// Compositions dropped because they exceeded the pair-length cap.
    pub truncated: usize,
}

impl Enumeration {
    /// Elements of word length at most `bound`.
    pub fn up_to(&self, bound: usize) -> &[Element] {
        let n = self.elements.partition_point(|e| e.length <= bound);
        &self.elements[..n]
    }
}

/// Lists every element of word length at most `bound`, deduplicated by
/// canonical form. Order: shorter words first, then lexicographic over
/// letters (generator names, generator before inverse). Empty composites are
/// omitted.
pub fn enumerate_elements(g: &GroupoidPresentation, bound: usize) -> Enumeration {
    let letters = g.letters();
    let id = g.identity().canonical();
    let mut seen: HashSet<Vec<(Word, Word)>> = HashSet::new();
    seen.insert(id.pairs.clone());
    let mut elements = vec![Element {
        label: "id".into(),
        length: 0,
        exchange: id,
    }];
    let mut frontier: Vec<usize> = vec![0];
    let mut stabilized = false;
    let mut truncated = 0;
    for level in 1..=bound {
        let mut next = Vec::new();
        for &idx in &frontier {
            for letter in &letters {
                let prev = &elements[idx];
                let composed = match PrefixExchange::compose_capped(&prev.exchange, &letter.exchange, g.max_pair_len) {
                    Ok(c) => c,
                    Err(_) => {
                        truncated += 1;
                        continue;
                    }
                };
                if composed.is_empty() || !seen.insert(composed.pairs.clone()) {
                    continue;
                }
                let label = if prev.length == 0 {
                    letter.label.clone()
                } else {
                    format!("{}*{}", prev.label, letter.label)
                };
                next.push(Element {
                    label,
                    length: level,
                    exchange: composed,
                });
            }
        }
        if next.is_empty() {
            stabilized = truncated == 0;
            break;
        }
        frontier = (elements.len()..elements.len() + next.len()).collect();
        elements.extend(next);
    }
    Enumeration {
        elements,
        bound,
        stabilized,
        truncated,
    }
}
