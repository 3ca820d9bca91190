//! Clopen subsets of a one-sided subshift.
//!
//! A point of the space is an infinite admissible sequence. Every clopen set
//! is a finite union of cylinders `N_w = { x : x starts with w }`, so a clopen
//! is stored as a finite antichain of words. The canonical form merges a word
//! family back into its parent whenever every admissible one-symbol extension
//! of the parent is present; with that rule two clopens are equal as point sets
//! exactly when their word lists are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Largest supported alphabet.
pub const MAX_ALPHABET: usize = 64;

/// A symbol is an index into the alphabet.
pub type Symbol = u8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("alphabet must have between 2 and {MAX_ALPHABET} symbols, got {0}")]
    AlphabetSize(usize),
    #[error("symbol names must be non-empty and distinct, and no name may be a prefix of another (offending name {0:?})")]
    SymbolNames(String),
    #[error("transition matrix must be {0}x{0}")]
    MatrixShape(usize),
    #[error("symbol {0:?} has no admissible successor")]
    DeadSymbol(String),
    #[error("symbol {0:?} can never occur (not initial and no admissible predecessor)")]
    UnreachableSymbol(String),
    #[error("no symbol is allowed in the first position")]
    NoInitialSymbol,
    #[error("inadmissible word {word:?}: the pair {pair:?} is forbidden")]
    InadmissiblePair { word: String, pair: String },
    #[error("inadmissible word {word:?}: symbol {symbol:?} cannot start a sequence")]
    InadmissibleStart { word: String, symbol: String },
    #[error("symbol index {0} outside the alphabet")]
    SymbolOutOfRange(usize),
    #[error("cannot parse {0:?} as a word over the alphabet")]
    UnknownSymbol(String),
    #[error("operands live on different subshifts")]
    ShiftMismatch,
    #[error("refinement depth {depth} is shorter than the word {word:?}")]
    RefineTooShallow { depth: usize, word: String },
}

/// A finite word over the alphabet.
///
/// Words are ordered first by length and then lexicographically by symbol
/// index; every sorted collection in the crate uses this order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_symbols(symbols: impl Into<Vec<Symbol>>) -> Self {
        Word(symbols.into())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Symbol> {
        self.0.last().copied()
    }

    /// `self` followed by one more symbol.
    pub fn child(&self, symbol: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(symbol);
        Word(v)
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn concat(&self, tail: &[Symbol]) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + tail.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(tail);
        Word(v)
    }

    /// Prefix test (a word is a prefix of itself).
    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// True when the two cylinders intersect.
    pub fn comparable(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// The remainder of `self` after removing `prefix`, if it is one.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<&[Symbol]> {
        self.0.strip_prefix(prefix.0.as_slice())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct ShiftData {
    names: Vec<String>,
    /// Bit `j` of `rows[i]` is set when `j` may follow `i`.
    rows: Vec<u64>,
    /// Symbols allowed in the first position.
    initial: u64,
    full: bool,
}

/// A one-step shift of finite type on at most 64 symbols.
///
/// Cheap to clone; clones compare equal.
#[derive(Clone)]
pub struct Subshift(Arc<ShiftData>);

impl PartialEq for Subshift {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Subshift {}

impl std::hash::Hash for Subshift {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.names.hash(state);
        self.0.rows.hash(state);
    }
}

impl fmt::Debug for Subshift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Subshift")
            .field("names", &self.0.names)
            .field("full", &self.0.full)
            .finish()
    }
}

fn mask_all(k: usize) -> u64 {
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn default_names(k: usize) -> Vec<String> {
    if k <= 10 {
        (0..k).map(|i| i.to_string()).collect()
    } else {
        (0..k).map(|i| format!("<{i}>")).collect()
    }
}

impl Subshift {
    /// The full shift on `k` symbols named `0..k`.
    pub fn full(k: usize) -> Result<Self, SymbolicError> {
        Self::new(default_names(k), None, None)
    }

    /// Builds a subshift from symbol names, an optional 0/1 transition matrix
    /// (`matrix[i][j]` allows `j` after `i`) and an optional set of symbols
    /// allowed in the first position (all symbols when absent).
    pub fn new(
        names: Vec<String>,
        matrix: Option<Vec<Vec<bool>>>,
        initial: Option<Vec<bool>>,
    ) -> Result<Self, SymbolicError> {
        let k = names.len();
        if !(2..=MAX_ALPHABET).contains(&k) {
            return Err(SymbolicError::AlphabetSize(k));
        }
        for (i, a) in names.iter().enumerate() {
            if a.is_empty() {
                return Err(SymbolicError::SymbolNames(a.clone()));
            }
            for (j, b) in names.iter().enumerate() {
                if i != j && b.starts_with(a.as_str()) {
                    return Err(SymbolicError::SymbolNames(a.clone()));
                }
            }
        }
        let all = mask_all(k);
        let rows = match matrix {
            None => vec![all; k],
            Some(m) => {
                if m.len() != k || m.iter().any(|r| r.len() != k) {
                    return Err(SymbolicError::MatrixShape(k));
                }
                m.iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .fold(0u64, |acc, (j, &b)| if b { acc | (1 << j) } else { acc })
                    })
                    .collect()
            }
        };
        let initial = match initial {
            None => all,
            Some(v) => {
                if v.len() != k {
                    return Err(SymbolicError::MatrixShape(k));
                }
                v.iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, &b)| if b { acc | (1 << j) } else { acc })
            }
        };
        if initial == 0 {
            return Err(SymbolicError::NoInitialSymbol);
        }
        for (i, &row) in rows.iter().enumerate() {
            if row == 0 {
                return Err(SymbolicError::DeadSymbol(names[i].clone()));
            }
        }
        let reachable = rows.iter().fold(initial, |acc, r| acc | r);
        if reachable != all {
            let i = (0..k).find(|&i| reachable & (1 << i) == 0).unwrap_or(0);
            return Err(SymbolicError::UnreachableSymbol(names[i].clone()));
        }
        let full = initial == all && rows.iter().all(|&r| r == all);
        Ok(Subshift(Arc::new(ShiftData {
            names,
            rows,
            initial,
            full,
        })))
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.0.names[s as usize]
    }

    pub fn is_full_shift(&self) -> bool {
        self.0.full
    }

    /// Row `i` of the transition matrix as a bit mask.
    pub fn row(&self, s: Symbol) -> u64 {
        self.0.rows[s as usize]
    }

    pub fn initial_mask(&self) -> u64 {
        self.0.initial
    }

    pub fn allows(&self, a: Symbol, b: Symbol) -> bool {
        self.row(a) & (1 << b) != 0
    }

    /// Symbols that may follow `w` (the initial symbols for the empty word).
    pub fn followers(&self, w: &Word) -> u64 {
        match w.last() {
            None => self.0.initial,
            Some(s) => self.row(s),
        }
    }

    pub fn follower_symbols(&self, w: &Word) -> impl Iterator<Item = Symbol> {
        let mask = self.followers(w);
        (0..self.alphabet_size() as Symbol).filter(move |&s| mask & (1 << s) != 0)
    }

    pub fn children(&self, w: &Word) -> Vec<Word> {
        self.follower_symbols(w).map(|s| w.child(s)).collect()
    }

    pub fn check_word(&self, w: &Word) -> Result<(), SymbolicError> {
        let syms = w.symbols();
        for &s in syms {
            if s as usize >= self.alphabet_size() {
                return Err(SymbolicError::SymbolOutOfRange(s as usize));
            }
        }
        if let Some(&first) = syms.first() {
            if self.0.initial & (1 << first) == 0 {
                return Err(SymbolicError::InadmissibleStart {
                    word: self.format_word(w),
                    symbol: self.name(first).to_string(),
                });
            }
        }
        for pair in syms.windows(2) {
            if !self.allows(pair[0], pair[1]) {
                return Err(SymbolicError::InadmissiblePair {
                    word: self.format_word(w),
                    pair: format!("{}{}", self.name(pair[0]), self.name(pair[1])),
                });
            }
        }
        Ok(())
    }

    pub fn is_admissible(&self, w: &Word) -> bool {
        self.check_word(w).is_ok()
    }

    /// All admissible continuations `t` of `w` with `|t| = len`, in word order.
    pub fn extensions(&self, w: &Word, len: usize) -> Vec<Word> {
        let mut level = vec![w.clone()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(level.len() * 2);
            for u in &level {
                next.extend(self.children(u));
            }
            level = next;
        }
        level
    }

    /// All admissible words of length exactly `d`.
    pub fn words_of_length(&self, d: usize) -> Vec<Word> {
        self.extensions(&Word::empty(), d)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.symbols().iter().map(|&s| self.name(s)).collect()
    }

    /// Parses a string of concatenated symbol names. Names form a prefix code,
    /// so the split is unique.
    pub fn parse_word(&self, text: &str) -> Result<Word, SymbolicError> {
        let mut rest = text.trim();
        if rest == "ε" || rest == "\"\"" {
            return Ok(Word::empty());
        }
        let mut out = Vec::new();
        while !rest.is_empty() {
            let (i, name) = self
                .names()
                .iter()
                .enumerate()
                .find(|(_, n)| rest.starts_with(n.as_str()))
                .ok_or_else(|| SymbolicError::UnknownSymbol(text.to_string()))?;
            out.push(i as Symbol);
            rest = &rest[name.len()..];
        }
        let w = Word(out);
        self.check_word(&w)?;
        Ok(w)
    }
}

/// How two clopens sit relative to each other. Containment is reported
/// before disjointness, so the empty set is a `Subset` of every non-empty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRelation {
    Equal,
    Subset,
    Superset,
    Disjoint,
    Overlapping,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BooleanOp {
    Union,
    Intersect,
    Complement,
    Difference,
}

/// A clopen subset in canonical form.
#[derive(Clone, PartialEq, Eq)]
pub struct Clopen {
    shift: Subshift,
    words: Vec<Word>,
}

impl fmt::Debug for Clopen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .words
            .iter()
            .map(|w| {
                if w.is_empty() {
                    "ε".to_string()
                } else {
                    self.shift.format_word(w)
                }
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Canonical antichain for a family of admissible words.
pub(crate) fn canonical_words(shift: &Subshift, words: impl IntoIterator<Item = Word>) -> Vec<Word> {
    let sorted: BTreeSet<Word> = words.into_iter().collect();
    // Drop every word that has a proper prefix already kept; shortlex order
    // visits prefixes first.
    let mut kept: HashSet<Word> = HashSet::new();
    let mut by_len: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
    for w in sorted {
        let covered = (0..w.len()).any(|l| kept.contains(&Word(w.symbols()[..l].to_vec())));
        if !covered {
            kept.insert(w.clone());
            by_len.entry(w.len()).or_default().insert(w);
        }
    }
    let max_len = by_len.keys().next_back().copied().unwrap_or(0);
    for len in (1..=max_len).rev() {
        let Some(level) = by_len.remove(&len) else {
            continue;
        };
        let mut groups: BTreeMap<Word, u64> = BTreeMap::new();
        for w in &level {
            let p = w.parent().expect("non-empty word");
            *groups.entry(p).or_insert(0) |= 1 << w.last().expect("non-empty word");
        }
        let mut remaining = BTreeSet::new();
        let mut promoted = Vec::new();
        for (p, mask) in groups {
            if mask == shift.followers(&p) {
                promoted.push(p);
            } else {
                for s in 0..64u32 {
                    if mask & (1 << s) != 0 {
                        remaining.insert(p.child(s as Symbol));
                    }
                }
            }
        }
        by_len.insert(len, remaining);
        by_len.entry(len - 1).or_default().extend(promoted);
    }
    by_len.into_values().flatten().collect()
}

impl Clopen {
    /// Canonicalizes an arbitrary family of admissible words.
    pub fn new(shift: &Subshift, words: impl IntoIterator<Item = Word>) -> Result<Self, SymbolicError> {
        let words: Vec<Word> = words.into_iter().collect();
        for w in &words {
            shift.check_word(w)?;
        }
        Ok(Self::from_admissible(shift, words))
    }

    /// Canonicalizes words already known to be admissible.
    pub(crate) fn from_admissible(shift: &Subshift, words: impl IntoIterator<Item = Word>) -> Self {
        Clopen {
            shift: shift.clone(),
            words: canonical_words(shift, words),
        }
    }

    pub fn empty(shift: &Subshift) -> Self {
        Clopen {
            shift: shift.clone(),
            words: Vec::new(),
        }
    }

    pub fn whole(shift: &Subshift) -> Self {
        Clopen {
            shift: shift.clone(),
            words: vec![Word::empty()],
        }
    }

    pub fn cylinder(shift: &Subshift, w: Word) -> Result<Self, SymbolicError> {
        Self::new(shift, [w])
    }

    /// Parses a comma-separated list of words; `""` or `ε` is the empty word
    /// and `{}` or `∅` the empty set.
    pub fn parse(shift: &Subshift, text: &str) -> Result<Self, SymbolicError> {
        let t = text.trim();
        if t == "{}" || t == "∅" {
            return Ok(Self::empty(shift));
        }
        let words = t
            .split(',')
            .map(|part| shift.parse_word(part))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(shift, words)
    }

    pub fn shift(&self) -> &Subshift {
        &self.shift
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_whole(&self) -> bool {
        self.words.len() == 1 && self.words[0].is_empty()
    }

    /// Length of the longest word (0 for the empty set and the whole space).
    pub fn depth(&self) -> usize {
        self.words.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn display_words(&self) -> Vec<String> {
        self.words.iter().map(|w| self.shift.format_word(w)).collect()
    }

    /// `N_w ⊆ self`. On a canonical antichain this holds exactly when some
    /// word of `self` is a prefix of `w`.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        self.words.iter().any(|u| u.is_prefix_of(w))
    }

    /// `N_w ∩ self ≠ ∅`.
    pub fn meets_cylinder(&self, w: &Word) -> bool {
        self.words.iter().any(|u| u.comparable(w))
    }

    fn same_shift(&self, other: &Clopen) -> Result<(), SymbolicError> {
        if self.shift == other.shift {
            Ok(())
        } else {
            Err(SymbolicError::ShiftMismatch)
        }
    }

    pub fn union(&self, other: &Clopen) -> Result<Clopen, SymbolicError> {
        self.same_shift(other)?;
        Ok(self.union_unchecked(other))
    }

    pub fn intersect(&self, other: &Clopen) -> Result<Clopen, SymbolicError> {
        self.same_shift(other)?;
        Ok(self.intersect_unchecked(other))
    }

    pub fn difference(&self, other: &Clopen) -> Result<Clopen, SymbolicError> {
        self.same_shift(other)?;
        Ok(self.intersect_unchecked(&other.complement()))
    }

    pub fn complement(&self) -> Clopen {
        let mut out = Vec::new();
        complement_under(&self.shift, &Word::empty(), &self.words, &mut out);
        Clopen::from_admissible(&self.shift, out)
    }

    /// Dispatches a named boolean operation; `Complement` ignores `other`.
    pub fn boolean(&self, op: BooleanOp, other: Option<&Clopen>) -> Result<Clopen, SymbolicError> {
        let need = || other.ok_or(SymbolicError::ShiftMismatch);
        match op {
            BooleanOp::Complement => Ok(self.complement()),
            BooleanOp::Union => self.union(need()?),
            BooleanOp::Intersect => self.intersect(need()?),
            BooleanOp::Difference => self.difference(need()?),
        }
    }

    pub(crate) fn union_unchecked(&self, other: &Clopen) -> Clopen {
        Clopen::from_admissible(
            &self.shift,
            self.words.iter().chain(other.words.iter()).cloned(),
        )
    }

    pub(crate) fn intersect_unchecked(&self, other: &Clopen) -> Clopen {
        let mut out = Vec::new();
        for a in &self.words {
            for b in &other.words {
                if a.is_prefix_of(b) {
                    out.push(b.clone());
                } else if b.is_prefix_of(a) {
                    out.push(a.clone());
                }
            }
        }
        Clopen::from_admissible(&self.shift, out)
    }

    pub(crate) fn difference_unchecked(&self, other: &Clopen) -> Clopen {
        self.intersect_unchecked(&other.complement())
    }

    pub(crate) fn is_subset_unchecked(&self, other: &Clopen) -> bool {
        self.words.iter().all(|w| other.contains_cylinder(w))
    }

    pub(crate) fn is_disjoint_unchecked(&self, other: &Clopen) -> bool {
        self.words
            .iter()
            .all(|a| other.words.iter().all(|b| !a.comparable(b)))
    }

    pub fn is_subset(&self, other: &Clopen) -> Result<bool, SymbolicError> {
        self.same_shift(other)?;
        Ok(self.is_subset_unchecked(other))
    }

    pub fn is_disjoint(&self, other: &Clopen) -> Result<bool, SymbolicError> {
        self.same_shift(other)?;
        Ok(self.is_disjoint_unchecked(other))
    }

    pub fn relate(&self, other: &Clopen) -> Result<SetRelation, SymbolicError> {
        self.same_shift(other)?;
        let sub = self.is_subset_unchecked(other);
        let sup = other.is_subset_unchecked(self);
        Ok(match (sub, sup) {
            (true, true) => SetRelation::Equal,
            (true, false) => SetRelation::Subset,
            (false, true) => SetRelation::Superset,
            _ if self.is_disjoint_unchecked(other) => SetRelation::Disjoint,
            _ => SetRelation::Overlapping,
        })
    }

    /// The depth-`d` cylinders tiling `self`.
    pub fn refine(&self, d: usize) -> Result<Vec<Word>, SymbolicError> {
        let mut out = Vec::new();
        for w in &self.words {
            if w.len() > d {
                return Err(SymbolicError::RefineTooShallow {
                    depth: d,
                    word: self.shift.format_word(w),
                });
            }
            out.extend(self.shift.extensions(w, d - w.len()));
        }
        out.sort();
        Ok(out)
    }
}

fn complement_under(shift: &Subshift, prefix: &Word, words: &[Word], out: &mut Vec<Word>) {
    if words.is_empty() {
        out.push(prefix.clone());
        return;
    }
    if words.iter().any(|w| w.len() <= prefix.len()) {
        // `prefix` itself (or an ancestor) is in the set.
        return;
    }
    for child in shift.children(prefix) {
        let below: Vec<Word> = words
            .iter()
            .filter(|w| child.is_prefix_of(w))
            .cloned()
            .collect();
        complement_under(shift, &child, &below, out);
    }
}
