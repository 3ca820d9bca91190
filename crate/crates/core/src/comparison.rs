//! Comparison certificates and the searches that produce them.
//!
//! `K ≺ V` holds when finitely many bisections carry a cover of `K` onto
//! pairwise disjoint subsets of `V`; a [`Transporter`] records such a family.
//! The tuple relation `a ≼ b` additionally tags each piece with the entry of
//! `b` it lands in ([`TupleCertificate`]). Certificates are checked by pure
//! verifiers that only use canonical clopen arithmetic.
//!
//! The search works at a fixed resolution: each subject word is split into
//! cylinders `r` levels deeper, every cylinder is assigned one enumerated
//! element (and target index) whose source contains it, and the images must be
//! pairwise disjoint inside their targets. Resolutions `0..=max_refine` are
//! tried in turn with a depth-first search that prunes by forward checking.
//! Cylinders are visited in word order and options in enumeration order, so
//! the first certificate found is the least one in that order.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use rayon::prelude::*;
use thiserror::Error;

use crate::bisections::{enumerate_elements, validate, BisectionError, Element, Enumeration, GroupoidPresentation, PrefixExchange};
use crate::labels;
use crate::measures::{self, LpResult, MeasureWitness};
use crate::symbolic::{Clopen, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComparisonError {
    #[error("certificates do not chain: the middle tuples differ")]
    MiddleMismatch,
    #[error("certificate does not verify")]
    NotVerified,
    #[error(transparent)]
    Bisection(#[from] BisectionError),
}

/// One bisection of a certificate with the generator word it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub label: String,
    pub exchange: PrefixExchange,
}

/// Witness for `subject ≺ target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transporter {
    pub subject: Clopen,
    pub target: Clopen,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleEntry {
    pub source_index: usize,
    pub piece: Piece,
    pub target_index: usize,
}

/// Witness for `subject ≼ target` between tuples of clopens.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleCertificate {
    pub subject: Vec<Clopen>,
    pub target: Vec<Clopen>,
    pub entries: Vec<TupleEntry>,
}

fn pieces_valid<'a>(shift: &crate::symbolic::Subshift, pieces: impl IntoIterator<Item = &'a PrefixExchange>) -> bool {
    pieces
        .into_iter()
        .all(|p| p.shift() == shift && validate(shift, p.pairs()).is_ok())
}

fn pairwise_disjoint(sets: &[Clopen]) -> bool {
    sets.iter()
        .enumerate()
        .all(|(i, a)| sets[i + 1..].iter().all(|b| a.is_disjoint_unchecked(b)))
}

fn union_all(shift: &crate::symbolic::Subshift, sets: impl IntoIterator<Item = Clopen>) -> Clopen {
    Clopen::from_admissible(shift, sets.into_iter().flat_map(|c| c.words().to_vec()))
}

/// Sources cover the subject, ranges are disjoint and inside the target.
pub fn verify_transporter(c: &Transporter) -> bool {
    let shift = c.subject.shift();
    if c.target.shift() != shift || !pieces_valid(shift, c.pieces.iter().map(|p| &p.exchange)) {
        return false;
    }
    let sources = union_all(shift, c.pieces.iter().map(|p| p.exchange.source()));
    let ranges: Vec<Clopen> = c.pieces.iter().map(|p| p.exchange.range()).collect();
    c.subject.is_subset_unchecked(&sources)
        && pairwise_disjoint(&ranges)
        && ranges.iter().all(|r| r.is_subset_unchecked(&c.target))
}

fn members<'a>(g: &GroupoidPresentation, pieces: impl IntoIterator<Item = &'a Piece>) -> Result<(), String> {
    pieces.into_iter().try_for_each(|p| labels::check_membership(g, &p.label, &p.exchange))
}

impl Transporter {
    pub fn verify(&self) -> bool {
        verify_transporter(self)
    }

    /// [`Transporter::verify`], plus every piece agreeing with its label in `g`.
    pub fn verify_in(&self, g: &GroupoidPresentation) -> Result<(), String> {
        if !self.verify() {
            return Err("transporter does not verify".into());
        }
        members(g, &self.pieces)
    }

    pub fn into_tuple(self) -> TupleCertificate {
        TupleCertificate {
            subject: vec![self.subject],
            target: vec![self.target],
            entries: self
                .pieces
                .into_iter()
                .map(|piece| TupleEntry {
                    source_index: 0,
                    piece,
                    target_index: 0,
                })
                .collect(),
        }
    }
}

impl TupleCertificate {
    fn shift_ok(&self) -> bool {
        let Some(shift) = self.subject.iter().chain(&self.target).map(Clopen::shift).next() else {
            return self.entries.is_empty();
        };
        self.subject.iter().chain(&self.target).all(|c| c.shift() == shift)
            && pieces_valid(shift, self.entries.iter().map(|e| &e.piece.exchange))
            && self
                .entries
                .iter()
                .all(|e| e.source_index < self.subject.len() && e.target_index < self.target.len())
    }

    fn ranges_for(&self, k: usize) -> Vec<Clopen> {
        self.entries
            .iter()
            .filter(|e| e.target_index == k)
            .map(|e| e.piece.exchange.range())
            .collect()
    }

    fn sources_for(&self, i: usize) -> Vec<Clopen> {
        self.entries
            .iter()
            .filter(|e| e.source_index == i)
            .map(|e| e.piece.exchange.source())
            .collect()
    }

    /// For each `i` the sources tagged `i` cover `a_i`; for each `k` the
    /// ranges tagged `k` are pairwise disjoint and inside `b_k`.
    pub fn verify(&self) -> bool {
        if !self.shift_ok() {
            return false;
        }
        let covered = self.subject.iter().enumerate().all(|(i, a)| {
            let srcs = union_all(a.shift(), self.sources_for(i));
            a.is_subset_unchecked(&srcs)
        });
        covered
            && self.target.iter().enumerate().all(|(k, b)| {
                let ranges = self.ranges_for(k);
                pairwise_disjoint(&ranges) && ranges.iter().all(|r| r.is_subset_unchecked(b))
            })
    }

    /// Exact tilings on both sides: the sources tagged `i` partition `a_i`
    /// and the ranges tagged `k` partition `b_k`.
    pub fn verify_tiling(&self) -> bool {
        if !self.shift_ok() {
            return false;
        }
        let tiles = |sets: Vec<Clopen>, whole: &Clopen| {
            pairwise_disjoint(&sets) && union_all(whole.shift(), sets) == *whole
        };
        self.subject.iter().enumerate().all(|(i, a)| tiles(self.sources_for(i), a))
            && self.target.iter().enumerate().all(|(k, b)| tiles(self.ranges_for(k), b))
    }

    /// [`TupleCertificate::verify`] (or the tiling check), plus every piece
    /// agreeing with its label in `g`.
    pub fn verify_in(&self, g: &GroupoidPresentation, tiling: bool) -> Result<(), String> {
        let ok = if tiling { self.verify_tiling() } else { self.verify() };
        if !ok {
            return Err("tuple certificate does not verify".into());
        }
        members(g, self.entries.iter().map(|e| &e.piece))
    }

    /// The single-clopen view, when both tuples have length one.
    pub fn into_transporter(self) -> Option<Transporter> {
        if self.subject.len() != 1 || self.target.len() != 1 {
            return None;
        }
        let mut subject = self.subject;
        let mut target = self.target;
        Some(Transporter {
            subject: subject.pop()?,
            target: target.pop()?,
            pieces: self.entries.into_iter().map(|e| e.piece).collect(),
        })
    }
}

/// Chains `a ≼ b` and `b ≼ c` into `a ≼ c` with pieces `V ∘ U`.
pub fn compose_certificates(first: &TupleCertificate, second: &TupleCertificate) -> Result<TupleCertificate, ComparisonError> {
    if first.target != second.subject {
        return Err(ComparisonError::MiddleMismatch);
    }
    let mut entries = Vec::new();
    for u in &first.entries {
        for v in second.entries.iter().filter(|v| v.source_index == u.target_index) {
            let r = PrefixExchange::compose(&v.piece.exchange, &u.piece.exchange)?;
            if r.is_empty() {
                continue;
            }
            entries.push(TupleEntry {
                source_index: u.source_index,
                piece: Piece {
                    label: format!("({})*({})", v.piece.label, u.piece.label),
                    exchange: r,
                },
                target_index: v.target_index,
            });
        }
    }
    Ok(TupleCertificate {
        subject: first.subject.clone(),
        target: second.target.clone(),
        entries,
    })
}

pub fn compose_transporters(first: &Transporter, second: &Transporter) -> Result<Transporter, ComparisonError> {
    let t = compose_certificates(&first.clone().into_tuple(), &second.clone().into_tuple())?;
    Ok(t.into_transporter().expect("single entries"))
}

/// One bisection with source exactly the subject: each piece is restricted
/// to the part of the subject not claimed by an earlier piece.
pub fn normalize_certificate(c: &Transporter) -> Transporter {
    let shift = c.subject.shift();
    let mut remaining = c.subject.clone();
    let mut parts = Vec::new();
    let mut labels = Vec::new();
    for p in &c.pieces {
        let part = remaining.intersect_unchecked(&p.exchange.source());
        if part.is_empty() {
            continue;
        }
        remaining = remaining.difference_unchecked(&part);
        parts.push(p.exchange.restrict(&part));
        labels.push(p.label.clone());
    }
    Transporter {
        subject: c.subject.clone(),
        target: c.target.clone(),
        pieces: vec![Piece {
            label: labels.join(" + "),
            exchange: PrefixExchange::disjoint_union(shift, parts),
        }],
    }
}

/// Splits every pair until its longer word has length at least `depth`.
pub fn refine_certificate(c: &Transporter, depth: usize) -> Transporter {
    Transporter {
        subject: c.subject.clone(),
        target: c.target.clone(),
        pieces: c
            .pieces
            .iter()
            .map(|p| Piece {
                label: p.label.clone(),
                exchange: p.exchange.refine(depth),
            })
            .collect(),
    }
}

pub fn refine_tuple_certificate(c: &TupleCertificate, depth: usize) -> TupleCertificate {
    TupleCertificate {
        subject: c.subject.clone(),
        target: c.target.clone(),
        entries: c
            .entries
            .iter()
            .map(|e| TupleEntry {
                source_index: e.source_index,
                piece: Piece {
                    label: e.piece.label.clone(),
                    exchange: e.piece.exchange.refine(depth),
                },
                target_index: e.target_index,
            })
            .collect(),
    }
}

/// Why a relation cannot hold.
#[derive(Debug, Clone, PartialEq)]
pub enum Refutation {
    /// An invariant measure violating the inequality the relation implies.
    Measure(MeasureWitness),
    /// The generated inverse semigroup is finite, fully enumerated, and no
    /// assignment exists at any resolution tried.
    Exhausted { elements: usize, max_refine: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome<C> {
    Verified(C),
    Refuted(Refutation),
    Unknown { reason: String },
}

impl<C> SearchOutcome<C> {
    pub fn is_verified(&self) -> bool {
        matches!(self, SearchOutcome::Verified(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, SearchOutcome::Refuted(_))
    }

    pub fn verified(&self) -> Option<&C> {
        match self {
            SearchOutcome::Verified(c) => Some(c),
            _ => None,
        }
    }

    pub fn map<D>(self, f: impl FnOnce(C) -> D) -> SearchOutcome<D> {
        match self {
            SearchOutcome::Verified(c) => SearchOutcome::Verified(f(c)),
            SearchOutcome::Refuted(r) => SearchOutcome::Refuted(r),
            SearchOutcome::Unknown { reason } => SearchOutcome::Unknown { reason },
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Extra levels the subject may be split into.
    pub max_refine: usize,
    /// Backtracking nodes per search before giving up with `Unknown`.
    pub node_budget: usize,
    /// Try an invariant-measure refutation before searching.
    pub measure_refutation: bool,
    /// Depth of the refutation program; defaults to the deepest word of the
    /// instance plus the largest generator stretch plus two.
    pub measure_depth: Option<usize>,
    /// How many levels below the first subject word the paradoxical search
    /// may look for the two halves.
    pub split_depth: usize,
    /// Depth up to which a missing invariant measure is looked for once and
    /// reused by every refutation.
    pub obstruction_depth: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            max_refine: 3,
            node_budget: 200_000,
            measure_refutation: true,
            measure_depth: None,
            split_depth: 2,
            obstruction_depth: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Packing,
    Tiling,
}

enum Packed {
    Found(TupleCertificate),
    NotFound,
    Budget,
}

struct Opt {
    element: usize,
    target: usize,
    image: Word,
}

/// Two disjoint halves of a clopen and transporters of the whole onto each.
#[derive(Debug, Clone, PartialEq)]
pub struct Paradox {
    pub first_half: Clopen,
    pub second_half: Clopen,
    pub first: Transporter,
    pub second: Transporter,
}

impl Paradox {
    pub fn verify(&self, set: &Clopen) -> bool {
        !self.first_half.is_empty()
            && !self.second_half.is_empty()
            && self.first_half.is_disjoint_unchecked(&self.second_half)
            && self.first_half.is_subset_unchecked(set)
            && self.second_half.is_subset_unchecked(set)
            && self.first.subject == *set
            && self.second.subject == *set
            && self.first.target == self.first_half
            && self.second.target == self.second_half
            && self.first.verify()
            && self.second.verify()
    }

    pub fn verify_in(&self, set: &Clopen, g: &GroupoidPresentation) -> Result<(), String> {
        if !self.verify(set) {
            return Err("paradoxical decomposition does not verify".into());
        }
        members(g, self.first.pieces.iter().chain(&self.second.pieces))
    }
}

/// Bisections `E_i` with `⋃ E_i(W_i) = X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FillingWitness {
    pub sets: Vec<Clopen>,
    pub maps: Vec<Piece>,
}

impl FillingWitness {
    pub fn verify(&self) -> bool {
        let Some(shift) = self.sets.first().map(Clopen::shift) else {
            return false;
        };
        self.maps.len() == self.sets.len()
            && pieces_valid(shift, self.maps.iter().map(|p| &p.exchange))
            && union_all(shift, self.maps.iter().zip(&self.sets).map(|(e, w)| e.exchange.apply(w))).is_whole()
    }

    pub fn verify_in(&self, g: &GroupoidPresentation) -> Result<(), String> {
        if !self.verify() {
            return Err("filling maps do not cover the space".into());
        }
        members(g, &self.maps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FillingOutcome {
    Verified(FillingWitness),
    Unknown { exhausted: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContractOutcome {
    /// A bisection with source exactly `V` and range a proper subset of `V`.
    Verified(Piece),
    Unknown,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MinimalOutcome {
    Verified,
    Unknown,
    /// The orbit of `cylinder` saturates to a proper invariant clopen.
    NotMinimal { cylinder: Word, invariant: Clopen },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimalReport {
    pub outcome: MinimalOutcome,
    /// Every cylinder with its saturation.
    pub saturations: Vec<(Word, Clopen)>,
    /// Distinct proper saturations that are invariant under every letter.
    pub invariant_clopens: Vec<Clopen>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub entries: Vec<(Word, SearchOutcome<Paradox>)>,
}

impl ScanReport {
    pub fn all_verified(&self) -> bool {
        self.entries.iter().all(|(_, o)| o.is_verified())
    }

    pub fn all_refuted(&self) -> bool {
        self.entries.iter().all(|(_, o)| o.is_refuted())
    }
}

/// A presentation with its elements enumerated up to a word bound; all the
/// searches run against one explorer share the enumeration.
pub struct Explorer<'g> {
    g: &'g GroupoidPresentation,
    enumeration: Enumeration,
    config: SearchConfig,
    obstruction: OnceLock<Option<usize>>,
}

impl<'g> Explorer<'g> {
    pub fn new(g: &'g GroupoidPresentation, bound: usize) -> Self {
        Self::with_config(g, bound, SearchConfig::default())
    }

    pub fn with_config(g: &'g GroupoidPresentation, bound: usize, config: SearchConfig) -> Self {
        Explorer {
            g,
            enumeration: enumerate_elements(g, bound),
            config,
            obstruction: OnceLock::new(),
        }
    }

    pub fn presentation(&self) -> &GroupoidPresentation {
        self.g
    }

    pub fn config(&self) -> &SearchConfig {
        &self.config
    }

    pub fn elements(&self) -> &[Element] {
        &self.enumeration.elements
    }

    pub fn enumeration(&self) -> &Enumeration {
        &self.enumeration
    }

    /// Smallest depth at which the invariance program is infeasible, if any
    /// up to the configured obstruction depth.
    pub fn obstruction_depth(&self) -> Option<usize> {
        *self.obstruction.get_or_init(|| {
            let floor = measures::depth_floor(self.g);
            (floor..=self.config.obstruction_depth.max(floor))
                .find(|&d| !measures::invariance_lp(self.g, d).is_feasible())
        })
    }

    fn refute(&self, a: &[Clopen], b: &[Clopen]) -> Option<MeasureWitness> {
        let deepest = a.iter().chain(b).map(Clopen::depth).max().unwrap_or(0);
        let depth = self
            .config
            .measure_depth
            .unwrap_or(deepest + self.g.max_stretch() + 2);
        if let Some(d) = self.obstruction_depth() {
            if d <= depth.max(deepest) {
                return None;
            }
        }
        measures::refute_tuple(self.g, a, b, depth)
    }

    fn not_found(&self) -> SearchOutcome<TupleCertificate> {
        if self.enumeration.stabilized {
            SearchOutcome::Refuted(Refutation::Exhausted {
                elements: self.enumeration.elements.len(),
                max_refine: self.config.max_refine,
            })
        } else {
            SearchOutcome::Unknown {
                reason: format!("no certificate with words of length <= {}", self.enumeration.bound),
            }
        }
    }

    fn budget_exceeded(&self) -> SearchOutcome<TupleCertificate> {
        SearchOutcome::Unknown {
            reason: format!("node budget of {} exhausted", self.config.node_budget),
        }
    }

    /// `K ≺ V`.
    pub fn compare(&self, k: &Clopen, v: &Clopen) -> SearchOutcome<Transporter> {
        if k.is_subset_unchecked(v) {
            return SearchOutcome::Verified(Transporter {
                subject: k.clone(),
                target: v.clone(),
                pieces: if k.is_empty() {
                    Vec::new()
                } else {
                    vec![Piece {
                        label: "id".into(),
                        exchange: PrefixExchange::identity(k),
                    }]
                },
            });
        }
        self.compare_tuple(std::slice::from_ref(k), std::slice::from_ref(v))
            .map(|t| t.into_transporter().expect("single entries"))
    }

    /// `a ≼ b`.
    pub fn compare_tuple(&self, a: &[Clopen], b: &[Clopen]) -> SearchOutcome<TupleCertificate> {
        self.compare_tuple_with(a, b, self.config.measure_refutation)
    }

    fn compare_tuple_with(&self, a: &[Clopen], b: &[Clopen], use_measure: bool) -> SearchOutcome<TupleCertificate> {
        if a.iter().all(Clopen::is_empty) {
            return SearchOutcome::Verified(TupleCertificate {
                subject: a.to_vec(),
                target: b.to_vec(),
                entries: Vec::new(),
            });
        }
        if use_measure {
            if let Some(w) = self.refute(a, b) {
                return SearchOutcome::Refuted(Refutation::Measure(w));
            }
        }
        match self.pack(a, b, Mode::Packing) {
            Packed::Found(c) => SearchOutcome::Verified(c),
            Packed::NotFound => self.not_found(),
            Packed::Budget => self.budget_exceeded(),
        }
    }

    /// `a ∼ b`: exact tilings of both tuples.
    pub fn type_equivalent(&self, a: &[Clopen], b: &[Clopen]) -> SearchOutcome<TupleCertificate> {
        let a_empty = a.iter().all(Clopen::is_empty);
        let b_empty = b.iter().all(Clopen::is_empty);
        if a_empty && b_empty {
            return SearchOutcome::Verified(TupleCertificate {
                subject: a.to_vec(),
                target: b.to_vec(),
                entries: Vec::new(),
            });
        }
        if self.config.measure_refutation {
            if let Some(w) = self.refute(a, b).or_else(|| self.refute(b, a)) {
                return SearchOutcome::Refuted(Refutation::Measure(w));
            }
        }
        match self.pack(a, b, Mode::Tiling) {
            Packed::Found(c) => SearchOutcome::Verified(c),
            Packed::NotFound => self.not_found(),
            Packed::Budget => self.budget_exceeded(),
        }
    }

    fn pack(&self, a: &[Clopen], b: &[Clopen], mode: Mode) -> Packed {
        let mut budget = self.config.node_budget;
        for level in 0..=self.config.max_refine {
            match pack_at(self.elements(), a, b, mode, level, &mut budget) {
                Packed::NotFound => continue,
                other => return other,
            }
        }
        Packed::NotFound
    }

    /// Candidate halves `(V1, V2)` of `O`: a set of cylinders just below the
    /// first word of `O` against everything else in `O`.
    pub fn halves(&self, o: &Clopen) -> Vec<(Clopen, Clopen)> {
        let shift = o.shift();
        let Some(first) = o.words().first() else {
            return Vec::new();
        };
        let mut out: Vec<(Clopen, Clopen)> = Vec::new();
        for j in 1..=self.config.split_depth.max(1) {
            let cells = shift.extensions(first, j);
            if cells.len() < 2 {
                continue;
            }
            let n = cells.len().min(8);
            for mask in 0u32..(1 << (n - 1)) {
                let chosen = (0..cells.len()).filter(|&i| i == 0 || (i < n && mask & (1 << (i - 1)) != 0));
                let v1 = Clopen::from_admissible(shift, chosen.map(|i| cells[i].clone()));
                let v2 = o.difference_unchecked(&v1);
                if v2.is_empty() || out.iter().any(|(x, _)| *x == v1) {
                    continue;
                }
                out.push((v1, v2));
            }
        }
        out
    }

    /// `O` is (2,1)-paradoxical.
    pub fn paradoxical(&self, o: &Clopen) -> SearchOutcome<Paradox> {
        if o.is_empty() {
            return SearchOutcome::Unknown {
                reason: "the empty set is not paradoxical".into(),
            };
        }
        if self.config.measure_refutation {
            let doubled = [o.clone(), o.clone()];
            if let Some(w) = self.refute(&doubled, std::slice::from_ref(o)) {
                return SearchOutcome::Refuted(Refutation::Measure(w));
            }
        }
        let mut budget_hit = false;
        for (v1, v2) in self.halves(o) {
            let first = self.compare_tuple_with(std::slice::from_ref(o), std::slice::from_ref(&v1), false);
            let first = match first {
                SearchOutcome::Verified(c) => c,
                SearchOutcome::Unknown { .. } => {
                    budget_hit = true;
                    continue;
                }
                SearchOutcome::Refuted(_) => continue,
            };
            match self.compare_tuple_with(std::slice::from_ref(o), std::slice::from_ref(&v2), false) {
                SearchOutcome::Verified(second) => {
                    return SearchOutcome::Verified(Paradox {
                        first_half: v1,
                        second_half: v2,
                        first: first.into_transporter().expect("single"),
                        second: second.into_transporter().expect("single"),
                    })
                }
                SearchOutcome::Unknown { .. } => budget_hit = true,
                SearchOutcome::Refuted(_) => {}
            }
        }
        if self.enumeration.stabilized && !budget_hit {
            SearchOutcome::Refuted(Refutation::Exhausted {
                elements: self.enumeration.elements.len(),
                max_refine: self.config.max_refine,
            })
        } else {
            SearchOutcome::Unknown {
                reason: format!(
                    "no paradoxical decomposition with words of length <= {}",
                    self.enumeration.bound
                ),
            }
        }
    }

    /// Paradoxical search on every cylinder of depth at most `depth`.
    pub fn purely_infinite_scan(&self, depth: usize) -> ScanReport {
        let shift = self.g.shift();
        let cylinders: Vec<Word> = (0..=depth).flat_map(|d| shift.words_of_length(d)).collect();
        let entries = cylinders
            .into_par_iter()
            .map(|w| {
                let c = Clopen::from_admissible(shift, [w.clone()]);
                let outcome = self.paradoxical(&c);
                (w, outcome)
            })
            .collect();
        ScanReport { entries }
    }

    /// `⋃ e(V)` over the enumerated elements.
    pub fn saturation(&self, v: &Clopen) -> Clopen {
        union_all(v.shift(), self.elements().iter().map(|e| e.exchange.apply(v)))
    }

    fn is_invariant(&self, s: &Clopen) -> bool {
        self.g
            .letters()
            .iter()
            .all(|l| l.exchange.apply(s).is_subset_unchecked(s))
    }

    pub fn minimal_check(&self, depth: usize) -> MinimalReport {
        let shift = self.g.shift();
        let mut saturations = Vec::new();
        let mut invariant_clopens: Vec<Clopen> = Vec::new();
        let mut outcome = MinimalOutcome::Verified;
        let mut unknown = false;
        for w in shift.words_of_length(depth) {
            let c = Clopen::from_admissible(shift, [w.clone()]);
            let s = self.saturation(&c);
            if !s.is_whole() {
                if self.is_invariant(&s) {
                    if !invariant_clopens.contains(&s) {
                        invariant_clopens.push(s.clone());
                    }
                    if !matches!(outcome, MinimalOutcome::NotMinimal { .. }) {
                        outcome = MinimalOutcome::NotMinimal {
                            cylinder: w.clone(),
                            invariant: s.clone(),
                        };
                    }
                } else {
                    unknown = true;
                }
            }
            saturations.push((w, s));
        }
        if unknown && outcome == MinimalOutcome::Verified {
            outcome = MinimalOutcome::Unknown;
        }
        MinimalReport {
            outcome,
            saturations,
            invariant_clopens,
        }
    }

    /// Looks for bisections translating the `W_i` over the whole space.
    pub fn n_filling(&self, sets: &[Clopen]) -> FillingOutcome {
        let shift = self.g.shift();
        let whole = Clopen::whole(shift);
        match self.compare_tuple_with(std::slice::from_ref(&whole), sets, false) {
            SearchOutcome::Verified(cert) => {
                let maps = (0..sets.len())
                    .map(|k| {
                        let pieces: Vec<Piece> = cert
                            .entries
                            .iter()
                            .filter(|e| e.target_index == k)
                            .map(|e| e.piece.clone())
                            .collect();
                        let part = union_all(shift, pieces.iter().map(|p| p.exchange.source()));
                        let t = Transporter {
                            subject: part.intersect_unchecked(&whole),
                            target: sets[k].clone(),
                            pieces,
                        };
                        let n = normalize_certificate(&t);
                        n.pieces
                            .first()
                            .map(|p| Piece {
                                label: format!("({})^-1", p.label),
                                exchange: p.exchange.invert(),
                            })
                            .unwrap_or_else(|| Piece {
                                label: "id".into(),
                                exchange: PrefixExchange::empty(shift),
                            })
                    })
                    .collect();
                FillingOutcome::Verified(FillingWitness {
                    sets: sets.to_vec(),
                    maps,
                })
            }
            SearchOutcome::Refuted(Refutation::Exhausted { .. }) => FillingOutcome::Unknown { exhausted: true },
            _ => FillingOutcome::Unknown { exhausted: false },
        }
    }

    /// A bisection compressing `V` properly into itself.
    pub fn locally_contracting(&self, v: &Clopen) -> ContractOutcome {
        if v.is_empty() {
            return ContractOutcome::Unknown;
        }
        for e in self.elements() {
            if v.is_subset_unchecked(&e.exchange.source()) {
                let r = e.exchange.restrict(v);
                let range = r.range();
                if range.is_subset_unchecked(v) && range != *v {
                    return ContractOutcome::Verified(Piece {
                        label: e.label.clone(),
                        exchange: r,
                    });
                }
            }
        }
        let mut exhausted = self.enumeration.stabilized;
        for (v1, _) in self.halves(v) {
            match self.compare_tuple_with(std::slice::from_ref(v), std::slice::from_ref(&v1), false) {
                SearchOutcome::Verified(c) => {
                    let mut t = normalize_certificate(&c.into_transporter().expect("single"));
                    return ContractOutcome::Verified(t.pieces.swap_remove(0));
                }
                SearchOutcome::Unknown { .. } => exhausted = false,
                SearchOutcome::Refuted(_) => {}
            }
        }
        if exhausted {
            ContractOutcome::Exhausted
        } else {
            ContractOutcome::Unknown
        }
    }
}

/// Depth-`depth` cylinders on which every generator and inverse acts as the
/// identity wherever it is defined.
pub fn global_fixed_unit_scan(g: &GroupoidPresentation, depth: usize) -> Vec<Word> {
    let shift = g.shift();
    let letters = g.letters();
    shift
        .words_of_length(depth)
        .into_iter()
        .filter(|w| {
            let c = Clopen::from_admissible(shift, [w.clone()]);
            letters.iter().all(|l| l.exchange.restrict(&c).is_identity())
        })
        .collect()
}

fn pack_at(elements: &[Element], a: &[Clopen], b: &[Clopen], mode: Mode, level: usize, budget: &mut usize) -> Packed {
    let Some(shift) = a.first().map(Clopen::shift) else {
        return Packed::NotFound;
    };
    let mut cells: Vec<(usize, Word)> = Vec::new();
    for (i, ai) in a.iter().enumerate() {
        for w in ai.words() {
            cells.extend(shift.extensions(w, level).into_iter().map(|c| (i, c)));
        }
    }
    let mut opts: Vec<Vec<Opt>> = Vec::with_capacity(cells.len());
    for (_, c) in &cells {
        let mut list = Vec::new();
        for (ei, e) in elements.iter().enumerate() {
            let Some(image) = e.exchange.image_of_cylinder(c) else {
                continue;
            };
            for (k, bk) in b.iter().enumerate() {
                if bk.contains_cylinder(&image) {
                    list.push(Opt {
                        element: ei,
                        target: k,
                        image: image.clone(),
                    });
                }
            }
        }
        if list.is_empty() {
            return Packed::NotFound;
        }
        opts.push(list);
    }
    let mut live: Vec<Vec<usize>> = opts.iter().map(|l| (0..l.len()).collect()).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(cells.len());
    let found = backtrack(0, &opts, &mut live, &mut chosen, b, mode, budget);
    match found {
        None => Packed::Budget,
        Some(false) => Packed::NotFound,
        Some(true) => {
            // Group cells by (subject, element, target).
            let mut groups: BTreeMap<(usize, usize, usize), Vec<Word>> = BTreeMap::new();
            for (ci, &oi) in chosen.iter().enumerate() {
                let o = &opts[ci][oi];
                groups
                    .entry((o.element, cells[ci].0, o.target))
                    .or_default()
                    .push(cells[ci].1.clone());
            }
            let entries = groups
                .into_iter()
                .map(|((ei, i, k), words)| {
                    let part = Clopen::from_admissible(shift, words);
                    TupleEntry {
                        source_index: i,
                        piece: Piece {
                            label: elements[ei].label.clone(),
                            exchange: elements[ei].exchange.restrict(&part),
                        },
                        target_index: k,
                    }
                })
                .collect();
            Packed::Found(TupleCertificate {
                subject: a.to_vec(),
                target: b.to_vec(),
                entries,
            })
        }
    }
}

/// `Some(found)` or `None` when the budget ran out.
fn backtrack(
    idx: usize,
    opts: &[Vec<Opt>],
    live: &mut [Vec<usize>],
    chosen: &mut Vec<usize>,
    b: &[Clopen],
    mode: Mode,
    budget: &mut usize,
) -> Option<bool> {
    if idx == opts.len() {
        if mode == Mode::Tiling {
            let shift = b[0].shift();
            return Some(b.iter().enumerate().all(|(k, bk)| {
                let images = chosen
                    .iter()
                    .enumerate()
                    .filter(|(ci, &oi)| opts[*ci][oi].target == k)
                    .map(|(ci, &oi)| opts[ci][oi].image.clone());
                Clopen::from_admissible(shift, images) == *bk
            }));
        }
        return Some(true);
    }
    let candidates = live[idx].clone();
    for oi in candidates {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let o = &opts[idx][oi];
        let mut removed: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut dead = false;
        for (j, later) in live.iter_mut().enumerate().skip(idx + 1) {
            let (keep, drop): (Vec<usize>, Vec<usize>) = later.iter().partition(|&&p| {
                let q = &opts[j][p];
                q.target != o.target || !q.image.comparable(&o.image)
            });
            if !drop.is_empty() {
                *later = keep;
                removed.push((j, drop));
                if later.is_empty() {
                    dead = true;
                    break;
                }
            }
        }
        if !dead {
            chosen.push(oi);
            match backtrack(idx + 1, opts, live, chosen, b, mode, budget) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            chosen.pop();
        }
        for (j, drop) in removed {
            live[j].extend(drop);
            live[j].sort_unstable();
        }
    }
    Some(false)
}

/// `K ≺ V` with default settings.
pub fn search_compare(g: &GroupoidPresentation, k: &Clopen, v: &Clopen, bound: usize) -> SearchOutcome<Transporter> {
    Explorer::new(g, bound).compare(k, v)
}

/// `a ≼ b` with default settings.
pub fn search_compare_tuple(g: &GroupoidPresentation, a: &[Clopen], b: &[Clopen], bound: usize) -> SearchOutcome<TupleCertificate> {
    Explorer::new(g, bound).compare_tuple(a, b)
}

pub fn search_paradoxical(g: &GroupoidPresentation, o: &Clopen, bound: usize) -> SearchOutcome<Paradox> {
    Explorer::new(g, bound).paradoxical(o)
}

pub fn purely_infinite_scan(g: &GroupoidPresentation, depth: usize, bound: usize) -> ScanReport {
    Explorer::new(g, bound).purely_infinite_scan(depth)
}

pub fn orbit_saturation(g: &GroupoidPresentation, v: &Clopen, bound: usize) -> Clopen {
    Explorer::new(g, bound).saturation(v)
}

pub fn minimal_check(g: &GroupoidPresentation, depth: usize, bound: usize) -> MinimalReport {
    Explorer::new(g, bound).minimal_check(depth)
}

pub fn n_filling_check(g: &GroupoidPresentation, sets: &[Clopen], bound: usize) -> FillingOutcome {
    Explorer::new(g, bound).n_filling(sets)
}

pub fn locally_contracting_witness(g: &GroupoidPresentation, v: &Clopen, bound: usize) -> ContractOutcome {
    Explorer::new(g, bound).locally_contracting(v)
}

/// True when an invariant probability measure exists at `depth`; used by
/// tests and reports that need a sample measure.
pub fn sample_measure(g: &GroupoidPresentation, depth: usize) -> Option<measures::MeasureVector> {
    match measures::invariance_lp(g, depth) {
        LpResult::Feasible(m) => Some(m),
        LpResult::Infeasible(_) => None,
    }
}
