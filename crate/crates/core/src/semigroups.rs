//! The type semigroup on clopen tuples and finitely presented preordered
//! monoids.
//!
//! Tuples add by concatenation and are compared with the tuple search of
//! [`crate::comparison`]. The abstract layer keeps finitely many generators
//! with inequalities `Σ c_i g_i ≤ Σ d_i g_i` and asks whether a finite state
//! normalized at one generator exists, which is a rational LP.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::bisections::GroupoidPresentation;
use crate::comparison::{Explorer, SearchOutcome, TupleCertificate};
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Rational, Relation};
use crate::symbolic::{Clopen, Subshift, SymbolicError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemigroupError {
    #[error("tuple entries live on different subshifts")]
    ShiftMismatch,
    #[error("the tuple is empty")]
    EmptyTuple,
    #[error("n must be at least 1")]
    ZeroMultiple,
    #[error("a monoid presentation needs at least one generator")]
    NoGenerators,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("duplicate generator `{0}`")]
    DuplicateGenerator(String),
    #[error("relation has {got} coefficients, expected {expected}")]
    Arity { got: usize, expected: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// A finite list of clopens over one subshift; entries may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ClopenTuple {
    entries: Vec<Clopen>,
}

impl ClopenTuple {
    pub fn new(entries: Vec<Clopen>) -> Result<Self, SemigroupError> {
        if let Some(first) = entries.first() {
            if entries.iter().any(|c| c.shift() != first.shift()) {
                return Err(SemigroupError::ShiftMismatch);
            }
        }
        Ok(ClopenTuple { entries })
    }

    pub fn empty() -> Self {
        ClopenTuple { entries: Vec::new() }
    }

    pub fn single(c: Clopen) -> Self {
        ClopenTuple { entries: vec![c] }
    }

    /// Entries separated by `|`, each a comma-separated list of words.
    pub fn parse(shift: &Subshift, text: &str) -> Result<Self, SemigroupError> {
        let entries = text
            .split('|')
            .map(|part| Clopen::parse(shift, part))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ClopenTuple { entries })
    }

    pub fn entries(&self) -> &[Clopen] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when every entry is empty (including the tuple of length zero).
    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(Clopen::is_empty)
    }

    /// `n·a`, the concatenation of `n` copies.
    pub fn times(&self, n: usize) -> ClopenTuple {
        ClopenTuple {
            entries: (0..n).flat_map(|_| self.entries.iter().cloned()).collect(),
        }
    }

    pub fn display(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|c| {
                if c.is_empty() {
                    "{}".to_string()
                } else {
                    c.display_words().join(",")
                }
            })
            .collect();
        format!("({})", parts.join(" | "))
    }
}

pub fn tuple_add(a: &ClopenTuple, b: &ClopenTuple) -> Result<ClopenTuple, SemigroupError> {
    ClopenTuple::new(a.entries.iter().chain(&b.entries).cloned().collect())
}

pub fn tuple_leq(g: &GroupoidPresentation, a: &ClopenTuple, b: &ClopenTuple, bound: usize) -> SearchOutcome<TupleCertificate> {
    Explorer::new(g, bound).compare_tuple(&a.entries, &b.entries)
}

pub fn type_equivalent(g: &GroupoidPresentation, a: &ClopenTuple, b: &ClopenTuple, bound: usize) -> SearchOutcome<TupleCertificate> {
    Explorer::new(g, bound).type_equivalent(&a.entries, &b.entries)
}

/// `a + a ≤ a`.
pub fn properly_infinite(g: &GroupoidPresentation, a: &ClopenTuple, bound: usize) -> Result<SearchOutcome<TupleCertificate>, SemigroupError> {
    properly_infinite_with(&Explorer::new(g, bound), a)
}

pub fn properly_infinite_with(ex: &Explorer<'_>, a: &ClopenTuple) -> Result<SearchOutcome<TupleCertificate>, SemigroupError> {
    if a.is_empty() {
        return Err(SemigroupError::EmptyTuple);
    }
    Ok(ex.compare_tuple(&a.times(2).entries, &a.entries))
}

/// Outcomes of `(n+1)·a ≤ n·b` and `a ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnperforationReport {
    pub n: usize,
    pub scaled: SearchOutcome<TupleCertificate>,
    pub direct: SearchOutcome<TupleCertificate>,
}

impl UnperforationReport {
    /// The scaled inequality holds while the direct one is refuted.
    pub fn perforation_alarm(&self) -> bool {
        self.scaled.is_verified() && self.direct.is_refuted()
    }
}

pub fn unperforation_probe(
    g: &GroupoidPresentation,
    a: &ClopenTuple,
    b: &ClopenTuple,
    n: usize,
    bound: usize,
) -> Result<UnperforationReport, SemigroupError> {
    if n == 0 {
        return Err(SemigroupError::ZeroMultiple);
    }
    let ex = Explorer::new(g, bound);
    Ok(UnperforationReport {
        n,
        scaled: ex.compare_tuple(&a.times(n + 1).entries, &b.times(n).entries),
        direct: ex.compare_tuple(&a.entries, &b.entries),
    })
}

/// `Σ lhs_i g_i ≤ Σ rhs_i g_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidRelation {
    pub lhs: Vec<u64>,
    pub rhs: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidPresentation {
    generators: Vec<String>,
    relations: Vec<MonoidRelation>,
}

fn format_side(names: &[String], coeffs: &[u64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .zip(names)
        .filter(|(c, _)| **c > 0)
        .map(|(c, n)| if *c == 1 { n.clone() } else { format!("{c}{n}") })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

impl MonoidPresentation {
    pub fn new(generators: Vec<String>, relations: Vec<MonoidRelation>) -> Result<Self, SemigroupError> {
        if generators.is_empty() {
            return Err(SemigroupError::NoGenerators);
        }
        for (i, g) in generators.iter().enumerate() {
            if generators[..i].contains(g) {
                return Err(SemigroupError::DuplicateGenerator(g.clone()));
            }
        }
        for r in &relations {
            for side in [&r.lhs, &r.rhs] {
                if side.len() != generators.len() {
                    return Err(SemigroupError::Arity {
                        got: side.len(),
                        expected: generators.len(),
                    });
                }
            }
        }
        Ok(MonoidPresentation { generators, relations })
    }

    /// A `generators` line followed by one relation per line, such as
    /// `3x <= 2y` or `x + y <= z`. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SemigroupError> {
        let mut generators: Option<Vec<String>> = None;
        let mut relations = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| SemigroupError::Parse { line: i + 1, message };
            if let Some(rest) = line.strip_prefix("generators") {
                if generators.is_some() {
                    return Err(err("generators declared twice".into()));
                }
                generators = Some(rest.split_whitespace().map(str::to_string).collect());
                continue;
            }
            let names = generators
                .as_ref()
                .ok_or_else(|| err("relation before the generators line".into()))?;
            let (l, r) = line
                .split_once("<=")
                .ok_or_else(|| err("expected `<=`".into()))?;
            let lhs = parse_side(names, l).map_err(err)?;
            let rhs = parse_side(names, r).map_err(err)?;
            relations.push(MonoidRelation { lhs, rhs });
        }
        let generators = generators.ok_or(SemigroupError::NoGenerators)?;
        Self::new(generators, relations)
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relations(&self) -> &[MonoidRelation] {
        &self.relations
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    pub fn display_relation(&self, r: &MonoidRelation) -> String {
        format!(
            "{} <= {}",
            format_side(&self.generators, &r.lhs),
            format_side(&self.generators, &r.rhs)
        )
    }
}

impl fmt::Display for MonoidPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "generators {}", self.generators.join(" "))?;
        for r in &self.relations {
            writeln!(f, "{}", self.display_relation(r))?;
        }
        Ok(())
    }
}

fn parse_side(names: &[String], text: &str) -> Result<Vec<u64>, String> {
    let mut out = vec![0u64; names.len()];
    let text = text.trim();
    if text == "0" {
        return Ok(out);
    }
    for term in text.split('+') {
        let term = term.trim();
        let digits = term.chars().take_while(char::is_ascii_digit).count();
        let coeff: u64 = if digits == 0 {
            1
        } else {
            term[..digits].parse().map_err(|_| format!("bad coefficient in `{term}`"))?
        };
        let name = term[digits..].trim().trim_start_matches('*').trim();
        let j = names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| format!("unknown generator `{name}`"))?;
        out[j] += coeff;
    }
    Ok(out)
}

/// Nonnegative multipliers on the relations whose combination
/// `w = Σ λ_r (lhs_r - rhs_r)` is coordinatewise nonnegative with `w_y ≥ 1`.
/// A state `f ≥ 0` with `f(y) = 1` would give `1 ≤ w·f ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFarkas {
    pub target: usize,
    pub multipliers: Vec<(usize, Rational)>,
}

impl StateFarkas {
    pub fn combination(&self, m: &MonoidPresentation) -> Vec<Rational> {
        let mut w = vec![Rational::zero(); m.generators.len()];
        for (r, lambda) in &self.multipliers {
            let rel = &m.relations[*r];
            for (j, wj) in w.iter_mut().enumerate() {
                let diff = Rational::from_integer((rel.lhs[j] as i64 - rel.rhs[j] as i64).into());
                *wj += lambda * diff;
            }
        }
        w
    }

    pub fn check(&self, m: &MonoidPresentation) -> Result<(), String> {
        if self.target >= m.generators.len() {
            return Err("target out of range".into());
        }
        for (r, lambda) in &self.multipliers {
            if *r >= m.relations.len() {
                return Err(format!("relation index {r} out of range"));
            }
            if lambda.is_negative() {
                return Err(format!("negative multiplier on relation {r}"));
            }
        }
        let w = self.combination(m);
        if let Some(j) = w.iter().position(Signed::is_negative) {
            return Err(format!("combined coefficient of `{}` is negative", m.generators[j]));
        }
        if w[self.target] < Rational::one() {
            return Err("combined coefficient of the target is below 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateResult {
    Feasible(Vec<(String, Rational)>),
    Infeasible(StateFarkas),
}

impl StateResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, StateResult::Feasible(_))
    }
}

/// Checks `f ≥ 0`, `f(y) = 1` and every relation.
pub fn is_state(m: &MonoidPresentation, target: usize, f: &[Rational]) -> bool {
    let value = |side: &[u64]| -> Rational {
        side.iter()
            .zip(f)
            .fold(Rational::zero(), |acc, (c, x)| acc + Rational::from_integer((*c).into()) * x)
    };
    f.len() == m.generators.len()
        && f.iter().all(|x| !x.is_negative())
        && f[target] == Rational::one()
        && m.relations.iter().all(|r| value(&r.lhs) <= value(&r.rhs))
}

/// Looks for a finite state normalized at `target`.
pub fn state_lp(m: &MonoidPresentation, target: &str) -> Result<StateResult, SemigroupError> {
    let y = m
        .index(target)
        .ok_or_else(|| SemigroupError::UnknownGenerator(target.to_string()))?;
    let mut constraints: Vec<Constraint> = m
        .relations
        .iter()
        .enumerate()
        .map(|(r, rel)| {
            let terms = (0..m.generators.len())
                .map(|j| (j, Rational::from_integer((rel.lhs[j] as i64 - rel.rhs[j] as i64).into())))
                .filter(|(_, c)| !c.is_zero())
                .collect();
            Constraint::new(format!("r{r}"), terms, Relation::Le, Rational::zero())
        })
        .collect();
    constraints.push(Constraint::new(
        "normalization",
        vec![(y, Rational::one())],
        Relation::Eq,
        Rational::one(),
    ));
    let program = LinearProgram {
        num_vars: m.generators.len(),
        constraints,
    };
    Ok(match lp::solve(&program, None) {
        LpOutcome::Optimal { x, .. } => StateResult::Feasible(m.generators.iter().cloned().zip(x).collect()),
        LpOutcome::Infeasible(f) => {
            let relations = m.relations.len();
            let multipliers = f
                .multipliers
                .into_iter()
                .filter(|(i, c)| *i < relations && !c.is_zero())
                .map(|(i, c)| (i, -c))
                .collect();
            StateResult::Infeasible(StateFarkas { target: y, multipliers })
        }
        LpOutcome::Unbounded => unreachable!("no objective"),
    })
}

#[derive(Debug, Clone)]
pub struct FactsConfig {
    pub max_coefficient: u64,
    pub max_arity: usize,
    /// Also try `a_i + a_j ≤ a_k` and `a_k ≤ a_i + a_j`.
    pub sums: bool,
}

impl Default for FactsConfig {
    fn default() -> Self {
        FactsConfig {
            max_coefficient: 3,
            max_arity: 4,
            sums: true,
        }
    }
}

/// Generators `t0, t1, …` for the given tuples and every small inequality
/// between them that comes with a verified certificate.
pub fn extract_monoid_facts(g: &GroupoidPresentation, tuples: &[ClopenTuple], bound: usize) -> Result<MonoidPresentation, SemigroupError> {
    extract_monoid_facts_with(&Explorer::new(g, bound), tuples, &FactsConfig::default())
}

pub fn extract_monoid_facts_with(ex: &Explorer<'_>, tuples: &[ClopenTuple], config: &FactsConfig) -> Result<MonoidPresentation, SemigroupError> {
    if tuples.is_empty() {
        return Err(SemigroupError::NoGenerators);
    }
    let n = tuples.len();
    let generators: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let holds = |a: &ClopenTuple, b: &ClopenTuple| match ex.compare_tuple(a.entries(), b.entries()) {
        SearchOutcome::Verified(c) => c.verify(),
        _ => false,
    };
    let unit = |i: usize, c: u64| {
        let mut v = vec![0u64; n];
        v[i] += c;
        v
    };
    let mut relations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for c in 1..=config.max_coefficient {
                for d in 1..=config.max_coefficient {
                    if i == j && c <= d {
                        continue;
                    }
                    let a = tuples[i].times(c as usize);
                    let b = tuples[j].times(d as usize);
                    if a.len() > config.max_arity || b.len() > config.max_arity {
                        continue;
                    }
                    if holds(&a, &b) {
                        relations.push(MonoidRelation {
                            lhs: unit(i, c),
                            rhs: unit(j, d),
                        });
                    }
                }
            }
        }
    }
    if config.sums {
        for i in 0..n {
            for j in i + 1..n {
                let sum = tuple_add(&tuples[i], &tuples[j])?;
                if sum.len() > config.max_arity {
                    continue;
                }
                let mut both = unit(i, 1);
                both[j] += 1;
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if holds(&sum, &tuples[k]) {
                        relations.push(MonoidRelation {
                            lhs: both.clone(),
                            rhs: unit(k, 1),
                        });
                    }
                    if holds(&tuples[k], &sum) {
                        relations.push(MonoidRelation {
                            lhs: unit(k, 1),
                            rhs: both.clone(),
                        });
                    }
                }
            }
        }
    }
    MonoidPresentation::new(generators, relations)
}
