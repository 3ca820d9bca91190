//! Invariant probability measures at cylinder depth.
//!
//! A depth-`D` measure vector assigns a nonnegative rational to every
//! admissible word of length `D`; coarser cylinders are measured by summing
//! their depth-`D` descendants. Invariance under a generator pair `(u, v)`
//! reads `μ(N_{u·t}) = μ(N_{v·t})` for every continuation `t`, and all such
//! equations expressible at depth `D` make up the invariance program. All
//! arithmetic is exact.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::bisections::GroupoidPresentation;
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Rational, Relation};
use crate::symbolic::{Clopen, Subshift, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("measure vector must assign a value to every depth-{0} word exactly once")]
    Domain(usize),
    #[error("negative mass on {0:?}")]
    Negative(String),
}

/// Depth-`D` rational measure of the cylinders.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVector {
    shift: Subshift,
    depth: usize,
    values: BTreeMap<Word, Rational>,
}

impl MeasureVector {
    pub fn new(shift: &Subshift, depth: usize, values: BTreeMap<Word, Rational>) -> Result<Self, MeasureError> {
        let words = shift.words_of_length(depth);
        if words.len() != values.len() || words.iter().any(|w| !values.contains_key(w)) {
            return Err(MeasureError::Domain(depth));
        }
        if let Some((w, _)) = values.iter().find(|(_, v)| v.is_negative()) {
            return Err(MeasureError::Negative(shift.format_word(w)));
        }
        Ok(MeasureVector {
            shift: shift.clone(),
            depth,
            values,
        })
    }

    /// Uniform Bernoulli measure `μ(N_w) = k^{-|w|}` on a full shift.
    pub fn uniform_bernoulli(shift: &Subshift, depth: usize) -> Option<Self> {
        if !shift.is_full_shift() {
            return None;
        }
        let words = shift.words_of_length(depth);
        let p = Rational::one() / Rational::from_integer((words.len() as i64).into());
        let values = words.into_iter().map(|w| (w, p.clone())).collect();
        Some(MeasureVector {
            shift: shift.clone(),
            depth,
            values,
        })
    }

    pub fn shift(&self) -> &Subshift {
        &self.shift
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &BTreeMap<Word, Rational> {
        &self.values
    }

    pub fn total(&self) -> Rational {
        self.values.values().fold(Rational::zero(), |a, b| a + b)
    }

    /// `μ(N_w)`, or `None` when `w` is deeper than the vector.
    pub fn cylinder(&self, w: &Word) -> Option<Rational> {
        if w.len() > self.depth {
            return None;
        }
        Some(
            self.shift
                .extensions(w, self.depth - w.len())
                .iter()
                .fold(Rational::zero(), |acc, x| acc + &self.values[x]),
        )
    }

    /// `μ(C)`, or `None` when `C` needs words deeper than the vector.
    pub fn evaluate(&self, c: &Clopen) -> Option<Rational> {
        c.words()
            .iter()
            .try_fold(Rational::zero(), |acc, w| Some(acc + self.cylinder(w)?))
    }

    pub fn evaluate_all(&self, cs: &[Clopen]) -> Option<Rational> {
        cs.iter()
            .try_fold(Rational::zero(), |acc, c| Some(acc + self.evaluate(c)?))
    }
}

/// Smallest depth at which every generator equation has some instance.
pub fn depth_floor(g: &GroupoidPresentation) -> usize {
    g.max_stretch().max(1)
}

/// The invariance program at one depth: one variable per depth-`D` word.
#[derive(Debug, Clone)]
pub struct InvarianceSystem {
    pub depth: usize,
    pub vars: Vec<Word>,
    index: HashMap<Word, usize>,
    pub lp: LinearProgram,
}

impl InvarianceSystem {
    pub fn build(g: &GroupoidPresentation, depth: usize) -> Self {
        let shift = g.shift();
        let vars = shift.words_of_length(depth);
        let index: HashMap<Word, usize> = vars.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let mut constraints = vec![Constraint::new(
            "mass",
            (0..vars.len()).map(|j| (j, Rational::one())).collect(),
            Relation::Eq,
            Rational::one(),
        )];
        let mut gens: Vec<_> = g.generators().iter().collect();
        gens.sort_by(|a, b| a.name.cmp(&b.name));
        for gen in gens {
            for (u, v) in gen.exchange.pairs() {
                let longest = u.len().max(v.len());
                if longest > depth || u == v {
                    continue;
                }
                for ut in shift.extensions(u, depth - longest) {
                    let tail = ut.strip_prefix(u).expect("extension").to_vec();
                    let vt = v.concat(&tail);
                    let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
                    for w in shift.extensions(&ut, depth - ut.len()) {
                        *coeffs.entry(index[&w]).or_insert_with(Rational::zero) += Rational::one();
                    }
                    for w in shift.extensions(&vt, depth - vt.len()) {
                        *coeffs.entry(index[&w]).or_insert_with(Rational::zero) -= Rational::one();
                    }
                    let terms: Vec<_> = coeffs.into_iter().filter(|(_, a)| !a.is_zero()).collect();
                    if terms.is_empty() {
                        continue;
                    }
                    constraints.push(Constraint::new(
                        format!(
                            "{}:{}->{}",
                            gen.name,
                            shift.format_word(&ut),
                            shift.format_word(&vt)
                        ),
                        terms,
                        Relation::Eq,
                        Rational::zero(),
                    ));
                }
            }
        }
        InvarianceSystem {
            depth,
            lp: LinearProgram {
                num_vars: vars.len(),
                constraints,
            },
            vars,
            index,
        }
    }

    pub fn var(&self, w: &Word) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Linear form `Σ μ(a_i)` over depth-`D` variables.
    fn form(&self, shift: &Subshift, sets: &[Clopen], sign: i64, acc: &mut BTreeMap<usize, Rational>) -> bool {
        for c in sets {
            let Ok(cells) = c.refine(self.depth) else {
                return false;
            };
            for w in cells {
                debug_assert!(shift.is_admissible(&w));
                *acc.entry(self.index[&w]).or_insert_with(Rational::zero) += lp::int(sign);
            }
        }
        true
    }

    fn to_measure(&self, shift: &Subshift, x: Vec<Rational>) -> MeasureVector {
        MeasureVector {
            shift: shift.clone(),
            depth: self.depth,
            values: self.vars.iter().cloned().zip(x).collect(),
        }
    }
}

/// Farkas certificate over named invariance constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFarkas {
    pub depth: usize,
    pub multipliers: Vec<(String, Rational)>,
}

impl MeasureFarkas {
    /// Rebuilds the depth-`D` program from the presentation and re-checks the
    /// combination.
    pub fn check(&self, g: &GroupoidPresentation) -> Result<(), String> {
        let sys = InvarianceSystem::build(g, self.depth);
        let by_name: HashMap<&str, usize> = sys
            .lp
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.as_str(), i))
            .collect();
        let multipliers = self
            .multipliers
            .iter()
            .map(|(n, y)| {
                by_name
                    .get(n.as_str())
                    .map(|&i| (i, y.clone()))
                    .ok_or_else(|| format!("unknown constraint {n:?}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        lp::Farkas { multipliers }.check(&sys.lp)
    }
}

#[derive(Debug, Clone)]
pub enum LpResult {
    Feasible(MeasureVector),
    Infeasible(MeasureFarkas),
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpResult::Feasible(_))
    }
}

/// Solves the invariance program at `depth`, raised to [`depth_floor`].
pub fn invariance_lp(g: &GroupoidPresentation, depth: usize) -> LpResult {
    let depth = depth.max(depth_floor(g));
    let sys = InvarianceSystem::build(g, depth);
    match lp::solve(&sys.lp, None) {
        LpOutcome::Optimal { x, .. } => LpResult::Feasible(sys.to_measure(g.shift(), x)),
        LpOutcome::Infeasible(f) => LpResult::Infeasible(MeasureFarkas {
            depth,
            multipliers: f
                .multipliers
                .into_iter()
                .map(|(i, y)| (sys.lp.constraints[i].name.clone(), y))
                .collect(),
        }),
        LpOutcome::Unbounded => unreachable!("feasibility program has no objective"),
    }
}

/// Whether `m` is a probability vector satisfying every invariance equation
/// expressible at its depth.
pub fn check_invariant(g: &GroupoidPresentation, m: &MeasureVector) -> bool {
    if m.shift() != g.shift() || m.total() != Rational::one() || m.values.values().any(|v| v.is_negative()) {
        return false;
    }
    let sys = InvarianceSystem::build(g, m.depth);
    let x: Vec<Rational> = sys.vars.iter().map(|w| m.values[w].clone()).collect();
    sys.lp.constraints.iter().all(|c| c.holds(&x))
}

/// An invariant measure violating `Σ μ(subjects) ≤ Σ μ(targets)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureWitness {
    pub measure: MeasureVector,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Searches for an invariant measure with `Σ μ(a_i) > Σ μ(b_k)`.
///
/// The uniform Bernoulli measure is tried first on full shifts; otherwise the
/// gap `Σ μ(a) - Σ μ(b)` is maximized over the invariance polytope and the
/// optimal vertex returned when the optimum is positive.
pub fn refute_tuple(g: &GroupoidPresentation, a: &[Clopen], b: &[Clopen], depth: usize) -> Option<MeasureWitness> {
    let deepest = a.iter().chain(b).map(Clopen::depth).max().unwrap_or(0);
    let depth = depth.max(depth_floor(g)).max(deepest);
    let witness = |m: MeasureVector| {
        let lhs = m.evaluate_all(a)?;
        let rhs = m.evaluate_all(b)?;
        (lhs > rhs).then_some(MeasureWitness { measure: m, lhs, rhs })
    };
    if let Some(u) = MeasureVector::uniform_bernoulli(g.shift(), depth) {
        if check_invariant(g, &u) {
            if let Some(w) = witness(u) {
                return Some(w);
            }
        }
    }
    let sys = InvarianceSystem::build(g, depth);
    let mut form = BTreeMap::new();
    if !sys.form(g.shift(), a, 1, &mut form) || !sys.form(g.shift(), b, -1, &mut form) {
        return None;
    }
    let objective: Vec<(usize, Rational)> = form.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    match lp::solve(&sys.lp, Some(&objective)) {
        LpOutcome::Optimal { x, objective } if objective.is_positive() => witness(sys.to_measure(g.shift(), x)),
        _ => None,
    }
}

/// Searches for an invariant measure with `μ(K) > μ(V)`.
pub fn measure_refute(g: &GroupoidPresentation, k: &Clopen, v: &Clopen, depth: usize) -> Option<MeasureWitness> {
    refute_tuple(g, std::slice::from_ref(k), std::slice::from_ref(v), depth)
}

/// Outcome of the search for an obstruction to invariant measures.
#[derive(Debug, Clone)]
pub enum EmptinessOutcome {
    /// Infeasible at the recorded depth.
    Certificate(MeasureFarkas),
    /// Feasible at every depth tried; the last sample is kept.
    Unknown(MeasureVector),
}

/// Tries depths `1..=max_depth` and returns the first Farkas certificate.
pub fn mg_empty_certificate(g: &GroupoidPresentation, max_depth: usize) -> EmptinessOutcome {
    let mut last = None;
    for d in 1..=max_depth.max(1) {
        if d < depth_floor(g) {
            continue;
        }
        match invariance_lp(g, d) {
            LpResult::Infeasible(f) => return EmptinessOutcome::Certificate(f),
            LpResult::Feasible(m) => last = Some(m),
        }
    }
    match last {
        Some(m) => EmptinessOutcome::Unknown(m),
        None => match invariance_lp(g, depth_floor(g)) {
            LpResult::Infeasible(f) => EmptinessOutcome::Certificate(f),
            LpResult::Feasible(m) => EmptinessOutcome::Unknown(m),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::lp::rat;

    #[test]
    fn o2_has_no_invariant_measure_at_depth_two() {
        let g = catalog::o2_action();
        assert!(invariance_lp(&g, 1).is_feasible());
        match invariance_lp(&g, 2) {
            LpResult::Infeasible(f) => {
                assert_eq!(f.depth, 2);
                f.check(&g).unwrap();
            }
            LpResult::Feasible(m) => panic!("unexpected measure {m:?}"),
        }
    }

    #[test]
    fn full_shift_deaconu_renault_is_infeasible_at_depth_one() {
        let g = catalog::full_shift_dr(2).unwrap();
        match mg_empty_certificate(&g, 2) {
            EmptinessOutcome::Certificate(f) => {
                assert_eq!(f.depth, 1);
                f.check(&g).unwrap();
            }
            EmptinessOutcome::Unknown(_) => panic!("expected certificate"),
        }
    }

    #[test]
    fn trivial_action_keeps_bernoulli() {
        let g = catalog::trivial_action(2).unwrap();
        for d in 1..=4 {
            let u = MeasureVector::uniform_bernoulli(g.shift(), d).unwrap();
            assert!(check_invariant(&g, &u));
            assert!(invariance_lp(&g, d).is_feasible());
        }
        assert!(matches!(mg_empty_certificate(&g, 6), EmptinessOutcome::Unknown(_)));
    }

    #[test]
    fn bernoulli_fails_on_o2() {
        let g = catalog::o2_action();
        let u = MeasureVector::uniform_bernoulli(g.shift(), 2).unwrap();
        assert!(!check_invariant(&g, &u));
        let s = g.shift();
        assert_eq!(u.cylinder(&s.parse_word("11").unwrap()), Some(rat(1, 4)));
        assert_eq!(u.cylinder(&s.parse_word("0").unwrap()), Some(rat(1, 2)));
    }

    #[test]
    fn mass_must_be_one() {
        let g = catalog::trivial_action(2).unwrap();
        let s = g.shift();
        let values = s.words_of_length(1).into_iter().map(|w| (w, rat(1, 3))).collect();
        let m = MeasureVector::new(s, 1, values).unwrap();
        assert!(!check_invariant(&g, &m));
    }

    #[test]
    fn refutations() {
        let t = catalog::trivial_action(2).unwrap();
        let s = t.shift();
        let whole = Clopen::whole(s);
        let zero = Clopen::parse(s, "0").unwrap();
        let w = measure_refute(&t, &whole, &zero, 3).expect("bernoulli refutes");
        assert_eq!(w.measure, MeasureVector::uniform_bernoulli(s, 3).unwrap());
        assert_eq!((w.lhs, w.rhs), (rat(1, 1), rat(1, 2)));
        assert!(measure_refute(&t, &zero, &whole, 3).is_none());

        let o2 = catalog::o2_action();
        let s = o2.shift();
        assert!(measure_refute(&o2, &Clopen::whole(s), &Clopen::parse(s, "00").unwrap(), 3).is_none());
    }

    #[test]
    fn lp_optimum_used_when_bernoulli_is_not_invariant() {
        // flip(3) swaps the first symbols 0 and 1 and fixes 2. Bernoulli gives
        // N_2 and N_0 equal mass, so the gap has to come from an LP vertex.
        let g = catalog::flip(3).unwrap();
        let s = g.shift();
        let w = measure_refute(&g, &Clopen::parse(s, "2").unwrap(), &Clopen::parse(s, "0").unwrap(), 2)
            .expect("vertex witness");
        assert!(check_invariant(&g, &w.measure));
        assert!(w.lhs > w.rhs);
    }
}
