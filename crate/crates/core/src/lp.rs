//! Exact rational simplex with Bland's rule.
//!
//! Solves `max c·x` subject to linear rows and `x ≥ 0`. Infeasible systems
//! come back with a Farkas certificate read off the final phase-one duals.
//! A certificate assigns a multiplier `y_i` to each row, written as
//! `a_i·x - b_i (≤|=|≥) 0`, with `y_i ≤ 0` on `≤` rows, `y_i ≥ 0` on `≥` rows
//! and any sign on equalities, such that `Σ y_i a_i ≤ 0` coordinatewise and
//! `Σ y_i b_i = 1`. Every feasible `x` would make `Σ y_i (a_i·x - b_i)` both
//! nonnegative and at most `-1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(name: impl Into<String>, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self
            .terms
            .iter()
            .fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
}

/// Nonzero row multipliers proving infeasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Farkas {
    pub multipliers: Vec<(usize, Rational)>,
}

impl Farkas {
    /// Re-derives the contradiction by direct evaluation.
    pub fn check(&self, lp: &LinearProgram) -> Result<(), String> {
        let mut combo = vec![Rational::zero(); lp.num_vars];
        let mut rhs = Rational::zero();
        for (i, y) in &self.multipliers {
            let row = lp
                .constraints
                .get(*i)
                .ok_or_else(|| format!("multiplier for missing row {i}"))?;
            let sign_ok = match row.relation {
                Relation::Le => !y.is_positive(),
                Relation::Ge => !y.is_negative(),
                Relation::Eq => true,
            };
            if !sign_ok {
                return Err(format!("multiplier on row {:?} has the wrong sign", row.name));
            }
            for (j, a) in &row.terms {
                combo[*j] += y * a;
            }
            rhs += y * &row.rhs;
        }
        if let Some(j) = combo.iter().position(|c| c.is_positive()) {
            return Err(format!("combined coefficient of variable {j} is positive"));
        }
        if !rhs.is_positive() {
            return Err("combined right-hand side is not positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, objective: Rational },
    Infeasible(Farkas),
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced costs, last entry is minus the objective value.
    obj: Vec<Rational>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.ncols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                self.obj[j] -= &f * &prow[j];
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes with Bland's rule over columns allowed by `enter`.
    /// Returns false when unbounded.
    fn run(&mut self, enter: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let Some(c) = (0..self.ncols).find(|&j| enter(j) && self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Maximizes `objective` (or just finds a vertex when `None`).
pub fn solve(lp: &LinearProgram, objective: Option<&[(usize, Rational)]>) -> LpOutcome {
    let n = lp.num_vars;
    let m = lp.constraints.len();
    // Normalize to nonnegative right-hand sides.
    let mut sign = Vec::with_capacity(m);
    let mut rel = Vec::with_capacity(m);
    for c in &lp.constraints {
        let flip = c.rhs.is_negative();
        sign.push(if flip { -1i64 } else { 1 });
        rel.push(match (c.relation, flip) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        });
    }
    let n_slack = rel.iter().filter(|r| **r != Relation::Eq).count();
    let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;
    let mut rows = vec![vec![Rational::zero(); ncols + 1]; m];
    let mut basis = vec![0; m];
    let mut init_col = vec![0; m];
    let mut init_cost = vec![Rational::zero(); m];
    let (mut next_slack, mut next_art) = (n, art_start);
    for (i, c) in lp.constraints.iter().enumerate() {
        let s = int(sign[i]);
        for (j, a) in &c.terms {
            rows[i][*j] += a * &s;
        }
        rows[i][ncols] = &c.rhs * &s;
        match rel[i] {
            Relation::Le => {
                rows[i][next_slack] = Rational::one();
                basis[i] = next_slack;
                init_col[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                rows[i][next_slack] = -Rational::one();
                next_slack += 1;
                rows[i][next_art] = Rational::one();
                basis[i] = next_art;
                init_col[i] = next_art;
                init_cost[i] = Rational::one();
                next_art += 1;
            }
            Relation::Eq => {
                rows[i][next_art] = Rational::one();
                basis[i] = next_art;
                init_col[i] = next_art;
                init_cost[i] = Rational::one();
                next_art += 1;
            }
        }
    }
    // Phase one: minimize the sum of artificials.
    let mut obj = vec![Rational::zero(); ncols + 1];
    for j in art_start..ncols {
        obj[j] = Rational::one();
    }
    for i in 0..m {
        if basis[i] >= art_start {
            for j in 0..=ncols {
                if !rows[i][j].is_zero() {
                    let v = rows[i][j].clone();
                    obj[j] -= v;
                }
            }
        }
    }
    let mut t = Tableau {
        rows,
        basis,
        obj,
        ncols,
    };
    t.run(&|_| true);
    let infeasibility = -t.obj[ncols].clone();
    if infeasibility.is_positive() {
        let mut multipliers = Vec::new();
        for i in 0..m {
            let y = &init_cost[i] - &t.obj[init_col[i]];
            if !y.is_zero() {
                multipliers.push((i, y * int(sign[i]) / &infeasibility));
            }
        }
        return LpOutcome::Infeasible(Farkas { multipliers });
    }
    // Drive artificials out of the basis, dropping redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= art_start {
            if let Some(c) = (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, c);
                i += 1;
            } else {
                t.rows.remove(i);
                t.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }
    let mut cost = vec![Rational::zero(); ncols];
    if let Some(objective) = objective {
        for (j, a) in objective {
            cost[*j] -= a;
        }
        let mut obj = vec![Rational::zero(); ncols + 1];
        obj[..ncols].clone_from_slice(&cost);
        for (r, &b) in t.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for j in 0..=ncols {
                if !t.rows[r][j].is_zero() {
                    obj[j] -= &cost[b] * &t.rows[r][j];
                }
            }
        }
        t.obj = obj;
        if !t.run(&|j| j < art_start) {
            return LpOutcome::Unbounded;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(r).clone();
        }
    }
    let objective_value = objective
        .map(|o| o.iter().fold(Rational::zero(), |acc, (j, a)| acc + a * &x[*j]))
        .unwrap_or_else(Rational::zero);
    LpOutcome::Optimal {
        x,
        objective: objective_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, terms: &[(usize, i64)], rel: Relation, rhs: i64) -> Constraint {
        Constraint::new(
            name,
            terms.iter().map(|&(j, a)| (j, int(a))).collect(),
            rel,
            int(rhs),
        )
    }

    #[test]
    fn infeasible_equalities_give_checked_farkas() {
        // x0 = x1, x0 = 2 x1, x0 + x1 = 1
        let lp = LinearProgram {
            num_vars: 2,
            constraints: vec![
                row("a", &[(0, 1), (1, -1)], Relation::Eq, 0),
                row("b", &[(0, 1), (1, -2)], Relation::Eq, 0),
                row("mass", &[(0, 1), (1, 1)], Relation::Eq, 1),
            ],
        };
        match solve(&lp, None) {
            LpOutcome::Infeasible(f) => f.check(&lp).unwrap(),
            o => panic!("expected infeasible, got {o:?}"),
        }
    }

    #[test]
    fn optimum_of_small_program() {
        // max x0 + x1 s.t. x0 + 2 x1 <= 4, 3 x0 + x1 <= 6
        let lp = LinearProgram {
            num_vars: 2,
            constraints: vec![
                row("p", &[(0, 1), (1, 2)], Relation::Le, 4),
                row("q", &[(0, 3), (1, 1)], Relation::Le, 6),
            ],
        };
        match solve(&lp, Some(&[(0, int(1)), (1, int(1))])) {
            LpOutcome::Optimal { x, objective } => {
                assert_eq!(objective, rat(14, 5));
                assert!(lp.constraints.iter().all(|c| c.holds(&x)));
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn unbounded_is_detected() {
        let lp = LinearProgram {
            num_vars: 2,
            constraints: vec![row("p", &[(0, 1), (1, -1)], Relation::Le, 1)],
        };
        assert!(matches!(solve(&lp, Some(&[(1, int(1))])), LpOutcome::Unbounded));
    }

    #[test]
    fn ge_rows_and_negative_rhs() {
        // x0 >= 2, -x0 - x1 >= -3  (x0 + x1 <= 3), x1 >= 2 is infeasible
        let lp = LinearProgram {
            num_vars: 2,
            constraints: vec![
                row("a", &[(0, 1)], Relation::Ge, 2),
                row("b", &[(0, -1), (1, -1)], Relation::Ge, -3),
                row("c", &[(1, 1)], Relation::Ge, 2),
            ],
        };
        match solve(&lp, None) {
            LpOutcome::Infeasible(f) => f.check(&lp).unwrap(),
            o => panic!("{o:?}"),
        }
        let mut ok = lp.clone();
        ok.constraints[2] = row("c", &[(1, 1)], Relation::Ge, 1);
        match solve(&ok, None) {
            LpOutcome::Optimal { x, .. } => assert!(ok.constraints.iter().all(|c| c.holds(&x))),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = LinearProgram {
            num_vars: 3,
            constraints: vec![
                row("a", &[(0, 1), (1, -1)], Relation::Eq, 0),
                row("a2", &[(0, 2), (1, -2)], Relation::Eq, 0),
                row("mass", &[(0, 1), (1, 1), (2, 1)], Relation::Eq, 1),
            ],
        };
        match solve(&lp, Some(&[(0, int(1))])) {
            LpOutcome::Optimal { x, objective } => {
                assert_eq!(objective, rat(1, 2));
                assert!(lp.constraints.iter().all(|c| c.holds(&x)));
            }
            o => panic!("{o:?}"),
        }
    }
}
