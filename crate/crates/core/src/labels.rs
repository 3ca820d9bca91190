//! Piece labels as expressions over the generators, and the check that a
//! labelled bisection lies in the groupoid they generate.
//!
//! Grammar: `sum := product (" + " product)*`,
//! `product := factor ("*" factor)*`, `factor := atom ("^-1")*` and
//! `atom := "id" | letter | "(" sum ")"`. A product composes right to left;
//! a sum stands for a bisection agreeing locally with one of its summands.

use crate::bisections::{GroupoidPresentation, PrefixExchange};
use crate::symbolic::{Clopen, Word};

/// Alternatives beyond this many are refused rather than expanded.
pub const MAX_ALTERNATIVES: usize = 4096;

struct Parser<'a> {
    g: &'a GroupoidPresentation,
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn error(&self, message: &str) -> String {
        format!("label {:?} at byte {}: {message}", self.text, self.pos)
    }

    fn sum(&mut self) -> Result<Vec<PrefixExchange>, String> {
        let mut out = self.product()?;
        while self.eat(" + ") {
            out.extend(self.product()?);
            if out.len() > MAX_ALTERNATIVES {
                return Err(self.error("too many alternatives"));
            }
        }
        Ok(out)
    }

    fn product(&mut self) -> Result<Vec<PrefixExchange>, String> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            let inner = self.factor()?;
            if acc.len() * inner.len() > MAX_ALTERNATIVES {
                return Err(self.error("too many alternatives"));
            }
            let mut next = Vec::with_capacity(acc.len() * inner.len());
            for a in &acc {
                for b in &inner {
                    let c = PrefixExchange::compose_capped(a, b, self.g.max_pair_len()).map_err(|e| self.error(&e.to_string()))?;
                    next.push(c);
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Vec<PrefixExchange>, String> {
        let mut out = if self.eat("(") {
            let inner = self.sum()?;
            if !self.eat(")") {
                return Err(self.error("expected ')'"));
            }
            inner
        } else {
            let end = self.rest().find(['(', ')', '*', ' ', '^']).unwrap_or(self.rest().len());
            let name = &self.rest()[..end];
            let e = if name == "id" {
                self.g.identity()
            } else {
                self.g.generator(name).cloned().ok_or_else(|| self.error(&format!("unknown generator {name:?}")))?
            };
            self.pos += end;
            vec![e]
        };
        while self.eat("^-1") {
            out = out.iter().map(PrefixExchange::invert).collect();
        }
        Ok(out)
    }
}

/// The bisections a label stands for, one per choice of summands.
pub fn alternatives(g: &GroupoidPresentation, label: &str) -> Result<Vec<PrefixExchange>, String> {
    let mut p = Parser { g, text: label, pos: 0 };
    let out = p.sum()?;
    if p.pos != label.len() {
        return Err(p.error("trailing input"));
    }
    Ok(out)
}

fn agrees(alts: &[PrefixExchange], u: &Word, v: &Word, deepest: usize) -> bool {
    let shift = alts[0].shift();
    let cylinder = Clopen::from_admissible(shift, [u.clone()]);
    let single = PrefixExchange::from_valid(shift, vec![(u.clone(), v.clone())]);
    if alts.iter().any(|a| a.restrict(&cylinder).same_map(&single)) {
        return true;
    }
    // Below the longest source word every alternative is a single
    // replacement on the cylinder, so splitting further cannot help.
    u.len() < deepest && shift.follower_symbols(u).all(|s| agrees(alts, &u.child(s), &v.child(s), deepest))
}

/// Checks that `e` agrees, near every point of its source, with one of the
/// bisections `label` stands for.
pub fn check_membership(g: &GroupoidPresentation, label: &str, e: &PrefixExchange) -> Result<(), String> {
    if e.shift() != g.shift() {
        return Err("piece lives on another subshift".into());
    }
    let alts = alternatives(g, label)?;
    let deepest = alts.iter().map(PrefixExchange::max_source_len).max().unwrap_or(0);
    match e.pairs().iter().find(|(u, v)| !agrees(&alts, u, v, deepest)) {
        None => Ok(()),
        Some((u, v)) => Err(format!(
            "pair {} -> {} is not given by {label:?}",
            g.shift().format_word(u),
            g.shift().format_word(v)
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn products_compose_right_to_left() {
        let g = catalog::o2_action();
        let [e] = &alternatives(&g, "phi*psi").unwrap()[..] else { panic!() };
        let psi = g.generator("psi").unwrap();
        let phi = g.generator("phi").unwrap();
        assert!(e.same_map(&PrefixExchange::compose(phi, psi).unwrap()));
        let [inv] = &alternatives(&g, "(phi*psi)^-1").unwrap()[..] else { panic!() };
        assert!(inv.same_map(&e.invert()));
        let [l] = &alternatives(&g, "psi^-1").unwrap()[..] else { panic!() };
        assert!(l.same_map(&psi.invert()));
        assert_eq!(alternatives(&g, "(phi + psi)*(id + phi)").unwrap().len(), 4);
        assert!(alternatives(&g, "rho").is_err());
        assert!(alternatives(&g, "(phi").is_err());
    }

    #[test]
    fn membership_splits_cylinders() {
        let g = catalog::o2_action();
        let s = g.shift();
        // 00 -> 10 comes from phi and 01 -> 01 from id.
        let e = PrefixExchange::parse(s, &[("00", "10"), ("01", "01")]).unwrap();
        check_membership(&g, "phi + id", &e).unwrap();
        assert!(check_membership(&g, "phi", &e).is_err());
        let swap = PrefixExchange::parse(s, &[("0", "1")]).unwrap();
        check_membership(&g, "id + phi", &swap).unwrap();
        let t = catalog::trivial_action(2).unwrap();
        assert!(check_membership(&t, "id", &swap).is_err());
    }

    #[test]
    fn membership_needs_both_summands() {
        use crate::bisections::{Generator, PresentationKind};
        let s = crate::symbolic::Subshift::full(2).unwrap();
        let gen = |name: &str, pairs: &[(&str, &str)]| Generator {
            name: name.into(),
            exchange: PrefixExchange::parse(&s, pairs).unwrap(),
        };
        let g = GroupoidPresentation::new(
            s.clone(),
            vec![gen("a", &[("00", "00"), ("01", "1"), ("1", "01")]), gen("b", &[("00", "1"), ("01", "01"), ("1", "00")])],
            PresentationKind::GroupAction,
        )
        .unwrap();
        // a fixes N_00 and b fixes N_01, so together they fix N_0.
        let fix = PrefixExchange::parse(&s, &[("0", "0")]).unwrap();
        check_membership(&g, "a + b", &fix).unwrap();
        assert!(check_membership(&g, "a", &fix).is_err());
        assert!(check_membership(&g, "b", &fix).is_err());
    }
}
