//! Prefix exchanges checked pointwise on long finite words.

use ample_comparison::bisections::{enumerate_elements, PrefixExchange, PresentationKind};
use ample_comparison::catalog;
use ample_comparison::symbolic::{Clopen, Word};
use proptest::prelude::*;

const POINT: usize = 24;

/// `e(x)` for a long word `x`, or `None` off the source.
fn at(e: &PrefixExchange, x: &[u8]) -> Option<Vec<u8>> {
    e.pairs().iter().find(|(u, _)| u.symbols().len() <= x.len() && &x[..u.len()] == u.symbols()).map(|(u, v)| {
        let mut out = v.symbols().to_vec();
        out.extend_from_slice(&x[u.len()..]);
        out
    })
}

fn agree(a: &[u8], b: &[u8]) -> bool {
    let n = a.len().min(b.len());
    a[..n] == b[..n]
}

fn elements() -> Vec<PrefixExchange> {
    let mut out = Vec::new();
    for g in [catalog::o2_action(), catalog::full_shift_dr(2).unwrap(), catalog::flip(2).unwrap()] {
        out.extend(enumerate_elements(&g, 4).elements.into_iter().map(|e| e.exchange));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn composition_is_pointwise(i in 0usize..1000, j in 0usize..1000, x in prop::collection::vec(0u8..2, POINT)) {
        let els = elements();
        let (a, b) = (&els[i % els.len()], &els[j % els.len()]);
        prop_assume!(a.shift() == b.shift());
        let ab = PrefixExchange::compose(a, b).unwrap();
        let direct = at(b, &x).and_then(|y| at(a, &y));
        match (at(&ab, &x), direct) {
            (Some(p), Some(q)) => prop_assert!(agree(&p, &q)),
            (None, None) => {}
            (p, q) => prop_assert!(false, "domain mismatch: {:?} vs {:?}", p, q),
        }
    }

    #[test]
    fn inverse_undoes(i in 0usize..1000, x in prop::collection::vec(0u8..2, POINT)) {
        let els = elements();
        let e = &els[i % els.len()];
        if let Some(y) = at(e, &x) {
            let back = at(&e.invert(), &y).unwrap();
            prop_assert!(agree(&back, &x));
        }
        prop_assert_eq!(e.invert().source(), e.range());
        prop_assert!(PrefixExchange::compose(&e.invert(), e).unwrap().is_identity());
    }

    #[test]
    fn refine_and_restrict_keep_the_map(i in 0usize..1000, d in 0usize..7, x in prop::collection::vec(0u8..2, POINT), w in prop::collection::vec(0u8..2, 0..4)) {
        let els = elements();
        let e = &els[i % els.len()];
        let r = e.refine(d);
        prop_assert!(r.same_map(e));
        prop_assert!(r.pairs().iter().all(|(u, v)| u.len().max(v.len()) >= d));
        match (at(&r, &x), at(e, &x)) {
            (Some(p), Some(q)) => prop_assert!(agree(&p, &q)),
            (None, None) => {}
            _ => prop_assert!(false, "refinement changed the domain"),
        }
        let c = Clopen::cylinder(e.shift(), Word::from_symbols(w.clone())).unwrap();
        let res = e.restrict(&c);
        prop_assert_eq!(res.source(), e.source().intersect(&c).unwrap());
        prop_assert_eq!(res.range(), e.apply(&c));
        if x[..w.len()] == w[..] {
            match (at(&res, &x), at(e, &x)) {
                (Some(p), Some(q)) => prop_assert!(agree(&p, &q)),
                (None, None) => {}
                _ => prop_assert!(false, "restriction changed the domain inside the cylinder"),
            }
        } else {
            prop_assert!(at(&res, &x).is_none());
        }
    }

    #[test]
    fn apply_matches_points(i in 0usize..1000, w in prop::collection::vec(0u8..2, 0..4), tail in prop::collection::vec(0u8..2, POINT)) {
        let els = elements();
        let e = &els[i % els.len()];
        let c = Clopen::cylinder(e.shift(), Word::from_symbols(w.clone())).unwrap();
        let image = e.apply(&c);
        let mut x = w.clone();
        x.extend(&tail);
        if let Some(y) = at(e, &x) {
            prop_assert!(image.words().iter().any(|p| p.symbols().len() <= y.len() && &y[..p.len()] == p.symbols()));
        }
    }
}

#[test]
fn group_generators_are_total() {
    for name in ["o2", "flip2", "trivial2", "free2", "o2x2"] {
        let g = catalog::builtin(name).unwrap().presentation;
        assert_eq!(g.kind(), PresentationKind::GroupAction);
        for gen in g.generators() {
            let whole = Clopen::whole(g.shift());
            assert_eq!(gen.exchange.source(), whole, "{name}/{}", gen.name);
            assert_eq!(gen.exchange.range(), whole, "{name}/{}", gen.name);
        }
    }
}

#[test]
fn invalid_exchanges_are_rejected() {
    let s = ample_comparison::symbolic::Subshift::full(2).unwrap();
    assert!(PrefixExchange::parse(&s, &[("0", "1"), ("00", "0")]).is_err());
    assert!(PrefixExchange::parse(&s, &[("0", "1"), ("1", "1")]).is_err());
    assert!(PrefixExchange::parse(&s, &[("2", "1")]).is_err());
    let golden = catalog::golden_mean_shift();
    // After 1 only 0 may follow, so the follower sets of 1 and 0 differ.
    assert!(PrefixExchange::parse(&golden, &[("1", "0")]).is_err());
}
