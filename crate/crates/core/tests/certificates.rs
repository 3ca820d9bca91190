//! Certificates survive a JSON round trip and tampering is caught.

use ample_comparison::bisections::PrefixExchange;
use ample_comparison::catalog;
use ample_comparison::comparison::{Explorer, Piece, SearchOutcome, Transporter};
use ample_comparison::measures::{mg_empty_certificate, EmptinessOutcome};
use ample_comparison::records::Certificate;
use ample_comparison::symbolic::Clopen;

fn round_trip(c: &Certificate) -> Certificate {
    let text = serde_json::to_string(c).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn transporter_round_trip_and_tamper() {
    let g = catalog::o2_action();
    let ex = Explorer::new(&g, 8);
    let k = Clopen::whole(g.shift());
    let v = Clopen::parse(g.shift(), "00").unwrap();
    let SearchOutcome::Verified(t) = ex.compare(&k, &v) else { panic!("X ≺ N_00") };
    let c = Certificate::transporter(&t);
    assert_eq!(round_trip(&c), c);
    c.check(Some(&g)).unwrap();

    // Pointing a piece at a set outside the target must fail.
    let mut bad = t.clone();
    bad.pieces.push(Piece {
        label: "id".into(),
        exchange: PrefixExchange::identity(&Clopen::parse(g.shift(), "1").unwrap()),
    });
    assert!(!bad.verify());
    assert!(Certificate::transporter(&bad).check(Some(&g)).is_err());

    // A correct map under a label that does not produce it.
    let mut relabelled = t.clone();
    relabelled.pieces[0].label = "id".into();
    assert!(relabelled.verify());
    assert!(relabelled.verify_in(&g).is_err());

    let short = Transporter {
        subject: t.subject.clone(),
        target: t.target.clone(),
        pieces: t.pieces[..t.pieces.len() - 1].to_vec(),
    };
    assert!(!short.verify());
}

#[test]
fn paradox_round_trip() {
    let g = catalog::o2_action();
    let x = Clopen::whole(g.shift());
    let SearchOutcome::Verified(p) = Explorer::new(&g, 6).paradoxical(&x) else { panic!("X paradoxical") };
    let c = Certificate::paradox(&x, &p);
    assert_eq!(round_trip(&c), c);
    c.check(Some(&g)).unwrap();
    // The same certificate does not prove anything about the trivial action.
    let t = catalog::trivial_action(2).unwrap();
    assert!(c.check(Some(&t)).is_err());
}

#[test]
fn farkas_round_trip() {
    let g = catalog::o2_action();
    let EmptinessOutcome::Certificate(f) = mg_empty_certificate(&g, 4) else { panic!("no certificate") };
    let c = Certificate::measure_farkas(&f);
    assert_eq!(round_trip(&c), c);
    c.check(Some(&g)).unwrap();
    assert!(c.check(Some(&catalog::trivial_action(2).unwrap())).is_err());
}

#[test]
fn measure_refutation_round_trip() {
    let g = catalog::trivial_action(2).unwrap();
    let x = Clopen::parse(g.shift(), "01").unwrap();
    let SearchOutcome::Refuted(r) = Explorer::new(&g, 4).paradoxical(&x) else { panic!("trivial paradox") };
    let c = Certificate::from_refutation(&[x.clone(), x.clone()], std::slice::from_ref(&x), &r, 4);
    assert_eq!(round_trip(&c), c);
    c.check(Some(&g)).unwrap();
}
