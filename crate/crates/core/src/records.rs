//! Serializable certificates and their independent re-checks.
//!
//! Words are written with symbol names and rationals as numerator and
//! denominator strings, so a record can be stored as JSON and checked later
//! against a presentation without rerunning any search.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bisections::{enumerate_elements, validate, GroupoidPresentation, PrefixExchange};
use crate::comparison::{FillingWitness, Paradox, Piece, Refutation, ScanReport, SearchOutcome, Transporter, TupleCertificate, TupleEntry};
use crate::lp::Rational;
use crate::labels;
use crate::measures::{check_invariant, MeasureFarkas, MeasureVector, MeasureWitness};
use crate::semigroups::{is_state, MonoidPresentation, StateFarkas};
use crate::symbolic::{Clopen, Subshift, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRecord {
    pub num: String,
    pub den: String,
}

impl RationalRecord {
    pub fn from_rational(r: &Rational) -> Self {
        RationalRecord {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }

    pub fn to_rational(&self) -> Result<Rational, String> {
        let num = BigInt::from_str(&self.num).map_err(|e| format!("numerator {:?}: {e}", self.num))?;
        let den = BigInt::from_str(&self.den).map_err(|e| format!("denominator {:?}: {e}", self.den))?;
        if den.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational::new(num, den))
    }
}

/// A set written as its words; `[]` is the empty set and `[""]` the space.
pub type SetRecord = Vec<String>;
pub type PairsRecord = Vec<[String; 2]>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceRecord {
    pub label: String,
    pub pairs: PairsRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransporterRecord {
    pub subject: SetRecord,
    pub target: SetRecord,
    pub pieces: Vec<PieceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleEntryRecord {
    pub source: usize,
    pub target: usize,
    pub label: String,
    pub pairs: PairsRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleRecord {
    pub subject: Vec<SetRecord>,
    pub target: Vec<SetRecord>,
    /// Both sides are tiled exactly, not just covered and packed.
    pub tiling: bool,
    pub entries: Vec<TupleEntryRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParadoxRecord {
    pub set: SetRecord,
    pub first_half: SetRecord,
    pub second_half: SetRecord,
    pub first: TransporterRecord,
    pub second: TransporterRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordValue {
    pub word: String,
    pub value: RationalRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub depth: usize,
    pub values: Vec<WordValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureWitnessRecord {
    pub subject: Vec<SetRecord>,
    pub target: Vec<SetRecord>,
    pub measure: MeasureRecord,
    pub lhs: RationalRecord,
    pub rhs: RationalRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: RationalRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FarkasRecord {
    pub depth: usize,
    pub multipliers: Vec<NamedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillingRecord {
    pub sets: Vec<SetRecord>,
    pub maps: Vec<PieceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractRecord {
    pub set: SetRecord,
    pub map: PieceRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateRecord {
    pub presentation: String,
    pub target: String,
    pub values: Vec<NamedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationValue {
    pub relation: usize,
    pub value: RationalRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateFarkasRecord {
    pub presentation: String,
    pub target: String,
    pub multipliers: Vec<RelationValue>,
}

/// The enumeration closed under composition at `bound` with `elements`
/// elements and no certificate was found at any resolution up to
/// `max_refine`. The check recomputes the closure, not the search.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustedRecord {
    pub bound: usize,
    pub elements: usize,
    pub max_refine: usize,
}

/// Proper non-empty clopens invariant under every generator and inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSetsRecord {
    pub sets: Vec<SetRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanEntryRecord {
    pub cylinder: String,
    pub outcome: String,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub depth: usize,
    pub entries: Vec<ScanEntryRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Transporter(TransporterRecord),
    Tuple(TupleRecord),
    Paradox(ParadoxRecord),
    MeasureWitness(MeasureWitnessRecord),
    Measure(MeasureRecord),
    MeasureFarkas(FarkasRecord),
    Filling(FillingRecord),
    Contract(ContractRecord),
    State(StateRecord),
    StateFarkas(StateFarkasRecord),
    Exhausted(ExhaustedRecord),
    InvariantSets(InvariantSetsRecord),
    Scan(ScanRecord),
}

fn set_record(c: &Clopen) -> SetRecord {
    let shift = c.shift();
    c.words().iter().map(|w| shift.format_word(w)).collect()
}

fn pairs_record(e: &PrefixExchange) -> PairsRecord {
    e.display_pairs().into_iter().map(|(u, v)| [u, v]).collect()
}

fn measure_record(m: &MeasureVector) -> MeasureRecord {
    MeasureRecord {
        depth: m.depth(),
        values: m
            .values()
            .iter()
            .map(|(w, v)| WordValue {
                word: m.shift().format_word(w),
                value: RationalRecord::from_rational(v),
            })
            .collect(),
    }
}

impl Certificate {
    pub fn transporter(t: &Transporter) -> Self {
        Certificate::Transporter(transporter_record(t))
    }

    pub fn tuple(t: &TupleCertificate, tiling: bool) -> Self {
        Certificate::Tuple(TupleRecord {
            subject: t.subject.iter().map(set_record).collect(),
            target: t.target.iter().map(set_record).collect(),
            tiling,
            entries: t
                .entries
                .iter()
                .map(|e| TupleEntryRecord {
                    source: e.source_index,
                    target: e.target_index,
                    label: e.piece.label.clone(),
                    pairs: pairs_record(&e.piece.exchange),
                })
                .collect(),
        })
    }

    pub fn paradox(set: &Clopen, p: &Paradox) -> Self {
        Certificate::Paradox(ParadoxRecord {
            set: set_record(set),
            first_half: set_record(&p.first_half),
            second_half: set_record(&p.second_half),
            first: transporter_record(&p.first),
            second: transporter_record(&p.second),
        })
    }

    pub fn measure_witness(a: &[Clopen], b: &[Clopen], w: &MeasureWitness) -> Self {
        Certificate::MeasureWitness(MeasureWitnessRecord {
            subject: a.iter().map(set_record).collect(),
            target: b.iter().map(set_record).collect(),
            measure: measure_record(&w.measure),
            lhs: RationalRecord::from_rational(&w.lhs),
            rhs: RationalRecord::from_rational(&w.rhs),
        })
    }

    pub fn measure(m: &MeasureVector) -> Self {
        Certificate::Measure(measure_record(m))
    }

    pub fn measure_farkas(f: &MeasureFarkas) -> Self {
        Certificate::MeasureFarkas(FarkasRecord {
            depth: f.depth,
            multipliers: f
                .multipliers
                .iter()
                .map(|(name, v)| NamedValue {
                    name: name.clone(),
                    value: RationalRecord::from_rational(v),
                })
                .collect(),
        })
    }

    pub fn filling(f: &FillingWitness) -> Self {
        Certificate::Filling(FillingRecord {
            sets: f.sets.iter().map(set_record).collect(),
            maps: f.maps.iter().map(piece_record).collect(),
        })
    }

    pub fn contract(set: &Clopen, map: &Piece) -> Self {
        Certificate::Contract(ContractRecord {
            set: set_record(set),
            map: piece_record(map),
        })
    }

    pub fn state(m: &MonoidPresentation, target: &str, values: &[(String, Rational)]) -> Self {
        Certificate::State(StateRecord {
            presentation: m.to_string(),
            target: target.to_string(),
            values: values
                .iter()
                .map(|(name, v)| NamedValue {
                    name: name.clone(),
                    value: RationalRecord::from_rational(v),
                })
                .collect(),
        })
    }

    pub fn state_farkas(m: &MonoidPresentation, target: &str, f: &StateFarkas) -> Self {
        Certificate::StateFarkas(StateFarkasRecord {
            presentation: m.to_string(),
            target: target.to_string(),
            multipliers: f
                .multipliers
                .iter()
                .map(|(r, v)| RelationValue {
                    relation: *r,
                    value: RationalRecord::from_rational(v),
                })
                .collect(),
        })
    }

    pub fn invariant_sets(sets: &[Clopen]) -> Self {
        Certificate::InvariantSets(InvariantSetsRecord {
            sets: sets.iter().map(set_record).collect(),
        })
    }

    /// The certificate behind a search outcome, if it carries one.
    pub fn from_refutation(a: &[Clopen], b: &[Clopen], r: &Refutation, bound: usize) -> Self {
        match r {
            Refutation::Measure(w) => Certificate::measure_witness(a, b, w),
            Refutation::Exhausted { elements, max_refine } => Certificate::Exhausted(ExhaustedRecord {
                bound,
                elements: *elements,
                max_refine: *max_refine,
            }),
        }
    }

    pub fn scan(depth: usize, report: &ScanReport, shift: &Subshift, bound: usize) -> Self {
        Certificate::Scan(ScanRecord {
            depth,
            entries: report
                .entries
                .iter()
                .map(|(w, o)| {
                    let set = Clopen::from_admissible(shift, [w.clone()]);
                    let doubled = [set.clone(), set.clone()];
                    let certificate = match o {
                        SearchOutcome::Verified(p) => Some(Certificate::paradox(&set, p)),
                        SearchOutcome::Refuted(r) => Some(Certificate::from_refutation(&doubled, std::slice::from_ref(&set), r, bound)),
                        SearchOutcome::Unknown { .. } => None,
                    };
                    ScanEntryRecord {
                        cylinder: shift.format_word(w),
                        outcome: outcome_name(o).to_string(),
                        certificate,
                    }
                })
                .collect(),
        })
    }

    /// Re-checks the certificate against `g` using only clopen arithmetic,
    /// composition-free verifiers and exact rational sums. Monoid
    /// certificates carry their own presentation and ignore `g`.
    pub fn check(&self, g: Option<&GroupoidPresentation>) -> Result<(), String> {
        match self {
            Certificate::State(_) | Certificate::StateFarkas(_) => self.check_monoid(),
            _ => self.check_system(g.ok_or("certificate needs a system")?),
        }
    }

    fn check_monoid(&self) -> Result<(), String> {
        match self {
            Certificate::State(s) => {
                let m = MonoidPresentation::parse(&s.presentation).map_err(|e| e.to_string())?;
                let target = m.index(&s.target).ok_or("unknown target generator")?;
                let mut values = vec![None; m.generators().len()];
                for nv in &s.values {
                    let j = m.index(&nv.name).ok_or_else(|| format!("unknown generator {:?}", nv.name))?;
                    values[j] = Some(nv.value.to_rational()?);
                }
                let f: Vec<Rational> = values
                    .into_iter()
                    .map(|v| v.ok_or("missing value"))
                    .collect::<Result<_, _>>()?;
                if is_state(&m, target, &f) {
                    Ok(())
                } else {
                    Err("values do not form a normalized state".into())
                }
            }
            Certificate::StateFarkas(s) => {
                let m = MonoidPresentation::parse(&s.presentation).map_err(|e| e.to_string())?;
                let target = m.index(&s.target).ok_or("unknown target generator")?;
                let multipliers = s
                    .multipliers
                    .iter()
                    .map(|rv| Ok((rv.relation, rv.value.to_rational()?)))
                    .collect::<Result<Vec<_>, String>>()?;
                StateFarkas { target, multipliers }.check(&m)
            }
            _ => unreachable!("system certificate"),
        }
    }

    fn check_system(&self, g: &GroupoidPresentation) -> Result<(), String> {
        let shift = g.shift();
        match self {
            Certificate::Transporter(t) => to_transporter(shift, t)?.verify_in(g),
            Certificate::Tuple(t) => to_tuple(shift, t)?.verify_in(g, t.tiling),
            Certificate::Paradox(p) => {
                let set = parse_set(shift, &p.set)?;
                let paradox = Paradox {
                    first_half: parse_set(shift, &p.first_half)?,
                    second_half: parse_set(shift, &p.second_half)?,
                    first: to_transporter(shift, &p.first)?,
                    second: to_transporter(shift, &p.second)?,
                };
                paradox.verify_in(&set, g)
            }
            Certificate::MeasureWitness(w) => {
                let m = to_measure(shift, &w.measure)?;
                if !check_invariant(g, &m) {
                    return Err("measure is not an invariant probability vector".into());
                }
                let sum = |sets: &[SetRecord]| -> Result<Rational, String> {
                    let mut acc = Rational::zero();
                    for s in sets {
                        acc += m
                            .evaluate(&parse_set(shift, s)?)
                            .ok_or("set deeper than the measure")?;
                    }
                    Ok(acc)
                };
                let lhs = sum(&w.subject)?;
                let rhs = sum(&w.target)?;
                if lhs != w.lhs.to_rational()? || rhs != w.rhs.to_rational()? {
                    return Err("recorded sums disagree with the measure".into());
                }
                if lhs > rhs {
                    Ok(())
                } else {
                    Err("measure does not separate the two sides".into())
                }
            }
            Certificate::Measure(m) => {
                if check_invariant(g, &to_measure(shift, m)?) {
                    Ok(())
                } else {
                    Err("measure is not an invariant probability vector".into())
                }
            }
            Certificate::MeasureFarkas(f) => {
                let multipliers = f
                    .multipliers
                    .iter()
                    .map(|nv| Ok((nv.name.clone(), nv.value.to_rational()?)))
                    .collect::<Result<Vec<_>, String>>()?;
                MeasureFarkas {
                    depth: f.depth,
                    multipliers,
                }
                .check(g)
            }
            Certificate::Filling(f) => {
                let witness = FillingWitness {
                    sets: f.sets.iter().map(|s| parse_set(shift, s)).collect::<Result<_, _>>()?,
                    maps: f.maps.iter().map(|m| to_piece(shift, m)).collect::<Result<_, _>>()?,
                };
                witness.verify_in(g)
            }
            Certificate::Contract(c) => {
                let set = parse_set(shift, &c.set)?;
                let piece = to_piece(shift, &c.map)?;
                labels::check_membership(g, &piece.label, &piece.exchange)?;
                let map = piece.exchange;
                let range = map.range();
                if map.source() == set && range.is_subset_unchecked(&set) && range != set {
                    Ok(())
                } else {
                    Err("map does not compress the set properly into itself".into())
                }
            }
            Certificate::Exhausted(e) => {
                let en = enumerate_elements(g, e.bound);
                if en.stabilized && en.elements.len() == e.elements {
                    Ok(())
                } else {
                    Err("the enumeration does not close at the recorded bound".into())
                }
            }
            Certificate::InvariantSets(s) => {
                let letters = g.letters();
                for set in &s.sets {
                    let c = parse_set(shift, set)?;
                    if c.is_empty() || c.is_whole() {
                        return Err("invariant set must be proper and non-empty".into());
                    }
                    if letters.iter().any(|l| !l.exchange.apply(&c).is_subset_unchecked(&c)) {
                        return Err(format!("{set:?} is not invariant"));
                    }
                }
                Ok(())
            }
            Certificate::Scan(s) => {
                for e in &s.entries {
                    if let Some(c) = &e.certificate {
                        c.check(Some(g)).map_err(|m| format!("cylinder {:?}: {m}", e.cylinder))?;
                    }
                }
                Ok(())
            }
            Certificate::State(_) | Certificate::StateFarkas(_) => self.check_monoid(),
        }
    }
}

pub fn outcome_name<C>(o: &SearchOutcome<C>) -> &'static str {
    match o {
        SearchOutcome::Verified(_) => "verified",
        SearchOutcome::Refuted(_) => "refuted",
        SearchOutcome::Unknown { .. } => "unknown",
    }
}

fn piece_record(p: &Piece) -> PieceRecord {
    PieceRecord {
        label: p.label.clone(),
        pairs: pairs_record(&p.exchange),
    }
}

fn transporter_record(t: &Transporter) -> TransporterRecord {
    TransporterRecord {
        subject: set_record(&t.subject),
        target: set_record(&t.target),
        pieces: t.pieces.iter().map(piece_record).collect(),
    }
}

fn to_piece(shift: &Subshift, p: &PieceRecord) -> Result<Piece, String> {
    Ok(Piece {
        label: p.label.clone(),
        exchange: parse_pairs(shift, &p.pairs)?,
    })
}

fn parse_word(shift: &Subshift, s: &str) -> Result<Word, String> {
    shift.parse_word(s).map_err(|e| e.to_string())
}

/// Words must be admissible; the set is canonicalized.
pub fn parse_set(shift: &Subshift, words: &[String]) -> Result<Clopen, String> {
    let ws = words.iter().map(|w| parse_word(shift, w)).collect::<Result<Vec<_>, _>>()?;
    Clopen::new(shift, ws).map_err(|e| e.to_string())
}

/// Pairs are validated, not trusted.
pub fn parse_pairs(shift: &Subshift, pairs: &[[String; 2]]) -> Result<PrefixExchange, String> {
    let ps = pairs
        .iter()
        .map(|[u, v]| Ok((parse_word(shift, u)?, parse_word(shift, v)?)))
        .collect::<Result<Vec<_>, String>>()?;
    validate(shift, &ps).map_err(|v| v.to_string())?;
    PrefixExchange::new(shift, ps).map_err(|e| e.to_string())
}

fn to_transporter(shift: &Subshift, t: &TransporterRecord) -> Result<Transporter, String> {
    Ok(Transporter {
        subject: parse_set(shift, &t.subject)?,
        target: parse_set(shift, &t.target)?,
        pieces: t.pieces.iter().map(|p| to_piece(shift, p)).collect::<Result<_, String>>()?,
    })
}

fn to_tuple(shift: &Subshift, t: &TupleRecord) -> Result<TupleCertificate, String> {
    Ok(TupleCertificate {
        subject: t.subject.iter().map(|s| parse_set(shift, s)).collect::<Result<_, _>>()?,
        target: t.target.iter().map(|s| parse_set(shift, s)).collect::<Result<_, _>>()?,
        entries: t
            .entries
            .iter()
            .map(|e| {
                Ok(TupleEntry {
                    source_index: e.source,
                    target_index: e.target,
                    piece: Piece {
                        label: e.label.clone(),
                        exchange: parse_pairs(shift, &e.pairs)?,
                    },
                })
            })
            .collect::<Result<_, String>>()?,
    })
}

fn to_measure(shift: &Subshift, m: &MeasureRecord) -> Result<MeasureVector, String> {
    let mut values = BTreeMap::new();
    for wv in &m.values {
        let w = parse_word(shift, &wv.word)?;
        if values.insert(w, wv.value.to_rational()?).is_some() {
            return Err(format!("word {:?} listed twice", wv.word));
        }
    }
    let mv = MeasureVector::new(shift, m.depth, values).map_err(|e| e.to_string())?;
    if mv.total() != Rational::one() {
        return Err("total mass is not 1".into());
    }
    Ok(mv)
}
