use std::io::Read;
use std::time::Instant;

use ample_comparison::bisections::GroupoidPresentation;
use ample_comparison::catalog;
use ample_comparison::comparison::{global_fixed_unit_scan, ContractOutcome, Explorer, FillingOutcome, MinimalOutcome, SearchConfig, SearchOutcome, TupleCertificate};
use ample_comparison::measures::{invariance_lp, mg_empty_certificate, EmptinessOutcome, LpResult};
use ample_comparison::records::{outcome_name, Certificate};
use ample_comparison::semigroups::{extract_monoid_facts_with, state_lp, ClopenTuple, FactsConfig, MonoidPresentation, StateResult};
use ample_comparison::symbolic::Clopen;
use ample_comparison::sysfile;
use serde_json::json;

use crate::report::{exit_code, Report, SystemRecord};
use crate::{CatalogAction, Command, SearchArgs, SemigroupAction, SystemArgs, EXIT_DATA, EXIT_USAGE};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn data(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.into(),
    }
}

struct Loaded {
    name: String,
    presentation: GroupoidPresentation,
}

impl Loaded {
    fn record(&self) -> SystemRecord {
        SystemRecord {
            name: self.name.clone(),
            description: sysfile::dump(&self.name, &self.presentation),
        }
    }
}

fn load_system(args: &SystemArgs) -> Result<Loaded, Failure> {
    let (name, mut presentation) = match catalog::builtin(&args.system) {
        Ok(d) => (d.name, d.presentation),
        Err(catalog::CatalogError::Unknown(_)) => {
            let text = std::fs::read_to_string(&args.system)
                .map_err(|e| data(format!("{}: not a built-in system and not readable: {e}", args.system)))?;
            let f = sysfile::parse(&text).map_err(|e| data(format!("{}: {e}", args.system)))?;
            (f.name, f.presentation)
        }
        Err(e) => return Err(data(format!("{}: {e}", args.system))),
    };
    if let Some(cap) = args.max_pair_length {
        if cap == 0 {
            return Err(Failure {
                code: EXIT_USAGE,
                message: "--max-pair-length must be positive".into(),
            });
        }
        presentation = presentation.with_max_pair_len(cap);
    }
    Ok(Loaded { name, presentation })
}

fn config(s: &SearchArgs) -> SearchConfig {
    SearchConfig {
        max_refine: s.max_refine,
        node_budget: s.node_budget,
        measure_depth: s.measure_depth,
        ..SearchConfig::default()
    }
}

fn search_parameters(s: &SearchArgs) -> serde_json::Value {
    json!({
        "bound": s.bound,
        "max_refine": s.max_refine,
        "node_budget": s.node_budget,
        "measure_depth": s.measure_depth,
    })
}

fn parse_set(g: &GroupoidPresentation, text: &str) -> Result<Clopen, Failure> {
    Clopen::parse(g.shift(), text).map_err(|e| data(format!("set {text:?}: {e}")))
}

fn parse_tuple(g: &GroupoidPresentation, text: &str) -> Result<Vec<Clopen>, Failure> {
    ClopenTuple::parse(g.shift(), text)
        .map(|t| t.entries().to_vec())
        .map_err(|e| data(format!("tuple {text:?}: {e}")))
}

fn emit(report: &Report) -> u8 {
    match serde_json::to_string_pretty(report) {
        Ok(s) => {
            println!("{s}");
            exit_code(&report.outcome)
        }
        Err(e) => {
            eprintln!("ample: cannot serialize report: {e}");
            EXIT_DATA
        }
    }
}

/// Attaches the certificate of a tuple search and returns its summary.
fn tuple_outcome(report: &mut Report, a: &[Clopen], b: &[Clopen], o: &SearchOutcome<TupleCertificate>, bound: usize, tiling: bool) -> String {
    match o {
        SearchOutcome::Verified(c) => {
            report.certificates.push(Certificate::tuple(c, tiling));
            format!("{} pieces", c.entries.len())
        }
        SearchOutcome::Refuted(r) => {
            report.certificates.push(Certificate::from_refutation(a, b, r, bound));
            match r {
                ample_comparison::comparison::Refutation::Measure(_) => "an invariant measure separates the sides".into(),
                ample_comparison::comparison::Refutation::Exhausted { .. } => "the finite inverse semigroup admits no certificate".into(),
            }
        }
        SearchOutcome::Unknown { reason } => reason.clone(),
    }
}

pub fn run(command: Command, argv: Vec<String>) -> Result<u8, Failure> {
    let start = Instant::now();
    match command {
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for name in catalog::LISTED {
                    let d = catalog::builtin(name).expect("listed systems build");
                    println!("{name:<10} {}", d.description);
                }
                println!("(also: trivial<k>, free<n>, dr<k>, flip<k>, o2x<m>)");
                Ok(0)
            }
            CatalogAction::Dump { name } => {
                let d = catalog::builtin(&name).map_err(|e| data(e.to_string()))?;
                print!("{}", sysfile::dump(&d.name, &d.presentation));
                Ok(0)
            }
        },
        Command::Compare { system, search, from, to } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
            if from.contains('|') || to.contains('|') {
                let a = parse_tuple(g, &from)?;
                let b = parse_tuple(g, &to)?;
                let o = ex.compare_tuple(&a, &b);
                let summary = tuple_outcome(&mut report, &a, &b, &o, search.bound, false);
                return Ok(emit(&report.finish(outcome_name(&o), summary, start.elapsed())));
            }
            let k = parse_set(g, &from)?;
            let v = parse_set(g, &to)?;
            let o = ex.compare(&k, &v);
            let summary = match &o {
                SearchOutcome::Verified(t) => {
                    report.certificates.push(Certificate::transporter(t));
                    format!("{} pieces", t.pieces.len())
                }
                SearchOutcome::Refuted(r) => {
                    report
                        .certificates
                        .push(Certificate::from_refutation(std::slice::from_ref(&k), std::slice::from_ref(&v), r, search.bound));
                    "refuted".into()
                }
                SearchOutcome::Unknown { reason } => reason.clone(),
            };
            Ok(emit(&report.finish(outcome_name(&o), summary, start.elapsed())))
        }
        Command::Paradox { system, search, set } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let o_set = parse_set(g, &set)?;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
            let o = ex.paradoxical(&o_set);
            let summary = match &o {
                SearchOutcome::Verified(p) => {
                    report.certificates.push(Certificate::paradox(&o_set, p));
                    "two transporters onto disjoint halves".to_string()
                }
                SearchOutcome::Refuted(r) => {
                    let doubled = [o_set.clone(), o_set.clone()];
                    report
                        .certificates
                        .push(Certificate::from_refutation(&doubled, std::slice::from_ref(&o_set), r, search.bound));
                    "not paradoxical".into()
                }
                SearchOutcome::Unknown { reason } => reason.clone(),
            };
            Ok(emit(&report.finish(outcome_name(&o), summary, start.elapsed())))
        }
        Command::ScanPi { system, search, depth } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut params = search_parameters(&search);
            params["depth"] = json!(depth);
            let mut report = Report::new(argv, Some(sys.record()), params);
            let scan = ex.purely_infinite_scan(depth);
            let verified = scan.entries.iter().filter(|(_, o)| o.is_verified()).count();
            let refuted = scan.entries.iter().filter(|(_, o)| o.is_refuted()).count();
            report.certificates.push(Certificate::scan(depth, &scan, g.shift(), search.bound));
            let outcome = if scan.all_verified() {
                "verified"
            } else if refuted > 0 {
                "refuted"
            } else {
                "unknown"
            };
            let summary = format!("{verified} verified, {refuted} refuted, {} cylinders", scan.entries.len());
            Ok(emit(&report.finish(outcome, summary, start.elapsed())))
        }
        Command::Filling { system, search, sets } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let ws = parse_tuple(g, &sets)?;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
            let (outcome, summary) = match ex.n_filling(&ws) {
                FillingOutcome::Verified(w) => {
                    report.certificates.push(Certificate::filling(&w));
                    ("verified", format!("{}-filling", ws.len()))
                }
                FillingOutcome::Unknown { exhausted } => (
                    "unknown",
                    if exhausted {
                        "no filling family in the finite inverse semigroup".to_string()
                    } else {
                        "no filling family found".to_string()
                    },
                ),
            };
            Ok(emit(&report.finish(outcome, summary, start.elapsed())))
        }
        Command::Contract { system, search, set } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let v = parse_set(g, &set)?;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
            let (outcome, summary) = match ex.locally_contracting(&v) {
                ContractOutcome::Verified(map) => {
                    report.certificates.push(Certificate::contract(&v, &map));
                    ("verified", "proper compression".to_string())
                }
                ContractOutcome::Exhausted => {
                    let en = ex.enumeration();
                    report.certificates.push(Certificate::Exhausted(ample_comparison::records::ExhaustedRecord {
                        bound: search.bound,
                        elements: en.elements.len(),
                        max_refine: search.max_refine,
                    }));
                    ("refuted", "the finite inverse semigroup compresses nothing".to_string())
                }
                ContractOutcome::Unknown => ("unknown", "no compression found".to_string()),
            };
            Ok(emit(&report.finish(outcome, summary, start.elapsed())))
        }
        Command::Measures { system, depth, max_depth } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let mut report = Report::new(argv, Some(sys.record()), json!({ "depth": depth, "max_depth": max_depth }));
            let (outcome, summary) = match depth {
                Some(d) => match invariance_lp(g, d) {
                    LpResult::Feasible(m) => {
                        report.certificates.push(Certificate::measure(&m));
                        ("feasible", format!("invariant measure at depth {}", m.depth()))
                    }
                    LpResult::Infeasible(f) => {
                        report.certificates.push(Certificate::measure_farkas(&f));
                        ("infeasible", format!("no invariant measure at depth {}", f.depth))
                    }
                },
                None => match mg_empty_certificate(g, max_depth) {
                    EmptinessOutcome::Certificate(f) => {
                        report.certificates.push(Certificate::measure_farkas(&f));
                        ("infeasible", format!("no invariant measure at depth {}", f.depth))
                    }
                    EmptinessOutcome::Unknown(m) => {
                        report.certificates.push(Certificate::measure(&m));
                        ("feasible", format!("invariant measure at depth {}", m.depth()))
                    }
                },
            };
            Ok(emit(&report.finish(outcome, summary, start.elapsed())))
        }
        Command::Minimal { system, bound, depth } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let ex = Explorer::new(g, bound);
            let mut report = Report::new(argv, Some(sys.record()), json!({ "bound": bound, "depth": depth }));
            let m = ex.minimal_check(depth);
            let (outcome, summary) = match &m.outcome {
                MinimalOutcome::Verified => ("verified", "every cylinder saturates to the whole space".to_string()),
                MinimalOutcome::NotMinimal { .. } => {
                    report.certificates.push(Certificate::invariant_sets(&m.invariant_clopens));
                    ("refuted", format!("{} proper invariant clopens", m.invariant_clopens.len()))
                }
                MinimalOutcome::Unknown => ("unknown", "some saturation is neither whole nor invariant".to_string()),
            };
            Ok(emit(&report.finish(outcome, summary, start.elapsed())))
        }
        Command::FixedUnits { system, depth } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let report = Report::new(argv, Some(sys.record()), json!({ "depth": depth }));
            let fixed = global_fixed_unit_scan(g, depth);
            let names: Vec<String> = fixed.iter().map(|w| g.shift().format_word(w)).collect();
            let outcome = if fixed.is_empty() { "refuted" } else { "verified" };
            Ok(emit(&report.finish(outcome, format!("fixed cylinders: [{}]", names.join(", ")), start.elapsed())))
        }
        Command::Semigroup { action } => run_semigroup(action, argv, start),
        Command::Verify { report } => verify(&report),
    }
}

fn run_semigroup(action: SemigroupAction, argv: Vec<String>, start: Instant) -> Result<u8, Failure> {
    match action {
        SemigroupAction::Leq { system, search, from, to } => tuple_command(system, search, &from, &to, false, argv, start),
        SemigroupAction::Equiv { system, search, from, to } => tuple_command(system, search, &from, &to, true, argv, start),
        SemigroupAction::Proper { system, search, tuple } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let a = ClopenTuple::new(parse_tuple(g, &tuple)?).map_err(|e| data(e.to_string()))?;
            if a.is_empty() {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "proper infiniteness needs a non-empty tuple".into(),
                });
            }
            let doubled = a.times(2);
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
            let o = ex.compare_tuple(doubled.entries(), a.entries());
            let summary = tuple_outcome(&mut report, doubled.entries(), a.entries(), &o, search.bound, false);
            Ok(emit(&report.finish(outcome_name(&o), summary, start.elapsed())))
        }
        SemigroupAction::Probe { system, search, from, to, n } => {
            if n == 0 {
                return Err(Failure {
                    code: EXIT_USAGE,
                    message: "--n must be at least 1".into(),
                });
            }
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let a = ClopenTuple::new(parse_tuple(g, &from)?).map_err(|e| data(e.to_string()))?;
            let b = ClopenTuple::new(parse_tuple(g, &to)?).map_err(|e| data(e.to_string()))?;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut params = search_parameters(&search);
            params["n"] = json!(n);
            let mut report = Report::new(argv, Some(sys.record()), params);
            let (sa, sb) = (a.times(n + 1), b.times(n));
            let scaled = ex.compare_tuple(sa.entries(), sb.entries());
            let direct = ex.compare_tuple(a.entries(), b.entries());
            let s1 = tuple_outcome(&mut report, sa.entries(), sb.entries(), &scaled, search.bound, false);
            let s2 = tuple_outcome(&mut report, a.entries(), b.entries(), &direct, search.bound, false);
            let alarm = scaled.is_verified() && direct.is_refuted();
            let summary = format!(
                "scaled: {} ({s1}); direct: {} ({s2}); perforation alarm: {alarm}",
                outcome_name(&scaled),
                outcome_name(&direct)
            );
            Ok(emit(&report.finish(outcome_name(&direct), summary, start.elapsed())))
        }
        SemigroupAction::State { presentation, target } => {
            let text = std::fs::read_to_string(&presentation).map_err(|e| data(format!("{presentation}: {e}")))?;
            let m = MonoidPresentation::parse(&text).map_err(|e| data(format!("{presentation}: {e}")))?;
            let mut report = Report::new(argv, None, json!({ "target": target }));
            let r = state_lp(&m, &target).map_err(|e| data(e.to_string()))?;
            let outcome = state_certificate(&mut report, &m, &target, &r);
            Ok(emit(&report.finish(outcome, m.to_string().trim_end().replace('\n', "; "), start.elapsed())))
        }
        SemigroupAction::Facts { system, search, tuples } => {
            let sys = load_system(&system)?;
            let g = &sys.presentation;
            let ts = tuples
                .iter()
                .map(|t| ClopenTuple::new(parse_tuple(g, t)?).map_err(|e| data(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            let ex = Explorer::with_config(g, search.bound, config(&search));
            let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
            let m = extract_monoid_facts_with(&ex, &ts, &FactsConfig::default()).map_err(|e| data(e.to_string()))?;
            let r = state_lp(&m, "t0").map_err(|e| data(e.to_string()))?;
            let outcome = state_certificate(&mut report, &m, "t0", &r);
            Ok(emit(&report.finish(outcome, m.to_string().trim_end().replace('\n', "; "), start.elapsed())))
        }
    }
}

fn tuple_command(system: SystemArgs, search: SearchArgs, from: &str, to: &str, tiling: bool, argv: Vec<String>, start: Instant) -> Result<u8, Failure> {
    let sys = load_system(&system)?;
    let g = &sys.presentation;
    let a = parse_tuple(g, from)?;
    let b = parse_tuple(g, to)?;
    let ex = Explorer::with_config(g, search.bound, config(&search));
    let mut report = Report::new(argv, Some(sys.record()), search_parameters(&search));
    let o = if tiling { ex.type_equivalent(&a, &b) } else { ex.compare_tuple(&a, &b) };
    let summary = tuple_outcome(&mut report, &a, &b, &o, search.bound, tiling);
    Ok(emit(&report.finish(outcome_name(&o), summary, start.elapsed())))
}

fn state_certificate(report: &mut Report, m: &MonoidPresentation, target: &str, r: &StateResult) -> &'static str {
    match r {
        StateResult::Feasible(values) => {
            report.certificates.push(Certificate::state(m, target, values));
            "feasible"
        }
        StateResult::Infeasible(f) => {
            report.certificates.push(Certificate::state_farkas(m, target, f));
            "infeasible"
        }
    }
}

fn verify(path: &str) -> Result<u8, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| data(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| data(format!("{path}: {e}")))?
    };
    let report: Report = serde_json::from_str(&text).map_err(|e| data(format!("{path}: {e}")))?;
    let presentation = match &report.system {
        Some(s) => Some(
            sysfile::parse(&s.description)
                .map_err(|e| data(format!("embedded system: {e}")))?
                .presentation,
        ),
        None => None,
    };
    let mut failures = 0;
    for (i, c) in report.certificates.iter().enumerate() {
        match c.check(presentation.as_ref()) {
            Ok(()) => eprintln!("certificate {i}: ok"),
            Err(e) => {
                failures += 1;
                eprintln!("certificate {i}: FAILED: {e}");
            }
        }
    }
    println!(
        "{}",
        json!({
            "report": path,
            "outcome": report.outcome,
            "certificates": report.certificates.len(),
            "failures": failures,
        })
    );
    Ok(if failures == 0 { 0 } else { 1 })
}
