//! Built-in example systems.

use thiserror::Error;

use crate::bisections::{BisectionError, Generator, GroupoidPresentation, PrefixExchange, PresentationKind};
use crate::symbolic::{Clopen, Subshift, Symbol, SymbolicError, Word, MAX_ALPHABET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Bisection(#[from] BisectionError),
    #[error("declared relation fails: {0}")]
    Relation(String),
    #[error("the solver needs a non-empty word")]
    EmptyWord,
    #[error("unknown built-in system {0:?}")]
    Unknown(String),
}

/// A named presentation with a note on where it comes from.
#[derive(Debug, Clone)]
pub struct SystemDescriptor {
    pub name: String,
    pub presentation: GroupoidPresentation,
    pub description: String,
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn exchange(shift: &Subshift, pairs: &[(&str, &str)]) -> Result<PrefixExchange, CatalogError> {
    Ok(PrefixExchange::parse(shift, pairs)?)
}

fn check_power_is_identity(g: &PrefixExchange, n: usize, label: &str) -> Result<(), CatalogError> {
    let mut acc = g.clone();
    for _ in 1..n {
        acc = PrefixExchange::compose(g, &acc)?;
    }
    if acc.is_identity() && acc.source().is_whole() {
        Ok(())
    } else {
        Err(CatalogError::Relation(format!("{label}^{n} = id")))
    }
}

/// The `Z₂ * Z₃` action on `{0,1}^ℕ` with `φ` flipping the first bit and
/// `ψ` cycling `0x → 11x → 10x → 0x`. Its crossed product is `O₂`.
pub fn o2_action() -> GroupoidPresentation {
    let shift = Subshift::full(2).expect("binary shift");
    let phi = exchange(&shift, &[("0", "1"), ("1", "0")]).expect("phi table");
    let psi = exchange(&shift, &[("0", "11"), ("11", "10"), ("10", "0")]).expect("psi table");
    check_power_is_identity(&phi, 2, "phi").expect("phi is an involution");
    check_power_is_identity(&psi, 3, "psi").expect("psi has order three");
    GroupoidPresentation::new(
        shift,
        vec![
            Generator { name: "phi".into(), exchange: phi },
            Generator { name: "psi".into(), exchange: psi },
        ],
        PresentationKind::GroupAction,
    )
    .expect("o2 presentation")
}

/// A group element of the `O₂` model together with its word.
#[derive(Debug, Clone)]
pub struct SolvedWord {
    /// Letters in composition order: the last letter is applied first.
    pub letters: Vec<&'static str>,
    pub exchange: PrefixExchange,
}

impl SolvedWord {
    pub fn label(&self) -> String {
        if self.letters.is_empty() {
            "id".into()
        } else {
            self.letters.join("*")
        }
    }
}

/// A group element mapping `N_0` onto `N_z`, built by reducing `z` to `0`
/// and inverting the reduction:
///
/// * `11y` goes to `0y` under `ψ⁻¹`,
/// * `10y` goes to `0y` under `ψ`,
/// * `0y` goes to `1y` under `φ`,
///
/// and a final `φ` turns `1` into `0`.
pub fn o2_solver(z: &Word) -> Result<SolvedWord, CatalogError> {
    if z.is_empty() {
        return Err(CatalogError::EmptyWord);
    }
    if z.symbols().iter().any(|&s| s > 1) {
        return Err(CatalogError::Parameter("binary word expected".into()));
    }
    let g = o2_action();
    // Reduction steps in the order they are applied.
    let mut steps: Vec<&'static str> = Vec::new();
    let mut cur: Vec<Symbol> = z.symbols().to_vec();
    while cur.len() >= 2 {
        match (cur[0], cur[1]) {
            (0, _) => {
                cur[0] = 1;
                steps.push("phi");
            }
            (_, 1) => {
                cur.splice(0..2, [0]);
                steps.push("psi^-1");
            }
            _ => {
                cur.splice(0..2, [0]);
                steps.push("psi");
            }
        }
    }
    if cur == [1] {
        steps.push("phi");
    }
    // The solver is the inverse of steps[last] ∘ … ∘ steps[0].
    let letters: Vec<&'static str> = steps
        .iter()
        .map(|s| match *s {
            "phi" => "phi",
            "psi" => "psi^-1",
            _ => "psi",
        })
        .collect();
    let mut acc = g.identity();
    for l in letters.iter().rev() {
        let e = match *l {
            "phi" => g.generator("phi").expect("phi").clone(),
            "psi" => g.generator("psi").expect("psi").clone(),
            _ => g.generator("psi").expect("psi").invert(),
        };
        acc = PrefixExchange::compose(&e, &acc)?;
    }
    Ok(SolvedWord { letters, exchange: acc })
}

fn free_names(n: usize) -> Vec<String> {
    (0..n)
        .flat_map(|i| {
            let c = (b'a' + i as u8) as char;
            [c.to_string(), c.to_ascii_uppercase().to_string()]
        })
        .collect()
}

/// The free group `F_n` on its boundary: reduced infinite words over
/// `a₁, a₁⁻¹, …` (written `a, A, b, B, …`), acted on by left multiplication.
pub fn free_boundary(n: usize) -> Result<GroupoidPresentation, CatalogError> {
    if !(2..=26).contains(&n) {
        return Err(CatalogError::Parameter(format!("free rank {n} not in 2..=26")));
    }
    let k = 2 * n;
    let inv = |s: usize| s ^ 1;
    let matrix = (0..k).map(|i| (0..k).map(|j| j != inv(i)).collect()).collect();
    let shift = Subshift::new(free_names(n), Some(matrix), None)?;
    let mut gens = Vec::new();
    for i in 0..n {
        let a = (2 * i) as Symbol;
        let a_inv = (2 * i + 1) as Symbol;
        let mut pairs = Vec::new();
        // a · (a⁻¹ α …) = α …
        for alpha in shift.follower_symbols(&Word::from_symbols(vec![a_inv])) {
            pairs.push((Word::from_symbols(vec![a_inv, alpha]), Word::from_symbols(vec![alpha])));
        }
        // a · (β …) = a β … for β ≠ a⁻¹
        for beta in 0..k as Symbol {
            if beta != a_inv {
                pairs.push((Word::from_symbols(vec![beta]), Word::from_symbols(vec![a, beta])));
            }
        }
        let ex = PrefixExchange::new(&shift, pairs)?;
        let back = PrefixExchange::compose(&ex, &ex.invert())?;
        if !(back.is_identity() && back.source().is_whole()) {
            return Err(CatalogError::Relation(format!("{0}*{0}^-1 = id", shift.name(a))));
        }
        gens.push(Generator {
            name: shift.name(a).to_string(),
            exchange: ex,
        });
    }
    Ok(GroupoidPresentation::new(shift, gens, PresentationKind::GroupAction)?)
}

/// Deaconu–Renault groupoid of the shift on an SFT: one generator
/// `s_α = (β ↦ αβ)` per symbol, with source the follower set of `α`.
pub fn sft_dr(shift: &Subshift) -> Result<GroupoidPresentation, CatalogError> {
    let mut gens = Vec::new();
    for a in 0..shift.alphabet_size() as Symbol {
        if shift.initial_mask() & (1 << a) == 0 {
            continue;
        }
        let aw = Word::from_symbols(vec![a]);
        let pairs: Vec<(Word, Word)> = shift
            .follower_symbols(&aw)
            .map(|b| (Word::from_symbols(vec![b]), Word::from_symbols(vec![a, b])))
            .collect();
        let ex = PrefixExchange::new(shift, pairs)?.canonical();
        gens.push(Generator {
            name: format!("s{}", shift.name(a)),
            exchange: ex,
        });
    }
    Ok(GroupoidPresentation::new(shift.clone(), gens, PresentationKind::Etale)?)
}

/// Deaconu–Renault groupoid of the full `k`-shift (the Cuntz groupoid).
pub fn full_shift_dr(k: usize) -> Result<GroupoidPresentation, CatalogError> {
    sft_dr(&Subshift::full(k)?)
}

pub fn golden_mean_shift() -> Subshift {
    Subshift::new(names(&["0", "1"]), Some(vec![vec![true, true], vec![true, false]]), None)
        .expect("golden mean shift")
}

pub fn golden_mean_dr() -> GroupoidPresentation {
    sft_dr(&golden_mean_shift()).expect("golden mean presentation")
}

/// Full `k`-shift with no generators: every unit is fixed.
pub fn trivial_action(k: usize) -> Result<GroupoidPresentation, CatalogError> {
    Ok(GroupoidPresentation::new(
        Subshift::full(k)?,
        Vec::new(),
        PresentationKind::GroupAction,
    )?)
}

/// `Z₂` swapping the first symbols `0` and `1` of the full `k`-shift.
pub fn flip(k: usize) -> Result<GroupoidPresentation, CatalogError> {
    let shift = Subshift::full(k)?;
    let mut pairs = vec![
        (Word::from_symbols(vec![0]), Word::from_symbols(vec![1])),
        (Word::from_symbols(vec![1]), Word::from_symbols(vec![0])),
    ];
    for s in 2..k as Symbol {
        pairs.push((Word::from_symbols(vec![s]), Word::from_symbols(vec![s])));
    }
    let ex = PrefixExchange::new(&shift, pairs)?;
    check_power_is_identity(&ex, 2, "flip")?;
    Ok(GroupoidPresentation::new(
        shift,
        vec![Generator { name: "flip".into(), exchange: ex }],
        PresentationKind::GroupAction,
    )?)
}

/// The amplification `G × {1..m}`: a fiber tag `[i]` is prepended to every
/// point and generators act on each fiber separately. Tags are the only
/// initial symbols and never occur later.
pub fn amplify(g: &GroupoidPresentation, m: usize) -> Result<GroupoidPresentation, CatalogError> {
    let base = g.shift();
    let k = base.alphabet_size();
    if m == 0 {
        return Err(CatalogError::Parameter("amplification needs m >= 1".into()));
    }
    if k + m > MAX_ALPHABET {
        return Err(CatalogError::Parameter(format!(
            "amplified alphabet of {} symbols exceeds {MAX_ALPHABET}",
            k + m
        )));
    }
    let mut all_names: Vec<String> = base.names().to_vec();
    all_names.extend((1..=m).map(|i| format!("[{i}]")));
    let total = k + m;
    let mut matrix = vec![vec![false; total]; total];
    for (i, row) in matrix.iter_mut().enumerate() {
        let mask = if i < k { base.row(i as Symbol) } else { base.initial_mask() };
        for (j, cell) in row.iter_mut().enumerate().take(k) {
            *cell = mask & (1 << j) != 0;
        }
    }
    let initial = (0..total).map(|i| i >= k).collect();
    let shift = Subshift::new(all_names, Some(matrix), Some(initial))?;
    let tags: Vec<Symbol> = (k..total).map(|t| t as Symbol).collect();
    let mut gens = Vec::new();
    for gen in g.generators() {
        let mut pairs = Vec::new();
        for &t in &tags {
            let tw = Word::from_symbols(vec![t]);
            for (u, v) in gen.exchange.pairs() {
                pairs.push((tw.concat(u.symbols()), tw.concat(v.symbols())));
            }
        }
        gens.push(Generator {
            name: gen.name.clone(),
            exchange: PrefixExchange::new(&shift, pairs)?,
        });
    }
    Ok(GroupoidPresentation::new(shift, gens, g.kind())?)
}

/// The fiber clopen `N_[i]` of an amplified system (1-based).
pub fn fiber(g: &GroupoidPresentation, i: usize) -> Result<Clopen, CatalogError> {
    Ok(Clopen::parse(g.shift(), &format!("[{i}]"))?)
}

/// Names accepted by [`builtin`] that `catalog list` shows.
pub const LISTED: &[&str] = &["o2", "trivial2", "free2", "dr2", "golden", "flip2", "o2x2"];

fn suffix(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok()
}

/// Looks up a built-in system: `o2`, `trivial<k>`, `free<n>`, `dr<k>`,
/// `golden`, `flip<k>` or `o2x<m>`.
pub fn builtin(name: &str) -> Result<SystemDescriptor, CatalogError> {
    let (presentation, description) = if name == "o2" {
        (o2_action(), "Z2*Z3 action on {0,1}^N, a dynamical model of O2".to_string())
    } else if name == "golden" {
        (golden_mean_dr(), "Deaconu-Renault groupoid of the golden mean shift".into())
    } else if let Some(m) = suffix(name, "o2x") {
        (amplify(&o2_action(), m)?, format!("amplification of the O2 model by {m} fibers"))
    } else if let Some(k) = suffix(name, "trivial") {
        (trivial_action(k)?, format!("trivial action on the full {k}-shift"))
    } else if let Some(n) = suffix(name, "free") {
        (free_boundary(n)?, format!("free group F{n} acting on its boundary"))
    } else if let Some(k) = suffix(name, "dr") {
        (full_shift_dr(k)?, format!("Deaconu-Renault groupoid of the full {k}-shift (Cuntz groupoid)"))
    } else if let Some(k) = suffix(name, "flip") {
        (flip(k)?, format!("Z2 swapping the first symbols 0 and 1 of the full {k}-shift"))
    } else {
        return Err(CatalogError::Unknown(name.into()));
    };
    Ok(SystemDescriptor {
        name: name.into(),
        presentation,
        description,
    })
}
