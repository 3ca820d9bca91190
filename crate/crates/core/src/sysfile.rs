//! Line-based text format for system descriptions.
//!
//! ```text
//! # the golden mean shift with its shift groupoid
//! system golden
//! alphabet 0 1
//! transitions
//!   1 1
//!   1 0
//! action etale
//! generator s0
//!   "" -> 0
//! generator s1
//!   0 -> 10
//! ```
//!
//! `transitions` is followed by one row of `0`/`1` entries per symbol and may
//! be omitted for a full shift. `initial` lists one `0`/`1` entry per symbol
//! for the symbols allowed in the first position. `action` is `group` for a
//! total action or `etale` otherwise; `max-pair-length` overrides the
//! composition cap. Words are symbol names written back to back; `""` or `ε`
//! is the empty word. `#` starts a comment.

use thiserror::Error;

use crate::bisections::{BisectionError, Generator, GroupoidPresentation, PrefixExchange, PresentationKind};
use crate::symbolic::{Subshift, Word};

/// A problem in a system file, located by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct SysFileError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A parsed system file.
#[derive(Debug, Clone)]
pub struct SystemFile {
    pub name: String,
    pub presentation: GroupoidPresentation,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> SysFileError {
    SysFileError {
        line,
        column,
        message: message.into(),
    }
}

const RESERVED: &[char] = &[',', '|', '"', '#', '{', '}', '[', ']'];

fn check_symbol_name(name: &str, line: usize, column: usize) -> Result<(), SysFileError> {
    let bracketed_tag = name.starts_with('[') && name.ends_with(']') && name.len() > 2 && name[1..name.len() - 1].chars().all(|c| c.is_ascii_digit());
    if !bracketed_tag && (name.contains(RESERVED) || name == "ε" || name.contains("->")) {
        return Err(err(line, column, format!("`{name}` cannot be used as a symbol name")));
    }
    Ok(())
}

fn bits(toks: &[Token<'_>], line: usize, k: usize, what: &str, fallback_col: usize) -> Result<Vec<bool>, SysFileError> {
    if toks.len() != k {
        let col = toks.get(k).map_or(fallback_col, |t| t.column);
        return Err(err(line, col, format!("{what} needs {k} entries, found {}", toks.len())));
    }
    toks.iter()
        .map(|t| match t.text {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(err(line, t.column, format!("expected 0 or 1, found `{other}`"))),
        })
        .collect()
}

struct PendingGenerator {
    name: String,
    line: usize,
    column: usize,
    /// `(u, v, line, column of u, column of v)`
    pairs: Vec<(String, String, usize, usize, usize)>,
}

/// Parses a system description.
pub fn parse(text: &str) -> Result<SystemFile, SysFileError> {
    let mut name: Option<String> = None;
    let mut alphabet: Option<(Vec<String>, usize)> = None;
    let mut matrix: Option<Vec<Vec<bool>>> = None;
    let mut initial: Option<Vec<bool>> = None;
    let mut kind: Option<PresentationKind> = None;
    let mut cap: Option<usize> = None;
    let mut generators: Vec<PendingGenerator> = Vec::new();
    let mut rows_left = 0usize;
    let mut in_generator = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokens(content);
        let Some(head) = toks.first() else {
            continue;
        };
        if rows_left > 0 {
            let k = alphabet.as_ref().map_or(0, |(a, _)| a.len());
            let row = bits(&toks, line_no, k, "a transition row", head.column)?;
            matrix.get_or_insert_with(Vec::new).push(row);
            rows_left -= 1;
            continue;
        }
        if let Some(arrow) = toks.iter().position(|t| t.text == "->") {
            if !in_generator {
                return Err(err(line_no, head.column, "pair outside a generator block"));
            }
            if arrow != 1 || toks.len() != 3 {
                return Err(err(line_no, head.column, "expected `u -> v`"));
            }
            let gen = generators.last_mut().expect("inside generator");
            gen.pairs
                .push((toks[0].text.to_string(), toks[2].text.to_string(), line_no, toks[0].column, toks[2].column));
            continue;
        }
        in_generator = false;
        let rest = &toks[1..];
        let need_alphabet = |col: usize| -> Result<usize, SysFileError> {
            alphabet
                .as_ref()
                .map(|(a, _)| a.len())
                .ok_or_else(|| err(line_no, col, "`alphabet` must come first"))
        };
        match head.text {
            "system" => {
                if rest.len() != 1 {
                    return Err(err(line_no, head.column, "expected `system NAME`"));
                }
                if name.is_some() {
                    return Err(err(line_no, head.column, "`system` given twice"));
                }
                name = Some(rest[0].text.to_string());
            }
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(err(line_no, head.column, "`alphabet` given twice"));
                }
                for t in rest {
                    check_symbol_name(t.text, line_no, t.column)?;
                }
                alphabet = Some((rest.iter().map(|t| t.text.to_string()).collect(), line_no));
            }
            "transitions" => {
                let k = need_alphabet(head.column)?;
                if matrix.is_some() {
                    return Err(err(line_no, head.column, "`transitions` given twice"));
                }
                if let Some(t) = rest.first() {
                    return Err(err(line_no, t.column, "rows go on the following lines"));
                }
                matrix = Some(Vec::new());
                rows_left = k;
            }
            "initial" => {
                let k = need_alphabet(head.column)?;
                initial = Some(bits(rest, line_no, k, "`initial`", head.column)?);
            }
            "action" => {
                kind = Some(match rest.first().map(|t| t.text) {
                    Some("group") if rest.len() == 1 => PresentationKind::GroupAction,
                    Some("etale") if rest.len() == 1 => PresentationKind::Etale,
                    _ => return Err(err(line_no, head.column, "expected `action group` or `action etale`")),
                });
            }
            "max-pair-length" => {
                let value = rest
                    .first()
                    .and_then(|t| t.text.parse::<usize>().ok())
                    .filter(|&v| v > 0 && rest.len() == 1)
                    .ok_or_else(|| err(line_no, head.column, "expected a positive integer"))?;
                cap = Some(value);
            }
            "generator" => {
                need_alphabet(head.column)?;
                if rest.len() != 1 {
                    return Err(err(line_no, head.column, "expected `generator NAME`"));
                }
                let valid = rest[0].text.chars().all(|c| c.is_alphanumeric() || c == '_') && rest[0].text != "id";
                if !valid {
                    return Err(err(line_no, rest[0].column, "generator names are letters, digits and `_`, other than `id`"));
                }
                if generators.iter().any(|g| g.name == rest[0].text) {
                    return Err(err(line_no, rest[0].column, format!("generator `{}` defined twice", rest[0].text)));
                }
                generators.push(PendingGenerator {
                    name: rest[0].text.to_string(),
                    line: line_no,
                    column: rest[0].column,
                    pairs: Vec::new(),
                });
                in_generator = true;
            }
            other => return Err(err(line_no, head.column, format!("unknown keyword `{other}`"))),
        }
    }
    let last_line = text.lines().count().max(1);
    if rows_left > 0 {
        return Err(err(last_line, 1, format!("{rows_left} transition rows missing")));
    }
    let name = name.ok_or_else(|| err(1, 1, "missing `system NAME`"))?;
    let (names, alphabet_line) = alphabet.ok_or_else(|| err(1, 1, "missing `alphabet`"))?;
    let kind = kind.ok_or_else(|| err(last_line, 1, "missing `action group|etale`"))?;
    let shift = Subshift::new(names, matrix, initial).map_err(|e| err(alphabet_line, 1, e.to_string()))?;

    let word = |text: &str, line: usize, column: usize| -> Result<Word, SysFileError> {
        shift.parse_word(text).map_err(|e| err(line, column, e.to_string()))
    };
    let mut gens = Vec::new();
    for g in &generators {
        let pairs = g
            .pairs
            .iter()
            .map(|(u, v, line, cu, cv)| Ok((word(u, *line, *cu)?, word(v, *line, *cv)?)))
            .collect::<Result<Vec<_>, SysFileError>>()?;
        let exchange = PrefixExchange::new(&shift, pairs).map_err(|e| err(g.line, g.column, format!("generator `{}`: {e}", g.name)))?;
        gens.push(Generator {
            name: g.name.clone(),
            exchange,
        });
    }
    let mut presentation = GroupoidPresentation::new(shift, gens, kind).map_err(|e| {
        let at = match &e {
            BisectionError::NotTotal(n) | BisectionError::DuplicateGenerator(n) => generators.iter().find(|g| &g.name == n),
            _ => None,
        };
        at.map_or_else(|| err(last_line, 1, e.to_string()), |g| err(g.line, g.column, e.to_string()))
    })?;
    if let Some(c) = cap {
        presentation = presentation.with_max_pair_len(c);
    }
    Ok(SystemFile { name, presentation })
}

fn format_word_token(shift: &Subshift, w: &Word) -> String {
    if w.is_empty() {
        "\"\"".into()
    } else {
        shift.format_word(w)
    }
}

/// Writes `g` in the text format; `parse` reads it back to an equal system.
pub fn dump(name: &str, g: &GroupoidPresentation) -> String {
    let shift = g.shift();
    let k = shift.alphabet_size();
    let mut out = format!("system {name}\nalphabet {}\n", shift.names().join(" "));
    if !shift.is_full_shift() {
        out.push_str("transitions\n");
        for i in 0..k {
            let row: Vec<&str> = (0..k)
                .map(|j| if shift.allows(i as u8, j as u8) { "1" } else { "0" })
                .collect();
            out.push_str(&format!("  {}\n", row.join(" ")));
        }
        let all = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
        if shift.initial_mask() != all {
            let row: Vec<&str> = (0..k)
                .map(|j| if shift.initial_mask() & (1 << j) != 0 { "1" } else { "0" })
                .collect();
            out.push_str(&format!("initial {}\n", row.join(" ")));
        }
    }
    let kind = match g.kind() {
        PresentationKind::GroupAction => "group",
        PresentationKind::Etale => "etale",
    };
    out.push_str(&format!("action {kind}\n"));
    if g.max_pair_len() != crate::bisections::DEFAULT_MAX_PAIR_LEN {
        out.push_str(&format!("max-pair-length {}\n", g.max_pair_len()));
    }
    for gen in g.generators() {
        out.push_str(&format!("generator {}\n", gen.name));
        for (u, v) in gen.exchange.pairs() {
            out.push_str(&format!("  {} -> {}\n", format_word_token(shift, u), format_word_token(shift, v)));
        }
    }
    out
}
