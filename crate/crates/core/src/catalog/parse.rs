//! Reader for the catalog text format.
//!
//! ```text
//! entry <id> <kind> <label> <lhs> [for i | for i=2..3]
//! hyp: A~B*, C1~C2          commuting pairs; `P*` means every indexed slot P1, P2, …
//! typo: <note>              flags the entry as a typo candidate
//! note: <note>
//! + <term>                  printed right-hand side, one term per line
//! corrected-lhs: C-1        left-hand side of the corrected variant
//! corrected:                following terms form the corrected right-hand side
//! end
//! interchange <id glob> A1:B1[,A2:B2]
//! ```
//!
//! A term is a sign, an optional `sum(n1=1..n)` or `multi(p)`, then factors in printed order:
//! `x2`, `x2^n1`, `(-x2)^n1`, a slot name, `poch(B1,n1)`, `ipoch(C2,n2+n3)`, `inv(C1-n1+1)`
//! and exactly one series call `F` or `F[A+n1, C1+1]`. Templates: `{i}` (entry level), `{k}`
//! (arity), `@(…)` and `@,(…)` (repeat for j = 1..k, space or comma joined), and a trailing
//! `@j` repeats the whole term.

use wildmatch::WildMatch;

use super::{
    Direction, Factor, Hypothesis, IdentityEntry, Lin, Magnitude, RhsTerm, ShiftSpec, Summation,
    Variant, XPower,
};
use crate::error::{Error, Result};
use crate::kind::{Group, LauricellaKind};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::CatalogParse {
        line,
        message: message.into(),
    }
}

pub(super) fn parse_catalog(src: &str, arity: usize) -> Result<Vec<IdentityEntry>> {
    let lines: Vec<(usize, String)> = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect();

    let mut entries: Vec<IdentityEntry> = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (ln, line) = &lines[i];
        if line.starts_with("entry ") {
            let start = i;
            while i < lines.len() && lines[i].1 != "end" {
                i += 1;
            }
            if i == lines.len() {
                return Err(err(*ln, "entry without end"));
            }
            entries.extend(parse_block(&lines[start..i], arity)?);
        } else if let Some(rest) = line.strip_prefix("interchange ") {
            let rest = expand_groups(rest, arity, *ln)?;
            let (glob, pairs) = rest
                .split_once(' ')
                .ok_or_else(|| err(*ln, "interchange needs a glob and slot pairs"))?;
            let swap: Vec<(String, String)> = pairs
                .split(',')
                .map(|p| {
                    p.trim()
                        .split_once(':')
                        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                        .ok_or_else(|| err(*ln, format!("bad pair {p}")))
                })
                .collect::<Result<_>>()?;
            let pattern = WildMatch::new(glob);
            let derived: Vec<IdentityEntry> = entries
                .iter()
                .filter(|e| pattern.matches(&e.id) && e.interchange.is_empty())
                .map(|e| super::interchange(e, &swap))
                .collect::<Result<_>>()?;
            if derived.is_empty() {
                return Err(err(*ln, format!("interchange matches nothing: {glob}")));
            }
            entries.extend(derived);
        } else {
            return Err(err(*ln, format!("unexpected line: {line}")));
        }
        i += 1;
    }
    Ok(entries)
}

fn parse_block(block: &[(usize, String)], arity: usize) -> Result<Vec<IdentityEntry>> {
    let (ln, header) = &block[0];
    let words: Vec<&str> = header.split_whitespace().collect();
    let range = match words.len() {
        5 => None,
        7 if words[5] == "for" => Some(parse_for(words[6], arity, *ln)?),
        _ => return Err(err(*ln, "entry header: entry <id> <kind> <label> <lhs> [for i]")),
    };
    let kind = match words[2] {
        k if k.len() == 2 && k.starts_with('G') => {
            LauricellaKind::generalized(k.chars().nth(1).unwrap(), arity)?
        }
        k => k
            .strip_prefix('F')
            .and_then(|d| d.parse::<u8>().ok())
            .ok_or_else(|| err(*ln, format!("unknown kind {k}")))
            .and_then(|d| LauricellaKind::three_variable(d).map_err(|e| err(*ln, e.to_string())))?,
    };

    let indices: Vec<Option<usize>> = match range {
        None => vec![None],
        Some((lo, hi)) => (lo..=hi).map(Some).collect(),
    };
    let mut out = Vec::new();
    for idx in indices {
        let subst = |s: &str| {
            let s = s.replace("{k}", &arity.to_string());
            match idx {
                Some(i) => s.replace("{i}", &i.to_string()),
                None => s,
            }
        };
        let header: Vec<String> = words.iter().map(|w| subst(w)).collect();
        let body: Vec<(usize, String)> = block[1..].iter().map(|(l, s)| (*l, subst(s))).collect();
        out.push(build_entry(&kind, &header, &body, arity, *ln)?);
    }
    Ok(out)
}

fn parse_for(spec: &str, arity: usize, ln: usize) -> Result<(usize, usize)> {
    if spec == "i" {
        return Ok((1, arity));
    }
    let range = spec
        .strip_prefix("i=")
        .and_then(|r| r.split_once(".."))
        .ok_or_else(|| err(ln, format!("bad range {spec}")))?;
    let lo = range.0.parse().map_err(|_| err(ln, "bad range start"))?;
    let hi = range.1.parse().map_err(|_| err(ln, "bad range end"))?;
    Ok((lo, hi))
}

fn build_entry(
    kind: &LauricellaKind,
    header: &[String],
    body: &[(usize, String)],
    arity: usize,
    ln: usize,
) -> Result<IdentityEntry> {
    let lhs = parse_lhs(kind, &header[4], ln)?;
    let mut commute = Vec::new();
    let mut note = None;
    let mut typo = false;
    let mut printed_terms = Vec::new();
    let mut corrected_terms = Vec::new();
    let mut corrected_lhs = None;
    let mut in_corrected = false;

    for (l, line) in body {
        if let Some(rest) = line.strip_prefix("hyp:") {
            for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (a, b) = pair.split_once('~').ok_or_else(|| err(*l, format!("bad pair {pair}")))?;
                let left = expand_star(kind, a.trim(), *l)?;
                let right = expand_star(kind, b.trim(), *l)?;
                for &x in &left {
                    for &y in &right {
                        let h = Hypothesis::Commute(x.min(y), x.max(y));
                        if x != y && !commute.contains(&h) {
                            commute.push(h);
                        }
                    }
                }
            }
        } else if let Some(rest) = line.strip_prefix("typo:") {
            typo = true;
            note = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("note:") {
            note = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("corrected-lhs:") {
            corrected_lhs = Some(parse_lhs(kind, rest.trim(), *l)?);
        } else if line == "corrected:" {
            in_corrected = true;
        } else if line.starts_with('+') || line.starts_with('-') {
            let terms = parse_term_line(kind, line, arity, *l)?;
            if in_corrected {
                corrected_terms.extend(terms);
            } else {
                printed_terms.extend(terms);
            }
        } else {
            return Err(err(*l, format!("unexpected line: {line}")));
        }
    }
    if printed_terms.is_empty() {
        return Err(err(ln, "entry has no terms"));
    }
    let printed = Variant {
        lhs: lhs.clone(),
        rhs: printed_terms,
    };
    let corrected = if in_corrected || corrected_lhs.is_some() {
        Some(Variant {
            lhs: corrected_lhs.unwrap_or(lhs),
            rhs: if corrected_terms.is_empty() {
                printed.rhs.clone()
            } else {
                corrected_terms
            },
        })
    } else {
        None
    };
    if corrected.is_some() && !typo {
        return Err(err(ln, "corrected variant on an entry not flagged as typo"));
    }

    let effective = corrected.as_ref().unwrap_or(&printed).lhs.clone();
    let mut hypotheses = commute;
    hypotheses.extend(invertibility(kind, &effective));
    Ok(IdentityEntry {
        id: header[1].clone(),
        kind: *kind,
        equation: header[3].clone(),
        printed,
        corrected,
        hypotheses,
        typo_candidate: typo,
        note,
        interchange: Vec::new(),
    })
}

/// Invertibility conditions implied by the shift on the left-hand side.
fn invertibility(kind: &LauricellaKind, lhs: &ShiftSpec) -> Vec<Hypothesis> {
    let slot = lhs.target;
    let group = kind.signature()[slot].group;
    match (group, lhs.direction) {
        (Group::C, _) => vec![Hypothesis::Invertible { slot, sign: -1, from: 0 }],
        (_, Direction::Raise) => vec![Hypothesis::Invertible { slot, sign: 1, from: 0 }],
        (_, Direction::Lower) => vec![
            Hypothesis::Invertible { slot, sign: 1, from: 0 },
            Hypothesis::Invertible { slot, sign: -1, from: 1 },
        ],
    }
}

fn expand_star(kind: &LauricellaKind, name: &str, ln: usize) -> Result<Vec<usize>> {
    match name.strip_suffix('*') {
        Some(prefix) => {
            let found: Vec<usize> = kind
                .signature()
                .iter()
                .enumerate()
                .filter(|(_, s)| {
                    s.name
                        .strip_prefix(prefix)
                        .is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit()))
                })
                .map(|(i, _)| i)
                .collect();
            if found.is_empty() {
                return Err(err(ln, format!("{name} matches no slot of {kind}")));
            }
            Ok(found)
        }
        None => Ok(vec![slot(kind, name, ln)?]),
    }
}

fn slot(kind: &LauricellaKind, name: &str, ln: usize) -> Result<usize> {
    kind.slot_index(name)
        .ok_or_else(|| err(ln, format!("{kind} has no slot {name}")))
}

fn parse_lhs(kind: &LauricellaKind, text: &str, ln: usize) -> Result<ShiftSpec> {
    let (name, rest) = split_slot(text).ok_or_else(|| err(ln, format!("bad lhs {text}")))?;
    let target = slot(kind, name, ln)?;
    let direction = match rest.chars().next() {
        Some('+') => Direction::Raise,
        Some('-') => Direction::Lower,
        _ => return Err(err(ln, format!("bad lhs {text}"))),
    };
    let magnitude = match &rest[1..] {
        "n" => Magnitude::Variable,
        m => Magnitude::Fixed(m.parse().map_err(|_| err(ln, format!("bad magnitude {m}")))?),
    };
    Ok(ShiftSpec {
        target,
        direction,
        magnitude,
    })
}

/// Splits `C1+2-n1` into `("C1", "+2-n1")`.
fn split_slot(text: &str) -> Option<(&str, &str)> {
    let mut chars = text.char_indices();
    match chars.next() {
        Some((_, c)) if c.is_ascii_uppercase() && c != 'F' && c != 'N' => {}
        _ => return None,
    }
    let end = chars
        .find(|(_, c)| !c.is_ascii_digit())
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    Some((&text[..end], &text[end..]))
}

fn parse_lin(text: &str, ln: usize) -> Result<Lin> {
    let mut lin = Lin::default();
    let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if text.is_empty() {
        return Ok(lin);
    }
    let mut rest = text.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let sign = match rest.as_bytes()[0] {
            b'+' => {
                rest = &rest[1..];
                1
            }
            b'-' => {
                rest = &rest[1..];
                -1
            }
            _ if first => 1,
            _ => return Err(err(ln, format!("bad linear form {text}"))),
        };
        first = false;
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        let atom = &rest[..end];
        rest = &rest[end..];
        if let Ok(c) = atom.parse::<i64>() {
            lin.constant += sign * c;
        } else if atom == "n" {
            lin.n += sign;
        } else if atom == "N" {
            lin.total += sign;
        } else if let Some(d) = atom.strip_prefix('n').and_then(|d| d.parse::<usize>().ok()) {
            if !(1..=9).contains(&d) {
                return Err(err(ln, format!("summation variable {atom} out of range")));
            }
            lin.vars[d - 1] += sign;
        } else {
            return Err(err(ln, format!("bad atom {atom} in {text}")));
        }
    }
    Ok(lin)
}

/// Replaces `@(body)` and `@,(body)` by `body` repeated for j = 1..k.
fn expand_groups(line: &str, k: usize, ln: usize) -> Result<String> {
    let mut out = String::new();
    let mut rest = line;
    while let Some(pos) = rest.find('@') {
        let after = &rest[pos + 1..];
        let (sep, open) = if after.starts_with(",(") {
            (", ", pos + 2)
        } else if after.starts_with('(') {
            (" ", pos + 1)
        } else {
            // A trailing `@j` is handled by the caller.
            out.push_str(&rest[..=pos]);
            rest = after;
            continue;
        };
        out.push_str(&rest[..pos]);
        let close = matching_paren(rest, open).ok_or_else(|| err(ln, "unbalanced template group"))?;
        let body = &rest[open + 1..close];
        let parts: Vec<String> = (1..=k).map(|j| body.replace("{j}", &j.to_string())).collect();
        out.push_str(&parts.join(sep));
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_term_line(kind: &LauricellaKind, line: &str, k: usize, ln: usize) -> Result<Vec<RhsTerm>> {
    let line = expand_groups(line, k, ln)?;
    let line = line.trim();
    let lines: Vec<String> = match line.strip_suffix("@j") {
        Some(body) => (1..=k).map(|j| body.replace("{j}", &j.to_string())).collect(),
        None => vec![line.to_string()],
    };
    lines.iter().map(|l| parse_term(kind, l, ln)).collect()
}

/// Splits on whitespace outside brackets.
fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_term(kind: &LauricellaKind, line: &str, ln: usize) -> Result<RhsTerm> {
    let negative = line.starts_with('-');
    let tokens = tokenize(&line[1..]);
    let mut iter = tokens.iter().peekable();
    let mut summation = Summation::None;
    if let Some(t) = iter.peek() {
        if let Some(inner) = t.strip_prefix("sum(").and_then(|t| t.strip_suffix(')')) {
            let (var, range) = inner.split_once('=').ok_or_else(|| err(ln, format!("bad sum {t}")))?;
            let var = parse_lin(var, ln)?;
            let idx = var
                .vars
                .iter()
                .position(|&c| c == 1)
                .filter(|_| var == single_var(&var))
                .ok_or_else(|| err(ln, format!("bad summation variable in {t}")))?;
            let (lo, hi) = range.split_once("..").ok_or_else(|| err(ln, format!("bad sum {t}")))?;
            summation = Summation::Range {
                var: idx,
                lo: parse_lin(lo, ln)?,
                hi: parse_lin(hi, ln)?,
            };
            iter.next();
        } else if let Some(inner) = t.strip_prefix("multi(").and_then(|t| t.strip_suffix(')')) {
            let parts: usize = inner.parse().map_err(|_| err(ln, format!("bad multi {t}")))?;
            if !(1..=9).contains(&parts) {
                return Err(err(ln, "multi needs 1 to 9 parts"));
            }
            summation = Summation::Multinomial { parts };
            iter.next();
        }
    }

    let mut scalars = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut series = None;
    for tok in iter {
        if tok == "F" || tok.starts_with("F[") {
            if series.is_some() {
                return Err(err(ln, "more than one series call in a term"));
            }
            series = Some(parse_series(kind, tok, ln)?);
        } else if tok.starts_with('x') || tok.starts_with("(-x") {
            scalars.push(parse_xpower(kind, tok, ln)?);
        } else {
            let f = parse_factor(kind, tok, ln)?;
            if series.is_some() {
                right.push(f);
            } else {
                left.push(f);
            }
        }
    }
    let series = series.ok_or_else(|| err(ln, "term without series call"))?;
    Ok(RhsTerm {
        negative,
        summation,
        scalars,
        left,
        series,
        right,
    })
}

fn single_var(l: &Lin) -> Lin {
    let mut v = Lin::default();
    if let Some(i) = l.vars.iter().position(|&c| c == 1) {
        v.vars[i] = 1;
    }
    v
}

fn parse_series(kind: &LauricellaKind, tok: &str, ln: usize) -> Result<Vec<(usize, Lin)>> {
    if tok == "F" {
        return Ok(Vec::new());
    }
    let inner = tok
        .strip_prefix("F[")
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| err(ln, format!("bad series call {tok}")))?;
    let mut out: Vec<(usize, Lin)> = Vec::new();
    for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, rest) = split_slot(item).ok_or_else(|| err(ln, format!("bad shift {item}")))?;
        let s = slot(kind, name, ln)?;
        if out.iter().any(|(t, _)| *t == s) {
            return Err(err(ln, format!("slot {name} shifted twice")));
        }
        out.push((s, parse_lin(rest, ln)?));
    }
    Ok(out)
}

fn parse_xpower(kind: &LauricellaKind, tok: &str, ln: usize) -> Result<XPower> {
    let (base, exponent) = match tok.split_once('^') {
        Some((b, e)) => {
            let e = e.strip_prefix('(').and_then(|e| e.strip_suffix(')')).unwrap_or(e);
            (b, parse_lin(e, ln)?)
        }
        None => (tok, Lin::constant(1)),
    };
    let (negate, name) = match base.strip_prefix("(-").and_then(|b| b.strip_suffix(')')) {
        Some(inner) => (true, inner),
        None => (false, base),
    };
    let axis: usize = name
        .strip_prefix('x')
        .and_then(|d| d.parse().ok())
        .filter(|&d| d >= 1 && d <= kind.arity())
        .ok_or_else(|| err(ln, format!("bad variable {tok}")))?;
    Ok(XPower {
        axis: axis - 1,
        negate,
        exponent,
    })
}

fn parse_factor(kind: &LauricellaKind, tok: &str, ln: usize) -> Result<Factor> {
    let call = |prefix: &str| tok.strip_prefix(prefix).and_then(|t| t.strip_suffix(')'));
    if let Some(inner) = call("poch(").or_else(|| call("ipoch(")) {
        let (name, len) = inner.split_once(',').ok_or_else(|| err(ln, format!("bad factor {tok}")))?;
        let s = slot(kind, name.trim(), ln)?;
        let len = parse_lin(len, ln)?;
        return Ok(if tok.starts_with('i') {
            Factor::IPoch(s, len)
        } else {
            Factor::Poch(s, len)
        });
    }
    if let Some(inner) = call("inv(") {
        let (name, rest) = split_slot(inner).ok_or_else(|| err(ln, format!("bad factor {tok}")))?;
        return Ok(Factor::InvShift(slot(kind, name, ln)?, parse_lin(rest, ln)?));
    }
    Ok(Factor::Param(slot(kind, tok, ln)?))
}

/// Inverse of [`parse_term`], up to template expansion.
pub(super) fn render_term(kind: &LauricellaKind, t: &RhsTerm) -> String {
    let sig = kind.signature();
    let name = |s: usize| sig[s].name.clone();
    let shifted = |s: usize, l: &Lin| {
        if l.is_zero() {
            name(s)
        } else {
            let body = l.to_string();
            if body.starts_with('-') {
                format!("{}{body}", name(s))
            } else {
                format!("{}+{body}", name(s))
            }
        }
    };
    let factor = |f: &Factor| match f {
        Factor::Param(s) => name(*s),
        Factor::Poch(s, l) => format!("poch({},{l})", name(*s)),
        Factor::IPoch(s, l) => format!("ipoch({},{l})", name(*s)),
        Factor::InvShift(s, l) => format!("inv({})", shifted(*s, l)),
    };
    let mut parts = vec![if t.negative { "-".to_string() } else { "+".to_string() }];
    match &t.summation {
        Summation::None => {}
        Summation::Range { var, lo, hi } => parts.push(format!("sum(n{}={lo}..{hi})", var + 1)),
        Summation::Multinomial { parts: p } => parts.push(format!("multi({p})")),
    }
    for x in &t.scalars {
        let base = if x.negate {
            format!("(-x{})", x.axis + 1)
        } else {
            format!("x{}", x.axis + 1)
        };
        if x.exponent == Lin::constant(1) {
            parts.push(base);
        } else {
            parts.push(format!("{base}^({})", x.exponent));
        }
    }
    parts.extend(t.left.iter().map(factor));
    if t.series.is_empty() {
        parts.push("F".into());
    } else {
        let items: Vec<String> = t.series.iter().map(|(s, l)| shifted(*s, l)).collect();
        parts.push(format!("F[{}]", items.join(", ")));
    }
    parts.extend(t.right.iter().map(factor));
    parts.join(" ")
}
