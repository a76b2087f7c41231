//! Text format:
//!
//! ```text
//! # comment
//! vars: R, Rt, T1
//! eliminate: Rt, T1
//! bind I(X;Y) = 1/2
//! assume I(V1,V2;Z|V0) <= I(V1;Z|V0) + I(V2;Z|V0)
//! Rt + T1 < I(V0,V1;Y1|Q)
//! Rt - R >= I(V0;Z|Q)
//! ```
//!
//! Relations are `<=`, `<`, `>=`, `>` and `=`. Names that are not declared
//! variables become symbolic constants.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{InequalitySystem, LinExpr, LinearInequality};
use crate::error::{Error, Result};
use crate::exact::{parse_rational, Rational};

/// Canonical spelling of an information atom: names inside each argument
/// group are sorted, and the two sides of a mutual information are ordered.
/// Other names are returned with whitespace removed.
pub fn canonical_atom(text: &str) -> Result<String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let sorted = |group: &str| -> Result<String> {
        let mut names: Vec<&str> = group.split(',').collect();
        if names.iter().any(|n| n.is_empty()) {
            return Err(Error::InvalidParameter(format!("empty name in `{text}`")));
        }
        names.sort_unstable();
        names.dedup();
        Ok(names.join(","))
    };
    let (kind, inner) = match (s.strip_prefix("I("), s.strip_prefix("H(")) {
        (Some(rest), _) => ('I', rest),
        (_, Some(rest)) => ('H', rest),
        _ => return Ok(s),
    };
    let inner = inner
        .strip_suffix(')')
        .ok_or_else(|| Error::InvalidParameter(format!("unbalanced `{text}`")))?;
    let (main, cond) = match inner.split_once('|') {
        Some((m, c)) => (m, Some(sorted(c)?)),
        None => (inner, None),
    };
    let body = if kind == 'I' {
        let groups: Vec<&str> = main.split(';').collect();
        if groups.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "`{text}`: mutual information takes exactly two groups"
            )));
        }
        let mut g = [sorted(groups[0])?, sorted(groups[1])?];
        g.sort();
        format!("{};{}", g[0], g[1])
    } else {
        if main.contains(';') {
            return Err(Error::InvalidParameter(format!("`{text}`: entropy takes one group")));
        }
        sorted(main)?
    };
    Ok(match cond {
        Some(c) => format!("{kind}({body}|{c})"),
        None => format!("{kind}({body})"),
    })
}

/// Splits `expr` into signed terms at parenthesis depth zero.
fn split_terms(expr: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    for ch in expr.chars() {
        match ch {
            '(' | '{' | '[' => depth += 1,
            ')' | '}' | ']' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') {
            if cur.trim().is_empty() {
                if ch == '-' {
                    neg = !neg;
                }
                continue;
            }
            out.push((neg, std::mem::take(&mut cur)));
            neg = ch == '-';
            continue;
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || out.is_empty() {
        out.push((neg, cur));
    }
    out
}

/// Parses a linear expression into `(coefficient, name)` pairs; constants
/// carry the name `None`.
pub(crate) fn parse_expr(expr: &str, line: usize) -> Result<Vec<(Rational, Option<String>)>> {
    if expr.chars().filter(|&c| c == '(').count() != expr.chars().filter(|&c| c == ')').count() {
        return Err(Error::parse(
            line,
            format!("unbalanced parentheses in `{}`", expr.trim()),
        ));
    }
    let mut out = Vec::new();
    for (neg, raw) in split_terms(expr) {
        let t = raw.trim();
        if t.is_empty() {
            return Err(Error::parse(line, "empty term"));
        }
        let sign = if neg { -Rational::one() } else { Rational::one() };
        if let Some(v) = parse_rational(t) {
            out.push((sign * v, None));
            continue;
        }
        let (coef, name) = match t.split_once('*') {
            Some((c, n)) if !c.contains('(') => {
                let c = parse_rational(c).ok_or_else(|| Error::parse(line, format!("bad coefficient `{c}`")))?;
                (c, n.trim())
            }
            _ => {
                let split = t
                    .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '/'))
                    .unwrap_or(t.len());
                if split == 0 {
                    (Rational::one(), t)
                } else {
                    let c = parse_rational(&t[..split])
                        .ok_or_else(|| Error::parse(line, format!("bad coefficient in `{t}`")))?;
                    (c, t[split..].trim())
                }
            }
        };
        if name.is_empty() || name.contains('*') {
            return Err(Error::parse(line, format!("bad term `{t}`")));
        }
        let valid = name.starts_with("I(") || name.starts_with("H(") || {
            name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
                && name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        };
        if !valid {
            return Err(Error::parse(line, format!("bad name `{name}`")));
        }
        let name = canonical_atom(name).map_err(|e| Error::parse(line, e.to_string()))?;
        out.push((sign * coef, Some(name)));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

fn split_relation(text: &str, line: usize) -> Result<(&str, Rel, &str)> {
    let b = text.as_bytes();
    let mut depth = 0i32;
    let mut found = None;
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'<' | b'>' | b'=' if depth == 0 => {
                let (rel, len) = match (b[i], b.get(i + 1)) {
                    (b'<', Some(b'=')) => (Rel::Le, 2),
                    (b'>', Some(b'=')) => (Rel::Ge, 2),
                    (b'<', _) => (Rel::Lt, 1),
                    (b'>', _) => (Rel::Gt, 1),
                    _ => (Rel::Eq, 1),
                };
                if found.is_some() {
                    return Err(Error::parse(line, "chained relations are not supported"));
                }
                found = Some((i, rel, len));
                i += len;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    let (i, rel, len) = found.ok_or_else(|| Error::parse(line, "missing relation"))?;
    Ok((&text[..i], rel, &text[i + len..]))
}

/// Parses `lhs REL rhs` into one or two `<`/`<=` rows.
pub(crate) fn parse_relation(text: &str, line: usize, vars: &[String]) -> Result<Vec<LinearInequality>> {
    let (l, rel, r) = split_relation(text, line)?;
    let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
    let mut rhs = LinExpr::default();
    for (side, k) in [(l, Rational::one()), (r, -Rational::one())] {
        for (c, name) in parse_expr(side, line)? {
            let c = c * &k;
            match name {
                Some(n) if vars.contains(&n) => {
                    *coeffs.entry(n).or_insert_with(Rational::zero) += c;
                }
                Some(n) => rhs.add_term(&n, -c),
                None => rhs.constant -= c,
            }
        }
    }
    let neg = |m: &BTreeMap<String, Rational>| m.iter().map(|(k, v)| (k.clone(), -v.clone())).collect();
    let le = |strict| LinearInequality::new(coeffs.clone(), strict, rhs.clone());
    let ge = |strict| LinearInequality::new(neg(&coeffs), strict, rhs.scaled(&-Rational::one()));
    Ok(match rel {
        Rel::Le => vec![le(false)],
        Rel::Lt => vec![le(true)],
        Rel::Ge => vec![ge(false)],
        Rel::Gt => vec![ge(true)],
        Rel::Eq => vec![le(false), ge(false)],
    })
}

fn name_list(text: &str, line: usize) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    for n in text.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        if !n.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
            return Err(Error::parse(line, format!("bad variable name `{n}`")));
        }
        if out.iter().any(|o| o == n) {
            return Err(Error::parse(line, format!("duplicate name `{n}`")));
        }
        out.push(n.to_string());
    }
    Ok(out)
}

pub fn parse_system(text: &str) -> Result<InequalitySystem> {
    let mut sys = InequalitySystem::default();
    let mut have_vars = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("vars:") {
            if have_vars {
                return Err(Error::parse(line, "duplicate `vars:` header"));
            }
            sys.variables = name_list(rest, line)?;
            have_vars = true;
            continue;
        }
        if !have_vars {
            return Err(Error::parse(line, "`vars:` must come first"));
        }
        if let Some(rest) = body.strip_prefix("eliminate:") {
            let order = name_list(rest, line)?;
            if let Some(v) = order.iter().find(|v| !sys.variables.contains(v)) {
                return Err(Error::parse(line, format!("cannot eliminate unknown variable `{v}`")));
            }
            sys.eliminate = order;
        } else if let Some(rest) = body.strip_prefix("consts:") {
            for n in rest.split(',').map(str::trim).filter(|n| !n.is_empty()) {
                let n = canonical_atom(n).map_err(|e| Error::parse(line, e.to_string()))?;
                if sys.variables.contains(&n) {
                    return Err(Error::parse(line, format!("`{n}` is already a variable")));
                }
                if !sys.constants.contains(&n) {
                    sys.constants.push(n);
                }
            }
        } else if let Some(rest) = body.strip_prefix("bind ") {
            let (name, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected `bind NAME = VALUE`"))?;
            let name = canonical_atom(name).map_err(|e| Error::parse(line, e.to_string()))?;
            if sys.variables.contains(&name) {
                return Err(Error::parse(line, format!("cannot bind variable `{name}`")));
            }
            let v = parse_rational(value).ok_or_else(|| Error::parse(line, format!("bad value `{}`", value.trim())))?;
            if !sys.constants.contains(&name) {
                sys.constants.push(name.clone());
            }
            sys.bindings.insert(name, v);
        } else if let Some(rest) = body.strip_prefix("assume ") {
            for r in parse_relation(rest, line, &sys.variables)? {
                sys.assume(r).map_err(|e| Error::parse(line, e.to_string()))?;
            }
        } else {
            for r in parse_relation(body, line, &sys.variables)? {
                sys.push(r).map_err(|e| Error::parse(line, e.to_string()))?;
            }
        }
    }
    if !have_vars {
        return Err(Error::parse(1, "missing `vars:` header"));
    }
    Ok(sys)
}

/// Parses `R1 -> R1n - R1p; R0 -> R0n + R1p`. Every name on the right is a
/// rate variable; the left side must be one of `vars`.
pub fn parse_mapping(text: &str, vars: &[&str]) -> Result<Vec<(String, LinExpr)>> {
    let mut out = Vec::new();
    for (i, part) in text
        .split([';', '\n'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .enumerate()
    {
        let line = i + 1;
        let (from, to) = part
            .split_once("->")
            .ok_or_else(|| Error::parse(line, format!("expected `VAR -> EXPR`, got `{part}`")))?;
        let from = from.trim();
        if !vars.contains(&from) {
            return Err(Error::UnknownName(from.to_string()));
        }
        let mut e = LinExpr::default();
        for (c, name) in parse_expr(to, line)? {
            match name {
                Some(n) => e.add_term(&n, c),
                None => e.constant += c,
            }
        }
        out.push((from.to_string(), e));
    }
    Ok(out)
}
