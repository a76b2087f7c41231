//! Implication between inequality systems with symbolic right-hand sides.
//!
//! A row `c.x <= d(a)` follows from premises `A x <= e(a)` and assumptions
//! `0 <= g(a)` exactly when `c = lambda A` and `d - lambda e = mu g + s` for
//! some `lambda, mu, s >= 0`. The multipliers are returned as a certificate.
//! Information atoms `I(..)` and `H(..)` are assumed non-negative.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{InequalitySystem, LinExpr, LinearInequality};
use crate::error::{Error, Result};
use crate::exact::{format_rational, Rational};
use crate::lp::{minimize, LpOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparisonMode {
    /// Strict rows must be implied strictly.
    Exact,
    /// Every row is read as non-strict.
    Closure,
}

/// Non-negative multipliers proving one row from others.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `(premise row, multiplier)`.
    pub rows: Vec<(String, String)>,
    /// `(assumption, multiplier)`.
    pub assumptions: Vec<(String, String)>,
    pub slack: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowCheck {
    pub row: String,
    pub certificate: Option<Certificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionComparison {
    pub equal: bool,
    /// Rows of the second system derived from the first.
    pub forward: Vec<RowCheck>,
    /// Rows of the first system derived from the second.
    pub backward: Vec<RowCheck>,
}

impl RegionComparison {
    pub fn failures(&self) -> impl Iterator<Item = &RowCheck> {
        self.forward
            .iter()
            .chain(&self.backward)
            .filter(|c| c.certificate.is_none())
    }
}

fn is_information_atom(name: &str) -> bool {
    name.starts_with("I(") || name.starts_with("H(")
}

fn nonneg_atom(name: &str) -> LinearInequality {
    LinearInequality::new(BTreeMap::new(), false, LinExpr::term(name, Rational::one()))
}

fn relaxed(r: &LinearInequality, mode: ComparisonMode) -> LinearInequality {
    match mode {
        ComparisonMode::Exact => r.clone(),
        ComparisonMode::Closure => LinearInequality {
            strict: false,
            ..r.clone()
        },
    }
}

/// Tries to derive `target` from `premises` and `assumptions` after applying
/// `bindings`. Returns the certificate when the implication holds.
pub fn implies(
    premises: &[LinearInequality],
    assumptions: &[LinearInequality],
    bindings: &BTreeMap<String, Rational>,
    target: &LinearInequality,
    mode: ComparisonMode,
) -> Option<Certificate> {
    let prem: Vec<LinearInequality> = premises.iter().map(|r| relaxed(&r.bind(bindings), mode)).collect();
    let target = relaxed(&target.bind(bindings), mode);
    let mut assume: Vec<LinearInequality> = assumptions.iter().map(|r| relaxed(&r.bind(bindings), mode)).collect();

    let mut vars: BTreeSet<String> = target.coeffs.keys().cloned().collect();
    let mut atoms: BTreeSet<String> = target.rhs.terms.keys().cloned().collect();
    for r in prem.iter().chain(&assume) {
        vars.extend(r.coeffs.keys().cloned());
        atoms.extend(r.rhs.terms.keys().cloned());
    }
    for a in &atoms {
        if is_information_atom(a) {
            assume.push(nonneg_atom(a));
        }
    }
    let vars: Vec<String> = vars.into_iter().collect();
    let atoms: Vec<String> = atoms.into_iter().collect();

    let np = prem.len();
    let na = assume.len();
    let ncols = np + na + 1;
    let mut a = Vec::with_capacity(vars.len() + atoms.len() + 1);
    let mut b = Vec::with_capacity(a.capacity());
    for v in &vars {
        let mut row = vec![Rational::zero(); ncols];
        for (i, p) in prem.iter().enumerate() {
            row[i] = p.coeff(v);
        }
        a.push(row);
        b.push(target.coeff(v));
    }
    let term = |e: &LinExpr, k: &str| e.terms.get(k).cloned().unwrap_or_else(Rational::zero);
    for k in &atoms {
        let mut row = vec![Rational::zero(); ncols];
        for (i, p) in prem.iter().enumerate() {
            row[i] = term(&p.rhs, k);
        }
        for (j, g) in assume.iter().enumerate() {
            row[np + j] = term(&g.rhs, k);
        }
        a.push(row);
        b.push(term(&target.rhs, k));
    }
    let mut row = vec![Rational::zero(); ncols];
    for (i, p) in prem.iter().enumerate() {
        row[i] = p.rhs.constant.clone();
    }
    for (j, g) in assume.iter().enumerate() {
        row[np + j] = g.rhs.constant.clone();
    }
    row[ncols - 1] = Rational::one();
    a.push(row);
    b.push(target.rhs.constant.clone());

    let mut c = vec![Rational::zero(); ncols];
    if target.strict {
        for (i, p) in prem.iter().enumerate() {
            if p.strict {
                c[i] = -Rational::one();
            }
        }
        for (j, g) in assume.iter().enumerate() {
            if g.strict {
                c[np + j] = -Rational::one();
            }
        }
        c[ncols - 1] = -Rational::one();
    }
    let x = match minimize(&c, &a, &b) {
        LpOutcome::Infeasible => return None,
        LpOutcome::Optimal { x, value } => {
            if target.strict && !value.is_negative() {
                return None;
            }
            x
        }
        LpOutcome::Unbounded => {
            // The strict mass is unbounded above, so some feasible point has
            // strict mass at least one; find it with a zero objective.
            let mut a2 = a.clone();
            let mut b2 = b.clone();
            let mut floor: Vec<Rational> = c.iter().map(|v| -v.clone()).collect();
            floor.push(-Rational::one());
            for r in a2.iter_mut() {
                r.push(Rational::zero());
            }
            a2.push(floor);
            b2.push(Rational::one());
            let c2 = vec![Rational::zero(); ncols + 1];
            match minimize(&c2, &a2, &b2) {
                LpOutcome::Optimal { x, .. } => x,
                _ => return None,
            }
        }
    };
    let fmt_row = |r: &LinearInequality| r.display_with(&[]);
    Some(Certificate {
        rows: prem
            .iter()
            .zip(&x)
            .filter(|(_, v)| !v.is_zero())
            .map(|(r, v)| (fmt_row(r), format_rational(v)))
            .collect(),
        assumptions: assume
            .iter()
            .zip(&x[np..])
            .filter(|(_, v)| !v.is_zero())
            .map(|(r, v)| (fmt_row(r), format_rational(v)))
            .collect(),
        slack: format_rational(&x[ncols - 1]),
    })
}

/// Constants that are neither bound, nor information atoms, nor mentioned
/// by an assumption.
fn uncovered_constants(sys: &InequalitySystem, extra: &[LinearInequality]) -> Vec<String> {
    let covered: BTreeSet<&String> = sys
        .assumptions
        .iter()
        .chain(extra)
        .flat_map(|r| r.rhs.terms.keys())
        .chain(sys.bindings.keys())
        .collect();
    let mut out: Vec<String> = sys
        .rows
        .iter()
        .flat_map(|r| r.rhs.terms.keys())
        .filter(|n| !is_information_atom(n) && !covered.contains(n))
        .cloned()
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Drops every row implied by the remaining rows and the assumptions,
/// scanning from the last row to the first.
pub fn remove_redundant(sys: &InequalitySystem, extra: &[LinearInequality]) -> Result<InequalitySystem> {
    let missing = uncovered_constants(sys, extra);
    if !missing.is_empty() {
        return Err(Error::UnboundConstants(missing));
    }
    let assumptions: Vec<LinearInequality> = sys.assumptions.iter().chain(extra).cloned().collect();
    let rows = prune(&sys.rows, &assumptions, &sys.bindings);
    Ok(InequalitySystem { rows, ..sys.clone() })
}

/// Drops rows implied by the remaining ones, last to first.
pub(crate) fn prune(
    rows: &[LinearInequality],
    assumptions: &[LinearInequality],
    bindings: &BTreeMap<String, Rational>,
) -> Vec<LinearInequality> {
    let mut rows: Vec<LinearInequality> = rows
        .iter()
        .filter(|r| !r.bind(bindings).is_trivial())
        .cloned()
        .collect();
    let mut i = rows.len();
    while i > 0 {
        i -= 1;
        let target = rows.remove(i);
        if implies(&rows, assumptions, bindings, &target, ComparisonMode::Exact).is_none() {
            rows.insert(i, target);
        }
    }
    rows
}

/// Mutual implication of two systems over the same variables.
pub fn region_equal(
    a: &InequalitySystem,
    b: &InequalitySystem,
    assumptions: &[LinearInequality],
    mode: ComparisonMode,
) -> Result<RegionComparison> {
    let va: BTreeSet<&String> = a.variables.iter().collect();
    let vb: BTreeSet<&String> = b.variables.iter().collect();
    if va != vb {
        return Err(Error::VariableMismatch(format!(
            "{{{}}} vs {{{}}}",
            a.variables.join(", "),
            b.variables.join(", ")
        )));
    }
    let mut bindings = a.bindings.clone();
    bindings.extend(b.bindings.iter().map(|(k, v)| (k.clone(), v.clone())));
    let mut assume: Vec<LinearInequality> = a.assumptions.clone();
    for r in b.assumptions.iter().chain(assumptions) {
        if !assume.contains(r) {
            assume.push(r.clone());
        }
    }
    let check = |from: &InequalitySystem, to: &InequalitySystem| -> Vec<RowCheck> {
        to.rows
            .iter()
            .map(|r| RowCheck {
                row: r.display_with(&to.variables),
                certificate: implies(&from.rows, &assume, &bindings, r, mode),
            })
            .collect()
    };
    let forward = check(a, b);
    let backward = check(b, a);
    let equal = forward.iter().chain(&backward).all(|c| c.certificate.is_some());
    Ok(RegionComparison {
        equal,
        forward,
        backward,
    })
}
