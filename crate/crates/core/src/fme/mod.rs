//! Exact Fourier-Motzkin elimination over named rate variables.
//!
//! Right-hand sides are affine in opaque symbolic constants such as
//! `I(V0,V1;Y1|Q)`, so a derivation runs once for every distribution.
//! Rows without any variable are kept as conditions on the constants.

pub mod fixtures;
mod implication;
mod parse;

pub use implication::{
    implies, region_equal, remove_redundant, Certificate, ComparisonMode, RegionComparison, RowCheck,
};
pub use parse::{canonical_atom, parse_mapping, parse_system};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// `sum coeff * name + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn constant(c: Rational) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn term(name: &str, c: Rational) -> Self {
        let mut e = LinExpr::default();
        e.add_term(name, c);
        e
    }

    pub fn add_term(&mut self, name: &str, c: Rational) {
        let slot = self.terms.entry(name.to_string()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(name);
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, k: &Rational) {
        for (n, c) in &other.terms {
            self.add_term(n, c * k);
        }
        self.constant += &other.constant * k;
    }

    pub fn scaled(&self, k: &Rational) -> LinExpr {
        let mut e = LinExpr::default();
        e.add_scaled(self, k);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// Value with every name bound; `None` if a name is missing.
    pub fn eval(&self, values: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut v = self.constant.clone();
        for (n, c) in &self.terms {
            v += c * values.get(n)?;
        }
        Some(v)
    }

    /// Replaces bound names by their values.
    pub fn bind(&self, values: &BTreeMap<String, Rational>) -> LinExpr {
        let mut e = LinExpr::constant(self.constant.clone());
        for (n, c) in &self.terms {
            match values.get(n) {
                Some(v) => e.constant += c * v,
                None => e.add_term(n, c.clone()),
            }
        }
        e
    }
}

fn put_term(f: &mut fmt::Formatter<'_>, first: &mut bool, c: &Rational, name: Option<&str>) -> fmt::Result {
    let mag = c.abs();
    if *first {
        if c.is_negative() {
            write!(f, "-")?;
        }
    } else {
        write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
    }
    *first = false;
    match name {
        Some(n) if mag.is_one() => write!(f, "{n}"),
        Some(n) => write!(f, "{}*{n}", exact::format_rational(&mag)),
        None => write!(f, "{}", exact::format_rational(&mag)),
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[(&str, &Rational)], constant: &Rational) -> fmt::Result {
    let mut first = true;
    for (n, c) in terms {
        put_term(f, &mut first, c, Some(n))?;
    }
    if !constant.is_zero() || first {
        put_term(f, &mut first, constant, None)?;
    }
    Ok(())
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(&str, &Rational)> = self.terms.iter().map(|(n, c)| (n.as_str(), c)).collect();
        write_terms(f, &terms, &self.constant)
    }
}

/// `coeffs . vars (< or <=) rhs`. Rows with no coefficient are conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearInequality {
    pub coeffs: BTreeMap<String, Rational>,
    pub strict: bool,
    pub rhs: LinExpr,
}

impl LinearInequality {
    pub fn new(coeffs: BTreeMap<String, Rational>, strict: bool, rhs: LinExpr) -> Self {
        let mut r = LinearInequality {
            coeffs: coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
            strict,
            rhs,
        };
        r.normalize();
        r
    }

    pub fn is_condition(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// A condition that holds for every value of the constants.
    pub fn is_trivial(&self) -> bool {
        self.is_condition()
            && self.rhs.terms.is_empty()
            && (self.rhs.constant.is_positive() || (!self.strict && self.rhs.constant.is_zero()))
    }

    pub fn coeff(&self, var: &str) -> Rational {
        self.coeffs.get(var).cloned().unwrap_or_else(Rational::zero)
    }

    /// Scales by a positive factor so every coefficient, rhs term and offset
    /// is an integer with overall gcd one.
    fn normalize(&mut self) {
        let all: Vec<&Rational> = self
            .coeffs
            .values()
            .chain(self.rhs.terms.values())
            .chain(std::iter::once(&self.rhs.constant))
            .filter(|c| !c.is_zero())
            .collect();
        if all.is_empty() {
            return;
        }
        let lcm = all.iter().fold(num_bigint::BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let gcd = all.iter().fold(num_bigint::BigInt::zero(), |acc, c| {
            acc.gcd(&(c.numer() * &lcm / c.denom()))
        });
        let k = Rational::new(lcm, gcd);
        if !k.is_one() {
            for c in self.coeffs.values_mut() {
                *c *= &k;
            }
            self.rhs = self.rhs.scaled(&k);
        }
    }

    /// `a * self + b * other` with positive multipliers.
    fn combine(&self, a: &Rational, other: &LinearInequality, b: &Rational) -> LinearInequality {
        let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
        for (n, c) in &self.coeffs {
            *coeffs.entry(n.clone()).or_insert_with(Rational::zero) += c * a;
        }
        for (n, c) in &other.coeffs {
            *coeffs.entry(n.clone()).or_insert_with(Rational::zero) += c * b;
        }
        let mut rhs = self.rhs.scaled(a);
        rhs.add_scaled(&other.rhs, b);
        LinearInequality::new(coeffs, self.strict || other.strict, rhs)
    }

    /// Whether `point` (variables and constants) satisfies the row.
    pub fn holds_at(&self, point: &BTreeMap<String, Rational>) -> Option<bool> {
        let mut lhs = Rational::zero();
        for (n, c) in &self.coeffs {
            lhs += c * point.get(n)?;
        }
        let rhs = self.rhs.eval(point)?;
        Some(if self.strict { lhs < rhs } else { lhs <= rhs })
    }

    pub fn bind(&self, values: &BTreeMap<String, Rational>) -> LinearInequality {
        LinearInequality::new(self.coeffs.clone(), self.strict, self.rhs.bind(values))
    }

    pub fn display_with(&self, order: &[String]) -> String {
        struct Row<'a>(&'a LinearInequality, &'a [String]);
        impl fmt::Display for Row<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let r = self.0;
                let mut terms: Vec<(&str, &Rational)> = self
                    .1
                    .iter()
                    .filter_map(|n| r.coeffs.get(n).map(|c| (n.as_str(), c)))
                    .collect();
                for (n, c) in &r.coeffs {
                    if !self.1.contains(n) {
                        terms.push((n.as_str(), c));
                    }
                }
                write_terms(f, &terms, &Rational::zero())?;
                write!(f, " {} {}", if r.strict { "<" } else { "<=" }, r.rhs)
            }
        }
        Row(self, order).to_string()
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// A named-variable inequality system with symbolic constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InequalitySystem {
    pub variables: Vec<String>,
    pub constants: Vec<String>,
    pub bindings: BTreeMap<String, Rational>,
    /// Relations among constants (pmf constraints, information identities).
    pub assumptions: Vec<LinearInequality>,
    pub rows: Vec<LinearInequality>,
    /// Default elimination order.
    pub eliminate: Vec<String>,
}

impl InequalitySystem {
    pub fn new(variables: &[&str]) -> Self {
        InequalitySystem {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    /// Adds a row after checking its variables; unknown constants are declared.
    pub fn push(&mut self, row: LinearInequality) -> Result<()> {
        for v in row.coeffs.keys() {
            if !self.variables.contains(v) {
                return Err(Error::UnknownName(v.clone()));
            }
        }
        self.declare_constants(&row.rhs);
        if !self.rows.contains(&row) {
            self.rows.push(row);
        }
        Ok(())
    }

    pub fn assume(&mut self, row: LinearInequality) -> Result<()> {
        if !row.is_condition() {
            return Err(Error::InvalidParameter(format!(
                "assumption `{row}` mentions a variable"
            )));
        }
        self.declare_constants(&row.rhs);
        self.assumptions.push(row);
        Ok(())
    }

    fn declare_constants(&mut self, e: &LinExpr) {
        for n in e.terms.keys() {
            if !self.constants.contains(n) {
                self.constants.push(n.clone());
            }
        }
    }

    /// Rows that involve at least one variable.
    pub fn inequalities(&self) -> impl Iterator<Item = &LinearInequality> {
        self.rows.iter().filter(|r| !r.is_condition())
    }

    pub fn conditions(&self) -> impl Iterator<Item = &LinearInequality> {
        self.rows.iter().filter(|r| r.is_condition())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("vars: {}\n", self.variables.join(", ")));
        if !self.eliminate.is_empty() {
            s.push_str(&format!("eliminate: {}\n", self.eliminate.join(", ")));
        }
        for (n, v) in &self.bindings {
            s.push_str(&format!("bind {n} = {}\n", exact::format_rational(v)));
        }
        for a in &self.assumptions {
            s.push_str(&format!("assume {}\n", a.display_with(&self.variables)));
        }
        for r in self.inequalities().chain(self.conditions()) {
            s.push_str(&r.display_with(&self.variables));
            s.push('\n');
        }
        s
    }

    /// Values for every variable and constant: `point` extended by bindings.
    pub fn satisfied_by(&self, point: &BTreeMap<String, Rational>) -> Option<bool> {
        let mut p = self.bindings.clone();
        p.extend(point.iter().map(|(k, v)| (k.clone(), v.clone())));
        let mut ok = true;
        for r in &self.rows {
            ok &= r.holds_at(&p)?;
        }
        Some(ok)
    }
}

/// Projects out `var` by pairing every upper bound with every lower bound.
/// The result is strict whenever either parent is.
pub fn eliminate(sys: &InequalitySystem, var: &str) -> Result<InequalitySystem> {
    if !sys.variables.iter().any(|v| v == var) {
        return Err(Error::UnknownName(var.to_string()));
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut out = InequalitySystem {
        variables: sys.variables.iter().filter(|v| *v != var).cloned().collect(),
        eliminate: sys.eliminate.iter().filter(|v| *v != var).cloned().collect(),
        rows: Vec::new(),
        ..sys.clone()
    };
    for r in &sys.rows {
        let c = r.coeff(var);
        if c.is_positive() {
            upper.push((r, c));
        } else if c.is_negative() {
            lower.push((r, -c));
        } else if !out.rows.contains(r) {
            out.rows.push(r.clone());
        }
    }
    for (u, cu) in &upper {
        for (l, cl) in &lower {
            let row = u.combine(cl, l, cu);
            if !row.is_trivial() && !out.rows.contains(&row) {
                out.rows.push(row);
            }
        }
    }
    dedupe_strictness(&mut out.rows);
    Ok(out)
}

/// Keeps only the strict copy when a row appears in both flavours.
fn dedupe_strictness(rows: &mut Vec<LinearInequality>) {
    let strict: BTreeSet<String> = rows.iter().filter(|r| r.strict).map(|r| format!("{r}")).collect();
    rows.retain(|r| {
        r.strict
            || !strict.contains(&format!(
                "{}",
                LinearInequality {
                    strict: true,
                    ..r.clone()
                }
            ))
    });
}

/// Eliminates `order`, or the system's declared order when `None`, by plain
/// pairing of bounds.
pub fn eliminate_all(sys: &InequalitySystem, order: Option<&[String]>) -> Result<InequalitySystem> {
    let order: Vec<String> = order.map(<[String]>::to_vec).unwrap_or_else(|| sys.eliminate.clone());
    let mut cur = sys.clone();
    for v in &order {
        cur = eliminate(&cur, v)?;
    }
    Ok(cur)
}

/// Like [`eliminate_all`], but a variable fixed by an equality is substituted
/// away, and rows implied by the others and the assumptions are dropped after
/// every step. The projected region is the same.
pub fn project(sys: &InequalitySystem, order: Option<&[String]>) -> Result<InequalitySystem> {
    let order: Vec<String> = order.map(<[String]>::to_vec).unwrap_or_else(|| sys.eliminate.clone());
    let mut cur = sys.clone();
    for v in &order {
        cur = match substitute_equality(&cur, v)? {
            Some(next) => next,
            None => eliminate(&cur, v)?,
        };
        cur.rows = implication::prune(&cur.rows, &cur.assumptions, &cur.bindings);
    }
    Ok(cur)
}

/// Index of a non-strict row whose exact negation is also present and which
/// mentions `var`.
fn equality_pair(rows: &[LinearInequality], var: &str) -> Option<(usize, usize)> {
    let neg_one = -Rational::one();
    rows.iter().enumerate().find_map(|(i, r)| {
        if r.strict || r.coeff(var).is_zero() {
            return None;
        }
        let negated = LinearInequality {
            coeffs: r.coeffs.iter().map(|(k, c)| (k.clone(), -c)).collect(),
            strict: false,
            rhs: r.rhs.scaled(&neg_one),
        };
        rows.iter().position(|o| *o == negated).map(|j| (i, j))
    })
}

fn substitute_equality(sys: &InequalitySystem, var: &str) -> Result<Option<InequalitySystem>> {
    if !sys.variables.iter().any(|v| v == var) {
        return Err(Error::UnknownName(var.to_string()));
    }
    let Some((i, j)) = equality_pair(&sys.rows, var) else {
        return Ok(None);
    };
    let eq = &sys.rows[i];
    let a = eq.coeff(var);
    let mut out = InequalitySystem {
        variables: sys.variables.iter().filter(|v| *v != var).cloned().collect(),
        eliminate: sys.eliminate.iter().filter(|v| *v != var).cloned().collect(),
        rows: Vec::new(),
        ..sys.clone()
    };
    for (k, r) in sys.rows.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        let c = r.coeff(var);
        let row = if c.is_zero() {
            r.clone()
        } else {
            let k = -(c / &a);
            let mut coeffs = r.coeffs.clone();
            for (n, v) in &eq.coeffs {
                *coeffs.entry(n.clone()).or_insert_with(Rational::zero) += v * &k;
            }
            coeffs.remove(var);
            let mut rhs = r.rhs.clone();
            rhs.add_scaled(&eq.rhs, &k);
            LinearInequality::new(coeffs, r.strict, rhs)
        };
        if !row.is_trivial() && !out.rows.contains(&row) {
            out.rows.push(row);
        }
    }
    dedupe_strictness(&mut out.rows);
    Ok(Some(out))
}

/// Rewrites each mapped variable as an affine expression in (possibly new)
/// variables, e.g. `R0 -> R0n + R1p`. New variables are appended in order of
/// appearance; `nonneg` lists variables that receive a `>= 0` row.
pub fn substitute_rate_split(
    sys: &InequalitySystem,
    mapping: &[(String, LinExpr)],
    nonneg: &[&str],
) -> Result<InequalitySystem> {
    for (v, _) in mapping {
        if !sys.variables.contains(v) {
            return Err(Error::UnknownName(v.clone()));
        }
    }
    let mut variables: Vec<String> = sys
        .variables
        .iter()
        .filter(|v| !mapping.iter().any(|(m, _)| m == *v))
        .cloned()
        .collect();
    for (_, e) in mapping {
        if !e.constant.is_zero() {
            return Err(Error::InvalidParameter("rate mappings must be linear".into()));
        }
        for n in e.terms.keys() {
            if !variables.contains(n) {
                variables.push(n.clone());
            }
        }
    }
    let mut out = InequalitySystem {
        variables,
        rows: Vec::new(),
        ..sys.clone()
    };
    for r in &sys.rows {
        let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
        for (n, c) in &r.coeffs {
            match mapping.iter().find(|(m, _)| m == n) {
                Some((_, e)) => {
                    for (t, k) in &e.terms {
                        *coeffs.entry(t.clone()).or_insert_with(Rational::zero) += c * k;
                    }
                }
                None => *coeffs.entry(n.clone()).or_insert_with(Rational::zero) += c,
            }
        }
        out.push(LinearInequality::new(coeffs, r.strict, r.rhs.clone()))?;
    }
    for v in nonneg {
        out.push(nonneg_row(v))?;
    }
    Ok(out)
}

/// `-var <= 0`.
pub fn nonneg_row(var: &str) -> LinearInequality {
    LinearInequality::new(
        [(var.to_string(), -Rational::one())].into_iter().collect(),
        false,
        LinExpr::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn sys(text: &str) -> InequalitySystem {
        parse_system(text).unwrap()
    }

    #[test]
    fn normalizes_to_primitive_integers() {
        let r = LinearInequality::new(
            [("x".to_string(), ratio(1, 2))].into_iter().collect(),
            false,
            LinExpr::term("a", ratio(3, 4)),
        );
        assert_eq!(r.coeff("x"), int(2));
        assert_eq!(r.rhs.terms["a"], int(3));
    }

    #[test]
    fn eliminates_between_bounds() {
        let s = sys("vars: x\nx <= a\nb <= x\n");
        let e = eliminate(&s, "x").unwrap();
        assert_eq!(e.rows.len(), 1);
        assert!(e.rows[0].is_condition());
        assert_eq!(e.rows[0].to_string(), "0 <= a - b");
    }

    #[test]
    fn strictness_propagates() {
        let s = sys("vars: x, y\nx + y < c\n-x <= 0\n");
        let e = eliminate(&s, "x").unwrap();
        assert_eq!(e.to_text(), "vars: y\ny < c\n");
        let s = sys("vars: x, y\nx + y <= c\n-x <= 0\n");
        assert_eq!(eliminate(&s, "x").unwrap().to_text(), "vars: y\ny <= c\n");
    }

    #[test]
    fn unbounded_direction_drops_rows() {
        let s = sys("vars: x, y\nx + y <= 1\ny <= 2\n");
        let e = eliminate(&s, "x").unwrap();
        assert_eq!(e.to_text(), "vars: y\ny <= 2\n");
    }

    #[test]
    fn identity_and_rename_mappings() {
        let s = sys("vars: x, y\nx + 2*y <= a\n");
        let id = substitute_rate_split(&s, &[], &[]).unwrap();
        assert_eq!(id, s);
        let m = parse_mapping("y -> z", &["x", "y"]).unwrap();
        let r = substitute_rate_split(&s, &m, &[]).unwrap();
        assert_eq!(r.to_text(), "vars: x, z\nx + 2*z <= a\n");
    }
}
