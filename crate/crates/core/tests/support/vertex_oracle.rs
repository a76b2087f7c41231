//! Vertex enumeration of small bounded polyhedra `A x <= b` over the
//! rationals. Every n-subset of rows is solved as an equality system; the
//! feasible unique solutions are the vertices.

#![allow(dead_code)]

use std::collections::BTreeMap;

use bcsec_core::exact::Rational;
use bcsec_core::fme::{InequalitySystem, LinearInequality};
use num_traits::{One, Signed, Zero};

pub type Row = (Vec<Rational>, Rational);

/// Numeric rows of `rows` over `vars`, with every constant bound. Strict
/// rows are read as their closure. Constant-only rows are returned apart.
pub fn numeric_rows(
    rows: &[LinearInequality],
    vars: &[String],
    bindings: &BTreeMap<String, Rational>,
) -> (Vec<Row>, Vec<Rational>) {
    let mut out = Vec::new();
    let mut conditions = Vec::new();
    for r in rows {
        let b = r.rhs.eval(bindings).expect("every constant bound");
        if r.is_condition() {
            conditions.push(b);
        } else {
            out.push((vars.iter().map(|v| r.coeff(v)).collect(), b));
        }
    }
    (out, conditions)
}

pub fn system_rows(sys: &InequalitySystem) -> (Vec<Row>, Vec<Rational>) {
    numeric_rows(&sys.rows, &sys.variables, &sys.bindings)
}

fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for j in col..n {
            a[col][j] = &a[col][j] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let v = &f * &a[col][j];
                    a[r][j] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    Some(b)
}

fn satisfies(rows: &[Row], x: &[Rational]) -> bool {
    rows.iter().all(|(a, b)| {
        let lhs: Rational = a.iter().zip(x).map(|(c, v)| c * v).sum();
        lhs <= *b
    })
}

fn combinations(m: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::new(), f);
}

pub fn vertices(rows: &[Row], n: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    combinations(rows.len(), n, &mut |idx| {
        let a = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b = idx.iter().map(|&i| rows[i].1.clone()).collect();
        if let Some(x) = solve(a, b) {
            if satisfies(rows, &x) && !out.contains(&x) {
                out.push(x);
            }
        }
    });
    out
}

pub fn contains(rows: &[Row], x: &[Rational]) -> bool {
    satisfies(rows, x)
}

/// Projection onto the first `keep` coordinates.
pub fn project(points: &[Vec<Rational>], keep: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for p in points {
        let q = p[..keep].to_vec();
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

/// Centroid of a non-empty point set.
pub fn centroid(points: &[Vec<Rational>]) -> Vec<Rational> {
    let n = Rational::from_integer(points.len().into());
    let mut c = vec![Rational::zero(); points[0].len()];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    c.into_iter().map(|v| v / &n).collect()
}

/// Outcome of comparing an eliminated system against the projected vertices.
#[derive(Debug, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    /// A projected vertex violates the eliminated system.
    Unsound(Vec<Rational>),
    /// A vertex of the eliminated system is not a projected vertex.
    Incomplete(Vec<Rational>),
}

/// Compares `eliminated` (over the first `keep` variables of `original`)
/// with the projection of the vertices of `original`.
pub fn check_projection(original: &InequalitySystem, eliminated: &InequalitySystem) -> Agreement {
    let keep = eliminated.variables.len();
    assert_eq!(&original.variables[..keep], &eliminated.variables[..]);
    let (rows, _) = system_rows(original);
    let verts = vertices(&rows, original.variables.len());
    let projected = project(&verts, keep);
    let (erows, conds) = system_rows(eliminated);
    let conds_hold = conds.iter().all(|c| !c.is_negative());
    for p in &projected {
        if !conds_hold || !contains(&erows, p) {
            return Agreement::Unsound(p.clone());
        }
    }
    if conds_hold {
        for v in vertices(&erows, keep) {
            if !projected.contains(&v) {
                return Agreement::Incomplete(v);
            }
        }
    }
    Agreement::Agree
}

/// `-B <= x_i <= B` for every variable.
pub fn box_rows(vars: &[String], bound: i64) -> Vec<LinearInequality> {
    use bcsec_core::fme::LinExpr;
    let mut out = Vec::new();
    for v in vars {
        for sign in [1i64, -1] {
            out.push(LinearInequality::new(
                [(v.clone(), Rational::from_integer(sign.into()))].into_iter().collect(),
                false,
                LinExpr::constant(Rational::from_integer(bound.into()) * Rational::one()),
            ));
        }
    }
    out
}

/// A random bounded system over `nv` variables with symbolic right-hand
/// sides: coefficients in [-3, 3], offsets in [-4, 4], and two atoms `a`,
/// `b` bound to random rationals. The last `nv - keep` variables are listed
/// for elimination.
pub fn random_system(rng: &mut impl rand::Rng, nv: usize, nrows: usize, keep: usize, bound: i64) -> InequalitySystem {
    use bcsec_core::fme::LinExpr;
    let vars: Vec<String> = (0..nv).map(|i| format!("x{i}")).collect();
    let mut sys = InequalitySystem {
        variables: vars.clone(),
        eliminate: vars[keep..].to_vec(),
        ..Default::default()
    };
    let int = |v: i64| Rational::from_integer(v.into());
    for atom in ["a", "b"] {
        let num = rng.random_range(-6..=6);
        let den = rng.random_range(1..=4);
        sys.bindings
            .insert(atom.to_string(), Rational::new(num.into(), den.into()));
        sys.constants.push(atom.to_string());
    }
    for _ in 0..nrows {
        let mut coeffs = BTreeMap::new();
        for v in &vars {
            let c = rng.random_range(-3..=3);
            if c != 0 {
                coeffs.insert(v.clone(), int(c));
            }
        }
        if coeffs.is_empty() {
            coeffs.insert(vars[rng.random_range(0..nv)].clone(), int(1));
        }
        let mut rhs = LinExpr::constant(int(rng.random_range(-4..=4)));
        for atom in ["a", "b"] {
            let k = rng.random_range(-1..=1);
            if k != 0 {
                rhs.add_term(atom, int(k));
            }
        }
        let strict = rng.random_bool(0.3);
        sys.push(LinearInequality::new(coeffs, strict, rhs)).unwrap();
    }
    for r in box_rows(&vars, bound) {
        sys.push(r).unwrap();
    }
    sys
}
