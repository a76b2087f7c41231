//! Exact rational linear programming: a dense two-phase tableau simplex with
//! Bland's anti-cycling rule. Problem sizes here are tens of rows and columns.

use num_traits::{Signed, Zero};

use crate::exact::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

struct Tableau {
    /// `m` constraint rows of `ncols + 1` entries (last is the rhs).
    rows: Vec<Vec<Rational>>,
    /// Reduced-cost row; last entry is minus the objective value.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &piv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `< allowed`. Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| self.obj[j].is_negative());
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.ncols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Minimizes `c·x` subject to `A x = b`, `x >= 0`.
pub fn minimize(c: &[Rational], a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    assert_eq!(b.len(), m, "rhs length");
    assert!(a.iter().all(|r| r.len() == n), "ragged constraint matrix");

    // Phase 1: one artificial per row, rhs made non-negative.
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let neg = bi.is_negative();
        let mut r: Vec<Rational> = row.iter().map(|v| if neg { -v.clone() } else { v.clone() }).collect();
        r.extend((0..m).map(|k| {
            if k == i {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        }));
        r.push(if neg { -bi.clone() } else { bi.clone() });
        rows.push(r);
    }
    let mut obj = vec![Rational::zero(); ncols + 1];
    for r in &rows {
        for j in 0..n {
            obj[j] -= &r[j];
        }
        obj[ncols] -= &r[ncols];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n..n + m).collect(),
        ncols,
    };
    t.optimize(n);
    if !t.obj[ncols].is_zero() {
        return LpOutcome::Infeasible;
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // Phase 2 over the original columns.
    let mut obj = vec![Rational::zero(); ncols + 1];
    obj[..n].clone_from_slice(c);
    for (row, &bcol) in t.rows.iter().zip(&t.basis) {
        let cb = &c[bcol];
        if cb.is_zero() {
            continue;
        }
        for j in 0..n {
            obj[j] -= cb * &row[j];
        }
        obj[ncols] -= cb * &row[ncols];
    }
    for v in obj[n..ncols].iter_mut() {
        *v = Rational::zero();
    }
    t.obj = obj;
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (row, &bcol) in t.rows.iter().zip(&t.basis) {
        x[bcol] = row[ncols].clone();
    }
    let value = -t.obj[ncols].clone();
    LpOutcome::Optimal { x, value }
}

/// Finds any `x >= 0` with `A x = b`.
pub fn feasible_point(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.first().map_or(0, Vec::len);
    match minimize(&vec![Rational::zero(); n], a, b) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_lp() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
        let c = v(&[-1, -1, 0, 0]);
        let a = vec![v(&[1, 2, 1, 0]), v(&[3, 1, 0, 1])];
        let out = minimize(&c, &a, &v(&[4, 6]));
        match out {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, ratio(-14, 5));
                assert_eq!(x[0], ratio(8, 5));
                assert_eq!(x[1], ratio(6, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![v(&[1, 1])];
        assert_eq!(minimize(&v(&[0, 0]), &a, &v(&[-1])), LpOutcome::Infeasible);
        let a = vec![v(&[1, -1])];
        assert_eq!(minimize(&v(&[-1, 0]), &a, &v(&[0])), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let a = vec![v(&[1, 1]), v(&[2, 2])];
        let x = feasible_point(&a, &v(&[1, 2])).unwrap();
        assert_eq!(&x[0] + &x[1], int(1));
    }
}
