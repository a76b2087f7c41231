//! Degraded, less-noisy and more-capable orderings between two receivers.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::lp::{self, LpOutcome};
use crate::prob::{cascade, ConditionalPmf, FactoredDistribution};
use crate::search::{maximize_objective, SearchBudget, SearchSpace};

/// Feasibility slack for float inputs and the re-composition check.
pub const DEGRADED_TOL: f64 = 1e-9;
/// A counterexample must violate the defining inequality by more than this.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Degraded,
    LessNoisy,
    MoreCapable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Holds {
    True,
    False,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// `W` with `pZX = pYX * W`.
    Channel(ConditionalPmf),
    /// A distribution under which the defining inequality fails.
    Distribution(FactoredDistribution),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingVerdict {
    pub relation: Relation,
    pub holds: Holds,
    pub witness: Option<Witness>,
    /// For counterexamples, `I(.;Y) - I(.;Z)` at the witness (negative).
    pub margin: Option<f64>,
    /// Search budget used, if any search ran.
    pub resolution: Option<SearchBudget>,
    /// True when degradedness was decided in exact rational arithmetic.
    pub exact: bool,
}

fn same_inputs(p_yx: &ConditionalPmf, p_zx: &ConditionalPmf) -> Result<()> {
    if p_yx.rows() != p_zx.rows() {
        return Err(Error::DimensionMismatch(format!(
            "channels have {} and {} inputs",
            p_yx.rows(),
            p_zx.rows()
        )));
    }
    Ok(())
}

fn exact_entries(c: &ConditionalPmf) -> Vec<Rational> {
    match c.exact() {
        Some(e) => e.to_vec(),
        None => c.data().iter().map(|&v| exact::from_f64(v)).collect(),
    }
}

/// Decides whether `Z` is a degraded version of `Y`, i.e. whether some
/// row-stochastic `W` satisfies `pYX * W = pZX`.
pub fn check_degraded(p_yx: &ConditionalPmf, p_zx: &ConditionalPmf) -> Result<OrderingVerdict> {
    same_inputs(p_yx, p_zx)?;
    let (nx, ny, nz) = (p_yx.rows(), p_yx.cols(), p_zx.cols());
    let is_exact = p_yx.exact().is_some() && p_zx.exact().is_some();
    let a_y = exact_entries(p_yx);
    let a_z = exact_entries(p_zx);

    // Columns: W (ny*nz), then positive and negative residual slacks (nx*nz each).
    let nw = ny * nz;
    let ns = nx * nz;
    let ncols = nw + 2 * ns;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for x in 0..nx {
        for z in 0..nz {
            let mut row = vec![Rational::zero(); ncols];
            for y in 0..ny {
                row[y * nz + z] = a_y[x * ny + y].clone();
            }
            row[nw + x * nz + z] = Rational::one();
            row[nw + ns + x * nz + z] = -Rational::one();
            a.push(row);
            b.push(a_z[x * nz + z].clone());
        }
    }
    for y in 0..ny {
        let mut row = vec![Rational::zero(); ncols];
        for z in 0..nz {
            row[y * nz + z] = Rational::one();
        }
        a.push(row);
        b.push(Rational::one());
    }
    let mut c = vec![Rational::zero(); ncols];
    for v in &mut c[nw..] {
        *v = Rational::one();
    }

    let verdict = |holds, witness| OrderingVerdict {
        relation: Relation::Degraded,
        holds,
        witness,
        margin: None,
        resolution: None,
        exact: is_exact,
    };
    let LpOutcome::Optimal { x, value } = lp::minimize(&c, &a, &b) else {
        return Ok(verdict(Holds::False, None));
    };
    let feasible = if is_exact {
        value.is_zero()
    } else {
        exact::to_f64(&value) <= DEGRADED_TOL
    };
    if !feasible {
        return Ok(verdict(Holds::False, None));
    }
    let w_exact: Vec<Vec<Rational>> = (0..ny).map(|y| x[y * nz..(y + 1) * nz].to_vec()).collect();
    let w = if is_exact {
        ConditionalPmf::from_exact_rows(w_exact)?
    } else {
        let rows = w_exact
            .iter()
            .map(|r| r.iter().map(exact::to_f64).collect::<Vec<_>>())
            .collect::<Vec<_>>();
        ConditionalPmf::from_rows(rows)?
    };
    let recomposed = cascade(p_yx, &w)?;
    if recomposed.max_abs_diff(p_zx) > DEGRADED_TOL {
        return Ok(verdict(Holds::False, None));
    }
    Ok(verdict(Holds::True, Some(Witness::Channel(w))))
}

fn counterexample_search(
    relation: Relation,
    p_yx: &ConditionalPmf,
    p_zx: &ConditionalPmf,
    space: SearchSpace,
    aux: &'static str,
    budget: &SearchBudget,
) -> Result<OrderingVerdict> {
    let degraded = check_degraded(p_yx, p_zx)?;
    if degraded.holds == Holds::True {
        return Ok(OrderingVerdict { relation, ..degraded });
    }
    let gap = |d: &FactoredDistribution| -> Option<f64> {
        let j = d.joint().attach_channel("X", "Y", p_yx).ok()?;
        let j = j.attach_channel("X", "Z", p_zx).ok()?;
        let iy = j.mutual_information(&[aux], &["Y"]).ok()?;
        let iz = j.mutual_information(&[aux], &["Z"]).ok()?;
        Some(iy - iz)
    };
    let out = maximize_objective(&space, budget, |d| gap(d).map(|g| -g))?;
    let margin = -out.value;
    let (holds, witness, margin) = if margin < -VIOLATION_TOL {
        (Holds::False, Some(Witness::Distribution(out.argmax)), Some(margin))
    } else {
        (Holds::Undetermined, None, None)
    };
    Ok(OrderingVerdict {
        relation,
        holds,
        witness,
        margin,
        resolution: Some(*budget),
        exact: false,
    })
}

/// Searches `p(u)p(x|u)` with `|U| = aux_card` for a violation of
/// `I(U;Y) >= I(U;Z)`. Only degradedness can establish `holds = true`.
pub fn check_less_noisy(
    p_yx: &ConditionalPmf,
    p_zx: &ConditionalPmf,
    aux_card: usize,
    budget: &SearchBudget,
) -> Result<OrderingVerdict> {
    same_inputs(p_yx, p_zx)?;
    if aux_card == 0 {
        return Err(Error::InvalidParameter("auxiliary cardinality must be >= 1".into()));
    }
    let space = SearchSpace::new("U; X|U", &[("U", aux_card), ("X", p_yx.rows())])?;
    counterexample_search(Relation::LessNoisy, p_yx, p_zx, space, "U", budget)
}

/// Searches `p(x)` for a violation of `I(X;Y) >= I(X;Z)`.
pub fn check_more_capable(
    p_yx: &ConditionalPmf,
    p_zx: &ConditionalPmf,
    budget: &SearchBudget,
) -> Result<OrderingVerdict> {
    same_inputs(p_yx, p_zx)?;
    let space = SearchSpace::new("X", &[("X", p_yx.rows())])?;
    counterexample_search(Relation::MoreCapable, p_yx, p_zx, space, "X", budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::prob::JointPmf;

    fn small() -> SearchBudget {
        SearchBudget::new(20, 8, 11)
    }

    fn witness_channel(v: &OrderingVerdict) -> &ConditionalPmf {
        match &v.witness {
            Some(Witness::Channel(w)) => w,
            other => panic!("expected channel witness, got {other:?}"),
        }
    }

    #[test]
    fn degraded_examples() {
        let c = ConditionalPmf::bsc(0.3).unwrap();
        let v = check_degraded(&c, &c).unwrap();
        assert_eq!(v.holds, Holds::True);

        let exact = check_degraded(
            &ConditionalPmf::bsc_exact(ratio(1, 10)).unwrap(),
            &ConditionalPmf::bsc_exact(ratio(1, 5)).unwrap(),
        )
        .unwrap();
        assert!(exact.exact);
        assert_eq!(exact.holds, Holds::True);
        assert_eq!(
            witness_channel(&exact),
            &ConditionalPmf::bsc_exact(ratio(1, 8)).unwrap()
        );

        let float = check_degraded(&ConditionalPmf::bsc(0.1).unwrap(), &ConditionalPmf::bsc(0.2).unwrap()).unwrap();
        assert_eq!(float.holds, Holds::True);
        assert!(witness_channel(&float).max_abs_diff(&ConditionalPmf::bsc(0.125).unwrap()) < 1e-9);

        let rev = check_degraded(&ConditionalPmf::bsc(0.2).unwrap(), &ConditionalPmf::bsc(0.1).unwrap()).unwrap();
        assert_eq!(rev.holds, Holds::False);

        assert!(check_degraded(&ConditionalPmf::identity(2), &ConditionalPmf::identity(3)).is_err());
    }

    #[test]
    fn less_noisy_examples() {
        let v = check_less_noisy(
            &ConditionalPmf::bsc(0.1).unwrap(),
            &ConditionalPmf::bsc(0.2).unwrap(),
            2,
            &small(),
        )
        .unwrap();
        assert_eq!(v.holds, Holds::True);

        let y = ConditionalPmf::erasure(ratio(9, 10)).unwrap();
        let z = ConditionalPmf::identity(2);
        let v = check_less_noisy(&y, &z, 2, &small()).unwrap();
        assert_eq!(v.holds, Holds::False);
        let margin = v.margin.unwrap();
        let Some(Witness::Distribution(d)) = &v.witness else {
            panic!()
        };
        let j = d
            .joint()
            .attach_channel("X", "Y", &y)
            .unwrap()
            .attach_channel("X", "Z", &z)
            .unwrap();
        let recomputed = j.mutual_information(&["U"], &["Y"]).unwrap() - j.mutual_information(&["U"], &["Z"]).unwrap();
        assert!((recomputed - margin).abs() < 1e-12);
        assert!(recomputed < -1e-9);
    }

    #[test]
    fn more_capable_examples() {
        let id = ConditionalPmf::identity(2);
        let er = ConditionalPmf::erasure(ratio(3, 10)).unwrap();
        assert_eq!(check_more_capable(&id, &id, &small()).unwrap().holds, Holds::True);
        assert_eq!(check_more_capable(&id, &er, &small()).unwrap().holds, Holds::True);
        let v = check_more_capable(&er, &id, &small()).unwrap();
        assert_eq!(v.holds, Holds::False);
        let Some(Witness::Distribution(d)) = &v.witness else {
            panic!()
        };
        let px = d.joint().marginal_pmf("X").unwrap();
        assert!((px.probs()[0] - 0.5).abs() < 1e-3);
        // At uniform input the gap is 0.7 - 1 = -0.3 bits.
        assert!((v.margin.unwrap() + 0.3).abs() < 1e-6);
        let j = JointPmf::from_pmf("X", &px).attach_channel("X", "Y", &er).unwrap();
        assert!(j.mutual_information(&["X"], &["Y"]).unwrap() < 0.71);
    }
}
