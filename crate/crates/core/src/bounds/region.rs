use std::collections::BTreeMap;

use serde::Serialize;

use super::{check, marton_admissibility, mi_rx, MultilevelChannel, ThreeReceiverChannel, ADMISSIBILITY_TOL};
use super::{PATTERN_MULTILEVEL, PATTERN_PROP1, PATTERN_THEOREM2};
use crate::error::{Error, Result};
use crate::prob::FactoredDistribution;

/// `constant + sum coeff * var`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(String, f64)>,
}

impl Affine {
    pub fn constant(c: f64) -> Self {
        Affine {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, point: &BTreeMap<String, f64>) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(v, c)| c * point.get(v).copied().unwrap_or(0.0))
                .sum::<f64>()
    }
}

/// `sum lhs <= max_k rhs_k` (or `<` when strict). The max form carries
/// positive parts such as `[c - R0]^+ + d = max(c + d - R0, d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionRow {
    pub label: String,
    pub lhs: Vec<(String, f64)>,
    pub strict: bool,
    pub rhs: Vec<Affine>,
}

impl RegionRow {
    fn new(label: &str, lhs: &[(&str, f64)], strict: bool, rhs: Vec<Affine>) -> Self {
        RegionRow {
            label: label.to_string(),
            lhs: lhs.iter().map(|(v, c)| (v.to_string(), *c)).collect(),
            strict,
            rhs,
        }
    }

    fn constant(label: &str, lhs: &[(&str, f64)], strict: bool, value: f64) -> Self {
        Self::new(label, lhs, strict, vec![Affine::constant(value)])
    }

    pub fn lhs_at(&self, point: &BTreeMap<String, f64>) -> f64 {
        self.lhs
            .iter()
            .map(|(v, c)| c * point.get(v).copied().unwrap_or(0.0))
            .sum()
    }

    pub fn rhs_at(&self, point: &BTreeMap<String, f64>) -> f64 {
        self.rhs.iter().map(|a| a.eval(point)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The right-hand side when it does not depend on any rate.
    pub fn constant_rhs(&self) -> Option<f64> {
        match self.rhs.as_slice() {
            [a] if a.terms.is_empty() => Some(a.constant),
            _ => None,
        }
    }
}

/// A rate region evaluated at one distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRegionSample {
    pub variables: Vec<String>,
    pub rows: Vec<RegionRow>,
}

/// Slack used by [`RateRegionSample::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

impl RateRegionSample {
    fn new(variables: &[&str], rows: Vec<RegionRow>) -> Result<Self> {
        for r in &rows {
            if r.rhs.iter().any(|a| !a.constant.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "row `{}` has a non-finite bound",
                    r.label
                )));
            }
        }
        Ok(RateRegionSample {
            variables: variables.iter().map(|s| s.to_string()).collect(),
            rows,
        })
    }

    pub fn row(&self, label: &str) -> Option<&RegionRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    fn point(&self, rates: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
        let mut p: BTreeMap<String, f64> = self.variables.iter().map(|v| (v.clone(), 0.0)).collect();
        for (n, v) in rates {
            match p.get_mut(*n) {
                Some(slot) => *slot = *v,
                None => return Err(Error::UnknownName(n.to_string())),
            }
        }
        Ok(p)
    }

    /// Membership in the closure of the region (all rows read as `<=`).
    /// Unlisted rates are zero; every rate must be non-negative.
    pub fn contains(&self, rates: &[(&str, f64)]) -> Result<bool> {
        let p = self.point(rates)?;
        Ok(p.values().all(|&v| v >= -MEMBERSHIP_TOL)
            && self.rows.iter().all(|r| r.lhs_at(&p) <= r.rhs_at(&p) + MEMBERSHIP_TOL))
    }

    /// Membership honoring strict rows exactly.
    pub fn contains_strict(&self, rates: &[(&str, f64)]) -> Result<bool> {
        let p = self.point(rates)?;
        Ok(p.values().all(|&v| v >= 0.0)
            && self.rows.iter().all(|r| {
                let (l, h) = (r.lhs_at(&p), r.rhs_at(&p));
                if r.strict {
                    l < h
                } else {
                    l <= h
                }
            }))
    }
}

/// The ten-row inner bound with common message `R0`, confidential rate `R1`
/// and equivocation `Re`. `None` if the pmf is inadmissible.
pub fn theorem2_region(dist: &FactoredDistribution, ch: &ThreeReceiverChannel) -> Result<Option<RateRegionSample>> {
    check(dist, PATTERN_THEOREM2)?;
    let j = dist.joint();
    let (lhs, rhs) = marton_admissibility(j, &ch.z)?;
    if lhs > rhs + ADMISSIBILITY_TOL {
        return Ok(None);
    }
    let iuz = mi_rx(j, &["U"], &ch.z, &[])?;
    let a1u = mi_rx(j, &["V0", "V1"], &ch.y1, &["U"])?;
    let a2u = mi_rx(j, &["V0", "V2"], &ch.y2, &["U"])?;
    let a1 = mi_rx(j, &["V0", "V1"], &ch.y1, &[])?;
    let a2 = mi_rx(j, &["V0", "V2"], &ch.y2, &[])?;
    let z1 = mi_rx(j, &["V1"], &ch.z, &["V0"])?;
    let z2 = mi_rx(j, &["V2"], &ch.z, &["V0"])?;
    let z01u = mi_rx(j, &["V0", "V1"], &ch.z, &["U"])?;
    let z02u = mi_rx(j, &["V0", "V2"], &ch.z, &["U"])?;
    let z0u = mi_rx(j, &["V0"], &ch.z, &["U"])?;
    let m = j.conditional_mutual_information(&["V1"], &["V2"], &["V0"])?;

    let rows = vec![
        RegionRow::constant("R0", &[("R0", 1.0)], true, iuz),
        RegionRow::constant(
            "R0+R1",
            &[("R0", 1.0), ("R1", 1.0)],
            true,
            iuz + (a1u - z1).min(a2u - z2),
        ),
        RegionRow::constant("R0+R1 total", &[("R0", 1.0), ("R1", 1.0)], true, (a1 - z1).min(a2 - z2)),
        RegionRow::constant("Re<=R1", &[("Re", 1.0), ("R1", -1.0)], false, 0.0),
        RegionRow::constant("Re", &[("Re", 1.0)], true, (a1u - z01u).min(a2u - z02u)),
        RegionRow::constant("R0+Re", &[("R0", 1.0), ("Re", 1.0)], true, (a1 - z01u).min(a2 - z02u)),
        RegionRow::constant("R0+2Re a", &[("R0", 1.0), ("Re", 2.0)], true, a1 + a2u - m - 2.0 * z0u),
        RegionRow::constant("R0+2Re b", &[("R0", 1.0), ("Re", 2.0)], true, a2 + a1u - m - 2.0 * z0u),
        RegionRow::constant(
            "R0+R1+2Re a",
            &[("R0", 1.0), ("R1", 1.0), ("Re", 2.0)],
            true,
            a2u - z2 + a1 + a2u - m - 2.0 * z0u,
        ),
        RegionRow::constant(
            "R0+R1+2Re b",
            &[("R0", 1.0), ("R1", 1.0), ("Re", 2.0)],
            true,
            a1u - z1 + a2 + a1u - m - 2.0 * z0u,
        ),
    ];
    RateRegionSample::new(&["R0", "R1", "Re"], rows).map(Some)
}

/// The region for receivers that are both less noisy than the eavesdropper,
/// over `p(u)p(x|u)`.
pub fn prop1_region(dist: &FactoredDistribution, ch: &ThreeReceiverChannel) -> Result<RateRegionSample> {
    check(dist, PATTERN_PROP1)?;
    let j = dist.joint();
    let iuz = mi_rx(j, &["U"], &ch.z, &[])?;
    let b1 = mi_rx(j, &["X"], &ch.y1, &["U"])?;
    let b2 = mi_rx(j, &["X"], &ch.y2, &["U"])?;
    let bz = mi_rx(j, &["X"], &ch.z, &["U"])?;
    let rows = vec![
        RegionRow::constant("R0", &[("R0", 1.0)], false, iuz),
        RegionRow::constant("R1", &[("R1", 1.0)], false, b1.min(b2)),
        RegionRow::constant("Re<=R1", &[("Re", 1.0), ("R1", -1.0)], false, 0.0),
        RegionRow::constant("Re", &[("Re", 1.0)], false, (b1 - bz).min(b2 - bz).max(0.0)),
    ];
    RateRegionSample::new(&["R0", "R1", "Re"], rows)
}

struct MultilevelTerms {
    iuz2: f64,
    iu3z3: f64,
    iu3z2_u: f64,
    vy1_u: f64,
    vy1_u3: f64,
    vz2_u: f64,
    vz2_u3: f64,
    vz3_u3: f64,
    xy1_u: f64,
    xy1_u3: f64,
    xz2_u: f64,
    xz2_u3: f64,
}

fn multilevel_terms(dist: &FactoredDistribution, ch: &MultilevelChannel) -> Result<MultilevelTerms> {
    check(dist, PATTERN_MULTILEVEL)?;
    let j = dist.joint();
    Ok(MultilevelTerms {
        iuz2: mi_rx(j, &["U"], &ch.z2, &[])?,
        iu3z3: mi_rx(j, &["U3"], &ch.z3, &[])?,
        iu3z2_u: mi_rx(j, &["U3"], &ch.z2, &["U"])?,
        vy1_u: mi_rx(j, &["V"], &ch.y1, &["U"])?,
        vy1_u3: mi_rx(j, &["V"], &ch.y1, &["U3"])?,
        vz2_u: mi_rx(j, &["V"], &ch.z2, &["U"])?,
        vz2_u3: mi_rx(j, &["V"], &ch.z2, &["U3"])?,
        vz3_u3: mi_rx(j, &["V"], &ch.z3, &["U3"])?,
        xy1_u: mi_rx(j, &["X"], &ch.y1, &["U"])?,
        xy1_u3: mi_rx(j, &["X"], &ch.y1, &["U3"])?,
        xz2_u: mi_rx(j, &["X"], &ch.z2, &["U"])?,
        xz2_u3: mi_rx(j, &["X"], &ch.z2, &["U3"])?,
    })
}

/// `[c - R0]^+ + d` as a max of two affine terms.
fn clamp_minus_r0(c: f64, d: f64) -> Vec<Affine> {
    vec![
        Affine {
            constant: c + d,
            terms: vec![("R0".into(), -1.0)],
        },
        Affine::constant(d),
    ]
}

const MULTILEVEL_VARS: [&str; 4] = ["R0", "R1", "Re2", "Re3"];

/// Inner bound for one legitimate receiver and two eavesdroppers.
pub fn prop2_inner_region(dist: &FactoredDistribution, ch: &MultilevelChannel) -> Result<RateRegionSample> {
    let t = multilevel_terms(dist, ch)?;
    let d2 = t.vy1_u3 - t.vz2_u3;
    let rows = vec![
        RegionRow::constant("R0", &[("R0", 1.0)], true, t.iuz2.min(t.iu3z3)),
        RegionRow::constant("R1", &[("R1", 1.0)], true, t.vy1_u),
        RegionRow::constant("R0+R1", &[("R0", 1.0), ("R1", 1.0)], true, t.iu3z3 + t.vy1_u3),
        RegionRow::constant("Re2<=R1", &[("Re2", 1.0), ("R1", -1.0)], false, 0.0),
        RegionRow::constant("Re2", &[("Re2", 1.0)], false, t.vy1_u - t.vz2_u),
        RegionRow::new(
            "Re2 tradeoff",
            &[("Re2", 1.0)],
            false,
            clamp_minus_r0(t.iu3z3 - t.iu3z2_u, d2),
        ),
        RegionRow::constant("Re3<=R1", &[("Re3", 1.0), ("R1", -1.0)], false, 0.0),
        RegionRow::constant("Re3", &[("Re3", 1.0)], false, (t.vy1_u3 - t.vz3_u3).max(0.0)),
        RegionRow::constant("Re2+Re3", &[("Re2", 1.0), ("Re3", 1.0), ("R1", -1.0)], false, d2),
    ];
    RateRegionSample::new(&MULTILEVEL_VARS, rows)
}

/// Outer bound for one legitimate receiver and two eavesdroppers. Row labels
/// match the inner bound where the rows correspond.
pub fn prop3_outer_region(dist: &FactoredDistribution, ch: &MultilevelChannel) -> Result<RateRegionSample> {
    let t = multilevel_terms(dist, ch)?;
    let rows = vec![
        RegionRow::constant("R0", &[("R0", 1.0)], false, t.iuz2.min(t.iu3z3)),
        RegionRow::constant("R1", &[("R1", 1.0)], false, t.vy1_u),
        RegionRow::constant("R0+R1", &[("R0", 1.0), ("R1", 1.0)], false, t.iu3z3 + t.vy1_u3),
        RegionRow::constant("Re2", &[("Re2", 1.0)], false, t.xy1_u - t.xz2_u),
        RegionRow::new(
            "Re2 tradeoff",
            &[("Re2", 1.0)],
            false,
            clamp_minus_r0(t.iu3z3 - t.iu3z2_u, t.xy1_u3 - t.xz2_u3),
        ),
        RegionRow::constant("Re3", &[("Re3", 1.0)], false, (t.vy1_u3 - t.vz3_u3).max(0.0)),
    ];
    RateRegionSample::new(&MULTILEVEL_VARS, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::mi_rx;
    use crate::prob::{binary_entropy, cascade, ConditionalPmf, FactorPattern, Pmf};
    use crate::search::{random_table, rng_for};

    fn sizes(p: &[(&str, usize)]) -> BTreeMap<String, usize> {
        p.iter().map(|(n, s)| (n.to_string(), *s)).collect()
    }

    /// `p(u)p(v0|u)` random, `V1 = V2 = V0`, `X ~ p(x|v0)`.
    fn collapsed_theorem2(seed: u64, nu: usize, nv: usize, nx: usize) -> FactoredDistribution {
        let mut rng = rng_for(seed, 0);
        let px = random_table(&mut rng, nv, nx);
        let mut tx = Vec::new();
        for row in 0..nv * nv * nv {
            tx.extend_from_slice(px.row(row / (nv * nv)));
        }
        FactorPattern::parse(PATTERN_THEOREM2)
            .unwrap()
            .build(
                &sizes(&[("U", nu), ("V0", nv), ("V1", nv), ("V2", nv), ("X", nx)]),
                vec![
                    random_table(&mut rng, 1, nu),
                    random_table(&mut rng, nu, nv),
                    ConditionalPmf::deterministic(nv, nv * nv, |v| v * nv + v),
                    ConditionalPmf::new(nv * nv * nv, nx, tx).unwrap(),
                ],
            )
            .unwrap()
    }

    #[test]
    fn theorem2_collapses_to_six_rows() {
        let mut rng = rng_for(77, 1);
        let y = random_table(&mut rng, 3, 3);
        let ch = ThreeReceiverChannel::new(y.clone(), y, random_table(&mut rng, 3, 2)).unwrap();
        let d = collapsed_theorem2(3, 2, 3, 3);
        let r = theorem2_region(&d, &ch).unwrap().expect("collapse is admissible");
        assert_eq!(r.rows.len(), 10);
        // The displayed six rows in terms of V.
        let d1 = d.joint().clone();
        let j = FactoredDistribution::new(d.factors().to_vec()).unwrap();
        assert_eq!(j.joint(), &d1);
        let iuz = mi_rx(&d1, &["U"], &ch.z, &[]).unwrap();
        let vyu = mi_rx(&d1, &["V0"], &ch.y1, &["U"]).unwrap();
        let vy = mi_rx(&d1, &["V0"], &ch.y1, &[]).unwrap();
        let vzu = mi_rx(&d1, &["V0"], &ch.z, &["U"]).unwrap();
        let want = [iuz, iuz + vyu, vy, 0.0, vyu - vzu, vy - vzu];
        for (row, w) in r.rows.iter().zip(want) {
            assert!((row.constant_rhs().unwrap() - w).abs() < 1e-10, "{}", row.label);
        }
        // The extra rows follow from sums of the displayed ones.
        let rhs = |l: &str| r.row(l).unwrap().constant_rhs().unwrap();
        assert!(rhs("R0+2Re a") >= rhs("R0+Re") + rhs("Re") - 1e-10);
        assert!(rhs("R0+R1+2Re a") >= rhs("R0+R1 total") + 2.0 * rhs("Re") - 1e-10);
    }

    #[test]
    fn constant_dist_gives_origin_only() {
        let d = collapsed_theorem2(1, 1, 1, 2);
        let ch = ThreeReceiverChannel::new(
            ConditionalPmf::bsc(0.1).unwrap(),
            ConditionalPmf::bsc(0.2).unwrap(),
            ConditionalPmf::bsc(0.3).unwrap(),
        )
        .unwrap();
        let r = theorem2_region(&d, &ch).unwrap().unwrap();
        for row in &r.rows {
            assert!(row.constant_rhs().unwrap().abs() < 1e-12, "{}", row.label);
        }
        assert!(r.contains(&[]).unwrap());
        assert!(!r.contains(&[("R0", 1e-6)]).unwrap());
        assert!(!r.contains(&[("R1", 1e-6)]).unwrap());
    }

    #[test]
    fn prop1_examples() {
        let y = ConditionalPmf::bsc(0.1).unwrap();
        let z = ConditionalPmf::bsc(0.2).unwrap();
        let pu = Pmf::new(vec![0.3, 0.7]).unwrap().as_conditional();
        let px = ConditionalPmf::from_rows(vec![vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        let build = |pu: ConditionalPmf, px: ConditionalPmf| {
            FactorPattern::parse(PATTERN_PROP1)
                .unwrap()
                .build(&sizes(&[("U", 2), ("X", 2)]), vec![pu, px])
                .unwrap()
        };
        let ch = ThreeReceiverChannel::new(y.clone(), y.clone(), z.clone()).unwrap();
        let r = prop1_region(&build(pu.clone(), px.clone()), &ch).unwrap();
        // Oracle: sum over u of p(u) [H(Y|U=u) - H(Y|X)] differences.
        let h_out = |q: f64, eps: f64| binary_entropy(q * (1.0 - eps) + (1.0 - q) * eps);
        let oracle: f64 = [(0.3, 0.5), (0.7, 0.9)]
            .iter()
            .map(|&(w, q)| w * ((h_out(q, 0.1) - binary_entropy(0.1)) - (h_out(q, 0.2) - binary_entropy(0.2))))
            .sum();
        assert!((r.row("Re").unwrap().constant_rhs().unwrap() - oracle).abs() < 1e-12);

        let same = ThreeReceiverChannel::new(y.clone(), y.clone(), y.clone()).unwrap();
        let r = prop1_region(&build(pu, px.clone()), &same).unwrap();
        assert_eq!(r.row("Re").unwrap().constant_rhs().unwrap(), 0.0);

        let r = prop1_region(&build(Pmf::point(2, 0).as_conditional(), px), &ch).unwrap();
        assert_eq!(r.row("R0").unwrap().constant_rhs().unwrap(), 0.0);
        assert!((r.row("R1").unwrap().constant_rhs().unwrap() - (1.0 - binary_entropy(0.1))).abs() < 1e-12);
    }

    fn multilevel_dist(seed: u64, v_is_x: bool) -> FactoredDistribution {
        let mut rng = rng_for(seed, 0);
        let tables = vec![
            random_table(&mut rng, 1, 2),
            random_table(&mut rng, 2, 2),
            random_table(&mut rng, 2, 2),
            if v_is_x {
                ConditionalPmf::identity(2)
            } else {
                random_table(&mut rng, 2, 2)
            },
        ];
        FactorPattern::parse(PATTERN_MULTILEVEL)
            .unwrap()
            .build(&sizes(&[("U", 2), ("U3", 2), ("V", 2), ("X", 2)]), tables)
            .unwrap()
    }

    fn multilevel_channel() -> MultilevelChannel {
        let y1 = ConditionalPmf::bsc(0.1).unwrap();
        let z2 = cascade(&y1, &ConditionalPmf::bsc(0.15).unwrap()).unwrap();
        MultilevelChannel::new(y1, z2, ConditionalPmf::bsc(0.25).unwrap()).unwrap()
    }

    #[test]
    fn prop2_clamp_and_constant_aux() {
        let ch = multilevel_channel();
        let d = multilevel_dist(4, false);
        let r = prop2_inner_region(&d, &ch).unwrap();
        let row = r.row("Re2 tradeoff").unwrap();
        let j = d.joint();
        let d2 = mi_rx(j, &["V"], &ch.y1, &["U3"]).unwrap() - mi_rx(j, &["V"], &ch.z2, &["U3"]).unwrap();
        let at = |r0: f64| row.rhs_at(&[("R0".to_string(), r0)].into_iter().collect());
        assert!((at(10.0) - d2).abs() < 1e-12);
        assert!(at(0.0) >= d2);

        let mut rng = rng_for(0, 0);
        let constant = FactorPattern::parse(PATTERN_MULTILEVEL)
            .unwrap()
            .build(
                &sizes(&[("U", 1), ("U3", 1), ("V", 1), ("X", 2)]),
                vec![
                    Pmf::uniform(1).as_conditional(),
                    Pmf::uniform(1).as_conditional(),
                    Pmf::uniform(1).as_conditional(),
                    random_table(&mut rng, 1, 2),
                ],
            )
            .unwrap();
        let r = prop2_inner_region(&constant, &ch).unwrap();
        assert_eq!(r.row("R0").unwrap().constant_rhs().unwrap(), 0.0);
        assert_eq!(r.row("R1").unwrap().constant_rhs().unwrap(), 0.0);
        let o = prop3_outer_region(&constant, &ch).unwrap();
        assert!(o.contains(&[]).unwrap());
        assert!(!o.contains(&[("R1", 1e-6)]).unwrap());
    }

    #[test]
    fn inner_rows_below_outer_when_v_is_x() {
        let ch = multilevel_channel();
        for seed in 0..10 {
            let d = multilevel_dist(seed, true);
            let inner = prop2_inner_region(&d, &ch).unwrap();
            let outer = prop3_outer_region(&d, &ch).unwrap();
            for o in &outer.rows {
                let i = inner.row(&o.label).unwrap();
                for r0 in [0.0, 0.1, 0.3, 1.0] {
                    let p: BTreeMap<String, f64> = [("R0".to_string(), r0)].into_iter().collect();
                    assert!(i.rhs_at(&p) <= o.rhs_at(&p) + 1e-10, "{}", o.label);
                }
            }
        }
    }
}
