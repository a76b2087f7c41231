//! Single-letter rate expressions: scalar secrecy-rate bounds, rate-region
//! samples and their maximization over auxiliary distributions.
//!
//! Distributions are [`FactoredDistribution`]s whose channel-input axis is
//! named `X`; receivers are attached on the fly from the channel model.

mod maximize;
mod region;

pub use maximize::{evaluate, maximize, AuxSpec, BoundId, BoundResult, ChannelModel};
pub use region::{
    prop1_region, prop2_inner_region, prop3_outer_region, theorem2_region, Affine, RateRegionSample, RegionRow,
};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orderings::{check_degraded, Holds};
use crate::prob::{product_channel, Axis, ConditionalPmf, Factor, FactorPattern, FactoredDistribution, JointPmf};

/// Tolerance on the Marton admissibility constraint.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;

pub const PATTERN_WIRETAP: &str = "V; X|V";
pub const PATTERN_CK: &str = "Q; V|Q; X|V";
pub const PATTERN_THEOREM1: &str = "Q,V0; V1,V2|V0; X|V0,V1,V2";
pub const PATTERN_THEOREM2: &str = "U; V0|U; V1,V2|V0; X|V0,V1,V2";
pub const PATTERN_PROP1: &str = "U; X|U";
pub const PATTERN_MULTILEVEL: &str = "U; U3|U; V|U3; X|V";

/// Legitimate receiver `Y` and eavesdropper `Z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WiretapChannel {
    pub y: ConditionalPmf,
    pub z: ConditionalPmf,
}

impl WiretapChannel {
    pub fn new(y: ConditionalPmf, z: ConditionalPmf) -> Result<Self> {
        same_input(&[&y, &z])?;
        Ok(WiretapChannel { y, z })
    }

    pub fn inputs(&self) -> usize {
        self.y.rows()
    }
}

/// Legitimate receivers `Y1`, `Y2` and eavesdropper `Z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreeReceiverChannel {
    pub y1: ConditionalPmf,
    pub y2: ConditionalPmf,
    pub z: ConditionalPmf,
}

impl ThreeReceiverChannel {
    pub fn new(y1: ConditionalPmf, y2: ConditionalPmf, z: ConditionalPmf) -> Result<Self> {
        same_input(&[&y1, &y2, &z])?;
        Ok(ThreeReceiverChannel { y1, y2, z })
    }

    pub fn inputs(&self) -> usize {
        self.y1.rows()
    }
}

/// Legitimate receiver `Y1` and eavesdroppers `Z2`, `Z3`, with `Z2` a degraded
/// version of `Y1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultilevelChannel {
    pub y1: ConditionalPmf,
    pub z2: ConditionalPmf,
    pub z3: ConditionalPmf,
}

impl MultilevelChannel {
    /// Verifies the multilevel structure with an exact degradedness test.
    pub fn new(y1: ConditionalPmf, z2: ConditionalPmf, z3: ConditionalPmf) -> Result<Self> {
        same_input(&[&y1, &z2, &z3])?;
        if check_degraded(&y1, &z2)?.holds != Holds::True {
            return Err(Error::NotMultilevel("Z2 is not a degraded version of Y1".into()));
        }
        Ok(MultilevelChannel { y1, z2, z3 })
    }

    pub fn inputs(&self) -> usize {
        self.y1.rows()
    }
}

/// A memoryless product of three-receiver components.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductChannel {
    pub components: Vec<ThreeReceiverChannel>,
}

impl ProductChannel {
    pub fn new(components: Vec<ThreeReceiverChannel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("product of zero components".into()));
        }
        Ok(ProductChannel { components })
    }

    /// The product as a single channel on the mixed-radix input alphabet.
    pub fn combined(&self) -> Result<ThreeReceiverChannel> {
        let pick = |f: fn(&ThreeReceiverChannel) -> &ConditionalPmf| {
            product_channel(&self.components.iter().map(|c| f(c).clone()).collect::<Vec<_>>())
        };
        ThreeReceiverChannel::new(pick(|c| &c.y1)?, pick(|c| &c.y2)?, pick(|c| &c.z)?)
    }
}

fn same_input(channels: &[&ConditionalPmf]) -> Result<()> {
    let n = channels[0].rows();
    if channels.iter().any(|c| c.rows() != n) {
        return Err(Error::DimensionMismatch(
            "receivers disagree on the input alphabet".into(),
        ));
    }
    Ok(())
}

/// `I(A;R|C)` for a receiver `R` attached to `X` through `channel`.
/// Only the axes involved are kept before the receiver is attached.
pub(crate) fn mi_rx(j: &JointPmf, a: &[&str], channel: &ConditionalPmf, c: &[&str]) -> Result<f64> {
    if j.size_of("X")? != channel.rows() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} symbols, channel has {} inputs",
            j.size_of("X")?,
            channel.rows()
        )));
    }
    let mut keep: Vec<&str> = Vec::new();
    for n in a.iter().chain(c).chain(std::iter::once(&"X")) {
        if !keep.contains(n) {
            keep.push(n);
        }
    }
    let m = j.marginalize(&keep)?.attach_channel("X", "__rx", channel)?;
    m.conditional_mutual_information(a, &["__rx"], c)
}

fn check(dist: &FactoredDistribution, pattern: &str) -> Result<()> {
    dist.check_pattern(&FactorPattern::parse(pattern).expect("static pattern"))
}

/// `I(V;Y) - I(V;Z)`; may be negative.
pub fn wiretap_rate(dist: &FactoredDistribution, ch: &WiretapChannel) -> Result<f64> {
    let j = dist.joint();
    j.axis_index("V")?;
    Ok(mi_rx(j, &["V"], &ch.y, &[])? - mi_rx(j, &["V"], &ch.z, &[])?)
}

/// `min_j I(V;Yj|Q) - I(V;Z|Q)` over `p(q)p(v|q)p(x|v)`.
pub fn ck_extension_rate(dist: &FactoredDistribution, ch: &ThreeReceiverChannel) -> Result<f64> {
    check(dist, PATTERN_CK)?;
    let j = dist.joint();
    let z = mi_rx(j, &["V"], &ch.z, &["Q"])?;
    let a = mi_rx(j, &["V"], &ch.y1, &["Q"])? - z;
    let b = mi_rx(j, &["V"], &ch.y2, &["Q"])? - z;
    Ok(a.min(b))
}

/// `min{ I(X;Y1|Q) - I(X;Z|Q), I(V;Y2|Q) - I(V;Z|Q) }` over `p(q)p(v|q)p(x|v)`.
pub fn corollary1_rate(dist: &FactoredDistribution, ch: &ThreeReceiverChannel) -> Result<f64> {
    check(dist, PATTERN_CK)?;
    let j = dist.joint();
    let a = mi_rx(j, &["X"], &ch.y1, &["Q"])? - mi_rx(j, &["X"], &ch.z, &["Q"])?;
    let b = mi_rx(j, &["V"], &ch.y2, &["Q"])? - mi_rx(j, &["V"], &ch.z, &["Q"])?;
    Ok(a.min(b))
}

/// Both sides of the Marton admissibility constraint
/// `I(V1,V2;Z|V0) <= I(V1;Z|V0) + I(V2;Z|V0) - I(V1;V2|V0)`.
pub fn marton_admissibility(j: &JointPmf, z: &ConditionalPmf) -> Result<(f64, f64)> {
    let lhs = mi_rx(j, &["V1", "V2"], z, &["V0"])?;
    let rhs = mi_rx(j, &["V1"], z, &["V0"])? + mi_rx(j, &["V2"], z, &["V0"])?
        - j.conditional_mutual_information(&["V1"], &["V2"], &["V0"])?;
    Ok((lhs, rhs))
}

/// The Marton-coding lower bound; `None` when the pmf violates the
/// admissibility constraint by more than [`ADMISSIBILITY_TOL`].
pub fn theorem1_rate(dist: &FactoredDistribution, ch: &ThreeReceiverChannel) -> Result<Option<f64>> {
    check(dist, PATTERN_THEOREM1)?;
    let j = dist.joint();
    let (lhs, rhs) = marton_admissibility(j, &ch.z)?;
    if lhs > rhs + ADMISSIBILITY_TOL {
        return Ok(None);
    }
    let a = mi_rx(j, &["V0", "V1"], &ch.y1, &["Q"])? - mi_rx(j, &["V0", "V1"], &ch.z, &["Q"])?;
    let b = mi_rx(j, &["V0", "V2"], &ch.y2, &["Q"])? - mi_rx(j, &["V0", "V2"], &ch.z, &["Q"])?;
    Ok(Some(a.min(b)))
}

/// The eliminated third row `I(V0,V1;Y1|Q) + I(V0,V2;Y2|Q) - 2I(V0;Z|Q) - I(V1;V2|V0)`
/// bounding `2R`, together with the sum of the two kept rows.
pub fn theorem1_third_row(dist: &FactoredDistribution, ch: &ThreeReceiverChannel) -> Result<(f64, f64)> {
    check(dist, PATTERN_THEOREM1)?;
    let j = dist.joint();
    let a1 = mi_rx(j, &["V0", "V1"], &ch.y1, &["Q"])?;
    let a2 = mi_rx(j, &["V0", "V2"], &ch.y2, &["Q"])?;
    let third = a1 + a2
        - 2.0 * mi_rx(j, &["V0"], &ch.z, &["Q"])?
        - j.conditional_mutual_information(&["V1"], &["V2"], &["V0"])?;
    let sum = a1 - mi_rx(j, &["V0", "V1"], &ch.z, &["Q"])? + a2 - mi_rx(j, &["V0", "V2"], &ch.z, &["Q"])?;
    Ok((third, sum))
}

/// Per-component pmfs `p(u_l)p(x_l|u_l)`, one entry per product component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentDist {
    pub p_u: Vec<f64>,
    pub p_x_given_u: ConditionalPmf,
}

impl ComponentDist {
    fn joint(&self) -> Result<JointPmf> {
        let u = ConditionalPmf::new(1, self.p_u.len(), self.p_u.clone())?;
        JointPmf::unit()
            .extend(&[], &[Axis::new("U", self.p_u.len())], &u)?
            .extend(&["U"], &[Axis::new("X", self.p_x_given_u.cols())], &self.p_x_given_u)
    }
}

/// Index sets and the per-receiver sums of the reversely degraded formula.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReverselyDegradedReport {
    pub value: f64,
    pub sums: [f64; 2],
    pub diffs: Vec<[f64; 2]>,
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    pub set_c: Vec<usize>,
    /// Theorem-1 value at the auxiliary assignment built from the index sets.
    pub theorem1_value: Option<f64>,
}

/// `min_j sum_l [I(U_l;Y_jl) - I(U_l;Z_l)]^+`, cross-checked against the
/// Marton bound with `V0 = U_C`, `V1 = U_A`, `V2 = U_B`.
pub fn reversely_degraded_bound(dists: &[ComponentDist], ch: &ProductChannel) -> Result<ReverselyDegradedReport> {
    if dists.len() != ch.components.len() {
        return Err(Error::PatternMismatch(format!(
            "{} component pmfs for {} components",
            dists.len(),
            ch.components.len()
        )));
    }
    let diffs = component_diffs(dists, ch)?;
    let sums = positive_sums(&diffs);
    let set_a: Vec<usize> = (0..diffs.len()).filter(|&l| diffs[l][0] >= 0.0).collect();
    let set_b: Vec<usize> = (0..diffs.len()).filter(|&l| diffs[l][1] >= 0.0).collect();
    let set_c: Vec<usize> = set_a.iter().copied().filter(|l| set_b.contains(l)).collect();
    let dist = reversely_degraded_assignment(dists, &set_a, &set_b, &set_c)?;
    let theorem1_value = theorem1_rate(&dist, &ch.combined()?)?;
    Ok(ReverselyDegradedReport {
        value: sums[0].min(sums[1]),
        sums,
        diffs,
        set_a,
        set_b,
        set_c,
        theorem1_value,
    })
}

/// `[I(U_l;Y_1l) - I(U_l;Z_l), I(U_l;Y_2l) - I(U_l;Z_l)]` per component.
pub(crate) fn component_diffs(dists: &[ComponentDist], ch: &ProductChannel) -> Result<Vec<[f64; 2]>> {
    let mut diffs = Vec::with_capacity(dists.len());
    for (d, c) in dists.iter().zip(&ch.components) {
        let j = d.joint()?;
        let z = mi_rx(&j, &["U"], &c.z, &[])?;
        diffs.push([mi_rx(&j, &["U"], &c.y1, &[])? - z, mi_rx(&j, &["U"], &c.y2, &[])? - z]);
    }
    Ok(diffs)
}

pub(crate) fn positive_sums(diffs: &[[f64; 2]]) -> [f64; 2] {
    [0, 1].map(|r| diffs.iter().map(|d| d[r].max(0.0)).sum::<f64>())
}

/// Mixed-radix helper over a list of alphabet sizes over a list of alphabet sizes (first most significant).
fn decode_radix(mut code: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        out[i] = code % sizes[i];
        code /= sizes[i];
    }
    out
}

/// Theorem-1 auxiliaries for a product channel: `V0 = (U_l)_{l in C}`,
/// `V1 = (U_l)_{l in A}`, `V2 = (U_l)_{l in B}` and `X_l` drawn from
/// `p(x_l|u_l)` on `A ∪ B`, from its marginal elsewhere. `Q` is constant.
pub fn reversely_degraded_assignment(
    dists: &[ComponentDist],
    set_a: &[usize],
    set_b: &[usize],
    set_c: &[usize],
) -> Result<FactoredDistribution> {
    let k = dists.len();
    let u_sizes: Vec<usize> = dists.iter().map(|d| d.p_u.len()).collect();
    let x_sizes: Vec<usize> = dists.iter().map(|d| d.p_x_given_u.cols()).collect();
    let sizes_of = |set: &[usize]| set.iter().map(|&l| u_sizes[l]).collect::<Vec<_>>();
    let (sc, sa, sb) = (sizes_of(set_c), sizes_of(set_a), sizes_of(set_b));
    let (n0, n1, n2) = (
        sc.iter().product::<usize>(),
        sa.iter().product::<usize>(),
        sb.iter().product::<usize>(),
    );
    let nx: usize = x_sizes.iter().product();

    // p(q, v0): Q constant, V0 = U_C with product law.
    let mut p_v0 = vec![0.0; n0];
    for (code, p) in p_v0.iter_mut().enumerate() {
        let d = decode_radix(code, &sc);
        *p = set_c.iter().zip(&d).map(|(&l, &u)| dists[l].p_u[u]).product();
    }
    // p(v1, v2 | v0): components of C copied from v0, the rest independent.
    let mut t12 = vec![0.0; n0 * n1 * n2];
    for v0 in 0..n0 {
        let d0 = decode_radix(v0, &sc);
        for v1 in 0..n1 {
            let d1 = decode_radix(v1, &sa);
            for v2 in 0..n2 {
                let d2 = decode_radix(v2, &sb);
                let mut u: Vec<Option<usize>> = vec![None; k];
                let mut consistent = true;
                for (set, digits) in [(set_c, &d0), (set_a, &d1), (set_b, &d2)] {
                    for (&l, &v) in set.iter().zip(digits.iter()) {
                        match u[l] {
                            Some(prev) if prev != v => consistent = false,
                            _ => u[l] = Some(v),
                        }
                    }
                }
                if !consistent {
                    continue;
                }
                let p: f64 = (0..k)
                    .filter(|l| !set_c.contains(l))
                    .filter_map(|l| u[l].map(|v| dists[l].p_u[v]))
                    .product();
                t12[(v0 * n1 + v1) * n2 + v2] = p;
            }
        }
    }
    // p(x | v0, v1, v2).
    let marg: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| {
            (0..d.p_x_given_u.cols())
                .map(|x| (0..d.p_u.len()).map(|u| d.p_u[u] * d.p_x_given_u.get(u, x)).sum())
                .collect()
        })
        .collect();
    let mut tx = vec![0.0; n0 * n1 * n2 * nx];
    for v0 in 0..n0 {
        for v1 in 0..n1 {
            let d1 = decode_radix(v1, &sa);
            for v2 in 0..n2 {
                let d2 = decode_radix(v2, &sb);
                let mut u: Vec<Option<usize>> = vec![None; k];
                for (set, digits) in [(set_a, &d1), (set_b, &d2)] {
                    for (&l, &v) in set.iter().zip(digits.iter()) {
                        u[l] = Some(v);
                    }
                }
                let row = (v0 * n1 + v1) * n2 + v2;
                for x in 0..nx {
                    let dx = decode_radix(x, &x_sizes);
                    tx[row * nx + x] = (0..k)
                        .map(|l| match u[l] {
                            Some(ul) => dists[l].p_x_given_u.get(ul, dx[l]),
                            None => marg[l][dx[l]],
                        })
                        .product();
                }
            }
        }
    }
    let normalize_rows = |data: Vec<f64>, rows: usize, cols: usize| -> Result<ConditionalPmf> {
        let mut data = data;
        for r in 0..rows {
            let s: f64 = data[r * cols..(r + 1) * cols].iter().sum();
            if s > 0.0 {
                data[r * cols..(r + 1) * cols].iter_mut().for_each(|v| *v /= s);
            } else {
                data[r * cols] = 1.0;
            }
        }
        ConditionalPmf::new(rows, cols, data)
    };
    FactoredDistribution::new(vec![
        Factor::new(
            vec![Axis::new("Q", 1), Axis::new("V0", n0)],
            &[],
            ConditionalPmf::new(1, n0, p_v0)?,
        ),
        Factor::new(
            vec![Axis::new("V1", n1), Axis::new("V2", n2)],
            &["V0"],
            normalize_rows(t12, n0, n1 * n2)?,
        ),
        Factor::new(
            vec![Axis::new("X", nx)],
            &["V0", "V1", "V2"],
            normalize_rows(tx, n0 * n1 * n2, nx)?,
        ),
    ])
}

/// Builds `p(q)p(v|q)p(x|v)` from tables.
pub fn ck_dist(
    p_q: &[f64],
    p_v_given_q: &ConditionalPmf,
    p_x_given_v: &ConditionalPmf,
) -> Result<FactoredDistribution> {
    let sizes: BTreeMap<String, usize> = [
        ("Q".to_string(), p_q.len()),
        ("V".to_string(), p_v_given_q.cols()),
        ("X".to_string(), p_x_given_v.cols()),
    ]
    .into_iter()
    .collect();
    FactorPattern::parse(PATTERN_CK)?.build(
        &sizes,
        vec![
            ConditionalPmf::new(1, p_q.len(), p_q.to_vec())?,
            p_v_given_q.clone(),
            p_x_given_v.clone(),
        ],
    )
}

fn table_of(dist: &FactoredDistribution, i: usize) -> &ConditionalPmf {
    &dist.factors()[i].table
}

/// Theorem-1 distribution with `V0 = V1 = V2 = V` from a CK-pattern pmf.
pub fn ck_as_theorem1(dist: &FactoredDistribution) -> Result<FactoredDistribution> {
    check(dist, PATTERN_CK)?;
    let (pq, pv, px) = (table_of(dist, 0), table_of(dist, 1), table_of(dist, 2));
    let (nq, nv, nx) = (pq.cols(), pv.cols(), px.cols());
    let mut joint_qv = vec![0.0; nq * nv];
    for q in 0..nq {
        for v in 0..nv {
            joint_qv[q * nv + v] = pq.get(0, q) * pv.get(q, v);
        }
    }
    let copy = ConditionalPmf::deterministic(nv, nv * nv, |v| v * nv + v);
    let mut tx = vec![0.0; nv * nv * nv * nx];
    for v0 in 0..nv {
        for v1 in 0..nv {
            for v2 in 0..nv {
                let row = (v0 * nv + v1) * nv + v2;
                for x in 0..nx {
                    tx[row * nx + x] = px.get(v0, x);
                }
            }
        }
    }
    FactoredDistribution::new(vec![
        Factor::new(
            vec![Axis::new("Q", nq), Axis::new("V0", nv)],
            &[],
            ConditionalPmf::new(1, nq * nv, joint_qv)?,
        ),
        Factor::new(vec![Axis::new("V1", nv), Axis::new("V2", nv)], &["V0"], copy),
        Factor::new(
            vec![Axis::new("X", nx)],
            &["V0", "V1", "V2"],
            ConditionalPmf::new(nv * nv * nv, nx, tx)?,
        ),
    ])
}

/// Theorem-1 distribution reproducing the Corollary-1 value:
/// `V0 = V`, `V1 ~ p(x|v)`, `V2 = V0`, `X = V1`.
pub fn corollary1_as_theorem1(dist: &FactoredDistribution) -> Result<FactoredDistribution> {
    check(dist, PATTERN_CK)?;
    let (pq, pv, px) = (table_of(dist, 0), table_of(dist, 1), table_of(dist, 2));
    let (nq, nv, nx) = (pq.cols(), pv.cols(), px.cols());
    let mut joint_qv = vec![0.0; nq * nv];
    for q in 0..nq {
        for v in 0..nv {
            joint_qv[q * nv + v] = pq.get(0, q) * pv.get(q, v);
        }
    }
    // Columns of p(v1, v2 | v0) index (v1, v2) with v1 in X and v2 in V.
    let mut t12 = vec![0.0; nv * nx * nv];
    for v0 in 0..nv {
        for x in 0..nx {
            t12[v0 * nx * nv + x * nv + v0] = px.get(v0, x);
        }
    }
    let tx = ConditionalPmf::deterministic(nv * nx * nv, nx, |row| (row / nv) % nx);
    FactoredDistribution::new(vec![
        Factor::new(
            vec![Axis::new("Q", nq), Axis::new("V0", nv)],
            &[],
            ConditionalPmf::new(1, nq * nv, joint_qv)?,
        ),
        Factor::new(
            vec![Axis::new("V1", nx), Axis::new("V2", nv)],
            &["V0"],
            ConditionalPmf::new(nv, nx * nv, t12)?,
        ),
        Factor::new(vec![Axis::new("X", nx)], &["V0", "V1", "V2"], tx),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::prob::{binary_entropy, Pmf};
    use crate::search::{random_table, rng_for};

    fn uniform_wiretap_dist(nv: usize) -> FactoredDistribution {
        FactoredDistribution::new(vec![
            Factor::new(vec![Axis::new("V", nv)], &[], Pmf::uniform(nv).as_conditional()),
            Factor::new(vec![Axis::new("X", nv)], &["V"], ConditionalPmf::identity(nv)),
        ])
        .unwrap()
    }

    #[test]
    fn wiretap_examples() {
        let c = ConditionalPmf::bsc(0.1).unwrap();
        let same = WiretapChannel::new(c.clone(), c.clone()).unwrap();
        assert!(wiretap_rate(&uniform_wiretap_dist(2), &same).unwrap().abs() < 1e-15);

        let ch = WiretapChannel::new(c, ConditionalPmf::bsc(0.2).unwrap()).unwrap();
        let v = wiretap_rate(&uniform_wiretap_dist(2), &ch).unwrap();
        assert!((v - (binary_entropy(0.2) - binary_entropy(0.1))).abs() < 1e-12);
        assert!((v - 0.252_932).abs() < 1e-6);
    }

    #[test]
    fn ck_examples() {
        let c = ConditionalPmf::bsc(0.1).unwrap();
        let ch = ThreeReceiverChannel::new(c.clone(), c.clone(), c).unwrap();
        let d = ck_dist(&[1.0], &Pmf::uniform(2).as_conditional(), &ConditionalPmf::identity(2)).unwrap();
        assert!(ck_extension_rate(&d, &ch).unwrap().abs() < 1e-15);
        assert!(matches!(
            ck_extension_rate(&uniform_wiretap_dist(2), &ch),
            Err(Error::PatternMismatch(_))
        ));
    }

    #[test]
    fn degenerate_q_matches_unconditioned() {
        let mut rng = rng_for(5, 0);
        let ch = ThreeReceiverChannel::new(
            random_table(&mut rng, 3, 2),
            random_table(&mut rng, 3, 3),
            random_table(&mut rng, 3, 2),
        )
        .unwrap();
        let pv = random_table(&mut rng, 1, 2);
        let px = random_table(&mut rng, 2, 3);
        let d = ck_dist(&[1.0], &pv, &px).unwrap();
        let j = d.joint();
        let direct = (mi_rx(j, &["V"], &ch.y1, &[]).unwrap() - mi_rx(j, &["V"], &ch.z, &[]).unwrap())
            .min(mi_rx(j, &["V"], &ch.y2, &[]).unwrap() - mi_rx(j, &["V"], &ch.z, &[]).unwrap());
        assert!((ck_extension_rate(&d, &ch).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn time_sharing_dominates_single_q() {
        let mut rng = rng_for(9, 0);
        let ch = ThreeReceiverChannel::new(
            ConditionalPmf::bsc(0.05).unwrap(),
            ConditionalPmf::erasure(ratio(1, 5)).unwrap(),
            ConditionalPmf::bsc(0.3).unwrap(),
        )
        .unwrap();
        let px = random_table(&mut rng, 2, 2);
        let (pv1, pv2) = (random_table(&mut rng, 1, 2), random_table(&mut rng, 1, 2));
        let single = |pv: &ConditionalPmf| corollary1_rate(&ck_dist(&[1.0], pv, &px).unwrap(), &ch).unwrap();
        let (a, b) = (single(&pv1), single(&pv2));
        let both = ConditionalPmf::new(2, 2, [pv1.data(), pv2.data()].concat()).unwrap();
        let at = |w: f64| corollary1_rate(&ck_dist(&[w, 1.0 - w], &both, &px).unwrap(), &ch).unwrap();
        // The min of averages is at least the average of mins.
        assert!(at(0.5) >= 0.5 * (a + b) - 1e-12);
        let best = (0..=20).map(|k| at(k as f64 / 20.0)).fold(f64::MIN, f64::max);
        assert!(best >= a.max(b) - 1e-12);
    }

    #[test]
    fn theorem1_collapses() {
        let mut rng = rng_for(21, 0);
        let ch = ThreeReceiverChannel::new(
            random_table(&mut rng, 2, 3),
            random_table(&mut rng, 2, 2),
            random_table(&mut rng, 2, 3),
        )
        .unwrap();
        let d = ck_dist(
            &[0.4, 0.6],
            &random_table(&mut rng, 2, 3),
            &random_table(&mut rng, 3, 2),
        )
        .unwrap();
        let t = theorem1_rate(&ck_as_theorem1(&d).unwrap(), &ch).unwrap().unwrap();
        assert!((t - ck_extension_rate(&d, &ch).unwrap()).abs() < 1e-10);
        let t = theorem1_rate(&corollary1_as_theorem1(&d).unwrap(), &ch)
            .unwrap()
            .unwrap();
        assert!((t - corollary1_rate(&d, &ch).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn reversely_degraded_example_components() {
        let e = |a, b| ConditionalPmf::erasure(ratio(a, b)).unwrap();
        let c1 = ThreeReceiverChannel::new(e(1, 2), ConditionalPmf::identity(2), e(5, 6)).unwrap();
        let c2 = ThreeReceiverChannel::new(ConditionalPmf::identity(2), ConditionalPmf::constant(2), e(1, 2)).unwrap();
        let ch = ProductChannel::new(vec![c1, c2]).unwrap();
        let uni = ComponentDist {
            p_u: vec![0.5, 0.5],
            p_x_given_u: ConditionalPmf::identity(2),
        };
        let r = reversely_degraded_bound(&[uni.clone(), uni], &ch).unwrap();
        assert!((r.sums[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((r.sums[1] - 5.0 / 6.0).abs() < 1e-12);
        assert!((r.value - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.set_a, vec![0, 1]);
        assert_eq!(r.set_b, vec![0]);
        assert!((r.theorem1_value.unwrap() - r.value).abs() < 1e-10);
    }

    #[test]
    fn reversely_degraded_single_component_and_clamp() {
        let ch = ProductChannel::new(vec![ThreeReceiverChannel::new(
            ConditionalPmf::bsc(0.2).unwrap(),
            ConditionalPmf::bsc(0.2).unwrap(),
            ConditionalPmf::bsc(0.1).unwrap(),
        )
        .unwrap()])
        .unwrap();
        let uni = ComponentDist {
            p_u: vec![0.5, 0.5],
            p_x_given_u: ConditionalPmf::identity(2),
        };
        let r = reversely_degraded_bound(&[uni], &ch).unwrap();
        assert!(r.diffs[0][0] < 0.0);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn multilevel_requires_degraded_z2() {
        let y1 = ConditionalPmf::bsc(0.1).unwrap();
        assert!(MultilevelChannel::new(y1.clone(), ConditionalPmf::bsc(0.2).unwrap(), y1.clone()).is_ok());
        assert!(matches!(
            MultilevelChannel::new(y1.clone(), ConditionalPmf::bsc(0.05).unwrap(), y1),
            Err(Error::NotMultilevel(_))
        ));
    }
}
