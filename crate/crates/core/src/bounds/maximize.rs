use serde::{Deserialize, Serialize};

use super::{
    ck_extension_rate, component_diffs, corollary1_rate, positive_sums, theorem1_rate, wiretap_rate, ComponentDist,
    ProductChannel, ThreeReceiverChannel, WiretapChannel, PATTERN_CK, PATTERN_THEOREM1, PATTERN_WIRETAP,
};
use crate::error::{Error, Result};
use crate::prob::FactoredDistribution;
use crate::search::{maximize_objective, SearchBudget, SearchSpace};

/// Scalar bounds that can be maximized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundId {
    Wiretap,
    CkExtension,
    Corollary1,
    Theorem1,
    ReverselyDegraded,
}

impl BoundId {
    pub const ALL: [BoundId; 5] = [
        BoundId::Wiretap,
        BoundId::CkExtension,
        BoundId::Corollary1,
        BoundId::Theorem1,
        BoundId::ReverselyDegraded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::Wiretap => "wiretap",
            BoundId::CkExtension => "ck-extension",
            BoundId::Corollary1 => "corollary1",
            BoundId::Theorem1 => "theorem1",
            BoundId::ReverselyDegraded => "reversely-degraded",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownName(format!("bound `{s}`")))
    }
}

/// Channels a bound is evaluated on.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    Wiretap(WiretapChannel),
    ThreeReceiver(ThreeReceiverChannel),
    Product(ProductChannel),
}

impl ChannelModel {
    fn three_receiver(&self) -> Result<ThreeReceiverChannel> {
        match self {
            ChannelModel::ThreeReceiver(c) => Ok(c.clone()),
            ChannelModel::Product(p) => p.combined(),
            ChannelModel::Wiretap(_) => Err(Error::InvalidParameter(
                "this bound needs two legitimate receivers".into(),
            )),
        }
    }

    fn wiretap(&self) -> Result<WiretapChannel> {
        match self {
            ChannelModel::Wiretap(c) => Ok(c.clone()),
            _ => Err(Error::InvalidParameter(
                "the wiretap bound needs one receiver and one eavesdropper".into(),
            )),
        }
    }

    fn product(&self) -> Result<&ProductChannel> {
        match self {
            ChannelModel::Product(p) => Ok(p),
            _ => Err(Error::InvalidParameter("this bound needs a product channel".into())),
        }
    }
}

/// Auxiliary cardinalities; `None` picks the default for the input size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxSpec {
    pub q: Option<usize>,
    pub u: Option<usize>,
    pub u3: Option<usize>,
    pub v: Option<usize>,
    pub v0: Option<usize>,
    pub v1: Option<usize>,
    pub v2: Option<usize>,
}

impl AuxSpec {
    /// Cardinality of auxiliary `name` for an input alphabet of size `nx`.
    pub fn cardinality(&self, name: &str, nx: usize) -> Result<usize> {
        let (set, default) = match name {
            "Q" => (self.q, 2),
            "U" => (self.u, nx + 1),
            "U3" => (self.u3, nx + 1),
            "V0" => (self.v0, nx + 1),
            "V" => (self.v, nx + 2),
            "V1" => (self.v1, nx + 2),
            "V2" => (self.v2, nx + 2),
            _ => return Err(Error::UnknownAxis(name.to_string())),
        };
        match set {
            Some(0) => Err(Error::InvalidParameter(format!("cardinality of {name} must be >= 1"))),
            Some(k) => Ok(k),
            None => Ok(default),
        }
    }
}

/// Best value found by [`maximize`]. Values are lower bounds on the true
/// maximum since the search is not a certified global optimization.
#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub bound: BoundId,
    pub value: f64,
    pub argmax: FactoredDistribution,
    pub pattern: String,
    pub budget: SearchBudget,
    pub restarts: usize,
    pub best_restart: usize,
    pub best_iteration: usize,
    pub evaluations: u64,
    pub lower_bound_only: bool,
}

fn reversely_degraded_pattern(k: usize) -> String {
    (1..=k)
        .map(|l| format!("U{l}; X{l}|U{l}"))
        .collect::<Vec<_>>()
        .join("; ")
}

fn component_dists(dist: &FactoredDistribution) -> Vec<ComponentDist> {
    dist.factors()
        .chunks(2)
        .map(|f| ComponentDist {
            p_u: f[0].table.data().to_vec(),
            p_x_given_u: f[1].table.clone(),
        })
        .collect()
}

/// The maximized objective at `dist`, `None` where the point is inadmissible.
/// The wiretap objective is clamped at zero.
pub fn evaluate(bound: BoundId, dist: &FactoredDistribution, model: &ChannelModel) -> Result<Option<f64>> {
    Ok(match bound {
        BoundId::Wiretap => Some(wiretap_rate(dist, &model.wiretap()?)?.max(0.0)),
        BoundId::CkExtension => Some(ck_extension_rate(dist, &model.three_receiver()?)?),
        BoundId::Corollary1 => Some(corollary1_rate(dist, &model.three_receiver()?)?),
        BoundId::Theorem1 => theorem1_rate(dist, &model.three_receiver()?)?,
        BoundId::ReverselyDegraded => {
            let p = model.product()?;
            let dists = component_dists(dist);
            if dists.len() != p.components.len() {
                return Err(Error::PatternMismatch(reversely_degraded_pattern(p.components.len())));
            }
            let s = positive_sums(&component_diffs(&dists, p)?);
            Some(s[0].min(s[1]))
        }
    })
}

fn search_space(bound: BoundId, aux: &AuxSpec, model: &ChannelModel) -> Result<SearchSpace> {
    let card = |n: &str, nx: usize| aux.cardinality(n, nx);
    match bound {
        BoundId::Wiretap => {
            let nx = model.wiretap()?.inputs();
            SearchSpace::new(PATTERN_WIRETAP, &[("V", card("V", nx)?), ("X", nx)])
        }
        BoundId::CkExtension | BoundId::Corollary1 => {
            let nx = model.three_receiver()?.inputs();
            SearchSpace::new(PATTERN_CK, &[("Q", card("Q", nx)?), ("V", card("V", nx)?), ("X", nx)])
        }
        BoundId::Theorem1 => {
            let nx = model.three_receiver()?.inputs();
            SearchSpace::new(
                PATTERN_THEOREM1,
                &[
                    ("Q", card("Q", nx)?),
                    ("V0", card("V0", nx)?),
                    ("V1", card("V1", nx)?),
                    ("V2", card("V2", nx)?),
                    ("X", nx),
                ],
            )
        }
        BoundId::ReverselyDegraded => {
            let p = model.product()?;
            let names: Vec<(String, String)> = (1..=p.components.len())
                .map(|l| (format!("U{l}"), format!("X{l}")))
                .collect();
            let mut sizes = Vec::new();
            for ((u, x), c) in names.iter().zip(&p.components) {
                sizes.push((u.as_str(), card("U", c.inputs())?));
                sizes.push((x.as_str(), c.inputs()));
            }
            SearchSpace::new(&reversely_degraded_pattern(p.components.len()), &sizes)
        }
    }
}

/// Multi-start search for the maximum of `bound` over its auxiliary pmfs.
/// Inadmissible points are skipped.
pub fn maximize(bound: BoundId, aux: &AuxSpec, model: &ChannelModel, budget: &SearchBudget) -> Result<BoundResult> {
    let space = search_space(bound, aux, model)?;
    let raw = |d: &FactoredDistribution| -> Option<f64> {
        match bound {
            BoundId::Wiretap => wiretap_rate(d, &model.wiretap().ok()?).ok(),
            _ => evaluate(bound, d, model).ok().flatten(),
        }
    };
    let out = maximize_objective(&space, budget, raw)?;
    let value = match bound {
        BoundId::Wiretap => out.value.max(0.0),
        _ => out.value,
    };
    Ok(BoundResult {
        bound,
        value,
        pattern: space.pattern.to_string(),
        argmax: out.argmax,
        budget: *budget,
        restarts: out.restarts,
        best_restart: out.best_restart,
        best_iteration: out.best_iteration,
        evaluations: out.evaluations,
        lower_bound_only: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::prob::{binary_entropy, ConditionalPmf};

    fn bsc_wiretap() -> ChannelModel {
        ChannelModel::Wiretap(
            WiretapChannel::new(ConditionalPmf::bsc(0.1).unwrap(), ConditionalPmf::bsc(0.2).unwrap()).unwrap(),
        )
    }

    fn grid_oracle() -> f64 {
        // I(X;Y) - I(X;Z) over p(x) on a 1e-3 grid; V = X is optimal for degraded channels.
        let h = binary_entropy;
        (0..=1000)
            .map(|k| {
                let p = k as f64 / 1000.0;
                let out = |e: f64| h(p * (1.0 - e) + (1.0 - p) * e) - h(e);
                out(0.1) - out(0.2)
            })
            .fold(f64::MIN, f64::max)
    }

    #[test]
    fn wiretap_reaches_grid_oracle() {
        let aux = AuxSpec {
            v: Some(2),
            ..Default::default()
        };
        let r = maximize(BoundId::Wiretap, &aux, &bsc_wiretap(), &SearchBudget::new(20, 8, 1)).unwrap();
        assert!(r.value >= grid_oracle() - 1e-3);
        let again = evaluate(BoundId::Wiretap, &r.argmax, &bsc_wiretap()).unwrap().unwrap();
        assert!((again - r.value).abs() < 1e-9);
    }

    #[test]
    fn wiretap_clamps_at_zero() {
        let rev = ChannelModel::Wiretap(
            WiretapChannel::new(ConditionalPmf::bsc(0.2).unwrap(), ConditionalPmf::bsc(0.1).unwrap()).unwrap(),
        );
        let r = maximize(
            BoundId::Wiretap,
            &AuxSpec::default(),
            &rev,
            &SearchBudget::new(20, 4, 1),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn reversely_degraded_search_on_erasures() {
        let e = |a, b| ConditionalPmf::erasure(ratio(a, b)).unwrap();
        let p = ProductChannel::new(vec![
            ThreeReceiverChannel::new(e(1, 2), ConditionalPmf::identity(2), e(5, 6)).unwrap(),
            ThreeReceiverChannel::new(ConditionalPmf::identity(2), ConditionalPmf::constant(2), e(1, 2)).unwrap(),
        ])
        .unwrap();
        let aux = AuxSpec {
            u: Some(2),
            ..Default::default()
        };
        let r = maximize(
            BoundId::ReverselyDegraded,
            &aux,
            &ChannelModel::Product(p),
            &SearchBudget::new(20, 8, 4),
        )
        .unwrap();
        assert!(r.value >= 5.0 / 6.0 - 1e-3);
        assert!(r.value <= 5.0 / 6.0 + 1e-9);
    }

    #[test]
    fn aux_spec_defaults_and_zero() {
        let a = AuxSpec::default();
        assert_eq!(a.cardinality("Q", 4).unwrap(), 2);
        assert_eq!(a.cardinality("V0", 4).unwrap(), 5);
        assert_eq!(a.cardinality("V2", 4).unwrap(), 6);
        let z = AuxSpec {
            v: Some(0),
            ..Default::default()
        };
        assert!(z.cardinality("V", 2).is_err());
        assert!(BoundId::parse("theorem1").is_ok());
        assert!(BoundId::parse("nope").is_err());
    }

    #[test]
    fn model_mismatch_is_an_error() {
        assert!(maximize(
            BoundId::CkExtension,
            &AuxSpec::default(),
            &bsc_wiretap(),
            &SearchBudget::default()
        )
        .is_err());
    }
}
