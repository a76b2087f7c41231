use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{Axis, ConditionalPmf, JointPmf};
use crate::error::{Error, Result};

/// One factor `p(targets | given)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Factor {
    pub targets: Vec<Axis>,
    pub given: Vec<String>,
    pub table: ConditionalPmf,
}

impl Factor {
    pub fn new(targets: Vec<Axis>, given: &[&str], table: ConditionalPmf) -> Self {
        Factor {
            targets,
            given: given.iter().map(|s| s.to_string()).collect(),
            table,
        }
    }
}

/// The shape of a factorization: an ordered list of (targets, given) name sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorPattern {
    pub factors: Vec<(Vec<String>, Vec<String>)>,
}

impl FactorPattern {
    /// Parses `"Q,V0; V1,V2|V0; X|V0,V1,V2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut factors = Vec::new();
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (t, g) = part.split_once('|').unwrap_or((part, ""));
            let names = |s: &str| -> Vec<String> {
                s.split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(String::from)
                    .collect()
            };
            let targets = names(t);
            if targets.is_empty() {
                return Err(Error::PatternMismatch(format!("factor `{part}` has no targets")));
            }
            factors.push((targets, names(g)));
        }
        if factors.is_empty() {
            return Err(Error::PatternMismatch("empty pattern".into()));
        }
        Ok(FactorPattern { factors })
    }

    /// Every axis name in introduction order.
    pub fn axis_names(&self) -> Vec<&str> {
        self.factors
            .iter()
            .flat_map(|(t, _)| t.iter().map(String::as_str))
            .collect()
    }

    /// `(rows, cols)` of each factor table for the given alphabet sizes.
    pub fn table_shapes(&self, sizes: &BTreeMap<String, usize>) -> Result<Vec<(usize, usize)>> {
        let size = |n: &String| sizes.get(n).copied().ok_or_else(|| Error::UnknownAxis(n.clone()));
        self.factors
            .iter()
            .map(|(t, g)| {
                let rows = g.iter().map(size).product::<Result<usize>>()?;
                let cols = t.iter().map(size).product::<Result<usize>>()?;
                Ok((rows, cols))
            })
            .collect()
    }

    /// Instantiates the pattern with one table per factor.
    pub fn build(&self, sizes: &BTreeMap<String, usize>, tables: Vec<ConditionalPmf>) -> Result<FactoredDistribution> {
        if tables.len() != self.factors.len() {
            return Err(Error::PatternMismatch(format!(
                "{} tables for {} factors",
                tables.len(),
                self.factors.len()
            )));
        }
        let mut factors = Vec::with_capacity(tables.len());
        for ((t, g), table) in self.factors.iter().zip(tables) {
            let targets = t
                .iter()
                .map(|n| {
                    sizes
                        .get(n)
                        .map(|&s| Axis::new(n.clone(), s))
                        .ok_or_else(|| Error::UnknownAxis(n.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            factors.push(Factor {
                targets,
                given: g.clone(),
                table,
            });
        }
        FactoredDistribution::new(factors)
    }
}

impl fmt::Display for FactorPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, g) in &self.factors {
            if g.is_empty() {
                write!(f, "p({})", t.join(","))?;
            } else {
                write!(f, "p({}|{})", t.join(","), g.join(","))?;
            }
        }
        Ok(())
    }
}

/// A chain of factors together with the joint pmf they realize.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactoredDistribution {
    factors: Vec<Factor>,
    #[serde(skip)]
    joint: JointPmf,
}

impl FactoredDistribution {
    /// Each factor may only condition on axes introduced by earlier factors.
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut joint = JointPmf::unit();
        for f in &factors {
            let given: Vec<&str> = f.given.iter().map(String::as_str).collect();
            joint = joint.extend(&given, &f.targets, &f.table)?;
        }
        Ok(FactoredDistribution { factors, joint })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn into_joint(self) -> JointPmf {
        self.joint
    }

    pub fn pattern(&self) -> FactorPattern {
        FactorPattern {
            factors: self
                .factors
                .iter()
                .map(|f| (f.targets.iter().map(|a| a.name.clone()).collect(), f.given.clone()))
                .collect(),
        }
    }

    /// Checks that the factor structure matches `expected`, comparing each
    /// factor's target and conditioning sets without regard to order.
    pub fn check_pattern(&self, expected: &FactorPattern) -> Result<()> {
        let actual = self.pattern();
        let sorted = |v: &[String]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        let same = actual.factors.len() == expected.factors.len()
            && actual
                .factors
                .iter()
                .zip(&expected.factors)
                .all(|((at, ag), (et, eg))| sorted(at) == sorted(et) && sorted(ag) == sorted(eg));
        if same {
            Ok(())
        } else {
            Err(Error::PatternMismatch(format!("expected {expected}, found {actual}")))
        }
    }

    /// Largest deviation between the stored joint and the product of factor
    /// entries recomputed index by index.
    pub fn reconstruction_error(&self) -> f64 {
        let axes = self.joint.axes();
        let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let pos = |name: &str| axes.iter().position(|a| a.name == name).expect("axis");
        let layout: Vec<(Vec<usize>, Vec<usize>)> = self
            .factors
            .iter()
            .map(|f| {
                (
                    f.given.iter().map(|n| pos(n)).collect(),
                    f.targets.iter().map(|a| pos(&a.name)).collect(),
                )
            })
            .collect();
        let radix = |digits: &[usize], which: &[usize]| which.iter().fold(0usize, |acc, &i| acc * sizes[i] + digits[i]);
        let mut digits = vec![0usize; sizes.len()];
        let mut worst = 0.0f64;
        for &p in self.joint.tensor() {
            let mut prod = 1.0;
            for (f, (g, t)) in self.factors.iter().zip(&layout) {
                prod *= f.table.get(radix(&digits, g), radix(&digits, t));
            }
            worst = worst.max((prod - p).abs());
            let mut a = sizes.len();
            while a > 0 {
                a -= 1;
                digits[a] += 1;
                if digits[a] < sizes[a] {
                    break;
                }
                digits[a] = 0;
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Pmf;

    fn sizes(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|(n, s)| (n.to_string(), *s)).collect()
    }

    #[test]
    fn pattern_round_trip_and_build() {
        let p = FactorPattern::parse("Q; V|Q; X|V").unwrap();
        assert_eq!(p.to_string(), "p(Q)p(V|Q)p(X|V)");
        let sz = sizes(&[("Q", 2), ("V", 3), ("X", 2)]);
        assert_eq!(p.table_shapes(&sz).unwrap(), vec![(1, 2), (2, 3), (3, 2)]);
        let d = p
            .build(
                &sz,
                vec![
                    Pmf::new(vec![0.3, 0.7]).unwrap().as_conditional(),
                    ConditionalPmf::from_rows(vec![vec![0.2, 0.3, 0.5], vec![1.0, 0.0, 0.0]]).unwrap(),
                    ConditionalPmf::from_rows(vec![vec![0.1, 0.9], vec![0.5, 0.5], vec![1.0, 0.0]]).unwrap(),
                ],
            )
            .unwrap();
        assert!(d.reconstruction_error() < 1e-12);
        d.check_pattern(&p).unwrap();
        assert!(d
            .check_pattern(&FactorPattern::parse("Q; V|Q; X|V,Q").unwrap())
            .is_err());
    }

    #[test]
    fn conditioning_on_later_axis_is_rejected() {
        let f = vec![Factor::new(
            vec![Axis::new("X", 2)],
            &["V"],
            ConditionalPmf::identity(2),
        )];
        assert!(matches!(FactoredDistribution::new(f), Err(Error::UnknownAxis(_))));
    }

    #[test]
    fn multi_target_factor() {
        let p = FactorPattern::parse("V0; V1,V2|V0").unwrap();
        let sz = sizes(&[("V0", 2), ("V1", 2), ("V2", 3)]);
        let table = ConditionalPmf::from_rows(vec![vec![1.0 / 6.0; 6], vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.5]]).unwrap();
        let d = p.build(&sz, vec![Pmf::uniform(2).as_conditional(), table]).unwrap();
        assert!(d.reconstruction_error() < 1e-12);
        let m = d.joint().marginalize(&["V2"]).unwrap();
        let want = [0.5 / 3.0 + 0.25, 0.5 / 3.0, 0.5 / 3.0 + 0.25];
        for (a, b) in m.tensor().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
