//! Shipped derivations: a raw constraint system, an optional rate-splitting
//! step and the expected region.

use super::parse::parse_relation;
use super::{
    parse_mapping, parse_system, project, region_equal, remove_redundant, substitute_rate_split, ComparisonMode,
    InequalitySystem, LinExpr, RegionComparison,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub system: &'static str,
    pub split: Option<&'static str>,
    pub expected: &'static str,
    pub mode: ComparisonMode,
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        name: "theorem1",
        description: "one confidential message, two legitimate receivers, Marton coding",
        system: include_str!("../../fixtures/theorem1.fme"),
        split: None,
        expected: include_str!("../../fixtures/theorem1.expected"),
        mode: ComparisonMode::Exact,
    },
    Fixture {
        name: "theorem2-stage1",
        description: "common and confidential messages, before rate splitting",
        system: include_str!("../../fixtures/theorem2.fme"),
        split: None,
        expected: include_str!("../../fixtures/theorem2_stage1.expected"),
        mode: ComparisonMode::Exact,
    },
    Fixture {
        name: "theorem2",
        description: "common and confidential messages, with rate splitting",
        system: include_str!("../../fixtures/theorem2.fme"),
        split: Some(include_str!("../../fixtures/theorem2.split")),
        expected: include_str!("../../fixtures/theorem2.expected"),
        mode: ComparisonMode::Exact,
    },
    Fixture {
        name: "prop2-case1",
        description: "multilevel channel, Case 1 of the achievability proof",
        system: include_str!("../../fixtures/prop2_case1.fme"),
        split: None,
        expected: include_str!("../../fixtures/prop2_case1.expected"),
        mode: ComparisonMode::Closure,
    },
    Fixture {
        name: "prop2-case2",
        description: "multilevel channel, Case 2, achieved face Re3 = d2",
        system: include_str!("../../fixtures/prop2_case2.fme"),
        split: None,
        expected: include_str!("../../fixtures/prop2_case2.expected"),
        mode: ComparisonMode::Closure,
    },
    Fixture {
        name: "prop2-case3",
        description: "multilevel channel, Case 3, achieved face Re3 = d3",
        system: include_str!("../../fixtures/prop2_case3.fme"),
        split: None,
        expected: include_str!("../../fixtures/prop2_case3.expected"),
        mode: ComparisonMode::Closure,
    },
    Fixture {
        name: "prop2-case4a",
        description: "multilevel channel, Case 4 with d2 <= d3",
        system: include_str!("../../fixtures/prop2_case4a.fme"),
        split: None,
        expected: include_str!("../../fixtures/prop2_case4a.expected"),
        mode: ComparisonMode::Closure,
    },
    Fixture {
        name: "prop2-case4b",
        description: "multilevel channel, Case 4 with d2 >= d3, achieved face Re3 = d3",
        system: include_str!("../../fixtures/prop2_case4b.fme"),
        split: None,
        expected: include_str!("../../fixtures/prop2_case4b.expected"),
        mode: ComparisonMode::Closure,
    },
];

pub fn fixture(name: &str) -> Result<&'static Fixture> {
    FIXTURES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownName(format!("fixture `{name}`")))
}

/// A substitution step applied to an already projected region.
#[derive(Clone, Debug, Default)]
pub struct SplitStep {
    pub mapping: Vec<(String, LinExpr)>,
    pub eliminate: Vec<String>,
    pub rename: Vec<(String, LinExpr)>,
    pub rows: Vec<(usize, String)>,
}

/// Parses `map A -> expr`, `rename A -> B`, `eliminate: ...` and extra rows.
pub fn parse_split(text: &str) -> Result<SplitStep> {
    let mut step = SplitStep::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let one = |rest: &str| -> Result<(String, LinExpr)> {
            let (from, _) = rest
                .split_once("->")
                .ok_or_else(|| Error::parse(line, "expected `NAME -> EXPR`"))?;
            let from = from.trim();
            let mut m = parse_mapping(rest, &[from]).map_err(|e| Error::parse(line, e.to_string()))?;
            Ok(m.remove(0))
        };
        if let Some(rest) = body.strip_prefix("map ") {
            step.mapping.push(one(rest)?);
        } else if let Some(rest) = body.strip_prefix("rename ") {
            step.rename.push(one(rest)?);
        } else if let Some(rest) = body.strip_prefix("eliminate:") {
            step.eliminate = rest
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
        } else {
            step.rows.push((line, body.to_string()));
        }
    }
    Ok(step)
}

/// Substitutes, adds the extra rows, eliminates and renames.
pub fn apply_split(sys: &InequalitySystem, step: &SplitStep) -> Result<InequalitySystem> {
    let mut cur = substitute_rate_split(sys, &step.mapping, &[])?;
    for (from, _) in &step.rename {
        if !cur.variables.contains(from) {
            cur.variables.push(from.clone());
        }
    }
    for (line, row) in &step.rows {
        for r in parse_relation(row, *line, &cur.variables)? {
            cur.push(r)?;
        }
    }
    cur.eliminate = step.eliminate.clone();
    let cur = project(&cur, None)?;
    substitute_rate_split(&cur, &step.rename, &[])
}

#[derive(Clone, Debug)]
pub struct FixtureRun {
    pub name: &'static str,
    /// Output of elimination (and splitting) before the redundancy check.
    pub derived: InequalitySystem,
    pub reduced: InequalitySystem,
    pub expected: InequalitySystem,
    pub comparison: RegionComparison,
}

pub fn run_fixture(f: &'static Fixture) -> Result<FixtureRun> {
    let sys = parse_system(f.system)?;
    let mut derived = project(&sys, None)?;
    if let Some(split) = f.split {
        let reduced = remove_redundant(&derived, &[])?;
        derived = apply_split(&reduced, &parse_split(split)?)?;
    }
    let reduced = remove_redundant(&derived, &[])?;
    let expected = parse_system(f.expected)?;
    let comparison = region_equal(&reduced, &expected, &[], f.mode)?;
    Ok(FixtureRun {
        name: f.name,
        derived,
        reduced,
        expected,
        comparison,
    })
}
