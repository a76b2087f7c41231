//! Multi-start search over factored pmf simplices.
//!
//! Each restart draws every factor row from Dirichlet(1) and then runs a
//! coordinate-wise pattern search that only moves along simplex-preserving
//! directions. Restarts run in parallel; the reduction is max with ties going
//! to the lowest restart index, so results are deterministic for a seed and a
//! larger restart count can never report a smaller value.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, FactorPattern, FactoredDistribution};

/// Grid resolution, restart count and root seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub grid: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl SearchBudget {
    pub fn new(grid: usize, restarts: usize, seed: u64) -> Self {
        SearchBudget { grid, restarts, seed }
    }

    pub fn with_seed(seed: u64) -> Self {
        SearchBudget {
            seed,
            ..Self::default()
        }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            grid: 20,
            restarts: 64,
            seed: 0,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed number `index` of `root`. Every randomized component derives
/// its generators through this function.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    splitmix64(root ^ splitmix64(index))
}

/// A seeded generator for child stream `index` of `root`.
pub fn rng_for(root: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, index))
}

/// One Dirichlet(1) draw of length `k`.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1) + 1e-300).collect();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    w
}

/// A random conditional table of the given shape, every row Dirichlet(1).
pub fn random_table<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ConditionalPmf {
    let data: Vec<f64> = (0..rows).flat_map(|_| random_simplex(rng, cols)).collect();
    ConditionalPmf::new(rows, cols, data).expect("dirichlet rows are stochastic")
}

/// The parametrized set: a factor pattern with concrete alphabet sizes.
#[derive(Clone, Debug)]
pub struct SearchSpace {
    pub pattern: FactorPattern,
    pub sizes: BTreeMap<String, usize>,
    shapes: Vec<(usize, usize)>,
}

impl SearchSpace {
    pub fn new(pattern: &str, sizes: &[(&str, usize)]) -> Result<Self> {
        let pattern = FactorPattern::parse(pattern)?;
        let sizes: BTreeMap<String, usize> = sizes.iter().map(|(n, s)| (n.to_string(), *s)).collect();
        for n in pattern.axis_names() {
            match sizes.get(n) {
                Some(&s) if s >= 1 => {}
                Some(_) => return Err(Error::InvalidParameter(format!("cardinality of {n} must be >= 1"))),
                None => return Err(Error::UnknownAxis(n.to_string())),
            }
        }
        let shapes = pattern.table_shapes(&sizes)?;
        Ok(SearchSpace { pattern, sizes, shapes })
    }

    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.shapes.clone()
    }

    pub fn free_parameters(&self) -> usize {
        self.shapes().iter().map(|(r, c)| r * (c - 1)).sum()
    }

    pub fn build(&self, tables: &[Vec<f64>]) -> FactoredDistribution {
        let tables = tables
            .iter()
            .zip(&self.shapes)
            .map(|(t, &(r, c))| ConditionalPmf::new(r, c, t.clone()).expect("search keeps rows stochastic"))
            .collect();
        self.pattern.build(&self.sizes, tables).expect("shapes match pattern")
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        self.shapes()
            .iter()
            .map(|&(r, c)| (0..r).flat_map(|_| random_simplex(rng, c)).collect())
            .collect()
    }
}

/// Best point found by [`maximize_objective`].
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub value: f64,
    pub argmax: FactoredDistribution,
    pub restarts: usize,
    pub best_restart: usize,
    pub best_iteration: usize,
    pub evaluations: u64,
}

const START_REDRAWS: usize = 50;
const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-6;
const MAX_SWEEPS: usize = 400;
const IMPROVE_EPS: f64 = 1e-15;

struct RestartResult {
    value: f64,
    point: Vec<Vec<f64>>,
    iteration: usize,
    evaluations: u64,
}

/// Maximizes `objective` over the space. `None` from the objective marks an
/// inadmissible point, which is skipped.
pub fn maximize_objective<F>(space: &SearchSpace, budget: &SearchBudget, objective: F) -> Result<SearchOutcome>
where
    F: Fn(&FactoredDistribution) -> Option<f64> + Sync,
{
    if budget.restarts == 0 {
        return Err(Error::InvalidParameter("restart count must be positive".into()));
    }
    let eval = |p: &Vec<Vec<f64>>| objective(&space.build(p)).filter(|v| v.is_finite());

    let mut results: Vec<Option<RestartResult>> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| run_restart(space, budget.seed, r, &eval))
        .collect();

    if space.free_parameters() <= 2 && budget.grid >= 2 {
        results.push(grid_scan(space, budget.grid, &eval));
    }

    let mut best: Option<(usize, RestartResult)> = None;
    let mut evaluations = 0;
    for (i, r) in results.into_iter().enumerate() {
        let Some(r) = r else { continue };
        evaluations += r.evaluations;
        if best.as_ref().is_none_or(|(_, b)| r.value > b.value) {
            best = Some((i, r));
        }
    }
    let (best_restart, best) = best.ok_or(Error::NoAdmissiblePoint)?;
    Ok(SearchOutcome {
        value: best.value,
        argmax: space.build(&best.point),
        restarts: budget.restarts,
        best_restart,
        best_iteration: best.iteration,
        evaluations,
    })
}

fn run_restart<E>(space: &SearchSpace, seed: u64, index: usize, eval: &E) -> Option<RestartResult>
where
    E: Fn(&Vec<Vec<f64>>) -> Option<f64>,
{
    let mut rng = rng_for(seed, index as u64);
    let mut evaluations = 0u64;
    let mut start = None;
    for _ in 0..START_REDRAWS {
        let p = space.random_point(&mut rng);
        evaluations += 1;
        if let Some(v) = eval(&p) {
            start = Some((p, v));
            break;
        }
    }
    let (mut point, mut value) = start?;
    let shapes = space.shapes();
    let mut step = INITIAL_STEP;
    let mut iteration = 0;
    let mut sweeps = 0;
    while step >= MIN_STEP && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut improved = false;
        for (f, &(rows, cols)) in shapes.iter().enumerate() {
            if cols < 2 {
                continue;
            }
            for r in 0..rows {
                for i in 0..cols {
                    for cand in moves(&point[f][r * cols..(r + 1) * cols], i, step) {
                        let mut trial = point.clone();
                        trial[f][r * cols..(r + 1) * cols].copy_from_slice(&cand);
                        evaluations += 1;
                        if let Some(v) = eval(&trial) {
                            if v > value + IMPROVE_EPS {
                                value = v;
                                point = trial;
                                improved = true;
                                iteration = sweeps;
                            }
                        }
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Some(RestartResult {
        value,
        point,
        iteration,
        evaluations,
    })
}

/// Simplex-preserving moves of `row` along vertex `i`.
fn moves(row: &[f64], i: usize, step: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(3);
    let toward: Vec<f64> = row
        .iter()
        .enumerate()
        .map(|(j, &p)| (1.0 - step) * p + if j == i { step } else { 0.0 })
        .collect();
    out.push(toward);
    let t = step.min(row[i]);
    if t > 0.0 && t < 1.0 {
        let away: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                if j == i {
                    ((p - t) / (1.0 - t)).max(0.0)
                } else {
                    p / (1.0 - t)
                }
            })
            .collect();
        out.push(renormalize(away));
    }
    if step == INITIAL_STEP && row[i] < 1.0 {
        let mut vertex = vec![0.0; row.len()];
        vertex[i] = 1.0;
        out.push(vertex);
    }
    out
}

fn renormalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}

/// Exhaustive grid for spaces with at most two free parameters.
fn grid_scan<E>(space: &SearchSpace, grid: usize, eval: &E) -> Option<RestartResult>
where
    E: Fn(&Vec<Vec<f64>>) -> Option<f64>,
{
    let shapes = space.shapes();
    let slots: Vec<(usize, usize)> = shapes
        .iter()
        .enumerate()
        .flat_map(|(f, &(rows, cols))| (0..rows).filter(move |_| cols == 2).map(move |r| (f, r)))
        .collect();
    let base: Vec<Vec<f64>> = shapes
        .iter()
        .map(|&(r, c)| (0..r).flat_map(|_| vec![1.0 / c as f64; c]).collect())
        .collect();
    let levels: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let total = levels.len().pow(slots.len() as u32);
    let mut best: Option<RestartResult> = None;
    let mut evaluations = 0;
    for code in 0..total {
        let mut point = base.clone();
        let mut c = code;
        for &(f, r) in &slots {
            let a = levels[c % levels.len()];
            c /= levels.len();
            point[f][r * 2] = a;
            point[f][r * 2 + 1] = 1.0 - a;
        }
        evaluations += 1;
        if let Some(v) = eval(&point) {
            if best.as_ref().is_none_or(|b| v > b.value) {
                best = Some(RestartResult {
                    value: v,
                    point,
                    iteration: 0,
                    evaluations: 0,
                });
            }
        }
    }
    best.map(|mut b| {
        b.evaluations = evaluations;
        b
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;

    fn binary_space() -> SearchSpace {
        SearchSpace::new("X", &[("X", 2)]).unwrap()
    }

    #[test]
    fn finds_binary_entropy_peak() {
        let out = maximize_objective(&binary_space(), &SearchBudget::new(20, 4, 7), |d| {
            Some(binary_entropy(d.factors()[0].table.get(0, 0)))
        })
        .unwrap();
        assert!((out.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_and_prefix_monotone() {
        let space = SearchSpace::new("U; X|U", &[("U", 2), ("X", 3)]).unwrap();
        let f = |d: &FactoredDistribution| {
            let j = d.joint();
            Some(j.mutual_information(&["U"], &["X"]).unwrap() - 0.3 * j.entropy(&["X"]).unwrap())
        };
        let a = maximize_objective(&space, &SearchBudget::new(20, 8, 3), f).unwrap();
        let b = maximize_objective(&space, &SearchBudget::new(20, 8, 3), f).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        let c = maximize_objective(&space, &SearchBudget::new(20, 16, 3), f).unwrap();
        assert!(c.value >= a.value);
    }

    #[test]
    fn all_inadmissible_is_an_error() {
        let r = maximize_objective(&binary_space(), &SearchBudget::new(20, 2, 1), |_| None);
        assert!(matches!(r, Err(Error::NoAdmissiblePoint)));
    }

    #[test]
    fn moves_stay_on_simplex() {
        let row = [0.2, 0.5, 0.3];
        for i in 0..3 {
            for m in moves(&row, i, 0.5) {
                assert!(m.iter().all(|&x| x >= 0.0));
                assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
