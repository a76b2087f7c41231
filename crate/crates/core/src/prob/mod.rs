//! Finite-alphabet probability objects and the information measures every
//! rate expression is built from. All logarithms are base 2.

mod factored;
mod joint;

pub use factored::{Factor, FactorPattern, FactoredDistribution};
pub use joint::{Axis, JointPmf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use num_traits::{One, Signed, Zero};

/// Tolerance for probability-vector validation.
pub const PMF_TOL: f64 = 1e-12;

/// `-sum p log2 p` over raw probabilities with `0 log 0 = 0`. No validation.
pub fn entropy_of(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Binary entropy function `H(p, 1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// Entropy in bits of a validated pmf.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(&p.probs)
}

fn check_probs(probs: &[f64], what: &dyn std::fmt::Display) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf(format!("{what}: empty alphabet")));
    }
    let mut sum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidPmf(format!("{what}: entry {i} is {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PMF_TOL * probs.len().max(1) as f64 {
        return Err(Error::InvalidPmf(format!("{what}: entries sum to {sum}")));
    }
    Ok(())
}

/// A probability vector over `{0, .., len-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, &"pmf")?;
        Ok(Pmf { probs })
    }

    /// Rescales non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidPmf(format!("cannot normalize {weights:?}")));
        }
        Pmf::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(size: usize) -> Self {
        assert!(size > 0, "uniform pmf needs a non-empty alphabet");
        Pmf {
            probs: vec![1.0 / size as f64; size],
        }
    }

    pub fn point(size: usize, at: usize) -> Self {
        assert!(at < size);
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Pmf { probs }
    }

    /// `[p0, 1 - p0]`.
    pub fn binary(p0: f64) -> Result<Self> {
        Pmf::new(vec![p0, 1.0 - p0])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    /// As a one-row conditional table (a factor with no parents).
    pub fn as_conditional(&self) -> ConditionalPmf {
        ConditionalPmf {
            rows: 1,
            cols: self.probs.len(),
            data: self.probs.clone(),
            exact: None,
        }
    }
}

/// A row-stochastic matrix `p(out | in)`; optionally carries the exact
/// rational entries it was parsed from.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionalPmf {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    #[serde(skip)]
    exact: Option<Vec<Rational>>,
}

impl PartialEq for ConditionalPmf {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data && self.exact == other.exact
    }
}

impl ConditionalPmf {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} table with {} entries",
                data.len()
            )));
        }
        for r in 0..rows {
            check_probs(&data[r * cols..(r + 1) * cols], &format_args!("row {r}"))?;
        }
        Ok(ConditionalPmf {
            rows,
            cols,
            data,
            exact: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        ConditionalPmf::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Builds from exact rationals; rows must sum to exactly one.
    pub fn from_exact_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged or empty rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(Signed::is_negative) {
                return Err(Error::InvalidPmf(format!("row {i} has a negative entry")));
            }
            let sum: Rational = row.iter().cloned().sum();
            if !sum.is_one() {
                return Err(Error::InvalidPmf(format!(
                    "row {i} sums to {}",
                    exact::format_rational(&sum)
                )));
            }
        }
        let exact: Vec<Rational> = rows.into_iter().flatten().collect();
        let data = exact.iter().map(exact::to_f64).collect();
        Ok(ConditionalPmf {
            rows: r,
            cols: c,
            data,
            exact: Some(exact),
        })
    }

    pub fn identity(size: usize) -> Self {
        let mut exact = vec![Rational::zero(); size * size];
        for i in 0..size {
            exact[i * size + i] = Rational::one();
        }
        Self::from_exact_flat(size, size, exact)
    }

    /// Deterministic map `out = f(in)`.
    pub fn deterministic(inputs: usize, outputs: usize, f: impl Fn(usize) -> usize) -> Self {
        let mut exact = vec![Rational::zero(); inputs * outputs];
        for i in 0..inputs {
            let o = f(i);
            assert!(o < outputs, "deterministic map out of range");
            exact[i * outputs + o] = Rational::one();
        }
        Self::from_exact_flat(inputs, outputs, exact)
    }

    /// A channel whose output carries no information (single output symbol).
    pub fn constant(inputs: usize) -> Self {
        Self::deterministic(inputs, 1, |_| 0)
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        ConditionalPmf::from_rows(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Exact binary symmetric channel.
    pub fn bsc_exact(p: Rational) -> Result<Self> {
        let q = Rational::one() - &p;
        ConditionalPmf::from_exact_rows(vec![vec![q.clone(), p.clone()], vec![p, q]])
    }

    /// Binary erasure channel with outputs ordered `{0, E, 1}`.
    pub fn erasure(e: Rational) -> Result<Self> {
        let keep = Rational::one() - &e;
        ConditionalPmf::from_exact_rows(vec![
            vec![keep.clone(), e.clone(), Rational::zero()],
            vec![Rational::zero(), e, keep],
        ])
    }

    /// Erases a non-erased symbol of `{0, E, 1}` with probability `e`; `E` stays `E`.
    pub fn erase_further(e: Rational) -> Result<Self> {
        let keep = Rational::one() - &e;
        ConditionalPmf::from_exact_rows(vec![
            vec![keep.clone(), e.clone(), Rational::zero()],
            vec![Rational::zero(), Rational::one(), Rational::zero()],
            vec![Rational::zero(), e, keep],
        ])
    }

    fn from_exact_flat(rows: usize, cols: usize, exact: Vec<Rational>) -> Self {
        let data = exact.iter().map(exact::to_f64).collect();
        ConditionalPmf {
            rows,
            cols,
            data,
            exact: Some(exact),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn exact_get(&self, r: usize, c: usize) -> Option<&Rational> {
        self.exact.as_ref().map(|e| &e[r * self.cols + c])
    }

    /// Output distribution for an input pmf.
    pub fn output_pmf(&self, input: &Pmf) -> Result<Pmf> {
        if input.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "input pmf of size {} for a channel with {} inputs",
                input.len(),
                self.rows
            )));
        }
        let mut out = vec![0.0; self.cols];
        for (r, &p) in input.probs().iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += p * self.get(r, c);
            }
        }
        Pmf::normalized(out)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &ConditionalPmf) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Composition `in -> f -> g -> out`, i.e. the matrix product `f * g`.
pub fn cascade(f: &ConditionalPmf, g: &ConditionalPmf) -> Result<ConditionalPmf> {
    if f.cols != g.rows {
        return Err(Error::DimensionMismatch(format!(
            "cascade of {}x{} with {}x{}",
            f.rows, f.cols, g.rows, g.cols
        )));
    }
    if let (Some(fe), Some(ge)) = (&f.exact, &g.exact) {
        let mut out = vec![Rational::zero(); f.rows * g.cols];
        for r in 0..f.rows {
            for k in 0..f.cols {
                let a = &fe[r * f.cols + k];
                if a.is_zero() {
                    continue;
                }
                for c in 0..g.cols {
                    out[r * g.cols + c] += a * &ge[k * g.cols + c];
                }
            }
        }
        return Ok(ConditionalPmf::from_exact_flat(f.rows, g.cols, out));
    }
    let mut data = vec![0.0; f.rows * g.cols];
    for r in 0..f.rows {
        for k in 0..f.cols {
            let a = f.get(r, k);
            if a == 0.0 {
                continue;
            }
            for c in 0..g.cols {
                data[r * g.cols + c] += a * g.get(k, c);
            }
        }
    }
    Ok(ConditionalPmf {
        rows: f.rows,
        cols: g.cols,
        data,
        exact: None,
    })
}

/// Memoryless product of component channels. Input and output indices are
/// mixed-radix with the first component most significant.
pub fn product_channel(components: &[ConditionalPmf]) -> Result<ConditionalPmf> {
    let (first, rest) = components
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("product of zero channels".into()))?;
    let mut acc = first.clone();
    for c in rest {
        acc = kron(&acc, c);
    }
    Ok(acc)
}

fn kron(a: &ConditionalPmf, b: &ConditionalPmf) -> ConditionalPmf {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let index = |ra: usize, rb: usize, ca: usize, cb: usize| (ra * b.rows + rb) * cols + ca * b.cols + cb;
    if let (Some(ae), Some(be)) = (&a.exact, &b.exact) {
        let mut out = vec![Rational::zero(); rows * cols];
        for ra in 0..a.rows {
            for rb in 0..b.rows {
                for ca in 0..a.cols {
                    for cb in 0..b.cols {
                        out[index(ra, rb, ca, cb)] = &ae[ra * a.cols + ca] * &be[rb * b.cols + cb];
                    }
                }
            }
        }
        return ConditionalPmf::from_exact_flat(rows, cols, out);
    }
    let mut data = vec![0.0; rows * cols];
    for ra in 0..a.rows {
        for rb in 0..b.rows {
            for ca in 0..a.cols {
                for cb in 0..b.cols {
                    data[index(ra, rb, ca, cb)] = a.get(ra, ca) * b.get(rb, cb);
                }
            }
        }
    }
    ConditionalPmf {
        rows,
        cols,
        data,
        exact: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_examples() {
        assert!(close(entropy(&Pmf::uniform(2)), 1.0, 1e-15));
        assert_eq!(entropy(&Pmf::new(vec![1.0, 0.0, 0.0]).unwrap()), 0.0);
        // H(ap, 1-p, (1-a)p) at a = 1/3, p = 1/2.
        let (a, p) = (1.0 / 3.0, 0.5);
        let h = entropy(&Pmf::new(vec![a * p, 1.0 - p, (1.0 - a) * p]).unwrap());
        assert!(close(h, 1.459_147_917_027_245, 1e-12), "{h}");
        assert!(close(h, binary_entropy(p) + p * binary_entropy(a), 1e-12));
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.6]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        assert!(Pmf::new(vec![f64::NAN, 1.0]).is_err());
        assert!(ConditionalPmf::from_rows(vec![vec![0.5, 0.5], vec![0.2, 0.7]]).is_err());
        assert!(ConditionalPmf::from_exact_rows(vec![vec![ratio(1, 3), ratio(1, 3)]]).is_err());
    }

    #[test]
    fn cascade_examples() {
        let f = ConditionalPmf::bsc(0.1).unwrap();
        let id = ConditionalPmf::identity(2);
        assert!(cascade(&f, &id).unwrap().max_abs_diff(&f) < 1e-15);

        let g = ConditionalPmf::bsc(1.0 / 8.0).unwrap();
        let fg = cascade(&f, &g).unwrap();
        assert!(fg.max_abs_diff(&ConditionalPmf::bsc(0.2).unwrap()) < 1e-15);

        let e = cascade(
            &ConditionalPmf::erasure(ratio(1, 2)).unwrap(),
            &ConditionalPmf::erase_further(ratio(2, 3)).unwrap(),
        )
        .unwrap();
        assert_eq!(e, ConditionalPmf::erasure(ratio(5, 6)).unwrap());

        assert!(matches!(
            cascade(&f, &ConditionalPmf::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn product_examples() {
        let f = ConditionalPmf::bsc(0.3).unwrap();
        assert_eq!(product_channel(std::slice::from_ref(&f)).unwrap(), f);
        let p = product_channel(&[ConditionalPmf::identity(2), ConditionalPmf::identity(3)]).unwrap();
        assert_eq!(p, ConditionalPmf::identity(6));
        assert!(product_channel(&[]).is_err());
    }
}
