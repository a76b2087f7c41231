//! Robust typicality: `|pi(a) - p(a)| <= epsilon p(a)` for every joint symbol.

use super::TypicalityParams;
use crate::error::{Error, Result};
use crate::prob::JointPmf;

/// Joint typicality test for sequences over a fixed list of axes.
#[derive(Clone, Debug)]
pub struct JointTypicality {
    sizes: Vec<usize>,
    probs: Vec<f64>,
    n: usize,
    /// Largest count allowed per joint symbol.
    upper: Vec<u32>,
    /// Smallest count required per joint symbol.
    lower: Vec<u32>,
}

impl JointTypicality {
    /// The test for `axes` (in that order) under the marginal of `joint`.
    pub fn new(joint: &JointPmf, axes: &[&str], params: &TypicalityParams) -> Result<Self> {
        let m = joint.marginalize(axes)?;
        let sizes: Vec<usize> = m.axes().iter().map(|a| a.size).collect();
        Self::from_table(sizes, m.tensor().to_vec(), params)
    }

    pub fn from_table(sizes: Vec<usize>, probs: Vec<f64>, params: &TypicalityParams) -> Result<Self> {
        if sizes.iter().product::<usize>() != probs.len() {
            return Err(Error::DimensionMismatch(
                "typicality table does not match its axes".into(),
            ));
        }
        let n = params.n as f64;
        let eps = params.epsilon;
        let slack = 1e-9;
        let upper = probs
            .iter()
            .map(|&p| ((1.0 + eps) * p * n + slack).floor().min(n) as u32)
            .collect();
        let lower = probs
            .iter()
            .map(|&p| ((1.0 - eps) * p * n - slack).ceil().max(0.0) as u32)
            .collect();
        Ok(JointTypicality {
            sizes,
            probs,
            n: params.n,
            upper,
            lower,
        })
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// A scratch buffer sized for [`Self::is_typical_with`].
    pub fn scratch(&self) -> Vec<u32> {
        vec![0; self.probs.len()]
    }

    pub fn is_typical(&self, seqs: &[&[u8]]) -> bool {
        self.is_typical_with(seqs, &mut self.scratch())
    }

    /// Same as [`Self::is_typical`] but reuses `counts`, which must come from
    /// [`Self::scratch`]. The buffer is left zeroed.
    pub fn is_typical_with(&self, seqs: &[&[u8]], counts: &mut [u32]) -> bool {
        debug_assert_eq!(seqs.len(), self.sizes.len());
        debug_assert!(seqs.iter().all(|s| s.len() == self.n));
        let mut ok = true;
        let mut touched = 0;
        for i in 0..self.n {
            let mut idx = 0;
            for (s, &k) in seqs.iter().zip(&self.sizes) {
                idx = idx * k + s[i] as usize;
            }
            counts[idx] += 1;
            touched = i + 1;
            if counts[idx] > self.upper[idx] {
                ok = false;
                break;
            }
        }
        if ok {
            ok = counts.iter().zip(&self.lower).all(|(c, l)| c >= l);
        }
        // Undo only the symbols we counted.
        for i in 0..touched {
            let mut idx = 0;
            for (s, &k) in seqs.iter().zip(&self.sizes) {
                idx = idx * k + s[i] as usize;
            }
            counts[idx] = 0;
        }
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, eps: f64) -> TypicalityParams {
        TypicalityParams::new(n, eps).unwrap()
    }

    #[test]
    fn uniform_bit_at_small_epsilon() {
        let t = JointTypicality::from_table(vec![2], vec![0.5, 0.5], &params(4, 0.1)).unwrap();
        assert!(t.is_typical(&[&[0, 1, 1, 0]]));
        assert!(!t.is_typical(&[&[0, 1, 1, 1]]));
    }

    #[test]
    fn zero_probability_symbols_are_never_typical() {
        let t = JointTypicality::from_table(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5], &params(2, 5.0)).unwrap();
        assert!(t.is_typical(&[&[0, 1], &[0, 1]]));
        assert!(!t.is_typical(&[&[0, 1], &[1, 1]]));
    }

    #[test]
    fn large_epsilon_only_checks_support_and_upper_bound() {
        let t = JointTypicality::from_table(vec![2], vec![0.25, 0.75], &params(4, 1.0)).unwrap();
        assert!(t.is_typical(&[&[1, 1, 1, 1]]));
        assert!(t.is_typical(&[&[0, 0, 1, 1]]));
        assert!(!t.is_typical(&[&[0, 0, 0, 1]]));
    }

    #[test]
    fn scratch_is_reset() {
        let t = JointTypicality::from_table(vec![2], vec![0.5, 0.5], &params(4, 0.1)).unwrap();
        let mut s = t.scratch();
        assert!(!t.is_typical_with(&[&[1, 1, 1, 1]], &mut s));
        assert!(s.iter().all(|&c| c == 0));
        assert!(t.is_typical_with(&[&[1, 0, 1, 0]], &mut s));
        assert!(s.iter().all(|&c| c == 0));
    }
}
