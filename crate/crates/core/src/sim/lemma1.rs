//! How many of `2^(nS)` conditionally independent `V^n` sequences are jointly
//! typical with a `(U^n, Z^n)` pair, against the threshold
//! `(1 + delta1) 2^(n (S - I(V;Z|U) + delta))`.

use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::{conditional_table, samplers};
use super::typical::JointTypicality;
use super::{cap_check, Caps, Quantization, TypicalityParams};
use crate::error::Result;
use crate::prob::JointPmf;
use crate::search::rng_for;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Stats {
    pub n: usize,
    pub s: f64,
    pub index_bits: u32,
    /// `I(V;Z|U)` in bits.
    pub i_vz_u: f64,
    pub threshold: f64,
    /// Whether `S > I(V;Z|U) + delta`.
    pub in_regime: bool,
    pub trials: usize,
    /// Fraction of trials with a count above the threshold.
    pub exceedance: f64,
    pub mean_count: f64,
    /// Fraction of trials where the transmitted index itself was typical.
    pub true_index_typical: f64,
    /// Per-trial counts, in trial order.
    pub counts: Vec<u64>,
}

impl Lemma1Stats {
    /// Exceedance frequency of an arbitrary threshold on the same trials.
    pub fn exceedance_at(&self, threshold: f64) -> f64 {
        self.counts.iter().filter(|&&c| c as f64 > threshold).count() as f64 / self.trials.max(1) as f64
    }
}

/// Runs the experiment on `dist` over axes `U`, `V`, `Z`. Trial `t` uses
/// child stream `t` of `seed`.
pub fn lemma1_experiment(
    dist: &JointPmf,
    s: f64,
    params: &TypicalityParams,
    trials: usize,
    seed: u64,
    caps: &Caps,
) -> Result<Lemma1Stats> {
    let n = params.n;
    let bits = Quantization::Ceil.bits(n, s)?;
    cap_check(
        "covering sequences",
        (1u128 << bits) * n as u128,
        caps.max_sequences as u128 * 16,
        "lower S or the blocklength",
    )?;
    let i_vz_u = dist.conditional_mutual_information(&["V"], &["Z"], &["U"])?;
    let threshold = (1.0 + params.delta1) * (n as f64 * (s - i_vz_u + params.delta)).exp2();
    let typ = JointTypicality::new(dist, &["U", "V", "Z"], params)?;
    let p_u = samplers(&conditional_table(dist, &[], &["U"])?);
    let p_v = samplers(&conditional_table(dist, &["U"], &["V"])?);
    let p_z = samplers(&conditional_table(dist, &["U", "V"], &["Z"])?);
    let nv = dist.size_of("V")?;

    let results: Vec<(u64, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t as u64);
            let u: Vec<u8> = (0..n).map(|_| p_u[0].sample(&mut rng) as u8).collect();
            let vs: Vec<Vec<u8>> = (0..1usize << bits)
                .map(|_| (0..n).map(|i| p_v[u[i] as usize].sample(&mut rng) as u8).collect())
                .collect();
            let l = rng.random_range(0..vs.len());
            let z: Vec<u8> = (0..n)
                .map(|i| p_z[u[i] as usize * nv + vs[l][i] as usize].sample(&mut rng) as u8)
                .collect();
            let mut scratch = typ.scratch();
            let mut count = 0u64;
            let mut own = false;
            for (j, v) in vs.iter().enumerate() {
                if typ.is_typical_with(&[&u, v, &z], &mut scratch) {
                    count += 1;
                    own |= j == l;
                }
            }
            (count, own)
        })
        .collect();
    let counts: Vec<u64> = results.iter().map(|r| r.0).collect();
    let k = trials.max(1) as f64;
    let mut stats = Lemma1Stats {
        n,
        s,
        index_bits: bits,
        i_vz_u,
        threshold,
        in_regime: s > i_vz_u + params.delta,
        trials,
        exceedance: 0.0,
        mean_count: counts.iter().sum::<u64>() as f64 / k,
        true_index_typical: results.iter().filter(|r| r.1).count() as f64 / k,
        counts,
    };
    stats.exceedance = stats.exceedance_at(threshold);
    Ok(stats)
}
