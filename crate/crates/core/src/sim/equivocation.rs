//! Equivocation `H(M|Z^n)` by exact marginalization over the encoder's
//! randomness, with a Monte Carlo estimate for codes past the caps.

use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::{encode_with, samplers, Codebook};
use super::{cap_check, Caps};
use crate::error::{Error, Result};
use crate::prob::{cascade, ConditionalPmf};
use crate::search::rng_for;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equivocation {
    pub n: usize,
    /// `H(M)` in bits (messages are uniform).
    pub h_m: f64,
    pub h_m_given_z: f64,
    pub leakage: f64,
}

impl Equivocation {
    pub fn equivocation_rate(&self) -> f64 {
        self.h_m_given_z / self.n as f64
    }

    pub fn leakage_rate(&self) -> f64 {
        self.leakage / self.n as f64
    }
}

/// Flattened encoder outcomes: per leaf its message and the rows of the
/// effective channel `composite -> z` it uses at each time.
struct Leaves {
    messages: usize,
    per_message: usize,
    /// `message * per_message + j` -> composite sequence.
    seqs: Vec<Vec<usize>>,
}

fn collect_leaves(cb: &Codebook) -> Result<Leaves> {
    let mut seqs = Vec::new();
    let mut per_message = 0;
    for m in 0..cb.messages() {
        let leaves = cb.leaves(m)?;
        per_message = leaves.len();
        seqs.extend(leaves.iter().map(|l| cb.composite(l)));
    }
    Ok(Leaves {
        messages: cb.messages(),
        per_message,
        seqs,
    })
}

fn effective_channel(cb: &Codebook, z: &ConditionalPmf) -> Result<ConditionalPmf> {
    if z.rows() != cb.input.cols() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} inputs, X has {} symbols",
            z.rows(),
            cb.input.cols()
        )));
    }
    cascade(&cb.input, z)
}

/// Exact `H(M|Z^n)` and `I(M;Z^n)` for a uniform message, marginalizing
/// `p(z^n|m)` over the uniform bin and satellite choices and the symbol-wise
/// input sampling. The two quantities are accumulated separately.
pub fn exact_equivocation(cb: &Codebook, z: &ConditionalPmf, caps: &Caps) -> Result<Equivocation> {
    let w = effective_channel(cb, z)?;
    let nz = w.cols();
    let bits = cb.n as f64 * (nz as f64).log2();
    if bits > caps.max_output_bits + 1e-9 {
        return Err(Error::CapExceeded {
            what: "output space (bits)".into(),
            size: bits.ceil() as u128,
            cap: caps.max_output_bits.floor() as u128,
            hint: "use the Monte Carlo leakage estimate".into(),
        });
    }
    let total_leaves = (cb.messages() as u128) * (cb.leaves(0)?.len() as u128);
    cap_check(
        "encoder outcomes",
        total_leaves,
        caps.max_leaves as u128,
        "use the Monte Carlo leakage estimate",
    )?;
    let leaves = collect_leaves(cb)?;
    let n = cb.n;
    let weight = 1.0 / (leaves.messages * leaves.per_message) as f64;
    let p_m = 1.0 / leaves.messages as f64;

    // Split the output space on a prefix of `depth` symbols for parallelism.
    let mut depth = 0;
    while depth < n && nz.pow(depth as u32) < 256 {
        depth += 1;
    }
    let prefixes = nz.pow(depth as u32);
    let parts: Vec<(f64, f64)> = (0..prefixes)
        .into_par_iter()
        .map(|prefix| {
            let mut prefix_z = vec![0usize; depth];
            let mut r = prefix;
            for i in (0..depth).rev() {
                prefix_z[i] = r % nz;
                r /= nz;
            }
            let mut level: Vec<f64> = leaves
                .seqs
                .iter()
                .map(|s| (0..depth).map(|i| w.get(s[i], prefix_z[i])).product::<f64>() * weight)
                .collect();
            let mut acc = (0.0, 0.0);
            let mut joint = vec![0.0; leaves.messages];
            walk(&leaves, &w, depth, n, &mut level, &mut joint, p_m, &mut acc);
            acc
        })
        .collect();
    let (h_cond, info) = parts.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(Equivocation {
        n,
        h_m: cb.message_bits as f64,
        h_m_given_z: h_cond,
        leakage: info,
    })
}

#[allow(clippy::too_many_arguments)]
fn walk(
    leaves: &Leaves,
    w: &ConditionalPmf,
    pos: usize,
    n: usize,
    level: &mut [f64],
    joint: &mut [f64],
    p_m: f64,
    acc: &mut (f64, f64),
) {
    if level.iter().all(|&p| p == 0.0) {
        return;
    }
    if pos == n {
        joint.iter_mut().for_each(|v| *v = 0.0);
        for (i, p) in level.iter().enumerate() {
            joint[i / leaves.per_message] += p;
        }
        let pz: f64 = joint.iter().sum();
        for &pmz in joint.iter() {
            if pmz > 0.0 {
                acc.0 -= pmz * (pmz / pz).log2();
                acc.1 += pmz * (pmz / (p_m * pz)).log2();
            }
        }
        return;
    }
    let mut next = vec![0.0; level.len()];
    for zsym in 0..w.cols() {
        for ((nx, &p), s) in next.iter_mut().zip(level.iter()).zip(&leaves.seqs) {
            *nx = if p == 0.0 { 0.0 } else { p * w.get(s[pos], zsym) };
        }
        walk(leaves, w, pos + 1, n, &mut next, joint, p_m, acc);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McLeakage {
    pub samples: usize,
    /// Estimated `I(M;Z^n)/n`.
    pub leakage_rate: f64,
    /// Half width of the normal 95% interval on `leakage_rate`.
    pub half_width: f64,
    pub equivocation_rate: f64,
}

/// Unbiased estimate of `I(M;Z^n)/n` as the sample mean of
/// `log2 p(z^n|m) / p(z^n)` over `(m, z^n)` drawn from the code, with
/// likelihoods computed exactly by summing over every encoder outcome.
pub fn monte_carlo_leakage(cb: &Codebook, z: &ConditionalPmf, samples: usize, seed: u64) -> Result<McLeakage> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let w = effective_channel(cb, z)?;
    let leaves = collect_leaves(cb)?;
    let ch = samplers(z);
    let n = cb.n;
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = rng_for(seed, t as u64);
            let m = rng.random_range(0..cb.messages());
            let tx = encode_with(cb, m, &mut rng)?;
            let zs: Vec<usize> = tx.x.iter().map(|&x| ch[x as usize].sample(&mut rng)).collect();
            let mut per_message = vec![0.0; leaves.messages];
            for (i, s) in leaves.seqs.iter().enumerate() {
                per_message[i / leaves.per_message] += (0..n).map(|k| w.get(s[k], zs[k])).product::<f64>();
            }
            let pzm = per_message[m] / leaves.per_message as f64;
            let pz = per_message.iter().sum::<f64>() / (leaves.per_message * leaves.messages) as f64;
            Ok((pzm / pz).log2())
        })
        .collect::<Result<_>>()?;
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let leakage_rate = mean / n as f64;
    Ok(McLeakage {
        samples,
        leakage_rate,
        half_width: 1.96 * (var / k).sqrt() / n as f64,
        equivocation_rate: cb.message_bits as f64 / n as f64 - leakage_rate,
    })
}
