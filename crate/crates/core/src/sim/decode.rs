//! Joint-typicality decoders and the error-rate harness.

use rand::distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::codebook::{encode_with, samplers, Codebook};
use super::typical::JointTypicality;
use super::TypicalityParams;
use crate::error::{Error, Result};
use crate::prob::ConditionalPmf;
use crate::search::rng_for;

const OUTPUT_AXIS: &str = "Yrx";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Decoder {
    /// Unique cloud index jointly typical with the output.
    Direct,
    /// Unique cloud index jointly typical with the output together with
    /// some satellite of layer `layer`.
    Indirect { layer: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoded {
    Index { l0: usize, message: usize },
    NoMatch,
    Ambiguous,
}

impl Decoded {
    pub fn message(&self) -> Option<usize> {
        match self {
            Decoded::Index { message, .. } => Some(*message),
            _ => None,
        }
    }
}

impl Codebook {
    /// Typicality test for `decoder` at the output of `channel` (driven by
    /// `X`).
    pub fn decoder_typicality(
        &self,
        channel: &ConditionalPmf,
        decoder: Decoder,
        params: &TypicalityParams,
    ) -> Result<JointTypicality> {
        let nx = self.source.size_of("X")?;
        if channel.rows() != nx {
            return Err(Error::DimensionMismatch(format!(
                "channel has {} inputs, X has {nx} symbols",
                channel.rows()
            )));
        }
        let joint = self.source.attach_channel("X", OUTPUT_AXIS, channel)?;
        let mut axes: Vec<&str> = self.cloud_axis.iter().map(|s| s.as_str()).collect();
        axes.push(&self.v0_axis);
        if let Decoder::Indirect { layer } = decoder {
            let l = self
                .layers
                .get(layer)
                .ok_or_else(|| Error::InvalidParameter(format!("codebook has no satellite layer {layer}")))?;
            axes.push(&l.axis);
        }
        axes.push(OUTPUT_AXIS);
        JointTypicality::new(&joint, &axes, params)
    }

    fn output_size_check(&self, y: &[u8]) -> Result<()> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "received {} symbols, blocklength is {}",
                y.len(),
                self.n
            )));
        }
        Ok(())
    }
}

fn verdict(cb: &Codebook, matches: &[usize]) -> Decoded {
    match matches {
        [] => Decoded::NoMatch,
        [l0] => Decoded::Index {
            l0: *l0,
            message: cb.message_of(*l0),
        },
        _ => Decoded::Ambiguous,
    }
}

/// Unique `l0` with `(q, v(l0), y)` jointly typical.
pub fn decode_direct(cb: &Codebook, y: &[u8], typ: &JointTypicality) -> Result<Decoded> {
    cb.output_size_check(y)?;
    let base = cb.cloud_axis.is_some() as usize;
    if typ.arity() != base + 2 {
        return Err(Error::DimensionMismatch(
            "typicality test is not a direct decoder test".into(),
        ));
    }
    let mut scratch = typ.scratch();
    let mut matches = Vec::new();
    let mut seqs: Vec<&[u8]> = Vec::with_capacity(3);
    for (l0, v) in cb.v0.iter().enumerate() {
        seqs.clear();
        if base == 1 {
            seqs.push(&cb.cloud);
        }
        seqs.extend([v.as_slice(), y]);
        if typ.is_typical_with(&seqs, &mut scratch) {
            matches.push(l0);
            if matches.len() > 1 {
                break;
            }
        }
    }
    Ok(verdict(cb, &matches))
}

/// Unique `l0` such that `(q, v(l0), s(l0, l), y)` is jointly typical for
/// some satellite `l` of `layer`.
pub fn decode_indirect(cb: &Codebook, layer: usize, y: &[u8], typ: &JointTypicality) -> Result<Decoded> {
    cb.output_size_check(y)?;
    let base = cb.cloud_axis.is_some() as usize;
    let sats = &cb
        .layers
        .get(layer)
        .ok_or_else(|| Error::InvalidParameter(format!("codebook has no satellite layer {layer}")))?
        .seqs;
    if typ.arity() != base + 3 {
        return Err(Error::DimensionMismatch(
            "typicality test is not an indirect decoder test".into(),
        ));
    }
    let mut scratch = typ.scratch();
    let mut matches = Vec::new();
    let mut seqs: Vec<&[u8]> = Vec::with_capacity(4);
    for (l0, v) in cb.v0.iter().enumerate() {
        let hit = sats[l0].iter().any(|s| {
            seqs.clear();
            if base == 1 {
                seqs.push(&cb.cloud);
            }
            seqs.extend([v.as_slice(), s.as_slice(), y]);
            typ.is_typical_with(&seqs, &mut scratch)
        });
        if hit {
            matches.push(l0);
            if matches.len() > 1 {
                break;
            }
        }
    }
    Ok(verdict(cb, &matches))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub trials: usize,
    pub errors: usize,
    pub encoding_failures: usize,
}

impl ErrorStats {
    pub fn p_error(&self) -> f64 {
        self.errors as f64 / self.trials.max(1) as f64
    }

    pub fn encoding_failure_rate(&self) -> f64 {
        self.encoding_failures as f64 / self.trials.max(1) as f64
    }
}

/// Monte Carlo block error rate on a fixed codebook. Trial `t` draws a
/// uniform message, encodes, passes `channel` and decodes, all from child
/// stream `t` of `seed`. Encoding failures count as errors.
pub fn error_rate(
    cb: &Codebook,
    channel: &ConditionalPmf,
    decoder: Decoder,
    params: &TypicalityParams,
    trials: usize,
    seed: u64,
) -> Result<ErrorStats> {
    if params.n != cb.n {
        return Err(Error::InvalidParameter(format!(
            "typicality blocklength {} differs from codebook blocklength {}",
            params.n, cb.n
        )));
    }
    let typ = cb.decoder_typicality(channel, decoder, params)?;
    let ch = samplers(channel);
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, bool)> {
            let mut rng = rng_for(seed, t as u64);
            let m = rand::Rng::random_range(&mut rng, 0..cb.messages());
            let tx = encode_with(cb, m, &mut rng)?;
            let y: Vec<u8> = tx.x.iter().map(|&x| ch[x as usize].sample(&mut rng) as u8).collect();
            let d = match decoder {
                Decoder::Direct => decode_direct(cb, &y, &typ)?,
                Decoder::Indirect { layer } => decode_indirect(cb, layer, &y, &typ)?,
            };
            Ok((tx.failed() || d.message() != Some(m), tx.failed()))
        })
        .collect::<Result<_>>()?;
    Ok(ErrorStats {
        trials,
        errors: outcomes.iter().filter(|o| o.0).count(),
        encoding_failures: outcomes.iter().filter(|o| o.1).count(),
    })
}
