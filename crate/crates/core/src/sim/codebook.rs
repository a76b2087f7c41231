//! Random codebooks. Index sets are exact powers of two; message `m` owns the
//! contiguous bin `[m 2^(b0 - bm), (m + 1) 2^(b0 - bm))` of cloud indices.

use std::ops::Range;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::typical::JointTypicality;
use super::{cap_check, Caps, Quantization, TypicalityParams};
use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, FactoredDistribution, JointPmf};

/// Rates of a binned superposition code: `rate` message bits per symbol,
/// `index_rate` cloud-index bits and `satellite_rate` bits of satellite
/// randomization per cloud index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WiretapRates {
    pub rate: f64,
    pub index_rate: f64,
    #[serde(default)]
    pub satellite_rate: f64,
    #[serde(default)]
    pub quantization: Quantization,
}

impl WiretapRates {
    pub fn new(rate: f64, index_rate: f64, satellite_rate: f64) -> Self {
        WiretapRates {
            rate,
            index_rate,
            satellite_rate,
            quantization: Quantization::Ceil,
        }
    }
}

/// Rates of the Marton code: `t1`, `t2` are the satellite codebook rates and
/// `bin1`, `bin2` the product-bin rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartonRates {
    pub rate: f64,
    pub index_rate: f64,
    pub t1: f64,
    pub t2: f64,
    pub bin1: f64,
    pub bin2: f64,
    #[serde(default)]
    pub quantization: Quantization,
}

/// Satellite sequences `seqs[l0][l]` drawn conditionally on cloud `l0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Layer {
    pub axis: String,
    pub bits: u32,
    pub seqs: Vec<Vec<Vec<u8>>>,
}

/// Marton pairing table: one entry per `(l0, k1, k2)`, `None` when no
/// jointly typical pair exists in the product bin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pairing {
    pub bin_bits: [u32; 2],
    pub table: Vec<Option<(u32, u32)>>,
}

impl Pairing {
    fn slot(&self, l0: usize, k1: usize, k2: usize) -> usize {
        ((l0 << self.bin_bits[0]) + k1) * (1 << self.bin_bits[1]) + k2
    }

    pub fn failure_rate(&self) -> f64 {
        self.table.iter().filter(|e| e.is_none()).count() as f64 / self.table.len() as f64
    }
}

/// One equally likely encoder outcome for a message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaf {
    pub l0: usize,
    /// Chosen index in each satellite layer.
    pub picks: Vec<usize>,
    /// Marton encoding failure; the fallback pair is transmitted.
    pub failed: bool,
}

#[derive(Clone, Debug)]
pub struct Codebook {
    pub n: usize,
    pub message_bits: u32,
    pub index_bits: u32,
    pub cloud_axis: Option<String>,
    pub cloud: Vec<u8>,
    pub v0_axis: String,
    pub v0: Vec<Vec<u8>>,
    pub layers: Vec<Layer>,
    pub pairing: Option<Pairing>,
    /// Joint law of every codebook axis and `X`.
    pub source: JointPmf,
    /// `p(x | composite symbol)`, the composite being (cloud, v0, layers...).
    pub input: ConditionalPmf,
    composite_sizes: Vec<usize>,
    samplers: Vec<WeightedIndex<f64>>,
}

/// `p(target | given)` as a table whose rows index `given` in mixed radix
/// (first most significant). Rows of zero mass are uniform.
pub fn conditional_table(joint: &JointPmf, given: &[&str], target: &[&str]) -> Result<ConditionalPmf> {
    let mut keep: Vec<&str> = given.to_vec();
    keep.extend_from_slice(target);
    let m = joint.marginalize(&keep)?;
    let rows: usize = m.axes()[..given.len()].iter().map(|a| a.size).product();
    let cols: usize = m.axes()[given.len()..].iter().map(|a| a.size).product();
    let t = m.tensor();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let row = &t[r * cols..(r + 1) * cols];
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            data.extend(row.iter().map(|v| v / s));
        } else {
            data.extend(std::iter::repeat_n(1.0 / cols as f64, cols));
        }
    }
    ConditionalPmf::new(rows, cols, data)
}

pub(crate) fn samplers(table: &ConditionalPmf) -> Vec<WeightedIndex<f64>> {
    (0..table.rows())
        .map(|r| WeightedIndex::new(table.row(r)).expect("rows of a pmf have positive mass"))
        .collect()
}

fn draw_sequence(
    rng: &mut ChaCha8Rng,
    n: usize,
    rows: &[WeightedIndex<f64>],
    row_of: impl Fn(usize) -> usize,
) -> Vec<u8> {
    (0..n).map(|i| rows[row_of(i)].sample(rng) as u8).collect()
}

fn check_alphabets(joint: &JointPmf) -> Result<()> {
    for a in joint.axes() {
        if a.size > 256 {
            return Err(Error::InvalidParameter(format!(
                "alphabet of `{}` exceeds 256 symbols",
                a.name
            )));
        }
    }
    Ok(())
}

fn index_bits(q: Quantization, n: usize, rate: f64, index_rate: f64) -> Result<(u32, u32)> {
    let bm = q.bits(n, rate)?;
    let b0 = q.bits(n, index_rate)?;
    if bm > b0 {
        return Err(Error::InvalidParameter(format!(
            "message bits {bm} exceed cloud-index bits {b0}; need index rate >= rate"
        )));
    }
    Ok((bm, b0))
}

struct Cloud {
    axis: Option<String>,
    seq: Vec<u8>,
}

fn draw_cloud(joint: &JointPmf, n: usize, rng: &mut ChaCha8Rng) -> Result<Cloud> {
    if !joint.has_axis("Q") {
        return Ok(Cloud {
            axis: None,
            seq: Vec::new(),
        });
    }
    let pq = conditional_table(joint, &[], &["Q"])?;
    let s = samplers(&pq);
    Ok(Cloud {
        axis: Some("Q".into()),
        seq: draw_sequence(rng, n, &s, |_| 0),
    })
}

impl Codebook {
    fn finish(mut self) -> Result<Self> {
        let mut given: Vec<&str> = Vec::new();
        if let Some(q) = &self.cloud_axis {
            given.push(q);
        }
        given.push(&self.v0_axis);
        for l in &self.layers {
            given.push(&l.axis);
        }
        self.composite_sizes = given.iter().map(|a| self.source.size_of(a)).collect::<Result<_>>()?;
        self.input = if given.last() == Some(&"X") {
            let nx = self.source.size_of("X")?;
            let rows = self.composite_sizes.iter().product();
            ConditionalPmf::deterministic(rows, nx, |s| s % nx)
        } else {
            conditional_table(&self.source, &given, &["X"])?
        };
        self.samplers = samplers(&self.input);
        Ok(self)
    }

    pub fn messages(&self) -> usize {
        1 << self.message_bits
    }

    pub fn bin_size(&self) -> usize {
        1 << (self.index_bits - self.message_bits)
    }

    pub fn bin(&self, m: usize) -> Range<usize> {
        let s = self.bin_size();
        m * s..(m + 1) * s
    }

    pub fn message_of(&self, l0: usize) -> usize {
        l0 >> (self.index_bits - self.message_bits)
    }

    /// Stored sequences across all layers.
    pub fn sequence_count(&self) -> u64 {
        let mut c = self.v0.len() as u64;
        for l in &self.layers {
            c += l.seqs.iter().map(|s| s.len() as u64).sum::<u64>();
        }
        c
    }

    /// Composite alphabet sizes: cloud (when present), v0, then each layer.
    pub fn composite_sizes(&self) -> &[usize] {
        &self.composite_sizes
    }

    /// The same codeword set with `bits` message bits: bins merge or split
    /// along the contiguous index ranges.
    pub fn with_message_bits(&self, bits: u32) -> Result<Codebook> {
        if bits > self.index_bits {
            return Err(Error::InvalidParameter(format!(
                "{bits} message bits exceed {} index bits",
                self.index_bits
            )));
        }
        let mut out = self.clone();
        out.message_bits = bits;
        Ok(out)
    }

    /// Equally likely encoder outcomes for message `m`.
    pub fn leaves(&self, m: usize) -> Result<Vec<Leaf>> {
        if m >= self.messages() {
            return Err(Error::MessageOutOfRange(m));
        }
        let mut out = Vec::new();
        for l0 in self.bin(m) {
            match &self.pairing {
                Some(p) => {
                    for k1 in 0..1usize << p.bin_bits[0] {
                        for k2 in 0..1usize << p.bin_bits[1] {
                            out.push(self.marton_leaf(p, l0, k1, k2));
                        }
                    }
                }
                None => {
                    let mut picks = vec![0usize; self.layers.len()];
                    loop {
                        out.push(Leaf {
                            l0,
                            picks: picks.clone(),
                            failed: false,
                        });
                        // Odometer over the layer indices.
                        let mut j = self.layers.len();
                        loop {
                            if j == 0 {
                                break;
                            }
                            j -= 1;
                            picks[j] += 1;
                            if picks[j] < 1 << self.layers[j].bits {
                                break;
                            }
                            picks[j] = 0;
                        }
                        if picks.iter().all(|&p| p == 0) {
                            break;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn marton_leaf(&self, p: &Pairing, l0: usize, k1: usize, k2: usize) -> Leaf {
        match p.table[p.slot(l0, k1, k2)] {
            Some((t1, t2)) => Leaf {
                l0,
                picks: vec![t1 as usize, t2 as usize],
                failed: false,
            },
            None => {
                let sub1 = self.layers[0].bits - p.bin_bits[0];
                let sub2 = self.layers[1].bits - p.bin_bits[1];
                Leaf {
                    l0,
                    picks: vec![k1 << sub1, k2 << sub2],
                    failed: true,
                }
            }
        }
    }

    /// Composite symbol sequence of a leaf.
    pub fn composite(&self, leaf: &Leaf) -> Vec<usize> {
        (0..self.n)
            .map(|i| {
                let mut idx = 0;
                let mut k = 0;
                if self.cloud_axis.is_some() {
                    idx = self.cloud[i] as usize;
                    k = 1;
                }
                idx = idx * self.composite_sizes[k] + self.v0[leaf.l0][i] as usize;
                for (j, layer) in self.layers.iter().enumerate() {
                    idx = idx * self.composite_sizes[k + 1 + j] + layer.seqs[leaf.l0][leaf.picks[j]][i] as usize;
                }
                idx
            })
            .collect()
    }

    pub(crate) fn sample_input<R: Rng + ?Sized>(&self, composite: &[usize], rng: &mut R) -> Vec<u8> {
        composite.iter().map(|&s| self.samplers[s].sample(rng) as u8).collect()
    }
}

/// Binned superposition code over `dist` with axes `V`, `X` and an optional
/// time-sharing axis `Q`: a cloud codeword `v(l0) ~ p(v|q)` per index and
/// `2^(n satellite_rate)` satellites `x(l0, l1) ~ p(x|q,v)` per cloud.
pub fn build_wiretap_codebook(
    dist: &FactoredDistribution,
    rates: &WiretapRates,
    params: &TypicalityParams,
    caps: &Caps,
    seed: u64,
) -> Result<Codebook> {
    let joint = dist.joint().clone();
    check_alphabets(&joint)?;
    joint.axis_index("V")?;
    joint.axis_index("X")?;
    let n = params.n;
    let q = rates.quantization;
    let (bm, b0) = index_bits(q, n, rates.rate, rates.index_rate)?;
    let b1 = q.bits(n, rates.satellite_rate)?;
    let total = (1u128 << b0) * ((1u128 << b1) + 1);
    cap_check(
        "codebook sequences",
        total,
        caps.max_sequences as u128,
        "lower the rates or the blocklength",
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cloud = draw_cloud(&joint, n, &mut rng)?;
    let qv: Vec<&str> = cloud.axis.iter().map(|s| s.as_str()).chain(["V"]).collect();
    let p_v = samplers(&conditional_table(&joint, &qv[..qv.len() - 1], &["V"])?);
    let p_x = samplers(&conditional_table(&joint, &qv, &["X"])?);
    let nv = joint.size_of("V")?;
    let qs = |i: usize| if cloud.axis.is_some() { cloud.seq[i] as usize } else { 0 };

    let v0: Vec<Vec<u8>> = (0..1usize << b0)
        .map(|_| draw_sequence(&mut rng, n, &p_v, qs))
        .collect();
    let seqs = v0
        .iter()
        .map(|v| {
            (0..1usize << b1)
                .map(|_| draw_sequence(&mut rng, n, &p_x, |i| qs(i) * nv + v[i] as usize))
                .collect()
        })
        .collect();
    Codebook {
        n,
        message_bits: bm,
        index_bits: b0,
        cloud_axis: cloud.axis,
        cloud: cloud.seq,
        v0_axis: "V".into(),
        v0,
        layers: vec![Layer {
            axis: "X".into(),
            bits: b1,
            seqs,
        }],
        pairing: None,
        source: joint,
        input: ConditionalPmf::identity(1),
        composite_sizes: Vec::new(),
        samplers: Vec::new(),
    }
    .finish()
}

/// Marton code over `dist` with axes `V0`, `V1`, `V2`, `X` and an optional
/// `Q`. Satellites `v1(l0, t1)`, `v2(l0, t2)` are drawn conditionally on the
/// cloud; each product bin `(k1, k2)` stores a uniformly chosen jointly
/// typical pair from its sub-bins, or an encoding failure.
pub fn build_marton_codebook(
    dist: &FactoredDistribution,
    rates: &MartonRates,
    params: &TypicalityParams,
    caps: &Caps,
    seed: u64,
) -> Result<Codebook> {
    let joint = dist.joint().clone();
    check_alphabets(&joint)?;
    for a in ["V0", "V1", "V2", "X"] {
        joint.axis_index(a)?;
    }
    let n = params.n;
    let q = rates.quantization;
    let (bm, b0) = index_bits(q, n, rates.rate, rates.index_rate)?;
    let t = [q.bits(n, rates.t1)?, q.bits(n, rates.t2)?];
    let k = [q.bits(n, rates.bin1)?, q.bits(n, rates.bin2)?];
    if k[0] > t[0] || k[1] > t[1] {
        return Err(Error::InvalidParameter(
            "product-bin rates must not exceed the satellite rates".into(),
        ));
    }
    let total = (1u128 << b0) * (1 + (1u128 << t[0]) + (1u128 << t[1]));
    cap_check(
        "codebook sequences",
        total,
        caps.max_sequences as u128,
        "lower the rates or the blocklength",
    )?;
    let checks = 1u128 << (b0 + t[0] + t[1]);
    cap_check(
        "pairing checks",
        checks,
        caps.max_pair_checks as u128,
        "lower the satellite rates",
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cloud = draw_cloud(&joint, n, &mut rng)?;
    let qa: Vec<&str> = cloud.axis.iter().map(|s| s.as_str()).collect();
    let qv0: Vec<&str> = qa.iter().copied().chain(["V0"]).collect();
    let p_v0 = samplers(&conditional_table(&joint, &qa, &["V0"])?);
    let p_v1 = samplers(&conditional_table(&joint, &qv0, &["V1"])?);
    let p_v2 = samplers(&conditional_table(&joint, &qv0, &["V2"])?);
    let nv0 = joint.size_of("V0")?;
    let qs = |i: usize| if cloud.axis.is_some() { cloud.seq[i] as usize } else { 0 };

    let v0: Vec<Vec<u8>> = (0..1usize << b0)
        .map(|_| draw_sequence(&mut rng, n, &p_v0, qs))
        .collect();
    let mut layer_seqs: [Vec<Vec<Vec<u8>>>; 2] = [Vec::new(), Vec::new()];
    for (j, p) in [&p_v1, &p_v2].into_iter().enumerate() {
        layer_seqs[j] = v0
            .iter()
            .map(|v| {
                (0..1usize << t[j])
                    .map(|_| draw_sequence(&mut rng, n, p, |i| qs(i) * nv0 + v[i] as usize))
                    .collect()
            })
            .collect();
    }

    let mut axes: Vec<&str> = qa.clone();
    axes.extend(["V0", "V1", "V2"]);
    let typ = JointTypicality::new(&joint, &axes, params)?;
    let mut scratch = typ.scratch();
    let sub = [t[0] - k[0], t[1] - k[1]];
    let mut table = Vec::with_capacity(1 << (b0 + k[0] + k[1]));
    let mut found: Vec<(u32, u32)> = Vec::new();
    for l0 in 0..1usize << b0 {
        for k1 in 0..1usize << k[0] {
            for k2 in 0..1usize << k[1] {
                found.clear();
                for t1 in k1 << sub[0]..(k1 + 1) << sub[0] {
                    for t2 in k2 << sub[1]..(k2 + 1) << sub[1] {
                        let a = &layer_seqs[0][l0][t1];
                        let b = &layer_seqs[1][l0][t2];
                        let mut seqs: Vec<&[u8]> = Vec::with_capacity(4);
                        if cloud.axis.is_some() {
                            seqs.push(&cloud.seq);
                        }
                        seqs.extend([v0[l0].as_slice(), a, b]);
                        if typ.is_typical_with(&seqs, &mut scratch) {
                            found.push((t1 as u32, t2 as u32));
                        }
                    }
                }
                table.push(if found.is_empty() {
                    None
                } else {
                    Some(found[rng.random_range(0..found.len())])
                });
            }
        }
    }
    let [s1, s2] = layer_seqs;
    Codebook {
        n,
        message_bits: bm,
        index_bits: b0,
        cloud_axis: cloud.axis,
        cloud: cloud.seq,
        v0_axis: "V0".into(),
        v0,
        layers: vec![
            Layer {
                axis: "V1".into(),
                bits: t[0],
                seqs: s1,
            },
            Layer {
                axis: "V2".into(),
                bits: t[1],
                seqs: s2,
            },
        ],
        pairing: Some(Pairing { bin_bits: k, table }),
        source: joint,
        input: ConditionalPmf::identity(1),
        composite_sizes: Vec::new(),
        samplers: Vec::new(),
    }
    .finish()
}

/// One encoder output.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    pub leaf: Leaf,
    pub x: Vec<u8>,
}

impl Transmission {
    pub fn failed(&self) -> bool {
        self.leaf.failed
    }
}

/// Picks a uniform cloud index in the bin of `m` and uniform satellite (or
/// product-bin) indices, then draws `x^n` symbol-wise from `p(x | composite)`.
pub fn encode_with<R: Rng + ?Sized>(cb: &Codebook, m: usize, rng: &mut R) -> Result<Transmission> {
    if m >= cb.messages() {
        return Err(Error::MessageOutOfRange(m));
    }
    let bin = cb.bin(m);
    let l0 = rng.random_range(bin);
    let leaf = match &cb.pairing {
        Some(p) => {
            let k1 = rng.random_range(0..1usize << p.bin_bits[0]);
            let k2 = rng.random_range(0..1usize << p.bin_bits[1]);
            cb.marton_leaf(p, l0, k1, k2)
        }
        None => Leaf {
            l0,
            picks: cb
                .layers
                .iter()
                .map(|l| rng.random_range(0..1usize << l.bits))
                .collect(),
            failed: false,
        },
    };
    let x = cb.sample_input(&cb.composite(&leaf), rng);
    Ok(Transmission { leaf, x })
}

pub fn encode(cb: &Codebook, m: usize, seed: u64) -> Result<Transmission> {
    encode_with(cb, m, &mut ChaCha8Rng::seed_from_u64(seed))
}
