//! Blocklength sweeps driven by a declarative configuration.
//!
//! Seeds: codebook `c` at blocklength `n` uses `derive_seed(seed, 2n)` as its
//! root and child `c` of it; its error trials use child `c` of
//! `derive_seed(seed, 2n + 1)` as their root, and equivocation sampling
//! (when past the caps) child `c` of `derive_seed(seed, 2n + 1) ^ 1`.

use serde::{Deserialize, Serialize};

use super::codebook::{build_marton_codebook, build_wiretap_codebook, Codebook, MartonRates, WiretapRates};
use super::decode::{error_rate, Decoder};
use super::equivocation::{exact_equivocation, monte_carlo_leakage};
use super::{Caps, Quantization, SimReport, TypicalityParams};
use crate::chanfile::SpecFile;
use crate::error::{Error, Result};
use crate::search::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Binned superposition code (`V`, `X`, optional `Q`).
    Wiretap,
    /// Marton code (`V0`, `V1`, `V2`, `X`, optional `Q`).
    Marton,
}

/// Every rate a scheme may need; unused ones are ignored.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSpec {
    pub rate: f64,
    pub index_rate: f64,
    #[serde(default)]
    pub satellite_rate: f64,
    #[serde(default)]
    pub t1: f64,
    #[serde(default)]
    pub t2: f64,
    #[serde(default)]
    pub bin1: f64,
    #[serde(default)]
    pub bin2: f64,
}

fn default_codebooks() -> usize {
    1
}

fn default_mc_samples() -> usize {
    2000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    /// Distribution name in the channel file; optional when it has one.
    #[serde(default)]
    pub dist: Option<String>,
    /// Channel name of the legitimate receiver.
    pub receiver: String,
    /// Channel name of the eavesdropper.
    pub eavesdropper: String,
    #[serde(default = "default_decoder")]
    pub decoder: Decoder,
    pub rates: RateSpec,
    #[serde(default)]
    pub quantization: Quantization,
    pub n: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Independent codebooks per blocklength; trials are split evenly.
    #[serde(default = "default_codebooks")]
    pub codebooks: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub caps: Caps,
}

fn default_decoder() -> Decoder {
    Decoder::Direct
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(Error::InvalidParameter("`n` lists no blocklengths".into()));
        }
        if self.codebooks == 0 || self.trials < self.codebooks {
            return Err(Error::InvalidParameter("need at least one trial per codebook".into()));
        }
        Ok(())
    }

    pub fn build(&self, spec: &SpecFile, params: &TypicalityParams, seed: u64) -> Result<Codebook> {
        let dist = spec.pick_dist(self.dist.as_deref())?;
        let r = &self.rates;
        match self.scheme {
            Scheme::Wiretap => {
                let rates = WiretapRates {
                    rate: r.rate,
                    index_rate: r.index_rate,
                    satellite_rate: r.satellite_rate,
                    quantization: self.quantization,
                };
                build_wiretap_codebook(dist, &rates, params, &self.caps, seed)
            }
            Scheme::Marton => {
                let rates = MartonRates {
                    rate: r.rate,
                    index_rate: r.index_rate,
                    t1: r.t1,
                    t2: r.t2,
                    bin1: r.bin1,
                    bin2: r.bin2,
                    quantization: self.quantization,
                };
                build_marton_codebook(dist, &rates, params, &self.caps, seed)
            }
        }
    }
}

/// One CSV row: a blocklength, the nominal rate point and the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub rate: f64,
    pub index_rate: f64,
    pub message_bits: u32,
    #[serde(flatten)]
    pub report: SimReport,
}

impl ExperimentRow {
    pub const CSV_HEADER: &'static str =
        "n,rate,index_rate,message_bits,p_error,encoding_failure_rate,equivocation_rate,leakage_rate,leakage_ci,exact,trials";

    pub fn to_csv(&self) -> String {
        let r = &self.report;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            self.rate,
            self.index_rate,
            self.message_bits,
            r.p_error,
            r.encoding_failure_rate,
            r.equivocation_rate,
            r.leakage_rate,
            r.leakage_ci,
            r.exact,
            r.trials
        )
    }
}

/// Runs the sweep. Equivocation is exact when every codebook fits the caps
/// and a Monte Carlo estimate otherwise.
pub fn run_experiment(cfg: &ExperimentConfig, spec: &SpecFile) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let rx = spec.channel(&cfg.receiver)?;
    let eve = spec.channel(&cfg.eavesdropper)?;
    let mut rows = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let params = TypicalityParams::new(n, cfg.epsilon)?;
        let book_root = derive_seed(cfg.seed, 2 * n as u64);
        let trial_root = derive_seed(cfg.seed, 2 * n as u64 + 1);
        let mut errors = 0;
        let mut failures = 0;
        let mut equivocation = 0.0;
        let mut leakage = 0.0;
        let mut var = 0.0;
        let mut exact = true;
        let mut message_bits = 0;
        for c in 0..cfg.codebooks {
            let cb = cfg.build(spec, &params, derive_seed(book_root, c as u64))?;
            message_bits = cb.message_bits;
            let share = cfg.trials / cfg.codebooks + usize::from(c < cfg.trials % cfg.codebooks);
            let st = error_rate(&cb, rx, cfg.decoder, &params, share, derive_seed(trial_root, c as u64))?;
            errors += st.errors;
            failures += st.encoding_failures;
            match exact_equivocation(&cb, eve, &cfg.caps) {
                Ok(e) => {
                    equivocation += e.equivocation_rate();
                    leakage += e.leakage_rate();
                }
                Err(err) if err.is_cap_exceeded() => {
                    let mc = monte_carlo_leakage(&cb, eve, cfg.mc_samples, derive_seed(trial_root ^ 1, c as u64))?;
                    exact = false;
                    equivocation += mc.equivocation_rate;
                    leakage += mc.leakage_rate;
                    var += (mc.half_width / 1.96).powi(2);
                }
                Err(err) => return Err(err),
            }
        }
        let k = cfg.codebooks as f64;
        rows.push(ExperimentRow {
            rate: cfg.rates.rate,
            index_rate: cfg.rates.index_rate,
            message_bits,
            report: SimReport {
                n,
                p_error: errors as f64 / cfg.trials as f64,
                equivocation_rate: equivocation / k,
                leakage_rate: leakage / k,
                trials: cfg.trials,
                encoding_failure_rate: failures as f64 / cfg.trials as f64,
                exact,
                leakage_ci: 1.96 * var.sqrt() / k,
            },
        });
    }
    Ok(rows)
}
