//! Finite-blocklength coding experiments: random binning, superposition and
//! Marton codebooks, joint-typicality decoders, exact equivocation and the
//! covering-count concentration experiment.

mod codebook;
mod decode;
mod equivocation;
mod experiment;
mod lemma1;
mod typical;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use codebook::{
    build_marton_codebook, build_wiretap_codebook, conditional_table, encode, encode_with, Codebook, Leaf, MartonRates,
    Pairing, Transmission, WiretapRates,
};
pub use decode::{decode_direct, decode_indirect, error_rate, Decoded, Decoder, ErrorStats};
pub use equivocation::{exact_equivocation, monte_carlo_leakage, Equivocation, McLeakage};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentRow, RateSpec, Scheme};
pub use lemma1::{lemma1_experiment, Lemma1Stats};
pub use typical::JointTypicality;

/// Blocklength, typicality slack and the asymptotic slacks used by the
/// concentration experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub n: usize,
    pub epsilon: f64,
    /// Exponent slack in the covering-count threshold.
    pub delta: f64,
    /// Multiplicative slack in the covering-count threshold.
    pub delta1: f64,
}

impl TypicalityParams {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(TypicalityParams {
            n,
            epsilon,
            delta: 0.05,
            delta1: 0.1,
        })
    }

    pub fn with_slack(mut self, delta: f64, delta1: f64) -> Self {
        self.delta = delta;
        self.delta1 = delta1;
        self
    }
}

/// How a rate becomes an integer codeword-count exponent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantization {
    /// `ceil(n R)` bits.
    #[default]
    Ceil,
    /// `round(n R)` bits.
    Nearest,
}

impl Quantization {
    pub fn bits(self, n: usize, rate: f64) -> Result<u32> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rate must be non-negative, got {rate}"
            )));
        }
        let x = n as f64 * rate;
        // Guard against 0.3 * 10 = 3.0000000000000004.
        let x = if (x - x.round()).abs() < 1e-9 { x.round() } else { x };
        let b = match self {
            Quantization::Ceil => x.ceil(),
            Quantization::Nearest => x.round(),
        };
        if b > 62.0 {
            return Err(Error::InvalidParameter(format!("{b} index bits is out of range")));
        }
        Ok(b as u32)
    }
}

/// Resource ceilings. Exceeding any of them is a distinct error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// Stored codeword sequences.
    pub max_sequences: u64,
    /// Joint-typicality checks while filling a Marton pairing table.
    pub max_pair_checks: u64,
    /// `n log2 |Z|` for exact equivocation.
    pub max_output_bits: f64,
    /// Equally likely encoder outcomes (over all messages) for exact
    /// equivocation.
    pub max_leaves: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_sequences: 1 << 20,
            max_pair_checks: 1 << 26,
            max_output_bits: 14.0,
            max_leaves: 1 << 14,
        }
    }
}

pub(crate) fn cap_check(what: &str, size: u128, cap: u128, hint: &str) -> Result<()> {
    if size > cap {
        return Err(Error::CapExceeded {
            what: what.to_string(),
            size,
            cap,
            hint: hint.to_string(),
        });
    }
    Ok(())
}

/// Summary of one coding run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub p_error: f64,
    /// `H(M|Z^n)/n` in bits per symbol.
    pub equivocation_rate: f64,
    /// `I(M;Z^n)/n` in bits per symbol.
    pub leakage_rate: f64,
    pub trials: usize,
    pub encoding_failure_rate: f64,
    /// False when the equivocation figures are a Monte Carlo estimate.
    pub exact: bool,
    /// Half width of the 95% interval on `leakage_rate` (zero when exact).
    pub leakage_ci: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization() {
        assert_eq!(Quantization::Ceil.bits(4, 0.5).unwrap(), 2);
        assert_eq!(Quantization::Ceil.bits(8, 0.9).unwrap(), 8);
        assert_eq!(Quantization::Nearest.bits(8, 0.9).unwrap(), 7);
        assert_eq!(Quantization::Ceil.bits(10, 0.3).unwrap(), 3);
        assert!(Quantization::Ceil.bits(4, -0.1).is_err());
    }

    #[test]
    fn params_validate() {
        assert!(TypicalityParams::new(0, 0.1).is_err());
        assert!(TypicalityParams::new(4, 0.0).is_err());
        let p = TypicalityParams::new(4, 0.2).unwrap();
        assert_eq!((p.delta, p.delta1), (0.05, 0.1));
    }
}
