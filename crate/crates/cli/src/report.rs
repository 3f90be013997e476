//! JSON verdict reports. Rationals are always written as `"p/q"` strings.

use coherence_core::oracle::EquivalenceReport;
use coherence_core::rational::serde_str;
use coherence_core::{ArbitrageKind, Rational, UncertaintyWitness};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Uncertainty,
    NoUncertainty,
    Arbitrage,
    NoArbitrage,
    WeakArbitrage,
    NoWeakArbitrage,
    Unique,
    Multiple,
    Computed,
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Uncertainty(UncertaintyWitness),
    Portfolio {
        branch: ArbitrageKind,
        #[serde(with = "serde_str::vec")]
        holdings: Vec<Rational>,
        #[serde(with = "serde_str")]
        cost: Rational,
        #[serde(with = "serde_str::vec")]
        cash_flows: Vec<Rational>,
    },
    StatePrices {
        /// `true` when every component is strictly positive.
        strict: bool,
        #[serde(with = "serde_str::vec")]
        state_prices: Vec<Rational>,
    },
    Rankings {
        rankings: Vec<Vec<usize>>,
        crossing: Option<UncertaintyWitness>,
    },
    CorrespondingScheme {
        discounted: bool,
        #[serde(with = "serde_str::matrix")]
        profit_matrix: Vec<Vec<Rational>>,
        #[serde(with = "serde_str::matrix")]
        portfolios: Vec<Vec<Rational>>,
        #[serde(with = "serde_str::matrix")]
        profits: Vec<Vec<Rational>>,
    },
    Equivalence(Box<EquivalenceReport>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub command: String,
    pub input_digest: String,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub elapsed_ms: u64,
}

/// `sha256:<hex>` over the concatenated input files.
pub fn digest(inputs: &[&[u8]]) -> String {
    let mut hasher = Sha256::new();
    for bytes in inputs {
        hasher.update(bytes);
    }
    format!("sha256:{}", hex::encode(hasher.finalize()))
}
