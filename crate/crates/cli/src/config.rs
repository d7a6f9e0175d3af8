use serde::Serialize;
use subcarve::carver::{CarveOptions, ChainSearch};
use subcarve::numerics::Tolerance;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

/// Settings shared by every subcommand; echoed in each report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub tol: Tolerance,
    pub seed: u64,
    pub max_chain: usize,
    pub max_words: usize,
    pub max_order: usize,
}

impl RunConfig {
    pub fn new(
        eq_tol: f64,
        rank_tol: f64,
        seed: u64,
        max_chain: u64,
        max_words: u64,
        max_order: u64,
    ) -> Result<Self, CliError> {
        let tol = Tolerance::new(eq_tol, rank_tol).map_err(|e| CliError::Usage(e.to_string()))?;
        let bound = |v: u64, flag: &str| {
            usize::try_from(v).map_err(|_| CliError::Usage(format!("--{flag} {v} is out of range")))
        };
        Ok(RunConfig {
            tol,
            seed,
            max_chain: bound(max_chain, "max-chain")?,
            max_words: bound(max_words, "max-words")?,
            max_order: bound(max_order, "max-order")?,
        })
    }

    pub fn carve_options(&self) -> CarveOptions {
        CarveOptions {
            max_words: self.max_words,
            max_order: self.max_order,
        }
    }

    pub fn chain_search(&self) -> ChainSearch {
        ChainSearch {
            max_len: self.max_chain,
            max_words: self.max_words,
            ..ChainSearch::default()
        }
    }
}
