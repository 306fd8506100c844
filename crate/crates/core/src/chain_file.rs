//! JSON chain descriptions:
//!
//! ```json
//! {"labels": ["a", "b"], "P": [[0.7, 0.3], [0.6, 0.4]], "pi": [..], "nu": [..], "f": [..]}
//! ```
//!
//! Only `P` is required. A missing `pi` is solved for, a missing `nu` means a
//! stationary start.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CertifyError;
use crate::spectral::{
    Distribution, ErgodicChain, ReversibleChain, StateFunction, StateSpace, TransitionMatrix,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed chain file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] CertifyError),
}

/// A validated chain together with its optional start law and function.
#[derive(Debug, Clone)]
pub struct LoadedChain {
    pub chain: ErgodicChain,
    pub nu: Option<Distribution>,
    pub f: Option<StateFunction>,
}

impl LoadedChain {
    /// The start law, defaulting to `pi`.
    pub fn nu_or_pi(&self) -> Distribution {
        self.nu.clone().unwrap_or_else(|| self.chain.pi().clone())
    }
}

fn sized<T>(
    v: Option<Vec<f64>>,
    what: &'static str,
    dim: usize,
    make: impl FnOnce(Vec<f64>) -> Result<T, CertifyError>,
) -> Result<Option<T>, CertifyError> {
    match v {
        None => Ok(None),
        Some(v) if v.len() != dim => Err(CertifyError::LengthMismatch {
            what,
            len: v.len(),
            expected: dim,
        }),
        Some(v) => make(v).map(Some),
    }
}

impl ChainFile {
    pub fn parse(text: &str) -> Result<Self, LoadError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Reversibility and stationarity checks only; no spectrum.
    pub fn reversible(&self) -> Result<ReversibleChain, CertifyError> {
        let p = TransitionMatrix::from_rows(&self.p)?;
        let dim = p.dim();
        let space = StateSpace::new(dim, self.labels.clone())?;
        let pi = sized(self.pi.clone(), "pi", dim, Distribution::new)?;
        ReversibleChain::build_labelled(space, p, pi)
    }

    pub fn load(&self) -> Result<LoadedChain, CertifyError> {
        let chain = ErgodicChain::new(self.reversible()?)?;
        let dim = chain.dim();
        Ok(LoadedChain {
            nu: sized(self.nu.clone(), "nu", dim, Distribution::new)?,
            f: sized(self.f.clone(), "f", dim, StateFunction::new)?,
            chain,
        })
    }
}

pub fn load_path(path: &Path) -> Result<LoadedChain, LoadError> {
    Ok(ChainFile::read(path)?.load()?)
}
