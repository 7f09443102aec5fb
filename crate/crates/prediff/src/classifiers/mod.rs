//! Black-box classifier abstraction.
//!
//! Every backend sits behind the [`Classifier`] trait and is driven through a
//! [`ClassifierHandle`], which owns the call counter and enforces the output
//! contract (a probability vector of the declared length summing to one).
//! Backends are registered by scheme name in [`BackendRegistry`] and selected
//! at runtime from a spec string such as `oracle:area-fraction` or
//! `external:python3 server.py`.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::imagery::RasterImage;

mod external;
#[cfg(feature = "interchange")]
mod interchange;
mod registry;
mod synthetic;

pub use external::{open_external, open_external_announced};
#[cfg(feature = "interchange")]
pub use interchange::open_interchange;
pub use registry::{BackendFactory, BackendRegistry};
pub use synthetic::{AreaFractionOracle, ConstantOracle, OracleParams, TwoBlobOracle};

/// Backend family of a handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Synthetic,
    External,
    Interchange,
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackendKind::Synthetic => "synthetic",
            BackendKind::External => "external",
            BackendKind::Interchange => "interchange",
        })
    }
}

/// A scoring backend: image in, class-probability vector out.
pub trait Classifier: Send + Sync {
    fn num_classes(&self) -> usize;
    fn predict_raw(&self, image: &RasterImage) -> Result<Vec<f32>>;
}

/// Counting, validating wrapper around a backend.
pub struct ClassifierHandle {
    kind: BackendKind,
    inner: Box<dyn Classifier>,
    calls: AtomicU64,
}

impl ClassifierHandle {
    pub fn new(kind: BackendKind, inner: Box<dyn Classifier>) -> Self {
        Self { kind, inner, calls: AtomicU64::new(0) }
    }

    pub fn backend_kind(&self) -> BackendKind {
        self.kind
    }

    pub fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    /// Run the backend once. The counter increments on every invocation,
    /// including failed ones.
    pub fn predict(&self, image: &RasterImage) -> Result<Vec<f32>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let probs = self.inner.predict_raw(image)?;
        validate_probabilities(&probs, self.inner.num_classes())?;
        Ok(probs)
    }

    /// Exact number of predict invocations since creation or the last reset.
    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

fn validate_probabilities(probs: &[f32], expected_len: usize) -> Result<()> {
    if probs.len() != expected_len {
        return Err(Error::Protocol(format!(
            "expected {expected_len} class probabilities, got {}",
            probs.len()
        )));
    }
    for &p in probs {
        if !p.is_finite() || !(-1e-6..=1.0 + 1e-6).contains(&p) {
            return Err(Error::Protocol(format!("probability {p} outside [0, 1]")));
        }
    }
    let sum: f32 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-4 {
        return Err(Error::Protocol(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

/// Argmax with ties broken by the lowest class index.
pub fn argmax_class(probs: &[f32]) -> usize {
    let mut best = 0usize;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}
