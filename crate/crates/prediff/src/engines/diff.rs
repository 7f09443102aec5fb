//! Difference functions comparing the baseline prediction against the
//! prediction with a feature excluded.

use crate::error::{Error, Result};

const EPSILON: f64 = 1e-6;

/// Comparator `g(baseline, excluded)` used by all engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceFunction {
    /// `g(a, b) = a - b`
    #[default]
    Subtraction,
    /// `g(a, b) = log2(odds(a)) - log2(odds(b))`, probabilities clipped to
    /// `[ε, 1-ε]` with ε = 1e-6.
    WeightOfEvidence,
    /// `g(a, b) = log2(a) - log2(b)` with the same clipping.
    InfoDifference,
}

impl DifferenceFunction {
    pub fn apply(&self, baseline: f64, excluded: f64) -> f64 {
        match self {
            DifferenceFunction::Subtraction => baseline - excluded,
            DifferenceFunction::WeightOfEvidence => {
                log2_odds(clip(baseline)) - log2_odds(clip(excluded))
            }
            DifferenceFunction::InfoDifference => clip(baseline).log2() - clip(excluded).log2(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sub" => Ok(DifferenceFunction::Subtraction),
            "woe" => Ok(DifferenceFunction::WeightOfEvidence),
            "info" => Ok(DifferenceFunction::InfoDifference),
            other => Err(Error::invalid(format!("unknown difference function '{other}' (sub|woe|info)"))),
        }
    }
}

impl std::fmt::Display for DifferenceFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DifferenceFunction::Subtraction => "sub",
            DifferenceFunction::WeightOfEvidence => "woe",
            DifferenceFunction::InfoDifference => "info",
        })
    }
}

fn clip(p: f64) -> f64 {
    p.clamp(EPSILON, 1.0 - EPSILON)
}

fn log2_odds(p: f64) -> f64 {
    (p / (1.0 - p)).log2()
}
