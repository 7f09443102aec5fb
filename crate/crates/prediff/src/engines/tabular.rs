//! Generic tabular prediction difference over discrete feature domains.
//!
//! Feature exclusion is simulated by marginalizing the classifier output over
//! the feature's domain, weighted by the feature's prior.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

use super::diff::DifferenceFunction;

/// A black-box classifier over feature vectors.
pub trait TabularClassifier: Send + Sync {
    fn num_classes(&self) -> usize;
    fn predict_raw(&self, values: &[f64]) -> Result<Vec<f64>>;
}

/// Counting wrapper, mirroring the image-classifier handle.
pub struct TabularHandle {
    inner: Box<dyn TabularClassifier>,
    calls: AtomicU64,
}

impl TabularHandle {
    pub fn new(inner: Box<dyn TabularClassifier>) -> Self {
        Self { inner, calls: AtomicU64::new(0) }
    }

    pub fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    pub fn predict(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let probs = self.inner.predict_raw(values)?;
        if probs.len() != self.inner.num_classes() {
            return Err(Error::Protocol(format!(
                "expected {} class probabilities, got {}",
                self.inner.num_classes(),
                probs.len()
            )));
        }
        Ok(probs)
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

/// Wrap a closure as a tabular classifier.
pub fn tabular_fn<F>(num_classes: usize, f: F) -> TabularHandle
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    struct FnClassifier<F> {
        num_classes: usize,
        f: F,
    }
    impl<F: Fn(&[f64]) -> Vec<f64> + Send + Sync> TabularClassifier for FnClassifier<F> {
        fn num_classes(&self) -> usize {
            self.num_classes
        }
        fn predict_raw(&self, values: &[f64]) -> Result<Vec<f64>> {
            Ok((self.f)(values))
        }
    }
    TabularHandle::new(Box::new(FnClassifier { num_classes, f }))
}

/// A feature-vector instance with finite per-feature domains and priors.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularInstance {
    values: Vec<f64>,
    domains: Vec<Vec<f64>>,
    priors: Vec<Vec<f64>>,
}

impl TabularInstance {
    pub fn new(values: Vec<f64>, domains: Vec<Vec<f64>>, priors: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != domains.len() || values.len() != priors.len() {
            return Err(Error::invalid("values, domains and priors must align"));
        }
        for (i, ((v, domain), prior)) in values.iter().zip(&domains).zip(&priors).enumerate() {
            if domain.is_empty() {
                return Err(Error::invalid(format!("feature {i} has an empty domain")));
            }
            if !domain.contains(v) {
                return Err(Error::invalid(format!("feature {i} value {v} outside its domain")));
            }
            if prior.len() != domain.len() {
                return Err(Error::invalid(format!(
                    "feature {i}: prior length {} does not match domain size {}",
                    prior.len(),
                    domain.len()
                )));
            }
            let sum: f64 = prior.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || prior.iter().any(|p| *p < 0.0) {
                return Err(Error::invalid(format!("feature {i}: prior is not a distribution")));
            }
        }
        Ok(Self { values, domains, priors })
    }

    pub fn feature_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domains(&self) -> &[Vec<f64>] {
        &self.domains
    }

    pub fn priors(&self) -> &[Vec<f64>] {
        &self.priors
    }
}

/// Per-feature saliency: `s_i = g(p(y=c|x), p(y=c|x_{\i}))` with the excluded
/// prediction marginalized over the feature's prior.
///
/// Makes exactly `1 + Σ_i |domain_i|` classifier calls.
pub fn tabular_pd(
    f: &TabularHandle,
    x: &TabularInstance,
    class: usize,
    g: DifferenceFunction,
) -> Result<Vec<f64>> {
    if class >= f.num_classes() {
        return Err(Error::invalid(format!(
            "class {class} out of range for {} classes",
            f.num_classes()
        )));
    }
    let baseline = f.predict(x.values())?[class];
    let mut saliency = Vec::with_capacity(x.feature_count());
    let mut probe = x.values().to_vec();
    for i in 0..x.feature_count() {
        let original = probe[i];
        let mut excluded = 0.0f64;
        for (value, prior) in x.domains()[i].iter().zip(&x.priors()[i]) {
            probe[i] = *value;
            excluded += prior * f.predict(&probe)?[class];
        }
        probe[i] = original;
        saliency.push(g.apply(baseline, excluded));
    }
    Ok(saliency)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_validation() {
        // value outside its domain
        assert!(TabularInstance::new(
            vec![2.0],
            vec![vec![0.0, 1.0]],
            vec![vec![0.5, 0.5]]
        )
        .is_err());
        // prior length mismatch
        assert!(TabularInstance::new(
            vec![1.0],
            vec![vec![0.0, 1.0]],
            vec![vec![1.0]]
        )
        .is_err());
        // prior does not sum to one
        assert!(TabularInstance::new(
            vec![1.0],
            vec![vec![0.0, 1.0]],
            vec![vec![0.6, 0.6]]
        )
        .is_err());
    }

    #[test]
    fn ignored_feature_scores_zero() {
        // classifier depends only on feature 0
        let f = tabular_fn(2, |v| {
            let p = if v[0] > 0.5 { 0.9 } else { 0.1 };
            vec![1.0 - p, p]
        });
        let x = TabularInstance::new(
            vec![1.0, 0.0],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        )
        .unwrap();
        let s = tabular_pd(&f, &x, 1, DifferenceFunction::Subtraction).unwrap();
        assert!(s[1].abs() < 1e-12, "constant-in-feature saliency must vanish");
    }

    #[test]
    fn binary_feature_hand_example() {
        // p(class 1) = 0.9 when x_0 = a_1 else 0.1; prior (0.5, 0.5);
        // marginalized prediction = 0.5, saliency = 0.9 - 0.5 = 0.4
        let f = tabular_fn(2, |v| {
            let p = if v[0] == 0.0 { 0.9 } else { 0.1 };
            vec![1.0 - p, p]
        });
        let x = TabularInstance::new(
            vec![0.0],
            vec![vec![0.0, 1.0]],
            vec![vec![0.5, 0.5]],
        )
        .unwrap();
        let s = tabular_pd(&f, &x, 1, DifferenceFunction::Subtraction).unwrap();
        assert!((s[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn call_count_is_one_plus_domain_sizes() {
        let f = tabular_fn(2, |_| vec![0.5, 0.5]);
        let x = TabularInstance::new(
            vec![0.0, 0.0, 0.0],
            vec![
                vec![0.0, 1.0],
                vec![0.0, 1.0, 2.0],
                vec![0.0, 1.0, 2.0, 3.0],
            ],
            vec![
                vec![0.5, 0.5],
                vec![0.25, 0.25, 0.5],
                vec![0.25; 4],
            ],
        )
        .unwrap();
        tabular_pd(&f, &x, 0, DifferenceFunction::Subtraction).unwrap();
        assert_eq!(f.call_count(), 1 + 2 + 3 + 4);
    }

    #[test]
    fn class_out_of_range_is_rejected() {
        let f = tabular_fn(2, |_| vec![0.5, 0.5]);
        let x = TabularInstance::new(vec![0.0], vec![vec![0.0]], vec![vec![1.0]]).unwrap();
        assert!(tabular_pd(&f, &x, 2, DifferenceFunction::Subtraction).is_err());
    }
}
