//! Runtime registry of classifier backends, keyed by spec scheme.
//!
//! A spec string is `<scheme>:<rest>`; the scheme picks the factory and the
//! rest is factory-specific. Builtin schemes:
//!
//! - `oracle:constant:<p0,p1,…>` | `oracle:area-fraction` | `oracle:two-blob`
//! - `external:<command with args>`
//! - `interchange:<model path>` (when built with the `interchange` feature)

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::synthetic::{AreaFractionOracle, ConstantOracle, OracleParams, TwoBlobOracle};
use super::{BackendKind, ClassifierHandle};

pub type BackendFactory = Box<dyn Fn(&str, &OracleParams) -> Result<ClassifierHandle> + Send + Sync>;

pub struct BackendRegistry {
    factories: BTreeMap<String, BackendFactory>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// Registry with every builtin backend installed.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("oracle", Box::new(make_oracle));
        reg.register("external", Box::new(make_external));
        #[cfg(feature = "interchange")]
        reg.register("interchange", Box::new(make_interchange));
        reg
    }

    pub fn register(&mut self, scheme: &str, factory: BackendFactory) {
        self.factories.insert(scheme.to_string(), factory);
    }

    pub fn schemes(&self) -> Vec<&str> {
        self.factories.keys().map(|s| s.as_str()).collect()
    }

    /// Instantiate a handle from a `<scheme>:<rest>` spec string.
    pub fn create(&self, spec: &str, params: &OracleParams) -> Result<ClassifierHandle> {
        let (scheme, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("classifier spec '{spec}' has no scheme")))?;
        let factory = self.factories.get(scheme).ok_or_else(|| {
            Error::invalid(format!(
                "unknown classifier scheme '{scheme}' (available: {})",
                self.schemes().join(", ")
            ))
        })?;
        factory(rest, params)
    }
}

fn make_oracle(rest: &str, params: &OracleParams) -> Result<ClassifierHandle> {
    let (kind, args) = match rest.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (rest, None),
    };
    let boxed: Box<dyn super::Classifier> = match kind {
        "constant" => {
            let args = args.ok_or_else(|| {
                Error::invalid("oracle:constant needs probabilities, e.g. oracle:constant:0.3,0.7")
            })?;
            let probs = args
                .split(',')
                .map(|s| s.trim().parse::<f32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::invalid(format!("bad constant probabilities: {e}")))?;
            Box::new(ConstantOracle::new(probs)?)
        }
        "area-fraction" => Box::new(AreaFractionOracle::from_params(params)?),
        "two-blob" => Box::new(TwoBlobOracle::from_params(params)?),
        other => {
            return Err(Error::invalid(format!(
                "unknown oracle kind '{other}' (constant|area-fraction|two-blob)"
            )))
        }
    };
    Ok(ClassifierHandle::new(BackendKind::Synthetic, boxed))
}

fn make_external(rest: &str, _params: &OracleParams) -> Result<ClassifierHandle> {
    let command: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
    super::external::open_external_announced(&command)
}

#[cfg(feature = "interchange")]
fn make_interchange(rest: &str, _params: &OracleParams) -> Result<ClassifierHandle> {
    super::interchange::open_interchange(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_schemes_present() {
        let reg = BackendRegistry::builtin();
        assert!(reg.schemes().contains(&"oracle"));
        assert!(reg.schemes().contains(&"external"));
    }

    #[test]
    fn create_oracles_from_specs() {
        let reg = BackendRegistry::builtin();
        let params = OracleParams::default();
        let c = reg.create("oracle:constant:0.25,0.75", &params).unwrap();
        assert_eq!(c.num_classes(), 2);
        let a = reg.create("oracle:area-fraction", &params).unwrap();
        assert_eq!(a.num_classes(), 2);
        let t = reg.create("oracle:two-blob", &params).unwrap();
        assert_eq!(t.num_classes(), 3);
    }

    #[test]
    fn bad_specs_are_rejected() {
        let reg = BackendRegistry::builtin();
        let params = OracleParams::default();
        assert!(reg.create("no-scheme", &params).is_err());
        assert!(reg.create("bogus:thing", &params).is_err());
        assert!(reg.create("oracle:unknown", &params).is_err());
        assert!(reg.create("oracle:constant:x,y", &params).is_err());
    }

    #[test]
    fn custom_scheme_registration() {
        let mut reg = BackendRegistry::empty();
        reg.register(
            "fixed",
            Box::new(|_rest, _p| {
                Ok(ClassifierHandle::new(
                    BackendKind::Synthetic,
                    Box::new(ConstantOracle::new(vec![0.5, 0.5]).unwrap()),
                ))
            }),
        );
        assert!(reg.create("fixed:", &OracleParams::default()).is_ok());
    }
}
