//! `key = value` model configuration files.
//!
//! ```text
//! # M/M/1 input
//! kind = spectrally-positive
//! lambda = 1
//! nu = 4
//! c = 1
//! ```
//!
//! `sigma > 0` selects linear Brownian motion, `lambda > 0` the compound
//! Poisson family with Exp(nu) jumps. `c` defaults to 1.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Family, LevyModel, Orientation};

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub kind: Orientation,
    pub sigma: f64,
    pub lambda: f64,
    pub nu: f64,
    pub c: f64,
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }

        let kind = match entries.remove("kind").as_deref() {
            Some("spectrally-negative") | Some("sn") => Orientation::SpectrallyNegative,
            Some("spectrally-positive") | Some("sp") => Orientation::SpectrallyPositive,
            Some(other) => return Err(Error::Config(format!("unknown kind `{other}`"))),
            None => return Err(Error::Config("missing key `kind`".into())),
        };
        let mut number = |key: &str, default: f64| -> Result<f64> {
            match entries.remove(key) {
                None => Ok(default),
                Some(v) => {
                    v.parse::<f64>().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}` as a number")))
                }
            }
        };
        let sigma = number("sigma", 0.0)?;
        let lambda = number("lambda", 0.0)?;
        let nu = number("nu", 0.0)?;
        let c = number("c", 1.0)?;
        if let Some(key) = entries.keys().next() {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        Ok(ModelConfig { kind, sigma, lambda, nu, c })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn family(&self) -> Result<Family> {
        match (self.sigma > 0.0, self.lambda > 0.0) {
            (true, false) => Ok(Family::Brownian { sigma: self.sigma, c: self.c }),
            (false, true) => Ok(Family::CompoundPoisson { c: self.c, lambda: self.lambda, nu: self.nu }),
            (true, true) => Err(Error::Config("Brownian component with jumps is not in the model catalog".into())),
            (false, false) => Err(Error::Config("either sigma or lambda must be positive".into())),
        }
    }

    pub fn build(&self) -> Result<LevyModel> {
        LevyModel::new(self.kind, self.family()?)
    }

    pub fn from_model(model: &LevyModel) -> Self {
        let kind = model.orientation();
        match model.family() {
            Family::Brownian { sigma, c } => ModelConfig { kind, sigma, lambda: 0.0, nu: 0.0, c },
            Family::CompoundPoisson { c, lambda, nu } => ModelConfig { kind, sigma: 0.0, lambda, nu, c },
        }
    }

    /// Canonical serialisation; `parse(render())` is the identity.
    pub fn render(&self) -> String {
        format!(
            "kind = {}\nsigma = {:?}\nlambda = {:?}\nnu = {:?}\nc = {:?}\n",
            self.kind.label(),
            self.sigma,
            self.lambda,
            self.nu,
            self.c
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_catalog_files() {
        let cfg = ModelConfig::parse("kind = spectrally-positive\nlambda = 1\nnu = 4 # service\n").unwrap();
        let model = cfg.build().unwrap();
        assert_eq!(model, LevyModel::mm1_input(1.0, 4.0).unwrap());
        let cfg = ModelConfig::parse("kind=sn\nsigma=1\nc=1").unwrap();
        assert_eq!(cfg.build().unwrap(), LevyModel::brownian(Orientation::SpectrallyNegative, 1.0, 1.0).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ModelConfig::parse("sigma = 1").is_err());
        assert!(ModelConfig::parse("kind = sn\nsigma = 1\nsigma = 2").is_err());
        assert!(ModelConfig::parse("kind = sn\nsigma = x").is_err());
        assert!(ModelConfig::parse("kind = sn\nsigma = 1\ndelta = 2").is_err());
        assert!(ModelConfig::parse("kind = sn\nsigma = 1\nlambda = 2\nnu = 1").unwrap().build().is_err());
        assert!(ModelConfig::parse("kind = both\nsigma = 1").is_err());
    }

    #[test]
    fn render_round_trips() {
        let cfg = ModelConfig::parse("kind = sn\nlambda = 3\nnu = 2\nc = 1").unwrap();
        assert_eq!(ModelConfig::parse(&cfg.render()).unwrap(), cfg);
        let model = cfg.build().unwrap();
        assert_eq!(ModelConfig::from_model(&model), cfg);
    }
}
