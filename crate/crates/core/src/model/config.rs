//! System definition files.
//!
//! A system file is TOML with four sections. Unknown keys are rejected.
//!
//! ```toml
//! [forcing]
//! dim = 1
//! envelope_F = 3.0      # |f_nu| <= envelope_F * exp(-envelope_xi |nu|_1)
//! envelope_xi = 1.0
//! truncated = false     # optional; true widens forcing bounds by the envelope tail
//!
//! [forcing.coeffs]      # "nu_1,...,nu_d" = [re, im]  or  "re,im"
//! "0" = [2.5, 0.0]
//! "1" = [0.0, -0.75]    # conjugate partners (here "-1") are filled in if omitted
//!
//! [freq]
//! omega = [1.0]
//! C0 = 1.0
//! tau = 0.0
//!
//! [nonlinearity]
//! kind = "even"         # "odd" | "even" | "polynomial"
//! p = 1                 # odd/even monomials
//! # coeffs = [a1, a2, a3]   # polynomial: a_1 .. a_(2p+1)
//!
//! [params]
//! gamma = 9.0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::forcing::{ForcingSpectrum, FrequencyVector, Nu};
use super::nonlinearity::Nonlinearity;
use super::system::SystemConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub forcing: ForcingSection,
    pub freq: FreqSection,
    pub nonlinearity: NonlinearitySection,
    pub params: ParamsSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSection {
    pub dim: usize,
    #[serde(rename = "envelope_F")]
    pub envelope_f: f64,
    pub envelope_xi: f64,
    #[serde(default)]
    pub truncated: bool,
    pub coeffs: BTreeMap<String, CoeffValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffValue {
    Pair([f64; 2]),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreqSection {
    pub omega: Vec<f64>,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySection {
    pub kind: String,
    pub p: Option<u32>,
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub gamma: f64,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub p: Option<u32>,
}

fn parse_nu(key: &str, dim: usize) -> Result<Nu> {
    let nu: std::result::Result<Vec<i32>, _> = key.split(',').map(|s| s.trim().parse::<i32>()).collect();
    let nu = nu.map_err(|_| Error::Config(format!("forcing.coeffs: cannot parse lattice point \"{key}\"")))?;
    if nu.len() != dim {
        return Err(Error::Config(format!("forcing.coeffs: \"{key}\" has {} components, dim = {dim}", nu.len())));
    }
    Ok(nu)
}

fn parse_value(key: &str, v: &CoeffValue) -> Result<Complex64> {
    match v {
        CoeffValue::Pair([re, im]) => Ok(Complex64::new(*re, *im)),
        CoeffValue::Text(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            let bad = || Error::Config(format!("forcing.coeffs.\"{key}\": expected \"re,im\", got \"{s}\""));
            if parts.len() != 2 {
                return Err(bad());
            }
            let re = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
            let im = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, im))
        }
    }
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn build(&self, ov: Overrides) -> Result<SystemConfig> {
        let f = &self.forcing;
        let mut entries = Vec::new();
        for (k, v) in &f.coeffs {
            entries.push((parse_nu(k, f.dim)?, parse_value(k, v)?));
        }
        let mut forcing = ForcingSpectrum::new(f.dim, entries, f.envelope_f, f.envelope_xi)?;
        forcing.truncated = f.truncated;
        let freq = FrequencyVector::new(self.freq.omega.clone(), self.freq.c0, self.freq.tau)?;
        let n = &self.nonlinearity;
        let p = ov.p.or(n.p);
        let g = match n.kind.as_str() {
            "odd" => Nonlinearity::odd(p.ok_or_else(|| Error::Config("nonlinearity.p is required".into()))?)?,
            "even" => Nonlinearity::even(p.ok_or_else(|| Error::Config("nonlinearity.p is required".into()))?)?,
            "polynomial" => {
                let c = n.coeffs.clone().ok_or_else(|| Error::Config("nonlinearity.coeffs is required".into()))?;
                Nonlinearity::polynomial(c)?
            }
            other => {
                return Err(Error::Config(format!(
                    "nonlinearity.kind: unknown kind \"{other}\" (expected odd, even or polynomial)"
                )))
            }
        };
        SystemConfig::new(forcing, freq, g, ov.gamma.unwrap_or(self.params.gamma))
    }
}

/// Parses and builds in one go.
pub fn load_system(path: &Path, ov: Overrides) -> Result<SystemConfig> {
    SystemFile::load(path)?.build(ov)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EVEN_PERIODIC: &str = r#"
[forcing]
dim = 1
envelope_F = 3.0
envelope_xi = 1.0
[forcing.coeffs]
"0" = [2.5, 0.0]
"1" = "0.0,-0.75"

[freq]
omega = [1.0]
C0 = 1.0
tau = 0.0

[nonlinearity]
kind = "even"
p = 1

[params]
gamma = 9.0
"#;

    #[test]
    fn parses_even_periodic_file() {
        let cfg = SystemFile::parse(EVEN_PERIODIC).unwrap().build(Overrides::default()).unwrap();
        assert_eq!(cfg.gamma, 9.0);
        assert_eq!(cfg.forcing.coeffs().len(), 3);
        assert!((cfg.forcing_at(std::f64::consts::FRAC_PI_2) - 4.0).abs() < 1e-14);
        let cfg = SystemFile::parse(EVEN_PERIODIC).unwrap().build(Overrides { gamma: Some(3.0), p: Some(2) }).unwrap();
        assert_eq!(cfg.gamma, 3.0);
        assert_eq!(cfg.g, Nonlinearity::EvenMonomial { p: 2 });
    }

    #[test]
    fn unknown_key_is_named_with_position() {
        let text = EVEN_PERIODIC.replace("gamma = 9.0", "gamma = 9.0\ndamping = 2.0");
        let err = SystemFile::parse(&text).unwrap_err().to_string();
        assert!(err.contains("damping"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn bad_lattice_point() {
        let text = EVEN_PERIODIC.replace("\"1\" = ", "\"1,2\" = ");
        assert!(SystemFile::parse(&text).unwrap().build(Overrides::default()).is_err());
    }
}
