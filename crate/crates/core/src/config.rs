//! Flat `key = value` text format with `#` comments, plus numeric formatting
//! shared by every emitter.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::covariance::CovarianceTriple;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("ConfigSyntax: line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("DuplicateKey: `{0}` appears twice")]
    Duplicate(String),
    #[error("UnknownKey: `{0}` is not recognized here")]
    Unknown(String),
    #[error("MissingKey: `{0}` is required")]
    Missing(String),
    #[error("BadValue: `{key}` = `{value}`: {msg}")]
    BadValue { key: String, value: String, msg: String },
}

impl ConfigError {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigError::Syntax { .. } => "ConfigSyntax",
            ConfigError::Duplicate(_) => "DuplicateKey",
            ConfigError::Unknown(_) => "UnknownKey",
            ConfigError::Missing(_) => "MissingKey",
            ConfigError::BadValue { .. } => "BadValue",
        }
    }
}

/// Parsed key/value pairs. Keys are case-sensitive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, msg: "expected `key = value`".into() });
            };
            let key = k.trim();
            let value = v.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ConfigError::Syntax { line: i + 1, msg: format!("bad key `{key}`") });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::Duplicate(key.to_string()));
            }
        }
        Ok(ConfigMap { entries })
    }

    pub fn insert(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Rejects any key outside `allowed`.
    pub fn ensure_only(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(ConfigError::Unknown(k.clone())),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.raw(key).ok_or_else(|| ConfigError::Missing(key.into()))?;
        parse_f64(key, v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        if self.contains(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.raw(key).ok_or_else(|| ConfigError::Missing(key.into()))?;
        v.parse::<u64>().map_err(|e| ConfigError::BadValue {
            key: key.into(),
            value: v.into(),
            msg: e.to_string(),
        })
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        if self.contains(key) {
            self.u64(key)
        } else {
            Ok(default)
        }
    }

    /// Comma-separated list of decimals.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let v = self.raw(key).ok_or_else(|| ConfigError::Missing(key.into()))?;
        v.split(',').map(|s| parse_f64(key, s.trim())).collect()
    }

    /// Reads the six covariance keys.
    pub fn covariance(&self) -> Result<CovarianceTriple, ConfigError> {
        Ok(CovarianceTriple::new(
            self.f64("sigma_x")?,
            self.f64("sigma_y")?,
            self.f64("sigma_z")?,
            self.f64("sigma_xy")?,
            self.f64("sigma_xz")?,
            self.f64("sigma_yz")?,
        ))
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let bad = |msg: String| ConfigError::BadValue { key: key.into(), value: v.into(), msg };
    let x = v.parse::<f64>().map_err(|e| bad(e.to_string()))?;
    if !x.is_finite() {
        return Err(bad("not a finite number".into()));
    }
    Ok(x)
}

pub const COVARIANCE_KEYS: [&str; 6] = ["sigma_x", "sigma_y", "sigma_z", "sigma_xy", "sigma_xz", "sigma_yz"];

/// Renders a covariance block in the config format.
pub fn covariance_block(sigma: &CovarianceTriple) -> String {
    let mut out = String::new();
    for (k, v) in COVARIANCE_KEYS.iter().zip([
        sigma.sigma_x,
        sigma.sigma_y,
        sigma.sigma_z,
        sigma.sigma_xy,
        sigma.sigma_xz,
        sigma.sigma_yz,
    ]) {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// `value` to `digits` significant digits, `%g` style: fixed notation for
/// decimal exponents in `[-5, digits)`, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(value: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, value)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Twelve significant digits, the precision of every emitted rate.
pub fn fmt12(value: f64) -> String {
    fmt_sig(value, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let m = ConfigMap::parse("# header\n\nsigma_x = 1.5  # trailing\n grid = 0, 0.5,50\n").unwrap();
        assert_eq!(m.f64("sigma_x").unwrap(), 1.5);
        assert_eq!(m.f64_list("grid").unwrap(), vec![0.0, 0.5, 50.0]);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(ConfigMap::parse("sigma_x 1"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(ConfigMap::parse("a = 1\na = 2"), Err(ConfigError::Duplicate(_))));
        assert!(matches!(ConfigMap::parse("bad key = 1"), Err(ConfigError::Syntax { .. })));
    }

    #[test]
    fn unknown_keys_rejected() {
        let m = ConfigMap::parse("sigma_x = 1\nsigma_w = 2").unwrap();
        assert_eq!(m.ensure_only(&["sigma_x"]), Err(ConfigError::Unknown("sigma_w".into())));
    }

    #[test]
    fn bad_values() {
        let m = ConfigMap::parse("a = abc\nb = inf").unwrap();
        assert!(matches!(m.f64("a"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(m.f64("b"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(m.f64("c"), Err(ConfigError::Missing(_))));
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(0.5), "0.5");
        assert_eq!(fmt12(50.0), "50");
        assert_eq!(fmt12(0.305_650_514_517_438_1), "0.305650514517");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(1.234e-7), "1.234e-07");
        assert_eq!(fmt12(-2.5e15), "-2.5e+15");
        assert_eq!(fmt12(123456789012.4), "123456789012");
    }
}
