//! Flat key-value run configuration.
//!
//! A config file holds `key = value` lines (`#` comments allowed); the CLI
//! `--set key=value` flags override file entries. All physical inputs are in
//! period units; the Bloch momentum is given directly as kx.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::params::{Numerics, StructureParams};

/// Declarative run configuration: structure plus command-specific fields.
#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    /// Parse a config file body; reports the offending line on error.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    location: format!("{origin}:{}", lineno + 1),
                    message: format!("expected `key = value`, got `{raw}`"),
                });
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Apply a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::Config {
                location: "--set".into(),
                message: format!("expected key=value, got `{assignment}`"),
            });
        };
        self.values
            .insert(key.trim().to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config {
                location: key.to_string(),
                message: format!("not a number: `{v}`"),
            }),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config {
                location: key.to_string(),
                message: format!("not an integer: `{v}`"),
            }),
        }
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim().parse::<f64>().map_err(|_| Error::Config {
                        location: key.to_string(),
                        message: format!("not a number in list: `{x}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()
                .map(Some),
        }
    }

    /// Structure parameters with defaults from the headline geometry.
    pub fn structure(&self) -> Result<StructureParams> {
        StructureParams::new(
            self.f64_or("radius", 0.1)?,
            self.f64_or("eps_c", 2.0)?,
            self.f64_or("chi_c", 0.0)?,
            self.f64_or("kx", 0.0)?,
        )
    }

    pub fn numerics(&self) -> Result<Numerics> {
        let d = Numerics::default();
        Ok(Numerics {
            lattice_tol: self.f64_or("lattice_tol", d.lattice_tol)?,
            threshold_margin: self.f64_or("threshold_margin", d.threshold_margin)?,
            root_tol_k2: self.f64_or("root_tol_k2", d.root_tol_k2)?,
            root_residual: self.f64_or("root_residual", d.root_residual)?,
            fd_step_rel: self.f64_or("fd_step_rel", d.fd_step_rel)?,
            scan_points: self.usize_or("scan_points", d.scan_points)?,
            sh_det_threshold: self.f64_or("sh_det_threshold", d.sh_det_threshold)?,
            zeta_inv_threshold: self.f64_or("zeta_inv_threshold", d.zeta_inv_threshold)?,
        })
    }

    /// Echo of the effective configuration, deterministic order.
    pub fn echo(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}
