//! One-parameter sweeps and deterministic per-point seeding.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigErrors, ConfigFile, ConfigFileError, SimulationConfig};

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Critical distance, m.
    RC,
    Alpha1,
    /// Users per km².
    LambdaU,
    /// BSs per km².
    LambdaB,
    /// Carrier frequency, Hz.
    FC,
    NCoop,
    Theta,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::RC,
        Axis::Alpha1,
        Axis::LambdaU,
        Axis::LambdaB,
        Axis::FC,
        Axis::NCoop,
        Axis::Theta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Axis::RC => "r_c",
            Axis::Alpha1 => "alpha1",
            Axis::LambdaU => "lambda_u",
            Axis::LambdaB => "lambda_b",
            Axis::FC => "f_c",
            Axis::NCoop => "n_coop",
            Axis::Theta => "theta",
        }
    }

    /// Writes `value` into the matching config file field.
    pub fn apply(&self, file: &mut ConfigFile, value: f64) -> Result<(), SweepError> {
        match self {
            Axis::RC => file.r_c_m = value,
            Axis::Alpha1 => file.alpha1 = value,
            Axis::LambdaU => file.lambda_u_per_km2 = value,
            Axis::LambdaB => file.lambda_b_per_km2 = value,
            Axis::FC => file.f_c_hz = value,
            Axis::Theta => file.theta = value,
            Axis::NCoop => {
                if value < 1.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
                    return Err(SweepError::NonIntegerCoop(value));
                }
                file.n_coop = value as usize;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| SweepError::UnknownAxis(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Single,
    Noncoherent,
    Coherent,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Single, Scheme::Noncoherent, Scheme::Coherent];
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
    #[error("sweep has no values")]
    NoValues,
    #[error("sweep values must be strictly increasing or strictly decreasing")]
    Unordered,
    #[error("n_coop sweep value {0} is not a positive integer")]
    NonIntegerCoop(f64),
    #[error("sweep lists no schemes")]
    NoSchemes,
    #[error("point {index} ({axis} = {value}): {source}")]
    Point {
        index: usize,
        axis: Axis,
        value: f64,
        #[source]
        source: ConfigErrors,
    },
    #[error(transparent)]
    File(#[from] ConfigFileError),
}

/// A base config, one axis, and the values it takes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub base: ConfigFile,
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub config: SimulationConfig,
}

impl SweepSpec {
    pub fn new(base: ConfigFile, axis: Axis, values: Vec<f64>) -> Self {
        Self {
            axis,
            values,
            schemes: all_schemes(),
            base,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = toml::from_str(text).map_err(ConfigFileError::from)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sweep spec serializes to TOML")
    }

    fn check(&self) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::NoValues);
        }
        if self.schemes.is_empty() {
            return Err(SweepError::NoSchemes);
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(SweepError::Unordered);
        }
        Ok(())
    }

    pub fn includes(&self, scheme: Scheme) -> bool {
        self.schemes.contains(&scheme)
    }

    /// Validated configs, one per value, each with its own derived seed.
    pub fn points(&self) -> Result<Vec<SweepPoint>, SweepError> {
        self.check()?;
        self.values
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                let mut file = self.base.clone();
                self.axis.apply(&mut file, value)?;
                file.seed = point_seed(self.base.seed, index);
                let config = file.validate().map_err(|source| SweepError::Point {
                    index,
                    axis: self.axis,
                    value,
                    source,
                })?;
                Ok(SweepPoint { index, value, config })
            })
            .collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sweep point `index` of a sweep with base seed `base`.
pub fn point_seed(base: u64, index: usize) -> u64 {
    splitmix64(splitmix64(base) ^ splitmix64(index as u64 ^ 0x5EED_0000_0000_0000))
}
