//! Parameter sweeps behind each reproduced figure.
//!
//! Fixed parameters follow the figure captions. The swept ranges are chosen
//! to bracket the stated operating points and are recorded in every manifest
//! as artifact choices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigFile, CsiMode, SimulationConfig};
use crate::sweep::{Axis, Scheme, SweepError, SweepSpec};

/// Drops per point unless overridden.
pub const DEFAULT_PRESET_DROPS: usize = 1000;
/// Base seed of the first sweep in every preset.
pub const PRESET_SEED: u64 = 42;
/// The λ_b sweep reaches 10⁶/km², so it runs on a smaller torus.
pub const FIG6_WINDOW_M: f64 = 400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            Figure::Fig3 => "SE and gain versus critical distance",
            Figure::Fig4 => "SE and gain versus near-field exponent",
            Figure::Fig5 => "gain versus user density",
            Figure::Fig6 => "gain versus BS density",
            Figure::Fig7 => "coherent gain versus carrier frequency with delayed CSI",
            Figure::Fig8 => "EE gain versus cooperation size for several sleep power ratios",
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown figure `{0}` (expected fig3 … fig8)")]
pub struct UnknownFigure(pub String);

impl FromStr for Figure {
    type Err = UnknownFigure;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("fig").unwrap_or(&t);
        match t {
            "3" => Ok(Figure::Fig3),
            "4" => Ok(Figure::Fig4),
            "5" => Ok(Figure::Fig5),
            "6" => Ok(Figure::Fig6),
            "7" => Ok(Figure::Fig7),
            "8" => Ok(Figure::Fig8),
            _ => Err(UnknownFigure(s.to_string())),
        }
    }
}

/// λ_b = 4000/km², λ_u = 200/km², [α1, α2] = [2, 4], R_c = 70 m, N = 5.
pub fn figure_base(n_drops: usize) -> ConfigFile {
    ConfigFile {
        lambda_b_per_km2: 4000.0,
        lambda_u_per_km2: 200.0,
        n_coop: 5,
        alpha1: 2.0,
        alpha2: 4.0,
        r_c_m: 70.0,
        n_drops,
        seed: PRESET_SEED,
        ..ConfigFile::default()
    }
}

pub const FIG3_RC: [f64; 8] = [10.0, 30.0, 50.0, 70.0, 90.0, 110.0, 130.0, 150.0];
pub const FIG4_ALPHA1: [f64; 3] = [2.0, 3.0, 4.0];
pub const FIG5_LAMBDA_U: [f64; 5] = [50.0, 100.0, 200.0, 400.0, 800.0];
pub const FIG6_LAMBDA_B: [f64; 7] = [1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6];
pub const FIG7_FC: [f64; 6] = [0.5e9, 1e9, 2e9, 3e9, 4e9, 6e9];
pub const FIG8_N: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
pub const FIG8_THETA: [f64; 3] = [0.1, 0.5, 0.9];

/// The sweeps whose rows make up `fig`'s CSV, in output order.
pub fn figure_sweeps(fig: Figure, n_drops: usize) -> Vec<SweepSpec> {
    let base = figure_base(n_drops);
    let gain_only = vec![Scheme::Single, Scheme::Coherent];
    match fig {
        Figure::Fig3 => vec![SweepSpec::new(base, Axis::RC, FIG3_RC.to_vec())],
        Figure::Fig4 => vec![SweepSpec::new(base, Axis::Alpha1, FIG4_ALPHA1.to_vec())],
        Figure::Fig5 => vec![SweepSpec {
            schemes: gain_only,
            ..SweepSpec::new(base, Axis::LambdaU, FIG5_LAMBDA_U.to_vec())
        }],
        Figure::Fig6 => {
            let base = ConfigFile {
                window_side_m: FIG6_WINDOW_M,
                ..base
            };
            vec![SweepSpec {
                schemes: gain_only,
                ..SweepSpec::new(base, Axis::LambdaB, FIG6_LAMBDA_B.to_vec())
            }]
        }
        Figure::Fig7 => {
            let base = ConfigFile {
                csi_mode: CsiMode::Delayed,
                v_kmh: 3.0,
                t_s_s: 0.01,
                ..base
            };
            vec![SweepSpec {
                schemes: gain_only,
                ..SweepSpec::new(base, Axis::FC, FIG7_FC.to_vec())
            }]
        }
        Figure::Fig8 => FIG8_THETA
            .iter()
            .enumerate()
            .map(|(k, &theta)| {
                let base = ConfigFile {
                    theta,
                    seed: PRESET_SEED + k as u64,
                    ..base.clone()
                };
                SweepSpec {
                    schemes: gain_only.clone(),
                    ..SweepSpec::new(base, Axis::NCoop, FIG8_N.to_vec())
                }
            })
            .collect(),
    }
}

/// Every config `fig` evaluates, flattened in output order.
pub fn paper_preset(fig: Figure, n_drops: usize) -> Result<Vec<SimulationConfig>, SweepError> {
    let mut out = Vec::new();
    for spec in figure_sweeps(fig, n_drops) {
        out.extend(spec.points()?.into_iter().map(|p| p.config));
    }
    Ok(out)
}
