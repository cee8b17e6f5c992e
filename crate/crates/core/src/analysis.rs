//! Closed-form approximation of the coherent cooperation gain.
//!
//! With SIR ≫ 1 and interference growing linearly in the number of active
//! BSs, the SE difference reduces to `log2(S^J / (N S^o))`. These functions
//! are diagnostics only; reported SE always comes from exact SIRs.

use thiserror::Error;

use crate::config::PathLossParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("nearest cooperating BS at {d1} m is inside the bounded region (r_b = {r_b} m)")]
    BoundedRegion { d1: f64, r_b: f64 },
    #[error("no cooperating BSs")]
    Empty,
    #[error("distances and fading magnitudes differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("distances must be sorted ascending")]
    Unsorted,
    #[error("nearest BS has zero fading magnitude")]
    ZeroBaseline,
    #[error("baseline spectral efficiency must be positive (got {0})")]
    NonPositiveBaseline(f64),
    #[error("cooperating BS at {d} m lies beyond the smallest critical distance {r_c} m")]
    OutsideNearField { d: f64, r_c: f64 },
    #[error("need at least one critical distance")]
    NoCriticalDistances,
}

/// Geometry and fading of one user's cooperation set.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxInputs {
    distances: Vec<f64>,
    fading_mags: Vec<f64>,
    k_near: usize,
    law: PathLossParams,
}

impl ApproxInputs {
    pub fn new(distances: Vec<f64>, fading_mags: Vec<f64>, law: PathLossParams) -> Result<Self, AnalysisError> {
        if distances.len() != fading_mags.len() {
            return Err(AnalysisError::LengthMismatch(distances.len(), fading_mags.len()));
        }
        if distances.is_empty() {
            return Err(AnalysisError::Empty);
        }
        if distances.windows(2).any(|w| w[0] > w[1]) {
            return Err(AnalysisError::Unsorted);
        }
        // Near-field membership is inclusive at r_c, like the path loss law.
        let k_near = distances.iter().filter(|&&d| d <= law.r_c()).count();
        Ok(Self {
            distances,
            fading_mags,
            k_near,
            law,
        })
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn fading_mags(&self) -> &[f64] {
        &self.fading_mags
    }

    /// Number of cooperating BSs within the critical distance.
    pub fn k_near(&self) -> usize {
        self.k_near
    }

    pub fn law(&self) -> &PathLossParams {
        &self.law
    }

    pub fn n(&self) -> usize {
        self.distances.len()
    }
}

/// `log2(S^J / (N S^o))` with near-field amplitudes `|h| d^(-α1/2)`,
/// far-field ones `|h| τ^(1/2) d^(-α2/2)`, and `S^o = |h_1|² d_1^(-α1)`.
pub fn approx_delta_se(inputs: &ApproxInputs) -> Result<f64, AnalysisError> {
    let law = &inputs.law;
    let d1 = inputs.distances[0];
    if d1 <= law.r_b() {
        return Err(AnalysisError::BoundedRegion { d1, r_b: law.r_b() });
    }
    let h1 = inputs.fading_mags[0];
    if h1 == 0.0 {
        return Err(AnalysisError::ZeroBaseline);
    }
    let sqrt_tau = law.tau().sqrt();
    let amplitude: f64 = inputs
        .distances
        .iter()
        .zip(&inputs.fading_mags)
        .enumerate()
        .map(|(j, (&d, &h))| {
            if j < inputs.k_near {
                h * d.powf(-law.alpha1() / 2.0)
            } else {
                h * sqrt_tau * d.powf(-law.alpha2() / 2.0)
            }
        })
        .sum();
    let baseline = h1 * h1 * d1.powf(-law.alpha1());
    Ok((amplitude * amplitude / (inputs.n() as f64 * baseline)).log2())
}

/// Approximate SE gain relative to a baseline SE.
pub fn approx_gain(inputs: &ApproxInputs, se_baseline: f64) -> Result<f64, AnalysisError> {
    if se_baseline.is_nan() || se_baseline <= 0.0 {
        return Err(AnalysisError::NonPositiveBaseline(se_baseline));
    }
    Ok(approx_delta_se(inputs)? / se_baseline)
}

/// With every cooperating BS in the near field, the approximate SE
/// difference does not depend on the critical distance. Evaluates it for each
/// of `r_c_values` and reports whether all agree to 1e-12 relative.
pub fn rc_independence_check(
    distances: &[f64],
    fading_mags: &[f64],
    alpha1: f64,
    alpha2: f64,
    r_b: f64,
    r_c_values: &[f64],
) -> Result<bool, AnalysisError> {
    let min_rc = r_c_values
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
        .ok_or(AnalysisError::NoCriticalDistances)?;
    if let Some(&d) = distances.iter().find(|&&d| d > min_rc) {
        return Err(AnalysisError::OutsideNearField { d, r_c: min_rc });
    }
    let mut reference: Option<f64> = None;
    let mut agree = true;
    for &r_c in r_c_values {
        let law = PathLossParams::new(alpha1, alpha2, r_b, r_c)
            .expect("critical distances must form valid path loss parameters");
        let delta = approx_delta_se(&ApproxInputs::new(distances.to_vec(), fading_mags.to_vec(), law)?)?;
        match reference {
            None => reference = Some(delta),
            Some(r) => {
                let scale = r.abs().max(delta.abs());
                if scale > 0.0 && (r - delta).abs() > 1e-12 * scale {
                    agree = false;
                }
            }
        }
    }
    Ok(agree)
}
