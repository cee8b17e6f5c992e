//! Spectral efficiency, cooperation gains, area power consumption and
//! network energy efficiency, aggregated over drops.
//!
//! Means are pooled over every eligible user of every drop. Uncertainty
//! comes from treating each drop as one batch: users in a drop share
//! interference, drops are independent. Ratios (gains) use the standard
//! ratio-estimator variance over those batches.

use thiserror::Error;

use crate::config::SimulationConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("gain undefined: baseline spectral efficiency is zero")]
    UndefinedGain,
    #[error("no eligible users across {0} drops")]
    NoEligibleUsers(usize),
    #[error("realized active BS density {active:e}/m2 exceeds lambda_b {lambda_b:e}/m2")]
    ActiveDensityExceedsBs { active: f64, lambda_b: f64 },
}

/// `log2(1 + sir)`.
pub fn spectral_efficiency(sir: f64) -> f64 {
    sir.ln_1p() / std::f64::consts::LN_2
}

/// `(se_coop - se_base) / se_base`.
pub fn se_gain(se_coop: f64, se_base: f64) -> Result<f64, MetricsError> {
    if se_base == 0.0 {
        return Err(MetricsError::UndefinedGain);
    }
    Ok((se_coop - se_base) / se_base)
}

/// `P_t (n λ_u + θ (λ_b - n λ_u))`: power per unit area with `n` active BSs
/// per user. Units follow the densities (W/m² for per-m² inputs).
pub fn power_per_area(p_t: f64, theta: f64, lambda_b: f64, lambda_u: f64, n: f64) -> f64 {
    let active = n * lambda_u;
    p_t * (active + theta * (lambda_b - active))
}

/// Area power for the cooperation scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AreaPower {
    /// With the configured cooperation size `N`, W/m².
    pub formula: f64,
    /// With the measured mean number of active BSs per user, W/m².
    pub realized: f64,
}

pub fn area_power(config: &SimulationConfig, n_effective: f64) -> Result<AreaPower, MetricsError> {
    let active = n_effective * config.lambda_u;
    if active > config.lambda_b {
        return Err(MetricsError::ActiveDensityExceedsBs {
            active,
            lambda_b: config.lambda_b,
        });
    }
    let p = &config.power;
    Ok(AreaPower {
        formula: power_per_area(p.p_t, p.theta, config.lambda_b, config.lambda_u, config.n_coop as f64),
        realized: power_per_area(p.p_t, p.theta, config.lambda_b, config.lambda_u, n_effective),
    })
}

/// Area spectral efficiency over area power: `λ_u · se / P_A`.
pub fn energy_efficiency(se_mean: f64, lambda_u: f64, p_area: f64) -> f64 {
    lambda_u * se_mean / p_area
}

/// Running tallies for one Monte Carlo drop.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropSummary {
    pub users: usize,
    /// Users with at least one BS in their cell.
    pub eligible: usize,
    pub empty_cell_users: usize,
    pub se_single: f64,
    pub se_nj: f64,
    pub se_cj: f64,
    /// Active BSs with one BS per user.
    pub active_single: usize,
    /// Active BSs under cooperation.
    pub active_coop: usize,
    pub zero_interference_users: usize,
    pub degenerate_precoders: usize,
    /// Users whose nearest BS overall lies in another user's cell.
    pub baseline_mismatch_users: usize,
    pub resampled: usize,
    pub rho_clamped: bool,
    pub approx: ApproxTally,
}

/// Closed-form approximation against simulated SE difference, coherent JT.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApproxTally {
    pub users: usize,
    pub delta_sim: f64,
    pub delta_approx: f64,
    pub abs_diff: f64,
    /// Users skipped because their nearest BS is inside the bounded region.
    pub out_of_regime: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsReport {
    pub n_drops: usize,
    pub n_users: usize,
    pub se_single: Estimate,
    pub se_nj: Estimate,
    pub se_cj: Estimate,
    pub gain_nj: Estimate,
    pub gain_cj: Estimate,
    /// Mean active BSs per user under cooperation.
    pub n_effective: f64,
    /// Baseline area power, one active BS per user, W/m².
    pub p_area_single: f64,
    pub p_area: AreaPower,
    pub ee_single: f64,
    pub ee_coop: f64,
    pub ee_gain: Estimate,
    pub ee_gain_realized: f64,
    pub zero_interference_drops: usize,
    pub empty_cell_users: usize,
    pub degenerate_precoders: usize,
    pub baseline_mismatch_drops: usize,
    pub resampled_drops: usize,
    pub rho_clamped_drops: usize,
    pub delta_se_sim: f64,
    pub delta_se_approx: f64,
    pub approx_abs_diff: f64,
    pub approx_users: usize,
}

fn batch_variance_factor(d: usize) -> f64 {
    if d > 1 {
        d as f64 / (d as f64 - 1.0)
    } else {
        0.0
    }
}

/// Pooled mean `Σ num / Σ den` with its batch-means standard error.
fn ratio_estimate<F, G>(drops: &[DropSummary], num: F, den: G) -> Estimate
where
    F: Fn(&DropSummary) -> f64,
    G: Fn(&DropSummary) -> f64,
{
    let total_num: f64 = drops.iter().map(&num).sum();
    let total_den: f64 = drops.iter().map(&den).sum();
    let mean = total_num / total_den;
    let ss: f64 = drops
        .iter()
        .map(|d| {
            let r = num(d) - mean * den(d);
            r * r
        })
        .sum();
    Estimate {
        mean,
        stderr: (batch_variance_factor(drops.len()) * ss).sqrt() / total_den,
    }
}

/// Reduces drop summaries, in the order given, to one report.
pub fn aggregate(drops: &[DropSummary], config: &SimulationConfig) -> Result<MetricsReport, MetricsError> {
    let n_users: usize = drops.iter().map(|d| d.eligible).sum();
    if n_users == 0 {
        return Err(MetricsError::NoEligibleUsers(drops.len()));
    }
    let eligible = |d: &DropSummary| d.eligible as f64;
    let se_single = ratio_estimate(drops, |d| d.se_single, eligible);
    let se_nj = ratio_estimate(drops, |d| d.se_nj, eligible);
    let se_cj = ratio_estimate(drops, |d| d.se_cj, eligible);
    if se_single.mean == 0.0 {
        return Err(MetricsError::UndefinedGain);
    }

    let gain = |ratio: Estimate, se: &Estimate| -> Result<Estimate, MetricsError> {
        Ok(Estimate {
            mean: se_gain(se.mean, se_single.mean)?,
            stderr: ratio.stderr,
        })
    };
    let gain_nj = gain(ratio_estimate(drops, |d| d.se_nj, |d| d.se_single), &se_nj)?;
    let gain_cj = gain(ratio_estimate(drops, |d| d.se_cj, |d| d.se_single), &se_cj)?;

    let total_users: usize = drops.iter().map(|d| d.users).sum();
    let active_coop: usize = drops.iter().map(|d| d.active_coop).sum();
    let active_single: usize = drops.iter().map(|d| d.active_single).sum();
    let n_effective = active_coop as f64 / total_users as f64;
    let n_effective_single = active_single as f64 / total_users as f64;

    let p = &config.power;
    let p_area_single = power_per_area(p.p_t, p.theta, config.lambda_b, config.lambda_u, 1.0);
    let p_area_single_realized =
        power_per_area(p.p_t, p.theta, config.lambda_b, config.lambda_u, n_effective_single);
    let p_area = area_power(config, n_effective)?;

    let ee_single = energy_efficiency(se_single.mean, config.lambda_u, p_area_single);
    let ee_coop = energy_efficiency(se_cj.mean, config.lambda_u, p_area.formula);
    let power_ratio = p_area_single / p_area.formula;
    let ee_gain = Estimate {
        mean: ee_coop / ee_single,
        stderr: gain_cj.stderr * power_ratio,
    };
    let ee_gain_realized = energy_efficiency(se_cj.mean, config.lambda_u, p_area.realized)
        / energy_efficiency(se_single.mean, config.lambda_u, p_area_single_realized);

    let approx_users: usize = drops.iter().map(|d| d.approx.users).sum();
    let approx_mean = |f: fn(&ApproxTally) -> f64| {
        if approx_users == 0 {
            f64::NAN
        } else {
            drops.iter().map(|d| f(&d.approx)).sum::<f64>() / approx_users as f64
        }
    };

    Ok(MetricsReport {
        n_drops: drops.len(),
        n_users,
        se_single,
        se_nj,
        se_cj,
        gain_nj,
        gain_cj,
        n_effective,
        p_area_single,
        p_area,
        ee_single,
        ee_coop,
        ee_gain,
        ee_gain_realized,
        zero_interference_drops: drops.iter().filter(|d| d.zero_interference_users > 0).count(),
        empty_cell_users: drops.iter().map(|d| d.empty_cell_users).sum(),
        degenerate_precoders: drops.iter().map(|d| d.degenerate_precoders).sum(),
        baseline_mismatch_drops: drops.iter().filter(|d| d.baseline_mismatch_users > 0).count(),
        resampled_drops: drops.iter().filter(|d| d.resampled > 0).count(),
        rho_clamped_drops: drops.iter().filter(|d| d.rho_clamped).count(),
        delta_se_sim: approx_mean(|a| a.delta_sim),
        delta_se_approx: approx_mean(|a| a.delta_approx),
        approx_abs_diff: approx_mean(|a| a.abs_diff),
        approx_users,
    })
}
