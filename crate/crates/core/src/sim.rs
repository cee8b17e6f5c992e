//! The per-drop pipeline and the parallel drop loop.
//!
//! Each drop owns a ChaCha stream selected by its index, so results do not
//! depend on how drops are spread over threads; summaries are reduced in
//! drop order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{approx_delta_se, ApproxInputs};
use crate::channel::{correlation_coefficient, realize_channels, Correlation, PathLossLaw};
use crate::config::SimulationConfig;
use crate::geometry::{nearest_bs_overall, sample_deployment, GeometryError, VoronoiCells};
use crate::link::compute_link_budgets;
use crate::metrics::{aggregate, spectral_efficiency, ApproxTally, DropSummary, MetricsError, MetricsReport};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("drop {drop}: {source}")]
    Geometry {
        drop: usize,
        #[source]
        source: GeometryError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// The random stream for drop `index` of a run seeded with `seed`.
pub fn drop_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Runs one drop: deployment, both assignments, fading, link budgets.
pub fn simulate_drop(
    config: &SimulationConfig,
    correlation: &Correlation,
    rng: &mut ChaCha8Rng,
) -> Result<DropSummary, GeometryError> {
    let dep = sample_deployment(config, rng)?;
    let law = PathLossLaw::new(config.path_loss);
    let cells = VoronoiCells::build(&dep);
    let baseline = cells.cooperation(1);
    let coop = cells.cooperation(config.n_coop);
    let channels = realize_channels(&dep, &coop, &law, correlation.rho, rng);
    let budgets = compute_link_budgets(&baseline, &coop, &channels, config.sir_cap);

    let nearest = nearest_bs_overall(&dep);
    let mut s = DropSummary {
        users: dep.user_positions.len(),
        eligible: budgets.len(),
        empty_cell_users: coop.empty_cells().count(),
        active_single: baseline.active_set.len(),
        active_coop: coop.active_set.len(),
        resampled: dep.resampled,
        rho_clamped: correlation.clamped,
        ..Default::default()
    };
    let mut approx = ApproxTally::default();
    for lb in &budgets {
        let (se_o, se_nj, se_cj) = (
            spectral_efficiency(lb.sir_single),
            spectral_efficiency(lb.sir_nj),
            spectral_efficiency(lb.sir_cj),
        );
        s.se_single += se_o;
        s.se_nj += se_nj;
        s.se_cj += se_cj;
        if lb.interference_free() {
            s.zero_interference_users += 1;
        }
        s.degenerate_precoders += lb.degenerate_precoders;
        let serving = baseline.coop_sets[lb.user][0];
        if nearest[lb.user] != Some(serving) {
            s.baseline_mismatch_users += 1;
        }

        let set = &coop.coop_sets[lb.user];
        let mags = set
            .iter()
            .map(|&b| channels.h_true[channels.index(b, lb.user)].norm())
            .collect();
        let inputs = ApproxInputs::new(coop.coop_distances[lb.user].clone(), mags, config.path_loss)
            .expect("cooperation sets are non-empty and sorted by distance");
        match approx_delta_se(&inputs) {
            Ok(delta) => {
                let sim = se_cj - se_o;
                approx.users += 1;
                approx.delta_sim += sim;
                approx.delta_approx += delta;
                approx.abs_diff += (delta - sim).abs();
            }
            Err(_) => approx.out_of_regime += 1,
        }
    }
    s.approx = approx;
    Ok(s)
}

/// Runs every drop of `config` on up to `jobs` threads, in drop order.
pub fn run_drops(config: &SimulationConfig, jobs: usize) -> Result<Vec<DropSummary>, SimError> {
    let correlation = correlation_coefficient(&config.csi);
    let one = |i: usize| {
        simulate_drop(config, &correlation, &mut drop_rng(config.seed, i))
            .map_err(|source| SimError::Geometry { drop: i, source })
    };
    if jobs <= 1 {
        return (0..config.n_drops).map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    pool.install(|| (0..config.n_drops).into_par_iter().map(one).collect())
}

/// Simulates `config` and aggregates the result.
pub fn run(config: &SimulationConfig, jobs: usize) -> Result<MetricsReport, SimError> {
    let drops = run_drops(config, jobs)?;
    Ok(aggregate(&drops, config)?)
}
