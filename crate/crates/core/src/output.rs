//! CSV result rows, sweep execution, and reproduction manifests.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::channel::correlation_coefficient;
use crate::config::{CsiMode, SimulationConfig};
use crate::metrics::MetricsReport;
use crate::sim::{run, SimError};
use crate::sweep::{Scheme, SweepError, SweepSpec};

/// Version tag written into every row.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

const PER_M2_TO_PER_KM2: f64 = 1e6;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("write failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Where a row sits in a sweep. Single runs use the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RowLabel {
    pub sweep: usize,
    pub axis: Option<String>,
    pub value: Option<f64>,
    pub point: Option<usize>,
}

/// One CSV row. Column order is field order; see the README for units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub sweep: usize,
    pub axis: Option<String>,
    pub value: Option<f64>,
    pub point: Option<usize>,

    pub lambda_b_per_km2: f64,
    pub lambda_u_per_km2: f64,
    pub n_coop: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub r_b_m: f64,
    pub r_c_m: f64,
    pub p_t_w: f64,
    pub theta: f64,
    pub csi_mode: CsiMode,
    pub f_c_hz: f64,
    pub v_kmh: f64,
    pub t_s_s: f64,
    pub window_side_m: f64,
    pub n_drops: usize,
    pub seed: u64,
    pub sir_cap: f64,

    pub rho: f64,
    pub rho_raw: f64,
    pub n_users: usize,

    pub se_single: Option<f64>,
    pub se_single_stderr: Option<f64>,
    pub se_nj: Option<f64>,
    pub se_nj_stderr: Option<f64>,
    pub se_cj: Option<f64>,
    pub se_cj_stderr: Option<f64>,
    pub gain_nj: Option<f64>,
    pub gain_nj_stderr: Option<f64>,
    pub gain_cj: Option<f64>,
    pub gain_cj_stderr: Option<f64>,

    pub n_effective: f64,
    pub p_area_single_w_per_km2: f64,
    pub p_area_w_per_km2: f64,
    pub p_area_realized_w_per_km2: f64,
    pub ee_single: Option<f64>,
    pub ee_coop: Option<f64>,
    pub ee_gain: Option<f64>,
    pub ee_gain_stderr: Option<f64>,
    pub ee_gain_realized: Option<f64>,

    pub zero_interference_drops: usize,
    pub empty_cell_users: usize,
    pub degenerate_precoders: usize,
    pub baseline_mismatch_drops: usize,
    pub resampled_drops: usize,
    pub rho_clamped_drops: usize,

    pub delta_se_sim: Option<f64>,
    pub delta_se_approx: Option<f64>,
    pub approx_abs_diff: Option<f64>,
    pub approx_users: usize,

    pub wall_clock_s: f64,
    pub version: &'static str,
}

impl ResultRow {
    pub fn new(
        label: RowLabel,
        config: &SimulationConfig,
        report: &MetricsReport,
        schemes: &[Scheme],
        wall_clock_s: f64,
    ) -> Self {
        let f = config.file();
        let corr = correlation_coefficient(&config.csi);
        let single = schemes.contains(&Scheme::Single);
        let nj = schemes.contains(&Scheme::Noncoherent);
        let cj = schemes.contains(&Scheme::Coherent);
        let pick = |on: bool, v: f64| on.then_some(v);
        let finite = |on: bool, v: f64| (on && v.is_finite()).then_some(v);
        let r = report;
        Self {
            sweep: label.sweep,
            axis: label.axis,
            value: label.value,
            point: label.point,

            lambda_b_per_km2: f.lambda_b_per_km2,
            lambda_u_per_km2: f.lambda_u_per_km2,
            n_coop: f.n_coop,
            alpha1: f.alpha1,
            alpha2: f.alpha2,
            r_b_m: f.r_b_m,
            r_c_m: f.r_c_m,
            p_t_w: f.p_t_w,
            theta: f.theta,
            csi_mode: f.csi_mode,
            f_c_hz: f.f_c_hz,
            v_kmh: f.v_kmh,
            t_s_s: f.t_s_s,
            window_side_m: f.window_side_m,
            n_drops: f.n_drops,
            seed: f.seed,
            sir_cap: f.sir_cap,

            rho: corr.rho,
            rho_raw: corr.raw,
            n_users: r.n_users,

            se_single: pick(single, r.se_single.mean),
            se_single_stderr: pick(single, r.se_single.stderr),
            se_nj: pick(nj, r.se_nj.mean),
            se_nj_stderr: pick(nj, r.se_nj.stderr),
            se_cj: pick(cj, r.se_cj.mean),
            se_cj_stderr: pick(cj, r.se_cj.stderr),
            gain_nj: pick(nj, r.gain_nj.mean),
            gain_nj_stderr: pick(nj, r.gain_nj.stderr),
            gain_cj: pick(cj, r.gain_cj.mean),
            gain_cj_stderr: pick(cj, r.gain_cj.stderr),

            n_effective: r.n_effective,
            p_area_single_w_per_km2: r.p_area_single * PER_M2_TO_PER_KM2,
            p_area_w_per_km2: r.p_area.formula * PER_M2_TO_PER_KM2,
            p_area_realized_w_per_km2: r.p_area.realized * PER_M2_TO_PER_KM2,
            ee_single: pick(single, r.ee_single),
            ee_coop: pick(cj, r.ee_coop),
            ee_gain: pick(cj, r.ee_gain.mean),
            ee_gain_stderr: pick(cj, r.ee_gain.stderr),
            ee_gain_realized: pick(cj, r.ee_gain_realized),

            zero_interference_drops: r.zero_interference_drops,
            empty_cell_users: r.empty_cell_users,
            degenerate_precoders: r.degenerate_precoders,
            baseline_mismatch_drops: r.baseline_mismatch_drops,
            resampled_drops: r.resampled_drops,
            rho_clamped_drops: r.rho_clamped_drops,

            delta_se_sim: finite(cj, r.delta_se_sim),
            delta_se_approx: finite(cj, r.delta_se_approx),
            approx_abs_diff: finite(cj, r.approx_abs_diff),
            approx_users: r.approx_users,

            wall_clock_s,
            version: VERSION,
        }
    }
}

/// Whether rows carry measured run time. Disable for byte-identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timing {
    Measure,
    Zero,
}

/// Simulates `config` and wraps the result in a row.
pub fn run_row(
    label: RowLabel,
    config: &SimulationConfig,
    schemes: &[Scheme],
    jobs: usize,
    timing: Timing,
) -> Result<(ResultRow, MetricsReport), SimError> {
    let start = Instant::now();
    let report = run(config, jobs)?;
    let secs = match timing {
        Timing::Measure => start.elapsed().as_secs_f64(),
        Timing::Zero => 0.0,
    };
    Ok((ResultRow::new(label, config, &report, schemes, secs), report))
}

/// Runs every point of `spec` in axis order. `sweep` labels the rows.
pub fn run_sweep(spec: &SweepSpec, sweep: usize, jobs: usize, timing: Timing) -> Result<Vec<ResultRow>, OutputError> {
    let mut rows = Vec::new();
    for p in spec.points()? {
        let label = RowLabel {
            sweep,
            axis: Some(spec.axis.name().to_string()),
            value: Some(p.value),
            point: Some(p.index),
        };
        rows.push(run_row(label, &p.config, &spec.schemes, jobs, timing)?.0);
    }
    Ok(rows)
}

/// Writes a header and `rows` as RFC 4180 CSV.
pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(csv_header())?;
    }
    w.flush()?;
    Ok(())
}

/// Column names in output order.
pub fn csv_header() -> Vec<String> {
    let label = RowLabel::default();
    let cfg = SimulationConfig::default();
    let report = MetricsReport::default();
    let row = ResultRow::new(label, &cfg, &report, &Scheme::ALL, 0.0);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(&row).expect("row serializes");
    let bytes = w.into_inner().expect("in-memory writer");
    let text = String::from_utf8(bytes).expect("csv is utf-8");
    let header = text.lines().next().expect("header line");
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(header.as_bytes())
        .records()
        .next()
        .expect("one record")
        .expect("valid header")
        .iter()
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Serialize)]
struct ManifestPoint {
    point: usize,
    value: f64,
    #[serde(serialize_with = "crate::config::ser_seed")]
    seed: u64,
}

#[derive(Debug, Serialize)]
struct ManifestSweep {
    sweep: usize,
    spec: SweepSpec,
    points: Vec<ManifestPoint>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    figure: &'a str,
    title: &'a str,
    version: &'a str,
    csv: String,
    note: &'a str,
    sweeps: Vec<ManifestSweep>,
}

/// TOML record of every parameter and seed behind a figure's CSV.
pub fn manifest(figure: &str, title: &str, specs: &[SweepSpec]) -> Result<String, OutputError> {
    let sweeps = specs
        .iter()
        .enumerate()
        .map(|(sweep, spec)| {
            let points = spec
                .points()?
                .into_iter()
                .map(|p| ManifestPoint {
                    point: p.index,
                    value: p.value,
                    seed: p.config.seed,
                })
                .collect();
            Ok(ManifestSweep {
                sweep,
                spec: spec.clone(),
                points,
            })
        })
        .collect::<Result<Vec<_>, OutputError>>()?;
    let m = Manifest {
        figure,
        title,
        version: VERSION,
        csv: format!("{figure}.csv"),
        note: "fixed parameters follow the figure captions; swept value ranges are artifact choices",
        sweeps,
    };
    Ok(toml::to_string(&m).expect("manifest serializes to TOML"))
}
