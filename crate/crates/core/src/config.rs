//! Simulation parameters.
//!
//! Two representations live here. [`ConfigFile`] is the flat, user-facing
//! file format (densities per km², speed in km/h). [`SimulationConfig`] is the
//! validated form used by the simulator (densities per m², speed in m/s, with
//! derived quantities such as the path loss continuity constant filled in).
//! A validated config keeps the file it was built from so that serializing it
//! again is bit-exact.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Propagation speed used for the Doppler shift, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

const PER_KM2_TO_PER_M2: f64 = 1e-6;
const KMH_TO_MS: f64 = 1.0 / 3.6;

/// BS-to-user density ratio below which the deployment is reported as only
/// weakly ultra-dense.
pub const UDN_RATIO_WARNING: f64 = 2.0;

/// A single violated invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} must be finite (got {value})")]
    NotFinite { field: &'static str, value: f64 },
    #[error("alpha1 must be at least 2 (got {0})")]
    Alpha1BelowTwo(f64),
    #[error("alpha1 exceeds alpha2 ({alpha1} > {alpha2})")]
    Alpha1ExceedsAlpha2 { alpha1: f64, alpha2: f64 },
    #[error("r_b must be positive (got {0})")]
    NonPositiveBoundedRadius(f64),
    #[error("r_b exceeds r_c ({r_b} > {r_c})")]
    BoundedRadiusExceedsCritical { r_b: f64, r_c: f64 },
    #[error("p_t must be positive (got {0})")]
    NonPositiveTransmitPower(f64),
    #[error("theta must lie in (0, 1] (got {0})")]
    ThetaOutOfRange(f64),
    #[error("{field} must be non-negative (got {value})")]
    Negative { field: &'static str, value: f64 },
    #[error("{field} must be positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("lambda_b must exceed lambda_u ({lambda_b} <= {lambda_u} per km2)")]
    NotUltraDense { lambda_b: f64, lambda_u: f64 },
    #[error("{0} must be at least 1")]
    Zero(&'static str),
}

/// Every invariant violation found in one config, in check order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

/// Failure to obtain a validated config from text or disk.
#[derive(Debug, Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad override `{0}`: expected key=value")]
    Override(String),
    #[error("invalid config:\n{0}")]
    Invalid(#[from] ConfigErrors),
}

/// Bounded dual-slope path loss parameters. The continuity constant `tau` is
/// derived and cannot be set directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    alpha1: f64,
    alpha2: f64,
    r_b: f64,
    r_c: f64,
    tau: f64,
}

impl PathLossParams {
    pub fn new(alpha1: f64, alpha2: f64, r_b: f64, r_c: f64) -> Result<Self, ConfigErrors> {
        let mut errors = Vec::new();
        check_path_loss(alpha1, alpha2, r_b, r_c, &mut errors);
        if errors.is_empty() {
            Ok(Self::new_unchecked(alpha1, alpha2, r_b, r_c))
        } else {
            Err(ConfigErrors(errors))
        }
    }

    fn new_unchecked(alpha1: f64, alpha2: f64, r_b: f64, r_c: f64) -> Self {
        Self {
            alpha1,
            alpha2,
            r_b,
            r_c,
            tau: r_c.powf(alpha2 - alpha1),
        }
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    /// Radius of the bounded (constant-loss) region, meters.
    pub fn r_b(&self) -> f64 {
        self.r_b
    }

    /// Critical distance separating near- and far-field, meters.
    pub fn r_c(&self) -> f64 {
        self.r_c
    }

    /// `r_c^(alpha2 - alpha1)`.
    pub fn tau(&self) -> f64 {
        self.tau
    }
}

fn check_path_loss(alpha1: f64, alpha2: f64, r_b: f64, r_c: f64, errors: &mut Vec<ConfigError>) {
    let before = errors.len();
    for (field, value) in [("alpha1", alpha1), ("alpha2", alpha2), ("r_b_m", r_b), ("r_c_m", r_c)] {
        if !value.is_finite() {
            errors.push(ConfigError::NotFinite { field, value });
        }
    }
    if errors.len() > before {
        return;
    }
    if alpha1 < 2.0 {
        errors.push(ConfigError::Alpha1BelowTwo(alpha1));
    }
    if alpha1 > alpha2 {
        errors.push(ConfigError::Alpha1ExceedsAlpha2 { alpha1, alpha2 });
    }
    if r_b <= 0.0 {
        errors.push(ConfigError::NonPositiveBoundedRadius(r_b));
    }
    if r_b > r_c {
        errors.push(ConfigError::BoundedRadiusExceedsCritical { r_b, r_c });
    }
}

/// Power consumption model: active BSs draw `p_t`, dormant ones `theta * p_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerParams {
    pub p_t: f64,
    pub theta: f64,
}

impl PowerParams {
    /// Sleep-mode power.
    pub fn p_s(&self) -> f64 {
        self.theta * self.p_t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    Perfect,
    Delayed,
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Delayed => "delayed",
        })
    }
}

/// Channel state knowledge at the transmitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsiParams {
    pub mode: CsiMode,
    /// Carrier frequency, Hz.
    pub f_c: f64,
    /// User speed, m/s.
    pub v: f64,
    /// Feedback delay, s.
    pub t_s: f64,
    /// Propagation speed, m/s.
    pub c: f64,
}

impl CsiParams {
    /// Doppler shift `f_c * v / c`, Hz.
    pub fn doppler(&self) -> f64 {
        self.f_c * self.v / self.c
    }
}

/// The on-disk config format. Keys are flat; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
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
    #[serde(serialize_with = "ser_seed", deserialize_with = "de_seed")]
    pub seed: u64,
    pub sir_cap: f64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            lambda_b_per_km2: 4000.0,
            lambda_u_per_km2: 200.0,
            n_coop: 5,
            alpha1: 2.0,
            alpha2: 4.0,
            r_b_m: 1.0,
            r_c_m: 70.0,
            p_t_w: 1.0,
            theta: 0.5,
            csi_mode: CsiMode::Perfect,
            f_c_hz: 2e9,
            v_kmh: 3.0,
            t_s_s: 0.01,
            window_side_m: 1000.0,
            n_drops: 1000,
            seed: 42,
            sir_cap: 1e10,
        }
    }
}

// TOML integers are signed 64-bit; seeds above i64::MAX are written as strings.
pub(crate) fn ser_seed<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
    match i64::try_from(*seed) {
        Ok(v) => s.serialize_i64(v),
        Err(_) => s.serialize_str(&seed.to_string()),
    }
}

fn de_seed<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Seed {
        Int(i64),
        Text(String),
    }
    match Seed::deserialize(d)? {
        Seed::Int(v) => u64::try_from(v).map_err(serde::de::Error::custom),
        Seed::Text(t) => t.trim().parse().map_err(serde::de::Error::custom),
    }
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, ConfigFileError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config file fields are always representable in TOML")
    }

    /// Applies one `key=value` override. The value is read as a TOML value,
    /// falling back to a bare string (so `csi_mode=delayed` works unquoted).
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigFileError> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigFileError::Override(assignment.to_string()))?;
        let key = key.trim();
        let raw = raw.trim();
        if key.is_empty() {
            return Err(ConfigFileError::Override(assignment.to_string()));
        }
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("parsed single key"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let mut table = toml::Table::try_from(&*self).expect("config file serializes to a table");
        table.insert(key.to_string(), value);
        *self = table.try_into()?;
        Ok(())
    }

    pub fn validate(&self) -> Result<SimulationConfig, ConfigErrors> {
        validate(self)
    }
}

/// A validated, immutable parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// BSs per m².
    pub lambda_b: f64,
    /// Users per m².
    pub lambda_u: f64,
    pub n_coop: usize,
    pub path_loss: PathLossParams,
    pub power: PowerParams,
    pub csi: CsiParams,
    /// Side of the square torus, m.
    pub window_side: f64,
    pub n_drops: usize,
    pub seed: u64,
    pub sir_cap: f64,
    file: ConfigFile,
}

impl SimulationConfig {
    /// The external form this config was validated from.
    pub fn file(&self) -> &ConfigFile {
        &self.file
    }

    pub fn to_toml(&self) -> String {
        self.file.to_toml()
    }

    /// Non-fatal observations about the parameter regime.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ratio = self.lambda_b / self.lambda_u;
        if ratio < UDN_RATIO_WARNING {
            out.push(format!(
                "lambda_b/lambda_u = {ratio:.3} is below {UDN_RATIO_WARNING}; the network is barely ultra-dense"
            ));
        }
        out
    }

    /// Returns a copy with a different seed, keeping the file form in sync.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.seed = seed;
        c.file.seed = seed;
        c
    }
}

impl Default for SimulationConfig {
    fn default() -> Self {
        validate(&ConfigFile::default()).expect("default config is valid")
    }
}

/// Checks every invariant of `file`, collecting all violations, and converts
/// to internal units.
pub fn validate(file: &ConfigFile) -> Result<SimulationConfig, ConfigErrors> {
    let mut errors = Vec::new();

    let finite = [
        ("lambda_b_per_km2", file.lambda_b_per_km2),
        ("lambda_u_per_km2", file.lambda_u_per_km2),
        ("p_t_w", file.p_t_w),
        ("theta", file.theta),
        ("f_c_hz", file.f_c_hz),
        ("v_kmh", file.v_kmh),
        ("t_s_s", file.t_s_s),
        ("window_side_m", file.window_side_m),
    ];
    let mut all_finite = true;
    for (field, value) in finite {
        if !value.is_finite() {
            errors.push(ConfigError::NotFinite { field, value });
            all_finite = false;
        }
    }
    // sir_cap may be +inf only in the sense of "no cap"; NaN is never allowed.
    if file.sir_cap.is_nan() {
        errors.push(ConfigError::NotFinite { field: "sir_cap", value: file.sir_cap });
        all_finite = false;
    }

    if all_finite {
        if file.lambda_u_per_km2 <= 0.0 {
            errors.push(ConfigError::NonPositive {
                field: "lambda_u_per_km2",
                value: file.lambda_u_per_km2,
            });
        }
        if file.lambda_b_per_km2 <= file.lambda_u_per_km2 {
            errors.push(ConfigError::NotUltraDense {
                lambda_b: file.lambda_b_per_km2,
                lambda_u: file.lambda_u_per_km2,
            });
        }
        if file.p_t_w <= 0.0 {
            errors.push(ConfigError::NonPositiveTransmitPower(file.p_t_w));
        }
        if !(file.theta > 0.0 && file.theta <= 1.0) {
            errors.push(ConfigError::ThetaOutOfRange(file.theta));
        }
        for (field, value) in [("f_c_hz", file.f_c_hz), ("v_kmh", file.v_kmh), ("t_s_s", file.t_s_s)] {
            if value < 0.0 {
                errors.push(ConfigError::Negative { field, value });
            }
        }
        if file.window_side_m <= 0.0 {
            errors.push(ConfigError::NonPositive {
                field: "window_side_m",
                value: file.window_side_m,
            });
        }
        if file.sir_cap <= 0.0 {
            errors.push(ConfigError::NonPositive { field: "sir_cap", value: file.sir_cap });
        }
    }
    check_path_loss(file.alpha1, file.alpha2, file.r_b_m, file.r_c_m, &mut errors);
    if file.n_coop == 0 {
        errors.push(ConfigError::Zero("n_coop"));
    }
    if file.n_drops == 0 {
        errors.push(ConfigError::Zero("n_drops"));
    }

    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }

    Ok(SimulationConfig {
        lambda_b: file.lambda_b_per_km2 * PER_KM2_TO_PER_M2,
        lambda_u: file.lambda_u_per_km2 * PER_KM2_TO_PER_M2,
        n_coop: file.n_coop,
        path_loss: PathLossParams::new_unchecked(file.alpha1, file.alpha2, file.r_b_m, file.r_c_m),
        power: PowerParams {
            p_t: file.p_t_w,
            theta: file.theta,
        },
        csi: CsiParams {
            mode: file.csi_mode,
            f_c: file.f_c_hz,
            v: file.v_kmh * KMH_TO_MS,
            t_s: file.t_s_s,
            c: SPEED_OF_LIGHT,
        },
        window_side: file.window_side_m,
        n_drops: file.n_drops,
        seed: file.seed,
        sir_cap: file.sir_cap,
        file: file.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tau_from_critical_distance() {
        let c = ConfigFile {
            alpha1: 2.0,
            alpha2: 4.0,
            r_c_m: 70.0,
            ..Default::default()
        };
        let cfg = c.validate().unwrap();
        assert_eq!(cfg.path_loss.tau(), 4900.0);
    }

    #[test]
    fn alpha_order_violation() {
        let c = ConfigFile {
            alpha1: 3.0,
            alpha2: 2.0,
            ..Default::default()
        };
        let errs = c.validate().unwrap_err();
        assert!(errs.0.contains(&ConfigError::Alpha1ExceedsAlpha2 { alpha1: 3.0, alpha2: 2.0 }));
        assert!(errs.to_string().contains("alpha1 exceeds alpha2"));
    }

    #[test]
    fn density_units() {
        let cfg = ConfigFile {
            lambda_b_per_km2: 4000.0,
            lambda_u_per_km2: 200.0,
            ..Default::default()
        }
        .validate()
        .unwrap();
        assert!((cfg.lambda_b - 4e-3).abs() < 1e-18);
        assert!((cfg.lambda_u - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn speed_units() {
        let cfg = ConfigFile {
            v_kmh: 36.0,
            ..Default::default()
        }
        .validate()
        .unwrap();
        assert!((cfg.csi.v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn errors_are_collected() {
        let c = ConfigFile {
            alpha1: 5.0,
            alpha2: 4.0,
            theta: 0.0,
            n_coop: 0,
            n_drops: 0,
            lambda_u_per_km2: 5000.0,
            window_side_m: -1.0,
            ..Default::default()
        };
        let errs = c.validate().unwrap_err().0;
        assert_eq!(errs.len(), 6, "{errs:?}");
        assert!(errs.contains(&ConfigError::Zero("n_coop")));
        assert!(errs.contains(&ConfigError::Zero("n_drops")));
        assert!(errs.contains(&ConfigError::ThetaOutOfRange(0.0)));
    }

    #[test]
    fn radius_ordering() {
        let errs = PathLossParams::new(2.0, 4.0, 10.0, 5.0).unwrap_err().0;
        assert_eq!(
            errs,
            vec![ConfigError::BoundedRadiusExceedsCritical { r_b: 10.0, r_c: 5.0 }]
        );
        assert!(PathLossParams::new(2.0, 4.0, 0.0, 5.0).is_err());
        assert!(PathLossParams::new(1.5, 4.0, 1.0, 5.0).is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        let err = ConfigFile::from_toml("lambda_b_per_km2 = 4000.0\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn missing_keys_take_defaults() {
        let c = ConfigFile::from_toml("n_coop = 3\ncsi_mode = \"delayed\"\n").unwrap();
        assert_eq!(c.n_coop, 3);
        assert_eq!(c.csi_mode, CsiMode::Delayed);
        assert_eq!(c.lambda_b_per_km2, 4000.0);
    }

    #[test]
    fn overrides() {
        let mut c = ConfigFile::default();
        c.set("r_c_m=150").unwrap();
        c.set("csi_mode=delayed").unwrap();
        c.set(" theta = 0.25 ").unwrap();
        c.set("seed=18446744073709551615").unwrap();
        assert_eq!(c.r_c_m, 150.0);
        assert_eq!(c.csi_mode, CsiMode::Delayed);
        assert_eq!(c.theta, 0.25);
        assert_eq!(c.seed, u64::MAX);
        assert!(c.set("bogus=1").is_err());
        assert!(c.set("no_equals").is_err());
        assert!(c.set("n_coop=many").is_err());
    }

    #[test]
    fn large_seed_round_trips() {
        let c = ConfigFile {
            seed: u64::MAX - 7,
            ..Default::default()
        };
        assert_eq!(ConfigFile::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn weak_udn_warning() {
        let cfg = ConfigFile {
            lambda_b_per_km2: 300.0,
            lambda_u_per_km2: 200.0,
            ..Default::default()
        }
        .validate()
        .unwrap();
        assert_eq!(cfg.warnings().len(), 1);
        assert!(SimulationConfig::default().warnings().is_empty());
    }

    fn arb_file() -> impl Strategy<Value = ConfigFile> {
        (
            (1.0f64..1e6, 0.01f64..0.99, 1usize..12),
            (2.0f64..5.0, 0.0f64..3.0, 0.01f64..5.0, 1.0f64..400.0),
            (1e-3f64..10.0, 1e-3f64..=1.0),
            (any::<bool>(), 0.0f64..1e11, 0.0f64..200.0, 0.0f64..1.0),
            (1.0f64..5000.0, 1usize..100_000, any::<u64>(), 1.0f64..1e12),
        )
            .prop_map(|(dens, pl, pw, csi, run)| ConfigFile {
                lambda_b_per_km2: dens.0,
                lambda_u_per_km2: dens.0 * dens.1,
                n_coop: dens.2,
                alpha1: pl.0,
                alpha2: pl.0 + pl.1,
                r_b_m: pl.2,
                r_c_m: pl.2 + pl.3,
                p_t_w: pw.0,
                theta: pw.1,
                csi_mode: if csi.0 { CsiMode::Delayed } else { CsiMode::Perfect },
                f_c_hz: csi.1,
                v_kmh: csi.2,
                t_s_s: csi.3,
                window_side_m: run.0,
                n_drops: run.1,
                seed: run.2,
                sir_cap: run.3,
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(file in arb_file()) {
            let cfg = file.validate().unwrap();
            let text = cfg.to_toml();
            let back = ConfigFile::from_toml(&text).unwrap().validate().unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.lambda_b.to_bits(), cfg.lambda_b.to_bits());
            prop_assert_eq!(back.path_loss.tau().to_bits(), cfg.path_loss.tau().to_bits());
        }

        #[test]
        fn tau_keeps_path_loss_continuous(file in arb_file()) {
            let pl = file.validate().unwrap().path_loss;
            let near = pl.r_c().powf(-pl.alpha1());
            let far = pl.tau() * pl.r_c().powf(-pl.alpha2());
            prop_assert!(((near - far) / near).abs() <= 1e-12, "{near} vs {far}");
        }
    }
}
