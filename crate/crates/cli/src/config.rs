//! Experiment configuration: a flat `key = value` text format with strict
//! unknown-key rejection, merged with command-line overrides.
//!
//! Reproducibility beats flexibility here: every run is fully described by
//! one small config file plus the CLI flags echoed into the summary.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use deepdeal_core::link::SystemParams;
use deepdeal_core::pa::PaClass;

/// Which experiment family to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Two-user homogeneous path-loss sweep.
    Sweep2,
    /// Two-user heterogeneous path-loss grid.
    Grid2,
    /// Random user drops in a circular cell.
    Drops,
    /// Monte-Carlo validation of the amplifier statistics.
    Validate,
    /// One explicit scenario from a path-loss list.
    Single,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::Sweep2 => "sweep2",
            ExperimentKind::Grid2 => "grid2",
            ExperimentKind::Drops => "drops",
            ExperimentKind::Validate => "validate",
            ExperimentKind::Single => "single",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sweep2" => Ok(ExperimentKind::Sweep2),
            "grid2" => Ok(ExperimentKind::Grid2),
            "drops" => Ok(ExperimentKind::Drops),
            "validate" => Ok(ExperimentKind::Validate),
            "single" => Ok(ExperimentKind::Single),
            other => Err(format!("unknown experiment `{other}`")),
        }
    }
}

/// Receiver-noise convention used when building scenarios.
///
/// `PerSubcarrier` applies the aggregate thermal floor per subcarrier
/// (effectively `N_U` times the floor per user); `Aggregate` applies the
/// floor once over the whole band. Each experiment family defaults to the
/// convention that reproduces its reference results; see the README.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseReference {
    PerSubcarrier,
    Aggregate,
}

impl NoiseReference {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseReference::PerSubcarrier => "per_subcarrier",
            NoiseReference::Aggregate => "aggregate",
        }
    }
}

impl FromStr for NoiseReference {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per_subcarrier" => Ok(NoiseReference::PerSubcarrier),
            "aggregate" => Ok(NoiseReference::Aggregate),
            other => Err(format!("unknown noise reference `{other}`")),
        }
    }
}

/// A config error with the line it came from, when applicable.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Full experiment configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub pa_class: PaClass,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub strict: bool,

    // Hardware and waveform constants.
    pub n_subcarriers: u32,
    pub subcarrier_spacing_hz: f64,
    pub inband_fraction: f64,
    pub p_max_w: f64,
    pub p_const_w: f64,
    pub p_sprf_w: f64,
    pub tol_p: f64,
    pub tol_m: f64,
    pub tol_ee: f64,
    pub carrier_ghz: f64,

    // Path-loss sweep / grid axes, dB.
    pub sweep_start_db: f64,
    pub sweep_stop_db: f64,
    pub sweep_step_db: f64,

    // Random drops.
    pub k_users: usize,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub n_drops: usize,

    /// Antenna count used by the REF-E / fixed-antenna baselines.
    /// Mandatory in drops mode; defaults to 32 elsewhere.
    pub baseline_m: Option<u32>,

    /// Receiver-noise convention; `None` resolves to the per-experiment
    /// default (`aggregate` for drops, `per_subcarrier` otherwise).
    pub noise_reference: Option<NoiseReference>,

    /// Explicit per-user path losses for `single`, dB.
    pub beta_db: Vec<f64>,

    // Monte-Carlo validation.
    pub mc_samples: usize,
    pub mc_psi: Vec<f64>,
    pub mc_input_power_w: f64,
}

impl ExperimentConfig {
    pub fn defaults(experiment: ExperimentKind) -> Self {
        ExperimentConfig {
            experiment,
            pa_class: PaClass::ClassB,
            seed: 1,
            out_dir: PathBuf::from("out"),
            strict: false,
            n_subcarriers: 1200,
            subcarrier_spacing_hz: 15_000.0,
            inband_fraction: 2.0 / 3.0,
            p_max_w: 160.0,
            p_const_w: 348.0,
            p_sprf_w: 23.0,
            tol_p: 1e-6,
            tol_m: 1e-6,
            tol_ee: 1e-6,
            carrier_ghz: 3.0,
            sweep_start_db: 60.0,
            sweep_stop_db: 150.0,
            sweep_step_db: 5.0,
            k_users: 60,
            cell_radius_m: 5_000.0,
            min_distance_m: 5.0,
            n_drops: 100,
            baseline_m: None,
            noise_reference: None,
            beta_db: Vec::new(),
            mc_samples: 1_000_000,
            mc_psi: vec![0.01, 0.1, 1.0, 3.981, 10.0, 100.0],
            mc_input_power_w: 1.0,
        }
    }

    /// Apply `key = value` lines on top of the defaults.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::at(line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim();
            let value = value.trim();
            self.apply_kv(key, value)
                .map_err(|msg| ConfigError::at(line_no, msg))?;
        }
        Ok(())
    }

    fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| format!("field `{key}`: cannot parse `{value}`: {e}"))
        }
        fn list(key: &str, value: &str) -> Result<Vec<f64>, String> {
            value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|e| format!("field `{key}`: cannot parse `{v}`: {e}"))
                })
                .collect()
        }

        match key {
            "experiment" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.experiment {
                    return Err(format!(
                        "config says experiment `{}` but the `{}` subcommand was invoked",
                        kind.label(),
                        self.experiment.label()
                    ));
                }
            }
            "pa_class" => self.pa_class = value.parse().map_err(|e| format!("{e}"))?,
            "seed" => self.seed = num(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "strict" => self.strict = num(key, value)?,
            "n_subcarriers" => self.n_subcarriers = num(key, value)?,
            "subcarrier_spacing_hz" => self.subcarrier_spacing_hz = num(key, value)?,
            "inband_fraction" => self.inband_fraction = num(key, value)?,
            "p_max_w" => self.p_max_w = num(key, value)?,
            "p_const_w" => self.p_const_w = num(key, value)?,
            "p_sprf_w" => self.p_sprf_w = num(key, value)?,
            "tol_p" => self.tol_p = num(key, value)?,
            "tol_m" => self.tol_m = num(key, value)?,
            "tol_ee" => self.tol_ee = num(key, value)?,
            "carrier_ghz" => self.carrier_ghz = num(key, value)?,
            "sweep_start_db" => self.sweep_start_db = num(key, value)?,
            "sweep_stop_db" => self.sweep_stop_db = num(key, value)?,
            "sweep_step_db" => self.sweep_step_db = num(key, value)?,
            "k_users" => self.k_users = num(key, value)?,
            "cell_radius_m" => self.cell_radius_m = num(key, value)?,
            "min_distance_m" => self.min_distance_m = num(key, value)?,
            "n_drops" => self.n_drops = num(key, value)?,
            "baseline_m" => self.baseline_m = Some(num(key, value)?),
            "noise_reference" => self.noise_reference = Some(value.parse()?),
            "beta_db" => self.beta_db = list(key, value)?,
            "mc_samples" => self.mc_samples = num(key, value)?,
            "mc_psi" => self.mc_psi = list(key, value)?,
            "mc_input_power_w" => self.mc_input_power_w = num(key, value)?,
            unknown => return Err(format!("unknown field `{unknown}`")),
        }
        Ok(())
    }

    /// Cross-field validation; call after all overrides are applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            (self.subcarrier_spacing_hz, "subcarrier_spacing_hz"),
            (self.p_max_w, "p_max_w"),
            (self.p_const_w, "p_const_w"),
            (self.p_sprf_w, "p_sprf_w"),
            (self.tol_p, "tol_p"),
            (self.tol_m, "tol_m"),
            (self.tol_ee, "tol_ee"),
            (self.carrier_ghz, "carrier_ghz"),
        ];
        for (v, name) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::general(format!(
                    "field `{name}` must be positive, got {v}"
                )));
            }
        }
        if self.n_subcarriers == 0 {
            return Err(ConfigError::general("n_subcarriers must be at least 1"));
        }
        if !(self.inband_fraction > 0.0 && self.inband_fraction <= 1.0) {
            return Err(ConfigError::general(format!(
                "inband_fraction must lie in (0, 1], got {}",
                self.inband_fraction
            )));
        }
        match self.experiment {
            ExperimentKind::Sweep2 | ExperimentKind::Grid2 => {
                if !(self.sweep_step_db > 0.0) || self.sweep_stop_db < self.sweep_start_db {
                    return Err(ConfigError::general("empty path-loss grid"));
                }
            }
            ExperimentKind::Drops => {
                if self.k_users == 0 {
                    return Err(ConfigError::general("k_users must be at least 1"));
                }
                if self.n_drops == 0 {
                    return Err(ConfigError::general("n_drops must be at least 1"));
                }
                if !(self.cell_radius_m > self.min_distance_m) || self.min_distance_m < 0.0 {
                    return Err(ConfigError::general(
                        "need cell_radius_m > min_distance_m >= 0",
                    ));
                }
                let m = self.baseline_m.ok_or_else(|| {
                    ConfigError::general(
                        "drops mode requires an explicit baseline antenna count \
                         (`--baseline-m` or `baseline_m = ...`)",
                    )
                })?;
                if (m as usize) <= self.k_users {
                    return Err(ConfigError::general(format!(
                        "baseline_m = {m} must exceed k_users = {}",
                        self.k_users
                    )));
                }
            }
            ExperimentKind::Single => {
                if self.beta_db.is_empty() {
                    return Err(ConfigError::general(
                        "single mode needs `beta_db = <dB>,<dB>,...`",
                    ));
                }
            }
            ExperimentKind::Validate => {
                if self.mc_samples < 10_000 {
                    return Err(ConfigError::general("mc_samples must be at least 1e4"));
                }
                if self.mc_psi.is_empty() || self.mc_psi.iter().any(|&p| !(p > 0.0)) {
                    return Err(ConfigError::general(
                        "mc_psi must be a list of positive values",
                    ));
                }
                if !(self.mc_input_power_w > 0.0) {
                    return Err(ConfigError::general("mc_input_power_w must be positive"));
                }
            }
        }
        if let Some(m) = self.baseline_m {
            if m < 2 {
                return Err(ConfigError::general("baseline_m must be at least 2"));
            }
        }
        Ok(())
    }

    /// Noise convention after applying the per-experiment default.
    pub fn resolved_noise_reference(&self) -> NoiseReference {
        self.noise_reference.unwrap_or(match self.experiment {
            ExperimentKind::Drops => NoiseReference::Aggregate,
            _ => NoiseReference::PerSubcarrier,
        })
    }

    /// System parameters assembled from the configured constants.
    pub fn system_params(&self) -> SystemParams {
        SystemParams::new(
            self.n_subcarriers,
            self.subcarrier_spacing_hz,
            self.inband_fraction,
            self.p_max_w,
            self.p_const_w,
            self.p_sprf_w,
            self.pa_class,
            self.tol_p,
            self.tol_m,
            self.tol_ee,
        )
        .expect("validated config")
    }

    /// Path-loss axis values for sweeps and grids, dB.
    pub fn sweep_axis_db(&self) -> Vec<f64> {
        let mut v = Vec::new();
        let mut i = 0usize;
        loop {
            let db = self.sweep_start_db + self.sweep_step_db * i as f64;
            if db > self.sweep_stop_db + 1e-9 {
                break;
            }
            v.push(db);
            i += 1;
        }
        v
    }

    /// Echo of every field, used in summaries so a run is self-describing.
    pub fn echo(&self) -> String {
        let mut kv = BTreeMap::new();
        kv.insert("experiment", self.experiment.label().to_string());
        kv.insert("pa_class", self.pa_class.label().to_string());
        kv.insert("seed", self.seed.to_string());
        kv.insert("strict", self.strict.to_string());
        kv.insert("n_subcarriers", self.n_subcarriers.to_string());
        kv.insert(
            "subcarrier_spacing_hz",
            format!("{}", self.subcarrier_spacing_hz),
        );
        kv.insert("inband_fraction", format!("{:.16}", self.inband_fraction));
        kv.insert("p_max_w", format!("{}", self.p_max_w));
        kv.insert("p_const_w", format!("{}", self.p_const_w));
        kv.insert("p_sprf_w", format!("{}", self.p_sprf_w));
        kv.insert("tol_p", format!("{:e}", self.tol_p));
        kv.insert("tol_m", format!("{:e}", self.tol_m));
        kv.insert("tol_ee", format!("{:e}", self.tol_ee));
        kv.insert("carrier_ghz", format!("{}", self.carrier_ghz));
        match self.experiment {
            ExperimentKind::Sweep2 | ExperimentKind::Grid2 => {
                kv.insert("sweep_start_db", format!("{}", self.sweep_start_db));
                kv.insert("sweep_stop_db", format!("{}", self.sweep_stop_db));
                kv.insert("sweep_step_db", format!("{}", self.sweep_step_db));
            }
            ExperimentKind::Drops => {
                kv.insert("k_users", self.k_users.to_string());
                kv.insert("cell_radius_m", format!("{}", self.cell_radius_m));
                kv.insert("min_distance_m", format!("{}", self.min_distance_m));
                kv.insert("n_drops", self.n_drops.to_string());
            }
            ExperimentKind::Single => {
                kv.insert(
                    "beta_db",
                    self.beta_db
                        .iter()
                        .map(|v| format!("{v}"))
                        .collect::<Vec<_>>()
                        .join(","),
                );
            }
            ExperimentKind::Validate => {
                kv.insert("mc_samples", self.mc_samples.to_string());
                kv.insert(
                    "mc_psi",
                    self.mc_psi
                        .iter()
                        .map(|v| format!("{v}"))
                        .collect::<Vec<_>>()
                        .join(","),
                );
                kv.insert("mc_input_power_w", format!("{}", self.mc_input_power_w));
            }
        }
        if let Some(m) = self.baseline_m {
            kv.insert("baseline_m", m.to_string());
        }
        kv.insert(
            "noise_reference",
            self.resolved_noise_reference().label().to_string(),
        );
        kv.iter()
            .map(|(k, v)| format!("{k} = {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
