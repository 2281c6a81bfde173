//! Plain-text `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every other line must
//! hold exactly one known key. Units are SI; momentum parameters of the
//! distributions are given in units of `k_i`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use recoil_core::{
    Apparatus, BeamSpec, Geometry, GratingSpec, IncidentEnvelope, MomentumTransferDistribution, PhotonSpec,
    PipelineSettings, TabulatedDensity, SODIUM_MASS,
};

/// Problem with the configuration, located by line and key where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, key: &str, message: impl Into<String>) -> Self {
        Self { line: Some(line), key: Some(key.to_string()), message: message.into() }
    }

    fn key(key: &str, message: impl Into<String>) -> Self {
        Self { line: None, key: Some(key.to_string()), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "config line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "config line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "config key `{k}`: {}", self.message),
            (None, None) => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KNOWN_KEYS: &[&str] = &[
    "k",
    "speed",
    "atomic_mass",
    "lambda_i",
    "d_g",
    "delta",
    "n_slits",
    "y12",
    "y23",
    "y_prime_12",
    "grid_spacing",
    "grid_extent",
    "envelope",
    "window_halfwidth",
    "kick_nodes",
    "points_per_period",
    "periods",
    "distribution",
    "N",
    "eta",
    "epsilon",
    "k1_over_ki",
    "k2_over_ki",
    "k_delta_over_ki",
    "tabulated",
    "dp_over_lambda_i_min",
    "dp_over_lambda_i_max",
    "sweep_points",
    "carpet_y_min",
    "carpet_y_max",
    "carpet_y_points",
    "carpet_x_min",
    "carpet_x_max",
    "overlay",
    "out",
];

/// Raw `key → (line, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError { line: Some(line), key: None, message: format!("expected `key = value`, got `{body}`") });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError::at(line, key, "unknown key"));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line, key, "missing value"));
            }
            if let Some((first, _)) = entries.get(key) {
                return Err(ConfigError::at(line, key, format!("duplicate key, first set on line {first}")));
            }
            entries.insert(key.to_string(), (line, value.to_string()));
        }
        Ok(Self { entries })
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), (0, value.to_string()));
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        match self.raw(key) {
            Some(&(line, _)) if line > 0 => ConfigError::at(line, key, message),
            _ => ConfigError::key(key, message),
        }
    }

    fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key)
            .map(|(_, v)| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(self.error(key, format!("`{v}` is not a finite number"))),
            })
            .transpose()
    }

    fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.raw(key)
            .map(|(_, v)| v.parse::<usize>().map_err(|_| self.error(key, format!("`{v}` is not a non-negative integer"))))
            .transpose()
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.raw(key).map(|(_, v)| v.as_str())
    }
}

/// Range of `d_p/λ_i` values to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn ratios(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.points).map(|j| self.min + span * j as f64 / (self.points - 1) as f64).collect()
    }
}

/// Rectangle of the Talbot carpet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarpetSpec {
    pub y_min: f64,
    pub y_max: f64,
    pub y_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl CarpetSpec {
    pub fn ys(&self) -> Vec<f64> {
        if self.y_points == 1 {
            return vec![self.y_min];
        }
        let span = self.y_max - self.y_min;
        (0..self.y_points).map(|j| self.y_min + span * j as f64 / (self.y_points - 1) as f64).collect()
    }
}

/// Distribution named in the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionName {
    Mandel,
    HalfGaussian,
    DisplacedGaussian,
    GeneralGaussian,
    Exponential,
    Uniform,
    Delta,
    Tabulated,
}

impl DistributionName {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "mandel" => Self::Mandel,
            "half-gaussian" => Self::HalfGaussian,
            "displaced-gaussian" => Self::DisplacedGaussian,
            "general-gaussian" => Self::GeneralGaussian,
            "exponential" => Self::Exponential,
            "uniform" => Self::Uniform,
            "delta" => Self::Delta,
            "tabulated" => Self::Tabulated,
            _ => return None,
        })
    }

    pub const NAMES: &'static str =
        "mandel, half-gaussian, displaced-gaussian, general-gaussian, exponential, uniform, delta, tabulated";
}

/// Everything a subcommand needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub apparatus: Apparatus,
    pub pipeline: PipelineSettings,
    pub distribution: MomentumTransferDistribution,
    pub sweep: SweepSpec,
    pub carpet: CarpetSpec,
    pub overlay: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads `path`; relative paths inside the file resolve against its directory.
    pub fn load(path: &Path, overrides: &KeyValues) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { line: None, key: None, message: format!("cannot read {}: {e}", path.display()) })?;
        let mut kv = KeyValues::parse(&text)?;
        for (k, (_, v)) in &overrides.entries {
            kv.set(k, v);
        }
        Self::from_key_values(&kv, path.parent())
    }

    pub fn from_key_values(kv: &KeyValues, base: Option<&Path>) -> Result<Self, ConfigError> {
        let reference = Apparatus::reference();
        let resolve = |p: &str| match base {
            Some(b) if Path::new(p).is_relative() => b.join(p),
            _ => PathBuf::from(p),
        };

        let mass = kv.f64("atomic_mass")?.unwrap_or(SODIUM_MASS);
        let beam = match (kv.f64("k")?, kv.f64("speed")?) {
            (Some(_), Some(_)) => return Err(kv.error("speed", "give either `k` or `speed`, not both")),
            (Some(k), None) => BeamSpec::from_wavenumber(k, mass).map_err(|e| kv.error("k", e.to_string()))?,
            (None, Some(v)) => BeamSpec::from_speed(v, mass).map_err(|e| kv.error("speed", e.to_string()))?,
            (None, None) => BeamSpec::from_wavenumber(reference.beam.wavenumber_k, mass)
                .map_err(|e| kv.error("atomic_mass", e.to_string()))?,
        };
        let photon = PhotonSpec::from_wavelength(kv.f64("lambda_i")?.unwrap_or(reference.photon.wavelength_i))
            .map_err(|e| kv.error("lambda_i", e.to_string()))?;

        let g = reference.grating;
        let n_slits = kv.usize("n_slits")?.unwrap_or(g.illuminated_slits_n);
        let grating = GratingSpec::new(
            kv.f64("d_g")?.unwrap_or(g.period_dg),
            kv.f64("delta")?.unwrap_or(g.open_width_delta),
            n_slits,
        )
        .map_err(|e| kv.error(grating_key(kv), e.to_string()))?;

        let geo = reference.geometry;
        let geometry = Geometry::new(
            kv.f64("y12")?.unwrap_or(geo.y12),
            kv.f64("y23")?.unwrap_or(geo.y23),
            kv.f64("y_prime_12")?.unwrap_or(geo.y_prime_12),
        )
        .map_err(|e| kv.error(geometry_key(kv), e.to_string()))?;
        let apparatus = Apparatus { beam, photon, grating, geometry };

        let defaults = PipelineSettings::default();
        let grid_spacing = kv.f64("grid_spacing")?.unwrap_or(defaults.grid_spacing);
        if !(grid_spacing > 0.0) {
            return Err(kv.error("grid_spacing", "must be positive"));
        }
        if grid_spacing > grating.open_width_delta / 16.0 * (1.0 + 1e-9) {
            return Err(kv.error("grid_spacing", format!("must not exceed delta/16 = {}", grating.open_width_delta / 16.0)));
        }
        let grid_extent = kv.f64("grid_extent")?.unwrap_or(defaults.grid_extent);
        if grid_extent < grating.illuminated_width() {
            return Err(kv.error("grid_extent", format!("must cover the illuminated width n_slits * d_g = {}", grating.illuminated_width())));
        }
        let envelope = match kv.text("envelope") {
            None | Some("top-hat") => IncidentEnvelope::TopHat,
            Some("raised-cosine") => IncidentEnvelope::RaisedCosine,
            Some(other) => return Err(kv.error("envelope", format!("`{other}` is not one of top-hat, raised-cosine"))),
        };
        let window_halfwidth = kv.f64("window_halfwidth")?;
        if window_halfwidth.is_some_and(|w| !(w > 0.0)) {
            return Err(kv.error("window_halfwidth", "must be positive"));
        }
        let kick_nodes = kv.usize("kick_nodes")?.unwrap_or(defaults.kick_nodes);
        if kick_nodes < 3 || kick_nodes % 2 == 0 {
            return Err(kv.error("kick_nodes", "must be odd and at least 3"));
        }
        let points_per_period = kv.usize("points_per_period")?.unwrap_or(defaults.points_per_period);
        if points_per_period < 16 {
            return Err(kv.error("points_per_period", "must be at least 16"));
        }
        let periods = kv.usize("periods")?.unwrap_or(defaults.periods);
        if periods < 2 {
            return Err(kv.error("periods", "must be at least 2"));
        }
        let pipeline = PipelineSettings {
            grid_spacing,
            grid_extent,
            envelope,
            window_halfwidth,
            points_per_period,
            periods,
            kick_nodes,
        };

        let distribution = build_distribution(kv, photon.wavenumber_i, &resolve)?;

        let sweep = SweepSpec {
            min: kv.f64("dp_over_lambda_i_min")?.unwrap_or(0.0),
            max: kv.f64("dp_over_lambda_i_max")?.unwrap_or(2.0),
            points: kv.usize("sweep_points")?.unwrap_or(201),
        };
        if sweep.min < 0.0 {
            return Err(kv.error("dp_over_lambda_i_min", "must be >= 0"));
        }
        if !(sweep.max > sweep.min) {
            return Err(kv.error("dp_over_lambda_i_max", "must exceed dp_over_lambda_i_min"));
        }
        if sweep.points < 2 {
            return Err(kv.error("sweep_points", format!("a sweep needs at least 2 points, got {}", sweep.points)));
        }

        let half = 0.5 * grating.illuminated_width();
        let carpet = CarpetSpec {
            y_min: kv.f64("carpet_y_min")?.unwrap_or(0.0),
            y_max: kv.f64("carpet_y_max")?.unwrap_or(2.0 * recoil_core::grating::talbot_length(&beam, &grating)),
            y_points: kv.usize("carpet_y_points")?.unwrap_or(65),
            x_min: kv.f64("carpet_x_min")?.unwrap_or(-half),
            x_max: kv.f64("carpet_x_max")?.unwrap_or(half),
        };
        if carpet.y_min < 0.0 {
            return Err(kv.error("carpet_y_min", "must be >= 0"));
        }
        if carpet.y_max > geometry.y12 {
            return Err(kv.error("carpet_y_max", format!("must not exceed y12 = {}", geometry.y12)));
        }
        if carpet.y_max < carpet.y_min {
            return Err(kv.error("carpet_y_max", "must be >= carpet_y_min"));
        }
        if carpet.y_points == 0 {
            return Err(kv.error("carpet_y_points", "must be at least 1"));
        }
        if !(carpet.x_max > carpet.x_min) {
            return Err(kv.error("carpet_x_max", "must exceed carpet_x_min"));
        }

        Ok(Self {
            apparatus,
            pipeline,
            distribution,
            sweep,
            carpet,
            overlay: kv.text("overlay").map(resolve),
            out: kv.text("out").map(resolve),
        })
    }
}

fn grating_key(kv: &KeyValues) -> &'static str {
    ["d_g", "delta", "n_slits"].into_iter().find(|k| kv.raw(k).is_some()).unwrap_or("d_g")
}

fn geometry_key(kv: &KeyValues) -> &'static str {
    ["y_prime_12", "y12", "y23"].into_iter().find(|k| kv.raw(k).is_some()).unwrap_or("y12")
}

fn build_distribution(
    kv: &KeyValues,
    k_i: f64,
    resolve: &dyn Fn(&str) -> PathBuf,
) -> Result<MomentumTransferDistribution, ConfigError> {
    let name = kv.text("distribution").unwrap_or("mandel");
    let kind = DistributionName::parse(name)
        .ok_or_else(|| kv.error("distribution", format!("`{name}` is not one of {}", DistributionName::NAMES)))?;
    let n = kv.f64("N")?.unwrap_or(0.7);
    let required = |key: &str| -> Result<f64, ConfigError> {
        kv.f64(key)?.ok_or_else(|| ConfigError::key(key, format!("required by distribution `{name}`")))
    };
    let blame = match kind {
        DistributionName::HalfGaussian | DistributionName::GeneralGaussian => {
            if kv.raw("eta").is_some() {
                "eta"
            } else {
                "N"
            }
        }
        DistributionName::DisplacedGaussian => "N",
        DistributionName::Exponential => "epsilon",
        DistributionName::Uniform => "k2_over_ki",
        DistributionName::Delta => "k_delta_over_ki",
        _ => "distribution",
    };
    let built = match kind {
        DistributionName::Mandel => MomentumTransferDistribution::mandel(k_i),
        DistributionName::HalfGaussian => {
            MomentumTransferDistribution::half_gaussian(n, kv.f64("eta")?.unwrap_or(0.0), k_i)
        }
        DistributionName::DisplacedGaussian => MomentumTransferDistribution::displaced_gaussian(n, k_i),
        DistributionName::GeneralGaussian => MomentumTransferDistribution::general_gaussian(n, required("eta")?, k_i),
        DistributionName::Exponential => {
            MomentumTransferDistribution::exponential(kv.f64("epsilon")?.unwrap_or(1.0), k_i)
        }
        DistributionName::Uniform => MomentumTransferDistribution::uniform(
            kv.f64("k1_over_ki")?.unwrap_or(0.0),
            kv.f64("k2_over_ki")?.unwrap_or(2.0),
            k_i,
        ),
        DistributionName::Delta => MomentumTransferDistribution::delta(required("k_delta_over_ki")?, k_i),
        DistributionName::Tabulated => {
            let path = resolve(kv.text("tabulated").ok_or_else(|| ConfigError::key("tabulated", "required by distribution `tabulated`"))?);
            let table = read_tabulated(&path).map_err(|m| kv.error("tabulated", m))?;
            MomentumTransferDistribution::tabulated(table, k_i)
        }
    };
    built.map_err(|e| kv.error(blame, e.to_string()))
}

/// Two-column CSV `delta_kx_over_ki, density`, with an optional header row.
pub fn read_tabulated(path: &Path) -> Result<TabulatedDensity, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let (mut nodes, mut density) = (Vec::new(), Vec::new());
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| format!("{} line {line}: {e}", path.display()))?;
        if record.len() != 2 {
            return Err(format!("{} line {line}: expected 2 columns, found {}", path.display(), record.len()));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                nodes.push(a);
                density.push(b);
            }
            _ if line == 1 => {}
            _ => return Err(format!("{} line {line}: `{}` is not numeric", path.display(), record.iter().collect::<Vec<_>>().join(","))),
        }
    }
    TabulatedDensity::new(nodes, density).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::from_key_values(&KeyValues::parse(text)?, None)
    }

    #[test]
    fn empty_file_gives_reference_setup() {
        let c = build("").unwrap();
        assert_eq!(c.apparatus, Apparatus::reference());
        assert_eq!(c.sweep.points, 201);
        assert_eq!(c.pipeline, PipelineSettings::default());
    }

    #[test]
    fn comments_and_spacing() {
        let c = build("# beam\n  lambda_i =  500e-9 \n\nsweep_points=5\n").unwrap();
        assert_eq!(c.apparatus.photon.wavelength_i, 500e-9);
        assert_eq!(c.sweep.ratios(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn unknown_key_names_line_and_key() {
        let e = build("y12 = 0.6\nspeeed = 3\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert_eq!(e.key.as_deref(), Some("speeed"));
    }

    #[test]
    fn bad_number_names_key() {
        let e = build("d_g = abc").unwrap_err();
        assert_eq!(e.key.as_deref(), Some("d_g"));
        assert!(e.to_string().contains("line 1"));
    }

    #[test]
    fn duplicate_key_rejected() {
        let e = build("y12 = 0.6\ny12 = 0.7").unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn missing_separator_rejected() {
        assert_eq!(build("y12 0.6").unwrap_err().line, Some(1));
    }

    #[test]
    fn zero_point_sweep_rejected() {
        assert_eq!(build("sweep_points = 0").unwrap_err().key.as_deref(), Some("sweep_points"));
    }

    #[test]
    fn beam_by_speed_or_wavenumber() {
        assert!(build("speed = 1000").is_ok());
        assert_eq!(build("speed = 1000\nk = 5e11").unwrap_err().key.as_deref(), Some("speed"));
        assert_eq!(build("speed = -1").unwrap_err().key.as_deref(), Some("speed"));
    }

    #[test]
    fn coarse_grid_names_grid_spacing() {
        assert_eq!(build("grid_spacing = 1e-8").unwrap_err().key.as_deref(), Some("grid_spacing"));
    }

    #[test]
    fn distribution_parameters() {
        assert!(build("distribution = exponential\nepsilon = 2").is_ok());
        assert_eq!(build("distribution = general-gaussian").unwrap_err().key.as_deref(), Some("eta"));
        assert_eq!(build("distribution = delta").unwrap_err().key.as_deref(), Some("k_delta_over_ki"));
        assert_eq!(build("distribution = half-gaussian\neta = 1").unwrap_err().key.as_deref(), Some("eta"));
        assert_eq!(build("distribution = gauss").unwrap_err().key.as_deref(), Some("distribution"));
        assert_eq!(
            build("distribution = uniform\nk1_over_ki = 1.5\nk2_over_ki = 1").unwrap_err().key.as_deref(),
            Some("k2_over_ki")
        );
    }

    #[test]
    fn carpet_range_checked() {
        assert_eq!(build("carpet_y_max = 1.0").unwrap_err().key.as_deref(), Some("carpet_y_max"));
    }
}
