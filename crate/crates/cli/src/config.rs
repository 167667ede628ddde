use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zoll_core::damping::DampingSpec;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSection,
    pub chart: ChartSection,
    pub spectral: SpectralSection,
    pub observability: ObservabilitySection,
    pub geodesics: GeodesicsSection,
    pub wave: WaveSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSection {
    pub coefficients: Vec<f64>,
    pub grid_size: usize,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        Self {
            coefficients: Vec::new(),
            grid_size: 256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartSection {
    #[serde(rename = "X")]
    pub half_width: f64,
    pub n_points: usize,
}

impl Default for ChartSection {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            n_points: 4097,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub n_max: usize,
    #[serde(rename = "A_config")]
    pub a_config: f64,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            n_max: 25,
            a_config: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservabilitySection {
    pub epsilon: f64,
    pub epsilon_a: f64,
    pub band: f64,
    /// Smallest cluster index entering the ε-scan.
    pub n_min: usize,
}

impl Default for ObservabilitySection {
    fn default() -> Self {
        Self {
            epsilon: 0.2,
            epsilon_a: 0.1,
            band: 0.25,
            n_min: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicsSection {
    pub samples: usize,
    pub tcap: f64,
    pub region: DampingSpec,
}

impl Default for GeodesicsSection {
    fn default() -> Self {
        Self {
            samples: 100,
            tcap: 2.0 * TAU,
            region: DampingSpec::IndicatorUpper,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveSection {
    /// Band limit of random data.
    pub n_max: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub damping: DampingSpec,
    pub seed: u64,
    /// Single-mode data (n, k) instead of random data.
    pub mode: Option<[i64; 2]>,
    pub fit_window: Option<[f64; 2]>,
    /// Observability ensemble size, 0 to skip.
    pub ensemble: usize,
    pub observe_time: f64,
}

impl Default for WaveSection {
    fn default() -> Self {
        Self {
            n_max: 10,
            dt: 1e-3,
            t_end: 20.0,
            damping: DampingSpec::IndicatorUpper,
            seed: 0,
            mode: None,
            fit_window: None,
            ensemble: 8,
            observe_time: TAU,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec!["csv".into(), "json".into()],
        }
    }
}

impl OutputSection {
    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }

    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("ConfigError: cannot read {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow!("ConfigError: {e}"))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                bail!("ConfigError: output.formats: unknown format `{f}`");
            }
        }
        if !(self.wave.dt > 0.0) {
            bail!("ConfigError: wave.dt must be positive");
        }
        if !(self.wave.t_end > 0.0) {
            bail!("ConfigError: wave.T must be positive");
        }
        if !(self.geodesics.tcap > 0.0) {
            bail!("ConfigError: geodesics.tcap must be positive");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration,
    /// leaving out the output directory.
    pub fn hash(&self) -> String {
        let mut cfg = self.clone();
        cfg.output.directory = PathBuf::new();
        let text = serde_json::to_string(&cfg).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

/// `none`, `indicator_upper`, `half_neighborhood:DELTA,WIDTH`,
/// `smooth_vanishing:POWER` or `constant:VALUE`.
pub fn parse_damping(text: &str) -> Result<DampingSpec> {
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    let nums: Vec<f64> = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| anyhow!("ConfigError: --damping `{text}`: {e}"))?
    };
    let spec = match (kind, nums.as_slice()) {
        ("none", []) => DampingSpec::None,
        ("indicator_upper", []) => DampingSpec::IndicatorUpper,
        ("half_neighborhood", [delta, width]) => DampingSpec::HalfNeighborhood {
            delta: *delta,
            width: *width,
        },
        ("smooth_vanishing", [power]) => DampingSpec::SmoothVanishing { power: *power },
        ("constant", [value]) => DampingSpec::Constant { value: *value },
        _ => bail!("ConfigError: --damping `{text}` is not a known damping"),
    };
    Ok(spec)
}

pub fn parse_pair<T: std::str::FromStr>(flag: &str, text: &str) -> Result<[T; 2]>
where
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        bail!("ConfigError: {flag} expects two comma-separated values, got `{text}`");
    }
    let one = |s: &str| {
        s.trim()
            .parse::<T>()
            .map_err(|e| anyhow!("ConfigError: {flag} `{text}`: {e}"))
    };
    Ok([one(parts[0])?, one(parts[1])?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = RunConfig::parse("[surface]\ncoefficients = [0.1]\n").unwrap();
        assert_eq!(cfg.surface.coefficients, vec![0.1]);
        assert_eq!(cfg.chart.n_points, 4097);
        assert_eq!(cfg.spectral.a_config, 1.0);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("[chart]\nX = 8.0\nnpoints = 10\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(
            msg.contains("ConfigError") && msg.contains("npoints"),
            "{msg}"
        );
        let err = RunConfig::parse("[wave]\ndamping = { kind = \"indicator_upper\", delta = 1 }\n")
            .unwrap_err();
        assert!(format!("{err:#}").contains("delta"));
    }

    #[test]
    fn damping_table_and_flag_agree() {
        let cfg = RunConfig::parse(
            "[wave]\ndamping = { kind = \"half_neighborhood\", delta = 0.5, width = 0.3 }\n",
        )
        .unwrap();
        assert_eq!(
            cfg.wave.damping,
            parse_damping("half_neighborhood:0.5,0.3").unwrap()
        );
        assert!(parse_damping("sector").is_err());
        assert_eq!(parse_pair::<i64>("--mode", "20,20").unwrap(), [20, 20]);
    }

    #[test]
    fn hash_tracks_the_effective_config() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.output.directory = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.wave.seed = 7;
        assert_ne!(a.hash(), b.hash());
    }
}
