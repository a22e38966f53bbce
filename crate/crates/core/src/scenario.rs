//! Scenario files: system parameters, path lists and sweep settings.
//!
//! The format is TOML. Top-level keys mirror [`SystemParams`]; rays are
//! given as `[[bs_ris_path]]` and `[[ris_ue_path]]` tables. A path without
//! `gain_re`/`gain_im` gets a unit-magnitude gain with a random phase drawn
//! from `seed`. Unknown keys are rejected.
//!
//! ```toml
//! n_tx = 256
//! k_t = 16
//! architecture = "tp-paper-literal"
//!
//! [[bs_ris_path]]
//! gain_re = 1.0
//! departure = 0.5
//! arrival_azimuth_sin = 0.4
//! arrival_elevation_sin = 0.5
//!
//! [[ris_ue_path]]
//! gain_re = 1.0
//! departure_azimuth_sin = 0.5
//! departure_elevation_sin = 0.8660254037844386
//! arrival = 0.0
//! ```

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::beamforming::{Architecture, TpBeamformer};
use crate::channel::{random_unit_gain, BsRisPath, ChannelSet, NoiseModel, RisUePath};
use crate::config::{SystemConfig, SystemParams, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::manifold::{PhysicalDirection1D, PhysicalDirection2D};

pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const DEFAULT_SUBCARRIERS: usize = 128;

/// Which subcarriers a direction sweep evaluates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubcarrierSelection {
    /// First, central (both middle ones for even `M`) and last.
    Edges,
    All,
    /// 1-based indices.
    List(Vec<usize>),
}

impl SubcarrierSelection {
    /// Sorted, deduplicated 1-based indices for an `m`-subcarrier grid.
    pub fn resolve(&self, m: usize) -> Result<Vec<usize>> {
        let mut idx = match self {
            SubcarrierSelection::All => (1..=m).collect(),
            SubcarrierSelection::Edges => {
                let mut v = vec![1, m];
                if m % 2 == 1 {
                    v.push(m / 2 + 1);
                } else {
                    v.extend([m / 2, m / 2 + 1]);
                }
                v
            }
            SubcarrierSelection::List(v) => {
                if let Some(bad) = v.iter().find(|&&i| i == 0 || i > m) {
                    return Err(Error::Scenario(format!(
                        "subcarrier {bad} outside 1..={m}"
                    )));
                }
                v.clone()
            }
        };
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }
}

/// Direction grid and subcarrier choice for sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub grid_points: usize,
    pub subcarriers: SubcarrierSelection,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            subcarriers: SubcarrierSelection::Edges,
        }
    }
}

/// A fully validated simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SystemConfig,
    pub channels: ChannelSet,
    pub sweep: SweepSpec,
    pub architecture: Architecture,
    pub seed: u64,
    pub noise: NoiseModel,
}

impl Scenario {
    /// The reference scenario: single line-of-sight ray on each hop with
    /// unit gain, BS departure 0.5, RIS arrival (0.4, 0.5), RIS departure
    /// (0.5, √3/2), UE arrival at broadside.
    pub fn reference(k_t: usize, m_subcarriers: usize) -> Result<Self> {
        let config = SystemParams {
            k_t,
            m_subcarriers,
            ..Default::default()
        }
        .build()?;
        let one = Complex64::new(1.0, 0.0);
        let channels = ChannelSet::new(
            vec![BsRisPath::new(
                one,
                PhysicalDirection1D::new(0.5)?,
                PhysicalDirection2D::new(0.4, 0.5)?,
            )?],
            vec![RisUePath::new(
                one,
                PhysicalDirection2D::new(0.5, 3f64.sqrt() / 2.0)?,
                PhysicalDirection1D::broadside(),
            )?],
            &config,
        )?;
        Ok(Self {
            config,
            channels,
            sweep: SweepSpec::default(),
            architecture: Architecture::TpPaperLiteral,
            seed: 0,
            noise: NoiseModel::noiseless(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_path_seeded(path, None)
    }

    pub fn from_path_seeded(path: &Path, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_toml_seeded(&text, seed)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_seeded(text, None)
    }

    /// Like [`Scenario::from_toml`], with `seed` taking precedence over the
    /// file's own seed (it also drives any randomly drawn path gains).
    pub fn from_toml_seeded(text: &str, seed: Option<u64>) -> Result<Self> {
        let mut file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        if seed.is_some() {
            file.seed = seed;
        }
        file.into_scenario()
    }

    /// Same scenario with a different parameter set; path lists are kept.
    pub fn with_params(&self, params: SystemParams) -> Result<Self> {
        let config = params.build()?;
        let channels = ChannelSet::new(
            self.channels.bs_ris_paths().to_vec(),
            self.channels.ris_ue_paths().to_vec(),
            &config,
        )?;
        Ok(Self {
            config,
            channels,
            ..self.clone()
        })
    }

    /// BS targets per RF chain: chain `n` aims at the departure of BS→RIS
    /// path `n mod L_1`.
    pub fn chain_targets(&self) -> Vec<PhysicalDirection1D> {
        let paths = self.channels.bs_ris_paths();
        (0..self.config.n_rf())
            .map(|n| paths[n % paths.len()].departure)
            .collect()
    }

    pub fn beamformer(&self, architecture: Architecture) -> Result<TpBeamformer> {
        TpBeamformer::new(&self.chain_targets(), architecture, &self.config)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    n_tx: Option<usize>,
    n_rx: Option<usize>,
    n_rf: Option<usize>,
    n_streams: Option<usize>,
    k_t: Option<usize>,
    f_ris: Option<usize>,
    m_subcarriers: Option<usize>,
    bandwidth_hz: Option<f64>,
    f_center_hz: Option<f64>,
    p_total: Option<f64>,
    light_speed: Option<f64>,

    architecture: Option<String>,
    seed: Option<u64>,
    noise_variance: Option<f64>,
    grid_points: Option<usize>,
    subcarrier_selection: Option<SelectionField>,

    #[serde(default)]
    bs_ris_path: Vec<BsRisEntry>,
    #[serde(default)]
    ris_ue_path: Vec<RisUeEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SelectionField {
    Named(String),
    Indices(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BsRisEntry {
    gain_re: Option<f64>,
    gain_im: Option<f64>,
    departure: f64,
    arrival_azimuth_sin: f64,
    arrival_elevation_sin: f64,
    arrival_elevation_cos: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RisUeEntry {
    gain_re: Option<f64>,
    gain_im: Option<f64>,
    departure_azimuth_sin: f64,
    departure_elevation_sin: f64,
    departure_elevation_cos: Option<f64>,
    arrival: f64,
}

fn gain(re: Option<f64>, im: Option<f64>, rng: &mut ChaCha8Rng) -> Complex64 {
    match (re, im) {
        (None, None) => random_unit_gain(rng),
        (re, im) => Complex64::new(re.unwrap_or(0.0), im.unwrap_or(0.0)),
    }
}

fn dir2(az: f64, el_sin: f64, el_cos: Option<f64>) -> Result<PhysicalDirection2D> {
    match el_cos {
        Some(c) => PhysicalDirection2D::with_cos(az, el_sin, c),
        None => PhysicalDirection2D::new(az, el_sin),
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let d = SystemParams::default();
        let params = SystemParams {
            n_tx: self.n_tx.unwrap_or(d.n_tx),
            n_rx: self.n_rx.unwrap_or(d.n_rx),
            n_rf: self.n_rf.unwrap_or(d.n_rf),
            n_streams: self.n_streams.unwrap_or(d.n_streams),
            k_t: self.k_t.unwrap_or(d.k_t),
            f_ris: self.f_ris.unwrap_or(d.f_ris),
            m_subcarriers: self.m_subcarriers.unwrap_or(DEFAULT_SUBCARRIERS),
            bandwidth_hz: self.bandwidth_hz.unwrap_or(d.bandwidth_hz),
            f_center_hz: self.f_center_hz.unwrap_or(d.f_center_hz),
            p_total: self.p_total.unwrap_or(d.p_total),
            light_speed: self.light_speed.unwrap_or(SPEED_OF_LIGHT),
        };
        let config = params.build()?;

        let seed = self.seed.unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bs = self
            .bs_ris_path
            .into_iter()
            .map(|p| {
                BsRisPath::new(
                    gain(p.gain_re, p.gain_im, &mut rng),
                    PhysicalDirection1D::new(p.departure)?,
                    dir2(p.arrival_azimuth_sin, p.arrival_elevation_sin, p.arrival_elevation_cos)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let ue = self
            .ris_ue_path
            .into_iter()
            .map(|p| {
                RisUePath::new(
                    gain(p.gain_re, p.gain_im, &mut rng),
                    dir2(
                        p.departure_azimuth_sin,
                        p.departure_elevation_sin,
                        p.departure_elevation_cos,
                    )?,
                    PhysicalDirection1D::new(p.arrival)?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let channels = ChannelSet::new(bs, ue, &config)?;

        let architecture = match self.architecture {
            Some(s) => s.parse()?,
            None => Architecture::TpPaperLiteral,
        };
        let subcarriers = match self.subcarrier_selection {
            None => SubcarrierSelection::Edges,
            Some(SelectionField::Named(s)) => match s.as_str() {
                "edges" => SubcarrierSelection::Edges,
                "all" => SubcarrierSelection::All,
                other => {
                    return Err(Error::Scenario(format!(
                        "subcarrier_selection {other:?}: expected \"edges\", \"all\" or a list"
                    )))
                }
            },
            Some(SelectionField::Indices(v)) => SubcarrierSelection::List(v),
        };
        subcarriers.resolve(config.m_subcarriers())?;
        let grid_points = self.grid_points.unwrap_or(DEFAULT_GRID_POINTS);
        if grid_points < 2 {
            return Err(Error::Scenario("grid_points must be at least 2".into()));
        }
        let noise_variance = self.noise_variance.unwrap_or(0.0);
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::Scenario(format!(
                "noise_variance {noise_variance} must be >= 0"
            )));
        }

        Ok(Scenario {
            config,
            channels,
            sweep: SweepSpec {
                grid_points,
                subcarriers,
            },
            architecture,
            seed,
            noise: NoiseModel {
                variance: noise_variance,
                seed,
            },
        })
    }
}
