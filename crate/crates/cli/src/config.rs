//! Run configuration (a single JSON document) and the bundled presets.

use std::path::{Path, PathBuf};

use rabishift::dynamics::{ModeWindow, TimeGrid};
use rabishift::refmodels::{resonant_offset, ThreeLevelParams};
use rabishift::{Geometry, SystemParams};
use serde::{Deserialize, Serialize};

use crate::energy::Energy;
use crate::error::CliError;

/// Largest well side length handled by the one-photon engines.
pub const MAX_WELL_SIDE: usize = 2001;
/// Largest chain handled by the one-photon engines.
pub const MAX_CHAIN_SITES: usize = 2_000_000;

pub const DEFAULT_WEIGHT_CUTOFF: f64 = 1e-16;
pub const DEFAULT_SITE_ENERGY: f64 = 1.5;

/// Hopping that keeps the N = 20000 level-spacing to coupling ratio at N = 100.
pub const SCALED_HOP_W: f64 = 0.25 * (101.0 / 20_001.0) * (101.0 / 20_001.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `g·√(n_sites)`.
    Collective(Energy),
    /// `g` per atom.
    PerAtom(Energy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    OnePhoton,
    TwoPhoton,
    ThreeLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensePrefix {
    /// Prefix covers `[0, end)` ns.
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGridSpec {
    pub t_max: f64,
    pub n_points: usize,
    #[serde(default)]
    pub dense_prefix: Option<DensePrefix>,
}

impl Default for TimeGridSpec {
    /// 2000 points over 3 ns, 500 of them below 0.15 ns.
    fn default() -> Self {
        TimeGridSpec {
            t_max: 3.0,
            n_points: 2000,
            dense_prefix: Some(DensePrefix {
                end: 0.15,
                points: 500,
            }),
        }
    }
}

impl TimeGridSpec {
    pub fn build(&self) -> Result<TimeGrid, CliError> {
        let grid = match self.dense_prefix {
            Some(p) => TimeGrid::with_dense_prefix(self.t_max, self.n_points, p.end, p.points),
            None => TimeGrid::uniform(self.t_max, self.n_points),
        };
        grid.map_err(|e| CliError::config(format!("time_grid: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoPhotonSpec {
    /// Free-state projections are averaged over `t ≤ average_until` ns.
    pub average_until: f64,
    /// 0 skips the projections.
    pub max_projection_samples: usize,
    /// Ritz values for the spectrum beyond the dense cap.
    pub lanczos_steps: usize,
    pub force_krylov: bool,
}

impl Default for TwoPhotonSpec {
    fn default() -> Self {
        TwoPhotonSpec {
            average_until: 3.0,
            max_projection_samples: 200,
            lanczos_steps: 300,
            force_krylov: false,
        }
    }
}

/// Three-level model. `g` defaults to the collective coupling and the upper
/// level to the resonant offset `½(δ + √(4g² + δ²))` of each detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLevelSpec {
    #[serde(default)]
    pub g: Option<Energy>,
    pub mu: f64,
    #[serde(default)]
    pub upper_offset: Option<Energy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub geometry: Geometry,
    pub hop_w: Energy,
    #[serde(default = "default_site_energy")]
    pub site_energy: Energy,
    pub coupling: Coupling,
    /// Photon detunings `ħω − ε₀` from the lowest exciton level.
    pub detunings: Vec<Energy>,
    #[serde(default)]
    pub time_grid: TimeGridSpec,
    #[serde(default = "default_sectors")]
    pub sectors: Vec<Sector>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Roots lighter than this are left out of `weights.csv`.
    #[serde(default = "default_weight_cutoff")]
    pub weight_cutoff: f64,
    #[serde(default)]
    pub mode_window: Option<ModeWindow>,
    /// Also export modes whose time-averaged population exceeds this.
    #[serde(default)]
    pub population_threshold: Option<f64>,
    #[serde(default)]
    pub two_photon: TwoPhotonSpec,
    #[serde(default)]
    pub three_level: Option<ThreeLevelSpec>,
}

fn default_site_energy() -> Energy {
    Energy(DEFAULT_SITE_ENERGY)
}

fn default_sectors() -> Vec<Sector> {
    vec![Sector::OnePhoton]
}

fn default_weight_cutoff() -> f64 {
    DEFAULT_WEIGHT_CUTOFF
}

impl RunConfig {
    /// Reads a config file. A sidecar written by this tool is accepted too;
    /// its embedded config is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("invalid JSON: {e}")))?;
        if value.get("tool").is_some() {
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
        }
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.detunings.is_empty() {
            return Err(CliError::config("detunings must not be empty"));
        }
        if self.sectors.is_empty() {
            return Err(CliError::config("sectors must not be empty"));
        }
        if !(self.weight_cutoff >= 0.0) || !self.weight_cutoff.is_finite() {
            return Err(CliError::config(format!(
                "weight_cutoff must be a non-negative number, got {}",
                self.weight_cutoff
            )));
        }
        if let Some(w) = self.mode_window {
            if w.lo == 0 || w.lo > w.hi {
                return Err(CliError::config(format!(
                    "mode_window {}..={} is empty or starts at 0",
                    w.lo, w.hi
                )));
            }
        }
        self.time_grid.build()?;
        match self.geometry {
            Geometry::Chain { n: 0 }
            | Geometry::Well { nx: 0, .. }
            | Geometry::Well { ny: 0, .. } => {
                return Err(CliError::config("geometry sizes must be at least 1"));
            }
            Geometry::Chain { n } if n > MAX_CHAIN_SITES => {
                return Err(rabishift::Error::Capacity {
                    what: "chain length",
                    requested: n,
                    cap: MAX_CHAIN_SITES,
                }
                .into());
            }
            Geometry::Well { nx, ny } if nx.max(ny) > MAX_WELL_SIDE => {
                return Err(rabishift::Error::Capacity {
                    what: "well side",
                    requested: nx.max(ny),
                    cap: MAX_WELL_SIDE,
                }
                .into());
            }
            _ => {}
        }
        if self.sectors.contains(&Sector::TwoPhoton)
            && !matches!(self.geometry, Geometry::Chain { .. })
        {
            return Err(CliError::config(
                "the two_photon sector requires a chain geometry",
            ));
        }
        if self.sectors.contains(&Sector::ThreeLevel) && self.three_level.is_none() {
            return Err(CliError::config(
                "the three_level sector needs a three_level block",
            ));
        }
        let tp = &self.two_photon;
        if !(tp.average_until > 0.0) || tp.lanczos_steps == 0 {
            return Err(CliError::config(
                "two_photon needs average_until > 0 and lanczos_steps ≥ 1",
            ));
        }
        if let Some(t) = &self.three_level {
            if !(t.mu >= 0.0) || !t.mu.is_finite() {
                return Err(CliError::config(format!(
                    "three_level.mu must be non-negative, got {}",
                    t.mu
                )));
            }
        }
        self.params(self.detunings[0].ev()).validate()?;
        Ok(())
    }

    /// System parameters at photon detuning `detuning` (eV).
    pub fn params(&self, detuning: f64) -> SystemParams {
        let (w, eps) = (self.hop_w.ev(), self.site_energy.ev());
        match self.coupling {
            Coupling::Collective(c) => {
                SystemParams::from_collective(self.geometry, w, eps, c.ev(), detuning)
            }
            Coupling::PerAtom(g) => {
                let (nx, ny) = match self.geometry {
                    Geometry::Chain { n } => (n, 0),
                    Geometry::Well { nx, ny } => (nx, ny),
                };
                SystemParams {
                    n_atoms_x: nx,
                    n_atoms_y: ny,
                    hop_w: w,
                    site_energy: eps,
                    coupling_g: g.ev(),
                    photon_energy: 0.0,
                }
                .with_detuning(detuning)
            }
        }
    }

    pub fn three_level_params(&self, detuning: f64) -> Result<ThreeLevelParams, CliError> {
        let spec = self
            .three_level
            .ok_or_else(|| CliError::config("missing three_level block"))?;
        let g = spec
            .g
            .map(Energy::ev)
            .unwrap_or_else(|| self.params(detuning).collective_coupling());
        let upper = spec
            .upper_offset
            .map(Energy::ev)
            .unwrap_or_else(|| resonant_offset(detuning, g));
        let p = ThreeLevelParams {
            g,
            mu: spec.mu,
            delta: detuning,
            upper_offset: upper,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn detunings_ev(&self) -> Vec<f64> {
        self.detunings.iter().map(|e| e.ev()).collect()
    }
}

/// Bundled presets with a one-line description each.
pub const PRESETS: [(&str, &str); 9] = [
    (
        "fig1",
        "chain N=20000, w=0.25 eV, g√N=30 μeV, δ ∈ {−60, 0, +30} μeV",
    ),
    ("fig1c", "as fig1 at δ=0 only"),
    ("fig2b", "three-level model, g=30 μeV, δ=0, Δ=g, μ=0.01"),
    (
        "fig2c",
        "three-level model, g=30 μeV, δ=−2g, resonant Δ, μ=0.01",
    ),
    (
        "fig2d",
        "three-level model, g=30 μeV, δ=g, resonant Δ, μ=0.01",
    ),
    (
        "fig3",
        "401×401 well, w=0.25 eV, g_w·N=30 μeV, δ ∈ {−60, 0, +30} μeV",
    ),
    (
        "fig4",
        "two photons, chain N=20000 (beyond desk scale: capacity error)",
    ),
    (
        "fig4-scaled",
        "two photons, chain N=100 with w scaled to keep the N=20000 spacing/coupling ratio",
    ),
    ("smoke", "chain N=5, quick one-photon run"),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    let uev = Energy::from_uev;
    let default_detunings = vec![uev(-60.0), uev(0.0), uev(30.0)];
    let base = RunConfig {
        name: Some(name.to_string()),
        geometry: Geometry::Chain { n: 20_000 },
        hop_w: Energy(0.25),
        site_energy: Energy(DEFAULT_SITE_ENERGY),
        coupling: Coupling::Collective(uev(30.0)),
        detunings: default_detunings.clone(),
        time_grid: TimeGridSpec::default(),
        sectors: vec![Sector::OnePhoton],
        output_dir: None,
        weight_cutoff: DEFAULT_WEIGHT_CUTOFF,
        mode_window: Some(ModeWindow { lo: 1, hi: 15 }),
        population_threshold: None,
        two_photon: TwoPhotonSpec::default(),
        three_level: None,
    };
    let three_level = |delta: Energy| RunConfig {
        geometry: Geometry::Chain { n: 1 },
        detunings: vec![delta],
        time_grid: TimeGridSpec {
            t_max: 20.0,
            n_points: 20_001,
            dense_prefix: None,
        },
        sectors: vec![Sector::ThreeLevel],
        mode_window: None,
        three_level: Some(ThreeLevelSpec {
            g: Some(uev(30.0)),
            mu: 0.01,
            upper_offset: None,
        }),
        ..base.clone()
    };
    let cfg = match name {
        "fig1" => base,
        "fig1c" => RunConfig {
            detunings: vec![uev(0.0)],
            ..base
        },
        "fig2b" => three_level(uev(0.0)),
        "fig2c" => three_level(uev(-60.0)),
        "fig2d" => three_level(uev(30.0)),
        "fig3" => RunConfig {
            geometry: Geometry::Well { nx: 401, ny: 401 },
            mode_window: Some(ModeWindow { lo: 1, hi: 5 }),
            ..base
        },
        "fig4" => RunConfig {
            sectors: vec![Sector::TwoPhoton],
            mode_window: None,
            ..base
        },
        "fig4-scaled" => RunConfig {
            geometry: Geometry::Chain { n: 100 },
            hop_w: Energy(SCALED_HOP_W),
            sectors: vec![Sector::TwoPhoton],
            mode_window: None,
            ..base
        },
        "smoke" => RunConfig {
            geometry: Geometry::Chain { n: 5 },
            hop_w: Energy(1e-5),
            detunings: vec![uev(-30.0), uev(0.0), uev(30.0)],
            time_grid: TimeGridSpec {
                t_max: 0.3,
                n_points: 301,
                dense_prefix: None,
            },
            mode_window: Some(ModeWindow { lo: 1, hi: 5 }),
            ..base
        },
        other => {
            return Err(CliError::config(format!(
                "unknown preset {other:?}; available: {}",
                preset_names().join(", ")
            )))
        }
    };
    Ok(cfg)
}
