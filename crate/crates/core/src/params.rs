use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in eV·ns.
pub const HBAR_EV_NS: f64 = 6.582119569e-7;

/// Lattice geometry of the absorber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    /// Linear chain of `n` atoms.
    Chain { n: usize },
    /// Monolayer square lattice of `nx × ny` atoms.
    Well { nx: usize, ny: usize },
}

impl Geometry {
    pub fn n_sites(&self) -> usize {
        match *self {
            Geometry::Chain { n } => n,
            Geometry::Well { nx, ny } => nx * ny,
        }
    }

    /// Number of nearest-neighbour directions, i.e. the band-bottom shift is
    /// `2 w × dimension`.
    pub fn dimension(&self) -> usize {
        match self {
            Geometry::Chain { .. } => 1,
            Geometry::Well { .. } => 2,
        }
    }
}

/// Physical parameters of the photon–absorber system.
///
/// `n_atoms_y == 0` selects a 1D chain of `n_atoms_x` atoms; otherwise an
/// `n_atoms_x × n_atoms_y` square well with isotropic hopping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_atoms_x: usize,
    pub n_atoms_y: usize,
    /// Nearest-neighbour dipole–dipole transfer integral `w` (eV).
    pub hop_w: f64,
    /// Atomic excitation energy `ε` (eV).
    pub site_energy: f64,
    /// Per-atom photon coupling `g` (eV).
    pub coupling_g: f64,
    /// Photon energy `ħω` (eV).
    pub photon_energy: f64,
}

impl SystemParams {
    pub fn chain(
        n: usize,
        hop_w: f64,
        site_energy: f64,
        coupling_g: f64,
        photon_energy: f64,
    ) -> Self {
        SystemParams {
            n_atoms_x: n,
            n_atoms_y: 0,
            hop_w,
            site_energy,
            coupling_g,
            photon_energy,
        }
    }

    pub fn well(
        nx: usize,
        ny: usize,
        hop_w: f64,
        site_energy: f64,
        coupling_g: f64,
        photon_energy: f64,
    ) -> Self {
        SystemParams {
            n_atoms_x: nx,
            n_atoms_y: ny,
            hop_w,
            site_energy,
            coupling_g,
            photon_energy,
        }
    }

    /// Builds parameters from the collective coupling `g·√(n_sites)` and the
    /// detuning `ħω − ε₀` instead of `g` and `ħω`.
    pub fn from_collective(
        geometry: Geometry,
        hop_w: f64,
        site_energy: f64,
        collective_coupling: f64,
        detuning: f64,
    ) -> Self {
        let (nx, ny) = match geometry {
            Geometry::Chain { n } => (n, 0),
            Geometry::Well { nx, ny } => (nx, ny),
        };
        let mut p = SystemParams {
            n_atoms_x: nx,
            n_atoms_y: ny,
            hop_w,
            site_energy,
            coupling_g: collective_coupling / (geometry.n_sites().max(1) as f64).sqrt(),
            photon_energy: 0.0,
        };
        p.photon_energy = p.lowest_level() + detuning;
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms_x == 0 {
            return Err(Error::domain("n_atoms_x must be at least 1"));
        }
        if !(self.hop_w > 0.0) || !self.hop_w.is_finite() {
            return Err(Error::domain(format!(
                "hop_w must be positive, got {}",
                self.hop_w
            )));
        }
        if !(self.coupling_g >= 0.0) || !self.coupling_g.is_finite() {
            return Err(Error::domain(format!(
                "coupling_g must be non-negative, got {}",
                self.coupling_g
            )));
        }
        if !self.site_energy.is_finite() || !self.photon_energy.is_finite() {
            return Err(Error::domain("energies must be finite"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Geometry {
        if self.n_atoms_y == 0 {
            Geometry::Chain { n: self.n_atoms_x }
        } else {
            Geometry::Well {
                nx: self.n_atoms_x,
                ny: self.n_atoms_y,
            }
        }
    }

    pub fn n_sites(&self) -> usize {
        self.geometry().n_sites()
    }

    /// Band bottom `ε₀ = ε − 2w·d` for lattice dimension `d`.
    pub fn band_bottom(&self) -> f64 {
        self.site_energy - 2.0 * self.hop_w * self.geometry().dimension() as f64
    }

    /// Lowest exciton level `ε₀ = ε − 2w·Σ_axes cos(π/(N_axis+1))`, the
    /// minimal transition energy that detunings are measured from.
    pub fn lowest_level(&self) -> f64 {
        let axis = |n: usize| (std::f64::consts::PI / (n + 1) as f64).cos();
        let sum = match self.geometry() {
            Geometry::Chain { n } => axis(n),
            Geometry::Well { nx, ny } => axis(nx) + axis(ny),
        };
        self.site_energy - 2.0 * self.hop_w * sum
    }

    /// `ε − ε₀`, without cancellation.
    pub fn site_to_lowest(&self) -> f64 {
        let axis = |n: usize| (std::f64::consts::PI / (n + 1) as f64).cos();
        2.0 * self.hop_w
            * match self.geometry() {
                Geometry::Chain { n } => axis(n),
                Geometry::Well { nx, ny } => axis(nx) + axis(ny),
            }
    }

    /// Detuning `δ = ħω − ε₀` from the lowest exciton level.
    pub fn detuning(&self) -> f64 {
        self.photon_energy - self.lowest_level()
    }

    /// Collective coupling `g·√(n_sites)`, the Rabi half-splitting of the
    /// two-level picture.
    pub fn collective_coupling(&self) -> f64 {
        self.coupling_g * (self.n_sites() as f64).sqrt()
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.photon_energy = self.lowest_level() + detuning;
        self
    }

    pub fn with_coupling(mut self, coupling_g: f64) -> Self {
        self.coupling_g = coupling_g;
        self
    }

    /// Effective exciton mass `ħ²/(2wd²)` in electron masses for lattice
    /// spacing `spacing_nm`. Reporting only.
    pub fn effective_mass(&self, spacing_nm: f64) -> f64 {
        const HBAR_J_S: f64 = 1.054_571_817e-34;
        const EV_J: f64 = 1.602_176_634e-19;
        const ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;
        let d = spacing_nm * 1e-9;
        HBAR_J_S * HBAR_J_S / (2.0 * self.hop_w * EV_J * d * d) / ELECTRON_MASS_KG
    }
}
